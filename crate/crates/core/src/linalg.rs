//! Incremental rank tracking for sparse vectors over the exact scalar field.

use crate::scalars::Scalar;

/// Maintains an echelon basis of sparse vectors keyed by an ordered type.
pub struct SparseRank<K: Ord + Clone> {
    rows: Vec<(K, Vec<(K, Scalar)>)>,
}

impl<K: Ord + Clone> SparseRank<K> {
    pub fn new() -> Self {
        SparseRank { rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `vec` against the basis; if a nonzero remainder survives, add
    /// it and return true.
    pub fn insert(&mut self, vec: Vec<(K, Scalar)>) -> bool {
        let mut v: Vec<(K, Scalar)> = vec.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        loop {
            let lead = match v.first() {
                None => return false,
                Some((k, _)) => k.clone(),
            };
            let row = self.rows.iter().find(|(k, _)| *k == lead);
            match row {
                None => {
                    // Normalize so the leading coefficient is 1.
                    let lc = v[0].1.clone();
                    let inv = lc.inv().expect("nonzero leading coefficient");
                    for (_, c) in v.iter_mut() {
                        *c = c.mul(&inv);
                    }
                    self.rows.push((lead, v));
                    self.rows.sort_by(|a, b| a.0.cmp(&b.0));
                    return true;
                }
                Some((_, basis_row)) => {
                    let factor = v[0].1.clone();
                    let mut merged: std::collections::BTreeMap<K, Scalar> =
                        v.iter().map(|(k, c)| (k.clone(), c.clone())).collect();
                    for (k, c) in basis_row {
                        let delta = c.mul(&factor).neg();
                        match merged.get_mut(k) {
                            Some(e) => {
                                let s = e.add(&delta);
                                if s.is_zero() {
                                    merged.remove(k);
                                } else {
                                    *e = s;
                                }
                            }
                            None => {
                                merged.insert(k.clone(), delta);
                            }
                        }
                    }
                    v = merged.into_iter().collect();
                }
            }
        }
    }
}

impl<K: Ord + Clone> Default for SparseRank<K> {
    fn default() -> Self {
        Self::new()
    }
}
