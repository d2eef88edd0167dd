//! The quasi vertex Lie algebra data model: presented structure constants,
//! current relations, derived twist algebras and their quotients.

pub mod brackets;
pub mod checks;
pub mod reduce;

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::currents::{FormalModes, GeneratorIndex};
use crate::error::QvlaError;
use crate::scalars::{FieldCtx, GroupElem, Scalar};

/// One nonzero block of the structure function: the coefficient current for
/// delta scale `alpha`, current scale `beta` and derivative orders (i, j).
#[derive(Clone, Debug)]
pub struct StructureEntry {
    pub alpha: GroupElem,
    pub beta: GroupElem,
    pub i: u32,
    pub j: u32,
    pub value: Vec<(Scalar, GeneratorIndex)>,
}

/// Per-parameter enumeration behaviour of a generator family.
#[derive(Clone, Debug)]
pub enum ParamRange {
    /// Parameter runs over [-w, w] for the check window w; the family is
    /// infinite.
    Window,
    /// Parameter runs over a fixed finite range (e.g. matrix indices).
    Fixed(i64, i64),
}

#[derive(Clone, Debug)]
pub struct FamilySchema {
    pub name: String,
    pub central: bool,
    pub params: Vec<ParamRange>,
}

impl FamilySchema {
    pub fn finite(&self) -> bool {
        self.params
            .iter()
            .all(|p| matches!(p, ParamRange::Fixed(_, _)))
    }

    /// All generators of this family within the window.
    pub fn generators(&self, w: i64) -> Vec<GeneratorIndex> {
        let mut tuples: Vec<Vec<i64>> = vec![Vec::new()];
        for p in &self.params {
            let (lo, hi) = match p {
                ParamRange::Window => (-w, w),
                ParamRange::Fixed(lo, hi) => (*lo, *hi),
            };
            let mut next = Vec::new();
            for t in &tuples {
                for v in lo..=hi {
                    let mut t2 = t.clone();
                    t2.push(v);
                    next.push(t2);
                }
            }
            tuples = next;
        }
        tuples
            .into_iter()
            .map(|params| GeneratorIndex {
                family: self.name.clone(),
                params,
            })
            .collect()
    }
}

/// A directed current relation  sum mu * (z^eps d/dz)^n a(alpha z) = 0.
#[derive(Clone, Debug)]
pub struct Relation {
    pub terms: Vec<RelTerm>,
}

#[derive(Clone, Debug)]
pub struct RelTerm {
    pub mu: Scalar,
    pub n: u32,
    pub alpha: GroupElem,
    pub family: GeneratorIndex,
}

pub type StructureFn =
    Arc<dyn Fn(&GeneratorIndex, &GeneratorIndex) -> Vec<StructureEntry> + Send + Sync>;
pub type RelationFn = Arc<dyn Fn(&GeneratorIndex) -> Vec<Relation> + Send + Sync>;
/// Expansion of the abstract mode a(m) of the presented algebra in its
/// declared canonical basis. Empty = zero.
pub type GBasisFn =
    Arc<dyn Fn(&GeneratorIndex, i64) -> Vec<(Scalar, GeneratorIndex, i64)> + Send + Sync>;

/// A presented quasi vertex Lie algebra.
#[derive(Clone)]
pub struct Qvla {
    pub name: String,
    pub epsilon: i64,
    pub ctx: Arc<FieldCtx>,
    pub families: Vec<FamilySchema>,
    /// Declared generators of the associated group (used to enumerate
    /// group windows in checks).
    pub gamma_generators: Vec<GroupElem>,
    pub maximal_declared: bool,
    pub structure: StructureFn,
    pub relations: RelationFn,
    pub g_basis: GBasisFn,
}

impl Qvla {
    pub fn family(&self, name: &str) -> Option<&FamilySchema> {
        self.families.iter().find(|f| f.name == name)
    }

    pub fn is_central(&self, g: &GeneratorIndex) -> bool {
        self.family(&g.family).map_or(false, |f| f.central)
    }

    pub fn check_declared(&self, g: &GeneratorIndex) -> Result<(), QvlaError> {
        match self.family(&g.family) {
            None => Err(QvlaError::Schema(format!("unknown family '{}'", g.family))),
            Some(f) => {
                if f.params.len() != g.params.len() {
                    Err(QvlaError::Schema(format!(
                        "family '{}' takes {} parameters, got {}",
                        g.family,
                        f.params.len(),
                        g.params.len()
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn entries(&self, a: &GeneratorIndex, b: &GeneratorIndex) -> Vec<StructureEntry> {
        (self.structure)(a, b)
    }

    /// Noncentral generators within the parameter window.
    pub fn noncentral_generators(&self, w: i64) -> Vec<GeneratorIndex> {
        self.families
            .iter()
            .filter(|f| !f.central)
            .flat_map(|f| f.generators(w))
            .collect()
    }

    /// All group elements with generator exponents bounded by w.
    pub fn group_window(&self, w: i64) -> Vec<GroupElem> {
        let mut out: Vec<GroupElem> = vec![GroupElem::identity(&self.ctx)];
        for g in &self.gamma_generators {
            let mut next = Vec::new();
            for e in -w..=w {
                let p = g.pow(e, &self.ctx);
                for x in &out {
                    next.push(x.mul(&p, &self.ctx));
                }
            }
            out = next;
        }
        out.sort();
        out.dedup();
        out
    }

    /// Declared canonical basis of the presented algebra over a mode window,
    /// derived from the g_basis expansion: a symbol (a, m) is basic when it
    /// expands to itself.
    pub fn g_basis_window(&self, w_param: i64, w_mode: i64) -> Vec<(GeneratorIndex, i64)> {
        let mut out = Vec::new();
        for f in &self.families {
            for g in f.generators(w_param) {
                for m in -w_mode..=w_mode {
                    let exp = (self.g_basis)(&g, m);
                    if exp.len() == 1 && exp[0].1 == g && exp[0].2 == m && exp[0].0.is_one() {
                        out.push((g.clone(), m));
                    }
                }
            }
        }
        out
    }
}

/// A mode symbol a^{alpha,zeta}(m) of a derived twist algebra.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub a: GeneratorIndex,
    pub alpha: GroupElem,
    pub m: i64,
}

impl Mode {
    pub fn new(a: GeneratorIndex, alpha: GroupElem, m: i64) -> Self {
        Mode { a, alpha, m }
    }

    /// Well-founded-enough comparison key for the directed rewriting: scales
    /// closer to the identity come first, then family, params and mode index.
    pub fn rewrite_key(&self) -> (u32, i64, Vec<i64>, String, Vec<i64>, i64) {
        let (t, l1, free) = self.alpha.rewrite_key();
        (
            t,
            l1,
            free,
            self.a.family.clone(),
            self.a.params.clone(),
            self.m,
        )
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}^{{{}}}({})", self.a, render_group(&self.alpha), self.m)
    }
}

pub fn render_group(g: &GroupElem) -> String {
    let mut parts = Vec::new();
    if g.torsion != 0 {
        if g.torsion == 1 {
            parts.push("z".to_string());
        } else {
            parts.push(format!("z^{}", g.torsion));
        }
    }
    for (i, &e) in g.free.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if e == 1 {
            parts.push(format!("q{}", i + 1));
        } else {
            parts.push(format!("q{}^{}", i + 1, e));
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// A finite scalar combination of modes sharing one twist, in relation-reduced
/// normal form when produced by the quotient machinery.
#[derive(Clone, Debug, PartialEq)]
pub struct LieElement {
    pub zeta: i64,
    pub terms: BTreeMap<Mode, Scalar>,
}

impl LieElement {
    pub fn zero(zeta: i64) -> Self {
        LieElement {
            zeta,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(zeta: i64, mode: Mode, c: Scalar) -> Self {
        let mut e = Self::zero(zeta);
        e.add_term(mode, c);
        e
    }

    pub fn add_term(&mut self, mode: Mode, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mode) {
            Some(e) => {
                let s = e.add(&c);
                if s.is_zero() {
                    self.terms.remove(&mode);
                } else {
                    *e = s;
                }
            }
            None => {
                self.terms.insert(mode, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, QvlaError> {
        if self.zeta != other.zeta {
            return Err(QvlaError::Contract(
                "cannot add elements of different twist algebras".into(),
            ));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero(self.zeta);
        }
        LieElement {
            zeta: self.zeta,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.mul(s)))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        LieElement {
            zeta: self.zeta,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_formal(zeta: i64, fm: &FormalModes) -> Self {
        let mut e = Self::zero(zeta);
        for ((a, alpha, m), c) in fm {
            e.add_term(Mode::new(a.clone(), alpha.clone(), *m), c.clone());
        }
        e
    }
}

impl std::fmt::Display for LieElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({})*{}", crate::scalars::render_scalar(c), m))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// An element of the presented algebra expanded in its declared basis.
pub type GElement = BTreeMap<(GeneratorIndex, i64), Scalar>;

pub fn g_add_term(e: &mut GElement, key: (GeneratorIndex, i64), c: Scalar) {
    if c.is_zero() {
        return;
    }
    match e.get_mut(&key) {
        Some(x) => {
            let s = x.add(&c);
            if s.is_zero() {
                e.remove(&key);
            } else {
                *x = s;
            }
        }
        None => {
            e.insert(key, c);
        }
    }
}

pub fn render_gelement(e: &GElement) -> String {
    if e.is_empty() {
        return "0".to_string();
    }
    let parts: Vec<String> = e
        .iter()
        .map(|((a, m), c)| format!("({})*{}({})", crate::scalars::render_scalar(c), a, m))
        .collect();
    parts.join(" + ")
}
