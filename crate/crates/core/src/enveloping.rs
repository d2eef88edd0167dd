//! The enveloping vertex algebra of the twist-zero derived algebra: PBW
//! vectors over the vacuum, bracket-assisted normal ordering, per-coefficient
//! vertex operators and the group action.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use crate::currents::{gen_binomial, GeneratorIndex};
use crate::error::QvlaError;
use crate::qvla::brackets::zeta_mode_bracket;
use crate::qvla::reduce::reduce_mode;
use crate::qvla::{LieElement, Mode, Qvla};
use crate::report::Report;
use crate::scalars::{embed_power, GroupElem, Scalar};

/// A normal-ordered word of creation modes applied to the vacuum; sorted by
/// ascending mode index (descending depth), then family, params, scale.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub Vec<Mode>);

impl Monomial {
    pub fn vacuum() -> Self {
        Monomial(Vec::new())
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|m| -m.m).sum()
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for m in &self.0 {
            write!(f, "{} ", m)?;
        }
        write!(f, "|0>")
    }
}

/// Finite scalar combination of normal-ordered monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct PbwVector {
    pub terms: BTreeMap<Monomial, Scalar>,
}

impl PbwVector {
    pub fn zero() -> Self {
        PbwVector {
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum(qvla: &Qvla) -> Self {
        let mut v = Self::zero();
        v.add_term(Monomial::vacuum(), Scalar::one(&qvla.ctx));
        v
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                let s = e.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *e = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        PbwVector {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.mul(s)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }
}

impl std::fmt::Display for PbwVector {
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

/// The coefficient of the rho transcription:
/// rho((d^n a) (x) t^m) = (-1)^n n! binom(m,n) a^{alpha,0}(m-n).
pub fn rho_mode(
    qvla: &Qvla,
    n: u32,
    a: &GeneratorIndex,
    alpha: &GroupElem,
    m: i64,
) -> Result<LieElement, QvlaError> {
    let ctx = &qvla.ctx;
    let mut c = gen_binomial(ctx, m, n).mul(&crate::currents::factorial(ctx, n));
    if n % 2 == 1 {
        c = c.neg();
    }
    let e = LieElement::single(0, Mode::new(a.clone(), alpha.clone(), m - n as i64), c);
    reduce_mode(qvla, 0, &e)
}

/// Engine for enveloping-algebra computations, with a task-local memo cache
/// for normal ordering.
pub struct Enveloper<'a> {
    pub qvla: &'a Qvla,
    cache: RefCell<HashMap<Vec<Mode>, PbwVector>>,
    /// Max i+j over structure entries, bounding how much a bracket can raise
    /// the depth of a mode.
    slack: i64,
}

/// Canonical PBW comparison key: ascending mode index is descending depth.
fn pbw_key(m: &Mode) -> (i64, String, Vec<i64>, u32, Vec<i64>) {
    (
        m.m,
        m.a.family.clone(),
        m.a.params.clone(),
        m.alpha.torsion,
        m.alpha.free.clone(),
    )
}

impl<'a> Enveloper<'a> {
    pub fn new(qvla: &'a Qvla) -> Self {
        // A window scan is enough: entry orders do not depend on the window
        // for the built-in families, and spec files are finite tables.
        let gens = qvla.noncentral_generators(2);
        let mut slack = 0i64;
        for a in &gens {
            for b in &gens {
                for e in qvla.entries(a, b) {
                    slack = slack.max(e.i as i64 + e.j as i64);
                }
            }
        }
        Enveloper {
            qvla,
            cache: RefCell::new(HashMap::new()),
            slack,
        }
    }

    /// Bound beyond which a(j) annihilates every vector of the given degree.
    pub fn annihilation_bound(&self, degree: i64) -> i64 {
        degree * (1 + self.slack) + 1
    }

    /// Normal order a word of modes applied to the vacuum. Any mode with
    /// index >= 0 adjacent to the vacuum kills the term; out-of-order pairs
    /// are swapped with a bracket correction.
    pub fn normal_order(&self, word: &[Mode]) -> Result<PbwVector, QvlaError> {
        // Expand non-basis modes first.
        let mut expanded: Vec<(Scalar, Vec<Mode>)> =
            vec![(Scalar::one(&self.qvla.ctx), Vec::new())];
        for m in word {
            let nf = reduce_mode(self.qvla, 0, &LieElement::single(
                0,
                m.clone(),
                Scalar::one(&self.qvla.ctx),
            ))?;
            let mut next = Vec::new();
            for (c0, w0) in &expanded {
                for (bm, bc) in &nf.terms {
                    let mut w = w0.clone();
                    w.push(bm.clone());
                    next.push((c0.mul(bc), w));
                }
            }
            expanded = next;
        }
        let mut out = PbwVector::zero();
        for (c, w) in expanded {
            let v = self.normal_order_basis(&w)?;
            out = out.add(&v.scale(&c));
        }
        Ok(out)
    }

    fn normal_order_basis(&self, word: &[Mode]) -> Result<PbwVector, QvlaError> {
        if let Some(v) = self.cache.borrow().get(word) {
            return Ok(v.clone());
        }
        let ctx = &self.qvla.ctx;
        let mut result = PbwVector::zero();
        let mut work: Vec<(Scalar, Vec<Mode>)> = vec![(Scalar::one(ctx), word.to_vec())];
        while let Some((c, w)) = work.pop() {
            if c.is_zero() {
                continue;
            }
            // Rightmost annihilator moves right; adjacent to vacuum it dies.
            if let Some(pos) = w.iter().rposition(|m| m.m >= 0) {
                if pos + 1 == w.len() {
                    continue;
                }
                let mut swapped = w.clone();
                swapped.swap(pos, pos + 1);
                let bracket = zeta_mode_bracket(self.qvla, 0, &w[pos], &w[pos + 1])?;
                work.push((c.clone(), swapped));
                for (bm, bc) in &bracket.terms {
                    let mut wb: Vec<Mode> = w[..pos].to_vec();
                    wb.push(bm.clone());
                    wb.extend_from_slice(&w[pos + 2..]);
                    work.push((c.mul(bc), wb));
                }
                continue;
            }
            // All creation: fix the first inversion, if any.
            let inv = (0..w.len().saturating_sub(1))
                .find(|&i| pbw_key(&w[i]) > pbw_key(&w[i + 1]));
            match inv {
                None => result.add_term(Monomial(w), c),
                Some(i) => {
                    let mut swapped = w.clone();
                    swapped.swap(i, i + 1);
                    let bracket = zeta_mode_bracket(self.qvla, 0, &w[i], &w[i + 1])?;
                    work.push((c.clone(), swapped));
                    for (bm, bc) in &bracket.terms {
                        let mut wb: Vec<Mode> = w[..i].to_vec();
                        wb.push(bm.clone());
                        wb.extend_from_slice(&w[i + 2..]);
                        work.push((c.mul(bc), wb));
                    }
                }
            }
        }
        self.cache
            .borrow_mut()
            .insert(word.to_vec(), result.clone());
        Ok(result)
    }

    /// Action of a single algebra mode on a vector.
    pub fn apply_mode(&self, mode: &Mode, v: &PbwVector) -> Result<PbwVector, QvlaError> {
        let mut out = PbwVector::zero();
        for (mono, c) in &v.terms {
            let mut w = Vec::with_capacity(mono.0.len() + 1);
            w.push(mode.clone());
            w.extend_from_slice(&mono.0);
            let nv = self.normal_order(&w)?;
            out = out.add(&nv.scale(c));
        }
        Ok(out)
    }

    pub fn apply_elem(&self, e: &LieElement, v: &PbwVector) -> Result<PbwVector, QvlaError> {
        let mut out = PbwVector::zero();
        for (mode, c) in &e.terms {
            let nv = self.apply_mode(mode, v)?;
            out = out.add(&nv.scale(c));
        }
        Ok(out)
    }

    /// The generator vector a^{alpha,0} = a^{alpha,0}(-1) |0>.
    pub fn generator_vector(
        &self,
        a: &GeneratorIndex,
        alpha: &GroupElem,
    ) -> Result<PbwVector, QvlaError> {
        self.normal_order(&[Mode::new(a.clone(), alpha.clone(), -1)])
    }

    /// v_n w, computed by structural recursion on v with the iterate formula
    ///   (x_m u)_n = sum_i (-1)^i binom(m,i)
    ///               (x_{m-i} u_{n+i} - (-1)^m u_{m+n-i} x_i),  m <= -1,
    /// base case |0>_n w = delta_{n,-1} w.
    pub fn vertex_coefficient(
        &self,
        v: &PbwVector,
        n: i64,
        w: &PbwVector,
    ) -> Result<PbwVector, QvlaError> {
        let mut out = PbwVector::zero();
        for (mono, c) in &v.terms {
            let r = self.vertex_coeff_mono(&mono.0, n, w)?;
            out = out.add(&r.scale(c));
        }
        Ok(out)
    }

    fn vertex_coeff_mono(
        &self,
        word: &[Mode],
        n: i64,
        w: &PbwVector,
    ) -> Result<PbwVector, QvlaError> {
        let ctx = &self.qvla.ctx;
        if word.is_empty() {
            return Ok(if n == -1 { w.clone() } else { PbwVector::zero() });
        }
        let x = &word[0];
        let u = &word[1..];
        let m = x.m;
        debug_assert!(m <= -1, "PBW words consist of creation modes");
        let du: i64 = u.iter().map(|md| -md.m).sum();
        let dw = w.degree();
        let mut out = PbwVector::zero();
        // First series: x_{m-i} (u_{n+i} w); u_{n+i} w = 0 once n+i exceeds
        // the annihilation bound of deg u acting on deg w.
        let bound1 = self.annihilation_bound(du + dw) - n;
        let mut i = 0i64;
        while i <= bound1.max(0) {
            let uc = self.vertex_coeff_mono(u, n + i, w)?;
            if !uc.is_zero() {
                let mode = Mode::new(x.a.clone(), x.alpha.clone(), m - i);
                let term = self.apply_mode(&mode, &uc)?;
                let mut coeff = gen_binomial(ctx, m, i as u32);
                if i % 2 == 1 {
                    coeff = coeff.neg();
                }
                out = out.add(&term.scale(&coeff));
            }
            i += 1;
        }
        // Second series: -(-1)^m u_{m+n-i} (x_i w); x_i w = 0 for large i.
        let bound2 = self.annihilation_bound(dw);
        for i in 0..=bound2.max(0) {
            let mode = Mode::new(x.a.clone(), x.alpha.clone(), i);
            let xw = self.apply_mode(&mode, w)?;
            if xw.is_zero() {
                continue;
            }
            let term = self.vertex_coeff_mono(u, m + n - i, &xw)?;
            let mut coeff = gen_binomial(ctx, m, i as u32);
            if i % 2 == 1 {
                coeff = coeff.neg();
            }
            if m.rem_euclid(2) == 0 {
                coeff = coeff.neg();
            }
            out = out.add(&term.scale(&coeff));
        }
        Ok(out)
    }

    /// The canonical derivation D v = v_{-2} |0>.
    pub fn derivation(&self, v: &PbwVector) -> Result<PbwVector, QvlaError> {
        self.vertex_coefficient(v, -2, &PbwVector::vacuum(self.qvla))
    }

    /// R_lambda: a^{alpha,0}(m) -> lambda^{(m+1)(eps-1)} a^{alpha lambda^-1,0}(m),
    /// fixing the vacuum, applied mode-wise then re-normal-ordered.
    pub fn r_action(&self, lambda: &GroupElem, v: &PbwVector) -> Result<PbwVector, QvlaError> {
        let ctx = &self.qvla.ctx;
        let eps = self.qvla.epsilon;
        let mut out = PbwVector::zero();
        for (mono, c) in &v.terms {
            let mut factor = c.clone();
            let mut word = Vec::with_capacity(mono.0.len());
            for md in &mono.0 {
                factor = factor.mul(&embed_power(ctx, lambda, (md.m + 1) * (eps - 1)));
                word.push(Mode::new(
                    md.a.clone(),
                    md.alpha.mul(&lambda.inv(ctx), ctx),
                    md.m,
                ));
            }
            let nv = self.normal_order(&word)?;
            out = out.add(&nv.scale(&factor));
        }
        Ok(out)
    }
}

/// Count of PBW monomials of degree d, when the per-degree creation-mode set
/// is finite; None means the count is unavailable (infinite family or
/// infinite group orbit).
pub fn graded_dimension(qvla: &Qvla, d: i64) -> Result<Option<u64>, QvlaError> {
    if d < 0 {
        return Ok(Some(0));
    }
    if d == 0 {
        return Ok(Some(1));
    }
    // Finiteness: every family finite and the group torsion-only.
    if !qvla.families.iter().all(|f| f.finite())
        || !qvla.gamma_generators.iter().all(|g| g.free.iter().all(|&e| e == 0))
    {
        return Ok(None);
    }
    let ctx = &qvla.ctx;
    // Enumerate the full torsion subgroup generated by the declared gens.
    let mut scales: Vec<GroupElem> = vec![GroupElem::identity(ctx)];
    loop {
        let mut grew = false;
        let mut next = scales.clone();
        for s in &scales {
            for g in &qvla.gamma_generators {
                let p = s.mul(g, ctx);
                if !next.contains(&p) {
                    next.push(p);
                    grew = true;
                }
            }
        }
        scales = next;
        if !grew {
            break;
        }
    }
    scales.sort();
    // Basis creation modes per depth.
    let mut items: Vec<i64> = Vec::new(); // weights, one per basis mode
    for f in &qvla.families {
        for g in f.generators(0) {
            for n in 1..=d {
                let m = -n;
                if f.central && m != -1 {
                    continue;
                }
                for alpha in &scales {
                    let e = LieElement::single(
                        0,
                        Mode::new(g.clone(), alpha.clone(), m),
                        Scalar::one(ctx),
                    );
                    let nf = reduce_mode(qvla, 0, &e)?;
                    let mode = Mode::new(g.clone(), alpha.clone(), m);
                    if nf.terms.len() == 1
                        && nf.terms.get(&mode).map_or(false, |c| c.is_one())
                    {
                        items.push(n);
                    }
                }
            }
        }
    }
    // Unbounded knapsack over the creation modes.
    let mut ways = vec![0u64; d as usize + 1];
    ways[0] = 1;
    for &n in &items {
        for j in n as usize..=d as usize {
            ways[j] += ways[j - n as usize];
        }
    }
    Ok(Some(ways[d as usize]))
}

// ---------------------------------------------------------------------------
// Axiom checks.
// ---------------------------------------------------------------------------

/// Sample sets for the vertex-algebra checks.
pub struct VertexSamples {
    /// Vectors u, v for products and brackets.
    pub left: Vec<PbwVector>,
    /// Vectors w acted upon.
    pub right: Vec<PbwVector>,
    /// Mode indices.
    pub modes: Vec<i64>,
}

/// Deterministic default samples: generator vectors over a small scale
/// window, a few degree <= depth monomials, and the vacuum.
pub fn default_samples(
    env: &Enveloper,
    scale_window: i64,
    depth: i64,
    mode_window: i64,
) -> Result<VertexSamples, QvlaError> {
    let qvla = env.qvla;
    let gens = qvla.noncentral_generators(1);
    let scales = qvla.group_window(scale_window);
    let mut left = Vec::new();
    for g in &gens {
        for s in &scales {
            let v = env.generator_vector(g, s)?;
            if !v.is_zero() && !left.contains(&v) {
                left.push(v);
            }
        }
    }
    // A few deeper vectors: a(-2)|0>, a(-1)^2|0>, a(-2)a(-1)|0>, a(-1)^depth|0>.
    let mut right = vec![PbwVector::vacuum(qvla)];
    right.extend(left.iter().cloned());
    if let Some(g) = gens.first() {
        let id = GroupElem::identity(&qvla.ctx);
        let m1 = Mode::new(g.clone(), id.clone(), -1);
        let m2 = Mode::new(g.clone(), id.clone(), -2);
        for word in [
            vec![m2.clone()],
            vec![m1.clone(), m1.clone()],
            vec![m2.clone(), m1.clone()],
            vec![m1.clone(); depth.max(1) as usize],
        ] {
            let v = env.normal_order(&word)?;
            if !v.is_zero() && !right.contains(&v) {
                right.push(v);
            }
        }
    }
    Ok(VertexSamples {
        left,
        right,
        modes: (-mode_window..=mode_window).collect(),
    })
}

/// Vacuum, creation, Borcherds commutator, skew-symmetry and D-compatibility,
/// all coefficientwise on the samples.
pub fn check_vertex_axioms(
    env: &Enveloper,
    samples: &VertexSamples,
) -> Result<Report, QvlaError> {
    let qvla = env.qvla;
    let ctx = &qvla.ctx;
    let vac = PbwVector::vacuum(qvla);
    let mut report = Report::new(
        "vertex-axioms",
        &format!(
            "{} left, {} right, modes {:?}",
            samples.left.len(),
            samples.right.len(),
            (samples.modes.first(), samples.modes.last())
        ),
    );

    // Vacuum: |0>_n w = delta_{n,-1} w.
    for (wi, w) in samples.right.iter().enumerate() {
        for &n in &samples.modes {
            let got = env.vertex_coefficient(&vac, n, w)?;
            let expect = if n == -1 { w.clone() } else { PbwVector::zero() };
            if got == expect {
                report.record_trivial();
            } else {
                report.record(
                    format!("vacuum n={} w#{}", n, wi),
                    false,
                    Some(format!("{}", got)),
                );
            }
        }
    }
    report.record("vacuum axiom".into(), true, None);

    // Creation: v_{-1}|0> = v and v_n|0> = 0 for n >= 0.
    for (vi, v) in samples.left.iter().enumerate() {
        let got = env.vertex_coefficient(v, -1, &vac)?;
        let pass = got == *v;
        report.record(
            format!("creation v#{}", vi),
            pass,
            if pass { None } else { Some(format!("{}", got)) },
        );
        for n in 0..=2 {
            let z = env.vertex_coefficient(v, n, &vac)?;
            if z.is_zero() {
                report.record_trivial();
            } else {
                report.record(
                    format!("creation-positive v#{} n={}", vi, n),
                    false,
                    Some(format!("{}", z)),
                );
            }
        }
    }

    // Borcherds commutator: [u_m, v_n] w = sum_i binom(m,i) (u_i v)_{m+n-i} w.
    for (ui, u) in samples.left.iter().enumerate() {
        for (vi, v) in samples.left.iter().enumerate() {
            for (wi, w) in samples.right.iter().enumerate() {
                for &m in &samples.modes {
                    for &n in &samples.modes {
                        let lhs = {
                            let vnw = env.vertex_coefficient(v, n, w)?;
                            let a = env.vertex_coefficient(u, m, &vnw)?;
                            let umw = env.vertex_coefficient(u, m, w)?;
                            let b = env.vertex_coefficient(v, n, &umw)?;
                            a.add(&b.scale(&Scalar::from_i64(ctx, -1)))
                        };
                        let mut rhs = PbwVector::zero();
                        let bound = env.annihilation_bound(u.degree() + v.degree());
                        for i in 0..=bound.max(0) {
                            let uiv = env.vertex_coefficient(u, i, v)?;
                            if uiv.is_zero() {
                                continue;
                            }
                            let t = env.vertex_coefficient(&uiv, m + n - i, w)?;
                            rhs = rhs.add(&t.scale(&gen_binomial(ctx, m, i as u32)));
                        }
                        if lhs == rhs {
                            report.record_trivial();
                        } else {
                            report.record(
                                format!("borcherds u#{} v#{} w#{} m={} n={}", ui, vi, wi, m, n),
                                false,
                                Some(format!("{} vs {}", lhs, rhs)),
                            );
                        }
                    }
                }
            }
        }
    }
    report.record("borcherds commutator".into(), true, None);

    // Skew-symmetry: u_n v = sum_i (-1)^{n+1+i} D^i/i! (v_{n+i} u).
    for (ui, u) in samples.left.iter().enumerate() {
        for (vi, v) in samples.left.iter().enumerate() {
            for &n in &samples.modes {
                let lhs = env.vertex_coefficient(u, n, v)?;
                let mut rhs = PbwVector::zero();
                let bound = env.annihilation_bound(u.degree() + v.degree()) - n;
                let mut ifact = Scalar::one(ctx);
                for i in 0..=bound.max(0) {
                    if i > 0 {
                        ifact = ifact.mul(&Scalar::from_i64(ctx, i));
                    }
                    let vnu = env.vertex_coefficient(v, n + i, u)?;
                    // D^i applied to v_{n+i} u
                    let mut term = vnu;
                    for _ in 0..i {
                        term = env.derivation(&term)?;
                    }
                    let mut coeff = ifact.inv().unwrap();
                    if (n + 1 + i).rem_euclid(2) == 1 {
                        coeff = coeff.neg();
                    }
                    rhs = rhs.add(&term.scale(&coeff));
                }
                if lhs == rhs {
                    report.record_trivial();
                } else {
                    report.record(
                        format!("skew u#{} v#{} n={}", ui, vi, n),
                        false,
                        Some(format!("{} vs {}", lhs, rhs)),
                    );
                }
            }
        }
    }
    report.record("skew symmetry".into(), true, None);

    // D-compatibility: (Dv)_n = -n v_{n-1} on samples.
    for (vi, v) in samples.left.iter().enumerate() {
        let dv = env.derivation(v)?;
        for (wi, w) in samples.right.iter().enumerate() {
            for &n in &samples.modes {
                let lhs = env.vertex_coefficient(&dv, n, w)?;
                let rhs = env
                    .vertex_coefficient(v, n - 1, w)?
                    .scale(&Scalar::from_i64(ctx, -n));
                if lhs == rhs {
                    report.record_trivial();
                } else {
                    report.record(
                        format!("D-compat v#{} w#{} n={}", vi, wi, n),
                        false,
                        Some(format!("{} vs {}", lhs, rhs)),
                    );
                }
            }
        }
    }
    report.record("D-bracket compatibility".into(), true, None);
    Ok(report)
}

/// The group-action axiom of the twisted vertex algebra:
/// R_lam (v_n w) = lam^{(n+1)(eps-1)} (R_lam v)_n (R_lam w).
pub fn check_gamma_epsilon_axiom(
    env: &Enveloper,
    samples: &VertexSamples,
    lambdas: &[GroupElem],
) -> Result<Report, QvlaError> {
    let qvla = env.qvla;
    let ctx = &qvla.ctx;
    let eps = qvla.epsilon;
    let mut report = Report::new(
        "gamma-epsilon-axiom",
        &format!("{} lambdas, {} left, {} right", lambdas.len(), samples.left.len(), samples.right.len()),
    );
    for (li, lam) in lambdas.iter().enumerate() {
        for (vi, v) in samples.left.iter().enumerate() {
            for (wi, w) in samples.right.iter().enumerate() {
                for &n in &samples.modes {
                    let lhs = {
                        let vnw = env.vertex_coefficient(v, n, w)?;
                        env.r_action(lam, &vnw)?
                    };
                    let rhs = {
                        let rv = env.r_action(lam, v)?;
                        let rw = env.r_action(lam, w)?;
                        env.vertex_coefficient(&rv, n, &rw)?
                            .scale(&embed_power(ctx, lam, (n + 1) * (eps - 1)))
                    };
                    if lhs == rhs {
                        report.record_trivial();
                    } else {
                        report.record(
                            format!("R lam#{} v#{} w#{} n={}", li, vi, wi, n),
                            false,
                            Some(format!("{} vs {}", lhs, rhs)),
                        );
                    }
                }
            }
        }
    }
    report.record("gamma-epsilon covariance".into(), true, None);
    Ok(report)
}

/// R is a group action on samples: R_lam R_mu = R_{lam mu}, R fixes |0>.
pub fn check_r_group_action(
    env: &Enveloper,
    samples: &VertexSamples,
    lambdas: &[GroupElem],
) -> Result<Report, QvlaError> {
    let qvla = env.qvla;
    let ctx = &qvla.ctx;
    let mut report = Report::new("r-group-action", &format!("{} lambdas", lambdas.len()));
    let vac = PbwVector::vacuum(qvla);
    for lam in lambdas {
        let rv = env.r_action(lam, &vac)?;
        let pass = rv == vac;
        report.record(
            format!("R({}) fixes vacuum", crate::qvla::render_group(lam)),
            pass,
            if pass { None } else { Some(format!("{}", rv)) },
        );
    }
    for lam in lambdas {
        for mu in lambdas {
            for (vi, v) in samples.right.iter().enumerate() {
                let lhs = env.r_action(lam, &env.r_action(mu, v)?)?;
                let rhs = env.r_action(&lam.mul(mu, ctx), v)?;
                if lhs == rhs {
                    report.record_trivial();
                } else {
                    report.record(
                        format!(
                            "R({})R({}) v#{}",
                            crate::qvla::render_group(lam),
                            crate::qvla::render_group(mu),
                            vi
                        ),
                        false,
                        Some(format!("{} vs {}", lhs, rhs)),
                    );
                }
            }
        }
    }
    report.record("composition law".into(), true, None);
    Ok(report)
}
