//! Quiver Hecke algebra presentation: parameters, grading, defining relations checked as
//! exact matrix identities, intertwiners and central elements.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cartan::CartanDatum;
use crate::linalg::{parse_q, q, q_to_string, Acc, Mat, SVec, Q};
use crate::module::GradedModule;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum KlrError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("word {0:?} is not reduced")]
    NotReduced(Vec<usize>),
}

/// Monomial `t * u^p * v^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub p: u32,
    pub q: u32,
    pub t: Q,
}

/// The polynomials `Q_{i,j}(u,v)`; `Q_{i,i} = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct QParams {
    /// keyed by ordered pair `(i, j)`, `i != j`
    pub table: BTreeMap<(usize, usize), Vec<Term>>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    p: u32,
    q: u32,
    t: String,
}

#[derive(Serialize, Deserialize)]
struct PairJson {
    i: usize,
    j: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct QParamsJson {
    pairs: Vec<PairJson>,
}

impl QParams {
    /// `Q_{i,j}(u,v) = u^{-a_ij} + v^{-a_ji}` for connected `i != j`, and `1` otherwise.
    pub fn default_for(c: &CartanDatum) -> Self {
        let mut table = BTreeMap::new();
        for i in 0..c.rank {
            for j in 0..c.rank {
                if i == j {
                    continue;
                }
                let (p, qq) = ((-c.a[i][j]) as u32, (-c.a[j][i]) as u32);
                let terms = if p == 0 {
                    vec![Term { p: 0, q: 0, t: Q::one() }]
                } else {
                    vec![Term { p, q: 0, t: Q::one() }, Term { p: 0, q: qq, t: Q::one() }]
                };
                table.insert((i, j), terms);
            }
        }
        QParams { table }
    }

    /// Override pairs from JSON (1-based indices); the transposed pair is derived.
    pub fn from_json(c: &CartanDatum, s: &str) -> Result<Self, KlrError> {
        let j: QParamsJson = serde_json::from_str(s).map_err(|e| KlrError::Params(e.to_string()))?;
        let mut out = QParams::default_for(c);
        for pair in j.pairs {
            if pair.i == 0 || pair.j == 0 || pair.i > c.rank || pair.j > c.rank || pair.i == pair.j {
                return Err(KlrError::Params(format!("bad pair ({}, {})", pair.i, pair.j)));
            }
            let (i, jj) = (pair.i - 1, pair.j - 1);
            let mut terms = Vec::new();
            for t in pair.terms {
                let v = parse_q(&t.t).ok_or_else(|| KlrError::Params(format!("bad coefficient {}", t.t)))?;
                terms.push(Term { p: t.p, q: t.q, t: v });
            }
            let swapped = terms.iter().map(|t| Term { p: t.q, q: t.p, t: t.t.clone() }).collect();
            out.table.insert((i, jj), terms);
            out.table.insert((jj, i), swapped);
        }
        out.validate(c)?;
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pairs: Vec<serde_json::Value> = self
            .table
            .iter()
            .filter(|((i, j), _)| i < j)
            .map(|((i, j), terms)| {
                serde_json::json!({
                    "i": i + 1, "j": j + 1,
                    "terms": terms.iter().map(|t| serde_json::json!({"p": t.p, "q": t.q, "t": q_to_string(&t.t)})).collect::<Vec<_>>()
                })
            })
            .collect();
        serde_json::json!({ "pairs": pairs })
    }

    pub fn validate(&self, c: &CartanDatum) -> Result<(), KlrError> {
        for i in 0..c.rank {
            for j in 0..c.rank {
                if i == j {
                    continue;
                }
                let terms = self.table.get(&(i, j)).ok_or_else(|| KlrError::Params(format!("missing Q_{{{},{}}}", i + 1, j + 1)))?;
                for t in terms {
                    let lhs = t.p as i64 * 2 * c.d[i] + t.q as i64 * 2 * c.d[j];
                    if lhs != -2 * c.sym(i, j) {
                        return Err(KlrError::Params(format!("exponent ({}, {}) violates the degree constraint for ({}, {})", t.p, t.q, i + 1, j + 1)));
                    }
                }
                let lead = (-c.a[i][j]) as u32;
                let has = terms.iter().any(|t| t.p == lead && t.q == 0 && !t.t.is_zero());
                if !has {
                    return Err(KlrError::Params(format!("leading coefficient t_{{{},{};{},0}} vanishes", i + 1, j + 1, lead)));
                }
                let other = &self.table[&(j, i)];
                let mut a: Vec<(u32, u32, Q)> = terms.iter().map(|t| (t.p, t.q, t.t.clone())).collect();
                let mut b: Vec<(u32, u32, Q)> = other.iter().map(|t| (t.q, t.p, t.t.clone())).collect();
                a.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
                b.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
                if a != b {
                    return Err(KlrError::Params(format!("Q_{{{0},{1}}}(u,v) != Q_{{{1},{0}}}(v,u)", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn terms(&self, i: usize, j: usize) -> &[Term] {
        if i == j {
            &[]
        } else {
            &self.table[&(i, j)]
        }
    }

    /// Monomials `(a, b, c, t)` of `(Q_ij(u,v) - Q_ij(w,v)) / (u - w)` as `t u^a v^b w^c`.
    pub fn bbar(&self, i: usize, j: usize) -> Vec<(u32, u32, u32, Q)> {
        let mut acc: BTreeMap<(u32, u32, u32), Q> = BTreeMap::new();
        for t in self.terms(i, j) {
            if t.p == 0 {
                continue;
            }
            for a in 0..t.p {
                let c = t.p - 1 - a;
                *acc.entry((a, t.q, c)).or_insert_with(Q::zero) += &t.t;
            }
        }
        acc.into_iter().filter(|(_, t)| !t.is_zero()).map(|((a, b, c), t)| (a, b, c, t)).collect()
    }
}

/// A Cartan datum together with the parameters `Q_{i,j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Klr {
    pub cartan: CartanDatum,
    pub params: QParams,
}

impl Klr {
    pub fn new(cartan: CartanDatum) -> Self {
        let params = QParams::default_for(&cartan);
        Klr { cartan, params }
    }

    pub fn with_params(cartan: CartanDatum, params: QParams) -> Result<Self, KlrError> {
        params.validate(&cartan)?;
        Ok(Klr { cartan, params })
    }

    pub fn preset(name: &str) -> Self {
        Klr::new(CartanDatum::preset(name).expect("known preset"))
    }

    pub fn rank(&self) -> usize {
        self.cartan.rank
    }

    pub fn deg_x(&self, i: u8) -> i64 {
        2 * self.cartan.d[i as usize]
    }

    pub fn deg_tau(&self, a: u8, b: u8) -> i64 {
        -self.cartan.sym(a as usize, b as usize)
    }
}

/// Apply `x_k^a` to a vector.
pub fn apply_x_pow(m: &GradedModule, k: usize, a: u32, v: &SVec) -> SVec {
    let mut r = v.clone();
    for _ in 0..a {
        if r.is_empty() {
            break;
        }
        r = m.x[k].apply(&r);
    }
    r
}

/// The operator `sum_nu Q_{nu_k, nu_{k+1}}(x_k, x_{k+1}) e(nu)`.
pub fn q_operator(klr: &Klr, m: &GradedModule, k: usize) -> Mat {
    let cols = (0..m.dim())
        .map(|j| {
            let w = &m.words[j];
            let mut acc = Acc::new();
            let e = vec![(j, Q::one())];
            for t in klr.params.terms(w[k] as usize, w[k + 1] as usize) {
                let v = apply_x_pow(m, k + 1, t.q, &apply_x_pow(m, k, t.p, &e));
                acc.add_vec(&v, &t.t);
            }
            acc.into_svec()
        })
        .collect();
    Mat::from_cols(m.dim(), cols)
}

/// The operator `sum_{nu_k = nu_{k+2}} Bbar_{nu_k, nu_{k+1}}(x_k, x_{k+1}, x_{k+2}) e(nu)`.
pub fn bbar_operator(klr: &Klr, m: &GradedModule, k: usize) -> Mat {
    let cols = (0..m.dim())
        .map(|j| {
            let w = &m.words[j];
            let mut acc = Acc::new();
            if w[k] == w[k + 2] {
                let e = vec![(j, Q::one())];
                for (a, b, c, t) in klr.params.bbar(w[k] as usize, w[k + 1] as usize) {
                    let v = apply_x_pow(m, k + 2, c, &apply_x_pow(m, k + 1, b, &apply_x_pow(m, k, a, &e)));
                    acc.add_vec(&v, &t);
                }
            }
            acc.into_svec()
        })
        .collect();
    Mat::from_cols(m.dim(), cols)
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub family: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn record(out: &mut Vec<RelationCheck>, family: &str, failures: Vec<String>) {
    out.push(RelationCheck {
        family: family.to_string(),
        pass: failures.is_empty(),
        detail: if failures.is_empty() { "ok".into() } else { failures.join("; ") },
    });
}

/// Verify every defining relation and the grading as exact matrix identities.
pub fn check_relations(klr: &Klr, m: &GradedModule) -> Result<RelationReport, KlrError> {
    let n = m.height();
    let d = m.dim();
    if m.x.len() != n || m.tau.len() != n.saturating_sub(1) {
        return Err(KlrError::Dimension(format!("expected {} x and {} tau matrices", n, n.saturating_sub(1))));
    }
    if m.degs.len() != d || m.words.len() != d {
        return Err(KlrError::Dimension("basis labels do not match dimension".into()));
    }
    for g in m.x.iter().chain(m.tau.iter()) {
        if g.rows != d || g.cols != d {
            return Err(KlrError::Dimension(format!("generator matrix is {}x{}, basis has {}", g.rows, g.cols, d)));
        }
    }
    let mut out = Vec::new();

    // idempotents: words lie in I^beta; generators respect the word decomposition
    let mut f = Vec::new();
    for (j, w) in m.words.iter().enumerate() {
        if w.len() != n {
            f.push(format!("basis {j} has word of length {}", w.len()));
            continue;
        }
        let mut content = vec![0i64; klr.rank()];
        for &a in w {
            content[a as usize] += 1;
        }
        if content != m.beta {
            f.push(format!("basis {j} word {w:?} not in I^beta"));
        }
    }
    record(&mut out, "idempotents", f);

    let mut f = Vec::new();
    for k in 0..n {
        for (j, c) in m.x[k].col.iter().enumerate() {
            if c.iter().any(|(i, _)| m.words[*i] != m.words[j]) {
                f.push(format!("x_{} does not commute with e(nu) at column {j}", k + 1));
            }
        }
        for l in 0..n {
            if l > k && m.x[k].mul(&m.x[l]) != m.x[l].mul(&m.x[k]) {
                f.push(format!("x_{} x_{} != x_{} x_{}", k + 1, l + 1, l + 1, k + 1));
            }
        }
    }
    record(&mut out, "polynomial commutation", f);

    let mut f = Vec::new();
    for k in 0..n.saturating_sub(1) {
        for (j, c) in m.tau[k].col.iter().enumerate() {
            let mut sw = m.words[j].clone();
            sw.swap(k, k + 1);
            if c.iter().any(|(i, _)| m.words[*i] != sw) {
                f.push(format!("tau_{} e(nu) != e(s nu) tau at column {j}", k + 1));
            }
        }
    }
    record(&mut out, "tau idempotent", f);

    let mut f = Vec::new();
    for k in 0..n.saturating_sub(1) {
        for l in k + 2..n.saturating_sub(1) {
            if m.tau[k].mul(&m.tau[l]) != m.tau[l].mul(&m.tau[k]) {
                f.push(format!("tau_{} tau_{} do not commute", k + 1, l + 1));
            }
        }
    }
    record(&mut out, "far commutation", f);

    let mut f = Vec::new();
    for k in 0..n.saturating_sub(1) {
        if m.tau[k].mul(&m.tau[k]) != q_operator(klr, m, k) {
            f.push(format!("tau_{}^2 != Q(x_{}, x_{})", k + 1, k + 1, k + 2));
        }
    }
    record(&mut out, "tau quadratic", f);

    let mut f = Vec::new();
    for k in 0..n.saturating_sub(1) {
        let eq: Vec<SVec> = (0..d)
            .map(|j| if m.words[j][k] == m.words[j][k + 1] { vec![(j, Q::one())] } else { Vec::new() })
            .collect();
        let eq = Mat::from_cols(d, eq);
        for l in 0..n {
            let sl = if l == k { k + 1 } else if l == k + 1 { k } else { l };
            let lhs = m.tau[k].mul(&m.x[l]).sub(&m.x[sl].mul(&m.tau[k]));
            let c: i64 = if l == k + 1 { 1 } else if l == k { -1 } else { 0 };
            let rhs = eq.scale(&q(c));
            if lhs != rhs {
                f.push(format!("tau_{} x_{} - x_{} tau_{} wrong", k + 1, l + 1, sl + 1, k + 1));
            }
        }
    }
    record(&mut out, "tau-x commutation", f);

    let mut f = Vec::new();
    for k in 0..n.saturating_sub(2) {
        let a = m.tau[k + 1].mul(&m.tau[k]).mul(&m.tau[k + 1]);
        let b = m.tau[k].mul(&m.tau[k + 1]).mul(&m.tau[k]);
        if a.sub(&b) != bbar_operator(klr, m, k) {
            f.push(format!("braid relation at k={}", k + 1));
        }
    }
    record(&mut out, "braid", f);

    let mut f = Vec::new();
    for k in 0..n {
        for (j, c) in m.x[k].col.iter().enumerate() {
            let dg = klr.deg_x(m.words[j][k]);
            if c.iter().any(|(i, _)| m.degs[*i] != m.degs[j] + dg) {
                f.push(format!("x_{} not homogeneous at column {j}", k + 1));
            }
        }
    }
    for k in 0..n.saturating_sub(1) {
        for (j, c) in m.tau[k].col.iter().enumerate() {
            let dg = klr.deg_tau(m.words[j][k], m.words[j][k + 1]);
            if c.iter().any(|(i, _)| m.degs[*i] != m.degs[j] + dg) {
                f.push(format!("tau_{} not homogeneous at column {j}", k + 1));
            }
        }
    }
    record(&mut out, "grading", f);

    Ok(RelationReport { checks: out })
}

/// Matrix of `phi_k` (0-based `k`).
pub fn phi_k(m: &GradedModule, k: usize) -> Mat {
    let cols = (0..m.dim())
        .map(|j| {
            let e = vec![(j, Q::one())];
            if m.words[j][k] == m.words[j][k + 1] {
                let xd = crate::linalg::axpy(&m.x[k].apply(&e), &-Q::one(), &m.x[k + 1].apply(&e));
                crate::linalg::axpy(&m.tau[k].apply(&xd), &Q::one(), &e)
            } else {
                m.tau[k].apply(&e)
            }
        })
        .collect();
    Mat::from_cols(m.dim(), cols)
}

/// Number of inversions of the permutation with the given reduced word (0-based letters).
fn word_is_reduced(n: usize, word: &[usize]) -> bool {
    let mut p: Vec<usize> = (0..n).collect();
    let mut len = 0i64;
    for &k in word.iter().rev() {
        // left multiplication by s_k swaps the values k, k+1
        let a = p.iter().position(|&v| v == k).unwrap();
        let b = p.iter().position(|&v| v == k + 1).unwrap();
        if a < b {
            len += 1;
        } else {
            len -= 1;
        }
        p.swap(a, b);
    }
    len == word.len() as i64
}

/// `phi_w = phi_{k_1} ... phi_{k_r}` for a reduced word `k_1 ... k_r` (0-based letters).
pub fn intertwiner_matrix(m: &GradedModule, word: &[usize]) -> Result<Mat, KlrError> {
    let n = m.height();
    if word.iter().any(|&k| k + 1 >= n) || !word_is_reduced(n, word) {
        return Err(KlrError::NotReduced(word.to_vec()));
    }
    let mut r = Mat::identity(m.dim());
    for &k in word.iter().rev() {
        r = phi_k(m, k).mul(&r);
    }
    Ok(r)
}

/// `p_{i,beta} = sum_nu (prod_{nu_a = i} x_a) e(nu)`
pub fn central_element_p(m: &GradedModule, i: usize) -> Mat {
    let cols = (0..m.dim())
        .map(|j| {
            let mut v = vec![(j, Q::one())];
            for (a, &l) in m.words[j].iter().enumerate() {
                if l as usize == i {
                    v = m.x[a].apply(&v);
                }
            }
            v
        })
        .collect();
    Mat::from_cols(m.dim(), cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_validate() {
        for p in ["A1", "A2", "A3", "B2", "G2"] {
            let c = CartanDatum::preset(p).unwrap();
            QParams::default_for(&c).validate(&c).unwrap();
        }
    }

    #[test]
    fn bad_params_rejected() {
        let c = CartanDatum::preset("A2").unwrap();
        let bad = r#"{"pairs":[{"i":1,"j":2,"terms":[{"p":0,"q":1,"t":"1"}]}]}"#;
        assert!(QParams::from_json(&c, bad).is_err());
        let bad_deg = r#"{"pairs":[{"i":1,"j":2,"terms":[{"p":2,"q":0,"t":"1"}]}]}"#;
        assert!(QParams::from_json(&c, bad_deg).is_err());
        let ok = r#"{"pairs":[{"i":1,"j":2,"terms":[{"p":1,"q":0,"t":"1"},{"p":0,"q":1,"t":"-1"}]}]}"#;
        let p = QParams::from_json(&c, ok).unwrap();
        assert_eq!(p.terms(1, 0).iter().find(|t| t.p == 1).unwrap().t, q(-1));
    }

    #[test]
    fn bbar_of_default_b2() {
        let c = CartanDatum::preset("B2").unwrap();
        let p = QParams::default_for(&c);
        // Q_21(u,v) = u^2 + v, so Bbar = u + w
        let b = p.bbar(1, 0);
        assert_eq!(b.len(), 2);
    }
}
