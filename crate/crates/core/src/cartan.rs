//! Cartan data, weights and roots, Weyl group elements, the orbit order and Bruhat order.
//!
//! Weights are integer vectors in the basis of fundamental weights; roots are integer
//! vectors in the basis of simple roots. Indices are 0-based internally.

use std::collections::{BTreeSet, HashSet, VecDeque};

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{q, Q};

pub type Weight = Vec<i64>;
pub type Root = Vec<i64>;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum CartanError {
    #[error("invalid Cartan matrix: {0}")]
    InvalidMatrix(String),
    #[error("unknown preset {0}")]
    UnknownPreset(String),
    #[error("order computations need a finite-type Cartan datum")]
    NotFiniteType,
    #[error("weights do not lie in a common Weyl orbit")]
    DifferentOrbits,
    #[error("dimension mismatch: expected rank {expected}, got {got}")]
    Rank { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("bad JSON: {0}")]
    Json(String),
}

#[derive(Serialize, Deserialize)]
struct CartanJson {
    rank: usize,
    cartan_matrix: Vec<Vec<i64>>,
    symmetrizers: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanDatum {
    pub name: String,
    pub rank: usize,
    /// `a[i][j] = <h_i, alpha_j>`
    pub a: Vec<Vec<i64>>,
    /// `d[i] = (alpha_i, alpha_i) / 2`
    pub d: Vec<i64>,
    finite: bool,
}

impl CartanDatum {
    pub fn new(name: &str, a: Vec<Vec<i64>>, d: Vec<i64>) -> Result<Self, CartanError> {
        let n = a.len();
        if d.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(CartanError::InvalidMatrix("matrix and symmetrizers must be n x n and n".into()));
        }
        for i in 0..n {
            if a[i][i] != 2 {
                return Err(CartanError::InvalidMatrix(format!("a[{i}][{i}] != 2")));
            }
            if d[i] <= 0 {
                return Err(CartanError::InvalidMatrix(format!("symmetrizer d[{i}] must be positive")));
            }
            for j in 0..n {
                if i != j {
                    if a[i][j] > 0 {
                        return Err(CartanError::InvalidMatrix(format!("a[{i}][{j}] > 0")));
                    }
                    if (a[i][j] == 0) != (a[j][i] == 0) {
                        return Err(CartanError::InvalidMatrix(format!("a[{i}][{j}] and a[{j}][{i}] differ in vanishing")));
                    }
                    if d[i] * a[i][j] != d[j] * a[j][i] {
                        return Err(CartanError::InvalidMatrix(format!("d does not symmetrize at ({i},{j})")));
                    }
                }
            }
        }
        let mut c = CartanDatum { name: name.to_string(), rank: n, a, d, finite: false };
        c.finite = c.symmetrized_positive_definite();
        Ok(c)
    }

    pub fn preset(name: &str) -> Result<Self, CartanError> {
        let (a, d): (Vec<Vec<i64>>, Vec<i64>) = match name {
            "A1" => (vec![vec![2]], vec![1]),
            "A2" => (vec![vec![2, -1], vec![-1, 2]], vec![1, 1]),
            "A3" => (vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]], vec![1, 1, 1]),
            "B2" => (vec![vec![2, -1], vec![-2, 2]], vec![2, 1]),
            "G2" => (vec![vec![2, -1], vec![-3, 2]], vec![3, 1]),
            _ => return Err(CartanError::UnknownPreset(name.to_string())),
        };
        CartanDatum::new(name, a, d)
    }

    pub fn from_json(s: &str) -> Result<Self, CartanError> {
        let j: CartanJson = serde_json::from_str(s).map_err(|e| CartanError::Json(e.to_string()))?;
        if j.cartan_matrix.len() != j.rank {
            return Err(CartanError::Rank { expected: j.rank, got: j.cartan_matrix.len() });
        }
        CartanDatum::new("custom", j.cartan_matrix, j.symmetrizers)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({"rank": self.rank, "cartan_matrix": self.a, "symmetrizers": self.d})
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    fn symmetrized_positive_definite(&self) -> bool {
        // leading principal minors of (d_i a_ij) by exact Gaussian elimination
        let n = self.rank;
        let mut m: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| q(self.d[i] * self.a[i][j])).collect()).collect();
        for k in 0..n {
            if !m[k][k].is_positive() {
                return false;
            }
            for i in k + 1..n {
                let f = &m[i][k] / &m[k][k];
                for j in k..n {
                    let t = &f * &m[k][j];
                    m[i][j] -= t;
                }
            }
        }
        true
    }

    fn check_len(&self, v: &[i64]) -> Result<(), CartanError> {
        if v.len() != self.rank {
            return Err(CartanError::Rank { expected: self.rank, got: v.len() });
        }
        Ok(())
    }

    pub fn simple_root(&self, i: usize) -> Root {
        let mut r = vec![0; self.rank];
        r[i] = 1;
        r
    }

    pub fn fundamental(&self, i: usize) -> Weight {
        self.simple_root(i)
    }

    pub fn rho(&self) -> Weight {
        vec![1; self.rank]
    }

    /// `(alpha_i, alpha_j)`
    pub fn sym(&self, i: usize, j: usize) -> i64 {
        self.d[i] * self.a[i][j]
    }

    /// Bilinear form on the root lattice.
    pub fn pair_roots(&self, b: &[i64], c: &[i64]) -> i64 {
        let mut s = 0;
        for i in 0..self.rank {
            if b[i] == 0 {
                continue;
            }
            for j in 0..self.rank {
                s += b[i] * c[j] * self.sym(i, j);
            }
        }
        s
    }

    /// `(beta, lambda)` for a root `beta` and a weight `lambda`.
    pub fn pair_root_weight(&self, b: &[i64], l: &[i64]) -> i64 {
        (0..self.rank).map(|j| b[j] * self.d[j] * l[j]).sum()
    }

    /// Bilinear form on weights (needs an invertible Cartan matrix).
    pub fn pair_weights(&self, l: &[i64], m: &[i64]) -> Result<Q, CartanError> {
        let c = self.weight_to_root_rational(m).ok_or(CartanError::NotFiniteType)?;
        let mut s = Q::zero();
        for j in 0..self.rank {
            s += &c[j] * q(self.d[j] * l[j]);
        }
        Ok(s)
    }

    /// Bilinear form, checking that both arguments have the right rank.
    pub fn bilinear(&self, l: &[i64], m: &[i64]) -> Result<Q, CartanError> {
        self.check_len(l)?;
        self.check_len(m)?;
        self.pair_weights(l, m)
    }

    pub fn root_to_weight(&self, b: &[i64]) -> Weight {
        (0..self.rank).map(|i| (0..self.rank).map(|j| self.a[i][j] * b[j]).sum()).collect()
    }

    fn weight_to_root_rational(&self, l: &[i64]) -> Option<Vec<Q>> {
        // solve A b = l
        let n = self.rank;
        let mut m: Vec<Vec<Q>> = (0..n)
            .map(|i| {
                let mut r: Vec<Q> = (0..n).map(|j| q(self.a[i][j])).collect();
                r.push(q(l[i]));
                r
            })
            .collect();
        for k in 0..n {
            let p = (k..n).find(|&r| !m[r][k].is_zero())?;
            m.swap(k, p);
            let piv = m[k][k].clone();
            for j in k..=n {
                m[k][j] = &m[k][j] / &piv;
            }
            for i in 0..n {
                if i != k && !m[i][k].is_zero() {
                    let f = m[i][k].clone();
                    for j in k..=n {
                        let t = &f * &m[k][j];
                        m[i][j] -= t;
                    }
                }
            }
        }
        Some((0..n).map(|i| m[i][n].clone()).collect())
    }

    /// Express a weight in the root lattice when possible.
    pub fn weight_to_root(&self, l: &[i64]) -> Option<Root> {
        let c = self.weight_to_root_rational(l)?;
        c.iter().map(|x| if x.is_integer() { x.numer().try_into().ok() } else { None }).collect()
    }

    pub fn is_dominant(&self, l: &[i64]) -> bool {
        l.iter().all(|&x| x >= 0)
    }

    /// `s_i(lambda) = lambda - <h_i, lambda> alpha_i`
    pub fn reflect_weight(&self, i: usize, l: &[i64]) -> Weight {
        let c = l[i];
        (0..self.rank).map(|k| l[k] - c * self.a[k][i]).collect()
    }

    pub fn reflect_root(&self, i: usize, b: &[i64]) -> Root {
        let c: i64 = (0..self.rank).map(|j| self.a[i][j] * b[j]).sum();
        let mut r = b.to_vec();
        r[i] -= c;
        r
    }

    pub fn weyl_act(&self, w: &WeylElement, l: &[i64]) -> Weight {
        let mut v = l.to_vec();
        for &i in w.word.iter().rev() {
            v = self.reflect_weight(i, &v);
        }
        v
    }

    pub fn weyl_act_root(&self, w: &WeylElement, b: &[i64]) -> Root {
        let mut v = b.to_vec();
        for &i in w.word.iter().rev() {
            v = self.reflect_root(i, &v);
        }
        v
    }

    /// Positive roots, by closing the simple roots under simple reflections (finite type).
    pub fn positive_roots(&self) -> Result<Vec<Root>, CartanError> {
        if !self.finite {
            return Err(CartanError::NotFiniteType);
        }
        let mut seen: BTreeSet<Root> = BTreeSet::new();
        let mut queue: VecDeque<Root> = VecDeque::new();
        for i in 0..self.rank {
            let r = self.simple_root(i);
            seen.insert(r.clone());
            queue.push_back(r);
        }
        while let Some(r) = queue.pop_front() {
            for i in 0..self.rank {
                let s = self.reflect_root(i, &r);
                if s.iter().all(|&x| x >= 0) && !seen.contains(&s) {
                    seen.insert(s.clone());
                    queue.push_back(s);
                }
            }
        }
        let mut v: Vec<Root> = seen.into_iter().collect();
        v.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
        Ok(v)
    }

    /// `s_beta(lambda)` for a real root `beta`.
    pub fn reflect_by_root(&self, b: &[i64], l: &[i64]) -> Weight {
        let bb = self.pair_roots(b, b);
        let c = 2 * self.pair_root_weight(b, l) / bb;
        let bw = self.root_to_weight(b);
        (0..self.rank).map(|k| l[k] - c * bw[k]).collect()
    }

    /// The dominant weight in the Weyl orbit of `l` (finite type).
    pub fn dominant_rep(&self, l: &[i64]) -> Weight {
        let mut v = l.to_vec();
        while let Some(i) = (0..self.rank).find(|&i| v[i] < 0) {
            v = self.reflect_weight(i, &v);
        }
        v
    }

    /// The Weyl orbit of a weight (finite type).
    pub fn orbit(&self, l: &[i64]) -> Result<Vec<Weight>, CartanError> {
        if !self.finite {
            return Err(CartanError::NotFiniteType);
        }
        let mut seen: BTreeSet<Weight> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(l.to_vec());
        queue.push_back(l.to_vec());
        while let Some(v) = queue.pop_front() {
            for i in 0..self.rank {
                let s = self.reflect_weight(i, &v);
                if seen.insert(s.clone()) {
                    queue.push_back(s);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Decide `lambda ⪯ mu` for weights in the orbit of a dominant weight.
    pub fn orbit_preceq(&self, l: &[i64], m: &[i64]) -> Result<bool, CartanError> {
        self.check_len(l)?;
        self.check_len(m)?;
        if !self.finite {
            return Err(CartanError::NotFiniteType);
        }
        if self.dominant_rep(l) != self.dominant_rep(m) {
            return Err(CartanError::DifferentOrbits);
        }
        if l == m {
            return Ok(true);
        }
        let roots = self.positive_roots()?;
        let mut seen: HashSet<Weight> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(m.to_vec());
        queue.push_back(m.to_vec());
        while let Some(v) = queue.pop_front() {
            for b in &roots {
                if self.pair_root_weight(b, &v) > 0 {
                    let s = self.reflect_by_root(b, &v);
                    if s == l {
                        return Ok(true);
                    }
                    if seen.insert(s.clone()) {
                        queue.push_back(s);
                    }
                }
            }
        }
        Ok(false)
    }

    /// Bruhat order `v <= w` via `w Lambda_i ⪯ v Lambda_i` for all `i`.
    pub fn bruhat_le(&self, v: &WeylElement, w: &WeylElement) -> Result<bool, CartanError> {
        if !self.finite {
            return Err(CartanError::NotFiniteType);
        }
        for i in 0..self.rank {
            let f = self.fundamental(i);
            if !self.orbit_preceq(&self.weyl_act(w, &f), &self.weyl_act(v, &f))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Bruhat order by the subword property of a reduced word of `w`.
    pub fn bruhat_le_subword(&self, v: &WeylElement, w: &WeylElement) -> bool {
        let word = &w.word;
        let target = v.normal(self);
        let n = word.len();
        for mask in 0u32..(1u32 << n) {
            if mask.count_ones() as usize != target.len() {
                continue;
            }
            let sub: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).map(|k| word[k]).collect();
            if WeylElement::from_word(self, &sub) == target {
                return true;
            }
        }
        false
    }

    /// All group elements (finite type), identity first, by length then normal form.
    pub fn weyl_group(&self) -> Result<Vec<WeylElement>, CartanError> {
        if !self.finite {
            return Err(CartanError::NotFiniteType);
        }
        let mut out = Vec::new();
        for v in self.orbit(&self.rho())? {
            out.push(WeylElement::from_rho_image(self, &v));
        }
        out.sort_by(|a, b| (a.len(), &a.word).cmp(&(b.len(), &b.word)));
        Ok(out)
    }

    /// Order relations implied by the reflection lemma; each is confirmed by `orbit_preceq`.
    /// Precondition: `lambda ⪯ mu` and `(alpha_i, lambda) <= 0`.
    pub fn reflection_closure(&self, l: &[i64], m: &[i64], i: usize) -> Result<Vec<(Weight, Weight)>, CartanError> {
        if !self.orbit_preceq(l, m)? {
            return Err(CartanError::Precondition("lambda is not below mu".into()));
        }
        let ai = self.simple_root(i);
        if self.pair_root_weight(&ai, l) > 0 {
            return Err(CartanError::Precondition("(alpha, lambda) > 0".into()));
        }
        let sl = self.reflect_weight(i, l);
        let am = self.pair_root_weight(&ai, m);
        let mut out = Vec::new();
        if am >= 0 {
            out.push((sl.clone(), m.to_vec()));
        }
        if am <= 0 {
            out.push((sl.clone(), self.reflect_weight(i, m)));
        }
        for (a, b) in &out {
            if !self.orbit_preceq(a, b)? {
                return Err(CartanError::Precondition(format!("implied relation {a:?} ⪯ {b:?} fails")));
            }
        }
        Ok(out)
    }

    /// Checks: if `w >= v` and `w s_i Lambda_i ⪯ v s_i Lambda_i` then `w s_i >= v s_i`.
    /// Returns `None` when the hypotheses do not hold.
    pub fn check_reflection_corollary(&self, w: &WeylElement, v: &WeylElement, i: usize) -> Result<Option<bool>, CartanError> {
        if !self.bruhat_le(v, w)? {
            return Ok(None);
        }
        let si = WeylElement::simple(i);
        let ws = w.mul(self, &si);
        let vs = v.mul(self, &si);
        let f = self.fundamental(i);
        if !self.orbit_preceq(&self.weyl_act(&ws, &f), &self.weyl_act(&vs, &f))? {
            return Ok(None);
        }
        Ok(Some(self.bruhat_le(&vs, &ws)?))
    }

    /// `gamma ∈ Q_+ ∩ w Q_-`
    pub fn in_pos_cap_w_neg(&self, w: &WeylElement, g: &[i64]) -> bool {
        g.iter().all(|&x| x >= 0) && self.weyl_act_root(&w.inverse(), g).iter().all(|&x| x <= 0)
    }

    /// `gamma ∈ Q_+ ∩ v Q_+`
    pub fn in_pos_cap_v_pos(&self, v: &WeylElement, g: &[i64]) -> bool {
        g.iter().all(|&x| x >= 0) && self.weyl_act_root(&v.inverse(), g).iter().all(|&x| x >= 0)
    }

    /// Parse `L1`, `L1+L2`, `2L1` or a coordinate list `1,0`.
    pub fn parse_weight(&self, s: &str) -> Result<Weight, CartanError> {
        let s = s.trim();
        let mut w = vec![0; self.rank];
        if s.is_empty() || s == "0" {
            return Ok(w);
        }
        if s.contains('L') {
            for part in s.split('+') {
                let part = part.trim();
                let (c, idx) = part.split_once('L').ok_or_else(|| CartanError::Precondition(format!("bad weight {s}")))?;
                let c: i64 = if c.is_empty() { 1 } else { c.parse().map_err(|_| CartanError::Precondition(format!("bad weight {s}")))? };
                let i: usize = idx.parse().map_err(|_| CartanError::Precondition(format!("bad weight {s}")))?;
                if i == 0 || i > self.rank {
                    return Err(CartanError::Precondition(format!("index out of range in {s}")));
                }
                w[i - 1] += c;
            }
            return Ok(w);
        }
        let v: Result<Vec<i64>, _> = s.split(',').map(|x| x.trim().parse::<i64>()).collect();
        let v = v.map_err(|_| CartanError::Precondition(format!("bad weight {s}")))?;
        self.check_len(&v)?;
        Ok(v)
    }
}

/// A Weyl group element, stored as its lexicographically least reduced word (0-based letters).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeylElement {
    pub word: Vec<usize>,
}

impl WeylElement {
    pub fn identity() -> Self {
        WeylElement { word: Vec::new() }
    }

    pub fn simple(i: usize) -> Self {
        WeylElement { word: vec![i] }
    }

    /// Normalize an arbitrary word (finite type).
    pub fn from_word(c: &CartanDatum, word: &[usize]) -> Self {
        let mut v = c.rho();
        for &i in word.iter().rev() {
            v = c.reflect_weight(i, &v);
        }
        WeylElement::from_rho_image(c, &v)
    }

    /// Recover the element `w` from `w rho`, greedily peeling the smallest left descent.
    pub fn from_rho_image(c: &CartanDatum, wr: &[i64]) -> Self {
        let mut v = wr.to_vec();
        let mut word = Vec::new();
        while let Some(i) = (0..c.rank).find(|&i| v[i] < 0) {
            word.push(i);
            v = c.reflect_weight(i, &v);
        }
        WeylElement { word }
    }

    pub fn normal(&self, c: &CartanDatum) -> Self {
        WeylElement::from_word(c, &self.word)
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn mul(&self, c: &CartanDatum, other: &WeylElement) -> Self {
        let mut w = self.word.clone();
        w.extend_from_slice(&other.word);
        WeylElement::from_word(c, &w)
    }

    pub fn inverse(&self) -> Self {
        // normal form is not preserved; callers only act with it
        WeylElement { word: self.word.iter().rev().cloned().collect() }
    }

    /// Whether a word is reduced.
    pub fn is_reduced_word(c: &CartanDatum, word: &[usize]) -> bool {
        WeylElement::from_word(c, word).len() == word.len()
    }

    /// All reduced words of this element.
    pub fn reduced_words(&self, c: &CartanDatum) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut v = c.rho();
        for &i in self.word.iter().rev() {
            v = c.reflect_weight(i, &v);
        }
        fn rec(c: &CartanDatum, v: &[i64], pre: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            let desc: Vec<usize> = (0..c.rank).filter(|&i| v[i] < 0).collect();
            if desc.is_empty() {
                out.push(pre.clone());
                return;
            }
            for i in desc {
                pre.push(i);
                rec(c, &c.reflect_weight(i, v), pre, out);
                pre.pop();
            }
        }
        rec(c, &v, &mut Vec::new(), &mut out);
        out
    }

    /// Parse a space or comma separated list of 1-based letters.
    pub fn parse(c: &CartanDatum, s: &str) -> Result<Self, CartanError> {
        let mut word = Vec::new();
        for t in s.split(|ch: char| ch == ' ' || ch == ',').filter(|t| !t.is_empty()) {
            let i: usize = t.parse().map_err(|_| CartanError::Precondition(format!("bad word {s}")))?;
            if i == 0 || i > c.rank {
                return Err(CartanError::Precondition(format!("letter {i} out of range")));
            }
            word.push(i - 1);
        }
        Ok(WeylElement::from_word(c, &word))
    }

    /// 1-based display, e.g. `s1s2`; the identity is `e`.
    pub fn label(&self) -> String {
        if self.word.is_empty() {
            "e".into()
        } else {
            self.word.iter().map(|i| format!("s{}", i + 1)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in ["A1", "A2", "A3", "B2", "G2"] {
            let c = CartanDatum::preset(p).unwrap();
            assert!(c.is_finite());
        }
        assert!(CartanDatum::new("bad", vec![vec![2, 1], vec![1, 2]], vec![1, 1]).is_err());
        let affine = CartanDatum::new("A1^(1)", vec![vec![2, -2], vec![-2, 2]], vec![1, 1]).unwrap();
        assert!(!affine.is_finite());
        assert_eq!(affine.orbit_preceq(&[1, 0], &[1, 0]), Err(CartanError::NotFiniteType));
    }

    #[test]
    fn group_orders() {
        let sizes = [("A1", 2), ("A2", 6), ("A3", 24), ("B2", 8), ("G2", 12)];
        for (p, n) in sizes {
            let c = CartanDatum::preset(p).unwrap();
            assert_eq!(c.weyl_group().unwrap().len(), n, "{p}");
        }
    }

    #[test]
    fn normal_form_is_lex_least() {
        let c = CartanDatum::preset("A2").unwrap();
        let w = WeylElement::from_word(&c, &[1, 0, 1]);
        assert_eq!(w.word, vec![0, 1, 0]);
        assert_eq!(WeylElement::from_word(&c, &[0, 0]).word, Vec::<usize>::new());
        let words = w.reduced_words(&c);
        assert_eq!(words.len(), 2);
    }

    #[test]
    fn weight_roundtrip() {
        let c = CartanDatum::preset("B2").unwrap();
        let b = vec![1, 2];
        let w = c.root_to_weight(&b);
        assert_eq!(c.weight_to_root(&w).unwrap(), b);
        assert_eq!(c.weight_to_root(&[0, 1]), None);
    }
}
