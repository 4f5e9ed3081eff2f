//! Graded characters in the quantum shuffle algebra.

use std::collections::BTreeMap;

use serde_json::json;

use crate::cartan::CartanDatum;
use crate::module::GradedModule;

/// Laurent polynomial in `q` with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LPoly(pub BTreeMap<i64, i64>);

impl LPoly {
    pub fn zero() -> Self {
        LPoly(BTreeMap::new())
    }

    pub fn monomial(e: i64, c: i64) -> Self {
        let mut p = LPoly::zero();
        p.add_term(e, c);
        p
    }

    pub fn add_term(&mut self, e: i64, c: i64) {
        if c == 0 {
            return;
        }
        let v = self.0.entry(e).or_insert(0);
        *v += c;
        if *v == 0 {
            self.0.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &LPoly) -> LPoly {
        let mut r = self.clone();
        for (e, c) in &o.0 {
            r.add_term(*e, *c);
        }
        r
    }

    pub fn mul(&self, o: &LPoly) -> LPoly {
        let mut r = LPoly::zero();
        for (a, x) in &self.0 {
            for (b, y) in &o.0 {
                r.add_term(a + b, x * y);
            }
        }
        r
    }

    pub fn shift(&self, n: i64) -> LPoly {
        LPoly(self.0.iter().map(|(e, c)| (e + n, *c)).collect())
    }

    pub fn at_one(&self) -> i64 {
        self.0.values().sum()
    }

    /// Bar involution `q -> q^{-1}`.
    pub fn bar(&self) -> LPoly {
        LPoly(self.0.iter().map(|(e, c)| (-e, *c)).collect())
    }

    pub fn to_string_q(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.0
            .iter()
            .map(|(e, c)| match *e {
                0 => format!("{c}"),
                _ => format!("{c}q^{e}"),
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Map from words to graded dimensions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QCharacter {
    pub beta: Vec<i64>,
    pub terms: BTreeMap<Vec<u8>, LPoly>,
}

impl QCharacter {
    pub fn zero(beta: &[i64]) -> Self {
        QCharacter { beta: beta.to_vec(), terms: BTreeMap::new() }
    }

    /// Character of the unit module: empty word with coefficient 1.
    pub fn unit(rank: usize) -> Self {
        let mut c = QCharacter::zero(&vec![0; rank]);
        c.terms.insert(vec![], LPoly::monomial(0, 1));
        c
    }

    pub fn add_term(&mut self, w: Vec<u8>, p: &LPoly) {
        let e = self.terms.entry(w.clone()).or_default();
        *e = e.add(p);
        if e.is_zero() {
            self.terms.remove(&w);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &QCharacter) -> QCharacter {
        let mut r = self.clone();
        for (w, p) in &o.terms {
            r.add_term(w.clone(), p);
        }
        r
    }

    pub fn scale(&self, p: &LPoly) -> QCharacter {
        let mut r = QCharacter::zero(&self.beta);
        for (w, x) in &self.terms {
            r.add_term(w.clone(), &x.mul(p));
        }
        r
    }

    pub fn neg(&self) -> QCharacter {
        self.scale(&LPoly::monomial(0, -1))
    }

    /// `q^n` times the character.
    pub fn shift(&self, n: i64) -> QCharacter {
        self.scale(&LPoly::monomial(n, 1))
    }

    pub fn total_dim(&self) -> i64 {
        self.terms.values().map(|p| p.at_one()).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "beta": self.beta,
            "terms": self.terms.iter().map(|(w, p)| json!({
                "word": w.iter().map(|l| *l as usize + 1).collect::<Vec<_>>(),
                "poly": p.0.iter().map(|(e, c)| (e.to_string(), json!(c))).collect::<serde_json::Map<_, _>>(),
            })).collect::<Vec<_>>()
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Option<Self> {
        let beta: Vec<i64> = serde_json::from_value(v.get("beta")?.clone()).ok()?;
        let mut c = QCharacter::zero(&beta);
        for t in v.get("terms")?.as_array()? {
            let word: Vec<usize> = serde_json::from_value(t.get("word")?.clone()).ok()?;
            if word.iter().any(|&l| l == 0) {
                return None;
            }
            let mut p = LPoly::zero();
            for (e, x) in t.get("poly")?.as_object()? {
                p.add_term(e.parse().ok()?, x.as_i64()?);
            }
            c.add_term(word.iter().map(|l| (l - 1) as u8).collect(), &p);
        }
        Some(c)
    }
}

/// Graded dimension of `e(nu) M` for every word `nu`.
pub fn character(m: &GradedModule) -> QCharacter {
    let mut c = QCharacter::zero(&m.beta);
    for (w, d) in m.words.iter().zip(&m.degs) {
        c.add_term(w.clone(), &LPoly::monomial(*d, 1));
    }
    c
}

/// Interleavings of two words, with the exponent `-sum (a, b)` over letters `b` of the
/// second word placed before letters `a` of the first.
fn shuffle_words(c: &CartanDatum, u: &[u8], w: &[u8], out: &mut Vec<(Vec<u8>, i64)>) {
    fn rec(c: &CartanDatum, u: &[u8], w: &[u8], i: usize, j: usize, cur: &mut Vec<u8>, e: i64, out: &mut Vec<(Vec<u8>, i64)>) {
        if i == u.len() && j == w.len() {
            out.push((cur.clone(), e));
            return;
        }
        if i < u.len() {
            cur.push(u[i]);
            rec(c, u, w, i + 1, j, cur, e, out);
            cur.pop();
        }
        if j < w.len() {
            // w[j] passes every remaining letter of u
            let cross: i64 = u[i..].iter().map(|&a| c.sym(a as usize, w[j] as usize)).sum();
            cur.push(w[j]);
            rec(c, u, w, i, j + 1, cur, e - cross, out);
            cur.pop();
        }
    }
    rec(c, u, w, 0, 0, &mut Vec::new(), 0, out);
}

/// Quantum shuffle product, matching `character(M ∘ N)`.
pub fn shuffle_product(c: &CartanDatum, a: &QCharacter, b: &QCharacter) -> QCharacter {
    let beta: Vec<i64> = a.beta.iter().zip(&b.beta).map(|(x, y)| x + y).collect();
    let mut r = QCharacter::zero(&beta);
    let mut buf = Vec::new();
    for (u, p) in &a.terms {
        for (w, s) in &b.terms {
            buf.clear();
            shuffle_words(c, u, w, &mut buf);
            let ps = p.mul(s);
            for (word, e) in buf.drain(..) {
                r.add_term(word, &ps.shift(e));
            }
        }
    }
    r
}

/// A term `coeff * q^shift * ch_1 * ... * ch_r` of a ring expression.
#[derive(Clone, Debug)]
pub struct RingTerm {
    pub coeff: i64,
    pub shift: i64,
    pub factors: Vec<QCharacter>,
}

pub fn evaluate(c: &CartanDatum, terms: &[RingTerm]) -> Option<QCharacter> {
    let mut acc: Option<QCharacter> = None;
    for t in terms {
        let mut prod = QCharacter::unit(c.rank);
        for f in &t.factors {
            prod = shuffle_product(c, &prod, f);
        }
        let prod = prod.scale(&LPoly::monomial(t.shift, t.coeff));
        acc = Some(match acc {
            None => prod,
            Some(x) => x.add(&prod),
        });
    }
    acc
}

/// Exact equality of two ring expressions after shuffle expansion.
pub fn verify_ring_identity(c: &CartanDatum, lhs: &[RingTerm], rhs: &[RingTerm]) -> bool {
    let l = evaluate(c, lhs);
    let r = evaluate(c, rhs);
    match (l, r) {
        (None, None) => true,
        (Some(x), None) | (None, Some(x)) => x.is_zero(),
        (Some(x), Some(y)) => x.terms == y.terms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::convolution;
    use crate::klr::Klr;

    #[test]
    fn unit_is_neutral() {
        let c = CartanDatum::preset("A2").unwrap();
        let l = character(&GradedModule::letter(2, 1));
        assert_eq!(shuffle_product(&c, &QCharacter::unit(2), &l), l);
        assert_eq!(shuffle_product(&c, &l, &QCharacter::unit(2)), l);
    }

    #[test]
    fn a1_square_frozen() {
        let c = CartanDatum::preset("A1").unwrap();
        let l = character(&GradedModule::letter(1, 0));
        let s = shuffle_product(&c, &l, &l);
        let mut want = LPoly::zero();
        want.add_term(0, 1);
        want.add_term(-2, 1);
        assert_eq!(s.terms[&vec![0, 0]], want);
        let k = Klr::preset("A1");
        let m = convolution(&k, &GradedModule::letter(1, 0), &GradedModule::letter(1, 0)).unwrap();
        assert_eq!(character(&m), s);
    }

    #[test]
    fn json_roundtrip() {
        let c = CartanDatum::preset("A2").unwrap();
        let a = character(&GradedModule::letter(2, 0));
        let b = character(&GradedModule::letter(2, 1));
        let s = shuffle_product(&c, &a, &b);
        assert_eq!(QCharacter::from_json(&s.to_json()).unwrap(), s);
    }
}
