//! Determinantial modules `M(wΛ, vΛ)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use crate::cartan::{CartanDatum, CartanError, Root, Weight, WeylElement};
use crate::conv::{convolution_multi, ConvError};
use crate::klr::Klr;
use crate::linalg::{Echelon, Mat, SVec, Q};
use crate::module::{solve_homs, GradedModule, Labelled, DEFAULT_CAP};
use crate::radical::normalize_self_dual;
use crate::rmatrix::{head_product, RError};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum DetError {
    #[error("{0} is not dominant")]
    NotDominant(String),
    #[error("v = {v} is not below w = {w} in the Bruhat order")]
    NotBelow { v: String, w: String },
    #[error("factor extraction failed: {0}")]
    Extraction(String),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    R(#[from] RError),
    #[error(transparent)]
    Conv(#[from] ConvError),
}

#[derive(Clone, Debug)]
pub struct DetModule {
    pub module: GradedModule,
    pub lambda: Weight,
    pub w: WeylElement,
    pub v: WeylElement,
    /// `vΛ - wΛ` in root coordinates
    pub beta: Root,
    /// shift applied to reach the self-dual representative
    pub shift: i64,
}

/// Builds and caches determinantial modules for one Cartan datum and parameter choice.
pub struct DetBuilder {
    pub klr: Klr,
    powers: Mutex<HashMap<(usize, usize), GradedModule>>,
    highest: Mutex<HashMap<(Vec<usize>, Weight), DetModule>>,
    pairs: Mutex<HashMap<(Vec<usize>, Vec<usize>, Weight), DetModule>>,
}

fn weight_label(l: &[i64]) -> String {
    let parts: Vec<String> = l
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .map(|(i, c)| if *c == 1 { format!("L{}", i + 1) } else { format!("{c}L{}", i + 1) })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("+")
    }
}

impl DetBuilder {
    pub fn new(klr: Klr) -> Self {
        DetBuilder { klr, powers: Mutex::new(HashMap::new()), highest: Mutex::new(HashMap::new()), pairs: Mutex::new(HashMap::new()) }
    }

    pub fn cartan(&self) -> &CartanDatum {
        &self.klr.cartan
    }

    /// The self-dual simple `L(i^a)` of `R(a α_i)`, realized as `q^s L(i)^{∘a}`.
    pub fn letter_power(&self, i: usize, a: usize) -> Result<GradedModule, DetError> {
        if let Some(m) = self.powers.lock().unwrap().get(&(i, a)) {
            return Ok(m.clone());
        }
        let rank = self.klr.rank();
        let m = if a == 0 {
            GradedModule::unit(rank)
        } else {
            let fs = vec![GradedModule::letter(rank, i); a];
            let m = convolution_multi(&self.klr, &fs, DEFAULT_CAP)?;
            let (mut m, _) = normalize_self_dual(&m).ok_or_else(|| DetError::Extraction("L(i^a) is not self-dual up to shift".into()))?;
            m.name = if a == 1 { format!("L({})", i + 1) } else { format!("L({}^{})", i + 1, a) };
            m
        };
        self.powers.lock().unwrap().insert((i, a), m.clone());
        Ok(m)
    }

    /// Exponents `a_k = <h_{i_k}, s_{i_{k+1}} ... s_{i_l} Λ>` along a reduced word.
    pub fn exponents(&self, word: &[usize], lambda: &[i64]) -> Vec<usize> {
        let c = self.cartan();
        let mut out = vec![0; word.len()];
        let mut cur = lambda.to_vec();
        for k in (0..word.len()).rev() {
            out[k] = cur[word[k]].max(0) as usize;
            cur = c.reflect_weight(word[k], &cur);
        }
        out
    }

    /// `M(wΛ, Λ)` along the canonical (lexicographically least) reduced word.
    pub fn build_highest(&self, w: &WeylElement, lambda: &[i64]) -> Result<DetModule, DetError> {
        let w = w.normal(self.cartan());
        self.build_highest_word(&w.word, lambda)
    }

    /// `M(wΛ, Λ) = L(i_1^{a_1}) ∇ (L(i_2^{a_2}) ∇ (... ∇ L(i_l^{a_l})))` for a given reduced word.
    pub fn build_highest_word(&self, word: &[usize], lambda: &[i64]) -> Result<DetModule, DetError> {
        let c = self.cartan();
        if !c.is_dominant(lambda) {
            return Err(DetError::NotDominant(weight_label(lambda)));
        }
        let key = (word.to_vec(), lambda.to_vec());
        if let Some(m) = self.highest.lock().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let w = WeylElement::from_word(c, word);
        let a = self.exponents(word, lambda);
        let mut m = GradedModule::unit(c.rank);
        for k in (0..word.len()).rev() {
            if a[k] == 0 {
                continue;
            }
            let l = self.letter_power(word[k], a[k])?;
            m = head_product(&self.klr, &l, &m)?;
        }
        let (mut m, shift) = normalize_self_dual(&m).ok_or_else(|| DetError::Extraction("head is not self-dual up to shift".into()))?;
        let wl = c.weyl_act(&w, lambda);
        let beta = c.weight_to_root(&sub(lambda, &wl)).expect("Λ - wΛ lies in the root lattice");
        m.name = format!("M({}{}, {})", w.label(), weight_label(lambda), weight_label(lambda));
        let d = DetModule { module: m, lambda: lambda.to_vec(), w: w.clone(), v: WeylElement::identity(), beta, shift };
        self.highest.lock().unwrap().insert(key, d.clone());
        Ok(d)
    }

    /// `M(wΛ, vΛ)` extracted from `Res M(wΛ, Λ) ≅ M(wΛ, vΛ) ⊗ M(vΛ, Λ)`.
    pub fn build_pair(&self, w: &WeylElement, v: &WeylElement, lambda: &[i64]) -> Result<DetModule, DetError> {
        let c = self.cartan();
        let w = w.normal(c);
        let v = v.normal(c);
        if !c.bruhat_le(&v, &w)? {
            return Err(DetError::NotBelow { v: v.label(), w: w.label() });
        }
        if v.is_empty() {
            return self.build_highest(&w, lambda);
        }
        let key = (w.word.clone(), v.word.clone(), lambda.to_vec());
        if let Some(m) = self.pairs.lock().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let wl = c.weyl_act(&w, lambda);
        let vl = c.weyl_act(&v, lambda);
        let alpha = c.weight_to_root(&sub(&vl, &wl)).expect("root lattice");
        let d = if alpha.iter().all(|&x| x == 0) {
            DetModule { module: GradedModule::unit(c.rank), lambda: lambda.to_vec(), w: w.clone(), v: v.clone(), beta: alpha, shift: 0 }
        } else {
            let mw = self.build_highest(&w, lambda)?;
            let mv = self.build_highest(&v, lambda)?;
            let (m, shift) = extract_left_factor(&mw.module, &mv.module, &alpha)?;
            let mut m = m;
            m.name = format!("M({}{}, {}{})", w.label(), weight_label(lambda), v.label(), weight_label(lambda));
            DetModule { module: m, lambda: lambda.to_vec(), w: w.clone(), v: v.clone(), beta: alpha, shift }
        };
        self.pairs.lock().unwrap().insert(key, d.clone());
        Ok(d)
    }

    /// `M(λ, μ)` for weights in one orbit given as `λ = wΛ`, `μ = vΛ`.
    pub fn build(&self, w: &WeylElement, v: &WeylElement, lambda: &[i64]) -> Result<DetModule, DetError> {
        self.build_pair(w, v, lambda)
    }

    /// Closed formula `(wΛ' - vΛ', wΛ + vΛ)`.
    pub fn lambda_formula(&self, w: &WeylElement, v: &WeylElement, l1: &[i64], l2: &[i64]) -> Q {
        let c = self.cartan();
        let a = sub(&c.weyl_act(w, l1), &c.weyl_act(v, l1));
        let b = add(&c.weyl_act(w, l2), &c.weyl_act(v, l2));
        c.pair_weights(&a, &b).expect("finite type")
    }
}

pub fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Given `M` over `R(α+β)` with `e(α,β) M ≅ X ⊗ N`, recover `X = HOM_{R(β)}(N, e(α,β) M)`.
/// Returns `X` self-dual normalized and the shift that was applied.
pub fn extract_left_factor(m: &GradedModule, n: &GradedModule, alpha: &[i64]) -> Result<(GradedModule, i64), DetError> {
    let res = m.restriction(alpha).map_err(|e| DetError::Extraction(e.to_string()))?;
    let right = &res.right;
    let left = &res.left;
    if right.beta != n.beta {
        return Err(DetError::Extraction("weight mismatch on the right factor".into()));
    }
    let (Some((a0, a1)), Some((b0, b1))) = (n.degree_range(), right.degree_range()) else {
        return Err(DetError::Extraction("empty restriction".into()));
    };
    let nd = n.dim();
    let flat = |f: &Mat| -> SVec {
        let mut v: SVec = Vec::new();
        for (c, col) in f.col.iter().enumerate() {
            for (r, x) in col {
                v.push((r * nd + c, x.clone()));
            }
        }
        v.sort_by_key(|e| e.0);
        v
    };
    let unflat = |v: &SVec| -> Mat {
        let t: Vec<(usize, usize, Q)> = v.iter().map(|(k, x)| (k / nd, k % nd, x.clone())).collect();
        Mat::from_triplets(right.dim(), nd, &t)
    };
    let mut e = Echelon::new();
    let mut meta: BTreeMap<usize, (Vec<u8>, i64)> = BTreeMap::new();
    for d in (b0 - a1)..=(b1 - a0) {
        for f in solve_homs(&Labelled::of(n), &Labelled::of(right), d) {
            // split by the left word of the target rows
            let mut parts: BTreeMap<Vec<u8>, Vec<(usize, usize, Q)>> = BTreeMap::new();
            for (r, c, x) in f.triplets() {
                parts.entry(left.words[r].clone()).or_default().push((r, c, x));
            }
            for (word, t) in parts {
                let piece = Mat::from_triplets(right.dim(), nd, &t);
                if e.insert(flat(&piece)) {
                    let pivot = e.rows().last().unwrap()[0].0;
                    meta.insert(pivot, (word, d));
                }
            }
        }
    }
    let rows: Vec<SVec> = e.rows().to_vec();
    let words: Vec<Vec<u8>> = rows.iter().map(|r| meta[&r[0].0].0.clone()).collect();
    let degs: Vec<i64> = rows.iter().map(|r| meta[&r[0].0].1).collect();
    let act = |g: &Mat| -> Mat {
        let cols = rows
            .iter()
            .map(|r| e.coords(&flat(&g.mul(&unflat(r)))).expect("left action preserves the hom space"))
            .collect();
        Mat::from_cols(rows.len(), cols)
    };
    let x = GradedModule {
        name: "X".into(),
        beta: alpha.to_vec(),
        words,
        degs,
        x: left.x.iter().map(act).collect(),
        tau: left.tau.iter().map(act).collect(),
    };
    normalize_self_dual(&x).ok_or_else(|| DetError::Extraction("extracted factor is not self-dual up to shift".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::klr::check_relations;
    use crate::radical::is_simple;

    #[test]
    fn a1_highest_is_letter() {
        let b = DetBuilder::new(Klr::preset("A1"));
        let m = b.build_highest(&WeylElement::simple(0), &[1]).unwrap();
        assert_eq!(m.module.dim(), 1);
        assert_eq!(m.module.words, vec![vec![0]]);
    }

    #[test]
    fn a2_s2s1_lambda1() {
        let b = DetBuilder::new(Klr::preset("A2"));
        let c = b.cartan().clone();
        let w = WeylElement::parse(&c, "2 1").unwrap();
        assert_eq!(b.exponents(&w.word, &[1, 0]), vec![1, 1]);
        let m = b.build_highest(&w, &[1, 0]).unwrap();
        assert_eq!(m.module.dim(), 1);
        assert_eq!(m.module.words, vec![vec![1, 0]]);
        assert!(check_relations(&b.klr, &m.module).unwrap().all_pass());
    }

    #[test]
    fn a2_pair_extraction() {
        let b = DetBuilder::new(Klr::preset("A2"));
        let c = b.cartan().clone();
        let w = WeylElement::parse(&c, "1 2").unwrap();
        let v = WeylElement::parse(&c, "1").unwrap();
        let m = b.build_pair(&w, &v, &[1, 0]).unwrap();
        assert!(is_simple(&m.module));
        assert!(check_relations(&b.klr, &m.module).unwrap().all_pass());
        assert_eq!(m.shift, 0);
    }

    #[test]
    fn reduced_word_independence_a2() {
        let b = DetBuilder::new(Klr::preset("A2"));
        let c = b.cartan().clone();
        for w in c.weyl_group().unwrap() {
            for l in [vec![1, 0], vec![0, 1], vec![1, 1]] {
                let m0 = b.build_highest(&w, &l).unwrap();
                for word in w.reduced_words(&c) {
                    let m = b.build_highest_word(&word, &l).unwrap();
                    assert!(crate::module::find_iso_degree(&m0.module, &m.module, 0).is_some());
                }
            }
        }
    }

    #[test]
    fn lambda_formula_on_a2_pairs() {
        let b = DetBuilder::new(Klr::preset("A2"));
        let c = b.cartan().clone();
        let ws = c.weyl_group().unwrap();
        let fund = [vec![1, 0], vec![0, 1]];
        for w in &ws {
            for v in &ws {
                if !c.bruhat_le(v, w).unwrap() {
                    continue;
                }
                for l1 in &fund {
                    for l2 in &fund {
                        let m1 = b.build_pair(w, v, l1).unwrap();
                        let m2 = b.build_pair(w, v, l2).unwrap();
                        if m1.module.height() == 0 || m2.module.height() == 0 {
                            continue;
                        }
                        let r = crate::rmatrix::rmatrix(&b.klr, &m1.module, &m2.module).unwrap();
                        assert_eq!(Q::from_integer(r.lambda.into()), b.lambda_formula(w, v, l1, l2), "{} {} {:?} {:?}", w.label(), v.label(), l1, l2);
                    }
                }
            }
        }
    }
}
