//! Simplicity, heads, socles and self-duality.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::conv::convolution;
use crate::klr::Klr;
use crate::linalg::{nullspace, Echelon, Mat, SVec, Q};
use crate::module::{closure, find_iso_degree, GradedModule, ModuleError};

/// Graded simplicity test.
///
/// Picks a one-dimensional piece `e(nu) M_d` with vector `v`. A graded submodule either contains
/// `v` or is killed by the dual functional `v*`, so `M` is simple iff `v` generates `M` and
/// `v*` generates `M^*`. Every simple module has such a piece (its extremal word), so when none
/// exists the module is reported as not simple.
pub fn is_simple(m: &GradedModule) -> bool {
    if m.dim() == 0 {
        return false;
    }
    let blocks = m.blocks();
    let Some(v) = blocks.values().find(|b| b.len() == 1).map(|b| b[0]) else {
        return false;
    };
    let e = vec![(v, Q::one())];
    if m.spin(&[e.clone()]).rank() != m.dim() {
        return false;
    }
    m.dual().spin(&[e]).rank() == m.dim()
}

/// `M ∘ M` is simple.
pub fn is_real(klr: &Klr, m: &GradedModule) -> Result<bool, crate::conv::ConvError> {
    if !is_simple(m) {
        return Ok(false);
    }
    if m.height() == 0 {
        return Ok(true);
    }
    Ok(is_simple(&convolution(klr, m, m)?))
}

/// The shift `s` with `q^s M` self-dual, if `M` is self-dual up to shift.
pub fn self_dual_shift(m: &GradedModule) -> Option<i64> {
    if m.dim() == 0 {
        return Some(0);
    }
    let total: i64 = m.degs.iter().sum();
    if total % m.dim() as i64 != 0 {
        return None;
    }
    let s = -total / m.dim() as i64;
    let n = m.shift(s);
    find_iso_degree(&n, &n.dual(), 0).map(|_| s)
}

/// `q^s M` with `s` the self-duality shift; the shift is returned alongside.
pub fn normalize_self_dual(m: &GradedModule) -> Option<(GradedModule, i64)> {
    let s = self_dual_shift(m)?;
    let mut n = m.shift(s);
    n.name = m.name.clone();
    Some((n, s))
}

pub const RADICAL_CAP: usize = 64;

/// Basis of the Jacobson radical of the image of the acting algebra, as matrices.
fn jacobson_radical(m: &GradedModule) -> Vec<Mat> {
    let d = m.dim();
    let flat = |a: &Mat| -> SVec {
        let mut v: SVec = Vec::new();
        for (c, col) in a.col.iter().enumerate() {
            for (r, x) in col {
                v.push((r * d + c, x.clone()));
            }
        }
        v.sort_by_key(|e| e.0);
        v
    };
    let unflat = |v: &SVec| -> Mat {
        let t: Vec<(usize, usize, Q)> = v.iter().map(|(k, x)| (k / d, k % d, x.clone())).collect();
        Mat::from_triplets(d, d, &t)
    };
    let mut words: BTreeMap<&[u8], Vec<usize>> = BTreeMap::new();
    for (i, w) in m.words.iter().enumerate() {
        words.entry(w.as_slice()).or_default().push(i);
    }
    let idem: Vec<SVec> = words
        .values()
        .map(|ix| {
            let t: Vec<(usize, usize, Q)> = ix.iter().map(|&i| (i, i, Q::one())).collect();
            flat(&Mat::from_triplets(d, d, &t))
        })
        .collect();
    let gens: Vec<&Mat> = m.gens().into_iter().map(|g| m.gen_mat(g)).collect();
    let alg = closure(idem, |v| {
        let a = unflat(v);
        gens.iter().map(|g| flat(&g.mul(&a))).collect()
    });
    let basis: Vec<Mat> = alg.rows().iter().map(unflat).collect();
    // type of a homogeneous element: (source word, target word, degree)
    let ty = |a: &Mat| -> (Vec<u8>, Vec<u8>, i64) {
        let (c, col) = a.col.iter().enumerate().find(|(_, c)| !c.is_empty()).unwrap();
        let r = col[0].0;
        (m.words[c].clone(), m.words[r].clone(), m.degs[r] - m.degs[c])
    };
    let mut by_type: BTreeMap<(Vec<u8>, Vec<u8>, i64), Vec<usize>> = BTreeMap::new();
    for (i, a) in basis.iter().enumerate() {
        by_type.entry(ty(a)).or_default().push(i);
    }
    let trace = |a: &Mat, b: &Mat| -> Q {
        // tr(ab) = sum a[r][c] b[c][r]
        let mut t = Q::zero();
        for (c, col) in a.col.iter().enumerate() {
            for (r, x) in col {
                let y = b.get(c, *r);
                if !y.is_zero() {
                    t += x * y;
                }
            }
        }
        t
    };
    let mut rad = Vec::new();
    for ((s, t, k), ix) in &by_type {
        let partner = by_type.get(&(t.clone(), s.clone(), -k));
        let rows: Vec<SVec> = match partner {
            None => Vec::new(),
            Some(px) => px
                .iter()
                .map(|&j| {
                    ix.iter()
                        .enumerate()
                        .filter_map(|(a, &i)| {
                            let v = trace(&basis[i], &basis[j]);
                            (!v.is_zero()).then_some((a, v))
                        })
                        .collect()
                })
                .collect(),
        };
        for sol in nullspace(&rows, ix.len()) {
            let mut acc = Mat::zeros(d, d);
            for (a, x) in sol {
                acc = acc.axpy(&x, &basis[ix[a]]);
            }
            rad.push(acc);
        }
    }
    rad
}

#[derive(Clone, Debug)]
pub struct HeadSocle {
    pub head: GradedModule,
    pub socle: GradedModule,
    /// projection `M -> head`
    pub head_proj: Mat,
    /// inclusion `socle -> M`
    pub socle_incl: Mat,
    /// Loewy length
    pub depth: usize,
}

/// Head `M / J M`, socle `{m : J m = 0}`, and the radical filtration length.
pub fn head_socle(m: &GradedModule) -> Result<HeadSocle, ModuleError> {
    if m.dim() > RADICAL_CAP {
        return Err(ModuleError::Cap { cap: RADICAL_CAP, dim: m.dim() });
    }
    let j = jacobson_radical(m);
    let apply_j = |e: &Echelon| -> Echelon {
        let mut out = Echelon::new();
        for a in &j {
            for r in e.rows() {
                let v = a.apply(r);
                for p in m.homogeneous_parts(&v) {
                    out.insert(p);
                }
            }
        }
        out
    };
    let mut full = Echelon::new();
    for i in 0..m.dim() {
        full.insert(vec![(i, Q::one())]);
    }
    let rad = apply_j(&full);
    let mut depth = 0;
    let mut cur = full.clone();
    while cur.rank() > 0 {
        depth += 1;
        cur = apply_j(&cur);
    }
    let (head, head_proj) = m.quotient(&rad);
    let mut rows: Vec<SVec> = Vec::new();
    for a in &j {
        rows.extend(a.transpose().col.into_iter().filter(|c| !c.is_empty()));
    }
    let mut soc = Echelon::new();
    for v in nullspace(&rows, m.dim()) {
        for p in m.homogeneous_parts(&v) {
            soc.insert(p);
        }
    }
    let (socle, socle_incl) = m.submodule(&soc);
    Ok(HeadSocle { head, socle, head_proj, socle_incl, depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters_are_real() {
        let k = Klr::preset("A2");
        for i in 0..2 {
            assert!(is_real(&k, &GradedModule::letter(2, i)).unwrap());
        }
        assert!(is_real(&k, &GradedModule::unit(2)).unwrap());
    }

    #[test]
    fn sum_is_not_simple() {
        let l = GradedModule::letter(2, 0);
        assert!(!is_simple(&l.direct_sum(&l)));
    }

    #[test]
    fn head_of_nonsimple_product() {
        let k = Klr::preset("A2");
        let m = convolution(&k, &GradedModule::letter(2, 0), &GradedModule::letter(2, 1)).unwrap();
        assert!(!is_simple(&m));
        let hs = head_socle(&m).unwrap();
        assert_eq!(hs.head.dim(), 1);
        assert_eq!(hs.socle.dim(), 1);
        assert_eq!(hs.depth, 2);
        assert!(is_simple(&hs.head));
    }

    #[test]
    fn nilhecke_self_dual_shift() {
        let k = Klr::preset("A1");
        let l = GradedModule::letter(1, 0);
        let m = convolution(&k, &l, &l).unwrap();
        assert!(is_simple(&m));
        assert_eq!(self_dual_shift(&m), Some(1));
        let hs = head_socle(&m).unwrap();
        assert_eq!(hs.head.dim(), 2);
    }
}
