//! R-matrices `r_{M,N}: M ∘ N -> N ∘ M` and the invariants `Λ`, `Λ̃`, `δ`.

use num::{One, Zero};

use crate::conv::{coset_table, convolution, hom_from_conv_all, lift, ConvError};
use crate::klr::Klr;
use crate::linalg::{axpy, Mat, SVec, Q};
use crate::module::{GradedHom, GradedModule};
use crate::radical::{is_simple, normalize_self_dual};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum RError {
    #[error("HOM(M∘N, N∘M) has dimension {0}, not 1")]
    HomDim(usize),
    #[error("module {0} is not simple")]
    NotSimple(String),
    #[error("image of the r-matrix is not simple")]
    ImageNotSimple,
    #[error("no self-dual normalization exists")]
    NotSelfDual,
    #[error(transparent)]
    Conv(#[from] ConvError),
}

/// `phi_k` applied to a vector of `m`.
pub fn apply_phi(m: &GradedModule, k: usize, v: &SVec) -> SVec {
    let mut out: SVec = Vec::new();
    let mut eq: SVec = Vec::new();
    let mut ne: SVec = Vec::new();
    for (i, x) in v {
        if m.words[*i][k] == m.words[*i][k + 1] {
            eq.push((*i, x.clone()));
        } else {
            ne.push((*i, x.clone()));
        }
    }
    if !eq.is_empty() {
        let d = axpy(&m.x[k].apply(&eq), &-Q::one(), &m.x[k + 1].apply(&eq));
        out = axpy(&m.tau[k].apply(&d), &Q::one(), &eq);
    }
    if !ne.is_empty() {
        out = axpy(&out, &Q::one(), &m.tau[k].apply(&ne));
    }
    out
}

/// Reduced word (leftmost letter first) of `w[a, b]`: the first `a` strands move past the last `b`.
pub fn w_block_swap(a: usize, b: usize) -> Vec<usize> {
    let p: Vec<usize> = (0..a + b).map(|k| if k < a { k + b } else { k - a }).collect();
    crate::conv::reduced_word_of_perm(&p)
}

/// Degree of `R^univ_{M,N}`: `-(beta, gamma) + 2 (beta, gamma)_n`.
pub fn universal_degree(klr: &Klr, beta: &[i64], gamma: &[i64]) -> i64 {
    let c = &klr.cartan;
    let n: i64 = (0..c.rank).map(|i| beta[i] * gamma[i] * c.d[i]).sum();
    -c.pair_roots(beta, gamma) + 2 * n
}

/// `R^univ_{M,N}: M ∘ N -> N ∘ M`, `u ⊗ v -> phi_{w[ht N, ht M]} (v ⊗ u)`, with `N ∘ M` given.
pub fn universal_r_into(klr: &Klr, m: &GradedModule, n: &GradedModule, nm: &GradedModule) -> GradedHom {
    let word = w_block_swap(n.height(), m.height());
    let (dm, dn) = (m.dim(), n.dim());
    let cols: Vec<SVec> = (0..dm * dn)
        .map(|uv| {
            let (u, v) = (uv / dn, uv % dn);
            // (id, v ⊗ u) in N ∘ M
            let mut r: SVec = vec![(v * dm + u, Q::one())];
            for &k in word.iter().rev() {
                r = apply_phi(nm, k, &r);
            }
            r
        })
        .collect();
    let f0 = Mat::from_cols(nm.dim(), cols);
    let cosets = coset_table(&[m.height(), n.height()]);
    GradedHom { degree: universal_degree(klr, &m.beta, &n.beta), mat: lift(&cosets, dm * dn, nm, &f0) }
}

pub fn universal_r(klr: &Klr, m: &GradedModule, n: &GradedModule) -> Result<(GradedHom, GradedModule), RError> {
    let nm = convolution(klr, n, m)?;
    Ok((universal_r_into(klr, m, n, &nm), nm))
}

#[derive(Clone, Debug)]
pub struct RMatrixResult {
    pub r: GradedHom,
    pub lambda: i64,
    pub hom_dim: usize,
    /// `N ∘ M`
    pub target: GradedModule,
}

/// Scale so that the first nonzero entry in row-major order is 1.
pub fn normalize_leading_entry(m: &Mat) -> Mat {
    match m.leading_entry() {
        None => m.clone(),
        Some((_, _, x)) => m.scale(&(Q::one() / x)),
    }
}

/// The generator of `HOM(M ∘ N, N ∘ M)` when that space is one-dimensional.
pub fn rmatrix(klr: &Klr, m: &GradedModule, n: &GradedModule) -> Result<RMatrixResult, RError> {
    let nm = convolution(klr, n, m)?;
    rmatrix_into(m, n, nm)
}

pub fn rmatrix_into(m: &GradedModule, n: &GradedModule, nm: GradedModule) -> Result<RMatrixResult, RError> {
    let homs = hom_from_conv_all(&[m.clone(), n.clone()], &nm);
    if homs.len() != 1 {
        return Err(RError::HomDim(homs.len()));
    }
    let h = homs.into_iter().next().unwrap();
    let r = GradedHom { degree: h.degree, mat: normalize_leading_entry(&h.mat) };
    Ok(RMatrixResult { lambda: r.degree, r, hom_dim: 1, target: nm })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Invariants {
    pub lambda_mn: i64,
    pub lambda_nm: i64,
    pub lambda_tilde: Q,
    pub delta: Q,
}

/// `Λ(M,N)`, `Λ(N,M)`, `Λ̃(M,N)`, `δ(M,N)`.
pub fn invariants(klr: &Klr, m: &GradedModule, n: &GradedModule) -> Result<Invariants, RError> {
    let a = rmatrix(klr, m, n)?.lambda;
    let b = rmatrix(klr, n, m)?.lambda;
    let pair = klr.cartan.pair_roots(&m.beta, &n.beta);
    Ok(Invariants {
        lambda_mn: a,
        lambda_nm: b,
        lambda_tilde: Q::new((a + pair).into(), 2.into()),
        delta: Q::new((a + b).into(), 2.into()),
    })
}

/// `Λ̃(M,N) = (Λ(M,N) + (wt M, wt N)) / 2`.
pub fn lambda_tilde(klr: &Klr, m: &GradedModule, n: &GradedModule, lambda: i64) -> Q {
    Q::new((lambda + klr.cartan.pair_roots(&m.beta, &n.beta)).into(), 2.into())
}

/// Whether `M ∘ N ≅ N ∘ M` up to shift, decided through the r-matrix.
pub fn commutes(klr: &Klr, m: &GradedModule, n: &GradedModule) -> Result<bool, RError> {
    if m.height() == 0 || n.height() == 0 {
        return Ok(true);
    }
    let r = rmatrix(klr, m, n)?;
    Ok(r.r.mat.rank() == r.target.dim())
}

/// `Λ(M,N)` together with whether `r_{M,N}` is an isomorphism, from a single r-matrix computation.
pub fn lambda_and_commutes(klr: &Klr, m: &GradedModule, n: &GradedModule) -> Result<(i64, bool), RError> {
    let r = rmatrix(klr, m, n)?;
    let iso = r.r.mat.rank() == r.target.dim();
    Ok((r.lambda, iso))
}

/// `M ∇ N`, the image of `r_{M,N}`, self-dual normalized.
pub fn head_product(klr: &Klr, m: &GradedModule, n: &GradedModule) -> Result<GradedModule, RError> {
    if m.height() == 0 {
        return Ok(n.clone());
    }
    if n.height() == 0 {
        return Ok(m.clone());
    }
    let r = rmatrix(klr, m, n)?;
    let img = r.target.image_of(&r.r.mat);
    let (sub, _) = r.target.submodule(&img);
    if !is_simple(&sub) {
        return Err(RError::ImageNotSimple);
    }
    let (mut s, _) = normalize_self_dual(&sub).ok_or(RError::NotSelfDual)?;
    s.name = format!("{}∇{}", m.name, n.name);
    Ok(s)
}

/// Integer test used by the non-negativity checks.
pub fn is_nonneg_int(x: &Q) -> bool {
    x.is_integer() && *x >= Q::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;
    use crate::module::is_hom;

    #[test]
    fn universal_r_is_a_hom() {
        let k = Klr::preset("A2");
        let (a, b) = (GradedModule::letter(2, 0), GradedModule::letter(2, 1));
        let ab = convolution(&k, &a, &b).unwrap();
        let (r, ba) = universal_r(&k, &a, &b).unwrap();
        assert_eq!(r.degree, 1);
        assert!(is_hom(&ab, &ba, &r.mat, r.degree));
        let k1 = Klr::preset("A1");
        let l = GradedModule::letter(1, 0);
        let ll = convolution(&k1, &l, &l).unwrap();
        let (r, t) = universal_r(&k1, &l, &l).unwrap();
        assert_eq!(r.degree, 0);
        assert!(is_hom(&ll, &t, &r.mat, r.degree));
    }

    #[test]
    fn a1_letter_r_matrix_is_identity() {
        let k = Klr::preset("A1");
        let l = GradedModule::letter(1, 0);
        let inv = invariants(&k, &l, &l).unwrap();
        assert_eq!(inv.lambda_mn, 0);
        assert_eq!(inv.delta, q(0));
        assert_eq!(inv.lambda_tilde, q(1));
    }

    #[test]
    fn a2_letters() {
        let k = Klr::preset("A2");
        let (a, b) = (GradedModule::letter(2, 0), GradedModule::letter(2, 1));
        let inv = invariants(&k, &a, &b).unwrap();
        assert_eq!(inv.lambda_mn, 1);
        assert_eq!(inv.lambda_nm, 1);
        assert_eq!(inv.delta, q(1));
        assert!(!commutes(&k, &a, &b).unwrap());
        let h = head_product(&k, &a, &b).unwrap();
        assert_eq!(h.dim(), 1);
    }
}
