//! Membership in `C_w`, `C_{*,v}`, `C_{w,v}`, unmixedness, and the r-matrix membership criteria.

use std::collections::BTreeSet;

use num::Zero;
use serde::Serialize;

use crate::cartan::{CartanDatum, Root, Weight, WeylElement};
use crate::det::{add, DetBuilder, DetError};
use crate::module::GradedModule;
use crate::rmatrix::{lambda_and_commutes, lambda_tilde, rmatrix};

fn content(rank: usize, letters: &[u8]) -> Root {
    let mut r = vec![0; rank];
    for &l in letters {
        r[l as usize] += 1;
    }
    r
}

/// `W(M)`: weights `γ` with `e(γ, *) M ≠ 0`.
pub fn support_w(m: &GradedModule) -> BTreeSet<Root> {
    let rank = m.rank();
    let mut out = BTreeSet::new();
    for w in &m.words {
        for k in 0..=w.len() {
            out.insert(content(rank, &w[..k]));
        }
    }
    if m.dim() == 0 {
        out.clear();
    }
    out
}

/// `W*(M)`: weights `γ` with `e(*, γ) M ≠ 0`.
pub fn support_wstar(m: &GradedModule) -> BTreeSet<Root> {
    let rank = m.rank();
    let mut out = BTreeSet::new();
    for w in &m.words {
        for k in 0..=w.len() {
            out.insert(content(rank, &w[k..]));
        }
    }
    out
}

pub fn in_cw(c: &CartanDatum, m: &GradedModule, w: &WeylElement) -> bool {
    support_w(m).iter().all(|g| c.in_pos_cap_w_neg(w, g))
}

pub fn in_cstarv(c: &CartanDatum, m: &GradedModule, v: &WeylElement) -> bool {
    support_wstar(m).iter().all(|g| c.in_pos_cap_v_pos(v, g))
}

pub fn in_cwv(c: &CartanDatum, m: &GradedModule, w: &WeylElement, v: &WeylElement) -> bool {
    in_cw(c, m, w) && in_cstarv(c, m, v)
}

/// `W*(M) ∩ W(N) ⊆ {0}`.
pub fn unmixed(m: &GradedModule, n: &GradedModule) -> bool {
    let a = support_wstar(m);
    support_w(n).iter().all(|g| g.iter().all(|&x| x == 0) || !a.contains(g))
}

/// Dominant weights on which the "for all Λ" quantifiers are tested:
/// fundamental weights, then sums of at most `max_terms` of them.
pub fn test_weights(c: &CartanDatum, max_terms: usize) -> Vec<Weight> {
    let mut out: BTreeSet<Weight> = BTreeSet::new();
    let mut layer: BTreeSet<Weight> = BTreeSet::new();
    layer.insert(vec![0; c.rank]);
    for _ in 0..max_terms {
        let mut next = BTreeSet::new();
        for l in &layer {
            for i in 0..c.rank {
                let mut m = l.clone();
                m[i] += 1;
                next.insert(m);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    let mut v: Vec<Weight> = out.into_iter().collect();
    v.sort_by_key(|w| (w.iter().sum::<i64>(), w.iter().rev().cloned().collect::<Vec<_>>()));
    v
}

/// `(wt X, wΛ + vΛ)` with `wt X = -β`.
pub fn braider_target(c: &CartanDatum, beta: &[i64], w: &WeylElement, v: &WeylElement, l: &[i64]) -> i64 {
    let s = add(&c.weyl_act(w, l), &c.weyl_act(v, l));
    -c.pair_root_weight(beta, &s)
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub holds: bool,
    /// first weight at which the condition failed
    pub witness: Option<Weight>,
}

/// `M ∈ C_{*,v}` iff `Λ̃(M, M(vΛ, Λ)) = 0` for all tested `Λ`.
pub fn criterion_cstarv(b: &DetBuilder, m: &GradedModule, v: &WeylElement, weights: &[Weight]) -> Result<CriterionOutcome, DetError> {
    for l in weights {
        let n = b.build_highest(v, l)?;
        if n.module.height() == 0 || m.height() == 0 {
            continue;
        }
        let r = rmatrix(&b.klr, m, &n.module)?;
        if !lambda_tilde(&b.klr, m, &n.module, r.lambda).is_zero() {
            return Ok(CriterionOutcome { holds: false, witness: Some(l.clone()) });
        }
    }
    Ok(CriterionOutcome { holds: true, witness: None })
}

/// For `X ∈ C_w`: `X ∈ C_{w,v}` iff `X` commutes with `M(wΛ,vΛ)` and `Λ(X, M(wΛ,vΛ)) = (wt X, wΛ+vΛ)`.
pub fn criterion_cwv_from_cw(b: &DetBuilder, x: &GradedModule, w: &WeylElement, v: &WeylElement, weights: &[Weight]) -> Result<CriterionOutcome, DetError> {
    let c = b.cartan();
    for l in weights {
        let n = b.build_pair(w, v, l)?;
        if x.height() == 0 {
            continue;
        }
        let (lam, iso) = if n.module.height() == 0 { (0, true) } else { lambda_and_commutes(&b.klr, x, &n.module)? };
        let ok = lam == braider_target(c, &x.beta, w, v, l) && iso;
        if !ok {
            return Ok(CriterionOutcome { holds: false, witness: Some(l.clone()) });
        }
    }
    Ok(CriterionOutcome { holds: true, witness: None })
}

/// For `X ∈ C_{*,v}`: `X ∈ C_{w,v}` iff `X` commutes with `M(wΛ,vΛ)` and `Λ(M(wΛ,vΛ), X) = -(wt X, wΛ+vΛ)`.
pub fn criterion_cwv_from_cstarv(b: &DetBuilder, x: &GradedModule, w: &WeylElement, v: &WeylElement, weights: &[Weight]) -> Result<CriterionOutcome, DetError> {
    let c = b.cartan();
    for l in weights {
        let n = b.build_pair(w, v, l)?;
        if x.height() == 0 {
            continue;
        }
        let (lam, iso) = if n.module.height() == 0 { (0, true) } else { lambda_and_commutes(&b.klr, &n.module, x)? };
        let ok = lam == -braider_target(c, &x.beta, w, v, l) && iso;
        if !ok {
            return Ok(CriterionOutcome { holds: false, witness: Some(l.clone()) });
        }
    }
    Ok(CriterionOutcome { holds: true, witness: None })
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub module: String,
    pub in_cw: bool,
    pub in_cstarv: bool,
    pub in_cwv: bool,
    pub support_w: Vec<Root>,
    pub support_wstar: Vec<Root>,
    /// criterion for `C_{*,v}`, checked for every module
    pub cstarv_criterion: CriterionOutcome,
    /// criterion from `C_w`, checked when `M ∈ C_w`
    pub from_cw_criterion: Option<CriterionOutcome>,
    /// criterion from `C_{*,v}`, checked when `M ∈ C_{*,v}`
    pub from_cstarv_criterion: Option<CriterionOutcome>,
    /// whether all computed criteria agree with the support computation
    pub agree: bool,
}

pub fn membership(b: &DetBuilder, m: &GradedModule, w: &WeylElement, v: &WeylElement, weights: &[Weight]) -> Result<MembershipReport, DetError> {
    let c = b.cartan();
    let (a, s, cwv) = (in_cw(c, m, w), in_cstarv(c, m, v), in_cwv(c, m, w, v));
    let crit = criterion_cstarv(b, m, v, weights)?;
    let from_cw = if a { Some(criterion_cwv_from_cw(b, m, w, v, weights)?) } else { None };
    let from_cs = if s { Some(criterion_cwv_from_cstarv(b, m, w, v, weights)?) } else { None };
    let agree = crit.holds == s && from_cw.as_ref().is_none_or(|o| o.holds == cwv) && from_cs.as_ref().is_none_or(|o| o.holds == cwv);
    Ok(MembershipReport {
        module: m.name.clone(),
        in_cw: a,
        in_cstarv: s,
        in_cwv: cwv,
        support_w: support_w(m).into_iter().collect(),
        support_wstar: support_wstar(m).into_iter().collect(),
        cstarv_criterion: crit,
        from_cw_criterion: from_cw,
        from_cstarv_criterion: from_cs,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::klr::Klr;

    #[test]
    fn unit_everywhere() {
        let c = CartanDatum::preset("A2").unwrap();
        let one = GradedModule::unit(2);
        let e = WeylElement::identity();
        assert!(in_cwv(&c, &one, &e, &e));
        assert!(unmixed(&one, &GradedModule::letter(2, 0)));
    }

    #[test]
    fn a2_letter_supports() {
        let c = CartanDatum::preset("A2").unwrap();
        let l1 = GradedModule::letter(2, 0);
        assert!(in_cw(&c, &l1, &WeylElement::simple(0)));
        assert!(!in_cw(&c, &l1, &WeylElement::simple(1)));
        let l = GradedModule::letter(1, 0);
        assert!(!unmixed(&l, &l));
    }

    #[test]
    fn determinantial_modules_are_members() {
        let b = DetBuilder::new(Klr::preset("A2"));
        let c = b.cartan().clone();
        for w in c.weyl_group().unwrap() {
            for v in c.weyl_group().unwrap() {
                if !c.bruhat_le(&v, &w).unwrap() {
                    continue;
                }
                for l in test_weights(&c, 2) {
                    let m = b.build_pair(&w, &v, &l).unwrap();
                    assert!(in_cwv(&c, &m.module, &w, &v), "{} {} {:?}", w.label(), v.label(), l);
                }
            }
        }
    }

    #[test]
    fn weights_list() {
        let c = CartanDatum::preset("A2").unwrap();
        assert_eq!(test_weights(&c, 2), vec![vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
    }
}
