//! Scenario harness: T-systems, generalized T-systems, membership scans and rigidity, each
//! producing a JSON [`Report`].

use std::time::Instant;

use num::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cartan::{CartanDatum, Weight, WeylElement};
use crate::character::{character, verify_ring_identity, QCharacter, RingTerm};
use crate::conv::convolution;
use crate::det::{add, sub, DetBuilder, DetError};
use crate::module::{hom_space_degree, GradedModule};
use crate::rmatrix::{commutes, lambda_tilde, rmatrix};

#[derive(thiserror::Error, Debug, Clone)]
pub enum ScenarioError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown scenario {0}")]
    Unknown(String),
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Conv(#[from] crate::conv::ConvError),
    #[error(transparent)]
    R(#[from] crate::rmatrix::RError),
    #[error(transparent)]
    Loc(#[from] crate::localization::LocError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Where the expected value of a check comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    /// a closed formula evaluated on the instance
    ClosedForm,
    /// an independent recomputation (characters, supports, explicit modules)
    Recomputed,
    /// a value that holds by construction
    Direct,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub details: Value,
    pub origin: Origin,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub checks: Vec<Check>,
    pub wall_ms: u64,
    pub version: String,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Self {
        Report { command: command.into(), inputs, checks: Vec::new(), wall_ms: 0, version: env!("CARGO_PKG_VERSION").into() }
    }

    pub fn check(&mut self, name: &str, ok: bool, details: Value, origin: Origin) {
        self.checks.push(Check { name: name.into(), status: Status::of(ok), details, origin });
    }

    pub fn skip(&mut self, name: &str, reason: &str, origin: Origin) {
        self.checks.push(Check { name: name.into(), status: Status::Skipped, details: json!({ "reason": reason }), origin });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn count(&self, s: Status) -> usize {
        self.checks.iter().filter(|c| c.status == s).count()
    }

    /// JSON without the wall time, for reproducibility comparisons.
    pub fn stable_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().unwrap().remove("wall_ms");
        v
    }
}

fn q_int(x: num::BigRational) -> i64 {
    assert!(x.is_integer(), "pairing {x} is not an integer");
    x.to_integer().to_i64().expect("small pairing")
}

/// `(λ, μ)` on weights whose pairing is known to be integral.
fn pair(c: &CartanDatum, l: &[i64], m: &[i64]) -> i64 {
    q_int(c.pair_weights(l, m).expect("finite type"))
}

fn sref(c: &CartanDatum, w: &WeylElement, i: usize) -> WeylElement {
    w.mul(c, &WeylElement::simple(i)).normal(c)
}

fn le(c: &CartanDatum, a: &WeylElement, b: &WeylElement) -> bool {
    c.bruhat_le(a, b).unwrap_or(false)
}

fn scaled(ch: &QCharacter, shift: i64) -> RingTerm {
    RingTerm { coeff: 1, shift, factors: vec![ch.clone()] }
}

fn prod(a: &QCharacter, b: &QCharacter, shift: i64) -> RingTerm {
    RingTerm { coeff: 1, shift, factors: vec![a.clone(), b.clone()] }
}

/// Whether `q^shift (a ∘ b)` maps onto the simple `h` in degree 0, with a one-dimensional hom space.
fn head_is(b: &DetBuilder, a: &GradedModule, bm: &GradedModule, shift: i64, h: &GradedModule) -> Result<(bool, usize), ScenarioError> {
    let ab = convolution(&b.klr, a, bm)?.shift(shift);
    let homs = hom_space_degree(&ab, h, 0);
    let ok = homs.len() == 1 && homs[0].rank() == h.dim();
    Ok((ok, homs.len()))
}

/// Kernel of the head projection `q^shift (a ∘ b) -> h`, compared with `sub` in degree 0.
fn kernel_is(b: &DetBuilder, a: &GradedModule, bm: &GradedModule, shift: i64, h: &GradedModule, sub_mod: &GradedModule) -> Result<bool, ScenarioError> {
    let ab = convolution(&b.klr, a, bm)?.shift(shift);
    let homs = hom_space_degree(&ab, h, 0);
    if homs.len() != 1 {
        return Ok(false);
    }
    let mut e = crate::linalg::Echelon::new();
    for v in homs[0].kernel() {
        for p in ab.homogeneous_parts(&v) {
            e.insert(p);
        }
    }
    let (k, _) = ab.submodule(&e);
    Ok(crate::module::find_iso_degree(sub_mod, &k, 0).is_some())
}

/// T-system across `s_i` for `M(wΛ_i, vΛ_i)`: the exact sequence (when `w ≥ v s_i`) or the
/// isomorphism `q^A M(wΛ_i,vΛ_i) ∘ M(ws_iΛ_i,vs_iΛ_i) ≅ M(wλ,vλ)` (otherwise), with the ring identity
/// in the shuffle algebra.
pub fn run_tsystem(b: &DetBuilder, w: &WeylElement, v: &WeylElement, i: usize) -> Result<Report, ScenarioError> {
    let start = Instant::now();
    let c = b.cartan().clone();
    let (w, v) = (w.normal(&c), v.normal(&c));
    let (ws, vs) = (sref(&c, &w, i), sref(&c, &v, i));
    let mut rep = Report::new("tsys", json!({ "preset": c.name, "w": w.label(), "v": v.label(), "i": i + 1 }));
    if !le(&c, &v, &w) || ws.len() <= w.len() || vs.len() <= v.len() {
        return Err(ScenarioError::Precondition("need w ≥ v, w < ws_i, v < vs_i".into()));
    }
    let li = c.fundamental(i);
    let (wl, vl, wsl, vsl) = (c.weyl_act(&w, &li), c.weyl_act(&v, &li), c.weyl_act(&ws, &li), c.weyl_act(&vs, &li));
    let a = pair(&c, &vl, &sub(&vsl, &wsl));
    let a_alt = pair(&c, &wsl, &sub(&wl, &vl));
    rep.check("exponent A computed two ways", a == a_alt, json!({ "A": a, "alt": a_alt }), Origin::ClosedForm);
    let ring_exp = pair(&c, &sub(&wl, &vl), &wsl);
    let di = c.d[i];
    let sub_exp = di + pair(&c, &vsl, &sub(&vl, &wsl));
    let sub_exp_alt = di + pair(&c, &vl, &sub(&vsl, &wl));
    let case_a = le(&c, &vs, &w);
    let lam = add(&c.reflect_weight(i, &li), &li);

    let m1 = b.build_pair(&w, &v, &li)?.module;
    let m2 = b.build_pair(&ws, &vs, &li)?.module;
    let m5 = b.build_pair(&w, &v, &lam)?.module;
    let (c1, c2, c5) = (character(&m1), character(&m2), character(&m5));
    rep.inputs["case"] = json!(if case_a { "exact sequence" } else { "isomorphism" });
    rep.inputs["modules"] = json!([m1.name, m2.name, m5.name]);

    if case_a {
        let m3 = b.build_pair(&w, &vs, &li)?.module;
        let m4 = b.build_pair(&ws, &v, &li)?.module;
        let (c3, c4) = (character(&m3), character(&m4));
        let lhs = [prod(&c1, &c2, a)];
        let rhs = [prod(&c3, &c4, sub_exp), scaled(&c5, 0)];
        let ok = verify_ring_identity(&c, &lhs, &rhs);
        rep.check("characters: middle = sub + quotient", ok, json!({ "middle_shift": a, "sub_shift": sub_exp }), Origin::Recomputed);
        let ok = verify_ring_identity(&c, &[prod(&c1, &c2, ring_exp)], &rhs);
        rep.check("ring identity, first form", ok, json!({ "lhs_shift": ring_exp }), Origin::Recomputed);
        let ok = verify_ring_identity(&c, &[prod(&c1, &c2, ring_exp)], &[prod(&c4, &c3, sub_exp_alt), scaled(&c5, 0)]);
        rep.check("ring identity, second form", ok, json!({ "shift": sub_exp_alt }), Origin::Recomputed);
        let (ok, n) = head_is(b, &m1, &m2, a, &m5)?;
        rep.check("head of the middle term is M(wλ,vλ)", ok, json!({ "hom_dim": n }), Origin::Recomputed);
        let sub_mod = convolution(&b.klr, &m3, &m4)?.shift(sub_exp);
        let ok = kernel_is(b, &m1, &m2, a, &m5, &sub_mod)?;
        rep.check("kernel of the head projection is the sub term", ok, json!({ "sub_dim": sub_mod.dim() }), Origin::Recomputed);
    } else {
        let lhs = [prod(&c1, &c2, ring_exp)];
        let ok = verify_ring_identity(&c, &lhs, &[scaled(&c5, 0)]);
        rep.check("ring identity with vanishing minor", ok, json!({ "lhs_shift": ring_exp }), Origin::Recomputed);
        let mid = convolution(&b.klr, &m1, &m2)?.shift(a);
        let iso = crate::module::find_iso_degree(&mid, &m5, 0).is_some();
        rep.check("product is isomorphic to M(wλ,vλ)", iso, json!({ "dim": mid.dim() }), Origin::Recomputed);
    }
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// `ξ = λ + s_i μ`, and the pair `(w', Λ')` with `M(w'Λ', v'Λ') = M(wξ, vξ)`.
fn xi_data(c: &CartanDatum, w: &WeylElement, v: &WeylElement, i: usize, l: &[i64], m: &[i64]) -> Option<(WeylElement, WeylElement, Weight)> {
    let xi = add(l, &c.reflect_weight(i, m));
    if c.is_dominant(&xi) {
        return Some((w.clone(), v.clone(), xi));
    }
    let sxi = c.reflect_weight(i, &xi);
    if c.is_dominant(&sxi) {
        return Some((sref(c, w, i), sref(c, v, i), sxi));
    }
    None
}

/// Generalized T-system for `M(wλ,vλ)` and `M(ws_iμ,vs_iμ)`.
pub fn run_general_t(b: &DetBuilder, w: &WeylElement, v: &WeylElement, i: usize, l: &[i64], m: &[i64]) -> Result<Report, ScenarioError> {
    let start = Instant::now();
    let c = b.cartan().clone();
    let (w, v) = (w.normal(&c), v.normal(&c));
    let (ws, vs) = (sref(&c, &w, i), sref(&c, &v, i));
    let mut rep = Report::new("gent", json!({ "preset": c.name, "w": w.label(), "v": v.label(), "i": i + 1, "lambda": l, "mu": m }));
    if !le(&c, &v, &w) || ws.len() <= w.len() || vs.len() <= v.len() || !c.is_dominant(l) || !c.is_dominant(m) {
        return Err(ScenarioError::Precondition("need w ≥ v, ws_i > w, vs_i > v, λ and μ dominant".into()));
    }
    let xi = xi_data(&c, &w, &v, i, l, m);
    rep.check("ξ or s_iξ is dominant", xi.is_some(), json!({ "xi": add(l, &c.reflect_weight(i, m)) }), Origin::ClosedForm);
    let Some((wx, vx, lx)) = xi else {
        rep.wall_ms = start.elapsed().as_millis() as u64;
        return Ok(rep);
    };
    let (wl, vl) = (c.weyl_act(&w, l), c.weyl_act(&v, l));
    let (wsm, vsm) = (c.weyl_act(&ws, m), c.weyl_act(&vs, m));
    let t = pair(&c, &sub(&wl, &vl), &wsm);
    let t_alt = -pair(&c, &vl, &sub(&wsm, &vsm));
    let big = pair(&c, &sub(&wl, &vl), &add(&wsm, &vsm));
    let big_alt = -pair(&c, &add(&wl, &vl), &sub(&wsm, &vsm));
    rep.check("Λ̃ formula computed two ways", t == t_alt, json!({ "value": t, "alt": t_alt }), Origin::ClosedForm);
    rep.check("Λ formula computed two ways", big == big_alt, json!({ "value": big, "alt": big_alt }), Origin::ClosedForm);

    let ml = b.build_pair(&w, &v, l)?.module;
    let mm = b.build_pair(&ws, &vs, m)?.module;
    let mx = b.build_pair(&wx, &vx, &lx)?.module;
    rep.inputs["modules"] = json!([ml.name, mm.name, mx.name]);
    if ml.height() == 0 || mm.height() == 0 {
        let other = if ml.height() == 0 { &mm } else { &ml };
        let iso = crate::module::find_iso_degree(other, &mx, 0).is_some();
        rep.check("head of the product is M(wξ,vξ)", iso, json!({ "trivial_factor": true }), Origin::Direct);
        rep.check("Λ values vanish against the unit", t == 0 && big == 0, json!({ "lambda": big, "lambda_tilde": t }), Origin::Direct);
    } else {
        let (ok, n) = head_is(b, &ml, &mm, t, &mx)?;
        rep.check("head of the product is M(wξ,vξ)", ok, json!({ "shift": t, "hom_dim": n }), Origin::Recomputed);
        let r = rmatrix(&b.klr, &ml, &mm)?;
        let lt = lambda_tilde(&b.klr, &ml, &mm, r.lambda);
        rep.check("Λ matches the formula", r.lambda == big, json!({ "computed": r.lambda, "formula": big }), Origin::ClosedForm);
        rep.check("Λ̃ matches the formula", lt == num::BigRational::from_integer(t.into()), json!({ "computed": lt.to_string(), "formula": t }), Origin::ClosedForm);
    }
    if !le(&c, &vs, &w) {
        let ok = commutes(&b.klr, &ml, &mm)?;
        rep.check("the two modules commute", ok, json!({}), Origin::Recomputed);
    }
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// Localized form of the generalized T-system. The right-localization statement
/// `Q^r_{ws_i,vs_i}(M(wλ,vλ)) ≅ q^{-t} M(ws_iη, vs_iη) ∘ M(ws_iμ, vs_iμ)^{∘-1}` with `η = s_iλ + μ` is
/// checked through localized homs when `μ` is zero or fundamental. The left-localization statement
/// is checked through its prerequisites: the left kernel test and the head identity.
pub fn run_corollary_qcenter(b: &DetBuilder, w: &WeylElement, v: &WeylElement, i: usize, l: &[i64], m: &[i64], cap: usize) -> Result<Report, ScenarioError> {
    let start = Instant::now();
    let c = b.cartan().clone();
    let (w, v) = (w.normal(&c), v.normal(&c));
    let (ws, vs) = (sref(&c, &w, i), sref(&c, &v, i));
    let mut rep = Report::new("qcenter", json!({ "preset": c.name, "w": w.label(), "v": v.label(), "i": i + 1, "lambda": l, "mu": m }));
    if !le(&c, &v, &w) || ws.len() <= w.len() || vs.len() <= v.len() || !c.is_dominant(l) || !c.is_dominant(m) {
        return Err(ScenarioError::Precondition("need w ≥ v, ws_i > w, vs_i > v, λ and μ dominant".into()));
    }
    let (wl, vl) = (c.weyl_act(&w, l), c.weyl_act(&v, l));
    let t = pair(&c, &sub(&wl, &vl), &c.weyl_act(&ws, m));
    let ml = b.build_pair(&w, &v, l)?.module;
    let mm = b.build_pair(&ws, &vs, m)?.module;

    let xi = add(l, &c.reflect_weight(i, m));
    if c.is_dominant(&xi) {
        let weights = crate::categories::test_weights(&c, 1);
        let kept = crate::localization::kernel_test_left(b, &mm, &w, &v, &weights)?;
        rep.check("left localization keeps M(ws_iμ,vs_iμ)", kept, json!({}), Origin::Recomputed);
        let mx = b.build_pair(&w, &v, &xi)?.module;
        let ok = if ml.height() == 0 || mm.height() == 0 {
            crate::module::find_iso_degree(if ml.height() == 0 { &mm } else { &ml }, &mx, 0).is_some()
        } else {
            head_is(b, &ml, &mm, t, &mx)?.0
        };
        rep.check("head of M(wλ,vλ) ∘ M(ws_iμ,vs_iμ) is M(wξ,vξ)", ok, json!({ "shift": t }), Origin::Recomputed);
        rep.skip("left-localized isomorphism", "only the right localization is realized", Origin::Recomputed);
    }

    let eta = add(&c.reflect_weight(i, l), m);
    let fundamental = m.iter().filter(|&&x| x != 0).count() <= 1 && m.iter().all(|&x| x <= 1);
    if c.is_dominant(&eta) {
        if !fundamental {
            rep.skip("right-localized isomorphism", "μ is neither zero nor fundamental", Origin::Recomputed);
        } else {
            match crate::localization::Localization::new(b, &ws, &vs) {
                Err(e) => rep.skip("right-localized isomorphism", &format!("family unavailable: {e}"), Origin::Recomputed),
                Ok(loc) => {
                    let my = b.build_pair(&ws, &vs, &eta)?.module;
                    let x = loc.object(&[loc.atom(&ml)], &vec![0; c.rank]);
                    let neg: Vec<i64> = m.iter().map(|a| -a).collect();
                    let y = crate::localization::LObj { atoms: vec![loc.atom(&my)], alpha: neg, shift: -t };
                    let (iso, steps) = loc.is_iso(&x, &y, cap)?;
                    rep.check("right-localized isomorphism", iso, json!({ "shift": -t, "steps": steps, "target": my.name }), Origin::Recomputed);
                }
            }
        }
    }
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// Support-based membership against the r-matrix criteria for every simple of the corpus.
pub fn run_membership_scan(b: &DetBuilder, corpus: &[GradedModule], w: &WeylElement, v: &WeylElement, weights: &[Weight]) -> Result<Report, ScenarioError> {
    let start = Instant::now();
    let c = b.cartan().clone();
    let (w, v) = (w.normal(&c), v.normal(&c));
    let mut rep = Report::new("member", json!({ "preset": c.name, "w": w.label(), "v": v.label(), "corpus": corpus.len(), "weights": weights }));
    if !le(&c, &v, &w) {
        return Err(ScenarioError::Precondition("need v ≤ w".into()));
    }
    let mut counts = (0, 0, 0);
    for m in corpus {
        let r = crate::categories::membership(b, m, &w, &v, weights)?;
        counts.0 += r.in_cw as usize;
        counts.1 += r.in_cstarv as usize;
        counts.2 += r.in_cwv as usize;
        let details = json!({
            "in_cw": r.in_cw,
            "in_cstarv": r.in_cstarv,
            "in_cwv": r.in_cwv,
            "cstarv_criterion": r.cstarv_criterion.holds,
            "from_cw": r.from_cw_criterion.as_ref().map(|o| o.holds),
            "from_cstarv": r.from_cstarv_criterion.as_ref().map(|o| o.holds),
        });
        rep.check(&format!("criteria agree on {}", m.name), r.agree, details, Origin::Recomputed);
    }
    rep.inputs["members"] = json!({ "cw": counts.0, "cstarv": counts.1, "cwv": counts.2 });
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// `C_{w,v} = C_{ws_i,vs_i}` on the corpus when `w ⋡ vs_i`.
pub fn run_category_equality(b: &DetBuilder, corpus: &[GradedModule], w: &WeylElement, v: &WeylElement, i: usize) -> Result<Report, ScenarioError> {
    use crate::categories::in_cwv;
    let start = Instant::now();
    let c = b.cartan().clone();
    let (w, v) = (w.normal(&c), v.normal(&c));
    let (ws, vs) = (sref(&c, &w, i), sref(&c, &v, i));
    let mut rep = Report::new("member-equality", json!({ "preset": c.name, "w": w.label(), "v": v.label(), "i": i + 1, "corpus": corpus.len() }));
    if !le(&c, &v, &w) || v == w || ws.len() <= w.len() || vs.len() <= v.len() || le(&c, &vs, &w) {
        return Err(ScenarioError::Precondition("need v < w, w < ws_i, v < vs_i and w ⋡ vs_i".into()));
    }
    let a: Vec<&str> = corpus.iter().filter(|m| in_cwv(&c, m, &w, &v)).map(|m| m.name.as_str()).collect();
    let bb: Vec<&str> = corpus.iter().filter(|m| in_cwv(&c, m, &ws, &vs)).map(|m| m.name.as_str()).collect();
    rep.check("member sets coincide", a == bb, json!({ "left": a, "right": bb, "right_label": format!("C_{{{},{}}}", ws.label(), vs.label()) }), Origin::Recomputed);
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// Right braiders of a family: family axioms, invertibility on `C_{w,v}`, failure outside it,
/// `Λ(X, C_i) = -Λ(C_i, X) = φ_i(wt X)` on members, and coherence on pairs of total height at most
/// `pair_height`.
pub fn run_braider_suite(b: &DetBuilder, corpus: &[GradedModule], w: &WeylElement, v: &WeylElement, pair_height: usize) -> Result<Report, ScenarioError> {
    use crate::categories::{in_cw, in_cwv};
    use crate::localization::Localization;
    let start = Instant::now();
    let c = b.cartan().clone();
    let (w, v) = (w.normal(&c), v.normal(&c));
    let mut rep = Report::new("loc braidcheck", json!({ "preset": c.name, "w": w.label(), "v": v.label(), "corpus": corpus.len(), "pair_height": pair_height }));
    let loc = Localization::new(b, &w, &v)?;
    let fam = loc.verify_family()?;
    rep.check("family axioms", fam.ok(), serde_json::to_value(&fam).unwrap(), Origin::Recomputed);
    let scanned: Vec<&GradedModule> = corpus.iter().filter(|m| in_cw(&c, m, &w)).collect();
    let mut outside_failures = Vec::new();
    for m in &scanned {
        let x = loc.atom(m);
        let member = in_cwv(&c, m, &w, &v);
        let mut inv = true;
        for i in 0..loc.rank() {
            let r = loc.braid_atom(i, x)?;
            inv &= r.rows == r.cols && r.rank() == r.cols;
        }
        if member {
            rep.check(&format!("braiders invertible on {}", m.name), inv, json!({}), Origin::Recomputed);
            let mut phis = Vec::new();
            let mut ok = true;
            for i in 0..loc.rank() {
                let ci = loc.family_member(i);
                let phi = loc.phi(i, &m.wt());
                let (r, l) = if m.height() == 0 { (0, 0) } else { (rmatrix(&b.klr, m, &ci)?.lambda, rmatrix(&b.klr, &ci, m)?.lambda) };
                ok &= r == phi && l == -phi;
                phis.push(json!({ "phi": phi, "right": r, "left": l }));
            }
            rep.check(&format!("right and left degrees on {}", m.name), ok, json!(phis), Origin::ClosedForm);
        } else if !inv {
            outside_failures.push(m.name.clone());
        }
    }
    rep.check("some braider outside C_{w,v} is not invertible", !outside_failures.is_empty(), json!({ "modules": outside_failures }), Origin::Recomputed);
    let mut pairs = 0;
    for x in &scanned {
        for y in &scanned {
            if x.height() + y.height() > pair_height || x.height() == 0 || y.height() == 0 {
                continue;
            }
            for i in 0..loc.rank() {
                let ok = loc.coherence(i, x, y)?;
                pairs += 1;
                if !ok {
                    rep.check(&format!("coherence for C{} on {} ∘ {}", i + 1, x.name, y.name), false, json!({}), Origin::Recomputed);
                }
            }
        }
    }
    rep.check("coherence on all scanned pairs", rep.passed(), json!({ "checked": pairs }), Origin::Recomputed);
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// `(1,β) ⊗ (1,-β) = q^{-H(β,β)} (1,0)`, `T(id, id) = id`, and `(1,β) ≅ (C^β, 0)` with the family
/// shift.
pub fn run_inverse_check(loc: &crate::localization::Localization, beta: &[i64], cap: usize) -> Result<Report, ScenarioError> {
    use crate::localization::LObj;
    let start = Instant::now();
    let mut rep = Report::new("loc inverse", json!({ "w": loc.w.label(), "v": loc.v.label(), "beta": beta }));
    let n = loc.rank();
    let p = loc.object(&[], beta);
    let neg: Vec<i64> = beta.iter().map(|x| -x).collect();
    let m = loc.object(&[], &neg);
    let t = loc.tensor_obj(&p, &m);
    let want = LObj { atoms: vec![], alpha: vec![0; n], shift: -loc.h_form(beta, beta) };
    rep.check("tensor of inverse objects", t == want, json!({ "object": t, "expected": want }), Origin::ClosedForm);
    let tid = loc.tensor_mor(&loc.identity(&p)?, &loc.identity(&m)?)?;
    let r = loc.ratio(&tid, &loc.identity(&t)?)?;
    rep.check("tensor of identities is the identity", r.as_ref().is_some_and(|x| num::One::is_one(x)), json!({ "ratio": r.map(|x| x.to_string()) }), Origin::Recomputed);
    let (iso, steps) = loc.is_iso(&t, &want, cap)?;
    rep.check("isomorphic to the shifted unit", iso, json!({ "steps": steps }), Origin::Recomputed);
    let mut steps2 = 0;
    if beta.iter().all(|&x| x >= 0) {
        let cb = LObj { atoms: loc.cpow(beta), alpha: vec![0; n], shift: loc.h_shift(beta) };
        let (iso, s) = loc.is_iso(&p, &cb, cap)?;
        steps2 = s;
        rep.check("(1,β) is isomorphic to (C^β,0)", iso, json!({ "object": cb, "steps": s }), Origin::Recomputed);
    }
    rep.inputs["max_steps"] = json!(steps.max(steps2));
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// Kernel test of the right localization against direct vanishing of `R_{C^δ}(X)`.
pub fn run_kernel_agreement(b: &DetBuilder, loc: &crate::localization::Localization, corpus: &[GradedModule], weights: &[Weight], deltas: &[Vec<i64>]) -> Result<Report, ScenarioError> {
    use crate::categories::in_cw;
    let start = Instant::now();
    let c = b.cartan().clone();
    let mut rep = Report::new("loc kernel", json!({ "w": loc.w.label(), "v": loc.v.label(), "deltas": deltas }));
    let mut n = 0;
    for m in corpus.iter().filter(|m| in_cw(&c, m, &loc.w)) {
        let kept = crate::localization::kernel_test_right(b, m, &loc.w, &loc.v, weights)?;
        let killed = loc.kills(&[loc.atom(m)], deltas)?;
        rep.check(&format!("kernel test on {}", m.name), kept != killed, json!({ "kept": kept, "killed": killed }), Origin::Recomputed);
        n += 1;
    }
    rep.inputs["simples"] = json!(n);
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// For `Z ∈ C_{ws_i}`: the right localization by `(ws_i, vs_i)` kills `Z` iff the left localization
/// by `(w, v)` does, both decided by the kernel criteria.
pub fn run_kernel_symmetry(b: &DetBuilder, corpus: &[GradedModule], w: &WeylElement, v: &WeylElement, i: usize, weights: &[Weight]) -> Result<Report, ScenarioError> {
    use crate::categories::in_cwv;
    use crate::localization::{kernel_test_left, kernel_test_right};
    let start = Instant::now();
    let c = b.cartan().clone();
    let (w, v) = (w.normal(&c), v.normal(&c));
    let (ws, vs) = (sref(&c, &w, i), sref(&c, &v, i));
    let mut rep = Report::new("loc kernel-symmetry", json!({ "preset": c.name, "w": w.label(), "v": v.label(), "i": i + 1 }));
    if !le(&c, &v, &w) || ws.len() <= w.len() || vs.len() <= v.len() {
        return Err(ScenarioError::Precondition("need w ≥ v, ws_i > w, vs_i > v".into()));
    }
    let mut n = 0;
    for z in corpus.iter().filter(|m| in_cwv(&c, m, &ws, &v)) {
        let r = kernel_test_right(b, z, &ws, &vs, weights)?;
        let l = kernel_test_left(b, z, &w, &v, weights)?;
        rep.check(&format!("kernels agree on {}", z.name), r == l, json!({ "right_keeps": r, "left_keeps": l }), Origin::Recomputed);
        n += 1;
    }
    rep.inputs["simples"] = json!(n);
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

/// Searches the candidates for a right dual of `x`; an exhausted search is reported as skipped.
pub fn run_rigidity(loc: &crate::localization::Localization, x: &crate::localization::LObj, candidates: &[crate::localization::LObj], cap: usize) -> Result<Report, ScenarioError> {
    let start = Instant::now();
    let mut rep = Report::new("loc rigid", json!({ "w": loc.w.label(), "v": loc.v.label(), "object": x, "candidates": candidates.len() }));
    for y in candidates {
        match loc.find_dual(x, y, cap) {
            Ok(Some((_, _, chk))) => {
                rep.check("right dual", chk.verified, json!({ "dual": y, "check": chk }), Origin::Recomputed);
                rep.check("both snake identities", chk.snake_x && chk.snake_y, json!({}), Origin::Recomputed);
                rep.wall_ms = start.elapsed().as_millis() as u64;
                return Ok(rep);
            }
            Ok(None) | Err(crate::localization::LocError::Weight) => {}
            Err(crate::localization::LocError::Cap(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    rep.skip("right dual", "search budget exhausted", Origin::Recomputed);
    rep.wall_ms = start.elapsed().as_millis() as u64;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::klr::Klr;

    fn a2() -> (DetBuilder, CartanDatum) {
        let b = DetBuilder::new(Klr::preset("A2"));
        let c = b.cartan().clone();
        (b, c)
    }

    #[test]
    fn exact_sequence_instance() {
        let (b, c) = a2();
        let r = run_tsystem(&b, &WeylElement::from_word(&c, &[0, 1]), &WeylElement::identity(), 0).unwrap();
        assert!(r.passed(), "{}", serde_json::to_string(&r).unwrap());
        assert!(r.checks.iter().any(|c| c.name.contains("middle = sub + quotient")));
    }

    #[test]
    fn isomorphism_instance() {
        let (b, _) = a2();
        let r = run_tsystem(&b, &WeylElement::simple(0), &WeylElement::identity(), 1).unwrap();
        assert!(r.passed());
        assert!(r.checks.iter().any(|c| c.name.contains("isomorphic")));
    }

    #[test]
    fn tsystem_precondition() {
        let (b, c) = a2();
        let w = WeylElement::from_word(&c, &[0, 1]);
        assert!(matches!(run_tsystem(&b, &w, &WeylElement::identity(), 1), Err(ScenarioError::Precondition(_))));
    }

    #[test]
    fn general_instance_and_stable_json() {
        let (b, c) = a2();
        let w = WeylElement::from_word(&c, &[0, 1]);
        let r1 = run_general_t(&b, &w, &WeylElement::identity(), 0, &[1, 0], &[1, 0]).unwrap();
        let r2 = run_general_t(&b, &w, &WeylElement::identity(), 0, &[1, 0], &[1, 0]).unwrap();
        assert!(r1.passed());
        assert_eq!(r1.stable_json(), r2.stable_json());
    }

    #[test]
    fn category_equality_instance() {
        let (b, _) = a2();
        let mut all = vec![GradedModule::unit(2)];
        all.extend(crate::corpus::Corpus::generate(&b.klr, 3).unwrap().modules);
        let r = run_category_equality(&b, &all, &WeylElement::simple(0), &WeylElement::identity(), 1).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn a1_membership_on_height_two() {
        let b = DetBuilder::new(Klr::preset("A1"));
        let corpus = crate::corpus::Corpus::generate(&b.klr, 2).unwrap().modules;
        assert_eq!(corpus.len(), 2);
        let r = run_membership_scan(&b, &corpus, &WeylElement::simple(0), &WeylElement::identity(), &[vec![1], vec![2]]).unwrap();
        assert!(r.passed());
    }
}
