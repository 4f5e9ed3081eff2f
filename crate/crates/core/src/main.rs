use std::error::Error;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use klr::cartan::{CartanDatum, WeylElement};
use klr::categories::{membership, test_weights};
use klr::character::{character, shuffle_product};
use klr::conv::{conv_dim, convolution_multi};
use klr::corpus::Corpus;
use klr::det::DetBuilder;
use klr::klr::{check_relations, Klr, QParams};
use klr::localization::{LObj, Localization};
use klr::module::{find_iso_degree, hom_space_degree, GradedModule, DEFAULT_CAP};
use klr::rmatrix::{head_product, invariants};
use klr::scenarios::{
    run_braider_suite, run_general_t, run_kernel_agreement, run_rigidity, run_tsystem, Origin, Report,
};
use klr::suite::{criterion, registry, run_scenario, CRITERIA, STAGE_CAP};

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "klr", version, about = "Exact quiver Hecke algebra computations and localization checks")]
struct Cli {
    /// Cartan preset (A1, A2, A3, B2, ...)
    #[arg(long, global = true, default_value = "A2")]
    preset: String,
    /// Q_ij parameters as a JSON file or inline JSON
    #[arg(long, global = true)]
    params: Option<String>,
    /// dimension cap for convolutions
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap_dim: usize,
    /// stage budget for localized homs
    #[arg(long, global = true, default_value_t = STAGE_CAP)]
    cap_stage: usize,
    /// write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Pair {
    #[arg(long, default_value = "")]
    w: String,
    #[arg(long, default_value = "")]
    v: String,
}

#[derive(Args, Clone)]
struct Triple {
    #[command(flatten)]
    wv: Pair,
    /// 1-based simple reflection
    #[arg(long)]
    i: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cartan datum, positive roots and Weyl group size
    Cartan,
    /// Compare v ≤ w by weights and by subwords
    Bruhat(Pair),
    #[command(subcommand)]
    Module(ModuleCmd),
    /// Character of a module
    Char {
        #[arg(long)]
        module: String,
    },
    /// r-matrix invariants of a pair
    Rmat {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    #[command(subcommand)]
    Det(DetCmd),
    /// Membership of a module in C_w, C_{*,v}, C_{w,v} with the r-matrix criteria
    Member {
        #[arg(long)]
        module: String,
        #[command(flatten)]
        wv: Pair,
    },
    /// T-system exact sequence or isomorphism
    Tsys(Triple),
    /// Generalized T-system
    Gent {
        #[command(flatten)]
        t: Triple,
        #[arg(long, default_value = "L1")]
        lambda: String,
        #[arg(long, default_value = "L1")]
        mu: String,
    },
    #[command(subcommand)]
    Loc(LocCmd),
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Subcommand)]
enum ModuleCmd {
    /// Check every defining relation
    Check {
        #[arg(long)]
        module: String,
    },
    /// Convolution of two modules, written as a module file
    Conv {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Head of a ∘ b through the r-matrix
    Head {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Homogeneous homomorphisms of a fixed degree
    Hom {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        degree: i64,
    },
}

#[derive(Subcommand)]
enum DetCmd {
    /// Build M(wΛ, vΛ)
    Build {
        #[command(flatten)]
        wv: Pair,
        #[arg(long, default_value = "L1")]
        weight: String,
    },
}

#[derive(Subcommand)]
enum LocCmd {
    /// Localized hom space between objects given as `MODULE,ALPHA[,SHIFT]`; `C<i>` names a family member
    Hom {
        #[command(flatten)]
        wv: Pair,
        #[arg(long, allow_hyphen_values = true)]
        src: String,
        #[arg(long, allow_hyphen_values = true)]
        dst: String,
    },
    /// Family axioms, invertibility and coherence of the right braiders
    Braidcheck {
        #[command(flatten)]
        wv: Pair,
        #[arg(long, default_value_t = 4)]
        height: usize,
        #[arg(long, default_value_t = 4)]
        pair_height: usize,
    },
    /// Kernel criterion against direct vanishing
    Kernel {
        #[command(flatten)]
        wv: Pair,
        #[arg(long, default_value_t = 4)]
        height: usize,
    },
    /// Search for a right dual among `(1, -α, k)`
    Rigid {
        #[command(flatten)]
        wv: Pair,
        #[arg(long, allow_hyphen_values = true)]
        src: String,
        #[arg(long, default_value_t = 2)]
        range: i64,
        /// α of the candidates; defaults to minus the family exponent of the source
        #[arg(long, allow_hyphen_values = true)]
        dual_alpha: Option<String>,
    },
}

#[derive(Subcommand)]
enum SuiteCmd {
    /// Run acceptance criteria (all by default) or one registered scenario
    Run {
        #[arg(long)]
        criterion: Option<usize>,
        #[arg(long)]
        scenario: Option<String>,
        /// list registered scenarios and exit
        #[arg(long)]
        list: bool,
    },
}

struct Ctx {
    cartan: CartanDatum,
    klr: Klr,
    cap_dim: usize,
    cap_stage: usize,
}

impl Ctx {
    fn det(&self) -> DetBuilder {
        DetBuilder::new(self.klr.clone())
    }

    fn elem(&self, s: &str) -> Res<WeylElement> {
        Ok(WeylElement::parse(&self.cartan, s)?)
    }

    fn pair(&self, p: &Pair) -> Res<(WeylElement, WeylElement)> {
        Ok((self.elem(&p.w)?, self.elem(&p.v)?))
    }

    fn index(&self, i: usize) -> Res<usize> {
        if i == 0 || i > self.cartan.rank {
            return Err(format!("index {i} outside 1..={}", self.cartan.rank).into());
        }
        Ok(i - 1)
    }

    /// A module file, `1` for the unit, or `L<i>` for a letter.
    fn module(&self, s: &str) -> Res<GradedModule> {
        let r = self.cartan.rank;
        if s == "1" {
            return Ok(GradedModule::unit(r));
        }
        if let Some(i) = s.strip_prefix('L').and_then(|x| x.parse::<usize>().ok()) {
            let mut m = GradedModule::letter(r, self.index(i)?);
            m.name = s.to_string();
            return Ok(m);
        }
        Ok(GradedModule::from_json(&fs::read_to_string(s)?)?)
    }

    fn localization(&self, p: &Pair) -> Res<Localization> {
        let (w, v) = self.pair(p)?;
        let mut loc = Localization::new(&self.det(), &w, &v)?;
        loc.cap = self.cap_dim;
        Ok(loc)
    }

    fn object(&self, loc: &Localization, s: &str) -> Res<LObj> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(format!("object {s} is not MODULE,ALPHA[,SHIFT]").into());
        }
        let head = parts[0].trim();
        let atoms = match head.strip_prefix('C').and_then(|x| x.parse::<usize>().ok()) {
            Some(i) => vec![self.index(i)?],
            None => {
                let m = self.module(head)?;
                if m.height() == 0 {
                    vec![]
                } else {
                    vec![loc.atom(&m)]
                }
            }
        };
        let alpha = self.cartan.parse_weight(&parts[1].replace(' ', ","))?;
        let mut o = loc.object(&atoms, &alpha);
        if let Some(k) = parts.get(2) {
            o.shift = k.trim().parse()?;
        }
        Ok(o)
    }
}

/// Integers as JSON numbers, other rationals as strings.
fn rational(x: &num::BigRational) -> Value {
    match x.is_integer().then(|| x.to_integer().to_string().parse::<i64>().ok()).flatten() {
        Some(n) => json!(n),
        None => json!(x.to_string()),
    }
}

fn params_of(c: &CartanDatum, p: &Option<String>) -> Res<Klr> {
    let Some(p) = p else {
        return Ok(Klr::new(c.clone()));
    };
    let text = if p.trim_start().starts_with('{') { p.clone() } else { fs::read_to_string(p)? };
    Ok(Klr::with_params(c.clone(), QParams::from_json(c, &text)?)?)
}

fn corpus(ctx: &Ctx, h: usize) -> Res<Vec<GradedModule>> {
    let mut all = vec![GradedModule::unit(ctx.cartan.rank)];
    all.extend(Corpus::generate(&ctx.klr, h)?.modules);
    Ok(all)
}

fn run(cli: &Cli, ctx: &Ctx) -> Res<Vec<Report>> {
    let c = &ctx.cartan;
    let one = |r: Report| Ok(vec![r]);
    match &cli.cmd {
        Cmd::Cartan => {
            let roots = c.positive_roots().ok();
            let order = c.weyl_group().ok().map(|g| g.len());
            let mut r = Report::new("cartan", json!({ "preset": cli.preset }));
            r.check("datum", true, json!({ "datum": c.to_json(), "positive_roots": roots, "weyl_order": order }), Origin::Direct);
            one(r)
        }
        Cmd::Bruhat(p) => {
            let (w, v) = ctx.pair(p)?;
            let a = c.bruhat_le(&v, &w)?;
            let b = c.bruhat_le_subword(&v, &w);
            let mut r = Report::new("bruhat", json!({ "w": w.label(), "v": v.label() }));
            r.check("weight criterion equals subword criterion", a == b, json!({ "le": a, "subword": b }), Origin::Recomputed);
            one(r)
        }
        Cmd::Module(m) => module_cmd(cli, ctx, m),
        Cmd::Char { module } => {
            let m = ctx.module(module)?;
            let mut r = Report::new("char", json!({ "module": m.name }));
            r.check("character", true, character(&m).to_json(), Origin::Direct);
            one(r)
        }
        Cmd::Rmat { a, b } => {
            let (a, b) = (ctx.module(a)?, ctx.module(b)?);
            let inv = invariants(&ctx.klr, &a, &b)?;
            let mut r = Report::new("rmat", json!({ "a": a.name, "b": b.name }));
            let nonneg = inv.delta >= num::zero() && inv.lambda_tilde >= num::zero() && inv.lambda_tilde.is_integer();
            r.check(
                "invariants",
                nonneg,
                json!({ "lambda": inv.lambda_mn, "lambda_reverse": inv.lambda_nm, "lambda_tilde": rational(&inv.lambda_tilde), "delta": rational(&inv.delta) }),
                Origin::Recomputed,
            );
            one(r)
        }
        Cmd::Det(DetCmd::Build { wv, weight }) => {
            let (w, v) = ctx.pair(wv)?;
            let l = c.parse_weight(weight)?;
            let d = ctx.det().build_pair(&w, &v, &l)?;
            let mut r = Report::new("det build", json!({ "w": w.label(), "v": v.label(), "weight": l }));
            let rel = check_relations(&ctx.klr, &d.module)?;
            let mut details = json!({ "module": d.module.to_json(), "beta": d.beta, "shift": d.shift });
            if d.module.height() > 0 {
                let inv = invariants(&ctx.klr, &d.module, &d.module)?;
                details["self_lambda"] = json!(inv.lambda_mn);
                details["self_delta"] = rational(&inv.delta);
            }
            r.check("module satisfies the relations", rel.all_pass(), details, Origin::Direct);
            one(r)
        }
        Cmd::Member { module, wv } => {
            let (w, v) = ctx.pair(wv)?;
            let m = ctx.module(module)?;
            let rep = membership(&ctx.det(), &m, &w, &v, &test_weights(c, 2))?;
            let mut r = Report::new("member", json!({ "module": m.name, "w": w.label(), "v": v.label() }));
            r.check("criteria agree with supports", rep.agree, serde_json::to_value(&rep)?, Origin::Recomputed);
            one(r)
        }
        Cmd::Tsys(t) => {
            let (w, v) = ctx.pair(&t.wv)?;
            one(run_tsystem(&ctx.det(), &w, &v, ctx.index(t.i)?)?)
        }
        Cmd::Gent { t, lambda, mu } => {
            let (w, v) = ctx.pair(&t.wv)?;
            one(run_general_t(&ctx.det(), &w, &v, ctx.index(t.i)?, &c.parse_weight(lambda)?, &c.parse_weight(mu)?)?)
        }
        Cmd::Loc(l) => loc_cmd(ctx, l),
        Cmd::Suite(SuiteCmd::Run { criterion: n, scenario, list }) => {
            if *list {
                let mut r = Report::new("suite list", json!({}));
                r.check("registry", true, serde_json::to_value(registry())?, Origin::Direct);
                return one(r);
            }
            if let Some(id) = scenario {
                let s = registry().into_iter().find(|s| &s.id == id).ok_or_else(|| format!("unknown scenario {id}"))?;
                return one(run_scenario(&s)?);
            }
            let ns: Vec<usize> = match n {
                Some(k) => vec![*k],
                None => (1..=CRITERIA.len()).collect(),
            };
            Ok(ns
                .into_iter()
                .map(|k| {
                    let r = criterion(k);
                    eprintln!("{} {}: {} ({} ms)", if r.passed() { "PASS" } else { "FAIL" }, k, CRITERIA.get(k - 1).unwrap_or(&"?"), r.wall_ms);
                    r
                })
                .collect())
        }
    }
}

fn module_cmd(cli: &Cli, ctx: &Ctx, m: &ModuleCmd) -> Res<Vec<Report>> {
    let r = match m {
        ModuleCmd::Check { module } => {
            let m = ctx.module(module)?;
            let rel = check_relations(&ctx.klr, &m)?;
            let mut r = Report::new("module check", json!({ "module": m.name }));
            for f in &rel.checks {
                r.check(&f.family, f.pass, json!(f.detail), Origin::Direct);
            }
            r
        }
        ModuleCmd::Conv { a, b } => {
            let (a, b) = (ctx.module(a)?, ctx.module(b)?);
            let mn = convolution_multi(&ctx.klr, &[a.clone(), b.clone()], ctx.cap_dim)?;
            let mut r = Report::new("module conv", json!({ "a": a.name, "b": b.name }));
            let ok = character(&mn) == shuffle_product(&ctx.cartan, &character(&a), &character(&b)) && mn.dim() == conv_dim(&[a, b]);
            r.check("character and dimension", ok, json!({ "dim": mn.dim(), "module": if cli.out.is_some() { mn.to_json() } else { Value::Null } }), Origin::Recomputed);
            r
        }
        ModuleCmd::Head { a, b } => {
            let (a, b) = (ctx.module(a)?, ctx.module(b)?);
            let h = head_product(&ctx.klr, &a, &b)?;
            let mut r = Report::new("module head", json!({ "a": a.name, "b": b.name }));
            r.check("simple head", true, json!({ "dim": h.dim(), "character": character(&h).to_json(), "module": h.to_json() }), Origin::Direct);
            r
        }
        ModuleCmd::Hom { a, b, degree } => {
            let (a, b) = (ctx.module(a)?, ctx.module(b)?);
            let basis = hom_space_degree(&a, &b, *degree);
            let iso = find_iso_degree(&a, &b, *degree).is_some();
            let mut r = Report::new("module hom", json!({ "a": a.name, "b": b.name, "degree": degree }));
            r.check("hom space", true, json!({ "dim": basis.len(), "contains_iso": iso }), Origin::Direct);
            r
        }
    };
    Ok(vec![r])
}

fn loc_cmd(ctx: &Ctx, l: &LocCmd) -> Res<Vec<Report>> {
    let r = match l {
        LocCmd::Hom { wv, src, dst } => {
            let loc = ctx.localization(wv)?;
            let (a, b) = (ctx.object(&loc, src)?, ctx.object(&loc, dst)?);
            let h = loc.stable_hom(&a, &b, ctx.cap_stage)?;
            let mut r = Report::new("loc hom", json!({ "src": a, "dst": b, "cap_stage": ctx.cap_stage }));
            r.check(
                "stabilized hom",
                h.steps <= ctx.cap_stage,
                json!({ "dim": h.dim(), "stable_stage": h.stable_stage, "steps": h.steps, "stages": h.stages, "degree": loc.hm_degree(&a, &b, &h.stable_stage) }),
                Origin::Recomputed,
            );
            r
        }
        LocCmd::Braidcheck { wv, height, pair_height } => {
            let (w, v) = ctx.pair(wv)?;
            run_braider_suite(&ctx.det(), &corpus(ctx, *height)?, &w, &v, *pair_height)?
        }
        LocCmd::Kernel { wv, height } => {
            let loc = ctx.localization(wv)?;
            let all = corpus(ctx, *height)?;
            let ones = vec![1; ctx.cartan.rank];
            run_kernel_agreement(&ctx.det(), &loc, &all[1..], &test_weights(&ctx.cartan, 1), &[ones])?
        }
        LocCmd::Rigid { wv, src, range, dual_alpha } => {
            let loc = ctx.localization(wv)?;
            let x = ctx.object(&loc, src)?;
            let alpha = match dual_alpha {
                Some(a) => ctx.cartan.parse_weight(a)?,
                None => lambda_coords(&loc, &x),
            };
            let cands: Vec<LObj> = (-range..=*range).map(|k| LObj { atoms: vec![], alpha: alpha.clone(), shift: k }).collect();
            run_rigidity(&loc, &x, &cands, ctx.cap_stage)?
        }
    };
    Ok(vec![r])
}

/// `-(α + α')` where the atoms of `x` are `C^{α'}`; falls back to `-α` for other atoms.
fn lambda_coords(loc: &Localization, x: &LObj) -> Vec<i64> {
    let mut out: Vec<i64> = x.alpha.iter().map(|t| -t).collect();
    for &a in &x.atoms {
        if a < loc.rank() {
            out[a] -= 1;
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = (|| -> Res<Vec<Report>> {
        let cartan = CartanDatum::preset(&cli.preset)?;
        let klr = params_of(&cartan, &cli.params)?;
        let ctx = Ctx { cartan, klr, cap_dim: cli.cap_dim, cap_stage: cli.cap_stage };
        run(&cli, &ctx)
    })();
    let mut reports = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if reports.len() == 1 && reports[0].wall_ms == 0 {
        reports[0].wall_ms = start.elapsed().as_millis() as u64;
    }
    let ok = reports.iter().all(|r| r.passed());
    let out = if reports.len() == 1 { serde_json::to_value(&reports[0]) } else { serde_json::to_value(&reports) };
    let text = serde_json::to_string_pretty(&out.expect("serializable")).expect("serializable");
    match &cli.out {
        Some(p) => {
            if let Err(e) = fs::write(p, text) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
        None => println!("{text}"),
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
