//! The verbs: each takes a validated job and returns what to print plus the gate verdict.

use crate::config::{check_agreement, JobConfig, KindName, Resolved};
use crate::output::{json, num, profile_csv, sibling, state_csv, write_atomic};
use crate::presets::{self, Preset};
use crate::CliError;
use kbwave::evolution::{cfl_dt_max, default_dt, permanence, EvolutionError, EvolutionState};
use kbwave::higher_ell::{conjecture_report, reduce_vanishing, ConjectureRow, FPoly};
use kbwave::quartic::{classify, eval_f, params_from_values, CaseTag, Params, RootMultiset, DEFAULT_CLUSTER_TOL};
use kbwave::solutions::{
    case1, case2, constant_solution, dispatch, evaluate, general_sn2, limiting_form, periodic_trig, solitary_double,
    solve_auto, u_v_pair, Branch, Case1Kind, Case2Kind, ClosedFormSolution, DerivedCoefficients, LimitCase,
};
use kbwave::verify::{compare_profiles, ode_residual, oracle_on_domain, pde_residual, sample, Profile};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Absolute gate on the PDE residual.
pub const PDE_GATE: f64 = 1e-6;
/// Absolute gate on the closed-form vs oracle distance.
pub const ORACLE_GATE: f64 = 1e-6;
/// Absolute gate on the permanence error of an evolution run.
pub const PERMANENCE_GATE: f64 = 1e-3;

pub struct Job {
    pub cfg: JobConfig,
    pub out: Option<PathBuf>,
    /// Relative ODE residual gate, multiplied by `scale⁴`.
    pub tol: f64,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub passed: bool,
}

struct Subject {
    preset: Option<Preset>,
    resolved: Resolved,
}

fn subject(cfg: &JobConfig) -> Result<Subject, CliError> {
    let Some(name) = &cfg.preset else {
        return Ok(Subject { preset: None, resolved: cfg.resolve()? });
    };
    let preset = presets::find(name).ok_or_else(|| {
        CliError::Usage(format!("unknown preset {name:?}; known presets: {}", presets::names().join(", ")))
    })?;
    let values = preset.root_values();
    // explicit params/roots must describe the preset's quartic
    check_agreement(&preset.params, &params_from_values(&values), &values)?;
    if let Some(p) = &cfg.params {
        check_agreement(p, &params_from_values(&values), &values)?;
    }
    if let Some(r) = &cfg.roots {
        let given = [r[0], r[1], r[2], r[3]];
        check_agreement(&preset.params, &params_from_values(&given), &given)?;
    }
    let roots = RootMultiset::from_values(&values, DEFAULT_CLUSTER_TOL).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(Subject {
        preset: Some(preset),
        resolved: Resolved { params: preset.params, roots },
    })
}

fn four(roots: &RootMultiset) -> Result<[f64; 4], String> {
    let v = roots.values();
    match v.as_slice() {
        [a, b, c, d] => Ok([*a, *b, *c, *d]),
        _ => Err(format!("needs four real zeros, found {}", v.len())),
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * scale
}

/// Builds one family from the zeros, trying every assignment of the zeros to its inputs.
pub fn build(kind: KindName, roots: &RootMultiset, branch: Branch, xi0: f64) -> Result<ClosedFormSolution, String> {
    let tag = classify(roots);
    let e = roots.entries();
    let wrong = || Err(format!("{} does not apply to {tag}", kind.name()));
    let err = |x: kbwave::solutions::SolutionError| x.to_string();
    match kind {
        KindName::Auto => solve_auto(roots, branch, xi0).map_err(err),
        KindName::SolitaryDouble => match tag {
            CaseTag::DoubleBetweenSimples => solitary_double(e[0].0, e[1].0, e[2].0, branch, xi0).map_err(err),
            _ => wrong(),
        },
        KindName::PeriodicTrig => match tag {
            CaseTag::DoubleBelowSimples => periodic_trig(e[1].0, e[2].0, e[0].0, branch, xi0).map_err(err),
            CaseTag::DoubleAboveSimples => periodic_trig(e[0].0, e[1].0, e[2].0, branch, xi0).map_err(err),
            _ => wrong(),
        },
        KindName::SolitaryTriple => match tag {
            CaseTag::TripleWithSimpleAbove | CaseTag::TripleWithSimpleBelow => solve_auto(roots, branch, xi0).map_err(err),
            _ => wrong(),
        },
        KindName::LimitA | KindName::LimitB | KindName::LimitC => {
            let case = match kind {
                KindName::LimitA => LimitCase::A,
                KindName::LimitB => LimitCase::B,
                _ => LimitCase::C,
            };
            match tag {
                CaseTag::DoubleBetweenSimples => limiting_form(case, [e[0].0, e[1].0, e[2].0], branch, xi0).map_err(err),
                _ => wrong(),
            }
        }
        KindName::LimitD => match tag {
            CaseTag::TripleWithSimpleAbove => limiting_form(LimitCase::D, [e[0].0, e[0].0, e[1].0], branch, xi0).map_err(err),
            CaseTag::TripleWithSimpleBelow => limiting_form(LimitCase::D, [e[0].0, e[1].0, e[1].0], branch, xi0).map_err(err),
            _ => wrong(),
        },
        KindName::Case1Cn | KindName::Case1Dn => {
            let k = if kind == KindName::Case1Cn { Case1Kind::Cn } else { Case1Kind::Dn };
            let v = four(roots)?;
            let scale = roots.scale();
            let mut last = format!("no three zeros f1 <= f2 <= f3 with f4 = f1 + f3 - f2 among {roots}");
            for j in 0..4 {
                let r: Vec<f64> = (0..4).filter(|&i| i != j).map(|i| v[i]).collect();
                if !close(r[0] + r[2] - r[1], v[j], scale) {
                    continue;
                }
                match case1(k, r[0], r[1], r[2], branch, xi0) {
                    Ok(s) => return Ok(s),
                    Err(x) => last = x.to_string(),
                }
            }
            Err(last)
        }
        KindName::Case2Sn
        | KindName::Case2Cn
        | KindName::Case2Dn
        | KindName::Case2InvSn
        | KindName::Case2InvCn
        | KindName::Case2Tn
        | KindName::Case2DnTn => {
            let k = match kind {
                KindName::Case2Sn => Case2Kind::Sn,
                KindName::Case2Cn => Case2Kind::Cn,
                KindName::Case2Dn => Case2Kind::Dn,
                KindName::Case2InvSn => Case2Kind::InvSn,
                KindName::Case2InvCn => Case2Kind::InvCn,
                KindName::Case2Tn => Case2Kind::Tn,
                _ => Case2Kind::DnTn,
            };
            let v = four(roots)?;
            if matches!(k, Case2Kind::Tn | Case2Kind::DnTn) {
                return case2(k, v[0], v[1], v[2], xi0).map_err(err);
            }
            let scale = roots.scale();
            let mut tried: Vec<[f64; 3]> = Vec::new();
            let mut last = format!("no assignment of {roots} matches f4 = f1 f2 f3/(f2 f3 + f1 f2 - f1 f3)");
            for i in 0..4 {
                for j in 0..4 {
                    for l in 0..4 {
                        if i == j || j == l || i == l {
                            continue;
                        }
                        let m = 6 - i - j - l;
                        let t = [v[i], v[j], v[l]];
                        if tried.contains(&t) {
                            continue;
                        }
                        tried.push(t);
                        let den = t[1] * t[2] + t[0] * t[1] - t[0] * t[2];
                        if den == 0.0 || !close(t[0] * t[1] * t[2] / den, v[m], scale) {
                            continue;
                        }
                        match case2(k, t[0], t[1], t[2], xi0) {
                            Ok(s) => return Ok(s),
                            Err(x) => last = x.to_string(),
                        }
                    }
                }
            }
            Err(last)
        }
        KindName::GeneralSn2 => match tag {
            CaseTag::FourSimple => {
                let index = if branch == Branch::Upper { 4 } else { 1 };
                general_sn2(four(roots)?, index, xi0).map_err(err)
            }
            _ => wrong(),
        },
        KindName::Constant => {
            let level = e.iter().find(|z| z.1 >= 2).or(e.first()).map(|z| z.0);
            match (level, four(roots)) {
                (Some(level), Ok(v)) => constant_solution(v, level, xi0).map_err(err),
                (None, _) => Err(format!("{tag}: {}", tag.verdict())),
                (_, Err(m)) => Err(m),
            }
        }
    }
}

/// Families other than `auto` that construct for these zeros.
pub fn feasible_kinds(roots: &RootMultiset, branch: Branch, xi0: f64) -> Vec<String> {
    KindName::CONCRETE
        .iter()
        .filter(|k| build(**k, roots, branch, xi0).is_ok())
        .map(|k| k.name())
        .collect()
}

fn construct(cfg: &JobConfig, sub: &Subject) -> Result<ClosedFormSolution, CliError> {
    let branch: Branch = cfg.branch.into();
    let roots = &sub.resolved.roots;
    let built = match (&sub.preset, cfg.kind) {
        (Some(p), KindName::Auto) => p.solution(cfg.xi0).map_err(|e| e.to_string()),
        (_, kind) => build(kind, roots, branch, cfg.xi0),
    };
    let s = built.map_err(|why| {
        let tag = classify(roots);
        let feasible = feasible_kinds(roots, branch, cfg.xi0);
        let list = if feasible.is_empty() { "none".to_string() } else { feasible.join(", ") };
        let what = if cfg.kind == KindName::Auto && dispatch(tag).is_empty() {
            format!("no closed form for {tag} ({})", tag.verdict())
        } else {
            format!("kind {} infeasible for {tag} ({}): {why}", cfg.kind.name(), tag.verdict())
        };
        CliError::Infeasible(format!("{what}; feasible kinds: {list}"))
    })?;
    u_v_pair(&s, &sub.resolved.params).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub ode: Option<f64>,
    pub ode_gate: f64,
    pub pde_u: Option<f64>,
    pub pde_v: Option<f64>,
    pub pde_gate: f64,
    pub h_fd: f64,
    pub oracle_linf: Option<f64>,
    pub oracle_gate: f64,
    pub h_oracle: f64,
}

impl Residuals {
    pub fn passed(&self) -> bool {
        let ok = |r: Option<f64>, g: f64| r.map_or(true, |r| r < g);
        ok(self.ode, self.ode_gate)
            && ok(self.pde_u, self.pde_gate)
            && ok(self.pde_v, self.pde_gate)
            && ok(self.oracle_linf, self.oracle_gate)
    }
}

fn start_of(s: &ClosedFormSolution, domain: (f64, f64)) -> Result<(f64, f64, f64), CliError> {
    let at = s.xi0.clamp(domain.0, domain.1);
    let (f0, fp) = evaluate(s, at).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok((at, f0, if fp < 0.0 { -1.0 } else { 1.0 }))
}

/// Closed form against an oracle run through its own value at `ξ₀`.
pub fn oracle_distance(s: &ClosedFormSolution, p: &Params, domain: (f64, f64), n: usize, h: f64) -> Result<f64, CliError> {
    let (at, f0, sign) = start_of(s, domain)?;
    let oracle = oracle_on_domain(p, f0, sign, domain, at, h).map_err(|e| CliError::Failed(format!("oracle: {e}")))?;
    let exact = sample(s, domain, n);
    let (linf, _) = compare_profiles(&exact, &oracle).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(linf)
}

fn residuals(cfg: &JobConfig, tol: f64, s: &ClosedFormSolution, p: &Params, all: bool) -> Result<Residuals, CliError> {
    let v = cfg.verify;
    let fail = |e: kbwave::verify::VerifyError| CliError::Failed(e.to_string());
    let ode = if v.ode || all { Some(ode_residual(s, p, cfg.domain, cfg.n).map_err(fail)?) } else { None };
    let (pde_u, pde_v) = if v.pde || all {
        let (u, w) = pde_residual(s, p, cfg.domain, cfg.n, v.h_fd).map_err(fail)?;
        (Some(u), Some(w))
    } else {
        (None, None)
    };
    let oracle_linf = if v.oracle || all { Some(oracle_distance(s, p, cfg.domain, cfg.n, v.h_oracle)?) } else { None };
    Ok(Residuals {
        ode,
        ode_gate: tol * s.scale().powi(4),
        pde_u,
        pde_v,
        pde_gate: PDE_GATE,
        h_fd: v.h_fd,
        oracle_linf,
        oracle_gate: ORACLE_GATE,
        h_oracle: v.h_oracle,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Zero {
    pub value: f64,
    pub multiplicity: usize,
}

fn zeros(r: &RootMultiset) -> Vec<Zero> {
    r.entries().iter().map(|&(value, multiplicity)| Zero { value, multiplicity }).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub schema: u32,
    pub verb: &'static str,
    pub preset: Option<String>,
    pub display: Option<String>,
    pub kind: String,
    pub requested_kind: String,
    pub case_tag: String,
    pub verdict: String,
    pub zeros: Vec<Zero>,
    pub params: Params,
    pub implied_params: Params,
    pub speed: f64,
    pub branch: Branch,
    pub xi0: f64,
    pub kernel: String,
    pub form: [f64; 4],
    pub beta: f64,
    pub modulus: Option<f64>,
    pub period: Option<f64>,
    pub decay_rate: Option<f64>,
    pub global: bool,
    pub coefficients: DerivedCoefficients,
    pub domain: [f64; 2],
    pub n: usize,
    pub residuals: Residuals,
    pub gates_passed: bool,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
struct Document<'a> {
    #[serde(flatten)]
    sidecar: &'a Sidecar,
    profile: ProfileColumns<'a>,
}

#[derive(Serialize)]
struct ProfileColumns<'a> {
    xi: &'a [f64],
    f: &'a [f64],
    f_prime: Option<&'a [f64]>,
    g: Option<&'a [f64]>,
}

fn sidecar(verb: &'static str, cfg: &JobConfig, sub: &Subject, s: &ClosedFormSolution, res: Residuals) -> Sidecar {
    let tag = classify(&sub.resolved.roots);
    let gates_passed = res.passed();
    Sidecar {
        schema: 1,
        verb,
        preset: sub.preset.map(|p| p.name.to_string()),
        display: sub.preset.map(|p| p.display.to_string()),
        kind: format!("{:?}", s.kind),
        requested_kind: cfg.kind.name(),
        case_tag: tag.to_string(),
        verdict: tag.verdict().to_string(),
        zeros: zeros(&sub.resolved.roots),
        params: sub.resolved.params,
        implied_params: s.params,
        speed: s.speed,
        branch: s.branch,
        xi0: s.xi0,
        kernel: format!("{:?}", s.kernel),
        form: s.form,
        beta: s.beta,
        modulus: s.modulus.map(|k| k.value()),
        period: s.period,
        decay_rate: s.decay_rate,
        global: s.global,
        coefficients: s.coeffs.clone(),
        domain: [cfg.domain.0, cfg.domain.1],
        n: cfg.n,
        residuals: res,
        gates_passed,
        notes: s.notes.clone(),
    }
}

/// Profile and sidecar of one solution; shared by `solve` and `figures`.
fn solve_one(job: &Job) -> Result<(Profile, Sidecar), CliError> {
    let sub = subject(&job.cfg)?;
    let s = construct(&job.cfg, &sub)?;
    let res = residuals(&job.cfg, job.tol, &s, &sub.resolved.params, false)?;
    Ok((sample(&s, job.cfg.domain, job.cfg.n), sidecar("solve", &job.cfg, &sub, &s, res)))
}

fn emit_solution(cfg: &JobConfig, out: Option<&Path>, profile: &Profile, meta: &Sidecar) -> Result<Outcome, CliError> {
    let mut outcome = Outcome { passed: meta.gates_passed, ..Outcome::default() };
    let document = || {
        json(&Document {
            sidecar: meta,
            profile: ProfileColumns {
                xi: &profile.xi,
                f: &profile.f,
                f_prime: profile.f_prime.as_deref(),
                g: profile.g.as_deref(),
            },
        })
    };
    match (out, cfg.format) {
        (Some(path), crate::config::Format::Csv) => {
            let mut side = sibling(path, ".json");
            if side == path {
                side = sibling(path, ".sidecar.json");
            }
            write_atomic(path, &profile_csv(profile))?;
            write_atomic(&side, &json(meta)?)?;
            outcome.stderr = format!("wrote {} and {}\n", path.display(), side.display());
        }
        (Some(path), crate::config::Format::Json) => {
            write_atomic(path, &document()?)?;
            outcome.stderr = format!("wrote {}\n", path.display());
        }
        (None, crate::config::Format::Csv) => {
            outcome.stdout = profile_csv(profile);
            outcome.stderr = json(meta)?;
        }
        (None, crate::config::Format::Json) => outcome.stdout = document()?,
    }
    if !meta.gates_passed {
        outcome.stderr.push_str(&gate_message(&meta.residuals));
    }
    Ok(outcome)
}

fn gate_message(r: &Residuals) -> String {
    let mut s = String::new();
    let mut check = |name: &str, v: Option<f64>, g: f64| {
        if let Some(v) = v.filter(|v| !(*v < g)) {
            s.push_str(&format!("gate failed: {name} = {} >= {}\n", num(v), num(g)));
        }
    };
    check("ode residual", r.ode, r.ode_gate);
    check("pde residual (u)", r.pde_u, r.pde_gate);
    check("pde residual (v)", r.pde_v, r.pde_gate);
    check("oracle distance", r.oracle_linf, r.oracle_gate);
    s
}

pub fn run_solve(job: &Job) -> Result<Outcome, CliError> {
    let (profile, meta) = solve_one(job)?;
    emit_solution(&job.cfg, job.out.as_deref(), &profile, &meta)
}

/// Every residual and the oracle comparison, reported as JSON.
pub fn run_verify(job: &Job) -> Result<Outcome, CliError> {
    let sub = subject(&job.cfg)?;
    let s = construct(&job.cfg, &sub)?;
    let res = residuals(&job.cfg, job.tol, &s, &sub.resolved.params, true)?;
    let meta = sidecar("verify", &job.cfg, &sub, &s, res);
    let text = json(&meta)?;
    let mut outcome = Outcome { passed: meta.gates_passed, ..Outcome::default() };
    match &job.out {
        Some(path) => write_atomic(path, &text)?,
        None => outcome.stdout = text,
    }
    outcome.stderr = gate_message(&meta.residuals);
    Ok(outcome)
}

pub fn run_classify(job: &Job) -> Result<Outcome, CliError> {
    let sub = subject(&job.cfg)?;
    let r = &sub.resolved.roots;
    let tag = classify(r);
    let text = match job.cfg.format {
        crate::config::Format::Json => {
            #[derive(Serialize)]
            struct Report {
                schema: u32,
                params: Params,
                zeros: Vec<Zero>,
                case_tag: String,
                verdict: String,
                existence: kbwave::quartic::Existence,
            }
            json(&Report {
                schema: 1,
                params: sub.resolved.params,
                zeros: zeros(r),
                case_tag: tag.to_string(),
                verdict: tag.verdict().to_string(),
                existence: tag.existence(),
            })?
        }
        crate::config::Format::Csv => {
            let name = |m: usize| ["", "simple", "double", "triple", "quadruple"][m.min(4)];
            let listed: Vec<String> = r.entries().iter().map(|&(v, m)| format!("{v} ({})", name(m))).collect();
            format!(
                "params: {}\nzeros: {}\n{tag}: {}\n",
                sub.resolved.params,
                if listed.is_empty() { "none".into() } else { listed.join(", ") },
                tag.verdict()
            )
        }
    };
    let mut outcome = Outcome { passed: true, ..Outcome::default() };
    match &job.out {
        Some(path) => write_atomic(path, &text)?,
        None => outcome.stdout = text,
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct OracleMeta {
    schema: u32,
    verb: &'static str,
    params: Params,
    zeros: Vec<Zero>,
    case_tag: String,
    f0: f64,
    sign: f64,
    xi0: f64,
    h: f64,
    domain: [f64; 2],
    turning_points: Vec<f64>,
    closed_form: Option<String>,
    closed_form_linf: Option<f64>,
    gate: f64,
    passed: bool,
}

/// Oracle run over the job domain from `f0` (default: the closed form at `ξ₀`, or the
/// largest simple zero when no closed form exists), thinned to the job grid.
pub fn run_oracle(job: &Job, f0: Option<f64>, sign: Option<f64>, h: f64) -> Result<Outcome, CliError> {
    let cfg = &job.cfg;
    let sub = subject(cfg)?;
    let p = sub.resolved.params;
    let (a, b) = cfg.domain;
    if !(a <= cfg.xi0 && cfg.xi0 <= b) {
        return Err(CliError::Usage(format!("xi0 = {} lies outside the domain [{a}, {b}]", cfg.xi0)));
    }
    if !(h > 0.0) {
        return Err(CliError::Usage("h: must be positive".into()));
    }
    let closed = construct(cfg, &sub).ok();
    let (f0, sign) = match (f0, &closed) {
        (Some(f0), _) => (f0, sign.unwrap_or(1.0)),
        (None, Some(s)) => {
            let (_, f, dir) = start_of(s, (cfg.xi0, cfg.xi0))?;
            (f, sign.unwrap_or(dir))
        }
        (None, None) => {
            let e = sub.resolved.roots.entries();
            let top = e.iter().rev().find(|z| z.1 == 1).or(e.last()).ok_or_else(|| {
                let tag = classify(&sub.resolved.roots);
                CliError::Infeasible(format!("{tag}: {}; F < 0 everywhere, no start exists", tag.verdict()))
            })?;
            (top.0, sign.unwrap_or(-1.0))
        }
    };
    let step = (b - a) / (cfg.n - 1) as f64;
    let per = (step / h).ceil().max(1.0);
    let prof = oracle_on_domain(&p, f0, sign, cfg.domain, cfg.xi0, step / per)
        .map_err(|e| CliError::Infeasible(format!("oracle: {e}")))?;
    let keep: Vec<usize> = (0..prof.len())
        .filter(|&i| {
            let t = (prof.xi[i] - a) / step;
            (t - t.round()).abs() < 1e-6
        })
        .collect();
    let keep = if keep.len() >= 2 { keep } else { (0..prof.len()).collect() };
    let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let thin = Profile {
        xi: pick(&prof.xi),
        f: pick(&prof.f),
        f_prime: prof.f_prime.as_deref().map(pick),
        g: prof.g.as_deref().map(pick),
        turning_points: prof.turning_points.clone(),
    };
    let linf = match &closed {
        Some(s) if f0 == evaluate(s, cfg.xi0).map(|x| x.0).unwrap_or(f64::NAN) => {
            Some(compare_profiles(&sample(s, cfg.domain, cfg.n), &prof).map_err(|e| CliError::Failed(e.to_string()))?.0)
        }
        _ => None,
    };
    let meta = OracleMeta {
        schema: 1,
        verb: "oracle",
        params: p,
        zeros: zeros(&sub.resolved.roots),
        case_tag: classify(&sub.resolved.roots).to_string(),
        f0,
        sign,
        xi0: cfg.xi0,
        h: step / per,
        domain: [a, b],
        turning_points: prof.turning_points.clone(),
        closed_form: closed.as_ref().map(|s| format!("{:?}", s.kind)),
        closed_form_linf: linf,
        gate: ORACLE_GATE,
        passed: linf.map_or(true, |l| l < ORACLE_GATE),
    };
    let mut outcome = Outcome { passed: meta.passed, ..Outcome::default() };
    match &job.out {
        Some(path) => {
            write_atomic(path, &profile_csv(&thin))?;
            write_atomic(&sibling(path, ".json"), &json(&meta)?)?;
        }
        None => {
            outcome.stdout = profile_csv(&thin);
            outcome.stderr = json(&meta)?;
        }
    }
    if eval_f(&p, f0) < 0.0 {
        outcome.stderr.push_str("note: F(f0) < 0 within rounding; started on the zero\n");
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct EvolveSummary {
    schema: u32,
    verb: &'static str,
    preset: Option<String>,
    kind: String,
    speed: f64,
    #[serde(rename = "L")]
    length: f64,
    n: usize,
    dt: f64,
    #[serde(rename = "T")]
    t_end: f64,
    dt_bound: f64,
    linf_u: f64,
    linf_v: f64,
    mean_drift: f64,
    gate: f64,
    passed: bool,
}

pub fn run_evolve(job: &Job) -> Result<Outcome, CliError> {
    let cfg = &job.cfg;
    let sub = subject(cfg)?;
    let s = construct(cfg, &sub)?;
    let e = cfg.evolution;
    let bound = cfl_dt_max(e.length, e.n);
    let dt = e.dt.unwrap_or_else(|| default_dt(e.length, e.n, e.t_end));
    let diag = |err: EvolutionError| {
        let hint = if dt > bound { format!("; dt = {dt:e} exceeds the stable bound {bound:e}") } else { String::new() };
        CliError::Failed(format!("evolution: {err}{hint}"))
    };
    let initial = EvolutionState::from_solution(&s, e.length, e.n).map_err(diag)?;
    let perm = permanence(&s, e.length, e.n, dt, e.t_end).map_err(diag)?;
    let passed = perm.linf_u < PERMANENCE_GATE && perm.linf_v < PERMANENCE_GATE;
    let summary = EvolveSummary {
        schema: 1,
        verb: "evolve",
        preset: sub.preset.map(|p| p.name.to_string()),
        kind: format!("{:?}", s.kind),
        speed: s.speed,
        length: e.length,
        n: e.n,
        dt,
        t_end: e.t_end,
        dt_bound: bound,
        linf_u: perm.linf_u,
        linf_v: perm.linf_v,
        mean_drift: perm.mean_drift,
        gate: PERMANENCE_GATE,
        passed,
    };
    let text = json(&summary)?;
    let mut outcome = Outcome { passed, ..Outcome::default() };
    match &job.out {
        Some(path) => {
            let f = &perm.final_state;
            write_atomic(&sibling(path, "_initial.csv"), &state_csv(&initial.x, &initial.u, &initial.v))?;
            write_atomic(&sibling(path, "_final.csv"), &state_csv(&f.x, &f.u, &f.v))?;
            write_atomic(&sibling(path, ".json"), &text)?;
            outcome.stdout = format!("permanence error: u {} v {}\n", num(perm.linf_u), num(perm.linf_v));
        }
        None => outcome.stdout = text,
    }
    if !passed {
        outcome.stderr = format!("gate failed: permanence error >= {}\n", num(PERMANENCE_GATE));
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct Term {
    f_power: u32,
    c_power: u32,
    coefficient: String,
}

#[derive(Serialize)]
struct Poly {
    display: String,
    terms: Vec<Term>,
}

impl From<&FPoly> for Poly {
    fn from(p: &FPoly) -> Poly {
        Poly {
            display: p.to_string(),
            terms: p
                .terms()
                .map(|(&(i, j), q)| Term { f_power: i, c_power: j, coefficient: q.to_string() })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct ReduceReport {
    schema: u32,
    verb: &'static str,
    ell: u32,
    fields: Vec<Poly>,
    closing: Poly,
    p_final: Poly,
    conjecture: Vec<ConjectureRow>,
}

/// Exact field stack for `ell` and the conjecture rows for `2..=ell`.
pub fn run_reduce(ell: u32, out: Option<&Path>) -> Result<Outcome, CliError> {
    let stack = reduce_vanishing(ell).map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = conjecture_report(ell).map_err(|e| CliError::Failed(e.to_string()))?.rows;
    let report = ReduceReport {
        schema: 1,
        verb: "reduce",
        ell,
        fields: stack.fields.iter().map(Poly::from).collect(),
        closing: Poly::from(&stack.closing),
        p_final: Poly::from(&stack.p_final),
        conjecture: rows,
    };
    let text = json(&report)?;
    let mut outcome = Outcome { passed: true, ..Outcome::default() };
    match out {
        Some(path) => write_atomic(path, &text)?,
        None => outcome.stdout = text,
    }
    Ok(outcome)
}

/// Every preset (or the one named in the job) into `dir` as `<preset>.csv` + `<preset>.json`.
pub fn run_figures(job: &Job, dir: &Path) -> Result<Outcome, CliError> {
    let selected: Vec<Preset> = match &job.cfg.preset {
        Some(name) => vec![presets::find(name).ok_or_else(|| {
            CliError::Usage(format!("unknown preset {name:?}; known presets: {}", presets::names().join(", ")))
        })?],
        None => presets::all(),
    };
    let mut outcome = Outcome { passed: true, ..Outcome::default() };
    for p in selected {
        let mut cfg = job.cfg.clone();
        cfg.preset = Some(p.name.to_string());
        cfg.format = crate::config::Format::Csv;
        let one = Job { cfg, out: None, tol: job.tol };
        let (profile, meta) = solve_one(&one)?;
        let path = dir.join(format!("{}.csv", p.name));
        emit_solution(&one.cfg, Some(&path), &profile, &meta)?;
        let ode = meta.residuals.ode.map_or("-".to_string(), num);
        let status = if meta.gates_passed { "ok" } else { "FAILED" };
        outcome.stdout.push_str(&format!("{}: {status} (ode residual {ode})\n", p.name));
        outcome.passed &= meta.gates_passed;
        if !meta.gates_passed {
            outcome.stderr.push_str(&format!("{}: {}", p.name, gate_message(&meta.residuals)));
        }
    }
    Ok(outcome)
}
