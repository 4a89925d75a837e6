//! Job configuration: JSON file ingestion, command-line overrides and validation.

use crate::CliError;
use kbwave::quartic::{params_from_values, roots_of_f, Params, RootMultiset, DEFAULT_CLUSTER_TOL};
use kbwave::solutions::Branch;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Residual gate used when `KBWAVE_TOL` is unset.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KindName {
    #[default]
    Auto,
    SolitaryDouble,
    PeriodicTrig,
    SolitaryTriple,
    LimitA,
    LimitB,
    LimitC,
    LimitD,
    Case1Cn,
    Case1Dn,
    Case2Sn,
    Case2Cn,
    Case2Dn,
    Case2InvSn,
    Case2InvCn,
    Case2Tn,
    Case2DnTn,
    GeneralSn2,
    Constant,
}

impl KindName {
    pub const CONCRETE: [KindName; 18] = [
        KindName::SolitaryDouble,
        KindName::PeriodicTrig,
        KindName::SolitaryTriple,
        KindName::LimitA,
        KindName::LimitB,
        KindName::LimitC,
        KindName::LimitD,
        KindName::Case1Cn,
        KindName::Case1Dn,
        KindName::Case2Sn,
        KindName::Case2Cn,
        KindName::Case2Dn,
        KindName::Case2InvSn,
        KindName::Case2InvCn,
        KindName::Case2Tn,
        KindName::Case2DnTn,
        KindName::GeneralSn2,
        KindName::Constant,
    ];

    pub fn name(self) -> String {
        use clap::ValueEnum;
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BranchName {
    #[default]
    Upper,
    Lower,
}

impl From<BranchName> for Branch {
    fn from(b: BranchName) -> Branch {
        match b {
            BranchName::Upper => Branch::Upper,
            BranchName::Lower => Branch::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyToggles {
    pub ode: bool,
    pub pde: bool,
    pub oracle: bool,
    /// Finite-difference step of the PDE residual.
    pub h_fd: f64,
    /// Oracle step.
    pub h_oracle: f64,
}

impl Default for VerifyToggles {
    fn default() -> Self {
        VerifyToggles {
            ode: true,
            pde: false,
            oracle: false,
            h_fd: 1e-3,
            h_oracle: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSettings {
    #[serde(rename = "L")]
    pub length: f64,
    pub n: usize,
    /// `None` picks the largest stable step that divides `T`.
    pub dt: Option<f64>,
    #[serde(rename = "T")]
    pub t_end: f64,
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        EvolutionSettings {
            length: 40.0 * PI,
            n: 1024,
            dt: None,
            t_end: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct JobConfig {
    pub preset: Option<String>,
    pub params: Option<Params>,
    pub roots: Option<Vec<f64>>,
    pub kind: KindName,
    pub domain: (f64, f64),
    pub n: usize,
    pub xi0: f64,
    pub branch: BranchName,
    pub format: Format,
    pub verify: VerifyToggles,
    pub evolution: EvolutionSettings,
}

impl Default for JobConfig {
    fn default() -> Self {
        JobConfig {
            preset: None,
            params: None,
            roots: None,
            kind: KindName::Auto,
            domain: (-10.0, 10.0),
            n: 2001,
            xi0: 0.0,
            branch: BranchName::Upper,
            format: Format::Csv,
            verify: VerifyToggles::default(),
            evolution: EvolutionSettings::default(),
        }
    }
}

/// Zeros and parameters of one job after reconciliation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: Params,
    pub roots: RootMultiset,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        // serde_json reports line and column together with the offending field
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.preset.is_none() && self.params.is_none() && self.roots.is_none() {
            return usage("one of params, roots or preset is required".into());
        }
        if self.n < 2 {
            return usage(format!("n: sample count must be at least 2, got {}", self.n));
        }
        let (a, b) = self.domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return usage(format!("domain: need finite a < b, got [{a}, {b}]"));
        }
        if !self.xi0.is_finite() {
            return usage("xi0: must be finite".into());
        }
        if let Some(r) = &self.roots {
            if r.len() != 4 {
                return usage(format!("roots: expected 4 values (repeat a value for multiplicity), got {}", r.len()));
            }
            if r.iter().any(|x| !x.is_finite()) {
                return usage("roots: values must be finite".into());
            }
        }
        if let Some(p) = &self.params {
            if !p.is_finite() {
                return usage("params: values must be finite".into());
            }
        }
        let v = &self.verify;
        if !(v.h_fd > 0.0 && v.h_oracle > 0.0) {
            return usage("verify: steps must be positive".into());
        }
        let e = &self.evolution;
        if !(e.length > 0.0 && e.t_end >= 0.0 && e.dt.map_or(true, |d| d > 0.0)) {
            return usage("evolution: need L > 0, T >= 0 and dt > 0".into());
        }
        if e.n < 2 || !e.n.is_power_of_two() {
            return usage(format!("evolution.n: grid size must be a power of two, got {}", e.n));
        }
        Ok(())
    }

    /// Zeros and parameters from whichever of `params`/`roots` is given. When both are
    /// present they must describe the same quartic.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        match (&self.params, &self.roots) {
            (None, None) => Err(CliError::Usage("one of params or roots is required".into())),
            (Some(p), None) => Ok(Resolved {
                params: *p,
                roots: roots_of_f(p, DEFAULT_CLUSTER_TOL),
            }),
            (params, Some(r)) => {
                let v = [r[0], r[1], r[2], r[3]];
                let implied = params_from_values(&v);
                let roots = RootMultiset::from_values(&v, DEFAULT_CLUSTER_TOL)
                    .map_err(|e| CliError::Usage(format!("roots: {e}")))?;
                if let Some(p) = params {
                    check_agreement(p, &implied, &v)?;
                }
                Ok(Resolved { params: implied, roots })
            }
        }
    }
}

/// Rejects `given` unless it matches the parameters implied by `roots`.
pub fn check_agreement(given: &Params, implied: &Params, roots: &[f64; 4]) -> Result<(), CliError> {
    let size = [given.c, given.d1, given.d2, given.d3]
        .iter()
        .chain([implied.c, implied.d1, implied.d2, implied.d3].iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let diff = given.max_abs_diff(implied);
    if diff > 1e-9 * size {
        let found = roots_of_f(given, DEFAULT_CLUSTER_TOL);
        return Err(CliError::Usage(format!(
            "roots {roots:?} do not match params {given}: the roots imply {implied} (max difference {diff:e}); \
             the params have zeros {found}. Keep one of the two, or pass params {},{},{},{}",
            implied.c, implied.d1, implied.d2, implied.d3
        )));
    }
    Ok(())
}

/// Residual gate from `KBWAVE_TOL`, defaulting to `DEFAULT_TOL`.
pub fn gate_tolerance() -> Result<f64, CliError> {
    match std::env::var("KBWAVE_TOL") {
        Err(_) => Ok(DEFAULT_TOL),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
            _ => Err(CliError::Usage(format!("KBWAVE_TOL: expected a positive number, got {s:?}"))),
        },
    }
}

/// A real written as a decimal, a fraction `p/q`, or either followed by `pi`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let num = |t: &str| {
        let t = t.trim();
        match t.strip_suffix("pi") {
            Some("") => Ok(PI),
            Some("-") => Ok(-PI),
            Some(m) => m.trim().parse::<f64>().map(|x| x * PI),
            None => t.parse::<f64>(),
        }
        .map_err(|_| format!("not a number: {t:?}"))
    };
    let x = match s.split_once('/') {
        Some((p, q)) => num(p)? / num(q)?,
        None => num(s)?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

pub fn parse_list(s: &str, len: usize, what: &str) -> Result<Vec<f64>, String> {
    let v = s.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?;
    if v.len() != len {
        return Err(format!("{what}: expected {len} comma-separated values, got {}", v.len()));
    }
    Ok(v)
}
