use clap::{Args, Parser, Subcommand};
use kbwave_cli::config::{gate_tolerance, parse_list, parse_real, BranchName, Format, JobConfig, KindName};
use kbwave_cli::jobs::{self, Job, Outcome};
use kbwave_cli::CliError;
use kbwave::quartic::Params;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Traveling waves of the l=2 KB system: classify, construct, verify, evolve and reduce.
#[derive(Parser)]
#[command(name = "kbwave", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Zeros of F with multiplicities, the case tag and the existence verdict.
    Classify(JobArgs),
    /// Closed-form profile as CSV (xi,f,f_prime,g) plus a JSON sidecar.
    Solve(JobArgs),
    /// ODE and PDE residuals and the oracle comparison of the closed form.
    Verify(JobArgs),
    /// RK4 integration of f'' = F'(f)/2 from a start value.
    Oracle {
        #[command(flatten)]
        job: JobArgs,
        /// Start value f(xi0); defaults to the closed form at xi0.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_real)]
        f0: Option<f64>,
        /// Initial direction of motion, +1 or -1.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_real)]
        sign: Option<f64>,
        /// Largest step; refined so the output grid is hit exactly.
        #[arg(long, default_value = "1e-4", value_parser = parse_real)]
        h: f64,
    },
    /// Spectral evolution of the traveling pair and its permanence error.
    Evolve {
        #[command(flatten)]
        job: JobArgs,
        /// Periodic domain length (accepts e.g. 40pi).
        #[arg(long, value_parser = parse_real)]
        length: Option<f64>,
        /// Grid size, a power of two.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_parser = parse_real)]
        dt: Option<f64>,
        #[arg(long, value_parser = parse_real)]
        t_end: Option<f64>,
    },
    /// Exact vanishing-boundary reduction for one ell, with the conjecture rows up to it.
    Reduce {
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Profiles of every figure preset (or --preset) into the --out directory.
    Figures(JobArgs),
}

#[derive(Args, Clone, Default)]
struct JobArgs {
    /// JSON job configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// c,d1,d2,d3 (fractions such as -7/4 are accepted).
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    /// r1,r2,r3,r4; repeat a value for a multiple zero.
    #[arg(long, allow_hyphen_values = true)]
    roots: Option<String>,
    #[arg(long, value_enum)]
    kind: Option<KindName>,
    /// a,b
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// Sample count.
    #[arg(long = "n")]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real)]
    xi0: Option<f64>,
    #[arg(long, value_enum)]
    branch: Option<BranchName>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl JobArgs {
    fn job(&self) -> Result<Job, CliError> {
        let mut cfg = match &self.config {
            Some(path) => JobConfig::load(path)?,
            None => JobConfig::default(),
        };
        let usage = CliError::Usage;
        if let Some(p) = &self.preset {
            cfg.preset = Some(p.clone());
        }
        if let Some(s) = &self.params {
            let v = parse_list(s, 4, "--params").map_err(usage)?;
            cfg.params = Some(Params::new(v[0], v[1], v[2], v[3]));
        }
        if let Some(s) = &self.roots {
            cfg.roots = Some(parse_list(s, 4, "--roots").map_err(usage)?);
        }
        if let Some(k) = self.kind {
            cfg.kind = k;
        }
        if let Some(s) = &self.domain {
            let v = parse_list(s, 2, "--domain").map_err(usage)?;
            cfg.domain = (v[0], v[1]);
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(x) = self.xi0 {
            cfg.xi0 = x;
        }
        if let Some(b) = self.branch {
            cfg.branch = b;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        Ok(Job { cfg, out: self.out.clone(), tol: gate_tolerance()? })
    }
}

fn run(verb: Verb) -> Result<Outcome, CliError> {
    let checked = |args: &JobArgs| -> Result<Job, CliError> {
        let job = args.job()?;
        job.cfg.validate()?;
        Ok(job)
    };
    match verb {
        Verb::Classify(args) => jobs::run_classify(&checked(&args)?),
        Verb::Solve(args) => jobs::run_solve(&checked(&args)?),
        Verb::Verify(args) => jobs::run_verify(&checked(&args)?),
        Verb::Reduce { ell, out } => jobs::run_reduce(ell, out.as_deref()),
        Verb::Figures(args) => {
            let mut job = args.job()?;
            let dir = job.out.take().unwrap_or_else(|| PathBuf::from("figures"));
            // presets supply the quartic; only the sampling flags matter here
            let mut probe = job.cfg.clone();
            probe.preset.get_or_insert_with(|| "fig-case1a".into());
            probe.validate()?;
            jobs::run_figures(&job, &dir)
        }
        Verb::Oracle { job, f0, sign, h } => jobs::run_oracle(&checked(&job)?, f0, sign, h),
        Verb::Evolve { job, length, grid, dt, t_end } => {
            let mut job = job.job()?;
            let e = &mut job.cfg.evolution;
            e.length = length.unwrap_or(e.length);
            e.n = grid.unwrap_or(e.n);
            e.dt = dt.or(e.dt);
            e.t_end = t_end.unwrap_or(e.t_end);
            job.cfg.validate()?;
            jobs::run_evolve(&job)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.verb) {
        Ok(o) => {
            // a closed downstream pipe is not an error of the job
            let _ = std::io::stdout().lock().write_all(o.stdout.as_bytes());
            let _ = std::io::stdout().flush();
            eprint!("{}", o.stderr);
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
