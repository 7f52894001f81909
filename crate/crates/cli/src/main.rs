//! `quadagg`: certificates, reproductions and point clouds from the shell.
//!
//! Exit status: 0 success, 1 input error, 2 inconclusive or no certificate,
//! 3 query inside the sampled hull.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quadagg::catalog::{self, ReproduceConfig, INSTANCE_IDS};
use quadagg::certsearch::{self, ExclusionOutcome, PdlcOutcome};
use quadagg::format::{self, Certificate};
use quadagg::hull::{
    self, HyperplaneOutcome, Membership, SampleBox, SampledHull, SeparationOutcome,
};
use quadagg::{Error, QuadSystem, Sense, Weights};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_INSIDE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "quadagg",
    version,
    about = "Aggregation certificates for sets cut out by quadratic inequalities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a built-in instance as an instance file.
    Instance {
        /// Built-in id
        id: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Search for a PDLC witness or a dual witness.
    Pdlc {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Separate a point from the convex hull by an aggregation.
    Separate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Look for an aggregation excluding `--point` while keeping `--keep`.
    Exclude {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        keep: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Re-run the scripted checks of a built-in instance, or `all`.
    Reproduce {
        id: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Export sampled point clouds of the set and of chosen aggregations.
    PlotData {
        #[arg(long)]
        instance: PathBuf,
        /// Aggregation weights, repeatable
        #[arg(long, allow_hyphen_values = true)]
        lambda: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Clone, Debug)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rejection-sampling proposals
    #[arg(long, default_value_t = hull::DEFAULT_PROPOSALS)]
    samples: usize,
    /// Sampling cube as `lo,hi`
    #[arg(long = "box", allow_hyphen_values = true)]
    bounds: Option<String>,
    /// Grid resolution; defaults to 64 for PDLC and 256 for simplex searches
    #[arg(long)]
    grid: Option<usize>,
    /// Membership margin
    #[arg(long, default_value_t = quadagg::quadcore::DEFAULT_MARGIN)]
    tol: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Validated run configuration.
struct RunConfig {
    seed: u64,
    samples: usize,
    lo: f64,
    hi: f64,
    grid: Option<usize>,
    tol: f64,
    out: PathBuf,
}

/// Comma-separated finite floats.
fn parse_floats(flag: &str, s: &str) -> Result<Vec<f64>, Fail> {
    let v = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| input(format!("{flag} `{t}`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(input(format!("{flag}: non-finite value")));
    }
    Ok(v)
}

/// Failure carrying an exit status.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Argument(_) | Error::Format(_) | Error::UnknownInstance(_) | Error::Io(_) => {
                EXIT_INPUT
            }
            Error::Numerical(_) | Error::Pipeline { .. } | Error::EmptyInterior => {
                EXIT_INCONCLUSIVE
            }
        };
        Fail(code, e.to_string())
    }
}

fn input(msg: impl Into<String>) -> Fail {
    Fail(EXIT_INPUT, msg.into())
}

impl RunArgs {
    fn validate(&self) -> Result<RunConfig, Fail> {
        if self.samples == 0 {
            return Err(input("--samples must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(input("--tol must be positive"));
        }
        if self.grid == Some(0) {
            return Err(input("--grid must be at least 1"));
        }
        let bounds = self
            .bounds
            .as_deref()
            .map(|b| parse_floats("--box", b))
            .transpose()?;
        let (lo, hi) = match bounds.as_deref() {
            None => (-3.0, 3.0),
            Some([lo, hi]) if lo < hi => (*lo, *hi),
            Some(_) => return Err(input("--box takes `lo,hi` with lo < hi")),
        };
        Ok(RunConfig {
            seed: self.seed,
            samples: self.samples,
            lo,
            hi,
            grid: self.grid,
            tol: self.tol,
            out: self.out.clone(),
        })
    }
}

impl RunConfig {
    fn sample_box(&self, n: usize) -> Result<SampleBox, Fail> {
        Ok(SampleBox::cube(n, self.lo, self.hi)?)
    }

    fn file(&self, name: &str) -> Result<PathBuf, Fail> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| input(format!("{}: {e}", self.out.display())))?;
        Ok(self.out.join(name))
    }
}

fn load(path: &Path) -> Result<QuadSystem, Fail> {
    format::read_instance(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn emit(cfg: &RunConfig, name: &str, cert: &Certificate) -> Result<(), Fail> {
    let path = cfg.file(name)?;
    format::write_certificate(&path, cert)?;
    println!("wrote {} certificate to {}", cert.kind(), path.display());
    Ok(())
}

fn cmd_instance(id: &str, out: &Path) -> Result<u8, Fail> {
    let inst = catalog::load_instance(id)?;
    std::fs::create_dir_all(out).map_err(|e| input(format!("{}: {e}", out.display())))?;
    let path = out.join(format!("{id}.json"));
    format::write_instance(&path, &inst.system)?;
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

fn cmd_pdlc(path: &Path, cfg: &RunConfig) -> Result<u8, Fail> {
    let sys = load(path)?;
    sys.require_three()?;
    let grid = cfg.grid.unwrap_or(certsearch::DEFAULT_PDLC_GRID);
    let ms = sys.homogenized();
    match certsearch::check_pdlc(&ms, grid)? {
        PdlcOutcome::Witness(w) => {
            println!("PDLC holds: margin {:e}", w.margin);
            emit(cfg, "pdlc.json", &Certificate::from(&w))?;
            Ok(EXIT_OK)
        }
        PdlcOutcome::Dual(d) => {
            println!("PDLC fails: dual witness with trace {:e}", d.trace);
            emit(cfg, "pdlc.json", &Certificate::from(&d))?;
            Ok(EXIT_OK)
        }
        PdlcOutcome::Inconclusive {
            best_theta,
            best_value,
        } => {
            let detail = format!(
                "no witness at grid {grid}; best lambda_min {best_value:e} at theta {best_theta:?}"
            );
            println!("{detail}");
            emit(cfg, "pdlc.json", &Certificate::Inconclusive { detail })?;
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

fn check_dim(sys: &QuadSystem, v: &[f64], flag: &str) -> Result<(), Fail> {
    if v.len() != sys.n() {
        return Err(input(format!(
            "{flag} has {} coordinates but the instance has n = {}",
            v.len(),
            sys.n()
        )));
    }
    Ok(())
}

fn sample_for(sys: &QuadSystem, cfg: &RunConfig) -> Result<SampledHull, Fail> {
    let bx = cfg.sample_box(sys.n())?;
    Ok(match sys.sense() {
        Sense::Strict => hull::sample_set_with_margin(sys, &bx, cfg.samples, cfg.seed, cfg.tol)?,
        Sense::Nonstrict => hull::sample_interior(sys, &bx, cfg.samples, cfg.seed)?,
    })
}

fn cmd_separate(path: &Path, point: &[f64], cfg: &RunConfig) -> Result<u8, Fail> {
    let sys = load(path)?;
    sys.require_three()?;
    check_dim(&sys, point, "--point")?;
    let hull = sample_for(&sys, cfg)?;
    if hull.is_empty() {
        if sys.sense() == Sense::Nonstrict {
            return Err(Error::EmptyInterior.into());
        }
        return Err(Fail(
            EXIT_INCONCLUSIVE,
            "no sampled point of the set; enlarge --box or --samples".into(),
        ));
    }
    println!("{} sampled points", hull.len());
    if let Membership::Inside { weights } = hull::hull_membership(&hull, point)? {
        println!(
            "point is a convex combination of {} sampled points",
            weights.len()
        );
        return Ok(EXIT_INSIDE);
    }
    let (alpha, beta) = match hull::best_separating_hyperplane(&hull, point)? {
        HyperplaneOutcome::QueryInside => {
            println!("point is not separated from the sampled points");
            return Ok(EXIT_INSIDE);
        }
        HyperplaneOutcome::Separating { alpha, beta, .. } => (alpha, beta),
    };
    let grid = cfg.grid.unwrap_or(certsearch::DEFAULT_SIMPLEX_GRID);
    let res = match sys.sense() {
        Sense::Strict => hull::separate(&sys, point, &alpha, beta, &hull, grid)?,
        Sense::Nonstrict => hull::closed_separate(&sys, point, &alpha, beta, &hull, grid)?,
    };
    match res {
        SeparationOutcome::Certificate(c) => {
            println!("separated by lambda {:?}", c.lambda.values());
            emit(cfg, "separation.json", &Certificate::from(&c))?;
            Ok(EXIT_OK)
        }
        SeparationOutcome::NoAggregation { detail } => {
            println!("{detail}");
            emit(
                cfg,
                "separation.json",
                &Certificate::Inconclusive { detail },
            )?;
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

fn cmd_exclude(path: &Path, point: &[f64], keep: &[f64], cfg: &RunConfig) -> Result<u8, Fail> {
    let sys = load(path)?;
    check_dim(&sys, point, "--point")?;
    check_dim(&sys, keep, "--keep")?;
    match certsearch::find_excluding_aggregation(&sys, keep, point)? {
        ExclusionOutcome::Aggregation(w) => {
            println!("excluded by lambda {:?}", w.values());
            emit(
                cfg,
                "exclusion.json",
                &Certificate::Exclusion {
                    lambda: w.values().to_vec(),
                },
            )?;
            Ok(EXIT_OK)
        }
        ExclusionOutcome::Infeasible(f) => {
            println!("no aggregation keeps one point and excludes the other");
            emit(cfg, "exclusion.json", &Certificate::from(&f))?;
            Ok(EXIT_INCONCLUSIVE)
        }
    }
}

fn cmd_reproduce(id: &str, cfg: &RunConfig) -> Result<u8, Fail> {
    let ids: Vec<&str> = if id == "all" {
        INSTANCE_IDS.to_vec()
    } else {
        vec![id]
    };
    let rc = ReproduceConfig {
        seed: cfg.seed,
        samples: cfg.samples,
        pdlc_grid: cfg.grid.unwrap_or(certsearch::DEFAULT_PDLC_GRID),
        simplex_grid: cfg.grid.unwrap_or(certsearch::DEFAULT_SIMPLEX_GRID),
    };
    let mut reports = Vec::new();
    for id in ids {
        let rep = catalog::reproduce(id, &rc)?;
        print!("{}", rep.summary());
        reports.push(rep);
    }
    let path = cfg.file(&format!("report-{id}.json"))?;
    format::write_atomic(&path, format::to_string(&reports)?.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(if reports.iter().all(|r| r.passed()) {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    })
}

fn cmd_plot_data(path: &Path, lambdas: &[Vec<f64>], cfg: &RunConfig) -> Result<u8, Fail> {
    let sys = load(path)?;
    if sys.n() > 3 {
        return Err(input(format!("plot data needs n <= 3, got {}", sys.n())));
    }
    let bx = cfg.sample_box(sys.n())?;
    let set = hull::sample_set_with_margin(&sys, &bx, cfg.samples, cfg.seed, cfg.tol)?;
    let p = cfg.file("set.txt")?;
    format::write_points(&p, set.points())?;
    println!("wrote {} points to {}", set.len(), p.display());
    for (k, l) in lambdas.iter().enumerate() {
        if l.len() != sys.m() {
            return Err(input(format!("--lambda needs {} weights", sys.m())));
        }
        let w = Weights::nonnegative(l.clone())?;
        let agg = QuadSystem::new(vec![quadagg::quadcore::aggregate(&sys, &w)?])?;
        let cloud = hull::sample_set_with_margin(&agg, &bx, cfg.samples, cfg.seed, cfg.tol)?;
        let p = cfg.file(&format!("aggregation-{k}.txt"))?;
        format::write_points(&p, cloud.points())?;
        println!("wrote {} points to {}", cloud.len(), p.display());
    }
    Ok(EXIT_OK)
}

fn run(cli: Cli) -> Result<u8, Fail> {
    match cli.command {
        Command::Instance { id, out } => cmd_instance(&id, &out),
        Command::Pdlc { instance, run } => cmd_pdlc(&instance, &run.validate()?),
        Command::Separate {
            instance,
            point,
            run,
        } => {
            let cfg = run.validate()?;
            cmd_separate(&instance, &parse_floats("--point", &point)?, &cfg)
        }
        Command::Exclude {
            instance,
            point,
            keep,
            run,
        } => {
            let cfg = run.validate()?;
            cmd_exclude(
                &instance,
                &parse_floats("--point", &point)?,
                &parse_floats("--keep", &keep)?,
                &cfg,
            )
        }
        Command::Reproduce { id, run } => cmd_reproduce(&id, &run.validate()?),
        Command::PlotData {
            instance,
            lambda,
            run,
        } => {
            let cfg = run.validate()?;
            let lambdas = lambda
                .iter()
                .map(|l| parse_floats("--lambda", l))
                .collect::<Result<Vec<_>, _>>()?;
            cmd_plot_data(&instance, &lambdas, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
