use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use jgap::certificate::{
    adversarial_facet_audit, counting_sweep, facet_lower_bound, verify_with_table, PairingTable, HYPOTHESIS_TOL,
};
use jgap::designs::{max_pairwise_intersection, tail::TailReport, tail_bound_check};
use jgap::frame::{john_check, SimplexFrame};
use jgap::hard_body::{
    build_instance_with, derive_params, BodyFile, HardBodyParams, DEFAULT_MAX_ATTEMPTS, DEFAULT_M_MAX,
};
use jgap::net::{approximate, lipschitz_audit, random_sandwiched_body, NetStrategy, PolytopeOracle};
use jgap::rng::stream;
use jgap::{Error, HPolytope};

const EXIT_USAGE: u8 = 1;
const EXIT_INVARIANT: u8 = 2;
const EXIT_CONSTRUCTION: u8 = 3;
const EXIT_REGIME: u8 = 4;

#[derive(Parser)]
#[command(name = "jgap", version, about = "Build and certify convex bodies that are hard to approximate by polytopes")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SeedArg {
    #[arg(long, env = "JGAP_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check the contact frame of the regular simplex.
    Simplex {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        /// Also write the report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Build the hard body and write it as JSON.
    Construct {
        #[arg(long)]
        n: usize,
        /// Subset size; alternatively give --R.
        #[arg(long, conflicts_with = "r", required_unless_present = "r")]
        k: Option<usize>,
        /// Target ratio; k and m are derived from it.
        #[arg(long = "R", id = "r")]
        r: Option<f64>,
        /// Family size (required with --k).
        #[arg(long, required_unless_present = "r")]
        m: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_M_MAX)]
        m_max: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ATTEMPTS)]
        max_attempts: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value = "body.json")]
        out: PathBuf,
    },
    /// Verify the certificate carried by a body file.
    Certify {
        body: PathBuf,
        #[arg(long, default_value_t = 0)]
        counting_trials: usize,
        #[arg(long, default_value_t = HYPOTHESIS_TOL)]
        tol: f64,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compare the exact overlap tail with (2k/n)^(k/5) and print CSV.
    Tail {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u64>,
    },
    /// Approximate a random body by support values on a net.
    Approx {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[arg(long = "R")]
        r: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// Read the body from an H-polytope JSON file instead.
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        lipschitz_trials: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Test a candidate polytope P against the certified facet bound.
    Audit {
        body: PathBuf,
        /// Candidate as H-polytope JSON with unit offsets.
        #[arg(long, conflicts_with = "drop_facet")]
        candidate: Option<PathBuf>,
        /// Use the body with this row removed as the candidate.
        #[arg(long)]
        drop_facet: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Grid,
    Random,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::FamilyNotFound { .. } | Error::DegenerateK { .. } => EXIT_CONSTRUCTION,
            Error::OutOfRegime(_) => EXIT_REGIME,
            Error::BadRange(_) | Error::DimensionTooSmall { .. } | Error::StrategyUnavailable { .. } => EXIT_USAGE,
            _ => EXIT_INVARIANT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_USAGE, e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let res = match cli.command {
        Command::Simplex { n, json } => cmd_simplex(n as usize, json.as_deref()),
        Command::Construct { n, k, r, m, m_max, max_attempts, seed, out } => {
            cmd_construct(n, k, r, m, m_max, max_attempts, seed.seed, &out)
        }
        Command::Certify { body, counting_trials, tol, seed, json } => {
            cmd_certify(&body, counting_trials, tol, seed.seed, json.as_deref())
        }
        Command::Tail { n, k } => cmd_tail(&n, &k),
        Command::Approx { n, r, delta, strategy, body, lipschitz_trials, seed, json } => {
            cmd_approx(n as usize, r, delta, strategy, body.as_deref(), lipschitz_trials, seed.seed, json.as_deref())
        }
        Command::Audit { body, candidate, drop_facet, json } => {
            cmd_audit(&body, candidate.as_deref(), drop_facet, json.as_deref())
        }
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit<T: Serialize>(report: &T, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Failure::new(EXIT_INVARIANT, e.to_string()))?;
    println!("{text}");
    if let Some(p) = path {
        std::fs::write(p, format!("{text}\n"))?;
    }
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let f = File::open(path).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    serde_json::from_reader(std::io::BufReader::new(f))
        .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn cmd_simplex(n: usize, json: Option<&Path>) -> CmdResult {
    let frame = SimplexFrame::build(n)?;
    let (norm_err, offdiag_err) = frame.gram_errors();
    let centroid = frame.centroid_error();
    let john = john_check(frame.contacts(), frame.weights())?;
    let pass = norm_err <= 1e-10 && offdiag_err <= 1e-10 && centroid <= 1e-9 && john.identity_error <= 1e-8;
    emit(
        &json!({
            "n": n,
            "contacts": n + 1,
            "weight": frame.weights()[0],
            "gram_norm_error": norm_err,
            "gram_offdiag_error": offdiag_err,
            "centroid_error": centroid,
            "identity_error": john.identity_error,
            "barycenter_error": john.barycenter_error,
            "pass": pass,
        }),
        json,
    )?;
    Ok(if pass { 0 } else { EXIT_INVARIANT })
}

#[allow(clippy::too_many_arguments)]
fn cmd_construct(
    n: usize,
    k: Option<usize>,
    r: Option<f64>,
    m: Option<usize>,
    m_max: u64,
    max_attempts: usize,
    seed: u64,
    out: &Path,
) -> CmdResult {
    let mut params = match (k, r) {
        (Some(k), _) => {
            let m = m.ok_or_else(|| Failure::new(EXIT_USAGE, "--m is required with --k"))?;
            HardBodyParams::from_nk(n, k, m, seed)?
        }
        (None, Some(r)) => derive_params(n, r, m_max, seed)?,
        (None, None) => return Err(Failure::new(EXIT_USAGE, "give --k and --m, or --R")),
    };
    if let (Some(m), None) = (m, k) {
        params.m = m.min(params.m);
    }
    if params.m == 0 {
        return Err(Failure::new(EXIT_CONSTRUCTION, "derived family size is zero"));
    }
    let inst = build_instance_with(&params, max_attempts).map_err(|e| {
        let mut f = Failure::from(e);
        if f.code == EXIT_CONSTRUCTION {
            f.message.push_str("; retry with a larger n/k ratio, a smaller m or another seed");
        }
        f
    })?;
    let file = BodyFile::from_instance(&inst);
    file.write_to(File::create(out)?)?;
    emit(
        &json!({
            "out": out.display().to_string(),
            "n": params.n,
            "k": params.k,
            "m": params.m,
            "R": params.r,
            "rows": inst.body.num_facets(),
            "max_overlap": max_pairwise_intersection(&inst.subsets),
            "admissibility": params.admissibility,
        }),
        None,
    )?;
    Ok(0)
}

fn cmd_certify(body: &Path, trials: usize, tol: f64, seed: u64, json: Option<&Path>) -> CmdResult {
    let file: BodyFile = read_json(body)?;
    let cert = file.certificate()?;
    let table = PairingTable::new(&cert)?;
    let rep = verify_with_table(&cert, &table, &file.polytope, tol)?;
    let sweep = if trials > 0 && rep.pass { Some(counting_sweep(&cert, &table, trials, seed)?) } else { None };
    let violations = sweep.map_or(0, |s| s.violations);
    let pass = rep.pass && violations == 0;
    for v in &rep.violations {
        eprintln!(
            "failed: {} family at witness {}{} (value {:e})",
            v.family,
            v.i,
            v.j.map(|j| format!(", index {j}")).unwrap_or_default(),
            v.value
        );
    }
    emit(
        &json!({
            "pass": pass,
            "families": {
                "diagonal": rep.families.diagonal,
                "cross": finite_or_null(rep.families.cross),
                "polar": rep.families.polar,
                "membership": rep.families.membership,
                "boundary": rep.families.boundary,
            },
            "violations": rep.violations,
            "m": rep.m,
            "R": rep.r,
            "threshold": rep.threshold,
            "facet_lower_bound": facet_lower_bound(&rep).ok(),
            "counting_trials": sweep.map_or(0, |s| s.trials),
            "counting_violations": violations,
            "counting_max_o_size": sweep.map(|s| s.max_o_size),
        }),
        json,
    )?;
    Ok(if pass { 0 } else { EXIT_INVARIANT })
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn cmd_tail(ns: &[u64], ks: &[u64]) -> CmdResult {
    let mut code = 0;
    println!("{}", TailReport::CSV_HEADER);
    for &n in ns {
        for &k in ks {
            match tail_bound_check(n, k) {
                Ok(rep) => {
                    println!("{}", rep.csv_row());
                    if !rep.satisfied {
                        code = EXIT_INVARIANT;
                    }
                }
                Err(Error::OutOfRegime(msg)) => {
                    eprintln!("out of regime: {msg}");
                    if code == 0 {
                        code = EXIT_REGIME;
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_approx(
    n: usize,
    r: f64,
    delta: f64,
    strategy: Option<StrategyArg>,
    body: Option<&Path>,
    lipschitz_trials: usize,
    seed: u64,
    json: Option<&Path>,
) -> CmdResult {
    let k: HPolytope = match body {
        Some(p) => read_json(p)?,
        None => random_sandwiched_body(n, r, 4 * n, &mut stream(seed, 0))?,
    };
    if k.dim() != n {
        return Err(Failure::new(EXIT_USAGE, format!("body has dimension {}, expected {n}", k.dim())));
    }
    let strategy = match strategy {
        Some(StrategyArg::Grid) => NetStrategy::Grid,
        Some(StrategyArg::Random) => NetStrategy::Random,
        None if n <= 3 => NetStrategy::Grid,
        None => NetStrategy::Random,
    };
    let rep = approximate(&k, r, delta, strategy, seed)?;
    let lip = if lipschitz_trials > 0 {
        Some(lipschitz_audit(&PolytopeOracle { body: &k, r }, lipschitz_trials, seed)?)
    } else {
        None
    };
    let lip_ok = lip.is_none_or(|l| l.worst_ratio <= r + 1e-6);
    emit(
        &json!({
            "n": rep.n,
            "R": rep.r,
            "delta": rep.delta,
            "net_size": rep.net_size,
            "outer_ok": rep.outer_ok,
            "inner_ok": rep.inner_ok,
            "bound_exponent_c": rep.bound_exponent_c,
            "strategy": rep.strategy,
            "certified_net": rep.certified,
            "covering_radius": rep.covering_radius,
            "outer_margin": rep.outer_margin,
            "inner_margin": rep.inner_margin,
            "lipschitz_worst_ratio": lip.map(|l| l.worst_ratio),
        }),
        json,
    )?;
    Ok(if rep.outer_ok && rep.inner_ok && lip_ok { 0 } else { EXIT_INVARIANT })
}

fn cmd_audit(body: &Path, candidate: Option<&Path>, drop_facet: Option<usize>, json: Option<&Path>) -> CmdResult {
    let file: BodyFile = read_json(body)?;
    let cert = file.certificate()?;
    let p = match (candidate, drop_facet) {
        (Some(path), _) => read_json::<HPolytope>(path)?,
        (None, Some(i)) if i < file.polytope.num_facets() => file.polytope.without_facet(i),
        (None, Some(i)) => return Err(Failure::new(EXIT_USAGE, format!("row {i} does not exist"))),
        (None, None) => file.polytope.clone(),
    };
    let rep = adversarial_facet_audit(&cert, &file.polytope, &p)?;
    emit(
        &json!({
            "sandwich_ok": rep.sandwich_ok,
            "k_in_p": rep.inner.holds,
            "p_in_rk": rep.outer.holds,
            "k_in_p_margin": rep.inner.worst_margin,
            "p_in_rk_margin": rep.outer.worst_margin,
            "facets_P": rep.facets_p,
            "bound": rep.bound,
            "consistent": rep.consistent,
        }),
        json,
    )?;
    Ok(if rep.consistent { 0 } else { EXIT_INVARIANT })
}
