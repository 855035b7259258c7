//! Command-line front end: evaluate fractions, verify the identity
//! catalogue, mine for new matches, detect integer relations, and maintain
//! the constants database.
//!
//! Exit codes: `0` success (or a passing verdict), `1` a negative verdict
//! (divergent fraction, failed identity, no relation, nothing confirmed),
//! `2` usage or parse errors, `3` numeric domain errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use kontinued::cf::{converge_with, parse_cf, DEFAULT_MAX_DEPTH};
use kontinued::constdb::{ConfirmOutcome, ConstDb, ConstDbError};
use kontinued::identities::{self, IdentityError, IdentityId, Params, Verdict};
use kontinued::miner::{mine, MineConfig, SearchSpace};
use kontinued::numerics::trusted_decimal_digits;
use kontinued::pslq::{pslq, PslqError, RelationStatus};
use kontinued::{BigReal, Prec, ScaleValue};

const EXIT_OK: i32 = 0;
const EXIT_VERDICT: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_NUMERIC: i32 = 3;

/// Precision of freshly built database files: 3520 bits carry a little over
/// a thousand trusted decimal digits.
const DB_BUILD_PREC: Prec = 3520;

#[derive(Parser)]
#[command(
    name = "kontinued",
    version,
    about = "Certify, compare, and mine polynomial continued fractions"
)]
struct Cli {
    /// Configuration file with key=value lines (default-prec, confirm-prec,
    /// n-max-depth, db-path, threads).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for the data-parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a continued-fraction literal with a convergence certificate.
    Eval(EvalArgs),
    /// Verify identity instances against their closed forms.
    Verify(VerifyArgs),
    /// Randomized search for fractions that match database constants.
    Mine(MineArgs),
    /// Integer-relation detection over decimal values.
    Pslq(PslqArgs),
    /// Constants-database maintenance.
    Db(DbArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Literal such as "cf(0; b(n) = n^2; a(n) = 2*n + 1)".
    literal: String,
    /// Binary precision of the certificate (default from configuration).
    #[arg(long)]
    prec: Option<Prec>,
    /// Depth cap for the convergence ladder.
    #[arg(long)]
    max_depth: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Identity to check, eq1 through eq9.
    #[arg(long, value_name = "ID", conflicts_with = "suite")]
    id: Option<String>,
    /// Parameter α where the identity takes one.
    #[arg(long)]
    alpha: Option<String>,
    /// Parameter ξ where the identity takes one.
    #[arg(long)]
    xi: Option<String>,
    /// Parameter x for the self-power identities.
    #[arg(long)]
    x: Option<String>,
    /// Parameter z for the hyperbolic tangent identity.
    #[arg(long)]
    z: Option<String>,
    /// Binary precision of the certificate.
    #[arg(long)]
    prec: Option<Prec>,
    /// Run a named grid of instances instead ("default").
    #[arg(long, value_name = "NAME")]
    suite: Option<String>,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of candidates to draw.
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    /// Search-space preset: tiny or default.
    #[arg(long, default_value = "default")]
    space: String,
    /// Constants database file (overrides configuration and KONTINUED_DB).
    #[arg(long)]
    db: Option<PathBuf>,
    /// Confirmation precision in bits.
    #[arg(long)]
    prec_confirm: Option<Prec>,
}

#[derive(Args)]
struct PslqArgs {
    /// Decimal values, two or more; supply enough digits for the precision.
    #[arg(required = true, num_args = 2..)]
    values: Vec<String>,
    /// Largest coefficient magnitude to search for.
    #[arg(long, default_value_t = 10)]
    max_norm: u64,
    /// Working precision in bits.
    #[arg(long)]
    prec: Option<Prec>,
}

#[derive(Args)]
struct DbArgs {
    #[command(subcommand)]
    cmd: DbCmd,
}

#[derive(Subcommand)]
enum DbCmd {
    /// Evaluate the built-in catalogue (or a TSV specification) to a file.
    Build {
        /// TSV with id<TAB>expression[<TAB>digits[<TAB>tags]] lines;
        /// omitted digits are computed.  Default: built-in catalogue.
        #[arg(long)]
        source: Option<PathBuf>,
        /// Output TSV path.
        #[arg(long)]
        out: PathBuf,
        /// Build precision in bits.
        #[arg(long)]
        prec: Option<Prec>,
    },
    /// Match one decimal value against the database.
    Lookup {
        /// The value to identify; at least 0.31·prec digits are needed for
        /// confirmation to be meaningful.
        value: String,
        #[arg(long)]
        db: Option<PathBuf>,
        /// Prefilter half-width around each affine image.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 16)]
        max_norm: u64,
        /// Confirmation precision in bits.
        #[arg(long)]
        prec: Option<Prec>,
    },
}

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Config {
    default_prec: Prec,
    confirm_prec: Prec,
    n_max_depth: u64,
    db_path: Option<PathBuf>,
    threads: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            default_prec: 256,
            confirm_prec: 256,
            n_max_depth: 1 << 20,
            db_path: None,
            threads: None,
        }
    }
}

impl Config {
    fn load(path: Option<&Path>) -> Result<Config, String> {
        let mut cfg = Config::default();
        let Some(path) = path else {
            return Ok(cfg);
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn std::fmt::Display| {
                format!("{}:{}: {key}: {e}", path.display(), lineno + 1)
            };
            match key {
                "default-prec" => cfg.default_prec = value.parse().map_err(|e| bad(&e))?,
                "confirm-prec" => cfg.confirm_prec = value.parse().map_err(|e| bad(&e))?,
                "n-max-depth" => cfg.n_max_depth = value.parse().map_err(|e| bad(&e))?,
                "db-path" => cfg.db_path = Some(PathBuf::from(value)),
                "threads" => cfg.threads = Some(value.parse().map_err(|e| bad(&e))?),
                _ => return Err(format!("{}:{}: unknown key {key:?}", path.display(), lineno + 1)),
            }
        }
        Ok(cfg)
    }
}

/// Locate the database: flag, then configuration, then `KONTINUED_DB`, then
/// `data/base.tsv` in the working directory, then an in-memory build.
fn resolve_db(flag: Option<&Path>, cfg: &Config) -> Result<ConstDb, (i32, String)> {
    let path = flag
        .map(PathBuf::from)
        .or_else(|| cfg.db_path.clone())
        .or_else(|| std::env::var_os("KONTINUED_DB").map(PathBuf::from))
        .or_else(|| {
            let fallback = PathBuf::from("data/base.tsv");
            fallback.exists().then_some(fallback)
        });
    match path {
        Some(p) => ConstDb::load(&p)
            .map_err(|e| (EXIT_USAGE, format!("cannot load database {}: {e}", p.display()))),
        None => {
            eprintln!("note: no database file found, building the catalogue in memory");
            ConstDb::build_base(512).map_err(|e| (EXIT_NUMERIC, format!("database build: {e}")))
        }
    }
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn run(cli: Cli) -> i32 {
    let mut cfg = match Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(t) = cfg.threads {
        if let Err(e) = kontinued::configure_threads(t) {
            eprintln!("note: thread pool not reconfigured: {e}");
        }
    }
    match cli.cmd {
        Cmd::Eval(args) => run_eval(args, &cfg),
        Cmd::Verify(args) => run_verify(args, &cfg),
        Cmd::Mine(args) => run_mine(args, &cfg),
        Cmd::Pslq(args) => run_pslq(args, &cfg),
        Cmd::Db(args) => match args.cmd {
            DbCmd::Build { source, out, prec } => run_db_build(source, out, prec),
            DbCmd::Lookup {
                value,
                db,
                tol,
                max_norm,
                prec,
            } => run_db_lookup(value, db, tol, max_norm, prec, &cfg),
        },
    }
}

fn run_eval(args: EvalArgs, cfg: &Config) -> i32 {
    let prec = args.prec.unwrap_or(cfg.default_prec);
    let max_depth = args.max_depth.unwrap_or(cfg.n_max_depth.min(DEFAULT_MAX_DEPTH));
    let cf = match parse_cf(&args.literal) {
        Ok(cf) => cf,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let rep = match converge_with(&cf, prec, max_depth) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_NUMERIC, e),
    };
    println!("cf      = {}", cf.render());
    println!("status  = {}", rep.status);
    println!("depth   = {}", rep.depth_used);
    println!(
        "value   = {}  ({} trusted digits)",
        rep.value.to_decimal_string(trusted_decimal_digits(prec).max(1)),
        trusted_decimal_digits(prec)
    );
    println!("error  <= {}", rep.error_estimate.to_decimal_string(3));
    if rep.is_settled() {
        EXIT_OK
    } else {
        EXIT_VERDICT
    }
}

fn identity_error_code(e: &IdentityError) -> i32 {
    match e {
        IdentityError::MissingParam { .. } => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

fn parse_param(name: &str, v: &Option<String>) -> Result<Option<ScaleValue>, String> {
    v.as_deref()
        .map(|s| ScaleValue::parse(s).map_err(|e| format!("--{name}: {e}")))
        .transpose()
}

fn run_verify(args: VerifyArgs, cfg: &Config) -> i32 {
    if let Some(name) = &args.suite {
        if name != "default" {
            return fail(EXIT_USAGE, format!("unknown suite {name:?} (try \"default\")"));
        }
        let mut pass = 0usize;
        let suite = identities::default_suite();
        let total = suite.len();
        for case in suite {
            let prec = args.prec.unwrap_or(case.prec);
            match identities::verify(case.id, &case.params, prec) {
                Ok(outcome) => {
                    println!("{outcome}");
                    if outcome.verdict == Verdict::Pass {
                        pass += 1;
                    }
                }
                Err(e) => return fail(identity_error_code(&e), e),
            }
        }
        println!("suite default: {total} cases, {pass} pass, {} not passing", total - pass);
        return if pass == total { EXIT_OK } else { EXIT_VERDICT };
    }

    let Some(id) = &args.id else {
        return fail(EXIT_USAGE, "either --id or --suite is required");
    };
    let id: IdentityId = match id.parse() {
        Ok(id) => id,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let params = match (|| -> Result<Params, String> {
        Ok(Params {
            alpha: parse_param("alpha", &args.alpha)?,
            xi: parse_param("xi", &args.xi)?,
            x: parse_param("x", &args.x)?,
            z: parse_param("z", &args.z)?,
        })
    })() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let prec = args.prec.unwrap_or(cfg.default_prec);
    match identities::verify(id, &params, prec) {
        Ok(case) => {
            println!("{case}");
            if case.verdict == Verdict::Pass {
                EXIT_OK
            } else {
                EXIT_VERDICT
            }
        }
        Err(e) => fail(identity_error_code(&e), e),
    }
}

fn run_mine(args: MineArgs, cfg: &Config) -> i32 {
    let Some(space) = SearchSpace::named(&args.space) else {
        return fail(
            EXIT_USAGE,
            format!("unknown search space {:?} (try tiny or default)", args.space),
        );
    };
    let db = match resolve_db(args.db.as_deref(), cfg) {
        Ok(db) => db,
        Err((code, msg)) => return fail(code, msg),
    };
    let mine_cfg = MineConfig {
        seed: args.seed,
        budget: args.budget,
        prec_confirm: args.prec_confirm.unwrap_or(cfg.confirm_prec),
        n_max_depth: cfg.n_max_depth,
        ..MineConfig::default()
    };
    match mine(&space, &db, &mine_cfg) {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(e) => fail(EXIT_NUMERIC, e),
    }
}

fn run_pslq(args: PslqArgs, cfg: &Config) -> i32 {
    let prec = args.prec.unwrap_or(cfg.default_prec);
    let mut xs = Vec::with_capacity(args.values.len());
    for (i, s) in args.values.iter().enumerate() {
        match BigReal::from_decimal_str(s, prec + 32) {
            Ok(v) => xs.push(v),
            Err(e) => return fail(EXIT_USAGE, format!("value {i}: {e}")),
        }
    }
    match pslq(&xs, args.max_norm, prec) {
        Ok(cand) => match cand.status {
            RelationStatus::Found => {
                let mut line = String::from("relation:");
                for (i, c) in cand.coefficients.iter().enumerate() {
                    let _ = write!(line, " {c:+}*x{i}");
                }
                println!(
                    "{line} = 0  (sup-norm {}, residual {})",
                    cand.sup_norm,
                    cand.residual.to_decimal_string(3)
                );
                EXIT_OK
            }
            RelationStatus::Exhausted { norm_bound } => {
                println!(
                    "no relation with coefficients up to {} (any relation needs sup-norm above {:.3e})",
                    args.max_norm, norm_bound
                );
                EXIT_VERDICT
            }
        },
        Err(e @ PslqError::PrecisionTooLow { .. }) => fail(EXIT_NUMERIC, e),
        Err(e) => fail(EXIT_USAGE, e),
    }
}

fn run_db_build(source: Option<PathBuf>, out: PathBuf, prec: Option<Prec>) -> i32 {
    let prec = prec.unwrap_or(DB_BUILD_PREC);
    let built = match &source {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| (EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
            .and_then(|text| {
                ConstDb::build_from_spec(&text, prec).map_err(|e| (db_error_code(&e), e.to_string()))
            }),
        None => ConstDb::build_base(prec).map_err(|e| (db_error_code(&e), e.to_string())),
    };
    let db = match built {
        Ok(db) => db,
        Err((code, msg)) => return fail(code, msg),
    };
    if let Err(e) = db.save(&out) {
        return fail(EXIT_USAGE, format!("cannot write {}: {e}", out.display()));
    }
    println!(
        "wrote {}: {} entries, {} decimal digits",
        out.display(),
        db.len(),
        trusted_decimal_digits(prec)
    );
    EXIT_OK
}

fn db_error_code(e: &ConstDbError) -> i32 {
    match e {
        ConstDbError::Eval { .. } | ConstDbError::Pslq(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

fn run_db_lookup(
    value: String,
    db: Option<PathBuf>,
    tol: f64,
    max_norm: u64,
    prec: Option<Prec>,
    cfg: &Config,
) -> i32 {
    let prec = prec.unwrap_or(cfg.default_prec);
    let db = match resolve_db(db.as_deref(), cfg) {
        Ok(db) => db,
        Err((code, msg)) => return fail(code, msg),
    };
    let y = match BigReal::from_decimal_str(&value, 2 * prec + 32) {
        Ok(v) => v,
        Err(e) => return fail(EXIT_USAGE, format!("value: {e}")),
    };
    let hits = db.prefilter_lookup(y.to_f64(), tol);
    if hits.is_empty() {
        println!("no prefilter hits within {tol:e}");
        return EXIT_VERDICT;
    }
    let mut entries: Vec<usize> = hits.iter().map(|h| h.entry_index).collect();
    entries.dedup();
    for h in &hits {
        println!(
            "prefilter: {} (q={}/{}, r={}/{}) image={}",
            h.id, h.q.0, h.q.1, h.r.0, h.r.1, h.image_value
        );
    }
    entries.sort_unstable();
    entries.dedup();
    let mut confirmed = 0usize;
    for idx in entries {
        match db.confirm_match(&y, idx, max_norm, prec) {
            Ok(ConfirmOutcome::Confirmed(m)) => {
                confirmed += 1;
                println!(
                    "confirmed: {}  (sup-norm {}, residual {})",
                    m.describe("y"),
                    m.sup_norm,
                    m.residual.to_decimal_string(3)
                );
            }
            Ok(ConfirmOutcome::Unconfirmed) => {}
            Err(e) => return fail(EXIT_NUMERIC, e),
        }
    }
    if confirmed > 0 {
        EXIT_OK
    } else {
        println!("no confirmation at {prec} bits (supply more digits or raise --tol?)");
        EXIT_VERDICT
    }
}
