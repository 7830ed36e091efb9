//! Command-line front end. Exit codes: 0 success, 1 a verification failed,
//! 2 usage or input error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::cmval::{self, CMPoint};
use crate::counts::{count_report, ray_class_degree, sums_sweep};
use crate::error::{Error, Result};
use crate::forms::{e_series, g_pow_series, j_series, lambda_classical_series, EIndex};
use crate::lambda::{lambda_basis_series, BasisPair};
use crate::minpoly::{self, default_prec, specialize_and_factor, verify_theorem1, BivarPoly, Specialization};
use crate::modgroup::{cusp_report, SL2Mat};
use crate::{Cyc, Series, C64};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "genlambda", version, about = "Generalized lambda functions: q-expansions, minimal polynomials, CM values")]
pub struct Cli {
    #[command(flatten)]
    pub config: Config,
    #[command(subcommand)]
    pub cmd: Command,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Config {
    /// Level N ≥ 3.
    #[arg(short = 'N', long = "level", global = true, default_value_t = 3)]
    pub level: u32,
    /// Absolute q-precision; may not be lowered below the default for minimal polynomials.
    #[arg(long, global = true)]
    pub prec: Option<i64>,
    /// Numeric tolerance for series evaluation.
    #[arg(long, global = true, default_value_t = 1e-15)]
    pub tol: f64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Cache directory for minimal polynomials (also read from GENLAMBDA_CACHE).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a q-expansion.
    Qexp {
        #[command(subcommand)]
        what: Qexp,
    },
    /// Cusp representatives of Γ(N) with their ν-orbits.
    Cusps,
    /// Build or verify the minimal polynomial F(X, Y) of Λ over C(j).
    Minpoly {
        #[command(subcommand)]
        action: MinpolyAction,
    },
    /// Degrees d_N, ℓ_N, t_N by every route.
    Counts,
    /// Compare closed-form partial sums with enumeration.
    Sums {
        #[arg(long = "max-M", default_value_t = 200)]
        max_m: u64,
        #[arg(long)]
        verify: bool,
    },
    /// Numeric values at points of the upper half plane.
    Cm {
        #[command(subcommand)]
        action: CmAction,
    },
    /// Run every report.
    Verify {
        #[arg(long)]
        all: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum Qexp {
    /// E(τ; r, s).
    E { r: i64, s: i64 },
    J,
    /// g_N^{24/(N−1)} for N ∈ {3, 4}.
    G,
    LambdaClassical,
    /// Λ∘A for a matrix, or Λ(τ; Q₁, Q₂) for a basis.
    Lambda {
        #[arg(long, value_delimiter = ',', conflicts_with = "basis")]
        matrix: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',')]
        basis: Option<Vec<i64>>,
    },
}

#[derive(Subcommand, Debug)]
pub enum MinpolyAction {
    Build,
    Verify {
        /// Previously built JSON; otherwise loaded from the cache or rebuilt.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum CmAction {
    Eval {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        tau: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        basis: Option<Vec<i64>>,
    },
    Verify,
}

/// Result of one subcommand: the payload and whether its checks passed.
struct Outcome {
    json: serde_json::Value,
    text: String,
    passed: bool,
    /// Emit `text` verbatim in either format.
    raw: bool,
}

impl Outcome {
    fn ok<T: Serialize>(v: &T, text: String) -> Result<Self> {
        Ok(Outcome { json: serde_json::to_value(v)?, text, passed: true, raw: false })
    }
}

/// Parses `argv` (including the program name) and runs it; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(o) => {
            let body = match cli.config.format {
                _ if o.raw => o.text,
                Format::Json => serde_json::to_string_pretty(&o.json).expect("serializable"),
                Format::Text => o.text,
            };
            if let Err(e) = emit(&cli.config, &body) {
                eprintln!("error: {e}");
                return 2;
            }
            if o.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn emit(cfg: &Config, body: &str) -> Result<()> {
    match &cfg.out {
        Some(p) => std::fs::write(p, format!("{body}\n"))?,
        None => match writeln!(std::io::stdout(), "{body}") {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = &cli.config;
    if cfg.level < 3 {
        return Err(Error::InvalidArgument(format!("level {} is below 3", cfg.level)));
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if let Some(t) = cfg.threads {
        // A second call in the same process keeps the first pool, which only changes speed.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let theorem = matches!(cli.cmd, Command::Minpoly { .. } | Command::Counts | Command::Verify { .. });
    if cfg.level == 6 && theorem {
        eprintln!("warning: N = 6 is excluded from the structure theorems; results are computed but not claimed");
    }
    match &cli.cmd {
        Command::Qexp { what } => qexp(cfg, what),
        Command::Cusps => {
            let r = cusp_report(cfg.level);
            let text = r
                .iter()
                .map(|c| format!("({},{}) {:?} {:?} ν={:?}", c.a, c.c, c.class, c.matrix, c.nu_orbit))
                .collect::<Vec<_>>()
                .join("\n");
            Outcome::ok(&r, text)
        }
        Command::Minpoly { action } => minpoly_cmd(cfg, action),
        Command::Counts => {
            let r = count_report(cfg.level as u64)?;
            let text = format!("N={} d={} ell={} t={} cusps={}", r.n, r.d_n, r.ell, r.t, r.cusp_count);
            Ok(Outcome { passed: r.all_agree(), json: serde_json::to_value(&r)?, text, raw: false })
        }
        Command::Sums { max_m, verify } => {
            let r = sums_sweep(*max_m);
            let text = format!("compared={} refused={} mismatches={}", r.compared, r.refused, r.mismatches.len());
            Ok(Outcome { passed: !verify || r.passed(), json: serde_json::to_value(&r)?, text, raw: false })
        }
        Command::Cm { action } => cm_cmd(cfg, action),
        Command::Verify { all } => {
            if !all {
                return Err(Error::InvalidArgument("use `verify --all`".into()));
            }
            verify_all(cfg)
        }
    }
}

fn series_text(s: &Series) -> String {
    let mut out = format!("N={} ord={} prec={}\n", s.level(), s.ord(), s.prec());
    for (k, c) in s.coeffs().iter().enumerate() {
        if !c.is_zero() {
            out.push_str(&format!("{:>6}  {}\n", s.ord() + k as i64, c));
        }
    }
    out
}

fn arity<'a>(v: &'a [i64], name: &str) -> Result<&'a [i64]> {
    if v.len() == 4 {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("--{name} takes four comma-separated integers")))
    }
}

fn qexp(cfg: &Config, what: &Qexp) -> Result<Outcome> {
    let n = cfg.level;
    let prec = cfg.prec.unwrap_or(20 * n as i64);
    let s = match what {
        Qexp::E { r, s } => e_series(&EIndex::new(*r, *s, n)?, prec),
        Qexp::J => j_series(n, prec),
        Qexp::G => g_pow_series(n, prec)?,
        Qexp::LambdaClassical => lambda_classical_series(n, prec)?,
        Qexp::Lambda { matrix, basis } => {
            let b = match (matrix, basis) {
                (Some(m), None) => {
                    let m = arity(m, "matrix")?;
                    BasisPair::from_matrix(&SL2Mat::new(m[0], m[1], m[2], m[3], n)?)
                }
                (None, Some(b)) => {
                    let b = arity(b, "basis")?;
                    BasisPair::new(b[0], b[1], b[2], b[3], n)?
                }
                _ => return Err(Error::InvalidArgument("give exactly one of --matrix, --basis".into())),
            };
            lambda_basis_series(&b, prec)?
        }
    };
    Outcome::ok(&s.to_json(), series_text(&s))
}

fn cache(cfg: &Config) -> Option<PathBuf> {
    cfg.cache.clone().or_else(minpoly::cache_dir)
}

fn checked_prec(cfg: &Config) -> Result<Option<i64>> {
    let def = default_prec(cfg.level)?;
    match cfg.prec {
        Some(p) if p < def => Err(Error::InvalidArgument(format!("precision {p} is below the default {def}"))),
        p => Ok(p),
    }
}

/// Structure report plus, for small levels, the specialization certificates.
#[derive(Serialize)]
struct MinpolyVerify {
    structure: minpoly::StructureReport,
    root_identity: bool,
    specializations: Vec<serde_json::Value>,
    passed: bool,
}

fn spec_json(y: i64, s: &Specialization) -> serde_json::Value {
    match s {
        Specialization::Power { k, h, h0_nonzero, squarefree_prime, yun_agrees, .. } => json!({
            "y": y, "k": k, "deg_h": h.degree(), "h0_nonzero": h0_nonzero,
            "squarefree_prime": squarefree_prime, "yun_agrees": yun_agrees, "certified": s.certified(),
        }),
        Specialization::SquareFree { prime } => json!({"y": y, "squarefree_prime": prime, "certified": true}),
    }
}

pub fn verify_minpoly(f: &BivarPoly) -> Result<(bool, serde_json::Value)> {
    let structure = verify_theorem1(f)?;
    let root_identity = minpoly::root_identity(f, &SL2Mat::identity(f.n), minpoly::check_window(f))?;
    let mut specializations = Vec::new();
    let mut ok = structure.passed() && root_identity;
    if f.d <= 60 {
        for y in [0i64, 1728, 7] {
            let s = specialize_and_factor(f, &Cyc::from_i64(f.n, y))?;
            ok &= s.certified();
            specializations.push(spec_json(y, &s));
        }
    }
    let r = MinpolyVerify { structure, root_identity, specializations, passed: ok };
    Ok((ok, serde_json::to_value(&r)?))
}

fn minpoly_cmd(cfg: &Config, action: &MinpolyAction) -> Result<Outcome> {
    let prec = checked_prec(cfg)?;
    match action {
        MinpolyAction::Build => {
            let f = minpoly::load_or_build(cfg.level, prec, cache(cfg).as_deref())?;
            let text = f.to_json()?;
            Ok(Outcome { json: serde_json::Value::Null, text, passed: true, raw: true })
        }
        MinpolyAction::Verify { input } => {
            let f = match input {
                Some(p) => {
                    let mut f = BivarPoly::from_json(&std::fs::read_to_string(p)?)?;
                    f.prec = default_prec(f.n)?;
                    f
                }
                None => minpoly::load_or_build(cfg.level, prec, cache(cfg).as_deref())?,
            };
            let (passed, json) = verify_minpoly(&f)?;
            let text = format!("N={} d={} ell={} t={} passed={passed}", f.n, f.d, f.ell, f.t);
            Ok(Outcome { json, text, passed, raw: false })
        }
    }
}

fn cm_cmd(cfg: &Config, action: &CmAction) -> Result<Outcome> {
    let n = cfg.level;
    match action {
        CmAction::Eval { tau, basis } => {
            let [re, im] = tau[..] else {
                return Err(Error::InvalidArgument("--tau takes re,im".into()));
            };
            let p = CMPoint::new(C64::new(re, im), "", n)?;
            let b = match basis {
                Some(b) => {
                    let b = arity(b, "basis")?;
                    BasisPair::new(b[0], b[1], b[2], b[3], n)?
                }
                None => BasisPair::from_matrix(&SL2Mat::identity(n)),
            };
            let v = cmval::lambda_basis_numeric(&b, p.tau, cfg.tol)?;
            let j = cmval::j_numeric(p.tau);
            let out = json!({"N": n, "tau": [p.tau.re, p.tau.im], "lambda": [v.re, v.im], "j": [j.re, j.im]});
            Outcome::ok(&out, format!("Λ = {v}\nj = {j}"))
        }
        CmAction::Verify => {
            let (passed, json, text) = cm_report(n)?;
            Ok(Outcome { json, text, passed, raw: false })
        }
    }
}

fn unit_angles() -> Vec<f64> {
    (0..10).map(|k| std::f64::consts::PI * (0.52 + 0.05 * k as f64)).collect()
}

fn random_points() -> Vec<C64> {
    vec![
        C64::new(0.3, 1.1),
        C64::new(-0.41, 0.87),
        C64::new(0.12, 2.3),
        C64::new(1.7, 0.6),
        C64::new(-0.05, 1.4),
    ]
}

fn cm_report(n: u32) -> Result<(bool, serde_json::Value, String)> {
    let unit = cmval::unit_circle_check(n, &unit_angles())?;
    let recip = cmval::reciprocal_check(n, &random_points())?;
    let mut passed = unit < 1e-9 && recip < 1e-9;
    let mut text = format!("N={n} unit-circle {unit:.2e} reciprocal {recip:.2e}\n");
    let mut out = json!({"N": n, "unit_circle": unit, "reciprocal": recip});
    if matches!(n, 3 | 4) {
        let table = cmval::verify_cm_table(n)?;
        let ids = cmval::verify_identities(n, 100, 1)?;
        for r in &table.rows {
            text.push_str(&format!("{} {:<44} {:.2e} {}\n", pass(r.passed), r.name, r.residual, r.branch));
        }
        for r in &ids.rows {
            text.push_str(&format!("{} {:<44} exact={} {:.2e}\n", pass(r.passed), r.name, r.exact, r.numeric_residual));
        }
        passed &= table.passed() && ids.rows.iter().all(|r| r.passed);
        out["table"] = serde_json::to_value(&table)?;
        out["identities"] = serde_json::to_value(&ids)?;
    }
    out["passed"] = passed.into();
    Ok((passed, out, text))
}

fn pass(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify_all(cfg: &Config) -> Result<Outcome> {
    let mut lines = Vec::new();
    let mut results = serde_json::Map::new();
    let mut record = |name: &str, ok: bool, v: serde_json::Value| {
        lines.push(format!("{} {name}", pass(ok)));
        results.insert(name.to_string(), json!({"passed": ok, "report": v}));
        ok
    };
    let mut all = true;
    let sweep = sums_sweep(200);
    all &= record("sums", sweep.passed(), serde_json::to_value(&sweep)?);
    for n in 3..=9u64 {
        let r = count_report(n)?;
        all &= record(&format!("counts N={n}"), r.all_agree(), serde_json::to_value(&r)?);
    }
    let ray: Vec<_> = [(-11, 4, 3), (-11, 3, 1), (-7, 3, 2)]
        .iter()
        .map(|&(d, n, e)| (d, n, e, ray_class_degree(d, n).map(|q| q == e.into()).unwrap_or(false)))
        .collect();
    all &= record("ray-class degrees", ray.iter().all(|r| r.3), serde_json::to_value(&ray)?);
    for n in [3u32, 4, 5] {
        let f = minpoly::load_or_build(n, None, cache(cfg).as_deref())?;
        let (ok, v) = verify_minpoly(&f)?;
        all &= record(&format!("minpoly N={n}"), ok, v);
    }
    for n in [3u32, 4, 5] {
        let (ok, v, _) = cm_report(n)?;
        all &= record(&format!("cm N={n}"), ok, v);
    }
    Ok(Outcome { json: serde_json::Value::Object(results), text: lines.join("\n"), passed: all, raw: false })
}
