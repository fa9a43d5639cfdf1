use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qstar_core::cgc::{cg, cg_matrix, qcg, CGQuery};
use qstar_core::expr::{parse_star_expr, FOUR_VARS, PLANE_VARS};
use qstar_core::hseries::{HSeries, HalfInt, DEFAULT_ORDER};
use qstar_core::qplane::StarProduct;
use qstar_core::reps::Generator;
use qstar_core::spacetime4d::{Star4, Variant};
use qstar_core::twist::{twist_rep, verify_intertwiner, EtaFunction};
use qstar_core::verify::{run_suite, Suite, VerifyConfig};
use qstar_core::Error;

/// `println!` that exits quietly when the reader hangs up.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            return Err(e.into());
        }
    }};
}

#[derive(Parser)]
#[command(name = "qstar", version, about = "Star products from Drinfeld twists of the q-deformed su(2)")]
struct Cli {
    /// Truncation order K of all ħ-series
    #[arg(long, global = true, env = "QSTAR_ORDER", default_value_t = DEFAULT_ORDER)]
    order: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clebsch-Gordan table for V_j1 ⊗ V_j2
    Qcg {
        #[arg(long)]
        j1: HalfInt,
        #[arg(long)]
        j2: HalfInt,
        /// q-deformed coefficients as ħ-series
        #[arg(long)]
        deformed: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Twist and inverse twist on V_j1 ⊗ V_j2
    Twist {
        #[arg(long)]
        j1: HalfInt,
        #[arg(long)]
        j2: HalfInt,
        /// Override η(j1,j2,j) as `J1:J2:J=c0,c1,...` (repeatable); unset entries are 1
        #[arg(long = "eta")]
        eta: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Star product of two polynomials
    Star {
        #[arg(long, value_enum, default_value_t = Space::Plane)]
        space: Space,
        /// `<poly> * <poly>` over x,y (plane) or x1,y1,x2,y2 (4-space)
        #[arg(long)]
        expr: String,
        /// Only the bidifferential operator B_k
        #[arg(long)]
        bidiff: Option<usize>,
        #[arg(long, value_enum, default_value_t = StarFormat::Json)]
        format: StarFormat,
    },
    /// Run a verification suite
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value = "3/2")]
        max_spin: HalfInt,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the JSON report here
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StarFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Space {
    Plane,
    Euclid,
    Minkowski,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidWeight { .. } | Error::InvalidQuery(_) | Error::OrderExceeded { .. } => 2,
            Error::UnsupportedGenerator(_) | Error::MixedFamily(..) => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Qcg { j1, j2, deformed, format } => cmd_qcg(j1, j2, deformed, cli.order, format),
        Command::Twist { j1, j2, eta, format } => cmd_twist(j1, j2, &eta, cli.order, format),
        Command::Star { space, expr, bidiff, format } => cmd_star(space, &expr, bidiff, cli.order, format),
        Command::Verify { suite, max_spin, tol, report } => cmd_verify(suite, max_spin, tol, cli.order, report),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn print_json(value: &impl Serialize) -> Result<(), Failure> {
    out!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn series_header(order: usize) -> String {
    (0..=order).map(|k| format!("h^{k}")).collect::<Vec<_>>().join(",")
}

fn series_csv(s: &HSeries) -> String {
    s.coeffs().iter().map(|c| format!("{c:e}")).collect::<Vec<_>>().join(",")
}

fn cmd_qcg(j1: HalfInt, j2: HalfInt, deformed: bool, order: usize, format: Format) -> CmdResult {
    if j1.twice() < 0 || j2.twice() < 0 {
        return Err(Error::InvalidQuery("spins must be non-negative".into()).into());
    }
    let coupling = cg_matrix(j1, j2, deformed, order);
    let mut rows = Vec::new();
    for &(j, m) in &coupling.columns {
        for m1 in j1.weights() {
            let m2 = m - m1;
            if !j2.admits(m2) {
                continue;
            }
            let query = CGQuery::new(j1, j2, j, m1, m2, m);
            let value = if deformed { qcg(query, order)? } else { HSeries::constant(cg(query)?, 0) };
            rows.push((query, value));
        }
    }
    match format {
        Format::Csv => {
            let value_cols = if deformed { series_header(order) } else { "value".to_string() };
            out!("j1,j2,j,m1,m2,m,{value_cols}");
            for (q, v) in &rows {
                out!("{},{},{},{},{},{},{}", q.j1, q.j2, q.j, q.m1, q.m2, q.m, series_csv(v));
            }
        }
        Format::Json => {
            let entries: Vec<_> = rows
                .iter()
                .map(|(q, v)| {
                    let value = if deformed { serde_json::to_value(v) } else { Ok(json!(v.constant_term())) };
                    value.map(|value| json!({"j": q.j, "m": q.m, "m1": q.m1, "m2": q.m2, "value": value}))
                })
                .collect::<Result<_, _>>()?;
            print_json(&json!({"j1": j1, "j2": j2, "deformed": deformed, "order": order, "entries": entries}))?;
        }
    }
    Ok(0)
}

fn parse_eta_override(arg: &str, order: usize) -> Result<((HalfInt, HalfInt, HalfInt), HSeries), Error> {
    let bad = || Error::Parse(format!("η override `{arg}` is not of the form J1:J2:J=c0,c1,..."));
    let (spins, coeffs) = arg.split_once('=').ok_or_else(bad)?;
    let spins: Vec<HalfInt> = spins.split(':').map(|s| s.trim().parse()).collect::<Result<_, _>>()?;
    let [a, b, c] = spins[..] else { return Err(bad()) };
    let coeffs: Vec<f64> =
        coeffs.split(',').map(|c| c.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    Ok(((a, b, c), HSeries::from_coeffs(coeffs).truncate(order)))
}

fn cmd_twist(j1: HalfInt, j2: HalfInt, overrides: &[String], order: usize, format: Format) -> CmdResult {
    if j1.twice() < 0 || j2.twice() < 0 {
        return Err(Error::InvalidQuery("spins must be non-negative".into()).into());
    }
    let entries: BTreeMap<_, _> = overrides.iter().map(|s| parse_eta_override(s, order)).collect::<Result<_, _>>()?;
    let eta = if entries.is_empty() { EtaFunction::one() } else { EtaFunction::one_with_overrides(entries) };
    let tw = twist_rep(j1, j2, &eta, order)?;
    match format {
        Format::Json => {
            let mut residuals = BTreeMap::new();
            for g in [Generator::E, Generator::F, Generator::K] {
                residuals.insert(g.to_string(), verify_intertwiner(&tw, g)?);
            }
            print_json(&json!({
                "twist": tw,
                "inverse_residual": tw.inverse_residual()?,
                "intertwining_residuals": residuals,
            }))?;
        }
        Format::Csv => {
            out!("which,row,col,{}", series_header(order));
            for (name, op) in [("forward", &tw.forward), ("inverse", &tw.inverse)] {
                for (r, row) in op.matrix.to_series_rows().iter().enumerate() {
                    for (c, s) in row.iter().enumerate() {
                        if !s.is_zero() {
                            out!("{name},{r},{c},{}", series_csv(s));
                        }
                    }
                }
            }
        }
    }
    Ok(0)
}

fn cmd_star(space: Space, expr: &str, bidiff: Option<usize>, order: usize, format: StarFormat) -> CmdResult {
    if let Some(k) = bidiff {
        if k > order {
            return Err(Error::OrderExceeded { requested: k, order }.into());
        }
    }
    let (element, slices): (serde_json::Value, Vec<(usize, String)>) = match space {
        Space::Plane => {
            let (a, b) = parse_star_expr(expr, &PLANE_VARS)?;
            let sp = StarProduct::new(EtaFunction::one(), order);
            let product = sp.star(&a.to_plane(order)?, &b.to_plane(order)?)?;
            match bidiff {
                Some(k) => {
                    let bk = product.slice(k);
                    (serde_json::to_value(&bk)?, vec![(k, bk.render_slice(0))])
                }
                None => (serde_json::to_value(&product)?, (0..=order).map(|k| (k, product.render_slice(k))).collect()),
            }
        }
        Space::Euclid | Space::Minkowski => {
            let variant = if space == Space::Euclid { Variant::Euclidean } else { Variant::Minkowski };
            let (a, b) = parse_star_expr(expr, &FOUR_VARS)?;
            let s4 = Star4::new(variant, EtaFunction::one(), order);
            let product = s4.star(&a.to_four(order)?, &b.to_four(order)?)?;
            match bidiff {
                Some(k) => {
                    let bk = product.slice(k);
                    (serde_json::to_value(&bk)?, vec![(k, bk.render_slice(0))])
                }
                None => (serde_json::to_value(&product)?, (0..=order).map(|k| (k, product.render_slice(k))).collect()),
            }
        }
    };
    match format {
        StarFormat::Text => {
            for (k, poly) in &slices {
                out!("ħ^{k}: {poly}");
            }
        }
        StarFormat::Json => {
            let expansion: Vec<_> = slices.iter().map(|(k, p)| json!({"order": k, "poly": p})).collect();
            let space = match space {
                Space::Plane => "plane",
                Space::Euclid => "euclid",
                Space::Minkowski => "minkowski",
            };
            print_json(&json!({
                "space": space,
                "expr": expr,
                "order": order,
                "bidiff": bidiff,
                "element": element,
                "expansion": expansion,
            }))?;
        }
    }
    Ok(0)
}

fn cmd_verify(suite: Suite, max_spin: HalfInt, tol: f64, order: usize, report_path: Option<PathBuf>) -> CmdResult {
    if max_spin.twice() < 0 || tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidQuery("--max-spin and --tol must be non-negative".into()).into());
    }
    let report = run_suite(suite, &VerifyConfig { max_spin, order, tol })?;
    if let Some(path) = report_path {
        std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    }
    for case in report.cases.iter().filter(|c| !c.pass) {
        out!("FAIL {}  residual {:e} > {:e}", case.id, case.residual, case.tolerance);
    }
    out!(
        "{}: {}/{} passed, max residual {:e}",
        report.suite,
        report.summary.passed,
        report.summary.total,
        report.summary.max_residual
    );
    Ok(if report.all_passed() { 0 } else { 1 })
}
