//! Command-line driver: `validate`, `solve`, `classify`, `sweep`.
//!
//! Exit codes are part of the contract:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success (rule matched, solve converged)   |
//! | 1    | I/O, config-parse, or internal numeric error |
//! | 2    | a validated condition failed              |
//! | 3    | iteration cap reached                     |
//! | 4    | blow-up detected inside the domain        |
//! | 5    | classification matched no rule            |

use crate::classify::{classify, envelopes, ClassificationReport, Rule, VerdictSet};
use crate::config::{self, ConfigError, Overrides, RunConfig};
use crate::functionals::{FunctionalEngine, FunctionalId, FunctionalTable, LimitOutcome, LimitVerdict};
use crate::output::{csv_line, csv_table, fmt_sig};
use crate::problem::{validate, ProblemSpec, ValidationReport};
use crate::quadrature::RadialGrid;
use crate::solver::{residual, solve, verify_bounds, BoundReport, SolveOutcome, SolveStatus};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CONDITION_FAILED: i32 = 2;
pub const EXIT_ITERATION_CAP: i32 = 3;
pub const EXIT_BLOW_UP: i32 = 4;
pub const EXIT_NO_RULE: i32 = 5;

const LONG_HELP: &str = "\
Constructs positive radial solution pairs of coupled quasilinear \
phi-Laplacian systems by monotone successive approximation, evaluates the \
criteria functionals P, Pbar, Punder, Z, H, and classifies the solution \
type (bounded / large / semifinite) from their behaviour at infinity.

CONFIG FILE (TOML; unknown keys are rejected)

  [problem]            required
    dimension          integer >= 3
    a1, a2             positive central values u(0), v(0)
    m1, m2             scaling floors, default max(1, 1/a_i)
    sigma1, sigma2     drift coefficient expressions over r, default \"0\"
    p1, p2             source coefficient expressions over r
  [problem.model1] / [problem.model2]
    family             elasticity | plasticity | generalized-newtonian |
                       plasma-physics | power-law | custom
    p, q               family parameters (family-dependent)
    phi                phi(t) expression for family = custom
  [problem.f1] / [problem.f2]
    kind               power | custom
    beta, alpha        f = u^beta * v^alpha            (kind = power)
    f, h, fbar         expressions over (u,v), (t1,t2), (s) (kind = custom)
                       (h, fbar) must bound f with the OTHER component's
                       slot scaled: f1(t, t*s) <= h1(t,t)*fbar1(s) and
                       f2(t*s, t) <= h2(t,t)*fbar2(s), for t >= M*a, s >= 1

  [numerics]           all optional
    radius = 10.0          domain [0, R] for solving
    grid_points = 4000     radial grid intervals
    grading = 1.0          node grading exponent (1 = uniform)
    tolerance = 1e-10      Cauchy tolerance, scale-relative
    max_iterations = 200   iteration cap
    arg_cap = 1e8          upper end of the Z/H argument tables
    arg_points = 4000      nodes in the Z/H argument tables
    probe_start = radius   first probe location R0
    probe_doublings = 10   probe schedule R0*2^k, k = 0..=K
    probe_grading = 3.0    grid grading used while probing
    converge_eps = 1e-3    plateau threshold for Converges
    diverge_factor = 1.5   growth factor over two doublings for Diverges
    diverge_increment = 0.05  increment fraction for Diverges

  [modes]              optional
    theta = \"o4\"         theta-envelope exponent source (o4 | o3)
    punder = \"notation\"  lower-envelope variant (notation | proof)

  [sweep]              required by the sweep command
    keys   = [\"problem.p1\", ...]   dotted config paths
    values = [...]                   one run per value

OUTPUT FILES (written under --out)

  solve:    solution.csv (r,u,v,du,dv), solve_report.txt
  classify: functionals.csv (r,P1,P2,Pbar1,Pbar2,Punder1,Punder2),
            classification.txt
  sweep:    sweep.csv (value,rule,u_type,v_type,residual)

EXIT CODES

  0 success; 1 I/O or parse error; 2 condition failure; 3 iteration cap;
  4 blow-up detected; 5 no classification rule matched.";

#[derive(Parser)]
#[command(name = "phirad", version, about = "Radial solutions of quasilinear phi-Laplacian systems", long_about = LONG_HELP)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural conditions of a problem configuration.
    Validate(CommonArgs),
    /// Run the monotone iteration and verify the envelope bounds.
    Solve(CommonArgs),
    /// Probe the criteria functionals and classify the solution type.
    Classify(CommonArgs),
    /// Re-classify (and re-solve) across a list of config values.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Path to the TOML problem configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV and report files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the theta-envelope exponent source (o4 | o3).
    #[arg(long, value_name = "MODE")]
    theta_mode: Option<String>,
    /// Override the lower-envelope variant (notation | proof).
    #[arg(long, value_name = "VARIANT")]
    punder_variant: Option<String>,
    /// Print evidence sequences and per-node detail.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Concurrent sweep jobs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Solve(args) => cmd_solve(&args),
        Command::Classify(args) => cmd_classify(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    }
}

fn overrides_from(args: &CommonArgs) -> Result<Overrides, String> {
    let mut overrides = Overrides::default();
    if let Some(text) = &args.theta_mode {
        overrides.theta_mode = Some(text.parse()?);
    }
    if let Some(text) = &args.punder_variant {
        overrides.punder_variant = Some(text.parse()?);
    }
    Ok(overrides)
}

enum Loaded {
    Ready {
        spec: Box<ProblemSpec>,
        report: ValidationReport,
    },
    Failed(i32),
}

/// Shared front half of every command: read config, build, validate.
fn load_and_validate(args: &CommonArgs) -> Loaded {
    let overrides = match overrides_from(args) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return Loaded::Failed(EXIT_ERROR);
        }
    };
    let config = match config::load(&args.config) {
        Ok(c) => c,
        Err(err) => return Loaded::Failed(report_config_error(err)),
    };
    build_and_validate(&config, &overrides)
}

fn build_and_validate(config: &RunConfig, overrides: &Overrides) -> Loaded {
    let spec = match config.build_spec(overrides) {
        Ok(s) => s,
        Err(err) => return Loaded::Failed(report_config_error(err)),
    };
    let report = match validate(&spec) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return Loaded::Failed(EXIT_ERROR);
        }
    };
    Loaded::Ready {
        spec: Box::new(spec),
        report,
    }
}

/// I/O and syntax problems exit 1; semantic problems with the assembled
/// problem (parameter ranges, monotonicity, floors) exit 2.
fn report_config_error(err: ConfigError) -> i32 {
    eprintln!("error: {err}");
    match err {
        ConfigError::Io(_) | ConfigError::Toml(_) | ConfigError::Expr { .. } | ConfigError::BadSweepKey(_) => {
            EXIT_ERROR
        }
        ConfigError::Invalid(_) | ConfigError::Model(_) | ConfigError::Problem(_) => {
            EXIT_CONDITION_FAILED
        }
    }
}

fn print_validation(report: &ValidationReport) {
    for check in &report.checks {
        let kind = if check.condition.blocking() {
            "blocking"
        } else {
            "advisory"
        };
        match (&check.passed, &check.witness) {
            (true, _) => println!("ok    {}", check.condition),
            (false, Some(witness)) => {
                println!("FAIL  {} [{kind}]: {witness}", check.condition)
            }
            (false, None) => println!("FAIL  {} [{kind}]", check.condition),
        }
    }
}

fn cmd_validate(args: &CommonArgs) -> i32 {
    match load_and_validate(args) {
        Loaded::Failed(code) => code,
        Loaded::Ready { report, .. } => {
            print_validation(&report);
            if report.all_passed() {
                println!("all conditions hold");
                EXIT_OK
            } else {
                EXIT_CONDITION_FAILED
            }
        }
    }
}

fn ensure_out_dir(path: &Path) -> Result<(), i32> {
    std::fs::create_dir_all(path).map_err(|err| {
        eprintln!("error: cannot create output directory {}: {err}", path.display());
        EXIT_ERROR
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), i32> {
    std::fs::write(path, contents).map_err(|err| {
        eprintln!("error: cannot write {}: {err}", path.display());
        EXIT_ERROR
    })
}

fn cmd_solve(args: &CommonArgs) -> i32 {
    let (spec, validation) = match load_and_validate(args) {
        Loaded::Failed(code) => return code,
        Loaded::Ready { spec, report } => {
            if !report.solvable() {
                print_validation(&report);
                eprintln!("error: blocking conditions failed; not solving");
                return EXIT_CONDITION_FAILED;
            }
            (spec, report)
        }
    };
    if ensure_out_dir(&args.out).is_err() {
        return EXIT_ERROR;
    }

    let outcome = match solve(&spec) {
        Ok(o) => o,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_ERROR;
        }
    };

    // solution CSV
    let pair = &outcome.pair;
    let rows: Vec<Vec<f64>> = pair
        .grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, &r)| vec![r, pair.u[k], pair.v[k], pair.du[k], pair.dv[k]])
        .collect();
    let csv = csv_table(&["r", "u", "v", "du", "dv"], &rows);
    if write_file(&args.out.join("solution.csv"), &csv).is_err() {
        return EXIT_ERROR;
    }

    let blow_up = matches!(outcome.diagnostics.status, SolveStatus::BlowUp { .. });
    let mut residuals = None;
    let mut bounds: Option<BoundReport> = None;
    if !blow_up {
        residuals = residual(&spec, pair).ok();
        if let Ok(engine) = FunctionalEngine::new(&spec) {
            if let Ok(tables) = engine.radial_tables(&pair.grid) {
                bounds = Some(verify_bounds(pair, &tables, validation.decomposition_ok()));
            }
        }
    }

    let report_text = solve_report_text(&outcome, residuals, bounds.as_ref(), args.verbose);
    print!("{report_text}");
    if write_file(&args.out.join("solve_report.txt"), &report_text).is_err() {
        return EXIT_ERROR;
    }

    match outcome.diagnostics.status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::IterationCapReached => EXIT_ITERATION_CAP,
        SolveStatus::BlowUp { .. } => EXIT_BLOW_UP,
    }
}

fn solve_report_text(
    outcome: &SolveOutcome,
    residuals: Option<(f64, f64)>,
    bounds: Option<&BoundReport>,
    verbose: bool,
) -> String {
    let d = &outcome.diagnostics;
    let mut text = String::new();
    match d.status {
        SolveStatus::Converged => text.push_str("status: converged\n"),
        SolveStatus::IterationCapReached => text.push_str("status: iteration-cap-reached\n"),
        SolveStatus::BlowUp { node, radius } => {
            text.push_str(&format!(
                "status: blow-up (node {node}, r = {})\n",
                fmt_sig(radius, 6)
            ));
        }
    }
    text.push_str(&format!("iterations: {}\n", d.iterations));
    text.push_str(&format!(
        "final-difference: {}\n",
        fmt_sig(d.final_difference, 6)
    ));
    text.push_str(&format!(
        "monotone-violation: {}\n",
        fmt_sig(d.monotone_violation, 6)
    ));
    if let Some((ru, rv)) = residuals {
        text.push_str(&format!(
            "residual-u: {}\nresidual-v: {}\n",
            fmt_sig(ru, 6),
            fmt_sig(rv, 6)
        ));
    }
    match bounds {
        Some(report) => {
            text.push_str(&format!(
                "bounds (relative tolerance {}):\n",
                fmt_sig(report.tolerance, 3)
            ));
            for check in &report.checks {
                if !check.applicable {
                    text.push_str(&format!("  {}: not-applicable\n", check.id));
                    continue;
                }
                let state = if check.passed { "pass" } else { "FAIL" };
                text.push_str(&format!(
                    "  {}: {state} (max violation {}, worst r {}{})\n",
                    check.id,
                    fmt_sig(check.max_violation, 4),
                    fmt_sig(check.worst_radius, 6),
                    if check.saturated_nodes > 0 {
                        format!(", {} saturated nodes lower-bound-checked", check.saturated_nodes)
                    } else {
                        String::new()
                    }
                ));
            }
        }
        None => text.push_str("bounds: skipped\n"),
    }
    if verbose {
        text.push_str("difference-history:\n");
        for (k, diff) in d.difference_history.iter().enumerate() {
            text.push_str(&format!("  {k}: {}\n", fmt_sig(*diff, 6)));
        }
    }
    text
}

struct ClassifyProducts {
    report: ClassificationReport,
    tables: Option<FunctionalTable>,
    envelopes: (Option<f64>, Option<f64>),
}

fn classify_spec(spec: &ProblemSpec, validation: &ValidationReport) -> Result<ClassifyProducts, i32> {
    let decomposition_ok = validation.decomposition_ok();
    let engine = match FunctionalEngine::new(spec) {
        Ok(e) => Some(e),
        Err(err) if !decomposition_ok => {
            eprintln!("note: gauge tables unavailable ({err}); decomposition already failed");
            None
        }
        Err(err) => {
            eprintln!("error: {err}");
            return Err(EXIT_ERROR);
        }
    };

    let inconclusive = || LimitVerdict {
        outcome: LimitOutcome::Inconclusive,
        evidence: vec![],
        saturated: false,
    };

    let (verdicts, tables) = match (&engine, decomposition_ok) {
        (Some(engine), true) => {
            let grid = RadialGrid::build(
                spec.numerics.radius,
                spec.numerics.grid_points,
                spec.numerics.grading,
            )
            .map_err(|err| {
                eprintln!("error: {err}");
                EXIT_ERROR
            })?;
            let tables = engine.radial_tables(&grid).map_err(|err| {
                eprintln!("error: {err}");
                EXIT_ERROR
            })?;
            (
                VerdictSet {
                    h1: engine.probe(FunctionalId::H1),
                    h2: engine.probe(FunctionalId::H2),
                    p_under1: engine.probe(FunctionalId::PUnder1),
                    p_under2: engine.probe(FunctionalId::PUnder2),
                    p_bar1: engine.probe(FunctionalId::PBar1),
                    p_bar2: engine.probe(FunctionalId::PBar2),
                },
                Some(tables),
            )
        }
        (engine, false) => {
            // the decomposition is advisory; without it the gauge-based
            // verdicts are meaningless, so they stay inconclusive
            let (pu1, pu2) = match engine {
                Some(e) => (e.probe(FunctionalId::PUnder1), e.probe(FunctionalId::PUnder2)),
                None => (inconclusive(), inconclusive()),
            };
            (
                VerdictSet {
                    h1: inconclusive(),
                    h2: inconclusive(),
                    p_under1: pu1,
                    p_under2: pu2,
                    p_bar1: inconclusive(),
                    p_bar2: inconclusive(),
                },
                None,
            )
        }
        (None, true) => unreachable!("engine failure with valid decomposition exits above"),
    };

    let mut report = classify(verdicts);
    if !decomposition_ok {
        report
            .warnings
            .push("scaling decomposition failed validation; gauge verdicts forced inconclusive".into());
    }
    let envelopes = match &tables {
        Some(t) => envelopes(&report, t),
        None => (None, None),
    };
    Ok(ClassifyProducts {
        report,
        tables,
        envelopes,
    })
}

fn classification_text(products: &ClassifyProducts, verbose: bool) -> String {
    let report = &products.report;
    let mut text = String::new();
    text.push_str(&format!("rule: {}\n", report.rule));
    text.push_str(&format!("u: {}\n", report.u_behavior));
    text.push_str(&format!("v: {}\n", report.v_behavior));
    if let (Some(u_sup), _) = products.envelopes {
        text.push_str(&format!("envelope-u: {}\n", fmt_sig(u_sup, 6)));
    }
    if let (_, Some(v_sup)) = products.envelopes {
        text.push_str(&format!("envelope-v: {}\n", fmt_sig(v_sup, 6)));
    }
    if report.existence_caveat {
        text.push_str(
            "caveat: finite-gauge rule; existence reuses the divergent-gauge construction\n",
        );
    }
    text.push_str("verdicts:\n");
    for (name, v) in [
        ("H1", &report.verdicts.h1),
        ("H2", &report.verdicts.h2),
        ("Punder1", &report.verdicts.p_under1),
        ("Punder2", &report.verdicts.p_under2),
        ("Pbar1", &report.verdicts.p_bar1),
        ("Pbar2", &report.verdicts.p_bar2),
    ] {
        text.push_str(&format!(
            "  {name}: {}{}\n",
            v.outcome,
            if v.saturated { " [saturated]" } else { "" }
        ));
        if verbose {
            for point in &v.evidence {
                text.push_str(&format!(
                    "    at {}: {}\n",
                    fmt_sig(point.location, 6),
                    fmt_sig(point.value, 9)
                ));
            }
        }
    }
    for blocking in &report.blocking {
        text.push_str(&format!("blocking: {blocking}\n"));
    }
    for warning in &report.warnings {
        text.push_str(&format!("warning: {warning}\n"));
    }
    text
}

fn cmd_classify(args: &CommonArgs) -> i32 {
    let (spec, validation) = match load_and_validate(args) {
        Loaded::Failed(code) => return code,
        Loaded::Ready { spec, report } => {
            if !report.solvable() {
                print_validation(&report);
                eprintln!("error: blocking conditions failed");
                return EXIT_CONDITION_FAILED;
            }
            (spec, report)
        }
    };
    if ensure_out_dir(&args.out).is_err() {
        return EXIT_ERROR;
    }
    let products = match classify_spec(&spec, &validation) {
        Ok(p) => p,
        Err(code) => return code,
    };

    if let Some(tables) = &products.tables {
        let rows: Vec<Vec<f64>> = tables
            .radii
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                vec![
                    r,
                    tables.p[0][k],
                    tables.p[1][k],
                    tables.p_bar[0][k],
                    tables.p_bar[1][k],
                    tables.p_under[0][k],
                    tables.p_under[1][k],
                ]
            })
            .collect();
        let csv = csv_table(
            &["r", "P1", "P2", "Pbar1", "Pbar2", "Punder1", "Punder2"],
            &rows,
        );
        if write_file(&args.out.join("functionals.csv"), &csv).is_err() {
            return EXIT_ERROR;
        }
    }

    let text = classification_text(&products, args.verbose);
    print!("{text}");
    if write_file(&args.out.join("classification.txt"), &text).is_err() {
        return EXIT_ERROR;
    }

    if products.report.rule == Rule::NoRuleMatched {
        EXIT_NO_RULE
    } else {
        EXIT_OK
    }
}

fn csv_escape(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

fn sweep_value_label(value: &toml::Value) -> String {
    match value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(x) => fmt_sig(*x, 12),
        other => other.to_string(),
    }
}

fn sweep_row(raw: &toml::Value, keys: &[String], value: &toml::Value, overrides: &Overrides) -> Vec<String> {
    let label = sweep_value_label(value);
    let fail = |label: &str, why: &str| {
        eprintln!("sweep value {label}: {why}");
        vec![
            label.to_string(),
            "error".to_string(),
            "unknown".to_string(),
            "unknown".to_string(),
            "nan".to_string(),
        ]
    };
    let mut patched = raw.clone();
    for key in keys {
        if let Err(err) = config::set_path(&mut patched, key, value.clone()) {
            return fail(&label, &err.to_string());
        }
    }
    let config = match config::from_value(&patched) {
        Ok(c) => c,
        Err(err) => return fail(&label, &err.to_string()),
    };
    let (spec, validation) = match build_and_validate(&config, overrides) {
        Loaded::Ready { spec, report } => {
            if !report.solvable() {
                return fail(&label, "blocking conditions failed");
            }
            (spec, report)
        }
        Loaded::Failed(_) => return fail(&label, "config rejected"),
    };
    let products = match classify_spec(&spec, &validation) {
        Ok(p) => p,
        Err(_) => return fail(&label, "classification failed"),
    };
    let residual_cell = match solve(&spec) {
        Ok(outcome) if matches!(outcome.diagnostics.status, SolveStatus::BlowUp { .. }) => {
            "blow-up".to_string()
        }
        Ok(outcome) => match residual(&spec, &outcome.pair) {
            Ok((ru, rv)) => fmt_sig(ru.max(rv), 12),
            Err(_) => "nan".to_string(),
        },
        Err(_) => "nan".to_string(),
    };
    vec![
        label,
        products.report.rule.to_string(),
        products.report.u_behavior.to_string(),
        products.report.v_behavior.to_string(),
        residual_cell,
    ]
}

fn cmd_sweep(args: &SweepArgs) -> i32 {
    let common = &args.common;
    let overrides = match overrides_from(common) {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_ERROR;
        }
    };
    let raw = match config::load_raw(&common.config) {
        Ok(v) => v,
        Err(err) => return report_config_error(err),
    };
    let config = match config::from_value(&raw) {
        Ok(c) => c,
        Err(err) => return report_config_error(err),
    };
    let sweep = match &config.sweep {
        Some(s) if !s.values.is_empty() && !s.keys.is_empty() => s.clone(),
        _ => {
            eprintln!("error: sweep needs a [sweep] section with non-empty `keys` and `values`");
            return EXIT_ERROR;
        }
    };
    if ensure_out_dir(&common.out).is_err() {
        return EXIT_ERROR;
    }

    // jobs own their index range; rows land in input order regardless of
    // completion order, so output bytes do not depend on scheduling
    let jobs = args.jobs.max(1).min(sweep.values.len());
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<Vec<String>>>> = Mutex::new(vec![None; sweep.values.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= sweep.values.len() {
                    break;
                }
                let row = sweep_row(&raw, &sweep.keys, &sweep.values[index], &overrides);
                rows.lock().unwrap()[index] = Some(row);
            });
        }
    });

    let mut csv = csv_line(&["value", "rule", "u_type", "v_type", "residual"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>());
    for row in rows.into_inner().unwrap() {
        let row = row.expect("every sweep row computed");
        let cells: Vec<String> = row.iter().map(|c| csv_escape(c)).collect();
        csv.push_str(&csv_line(&cells));
    }
    print!("{csv}");
    if write_file(&common.out.join("sweep.csv"), &csv).is_err() {
        return EXIT_ERROR;
    }
    EXIT_OK
}
