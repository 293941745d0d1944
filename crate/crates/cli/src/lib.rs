//! File-driven front end for the half-space boundary value solvers.
//!
//! A run reads one problem file, solves (or only checks) it and writes CSV
//! and text reports. The exit code summarises the outcome:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | solved and verified |
//! | 1 | input error |
//! | 2 | solved, but with warnings or a failed verification |
//! | 3 | the datum violates a solvability condition |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use monobvp_core::solvers::{check_datum, solve_hilbert, verify_solution, ProbeSet, SolveReport, DEFAULT_PROBE_SEED};
use monobvp_core::{ConditionCheck, Error, Multivector, QuadratureScheme, Signature, SolveError, VerificationReport};
use thiserror::Error;

pub mod problem;

pub use problem::{Problem, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_WARNINGS: i32 = 2;
pub const EXIT_CONDITIONS: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("problem file: {0}")]
    Problem(String),
    #[error("{0}")]
    Core(#[from] Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        CliError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Command-line overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct Flags {
    pub out_dir: PathBuf,
    pub quad_r: Option<f64>,
    pub quad_grid: Option<usize>,
    pub quad_tol: Option<f64>,
    pub probe_eps: Option<Vec<f64>>,
    pub no_verify: bool,
    pub seed: u64,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
            quad_r: None,
            quad_grid: None,
            quad_tol: None,
            probe_eps: None,
            no_verify: false,
            seed: DEFAULT_PROBE_SEED,
        }
    }
}

/// What a run did.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub exit_code: i32,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
    /// Human-readable lines for the terminal.
    pub messages: Vec<String>,
}

impl Outcome {
    fn input_error(e: CliError) -> Self {
        Self {
            exit_code: EXIT_INPUT,
            files: Vec::new(),
            messages: vec![format!("error: {e}")],
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into())
}

fn load(path: &Path, flags: &Flags) -> Result<Problem, CliError> {
    let file = ProblemFile::load(path)?;
    let mut scheme = file.quadrature.apply(QuadratureScheme::default());
    if let Some(r) = flags.quad_r {
        scheme.truncation_radius = r;
    }
    if let Some(g) = flags.quad_grid {
        scheme.base_grid = g;
    }
    if let Some(t) = flags.quad_tol {
        scheme.tolerance = t;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    file.resolve(base, scheme)
}

fn write_file(path: PathBuf, text: &str, out: &mut Outcome) -> Result<(), CliError> {
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    out.files.push(path);
    Ok(())
}

fn prepare_out_dir(flags: &Flags) -> Result<(), CliError> {
    fs::create_dir_all(&flags.out_dir).map_err(|e| CliError::io(&flags.out_dir, e))
}

/// Shortest text that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn blade_header(sig: Signature) -> Vec<String> {
    sig.blade_order().into_iter().map(|m| sig.blade_name(m)).collect()
}

fn coeff_cells(v: &Multivector) -> impl Iterator<Item = String> + '_ {
    v.signature().blade_order().into_iter().map(move |m| num(v.coeff(m)))
}

fn csv_text(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let tmp = Path::new("<memory>");
    w.write_record(&header).map_err(|e| CliError::csv(tmp, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::csv(tmp, e))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Problem(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per condition and measure.
pub fn solvability_csv(sig: Signature, checks: &[ConditionCheck]) -> Result<String, CliError> {
    let mut header = vec!["alpha".to_string(), "measure".to_string()];
    header.extend(blade_header(sig));
    header.extend(["error".to_string(), "tolerance".to_string(), "satisfied".to_string()]);
    let mut rows = Vec::new();
    for k in checks {
        for (measure, r) in [("dsigma", &k.moment), ("lebesgue", &k.lebesgue)] {
            let mut row = vec![k.alpha.to_string(), measure.to_string()];
            row.extend(coeff_cells(&r.value));
            row.push(num(r.total_error()));
            row.push(num(k.tolerance));
            // only the dσ moment decides
            row.push(if measure == "dsigma" { k.satisfied.to_string() } else { String::new() });
            rows.push(row);
        }
    }
    csv_text(header, rows)
}

fn class_text(out: &mut String, report: &SolveReport, m: i32) {
    let c = &report.class;
    let _ = writeln!(out, "case: {}", report.case);
    let _ = writeln!(out, "order m: {m}");
    let _ = writeln!(out, "class weight r: {}", c.m);
    let _ = writeln!(out, "holder index: {:.4} (M = {:.4e}, in class: {})", c.holder.mu, c.holder.m, c.in_h_m);
    let _ = writeln!(
        out,
        "index at infinity: {:.4} (M = {:.4e}, in class: {})",
        c.dagger.mu, c.dagger.m, c.in_h_m_dagger
    );
    match &c.limit_at_infinity {
        Some(l) => {
            let _ = writeln!(out, "limit of x^r c(x) at infinity: {l}");
        }
        None => {
            let _ = writeln!(out, "limit of x^r c(x) at infinity: undetermined");
        }
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    for k in &report.conditions {
        let _ = writeln!(out, "{}", moment_line(k).trim_start());
    }
}

fn moment_line(k: &ConditionCheck) -> String {
    if !k.converged {
        format!(
            "  moment for alpha = {}: does not converge (Z^alpha c decays too slowly), violated",
            k.alpha
        )
    } else {
        format!(
            "  moment for alpha = {}: {} (tolerance {:e}, {})",
            k.alpha,
            k.moment.value,
            k.tolerance,
            if k.satisfied { "satisfied" } else { "violated" }
        )
    }
}

fn verify_text(out: &mut String, rep: &VerificationReport) {
    let _ = writeln!(out, "dirac residual: {:e} ({})", rep.dirac_residual, ok(rep.regularity_ok()));
    for (label, r) in [("boundary", &rep.boundary), ("reflection", &rep.reflection)] {
        for (eps, v) in &r.steps {
            let _ = writeln!(out, "{label} residual at eps {eps}: {v:e}");
        }
        match r.order {
            Some(p) => {
                let _ = writeln!(out, "{label} decay order: {p:.4}");
            }
            None => {
                let _ = writeln!(out, "{label} decay order: residuals negligible");
            }
        }
        let _ = writeln!(out, "{label} residual extrapolated to eps = 0: {:e}", r.extrapolated);
    }
    let _ = writeln!(out, "boundary condition: {}", ok(rep.boundary_ok()));
    let _ = writeln!(out, "jump identity: {}", ok(rep.reflection_ok()));
    match rep.order.order {
        Some(o) => {
            let _ = writeln!(out, "order at infinity: {o} (slope {:.4}, {})", rep.order.slope, ok(rep.growth_ok));
        }
        None => {
            let _ = writeln!(out, "order at infinity: field vanishes ({})", ok(rep.growth_ok));
        }
    }
    let _ = writeln!(out, "verification: {}", if rep.passed() { "passed" } else { "failed" });
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "failed"
    }
}

fn machine_section(out: &mut String, pairs: &[(&str, String)]) {
    out.push_str("\n[machine]\n");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k} = {v}");
    }
}

/// Explains solver errors in words and picks the exit code.
fn solve_error(e: CliError, sig: Option<Signature>, m: i32) -> (i32, Vec<String>, Option<Vec<ConditionCheck>>) {
    match e {
        CliError::Core(Error::Solve(SolveError::ConditionViolated(checks))) => {
            let mut msgs = vec![format!(
                "the datum fails the moment conditions required for order m = {m}: \
                 every moment of c against the Fueter polynomials of degree at most {} must vanish",
                -(sig.map_or(1, |s| s.n() as i32) + 1 + m)
            )];
            for k in checks.iter().filter(|k| !k.satisfied) {
                msgs.push(moment_line(k));
            }
            (EXIT_CONDITIONS, msgs, Some(checks))
        }
        CliError::Core(Error::Solve(SolveError::DatumLimitNonzero(l))) => (
            EXIT_CONDITIONS,
            vec![format!(
                "order m = -1 requires the datum to vanish at infinity, but |c(x)| tends to about {l:.4e}"
            )],
            None,
        ),
        other => (EXIT_INPUT, vec![format!("error: {other}")], None),
    }
}

/// Solves a problem file and writes `<stem>.solution.csv`,
/// `<stem>.verify.txt` and `<stem>.solvability.csv` into `flags.out_dir`.
pub fn run_solve(path: &Path, flags: &Flags) -> Outcome {
    let problem = match load(path, flags) {
        Ok(p) => p,
        Err(e) => return Outcome::input_error(e),
    };
    match solve_inner(path, &problem, flags) {
        Ok(out) => out,
        Err((e, mut out)) => {
            let sig = problem.hilbert.signature();
            let (code, msgs, checks) = solve_error(e, Some(sig), problem.hilbert.m);
            out.exit_code = code;
            out.messages.extend(msgs);
            if let Some(checks) = checks {
                if let Err(e) = write_solvability(path, flags, sig, &checks, &mut out) {
                    return Outcome::input_error(e);
                }
            }
            out
        }
    }
}

fn write_solvability(
    path: &Path,
    flags: &Flags,
    sig: Signature,
    checks: &[ConditionCheck],
    out: &mut Outcome,
) -> Result<(), CliError> {
    prepare_out_dir(flags)?;
    let text = solvability_csv(sig, checks)?;
    write_file(flags.out_dir.join(format!("{}.solvability.csv", stem(path))), &text, out)
}

fn solve_inner(path: &Path, problem: &Problem, flags: &Flags) -> Result<Outcome, (CliError, Outcome)> {
    let mut out = Outcome::default();
    let fail = |e: CliError, out: &Outcome| (e, out.clone());
    let sig = problem.hilbert.signature();
    let mut sol = solve_hilbert(&problem.hilbert).map_err(|e| fail(e.into(), &out))?;
    for (alpha, v) in &problem.free_constants {
        sol.set_free_constant(alpha, v.clone()).map_err(|e| fail(e.into(), &out))?;
    }
    prepare_out_dir(flags).map_err(|e| fail(e, &out))?;

    let mut header: Vec<String> = (0..=sig.n()).map(|k| format!("w{k}")).collect();
    header.extend(blade_header(sig));
    let mut rows = Vec::with_capacity(problem.queries.len());
    for w in &problem.queries {
        let v = sol.evaluate(w).map_err(|e| fail(e.into(), &out))?;
        let mut row: Vec<String> = w.components().iter().map(|&x| num(x)).collect();
        row.extend(coeff_cells(&v));
        rows.push(row);
    }
    let stem = stem(path);
    let text = csv_text(header, rows).map_err(|e| fail(e, &out))?;
    write_file(flags.out_dir.join(format!("{stem}.solution.csv")), &text, &mut out).map_err(|e| fail(e, &out))?;

    let report = sol.report().clone();
    let mut txt = String::new();
    class_text(&mut txt, &report, problem.hilbert.m);
    let _ = writeln!(txt, "lambda: {}", problem.hilbert.lambda);
    let _ = writeln!(txt, "free constants: {}", sol.poly_basis().len());
    for (alpha, v) in sol.free_constants() {
        let _ = writeln!(txt, "  c_{alpha} = {v}");
    }
    let verify = problem.verify && !flags.no_verify;
    let mut passed = true;
    let mut machine = vec![
        ("case", report.case.to_string()),
        ("m", problem.hilbert.m.to_string()),
        ("warnings", report.warnings.len().to_string()),
    ];
    txt.push('\n');
    if verify {
        let mut probes = ProbeSet::standard(sig, flags.seed);
        if let Some(eps) = &flags.probe_eps {
            probes = probes.with_eps(eps.clone());
        }
        let rep = verify_solution(&sol, &probes).map_err(|e| fail(e.into(), &out))?;
        verify_text(&mut txt, &rep);
        passed = rep.passed();
        machine.extend([
            ("verified", "true".to_string()),
            ("passed", passed.to_string()),
            ("dirac_residual", num(rep.dirac_residual)),
            ("boundary_last", num(rep.boundary.last())),
            ("boundary_order", rep.boundary.order.map_or("none".into(), num)),
            ("boundary_extrapolated", num(rep.boundary.extrapolated)),
            ("reflection_last", num(rep.reflection.last())),
            ("reflection_extrapolated", num(rep.reflection.extrapolated)),
            ("order_at_infinity", rep.order.order.map_or("none".into(), |o| o.to_string())),
        ]);
    } else {
        txt.push_str("verification: skipped\n");
        machine.push(("verified", "false".to_string()));
    }
    machine_section(&mut txt, &machine);
    write_file(flags.out_dir.join(format!("{stem}.verify.txt")), &txt, &mut out).map_err(|e| fail(e, &out))?;
    write_solvability(path, flags, sig, &report.conditions, &mut out).map_err(|e| fail(e, &out))?;

    for w in &report.warnings {
        out.messages.push(format!("warning: {w}"));
    }
    if !passed {
        out.messages.push("warning: verification failed; see the verify report".into());
    }
    out.exit_code = if report.warnings.is_empty() && passed {
        EXIT_OK
    } else {
        EXIT_WARNINGS
    };
    out.messages.push(format!(
        "solved case {} with {} query point(s)",
        report.case,
        problem.queries.len()
    ));
    Ok(out)
}

/// Runs only the class and solvability checks and writes
/// `<stem>.check.txt` and `<stem>.solvability.csv`.
pub fn run_check(path: &Path, flags: &Flags) -> Outcome {
    let problem = match load(path, flags) {
        Ok(p) => p,
        Err(e) => return Outcome::input_error(e),
    };
    let h = &problem.hilbert;
    let sig = h.signature();
    let report = match check_datum(h.m, &h.c, &h.scheme) {
        Ok(r) => r,
        Err(e) => {
            let (code, msgs, _) = solve_error(e.into(), Some(sig), h.m);
            return Outcome {
                exit_code: code,
                files: Vec::new(),
                messages: msgs,
            };
        }
    };
    let mut out = Outcome::default();
    let mut txt = String::new();
    class_text(&mut txt, &report, h.m);
    let violated = report.conditions.iter().any(|k| !k.satisfied);
    machine_section(
        &mut txt,
        &[
            ("case", report.case.to_string()),
            ("in_hat_h", report.class.in_hat_h().to_string()),
            ("limit_is_zero", report.class.limit_is_zero().to_string()),
            ("warnings", report.warnings.len().to_string()),
            ("conditions", report.conditions.len().to_string()),
            ("violated", violated.to_string()),
        ],
    );
    let written = prepare_out_dir(flags)
        .and_then(|_| write_file(flags.out_dir.join(format!("{}.check.txt", stem(path))), &txt, &mut out))
        .and_then(|_| write_solvability(path, flags, sig, &report.conditions, &mut out));
    if let Err(e) = written {
        return Outcome::input_error(e);
    }
    out.messages.extend(txt.lines().take_while(|l| !l.is_empty()).map(String::from));
    out.exit_code = if violated {
        EXIT_CONDITIONS
    } else if !report.warnings.is_empty() {
        EXIT_WARNINGS
    } else {
        EXIT_OK
    };
    out
}
