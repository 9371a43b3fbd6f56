//! Command line dispatch: `fonls <command> <config.toml> [--output DIR] [--seed N]`.
//!
//! Every command reads one TOML file, runs the named computation and drops a
//! fixed set of artifacts into the output directory:
//!
//! * `measurements.csv`: raw rows, command-specific columns
//! * `verdict.json`: the checks with their bands and outcomes
//! * `manifest.json`: config hash, effective seed, version, artifact hashes
//! * `*.dat`: two-column plot data where a scaling fit was performed
//!
//! Exit status: 0 when every asserted check passes, 1 when one fails, 2 when
//! the command line or config is unusable, 3 on a numerical failure
//! (blow-up, support-guard trip, quadrature budget), written out as
//! `diagnostic.json`. Reruns with the same config and seed are byte
//! identical; the manifest records a hash of every artifact so this is
//! checkable after the fact.

use crate::lab::commutators::verify_commutator_identities;
use crate::lab::kernel::{kernel_l1_bound_scaled, kernel_l1_direct_zero_time};
use crate::lab::maximal::verify_maximal_l2;
use crate::lab::oscillatory::{
    envelope_scaling, far_field_samples, oscillatory_integral, OscIntegralSpec,
};
use crate::lab::smoothing::{
    inhomogeneous_ratios, ratio_spread, verify_homogeneous_smoothing,
    verify_homogeneous_smoothing_dual, verify_inhomogeneous_smoothing,
    verify_interpolated_smoothing,
};
use crate::lab::{RandomEnsembleSpec, ScalingFit};
use crate::multiplier::Epsilon;
use crate::solver::{solve_picard, solve_splitstep, SolverConfig};
use crate::{Field, FonlsError, Grid, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const USAGE: &str = "usage: fonls <command> <config.toml> [--output DIR] [--seed N]
commands: solve identities smoothing interp-smoothing inhom-smoothing
          maximal osc-integral kernel-l1";

/// Entry point for the binary; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let parsed = match CliArgs::parse(args) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("{msg}\n{USAGE}");
            return 2;
        }
    };
    match execute(&parsed) {
        Ok(all_pass) => {
            if all_pass {
                0
            } else {
                1
            }
        }
        Err(err) => {
            let code = exit_code(&err);
            let diag = serde_json::json!({
                "error": err.to_string(),
                "exit": code,
            });
            eprintln!("{diag}");
            if code == 3 {
                // best effort: leave the diagnostic next to any artifacts
                let _ = std::fs::create_dir_all(&parsed.output);
                let _ = std::fs::write(
                    parsed.output.join("diagnostic.json"),
                    format!("{:#}\n", diag),
                );
            }
            code
        }
    }
}

fn exit_code(err: &FonlsError) -> i32 {
    match err {
        FonlsError::Config(_)
        | FonlsError::Parse { .. }
        | FonlsError::InvalidGrid(_)
        | FonlsError::AxisOutOfRange { .. }
        | FonlsError::Io(_) => 2,
        _ => 3,
    }
}

struct CliArgs {
    command: String,
    config_path: PathBuf,
    output: PathBuf,
    seed_override: Option<u64>,
}

impl CliArgs {
    fn parse(args: &[String]) -> std::result::Result<CliArgs, String> {
        if args.len() < 2 {
            return Err("expected a command and a config file".into());
        }
        let command = args[0].clone();
        let config_path = PathBuf::from(&args[1]);
        let mut output: Option<PathBuf> = None;
        let mut seed_override = None;
        let mut i = 2;
        while i < args.len() {
            match args[i].as_str() {
                "--output" => {
                    let v = args.get(i + 1).ok_or("--output needs a directory")?;
                    output = Some(PathBuf::from(v));
                    i += 2;
                }
                "--seed" => {
                    let v = args.get(i + 1).ok_or("--seed needs an integer")?;
                    seed_override =
                        Some(v.parse::<u64>().map_err(|e| format!("bad --seed: {e}"))?);
                    i += 2;
                }
                other => return Err(format!("unknown argument '{other}'")),
            }
        }
        let output = output.unwrap_or_else(|| PathBuf::from(format!("{command}-out")));
        Ok(CliArgs {
            command,
            config_path,
            output,
            seed_override,
        })
    }
}

fn execute(args: &CliArgs) -> Result<bool> {
    let config_text = std::fs::read_to_string(&args.config_path)?;
    let mut sink = ArtifactSink::create(&args.output)?;
    let mut run = RunOutcome::new(&args.command, &config_text);

    match args.command.as_str() {
        "solve" => cmd_solve(&config_text, args, &mut sink, &mut run)?,
        "identities" => cmd_identities(&config_text, &mut sink, &mut run)?,
        "smoothing" => cmd_smoothing(&config_text, args, &mut sink, &mut run)?,
        "interp-smoothing" => cmd_interp(&config_text, args, &mut sink, &mut run)?,
        "inhom-smoothing" => cmd_inhom(&config_text, args, &mut sink, &mut run)?,
        "maximal" => cmd_maximal(&config_text, args, &mut sink, &mut run)?,
        "osc-integral" => cmd_osc(&config_text, &mut sink, &mut run)?,
        "kernel-l1" => cmd_kernel(&config_text, &mut sink, &mut run)?,
        other => {
            return Err(FonlsError::Config(format!("unknown command '{other}'")));
        }
    }
    run.finish(&mut sink)
}

/// Collected checks plus the manifest ingredients for one run.
struct RunOutcome {
    command: String,
    config_sha256: String,
    seed: Option<u64>,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper: Option<f64>,
    asserted: bool,
    pass: bool,
}

impl RunOutcome {
    fn new(command: &str, config_text: &str) -> RunOutcome {
        RunOutcome {
            command: command.to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed: None,
            checks: Vec::new(),
        }
    }

    /// A check that must land inside [lower, upper] for exit code 0.
    fn assert_band(&mut self, name: &str, value: f64, lower: Option<f64>, upper: Option<f64>) {
        let pass = value.is_finite()
            && lower.map_or(true, |lo| value >= lo)
            && upper.map_or(true, |hi| value <= hi);
        self.checks.push(Check {
            name: name.to_string(),
            value,
            lower,
            upper,
            asserted: true,
            pass,
        });
    }

    /// A value recorded for the report without gating the exit status.
    fn report(&mut self, name: &str, value: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            lower: None,
            upper: None,
            asserted: false,
            pass: true,
        });
    }

    fn finish(self, sink: &mut ArtifactSink) -> Result<bool> {
        let all_pass = self.checks.iter().all(|c| c.pass);
        let verdict = serde_json::json!({
            "command": self.command,
            "checks": self.checks,
            "pass": all_pass,
        });
        sink.write("verdict.json", format!("{:#}\n", verdict).as_bytes())?;

        let mut artifacts = sink.hashed_entries()?;
        artifacts.sort_by(|a, b| a.file.cmp(&b.file));
        let manifest = Manifest {
            command: self.command,
            config_sha256: self.config_sha256,
            seed: self.seed,
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            artifacts,
        };
        let body = serde_json::to_string_pretty(&manifest)
            .map_err(|e| FonlsError::Config(format!("manifest serialization failed: {e}")))?;
        sink.write_untracked("manifest.json", format!("{body}\n").as_bytes())?;
        Ok(all_pass)
    }
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    package: String,
    version: String,
    artifacts: Vec<ArtifactEntry>,
}

#[derive(Serialize)]
struct ArtifactEntry {
    file: String,
    sha256: String,
}

struct ArtifactSink {
    dir: PathBuf,
    names: Vec<String>,
}

impl ArtifactSink {
    fn create(dir: &Path) -> Result<ArtifactSink> {
        std::fs::create_dir_all(dir)?;
        Ok(ArtifactSink {
            dir: dir.to_path_buf(),
            names: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.names.push(name.to_string());
        Ok(())
    }

    /// For the manifest itself, which cannot list its own hash.
    fn write_untracked(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn track(&mut self, name: &str) {
        self.names.push(name.to_string());
    }

    fn hashed_entries(&self) -> Result<Vec<ArtifactEntry>> {
        let mut out = Vec::with_capacity(self.names.len());
        for name in &self.names {
            let bytes = std::fs::read(self.dir.join(name))?;
            out.push(ArtifactEntry {
                file: name.clone(),
                sha256: sha256_hex(&bytes),
            });
        }
        Ok(out)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| FonlsError::Config(format!("config: {e}")))
}

/// Shortest exact decimal, exponent form; keeps CSV rows byte-stable.
fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    points: Vec<usize>,
    half_length: Vec<f64>,
}

impl GridSection {
    fn build(&self) -> Result<Grid> {
        Grid::new(&self.points, &self.half_length)
    }
}

fn effective_ensemble(
    ens: &RandomEnsembleSpec,
    args: &CliArgs,
    run: &mut RunOutcome,
) -> RandomEnsembleSpec {
    let mut e = ens.clone();
    if let Some(seed) = args.seed_override {
        e.seed = seed;
    }
    run.seed = Some(e.seed);
    e
}

/// Centered bump amp * exp(-|x|^2 / width^2).
fn gaussian_data(grid: &Grid, amplitude: f64, width: f64) -> Result<Field> {
    if !(amplitude.is_finite() && amplitude != 0.0) {
        return Err(FonlsError::Config(format!(
            "amplitude must be finite and nonzero, got {amplitude}"
        )));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(FonlsError::Config(format!(
            "width must be positive, got {width}"
        )));
    }
    Ok(Field::from_fn(grid.clone(), |x| {
        let r2: f64 = x.iter().map(|&a| a * a).sum();
        Complex64::new(amplitude * (-r2 / (width * width)).exp(), 0.0)
    }))
}

fn fit_dat(fit: &ScalingFit) -> String {
    let mut s = String::from("# x y\n");
    for (x, y) in fit.xs.iter().zip(&fit.ys) {
        let _ = writeln!(s, "{} {}", num(*x), num(*y));
    }
    s
}

// ---------------------------------------------------------------- solve

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveFile {
    grid: GridSection,
    initial: InitialSection,
    solver: SolverConfig,
    #[serde(default)]
    check: Option<SplitstepCheck>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSection {
    amplitude: f64,
    width: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitstepCheck {
    splitstep_substeps: usize,
    #[serde(default = "default_agreement")]
    agreement_limit: f64,
}

fn default_agreement() -> f64 {
    1e-4
}

fn cmd_solve(
    text: &str,
    args: &CliArgs,
    sink: &mut ArtifactSink,
    run: &mut RunOutcome,
) -> Result<()> {
    let file: SolveFile = parse_toml(text)?;
    if args.seed_override.is_some() {
        return Err(FonlsError::Config(
            "solve takes no --seed: the initial datum is deterministic".into(),
        ));
    }
    let grid = file.grid.build()?;
    let u0 = gaussian_data(&grid, file.initial.amplitude, file.initial.width)?;
    let sol = solve_picard(&u0, &file.solver)?;

    let mut csv = String::from("t,l2,sup\n");
    for (t, f) in sol.trace.times().iter().zip(sol.trace.fields()) {
        let sup = f.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let _ = writeln!(csv, "{},{},{}", num(*t), num(f.l2_norm()), num(sup));
    }
    sink.write("measurements.csv", csv.as_bytes())?;

    let report_json = serde_json::to_string_pretty(&sol.report)
        .map_err(|e| FonlsError::Config(format!("report serialization failed: {e}")))?;
    sink.write("picard.json", format!("{report_json}\n").as_bytes())?;

    let final_field = sol.trace.fields().last().expect("trace is never empty");
    crate::fieldio::save_field(final_field, &sink.path("final_state.field"))?;
    sink.track("final_state.field");
    sink.track("final_state.field.json");

    run.report("accepted_horizon", sol.report.accepted_horizon);
    run.report("halvings", sol.report.halvings as f64);
    run.report("iterations", sol.report.iterations as f64);
    let worst_ratio = sol.report.ratios.iter().copied().fold(0.0, f64::max);
    run.assert_band(
        "contraction_ratio",
        worst_ratio,
        None,
        Some(file.solver.contraction_target),
    );

    if let Some(check) = &file.check {
        let mut alt = file.solver.clone();
        alt.horizon = sol.report.accepted_horizon;
        alt.substeps = check.splitstep_substeps;
        let ss = solve_splitstep(&u0, &alt)?;
        let ss_final = ss.trace.fields().last().expect("trace is never empty");
        let rel = final_field.l2_distance(ss_final)? / final_field.l2_norm();
        run.assert_band("splitstep_agreement", rel, None, Some(check.agreement_limit));
    }
    Ok(())
}

// ----------------------------------------------------------- identities

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentitiesFile {
    grid: GridSection,
    data: InitialSection,
    experiment: IdentitiesExperiment,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentitiesExperiment {
    ts: Vec<f64>,
    eps: Vec<Epsilon>,
    order1_limit: f64,
    order2_limit: f64,
}

fn cmd_identities(text: &str, sink: &mut ArtifactSink, run: &mut RunOutcome) -> Result<()> {
    let file: IdentitiesFile = parse_toml(text)?;
    let grid = file.grid.build()?;
    let f = gaussian_data(&grid, file.data.amplitude, file.data.width)?;
    let report = verify_commutator_identities(&f, &file.experiment.ts, &file.experiment.eps)?;

    let mut csv = String::from("order,axis_j,axis_k,t,eps,residual,relative\n");
    for row in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            row.order,
            row.axis_j,
            row.axis_k,
            num(row.t),
            row.eps,
            num(row.residual),
            num(row.relative)
        );
    }
    sink.write("measurements.csv", csv.as_bytes())?;

    run.assert_band(
        "order1_relative",
        report.max_relative(1),
        None,
        Some(file.experiment.order1_limit),
    );
    run.assert_band(
        "order2_relative",
        report.max_relative(2),
        None,
        Some(file.experiment.order2_limit),
    );
    Ok(())
}

// ------------------------------------------------------------ smoothing

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SmoothingFile {
    grid: GridSection,
    ensemble: RandomEnsembleSpec,
    experiment: SmoothingExperiment,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SmoothingExperiment {
    /// "derivative-gain": D^{3/2} of the solution against the L2 norm of the
    /// data. "dual": the solution itself against the homogeneous -3/2 norm.
    variant: String,
    rs: Vec<f64>,
    horizon: f64,
    eps: Epsilon,
    slope_band: [f64; 2],
}

fn cmd_smoothing(
    text: &str,
    args: &CliArgs,
    sink: &mut ArtifactSink,
    run: &mut RunOutcome,
) -> Result<()> {
    let file: SmoothingFile = parse_toml(text)?;
    let grid = file.grid.build()?;
    let ens = effective_ensemble(&file.ensemble, args, run);
    let ex = &file.experiment;
    let fit = match ex.variant.as_str() {
        "derivative-gain" => {
            verify_homogeneous_smoothing(&grid, &ens, &ex.rs, ex.horizon, ex.eps)?
        }
        "dual" => verify_homogeneous_smoothing_dual(&grid, &ens, &ex.rs, ex.horizon, ex.eps)?,
        other => {
            return Err(FonlsError::Config(format!(
                "variant must be 'derivative-gain' or 'dual', got '{other}'"
            )));
        }
    };

    let mut csv = String::from("cube_side,mean_ratio\n");
    for (x, y) in fit.xs.iter().zip(&fit.ys) {
        let _ = writeln!(csv, "{},{}", num(*x), num(*y));
    }
    sink.write("measurements.csv", csv.as_bytes())?;
    sink.write("scaling.dat", fit_dat(&fit).as_bytes())?;

    run.assert_band(
        "slope",
        fit.slope,
        Some(ex.slope_band[0]),
        Some(ex.slope_band[1]),
    );
    run.report("max_residual", fit.max_residual);
    Ok(())
}

// ----------------------------------------------------- interp-smoothing

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InterpFile {
    grid: GridSection,
    ensemble: RandomEnsembleSpec,
    experiment: InterpExperiment,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InterpExperiment {
    rs: Vec<f64>,
    ts: Vec<f64>,
    eps: Epsilon,
    t_slope_band: [f64; 2],
    r_slope_band: [f64; 2],
}

fn cmd_interp(
    text: &str,
    args: &CliArgs,
    sink: &mut ArtifactSink,
    run: &mut RunOutcome,
) -> Result<()> {
    let file: InterpFile = parse_toml(text)?;
    let grid = file.grid.build()?;
    let ens = effective_ensemble(&file.ensemble, args, run);
    let ex = &file.experiment;
    let (t_fit, r_fit) = verify_interpolated_smoothing(&grid, &ens, &ex.rs, &ex.ts, ex.eps)?;

    let mut csv = String::from("sweep,x,mean_ratio\n");
    for (x, y) in t_fit.xs.iter().zip(&t_fit.ys) {
        let _ = writeln!(csv, "horizon,{},{}", num(*x), num(*y));
    }
    for (x, y) in r_fit.xs.iter().zip(&r_fit.ys) {
        let _ = writeln!(csv, "cube,{},{}", num(*x), num(*y));
    }
    sink.write("measurements.csv", csv.as_bytes())?;
    sink.write("horizon.dat", fit_dat(&t_fit).as_bytes())?;
    sink.write("cube.dat", fit_dat(&r_fit).as_bytes())?;

    run.assert_band(
        "t_slope",
        t_fit.slope,
        Some(ex.t_slope_band[0]),
        Some(ex.t_slope_band[1]),
    );
    run.assert_band(
        "r_slope",
        r_fit.slope,
        Some(ex.r_slope_band[0]),
        Some(ex.r_slope_band[1]),
    );
    Ok(())
}

// ------------------------------------------------------ inhom-smoothing

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InhomFile {
    grid: GridSection,
    ensemble: RandomEnsembleSpec,
    experiment: InhomExperiment,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InhomExperiment {
    ts: Vec<f64>,
    eps: Epsilon,
    slope_limit: f64,
    spread_limit: f64,
}

fn cmd_inhom(
    text: &str,
    args: &CliArgs,
    sink: &mut ArtifactSink,
    run: &mut RunOutcome,
) -> Result<()> {
    let file: InhomFile = parse_toml(text)?;
    let grid = file.grid.build()?;
    let ens = effective_ensemble(&file.ensemble, args, run);
    let ex = &file.experiment;
    let rows = inhomogeneous_ratios(&grid, &ens, &ex.ts, ex.eps)?;
    let spread = ratio_spread(&rows);
    let fit = verify_inhomogeneous_smoothing(&grid, &ens, &ex.ts, ex.eps)?;

    let mut csv = String::from("horizon,member,ratio\n");
    for (ti, row) in rows.iter().enumerate() {
        for (m, r) in row.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{}", num(ex.ts[ti]), m, num(*r));
        }
    }
    sink.write("measurements.csv", csv.as_bytes())?;
    sink.write("scaling.dat", fit_dat(&fit).as_bytes())?;

    run.assert_band("t_slope", fit.slope, None, Some(ex.slope_limit));
    run.assert_band("ratio_spread", spread, None, Some(ex.spread_limit));
    Ok(())
}

// -------------------------------------------------------------- maximal

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaximalFile {
    grid: GridSection,
    ensemble: RandomEnsembleSpec,
    experiment: MaximalExperiment,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaximalExperiment {
    svals: Vec<f64>,
    /// The Sobolev order at which max/median is asserted; the others are
    /// recorded unasserted.
    assert_s: f64,
    horizon: f64,
    eps: Epsilon,
    time_samples: usize,
    spread_limit: f64,
    doubling_limit: f64,
}

fn cmd_maximal(
    text: &str,
    args: &CliArgs,
    sink: &mut ArtifactSink,
    run: &mut RunOutcome,
) -> Result<()> {
    let file: MaximalFile = parse_toml(text)?;
    let grid = file.grid.build()?;
    let ens = effective_ensemble(&file.ensemble, args, run);
    let ex = &file.experiment;
    if !ex.svals.iter().any(|&s| s == ex.assert_s) {
        return Err(FonlsError::Config(format!(
            "assert_s = {} is not among svals {:?}",
            ex.assert_s, ex.svals
        )));
    }
    let base = verify_maximal_l2(&grid, &ens, &ex.svals, ex.horizon, ex.eps, ex.time_samples)?;
    let doubled = verify_maximal_l2(
        &grid,
        &ens,
        &ex.svals,
        ex.horizon,
        ex.eps,
        2 * (ex.time_samples - 1) + 1,
    )?;

    let mut csv = String::from("s,member,ratio,ratio_doubled\n");
    let mut worst_change = 0.0f64;
    for (i, &s) in ex.svals.iter().enumerate() {
        for m in 0..base.ratios[i].len() {
            let a = base.ratios[i][m];
            let b = doubled.ratios[i][m];
            worst_change = worst_change.max(((a - b) / b).abs());
            let _ = writeln!(csv, "{},{},{},{}", num(s), m, num(a), num(b));
        }
        let check_name = format!("max_over_median_s_{s}");
        if s == ex.assert_s {
            run.assert_band(&check_name, base.max_over_median(i), None, Some(ex.spread_limit));
        } else {
            run.report(&check_name, base.max_over_median(i));
        }
    }
    sink.write("measurements.csv", csv.as_bytes())?;
    run.assert_band(
        "sample_doubling_change",
        worst_change,
        None,
        Some(ex.doubling_limit),
    );
    Ok(())
}

// --------------------------------------------------------- osc-integral

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OscFile {
    experiment: OscExperiment,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OscExperiment {
    ks: Vec<u32>,
    t: f64,
    eps: Epsilon,
    /// r for the small-argument bound |I| <= (3/2) 2^k.
    small_r: f64,
    /// Shell scale for the stationary-window envelope fit.
    envelope_k: u32,
    envelope_band: [f64; 2],
    /// Shell scales for far-field samples past the stationary window.
    far_ks: Vec<u32>,
}

fn cmd_osc(text: &str, sink: &mut ArtifactSink, run: &mut RunOutcome) -> Result<()> {
    let file: OscFile = parse_toml(text)?;
    let ex = &file.experiment;

    let mut csv = String::from("check,k,r,magnitude,bound\n");
    for &k in &ex.ks {
        let spec = OscIntegralSpec {
            k,
            t: ex.t,
            r: ex.small_r,
            eps: ex.eps,
        };
        let mag = oscillatory_integral(&spec)?.norm();
        let bound = 1.5 * (1u64 << k) as f64;
        let _ = writeln!(csv, "small_r,{},{},{},{}", k, num(ex.small_r), num(mag), num(bound));
        run.assert_band(&format!("small_r_k_{k}"), mag, None, Some(bound));
    }

    let fit = envelope_scaling(ex.envelope_k, ex.t, ex.eps)?;
    sink.write("envelope.dat", fit_dat(&fit).as_bytes())?;
    run.assert_band(
        "envelope_slope",
        fit.slope,
        Some(ex.envelope_band[0]),
        Some(ex.envelope_band[1]),
    );

    for &k in &ex.far_ks {
        let (c3, samples) = far_field_samples(k, ex.t, ex.eps)?;
        let mut worst = 0.0f64;
        for (r, mag) in &samples {
            let bound = c3 / (r * r * r);
            worst = worst.max(mag / bound);
            let _ = writeln!(csv, "far_field,{},{},{},{}", k, num(*r), num(*mag), num(bound));
        }
        run.assert_band(&format!("far_field_k_{k}"), worst, None, Some(1.0));
    }
    sink.write("measurements.csv", csv.as_bytes())?;
    Ok(())
}

// ------------------------------------------------------------ kernel-l1

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelFile {
    experiment: KernelExperiment,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelExperiment {
    ks: Vec<u32>,
    t: f64,
    eps: Epsilon,
    dim: usize,
    slope_limit: f64,
    #[serde(default = "default_factor")]
    rmax_factor: f64,
    #[serde(default = "default_factor")]
    resolution_factor: f64,
    /// When set (dim 1 only), cross-check the t = 0 transform route against
    /// direct summation at this shell scale.
    #[serde(default)]
    zero_time_k: Option<u32>,
    #[serde(default = "default_zero_time_limit")]
    zero_time_limit: f64,
}

fn default_factor() -> f64 {
    1.0
}

fn default_zero_time_limit() -> f64 {
    1e-6
}

fn cmd_kernel(text: &str, sink: &mut ArtifactSink, run: &mut RunOutcome) -> Result<()> {
    let file: KernelFile = parse_toml(text)?;
    let ex = &file.experiment;
    if ex.ks.len() < 2 {
        return Err(FonlsError::Config(
            "kernel-l1 needs at least two shell scales to measure growth".into(),
        ));
    }

    let mut bounds = Vec::with_capacity(ex.ks.len());
    let mut csv = String::from("k,l1_bound\n");
    for &k in &ex.ks {
        let b = kernel_l1_bound_scaled(
            k,
            ex.t,
            ex.eps,
            ex.dim,
            ex.rmax_factor,
            ex.resolution_factor,
        )?;
        let _ = writeln!(csv, "{},{}", k, num(b));
        bounds.push(b);
    }
    sink.write("measurements.csv", csv.as_bytes())?;

    let mut dat = String::from("# k l1_bound\n");
    for (&k, &b) in ex.ks.iter().zip(&bounds) {
        let _ = writeln!(dat, "{} {}", k, num(b));
    }
    sink.write("growth.dat", dat.as_bytes())?;

    let worst_slope = ex
        .ks
        .windows(2)
        .zip(bounds.windows(2))
        .map(|(kw, bw)| (bw[1] / bw[0]).log2() / (kw[1] - kw[0]) as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    run.assert_band("log2_growth_per_k", worst_slope, None, Some(ex.slope_limit));

    if let Some(zk) = ex.zero_time_k {
        if ex.dim != 1 {
            return Err(FonlsError::Config(
                "the zero-time cross-check is a dim = 1 route".into(),
            ));
        }
        let fft_route = kernel_l1_bound_scaled(zk, 0.0, ex.eps, 1, ex.rmax_factor, 1.0)?;
        let direct = kernel_l1_direct_zero_time(zk, ex.rmax_factor)?;
        let rel = ((fft_route - direct) / direct).abs();
        run.assert_band("zero_time_agreement", rel, None, Some(ex.zero_time_limit));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_missing_arguments() {
        assert!(CliArgs::parse(&[]).is_err());
        assert!(CliArgs::parse(&["solve".into()]).is_err());
        assert!(CliArgs::parse(&["solve".into(), "x.toml".into(), "--seed".into()]).is_err());
        assert!(CliArgs::parse(&[
            "solve".into(),
            "x.toml".into(),
            "--frobnicate".into()
        ])
        .is_err());
    }

    #[test]
    fn parses_flags_and_defaults_output_dir() {
        let a = CliArgs::parse(&[
            "maximal".into(),
            "cfg.toml".into(),
            "--seed".into(),
            "99".into(),
        ])
        .unwrap();
        assert_eq!(a.command, "maximal");
        assert_eq!(a.seed_override, Some(99));
        assert_eq!(a.output, PathBuf::from("maximal-out"));
        let b = CliArgs::parse(&[
            "osc-integral".into(),
            "cfg.toml".into(),
            "--output".into(),
            "/tmp/xyz".into(),
        ])
        .unwrap();
        assert_eq!(b.output, PathBuf::from("/tmp/xyz"));
    }

    #[test]
    fn missing_config_file_is_a_config_failure() {
        let args = CliArgs {
            command: "identities".into(),
            config_path: PathBuf::from("/nonexistent/none.toml"),
            output: std::env::temp_dir().join("fonls-cli-test-none"),
            seed_override: None,
        };
        let err = execute(&args).unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn unknown_command_is_a_config_failure() {
        let dir = std::env::temp_dir().join("fonls-cli-test-unknown");
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("empty.toml");
        std::fs::write(&cfg, "").unwrap();
        let args = CliArgs {
            command: "frobnicate".into(),
            config_path: cfg,
            output: dir,
            seed_override: None,
        };
        let err = execute(&args).unwrap_err();
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn number_formatting_round_trips() {
        for &x in &[1.0, -0.125, 3.5e-11, 6908.999384] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
