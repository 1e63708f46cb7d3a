//! Config loading and the two subcommands behind the `gaudin-lab` binary.

use std::fs;
use std::path::{Path, PathBuf};

use gaudin_core::flows::{self, DiagnosticsReport, EvolveOptions, FlowCurve, Method};
use gaudin_core::model::{ModelJson, PhaseState, StateJson};
use gaudin_core::verify::{self, Suite, SuiteReport};
use gaudin_core::{sample, Complex64};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

/// Tolerance on the constraints of an explicitly given initial state.
pub const STATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelJson,
    pub initial_state: InitialState,
    /// Seed for `"random"` initial states; recorded in every output.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Waypoints of an axis-aligned multi-time curve.
    pub curve: Vec<Vec<f64>>,
    pub step: f64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub project_residue_sum: bool,
    #[serde(default)]
    pub z_samples: Vec<Complex64>,
    pub outputs: Outputs,
    /// Verification suites to run after the simulation.
    #[serde(default)]
    pub checks: Vec<String>,
}

fn default_method() -> Method {
    Method::Rk4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    /// The string `"random"`.
    Keyword(String),
    Explicit(StateJson),
}

/// Output paths, relative to the directory holding the config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub trajectory_csv: PathBuf,
    pub diagnostics_json: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ChecksFailed,
    Aborted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbortInfo {
    pub reason: String,
    /// Multi-time of the last state that was computed successfully.
    pub last_good_time: Option<Vec<f64>>,
    pub samples_written: usize,
}

/// Contents of the diagnostics JSON written by `simulate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub status: Status,
    pub seed: Option<u64>,
    pub method: Method,
    pub step: f64,
    pub samples: usize,
    pub diagnostics: Option<DiagnosticsReport>,
    pub abort: Option<AbortInfo>,
    pub checks: Vec<SuiteReport>,
}

/// Result of a command: the process exit code and a message for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub message: String,
}

impl Outcome {
    fn config(msg: impl Into<String>) -> Self {
        Outcome {
            code: EXIT_CONFIG,
            message: format!("config error: {}", msg.into()),
        }
    }
}

struct Prepared {
    model: gaudin_core::model::GaudinModel,
    state: PhaseState,
    curve: FlowCurve,
    suites: Vec<Suite>,
    seed: Option<u64>,
    csv_path: PathBuf,
    json_path: PathBuf,
}

fn prepare(cfg: &RunConfig, base: &Path) -> Result<Prepared, Outcome> {
    let model = cfg.model.build().map_err(|e| Outcome::config(e.to_string()))?;
    if !(cfg.step > 0.0) || !cfg.step.is_finite() {
        return Err(Outcome::config(format!("step must be positive, got {}", cfg.step)));
    }
    let curve = FlowCurve::new(cfg.curve.clone()).map_err(|e| Outcome::config(format!("curve: {e}")))?;
    if curve.dim() != model.num_hamiltonians() {
        return Err(Outcome::config(format!(
            "curve has {} time coordinates but the model has {} Hamiltonians",
            curve.dim(),
            model.num_hamiltonians()
        )));
    }
    let suites = cfg
        .checks
        .iter()
        .map(|s| s.parse::<Suite>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Outcome::config(e.to_string()))?;
    let (state, seed) = match &cfg.initial_state {
        InitialState::Keyword(k) if k == "random" => {
            let seed = cfg.seed.unwrap_or(0);
            let state = sample::random_state(&model, &mut sample::rng(seed))
                .map_err(|e| Outcome::config(format!("cannot sample an initial state: {e}")))?;
            (state, Some(seed))
        }
        InitialState::Keyword(k) => {
            return Err(Outcome::config(format!(
                "initial_state must be \"random\" or a state object, got \"{k}\""
            )))
        }
        InitialState::Explicit(s) => {
            let state = PhaseState::try_from(s.clone()).map_err(|e| Outcome::config(format!("initial_state: {e}")))?;
            let mut state = state;
            if state.t.is_empty() {
                state.t = vec![0.0; model.num_hamiltonians()];
            }
            model
                .validate_state(&state, STATE_TOL)
                .map_err(|e| Outcome::config(format!("initial_state: {e}")))?;
            (state, cfg.seed)
        }
    };
    for &z in &cfg.z_samples {
        model
            .lax(&state, z)
            .map_err(|e| Outcome::config(format!("z sample {z}: {e}")))?;
    }
    Ok(Prepared {
        model,
        state,
        curve,
        suites,
        seed,
        csv_path: base.join(&cfg.outputs.trajectory_csv),
        json_path: base.join(&cfg.outputs.diagnostics_json),
    })
}

fn write_outputs(
    p: &Prepared,
    traj: &flows::Trajectory,
    z_samples: &[Complex64],
    report: &SimulationReport,
) -> Result<(), Outcome> {
    for path in [&p.csv_path, &p.json_path] {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir).map_err(|e| Outcome::config(format!("{}: {e}", dir.display())))?;
            }
        }
    }
    let mut buf = Vec::new();
    flows::write_csv(&p.model, traj, z_samples, p.seed, &mut buf).map_err(|e| Outcome {
        code: EXIT_ABORT,
        message: format!("numerical abort while writing the trajectory: {e}"),
    })?;
    fs::write(&p.csv_path, buf).map_err(|e| Outcome::config(format!("{}: {e}", p.csv_path.display())))?;
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&p.json_path, json + "\n").map_err(|e| Outcome::config(format!("{}: {e}", p.json_path.display())))?;
    Ok(())
}

/// Parse a run config from JSON text.
pub fn parse_config(text: &str) -> Result<RunConfig, Outcome> {
    serde_json::from_str(text).map_err(|e| Outcome::config(format!("schema: {e}")))
}

/// `gaudin-lab simulate <config.json>`.
pub fn simulate(config_path: &Path) -> Outcome {
    let text = match fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => return Outcome::config(format!("{}: {e}", config_path.display())),
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(o) => return o,
    };
    let base = config_path.parent().unwrap_or(Path::new("."));
    simulate_config(&cfg, base)
}

/// Run a parsed config; output paths are resolved against `base`.
pub fn simulate_config(cfg: &RunConfig, base: &Path) -> Outcome {
    let p = match prepare(cfg, base) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let opts = EvolveOptions {
        method: cfg.method,
        project_residue_sum: cfg.project_residue_sum,
    };
    let (traj, abort) = match flows::evolve(&p.model, &p.state, &p.curve, cfg.step, opts) {
        Ok(t) => (t, None),
        Err(a) => {
            let info = AbortInfo {
                reason: a.cause.to_string(),
                last_good_time: a.last_good_time().map(|t| t.to_vec()),
                samples_written: a.partial.samples.len(),
            };
            (a.partial, Some(info))
        }
    };
    if let Some(info) = abort {
        let report = SimulationReport {
            status: Status::Aborted,
            seed: p.seed,
            method: cfg.method,
            step: cfg.step,
            samples: traj.samples.len(),
            diagnostics: None,
            abort: Some(info.clone()),
            checks: Vec::new(),
        };
        // the partial trajectory ends at the last good state, so it can be written
        if let Err(o) = write_outputs(&p, &traj, &cfg.z_samples, &report) {
            return o;
        }
        return Outcome {
            code: EXIT_ABORT,
            message: format!(
                "numerical abort: {} (last good time {:?})",
                info.reason,
                info.last_good_time.unwrap_or_default()
            ),
        };
    }
    let diagnostics = match flows::diagnostics(&p.model, &traj, &cfg.z_samples) {
        Ok(d) => d,
        Err(e) => {
            return Outcome {
                code: EXIT_ABORT,
                message: format!("numerical abort in diagnostics: {e}"),
            }
        }
    };
    let seed = p.seed.unwrap_or(0);
    let checks: Vec<SuiteReport> = p.suites.iter().map(|&s| verify::run(s, seed)).collect();
    let failed: Vec<String> = checks.iter().filter(|r| !r.passed).map(|r| r.suite.clone()).collect();
    let report = SimulationReport {
        status: if failed.is_empty() { Status::Ok } else { Status::ChecksFailed },
        seed: p.seed,
        method: cfg.method,
        step: cfg.step,
        samples: traj.samples.len(),
        diagnostics: Some(diagnostics),
        abort: None,
        checks,
    };
    if let Err(o) = write_outputs(&p, &traj, &cfg.z_samples, &report) {
        return o;
    }
    if failed.is_empty() {
        Outcome {
            code: EXIT_OK,
            message: format!(
                "wrote {} samples to {} and diagnostics to {}",
                traj.samples.len(),
                p.csv_path.display(),
                p.json_path.display()
            ),
        }
    } else {
        Outcome {
            code: EXIT_CHECK_FAILED,
            message: format!("verification failed: {}", failed.join(", ")),
        }
    }
}

/// JSON text of a verification report.
pub fn report_json(report: &SuiteReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

/// One line per check, for humans.
pub fn report_lines(report: &SuiteReport) -> Vec<String> {
    report
        .checks
        .iter()
        .map(|c| {
            let measured = match (c.measured, &c.error) {
                (Some(v), _) => format!("{v:.3e}"),
                (None, Some(e)) => format!("error: {e}"),
                (None, None) => "n/a".into(),
            };
            let op = match c.bound {
                verify::Bound::Max => "<=",
                verify::Bound::Min => ">=",
            };
            format!(
                "{} [{}] {}: {} ({} {:e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.criterion,
                c.name,
                measured,
                op,
                c.tolerance
            )
        })
        .collect()
}

/// `gaudin-lab verify <suite> [--seed N] [--out dir]`. Returns the outcome
/// and the report (absent for an unknown suite).
pub fn verify_suite(suite: &str, seed: u64, out: Option<&Path>) -> (Outcome, Option<SuiteReport>) {
    let s: Suite = match suite.parse() {
        Ok(s) => s,
        Err(e) => return (Outcome::config(e.to_string()), None),
    };
    let report = verify::run(s, seed);
    if let Some(dir) = out {
        let path = dir.join(format!("verify_{}_seed{}.json", report.suite, seed));
        if let Err(e) = fs::create_dir_all(dir).and_then(|_| fs::write(&path, report_json(&report))) {
            return (Outcome::config(format!("{}: {e}", path.display())), Some(report));
        }
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    let outcome = if failed == 0 {
        Outcome {
            code: EXIT_OK,
            message: format!("{}: all {} checks passed", report.suite, report.checks.len()),
        }
    } else {
        Outcome {
            code: EXIT_CHECK_FAILED,
            message: format!("{}: {failed} of {} checks failed", report.suite, report.checks.len()),
        }
    };
    (outcome, Some(report))
}
