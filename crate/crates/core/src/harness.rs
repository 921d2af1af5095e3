//! Experiment configs, runs and artifacts for the command-line tool.
//!
//! A config is an [`ini`](crate::ini) document:
//!
//! ```text
//! seed = 42
//! output_dir = out/pd_step
//!
//! [plant]
//! profile = kao-14in-default
//!
//! [sim]
//! step_size = 1e-3
//! duration = 3
//! theta_desired = 60 deg 50 deg
//!
//! [controller pd]
//! source = inline
//! kp = 25 25
//! kd = 10 10
//! ```
//!
//! Relative paths (`output_dir`, `file`, `base_file`) resolve against the
//! directory holding the config. All artifacts of a run are computed in
//! memory first and then written through a temp file and rename, so a
//! failed run leaves nothing behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::controllers::{baseline_gains, Controller, ControllerKind, PdGains, BASELINE_OMEGA};
use crate::error::{Error, Result};
use crate::fuzzy::FuzzyController;
use crate::ga::{optimize, GaConfig, OptimizeResult, Task};
use crate::ini::{Document, Entry, Section};
use crate::integrator::{simulate, SimConfig, SimTrace, TRACE_COLUMNS};
use crate::metrics::{analyze_with, ComparisonTable, ResponseConventions, TransientMetrics, JOINT_NAMES};
use crate::plant::{JointState, PlantParams, Vec2};

/// Where a controller's parameters come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSource {
    /// Given in the config (or defaults), already resolved.
    Inline(Controller),
    /// Read from a gain or fuzzy definition file at load time.
    File { path: PathBuf, controller: Controller },
    /// Produced by the GA at run time.
    Tune(Task),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    pub source: ParamSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub plant: PlantParams,
    pub sim: SimConfig,
    pub conventions: ResponseConventions,
    pub ga: GaConfig,
    /// In file order.
    pub controllers: Vec<ControllerSpec>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

const ROOT_KEYS: &[&str] = &["seed", "output_dir"];
const PLANT_KEYS: &[&str] = &["profile", "a1", "a2", "a3", "gravity", "disturbance"];
const SIM_KEYS: &[&str] = &[
    "step_size",
    "duration",
    "theta_desired",
    "theta_dot_desired",
    "theta_ddot_desired",
    "initial_theta",
    "initial_theta_dot",
];
const METRICS_KEYS: &[&str] = &["rise_low", "rise_high", "settling_band"];
const GA_KEYS: &[&str] = &[
    "population_size",
    "generations",
    "crossover_rate",
    "mutation_rate",
    "mutation_sigma",
    "tournament_size",
    "elite_count",
    "fitness_step_size",
];

/// Parses `"<value> deg|rad"` pairs, e.g. `60 deg 50 deg`, into radians.
pub fn parse_angles(entry: &Entry) -> Result<Vec2> {
    let tokens: Vec<&str> = entry.value.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
    if tokens.len() != 4 {
        return Err(entry.error("expected two angles with units, e.g. '60 deg 50 deg'".into()));
    }
    let mut out = [0.0; 2];
    for (j, pair) in tokens.chunks(2).enumerate() {
        let v: f64 = pair[0]
            .parse()
            .map_err(|_| entry.error(format!("cannot parse '{}'", pair[0])))?;
        out[j] = match pair[1] {
            "deg" => v.to_radians(),
            "rad" => v,
            u => return Err(entry.error(format!("unit must be 'deg' or 'rad', found '{u}'"))),
        };
        if !out[j].is_finite() {
            return Err(entry.error("angle must be finite".into()));
        }
    }
    Ok(Vec2::new(out[0], out[1]))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn located<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => Error::Config(format!("{}: {other}", path.display())),
    })
}

/// Loads a PD gain file or fuzzy definition, depending on `kind`.
pub fn load_controller(kind: ControllerKind, path: &Path) -> Result<Controller> {
    let text = read_text(path)?;
    located(
        path,
        match kind {
            ControllerKind::Pd => PdGains::from_text(&text).map(Controller::Pd),
            ControllerKind::GaPd => PdGains::from_text(&text).map(Controller::GaPd),
            ControllerKind::Flc => FuzzyController::from_text(&text).map(Controller::Flc),
            ControllerKind::GaFlc => FuzzyController::from_text(&text).map(Controller::GaFlc),
        },
    )
}

/// Serializes a controller in its native file format.
pub fn controller_text(controller: &Controller) -> String {
    match controller {
        Controller::Pd(g) | Controller::GaPd(g) => g.to_text(),
        Controller::Flc(f) | Controller::GaFlc(f) => f.to_text(),
    }
}

fn definition_file_name(kind: ControllerKind) -> String {
    let ext = if kind.is_fuzzy() { "fuzzy" } else { "gains" };
    format!("controller_{}.{ext}", kind.as_str())
}

fn parse_plant(sec: Option<&Section>) -> Result<PlantParams> {
    let Some(sec) = sec else {
        return Ok(PlantParams::default());
    };
    sec.deny_unknown(PLANT_KEYS)?;
    let inline = ["a1", "a2", "a3"].map(|k| sec.get(k));
    let mut plant = match (sec.get("profile"), inline) {
        (Some(p), [None, None, None]) => {
            PlantParams::profile(&p.value).ok_or_else(|| p.error(format!("unknown profile '{}'", p.value)))?
        }
        (None, [Some(a1), Some(a2), Some(a3)]) => {
            PlantParams::balanced(a1.parse()?, a2.parse()?, a3.parse()?).map_err(|e| a1.error(e.to_string()))?
        }
        (None, [None, None, None]) => PlantParams::default(),
        _ => {
            return Err(Error::Parse {
                line: sec.line,
                msg: "[plant] takes either 'profile' or all of a1, a2, a3".into(),
            })
        }
    };
    if let Some(g) = sec.get("gravity") {
        let v: Vec<f64> = g.parse_list(2)?;
        plant = plant.with_gravity(v[0], v[1]).map_err(|e| g.error(e.to_string()))?;
    }
    if let Some(d) = sec.get("disturbance") {
        let v: Vec<f64> = d.parse_list(2)?;
        plant = plant
            .with_disturbance(Vec2::new(v[0], v[1]))
            .map_err(|e| d.error(e.to_string()))?;
    }
    Ok(plant)
}

fn parse_sim(sec: Option<&Section>) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    let Some(sec) = sec else {
        return Ok(cfg);
    };
    sec.deny_unknown(SIM_KEYS)?;
    if let Some(h) = sec.parse_opt("step_size")? {
        cfg.step_size = h;
    }
    if let Some(d) = sec.parse_opt("duration")? {
        cfg.duration = d;
    }
    let angles = |key: &str| sec.get(key).map(parse_angles).transpose();
    if let Some(v) = angles("theta_desired")? {
        cfg.theta_desired = v;
    }
    if let Some(v) = angles("theta_dot_desired")? {
        cfg.theta_dot_desired = v;
    }
    if let Some(v) = angles("theta_ddot_desired")? {
        cfg.theta_ddot_desired = v;
    }
    let theta = angles("initial_theta")?.unwrap_or_else(Vec2::zeros);
    let theta_dot = angles("initial_theta_dot")?.unwrap_or_else(Vec2::zeros);
    cfg.initial_state = JointState::new(theta, theta_dot);
    cfg.validate().map_err(|e| Error::Parse {
        line: sec.line,
        msg: e.to_string(),
    })?;
    Ok(cfg)
}

fn parse_conventions(sec: Option<&Section>) -> Result<ResponseConventions> {
    let mut c = ResponseConventions::default();
    if let Some(sec) = sec {
        sec.deny_unknown(METRICS_KEYS)?;
        if let Some(v) = sec.parse_opt("rise_low")? {
            c.rise_low = v;
        }
        if let Some(v) = sec.parse_opt("rise_high")? {
            c.rise_high = v;
        }
        if let Some(v) = sec.parse_opt("settling_band")? {
            c.settling_band = v;
        }
        c.validate().map_err(|e| Error::Parse {
            line: sec.line,
            msg: e.to_string(),
        })?;
    }
    Ok(c)
}

fn parse_ga(sec: Option<&Section>, seed: u64) -> Result<GaConfig> {
    let mut g = GaConfig {
        seed,
        ..GaConfig::default()
    };
    if let Some(sec) = sec {
        sec.deny_unknown(GA_KEYS)?;
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = sec.parse_opt(stringify!($field))? {
                    g.$field = v;
                }
            )*};
        }
        set!(
            population_size,
            generations,
            crossover_rate,
            mutation_rate,
            mutation_sigma,
            tournament_size,
            elite_count
        );
        if let Some(h) = sec.parse_opt("fitness_step_size")? {
            g.fitness_step_size = Some(h);
        }
        g.validate().map_err(|e| Error::Parse {
            line: sec.line,
            msg: e.to_string(),
        })?;
    }
    Ok(g)
}

/// Default-geometry fuzzy controller with optional inline scaling.
fn inline_fuzzy(sec: &Section) -> Result<FuzzyController> {
    let mut f = FuzzyController::default();
    if let Some(v) = sec.parse_opt("error_gain")? {
        f.scaling.error = v;
    }
    if let Some(v) = sec.parse_opt("rate_gain")? {
        f.scaling.rate = v;
    }
    if let Some(v) = sec.parse_opt("output_gain")? {
        f.scaling.output = v;
    }
    if let Some(v) = sec.parse_opt("resolution")? {
        f.resolution = v;
    }
    f.validate().map_err(|e| Error::Parse {
        line: sec.line,
        msg: e.to_string(),
    })?;
    Ok(f)
}

fn inline_pd(sec: &Section) -> Result<PdGains> {
    let base = baseline_gains(BASELINE_OMEGA);
    let pair = |key: &str, default: Vec2| -> Result<Vec2> {
        match sec.get(key) {
            Some(e) => {
                let v: Vec<f64> = e.parse_list(2)?;
                Ok(Vec2::new(v[0], v[1]))
            }
            None => Ok(default),
        }
    };
    let kp = pair("kp", base.kp())?;
    let kd = pair("kd", base.kd())?;
    PdGains::new(kp, kd).map_err(|e| Error::Parse {
        line: sec.line,
        msg: e.to_string(),
    })
}

fn parse_controller(sec: &Section, kind: ControllerKind, base_dir: &Path) -> Result<ControllerSpec> {
    let default_source = match kind {
        ControllerKind::GaPd | ControllerKind::GaFlc => "tune",
        _ => "inline",
    };
    let source = sec.get("source").map_or(default_source, |e| e.value.as_str());
    let fuzzy_inline: &[&str] = &["source", "error_gain", "rate_gain", "output_gain", "resolution"];
    let source = match source {
        "inline" => {
            let controller = if kind.is_fuzzy() {
                sec.deny_unknown(fuzzy_inline)?;
                let f = inline_fuzzy(sec)?;
                if kind == ControllerKind::Flc {
                    Controller::Flc(f)
                } else {
                    Controller::GaFlc(f)
                }
            } else {
                sec.deny_unknown(&["source", "kp", "kd"])?;
                let g = inline_pd(sec)?;
                if kind == ControllerKind::Pd {
                    Controller::Pd(g)
                } else {
                    Controller::GaPd(g)
                }
            };
            ParamSource::Inline(controller)
        }
        "file" => {
            sec.deny_unknown(&["source", "file"])?;
            let path = base_dir.join(&sec.require("file")?.value);
            let controller = load_controller(kind, &path)?;
            ParamSource::File { path, controller }
        }
        "tune" => match kind {
            ControllerKind::GaPd => {
                sec.deny_unknown(&["source"])?;
                ParamSource::Tune(Task::Pd)
            }
            ControllerKind::GaFlc => {
                let base = match sec.get("base_file") {
                    Some(e) => {
                        sec.deny_unknown(&["source", "base_file"])?;
                        match load_controller(ControllerKind::Flc, &base_dir.join(&e.value))? {
                            Controller::Flc(f) => f,
                            _ => unreachable!("fuzzy kind loads a fuzzy controller"),
                        }
                    }
                    None => {
                        sec.deny_unknown(fuzzy_inline)?;
                        inline_fuzzy(sec)?
                    }
                };
                ParamSource::Tune(Task::Flc { base })
            }
            _ => {
                return Err(Error::Parse {
                    line: sec.line,
                    msg: format!("controller {} cannot be tuned; use ga-pd or ga-flc", kind.as_str()),
                })
            }
        },
        other => {
            return Err(sec.require("source")?.error(format!(
                "unknown source '{other}' (expected inline, file or tune)"
            )))
        }
    };
    Ok(ControllerSpec { kind, source })
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base_dir = path.parent().unwrap_or(Path::new("."));
        located(path, Self::parse(&text, base_dir))
    }

    /// Parses config text; relative paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let doc = Document::parse(text)?;
        let root = doc.root();
        root.deny_unknown(ROOT_KEYS)?;
        let seed = root.parse_opt("seed")?.unwrap_or(GaConfig::default().seed);
        let output_dir = base_dir.join(root.get("output_dir").map_or("out", |e| e.value.as_str()));

        let mut controllers = Vec::new();
        for sec in &doc.sections[1..] {
            match sec.name.split_once(' ') {
                Some(("controller", kind)) => {
                    let kind: ControllerKind = kind.parse().map_err(|e: Error| Error::Parse {
                        line: sec.line,
                        msg: e.to_string(),
                    })?;
                    controllers.push(parse_controller(sec, kind, base_dir)?);
                }
                _ if ["plant", "sim", "metrics", "ga"].contains(&sec.name.as_str()) => {}
                _ => {
                    return Err(Error::Parse {
                        line: sec.line,
                        msg: format!("unknown section [{}]", sec.name),
                    })
                }
            }
        }
        if controllers.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no [controller <kind>] section".into(),
            });
        }
        Ok(Self {
            plant: parse_plant(doc.section("plant"))?,
            sim: parse_sim(doc.section("sim"))?,
            conventions: parse_conventions(doc.section("metrics"))?,
            ga: parse_ga(doc.section("ga"), seed)?,
            controllers,
            output_dir,
            seed,
        })
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(out) = &overrides.out {
            self.output_dir = out.clone();
        }
        if let Some(seed) = overrides.seed {
            self.seed = seed;
            self.ga.seed = seed;
        }
    }
}

/// Result of running one controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerRun {
    pub controller: Controller,
    pub trace: SimTrace,
    pub metrics: TransientMetrics,
    pub tuning: Option<OptimizeResult>,
}

/// Resolves (tuning if needed), simulates and analyzes one controller.
pub fn run_controller(cfg: &ExperimentConfig, spec: &ControllerSpec) -> Result<ControllerRun> {
    let (controller, tuning) = match &spec.source {
        ParamSource::Inline(c) | ParamSource::File { controller: c, .. } => (c.clone(), None),
        ParamSource::Tune(task) => {
            let result = optimize(task, &cfg.plant, &cfg.sim, &cfg.ga)?;
            (task.decode(&result.best)?, Some(result))
        }
    };
    let trace = simulate(&cfg.plant, &controller, &cfg.sim)?;
    let metrics = analyze_with(&trace, &cfg.sim.reference(), &cfg.conventions);
    Ok(ControllerRun {
        controller,
        trace,
        metrics,
        tuning,
    })
}

/// Column manifest for the trace CSV.
pub fn trace_manifest() -> String {
    let rows = [
        ("s", "time"),
        ("rad", "RA axis angle"),
        ("rad", "DEC axis angle"),
        ("rad/s", "RA axis rate"),
        ("rad/s", "DEC axis rate"),
        ("N m", "RA commanded torque"),
        ("N m", "DEC commanded torque"),
        ("rad", "RA position error"),
        ("rad", "DEC position error"),
    ];
    let mut s = String::from("column,unit,description\n");
    for (name, (unit, desc)) in TRACE_COLUMNS.iter().zip(rows) {
        let _ = writeln!(s, "{name},{unit},{desc}");
    }
    s
}

fn summary(cfg: &ExperimentConfig, kind: ControllerKind, run: &ControllerRun) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "controller: {}", kind.display_name());
    let _ = writeln!(
        s,
        "target: {:.4} deg, {:.4} deg",
        cfg.sim.theta_desired[0].to_degrees(),
        cfg.sim.theta_desired[1].to_degrees()
    );
    let _ = writeln!(s, "step size: {} s, duration: {} s", cfg.sim.step_size, cfg.sim.duration);
    let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"));
    for (j, name) in JOINT_NAMES.iter().enumerate() {
        let _ = writeln!(
            s,
            "{name}: rise {} s, settling {} s, overshoot {} %",
            fmt(run.metrics.rise_time[j]),
            fmt(run.metrics.settling_time[j]),
            fmt(run.metrics.overshoot_pct[j])
        );
    }
    let _ = writeln!(s, "error integral: {:.6}", run.metrics.itae_value);
    if let Some(t) = &run.tuning {
        let _ = writeln!(
            s,
            "tuned with seed {} over {} generations, best fitness {:.6}",
            cfg.ga.seed,
            t.history.len() - 1,
            t.best_fitness
        );
    }
    s
}

/// Files produced by one controller run, relative to the output directory.
fn run_artifacts(cfg: &ExperimentConfig, kind: ControllerKind, run: &ControllerRun, suffix: &str) -> Vec<(String, String)> {
    let mut files = vec![
        (format!("trace{suffix}.csv"), run.trace.to_csv()),
        (format!("metrics{suffix}.csv"), run.metrics.to_csv()),
        (format!("summary{suffix}.txt"), summary(cfg, kind, run)),
    ];
    if let Some(t) = &run.tuning {
        files.push((format!("ga_log{suffix}.csv"), t.log_csv()));
        files.push((definition_file_name(kind), controller_text(&run.controller)));
    }
    files
}

/// Writes `contents` to `path` through a temp file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .iter()
        .map(|(name, text)| {
            let p = dir.join(name);
            write_atomic(&p, text).map(|_| p)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: ControllerKind,
    pub run: ControllerRun,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

/// Runs the single controller in a config and writes its artifacts.
pub fn run_experiment(config_path: &Path, overrides: &Overrides) -> Result<ExperimentReport> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    cfg.apply(overrides);
    run_experiment_with(&cfg)
}

pub fn run_experiment_with(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let [spec] = cfg.controllers.as_slice() else {
        return Err(Error::Usage(format!(
            "simulate and tune take exactly one controller section, found {}",
            cfg.controllers.len()
        )));
    };
    let run = run_controller(cfg, spec)?;
    let mut files = run_artifacts(cfg, spec.kind, &run, "");
    files.push(("trace_columns.csv".into(), trace_manifest()));
    let artifacts = write_all(&cfg.output_dir, &files)?;
    Ok(ExperimentReport {
        kind: spec.kind,
        summary: summary(cfg, spec.kind, &run),
        run,
        artifacts,
    })
}

#[derive(Debug)]
pub struct ComparisonReport {
    pub table: ComparisonTable,
    /// Members that failed, with the error that stopped them.
    pub failures: Vec<(ControllerKind, Error)>,
    pub runs: Vec<(ControllerKind, ControllerRun)>,
    pub artifacts: Vec<PathBuf>,
}

/// Runs every controller in a config on the shared plant and reference.
pub fn run_comparison(config_path: &Path, overrides: &Overrides) -> Result<ComparisonReport> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    cfg.apply(overrides);
    run_comparison_with(&cfg)
}

pub fn run_comparison_with(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    if cfg.controllers.len() < 2 {
        return Err(Error::Usage(format!(
            "compare needs at least two controller sections, found {}",
            cfg.controllers.len()
        )));
    }
    let results: Vec<(ControllerKind, Result<ControllerRun>)> = cfg
        .controllers
        .par_iter()
        .map(|spec| (spec.kind, run_controller(cfg, spec)))
        .collect();

    let mut columns = Vec::new();
    let mut failures = Vec::new();
    let mut runs = Vec::new();
    let mut files = vec![("trace_columns.csv".to_string(), trace_manifest())];
    for (kind, r) in results {
        match r {
            Ok(run) => {
                columns.push((kind, Some(run.metrics)));
                files.extend(run_artifacts(cfg, kind, &run, &format!("_{}", kind.as_str())));
                runs.push((kind, run));
            }
            Err(e) => {
                columns.push((kind, None));
                failures.push((kind, e));
            }
        }
    }
    let table = ComparisonTable::new(columns);
    files.push(("comparison.csv".into(), table.to_csv()));
    files.push(("comparison.txt".into(), table.to_text()));
    let artifacts = write_all(&cfg.output_dir, &files)?;
    Ok(ComparisonReport {
        table,
        failures,
        runs,
        artifacts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, Path::new("/tmp"))
    }

    #[test]
    fn angles_need_units() {
        let e = |v: &str| Entry {
            key: "theta_desired".into(),
            value: v.into(),
            line: 3,
        };
        let v = parse_angles(&e("60 deg 50 deg")).unwrap();
        assert!((v[0] - 60f64.to_radians()).abs() < 1e-15);
        let v = parse_angles(&e("1.5 rad, 90 deg")).unwrap();
        assert_eq!(v[0], 1.5);
        assert!(parse_angles(&e("60 50")).is_err());
        assert!(parse_angles(&e("60 grad 50 deg")).is_err());
        match parse_angles(&e("60")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = parse("[controller pd]\n").unwrap();
        assert_eq!(cfg.plant, PlantParams::default());
        assert_eq!(cfg.sim, SimConfig::default());
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.output_dir, Path::new("/tmp/out"));
        assert_eq!(
            cfg.controllers[0].source,
            ParamSource::Inline(Controller::Pd(baseline_gains(BASELINE_OMEGA)))
        );
    }

    #[test]
    fn ga_sources_default_to_tuning() {
        let cfg = parse("[controller ga-flc]\nrate_gain = 0.2\n[controller ga-pd]\n[ga]\ngenerations = 3\n").unwrap();
        let ParamSource::Tune(Task::Flc { base }) = &cfg.controllers[0].source else { panic!() };
        assert_eq!(base.scaling.rate, 0.2);
        assert_eq!(cfg.controllers[1].source, ParamSource::Tune(Task::Pd));
        assert_eq!(cfg.ga.generations, 3);
    }

    #[test]
    fn config_errors_carry_lines() {
        let cases = [
            ("[controller pd]\nkp = 1\n", 2),
            ("[controller pd]\nsource = tune\n", 1),
            ("[controller xyz]\n", 1),
            ("[sim]\nstep_size = 0\n[controller pd]\n", 1),
            ("[sim]\ntheta_desired = 60 50\n[controller pd]\n", 2),
            ("bogus = 1\n[controller pd]\n", 1),
            ("[controller pd]\n[extra]\n", 2),
            ("[plant]\nprofile = nope\n[controller pd]\n", 2),
            ("[controller flc]\nsource = file\nfile = /nonexistent/x.fuzzy\n", 0),
        ];
        for (text, line) in cases {
            match parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                Err(Error::Config(_)) if line == 0 => {}
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(parse("").is_err());
    }

    #[test]
    fn inline_plant_and_overrides() {
        let mut cfg = parse("[plant]\na1 = 0.2\na2 = 0.05\na3 = 0.04\ngravity = 1 2\n[controller pd]\n").unwrap();
        assert_eq!(cfg.plant.a1(), 0.2);
        assert!(cfg.plant.gravity_enabled());
        cfg.apply(&Overrides {
            out: Some("/elsewhere".into()),
            seed: Some(9),
        });
        assert_eq!((cfg.seed, cfg.ga.seed), (9, 9));
        assert_eq!(cfg.output_dir, Path::new("/elsewhere"));
        assert!(parse("[plant]\nprofile = kao-14in-default\na1 = 1\n[controller pd]\n").is_err());
    }

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, "first\n").unwrap();
        write_atomic(&p, "second\n").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "second\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn manifest_lists_every_trace_column() {
        let m = trace_manifest();
        assert_eq!(m.lines().count(), TRACE_COLUMNS.len() + 1);
    }
}
