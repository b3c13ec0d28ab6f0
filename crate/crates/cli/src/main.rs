//! `hmorph`: runs registered verification scenarios or checks user configs.
//!
//! Exit codes: 0 when every requested report passes, 1 when some report
//! fails, 2 on usage, config or evaluation errors.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use hmorph::hermitian::StructureVerdicts;
use hmorph::scenarios::{self, Check, Observation, VerificationReport};
use hmorph::{DiffConfig, GeoError, SamplePlan};
use hmorph_geodsl::GeoConfig;

const SCHEMA_VERSION: u32 = 1;
const MAX_POINTS: usize = 100_000;
const MAX_STEP: f64 = 0.1;

#[derive(Parser)]
#[command(name = "hmorph", version, about = "Numerical checks for holomorphic maps and harmonic morphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List registered scenario ids.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        report: Format,
    },
    /// Run registered scenarios.
    Run {
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        ids: Vec<String>,
        /// Run every registered scenario.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        opts: Opts,
    },
    /// Classify the almost-complex structure `J` of a config file.
    Classify {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check whether a map from a config file is a harmonic morphism.
    CheckMap {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        map: String,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Args)]
struct Opts {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sample points per scenario.
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// Finite-difference step.
    #[arg(long, default_value_t = DiffConfig::default().step)]
    step: f64,
    /// Absolute tolerance floor.
    #[arg(long, default_value_t = DiffConfig::default().tolerance_abs)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    richardson: Switch,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    report: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Serialize)]
struct ConfigBlock {
    seed: u64,
    points: usize,
    step: f64,
    tol: f64,
    richardson: bool,
}

#[derive(Serialize)]
struct ReportOut {
    scenario_id: String,
    checks: Vec<Check>,
    observations: Vec<Observation>,
    overall: bool,
    provenance: String,
    notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    structure: Option<StructureVerdicts>,
}

impl From<VerificationReport> for ReportOut {
    fn from(r: VerificationReport) -> Self {
        Self {
            scenario_id: r.scenario_id,
            checks: r.checks,
            observations: r.observations,
            overall: r.overall,
            provenance: r.metadata.provenance,
            notes: r.metadata.notes,
            structure: None,
        }
    }
}

#[derive(Serialize)]
struct Output {
    schema_version: u32,
    config: ConfigBlock,
    reports: Vec<ReportOut>,
    overall: bool,
}

/// Error that maps to exit code 2.
struct Failure(String);

impl From<GeoError> for Failure {
    fn from(e: GeoError) -> Self {
        Failure(e.to_string())
    }
}

impl Opts {
    fn settings(&self) -> Result<(DiffConfig, SamplePlan), Failure> {
        if !(self.step > 0.0 && self.step <= MAX_STEP) {
            return Err(Failure(format!("--step must be in (0, {MAX_STEP}], got {}", self.step)));
        }
        if !(1..=MAX_POINTS).contains(&self.points) {
            return Err(Failure(format!("--points must be in 1..={MAX_POINTS}, got {}", self.points)));
        }
        let defaults = DiffConfig::default();
        let richardson = matches!(self.richardson, Switch::On);
        let cfg = DiffConfig::new(self.step, richardson, self.tol, defaults.tolerance_factor)?;
        let plan = SamplePlan::for_config(self.seed, self.points, &cfg);
        plan.validate()?;
        Ok((cfg, plan))
    }

    fn config_block(&self, cfg: &DiffConfig) -> ConfigBlock {
        ConfigBlock {
            seed: self.seed,
            points: self.points,
            step: cfg.step,
            tol: cfg.tolerance_abs,
            richardson: cfg.richardson,
        }
    }
}

fn fmt_f64(v: f64) -> String {
    // `{:e}` is the shortest round-trip form, same digits serde_json emits.
    if v.is_finite() {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn pass(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn render_text(out: &Output) -> String {
    let mut s = String::new();
    let c = &out.config;
    let _ = writeln!(
        s,
        "config: seed={} points={} step={} tol={} richardson={}",
        c.seed,
        c.points,
        fmt_f64(c.step),
        fmt_f64(c.tol),
        if c.richardson { "on" } else { "off" }
    );
    for r in &out.reports {
        let _ = writeln!(s, "\n{} {}", pass(r.overall), r.scenario_id);
        if !r.provenance.is_empty() {
            let _ = writeln!(s, "  provenance: {}", r.provenance);
        }
        for ch in &r.checks {
            let _ = writeln!(
                s,
                "  check {}: residual={} tolerance={} {} samples={} excluded={}",
                ch.name,
                fmt_f64(ch.residual),
                fmt_f64(ch.tolerance),
                pass(ch.verdict),
                ch.samples_used,
                ch.excluded_samples
            );
        }
        for o in &r.observations {
            let _ = match o.tolerance {
                Some(t) => writeln!(s, "  observe {}: value={} tolerance={}", o.name, fmt_f64(o.value), fmt_f64(t)),
                None => writeln!(s, "  observe {}: value={}", o.name, fmt_f64(o.value)),
            };
        }
        if let Some(v) = r.structure {
            let _ = writeln!(
                s,
                "  structure: kahler={} symplectic_12={} cosymplectic={} integrable={}",
                v.kahler, v.symplectic_12, v.cosymplectic, v.integrable
            );
        }
        for n in &r.notes {
            let _ = writeln!(s, "  note: {n}");
        }
    }
    let passed = out.reports.iter().filter(|r| r.overall).count();
    let _ = writeln!(s, "\n{} {}/{} reports passed", pass(out.overall), passed, out.reports.len());
    s
}

fn emit(text: String, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: &PathBuf) -> Result<GeoConfig, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure(format!("cannot read {}: {e}", path.display())))?;
    let config = hmorph_geodsl::parse_bytes(&bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    for w in &config.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(config)
}

fn run_ids(ids: &[String], cfg: &DiffConfig, plan: &SamplePlan) -> Result<Vec<ReportOut>, Failure> {
    if let Some(bad) = ids.iter().find(|id| scenarios::scenario_info(id).is_none()) {
        return Err(GeoError::UnknownScenario(bad.clone()).into());
    }
    let reports: Vec<_> = ids.par_iter().map(|id| scenarios::run_scenario(id, plan, cfg)).collect();
    reports
        .into_iter()
        .zip(ids)
        .map(|(r, id)| r.map(ReportOut::from).map_err(|e| Failure(format!("{id}: {e}"))))
        .collect()
}

fn classify(path: &PathBuf, cfg: &DiffConfig, plan: &SamplePlan) -> Result<ReportOut, Failure> {
    let config = load_config(path)?;
    let model = config.model();
    let j = model
        .structure
        .as_ref()
        .ok_or_else(|| Failure(format!("{}: no `J` declared, nothing to classify", path.display())))?;
    let (mut report, rep) = scenarios::check_classification(j, plan, cfg)?;
    report.scenario_id = format!("classify:{}", path.display());
    let mut out = ReportOut::from(report);
    out.structure = Some(rep.verdicts);
    Ok(out)
}

fn check_map(path: &PathBuf, name: &str, cfg: &DiffConfig, plan: &SamplePlan) -> Result<ReportOut, Failure> {
    let config = load_config(path)?;
    let model = config.model();
    let map = model
        .map(name)
        .ok_or_else(|| Failure(format!("{}: no map named `{name}`", path.display())))?
        .clone()
        .with_config(*cfg);
    let mut report = scenarios::check_harmonic_morphism(&map, plan)?;
    if map.source_j.is_some() && map.target_j.is_some() {
        // informational: harmonic morphisms need not be holomorphic
        for c in scenarios::check_holomorphy(&map, plan)?.checks {
            report.observe_against(c.name, c.residual, c.tolerance);
        }
    }
    report.scenario_id = format!("check-map:{name}");
    Ok(report.into())
}

fn list(format: Format) -> String {
    let all = scenarios::scenarios();
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Listing<'a> {
                schema_version: u32,
                scenarios: &'a [scenarios::ScenarioInfo],
            }
            let mut s = serde_json::to_string_pretty(&Listing {
                schema_version: SCHEMA_VERSION,
                scenarios: all,
            })
            .expect("listing serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let width = all.iter().map(|s| s.id.len()).max().unwrap_or(0);
            let mut s = String::new();
            for info in all {
                let expect = if info.expected { "holds" } else { "fails" };
                let _ = writeln!(s, "{:width$}  [{expect}]  {}", info.id, info.description);
            }
            s
        }
    }
}

fn execute(cli: Cli) -> Result<bool, Failure> {
    let (opts, reports) = match cli.command {
        Command::List { report } => {
            print!("{}", list(report));
            return Ok(true);
        }
        Command::Run { ids, all, opts } => {
            let (cfg, plan) = opts.settings()?;
            let ids: Vec<String> = if all {
                scenarios::scenarios().iter().map(|s| s.id.to_string()).collect()
            } else {
                ids
            };
            let reports = run_ids(&ids, &cfg, &plan)?;
            (opts, reports)
        }
        Command::Classify { config, opts } => {
            let (cfg, plan) = opts.settings()?;
            let r = classify(&config, &cfg, &plan)?;
            (opts, vec![r])
        }
        Command::CheckMap { config, map, opts } => {
            let (cfg, plan) = opts.settings()?;
            let r = check_map(&config, &map, &cfg, &plan)?;
            (opts, vec![r])
        }
    };
    let (cfg, _) = opts.settings()?;
    let overall = reports.iter().all(|r| r.overall);
    let output = Output {
        schema_version: SCHEMA_VERSION,
        config: opts.config_block(&cfg),
        reports,
        overall,
    };
    let text = match opts.report {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&output).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => render_text(&output),
    };
    emit(text, &opts.out)?;
    Ok(overall)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
