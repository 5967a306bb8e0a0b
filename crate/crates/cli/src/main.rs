//! Batch experiment driver.
//!
//! Exit codes: 0 all invariants hold, 1 an invariant failed, 2 the run
//! was degenerate (nothing resolved), 64 configuration error.

use clap::{Args, Parser, Subcommand};
use markerlab::cobound::{rat_str, synthesize_sequences, validate_sequences, SweepDirection};
use markerlab::Point;
use markerlab_cli::config::{ExperimentConfig, OutputFormat, Suite};
use markerlab_cli::{emit, suites};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "markerlab",
    about = "Marker sets, tower partitions, and coboundary sweeps on computable dynamical systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Config file (key = value lines); flags win over the file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Raw overrides, e.g. --set window=20 --set seed=7.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// System descriptor (lat:3, lat3:1, line:1, odo, podo, cyc:5).
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    window: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Stratum-index bound; "auto" derives it from the window.
    #[arg(long)]
    jmax: Option<String>,
    /// Walk horizon; "auto" derives it from the system.
    #[arg(long)]
    horizon: Option<String>,
    /// Report output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named verification suite.
    Bench {
        /// freeness | markers1d | rok2d | rokd | cob-a | cob-b | transfer
        suite: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Nested 1D marker levels: nesting and disjointness checks.
    Marker1d {
        #[arg(long, default_value_t = 5)]
        depth: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// 2D tower base: product disjointness and nonemptiness on a window.
    Rok2d {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// d-dimensional sweep over explicit bounds, e.g. --bounds 2,2,2.
    Rokd {
        #[arg(long, value_delimiter = ',')]
        bounds: Vec<u32>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Tower plans and the alternating-sum function.
    Cob {
        #[command(subcommand)]
        sub: CobCommand,
    },
}

#[derive(Subcommand)]
enum CobCommand {
    /// Print the canonical sequence plan and its validation.
    Plan {
        #[arg(long, default_value_t = 3)]
        rmax: u32,
    },
    /// Evaluate the function at a point literal.
    Eval {
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 3)]
        rmax: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Seeded partial-sum sweeps (property of bounded horizontal sums).
    Sweep {
        /// S (horizontal) or T (vertical).
        #[arg(long, default_value = "S")]
        dir: String,
        #[arg(long, default_value_t = 10_000)]
        len: u64,
        #[arg(long, default_value_t = 100)]
        starts: u64,
        /// Trace a single start to CSV instead of running the suite.
        #[arg(long)]
        trace_from: Option<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Vertical-growth witnesses at one level.
    Propb {
        #[arg(long, default_value_t = 2)]
        r: u32,
        #[arg(long, default_value_t = 3)]
        rmax: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn overrides_from(common: &CommonArgs, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for kv in &common.sets {
        if let Some((k, v)) = kv.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else {
            out.push((kv.clone(), String::new()));
        }
    }
    if let Some(s) = &common.system {
        out.push(("system".into(), s.clone()));
    }
    if let Some(w) = common.window {
        out.push(("window".into(), w.to_string()));
    }
    if let Some(s) = common.seed {
        out.push(("seed".into(), s.to_string()));
    }
    if let Some(s) = common.samples {
        out.push(("samples".into(), s.to_string()));
    }
    if let Some(j) = &common.jmax {
        out.push(("jmax".into(), j.clone()));
    }
    if let Some(h) = &common.horizon {
        out.push(("horizon".into(), h.clone()));
    }
    if let Some(o) = &common.out {
        out.push(("out".into(), o.display().to_string()));
    }
    for (k, v) in extra {
        out.push((k.to_string(), v.clone()));
    }
    out
}

fn build_config(
    suite: Suite,
    common: &CommonArgs,
    extra: &[(&str, String)],
) -> Result<ExperimentConfig, String> {
    let body = match &common.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?,
        ),
        None => None,
    };
    ExperimentConfig::from_sources(suite, body.as_deref(), &overrides_from(common, extra))
        .map_err(|e| e.to_string())
}

fn finish(report: markerlab::VerificationReport, cfg: &ExperimentConfig) -> ExitCode {
    let code = suites::exit_code(&report);
    match emit::report_json(&report) {
        Ok(text) => println!("{text}"),
        Err(e) => {
            eprintln!("emit failed: {e}");
            return ExitCode::from(64);
        }
    }
    if let Some(path) = &cfg.out {
        if let Err(e) = emit::write_report(&report, std::path::Path::new(path)) {
            eprintln!("cannot write {path}: {e}");
            return ExitCode::from(64);
        }
    }
    ExitCode::from(code as u8)
}

fn config_error(msg: String) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(64)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Bench { suite, common } => {
            let suite = match Suite::parse(&suite) {
                Ok(s) => s,
                Err(e) => return config_error(e.to_string()),
            };
            match build_config(suite, &common, &[]) {
                Ok(cfg) => finish(suites::run(&cfg), &cfg),
                Err(e) => config_error(e),
            }
        }
        Command::Marker1d { depth, common } => {
            let extra = [("depth", depth.to_string())];
            match build_config(Suite::Markers1d, &common, &extra) {
                Ok(cfg) => finish(suites::run(&cfg), &cfg),
                Err(e) => config_error(e),
            }
        }
        Command::Rok2d { n, m, common } => {
            let extra = [("n", n.to_string()), ("m", m.to_string())];
            match build_config(Suite::Rok2d, &common, &extra) {
                Ok(cfg) => finish(suites::run(&cfg), &cfg),
                Err(e) => config_error(e),
            }
        }
        Command::Rokd { bounds, common } => {
            if bounds.is_empty() {
                return config_error("rokd needs --bounds".into());
            }
            let list = bounds
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let extra = [("bounds", list)];
            match build_config(Suite::Rokd, &common, &extra) {
                Ok(cfg) => finish(suites::run(&cfg), &cfg),
                Err(e) => config_error(e),
            }
        }
        Command::Cob { sub } => run_cob(sub),
    }
}

fn run_cob(sub: CobCommand) -> ExitCode {
    match sub {
        CobCommand::Plan { rmax } => {
            if rmax == 0 {
                return config_error("rmax must be at least 1".into());
            }
            let plan = synthesize_sequences(rmax);
            let report = validate_sequences(&plan);
            let mut doc = serde_json::Map::new();
            for (idx, lv) in plan.levels.iter().enumerate() {
                doc.insert(
                    format!("level{}", idx + 1),
                    serde_json::json!({
                        "n": lv.n,
                        "m": lv.m,
                        "alpha": rat_str(&lv.alpha),
                    }),
                );
            }
            doc.insert("tail_alpha".into(), rat_str(&plan.tail_alpha).into());
            doc.insert(
                "validation".into(),
                serde_json::to_value(&report).expect("report serializes"),
            );
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::Value::Object(doc)).unwrap()
            );
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        CobCommand::Eval { x, rmax, common } => {
            let extra = [("rmax", rmax.to_string())];
            let cfg = match build_config(Suite::CobA, &common, &extra) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            let point = match Point::parse(&x) {
                Ok(p) => p,
                Err(e) => return config_error(format!("bad point literal: {e}")),
            };
            if !cfg.system.admissible(&point) {
                return config_error(format!(
                    "point {x} is not admissible for system {}",
                    cfg.system.descriptor()
                ));
            }
            let plan = synthesize_sequences(cfg.rmax);
            let towers = match markerlab::cobound::build_towers(cfg.system, &plan) {
                Ok(t) => t,
                Err(e) => return config_error(format!("towers: {e}")),
            };
            let h = cfg.horizon_for(cfg.system);
            let mut doc = serde_json::Map::new();
            doc.insert("point".into(), x.clone().into());
            for r in 1..=plan.r_max() {
                match towers.f_level(r, &point, h) {
                    Ok(v) => {
                        doc.insert(format!("f{r}"), rat_str(&v).into());
                    }
                    Err(e) => {
                        doc.insert(format!("f{r}"), format!("unresolved: {e}").into());
                    }
                }
            }
            match towers.f_eval(&point, h) {
                Ok(v) => {
                    doc.insert("f".into(), rat_str(&v).into());
                }
                Err(e) => {
                    doc.insert("f".into(), format!("unresolved: {e}").into());
                }
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::Value::Object(doc)).unwrap()
            );
            ExitCode::SUCCESS
        }
        CobCommand::Sweep {
            dir,
            len,
            starts,
            trace_from,
            common,
        } => {
            let direction = match dir.as_str() {
                "S" | "s" => SweepDirection::Horizontal,
                "T" | "t" => SweepDirection::Vertical,
                other => return config_error(format!("unknown direction '{other}'")),
            };
            let extra = [("len", len.to_string()), ("starts", starts.to_string())];
            let cfg = match build_config(Suite::CobA, &common, &extra) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            if let Some(literal) = trace_from {
                let point = match Point::parse(&literal) {
                    Ok(p) => p,
                    Err(e) => return config_error(format!("bad point literal: {e}")),
                };
                if !cfg.system.admissible(&point) {
                    return config_error(format!(
                        "point {literal} is not admissible for system {}",
                        cfg.system.descriptor()
                    ));
                }
                let ps = match suites::traced_sweep(&cfg, &point, direction) {
                    Ok(ps) => ps,
                    Err(e) => return config_error(e),
                };
                match cfg.format {
                    OutputFormat::Csv => print!("{}", emit::trace_csv(&ps)),
                    OutputFormat::Json => {
                        println!("{}", serde_json::to_string_pretty(&ps).unwrap())
                    }
                }
                if let Some(path) = &cfg.out {
                    if let Err(e) = emit::write_trace_csv(&ps, std::path::Path::new(path)) {
                        eprintln!("cannot write {path}: {e}");
                        return ExitCode::from(64);
                    }
                }
                return ExitCode::SUCCESS;
            }
            finish(suites::run(&cfg), &cfg)
        }
        CobCommand::Propb { r, rmax, common } => {
            let extra = [("r", r.to_string()), ("rmax", rmax.to_string())];
            match build_config(Suite::CobB, &common, &extra) {
                Ok(cfg) => finish(suites::run(&cfg), &cfg),
                Err(e) => config_error(e),
            }
        }
    }
}
