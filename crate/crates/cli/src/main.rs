//! `catch`: command-line front end for the CATCH-919 hand simulator.

mod plot;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use catch_core::control::{
    activation_for, calibrate, classify_posture, human_reference_activation, SampleGrid, DEFAULT_EPS_DEG,
};
use catch_core::grasps::{check_feasible, load_catalog, parse_catalog, run_presets, GraspPreset};
use catch_core::hand_model::{default_catch919, load_model, Finger, HandModel, JointId, LINKAGE_SEED};
use catch_core::linkage::{synthesize, CouplingCurve, FourBarDims, SynthesisBounds};
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Io { .. } => 1,
            CliError::NotConverged(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "catch", version, about = "Quasi-static simulator for the CATCH-919 cable-driven hand")]
struct Cli {
    /// Hand description file; the built-in model when absent.
    #[arg(long, global = true, env = "CATCH_MODEL")]
    model: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Flexion threshold for posture classes, deg.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS_DEG)]
    eps_deg: f64,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a command script and write the run table (CSV).
    Simulate {
        #[arg(long)]
        script: PathBuf,
        /// Also write an SVG of the run.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Posture-class tools.
    Posture {
        #[command(subcommand)]
        command: PostureCmd,
    },
    /// Grasp catalog checks.
    Grasp {
        /// Preset catalog; the shipped one when absent.
        #[arg(long, global = true)]
        catalog: Option<PathBuf>,
        #[command(subcommand)]
        command: GraspCmd,
    },
    /// Fit cable-length polynomials to sampled poses (JSON).
    Calibrate {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        degree: u32,
        /// Standard deviation of the simulated length noise, mm.
        #[arg(long, default_value_t = 0.0)]
        noise_mm: f64,
    },
    /// Linkage tools.
    Linkage {
        #[command(subcommand)]
        command: LinkageCmd,
    },
    /// Run the WebSocket session server.
    Serve {
        #[arg(long, default_value_t = catch_service::DEFAULT_PORT)]
        port: u16,
    },
    /// Render a run table as SVG.
    Plot {
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Subcommand)]
enum PostureCmd {
    /// Classify a pose given as a JSON map of joint id to degrees.
    Classify {
        #[arg(long)]
        q: PathBuf,
        /// The fingertip is under external load.
        #[arg(long)]
        forced: bool,
    },
}

#[derive(Subcommand)]
enum GraspCmd {
    /// List preset ids and names.
    List,
    /// Check one preset.
    Check { id: u8 },
    /// Check every preset.
    RunAll {
        /// Report file; same as --out.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum LinkageCmd {
    /// Fit linkage dimensions to a `pip_deg,dip_deg` CSV curve.
    Synth {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long, default_value = "Index")]
        finger: Finger,
        /// Extra randomized starting points besides the default seed linkage.
        #[arg(long, default_value_t = 0)]
        restarts: usize,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_owned(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn model_from(path: Option<&Path>) -> Result<HandModel, CliError> {
    match path {
        None => Ok(default_catch919()),
        Some(p) => load_model(&read(p)?).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display()))),
    }
}

fn catalog_from(path: Option<&Path>) -> Result<Vec<GraspPreset>, CliError> {
    match path {
        None => Ok(load_catalog()),
        Some(p) => parse_catalog(&read(p)?).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display()))),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let model = model_from(cli.model.as_deref())?;
    let out = cli.out.as_deref();
    if !(cli.eps_deg.is_finite() && cli.eps_deg >= 0.0) {
        return Err(CliError::Invalid(format!("--eps-deg {} must be a non-negative number", cli.eps_deg)));
    }
    match cli.command {
        Cmd::Simulate { script, svg } => {
            let steps = run::parse_script(&read(&script)?, &model)?;
            let (rows, stalled) = run::simulate(&model, &steps, cli.eps_deg)?;
            write(out, &run::write_run_csv(&rows))?;
            if let Some(svg) = svg {
                write(Some(&svg), &plot::plot_svg(&model, &rows))?;
            }
            if !stalled.is_empty() {
                return Err(CliError::NotConverged(format!("equilibrium not reached at steps {stalled:?}")));
            }
        }
        Cmd::Posture { command: PostureCmd::Classify { q, forced } } => {
            let partial: std::collections::BTreeMap<JointId, f64> = serde_json::from_str(&read(&q)?)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", q.display())))?;
            let pose = model.rest_pose().with_overrides(&partial);
            model.check_limits(&pose, 0.0).map_err(|e| CliError::Invalid(e.to_string()))?;
            let class = classify_posture(&model.complete(&pose), forced, cli.eps_deg);
            let doc = json!({
                "class": class,
                "name": class.name(),
                "activation": activation_for(class),
                "human_reference": human_reference_activation(class),
            });
            write(out, &pretty(&doc))?;
        }
        Cmd::Grasp { catalog, command } => {
            let presets = catalog_from(catalog.as_deref())?;
            match command {
                GraspCmd::List => {
                    let rows: Vec<_> = presets
                        .iter()
                        .map(|p| json!({"taxonomy_id": p.taxonomy_id, "name": p.name, "reconstructed": p.reconstructed}))
                        .collect();
                    write(out, &pretty(&rows))?;
                }
                GraspCmd::Check { id } => {
                    let preset = presets
                        .iter()
                        .find(|p| p.taxonomy_id == id)
                        .ok_or_else(|| CliError::Invalid(format!("no preset with taxonomy id {id}")))?;
                    let report = check_feasible(&model, preset);
                    write(out, &pretty(&report))?;
                    if report.residual_deg.is_some() && !report.converged {
                        return Err(CliError::NotConverged(format!("preset {id}: equilibrium not reached")));
                    }
                }
                GraspCmd::RunAll { report } => {
                    let summary = run_presets(&model, &presets);
                    write(report.as_deref().or(out), &pretty(&summary))?;
                    eprintln!("{}/{} realizable", summary.realizable_count, summary.total);
                    let stalled: Vec<u8> = summary
                        .presets
                        .iter()
                        .filter(|r| r.residual_deg.is_some() && !r.converged)
                        .map(|r| r.taxonomy_id)
                        .collect();
                    if !stalled.is_empty() {
                        return Err(CliError::NotConverged(format!("equilibrium not reached for presets {stalled:?}")));
                    }
                }
            }
        }
        Cmd::Calibrate { samples, degree, noise_mm } => {
            let grid = SampleGrid::uniform(&model, samples, cli.seed);
            let map = calibrate(&model, &grid, degree, noise_mm, cli.seed).map_err(|e| CliError::Invalid(e.to_string()))?;
            eprintln!("held-out rms {:.6} mm", map.fit_rms_mm);
            write(out, &pretty(&map))?;
        }
        Cmd::Linkage { command: LinkageCmd::Synth { curve, finger, restarts } } => {
            if JointId::linkage_pair(finger).is_none() {
                return Err(CliError::Invalid(format!("{finger} has no linkage")));
            }
            let target = read_curve(&curve)?;
            let bounds = SynthesisBounds::finger_scale();
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut starts = vec![LINKAGE_SEED];
            for _ in 0..restarts {
                starts.push(jitter(&LINKAGE_SEED, &mut rng));
            }
            let mut best = None;
            for start in &starts {
                let s = synthesize(&target, start, &bounds).map_err(|e| CliError::Invalid(e.to_string()))?;
                if best.as_ref().is_none_or(|b: &catch_core::linkage::Synthesis| s.rms_deg < b.rms_deg) {
                    best = Some(s);
                }
            }
            let best = best.expect("at least one start");
            eprintln!("rms {:.6} deg", best.rms_deg);
            write(out, &pretty(&json!({ "linkages": { finger.to_string(): best.dims } })))?;
            if !best.converged {
                return Err(CliError::NotConverged(format!("synthesis stalled at rms {:.6} deg", best.rms_deg)));
            }
        }
        Cmd::Serve { port } => {
            let server = catch_service::Server::bind(model, ("0.0.0.0", port))
                .map_err(|source| CliError::Io { path: PathBuf::from(format!("port {port}")), source })?;
            eprintln!("listening on ws://{}", server.local_addr().map_err(|source| CliError::Io { path: PathBuf::from("socket"), source })?);
            server.run().map_err(|source| CliError::Io { path: PathBuf::from("server"), source })?;
        }
        Cmd::Plot { run } => {
            let rows = run::read_run_csv(&read(&run)?)?;
            write(out, &plot::plot_svg(&model, &rows))?;
        }
    }
    Ok(())
}

/// Lengths and crank mount scaled by independent factors in [0.9, 1.1].
fn jitter(d: &FourBarDims, rng: &mut ChaCha8Rng) -> FourBarDims {
    let mut f = || rng.random_range(0.9..=1.1);
    FourBarDims {
        ground_mm: d.ground_mm * f(),
        input_mm: d.input_mm * f(),
        coupler_mm: d.coupler_mm * f(),
        output_mm: d.output_mm * f(),
        input_mount_deg: d.input_mount_deg * f(),
        ..*d
    }
}

fn read_curve(path: &Path) -> Result<CouplingCurve, CliError> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    if headers.iter().collect::<Vec<_>>() != ["pip_deg", "dip_deg"] {
        return Err(CliError::Invalid(format!("{}: header must be `pip_deg,dip_deg`", path.display())));
    }
    let mut samples = Vec::new();
    for (i, rec) in reader.deserialize::<(f64, f64)>().enumerate() {
        samples.push(rec.map_err(|e| CliError::Invalid(format!("{} row {}: {e}", path.display(), i + 1)))?);
    }
    Ok(CouplingCurve { samples })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
