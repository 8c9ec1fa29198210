use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, NaiveDate};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use urbanview::geometry::Point3;
use urbanview::gestures::{self, GestureEvent, SceneObject};
use urbanview::raster::{default_static_ids, shading, visibility, RasterConfig};
use urbanview::scene::BuildingRole;
use urbanview::solar::sun_direction;
use urbanview::sweep::{self, CandidatePose, SweepCache};
use urbanview::viewopt::optimize_viewpoint;
use urbanview::{EngineConfig, Error, Scene};

#[derive(Parser)]
#[command(
    name = "urbanview",
    version,
    about = "Visibility, shading and viewpoint analytics for urban design scenes"
)]
struct Cli {
    /// Engine configuration file (JSON).
    #[arg(long, global = true, env = "URBANVIEW_CONFIG")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for the optimizer's restart perturbations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Leave timings out of the summary so repeated runs print the same text.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure one visibility or shading value.
    Analyze(AnalyzeArgs),
    /// Search for a viewpoint that keeps a building in clear view.
    Optimize(OptimizeArgs),
    /// Measure all 18 design variations of a candidate.
    Sweep(SweepArgs),
    /// Gesture trace tools.
    #[command(subcommand)]
    Gestures(GesturesCommand),
    /// Configuration tools.
    #[command(subcommand)]
    Config(ConfigCommand),
}

#[derive(Args)]
struct AnalyzeArgs {
    scene: PathBuf,
    /// Landmark for --viewpoint, candidate for --sun.
    #[arg(long)]
    target: String,
    /// Observer position `x,y,z`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, conflicts_with = "sun", required_unless_present = "sun")]
    viewpoint: Option<Point3>,
    /// RFC 3339 time at which to measure the candidate's shading.
    #[arg(long)]
    sun: Option<String>,
    /// Render size in pixels (a multiple of 10); overrides the config file.
    #[arg(long)]
    resolution: Option<usize>,
    /// Write the result here and print a summary instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    scene: PathBuf,
    /// Building to keep in view.
    #[arg(long)]
    target: String,
    /// Include every start's run in the output.
    #[arg(long)]
    runs: bool,
    /// Write the result here and print a summary instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    scene: PathBuf,
    /// Candidate building to vary.
    #[arg(long)]
    candidate: String,
    /// Analysis date (YYYY-MM-DD); overrides the config file.
    #[arg(long)]
    date: Option<NaiveDate>,
    /// Render size in pixels (a multiple of 10); overrides the config file.
    #[arg(long)]
    resolution: Option<usize>,
    /// Reuse and update the cache file next to the scene.
    #[arg(long)]
    cache: bool,
    /// Also measure the candidate turned by this many degrees.
    #[arg(long)]
    edit_yaw: Option<f64>,
    /// Also measure the candidate at this uniform scale.
    #[arg(long)]
    edit_scale: Option<f64>,
    /// Write the report here and print a summary instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GesturesCommand {
    /// Replay a trace against a scene and print the events.
    Replay {
        /// Gesture frames, one JSON object per line.
        #[arg(long)]
        trace: PathBuf,
        /// Scene whose buildings the trace selects and edits.
        #[arg(long)]
        scene: PathBuf,
        /// Write the scene with the selected candidate's edits applied.
        #[arg(long)]
        scene_out: Option<PathBuf>,
        /// Write the events here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ConfigCommand {
    /// Print the default configuration.
    DumpDefaults,
}

fn parse_point(s: &str) -> std::result::Result<Point3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(Point3::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {s:?}")),
    }
}

fn load_config(path: Option<&Path>) -> Result<EngineConfig> {
    match path {
        Some(p) => Ok(EngineConfig::load(p)?),
        None => Ok(EngineConfig::default()),
    }
}

fn with_resolution(raster: RasterConfig, resolution: Option<usize>) -> Result<RasterConfig> {
    let r = match resolution {
        Some(n) => raster.with_resolution(n),
        None => raster,
    };
    r.validate()?;
    Ok(r)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, value: &impl Serialize) -> Result<()> {
    emit(out, &(serde_json::to_string_pretty(value)? + "\n"))
}

struct Summary {
    deterministic: bool,
    quiet: bool,
    start: Instant,
}

impl Summary {
    fn say(&self, line: &str) {
        if self.quiet {
            return;
        }
        if self.deterministic {
            println!("{line}");
        } else {
            println!("{line} ({:.2} s)", self.start.elapsed().as_secs_f64());
        }
    }
}

fn analyze(args: AnalyzeArgs, config: &EngineConfig, summary: &Summary) -> Result<()> {
    let scene = Scene::load(&args.scene)?;
    let raster = with_resolution(config.raster, args.resolution)?;
    let value = if let Some(vp) = args.viewpoint {
        let v = visibility(&scene, vp, &args.target, &raster)?;
        json!({ "visibility": v })
    } else {
        let text = args.sun.as_deref().expect("clap requires --viewpoint or --sun");
        let ts = DateTime::parse_from_rfc3339(text).with_context(|| format!("parsing --sun {text:?}"))?;
        let sun = sun_direction(scene.origin.lat, scene.origin.lon, ts)?;
        if sun.is_night() {
            return Err(Error::NightTime {
                elevation_deg: sun.elevation.to_degrees(),
            }
            .into());
        }
        let statics: Vec<String> = default_static_ids(&scene)
            .into_iter()
            .filter(|id| *id != args.target)
            .collect();
        let s = shading(&scene, Some(&args.target), sun.direction(), &statics, &raster)?;
        json!({ "shading": s })
    };
    emit_json(args.out.as_deref(), &value)?;
    summary.say(&format!("analyze {}: {value}", args.target));
    Ok(())
}

fn optimize(args: OptimizeArgs, config: &EngineConfig, seed: u64, summary: &Summary) -> Result<()> {
    let scene = Scene::load(&args.scene)?;
    let outcome = optimize_viewpoint(&scene, &args.target, &config.energy, seed)?;
    if args.runs {
        emit_json(args.out.as_deref(), &outcome)?;
    } else {
        emit_json(args.out.as_deref(), &outcome.best)?;
    }
    let b = &outcome.best;
    summary.say(&format!(
        "optimize {}: energy {:.6} at ({:.3}, {:.3}, {:.3}) from start {}",
        args.target, b.energy, b.position.x, b.position.y, b.position.z, b.start_index
    ));
    Ok(())
}

fn run_sweep(args: SweepArgs, config: &EngineConfig, summary: &Summary) -> Result<()> {
    let scene = Scene::load(&args.scene)?;
    let mut config = config.clone();
    config.raster = with_resolution(config.raster, args.resolution)?;
    let Some(date) = args.date.or(config.solar.date) else {
        bail!(Error::Validation(
            "a date is required (--date or solar.date in the config)".into()
        ));
    };
    let mut report = if args.cache {
        let path = SweepCache::sidecar_path(&args.scene);
        let mut cache = SweepCache::load_or_default(&path)?;
        let r = sweep::run_sweep_cached(&scene, &args.candidate, date, &config, Some(&mut cache))?;
        cache.save(&path)?;
        r
    } else {
        sweep::run_sweep(&scene, &args.candidate, date, &config)?
    };
    if args.edit_yaw.is_some() || args.edit_scale.is_some() {
        let pose = CandidatePose {
            yaw: args.edit_yaw.unwrap_or(0.0).to_radians(),
            scale: args.edit_scale.unwrap_or(1.0),
        };
        report = sweep::recompute(&report, &scene, pose, &config)?;
    }
    match &args.out {
        Some(p) => sweep::export_report(&report, p)?,
        None => emit(None, &(report.to_json()? + "\n"))?,
    }
    summary.say(&format!(
        "sweep {}: {} variations x {} shading samples, {} viewpoints, {} diagnostics",
        args.candidate,
        report.variations.len(),
        report.time_axis.samples.len(),
        report.path_axis.points.len(),
        report.diagnostics.len()
    ));
    Ok(())
}

fn replay(
    trace: &Path,
    scene_path: &Path,
    scene_out: Option<&Path>,
    out: Option<&Path>,
    config: &EngineConfig,
    summary: &Summary,
) -> Result<()> {
    let mut scene = Scene::load(scene_path)?;
    let (frames, mut diagnostics) = gestures::read_trace(trace)?;
    let unparsed = diagnostics.len();
    let objects = SceneObject::from_scene(&scene);
    let report = gestures::ingest(&frames, &objects, &config.gestures);
    diagnostics.extend(report.diagnostics.iter().cloned());

    // the last payload of each operation is the whole operation
    let mut finals: Vec<(usize, String, gestures::Manipulation)> = Vec::new();
    for e in &report.events {
        if let GestureEvent::Manipulation {
            target: Some(id),
            operation,
            manipulation,
            ..
        } = e
        {
            match finals.last_mut() {
                Some(last) if last.0 == *operation => *last = (*operation, id.clone(), *manipulation),
                _ => finals.push((*operation, id.clone(), *manipulation)),
            }
        }
    }
    let mut applied = 0;
    for (_, id, m) in &finals {
        let b = scene.building(id)?;
        if b.role != BuildingRole::Candidate {
            diagnostics.push(format!("ignored manipulation of non-candidate {id:?}"));
            continue;
        }
        let edited = gestures::apply_manipulation(b, m)?;
        *scene.building_mut(id)? = edited;
        applied += 1;
    }

    let mut buf = Vec::new();
    gestures::write_events(&report.events, &mut buf)?;
    emit(out, std::str::from_utf8(&buf)?)?;
    if let Some(p) = scene_out {
        fs::write(p, scene.to_json()? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    for d in &diagnostics {
        eprintln!("{}", json!({ "diagnostic": d }));
    }
    summary.say(&format!(
        "replay: {} frames, {} skipped, {} events, {} edits applied",
        report.frames,
        unparsed + report.skipped,
        report.events.len(),
        applied
    ));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let config = load_config(cli.config.as_deref())?;
    let summary = |quiet: bool| Summary {
        deterministic: cli.deterministic,
        quiet,
        start: Instant::now(),
    };
    match cli.command {
        Command::Analyze(a) => {
            let s = summary(a.out.is_none());
            analyze(a, &config, &s)
        }
        Command::Optimize(a) => {
            let s = summary(a.out.is_none());
            optimize(a, &config, cli.seed, &s)
        }
        Command::Sweep(a) => {
            let s = summary(a.out.is_none());
            run_sweep(a, &config, &s)
        }
        Command::Gestures(GesturesCommand::Replay {
            trace,
            scene,
            scene_out,
            out,
        }) => {
            let s = summary(out.is_none());
            replay(&trace, &scene, scene_out.as_deref(), out.as_deref(), &config, &s)
        }
        Command::Config(ConfigCommand::DumpDefaults) => emit(None, &(EngineConfig::default().to_json()? + "\n")),
    }
}

/// Exit status for an engine error kind.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::EmptyInput(_) | Error::Dimension(_) => 3,
        Error::NotFound(_) => 4,
        Error::Io { .. } | Error::Json(_) => 5,
        Error::NightTime { .. } => 6,
        Error::DegenerateGeometry(_) | Error::DegenerateView(_) => 7,
        Error::NoValidViewpoint(_) => 8,
        Error::InconsistentGesture(_) => 9,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = match e.downcast_ref::<Error>() {
                Some(err) => (err.kind(), exit_code(err)),
                None => ("error", 1),
            };
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!("{}", json!({ "error": { "kind": kind, "message": chain.join(": ") } }));
            ExitCode::from(code)
        }
    }
}
