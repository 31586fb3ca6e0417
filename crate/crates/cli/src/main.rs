use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lbsim::batch::{run_points, RunRecord};
use lbsim::preset::{preset, Point, Preset, PRESET_NAMES};
use lbsim::report::{self, capacity_sufficient, output_paths, RunWriter};
use lbsim::scenario::parse_scenario;
use lbsim::sweep::{expand, Axis};

#[derive(Parser)]
#[command(name = "lbsim", version, about = "Fat-tree load balancing and loss recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a JSON scenario file.
    Run {
        /// Preset name or path to a scenario config.
        target: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run the cross product of one or more axes over a preset or config.
    Sweep {
        target: String,
        /// `field.path=v1,v2,...`; repeat for more axes.
        #[arg(long = "axis", required = true)]
        axes: Vec<Axis>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List preset names.
    ListPresets,
    /// Print the grid of a preset without running it.
    Describe { target: String },
}

#[derive(Args)]
struct RunOpts {
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(short = 'j', long, default_value_t = 0)]
    workers: usize,
    /// Replace every point's seed list.
    #[arg(long, value_delimiter = ',', conflicts_with = "seed_count")]
    seeds: Option<Vec<u64>>,
    /// Shorthand for `--seeds 1,2,...,N`.
    #[arg(long)]
    seed_count: Option<u64>,
    #[arg(short, long, default_value = "results")]
    out: PathBuf,
}

impl RunOpts {
    fn seed_list(&self) -> Option<Vec<u64>> {
        match (&self.seeds, self.seed_count) {
            (Some(s), _) => Some(s.clone()),
            (None, Some(n)) => Some((1..=n).collect()),
            (None, None) => None,
        }
    }
}

fn load_target(target: &str) -> Result<Preset> {
    if let Some(p) = preset(target) {
        return Ok(p);
    }
    let path = Path::new(target);
    if !path.exists() {
        bail!(
            "`{target}` is neither a preset nor a config file (presets: {})",
            PRESET_NAMES.join(", ")
        );
    }
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let scenario = parse_scenario(&text).with_context(|| format!("parsing {}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "config".into());
    Ok(Preset {
        name: name.clone(),
        description: format!("scenario from {}", path.display()),
        points: vec![Point {
            label: name,
            scenario,
        }],
    })
}

fn describe(p: &Preset) {
    println!("{}: {}", p.name, p.description);
    println!("{} points, {} runs", p.points.len(), p.total_runs());
    for pt in &p.points {
        let sc = &pt.scenario;
        let cap = match capacity_sufficient(sc) {
            Some(false) => "  [insufficient capacity]",
            _ => "",
        };
        println!(
            "  {:<40} {}  k={} lb={} rec={} c={} seeds={:?}{cap}",
            pt.label,
            sc.fingerprint(),
            sc.topology.k,
            sc.lb.name(),
            sc.recovery.name(),
            sc.rate_coefficient,
            sc.seeds,
        );
    }
}

fn execute(p: Preset, opts: &RunOpts) -> Result<bool> {
    let p = match opts.seed_list() {
        Some(s) if s.is_empty() => bail!("seed list is empty"),
        Some(s) => p.with_seeds(&s),
        None => p,
    };
    std::fs::create_dir_all(&opts.out)
        .with_context(|| format!("creating {}", opts.out.display()))?;
    for pt in &p.points {
        if capacity_sufficient(&pt.scenario) == Some(false) {
            eprintln!("note: {}: failures leave insufficient pod uplink capacity", pt.label);
        }
    }
    let (runs_path, agg_path) = output_paths(&opts.out, &p.name);
    let writer = Mutex::new(RunWriter::create(&runs_path, &p)?);
    let total = p.total_runs();
    let done = AtomicUsize::new(0);
    let progress = |r: &RunRecord| {
        let i = done.fetch_add(1, Ordering::Relaxed) + 1;
        let label = &p.points[r.point].label;
        match &r.outcome {
            Ok(m) => eprintln!(
                "[{i}/{total}] {label} seed={} {:?} norm={:.4} ({:.1}s)",
                r.seed,
                m.status,
                m.normalized_cct(),
                r.wall_ms / 1e3
            ),
            Err(e) => eprintln!("[{i}/{total}] {label} seed={} error: {e}", r.seed),
        }
        let mut w = writer.lock().expect("writer lock");
        if let Err(e) = w.append(r) {
            eprintln!("warning: {e}");
        }
    };
    let records = run_points(&p.points, opts.workers, &progress);
    drop(writer);
    report::finalize(&opts.out, &p, &records)?;

    for row in report::aggregate_rows(&p, &records) {
        let v = &row.values;
        match (v.normalized_cct_mean, v.normalized_cct_sd) {
            (Some(m), Some(sd)) => println!(
                "{:<40} norm_cct {m:.4} ± {sd:.4}  complete {}/{}",
                row.fields.point, v.n_complete, v.n_runs
            ),
            _ => println!(
                "{:<40} no complete runs ({} attempted)",
                row.fields.point, v.n_runs
            ),
        }
    }
    println!("wrote {} and {}", runs_path.display(), agg_path.display());
    Ok(records.iter().all(RunRecord::is_complete))
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let all_complete = match cli.command {
        Command::ListPresets => {
            for name in PRESET_NAMES {
                let p = preset(name).expect("listed preset exists");
                println!("{name:<26} {}", p.description);
            }
            true
        }
        Command::Describe { target } => {
            describe(&load_target(&target)?);
            true
        }
        Command::Run { target, opts } => execute(load_target(&target)?, &opts)?,
        Command::Sweep { target, axes, opts } => {
            let base = load_target(&target)?;
            execute(expand(&base, &axes)?, &opts)?
        }
    };
    if all_complete {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("some runs did not complete; see the status column");
        Ok(ExitCode::from(2))
    }
}
