use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use lanesim_core::output;
use lanesim_core::plot::{render_frame_svg, PlotConfig};
use lanesim_core::scenario::{builtin, builtin_descriptions, parse_scenario, run_scenario, Scenario};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lanesim", version, about = "Scenario runner for the lane-detection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config file
    Run {
        /// Path to a scenario config (flat key = value format)
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run one of the built-in scenarios
    RunBuiltin {
        /// Scenario name (see `list-scenarios`)
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// List the built-in scenarios
    ListScenarios,
}

#[derive(clap::Args)]
struct RunOpts {
    /// Output directory for CSV/JSON (and SVG with --plots)
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also render one SVG per frame
    #[arg(long)]
    plots: bool,
    /// Frame range for plot rendering, first..last inclusive (default all)
    #[arg(long, value_parser = parse_frame_range)]
    frames: Option<(usize, usize)>,
}

fn parse_frame_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| "expected first..last".to_string())?;
    let a: usize = a.parse().map_err(|_| format!("bad frame index `{a}`"))?;
    let b: usize = b.parse().map_err(|_| format!("bad frame index `{b}`"))?;
    if b < a {
        return Err("range end before start".into());
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListScenarios => {
            for (name, desc) in builtin_descriptions() {
                println!("{name:16} {desc}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Run { config, opts } => load_file(&config).and_then(|scn| execute(&scn, &opts)),
        Command::RunBuiltin { name, opts } => match builtin(&name) {
            Some(scn) => execute(&scn, &opts),
            None => Err(anyhow::anyhow!(
                "unknown scenario `{name}`; try `lanesim list-scenarios`"
            )),
        },
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} frame(s) reported errors");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_file(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("parsing {}", path.display()))
}

fn execute(scn: &Scenario, opts: &RunOpts) -> Result<usize> {
    let out = run_scenario(scn)?;
    fs::create_dir_all(&opts.out)
        .with_context(|| format!("creating output directory {}", opts.out.display()))?;

    let write = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let path = opts.out.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
        Ok(())
    };
    let mut buf = Vec::new();
    output::write_points_csv(&out.artifacts, &mut buf)?;
    write("points.csv", std::mem::take(&mut buf))?;
    output::write_traced_csv(&out.artifacts, &mut buf)?;
    write("traced.csv", std::mem::take(&mut buf))?;
    output::write_trajectory_csv(&out.artifacts, &mut buf)?;
    write("trajectory.csv", std::mem::take(&mut buf))?;
    output::write_report_json(&out.report, &mut buf)?;
    write("report.json", std::mem::take(&mut buf))?;

    if opts.plots {
        let (lo, hi) = opts
            .frames
            .unwrap_or((0, out.artifacts.len().saturating_sub(1)));
        let plot_cfg = PlotConfig::default();
        for art in &out.artifacts {
            if art.frame < lo || art.frame > hi {
                continue;
            }
            let svg = render_frame_svg(art, &plot_cfg);
            write(&format!("frame_{}.svg", art.frame), svg.into_bytes())?;
        }
    }

    for (frame, ms) in out.frame_times_ms.iter().enumerate() {
        let rep = &out.report.frames[frame];
        let purity = rep
            .aldm
            .as_ref()
            .and_then(|d| d.purity)
            .map(|p| format!("{p:.3}"))
            .unwrap_or_else(|| "-".into());
        println!("frame {frame}: {ms:.2} ms, aldm purity {purity}");
    }
    let summary = &out.report.summary;
    println!(
        "{}: {} frames, {} with errors",
        scn.name, summary.frames, summary.frame_errors
    );
    if let Some(aldm) = &summary.aldm {
        if let (Some(p), Some(prev)) = (&aldm.purity, &aldm.ego_preview_m) {
            println!(
                "aldm: purity mean {:.3} (min {:.3}), ego preview min {:.1} m",
                p.mean, p.min, prev.min
            );
        }
    }
    if let Some(base) = &summary.baseline {
        if let Some(prev) = &base.ego_preview_m {
            println!("baseline: ego preview min {:.1} m", prev.min);
        }
    }
    Ok(summary.frame_errors)
}
