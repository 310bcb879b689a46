use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use meshwalk::io::{self, execute_bands, execute_run, load_config, Preset, RunFile};
use meshwalk::potentials::spectrum;
use meshwalk::Result;

#[derive(Parser)]
#[command(name = "meshwalk", version, about = "Photonic quantum walks with drifting complex potentials")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "MESHWALK_OUT")]
    out: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the step count.
    #[arg(long, global = true)]
    steps: Option<u64>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config.
    Run { config: PathBuf },
    /// Moving-frame quasi-energy table.
    Bands {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 512)]
        points: usize,
    },
    /// Channel roots, with Born weights when a config supplies the potential.
    Channels {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        v: f64,
        #[arg(long)]
        q0: f64,
        #[arg(long, default_value_t = -5, allow_hyphen_values = true)]
        alpha_min: i32,
        #[arg(long, default_value_t = 5, allow_hyphen_values = true)]
        alpha_max: i32,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Fourier spectrum of a config's potential shape on (-pi, pi].
    Spectrum {
        config: PathBuf,
        #[arg(long, default_value_t = 257)]
        points: usize,
    },
    /// Run a bundled scenario: fig2, fig3a, fig3b, fig3c or fig4.
    Preset { name: String },
}

fn load(path: &Path, cli: &Cli) -> Result<RunFile> {
    let mut run = load_config(path)?;
    override_run(&mut run, cli);
    Ok(run)
}

fn override_run(run: &mut RunFile, cli: &Cli) {
    if let Some(seed) = cli.seed {
        run.seed = seed;
    }
    if let Some(steps) = cli.steps {
        run.steps = steps;
    }
}

fn out_dir(cli: &Cli, run: Option<&RunFile>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| run.and_then(|r| r.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("meshwalk-out"))
}

fn names(paths: &[PathBuf]) -> String {
    paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" ")
}

fn run_file(run: &RunFile, cli: &Cli) -> Result<String> {
    let dir = out_dir(cli, Some(run));
    let report = execute_run(run, &dir)?;
    Ok(format!(
        "final_residual={:e} steps={} channels={} runtime={:.2}s wrote {}",
        report.summary.final_residual,
        run.steps,
        report.summary.channels.len(),
        report.summary.runtime_seconds,
        names(&report.written)
    ))
}

fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Run { config } => {
            let run = load(config, cli)?;
            run_file(&run, cli)
        }
        Command::Bands { beta, v, points } => {
            let written = execute_bands(*beta, *v, *points, None, &out_dir(cli, None))?;
            Ok(format!("{points} band rows, wrote {}", names(&written)))
        }
        Command::Channels { beta, v, q0, alpha_min, alpha_max, config } => {
            let params = meshwalk::bands::MovingFrameParams::new(*beta, *v)?;
            let mut set = meshwalk::bands::enumerate_channels(&params, *q0, *alpha_min..=*alpha_max)?;
            let born = match config {
                Some(path) => {
                    let run = load(path, cli)?;
                    let shape = run.potential.shape.build(run.seed)?;
                    let born = meshwalk::born::born_weights(&set, &shape)?;
                    born.apply_to(&mut set);
                    Some(born)
                }
                None => None,
            };
            let rows = io::channel_rows(&set, born.as_ref(), None);
            let path = out_dir(cli, None).join("channels.csv");
            io::write_channel_table(&rows, &path)?;
            Ok(format!("{} channels, wrote {}", rows.len(), path.display()))
        }
        Command::Spectrum { config, points } => {
            let run = load(config, cli)?;
            let shape = run.potential.shape.build(run.seed)?;
            let n = (*points).max(1);
            let q: Vec<f64> = (1..=n).map(|k| -PI + 2.0 * PI * k as f64 / n as f64).collect();
            let values = spectrum(&shape, &q)?;
            let path = out_dir(cli, Some(&run)).join("spectrum.csv");
            io::write_spectrum(&q, &values, &path)?;
            let method = if shape.spectrum_analytic(0.0).is_some() { "analytic" } else { "fft" };
            Ok(format!("{n} spectrum points ({method}), wrote {}", path.display()))
        }
        Command::Preset { name } => match io::preset(name)? {
            Preset::Bands { beta, drift, q0, alphas, points } => {
                let written = execute_bands(beta, drift, points, Some((q0, alphas)), &out_dir(cli, None))?;
                Ok(format!("preset {name}: wrote {}", names(&written)))
            }
            Preset::Run(mut run) => {
                override_run(&mut run, cli);
                Ok(format!("preset {name}: {}", run_file(&run, cli)?))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("meshwalk: error: {e}");
            ExitCode::FAILURE
        }
    }
}
