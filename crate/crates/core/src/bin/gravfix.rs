use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gravfix::gravmap::{load_mass_list, save_grid, synthesize_grid, GridExtent, SynthOptions, BACKGROUND_GRADIENT};
use gravfix::harness::{export, run_campaign, Scenario, ScenarioConfig, SweepSpec};

#[derive(Parser)]
#[command(name = "gravfix", version, about = "Gravity-gradient aided inertial navigation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and write CSV results.
    Simulate(SimulateArgs),
    /// Gravity-gradient map tools.
    Gravmap {
        #[command(subcommand)]
        command: GravmapCommand,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Disable the particle filter.
    #[arg(long)]
    unaided: bool,
    /// Parameter sweep, e.g. `phase_noise=0,5e-3,10e-3`. Repeatable.
    #[arg(long)]
    sweep: Vec<SweepSpec>,
    /// Stop every run after this many seconds.
    #[arg(long)]
    truncate: Option<f64>,
}

#[derive(Subcommand)]
enum GravmapCommand {
    /// Synthesize a grid from a point-mass list (`lat lon depth mass` per line).
    Synth(SynthArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    masses: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Grid bounds in degrees; default to the mass extent plus a margin.
    #[arg(long, allow_hyphen_values = true)]
    lat_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lat_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lon_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lon_max: Option<f64>,
    /// Node spacing in degrees.
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
    /// Reference altitude of the grid (m).
    #[arg(long, default_value_t = 0.0)]
    altitude: f64,
    #[arg(long, default_value_t = 0)]
    priority: i32,
    #[arg(long, default_value_t = BACKGROUND_GRADIENT)]
    background: f64,
}

fn simulate(args: SimulateArgs) -> gravfix::Result<()> {
    let mut config = ScenarioConfig::load(&args.config)?;
    if let Some(n) = args.runs {
        config.runs = n;
    }
    if args.unaided {
        config.unaided = true;
    }
    if args.truncate.is_some() {
        config.truncate = args.truncate;
    }
    if !args.sweep.is_empty() {
        config.sweeps = args.sweep;
    }
    config.validate()?;
    let scenario = Scenario::new(&config)?;
    eprintln!(
        "simulating {} run(s) of {} s over {} map grid(s)",
        config.runs,
        scenario.duration_secs(),
        scenario.maps.len()
    );
    let campaign = run_campaign(&scenario)?;
    export(&campaign, &args.out)?;
    let (mean, std) = campaign.main.route_average();
    let (fin, _) = campaign.main.final_error();
    println!("{}: route-averaged radial error {mean:.1} ± {std:.1} m, final {fin:.1} m", campaign.main.label);
    for p in &campaign.sweeps {
        println!(
            "{}={}: {:.1} ± {:.1} m (after settle {:.1} ± {:.1} m)",
            p.parameter.name(),
            p.value,
            p.mean_error,
            p.std_error,
            p.mean_error_settled,
            p.std_error_settled
        );
    }
    println!("results written to {}", args.out.display());
    Ok(())
}

fn synth(args: SynthArgs) -> gravfix::Result<()> {
    let masses = load_mass_list(&args.masses)?;
    if masses.is_empty() {
        return Err(gravfix::Error::Config(format!("{} contains no masses", args.masses.display())));
    }
    let margin = 5.0 * args.resolution;
    let lats = masses.iter().map(|m| m.lat);
    let lons = masses.iter().map(|m| m.lon);
    let lat_min = args.lat_min.unwrap_or(lats.clone().fold(f64::INFINITY, f64::min) - margin);
    let lat_max = args.lat_max.unwrap_or(lats.fold(f64::NEG_INFINITY, f64::max) + margin);
    let lon_min = args.lon_min.unwrap_or(lons.clone().fold(f64::INFINITY, f64::min) - margin);
    let lon_max = args.lon_max.unwrap_or(lons.fold(f64::NEG_INFINITY, f64::max) + margin);
    if !(lat_max > lat_min && lon_max > lon_min && args.resolution > 0.0) {
        return Err(gravfix::Error::Config("empty grid bounds or non-positive resolution".into()));
    }
    let extent = GridExtent::covering(lat_min, lat_max, lon_min, lon_max, args.resolution, args.resolution);
    let opts = SynthOptions {
        reference_altitude: args.altitude,
        background: args.background,
        priority: args.priority,
        cutoff_radius: None,
    };
    let grid = synthesize_grid(&masses, &extent, &opts)?;
    save_grid(&grid, &args.out)?;
    println!(
        "wrote {}x{} grid from {} masses to {}",
        grid.n_rows,
        grid.n_cols,
        masses.len(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Gravmap { command: GravmapCommand::Synth(args) } => synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
