use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iadm_core::analysis::{GapReference, Window};
use iadm_sim::{cmd_compare, cmd_run, cmd_stability, Options, Outcome, SimError};

/// Platoon simulations with the IADM and IDM car-following models.
#[derive(Debug, Parser)]
#[command(name = "iadm-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write its trajectory, metrics and charts.
    Run {
        /// Scenario file, or the name of a bundled scenario.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate two scenarios side by side.
    Compare {
        /// Pass twice: first and second scenario.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Measure the response to the scenario's speed perturbation.
    Stability {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Link seed, replacing the one in the scenario.
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=iadm_sim::config::MAX_SEED))]
    seed: Option<u64>,
    /// Skip the SVG charts.
    #[arg(long)]
    no_svg: bool,
    /// Metric window in seconds, as start,end.
    #[arg(long, value_parser = parse_window, default_value = "20,200")]
    window: Window,
    /// Reference for gap errors.
    #[arg(long, value_enum, default_value_t = GapRef::PlatoonLeader)]
    gap_reference: GapRef,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GapRef {
    /// Gap of the platoon leader.
    PlatoonLeader,
    /// Each vehicle's own safe gap.
    SafeGap,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            seed: self.seed,
            svg: !self.no_svg,
            window: self.window,
            gap_reference: match self.gap_reference {
                GapRef::PlatoonLeader => GapReference::PlatoonLeader,
                GapRef::SafeGap => GapReference::SafeGap,
            },
        }
    }
}

fn parse_window(text: &str) -> Result<Window, String> {
    let (start, end) = text.split_once(',').ok_or("expected start,end")?;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    Window::new(parse(start)?, parse(end)?).map_err(|e| e.to_string())
}

fn dispatch(command: &Command) -> Result<Outcome, SimError> {
    match command {
        Command::Run { config, common } => cmd_run(config, &common.out, &common.options()),
        Command::Compare { config, common } => cmd_compare(config, &common.out, &common.options()),
        Command::Stability { config, common } => cmd_stability(config, &common.out, &common.options()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            println!(
                "wrote {} files to {}",
                outcome.manifest.artifacts.len() + 1,
                outcome.manifest.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
