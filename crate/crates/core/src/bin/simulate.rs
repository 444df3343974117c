use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use vlc_noma::config::{load_fixed_assignment, ScenarioConfig};
use vlc_noma::noma::NomaMode;
use vlc_noma::output;
use vlc_noma::receiver::ReceiverKind;
use vlc_noma::runner::{RunMode, Simulation};
use vlc_noma::Error;

/// Exit status for command-line usage errors.
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReceiverArg {
    Adr,
    Wide,
    Compare,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Literal,
    Sic,
}

/// Simulate a NOMA visible-light downlink with angle diversity or wide-FOV receivers.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// Scenario file (TOML).
    scenario: PathBuf,

    #[arg(long, value_enum, default_value = "compare")]
    receiver: ReceiverArg,

    /// Override the scenario's NOMA SINR mode.
    #[arg(long, value_enum)]
    noma_mode: Option<ModeArg>,

    /// Override the highest traced reflection order.
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
    orders: Option<u8>,

    /// Also sweep a single user over a receiver-plane grid with this step [m].
    #[arg(long, value_name = "STEP_M")]
    grid: Option<f64>,

    /// Write every traced impulse response as CSV into this directory.
    #[arg(long, value_name = "DIR")]
    dump_ir: Option<PathBuf>,

    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,

    /// TOML file with `serving_ap = [..]` fixing each user's AP.
    #[arg(long, value_name = "FILE")]
    fixed_assignment: Option<PathBuf>,
}

fn run(args: &Args) -> Result<(), Error> {
    let mut config = ScenarioConfig::load(&args.scenario)?;
    if let Some(m) = args.noma_mode {
        config.noma.mode = match m {
            ModeArg::Literal => NomaMode::Literal,
            ModeArg::Sic => NomaMode::Sic,
        };
    }
    if let Some(o) = args.orders {
        config.tracing.max_order = o;
    }
    let mode = match args.receiver {
        ReceiverArg::Adr => RunMode::Single(ReceiverKind::Adr),
        ReceiverArg::Wide => RunMode::Single(ReceiverKind::Wide),
        ReceiverArg::Compare => RunMode::Compare,
    };

    let sim = Simulation::new(config)?;
    let fixed = args
        .fixed_assignment
        .as_ref()
        .map(|p| load_fixed_assignment(p, sim.config.users.len(), sim.aps.len()))
        .transpose()?
        .or_else(|| sim.config.fixed_assignment());

    let bundle = sim.run_mode(mode, fixed.as_ref(), args.dump_ir.is_some())?;
    let grid = match args.grid {
        Some(step) => {
            let mut rows = Vec::new();
            for kind in mode.kinds() {
                rows.extend(sim.sweep_grid(kind, step)?);
            }
            Some(rows)
        }
        None => None,
    };

    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io { path: args.out.clone(), source: e })?;
    output::write_links(&args.out.join("links.csv"), &bundle, &sim.config)?;
    output::write_allocation(&args.out.join("allocation.csv"), &bundle, &sim.config)?;
    output::write_summary(&args.out.join("summary.csv"), &bundle)?;
    if let Some(rows) = &grid {
        output::write_grid(&args.out.join("grid.csv"), rows)?;
    }
    if let Some(dir) = &args.dump_ir {
        let n = output::dump_responses(dir, &bundle)?;
        log::info!("wrote {n} impulse responses to {}", dir.display());
    }
    let receiver = format!("{:?}", args.receiver).to_lowercase();
    output::write_manifest(
        &args.out.join("manifest.toml"),
        &bundle,
        &sim.config,
        &receiver,
        rayon::current_num_threads(),
    )?;

    for run in &bundle.runs {
        let a = &run.allocation;
        println!("[{}] assignment {} ({}), sum SINR {:.4e}", run.kind, a.assignment, a.search, a.evaluation.sum_sinr);
        println!("  user  ap  branch  dc_gain      bw_MHz    SINR_dB   rate_Mbps");
        for l in run.links() {
            println!(
                "  {:>4}  {:>2}  {:>6}  {:<11.4e}  {:>8.1}  {:>8.2}  {:>9.2}",
                l.user,
                l.serving_ap,
                l.branch,
                l.dc_gain,
                l.channel_bandwidth / 1e6,
                l.sinr_db,
                l.data_rate / 1e6
            );
        }
    }
    if let Some(cmp) = &bundle.comparison {
        for r in &cmp.rows {
            println!("user {}: ADR improves data rate by {:.1}%", r.user, r.improvement_pct);
        }
        println!("average improvement: {:.1}%", cmp.mean_improvement_pct);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match args.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&args)),
            Err(e) => {
                eprintln!("error: cannot start {n} worker threads: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        None => run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
