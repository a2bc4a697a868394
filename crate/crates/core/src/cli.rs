//! Command-line surface.
//!
//! Exit codes: 0 on success, 1 when a run fails (invalid value, bad input
//! file, I/O), 2 for usage errors such as unknown subcommands or keys.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{compare_maps, transfer_experiment, validation_curves};
use crate::config::RunConfig;
use crate::engine::{self, Experiment};
use crate::error::{Error, Result};
use crate::formats::{self, MapFormat};
use crate::map::ImportanceMap;

#[derive(Parser, Debug)]
#[command(
    name = "frame-importance",
    version,
    about = "Frame importance maps for imitation learning demonstrations"
)]
struct Cli {
    /// Configuration file of `key=value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct DemoSource {
    /// Demo file to use instead of generating expert demos from the config.
    #[arg(long, value_name = "PATH")]
    demos: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate expert demonstrations.
    GenDemos {
        /// Output path [default: <out_dir>/demos.csv].
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Build an importance map from random masks.
    Run {
        #[command(flatten)]
        source: DemoSource,
    },
    /// Retrain on random half-coverage segment masks and report return spread.
    Probe {
        #[command(flatten)]
        source: DemoSource,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Retrain on top/bottom threshold masks of a map.
    Curves {
        #[command(flatten)]
        source: DemoSource,
        #[arg(long, value_name = "PATH")]
        map: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "10,30,50,70,90")]
        percents: Vec<f64>,
    },
    /// Per-cell deviation between two min-max scaled maps.
    Compare { a: PathBuf, b: PathBuf },
    /// Train the configured learner on masks distilled from two maps and a random mask.
    Transfer {
        #[command(flatten)]
        source: DemoSource,
        /// Map from the other learner.
        #[arg(long, value_name = "PATH")]
        source_map: PathBuf,
        /// Map from the configured learner.
        #[arg(long, value_name = "PATH")]
        target_map: PathBuf,
        #[arg(long, default_value_t = 30.0)]
        percent: f64,
    },
    /// Average several maps of the same shape.
    Combine {
        #[arg(required = true)]
        maps: Vec<PathBuf>,
        /// Output path [default: <out_dir>/map_combined.csv].
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UnknownKey(_) => 2,
        _ => 1,
    }
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::parse(&formats::read_file(p)?)?,
        None => RunConfig::default(),
    };
    for o in overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn experiment(cfg: RunConfig, source: &DemoSource) -> Result<Experiment> {
    match &source.demos {
        Some(path) => Experiment::with_demos(cfg, formats::load_demos(path)?),
        None => Experiment::from_config(cfg),
    }
}

fn write_map(map: &ImportanceMap, csv: &Path) -> Result<()> {
    formats::export_map(map, csv, MapFormat::Csv)?;
    formats::export_map(map, &csv.with_extension("pgm"), MapFormat::Pgm)
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref(), &cli.set)?;
    let out = cfg.out_dir.clone();
    match cli.command {
        Command::GenDemos { out: path } => {
            let demos = Experiment::from_config(cfg)?.demos;
            let path = path.unwrap_or_else(|| out.join("demos.csv"));
            formats::save_demos(&path, &demos)?;
            println!("wrote {}", path.display());
        }
        Command::Run { source } => {
            let exp = experiment(cfg, &source)?;
            let (map, log) = engine::run(&exp)?;
            write_map(&map, &out.join("map.csv"))?;
            formats::write_file(&out.join("runlog.csv"), &formats::write_runlog(&log))?;
            formats::write_file(&out.join("config.txt"), &exp.config.to_text())?;
            let empty = log.records.iter().filter(|r| r.empty_trainset).count();
            println!(
                "{} masks, p={}, {} empty training sets; wrote {}",
                log.records.len(),
                log.keep_fraction,
                empty,
                out.join("map.csv").display()
            );
        }
        Command::Probe { source, count } => {
            let exp = experiment(cfg, &source)?;
            let results = engine::variance_probe(&exp, count)?;
            formats::write_file(&out.join("probe.csv"), &formats::write_probe(&results))?;
            let means = results.iter().map(|r| r.stats.mean);
            let hi = means.clone().fold(f64::NEG_INFINITY, f64::max);
            let lo = means.fold(f64::INFINITY, f64::min);
            println!("spread {} (max {hi}, min {lo})", hi - lo);
        }
        Command::Curves {
            source,
            map,
            percents,
        } => {
            let seed = cfg.seed;
            let exp = experiment(cfg, &source)?;
            let map = formats::load_map(&map)?;
            let points = validation_curves(&map, &exp, &percents)?;
            formats::write_file(&out.join("curves.csv"), &formats::write_curves(seed, &points))?;
            let failed = points.iter().filter(|p| p.error.is_some()).count();
            println!("{} curve points, {failed} failed", points.len());
        }
        Command::Compare { a, b } => {
            let cmp = compare_maps(&formats::load_map(&a)?, &formats::load_map(&b)?)?;
            let dev = ImportanceMap::from_values(cmp.rows, cmp.cols, cmp.deviation.clone())?;
            write_map(&dev, &out.join("deviation.csv"))?;
            formats::write_file(
                &out.join("deviation_summary.csv"),
                &formats::write_comparison_summary(&cmp),
            )?;
            println!("mean deviation {} (max {})", cmp.mean, cmp.max);
        }
        Command::Transfer {
            source,
            source_map,
            target_map,
            percent,
        } => {
            let seed = cfg.seed;
            let exp = experiment(cfg, &source)?;
            let learner = exp.learner.clone();
            let points = transfer_experiment(
                &formats::load_map(&source_map)?,
                &formats::load_map(&target_map)?,
                &learner,
                percent,
                &exp,
            )?;
            formats::write_file(
                &out.join("transfer.csv"),
                &formats::write_transfer(seed, percent, &points),
            )?;
            for p in &points {
                println!("{}: mean {} std {}", p.condition, p.stats.mean, p.stats.std);
            }
        }
        Command::Combine { maps, out: path } => {
            let maps = maps
                .iter()
                .map(|p| formats::load_map(p))
                .collect::<Result<Vec<_>>>()?;
            let combined = engine::combine_maps(&maps)?;
            let path = path.unwrap_or_else(|| out.join("map_combined.csv"));
            write_map(&combined, &path)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
