//! Command line interface.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::eavesdrop::solve_eavesdrop;
use crate::jamming::{solve_jamming, JammingStart};
use crate::model::{generate_channels, mrt_precoder, Geometry, SystemParams};
use crate::oracle::{grid_search_eavesdrop, grid_search_jamming, GridSpec};
use crate::{Error, Result};

use super::config::{ExperimentConfig, SweepVariable};
use super::csv::render_csv;
use super::plot::plot_script;
use super::sweep::run_sweep;
use super::{baseline_no_ris, Case};

/// Worst-case secrecy rate of a MISO link whose RIS is controlled by the
/// eavesdropper.
#[derive(Debug, Parser)]
#[command(name = "ris-secrecy", version, arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the number of RIS elements and write a CSV table.
    SweepN(SweepArgs),
    /// Sweep the RIS position along y and write a CSV table.
    SweepY(SweepArgs),
    /// Solve one channel realization and print phases, jamming power and rates.
    Solve(SolveArgs),
    /// Compare the solvers against exhaustive grid search on tiny instances.
    OracleCheck(OracleArgs),
    /// Write a matplotlib script that plots a sweep CSV.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML experiment file; missing keys take reference values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use seeds 0..COUNT instead of the configured seeds.
    #[arg(long)]
    seed_count: Option<u64>,
    /// Comma-separated subset of no_ris, eavesdrop_only, eavesdrop_jam.
    #[arg(long, value_delimiter = ',')]
    cases: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output CSV; defaults to the configured path, else standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Channel realization to solve.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Instances per element count.
    #[arg(long, default_value_t = 5)]
    seed_count: u64,
    /// Allowed excess of the passive-attack solver over the grid, bits/s/Hz.
    #[arg(long, default_value_t = 0.05)]
    passive_tol: f64,
    /// Allowed excess of the jamming-attack solver over the grid, bits/s/Hz.
    #[arg(long, default_value_t = 0.1)]
    jam_tol: f64,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Sweep CSV the script will read.
    csv: PathBuf,
    /// Script path; defaults to the CSV path with a `.py` extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(n) = self.seed_count {
            config.seeds = (0..n).collect();
        }
        if let Some(list) = &self.cases {
            config.cases = list.iter().map(|s| s.parse()).collect::<Result<Vec<Case>>>()?;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            1
        }
    }
}

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let stdout_err = |e| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    match cli.command {
        Command::SweepN(args) => sweep(args, SweepVariable::Elements, out),
        Command::SweepY(args) => sweep(args, SweepVariable::RisY, out),
        Command::Solve(args) => solve(args, out),
        Command::OracleCheck(args) => oracle_check(args, out),
        Command::Plot(args) => {
            let path = args.out.unwrap_or_else(|| args.csv.with_extension("py"));
            std::fs::write(&path, plot_script(&args.csv)).map_err(io_err(&path))?;
            writeln!(out, "{}", path.display()).map_err(stdout_err)?;
            Ok(0)
        }
    }
}

fn sweep(args: SweepArgs, variable: SweepVariable, out: &mut dyn Write) -> Result<i32> {
    let config = args.common.load()?.with_variable(variable);
    let report = run_sweep(&config)?;
    for row in report.rows.iter().filter(|r| r.flagged) {
        eprintln!(
            "warning: {} = {} {}: {} of {} seeds failed",
            row.variable,
            row.value,
            row.case,
            row.failures,
            row.failures + row.n_seeds
        );
    }
    let text = render_csv(&report.rows)?;
    match args.out.or(config.output) {
        Some(path) => std::fs::write(&path, text).map_err(io_err(&path))?,
        None => out
            .write_all(text.as_bytes())
            .map_err(io_err(std::path::Path::new("<stdout>")))?,
    }
    Ok(0)
}

fn format_phases(theta: &[f64]) -> String {
    theta.iter().map(|t| format!("{t:.4}")).collect::<Vec<_>>().join(" ")
}

fn solve(args: SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let config = args.common.load()?;
    let (geometry, params) = (config.geometry, config.params);
    let seed = args.seed;
    let channels = generate_channels(&geometry, &params, seed)?;
    let precoder = mrt_precoder(&channels.tx_bob, params.tx_power)?;

    let mut text = format!(
        "seed {seed}, M = {}, N = {}, RIS at ({}, {}, {})\n",
        params.antennas, params.elements, geometry.ris[0], geometry.ris[1], geometry.ris[2]
    );
    let mut passive_relaxed = None;
    for case in Case::ALL.into_iter().filter(|c| config.cases.contains(c)) {
        match case {
            Case::NoRis => {
                let rate = baseline_no_ris(&channels, &precoder)?;
                text += &format!("no_ris          rate {rate:.6} bits/s/Hz\n");
            }
            Case::EavesdropOnly => {
                let s = solve_eavesdrop(&channels, &precoder, &config.eavesdrop_options(seed))?;
                text += &format!(
                    "eavesdrop_only  rate {:.6} bits/s/Hz (relaxation bound {:.6})\n  theta (rad): {}\n",
                    s.rate,
                    s.rate_bound().max(0.0),
                    format_phases(s.reflect.theta())
                );
                passive_relaxed = Some(s.relaxed);
            }
            Case::EavesdropJam => {
                let start = passive_relaxed
                    .take()
                    .map_or(JammingStart::Relaxed, JammingStart::Matrix);
                let s = solve_jamming(
                    &channels,
                    &precoder,
                    params.jam_power_max,
                    &config.jamming_options(seed, start),
                )?;
                text += &format!(
                    "eavesdrop_jam   rate {:.6} bits/s/Hz, P_j {:.6} W, {} iterations{}\n  theta (rad): {}\n",
                    s.rate,
                    s.jam_power,
                    s.iterations,
                    if s.converged { "" } else { " (not converged)" },
                    format_phases(s.reflect.theta())
                );
            }
        }
    }
    out.write_all(text.as_bytes())
        .map_err(io_err(std::path::Path::new("<stdout>")))?;
    Ok(0)
}

fn oracle_check(args: OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let mut text = String::from("elements seed case solver_rate grid_rate excess status\n");
    let mut failed = 0;
    for elements in [2, 3] {
        let mut params = SystemParams::reference(elements);
        params.antennas = 2;
        for seed in 0..args.seed_count {
            let channels = generate_channels(&Geometry::reference(-10.0), &params, seed)?;
            let precoder = mrt_precoder(&channels.tx_bob, params.tx_power)?;
            let passive = solve_eavesdrop(&channels, &precoder, &Default::default())?.rate;
            let passive_grid = grid_search_eavesdrop(
                &channels,
                &precoder,
                &GridSpec {
                    phase_levels: 64,
                    ..GridSpec::default()
                },
            )?
            .rate;
            let jam = solve_jamming(&channels, &precoder, params.jam_power_max, &Default::default())?.rate;
            let jam_grid = grid_search_jamming(
                &channels,
                &precoder,
                params.jam_power_max,
                &GridSpec {
                    phase_levels: 16,
                    power_points: 21,
                    ..GridSpec::default()
                },
            )?
            .rate;
            for (case, rate, grid, tol) in [
                (Case::EavesdropOnly, passive, passive_grid, args.passive_tol),
                (Case::EavesdropJam, jam, jam_grid, args.jam_tol),
            ] {
                let excess = rate - grid;
                let ok = excess <= tol;
                failed += usize::from(!ok);
                text += &format!(
                    "{elements} {seed} {case} {rate:.6} {grid:.6} {excess:+.6} {}\n",
                    if ok { "ok" } else { "FAIL" }
                );
            }
        }
    }
    text += &format!("{failed} failure(s)\n");
    out.write_all(text.as_bytes())
        .map_err(io_err(std::path::Path::new("<stdout>")))?;
    Ok(if failed == 0 { 0 } else { 1 })
}
