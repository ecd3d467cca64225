//! Command-line front end: single analyses, temperature sweeps, power-law
//! fits, the acceptance suite, Langevin simulation, and refutation reports.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use spectra::config::{resolve_potential, PotentialConfig};
use spectra::entropy::LsiOpts;
use spectra::langevin::{
    equilibrium_chi_square, export_autocorrelation, gap_estimate, simulate, Observable, SimConfig,
};
use spectra::potential::PiecewisePotential;
use spectra::quadrature::GridSpec;
use spectra::sweep::{
    log_grid, power_fit, refutation_report, run_sweep, write_csv, Quantities, Quantity, SweepOpts,
    SweepTable,
};
use spectra::{Result, SpectraError};

#[derive(Parser)]
#[command(
    name = "spectra",
    about = "Poincare and log-Sobolev constants of low-temperature Gibbs measures",
    version
)]
struct Cli {
    /// Worker threads for sweeps (default: SPECTRA_JOBS or all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute every constant at a single temperature.
    Analyze(AnalyzeArgs),
    /// Compute constants over a decreasing temperature grid.
    Sweep(SweepArgs),
    /// Fit a power law `c0 + c t^q` to a swept quantity.
    Fit(FitArgs),
    /// Run the acceptance suite; prints PASS/FAIL per criterion.
    Verify(VerifyArgs),
    /// Sample the Langevin dynamics and estimate the spectral gap.
    Simulate(SimulateArgs),
    /// Compare log-Sobolev lower bounds against the linear-rate prediction.
    Report(ReportArgs),
}

#[derive(Args)]
struct PotentialArg {
    /// Built-in name (counterexample, gaussian, quartic, asymmetric(ka,kb))
    /// or a path to a .toml/.json config.
    #[arg(long)]
    potential: String,
    /// Write the resolved potential config to this path (.toml or .json).
    #[arg(long)]
    dump_config: Option<PathBuf>,
}

impl PotentialArg {
    fn resolve(&self) -> Result<PiecewisePotential> {
        let pot = resolve_potential(&self.potential)?;
        if let Some(path) = &self.dump_config {
            let text = PotentialConfig::from_potential(&pot).dump(path)?;
            std::fs::write(path, text)?;
        }
        Ok(pot)
    }
}

#[derive(Args)]
struct GridArgs {
    /// Uniform cells on the plateau.
    #[arg(long)]
    n_plateau: Option<usize>,
    /// Cells per boundary-layer width t^(1/alpha).
    #[arg(long)]
    layer_cells_per_scale: Option<usize>,
    /// Geometric coarsening factor away from the plateau.
    #[arg(long)]
    refinement_ratio: Option<f64>,
    /// Truncate where V/t exceeds this.
    #[arg(long)]
    truncation_threshold: Option<f64>,
}

impl GridArgs {
    fn build(&self) -> Result<GridSpec> {
        let mut grid = GridSpec::default();
        if let Some(n) = self.n_plateau {
            grid.n_plateau = n;
        }
        if let Some(n) = self.layer_cells_per_scale {
            grid.layer_cells_per_scale = n;
        }
        if let Some(r) = self.refinement_ratio {
            grid.refinement_ratio = r;
        }
        if let Some(v) = self.truncation_threshold {
            grid.truncation_threshold = v;
        }
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitQuantity {
    Partition,
    Poincare,
    Lsi,
    LsiLower,
}

impl FitQuantity {
    fn quantity(self) -> Quantity {
        match self {
            FitQuantity::Partition => Quantity::Partition,
            FitQuantity::Poincare => Quantity::Poincare,
            FitQuantity::Lsi => Quantity::Lsi,
            FitQuantity::LsiLower => Quantity::LsiLower,
        }
    }

    /// The analytic t = 0 value subtracted before the log-log fit.
    fn baseline(self, pot: &PiecewisePotential, table: &SweepTable) -> f64 {
        match self {
            FitQuantity::Partition => pot.plateau_width(),
            _ => table.c0,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    potential: PotentialArg,
    /// Temperature.
    #[arg(long)]
    t: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Seed for the log-Sobolev maximizer restarts.
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    potential: PotentialArg,
    /// Log-spaced grid `A:B:Nlog`, from A down to B.
    #[arg(long)]
    t_grid: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Also fit this quantity and print the fit as JSON.
    #[arg(long, value_enum)]
    fit: Option<FitQuantity>,
    /// Skip the mesh-doubling noise estimate.
    #[arg(long)]
    skip_noise: bool,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    potential: PotentialArg,
    #[arg(long)]
    t_grid: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Quantity to fit.
    #[arg(long, value_enum, default_value_t = FitQuantity::Poincare)]
    quantity: FitQuantity,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Skip the sampling-based (statistical) checks.
    #[arg(long)]
    skip_statistical: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObservableArg {
    Coordinate,
    GapEigenfunction,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    potential: PotentialArg,
    #[arg(long)]
    t: f64,
    /// Euler-Maruyama step size.
    #[arg(long)]
    dt: f64,
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    #[arg(long, default_value_t = 8)]
    chains: usize,
    /// Burn-in steps (auto-raised to ten relaxation times if smaller).
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ObservableArg::GapEigenfunction)]
    observable: ObservableArg,
    /// Write per-chain autocorrelation up to this lag as CSV.
    #[arg(long)]
    acf_output: Option<PathBuf>,
    /// Max lag for --acf-output.
    #[arg(long, default_value_t = 2000)]
    acf_max_lag: usize,
    /// Also run the stationarity chi-square test against the exact density.
    #[arg(long)]
    equilibrium_test: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    potential: PotentialArg,
    #[arg(long, default_value = "1e-3:1e-6:6log")]
    t_grid: String,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || SpectraError::Config(format!("t-grid must be A:B:Nlog, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].strip_suffix("log").ok_or_else(bad)?.parse().map_err(|_| bad())?;
    log_grid(a, b, n)
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn to_json(value: &impl serde::Serialize) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| SpectraError::Config(e.to_string()))
}

fn lsi_opts(seed: u64) -> LsiOpts {
    LsiOpts {
        seed,
        ..LsiOpts::default()
    }
}

fn single_row_sweep(
    pot: &PiecewisePotential,
    t: f64,
    grid: &GridSpec,
    seed: u64,
) -> Result<SweepTable> {
    let opts = SweepOpts {
        lsi: lsi_opts(seed),
        skip_noise_estimate: false,
    };
    run_sweep(pot, &[t], Quantities::default(), grid, &opts)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let pot = args.potential.resolve()?;
    let grid = args.grid.build()?;
    let table = single_row_sweep(&pot, args.t, &grid, args.seed)?;
    let row = &table.rows[0];
    if !row.failures.is_empty() {
        return Err(SpectraError::Sweep(row.failures.join("; ")));
    }
    let text = match args.format {
        Format::Json => to_json(row)?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&table, &mut buf)?;
            String::from_utf8(buf).expect("csv is ascii")
        }
    };
    write_output(&args.output, &text)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let pot = args.potential.resolve()?;
    let grid = args.grid.build()?;
    let t_grid = parse_t_grid(&args.t_grid)?;
    let opts = SweepOpts {
        lsi: lsi_opts(args.seed),
        skip_noise_estimate: args.skip_noise,
    };
    let table = run_sweep(&pot, &t_grid, Quantities::default(), &grid, &opts)?;
    let text = match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&table, &mut buf)?;
            String::from_utf8(buf).expect("csv is ascii")
        }
        Format::Json => to_json(&table)?,
    };
    write_output(&args.output, &text)?;
    if let Some(q) = args.fit {
        let fit = power_fit(&table, q.quantity(), q.baseline(&pot, &table))?;
        // The table goes to --output; the fit always lands on stdout.
        println!("{}", to_json(&fit)?);
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let pot = args.potential.resolve()?;
    let grid = args.grid.build()?;
    let t_grid = parse_t_grid(&args.t_grid)?;
    let need_lsi = matches!(args.quantity, FitQuantity::Lsi | FitQuantity::LsiLower);
    let quantities = Quantities {
        lsi: need_lsi,
        conjecture: false,
        asymptotes: false,
        ..Quantities::default()
    };
    let opts = SweepOpts {
        lsi: lsi_opts(args.seed),
        skip_noise_estimate: false,
    };
    let table = run_sweep(&pot, &t_grid, quantities, &grid, &opts)?;
    let fit = power_fit(&table, args.quantity.quantity(), args.quantity.baseline(&pot, &table))?;
    write_output(&args.output, &to_json(&fit)?)
}

fn cmd_verify(args: &VerifyArgs) -> Result<()> {
    let results = spectra::verify::run_all(!args.skip_statistical);
    let mut all_ok = true;
    for r in &results {
        println!("{}", r.summary_line());
        for d in &r.details {
            println!("    {d}");
        }
        all_ok &= r.passed;
    }
    if !all_ok {
        return Err(SpectraError::Sweep("acceptance suite failed".into()));
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let pot = args.potential.resolve()?;
    let cfg = SimConfig {
        t: args.t,
        dt: args.dt,
        n_steps: args.steps,
        n_chains: args.chains,
        burn_in: args.burn_in,
        seed: args.seed,
        observable: match args.observable {
            ObservableArg::Coordinate => Observable::Coordinate,
            ObservableArg::GapEigenfunction => Observable::GapEigenfunction,
        },
    };
    let summary = simulate(&pot, &cfg)?;
    if let Some(path) = &args.acf_output {
        let mut buf = Vec::new();
        export_autocorrelation(&summary, args.acf_max_lag, &mut buf)?;
        std::fs::write(path, buf)?;
    }
    let gap = gap_estimate(&summary)?;
    let mut out = json!({
        "t": summary.t,
        "dt": summary.dt,
        "burn_in_used": summary.burn_in_used,
        "warnings": summary.warnings,
        "c_p_hat": gap.c_p_hat,
        "stderr": gap.stderr,
        "per_chain": gap.per_chain,
        "chain_means": summary.chains.iter().map(|c| c.mean_x).collect::<Vec<_>>(),
        "chain_variances": summary.chains.iter().map(|c| c.variance_x).collect::<Vec<_>>(),
        "plateau_fractions": summary.chains.iter().map(|c| c.plateau_fraction).collect::<Vec<_>>(),
    });
    if args.equilibrium_test {
        if !matches!(args.observable, ObservableArg::Coordinate) {
            return Err(SpectraError::Config(
                "--equilibrium-test needs --observable coordinate".into(),
            ));
        }
        let positions: Vec<f64> = summary
            .chains
            .iter()
            .flat_map(|c| c.observable.iter().copied())
            .collect();
        let p = equilibrium_chi_square(&pot, &summary, &positions, 24)?;
        out["equilibrium_p_value"] = json!(p);
    }
    write_output(&args.output, &to_json(&out)?)
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let pot = args.potential.resolve()?;
    let grid = args.grid.build()?;
    let t_grid = parse_t_grid(&args.t_grid)?;
    let opts = SweepOpts {
        lsi: lsi_opts(args.seed),
        skip_noise_estimate: true,
    };
    let table = run_sweep(&pot, &t_grid, Quantities::default(), &grid, &opts)?;
    let report = refutation_report(&pot, &table)?;
    write_output(&args.output, &to_json(&report)?)
}

/// Invalid input (config, flags, grids) exits 2; numerical failure exits 1.
fn exit_code(e: &SpectraError) -> u8 {
    match e {
        SpectraError::Config(_)
        | SpectraError::InvalidPotential(_)
        | SpectraError::InvalidGrid(_)
        | SpectraError::Io(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs.or_else(|| {
        std::env::var("SPECTRA_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = jobs {
        // Best effort: the pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
