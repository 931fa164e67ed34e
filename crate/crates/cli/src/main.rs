use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use ahlfors_cli::commands::{cmd_converge, cmd_find_zeros, cmd_map_grid, cmd_solve};
use ahlfors_cli::config::{ConvergeConfig, RunConfig};

#[derive(Parser)]
#[command(
    name = "ahlfors",
    version,
    about = "Ahlfors maps of multiply connected regions via a boundary integral equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the boundary problem and evaluate the map.
    Solve(CommonArgs),
    /// Solve, then map a grid of curves and write plot-ready polylines.
    MapGrid(CommonArgs),
    /// Locate the unknown zeros, then solve with them.
    FindZeros(CommonArgs),
    /// Sweep node counts and tabulate convergence diagnostics.
    Converge(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the node count; for `converge`, a comma-separated list.
    #[arg(long)]
    n: Option<String>,
    /// Output directory (default: the config's `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the plain Cauchy discretization instead of the ratio form.
    #[arg(long)]
    plain_cauchy: bool,
    /// Print diagnostics and file paths.
    #[arg(long)]
    verbose: bool,
}

impl CommonArgs {
    /// Loads the config and applies the command-line overrides, so the echo
    /// in the report reflects what actually ran.
    fn effective_config(&self, n_is_list: bool) -> anyhow::Result<RunConfig> {
        let mut config = RunConfig::from_path(&self.config)?;
        if let Some(n) = &self.n {
            if n_is_list {
                let n_values = n
                    .split(',')
                    .map(|part| part.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .with_context(|| format!("--n: cannot parse {n:?} as node counts"))?;
                config.converge = Some(ConvergeConfig { n_values });
            } else {
                config.problem.n = n
                    .parse()
                    .with_context(|| format!("--n: cannot parse {n:?} as a node count"))?;
            }
        }
        if let Some(out) = &self.out {
            config.output.dir = out.display().to_string();
        }
        if self.plain_cauchy {
            config.flags.plain_cauchy = true;
        }
        if self.verbose {
            config.flags.verbose = true;
        }
        config.validate()?;
        Ok(config)
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let (args, n_is_list) = match &cli.command {
        Command::Converge(args) => (args, true),
        Command::Solve(args) | Command::MapGrid(args) | Command::FindZeros(args) => (args, false),
    };
    let config = args.effective_config(n_is_list)?;
    let out_dir = PathBuf::from(&config.output.dir);

    let outcome = match &cli.command {
        Command::Solve(_) => cmd_solve(&config, &out_dir)?,
        Command::MapGrid(_) => cmd_map_grid(&config, &out_dir)?,
        Command::FindZeros(_) => cmd_find_zeros(&config, &out_dir)?,
        Command::Converge(_) => cmd_converge(&config, &out_dir)?,
    };

    let d = &outcome.report.diagnostics;
    println!(
        "{}: c = {:.12}, zero count = {:.6}, max ||omega|-1| = {:.3e}",
        outcome.report.command, d.c, d.zero_count, d.boundary_modulus_error
    );
    println!(
        "h = {:?}, dispersion = {:.3e}, raw deviation = {:.3e}",
        d.h, d.h_dispersion, d.h_raw_deviation
    );
    if let Some(search) = &outcome.report.search {
        let zeros: Vec<String> = search
            .zeros
            .iter()
            .map(|z| format!("{}{:+}i", z.0, z.1))
            .collect();
        println!(
            "zeros: [{}] (objective {:.3e}, {} iterations, converged: {})",
            zeros.join(", "),
            search.objective,
            search.iterations,
            search.converged
        );
    }
    for row in &outcome.report.convergence {
        match row.map_error {
            Some(err) => println!(
                "n = {:4}: modulus err {:.3e}, raw dev {:.3e}, map err {:.3e}",
                row.n, row.boundary_modulus_error, row.h_raw_deviation, err
            ),
            None => println!(
                "n = {:4}: modulus err {:.3e}, raw dev {:.3e}",
                row.n, row.boundary_modulus_error, row.h_raw_deviation
            ),
        }
    }
    if config.flags.verbose {
        println!(
            "condition estimate {:.3e}, solve residual {:.3e}, {:.1} ms",
            d.condition_estimate, d.solve_residual, outcome.report.elapsed_ms
        );
        for file in &outcome.files {
            println!("wrote {}", file.display());
        }
    }
    Ok(())
}
