//! Command-line front end for the thinfem workbench. Every subcommand
//! reads a TOML configuration, applies the flag overrides and delegates to
//! the corresponding harness runner.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use thinfem::harness::{
    parse_domain, run_chain, run_limit, run_means, run_mesh, run_reduced, run_solve2d, run_study,
    Config,
};

#[derive(Parser)]
#[command(name = "thinfem", version, about = "Thin-domain concentrated-forcing workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated eps values, overriding the configured list.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Output directory for CSV/JSON reports and exported fields.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Explicit number of mesh columns, bypassing the resolution policy.
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny_bulk: Option<usize>,
    #[arg(long)]
    ny_strip: Option<usize>,
    /// Node count for the 1D grids.
    #[arg(long)]
    grid1d: Option<usize>,
    /// Relative tolerance of the conjugate-gradient solver.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the 2D problem at each eps and export fields.
    Solve2d(CommonArgs),
    /// Solve the 1D reduced problem at each eps.
    Reduced(CommonArgs),
    /// Solve the homogenized limit problem.
    Limit(CommonArgs),
    /// Run the eps sweep: 2D, reduced and limit solves with the error table.
    Study(CommonArgs),
    /// Run the verification chain and report the gap norms.
    Chain(CommonArgs),
    /// Compute the homogenized means table.
    Means(CommonArgs),
    /// Generate a mesh, report quality metrics and area checks.
    Mesh {
        #[command(flatten)]
        common: CommonArgs,
        /// Mesh domain: physical, shifted or rectangle.
        #[arg(long, default_value = "physical")]
        domain: String,
    },
}

fn load_config(args: &CommonArgs) -> anyhow::Result<Config> {
    let mut config = Config::load(&args.config)
        .with_context(|| format!("failed to load {}", args.config.display()))?;
    if let Some(eps) = &args.eps {
        config.study.eps = eps.clone();
    }
    if let Some(nx) = args.nx {
        config.study.nx = Some(nx);
    }
    if let Some(ny_bulk) = args.ny_bulk {
        config.study.ny_bulk = ny_bulk;
    }
    if let Some(ny_strip) = args.ny_strip {
        config.study.ny_strip = ny_strip;
    }
    if let Some(grid1d) = args.grid1d {
        config.study.grid1d = grid1d;
    }
    if let Some(tol) = args.tol {
        config.study.cg_tol = tol;
    }
    config.validate()?;
    Ok(config)
}

fn eps_values(config: &Config) -> anyhow::Result<Vec<f64>> {
    if config.study.eps.is_empty() {
        bail!("no eps values: set [study] eps in the config or pass --eps");
    }
    Ok(config.study.eps.clone())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve2d(args) => {
            let config = load_config(&args)?;
            for eps in eps_values(&config)? {
                let r = run_solve2d(&config, eps, args.out.as_deref())?;
                println!(
                    "solve2d eps={} nx={} vertices={} iterations={} energy_residual={:.3e} \
                     l2_rescaled={:.6e} h1_rescaled={:.6e}",
                    r.eps, r.nx, r.n_vertices, r.iterations, r.energy_residual,
                    r.l2_rescaled, r.h1_rescaled,
                );
            }
        }
        Command::Reduced(args) => {
            let config = load_config(&args)?;
            for eps in eps_values(&config)? {
                let r = run_reduced(&config, eps, args.out.as_deref())?;
                println!(
                    "reduced eps={} nodes={} energy_residual={:.3e} l2={:.6e} h1={:.6e}",
                    eps, r.n_nodes, r.energy_residual, r.l2, r.h1,
                );
            }
        }
        Command::Limit(args) => {
            let config = load_config(&args)?;
            let r = run_limit(&config, args.out.as_deref())?;
            println!(
                "limit nodes={} q={:.12e} energy_residual={:.3e} l2={:.6e} h1={:.6e}",
                r.n_nodes,
                r.q.unwrap_or(f64::NAN),
                r.energy_residual,
                r.l2,
                r.h1,
            );
        }
        Command::Study(args) => {
            let config = load_config(&args)?;
            let report = run_study(&config, args.out.as_deref())?;
            for row in &report.rows {
                println!(
                    "study eps={} nx={} err_limit_l2_rescaled={:.6e} reduced_vs_limit_l2={:.6e} \
                     wall_ms={}",
                    row.eps, row.nx, row.err_limit_l2_rescaled, row.reduced_vs_limit_l2,
                    row.wall_ms,
                );
            }
            for failure in &report.failures {
                eprintln!("study eps={} FAILED: {}", failure.eps, failure.message);
            }
            println!(
                "study slope_l2_rescaled={:.4} q={:.12e}",
                report.slope_l2_rescaled, report.q
            );
            if report.rows.is_empty() {
                bail!("every eps failed");
            }
        }
        Command::Chain(args) => {
            let config = load_config(&args)?;
            let report = run_chain(&config, args.out.as_deref())?;
            for row in &report.rows {
                println!(
                    "chain eps={} gap_shift={:.6e} gap_simplify={:.6e} gap_average={:.6e} \
                     end_to_end={:.6e}",
                    row.eps, row.gap_shift, row.gap_simplify, row.gap_average, row.end_to_end,
                );
            }
            for failure in &report.failures {
                eprintln!("chain eps={} FAILED: {}", failure.eps, failure.message);
            }
            println!("chain slope_end_to_end={:.4}", report.slope_end_to_end);
            if report.rows.is_empty() {
                bail!("every eps failed");
            }
        }
        Command::Means(args) => {
            let config = load_config(&args)?;
            let r = run_means(&config, args.out.as_deref())?;
            println!(
                "means k1={:.12e} k2={:.12e} mu_k={:.12e} mu_h={:.12e} p={:.12e} q={:.12e} \
                 method={}",
                r.k1_mean, r.k2_mean, r.mu_k, r.mu_h, r.p, r.q, r.p_method,
            );
            if let Some(dev) = r.torus_long_dev {
                println!("means torus_long_dev={dev:.6e}");
            }
        }
        Command::Mesh { common, domain } => {
            let config = load_config(&common)?;
            let domain = parse_domain(&domain)?;
            for eps in eps_values(&config)? {
                let r = run_mesh(&config, eps, domain, common.out.as_deref())?;
                println!(
                    "mesh eps={} domain={} vertices={} triangles={} min_angle={:.2} \
                     max_aspect={:.2} total_area_rel_dev={:.3e} strip_area_rel_dev={:.3e}",
                    r.eps, r.domain, r.n_vertices, r.n_triangles, r.min_angle_deg,
                    r.max_aspect, r.total_area_rel_dev, r.strip_area_rel_dev,
                );
            }
        }
    }
    Ok(())
}
