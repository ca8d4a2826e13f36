use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use miscible::simulation::{load_spe10_slice, run, SimulationConfig};
use miscible::verification::{dof_counts_2d, dof_counts_3d, run_convergence};

#[derive(Parser)]
#[command(name = "miscible", version, about = "HDG solver for miscible displacement in porous media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Manufactured-solution convergence study on N x N meshes, N = nmin, 2 nmin, ..., nmax.
    Convergence {
        #[arg(long)]
        kmin: usize,
        #[arg(long)]
        kmax: usize,
        #[arg(long)]
        nmax: usize,
        #[arg(long, default_value_t = 4)]
        nmin: usize,
        /// Final time.
        #[arg(long = "T", default_value_t = 0.1)]
        t_end: f64,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Trace and element unknown counts of the uniform N^d mesh.
    Dofs {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
        dim: u8,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
    },
    /// Load a permeability slice, resample it to 64 x 64 and write it.
    #[command(name = "ingest-spe10")]
    IngestSpe10 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
}

fn convergence(kmin: usize, kmax: usize, nmin: usize, nmax: usize, t_end: f64, out: Option<PathBuf>) -> Result<()> {
    if kmin == 0 || kmin > kmax {
        bail!("need 1 <= kmin <= kmax, got {kmin}..{kmax}");
    }
    if nmin == 0 || nmin > nmax {
        bail!("need 1 <= nmin <= nmax, got {nmin}..{nmax}");
    }
    let ks: Vec<usize> = (kmin..=kmax).collect();
    let ns: Vec<usize> = std::iter::successors(Some(nmin), |n| Some(n * 2)).take_while(|n| *n <= nmax).collect();
    let report = run_convergence(&ks, &ns, t_end)?;
    print!("{report}");
    if let Some(path) = out {
        std::fs::write(&path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_config(path: PathBuf) -> Result<()> {
    let cfg = SimulationConfig::from_file(&path)?;
    let out = run(&cfg)?;
    println!(
        "{} x {} elements, degree {}, reached t = {:.4e}",
        out.mesh.nx,
        out.mesh.ny,
        out.re.k(),
        out.state.t
    );
    println!("flow solves {}, transport solves {}", out.darcy_solves, out.transport_solves);
    let (lo, hi) = out
        .state
        .transport
        .c
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    println!("concentration range [{lo:.4e}, {hi:.4e}]");
    if let Some(e) = out.errors {
        println!("errors p {:.4e} u {:.4e} c {:.4e} q {:.4e}", e.p, e.u, e.c, e.q);
    }
    for a in &out.artifacts {
        println!("wrote {}", a.display());
    }
    Ok(())
}

fn dofs(dim: u8, k: u64, n: u64) -> Result<()> {
    if n == 0 {
        bail!("n must be positive");
    }
    let c = if dim == 2 { dof_counts_2d(k, n) } else { dof_counts_3d(k, n) };
    println!("dim {} k {} N {}", c.dim, c.k, c.n);
    println!("trace unknowns   {}", c.trace);
    println!("element unknowns {}", c.element);
    println!("ratio {:.4e} ({})", c.ratio(), c.ratio());
    Ok(())
}

fn ingest(input: PathBuf, output: PathBuf) -> Result<()> {
    let raster = load_spe10_slice(&input)?;
    println!("read {} x {} from {}", raster.rows, raster.cols, input.display());
    let r = raster.resample(64, 64);
    println!("{}", r.summary());
    r.write(&output)?;
    println!("wrote 64 x 64 to {}", output.display());
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Convergence {
            kmin,
            kmax,
            nmax,
            nmin,
            t_end,
            out,
        } => convergence(kmin, kmax, nmin, nmax, t_end, out),
        Command::Run { config } => run_config(config),
        Command::Dofs { dim, k, n } => dofs(dim, k, n),
        Command::IngestSpe10 { input, output } => ingest(input, output),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
