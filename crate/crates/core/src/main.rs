use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mhd_dg::certify::certify;
use mhd_dg::fluxes::SpeedMode;
use mhd_dg::io::{convergence_csv, BoundaryOverride, FluxFamily, RunConfig};
use mhd_dg::runner::{converge, project_dump, run_config};
use mhd_dg::Error;

#[derive(Parser)]
#[command(name = "mhd-dg", version, about = "Positivity-preserving, entropy-stable nodal DG for ideal MHD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark case and write field dumps plus entropy.csv.
    Run(ConfigArgs),
    /// Grid sweep against an exact solution, printed as CSV.
    Converge {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated list of N (grids are N x N).
        #[arg(long, value_delimiter = ',', required = true)]
        grids: Vec<usize>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo certification of the fluxes and the positivity limiter.
    Certify {
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Apply the divergence-free projection to a field dump.
    Project {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FluxModeArg {
    Hll,
    Lf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    EsHll,
    Ec,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Case,
    Periodic,
    Outflow,
}

/// Config file plus per-key overrides.
#[derive(Args)]
struct ConfigArgs {
    /// `key = value` config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// alfven, yee_riemann, orszag_tang, rotor, blast, cloud_shock or jet.
    #[arg(long)]
    case: Option<String>,
    /// Polynomial degree, 1 to 8.
    #[arg(long)]
    k: Option<usize>,
    /// Cells in x; defaults to the case's grid.
    #[arg(long)]
    nx: Option<usize>,
    /// Cells in y; defaults to the case's grid.
    #[arg(long)]
    ny: Option<usize>,
    /// CFL number; defaults to 0.6 / (2k + 1).
    #[arg(long)]
    cfl: Option<f64>,
    /// Override the case's adiabatic index.
    #[arg(long)]
    gamma: Option<f64>,
    /// Override the case's final time.
    #[arg(long)]
    t_final: Option<f64>,
    /// Skip the divergence-free projection.
    #[arg(long)]
    no_ldf: bool,
    /// Skip the oscillation-eliminating damping.
    #[arg(long)]
    no_oedg: bool,
    /// Skip the positivity limiter.
    #[arg(long)]
    no_pp: bool,
    /// Admissibility floor for density and pressure.
    #[arg(long)]
    eps_adm: Option<f64>,
    /// Dump spacing in time; only t=0 and the final time when unset.
    #[arg(long)]
    output_interval: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Signal speeds of the interface flux.
    #[arg(long, value_enum)]
    flux_mode: Option<FluxModeArg>,
    #[arg(long, value_enum)]
    interface_flux: Option<FamilyArg>,
    /// Replace the case's boundary conditions.
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
    /// Worker threads; 1 gives bitwise reproducible output.
    #[arg(long)]
    threads: Option<usize>,
    /// Keep every `stride`-th node row and column in dumps.
    #[arg(long)]
    stride: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> mhd_dg::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_text(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = &self.case {
            c.case = v.clone();
        }
        c.k = self.k.unwrap_or(c.k);
        c.nx = self.nx.or(c.nx);
        c.ny = self.ny.or(c.ny);
        c.cfl = self.cfl.or(c.cfl);
        c.gamma = self.gamma.or(c.gamma);
        c.t_final = self.t_final.or(c.t_final);
        c.ldf &= !self.no_ldf;
        c.oedg &= !self.no_oedg;
        c.pp &= !self.no_pp;
        c.eps_adm = self.eps_adm.unwrap_or(c.eps_adm);
        c.output_interval = self.output_interval.or(c.output_interval);
        if let Some(d) = &self.output_dir {
            c.output_dir = d.clone();
        }
        if let Some(m) = self.flux_mode {
            c.flux_mode = match m {
                FluxModeArg::Hll => SpeedMode::Hll,
                FluxModeArg::Lf => SpeedMode::Lf,
            };
        }
        if let Some(f) = self.interface_flux {
            c.interface_flux = match f {
                FamilyArg::EsHll => FluxFamily::EsHll,
                FamilyArg::Ec => FluxFamily::Ec,
            };
        }
        if let Some(b) = self.boundary {
            c.boundary = match b {
                BoundaryArg::Case => BoundaryOverride::Case,
                BoundaryArg::Periodic => BoundaryOverride::Periodic,
                BoundaryArg::Outflow => BoundaryOverride::Outflow,
            };
        }
        c.threads = self.threads.unwrap_or(c.threads);
        c.stride = self.stride.unwrap_or(c.stride);
        c.validate()?;
        Ok(c)
    }
}

fn execute(cli: Cli) -> mhd_dg::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let s = run_config(&config)?;
            println!(
                "case={} t={} steps={} pp_cells={} max_sigma={:.3e} wall={:.2}s dumps={}",
                config.case,
                s.t,
                s.steps,
                s.pp_cells,
                s.max_sigma,
                s.wall_time_s,
                s.dumps.len()
            );
            if let Some(last) = s.outputs.last() {
                println!("total_entropy={:.16e} max_divB={:.3e}", last.total_entropy, last.max_divergence);
            }
        }
        Command::Converge { config, grids, output } => {
            let config = config.resolve()?;
            let rows = converge(&config, &grids)?;
            let csv = convergence_csv(&rows);
            match output {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Certify { pairs, seed } => {
            let r = certify(pairs, seed);
            println!("pairs={} seed={seed}", r.pairs);
            println!("ec_max_rel_residual={:.3e}", r.ec_max_rel);
            println!("es_hll_min_rel_production={:.3e}", r.es_hll_min_rel);
            println!("es_lf_min_rel_production={:.3e}", r.es_lf_min_rel);
            println!("speed_margin_violations={}", r.margin_violations);
            println!("pp_cells={} pp_failures={}", r.pp_cells, r.pp_failures);
            println!("{}", if r.passed() { "PASS" } else { "FAIL" });
            if !r.passed() {
                return Err(Error::InvalidState("certification failed".into()));
            }
        }
        Command::Project { input, output } => {
            let m = project_dump(&input, &output)?;
            println!("projected {} ({}x{}, k={}) -> {}", input.display(), m.nx, m.ny, m.k, output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse { .. } | Error::NoExactSolution(_) | Error::OrderOutOfRange(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
