//! Config-driven runs: case setup, output files and grid sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::cases::{case_by_name, convergence_orders, measure_errors, BenchmarkCase};
use crate::error::{Error, Result};
use crate::io::{
    dump_to_field, manifest_path, parse_field_dump, write_entropy_series, write_field_dump, BoundaryOverride,
    ConvergenceRow, Manifest, RunConfig,
};
use crate::limiters::{ldf_project_field, LimiterConfig, ReferenceLdfSystem};
use crate::mesh::{BoundaryCondition, ElementField};
use crate::physics::{ConservedState, GasModel};
use crate::sbp::build_sbp;
use crate::time_integration::{default_cfl, output_schedule, run, Discretization, OutputRecord, StepController};

/// A case together with the discretization a config asks for.
pub struct Setup {
    pub case: BenchmarkCase,
    pub disc: Discretization,
    pub cfl: f64,
    pub t_final: f64,
}

/// Resolve a config into a ready-to-run discretization.
pub fn setup(config: &RunConfig) -> Result<Setup> {
    config.validate()?;
    let mut case = case_by_name(&config.case)?;
    if let Some(g) = config.gamma {
        case = case.with_gamma(g)?;
    }
    match config.boundary {
        BoundaryOverride::Case => {}
        BoundaryOverride::Periodic => case.bc = std::array::from_fn(|_| BoundaryCondition::Periodic),
        BoundaryOverride::Outflow => case.bc = std::array::from_fn(|_| BoundaryCondition::Outflow),
    }
    let nx = config.nx.unwrap_or(case.default_grid.0);
    let ny = config.ny.unwrap_or(case.default_grid.1);
    let mesh = case.mesh(nx, ny)?;
    let limiters = LimiterConfig { ldf: config.ldf, oedg: config.oedg, pp: config.pp, eps_adm: config.eps_adm };
    let disc = Discretization::new(config.k, mesh, case.gas, config.flux(), limiters)?;
    let cfl = config.cfl.unwrap_or_else(|| default_cfl(config.k));
    let t_final = config.t_final.unwrap_or(case.t_final);
    Ok(Setup { case, disc, cfl, t_final })
}

/// Run `f` on a pool with `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// What a finished run reports back.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub t: f64,
    pub steps: usize,
    pub outputs: Vec<OutputRecord>,
    pub dumps: Vec<PathBuf>,
    pub pp_cells: usize,
    pub max_sigma: f64,
    pub wall_time_s: f64,
    pub field: ElementField,
}

/// Execute a config, writing `field_NNNN.csv` (+ manifest) at every output
/// time, `entropy.csv` and a copy of the config to `output_dir`.
pub fn run_config(config: &RunConfig) -> Result<RunSummary> {
    let s = setup(config)?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("run.cfg"), config.to_text())?;
    let hash = config.hash();
    let start = Instant::now();
    let mut dumps = Vec::new();
    let domain = [s.disc.mesh.x0, s.disc.mesh.x1, s.disc.mesh.y0, s.disc.mesh.y1];

    let result = with_threads(config.threads, || {
        let init = s.case.initial_field(&s.disc.mesh, &s.disc.sbp);
        let mut ctl = StepController::new(s.cfl, s.t_final)?;
        let times = output_schedule(s.t_final, config.output_interval);
        run(&s.disc, init, &mut ctl, &times, |rec, field| {
            let path = dir.join(format!("field_{:04}.csv", dumps.len()));
            let manifest = Manifest {
                config_hash: hash.clone(),
                case: config.case.clone(),
                k: config.k,
                nx: s.disc.mesh.nx,
                ny: s.disc.mesh.ny,
                gamma: s.disc.gas.gamma(),
                domain,
                time: rec.t,
                steps: rec.step,
                wall_time_s: start.elapsed().as_secs_f64(),
                stride: config.stride,
            };
            write_field_dump(&path, field, &s.disc.sbp, &s.disc.mesh, s.disc.gas, &manifest)?;
            dumps.push(path);
            Ok(())
        })
    })??;
    write_entropy_series(&dir.join("entropy.csv"), &result.outputs)?;
    Ok(RunSummary {
        t: result.t,
        steps: result.steps,
        outputs: result.outputs,
        dumps,
        pp_cells: result.pp_cells,
        max_sigma: result.max_sigma,
        wall_time_s: start.elapsed().as_secs_f64(),
        field: result.field,
    })
}

/// Quantity measured by a convergence sweep.
pub type Quantity = fn(&ConservedState) -> f64;

/// Default measured quantity of a case: `B_perp` for the Alfvén wave,
/// density otherwise.
pub fn default_quantity(case: &str) -> Quantity {
    fn b_perp_30(w: &ConservedState) -> f64 {
        crate::cases::b_perp(w, std::f64::consts::PI / 6.0)
    }
    fn rho(w: &ConservedState) -> f64 {
        w.rho()
    }
    if case == "alfven" {
        b_perp_30
    } else {
        rho
    }
}

/// Run a case on `N x N` grids for each `N` and tabulate errors against
/// its exact solution.
pub fn converge(config: &RunConfig, grids: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let quantity = default_quantity(&config.case);
    let mut l2 = Vec::new();
    let mut linf = Vec::new();
    for &n in grids {
        let cfg = RunConfig { nx: Some(n), ny: Some(n), ..config.clone() };
        let s = setup(&cfg)?;
        let exact = s.case.exact.clone().ok_or_else(|| Error::NoExactSolution(config.case.clone()))?;
        let field = with_threads(config.threads, || -> Result<ElementField> {
            let init = s.case.initial_field(&s.disc.mesh, &s.disc.sbp);
            let mut ctl = StepController::new(s.cfl, s.t_final)?;
            let res = run(&s.disc, init, &mut ctl, &output_schedule(s.t_final, None), |_, _| Ok(()))?;
            Ok(res.field)
        })??;
        let t = s.t_final;
        let (e2, ei) = measure_errors(&field, &s.disc.sbp, &s.disc.mesh, quantity, |x, y| exact(x, y, t));
        l2.push(e2);
        linf.push(ei);
    }
    let o2 = convergence_orders(grids, &l2);
    let oi = convergence_orders(grids, &linf);
    Ok(grids
        .iter()
        .enumerate()
        .map(|(i, &n)| ConvergenceRow {
            n,
            l2: l2[i],
            l2_order: (i > 0).then(|| o2[i - 1]),
            linf: linf[i],
            linf_order: (i > 0).then(|| oi[i - 1]),
        })
        .collect())
}

/// Apply the divergence-free projection to a stored dump and write the
/// result (and its manifest) to `output`.
pub fn project_dump(input: &Path, output: &Path) -> Result<Manifest> {
    let manifest = Manifest::from_text(&fs::read_to_string(manifest_path(input))?)?;
    let table = parse_field_dump(&fs::read_to_string(input)?)?;
    let mut field = dump_to_field(&table, &manifest)?;
    let sbp = build_sbp(manifest.k)?;
    let sys = ReferenceLdfSystem::new(&sbp)?;
    let gas = GasModel::new(manifest.gamma)?;
    let bc = std::array::from_fn(|_| BoundaryCondition::Outflow);
    let mesh = crate::mesh::Mesh2D::new(manifest.domain, manifest.nx, manifest.ny, bc)?;
    ldf_project_field(&mut field, mesh.hx, mesh.hy, &sys);
    write_field_dump(output, &field, &sbp, &mesh, gas, &manifest)?;
    Ok(manifest)
}
