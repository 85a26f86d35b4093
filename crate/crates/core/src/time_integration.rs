//! SSP-RK3 time stepping with the limiting pipeline after every stage.

use rayon::prelude::*;

use crate::dg::{max_divergence, semidiscrete_2d, total_conserved, total_entropy};
use crate::error::{Error, Result};
use crate::fluxes::InterfaceFlux;
use crate::limiters::{limiting_pipeline, LimiterConfig, PipelineReport, ReferenceLdfSystem};
use crate::mesh::{ElementField, Mesh2D};
use crate::physics::{wave_speed_estimate, Axis, GasModel, Vec8};
use crate::sbp::{build_sbp, SbpOperators};

/// Default CFL number `0.6 / (2k + 1)`.
pub fn default_cfl(k: usize) -> f64 {
    0.6 / (2 * k + 1) as f64
}

/// Step-size rule and stopping time.
#[derive(Debug, Clone, PartialEq)]
pub struct StepController {
    pub cfl: f64,
    pub t_final: f64,
    pub dt_min: f64,
    pub steps: usize,
}

impl StepController {
    pub fn new(cfl: f64, t_final: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!("t_final must be finite and non-negative, got {t_final}")));
        }
        Ok(Self { cfl, t_final, dt_min: 1e-12 * t_final, steps: 0 })
    }

    /// Next step size from `t`, clipped to land on `t_stop` exactly.
    pub fn next_dt(&self, field: &ElementField, mesh: &Mesh2D, gas: GasModel, t: f64, t_stop: f64) -> Result<f64> {
        let dt = compute_dt(field, mesh, gas, self.cfl);
        if !(dt >= self.dt_min) || !dt.is_finite() {
            return Err(Error::TimeStepCollapse { dt, dt_min: self.dt_min, t });
        }
        let remaining = t_stop - t;
        Ok(if dt >= remaining { remaining } else { dt })
    }
}

/// `min over nodes of cfl / (sigma_x / hx + sigma_y / hy)`, with the y term
/// dropped on 1D meshes.
pub fn compute_dt(field: &ElementField, mesh: &Mesh2D, gas: GasModel, cfl: f64) -> f64 {
    let (hx, hy) = (mesh.hx, mesh.hy);
    let y_active = mesh.y_active;
    let rate = field
        .data
        .par_iter()
        .map(|w| {
            let mut r = wave_speed_estimate(w, Axis::X, gas) / hx;
            if y_active {
                r += wave_speed_estimate(w, Axis::Y, gas) / hy;
            }
            r
        })
        .reduce(|| 0.0, f64::max);
    cfl / rate
}

/// One SSP-RK3 step with a post-stage operator `post(field, stage)`.
pub fn ssp_rk3_step<L, P>(field: &ElementField, dt: f64, mut operator: L, mut post: P) -> Result<ElementField>
where
    L: FnMut(&ElementField) -> Result<ElementField>,
    P: FnMut(&mut ElementField, usize) -> Result<()>,
{
    let mut w1 = field.axpy(dt, &operator(field)?);
    post(&mut w1, 1)?;
    let euler1 = w1.axpy(dt, &operator(&w1)?);
    let mut w2 = field.lincomb(0.75, &euler1, 0.25);
    post(&mut w2, 2)?;
    let euler2 = w2.axpy(dt, &operator(&w2)?);
    let mut w3 = field.lincomb(1.0 / 3.0, &euler2, 2.0 / 3.0);
    post(&mut w3, 3)?;
    Ok(w3)
}

/// Everything needed to evaluate the fully discrete scheme on one mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub sbp: SbpOperators,
    pub mesh: Mesh2D,
    pub gas: GasModel,
    pub flux: InterfaceFlux,
    pub limiters: LimiterConfig,
    pub ldf: ReferenceLdfSystem,
}

impl Discretization {
    pub fn new(k: usize, mesh: Mesh2D, gas: GasModel, flux: InterfaceFlux, limiters: LimiterConfig) -> Result<Self> {
        let sbp = build_sbp(k)?;
        let ldf = ReferenceLdfSystem::new(&sbp)?;
        Ok(Self { sbp, mesh, gas, flux, limiters, ldf })
    }

    pub fn rhs(&self, field: &ElementField) -> Result<ElementField> {
        semidiscrete_2d(field, &self.sbp, &self.mesh, self.gas, self.flux)
    }

    /// Apply the limiting pipeline with damping time `dt`.
    pub fn limit(&self, field: &mut ElementField, dt: f64, stage: usize) -> Result<PipelineReport> {
        limiting_pipeline(field, dt, &self.sbp, &self.mesh, self.gas, &self.ldf, &self.limiters, stage)
    }

    /// One full SSP-RK3 step.
    pub fn step(&self, field: &ElementField, dt: f64) -> Result<(ElementField, PipelineReport)> {
        let mut report = PipelineReport::default();
        let next = ssp_rk3_step(
            field,
            dt,
            |w| self.rhs(w),
            |w, stage| {
                let r = self.limit(w, dt, stage)?;
                report.max_sigma = report.max_sigma.max(r.max_sigma);
                report.pp_cells += r.pp_cells;
                Ok(())
            },
        )?;
        Ok((next, report))
    }

    pub fn total_entropy(&self, field: &ElementField) -> f64 {
        total_entropy(field, &self.sbp, &self.mesh, self.gas)
    }

    pub fn max_divergence(&self, field: &ElementField) -> f64 {
        max_divergence(field, &self.sbp, &self.mesh)
    }

    pub fn total_conserved(&self, field: &ElementField) -> Vec8 {
        total_conserved(field, &self.sbp, &self.mesh)
    }
}

/// Snapshot handed to output observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputRecord {
    pub t: f64,
    pub step: usize,
    pub total_entropy: f64,
    pub max_divergence: f64,
}

/// Result of a complete run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub field: ElementField,
    pub t: f64,
    pub steps: usize,
    pub outputs: Vec<OutputRecord>,
    pub pp_cells: usize,
    pub max_sigma: f64,
}

/// Output times `interval, 2 interval, ...` up to and including `t_final`.
pub fn output_schedule(t_final: f64, interval: Option<f64>) -> Vec<f64> {
    let mut times = Vec::new();
    if let Some(dt) = interval.filter(|&d| d > 0.0) {
        let count = (t_final / dt - 1e-9).floor() as usize;
        times.extend((1..=count).map(|i| i as f64 * dt));
    }
    if t_final > 0.0 {
        times.push(t_final);
    }
    times
}

/// Project and limit `initial`, then march to `controller.t_final`,
/// calling `observer` at `t = 0` and at every output time.
pub fn run<O>(
    disc: &Discretization,
    initial: ElementField,
    controller: &mut StepController,
    output_times: &[f64],
    mut observer: O,
) -> Result<RunResult>
where
    O: FnMut(&OutputRecord, &ElementField) -> Result<()>,
{
    let mut field = initial;
    disc.limit(&mut field, 0.0, 0)?;
    let mut outputs = Vec::with_capacity(output_times.len() + 1);
    let mut record = |t: f64, step: usize, field: &ElementField, outputs: &mut Vec<OutputRecord>| -> Result<()> {
        let rec = OutputRecord {
            t,
            step,
            total_entropy: disc.total_entropy(field),
            max_divergence: disc.max_divergence(field),
        };
        observer(&rec, field)?;
        outputs.push(rec);
        Ok(())
    };
    record(0.0, 0, &field, &mut outputs)?;

    let mut t = 0.0;
    let mut pp_cells = 0;
    let mut max_sigma: f64 = 0.0;
    for &t_out in output_times.iter().filter(|&&s| s > 0.0 && s <= controller.t_final) {
        while t < t_out {
            let dt = controller.next_dt(&field, &disc.mesh, disc.gas, t, t_out)?;
            let (next, report) = disc.step(&field, dt)?;
            field = next;
            controller.steps += 1;
            pp_cells += report.pp_cells;
            max_sigma = max_sigma.max(report.max_sigma);
            t = if t_out - (t + dt) <= 1e-14 * t_out.max(1.0) { t_out } else { t + dt };
            if !field.is_finite() {
                return Err(Error::InvalidState(format!("non-finite state after step {} at t = {t}", controller.steps)));
            }
        }
        record(t, controller.steps, &field, &mut outputs)?;
    }
    Ok(RunResult { field, t, steps: controller.steps, outputs, pp_cells, max_sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluxes::SpeedMode;
    use crate::mesh::BoundaryCondition;
    use crate::physics::{ConservedState, Primitive};

    fn periodic_mesh(n: usize) -> Mesh2D {
        Mesh2D::new([0.0, 1.0, 0.0, 1.0], n, n, std::array::from_fn(|_| BoundaryCondition::Periodic)).unwrap()
    }

    #[test]
    fn static_gas_time_step() {
        let gas = GasModel::default();
        let sbp = build_sbp(2).unwrap();
        let mesh = periodic_mesh(8);
        let w = Primitive { rho: 1.0, u: [0.0; 3], b: [0.0; 3], p: 1.0 }.to_conserved(gas);
        let f = ElementField::from_fn(&mesh, &sbp, |_, _| w);
        let dt = compute_dt(&f, &mesh, gas, 0.12);
        let expect = 0.12 * mesh.hx / (2.0 * (5.0f64 / 3.0).sqrt());
        assert!((dt - expect).abs() < 1e-15);
        let fine = periodic_mesh(16);
        let f2 = ElementField::from_fn(&fine, &sbp, |_, _| w);
        assert!((compute_dt(&f2, &fine, gas, 0.12) - 0.5 * dt).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_mesh_ignores_y_speed() {
        let gas = GasModel::default();
        let sbp = build_sbp(1).unwrap();
        let mesh = Mesh2D::new_1d(0.0, 1.0, 10, BoundaryCondition::Periodic, BoundaryCondition::Periodic).unwrap();
        let w = Primitive { rho: 1.0, u: [0.0; 3], b: [0.0; 3], p: 1.0 }.to_conserved(gas);
        let f = ElementField::from_fn(&mesh, &sbp, |_, _| w);
        let dt = compute_dt(&f, &mesh, gas, 0.2);
        assert!((dt - 0.2 * 0.1 / (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_operator_is_identity() {
        let f = ElementField {
            k: 1,
            nx: 1,
            ny: 1,
            data: (0..4).map(|i| ConservedState([1.0 + i as f64; 8])).collect(),
        };
        let zero = |w: &ElementField| Ok(ElementField::zeros(w.k, w.nx, w.ny));
        let out = ssp_rk3_step(&f, 0.3, zero, |_, _| Ok(())).unwrap();
        for (a, b) in out.data.iter().zip(&f.data) {
            for c in 0..8 {
                assert!((a.0[c] - b.0[c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn matches_shu_osher_on_linear_decay() {
        // L(w) = -w: one step multiplies by 1 - dt + dt^2/2 - dt^3/6.
        let f = ElementField { k: 1, nx: 1, ny: 1, data: vec![ConservedState([2.0; 8]); 4] };
        let op = |w: &ElementField| Ok(w.lincomb(-1.0, w, 0.0));
        let dt = 0.1;
        let out = ssp_rk3_step(&f, dt, op, |_, _| Ok(())).unwrap();
        let g = 1.0 - dt + dt * dt / 2.0 - dt * dt * dt / 6.0;
        assert!((out.data[0].0[0] - 2.0 * g).abs() < 1e-14);
    }

    #[test]
    fn zero_final_time_returns_limited_initial_state() {
        let gas = GasModel::default();
        let mesh = periodic_mesh(4);
        let disc = Discretization::new(2, mesh, gas, InterfaceFlux::EsHll(SpeedMode::Hll), LimiterConfig::default()).unwrap();
        let init = ElementField::from_fn(&disc.mesh, &disc.sbp, |x, y| {
            Primitive { rho: 1.0, u: [0.0; 3], b: [x, y, 0.0], p: 1.0 }.to_conserved(gas)
        });
        let mut ctl = StepController::new(0.12, 0.0).unwrap();
        let res = run(&disc, init, &mut ctl, &output_schedule(0.0, None), |_, _| Ok(())).unwrap();
        assert_eq!(res.steps, 0);
        assert_eq!(res.outputs.len(), 1);
        assert!(res.outputs[0].max_divergence < 1e-11);
    }

    #[test]
    fn schedule_ends_at_final_time() {
        let s = output_schedule(1.0, Some(0.25));
        assert_eq!(s, vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(output_schedule(0.3, None), vec![0.3]);
    }
}
