//! Post-stage operators: divergence-free projection, oscillation damping
//! and the positivity scaling, applied in that order.

pub mod ldf;
pub mod oedg;
pub mod pp;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{cell_average, ElementField, Mesh2D};
use crate::physics::{pressure_unchecked, GasModel, DEFAULT_EPS_ADM};
use crate::sbp::SbpOperators;

pub use ldf::{ldf_project_cell, ldf_project_field, ReferenceLdfSystem};
pub use oedg::{oe_coefficients, oedg_damp, DampingCoefficients};
pub use pp::{pp_limit_cell, PpOutcome};

/// Which post-stage operators are active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterConfig {
    pub ldf: bool,
    pub oedg: bool,
    pub pp: bool,
    pub eps_adm: f64,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        Self { ldf: true, oedg: true, pp: true, eps_adm: DEFAULT_EPS_ADM }
    }
}

/// Counters from one pipeline application.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PipelineReport {
    pub max_sigma: f64,
    pub pp_cells: usize,
}

/// In 1D mode the divergence reduces to `dB1/dx`, so the projection is
/// the cell mean of `B1`.
fn ldf_project_1d(field: &mut ElementField, sbp: &SbpOperators) {
    let m = field.nodes_per_cell();
    field.data.par_chunks_mut(m).for_each(|cell| {
        let mean = cell_average(cell, sbp).0[4];
        for w in cell.iter_mut() {
            w.0[4] = mean;
        }
    });
}

/// Apply LDF, then OEDG with pseudo-time `dt`, then PP.
///
/// `stage` is only used to label errors.
#[allow(clippy::too_many_arguments)]
pub fn limiting_pipeline(
    field: &mut ElementField,
    dt: f64,
    sbp: &SbpOperators,
    mesh: &Mesh2D,
    gas: GasModel,
    sys: &ReferenceLdfSystem,
    config: &LimiterConfig,
    stage: usize,
) -> Result<PipelineReport> {
    let mut report = PipelineReport::default();
    if config.ldf {
        if mesh.y_active {
            ldf_project_field(field, mesh.hx, mesh.hy, sys);
        } else {
            ldf_project_1d(field, sbp);
        }
    }
    if config.oedg && dt > 0.0 {
        let coeffs = oedg_damp(field, dt, sbp, mesh, gas);
        report.max_sigma = coeffs.sigma.iter().cloned().fold(0.0, f64::max);
    }
    if config.pp {
        let m = field.nodes_per_cell();
        let eps = config.eps_adm;
        let outcomes: Vec<Option<PpOutcome>> = field
            .data
            .par_chunks_mut(m)
            .map(|cell| pp_limit_cell(cell, sbp, gas, eps))
            .collect();
        for (c, out) in outcomes.iter().enumerate() {
            match out {
                Some(o) => report.pp_cells += o.is_active() as usize,
                None => {
                    let avg = cell_average(field.cell(c), sbp);
                    return Err(Error::InadmissibleAverage {
                        i: c % mesh.nx,
                        j: c / mesh.nx,
                        stage,
                        rho: avg.rho(),
                        p: pressure_unchecked(&avg, gas),
                    });
                }
            }
        }
    }
    Ok(report)
}
