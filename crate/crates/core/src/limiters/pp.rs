//! Scaling limiter that restores density and pressure positivity at every
//! LGL node while keeping the cell average.

use crate::physics::{pressure_unchecked, ConservedState, GasModel};
use crate::mesh::cell_average;
use crate::sbp::SbpOperators;

const BISECTION_STEPS: usize = 60;

/// Scaling factors applied to one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpOutcome {
    /// Density factor (applied to `rho` only).
    pub theta_rho: f64,
    /// Pressure factor (applied to every component).
    pub theta_p: f64,
}

impl PpOutcome {
    pub fn is_active(&self) -> bool {
        self.theta_rho < 1.0 || self.theta_p < 1.0
    }
}

/// Largest `t` in `[0, 1]` (from below) with
/// `p(avg + t (w - avg)) >= eps`, given `p(avg) >= eps`.
fn pressure_root(avg: &ConservedState, w: &ConservedState, eps: f64, gas: GasModel) -> f64 {
    let at = |t: f64| {
        let mut s = [0.0; 8];
        for c in 0..8 {
            s[c] = avg.0[c] + t * (w.0[c] - avg.0[c]);
        }
        pressure_unchecked(&ConservedState(s), gas)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if at(mid) >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Limit one cell in place.
///
/// Returns `None` when the cell average itself is not admissible; the cell
/// is left untouched in that case.
pub fn pp_limit_cell(cell: &mut [ConservedState], sbp: &SbpOperators, gas: GasModel, eps_adm: f64) -> Option<PpOutcome> {
    let avg = cell_average(cell, sbp);
    let rho_avg = avg.rho();
    let p_avg = pressure_unchecked(&avg, gas);
    if !(rho_avg > 0.0 && p_avg > 0.0) || !avg.is_finite() {
        return None;
    }
    let eps_rho = eps_adm.min(rho_avg);
    let eps_p = eps_adm.min(p_avg);

    let rho_min = cell.iter().map(|w| w.rho()).fold(f64::INFINITY, f64::min);
    let mut theta_rho = 1.0;
    if rho_min < eps_rho {
        theta_rho = ((rho_avg - eps_rho) / (rho_avg - rho_min)).clamp(0.0, 1.0);
        for w in cell.iter_mut() {
            w.0[0] = rho_avg + theta_rho * (w.0[0] - rho_avg);
        }
    }

    let mut theta_p: f64 = 1.0;
    for w in cell.iter() {
        if pressure_unchecked(w, gas) < eps_p {
            theta_p = theta_p.min(pressure_root(&avg, w, eps_p, gas));
        }
    }
    if theta_p < 1.0 {
        for w in cell.iter_mut() {
            for c in 0..8 {
                w.0[c] = avg.0[c] + theta_p * (w.0[c] - avg.0[c]);
            }
        }
    }
    Some(PpOutcome { theta_rho, theta_p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::Primitive;
    use crate::sbp::build_sbp;

    #[test]
    fn admissible_cell_untouched() {
        let gas = GasModel::default();
        let sbp = build_sbp(2).unwrap();
        let mut cell: Vec<ConservedState> = (0..9)
            .map(|i| Primitive { rho: 1.0 + 0.1 * i as f64, u: [0.1, 0.0, 0.0], b: [0.2; 3], p: 1.0 }.to_conserved(gas))
            .collect();
        let before = cell.clone();
        let out = pp_limit_cell(&mut cell, &sbp, gas, 1e-13).unwrap();
        assert!(!out.is_active());
        assert_eq!(cell, before);
    }

    #[test]
    fn negative_density_and_pressure_fixed() {
        let gas = GasModel::default();
        let sbp = build_sbp(2).unwrap();
        let mut cell = vec![Primitive { rho: 1.0, u: [0.0; 3], b: [0.0; 3], p: 1.0 }.to_conserved(gas); 9];
        cell[0].0[0] = -0.5;
        cell[4].0[7] = -1.0;
        let avg = cell_average(&cell, &sbp);
        let out = pp_limit_cell(&mut cell, &sbp, gas, 1e-13).unwrap();
        assert!(out.is_active());
        for w in &cell {
            assert!(w.rho() > 0.0);
            assert!(pressure_unchecked(w, gas) >= 1e-13 * 0.999);
        }
        let after = cell_average(&cell, &sbp);
        for c in 0..8 {
            assert!((after.0[c] - avg.0[c]).abs() < 1e-13);
        }
    }

    #[test]
    fn inadmissible_average_reported() {
        let gas = GasModel::default();
        let sbp = build_sbp(1).unwrap();
        let mut cell = vec![ConservedState([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]); 4];
        assert!(pp_limit_cell(&mut cell, &sbp, gas, 1e-13).is_none());
    }
}
