//! Seeded Monte-Carlo certification of the interface fluxes and the
//! positivity limiter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fluxes::{
    ec_flux, entropy_residual_scale, es_condition_margin, es_inequality_check, es_signal_speeds, hll_interface_flux,
    speed_estimates, SpeedMode,
};
use crate::mesh::cell_average;
use crate::physics::{pressure_unchecked, Axis, ConservedState, GasModel};
use crate::limiters::pp_limit_cell;
use crate::sampling::{random_gas, random_pair, random_state};
use crate::sbp::build_sbp;

/// Worst cases found by [`certify`]. Relative quantities are divided by
/// [`entropy_residual_scale`].
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub pairs: usize,
    /// Largest `|EC residual| / scale`.
    pub ec_max_rel: f64,
    /// Smallest `entropy production / scale` with HLL speeds.
    pub es_hll_min_rel: f64,
    /// Smallest `entropy production / scale` with LF speeds.
    pub es_lf_min_rel: f64,
    /// Pairs where `(-S_L - A_R)(S_R - A_L) < A_L A_R` beyond rounding.
    pub margin_violations: usize,
    pub pp_cells: usize,
    /// Limited cells with a non-positive node or a moved average.
    pub pp_failures: usize,
}

impl CertifyReport {
    /// Acceptance thresholds: EC identity to 1e-10 relative, entropy
    /// production above -1e-10 relative, no margin or limiter failures.
    pub fn passed(&self) -> bool {
        self.ec_max_rel < 1e-10
            && self.es_hll_min_rel >= -1e-10
            && self.es_lf_min_rel >= -1e-10
            && self.margin_violations == 0
            && self.pp_failures == 0
    }
}

fn margin_ok(mode: SpeedMode, wl: &ConservedState, wr: &ConservedState, dir: Axis, gas: GasModel) -> bool {
    let s = es_signal_speeds(wl, wr, dir, gas, mode);
    let (a_l, a_r) = speed_estimates(wl, wr, dir, gas);
    let m = es_condition_margin(s, a_l, a_r);
    let size = (s.s_left * s.s_right).abs() + (s.s_left * a_l).abs() + (s.s_right * a_r).abs();
    m >= -1e-12 * size
}

/// Check `pairs` random state pairs in both directions, and `pairs / 10`
/// random cells through the positivity limiter.
pub fn certify(pairs: usize, seed: u64) -> CertifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CertifyReport {
        pairs,
        ec_max_rel: 0.0,
        es_hll_min_rel: f64::INFINITY,
        es_lf_min_rel: f64::INFINITY,
        margin_violations: 0,
        pp_cells: 0,
        pp_failures: 0,
    };
    for _ in 0..pairs {
        let gas = random_gas(&mut rng);
        let (wl, wr) = random_pair(&mut rng, gas);
        for dir in [Axis::X, Axis::Y] {
            let ec = ec_flux(&wl, &wr, dir, gas);
            let r = es_inequality_check(&wl, &wr, dir, gas, &ec) / entropy_residual_scale(&wl, &wr, dir, gas, &ec);
            report.ec_max_rel = report.ec_max_rel.max(r.abs());
            for mode in [SpeedMode::Hll, SpeedMode::Lf] {
                let speeds = es_signal_speeds(&wl, &wr, dir, gas, mode);
                let Ok(f) = hll_interface_flux(&wl, &wr, dir, gas, speeds) else {
                    report.margin_violations += 1;
                    continue;
                };
                let rel = es_inequality_check(&wl, &wr, dir, gas, &f) / entropy_residual_scale(&wl, &wr, dir, gas, &f);
                match mode {
                    SpeedMode::Hll => report.es_hll_min_rel = report.es_hll_min_rel.min(rel),
                    SpeedMode::Lf => report.es_lf_min_rel = report.es_lf_min_rel.min(rel),
                }
                if !margin_ok(mode, &wl, &wr, dir, gas) {
                    report.margin_violations += 1;
                }
            }
        }
    }

    let sbp = build_sbp(2).expect("order 2 is supported");
    let m = sbp.n() * sbp.n();
    let weights: Vec<f64> = (0..m).map(|q| 0.25 * sbp.weights[q % sbp.n()] * sbp.weights[q / sbp.n()]).collect();
    for _ in 0..pairs / 10 {
        let gas = random_gas(&mut rng);
        let avg = random_state(&mut rng, gas);
        // Zero-mean perturbations large enough to break positivity.
        let mut cell: Vec<ConservedState> = (0..m)
            .map(|_| {
                let mut w = avg;
                for c in 0..8 {
                    w.0[c] += rng.random_range(-1.5..1.5) * (avg.0[c].abs() + 0.1);
                }
                w
            })
            .collect();
        for c in 0..8 {
            let shift: f64 = cell.iter().zip(&weights).map(|(w, q)| q * (w.0[c] - avg.0[c])).sum();
            for w in cell.iter_mut() {
                w.0[c] -= shift;
            }
        }
        let before = cell_average(&cell, &sbp);
        report.pp_cells += 1;
        let Some(_) = pp_limit_cell(&mut cell, &sbp, gas, 1e-13) else {
            report.pp_failures += 1;
            continue;
        };
        let after = cell_average(&cell, &sbp);
        let moved = (0..8).any(|c| (after.0[c] - before.0[c]).abs() > 1e-12 * (1.0 + before.0[c].abs()));
        let negative = cell.iter().any(|w| !(w.rho() > 0.0 && pressure_unchecked(w, gas) > 0.0));
        if moved || negative {
            report.pp_failures += 1;
        }
    }
    report
}
