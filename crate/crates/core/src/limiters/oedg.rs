//! Oscillation-eliminating damping toward the cell average.
//!
//! Each cell is relaxed as `w <- avg + exp(-tau * sigma) (w - avg)`, where
//! `sigma = sum_m delta^m` collects normalized jumps of all derivatives of
//! order `m = 0..=k` across the cell faces:
//!
//! ```text
//! delta^m_K = sum_e  beta_e / h_e * sigma^m_e
//! sigma^m_e = (2m+1) / (2(2k-1)) * sum_{a+b=m} hx^a hy^b / (a! b!)
//!             * sqrt(mean_e [[d^(a,b) u]]^2) / scale(u)
//! ```
//!
//! with `beta_e` the largest normal wave speed of the two adjacent cell
//! averages and the maximum over conserved components. The per-component
//! scale is `max(||u - mean_Omega(u)||_inf, ||u||_inf)`: a component that
//! is constant up to discretization noise would otherwise have its noise
//! normalized to O(1) and damp every other component at a rate of O(1/h).

use rayon::prelude::*;

use crate::mesh::{cell_average, ElementField, Mesh2D};
use crate::physics::{wave_speed_estimate, Axis, ConservedState, GasModel, Vec8};
use crate::sbp::{SbpOperators, MAX_ORDER};

/// Per-cell total damping rate `sigma = sum_m delta^m >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingCoefficients {
    pub sigma: Vec<f64>,
}


struct Derivatives {
    /// Multi-indices `(a, b)` with `a + b <= k`, grouped by order.
    multi: Vec<(usize, usize)>,
    /// `dpow[a]` = `D^a`, row-major.
    dpow: Vec<Vec<f64>>,
}

impl Derivatives {
    fn new(sbp: &SbpOperators) -> Self {
        let n = sbp.n();
        let k = sbp.k;
        let mut dpow = Vec::with_capacity(k + 1);
        let mut cur = vec![0.0; n * n];
        for i in 0..n {
            cur[i * n + i] = 1.0;
        }
        dpow.push(cur.clone());
        for _ in 0..k {
            let mut next = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    next[i * n + j] = (0..n).map(|p| sbp.d(i, p) * cur[p * n + j]).sum();
                }
            }
            dpow.push(next.clone());
            cur = next;
        }
        let multi = (0..=k)
            .flat_map(|m| (0..=m).map(move |a| (a, m - a)))
            .collect();
        Self { multi, dpow }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// Traces of every derivative on the four faces of a cell:
/// `[multi][face][node]`, faces ordered left, right, bottom, top.
fn cell_traces(cell: &[ConservedState], sbp: &SbpOperators, ders: &Derivatives, hx: f64, hy: f64) -> Vec<Vec8> {
    let n = sbp.n();
    let k = sbp.k;
    let mut out = vec![[0.0; 8]; ders.multi.len() * 4 * n];
    for (mi, &(a, b)) in ders.multi.iter().enumerate() {
        let dx = &ders.dpow[a];
        let dy = &ders.dpow[b];
        let scale = (2.0 / hx).powi(a as i32) * (2.0 / hy).powi(b as i32);
        let value = |alpha: usize, beta: usize| -> Vec8 {
            let mut v = [0.0; 8];
            for q in 0..n {
                let wy = dy[beta * n + q];
                if wy == 0.0 {
                    continue;
                }
                for p in 0..n {
                    let w = wy * dx[alpha * n + p];
                    let s = &cell[q * n + p].0;
                    for c in 0..8 {
                        v[c] += w * s[c];
                    }
                }
            }
            for x in v.iter_mut() {
                *x *= scale;
            }
            v
        };
        for node in 0..n {
            out[(mi * 4) * n + node] = value(0, node);
            out[(mi * 4 + 1) * n + node] = value(k, node);
            out[(mi * 4 + 2) * n + node] = value(node, 0);
            out[(mi * 4 + 3) * n + node] = value(node, k);
        }
    }
    out
}

/// Components whose global variation falls below this relative level are
/// treated as constant.
const FLAT_TOL: f64 = 1e-12;

/// Damping coefficients of every cell.
pub fn oe_coefficients(field: &ElementField, sbp: &SbpOperators, mesh: &Mesh2D, gas: GasModel) -> DampingCoefficients {
    let n = sbp.n();
    let k = sbp.k;
    let nc = mesh.n_cells();
    let (nx, ny) = (mesh.nx, mesh.ny);

    let averages: Vec<ConservedState> = (0..nc).map(|c| cell_average(field.cell(c), sbp)).collect();
    let mut mean = [0.0; 8];
    for avg in &averages {
        for c in 0..8 {
            mean[c] += avg.0[c] / nc as f64;
        }
    }
    let mut inv_scale = [0.0; 8];
    for c in 0..8 {
        let (dev, mag) = field.data.iter().fold((0.0f64, 0.0f64), |(d, m), w| {
            (d.max((w.0[c] - mean[c]).abs()), m.max(w.0[c].abs()))
        });
        let flat = dev <= FLAT_TOL * (1.0 + mean[c].abs());
        inv_scale[c] = if flat { 0.0 } else { 1.0 / dev.max(mag) };
    }
    if inv_scale.iter().all(|&x| x == 0.0) {
        return DampingCoefficients { sigma: vec![0.0; nc] };
    }

    let ders = Derivatives::new(sbp);
    let traces: Vec<Vec<Vec8>> = (0..nc)
        .into_par_iter()
        .map(|c| cell_traces(field.cell(c), sbp, &ders, mesh.hx, mesh.hy))
        .collect();
    let speed_x: Vec<f64> = averages.iter().map(|w| wave_speed_estimate(w, Axis::X, gas)).collect();
    let speed_y: Vec<f64> = averages.iter().map(|w| wave_speed_estimate(w, Axis::Y, gas)).collect();

    let order_weight: Vec<f64> = (0..=k)
        .map(|m| (2 * m + 1) as f64 / (2.0 * (2 * k) as f64 - 2.0))
        .collect();
    let mi_weight: Vec<f64> = ders
        .multi
        .iter()
        .map(|&(a, b)| mesh.hx.powi(a as i32) * mesh.hy.powi(b as i32) / (factorial(a) * factorial(b)))
        .collect();

    // Sum over orders of sigma^m_e between two cells across a face pair
    // (own face index, neighbour face index).
    let face_sigma = |own: usize, own_face: usize, nb: usize, nb_face: usize| -> f64 {
        let mut total = 0.0;
        let mut per_order = [[0.0f64; 8]; MAX_ORDER + 1];
        for (mi, &(a, b)) in ders.multi.iter().enumerate() {
            let m = a + b;
            let t_own = &traces[own][(mi * 4 + own_face) * n..(mi * 4 + own_face + 1) * n];
            let t_nb = &traces[nb][(mi * 4 + nb_face) * n..(mi * 4 + nb_face + 1) * n];
            for c in 0..8 {
                if inv_scale[c] == 0.0 {
                    continue;
                }
                let mut ms = 0.0;
                for q in 0..n {
                    let j = t_nb[q][c] - t_own[q][c];
                    ms += 0.5 * sbp.weights[q] * j * j;
                }
                per_order[m][c] += mi_weight[mi] * ms.sqrt() * inv_scale[c];
            }
        }
        for (m, comps) in per_order.iter().take(k + 1).enumerate() {
            let worst = comps.iter().cloned().fold(0.0, f64::max);
            total += order_weight[m] * worst;
        }
        total
    };

    let px = mesh.is_periodic_x();
    let py = mesh.is_periodic_y();
    // Weighted rate of the face to the right of / above each cell; zero
    // on non-periodic outer boundaries.
    let x_face: Vec<f64> = (0..nc)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let r = if i + 1 < nx { i + 1 } else if px { 0 } else { return 0.0 };
            let nb = mesh.cell_index(r, j);
            speed_x[c].max(speed_x[nb]) / mesh.hx * face_sigma(c, 1, nb, 0)
        })
        .collect();
    let y_face: Vec<f64> = if mesh.y_active {
        (0..nc)
            .into_par_iter()
            .map(|c| {
                let (i, j) = (c % nx, c / nx);
                let t = if j + 1 < ny { j + 1 } else if py { 0 } else { return 0.0 };
                let nb = mesh.cell_index(i, t);
                speed_y[c].max(speed_y[nb]) / mesh.hy * face_sigma(c, 3, nb, 2)
            })
            .collect()
    } else {
        vec![0.0; nc]
    };
    let sigma = (0..nc)
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            let mut s = x_face[c] + y_face[c];
            if i > 0 || px {
                s += x_face[mesh.cell_index((i + nx - 1) % nx, j)];
            }
            if mesh.y_active && (j > 0 || py) {
                s += y_face[mesh.cell_index(i, (j + ny - 1) % ny)];
            }
            s
        })
        .collect();
    DampingCoefficients { sigma }
}

/// Relax one cell toward its average with factor `exp(-tau * sigma)`.
pub fn damp_cell(cell: &mut [ConservedState], sbp: &SbpOperators, tau: f64, sigma: f64) {
    let factor = (-tau * sigma).exp();
    if factor == 1.0 {
        return;
    }
    let avg = cell_average(cell, sbp);
    for w in cell.iter_mut() {
        for c in 0..8 {
            w.0[c] = avg.0[c] + factor * (w.0[c] - avg.0[c]);
        }
    }
}

/// Damp every cell with pseudo-time `tau`.
pub fn oedg_damp(field: &mut ElementField, tau: f64, sbp: &SbpOperators, mesh: &Mesh2D, gas: GasModel) -> DampingCoefficients {
    let coeffs = oe_coefficients(field, sbp, mesh, gas);
    let m = field.nodes_per_cell();
    field
        .data
        .par_chunks_mut(m)
        .zip(coeffs.sigma.par_iter())
        .for_each(|(cell, &s)| damp_cell(cell, sbp, tau, s));
    coeffs
}
