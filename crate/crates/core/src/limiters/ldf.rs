//! Locally divergence-free projection of the in-plane magnetic field.
//!
//! On the reference cell `K = [-1, 1]^2` the projection solves the saddle
//! point problem
//!
//! ```text
//! (B, v) + (p, div v) = (B0, v)   for all v in [Q^k]^2
//! (div B, q)          = 0         for all q in Q^{k-1,k} + Q^{k,k-1}
//! ```
//!
//! in a Legendre tensor basis. The velocity-block mass matrix is diagonal,
//! so the Schur complement `C M^-1 C^T` is assembled directly and factored
//! once per order. Physical cells are reached through the contravariant
//! Piola map, which commutes with the divergence.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::ElementField;
use crate::sbp::{legendre_vandermonde, SbpOperators};

/// Precomputed reference-cell projector for one polynomial order.
#[derive(Debug, Clone)]
pub struct ReferenceLdfSystem {
    pub k: usize,
    /// Legendre Vandermonde `V[a][b] = P_b(x_a)`, row-major.
    pub vandermonde: Vec<f64>,
    pub vandermonde_inv: Vec<f64>,
    /// Diagonal of the `[Q^k]^2` Legendre mass matrix.
    pub mass: Vec<f64>,
    /// Divergence coupling `C[q][v] = (q, div v)`, `q` orthonormal in the
    /// multiplier space.
    pub coupling: DMatrix<f64>,
    /// Modal projector `I - M^-1 C^T S^-1 C` on `2 (k+1)^2` coefficients.
    projector: Vec<f64>,
}

/// `int_{-1}^{1} P_i P_a' dx`.
fn legendre_derivative_moment(i: usize, a: usize) -> f64 {
    if a > i && (a - i) % 2 == 1 {
        2.0
    } else {
        0.0
    }
}

fn legendre_norm2(i: usize) -> f64 {
    2.0 / (2 * i + 1) as f64
}

impl ReferenceLdfSystem {
    pub fn new(sbp: &SbpOperators) -> Result<Self> {
        let k = sbp.k;
        let n = k + 1;
        let nw = 2 * n * n;
        let v = legendre_vandermonde(sbp);
        let vmat = DMatrix::from_row_slice(n, n, &v);
        let vinv = vmat.try_inverse().ok_or(Error::SingularSystem(k))?;
        let vinv: Vec<f64> = (0..n * n).map(|id| vinv[(id / n, id % n)]).collect();

        // Coefficient (comp, i, j): comp * n^2 + i * n + j, i = x degree.
        let mut mass = vec![0.0; nw];
        for comp in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    mass[comp * n * n + i * n + j] = legendre_norm2(i) * legendre_norm2(j);
                }
            }
        }
        let multipliers: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !(i == k && j == k))
            .collect();
        let nm = multipliers.len();
        let mut coupling = DMatrix::zeros(nm, nw);
        for (row, &(i, j)) in multipliers.iter().enumerate() {
            let qnorm = (legendre_norm2(i) * legendre_norm2(j)).sqrt();
            for a in 0..n {
                // x component P_a(x) P_j(y): div = P_a'(x) P_j(y)
                let cx = legendre_derivative_moment(i, a) * legendre_norm2(j);
                if cx != 0.0 {
                    coupling[(row, a * n + j)] = cx / qnorm;
                }
                // y component P_i(x) P_a(y): div = P_i(x) P_a'(y)
                let cy = legendre_norm2(i) * legendre_derivative_moment(j, a);
                if cy != 0.0 {
                    coupling[(row, n * n + i * n + a)] = cy / qnorm;
                }
            }
        }
        let minv = DVector::from_iterator(nw, mass.iter().map(|m| 1.0 / m));
        let mut cminv = coupling.clone();
        for col in 0..nw {
            cminv.column_mut(col).scale_mut(minv[col]);
        }
        let schur = &cminv * coupling.transpose();
        let chol = schur.cholesky().ok_or(Error::SingularSystem(k))?;
        // P = I - M^-1 C^T S^-1 C
        let s_inv_c = chol.solve(&coupling);
        let correction = cminv.transpose() * s_inv_c;
        let mut projector = vec![0.0; nw * nw];
        for r in 0..nw {
            for c in 0..nw {
                let id = if r == c { 1.0 } else { 0.0 };
                projector[r * nw + c] = id - correction[(r, c)];
            }
        }
        Ok(Self { k, vandermonde: v, vandermonde_inv: vinv, mass, coupling, projector })
    }

    #[inline]
    fn n(&self) -> usize {
        self.k + 1
    }

    /// Project Legendre coefficients (layout `comp * n^2 + i * n + j`).
    pub fn project_modal(&self, coeffs: &[f64]) -> Vec<f64> {
        let nw = coeffs.len();
        (0..nw)
            .map(|r| {
                let row = &self.projector[r * nw..(r + 1) * nw];
                row.iter().zip(coeffs).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `V^-1 X V^-T` for a nodal matrix `X[alpha][beta]`.
    fn nodal_to_modal(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        let vi = &self.vandermonde_inv;
        let mut tmp = vec![0.0; n * n];
        for i in 0..n {
            for b in 0..n {
                tmp[i * n + b] = (0..n).map(|a| vi[i * n + a] * x[a * n + b]).sum();
            }
        }
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|b| tmp[i * n + b] * vi[j * n + b]).sum();
            }
        }
    }

    /// `V X V^T` for a modal matrix `X[i][j]`.
    fn modal_to_nodal(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n();
        let v = &self.vandermonde;
        let mut tmp = vec![0.0; n * n];
        for a in 0..n {
            for j in 0..n {
                tmp[a * n + j] = (0..n).map(|i| v[a * n + i] * x[i * n + j]).sum();
            }
        }
        for a in 0..n {
            for b in 0..n {
                out[a * n + b] = (0..n).map(|j| tmp[a * n + j] * v[b * n + j]).sum();
            }
        }
    }
}

/// LDF projection of one cell.
///
/// `b1[alpha * n + beta]` and `b2[alpha * n + beta]` hold nodal values with
/// `alpha` the x index; the projected values are written back in place.
pub fn ldf_project_cell(b1: &mut [f64], b2: &mut [f64], hx: f64, hy: f64, sys: &ReferenceLdfSystem) {
    let n = sys.n();
    let nn = n * n;
    // Constants are divergence free, so project only the deviation from the
    // nodal mean; this keeps roundoff relative to the variation, not to |B|.
    let m1 = b1.iter().sum::<f64>() / nn as f64;
    let m2 = b2.iter().sum::<f64>() / nn as f64;
    b1.iter_mut().for_each(|b| *b -= m1);
    b2.iter_mut().for_each(|b| *b -= m2);
    let mut modal = vec![0.0; 2 * nn];
    sys.nodal_to_modal(b1, &mut modal[..nn]);
    sys.nodal_to_modal(b2, &mut modal[nn..]);
    for c in &mut modal[..nn] {
        *c *= 0.5 * hy;
    }
    for c in &mut modal[nn..] {
        *c *= 0.5 * hx;
    }
    let mut projected = sys.project_modal(&modal);
    for c in &mut projected[..nn] {
        *c *= 2.0 / hy;
    }
    for c in &mut projected[nn..] {
        *c *= 2.0 / hx;
    }
    sys.modal_to_nodal(&projected[..nn], b1);
    sys.modal_to_nodal(&projected[nn..], b2);
    b1.iter_mut().for_each(|b| *b += m1);
    b2.iter_mut().for_each(|b| *b += m2);
}

/// Apply the LDF projection to every cell of a field.
pub fn ldf_project_field(field: &mut ElementField, hx: f64, hy: f64, sys: &ReferenceLdfSystem) {
    use rayon::prelude::*;
    let n = field.n();
    let m = n * n;
    field.data.par_chunks_mut(m).for_each(|cell| {
        let mut b1 = vec![0.0; m];
        let mut b2 = vec![0.0; m];
        // storage is beta-major; the projector wants [alpha][beta]
        for beta in 0..n {
            for alpha in 0..n {
                b1[alpha * n + beta] = cell[beta * n + alpha].0[4];
                b2[alpha * n + beta] = cell[beta * n + alpha].0[5];
            }
        }
        ldf_project_cell(&mut b1, &mut b2, hx, hy, sys);
        for beta in 0..n {
            for alpha in 0..n {
                cell[beta * n + alpha].0[4] = b1[alpha * n + beta];
                cell[beta * n + alpha].0[5] = b2[alpha * n + beta];
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbp::build_sbp;

    #[test]
    fn schur_system_builds_for_all_orders() {
        for k in 1..=8 {
            let sbp = build_sbp(k).unwrap();
            let sys = ReferenceLdfSystem::new(&sbp).unwrap();
            assert_eq!(sys.coupling.nrows(), (k + 1) * (k + 1) - 1);
            assert!(sys.mass.iter().all(|&m| m > 0.0));
        }
    }

    #[test]
    fn constant_field_is_fixed() {
        let sbp = build_sbp(3).unwrap();
        let sys = ReferenceLdfSystem::new(&sbp).unwrap();
        let m = 16;
        let mut b1 = vec![0.7; m];
        let mut b2 = vec![-1.3; m];
        ldf_project_cell(&mut b1, &mut b2, 0.1, 0.3, &sys);
        assert!(b1.iter().all(|v| (v - 0.7).abs() < 1e-13));
        assert!(b2.iter().all(|v| (v + 1.3).abs() < 1e-13));
    }

    #[test]
    fn projection_preserves_cell_mean() {
        let sbp = build_sbp(2).unwrap();
        let sys = ReferenceLdfSystem::new(&sbp).unwrap();
        let n = 3;
        let mut b1: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b2: Vec<f64> = (0..9).map(|i| (i as f64 * 0.91).cos()).collect();
        let mean = |b: &[f64]| -> f64 {
            let mut s = 0.0;
            for a in 0..n {
                for bb in 0..n {
                    s += 0.25 * sbp.weights[a] * sbp.weights[bb] * b[a * n + bb];
                }
            }
            s
        };
        let (m1, m2) = (mean(&b1), mean(&b2));
        ldf_project_cell(&mut b1, &mut b2, 0.2, 0.5, &sys);
        assert!((mean(&b1) - m1).abs() < 1e-14);
        assert!((mean(&b2) - m2).abs() < 1e-14);
    }
}
