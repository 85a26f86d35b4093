//! Semi-discrete flux-differencing DG operator on tensor LGL nodes.
//!
//! Per node `alpha` of a cell of width `h` along direction `d`:
//!
//! ```text
//! dw/dt = (2/h) [ -2 sum_b D_ab f_S(w_a, w_b) - S(w_a) sum_b D_ab B_d(w_b)
//!                 + (tau_a / omega_a) F*_a ]
//! ```
//!
//! where the star vector `F* = f(w) - f_hat + S(w) (B_d(w) - B_hat)` is
//! nonzero only at the two end nodes. The 2D operator sums the x-lines and
//! y-lines of each cell.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluxes::{ec_flux_aux, FluxPair, InterfaceFlux, NodeAux};
use crate::mesh::{BoundaryCondition, ElementField, Mesh2D, Side};
use crate::physics::{
    entropy_density, entropy_vars_unchecked, gp_source_vector, physical_flux, pressure_unchecked,
    Axis, ConservedState, GasModel, Vec8,
};
use crate::sbp::SbpOperators;

/// Nodal 1D field: `k + 1` states per cell, cells left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub k: usize,
    pub data: Vec<ConservedState>,
}

impl Field1D {
    pub fn n_cells(&self) -> usize {
        self.data.len() / (self.k + 1)
    }
}

/// Uniform 1D mesh on `[x0, x1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub x0: f64,
    pub x1: f64,
    pub n: usize,
    pub h: f64,
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
}

impl Mesh1D {
    pub fn new(x0: f64, x1: f64, n: usize, left: BoundaryCondition, right: BoundaryCondition) -> Result<Self> {
        if n == 0 || !(x1 > x0) {
            return Err(Error::Config(format!("bad 1D mesh [{x0}, {x1}] with {n} cells")));
        }
        if matches!(left, BoundaryCondition::Periodic) != matches!(right, BoundaryCondition::Periodic) {
            return Err(Error::Config("periodic boundaries must be paired".into()));
        }
        Ok(Self { x0, x1, n, h: (x1 - x0) / n as f64, left, right })
    }
}

/// Residual contribution of one line of `n` nodes along direction `d`.
/// `idx[a]` is the position of line node `a` in `states`, `aux` and `out`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn line_residual(
    sbp: &SbpOperators,
    states: &[ConservedState],
    aux: &[NodeAux],
    idx: &[usize],
    d: usize,
    gas: GasModel,
    left_face: &FluxPair,
    right_face: &FluxPair,
    scale: f64,
    out: &mut [Vec8],
) {
    let n = sbp.n();
    let gamma = gas.gamma();
    let mut vol = [[0.0f64; 8]; crate::sbp::MAX_ORDER + 1];
    for a in 0..n {
        let (f, _) = ec_flux_aux(&aux[idx[a]], &aux[idx[a]], d, gamma);
        let daa = 2.0 * sbp.d(a, a);
        for c in 0..8 {
            vol[a][c] += daa * f[c];
        }
        for b in a + 1..n {
            let (f, _) = ec_flux_aux(&aux[idx[a]], &aux[idx[b]], d, gamma);
            let dab = 2.0 * sbp.d(a, b);
            let dba = 2.0 * sbp.d(b, a);
            for c in 0..8 {
                vol[a][c] += dab * f[c];
                vol[b][c] += dba * f[c];
            }
        }
    }
    for a in 0..n {
        let w = &states[idx[a]];
        let src = gp_source_vector(w);
        let mut div = 0.0;
        for b in 0..n {
            div += sbp.d(a, b) * states[idx[b]].0[4 + d];
        }
        let mut r = [0.0; 8];
        for c in 0..8 {
            r[c] = -vol[a][c] - src[c] * div;
        }
        if a == 0 || a == n - 1 {
            let face = if a == 0 { left_face } else { right_face };
            let axis = if d == 0 { Axis::X } else { Axis::Y };
            let f = physical_flux(w, axis, gas);
            let jump = w.0[4 + d] - face.b_hat;
            let coef = sbp.tau[a] / sbp.weights[a];
            for c in 0..8 {
                r[c] += coef * (f[c] - face.f_hat[c] + src[c] * jump);
            }
        }
        let o = &mut out[idx[a]];
        for c in 0..8 {
            o[c] += scale * r[c];
        }
    }
}

fn check_positive(data: &[ConservedState], m: usize, nx: usize, gas: GasModel) -> Result<()> {
    for (idx, w) in data.iter().enumerate() {
        let p = pressure_unchecked(w, gas);
        if !(w.is_finite() && w.rho() > 0.0 && p > 0.0) {
            let c = idx / m;
            return Err(Error::InadmissibleNode { i: c % nx, j: c / nx, node: idx % m, rho: w.rho(), p });
        }
    }
    Ok(())
}

/// Semi-discrete 1D operator `dw/dt = L(w)` along x.
pub fn semidiscrete_1d(
    field: &Field1D,
    sbp: &SbpOperators,
    mesh: &Mesh1D,
    gas: GasModel,
    flux: InterfaceFlux,
) -> Result<Field1D> {
    let n = sbp.n();
    let nc = mesh.n;
    if field.k != sbp.k || field.data.len() != nc * n {
        return Err(Error::Config("field does not match mesh".into()));
    }
    check_positive(&field.data, n, nc, gas)?;
    let aux: Vec<NodeAux> = field.data.iter().map(|w| NodeAux::new(w, gas)).collect();
    // faces[f] sits between cell f-1 and cell f.
    let mut faces = Vec::with_capacity(nc + 1);
    for f in 0..=nc {
        let left = if f == 0 {
            match mesh.left {
                BoundaryCondition::Periodic => field.data[nc * n - 1],
                ref bc => bc.exterior(&field.data[0], 0, 0.0),
            }
        } else {
            field.data[f * n - 1]
        };
        let right = if f == nc {
            match mesh.right {
                BoundaryCondition::Periodic => field.data[0],
                ref bc => bc.exterior(&field.data[nc * n - 1], 0, 0.0),
            }
        } else {
            field.data[f * n]
        };
        faces.push(flux.evaluate(&left, &right, Axis::X, gas)?);
    }
    let mut out = vec![[0.0; 8]; nc * n];
    let scale = 2.0 / mesh.h;
    for cell in 0..nc {
        let idx: Vec<usize> = (cell * n..(cell + 1) * n).collect();
        line_residual(sbp, &field.data, &aux, &idx, 0, gas, &faces[cell], &faces[cell + 1], scale, &mut out);
    }
    Ok(Field1D { k: field.k, data: out.into_iter().map(ConservedState).collect() })
}

/// Interface flux pairs on all x-faces and y-faces of a 2D field.
struct FaceFluxes {
    /// `x[(j * (nx + 1) + f) * n + beta]`, face `f` left of cell `f`.
    x: Vec<FluxPair>,
    /// `y[(g * nx + i) * n + alpha]`, face `g` below cell row `g`.
    y: Vec<FluxPair>,
}

fn face_fluxes(
    field: &ElementField,
    sbp: &SbpOperators,
    mesh: &Mesh2D,
    gas: GasModel,
    flux: InterfaceFlux,
) -> Result<FaceFluxes> {
    let n = sbp.n();
    let (nx, ny) = (mesh.nx, mesh.ny);
    let x: Result<Vec<FluxPair>> = (0..ny * (nx + 1) * n)
        .into_par_iter()
        .map(|id| {
            let beta = id % n;
            let f = (id / n) % (nx + 1);
            let j = id / (n * (nx + 1));
            let trace = |i: usize, alpha: usize| *field.node(mesh.cell_index(i, j), alpha, beta);
            let y = mesh.node_position(sbp, 0, j, 0, beta).1;
            let left = if f == 0 {
                match &mesh.bc[Side::Left as usize] {
                    BoundaryCondition::Periodic => trace(nx - 1, n - 1),
                    bc => bc.exterior(&trace(0, 0), 0, y),
                }
            } else {
                trace(f - 1, n - 1)
            };
            let right = if f == nx {
                match &mesh.bc[Side::Right as usize] {
                    BoundaryCondition::Periodic => trace(0, 0),
                    bc => bc.exterior(&trace(nx - 1, n - 1), 0, y),
                }
            } else {
                trace(f, 0)
            };
            flux.evaluate(&left, &right, Axis::X, gas)
        })
        .collect();
    let y: Result<Vec<FluxPair>> = if mesh.y_active {
        (0..(ny + 1) * nx * n)
            .into_par_iter()
            .map(|id| {
                let alpha = id % n;
                let i = (id / n) % nx;
                let g = id / (n * nx);
                let trace = |j: usize, beta: usize| *field.node(mesh.cell_index(i, j), alpha, beta);
                let x = mesh.node_position(sbp, i, 0, alpha, 0).0;
                let below = if g == 0 {
                    match &mesh.bc[Side::Bottom as usize] {
                        BoundaryCondition::Periodic => trace(ny - 1, n - 1),
                        bc => bc.exterior(&trace(0, 0), 1, x),
                    }
                } else {
                    trace(g - 1, n - 1)
                };
                let above = if g == ny {
                    match &mesh.bc[Side::Top as usize] {
                        BoundaryCondition::Periodic => trace(0, 0),
                        bc => bc.exterior(&trace(ny - 1, n - 1), 1, x),
                    }
                } else {
                    trace(g, 0)
                };
                flux.evaluate(&below, &above, Axis::Y, gas)
            })
            .collect()
    } else {
        Ok(Vec::new())
    };
    Ok(FaceFluxes { x: x?, y: y? })
}

/// Semi-discrete 2D operator `dw/dt = L(w)`.
pub fn semidiscrete_2d(
    field: &ElementField,
    sbp: &SbpOperators,
    mesh: &Mesh2D,
    gas: GasModel,
    flux: InterfaceFlux,
) -> Result<ElementField> {
    let n = sbp.n();
    let m = n * n;
    let (nx, ny) = (mesh.nx, mesh.ny);
    if field.k != sbp.k || field.nx != nx || field.ny != ny {
        return Err(Error::Config("field does not match mesh".into()));
    }
    check_positive(&field.data, m, nx, gas)?;
    let faces = face_fluxes(field, sbp, mesh, gas, flux)?;
    let sx = 2.0 / mesh.hx;
    let sy = 2.0 / mesh.hy;
    let mut out = ElementField::zeros(field.k, nx, ny);
    out.data
        .par_chunks_mut(m)
        .enumerate()
        .for_each(|(c, out_cell)| {
            let (i, j) = (c % nx, c / nx);
            let states = field.cell(c);
            let aux: Vec<NodeAux> = states.iter().map(|w| NodeAux::new(w, gas)).collect();
            let mut acc = vec![[0.0; 8]; m];
            let mut idx = [0usize; crate::sbp::MAX_ORDER + 1];
            for beta in 0..n {
                for (a, slot) in idx.iter_mut().enumerate().take(n) {
                    *slot = beta * n + a;
                }
                let lf = &faces.x[(j * (nx + 1) + i) * n + beta];
                let rf = &faces.x[(j * (nx + 1) + i + 1) * n + beta];
                line_residual(sbp, states, &aux, &idx[..n], 0, gas, lf, rf, sx, &mut acc);
            }
            if mesh.y_active {
                for alpha in 0..n {
                    for (b, slot) in idx.iter_mut().enumerate().take(n) {
                        *slot = b * n + alpha;
                    }
                    let bf = &faces.y[(j * nx + i) * n + alpha];
                    let tf = &faces.y[((j + 1) * nx + i) * n + alpha];
                    line_residual(sbp, states, &aux, &idx[..n], 1, gas, bf, tf, sy, &mut acc);
                }
            }
            for (o, a) in out_cell.iter_mut().zip(acc) {
                *o = ConservedState(a);
            }
        });
    Ok(out)
}

/// Divergence of `(B1, B2)` at each node of one cell.
pub fn cell_divergence(cell: &[ConservedState], sbp: &SbpOperators, hx: f64, hy: f64) -> Vec<f64> {
    let n = sbp.n();
    let mut div = vec![0.0; n * n];
    for beta in 0..n {
        for alpha in 0..n {
            // Differentiate against a per-line reference value so a large
            // constant field does not leak roundoff through the row sums of D.
            let bx0 = cell[beta * n].0[4];
            let by0 = cell[alpha].0[5];
            let mut dx = 0.0;
            let mut dy = 0.0;
            for p in 0..n {
                dx += sbp.d(alpha, p) * (cell[beta * n + p].0[4] - bx0);
                dy += sbp.d(beta, p) * (cell[p * n + alpha].0[5] - by0);
            }
            div[beta * n + alpha] = dx * 2.0 / hx + dy * 2.0 / hy;
        }
    }
    div
}

/// Nodal divergence of the magnetic field, same layout as the field.
pub fn nodal_divergence(field: &ElementField, sbp: &SbpOperators, mesh: &Mesh2D) -> Vec<f64> {
    let m = field.nodes_per_cell();
    let mut out = vec![0.0; field.data.len()];
    out.par_chunks_mut(m).enumerate().for_each(|(c, o)| {
        o.copy_from_slice(&cell_divergence(field.cell(c), sbp, mesh.hx, mesh.hy));
    });
    out
}

pub fn max_divergence(field: &ElementField, sbp: &SbpOperators, mesh: &Mesh2D) -> f64 {
    nodal_divergence(field, sbp, mesh)
        .into_iter()
        .fold(0.0, |a: f64, b| a.max(b.abs()))
}

/// Quadrature weight of node `(alpha, beta)` times the cell Jacobian.
#[inline]
fn node_weight(sbp: &SbpOperators, mesh: &Mesh2D, alpha: usize, beta: usize) -> f64 {
    0.25 * mesh.hx * mesh.hy * sbp.weights[alpha] * sbp.weights[beta]
}

/// Total mathematical entropy `sum over cells of the quadrature of U`.
pub fn total_entropy(field: &ElementField, sbp: &SbpOperators, mesh: &Mesh2D, gas: GasModel) -> f64 {
    let n = sbp.n();
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        for beta in 0..n {
            for alpha in 0..n {
                let w = field.node(c, alpha, beta);
                let p = pressure_unchecked(w, gas);
                total += node_weight(sbp, mesh, alpha, beta) * entropy_density(w.rho(), p, gas);
            }
        }
    }
    total
}

/// `d/dt` of the total entropy implied by a residual: `sum omega v^T dw/dt`.
pub fn entropy_rate(
    field: &ElementField,
    rhs: &ElementField,
    sbp: &SbpOperators,
    mesh: &Mesh2D,
    gas: GasModel,
) -> f64 {
    let n = sbp.n();
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        for beta in 0..n {
            for alpha in 0..n {
                let w = field.node(c, alpha, beta);
                let v = entropy_vars_unchecked(w, pressure_unchecked(w, gas), gas).v;
                let r = rhs.node(c, alpha, beta);
                let dot: f64 = (0..8).map(|q| v[q] * r.0[q]).sum();
                total += node_weight(sbp, mesh, alpha, beta) * dot;
            }
        }
    }
    total
}

/// Quadrature integral of every conserved component over the domain.
pub fn total_conserved(field: &ElementField, sbp: &SbpOperators, mesh: &Mesh2D) -> Vec8 {
    let n = sbp.n();
    let mut total = [0.0; 8];
    for c in 0..mesh.n_cells() {
        for beta in 0..n {
            for alpha in 0..n {
                let w = node_weight(sbp, mesh, alpha, beta);
                let s = field.node(c, alpha, beta);
                for q in 0..8 {
                    total[q] += w * s.0[q];
                }
            }
        }
    }
    total
}
