//! Uniform Cartesian meshes and nodal DG fields.
//!
//! Storage layout: cells are row-major (`i` fastest), nodes inside a cell
//! are tensor LGL nodes with `alpha` (x index) fastest, so node
//! `(alpha, beta)` of cell `(i, j)` lives at
//! `((j * nx + i) * n + beta) * n + alpha` with `n = k + 1`.

use crate::error::{Error, Result};
use crate::physics::{ConservedState, GasModel};
use crate::sbp::SbpOperators;

/// Exterior-state rule on one side of the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    Periodic,
    /// Copy the interior trace.
    Outflow,
    /// Fixed exterior state.
    Inflow(ConservedState),
    /// Mirror the normal velocity, keep everything else.
    Reflective,
    /// Fixed inflow state where the tangential coordinate lies in
    /// `[lo, hi]`, reflective elsewhere.
    InflowWindow { lo: f64, hi: f64, state: ConservedState },
}

impl BoundaryCondition {
    /// Exterior state seen across a boundary face at tangential position
    /// `s` for a face with normal index `normal` (0 = x, 1 = y).
    pub fn exterior(&self, interior: &ConservedState, normal: usize, s: f64) -> ConservedState {
        match self {
            BoundaryCondition::Periodic | BoundaryCondition::Outflow => *interior,
            BoundaryCondition::Inflow(state) => *state,
            BoundaryCondition::Reflective => reflect(interior, normal),
            BoundaryCondition::InflowWindow { lo, hi, state } => {
                if s >= *lo && s <= *hi {
                    *state
                } else {
                    reflect(interior, normal)
                }
            }
        }
    }
}

fn reflect(w: &ConservedState, normal: usize) -> ConservedState {
    let mut r = *w;
    r.0[1 + normal] = -r.0[1 + normal];
    r
}

/// Side of the rectangular domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left = 0,
    Right = 1,
    Bottom = 2,
    Top = 3,
}

/// Uniform `nx x ny` grid on `[x0, x1] x [y0, y1]`.
///
/// With `y_active == false` the mesh is a 1D mesh along x (ny must be 1
/// and the y operator and y wave speeds are skipped).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    /// Left, right, bottom, top.
    pub bc: [BoundaryCondition; 4],
    pub y_active: bool,
}

impl Mesh2D {
    pub fn new(
        domain: [f64; 4],
        nx: usize,
        ny: usize,
        bc: [BoundaryCondition; 4],
    ) -> Result<Self> {
        let [x0, x1, y0, y1] = domain;
        if nx == 0 || ny == 0 {
            return Err(Error::Config(format!("grid must have at least one cell, got {nx}x{ny}")));
        }
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::Config(format!("empty domain {domain:?}")));
        }
        let lr = matches!(bc[0], BoundaryCondition::Periodic) as u8
            + matches!(bc[1], BoundaryCondition::Periodic) as u8;
        let bt = matches!(bc[2], BoundaryCondition::Periodic) as u8
            + matches!(bc[3], BoundaryCondition::Periodic) as u8;
        if lr == 1 || bt == 1 {
            return Err(Error::Config("periodic boundaries must be paired".into()));
        }
        Ok(Self {
            x0,
            x1,
            y0,
            y1,
            nx,
            ny,
            hx: (x1 - x0) / nx as f64,
            hy: (y1 - y0) / ny as f64,
            bc,
            y_active: true,
        })
    }

    /// 1D mesh along x, embedded as a single periodic row of cells.
    pub fn new_1d(x0: f64, x1: f64, nx: usize, left: BoundaryCondition, right: BoundaryCondition) -> Result<Self> {
        let mut m = Self::new(
            [x0, x1, 0.0, 1.0],
            nx,
            1,
            [left, right, BoundaryCondition::Periodic, BoundaryCondition::Periodic],
        )?;
        m.y_active = false;
        Ok(m)
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Center of cell `(i, j)`.
    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.hx,
            self.y0 + (j as f64 + 0.5) * self.hy,
        )
    }

    /// Physical coordinates of LGL node `(alpha, beta)` in cell `(i, j)`.
    #[inline]
    pub fn node_position(&self, sbp: &SbpOperators, i: usize, j: usize, alpha: usize, beta: usize) -> (f64, f64) {
        let (xc, yc) = self.cell_center(i, j);
        (
            xc + 0.5 * self.hx * sbp.nodes[alpha],
            yc + 0.5 * self.hy * sbp.nodes[beta],
        )
    }

    #[inline]
    pub fn is_periodic_x(&self) -> bool {
        matches!(self.bc[Side::Left as usize], BoundaryCondition::Periodic)
    }

    #[inline]
    pub fn is_periodic_y(&self) -> bool {
        matches!(self.bc[Side::Bottom as usize], BoundaryCondition::Periodic)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Nodal DG field: `(k+1)^2` states per cell on tensor LGL nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementField {
    pub k: usize,
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<ConservedState>,
}

impl ElementField {
    pub fn zeros(k: usize, nx: usize, ny: usize) -> Self {
        let n = k + 1;
        Self {
            k,
            nx,
            ny,
            data: vec![ConservedState::default(); nx * ny * n * n],
        }
    }

    /// Interpolate `f(x, y)` at every LGL node.
    pub fn from_fn<F>(mesh: &Mesh2D, sbp: &SbpOperators, f: F) -> Self
    where
        F: Fn(f64, f64) -> ConservedState,
    {
        let mut field = Self::zeros(sbp.k, mesh.nx, mesh.ny);
        let n = sbp.n();
        for j in 0..mesh.ny {
            for i in 0..mesh.nx {
                let c = mesh.cell_index(i, j);
                for beta in 0..n {
                    for alpha in 0..n {
                        let (x, y) = mesh.node_position(sbp, i, j, alpha, beta);
                        field.data[(c * n + beta) * n + alpha] = f(x, y);
                    }
                }
            }
        }
        field
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.k + 1
    }

    #[inline]
    pub fn nodes_per_cell(&self) -> usize {
        (self.k + 1) * (self.k + 1)
    }

    #[inline]
    pub fn cell(&self, c: usize) -> &[ConservedState] {
        let m = self.nodes_per_cell();
        &self.data[c * m..(c + 1) * m]
    }

    #[inline]
    pub fn cell_mut(&mut self, c: usize) -> &mut [ConservedState] {
        let m = self.nodes_per_cell();
        &mut self.data[c * m..(c + 1) * m]
    }

    #[inline]
    pub fn node(&self, c: usize, alpha: usize, beta: usize) -> &ConservedState {
        let n = self.n();
        &self.data[(c * n + beta) * n + alpha]
    }

    /// `self + s * other`, component-wise.
    pub fn axpy(&self, s: f64, other: &ElementField) -> ElementField {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let mut r = a.0;
                for c in 0..8 {
                    r[c] += s * b.0[c];
                }
                ConservedState(r)
            })
            .collect();
        ElementField { data, ..*self }
    }

    /// `a * self + b * other`, component-wise.
    pub fn lincomb(&self, a: f64, other: &ElementField, b: f64) -> ElementField {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| {
                let mut r = [0.0; 8];
                for c in 0..8 {
                    r[c] = a * x.0[c] + b * y.0[c];
                }
                ConservedState(r)
            })
            .collect();
        ElementField { data, ..*self }
    }

    /// Max absolute component over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|w| w.0.iter())
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(ConservedState::is_finite)
    }
}

/// Quadrature cell average of a nodal cell, `sum w_a w_b u_ab / 4`.
pub fn cell_average(cell: &[ConservedState], sbp: &SbpOperators) -> ConservedState {
    let n = sbp.n();
    let mut avg = [0.0; 8];
    for beta in 0..n {
        for alpha in 0..n {
            let w = 0.25 * sbp.weights[alpha] * sbp.weights[beta];
            let s = &cell[beta * n + alpha].0;
            for c in 0..8 {
                avg[c] += w * s[c];
            }
        }
    }
    ConservedState(avg)
}

/// First inadmissible node, as an error carrying its location.
pub fn check_admissible(field: &ElementField, mesh: &Mesh2D, gas: GasModel, eps: f64) -> Result<()> {
    let m = field.nodes_per_cell();
    for (idx, w) in field.data.iter().enumerate() {
        if !w.is_admissible(gas, eps) {
            let c = idx / m;
            return Err(Error::InadmissibleNode {
                i: c % mesh.nx,
                j: c / mesh.nx,
                node: idx % m,
                rho: w.rho(),
                p: crate::physics::pressure_unchecked(w, gas),
            });
        }
    }
    Ok(())
}
