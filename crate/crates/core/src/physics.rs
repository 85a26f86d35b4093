//! Ideal-MHD state algebra for the system with the Godunov-Powell source term.
//!
//! Conserved variables are ordered `(rho, m1, m2, m3, B1, B2, B3, E)`.
//! Entropy variables use the same slot layout:
//! `v = ((gamma - s)/(gamma - 1) - beta |u|^2, 2 beta u, 2 beta B, -2 beta)`
//! with `beta = rho / (2 p)` and `s = ln(p rho^-gamma)`.

use crate::error::{Error, Result};

/// Number of conserved components.
pub const NVARS: usize = 8;

/// Default admissibility floor for density and pressure.
pub const DEFAULT_EPS_ADM: f64 = 1e-13;

pub type Vec8 = [f64; NVARS];

/// Spatial direction of a flux evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// Index of the normal velocity / field component.
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Heat-capacity ratio of a polytropic gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    gamma: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::InvalidState(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Default for GasModel {
    fn default() -> Self {
        Self { gamma: 5.0 / 3.0 }
    }
}

/// Conserved state `w = (rho, rho u, B, E)` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedState(pub Vec8);

/// Primitive description `(rho, u, B, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: [f64; 3],
    pub b: [f64; 3],
    pub p: f64,
}

impl Primitive {
    pub fn to_conserved(&self, gas: GasModel) -> ConservedState {
        let Primitive { rho, u, b, p } = *self;
        let kinetic = 0.5 * rho * dot3(&u, &u);
        let magnetic = 0.5 * dot3(&b, &b);
        ConservedState([
            rho,
            rho * u[0],
            rho * u[1],
            rho * u[2],
            b[0],
            b[1],
            b[2],
            p / (gas.gamma() - 1.0) + kinetic + magnetic,
        ])
    }
}

#[inline]
pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn dot8(a: &Vec8, b: &Vec8) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConservedState {
    #[inline]
    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn momentum(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    #[inline]
    pub fn velocity(&self) -> [f64; 3] {
        let r = self.0[0];
        [self.0[1] / r, self.0[2] / r, self.0[3] / r]
    }

    #[inline]
    pub fn magnetic(&self) -> [f64; 3] {
        [self.0[4], self.0[5], self.0[6]]
    }

    #[inline]
    pub fn energy(&self) -> f64 {
        self.0[7]
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// `rho >= eps` and `p >= eps`.
    pub fn is_admissible(&self, gas: GasModel, eps: f64) -> bool {
        self.is_finite() && self.rho() >= eps && pressure_unchecked(self, gas) >= eps
    }

    pub fn to_primitive(&self, gas: GasModel) -> Primitive {
        Primitive {
            rho: self.rho(),
            u: self.velocity(),
            b: self.magnetic(),
            p: pressure_unchecked(self, gas),
        }
    }

    /// Swap the x and y components of momentum and magnetic field.
    pub fn swap_xy(&self) -> Self {
        let w = self.0;
        ConservedState([w[0], w[2], w[1], w[3], w[5], w[4], w[6], w[7]])
    }
}

/// Gas pressure without input validation.
#[inline]
pub fn pressure_unchecked(w: &ConservedState, gas: GasModel) -> f64 {
    let w = &w.0;
    let m2 = w[1] * w[1] + w[2] * w[2] + w[3] * w[3];
    let b2 = w[4] * w[4] + w[5] * w[5] + w[6] * w[6];
    (gas.gamma() - 1.0) * (w[7] - 0.5 * m2 / w[0] - 0.5 * b2)
}

/// `p = (gamma - 1)(E - |m|^2/(2 rho) - |B|^2/2)`.
pub fn pressure(w: &ConservedState, gas: GasModel) -> Result<f64> {
    if !w.is_finite() {
        return Err(Error::InvalidState(format!("non-finite state {:?}", w.0)));
    }
    if w.rho() <= 0.0 {
        return Err(Error::InvalidState(format!("non-positive density {}", w.rho())));
    }
    Ok(pressure_unchecked(w, gas))
}

/// Physical flux `f_dir(w)`.
pub fn physical_flux(w: &ConservedState, dir: Axis, gas: GasModel) -> Vec8 {
    let d = dir.index();
    let rho = w.rho();
    let u = w.velocity();
    let b = w.magnetic();
    let p = pressure_unchecked(w, gas);
    let ptot = p + 0.5 * dot3(&b, &b);
    let un = u[d];
    let bn = b[d];
    let ub = dot3(&u, &b);
    let mut f = [
        rho * un,
        rho * un * u[0] - bn * b[0],
        rho * un * u[1] - bn * b[1],
        rho * un * u[2] - bn * b[2],
        un * b[0] - bn * u[0],
        un * b[1] - bn * u[1],
        un * b[2] - bn * u[2],
        (w.energy() + ptot) * un - ub * bn,
    ];
    f[1 + d] += ptot;
    f
}

/// Godunov-Powell source vector `(0, B, u, u.B)`.
pub fn gp_source_vector(w: &ConservedState) -> Vec8 {
    let u = w.velocity();
    let b = w.magnetic();
    [0.0, b[0], b[1], b[2], u[0], u[1], u[2], dot3(&u, &b)]
}

/// Entropy variables of an admissible state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyState {
    pub v: Vec8,
    pub beta: f64,
}

/// Thermodynamic entropy `s = ln(p rho^-gamma)`.
#[inline]
pub fn thermo_entropy(rho: f64, p: f64, gas: GasModel) -> f64 {
    p.ln() - gas.gamma() * rho.ln()
}

pub fn entropy_vars(w: &ConservedState, gas: GasModel) -> Result<EntropyState> {
    let p = pressure(w, gas)?;
    if p <= 0.0 {
        return Err(Error::InvalidState(format!("non-positive pressure {p}")));
    }
    Ok(entropy_vars_unchecked(w, p, gas))
}

#[inline]
pub(crate) fn entropy_vars_unchecked(w: &ConservedState, p: f64, gas: GasModel) -> EntropyState {
    let g = gas.gamma();
    let rho = w.rho();
    let u = w.velocity();
    let b = w.magnetic();
    let beta = 0.5 * rho / p;
    let s = thermo_entropy(rho, p, gas);
    let tb = 2.0 * beta;
    EntropyState {
        v: [
            (g - s) / (g - 1.0) - beta * dot3(&u, &u),
            tb * u[0],
            tb * u[1],
            tb * u[2],
            tb * b[0],
            tb * b[1],
            tb * b[2],
            -tb,
        ],
        beta,
    }
}

/// Inverse of [`entropy_vars`].
pub fn conserved_from_entropy(v: &Vec8, gas: GasModel) -> Result<ConservedState> {
    if !v.iter().all(|x| x.is_finite()) || v[7] >= 0.0 {
        return Err(Error::InvalidState(format!("invalid entropy variables {v:?}")));
    }
    let g = gas.gamma();
    let beta = -0.5 * v[7];
    let tb = 2.0 * beta;
    let u = [v[1] / tb, v[2] / tb, v[3] / tb];
    let b = [v[4] / tb, v[5] / tb, v[6] / tb];
    let s = g - (g - 1.0) * (v[0] + beta * dot3(&u, &u));
    // s = (1 - gamma) ln(rho) - ln(2 beta)
    let rho = ((s + tb.ln()) / (1.0 - g)).exp();
    let p = rho / tb;
    Ok(Primitive { rho, u, b, p }.to_conserved(gas))
}

/// Mathematical entropy `U = -rho s/(gamma - 1)` and its flux `F = U (u1, u2)`.
pub fn entropy_pair(w: &ConservedState, gas: GasModel) -> Result<(f64, [f64; 2])> {
    let p = pressure(w, gas)?;
    if p <= 0.0 {
        return Err(Error::InvalidState(format!("non-positive pressure {p}")));
    }
    let u = w.velocity();
    let big_u = entropy_density(w.rho(), p, gas);
    Ok((big_u, [big_u * u[0], big_u * u[1]]))
}

#[inline]
pub(crate) fn entropy_density(rho: f64, p: f64, gas: GasModel) -> f64 {
    -rho * thermo_entropy(rho, p, gas) / (gas.gamma() - 1.0)
}

/// Source-term coefficient `phi(v) = -(v2 v5 + v3 v6 + v4 v7)/v8 = 2 beta u.B`.
#[inline]
pub fn phi_coefficient(v: &Vec8) -> f64 {
    -(v[1] * v[4] + v[2] * v[5] + v[3] * v[6]) / v[7]
}

/// Potential `rho + beta |B|^2`.
pub fn potential(v: &Vec8, gas: GasModel) -> Result<f64> {
    let w = conserved_from_entropy(v, gas)?;
    let beta = -0.5 * v[7];
    let b = w.magnetic();
    Ok(w.rho() + beta * dot3(&b, &b))
}

/// Potential flux `psi = (rho + beta |B|^2) (u1, u2)`.
pub fn potential_flux(v: &Vec8, gas: GasModel) -> Result<[f64; 2]> {
    let w = conserved_from_entropy(v, gas)?;
    let pot = potential(v, gas)?;
    let u = w.velocity();
    Ok([pot * u[0], pot * u[1]])
}

/// Fast magnetosonic speed `c_f` in direction `dir`.
pub fn fast_speed(w: &ConservedState, dir: Axis, gas: GasModel) -> f64 {
    let rho = w.rho();
    let p = pressure_unchecked(w, gas).max(0.0);
    let b = w.magnetic();
    let a2 = gas.gamma() * p / rho;
    let b2 = dot3(&b, &b) / rho;
    let bn2 = b[dir.index()] * b[dir.index()] / rho;
    let sum = a2 + b2;
    let disc = (sum * sum - 4.0 * a2 * bn2).max(0.0);
    (0.5 * (sum + disc.sqrt())).sqrt()
}

/// `|u_dir| + c_f`, the single-state spectral radius in direction `dir`.
pub fn wave_speed_estimate(w: &ConservedState, dir: Axis, gas: GasModel) -> f64 {
    w.velocity()[dir.index()].abs() + fast_speed(w, dir, gas)
}
