//! Benchmark problems: initial data, boundary conditions and exact
//! solutions where available.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, ElementField, Mesh2D};
use crate::physics::{ConservedState, GasModel, Primitive};
use crate::sbp::SbpOperators;

pub type InitialCondition = Arc<dyn Fn(f64, f64) -> ConservedState + Send + Sync>;
pub type ExactSolution = Arc<dyn Fn(f64, f64, f64) -> ConservedState + Send + Sync>;

/// Names accepted by [`case_by_name`].
pub const CASE_NAMES: [&str; 7] = ["alfven", "yee_riemann", "orszag_tang", "rotor", "blast", "cloud_shock", "jet"];

#[derive(Clone)]
pub struct BenchmarkCase {
    pub name: &'static str,
    /// `[x0, x1, y0, y1]`.
    pub domain: [f64; 4],
    pub t_final: f64,
    pub gas: GasModel,
    /// Left, right, bottom, top.
    pub bc: [BoundaryCondition; 4],
    pub initial: InitialCondition,
    /// `exact(x, y, t)`.
    pub exact: Option<ExactSolution>,
    pub default_grid: (usize, usize),
}

impl std::fmt::Debug for BenchmarkCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BenchmarkCase")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("t_final", &self.t_final)
            .field("gas", &self.gas)
            .field("bc", &self.bc)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl BenchmarkCase {
    pub fn mesh(&self, nx: usize, ny: usize) -> Result<Mesh2D> {
        Mesh2D::new(self.domain, nx, ny, self.bc.clone())
    }

    /// Nodal interpolant of the initial condition.
    pub fn initial_field(&self, mesh: &Mesh2D, sbp: &SbpOperators) -> ElementField {
        let f = &self.initial;
        ElementField::from_fn(mesh, sbp, |x, y| f(x, y))
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        let gas = GasModel::new(gamma)?;
        // Rebuild primitive-defined data under the new EOS.
        let old = self.gas;
        let init = self.initial.clone();
        self.initial = Arc::new(move |x, y| init(x, y).to_primitive(old).to_conserved(gas));
        self.gas = gas;
        Ok(self)
    }
}

fn periodic() -> [BoundaryCondition; 4] {
    std::array::from_fn(|_| BoundaryCondition::Periodic)
}

fn outflow() -> [BoundaryCondition; 4] {
    std::array::from_fn(|_| BoundaryCondition::Outflow)
}

/// Circularly polarized Alfvén wave at angle `alpha`, period one along
/// `x_par`. It travels toward `-x_par` at unit speed.
pub fn alfven_case(alpha: f64) -> BenchmarkCase {
    let gas = GasModel::default();
    let (sa, ca) = alpha.sin_cos();
    let state = move |x: f64, y: f64, t: f64| {
        let xp = x * ca + y * sa + t;
        let perp = 0.1 * (2.0 * PI * xp).sin();
        let u3 = 0.1 * (2.0 * PI * xp).cos();
        Primitive {
            rho: 1.0,
            u: [-perp * sa, perp * ca, u3],
            b: [ca - perp * sa, sa + perp * ca, u3],
            p: 0.1,
        }
        .to_conserved(gas)
    };
    BenchmarkCase {
        name: "alfven",
        domain: [0.0, 1.0 / ca, 0.0, 1.0 / sa],
        t_final: 5.0,
        gas,
        bc: periodic(),
        initial: Arc::new(move |x, y| state(x, y, 0.0)),
        exact: Some(Arc::new(state)),
        default_grid: (32, 32),
    }
}

/// Perpendicular field `-B1 sin(alpha) + B2 cos(alpha)`.
pub fn b_perp(w: &ConservedState, alpha: f64) -> f64 {
    let (sa, ca) = alpha.sin_cos();
    -w.0[4] * sa + w.0[5] * ca
}

/// Four-quadrant conservative states, ordered
/// `(x>0,y>0), (x<0,y>0), (x<0,y<0), (x>0,y<0)`.
pub const YEE_STATES: [[f64; 8]; 4] = [
    [0.9308, 1.4557, -0.4633, 0.0575, 0.3501, 0.9830, 0.3050, 5.0838],
    [1.0304, 1.5774, -1.0455, -0.1016, 0.3501, 0.5078, 0.1576, 5.7813],
    [1.0000, 1.7500, -1.0000, 0.0000, 0.5642, 0.5078, 0.2539, 6.0000],
    [1.8887, 0.2334, -1.7422, 0.0733, 0.5642, 0.9830, 0.4915, 12.999],
];

pub fn yee_riemann_case() -> BenchmarkCase {
    BenchmarkCase {
        name: "yee_riemann",
        domain: [-1.0, 1.0, -1.0, 1.0],
        t_final: 0.1,
        gas: GasModel::default(),
        bc: outflow(),
        initial: Arc::new(|x, y| {
            let q = match (x > 0.0, y > 0.0) {
                (true, true) => 0,
                (false, true) => 1,
                (false, false) => 2,
                (true, false) => 3,
            };
            ConservedState(YEE_STATES[q])
        }),
        exact: None,
        default_grid: (64, 64),
    }
}

pub fn orszag_tang_case() -> BenchmarkCase {
    let gas = GasModel::default();
    let s = 1.0 / (4.0 * PI).sqrt();
    BenchmarkCase {
        name: "orszag_tang",
        domain: [0.0, 1.0, 0.0, 1.0],
        t_final: 0.5,
        gas,
        bc: periodic(),
        initial: Arc::new(move |x, y| {
            let sy = (2.0 * PI * y).sin();
            Primitive {
                rho: 25.0 / (36.0 * PI),
                u: [-sy, (2.0 * PI * x).sin(), 0.0],
                b: [-sy * s, (4.0 * PI * x).sin() * s, 0.0],
                p: 5.0 / (12.0 * PI),
            }
            .to_conserved(gas)
        }),
        exact: None,
        default_grid: (64, 64),
    }
}

pub fn rotor_case() -> BenchmarkCase {
    let gas = GasModel::new(1.4).expect("valid gamma");
    let (r0, r1, u0) = (0.1, 0.115, 2.0);
    BenchmarkCase {
        name: "rotor",
        domain: [0.0, 1.0, 0.0, 1.0],
        t_final: 0.15,
        gas,
        bc: periodic(),
        initial: Arc::new(move |x, y| {
            let (dx, dy) = (x - 0.5, y - 0.5);
            let r = (dx * dx + dy * dy).sqrt();
            let (rho, scale) = if r < r0 {
                (10.0, u0 / r0)
            } else if r < r1 {
                let f = (r1 - r) / (r1 - r0);
                (1.0 + 9.0 * f, f * u0 / r0)
            } else {
                (1.0, 0.0)
            };
            Primitive { rho, u: [-scale * dy, scale * dx, 0.0], b: [5.0, 0.0, 0.0], p: 1.0 }.to_conserved(gas)
        }),
        exact: None,
        default_grid: (64, 64),
    }
}

pub fn blast_case() -> BenchmarkCase {
    let gas = GasModel::new(1.4).expect("valid gamma");
    BenchmarkCase {
        name: "blast",
        domain: [0.0, 1.0, 0.0, 1.0],
        t_final: 0.01,
        gas,
        bc: periodic(),
        initial: Arc::new(move |x, y| {
            let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
            let p = if r < 0.1 { 1000.0 } else { 0.1 };
            Primitive { rho: 1.0, u: [0.0; 3], b: [100.0, 0.0, 0.0], p }.to_conserved(gas)
        }),
        exact: None,
        default_grid: (64, 64),
    }
}

pub fn cloud_shock_case() -> BenchmarkCase {
    let gas = GasModel::default();
    let shocked = Primitive {
        rho: 3.86859,
        u: [0.0; 3],
        b: [0.0, 2.1826182, -2.1826182],
        p: 167.345,
    };
    let ambient = Primitive { rho: 1.0, u: [-11.2536, 0.0, 0.0], b: [0.0, 0.56418958, 0.56418958], p: 1.0 };
    let cloud = Primitive { rho: 10.0, ..ambient };
    let inflow = ambient.to_conserved(gas);
    BenchmarkCase {
        name: "cloud_shock",
        domain: [0.0, 1.0, 0.0, 1.0],
        t_final: 0.06,
        gas,
        bc: [
            BoundaryCondition::Outflow,
            BoundaryCondition::Inflow(inflow),
            BoundaryCondition::Outflow,
            BoundaryCondition::Outflow,
        ],
        initial: Arc::new(move |x, y| {
            let r = ((x - 0.8).powi(2) + (y - 0.5).powi(2)).sqrt();
            let p = if x < 0.6 {
                shocked
            } else if r < 0.15 {
                cloud
            } else {
                ambient
            };
            p.to_conserved(gas)
        }),
        exact: None,
        default_grid: (64, 64),
    }
}

pub fn jet_case() -> BenchmarkCase {
    let gamma = 1.4;
    let gas = GasModel::new(gamma).expect("valid gamma");
    let b = [0.0, 200f64.sqrt(), 0.0];
    let ambient = Primitive { rho: 0.1 * gamma, u: [0.0; 3], b, p: 1.0 }.to_conserved(gas);
    let jet = Primitive { rho: gamma, u: [0.0, 800.0, 0.0], b, p: 1.0 }.to_conserved(gas);
    BenchmarkCase {
        name: "jet",
        domain: [-0.5, 0.5, 0.0, 1.5],
        t_final: 2e-3,
        gas,
        bc: [
            BoundaryCondition::Outflow,
            BoundaryCondition::Outflow,
            BoundaryCondition::InflowWindow { lo: -0.05, hi: 0.05, state: jet },
            BoundaryCondition::Outflow,
        ],
        initial: Arc::new(move |_, _| ambient),
        exact: None,
        default_grid: (100, 150),
    }
}

pub fn case_by_name(name: &str) -> Result<BenchmarkCase> {
    Ok(match name {
        "alfven" => alfven_case(PI / 6.0),
        "yee_riemann" => yee_riemann_case(),
        "orszag_tang" => orszag_tang_case(),
        "rotor" => rotor_case(),
        "blast" => blast_case(),
        "cloud_shock" => cloud_shock_case(),
        "jet" => jet_case(),
        other => {
            return Err(Error::Config(format!(
                "unknown case `{other}` (expected one of {})",
                CASE_NAMES.join(", ")
            )))
        }
    })
}

/// `(L2, Linf)` error of a scalar quantity against an exact state field.
/// The L2 norm is the square root of the LGL quadrature of the squared
/// error over the whole domain (not divided by the area).
pub fn measure_errors<Q, E>(field: &ElementField, sbp: &SbpOperators, mesh: &Mesh2D, quantity: Q, exact: E) -> (f64, f64)
where
    Q: Fn(&ConservedState) -> f64,
    E: Fn(f64, f64) -> ConservedState,
{
    let n = sbp.n();
    let mut l2 = 0.0;
    let mut linf: f64 = 0.0;
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            let c = mesh.cell_index(i, j);
            for beta in 0..n {
                for alpha in 0..n {
                    let (x, y) = mesh.node_position(sbp, i, j, alpha, beta);
                    let e = quantity(field.node(c, alpha, beta)) - quantity(&exact(x, y));
                    let w = 0.25 * mesh.hx * mesh.hy * sbp.weights[alpha] * sbp.weights[beta];
                    l2 += w * e * e;
                    linf = linf.max(e.abs());
                }
            }
        }
    }
    (l2.sqrt(), linf)
}

/// Observed orders `log(e_i / e_{i+1}) / log(N_{i+1} / N_i)`.
pub fn convergence_orders(grids: &[usize], errors: &[f64]) -> Vec<f64> {
    grids
        .windows(2)
        .zip(errors.windows(2))
        .map(|(g, e)| (e[0] / e[1]).ln() / (g[1] as f64 / g[0] as f64).ln())
        .collect()
}
