//! Two-point volume flux and interface numerical fluxes.
//!
//! The volume flux is an entropy conservative pair `(f_S, B_S)` with the
//! arithmetic-mean normal field `B_S`. Interface fluxes are HLL (or its
//! symmetric LF special case) with signal speeds chosen so that the entropy
//! inequality holds, floored by positivity-preserving and spectral bounds.

use crate::error::{Error, Result};
use crate::physics::{
    dot3, dot8, entropy_density, entropy_vars_unchecked, phi_coefficient, physical_flux,
    pressure_unchecked, wave_speed_estimate, Axis, ConservedState, GasModel, Vec8,
};

/// Regularization added to the entropy jump denominator `a`.
pub const JUMP_EPS: f64 = 1e-8;

/// Ratio between the spectral floor and the largest entropy-driven speed
/// kept before the entropy inequality is re-checked.
pub const SPEED_CAP_FACTOR: f64 = 10.0;

const DEGENERATE_SPEED_GAP: f64 = 1e-14;

/// Numerical flux vector plus the normal magnetic numerical flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPair {
    pub f_hat: Vec8,
    pub b_hat: f64,
}

/// HLL wave speeds, `s_left <= 0 <= s_right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpeeds {
    pub s_left: f64,
    pub s_right: f64,
}

/// Which entropy-stable speed bound to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpeedMode {
    Hll,
    Lf,
}

/// Interface flux family used by the DG operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterfaceFlux {
    /// HLL flux with entropy-stable, positivity-floored signal speeds.
    EsHll(SpeedMode),
    /// The volume EC flux reused at interfaces (entropy conservative, not PP).
    Ec,
}

impl InterfaceFlux {
    pub fn evaluate(
        self,
        wl: &ConservedState,
        wr: &ConservedState,
        dir: Axis,
        gas: GasModel,
    ) -> Result<FluxPair> {
        match self {
            InterfaceFlux::Ec => Ok(ec_flux(wl, wr, dir, gas)),
            InterfaceFlux::EsHll(mode) => {
                let speeds = es_signal_speeds(wl, wr, dir, gas, mode);
                hll_interface_flux(wl, wr, dir, gas, speeds)
            }
        }
    }
}

/// Logarithmic mean `(a - b)/(ln a - ln b)` with the series fallback for
/// nearly equal arguments.
#[inline]
pub fn ln_mean(a: f64, b: f64) -> f64 {
    let zeta = a / b;
    let f = (zeta - 1.0) / (zeta + 1.0);
    let u = f * f;
    let big_f = if u < 1e-2 {
        1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0
    } else {
        zeta.ln() / (2.0 * f)
    };
    (a + b) / (2.0 * big_f)
}

/// Derived point quantities reused by the two-point flux.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NodeAux {
    pub rho: f64,
    pub u: [f64; 3],
    pub b: [f64; 3],
    pub beta: f64,
    pub u2: f64,
    pub b2: f64,
    pub ub: f64,
}

impl NodeAux {
    #[inline]
    pub fn new(w: &ConservedState, gas: GasModel) -> Self {
        let rho = w.rho();
        let u = w.velocity();
        let b = w.magnetic();
        let p = pressure_unchecked(w, gas);
        Self {
            rho,
            u,
            b,
            beta: 0.5 * rho / p,
            u2: dot3(&u, &u),
            b2: dot3(&b, &b),
            ub: dot3(&u, &b),
        }
    }
}

/// Entropy conservative volume flux on precomputed node data.
#[inline]
pub(crate) fn ec_flux_aux(l: &NodeAux, r: &NodeAux, d: usize, gamma: f64) -> (Vec8, f64) {
    let rho_ln = ln_mean(l.rho, r.rho);
    let beta_ln = ln_mean(l.beta, r.beta);
    let rho_avg = 0.5 * (l.rho + r.rho);
    let beta_avg = 0.5 * (l.beta + r.beta);
    let u = [
        0.5 * (l.u[0] + r.u[0]),
        0.5 * (l.u[1] + r.u[1]),
        0.5 * (l.u[2] + r.u[2]),
    ];
    let b = [
        0.5 * (l.b[0] + r.b[0]),
        0.5 * (l.b[1] + r.b[1]),
        0.5 * (l.b[2] + r.b[2]),
    ];
    let p_hat = 0.5 * rho_avg / beta_avg;
    let u2_avg = 0.5 * (l.u2 + r.u2);
    let b2_avg = 0.5 * (l.b2 + r.b2);
    let ub_avg = 0.5 * (l.ub + r.ub);
    let un_b2_avg = 0.5 * (l.u[d] * l.b2 + r.u[d] * r.b2);

    let f_rho = rho_ln * u[d];
    let mut f = [0.0; 8];
    f[0] = f_rho;
    for c in 0..3 {
        f[1 + c] = f_rho * u[c] - b[d] * b[c];
        f[4 + c] = u[d] * b[c] - b[d] * u[c];
    }
    f[1 + d] += p_hat + 0.5 * b2_avg;
    f[4 + d] = 0.0;
    f[7] = f_rho * 0.5 * (1.0 / ((gamma - 1.0) * beta_ln) - u2_avg)
        + f[1] * u[0]
        + f[2] * u[1]
        + f[3] * u[2]
        + f[4] * b[0]
        + f[5] * b[1]
        + f[6] * b[2]
        - 0.5 * un_b2_avg
        + b[d] * ub_avg;
    (f, b[d])
}

/// Entropy conservative two-point flux pair `(f_S, B_S)`.
pub fn ec_flux(wl: &ConservedState, wr: &ConservedState, dir: Axis, gas: GasModel) -> FluxPair {
    let (f, b) = ec_flux_aux(
        &NodeAux::new(wl, gas),
        &NodeAux::new(wr, gas),
        dir.index(),
        gas.gamma(),
    );
    FluxPair { f_hat: f, b_hat: b }
}

/// Per-state quantities entering the entropy analysis of an interface.
#[derive(Debug, Clone, Copy)]
struct EntropyPoint {
    v: Vec8,
    phi: f64,
    flux: Vec8,
    entropy_flux: f64,
    potential_flux: f64,
    bn: f64,
}

impl EntropyPoint {
    fn new(w: &ConservedState, dir: Axis, gas: GasModel) -> Self {
        let p = pressure_unchecked(w, gas);
        let e = entropy_vars_unchecked(w, p, gas);
        let d = dir.index();
        let un = w.velocity()[d];
        let b = w.magnetic();
        let big_u = entropy_density(w.rho(), p, gas);
        Self {
            v: e.v,
            phi: phi_coefficient(&e.v),
            flux: physical_flux(w, dir, gas),
            entropy_flux: big_u * un,
            potential_flux: (w.rho() + e.beta * dot3(&b, &b)) * un,
            bn: b[d],
        }
    }
}

/// Entropy jump coefficients `(a, b_L, b_R)` of an interface.
pub fn entropy_jump_terms(
    wl: &ConservedState,
    wr: &ConservedState,
    dir: Axis,
    gas: GasModel,
) -> (f64, f64, f64) {
    let l = EntropyPoint::new(wl, dir, gas);
    let r = EntropyPoint::new(wr, dir, gas);
    jump_terms(wl, wr, &l, &r)
}

fn jump_terms(
    wl: &ConservedState,
    wr: &ConservedState,
    l: &EntropyPoint,
    r: &EntropyPoint,
) -> (f64, f64, f64) {
    let mut dv = [0.0; 8];
    let mut dw = [0.0; 8];
    let mut df = [0.0; 8];
    for c in 0..8 {
        dv[c] = r.v[c] - l.v[c];
        dw[c] = wr.0[c] - wl.0[c];
        df[c] = r.flux[c] - l.flux[c];
    }
    let d_entropy_flux = r.entropy_flux - l.entropy_flux;
    let dbn = r.bn - l.bn;
    let a = dot8(&dv, &dw);
    let b_l = d_entropy_flux - dot8(&l.v, &df) - l.phi * dbn;
    let b_r = d_entropy_flux - dot8(&r.v, &df) - r.phi * dbn;
    (a, b_l, b_r)
}

/// Regularized signal-speed estimates `(A_L, A_R)`.
pub fn speed_estimates(
    wl: &ConservedState,
    wr: &ConservedState,
    dir: Axis,
    gas: GasModel,
) -> (f64, f64) {
    let (a, b_l, b_r) = entropy_jump_terms(wl, wr, dir, gas);
    (b_l / (a + JUMP_EPS), b_r / (a + JUMP_EPS))
}

/// `C_dir` of the positivity analysis: the fast-speed formula with the sound
/// speed replaced by `sqrt((gamma - 1) p / (2 rho))`.
fn pp_characteristic_speed(w: &ConservedState, d: usize, gas: GasModel) -> f64 {
    let rho = w.rho();
    let p = pressure_unchecked(w, gas).max(0.0);
    let b = w.magnetic();
    let cs2 = (gas.gamma() - 1.0) * p / (2.0 * rho);
    let b2 = dot3(&b, &b) / rho;
    let bn2 = b[d] * b[d] / rho;
    let sum = cs2 + b2;
    let disc = (sum * sum - 4.0 * cs2 * bn2).max(0.0);
    (0.5 * (sum + disc.sqrt())).sqrt()
}

/// Positivity-preserving lower bound on `|S|` for an interface pair.
pub fn pp_speed(wl: &ConservedState, wr: &ConservedState, dir: Axis, gas: GasModel) -> f64 {
    let d = dir.index();
    let (ul, ur) = (wl.velocity()[d], wr.velocity()[d]);
    let (cl, cr) = (
        pp_characteristic_speed(wl, d, gas),
        pp_characteristic_speed(wr, d, gas),
    );
    let (sl, sr) = (wl.rho().sqrt(), wr.rho().sqrt());
    let roe = (sl * ul + sr * ur).abs() / (sl + sr) + cl.max(cr);
    let (bl, br) = (wl.magnetic(), wr.magnetic());
    let db = [br[0] - bl[0], br[1] - bl[1], br[2] - bl[2]];
    (ul.abs() + cl).max(ur.abs() + cr).max(roe) + dot3(&db, &db).sqrt() / (sl + sr)
}

/// Two-state spectral radius `max(|u_L| + c_f,L, |u_R| + c_f,R)`.
pub fn spectral_floor(wl: &ConservedState, wr: &ConservedState, dir: Axis, gas: GasModel) -> f64 {
    wave_speed_estimate(wl, dir, gas).max(wave_speed_estimate(wr, dir, gas))
}

#[inline]
fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// `(-S_L - A_R)(S_R - A_L) - A_L A_R`; non-negative means entropy stable.
#[inline]
pub fn es_condition_margin(speeds: SignalSpeeds, a_l: f64, a_r: f64) -> f64 {
    // Expanded form avoids cancelling the A_L A_R products.
    -speeds.s_left * speeds.s_right + speeds.s_left * a_l - speeds.s_right * a_r
}

/// Entropy stable signal speeds combined with positivity and spectral floors.
pub fn es_signal_speeds(
    wl: &ConservedState,
    wr: &ConservedState,
    dir: Axis,
    gas: GasModel,
    mode: SpeedMode,
) -> SignalSpeeds {
    let (a_l, a_r) = speed_estimates(wl, wr, dir, gas);
    let floor = spectral_floor(wl, wr, dir, gas);
    let pp = pp_speed(wl, wr, dir, gas);
    let base = floor.max(pp);
    let cap = SPEED_CAP_FACTOR * floor;
    match mode {
        SpeedMode::Hll => {
            let root = (pos(a_l) * pos(a_r)).sqrt();
            let es_right = pos(a_l) + root;
            let es_left = pos(a_r) + root;
            let full = SignalSpeeds {
                s_left: -es_left.max(base),
                s_right: es_right.max(base),
            };
            if es_left.max(es_right) <= cap {
                return full;
            }
            let capped = SignalSpeeds {
                s_left: -es_left.min(cap).max(base),
                s_right: es_right.min(cap).max(base),
            };
            if es_condition_margin(capped, a_l, a_r) >= 0.0 {
                capped
            } else {
                full
            }
        }
        SpeedMode::Lf => {
            let es = pos(a_l + a_r);
            let mut s = es.max(base);
            if es > cap {
                let capped = cap.max(base);
                let trial = SignalSpeeds { s_left: -capped, s_right: capped };
                if es_condition_margin(trial, a_l, a_r) >= 0.0 {
                    s = capped;
                }
            }
            SignalSpeeds { s_left: -s, s_right: s }
        }
    }
}

/// HLL flux with its compatible normal magnetic flux
/// `B_hat = (S_R B_L - S_L B_R)/(S_R - S_L)`.
pub fn hll_interface_flux(
    wl: &ConservedState,
    wr: &ConservedState,
    dir: Axis,
    gas: GasModel,
    speeds: SignalSpeeds,
) -> Result<FluxPair> {
    let SignalSpeeds { s_left, s_right } = speeds;
    let gap = s_right - s_left;
    if !(gap >= DEGENERATE_SPEED_GAP) {
        return Err(Error::DegenerateSpeeds { s_left, s_right });
    }
    let fl = physical_flux(wl, dir, gas);
    let fr = physical_flux(wr, dir, gas);
    let inv = 1.0 / gap;
    let mut f = [0.0; 8];
    for c in 0..8 {
        f[c] = (s_right * fl[c] - s_left * fr[c] + s_left * s_right * (wr.0[c] - wl.0[c])) * inv;
    }
    let d = 4 + dir.index();
    let b_hat = (s_right * wl.0[d] - s_left * wr.0[d]) * inv;
    Ok(FluxPair { f_hat: f, b_hat })
}

/// HLL intermediate state `(S_R w_R - S_L w_L - (f_R - f_L))/(S_R - S_L)`.
pub fn hll_middle_state(
    wl: &ConservedState,
    wr: &ConservedState,
    dir: Axis,
    gas: GasModel,
    speeds: SignalSpeeds,
) -> ConservedState {
    let fl = physical_flux(wl, dir, gas);
    let fr = physical_flux(wr, dir, gas);
    let inv = 1.0 / (speeds.s_right - speeds.s_left);
    let mut w = [0.0; 8];
    for c in 0..8 {
        w[c] = (speeds.s_right * wr.0[c] - speeds.s_left * wl.0[c] - (fr[c] - fl[c])) * inv;
    }
    ConservedState(w)
}

/// Entropy production `psi_R - psi_L - (v_R - v_L)^T f_hat - (phi_R - phi_L) B_hat`.
///
/// Non-negative for an entropy stable flux pair, zero for an EC pair.
pub fn es_inequality_check(
    wl: &ConservedState,
    wr: &ConservedState,
    dir: Axis,
    gas: GasModel,
    flux: &FluxPair,
) -> f64 {
    let l = EntropyPoint::new(wl, dir, gas);
    let r = EntropyPoint::new(wr, dir, gas);
    let mut dv = [0.0; 8];
    for c in 0..8 {
        dv[c] = r.v[c] - l.v[c];
    }
    r.potential_flux - l.potential_flux - dot8(&dv, &flux.f_hat) - (r.phi - l.phi) * flux.b_hat
}

/// Magnitude scale for the residual of [`es_inequality_check`].
pub fn entropy_residual_scale(
    wl: &ConservedState,
    wr: &ConservedState,
    dir: Axis,
    gas: GasModel,
    flux: &FluxPair,
) -> f64 {
    let l = EntropyPoint::new(wl, dir, gas);
    let r = EntropyPoint::new(wr, dir, gas);
    let vf: f64 = (0..8)
        .map(|c| (l.v[c].abs() + r.v[c].abs()) * flux.f_hat[c].abs())
        .sum();
    1.0 + l.potential_flux.abs()
        + r.potential_flux.abs()
        + vf
        + (l.phi.abs() + r.phi.abs()) * flux.b_hat.abs()
}
