//! Random admissible states for Monte-Carlo certification.

use rand::Rng;

use crate::physics::{ConservedState, GasModel, Primitive};

/// Draws a state with log-uniform density and pressure and uniform
/// velocity and magnetic components.
pub fn random_primitive<R: Rng + ?Sized>(rng: &mut R) -> Primitive {
    let rho = 10f64.powf(rng.random_range(-1.5..1.5));
    let p = 10f64.powf(rng.random_range(-2.0..1.5));
    let mut u = [0.0; 3];
    let mut b = [0.0; 3];
    for c in 0..3 {
        u[c] = rng.random_range(-3.0..3.0);
        b[c] = rng.random_range(-3.0..3.0);
    }
    Primitive { rho, u, b, p }
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, gas: GasModel) -> ConservedState {
    random_primitive(rng).to_conserved(gas)
}

/// Random pair; a third of the pairs are small perturbations of each other.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, gas: GasModel) -> (ConservedState, ConservedState) {
    let left = random_primitive(rng);
    let right = if rng.random_bool(1.0 / 3.0) {
        let scale = 10f64.powf(rng.random_range(-6.0..-1.0));
        let mut q = left;
        q.rho *= 1.0 + scale * rng.random_range(-1.0..1.0);
        q.p *= 1.0 + scale * rng.random_range(-1.0..1.0);
        for c in 0..3 {
            q.u[c] += scale * rng.random_range(-1.0..1.0);
            q.b[c] += scale * rng.random_range(-1.0..1.0);
        }
        q
    } else {
        random_primitive(rng)
    };
    (left.to_conserved(gas), right.to_conserved(gas))
}

/// Gas model drawn from the two ratios used by the benchmarks.
pub fn random_gas<R: Rng + ?Sized>(rng: &mut R) -> GasModel {
    let gamma = if rng.random_bool(0.5) { 5.0 / 3.0 } else { 1.4 };
    GasModel::new(gamma).expect("valid gamma")
}
