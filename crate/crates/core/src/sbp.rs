//! Legendre-Gauss-Lobatto quadrature and the nodal SBP differentiation
//! operator on `[-1, 1]`.

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 8;

/// LGL nodes, weights and differentiation matrix for order `k`.
///
/// `d[i * n + j] = l_j'(x_i)` with `n = k + 1`, so that `W D + D^T W = B`
/// where `B = diag(tau) = diag(-1, 0, ..., 0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperators {
    pub k: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub d: Vec<f64>,
    pub tau: Vec<f64>,
}

impl SbpOperators {
    #[inline]
    pub fn n(&self) -> usize {
        self.k + 1
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.d[i * (self.k + 1) + j]
    }

    /// Max entrywise defect of `W D + D^T W - B`.
    pub fn sbp_defect(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let q = self.weights[i] * self.d(i, j) + self.d(j, i) * self.weights[j];
                let b = if i == j { self.tau[i] } else { 0.0 };
                worst = worst.max((q - b).abs());
            }
        }
        worst
    }

    /// Max row sum of `D`, i.e. `||D 1||_inf`.
    pub fn constant_defect(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.d(i, j)).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for m in 1..n {
        let mf = m as f64;
        let p2 = ((2.0 * mf + 1.0) * x * p1 - mf * p0) / (mf + 1.0);
        let d2 = d0 + (2.0 * mf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

#[inline]
pub fn legendre(n: usize, x: f64) -> f64 {
    legendre_with_derivative(n, x).0
}

/// LGL nodes (ascending) and weights for `k + 1` points.
pub fn lgl_nodes_weights(k: usize) -> (Vec<f64>, Vec<f64>) {
    let n = k + 1;
    let mut x = vec![0.0; n];
    for (j, xj) in x.iter_mut().enumerate() {
        *xj = -(std::f64::consts::PI * j as f64 / k as f64).cos();
    }
    // Newton on (1 - x^2) P_k'(x) through the identity
    // (1 - x^2) P_k' = k (P_{k-1} - x P_k).
    for xj in x.iter_mut().take(n - 1).skip(1) {
        for _ in 0..100 {
            let (pk, dk) = legendre_with_derivative(k, *xj);
            let pkm1 = legendre(k - 1, *xj);
            let g = pkm1 - *xj * pk;
            // d/dx (P_{k-1} - x P_k) = P_{k-1}' - P_k - x P_k' = -k P_k
            let dg = -(k as f64) * pk;
            let _ = dk;
            let step = g / dg;
            *xj -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
    }
    x[0] = -1.0;
    x[k] = 1.0;
    // Enforce exact symmetry.
    for j in 0..n / 2 {
        let m = 0.5 * (x[k - j] - x[j]);
        x[j] = -m;
        x[k - j] = m;
    }
    if n % 2 == 1 {
        x[k / 2] = 0.0;
    }
    let kk = (k * (k + 1)) as f64;
    let w = x
        .iter()
        .map(|&xj| {
            let p = legendre(k, xj);
            2.0 / (kk * p * p)
        })
        .collect();
    (x, w)
}

/// Build the SBP operator of order `k`.
pub fn build_sbp(k: usize) -> Result<SbpOperators> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(Error::OrderOutOfRange(k));
    }
    let n = k + 1;
    let (nodes, weights) = lgl_nodes_weights(k);
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            let prod: f64 = (0..n).filter(|&m| m != j).map(|m| nodes[j] - nodes[m]).product();
            1.0 / prod
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    let mut tau = vec![0.0; n];
    tau[0] = -1.0;
    tau[k] = 1.0;
    Ok(SbpOperators { k, nodes, weights, d, tau })
}

/// `V[a * n + b] = P_b(x_a)` at the LGL nodes.
pub fn legendre_vandermonde(sbp: &SbpOperators) -> Vec<f64> {
    let n = sbp.n();
    let mut v = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            v[a * n + b] = legendre(b, sbp.nodes[a]);
        }
    }
    v
}
