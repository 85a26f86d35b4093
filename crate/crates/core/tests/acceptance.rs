//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line to
//! stderr (written directly, so it shows up even under captured output)
//! and its test fails if any of its criteria fail.
//!
//! The benchmark runs are long; expect the better part of an hour on one
//! core.

use std::io::Write as _;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mhd_dg::cases::case_by_name;
use mhd_dg::certify::certify;
use mhd_dg::dg::{cell_divergence, max_divergence};
use mhd_dg::fluxes::{entropy_jump_terms, InterfaceFlux, SpeedMode};
use mhd_dg::io::RunConfig;
use mhd_dg::limiters::{ldf_project_cell, LimiterConfig, ReferenceLdfSystem};
use mhd_dg::mesh::{cell_average, BoundaryCondition, ElementField, Mesh2D};
use mhd_dg::physics::{
    gp_source_vector, physical_flux, pressure_unchecked, Axis, ConservedState, GasModel, Primitive, DEFAULT_EPS_ADM,
};
use mhd_dg::runner::converge;
use mhd_dg::sampling::{random_gas, random_primitive};
use mhd_dg::sbp::build_sbp;
use mhd_dg::time_integration::{compute_dt, default_cfl, output_schedule, Discretization};

/// Collects criterion outcomes and prints each as it lands.
#[derive(Default)]
struct Report {
    failures: Vec<String>,
}

impl Report {
    fn finish(&self) {
        assert!(self.failures.is_empty(), "failed criteria: {:?}", self.failures);
    }

    fn record(&mut self, name: &str, pass: bool, detail: String, start: Instant) {
        let line = format!(
            "{} {name}: {detail} [{:.1}s]\n",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        let mut err = std::io::stderr();
        let _ = err.write_all(line.as_bytes());
        let _ = err.flush();
        if !pass {
            self.failures.push(name.to_string());
        }
    }
}

#[test]
fn sbp_exactness() {
    let mut report = Report::default();
    let start = Instant::now();
    let mut worst_sbp: f64 = 0.0;
    let mut worst_const: f64 = 0.0;
    for k in 1..=8 {
        let s = build_sbp(k).unwrap();
        let n = k + 1;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                let q = s.weights[i] * s.d[i * n + j] + s.d[j * n + i] * s.weights[j];
                let b = match (i == j, i) {
                    (true, 0) => -1.0,
                    (true, i) if i == k => 1.0,
                    _ => 0.0,
                };
                worst_sbp = worst_sbp.max((q - b).abs());
                row += s.d[i * n + j];
            }
            worst_const = worst_const.max(row.abs());
        }
    }
    report.record(
        "sbp_exactness",
        worst_sbp < 1e-13 && worst_const < 1e-13,
        format!("k=1..8 max|WD+D^TW-B|={worst_sbp:.2e} max|D1|={worst_const:.2e} (tol 1e-13)"),
        start,
    );
    report.finish();
}

#[test]
fn flux_certification() {
    let mut report = Report::default();
    let start = Instant::now();
    let r = certify(100_000, 2024);
    report.record(
        "ec_identity",
        r.ec_max_rel < 1e-10,
        format!("1e5 pairs x 2 directions, max relative residual {:.2e} (tol 1e-10)", r.ec_max_rel),
        start,
    );
    report.record(
        "es_certification",
        r.es_hll_min_rel >= -1e-10 && r.es_lf_min_rel >= -1e-10 && r.margin_violations == 0,
        format!(
            "min relative production HLL {:.2e} LF {:.2e} (tol -1e-10), speed margin violations {}",
            r.es_hll_min_rel, r.es_lf_min_rel, r.margin_violations
        ),
        start,
    );
    report.record(
        "pp_limiter_certification",
        r.pp_failures == 0,
        format!("{} random cells, {} failures", r.pp_cells, r.pp_failures),
        start,
    );
    report.finish();
}

/// Eigenvalues of `df/dw + Phi(w) e_{B_d}^T` from a central-difference
/// Jacobian.
fn quasilinear_eigenvalues(w: &ConservedState, dir: Axis, gas: GasModel) -> (f64, f64, f64) {
    let d = match dir {
        Axis::X => 0,
        Axis::Y => 1,
    };
    let mut a = DMatrix::<f64>::zeros(8, 8);
    for c in 0..8 {
        let step = 1e-6 * (w.0[c].abs() + 1.0);
        let (mut wp, mut wm) = (*w, *w);
        wp.0[c] += step;
        wm.0[c] -= step;
        let (fp, fm) = (physical_flux(&wp, dir, gas), physical_flux(&wm, dir, gas));
        for r in 0..8 {
            a[(r, c)] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    let src = gp_source_vector(w);
    for r in 0..8 {
        a[(r, 4 + d)] += src[r];
    }
    let eig = a.complex_eigenvalues();
    let lo = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let hi = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let imag = eig.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    (lo, hi, imag)
}

/// Near coincidence `A_L -> h^T H J h / (2 h^T H h)` with `H` the entropy
/// Hessian, a Rayleigh quotient of the symmetrized Jacobian halved, so its
/// range is `[l1 / 2, l8 / 2]`. That is inside `[l1, l8]` only when
/// `l1 <= 0 <= l8`; for supersonic states the halved window is the sharp one.
#[test]
fn coincident_limits() {
    let mut report = Report::default();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut outside = 0;
    let mut not_linear = 0;
    let mut worst_slope: f64 = 0.0;
    let mut ratios = Vec::with_capacity(100);
    let mut literal_misses = 0;
    let mut literal_misses_subsonic = 0;
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    let mut worst_imag: f64 = 0.0;
    for base in 0..100 {
        let gas = random_gas(&mut rng);
        let q = random_primitive(&mut rng);
        let w = q.to_conserved(gas);
        // Tangent of a relative change in the primitive variables.
        let mut dq = q;
        let eps = 1e-7;
        dq.rho *= 1.0 + eps * rng.random_range(-1.0..1.0);
        dq.p *= 1.0 + eps * rng.random_range(-1.0..1.0);
        for c in 0..3 {
            dq.u[c] += eps * rng.random_range(-1.0..1.0) * (q.u[c].abs() + 0.1);
            dq.b[c] += eps * rng.random_range(-1.0..1.0) * (q.b[c].abs() + 0.1);
        }
        let wq = dq.to_conserved(gas);
        let delta: Vec<f64> = (0..8).map(|c| (wq.0[c] - w.0[c]) / eps).collect();
        let dir = if base % 2 == 0 { Axis::X } else { Axis::Y };
        let (lo, hi, imag) = quasilinear_eigenvalues(&w, dir, gas);
        worst_imag = worst_imag.max(imag);
        let speeds = |h: f64| {
            let mut wr = w;
            for c in 0..8 {
                wr.0[c] += h * delta[c];
            }
            let (a, b_l, b_r) = entropy_jump_terms(&w, &wr, dir, gas);
            (b_l / a, b_r / a)
        };
        let mut sums = [0.0; 2];
        let mut literal_ok = true;
        for (slot, h) in [1e-3, 1e-4].into_iter().enumerate() {
            let (a_l, a_r) = speeds(h);
            let excess = (0.5 * lo - a_l).max(a_l - 0.5 * hi);
            worst_excess = worst_excess.max(excess);
            if excess > 0.1 {
                outside += 1;
            }
            literal_ok &= a_l >= lo - 0.1 && a_l <= hi + 0.1;
            sums[slot] = (a_l + a_r).abs();
        }
        if !literal_ok {
            literal_misses += 1;
            if lo <= 0.0 && hi >= 0.0 {
                literal_misses_subsonic += 1;
            }
        }
        // O(h) with a uniform constant relative to the spectral radius. A
        // per-base two-point ratio is unreliable: the quadratic term can
        // nearly cancel the linear one near h = 1e-3, and at h = 1e-4 the
        // quotient carries f64 cancellation noise growing like 1/h^2.
        let radius = lo.abs().max(hi.abs());
        for (slot, h) in [1e-3, 1e-4].into_iter().enumerate() {
            let slope = sums[slot] / (h * radius);
            worst_slope = worst_slope.max(slope);
            if slope > 10.0 {
                not_linear += 1;
            }
        }
        ratios.push(sums[1] / sums[0]);
    }
    ratios.sort_by(f64::total_cmp);
    let median_ratio = 0.5 * (ratios[49] + ratios[50]);
    report.record(
        "coincident_state_limits",
        outside == 0 && not_linear == 0 && (0.08..=0.12).contains(&median_ratio) && literal_misses_subsonic == 0,
        format!(
            "100 bases, h in {{1e-3,1e-4}}: max distance of A_L outside [l1/2,l8/2] {worst_excess:.2e} (tol 0.1), \
             max |A_L+A_R|/(h rho) {worst_slope:.2e} (tol 10), \
             median decay ratio {median_ratio:.4} (linear 0.1), max |Im l| {worst_imag:.1e}; \
             [l1-0.1,l8+0.1] missed by {literal_misses} bases, {literal_misses_subsonic} of them with l1 <= 0 <= l8"
        ),
        start,
    );
    report.finish();
}

/// Dense oracle for the projection: minimize
/// `hy^2 |B1 - P1|^2 + hx^2 |B2 - P2|^2` over the reference square for
/// `P` in `[Q^k]^2` with `div P = 0`, using monomials and a KKT solve.
/// Coefficients are indexed `i * n + j` for `xi^i eta^j`.
fn oracle_projection(k: usize, hx: f64, hy: f64, b1: &[f64], b2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = k + 1;
    let nn = n * n;
    let moment = |m: usize| if m % 2 == 0 { 2.0 / (m + 1) as f64 } else { 0.0 };
    let mut gram = DMatrix::<f64>::zeros(nn, nn);
    for r in 0..nn {
        for c in 0..nn {
            gram[(r, c)] = moment(r / n + c / n) * moment(r % n + c % n);
        }
    }
    let rows: Vec<(usize, usize)> =
        (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).filter(|&(p, q)| !(p == k && q == k)).collect();
    let size = 2 * nn + rows.len();
    let mut kkt = DMatrix::<f64>::zeros(size, size);
    let (w1, w2) = (hy * hy, hx * hx);
    for r in 0..nn {
        for c in 0..nn {
            kkt[(r, c)] = w1 * gram[(r, c)];
            kkt[(nn + r, nn + c)] = w2 * gram[(r, c)];
        }
    }
    // Coefficient of xi^p eta^q in d/dx P1 + d/dy P2.
    for (row, &(p, q)) in rows.iter().enumerate() {
        let mut put = |col: usize, v: f64| {
            kkt[(2 * nn + row, col)] = v;
            kkt[(col, 2 * nn + row)] = v;
        };
        if p < k {
            put((p + 1) * n + q, 2.0 / hx * (p + 1) as f64);
        }
        if q < k {
            put(nn + p * n + q + 1, 2.0 / hy * (q + 1) as f64);
        }
    }
    let mut rhs = DVector::<f64>::zeros(size);
    let g1 = &gram * DVector::from_column_slice(b1);
    let g2 = &gram * DVector::from_column_slice(b2);
    for r in 0..nn {
        rhs[r] = w1 * g1[r];
        rhs[nn + r] = w2 * g2[r];
    }
    let sol = kkt.lu().solve(&rhs).expect("KKT system is nonsingular");
    (sol.as_slice()[..nn].to_vec(), sol.as_slice()[nn..2 * nn].to_vec())
}

fn eval_monomials(coeffs: &[f64], n: usize, xi: f64, eta: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += coeffs[i * n + j] * xi.powi(i as i32) * eta.powi(j as i32);
        }
    }
    s
}

#[test]
fn ldf_projection() {
    let mut report = Report::default();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_div, mut worst_idem, mut worst_opt): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 1..=4 {
        let sbp = build_sbp(k).unwrap();
        let sys = ReferenceLdfSystem::new(&sbp).unwrap();
        let n = k + 1;
        for _ in 0..50 {
            let hx = 10f64.powf(rng.random_range(-1.5..0.3));
            let hy = 10f64.powf(rng.random_range(-1.5..0.3));
            let c1: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c2: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // Nodal values, alpha-major (x index first).
            let nodal = |c: &[f64]| -> Vec<f64> {
                (0..n * n).map(|id| eval_monomials(c, n, sbp.nodes[id / n], sbp.nodes[id % n])).collect()
            };
            let (mut b1, mut b2) = (nodal(&c1), nodal(&c2));
            let scale = b1.iter().chain(&b2).fold(0.0f64, |a, v| a.max(v.abs()));
            let (c1, c2): (Vec<f64>, Vec<f64>) =
                (c1.iter().map(|v| v / scale).collect(), c2.iter().map(|v| v / scale).collect());
            b1.iter_mut().chain(b2.iter_mut()).for_each(|v| *v /= scale);

            ldf_project_cell(&mut b1, &mut b2, hx, hy, &sys);

            let (p1, p2) = oracle_projection(k, hx, hy, &c1, &c2);
            let (o1, o2) = (nodal(&p1), nodal(&p2));
            for id in 0..n * n {
                worst_opt = worst_opt.max((o1[id] - b1[id]).abs()).max((o2[id] - b2[id]).abs());
            }

            let cell: Vec<ConservedState> = (0..n * n)
                .map(|q| {
                    let (alpha, beta) = (q % n, q / n);
                    let mut s = [0.0; 8];
                    s[4] = b1[alpha * n + beta];
                    s[5] = b2[alpha * n + beta];
                    ConservedState(s)
                })
                .collect();
            let div = cell_divergence(&cell, &sbp, hx, hy);
            worst_div = worst_div.max(div.iter().fold(0.0f64, |a, v| a.max(v.abs())));

            let (mut r1, mut r2) = (b1.clone(), b2.clone());
            ldf_project_cell(&mut r1, &mut r2, hx, hy, &sys);
            for id in 0..n * n {
                worst_idem = worst_idem.max((r1[id] - b1[id]).abs()).max((r2[id] - b2[id]).abs());
            }
        }
    }
    report.record(
        "ldf_projection",
        worst_div < 1e-11 && worst_idem < 1e-13 && worst_opt < 1e-10,
        format!(
            "k=1..4, 200 cells: max |div| {worst_div:.2e} (tol 1e-11), idempotence {worst_idem:.2e} (tol 1e-13), \
             distance to least-squares oracle {worst_opt:.2e} (tol 1e-10)"
        ),
        start,
    );
    report.finish();
}

#[test]
fn free_stream() {
    let mut report = Report::default();
    let start = Instant::now();
    let gas = GasModel::new(5.0 / 3.0).unwrap();
    let w = Primitive { rho: 1.3, u: [0.4, -0.25, 0.1], b: [0.6, 0.8, -0.3], p: 0.9 }.to_conserved(gas);
    let mesh = Mesh2D::new([0.0, 1.0, 0.0, 1.0], 32, 32, std::array::from_fn(|_| BoundaryCondition::Periodic)).unwrap();
    let flux = InterfaceFlux::EsHll(SpeedMode::Hll);
    let disc = Discretization::new(2, mesh, gas, flux, LimiterConfig::default()).unwrap();
    let field = ElementField::from_fn(&disc.mesh, &disc.sbp, |_, _| w);
    let dt = compute_dt(&field, &disc.mesh, gas, default_cfl(2));
    let (next, _) = disc.step(&field, dt).unwrap();
    let change = field
        .data
        .iter()
        .zip(&next.data)
        .flat_map(|(a, b)| (0..8).map(move |c| (a.0[c] - b.0[c]).abs()))
        .fold(0.0, f64::max);
    report.record(
        "free_stream",
        change < 1e-12,
        format!("32x32, k=2, one step: max |w1 - w0| = {change:.2e} (tol 1e-12)"),
        start,
    );
    report.finish();
}


/// Table values for `B_perp` at `T = 5`.
const ALFVEN_K1: [(usize, f64); 3] = [(32, 2.6765e-2), (64, 6.1594e-3), (128, 1.4426e-3)];
const ALFVEN_K2: [(usize, f64); 2] = [(32, 3.2991e-4), (64, 2.2516e-5)];

fn alfven_convergence(k: usize, table: &[(usize, f64)]) {
    let mut report = Report::default();
    let start = Instant::now();
    let grids: Vec<usize> = table.iter().map(|&(n, _)| n).collect();
    let cfg = RunConfig { case: "alfven".into(), k, ..RunConfig::default() };
    let rows = converge(&cfg, &grids).unwrap();
    for (row, &(n, reference)) in rows.iter().zip(table) {
        let ratio = row.l2 / reference;
        report.record(
            &format!("alfven_k{k}_n{n}_error"),
            (1.0 / 3.0..=3.0).contains(&ratio),
            format!("L2 {:.4e} vs table {reference:.4e}, ratio {ratio:.3} (within x3)", row.l2),
            start,
        );
    }
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.l2_order).collect();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    report.record(
        &format!("alfven_k{k}_order"),
        min_order >= k as f64 + 0.5,
        format!("observed L2 orders {orders:.3?} (floor {})", k as f64 + 0.5),
        start,
    );
    report.finish();
}

#[test]
fn alfven_k1_convergence() {
    alfven_convergence(1, &ALFVEN_K1);
}

#[test]
fn alfven_k2_convergence() {
    alfven_convergence(2, &ALFVEN_K2);
}

/// What a benchmark driven step by step reports.
struct Drive {
    steps: usize,
    max_div: f64,
    failure: Option<String>,
    final_admissible: bool,
    entropy: Vec<f64>,
}

/// Run a case with the full pipeline at k = 2, checking the divergence and
/// the cell averages after every step and recording the total entropy at
/// every output interval.
fn drive(name: &str, nx: usize, ny: usize, t_final: f64, interval: f64) -> Drive {
    let k = 2;
    let case = case_by_name(name).unwrap();
    let mesh = case.mesh(nx, ny).unwrap();
    let flux = InterfaceFlux::EsHll(SpeedMode::Hll);
    let disc = Discretization::new(k, mesh, case.gas, flux, LimiterConfig::default()).unwrap();
    let mut field = case.initial_field(&disc.mesh, &disc.sbp);
    disc.limit(&mut field, 0.0, 0).unwrap();
    let mut out = Drive {
        steps: 0,
        max_div: max_divergence(&field, &disc.sbp, &disc.mesh),
        failure: None,
        final_admissible: false,
        entropy: vec![disc.total_entropy(&field)],
    };
    let cfl = default_cfl(k);
    let m = field.nodes_per_cell();
    let mut t = 0.0;
    for t_out in output_schedule(t_final, Some(interval)) {
        while t < t_out {
            let dt = compute_dt(&field, &disc.mesh, disc.gas, cfl).min(t_out - t);
            match disc.step(&field, dt) {
                Ok((next, _)) => field = next,
                Err(e) => {
                    out.failure = Some(format!("step {} failed: {e}", out.steps + 1));
                    return out;
                }
            }
            out.steps += 1;
            t = if t_out - (t + dt) <= 1e-14 * t_out.max(1.0) { t_out } else { t + dt };
            out.max_div = out.max_div.max(max_divergence(&field, &disc.sbp, &disc.mesh));
            for (c, cell) in field.data.chunks(m).enumerate() {
                let avg = cell_average(cell, &disc.sbp);
                let p = pressure_unchecked(&avg, disc.gas);
                if !(avg.rho() > 0.0 && p > 0.0) {
                    out.failure = Some(format!("cell {c} average inadmissible at t={t}: rho={} p={p}", avg.rho()));
                    return out;
                }
            }
        }
        out.entropy.push(disc.total_entropy(&field));
    }
    out.final_admissible =
        field.is_finite() && field.data.iter().all(|w| w.is_admissible(disc.gas, DEFAULT_EPS_ADM));
    out
}

fn record_divergence(report: &mut Report, name: &str, d: &Drive, start: Instant) {
    report.record(
        &format!("{name}_divergence"),
        d.failure.is_none() && d.max_div < 1e-11,
        format!("max nodal |div B| after each of {} steps: {:.2e} (tol 1e-11)", d.steps, d.max_div),
        start,
    );
}

#[test]
fn orszag_tang_entropy_decay() {
    let mut report = Report::default();
    let start = Instant::now();
    let d = drive("orszag_tang", 64, 64, 0.5, 0.01);
    let worst = d.entropy.windows(2).map(|p| (p[1] - p[0]) / p[0].abs()).fold(f64::NEG_INFINITY, f64::max);
    report.record(
        "orszag_tang_entropy_decay",
        d.failure.is_none() && worst <= 1e-8,
        format!(
            "64x64, k=2, T=0.5, {} intervals: max relative increase {worst:.2e} (tol 1e-8){}",
            d.entropy.len() - 1,
            d.failure.as_deref().map(|e| format!(", {e}")).unwrap_or_default()
        ),
        start,
    );
    record_divergence(&mut report, "orszag_tang", &d, start);
    report.finish();
}

fn positivity(name: &str, nx: usize, ny: usize, t_final: f64, interval: f64) {
    let mut report = Report::default();
    let start = Instant::now();
    let d = drive(name, nx, ny, t_final, interval);
    report.record(
        &format!("{name}_positivity"),
        d.failure.is_none() && d.final_admissible,
        format!(
            "{nx}x{ny}, k=2, T={t_final}, {} steps: {}, final nodes admissible: {}",
            d.steps,
            d.failure.as_deref().unwrap_or("all cell averages admissible"),
            d.final_admissible
        ),
        start,
    );
    record_divergence(&mut report, name, &d, start);
    report.finish();
}

#[test]
fn blast_positivity() {
    positivity("blast", 64, 64, 0.01, 0.0025);
}

#[test]
fn jet_positivity() {
    positivity("jet", 100, 150, 2e-3, 5e-4);
}
