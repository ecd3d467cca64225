//! The log-Sobolev constant: entropy functional, Rayleigh quotient, a
//! maximized numerical estimate with certified lower bound, and the Rothaus
//! route to a rigorous upper bound.
//!
//! The maximization can only under-estimate a supremum, so `c_ls` is
//! reported together with `lower_bound = max(c_p, c_ls)` and an upper bound
//! obtained by tightening a defective log-Sobolev inequality through the
//! Rothaus lemma.
//!
//! ```
//! use spectra::entropy::{lsi_constant, LsiOpts};
//! use spectra::potential::PiecewisePotential;
//! use spectra::quadrature::GridSpec;
//!
//! let pot = PiecewisePotential::counterexample();
//! let res = lsi_constant(&pot, 1e-2, &GridSpec::default(), &LsiOpts::default())?;
//! assert!(res.lower_bound <= res.upper_bound);
//! assert!((res.c_ls - 1.166).abs() < 0.01);
//! # Ok::<(), spectra::SpectraError>(())
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SpectraError};
use crate::potential::PiecewisePotential;
use crate::quadrature::{boundary_measure_sigma_t, partition_function, GridSpec};
use crate::spectral::{
    assemble, assemble_weighted, bakry_emery_bound, poincare_constant, WeightedMesh,
};
use crate::tridiag::SymTridiag;

const PHI_CLIP: f64 = 1e-30;

fn phi(x: f64) -> f64 {
    let x = x.max(PHI_CLIP);
    x * x.ln()
}

/// Relative entropy `Ent(f^2) = int phi(f^2) dmu - phi(int f^2 dmu)` of a
/// nodal function against the normalized discrete measure, with
/// `0 log 0 := 0`.
pub fn entropy_functional(f: &[f64], mesh: &WeightedMesh) -> f64 {
    let z = mesh.total_mass();
    let mut mean_phi = 0.0;
    let mut mass = 0.0;
    for (&m, &v) in mesh.node_weights.iter().zip(f) {
        let sq = v * v;
        mean_phi += m * phi(sq);
        mass += m * sq;
    }
    (mean_phi / z - phi(mass / z)).max(0.0)
}

/// Log-Sobolev Rayleigh quotient `Ent(f^2) / (2 int f'^2 dmu)`.
pub fn lsi_rayleigh(f: &[f64], mesh: &WeightedMesh, stiffness: &SymTridiag) -> Result<f64> {
    let z = mesh.total_mass();
    let mut kf = vec![0.0; f.len()];
    stiffness.mul(f, &mut kf);
    let dirichlet = f.iter().zip(&kf).map(|(&a, &b)| a * b).sum::<f64>() / z;
    if !(dirichlet > 0.0) {
        return Err(SpectraError::ConstantCandidate);
    }
    Ok(entropy_functional(f, mesh) / (2.0 * dirichlet))
}

/// Tuning knobs for the log-Sobolev maximization.
#[derive(Debug, Clone)]
pub struct LsiOpts {
    pub restarts: usize,
    pub max_iter: usize,
    /// Convergence: relative improvement below this over the last 50
    /// iterations.
    pub tol: f64,
    /// Warm-start amplitudes for `f = 1 + s g1`.
    pub amplitude_grid: Vec<f64>,
    pub seed: u64,
}

impl Default for LsiOpts {
    fn default() -> Self {
        // Log grid over [1e-3, 1], 13 points.
        let amplitude_grid = (0..13)
            .map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 12.0))
            .collect();
        LsiOpts {
            restarts: 4,
            max_iter: 400,
            tol: 1e-9,
            amplitude_grid,
            seed: 0x5eed,
        }
    }
}

/// Outcome of the log-Sobolev maximization.
#[derive(Debug, Clone)]
pub struct LsiResult {
    /// Best Rayleigh quotient found.
    pub c_ls: f64,
    /// `max(c_p, c_ls)`: rigorous up to quadrature.
    pub lower_bound: f64,
    /// Rothaus-tightened upper bound, `+inf` when no defective components
    /// are available.
    pub upper_bound: f64,
    pub extremal_values: Vec<f64>,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Rothaus tightening of a defective log-Sobolev inequality:
/// `C_LS <= A + (B/2) C_P`.
pub fn rothaus_tighten(a: f64, b: f64, c_p: f64) -> f64 {
    a + 0.5 * b * c_p
}

fn normalize(f: &mut [f64], mesh: &WeightedMesh) {
    let n = mesh.norm_sq(f).sqrt();
    for v in f.iter_mut() {
        *v /= n;
    }
}

/// One projected gradient ascent run from `f0`, under `int f^2 dmu = 1`.
/// Returns `(best quotient, best candidate, converged)`.
fn ascend(
    f0: &[f64],
    mesh: &WeightedMesh,
    stiffness: &SymTridiag,
    opts: &LsiOpts,
) -> (f64, Vec<f64>, bool) {
    let n = f0.len();
    let z = mesh.total_mass();
    let mhat: Vec<f64> = mesh.node_weights.iter().map(|&m| m / z).collect();
    let mut f = f0.to_vec();
    normalize(&mut f, mesh);

    let quotient = |f: &[f64], kf: &mut [f64]| -> (f64, f64) {
        stiffness.mul(f, kf);
        let d = f.iter().zip(kf.iter()).map(|(&a, &b)| a * b).sum::<f64>() / z;
        if !(d > 0.0) {
            return (f64::NAN, d);
        }
        (entropy_functional(f, mesh) / (2.0 * d), d)
    };

    let mut kf = vec![0.0; n];
    let (mut q, mut d) = quotient(&f, &mut kf);
    if !q.is_finite() {
        return (0.0, f, false);
    }
    let mut best = q;
    let mut best_f = f.clone();
    let mut step = 0.1;
    let mut history = vec![q];
    let mut converged = false;

    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut kf_trial = vec![0.0; n];
    for _ in 0..opts.max_iter {
        // Gradient of Ent at a normalized candidate, then of the quotient.
        for i in 0..n {
            let sq = (f[i] * f[i]).max(PHI_CLIP);
            let de = 2.0 * mhat[i] * f[i] * sq.ln();
            let dd = 2.0 * kf[i] / z;
            grad[i] = (de - 2.0 * q * dd) / (2.0 * d);
        }
        // Project onto the tangent space of the normalization sphere.
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let c = mhat[i] * f[i];
            num += grad[i] * c;
            den += c * c;
        }
        for i in 0..n {
            grad[i] -= num / den * mhat[i] * f[i];
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm == 0.0 {
            converged = true;
            break;
        }

        // Backtracking line search; non-finite quotients reject the step.
        let mut improved = false;
        for _ in 0..30 {
            for i in 0..n {
                trial[i] = f[i] + step * grad[i] / gnorm;
            }
            normalize(&mut trial, mesh);
            let (q_trial, d_trial) = quotient(&trial, &mut kf_trial);
            if q_trial.is_finite() && q_trial > q {
                f.copy_from_slice(&trial);
                kf.copy_from_slice(&kf_trial);
                q = q_trial;
                d = d_trial;
                improved = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if q > best {
            best = q;
            best_f.copy_from_slice(&f);
        }
        history.push(q);
        if history.len() > 50 {
            let past = history[history.len() - 51];
            if (q - past).abs() <= opts.tol * q.abs().max(1e-300) {
                converged = true;
                break;
            }
        }
        if !improved && step < 1e-14 {
            converged = true;
            break;
        }
    }
    (best, best_f, converged)
}

/// Maximizes the log-Sobolev Rayleigh quotient over nodal functions on an
/// assembled discrete measure: amplitude-scanned warm starts `1 + s g1`,
/// projected gradient ascent, and seeded random smooth restarts.
pub fn lsi_constant_on_mesh(
    stiffness: &SymTridiag,
    mesh: &WeightedMesh,
    g1: &[f64],
    c_p: f64,
    upper_bound: f64,
    opts: &LsiOpts,
) -> LsiResult {
    let n = mesh.n();
    let mut best = c_p * (1.0 - 1e-12);
    let mut best_f = vec![1.0; n];
    let mut any_converged = false;

    let mut seeds: Vec<Vec<f64>> = Vec::new();
    for &s in &opts.amplitude_grid {
        seeds.push(g1.iter().map(|&g| 1.0 + s * g).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        // Smooth random perturbation: white noise with a few diffusion
        // averaging passes.
        let mut noise: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..10 {
            let prev = noise.clone();
            for i in 0..n {
                let l = prev[i.saturating_sub(1)];
                let r = prev[(i + 1).min(n - 1)];
                noise[i] = 0.25 * l + 0.5 * prev[i] + 0.25 * r;
            }
        }
        let s = opts.amplitude_grid[rng.random_range(0..opts.amplitude_grid.len())];
        seeds.push(
            g1.iter()
                .zip(&noise)
                .map(|(&g, &w)| 1.0 + s * (g + 0.3 * w))
                .collect(),
        );
    }

    let restarts_used = seeds.len();
    for f0 in seeds {
        let (q, f, conv) = ascend(&f0, mesh, stiffness, opts);
        any_converged |= conv;
        if q > best {
            best = q;
            best_f = f;
        }
    }

    LsiResult {
        c_ls: best,
        lower_bound: c_p.max(best),
        upper_bound,
        extremal_values: best_f,
        restarts_used,
        converged: any_converged,
    }
}

/// Numerical log-Sobolev constant of `mu_t`; `t = 0` means the uniform
/// measure on the plateau.
pub fn lsi_constant(
    pot: &PiecewisePotential,
    t: f64,
    grid: &GridSpec,
    opts: &LsiOpts,
) -> Result<LsiResult> {
    let (stiffness, mesh) = assemble(pot, t, grid)?;
    let spectral = poincare_constant(pot, t, grid)?;

    let upper = if t == 0.0 {
        // C_LS = C_P for the uniform measure on a segment; the slack covers
        // the O(h^2) gap between the continuous identity and the discrete
        // quotient.
        spectral.c_p * (1.0 + 1e-5)
    } else if !pot.is_degenerate()
        && pot.left_wing().is_quadratic()
        && pot.right_wing().is_quadratic()
    {
        let (a, b) = defective_lsi_components(pot, t, grid)?;
        rothaus_tighten(a, b, spectral.c_p)
    } else if let Some(be) = bakry_emery_bound(pot, t) {
        be
    } else {
        f64::INFINITY
    };

    Ok(lsi_constant_on_mesh(
        &stiffness,
        &mesh,
        &spectral.eigenfunction,
        spectral.c_p,
        upper,
        opts,
    ))
}

/// Defective log-Sobolev components `(A, B)` with `C_LS <= A + (B/2) C_P`.
///
/// `A` is the larger of the plateau segment constant and a bound on the
/// one-sided wing constants; `B` collects the entropy cost of splitting the
/// measure into plateau and wings:
/// `B = r log(1/r) + l log(1/l) + |log mu([a,b])|`.
pub fn defective_lsi_components(
    pot: &PiecewisePotential,
    t: f64,
    grid: &GridSpec,
) -> Result<(f64, f64)> {
    let (kappa_a, kappa_b) = pot.junction_curvatures();
    if !pot.left_wing().is_quadratic() || !pot.right_wing().is_quadratic() {
        return Err(SpectraError::NonQuadraticWings(
            pot.left_wing().exponent.max(pot.right_wing().exponent),
        ));
    }
    if t <= 0.0 {
        return Err(SpectraError::NonPositiveTemperature(t));
    }
    let (a, b) = pot.plateau();
    let width = b - a;
    let segment = width * width / (std::f64::consts::PI * std::f64::consts::PI);

    // Wing constants: the measure e^{-kappa x^2/2t} on [0, inf) rescales to
    // the unit half-Gaussian, so its constant is t/kappa times the unit one.
    // Solving at unit scale keeps the eigenproblem well conditioned at any t;
    // the max with the Bakry-Emery value 1 keeps the estimate rigorous.
    let wing_unit = wing_lsi_estimate(1.0, 1.0, grid)?.max(1.0);
    let mut wing = 0.0_f64;
    for &kappa in &[kappa_a, kappa_b] {
        wing = wing.max(t / kappa * wing_unit);
    }
    let a_comp = wing.max(segment);

    // Masses of the split.
    let z = partition_function(pot, t, grid)?;
    let sigma = boundary_measure_sigma_t(pot, t, grid)?;
    let outside = (z - width) / z;
    let l_t = outside * sigma.weight_left;
    let r_t = outside * sigma.weight_right;
    let mu_i = width / z;
    let xlog = |x: f64| if x > 0.0 { x * (1.0 / x).ln() } else { 0.0 };
    let b_comp = xlog(r_t) + xlog(l_t) + mu_i.ln().abs();
    Ok((a_comp, b_comp))
}

/// Log-Sobolev estimate for the one-sided wing measure
/// `e^{-kappa x^2 / 2t}` on `[0, radius)`.
fn wing_lsi_estimate(kappa: f64, t: f64, grid: &GridSpec) -> Result<f64> {
    let scale = (t / kappa).sqrt();
    let radius = (2.0 * grid.truncation_threshold * t / kappa).sqrt();
    let n = 4 * grid.layer_cells_per_scale;
    let nodes: Vec<f64> = {
        let mut v = vec![0.0];
        let mut r: f64 = 0.0;
        let mut h = scale / grid.layer_cells_per_scale as f64;
        while r < radius {
            if r >= scale {
                h *= grid.refinement_ratio;
            }
            r = (r + h).min(radius);
            v.push(r);
        }
        let _ = n;
        v
    };
    let (k, mesh) = assemble_weighted(&nodes, |x| (-kappa * x * x / (2.0 * t)).exp())?;

    // Gap eigenfunction of the wing problem as the warm start.
    let sign_node = nodes.len() - 1;
    let spectral = crate::spectral::solve_gap(&k, &mesh, sign_node)?;
    let opts = LsiOpts {
        restarts: 2,
        max_iter: 200,
        ..LsiOpts::default()
    };
    let res = lsi_constant_on_mesh(
        &k,
        &mesh,
        &spectral.eigenfunction,
        spectral.c_p,
        f64::INFINITY,
        &opts,
    );
    if !res.converged {
        return Err(SpectraError::EigenNoConvergence {
            residual: f64::NAN,
            iterations: opts.max_iter,
        });
    }
    Ok(res.c_ls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn uniform_mesh(n: usize) -> (SymTridiag, WeightedMesh) {
        let nodes: Vec<f64> = (0..=n)
            .map(|i| -FRAC_PI_2 + PI * i as f64 / n as f64)
            .collect();
        assemble_weighted(&nodes, |_| 1.0).unwrap()
    }

    #[test]
    fn entropy_of_constants_vanishes() {
        let (_, mesh) = uniform_mesh(64);
        let f = vec![3.2; mesh.n()];
        assert!(entropy_functional(&f, &mesh).abs() < 1e-12);
    }

    #[test]
    fn entropy_two_point_indicator() {
        let (_, mesh) = assemble_weighted(&[0.0, 1.0], |_| 1.0).unwrap();
        let ent = entropy_functional(&[1.0, 0.0], &mesh);
        assert!((ent - 0.5 * 2.0_f64.ln()).abs() < 1e-12, "ent = {ent}");
    }

    #[test]
    fn entropy_homogeneity() {
        let (_, mesh) = uniform_mesh(40);
        let f: Vec<f64> = mesh.nodes.iter().map(|&x| 1.0 + 0.3 * x.sin()).collect();
        let e1 = entropy_functional(&f, &mesh);
        for &s in &[0.5, 2.0, 17.0] {
            let fs: Vec<f64> = f.iter().map(|&v| s * v).collect();
            let es = entropy_functional(&fs, &mesh);
            assert!(
                (es - s * s * e1).abs() < 1e-10 * es.abs().max(1.0),
                "s = {s}"
            );
        }
    }

    #[test]
    fn rayleigh_homogeneity_and_constant_error() {
        let (k, mesh) = uniform_mesh(80);
        let f: Vec<f64> = mesh.nodes.iter().map(|&x| 1.0 + 0.2 * x.sin()).collect();
        let q = lsi_rayleigh(&f, &mesh, &k).unwrap();
        for &s in &[-3.0, 0.25, 10.0] {
            let fs: Vec<f64> = f.iter().map(|&v| s * v).collect();
            let qs = lsi_rayleigh(&fs, &mesh, &k).unwrap();
            assert!((qs - q).abs() < 1e-10 * q, "s = {s}: {qs} vs {q}");
        }
        assert!(lsi_rayleigh(&vec![2.0; mesh.n()], &mesh, &k).is_err());
    }

    #[test]
    fn rayleigh_linearization_on_segment() {
        // f = 1 + s sin(x): the quotient tends to C_P = C_LS = 1.
        let (k, mesh) = uniform_mesh(400);
        let f: Vec<f64> = mesh.nodes.iter().map(|&x| 1.0 + 1e-3 * x.sin()).collect();
        let q = lsi_rayleigh(&f, &mesh, &k).unwrap();
        assert!((q - 1.0).abs() < 1e-3, "q = {q}");
    }

    #[test]
    fn rayleigh_linearization_is_variance_quotient() {
        // f = 1 + s g: quotient -> Var(g) / int g'^2 dmu, checked by
        // Richardson extrapolation over s = 1e-3, 1e-4.
        let pot = PiecewisePotential::counterexample();
        let grid = GridSpec::default();
        let (k, mesh) = assemble(&pot, 1e-2, &grid).unwrap();
        let g: Vec<f64> = mesh.nodes.iter().map(|&x| (0.7 * x).cos()).collect();
        let mean = mesh.mean(&g);
        let g: Vec<f64> = g.iter().map(|&v| v - mean).collect();
        let var = mesh.norm_sq(&g);
        let mut kg = vec![0.0; g.len()];
        k.mul(&g, &mut kg);
        let dirichlet = g.iter().zip(&kg).map(|(&a, &b)| a * b).sum::<f64>() / mesh.total_mass();
        let target = var / dirichlet;

        let q_at = |s: f64| {
            let f: Vec<f64> = g.iter().map(|&v| 1.0 + s * v).collect();
            lsi_rayleigh(&f, &mesh, &k).unwrap()
        };
        // Below s ~ 1e-3 the entropy difference cancels catastrophically in
        // f64, so the Richardson pair uses s = 1e-2, 1e-3.
        let q2 = q_at(1e-2);
        let q3 = q_at(1e-3);
        assert!((q3 - target).abs() < 1e-3 * target);
        let extrap = (10.0 * q3 - q2) / 9.0;
        assert!((extrap - target).abs() < (q3 - target).abs());
    }

    #[test]
    fn rothaus_formula() {
        assert_eq!(rothaus_tighten(1.0, 0.0, 123.0), 1.0);
        assert_eq!(rothaus_tighten(0.5, 2.0, 1.0), 1.5);
    }

    #[test]
    fn lsi_uniform_segment() {
        let pot = PiecewisePotential::counterexample();
        let res = lsi_constant(&pot, 0.0, &GridSpec::default(), &LsiOpts::default()).unwrap();
        assert!((res.c_ls - 1.0).abs() < 1e-3, "c_ls = {}", res.c_ls);
        assert!(res.lower_bound <= res.c_ls * (1.0 + 1e-12));
        assert!(res.c_ls <= res.upper_bound * (1.0 + 1e-9));
    }

    #[test]
    fn lsi_counterexample_slope() {
        let pot = PiecewisePotential::counterexample();
        let t = 1e-4;
        let res = lsi_constant(&pot, t, &GridSpec::default(), &LsiOpts::default()).unwrap();
        let slope = (res.c_ls - 1.0) / t.sqrt();
        let expected = (8.0 / PI).sqrt();
        assert!(
            (slope - expected).abs() / expected < 0.05,
            "slope = {slope}, expected {expected}"
        );
        assert!(res.upper_bound.is_finite());
        assert!(res.c_ls <= res.upper_bound * (1.0 + 1e-9));
    }

    #[test]
    fn lsi_gaussian_matches_bakry_emery() {
        let pot = PiecewisePotential::gaussian();
        let t = 0.1;
        let res = lsi_constant(&pot, t, &GridSpec::default(), &LsiOpts::default()).unwrap();
        assert!(
            (res.c_ls - t).abs() / t < 0.02,
            "c_ls = {}, expected {t}",
            res.c_ls
        );
        assert!(res.upper_bound.is_finite());
    }

    #[test]
    fn lsi_dominates_poincare() {
        let grid = GridSpec::default();
        for (pot, t) in [
            (PiecewisePotential::counterexample(), 1e-3),
            (PiecewisePotential::asymmetric(1.0, 4.0).unwrap(), 1e-3),
            (PiecewisePotential::gaussian(), 0.5),
        ] {
            let c_p = poincare_constant(&pot, t, &grid).unwrap().c_p;
            let res = lsi_constant(&pot, t, &grid, &LsiOpts::default()).unwrap();
            assert!(
                res.c_ls >= c_p * (1.0 - 1e-10),
                "c_ls {} < c_p {c_p}",
                res.c_ls
            );
        }
    }

    #[test]
    fn defective_components_limits() {
        let pot = PiecewisePotential::counterexample();
        let grid = GridSpec::default();
        let mut prev_b = f64::INFINITY;
        for &t in &[1e-2, 1e-3, 1e-4] {
            let (a, b) = defective_lsi_components(&pot, t, &grid).unwrap();
            assert!(a >= 1.0 - 1e-12, "A = {a} below the segment constant");
            assert!(b < prev_b, "B not decreasing: {b} vs {prev_b}");
            prev_b = b;
        }
        // B ~ sqrt(t) log(1/t): still ~0.05 at t = 1e-4.
        assert!(prev_b < 0.1, "B should vanish as t -> 0, got {prev_b}");
    }

    #[test]
    fn rothaus_bound_dominates_measured_lsi() {
        let grid = GridSpec::default();
        for (pot, ts) in [
            (PiecewisePotential::counterexample(), vec![1e-2, 1e-3]),
            (
                PiecewisePotential::asymmetric(1.0, 4.0).unwrap(),
                vec![1e-3],
            ),
        ] {
            for t in ts {
                let c_p = poincare_constant(&pot, t, &grid).unwrap().c_p;
                let (a, b) = defective_lsi_components(&pot, t, &grid).unwrap();
                let upper = rothaus_tighten(a, b, c_p);
                let res = lsi_constant(&pot, t, &grid, &LsiOpts::default()).unwrap();
                assert!(
                    res.c_ls <= upper,
                    "t = {t}: c_ls {} above Rothaus bound {upper}",
                    res.c_ls
                );
            }
        }
    }

    #[test]
    fn amplitude_scan_flat_peak_at_small_amplitude() {
        // Along f = 1 + s g1 the quotient is near-flat at small s, exceeds
        // c_p there, and falls off at large amplitudes: the maximizing
        // sequence drifts toward vanishing amplitude.
        let pot = PiecewisePotential::counterexample();
        let grid = GridSpec::default();
        let t = 1e-3;
        let (k, mesh) = assemble(&pot, t, &grid).unwrap();
        let spectral = poincare_constant(&pot, t, &grid).unwrap();
        let q_at = |s: f64| {
            let f: Vec<f64> = spectral
                .eigenfunction
                .iter()
                .map(|&g| 1.0 + s * g)
                .collect();
            lsi_rayleigh(&f, &mesh, &k).unwrap()
        };
        assert!(q_at(1e-3) > spectral.c_p * (1.0 + 1e-9));
        let mut prev = q_at(1e-2);
        for &s in &[1e-1, 0.5] {
            let q = q_at(s);
            assert!(q < prev, "s = {s}: {q} >= {prev}");
            prev = q;
        }
    }
}
