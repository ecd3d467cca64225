//! Integration against the Gibbs weight `e^{-V/t}` on a truncated,
//! boundary-layer-refined mesh, partition functions, and the projected
//! boundary measures.
//!
//! All mass variation outside the plateau lives on the scale `t^{1/alpha}`
//! next to the plateau endpoints, so the mesh resolves that layer with a
//! fixed number of cells and coarsens geometrically outward. The domain is
//! truncated where `V/t` exceeds a threshold (default 40, weight below
//! `4e-18`).

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Result, SpectraError};
use crate::potential::PiecewisePotential;

/// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Integrate `f` over `[x0, x1]` with the 8-point Gauss-Legendre rule.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, x0: f64, x1: f64) -> f64 {
    let mid = 0.5 * (x0 + x1);
    let half = 0.5 * (x1 - x0);
    let mut acc = 0.0;
    for (&xi, &wi) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += wi * f(mid + half * xi);
    }
    acc * half
}

/// Mesh construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Truncate the domain where `V(x)/t >= truncation_threshold`.
    pub truncation_threshold: f64,
    /// Uniform cells on the plateau `[a, b]`.
    pub n_plateau: usize,
    /// Cells resolving one boundary-layer width `t^{1/alpha}`.
    pub layer_cells_per_scale: usize,
    /// Geometric coarsening factor away from the plateau endpoints.
    pub refinement_ratio: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            truncation_threshold: 40.0,
            n_plateau: 512,
            layer_cells_per_scale: 12,
            refinement_ratio: 1.5,
        }
    }
}

impl GridSpec {
    pub fn with_n_plateau(mut self, n: usize) -> Self {
        self.n_plateau = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation_threshold < 30.0 {
            return Err(SpectraError::InvalidGrid(format!(
                "truncation threshold must be >= 30, got {}",
                self.truncation_threshold
            )));
        }
        if self.n_plateau < 64 {
            return Err(SpectraError::InvalidGrid(format!(
                "n_plateau must be >= 64, got {}",
                self.n_plateau
            )));
        }
        if self.layer_cells_per_scale < 8 {
            return Err(SpectraError::InvalidGrid(format!(
                "layer_cells_per_scale must be >= 8, got {}",
                self.layer_cells_per_scale
            )));
        }
        if self.refinement_ratio <= 1.0 {
            return Err(SpectraError::InvalidGrid(format!(
                "refinement_ratio must be > 1, got {}",
                self.refinement_ratio
            )));
        }
        Ok(())
    }

    /// A grid refined roughly twofold everywhere, for error estimation by
    /// mesh doubling.
    pub fn doubled(&self) -> Self {
        GridSpec {
            truncation_threshold: self.truncation_threshold,
            n_plateau: self.n_plateau * 2,
            layer_cells_per_scale: self.layer_cells_per_scale * 2,
            refinement_ratio: self.refinement_ratio.sqrt(),
        }
    }
}

/// Strictly increasing node coordinates for one wing, measured as distances
/// from the plateau endpoint, starting after 0 and ending at the truncation
/// radius.
fn wing_offsets(scale: f64, radius: f64, grid: &GridSpec) -> Vec<f64> {
    let mut offs = Vec::new();
    let h0 = scale / grid.layer_cells_per_scale as f64;
    let mut r = 0.0;
    let mut h = h0;
    while r < radius {
        if r >= scale {
            h *= grid.refinement_ratio;
        }
        r += h;
        if r >= radius - 0.25 * h {
            r = radius;
        }
        offs.push(r);
        if r >= radius {
            break;
        }
    }
    offs
}

/// Builds the truncated, layer-refined node set for `(pot, t)`. With `t = 0`
/// the mesh covers the plateau only (the measure degenerates to the uniform
/// one there).
pub fn build_nodes(pot: &PiecewisePotential, t: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    grid.validate()?;
    let (a, b) = pot.plateau();
    let mut nodes = Vec::new();

    if t == 0.0 {
        if pot.is_degenerate() {
            return Err(SpectraError::InvalidGrid(
                "t = 0 with a degenerate plateau is a Dirac mass; no mesh exists".into(),
            ));
        }
        for i in 0..=grid.n_plateau {
            nodes.push(a + (b - a) * i as f64 / grid.n_plateau as f64);
        }
        return Ok(nodes);
    }
    if t < 0.0 {
        return Err(SpectraError::NonPositiveTemperature(t));
    }

    let level = grid.truncation_threshold * t;
    let left_radius = pot.left_wing().radius_for_value(level);
    let right_radius = pot.right_wing().radius_for_value(level);
    let left_scale = t.powf(1.0 / pot.left_wing().exponent);
    let right_scale = t.powf(1.0 / pot.right_wing().exponent);

    let left = wing_offsets(left_scale, left_radius, grid);
    for &r in left.iter().rev() {
        nodes.push(a - r);
    }
    nodes.push(a);
    if !pot.is_degenerate() {
        for i in 1..=grid.n_plateau {
            nodes.push(a + (b - a) * i as f64 / grid.n_plateau as f64);
        }
    }
    for &r in wing_offsets(right_scale, right_radius, grid).iter() {
        nodes.push(b + r);
    }

    debug_assert!(nodes.windows(2).all(|w| w[1] > w[0]), "mesh not increasing");
    Ok(nodes)
}

/// Integrate `f(x) e^{-V(x)/t}` over the truncated domain.
pub fn integrate_weighted(
    pot: &PiecewisePotential,
    t: f64,
    f: impl Fn(f64) -> f64,
    nodes: &[f64],
) -> f64 {
    let mut acc = 0.0;
    for w in nodes.windows(2) {
        acc += gauss_legendre(|x| f(x) * (-pot.eval(x) / t).exp(), w[0], w[1]);
    }
    acc
}

/// Partition function `Z_t = int e^{-V/t} dx`.
pub fn partition_function(pot: &PiecewisePotential, t: f64, grid: &GridSpec) -> Result<f64> {
    if t <= 0.0 {
        return Err(SpectraError::NonPositiveTemperature(t));
    }
    let nodes = build_nodes(pot, t, grid)?;
    Ok(integrate_weighted(pot, t, |_| 1.0, &nodes))
}

/// Partition function with a mesh-doubling error estimate
/// `(value_on_doubled_grid, |difference|)`.
pub fn partition_function_with_error(
    pot: &PiecewisePotential,
    t: f64,
    grid: &GridSpec,
) -> Result<(f64, f64)> {
    let coarse = partition_function(pot, t, grid)?;
    let fine = partition_function(pot, t, &grid.doubled())?;
    Ok((fine, (fine - coarse).abs()))
}

/// Normalized moment `int f dmu_t = (1/Z_t) int f e^{-V/t}`.
pub fn weighted_moment(
    pot: &PiecewisePotential,
    t: f64,
    f: impl Fn(f64) -> f64,
    grid: &GridSpec,
) -> Result<f64> {
    if t <= 0.0 {
        return Err(SpectraError::NonPositiveTemperature(t));
    }
    let nodes = build_nodes(pot, t, grid)?;
    let z = integrate_weighted(pot, t, |_| 1.0, &nodes);
    Ok(integrate_weighted(pot, t, f, &nodes) / z)
}

/// Variance of `mu_t`.
pub fn variance(pot: &PiecewisePotential, t: f64, grid: &GridSpec) -> Result<f64> {
    if t <= 0.0 {
        return Err(SpectraError::NonPositiveTemperature(t));
    }
    let nodes = build_nodes(pot, t, grid)?;
    let z = integrate_weighted(pot, t, |_| 1.0, &nodes);
    let mean = integrate_weighted(pot, t, |x| x, &nodes) / z;
    Ok(integrate_weighted(pot, t, |x| (x - mean) * (x - mean), &nodes) / z)
}

/// Projection of the outside mass of `mu_t` onto the plateau endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryMeasure {
    pub weight_left: f64,
    pub weight_right: f64,
}

/// Push-forward of the outside-restricted `mu_t` by the projection onto
/// `[a, b]`: relative wing masses.
pub fn boundary_measure_sigma_t(
    pot: &PiecewisePotential,
    t: f64,
    grid: &GridSpec,
) -> Result<BoundaryMeasure> {
    if t <= 0.0 {
        return Err(SpectraError::NonPositiveTemperature(t));
    }
    let (a, b) = pot.plateau();
    let nodes = build_nodes(pot, t, grid)?;
    let mut left = 0.0;
    let mut right = 0.0;
    for w in nodes.windows(2) {
        let mass = gauss_legendre(|x| (-pot.eval(x) / t).exp(), w[0], w[1]);
        if w[1] <= a {
            left += mass;
        } else if w[0] >= b {
            right += mass;
        }
    }
    let total = left + right;
    Ok(BoundaryMeasure {
        weight_left: left / total,
        weight_right: right / total,
    })
}

/// The `t -> 0` limit of [`boundary_measure_sigma_t`]: weights proportional
/// to `a_side^{1/alpha}` where `a_side` is the boundary growth coefficient.
pub fn limiting_sigma(pot: &PiecewisePotential) -> Result<BoundaryMeasure> {
    let alpha = pot.common_exponent()?;
    let wl = pot.left_wing().boundary_coefficient().powf(1.0 / alpha);
    let wr = pot.right_wing().boundary_coefficient().powf(1.0 / alpha);
    Ok(BoundaryMeasure {
        weight_left: wl / (wl + wr),
        weight_right: wr / (wl + wr),
    })
}

/// First-order expansion of the partition function,
/// `Z_t = (b - a) + gamma * t^{1/alpha} + o(t^{1/alpha})`:
/// returns `(gamma, 1/alpha)`.
///
/// `gamma = C_alpha * (a_left^{1/alpha} + a_right^{1/alpha})` with
/// `C_alpha = Gamma(1/alpha) / alpha`.
pub fn z_expansion(pot: &PiecewisePotential) -> Result<(f64, f64)> {
    let alpha = pot.common_exponent()?;
    let c_alpha = gamma(1.0 / alpha) / alpha;
    let g = c_alpha
        * (pot.left_wing().boundary_coefficient().powf(1.0 / alpha)
            + pot.right_wing().boundary_coefficient().powf(1.0 / alpha));
    Ok((g, 1.0 / alpha))
}

/// Outcome of the half-line mean-control inequality check.
#[derive(Debug, Clone, Copy)]
pub struct MeanControl {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Verifies, for `g` in `C^1` with polynomial growth and `0 < eps < 1`,
///
/// `|int_0^inf g^2 e^{-x^2/2t} dx - sqrt(pi t/2) g(0)^2|
///    <= eps' sqrt(t) g(0)^2 + C_eps t int_0^inf g'^2 e^{-x^2/2t} dx`
///
/// with `eps' = sqrt(pi/2) (sqrt(1+eps) - 1)` and
/// `C_eps = 1 + 1/(sqrt(1+eps) - 1)`.
///
/// The constant comes from splitting `g = g(0) + h`, Young's inequality on
/// the cross term, and the sharp half-line Poincare bound
/// `int h^2 w <= t int h'^2 w` for `h(0) = 0` (extremal `h = x`, so the
/// often-quoted `t/2` is too small by a factor 2).
pub fn boundary_mean_control_check(
    g: impl Fn(f64) -> f64,
    g_prime: impl Fn(f64) -> f64,
    t: f64,
    eps: f64,
) -> Result<MeanControl> {
    if t <= 0.0 {
        return Err(SpectraError::NonPositiveTemperature(t));
    }
    assert!(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
    let grid = GridSpec::default();
    let radius = (2.0 * grid.truncation_threshold * t).sqrt();
    let offs = wing_offsets(t.sqrt(), radius, &grid);
    let weight = |x: f64| (-x * x / (2.0 * t)).exp();

    let mut sq = 0.0;
    let mut dirichlet = 0.0;
    let mut lo = 0.0;
    for &hi in &offs {
        sq += gauss_legendre(|x| g(x) * g(x) * weight(x), lo, hi);
        dirichlet += gauss_legendre(|x| g_prime(x) * g_prime(x) * weight(x), lo, hi);
        lo = hi;
    }

    let g0 = g(0.0);
    let lhs = (sq - (std::f64::consts::PI * t / 2.0).sqrt() * g0 * g0).abs();
    let eps_young = (1.0 + eps).sqrt() - 1.0;
    let eps_prime = (std::f64::consts::PI / 2.0).sqrt() * eps_young;
    let c_eps = 1.0 + 1.0 / eps_young;
    let rhs = eps_prime * t.sqrt() * g0 * g0 + c_eps * t * dirichlet;
    Ok(MeanControl {
        holds: lhs <= rhs * (1.0 + 1e-12) + 1e-300,
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn partition_counterexample_small_t() {
        let pot = PiecewisePotential::counterexample();
        let t = 0.01;
        let z = partition_function(&pot, t, &GridSpec::default()).unwrap();
        // Exact: pi + 2 * sqrt(pi t / 2).
        let exact = PI + 2.0 * (PI * t / 2.0).sqrt();
        assert!((z - exact).abs() / exact < 1e-6, "z = {z}, exact = {exact}");
    }

    #[test]
    fn partition_gaussian() {
        let pot = PiecewisePotential::gaussian();
        let z = partition_function(&pot, 1.0, &GridSpec::default()).unwrap();
        let exact = (2.0 * PI).sqrt();
        assert!((z - exact).abs() / exact < 1e-10, "z = {z}");
    }

    #[test]
    fn partition_tends_to_plateau_width() {
        let pot = PiecewisePotential::counterexample();
        let mut prev = f64::INFINITY;
        for &t in &[1e-2, 1e-3, 1e-4, 1e-5] {
            let z = partition_function(&pot, t, &GridSpec::default()).unwrap();
            assert!(z < prev, "Z_t should decrease with t");
            prev = z;
        }
        // Z_t - pi = sqrt(2 pi t) for this potential.
        assert!((prev - PI - (2.0 * PI * 1e-5).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn mesh_doubling_error_small() {
        let pot = PiecewisePotential::counterexample();
        for &t in &[1e-2, 1e-4] {
            let (z, err) = partition_function_with_error(&pot, t, &GridSpec::default()).unwrap();
            assert!(err / z < 1e-8, "t = {t}: relative error {}", err / z);
        }
    }

    #[test]
    fn moments() {
        let pot = PiecewisePotential::counterexample();
        let grid = GridSpec::default();
        let one = weighted_moment(&pot, 0.01, |_| 1.0, &grid).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        let odd = weighted_moment(&pot, 0.01, |x| x, &grid).unwrap();
        assert!(odd.abs() < 1e-12);

        // Z_t * int sin^2 dmu_t = pi/2 + sqrt(2 pi t) + o(sqrt t).
        let t = 1e-5;
        let z = partition_function(&pot, t, &grid).unwrap();
        let m = weighted_moment(&pot, t, |x| x.sin().powi(2), &grid).unwrap();
        let expansion = PI / 2.0 + (2.0 * PI * t).sqrt();
        assert!(
            (z * m - expansion).abs() < 5.0 * t.sqrt() * t.sqrt(),
            "got {}, expansion {expansion}",
            z * m
        );
    }

    #[test]
    fn variance_gaussian_and_uniform_limit() {
        let pot = PiecewisePotential::gaussian();
        for &t in &[1.0, 0.1] {
            let v = variance(&pot, t, &GridSpec::default()).unwrap();
            assert!((v - t).abs() / t < 1e-8, "t = {t}, var = {v}");
        }
        // t -> 0 limit of the plateau potential: uniform variance pi^2/12.
        let cx = PiecewisePotential::counterexample();
        let v = variance(&cx, 1e-6, &GridSpec::default()).unwrap();
        assert!((v - PI * PI / 12.0).abs() < 1e-2);
    }

    #[test]
    fn sigma_t_weights() {
        let grid = GridSpec::default();
        let sym = PiecewisePotential::counterexample();
        let bm = boundary_measure_sigma_t(&sym, 1e-3, &grid).unwrap();
        assert!((bm.weight_left - 0.5).abs() < 1e-12);
        assert!((bm.weight_left + bm.weight_right - 1.0).abs() < 1e-15);

        // kappa_a = 1, kappa_b = 4: weights ~ kappa^{-1/2}, ratio 2 : 1.
        let asym = PiecewisePotential::asymmetric(1.0, 4.0).unwrap();
        let bm = boundary_measure_sigma_t(&asym, 1e-6, &grid).unwrap();
        assert!(
            (bm.weight_left - 2.0 / 3.0).abs() < 1e-4,
            "left = {}",
            bm.weight_left
        );
    }

    #[test]
    fn limiting_sigma_formula_and_convergence() {
        let asym = PiecewisePotential::asymmetric(1.0, 4.0).unwrap();
        let lim = limiting_sigma(&asym).unwrap();
        assert!((lim.weight_left - 2.0 / 3.0).abs() < 1e-14);

        let grid = GridSpec::default();
        let bm = boundary_measure_sigma_t(&asym, 1e-6, &grid).unwrap();
        assert!((bm.weight_left - lim.weight_left).abs() <= 0.01);
        assert!((bm.weight_right - lim.weight_right).abs() <= 0.01);
    }

    #[test]
    fn z_expansion_values() {
        let cx = PiecewisePotential::counterexample();
        let (g, e) = z_expansion(&cx).unwrap();
        assert!((g - (2.0 * PI).sqrt()).abs() < 1e-12, "gamma = {g}");
        assert_eq!(e, 0.5);

        let q = PiecewisePotential::quartic();
        let (g, e) = z_expansion(&q).unwrap();
        assert!((g - 1.812_804_954_109_188).abs() < 1e-9, "gamma = {g}");
        assert_eq!(e, 0.25);

        // Symmetric quadratic wings kappa/2 r^2: gamma = sqrt(2 pi / kappa).
        let k = 3.7;
        let p = PiecewisePotential::asymmetric(k, k).unwrap();
        let (g, _) = z_expansion(&p).unwrap();
        assert!((g - (2.0 * PI / k).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn z_expansion_rejects_mixed_exponents() {
        let pot = PiecewisePotential::new(
            0.0,
            1.0,
            crate::potential::WingSpec::quadratic(1.0),
            crate::potential::WingSpec::power(1.0, 4.0),
        )
        .unwrap();
        assert!(z_expansion(&pot).is_err());
    }

    #[test]
    fn z_expansion_consistent_with_quadrature() {
        // For pure power wings the expansion is exact:
        // each wing integral is Gamma(1 + 1/alpha) (t/c)^{1/alpha}.
        for pot in [
            PiecewisePotential::counterexample(),
            PiecewisePotential::quartic(),
        ] {
            let (g, e) = z_expansion(&pot).unwrap();
            let width = pot.plateau_width();
            for k in 2..=6 {
                let t = 10f64.powi(-k);
                let z = partition_function(&pot, t, &GridSpec::default()).unwrap();
                let rel = (z - width - g * t.powf(e)).abs() / t.powf(e);
                assert!(rel < 1e-10, "t = {t}: residual {rel}");
            }
        }
    }

    #[test]
    fn mean_control_constant_and_linear() {
        // g = 1: LHS is 0 up to truncation error.
        let mc = boundary_mean_control_check(|_| 1.0, |_| 0.0, 1e-3, 0.5).unwrap();
        assert!(mc.holds);
        assert!(mc.lhs < 1e-12);

        // g = x: closed-form Gaussian moments, holds iff C_eps >= 1.
        for &eps in &[0.1, 0.5, 0.9] {
            let mc = boundary_mean_control_check(|x| x, |_| 1.0, 1e-3, eps).unwrap();
            assert!(mc.holds, "eps = {eps}: lhs {} rhs {}", mc.lhs, mc.rhs);
        }
    }
}
