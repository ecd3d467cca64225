//! The Poincaré constant as an inverse spectral gap.
//!
//! The Dirichlet form `int f'^2 dmu_t` and the squared norm `int f^2 dmu_t`
//! are discretized with piecewise-linear finite elements on the layer-refined
//! mesh; the mass matrix is lumped to the diagonal, which reduces the
//! generalized eigenproblem to a standard symmetric tridiagonal one via a
//! diagonal similarity. The smallest nonzero eigenvalue comes from
//! Sturm-sequence bisection, the eigenvector from shifted inverse iteration
//! deflated against the weighted constant mode.

use crate::error::{Result, SpectraError};
use crate::potential::PiecewisePotential;
use crate::quadrature::{build_nodes, gauss_legendre, GridSpec};
use crate::tridiag::{SymTridiag, TridiagLu};

/// A 1D mesh with per-cell Gibbs masses and lumped per-node masses.
#[derive(Debug, Clone)]
pub struct WeightedMesh {
    pub nodes: Vec<f64>,
    pub cell_weights: Vec<f64>,
    pub node_weights: Vec<f64>,
}

impl WeightedMesh {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Total mass (the partition function of the discretized measure).
    pub fn total_mass(&self) -> f64 {
        self.node_weights.iter().sum()
    }

    /// Mean of nodal values against the normalized measure.
    pub fn mean(&self, f: &[f64]) -> f64 {
        let z = self.total_mass();
        self.node_weights
            .iter()
            .zip(f)
            .map(|(&m, &v)| m * v)
            .sum::<f64>()
            / z
    }

    /// `int f^2 dmu` for nodal values.
    pub fn norm_sq(&self, f: &[f64]) -> f64 {
        let z = self.total_mass();
        self.node_weights
            .iter()
            .zip(f)
            .map(|(&m, &v)| m * v * v)
            .sum::<f64>()
            / z
    }
}

/// Assemble the stiffness matrix `K_ij = int phi_i' phi_j' w` and the lumped
/// mass vector `m_i = int phi_i w` for an arbitrary positive weight.
pub fn assemble_weighted(nodes: &[f64], weight: impl Fn(f64) -> f64) -> Result<(SymTridiag, WeightedMesh)> {
    let n = nodes.len();
    if n < 2 {
        return Err(SpectraError::EmptyMesh);
    }
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    let mut node_weights = vec![0.0; n];
    let mut cell_weights = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        let h = x1 - x0;
        let w_cell = gauss_legendre(&weight, x0, x1);
        cell_weights[i] = w_cell;
        let k = w_cell / (h * h);
        diag[i] += k;
        diag[i + 1] += k;
        off[i] -= k;
        node_weights[i] += gauss_legendre(|x| weight(x) * (x1 - x) / h, x0, x1);
        node_weights[i + 1] += gauss_legendre(|x| weight(x) * (x - x0) / h, x0, x1);
    }
    Ok((
        SymTridiag { diag, off },
        WeightedMesh {
            nodes: nodes.to_vec(),
            cell_weights,
            node_weights,
        },
    ))
}

/// Assemble stiffness and lumped mass for the Gibbs weight `e^{-V/t}`.
/// `t = 0` discretizes the uniform measure on the plateau.
pub fn assemble(
    pot: &PiecewisePotential,
    t: f64,
    grid: &GridSpec,
) -> Result<(SymTridiag, WeightedMesh)> {
    let nodes = build_nodes(pot, t, grid)?;
    if t == 0.0 {
        assemble_weighted(&nodes, |_| 1.0)
    } else {
        assemble_weighted(&nodes, |x| (-pot.eval(x) / t).exp())
    }
}

/// Result of a spectral-gap solve.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub lambda1: f64,
    pub c_p: f64,
    /// Discrete gap eigenfunction: mean zero and unit norm against the
    /// normalized measure, nonnegative at the node nearest the right plateau
    /// endpoint.
    pub eigenfunction: Vec<f64>,
    /// Relative generalized eigen-residual `||K v - lambda M v|| / ||M v||`.
    pub residual: f64,
    pub mesh_size: usize,
}

const RESIDUAL_TOL: f64 = 1e-8;

/// Smallest nonzero eigenvalue of `K v = lambda M v` (M the lumped mass),
/// deflated against the weighted constant mode.
pub fn solve_gap(stiffness: &SymTridiag, mesh: &WeightedMesh, sign_node: usize) -> Result<SpectralResult> {
    let n = mesh.n();
    let sqrt_m: Vec<f64> = mesh.node_weights.iter().map(|&m| m.sqrt()).collect();
    // Similarity transform: A = M^{-1/2} K M^{-1/2}.
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        diag[i] = stiffness.diag[i] / (sqrt_m[i] * sqrt_m[i]);
    }
    for i in 0..n - 1 {
        off[i] = stiffness.off[i] / (sqrt_m[i] * sqrt_m[i + 1]);
    }
    let a = SymTridiag { diag, off };

    let lambda_bisect = a.eigenvalue_by_index(1);
    if !(lambda_bisect > 0.0) {
        return Err(SpectraError::NonPositiveGap(lambda_bisect));
    }

    // Constant mode in the transformed coordinates.
    let z_norm = sqrt_m.iter().map(|&s| s * s).sum::<f64>().sqrt();
    let z: Vec<f64> = sqrt_m.iter().map(|&s| s / z_norm).collect();
    let project = |x: &mut [f64]| {
        let dot: f64 = x.iter().zip(&z).map(|(&xi, &zi)| xi * zi).sum();
        for (xi, &zi) in x.iter_mut().zip(&z) {
            *xi -= dot * zi;
        }
    };

    // Inverse iteration with the bisection value as shift.
    let lu = TridiagLu::factor(&a, lambda_bisect * (1.0 + 1e-10));
    let mut x: Vec<f64> = (0..n)
        .map(|i| ((i as f64 + 0.5) * std::f64::consts::PI / n as f64).sin() + 1e-3 * ((i * 7919 % 101) as f64 - 50.0))
        .collect();
    project(&mut x);
    let mut y = vec![0.0; n];
    let mut ax = vec![0.0; n];
    let mut lambda = lambda_bisect;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..60 {
        iterations = it + 1;
        lu.solve(&x, &mut y);
        project(&mut y);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            break;
        }
        for v in y.iter_mut() {
            *v /= norm;
        }
        std::mem::swap(&mut x, &mut y);
        a.mul(&x, &mut ax);
        lambda = x.iter().zip(&ax).map(|(&xi, &ai)| xi * ai).sum::<f64>();
        let res2: f64 = ax
            .iter()
            .zip(&x)
            .map(|(&ai, &xi)| (ai - lambda * xi) * (ai - lambda * xi))
            .sum();
        residual = res2.sqrt() / lambda.abs().max(1e-300);
        if residual <= 1e-12 {
            break;
        }
    }

    // Back to nodal coordinates and the stated residual definition.
    let mut v: Vec<f64> = x.iter().zip(&sqrt_m).map(|(&xi, &s)| xi / s).collect();
    let z_total = mesh.total_mass();
    let mean = mesh.mean(&v);
    for vi in v.iter_mut() {
        *vi -= mean;
    }
    let nrm = mesh.norm_sq(&v).sqrt();
    for vi in v.iter_mut() {
        *vi /= nrm;
    }
    if v[sign_node] < 0.0 {
        for vi in v.iter_mut() {
            *vi = -*vi;
        }
    }
    let mut kv = vec![0.0; n];
    stiffness.mul(&v, &mut kv);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let mv = mesh.node_weights[i] * v[i];
        num += (kv[i] - lambda * mv) * (kv[i] - lambda * mv);
        den += mv * mv;
    }
    let _ = (residual, z_total);
    let residual = num.sqrt() / den.sqrt();
    if residual > RESIDUAL_TOL {
        return Err(SpectraError::EigenNoConvergence {
            residual,
            iterations,
        });
    }
    Ok(SpectralResult {
        lambda1: lambda,
        c_p: 1.0 / lambda,
        eigenfunction: v,
        residual,
        mesh_size: n,
    })
}

/// Poincaré constant of `mu_t` as the inverse spectral gap. `t = 0` solves
/// the discrete problem for the uniform measure on the plateau.
pub fn poincare_constant(
    pot: &PiecewisePotential,
    t: f64,
    grid: &GridSpec,
) -> Result<SpectralResult> {
    let (k, mesh) = assemble(pot, t, grid)?;
    let (_, b) = pot.plateau();
    let sign_node = nearest_node(&mesh.nodes, b);
    solve_gap(&k, &mesh, sign_node)
}

fn nearest_node(nodes: &[f64], x: f64) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, &xi) in nodes.iter().enumerate() {
        let d = (xi - x).abs();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

/// Exact Neumann baseline for the uniform measure on `[a, b]`:
/// `C_P = C_LS = (b-a)^2 / pi^2` with a sine eigenfunction.
pub struct NeumannBaseline {
    pub c_p: f64,
    midpoint: f64,
    width: f64,
}

impl NeumannBaseline {
    pub fn eigenfunction(&self, x: f64) -> f64 {
        (std::f64::consts::PI * (x - self.midpoint) / self.width).sin()
    }
}

pub fn neumann_baseline(a: f64, b: f64) -> NeumannBaseline {
    assert!(a < b, "neumann_baseline requires a < b");
    let width = b - a;
    NeumannBaseline {
        c_p: width * width / (std::f64::consts::PI * std::f64::consts::PI),
        midpoint: 0.5 * (a + b),
        width,
    }
}

/// The boundary-augmented surrogate constant: the largest Rayleigh quotient
///
/// `( int_a^b g^2 dx + m_a g(a)^2 + m_b g(b)^2 ) / int_a^b g'^2 dx`
///
/// over plateau functions with Lebesgue mean zero, where the endpoint point
/// masses are `m_side = sqrt(pi t / (2 kappa_side))`. Requires quadratic
/// wings.
pub fn surrogate_constant(pot: &PiecewisePotential, t: f64, grid: &GridSpec) -> Result<f64> {
    let (kappa_a, kappa_b) = pot.junction_curvatures();
    if !pot.left_wing().is_quadratic() || !pot.right_wing().is_quadratic() {
        return Err(SpectraError::NonQuadraticWings(
            pot.left_wing().exponent.max(pot.right_wing().exponent),
        ));
    }
    if t < 0.0 {
        return Err(SpectraError::NonPositiveTemperature(t));
    }
    let (a, b) = pot.plateau();
    if !(a < b) {
        return Err(SpectraError::InvalidPotential(
            "surrogate needs a nondegenerate plateau".into(),
        ));
    }
    let n = grid.n_plateau;
    let nodes: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let (k, mesh) = assemble_weighted(&nodes, |_| 1.0)?;

    // Point masses on top of the Lebesgue lumped mass.
    let pi = std::f64::consts::PI;
    let mut m_aug = mesh.node_weights.clone();
    m_aug[0] += (pi * t / (2.0 * kappa_a)).sqrt();
    m_aug[n] += (pi * t / (2.0 * kappa_b)).sqrt();

    let sqrt_m: Vec<f64> = m_aug.iter().map(|&m| m.sqrt()).collect();
    let nn = nodes.len();
    let mut diag = vec![0.0; nn];
    let mut off = vec![0.0; nn - 1];
    for i in 0..nn {
        diag[i] = k.diag[i] / (sqrt_m[i] * sqrt_m[i]);
    }
    for i in 0..nn - 1 {
        off[i] = k.off[i] / (sqrt_m[i] * sqrt_m[i + 1]);
    }
    let a_mat = SymTridiag { diag, off };

    // Mean-zero constraint with respect to the plateau (Lebesgue) measure:
    // c^T v = 0 with c the Lebesgue lumped mass, i.e. d^T x = 0 for
    // d = M^{-1/2} c in the transformed coordinates.
    let d: Vec<f64> = mesh
        .node_weights
        .iter()
        .zip(&sqrt_m)
        .map(|(&c, &s)| c / s)
        .collect();

    let lambda1 = a_mat.eigenvalue_by_index(1);
    if !(lambda1 > 0.0) {
        return Err(SpectraError::NonPositiveGap(lambda1));
    }

    // Secular function f(lambda) = d^T (A - lambda)^{-1} d, strictly
    // increasing between consecutive eigenvalues of A. The constrained
    // minimum is its unique root in (0, lambda1), or lambda1 itself when the
    // gap eigenvector already satisfies the constraint (symmetric case).
    let mut x = vec![0.0; nn];
    let f = |lambda: f64, x: &mut Vec<f64>| -> f64 {
        let lu = TridiagLu::factor(&a_mat, lambda);
        lu.solve(&d, x);
        d.iter().zip(x.iter()).map(|(&di, &xi)| di * xi).sum()
    };

    let hi = lambda1 * (1.0 - 1e-9);
    if f(hi, &mut x) < 0.0 {
        return Ok(1.0 / lambda1);
    }
    let mut lo = lambda1 * 1e-8;
    while f(lo, &mut x) > 0.0 {
        lo *= 0.1;
        if lo < 1e-300 {
            return Ok(1.0 / lambda1);
        }
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid, &mut x) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * mid.abs() {
            break;
        }
    }
    Ok(2.0 / (lo + hi))
}

/// Bakry-Émery bound `t / rho` when `rho = inf V'' > 0`, i.e. for a
/// degenerate plateau with quadratic wings; `None` otherwise.
pub fn bakry_emery_bound(pot: &PiecewisePotential, t: f64) -> Option<f64> {
    let rho = pot.min_curvature();
    if rho > 0.0 {
        Some(t / rho)
    } else {
        None
    }
}
