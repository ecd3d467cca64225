//! Monte Carlo cross-validation: Euler-Maruyama simulation of the
//! overdamped Langevin dynamics `dX = -V'(X)/t ds + sqrt(2) dB`, whose
//! invariant law is `mu_t`, and a spectral-gap estimate from observable
//! autocorrelation.
//!
//! ```
//! use spectra::langevin::{gap_estimate, simulate, Observable, SimConfig};
//! use spectra::potential::PiecewisePotential;
//!
//! let pot = PiecewisePotential::gaussian();
//! let cfg = SimConfig {
//!     t: 1.0,
//!     dt: 0.05,
//!     n_steps: 20_000,
//!     n_chains: 4,
//!     burn_in: 0,
//!     seed: 1,
//!     observable: Observable::Coordinate,
//! };
//! let est = gap_estimate(&simulate(&pot, &cfg)?)?;
//! assert!((est.c_p_hat - 1.0).abs() < 0.3);
//! # Ok::<(), spectra::SpectraError>(())
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SpectraError};
use crate::potential::PiecewisePotential;
use crate::quadrature::{build_nodes, gauss_legendre, GridSpec};

/// What the autocorrelation is measured on.
#[derive(Debug, Clone)]
pub enum Observable {
    /// The discrete gap eigenfunction, linearly interpolated between nodes
    /// and clamped outside the mesh. Slowest pure mode: best variance at a
    /// given budget.
    GapEigenfunction,
    /// The coordinate itself.
    Coordinate,
    /// Arbitrary nodal values on the mesh, interpolated the same way.
    CustomNodes(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub t: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub n_chains: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub observable: Observable,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t <= 0.0 {
            return Err(SpectraError::NonPositiveTemperature(self.t));
        }
        if self.dt <= 0.0 || self.n_steps == 0 || self.n_chains == 0 {
            return Err(SpectraError::Config(
                "dt, n_steps, n_chains must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ChainSummary {
    pub observable: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub mean_x: f64,
    pub variance_x: f64,
    /// Fraction of post-burn-in steps spent on the plateau.
    pub plateau_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct SimSummary {
    pub chains: Vec<ChainSummary>,
    pub dt: f64,
    pub t: f64,
    pub burn_in_used: usize,
    pub warnings: Vec<String>,
}

fn interpolate(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let n = nodes.len();
    if x <= nodes[0] {
        return values[0];
    }
    if x >= nodes[n - 1] {
        return values[n - 1];
    }
    let i = nodes.partition_point(|&v| v <= x).min(n - 1);
    let (x0, x1) = (nodes[i - 1], nodes[i]);
    let w = (x - x0) / (x1 - x0);
    values[i - 1] * (1.0 - w) + values[i] * w
}

/// Rough a-priori scale of `C_P(mu_t)`, used to size the burn-in.
fn c_p_hint(pot: &PiecewisePotential, t: f64) -> f64 {
    let width = pot.plateau_width();
    let plateau = width * width / (std::f64::consts::PI * std::f64::consts::PI);
    let kappa = pot.min_curvature();
    let wing = if kappa > 0.0 { t / kappa } else { t };
    plateau + wing.max(t)
}

/// Euler-Maruyama simulation; deterministic given the seed (one RNG stream
/// per chain).
pub fn simulate(pot: &PiecewisePotential, cfg: &SimConfig) -> Result<SimSummary> {
    cfg.validate()?;
    let grid = GridSpec::default();
    let nodes = build_nodes(pot, cfg.t, &grid)?;
    let (a, b) = pot.plateau();

    // Step-size stability over the truncated domain.
    let hess_sup = pot
        .eval_hess(nodes[0])
        .max(pot.eval_hess(nodes[nodes.len() - 1]))
        .max(pot.min_curvature().max(0.0));
    if cfg.dt * hess_sup / cfg.t > 0.1 + 1e-12 {
        return Err(SpectraError::Config(format!(
            "dt too large: dt sup|V''|/t = {} > 0.1",
            cfg.dt * hess_sup / cfg.t
        )));
    }

    let mut warnings = Vec::new();
    let burn_in_floor = (10.0 * c_p_hint(pot, cfg.t) / cfg.dt).ceil() as usize;
    let burn_in_used = if cfg.burn_in < burn_in_floor {
        warnings.push(format!(
            "burn-in raised from {} to {} steps (10 relaxation times)",
            cfg.burn_in, burn_in_floor
        ));
        burn_in_floor
    } else {
        cfg.burn_in
    };

    // Divergence guard: truncation radius plus ten layer widths.
    let alpha = pot
        .common_exponent()
        .unwrap_or(pot.left_wing().exponent.min(pot.right_wing().exponent));
    let layer = cfg.t.powf(1.0 / alpha);
    let lo_bound = nodes[0] - 10.0 * layer;
    let hi_bound = nodes[nodes.len() - 1] + 10.0 * layer;

    let eigen;
    let obs_values: Option<(&[f64], &[f64])> = match &cfg.observable {
        Observable::Coordinate => None,
        Observable::GapEigenfunction => {
            eigen = crate::spectral::poincare_constant(pot, cfg.t, &grid)?.eigenfunction;
            Some((&nodes, &eigen))
        }
        Observable::CustomNodes(v) => {
            if v.len() != nodes.len() {
                return Err(SpectraError::Config(format!(
                    "custom observable has {} values for {} nodes",
                    v.len(),
                    nodes.len()
                )));
            }
            Some((&nodes, v))
        }
    };

    let mut chains = Vec::with_capacity(cfg.n_chains);
    for chain in 0..cfg.n_chains {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chain as u64);
        let mut x = 0.5 * (a + b);
        let sigma = (2.0 * cfg.dt).sqrt();
        let mut series = Vec::with_capacity(cfg.n_steps);
        let mut sum_x = 0.0;
        let mut sum_x2 = 0.0;
        let mut on_plateau = 0usize;
        for step in 0..burn_in_used + cfg.n_steps {
            let noise: f64 = StandardNormal.sample(&mut rng);
            x += -pot.eval_grad(x) / cfg.t * cfg.dt + sigma * noise;
            if x < lo_bound || x > hi_bound {
                return Err(SpectraError::SimulationDiverged { x, step });
            }
            if step >= burn_in_used {
                let o = match obs_values {
                    None => x,
                    Some((ns, vs)) => interpolate(ns, vs, x),
                };
                series.push(o);
                sum_x += x;
                sum_x2 += x * x;
                if (a..=b).contains(&x) {
                    on_plateau += 1;
                }
            }
        }
        let n = cfg.n_steps as f64;
        let mean = series.iter().sum::<f64>() / n;
        let variance = series.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let mean_x = sum_x / n;
        chains.push(ChainSummary {
            observable: series,
            mean,
            variance,
            mean_x,
            variance_x: sum_x2 / n - mean_x * mean_x,
            plateau_fraction: on_plateau as f64 / n,
        });
    }
    Ok(SimSummary {
        chains,
        dt: cfg.dt,
        t: cfg.t,
        burn_in_used,
        warnings,
    })
}

/// Normalized autocorrelation of one series at the given lags.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0 = series.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let mut acf = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mut c = 0.0;
        for i in 0..n - lag {
            c += (series[i] - mean) * (series[i + lag] - mean);
        }
        acf.push(c / ((n - lag) as f64 * c0));
    }
    acf
}

#[derive(Debug, Clone)]
pub struct GapEstimate {
    pub c_p_hat: f64,
    pub stderr: f64,
    pub per_chain: Vec<f64>,
}

fn acf_at(series: &[f64], mean: f64, c0: f64, lag: usize) -> f64 {
    let n = series.len();
    let mut c = 0.0;
    for i in 0..n - lag {
        c += (series[i] - mean) * (series[i + lag] - mean);
    }
    c / ((n - lag) as f64 * c0)
}

fn fit_decay(lags: &[usize], acf: &[f64], dt: f64) -> Result<f64> {
    // Weighted least squares on log acf; the delta-method variance of
    // log acf scales like acf^{-2}, so weights acf^2 keep the noisy tail
    // from dominating.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for (&lag, &a) in lags.iter().zip(acf) {
        if a > 0.9 || a <= 0.0 {
            continue;
        }
        if a < 0.1 {
            break;
        }
        xs.push(lag as f64 * dt);
        ys.push(a.ln());
        ws.push(a * a);
    }
    if xs.len() < 3 {
        return Err(SpectraError::NoDecay);
    }
    let wsum: f64 = ws.iter().sum();
    let mx = xs.iter().zip(&ws).map(|(&x, &w)| w * x).sum::<f64>() / wsum;
    let my = ys.iter().zip(&ws).map(|(&y, &w)| w * y).sum::<f64>() / wsum;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..xs.len() {
        sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
        sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(SpectraError::NoDecay);
    }
    Ok(-1.0 / slope)
}

/// Spectral gap from the observable autocorrelation: the chain-averaged acf
/// is evaluated on a strided lag grid until it decays below 0.05, then
/// `log acf(lag)` is fitted to a line over lags with `acf in [0.1, 0.9]`;
/// the estimate is `-1/slope` in time units. The standard error comes from
/// the spread of per-chain fits over the same lags.
pub fn gap_estimate(summary: &SimSummary) -> Result<GapEstimate> {
    let k = summary.chains.len();
    let n = summary.chains[0].observable.len();
    let stats: Vec<(f64, f64)> = summary
        .chains
        .iter()
        .map(|c| {
            let mean = c.observable.iter().sum::<f64>() / n as f64;
            let c0 = c
                .observable
                .iter()
                .map(|&v| (v - mean) * (v - mean))
                .sum::<f64>()
                / n as f64;
            (mean, c0)
        })
        .collect();

    let pooled_at = |lag: usize| -> f64 {
        summary
            .chains
            .iter()
            .zip(&stats)
            .map(|(c, &(mean, c0))| acf_at(&c.observable, mean, c0, lag))
            .sum::<f64>()
            / k as f64
    };

    // Doubling probe for the decay length, then a ~256-point lag grid.
    let max_lag = n / 4;
    let mut decay_lag = 1;
    loop {
        if pooled_at(decay_lag) < 0.05 {
            break;
        }
        decay_lag *= 2;
        if decay_lag > max_lag {
            return Err(SpectraError::NoDecay);
        }
    }
    let stride = (decay_lag / 256).max(1);

    let mut lags = Vec::new();
    let mut pooled = Vec::new();
    let mut per_chain_acf: Vec<Vec<f64>> = vec![Vec::new(); k];
    let mut lag = 0;
    while lag <= decay_lag {
        let mut sum = 0.0;
        for (i, chain) in summary.chains.iter().enumerate() {
            let (mean, c0) = stats[i];
            let a = acf_at(&chain.observable, mean, c0, lag);
            per_chain_acf[i].push(a);
            sum += a;
        }
        lags.push(lag);
        pooled.push(sum / k as f64);
        if pooled[pooled.len() - 1] < 0.05 {
            break;
        }
        lag += stride;
    }

    let c_p_hat = fit_decay(&lags, &pooled, summary.dt)?;
    let per_chain: Vec<f64> = per_chain_acf
        .iter()
        .map(|acf| fit_decay(&lags, acf, summary.dt))
        .collect::<Result<_>>()?;
    let kf = k as f64;
    let mean = per_chain.iter().sum::<f64>() / kf;
    let var = per_chain.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (kf - 1.0).max(1.0);
    Ok(GapEstimate {
        c_p_hat,
        stderr: (var / kf).sqrt(),
        per_chain,
    })
}

/// Writes `(chain, lag, autocorrelation)` rows as CSV.
pub fn export_autocorrelation(
    summary: &SimSummary,
    max_lag: usize,
    out: &mut dyn std::io::Write,
) -> Result<()> {
    writeln!(out, "chain,lag,autocorrelation")?;
    for (i, chain) in summary.chains.iter().enumerate() {
        let acf = autocorrelation(&chain.observable, max_lag.min(chain.observable.len() - 1));
        for (lag, a) in acf.iter().enumerate() {
            writeln!(out, "{i},{lag},{}", crate::format_g17(*a))?;
        }
    }
    Ok(())
}

/// Chi-square goodness-of-fit of a trajectory histogram against the cell
/// masses of `mu_t`, thinned to roughly independent samples. Returns the
/// p-value.
pub fn equilibrium_chi_square(
    pot: &PiecewisePotential,
    summary: &SimSummary,
    positions: &[f64],
    n_bins: usize,
) -> Result<f64> {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let t = summary.t;
    let grid = GridSpec::default();
    let nodes = build_nodes(pot, t, &grid)?;
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    let edges: Vec<f64> = (0..=n_bins)
        .map(|i| lo + (hi - lo) * i as f64 / n_bins as f64)
        .collect();
    let mut expected: Vec<f64> = edges
        .windows(2)
        .map(|w| gauss_legendre(|x| (-pot.eval(x) / t).exp(), w[0], w[1]))
        .collect();
    let z: f64 = expected.iter().sum();
    for e in expected.iter_mut() {
        *e /= z;
    }

    // Thin to ~independent samples.
    let stride = ((3.0 * c_p_hint(pot, t) / summary.dt).ceil() as usize).max(1);
    let samples: Vec<f64> = positions.iter().copied().step_by(stride).collect();
    let n = samples.len() as f64;
    let mut counts = vec![0usize; n_bins];
    for &x in &samples {
        let i = (((x - lo) / (hi - lo) * n_bins as f64) as usize).min(n_bins - 1);
        counts[i] += 1;
    }
    let mut chi2 = 0.0;
    let mut dof = 0usize;
    for (c, e) in counts.iter().zip(&expected) {
        let exp = e * n;
        if exp < 5.0 {
            continue;
        }
        chi2 += (*c as f64 - exp) * (*c as f64 - exp) / exp;
        dof += 1;
    }
    if dof < 2 {
        return Err(SpectraError::Config("too few usable histogram bins".into()));
    }
    let dist = ChiSquared::new((dof - 1) as f64)
        .map_err(|e| SpectraError::Config(e.to_string()))?;
    Ok(1.0 - dist.cdf(chi2))
}
