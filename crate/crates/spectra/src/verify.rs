//! The acceptance suite: every headline result reproduced as a small-t
//! numerical check with explicit tolerances. Shared by the `verify` CLI
//! command and the integration tests; each check returns a
//! [`CriterionResult`] with one PASS/FAIL verdict and the measured values.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{
    lsi_expansion_1d, poincare_expansion_1d, theorem_1d_coefficient, theorem_cs_limits,
};
use crate::entropy::{lsi_constant, LsiOpts};
use crate::error::Result;
use crate::langevin::{gap_estimate, simulate, Observable, SimConfig};
use crate::potential::{PiecewisePotential, WingSpec};
use crate::quadrature::{
    boundary_mean_control_check, partition_function, variance, z_expansion, GridSpec,
};
use crate::spectral::{poincare_constant, surrogate_constant};
use crate::sweep::{log_grid, power_fit, refutation_report, run_sweep, Quantities, Quantity,
    SweepOpts, Verdict};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// One line per individual check, prefixed `ok:` or `FAILED:`.
    pub details: Vec<String>,
    pub elapsed: Duration,
}

impl CriterionResult {
    /// The one-line verdict printed by `verify`.
    pub fn summary_line(&self) -> String {
        format!(
            "{} {:>2}. {} [{:.1}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Accumulates individual checks inside one criterion.
struct Checks {
    details: Vec<String>,
    all_ok: bool,
}

impl Checks {
    fn new() -> Self {
        Checks {
            details: Vec::new(),
            all_ok: true,
        }
    }

    fn claim(&mut self, ok: bool, what: String) {
        if ok {
            self.details.push(format!("ok: {what}"));
        } else {
            self.details.push(format!("FAILED: {what}"));
            self.all_ok = false;
        }
    }

    fn note(&mut self, what: String) {
        self.details.push(format!("note: {what}"));
    }
}

fn run(
    id: usize,
    name: &'static str,
    body: impl FnOnce(&mut Checks) -> Result<()>,
) -> CriterionResult {
    let start = Instant::now();
    let mut checks = Checks::new();
    if let Err(e) = body(&mut checks) {
        checks.claim(false, format!("aborted: {e}"));
    }
    CriterionResult {
        id,
        name,
        passed: checks.all_ok,
        details: checks.details,
        elapsed: start.elapsed(),
    }
}

/// Runs every check; statistical (sampling-based) ones only when asked.
pub fn run_all(include_statistical: bool) -> Vec<CriterionResult> {
    let mut out = vec![
        uniform_segment_baseline(),
        gaussian_limit(),
        symmetric_poincare_rate(),
        asymmetric_poincare_rate(),
        quartic_poincare_rate(),
        lsi_rate(),
        conjecture_refutation(),
        consistency_identities(),
        partition_expansion(),
        property_suite(),
    ];
    if include_statistical {
        out.push(langevin_cross_check());
    }
    out
}

/// Uniform measure on `[-pi/2, pi/2]`: both constants equal 1 exactly.
pub fn uniform_segment_baseline() -> CriterionResult {
    run(1, "uniform segment baseline", |c| {
        let pot = PiecewisePotential::counterexample();
        let grid = GridSpec::default().with_n_plateau(2000);
        let cp = poincare_constant(&pot, 0.0, &grid)?.c_p;
        c.claim(
            (cp - 1.0).abs() < 1e-4,
            format!("uniform c_p = {cp}, |c_p - 1| < 1e-4"),
        );
        let res = lsi_constant(&pot, 0.0, &grid, &LsiOpts::default())?;
        c.claim(
            (res.lower_bound - 1.0).abs() < 1e-3,
            format!("c_ls lower = {}, within 1e-3 of 1", res.lower_bound),
        );
        c.claim(
            res.lower_bound <= res.upper_bound * (1.0 + 1e-12),
            format!(
                "c_ls lower {} does not exceed upper bound {}",
                res.lower_bound, res.upper_bound
            ),
        );
        Ok(())
    })
}

/// `V = x^2/2`: both constants converge to `t` itself (strongly convex
/// limit). Uses a near-uniform far-field mesh; the default geometric
/// coarsening leaves a ~0.8% bias for measures without a plateau.
pub fn gaussian_limit() -> CriterionResult {
    run(2, "strongly convex scaling, V = x^2/2", |c| {
        let pot = PiecewisePotential::gaussian();
        let grid = GridSpec {
            layer_cells_per_scale: 24,
            refinement_ratio: 1.05,
            ..GridSpec::default()
        };
        let (limit_p, _) = theorem_cs_limits(&pot)?;
        c.claim(
            (limit_p - 1.0).abs() < 1e-12,
            format!("predicted c_p/t limit = {limit_p}"),
        );
        for &t in &[1.0, 0.1, 0.01] {
            let cp = poincare_constant(&pot, t, &grid)?.c_p;
            c.claim(
                (cp / t - 1.0).abs() < 1e-3,
                format!("t = {t}: c_p/t = {}, within 1e-3 of 1", cp / t),
            );
            let res = lsi_constant(&pot, t, &grid, &LsiOpts::default())?;
            c.claim(
                (res.c_ls / t - 1.0).abs() < 0.02,
                format!("t = {t}: c_ls/t = {}, within 2% of 1", res.c_ls / t),
            );
        }
        Ok(())
    })
}

fn fitted_rate(
    c: &mut Checks,
    pot: &PiecewisePotential,
    t_hi: f64,
    t_lo: f64,
    expected_exponent: f64,
    exponent_tol: f64,
    expected_coefficient: f64,
    coefficient_rel_tol: f64,
) -> Result<()> {
    let grid = log_grid(t_hi, t_lo, 8)?;
    let quantities = Quantities {
        lsi: false,
        conjecture: false,
        ..Quantities::default()
    };
    let table = run_sweep(pot, &grid, quantities, &GridSpec::default(), &SweepOpts::default())?;
    let fit = power_fit(&table, Quantity::Poincare, table.c0)?;
    c.note(format!(
        "fit window t = {t_hi:.0e}..{t_lo:.0e}, below the second-order term of c_p(t)"
    ));
    c.claim(
        (fit.exponent - expected_exponent).abs() < exponent_tol,
        format!(
            "fitted exponent {} = {expected_exponent} +- {exponent_tol}",
            fit.exponent
        ),
    );
    c.claim(
        (fit.coefficient - expected_coefficient).abs() / expected_coefficient
            < coefficient_rel_tol,
        format!(
            "fitted coefficient {} within {:.0}% of {expected_coefficient}",
            fit.coefficient,
            100.0 * coefficient_rel_tol
        ),
    );
    Ok(())
}

/// `c_p(t) - 1 ~ sqrt(8t/pi)` for the symmetric unit-curvature plateau.
pub fn symmetric_poincare_rate() -> CriterionResult {
    run(3, "square-root rate of c_p, symmetric wings", |c| {
        let pot = PiecewisePotential::counterexample();
        let coeff = (8.0 / std::f64::consts::PI).sqrt();
        fitted_rate(c, &pot, 1e-3, 1e-6, 0.5, 0.02, coeff, 0.03)
    })
}

/// Curvatures 1 and 4: coefficient `(1 + 1/2) sqrt(2/pi)`.
pub fn asymmetric_poincare_rate() -> CriterionResult {
    run(4, "square-root rate of c_p, asymmetric wings", |c| {
        let pot = PiecewisePotential::asymmetric(1.0, 4.0)?;
        let coeff = theorem_1d_coefficient(1.0, 4.0);
        c.claim(
            (coeff - 1.5 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12,
            format!("predicted coefficient = {coeff}"),
        );
        fitted_rate(c, &pot, 1e-3, 1e-6, 0.5, 0.02, coeff, 0.03)
    })
}

/// Quartic wings: exponent 1/4, coefficient from the first-order expansion.
pub fn quartic_poincare_rate() -> CriterionResult {
    run(5, "quarter-power rate of c_p, quartic wings", |c| {
        let pot = PiecewisePotential::quartic();
        let coeff = poincare_expansion_1d(&pot)?.coefficient;
        c.note(format!("predicted coefficient = {coeff}"));
        fitted_rate(c, &pot, 1e-6, 1e-10, 0.25, 0.02, coeff, 0.05)
    })
}

/// Certified log-Sobolev lower bounds grow like `sqrt(8t/pi)` above the
/// flat-measure constant.
pub fn lsi_rate() -> CriterionResult {
    run(6, "square-root rate of the log-Sobolev lower bound", |c| {
        let pot = PiecewisePotential::counterexample();
        let grid = GridSpec::default();
        let opts = LsiOpts::default();
        let target = (8.0 / std::f64::consts::PI).sqrt();
        let mut slopes = Vec::new();
        for &t in &[1e-3, 1e-4, 1e-5] {
            let res = lsi_constant(&pot, t, &grid, &opts)?;
            slopes.push((t, (res.lower_bound - 1.0) / t.sqrt()));
        }
        let at_1e4 = slopes[1].1;
        c.claim(
            (1.52..=1.63).contains(&at_1e4),
            format!("(c_ls_lower - 1)/sqrt(t) = {at_1e4} at t = 1e-4, in [1.52, 1.63]"),
        );
        let gaps: Vec<f64> = slopes.iter().map(|&(_, s)| (s - target).abs()).collect();
        c.claim(
            gaps[0] > gaps[1] && gaps[1] > gaps[2],
            format!(
                "distance to sqrt(8/pi) decreases along t = 1e-3, 1e-4, 1e-5: {:?} (slopes {:?})",
                gaps, slopes
            ),
        );
        Ok(())
    })
}

/// The linear-in-t prediction `c_ls(0) + 2 C_PL t` falls ever further below
/// the certified lower bound as t decreases.
pub fn conjecture_refutation() -> CriterionResult {
    run(7, "refutation of the linear log-Sobolev rate", |c| {
        let pot = PiecewisePotential::counterexample();
        let grid = log_grid(1e-3, 1e-6, 6)?;
        let opts = SweepOpts {
            skip_noise_estimate: true,
            ..SweepOpts::default()
        };
        let table = run_sweep(&pot, &grid, Quantities::default(), &GridSpec::default(), &opts)?;
        let report = refutation_report(&pot, &table)?;
        c.claim(
            report.verdict == Verdict::Refuted,
            format!("verdict = {:?}", report.verdict),
        );
        c.claim(
            report.ratios.iter().all(|&(_, r)| r > 5.0),
            format!("all excess/prediction ratios above 5: {:?}", report.ratios),
        );
        let sorted_desc: Vec<(f64, f64)> = {
            let mut r = report.ratios.clone();
            r.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            r
        };
        let monotone = sorted_desc.windows(2).all(|w| w[1].1 > w[0].1);
        c.claim(
            monotone,
            format!("ratio increases as t decreases: {:?}", sorted_desc),
        );
        Ok(())
    })
}

/// Closed-form cross-checks between independently derived formulas.
pub fn consistency_identities() -> CriterionResult {
    run(8, "closed-form consistency identities", |c| {
        let tol = 1e-12;
        let pots = [
            ("symmetric", PiecewisePotential::counterexample()),
            ("asymmetric(1,4)", PiecewisePotential::asymmetric(1.0, 4.0)?),
            ("asymmetric(0.5,9)", PiecewisePotential::asymmetric(0.5, 9.0)?),
        ];
        for (name, pot) in &pots {
            let (ka, kb) = pot.junction_curvatures();
            let model = poincare_expansion_1d(pot)?;
            let direct = theorem_1d_coefficient(ka, kb);
            c.claim(
                (model.coefficient - direct).abs() < tol * direct,
                format!(
                    "{name}: expansion coefficient {} matches curvature formula {direct}",
                    model.coefficient
                ),
            );
            let ls = lsi_expansion_1d(pot)?;
            c.claim(
                (ls.coefficient - model.coefficient).abs() < tol * direct,
                format!(
                    "{name}: log-Sobolev coefficient {} equals Poincare coefficient",
                    ls.coefficient
                ),
            );
        }
        let (gamma, _) = z_expansion(&PiecewisePotential::counterexample())?;
        let expected = (2.0 * std::f64::consts::PI).sqrt();
        c.claim(
            (gamma - expected).abs() < tol,
            format!("partition expansion gamma = {gamma}, expected sqrt(2 pi) = {expected}"),
        );
        Ok(())
    })
}

/// `Z_t = (b-a) + gamma t^{1/alpha} + o(t^{1/alpha})`: the scaled remainder
/// shrinks with t. For pure power wings the first-order expansion is exact
/// (each wing integral is a Gamma integral), so the remainder is quadrature
/// noise; series wings carry a genuine next-order term.
pub fn partition_expansion() -> CriterionResult {
    run(9, "partition function boundary-layer expansion", |c| {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let with_correction = |lead: (f64, f64), next: (f64, f64)| -> Result<PiecewisePotential> {
            let wing = WingSpec::series(vec![lead, next])?;
            PiecewisePotential::new(-half_pi, half_pi, wing.clone(), wing)
        };
        let series_cases = [
            ("quadratic + cubic term", with_correction((0.5, 2.0), (1.0, 3.0))?),
            ("quartic + sextic term", with_correction((1.0, 4.0), (1.0, 6.0))?),
        ];
        let ts = log_grid(1e-2, 1e-6, 5)?;
        let grid = GridSpec::default();
        for (name, pot) in &series_cases {
            let (gamma, inv_alpha) = z_expansion(pot)?;
            let width = pot.plateau_width();
            let rem: Vec<f64> = ts
                .iter()
                .map(|&t| {
                    let z = partition_function(pot, t, &grid)?;
                    Ok((z - width - gamma * t.powf(inv_alpha)).abs() / t.powf(inv_alpha))
                })
                .collect::<Result<_>>()?;
            c.claim(
                rem.windows(2).all(|w| w[1] < w[0]),
                format!("{name}: scaled remainder decreases over t = 1e-2..1e-6: {rem:?}"),
            );
        }
        let pure_cases = [
            ("pure quadratic", PiecewisePotential::counterexample()),
            ("pure quartic", PiecewisePotential::quartic()),
        ];
        for (name, pot) in &pure_cases {
            let (gamma, inv_alpha) = z_expansion(pot)?;
            let width = pot.plateau_width();
            for &t in &ts {
                let z = partition_function(pot, t, &grid)?;
                let rem = (z - width - gamma * t.powf(inv_alpha)).abs() / t.powf(inv_alpha);
                c.claim(
                    rem < 1e-8,
                    format!("{name}, t = {t:.0e}: expansion exact up to quadrature ({rem:.2e})"),
                );
            }
        }
        Ok(())
    })
}

/// Invariants that must hold on everything computed: eigen residuals,
/// ordering of the constants, the half-line mean-control inequality, and
/// surrogate accuracy `|C_t - c_p| = o(sqrt t)`.
pub fn property_suite() -> CriterionResult {
    run(10, "cross-cutting invariants", |c| {
        let grid = GridSpec::default();

        let residual_cases = [
            (PiecewisePotential::counterexample(), 1e-2),
            (PiecewisePotential::counterexample(), 1e-4),
            (PiecewisePotential::gaussian(), 0.1),
            (PiecewisePotential::quartic(), 1e-4),
        ];
        let mut worst = 0.0_f64;
        for (pot, t) in &residual_cases {
            worst = worst.max(poincare_constant(pot, *t, &grid)?.residual);
        }
        c.claim(
            worst <= 1e-8,
            format!("eigenpair residuals at most {worst:.2e} (tolerance 1e-8)"),
        );

        let pot = PiecewisePotential::counterexample();
        let ts = log_grid(1e-2, 1e-4, 5)?;
        let opts = SweepOpts {
            skip_noise_estimate: true,
            ..SweepOpts::default()
        };
        let table = run_sweep(&pot, &ts, Quantities::default(), &grid, &opts)?;
        let mut order_ok = true;
        let mut var_ok = true;
        for row in &table.rows {
            let (cp, lo) = (row.c_p.unwrap(), row.c_ls_lower.unwrap());
            if lo < cp {
                order_ok = false;
            }
            if variance(&pot, row.t, &grid)? > cp * (1.0 + 1e-10) {
                var_ok = false;
            }
        }
        c.claim(order_ok, "c_ls lower bound >= c_p on every sweep row".into());
        c.claim(var_ok, "variance <= c_p on every sweep row".into());

        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        let pairs = [
            (1e-1, 0.1),
            (1e-1, 0.5),
            (1e-3, 0.1),
            (1e-3, 0.5),
            (1e-5, 0.1),
            (1e-5, 0.5),
        ];
        let mut mean_control_ok = 0usize;
        let total = 200 * pairs.len();
        for _ in 0..200 {
            let coeffs: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a);
            let gp = |x: f64| {
                coeffs[1..]
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| (k + 1) as f64 * a * x.powi(k as i32))
                    .sum::<f64>()
            };
            for &(t, eps) in &pairs {
                if boundary_mean_control_check(g, gp, t, eps)?.holds {
                    mean_control_ok += 1;
                }
            }
        }
        c.claim(
            mean_control_ok == total,
            format!(
                "half-line mean-control inequality holds for {mean_control_ok}/{total} \
                 random degree-5 polynomials"
            ),
        );

        let pot = PiecewisePotential::counterexample();
        let devs: Vec<f64> = log_grid(1e-2, 1e-5, 4)?
            .iter()
            .map(|&t| {
                let ct = surrogate_constant(&pot, t, &grid)?;
                let cp = poincare_constant(&pot, t, &grid)?.c_p;
                Ok((ct - cp).abs() / t.sqrt())
            })
            .collect::<Result<_>>()?;
        c.claim(
            devs.windows(2).all(|w| w[1] < w[0]),
            format!("surrogate gap |C_t - c_p|/sqrt(t) decreasing over t = 1e-2..1e-5: {devs:?}"),
        );
        Ok(())
    })
}

/// Statistical: sampled autocorrelation decay reproduces the spectral c_p.
pub fn langevin_cross_check() -> CriterionResult {
    run(11, "Langevin sampling cross-check (statistical)", |c| {
        let grid = GridSpec {
            layer_cells_per_scale: 24,
            refinement_ratio: 1.05,
            ..GridSpec::default()
        };
        let ou = PiecewisePotential::gaussian();
        let cfg = SimConfig {
            t: 1.0,
            dt: 0.05,
            n_steps: 60_000,
            n_chains: 8,
            burn_in: 0,
            seed: 42,
            observable: Observable::Coordinate,
        };
        let est = gap_estimate(&simulate(&ou, &cfg)?)?;
        let cp = poincare_constant(&ou, 1.0, &grid)?.c_p;
        c.claim(
            (est.c_p_hat - cp).abs() / cp < 0.1,
            format!(
                "Ornstein-Uhlenbeck: sampled {} +- {} vs spectral {cp}, within 10%",
                est.c_p_hat, est.stderr
            ),
        );

        let pot = PiecewisePotential::counterexample();
        let cfg = SimConfig {
            t: 1e-2,
            dt: 1e-3,
            n_steps: 300_000,
            n_chains: 8,
            burn_in: 0,
            seed: 11,
            observable: Observable::GapEigenfunction,
        };
        let coarse = gap_estimate(&simulate(&pot, &cfg)?)?;
        let cp = poincare_constant(&pot, 1e-2, &GridSpec::default())?.c_p;
        c.claim(
            (coarse.c_p_hat - cp).abs() / cp < 0.1,
            format!(
                "plateau potential at t = 1e-2: sampled {} +- {} vs spectral {cp}, within 10%",
                coarse.c_p_hat, coarse.stderr
            ),
        );

        let mut halved = cfg.clone();
        halved.dt /= 2.0;
        halved.n_steps *= 2;
        let fine = gap_estimate(&simulate(&pot, &halved)?)?;
        let se = (coarse.stderr * coarse.stderr + fine.stderr * fine.stderr).sqrt();
        c.claim(
            (coarse.c_p_hat - fine.c_p_hat).abs() < se,
            format!(
                "halving dt moves the estimate by {:.3e}, below the stderr {:.3e}",
                (coarse.c_p_hat - fine.c_p_hat).abs(),
                se
            ),
        );
        Ok(())
    })
}
