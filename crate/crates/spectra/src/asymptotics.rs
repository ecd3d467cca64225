//! Closed-form small-temperature expansions: the Poincaré and log-Sobolev
//! slopes for plateau potentials, the partition expansion, the conjectured
//! linear expansion, and the counterexample's square-root lower bound.
//!
//! The general Poincaré slope specializes in 1D to a single Neumann
//! eigenfunction evaluation: with `f` the gap eigenfunction of the segment
//! normalized to `int f'^2 = 1`, its squared boundary value is
//! `2(b-a)/pi^2` at both endpoints and its boundary derivative vanishes, so
//! the boundary-gradient correction term is identically zero.
//!
//! ```
//! use spectra::asymptotics::{conjecture_prediction, counterexample_lower_bound};
//! use spectra::potential::PiecewisePotential;
//!
//! let pot = PiecewisePotential::counterexample();
//! let t = 1e-4;
//! let lower = counterexample_lower_bound(t);
//! let linear = conjecture_prediction(&pot, t)?;
//! // sqrt(8t/pi) dwarfs the conjectured linear excess 2 * C_PL * t.
//! assert!((lower - 1.0) / (linear - 1.0) > 100.0);
//! # Ok::<(), spectra::SpectraError>(())
//! ```

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Result, SpectraError};
use crate::potential::{pl_constant, PiecewisePotential};
use crate::quadrature::z_expansion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Poincare,
    Lsi,
    Partition,
    Conjecture,
    CounterexampleLower,
}

/// A one-term power expansion `c0 + coefficient * t^exponent`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticModel {
    pub kind: ModelKind,
    pub c0: f64,
    pub coefficient: f64,
    pub exponent: f64,
}

impl AsymptoticModel {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.c0 + self.coefficient * t.powf(self.exponent)
    }
}

/// Limits of `C_LS(mu_t)/t` and `C_P(mu_t)/t` for a potential with a unique
/// minimizer: `(2 C_PL, 1/V''(x0))`.
pub fn theorem_cs_limits(pot: &PiecewisePotential) -> Result<(f64, f64)> {
    if !pot.is_degenerate() {
        return Err(SpectraError::InvalidPotential(
            "potential has a plateau of minimizers; use the plateau expansions".into(),
        ));
    }
    let pl = pl_constant(pot, f64::INFINITY, 4096)?;
    let (kappa_a, kappa_b) = pot.junction_curvatures();
    let hess = kappa_a.min(kappa_b);
    if !(hess > 0.0) {
        return Err(SpectraError::InvalidPotential(
            "vanishing curvature at the minimizer".into(),
        ));
    }
    Ok((2.0 * pl.value, 1.0 / hess))
}

/// The conjectured expansion `C_LS(mu_0) + 2 C_PL t`. For plateau potentials
/// `C_LS(mu_0) = (b-a)^2 / pi^2`.
pub fn conjecture_prediction(pot: &PiecewisePotential, t: f64) -> Result<f64> {
    let pl = pl_constant(pot, f64::INFINITY, 4096)?;
    let width = pot.plateau_width();
    let c0 = width * width / (std::f64::consts::PI * std::f64::consts::PI);
    Ok(c0 + 2.0 * pl.value * t)
}

/// The refuting lower bound `1 + sqrt(8t/pi)` for the unit-curvature plateau
/// potential on a width-pi plateau.
pub fn counterexample_lower_bound(t: f64) -> f64 {
    1.0 + (8.0 * t / std::f64::consts::PI).sqrt()
}

/// Poincaré slope for quadratic wings with junction curvatures
/// `kappa_a, kappa_b` on a width-pi plateau, per unit `(b-a) = pi`:
/// `(kappa_a^{-1/2} + kappa_b^{-1/2}) sqrt(2/pi)`.
pub fn theorem_1d_coefficient(kappa_a: f64, kappa_b: f64) -> f64 {
    assert!(kappa_a > 0.0 && kappa_b > 0.0, "curvatures must be positive");
    (1.0 / kappa_a.sqrt() + 1.0 / kappa_b.sqrt()) * (2.0 / std::f64::consts::PI).sqrt()
}

/// The Poincaré expansion `C_P(mu_t) = (b-a)^2/pi^2 + Lambda t^{1/alpha}`
/// with `Lambda = 2(b-a) pi^{-2} C_alpha (a_left^{1/alpha} +
/// a_right^{1/alpha})`, `C_alpha = Gamma(1/alpha)/alpha` and `a_side` the
/// boundary growth coefficient of the wing.
pub fn poincare_expansion_1d(pot: &PiecewisePotential) -> Result<AsymptoticModel> {
    let alpha = pot.common_exponent()?;
    let width = pot.plateau_width();
    if width <= 0.0 {
        return Err(SpectraError::InvalidPotential(
            "expansion needs a nondegenerate plateau".into(),
        ));
    }
    let pi = std::f64::consts::PI;
    let c_alpha = gamma(1.0 / alpha) / alpha;
    let coeff_sum = pot.left_wing().boundary_coefficient().powf(1.0 / alpha)
        + pot.right_wing().boundary_coefficient().powf(1.0 / alpha);
    Ok(AsymptoticModel {
        kind: ModelKind::Poincare,
        c0: width * width / (pi * pi),
        coefficient: 2.0 * width / (pi * pi) * c_alpha * coeff_sum,
        exponent: 1.0 / alpha,
    })
}

/// The log-Sobolev expansion for quadratic wings:
/// `C_LS(mu_t) = (b-a)^2/pi^2 + sqrt(2)(b-a) pi^{-3/2}
/// (kappa_a^{-1/2} + kappa_b^{-1/2}) sqrt(t)`.
pub fn lsi_expansion_1d(pot: &PiecewisePotential) -> Result<AsymptoticModel> {
    let (kappa_a, kappa_b) = pot.junction_curvatures();
    if !pot.left_wing().is_quadratic() || !pot.right_wing().is_quadratic() {
        return Err(SpectraError::NonQuadraticWings(
            pot.left_wing().exponent.max(pot.right_wing().exponent),
        ));
    }
    let width = pot.plateau_width();
    if width <= 0.0 {
        return Err(SpectraError::InvalidPotential(
            "expansion needs a nondegenerate plateau".into(),
        ));
    }
    let pi = std::f64::consts::PI;
    Ok(AsymptoticModel {
        kind: ModelKind::Lsi,
        c0: width * width / (pi * pi),
        coefficient: 2.0_f64.sqrt() * width * pi.powf(-1.5)
            * (1.0 / kappa_a.sqrt() + 1.0 / kappa_b.sqrt()),
        exponent: 0.5,
    })
}

/// Partition expansion `Z_t = (b-a) + gamma t^{1/alpha}` as a model.
pub fn z_expansion_model(pot: &PiecewisePotential) -> Result<AsymptoticModel> {
    let (gamma, exponent) = z_expansion(pot)?;
    Ok(AsymptoticModel {
        kind: ModelKind::Partition,
        c0: pot.plateau_width(),
        coefficient: gamma,
        exponent,
    })
}

/// The conjecture as a model (linear in t).
pub fn conjecture_model(pot: &PiecewisePotential) -> Result<AsymptoticModel> {
    let pl = pl_constant(pot, f64::INFINITY, 4096)?;
    let width = pot.plateau_width();
    Ok(AsymptoticModel {
        kind: ModelKind::Conjecture,
        c0: width * width / (std::f64::consts::PI * std::f64::consts::PI),
        coefficient: 2.0 * pl.value,
        exponent: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::WingSpec;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn cs_limits_examples() {
        // V = x^2/2: C_PL = 1/2, V'' = 1.
        let g = PiecewisePotential::gaussian();
        let (lsi, p) = theorem_cs_limits(&g).unwrap();
        assert!((lsi - 1.0).abs() < 1e-9);
        assert!((p - 1.0).abs() < 1e-12);

        // V = x^2: C_PL = 1/4, V'' = 2.
        let sharp = PiecewisePotential::new(
            0.0,
            0.0,
            WingSpec::quadratic(2.0),
            WingSpec::quadratic(2.0),
        )
        .unwrap();
        let (lsi, p) = theorem_cs_limits(&sharp).unwrap();
        assert!((lsi - 0.5).abs() < 1e-9);
        assert!((p - 0.5).abs() < 1e-12);

        // Homogeneity: V = 2x^2 vs x^2/2, both slopes scale by 1/4.
        let stiff = PiecewisePotential::new(
            0.0,
            0.0,
            WingSpec::quadratic(4.0),
            WingSpec::quadratic(4.0),
        )
        .unwrap();
        let (lsi4, p4) = theorem_cs_limits(&stiff).unwrap();
        assert!((lsi4 - lsi * 0.5).abs() < 1e-9);
        assert!((p4 - p * 0.5).abs() < 1e-12);
    }

    #[test]
    fn cs_limits_reject_plateau() {
        let cx = PiecewisePotential::counterexample();
        assert!(theorem_cs_limits(&cx).is_err());
    }

    #[test]
    fn conjecture_values() {
        let cx = PiecewisePotential::counterexample();
        let p = conjecture_prediction(&cx, 1e-3).unwrap();
        assert!((p - 1.001).abs() < 1e-9, "p = {p}");
        let p0 = conjecture_prediction(&cx, 0.0).unwrap();
        assert!((p0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjecture_refuted_at_small_t() {
        // Measured growth sqrt(8/pi) sqrt(t) dwarfs the predicted 2 C_PL t.
        let t = 1e-3;
        let measured = counterexample_lower_bound(t) - 1.0;
        let predicted = conjecture_prediction(&PiecewisePotential::counterexample(), t).unwrap() - 1.0;
        assert!((measured - 0.050463).abs() < 1e-5);
        assert!(measured / predicted > 50.0);
    }

    #[test]
    fn lower_bound_values() {
        assert_eq!(counterexample_lower_bound(0.0), 1.0);
        assert!((counterexample_lower_bound(PI / 8.0) - 2.0).abs() < 1e-15);
        assert!((counterexample_lower_bound(1e-4) - 1.015_957_7).abs() < 1e-6);
    }

    #[test]
    fn coefficient_1d_values() {
        let c = theorem_1d_coefficient(1.0, 1.0);
        assert!((c - (8.0 / PI).sqrt()).abs() < 1e-14);
        let c = theorem_1d_coefficient(1.0, 4.0);
        assert!((c - 1.5 * (2.0 / PI).sqrt()).abs() < 1e-14);
        // Decreasing in kappa, homogeneous of degree -1/2.
        assert!(theorem_1d_coefficient(2.0, 2.0) < theorem_1d_coefficient(1.0, 1.0));
        let ratio = theorem_1d_coefficient(4.0, 4.0) / theorem_1d_coefficient(1.0, 1.0);
        assert!((ratio - 0.5).abs() < 1e-14);
        assert!(theorem_1d_coefficient(1e12, 1e12) < 1e-5);
    }

    #[test]
    fn poincare_expansion_values() {
        let cx = PiecewisePotential::counterexample();
        let m = poincare_expansion_1d(&cx).unwrap();
        assert!((m.c0 - 1.0).abs() < 1e-14);
        assert_eq!(m.exponent, 0.5);
        assert!((m.coefficient - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-12);

        let q = PiecewisePotential::quartic();
        let m = poincare_expansion_1d(&q).unwrap();
        assert_eq!(m.exponent, 0.25);
        // 2 / pi * (Gamma(1/4)/4) * 2.
        let c4 = gamma(0.25) / 4.0;
        assert!((c4 - 0.906_402_477_055_477).abs() < 1e-12);
        assert!((m.coefficient - 4.0 * c4 / PI).abs() < 1e-12);
        assert!((m.coefficient - 1.154_067_477).abs() < 1e-9);

        // Doubling the plateau width doubles the slope.
        let wide = PiecewisePotential::new(
            -PI,
            PI,
            WingSpec::quadratic(1.0),
            WingSpec::quadratic(1.0),
        )
        .unwrap();
        let narrow = PiecewisePotential::new(
            -FRAC_PI_2,
            FRAC_PI_2,
            WingSpec::quadratic(1.0),
            WingSpec::quadratic(1.0),
        )
        .unwrap();
        let mw = poincare_expansion_1d(&wide).unwrap();
        let mn = poincare_expansion_1d(&narrow).unwrap();
        assert!((mw.coefficient - 2.0 * mn.coefficient).abs() < 1e-12);
    }

    #[test]
    fn lsi_expansion_values() {
        let cx = PiecewisePotential::counterexample();
        let m = lsi_expansion_1d(&cx).unwrap();
        assert!((m.coefficient - (8.0 / PI).sqrt()).abs() < 1e-14);

        let unit = PiecewisePotential::new(
            0.0,
            1.0,
            WingSpec::quadratic(1.0),
            WingSpec::quadratic(1.0),
        )
        .unwrap();
        let m = lsi_expansion_1d(&unit).unwrap();
        assert!((m.coefficient - 2.0 * 2.0_f64.sqrt() * PI.powf(-1.5)).abs() < 1e-14);
        assert!((m.coefficient - 0.507_94).abs() < 1e-5);

        assert!(lsi_expansion_1d(&PiecewisePotential::quartic()).is_err());
    }

    #[test]
    fn poincare_and_lsi_slopes_agree_for_quadratic_wings() {
        // The two independently derived coefficients must agree to 1e-12
        // for every quadratic-wing plateau potential.
        for pot in [
            PiecewisePotential::counterexample(),
            PiecewisePotential::asymmetric(1.0, 4.0).unwrap(),
            PiecewisePotential::asymmetric(0.3, 7.7).unwrap(),
            PiecewisePotential::new(
                -0.2,
                5.0,
                WingSpec::quadratic(2.5),
                WingSpec::quadratic(0.04),
            )
            .unwrap(),
        ] {
            let p = poincare_expansion_1d(&pot).unwrap();
            let l = lsi_expansion_1d(&pot).unwrap();
            assert!(
                (p.coefficient - l.coefficient).abs() <= 1e-12 * l.coefficient,
                "{} vs {}",
                p.coefficient,
                l.coefficient
            );
            assert_eq!(p.c0, l.c0);
        }
    }

    #[test]
    fn lower_bound_below_asymptote() {
        let m = lsi_expansion_1d(&PiecewisePotential::counterexample()).unwrap();
        for &t in &[0.0, 1e-6, 1e-3, 0.1, 1.0, 10.0] {
            assert!(counterexample_lower_bound(t) <= m.evaluate(t) * (1.0 + 1e-15));
        }
    }

    #[test]
    fn conjecture_ratio_diverges() {
        let cx = PiecewisePotential::counterexample();
        let lsi = lsi_expansion_1d(&cx).unwrap();
        let conj = conjecture_model(&cx).unwrap();
        let mut prev = 0.0;
        for k in 1..=8 {
            let t = 10f64.powi(-k);
            let ratio = (lsi.evaluate(t) - lsi.c0) / (conj.evaluate(t) - conj.c0);
            assert!(ratio > prev, "ratio not increasing at t = {t}");
            prev = ratio;
        }
        assert!(prev > 1e3);
    }

    #[test]
    fn z_model_matches_quadrature_expansion() {
        let m = z_expansion_model(&PiecewisePotential::counterexample()).unwrap();
        assert!((m.c0 - PI).abs() < 1e-15);
        assert!((m.coefficient - (2.0 * PI).sqrt()).abs() < 1e-12);
        assert_eq!(m.exponent, 0.5);
        assert!((m.evaluate(0.0) - PI).abs() < 1e-15);

        let q = z_expansion_model(&PiecewisePotential::quartic()).unwrap();
        assert!((q.coefficient - 2.0 * gamma(0.25) / 4.0).abs() < 1e-12);
    }
}
