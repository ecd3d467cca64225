//! Plateau potentials: a flat interval `[a, b]` where `V = 0`, plus two convex
//! wings growing away from it. The wings are specified analytically so that
//! one-sided derivatives and the boundary growth data (Łojasiewicz exponent,
//! boundary coefficient) are exact.
//!
//! ```
//! use spectra::potential::{PiecewisePotential, WingSpec};
//!
//! let pot = PiecewisePotential::new(
//!     -1.0,
//!     1.0,
//!     WingSpec::quadratic(2.0),
//!     WingSpec::power(1.0, 4.0),
//! )?;
//! assert_eq!(pot.plateau(), (-1.0, 1.0));
//! let (kappa_left, kappa_right) = pot.junction_curvatures();
//! assert_eq!(kappa_left, 2.0);
//! assert_eq!(kappa_right, 0.0); // quartic wing: vanishing curvature
//! # Ok::<(), spectra::SpectraError>(())
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpectraError};

/// Analytic form of one wing, written as a function of the distance `r >= 0`
/// to the plateau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum WingKind {
    /// `w(r) = coefficient * r^exponent`.
    Power,
    /// `w(r) = curvature/2 * r^2`; stored as a power wing with exponent 2.
    Quadratic,
    /// `w(r) = sum_k c_k r^{p_k}`, leading term first (smallest exponent).
    CustomSeries,
}

/// One wing of a plateau potential.
///
/// `exponent` is the local growth power (the Łojasiewicz exponent of this
/// side), `coefficient` the leading constant, so `w(r) = coefficient * r^exponent`
/// near `r = 0`. `upper_exponent` is the global growth power bounding the wing
/// from above near the plateau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WingSpec {
    pub kind: WingKind,
    pub exponent: f64,
    pub coefficient: f64,
    pub upper_exponent: f64,
    /// Extra series terms `(coefficient, exponent)` beyond the leading one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_terms: Vec<(f64, f64)>,
}

impl WingSpec {
    pub fn power(coefficient: f64, exponent: f64) -> Self {
        WingSpec {
            kind: WingKind::Power,
            exponent,
            coefficient,
            upper_exponent: exponent,
            extra_terms: Vec::new(),
        }
    }

    /// Quadratic wing `curvature/2 * r^2`.
    pub fn quadratic(curvature: f64) -> Self {
        WingSpec {
            kind: WingKind::Quadratic,
            exponent: 2.0,
            coefficient: curvature / 2.0,
            upper_exponent: 2.0,
            extra_terms: Vec::new(),
        }
    }

    /// Series wing; `terms` must be sorted by exponent, leading term first.
    pub fn series(terms: Vec<(f64, f64)>) -> Result<Self> {
        let (lead_c, lead_p) = *terms.first().ok_or_else(|| {
            SpectraError::InvalidPotential("series wing needs at least one term".into())
        })?;
        let max_p = terms.iter().map(|t| t.1).fold(lead_p, f64::max);
        Ok(WingSpec {
            kind: WingKind::CustomSeries,
            exponent: lead_p,
            coefficient: lead_c,
            upper_exponent: max_p,
            extra_terms: terms[1..].to_vec(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.exponent >= 1.0) {
            return Err(SpectraError::InvalidPotential(format!(
                "wing exponent must be >= 1, got {}",
                self.exponent
            )));
        }
        if !(self.exponent < 2.0 * self.upper_exponent) {
            return Err(SpectraError::InvalidPotential(format!(
                "wing exponent {} must be < 2 * upper_exponent {}",
                self.exponent, self.upper_exponent
            )));
        }
        if !(self.coefficient > 0.0) || !self.coefficient.is_finite() {
            return Err(SpectraError::InvalidPotential(format!(
                "wing coefficient must be positive, got {}",
                self.coefficient
            )));
        }
        for &(c, p) in &self.extra_terms {
            if !(c >= 0.0) || !(p >= self.exponent) {
                return Err(SpectraError::InvalidPotential(
                    "series terms must have nonnegative coefficients and nondecreasing exponents"
                        .into(),
                ));
            }
        }
        // Convexity and monotonicity, by sampling.
        let mut prev_grad = 0.0;
        for i in 1..=200 {
            let r = 1e-3 * (i as f64).powi(2);
            let g = self.grad(r);
            if g < prev_grad - 1e-12 * g.abs().max(1.0) {
                return Err(SpectraError::InvalidPotential(format!(
                    "wing derivative decreases at r = {r}: not convex"
                )));
            }
            prev_grad = g;
        }
        Ok(())
    }

    pub fn value(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let mut v = self.coefficient * r.powf(self.exponent);
        for &(c, p) in &self.extra_terms {
            v += c * r.powf(p);
        }
        v
    }

    pub fn grad(&self, r: f64) -> f64 {
        let mut g = self.coefficient * self.exponent * r.powf(self.exponent - 1.0);
        for &(c, p) in &self.extra_terms {
            g += c * p * r.powf(p - 1.0);
        }
        g
    }

    pub fn hess(&self, r: f64) -> f64 {
        let mut h =
            self.coefficient * self.exponent * (self.exponent - 1.0) * r.powf(self.exponent - 2.0);
        for &(c, p) in &self.extra_terms {
            h += c * p * (p - 1.0) * r.powf(p - 2.0);
        }
        h
    }

    /// One-sided second derivative at the plateau junction. Finite and positive
    /// only for exponent 2; zero for exponent > 2, infinite for exponent in (1, 2).
    pub fn curvature_at_junction(&self) -> f64 {
        if self.exponent == 2.0 {
            2.0 * self.coefficient
        } else if self.exponent > 2.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// The boundary coefficient `a` of the growth model `V(r) = r^alpha / a`,
    /// i.e. `1 / coefficient`.
    pub fn boundary_coefficient(&self) -> f64 {
        1.0 / self.coefficient
    }

    pub fn is_quadratic(&self) -> bool {
        self.exponent == 2.0 && self.extra_terms.is_empty()
    }

    /// Radius at which the wing reaches `level` (bisection; value is strictly
    /// increasing in `r`).
    pub fn radius_for_value(&self, level: f64) -> f64 {
        debug_assert!(level > 0.0);
        // Bracket.
        let mut hi = 1.0;
        while self.value(hi) < level {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.value(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// A convex potential vanishing exactly on the plateau `[a, b]` with analytic
/// wings on either side. The degenerate case `a == b` (single minimizer) is
/// allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePotential {
    plateau_left: f64,
    plateau_right: f64,
    left_wing: WingSpec,
    right_wing: WingSpec,
}

impl PiecewisePotential {
    pub fn new(a: f64, b: f64, left_wing: WingSpec, right_wing: WingSpec) -> Result<Self> {
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(SpectraError::InvalidPotential(format!(
                "plateau must satisfy a <= b, got [{a}, {b}]"
            )));
        }
        left_wing.validate()?;
        right_wing.validate()?;
        Ok(PiecewisePotential {
            plateau_left: a,
            plateau_right: b,
            left_wing,
            right_wing,
        })
    }

    /// The counterexample potential `x -> 1/2 dist(x, [-pi/2, pi/2])^2`.
    pub fn counterexample() -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        PiecewisePotential::new(
            -half_pi,
            half_pi,
            WingSpec::quadratic(1.0),
            WingSpec::quadratic(1.0),
        )
        .expect("valid by construction")
    }

    /// `V(x) = x^2 / 2` as a degenerate plateau at the origin.
    pub fn gaussian() -> Self {
        PiecewisePotential::new(0.0, 0.0, WingSpec::quadratic(1.0), WingSpec::quadratic(1.0))
            .expect("valid by construction")
    }

    /// Quartic wings `r^4` on the plateau `[-pi/2, pi/2]`.
    pub fn quartic() -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        PiecewisePotential::new(
            -half_pi,
            half_pi,
            WingSpec::power(1.0, 4.0),
            WingSpec::power(1.0, 4.0),
        )
        .expect("valid by construction")
    }

    /// Quadratic wings with distinct junction curvatures on `[-pi/2, pi/2]`.
    pub fn asymmetric(kappa_left: f64, kappa_right: f64) -> Result<Self> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        PiecewisePotential::new(
            -half_pi,
            half_pi,
            WingSpec::quadratic(kappa_left),
            WingSpec::quadratic(kappa_right),
        )
    }

    pub fn plateau(&self) -> (f64, f64) {
        (self.plateau_left, self.plateau_right)
    }

    pub fn plateau_width(&self) -> f64 {
        self.plateau_right - self.plateau_left
    }

    pub fn is_degenerate(&self) -> bool {
        self.plateau_left == self.plateau_right
    }

    pub fn left_wing(&self) -> &WingSpec {
        &self.left_wing
    }

    pub fn right_wing(&self) -> &WingSpec {
        &self.right_wing
    }

    /// Distance to the plateau.
    pub fn dist(&self, x: f64) -> f64 {
        if x < self.plateau_left {
            self.plateau_left - x
        } else if x > self.plateau_right {
            x - self.plateau_right
        } else {
            0.0
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x > self.plateau_right {
            self.right_wing.value(x - self.plateau_right)
        } else if x < self.plateau_left {
            self.left_wing.value(self.plateau_left - x)
        } else {
            0.0
        }
    }

    pub fn eval_grad(&self, x: f64) -> f64 {
        if x > self.plateau_right {
            self.right_wing.grad(x - self.plateau_right)
        } else if x < self.plateau_left {
            -self.left_wing.grad(self.plateau_left - x)
        } else {
            0.0
        }
    }

    /// Second derivative, one-sided at the junctions: at `a` and `b` this
    /// returns the wing curvature; inside the open plateau it returns 0.
    pub fn eval_hess(&self, x: f64) -> f64 {
        if x > self.plateau_right {
            self.right_wing.hess(x - self.plateau_right)
        } else if x < self.plateau_left {
            self.left_wing.hess(self.plateau_left - x)
        } else if x == self.plateau_right && x == self.plateau_left {
            // Degenerate plateau: both one-sided values exist; report the larger.
            self.left_wing
                .curvature_at_junction()
                .max(self.right_wing.curvature_at_junction())
        } else if x == self.plateau_right {
            self.right_wing.curvature_at_junction()
        } else if x == self.plateau_left {
            self.left_wing.curvature_at_junction()
        } else {
            0.0
        }
    }

    /// Junction curvatures `(kappa_a, kappa_b)` = one-sided second derivatives
    /// at the plateau endpoints.
    pub fn junction_curvatures(&self) -> (f64, f64) {
        (
            self.left_wing.curvature_at_junction(),
            self.right_wing.curvature_at_junction(),
        )
    }

    /// The common wing exponent, or an error if the two sides differ.
    pub fn common_exponent(&self) -> Result<f64> {
        if self.left_wing.exponent == self.right_wing.exponent {
            Ok(self.left_wing.exponent)
        } else {
            Err(SpectraError::MixedExponents {
                left: self.left_wing.exponent,
                right: self.right_wing.exponent,
            })
        }
    }

    /// Infimum of `V''` over the line, `None`-free: 0 unless the plateau is
    /// degenerate with quadratic wings.
    pub fn min_curvature(&self) -> f64 {
        if !self.is_degenerate() {
            return 0.0;
        }
        if self.left_wing.is_quadratic() && self.right_wing.is_quadratic() {
            let (ka, kb) = self.junction_curvatures();
            ka.min(kb)
        } else {
            // Non-quadratic power wings have vanishing curvature somewhere.
            0.0
        }
    }
}

/// Windowed Polyak-Łojasiewicz constant: the supremum of `V / V'^2` over
/// `dist(x, [a,b])` in `(0, search_radius]`.
#[derive(Debug, Clone, Copy)]
pub struct PlEstimate {
    /// Supremum of the ratio over the sampled window, golden-section refined.
    pub value: f64,
    /// The ratio grows without bound as `r -> 0` (wing exponent > 2).
    pub divergent_at_plateau: bool,
    /// The ratio grows without bound as `r -> infinity` (wing exponent < 2):
    /// the PL inequality fails globally.
    pub divergent_at_infinity: bool,
}

fn wing_ratio(wing: &WingSpec, r: f64) -> f64 {
    let g = wing.grad(r);
    if g == 0.0 {
        return f64::INFINITY;
    }
    wing.value(r) / (g * g)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Windowed PL constant of `pot`: `sup V / V'^2` over points with distance to
/// the plateau in `(0, search_radius]`, sampled at `n_samples` points per wing
/// and refined by golden-section search around the sampled argmax.
///
/// Errors when the window is unbounded and a wing has exponent < 2, in which
/// case the ratio diverges as `r -> infinity` and the PL inequality fails
/// globally.
pub fn pl_constant(
    pot: &PiecewisePotential,
    search_radius: f64,
    n_samples: usize,
) -> Result<PlEstimate> {
    if n_samples < 2 {
        return Err(SpectraError::InvalidPotential(
            "pl_constant needs at least 2 samples".into(),
        ));
    }
    let wings = [pot.left_wing(), pot.right_wing()];
    if !search_radius.is_finite() {
        for w in wings {
            if w.exponent < 2.0 {
                return Err(SpectraError::PlDiverges {
                    witness: f64::INFINITY,
                });
            }
        }
    }
    let mut best = 0.0_f64;
    let mut divergent_at_plateau = false;
    let mut divergent_at_infinity = false;
    for wing in wings {
        if wing.exponent > 2.0 {
            divergent_at_plateau = true;
        }
        if wing.exponent < 2.0 {
            divergent_at_infinity = true;
        }
        // An unbounded window is sampled on a wide log grid; the ratio of a
        // convex wing with exponent >= 2 settles at both ends.
        let sample = |i: usize| -> f64 {
            if search_radius.is_finite() {
                search_radius * i as f64 / n_samples as f64
            } else {
                10f64.powf(-8.0 + 16.0 * i as f64 / n_samples as f64)
            }
        };
        let mut arg = 1;
        let mut wing_best = f64::NEG_INFINITY;
        for i in 1..=n_samples {
            let ratio = wing_ratio(wing, sample(i));
            if ratio > wing_best {
                wing_best = ratio;
                arg = i;
            }
        }
        let lo = sample(arg.saturating_sub(1).max(1));
        let hi = sample((arg + 1).min(n_samples));
        let refined = golden_max(|r| wing_ratio(wing, r), lo, hi);
        best = best.max(wing_best.max(refined));
    }
    Ok(PlEstimate {
        value: best,
        divergent_at_plateau,
        divergent_at_infinity,
    })
}

/// Outcome of the quadratic-growth check `dist^2 / (4 C_PL) <= V`.
#[derive(Debug, Clone, Copy)]
pub struct GrowthCheck {
    pub holds: bool,
    /// Worst violating point when `holds` is false.
    pub worst_x: Option<f64>,
}

/// Checks `dist(x, [a,b])^2 / (4 c_pl) <= V(x)` at every sampled point, with
/// relative tolerance `1e-12`.
pub fn quadratic_growth_check(pot: &PiecewisePotential, c_pl: f64, xs: &[f64]) -> GrowthCheck {
    assert!(c_pl > 0.0, "c_pl must be positive");
    let mut worst: Option<(f64, f64)> = None;
    for &x in xs {
        let d = pot.dist(x);
        let lhs = d * d / (4.0 * c_pl);
        let v = pot.eval(x);
        let slack = lhs - v;
        if slack > 1e-12 * v.abs().max(1.0) && worst.map_or(true, |(_, s)| slack > s) {
            worst = Some((x, slack));
        }
    }
    GrowthCheck {
        holds: worst.is_none(),
        worst_x: worst.map(|(x, _)| x),
    }
}

/// Integrates the gradient flow `y' = -V'(y)` with classical RK4 and checks
/// the PL decay estimate `V(y_s) <= e^{-s/c_pl} V(y_0)` at every step (with
/// relative slack `1e-6`).
pub fn gradient_flow_decay_check(
    pot: &PiecewisePotential,
    c_pl: f64,
    y0: f64,
    horizon: f64,
    dt: f64,
) -> Result<bool> {
    assert!(c_pl > 0.0 && dt > 0.0 && horizon > 0.0);
    let v0 = pot.eval(y0);
    if v0 == 0.0 {
        // Flow stays put inside the plateau.
        return Ok(true);
    }
    let f = |y: f64| -pot.eval_grad(y);
    let mut y = y0;
    let mut s = 0.0;
    let mut v_prev = v0;
    let n_steps = (horizon / dt).ceil() as usize;
    for _ in 0..n_steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * dt * k1);
        let k3 = f(y + 0.5 * dt * k2);
        let k4 = f(y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += dt;
        let v = pot.eval(y);
        if v > v_prev * (1.0 + 1e-9) {
            return Err(SpectraError::FlowUnstable(s));
        }
        v_prev = v;
        if v > (-s / c_pl).exp() * v0 * (1.0 + 1e-6) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One checked bullet of the growth assumptions.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Per-bullet validation report.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks each structural assumption on the potential: convexity (sampled),
/// wing exponents >= 1, exponent < 2 * upper exponent, positive coefficients.
pub fn validate_assumptions(pot: &PiecewisePotential) -> AssumptionReport {
    let mut checks = Vec::new();
    let wings = [("left", pot.left_wing()), ("right", pot.right_wing())];

    for (side, w) in wings {
        checks.push(AssumptionCheck {
            name: format!("{side} wing exponent >= 1"),
            passed: w.exponent >= 1.0,
            detail: format!("exponent = {}", w.exponent),
        });
        checks.push(AssumptionCheck {
            name: format!("{side} wing exponent < 2 * upper_exponent"),
            passed: w.exponent < 2.0 * w.upper_exponent,
            detail: format!(
                "exponent = {}, upper_exponent = {}",
                w.exponent, w.upper_exponent
            ),
        });
        checks.push(AssumptionCheck {
            name: format!("{side} wing coefficient > 0"),
            passed: w.coefficient > 0.0,
            detail: format!("coefficient = {}", w.coefficient),
        });
    }

    // Convexity by midpoint sampling on [-L, L] around the plateau.
    let (a, b) = pot.plateau();
    let span = (b - a).max(1.0);
    let mut convex = true;
    let mut witness = String::from("ok");
    let n = 400;
    for i in 0..n {
        for j in (i + 2)..n.min(i + 40) {
            let x = a - 2.0 * span + 5.0 * span * i as f64 / n as f64;
            let z = a - 2.0 * span + 5.0 * span * j as f64 / n as f64;
            let y = 0.5 * (x + z);
            let chord = 0.5 * (pot.eval(x) + pot.eval(z));
            let vy = pot.eval(y);
            if vy > chord + 1e-12 * chord.abs().max(1.0) {
                convex = false;
                witness = format!("midpoint violation at x = {y}");
            }
        }
    }
    checks.push(AssumptionCheck {
        name: "convexity (sampled midpoints)".into(),
        passed: convex,
        detail: witness,
    });

    // V' nondecreasing across the junctions.
    let mut mono = true;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=800 {
        let x = a - 2.0 * span + 5.0 * span * i as f64 / 800.0;
        let g = pot.eval_grad(x);
        if g < prev - 1e-12 * g.abs().max(1.0) {
            mono = false;
        }
        prev = g;
    }
    checks.push(AssumptionCheck {
        name: "V' nondecreasing".into(),
        passed: mono,
        detail: String::new(),
    });

    AssumptionReport { checks }
}
