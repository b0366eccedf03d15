//! Whirl curves synthesized from a prescribed positive curvature.
//!
//! With `Λ(s) = λ∫_{s₀}^{s}κ − B < 0` and `E = e^Λ`, the unit tangent has
//! polar angle `cos φ = ±E/√(1+λ²)` about the axis `(0, 0, 1)` and azimuth
//! `θ = arctan(√(1−E²)/λ) − arctanh(√(1−E²))/λ`; the torsion is
//! `±√(1+λ²) κ E / √(1−E²)`. Positions are quadratures of the tangent.

use std::cell::Cell;
use std::fmt;

use crate::error::{Error, Result};
use crate::frenet::{Curve, CurveTrace, ParamKind};
use crate::numerics::{self, integrate, GaussLegendre, ScalarFn};
use crate::vec3::{Sign, Vec3};
use crate::whirl::WhirlLambda;

/// Requests with `Λ(s)` above this are rejected.
pub const EXPONENT_CEILING: f64 = -1e-12;
/// Absolute tolerance of the curvature and tangent quadratures.
pub const SYNTH_ABS_TOL: f64 = 1e-13;
/// Minimum number of table panels of a [`WhirlCurve`].
pub const MIN_PANELS: usize = 256;

/// Which of the two published tangent forms is integrated. Both give
/// congruent curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthForm {
    /// Azimuth `θ` in closed form, tangent `(sin φ cos θ, sin φ sin θ, cos φ)`.
    #[default]
    Theorem,
    /// Phase-combined form with `A = arctanh(√(1−E²))/λ`.
    Remark,
}

impl SynthForm {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthForm::Theorem => "theorem",
            SynthForm::Remark => "remark",
        }
    }
}

/// Built-in curvature families.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaFamily {
    Constant(f64),
    /// The curvature forcing `τ/κ = as + b`:
    /// `κ = (1+λ²) a / (λ h (1 + λ² + h²))`, `h = as + b`.
    LinearRatio { a: f64, b: f64 },
    /// `Σ c_i s^i`.
    Polynomial(Vec<f64>),
}

impl KappaFamily {
    pub fn to_scalar_fn(&self, lambda: f64) -> ScalarFn {
        match self.clone() {
            KappaFamily::Constant(c) => ScalarFn::constant(c),
            KappaFamily::LinearRatio { a, b } => ScalarFn::unbounded(move |s| linear_ratio_curvature(a, b, lambda, s)),
            KappaFamily::Polynomial(c) => ScalarFn::unbounded(move |s| c.iter().rev().fold(0.0, |acc, ci| acc * s + ci)),
        }
    }
}

/// `κ(s) = (1+λ²) a / (λ h (1+λ²+h²))` with `h = as + b`.
pub fn linear_ratio_curvature(a: f64, b: f64, lambda: f64, s: f64) -> f64 {
    let h = a * s + b;
    let l2 = 1.0 + lambda * lambda;
    l2 * a / (lambda * h * (l2 + h * h))
}

/// `e^Λ` predicted for the linear-ratio family: `(|h|/√(1+λ²)) / √(1 + h²/(1+λ²))`.
pub fn linear_ratio_exponential(h: f64, lambda: f64) -> f64 {
    let l2 = 1.0 + lambda * lambda;
    (h.abs() / l2.sqrt()) / (1.0 + h * h / l2).sqrt()
}

/// `B = −ln[(|h₀|/√(1+λ²)) / √(1 + h₀²/(1+λ²))] = ½ ln(1 + (1+λ²)/h₀²)`,
/// the constant making the torsion ratio equal `|h₀|` at `s₀`.
pub fn b_from_initial_ratio(h0: f64, lambda: f64) -> Result<f64> {
    if h0 == 0.0 || !h0.is_finite() {
        return Err(Error::InvalidArgument(format!("initial ratio must be finite and nonzero, got {h0}")));
    }
    let l2 = 1.0 + lambda * lambda;
    Ok(0.5 * (l2 / (h0 * h0)).ln_1p())
}

/// `C = B + ½ ln(1 + λ²)`, equivalently `(1+λ²)e^{−2C} = e^{−2B}`.
pub fn c_from_b(b: f64, lambda: f64) -> f64 {
    b + 0.5 * (lambda * lambda).ln_1p()
}

/// Parameters of a synthesized whirl curve.
#[derive(Debug, Clone)]
pub struct WhirlSpec {
    pub kappa: ScalarFn,
    pub lambda: f64,
    /// Integration constant `B`.
    pub b: f64,
    pub s0: f64,
    pub z_sign: Sign,
    pub tau_sign: Sign,
    pub form: SynthForm,
}

impl WhirlSpec {
    pub fn new(kappa: ScalarFn, lambda: f64, b: f64, s0: f64) -> Result<Self> {
        WhirlLambda::new(lambda)?;
        if !b.is_finite() || !s0.is_finite() {
            return Err(Error::InvalidArgument(format!("B and s0 must be finite, got B = {b}, s0 = {s0}")));
        }
        Ok(Self { kappa, lambda, b, s0, z_sign: Sign::Plus, tau_sign: Sign::Plus, form: SynthForm::Theorem })
    }

    /// `B` chosen so that `|τ/κ|(s₀) = |h0|`.
    pub fn with_initial_ratio(kappa: ScalarFn, lambda: f64, h0: f64, s0: f64) -> Result<Self> {
        Self::new(kappa, lambda, b_from_initial_ratio(h0, lambda)?, s0)
    }

    pub fn signs(mut self, z_sign: Sign, tau_sign: Sign) -> Self {
        self.z_sign = z_sign;
        self.tau_sign = tau_sign;
        self
    }

    pub fn form(mut self, form: SynthForm) -> Self {
        self.form = form;
        self
    }

    fn l2(&self) -> f64 {
        1.0 + self.lambda * self.lambda
    }

    /// Curvature at `s`, required positive.
    pub fn curvature(&self, s: f64) -> Result<f64> {
        let k = self.kappa.eval(s)?;
        if k > 0.0 {
            Ok(k)
        } else {
            Err(Error::NonPositiveCurvature { s, kappa: k })
        }
    }

    /// `Λ(s) = λ∫_{s₀}^{s}κ − B` by adaptive quadrature; must stay below
    /// [`EXPONENT_CEILING`].
    pub fn exponent(&self, s: f64) -> Result<f64> {
        let int = numerics::integrate_fn(&self.kappa, self.s0, s, SYNTH_ABS_TOL)?.require_converged(self.s0, s)?;
        self.check_exponent(s, self.lambda * int - self.b)
    }

    fn check_exponent(&self, s: f64, exponent: f64) -> Result<f64> {
        if exponent.is_finite() && exponent <= EXPONENT_CEILING {
            Ok(exponent)
        } else {
            Err(Error::DomainBound { s, exponent })
        }
    }

    /// `C = B + ½ ln(1+λ²)`.
    pub fn c(&self) -> f64 {
        c_from_b(self.b, self.lambda)
    }

    pub fn torsion(&self, s: f64) -> Result<f64> {
        let k = self.curvature(s)?;
        Ok(torsion_from_exponent(self, k, self.exponent(s)?))
    }

    pub fn cos_phi(&self, s: f64) -> Result<f64> {
        Ok(cos_phi_from_exponent(self, self.exponent(s)?))
    }

    /// `⟨t, d⟩ = ±e^{λ∫κ − C}`, computed through `C`.
    pub fn xi(&self, s: f64) -> Result<f64> {
        let lam = self.exponent(s)? + self.b;
        Ok(self.z_sign.value() * (lam - self.c()).exp())
    }

    pub fn theta_closed(&self, s: f64) -> Result<f64> {
        Ok(theta_from_exponent(self.lambda, self.exponent(s)?))
    }

    /// `θ′ = (1+λ²) κ √(1−E²) / (1 + λ² − E²)`.
    pub fn theta_prime(&self, s: f64) -> Result<f64> {
        let k = self.curvature(s)?;
        Ok(theta_prime_from_exponent(self.lambda, k, self.exponent(s)?))
    }

    pub fn spherical_tangent(&self, s: f64) -> Result<SphericalTangent> {
        let e = self.exponent(s)?;
        Ok(SphericalTangent {
            phi: cos_phi_from_exponent(self, e).clamp(-1.0, 1.0).acos(),
            theta: theta_from_exponent(self.lambda, e),
        })
    }

    /// Closed-form unit tangent.
    pub fn tangent(&self, s: f64) -> Result<Vec3> {
        Ok(tangent_from_exponent(self, self.exponent(s)?))
    }
}

/// Polar and azimuthal angles of the unit tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalTangent {
    pub phi: f64,
    pub theta: f64,
}

impl SphericalTangent {
    pub fn to_vec(self) -> Vec3 {
        let (sp, cp) = self.phi.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        Vec3::new(sp * ct, sp * st, cp)
    }
}

/// `√(1 − e^{2Λ})` without cancellation.
fn q_of(exponent: f64) -> f64 {
    (-(2.0 * exponent).exp_m1()).sqrt()
}

/// `arctanh(√(1 − e^{2Λ})) = ln(1 + q) − Λ`.
fn atanh_q(exponent: f64, q: f64) -> f64 {
    q.ln_1p() - exponent
}

fn theta_from_exponent(lambda: f64, exponent: f64) -> f64 {
    let q = q_of(exponent);
    (q / lambda).atan() - atanh_q(exponent, q) / lambda
}

fn theta_prime_from_exponent(lambda: f64, kappa: f64, exponent: f64) -> f64 {
    let l2 = 1.0 + lambda * lambda;
    let e2 = (2.0 * exponent).exp();
    l2 * kappa * q_of(exponent) / (l2 - e2)
}

fn cos_phi_from_exponent(spec: &WhirlSpec, exponent: f64) -> f64 {
    spec.z_sign.value() * exponent.exp() / spec.l2().sqrt()
}

fn torsion_from_exponent(spec: &WhirlSpec, kappa: f64, exponent: f64) -> f64 {
    spec.tau_sign.value() * spec.l2().sqrt() * kappa * exponent.exp() / q_of(exponent)
}

fn tangent_from_exponent(spec: &WhirlSpec, exponent: f64) -> Vec3 {
    let lambda = spec.lambda;
    let l2 = spec.l2();
    let q = q_of(exponent);
    // y is mirrored to select the torsion sign
    let mirror = (spec.z_sign * spec.tau_sign).value();
    let z = cos_phi_from_exponent(spec, exponent);
    match spec.form {
        SynthForm::Theorem => {
            // sin φ = √((λ² + q²)/(1+λ²))
            let sin_phi = ((lambda * lambda + q * q) / l2).sqrt();
            let (st, ct) = theta_from_exponent(lambda, exponent).sin_cos();
            Vec3::new(sin_phi * ct, mirror * sin_phi * st, z)
        }
        SynthForm::Remark => {
            let (sa, ca) = (atanh_q(exponent, q) / lambda).sin_cos();
            let r = l2.sqrt();
            Vec3::new((lambda * ca + q * sa) / r, mirror * (q * ca - lambda * sa) / r, z)
        }
    }
}

/// Evaluates a fallible integrand through [`integrate`], surfacing the first
/// integrand error instead of a generic non-finite sample.
fn integrate_fallible(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let failure: Cell<Option<Error>> = Cell::new(None);
    let r = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                if let Some(prev) = failure.take() {
                    failure.set(Some(prev));
                } else {
                    failure.set(Some(e));
                }
                f64::NAN
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    r?.require_converged(lo, hi)
}

/// A synthesized whirl curve on `[lo, hi]`, evaluable at any parameter.
///
/// `∫κ` and the position are tabulated once on a uniform panel grid with
/// adaptive Simpson; between nodes a fixed 10-point Gauss-Legendre panel
/// from the left node is added, which keeps both functions smooth in `s`.
/// The position is zero at `lo`.
#[derive(Debug, Clone)]
pub struct WhirlCurve {
    spec: WhirlSpec,
    nodes: Vec<f64>,
    exponents: Vec<f64>,
    positions: Vec<Vec3>,
}

impl WhirlCurve {
    pub fn new(spec: WhirlSpec, lo: f64, hi: f64) -> Result<Self> {
        Self::with_panels(spec, lo, hi, MIN_PANELS)
    }

    pub fn with_panels(spec: WhirlSpec, lo: f64, hi: f64, panels: usize) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
        }
        let panels = panels.max(1);
        let nodes = numerics::linspace(lo, hi, panels + 1);
        for &s in &nodes {
            spec.curvature(s)?;
        }
        let kappa = spec.kappa.clone();
        let ints = numerics::cumulative_integral(|x| kappa.call(x), spec.s0, &nodes, SYNTH_ABS_TOL)?;
        let exponents = nodes
            .iter()
            .zip(ints)
            .map(|(&s, i)| spec.check_exponent(s, spec.lambda * i - spec.b))
            .collect::<Result<Vec<_>>>()?;

        let mut curve = Self { spec, nodes, exponents, positions: Vec::new() };
        let mut positions = Vec::with_capacity(curve.nodes.len());
        let mut p = Vec3::ZERO;
        positions.push(p);
        for w in curve.nodes.windows(2) {
            let mut step = [0.0; 3];
            for (axis, slot) in step.iter_mut().enumerate() {
                *slot = integrate_fallible(|x| curve.tangent(x).map(|t| t[axis]), w[0], w[1], SYNTH_ABS_TOL)?;
            }
            p += Vec3::from(step);
            positions.push(p);
        }
        curve.positions = positions;
        Ok(curve)
    }

    pub fn spec(&self) -> &WhirlSpec {
        &self.spec
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn base(&self, s: f64) -> usize {
        let last = self.nodes.len() - 1;
        match self.nodes.partition_point(|&x| x <= s) {
            0 => 0,
            i if i > last => last,
            i => i - 1,
        }
    }

    /// `Λ(s)` from the table.
    pub fn exponent(&self, s: f64) -> Result<f64> {
        let k = self.base(s);
        let (s_k, e_k) = (self.nodes[k], self.exponents[k]);
        if s == s_k {
            return Ok(e_k);
        }
        let spec = &self.spec;
        let part = GaussLegendre::ten().integrate(s_k, s, |x| spec.curvature(x))?;
        spec.check_exponent(s, e_k + spec.lambda * part)
    }

    pub fn curvature(&self, s: f64) -> Result<f64> {
        self.spec.curvature(s)
    }

    pub fn torsion(&self, s: f64) -> Result<f64> {
        let k = self.spec.curvature(s)?;
        Ok(torsion_from_exponent(&self.spec, k, self.exponent(s)?))
    }

    /// `τ/κ`.
    pub fn ratio(&self, s: f64) -> Result<f64> {
        let e = self.exponent(s)?;
        Ok(self.spec.tau_sign.value() * self.spec.l2().sqrt() * e.exp() / q_of(e))
    }

    pub fn tangent(&self, s: f64) -> Result<Vec3> {
        Ok(tangent_from_exponent(&self.spec, self.exponent(s)?))
    }

    pub fn theta_closed(&self, s: f64) -> Result<f64> {
        Ok(theta_from_exponent(self.spec.lambda, self.exponent(s)?))
    }

    pub fn theta_prime(&self, s: f64) -> Result<f64> {
        let k = self.spec.curvature(s)?;
        Ok(theta_prime_from_exponent(self.spec.lambda, k, self.exponent(s)?))
    }

    /// The axis `(0, 0, ±1)` fixed by the construction, signed so that
    /// `⟨t, d⟩ > 0`.
    pub fn axis(&self) -> Vec3 {
        Vec3::Z * self.spec.z_sign.value()
    }

    /// Samples at `n` uniform parameters.
    pub fn trace(&self, n: usize) -> Result<CurveTrace> {
        let (lo, hi) = self.range();
        crate::frenet::trace_with(lo, hi, n, ParamKind::S, |s| self.position(s))
    }
}

impl Curve for WhirlCurve {
    fn position(&self, s: f64) -> Result<Vec3> {
        let k = self.base(s);
        let s_k = self.nodes[k];
        if s == s_k {
            return Ok(self.positions[k]);
        }
        Ok(self.positions[k] + GaussLegendre::ten().integrate(s_k, s, |x| self.tangent(x))?)
    }

    fn velocity(&self, s: f64) -> Option<Result<Vec3>> {
        Some(self.tangent(s))
    }
}

/// Synthesizes a unit-speed trace of `n` samples on `[s_lo, s_hi]`.
///
/// The table grid is a refinement of the sample grid, so every sample is a
/// table node.
pub fn synthesize(spec: &WhirlSpec, s_lo: f64, s_hi: f64, n: usize) -> Result<CurveTrace> {
    synthesize_curve(spec, s_lo, s_hi, n).map(|(_, trace)| trace)
}

/// [`synthesize`], also returning the continuous curve behind the trace.
pub fn synthesize_curve(spec: &WhirlSpec, s_lo: f64, s_hi: f64, n: usize) -> Result<(WhirlCurve, CurveTrace)> {
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let per = MIN_PANELS.div_ceil(n - 1).max(1);
    let curve = WhirlCurve::with_panels(spec.clone(), s_lo, s_hi, (n - 1) * per)?;
    let samples = (0..n).map(|i| (curve.nodes[i * per], curve.positions[i * per])).collect();
    let trace = CurveTrace::new(ParamKind::S, samples)?
        .with_meta("lambda", spec.lambda)
        .with_meta("B", spec.b)
        .with_meta("s0", spec.s0)
        .with_meta("z_sign", spec.z_sign.value())
        .with_meta("tau_sign", spec.tau_sign.value())
        .with_meta("form", spec.form.as_str());
    Ok((curve, trace))
}

/// Numerical self-check of a synthesized curve on a grid of interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthCheck {
    /// `max |‖α′‖ − 1|` from central differences of the position.
    pub unit_speed: f64,
    /// Worst relative error of the Frenet curvature against `κ(s)`.
    pub kappa_rel: f64,
    /// Worst relative error of the Frenet torsion against the closed form.
    pub tau_rel: f64,
    /// `max |intrinsic residual|` with `(τ/κ)′` by central differences.
    pub intrinsic: f64,
    /// `max_i ‖d_i − d_0‖` of the per-node axes.
    pub axis_deviation: f64,
    /// `max |⟨n, d⟩ − λ⟨t, d⟩|`.
    pub proportionality: f64,
    /// Distance of the recovered axis from `(0, 0, ±1)`.
    pub axis_error: f64,
}

/// Runs every property check of a synthesized curve on `grid`.
pub fn check_synthesized(curve: &WhirlCurve, grid: &[f64]) -> Result<SynthCheck> {
    use crate::frenet::{frames_on, unit_speed_residual};
    use crate::numerics::{extrapolated_derivative_scalar, DerivOrder};
    use crate::whirl::{axis_report, intrinsic_residual};

    let spec = curve.spec();
    let unit_speed = unit_speed_residual(curve, grid)?;
    let frames = frames_on(curve, grid, true)?;
    let mut kappa_rel: f64 = 0.0;
    let mut tau_rel: f64 = 0.0;
    let mut intrinsic: f64 = 0.0;
    for f in &frames {
        let k = spec.curvature(f.s)?;
        let t = curve.torsion(f.s)?;
        kappa_rel = kappa_rel.max((f.kappa - k).abs() / k);
        tau_rel = tau_rel.max((f.tau - t).abs() / t.abs());
        let ratio_prime = extrapolated_derivative_scalar(|x| curve.ratio(x), f.s, DerivOrder::First)?;
        intrinsic = intrinsic.max(intrinsic_residual(k, t, ratio_prime, spec.lambda)?.abs());
    }
    let report = axis_report(&frames, spec.lambda, Sign::Plus)?;
    let d = if frames[0].t.dot(report.d) < 0.0 { -report.d } else { report.d };
    Ok(SynthCheck {
        unit_speed,
        kappa_rel,
        tau_rel,
        intrinsic,
        axis_deviation: report.max_deviation,
        proportionality: report.max_proportionality_residual,
        axis_error: (d - curve.axis()).norm(),
    })
}

impl fmt::Display for WhirlSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lambda={} B={} s0={} z_sign={} tau_sign={} form={}",
            self.lambda,
            self.b,
            self.s0,
            self.z_sign.value(),
            self.tau_sign.value(),
            self.form.as_str()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frenet::{frenet_at, unit_speed_residual};
    use crate::numerics::{derivative_scalar, linspace, DerivOrder};

    fn constant_spec(lambda: f64, b: f64) -> WhirlSpec {
        WhirlSpec::new(ScalarFn::constant(1.0), lambda, b, 0.0).unwrap()
    }

    #[test]
    fn exponent_examples() {
        let spec = constant_spec(-1.0, 0.7);
        assert!((spec.exponent(0.0).unwrap() + 0.7).abs() < 1e-15);
        let spec = constant_spec(-1.0, 0.0);
        assert!((spec.exponent(1.0).unwrap() + 1.0).abs() < 1e-13);
        // at s0 with B = 0 the bound is violated
        assert!(matches!(spec.exponent(0.0), Err(Error::DomainBound { .. })));
        assert!(matches!(constant_spec(1.0, 0.5).exponent(1.0), Err(Error::DomainBound { .. })));
    }

    #[test]
    fn b_examples() {
        // λ = 1, h0 = √2: argument 1/√2, B = ln √2
        let b = b_from_initial_ratio(2f64.sqrt(), 1.0).unwrap();
        assert!((b - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((b - 0.346_573_590_279_972_6).abs() < 1e-15);
        // large ratios drive B to 0 from above
        let b_big = b_from_initial_ratio(1e8, 3.0).unwrap();
        assert!(b_big > 0.0 && b_big < 1e-14);
        assert!(b_from_initial_ratio(0.0, 1.0).is_err());
    }

    #[test]
    fn c_examples() {
        assert_eq!(c_from_b(0.3, 0.0), 0.3);
        assert!((c_from_b(0.0, 1.0) - 0.5 * 2f64.ln()).abs() < 1e-16);
        for (b, l) in [(0.2, -3.0), (1.7, 0.4), (0.0, 12.0)] {
            let c = c_from_b(b, l);
            let lhs = (1.0 + l * l) * (-2.0 * c).exp();
            assert!((lhs - (-2.0 * b).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn torsion_at_base_point_collapses_to_initial_ratio() {
        let kappa = ScalarFn::unbounded(|s| 1.0 + 0.5 * s * s);
        for (h0, sign) in [(0.8, Sign::Plus), (2.5, Sign::Minus)] {
            let spec = WhirlSpec::with_initial_ratio(kappa.clone(), -1.3, h0, 0.4).unwrap().signs(Sign::Plus, sign);
            let tau = spec.torsion(0.4).unwrap();
            let expected = sign.value() * h0 * kappa.call(0.4);
            assert!((tau - expected).abs() < 1e-12 * expected.abs(), "{tau} vs {expected}");
        }
    }

    #[test]
    fn torsion_hand_value() {
        // κ ≡ 1, λ = −1, B = 0.5, s = s0 = 0: √2 e^{-1/2} / √(1 − e^{-1})
        let spec = constant_spec(-1.0, 0.5);
        let expected = 2f64.sqrt() * (-0.5f64).exp() / (1.0 - (-1.0f64).exp()).sqrt();
        assert!((spec.torsion(0.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 1.078_866_7).abs() < 1e-7);
        let spec = spec.signs(Sign::Plus, Sign::Minus);
        assert!((spec.torsion(0.0).unwrap() + expected).abs() < 1e-14);
    }

    #[test]
    fn xi_agrees_with_cos_phi_and_its_linear_law() {
        let kappa = ScalarFn::unbounded(|s| 0.8 + 0.3 * s.sin());
        let spec = WhirlSpec::new(kappa, -0.7, 0.9, 0.0).unwrap();
        let c = spec.c();
        assert!((spec.xi(0.0).unwrap() - (-c).exp()).abs() < 1e-15);
        assert!((spec.xi(0.0).unwrap() - (-0.9f64).exp() / (1.0 + 0.49f64).sqrt()).abs() < 1e-15);
        for s in [0.0, 0.3, 1.1] {
            let xi = spec.xi(s).unwrap();
            assert!((xi - spec.cos_phi(s).unwrap()).abs() < 1e-14);
            assert!(xi.abs() < 1.0 / (1.0 + 0.49f64).sqrt());
            let dxi = derivative_scalar(|x| spec.xi(x), s, DerivOrder::First).unwrap();
            let k = spec.curvature(s).unwrap();
            assert!((dxi / k - spec.lambda * xi).abs() < 1e-7);
        }
        let neg = spec.clone().signs(Sign::Minus, Sign::Plus);
        assert!((neg.xi(0.5).unwrap() + spec.xi(0.5).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn theta_vanishes_at_the_domain_edge() {
        // q → 0 as Λ → 0⁻
        let spec = constant_spec(1.0, 1e-10);
        let th = spec.theta_closed(0.0).unwrap();
        assert!(th.abs() < 1e-6, "{th}");
        // far from the edge the tangent turns horizontal
        let spec = constant_spec(-1.0, 30.0);
        assert!(spec.cos_phi(0.0).unwrap().abs() < 1e-13);
    }

    #[test]
    fn theta_closed_form_matches_quadrature_of_derivative() {
        let spec = WhirlSpec::with_initial_ratio(ScalarFn::constant(1.2), -0.8, 0.9, 0.0).unwrap();
        let s = 1.3;
        let quad = integrate_fallible(|x| spec.theta_prime(x), 0.0, s, 1e-12).unwrap();
        let closed = spec.theta_closed(s).unwrap() - spec.theta_closed(0.0).unwrap();
        assert!((quad - closed).abs() < 1e-8, "{quad} vs {closed}");
    }

    #[test]
    fn spherical_tangent_matches_tangent() {
        let spec = WhirlSpec::with_initial_ratio(ScalarFn::constant(1.0), 2.0, 0.5, 0.0).unwrap();
        for s in [-0.4, 0.0, 0.05] {
            let st = spec.spherical_tangent(s).unwrap();
            assert!(st.phi > 0.0 && st.phi < std::f64::consts::PI);
            assert!((st.to_vec() - spec.tangent(s).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn remark_form_matches_theorem_form_for_positive_lambda() {
        let spec = WhirlSpec::with_initial_ratio(ScalarFn::constant(1.0), 1.5, 0.7, 0.0).unwrap();
        let remark = spec.clone().form(SynthForm::Remark);
        for s in [-0.5, -0.1, 0.0] {
            assert!((spec.tangent(s).unwrap() - remark.tangent(s).unwrap()).norm() < 1e-14);
        }
        // negative λ: half-turn about the axis
        let spec = WhirlSpec::with_initial_ratio(ScalarFn::constant(1.0), -1.5, 0.7, 0.0).unwrap();
        let remark = spec.clone().form(SynthForm::Remark);
        let (a, b) = (spec.tangent(0.3).unwrap(), remark.tangent(0.3).unwrap());
        assert!((a.x + b.x).abs() < 1e-14 && (a.y + b.y).abs() < 1e-14 && (a.z - b.z).abs() < 1e-15);
    }

    #[test]
    fn synthesized_curve_is_unit_speed_with_prescribed_frame() {
        let spec = WhirlSpec::with_initial_ratio(ScalarFn::unbounded(|s| 1.0 + 0.2 * s), -1.0, 1.0, 0.0).unwrap();
        let curve = WhirlCurve::new(spec.clone(), 0.0, 1.0).unwrap();
        let interior = linspace(0.05, 0.95, 19);
        assert!(unit_speed_residual(&curve, &interior).unwrap() < 1e-6);
        for &s in &interior {
            let f = frenet_at(&curve, s, true).unwrap();
            let k = spec.curvature(s).unwrap();
            let t = spec.torsion(s).unwrap();
            assert!((f.kappa - k).abs() < 1e-5 * k, "kappa {} vs {k}", f.kappa);
            assert!((f.tau - t).abs() < 1e-4 * t.abs(), "tau {} vs {t}", f.tau);
        }
    }

    #[test]
    fn table_exponent_matches_direct_quadrature() {
        let spec = WhirlSpec::new(ScalarFn::unbounded(|s| 2.0 + s.cos()), -0.6, 0.3, 0.1).unwrap();
        let curve = WhirlCurve::with_panels(spec.clone(), 0.1, 2.0, 16).unwrap();
        for s in [0.1, 0.37, 1.0, 1.999, 2.01] {
            assert!((curve.exponent(s).unwrap() - spec.exponent(s).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn synthesize_rejects_domain_violations() {
        // λ < 0 with κ ≡ 1, B = 0.2: Λ(s) = −s − 0.2 ≥ 0 for s ≤ −0.2
        let spec = constant_spec(-1.0, 0.2);
        let e = synthesize(&spec, -1.0, 1.0, 11).unwrap_err();
        assert!(e.is_domain(), "{e:?}");
        assert!(e.to_string().contains("domain bound"));
        let tr = synthesize(&spec, 0.0, 1.0, 11).unwrap();
        assert_eq!(tr.len(), 11);
        assert_eq!(tr.samples()[0].1, Vec3::ZERO);
    }

    #[test]
    fn non_positive_curvature_is_rejected() {
        let spec = WhirlSpec::new(ScalarFn::unbounded(|s| s), -1.0, 1.0, 0.5).unwrap();
        assert!(matches!(WhirlCurve::new(spec, -0.5, 1.0), Err(Error::NonPositiveCurvature { .. })));
    }

    #[test]
    fn linear_ratio_family_exponential_identity() {
        let (a, b, l) = (0.8, 0.1, 1.7);
        let fam = KappaFamily::LinearRatio { a, b };
        let s0 = 0.2;
        let spec = WhirlSpec::with_initial_ratio(fam.to_scalar_fn(l), l, a * s0 + b, s0).unwrap();
        for s in [0.2, 0.6, 1.5] {
            let e = spec.exponent(s).unwrap().exp();
            assert!((e - linear_ratio_exponential(a * s + b, l)).abs() < 1e-9);
        }
        // κ = 2/3 at a = 1, b = 0, λ = 1, s = 1
        assert!((linear_ratio_curvature(1.0, 0.0, 1.0, 1.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_family_evaluates_coefficients_in_ascending_order() {
        let f = KappaFamily::Polynomial(vec![1.0, 2.0, 3.0]).to_scalar_fn(1.0);
        assert_eq!(f.call(2.0), 1.0 + 4.0 + 12.0);
    }
}
