//! The whirl property `⟨n, d⟩ = λ⟨t, d⟩`: intrinsic equation, axis vector,
//! verification on a curve and the inverse fit of `(λ, d)`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::frenet::{frames_on, Curve, FrenetApparatus};
use crate::numerics::grid_derivative;
use crate::vec3::{Sign, Vec3};

/// Smallest admissible `|λ|`.
pub const MIN_LAMBDA: f64 = 1e-12;
/// Bracket of the `λ` search in [`fit_lambda_axis`].
pub const LAMBDA_BRACKET: f64 = 1e4;

/// The nonzero proportionality constant of a whirl curve.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WhirlLambda(f64);

impl WhirlLambda {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda.abs() >= MIN_LAMBDA {
            Ok(Self(lambda))
        } else {
            Err(Error::InvalidArgument(format!("lambda must be finite with |lambda| >= {MIN_LAMBDA}, got {lambda}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `τλ(1 + λ² + (τ/κ)²) − (1 + λ²)(τ/κ)′`; zero exactly where the intrinsic
/// whirl equation holds.
pub fn intrinsic_residual(kappa: f64, tau: f64, ratio_prime: f64, lambda: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!("curvature must be positive, got {kappa}")));
    }
    let lambda = WhirlLambda::new(lambda)?.get();
    let l2 = 1.0 + lambda * lambda;
    let h = tau / kappa;
    Ok(tau * lambda * (l2 + h * h) - l2 * ratio_prime)
}

/// Axis of a whirl curve built from one Frenet frame:
/// `±(t + λn + (1+λ²)(κ/τ)b)` normalized.
pub fn whirl_axis(frame: &FrenetApparatus, lambda: f64, sign: Sign) -> Result<Vec3> {
    if frame.tau == 0.0 || !frame.tau.is_finite() {
        return Err(Error::ZeroTorsion);
    }
    let lambda = WhirlLambda::new(lambda)?.get();
    let l2 = 1.0 + lambda * lambda;
    let numerator = frame.t + frame.n * lambda + frame.b * (l2 * frame.kappa / frame.tau);
    let d = numerator.normalized().ok_or(Error::ZeroTorsion)?;
    Ok(d * sign.value())
}

/// Signed defect `⟨n, d⟩ − λ⟨t, d⟩`.
pub fn proportionality_residual(frame: &FrenetApparatus, d: Vec3, lambda: f64) -> f64 {
    frame.n.dot(d) - lambda * frame.t.dot(d)
}

/// Outcome of [`verify_whirl`].
#[derive(Debug, Clone, PartialEq)]
pub struct AxisReport {
    /// Axis at the first grid point.
    pub d: Vec3,
    pub sign: Sign,
    pub per_sample_axes: Vec<Vec3>,
    /// `max_i ‖d_i − d_0‖`.
    pub max_deviation: f64,
    /// `max_i |⟨n_i, d⟩ − λ⟨t_i, d⟩|` against the reported axis.
    pub max_proportionality_residual: f64,
    /// Intrinsic-equation residual per node, with `(τ/κ)′` from grid
    /// differences. Empty for grids shorter than three nodes.
    pub intrinsic_residuals: Vec<f64>,
}

impl AxisReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation < tol && self.max_proportionality_residual < tol
    }

    pub fn max_intrinsic_residual(&self) -> f64 {
        self.intrinsic_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn negated(&self) -> AxisReport {
        AxisReport {
            d: -self.d,
            sign: self.sign.flip(),
            per_sample_axes: self.per_sample_axes.iter().map(|d| -*d).collect(),
            ..self.clone()
        }
    }
}

/// Axis sign making `⟨t(s₀), d⟩ > 0`.
fn conventional_sign(frame: &FrenetApparatus, lambda: f64) -> Result<Sign> {
    let d = whirl_axis(frame, lambda, Sign::Plus)?;
    Ok(if frame.t.dot(d) < 0.0 { Sign::Minus } else { Sign::Plus })
}

/// Checks the whirl property with constant `lambda` along `grid`, using the
/// conventional axis sign.
pub fn verify_whirl<C: Curve + ?Sized>(curve: &C, grid: &[f64], lambda: f64) -> Result<AxisReport> {
    let frames = frames_on(curve, grid, false)?;
    let Some(first) = frames.first() else {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    };
    let sign = conventional_sign(first, lambda)?;
    axis_report(&frames, lambda, sign)
}

/// [`verify_whirl`] with an explicit axis branch.
pub fn verify_whirl_with_sign<C: Curve + ?Sized>(curve: &C, grid: &[f64], lambda: f64, sign: Sign) -> Result<AxisReport> {
    let frames = frames_on(curve, grid, false)?;
    axis_report(&frames, lambda, sign)
}

/// Axis report from precomputed frames.
pub fn axis_report(frames: &[FrenetApparatus], lambda: f64, sign: Sign) -> Result<AxisReport> {
    let per_sample_axes = frames.iter().map(|f| whirl_axis(f, lambda, sign)).collect::<Result<Vec<_>>>()?;
    let Some(&d) = per_sample_axes.first() else {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    };
    let max_deviation = per_sample_axes.iter().fold(0.0, |m: f64, di| m.max((*di - d).norm()));
    let max_proportionality_residual =
        frames.iter().fold(0.0, |m: f64, f| m.max(proportionality_residual(f, d, lambda).abs()));
    let intrinsic_residuals = if frames.len() >= 3 {
        let s: Vec<f64> = frames.iter().map(|f| f.s).collect();
        let h: Vec<f64> = frames.iter().map(|f| f.tau / f.kappa).collect();
        let hp = grid_derivative(&s, &h)?;
        frames
            .iter()
            .zip(hp)
            .map(|(f, hp)| intrinsic_residual(f.kappa, f.tau, hp, lambda))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(AxisReport { d, sign, per_sample_axes, max_deviation, max_proportionality_residual, intrinsic_residuals })
}

/// Least-squares estimate of the whirl constant and axis of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaFit {
    pub lambda: f64,
    pub d: Vec3,
    /// `sqrt(mean_i (⟨n_i, d⟩ − λ⟨t_i, d⟩)²)`.
    pub rms_residual: f64,
    /// Smallest `|τ/κ|` seen on the grid.
    pub min_abs_ratio: f64,
}

/// Why a fitted curve is not accepted as a whirl curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    Residual,
    ZeroLambda,
    ZeroTorsion,
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rejection::Residual => "proportionality residual above tolerance",
            Rejection::ZeroLambda => "fitted lambda is zero",
            Rejection::ZeroTorsion => "torsion vanishes: not a whirl curve",
        })
    }
}

impl LambdaFit {
    /// Verdict: small residual, `λ ≠ 0` and nowhere-vanishing torsion.
    pub fn verdict(&self, rms_tol: f64) -> std::result::Result<(), Rejection> {
        if self.min_abs_ratio < 1e-6 {
            Err(Rejection::ZeroTorsion)
        } else if self.lambda.abs() < 1e-6 {
            Err(Rejection::ZeroLambda)
        } else if !(self.rms_residual < rms_tol) {
            Err(Rejection::Residual)
        } else {
            Ok(())
        }
    }
}

struct NormalSystem {
    nn: Matrix3<f64>,
    nt: Matrix3<f64>,
    tt: Matrix3<f64>,
    count: usize,
}

impl NormalSystem {
    fn new(frames: &[FrenetApparatus]) -> Self {
        let v = |a: Vec3| Vector3::new(a.x, a.y, a.z);
        let mut nn = Matrix3::zeros();
        let mut nt = Matrix3::zeros();
        let mut tt = Matrix3::zeros();
        for f in frames {
            let (n, t) = (v(f.n), v(f.t));
            nn += n * n.transpose();
            nt += n * t.transpose() + t * n.transpose();
            tt += t * t.transpose();
        }
        Self { nn, nt, tt, count: frames.len() }
    }

    /// Sum of squared residuals for fixed `λ` as a quadratic form in `d`.
    fn matrix(&self, lambda: f64) -> Matrix3<f64> {
        self.nn - self.nt * lambda + self.tt * (lambda * lambda)
    }

    /// Smallest eigenpair, plus the gap to the next eigenvalue.
    fn smallest(&self, lambda: f64) -> (f64, Vector3<f64>, f64) {
        let eig = SymmetricEigen::new(self.matrix(lambda));
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let i = order[0];
        let gap = eig.eigenvalues[order[1]] - eig.eigenvalues[i];
        (eig.eigenvalues[i].max(0.0), eig.eigenvectors.column(i).into_owned(), gap)
    }

    fn objective(&self, lambda: f64) -> f64 {
        self.smallest(lambda).0
    }
}

fn clamp_lambda(l: f64) -> f64 {
    let l = l.clamp(-LAMBDA_BRACKET, LAMBDA_BRACKET);
    if l.abs() < MIN_LAMBDA {
        if l < 0.0 {
            -MIN_LAMBDA
        } else {
            MIN_LAMBDA
        }
    } else {
        l
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Fits `(λ, d)` minimizing `Σ(⟨n_i, d⟩ − λ⟨t_i, d⟩)²` over unit `d` and
/// `λ ∈ [−10⁴, 10⁴]`, `|λ| ≥ 10⁻¹²`.
///
/// For fixed `λ` the optimal `d` is the unit eigenvector of the smallest
/// eigenvalue of the 3×3 normal matrix; `λ` is found by a scan in
/// `asinh`-space followed by golden-section refinement. Ties go to the
/// smallest `|λ|`; the axis sign makes `⟨t(s₀), d⟩ > 0`, else the first
/// nonzero component positive.
pub fn fit_lambda_axis<C: Curve + ?Sized>(curve: &C, grid: &[f64]) -> Result<LambdaFit> {
    if grid.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: grid.len() });
    }
    let frames = frames_on(curve, grid, false)?;
    fit_lambda_axis_frames(&frames)
}

/// [`fit_lambda_axis`] on precomputed frames.
pub fn fit_lambda_axis_frames(frames: &[FrenetApparatus]) -> Result<LambdaFit> {
    if frames.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: frames.len() });
    }
    let sys = NormalSystem::new(frames);
    let scale = sys.nn.trace() + sys.tt.trace();

    const STEPS: usize = 4000;
    let x_max = LAMBDA_BRACKET.asinh();
    let xs: Vec<f64> = (0..=STEPS).map(|i| -x_max + 2.0 * x_max * i as f64 / STEPS as f64).collect();
    let values: Vec<f64> = xs.iter().map(|&x| sys.objective(clamp_lambda(x.sinh()))).collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tie = best + 1e-14 * scale;
    // smallest |λ| among the tied minima
    let k = (0..=STEPS)
        .filter(|&i| values[i] <= tie)
        .min_by(|&a, &b| xs[a].abs().total_cmp(&xs[b].abs()).then(a.cmp(&b)))
        .expect("scan is non-empty");

    let lo = xs[k.saturating_sub(1)];
    let hi = xs[(k + 1).min(STEPS)];
    let x = golden_section(|x| sys.objective(clamp_lambda(x.sinh())), lo, hi, 120);
    let mut lambda = clamp_lambda(x.sinh());
    if sys.objective(lambda) > values[k] {
        lambda = clamp_lambda(xs[k].sinh());
    }

    // alternate exact updates of d and λ; each step cannot increase the objective
    let (mut mu, mut dv, mut gap) = sys.smallest(lambda);
    for _ in 0..50 {
        let tt = (dv.transpose() * sys.tt * dv)[0];
        if tt <= 0.0 {
            break;
        }
        let nt = 0.5 * (dv.transpose() * sys.nt * dv)[0];
        let next = clamp_lambda(nt / tt);
        let (m2, d2, g2) = sys.smallest(next);
        if !(m2 < mu) {
            break;
        }
        let done = (next - lambda).abs() <= 1e-15 * lambda.abs().max(1.0);
        (lambda, mu, dv, gap) = (next, m2, d2, g2);
        if done {
            break;
        }
    }

    if !(gap > 1e-12 * scale) {
        return Err(Error::NoStableFit(format!("axis not unique at lambda = {lambda} (eigenvalue gap {gap:e})")));
    }

    let mut d = Vec3::new(dv[0], dv[1], dv[2]).normalized().ok_or_else(|| Error::NoStableFit("zero axis".into()))?;
    let along = frames[0].t.dot(d);
    let flip = if along.abs() > 1e-12 {
        along < 0.0
    } else {
        d.to_array().into_iter().find(|c| c.abs() > 1e-12).is_some_and(|c| c < 0.0)
    };
    if flip {
        d = -d;
    }
    let rms_residual = (mu / sys.count as f64).sqrt();
    let min_abs_ratio = frames.iter().map(|f| (f.tau / f.kappa).abs()).fold(f64::INFINITY, f64::min);
    Ok(LambdaFit { lambda, d, rms_residual, min_abs_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frenet::FnCurve;
    use crate::numerics::linspace;

    fn frame(t: Vec3, n: Vec3, kappa: f64, tau: f64) -> FrenetApparatus {
        FrenetApparatus { s: 0.0, t, n, b: t.cross(n), kappa, tau }
    }

    #[test]
    fn helix_is_not_a_whirl_curve() {
        // constant ratio: (τ/κ)' = 0 leaves τλ(1+λ²+h²)
        assert_eq!(intrinsic_residual(1.0, 1.0, 0.0, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn linear_ratio_family_satisfies_intrinsic_equation() {
        // h = s, λ = 1 at s = 1: κ = 2/3, τ = hκ, h' = 1
        let r = intrinsic_residual(2.0 / 3.0, 2.0 / 3.0, 1.0, 1.0).unwrap();
        assert!(r.abs() < 1e-15, "{r}");
    }

    #[test]
    fn residual_is_odd_under_mirror() {
        // a reflection flips τ and (τ/κ)′ and keeps λ
        let (k, t, hp, l) = (0.7, 1.3, -0.4, 2.5);
        let a = intrinsic_residual(k, t, hp, l).unwrap();
        let b = intrinsic_residual(k, -t, -hp, l).unwrap();
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn residual_rejects_bad_inputs() {
        assert!(intrinsic_residual(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(intrinsic_residual(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn axis_from_standard_frame() {
        let f = frame(Vec3::X, Vec3::Y, 1.0, 1.0);
        let d = whirl_axis(&f, 1.0, Sign::Plus).unwrap();
        let expected = Vec3::new(1.0, 1.0, 2.0) / 6f64.sqrt();
        assert!((d - expected).norm() < 1e-15);
        let m = whirl_axis(&f, 1.0, Sign::Minus).unwrap();
        assert_eq!(m, -d);
        assert!(proportionality_residual(&f, d, 1.0).abs() < 1e-15);
    }

    #[test]
    fn axis_requires_torsion() {
        let f = frame(Vec3::X, Vec3::Y, 1.0, 0.0);
        assert_eq!(whirl_axis(&f, 1.0, Sign::Plus).unwrap_err(), Error::ZeroTorsion);
    }

    #[test]
    fn proportionality_examples() {
        let f = frame(Vec3::X, Vec3::Y, 1.0, 0.5);
        assert_eq!(proportionality_residual(&f, Vec3::Z, 3.7), 0.0);
        assert_eq!(proportionality_residual(&f, Vec3::X, 2.0), -2.0);
    }

    #[test]
    fn circular_helix_fails_verification() {
        let c = 2f64.sqrt();
        let helix = FnCurve(move |s: f64| Vec3::new((s / c).cos(), (s / c).sin(), s / c));
        let grid = linspace(0.0, 3.0, 31);
        let lambda = 0.8;
        let report = verify_whirl(&helix, &grid, lambda).unwrap();
        // κ = τ = 1/2
        let bound = 0.5 * lambda * (1.0 + lambda * lambda);
        assert!(report.intrinsic_residuals.iter().all(|r| r.abs() >= bound * 0.999));
        assert!(!report.passes(1e-6));

        let fit = fit_lambda_axis(&helix, &grid).unwrap();
        assert!(fit.verdict(1e-6).is_err());
    }

    #[test]
    fn planar_circle_is_rejected_for_zero_torsion() {
        let circle = FnCurve(|s: f64| Vec3::new(s.cos(), s.sin(), 0.0));
        let fit = fit_lambda_axis(&circle, &linspace(0.0, 5.0, 40)).unwrap();
        assert!(fit.rms_residual.is_finite());
        assert_eq!(fit.verdict(1e-3), Err(Rejection::ZeroTorsion));
    }

    #[test]
    fn fit_needs_four_points() {
        let circle = FnCurve(|s: f64| Vec3::new(s.cos(), s.sin(), 0.0));
        assert!(matches!(fit_lambda_axis(&circle, &[0.0, 1.0, 2.0]), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn lambda_newtype_guards_zero() {
        assert!(WhirlLambda::new(1e-13).is_err());
        assert_eq!(WhirlLambda::new(-2.0).unwrap().get(), -2.0);
    }
}
