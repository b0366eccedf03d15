//! The closed-form whirl-rectifying family `σ`, its continuous extension
//! `Ω`, the sphere curve `w` with its extension `Υ`, and the cone and
//! hyperboloid they live on.
//!
//! With `h = as + b`, `R = 1 + λ²`, `P = R + h²` and
//! `A = arctanh(√(R/P))/λ`:
//!
//! ```text
//! σ(s) = (1/a) (h λ/√R cos A, −h λ/√R sin A, √P/√R)
//! ```
//!
//! The ratio `τ/κ` of `σ` equals `ε h` and its whirl constant is `ε λ`, where
//! `ε = sgn(λ a h)`; on the half-line where `λ a h > 0` these are `h` and `λ`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::frenet::{frames_on, frenet_at, trace_with, Curve, CurveTrace, ParamKind};
use crate::numerics::{self, DerivOrder};
use crate::vec3::Vec3;
use crate::whirl::WhirlLambda;

/// `|as + b|` below which Frenet quantities of `σ` are not evaluated.
pub const SEAM_EXCLUSION: f64 = 1e-4;

/// Which side of the seam `s = −b/a` a curve lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// `as + b > 0`
    #[default]
    Plus,
    /// `as + b < 0`
    Minus,
}

impl Branch {
    pub fn of(h: f64) -> Option<Branch> {
        if h > 0.0 {
            Some(Branch::Plus)
        } else if h < 0.0 {
            Some(Branch::Minus)
        } else {
            None
        }
    }

    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectifyingSpec {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// Phase shift `d` of the sphere parameter.
    pub d_shift: f64,
    pub branch: Branch,
}

/// A point `X(t, u) = u w(t)` of the cone over the sphere curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    pub t: f64,
    pub u: f64,
}

impl RectifyingSpec {
    pub fn new(a: f64, b: f64, lambda: f64, d_shift: f64, branch: Branch) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("a must be finite and nonzero, got {a}")));
        }
        WhirlLambda::new(lambda)?;
        if !b.is_finite() || !d_shift.is_finite() {
            return Err(Error::InvalidArgument("b and d must be finite".into()));
        }
        Ok(Self { a, b, lambda, d_shift, branch })
    }

    pub fn with_branch(self, branch: Branch) -> Self {
        Self { branch, ..self }
    }

    /// `h(s) = as + b`.
    pub fn h(&self, s: f64) -> f64 {
        self.a * s + self.b
    }

    /// The seam `s = −b/a`.
    pub fn seam(&self) -> f64 {
        -self.b / self.a
    }

    /// The seam of the sphere parameter, `t = −d`.
    pub fn sphere_seam(&self) -> f64 {
        -self.d_shift
    }

    /// Apex `(0, 0, 1/a)` of the hyperboloid sheet.
    pub fn apex(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, 1.0 / self.a)
    }

    fn r(&self) -> f64 {
        1.0 + self.lambda * self.lambda
    }

    /// `ε = sgn(λ a h)` on the spec's branch.
    pub fn orientation(&self) -> f64 {
        (self.lambda * self.a).signum() * self.branch.sign()
    }

    /// Whirl constant of `σ` on the spec's branch: `ε λ`.
    pub fn whirl_constant(&self) -> f64 {
        self.orientation() * self.lambda
    }

    /// The line `τ/κ = c1 s + c2` followed by `σ` on the spec's branch.
    pub fn ratio_line(&self) -> (f64, f64) {
        let e = self.orientation();
        (e * self.a, e * self.b)
    }

    /// Parameter interval of the sphere curve on the spec's branch.
    pub fn sphere_interval(&self) -> (f64, f64) {
        let d = self.d_shift;
        match self.branch {
            Branch::Plus => (-d, -d + FRAC_PI_2),
            Branch::Minus => (-d - FRAC_PI_2, -d),
        }
    }

    /// `a · σ` as a function of `h ≠ 0`.
    fn profile(&self, h: f64) -> Vec3 {
        let (a_angle, p) = self.phase(h);
        let r = self.r();
        let c = self.lambda / r.sqrt();
        let (sa, ca) = a_angle.sin_cos();
        Vec3::new(h * c * ca, -h * c * sa, (p / r).sqrt())
    }

    /// `(A, P)` with `A = arctanh(√(R/P))/λ`, evaluated as
    /// `ln(1 + x) − ½ ln(1 − x²)` and `1 − x² = h²/P`.
    fn phase(&self, h: f64) -> (f64, f64) {
        let r = self.r();
        let p = r + h * h;
        let x = (r / p).sqrt();
        let atanh = x.ln_1p() - (h.abs().ln() - 0.5 * p.ln());
        (atanh / self.lambda, p)
    }

    /// Exact derivative of `σ` with respect to `s`, `h ≠ 0`.
    fn sigma_velocity(&self, h: f64) -> Vec3 {
        let (a_angle, p) = self.phase(h);
        let r = self.r();
        let c = self.lambda / r.sqrt();
        let (sa, ca) = a_angle.sin_cos();
        let ip = 1.0 / p.sqrt();
        Vec3::new(c * ca + sa * ip, -c * sa + ca * ip, h * ip / r.sqrt())
    }
}

/// The whirl-rectifying curve at `s` on the spec's branch.
pub fn sigma(spec: &RectifyingSpec, s: f64) -> Result<Vec3> {
    let h = spec.h(s);
    match Branch::of(h) {
        None => Err(Error::Seam { s }),
        Some(b) if b != spec.branch => Err(Error::BranchMismatch { s, h }),
        Some(_) => Ok(spec.profile(h) / spec.a),
    }
}

/// `z² − (x² + y²)/λ² − 1/a²`.
pub fn hyperboloid_residual(p: Vec3, lambda: f64, a: f64) -> f64 {
    p.z * p.z - (p.x * p.x + p.y * p.y) / (lambda * lambda) - 1.0 / (a * a)
}

fn sphere_point(spec: &RectifyingSpec, t: f64) -> Vec3 {
    let u = spec.d_shift + t;
    let (su, cu) = u.sin_cos();
    let (a_angle, _) = spec.phase(su / cu);
    let r = spec.r();
    let c = spec.lambda / r.sqrt();
    let (sa, ca) = a_angle.sin_cos();
    let z = ((1.0 + spec.lambda * spec.lambda * cu * cu) / r).sqrt();
    Vec3::new(c * su * ca, -c * su * sa, z) * spec.a.signum()
}

/// The unit-speed sphere curve `w(t)` on the spec's branch interval.
pub fn sphere_curve_w(spec: &RectifyingSpec, t: f64) -> Result<Vec3> {
    let (lo, hi) = spec.sphere_interval();
    if !(t > lo && t < hi) {
        return Err(Error::SphereSeam { t });
    }
    Ok(sphere_point(spec, t))
}

/// `X(t, u) = u w(t)`.
pub fn cone_point(spec: &RectifyingSpec, cp: ConePoint) -> Result<Vec3> {
    if !(cp.u > 0.0) {
        return Err(Error::InvalidArgument(format!("cone radius must be positive, got {}", cp.u)));
    }
    Ok(sphere_curve_w(spec, cp.t)? * cp.u)
}

/// `t(s) = −d + arctan(as + b)`, `u(s) = √(1 + (as + b)²)/|a|`.
pub fn change_of_vars(spec: &RectifyingSpec, s: f64) -> ConePoint {
    let h = spec.h(s);
    ConePoint { t: -spec.d_shift + h.atan(), u: h.hypot(1.0) / spec.a.abs() }
}

/// Unit normal of the cone patch `X(t, u) = u Υ(t)`, along `∂X/∂t × ∂X/∂u`.
pub fn cone_normal(spec: &RectifyingSpec, t: f64, u: f64) -> Result<Vec3> {
    if !(u > 1e-12) {
        return Err(Error::DegenerateSurface { u });
    }
    let w = upsilon(spec, t)?;
    let dw = numerics::derivative(|x| upsilon(spec, x), t, DerivOrder::First)?;
    (dw * u).cross(w).normalized().ok_or(Error::DegenerateSurface { u })
}

/// `‖N̂ × n̂‖` between the unit cone normal and the Frenet normal of a curve;
/// zero iff they are parallel.
pub fn normal_alignment(surface_normal: Vec3, curve_normal: Vec3) -> f64 {
    match (surface_normal.normalized(), curve_normal.normalized()) {
        (Some(a), Some(b)) => a.cross(b).norm(),
        _ => f64::NAN,
    }
}

/// Geodesic defect of `σ` on its cone at `s`.
pub fn geodesic_residual(spec: &RectifyingSpec, s: f64) -> Result<f64> {
    let cp = change_of_vars(spec, s);
    let surface = cone_normal(spec, cp.t, cp.u)?;
    let frame = frenet_at(&SigmaCurve(*spec), s, true)?;
    Ok(normal_alignment(surface, frame.n))
}

/// The continuous extension of `σ` to all of ℝ: the closed form off the
/// seam, the apex `(0, 0, 1/a)` on it.
pub fn omega(spec: &RectifyingSpec, s: f64) -> Vec3 {
    let h = spec.h(s);
    if h == 0.0 {
        spec.apex()
    } else {
        spec.profile(h) / spec.a
    }
}

/// The continuous extension of `w` to `(−d − π/2, −d + π/2)`, equal to
/// `(0, 0, |a|/a)` at `t = −d`.
pub fn upsilon(spec: &RectifyingSpec, t: f64) -> Result<Vec3> {
    let (lo, hi) = (-spec.d_shift - FRAC_PI_2, -spec.d_shift + FRAC_PI_2);
    if !(t > lo && t < hi) {
        return Err(Error::OutOfInterval { value: t, lo, hi });
    }
    if t == -spec.d_shift {
        Ok(Vec3::new(0.0, 0.0, spec.a.signum()))
    } else {
        Ok(sphere_point(spec, t))
    }
}

/// `σ` as a [`Curve`], with exact velocity.
#[derive(Debug, Clone, Copy)]
pub struct SigmaCurve(pub RectifyingSpec);

impl Curve for SigmaCurve {
    fn position(&self, s: f64) -> Result<Vec3> {
        sigma(&self.0, s)
    }

    fn velocity(&self, s: f64) -> Option<Result<Vec3>> {
        Some(sigma(&self.0, s).map(|_| self.0.sigma_velocity(self.0.h(s))))
    }
}

/// `Ω` as a [`Curve`], with exact velocity off the seam.
#[derive(Debug, Clone, Copy)]
pub struct OmegaCurve(pub RectifyingSpec);

impl Curve for OmegaCurve {
    fn position(&self, s: f64) -> Result<Vec3> {
        Ok(omega(&self.0, s))
    }

    fn velocity(&self, s: f64) -> Option<Result<Vec3>> {
        let h = self.0.h(s);
        Some(if h == 0.0 { Err(Error::Seam { s }) } else { Ok(self.0.sigma_velocity(h)) })
    }
}

/// Least-squares line through `τ/κ` against arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChenFit {
    pub c1: f64,
    pub c2: f64,
    pub rms: f64,
}

impl ChenFit {
    /// Linear with nonzero slope, to within `tol`.
    pub fn is_rectifying(&self, tol: f64) -> bool {
        self.rms < tol && self.c1.abs() > tol
    }
}

/// Fits `τ/κ ≈ c1 s + c2` over the grid.
pub fn chen_ratio_fit<C: Curve + ?Sized>(curve: &C, grid: &[f64]) -> Result<ChenFit> {
    if grid.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: grid.len() });
    }
    let frames = frames_on(curve, grid, false)?;
    if frames.iter().any(|f| f.tau == 0.0) {
        return Err(Error::ZeroTorsion);
    }
    let pts: Vec<(f64, f64)> = frames.iter().map(|f| (f.s, f.tau / f.kappa)).collect();
    let n = pts.len() as f64;
    let (ms, mr) = pts.iter().fold((0.0, 0.0), |(a, b), (s, r)| (a + s / n, b + r / n));
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(xx, xy), (s, r)| (xx + (s - ms) * (s - ms), xy + (s - ms) * (r - mr)));
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument("grid has no spread".into()));
    }
    let c1 = sxy / sxx;
    let c2 = mr - c1 * ms;
    let rms = (pts.iter().map(|(s, r)| (r - c1 * s - c2).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ChenFit { c1, c2, rms })
}

/// `Ω` sampled on `n` uniform parameters of `[lo, hi]`.
pub fn omega_trace(spec: &RectifyingSpec, lo: f64, hi: f64, n: usize) -> Result<CurveTrace> {
    trace_with(lo, hi, n, ParamKind::S, |s| Ok(omega(spec, s)))
}

/// `Υ` sampled on `n` uniform parameters of `[lo, hi]`.
pub fn upsilon_trace(spec: &RectifyingSpec, lo: f64, hi: f64, n: usize) -> Result<CurveTrace> {
    trace_with(lo, hi, n, ParamKind::T, |t| upsilon(spec, t))
}

/// `σ` sampled on `n` uniform parameters of `[lo, hi]`.
pub fn sigma_trace(spec: &RectifyingSpec, lo: f64, hi: f64, n: usize) -> Result<CurveTrace> {
    trace_with(lo, hi, n, ParamKind::S, |s| sigma(spec, s))
}
