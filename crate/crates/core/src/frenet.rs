//! Frenet-Serret apparatus of parametric curves, unit-speed validation and
//! sampled traces.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::numerics::{self, DerivOrder};
use crate::vec3::Vec3;

/// Curvature below which the principal normal is declared undefined.
pub const CURVATURE_THRESHOLD: f64 = 1e-9;
/// Allowed deviation of the speed from 1 in strict mode.
pub const UNIT_SPEED_TOL: f64 = 1e-6;

/// A regular parametric curve in 3-space.
///
/// Only `position` is required. Implementors that know more can supply an
/// exact velocity (the frame then differentiates the velocity instead of the
/// position, which gains two orders of accuracy) or the full jet.
pub trait Curve: Send + Sync {
    fn position(&self, s: f64) -> Result<Vec3>;

    fn velocity(&self, _s: f64) -> Option<Result<Vec3>> {
        None
    }

    /// `(α′, α″, α‴)` at `s`.
    fn jet(&self, _s: f64) -> Option<Result<[Vec3; 3]>> {
        None
    }
}

impl<C: Curve + ?Sized> Curve for &C {
    fn position(&self, s: f64) -> Result<Vec3> {
        (**self).position(s)
    }
    fn velocity(&self, s: f64) -> Option<Result<Vec3>> {
        (**self).velocity(s)
    }
    fn jet(&self, s: f64) -> Option<Result<[Vec3; 3]>> {
        (**self).jet(s)
    }
}

/// Adapts a closure `s -> point` into a [`Curve`].
#[derive(Clone, Copy)]
pub struct FnCurve<F>(pub F);

impl<F> Curve for FnCurve<F>
where
    F: Fn(f64) -> Vec3 + Send + Sync,
{
    fn position(&self, s: f64) -> Result<Vec3> {
        Ok((self.0)(s))
    }
}

/// A curve given by its position and its exact velocity.
#[derive(Clone, Copy)]
pub struct FnCurveWithVelocity<F, G>(pub F, pub G);

impl<F, G> Curve for FnCurveWithVelocity<F, G>
where
    F: Fn(f64) -> Vec3 + Send + Sync,
    G: Fn(f64) -> Vec3 + Send + Sync,
{
    fn position(&self, s: f64) -> Result<Vec3> {
        Ok((self.0)(s))
    }
    fn velocity(&self, s: f64) -> Option<Result<Vec3>> {
        Some(Ok((self.1)(s)))
    }
}

/// Tangent, normal, binormal, curvature and torsion at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetApparatus {
    pub s: f64,
    pub t: Vec3,
    pub n: Vec3,
    pub b: Vec3,
    pub kappa: f64,
    pub tau: f64,
}

impl FrenetApparatus {
    /// Largest violation of orthonormality and of `b = t × n`.
    pub fn frame_defect(&self) -> f64 {
        let unit = [self.t, self.n, self.b].map(|v| (v.norm() - 1.0).abs());
        let ortho = [self.t.dot(self.n), self.t.dot(self.b), self.n.dot(self.b)].map(f64::abs);
        let hand = (self.b - self.t.cross(self.n)).norm();
        unit.into_iter().chain(ortho).fold(hand, f64::max)
    }

    /// Builds the apparatus from the first three derivatives, for any
    /// regular parametrization.
    pub fn from_derivatives(s: f64, d1: Vec3, d2: Vec3, d3: Vec3) -> Result<Self> {
        let speed = d1.norm();
        if !(speed > 0.0) {
            return Err(Error::UndefinedFrame { s, kappa: 0.0 });
        }
        let c = d1.cross(d2);
        let c_norm = c.norm();
        let kappa = c_norm / (speed * speed * speed);
        if !(kappa >= CURVATURE_THRESHOLD) {
            return Err(Error::UndefinedFrame { s, kappa });
        }
        let tau = c.dot(d3) / (c_norm * c_norm);
        let t = d1 / speed;
        let b = c / c_norm;
        let n = b.cross(t);
        Ok(Self { s, t, n, b, kappa, tau })
    }
}

fn derivatives<C: Curve + ?Sized>(curve: &C, s: f64) -> Result<[Vec3; 3]> {
    if let Some(jet) = curve.jet(s) {
        return jet;
    }
    if let Some(v) = curve.velocity(s) {
        let v = v?;
        let vel = |x: f64| curve.velocity(x).unwrap_or_else(|| curve.position(x));
        let a = numerics::extrapolated_derivative(vel, s, DerivOrder::First)?;
        let j = numerics::extrapolated_derivative(vel, s, DerivOrder::Second)?;
        return Ok([v, a, j]);
    }
    let pos = |x: f64| curve.position(x);
    Ok([
        numerics::extrapolated_derivative(pos, s, DerivOrder::First)?,
        numerics::extrapolated_derivative(pos, s, DerivOrder::Second)?,
        numerics::extrapolated_derivative(pos, s, DerivOrder::Third)?,
    ])
}

/// Frenet apparatus of `curve` at `s`.
///
/// With `strict` set, the curve must be arc-length parametrized to within
/// [`UNIT_SPEED_TOL`]; otherwise any regular parametrization is accepted and
/// the general-speed formulas are used.
pub fn frenet_at<C: Curve + ?Sized>(curve: &C, s: f64, strict: bool) -> Result<FrenetApparatus> {
    let [d1, d2, d3] = derivatives(curve, s)?;
    let speed = d1.norm();
    if strict && (speed - 1.0).abs() > UNIT_SPEED_TOL {
        return Err(Error::NotArcLength { s, speed });
    }
    FrenetApparatus::from_derivatives(s, d1, d2, d3)
}

/// Frames at every grid point, failing on the first bad node.
pub fn frames_on<C: Curve + ?Sized>(curve: &C, grid: &[f64], strict: bool) -> Result<Vec<FrenetApparatus>> {
    grid.iter()
        .enumerate()
        .map(|(index, &s)| frenet_at(curve, s, strict).map_err(|e| Error::Node { index, s, source: Box::new(e) }))
        .collect()
}

/// `max |‖α′(s)‖ − 1|` over the grid, from central differences of the
/// position.
pub fn unit_speed_residual<C: Curve + ?Sized>(curve: &C, grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (index, &s) in grid.iter().enumerate() {
        let v = numerics::derivative(|x| curve.position(x), s, DerivOrder::First)
            .map_err(|e| Error::Node { index, s, source: Box::new(e) })?;
        worst = worst.max((v.norm() - 1.0).abs());
    }
    Ok(worst)
}

/// Name of the sampling parameter of a trace: arc length `s` for space
/// curves, `t` for the sphere curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParamKind {
    #[default]
    S,
    T,
}

impl ParamKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamKind::S => "s",
            ParamKind::T => "t",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "s" => Some(ParamKind::S),
            "t" => Some(ParamKind::T),
            _ => None,
        }
    }
}

/// Ordered samples `(s, p)` of a curve with free-form metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveTrace {
    pub parameter: ParamKind,
    samples: Vec<(f64, Vec3)>,
    pub meta: BTreeMap<String, Value>,
}

impl CurveTrace {
    /// Validates that parameters strictly increase and every value is finite.
    pub fn new(parameter: ParamKind, samples: Vec<(f64, Vec3)>) -> Result<Self> {
        for (index, &(s, p)) in samples.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::NonFinite { at: index as f64, value: s });
            }
            if let Some(value) = p.first_non_finite() {
                return Err(Error::NonFinite { at: s, value });
            }
        }
        if let Some(w) = samples.windows(2).find(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidArgument(format!(
                "sample parameters must strictly increase ({} then {})",
                w[0].0, w[1].0
            )));
        }
        Ok(Self { parameter, samples, meta: BTreeMap::new() })
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_owned(), value.into());
        self
    }

    pub fn samples(&self) -> &[(f64, Vec3)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn params(&self) -> Vec<f64> {
        self.samples.iter().map(|(s, _)| *s).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.samples.iter().map(|(_, p)| *p)
    }

    pub fn map_points(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        Self {
            parameter: self.parameter,
            samples: self.samples.iter().map(|&(s, p)| (s, f(p))).collect(),
            meta: self.meta.clone(),
        }
    }
}

/// Samples `curve` on `n ≥ 2` uniformly spaced parameters including both ends.
pub fn trace<C: Curve + ?Sized>(curve: &C, s_lo: f64, s_hi: f64, n: usize) -> Result<CurveTrace> {
    trace_with(s_lo, s_hi, n, ParamKind::S, |s| curve.position(s))
}

pub(crate) fn trace_with(
    lo: f64,
    hi: f64,
    n: usize,
    parameter: ParamKind,
    eval: impl Fn(f64) -> Result<Vec3>,
) -> Result<CurveTrace> {
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}]")));
    }
    let samples = numerics::linspace(lo, hi, n)
        .into_iter()
        .enumerate()
        .map(|(index, s)| eval(s).map(|p| (s, p)).map_err(|e| Error::Node { index, s, source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    CurveTrace::new(parameter, samples)
}

/// Default stencil width of [`SampledCurve`].
pub const DEFAULT_STENCIL: usize = 9;

/// A continuous view of a [`CurveTrace`]: local polynomial interpolation on
/// the `stencil` nearest samples, differentiated exactly.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    params: Vec<f64>,
    points: Vec<Vec3>,
    stencil: usize,
}

impl SampledCurve {
    pub fn new(trace: &CurveTrace, stencil: usize) -> Result<Self> {
        if stencil < 4 {
            return Err(Error::InvalidArgument(format!("stencil must have at least 4 nodes, got {stencil}")));
        }
        if trace.len() < stencil {
            return Err(Error::InsufficientSamples { needed: stencil, got: trace.len() });
        }
        Ok(Self { params: trace.params(), points: trace.points().collect(), stencil })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn window(&self, s: f64) -> std::ops::Range<usize> {
        let n = self.params.len();
        let idx = self.params.partition_point(|&x| x < s);
        let nearest = if idx == 0 {
            0
        } else if idx >= n {
            n - 1
        } else if (s - self.params[idx - 1]) <= (self.params[idx] - s) {
            idx - 1
        } else {
            idx
        };
        let start = nearest.saturating_sub(self.stencil / 2).min(n - self.stencil);
        start..start + self.stencil
    }

    fn combine(&self, s: f64, order: usize) -> Result<Vec<Vec3>> {
        let (lo, hi) = (self.params[0], self.params[self.params.len() - 1]);
        if s < lo || s > hi {
            return Err(Error::OutOfInterval { value: s, lo, hi });
        }
        let range = self.window(s);
        let w = numerics::fd_weights(s, &self.params[range.clone()], order);
        Ok(w.iter()
            .map(|row| row.iter().zip(&self.points[range.clone()]).fold(Vec3::ZERO, |acc, (c, p)| acc + *p * *c))
            .collect())
    }
}

impl Curve for SampledCurve {
    fn position(&self, s: f64) -> Result<Vec3> {
        Ok(self.combine(s, 0)?[0])
    }

    fn jet(&self, s: f64) -> Option<Result<[Vec3; 3]>> {
        Some(self.combine(s, 3).map(|d| [d[1], d[2], d[3]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3::Rotation;

    fn helix(a: f64, b: f64) -> impl Curve {
        let c = (a * a + b * b).sqrt();
        FnCurve(move |s: f64| Vec3::new(a * (s / c).cos(), a * (s / c).sin(), b * s / c))
    }

    #[test]
    fn unit_circle_has_unit_curvature_and_no_torsion() {
        let circle = FnCurve(|s: f64| Vec3::new(s.cos(), s.sin(), 0.0));
        for s in [-2.0, 0.0, 0.7, 3.0] {
            let f = frenet_at(&circle, s, true).unwrap();
            assert!((f.kappa - 1.0).abs() < 1e-6, "{}", f.kappa);
            assert!(f.tau.abs() < 1e-6);
            assert!(f.frame_defect() < 1e-9);
        }
    }

    #[test]
    fn helix_curvature_and_torsion() {
        // a/(a²+b²), b/(a²+b²)
        let f = frenet_at(&helix(1.0, 1.0), 0.4, true).unwrap();
        assert!((f.kappa - 0.5).abs() < 1e-6);
        assert!((f.tau - 0.5).abs() < 1e-5);
        let f = frenet_at(&helix(2.0, 0.5), -1.1, true).unwrap();
        assert!((f.kappa - 2.0 / 4.25).abs() < 1e-6);
        assert!((f.tau - 0.5 / 4.25).abs() < 1e-5);
    }

    #[test]
    fn analytic_velocity_improves_torsion() {
        let c = 2f64.sqrt();
        let curve = FnCurveWithVelocity(
            move |s: f64| Vec3::new((s / c).cos(), (s / c).sin(), s / c),
            move |s: f64| Vec3::new(-(s / c).sin() / c, (s / c).cos() / c, 1.0 / c),
        );
        let f = frenet_at(&curve, 0.9, true).unwrap();
        assert!((f.tau - 0.5).abs() < 1e-8, "{}", f.tau);
        assert!((f.kappa - 0.5).abs() < 1e-9);
    }

    #[test]
    fn straight_line_has_no_frame() {
        let line = FnCurve(|s: f64| Vec3::new(s, 2.0 * s, 0.0) / 5f64.sqrt());
        let e = frenet_at(&line, 0.3, true).unwrap_err();
        assert!(matches!(e, Error::UndefinedFrame { .. }));
    }

    #[test]
    fn strict_mode_rejects_non_arc_length() {
        let fast = FnCurve(|s: f64| Vec3::new((2.0 * s).cos(), (2.0 * s).sin(), 0.0));
        assert!(matches!(frenet_at(&fast, 0.1, true), Err(Error::NotArcLength { .. })));
        // general-speed formulas still give the geometric curvature
        let f = frenet_at(&fast, 0.1, false).unwrap();
        assert!((f.kappa - 1.0).abs() < 1e-6);
    }

    /// Arc-length helix moved by a rigid motion, with exact derivatives.
    struct JetHelix {
        a: f64,
        b: f64,
        rot: Rotation,
        shift: Vec3,
    }

    impl Curve for JetHelix {
        fn position(&self, s: f64) -> Result<Vec3> {
            let c = (self.a * self.a + self.b * self.b).sqrt();
            let p = Vec3::new(self.a * (s / c).cos(), self.a * (s / c).sin(), self.b * s / c);
            Ok(self.rot.apply(p) + self.shift)
        }
        fn jet(&self, s: f64) -> Option<Result<[Vec3; 3]>> {
            let c = (self.a * self.a + self.b * self.b).sqrt();
            let (sn, cs) = (s / c).sin_cos();
            let a = self.a;
            let d1 = Vec3::new(-a * sn / c, a * cs / c, self.b / c);
            let d2 = Vec3::new(-a * cs / (c * c), -a * sn / (c * c), 0.0);
            let d3 = Vec3::new(a * sn / (c * c * c), -a * cs / (c * c * c), 0.0);
            Some(Ok([d1, d2, d3].map(|v| self.rot.apply(v))))
        }
    }

    #[test]
    fn rigid_rotation_preserves_curvature_and_torsion() {
        let still = JetHelix { a: 1.3, b: 0.7, rot: Rotation::about_axis(Vec3::Z, 0.0), shift: Vec3::ZERO };
        let moved = JetHelix { rot: Rotation::about_axis(Vec3::new(0.3, -1.0, 0.8), 1.234), shift: Vec3::new(1.0, -2.0, 0.5), ..still };
        for s in [-0.7, 0.25, 2.0] {
            let f0 = frenet_at(&still, s, true).unwrap();
            let f1 = frenet_at(&moved, s, true).unwrap();
            assert!((f0.kappa - f1.kappa).abs() < 1e-9);
            assert!((f0.tau - f1.tau).abs() < 1e-9);
        }
        // finite differences only: invariant to their own accuracy
        let base = helix(1.3, 0.7);
        let rot = moved.rot;
        let fd = FnCurve(move |s: f64| rot.apply(base.position(s).unwrap()) + Vec3::new(1.0, -2.0, 0.5));
        let f0 = frenet_at(&helix(1.3, 0.7), 0.25, true).unwrap();
        let f1 = frenet_at(&fd, 0.25, true).unwrap();
        assert!((f0.kappa - f1.kappa).abs() < 1e-6);
        assert!((f0.tau - f1.tau).abs() < 1e-4);
    }

    #[test]
    fn frenet_equations_hold_on_helix() {
        let curve = JetHelix { a: 1.0, b: 0.6, rot: Rotation::about_axis(Vec3::new(1.0, 1.0, 0.0), 0.4), shift: Vec3::X };
        let s = 0.8;
        let f = frenet_at(&curve, s, true).unwrap();
        let frame = |x: f64| frenet_at(&curve, x, true);
        let dt = numerics::derivative(|x| frame(x).map(|f| f.t), s, DerivOrder::First).unwrap();
        let dn = numerics::derivative(|x| frame(x).map(|f| f.n), s, DerivOrder::First).unwrap();
        let db = numerics::derivative(|x| frame(x).map(|f| f.b), s, DerivOrder::First).unwrap();
        assert!((dt - f.n * f.kappa).norm() < 1e-4);
        assert!((dn - (f.b * f.tau - f.t * f.kappa)).norm() < 1e-4);
        assert!((db + f.n * f.tau).norm() < 1e-4);
    }

    #[test]
    fn unit_speed_residual_examples() {
        let grid = numerics::linspace(-1.0, 1.0, 11);
        let r = unit_speed_residual(&FnCurve(|s: f64| Vec3::new(s, 0.0, 0.0)), &grid).unwrap();
        assert!(r < 1e-10);
        let r = unit_speed_residual(&FnCurve(|s: f64| Vec3::new(2.0 * s, 0.0, 0.0)), &grid).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trace_grid_examples() {
        let line = FnCurve(|s: f64| Vec3::new(s, 0.0, 0.0));
        let tr = trace(&line, 0.0, 1.0, 2).unwrap();
        assert_eq!(tr.samples(), &[(0.0, Vec3::ZERO), (1.0, Vec3::X)]);
        let tr = trace(&line, 0.0, 1.0, 3).unwrap();
        assert_eq!(tr.samples()[1].0, 0.5);
        let q = std::f64::consts::FRAC_PI_4;
        assert_eq!(trace(&line, -q, q, 513).unwrap().len(), 513);
        assert!(trace(&line, 0.0, 1.0, 1).is_err());
        assert!(trace(&line, 1.0, 1.0, 5).is_err());
    }

    struct Failing;
    impl Curve for Failing {
        fn position(&self, s: f64) -> Result<Vec3> {
            if s > 0.7 {
                Err(Error::InvalidArgument("boom".into()))
            } else {
                Ok(Vec3::ZERO)
            }
        }
    }

    #[test]
    fn trace_names_failing_node() {
        match trace(&Failing, 0.0, 1.0, 6).unwrap_err() {
            Error::Node { index, s, .. } => {
                assert_eq!(index, 4);
                assert!((s - 0.8).abs() < 1e-15);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn trace_rejects_non_increasing_parameters() {
        let e = CurveTrace::new(ParamKind::S, vec![(0.0, Vec3::ZERO), (0.0, Vec3::X)]);
        assert!(e.is_err());
    }

    #[test]
    fn sampled_curve_reproduces_helix_frame() {
        let h = helix(1.0, 1.0);
        let tr = trace(&h, 0.0, 4.0, 201).unwrap();
        let sampled = SampledCurve::new(&tr, DEFAULT_STENCIL).unwrap();
        let f = frenet_at(&sampled, 2.01, true).unwrap();
        assert!((f.kappa - 0.5).abs() < 1e-8);
        assert!((f.tau - 0.5).abs() < 1e-6);
        // near the end the stencil becomes one-sided but still works
        let f = frenet_at(&sampled, 3.99, false).unwrap();
        assert!((f.kappa - 0.5).abs() < 1e-5);
        assert!(sampled.position(4.5).is_err());
    }
}
