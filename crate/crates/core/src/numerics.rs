//! Quadrature and differentiation utilities shared by the geometry modules.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Default absolute tolerance for [`integrate`].
pub const DEFAULT_ABS_TOL: f64 = 1e-10;
/// Maximum bisection depth of the adaptive Simpson rule.
pub const MAX_DEPTH: u32 = 40;
/// Upper bound on the number of subintervals examined by one call.
pub const MAX_SUBDIVISIONS: usize = 200_000;

/// A real function of one real variable together with the closed interval on
/// which it is known to be finite.
#[derive(Clone)]
pub struct ScalarFn {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lo: f64,
    hi: f64,
}

impl ScalarFn {
    pub fn new(lo: f64, hi: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), lo, hi }
    }

    /// Same evaluator on the whole real line.
    pub fn unbounded(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY, f)
    }

    pub fn constant(c: f64) -> Self {
        Self::unbounded(move |_| c)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.lo && s <= self.hi
    }

    /// Raw evaluation, no checks.
    #[inline]
    pub fn call(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if !self.contains(s) {
            return Err(Error::OutOfInterval { value: s, lo: self.lo, hi: self.hi });
        }
        let v = (self.f)(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { at: s, value: v })
        }
    }

    pub fn with_domain(&self, lo: f64, hi: f64) -> Self {
        Self { f: Arc::clone(&self.f), lo, hi }
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn").field("lo", &self.lo).field("hi", &self.hi).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// False when the subdivision budget or depth limit was hit before the
    /// local tolerance was met; `value` is then only a partial result.
    pub converged: bool,
}

impl QuadratureResult {
    fn negated(self) -> Self {
        Self { value: -self.value, ..self }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

fn sample(f: &impl Fn(f64) -> f64, x: f64, evals: &mut usize) -> Result<f64> {
    *evals += 1;
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: x, value: v })
    }
}

/// Adaptive Simpson quadrature of `f` over `[lo, hi]`.
///
/// Swapping the limits negates the result. A non-finite sample is an error;
/// running out of depth or subdivisions returns the partial value with
/// `converged == false`.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, abs_tol: f64) -> Result<QuadratureResult> {
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("abs_tol must be positive, got {abs_tol}")));
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("integration limits must be finite: [{lo}, {hi}]")));
    }
    if hi < lo {
        return integrate(f, hi, lo, abs_tol).map(QuadratureResult::negated);
    }
    let mut evals = 0;
    if hi == lo {
        return Ok(QuadratureResult { value: 0.0, error_estimate: 0.0, evaluations: 1, converged: true });
    }

    let m = 0.5 * (lo + hi);
    let fa = sample(&f, lo, &mut evals)?;
    let fm = sample(&f, m, &mut evals)?;
    let fb = sample(&f, hi, &mut evals)?;
    let mut stack = vec![Panel {
        a: lo,
        b: hi,
        fa,
        fm,
        fb,
        whole: (hi - lo) / 6.0 * (fa + 4.0 * fm + fb),
        tol: abs_tol,
        depth: 0,
    }];

    let mut value = 0.0;
    let mut error_estimate = 0.0;
    let mut converged = true;
    let mut panels = 0usize;

    while let Some(p) = stack.pop() {
        panels += 1;
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = sample(&f, lm, &mut evals)?;
        let frm = sample(&f, rm, &mut evals)?;
        let h = p.b - p.a;
        let left = h / 12.0 * (p.fa + 4.0 * flm + p.fm);
        let right = h / 12.0 * (p.fm + 4.0 * frm + p.fb);
        let refined = left + right;
        let delta = refined - p.whole;
        // Roundoff floors so that unreachable tolerances do not exhaust the
        // budget: one for the panel sums, one for the rounding of the
        // abscissae themselves, which dominates on very narrow panels.
        let fmax = p.fa.abs().max(p.fm.abs()).max(p.fb.abs()).max(flm.abs()).max(frm.abs());
        let floor = 64.0 * f64::EPSILON * refined.abs().max(p.whole.abs());
        let abscissa_floor = 8.0 * f64::EPSILON * p.a.abs().max(p.b.abs()) * fmax;
        let tiny = m <= p.a || m >= p.b;
        if delta.abs() <= 15.0 * p.tol.max(floor) || delta.abs() <= abscissa_floor || tiny {
            value += refined + delta / 15.0;
            error_estimate += delta.abs() / 15.0;
            continue;
        }
        if p.depth + 1 >= MAX_DEPTH || panels + stack.len() >= MAX_SUBDIVISIONS {
            converged = false;
            value += refined + delta / 15.0;
            error_estimate += delta.abs() / 15.0;
            continue;
        }
        let tol = 0.5 * p.tol;
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol, depth: p.depth + 1 });
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol, depth: p.depth + 1 });
    }

    Ok(QuadratureResult { value, error_estimate, evaluations: evals, converged })
}

impl QuadratureResult {
    /// Turns a non-converged result into [`Error::NoConvergence`].
    pub fn require_converged(self, lo: f64, hi: f64) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NoConvergence { lo, hi, partial: self.value, error_estimate: self.error_estimate })
        }
    }
}

/// Integrates a [`ScalarFn`], refusing limits outside its domain.
pub fn integrate_fn(f: &ScalarFn, lo: f64, hi: f64, abs_tol: f64) -> Result<QuadratureResult> {
    for x in [lo, hi] {
        if !f.contains(x) {
            let (dlo, dhi) = f.domain();
            return Err(Error::OutOfInterval { value: x, lo: dlo, hi: dhi });
        }
    }
    integrate(|x| f.call(x), lo, hi, abs_tol)
}

/// `out[i] = ∫_{s0}^{grid[i]} f`, computed by summing converged adaptive
/// Simpson integrals over consecutive grid segments.
pub fn cumulative_integral(f: impl Fn(f64) -> f64, s0: f64, grid: &[f64], abs_tol: f64) -> Result<Vec<f64>> {
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("grid must be sorted ascending".into()));
    }
    let Some(&first) = grid.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = integrate(&f, s0, first, abs_tol)?.require_converged(s0, first)?;
    out.push(acc);
    for w in grid.windows(2) {
        acc += integrate(&f, w[0], w[1], abs_tol)?.require_converged(w[0], w[1])?;
        out.push(acc);
    }
    Ok(out)
}

/// Derivative order supported by the central-difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First = 1,
    Second = 2,
    Third = 3,
}

impl TryFrom<u8> for DerivOrder {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(DerivOrder::First),
            2 => Ok(DerivOrder::Second),
            3 => Ok(DerivOrder::Third),
            _ => Err(Error::InvalidArgument(format!("derivative order must be 1, 2 or 3, got {v}"))),
        }
    }
}

impl DerivOrder {
    /// Step balancing truncation against roundoff for the stencil.
    pub fn step(self, s: f64) -> f64 {
        let root = match self {
            DerivOrder::First => f64::EPSILON.cbrt(),
            DerivOrder::Second => f64::EPSILON.powf(0.25),
            DerivOrder::Third => f64::EPSILON.powf(0.2),
        };
        let h = root * s.abs().max(1.0);
        // make s + h exactly representable
        (s + h) - s
    }
}

fn checked(s: f64, v: Vec3) -> Result<Vec3> {
    match v.first_non_finite() {
        None => Ok(v),
        Some(value) => Err(Error::NonFinite { at: s, value }),
    }
}

/// Central-difference derivative of a vector-valued function.
pub fn derivative(f: impl Fn(f64) -> Result<Vec3>, s: f64, order: DerivOrder) -> Result<Vec3> {
    let h = order.step(s);
    let at = |x: f64| f(x).and_then(|v| checked(x, v));
    Ok(match order {
        DerivOrder::First => (at(s + h)? - at(s - h)?) / (2.0 * h),
        DerivOrder::Second => (at(s + h)? - 2.0 * at(s)? + at(s - h)?) / (h * h),
        DerivOrder::Third => {
            let (p1, m1) = (at(s + h)?, at(s - h)?);
            let (p2, m2) = (at(s + 2.0 * h)?, at(s - 2.0 * h)?);
            (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h)
        }
    })
}

/// Initial step of [`extrapolated_derivative`] relative to `max(1, |s|)`.
pub const RIDDERS_INITIAL_STEP: f64 = 0.02;
const RIDDERS_SHRINK: f64 = 1.4;
const RIDDERS_LEVELS: usize = 10;

/// Ridders' Richardson extrapolation of central differences starting from
/// step `h0`; returns the derivative and an error estimate. Far more
/// accurate than [`derivative`] on smooth functions whose scale is unknown.
pub fn ridders(f: impl Fn(f64) -> Result<Vec3>, s: f64, order: DerivOrder, h0: f64) -> Result<(Vec3, f64)> {
    if !(h0 > 0.0) {
        return Err(Error::InvalidArgument(format!("initial step must be positive, got {h0}")));
    }
    let at = |x: f64| f(x).and_then(|v| checked(x, v));
    let diff = |h: f64| -> Result<Vec3> {
        let h = (s + h) - s;
        Ok(match order {
            DerivOrder::First => (at(s + h)? - at(s - h)?) / (2.0 * h),
            DerivOrder::Second => (at(s + h)? - 2.0 * at(s)? + at(s - h)?) / (h * h),
            DerivOrder::Third => {
                (at(s + 2.0 * h)? - 2.0 * at(s + h)? + 2.0 * at(s - h)? - at(s - 2.0 * h)?) / (2.0 * h * h * h)
            }
        })
    };
    let c2 = RIDDERS_SHRINK * RIDDERS_SHRINK;
    let mut prev: Vec<Vec3> = vec![diff(h0)?];
    let mut best = prev[0];
    let mut err = f64::INFINITY;
    let mut h = h0;
    for i in 1..RIDDERS_LEVELS {
        h /= RIDDERS_SHRINK;
        let mut row = Vec::with_capacity(i + 1);
        row.push(diff(h)?);
        let mut fac = c2;
        for j in 1..=i {
            let next = (row[j - 1] * fac - prev[j - 1]) / (fac - 1.0);
            fac *= c2;
            let e = (next - row[j - 1]).norm().max((next - prev[j - 1]).norm());
            if e <= err {
                err = e;
                best = next;
            }
            row.push(next);
        }
        if (row[i] - prev[i - 1]).norm() >= 2.0 * err {
            break;
        }
        prev = row;
    }
    Ok((best, err))
}

/// [`ridders`] from [`RIDDERS_INITIAL_STEP`], shrinking the initial step
/// while the error estimate stays above `1e-9` relative (a wide stencil may
/// straddle a singularity or leave the domain of `f`). Falls back to
/// [`derivative`] when no attempt succeeds.
pub fn extrapolated_derivative(f: impl Fn(f64) -> Result<Vec3>, s: f64, order: DerivOrder) -> Result<Vec3> {
    let mut h0 = RIDDERS_INITIAL_STEP * s.abs().max(1.0);
    let mut best: Option<(Vec3, f64)> = None;
    for _ in 0..4 {
        if let Ok((d, err)) = ridders(&f, s, order, h0) {
            let rel = err / d.norm().max(f64::MIN_POSITIVE);
            if rel <= 1e-9 {
                return Ok(d);
            }
            if best.is_none_or(|(_, r)| rel < r) {
                best = Some((d, rel));
            }
        }
        h0 /= 8.0;
    }
    match best {
        Some((d, _)) => Ok(d),
        None => derivative(f, s, order),
    }
}

/// Scalar counterpart of [`extrapolated_derivative`].
pub fn extrapolated_derivative_scalar(f: impl Fn(f64) -> Result<f64>, s: f64, order: DerivOrder) -> Result<f64> {
    extrapolated_derivative(|x| f(x).map(|v| Vec3::new(v, 0.0, 0.0)), s, order).map(|v| v.x)
}

/// Scalar counterpart of [`derivative`].
pub fn derivative_scalar(f: impl Fn(f64) -> Result<f64>, s: f64, order: DerivOrder) -> Result<f64> {
    derivative(|x| f(x).map(|v| Vec3::new(v, 0.0, 0.0)), s, order).map(|v| v.x)
}

/// Derivative of samples `ys` on the sorted grid `xs`: three-point
/// non-uniform central differences inside, one-sided three-point stencils at
/// the ends. Needs at least three nodes.
pub fn grid_derivative(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::InvalidArgument("grid and values differ in length".into()));
    }
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let w = |i: usize, j: usize, k: usize, at: usize| -> f64 {
        let z = xs[at];
        let mut d = [0.0; 3];
        let ids = [i, j, k];
        for (slot, &p) in ids.iter().enumerate() {
            let mut num = 0.0;
            let mut den = 1.0;
            for &q in &ids {
                if q == p {
                    continue;
                }
                den *= xs[p] - xs[q];
            }
            // derivative of the Lagrange basis polynomial at z
            for &q in &ids {
                if q == p {
                    continue;
                }
                let mut term = 1.0;
                for &r in &ids {
                    if r != p && r != q {
                        term *= z - xs[r];
                    }
                }
                num += term;
            }
            d[slot] = num / den;
        }
        d[0] * ys[i] + d[1] * ys[j] + d[2] * ys[k]
    };
    let mut out = Vec::with_capacity(n);
    out.push(w(0, 1, 2, 0));
    for i in 1..n - 1 {
        out.push(w(i - 1, i, i + 1, i));
    }
    out.push(w(n - 3, n - 2, n - 1, n - 1));
    Ok(out)
}

/// Finite-difference weights for derivatives `0..=max_order` at `z` from
/// arbitrary distinct nodes (Fornberg's recursion). `weights[k][j]` is the
/// weight of node `j` for the k-th derivative.
pub fn fd_weights(z: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 10-point rule.
    pub fn ten() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(10))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Fixed-rule integral over `[a, b]`; smooth in both limits.
    pub fn integrate<T>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> Result<T>) -> Result<T>
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x)? * (w * half);
        }
        Ok(acc)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * step }).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn midpoint_oracle(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
        let h = (hi - lo) / steps as f64;
        (0..steps).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
    }

    #[test]
    fn constant_integrand() {
        let r = integrate(|_| 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.converged);
        assert!(r.evaluations >= 1);
    }

    #[test]
    fn cosine_over_half_period_vanishes() {
        let r = integrate(f64::cos, 0.0, PI, DEFAULT_ABS_TOL).unwrap();
        assert!(r.value.abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn curvature_like_integrand_matches_midpoint_oracle() {
        let f = |s: f64| 1.0 / (s * (2.0 + s * s));
        let oracle = midpoint_oracle(f, 0.5, 1.5, 1_000_000);
        let r = integrate(f, 0.5, 1.5, DEFAULT_ABS_TOL).unwrap();
        assert!((r.value - oracle).abs() < 1e-8, "{} vs {}", r.value, oracle);
    }

    #[test]
    fn swapped_limits_negate() {
        let f = |s: f64| s.exp() * s.sin();
        let a = integrate(f, -0.3, 1.7, 1e-12).unwrap().value;
        let b = integrate(f, 1.7, -0.3, 1e-12).unwrap().value;
        assert_eq!(a, -b);
    }

    #[test]
    fn non_finite_sample_is_an_error() {
        let e = integrate(|s| 1.0 / s, 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(e, Error::NonFinite { .. }));
    }

    #[test]
    fn singular_integrand_reports_partial_value() {
        // 1/sqrt(s) sampled away from 0 but steep: forces the depth limit.
        let r = integrate(|s: f64| if s == 0.0 { 1e300 } else { s.abs().powf(-0.999) }, 0.0, 1.0, 1e-14).unwrap();
        assert!(!r.converged);
        assert!(r.require_converged(0.0, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(integrate(|_| 1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn scalar_fn_domain_is_enforced() {
        let f = ScalarFn::new(0.0, 1.0, |s| s);
        assert!(integrate_fn(&f, 0.0, 2.0, 1e-10).is_err());
        assert!((integrate_fn(&f, 0.0, 1.0, 1e-10).unwrap().value - 0.5).abs() < 1e-14);
        assert!(f.eval(1.5).is_err());
    }

    #[test]
    fn cumulative_examples() {
        let out = cumulative_integral(|_| 1.0, 0.0, &[0.0, 1.0, 2.0], 1e-12).unwrap();
        assert_eq!(out.len(), 3);
        for (o, e) in out.iter().zip([0.0, 1.0, 2.0]) {
            assert!((o - e).abs() < 1e-12);
        }
        let c = 0.37;
        let grid = [-1.0, 0.25, 3.0];
        let out = cumulative_integral(|_| c, 0.5, &grid, 1e-12).unwrap();
        for (o, g) in out.iter().zip(grid) {
            assert!((o - c * (g - 0.5)).abs() < 1e-12);
        }
        // antiderivative s^2/2
        let out = cumulative_integral(|s| s, 0.0, &[0.0, 1.0, 2.0], 1e-12).unwrap();
        for (o, e) in out.iter().zip([0.0, 0.5, 2.0]) {
            assert!((o - e).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulative_rejects_unsorted_grid() {
        assert!(cumulative_integral(|_| 1.0, 0.0, &[1.0, 0.0], 1e-10).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = derivative(|s| Ok(Vec3::new(s, 0.0, 0.0)), 0.4, DerivOrder::First).unwrap();
        assert!((d - Vec3::X).norm() < 1e-9);
        let d = derivative(|s| Ok(Vec3::new(s * s, 0.0, 0.0)), 0.4, DerivOrder::Second).unwrap();
        assert!((d - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-6);
        // d^3/ds^3 (sin s, cos s, s) = (-cos s, sin s, 0)
        let s = 0.3;
        let d = derivative(|s| Ok(Vec3::new(s.sin(), s.cos(), s)), s, DerivOrder::Third).unwrap();
        let exact = Vec3::new(-s.cos(), s.sin(), 0.0);
        assert!((d - exact).norm() < 1e-4, "{d:?}");
    }

    #[test]
    fn derivative_reports_non_finite() {
        let e = derivative(|s| Ok(Vec3::new(1.0 / (s - 1.0), 0.0, 0.0)), 1.0, DerivOrder::Second).unwrap_err();
        assert!(matches!(e, Error::NonFinite { .. }));
        assert!(DerivOrder::try_from(4).is_err());
    }

    #[test]
    fn affine_first_derivative_is_exact() {
        let f = |s: f64| Ok(Vec3::new(3.0 * s - 1.0, -0.5 * s, 2.0));
        for s in [-7.0, 0.0, 0.1, 12.5] {
            let d = derivative(f, s, DerivOrder::First).unwrap();
            assert!((d - Vec3::new(3.0, -0.5, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn grid_derivative_is_exact_on_quadratics() {
        let xs = [0.0, 0.1, 0.35, 0.4, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x * x - x + 3.0).collect();
        let d = grid_derivative(&xs, &ys).unwrap();
        for (x, v) in xs.iter().zip(d) {
            assert!((v - (4.0 * x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn fornberg_weights_match_classic_stencil() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[1][0] + 0.5).abs() < 1e-15 && (w[1][2] - 0.5).abs() < 1e-15);
        assert!((w[2][0] - 1.0).abs() < 1e-15 && (w[2][1] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::ten();
        let v = gl.integrate(-0.5, 2.0, |x| Ok(x.powi(19) - 3.0 * x.powi(4))).unwrap();
        let exact = (2f64.powi(20) - 0.5f64.powi(20)) / 20.0 - 3.0 * (2f64.powi(5) + 0.5f64.powi(5)) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
        let sum: f64 = gl.weights().iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn linspace_includes_endpoints() {
        let g = linspace(-1.0, 1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
