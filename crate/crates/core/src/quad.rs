//! Globally adaptive Gauss–Kronrod quadrature.
//!
//! The 21-point Kronrod extension of the 10-point Gauss rule is applied on
//! each subinterval; the interval with the largest error estimate is bisected
//! until the summed estimate meets `max(abs_tol, rel_tol * |I|)`. Error
//! estimates are rescaled the same way QUADPACK's `qk21` does.
//!
//! Semi-infinite ranges are handled by [`integrate_semi_infinite`], which maps
//! the tail `[b, inf)` onto `(0, 1]` through `x = b / t`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_intervals: 5000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub intervals: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208814766491,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<V> Eq for Segment<V> {}

impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<V, F>(f: &F, a: f64, b: f64) -> (V, f64)
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_kronrod = f_center * WGK[10];
    let mut res_gauss = V::default();
    let mut res_abs = f_center.magnitude() * WGK[10];
    let mut fv1 = [V::default(); 10];
    let mut fv2 = [V::default(); 10];

    for j in 0..10 {
        let x = half * XGK[j];
        let lo = f(center - x);
        let hi = f(center + x);
        fv1[j] = lo;
        fv2[j] = hi;
        let sum = lo + hi;
        res_kronrod = res_kronrod + sum * WGK[j];
        res_abs += WGK[j] * (lo.magnitude() + hi.magnitude());
        if j % 2 == 1 {
            res_gauss = res_gauss + sum * WG[j / 2];
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).magnitude();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let width = half.abs();
    let value = res_kronrod * half;
    let mut err = ((res_kronrod - res_gauss) * half).magnitude();
    res_abs *= width;
    res_asc *= width;

    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Integrate `f` over the union of consecutive intervals `[points[i], points[i+1]]`.
///
/// `points` must be strictly increasing with at least two entries. Each piece
/// starts as its own subinterval so that known features of the integrand
/// (peaks, kinks, scale changes) sit on interval boundaries.
pub fn integrate_pieces<V, F>(f: F, points: &[f64], opts: &QuadOptions) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if points.len() < 2 {
        return Err(Error::invalid("points", "need at least two breakpoints"));
    }
    if points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("points", "breakpoints must be strictly increasing"));
    }

    let mut heap = BinaryHeap::with_capacity(2 * points.len());
    let mut total = V::default();
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let (value, error) = gauss_kronrod(&f, w[0], w[1]);
        total = total + value;
        total_err += error;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    let tolerance = |total: &V| opts.abs_tol.max(opts.rel_tol * total.magnitude());

    while total_err > tolerance(&total) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                estimate: total.magnitude(),
                error_bound: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature {
                estimate: total.magnitude(),
                error_bound: total_err,
                intervals: heap.len() + 1,
            });
        }
        let (left, left_err) = gauss_kronrod(&f, worst.a, mid);
        let (right, right_err) = gauss_kronrod(&f, mid, worst.b);
        total = total - worst.value + left + right;
        total_err += left_err + right_err - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: left,
            error: left_err,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: right,
            error: right_err,
        });
    }

    // Re-sum in interval order so the result does not carry the running-update rounding.
    let mut segments = heap.into_vec();
    segments.sort_by(|s, t| s.a.total_cmp(&t.a));
    let intervals = segments.len();
    let mut value = V::default();
    let mut error = 0.0;
    for s in &segments {
        value = value + s.value;
        error += s.error;
    }
    Ok(QuadResult {
        value,
        error,
        intervals,
    })
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<V, F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    integrate_pieces(f, &[a, b], opts)
}

/// Integrate `f` over `[points[0], inf)`.
///
/// The finite part is split at the given breakpoints; the tail beyond the
/// last breakpoint `b > 0` is mapped to `t in (0, 1]` via `x = b / t`, which
/// requires `f(x)` to decay faster than `1/x` (the integrand must vanish at
/// `t -> 0` after the Jacobian `b / t^2` is applied).
pub fn integrate_semi_infinite<V, F>(
    f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    let tail_start = *points
        .last()
        .ok_or_else(|| Error::invalid("points", "need at least one breakpoint"))?;
    if !(tail_start > 0.0) {
        return Err(Error::invalid("points", "tail must start at a positive abscissa"));
    }
    let end = tail_start + 1.0;
    let mapped = |u: f64| -> V {
        if u <= tail_start {
            f(u)
        } else {
            let t = end - u;
            let x = tail_start / t;
            if !x.is_finite() {
                return V::default();
            }
            f(x) * (tail_start / (t * t))
        }
    };
    let mut pts = points.to_vec();
    pts.push(end);
    integrate_pieces(mapped, &pts, opts)
}

/// Sorted, deduplicated breakpoints restricted to `(lo, hi)` with `lo` and `hi` added.
pub(crate) fn breakpoints(lo: f64, hi: f64, candidates: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = candidates
        .into_iter()
        .filter(|&x| x.is_finite() && x > lo && x < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    // Merge points that are closer than a relative 1e-9 of the scale.
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for x in pts {
        match out.last() {
            Some(&prev) if (x - prev) <= 1e-9 * x.abs().max(prev.abs()).max(f64::MIN_POSITIVE) => {}
            _ => out.push(x),
        }
    }
    if out.last() != Some(&hi) {
        out.pop();
        out.push(hi);
    }
    out
}
