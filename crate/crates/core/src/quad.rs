//! Quadrature engines shared by every module.
//!
//! * [`integrate`]: globally adaptive 21-point Gauss-Kronrod on a finite
//!   interval, generic over real and complex integrands.
//! * [`exp_sinh`]: double-exponential rule for `[a, inf)`, robust to
//!   algebraic endpoint singularities and algebraic tails.
//! * [`tanh_sinh`]: double-exponential rule for finite intervals with
//!   endpoint singularities.
//! * [`gauss_legendre`]: fixed rules used by the product-integration code.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar types that can be integrated.
pub trait Field: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn modulus(self) -> f64;
    fn finite(self) -> bool;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            max_intervals: 4000,
        }
    }

    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

// Gauss-Kronrod tables at full published precision
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_931_319,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    resabs: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

fn gk21<T: Field, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = T::zero();
    let mut resabs = fc.modulus() * WGK[10];
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod = kronrod + (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.modulus() + f2.modulus());
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[10] * (fc - mean).modulus();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).modulus() + (fv2[j] - mean).modulus());
    }
    let scale = half.abs();
    resasc *= scale;
    resabs *= scale;
    let mut err = ((kronrod - gauss) * half).modulus();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (kronrod * half, err, resabs)
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral<T>>
where
    T: Field,
    F: FnMut(f64) -> T,
{
    integrate_with_breaks(f, a, b, &[], tol)
}

/// As [`integrate`], with the interval pre-split at `breaks` (points outside
/// `(a, b)` are ignored).
pub fn integrate_with_breaks<T, F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Integral<T>>
where
    T: Field,
    F: FnMut(f64) -> T,
{
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            error: 0.0,
            evals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points = vec![lo];
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    points.extend(inner);
    points.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = 0.0;
    let mut total_abs = 0.0;
    let mut evals = 0;
    for w in points.windows(2) {
        let (v, e, r) = gk21(&mut f, w[0], w[1]);
        evals += 21;
        total = total + v;
        total_err += e;
        total_abs += r;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            resabs: r,
        });
    }
    if !total.finite() {
        return Err(Error::NonConvergence {
            what: "quadrature (non-finite integrand)".into(),
            achieved: f64::INFINITY,
        });
    }
    loop {
        // rounding floor: no rule does better than a few ulps of int |f|
        let target = tol
            .abs
            .max(tol.rel * total.modulus())
            .max(100.0 * f64::EPSILON * total_abs);
        if total_err <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::NonConvergence {
                what: format!("adaptive quadrature on [{lo}, {hi}]"),
                achieved: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at machine resolution
            heap.push(worst);
            let achieved = total_err;
            let rel = achieved / total.modulus().max(f64::MIN_POSITIVE);
            if rel < 1e3 * tol.rel.max(f64::EPSILON) || achieved < 1e3 * tol.abs {
                break;
            }
            return Err(Error::NonConvergence {
                what: format!("adaptive quadrature on [{lo}, {hi}] (resolution limit)"),
                achieved,
            });
        }
        let (v1, e1, r1) = gk21(&mut f, worst.a, mid);
        let (v2, e2, r2) = gk21(&mut f, mid, worst.b);
        evals += 42;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        total_abs += r1 + r2 - worst.resabs;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            resabs: r1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            resabs: r2,
        });
        if !total.finite() {
            return Err(Error::NonConvergence {
                what: "quadrature (non-finite integrand)".into(),
                achieved: f64::INFINITY,
            });
        }
    }
    // re-sum for a rounding-stable total
    let mut segs: Vec<Segment<T>> = heap.into_vec();
    segs.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let mut value = T::zero();
    let mut error = 0.0;
    for s in &segs {
        value = value + s.value;
        error += s.error;
    }
    Ok(Integral {
        value: value * sign,
        error,
        evals,
    })
}

/// Trapezoidal sums over `[-t_max, t_max]` with step halving until the
/// change falls below `rel_tol` or the rounding floor of the `L1` sum.
fn de_refine(
    mut term: impl FnMut(f64) -> f64,
    t_max: f64,
    rel_tol: f64,
    what: &str,
) -> Result<Integral<f64>> {
    let mut evals = 0;
    let mut h = 0.5;
    let mut sum = 0.0;
    let mut l1 = 0.0;
    let n0 = (t_max / h) as i64;
    for k in -n0..=n0 {
        let v = term(k as f64 * h);
        evals += 1;
        sum += v;
        l1 += v.abs();
    }
    let mut estimate = sum * h;
    let mut diff = f64::INFINITY;
    for _level in 0..9 {
        h *= 0.5;
        let n = (t_max / h) as i64;
        let mut k = -n;
        if k % 2 == 0 {
            k += 1;
        }
        while k <= n {
            let v = term(k as f64 * h);
            evals += 1;
            sum += v;
            l1 += v.abs();
            k += 2;
        }
        let next = sum * h;
        diff = (next - estimate).abs();
        estimate = next;
        if diff <= rel_tol * next.abs() || diff <= 64.0 * f64::EPSILON * l1 * h {
            return Ok(Integral {
                value: next,
                error: diff,
                evals,
            });
        }
    }
    Err(Error::NonConvergence {
        what: what.into(),
        achieved: diff / estimate.abs(),
    })
}

/// Double-exponential (exp-sinh) quadrature of `f` over `[a, inf)`.
///
/// `scale` places the centre of the node cloud at `a + scale`.
pub fn exp_sinh<F>(mut f: F, a: f64, scale: f64, rel_tol: f64) -> Result<Integral<f64>>
where
    F: FnMut(f64) -> f64,
{
    let half_pi = std::f64::consts::FRAC_PI_2;
    // sinh(t) in [-700, 700] keeps exp(pi/2 sinh t) representable
    let t_max = 6.5;
    let term = |t: f64| {
        let e = (half_pi * t.sinh()).exp();
        let x = a + scale * e;
        let w = scale * e * half_pi * t.cosh();
        if w == 0.0 || !x.is_finite() || x == a {
            return 0.0;
        }
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    de_refine(term, t_max, rel_tol, "exp-sinh quadrature")
}

/// Double-exponential (tanh-sinh) quadrature over a finite interval.
pub fn tanh_sinh<F>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<Integral<f64>>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evals: 0,
        });
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let d = 0.5 * (b - a);
    // offsets down to ~1e-300 from the endpoints
    let t_max = 6.0;
    let term = |t: f64| {
        let s = half_pi * t.sinh();
        let ch = s.cosh();
        let w = d * half_pi * t.cosh() / (ch * ch);
        // distance from the nearer endpoint, computed without cancellation
        let off = d / (s.abs().exp() * ch);
        let x = if t < 0.0 { a + off } else { b - off };
        if w == 0.0 || x <= a.min(b) || x >= a.max(b) {
            return 0.0;
        }
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    de_refine(term, t_max, rel_tol, "tanh-sinh quadrature")
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = x;
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// The 10-point rule, computed once.
pub fn gauss_legendre_10() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(10))
}
