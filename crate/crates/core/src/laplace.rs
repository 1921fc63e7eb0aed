//! Forward Laplace transforms by quadrature and numerical inversion on a
//! fixed Talbot contour or on the real axis (Gaver-Stehfest).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{exp_sinh, integrate_with_breaks, Tolerance};

/// `int_0^inf e^(-lambda t) f(t) dt` to relative `tol`.
///
/// The head `[0, t0]` is mapped to `[0, inf)` by `t = t0 e^(-y)`, which
/// absorbs integrable power and logarithmic singularities at `0+`.
pub fn laplace_forward<F>(f: F, lambda: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    laplace_forward_with(f, lambda, tol, &[])
}

/// As [`laplace_forward`], with kinks or jumps of `f` passed as `breaks`.
pub fn laplace_forward_with<F>(f: F, lambda: f64, tol: f64, breaks: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    laplace_forward_log(
        &f,
        |lt: f64| {
            let t = lt.exp();
            if t == 0.0 {
                0.0
            } else {
                t * f(t)
            }
        },
        lambda,
        tol,
        breaks,
    )
}

/// As [`laplace_forward_with`], with the head integrand supplied as
/// `ln t -> t f(t)`. Needed when `t f(t)` decays only logarithmically at
/// `0+`, so that the relevant `t` underflow.
pub fn laplace_forward_log<F, G>(f: F, tf_log: G, lambda: f64, tol: f64, breaks: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::param("tol", format!("{tol} not in (0,1)")));
    }
    let min_break = breaks
        .iter()
        .copied()
        .filter(|&b| b > 0.0)
        .fold(f64::INFINITY, f64::min);
    let t0 = (1.0 / lambda).min(1.0).min(0.5 * min_break);

    let lt0 = t0.ln();
    let head_fn = |y: f64| {
        let lt = lt0 - y;
        tf_log(lt) * (-lambda * lt.exp()).exp()
    };
    let head_tol = (0.1 * tol).max(1e-14);
    let head = exp_sinh(head_fn, 0.0, 1.0, head_tol)?.value;

    // e^(-lambda T) below tol relative to the head, with margin
    let t_end = t0 + ((1.0 / tol).ln() + 30.0) / lambda;
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&b| b > t0 && b < t_end).collect();
    let mut g = 4.0 * t0;
    while g < t_end {
        pts.push(g);
        g *= 4.0;
    }
    let body_tol = Tolerance::new(0.01 * tol * head.abs(), 0.1 * tol).with_max_intervals(20_000);
    let body = integrate_with_breaks(|t: f64| f(t) * (-lambda * t).exp(), t0, t_end, &pts, body_tol)?;
    let total = head + body.value;
    if !total.is_finite() {
        return Err(Error::NonConvergence {
            what: format!("Laplace transform at lambda={lambda}"),
            achieved: f64::INFINITY,
        });
    }
    Ok(total)
}

/// Inversion method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Fixed Talbot contour; needs the transform at complex arguments.
    Contour,
    /// Gaver-Stehfest; real arguments only.
    RealAxis,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Contour => "talbot",
            Method::RealAxis => "gaver-stehfest",
        }
    }
}

type RealFn<'a> = Box<dyn Fn(f64) -> f64 + 'a>;
type ComplexFn<'a> = Box<dyn Fn(Complex64) -> Complex64 + 'a>;

/// A Laplace transform `F`, evaluable on the real axis and optionally on
/// complex contours.
pub struct TransformFn<'a> {
    real: RealFn<'a>,
    complex: Option<ComplexFn<'a>>,
    pub domain_min: f64,
}

impl<'a> TransformFn<'a> {
    /// A transform known only on the real half-line `(0, inf)`.
    pub fn real(f: impl Fn(f64) -> f64 + 'a) -> Self {
        Self {
            real: Box::new(f),
            complex: None,
            domain_min: 0.0,
        }
    }

    /// A transform analytic off the negative real axis.
    pub fn contour(f: impl Fn(Complex64) -> Complex64 + Clone + 'a) -> Self {
        let g = f.clone();
        Self {
            real: Box::new(move |x| g(Complex64::new(x, 0.0)).re),
            complex: Some(Box::new(f)),
            domain_min: 0.0,
        }
    }

    pub fn is_contour_capable(&self) -> bool {
        self.complex.is_some()
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        (self.real)(x)
    }

    pub fn eval_complex(&self, s: Complex64) -> Option<Complex64> {
        self.complex.as_ref().map(|f| f(s))
    }
}

/// Node count of the Talbot rule for a target relative error.
pub fn talbot_nodes_for(tol: f64) -> usize {
    let digits = -tol.log10();
    ((1.7 * digits).ceil() as usize + 2).clamp(8, 48)
}

/// Fixed Talbot contour (Abate-Valko parametrization) for one `t`.
///
/// `f(t) = sum_k Re(weights[k] * F(nodes[k]))`.
#[derive(Debug, Clone)]
pub struct TalbotRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

/// Talbot contour `s = r theta (cot theta + i)` with `m` nodes; each node
/// comes with its weight before the `e^(s t)` factor.
pub fn talbot_contour(m: usize, r: f64) -> Vec<(Complex64, Complex64)> {
    let mf = m as f64;
    let mut out = Vec::with_capacity(m);
    out.push((Complex64::new(r, 0.0), Complex64::new(0.5 * r / mf, 0.0)));
    for k in 1..m {
        let theta = k as f64 * std::f64::consts::PI / mf;
        let cot = theta.cos() / theta.sin();
        let lam = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        out.push((lam, Complex64::new(1.0, sigma) * (r / mf)));
    }
    out
}

impl TalbotRule {
    pub fn new(t: f64, m: usize) -> Self {
        let r = 2.0 * m as f64 / (5.0 * t);
        let (nodes, weights) = talbot_contour(m, r)
            .into_iter()
            .map(|(s, w)| (s, w * (s * t).exp()))
            .unzip();
        Self { nodes, weights }
    }

    pub fn apply(&self, values: &[Complex64]) -> f64 {
        self.apply_with_magnitude(values).0
    }

    /// The sum and the sum of absolute terms, which sets its rounding level.
    pub fn apply_with_magnitude(&self, values: &[Complex64]) -> (f64, f64) {
        self.weights.iter().zip(values).fold((0.0, 0.0), |(s, a), (w, v)| {
            let x = (w * v).re;
            (s + x, a + x.abs())
        })
    }
}

/// Gaver-Stehfest weights `V_k`, `k = 1..=n` for even `n <= 20`.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    assert!(n.is_multiple_of(2) && (2..=20).contains(&n), "stage count must be even and <= 20");
    let half = n / 2;
    let binom = |a: usize, b: usize| -> i128 {
        if b > a {
            return 0;
        }
        let mut c: i128 = 1;
        for i in 0..b {
            c = c * (a - i) as i128 / (i + 1) as i128;
        }
        c
    };
    let mut fact: i128 = 1;
    for i in 2..=half {
        fact *= i as i128;
    }
    (1..=n)
        .map(|k| {
            let mut s: i128 = 0;
            for j in k.div_ceil(2)..=k.min(half) {
                s += (j as i128).pow(half as u32 + 1)
                    * binom(half, j)
                    * binom(2 * j, j)
                    * binom(j, k - j);
            }
            let sign = if (k + half).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * s as f64 / fact as f64
        })
        .collect()
}

/// Abscissae `k ln2 / t` used by [`gaver_stehfest`].
pub fn stehfest_nodes(t: f64, n: usize) -> Vec<f64> {
    let c = std::f64::consts::LN_2 / t;
    (1..=n).map(|k| k as f64 * c).collect()
}

pub fn gaver_stehfest(f: &dyn Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let v = stehfest_weights(n);
    let c = std::f64::consts::LN_2 / t;
    c * v
        .iter()
        .enumerate()
        .map(|(i, w)| w * f((i + 1) as f64 * c))
        .sum::<f64>()
}

/// Default Gaver-Stehfest stage count. The weights reach ~4e9 at 16 stages,
/// so rounding in `F` is amplified by that factor; 16 balances it against
/// truncation in double precision.
pub const STEHFEST_STAGES: usize = 16;

/// Invert `F` at `t`.
pub fn laplace_invert(f: &TransformFn<'_>, t: f64, method: Method, tol: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("inversion needs t > 0, got {t}")));
    }
    match method {
        Method::Contour => {
            let fc = f.complex.as_ref().ok_or(Error::Inversion {
                method: Method::Contour.name(),
                t,
                reason: "transform is not evaluable off the real axis".into(),
            })?;
            let m = talbot_nodes_for(tol);
            let eval = |m: usize| {
                let rule = TalbotRule::new(t, m);
                let vals: Vec<Complex64> = rule.nodes.iter().map(|&s| fc(s)).collect();
                rule.apply_with_magnitude(&vals)
            };
            let (a, ma) = eval(m);
            let (b, mb) = eval(m + 6);
            // differences below the rounding level of the sums carry no information
            let floor = (1e3 * f64::EPSILON * ma.max(mb)).max(1e-14);
            check_pair(Method::Contour, t, a, b, tol, floor)
        }
        Method::RealAxis => {
            let real = |x: f64| f.eval_real(x);
            let a = gaver_stehfest(&real, t, STEHFEST_STAGES - 2);
            let b = gaver_stehfest(&real, t, STEHFEST_STAGES);
            check_pair(Method::RealAxis, t, a, b, tol, 1e-14)
        }
    }
}

fn check_pair(method: Method, t: f64, a: f64, b: f64, tol: f64, floor: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Inversion {
            method: method.name(),
            t,
            reason: "non-finite accelerant".into(),
        });
    }
    let diff = (a - b).abs();
    if diff > 10.0 * tol * b.abs() && diff > floor {
        return Err(Error::Inversion {
            method: method.name(),
            t,
            reason: format!("refinement moved the result by {diff:e}"),
        });
    }
    Ok(b)
}
