//! The density `G_t(tau)` of the inverse subordinator `E(t)`.
//!
//! In `t` at fixed `tau` the density has the Laplace transform
//! `K(l) e^(-tau l K(l))`, which is inverted on a Talbot contour or on the
//! real axis. The stable family also has the closed M-Wright form.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{hypothesis_h_check, make_triple, BernsteinTriple, KernelSpec, TimeChange};
use crate::laplace::{
    laplace_forward, laplace_invert, stehfest_nodes, stehfest_weights, talbot_contour, talbot_nodes_for, Method,
    TransformFn, STEHFEST_STAGES,
};
use crate::par::{self, Exec};
use crate::quad::{integrate_with_breaks, Tolerance};
use crate::special::{mittag_leffler, stable_inverse_density_closed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityMethod {
    /// `t^(-alpha) M_alpha(tau t^(-alpha))`; stable family only.
    ClosedForm,
    /// Talbot inversion in `t`.
    Contour,
    /// Gaver-Stehfest inversion in `t`.
    RealAxis,
}

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GEvaluator {
    triple: BernsteinTriple,
    method: DensityMethod,
    tol: f64,
    outside_h: bool,
}

/// Density `tau -> G_t(tau)` at one fixed `t`, with the transform values at
/// the inversion nodes computed once.
#[derive(Debug)]
pub struct DensitySlice<'a> {
    t: f64,
    kind: SliceKind<'a>,
}

#[derive(Debug)]
enum SliceKind<'a> {
    Closed { alpha: f64 },
    Contour(ContourSlice<'a>),
    Real { w: Vec<f64>, k: Vec<f64>, phi: Vec<f64> },
}

/// For large `tau` the factor `e^(-tau Phi(s))` grows on the left part of a
/// contour sized for `t` alone. Past the typical scale the contour radius is
/// widened, starting from the real saddle of `s t - tau Phi(s)`, to the
/// radius with the smallest error indicator; one contour per quarter octave
/// of `tau`.
///
/// When `K` is analytic left of the origin (singularities at `Re s <= c <
/// 0`) the contours are centred at `c`, which carries the `e^(c t)` decay,
/// and the buckets also extend below the typical scale: there the saddle
/// moves away from `c` long before it moves away from the origin.
#[derive(Debug)]
struct ContourSlice<'a> {
    triple: &'a BernsteinTriple,
    t: f64,
    m: usize,
    r0: f64,
    scale: f64,
    tol: f64,
    shift: f64,
    low_octaves: usize,
    base: ContourNodes,
    octaves: Vec<OnceLock<Option<ContourNodes>>>,
}

const OCTAVES: usize = 80;
/// Octaves below the typical scale covered by buckets on shifted contours.
const LOW_OCTAVES: usize = 40;
const BUCKETS_PER_OCTAVE: usize = 4;
const MAX_NODES: usize = 4000;

#[derive(Debug)]
struct ContourNodes {
    a: Vec<Complex64>,
    st: Vec<Complex64>,
    phi: Vec<Complex64>,
}

impl ContourNodes {
    fn build(triple: &BernsteinTriple, t: f64, m: usize, r: f64, shift: f64) -> Self {
        let mut out = Self {
            a: Vec::with_capacity(m),
            st: Vec::with_capacity(m),
            phi: Vec::with_capacity(m),
        };
        for (u, w) in talbot_contour(m, r) {
            let s = u + shift;
            let k = triple
                .big_k_complex(s)
                .unwrap_or(Complex64::new(f64::NAN, 0.0));
            out.a.push(w * k);
            out.st.push(s * t);
            out.phi.push(s * k);
        }
        out
    }

    /// Rough error of the rule at `tau`: weight on the far left of the
    /// contour, where `e^(s t)` should have killed the integrand, plus
    /// rounding on the absolute node sum.
    fn error_indicator(&self, tau: f64) -> f64 {
        let n = self.a.len();
        let mut total = 0.0;
        let mut far = 0.0;
        for (k, ((a, st), p)) in self.a.iter().zip(&self.st).zip(&self.phi).enumerate() {
            let v = (a * (st - tau * p).exp()).norm();
            total += v;
            if 4 * k >= 3 * n {
                far += v;
            }
        }
        far + f64::EPSILON * total
    }

    fn eval(&self, tau: f64) -> f64 {
        self.a
            .iter()
            .zip(&self.st)
            .zip(&self.phi)
            .map(|((a, st), p)| (a * (st - tau * p).exp()).re)
            .sum()
    }
}

impl ContourSlice<'_> {
    fn nodes_for(&self, tau: f64) -> Option<&ContourNodes> {
        let offset = (BUCKETS_PER_OCTAVE * self.low_octaves) as f64;
        let pos = BUCKETS_PER_OCTAVE as f64 * (tau / self.scale).log2() + offset;
        if tau <= self.scale && self.low_octaves == 0 || !(pos >= 0.0) {
            return Some(&self.base);
        }
        let j = (pos.floor() as usize).min(self.octaves.len() - 1);
        self.octaves[j]
            .get_or_init(|| {
                let step = 2f64.powf(1.0 / BUCKETS_PER_OCTAVE as f64);
                let tau_hi = self.scale * step.powi(j as i32 + 1 - offset as i32);
                let limit = self.tol / self.scale;
                let mut best: Option<(f64, ContourNodes)> = None;
                let consider = |best: &mut Option<(f64, ContourNodes)>, m: usize, r: f64, shift: f64| {
                    let nodes = ContourNodes::build(self.triple, self.t, m, r, shift);
                    // both ends: a contour tuned to one end can lose the other
                    let err = nodes.error_indicator(tau_hi).max(nodes.error_indicator(tau_hi / step));
                    if err.is_finite() && best.as_ref().is_none_or(|(e, _)| err < *e) {
                        *best = Some((err, nodes));
                    }
                };
                if self.shift < 0.0 {
                    // anchored at the branch point first; a contour past the
                    // node cap gives indicators that cannot be trusted
                    let mut r = self.r0.max(self.saddle(tau_hi));
                    for _ in 0..12 {
                        let want = (2.5 * r * self.t).ceil();
                        if want > MAX_NODES as f64 {
                            break;
                        }
                        let before = best.as_ref().map(|(e, _)| *e);
                        consider(&mut best, (want as usize).max(self.m), r, self.shift);
                        // past the minimum once it is good enough
                        if before.is_some_and(|e| e <= limit) && best.as_ref().map(|(e, _)| *e) == before {
                            break;
                        }
                        r *= std::f64::consts::SQRT_2;
                    }
                    // then tighter contours through the real saddle, for
                    // saddles far from the branch point
                    if best.as_ref().is_none_or(|(e, _)| *e > limit) {
                        let s_star = self.shifted_saddle(tau_hi / step.sqrt());
                        let u = s_star - self.shift;
                        for j in 1..16 {
                            let r = u * 2f64.powf(-0.5 * j as f64);
                            let want = (2.5 * r * self.t).ceil();
                            if want <= MAX_NODES as f64 {
                                consider(&mut best, (want as usize).max(self.m), r, s_star - r);
                            }
                        }
                    }
                } else {
                    let mut r = self.r0.max(self.saddle(tau_hi));
                    for _ in 0..12 {
                        // keep the Talbot balance r t = 2M/5
                        let m = ((2.5 * r * self.t).ceil() as usize).clamp(self.m, MAX_NODES);
                        let before = best.as_ref().map(|(e, _)| *e);
                        consider(&mut best, m, r, 0.0);
                        let stalled = before.is_some_and(|e| e <= limit) && best.as_ref().map(|(e, _)| *e) == before;
                        if m == MAX_NODES || stalled {
                            break;
                        }
                        r *= std::f64::consts::SQRT_2;
                    }
                }
                // None marks a bucket no contour resolves
                best.filter(|(e, _)| *e <= limit).map(|(_, n)| n)
            })
            .as_ref()
    }

    /// Minimiser of the convex `s t - tau Phi(s)` over real `s > shift`.
    fn shifted_saddle(&self, tau: f64) -> f64 {
        let g = |s: f64| match self.triple.big_k_complex(Complex64::new(s, 0.0)) {
            Some(k) => s * self.t - tau * s * k.re,
            None => f64::NAN,
        };
        // golden section in log(s - shift)
        let c = self.shift;
        let (mut a, mut b) = ((c.abs() * 1e-14).ln(), (c.abs() * 1e4 + 1e4 / self.t).ln());
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let at = |l: f64| g(c + l.exp());
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let (mut f1, mut f2) = (at(x1), at(x2));
        for _ in 0..120 {
            if f1 <= f2 || f2.is_nan() {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = at(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = at(x2);
            }
        }
        c + (0.5 * (a + b)).exp()
    }

    /// Minimiser of `s t - tau Phi(s)` over real `s = shift + u`, as `u >= r0`.
    fn saddle(&self, tau: f64) -> f64 {
        let g = |u: f64| {
            let s = self.shift + u;
            match self.triple.big_k_complex(Complex64::new(s, 0.0)) {
                Some(k) => s * self.t - tau * s * k.re,
                None => f64::NAN,
            }
        };
        let step = 2f64.powf(0.25);
        let mut s = self.r0;
        let mut gs = g(s);
        for _ in 0..400 {
            let next = g(s * step);
            if !(next < gs) {
                break;
            }
            s *= step;
            gs = next;
        }
        s
    }
}

impl DensitySlice<'_> {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eval(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        let g = match &self.kind {
            SliceKind::Closed { alpha } => stable_inverse_density_closed(*alpha, self.t, tau).unwrap_or(f64::NAN),
            SliceKind::Contour(c) => c.nodes_for(tau).map_or(f64::NAN, |n| n.eval(tau)),
            SliceKind::Real { w, k, phi } => w
                .iter()
                .zip(k)
                .zip(phi)
                .map(|((w, k), p)| w * k * (-tau * p).exp())
                .sum(),
        };
        if g.is_nan() { g } else { g.max(0.0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleLaplace {
    pub value: f64,
    pub target: f64,
    pub rel_err: f64,
}

impl GEvaluator {
    pub fn new(triple: BernsteinTriple, method: DensityMethod, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol <= 1e-2) {
            return Err(Error::param("tol", format!("{tol} not in (0, 1e-2]")));
        }
        match method {
            DensityMethod::ClosedForm if !matches!(triple.spec(), KernelSpec::StableAlpha { .. }) => {
                return Err(Error::Unsupported(format!(
                    "closed-form density exists only for the stable family, not {}",
                    triple.spec().family()
                )))
            }
            DensityMethod::Contour if !triple.contour_capable() => {
                return Err(Error::Unsupported(format!(
                    "{} has no analytic continuation of K; use the real-axis method",
                    triple.spec().family()
                )))
            }
            _ => {}
        }
        let outside_h = !hypothesis_h_check(&triple).holds();
        Ok(Self {
            triple,
            method,
            tol,
            outside_h,
        })
    }

    /// Closed form for the stable family, Talbot where `K` continues
    /// analytically, Gaver-Stehfest otherwise.
    pub fn from_spec(spec: KernelSpec, tol: f64) -> Result<Self> {
        let triple = make_triple(spec)?;
        let method = if matches!(triple.spec(), KernelSpec::StableAlpha { .. }) {
            DensityMethod::ClosedForm
        } else if triple.contour_capable() {
            DensityMethod::Contour
        } else {
            DensityMethod::RealAxis
        };
        Self::new(triple, method, tol)
    }

    pub fn triple(&self) -> &BernsteinTriple {
        &self.triple
    }

    pub fn method(&self) -> DensityMethod {
        self.method
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// True when the kernel violates hypothesis (H); densities are still
    /// produced but results that rest on (H) do not apply.
    pub fn outside_h(&self) -> bool {
        self.outside_h
    }

    fn talbot_m(&self) -> usize {
        talbot_nodes_for(self.tol)
    }

    pub fn slice(&self, t: f64) -> Result<DensitySlice<'_>> {
        self.slice_with(t, self.talbot_m(), STEHFEST_STAGES)
    }

    fn slice_with(&self, t: f64, m: usize, n_gs: usize) -> Result<DensitySlice<'_>> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("G_t needs t > 0, got {t}")));
        }
        let kind = match self.method {
            DensityMethod::ClosedForm => {
                let KernelSpec::StableAlpha { alpha } = *self.triple.spec() else {
                    unreachable!("checked in new")
                };
                SliceKind::Closed { alpha }
            }
            DensityMethod::Contour => {
                let r0 = 2.0 * m as f64 / (5.0 * t);
                let shift = self.triple.singular_abscissa();
                let low_octaves = if shift < 0.0 { LOW_OCTAVES } else { 0 };
                SliceKind::Contour(ContourSlice {
                    triple: &self.triple,
                    t,
                    m,
                    r0,
                    scale: self.tau_scale(t)?,
                    tol: self.tol,
                    shift,
                    low_octaves,
                    base: ContourNodes::build(&self.triple, t, m, r0, shift),
                    octaves: (0..(OCTAVES + low_octaves) * BUCKETS_PER_OCTAVE)
                        .map(|_| OnceLock::new())
                        .collect(),
                })
            }
            DensityMethod::RealAxis => {
                let c = std::f64::consts::LN_2 / t;
                let w: Vec<f64> = stehfest_weights(n_gs).into_iter().map(|v| v * c).collect();
                let mut k = Vec::with_capacity(n_gs);
                let mut phi = Vec::with_capacity(n_gs);
                for l in stehfest_nodes(t, n_gs) {
                    let kl = self.triple.big_k(l)?;
                    k.push(kl);
                    phi.push(l * kl);
                }
                SliceKind::Real { w, k, phi }
            }
        };
        Ok(DensitySlice { t, kind })
    }

    /// Typical size of `E(t)`: `1/Phi(1/t)`.
    pub fn tau_scale(&self, t: f64) -> Result<f64> {
        Ok(1.0 / self.triple.phi(1.0 / t)?)
    }

    /// A `tau` beyond which `P(E(t) > tau) <= tail`, from the Chernoff bound
    /// `P(S(tau) < t) <= exp(l t - tau Phi(l))` minimised over `l = c/t`.
    pub fn tau_cutoff(&self, t: f64, tail: f64) -> Result<f64> {
        let log_inv = (1.0 / tail).ln();
        let mut best = f64::INFINITY;
        for j in -20..=40 {
            let c = 2f64.powf(0.5 * j as f64);
            let p = self.triple.phi(c / t)?;
            if p > 0.0 {
                best = best.min((c + log_inv) / p);
            }
        }
        if !best.is_finite() {
            return Err(Error::NonConvergence {
                what: format!("tau cutoff at t={t}"),
                achieved: f64::INFINITY,
            });
        }
        Ok(best)
    }

    /// `G_t(tau)`, with an error if refining the inversion moves the value.
    pub fn g_eval(&self, t: f64, tau: f64) -> Result<f64> {
        if tau < 0.0 {
            return Err(Error::Domain(format!("tau must be >= 0, got {tau}")));
        }
        let g = self.slice(t)?.eval(tau);
        if self.method == DensityMethod::ClosedForm {
            return Ok(g);
        }
        let (alt, tol) = match self.method {
            DensityMethod::Contour => (self.slice_with(t, self.talbot_m() + 6, STEHFEST_STAGES)?.eval(tau), self.tol),
            _ => (
                self.slice_with(t, 0, STEHFEST_STAGES - 2)?.eval(tau),
                self.effective_tol(),
            ),
        };
        let floor = tol / self.tau_scale(t)?;
        let diff = (g - alt).abs();
        if !g.is_finite() || (diff > 10.0 * tol * g && diff > floor) {
            return Err(Error::Inversion {
                method: self.inversion_method().name(),
                t,
                reason: format!("G at tau={tau} unstable under refinement ({g:e} vs {alt:e})"),
            });
        }
        Ok(g)
    }

    /// Gaver-Stehfest in double precision resolves about six digits.
    pub fn effective_tol(&self) -> f64 {
        match self.method {
            DensityMethod::RealAxis => self.tol.max(1e-6),
            _ => self.tol,
        }
    }

    fn inversion_method(&self) -> Method {
        match self.method {
            DensityMethod::RealAxis => Method::RealAxis,
            _ => Method::Contour,
        }
    }

    /// `int_0^inf f(tau) G_t(tau) dtau`.
    /// On the real axis the result is repeated with two fewer stages and
    /// refused if the two disagree.
    pub fn integrate_tau(&self, t: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        let slice = self.slice(t)?;
        let v = self.integrate_slice(&slice, &f)?;
        if self.method == DensityMethod::RealAxis {
            let alt = self.integrate_slice(&self.slice_with(t, 0, STEHFEST_STAGES - 2)?, &f)?;
            let tol = self.effective_tol();
            if (v - alt).abs() > 10.0 * tol * v.abs().max(tol) {
                return Err(Error::Inversion {
                    method: Method::RealAxis.name(),
                    t,
                    reason: format!("tau-integral unstable under refinement ({v:e} vs {alt:e})"),
                });
            }
        }
        Ok(v)
    }

    pub fn integrate_slice(&self, slice: &DensitySlice, f: impl Fn(f64) -> f64) -> Result<f64> {
        let t = slice.t;
        let m = self.tau_scale(t)?;
        let tau_max = self.tau_cutoff(t, 1e-3 * self.tol)?;
        let mut breaks = Vec::new();
        let mut b = m / 256.0;
        while b < tau_max {
            breaks.push(b);
            b *= 2.0;
        }
        let rel = self.effective_tol().max(1e-13);
        // integrands far below the density scale would otherwise chase rounding
        let tol = Tolerance::new(1e-6 * rel * f(0.0).abs(), rel).with_max_intervals(5000);
        let r = integrate_with_breaks(|tau| f(tau) * slice.eval(tau), 0.0, tau_max, &breaks, tol)?;
        Ok(r.value)
    }

    pub fn normalization(&self, t: f64) -> Result<f64> {
        self.integrate_tau(t, |_| 1.0)
    }

    /// `E[E(t)^n]` by quadrature in `tau`.
    pub fn moment(&self, t: f64, n: u32) -> Result<f64> {
        if !(1..=4).contains(&n) {
            return Err(Error::param("n", format!("moment order {n} not in 1..=4")));
        }
        self.integrate_tau(t, |tau| tau.powi(n as i32))
    }

    /// `A(t, z) = int e^(-z tau) G_t(tau) dtau`, by one inversion of
    /// `K(l)/(l K(l) + z)` (or `E_alpha(-z t^alpha)` in closed form).
    pub fn laplace_tau(&self, t: f64, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(Error::Domain(format!("z must be >= 0, got {z}")));
        }
        if !(t > 0.0) {
            return Err(Error::Domain(format!("t must be > 0, got {t}")));
        }
        if z == 0.0 {
            return Ok(1.0);
        }
        let tr = &self.triple;
        match self.method {
            DensityMethod::ClosedForm => {
                let KernelSpec::StableAlpha { alpha } = *tr.spec() else {
                    unreachable!("checked in new")
                };
                mittag_leffler(alpha, -z * t.powf(alpha))
            }
            DensityMethod::Contour => {
                let f = TransformFn::contour(move |s: Complex64| {
                    let k = tr.big_k_complex(s).expect("contour-capable");
                    k / (s * k + z)
                });
                laplace_invert(&f, t, Method::Contour, self.tol).map(|a| a.max(0.0))
            }
            DensityMethod::RealAxis => {
                let f = TransformFn::real(move |l: f64| match tr.big_k(l) {
                    Ok(k) => k / (l * k + z),
                    Err(_) => f64::NAN,
                });
                laplace_invert(&f, t, Method::RealAxis, self.effective_tol()).map(|a| a.max(0.0))
            }
        }
    }

    /// `A(t, z)` by quadrature against the inverted density.
    pub fn laplace_tau_quadrature(&self, t: f64, z: f64) -> Result<f64> {
        self.integrate_tau(t, |tau| (-z * tau).exp())
    }

    /// Double transform `int e^(-l t) int e^(-p tau) G_t(tau) dtau dt`
    /// against `K(l)/(l K(l) + p)`.
    pub fn double_laplace_check(&self, lambda: f64, p: f64) -> Result<DoubleLaplace> {
        if !(lambda > 0.0) || !(p >= 0.0) {
            return Err(Error::Domain(format!("need lambda > 0, p >= 0; got {lambda}, {p}")));
        }
        let inner = |t: f64| {
            if t < 1e-250 {
                // A(0+, p) = 1; the t-weight makes the remainder negligible
                return 1.0;
            }
            if lambda * t > 745.0 {
                // e^(-lambda t) underflows and A is in [0, 1]
                return 0.0;
            }
            self.laplace_tau_quadrature(t, p).unwrap_or(f64::NAN)
        };
        let value = laplace_forward(inner, lambda, 1e-8)?;
        let k = self.triple.big_k(lambda)?;
        let target = k / (lambda * k + p);
        Ok(DoubleLaplace {
            value,
            target,
            rel_err: (value - target).abs() / target,
        })
    }

    /// `(t, tau, G)` rows for every pair of the two grids, in row-major order.
    pub fn grid(&self, ts: &[f64], taus: &[f64], exec: Exec) -> Result<Vec<[f64; 3]>> {
        let rows = par::try_map(exec, ts, |&t| {
            let s = self.slice(t)?;
            Ok(taus.iter().map(|&tau| [t, tau, s.eval(tau)]).collect::<Vec<_>>())
        })?;
        Ok(rows.into_iter().flatten().collect())
    }
}

/// A clock for time-changed observables: identity or an inverse subordinator.
#[derive(Debug, Clone)]
pub enum Clock {
    Identity,
    Inverse(GEvaluator),
}

impl Clock {
    pub fn new(tc: &TimeChange, tol: f64) -> Result<Self> {
        Ok(match tc {
            TimeChange::Identity => Clock::Identity,
            TimeChange::Inverse(spec) => Clock::Inverse(GEvaluator::from_spec(spec.clone(), tol)?),
        })
    }

    pub fn evaluator(&self) -> Option<&GEvaluator> {
        match self {
            Clock::Identity => None,
            Clock::Inverse(g) => Some(g),
        }
    }

    /// `E[f(E(t))]`.
    pub fn expect(&self, t: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        match self {
            Clock::Identity => Ok(f(t)),
            Clock::Inverse(g) => {
                if t == 0.0 {
                    return Ok(f(0.0));
                }
                g.integrate_tau(t, f)
            }
        }
    }

    pub fn laplace_tau(&self, t: f64, z: f64) -> Result<f64> {
        match self {
            Clock::Identity => Ok((-z * t).exp()),
            Clock::Inverse(g) => {
                if t == 0.0 {
                    return Ok(1.0);
                }
                g.laplace_tau(t, z)
            }
        }
    }

    pub fn moment(&self, t: f64, n: u32) -> Result<f64> {
        match self {
            Clock::Identity => Ok(t.powi(n as i32)),
            Clock::Inverse(g) => g.moment(t, n),
        }
    }
}
