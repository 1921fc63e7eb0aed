//! The time-changed solution `v(t, x) = E[f(X(E(t), x))]`, the generalized
//! fractional derivative, and long-time profiles.

use std::fmt;

use crate::density::Clock;
use crate::dynamics::{generator, Flow, FlowKind, Observable};
use crate::error::{Error, Result};
use crate::kernel::{BernsteinTriple, KernelSpec, TimeChange};
use crate::mc::{expect_inverse, MeanEstimate, Sampler};
use crate::par::{self, Exec};
use crate::quad::gauss_legendre_10;
use crate::special::gamma;

/// Default step of the convolution grid in [`gfd_apply`].
pub const GFD_STEP: f64 = 1e-4;

/// `v(t, x)` for a flow, an observable, a start point and a clock.
#[derive(Debug, Clone)]
pub struct SubordinatedSolution {
    clock: Clock,
    flow: Flow,
    f: Observable,
    x: Vec<f64>,
    tol: f64,
}

/// How `v` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Route {
    /// `u(tau) = c e^(-z tau)`, so `v(t) = c A(t, z)`.
    Transform { c: f64, z: f64 },
    /// Quadrature of `u` against `G_t`.
    Quadrature,
}

impl SubordinatedSolution {
    pub fn new(time: &TimeChange, flow: Flow, f: Observable, x: Vec<f64>, tol: f64) -> Result<Self> {
        if x.len() != flow.dim() {
            return Err(Error::param("x", format!("dimension {} != flow dimension {}", x.len(), flow.dim())));
        }
        flow.field(&x)?;
        Ok(Self {
            clock: Clock::new(time, tol)?,
            flow,
            f,
            x,
            tol,
        })
    }

    /// Starting from the flow's own `x0`.
    pub fn from_flow(time: &TimeChange, flow: Flow, f: Observable, tol: f64) -> Result<Self> {
        let x = flow.x0().to_vec();
        Self::new(time, flow, f, x, tol)
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn flow(&self) -> &Flow {
        &self.flow
    }

    pub fn observable(&self) -> &Observable {
        &self.f
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn route(&self) -> Route {
        if let Observable::Const { c } = self.f {
            return Route::Transform { c, z: 0.0 };
        }
        match (self.flow.kind(), self.f) {
            (FlowKind::Linear { v }, Observable::ExpAbs { a }) => {
                let nx = norm(&self.x);
                let nv = norm(v);
                let dot: f64 = self.x.iter().zip(v).map(|(x, v)| x * v).sum();
                // |x + v tau| = |x| + |v| tau needs x along +v.
                if nx * nv - dot <= 1e-14 * nx * nv {
                    Route::Transform {
                        c: (-a * nx).exp(),
                        z: a * nv,
                    }
                } else {
                    Route::Quadrature
                }
            }
            (FlowKind::Power { beta, .. }, Observable::ExpPow { a, beta: b }) if *beta == b => Route::Transform {
                c: (-a * self.x[0].powf(b)).exp(),
                z: a,
            },
            _ => Route::Quadrature,
        }
    }

    /// `u(tau) = f(X(tau, x))`, NaN where the flow fails.
    pub fn u(&self, tau: f64) -> f64 {
        self.flow.map(tau, &self.x).map(|y| self.f.eval(&y)).unwrap_or(f64::NAN)
    }

    /// `(L u)(tau) = b . grad f` at `X(tau, x)`.
    pub fn lu(&self, tau: f64) -> f64 {
        self.flow
            .map(tau, &self.x)
            .and_then(|y| generator(&self.flow, &self.f, &y))
            .unwrap_or(f64::NAN)
    }

    /// `v(t, x)`.
    pub fn value(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        match self.route() {
            Route::Transform { c, z } => Ok(c * self.clock.laplace_tau(t, z)?),
            Route::Quadrature => self.value_quadrature(t),
        }
    }

    /// `v(t, x)` by quadrature against `G_t`, whatever the route.
    pub fn value_quadrature(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        self.growth_check()?;
        finite(self.clock.expect(t, |tau| self.u(tau))?, "subordination integral")
    }

    /// `(L v)(t, x)`, the generator applied under the integral.
    pub fn generator_value(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        match self.route() {
            Route::Transform { c, z } => Ok(-z * c * self.clock.laplace_tau(t, z)?),
            Route::Quadrature => {
                self.growth_check()?;
                finite(self.clock.expect(t, |tau| self.lu(tau))?, "generator integral")
            }
        }
    }

    /// `u` must stay bounded by a polynomial in `tau`.
    fn growth_check(&self) -> Result<()> {
        let mut prev = self.u(1.0).abs();
        for j in 1..=40 {
            let tau = 2f64.powi(j);
            let cur = self.u(tau).abs();
            if !cur.is_finite() {
                return Err(Error::Domain(format!("u is not finite at tau={tau}")));
            }
            // Doubling tau may at most multiply u by 2^8.
            if j > 4 && cur > 256.0 * prev.max(1e-300) && cur > 1.0 {
                return Err(Error::Domain(format!("u grows faster than a polynomial near tau={tau}")));
            }
            prev = cur;
        }
        Ok(())
    }
}

/// `E[f(X(E(t), x))]` by Monte Carlo.
pub fn empirical_expectation(
    sol: &SubordinatedSolution,
    sampler: &Sampler,
    t: f64,
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<MeanEstimate> {
    check_t(t)?;
    expect_inverse(sampler, t, n, seed, exec, |tau| sol.u(tau))
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be finite and >= 0, got {t}")));
    }
    Ok(())
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence {
            what: what.into(),
            achieved: f64::NAN,
        })
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Per-cell kernel weights on `[(m-1)h, mh]`, `m = 1..=cells`:
/// `int k` and `int (mh - r) k(r) dr`.
fn kernel_cells(triple: &BernsteinTriple, h: f64, cells: usize) -> Result<Vec<(f64, f64)>> {
    let (xs, ws) = gauss_legendre_10();
    let breaks = triple.kernel_breaks();
    let mut out = Vec::with_capacity(cells);
    for m in 1..=cells {
        let (lo, hi) = ((m - 1) as f64 * h, m as f64 * h);
        let exact = m <= 2 || breaks.iter().any(|&b| b > lo && b < hi);
        let (dn, p) = if exact {
            let dn = triple.integrated_k(hi)? - triple.integrated_k(lo)?;
            let dn1 = triple.first_moment_k(hi)? - triple.first_moment_k(lo)?;
            (dn, hi * dn - dn1)
        } else {
            let (c, r) = (0.5 * (lo + hi), 0.5 * h);
            let mut dn = 0.0;
            let mut p = 0.0;
            for (x, w) in xs.iter().zip(ws) {
                let s = c + r * x;
                let kv = triple.k(s)? * w * r;
                dn += kv;
                p += (hi - s) * kv;
            }
            (dn, p)
        };
        if !(dn.is_finite() && p.is_finite()) {
            return Err(Error::Domain(format!("kernel not integrable on [{lo:e}, {hi:e}]")));
        }
        out.push((dn, p));
    }
    Ok(out)
}

/// `int_0^(nh) k(nh - s) w(s) ds` with `w` piecewise linear on the grid.
fn convolve(cells: &[(f64, f64)], ws: &[f64], h: f64, n: usize) -> f64 {
    let terms: Vec<f64> = (1..=n)
        .map(|m| {
            let (dn, p) = cells[m - 1];
            ws[n - m] * dn + (ws[n - m + 1] - ws[n - m]) * p / h
        })
        .collect();
    par::pairwise_sum(&terms)
}

/// `d/dt int_0^t k(t - s) w(s) ds - k(t) w(0)` from grid values
/// `ws[j] = w(j h)`, `j = 0..=n+1`, at `t = n h`.
pub fn gfd_on_grid(triple: &BernsteinTriple, ws: &[f64], h: f64) -> Result<f64> {
    if ws.len() < 4 {
        return Err(Error::param("ws", "need at least four grid values"));
    }
    if let Some(i) = ws.iter().position(|w| !w.is_finite()) {
        return Err(Error::Domain(format!("w is not finite at s={}", i as f64 * h)));
    }
    let n = ws.len() - 2;
    let cells = kernel_cells(triple, h, n + 1)?;
    let d = (convolve(&cells, ws, h, n + 1) - convolve(&cells, ws, h, n - 1)) / (2.0 * h);
    Ok(d - triple.k(n as f64 * h)? * ws[0])
}

/// The generalized fractional derivative of `w` at `t` with step about `h`.
pub fn gfd_apply(triple: &BernsteinTriple, w: impl Fn(f64) -> f64, t: f64, h: f64) -> Result<f64> {
    let (n, h) = gfd_grid(t, h)?;
    let ws: Vec<f64> = (0..=n + 1).map(|j| w(j as f64 * h)).collect();
    gfd_on_grid(triple, &ws, h)
}

fn gfd_grid(t: f64, h: f64) -> Result<(usize, f64)> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be > 0, got {t}")));
    }
    if !(h > 0.0 && h < t) {
        return Err(Error::param("h", format!("{h} must be in (0, t)")));
    }
    let n = ((t / h).round() as usize).max(2);
    Ok((n, t / n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionResidual {
    pub t: f64,
    pub derivative: f64,
    pub generator: f64,
    pub residual: f64,
    /// `residual / max(|D v|, |L v|)`, zero when both vanish.
    pub relative: f64,
}

/// `|D v(t) - L v(t)|`, both sides from the same evaluation route.
pub fn evolution_residual(sol: &SubordinatedSolution, t: f64, h: f64, exec: Exec) -> Result<EvolutionResidual> {
    let g = sol
        .clock
        .evaluator()
        .ok_or_else(|| Error::Unsupported("evolution equation needs an inverse-subordinator clock".into()))?;
    let (n, h) = gfd_grid(t, h)?;
    let ws = par::try_map_range(exec, n + 2, |j| sol.value(j as f64 * h))?;
    let derivative = gfd_on_grid(g.triple(), &ws, h)?;
    let generator = sol.generator_value(t)?;
    let residual = (derivative - generator).abs();
    let scale = derivative.abs().max(generator.abs());
    Ok(EvolutionResidual {
        t,
        derivative,
        generator,
        residual,
        relative: if scale == 0.0 { 0.0 } else { residual / scale },
    })
}

/// A slowly varying factor `Q(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowVar {
    One,
    /// `1 + t^p`, `p < 0`.
    OnePlusPower { p: f64 },
    /// `1 / ln t`.
    InvLog,
    Const { c: f64 },
}

impl SlowVar {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SlowVar::One => 1.0,
            SlowVar::OnePlusPower { p } => 1.0 + t.powf(p),
            SlowVar::InvLog => 1.0 / t.ln(),
            SlowVar::Const { c } => c,
        }
    }
}

impl fmt::Display for SlowVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlowVar::One => write!(f, "1"),
            SlowVar::OnePlusPower { p } => write!(f, "1+t^{p}"),
            SlowVar::InvLog => write!(f, "1/ln(t)"),
            SlowVar::Const { c } => write!(f, "{c}"),
        }
    }
}

/// `K(l) ~ l^(-gamma) Q(1/l)` as `l -> 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticProfile {
    pub gamma_exp: f64,
    pub q: SlowVar,
    pub valid: bool,
    pub reason: Option<String>,
}

impl AsymptoticProfile {
    fn valid(gamma_exp: f64, q: SlowVar) -> Self {
        Self {
            gamma_exp,
            q,
            valid: true,
            reason: None,
        }
    }

    fn boundary(q: f64, why: &str) -> Self {
        Self {
            gamma_exp: 0.0,
            q: SlowVar::Const { c: q },
            valid: false,
            reason: Some(format!("K(0+) = {q} is finite ({why}); gamma = 0 is refused")),
        }
    }
}

pub fn asymptotic_profile(spec: &KernelSpec) -> AsymptoticProfile {
    match *spec {
        KernelSpec::StableAlpha { alpha } => AsymptoticProfile::valid(1.0 - alpha, SlowVar::One),
        KernelSpec::SumStable { alpha, beta } => {
            AsymptoticProfile::valid(1.0 - alpha, SlowVar::OnePlusPower { p: alpha - beta })
        }
        KernelSpec::DistributedOrder => AsymptoticProfile::valid(1.0, SlowVar::InvLog),
        KernelSpec::GammaSub { a, b } => AsymptoticProfile::boundary(a / b, "finite mean jump"),
        KernelSpec::TemperedStable { alpha, gamma } => {
            AsymptoticProfile::boundary(gamma.powf(alpha - 1.0), "tempering gives a finite mean")
        }
        KernelSpec::TruncatedStable { alpha, delta } => AsymptoticProfile::boundary(
            delta.powf(1.0 - alpha) / ((1.0 - alpha) * gamma(1.0 - alpha)),
            "bounded jumps",
        ),
        KernelSpec::Custom(_) => AsymptoticProfile {
            gamma_exp: f64::NAN,
            q: SlowVar::One,
            valid: false,
            reason: Some("no symbolic profile for a custom kernel".into()),
        },
    }
}

/// `K(l) l^gamma / Q(1/l)` at each `l`; tends to 1 for a correct profile.
pub fn profile_probe(triple: &BernsteinTriple, profile: &AsymptoticProfile, lambdas: &[f64]) -> Result<Vec<f64>> {
    lambdas
        .iter()
        .map(|&l| Ok(triple.big_k(l)? * l.powf(profile.gamma_exp) / profile.q.eval(1.0 / l)))
        .collect()
}

/// `t^(gamma-1) Q(t) / (z Gamma(gamma))`.
pub fn predicted_decay(profile: &AsymptoticProfile, z: f64, t: f64) -> Result<f64> {
    if !profile.valid {
        return Err(Error::Unsupported(
            profile.reason.clone().unwrap_or_else(|| "profile not valid".into()),
        ));
    }
    let g = profile.gamma_exp;
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::Domain(format!("gamma = {g} outside (0, 1]")));
    }
    if !(z > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!("need z > 0 and t > 0, got z={z}, t={t}")));
    }
    Ok(t.powf(g - 1.0) * profile.q.eval(t) / (z * gamma(g)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRow {
    pub t: f64,
    pub v: f64,
    pub predicted: f64,
    pub ratio: f64,
}

/// `v(t)` against `c t^(gamma-1) Q(t) / (z Gamma(gamma))` on a grid; needs
/// the transform route.
pub fn asymptotic_rows(sol: &SubordinatedSolution, ts: &[f64], exec: Exec) -> Result<Vec<AsymptoticRow>> {
    let g = sol
        .clock
        .evaluator()
        .ok_or_else(|| Error::Unsupported("asymptotics need an inverse-subordinator clock".into()))?;
    let (c, z) = match sol.route() {
        Route::Transform { c, z } if z > 0.0 => (c, z),
        _ => {
            return Err(Error::Unsupported(
                "asymptotics need u(tau) = c exp(-z tau) with z > 0".into(),
            ))
        }
    };
    let profile = asymptotic_profile(g.triple().spec());
    par::try_map(exec, ts, |&t| {
        let v = sol.value(t)?;
        let predicted = c * predicted_decay(&profile, z, t)?;
        Ok(AsymptoticRow {
            t,
            v,
            predicted,
            ratio: v / predicted,
        })
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::param("xs", "need at least two paired points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("log-log fit needs distinct x".into()));
    }
    Ok(sxy / sxx)
}
