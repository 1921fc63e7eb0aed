//! Potentials `U(f, x) = int_0^inf u(t, x) dt`, orbit Green measures, and
//! the naive and renormalized potentials of the time-changed solution.

use crate::dynamics::{liouville_u, Flow, FlowKind, Observable};
use crate::error::{Error, Result};
use crate::kernel::{make_triple, KernelSpec, TimeChange};
use crate::par::{self, Exec};
use crate::quad::{integrate_with_breaks, tanh_sinh, Tolerance};
use crate::subordination::{loglog_slope, SubordinatedSolution};

/// Relative increment below which a doubling counts as Cauchy.
pub const CAUCHY_THRESHOLD: f64 = 1e-4;
/// Consecutive Cauchy doublings required.
pub const CAUCHY_RUN: usize = 3;
const MAX_DOUBLINGS: i32 = 64;

/// `int_0^inf g` over `[0, 1], [1, 2], [2, 4], ...`; converged once
/// [`CAUCHY_RUN`] increments in a row fall below `tol` relative to the
/// running total.
pub fn integrate_halfline(g: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let mut total = 0.0f64;
    let mut run = 0;
    let mut cauchy_run = 0;
    let mut lo = 0.0;
    for j in 0..=MAX_DOUBLINGS {
        let hi = 2f64.powi(j);
        let t = Tolerance::new(1e-2 * tol * total.abs(), 1e-2 * tol).with_max_intervals(2000);
        let inc = integrate_with_breaks(&g, lo, hi, &[], t)?.value;
        if !inc.is_finite() {
            return Err(Error::Domain(format!("integrand not finite on [{lo}, {hi}]")));
        }
        total += inc;
        let rel = inc.abs() / total.abs();
        run = if rel < tol { run + 1 } else { 0 };
        cauchy_run = if rel < CAUCHY_THRESHOLD { cauchy_run + 1 } else { 0 };
        if run >= CAUCHY_RUN {
            return Ok(total);
        }
        lo = hi;
    }
    if total == 0.0 {
        return Ok(0.0);
    }
    if cauchy_run >= CAUCHY_RUN {
        Err(Error::NonConvergence {
            what: "half-line integral".into(),
            achieved: tol,
        })
    } else {
        Err(Error::Divergence(format!(
            "partial integrals not Cauchy up to T=2^{MAX_DOUBLINGS} (last total {total:e})"
        )))
    }
}

/// `U(f, x) = int_0^inf f(X(t, x)) dt`.
pub fn potential_u(flow: &Flow, f: &Observable, x: &[f64], tol: f64) -> Result<f64> {
    flow.field(x)?;
    integrate_halfline(|t| liouville_u(flow, f, t, x).unwrap_or(f64::NAN), tol)
}

/// Whether the orbit of `x` carries a density against arclength.
#[derive(Debug, Clone)]
pub enum Representability {
    Representable(GreenMeasure),
    NotRepresentable(String),
    Unknown(String),
}

/// `mu^x` on the orbit ray `x + s e`, `s in [0, length)`, with density
/// `1 / |b|` against arclength `s`.
#[derive(Debug, Clone)]
pub struct GreenMeasure {
    flow: Flow,
    start: Vec<f64>,
    direction: Vec<f64>,
    length: f64,
}

impl GreenMeasure {
    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    /// Arclength of the orbit (infinite for escaping orbits).
    pub fn length(&self) -> f64 {
        self.length
    }

    /// The orbit point at arclength `s`.
    pub fn point(&self, s: f64) -> Vec<f64> {
        self.start.iter().zip(&self.direction).map(|(x, e)| x + s * e).collect()
    }

    /// Density of `mu^x` at arclength `s`.
    pub fn density(&self, s: f64) -> f64 {
        match self.flow.field(&self.point(s)) {
            Ok(b) => 1.0 / norm(&b),
            Err(_) => f64::NAN,
        }
    }

    /// `int f d mu^x`.
    pub fn integrate(&self, f: &Observable, tol: f64) -> Result<f64> {
        let g = |s: f64| f.eval(&self.point(s)) * self.density(s);
        if self.length.is_finite() {
            Ok(tanh_sinh(g, 0.0, self.length, tol)?.value)
        } else {
            integrate_halfline(g, tol)
        }
    }
}

pub fn representability(flow: &Flow, x: &[f64]) -> Representability {
    match green_measure(flow, x) {
        Ok(g) => Representability::Representable(g),
        Err(Error::NotRepresentable(r)) => Representability::NotRepresentable(r),
        Err(e) => Representability::Unknown(e.to_string()),
    }
}

/// The Green measure of a monotone orbit with non-vanishing speed.
pub fn green_measure(flow: &Flow, x: &[f64]) -> Result<GreenMeasure> {
    let b = flow.field(x)?;
    let speed = norm(&b);
    if speed == 0.0 {
        return Err(Error::NotRepresentable(format!("b vanishes at {x:?}: stationary orbit")));
    }
    let direction: Vec<f64> = b.iter().map(|c| c / speed).collect();
    let length = match flow.kind() {
        FlowKind::Linear { .. } | FlowKind::Power { .. } => f64::INFINITY,
        // speed k|y| vanishes at the origin, reached in infinite time
        FlowKind::Decay { .. } => x[0].abs(),
        FlowKind::Numeric { name, .. } => {
            return Err(Error::Unsupported(format!(
                "orbit of numeric flow `{name}` is not known to be monotone"
            )))
        }
    };
    Ok(GreenMeasure {
        flow: flow.clone(),
        start: x.to_vec(),
        direction,
        length,
    })
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Cumulative `int_0^T v(s, x) ds` at each `T` of an increasing grid.
pub fn partial_integrals(sol: &SubordinatedSolution, ts: &[f64], tol: f64, exec: Exec) -> Result<Vec<f64>> {
    if ts.is_empty() || ts.windows(2).any(|w| !(w[1] > w[0])) || !(ts[0] > 0.0) {
        return Err(Error::param("T", "grid must be positive and increasing"));
    }
    let mut edges = vec![0.0];
    edges.extend_from_slice(ts);
    let v0 = sol.value(0.0)?.abs();
    let pieces = par::try_map_range(exec, ts.len(), |i| {
        let (a, b) = (edges[i], edges[i + 1]);
        // geometric breaks resolve the early transient and the power tail
        let mut breaks = Vec::new();
        let mut c = if a > 0.0 { 2.0 * a } else { 1e-6 * b };
        while c < b {
            breaks.push(c);
            c *= 2.0;
        }
        let t = Tolerance::new(tol * v0, tol).with_max_intervals(4000);
        let r = integrate_with_breaks(|s| sol.value(s).unwrap_or(f64::NAN), a, b, &breaks, t)?;
        if !r.value.is_finite() {
            return Err(Error::NonConvergence {
                what: format!("int v ds on [{a:e}, {b:e}]"),
                achieved: r.error,
            });
        }
        Ok(r.value)
    })?;
    let mut acc = 0.0;
    Ok(pieces
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenormalizedRow {
    pub t: f64,
    pub partial_integral: f64,
    pub n_t: f64,
    /// `partial_integral / N(T)`.
    pub ratio: f64,
}

/// `(1/N(T)) int_0^T v(s, x) ds` along a `T` grid.
pub fn renormalized_vr(
    flow: &Flow,
    f: &Observable,
    x: &[f64],
    spec: &TimeChange,
    ts: &[f64],
    tol: f64,
    exec: Exec,
) -> Result<Vec<RenormalizedRow>> {
    let kspec: &KernelSpec = match spec {
        TimeChange::Identity => {
            return Err(Error::Unsupported(
                "renormalization needs an inverse-subordinator clock; N(T) is degenerate for identity time".into(),
            ))
        }
        TimeChange::Inverse(k) => k,
    };
    let triple = make_triple(kspec.clone())?;
    let sol = SubordinatedSolution::new(spec, flow.clone(), *f, x.to_vec(), 1e-10)?;
    let partials = partial_integrals(&sol, ts, tol, exec)?;
    ts.iter()
        .zip(partials)
        .map(|(&t, p)| {
            let n_t = triple.integrated_k(t)?;
            Ok(RenormalizedRow {
                t,
                partial_integral: p,
                n_t,
                ratio: p / n_t,
            })
        })
        .collect()
}

/// Whether `|ratio / target - 1|` shrinks along the rows.
pub fn renormalization_converging(rows: &[RenormalizedRow], target: f64) -> bool {
    let err: Vec<f64> = rows.iter().map(|r| (r.ratio / target - 1.0).abs()).collect();
    err.len() >= 2 && err.windows(2).all(|w| w[1] < w[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub t_grid: Vec<f64>,
    pub partials: Vec<f64>,
    /// Log-log slope of the partials over the upper half of the grid.
    pub growth_exponent: f64,
    /// True when the last doublings are not Cauchy at [`CAUCHY_THRESHOLD`].
    pub diverges: bool,
}

/// Partial integrals `int_0^T v dt` of the naive potential on a `T` grid.
pub fn naive_v_divergence_check(sol: &SubordinatedSolution, ts: &[f64], exec: Exec) -> Result<DivergenceReport> {
    if ts.len() < 4 {
        return Err(Error::param("T", "need at least four grid points"));
    }
    let partials = partial_integrals(sol, ts, 1e-9, exec)?;
    let half = ts.len() / 2;
    let growth_exponent = loglog_slope(&ts[half..], &partials[half..])?;
    let tail = &partials[partials.len() - CAUCHY_RUN - 1..];
    let cauchy = tail
        .windows(2)
        .all(|w| (w[1] - w[0]).abs() < CAUCHY_THRESHOLD * w[1].abs());
    Ok(DivergenceReport {
        t_grid: ts.to_vec(),
        partials,
        growth_exponent,
        diverges: !cauchy,
    })
}

/// `T0, 2 T0, ..., T0 2^(n-1)`.
pub fn doubling_grid(t0: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| t0 * 2f64.powi(i as i32)).collect()
}
