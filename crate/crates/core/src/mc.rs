//! Monte Carlo for subordinators and their inverses.
//!
//! Every path draws from its own ChaCha8 stream, selected by
//! `(seed, path_index)`, so results do not depend on scheduling. Paths are
//! processed in fixed-size chunks whose sums are combined pairwise.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::kernel::{make_triple, BernsteinTriple, KernelSpec};
use crate::par::{self, Exec};
use crate::quad::{integrate_with_breaks, Tolerance};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Bound on the second moment of the discarded small jumps, which sets
/// the default cutoff.
pub const DEFAULT_SMALL_JUMP_M2: f64 = 1e-6;

const MAX_JUMPS: f64 = 1e8;
const CHUNK: usize = 1024;
const TABLE_POINTS: usize = 4096;

pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// One increment over `dt` of the subordinator with `Phi(l) = l^alpha`,
/// by Kanter's representation of the positive stable law.
pub fn sample_stable_increment<R: Rng + ?Sized>(alpha: f64, dt: f64, rng: &mut R) -> f64 {
    let u = std::f64::consts::PI * rng.random::<f64>();
    let w: f64 = Exp1.sample(rng);
    let x = (alpha * u).sin() / u.sin().powf(1.0 / alpha) * ((1.0 - alpha) * u).sin().powf((1.0 - alpha) / alpha)
        / w.powf((1.0 - alpha) / alpha);
    dt.powf(1.0 / alpha) * x
}

/// A subordinator path: `S(s_grid[i]) = s_values[i]`, rising with slope
/// `drift` between grid points and jumping at them.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub s_grid: Vec<f64>,
    pub s_values: Vec<f64>,
    pub drift: f64,
    pub seed: u64,
}

impl PathSample {
    pub fn new(s_grid: Vec<f64>, s_values: Vec<f64>, drift: f64, seed: u64) -> Result<Self> {
        if s_grid.is_empty() || s_grid.len() != s_values.len() {
            return Err(Error::param("s_grid", "needs as many points as s_values, at least one"));
        }
        if s_grid[0] != 0.0 || s_values[0] != 0.0 {
            return Err(Error::param("s_values", "a path starts at S(0) = 0"));
        }
        if !(drift >= 0.0) {
            return Err(Error::param("drift", format!("{drift} is negative")));
        }
        for i in 1..s_grid.len() {
            let dt = s_grid[i] - s_grid[i - 1];
            if !(dt > 0.0) {
                return Err(Error::param("s_grid", "must increase strictly"));
            }
            if s_values[i] < s_values[i - 1] + drift * dt * (1.0 - 1e-12) {
                return Err(Error::param("s_values", format!("path decreases at s={}", s_grid[i])));
            }
        }
        Ok(Self {
            s_grid,
            s_values,
            drift,
            seed,
        })
    }

    pub fn horizon(&self) -> f64 {
        *self.s_grid.last().unwrap()
    }

    pub fn value_at(&self, s: f64) -> f64 {
        let i = self.s_grid.partition_point(|&g| g <= s).max(1) - 1;
        self.s_values[i] + self.drift * (s - self.s_grid[i])
    }
}

/// `E(t) = inf{s : S(s) > t}` on a stored path.
pub fn first_passage_inverse(path: &PathSample, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("level t={t} must be >= 0")));
    }
    let i = path.s_values.partition_point(|&v| v <= t);
    if i == 0 {
        return Ok(0.0);
    }
    let j = i - 1;
    let (s0, x0) = (path.s_grid[j], path.s_values[j]);
    let seg_end = if i < path.s_grid.len() { path.s_grid[i] } else { path.horizon() };
    if path.drift > 0.0 {
        let s = s0 + (t - x0) / path.drift;
        if s < seg_end {
            return Ok(s);
        }
    }
    if i < path.s_grid.len() {
        Ok(path.s_grid[i])
    } else {
        Err(Error::Domain(format!(
            "path exhausted at horizon {} before level {t}; sample a longer path",
            path.horizon()
        )))
    }
}

/// The normalised jump law on `(eps, inf)`, inverted from a table of the
/// tail `k(t) = sigma((t, inf))` on a logarithmic grid.
#[derive(Debug, Clone)]
struct JumpLaw {
    ln_t: Vec<f64>,
    k: Vec<f64>,
}

impl JumpLaw {
    fn build(triple: &BernsteinTriple, eps: f64) -> Result<Self> {
        let k0 = triple.k(eps)?;
        let cap = match triple.spec() {
            KernelSpec::TruncatedStable { delta, .. } => *delta,
            _ => 1e300,
        };
        let mut t_max = eps;
        while t_max < cap {
            t_max = (t_max * 2.0).min(cap);
            let kt = triple.k(t_max)?;
            if kt <= 1e-17 * k0 {
                break;
            }
        }
        let (a, b) = (eps.ln(), t_max.ln());
        let mut ln_t = Vec::with_capacity(TABLE_POINTS);
        let mut k = Vec::with_capacity(TABLE_POINTS);
        for i in 0..TABLE_POINTS {
            let lt = if i + 1 == TABLE_POINTS {
                b
            } else {
                a + (b - a) * i as f64 / (TABLE_POINTS - 1) as f64
            };
            ln_t.push(lt);
            k.push(if i == 0 { k0 } else { triple.k(lt.exp())?.min(k[i - 1]) });
        }
        Ok(Self { ln_t, k })
    }

    /// The jump `J` with `k(J) = u k(eps)`, `u` in `(0, 1]`.
    fn invert(&self, u: f64) -> f64 {
        let target = u * self.k[0];
        let idx = self.k.partition_point(|&v| v >= target);
        if idx == 0 {
            return self.ln_t[0].exp();
        }
        if idx == self.k.len() {
            return self.ln_t[idx - 1].exp();
        }
        let i = idx - 1;
        let (k0, k1) = (self.k[i], self.k[i + 1]);
        let (t0, t1) = (self.ln_t[i], self.ln_t[i + 1]);
        if k1 > 0.0 {
            let w = (target / k0).ln() / (k1 / k0).ln();
            (t0 + w * (t1 - t0)).exp()
        } else {
            let (e0, e1) = (t0.exp(), t1.exp());
            e0 + (k0 - target) / (k0 - k1) * (e1 - e0)
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Exact {
    Stable(f64),
    SumStable(f64, f64),
    Gamma(f64, f64),
    None,
}

/// Sampler for `S` and `E`: exact laws where they exist, otherwise jumps
/// above `eps` as compound Poisson with the mean of the smaller jumps as
/// drift.
#[derive(Debug, Clone)]
pub struct Sampler {
    triple: BernsteinTriple,
    eps: f64,
    drift: f64,
    rate: f64,
    law: JumpLaw,
    exact: Exact,
}

impl Sampler {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        let triple = make_triple(spec)?;
        let eps = default_eps(&triple, DEFAULT_SMALL_JUMP_M2)?;
        Self::from_triple(triple, eps)
    }

    pub fn with_eps(spec: KernelSpec, eps: f64) -> Result<Self> {
        Self::from_triple(make_triple(spec)?, eps)
    }

    fn from_triple(triple: BernsteinTriple, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::param("eps", format!("{eps} must be > 0")));
        }
        if let KernelSpec::TruncatedStable { delta, .. } = triple.spec() {
            if eps >= *delta {
                return Err(Error::param("eps", format!("cutoff {eps} must lie below delta={delta}")));
            }
        }
        let rate = triple.k(eps)?;
        let drift = triple.integrated_k(eps)? - eps * rate;
        let law = JumpLaw::build(&triple, eps)?;
        let exact = match *triple.spec() {
            KernelSpec::StableAlpha { alpha } => Exact::Stable(alpha),
            KernelSpec::SumStable { alpha, beta } => Exact::SumStable(alpha, beta),
            KernelSpec::GammaSub { a, b } => Exact::Gamma(a, b),
            _ => Exact::None,
        };
        Ok(Self {
            triple,
            eps,
            drift: drift.max(0.0),
            rate,
            law,
            exact,
        })
    }

    pub fn triple(&self) -> &BernsteinTriple {
        &self.triple
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Compensating drift `int_0^eps tau sigma(dtau)`.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Intensity `sigma((eps, inf)) = k(eps)` of the retained jumps.
    pub fn jump_rate(&self) -> f64 {
        self.rate
    }

    pub fn has_exact_law(&self) -> bool {
        !matches!(self.exact, Exact::None)
    }

    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.law.invert(1.0 - rng.random::<f64>())
    }

    /// `S(t)`, exactly when the family allows it.
    pub fn sample_s<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<f64> {
        match self.exact {
            Exact::Stable(a) => Ok(sample_stable_increment(a, t, rng)),
            Exact::SumStable(a, b) => Ok(sample_stable_increment(a, t, rng) + sample_stable_increment(b, t, rng)),
            Exact::Gamma(a, b) => {
                let g = Gamma::new(a * t, 1.0 / b).map_err(|e| Error::param("t", e.to_string()))?;
                Ok(g.sample(rng))
            }
            Exact::None => self.sample_s_compound(t, rng),
        }
    }

    /// `S(t)` from the compound Poisson approximation, for any family.
    pub fn sample_s_compound<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<f64> {
        let mean = self.rate * t;
        self.check_feasible(mean)?;
        let n = if mean > 0.0 {
            Poisson::new(mean).map_err(|e| Error::param("t", e.to_string()))?.sample(rng) as u64
        } else {
            0
        };
        let mut s = self.drift * t;
        for _ in 0..n {
            s += self.sample_jump(rng);
        }
        Ok(s)
    }

    fn check_feasible(&self, expected_jumps: f64) -> Result<()> {
        if expected_jumps > MAX_JUMPS {
            return Err(Error::param(
                "eps",
                format!(
                    "{expected_jumps:.3e} expected jumps above eps={:e}; choose a larger cutoff",
                    self.eps
                ),
            ));
        }
        Ok(())
    }

    /// A compound Poisson path on `[0, horizon]`.
    pub fn sample_path(&self, horizon: f64, seed: u64, path_index: u64) -> Result<PathSample> {
        if !(horizon > 0.0) {
            return Err(Error::param("horizon", format!("{horizon} must be > 0")));
        }
        self.check_feasible(self.rate * horizon)?;
        let mut rng = path_rng(seed, path_index);
        let mut grid = vec![0.0];
        let mut vals = vec![0.0];
        let (mut s, mut x) = (0.0, 0.0);
        loop {
            let dt: f64 = Exp1.sample(&mut rng);
            let dt = dt / self.rate;
            if s + dt >= horizon {
                grid.push(horizon);
                vals.push(x + self.drift * (horizon - s));
                break;
            }
            s += dt;
            x += self.drift * dt + self.sample_jump(&mut rng);
            grid.push(s);
            vals.push(x);
        }
        PathSample::new(grid, vals, self.drift, seed)
    }

    /// `E(t)`. For the stable family `E(t) = (t / S(1))^alpha` exactly;
    /// otherwise the compound Poisson path is run until it passes `t`.
    pub fn sample_e<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("t={t} must be >= 0")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if let Exact::Stable(a) = self.exact {
            return Ok((t / sample_stable_increment(a, 1.0, rng)).powf(a));
        }
        let (mut s, mut x) = (0.0f64, 0.0f64);
        let mut jumps = 0.0;
        loop {
            let dt: f64 = Exp1.sample(rng);
            let dt = dt / self.rate;
            if self.drift > 0.0 && x + self.drift * dt > t {
                return Ok(s + (t - x) / self.drift);
            }
            s += dt;
            x += self.drift * dt + self.sample_jump(rng);
            if x > t {
                return Ok(s);
            }
            jumps += 1.0;
            self.check_feasible(jumps)?;
        }
    }
}

/// Largest dyadic cutoff whose discarded jumps have second moment
/// `int_0^eps tau^2 sigma(dtau) <= m2`.
pub fn default_eps(triple: &BernsteinTriple, m2: f64) -> Result<f64> {
    let cap = match triple.spec() {
        KernelSpec::TruncatedStable { delta, .. } => 0.5 * delta,
        _ => 1.0,
    };
    let mut eps = 1.0f64;
    while eps > cap {
        eps *= 0.5;
    }
    for _ in 0..80 {
        if small_jump_m2(triple, eps)? <= m2 {
            return Ok(eps);
        }
        eps *= 0.5;
    }
    Err(Error::NonConvergence {
        what: "small-jump cutoff".into(),
        achieved: eps,
    })
}

/// `int_0^eps tau^2 sigma(dtau) = int_0^eps 2 s (k(s) - k(eps)) ds`.
pub fn small_jump_m2(triple: &BernsteinTriple, eps: f64) -> Result<f64> {
    let ke = triple.k(eps)?;
    let breaks: Vec<f64> = (1..40).map(|j| eps * 0.5f64.powi(j)).rev().collect();
    let f = |s: f64| if s > 0.0 { 2.0 * s * (triple.k(s).unwrap_or(f64::NAN) - ke) } else { 0.0 };
    Ok(integrate_with_breaks(f, 0.0, eps, &breaks, Tolerance::rel(1e-6))?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl MeanEstimate {
    /// `|mean - target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.std_error
        }
    }
}

/// Means of a vector-valued per-path statistic over `n_paths` paths.
pub fn mc_means<F>(exec: Exec, n_paths: usize, seed: u64, dim: usize, f: F) -> Result<Vec<MeanEstimate>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync + Send,
{
    if n_paths < 2 {
        return Err(Error::param("n_paths", "need at least two paths"));
    }
    let chunks = n_paths.div_ceil(CHUNK);
    let sums = par::try_map_range(exec, chunks, |c| {
        let mut s = vec![0.0; 2 * dim];
        let mut out = vec![0.0; dim];
        for p in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
            let mut rng = path_rng(seed, p as u64);
            f(&mut rng, &mut out)?;
            for d in 0..dim {
                s[d] += out[d];
                s[dim + d] += out[d] * out[d];
            }
        }
        Ok(s)
    })?;
    let n = n_paths as f64;
    Ok((0..dim)
        .map(|d| {
            let sum = par::pairwise_sum(&sums.iter().map(|s| s[d]).collect::<Vec<_>>());
            let sq = par::pairwise_sum(&sums.iter().map(|s| s[dim + d]).collect::<Vec<_>>());
            let mean = sum / n;
            let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
            MeanEstimate {
                mean,
                std_error: (var / n).sqrt(),
                n: n_paths,
            }
        })
        .collect())
}

pub fn mc_mean<F>(exec: Exec, n_paths: usize, seed: u64, f: F) -> Result<MeanEstimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync + Send,
{
    Ok(mc_means(exec, n_paths, seed, 1, |rng, out| {
        out[0] = f(rng)?;
        Ok(())
    })?[0])
}

/// `E[e^(-l S(t))]` for each `l`, from the same samples.
pub fn laplace_of_s(
    sampler: &Sampler,
    t: f64,
    lambdas: &[f64],
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<MeanEstimate>> {
    mc_means(exec, n, seed, lambdas.len(), |rng, out| {
        let s = sampler.sample_s(t, rng)?;
        for (o, l) in out.iter_mut().zip(lambdas) {
            *o = (-l * s).exp();
        }
        Ok(())
    })
}

/// `E[u(E(t))]` with its standard error.
pub fn expect_inverse<U>(sampler: &Sampler, t: f64, n: usize, seed: u64, exec: Exec, u: U) -> Result<MeanEstimate>
where
    U: Fn(f64) -> f64 + Sync + Send,
{
    mc_mean(exec, n, seed, |rng| Ok(u(sampler.sample_e(t, rng)?)))
}

/// `n` draws of one variable, path `i` on stream `i`.
pub fn draw<F>(exec: Exec, n: usize, seed: u64, f: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync + Send,
{
    par::try_map_range(exec, n, |i| f(&mut path_rng(seed, i as u64)))
}

/// Histogram of samples; `counts` plus `overflow` is the sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDensity {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub underflow: u64,
    pub n_samples: u64,
}

impl EmpiricalDensity {
    pub fn from_samples(samples: &[f64], bin_edges: Vec<f64>) -> Result<Self> {
        if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("bin_edges", "need at least two strictly increasing edges"));
        }
        let mut counts = vec![0u64; bin_edges.len() - 1];
        let (mut over, mut under) = (0, 0);
        let last = *bin_edges.last().unwrap();
        for &x in samples {
            if x < bin_edges[0] {
                under += 1;
            } else if x >= last {
                over += 1;
            } else {
                let i = bin_edges.partition_point(|&e| e <= x) - 1;
                counts[i] += 1;
            }
        }
        Ok(Self {
            bin_edges,
            counts,
            overflow: over,
            underflow: under,
            n_samples: samples.len() as u64,
        })
    }

    pub fn masses(&self) -> Vec<f64> {
        let n = self.n_samples as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn overflow_mass(&self) -> f64 {
        self.overflow as f64 / self.n_samples as f64
    }

    /// Mass per unit length in each bin.
    pub fn density(&self) -> Vec<f64> {
        self.masses()
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(m, w)| m / (w[1] - w[0]))
            .collect()
    }
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical KS distance at the 1% level.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}
