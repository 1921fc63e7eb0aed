//! Subordinator families and their Bernstein triples `(Phi, K, k)`.
//!
//! For a Levy measure `sigma` on `(0, inf)`:
//! `Phi(l) = int (1 - e^(-l s)) sigma(ds)`, `k(t) = sigma((t, inf))`,
//! `K(l) = int e^(-l t) k(t) dt` and `Phi(l) = l K(l)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::config::Kv;
use crate::error::{Error, Result};
use crate::laplace::laplace_forward_log;
use crate::quad::{exp_sinh, integrate_with_breaks, tanh_sinh, Tolerance};
use crate::special::{gamma, incomplete_gamma_lower, incomplete_gamma_upper, rgamma};

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied Levy density `tau -> nu(tau) >= 0`.
#[derive(Clone)]
pub struct CustomLevy {
    pub name: String,
    density: DensityFn,
}

impl CustomLevy {
    pub fn new(name: impl Into<String>, density: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            density: Arc::new(density),
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        (self.density)(tau)
    }
}

impl fmt::Debug for CustomLevy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLevy").field("name", &self.name).finish_non_exhaustive()
    }
}

impl PartialEq for CustomLevy {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && Arc::ptr_eq(&self.density, &other.density)
    }
}

/// The subordinator families of the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `Phi = l^alpha`.
    StableAlpha { alpha: f64 },
    /// `Phi = a log(1 + l/b)`.
    GammaSub { a: f64, b: f64 },
    /// Stable Levy measure restricted to `(0, delta]`.
    TruncatedStable { alpha: f64, delta: f64 },
    /// `Phi = l^alpha + l^beta`.
    SumStable { alpha: f64, beta: f64 },
    /// Kernel `k(t) = t^(-alpha) e^(-gamma t) / Gamma(1-alpha)`.
    TemperedStable { alpha: f64, gamma: f64 },
    /// `K(l) = int_0^1 l^(a-1) da = (l - 1)/(l log l)`.
    DistributedOrder,
    Custom(CustomLevy),
}

fn open_unit(field: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::param(field, format!("{x} not in the open interval (0,1)")))
    }
}

fn positive(field: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("{x} must be positive and finite")))
    }
}

impl KernelSpec {
    pub fn stable(alpha: f64) -> Result<Self> {
        Self::StableAlpha { alpha }.validated()
    }

    pub fn gamma(a: f64, b: f64) -> Result<Self> {
        Self::GammaSub { a, b }.validated()
    }

    pub fn truncated(alpha: f64, delta: f64) -> Result<Self> {
        Self::TruncatedStable { alpha, delta }.validated()
    }

    pub fn sum_stable(alpha: f64, beta: f64) -> Result<Self> {
        Self::SumStable { alpha, beta }.validated()
    }

    pub fn tempered(alpha: f64, gamma: f64) -> Result<Self> {
        Self::TemperedStable { alpha, gamma }.validated()
    }

    pub fn distributed() -> Self {
        Self::DistributedOrder
    }

    pub fn custom(name: impl Into<String>, density: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(CustomLevy::new(name, density))
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::StableAlpha { alpha } => open_unit("alpha", alpha),
            Self::GammaSub { a, b } => positive("a", a).and(positive("b", b)),
            Self::TruncatedStable { alpha, delta } => open_unit("alpha", alpha).and(positive("delta", delta)),
            Self::SumStable { alpha, beta } => {
                open_unit("alpha", alpha)?;
                open_unit("beta", beta)?;
                if alpha >= beta {
                    return Err(Error::param("beta", format!("need alpha < beta, got {alpha} >= {beta}")));
                }
                Ok(())
            }
            Self::TemperedStable { alpha, gamma } => open_unit("alpha", alpha).and(positive("gamma", gamma)),
            Self::DistributedOrder | Self::Custom(_) => Ok(()),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::StableAlpha { .. } => "stable",
            Self::GammaSub { .. } => "gamma",
            Self::TruncatedStable { .. } => "truncstable",
            Self::SumStable { .. } => "sumstable",
            Self::TemperedStable { .. } => "tempered",
            Self::DistributedOrder => "distributed",
            Self::Custom(_) => "custom",
        }
    }

    /// Parse the kernel part of an already tokenised config, leaving other
    /// keys in place.
    pub(crate) fn from_kv(kv: &mut Kv, family: &str) -> Result<Self> {
        match family {
            "stable" => Self::stable(kv.take_f64("alpha")?),
            "gamma" => Self::gamma(kv.take_f64("a")?, kv.take_f64("b")?),
            "truncstable" => Self::truncated(kv.take_f64("alpha")?, kv.take_f64("delta")?),
            "sumstable" => Self::sum_stable(kv.take_f64("alpha")?, kv.take_f64("beta")?),
            "tempered" => Self::tempered(kv.take_f64("alpha")?, kv.take_f64("gamma")?),
            "distributed" => Ok(Self::DistributedOrder),
            "custom" => Err(Error::Config("custom Levy densities are only available through the library API".into())),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::StableAlpha { alpha } => write!(f, "family=stable alpha={alpha}"),
            Self::GammaSub { a, b } => write!(f, "family=gamma a={a} b={b}"),
            Self::TruncatedStable { alpha, delta } => write!(f, "family=truncstable alpha={alpha} delta={delta}"),
            Self::SumStable { alpha, beta } => write!(f, "family=sumstable alpha={alpha} beta={beta}"),
            Self::TemperedStable { alpha, gamma } => write!(f, "family=tempered alpha={alpha} gamma={gamma}"),
            Self::DistributedOrder => write!(f, "family=distributed"),
            Self::Custom(c) => write!(f, "family=custom name={}", c.name),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kv = Kv::parse(s)?;
        let family = kv.take("family")?;
        let spec = Self::from_kv(&mut kv, &family)?;
        kv.finish()?;
        Ok(spec)
    }
}

/// The random clock: either the inverse of a subordinator from the catalog
/// or the deterministic identity `E(t) = t` (the `alpha -> 1` limit).
#[derive(Debug, Clone, PartialEq)]
pub enum TimeChange {
    Identity,
    Inverse(KernelSpec),
}

impl fmt::Display for TimeChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "family=identity"),
            Self::Inverse(k) => k.fmt(f),
        }
    }
}

impl FromStr for TimeChange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kv = Kv::parse(s)?;
        let family = kv.take("family")?;
        let tc = if family == "identity" {
            Self::Identity
        } else {
            Self::Inverse(KernelSpec::from_kv(&mut kv, &family)?)
        };
        kv.finish()?;
        Ok(tc)
    }
}

/// Whether a triple component is a closed form or computed by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Closed,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyticFlags {
    pub phi: Form,
    pub big_k: Form,
    pub k: Form,
    pub levy_density: Form,
}

/// `(Phi, K, k, nu)` for one kernel spec.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinTriple {
    spec: KernelSpec,
    pub flags: AnalyticFlags,
}

const NUMERIC_TOL: f64 = 1e-12;

pub fn make_triple(spec: KernelSpec) -> Result<BernsteinTriple> {
    spec.validate()?;
    use Form::*;
    let flags = match spec {
        KernelSpec::TruncatedStable { .. } => AnalyticFlags {
            phi: Closed,
            big_k: Numeric,
            k: Closed,
            levy_density: Closed,
        },
        KernelSpec::DistributedOrder => AnalyticFlags {
            phi: Closed,
            big_k: Closed,
            k: Numeric,
            levy_density: Numeric,
        },
        KernelSpec::Custom(_) => AnalyticFlags {
            phi: Numeric,
            big_k: Numeric,
            k: Numeric,
            levy_density: Closed,
        },
        _ => AnalyticFlags {
            phi: Closed,
            big_k: Closed,
            k: Closed,
            levy_density: Closed,
        },
    };
    Ok(BernsteinTriple { spec, flags })
}

fn check_arg(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {x}")))
    }
}

/// `1/Gamma(1 - alpha)`.
fn rg1(alpha: f64) -> f64 {
    rgamma(1.0 - alpha)
}

/// `(l - 1) / log l`, smooth through `l = 1`.
fn dist_ratio(l: f64) -> f64 {
    let d = l - 1.0;
    if d.abs() < 1e-8 {
        1.0 + 0.5 * d
    } else {
        d / d.ln_1p()
    }
}

fn dist_ratio_c(s: Complex64) -> Complex64 {
    let d = s - 1.0;
    if d.norm() < 1e-4 {
        1.0 + d * (0.5 + d * (-1.0 / 12.0 + d / 24.0))
    } else {
        d / s.ln()
    }
}

/// Breakpoints for integrals over the order `a in (0,1)` whose mass sits near
/// `a ~ 1/|log x|`, given `lx = log x`.
fn order_breaks(lx: f64) -> Vec<f64> {
    let l = lx.abs();
    if l <= 2.0 {
        return vec![];
    }
    (0..8).map(|i| 2f64.powi(i) / l).filter(|&b| b < 1.0).collect()
}

fn order_integral(lx: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let r = integrate_with_breaks(f, 0.0, 1.0, &order_breaks(lx), Tolerance::rel(NUMERIC_TOL))?;
    Ok(r.value)
}

impl BernsteinTriple {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Laplace exponent `Phi(lambda)`.
    pub fn phi(&self, lambda: f64) -> Result<f64> {
        check_arg("lambda", lambda)?;
        Ok(match self.spec {
            KernelSpec::StableAlpha { alpha } => lambda.powf(alpha),
            KernelSpec::GammaSub { a, b } => a * (lambda / b).ln_1p(),
            KernelSpec::TruncatedStable { alpha, delta } => {
                if delta * lambda < 1.0 {
                    // the closed form cancels to l N(delta) here
                    lambda * self.big_k(lambda)?
                } else {
                    let ratio = incomplete_gamma_upper(-alpha, delta * lambda)? / gamma(-alpha);
                    lambda.powf(alpha) * (1.0 - ratio) - delta.powf(-alpha) * rg1(alpha)
                }
            }
            KernelSpec::SumStable { alpha, beta } => lambda.powf(alpha) + lambda.powf(beta),
            KernelSpec::TemperedStable { alpha, gamma } => lambda * (lambda + gamma).powf(alpha - 1.0),
            KernelSpec::DistributedOrder => dist_ratio(lambda),
            KernelSpec::Custom(ref c) => {
                let r = exp_sinh(|s| -(-lambda * s).exp_m1() * c.eval(s), 0.0, 1.0 / lambda, NUMERIC_TOL)?;
                r.value
            }
        })
    }

    /// `K(lambda) = Phi(lambda) / lambda`, the Laplace transform of `k`.
    pub fn big_k(&self, lambda: f64) -> Result<f64> {
        check_arg("lambda", lambda)?;
        Ok(match self.spec {
            KernelSpec::StableAlpha { alpha } => lambda.powf(alpha - 1.0),
            KernelSpec::GammaSub { a, b } => a * (lambda / b).ln_1p() / lambda,
            KernelSpec::TruncatedStable { alpha, delta } => {
                // t = s^(1/(1-alpha)) removes the t^(-alpha) endpoint singularity
                let p = 1.0 / (1.0 - alpha);
                let c = p * rg1(alpha);
                let f = |s: f64| {
                    let t = s.powf(p);
                    c * (-lambda * t).exp() * (1.0 - (t / delta).powf(alpha))
                };
                let upper = delta.powf(1.0 - alpha);
                let breaks: Vec<f64> = [1.0, 10.0, 40.0]
                    .iter()
                    .map(|&m| (m / lambda).powf(1.0 - alpha))
                    .collect();
                integrate_with_breaks(f, 0.0, upper, &breaks, Tolerance::rel(NUMERIC_TOL))?.value
            }
            KernelSpec::SumStable { alpha, beta } => lambda.powf(alpha - 1.0) + lambda.powf(beta - 1.0),
            KernelSpec::TemperedStable { alpha, gamma } => (lambda + gamma).powf(alpha - 1.0),
            KernelSpec::DistributedOrder => dist_ratio(lambda) / lambda,
            KernelSpec::Custom(_) => self.phi(lambda)? / lambda,
        })
    }

    /// Whether `K` continues analytically off the real axis here.
    pub fn contour_capable(&self) -> bool {
        !matches!(self.spec, KernelSpec::TruncatedStable { .. } | KernelSpec::Custom(_))
    }

    /// Real part of the rightmost singularity of `K` in the complex plane.
    pub fn singular_abscissa(&self) -> f64 {
        match self.spec {
            KernelSpec::GammaSub { b, .. } => -b,
            KernelSpec::TemperedStable { gamma, .. } => -gamma,
            _ => 0.0,
        }
    }

    /// `K(s)` at complex `s` (principal branches), for contour inversion.
    pub fn big_k_complex(&self, s: Complex64) -> Option<Complex64> {
        Some(match self.spec {
            KernelSpec::StableAlpha { alpha } => s.powf(alpha - 1.0),
            KernelSpec::GammaSub { a, b } => (s / b).ln_1p_c() * a / s,
            KernelSpec::SumStable { alpha, beta } => s.powf(alpha - 1.0) + s.powf(beta - 1.0),
            KernelSpec::TemperedStable { alpha, gamma } => (s + gamma).powf(alpha - 1.0),
            KernelSpec::DistributedOrder => dist_ratio_c(s) / s,
            KernelSpec::TruncatedStable { .. } | KernelSpec::Custom(_) => return None,
        })
    }

    /// The kernel `k(t) = sigma((t, inf))`.
    pub fn k(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("k(t) needs t > 0, got {t}")));
        }
        if t.is_infinite() {
            return Ok(0.0);
        }
        Ok(match self.spec {
            KernelSpec::StableAlpha { alpha } => t.powf(-alpha) * rg1(alpha),
            KernelSpec::GammaSub { a, b } => a * incomplete_gamma_upper(0.0, b * t)?,
            KernelSpec::TruncatedStable { alpha, delta } => {
                if t >= delta {
                    0.0
                } else {
                    (t.powf(-alpha) - delta.powf(-alpha)) * rg1(alpha)
                }
            }
            KernelSpec::SumStable { alpha, beta } => t.powf(-alpha) * rg1(alpha) + t.powf(-beta) * rg1(beta),
            KernelSpec::TemperedStable { alpha, gamma } => t.powf(-alpha) * (-gamma * t).exp() * rg1(alpha),
            KernelSpec::DistributedOrder => {
                let lt = t.ln();
                order_integral(lt, |a| ((a - 1.0) * lt).exp() * rgamma(a))?
            }
            KernelSpec::Custom(ref c) => exp_sinh(|s| c.eval(s), t, t, NUMERIC_TOL)?.value,
        })
    }

    /// The Levy density `nu(tau) = -k'(tau)`.
    pub fn levy_density(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("Levy density needs tau > 0, got {tau}")));
        }
        Ok(match self.spec {
            KernelSpec::StableAlpha { alpha } => alpha * tau.powf(-1.0 - alpha) * rg1(alpha),
            KernelSpec::GammaSub { a, b } => a * (-b * tau).exp() / tau,
            KernelSpec::TruncatedStable { alpha, delta } => {
                if tau > delta {
                    0.0
                } else {
                    alpha * tau.powf(-1.0 - alpha) * rg1(alpha)
                }
            }
            KernelSpec::SumStable { alpha, beta } => {
                alpha * tau.powf(-1.0 - alpha) * rg1(alpha) + beta * tau.powf(-1.0 - beta) * rg1(beta)
            }
            KernelSpec::TemperedStable { alpha, gamma } => {
                (-gamma * tau).exp() * tau.powf(-alpha) * (alpha / tau + gamma) * rg1(alpha)
            }
            KernelSpec::DistributedOrder => {
                let lt = tau.ln();
                order_integral(lt, |a| (1.0 - a) * ((a - 2.0) * lt).exp() * rgamma(a))?
            }
            KernelSpec::Custom(ref c) => c.eval(tau),
        })
    }

    /// `N(x) = int_0^x k(s) ds`.
    pub fn integrated_k(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        check_arg("x", x)?;
        Ok(match self.spec {
            KernelSpec::StableAlpha { alpha } => x.powf(1.0 - alpha) * rgamma(2.0 - alpha),
            KernelSpec::GammaSub { a, b } => {
                a * (x * incomplete_gamma_upper(0.0, b * x)? - (-b * x).exp_m1() / b)
            }
            KernelSpec::TruncatedStable { alpha, delta } => {
                let m = x.min(delta);
                (m.powf(1.0 - alpha) / (1.0 - alpha) - m * delta.powf(-alpha)) * rg1(alpha)
            }
            KernelSpec::SumStable { alpha, beta } => {
                x.powf(1.0 - alpha) * rgamma(2.0 - alpha) + x.powf(1.0 - beta) * rgamma(2.0 - beta)
            }
            KernelSpec::TemperedStable { alpha, gamma } => {
                gamma.powf(alpha - 1.0) * incomplete_gamma_lower(1.0 - alpha, gamma * x)? * rg1(alpha)
            }
            KernelSpec::DistributedOrder => {
                let lx = x.ln();
                order_integral(lx, |a| (a * lx).exp() * rgamma(a + 1.0))?
            }
            KernelSpec::Custom(ref c) => {
                let inner = tanh_sinh(|s| s * c.eval(s), 0.0, x, NUMERIC_TOL)?.value;
                x * self.k(x)? + inner
            }
        })
    }

    /// `N1(x) = int_0^x s k(s) ds`.
    pub fn first_moment_k(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        check_arg("x", x)?;
        Ok(match self.spec {
            KernelSpec::StableAlpha { alpha } => x.powf(2.0 - alpha) / (2.0 - alpha) * rg1(alpha),
            KernelSpec::GammaSub { a, b } => {
                let bx = b * x;
                a * (0.5 * x * x * incomplete_gamma_upper(0.0, bx)?
                    + (1.0 - (-bx).exp() * (1.0 + bx)) / (2.0 * b * b))
            }
            KernelSpec::TruncatedStable { alpha, delta } => {
                let m = x.min(delta);
                (m.powf(2.0 - alpha) / (2.0 - alpha) - 0.5 * m * m * delta.powf(-alpha)) * rg1(alpha)
            }
            KernelSpec::SumStable { alpha, beta } => {
                x.powf(2.0 - alpha) / (2.0 - alpha) * rg1(alpha) + x.powf(2.0 - beta) / (2.0 - beta) * rg1(beta)
            }
            KernelSpec::TemperedStable { alpha, gamma } => {
                gamma.powf(alpha - 2.0) * incomplete_gamma_lower(2.0 - alpha, gamma * x)? * rg1(alpha)
            }
            KernelSpec::DistributedOrder => {
                let lx = x.ln();
                order_integral(lx, |a| ((a + 1.0) * lx).exp() / (a + 1.0) * rgamma(a))?
            }
            KernelSpec::Custom(ref c) => {
                let inner = tanh_sinh(|s| 0.5 * s * s * c.eval(s), 0.0, x, NUMERIC_TOL)?.value;
                0.5 * x * x * self.k(x)? + inner
            }
        })
    }

    /// Points where `k` is not smooth.
    pub fn kernel_breaks(&self) -> Vec<f64> {
        match self.spec {
            KernelSpec::TruncatedStable { delta, .. } => vec![delta],
            _ => vec![],
        }
    }

    /// `t k(t)` as a function of `ln t`, finite where `t` itself underflows.
    pub fn t_k_log(&self, lt: f64) -> Result<f64> {
        match self.spec {
            KernelSpec::DistributedOrder => order_integral(lt, |a| (a * lt).exp() * rgamma(a)),
            _ => {
                let t = lt.exp();
                if t == 0.0 {
                    return Ok(0.0);
                }
                Ok(t * self.k(t)?)
            }
        }
    }

    /// `int_0^inf e^(-lambda t) k(t) dt` by quadrature, independent of `K`.
    pub fn laplace_of_k(&self, lambda: f64, tol: f64) -> Result<f64> {
        let breaks = self.kernel_breaks();
        laplace_forward_log(
            |t| self.k(t).unwrap_or(f64::NAN),
            |lt| self.t_k_log(lt).unwrap_or(f64::NAN),
            lambda,
            tol,
            &breaks,
        )
    }
}

trait Ln1pC {
    fn ln_1p_c(self) -> Complex64;
}

impl Ln1pC for Complex64 {
    fn ln_1p_c(self) -> Complex64 {
        if self.norm() < 1e-4 {
            self * (1.0 - self * (0.5 - self / 3.0))
        } else {
            (self + 1.0).ln()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyRow {
    pub lambda: f64,
    pub phi: f64,
    pub big_k: f64,
    pub k_quadrature: f64,
    /// `|Phi - lambda K| / Phi`.
    pub phi_err: f64,
    /// `|K - L[k]| / K`.
    pub transform_err: f64,
}

pub fn consistency_rows(triple: &BernsteinTriple, grid: &[f64]) -> Result<Vec<ConsistencyRow>> {
    if grid.is_empty() {
        return Err(Error::param("grid", "empty lambda grid"));
    }
    grid.iter()
        .map(|&lambda| {
            check_arg("lambda", lambda)?;
            let phi = triple.phi(lambda)?;
            let big_k = triple.big_k(lambda)?;
            let k_quadrature = triple.laplace_of_k(lambda, 1e-10).map_err(|e| Error::NonConvergence {
                what: format!("Laplace quadrature of k at lambda={lambda}: {e}"),
                achieved: f64::NAN,
            })?;
            Ok(ConsistencyRow {
                lambda,
                phi,
                big_k,
                k_quadrature,
                phi_err: (phi - lambda * big_k).abs() / phi,
                transform_err: (big_k - k_quadrature).abs() / big_k,
            })
        })
        .collect()
}

/// Worst relative violation of `Phi = lambda K` and `K = L[k]` over `grid`.
pub fn consistency_report(triple: &BernsteinTriple, grid: &[f64]) -> Result<f64> {
    Ok(consistency_rows(triple, grid)?
        .iter()
        .map(|r| r.phi_err.max(r.transform_err))
        .fold(0.0, f64::max))
}

/// Limit behaviour of `K` and `Phi` at `0+` and `inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisReport {
    pub k_at_0_diverges: bool,
    pub k_at_inf_vanishes: bool,
    pub phi_at_0_vanishes: bool,
    pub phi_at_inf_diverges: bool,
}

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.k_at_0_diverges && self.k_at_inf_vanishes && self.phi_at_0_vanishes && self.phi_at_inf_diverges
    }
}

/// Log-log slope threshold separating a genuine limit from a constant.
const SLOPE_EPS: f64 = 1e-3;

/// Probe the limits through log-log slopes at `lambda in {1e-8, 1e-6}` and
/// `{1e6, 1e8}`. A function tending to a nonzero constant has slope ~ 0.
pub fn hypothesis_h_check(triple: &BernsteinTriple) -> HypothesisReport {
    let slope = |f: &dyn Fn(f64) -> Result<f64>, l1: f64, l2: f64| -> f64 {
        match (f(l1), f(l2)) {
            (Ok(a), Ok(b)) if a > 0.0 && b > 0.0 => (b / a).ln() / (l2 / l1).ln(),
            _ => f64::NAN,
        }
    };
    let k = |l: f64| triple.big_k(l);
    let p = |l: f64| triple.phi(l);
    HypothesisReport {
        k_at_0_diverges: slope(&k, 1e-8, 1e-6) < -SLOPE_EPS,
        k_at_inf_vanishes: slope(&k, 1e6, 1e8) < -SLOPE_EPS,
        phi_at_0_vanishes: slope(&p, 1e-8, 1e-6) > SLOPE_EPS,
        phi_at_inf_diverges: slope(&p, 1e6, 1e8) > SLOPE_EPS,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn t(spec: KernelSpec) -> BernsteinTriple {
        make_triple(spec).unwrap()
    }

    #[test]
    fn catalog_examples() {
        assert_relative_eq!(t(KernelSpec::stable(0.5).unwrap()).big_k(4.0).unwrap(), 0.5, max_relative = 1e-15);
        let g = t(KernelSpec::gamma(1.0, 1.0).unwrap());
        assert!(g.phi(1e-300).unwrap() < 1e-299);
        assert_relative_eq!(t(KernelSpec::sum_stable(0.25, 0.75).unwrap()).phi(1.0).unwrap(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn k_examples() {
        assert_relative_eq!(t(KernelSpec::stable(0.5).unwrap()).k(1.0).unwrap(), 0.564_189_583_547_756_3, max_relative = 1e-14);
        assert_eq!(t(KernelSpec::truncated(0.5, 1.0).unwrap()).k(2.0).unwrap(), 0.0);
        // oracle: int_1^inf e^(-s)/s ds by quadrature
        let oracle = exp_sinh(|s| (-s).exp() / s, 1.0, 1.0, 1e-14).unwrap().value;
        assert_relative_eq!(t(KernelSpec::gamma(1.0, 1.0).unwrap()).k(1.0).unwrap(), oracle, max_relative = 1e-12);
        assert!(t(KernelSpec::stable(0.5).unwrap()).k(0.0).is_err());
    }

    #[test]
    fn invalid_parameters_name_the_field() {
        let cases = [
            (KernelSpec::stable(1.0), "alpha"),
            (KernelSpec::stable(0.0), "alpha"),
            (KernelSpec::gamma(1.0, 0.0), "b"),
            (KernelSpec::gamma(-1.0, 1.0), "a"),
            (KernelSpec::truncated(0.5, 0.0), "delta"),
            (KernelSpec::sum_stable(0.75, 0.25), "beta"),
            (KernelSpec::tempered(0.5, 0.0), "gamma"),
        ];
        for (r, field) in cases {
            match r {
                Err(Error::InvalidParameter { field: f, .. }) => assert_eq!(f, field),
                other => panic!("expected error on {field}, got {other:?}"),
            }
        }
    }

    #[test]
    fn config_round_trip() {
        for s in [
            "family=stable alpha=0.5",
            "family=gamma a=1 b=2",
            "family=sumstable alpha=0.25 beta=0.75",
            "family=truncstable alpha=0.5 delta=1",
            "family=tempered alpha=0.5 gamma=2",
            "family=distributed",
        ] {
            let spec: KernelSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("family=stable alpha=0.5 extra=1".parse::<KernelSpec>().is_err());
        assert!("family=weird".parse::<KernelSpec>().is_err());
        assert!("family=stable".parse::<KernelSpec>().is_err());
        assert_eq!("family=identity".parse::<TimeChange>().unwrap(), TimeChange::Identity);
        assert!("family=identity".parse::<KernelSpec>().is_err());
        let tc: TimeChange = "family=gamma a=1 b=1".parse().unwrap();
        assert_eq!(tc.to_string(), "family=gamma a=1 b=1");
    }

    #[test]
    fn consistency_examples() {
        let s = t(KernelSpec::stable(0.5).unwrap());
        assert!(consistency_report(&s, &[0.1, 1.0, 10.0]).unwrap() <= 1e-8);
        let ss = t(KernelSpec::sum_stable(0.25, 0.75).unwrap());
        assert!(consistency_report(&ss, &[1.0]).unwrap() <= 1e-8);
        let d = t(KernelSpec::distributed());
        assert!(consistency_report(&d, &[2.0]).unwrap() <= 1e-6);
        assert!(consistency_report(&s, &[]).is_err());
    }

    #[test]
    fn transform_identity_across_families() {
        let grid: Vec<f64> = (-4..=4).map(|i| 10f64.powf(0.5 * i as f64)).collect();
        for spec in [
            KernelSpec::stable(0.3).unwrap(),
            KernelSpec::gamma(1.5, 0.7).unwrap(),
            KernelSpec::sum_stable(0.25, 0.75).unwrap(),
            KernelSpec::tempered(0.5, 2.0).unwrap(),
            KernelSpec::truncated(0.5, 1.0).unwrap(),
            KernelSpec::distributed(),
        ] {
            let err = consistency_report(&t(spec.clone()), &grid).unwrap();
            assert!(err <= 1e-6, "{spec}: {err:e}");
        }
    }

    #[test]
    fn phi_equals_lambda_k_wide_range() {
        let grid: Vec<f64> = (-8..=8).map(|i| 10f64.powf(0.5 * i as f64)).collect();
        for spec in [
            KernelSpec::stable(0.7).unwrap(),
            KernelSpec::gamma(2.0, 3.0).unwrap(),
            KernelSpec::sum_stable(0.1, 0.9).unwrap(),
            KernelSpec::tempered(0.4, 0.5).unwrap(),
            KernelSpec::truncated(0.6, 2.0).unwrap(),
            KernelSpec::distributed(),
        ] {
            let tr = t(spec.clone());
            for &l in &grid {
                let p = tr.phi(l).unwrap();
                let lk = l * tr.big_k(l).unwrap();
                assert!((p - lk).abs() <= 1e-8 * p, "{spec} at {l}: {p} vs {lk}");
            }
        }
    }

    #[test]
    fn truncated_phi_closed_form_matches_quadrature() {
        // Phi = int_0^delta (1 - e^(-l s)) nu(s) ds, independently
        let tr = t(KernelSpec::truncated(0.5, 1.0).unwrap());
        for &l in &[1.0, 3.0, 20.0, 300.0] {
            let direct = tanh_sinh(|s| -(-l * s).exp_m1() * tr.levy_density(s).unwrap(), 0.0, 1.0, 1e-13)
                .unwrap()
                .value;
            assert_relative_eq!(tr.phi(l).unwrap(), direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn complex_k_matches_real_axis() {
        for spec in [
            KernelSpec::stable(0.3).unwrap(),
            KernelSpec::gamma(1.0, 2.0).unwrap(),
            KernelSpec::sum_stable(0.25, 0.75).unwrap(),
            KernelSpec::tempered(0.5, 2.0).unwrap(),
            KernelSpec::distributed(),
        ] {
            let tr = t(spec);
            for &l in &[0.01, 0.5, 1.0, 1.00001, 7.0] {
                let c = tr.big_k_complex(Complex64::new(l, 0.0)).unwrap();
                assert_relative_eq!(c.re, tr.big_k(l).unwrap(), max_relative = 1e-9);
                assert!(c.im.abs() < 1e-12);
            }
        }
        assert!(t(KernelSpec::truncated(0.5, 1.0).unwrap()).big_k_complex(Complex64::new(1.0, 0.0)).is_none());
    }

    #[test]
    fn integrated_kernels_match_quadrature() {
        for spec in [
            KernelSpec::stable(0.4).unwrap(),
            KernelSpec::gamma(1.0, 2.0).unwrap(),
            KernelSpec::sum_stable(0.25, 0.75).unwrap(),
            KernelSpec::tempered(0.5, 2.0).unwrap(),
            KernelSpec::truncated(0.5, 1.0).unwrap(),
            KernelSpec::distributed(),
        ] {
            let tr = t(spec.clone());
            for &x in &[0.01f64, 0.3, 2.5] {
                // s = x e^(-y) keeps the logarithmic mass near 0 for the distributed kernel
                // k vanishes past the truncation point
                let top = tr.kernel_breaks().into_iter().fold(x, f64::min);
                let lx = top.ln();
                let n = exp_sinh(|y| tr.t_k_log(lx - y).unwrap(), 0.0, 1.0, 1e-12).unwrap().value;
                let n1 = tanh_sinh(|s| s * tr.k(s).unwrap(), 0.0, top, 1e-12).unwrap().value;
                assert_relative_eq!(tr.integrated_k(x).unwrap(), n, max_relative = 1e-8);
                assert_relative_eq!(tr.first_moment_k(x).unwrap(), n1, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn levy_density_is_minus_k_derivative() {
        for spec in [
            KernelSpec::stable(0.4).unwrap(),
            KernelSpec::gamma(1.0, 2.0).unwrap(),
            KernelSpec::tempered(0.5, 2.0).unwrap(),
            KernelSpec::distributed(),
        ] {
            let tr = t(spec.clone());
            for &x in &[0.05, 0.7, 3.0] {
                let h = 1e-4 * x;
                let d = -(tr.k(x + h).unwrap() - tr.k(x - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(tr.levy_density(x).unwrap(), d, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn custom_stable_reproduces_stable() {
        let alpha = 0.5;
        let nu = move |s: f64| alpha * s.powf(-1.0 - alpha) / gamma(1.0 - alpha);
        let c = t(KernelSpec::custom("stable-0.5", nu));
        let s = t(KernelSpec::stable(alpha).unwrap());
        for &l in &[0.01, 1.0, 30.0] {
            assert_relative_eq!(c.phi(l).unwrap(), s.phi(l).unwrap(), max_relative = 1e-6);
            assert_relative_eq!(c.big_k(l).unwrap(), s.big_k(l).unwrap(), max_relative = 1e-6);
        }
        for &x in &[0.01, 1.0, 30.0] {
            assert_relative_eq!(c.k(x).unwrap(), s.k(x).unwrap(), max_relative = 1e-6);
            assert_relative_eq!(c.integrated_k(x).unwrap(), s.integrated_k(x).unwrap(), max_relative = 1e-6);
            assert_relative_eq!(c.first_moment_k(x).unwrap(), s.first_moment_k(x).unwrap(), max_relative = 1e-6);
        }
    }

    #[test]
    fn hypothesis_reports() {
        assert!(hypothesis_h_check(&t(KernelSpec::stable(0.5).unwrap())).holds());
        let tr = hypothesis_h_check(&t(KernelSpec::truncated(0.5, 1.0).unwrap()));
        assert!(!tr.k_at_0_diverges);
        // K(0+) = a/b is finite for the gamma subordinator
        let g = hypothesis_h_check(&t(KernelSpec::gamma(1.0, 1.0).unwrap()));
        assert!(!g.k_at_0_diverges && g.k_at_inf_vanishes && g.phi_at_0_vanishes && g.phi_at_inf_diverges);
        let te = hypothesis_h_check(&t(KernelSpec::tempered(0.5, 1.0).unwrap()));
        assert!(!te.k_at_0_diverges && te.phi_at_0_vanishes);
        assert!(hypothesis_h_check(&t(KernelSpec::sum_stable(0.25, 0.75).unwrap())).holds());
        assert!(hypothesis_h_check(&t(KernelSpec::distributed())).holds());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn k_nonincreasing(alpha in 0.05f64..0.95, beta_gap in 0.01f64..0.5, t1 in -6.0f64..3.0, dt in 0.01f64..2.0) {
            let x1 = 10f64.powf(t1);
            let x2 = 10f64.powf(t1 + dt);
            let beta = (alpha + beta_gap).min(0.99);
            let mut specs = vec![
                KernelSpec::stable(alpha).unwrap(),
                KernelSpec::gamma(1.0 + alpha, beta_gap * 4.0).unwrap(),
                KernelSpec::tempered(alpha, beta_gap).unwrap(),
                KernelSpec::truncated(alpha, 1.0).unwrap(),
            ];
            if alpha < beta {
                specs.push(KernelSpec::sum_stable(alpha, beta).unwrap());
            }
            for spec in specs {
                let tr = t(spec);
                prop_assert!(tr.k(x1).unwrap() >= tr.k(x2).unwrap());
            }
        }

        #[test]
        fn phi_lambda_k_identity(alpha in 0.05f64..0.95, lexp in -4.0f64..4.0) {
            let l = 10f64.powf(lexp);
            for spec in [KernelSpec::stable(alpha).unwrap(), KernelSpec::tempered(alpha, 1.3).unwrap(), KernelSpec::gamma(alpha, 2.0).unwrap()] {
                let tr = t(spec);
                let p = tr.phi(l).unwrap();
                prop_assert!((p - l * tr.big_k(l).unwrap()).abs() <= 1e-8 * p);
            }
        }
    }
}
