//! Special functions used by the kernel catalog and the inverse-subordinator
//! densities: Mittag-Leffler `E_a`, incomplete gamma, the M-Wright density
//! and the Riesz kernel `g_a(t) = t^(a-1)/Gamma(a)`.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma as stat_gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, Tolerance};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gamma function on the real line (poles at non-positive integers give inf).
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::INFINITY;
    }
    stat_gamma(x)
}

pub fn ln_gamma_abs(x: f64) -> f64 {
    if x > 0.0 {
        ln_gamma(x)
    } else {
        // reflection: |Gamma(x)| = pi / |sin(pi x) Gamma(1-x)|
        (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x)
    }
}

/// Reciprocal gamma `1/Gamma(x)`, exact zeros at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x >= 0.5 {
        1.0 / stat_gamma(x)
    } else {
        // 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
        (PI * x).sin() * stat_gamma(1.0 - x) / PI
    }
}

/// `g_a(t) = t^(a-1) / Gamma(a)` for `t > 0`.
pub fn g_alpha(alpha: f64, t: f64) -> f64 {
    t.powf(alpha - 1.0) * rgamma(alpha)
}

/// Accuracy settings for [`mittag_leffler_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    pub alpha: f64,
    pub target_rel_err: f64,
}

impl MLParams {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_tolerance(alpha, 1e-12)
    }

    pub fn with_tolerance(alpha: f64, target_rel_err: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param("alpha", format!("{alpha} not in (0,1]")));
        }
        if !(target_rel_err > 0.0 && target_rel_err <= 1e-6) {
            return Err(Error::param(
                "target_rel_err",
                format!("{target_rel_err} not in (0,1e-6]"),
            ));
        }
        Ok(Self {
            alpha,
            target_rel_err,
        })
    }
}

/// Below this |z| the Taylor series is used on the negative axis.
const ML_SERIES_RADIUS: f64 = 1.0;
/// At or beyond this |z| the asymptotic expansion is used on the negative axis.
const ML_ASYMPTOTIC_RADIUS: f64 = 50.0;
/// Positive arguments are summed by Taylor series up to this bound.
const ML_POSITIVE_LIMIT: f64 = 50.0;

/// One-parameter Mittag-Leffler function `E_a(z)` on the real line with the
/// default relative tolerance `1e-12`.
pub fn mittag_leffler(alpha: f64, z: f64) -> Result<f64> {
    mittag_leffler_with(MLParams::new(alpha)?, z)
}

pub fn mittag_leffler_with(p: MLParams, z: f64) -> Result<f64> {
    let alpha = p.alpha;
    if !z.is_finite() {
        return Err(Error::Domain(format!("E_a argument {z} is not finite")));
    }
    if alpha == 1.0 {
        return Ok(z.exp());
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z > 0.0 {
        if z > ML_POSITIVE_LIMIT {
            return Err(Error::Domain(format!(
                "E_a(z) for z={z} beyond the series radius {ML_POSITIVE_LIMIT}"
            )));
        }
        return ml_taylor(alpha, z, p.target_rel_err);
    }
    let x = -z;
    if x <= ML_SERIES_RADIUS {
        ml_taylor(alpha, z, p.target_rel_err)
    } else if x >= ML_ASYMPTOTIC_RADIUS {
        ml_asymptotic(alpha, x, p.target_rel_err)
    } else {
        ml_integral(alpha, x, p.target_rel_err)
    }
}

fn ml_taylor(alpha: f64, z: f64, tol: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut max_term: f64 = 0.0;
    let ln_abs = z.abs().ln();
    for n in 0..2000 {
        let term = if n == 0 {
            1.0
        } else {
            let mag = (n as f64 * ln_abs - ln_gamma(n as f64 * alpha + 1.0)).exp();
            if z < 0.0 && n % 2 == 1 {
                -mag
            } else {
                mag
            }
        };
        sum += term;
        max_term = max_term.max(term.abs());
        if n > 2 && term.abs() <= 0.1 * f64::EPSILON * sum.abs() {
            let achieved = max_term * f64::EPSILON * 4.0 / sum.abs();
            if achieved > tol {
                return Err(Error::NonConvergence {
                    what: "Mittag-Leffler Taylor series (cancellation)".into(),
                    achieved,
                });
            }
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        what: "Mittag-Leffler Taylor series".into(),
        achieved: f64::NAN,
    })
}

/// `E_a(-x) ~ sum_{n>=1} (-1)^(n+1) x^(-n) / Gamma(1 - n a)`.
fn ml_asymptotic(alpha: f64, x: f64, tol: f64) -> Result<f64> {
    let mut sum: f64 = 0.0;
    let mut prev = f64::INFINITY;
    for n in 1..400 {
        let r = rgamma(1.0 - n as f64 * alpha);
        let mag = (-(n as f64) * x.ln()).exp() * r;
        let term = if n % 2 == 1 { mag } else { -mag };
        if term.abs() > prev && term != 0.0 {
            // divergent tail of the asymptotic series
            let achieved = prev / sum.abs();
            if achieved > tol {
                return Err(Error::NonConvergence {
                    what: "Mittag-Leffler asymptotic series".into(),
                    achieved,
                });
            }
            return Ok(sum);
        }
        sum += term;
        if term != 0.0 {
            prev = term.abs();
        }
        // terms vanish at the poles of Gamma(1 - n a); those do not end the sum
        if n > 1 && term != 0.0 && term.abs() <= 0.1 * f64::EPSILON * sum.abs() {
            return Ok(sum);
        }
    }
    Ok(sum)
}

/// `E_a(-x) = sin(a pi)/(a pi) int_0^inf exp(-(x u)^(1/a)) / (u^2 + 2u cos(a pi) + 1) du`
fn ml_integral(alpha: f64, x: f64, tol: f64) -> Result<f64> {
    let c = (alpha * PI).cos();
    let s = (alpha * PI).sin();
    let inv = 1.0 / alpha;
    let u_max = 745f64.powf(alpha) / x;
    let f = |u: f64| {
        let d = (u + c) * (u + c) + s * s;
        (-(x * u).powf(inv)).exp() / d
    };
    let mut breaks = vec![1.0 / x];
    if c < 0.0 {
        breaks.push(-c);
        breaks.push(-c - s);
        breaks.push(-c + s);
    }
    let r = integrate_with_breaks(f, 0.0, u_max, &breaks, Tolerance::rel(tol.min(1e-13)))?;
    Ok(s / (alpha * PI) * r.value)
}

/// Upper incomplete gamma `Gamma(nu, z) = int_z^inf e^(-t) t^(nu-1) dt`.
pub fn incomplete_gamma_upper(nu: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("Gamma(nu, z) needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        if nu > 0.0 {
            return Ok(gamma(nu));
        }
        return Err(Error::Divergence(format!("Gamma({nu}, 0) diverges for nu <= 0")));
    }
    if (nu > 0.0 && z >= nu + 1.0) || (nu <= 0.0 && z >= 1.0) {
        return upper_gamma_cf(nu, z);
    }
    if nu > 0.0 {
        return Ok(gamma(nu) - lower_gamma_series(nu, z)?);
    }
    if nu == nu.floor() {
        // E_1 series then downward recurrence to nu = -m
        let mut g = e1_series(z);
        let mut k = 0.0;
        while k > nu {
            k -= 1.0;
            g = (g - z.powf(k) * (-z).exp()) / k;
        }
        return Ok(g);
    }
    // Gamma(nu) - z^nu sum (-z)^k / (k! (nu+k)), valid for non-integer nu
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 0..200 {
        if k > 0 {
            fact *= -z / k as f64;
        }
        let term = fact / (nu + k as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && k > 2 {
            break;
        }
    }
    Ok(gamma(nu) - z.powf(nu) * sum)
}

/// Lower incomplete gamma `gamma(nu, z)` for `nu > 0`.
pub fn incomplete_gamma_lower(nu: f64, z: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::param("nu", "lower incomplete gamma needs nu > 0"));
    }
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("gamma(nu, z) needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z < nu + 1.0 {
        lower_gamma_series(nu, z)
    } else {
        Ok(gamma(nu) - upper_gamma_cf(nu, z)?)
    }
}

fn lower_gamma_series(nu: f64, z: f64) -> Result<f64> {
    let mut ap = nu;
    let mut del = 1.0 / nu;
    let mut sum = del;
    for _ in 0..1000 {
        ap += 1.0;
        del *= z / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            return Ok(sum * (nu * z.ln() - z).exp());
        }
    }
    Err(Error::NonConvergence {
        what: "lower incomplete gamma series".into(),
        achieved: del.abs() / sum.abs(),
    })
}

/// Modified Lentz evaluation of the Legendre continued fraction.
fn upper_gamma_cf(nu: f64, z: f64) -> Result<f64> {
    let tiny = 1e-300;
    let mut b = z + 1.0 - nu;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..5000 {
        let an = -(i as f64) * (i as f64 - nu);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok((nu * z.ln() - z).exp() * h);
        }
    }
    Err(Error::NonConvergence {
        what: "upper incomplete gamma continued fraction".into(),
        achieved: f64::NAN,
    })
}

fn e1_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..300 {
        term *= -z / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// M-Wright (Mainardi) function `M_a(z)`, `z >= 0`, `0 < a < 1`: the density
/// of `E(1)` for the inverse `a`-stable subordinator.
pub fn m_wright(alpha: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("{alpha} not in (0,1)")));
    }
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("M-Wright argument {z} < 0")));
    }
    if z <= 1.0 {
        Ok(m_wright_series(alpha, z))
    } else {
        m_wright_kanter(alpha, z)
    }
}

fn m_wright_series(alpha: f64, z: f64) -> f64 {
    if z == 0.0 {
        return rgamma(1.0 - alpha);
    }
    let lz = z.ln();
    let mut sum = 0.0;
    for n in 0..400 {
        let nf = n as f64;
        let arg = 1.0 - alpha - alpha * nf;
        let r = rgamma_signed_log(arg);
        let term = match r {
            None => 0.0,
            Some((ln_mag, sign)) => {
                let mag = (nf * lz - ln_gamma(nf + 1.0) + ln_mag).exp();
                let s = if n % 2 == 1 { -sign } else { sign };
                s * mag
            }
        };
        sum += term;
        if n > 4 && term.abs() < 1e-18 * sum.abs().max(1e-300) {
            // terms decay monotonically once n! dominates
            let next_mag = ((nf + 1.0) * lz - ln_gamma(nf + 2.0) + ln_gamma(alpha + alpha * (nf + 1.0))
                - PI.ln())
            .exp();
            if next_mag < 1e-18 * sum.abs() {
                break;
            }
        }
    }
    sum
}

/// `(ln |1/Gamma(x)|, sign(1/Gamma(x)))`, or `None` at a pole of Gamma.
fn rgamma_signed_log(x: f64) -> Option<(f64, f64)> {
    if x <= 0.0 && x == x.floor() {
        return None;
    }
    if x > 0.0 {
        return Some((-ln_gamma(x), 1.0));
    }
    let s = (PI * x).sin();
    Some((ln_gamma(1.0 - x) + s.abs().ln() - PI.ln(), s.signum()))
}

/// Kanter's non-oscillatory integral form, used for `z > 1`.
fn m_wright_kanter(alpha: f64, z: f64) -> Result<f64> {
    let one_m = 1.0 - alpha;
    let zp = z.powf(1.0 / one_m);
    let a0 = alpha.powf(alpha / one_m) * one_m;
    let ln_a = |u: f64| -> f64 {
        if u < 1e-8 {
            return a0.ln();
        }
        (alpha / one_m) * (alpha * u).sin().ln() + (one_m * u).sin().ln() - u.sin().ln() / one_m
    };
    let f = |u: f64| {
        let la = ln_a(u);
        let a = la.exp();
        if !a.is_finite() {
            return 0.0;
        }
        (la - a * zp).exp()
    };
    let r = integrate_with_breaks(f, 0.0, PI, &[0.25, 1.0, 2.0], Tolerance::rel(1e-13))?;
    Ok(z.powf(alpha / one_m) / (PI * one_m) * r.value)
}

/// Density `G_t(tau)` of `E(t)` for the inverse `a`-stable subordinator,
/// `t^(-a) M_a(tau t^(-a))`.
pub fn stable_inverse_density_closed(alpha: f64, t: f64, tau: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("{alpha} not in (0,1)")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t must be > 0, got {t}")));
    }
    if !(tau >= 0.0) {
        return Err(Error::Domain(format!("tau must be >= 0, got {tau}")));
    }
    let scale = t.powf(-alpha);
    Ok(scale * m_wright(alpha, tau * scale)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{exp_sinh, integrate};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use statrs::function::erf::erfc;

    #[test]
    fn e1_is_exp() {
        assert_relative_eq!(mittag_leffler(1.0, 1.0).unwrap(), std::f64::consts::E, max_relative = 1e-15);
    }

    #[test]
    fn ml_at_zero() {
        assert_eq!(mittag_leffler(0.7, 0.0).unwrap(), 1.0);
    }

    /// E_{1/2}(z) = exp(z^2) erfc(-z); for z < 0 through the scaled form
    /// erfcx(x) = 2/sqrt(pi) int_0^inf exp(-t^2 - 2xt) dt.
    fn ml_half(z: f64) -> f64 {
        if z >= 0.0 {
            return (z * z).exp() * erfc(-z);
        }
        let x = -z;
        let r = integrate(|t: f64| (-t * t - 2.0 * x * t).exp(), 0.0, 40.0, Tolerance::rel(1e-15)).unwrap();
        2.0 / std::f64::consts::PI.sqrt() * r.value
    }

    #[test]
    fn ml_half_matches_erfc_identity() {
        assert_relative_eq!(mittag_leffler(0.5, -1.0).unwrap(), 0.427_583_576_155_807, max_relative = 1e-12);
        for &z in &[-0.3, -1.0, -2.5, -7.0, -20.0] {
            assert_relative_eq!(mittag_leffler(0.5, z).unwrap(), ml_half(z), max_relative = 1e-11);
        }
        assert_relative_eq!(mittag_leffler(0.5, 1.5).unwrap(), ml_half(1.5), max_relative = 1e-12);
    }

    #[test]
    fn ml_branches_agree_at_seams() {
        for &alpha in &[0.1, 0.3, 0.5, 0.8, 0.95] {
            let p = MLParams::new(alpha).unwrap();
            for &x in &[ML_SERIES_RADIUS, ML_ASYMPTOTIC_RADIUS] {
                let below = if x == ML_SERIES_RADIUS {
                    ml_taylor(alpha, -x, 1e-12).unwrap()
                } else {
                    ml_integral(alpha, x, 1e-14).unwrap()
                };
                let above = if x == ML_SERIES_RADIUS {
                    ml_integral(alpha, x, 1e-14).unwrap()
                } else {
                    ml_asymptotic(alpha, x, 1e-12).unwrap()
                };
                assert_relative_eq!(below, above, max_relative = 1e-10);
                let _ = p;
            }
        }
    }

    #[test]
    fn ml_is_completely_monotone_samples() {
        for &alpha in &[0.3, 0.5, 0.8] {
            let xs: Vec<f64> = (0..60).map(|i| 0.05 * 1.2f64.powi(i)).collect();
            let v: Vec<f64> = xs.iter().map(|&x| mittag_leffler(alpha, -x).unwrap()).collect();
            for w in v.windows(2) {
                assert!(w[0] > 0.0 && w[1] > 0.0 && w[1] < w[0]);
            }
            // convexity on a uniform grid
            let h = 0.25;
            for i in 1..80 {
                let x = i as f64 * h;
                let f = |x: f64| mittag_leffler(alpha, -x).unwrap();
                assert!(f(x - h) + f(x + h) - 2.0 * f(x) > 0.0);
            }
        }
    }

    #[test]
    fn ml_power_law_tail() {
        for &alpha in &[0.3, 0.5, 0.8] {
            let x = 1e6;
            let r = mittag_leffler(alpha, -x).unwrap() * x * gamma(1.0 - alpha);
            assert!((r - 1.0).abs() < 0.01, "alpha={alpha} ratio={r}");
        }
    }

    #[test]
    fn ml_rejects_bad_alpha_and_tol() {
        assert!(mittag_leffler(0.0, -1.0).is_err());
        assert!(mittag_leffler(1.2, -1.0).is_err());
        assert!(MLParams::with_tolerance(0.5, 1e-3).is_err());
        assert!(mittag_leffler(0.5, 100.0).is_err());
    }

    #[test]
    fn upper_gamma_examples() {
        assert_relative_eq!(incomplete_gamma_upper(1.0, 2.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(incomplete_gamma_upper(0.5, 0.0).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert!(matches!(incomplete_gamma_upper(0.0, 0.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn upper_gamma_zero_order_matches_quadrature() {
        // oracle: the defining integral int_1^inf e^-s / s ds
        let oracle = exp_sinh(|s| (-s).exp() / s, 1.0, 1.0, 1e-14).unwrap().value;
        assert_relative_eq!(oracle, 0.219_383_934_395_520_3, max_relative = 1e-12);
        assert_relative_eq!(incomplete_gamma_upper(0.0, 1.0).unwrap(), oracle, max_relative = 1e-12);
        for &z in &[0.01, 0.3, 0.99, 1.0, 3.0, 30.0] {
            let q = exp_sinh(|s| (-s).exp() / s, z, 1.0, 1e-14).unwrap().value;
            assert_relative_eq!(incomplete_gamma_upper(0.0, z).unwrap(), q, max_relative = 1e-11);
        }
    }

    #[test]
    fn upper_gamma_negative_orders_match_quadrature() {
        for &nu in &[-0.5, -1.0, -0.3, -2.0, 0.4, 2.5] {
            for &z in &[0.05, 0.7, 2.0, 9.0] {
                let q = exp_sinh(|s| (-s).exp() * s.powf(nu - 1.0), z, 1.0, 1e-14).unwrap().value;
                assert_relative_eq!(incomplete_gamma_upper(nu, z).unwrap(), q, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn lower_plus_upper_is_gamma() {
        for &nu in &[0.3, 1.0, 2.7] {
            for &z in &[0.1, 1.0, 5.0, 40.0] {
                let s = incomplete_gamma_lower(nu, z).unwrap() + incomplete_gamma_upper(nu, z).unwrap();
                assert_relative_eq!(s, gamma(nu), max_relative = 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn upper_gamma_recurrence(nu in -2.9f64..4.0, z in 0.02f64..25.0) {
            prop_assume!((nu - nu.round()).abs() > 0.01);
            let lhs = incomplete_gamma_upper(nu + 1.0, z).unwrap();
            let rhs = nu * incomplete_gamma_upper(nu, z).unwrap() + z.powf(nu) * (-z).exp();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs(), "nu={} z={} lhs={} rhs={}", nu, z, lhs, rhs);
        }
    }

    #[test]
    fn m_wright_half_is_gaussian() {
        for &z in &[0.0f64, 0.3, 0.99, 1.0, 1.01, 2.0, 5.0, 9.0] {
            let exact = (-z * z / 4.0).exp() / PI.sqrt();
            assert_relative_eq!(m_wright(0.5, z).unwrap(), exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn m_wright_branches_agree() {
        for &alpha in &[0.2, 0.3, 0.5, 0.7, 0.8, 0.9] {
            let s = m_wright_series(alpha, 1.0);
            let k = m_wright_kanter(alpha, 1.0).unwrap();
            assert_relative_eq!(s, k, max_relative = 1e-10);
        }
    }

    #[test]
    fn closed_density_examples() {
        assert_relative_eq!(
            stable_inverse_density_closed(0.5, 1.0, 0.0).unwrap(),
            1.0 / PI.sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            stable_inverse_density_closed(0.5, 1.0, 2.0).unwrap(),
            (-1.0f64).exp() / PI.sqrt(),
            max_relative = 1e-11
        );
    }

    #[test]
    fn closed_density_normalised() {
        for &alpha in &[0.3, 0.5, 0.8] {
            for &t in &[0.5f64, 1.0, 5.0] {
                let scale = t.powf(alpha);
                let total = integrate(
                    |tau| stable_inverse_density_closed(alpha, t, tau).unwrap(),
                    0.0,
                    60.0 * scale,
                    Tolerance::new(1e-11, 1e-11),
                )
                .unwrap();
                assert!((total.value - 1.0).abs() < 1e-8, "alpha={alpha} t={t}: {}", total.value);
            }
        }
    }

    #[test]
    fn closed_density_laplace_is_mittag_leffler() {
        let alpha = 0.5;
        let r = integrate(
            |tau| (-tau).exp() * stable_inverse_density_closed(alpha, 1.0, tau).unwrap(),
            0.0,
            60.0,
            Tolerance::rel(1e-12),
        )
        .unwrap();
        assert_relative_eq!(r.value, 0.427_583_576_155_807, max_relative = 1e-10);
        for &a in &[0.3, 0.8] {
            let r = integrate(
                |tau| (-2.0 * tau).exp() * stable_inverse_density_closed(a, 1.5, tau).unwrap(),
                0.0,
                80.0,
                Tolerance::rel(1e-12),
            )
            .unwrap();
            let e = mittag_leffler(a, -2.0 * 1.5f64.powf(a)).unwrap();
            assert_relative_eq!(r.value, e, max_relative = 1e-9);
        }
    }

    #[test]
    fn g_alpha_values() {
        assert_relative_eq!(g_alpha(0.5, 1.0), 1.0 / PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(g_alpha(1.0, 3.0), 1.0, max_relative = 1e-15);
    }
}
