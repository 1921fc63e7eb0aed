//! Mean time-changed trajectories `E[Y(t, x)] = int X(tau, x) G_t(tau) dtau`.

use crate::density::Clock;
use crate::dynamics::{Flow, FlowKind};
use crate::error::{Error, Result};
use crate::kernel::TimeChange;
use crate::mc::{mc_means, MeanEstimate, Sampler};
use crate::par::{self, Exec};
use crate::subordination::loglog_slope;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryReport {
    pub t_grid: Vec<f64>,
    pub mean_y: Vec<Vec<f64>>,
    /// The flow without time change, `X(t, x)`.
    pub reference: Vec<Vec<f64>>,
    /// Log-log slope of `|E[Y(t)] - x|` over the positive grid points; NaN
    /// with fewer than two.
    pub slowdown_exponent_fit: f64,
}

impl TrajectoryReport {
    /// `|E[Y(t)] - x| / |X(t) - x|` per grid point.
    pub fn ratios(&self, x: &[f64]) -> Vec<f64> {
        self.mean_y
            .iter()
            .zip(&self.reference)
            .map(|(m, r)| dist(m, x) / dist(r, x))
            .collect()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `X(tau, x)` may grow at most polynomially.
fn growth_check(flow: &Flow, x: &[f64]) -> Result<()> {
    let size = |tau: f64| flow.map(tau, x).map(|y| y.iter().map(|c| c.abs()).sum::<f64>());
    let mut prev = size(1.0)?;
    for j in 1..=40 {
        let tau = 2f64.powi(j);
        let cur = size(tau)?;
        if !cur.is_finite() || (j > 4 && cur > 256.0 * prev.max(1e-300) && cur > 1.0) {
            return Err(Error::Domain(format!(
                "X(tau, x) grows faster than a polynomial near tau={tau}"
            )));
        }
        prev = cur;
    }
    Ok(())
}

pub fn mean_at(clock: &Clock, flow: &Flow, x: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(x.to_vec());
    }
    match (clock, flow.kind()) {
        (Clock::Identity, _) => flow.map(t, x),
        (Clock::Inverse(g), FlowKind::Linear { v }) => {
            let m1 = g.moment(t, 1)?;
            Ok(x.iter().zip(v).map(|(x, v)| x + v * m1).collect())
        }
        (Clock::Inverse(g), _) => (0..x.len())
            .map(|i| {
                g.integrate_tau(t, |tau| flow.map(tau, x).map(|y| y[i]).unwrap_or(f64::NAN))
            })
            .collect(),
    }
}

pub fn mean_trajectory(
    flow: &Flow,
    time: &TimeChange,
    x: &[f64],
    t_grid: &[f64],
    tol: f64,
    exec: Exec,
) -> Result<TrajectoryReport> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("t", "grid must be nonempty and increasing"));
    }
    if x.len() != flow.dim() {
        return Err(Error::param("x", "dimension does not match the flow"));
    }
    growth_check(flow, x)?;
    let clock = Clock::new(time, tol)?;
    let mean_y = par::try_map(exec, t_grid, |&t| mean_at(&clock, flow, x, t))?;
    let reference = t_grid.iter().map(|&t| flow.map(t, x)).collect::<Result<Vec<_>>>()?;
    let (ts, ds): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .zip(&mean_y)
        .map(|(&t, m)| (t, dist(m, x)))
        .filter(|&(t, d)| t > 0.0 && d > 0.0)
        .unzip();
    let slowdown_exponent_fit = if ts.len() >= 2 {
        loglog_slope(&ts, &ds)?
    } else {
        f64::NAN
    };
    Ok(TrajectoryReport {
        t_grid: t_grid.to_vec(),
        mean_y,
        reference,
        slowdown_exponent_fit,
    })
}

/// Componentwise Monte Carlo mean of `X(E(t), x)`.
pub fn mc_mean_position(
    flow: &Flow,
    sampler: &Sampler,
    x: &[f64],
    t: f64,
    n: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<MeanEstimate>> {
    mc_means(exec, n, seed, x.len(), |rng, out| {
        let e = sampler.sample_e(t, rng)?;
        out.copy_from_slice(&flow.map(e, x)?);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::special::gamma;
    use approx::assert_relative_eq;

    fn stable(alpha: f64) -> TimeChange {
        TimeChange::Inverse(KernelSpec::stable(alpha).unwrap())
    }

    #[test]
    fn linear_flow_stable_half() {
        let flow = Flow::linear(vec![1.0], vec![0.0]).unwrap();
        let r = mean_trajectory(&flow, &stable(0.5), &[0.0], &[0.0, 1.0], 1e-10, Exec::default()).unwrap();
        assert_eq!(r.mean_y[0], vec![0.0]);
        assert_relative_eq!(r.mean_y[1][0], std::f64::consts::FRAC_2_SQRT_PI, max_relative = 1e-8);
    }

    #[test]
    fn identity_time_is_the_flow() {
        let flow = Flow::power(2.0, 1.0).unwrap();
        let r = mean_trajectory(&flow, &TimeChange::Identity, &[1.0], &[0.5, 3.0], 1e-10, Exec::default()).unwrap();
        assert_eq!(r.mean_y, r.reference);
        assert_eq!(r.ratios(&[1.0]), vec![1.0, 1.0]);
    }

    #[test]
    fn slowdown_law() {
        let flow = Flow::linear(vec![1.0], vec![0.0]).unwrap();
        let ts: Vec<f64> = (0..=8).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
        for alpha in [0.3, 0.5, 0.8] {
            let r = mean_trajectory(&flow, &stable(alpha), &[0.0], &ts, 1e-10, Exec::default()).unwrap();
            assert!((r.slowdown_exponent_fit - alpha).abs() < 0.01, "{alpha}: {}", r.slowdown_exponent_fit);
        }
    }

    #[test]
    fn linear_in_velocity() {
        let ts = [0.5, 2.0];
        let f1 = Flow::linear(vec![1.0, -0.5], vec![0.0, 0.0]).unwrap();
        let f2 = Flow::linear(vec![2.0, -1.0], vec![0.0, 0.0]).unwrap();
        let tc = TimeChange::Inverse(KernelSpec::gamma(1.0, 2.0).unwrap());
        let a = mean_trajectory(&f1, &tc, &[0.0, 0.0], &ts, 1e-10, Exec::default()).unwrap();
        let b = mean_trajectory(&f2, &tc, &[0.0, 0.0], &ts, 1e-10, Exec::default()).unwrap();
        for (a, b) in a.mean_y.iter().zip(&b.mean_y) {
            for (a, b) in a.iter().zip(b) {
                assert_relative_eq!(2.0 * a, *b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn power_flow_quadrature_matches_mc() {
        let flow = Flow::power(2.0, 1.0).unwrap();
        let spec = KernelSpec::stable(0.6).unwrap();
        let r = mean_trajectory(&flow, &TimeChange::Inverse(spec.clone()), &[1.0], &[2.0], 1e-10, Exec::default())
            .unwrap();
        let s = Sampler::new(spec).unwrap();
        let m = mc_mean_position(&flow, &s, &[1.0], 2.0, 20_000, 7, Exec::default()).unwrap();
        assert!(m[0].z_score(r.mean_y[0][0]) < 4.0, "{:?} vs {}", m[0], r.mean_y[0][0]);
    }

    #[test]
    fn first_moment_constant() {
        // C = 1/Gamma(1+alpha) in E[E(t)] = C t^alpha
        let flow = Flow::linear(vec![1.0], vec![0.0]).unwrap();
        for alpha in [0.3, 0.8] {
            let r = mean_trajectory(&flow, &stable(alpha), &[0.0], &[3.0], 1e-10, Exec::default()).unwrap();
            assert_relative_eq!(r.mean_y[0][0], 3f64.powf(alpha) / gamma(1.0 + alpha), max_relative = 1e-8);
        }
    }

    #[test]
    fn exponential_growth_refused() {
        let flow = Flow::numeric("grow", vec![1.0], |y: &[f64], o: &mut [f64]| o[0] = y[0]).unwrap();
        let e = mean_trajectory(&flow, &stable(0.5), &[1.0], &[1.0], 1e-10, Exec::default());
        assert!(e.is_err());
    }
}
