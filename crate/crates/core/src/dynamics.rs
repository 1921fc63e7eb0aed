//! Deterministic flows `X(t, x)`, observables `f`, and the Liouville
//! solution `u(t, x) = f(X(t, x))`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::config::Kv;
use crate::error::{Error, Result};

/// Relative tolerance of the embedded Runge-Kutta integrator.
pub const RK_TOL: f64 = 1e-10;

pub type VectorField = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub enum FlowKind {
    /// `X(t, x) = x + v t`.
    Linear { v: Vec<f64> },
    /// `b(x) = x^(1-beta)/beta`, so `X(t, x) = (x^beta + t)^(1/beta)`.
    Power { beta: f64, c: f64 },
    /// `b(x) = -k x`, integrated numerically; the closed form is kept only
    /// for tests.
    Decay { k: f64 },
    /// Any field, integrated numerically.
    Numeric { name: String, field: VectorField },
}

impl fmt::Debug for FlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowKind::Linear { v } => write!(f, "Linear {{ v: {v:?} }}"),
            FlowKind::Power { beta, c } => write!(f, "Power {{ beta: {beta}, c: {c} }}"),
            FlowKind::Decay { k } => write!(f, "Decay {{ k: {k} }}"),
            FlowKind::Numeric { name, .. } => write!(f, "Numeric {{ name: {name:?} }}"),
        }
    }
}

/// A flow together with its starting point.
#[derive(Debug, Clone)]
pub struct Flow {
    kind: FlowKind,
    x0: Vec<f64>,
}

impl Flow {
    pub fn linear(v: Vec<f64>, x0: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.len() != x0.len() {
            return Err(Error::param("v", "v and x0 need the same, nonzero dimension"));
        }
        if v.iter().chain(&x0).any(|c| !c.is_finite()) {
            return Err(Error::param("v", "components must be finite"));
        }
        Ok(Self {
            kind: FlowKind::Linear { v },
            x0,
        })
    }

    /// Started from `x0 = C^(1/beta)`, so that `X(t) = (t + C)^(1/beta)`.
    pub fn power(beta: f64, c: f64) -> Result<Self> {
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::param("beta", format!("{beta} must be >= 1")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("C", format!("{c} must be > 0")));
        }
        Ok(Self {
            kind: FlowKind::Power { beta, c },
            x0: vec![c.powf(1.0 / beta)],
        })
    }

    pub fn decay(k: f64, x0: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::param("k", format!("{k} must be > 0")));
        }
        if !x0.is_finite() {
            return Err(Error::param("x0", "must be finite"));
        }
        Ok(Self {
            kind: FlowKind::Decay { k },
            x0: vec![x0],
        })
    }

    pub fn numeric(
        name: impl Into<String>,
        x0: Vec<f64>,
        field: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::param("x0", "empty state"));
        }
        Ok(Self {
            kind: FlowKind::Numeric {
                name: name.into(),
                field: Arc::new(field),
            },
            x0,
        })
    }

    pub fn kind(&self) -> &FlowKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!("state has dimension {}, flow has {}", x.len(), self.dim())));
        }
        if let FlowKind::Power { .. } = self.kind {
            if !(x[0] > 0.0) {
                return Err(Error::Domain(format!("power flow needs x > 0, got {}", x[0])));
            }
        }
        Ok(())
    }

    /// The vector field `b(x)`.
    pub fn field(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_state(x)?;
        Ok(match &self.kind {
            FlowKind::Linear { v } => v.clone(),
            FlowKind::Power { beta, .. } => vec![x[0].powf(1.0 - beta) / beta],
            FlowKind::Decay { k } => vec![-k * x[0]],
            FlowKind::Numeric { field, .. } => {
                let mut out = vec![0.0; x.len()];
                field(x, &mut out);
                out
            }
        })
    }

    /// `X(t, x)` for `t >= 0`.
    pub fn map(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_state(x)?;
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("flow time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(x.to_vec());
        }
        match &self.kind {
            FlowKind::Linear { v } => Ok(x.iter().zip(v).map(|(x, v)| x + v * t).collect()),
            FlowKind::Power { beta, .. } => Ok(vec![(x[0].powf(*beta) + t).powf(1.0 / beta)]),
            FlowKind::Decay { k } => {
                let k = *k;
                rk45(move |y: &[f64], out: &mut [f64]| out[0] = -k * y[0], x, t, RK_TOL)
            }
            FlowKind::Numeric { field, .. } => {
                let f = field.clone();
                rk45(move |y: &[f64], out: &mut [f64]| f(y, out), x, t, RK_TOL)
            }
        }
    }

    /// `X(t, x0)`.
    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        self.map(t, &self.x0)
    }

    /// Whether `X` has a closed form here.
    pub fn is_closed_form(&self) -> bool {
        matches!(self.kind, FlowKind::Linear { .. } | FlowKind::Power { .. })
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        match &self.kind {
            FlowKind::Linear { v } => write!(f, "flow=linear v={} x0={}", join(v), join(&self.x0)),
            FlowKind::Power { beta, c } => write!(f, "flow=power beta={beta} C={c}"),
            FlowKind::Decay { k } => write!(f, "flow=decay k={k} x0={}", self.x0[0]),
            FlowKind::Numeric { name, .. } => write!(f, "flow=numeric name={name}"),
        }
    }
}

impl FromStr for Flow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kv = Kv::parse(s)?;
        let flow = match kv.take("flow")?.as_str() {
            "linear" => {
                let v = kv.take_vec("v")?;
                let x0 = kv.take_vec_or("x0", vec![0.0; v.len()])?;
                Flow::linear(v, x0)?
            }
            "power" => {
                let beta = kv.take_f64("beta")?;
                let c = kv.take_f64("C")?;
                Flow::power(beta, c)?
            }
            "decay" => {
                let k = kv.take_f64("k")?;
                let x0 = kv.take_f64_or("x0", 1.0)?;
                Flow::decay(k, x0)?
            }
            other => return Err(Error::Config(format!("unknown flow `{other}` (linear, power, decay)"))),
        };
        kv.finish()?;
        Ok(flow)
    }
}

/// Dormand-Prince 5(4) with step control on the mixed error
/// `|e_i| / (tol (1 + |y_i|))`.
pub fn rk45<F>(f: F, y0: &[f64], t_end: f64, tol: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h = (t_end * 1e-3).clamp(1e-12, 1e-2);
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut steps = 0usize;
    while t < t_end {
        steps += 1;
        if steps > 10_000_000 {
            return Err(Error::NonConvergence {
                what: format!("rk45 to t={t_end}"),
                achieved: t,
            });
        }
        h = h.min(t_end - t);
        f(&y, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                tmp[i] = y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            f(&tmp, &mut k[s]);
        }
        let mut err = 0.0f64;
        let mut y5 = vec![0.0; n];
        for i in 0..n {
            let d5: f64 = (0..7).map(|s| B5[s] * k[s][i]).sum();
            let d4: f64 = (0..7).map(|s| B4[s] * k[s][i]).sum();
            y5[i] = y[i] + h * d5;
            err = err.max((h * (d5 - d4)).abs() / (tol * (1.0 + y[i].abs().max(y5[i].abs()))));
        }
        if !err.is_finite() {
            return Err(Error::NonConvergence {
                what: format!("rk45 blew up near t={t}"),
                achieved: f64::INFINITY,
            });
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    Ok(y)
}

/// Observable `f` with its gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    /// `e^(-a |x|)`.
    ExpAbs { a: f64 },
    /// `e^(-a |x|^beta)`.
    ExpPow { a: f64, beta: f64 },
    /// `f = c`.
    Const { c: f64 },
    /// Smooth bump of radius `w` around `center` (first coordinate).
    Bump { center: f64, w: f64 },
}

impl Observable {
    pub fn exp_abs(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::param("a", format!("{a} must be > 0")));
        }
        Ok(Observable::ExpAbs { a })
    }

    pub fn exp_pow(a: f64, beta: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::param("a", format!("{a} must be > 0")));
        }
        if !(beta >= 1.0 && beta.is_finite()) {
            return Err(Error::param("beta", format!("{beta} must be >= 1")));
        }
        Ok(Observable::ExpPow { a, beta })
    }

    pub fn constant(c: f64) -> Self {
        Observable::Const { c }
    }

    pub fn bump(center: f64, w: f64) -> Result<Self> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::param("w", format!("{w} must be > 0")));
        }
        Ok(Observable::Bump { center, w })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Observable::ExpAbs { a } => (-a * norm(x)).exp(),
            Observable::ExpPow { a, beta } => (-a * norm(x).powf(beta)).exp(),
            Observable::Const { c } => c,
            Observable::Bump { center, w } => {
                let r = (x[0] - center) / w;
                if r.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = norm(x);
        let radial = |d: f64| -> Vec<f64> {
            if n == 0.0 {
                vec![0.0; x.len()]
            } else {
                x.iter().map(|c| d * c / n).collect()
            }
        };
        match *self {
            Observable::ExpAbs { a } => radial(-a * (-a * n).exp()),
            Observable::ExpPow { a, beta } => radial(-a * beta * n.powf(beta - 1.0) * (-a * n.powf(beta)).exp()),
            Observable::Const { .. } => vec![0.0; x.len()],
            Observable::Bump { center, w } => {
                let mut g = vec![0.0; x.len()];
                let r = (x[0] - center) / w;
                if r.abs() < 1.0 {
                    let q = 1.0 - r * r;
                    g[0] = self.eval(x) * (-2.0 * r / (q * q)) / w;
                }
                g
            }
        }
    }

    /// `(inf f, sup f)`.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Observable::Const { c } => (c, c),
            _ => (0.0, 1.0),
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::ExpAbs { a } => write!(f, "obs=expabs a={a}"),
            Observable::ExpPow { a, beta } => write!(f, "obs=exppow a={a} beta={beta}"),
            Observable::Const { c } => write!(f, "obs=const c={c}"),
            Observable::Bump { center, w } => write!(f, "obs=bump center={center} w={w}"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kv = Kv::parse(s)?;
        let obs = match kv.take("obs")?.as_str() {
            "expabs" => Observable::exp_abs(kv.take_f64("a")?)?,
            "exppow" => {
                let a = kv.take_f64("a")?;
                Observable::exp_pow(a, kv.take_f64("beta")?)?
            }
            "const" => Observable::constant(kv.take_f64_or("c", 1.0)?),
            "bump" => {
                let c = kv.take_f64("center")?;
                Observable::bump(c, kv.take_f64("w")?)?
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown observable `{other}` (expabs, exppow, const, bump)"
                )))
            }
        };
        kv.finish()?;
        Ok(obs)
    }
}

/// `u(t, x) = f(X(t, x))`.
pub fn liouville_u(flow: &Flow, f: &Observable, t: f64, x: &[f64]) -> Result<f64> {
    Ok(f.eval(&flow.map(t, x)?))
}

/// `(L f)(x) = b(x) . grad f(x)`.
pub fn generator(flow: &Flow, f: &Observable, x: &[f64]) -> Result<f64> {
    let b = flow.field(x)?;
    Ok(b.iter().zip(f.gradient(x)).map(|(b, g)| b * g).sum())
}

/// `|du/dt - (L f)(X(t, x))|` with a second-order difference in `t`
/// (one-sided when `t < h`).
pub fn liouville_residual(flow: &Flow, f: &Observable, t: f64, x: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::param("h", format!("{h} must be > 0")));
    }
    let u = |s: f64| liouville_u(flow, f, s, x);
    let dudt = if t >= h {
        (u(t + h)? - u(t - h)?) / (2.0 * h)
    } else {
        (-3.0 * u(t)? + 4.0 * u(t + h)? - u(t + 2.0 * h)?) / (2.0 * h)
    };
    let lu = generator(flow, f, &flow.map(t, x)?)?;
    Ok((dudt - lu).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn linear_examples() {
        let fl = Flow::linear(vec![1.0], vec![0.0]).unwrap();
        assert_eq!(fl.at(3.0).unwrap(), vec![3.0]);
        assert_eq!(fl.map(0.0, &[2.5]).unwrap(), vec![2.5]);
        let a = fl.map(1.0, &fl.map(2.0, &[0.3]).unwrap()).unwrap();
        assert_relative_eq!(a[0], fl.map(3.0, &[0.3]).unwrap()[0], max_relative = 1e-15);
        let f = Observable::exp_abs(1.0).unwrap();
        assert_relative_eq!(liouville_u(&fl, &f, 1.0, &[0.0]).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn power_examples() {
        let fl = Flow::power(2.0, 1.0).unwrap();
        assert_relative_eq!(fl.at(3.0).unwrap()[0], 2.0, max_relative = 1e-15);
        let one = Flow::power(1.0, 1.0).unwrap();
        assert_relative_eq!(one.at(2.5).unwrap()[0], 3.5, max_relative = 1e-15);
        assert_eq!(one.field(&[7.0]).unwrap(), vec![1.0]);
        let f = Observable::exp_pow(1.0, 2.0).unwrap();
        for &t in &[0.0, 0.7, 3.0] {
            assert_relative_eq!(liouville_u(&fl, &f, t, fl.x0()).unwrap(), (-(t + 1.0)).exp(), max_relative = 1e-13);
        }
        assert!(matches!(fl.map(1.0, &[0.0]), Err(Error::Domain(_))));
        assert!(Flow::power(0.5, 1.0).is_err());
    }

    #[test]
    fn decay_flow_integrates_to_closed_form() {
        let fl = Flow::decay(0.7, 2.0).unwrap();
        for &t in &[0.1, 1.0, 5.0] {
            assert_relative_eq!(fl.at(t).unwrap()[0], 2.0 * (-0.7 * t).exp(), max_relative = 1e-9);
        }
    }

    #[test]
    fn numeric_flow_in_two_dimensions() {
        // rotation: X(t) = (cos t, sin t) from (1, 0)
        let fl = Flow::numeric("rotation", vec![1.0, 0.0], |x, out| {
            out[0] = -x[1];
            out[1] = x[0];
        })
        .unwrap();
        let x = fl.at(2.0).unwrap();
        assert_relative_eq!(x[0], 2f64.cos(), epsilon = 1e-9);
        assert_relative_eq!(x[1], 2f64.sin(), epsilon = 1e-9);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let obs = [
            Observable::exp_abs(1.3).unwrap(),
            Observable::exp_pow(0.7, 2.0).unwrap(),
            Observable::exp_pow(1.0, 1.5).unwrap(),
            Observable::bump(1.0, 2.0).unwrap(),
        ];
        for f in obs {
            for &x in &[0.4, 1.1, 2.3] {
                let h = 1e-6;
                let fd = (f.eval(&[x + h]) - f.eval(&[x - h])) / (2.0 * h);
                assert_relative_eq!(f.gradient(&[x])[0], fd, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn residual_examples_and_order() {
        let lin = Flow::linear(vec![1.0], vec![0.0]).unwrap();
        let f = Observable::exp_pow(1.0, 2.0).unwrap();
        assert!(liouville_residual(&lin, &f, 1.0, &[0.5], 1e-4).unwrap() <= 1e-6);
        let c = Observable::constant(2.0);
        assert!(liouville_residual(&lin, &c, 1.0, &[0.5], 1e-4).unwrap() <= 1e-12);
        let pw = Flow::power(2.0, 1.0).unwrap();
        let g = Observable::exp_pow(1.0, 2.0).unwrap();
        assert!(liouville_residual(&pw, &g, 1.0, pw.x0(), 1e-4).unwrap() <= 1e-6);
        for (fl, obs) in [(&lin, &f), (&pw, &g)] {
            let r1 = liouville_residual(fl, obs, 1.0, fl.x0(), 2e-2).unwrap();
            let r2 = liouville_residual(fl, obs, 1.0, fl.x0(), 1e-2).unwrap();
            let ratio = r1 / r2;
            assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn configs_round_trip() {
        for s in [
            "flow=linear v=1 x0=0",
            "flow=power beta=2 C=1",
            "flow=decay k=0.5 x0=2",
            "flow=linear v=1,-2 x0=0.5,0",
        ] {
            let fl: Flow = s.parse().unwrap();
            let again: Flow = fl.to_string().parse().unwrap();
            assert_eq!(fl.to_string(), again.to_string());
        }
        assert_eq!("obs=expabs a=1.0".parse::<Observable>().unwrap(), Observable::ExpAbs { a: 1.0 });
        assert_eq!(
            "obs=exppow a=1.0 beta=2".parse::<Observable>().unwrap(),
            Observable::ExpPow { a: 1.0, beta: 2.0 }
        );
        assert!("flow=spiral".parse::<Flow>().is_err());
        assert!("obs=expabs a=1 b=2".parse::<Observable>().is_err());
        assert!("flow=linear v=1 x0=0,0".parse::<Flow>().is_err());
    }

    proptest! {
        #[test]
        fn semigroup_property(s in 0.0f64..5.0, t in 0.0f64..5.0, x in 0.1f64..4.0) {
            for fl in [
                Flow::linear(vec![-1.3], vec![0.0]).unwrap(),
                Flow::power(2.0, 1.0).unwrap(),
                Flow::power(3.5, 0.5).unwrap(),
                Flow::decay(0.4, 1.0).unwrap(),
            ] {
                let a = fl.map(t + s, &[x]).unwrap()[0];
                let b = fl.map(t, &fl.map(s, &[x]).unwrap()).unwrap()[0];
                prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{fl}: {a} vs {b}");
            }
        }
    }
}
