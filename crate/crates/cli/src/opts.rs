//! Shared flags, `--config` files, grids and the kernel/flow/observable cases.

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rtdyn::dynamics::{Flow, Observable};
use rtdyn::mc::DEFAULT_SEED;
use rtdyn::{DensityMethod, Error, Exec, KernelSpec, Result, TimeChange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Contour,
    RealAxis,
    ClosedForm,
}

impl From<Method> for DensityMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Contour => DensityMethod::Contour,
            Method::RealAxis => DensityMethod::RealAxis,
            Method::ClosedForm => DensityMethod::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Kernel config, e.g. "family=stable alpha=0.5"; repeat for several cases
    #[arg(long)]
    pub kernel: Vec<String>,
    /// Flow config, e.g. "flow=linear v=1 x0=0"; repeatable, "none" for no flow
    #[arg(long)]
    pub flow: Vec<String>,
    /// Observable config, e.g. "obs=expabs a=1"; repeatable
    #[arg(long)]
    pub obs: Vec<String>,
    /// Times, comma separated
    #[arg(long = "t", value_name = "LIST")]
    pub t: Option<String>,
    /// Time grid "start,stop,count[,linear|log]"
    #[arg(long, value_name = "SPEC", conflicts_with = "t")]
    pub t_grid: Option<String>,
    /// Operational times, comma separated
    #[arg(long, value_name = "LIST")]
    pub tau: Option<String>,
    /// Laplace variables, comma separated
    #[arg(long, value_name = "LIST")]
    pub lambda: Option<String>,
    /// Second Laplace variables (double transform), comma separated
    #[arg(long, value_name = "LIST")]
    pub p: Option<String>,
    /// Starting point; defaults to the flow's x0
    #[arg(long, value_name = "LIST")]
    pub x: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Run on the calling thread only
    #[arg(long)]
    pub sequential: bool,
    /// File of `field = value` lines (kernel, flow, obs, t, t-grid, tau,
    /// lambda, p, x, tol, seed, paths, method, output, format); flags win
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// One resolved case: a clock plus (optionally) a flow and an observable.
#[derive(Debug, Clone)]
pub struct Case {
    pub time: TimeChange,
    pub flow: Option<Flow>,
    pub obs: Option<Observable>,
}

impl Case {
    pub fn flow(&self) -> Result<&Flow> {
        self.flow.as_ref().ok_or_else(|| Error::Config("--flow is required".into()))
    }

    pub fn obs(&self) -> Result<Observable> {
        self.obs.ok_or_else(|| Error::Config("--obs is required".into()))
    }

    pub fn kernel(&self) -> Result<&KernelSpec> {
        match &self.time {
            TimeChange::Inverse(k) => Ok(k),
            TimeChange::Identity => Err(Error::Config("this command needs a subordinator kernel, not identity".into())),
        }
    }

    pub fn label(&self) -> String {
        let mut s = self.time.to_string();
        if let Some(f) = &self.flow {
            s.push_str(&format!(" | {f}"));
        }
        if let Some(o) = &self.obs {
            s.push_str(&format!(" | {o}"));
        }
        s
    }
}

impl Common {
    /// Fill unset fields from `--config`.
    pub fn merge_config(&mut self) -> Result<()> {
        let Some(path) = self.config.clone() else {
            return Ok(());
        };
        let text = fs::read_to_string(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let (mut kernel, mut flow, mut obs) = (Vec::new(), Vec::new(), Vec::new());
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{}:{}: expected field = value", path.display(), n + 1)))?;
            let (k, v) = (k.trim(), v.trim().to_string());
            let num = |v: &str| -> Result<f64> {
                v.parse().map_err(|_| Error::Config(format!("{k} = {v} is not a number")))
            };
            let int = |v: &str| -> Result<u64> {
                v.parse().map_err(|_| Error::Config(format!("{k} = {v} is not an integer")))
            };
            match k {
                "kernel" => kernel.push(v),
                "flow" => flow.push(v),
                "obs" => obs.push(v),
                "t" => set(&mut self.t, v),
                "t-grid" => set(&mut self.t_grid, v),
                "tau" => set(&mut self.tau, v),
                "lambda" => set(&mut self.lambda, v),
                "p" => set(&mut self.p, v),
                "x" => set(&mut self.x, v),
                "tol" => set(&mut self.tol, num(&v)?),
                "seed" => set(&mut self.seed, int(&v)?),
                "paths" => set(&mut self.paths, int(&v)? as usize),
                "method" => set(&mut self.method, enum_value(k, &v)?),
                "format" => set(&mut self.format, enum_value(k, &v)?),
                "output" => set(&mut self.output, PathBuf::from(v)),
                other => return Err(Error::Config(format!("{}: unknown field `{other}`", path.display()))),
            }
        }
        for (dst, src) in [(&mut self.kernel, kernel), (&mut self.flow, flow), (&mut self.obs, obs)] {
            if dst.is_empty() {
                *dst = src;
            }
        }
        if self.t.is_some() && self.t_grid.is_some() {
            return Err(Error::Config("give either t or t-grid, not both".into()));
        }
        Ok(())
    }

    pub fn tol(&self) -> Result<f64> {
        let tol = self.tol.unwrap_or(1e-10);
        if !(tol > 0.0 && tol <= 1e-2) {
            return Err(Error::Config(format!("tol = {tol} not in (0, 1e-2]")));
        }
        Ok(tol)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn method(&self) -> DensityMethod {
        self.method.unwrap_or(Method::Contour).into()
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        let ts = match (&self.t, &self.t_grid) {
            (Some(list), _) => parse_list("t", list)?,
            (None, Some(spec)) => parse_grid(spec)?,
            (None, None) => return Err(Error::Config("--t or --t-grid is required".into())),
        };
        if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config("times must be finite and >= 0".into()));
        }
        Ok(ts)
    }

    pub fn list(&self, name: &'static str, default: Option<&[f64]>) -> Result<Vec<f64>> {
        let field = match name {
            "tau" => &self.tau,
            "lambda" => &self.lambda,
            "p" => &self.p,
            "x" => &self.x,
            _ => unreachable!("no list field {name}"),
        };
        match (field, default) {
            (Some(s), _) => parse_list(name, s),
            (None, Some(d)) => Ok(d.to_vec()),
            (None, None) => Err(Error::Config(format!("--{name} is required"))),
        }
    }

    pub fn paths(&self, default: usize) -> Result<usize> {
        match self.paths.unwrap_or(default) {
            0 => Err(Error::Config("paths must be positive".into())),
            n => Ok(n),
        }
    }

    /// Kernels, flows and observables zipped; a single entry is broadcast.
    /// Without `need_kernel` a missing kernel means identity time.
    pub fn cases(&self, need_kernel: bool, need_flow: bool) -> Result<Vec<Case>> {
        let times = self
            .kernel
            .iter()
            .map(|s| s.parse::<TimeChange>())
            .collect::<Result<Vec<_>>>()?;
        // "none" leaves that case without a flow or observable
        let flows = self
            .flow
            .iter()
            .map(|s| if s.trim() == "none" { Ok(None) } else { s.parse::<Flow>().map(Some) })
            .collect::<Result<Vec<_>>>()?;
        let obs = self
            .obs
            .iter()
            .map(|s| if s.trim() == "none" { Ok(None) } else { s.parse::<Observable>().map(Some) })
            .collect::<Result<Vec<_>>>()?;
        let times = match (times.is_empty(), need_kernel) {
            (true, true) => return Err(Error::Config("--kernel is required".into())),
            (true, false) => vec![TimeChange::Identity],
            _ => times,
        };
        if need_flow && flows.is_empty() {
            return Err(Error::Config("--flow is required".into()));
        }
        let n = times.len().max(flows.len()).max(obs.len());
        for (name, len) in [("kernel", times.len()), ("flow", flows.len()), ("obs", obs.len())] {
            if len > 1 && len != n {
                return Err(Error::Config(format!("{len} --{name} values for {n} cases")));
            }
        }
        let pick = |len: usize, i: usize| if len == 1 { 0 } else { i };
        Ok((0..n)
            .map(|i| Case {
                time: times[pick(times.len(), i)].clone(),
                flow: flows.get(pick(flows.len(), i)).cloned().flatten(),
                obs: obs.get(pick(obs.len(), i)).copied().flatten(),
            })
            .collect())
    }
}

fn set<T>(slot: &mut Option<T>, v: T) {
    if slot.is_none() {
        *slot = Some(v);
    }
}

fn enum_value<T: ValueEnum>(k: &str, v: &str) -> Result<T> {
    T::from_str(v, true).map_err(|_| Error::Config(format!("{k} = {v} is not a valid choice")))
}

pub fn parse_list(name: &str, s: &str) -> Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("--{name}: `{x}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(Error::Config(format!("--{name} is empty")));
    }
    Ok(v)
}

/// `start,stop,count[,linear|log]`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("--t-grid `{spec}`: expected start,stop,count[,linear|log]"));
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    let log = match parts.get(3).copied().unwrap_or("linear") {
        "linear" => false,
        "log" => true,
        _ => return Err(bad()),
    };
    if n == 0 || !(b >= a) || (log && !(a > 0.0)) {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let frac = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if log {
                10f64.powf(a.log10() + (b.log10() - a.log10()) * frac(i))
            } else {
                a + (b - a) * frac(i)
            }
        })
        .collect())
}
