//! One function per subcommand; each returns the table to write and the
//! one-line summary.

use clap::{Args, ValueEnum};
use rtdyn::kernel::{consistency_rows, hypothesis_h_check};
use rtdyn::mc::{draw, laplace_of_s, MeanEstimate, Sampler};
use rtdyn::par;
use rtdyn::potentials::{doubling_grid, green_measure, naive_v_divergence_check, potential_u, renormalized_vr};
use rtdyn::report::Table;
use rtdyn::special::{gamma, mittag_leffler};
use rtdyn::subordination::{
    asymptotic_profile, empirical_expectation, evolution_residual, gfd_apply, loglog_slope, predicted_decay, Route,
    SubordinatedSolution, GFD_STEP,
};
use rtdyn::trajectory::{mc_mean_position, mean_trajectory};
use rtdyn::{make_triple, Error, GEvaluator, KernelSpec, Result, TimeChange};

use crate::opts::{Case, Common};

pub struct Outcome {
    pub table: Table,
    pub summary: String,
}

/// Columns with a leading `case` index when there is more than one case.
fn table(multi: bool, cols: &[&str]) -> Table {
    let mut all = Vec::with_capacity(cols.len() + 1);
    if multi {
        all.push("case".to_string());
    }
    all.extend(cols.iter().map(|c| c.to_string()));
    Table::new(all)
}

fn row(multi: bool, case: usize, vals: &[f64]) -> Vec<f64> {
    let mut r = Vec::with_capacity(vals.len() + 1);
    if multi {
        r.push(case as f64);
    }
    r.extend_from_slice(vals);
    r
}

fn describe(mut t: Table, cases: &[Case]) -> Table {
    for (i, c) in cases.iter().enumerate() {
        t = t.meta(format!("case {i}"), c.label());
    }
    t
}

fn solution(c: &Case, common: &Common, tol: f64) -> Result<SubordinatedSolution> {
    let flow = c.flow()?.clone();
    match &common.x {
        Some(_) => SubordinatedSolution::new(&c.time, flow, c.obs()?, common.list("x", None)?, tol),
        None => SubordinatedSolution::from_flow(&c.time, flow, c.obs()?, tol),
    }
}

fn start_point(c: &Case, common: &Common) -> Result<Vec<f64>> {
    let x0 = c.flow()?.x0().to_vec();
    common.list("x", Some(&x0))
}

fn worst(items: impl IntoIterator<Item = (f64, String)>) -> (f64, String) {
    items
        .into_iter()
        .fold((0.0, String::new()), |a, b| if b.0 >= a.0 || b.0.is_nan() { b } else { a })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * i as f64 / (n - 1) as f64))
        .collect()
}

pub fn kernel_check(common: &Common) -> Result<Outcome> {
    let cases = common.cases(true, false)?;
    let lambdas = common.list("lambda", Some(&log_grid(1e-2, 1e2, 41)))?;
    let multi = cases.len() > 1;
    let mut t = describe(
        table(multi, &["lambda", "phi", "K", "k_laplace", "phi_err", "transform_err"]),
        &cases,
    );
    let mut errs = Vec::new();
    let mut h = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let triple = make_triple(c.kernel()?.clone())?;
        for r in consistency_rows(&triple, &lambdas)? {
            t.push(row(multi, i, &[r.lambda, r.phi, r.big_k, r.k_quadrature, r.phi_err, r.transform_err]))?;
            errs.push((r.phi_err.max(r.transform_err), format!("case {i} lambda={}", r.lambda)));
        }
        h.push(if hypothesis_h_check(&triple).holds() { "yes" } else { "no" });
    }
    let (e, at) = worst(errs);
    t = t.meta("H", h.join(","));
    Ok(Outcome {
        table: t,
        summary: format!("max_rel_err={e:.3e} ({at}); H={}", h.join(",")),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Check {
    /// G_t(tau) on the t x tau grid
    #[default]
    None,
    /// int e^(-lambda tau) G_t(tau) dtau against its closed form
    Laplace,
    /// the double transform in (t, tau) against K(l)/(l K(l) + p)
    DoubleLaplace,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[arg(long, value_enum, default_value_t)]
    pub check: Check,
}

pub fn density(common: &Common, args: &DensityArgs) -> Result<Outcome> {
    let cases = common.cases(true, false)?;
    let tol = common.tol()?;
    let multi = cases.len() > 1;
    let evals = cases
        .iter()
        .map(|c| GEvaluator::new(make_triple(c.kernel()?.clone())?, common.method(), tol))
        .collect::<Result<Vec<_>>>()?;
    let exec = common.exec();
    match args.check {
        Check::None => {
            let ts = common.times()?;
            let taus = common.list("tau", None)?;
            let mut t = describe(table(multi, &["t", "tau", "G"]), &cases);
            let mut last = f64::NAN;
            for (i, g) in evals.iter().enumerate() {
                for [tt, tau, v] in g.grid(&ts, &taus, exec)? {
                    t.push(row(multi, i, &[tt, tau, v]))?;
                    last = v;
                }
            }
            let summary = if t.rows().len() == 1 {
                format!("G={last:.6}")
            } else {
                let g = t.column("G").unwrap_or_default();
                let bad = g.iter().filter(|v| !v.is_finite()).count();
                format!("points={} max_G={:.6} non_finite={bad}", g.len(), g.iter().cloned().fold(f64::NAN, f64::max))
            };
            Ok(Outcome { table: t, summary })
        }
        Check::Laplace => {
            let ts = common.times()?;
            let lambdas = common.list("lambda", None)?;
            let mut t = describe(table(multi, &["t", "lambda", "quadrature", "target", "rel_err"]), &cases);
            let mut errs = Vec::new();
            for (i, g) in evals.iter().enumerate() {
                let pts: Vec<(f64, f64)> = ts.iter().flat_map(|&a| lambdas.iter().map(move |&b| (a, b))).collect();
                let vals = par::try_map(exec, &pts, |&(tt, l)| {
                    let q = g.laplace_tau_quadrature(tt, l)?;
                    let want = match g.triple().spec() {
                        KernelSpec::StableAlpha { alpha } => mittag_leffler(*alpha, -l * tt.powf(*alpha))?,
                        _ => g.laplace_tau(tt, l)?,
                    };
                    Ok((q, want))
                })?;
                for (&(tt, l), (q, want)) in pts.iter().zip(vals) {
                    let rel = (q - want).abs() / want.abs();
                    t.push(row(multi, i, &[tt, l, q, want, rel]))?;
                    errs.push((rel, format!("case {i} t={tt} lambda={l}")));
                }
            }
            let (e, at) = worst(errs);
            Ok(Outcome {
                table: t,
                summary: format!("max_rel_err={e:.3e} ({at})"),
            })
        }
        Check::DoubleLaplace => {
            let lambdas = common.list("lambda", None)?;
            let ps = common.list("p", None)?;
            let mut t = describe(table(multi, &["lambda", "p", "value", "target", "rel_err"]), &cases);
            let mut errs = Vec::new();
            for (i, g) in evals.iter().enumerate() {
                let pts: Vec<(f64, f64)> = lambdas.iter().flat_map(|&a| ps.iter().map(move |&b| (a, b))).collect();
                let vals = par::try_map(exec, &pts, |&(l, p)| g.double_laplace_check(l, p))?;
                for (&(l, p), d) in pts.iter().zip(vals) {
                    t.push(row(multi, i, &[l, p, d.value, d.target, d.rel_err]))?;
                    errs.push((d.rel_err, format!("case {i} lambda={l} p={p}")));
                }
            }
            let (e, at) = worst(errs);
            Ok(Outcome {
                table: t,
                summary: format!("max_rel_err={e:.3e} ({at})"),
            })
        }
    }
}

pub fn subordinate(common: &Common) -> Result<Outcome> {
    let cases = common.cases(true, true)?;
    let tol = common.tol()?;
    let ts = common.times()?;
    let multi = cases.len() > 1;
    let mc = common.paths.is_some();
    let cols: &[&str] = if mc {
        &["t", "v", "mc_mean", "mc_std_error", "z"]
    } else {
        &["t", "v"]
    };
    let mut t = describe(table(multi, cols), &cases).meta("seed", common.seed());
    let mut zs = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let sol = solution(c, common, tol)?;
        let route = match sol.route() {
            Route::Transform { c, z } => format!("transform c={c} z={z}"),
            Route::Quadrature => "quadrature".into(),
        };
        t = t.meta(format!("route {i}"), route);
        let vs = par::try_map(common.exec(), &ts, |&tt| sol.value(tt))?;
        let sampler = if mc { Some(Sampler::new(c.kernel()?.clone())?) } else { None };
        for (&tt, v) in ts.iter().zip(vs) {
            match &sampler {
                Some(s) => {
                    let e = empirical_expectation(&sol, s, tt, common.paths(1)?, common.seed(), common.exec())?;
                    let z = e.z_score(v);
                    t.push(row(multi, i, &[tt, v, e.mean, e.std_error, z]))?;
                    zs.push((z, format!("case {i} t={tt}")));
                }
                None => t.push(row(multi, i, &[tt, v]))?,
            }
        }
    }
    let summary = if mc {
        let (z, at) = worst(zs);
        format!("max_z={z:.3} ({at})")
    } else if t.rows().len() == 1 {
        format!("v={:.6}", t.column("v").unwrap_or_default()[0])
    } else {
        format!("rows={}", t.rows().len())
    };
    Ok(Outcome { table: t, summary })
}

pub fn asymptotics(common: &Common) -> Result<Outcome> {
    let cases = common.cases(true, true)?;
    let tol = common.tol()?;
    let ts = common.times()?;
    let multi = cases.len() > 1;
    let mut t = describe(table(multi, &["t", "v", "predicted", "ratio"]), &cases);
    let mut parts = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let sol = solution(c, common, tol)?;
        let (amp, z) = match sol.route() {
            Route::Transform { c, z } if z > 0.0 => (c, z),
            _ => {
                return Err(Error::Unsupported(format!(
                    "case {i}: asymptotics need u(tau) = c exp(-z tau) with z > 0"
                )))
            }
        };
        let profile = asymptotic_profile(c.kernel()?);
        t = t.meta(
            format!("profile {i}"),
            match &profile.reason {
                Some(r) => format!("gamma={} Q={} ({r})", profile.gamma_exp, profile.q),
                None => format!("gamma={} Q={}", profile.gamma_exp, profile.q),
            },
        );
        let rows = par::try_map(common.exec(), &ts, |&tt| {
            let v = sol.value(tt)?;
            let p = predicted_decay(&profile, z, tt).map(|p| amp * p).unwrap_or(f64::NAN);
            Ok([tt, v, p, v / p])
        })?;
        for r in &rows {
            t.push(row(multi, i, r))?;
        }
        let (pos_t, pos_v): (Vec<f64>, Vec<f64>) =
            rows.iter().filter(|r| r[0] > 0.0 && r[1] > 0.0).map(|r| (r[0], r[1])).unzip();
        let slope = if pos_t.len() >= 2 { loglog_slope(&pos_t, &pos_v)? } else { f64::NAN };
        let mut part = format!("[{i}] slope={slope:.4}");
        if profile.valid {
            let gaps: Vec<f64> = rows.iter().map(|r| (r[3] - 1.0).abs()).collect();
            let worst_gap = gaps.iter().cloned().fold(0.0, f64::max);
            let last = rows.last().map(|r| r[3]).unwrap_or(f64::NAN);
            let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
            part.push_str(&format!(
                " ratio(t_last)={last:.4} max|ratio-1|={worst_gap:.3e} monotone={monotone}"
            ));
        } else {
            part.push_str(&format!(
                " no power-law prediction: {}",
                profile.reason.as_deref().unwrap_or("profile not valid")
            ));
        }
        parts.push(part);
    }
    Ok(Outcome {
        table: t,
        summary: parts.join("; "),
    })
}

#[derive(Debug, Clone, Args)]
pub struct GfdArgs {
    /// Apply the derivative to E_alpha(-t^alpha) instead (stable kernels)
    #[arg(long)]
    pub mittag_leffler: bool,
    /// Grid step of the discretised derivative
    #[arg(long, default_value_t = GFD_STEP)]
    pub h: f64,
}

pub fn gfd_residual(common: &Common, args: &GfdArgs) -> Result<Outcome> {
    let ts = common.times()?;
    let tol = common.tol()?;
    let mut errs = Vec::new();
    if args.mittag_leffler {
        let cases = common.cases(true, false)?;
        let multi = cases.len() > 1;
        let mut t = describe(table(multi, &["t", "derivative", "target", "rel_err"]), &cases);
        for (i, c) in cases.iter().enumerate() {
            let KernelSpec::StableAlpha { alpha } = *c.kernel()? else {
                return Err(Error::Config(format!("case {i}: --mittag-leffler needs family=stable")));
            };
            let tr = make_triple(c.kernel()?.clone())?;
            let w = |s: f64| mittag_leffler(alpha, -s.powf(alpha)).unwrap_or(f64::NAN);
            for &tt in &ts {
                let d = gfd_apply(&tr, w, tt, args.h)?;
                let target = -w(tt);
                let rel = (d - target).abs() / target.abs();
                t.push(row(multi, i, &[tt, d, target, rel]))?;
                errs.push((rel, format!("case {i} t={tt}")));
            }
        }
        let (e, at) = worst(errs);
        return Ok(Outcome {
            table: t,
            summary: format!("max_rel_err={e:.3e} ({at})"),
        });
    }
    let cases = common.cases(true, true)?;
    let multi = cases.len() > 1;
    let mut t = describe(
        table(multi, &["t", "derivative", "generator", "residual", "relative"]),
        &cases,
    );
    for (i, c) in cases.iter().enumerate() {
        let sol = solution(c, common, tol)?;
        for &tt in &ts {
            let r = evolution_residual(&sol, tt, args.h, common.exec())?;
            t.push(row(multi, i, &[r.t, r.derivative, r.generator, r.residual, r.relative]))?;
            errs.push((r.relative, format!("case {i} t={tt}")));
        }
    }
    let (e, at) = worst(errs);
    Ok(Outcome {
        table: t,
        summary: format!("max_rel_residual={e:.3e} ({at})"),
    })
}

pub fn potential(common: &Common) -> Result<Outcome> {
    let cases = common.cases(false, true)?;
    let tol = common.tol()?;
    let multi = cases.len() > 1;
    let mut t = describe(table(multi, &["U", "green_integral", "rel_gap"]), &cases);
    let mut errs = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let (flow, f) = (c.flow()?, c.obs()?);
        let x = start_point(c, common)?;
        let u = potential_u(flow, &f, &x, tol)?;
        let mu = green_measure(flow, &x)?.integrate(&f, tol)?;
        let gap = (u - mu).abs() / u.abs();
        t.push(row(multi, i, &[u, mu, gap]))?;
        errs.push((gap, format!("case {i}")));
    }
    let (e, at) = worst(errs);
    Ok(Outcome {
        table: t,
        summary: format!("max_rel_gap={e:.3e} ({at})"),
    })
}

#[derive(Debug, Clone, Args)]
pub struct RenormArgs {
    /// First horizon of the doubling grid for the naive partial integrals
    #[arg(long, default_value_t = 1e2)]
    pub naive_from: f64,
    /// Number of horizons in that grid
    #[arg(long, default_value_t = 14)]
    pub naive_points: usize,
}

pub fn renormalize(common: &Common, args: &RenormArgs) -> Result<Outcome> {
    let cases = common.cases(true, true)?;
    let tol = common.tol()?;
    let ts = common.times()?;
    let multi = cases.len() > 1;
    let mut t = describe(table(multi, &["T", "partial_integral", "N_T", "ratio"]), &cases);
    let mut parts = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let (flow, f) = (c.flow()?, c.obs()?);
        let x = start_point(c, common)?;
        let rows = renormalized_vr(flow, &f, &x, &c.time, &ts, tol, common.exec())?;
        for r in &rows {
            t.push(row(multi, i, &[r.t, r.partial_integral, r.n_t, r.ratio]))?;
        }
        let u = potential_u(flow, &f, &x, tol)?;
        let last = rows.last().expect("nonempty grid");
        let rel = (last.ratio - u).abs() / u.abs();
        let sol = solution(c, common, tol)?;
        let naive = naive_v_divergence_check(&sol, &doubling_grid(args.naive_from, args.naive_points), common.exec())?;
        t = t.meta(format!("U {i}"), u).meta(
            format!("naive {i}"),
            format!("growth_exponent={} diverges={}", naive.growth_exponent, naive.diverges),
        );
        parts.push(format!(
            "[{i}] V_r(T={})={:.6} U={u:.6} rel_err={rel:.3e} naive_growth={:.4} diverges={}",
            last.t, last.ratio, naive.growth_exponent, naive.diverges
        ));
    }
    Ok(Outcome {
        table: t,
        summary: parts.join("; "),
    })
}

pub fn trajectory(common: &Common) -> Result<Outcome> {
    let cases = common.cases(true, true)?;
    let tol = common.tol()?;
    let ts = common.times()?;
    let multi = cases.len() > 1;
    let mc = common.paths.is_some();
    let d = cases[0].flow()?.dim();
    if cases.iter().any(|c| c.flow.as_ref().map(|f| f.dim()) != Some(d)) {
        return Err(Error::Config("all flows must share one dimension".into()));
    }
    let mut cols: Vec<String> = vec!["t".into()];
    cols.extend((1..=d).map(|k| format!("meanY_{k}")));
    cols.extend((1..=d).map(|k| format!("X_{k}")));
    cols.push("ratio".into());
    if mc {
        cols.extend((1..=d).map(|k| format!("mc_meanY_{k}")));
        cols.push("max_z".into());
    }
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = describe(table(multi, &refs), &cases).meta("seed", common.seed());
    let mut parts = Vec::new();
    let mut zs = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let flow = c.flow()?;
        let x = start_point(c, common)?;
        let rep = mean_trajectory(flow, &c.time, &x, &ts, tol, common.exec())?;
        let ratios = rep.ratios(&x);
        let sampler = match (&c.time, mc) {
            (TimeChange::Inverse(k), true) => Some(Sampler::new(k.clone())?),
            _ => None,
        };
        for (j, &tt) in ts.iter().enumerate() {
            let mut r = vec![tt];
            r.extend(&rep.mean_y[j]);
            r.extend(&rep.reference[j]);
            r.push(ratios[j]);
            if mc {
                let est: Vec<MeanEstimate> = match &sampler {
                    Some(s) => mc_mean_position(flow, s, &x, tt, common.paths(1)?, common.seed(), common.exec())?,
                    None => rep.mean_y[j]
                        .iter()
                        .map(|&m| MeanEstimate {
                            mean: m,
                            std_error: 0.0,
                            n: 1,
                        })
                        .collect(),
                };
                let z = est
                    .iter()
                    .zip(&rep.mean_y[j])
                    .map(|(e, &m)| if e.std_error > 0.0 { e.z_score(m) } else { 0.0 })
                    .fold(0.0, f64::max);
                r.extend(est.iter().map(|e| e.mean));
                r.push(z);
                zs.push((z, format!("case {i} t={tt}")));
            }
            t.push(row(multi, i, &r))?;
        }
        // the slowdown law E[E(t)] = t^alpha / Gamma(1 + alpha) for linear motion
        let closed = match (&c.time, flow.kind()) {
            (TimeChange::Inverse(KernelSpec::StableAlpha { alpha }), rtdyn::dynamics::FlowKind::Linear { v }) => {
                let errs = ts.iter().zip(&rep.mean_y).map(|(&tt, m)| {
                    let want: Vec<f64> =
                        x.iter().zip(v).map(|(x, v)| x + v * tt.powf(*alpha) / gamma(1.0 + alpha)).collect();
                    let scale = want.iter().map(|w| w.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                    m.iter().zip(&want).map(|(a, b)| (a - b).abs() / scale).fold(0.0, f64::max)
                });
                Some(errs.fold(0.0, f64::max))
            }
            _ => None,
        };
        let mut part = if ts.len() == 1 && d == 1 {
            format!("[{i}] E[Y]={:.6}", rep.mean_y[0][0])
        } else {
            format!("[{i}] slowdown_exponent={:.4}", rep.slowdown_exponent_fit)
        };
        if let Some(e) = closed {
            part.push_str(&format!(" closed_form_rel_err={e:.3e}"));
        }
        parts.push(part);
    }
    if mc {
        let (z, at) = worst(zs);
        parts.push(format!("mc max_z={z:.3} ({at})"));
    }
    let summary = if !multi && ts.len() == 1 && d == 1 && !mc {
        format!("E[Y]={:.6}", t.rows()[0][1])
    } else {
        parts.join("; ")
    };
    Ok(Outcome { table: t, summary })
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Samples per subordination check (the flow/obs cases)
    #[arg(long, default_value_t = 200_000)]
    pub sub_paths: usize,
    /// Dump raw E(t) draws of the first kernel at the --t values instead
    #[arg(long)]
    pub samples: bool,
}

pub fn mc_validate(common: &Common, args: &McArgs) -> Result<Outcome> {
    let cases = common.cases(true, false)?;
    let seed = common.seed();
    let exec = common.exec();
    if args.samples {
        let sampler = Sampler::new(cases[0].kernel()?.clone())?;
        let ts = common.times()?;
        let n = common.paths(1000)?;
        let mut t = describe(Table::new(["path_id", "t", "E_t"]), &cases[..1]).meta("seed", seed);
        for &tt in &ts {
            let es = draw(exec, n, seed, |rng| sampler.sample_e(tt, rng))?;
            for (k, e) in es.into_iter().enumerate() {
                t.push(vec![k as f64, tt, e])?;
            }
        }
        let summary = format!("samples={}", t.rows().len());
        return Ok(Outcome { table: t, summary });
    }
    let s_time = if common.t.is_none() && common.t_grid.is_none() {
        vec![1.0]
    } else {
        common.times()?
    };
    let lambdas = common.list("lambda", Some(&[0.5, 1.0, 2.0]))?;
    let n = common.paths(1_000_000)?;
    let mut t = describe(
        Table::new(["check", "case", "arg", "mc_mean", "std_error", "target", "z"]),
        &cases,
    )
    .meta("seed", seed)
    .meta("check 0", "E exp(-lambda S(t)) vs exp(-t Phi(lambda)); arg = lambda")
    .meta("check 1", "empirical E[u(E(t))] vs subordination v(t); arg = t");
    let mut worst_s = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let sampler = Sampler::new(c.kernel()?.clone())?;
        for &st in &s_time {
            let est = laplace_of_s(&sampler, st, &lambdas, n, seed, exec)?;
            for (e, &l) in est.iter().zip(&lambdas) {
                let target = (-st * sampler.triple().phi(l)?).exp();
                let z = e.z_score(target);
                t.push(vec![0.0, i as f64, l, e.mean, e.std_error, target, z])?;
                worst_s.push((z, format!("case {i} lambda={l}")));
            }
        }
    }
    let (zs, at_s) = worst(worst_s);
    let mut summary = format!("laplace max_z={zs:.3} ({at_s})");
    if !common.flow.is_empty() {
        let tol = common.tol()?;
        let mut worst_v = Vec::new();
        let mut deterministic = true;
        for (i, c) in cases.iter().enumerate() {
            if c.flow.is_none() {
                continue;
            }
            let sol = solution(c, common, tol)?;
            let sampler = Sampler::new(c.kernel()?.clone())?;
            for &st in &s_time {
                let v = sol.value(st)?;
                let e = empirical_expectation(&sol, &sampler, st, args.sub_paths, seed, exec)?;
                if worst_v.is_empty() {
                    let again = empirical_expectation(&sol, &sampler, st, args.sub_paths, seed, rtdyn::Exec::Sequential)?;
                    deterministic &= again.mean.to_bits() == e.mean.to_bits();
                }
                let z = e.z_score(v);
                t.push(vec![1.0, i as f64, st, e.mean, e.std_error, v, z])?;
                worst_v.push((z, format!("case {i} t={st}")));
            }
        }
        let (zv, at_v) = worst(worst_v);
        t = t.meta("deterministic", deterministic);
        summary.push_str(&format!("; subordination max_z={zv:.3} ({at_v}); deterministic={deterministic}"));
    }
    Ok(Outcome { table: t, summary })
}
