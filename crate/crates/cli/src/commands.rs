//! Execution of a resolved [`RunConfig`].

use std::fs;
use std::path::Path;

use disperse_lab::discrete_group::{
    automorphic_kernel, critical_exponent_estimate, critical_exponent_with_budget, enumerate_orbit, growth_function,
    growth_function_with_budget,
    poincare_series, quotient_lq_norm, DiscreteGroup, McConfig, OrbitLimits,
};
use disperse_lab::dispersive::{decay_fit, log_times};
use disperse_lab::io::{fmt_f64, Column, Table};
use disperse_lab::kernels::{global_psi, kernel_lq_norm, verify_pointwise_bound, DispersiveProfile, KernelGrid};
use disperse_lab::lie_data::{catalog, make_rank_one_space, Family, RankOneSpace};
use disperse_lab::nls::{
    duhamel_solve, exponents_for, parse_pairs, scattering_residual, strichartz_quotient, ygamma_quotient, NlsOptions,
    SineBasis,
};
use disperse_lab::spherical::RadialFunction;
use disperse_lab::verify::{run_all, VerifyConfig};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, GroupOp, RunConfig};
use crate::plot::{emit_plot, slope_label};
use crate::CliError;

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        Command::Lie => lie(cfg),
        Command::Kernel => kernel(cfg),
        Command::Group => group(cfg),
        Command::Dispersive => dispersive(cfg),
        Command::Nls => nls(cfg),
        Command::VerifyAll => verify_all(cfg),
    }
}

/// `H2`, `H3`, `Hn(F)` or `F:n` with `F` one of R, C, H, O.
pub fn parse_space(text: &str) -> Result<RankOneSpace, CliError> {
    let bad = || CliError::Usage(format!("cannot parse space {text:?}; use H2, H3, H4(C) or C:4"));
    let s = text.trim();
    let (family, n) = if let Some((f, n)) = s.split_once(':') {
        (f.trim().parse::<Family>()?, n.trim().parse::<u32>().map_err(|_| bad())?)
    } else {
        let rest = s.strip_prefix(['H', 'h']).ok_or_else(bad)?;
        let (digits, fam) = match rest.split_once('(') {
            Some((d, f)) => (d, f.strip_suffix(')').ok_or_else(bad)?.parse::<Family>()?),
            None => (rest, Family::Real),
        };
        (fam, digits.parse::<u32>().map_err(|_| bad())?)
    };
    Ok(make_rank_one_space(family, n)?)
}

fn space_or(cfg: &RunConfig, default: &str) -> Result<RankOneSpace, CliError> {
    parse_space(cfg.space.as_deref().unwrap_or(default))
}

fn load_group(path: &Path) -> Result<DiscreteGroup, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read group file {}: {e}", path.display())))?;
    DiscreteGroup::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_text(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(value: &T, cfg: &RunConfig) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))? + "\n";
    write_text(&text, cfg.outputs.json.as_deref())
}

/// CSV to `outputs.csv`, or to stdout when no JSON file is requested either.
fn emit_table(table: &Table, cfg: &RunConfig) -> Result<(), CliError> {
    let text = table.to_csv()?;
    match (&cfg.outputs.csv, &cfg.outputs.json) {
        (Some(p), _) => write_text(&text, Some(p)),
        (None, None) => write_text(&text, None),
        (None, Some(_)) => Ok(()),
    }
}

fn mc_config(cfg: &RunConfig) -> McConfig {
    let d = McConfig::default();
    McConfig {
        samples: cfg.params.samples.unwrap_or(d.samples),
        seed: cfg.seed.unwrap_or(d.seed),
        ..d
    }
}

// ---------------------------------------------------------------------------

fn lie(cfg: &RunConfig) -> Result<(), CliError> {
    let spaces = match &cfg.space {
        Some(s) => vec![parse_space(s)?],
        None => catalog(),
    };
    if cfg.outputs.csv.is_some() {
        let mut t = Table::new(vec![
            Column::new("family", "symbol", "R, C, H or O"),
            Column::new("n", "real dimension", ""),
            Column::new("m_alpha", "multiplicity", "root alpha"),
            Column::new("m_2alpha", "multiplicity", "root 2 alpha"),
            Column::new("rho", "1", "half sum of positive roots"),
            Column::new("rho_m", "1", "exponent of the pointwise decay"),
        ]);
        for s in &spaces {
            t.push(vec![
                s.family.symbol().into(),
                s.n.to_string(),
                s.m_alpha.to_string(),
                s.m_2alpha.to_string(),
                fmt_f64(s.rho),
                fmt_f64(s.rho_m),
            ])?;
        }
        return emit_table(&t, cfg);
    }
    emit_json(&spaces, cfg)
}

fn kernel(cfg: &RunConfig) -> Result<(), CliError> {
    let space = space_or(cfg, "H3")?;
    let p = &cfg.params;
    let q = p.q.unwrap_or(4.0);
    let times = p.t_list.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0]);
    let grid_n = p.grid_n.unwrap_or(41);
    if grid_n < 2 {
        return Err(CliError::Usage(format!("grid_n must be at least 2, got {grid_n}")));
    }
    let radii: Vec<f64> = (0..grid_n).map(|j| 8.0 * j as f64 / (grid_n - 1) as f64).collect();
    let profile = DispersiveProfile::psi1(space.n);
    let mut table = Table::new(vec![
        Column::new("t", "time", ""),
        Column::new("Lq_norm", "L^q(X) norm", "kernel L^q norm decays like Psi(t)"),
        Column::new("fitted_c", "1", "smallest c with |s_t(r)| <= c psi(t,r) e^{-rho r} on the radial grid"),
        Column::new("branch_coverage", "fraction", "radii in the |t| <= 1+r branch"),
    ]);
    for &t in &times {
        let lq = kernel_lq_norm(&space, t, q)?;
        let fit = verify_pointwise_bound(&KernelGrid::sample(&space, &[t], &radii)?, &profile)?;
        let cover = fit.short_time_points as f64 / (fit.short_time_points + fit.long_time_points) as f64;
        table.push_numbers(&[t, lq.value, fit.c_star, cover])?;
    }
    emit_table(&table, cfg)
}

fn group(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.group.as_deref().ok_or_else(|| CliError::Usage("group needs a group file".into()))?;
    let g = load_group(path)?;
    let p = &cfg.params;
    let op = p.op.ok_or_else(|| CliError::Usage("group needs an operation".into()))?;
    let o = g.model.origin();
    let value: Value = match op {
        GroupOp::Orbit => {
            let mut limits = OrbitLimits::radius(p.radius.unwrap_or(5.0));
            if let Some(b) = p.budget {
                limits.budget = b;
            }
            let orbit = enumerate_orbit(&g, &o, &o, limits)?;
            if cfg.outputs.csv.is_some() || cfg.outputs.json.is_none() {
                let mut t = Table::new(vec![
                    Column::new("word", "letters", "i < k generator i, i >= k its inverse"),
                    Column::new("length", "letters", ""),
                    Column::new("distance", "geodesic distance", "d(x, gamma x)"),
                ]);
                for e in &orbit.entries {
                    let w: Vec<String> = e.word.iter().map(|l| l.to_string()).collect();
                    t.push(vec![w.join(" "), e.word.len().to_string(), fmt_f64(e.distance)])?;
                }
                emit_table(&t, cfg)?;
                if cfg.outputs.json.is_none() {
                    return Ok(());
                }
            }
            json!({
                "op": "orbit",
                "radius": orbit.radius,
                "complete": orbit.complete,
                "depth": orbit.depth,
                "words_explored": orbit.words_explored,
                "count": orbit.entries.len(),
                "count_by_length": orbit.count_by_length,
                "distances": orbit.distances(),
            })
        }
        GroupOp::Poincare => {
            let r = poincare_series(&g, p.s.unwrap_or(1.0), &o, &o, p.budget.unwrap_or(400_000))?;
            json!({"op": "poincare", "result": r})
        }
        GroupOp::Delta => {
            let r = match p.budget {
                Some(b) => critical_exponent_with_budget(&g, b)?,
                None => critical_exponent_estimate(&g)?,
            };
            json!({"op": "delta", "result": r, "rho_m": g.space().rho_m, "admits": r.admits(g.space().rho_m)})
        }
        GroupOp::Growth => {
            let n = p.n.unwrap_or(5);
            let r = match p.budget {
                Some(b) => growth_function_with_budget(&g, n, b)?,
                None => growth_function(&g, n)?,
            };
            json!({"op": "growth", "n": n, "result": r})
        }
        GroupOp::Autokernel => {
            let t = p.t.unwrap_or(1.0);
            let r = automorphic_kernel(&g, t, &o, &o, p.epsilon.unwrap_or(1e-8))?;
            json!({"op": "autokernel", "t": t, "result": r})
        }
        GroupOp::Lqnorm => {
            let (t, q) = (p.t.unwrap_or(1.0), p.q.unwrap_or(4.0));
            let r = quotient_lq_norm(&g, t, q, &o, &mc_config(cfg))?;
            json!({"op": "lqnorm", "t": t, "q": q, "result": r})
        }
    };
    emit_json(&value, cfg)
}

fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("t_range must be a:b:steps with 0 < a <= b, got {s:?}"));
    let v: Vec<&str> = s.split(':').collect();
    if v.len() != 3 {
        return Err(bad());
    }
    let a: f64 = v[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = v[1].trim().parse().map_err(|_| bad())?;
    let n: usize = v[2].trim().parse().map_err(|_| bad())?;
    if !(a > 0.0 && b >= a && n >= 1 && b.is_finite()) {
        return Err(bad());
    }
    Ok(log_times(a, b, n))
}

fn dispersive(cfg: &RunConfig) -> Result<(), CliError> {
    let p = &cfg.params;
    let q = p.q.unwrap_or(4.0);
    let times = parse_range(p.t_range.as_deref().unwrap_or("2:50:12"))?;
    let group = cfg.group.as_deref().map(load_group).transpose()?;
    let space = match (&group, &cfg.space) {
        (Some(g), Some(s)) => {
            let sp = parse_space(s)?;
            if sp != g.space() {
                return Err(CliError::Usage(format!("space {} does not match the group's {}", sp.label(), g.space().label())));
            }
            sp
        }
        (Some(g), None) => g.space(),
        (None, _) => space_or(cfg, "H3")?,
    };
    let mc = mc_config(cfg);
    let mut measured = Vec::with_capacity(times.len());
    let mut stderr = Vec::with_capacity(times.len());
    for &t in &times {
        match &group {
            Some(g) => {
                let e = quotient_lq_norm(g, t, q, &g.model.origin(), &mc)?;
                measured.push(e.value);
                stderr.push(e.stderr);
            }
            None => {
                measured.push(kernel_lq_norm(&space, t, q)?.value);
                stderr.push(0.0);
            }
        }
    }
    let psi: Vec<f64> = times.iter().map(|&t| global_psi(t, space.n, true)).collect();
    let scale = if p.fit {
        measured.iter().zip(&psi).map(|(m, s)| m / s).fold(0.0, f64::max)
    } else {
        1.0
    };
    let on = if group.is_some() { "M" } else { "X" };
    let mut table = Table::new(vec![
        Column::new("t", "time", ""),
        Column::new(
            "bound",
            "L^q norm",
            if p.fit { "fitted constant times Psi(t)" } else { "Psi(t) with unit constant" },
        ),
        Column::new("measured", "L^q norm", &format!("kernel L^q({on}) norm")),
        Column::new("ratio", "1", "measured over bound, bounded in t"),
        Column::new("measured_stderr", "L^q norm", "Monte Carlo standard error"),
    ]);
    for i in 0..times.len() {
        let bound = scale * psi[i];
        table.push_numbers(&[times[i], bound, measured[i], measured[i] / bound, stderr[i]])?;
    }
    if p.fit {
        match decay_fit(&times, &measured) {
            Ok(f) => eprintln!("decay slope {} ± {:.2e} over {} times, constant {:.6e}", slope_label(f.slope), f.stderr, f.points, scale),
            Err(e) => eprintln!("no slope fit: {e}"),
        }
    }
    if let Some(svg) = &cfg.outputs.svg {
        emit_plot(&format!("kernel L^{q} norm on {}", space.label()), &times, &measured, svg)?;
    }
    emit_table(&table, cfg)
}

fn nls(cfg: &RunConfig) -> Result<(), CliError> {
    let space = space_or(cfg, "H3")?;
    let p = &cfg.params;
    let gamma = p.gamma.unwrap_or(2.0);
    let eps = p.eps.unwrap_or(1e-3);
    let t_final = p.t_final.unwrap_or(20.0);
    let mut opts = NlsOptions::default();
    if let Some(dt) = p.dt {
        opts.dt = dt;
    }
    let pairs = p.pairs.as_deref().map(parse_pairs).transpose()?;
    if let Some((pair, dual)) = pairs {
        for e in exponents_for(gamma, pair, dual) {
            if e.is_finite() && !opts.record_exponents.contains(&e) {
                opts.record_exponents.push(e);
            }
        }
    }
    if !space.is_real_hyperbolic(3) {
        return Err(CliError::Lib(disperse_lab::Error::UnsupportedSpace(format!(
            "the NLS solver runs on H3, got {}",
            space.label()
        ))));
    }
    let basis = SineBasis::default_h3();
    let bump = RadialFunction::from_real_fn(space, basis.grid().clone(), |r| (-0.5 * r * r).exp())?;
    let f = bump.scaled(Complex64::new(eps / bump.l2_norm(), 0.0));
    let run = duhamel_solve(&space, &f, gamma, t_final, &opts)?;
    let strichartz = match pairs {
        Some((pair, dual)) => Some(json!({
            "pair": [pair.0, pair.1],
            "dual_pair": [dual.0, dual.1],
            "quotient": strichartz_quotient(&run, pair, dual)?,
        })),
        None => None,
    };
    let scattering = if run.blowup_suspect {
        Vec::new()
    } else {
        run.times
            .iter()
            .filter(|&&t| t > 0.0)
            .map(|&t| scattering_residual(&run, t))
            .collect::<Result<Vec<_>, _>>()?
    };
    let doc = json!({
        "space": space.label(),
        "gamma": gamma,
        "eps": eps,
        "T": run.t_final,
        "dt": run.dt,
        "coupling": run.coupling,
        "contracted": run.contracted(),
        "max_contraction": run.max_contraction(),
        "max_iterations": run.max_iterations(),
        "blowup_suspect": run.blowup_suspect,
        "ygamma": run.ygamma,
        "ygamma_quotient": ygamma_quotient(&run),
        "strichartz": strichartz,
        "scattering_residuals": scattering,
        "norms": run.norms,
    });
    emit_json(&doc, cfg)?;
    if run.blowup_suspect {
        return Err(CliError::Failed(format!(
            "the fixed point did not contract (max contraction {:.3}); run flagged as a blowup suspect",
            run.max_contraction()
        )));
    }
    Ok(())
}

/// Applies `key=value` to the suite settings; values are JSON, falling back to strings.
fn apply_overrides(base: VerifyConfig, overrides: &[String]) -> Result<VerifyConfig, CliError> {
    let mut v = serde_json::to_value(base).map_err(|e| CliError::Usage(e.to_string()))?;
    let map = v.as_object_mut().expect("settings serialize to an object");
    for o in overrides {
        let (k, val) = o
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override {o:?} is not key=value")))?;
        let parsed = serde_json::from_str(val.trim()).unwrap_or_else(|_| Value::String(val.trim().into()));
        map.insert(k.trim().to_string(), parsed);
    }
    serde_path_to_error::deserialize(v).map_err(|e| CliError::Usage(format!("override field `{}`: {}", e.path(), e.inner())))
}

fn verify_all(cfg: &RunConfig) -> Result<(), CliError> {
    let space = space_or(cfg, "H3")?;
    if !space.is_real_hyperbolic(2) && !space.is_real_hyperbolic(3) {
        return Err(CliError::Usage(format!("verification runs on H2 or H3, got {}", space.label())));
    }
    let mut base = VerifyConfig {
        n: space.n,
        checks: cfg.params.checks.clone(),
        ..VerifyConfig::default()
    };
    if let Some(s) = cfg.seed {
        base.seed = s;
    }
    let vc = apply_overrides(base, &cfg.params.overrides)?;
    let results = run_all(&vc)?;
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} checks passed", results.len() - failed.len(), results.len());
    if cfg.outputs.csv.is_some() || cfg.outputs.json.is_some() {
        let mut t = Table::new(vec![
            Column::new("id", "check", ""),
            Column::new("name", "text", ""),
            Column::new("passed", "bool", ""),
            Column::new("measured", "check units", "headline quantity"),
            Column::new("threshold", "check units", "value it is compared with"),
            Column::new("detail", "text", ""),
        ]);
        for r in &results {
            t.push(vec![
                r.id.to_string(),
                r.name.clone(),
                r.passed.to_string(),
                fmt_f64(r.measured),
                fmt_f64(r.threshold),
                r.detail.clone(),
            ])?;
        }
        if let Some(p) = &cfg.outputs.csv {
            write_text(&t.to_csv()?, Some(p))?;
        }
        if let Some(p) = &cfg.outputs.json {
            let text = serde_json::to_string_pretty(&json!({"settings": vc, "results": results}))
                .map_err(|e| CliError::Usage(e.to_string()))?;
            write_text(&(text + "\n"), Some(p))?;
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("verification failed for checks {failed:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_specs() {
        assert_eq!(parse_space("H3").unwrap(), RankOneSpace::h3());
        assert_eq!(parse_space("H2(R)").unwrap(), RankOneSpace::h2());
        assert_eq!(parse_space("C:4").unwrap().m_2alpha, 1);
        assert_eq!(parse_space("H8(H)").unwrap().m_2alpha, 3);
        assert!(parse_space("X3").is_err());
        assert!(parse_space("C:5").is_err());
    }

    #[test]
    fn ranges() {
        let t = parse_range("1:16:5").unwrap();
        assert_eq!(t.len(), 5);
        assert!((t[2] - 4.0).abs() < 1e-12);
        assert!(parse_range("0:1:3").is_err());
        assert!(parse_range("1:2").is_err());
    }

    #[test]
    fn overrides_are_typed() {
        let v = apply_overrides(VerifyConfig::default(), &["decay_exponent=-1.0".into(), "checks=[3]".into()]).unwrap();
        assert_eq!(v.decay_exponent, -1.0);
        assert_eq!(v.checks, vec![3]);
        let err = apply_overrides(VerifyConfig::default(), &["nope=1".into()]).unwrap_err();
        assert!(err.to_string().contains("nope"), "{err}");
        assert!(apply_overrides(VerifyConfig::default(), &["n=\"three\"".into()]).is_err());
    }
}
