//! One function per task; each writes `results.csv` and `manifest.json`.

use std::path::Path;

use hypstab_core::acceptance::{log_log_slope, run_acceptance};
use hypstab_core::calibration::calibrate;
use hypstab_core::front_tracking::{ft_solve_with, phi_timeline, FTTrajectory, TrackingOptions};
use hypstab_core::functionals::{glimm_values, stability_phi_detailed};
use hypstab_core::wave_measures::{approx_sequence, wave_measures, xi_hat, BVFunction};
use hypstab_core::{FluxModel, PiecewiseConstantFn, StabilityConstants};
use serde_json::json;

use crate::config::{Data, Scenario, Task};
use crate::output::{num, OutDir, Table};
use crate::RunError;

pub fn run_scenario(s: &Scenario, dir: &Path, seed: Option<u64>) -> Result<(), RunError> {
    let model = s.model()?;
    let mut out = OutDir::create(dir)?;
    let consts = s.consts();
    let extra = match s.task {
        Task::Functionals => functionals(s, &model, seed, &mut out)?,
        Task::PhiPair => phi_pair(s, &model, &consts, seed, &mut out)?,
        Task::Evolve => evolve(s, &model, &consts, seed, &mut out)?,
        Task::ApproxStudy => approx_study(s, &model, seed, &mut out)?,
        Task::Calibrate => calibrate_task(s, &model, &consts, seed, &mut out)?,
        Task::Acceptance => acceptance(s, seed, &mut out)?,
    };
    let mut written = out.written().to_vec();
    written.push("manifest.json".into());
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": s,
        "seed_override": seed,
        "constants": consts,
        "artifacts": written,
        "results": extra.as_ref().map(|r| &r.manifest),
    });
    out.json("manifest.json", &manifest)?;
    match extra.and_then(|r| r.failed) {
        Some(ids) if !ids.is_empty() => Err(RunError::CriterionFailure(ids)),
        _ => Ok(()),
    }
}

pub struct TaskResult {
    manifest: serde_json::Value,
    failed: Option<Vec<u8>>,
}

impl TaskResult {
    fn info(manifest: serde_json::Value) -> Option<Self> {
        Some(Self { manifest, failed: None })
    }
}

fn glimm_row(
    model: &FluxModel,
    label: &str,
    data: &Data,
    consts: &StabilityConstants,
) -> Result<Vec<String>, RunError> {
    let (v, q, up) = match data {
        Data::Step(u) => {
            let g = glimm_values(model, u, consts.c0)?;
            (g.v, g.q, g.upsilon)
        }
        Data::Bv(u) => {
            let w = wave_measures(model, u)?;
            (w.total_strength(), w.interaction(), w.upsilon(consts.c0))
        }
    };
    Ok(vec![label.to_string(), num(v), num(q), num(up)])
}

fn functionals(
    s: &Scenario,
    model: &FluxModel,
    seed: Option<u64>,
    out: &mut OutDir,
) -> Result<Option<TaskResult>, RunError> {
    let (u, ut) = s.data(model, seed)?;
    let consts = s.consts();
    let mut t = Table::new(&["function", "V", "Q", "Upsilon"]);
    t.row(glimm_row(model, "u", &u, &consts)?);
    if let Some(ut) = &ut {
        t.row(glimm_row(model, "u_tilde", ut, &consts)?);
    }
    out.csv("results.csv", &t)?;
    Ok(None)
}

fn phi_pair(
    s: &Scenario,
    model: &FluxModel,
    consts: &StabilityConstants,
    seed: Option<u64>,
    out: &mut OutDir,
) -> Result<Option<TaskResult>, RunError> {
    let (u, ut) = s.data(model, seed)?;
    // a missing second function is the zero function
    let ut = ut.unwrap_or_else(|| Data::Step(PiecewiseConstantFn::zero(model.dim())));
    let xi = xi_hat(model, &u.as_bv(), &ut.as_bv(), consts)?;
    let mut t = Table::new(&["phi", "xi_hat", "l1", "min_weight", "max_weight"]);
    match (&u, &ut) {
        (Data::Step(v), Data::Step(vt)) => {
            let e = stability_phi_detailed(model, v, vt, consts)?;
            t.nums(&[e.phi, xi, e.l1, e.min_weight, e.max_weight]);
        }
        _ => t.row(vec![
            String::new(),
            num(xi),
            String::new(),
            String::new(),
            String::new(),
        ]),
    }
    out.csv("results.csv", &t)?;
    Ok(None)
}

fn sample_times(s: &Scenario) -> Vec<f64> {
    let n = s.sample_times.max(2);
    (0..n).map(|k| s.t_final * k as f64 / (n - 1) as f64).collect()
}

fn snapshot_table(u: &PiecewiseConstantFn) -> Table {
    let mut header = vec!["x".to_string()];
    header.extend((0..u.dim()).map(|j| format!("u{j}")));
    let mut t = Table::with_header(header);
    let bps = u.breakpoints();
    for (k, x) in bps.iter().enumerate() {
        let mut row = vec![*x];
        match u.values().get(k) {
            Some(v) => row.extend(v.iter().copied()),
            None => row.extend(std::iter::repeat_n(0.0, u.dim())),
        }
        t.nums(&row);
    }
    t
}

fn evolve(
    s: &Scenario,
    model: &FluxModel,
    consts: &StabilityConstants,
    seed: Option<u64>,
    out: &mut OutDir,
) -> Result<Option<TaskResult>, RunError> {
    let (u, ut) = s.data(model, seed)?;
    let u = u.as_step()?.clone();
    let ut = ut.map(|d| d.as_step().cloned()).transpose()?;
    let times = sample_times(s);
    let mut diag = Table::new(&["eps", "function", "t", "V", "Q", "Upsilon", "non_physical", "fronts"]);
    let mut phi = Table::new(&["eps", "t", "phi", "phi_eps", "l1", "upsilon", "upsilon_tilde"]);
    let mut summary = Vec::new();
    for &eps in &s.eps {
        let mut opts = TrackingOptions::new(eps, s.t_final);
        if let Some(m) = s.max_events {
            opts.max_events = m;
        }
        let traj = ft_solve_with(model, &u, &opts, consts)?;
        let traj_t = ut
            .as_ref()
            .map(|v| ft_solve_with(model, v, &opts, consts))
            .transpose()?;
        let mut record = |name: &str, tr: &FTTrajectory, out: &mut OutDir| -> Result<(), RunError> {
            for d in &tr.diagnostics {
                let mut row = vec![num(eps), name.to_string()];
                row.extend([d.t, d.v, d.q, d.upsilon, d.non_physical].iter().map(|x| num(*x)));
                row.push(d.fronts.to_string());
                diag.row(row);
            }
            out.json(&format!("events_{name}_eps{eps}.json"), &tr.event_log_json())?;
            out.csv(
                &format!("snapshot_{name}_eps{eps}.csv"),
                &snapshot_table(&tr.snapshot(s.t_final)?),
            )?;
            Ok(())
        };
        record("u", &traj, out)?;
        let mut entry = json!({
            "eps": eps,
            "events": traj.events.len(),
            "max_upsilon_increase": traj.max_upsilon_increase(),
            "max_non_physical": traj.max_non_physical(),
        });
        if let Some(tt) = &traj_t {
            record("u_tilde", tt, out)?;
            for p in phi_timeline(&traj, tt, consts, &times)? {
                phi.nums(&[eps, p.t, p.phi, p.phi_eps, p.l1, p.upsilon, p.upsilon_tilde]);
            }
            entry["max_upsilon_increase_tilde"] = json!(tt.max_upsilon_increase());
        }
        summary.push(entry);
    }
    out.csv("results.csv", &diag)?;
    if ut.is_some() {
        out.csv("phi.csv", &phi)?;
    }
    Ok(TaskResult::info(json!({ "trajectories": summary })))
}

fn approx_study(
    s: &Scenario,
    model: &FluxModel,
    seed: Option<u64>,
    out: &mut OutDir,
) -> Result<Option<TaskResult>, RunError> {
    let (u, _) = s.data(model, seed)?;
    let u: BVFunction = u.as_bv();
    let q = wave_measures(model, &u)?.interaction();
    let mut t = Table::new(&["nu", "q_hat_nu", "q_hat", "error", "l1"]);
    let (mut nus, mut errs) = (Vec::new(), Vec::new());
    for &nu in &s.nu {
        let v = approx_sequence(&u, nu)?;
        let qv = wave_measures(model, &BVFunction::from_pcf(&v))?.interaction();
        let err = (qv - q).abs();
        t.row(vec![
            nu.to_string(),
            num(qv),
            num(q),
            num(err),
            num(u.l1_distance_pcf(&v)),
        ]);
        if err > 0.0 {
            nus.push(nu as f64);
            errs.push(err);
        }
    }
    out.csv("results.csv", &t)?;
    let slope = (nus.len() >= 2).then(|| log_log_slope(&nus, &errs));
    Ok(TaskResult::info(json!({ "fitted_slope": slope })))
}

fn calibrate_task(
    s: &Scenario,
    model: &FluxModel,
    consts: &StabilityConstants,
    seed: Option<u64>,
    out: &mut OutDir,
) -> Result<Option<TaskResult>, RunError> {
    let spec = s.calibration.as_ref().expect("validated");
    let report = calibrate(model, consts.delta, spec.samples, seed.unwrap_or(spec.seed))?;
    let fitted = report.constants(consts.kappa1);
    let mut t = Table::new(&[
        "samples",
        "max_v_ratio",
        "max_a_ratio",
        "max_q_ratio",
        "C0",
        "kappa2",
        "c_equiv",
    ]);
    t.row(vec![
        report.samples.to_string(),
        num(report.max_v_ratio),
        num(report.max_a_ratio),
        num(report.max_q_ratio),
        num(report.c0),
        num(report.kappa2),
        num(report.c_equiv),
    ]);
    out.csv("results.csv", &t)?;
    let constants = json!({ "constants": fitted, "c_equiv": report.c_equiv, "report": report });
    out.json("constants.json", &constants)?;
    Ok(TaskResult::info(constants))
}

fn acceptance(s: &Scenario, seed: Option<u64>, out: &mut OutDir) -> Result<Option<TaskResult>, RunError> {
    let mut cfg = s.acceptance.clone().unwrap_or_default();
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = run_acceptance(&cfg)?;
    let mut t = Table::new(&["criterion", "name", "check", "measured", "bound", "pass"]);
    for r in &report.results {
        println!("{}", r.summary());
        for c in &r.checks {
            t.row(vec![
                r.id.to_string(),
                r.name.to_string(),
                c.label.clone(),
                num(c.measured),
                num(c.bound),
                c.pass.to_string(),
            ]);
        }
    }
    out.csv("results.csv", &t)?;
    let json = report.to_json();
    out.json("report.json", &json)?;
    let failed = report.results.iter().filter(|r| !r.pass()).map(|r| r.id).collect();
    Ok(Some(TaskResult {
        manifest: json!({
            "acceptance": cfg,
            "calibration": json["calibration"],
            "frozen_constants": json["frozen_constants"],
        }),
        failed: Some(failed),
    }))
}
