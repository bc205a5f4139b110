//! Command implementations. Each writes `report.json` and `series.csv`
//! (plus command-specific extras) into the run directory and reports
//! whether its inequality check passed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vlasov1d_core::experiments::{
    run_chaos, run_convergence, run_mollification, run_stability, CampaignParams,
};
use vlasov1d_core::io::{
    read_measure_csv, write_grid_csv, write_plan_csv, write_rows, write_trace_csv,
    write_trajectory_csv,
};
use vlasov1d_core::particles::{diagnostics_with, simulate_with};
use vlasov1d_core::vlasov_grid::{density_bound, solve};
use vlasov1d_core::{
    sample_initial, w1_exact, CauchyReport, GridParams, InitialDistribution, Integrator, KernelKind,
};

use crate::config::{Command, RunConfig};
use crate::output::{format_significant, run_dir, Plot, Series};

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

pub const SLOPE_RANGE: (f64, f64) = (0.7, 1.3);

#[derive(Debug)]
pub struct Outcome {
    pub pass: bool,
    pub dir: PathBuf,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub n: usize,
    pub t_final: f64,
    pub dt: f64,
    pub kernel: KernelKind,
    pub integrator: Integrator,
    pub samples: usize,
    pub momentum_initial: f64,
    pub momentum_final: f64,
    pub max_momentum_drift: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub max_relative_energy_drift: f64,
    /// Sample pairs with `|v_i(t) - v_i(s)| > |t - s| / 2 + dt`.
    pub lipschitz_violations: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub nx: usize,
    pub nv: usize,
    pub vmax: f64,
    pub dt: f64,
    pub t_final: f64,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub max_density: f64,
    /// Largest `||rho_t||_inf / (2 int g0 + ||f0||_inf t)` over the steps.
    pub max_bound_ratio: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifyReport {
    pub cauchy: CauchyReport,
    pub slope_range: (f64, f64),
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct W1Report {
    pub w1: f64,
    pub mu_atoms: usize,
    pub nu_atoms: usize,
    pub plan_entries: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub t: f64,
    pub w1: f64,
    pub a: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosRow {
    pub t: f64,
    pub mean_w1: f64,
    pub ci95: f64,
    pub a: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifyRow {
    pub eps: f64,
    pub eps_prime: f64,
    pub coupled_distance: f64,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BoxError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_svg(dir: &Path, plot: Plot) -> Result<(), BoxError> {
    std::fs::write(dir.join("plot.svg"), plot.to_svg())?;
    Ok(())
}

fn f0_of(cfg: &RunConfig) -> Result<InitialDistribution, BoxError> {
    let spec = cfg
        .initial_distribution
        .as_ref()
        .ok_or("initial_distribution missing")?;
    Ok(spec.build()?)
}

fn campaign(cfg: &RunConfig) -> CampaignParams {
    CampaignParams {
        t_final: cfg.t_final.unwrap_or_default(),
        dt: cfg.dt,
        grid: GridParams {
            nx: cfg.nx,
            nv: cfg.nv,
            vmax: cfg.vmax.unwrap_or_default(),
            dt: cfg.grid_dt,
        },
        w1_atoms: cfg.w1_atoms,
        sample_interval: cfg.sample_interval,
        margin: cfg.margin,
        sampling: cfg.sampling,
    }
}

/// Runs `cfg`, writing outputs under `out/<config-hash>/`. Relative measure
/// paths are resolved against `base`.
pub fn execute(
    cfg: &RunConfig,
    base: &Path,
    out: &Path,
    emit_svg: bool,
) -> Result<Outcome, BoxError> {
    let dir = run_dir(out, cfg)?;
    let (pass, summary) = match cfg.command {
        Command::Simulate => simulate_cmd(cfg, &dir, emit_svg)?,
        Command::Solve => solve_cmd(cfg, &dir, emit_svg)?,
        Command::Stability => stability_cmd(cfg, &dir, emit_svg)?,
        Command::Chaos => chaos_cmd(cfg, &dir, emit_svg)?,
        Command::Convergence => convergence_cmd(cfg, &dir, emit_svg)?,
        Command::Mollify => mollify_cmd(cfg, &dir, emit_svg)?,
        Command::W1 => w1_cmd(cfg, base, &dir)?,
    };
    Ok(Outcome { pass, dir, summary })
}

fn simulate_cmd(cfg: &RunConfig, dir: &Path, emit_svg: bool) -> Result<(bool, String), BoxError> {
    let f0 = f0_of(cfg)?;
    let n = cfg.n.ok_or("n missing")?;
    let t_final = cfg.t_final.ok_or("t_final missing")?;
    let initial = sample_initial(&f0, n, cfg.seed, cfg.sampling)?;
    let rec = simulate_with(
        &initial,
        t_final,
        cfg.dt,
        cfg.kernel,
        cfg.sample_every,
        cfg.integrator,
    )?;
    write_trajectory_csv(&dir.join("series.csv"), &rec)?;

    let diags: Vec<_> = rec
        .states
        .iter()
        .map(|s| diagnostics_with(s, cfg.kernel))
        .collect();
    let (d0, d1) = (diags[0], diags[diags.len() - 1]);
    let max_momentum_drift = diags
        .iter()
        .map(|d| (d.momentum - d0.momentum).abs())
        .fold(0.0, f64::max);
    let scale = d0.energy.abs().max(f64::MIN_POSITIVE);
    let max_relative_energy_drift = diags
        .iter()
        .map(|d| (d.energy - d0.energy).abs() / scale)
        .fold(0.0, f64::max);
    let mut lipschitz_violations = 0;
    for (a, sa) in rec.states.iter().enumerate() {
        for sb in &rec.states[a + 1..] {
            let budget = 0.5 * (sb.time() - sa.time()).abs() + cfg.dt;
            lipschitz_violations += sa
                .velocities()
                .iter()
                .zip(sb.velocities())
                .filter(|(u, w)| (*u - *w).abs() > budget)
                .count();
        }
    }
    let report = SimulateReport {
        n,
        t_final,
        dt: cfg.dt,
        kernel: cfg.kernel,
        integrator: cfg.integrator,
        samples: rec.states.len(),
        momentum_initial: d0.momentum,
        momentum_final: d1.momentum,
        max_momentum_drift,
        energy_initial: d0.energy,
        energy_final: d1.energy,
        max_relative_energy_drift,
        lipschitz_violations,
        pass: lipschitz_violations == 0,
    };
    write_json(&dir.join("report.json"), &report)?;
    if emit_svg {
        write_svg(
            dir,
            Plot {
                title: "energy and momentum".into(),
                x_label: "t".into(),
                y_label: "value".into(),
                log_x: false,
                log_y: false,
                series: vec![
                    Series {
                        name: "energy".into(),
                        points: rec
                            .sample_times
                            .iter()
                            .zip(&diags)
                            .map(|(t, d)| (*t, d.energy))
                            .collect(),
                    },
                    Series {
                        name: "momentum".into(),
                        points: rec
                            .sample_times
                            .iter()
                            .zip(&diags)
                            .map(|(t, d)| (*t, d.momentum))
                            .collect(),
                    },
                ],
            },
        )?;
    }
    Ok((
        report.pass,
        format!(
            "simulate: {} samples, relative energy drift {:.3e}, {} Lipschitz violations",
            report.samples, max_relative_energy_drift, lipschitz_violations
        ),
    ))
}

fn solve_cmd(cfg: &RunConfig, dir: &Path, emit_svg: bool) -> Result<(bool, String), BoxError> {
    let f0 = f0_of(cfg)?;
    let t_final = cfg.t_final.ok_or("t_final missing")?;
    let params = campaign(cfg).grid;
    let steps = (t_final / params.dt + 1e-9).floor() as usize;
    let sol = solve(&f0, params, t_final, steps.max(1))?;
    write_trace_csv(&dir.join("series.csv"), &sol.trace)?;
    let last = sol.snapshots.last().ok_or("solver produced no snapshot")?;
    write_grid_csv(&dir.join("grid.csv"), last)?;
    let mut max_bound_ratio: f64 = 0.0;
    let mut bounds = Vec::with_capacity(sol.trace.len());
    for (&t, &r) in sol.trace.times.iter().zip(&sol.trace.sup_norms) {
        let b = density_bound(&f0, t)?;
        bounds.push((t, b));
        max_bound_ratio = max_bound_ratio.max(r / b);
    }
    let report = SolveReport {
        nx: params.nx,
        nv: params.nv,
        vmax: params.vmax,
        dt: params.dt,
        t_final,
        mass_initial: sol.snapshots[0].mass(),
        mass_final: last.mass(),
        max_density: sol.trace.max_sup_norm(),
        max_bound_ratio,
        margin: cfg.margin,
        pass: max_bound_ratio <= 1.0 + cfg.margin,
    };
    write_json(&dir.join("report.json"), &report)?;
    if emit_svg {
        write_svg(
            dir,
            Plot {
                title: "spatial density sup-norm".into(),
                x_label: "t".into(),
                y_label: "sup rho".into(),
                log_x: false,
                log_y: false,
                series: vec![
                    Series {
                        name: "sup rho".into(),
                        points: sol
                            .trace
                            .times
                            .iter()
                            .copied()
                            .zip(sol.trace.sup_norms.iter().copied())
                            .collect(),
                    },
                    Series {
                        name: "bound".into(),
                        points: bounds,
                    },
                ],
            },
        )?;
    }
    Ok((
        report.pass,
        format!(
            "solve: max density {:.6}, max bound ratio {:.4}",
            report.max_density, max_bound_ratio
        ),
    ))
}

fn w1_vs_bound_plot(title: &str, times: &[f64], w1: &[f64], bound: &[f64]) -> Plot {
    Plot {
        title: title.into(),
        x_label: "t".into(),
        y_label: "W1".into(),
        log_x: false,
        log_y: true,
        series: vec![
            Series {
                name: "W1".into(),
                points: times.iter().copied().zip(w1.iter().copied()).collect(),
            },
            Series {
                name: "bound".into(),
                points: times.iter().copied().zip(bound.iter().copied()).collect(),
            },
        ],
    }
}

fn stability_cmd(cfg: &RunConfig, dir: &Path, emit_svg: bool) -> Result<(bool, String), BoxError> {
    let f0 = f0_of(cfg)?;
    let n = cfg.n.ok_or("n missing")?;
    let r = run_stability(&f0, n, &campaign(cfg), cfg.seed)?;
    write_json(&dir.join("report.json"), &r)?;
    let rows = (0..r.times.len()).map(|k| StabilityRow {
        t: r.times[k],
        w1: r.w1[k],
        a: r.a_values[k],
        bound: r.bound[k],
        ratio: r.ratio[k],
    });
    write_rows(&dir.join("series.csv"), rows)?;
    if emit_svg {
        write_svg(
            dir,
            w1_vs_bound_plot("weak-strong stability", &r.times, &r.w1, &r.bound),
        )?;
    }
    let worst = r.ratio.iter().copied().fold(0.0, f64::max);
    Ok((
        r.pass,
        format!("stability: max ratio {worst:.4} (margin {})", r.margin),
    ))
}

fn chaos_cmd(cfg: &RunConfig, dir: &Path, emit_svg: bool) -> Result<(bool, String), BoxError> {
    let f0 = f0_of(cfg)?;
    let n = cfg.n.ok_or("n missing")?;
    let r = run_chaos(&f0, n, &campaign(cfg), cfg.seeds, cfg.seed)?;
    write_json(&dir.join("report.json"), &r)?;
    let rows = (0..r.times.len()).map(|k| ChaosRow {
        t: r.times[k],
        mean_w1: r.mean_w1[k],
        ci95: r.ci95[k],
        a: r.a_values[k],
        bound: r.bound[k],
    });
    write_rows(&dir.join("series.csv"), rows)?;
    if emit_svg {
        write_svg(
            dir,
            w1_vs_bound_plot("propagation of chaos", &r.times, &r.mean_w1, &r.bound),
        )?;
    }
    let worst = r
        .mean_w1
        .iter()
        .zip(&r.bound)
        .map(|(m, b)| m / b)
        .fold(0.0, f64::max);
    Ok((
        r.pass,
        format!("chaos: {} seeds, max mean/bound {worst:.4}", r.seeds),
    ))
}

fn convergence_cmd(
    cfg: &RunConfig,
    dir: &Path,
    emit_svg: bool,
) -> Result<(bool, String), BoxError> {
    let f0 = f0_of(cfg)?;
    let r = run_convergence(
        &f0,
        &cfg.n_list,
        &cfg.t_snapshots,
        &campaign(cfg),
        cfg.replicates,
        cfg.seed,
    )?;
    write_json(&dir.join("report.json"), &r)?;
    write_rows(&dir.join("series.csv"), r.rows.iter())?;
    if emit_svg {
        let series = cfg
            .t_snapshots
            .iter()
            .map(|&t| Series {
                name: format!("t = {t}"),
                points: r
                    .rows
                    .iter()
                    .filter(|row| row.t == t)
                    .map(|row| (row.n as f64, row.w1))
                    .collect(),
            })
            .collect();
        write_svg(
            dir,
            Plot {
                title: "W1 to the grid solution".into(),
                x_label: "N".into(),
                y_label: "mean W1".into(),
                log_x: true,
                log_y: true,
                series,
            },
        )?;
    }
    Ok((
        r.pass,
        format!("convergence: inversions per time {:?}", r.inversions),
    ))
}

fn mollify_cmd(cfg: &RunConfig, dir: &Path, emit_svg: bool) -> Result<(bool, String), BoxError> {
    let f0 = f0_of(cfg)?;
    let n = cfg.n.ok_or("n missing")?;
    let t_final = cfg.t_final.ok_or("t_final missing")?;
    let c = run_mollification(
        &f0,
        n,
        t_final,
        cfg.dt,
        &cfg.eps_list,
        cfg.sample_interval,
        cfg.sampling,
        cfg.seed,
    )?;
    let pass = (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&c.fitted_slope);
    let rows: Vec<MollifyRow> = c
        .eps_pairs
        .iter()
        .zip(&c.coupled_distance)
        .map(|(&(eps, eps_prime), &coupled_distance)| MollifyRow {
            eps,
            eps_prime,
            coupled_distance,
        })
        .collect();
    write_rows(&dir.join("series.csv"), rows.iter())?;
    if emit_svg {
        write_svg(
            dir,
            Plot {
                title: "coupled distance of mollified runs".into(),
                x_label: "max(eps, eps')".into(),
                y_label: "distance".into(),
                log_x: true,
                log_y: true,
                series: vec![Series {
                    name: format!("slope {:.3}", c.fitted_slope),
                    points: rows
                        .iter()
                        .map(|r| (r.eps.max(r.eps_prime), r.coupled_distance))
                        .collect(),
                }],
            },
        )?;
    }
    let summary = format!("mollify: fitted slope {:.4}", c.fitted_slope);
    let report = MollifyReport {
        cauchy: c,
        slope_range: SLOPE_RANGE,
        pass,
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok((pass, summary))
}

fn w1_cmd(cfg: &RunConfig, base: &Path, dir: &Path) -> Result<(bool, String), BoxError> {
    let resolve = |p: &Option<PathBuf>| -> Result<PathBuf, BoxError> {
        let p = p.as_ref().ok_or("measure path missing")?;
        Ok(if p.is_absolute() {
            p.clone()
        } else {
            base.join(p)
        })
    };
    let mu = read_measure_csv(&resolve(&cfg.mu)?)?;
    let nu = read_measure_csv(&resolve(&cfg.nu)?)?;
    let (w, plan) = w1_exact(&mu, &nu)?;
    write_plan_csv(&dir.join("series.csv"), &plan, &mu, &nu)?;
    let report = W1Report {
        w1: w,
        mu_atoms: mu.len(),
        nu_atoms: nu.len(),
        plan_entries: plan.entries.len(),
    };
    write_json(&dir.join("report.json"), &report)?;
    Ok((true, format_significant(w, 12)))
}
