//! Verification campaigns comparing particle runs with the grid solution:
//! weak-strong stability, propagation of chaos, convergence in N and the
//! Cauchy property of mollified runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::phase_distance;
use crate::kernel::KernelKind;
use crate::measures::{sample_initial, DiscreteMeasure, InitialDistribution, Sampling};
use crate::particles::{simulate, ParticleState};
use crate::rng::replica_seed;
use crate::vlasov_grid::{
    a_of_t, density_bound, grid_to_measure, solve, GridMeasureMode, GridParams, GridSolution,
};
use crate::wasserstein::{w1_exact, DEFAULT_COST_CAP};

/// Shared numerical setup of the grid-vs-particle campaigns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignParams {
    pub t_final: f64,
    /// Particle time step.
    pub dt: f64,
    pub grid: GridParams,
    /// Atoms of the reference sample drawn from each grid snapshot.
    pub w1_atoms: usize,
    /// Spacing of the comparison times; a multiple of both time steps.
    pub sample_interval: f64,
    pub margin: f64,
    pub sampling: Sampling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    pub w1: Vec<f64>,
    pub w1_initial: f64,
    pub a_values: Vec<f64>,
    pub bound: Vec<f64>,
    pub ratio: Vec<f64>,
    pub margin: f64,
    pub pass: bool,
    pub n: usize,
    pub w1_atoms: usize,
    pub max_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosReport {
    pub seeds: usize,
    pub times: Vec<f64>,
    pub mean_w1: Vec<f64>,
    pub ci95: Vec<f64>,
    pub mean_w1_initial: f64,
    pub a_values: Vec<f64>,
    pub bound: Vec<f64>,
    pub margin: f64,
    pub pass: bool,
    pub n: usize,
    pub w1_atoms: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub t: f64,
    /// Mean over replicates.
    pub w1: f64,
    pub w1_std: f64,
    pub replicates: usize,
    pub w1_atoms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Increases of the mean W1 between consecutive N, per snapshot time.
    pub inversions: Vec<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub eps_pairs: Vec<(f64, f64)>,
    pub coupled_distance: Vec<f64>,
    pub fitted_slope: f64,
    pub n: usize,
    pub t_final: f64,
}

fn invalid(e: Error) -> Error {
    match e {
        Error::Precondition(m) => Error::InvalidExperiment(m),
        other => other,
    }
}

/// Steps of length `dt` per `interval`, which must be an integer.
fn stride(interval: f64, dt: f64, what: &str) -> Result<usize> {
    let r = interval / dt;
    let k = r.round();
    if k < 1.0 || (r - k).abs() > 1e-6 * r.max(1.0) {
        return Err(Error::InvalidExperiment(format!(
            "sample interval {interval} is not a multiple of the {what} time step {dt}"
        )));
    }
    Ok(k as usize)
}

impl CampaignParams {
    fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.t_final) || !positive(self.dt) || !positive(self.sample_interval) {
            return Err(Error::InvalidExperiment(
                "t_final, dt and sample_interval must be positive".into(),
            ));
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return Err(Error::InvalidExperiment(format!(
                "margin must be >= 0, got {}",
                self.margin
            )));
        }
        if self.w1_atoms == 0 {
            return Err(Error::InvalidExperiment("w1_atoms must be >= 1".into()));
        }
        stride(self.t_final, self.sample_interval, "sample interval")?;
        stride(self.sample_interval, self.dt, "particle")?;
        stride(self.sample_interval, self.grid.dt, "grid")?;
        Ok(())
    }

    /// Comparison times `0, h, 2h, ..., t_final`.
    pub fn sample_times(&self) -> Vec<f64> {
        let k = (self.t_final / self.sample_interval).round() as usize;
        (0..=k)
            .map(|i| self.t_final * i as f64 / k as f64)
            .collect()
    }

    /// Reference atoms used against `n` particles, reduced so the cost
    /// matrix stays within [`DEFAULT_COST_CAP`].
    pub fn effective_atoms(&self, n: usize) -> usize {
        self.w1_atoms.min(DEFAULT_COST_CAP / n.max(1)).max(1)
    }
}

/// Grid solution and reference measures at the comparison times.
#[derive(Debug, Clone)]
pub struct Reference {
    pub solution: GridSolution,
    pub times: Vec<f64>,
    pub a_values: Vec<f64>,
    measures: Vec<DiscreteMeasure>,
}

impl Reference {
    pub fn build(
        f0: &InitialDistribution,
        params: &CampaignParams,
        atoms: usize,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        density_bound(f0, 0.0).map_err(|e| Error::InvalidExperiment(e.to_string()))?;
        let every = stride(params.sample_interval, params.grid.dt, "grid")?;
        let solution = solve(f0, params.grid, params.t_final, every).map_err(invalid)?;
        let times = params.sample_times();
        let snaps = times
            .iter()
            .map(|&t| {
                solution
                    .snapshot_at(t)
                    .ok_or_else(|| Error::InvalidExperiment(format!("no grid snapshot at t = {t}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let measures = snaps
            .par_iter()
            .enumerate()
            .map(|(k, g)| {
                grid_to_measure(
                    g,
                    GridMeasureMode::Sample {
                        m: atoms,
                        seed: replica_seed(seed, k as u64),
                    },
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let a_values = times
            .iter()
            .map(|&t| a_of_t(&solution.trace, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Reference {
            solution,
            times,
            a_values,
            measures,
        })
    }

    pub fn measures(&self) -> &[DiscreteMeasure] {
        &self.measures
    }
}

/// W1 between the particle run from `initial` and the reference at every
/// comparison time.
fn particle_w1_series(
    initial: &ParticleState,
    params: &CampaignParams,
    reference: &Reference,
) -> Result<Vec<f64>> {
    let all: Vec<usize> = (0..reference.times.len()).collect();
    particle_w1_at(initial, params, reference, &all)
}

/// As [`particle_w1_series`], restricted to the comparison times `keep`.
fn particle_w1_at(
    initial: &ParticleState,
    params: &CampaignParams,
    reference: &Reference,
    keep: &[usize],
) -> Result<Vec<f64>> {
    let every = stride(params.sample_interval, params.dt, "particle")?;
    let rec = simulate(initial, params.t_final, params.dt, KernelKind::Exact, every)?;
    if rec.states.len() != reference.times.len() {
        return Err(Error::InvalidExperiment(format!(
            "particle run produced {} samples, expected {}",
            rec.states.len(),
            reference.times.len()
        )));
    }
    keep.par_iter()
        .map(|&k| {
            w1_exact(&rec.states[k].empirical_measure(), &reference.measures[k]).map(|(w, _)| w)
        })
        .collect()
}

pub fn run_stability(
    f0: &InitialDistribution,
    n: usize,
    params: &CampaignParams,
    seed: u64,
) -> Result<StabilityReport> {
    let atoms = params.effective_atoms(n);
    let reference = Reference::build(f0, params, atoms, seed)?;
    stability_against(f0, n, params, &reference, seed)
}

/// [`run_stability`] against a prebuilt reference.
pub fn stability_against(
    f0: &InitialDistribution,
    n: usize,
    params: &CampaignParams,
    reference: &Reference,
    seed: u64,
) -> Result<StabilityReport> {
    let initial = sample_initial(f0, n, seed, params.sampling)?;
    let w1 = particle_w1_series(&initial, params, reference)?;
    let w1_initial = w1[0];
    if w1_initial <= 0.0 {
        return Err(Error::InvalidExperiment(
            "initial W1 is zero; the stability ratio is undefined".into(),
        ));
    }
    let bound: Vec<f64> = reference
        .a_values
        .iter()
        .map(|a| a.exp() * w1_initial)
        .collect();
    let ratio: Vec<f64> = w1.iter().zip(&bound).map(|(w, b)| w / b).collect();
    let pass = ratio.iter().all(|r| *r <= 1.0 + params.margin);
    Ok(StabilityReport {
        times: reference.times.clone(),
        w1,
        w1_initial,
        a_values: reference.a_values.clone(),
        bound,
        ratio,
        margin: params.margin,
        pass,
        n,
        w1_atoms: reference.measures[0].len(),
        max_density: reference.solution.trace.max_sup_norm(),
    })
}

fn mean_and_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

/// Seed-averaged stability with IID initial samples (`params.sampling` is
/// ignored).
pub fn run_chaos(
    f0: &InitialDistribution,
    n: usize,
    params: &CampaignParams,
    seeds: usize,
    seed: u64,
) -> Result<ChaosReport> {
    if seeds < 2 {
        return Err(Error::InvalidExperiment(format!(
            "chaos needs at least 2 seeds, got {seeds}"
        )));
    }
    let params = CampaignParams {
        sampling: Sampling::Iid,
        ..*params
    };
    let reference = Reference::build(f0, &params, params.effective_atoms(n), seed)?;
    let runs = (0..seeds)
        .into_par_iter()
        .map(|r| {
            let initial = sample_initial(f0, n, replica_seed(seed, r as u64), Sampling::Iid)?;
            particle_w1_series(&initial, &params, &reference)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut mean_w1, mut ci95) = (Vec::new(), Vec::new());
    for k in 0..reference.times.len() {
        let col: Vec<f64> = runs.iter().map(|r| r[k]).collect();
        let (m, c) = mean_and_ci(&col);
        mean_w1.push(m);
        ci95.push(c);
    }
    let mean_w1_initial = mean_w1[0];
    let bound: Vec<f64> = reference
        .a_values
        .iter()
        .map(|a| a.exp() * mean_w1_initial)
        .collect();
    let pass = mean_w1
        .iter()
        .zip(&bound)
        .all(|(m, b)| *m <= b * (1.0 + params.margin));
    Ok(ChaosReport {
        seeds,
        times: reference.times.clone(),
        mean_w1,
        ci95,
        mean_w1_initial,
        a_values: reference.a_values.clone(),
        bound,
        margin: params.margin,
        pass,
        n,
        w1_atoms: reference.measures[0].len(),
    })
}

/// Number of consecutive increases in `values`.
pub fn count_inversions(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

/// Replicate-averaged W1 to the grid solution for every `n` in `n_list` at
/// the times in `t_snapshots` (each a comparison time of `params`). Passes
/// when every time shows at most one inversion.
pub fn run_convergence(
    f0: &InitialDistribution,
    n_list: &[usize],
    t_snapshots: &[f64],
    params: &CampaignParams,
    replicates: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::InvalidExperiment(
            "n_list must be nonempty, positive and strictly increasing".into(),
        ));
    }
    if replicates == 0 {
        return Err(Error::InvalidExperiment("replicates must be >= 1".into()));
    }
    // one reference sized for the largest n keeps all rows comparable
    let atoms = params.effective_atoms(*n_list.last().unwrap());
    let reference = Reference::build(f0, params, atoms, seed)?;
    let idx = t_snapshots
        .iter()
        .map(|&t| {
            reference
                .times
                .iter()
                .position(|s| (s - t).abs() < 1e-9)
                .ok_or_else(|| {
                    Error::InvalidExperiment(format!("t = {t} is not a comparison time"))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        let runs = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let s = replica_seed(seed, (ni * replicates + r) as u64);
                let initial = sample_initial(f0, n, s, params.sampling)?;
                particle_w1_at(&initial, params, &reference, &idx)
            })
            .collect::<Result<Vec<_>>>()?;
        for (ti, &t) in t_snapshots.iter().enumerate() {
            let col: Vec<f64> = runs.iter().map(|r| r[ti]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = if col.len() > 1 {
                col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64
            } else {
                0.0
            };
            rows.push(ConvergenceRow {
                n,
                t,
                w1: mean,
                w1_std: var.sqrt(),
                replicates,
                w1_atoms: atoms,
            });
        }
    }
    let inversions: Vec<usize> = (0..t_snapshots.len())
        .map(|ti| {
            let series: Vec<f64> = rows
                .iter()
                .skip(ti)
                .step_by(t_snapshots.len())
                .map(|r| r.w1)
                .collect();
            count_inversions(&series)
        })
        .collect();
    let pass = inversions.iter().all(|&c| c <= 1);
    Ok(ConvergenceReport {
        rows,
        inversions,
        pass,
    })
}

/// Sup over the shared sample times of the mean phase-space displacement
/// between two runs with identical particle indexing.
pub fn coupled_distance(a: &[ParticleState], b: &[ParticleState]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(sa, sb)| {
            let n = sa.len();
            (0..n)
                .map(|i| phase_distance(&sa.point(i), &sb.point(i)))
                .sum::<f64>()
                / n as f64
        })
        .fold(0.0, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs the mollified system for every `eps` from one shared initial sample
/// and measures consecutive-pair distances.
#[allow(clippy::too_many_arguments)]
pub fn run_mollification(
    f0: &InitialDistribution,
    n: usize,
    t_final: f64,
    dt: f64,
    eps_list: &[f64],
    sample_interval: f64,
    sampling: Sampling,
    seed: u64,
) -> Result<CauchyReport> {
    if eps_list.len() < 2 || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidExperiment(
            "eps_list needs at least two strictly decreasing values".into(),
        ));
    }
    for &e in eps_list {
        KernelKind::mollified(e).map_err(|err| Error::InvalidExperiment(err.to_string()))?;
    }
    stride(t_final, sample_interval, "sample interval")?;
    let every = stride(sample_interval, dt, "particle")?;
    let initial = sample_initial(f0, n, seed, sampling)?;
    let runs = eps_list
        .par_iter()
        .map(|&e| {
            simulate(
                &initial,
                t_final,
                dt,
                KernelKind::Mollified { epsilon: e },
                every,
            )
            .map(|r| r.states)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairs: Vec<((f64, f64), f64)> = eps_list
        .windows(2)
        .zip(runs.windows(2))
        .map(|(e, r)| ((e[0], e[1]), coupled_distance(&r[0], &r[1])))
        .collect();
    pairs.sort_by(|a, b| a.0 .0.max(a.0 .1).total_cmp(&b.0 .0.max(b.0 .1)));
    let scales: Vec<f64> = pairs.iter().map(|((a, b), _)| a.max(*b)).collect();
    let coupled: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let fitted_slope = if coupled.iter().all(|d| *d > 0.0) {
        log_log_slope(&scales, &coupled)
    } else {
        f64::NAN
    };
    Ok(CauchyReport {
        eps_pairs: pairs.into_iter().map(|p| p.0).collect(),
        coupled_distance: coupled,
        fitted_slope,
        n,
        t_final,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_params() -> CampaignParams {
        CampaignParams {
            t_final: 0.2,
            dt: 0.01,
            grid: GridParams {
                nx: 32,
                nv: 32,
                vmax: 1.0,
                dt: 0.05,
            },
            w1_atoms: 64,
            sample_interval: 0.1,
            margin: 0.1,
            sampling: Sampling::Stratified,
        }
    }

    #[test]
    fn stability_report_is_consistent_and_deterministic() {
        let f0 = InitialDistribution::uniform_box(0.5).unwrap();
        let p = uniform_params();
        let a = run_stability(&f0, 64, &p, 3).unwrap();
        let b = run_stability(&f0, 64, &p, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.times, vec![0.0, 0.1, 0.2]);
        assert_eq!(a.ratio[0], 1.0);
        for k in 0..a.times.len() {
            assert!((a.bound[k] - a.a_values[k].exp() * a.w1_initial).abs() < 1e-12);
            // constant density one: a(t) = (sqrt 2 + 8) t
            let expect = (2f64.sqrt() + 8.0) * a.times[k];
            assert!((a.a_values[k] - expect).abs() < 1e-9);
        }
        assert!(a.pass);
    }

    #[test]
    fn misaligned_interval_is_invalid_experiment() {
        let f0 = InitialDistribution::uniform_box(0.5).unwrap();
        let p = CampaignParams {
            sample_interval: 0.07,
            ..uniform_params()
        };
        assert!(matches!(
            run_stability(&f0, 16, &p, 0),
            Err(Error::InvalidExperiment(_))
        ));
        let p = CampaignParams {
            grid: GridParams {
                vmax: 0.4,
                ..uniform_params().grid
            },
            ..uniform_params()
        };
        assert!(matches!(
            run_stability(&f0, 16, &p, 0),
            Err(Error::InvalidExperiment(_))
        ));
    }

    #[test]
    fn chaos_bookkeeping() {
        let f0 = InitialDistribution::uniform_box(0.5).unwrap();
        let p = uniform_params();
        let r = run_chaos(&f0, 32, &p, 2, 9).unwrap();
        assert_eq!(r.mean_w1.len(), r.times.len());
        assert_eq!(r.ci95.len(), r.times.len());
        assert!(r.ci95.iter().all(|c| c.is_finite()));
        assert_eq!(r.mean_w1_initial, r.mean_w1[0]);
        assert!(run_chaos(&f0, 32, &p, 1, 9).is_err());
    }

    #[test]
    fn convergence_row_count() {
        let f0 = InitialDistribution::uniform_box(0.5).unwrap();
        let p = uniform_params();
        let r = run_convergence(&f0, &[16, 64], &[0.0, 0.2], &p, 2, 1).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert_eq!(r.inversions.len(), 2);
        assert!(run_convergence(&f0, &[64, 16], &[0.0], &p, 1, 1).is_err());
        assert!(run_convergence(&f0, &[16], &[0.05], &p, 1, 1).is_err());
    }

    #[test]
    fn identical_runs_have_zero_coupled_distance() {
        let f0 = InitialDistribution::truncated_maxwellian(0.5, 2.0).unwrap();
        let s = sample_initial(&f0, 40, 0, Sampling::Stratified).unwrap();
        let r = simulate(&s, 0.2, 0.01, KernelKind::Mollified { epsilon: 0.1 }, 5).unwrap();
        assert_eq!(coupled_distance(&r.states, &r.states), 0.0);
    }

    #[test]
    fn mollification_report_shape() {
        let f0 = InitialDistribution::truncated_maxwellian(0.5, 2.0).unwrap();
        let r = run_mollification(
            &f0,
            64,
            0.2,
            0.01,
            &[0.1, 0.05, 0.025],
            0.1,
            Sampling::Stratified,
            4,
        )
        .unwrap();
        assert_eq!(r.eps_pairs, vec![(0.05, 0.025), (0.1, 0.05)]);
        assert!(r
            .coupled_distance
            .iter()
            .all(|d| *d >= 0.0 && *d <= 1.2 * 2.0));
        assert!(run_mollification(&f0, 8, 0.2, 0.01, &[0.05, 0.1], 0.1, Sampling::Iid, 0).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((log_log_slope(&x, &y) - 1.5).abs() < 1e-12);
        assert_eq!(count_inversions(&[3.0, 2.0, 2.5, 1.0]), 1);
    }
}
