//! CSV import and export for trajectories, measures, grids, density traces
//! and transport plans.
//!
//! Floats are written in shortest round-trip form, so re-reading a file
//! reproduces every value bit for bit.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PhasePoint;
use crate::measures::DiscreteMeasure;
use crate::particles::TrajectoryRecord;
use crate::vlasov_grid::{DensityTrace, PhaseGrid};
use crate::wasserstein::TransportPlan;

pub fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub i: usize,
    pub x: f64,
    pub v: f64,
}

/// Time-major, then particle index.
pub fn trajectory_rows(rec: &TrajectoryRecord) -> Vec<TrajectoryRow> {
    rec.states
        .iter()
        .flat_map(|s| {
            (0..s.len()).map(move |i| TrajectoryRow {
                t: s.time(),
                i,
                x: s.positions()[i].value(),
                v: s.velocities()[i],
            })
        })
        .collect()
}

pub fn write_trajectory_csv(path: &Path, rec: &TrajectoryRecord) -> Result<()> {
    write_rows(path, trajectory_rows(rec))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub x: f64,
    pub v: f64,
    pub w: f64,
}

pub fn write_measure_csv(path: &Path, mu: &DiscreteMeasure) -> Result<()> {
    write_rows(
        path,
        mu.iter().map(|(p, w)| MeasureRow {
            x: p.x.value(),
            v: p.v,
            w,
        }),
    )
}

pub fn read_measure_csv(path: &Path) -> Result<DiscreteMeasure> {
    let rows: Vec<MeasureRow> = read_rows(path)?;
    let atoms = rows
        .iter()
        .map(|r| PhasePoint::from_raw(r.x, r.v))
        .collect::<Result<Vec<_>>>()?;
    DiscreteMeasure::new(atoms, rows.iter().map(|r| r.w).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub x: f64,
    pub v: f64,
    pub f: f64,
}

pub fn write_grid_csv(path: &Path, grid: &PhaseGrid) -> Result<()> {
    let rows = (0..grid.nx()).flat_map(|i| {
        (0..grid.nv()).map(move |j| GridRow {
            x: grid.x_center(i),
            v: grid.v_center(j),
            f: grid.at(i, j),
        })
    });
    write_rows(path, rows)
}

/// Reads a grid written by [`write_grid_csv`]; the layout is recovered from
/// the cell centers.
pub fn read_grid_csv(path: &Path, time: f64) -> Result<PhaseGrid> {
    let rows: Vec<GridRow> = read_rows(path)?;
    let first_x = rows
        .first()
        .ok_or_else(|| Error::InvalidInput("empty grid file".into()))?
        .x;
    let nv = rows.iter().take_while(|r| r.x == first_x).count();
    if nv < 2 || rows.len() % nv != 0 {
        return Err(Error::InvalidInput(format!(
            "grid file with {} rows is not a rectangular x-major table",
            rows.len()
        )));
    }
    let nx = rows.len() / nv;
    let span = rows[nv - 1].v - rows[0].v;
    let vmax = span * nv as f64 / (2.0 * (nv - 1) as f64);
    PhaseGrid::new(nx, nv, vmax, rows.iter().map(|r| r.f).collect(), time)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub rho_sup: f64,
}

pub fn write_trace_csv(path: &Path, trace: &DensityTrace) -> Result<()> {
    write_rows(
        path,
        trace
            .times
            .iter()
            .zip(&trace.sup_norms)
            .map(|(&t, &rho_sup)| TraceRow { t, rho_sup }),
    )
}

pub fn read_trace_csv(path: &Path) -> Result<DensityTrace> {
    let rows: Vec<TraceRow> = read_rows(path)?;
    DensityTrace::new(
        rows.iter().map(|r| r.t).collect(),
        rows.iter().map(|r| r.rho_sup).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanRow {
    pub src: usize,
    pub dst: usize,
    pub mass: f64,
    pub cost_contrib: f64,
}

pub fn write_plan_csv(
    path: &Path,
    plan: &TransportPlan,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<()> {
    write_rows(
        path,
        plan.cost_contributions(mu, nu)
            .into_iter()
            .map(|(src, dst, mass, cost_contrib)| PlanRow {
                src,
                dst,
                mass,
                cost_contrib,
            }),
    )
}

pub fn read_plan_csv(path: &Path) -> Result<Vec<PlanRow>> {
    read_rows(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelKind;
    use crate::measures::{sample_initial, InitialDistribution, Sampling};
    use crate::particles::simulate;
    use crate::vlasov_grid::{solve, GridParams};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("vlasov1d-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn csv_files_round_trip_bit_exactly() {
        let f0 = InitialDistribution::truncated_maxwellian(0.6, 2.0).unwrap();
        let s = sample_initial(&f0, 37, 1, Sampling::Iid).unwrap();
        let rec = simulate(&s, 0.3, 0.01, KernelKind::Exact, 10).unwrap();

        let p = tmp("traj.csv");
        write_trajectory_csv(&p, &rec).unwrap();
        let back: Vec<TrajectoryRow> = read_rows(&p).unwrap();
        assert_eq!(back, trajectory_rows(&rec));
        let header = std::fs::read_to_string(&p).unwrap();
        assert!(header.starts_with("t,i,x,v\n"));

        let mu = s.empirical_measure();
        let p = tmp("mu.csv");
        write_measure_csv(&p, &mu).unwrap();
        assert_eq!(read_measure_csv(&p).unwrap(), mu);

        let params = GridParams {
            nx: 16,
            nv: 24,
            vmax: 2.5,
            dt: 0.05,
        };
        let sol = solve(&f0, params, 0.2, 2).unwrap();
        let g = sol.snapshots.last().unwrap();
        let p = tmp("grid.csv");
        write_grid_csv(&p, g).unwrap();
        let back = read_grid_csv(&p, g.time()).unwrap();
        assert_eq!(back.values(), g.values());
        assert_eq!((back.nx(), back.nv()), (16, 24));
        assert!((back.vmax() - 2.5).abs() < 1e-12);

        let p = tmp("trace.csv");
        write_trace_csv(&p, &sol.trace).unwrap();
        assert_eq!(read_trace_csv(&p).unwrap(), sol.trace);

        let nu = sample_initial(&f0, 37, 2, Sampling::Iid)
            .unwrap()
            .empirical_measure();
        let (_, plan) = crate::wasserstein::w1_exact(&mu, &nu).unwrap();
        let p = tmp("plan.csv");
        write_plan_csv(&p, &plan, &mu, &nu).unwrap();
        let rows = read_plan_csv(&p).unwrap();
        assert_eq!(rows.len(), plan.entries.len());
        for (r, e) in rows.iter().zip(&plan.entries) {
            assert_eq!((r.src, r.dst, r.mass), (e.src, e.dst, e.mass));
        }
    }
}
