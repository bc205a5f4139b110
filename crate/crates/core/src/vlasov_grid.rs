//! Phase-space grid solver for the Vlasov-Poisson equation
//! `d_t f + v d_x f + e d_v f = 0`, `e = -W' * rho`.
//!
//! Time stepping is Strang splitting (half x-advection, full v-advection,
//! half x-advection) with backward semi-Lagrangian transport and four-point
//! Lagrange interpolation. Velocities are truncated at `|v| = vmax` with zero
//! inflow; the force is bounded by 1/2, so a support that starts inside
//! `vmax - t/2` stays inside the box up to time `t`. Interpolation
//! undershoots are clipped to zero and the mass is renormalized after every
//! step.

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PhasePoint;
use crate::kernel::exact_kernel_sums;
use crate::measures::{systematic_indices, DiscreteMeasure, InitialDistribution};
use crate::rng::{stream_rng, Purpose};

/// Admissible deviation of the grid mass from one.
pub const MASS_TOL: f64 = 1e-6;

/// Cell-averaged phase density on `T x [-vmax, vmax]`, stored x-major
/// (`values[ix * nv + jv]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    nx: usize,
    nv: usize,
    vmax: f64,
    values: Vec<f64>,
    time: f64,
}

impl PhaseGrid {
    pub fn new(nx: usize, nv: usize, vmax: f64, values: Vec<f64>, time: f64) -> Result<Self> {
        if nx < 4 || nv < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 4 cells per direction, got {nx} x {nv}"
            )));
        }
        if !(vmax.is_finite() && vmax > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "vmax must be > 0, got {vmax}"
            )));
        }
        if values.len() != nx * nv {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {nx} x {nv} grid",
                values.len()
            )));
        }
        if values.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(Error::InvalidArgument(
                "grid values must be finite and nonnegative".into(),
            ));
        }
        Ok(PhaseGrid {
            nx,
            nv,
            vmax,
            values,
            time,
        })
    }

    /// Exact cell averages of `f0`, renormalized to unit mass.
    pub fn from_distribution(
        f0: &InitialDistribution,
        nx: usize,
        nv: usize,
        vmax: f64,
    ) -> Result<Self> {
        let mut grid = PhaseGrid::new(nx, nv, vmax, vec![0.0; nx * nv], 0.0)?;
        let (dx, dv) = (grid.dx(), grid.dv());
        for i in 0..nx {
            let x0 = -0.5 + i as f64 * dx;
            for j in 0..nv {
                let v0 = -vmax + j as f64 * dv;
                grid.values[i * nv + j] = f0.rect_mass(x0, x0 + dx, v0, v0 + dv) / (dx * dv);
            }
        }
        let mass = grid.mass();
        if mass <= 0.0 {
            return Err(Error::InvalidInput(
                "initial density has no mass inside the velocity box".into(),
            ));
        }
        grid.scale(1.0 / mass);
        Ok(grid)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn vmax(&self) -> f64 {
        self.vmax
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.vmax / self.nv as f64
    }

    pub fn x_center(&self, i: usize) -> f64 {
        -0.5 + (i as f64 + 0.5) * self.dx()
    }

    pub fn v_center(&self, j: usize) -> f64 {
        -self.vmax + (j as f64 + 0.5) * self.dv()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nv + j]
    }

    /// `sum f dx dv`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx() * self.dv()
    }

    /// Mass on `{|v| > c}`, counting a cell when its center lies outside.
    pub fn v_tail_mass(&self, c: f64) -> f64 {
        let cell = self.dx() * self.dv();
        (0..self.nv)
            .filter(|&j| self.v_center(j).abs() > c)
            .map(|j| (0..self.nx).map(|i| self.at(i, j)).sum::<f64>() * cell)
            .sum()
    }

    fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|f| *f *= s);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub rho: Vec<f64>,
    pub sup_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    pub e: Vec<f64>,
}

/// Sup norm of the spatial density over time.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityTrace {
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
}

impl DensityTrace {
    pub fn new(times: Vec<f64>, sup_norms: Vec<f64>) -> Result<Self> {
        if times.len() != sup_norms.len() || times.is_empty() {
            return Err(Error::InvalidInput(
                "density trace needs matching, nonempty columns".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "density trace times must be strictly increasing".into(),
            ));
        }
        if sup_norms.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidInput(
                "density sup norms must be finite and nonnegative".into(),
            ));
        }
        Ok(DensityTrace { times, sup_norms })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn max_sup_norm(&self) -> f64 {
        self.sup_norms.iter().copied().fold(0.0, f64::max)
    }
}

/// `rho_i = sum_j f_ij dv` (midpoint rule in v).
pub fn density(grid: &PhaseGrid) -> DensityProfile {
    let dv = grid.dv();
    let rho: Vec<f64> = grid
        .values
        .chunks(grid.nv)
        .map(|row| row.iter().sum::<f64>() * dv)
        .collect();
    let sup_norm = rho.iter().copied().fold(0.0, f64::max);
    DensityProfile { rho, sup_norm }
}

/// `e_i = -sum_k W'(x_i - x_k) rho_k dx` on cell centers, via the sorted
/// kernel sum. The result is shifted to zero mean.
pub fn field(rho: &DensityProfile) -> Result<FieldProfile> {
    let nx = rho.rho.len();
    if nx == 0 {
        return Err(Error::Precondition("empty density profile".into()));
    }
    let mass = rho.rho.iter().sum::<f64>() / nx as f64;
    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::Precondition(format!(
            "field needs unit mass, density integrates to {mass}"
        )));
    }
    Ok(field_unchecked(&rho.rho))
}

fn field_unchecked(rho: &[f64]) -> FieldProfile {
    let nx = rho.len();
    let dx = 1.0 / nx as f64;
    let centers: Vec<f64> = (0..nx).map(|i| -0.5 + (i as f64 + 0.5) * dx).collect();
    let weights: Vec<f64> = rho.iter().map(|r| r * dx).collect();
    let mut e = exact_kernel_sums(&centers, Some(&weights));
    e.iter_mut().for_each(|s| *s = -*s);
    let mean = e.iter().sum::<f64>() / nx as f64;
    e.iter_mut().for_each(|s| *s -= mean);
    FieldProfile { e }
}

/// Four-point Lagrange stencil for evaluating at `i - shift` (in cells):
/// returns the offset of the leftmost point relative to `i` and the weights.
#[inline]
fn stencil(shift: f64) -> (isize, [f64; 4]) {
    let m = shift.floor();
    let beta = 1.0 - (shift - m);
    let b = beta;
    let w = [
        -b * (b - 1.0) * (b - 2.0) / 6.0,
        (b + 1.0) * (b - 1.0) * (b - 2.0) / 2.0,
        -(b + 1.0) * b * (b - 2.0) / 2.0,
        (b + 1.0) * b * (b - 1.0) / 6.0,
    ];
    (-(m as isize) - 2, w)
}

/// Free streaming over `tau`: row `v_j` moves by `v_j tau` in x (periodic).
pub fn advect_x(grid: &PhaseGrid, tau: f64) -> PhaseGrid {
    let (nx, nv) = (grid.nx, grid.nv);
    let dx = grid.dx();
    let stencils: Vec<(isize, [f64; 4])> = (0..nv)
        .map(|j| stencil(grid.v_center(j) * tau / dx))
        .collect();
    let mut out = vec![0.0; nx * nv];
    let nxi = nx as isize;
    for i in 0..nx {
        for (j, (off, w)) in stencils.iter().enumerate() {
            let base = i as isize + off;
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let src = (base + k as isize).rem_euclid(nxi) as usize;
                acc += wk * grid.values[src * nv + j];
            }
            out[i * nv + j] = acc;
        }
    }
    PhaseGrid {
        values: out,
        ..grid.clone()
    }
}

/// Acceleration over `tau`: column `x_i` moves by `e_i tau` in v, with zero
/// values entering through `|v| = vmax`.
pub fn advect_v(grid: &PhaseGrid, e: &[f64], tau: f64) -> PhaseGrid {
    let (nx, nv) = (grid.nx, grid.nv);
    let dv = grid.dv();
    let nvi = nv as isize;
    let mut out = vec![0.0; nx * nv];
    for i in 0..nx {
        let (off, w) = stencil(e[i] * tau / dv);
        let row = &grid.values[i * nv..(i + 1) * nv];
        for j in 0..nv {
            let base = j as isize + off;
            let mut acc = 0.0;
            for (k, wk) in w.iter().enumerate() {
                let src = base + k as isize;
                if (0..nvi).contains(&src) {
                    acc += wk * row[src as usize];
                }
            }
            out[i * nv + j] = acc;
        }
    }
    PhaseGrid {
        values: out,
        ..grid.clone()
    }
}

/// One Strang step; mass is restored to its value before the step.
pub fn step_strang(grid: &PhaseGrid, dt: f64) -> PhaseGrid {
    let mass_before = grid.mass();
    let half = advect_x(grid, 0.5 * dt);
    let e = field_unchecked(&density(&half).rho).e;
    let kicked = advect_v(&half, &e, dt);
    let mut next = advect_x(&kicked, 0.5 * dt);
    next.values.iter_mut().for_each(|f| *f = f.max(0.0));
    let mass_after = next.mass();
    if mass_after > 0.0 {
        next.scale(mass_before / mass_after);
    }
    next.time = grid.time + dt;
    next
}

/// Resolution and time step of a grid solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub nx: usize,
    pub nv: usize,
    pub vmax: f64,
    pub dt: f64,
}

impl GridParams {
    /// Smallest admissible `vmax` for `f0` up to `t_final`.
    pub fn required_vmax(f0: &InitialDistribution, t_final: f64) -> f64 {
        f0.v_support() + t_final / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    /// Grids at steps `0, s, 2s, ...` plus the final step, `s` the
    /// snapshot stride.
    pub snapshots: Vec<PhaseGrid>,
    /// `||rho_t||_inf` at every step, including `t = 0`.
    pub trace: DensityTrace,
}

impl GridSolution {
    pub fn snapshot_at(&self, t: f64) -> Option<&PhaseGrid> {
        self.snapshots.iter().find(|g| (g.time - t).abs() < 1e-9)
    }
}

/// Runs `floor(t_final / dt)` Strang steps from the cell averages of `f0`.
pub fn solve(
    f0: &InitialDistribution,
    params: GridParams,
    t_final: f64,
    snapshot_every: usize,
) -> Result<GridSolution> {
    let GridParams { nx, nv, vmax, dt } = params;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid dt must be > 0, got {dt}"
        )));
    }
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_final must be > 0, got {t_final}"
        )));
    }
    let outside = f0.tail_mass(vmax - t_final / 2.0);
    if outside >= 1e-6 {
        return Err(Error::Precondition(format!(
            "vmax = {vmax} leaves mass {outside:.3e} of f0 outside |v| <= vmax - t_final/2; \
             vmax must be at least {}",
            GridParams::required_vmax(f0, t_final)
        )));
    }
    let steps = (t_final / dt + 1e-9).floor() as usize;
    let stride = snapshot_every.max(1);
    let mut grid = PhaseGrid::from_distribution(f0, nx, nv, vmax)?;
    let mut snapshots = vec![grid.clone()];
    let mut times = Vec::with_capacity(steps + 1);
    let mut sups = Vec::with_capacity(steps + 1);
    times.push(0.0);
    sups.push(density(&grid).sup_norm);
    for k in 1..=steps {
        grid = step_strang(&grid, dt);
        grid.time = k as f64 * dt;
        times.push(grid.time);
        sups.push(density(&grid).sup_norm);
        if k % stride == 0 || k == steps {
            snapshots.push(grid.clone());
        }
    }
    Ok(GridSolution {
        snapshots,
        trace: DensityTrace::new(times, sups)?,
    })
}

/// `a(t) = sqrt(2) t + 8 int_0^t ||rho_s||_inf ds`, trapezoidal in time.
pub fn a_of_t(trace: &DensityTrace, t: f64) -> Result<f64> {
    let last = trace.last_time();
    if !(0.0..=last + 1e-9).contains(&t) || trace.is_empty() {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
            lo: 0.0,
            hi: last,
        });
    }
    let (ts, rs) = (&trace.times, &trace.sup_norms);
    let mut integral = 0.0;
    for k in 1..ts.len() {
        if ts[k - 1] >= t {
            break;
        }
        let (t0, t1) = (ts[k - 1], ts[k]);
        if t1 <= t {
            integral += 0.5 * (t1 - t0) * (rs[k - 1] + rs[k]);
        } else {
            let r_t = rs[k - 1] + (rs[k] - rs[k - 1]) * (t - t0) / (t1 - t0);
            integral += 0.5 * (t - t0) * (rs[k - 1] + r_t);
        }
    }
    Ok(std::f64::consts::SQRT_2 * t + 8.0 * integral)
}

/// `2 int_0^inf g0 + ||f0||_inf t`, the a priori bound on `||rho_t||_inf`.
pub fn density_bound(f0: &InitialDistribution, t: f64) -> Result<f64> {
    let g = f0.g0_integral();
    if !g.is_finite() {
        return Err(Error::InvalidInput("g0 envelope is not integrable".into()));
    }
    Ok(2.0 * g + f0.sup_norm() * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GridMeasureMode {
    /// One atom per nonzero cell at its center.
    CellAtoms,
    /// `m` equally weighted atoms, cells chosen by systematic resampling and
    /// positions uniform inside the chosen cell.
    Sample { m: usize, seed: u64 },
}

pub fn grid_to_measure(grid: &PhaseGrid, mode: GridMeasureMode) -> Result<DiscreteMeasure> {
    let cells = grid.nx * grid.nv;
    match mode {
        GridMeasureMode::CellAtoms => {
            let (atoms, weights): (Vec<_>, Vec<_>) = (0..cells)
                .filter(|&c| grid.values[c] > 0.0)
                .map(|c| {
                    let (i, j) = (c / grid.nv, c % grid.nv);
                    (
                        PhasePoint::from_raw(grid.x_center(i), grid.v_center(j)).unwrap(),
                        grid.values[c],
                    )
                })
                .unzip();
            DiscreteMeasure::normalized(atoms, weights)
        }
        GridMeasureMode::Sample { m, seed } => {
            if m == 0 {
                return Err(Error::InvalidArgument("sample size must be >= 1".into()));
            }
            if grid.values.iter().all(|f| *f == 0.0) {
                return Err(Error::InvalidInput("grid has zero mass".into()));
            }
            let mut rng = stream_rng(seed, Purpose::GridSample, 0);
            let picks = systematic_indices(&grid.values, m, &mut rng);
            let (dx, dv) = (grid.dx(), grid.dv());
            let atoms = picks
                .into_iter()
                .map(|c| {
                    let (i, j) = (c / grid.nv, c % grid.nv);
                    let x = -0.5 + (i as f64 + rng.random::<f64>()) * dx;
                    let v = -grid.vmax + (j as f64 + rng.random::<f64>()) * dv;
                    PhasePoint::from_raw(x, v).unwrap()
                })
                .collect();
            DiscreteMeasure::uniform(atoms)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from(nx: usize, nv: usize, vmax: f64, f: impl Fn(f64, f64) -> f64) -> PhaseGrid {
        let mut g = PhaseGrid::new(nx, nv, vmax, vec![0.0; nx * nv], 0.0).unwrap();
        for i in 0..nx {
            for j in 0..nv {
                let (x, v) = (g.x_center(i), g.v_center(j));
                g.values[i * nv + j] = f(x, v);
            }
        }
        g
    }

    #[test]
    fn density_examples() {
        let g = grid_from(8, 16, 1.0, |_, v| if v.abs() < 0.5 { 1.0 } else { 0.0 });
        let d = density(&g);
        assert!(d.rho.iter().all(|r| (r - 1.0).abs() < 1e-15));
        assert!((d.sup_norm - 1.0).abs() < 1e-15);

        let g = grid_from(8, 16, 1.0, |x, v| (1.0 + 0.5 * x) * (1.0 - v * v));
        let hint: f64 = (0..16).map(|j| 1.0 - g.v_center(j).powi(2)).sum::<f64>() * g.dv();
        for (i, r) in density(&g).rho.iter().enumerate() {
            assert!((r - (1.0 + 0.5 * g.x_center(i)) * hint).abs() < 1e-14);
        }

        let zero = grid_from(8, 8, 1.0, |_, _| 0.0);
        assert!(density(&zero).rho.iter().all(|r| *r == 0.0));
        assert_eq!(density(&zero).sup_norm, 0.0);
    }

    #[test]
    fn field_examples() {
        let flat = DensityProfile {
            rho: vec![1.0; 64],
            sup_norm: 1.0,
        };
        assert!(field(&flat).unwrap().e.iter().all(|e| e.abs() < 1e-14));

        // unit mass in cell 10 of 64: e(x) = -W'(x - x_10)
        let nx = 64;
        let mut rho = vec![0.0; nx];
        rho[10] = nx as f64;
        let e = field(&DensityProfile {
            rho,
            sup_norm: 64.0,
        })
        .unwrap()
        .e;
        let x = |i: usize| -0.5 + (i as f64 + 0.5) / nx as f64;
        for (i, ei) in e.iter().enumerate() {
            let d = crate::geometry::wrap_unchecked(x(i) - x(10));
            let expected = -crate::kernel::KernelKind::Exact.force(d);
            assert!((ei - expected).abs() < 1e-14, "i = {i}");
        }

        let bad = DensityProfile {
            rho: vec![2.0; 8],
            sup_norm: 2.0,
        };
        assert!(matches!(field(&bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn field_has_zero_mean() {
        let nx = 100;
        let rho: Vec<f64> = (0..nx)
            .map(|i| 1.0 + 0.7 * (7.0 * i as f64).sin() * (i as f64 / 13.0).cos())
            .collect();
        let mass: f64 = rho.iter().sum::<f64>() / nx as f64;
        let rho: Vec<f64> = rho.iter().map(|r| r / mass).collect();
        let e = field(&DensityProfile { rho, sup_norm: 0.0 }).unwrap().e;
        assert!(e.iter().sum::<f64>().abs() <= 1e-12);
    }

    #[test]
    fn uniform_state_is_stationary() {
        let f0 = InitialDistribution::uniform_box(0.5).unwrap();
        let mut g = PhaseGrid::from_distribution(&f0, 32, 64, 2.0).unwrap();
        let initial = g.clone();
        for _ in 0..20 {
            g = step_strang(&g, 0.05);
        }
        for (a, b) in g.values.iter().zip(&initial.values) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert!((g.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integer_shift_is_exact() {
        // dx = 1/16, v centers +-0.25, +-0.75, ...; v dt = 0.25 * 0.25 = dx
        let nx = 16;
        let g = grid_from(nx, 16, 4.0, |x, v| {
            if (-0.3..-0.1).contains(&x) && v.abs() < 1.0 {
                1.0 + v
            } else {
                0.0
            }
        });
        let moved = advect_x(&g, 0.25);
        for i in 0..nx {
            for j in 0..16 {
                let cells = (g.v_center(j) * 0.25 * nx as f64).round() as isize;
                let src = (i as isize - cells).rem_euclid(nx as isize) as usize;
                assert_eq!(moved.at(i, j), g.at(src, j), "({i}, {j})");
            }
        }
    }

    #[test]
    fn step_preserves_mass_and_positivity() {
        let f0 = InitialDistribution::table(
            crate::measures::TableGrid::perturbed_maxwellian(0.5, 2.0, 0.5, 1, 32, 32).unwrap(),
        )
        .unwrap();
        let mut g = PhaseGrid::from_distribution(&f0, 32, 48, 3.0).unwrap();
        for _ in 0..10 {
            let before = g.mass();
            g = step_strang(&g, 0.05);
            assert!((g.mass() - before).abs() < 1e-12);
            assert!(g.values.iter().all(|f| *f >= 0.0));
        }
    }

    #[test]
    fn solve_trace_length_and_precondition() {
        let f0 = InitialDistribution::uniform_box(0.5).unwrap();
        let params = GridParams {
            nx: 16,
            nv: 32,
            vmax: 2.0,
            dt: 0.1,
        };
        let sol = solve(&f0, params, 1.0, 5).unwrap();
        assert_eq!(sol.trace.len(), 11);
        assert_eq!(sol.snapshots.len(), 3);
        assert!(sol.trace.sup_norms.iter().all(|r| (r - 1.0).abs() < 1e-12));
        let sol = solve(&f0, GridParams { dt: 0.3, ..params }, 1.0, 1).unwrap();
        assert_eq!(sol.trace.len(), 4);

        let tight = GridParams {
            vmax: 0.8,
            ..params
        };
        match solve(&f0, tight, 1.0, 1) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("at least 1")),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn a_of_t_examples() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let trace = DensityTrace::new(times.clone(), vec![1.0; 11]).unwrap();
        assert!((a_of_t(&trace, 1.0).unwrap() - (2f64.sqrt() + 8.0)).abs() < 1e-12);
        assert_eq!(a_of_t(&trace, 0.0).unwrap(), 0.0);
        assert!((a_of_t(&trace, 0.55).unwrap() - 0.55 * (2f64.sqrt() + 8.0)).abs() < 1e-12);
        let c = 2.5;
        let trace = DensityTrace::new(times, vec![c; 11]).unwrap();
        assert!((a_of_t(&trace, 0.7).unwrap() - (2f64.sqrt() + 8.0 * c) * 0.7).abs() < 1e-12);
        assert!(matches!(a_of_t(&trace, 1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn a_of_t_integrates_linear_trace_exactly() {
        let times: Vec<f64> = (0..=4).map(|k| k as f64 * 0.5).collect();
        let sups: Vec<f64> = times.iter().map(|t| 1.0 + t).collect();
        let trace = DensityTrace::new(times, sups).unwrap();
        // int_0^1.25 (1 + s) ds = 1.25 + 1.25^2 / 2
        let expected = 2f64.sqrt() * 1.25 + 8.0 * (1.25 + 1.25 * 1.25 / 2.0);
        assert!((a_of_t(&trace, 1.25).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn density_bound_examples() {
        let f0 = InitialDistribution::uniform_box(0.5).unwrap();
        assert!((density_bound(&f0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((density_bound(&f0, 1.5).unwrap() - 2.5).abs() < 1e-15);

        // quadrature of the Maxwellian envelope as an independent route
        let (sigma, vcut) = (0.8, 3.0);
        let f0 = InitialDistribution::truncated_maxwellian(sigma, vcut).unwrap();
        let n = 100_000;
        let h = 4.0 / n as f64;
        let integral: f64 = (0..n)
            .map(|k| f0.g0_envelope((k as f64 + 0.5) * h) * h)
            .sum();
        let expected = 2.0 * integral + f0.sup_norm() * 0.7;
        assert!((density_bound(&f0, 0.7).unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn grid_measure_examples() {
        let mut g = grid_from(8, 8, 1.0, |_, _| 0.0);
        g.values[3 * 8 + 5] = 1.0;
        let m = grid_to_measure(&g, GridMeasureMode::CellAtoms).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.weights(), &[1.0]);
        assert!((m.atoms()[0].x.value() - g.x_center(3)).abs() < 1e-15);
        assert!((m.atoms()[0].v - g.v_center(5)).abs() < 1e-15);

        let s = grid_to_measure(&g, GridMeasureMode::Sample { m: 7, seed: 2 }).unwrap();
        assert_eq!(s.len(), 7);
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);

        g.values[6 * 8 + 1] = 1.0;
        let s = grid_to_measure(&g, GridMeasureMode::Sample { m: 2, seed: 9 }).unwrap();
        let mut cells: Vec<(usize, usize)> = s
            .atoms()
            .iter()
            .map(|p| {
                (
                    ((p.x.value() + 0.5) * 8.0).floor() as usize,
                    ((p.v + 1.0) / 0.25).floor() as usize,
                )
            })
            .collect();
        cells.sort();
        assert_eq!(cells, vec![(3, 5), (6, 1)]);
    }
}
