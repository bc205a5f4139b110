//! Discrete measures on `T x R` and analytic initial data.
//!
//! [`DiscreteMeasure`] is the common currency between particle states, grid
//! solutions and the Wasserstein solver. [`InitialDistribution`] wraps an
//! analytic phase-space density together with the quantities the density
//! bound needs: its sup norm, the envelope `g0`, and the first velocity moment.

use rand::seq::SliceRandom;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf, erf_inv};

use crate::error::{Error, Result};
use crate::geometry::{PhasePoint, TorusCoord};
use crate::particles::ParticleState;
use crate::rng::{stream_rng, Purpose};

/// Tolerance on the total mass of a [`DiscreteMeasure`].
pub const WEIGHT_TOL: f64 = 1e-12;

/// Weighted atoms on `T x R` with total mass one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<PhasePoint>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validates lengths, positivity and normalization.
    pub fn new(atoms: Vec<PhasePoint>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidInput("empty measure".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "weights must be positive and finite, found {w}"
            )));
        }
        if let Some(p) = atoms.iter().find(|p| !p.v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite velocity {}", p.v)));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidInput(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    /// Rescales positive weights to unit mass.
    pub fn normalized(atoms: Vec<PhasePoint>, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidInput(format!("total weight {total}")));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(atoms, weights)
    }

    /// Equal weights `1/n`.
    pub fn uniform(atoms: Vec<PhasePoint>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("empty measure".into()));
        }
        if let Some(p) = atoms.iter().find(|p| !p.v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite velocity {}", p.v)));
        }
        let n = atoms.len();
        Ok(DiscreteMeasure {
            atoms,
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn atoms(&self) -> &[PhasePoint] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `true` when every weight equals the first one exactly.
    pub fn has_equal_weights(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|&w| w == w0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PhasePoint, f64)> {
        self.atoms.iter().zip(self.weights.iter().copied())
    }

    /// Integral of `phi` against the measure.
    pub fn integrate<F: Fn(&PhasePoint) -> f64>(&self, phi: F) -> f64 {
        self.iter().map(|(p, w)| w * phi(p)).sum()
    }

    /// Same measure with every velocity shifted by `dv`.
    pub fn shift_velocities(&self, dv: f64) -> DiscreteMeasure {
        DiscreteMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|p| PhasePoint::new(p.x, p.v + dv))
                .collect(),
            weights: self.weights.clone(),
        }
    }
}

/// `sum_i w_i |v_i|`.
pub fn first_v_moment(mu: &DiscreteMeasure) -> f64 {
    mu.integrate(|p| p.v.abs())
}

/// Indices picked by systematic resampling: one uniform offset, then `m`
/// equally spaced points through the cumulative weights.
pub fn systematic_indices(weights: &[f64], m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    // keep the offset away from the cell edges so rounding in the
    // cumulative sums cannot shift a pick into a neighbouring atom
    let u0 = rng.random::<f64>().clamp(1e-9, 1.0 - 1e-9) / m as f64;
    let mut out = Vec::with_capacity(m);
    let mut cum = weights[0] / total;
    let mut idx = 0;
    for k in 0..m {
        let u = u0 + k as f64 / m as f64;
        while u > cum && idx + 1 < weights.len() {
            idx += 1;
            cum += weights[idx] / total;
        }
        out.push(idx);
    }
    out
}

/// `m` equally weighted atoms chosen by systematic resampling.
pub fn subsample(mu: &DiscreteMeasure, m: usize, seed: u64) -> Result<DiscreteMeasure> {
    if m == 0 {
        return Err(Error::InvalidArgument("subsample size must be >= 1".into()));
    }
    let mut rng = stream_rng(seed, Purpose::Subsample, 0);
    let picks = systematic_indices(mu.weights(), m, &mut rng);
    let atoms = picks.into_iter().map(|i| mu.atoms()[i]).collect();
    DiscreteMeasure::uniform(atoms)
}

/// How initial particle positions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    Iid,
    #[default]
    Stratified,
}

/// Piecewise-constant phase density on a regular `nx x nv` table covering
/// `T x [-vmax, vmax]`. Values are stored x-major (`values[ix * nv + jv]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableGrid {
    pub nx: usize,
    pub nv: usize,
    pub vmax: f64,
    pub values: Vec<f64>,
}

impl TableGrid {
    /// Tabulates `(1 + amplitude cos(2 pi mode x))` times a truncated
    /// Maxwellian by exact cell averages.
    pub fn perturbed_maxwellian(
        sigma: f64,
        vcut: f64,
        amplitude: f64,
        mode: u32,
        nx: usize,
        nv: usize,
    ) -> Result<TableGrid> {
        if !(0.0..1.0).contains(&amplitude) {
            return Err(Error::InvalidArgument(format!(
                "perturbation amplitude must lie in [0, 1), got {amplitude}"
            )));
        }
        if mode == 0 || nx == 0 || nv == 0 {
            return Err(Error::InvalidArgument(
                "mode, nx and nv must be positive".into(),
            ));
        }
        let maxwellian = Maxwellian::new(sigma, vcut)?;
        let dx = 1.0 / nx as f64;
        let dv = 2.0 * vcut / nv as f64;
        let k = 2.0 * std::f64::consts::PI * mode as f64;
        let mut values = Vec::with_capacity(nx * nv);
        for i in 0..nx {
            let x0 = -0.5 + i as f64 * dx;
            // cell average of the spatial factor
            let sx = 1.0 + amplitude * ((k * (x0 + dx)).sin() - (k * x0).sin()) / (k * dx);
            for j in 0..nv {
                let v0 = -vcut + j as f64 * dv;
                values.push(sx * maxwellian.mass(v0, v0 + dv) / dv);
            }
        }
        Ok(TableGrid {
            nx,
            nv,
            vmax: vcut,
            values,
        })
    }

    fn dx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    fn dv(&self) -> f64 {
        2.0 * self.vmax / self.nv as f64
    }
}

/// The analytic variants an [`InitialDistribution`] can be built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Uniform in `x`, uniform in `v` on `[-v_half_width, v_half_width]`.
    UniformBox {
        v_half_width: f64,
    },
    /// Uniform in `x`, Gaussian in `v` cut off at `|v| = vcut`.
    TruncatedMaxwellian {
        sigma: f64,
        vcut: f64,
    },
    TableGrid(TableGrid),
}

#[derive(Debug, Clone, Copy)]
struct Maxwellian {
    sigma: f64,
    vcut: f64,
    /// `erf(vcut / (sigma sqrt 2))`
    erf_cut: f64,
    norm: f64,
}

impl Maxwellian {
    fn new(sigma: f64, vcut: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0 && vcut.is_finite() && vcut > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "truncated Maxwellian needs sigma > 0 and vcut > 0, got ({sigma}, {vcut})"
            )));
        }
        let erf_cut = erf(vcut / (sigma * std::f64::consts::SQRT_2));
        let norm = sigma * (2.0 * std::f64::consts::PI).sqrt() * erf_cut;
        Ok(Maxwellian {
            sigma,
            vcut,
            erf_cut,
            norm,
        })
    }

    fn pdf(&self, v: f64) -> f64 {
        if v.abs() > self.vcut {
            0.0
        } else {
            (-v * v / (2.0 * self.sigma * self.sigma)).exp() / self.norm
        }
    }

    fn cdf(&self, v: f64) -> f64 {
        let v = v.clamp(-self.vcut, self.vcut);
        0.5 * (1.0 + erf(v / (self.sigma * std::f64::consts::SQRT_2)) / self.erf_cut)
    }

    fn mass(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)).max(0.0)
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        let y = ((2.0 * u - 1.0) * self.erf_cut).clamp(-1.0 + 1e-16, 1.0 - 1e-16);
        (self.sigma * std::f64::consts::SQRT_2 * erf_inv(y)).clamp(-self.vcut, self.vcut)
    }

    fn first_moment(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        2.0 * s2 * (1.0 - (-self.vcut * self.vcut / (2.0 * s2)).exp()) / self.norm
    }
}

/// Normalized table plus the cumulative sums the sampler walks.
#[derive(Debug, Clone)]
struct Table {
    grid: TableGrid,
    /// cumulative x-marginal mass, `nx` entries ending at 1
    x_cdf: Vec<f64>,
    /// per-x-cell cumulative v mass, normalized to end at 1
    v_cdf: Vec<f64>,
    /// `max_x f` per v cell
    column_max: Vec<f64>,
}

impl Table {
    fn new(mut grid: TableGrid) -> Result<Self> {
        if grid.nx == 0 || grid.nv == 0 || grid.values.len() != grid.nx * grid.nv {
            return Err(Error::InvalidInput(format!(
                "table of {} values does not match nx = {}, nv = {}",
                grid.values.len(),
                grid.nx,
                grid.nv
            )));
        }
        if !(grid.vmax.is_finite() && grid.vmax > 0.0) {
            return Err(Error::InvalidInput(format!("table vmax {}", grid.vmax)));
        }
        if grid.values.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(Error::InvalidInput(
                "table values must be finite and nonnegative".into(),
            ));
        }
        let cell = grid.dx() * grid.dv();
        let total: f64 = grid.values.iter().sum::<f64>() * cell;
        if total <= 0.0 {
            return Err(Error::InvalidInput("table has zero mass".into()));
        }
        grid.values.iter_mut().for_each(|f| *f /= total);

        let (nx, nv) = (grid.nx, grid.nv);
        let mut x_cdf = Vec::with_capacity(nx);
        let mut v_cdf = Vec::with_capacity(nx * nv);
        let mut acc = 0.0;
        for row in grid.values.chunks(nv) {
            let row_mass: f64 = row.iter().sum();
            acc += row_mass * cell;
            x_cdf.push(acc);
            let mut c = 0.0;
            for f in row {
                c += f;
                v_cdf.push(if row_mass > 0.0 { c / row_mass } else { 0.0 });
            }
        }
        let last = *x_cdf.last().unwrap();
        x_cdf.iter_mut().for_each(|c| *c /= last);
        let column_max = (0..nv)
            .map(|j| (0..nx).map(|i| grid.values[i * nv + j]).fold(0.0, f64::max))
            .collect();
        Ok(Table {
            grid,
            x_cdf,
            v_cdf,
            column_max,
        })
    }

    fn cell_of(&self, x: f64, v: f64) -> Option<(usize, usize)> {
        let g = &self.grid;
        if v < -g.vmax || v >= g.vmax {
            return None;
        }
        let i = (((x + 0.5) / g.dx()).floor() as usize).min(g.nx - 1);
        let j = (((v + g.vmax) / g.dv()).floor() as usize).min(g.nv - 1);
        Some((i, j))
    }

    /// `max(|a_j|, |b_j|)` for v cell `j`.
    fn column_reach(&self, j: usize) -> f64 {
        let g = &self.grid;
        let a = -g.vmax + j as f64 * g.dv();
        a.abs().max((a + g.dv()).abs())
    }

    fn g0(&self, v: f64) -> f64 {
        (0..self.grid.nv)
            .filter(|&j| v <= 0.0 || self.column_reach(j) > v)
            .map(|j| self.column_max[j])
            .fold(0.0, f64::max)
    }

    fn g0_integral(&self) -> f64 {
        // g0 is a step function with jumps at the column reaches
        let mut breaks: Vec<f64> = (0..self.grid.nv).map(|j| self.column_reach(j)).collect();
        breaks.push(0.0);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        breaks
            .windows(2)
            .map(|w| (w[1] - w[0]) * self.g0(0.5 * (w[0] + w[1])))
            .sum()
    }

    fn rect_mass(&self, x0: f64, x1: f64, v0: f64, v1: f64) -> f64 {
        let g = &self.grid;
        let (dx, dv) = (g.dx(), g.dv());
        let overlap = |a0: f64, a1: f64, b0: f64, b1: f64| (a1.min(b1) - a0.max(b0)).max(0.0);
        let i_lo = (((x0 + 0.5) / dx).floor().max(0.0)) as usize;
        let i_hi = ((((x1 + 0.5) / dx).ceil()) as usize).min(g.nx);
        let j_lo = (((v0 + g.vmax) / dv).floor().max(0.0)) as usize;
        let j_hi = ((((v1 + g.vmax) / dv).ceil().max(0.0)) as usize).min(g.nv);
        let mut m = 0.0;
        for i in i_lo..i_hi {
            let cx0 = -0.5 + i as f64 * dx;
            let ox = overlap(x0, x1, cx0, cx0 + dx);
            if ox == 0.0 {
                continue;
            }
            for j in j_lo..j_hi {
                let cv0 = -g.vmax + j as f64 * dv;
                m += g.values[i * g.nv + j] * ox * overlap(v0, v1, cv0, cv0 + dv);
            }
        }
        m
    }

    fn sample(&self, ux: f64, uv: f64) -> (f64, f64) {
        let g = &self.grid;
        let i = self.x_cdf.partition_point(|&c| c < ux).min(g.nx - 1);
        let lo = if i == 0 { 0.0 } else { self.x_cdf[i - 1] };
        let frac = if self.x_cdf[i] > lo {
            ((ux - lo) / (self.x_cdf[i] - lo)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        let x = -0.5 + (i as f64 + frac) * g.dx();
        let row = &self.v_cdf[i * g.nv..(i + 1) * g.nv];
        let j = row.partition_point(|&c| c < uv).min(g.nv - 1);
        let lo = if j == 0 { 0.0 } else { row[j - 1] };
        let frac = if row[j] > lo {
            ((uv - lo) / (row[j] - lo)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        let v = -g.vmax + (j as f64 + frac) * g.dv();
        (x, v)
    }
}

#[derive(Debug, Clone)]
enum Shape {
    UniformBox { h: f64 },
    Maxwellian(Maxwellian),
    Table(Box<Table>),
}

/// Validated initial datum `f0` with cached sup norm, first velocity moment
/// and envelope integral.
#[derive(Debug, Clone)]
pub struct InitialDistribution {
    spec: DistributionSpec,
    shape: Shape,
    sup_norm: f64,
    first_v_moment: f64,
    g0_integral: f64,
}

impl InitialDistribution {
    pub fn uniform_box(v_half_width: f64) -> Result<Self> {
        Self::new(DistributionSpec::UniformBox { v_half_width })
    }

    pub fn truncated_maxwellian(sigma: f64, vcut: f64) -> Result<Self> {
        Self::new(DistributionSpec::TruncatedMaxwellian { sigma, vcut })
    }

    pub fn table(grid: TableGrid) -> Result<Self> {
        Self::new(DistributionSpec::TableGrid(grid))
    }

    pub fn new(spec: DistributionSpec) -> Result<Self> {
        let shape = match &spec {
            DistributionSpec::UniformBox { v_half_width: h } => {
                if !(h.is_finite() && *h > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "uniform box needs v_half_width > 0, got {h}"
                    )));
                }
                Shape::UniformBox { h: *h }
            }
            DistributionSpec::TruncatedMaxwellian { sigma, vcut } => {
                Shape::Maxwellian(Maxwellian::new(*sigma, *vcut)?)
            }
            DistributionSpec::TableGrid(g) => Shape::Table(Box::new(Table::new(g.clone())?)),
        };
        let (sup_norm, first_v_moment, g0_integral) = match &shape {
            Shape::UniformBox { h } => (1.0 / (2.0 * h), h / 2.0, 0.5),
            Shape::Maxwellian(m) => (m.pdf(0.0), m.first_moment(), 0.5),
            Shape::Table(t) => {
                let g = &t.grid;
                let sup = g.values.iter().copied().fold(0.0, f64::max);
                let cell = g.dx() * g.dv();
                let moment = g
                    .values
                    .chunks(g.nv)
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .map(|(j, f)| {
                                let a = -g.vmax + j as f64 * g.dv();
                                let b = a + g.dv();
                                // exact integral of |v| over the cell
                                let abs_int = if a >= 0.0 || b <= 0.0 {
                                    (b * b - a * a).abs() / 2.0
                                } else {
                                    (a * a + b * b) / 2.0
                                };
                                f * abs_int / g.dv()
                            })
                            .sum::<f64>()
                    })
                    .sum::<f64>()
                    * cell;
                (sup, moment, t.g0_integral())
            }
        };
        let dist = InitialDistribution {
            spec,
            shape,
            sup_norm,
            first_v_moment,
            g0_integral,
        };
        if !dist.g0_integral.is_finite() {
            return Err(Error::InvalidInput("g0 envelope is not integrable".into()));
        }
        let mass = dist.quadrature_mass();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "density integrates to {mass}, expected 1"
            )));
        }
        Ok(dist)
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    /// `f0(x, v)`.
    pub fn pdf(&self, x: f64, v: f64) -> f64 {
        match &self.shape {
            Shape::UniformBox { h } => {
                if v.abs() <= *h {
                    1.0 / (2.0 * h)
                } else {
                    0.0
                }
            }
            Shape::Maxwellian(m) => m.pdf(v),
            Shape::Table(t) => t
                .cell_of(crate::geometry::wrap_unchecked(x), v)
                .map_or(0.0, |(i, j)| t.grid.values[i * t.grid.nv + j]),
        }
    }

    /// `g0(v) = sup { f0(x, w) : x in T, |w| >= v }`, nonincreasing.
    pub fn g0_envelope(&self, v: f64) -> f64 {
        match &self.shape {
            Shape::UniformBox { h } => {
                if v <= *h {
                    1.0 / (2.0 * h)
                } else {
                    0.0
                }
            }
            Shape::Maxwellian(m) => {
                if v > m.vcut {
                    0.0
                } else {
                    m.pdf(v.max(0.0))
                }
            }
            Shape::Table(t) => t.g0(v),
        }
    }

    /// `int_0^inf g0(v) dv`.
    pub fn g0_integral(&self) -> f64 {
        self.g0_integral
    }

    /// `||f0||_inf`, equal to `g0(0)`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `int |v| f0`.
    pub fn first_v_moment(&self) -> f64 {
        self.first_v_moment
    }

    /// Largest `|v|` in the support.
    pub fn v_support(&self) -> f64 {
        match &self.shape {
            Shape::UniformBox { h } => *h,
            Shape::Maxwellian(m) => m.vcut,
            Shape::Table(t) => {
                let g = &t.grid;
                (0..g.nv)
                    .filter(|&j| t.column_max[j] > 0.0)
                    .map(|j| t.column_reach(j))
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Mass of `f0` on `{|v| > c}`.
    pub fn tail_mass(&self, c: f64) -> f64 {
        let c = c.max(0.0);
        1.0 - self.rect_mass(-0.5, 0.5, -c, c)
    }

    /// Exact mass of `f0` on `[x0, x1) x [v0, v1)`, with `x0 <= x1` inside
    /// `[-1/2, 1/2]`.
    pub fn rect_mass(&self, x0: f64, x1: f64, v0: f64, v1: f64) -> f64 {
        if x1 <= x0 || v1 <= v0 {
            return 0.0;
        }
        match &self.shape {
            Shape::UniformBox { h } => {
                let dv = (v1.min(*h) - v0.max(-h)).max(0.0);
                (x1 - x0) * dv / (2.0 * h)
            }
            Shape::Maxwellian(m) => (x1 - x0) * m.mass(v0, v1),
            Shape::Table(t) => t.rect_mass(x0, x1, v0, v1),
        }
    }

    /// Maps a point of the unit square to phase space through the
    /// conditional inverse CDFs (x marginal first, then v given x).
    pub fn transport_uniform(&self, ux: f64, uv: f64) -> PhasePoint {
        let (x, v) = match &self.shape {
            Shape::UniformBox { h } => (-0.5 + ux, -h + 2.0 * h * uv),
            Shape::Maxwellian(m) => (-0.5 + ux, m.inverse_cdf(uv)),
            Shape::Table(t) => t.sample(ux, uv),
        };
        PhasePoint::new(TorusCoord::wrap(x).expect("finite sample"), v)
    }

    /// Gauss-Legendre quadrature of the pdf over panels aligned with its
    /// discontinuities.
    fn quadrature_mass(&self) -> f64 {
        const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let (x_breaks, v_breaks): (Vec<f64>, Vec<f64>) = match &self.shape {
            Shape::UniformBox { h } => (vec![-0.5, 0.5], linspace(-h, *h, 2)),
            Shape::Maxwellian(m) => (vec![-0.5, 0.5], linspace(-m.vcut, m.vcut, 4000)),
            Shape::Table(t) => {
                let g = &t.grid;
                (linspace(-0.5, 0.5, g.nx), linspace(-g.vmax, g.vmax, g.nv))
            }
        };
        let mut total = 0.0;
        for xw in x_breaks.windows(2) {
            let (xc, xh) = (0.5 * (xw[0] + xw[1]), 0.5 * (xw[1] - xw[0]));
            for vw in v_breaks.windows(2) {
                let (vc, vh) = (0.5 * (vw[0] + vw[1]), 0.5 * (vw[1] - vw[0]));
                for (a, wa) in NODES.iter().zip(WEIGHTS) {
                    for (b, wb) in NODES.iter().zip(WEIGHTS) {
                        total += wa * wb * xh * vh * self.pdf(xc + a * xh, vc + b * vh);
                    }
                }
            }
        }
        total
    }
}

fn linspace(a: f64, b: f64, panels: usize) -> Vec<f64> {
    (0..=panels)
        .map(|k| a + (b - a) * k as f64 / panels as f64)
        .collect()
}

/// Draws `n` particles from `f0`. Stratified sampling uses a jittered
/// `k x k` lattice when `n = k^2` and a jittered Latin hypercube otherwise,
/// both pushed through [`InitialDistribution::transport_uniform`].
pub fn sample_initial(
    f0: &InitialDistribution,
    n: usize,
    seed: u64,
    strategy: Sampling,
) -> Result<ParticleState> {
    if n == 0 {
        return Err(Error::InvalidArgument("particle count must be >= 1".into()));
    }
    let mut rng = stream_rng(seed, Purpose::InitialSample, 0);
    let unit: Vec<(f64, f64)> = match strategy {
        Sampling::Iid => (0..n).map(|_| (rng.random(), rng.random())).collect(),
        Sampling::Stratified => {
            let k = (n as f64).sqrt().round() as usize;
            if k * k == n {
                let mut pts = Vec::with_capacity(n);
                for a in 0..k {
                    for b in 0..k {
                        let ux = (a as f64 + rng.random::<f64>()) / k as f64;
                        let uv = (b as f64 + rng.random::<f64>()) / k as f64;
                        pts.push((ux, uv));
                    }
                }
                pts
            } else {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                (0..n)
                    .map(|i| {
                        let ux = (perm[i] as f64 + rng.random::<f64>()) / n as f64;
                        let uv = (i as f64 + rng.random::<f64>()) / n as f64;
                        (ux, uv)
                    })
                    .collect()
            }
        }
    };
    let (positions, velocities) = unit
        .into_iter()
        .map(|(ux, uv)| {
            let p = f0.transport_uniform(ux, uv);
            (p.x, p.v)
        })
        .unzip();
    ParticleState::new(positions, velocities, 0.0)
}
