//! N-particle dynamics on the torus with the `1/N` mean-field scaling.
//!
//! Particle `i` feels `F_i = -(1/N) sum_j W'(x_i - x_j)`; the self term drops
//! out because `W'(0) = 0`, and coincident particles exert no force on each
//! other. Crossings make the force discontinuous, so no event detection is
//! attempted: the integrator steps straight through them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_unchecked, PhasePoint, TorusCoord};
use crate::kernel::{exact_kernel_sums, KernelKind};
use crate::measures::DiscreteMeasure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    positions: Vec<TorusCoord>,
    velocities: Vec<f64>,
    time: f64,
}

impl ParticleState {
    pub fn new(positions: Vec<TorusCoord>, velocities: Vec<f64>, time: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("need at least one particle".into()));
        }
        if positions.len() != velocities.len() {
            return Err(Error::InvalidArgument(format!(
                "{} positions but {} velocities",
                positions.len(),
                velocities.len()
            )));
        }
        if velocities.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite velocity".into()));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::InvalidArgument(format!("invalid time {time}")));
        }
        Ok(ParticleState {
            positions,
            velocities,
            time,
        })
    }

    /// Wraps raw positions onto the torus.
    pub fn from_raw(positions: &[f64], velocities: &[f64]) -> Result<Self> {
        let positions = positions
            .iter()
            .map(|&x| TorusCoord::wrap(x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(positions, velocities.to_vec(), 0.0)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[TorusCoord] {
        &self.positions
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn point(&self, i: usize) -> PhasePoint {
        PhasePoint::new(self.positions[i], self.velocities[i])
    }

    /// Empirical measure `(1/N) sum_i delta_{(x_i, v_i)}`. Coincident
    /// particles stay separate atoms.
    pub fn empirical_measure(&self) -> DiscreteMeasure {
        DiscreteMeasure::uniform((0..self.len()).map(|i| self.point(i)).collect())
            .expect("particle state is never empty")
    }

    fn raw_positions(&self) -> Vec<f64> {
        self.positions.iter().map(|x| x.value()).collect()
    }
}

/// O(N^2) reference force for any kernel.
pub fn force_naive(state: &ParticleState, kind: KernelKind) -> Vec<f64> {
    let xs = state.raw_positions();
    let inv_n = 1.0 / xs.len() as f64;
    xs.iter()
        .map(|&xi| {
            let s: f64 = xs
                .iter()
                .map(|&xj| kind.force(wrap_unchecked(xi - xj)))
                .sum();
            -inv_n * s
        })
        .collect()
}

/// Exact-kernel force in O(N log N) from one sort, in the original particle
/// order.
pub fn force_sorted(state: &ParticleState) -> Vec<f64> {
    let xs = state.raw_positions();
    let inv_n = 1.0 / xs.len() as f64;
    let mut f = exact_kernel_sums(&xs, None);
    f.iter_mut().for_each(|s| *s *= -inv_n);
    f
}

/// Like [`force_sorted`] but refuses anything other than the exact kernel.
pub fn force_sorted_checked(state: &ParticleState, kind: KernelKind) -> Result<Vec<f64>> {
    match kind {
        KernelKind::Exact => Ok(force_sorted(state)),
        other => Err(Error::UnsupportedKernel(other.to_string())),
    }
}

/// Mollified force: the exact sorted force plus a correction from the pairs
/// closer than `eps`, found by scanning the sorted order in both directions.
fn force_mollified(state: &ParticleState, eps: f64) -> Vec<f64> {
    let xs = state.raw_positions();
    let n = xs.len();
    let inv_n = 1.0 / n as f64;
    let mut forces = exact_kernel_sums(&xs, None);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let kind = KernelKind::Mollified { epsilon: eps };
    let gap = |from: f64, to: f64| {
        let d = to - from;
        if d < 0.0 {
            d + 1.0
        } else {
            d
        }
    };
    for k in 0..n {
        let i = order[k];
        let xi = xs[i];
        let mut corr = 0.0;
        let mut visit = |j: usize| {
            let d = wrap_unchecked(xi - xs[j]);
            corr += kind.force(d) - KernelKind::Exact.force(d);
        };
        // forward neighbours, then backward ones not already reached
        let mut ahead = 0;
        while ahead + 1 < n {
            let j = order[(k + ahead + 1) % n];
            if gap(xi, xs[j]) > eps {
                break;
            }
            visit(j);
            ahead += 1;
        }
        for s in 1..n - ahead {
            let j = order[(k + n - s) % n];
            if gap(xs[j], xi) > eps {
                break;
            }
            visit(j);
        }
        forces[i] += corr;
    }
    forces.iter_mut().for_each(|s| *s *= -inv_n);
    forces
}

/// Force for any kernel using the fastest available route.
pub fn forces(state: &ParticleState, kind: KernelKind) -> Vec<f64> {
    match kind {
        KernelKind::Exact => force_sorted(state),
        KernelKind::Mollified { epsilon } => force_mollified(state, epsilon),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    SemiImplicitEuler,
    #[default]
    VelocityVerlet,
}

/// Advances a state in place, caching the force at the current positions
/// between Verlet steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    kind: KernelKind,
    scheme: Integrator,
    force: Option<Vec<f64>>,
}

impl Stepper {
    pub fn new(kind: KernelKind, scheme: Integrator) -> Result<Self> {
        kind.validate()?;
        Ok(Stepper {
            kind,
            scheme,
            force: None,
        })
    }

    /// Force at the current positions of `state`, as last computed.
    pub fn current_force(&mut self, state: &ParticleState) -> &[f64] {
        if self.force.is_none() {
            self.force = Some(forces(state, self.kind));
        }
        self.force.as_deref().unwrap()
    }

    /// One step of length `dt`. `new_time` is assigned to the state rather
    /// than accumulated, so long runs do not drift in time.
    pub fn advance(&mut self, state: &mut ParticleState, dt: f64, new_time: f64) {
        let drift = |state: &mut ParticleState| {
            for (x, v) in state.positions.iter_mut().zip(&state.velocities) {
                *x = x.shifted(v * dt);
            }
        };
        let kick = |state: &mut ParticleState, f: &[f64], h: f64| {
            for (v, fi) in state.velocities.iter_mut().zip(f) {
                *v += h * fi;
            }
        };
        match self.scheme {
            Integrator::SemiImplicitEuler => {
                let f = forces(state, self.kind);
                kick(state, &f, dt);
                drift(state);
                self.force = None;
            }
            Integrator::VelocityVerlet => {
                let f_old = match self.force.take() {
                    Some(f) => f,
                    None => forces(state, self.kind),
                };
                kick(state, &f_old, 0.5 * dt);
                drift(state);
                let f_new = forces(state, self.kind);
                kick(state, &f_new, 0.5 * dt);
                self.force = Some(f_new);
            }
        }
        state.time = new_time;
    }
}

/// One step from `state`, returning the new state.
pub fn step(
    state: &ParticleState,
    dt: f64,
    kind: KernelKind,
    scheme: Integrator,
) -> Result<ParticleState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time step must be > 0, got {dt}"
        )));
    }
    let mut next = state.clone();
    Stepper::new(kind, scheme)?.advance(&mut next, dt, state.time + dt);
    Ok(next)
}

/// Sampled states of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub sample_times: Vec<f64>,
    pub states: Vec<ParticleState>,
    pub scheme: Integrator,
    pub dt: f64,
}

/// Number of steps and the length of the last one for a run to `t_final`.
/// All steps have length `dt` except possibly a shorter final one.
pub(crate) fn step_plan(t_final: f64, dt: f64) -> (usize, f64) {
    let ratio = t_final / dt;
    let full = (ratio + 1e-9).floor() as usize;
    let rest = t_final - full as f64 * dt;
    if rest > 1e-9 * dt {
        (full + 1, rest)
    } else {
        (full.max(1), if full == 0 { t_final } else { dt })
    }
}

/// Integrates with Velocity Verlet, recording every `sample_every`-th step
/// plus the final state.
pub fn simulate(
    initial: &ParticleState,
    t_final: f64,
    dt: f64,
    kind: KernelKind,
    sample_every: usize,
) -> Result<TrajectoryRecord> {
    simulate_with(
        initial,
        t_final,
        dt,
        kind,
        sample_every,
        Integrator::VelocityVerlet,
    )
}

pub fn simulate_with(
    initial: &ParticleState,
    t_final: f64,
    dt: f64,
    kind: KernelKind,
    sample_every: usize,
    scheme: Integrator,
) -> Result<TrajectoryRecord> {
    let mut sample_times = Vec::new();
    let mut states = Vec::new();
    run_steps(
        initial,
        t_final,
        dt,
        kind,
        scheme,
        |k, is_last, state, _| {
            if k % sample_every.max(1) == 0 || is_last {
                sample_times.push(state.time);
                states.push(state.clone());
            }
        },
    )?;
    Ok(TrajectoryRecord {
        sample_times,
        states,
        scheme,
        dt,
    })
}

/// Drives a run and hands every state (step index, whether it is the last,
/// the state, the force at its positions) to `visit`, starting with the
/// initial state at step 0.
pub fn run_steps<F>(
    initial: &ParticleState,
    t_final: f64,
    dt: f64,
    kind: KernelKind,
    scheme: Integrator,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, bool, &ParticleState, &[f64]),
{
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_final must be > 0, got {t_final}"
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time step must be > 0, got {dt}"
        )));
    }
    let (steps, last_dt) = step_plan(t_final, dt);
    let t0 = initial.time;
    let mut state = initial.clone();
    let mut stepper = Stepper::new(kind, scheme)?;
    let f = stepper.current_force(&state).to_vec();
    visit(0, false, &state, &f);
    for k in 1..=steps {
        let (h, t) = if k == steps {
            (last_dt, t0 + t_final)
        } else {
            (dt, t0 + k as f64 * dt)
        };
        stepper.advance(&mut state, h, t);
        let f = stepper.current_force(&state).to_vec();
        visit(k, k == steps, &state, &f);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// mean velocity
    pub momentum: f64,
    /// `(1/2N) sum v_i^2 + (1/2N^2) sum_{i != j} W(x_i - x_j)`
    pub energy: f64,
    pub max_speed: f64,
}

pub fn diagnostics(state: &ParticleState) -> Diagnostics {
    diagnostics_with(state, KernelKind::Exact)
}

pub fn diagnostics_with(state: &ParticleState, kind: KernelKind) -> Diagnostics {
    let n = state.len() as f64;
    let xs = state.raw_positions();
    let momentum = state.velocities.iter().sum::<f64>() / n;
    let kinetic = state.velocities.iter().map(|v| v * v).sum::<f64>() / (2.0 * n);
    let mut pair = 0.0;
    for (i, &xi) in xs.iter().enumerate() {
        for &xj in &xs[i + 1..] {
            pair += kind.potential(wrap_unchecked(xi - xj));
        }
    }
    // each unordered pair counted once; W is even
    let potential = pair / (n * n);
    Diagnostics {
        momentum,
        energy: kinetic + potential,
        max_speed: state.velocities.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Smooth test function on phase space used by the weak-form residual.
pub trait PhaseTestFunction {
    fn value(&self, x: f64, v: f64) -> f64;
    fn dx(&self, x: f64, v: f64) -> f64;
    fn dv(&self, x: f64, v: f64) -> f64;
}

/// `cos(2 pi k x + phase) * b((v - center) / radius)` with the C-infinity
/// bump `b(s) = exp(1 - 1/(1 - s^2))` on `|s| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpMode {
    pub mode: u32,
    pub phase: f64,
    pub center: f64,
    pub radius: f64,
}

impl BumpMode {
    fn bump(&self, v: f64) -> (f64, f64) {
        let s = (v - self.center) / self.radius;
        if s.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let q = 1.0 - s * s;
        let b = (1.0 - 1.0 / q).exp();
        (b, b * (-2.0 * s / (q * q)) / self.radius)
    }

    fn wave(&self, x: f64) -> (f64, f64) {
        let k = 2.0 * std::f64::consts::PI * self.mode as f64;
        let a = k * x + self.phase;
        (a.cos(), -k * a.sin())
    }
}

impl PhaseTestFunction for BumpMode {
    fn value(&self, x: f64, v: f64) -> f64 {
        self.wave(x).0 * self.bump(v).0
    }

    fn dx(&self, x: f64, v: f64) -> f64 {
        self.wave(x).1 * self.bump(v).0
    }

    fn dv(&self, x: f64, v: f64) -> f64 {
        self.wave(x).0 * self.bump(v).1
    }
}

/// Weak-form residual of the empirical measure along a discrete run:
///
/// `<mu_T, phi> - <mu_0, phi> - int_0^T <mu_s, v d_x phi + F d_v phi> ds`
///
/// with the time integral taken by the trapezoidal rule over the steps.
/// `F = -W' * mu`, so the force term equals the interaction integral of the
/// weak formulation. One value per test function.
pub fn weak_form_residuals(
    initial: &ParticleState,
    t_final: f64,
    dt: f64,
    kind: KernelKind,
    tests: &[&dyn PhaseTestFunction],
) -> Result<Vec<f64>> {
    let n = initial.len() as f64;
    let pairing = |state: &ParticleState, phi: &dyn PhaseTestFunction| -> f64 {
        (0..state.len())
            .map(|i| phi.value(state.positions[i].value(), state.velocities[i]))
            .sum::<f64>()
            / n
    };
    let rate = |state: &ParticleState, f: &[f64], phi: &dyn PhaseTestFunction| -> f64 {
        (0..state.len())
            .map(|i| {
                let (x, v) = (state.positions[i].value(), state.velocities[i]);
                v * phi.dx(x, v) + f[i] * phi.dv(x, v)
            })
            .sum::<f64>()
            / n
    };
    let start: Vec<f64> = tests.iter().map(|phi| pairing(initial, *phi)).collect();
    let mut integral = vec![0.0; tests.len()];
    let mut prev_rate: Vec<f64> = Vec::new();
    let mut prev_time = initial.time;
    let mut end = vec![0.0; tests.len()];
    run_steps(
        initial,
        t_final,
        dt,
        kind,
        Integrator::VelocityVerlet,
        |k, is_last, state, f| {
            let r: Vec<f64> = tests.iter().map(|phi| rate(state, f, *phi)).collect();
            if k > 0 {
                let h = state.time - prev_time;
                for (acc, (a, b)) in integral.iter_mut().zip(prev_rate.iter().zip(&r)) {
                    *acc += 0.5 * h * (a + b);
                }
            }
            if is_last {
                end = tests.iter().map(|phi| pairing(state, *phi)).collect();
            }
            prev_rate = r;
            prev_time = state.time;
        },
    )?;
    Ok((0..tests.len())
        .map(|k| end[k] - start[k] - integral[k])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(xs: &[f64], vs: &[f64]) -> ParticleState {
        ParticleState::from_raw(xs, vs).unwrap()
    }

    #[test]
    fn naive_force_examples() {
        let f = force_naive(&state(&[-0.25, 0.25], &[0.3, -1.0]), KernelKind::Exact);
        assert_eq!(f, vec![0.0, 0.0]);
        let f = force_naive(&state(&[-0.1, 0.1], &[0.0, 0.0]), KernelKind::Exact);
        assert!((f[0] + 0.15).abs() < 1e-15 && (f[1] - 0.15).abs() < 1e-15);
        let f = force_naive(
            &state(&[0.2, 0.2, 0.2], &[0.0, 1.0, 2.0]),
            KernelKind::Exact,
        );
        assert_eq!(f, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn sorted_force_examples() {
        assert_eq!(force_sorted(&state(&[0.3], &[1.0])), vec![0.0]);
        let s = state(&[-0.2, -0.2, 0.35, 0.35], &[0.0; 4]);
        let (a, b) = (force_sorted(&s), force_naive(&s, KernelKind::Exact));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        // the coincident partner contributes nothing; x_0 - x_j = -0.55 wraps
        // to 0.45 for the other pair
        let expected = -(2.0 / 4.0) * (0.45 - 0.5);
        assert!((a[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn sorted_force_rejects_mollified() {
        let s = state(&[0.0, 0.1], &[0.0, 0.0]);
        assert!(matches!(
            force_sorted_checked(&s, KernelKind::Mollified { epsilon: 0.1 }),
            Err(Error::UnsupportedKernel(_))
        ));
    }

    #[test]
    fn windowed_mollified_force_matches_naive() {
        let xs: Vec<f64> = (0..97)
            .map(|k| ((k * 37) % 97) as f64 / 97.0 - 0.5)
            .collect();
        let mut xs2 = xs.clone();
        xs2.extend([0.49, -0.5, -0.5, 0.0, 0.0]);
        let vs = vec![0.0; xs2.len()];
        let s = state(&xs2, &vs);
        for eps in [0.001, 0.01, 0.05, 0.2, 0.49] {
            let kind = KernelKind::Mollified { epsilon: eps };
            let a = forces(&s, kind);
            let b = force_naive(&s, kind);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-13, "eps {eps}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn step_examples() {
        let pair = state(&[-0.25, 0.25], &[0.0, 0.0]);
        for scheme in [Integrator::VelocityVerlet, Integrator::SemiImplicitEuler] {
            let next = step(&pair, 0.37, KernelKind::Exact, scheme).unwrap();
            assert_eq!(next.positions(), pair.positions());
            assert_eq!(next.velocities(), pair.velocities());
            assert_eq!(next.time(), 0.37);
        }
        let single = state(&[0.48], &[0.3]);
        let next = step(&single, 0.1, KernelKind::Exact, Integrator::VelocityVerlet).unwrap();
        assert!((next.positions()[0].value() - (-0.49)).abs() < 1e-15);
        assert_eq!(next.velocities()[0], 0.3);
        assert!(step(&single, 0.0, KernelKind::Exact, Integrator::VelocityVerlet).is_err());
    }

    #[test]
    fn equilibrium_pair_is_preserved() {
        let pair = state(&[-0.25, 0.25], &[0.0, 0.0]);
        let rec = simulate(&pair, 10.0, 0.01, KernelKind::Exact, 100).unwrap();
        assert_eq!(rec.states.len(), 11);
        for s in &rec.states {
            assert_eq!(s.positions(), pair.positions());
            assert_eq!(s.velocities(), pair.velocities());
        }
    }

    #[test]
    fn simulate_records_stride_and_final_time() {
        let s = state(&[0.0, 0.3], &[0.1, -0.1]);
        let rec = simulate(&s, 1.05, 0.1, KernelKind::Exact, 3).unwrap();
        let t = &rec.sample_times;
        assert_eq!(t.len(), 5);
        assert!((t[3] - 0.9).abs() < 1e-15);
        assert_eq!(*t.last().unwrap(), 1.05);
        for (time, st) in t.iter().zip(&rec.states) {
            assert_eq!(*time, st.time());
        }
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn step_plan_counts() {
        assert_eq!(step_plan(1.0, 0.1), (10, 0.1));
        assert_eq!(step_plan(2.0, 0.01), (200, 0.01));
        let (n, last) = step_plan(1.05, 0.1);
        assert_eq!(n, 11);
        assert!((last - 0.05).abs() < 1e-12);
        assert_eq!(step_plan(0.05, 0.1), (1, 0.05));
    }

    #[test]
    fn diagnostics_examples() {
        let d = diagnostics(&state(&[-0.25, 0.25], &[0.0, 0.0]));
        assert_eq!(d.momentum, 0.0);
        assert!((d.energy + 1.0 / 32.0).abs() < 1e-15);
        let d = diagnostics(&state(&[0.1], &[1.0]));
        assert_eq!((d.energy, d.momentum, d.max_speed), (0.5, 1.0, 1.0));
        let a = diagnostics(&state(&[0.1, -0.3, 0.4], &[1.0, -2.0, 0.5]));
        let b = diagnostics(&state(&[0.4, 0.1, -0.3], &[0.5, 1.0, -2.0]));
        assert!((a.energy - b.energy).abs() < 1e-15);
        assert!((a.momentum - b.momentum).abs() < 1e-15);
        assert_eq!(a.max_speed, b.max_speed);
    }

    #[test]
    fn empirical_measure_keeps_duplicates() {
        let m = state(&[0.1, 0.1], &[0.0, 0.0]).empirical_measure();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let one = state(&[0.1], &[0.0]).empirical_measure();
        assert_eq!(one.weights(), &[1.0]);
    }

    #[test]
    fn bump_mode_derivatives() {
        let phi = BumpMode {
            mode: 2,
            phase: 0.3,
            center: 0.1,
            radius: 1.5,
        };
        let h = 1e-6;
        for &(x, v) in &[(0.1, 0.2), (-0.3, -1.0), (0.45, 1.2)] {
            let dx = (phi.value(x + h, v) - phi.value(x - h, v)) / (2.0 * h);
            let dv = (phi.value(x, v + h) - phi.value(x, v - h)) / (2.0 * h);
            assert!((dx - phi.dx(x, v)).abs() < 1e-6);
            assert!((dv - phi.dv(x, v)).abs() < 1e-6);
        }
        assert_eq!(phi.value(0.0, 5.0), 0.0);
    }

    fn random_state(max_n: usize) -> impl Strategy<Value = ParticleState> {
        proptest::collection::vec((-0.5f64..0.5, -1.0f64..1.0, 0u8..10), 1..max_n).prop_map(|pts| {
            let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let vs: Vec<f64> = pts.iter().map(|p| p.1).collect();
            // inject duplicates and antipodal partners
            for k in 1..xs.len() {
                match pts[k].2 {
                    0 => xs[k] = xs[k - 1],
                    1 => xs[k] = wrap_unchecked(xs[k - 1] + 0.5),
                    _ => {}
                }
            }
            ParticleState::from_raw(&xs, &vs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sorted_matches_naive(s in random_state(300)) {
            let a = force_sorted(&s);
            let b = force_naive(&s, KernelKind::Exact);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            let total: f64 = a.iter().sum();
            prop_assert!(total.abs() <= 1e-14 * s.len() as f64);
        }

        #[test]
        fn force_is_permutation_equivariant(s in random_state(64), rot in 0usize..64) {
            let n = s.len();
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let xs: Vec<f64> = perm.iter().map(|&i| s.positions()[i].value()).collect();
            let vs: Vec<f64> = perm.iter().map(|&i| s.velocities()[i]).collect();
            let permuted = ParticleState::from_raw(&xs, &vs).unwrap();
            let a = force_sorted(&s);
            let b = force_sorted(&permuted);
            for (k, &i) in perm.iter().enumerate() {
                prop_assert!((b[k] - a[i]).abs() < 1e-15);
            }
        }
    }
}
