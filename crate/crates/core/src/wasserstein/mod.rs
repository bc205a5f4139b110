//! Exact Wasserstein-1 distance between discrete measures on `T x R`.
//!
//! [`w1_exact`] solves the transportation problem with a network simplex and
//! returns the optimal plan. [`w1_assignment_oracle`] computes the same
//! quantity for equal-size uniform measures through the Hungarian algorithm
//! and exists as an independent check.

mod assignment;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::phase_distance;
use crate::measures::{DiscreteMeasure, WEIGHT_TOL};

pub use assignment::hungarian;

/// Default bound on `m * n` for a single solve.
pub const DEFAULT_COST_CAP: usize = 4_000_000;

/// Dual-feasibility tolerance of the optimality certificate.
pub const CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub src: usize,
    pub dst: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub entries: Vec<PlanEntry>,
    pub cost: f64,
}

impl TransportPlan {
    /// Row and column sums of the plan.
    pub fn marginals(&self, m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rows = vec![0.0; m];
        let mut cols = vec![0.0; n];
        for e in &self.entries {
            rows[e.src] += e.mass;
            cols[e.dst] += e.mass;
        }
        (rows, cols)
    }

    /// `(src, dst, mass, mass * distance)` rows for export.
    pub fn cost_contributions(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
    ) -> Vec<(usize, usize, f64, f64)> {
        self.entries
            .iter()
            .map(|e| {
                let d = phase_distance(&mu.atoms()[e.src], &nu.atoms()[e.dst]);
                (e.src, e.dst, e.mass, e.mass * d)
            })
            .collect()
    }
}

fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<f64> {
    let mut cost = Vec::with_capacity(mu.len() * nu.len());
    for p in mu.atoms() {
        for q in nu.atoms() {
            cost.push(phase_distance(p, q));
        }
    }
    cost
}

/// Optimal transport cost and plan, with the default size cap.
pub fn w1_exact(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(f64, TransportPlan)> {
    w1_exact_with_cap(mu, nu, DEFAULT_COST_CAP)
}

pub fn w1_exact_with_cap(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cap: usize,
) -> Result<(f64, TransportPlan)> {
    let size = mu.len() * nu.len();
    if size > cap {
        return Err(Error::ResourceLimit { size, cap });
    }
    let (a, b): (f64, f64) = (mu.weights().iter().sum(), nu.weights().iter().sum());
    if (a - b).abs() > 2.0 * WEIGHT_TOL {
        return Err(Error::Precondition(format!(
            "unbalanced measures: masses {a} and {b}"
        )));
    }
    // rescale the target so both sides carry bit-identical totals
    let demand: Vec<f64> = nu.weights().iter().map(|w| w * a / b).collect();
    let cost = cost_matrix(mu, nu);
    let sol = simplex::solve_transport(mu.weights(), &demand, &cost)?;
    if sol.max_violation > CERTIFICATE_TOL {
        return Err(Error::Solver(format!(
            "optimality certificate failed: reduced cost violation {:.3e}",
            sol.max_violation
        )));
    }
    let entries: Vec<PlanEntry> = sol
        .flows
        .iter()
        .map(|&(src, dst, mass)| PlanEntry { src, dst, mass })
        .collect();
    let total = entries
        .iter()
        .map(|e| e.mass * cost[e.src * nu.len() + e.dst])
        .sum::<f64>();
    Ok((
        total,
        TransportPlan {
            entries,
            cost: total,
        },
    ))
}

/// W1 between two uniform measures with the same atom count, as an optimal
/// assignment.
pub fn w1_assignment_oracle(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::InvalidInput(format!(
            "assignment oracle needs equal atom counts, got {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    if !mu.has_equal_weights() || !nu.has_equal_weights() {
        return Err(Error::InvalidInput(
            "assignment oracle needs equally weighted atoms".into(),
        ));
    }
    let n = mu.len();
    let (_, total) = hungarian(&cost_matrix(mu, nu), n);
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PhasePoint;

    fn pt(x: f64, v: f64) -> PhasePoint {
        PhasePoint::from_raw(x, v).unwrap()
    }

    #[test]
    fn single_pair() {
        let a = DiscreteMeasure::uniform(vec![pt(0.0, 0.0)]).unwrap();
        let b = DiscreteMeasure::uniform(vec![pt(0.0, 1.0)]).unwrap();
        let (w, plan) = w1_exact(&a, &b).unwrap();
        assert_eq!(w, 1.0);
        assert_eq!(plan.entries.len(), 1);
    }

    #[test]
    fn self_distance_is_zero() {
        let a = DiscreteMeasure::normalized(
            vec![pt(0.1, 0.0), pt(-0.3, 1.0), pt(0.4, -2.0)],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        assert!(w1_exact(&a, &a).unwrap().0.abs() < 1e-15);
    }

    #[test]
    fn crossing_geometry_oracle() {
        let a = DiscreteMeasure::uniform(vec![pt(-0.1, 0.0), pt(0.1, 0.0)]).unwrap();
        let b = DiscreteMeasure::uniform(vec![pt(-0.1, 1.0), pt(0.1, 1.0)]).unwrap();
        assert!((w1_assignment_oracle(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!((w1_exact(&a, &b).unwrap().0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_single_atom() {
        let a = DiscreteMeasure::uniform(vec![pt(0.45, 0.0)]).unwrap();
        let b = DiscreteMeasure::uniform(vec![pt(-0.45, 0.0)]).unwrap();
        assert!((w1_assignment_oracle(&a, &b).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn oracle_preconditions() {
        let a = DiscreteMeasure::uniform(vec![pt(0.0, 0.0), pt(0.1, 0.0)]).unwrap();
        let b = DiscreteMeasure::uniform(vec![pt(0.0, 0.0)]).unwrap();
        assert!(matches!(
            w1_assignment_oracle(&a, &b),
            Err(Error::InvalidInput(_))
        ));
        let c =
            DiscreteMeasure::normalized(vec![pt(0.0, 0.0), pt(0.1, 0.0)], vec![1.0, 3.0]).unwrap();
        assert!(matches!(
            w1_assignment_oracle(&a, &c),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn size_cap_enforced() {
        let atoms: Vec<_> = (0..10).map(|k| pt(k as f64 / 10.0 - 0.5, 0.0)).collect();
        let a = DiscreteMeasure::uniform(atoms).unwrap();
        assert!(matches!(
            w1_exact_with_cap(&a, &a, 99),
            Err(Error::ResourceLimit { size: 100, cap: 99 })
        ));
        assert!(w1_exact_with_cap(&a, &a, 100).is_ok());
    }

    #[test]
    fn unequal_sizes_have_feasible_plan() {
        let a = DiscreteMeasure::normalized(
            vec![pt(0.1, 0.0), pt(-0.3, 1.0), pt(0.4, -2.0)],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        let b = DiscreteMeasure::uniform(vec![pt(0.0, 0.5), pt(0.2, -1.0)]).unwrap();
        let (w, plan) = w1_exact(&a, &b).unwrap();
        let (rows, cols) = plan.marginals(3, 2);
        for (r, w) in rows.iter().zip(a.weights()) {
            assert!((r - w).abs() < 1e-12);
        }
        for c in &cols {
            assert!((c - 0.5).abs() < 1e-12);
        }
        let recomputed: f64 = plan.cost_contributions(&a, &b).iter().map(|r| r.3).sum();
        assert!((recomputed - w).abs() < 1e-14);
        assert!(plan.entries.iter().all(|e| e.mass > 0.0));
    }
}
