//! The periodic Coulomb interaction `W(x) = (x^2 - |x|)/2` and its mollified
//! family.
//!
//! The force kernel follows the no-self-interaction convention `W'(0) = 0`,
//! so coincident particles exert no force on each other. On the torus it
//! splits into a linear part and a sign part, `W'(x) = x - sign(x)/2`, which
//! is what makes the sorted O(N log N) force evaluation possible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::TorusCoord;

/// Selects the interaction force used by the particle dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    Exact,
    Mollified { epsilon: f64 },
}

impl KernelKind {
    pub fn mollified(epsilon: f64) -> Result<Self> {
        check_eps(epsilon)?;
        Ok(KernelKind::Mollified { epsilon })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelKind::Exact => Ok(()),
            KernelKind::Mollified { epsilon } => check_eps(epsilon),
        }
    }

    /// `W'` for this kernel on an already wrapped offset. The mollifier
    /// parameter is assumed valid.
    #[inline]
    pub fn force(&self, x: f64) -> f64 {
        match *self {
            KernelKind::Exact => force_raw(x),
            KernelKind::Mollified { epsilon } => mollified_force_raw(x, epsilon),
        }
    }

    #[inline]
    pub fn potential(&self, x: f64) -> f64 {
        match *self {
            KernelKind::Exact => potential_raw(x),
            KernelKind::Mollified { epsilon } => mollified_potential_raw(x, epsilon),
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelKind::Exact => write!(f, "exact"),
            KernelKind::Mollified { epsilon } => write!(f, "mollified(eps={epsilon})"),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "mollification parameter must lie in (0, 1/2), got {eps}"
        )))
    }
}

/// `sign` with `sign(0) = 0`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn potential_raw(x: f64) -> f64 {
    (x * x - x.abs()) / 2.0
}

#[inline]
fn force_raw(x: f64) -> f64 {
    x - sign(x) / 2.0
}

#[inline]
fn mollified_force_raw(x: f64, eps: f64) -> f64 {
    if x.abs() <= eps {
        -(1.0 / (2.0 * eps) - 1.0) * x
    } else {
        force_raw(x)
    }
}

#[inline]
fn mollified_potential_raw(x: f64, eps: f64) -> f64 {
    if x.abs() <= eps {
        -(1.0 / (2.0 * eps) - 1.0) * x * x / 2.0 - eps / 4.0
    } else {
        potential_raw(x)
    }
}

/// `W(x)`; takes values in `[-1/8, 0]`.
pub fn potential(x: TorusCoord) -> f64 {
    potential_raw(x.value())
}

/// `W'(x) = x - sign(x)/2` with `W'(0) = 0`. Vanishes at the antipode.
pub fn force_kernel(x: TorusCoord) -> f64 {
    force_raw(x.value())
}

/// Lipschitz regularization of `W'`, linear on `[-eps, eps]`.
pub fn mollified_force(x: TorusCoord, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(mollified_force_raw(x.value(), eps))
}

pub fn mollified_potential(x: TorusCoord, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(mollified_potential_raw(x.value(), eps))
}

/// `S_i = sum_j w_j W'(wrap(x_i - x_j))` for every `i`, in O(N log N).
///
/// For raw differences `d = x_i - x_j` in `(-1, 1)` the wrapped kernel is
/// `W'(wrap(d)) = d - sign(d)/2`, so the sum reduces to a weighted first
/// moment plus the weight strictly below minus the weight strictly above
/// `x_i`. Equal positions fall in neither group. Unit weights when
/// `weights` is `None`. Positions must lie in `[-1/2, 1/2)`.
pub fn exact_kernel_sums(positions: &[f64], weights: Option<&[f64]>) -> Vec<f64> {
    let n = positions.len();
    let w = |j: usize| weights.map_or(1.0, |w| w[j]);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| positions[a].total_cmp(&positions[b]));

    let total: f64 = (0..n).map(w).sum();
    let moment: f64 = (0..n).map(|j| w(j) * positions[j]).sum();

    let mut sums = vec![0.0; n];
    let mut below = 0.0;
    let mut start = 0;
    while start < n {
        let x = positions[order[start]];
        let mut end = start;
        let mut group = 0.0;
        while end < n && positions[order[end]] == x {
            group += w(order[end]);
            end += 1;
        }
        let above = total - below - group;
        let s = total * x - moment - 0.5 * (below - above);
        for &i in &order[start..end] {
            sums[i] = s;
        }
        below += group;
        start = end;
    }
    sums
}
