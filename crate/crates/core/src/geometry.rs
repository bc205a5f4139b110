//! Arithmetic on the torus `[-1/2, 1/2)` and the product metric on phase space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A position on the unit torus, stored as its canonical representative in
/// `[-1/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TorusCoord(f64);

impl TorusCoord {
    pub const ZERO: TorusCoord = TorusCoord(0.0);

    /// Canonical representative of `r` modulo 1.
    pub fn wrap(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "cannot wrap non-finite coordinate {r}"
            )));
        }
        Ok(TorusCoord(wrap_unchecked(r)))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Geodesic distance to `other`, always in `[0, 1/2]`.
    #[inline]
    pub fn distance(self, other: TorusCoord) -> f64 {
        torus_diff(self, other).0.abs()
    }

    /// Move by `dx` along the torus.
    #[inline]
    pub fn shifted(self, dx: f64) -> TorusCoord {
        TorusCoord(wrap_unchecked(self.0 + dx))
    }
}

impl TryFrom<f64> for TorusCoord {
    type Error = Error;

    fn try_from(r: f64) -> Result<Self> {
        TorusCoord::wrap(r)
    }
}

impl From<TorusCoord> for f64 {
    fn from(x: TorusCoord) -> f64 {
        x.0
    }
}

/// `r mod 1` mapped into `[-1/2, 1/2)`. Finite input assumed.
#[inline]
pub fn wrap_unchecked(r: f64) -> f64 {
    if (-0.5..0.5).contains(&r) {
        return r;
    }
    let mut w = r - r.round();
    // `round` sends exact halves away from zero, so both ends need a fixup.
    if w >= 0.5 {
        w -= 1.0;
    } else if w < -0.5 {
        w += 1.0;
    }
    w
}

/// Checked wrap, mirrors [`TorusCoord::wrap`].
pub fn wrap(r: f64) -> Result<TorusCoord> {
    TorusCoord::wrap(r)
}

/// Wrapped difference `a - b`.
#[inline]
pub fn torus_diff(a: TorusCoord, b: TorusCoord) -> TorusCoord {
    TorusCoord(wrap_unchecked(a.0 - b.0))
}

/// A point `(x, v)` of phase space `T x R`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: TorusCoord,
    pub v: f64,
}

impl PhasePoint {
    pub fn new(x: TorusCoord, v: f64) -> Self {
        PhasePoint { x, v }
    }

    /// Builds a point from a raw position, wrapping it onto the torus.
    pub fn from_raw(x: f64, v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite velocity {v}")));
        }
        Ok(PhasePoint {
            x: TorusCoord::wrap(x)?,
            v,
        })
    }
}

/// Euclidean distance on `T x R` with the geodesic torus distance in `x`.
#[inline]
pub fn phase_distance(p: &PhasePoint, q: &PhasePoint) -> f64 {
    let dx = p.x.distance(q.x);
    let dv = p.v - q.v;
    dx.hypot(dv)
}
