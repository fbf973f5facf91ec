//! Cartan angular invariant of boundary triples.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;
use thiserror::Error;

use crate::hermitian::{herm_inner, BoundaryPoint, DEFAULT_TOL_PROJECTIVE};
use crate::linalg::proportionality_residual;

pub const DEFAULT_TOL_DEG: f64 = 1e-10;
pub const DEFAULT_TOL_ANGLE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CartanError {
    #[error("degenerate triple: points {0} and {1} {2}")]
    DegenerateTriple(usize, usize, &'static str),
}

/// Three pairwise distinct boundary points with nonvanishing pairwise
/// inner products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTriple {
    points: [BoundaryPoint; 3],
}

impl BoundaryTriple {
    pub fn new(x1: BoundaryPoint, x2: BoundaryPoint, x3: BoundaryPoint) -> Result<Self, CartanError> {
        Self::with_tolerance(x1, x2, x3, DEFAULT_TOL_DEG)
    }

    pub fn with_tolerance(
        x1: BoundaryPoint,
        x2: BoundaryPoint,
        x3: BoundaryPoint,
        tol_deg: f64,
    ) -> Result<Self, CartanError> {
        let points = [x1, x2, x3];
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let (a, b) = (points[i].lift(), points[j].lift());
            if proportionality_residual(a, b) <= DEFAULT_TOL_PROJECTIVE {
                return Err(CartanError::DegenerateTriple(i + 1, j + 1, "coincide"));
            }
            if herm_inner(a, b).norm() <= tol_deg * a.norm() * b.norm() {
                return Err(CartanError::DegenerateTriple(i + 1, j + 1, "are orthogonal"));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[BoundaryPoint; 3] {
        &self.points
    }
}

/// `arg(−⟨x₁,x₂⟩⟨x₂,x₃⟩⟨x₃,x₁⟩)`.
///
/// The exact value lies in `[−π/2, π/2]`; roundoff past the endpoints is
/// clamped.
pub fn cartan_invariant(t: &BoundaryTriple) -> f64 {
    let [x1, x2, x3] = t.points.map(|p| *p.lift());
    let product = -(herm_inner(&x1, &x2) * herm_inner(&x2, &x3) * herm_inner(&x3, &x1));
    product.arg().clamp(-FRAC_PI_2, FRAC_PI_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleGeometry {
    ComplexLine,
    Lagrangian,
    Generic,
}

pub fn triple_geometry(t: &BoundaryTriple, tol_angle: f64) -> TripleGeometry {
    let angle = cartan_invariant(t).abs();
    if angle >= FRAC_PI_2 - tol_angle {
        TripleGeometry::ComplexLine
    } else if angle <= tol_angle {
        TripleGeometry::Lagrangian
    } else {
        TripleGeometry::Generic
    }
}
