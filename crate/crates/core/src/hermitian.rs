//! The Hermitian form on `C^{3,1}`, membership in SU(3,1), the Siegel
//! domain model of complex hyperbolic 3-space and its Heisenberg boundary.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    basis_vector, form_inverse, form_matrix, is_finite_matrix, max_norm,
    proportionality_residual, vector_max_norm, CMatrix4, CVector4, ONE, ZERO,
};
use crate::word::Word;

/// Default tolerance for `‖M*JM − J‖_max` and `|det M − 1|`.
pub const DEFAULT_TOL_FORM: f64 = 1e-9;
/// Default relative tolerance for a lift to count as null.
pub const DEFAULT_TOL_NULL: f64 = 1e-9;
/// Proportionality residual below which two boundary points are equal.
pub const DEFAULT_TOL_PROJECTIVE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not in SU(3,1): residual {residual:.3e} exceeds {tol:.3e}")]
    NotInGroup { residual: f64, tol: f64 },
    #[error("zero vector does not define a boundary point")]
    ZeroVector,
    #[error("vector is not null: |<v,v>| / |v|^2 = {residual:.3e}")]
    NotNull { residual: f64 },
}

/// `⟨z, w⟩ = w* J z = z₁w̄₄ + z₂w̄₂ + z₃w̄₃ + z₄w̄₁`.
pub fn herm_inner(z: &CVector4, w: &CVector4) -> Complex64 {
    z[0] * w[3].conj() + z[1] * w[1].conj() + z[2] * w[2].conj() + z[3] * w[0].conj()
}

pub fn herm_norm_sq(z: &CVector4) -> f64 {
    herm_inner(z, z).re
}

/// Outcome of the SU(3,1) membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Membership {
    pub member: bool,
    /// `max(‖M*JM − J‖_max, |det M − 1|)`.
    pub residual: f64,
}

pub fn membership_residual(m: &CMatrix4) -> f64 {
    if !is_finite_matrix(m) {
        return f64::INFINITY;
    }
    let j = form_matrix();
    let form = max_norm(&(m.adjoint() * j * m - j));
    let det = (m.determinant() - ONE).norm();
    form.max(det)
}

pub fn is_su31(m: &CMatrix4, tol: f64) -> Membership {
    let residual = membership_residual(m);
    Membership {
        member: residual <= tol,
        residual,
    }
}

/// A matrix in SU(3,1) together with the word it represents.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: CMatrix4,
    word: Word,
    residual: f64,
}

impl GroupElement {
    /// Certifies `matrix` against `tol`.
    pub fn certify(matrix: CMatrix4, word: Word, tol: f64) -> Result<Self, FormError> {
        if !is_finite_matrix(&matrix) {
            return Err(FormError::NonFinite);
        }
        let Membership { member, residual } = is_su31(&matrix, tol);
        if !member {
            return Err(FormError::NotInGroup { residual, tol });
        }
        Ok(Self {
            matrix,
            word,
            residual,
        })
    }

    pub fn identity() -> Self {
        Self {
            matrix: CMatrix4::identity(),
            word: Word::empty(),
            residual: 0.0,
        }
    }

    pub fn matrix(&self) -> &CMatrix4 {
        &self.matrix
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn with_word(mut self, word: Word) -> Self {
        self.word = word;
        self
    }

    /// Membership residual measured for this matrix.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `self · other`. The residual of the product is measured, not assumed.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let matrix = self.matrix * other.matrix;
        GroupElement {
            residual: membership_residual(&matrix),
            matrix,
            word: self.word.concat(&other.word),
        }
    }

    /// Inverse via `J M* J`.
    pub fn inverse(&self) -> GroupElement {
        let matrix = form_inverse(&self.matrix);
        GroupElement {
            residual: membership_residual(&matrix),
            matrix,
            word: self.word.inverse(),
        }
    }

    /// `C⁻¹ · self · C`, keeping the word.
    pub fn conjugate_by(&self, c: &GroupElement) -> GroupElement {
        let matrix = form_inverse(&c.matrix) * self.matrix * c.matrix;
        GroupElement {
            residual: membership_residual(&matrix),
            matrix,
            word: self.word.clone(),
        }
    }

    pub fn apply(&self, v: &CVector4) -> CVector4 {
        self.matrix * v
    }
}

/// A point of `∂CH³`: the projective class of a nonzero null vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    #[serde(with = "crate::json::vector")]
    lift: CVector4,
}

impl BoundaryPoint {
    pub fn from_lift(v: CVector4, tol_null: f64) -> Result<Self, FormError> {
        if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(FormError::NonFinite);
        }
        let scale = vector_max_norm(&v);
        if scale == 0.0 {
            return Err(FormError::ZeroVector);
        }
        let residual = herm_inner(&v, &v).norm() / v.norm_squared();
        if residual > tol_null {
            return Err(FormError::NotNull { residual });
        }
        let pivot = v
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("four entries");
        Ok(Self { lift: v / pivot })
    }

    /// The class of `e₁`, the distinguished point `∞` of the Siegel model.
    pub fn infinity() -> Self {
        Self {
            lift: basis_vector(0),
        }
    }

    /// The class of `e₄`, the origin of the Heisenberg group.
    pub fn origin() -> Self {
        Self {
            lift: basis_vector(3),
        }
    }

    /// Representative with largest-modulus entry equal to 1.
    pub fn lift(&self) -> &CVector4 {
        &self.lift
    }

    pub fn approx_eq(&self, other: &BoundaryPoint, tol: f64) -> bool {
        proportionality_residual(&self.lift, &other.lift) <= tol
    }

    pub fn image(&self, g: &GroupElement, tol_null: f64) -> Result<BoundaryPoint, FormError> {
        BoundaryPoint::from_lift(g.apply(&self.lift), tol_null)
    }
}

/// Horospherical coordinates `(z, u, v)` on the closure of the Siegel domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorosphericalPoint {
    #[serde(with = "pair")]
    pub z: [Complex64; 2],
    pub u: f64,
    /// Height; 0 on the boundary.
    pub v: f64,
}

impl HorosphericalPoint {
    pub fn new(z: [Complex64; 2], u: f64, v: f64) -> Self {
        debug_assert!(v >= 0.0, "height must be nonnegative");
        Self { z, u, v }
    }

    pub fn boundary(z: [Complex64; 2], u: f64) -> Self {
        Self { z, u, v: 0.0 }
    }

    pub fn is_boundary(&self) -> bool {
        self.v == 0.0
    }
}

/// Standard Hermitian product on `C²`, `⟨⟨a, b⟩⟩ = Σ aᵢ b̄ᵢ`.
pub fn c2_inner(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj()
}

/// `ψ(z, u, v) = (−⟨⟨z,z⟩⟩ − v + iu, √2 z₁, √2 z₂, 1)ᵗ`.
pub fn siegel_embed(p: &HorosphericalPoint) -> CVector4 {
    let zz = c2_inner(&p.z, &p.z).re;
    CVector4::new(
        Complex64::new(-zz - p.v, p.u),
        p.z[0] * SQRT_2,
        p.z[1] * SQRT_2,
        ONE,
    )
}

pub fn siegel_infinity() -> BoundaryPoint {
    BoundaryPoint::infinity()
}

/// A point `(z, u)` of the Heisenberg group `C² × ℝ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergPoint {
    #[serde(with = "pair")]
    pub z: [Complex64; 2],
    pub u: f64,
}

impl HeisenbergPoint {
    pub fn new(z: [Complex64; 2], u: f64) -> Self {
        Self { z, u }
    }

    pub fn identity() -> Self {
        Self {
            z: [ZERO, ZERO],
            u: 0.0,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            z: [-self.z[0], -self.z[1]],
            u: -self.u,
        }
    }

    pub fn as_boundary(&self) -> HorosphericalPoint {
        HorosphericalPoint::boundary(self.z, self.u)
    }
}

/// `(z, u)·(z', u') = (z + z', u + u' + 2 Im⟨⟨z, z'⟩⟩)`.
pub fn heisenberg_mul(p: &HeisenbergPoint, q: &HeisenbergPoint) -> HeisenbergPoint {
    HeisenbergPoint {
        z: [p.z[0] + q.z[0], p.z[1] + q.z[1]],
        u: p.u + q.u + 2.0 * c2_inner(&p.z, &q.z).im,
    }
}

/// The unipotent element of SU(3,1) fixing `∞` whose action on the boundary
/// is left multiplication by `p`: `T_p ψ(q) = ψ(p·q)` for `q` with `v = 0`.
pub fn heisenberg_translation(p: &HeisenbergPoint) -> CMatrix4 {
    let [z1, z2] = p.z;
    let zz = c2_inner(&p.z, &p.z).re;
    let mut t = CMatrix4::identity();
    t[(0, 1)] = -z1.conj() * SQRT_2;
    t[(0, 2)] = -z2.conj() * SQRT_2;
    t[(0, 3)] = Complex64::new(-zz, p.u);
    t[(1, 3)] = z1 * SQRT_2;
    t[(2, 3)] = z2 * SQRT_2;
    t
}

/// One of the twenty entrywise identities coming from `BB⁻¹ = B⁻¹B = I`.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub residual: f64,
}

enum Side {
    /// Entry of `B · B⁻¹`.
    Right,
    /// Entry of `B⁻¹ · B`.
    Left,
}

// Entry names: row-major a b c d / e f g h / l m n p / q r s t.
const IDENTITIES: [(&str, Side, usize, usize); 20] = [
    ("a t̄ + b r̄ + c s̄ + d q̄ = 1", Side::Right, 0, 0),
    ("a h̄ + b f̄ + c ḡ + d ē = 0", Side::Right, 0, 1),
    ("a p̄ + b m̄ + c n̄ + d l̄ = 0", Side::Right, 0, 2),
    ("a d̄ + |b|² + |c|² + d ā = 0", Side::Right, 0, 3),
    ("e t̄ + f r̄ + g s̄ + h q̄ = 0", Side::Right, 1, 0),
    ("e h̄ + |f|² + |g|² + h ē = 1", Side::Right, 1, 1),
    ("e p̄ + f m̄ + g n̄ + h l̄ = 0", Side::Right, 1, 2),
    ("l t̄ + m r̄ + n s̄ + p q̄ = 0", Side::Right, 2, 0),
    ("l p̄ + |m|² + |n|² + p l̄ = 1", Side::Right, 2, 2),
    ("q t̄ + |r|² + |s|² + t q̄ = 0", Side::Right, 3, 0),
    ("t̄ a + h̄ e + p̄ l + d̄ q = 1", Side::Left, 0, 0),
    ("t̄ b + h̄ f + p̄ m + d̄ r = 0", Side::Left, 0, 1),
    ("t̄ c + h̄ g + p̄ n + d̄ s = 0", Side::Left, 0, 2),
    ("t̄ d + |h|² + |p|² + d̄ t = 0", Side::Left, 0, 3),
    ("r̄ a + f̄ e + m̄ l + b̄ q = 0", Side::Left, 1, 0),
    ("r̄ b + |f|² + |m|² + b̄ r = 1", Side::Left, 1, 1),
    ("r̄ c + f̄ g + m̄ n + b̄ s = 0", Side::Left, 1, 2),
    ("s̄ a + ḡ e + n̄ l + c̄ q = 0", Side::Left, 2, 0),
    ("s̄ c + |g|² + |n|² + c̄ s = 1", Side::Left, 2, 2),
    ("q̄ a + |e|² + |l|² + ā q = 0", Side::Left, 3, 0),
];

/// Evaluates the twenty identities with `B⁻¹` written as `J B* J`.
///
/// For a genuine member every residual is at roundoff level; the list is a
/// diagnostic and does not depend on `B` having passed certification.
pub fn verify_inverse_identities(b: &CMatrix4) -> Vec<IdentityResidual> {
    let inv = form_inverse(b);
    let right = b * inv;
    let left = inv * b;
    IDENTITIES
        .iter()
        .map(|(name, side, i, j)| {
            let value = match side {
                Side::Right => right[(*i, *j)],
                Side::Left => left[(*i, *j)],
            };
            let expected = if i == j { ONE } else { ZERO };
            IdentityResidual {
                name,
                residual: (value - expected).norm(),
            }
        })
        .collect()
}

mod pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &[Complex64; 2], s: S) -> Result<S::Ok, S::Error> {
        [[z[0].re, z[0].im], [z[1].re, z[1].im]].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Complex64; 2], D::Error> {
        let r = <[[f64; 2]; 2]>::deserialize(d)?;
        Ok([Complex64::new(r[0][0], r[0][1]), Complex64::new(r[1][0], r[1][1])])
    }
}
