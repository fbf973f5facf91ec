//! Fixed-size complex linear algebra on `C^{3,1}`.
//!
//! Matrices and vectors are nalgebra 4×4 / 4×1 over `Complex64`. The
//! Hermitian form is the "second" form with the anti-diagonal corner block,
//! `J = [[0,0,0,1],[0,1,0,0],[0,0,1,0],[1,0,0,0]]`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

pub type CVector4 = Vector4<Complex64>;
pub type CMatrix4 = Matrix4<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// The Gram matrix of the Hermitian form.
pub fn form_matrix() -> CMatrix4 {
    let mut j = CMatrix4::zeros();
    j[(0, 3)] = ONE;
    j[(1, 1)] = ONE;
    j[(2, 2)] = ONE;
    j[(3, 0)] = ONE;
    j
}

pub fn basis_vector(index: usize) -> CVector4 {
    let mut v = CVector4::zeros();
    v[index] = ONE;
    v
}

pub fn diag(entries: [Complex64; 4]) -> CMatrix4 {
    CMatrix4::from_diagonal(&CVector4::from(entries))
}

pub fn real_matrix(rows: [[f64; 4]; 4]) -> CMatrix4 {
    CMatrix4::from_fn(|i, j| Complex64::new(rows[i][j], 0.0))
}

pub fn max_norm(m: &CMatrix4) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn vector_max_norm(v: &CVector4) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_finite_matrix(m: &CMatrix4) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Inverse of an element of U(3,1), `J M* J`. Exact in form; only valid when
/// `M` preserves the Hermitian form.
pub fn form_inverse(m: &CMatrix4) -> CMatrix4 {
    let j = form_matrix();
    j * m.adjoint() * j
}

/// Result of Gaussian elimination with complete pivoting.
#[derive(Debug, Clone)]
pub struct PivotedElimination {
    /// Upper-trapezoidal factor, rows and columns in pivot order.
    upper: CMatrix4,
    col_perm: [usize; 4],
    rank: usize,
    /// Magnitude of the first rejected pivot (0 when full rank).
    pub residual_pivot: f64,
}

impl PivotedElimination {
    /// Eliminates `m`, stopping as soon as every remaining entry is at most
    /// `threshold` in modulus.
    pub fn new(m: &CMatrix4, threshold: f64) -> Self {
        let mut a = *m;
        let mut col_perm = [0, 1, 2, 3];
        let mut rank = 4;
        let mut residual_pivot = 0.0;

        for k in 0..4 {
            let (mut pr, mut pc, mut best) = (k, k, -1.0);
            for i in k..4 {
                for j in k..4 {
                    let mag = a[(i, j)].norm();
                    if mag > best {
                        best = mag;
                        pr = i;
                        pc = j;
                    }
                }
            }
            if best <= threshold {
                rank = k;
                residual_pivot = best;
                break;
            }
            a.swap_rows(k, pr);
            a.swap_columns(k, pc);
            col_perm.swap(k, pc);

            let pivot = a[(k, k)];
            for i in (k + 1)..4 {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = ZERO;
                for j in (k + 1)..4 {
                    let update = factor * a[(k, j)];
                    a[(i, j)] -= update;
                }
            }
        }

        Self {
            upper: a,
            col_perm,
            rank,
            residual_pivot,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Orthonormal (Euclidean) basis of the numerical null space.
    pub fn null_space(&self) -> Vec<CVector4> {
        let r = self.rank;
        let mut basis = Vec::with_capacity(4 - r);
        for free in r..4 {
            let mut x = [ZERO; 4];
            x[free] = ONE;
            for i in (0..r).rev() {
                let acc: Complex64 = ((i + 1)..4).map(|l| self.upper[(i, l)] * x[l]).sum();
                x[i] = -acc / self.upper[(i, i)];
            }
            let mut v = CVector4::zeros();
            for (slot, value) in x.iter().enumerate() {
                v[self.col_perm[slot]] = *value;
            }
            basis.push(v);
        }
        orthonormalize(basis)
    }
}

/// Modified Gram-Schmidt in the Euclidean inner product; drops vectors that
/// collapse below `1e-12` relative norm.
pub fn orthonormalize(vectors: Vec<CVector4>) -> Vec<CVector4> {
    let mut out: Vec<CVector4> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        let original = v.norm();
        for q in &out {
            let coeff = q.dotc(&v);
            v -= q * coeff;
        }
        let n = v.norm();
        if original > 0.0 && n > 1e-12 * original {
            out.push(v / Complex64::new(n, 0.0));
        }
    }
    out
}

/// Largest `|x_i y_j - x_j y_i|` over index pairs, after scaling both
/// vectors to unit Euclidean norm. Zero iff the vectors are proportional.
pub fn proportionality_residual(x: &CVector4, y: &CVector4) -> f64 {
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let cross = x[i] * y[j] - x[j] * y[i];
            worst = worst.max(cross.norm());
        }
    }
    worst / (nx * ny)
}
