//! Seeded generator sets with known ground truth.
//!
//! * `real_form`: random elements of SO(3,1) (real matrices preserving the
//!   form), conjugated by a random element of SU(3,1).
//! * `product_form`: random elements of the block group SU(1,1)×SU(2),
//!   conjugated likewise.
//! * `generic`: random elements of SU(3,1).
//!
//! Random elements are built in the frame where the form is
//! `diag(1, 1, 1, −1)`: a perturbation of the identity is Gram–Schmidt
//! orthonormalized with respect to that form (negative vector first), then
//! carried back to the `J` frame and phase-corrected to determinant 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::hermitian::GroupElement;
use crate::linalg::{form_inverse, CMatrix4, CVector4, ONE, ZERO};
use crate::word::Word;

/// Membership tolerance every generated matrix is certified at.
pub const CORPUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    RealForm,
    ProductForm,
    Generic,
}

impl CorpusKind {
    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::RealForm => "real_form",
            CorpusKind::ProductForm => "product_form",
            CorpusKind::Generic => "generic",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real_form" | "real-form" => Ok(CorpusKind::RealForm),
            "product_form" | "product-form" => Ok(CorpusKind::ProductForm),
            "generic" => Ok(CorpusKind::Generic),
            other => Err(format!("unknown corpus kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub kind: CorpusKind,
    pub seed: u64,
    /// Generators as handed to the analysis.
    pub generators: Vec<GroupElement>,
    /// Generators before conjugation (equal to `generators` for `generic`).
    pub base_generators: Vec<GroupElement>,
    /// `P` with `generators[i] = P · base[i] · P⁻¹`.
    pub conjugator: Option<GroupElement>,
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng)) * FRAC_1_SQRT_2
}

/// Orthogonal change of basis with `Qᵀ J Q = diag(1, 1, 1, −1)`; `Q = Q⁻¹`.
fn diagonal_frame() -> CMatrix4 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut q = CMatrix4::zeros();
    q[(0, 0)] = h;
    q[(3, 0)] = h;
    q[(1, 1)] = ONE;
    q[(2, 2)] = ONE;
    q[(0, 3)] = h;
    q[(3, 3)] = -h;
    q
}

fn diag_form(x: &CVector4, y: &CVector4) -> Complex64 {
    x[0] * y[0].conj() + x[1] * y[1].conj() + x[2] * y[2].conj() - x[3] * y[3].conj()
}

// Columns whose form norm falls below this in modulus are resampled; it
// bounds how far normalization can inflate a column.
const MIN_FORM_NORM: f64 = 0.25;

/// Orthonormalizes the columns of `x` for `diag(1,1,1,−1)`, treating the
/// last column as the negative one. `None` if the signature bookkeeping
/// fails (the last column is not negative, or a column nearly collapses).
fn orthonormalize_indefinite(x: &CMatrix4) -> Option<CMatrix4> {
    let mut cols: Vec<CVector4> = Vec::with_capacity(4);
    let negative = x.column(3).into_owned();
    let n = diag_form(&negative, &negative).re;
    if n > -MIN_FORM_NORM {
        return None;
    }
    cols.push(negative / Complex64::new((-n).sqrt(), 0.0));

    for j in 0..3 {
        let mut v = x.column(j).into_owned();
        for f in &cols {
            let coeff = diag_form(&v, f) / diag_form(f, f);
            v -= f * coeff;
        }
        let n = diag_form(&v, &v).re;
        if n < MIN_FORM_NORM {
            return None;
        }
        cols.push(v / Complex64::new(n.sqrt(), 0.0));
    }
    // Positive columns first, negative last.
    Some(CMatrix4::from_columns(&[cols[1], cols[2], cols[3], cols[0]]))
}

fn random_isometry<R: Rng + ?Sized>(rng: &mut R, spread: f64, real: bool) -> CMatrix4 {
    let q = diagonal_frame();
    loop {
        let perturbation = CMatrix4::from_fn(|_, _| {
            if real {
                Complex64::new(gaussian(rng), 0.0)
            } else {
                complex_gaussian(rng)
            }
        });
        let Some(mut y) = orthonormalize_indefinite(&(CMatrix4::identity() + perturbation * Complex64::new(spread, 0.0)))
        else {
            continue;
        };
        if real {
            if y.determinant().re < 0.0 {
                let flipped = -y.column(0).into_owned();
                y.set_column(0, &flipped);
            }
            return q * y * q;
        }
        let m = q * y * q;
        let phase = Complex64::from_polar(1.0, -m.determinant().arg() / 4.0);
        return m * phase;
    }
}

/// Random element of SU(3,1).
pub fn random_su31<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> CMatrix4 {
    random_isometry(rng, spread, false)
}

/// Random real element of SU(3,1), i.e. of SO(3,1) for this form.
pub fn random_so31<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> CMatrix4 {
    random_isometry(rng, spread, true)
}

fn rotation2(angle: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle.sin_cos();
    [[c, -s], [s, c]]
}

fn mul2(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Random element of SU(1,1)×SU(2): corner block on indices {1, 4}, unitary
/// block on {2, 3}. The corner block is `diag(1, i)·R·diag(1, −i)` for a
/// hyperbolic `R ∈ SL(2, ℝ)` with translation parameter in `rapidity`.
pub fn random_product_block<R: Rng + ?Sized>(rng: &mut R, rapidity: (f64, f64)) -> CMatrix4 {
    let r = rng.random_range(rapidity.0..rapidity.1);
    let boost = [[r.exp(), 0.0], [0.0, (-r).exp()]];
    let real = mul2(
        mul2(rotation2(rng.random_range(0.0..2.0 * PI)), boost),
        rotation2(rng.random_range(0.0..2.0 * PI)),
    );

    let mut quaternion = [0.0; 4];
    for x in quaternion.iter_mut() {
        *x = gaussian(rng);
    }
    let norm = quaternion.iter().map(|x| x * x).sum::<f64>().sqrt();
    let alpha = Complex64::new(quaternion[0], quaternion[1]) / norm;
    let beta = Complex64::new(quaternion[2], quaternion[3]) / norm;

    let mut m = CMatrix4::zeros();
    m[(0, 0)] = Complex64::new(real[0][0], 0.0);
    m[(0, 3)] = Complex64::new(0.0, -real[0][1]);
    m[(3, 0)] = Complex64::new(0.0, real[1][0]);
    m[(3, 3)] = Complex64::new(real[1][1], 0.0);
    m[(1, 1)] = alpha;
    m[(1, 2)] = -beta.conj();
    m[(2, 1)] = beta;
    m[(2, 2)] = alpha.conj();
    m
}

fn certified(m: CMatrix4) -> GroupElement {
    GroupElement::certify(m, Word::empty(), CORPUS_TOL)
        .expect("corpus recipes produce members of SU(3,1)")
}

fn conjugate_all(base: &[GroupElement], p: &GroupElement) -> Vec<GroupElement> {
    let p_inv = form_inverse(p.matrix());
    base.iter()
        .map(|g| certified(p.matrix() * g.matrix() * p_inv))
        .collect()
}

/// Builds the two-generator corpus of the given kind.
pub fn generate(kind: CorpusKind, seed: u64) -> Corpus {
    // Salt the stream by kind so different kinds with one seed differ.
    let salt = match kind {
        CorpusKind::RealForm => 0x5eed_0001,
        CorpusKind::ProductForm => 0x5eed_0002,
        CorpusKind::Generic => 0x5eed_0003,
    };
    let mut rng = rng_from_seed(seed ^ salt);
    match kind {
        CorpusKind::Generic => {
            let gens: Vec<GroupElement> = (0..2).map(|_| certified(random_su31(&mut rng, 0.8))).collect();
            Corpus {
                kind,
                seed,
                generators: gens.clone(),
                base_generators: gens,
                conjugator: None,
            }
        }
        CorpusKind::RealForm | CorpusKind::ProductForm => {
            let base: Vec<GroupElement> = (0..2)
                .map(|_| {
                    certified(match kind {
                        CorpusKind::RealForm => random_so31(&mut rng, 0.4),
                        _ => random_product_block(&mut rng, (0.3, 0.8)),
                    })
                })
                .collect();
            let p = certified(random_su31(&mut rng, 0.3));
            Corpus {
                kind,
                seed,
                generators: conjugate_all(&base, &p),
                base_generators: base,
                conjugator: Some(p),
            }
        }
    }
}

/// Zero matrix helper kept for symmetry with the block layout.
pub fn is_product_block(m: &CMatrix4, tol: f64) -> bool {
    let off = [(0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (2, 3), (3, 1), (3, 2)];
    off.iter().all(|&(i, j)| (m[(i, j)] - ZERO).norm() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::is_su31;

    #[test]
    fn recipes_produce_members() {
        let mut rng = rng_from_seed(7);
        for _ in 0..50 {
            assert!(is_su31(&random_su31(&mut rng, 0.8), 1e-10).member);
            let real = random_so31(&mut rng, 0.8);
            assert!(is_su31(&real, 1e-10).member);
            assert!(real.iter().all(|z| z.im == 0.0));
            let block = random_product_block(&mut rng, (0.4, 1.0));
            assert!(is_su31(&block, 1e-10).member);
            assert!(is_product_block(&block, 0.0));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in [CorpusKind::RealForm, CorpusKind::ProductForm, CorpusKind::Generic] {
            let a = generate(kind, 3);
            let b = generate(kind, 3);
            assert_eq!(a.generators, b.generators);
            assert_ne!(generate(kind, 4).generators, a.generators);
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in [CorpusKind::RealForm, CorpusKind::ProductForm, CorpusKind::Generic] {
            assert_eq!(kind.name().parse::<CorpusKind>().unwrap(), kind);
        }
        assert!("mystery".parse::<CorpusKind>().is_err());
    }
}
