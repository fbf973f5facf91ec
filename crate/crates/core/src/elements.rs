//! Spectral analysis of single elements of SU(3,1).
//!
//! Eigenvalues come from the characteristic quartic. When the quartic is
//! self-dual (real and palindromic, which real trace forces) the roots are
//! found in closed form through `s = t + 1/t`; otherwise a Durand–Kerner
//! iteration is used. Eigenvectors are read off the null space of `A − λI`
//! by complete-pivot elimination.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::hermitian::{herm_inner, herm_norm_sq, BoundaryPoint, FormError, GroupElement};
use crate::linalg::{form_inverse, max_norm, CMatrix4, CVector4, PivotedElimination, ONE, ZERO};
use crate::word::Word;

/// Half-width of the band around `|λ| = 1` treated as unit modulus, on the
/// log scale.
pub const DEFAULT_TOL_SPEC: f64 = 1e-7;
/// Rank threshold for `A − λI`, relative to `‖A‖_max`.
pub const DEFAULT_TOL_RANK: f64 = 1e-9;
/// Eigenpair residual bound `‖Av − λv‖ ≤ tol·‖A‖`.
pub const DEFAULT_TOL_EIGEN: f64 = 1e-8;
/// Conjugators produced here are certified at this level.
pub const CONJUGATOR_TOL: f64 = 1e-8;

// Roots closer than this (relative) are one eigenvalue.
const CLUSTER_TOL: f64 = 1e-6;
// Discriminants below this (relative) are treated as exact double roots.
const SNAP_TOL: f64 = 1e-12;
// Null-check tolerance for eigenvectors reported as boundary points.
const FIXED_POINT_TOL_NULL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElementError {
    #[error("no eigenvector reaches the residual bound (best {achieved:.3e})")]
    IllConditioned { achieved: f64 },
    #[error("classification is ambiguous at this tolerance: {0}")]
    Ambiguous(String),
    #[error("element is not loxodromic")]
    NotLoxodromic,
    #[error("trace is not real: |Im tr| = {im:.3e}")]
    NotRealTrace { im: f64 },
    #[error("middle eigenspace is degenerate")]
    EigenvalueCollision,
    #[error("attracting eigenvalue {value} is not a positive real")]
    NegativeDilation { value: Complex64 },
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Monic characteristic quartic, coefficients in ascending degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharPoly {
    #[serde(serialize_with = "serialize_coeffs")]
    coeffs: [Complex64; 5],
}

fn serialize_coeffs<S: serde::Serializer>(c: &[Complex64; 5], s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    c.map(|z| [z.re, z.im]).serialize(s)
}

impl CharPoly {
    /// From `[c0, c1, c2, c3]`; the leading coefficient is 1.
    pub fn from_lower(lower: [Complex64; 4]) -> Self {
        Self {
            coeffs: [lower[0], lower[1], lower[2], lower[3], ONE],
        }
    }

    /// `[c0, c1, c2, c3, 1]` for `t⁴ + c3 t³ + c2 t² + c1 t + c0`.
    pub fn coefficients(&self) -> &[Complex64; 5] {
        &self.coeffs
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * t + c)
    }

    fn derivative_at(&self, t: Complex64) -> Complex64 {
        let c = &self.coeffs;
        ((c[4] * 4.0 * t + c[3] * 3.0) * t + c[2] * 2.0) * t + c[1]
    }

    fn scale(&self) -> f64 {
        self.coeffs.iter().fold(1.0, |acc, c| acc.max(c.norm()))
    }
}

/// Characteristic polynomial by direct expansion into principal minors.
pub fn char_poly(a: &CMatrix4) -> CharPoly {
    let m = |i: usize, j: usize| a[(i, j)];
    let minor2 = |i: usize, j: usize| m(i, i) * m(j, j) - m(i, j) * m(j, i);
    let minor3 = |i: usize, j: usize, k: usize| {
        m(i, i) * (m(j, j) * m(k, k) - m(j, k) * m(k, j))
            - m(i, j) * (m(j, i) * m(k, k) - m(j, k) * m(k, i))
            + m(i, k) * (m(j, i) * m(k, j) - m(j, j) * m(k, i))
    };

    let e1 = a.trace();
    let e2 = minor2(0, 1) + minor2(0, 2) + minor2(0, 3) + minor2(1, 2) + minor2(1, 3) + minor2(2, 3);
    let e3 = minor3(0, 1, 2) + minor3(0, 1, 3) + minor3(0, 2, 3) + minor3(1, 2, 3);
    let e4 = a.determinant();
    CharPoly::from_lower([e4, -e3, e2, -e1])
}

/// Self-dual in the sense `t⁴·conj(χ(1/t̄)) = χ(t)` with real coefficients:
/// `c0 = 1`, `c1 = c̄3`, `c2` real, every coefficient real. Tolerance is
/// relative to the largest coefficient.
pub fn is_selfdual(p: &CharPoly, tol: f64) -> bool {
    let c = p.coefficients();
    let bound = tol * p.scale();
    (c[0] - ONE).norm() <= bound
        && (c[1] - c[3].conj()).norm() <= bound
        && c.iter().all(|z| z.im.abs() <= bound)
}

/// Roots of a self-dual quartic through `s = t + 1/t`:
/// `χ(t) = t²·(s² − τ s + (σ − 2))` with `τ = −c3`, `σ = c2`.
fn selfdual_roots(p: &CharPoly) -> [Complex64; 4] {
    let c = p.coefficients();
    let tau = -c[3].re;
    let sigma = c[2].re;
    let disc = tau * tau - 4.0 * (sigma - 2.0);
    let snap = SNAP_TOL * (tau * tau + 4.0 * (sigma - 2.0).abs() + 1.0);

    if disc.abs() <= snap {
        let [t1, t2] = reciprocal_pair(Complex64::new(tau / 2.0, 0.0));
        return [t1, t2, t1, t2];
    }
    if disc > 0.0 {
        let root = disc.sqrt();
        let s1 = 0.5 * (tau + tau.signum() * root);
        let s2 = if s1 != 0.0 { (sigma - 2.0) / s1 } else { -s1 };
        let [a, b] = reciprocal_pair(Complex64::new(s1, 0.0));
        let [c, d] = reciprocal_pair(Complex64::new(s2, 0.0));
        [a, b, c, d]
    } else {
        let s1 = Complex64::new(tau / 2.0, (-disc).sqrt() / 2.0);
        let [a, b] = reciprocal_pair(s1);
        [a, b, a.conj(), b.conj()]
    }
}

/// The two roots of `t² − s t + 1`, larger modulus first.
fn reciprocal_pair(s: Complex64) -> [Complex64; 2] {
    let disc = s * s - 4.0;
    if disc.norm() <= SNAP_TOL * (1.0 + s.norm_sqr()) {
        let t = s / 2.0;
        return [t, t];
    }
    if s.im == 0.0 && s.re.abs() < 2.0 {
        // Unit circle, exactly conjugate.
        let t = Complex64::new(s.re / 2.0, (4.0 - s.re * s.re).sqrt() / 2.0);
        return [t, t.conj()];
    }
    let root = disc.sqrt();
    let plus = (s + root) / 2.0;
    let minus = (s - root) / 2.0;
    let big = if plus.norm() >= minus.norm() { plus } else { minus };
    [big, ONE / big]
}

/// Durand–Kerner simultaneous iteration, then two Newton steps per root.
fn general_roots(p: &CharPoly) -> [Complex64; 4] {
    let radius = 1.0 + p.scale();
    let seed = Complex64::new(0.4, 0.9);
    let mut roots = [ZERO; 4];
    let mut power = ONE;
    for r in roots.iter_mut() {
        *r = power * radius * 0.5;
        power *= seed;
    }

    for _ in 0..1000 {
        let mut change: f64 = 0.0;
        for i in 0..4 {
            let mut denom = ONE;
            for j in 0..4 {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(f64::EPSILON, 0.0);
            }
            let step = p.eval(roots[i]) / denom;
            roots[i] -= step;
            change = change.max(step.norm());
        }
        if change <= 1e-15 * radius {
            break;
        }
    }

    for r in roots.iter_mut() {
        for _ in 0..2 {
            let d = p.derivative_at(*r);
            if d.norm() > 1e-12 * radius {
                let step = p.eval(*r) / d;
                if step.norm() < 1e-6 * radius {
                    *r -= step;
                }
            }
        }
    }
    roots
}

/// Roots of the characteristic quartic, using the self-dual reduction when
/// it applies.
pub fn quartic_roots(p: &CharPoly) -> [Complex64; 4] {
    if is_selfdual(p, 1e-9) {
        selfdual_roots(p)
    } else {
        general_roots(p)
    }
}

/// An eigenvalue with its algebraic multiplicity and an orthonormal basis
/// of its eigenspace.
#[derive(Debug, Clone, Serialize)]
pub struct Eigenspace {
    #[serde(with = "crate::json::scalar")]
    pub value: Complex64,
    pub multiplicity: usize,
    #[serde(skip)]
    pub vectors: Vec<CVector4>,
    /// `max ‖Av − λv‖` over the basis.
    pub residual: f64,
}

impl Eigenspace {
    pub fn is_defective(&self) -> bool {
        self.vectors.len() < self.multiplicity
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenDecomposition {
    /// All four eigenvalues with multiplicity.
    #[serde(skip)]
    pub eigenvalues: [Complex64; 4],
    pub spaces: Vec<Eigenspace>,
    /// True if the eigenvectors do not span `C⁴`.
    pub defective: bool,
    pub used_selfdual_path: bool,
}

impl EigenDecomposition {
    /// Flattened `(value, unit vector, residual)` triples; fewer than four
    /// when defective.
    pub fn pairs(&self) -> Vec<(Complex64, CVector4, f64)> {
        self.spaces
            .iter()
            .flat_map(|s| s.vectors.iter().map(move |v| (s.value, *v, s.residual)))
            .collect()
    }
}

fn cluster(roots: &[Complex64; 4]) -> Vec<(Complex64, usize)> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    'outer: for &r in roots {
        for g in groups.iter_mut() {
            if g.iter().any(|x| (x - r).norm() <= CLUSTER_TOL * x.norm().max(1.0)) {
                g.push(r);
                continue 'outer;
            }
        }
        groups.push(vec![r]);
    }
    groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            let mean = g.iter().sum::<Complex64>() / n as f64;
            (mean, n)
        })
        .collect()
}

/// Two steps of inverse iteration at the shift `value`, then a Rayleigh
/// quotient. Root-finding error in `value` does not limit the vector, only
/// the gap to the other eigenvalues does.
fn refine_simple_pair(a: &CMatrix4, v: CVector4, value: Complex64) -> (CVector4, Complex64) {
    let lu = (a - CMatrix4::identity() * value).lu();
    let start = v;
    let mut v = v;
    for _ in 0..2 {
        match lu.solve(&v) {
            Some(x) if x.iter().all(|z| z.is_finite()) && x.norm() > 0.0 => {
                v = x / Complex64::new(x.norm(), 0.0);
            }
            _ => break,
        }
    }
    // Keep the phase convention of the starting vector.
    let overlap = start.dotc(&v);
    if overlap.norm() > 0.0 {
        v *= overlap.conj() / overlap.norm();
    }
    let rayleigh = v.dotc(&(a * v));
    let refined = if (a * v - v * rayleigh).norm() <= (a * v - v * value).norm() {
        rayleigh
    } else {
        value
    };
    (v, refined)
}

/// Eigenpairs of `a`, each satisfying `‖Av − λv‖ ≤ tol·‖A‖_F`.
pub fn eigen_solve(a: &CMatrix4, tol: f64) -> Result<EigenDecomposition, ElementError> {
    let poly = char_poly(a);
    let used_selfdual_path = is_selfdual(&poly, 1e-9);
    let eigenvalues = quartic_roots(&poly);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let bound = tol * scale;
    let rank_threshold = DEFAULT_TOL_RANK * max_norm(a).max(1.0);

    let mut spaces = Vec::new();
    for (value, multiplicity) in cluster(&eigenvalues) {
        let shifted = a - CMatrix4::identity() * value;
        let mut threshold = rank_threshold;
        let mut vectors = PivotedElimination::new(&shifted, threshold).null_space();
        // An eigenvalue always has an eigenvector; widen the threshold up to
        // the residual bound if roundoff hid it.
        while vectors.is_empty() && threshold < bound {
            threshold *= 10.0;
            vectors = PivotedElimination::new(&shifted, threshold).null_space();
        }
        if vectors.is_empty() {
            let achieved = PivotedElimination::new(&shifted, 0.0).residual_pivot;
            return Err(ElementError::IllConditioned {
                achieved: achieved.max(threshold) / scale,
            });
        }
        vectors.truncate(multiplicity);
        let value = if multiplicity == 1 {
            let (v, refined) = refine_simple_pair(a, vectors[0], value);
            vectors[0] = v;
            refined
        } else {
            value
        };
        let residual = vectors
            .iter()
            .map(|v| (a * v - v * value).norm())
            .fold(0.0, f64::max);
        if residual > bound {
            return Err(ElementError::IllConditioned {
                achieved: residual / scale,
            });
        }
        spaces.push(Eigenspace {
            value,
            multiplicity,
            vectors,
            residual,
        });
    }

    let geometric: usize = spaces.iter().map(|s| s.vectors.len()).sum();
    Ok(EigenDecomposition {
        eigenvalues,
        spaces,
        defective: geometric < 4,
        used_selfdual_path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Loxodromic,
    Parabolic,
    Elliptic,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementType {
    pub kind: ElementKind,
    /// Boundary fixed points; for loxodromics the attracting one first.
    pub fixed_points: Vec<BoundaryPoint>,
    /// A negative vector fixed projectively (elliptic only).
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(serialize_with = "serialize_opt_vector")]
    pub interior_witness: Option<CVector4>,
}

fn serialize_opt_vector<S: serde::Serializer>(v: &Option<CVector4>, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    v.as_ref().map(crate::json::vector_repr).serialize(s)
}

/// Hermitian Gram matrix `B* J B` of the form restricted to `span(vectors)`,
/// with its eigen-decomposition (ascending eigenvalues).
fn restricted_form(vectors: &[CVector4]) -> (Vec<f64>, DMatrix<Complex64>) {
    let k = vectors.len();
    let gram = DMatrix::from_fn(k, k, |i, j| herm_inner(&vectors[j], &vectors[i]));
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vecs)
}

fn combine(vectors: &[CVector4], coeffs: impl Iterator<Item = Complex64>) -> CVector4 {
    let v: CVector4 = vectors.iter().zip(coeffs).map(|(v, c)| v * c).sum();
    v / Complex64::new(v.norm(), 0.0)
}

fn classify_decomposition(
    eig: &EigenDecomposition,
    tol_spec: f64,
) -> Result<ElementType, ElementError> {
    let logs: Vec<f64> = eig.spaces.iter().map(|s| s.value.norm().ln()).collect();
    let (hi_idx, hi) = logs
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one eigenvalue");
    let (lo_idx, lo) = logs
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one eigenvalue");
    let expanding = hi > tol_spec;
    let contracting = lo < -tol_spec;

    if expanding != contracting {
        return Err(ElementError::Ambiguous(format!(
            "eigenvalue moduli straddle the unit band (log|λ| in [{lo:.3e}, {hi:.3e}])"
        )));
    }

    if expanding {
        let (top, bottom) = (&eig.spaces[hi_idx], &eig.spaces[lo_idx]);
        if top.vectors.len() != 1 || bottom.vectors.len() != 1 {
            return Err(ElementError::Ambiguous(
                "attracting or repelling eigenspace is not a line".into(),
            ));
        }
        let attracting = BoundaryPoint::from_lift(top.vectors[0], FIXED_POINT_TOL_NULL)?;
        let repelling = BoundaryPoint::from_lift(bottom.vectors[0], FIXED_POINT_TOL_NULL)?;
        return Ok(ElementType {
            kind: ElementKind::Loxodromic,
            fixed_points: vec![attracting, repelling],
            interior_witness: None,
        });
    }

    if !eig.defective {
        for space in &eig.spaces {
            let (values, coeffs) = restricted_form(&space.vectors);
            if values[0] < -tol_spec {
                let w = combine(&space.vectors, coeffs.column(0).iter().copied());
                if herm_norm_sq(&w) < -tol_spec {
                    return Ok(ElementType {
                        kind: ElementKind::Elliptic,
                        fixed_points: Vec::new(),
                        interior_witness: Some(w),
                    });
                }
            }
        }
        return Err(ElementError::Ambiguous(
            "diagonalizable with unit eigenvalues but no negative eigenvector".into(),
        ));
    }

    let space = eig
        .spaces
        .iter()
        .find(|s| s.is_defective())
        .expect("defective decomposition has a defective space");
    let (values, coeffs) = restricted_form(&space.vectors);
    let null_idx = (0..values.len())
        .min_by(|&i, &j| values[i].abs().total_cmp(&values[j].abs()))
        .expect("eigenspace is nonempty");
    let v = combine(&space.vectors, coeffs.column(null_idx).iter().copied());
    let fixed = BoundaryPoint::from_lift(v, FIXED_POINT_TOL_NULL)?;
    Ok(ElementType {
        kind: ElementKind::Parabolic,
        fixed_points: vec![fixed],
        interior_witness: None,
    })
}

/// Loxodromic / parabolic / elliptic classification.
pub fn classify(a: &GroupElement, tol_spec: f64) -> Result<ElementType, ElementError> {
    let eig = eigen_solve(a.matrix(), DEFAULT_TOL_EIGEN)?;
    classify_decomposition(&eig, tol_spec)
}

/// Data `(u, θ, C)` with `C⁻¹AC = diag(u, e^{iθ}, e^{−iθ}, 1/u)`.
#[derive(Debug, Clone)]
pub struct LoxodromicNormalForm {
    pub u: f64,
    /// In `[0, π]`.
    pub theta: f64,
    pub conjugator: GroupElement,
    /// `‖C⁻¹AC − diag(u, e^{iθ}, e^{−iθ}, 1/u)‖_max`.
    pub residual: f64,
}

impl LoxodromicNormalForm {
    pub fn diagonal(&self) -> CMatrix4 {
        crate::linalg::diag([
            Complex64::new(self.u, 0.0),
            Complex64::from_polar(1.0, self.theta),
            Complex64::from_polar(1.0, -self.theta),
            Complex64::new(1.0 / self.u, 0.0),
        ])
    }
}

fn unit_positive(v: CVector4) -> CVector4 {
    v / Complex64::new(herm_norm_sq(&v).sqrt(), 0.0)
}

/// Conjugates a real-trace loxodromic into diagonal normal form.
///
/// `tol` bounds `|Im tr A|`.
pub fn normalize_loxodromic(
    a: &GroupElement,
    tol: f64,
) -> Result<LoxodromicNormalForm, ElementError> {
    let im = a.trace().im.abs();
    if im > tol {
        return Err(ElementError::NotRealTrace { im });
    }
    let eig = eigen_solve(a.matrix(), DEFAULT_TOL_EIGEN)?;
    let kind = classify_decomposition(&eig, DEFAULT_TOL_SPEC)?.kind;
    if kind != ElementKind::Loxodromic {
        return Err(ElementError::NotLoxodromic);
    }

    let by_modulus = |pick_max: bool| {
        let it = eig.spaces.iter().enumerate();
        let cmp = |x: &(usize, &Eigenspace), y: &(usize, &Eigenspace)| {
            x.1.value.norm().total_cmp(&y.1.value.norm())
        };
        if pick_max { it.max_by(cmp) } else { it.min_by(cmp) }.expect("nonempty")
    };
    let (top_idx, top) = by_modulus(true);
    let (bottom_idx, bottom) = by_modulus(false);
    if top.value.re <= 0.0 {
        return Err(ElementError::NegativeDilation { value: top.value });
    }
    let u = top.value.re;

    let middle: Vec<&Eigenspace> = eig
        .spaces
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != top_idx && *i != bottom_idx)
        .map(|(_, s)| s)
        .collect();
    let middle_dim: usize = middle.iter().map(|s| s.vectors.len()).sum();
    if middle_dim != 2 {
        return Err(ElementError::EigenvalueCollision);
    }

    // Split the rescaling to ⟨c1, c4⟩ = 1 evenly between the two null
    // vectors so neither amplifies its nullness error alone.
    let pairing = herm_inner(&top.vectors[0], &bottom.vectors[0]);
    let alpha = 1.0 / pairing.norm().sqrt();
    let c1 = top.vectors[0] * Complex64::new(alpha, 0.0);
    let c4 = bottom.vectors[0] / (pairing.conj() * alpha);

    let (mut c2, mut c3, mut theta) = if middle.len() == 2 {
        let (p, q) = (middle[0], middle[1]);
        let (p, q) = if p.value.arg() >= q.value.arg() { (p, q) } else { (q, p) };
        (unit_positive(p.vectors[0]), unit_positive(q.vectors[0]), p.value.arg())
    } else {
        // θ ∈ {0, π}: J-orthonormalize the 2-dimensional eigenspace.
        let s = middle[0];
        let b1 = unit_positive(s.vectors[0]);
        let b2 = s.vectors[1] - b1 * herm_inner(&s.vectors[1], &b1);
        (b1, unit_positive(b2), s.value.arg().abs())
    };
    if theta < 0.0 {
        std::mem::swap(&mut c2, &mut c3);
        theta = -theta;
    }
    theta = theta.min(PI);

    // Exact-arithmetic no-ops that remove the mixing between nearby middle
    // eigenvectors.
    let off_axis = |x: CVector4| x - c1 * herm_inner(&x, &c4) - c4 * herm_inner(&x, &c1);
    c2 = unit_positive(off_axis(c2));
    c3 = off_axis(c3);
    c3 = unit_positive(c3 - c2 * herm_inner(&c3, &c2));

    let mut c = CMatrix4::from_columns(&[c1, c2, c3, c4]);
    let phase = Complex64::from_polar(1.0, -c.determinant().arg() / 4.0);
    c *= phase;

    let conjugator = GroupElement::certify(c, Word::empty(), CONJUGATOR_TOL)?;
    let mut form = LoxodromicNormalForm {
        u,
        theta,
        conjugator,
        residual: 0.0,
    };
    let conjugated = form_inverse(&c) * a.matrix() * c;
    form.residual = max_norm(&(conjugated - form.diagonal()));
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, diag, I};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lox(u: f64, theta: f64) -> GroupElement {
        let m = diag([c(u, 0.0), Complex64::from_polar(1.0, theta), Complex64::from_polar(1.0, -theta), c(1.0 / u, 0.0)]);
        GroupElement::certify(m, Word::empty(), 1e-12).unwrap()
    }

    fn unipotent() -> GroupElement {
        let mut m = CMatrix4::identity();
        m[(0, 3)] = I;
        GroupElement::certify(m, Word::empty(), 1e-12).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn char_poly_of_identity() {
        let p = char_poly(&CMatrix4::identity());
        let expected = [1.0, -4.0, 6.0, -4.0, 1.0];
        for (got, want) in p.coefficients().iter().zip(expected) {
            assert_eq!(*got, c(want, 0.0));
        }
        assert!(is_selfdual(&p, 1e-12));
    }

    #[test]
    fn char_poly_of_diagonal() {
        // (t−2)(t−1/2)(t²+1) = t⁴ − 2.5t³ + 2t² − 2.5t + 1
        let p = char_poly(&diag([c(2.0, 0.0), I, -I, c(0.5, 0.0)]));
        let expected = [1.0, -2.5, 2.0, -2.5, 1.0];
        for (got, want) in p.coefficients().iter().zip(expected) {
            assert!(close(*got, c(want, 0.0), 1e-15));
        }
    }

    #[test]
    fn char_poly_of_normal_form_is_palindromic_and_real() {
        let p = char_poly(lox(3.0, PI / 3.0).matrix());
        let k = p.coefficients();
        assert!(close(k[0], k[4], 1e-14) && close(k[1], k[3], 1e-14));
        assert!(k.iter().all(|z| z.im.abs() < 1e-14));
        assert!(is_selfdual(&p, 1e-12));
    }

    #[test]
    fn selfdual_rejects_non_palindromic() {
        let p = CharPoly::from_lower([ONE, c(-1.0, 0.0), ONE, c(-1.0, -1.0)]);
        assert!(!is_selfdual(&p, 1e-9));
    }

    #[test]
    fn eigen_of_diagonal_loxodromic() {
        let eig = eigen_solve(lox(2.0, PI / 5.0).matrix(), DEFAULT_TOL_EIGEN).unwrap();
        assert!(eig.used_selfdual_path);
        assert!(!eig.defective);
        let want = [c(2.0, 0.0), Complex64::from_polar(1.0, PI / 5.0), Complex64::from_polar(1.0, -PI / 5.0), c(0.5, 0.0)];
        for w in want {
            let space = eig.spaces.iter().find(|s| close(s.value, w, 1e-12)).unwrap();
            assert_eq!(space.vectors.len(), 1);
            let v = space.vectors[0];
            let hot = (0..4).filter(|&i| v[i].norm() > 1e-12).count();
            assert_eq!(hot, 1, "standard basis eigenvector");
        }
    }

    #[test]
    fn eigen_of_unipotent_is_defective() {
        let eig = eigen_solve(unipotent().matrix(), DEFAULT_TOL_EIGEN).unwrap();
        assert_eq!(eig.spaces.len(), 1);
        assert_eq!(eig.spaces[0].multiplicity, 4);
        assert!(close(eig.spaces[0].value, ONE, 1e-15));
        assert_eq!(eig.spaces[0].vectors.len(), 3);
        assert!(eig.defective);
        assert_eq!(eig.pairs().len(), 3);
    }

    #[test]
    fn general_path_finds_distinct_roots() {
        // (t−1)(t−2)(t−i)(t+3i)
        let roots = [ONE, c(2.0, 0.0), I, c(0.0, -3.0)];
        let m = diag(roots);
        let p = char_poly(&m);
        assert!(!is_selfdual(&p, 1e-9));
        let found = quartic_roots(&p);
        for r in roots {
            assert!(found.iter().any(|f| close(*f, r, 1e-12)), "{r} not in {found:?}");
        }
    }

    #[test]
    fn classify_examples() {
        let l = classify(&lox(2.0, PI / 5.0), DEFAULT_TOL_SPEC).unwrap();
        assert_eq!(l.kind, ElementKind::Loxodromic);
        assert!(l.fixed_points[0].approx_eq(&BoundaryPoint::infinity(), 1e-12));
        assert!(l.fixed_points[1].approx_eq(&BoundaryPoint::origin(), 1e-12));

        let e = classify(&GroupElement::identity(), DEFAULT_TOL_SPEC).unwrap();
        assert_eq!(e.kind, ElementKind::Elliptic);
        assert!(herm_norm_sq(&e.interior_witness.unwrap()) < 0.0);

        let p = classify(&unipotent(), DEFAULT_TOL_SPEC).unwrap();
        assert_eq!(p.kind, ElementKind::Parabolic);
        assert_eq!(p.fixed_points.len(), 1);
        assert!(p.fixed_points[0].approx_eq(&BoundaryPoint::infinity(), 1e-12));
    }

    #[test]
    fn normal_form_of_diagonal_is_unit_scalar() {
        let nf = normalize_loxodromic(&lox(3.0, PI / 7.0), 1e-9).unwrap();
        assert!((nf.u - 3.0).abs() < 1e-13);
        assert!((nf.theta - PI / 7.0).abs() < 1e-13);
        let cm = nf.conjugator.matrix();
        let scalar = cm[(0, 0)];
        assert!((scalar.norm() - 1.0).abs() < 1e-13);
        assert!(max_norm(&(cm - CMatrix4::identity() * scalar)) < 1e-13);
        assert!(nf.residual < 1e-13);
    }

    #[test]
    fn normal_form_prefers_nonnegative_theta() {
        let nf = normalize_loxodromic(&lox(3.0, -PI / 7.0), 1e-9).unwrap();
        assert!((nf.theta - PI / 7.0).abs() < 1e-13);
        assert!(nf.residual < 1e-13);
    }

    #[test]
    fn normal_form_handles_collided_middle() {
        for theta in [0.0, PI] {
            let nf = normalize_loxodromic(&lox(1.5, theta), 1e-9).unwrap();
            assert!((nf.theta - theta).abs() < 1e-12, "{theta} -> {}", nf.theta);
            assert!(nf.residual < 1e-12);
        }
    }

    #[test]
    fn normal_form_errors() {
        assert_eq!(
            normalize_loxodromic(&GroupElement::identity(), 1e-9).unwrap_err(),
            ElementError::NotLoxodromic
        );
        // a = 2i, t = i/2 keeps a·t̄ = 1; the middle −i, −i restores det 1.
        let m = diag([c(0.0, 2.0), -I, -I, c(0.0, 0.5)]);
        let not_real = GroupElement::certify(m, Word::empty(), 1e-12).unwrap();
        assert!(matches!(
            normalize_loxodromic(&not_real, 1e-9),
            Err(ElementError::NotRealTrace { .. })
        ));
        let neg = diag([c(-2.0, 0.0), ONE, ONE, c(-0.5, 0.0)]);
        let neg = GroupElement::certify(neg, Word::empty(), 1e-12).unwrap();
        assert!(matches!(
            normalize_loxodromic(&neg, 1e-9),
            Err(ElementError::NegativeDilation { .. })
        ));
    }

    #[test]
    fn basis_vectors_have_expected_norms() {
        assert_eq!(herm_norm_sq(&basis_vector(0)), 0.0);
        assert_eq!(herm_norm_sq(&basis_vector(2)), 1.0);
    }
}
