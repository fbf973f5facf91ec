//! Group-level pipeline: trace screening, loxodromic normalization, branch
//! witness, and construction of a certified conjugator into SO(3,1) or
//! SU(1,1)×SU(2).
//!
//! The returned conjugator `D` satisfies: `D·M·D⁻¹` lies in the target group
//! for every checked word `M`. It is composed as `D = T·C⁻¹`, where `C` is
//! the loxodromic normalizer (`C⁻¹AC` diagonal) and `T` the case transform
//! (identity in the block case).

use log::{debug, info};
use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::config::AnalysisConfig;
use crate::elements::{
    classify, normalize_loxodromic, ElementError, ElementKind, LoxodromicNormalForm, CONJUGATOR_TOL,
};
use crate::hermitian::{herm_inner, is_su31, GroupElement};
use crate::linalg::{basis_vector, form_inverse, max_norm, CMatrix4, CVector4, ONE};
use crate::tracefield::{enumerate_words, trace_screen, TraceError, TraceVerdict};
use crate::word::Word;

/// Euclidean residual below which a candidate adds no new real direction.
const SPAN_RANK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("word {word} leaves the block form (residual {residual:.3e})")]
    BlockViolation { word: Word, residual: f64 },
    #[error("span is not totally real: Im<v{i}, v{j}> = {residual:.3e}")]
    NotTotallyReal { i: usize, j: usize, residual: f64 },
    #[error("real span has dimension {dim} < 4")]
    RankDeficient { dim: usize, basis: Vec<CVector4> },
    #[error("Gram matrix has signature ({positive}, {negative}), expected (3, 1)")]
    SignatureMismatch { positive: usize, negative: usize },
    #[error("conjugator fails certification (residual {residual:.3e})")]
    BadConjugator { residual: f64 },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Element(#[from] ElementError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    RealForm,
    CompactProductForm,
    NotRealTrace,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub name: &'static str,
    pub status: StageStatus,
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationResult {
    pub verdict: Verdict,
    #[serde(serialize_with = "serialize_conjugator")]
    pub conjugator: Option<GroupElement>,
    pub certificate: Option<f64>,
    pub witness_word: Option<Word>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub words_checked: u64,
    pub stages: Vec<StageRecord>,
}

fn serialize_conjugator<S: Serializer>(c: &Option<GroupElement>, s: S) -> Result<S::Ok, S::Error> {
    c.as_ref().map(|g| crate::json::matrix_repr(g.matrix())).serialize(s)
}

/// Report JSON: the result plus the configuration that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    #[serde(flatten)]
    pub result: &'a ClassificationResult,
    pub conjugator_composition: &'static str,
    pub config: &'a AnalysisConfig,
}

impl<'a> Report<'a> {
    pub fn new(result: &'a ClassificationResult, config: &'a AnalysisConfig) -> Self {
        Self {
            result,
            conjugator_composition: "D = T * C^-1; D * M * D^-1 lies in the target group",
            config,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseDecision {
    /// Corners purely imaginary: block group SU(1,1)×SU(2).
    CaseI,
    /// Corners real: SO(3,1).
    CaseII,
    Ambiguous,
}

/// Real basis of the ℝ-span of the vectors `B·e₄`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSpanBasis {
    /// Euclidean-orthonormal as vectors of ℝ⁸.
    pub vectors: Vec<CVector4>,
    /// `gram[i][j] = Re⟨v_j, v_i⟩`, i.e. the real part of `W*JW`.
    pub gram: Vec<Vec<f64>>,
    pub dim: usize,
    /// Largest `|Im⟨vᵢ, vⱼ⟩|` over basis pairs.
    pub reality_residual: f64,
}

#[derive(Debug, Clone)]
pub struct NormalizedGroup {
    /// `C⁻¹ g C` for each generator.
    pub generators: Vec<GroupElement>,
    pub conjugator: GroupElement,
    pub normal_form: LoxodromicNormalForm,
    /// Normalization was done on `−A` (negative attracting eigenvalue).
    pub negated: bool,
}

/// First word up to `max_length`, in enumeration order, that classifies as
/// loxodromic.
pub fn find_loxodromic(
    generators: &[GroupElement],
    max_length: usize,
    tol_spec: f64,
    budget: u64,
) -> Result<Option<GroupElement>, TraceError> {
    Ok(enumerate_words(generators, max_length, budget)?.find(|w| is_loxodromic(w, tol_spec)))
}

fn is_loxodromic(g: &GroupElement, tol_spec: f64) -> bool {
    matches!(classify(g, tol_spec), Ok(t) if t.kind == ElementKind::Loxodromic)
}

/// Conjugates the generators so that `a_lox` is diagonal.
///
/// A negative attracting eigenvalue is handled through `−A`, which lies in
/// SU(3,1) and has the same eigenvectors.
pub fn normalize_group(
    generators: &[GroupElement],
    a_lox: &GroupElement,
    tol_real: f64,
) -> Result<NormalizedGroup, ElementError> {
    let (normal_form, negated) = match normalize_loxodromic(a_lox, tol_real) {
        Err(ElementError::NegativeDilation { .. }) => {
            let minus = GroupElement::certify(-a_lox.matrix(), a_lox.word().clone(), a_lox.residual())?;
            (normalize_loxodromic(&minus, tol_real)?, true)
        }
        other => (other?, false),
    };
    let c = &normal_form.conjugator;
    Ok(NormalizedGroup {
        generators: generators.iter().map(|g| g.conjugate_by(c)).collect(),
        conjugator: c.clone(),
        normal_form,
        negated,
    })
}

fn corner_product(b: &GroupElement) -> Complex64 {
    b.entry(0, 3) * b.entry(3, 0)
}

/// First loxodromic word whose corners satisfy `|d·q| > tol_corner·‖B‖_max`.
pub fn find_branch_witness(words: &[GroupElement], tol_corner: f64, tol_spec: f64) -> Option<GroupElement> {
    words
        .iter()
        .filter(|b| corner_product(b).norm() > tol_corner * max_norm(b.matrix()))
        .find(|b| is_loxodromic(b, tol_spec))
        .cloned()
}

pub fn detect_case_from_corners(d: Complex64, q: Complex64, tol_rel: f64) -> CaseDecision {
    let imaginary = |z: Complex64| z.re.abs() <= tol_rel * z.norm();
    let real = |z: Complex64| z.im.abs() <= tol_rel * z.norm();
    if imaginary(d) && imaginary(q) {
        CaseDecision::CaseI
    } else if real(d) && real(q) {
        CaseDecision::CaseII
    } else {
        CaseDecision::Ambiguous
    }
}

pub fn detect_case(b0: &GroupElement, tol_rel: f64) -> CaseDecision {
    detect_case_from_corners(b0.entry(0, 3), b0.entry(3, 0), tol_rel)
}

/// Distance of `m` from SU(1,1)×SU(2): off-block entries, the corner block's
/// swap-form and determinant defects, and the middle block's unitarity and
/// determinant defects.
pub fn product_form_residual(m: &CMatrix4) -> f64 {
    const OFF_BLOCK: [(usize, usize); 8] = [(0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (2, 3), (3, 1), (3, 2)];
    let off = OFF_BLOCK.iter().map(|&(i, j)| m[(i, j)].norm()).fold(0.0, f64::max);

    let (a, d, q, t) = (m[(0, 0)], m[(0, 3)], m[(3, 0)], m[(3, 3)]);
    // K*SK for K = [[a, d], [q, t]] and S = [[0, 1], [1, 0]].
    let swap = [
        (q.conj() * a + a.conj() * q).norm(),
        (q.conj() * d + a.conj() * t - ONE).norm(),
        (t.conj() * a + d.conj() * q - ONE).norm(),
        (t.conj() * d + d.conj() * t).norm(),
        (a * t - d * q - ONE).norm(),
    ];

    let (f, g, n, r) = (m[(1, 1)], m[(1, 2)], m[(2, 1)], m[(2, 2)]);
    let unitary = [
        (f.norm_sqr() + n.norm_sqr() - 1.0).abs(),
        (g.norm_sqr() + r.norm_sqr() - 1.0).abs(),
        (f.conj() * g + n.conj() * r).norm(),
        (f * r - g * n - ONE).norm(),
    ];

    swap.iter().chain(unitary.iter()).fold(off, |acc, &x| acc.max(x))
}

/// `‖Im M‖_max`.
pub fn real_form_residual(m: &CMatrix4) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

/// Checks the block form on every word; returns the largest block residual.
pub fn case1_certify(words: &[GroupElement], tol: f64) -> Result<f64, EngineError> {
    let mut worst = 0.0_f64;
    for w in words {
        let residual = product_form_residual(w.matrix());
        if residual > tol {
            return Err(EngineError::BlockViolation {
                word: w.word().clone(),
                residual,
            });
        }
        worst = worst.max(residual);
    }
    Ok(worst)
}

fn to_real8(v: &CVector4) -> [f64; 8] {
    let mut out = [0.0; 8];
    for i in 0..4 {
        out[2 * i] = v[i].re;
        out[2 * i + 1] = v[i].im;
    }
    out
}

fn from_real8(x: &[f64; 8]) -> CVector4 {
    CVector4::from_fn(|i, _| Complex64::new(x[2 * i], x[2 * i + 1]))
}

fn dot8(x: &[f64; 8], y: &[f64; 8]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Real span of `{B·e₄}` over `words` together with `e₄` itself, via
/// column-pivoted Gram–Schmidt on the eight real coordinates.
///
/// Pivoting runs one word length at a time, shortest first: long words
/// carry more roundoff relative to `B·e₄`, so they only contribute
/// directions the short ones lack. A totally real subspace has real
/// dimension at most 4, so at most four directions are taken; the remaining
/// candidates are left to the word-level certificate.
pub fn case2_build_real_span(words: &[GroupElement], tol: f64) -> Result<RealSpanBasis, EngineError> {
    let e4 = basis_vector(3);
    let mut candidates: Vec<(usize, [f64; 8])> = std::iter::once((0, e4))
        .chain(words.iter().map(|w| (w.word().len(), w.apply(&e4))))
        .filter_map(|(len, v)| {
            let n = v.norm();
            (n > 0.0).then(|| (len, to_real8(&(v / Complex64::new(n, 0.0)))))
        })
        .collect();
    let max_len = candidates.iter().map(|c| c.0).max().unwrap_or(0);

    let mut basis: Vec<[f64; 8]> = Vec::new();
    for level in 0..=max_len {
        while basis.len() < 4 {
            let best = candidates
                .iter()
                .enumerate()
                .filter(|(_, c)| c.0 <= level)
                .map(|(k, c)| (k, dot8(&c.1, &c.1).sqrt()))
                .max_by(|x, y| x.1.total_cmp(&y.1));
            let Some((k, norm)) = best.filter(|b| b.1 > SPAN_RANK_TOL) else { break };
            let chosen = candidates.swap_remove(k).1.map(|x| x / norm);
            for (_, c) in candidates.iter_mut() {
                let p = dot8(c, &chosen);
                for (ci, bi) in c.iter_mut().zip(&chosen) {
                    *ci -= p * bi;
                }
            }
            basis.push(chosen);
        }
    }

    let vectors: Vec<CVector4> = basis.iter().map(from_real8).collect();
    let dim = vectors.len();
    let mut gram = vec![vec![0.0; dim]; dim];
    let mut reality_residual = 0.0_f64;
    let mut worst_pair = (0, 0);
    for i in 0..dim {
        for j in 0..dim {
            let h = herm_inner(&vectors[j], &vectors[i]);
            gram[i][j] = h.re;
            if h.im.abs() > reality_residual {
                reality_residual = h.im.abs();
                worst_pair = (i, j);
            }
        }
    }
    if reality_residual > tol {
        return Err(EngineError::NotTotallyReal {
            i: worst_pair.0,
            j: worst_pair.1,
            residual: reality_residual,
        });
    }
    debug!("real span: dim {dim}, reality residual {reality_residual:.3e}");
    if dim < 4 {
        return Err(EngineError::RankDeficient { dim, basis: vectors });
    }
    Ok(RealSpanBasis {
        vectors,
        gram,
        dim,
        reality_residual,
    })
}

/// Real change of basis `Q` with `Qᵀ J Q = diag(1, 1, 1, −1)`; `Q = Qᵀ = Q⁻¹`.
fn diagonal_frame() -> Matrix4<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix4::new(
        h, 0.0, 0.0, h, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        h, 0.0, 0.0, -h,
    )
}

/// Builds `D` with `D·B·D⁻¹` real for every `B` preserving the span.
///
/// With `W` the basis as columns and `G = W*JW`, a real congruence `R`
/// gives `(WR)*J(WR) = J`; then `D = (WR)⁻¹`, rescaled to determinant 1.
/// `tol` is the smallest accepted `|λ|` of `G`.
pub fn case2_conjugator(basis: &RealSpanBasis, tol: f64) -> Result<GroupElement, EngineError> {
    if basis.dim != 4 {
        return Err(EngineError::RankDeficient {
            dim: basis.dim,
            basis: basis.vectors.clone(),
        });
    }
    let g = Matrix4::from_fn(|i, j| 0.5 * (basis.gram[i][j] + basis.gram[j][i]));
    let eig = SymmetricEigen::new(g);
    let positive: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] > tol).collect();
    let negative: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] < -tol).collect();
    if positive.len() != 3 || negative.len() != 1 {
        return Err(EngineError::SignatureMismatch {
            positive: positive.len(),
            negative: negative.len(),
        });
    }

    // Columns scaled to unit |λ|, positive first: SᵀGS = diag(1, 1, 1, −1).
    let mut s = Matrix4::<f64>::zeros();
    for (col, &k) in positive.iter().chain(negative.iter()).enumerate() {
        let scale = eig.eigenvalues[k].abs().sqrt();
        s.set_column(col, &(eig.eigenvectors.column(k) / scale));
    }
    let r = s * diagonal_frame();

    let w = CMatrix4::from_columns(&basis.vectors);
    let e = w * r.map(|x| Complex64::new(x, 0.0));
    let e_inv = form_inverse(&e);
    let phase = Complex64::from_polar(1.0, e.determinant().arg() / 4.0);
    let d = e_inv * phase;

    let membership = is_su31(&d, CONJUGATOR_TOL);
    if !membership.member {
        return Err(EngineError::BadConjugator {
            residual: membership.residual,
        });
    }
    Ok(GroupElement::certify(d, Word::empty(), CONJUGATOR_TOL).expect("checked above"))
}

struct Pipeline {
    stages: Vec<StageRecord>,
    words_checked: u64,
}

impl Pipeline {
    fn ok(&mut self, name: &'static str, residual: Option<f64>, detail: Option<String>) {
        debug!("stage {name}: ok");
        self.stages.push(StageRecord {
            name,
            status: StageStatus::Ok,
            residual,
            detail,
        });
    }

    fn inconclusive(mut self, name: &'static str, reason: String, certificate: Option<f64>) -> ClassificationResult {
        info!("stage {name} failed: {reason}");
        self.stages.push(StageRecord {
            name,
            status: StageStatus::Failed,
            residual: certificate,
            detail: Some(reason.clone()),
        });
        ClassificationResult {
            verdict: Verdict::Inconclusive,
            conjugator: None,
            certificate,
            witness_word: None,
            reason: Some(format!("{name}: {reason}")),
            words_checked: self.words_checked,
            stages: self.stages,
        }
    }
}

/// Full pipeline. Every failure is encoded in the verdict.
pub fn classify_group(generators: &[GroupElement], config: &AnalysisConfig) -> ClassificationResult {
    let mut p = Pipeline {
        stages: Vec::new(),
        words_checked: 0,
    };

    let words: Vec<GroupElement> = match enumerate_words(generators, config.max_word_length, config.budget) {
        Ok(it) => it.collect(),
        Err(e) => return p.inconclusive("enumerate_words", e.to_string(), None),
    };

    let screen = match trace_screen(generators, config.max_word_length, config.tol_real, config.budget) {
        Ok(r) => r,
        Err(e) => return p.inconclusive("trace_screen", e.to_string(), None),
    };
    p.words_checked = screen.words_checked;
    if screen.verdict == TraceVerdict::NotReal {
        p.stages.push(StageRecord {
            name: "trace_screen",
            status: StageStatus::Failed,
            residual: Some(screen.max_im_trace),
            detail: None,
        });
        return ClassificationResult {
            verdict: Verdict::NotRealTrace,
            conjugator: None,
            certificate: Some(screen.max_im_trace),
            witness_word: screen.witness_word,
            reason: None,
            words_checked: p.words_checked,
            stages: p.stages,
        };
    }
    p.ok("trace_screen", Some(screen.max_im_trace), None);

    let mut normalized = None;
    let mut last_error = String::from("no loxodromic word");
    for a in words.iter().filter(|w| is_loxodromic(w, config.tol_spec)) {
        match normalize_group(generators, a, config.tol_real) {
            Ok(n) => {
                normalized = Some((a.word().clone(), n));
                break;
            }
            Err(e) => {
                debug!("cannot normalize {}: {e}", a.word());
                last_error = format!("{}: {e}", a.word());
            }
        }
    }
    let Some((a_word, norm)) = normalized else {
        return p.inconclusive("find_loxodromic", last_error, None);
    };
    p.ok("find_loxodromic", None, Some(a_word.to_string()));
    p.ok(
        "normalize_group",
        Some(norm.normal_form.residual),
        norm.negated.then(|| "normalized the negative".to_string()),
    );

    let c = &norm.conjugator;
    let normalized_words: Vec<GroupElement> = words.iter().map(|w| w.conjugate_by(c)).collect();

    let Some(b0) = find_branch_witness(&normalized_words, config.tol_corner, config.tol_spec) else {
        return p.inconclusive(
            "find_branch_witness",
            "every loxodromic word shares a fixed point with the normalized axis".into(),
            None,
        );
    };
    p.ok("find_branch_witness", Some(corner_product(&b0).norm()), Some(b0.word().to_string()));

    let case = detect_case(&b0, config.tol_rel);
    let c_inv = c.inverse();
    let (verdict, conjugator) = match case {
        CaseDecision::Ambiguous => {
            let reason = format!("corners d = {}, q = {} are neither real nor imaginary", b0.entry(0, 3), b0.entry(3, 0));
            return p.inconclusive("detect_case", reason, None);
        }
        CaseDecision::CaseI => {
            p.ok("detect_case", None, Some("block".into()));
            match case1_certify(&normalized_words, config.tol_certify) {
                Ok(r) => p.ok("case1_certify", Some(r), None),
                Err(e) => return p.inconclusive("case1_certify", e.to_string(), None),
            }
            (Verdict::CompactProductForm, c_inv)
        }
        CaseDecision::CaseII => {
            p.ok("detect_case", None, Some("real".into()));
            let basis = match case2_build_real_span(&normalized_words, config.tol_rel) {
                Ok(b) => b,
                Err(e) => return p.inconclusive("case2_build_real_span", e.to_string(), None),
            };
            p.ok("case2_build_real_span", Some(basis.reality_residual), None);
            let t = match case2_conjugator(&basis, config.tol_rel) {
                Ok(t) => t,
                Err(e) => return p.inconclusive("case2_conjugator", e.to_string(), None),
            };
            p.ok("case2_conjugator", Some(t.residual()), None);
            (Verdict::RealForm, t.compose(&c_inv))
        }
    };

    let membership = is_su31(conjugator.matrix(), CONJUGATOR_TOL);
    if !membership.member {
        return p.inconclusive(
            "certify",
            format!("conjugator residual {:.3e}", membership.residual),
            Some(membership.residual),
        );
    }

    let d = conjugator.matrix();
    let d_inv = form_inverse(d);
    let residual_of = |m: &CMatrix4| match verdict {
        Verdict::RealForm => real_form_residual(m),
        _ => product_form_residual(m),
    };
    let certificate = words
        .iter()
        .map(|w| residual_of(&(d * w.matrix() * d_inv)))
        .fold(0.0, f64::max);
    p.words_checked = words.len() as u64;
    if certificate > config.tol_certify {
        return p.inconclusive(
            "certify",
            format!("certificate {certificate:.3e} exceeds {:.1e}", config.tol_certify),
            Some(certificate),
        );
    }
    p.ok("certify", Some(certificate), None);

    ClassificationResult {
        verdict,
        conjugator: Some(conjugator),
        certificate: Some(certificate),
        witness_word: None,
        reason: None,
        words_checked: p.words_checked,
        stages: p.stages,
    }
}
