use std::f64::consts::FRAC_PI_2;

use chk_core::cartan::{cartan_invariant, BoundaryTriple};
use chk_core::corpus::{generate, random_su31, rng_from_seed, CorpusKind};
use chk_core::elements::{
    char_poly, classify, eigen_solve, normalize_loxodromic, ElementKind, DEFAULT_TOL_EIGEN, DEFAULT_TOL_SPEC,
};
use chk_core::engine::{classify_group, product_form_residual, real_form_residual, Verdict};
use chk_core::hermitian::{
    heisenberg_mul, herm_inner, is_su31, membership_residual, siegel_embed, verify_inverse_identities,
    BoundaryPoint, GroupElement, HeisenbergPoint, HorosphericalPoint,
};
use chk_core::linalg::{diag, form_inverse, proportionality_residual, CMatrix4, CVector4};
use chk_core::tracefield::{enumerate_words, corner_pair_branch, trace_reality_report, CornerPairBranch, TraceVerdict};
use chk_core::{AnalysisConfig, Word};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex(scale: f64) -> impl Strategy<Value = Complex64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| Complex64::new(re, im))
}

fn vector(scale: f64) -> impl Strategy<Value = CVector4> {
    prop::array::uniform4(complex(scale)).prop_map(|a| CVector4::new(a[0], a[1], a[2], a[3]))
}

fn element(seed: u64) -> GroupElement {
    let mut rng = rng_from_seed(seed);
    GroupElement::certify(random_su31(&mut rng, 0.8), Word::empty(), 1e-9).unwrap()
}

fn boundary_vector() -> impl Strategy<Value = CVector4> {
    (complex(2.0), complex(2.0), -3.0..3.0f64)
        .prop_map(|(z1, z2, u)| siegel_embed(&HorosphericalPoint::boundary([z1, z2], u)))
}

fn heisenberg() -> impl Strategy<Value = HeisenbergPoint> {
    (complex(2.0), complex(2.0), -2.0..2.0f64).prop_map(|(z1, z2, u)| HeisenbergPoint::new([z1, z2], u))
}

fn triple(v: [CVector4; 3]) -> Option<BoundaryTriple> {
    let p = |x: CVector4| BoundaryPoint::from_lift(x, 1e-8).ok();
    BoundaryTriple::new(p(v[0])?, p(v[1])?, p(v[2])?).ok()
}

fn real_trace_element(seed: u64, kind: CorpusKind) -> GroupElement {
    let corpus = generate(kind, seed);
    let words: Vec<GroupElement> = enumerate_words(&corpus.generators, 2, 1000).unwrap().collect();
    words[(seed % words.len() as u64) as usize].clone()
}

fn kind_of(flag: bool) -> CorpusKind {
    if flag {
        CorpusKind::RealForm
    } else {
        CorpusKind::ProductForm
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inner_product_is_conjugate_symmetric(z in vector(3.0), w in vector(3.0)) {
        let d = herm_inner(&w, &z) - herm_inner(&z, &w).conj();
        prop_assert!(d.norm() <= 1e-15 * (1.0 + z.norm() * w.norm()));
    }

    #[test]
    fn inner_product_is_linear_in_the_first_slot(z in vector(3.0), w in vector(3.0), a in complex(3.0)) {
        let d = herm_inner(&(z * a), &w) - a * herm_inner(&z, &w);
        prop_assert!(d.norm() <= 1e-12 * (1.0 + z.norm() * w.norm() * a.norm()));
    }

    #[test]
    fn siegel_image_has_norm_minus_two_v(z1 in complex(3.0), z2 in complex(3.0), u in -5.0..5.0f64, v in 0.0..10.0f64) {
        let psi = siegel_embed(&HorosphericalPoint::new([z1, z2], u, v));
        prop_assert!((herm_inner(&psi, &psi) + 2.0 * v).norm() <= 1e-10 * (1.0 + psi.norm_squared()));
    }

    #[test]
    fn heisenberg_group_axioms(a in heisenberg(), b in heisenberg(), c in heisenberg()) {
        let close = |p: &HeisenbergPoint, q: &HeisenbergPoint| {
            (p.z[0] - q.z[0]).norm().max((p.z[1] - q.z[1]).norm()).max((p.u - q.u).abs()) <= 1e-12
        };
        let e = HeisenbergPoint::identity();
        prop_assert!(close(&heisenberg_mul(&heisenberg_mul(&a, &b), &c), &heisenberg_mul(&a, &heisenberg_mul(&b, &c))));
        prop_assert!(close(&heisenberg_mul(&a, &e), &a));
        prop_assert!(close(&heisenberg_mul(&a.inverse(), &a), &e));
    }

    #[test]
    fn cartan_invariant_properties(
        v in prop::array::uniform3(boundary_vector()),
        scales in prop::array::uniform3((0.1..10.0f64, -3.0..3.0f64)),
        seed in any::<u64>(),
    ) {
        let Some(t) = triple(v) else { return Ok(()) };
        let a = cartan_invariant(&t);
        prop_assert!((-FRAC_PI_2..=FRAC_PI_2).contains(&a));

        let scaled = [0, 1, 2].map(|i| v[i] * Complex64::from_polar(scales[i].0, scales[i].1));
        prop_assert!((cartan_invariant(&triple(scaled).unwrap()) - a).abs() <= 1e-12);

        for order in [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]] {
            let p = triple(order.map(|i| v[i])).unwrap();
            prop_assert!((cartan_invariant(&p).abs() - a.abs()).abs() <= 1e-12);
        }

        let g = element(seed);
        let moved = triple(v.map(|x| g.apply(&x))).unwrap();
        prop_assert!((cartan_invariant(&moved) - a).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_residuals_stay_small(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (element(s1), element(s2));
        let input = a.residual().max(b.residual()).max(1e-15);
        prop_assert!(a.compose(&b).residual() <= 10.0 * input * (1.0 + chk_core::linalg::max_norm(a.matrix()) * chk_core::linalg::max_norm(b.matrix())));
        prop_assert!(is_su31(a.inverse().matrix(), 1e-9).member);
        prop_assert!(is_su31(a.compose(&b).matrix(), 1e-9).member);
    }

    #[test]
    fn inverse_identities_hold(seed in any::<u64>()) {
        for r in verify_inverse_identities(element(seed).matrix()) {
            prop_assert!(r.residual <= 1e-10, "{}: {}", r.name, r.residual);
        }
    }

    #[test]
    fn char_poly_matches_determinant(seed in any::<u64>(), ts in prop::array::uniform8(complex(2.0))) {
        let a = element(seed);
        let p = char_poly(a.matrix());
        for t in ts {
            let direct = (CMatrix4::identity() * t - a.matrix()).determinant();
            prop_assert!((p.eval(t) - direct).norm() <= 1e-9 * (1.0 + direct.norm()).max(p.eval(t).norm()));
        }
    }

    #[test]
    fn real_trace_spectra_are_paired(seed in 1u64..10_000, real in any::<bool>()) {
        let g = real_trace_element(seed, kind_of(real));
        let eig = eigen_solve(g.matrix(), DEFAULT_TOL_EIGEN).unwrap();
        for l in eig.eigenvalues {
            let dual = Complex64::new(1.0, 0.0) / l.conj();
            let err = eig.eigenvalues.iter().map(|m| (m - dual).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(err <= 1e-8 * dual.norm().max(1.0));
        }
    }

    #[test]
    fn reported_fixed_points_are_fixed(seed in any::<u64>()) {
        let g = element(seed);
        if let Ok(t) = classify(&g, DEFAULT_TOL_SPEC) {
            for x in &t.fixed_points {
                prop_assert!(proportionality_residual(&g.apply(x.lift()), x.lift()) <= 1e-8);
            }
        }
    }

    #[test]
    fn normal_form_is_certified(seed in any::<u64>(), u in 1.2..5.0f64, theta in 0.05..3.1f64) {
        let d = diag([
            Complex64::new(u, 0.0),
            Complex64::from_polar(1.0, theta),
            Complex64::from_polar(1.0, -theta),
            Complex64::new(1.0 / u, 0.0),
        ]);
        let p = element(seed);
        let a = GroupElement::certify(p.matrix() * d * form_inverse(p.matrix()), Word::empty(), 1e-8).unwrap();
        let nf = normalize_loxodromic(&a, 1e-8).unwrap();
        prop_assert!(nf.residual <= 1e-8);
        prop_assert!(is_su31(nf.conjugator.matrix(), 1e-8).member);
        prop_assert!((nf.u - u).abs() <= 1e-8 * u);
    }

    #[test]
    fn classification_is_conjugation_invariant(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = element(s1);
        let p = element(s2);
        let conj = a.conjugate_by(&p);
        if let (Ok(x), Ok(y)) = (classify(&a, DEFAULT_TOL_SPEC), classify(&conj, DEFAULT_TOL_SPEC)) {
            prop_assert_eq!(x.kind, y.kind);
        }
    }

    #[test]
    fn words_match_their_matrices(seed in any::<u64>()) {
        let corpus = generate(CorpusKind::Generic, seed);
        let letters: Vec<GroupElement> = corpus.generators.iter().flat_map(|g| [g.clone(), g.inverse()]).collect();
        for w in enumerate_words(&corpus.generators, 3, 1000).unwrap() {
            let rebuilt = w.word().letters().iter().fold(CMatrix4::identity(), |acc, l| {
                acc * letters[2 * l.index() + usize::from(l.is_inverse())].matrix()
            });
            prop_assert!((rebuilt - w.matrix()).iter().all(|z| z.norm() <= 1e-9));
        }
    }

    #[test]
    fn corner_pair_is_decisive_with_margin(r1 in 0.1..5.0f64, r2 in 0.1..5.0f64, s1 in any::<bool>(), s2 in any::<bool>(), imaginary in any::<bool>()) {
        let sign = |s: bool| if s { 1.0 } else { -1.0 };
        let (a, b) = if imaginary {
            (Complex64::new(0.0, sign(s1) * r1), Complex64::new(0.0, sign(s2) * r2))
        } else {
            (Complex64::new(sign(s1) * r1, 0.0), Complex64::new(sign(s2) * r2, 0.0))
        };
        let expected = if imaginary { CornerPairBranch::ImaginaryPair } else { CornerPairBranch::RealPair };
        prop_assert_eq!(corner_pair_branch(a, b, 1e-8).unwrap(), expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constructed_groups_have_real_traces(seed in 1u64..100_000, real in any::<bool>()) {
        let corpus = generate(kind_of(real), seed);
        let report = trace_reality_report(&corpus.generators, 6, 1e-8, 1_000_000).unwrap();
        prop_assert_eq!(report.verdict, TraceVerdict::AllReal);
    }

    #[test]
    fn verdicts_are_sound_and_stable(seed in 1u64..100_000, real in any::<bool>(), flip in any::<bool>()) {
        let config = AnalysisConfig::default();
        let corpus = generate(kind_of(real), seed);
        let result = classify_group(&corpus.generators, &config);
        let expected = if real { Verdict::RealForm } else { Verdict::CompactProductForm };
        prop_assert_eq!(result.verdict, expected);

        let d = result.conjugator.as_ref().unwrap();
        prop_assert!(is_su31(d.matrix(), 1e-8).member);
        let d_inv = form_inverse(d.matrix());
        let recomputed = enumerate_words(&corpus.generators, config.max_word_length, config.budget)
            .unwrap()
            .map(|w| {
                let m = d.matrix() * w.matrix() * d_inv;
                if real { real_form_residual(&m) } else { product_form_residual(&m) }
            })
            .fold(0.0, f64::max);
        prop_assert_eq!(recomputed, result.certificate.unwrap());
        prop_assert!(recomputed <= config.tol_certify);

        let mut permuted: Vec<GroupElement> = corpus.generators.iter().rev().cloned().collect();
        if flip {
            permuted[0] = permuted[0].inverse();
        }
        prop_assert_eq!(classify_group(&permuted, &config).verdict, expected);
    }

    #[test]
    fn block_words_split_after_conjugation(seed in 1u64..100_000) {
        let config = AnalysisConfig::default();
        let corpus = generate(CorpusKind::ProductForm, seed);
        let result = classify_group(&corpus.generators, &config);
        let d = result.conjugator.unwrap();
        let d_inv = form_inverse(d.matrix());
        let off = [(0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (2, 3), (3, 1), (3, 2)];
        for w in enumerate_words(&corpus.generators, 3, 1000).unwrap() {
            let m = d.matrix() * w.matrix() * d_inv;
            for (i, j) in off {
                prop_assert!(m[(i, j)].norm() <= 1e-7);
            }
        }
    }

    #[test]
    fn corners_follow_the_case(seed in 1u64..100_000, real in any::<bool>()) {
        let config = AnalysisConfig::default();
        let corpus = generate(kind_of(real), seed);
        let words: Vec<GroupElement> = enumerate_words(&corpus.generators, config.max_word_length, config.budget)
            .unwrap()
            .collect();
        let n = words
            .iter()
            .filter(|w| classify(w, config.tol_spec).is_ok_and(|t| t.kind == ElementKind::Loxodromic))
            .find_map(|a| chk_core::engine::normalize_group(&corpus.generators, a, config.tol_real).ok());
        prop_assume!(n.is_some());
        let n = n.unwrap();
        let expected = if real { CornerPairBranch::RealPair } else { CornerPairBranch::ImaginaryPair };
        for w in &words {
            let b = w.conjugate_by(&n.conjugator);
            let (d, q) = (b.entry(0, 3), b.entry(3, 0));
            if (d * q).norm() > config.tol_corner * chk_core::linalg::max_norm(b.matrix()) {
                prop_assert_eq!(corner_pair_branch(d, q, 1e-6).unwrap(), expected);
            }
        }
    }
}

#[test]
fn membership_of_random_elements_is_tight() {
    for seed in 0..20 {
        assert!(membership_residual(element(seed).matrix()) <= 1e-12);
    }
}
