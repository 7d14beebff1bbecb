use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use proptest::prelude::*;

use super::*;
use crate::curve::{BasePoint, BranchFactor, CurveModel};
use crate::padic::{PadicElement, PadicField};

fn canonical(n: u32) -> CurveModel {
    CurveModel::fermat_quotient(5, 2, PadicField::qp(11, n).unwrap()).unwrap()
}

fn genus_two_curve(n: u32) -> CurveModel {
    CurveModel::new(
        2,
        vec![BranchFactor::new(&[2, 1, -3, -3, 0, 1], 1)],
        BasePoint::Affine { x0: 0, y0: 3 },
        PadicField::qp(7, n).unwrap(),
    )
    .unwrap()
}

/// Logarithm of the canonical instance with levels `k ≤ 3`, shared across tests.
fn canonical_log() -> &'static FormalLog {
    static LOG: OnceLock<FormalLog> = OnceLock::new();
    LOG.get_or_init(|| formal_log(&decompose_frobenius_curve(&canonical(24), 3, -30).unwrap()).unwrap())
}

fn factorial(n: usize) -> BigRational {
    BigRational::from_integer((1..=n).fold(BigInt::one(), |a, b| a * BigInt::from(b)))
}

#[test]
fn artin_hasse_coefficients_are_integral_and_match_exp_below_p() {
    for p in [5u64, 11] {
        let e = artin_hasse_coefficients(p, 200);
        for (i, c) in e.iter().enumerate() {
            assert!(c.denom() % BigInt::from(p) != BigInt::zero(), "p = {p}, i = {i}");
            if (i as u64) < p {
                assert_eq!(*c, factorial(i).recip());
            }
        }
    }
}

#[test]
fn loop_of_unit_parameter_is_rejected() {
    let f = PadicField::qp(11, 10).unwrap();
    assert!(matches!(artin_hasse_loop(&f.one(), 5), Err(SolitonError::NotInMaximalIdeal(_))));
    assert!(artin_hasse_loop(&f.zero(), 5).unwrap().is_identity());
}

#[test]
fn multi_loop_is_product_of_single_loops() {
    let f = PadicField::qp(7, 12).unwrap();
    let (a, b) = (f.int(7), f.int(49));
    let h = artin_hasse_multi(&[a.clone(), b.clone()], &[1, 2], 12).unwrap();
    let ha = artin_hasse_loop(&a, 12).unwrap();
    let hb = artin_hasse_loop(&b, 6).unwrap();
    for n in 0..=12usize {
        let mut s = f.zero();
        for j in 0..=n / 2 {
            s = &s + &(&ha.coeffs()[n - 2 * j] * &hb.coeffs()[j]);
        }
        assert!(s.eq_at_precision(&h.coeffs()[n]), "degree {n}");
    }
    assert_eq!(h.rho_val(), Some(Ratio::from_integer(1)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn loop_coefficients_obey_decay_and_exp_law(u in 1i64..11, k in 1i64..4) {
        let f = PadicField::qp(11, 16).unwrap();
        let pi = f.int(u * 11i64.pow(k as u32));
        let h = artin_hasse_loop(&pi, 30).unwrap();
        prop_assert!(h.in_gamma_plus());
        for i in 0..11usize {
            let expect = pi.pow(i as u64).scale_rational(&factorial(i).recip());
            prop_assert!(expect.eq_at_precision(&h.coeffs()[i]));
        }
    }
}

#[test]
fn frobenius_decompositions_from_basis_and_curve_agree() {
    let c = canonical(16);
    let (a, gd) = c.affine_ring_in(c.field(), 30, -30).unwrap();
    let report = c.certify_strict_integrality(&a).unwrap();
    let generic = decompose_frobenius(&a, &report, &gd, 1).unwrap();
    let engine = decompose_frobenius_curve(&c, 1, -20).unwrap();
    for (x, y) in generic.iter().zip(&engine) {
        assert!(x.reconstruction_holds() && y.reconstruction_holds());
        for i in 0..2 {
            for j in 0..2 {
                assert!(x.e[i][j].eq_at_precision(&y.e[i][j]), "k = {}, ({i}, {j})", x.k);
            }
        }
    }
}

#[test]
fn logarithm_of_canonical_instance_is_diagonal_with_binomial_entries() {
    let log = canonical_log();
    assert!(log.is_diagonal());
    assert_eq!(log.e(1)[0][0].to_bigint_mod(), Some(BigInt::from(28)));
    assert_eq!(log.e(1)[1][1].to_bigint_mod(), Some(BigInt::from(2380)));
    let b = binomial(BigInt::from(96), BigInt::from(24)) % num_traits::pow(BigInt::from(11), 20);
    let e2 = log.e(2)[0][0].to_bigint_mod().unwrap() % num_traits::pow(BigInt::from(11), 20);
    assert_eq!(e2, b);
}

#[test]
fn cyclic_torsion_level_one() {
    let t = solve_torsion_cyclic(canonical_log(), 0, 1).unwrap();
    assert_eq!(t.roots.len(), 11);
    let counts = t.valuation_counts();
    assert_eq!(counts[&Some(Ratio::new(1, 10))], 10);
    assert_eq!(counts[&None], 1);
    assert!(t.distinct() && t.residuals_zero() && t.polygon_matches());
    assert_eq!(t.eisenstein.len(), 11);
}

#[test]
fn cyclic_torsion_level_two() {
    let t = solve_torsion_cyclic(canonical_log(), 0, 2).unwrap();
    assert_eq!(t.roots.len(), 121);
    let counts = t.valuation_counts();
    assert_eq!(counts[&Some(Ratio::new(1, 110))], 110);
    assert_eq!(counts[&Some(Ratio::new(1, 10))], 10);
    assert!(t.distinct() && t.residuals_zero() && t.polygon_matches());
}

#[test]
fn cyclic_torsion_needs_enough_levels() {
    assert_eq!(
        solve_torsion_cyclic(canonical_log(), 0, 3).unwrap_err(),
        SolitonError::MissingLevels { needed: 5, available: 4 }
    );
}

#[test]
fn full_torsion_over_degree_ten_extension() {
    let t = solve_torsion_full(canonical_log(), 12).unwrap();
    assert_eq!(t.residue_degree, 10);
    assert_eq!(t.points.len(), 121);
    assert!(t.distinct() && t.residuals_zero());
    assert!(t.count_with_valuation(1, Ratio::new(1, 10)) >= 110);
    assert_eq!(
        solve_torsion_full(canonical_log(), 5).unwrap_err(),
        SolitonError::ResidueFieldTooSmall { required: Some(10), max: 5 }
    );
}

#[test]
fn level_one_points_avoid_theta() {
    let c = canonical(24);
    let t = solve_torsion_cyclic(canonical_log(), 0, 1).unwrap();
    let (a, _) = c.affine_ring_in(&t.field, 16, -4).unwrap();
    let report = c.certify_strict_integrality(&a).unwrap();
    let mut verdicts = BTreeMap::new();
    for r in &t.roots {
        let cert = certify_torsion_point(&a, &report, canonical_log(), 1, Component::Index(0), vec![r.value.clone()], 8, 6, vec![])
            .unwrap();
        if cert.verdict == Verdict::OutsideTheta {
            assert_eq!(cert.tau.case, DominanceCase::SingleLoop);
            assert!(cert.tau.exact && cert.window.full_rank && cert.residual_zero && cert.valuation_ok);
            assert_eq!(cert.tau.s_kappa_val, Some(Ratio::new(2, 10)));
        }
        *verdicts.entry(cert.verdict).or_insert(0) += 1;
    }
    assert_eq!(verdicts[&Verdict::OutsideTheta], 10);
    assert_eq!(verdicts[&Verdict::MemberOfTheta], 1);
}

#[test]
fn tau_is_dominated_by_leading_schur_term() {
    let c = canonical(24);
    let t = solve_torsion_cyclic(canonical_log(), 0, 1).unwrap();
    let (a, _) = c.affine_ring_in(&t.field, 16, -12).unwrap();
    let report = c.certify_strict_integrality(&a).unwrap();
    let h = artin_hasse_loop(&t.roots[1].value, 10).unwrap();
    let tau = tau_sato(&a, &report, &h, 10).unwrap();
    assert!(tau.terms > 1);
    assert_eq!(tau.value.valuation(), Some(Ratio::new(2, 10)));
    assert!(tau.truncation_val.unwrap() > Ratio::new(2, 10));
}

#[test]
fn integrality_must_be_theorem_backed() {
    let c = canonical(12);
    let (a, _) = c.affine_ring(12).unwrap();
    let mut report = c.certify_strict_integrality(&a).unwrap();
    report.certification = crate::grassmann::Certification::CapChecked { cap: 12 };
    let h = artin_hasse_loop(&c.field().int(11), 6).unwrap();
    assert!(matches!(tau_sato(&a, &report, &h, 4), Err(SolitonError::NotStrictlyIntegral(_))));
}

#[test]
fn genus_two_affine_instance_uses_multi_loop_dominance() {
    let c = genus_two_curve(20);
    let log = formal_log(&decompose_frobenius_curve(&c, 2, -30).unwrap()).unwrap();
    let t = solve_torsion_full(&log, 12).unwrap();
    assert_eq!((t.residue_degree, t.points.len()), (2, 49));
    assert!(t.distinct() && t.residuals_zero());
    let (a, _) = c.affine_ring_in(&t.field, 16, -4).unwrap();
    let report = c.certify_strict_integrality(&a).unwrap();
    let mut multi = 0;
    for x in &t.points {
        let cert = certify_torsion_point(&a, &report, &log, 1, Component::Full, x.clone(), 8, 6, vec![]).unwrap();
        if cert.verdict == Verdict::OutsideTheta && cert.tau.case == DominanceCase::MultiLoop {
            multi += 1;
        }
    }
    assert!(multi >= 7 * 7 - 7, "{multi} certificates");
}

fn pn_context(c: &CurveModel, hi: i64, levels: u32) -> PnContext {
    let d = decompose_frobenius_curve(c, levels, -(hi + 12)).unwrap();
    let (a, gd) = c.affine_ring_in(c.field(), hi, -12).unwrap();
    PnContext::new(a, gd, d).unwrap()
}

#[test]
fn level_one_loops_are_p_torsion_modulo_a() {
    let c = canonical(24);
    let ctx = pn_context(&c, 60, 3);
    assert!(ctx.reconstruction_ok && ctx.a_parts_in_a);
    let t = solve_torsion_cyclic(canonical_log(), 0, 1).unwrap();
    for r in &t.roots {
        let h = artin_hasse_loop(&r.value, 4).unwrap();
        let ev = verify_pn_torsion(&ctx, &h, 1, PnWindow { lo: -12, hi: 60 }).unwrap();
        assert!(ev.passed(), "{ev:?}");
        for q in &ev.inequalities {
            assert_eq!(q.bound_equals_floor, q.k <= 1);
        }
    }
}

#[test]
fn non_torsion_parameter_has_nonzero_residual() {
    let c = canonical(24);
    let ctx = pn_context(&c, 30, 3);
    let t = solve_torsion_cyclic(canonical_log(), 0, 1).unwrap();
    let pi = &t.roots[1].value + &t.roots[1].value.pow(2);
    let h = artin_hasse_loop(&pi, 4).unwrap();
    assert!(matches!(
        verify_pn_torsion(&ctx, &h, 1, PnWindow { lo: -12, hi: 30 }),
        Err(SolitonError::ResidualNonzero(_))
    ));
}

#[test]
fn level_two_point_is_not_p_torsion() {
    let c = canonical(24);
    let ctx = pn_context(&c, 30, 3);
    let t = solve_torsion_cyclic(canonical_log(), 0, 2).unwrap();
    let root = t.roots.iter().find(|r| r.level == 2).unwrap();
    let h = artin_hasse_loop(&root.value, 4).unwrap();
    let ev = verify_pn_torsion(&ctx, &h, 1, PnWindow { lo: -12, hi: 30 }).unwrap();
    assert!(!ev.norm_ok && !ev.passed());
}

#[test]
fn window_must_fit_the_data() {
    let c = canonical(24);
    let ctx = pn_context(&c, 30, 2);
    let t = solve_torsion_cyclic(canonical_log(), 0, 1).unwrap();
    let h = artin_hasse_loop(&t.roots[1].value, 4).unwrap();
    assert!(matches!(
        verify_pn_torsion(&ctx, &h, 1, PnWindow { lo: -12, hi: 60 }),
        Err(SolitonError::WindowInsufficient(_))
    ));
}

#[test]
fn probe_vanishes_on_closure_elements_and_detects_gap_terms() {
    let c = canonical(16);
    let f = c.field().clone();
    let (a, gd) = c.affine_ring(20).unwrap();
    let pi = f.int(11);
    let combo: Vec<(i64, PadicElement)> = [0i64, 3, 4, 5, 7].iter().map(|&s| (s, pi.pow(s as u64))).collect();
    let h = closure_element(&a, &combo, &pi).unwrap();
    let residues = gamma_a_filtration_probe(&h, &gd, &pi).unwrap();
    assert!(residues.iter().all(|r| r.is_zero()));
    let bad = h.add(&crate::series::LaurentSeries::monomial(&f, 2, pi.pow(2), h.floor())).unwrap();
    let residues = gamma_a_filtration_probe(&bad, &gd, &pi).unwrap();
    assert!(!residues[1].is_zero());
    assert_eq!(
        closure_element(&a, &[(3, pi.pow(2))], &pi).unwrap_err(),
        SolitonError::NotInClosure { degree: 3 }
    );
}
