use super::*;
use num_bigint::BigInt;
use num_rational::Ratio;
use proptest::prelude::*;

fn q11() -> PadicField {
    PadicField::qp(11, 24).unwrap()
}

fn r(n: i64, d: i64) -> Ratio<i64> {
    Ratio::new(n, d)
}

#[test]
fn base_field_has_expected_shape() {
    let k = q11();
    assert_eq!((k.p(), k.f(), k.e(), k.precision()), (11, 1, 1, 24));
    let x = k.int(121 * 5);
    assert_eq!(x.valuation(), Some(r(2, 1)));
}

#[test]
fn eisenstein_root_has_valuation_one_over_e() {
    let k = PadicField::with_int_eisenstein(11, 1, Some(&[-11, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]), 24).unwrap();
    let pi = k.uniformizer();
    assert_eq!(pi.valuation(), Some(r(1, 10)));
    assert_eq!(pi.pow(10), k.int(11));
}

#[test]
fn non_eisenstein_is_rejected() {
    let err = PadicField::with_int_eisenstein(11, 1, Some(&[-1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]), 24);
    assert!(matches!(err, Err(PadicError::NonEisenstein(_))));
    let err = PadicField::with_int_eisenstein(11, 1, Some(&[11, 1, 1]), 24);
    assert!(matches!(err, Err(PadicError::NonEisenstein(_))));
}

#[test]
fn teichmuller_fifth_root_has_residue_three() {
    let k = q11();
    let z = teichmuller_root(&k, 5).unwrap();
    assert_eq!(z.residue().unwrap(), k.residue_field().from_u64(3));
    assert!((&z.pow(5) - &k.one()).is_zero());
    assert!(!(&z - &k.one()).residue().unwrap().is_zero());
    assert_eq!(teichmuller_root(&k, 2).unwrap(), k.int(-1));
    assert!(matches!(teichmuller_root(&k, 3), Err(PadicError::NoRoot { .. })));
}

#[test]
fn hensel_examples() {
    let k = q11();
    let poly = vec![k.int(-1), k.zero(), k.zero(), k.zero(), k.zero(), k.one()];
    let z = hensel_lift(&poly, &k.int(3)).unwrap();
    assert!(poly_eval(&poly, &z).is_zero());
    assert_eq!(z.residue().unwrap(), k.residue_field().from_u64(3));
    let poly = vec![k.zero(), k.int(-1), k.one()];
    assert!(hensel_lift(&poly, &k.zero()).unwrap().is_exact_zero());
    let poly = vec![k.int(-11), k.zero(), k.one()];
    assert_eq!(hensel_lift(&poly, &k.one()), Err(PadicError::NotContracting));
}

#[test]
fn newton_polygon_examples() {
    // l_1 truncated at degrees 1, p, p^2 with valuations 0, -1, -2.
    let p = 11usize;
    let mut vals = vec![None; p * p + 1];
    vals[1] = Some(r(0, 1));
    vals[p] = Some(r(-1, 1));
    vals[p * p] = Some(r(-2, 1));
    let np = newton_polygon(&vals).unwrap();
    assert_eq!(np, vec![(r(-1, 10), 10), (r(-1, 110), 110)]);
    assert_eq!(newton_polygon(&[None, Some(r(0, 1)), Some(r(0, 1))]).unwrap(), vec![(r(0, 1), 1)]);
    assert_eq!(newton_polygon(&[None, Some(r(1, 1)), Some(r(0, 1))]).unwrap(), vec![(r(-1, 1), 1)]);
    assert_eq!(newton_polygon(&[None, None]), Err(PadicError::Empty));
}

#[test]
fn unramified_extension_arithmetic() {
    let k = PadicField::new(11, 3, None, 12).unwrap();
    let z = PadicElement::zeta_generator(&k);
    // ζ is a root of unity of order dividing 11^3 - 1.
    let q = 11u64.pow(3) - 1;
    assert!((&z.pow(q) - &k.one()).is_zero());
    let inv = z.inv().unwrap();
    assert_eq!(&z * &inv, k.one());
    let zr = teichmuller_root(&k, 7).unwrap();
    assert!((&zr.pow(7) - &k.one()).is_zero());
}

#[test]
fn mixed_extension_division_by_uniformizer_powers() {
    let eis = vec![vec![BigInt::from(-7)], vec![BigInt::from(0)], vec![BigInt::from(0)], vec![BigInt::from(1)]];
    let k = PadicField::new(7, 2, Some(&eis), 10).unwrap();
    let pi = k.uniformizer();
    let z = PadicElement::zeta_generator(&k);
    let x = &(&z * &pi.pow(5)) + &pi.pow(7);
    assert_eq!(x.valuation(), Some(r(5, 3)));
    let y = x.div(&pi.pow(5)).unwrap();
    assert_eq!(y, &z + &pi.pow(2));
    let seven = k.int(7);
    assert_eq!(seven, pi.pow(3));
    let emb = PadicElement::from_i64(&k.unramified_subfield(), 49).embed_into(&k).unwrap();
    assert_eq!(emb, pi.pow(6));
}

#[test]
fn slope_factor_separates_root_sizes() {
    let k = q11();
    // (X - 11·3)(X - 121·5)(X - 2)(X - 7)
    let lin = |a: i64| vec![k.int(-a), k.one()];
    let small = poly_mul(&lin(33), &lin(605));
    let big = poly_mul(&lin(2), &lin(7));
    let f = poly_mul(&small, &big);
    let (g, h) = slope_factor(&f, 2).unwrap();
    for (a, b) in g.iter().zip(&small) {
        assert_eq!(a, b);
    }
    assert_eq!(h.len(), 3);
    assert_eq!(poly_mul(&g, &h).iter().zip(&f).filter(|(a, b)| a != b).count(), 0);
}

fn arb_elem(k: PadicField) -> impl Strategy<Value = PadicElement> {
    (-3i64..3, any::<i64>(), 1i64..1_000_000).prop_map(move |(v, n, d)| {
        let x = k.rational(n, d);
        x.shift(v)
    })
}

proptest! {
    #[test]
    fn ring_axioms_and_ultrametric(
        a in arb_elem(PadicField::qp(11, 12).unwrap()),
        b in arb_elem(PadicField::qp(11, 12).unwrap()),
        c in arb_elem(PadicField::qp(11, 12).unwrap()),
    ) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        let s = &a + &b;
        if let (Some(va), Some(vb), Some(vs)) = (a.val_units(), b.val_units(), s.val_units()) {
            prop_assert!(vs >= va.min(vb));
        }
        if let (Some(va), Some(vb)) = (a.val_units(), b.val_units()) {
            prop_assert_eq!((&a * &b).val_units(), Some(va + vb));
        }
    }

    #[test]
    fn ramified_ring_laws(x in proptest::collection::vec(-500i64..500, 10), y in proptest::collection::vec(-500i64..500, 10)) {
        let k = PadicField::with_int_eisenstein(11, 1, Some(&[-11, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]), 8).unwrap();
        let cx: Vec<i128> = x.iter().map(|&v| v as i128).collect();
        let cy: Vec<i128> = y.iter().map(|&v| v as i128).collect();
        let a = PadicElement::from_coords(&k, &cx);
        let b = PadicElement::from_coords(&k, &cy);
        if !a.is_zero() && !b.is_zero() {
            let q = a.div(&b).unwrap();
            prop_assert_eq!(&q * &b, a.clone());
        }
        let s = &a + &b;
        prop_assert_eq!(&s - &b, a);
    }

    #[test]
    fn newton_polygon_matches_constructed_roots(vs in proptest::collection::vec(0u32..4, 1..6)) {
        let k = PadicField::qp(7, 16).unwrap();
        let mut f = vec![k.one()];
        for (i, &v) in vs.iter().enumerate() {
            let root = &k.int(7i64.pow(v)) * &k.int(i as i64 + 1);
            f = poly_mul(&f, &[-root, k.one()]);
        }
        let np = newton_polygon(&valuations(&f)).unwrap();
        let mut got: Vec<(Ratio<i64>, usize)> = np.into_iter().map(|(s, l)| (-s, l)).collect();
        got.sort();
        let mut expect: Vec<(Ratio<i64>, usize)> = Vec::new();
        let mut sorted = vs.clone();
        sorted.sort();
        for v in sorted {
            match expect.last_mut() {
                Some((s, l)) if *s == Ratio::from_integer(v as i64) => *l += 1,
                _ => expect.push((Ratio::from_integer(v as i64), 1)),
            }
        }
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn teichmuller_roots_are_exact(d in prop::sample::select(vec![1u64, 2, 5, 10])) {
        let k = PadicField::qp(11, 24).unwrap();
        let z = teichmuller_root(&k, d).unwrap();
        prop_assert!((&z.pow(d) - &k.one()).is_zero());
        prop_assert_eq!(z.residue().unwrap().order(), Some(d as u128));
    }
}
