use genlambda::minpoly::{
    build_f, build_f_with, default_prec, pole_cusp_count, specialize_and_factor, verify_theorem1, BivarPoly,
    BuildOptions, Specialization,
};
use genlambda::counts::{ell_t, Route};
use genlambda::modgroup::PairConvention;
use genlambda::poly::{match_distance, roots_numeric, Poly};
use genlambda::{Cyc, C64};
use num_rational::BigRational;

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn power(f: &BivarPoly, y: i64) -> (u32, Poly<BigRational>, bool) {
    match specialize_and_factor(f, &Cyc::from_i64(f.n, y)).unwrap() {
        s @ Specialization::Power { .. } => {
            let Specialization::Power { k, ref h, h0_nonzero, .. } = s else { unreachable!() };
            assert!(s.certified(), "N={} y={y}", f.n);
            (k, h.clone(), h0_nonzero)
        }
        other => panic!("N={} y={y}: expected a power, got {other:?}", f.n),
    }
}

/// X² + bX + c over Q(i).
fn quad(b: Cyc, c: Cyc) -> Poly<BigRational> {
    Poly::new(4, vec![c, b, Cyc::one(4)])
}

#[test]
fn level_four_and_five_structure() {
    for (n, d, ell) in [(4u32, 24usize, 1usize), (5, 60, 4)] {
        let f = build_f(n, None).unwrap();
        assert_eq!((f.d, f.deg_y()), (d, ell));
        let r = verify_theorem1(&f).unwrap();
        assert!(r.passed(), "N={n}: {:?}", r.failures);
        let (_, t) = ell_t(n as u64, Route::Enum).unwrap();
        assert_eq!(f.t as i64, t);
        assert_eq!(pole_cusp_count(n), f.t);
    }
}

#[test]
fn specializations_at_elliptic_points() {
    for n in [3u32, 4, 5] {
        let f = build_f(n, None).unwrap();
        let (k1, h1, z1) = power(&f, 0);
        let (k2, h2, z2) = power(&f, 1728);
        assert_eq!((k1, h1.degree(), z1), (3, Some(f.d / 3), true));
        assert_eq!((k2, h2.degree(), z2), (2, Some(f.d / 2), true));
        for y in [7i64, -3, 1000] {
            let s = specialize_and_factor(&f, &Cyc::from_i64(n, y)).unwrap();
            assert!(matches!(s, Specialization::SquareFree { .. }), "N={n} y={y}");
        }
    }
}

/// H₁ for N = 3 is the numerator of the j-expression; H₂'s roots are the listed six.
#[test]
fn level_three_factor_roots() {
    let n = 3;
    let f = build_f(n, None).unwrap();
    let z = Cyc::zeta(n);
    let one = Cyc::one(n);
    let third = BigRational::new(1.into(), 3.into());
    let roots = [&one - &z, (&one - &z).scale(&third), (&z + &one).neg(), &z + &one];
    let expected = roots.iter().fold(Poly::one(n), |acc, r| acc.mul(&Poly::linear(r)));
    let (_, h1, _) = power(&f, 0);
    assert_eq!(h1, expected);
    let num: Vec<C64> = roots.iter().map(|r| r.embed()).collect();
    assert!(match_distance(&roots_numeric(&h1.embed()), &num) < 1e-10);

    let (_, h2, _) = power(&f, 1728);
    let i = C64::new(0.0, 1.0);
    let zc = z.embed();
    // Roots of the six factors (X − i + ζ)…(X + i + iζ).
    let listed = [i - zc, -i - zc, 1.0 - i * zc, 1.0 + i * zc, i + i * zc, -i - i * zc];
    let got = roots_numeric(&h2.embed());
    assert!(match_distance(&got, &listed) < 1e-10, "{got:?}");
}

/// For N = 4 both factors are products of the quadratics listed for level 4.
#[test]
fn level_four_factors_exact() {
    let n = 4;
    let f = build_f(n, None).unwrap();
    let i = Cyc::zeta(n);
    let one = Cyc::one(n);
    let c = |v: i64| Cyc::from_i64(n, v);
    let h2 = [
        quad((&one - &i).mul_i64(-2), i.neg()),
        quad(c(0), i.clone()),
        quad((&one - &i).neg(), (&one + &i).scale(&half()).neg()),
        quad((&one - &i).neg(), (&one - &i).scale(&half())),
        quad(i.mul_i64(2), (&one + &i).neg()),
        quad(c(-2), &one - &i),
    ]
    .iter()
    .fold(Poly::one(n), |a, q| a.mul(q));
    assert_eq!(power(&f, 1728).1, h2);
    let h1 = [
        quad((&one - &i.mul_i64(2)).neg(), i.neg()),
        quad((c(2) - i.clone()).neg(), i.neg()),
        quad(c(-1), c(1)),
        quad(i.clone(), c(-1)),
    ]
    .iter()
    .fold(Poly::one(n), |a, q| a.mul(q));
    assert_eq!(power(&f, 0).1, h1);
}

#[test]
fn precision_doubling_is_bit_identical() {
    for n in [3u32, 4, 5] {
        let p = default_prec(n).unwrap();
        let a = build_f(n, None).unwrap().to_json().unwrap();
        let b = build_f(n, Some(2 * p)).unwrap().to_json().unwrap();
        assert_eq!(a, b, "N={n}");
    }
}

#[test]
fn transversal_convention_is_irrelevant() {
    for n in [3u32, 4] {
        let a = build_f(n, None).unwrap();
        let b = build_f_with(n, BuildOptions { prec: None, convention: PairConvention::Swapped }).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap(), "N={n}");
    }
}

#[test]
fn json_round_trip_preserves_verification() {
    let f = build_f(4, None).unwrap();
    let mut g = BivarPoly::from_json(&f.to_json().unwrap()).unwrap();
    g.prec = f.prec;
    assert_eq!(g.to_json().unwrap(), f.to_json().unwrap());
    let (a, b) = (verify_theorem1(&f).unwrap(), verify_theorem1(&g).unwrap());
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn level_six_is_built_but_not_claimed() {
    let f = build_f(6, None).unwrap();
    let r = verify_theorem1(&f).unwrap();
    assert!(!r.claimed);
    assert_eq!(f.d, 72);
}

/// Changing any one coefficient of F is caught by the revalidation window.
#[test]
fn root_identity_detects_single_corruptions() {
    use genlambda::minpoly::{check_window, root_identity};
    use genlambda::modgroup::SL2Mat;
    let f = build_f(4, None).unwrap();
    let id = SL2Mat::identity(4);
    assert!(root_identity(&f, &id, check_window(&f)).unwrap());
    for i in [0usize, 1, 5, 12, 23, 24] {
        for k in 0..f.p[i].coeffs().len() {
            let mut g = f.clone();
            let mut cs = g.p[i].coeffs().to_vec();
            cs[k] = &cs[k] + &Cyc::from_i64(4, 64);
            g.p[i] = Poly::new(4, cs);
            assert!(!root_identity(&g, &id, check_window(&g)).unwrap(), "P_{i}[{k}]");
        }
    }
}
