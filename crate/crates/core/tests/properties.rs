//! Algebraic invariants checked on random inputs.

use genlambda::arith::gcd;
use genlambda::counts::{sum_closed, sum_enum, SumKind};
use genlambda::forms::{e_series, EIndex};
use genlambda::{Cyc, CycInt, Series, C64};
use num_rational::BigRational;
use proptest::prelude::*;

const LEVELS: [u32; 7] = [3, 4, 5, 7, 8, 9, 12];

fn level() -> impl Strategy<Value = u32> {
    prop::sample::select(LEVELS.to_vec())
}

fn cyc(n: u32) -> impl Strategy<Value = Cyc> {
    prop::collection::vec((-20i64..20, 1i64..5), n as usize).prop_map(move |v| {
        let raw: Vec<BigRational> = v.into_iter().map(|(a, b)| BigRational::new(a.into(), b.into())).collect();
        Cyc::from_poly(n, &raw)
    })
}

fn cyc_triple() -> impl Strategy<Value = (Cyc, Cyc, Cyc)> {
    level().prop_flat_map(|n| (cyc(n), cyc(n), cyc(n)))
}

fn series(n: u32, prec: i64) -> impl Strategy<Value = Series> {
    (-3i64..3, prop::collection::vec(cyc(n), 1..8)).prop_map(move |(ord, cs)| {
        let len = (prec - ord) as usize;
        let mut cs: Vec<Cyc> = cs.into_iter().chain(std::iter::repeat(Cyc::zero(n))).take(len).collect();
        if cs[0].is_zero() {
            cs[0] = Cyc::one(n);
        }
        Series::new(n, ord, prec, cs).unwrap()
    })
}

fn units(n: u32) -> Vec<i64> {
    (1..n as i64).filter(|&k| gcd(k, n as i64) == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms((a, b, c) in cyc_triple()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        if !a.is_zero() {
            prop_assert_eq!(&a * &a.inv().unwrap(), Cyc::one(a.level()));
        }
    }

    #[test]
    fn galois_is_a_ring_automorphism_and_composes((a, b, _) in cyc_triple(), i in 0usize..8, j in 0usize..8) {
        let n = a.level();
        let u = units(n);
        let (k, l) = (u[i % u.len()], u[j % u.len()]);
        prop_assert_eq!((&a * &b).sigma(k).unwrap(), &a.sigma(k).unwrap() * &b.sigma(k).unwrap());
        prop_assert_eq!((&a + &b).sigma(k).unwrap(), &a.sigma(k).unwrap() + &b.sigma(k).unwrap());
        prop_assert_eq!(a.sigma(k).unwrap().sigma(l).unwrap(), a.sigma(k * l).unwrap());
        prop_assert_eq!(a.conj().conj(), a.clone());
    }

    #[test]
    fn embedding_is_a_homomorphism((a, b, _) in cyc_triple()) {
        let tol = 1e-9 * (1.0 + a.embed().norm()) * (1.0 + b.embed().norm());
        prop_assert!(((&a * &b).embed() - a.embed() * b.embed()).norm() < tol);
        prop_assert!(((&a + &b).embed() - (a.embed() + b.embed())).norm() < tol);
        prop_assert!((a.conj().embed() - a.embed().conj()).norm() < tol);
    }

    #[test]
    fn norm_is_rational_and_integral_for_integers(n in level(), v in prop::collection::vec(-9i64..9, 12)) {
        let a = CycInt::from_poly(n, &v.iter().map(|&x| x.into()).collect::<Vec<_>>()).to_rational();
        let nm = a.norm();
        prop_assert!(nm.is_integer());
        let z: C64 = units(n).iter().map(|&k| a.sigma(k).unwrap().embed()).product();
        prop_assert!((z.re - nm.to_integer().to_string().parse::<f64>().unwrap()).abs() < 1e-6 * (1.0 + z.norm()));
        prop_assert!(z.im.abs() < 1e-6 * (1.0 + z.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_ring_axioms(a in series(5, 10), b in series(5, 10), c in series(5, 10)) {
        let lhs = (&(&a * &b) * &c).truncate(4);
        let rhs = (&a * &(&b * &c)).truncate(4);
        prop_assert_eq!(lhs.prec(), rhs.prec());
        prop_assert_eq!(lhs, rhs);
        let d1 = &a * &(&b + &c);
        let d2 = &(&a * &b) + &(&a * &c);
        let p = d1.prec().min(d2.prec());
        prop_assert_eq!(d1.truncate(p), d2.truncate(p));
    }

    #[test]
    fn double_inverse(a in series(7, 12)) {
        let inv = a.inv().unwrap();
        prop_assert_eq!(inv.ord(), -a.ord());
        prop_assert_eq!(inv.prec(), a.prec() - 2 * a.ord());
        let back = inv.inv().unwrap();
        prop_assert_eq!(back.truncate(a.prec()), a.clone());
        let one = &a * &inv;
        prop_assert_eq!(one.truncate(one.prec()), Series::one(7, one.prec()));
    }

    /// E(τ;r,s) = E(τ;−r,−s), E depends on (r,s) mod N, and σ_k sends E(r,s) to E(r,ks).
    #[test]
    fn e_series_symmetries(n in level(), r in -20i64..20, s in -20i64..20, i in 0usize..8) {
        prop_assume!(r.rem_euclid(n as i64) != 0 || s.rem_euclid(n as i64) != 0);
        let e = e_series(&EIndex::new(r, s, n).unwrap(), 3 * n as i64);
        prop_assert_eq!(&e, &e_series(&EIndex::new(-r, -s, n).unwrap(), 3 * n as i64));
        prop_assert_eq!(&e, &e_series(&EIndex::new(r + n as i64, s - 2 * n as i64, n).unwrap(), 3 * n as i64));
        let u = units(n);
        let k = u[i % u.len()];
        prop_assert_eq!(e.galois(k).unwrap(), e_series(&EIndex::new(r, k * s, n).unwrap(), 3 * n as i64));
    }

    #[test]
    fn closed_sums_agree_with_enumeration(m in 1u64..400, pick in 0usize..16, k in 0u32..2, j in any::<bool>()) {
        let divs: Vec<u64> = (1..=m).filter(|d| m % d == 0).collect();
        let l = divs[pick % divs.len()];
        let kind = if j { SumKind::J } else { SumKind::I };
        if let Ok(c) = sum_closed(kind, k, l, m) {
            prop_assert_eq!(c, sum_enum(kind, k, l, m).unwrap());
        }
    }
}
