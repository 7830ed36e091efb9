use genlambda::arith::gcd;
use genlambda::counts::{ell_t, Route};
use genlambda::lambda::{galois_matrix, lambda_basis_series, lambda_scaled_int, lambda_series, BasisPair};
use genlambda::modgroup::{cusp_reps, nu, transversal, SL2Mat};

/// Order of the exact series against ν(A) for every element of the transversal.
#[test]
fn order_equals_nu_on_transversal() {
    for n in 3u32..=9 {
        for e in transversal(n) {
            let s = lambda_series(&e.matrix, 2 * n as i64 + 2).unwrap();
            assert_eq!(s.order().unwrap(), nu(&e.matrix), "N={n} A={:?}", e.matrix);
        }
    }
}

#[test]
fn zero_and_pole_orders_balance() {
    for n in 3u32..=9 {
        let nus: Vec<i64> = cusp_reps(n).iter().map(|r| nu(&r.matrix)).collect();
        let pos: i64 = nus.iter().filter(|&&v| v > 0).sum();
        let neg: i64 = nus.iter().filter(|&&v| v < 0).sum();
        let (ell, t) = ell_t(n as u64, Route::Enum).unwrap();
        assert_eq!((pos, -neg), (ell, ell), "N={n}");
        assert_eq!(nus.iter().filter(|&&v| v < 0).count() as i64, t);
    }
}

/// Λ(τ; −Q₁, −Q₂) = Λ(τ; Q₁, Q₂), since E is even in (r, s).
#[test]
fn sign_invariance() {
    let n = 7;
    let b = BasisPair::new(2, 3, 1, 4, n).unwrap();
    let neg = BasisPair::new(-2, -3, -1, -4, n).unwrap();
    assert_eq!(lambda_basis_series(&neg, 20).unwrap(), lambda_basis_series(&b, 20).unwrap());
    let flipped = BasisPair::new(-2, -3, 1, 4, n).unwrap();
    assert_ne!(lambda_basis_series(&flipped, 20).unwrap(), lambda_basis_series(&b, 20).unwrap());
}

/// (Λ∘A)^{σ_k} = Λ_k∘A_k as exact series.
#[test]
fn galois_law_levels_five_and_seven() {
    for n in [5u32, 7] {
        let prec = 2 * n as i64;
        for e in transversal(n) {
            let base = lambda_series(&e.matrix, prec).unwrap();
            for k in 2..n as i64 {
                if gcd(k, n as i64) != 1 {
                    continue;
                }
                let lhs = base.galois(k).unwrap();
                let ak = galois_matrix(&e.matrix, k).unwrap();
                let rhs = lambda_basis_series(&BasisPair::lambda_k(k, n).unwrap().compose(&ak), prec).unwrap();
                assert_eq!(lhs, rhs, "N={n} k={k} A={:?}", e.matrix);
            }
        }
    }
}

/// (1−ζ)³Λ∘A has integral coefficients.
#[test]
fn scaled_lambda_is_integral() {
    for n in [3u32, 4, 5, 7, 8, 9] {
        for r in cusp_reps(n) {
            let b = BasisPair::from_matrix(&r.matrix);
            assert!(lambda_scaled_int(&b, 3 * n as i64).is_ok(), "N={n} A={:?}", r.matrix);
        }
    }
}

#[test]
fn t_power_is_a_twist() {
    let n = 8;
    let base = lambda_series(&SL2Mat::identity(n), 30).unwrap();
    for i in 1..n as i64 {
        assert_eq!(lambda_series(&SL2Mat::t_pow(i, n), 30).unwrap(), base.twist(i));
    }
}
