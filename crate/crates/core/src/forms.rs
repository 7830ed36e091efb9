//! Exact q-expansions of the generators: the weight-2 division forms
//! E(τ;r,s), the modular invariant j, the eta quotients g_N^{24/(N−1)} and
//! the classical λ.
//!
//! Series "in q₁ = q^N" are stored in the level-N variable q with zero
//! coefficients off the N-grid.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::modn;
use crate::cyclotomic::CycNum;
use crate::error::{Error, Result};
use crate::modgroup::{brace_mu, SL2Mat};
use crate::{Cyc, CycInt, IntSeries, Series};

/// A pair (r, s) mod N, not ≡ (0, 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EIndex {
    pub r: i64,
    pub s: i64,
    pub n: u32,
}

impl EIndex {
    pub fn new(r: i64, s: i64, n: u32) -> Result<Self> {
        let nn = n as i64;
        let (r, s) = (modn(r, nn), modn(s, nn));
        if r == 0 && s == 0 {
            return Err(Error::Degenerate(format!("E-index (0,0) at level {n}")));
        }
        Ok(EIndex { r, s, n })
    }

    pub fn neg(&self) -> EIndex {
        EIndex::new(-self.r, -self.s, self.n).expect("nonzero")
    }

    /// ω = ζ^{μ(r)s}.
    pub fn omega_exp(&self) -> i64 {
        let (_, m) = brace_mu(self.r, self.n as i64);
        m * self.s
    }

    pub fn brace(&self) -> i64 {
        brace_mu(self.r, self.n as i64).0
    }

    /// True when `self ≡ ±other`.
    pub fn same_up_to_sign(&self, other: &EIndex) -> bool {
        self == other || *self == other.neg()
    }
}

/// E(τ;r,s)[A]₂ = E(τ; ar+cs, br+ds).
pub fn e_transform(idx: &EIndex, m: &SL2Mat) -> EIndex {
    EIndex::new(m.a * idx.r + m.c * idx.s, m.b * idx.r + m.d * idx.s, idx.n).expect("A is invertible")
}

type ECache = Mutex<HashMap<(u32, i64, i64), Arc<Series>>>;

fn e_cache() -> &'static ECache {
    static C: OnceLock<ECache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// E(τ;r,s) known below q^prec.
pub fn e_series(idx: &EIndex, prec: i64) -> Series {
    let key = (idx.n, idx.r, idx.s);
    if let Some(s) = e_cache().lock().expect("cache poisoned").get(&key) {
        if s.prec() >= prec {
            return s.truncate(prec);
        }
    }
    let s = Arc::new(e_series_uncached(idx, prec));
    e_cache().lock().expect("cache poisoned").insert(key, s.clone());
    (*s).clone()
}

fn e_series_uncached(idx: &EIndex, prec: i64) -> Series {
    let n = idx.n;
    let nn = n as i64;
    let b = idx.brace();
    let w = idx.omega_exp();
    let len = prec.max(0) as usize;
    // Coefficient of q^e as an integer combination of powers of ζ.
    let mut acc: Vec<Vec<i64>> = vec![vec![0; n as usize]; len];
    let mut add = |e: i64, zpow: i64, c: i64| {
        if e >= 0 && (e as usize) < len {
            acc[e as usize][modn(zpow, nn) as usize] += c;
        }
    };
    if b != 0 {
        let mut k = 1;
        while k * b < prec {
            add(k * b, k * w, k);
            k += 1;
        }
    }
    let mut m = 1;
    while m * nn - b < prec {
        let mut k = 1;
        while k * (m * nn - b) < prec {
            add(k * b + m * k * nn, k * w, k);
            add(m * k * nn - k * b, -k * w, k);
            add(m * k * nn, 0, -2 * k);
            k += 1;
        }
        m += 1;
    }
    let mut coeffs: Vec<Cyc> = acc
        .iter()
        .map(|v| CycNum::from_poly(n, &v.iter().map(|&c| BigRational::from_integer(c.into())).collect::<Vec<_>>()))
        .collect();
    if b == 0 && len > 0 {
        let omega = Cyc::zeta_pow(n, w);
        let one_minus = &Cyc::one(n) - &omega;
        let c = &omega * &(&one_minus * &one_minus).inv().expect("ω ≠ 1");
        coeffs[0].add_assign_ref(&c);
    }
    if prec <= 0 {
        return Series::zero(n, prec);
    }
    Series::new(n, 0, prec, coeffs).expect("window")
}

/// Leading data of E(τ;r₁,s₁) − E(τ;r₂,s₂): returns `(θ, {r₁})` with the
/// difference equal to θ·q^{order}·(1 + O(q)). When {r₁} > {r₂} the pair is
/// swapped internally and θ negated.
pub fn leading_theta(i1: &EIndex, i2: &EIndex) -> Result<(Cyc, i64)> {
    if i1.n != i2.n {
        return Err(Error::LevelMismatch { left: i1.n, right: i2.n });
    }
    if i1.same_up_to_sign(i2) {
        return Err(Error::Degenerate(format!("{i1:?} ≡ ±{i2:?}")));
    }
    if i1.brace() > i2.brace() {
        let (t, o) = leading_theta(i2, i1)?;
        return Ok((t.neg(), o));
    }
    let n = i1.n;
    let nn = n as i64;
    let (b1, b2) = (i1.brace(), i2.brace());
    let w1 = Cyc::zeta_pow(n, i1.omega_exp());
    let w2 = Cyc::zeta_pow(n, i2.omega_exp());
    let one = Cyc::one(n);
    let theta = if b1 == b2 {
        let diff = &w1 - &w2;
        if b1 != 0 && 2 * b1 != nn {
            diff
        } else {
            let prod = &w1 * &w2;
            let t = &diff * &(&one - &prod);
            if 2 * b1 == nn {
                t.try_div(&prod)?.neg()
            } else {
                let a = &one - &w1;
                let c = &one - &w2;
                let den = &(&a * &a) * &(&c * &c);
                t.try_div(&den)?
            }
        }
    } else if b1 != 0 {
        w1
    } else {
        let a = &one - &w1;
        w1.try_div(&(&a * &a))?
    };
    if theta.is_zero() {
        return Err(Error::Degenerate("θ vanishes".into()));
    }
    Ok((theta, b1))
}

// Integer power series in one variable, truncated to a fixed length.
fn ps_mul(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn ps_pow(a: &[BigInt], mut e: u32, len: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::zero(); len];
    if len > 0 {
        acc[0] = BigInt::one();
    }
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = ps_mul(&acc, &base, len);
        }
        e >>= 1;
        if e > 0 {
            base = ps_mul(&base, &base, len);
        }
    }
    acc
}

/// Inverse of a series with constant term 1.
fn ps_inv_unit(a: &[BigInt], len: usize) -> Vec<BigInt> {
    debug_assert!(a[0].is_one());
    let mut out = vec![BigInt::zero(); len];
    out[0] = BigInt::one();
    for k in 1..len {
        let mut s = BigInt::zero();
        for i in 1..=k.min(a.len() - 1) {
            if !a[i].is_zero() {
                s += &a[i] * &out[k - i];
            }
        }
        out[k] = -s;
    }
    out
}

/// Π_{n ≥ 1} (1 − x^{step·n}) truncated to `len`.
fn euler_product(step: usize, len: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); len];
    p[0] = BigInt::one();
    let mut k = step;
    while k < len {
        for i in (k..len).rev() {
            let t = p[i - k].clone();
            p[i] -= t;
        }
        k += step;
    }
    p
}

/// Wraps an integer q₁-series (level 1) and moves it to level `n` (q₁ = q^n).
fn int_series_at_level(ord: i64, coeffs: Vec<BigInt>, n: u32) -> IntSeries {
    let prec = ord + coeffs.len() as i64;
    let c = coeffs.into_iter().map(|x| CycInt::from_scalar(1, x)).collect();
    IntSeries::new(1, ord, prec, c)
        .expect("window")
        .change_level(n)
        .expect("1 divides n")
}

fn sigma3(n: u64) -> BigInt {
    (1..=n).filter(|d| n % d == 0).map(|d| BigInt::from(d * d * d)).sum()
}

/// j = E₄³/Δ at level `n`, known below q^prec.
pub fn j_series_int(n: u32, prec: i64) -> IntSeries {
    let nn = n as i64;
    // Known q₁-exponents k < kmax, with q^{nk}, nk < prec.
    let kmax = (prec + nn - 1).div_euclid(nn).max(0);
    let len = (kmax + 1) as usize;
    let mut e4 = vec![BigInt::zero(); len];
    e4[0] = BigInt::one();
    for (k, c) in e4.iter_mut().enumerate().skip(1) {
        *c = sigma3(k as u64) * 240;
    }
    let e4c = ps_pow(&e4, 3, len);
    let p24 = ps_pow(&euler_product(1, len), 24, len);
    let g = ps_mul(&e4c, &ps_inv_unit(&p24, len), len);
    int_series_at_level(-1, g, n).truncate(prec)
}

pub fn j_series(n: u32, prec: i64) -> Series {
    to_rational(&j_series_int(n, prec))
}

/// g_N^{24/(N−1)} = q^{−N}·Π(1−q^{Nn})^e / Π(1−q^{N²n})^e for N ∈ {3, 4}.
pub fn g_pow_series_int(n: u32, prec: i64) -> Result<IntSeries> {
    if n != 3 && n != 4 {
        return Err(Error::Unsupported(format!("g_N power only for N ∈ {{3,4}}, got {n}")));
    }
    let nn = n as i64;
    let e = 24 / (n - 1);
    let kmax = (prec + nn - 1).div_euclid(nn).max(0);
    let len = (kmax + 1) as usize;
    let num = ps_pow(&euler_product(1, len), e, len);
    let den = ps_pow(&euler_product(n as usize, len), e, len);
    let g = ps_mul(&num, &ps_inv_unit(&den, len), len);
    Ok(int_series_at_level(-1, g, n).truncate(prec))
}

pub fn g_pow_series(n: u32, prec: i64) -> Result<Series> {
    Ok(to_rational(&g_pow_series_int(n, prec)?))
}

/// Classical λ = 16q_h·Π((1+q_h^{2n})/(1+q_h^{2n−1}))⁸ with q_h = q^{N/2}; even N.
pub fn lambda_classical_series_int(n: u32, prec: i64) -> Result<IntSeries> {
    if n % 2 != 0 {
        return Err(Error::Unsupported(format!("classical λ needs an even level, got {n}")));
    }
    let h = (n / 2) as i64;
    let kmax = (prec + h - 1).div_euclid(h).max(1);
    let len = kmax as usize;
    // Π(1+x^{2n}) and Π(1+x^{2n−1}) truncated to len.
    let mut num = vec![BigInt::zero(); len];
    num[0] = BigInt::one();
    let mut den = num.clone();
    for k in 1..len {
        let target = if k % 2 == 0 { &mut num } else { &mut den };
        for i in (k..len).rev() {
            let t = target[i - k].clone();
            target[i] += t;
        }
    }
    let ratio = ps_mul(&num, &ps_inv_unit(&den, len), len);
    let mut r8: Vec<BigInt> = ps_pow(&ratio, 8, len).into_iter().map(|c| c * 16).collect();
    r8.truncate(len.saturating_sub(1));
    let c = r8.into_iter().map(|x| CycInt::from_scalar(2, x)).collect::<Vec<_>>();
    let l = c.len() as i64;
    let s = IntSeries::new(2, 1, 1 + l, c).expect("window");
    Ok(s.change_level(n)?.truncate(prec))
}

pub fn lambda_classical_series(n: u32, prec: i64) -> Result<Series> {
    Ok(to_rational(&lambda_classical_series_int(n, prec)?))
}

pub fn to_rational(s: &IntSeries) -> Series {
    s.map(|c| c.to_rational())
}

/// The integral series equal to `s`, if every coefficient lies in O_N.
pub fn to_integral(s: &Series) -> Option<IntSeries> {
    if !s.is_integral() {
        return None;
    }
    Some(s.map(|c| c.to_integral().expect("checked integral")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn e_series_examples() {
        let e = e_series(&EIndex::new(0, 1, 3).unwrap(), 4);
        assert_eq!(e.coeff(0).unwrap(), Cyc::from_scalar(3, r(-1, 3)));
        assert!(e.coeff(1).unwrap().is_zero());
        assert!(e.coeff(2).unwrap().is_zero());
        assert_eq!(e.coeff(3).unwrap(), Cyc::from_i64(3, -3));
        let e = e_series(&EIndex::new(1, 0, 3).unwrap(), 2);
        assert_eq!(e.order().unwrap(), 1);
        assert!(e.leading().unwrap().is_one());
    }

    #[test]
    fn e_series_symmetries() {
        for n in [3u32, 4, 5, 7] {
            for rr in 0..n as i64 {
                for ss in 0..n as i64 {
                    if rr == 0 && ss == 0 {
                        continue;
                    }
                    let i = EIndex::new(rr, ss, n).unwrap();
                    let a = e_series(&i, 30);
                    assert_eq!(a, e_series(&i.neg(), 30));
                    assert_eq!(a, e_series(&EIndex::new(rr + n as i64, ss - n as i64, n).unwrap(), 30));
                }
            }
        }
    }

    #[test]
    fn e_transform_examples() {
        let t = SL2Mat::t(5);
        assert_eq!(e_transform(&EIndex::new(1, 0, 5).unwrap(), &t), EIndex::new(1, 1, 5).unwrap());
        assert_eq!(e_transform(&EIndex::new(0, 1, 5).unwrap(), &SL2Mat::s(5)), EIndex::new(4, 0, 5).unwrap());
        assert_eq!(e_transform(&EIndex::new(1, 2, 5).unwrap(), &SL2Mat::identity(5)), EIndex::new(1, 2, 5).unwrap());
    }

    #[test]
    fn theta_examples() {
        let (t, o) = leading_theta(&EIndex::new(1, 0, 3).unwrap(), &EIndex::new(1, 1, 3).unwrap()).unwrap();
        assert_eq!(o, 1);
        assert_eq!(t, &Cyc::one(3) - &Cyc::zeta(3));
        let (t, o) = leading_theta(&EIndex::new(0, 1, 3).unwrap(), &EIndex::new(1, 1, 3).unwrap()).unwrap();
        assert_eq!(o, 0);
        let z = Cyc::zeta(3);
        let d = &Cyc::one(3) - &z;
        assert_eq!(t, z.try_div(&(&d * &d)).unwrap());
        assert!(leading_theta(&EIndex::new(2, 1, 4).unwrap(), &EIndex::new(2, 3, 4).unwrap()).is_err());
    }

    #[test]
    fn j_coefficients() {
        let j = j_series_int(1, 3);
        assert_eq!(j.coeff(-1).unwrap(), CycInt::one(1));
        assert_eq!(j.coeff(0).unwrap(), CycInt::from_i64(1, 744));
        assert_eq!(j.coeff(1).unwrap(), CycInt::from_i64(1, 196884));
        assert_eq!(j.coeff(2).unwrap(), CycInt::from_i64(1, 21493760));
        let j5 = j_series_int(5, 11);
        assert_eq!(j5.order().unwrap(), -5);
        assert_eq!(j5.coeff(5).unwrap(), CycInt::from_i64(5, 196884));
        assert!(j5.on_grid(5));
        assert_eq!(j5.prec(), 11);
    }

    #[test]
    fn g_power_leading() {
        for n in [3u32, 4] {
            let g = g_pow_series_int(n, 20).unwrap();
            assert_eq!(g.order().unwrap(), -(n as i64));
            assert!(g.leading().unwrap().is_one());
            assert!(g.on_grid(n as i64));
        }
        assert!(g_pow_series_int(5, 10).is_err());
    }

    #[test]
    fn classical_lambda_leading() {
        let l = lambda_classical_series_int(4, 12).unwrap();
        assert_eq!(l.order().unwrap(), 2);
        assert_eq!(l.leading().unwrap(), &CycInt::from_i64(4, 16));
        assert_eq!(l.coeff(4).unwrap(), CycInt::from_i64(4, -128));
        assert_eq!(l.coeff(6).unwrap(), CycInt::from_i64(4, 704));
        assert!(lambda_classical_series_int(3, 10).is_err());
    }
}
