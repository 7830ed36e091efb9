//! Univariate polynomials over K_N (or O_N), with exact division, gcd,
//! square-free decomposition, k-th roots, reduction modulo a degree-one
//! prime, and numeric root finding.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{factorize, is_prime};
use crate::cyclotomic::CycNum;
use crate::error::{Error, Result};
use crate::scalar::{FieldScalar, Scalar};

/// `Σ coeffs[i]·X^i`; the last stored coefficient is nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T: Scalar> {
    level: u32,
    coeffs: Vec<CycNum<T>>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(level: u32, mut coeffs: Vec<CycNum<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { level, coeffs }
    }

    pub fn zero(level: u32) -> Self {
        Poly { level, coeffs: Vec::new() }
    }

    pub fn constant(c: CycNum<T>) -> Self {
        let level = c.level();
        Self::new(level, vec![c])
    }

    pub fn one(level: u32) -> Self {
        Self::constant(CycNum::one(level))
    }

    /// `X − r`.
    pub fn linear(r: &CycNum<T>) -> Self {
        Self::new(r.level(), vec![r.neg(), CycNum::one(r.level())])
    }

    /// `c·X^k`.
    pub fn monomial(c: CycNum<T>, k: usize) -> Self {
        let level = c.level();
        let mut coeffs = vec![CycNum::zero(level); k + 1];
        coeffs[k] = c;
        Self::new(level, coeffs)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeffs(&self) -> &[CycNum<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> CycNum<T> {
        self.coeffs.get(i).cloned().unwrap_or_else(|| CycNum::zero(self.level))
    }

    pub fn lead(&self) -> Option<&CycNum<T>> {
        self.coeffs.last()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.level, (0..n).map(|i| &self.coeff(i) + &o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new(self.level, (0..n).map(|i| &self.coeff(i) - &o.coeff(i)).collect())
    }

    pub fn neg(&self) -> Self {
        Poly { level: self.level, coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero(self.level);
        }
        let mut out = vec![CycNum::zero(self.level); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j].add_assign_ref(&(a * b));
            }
        }
        Self::new(self.level, out)
    }

    pub fn scale(&self, c: &CycNum<T>) -> Self {
        Self::new(self.level, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.level);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: &CycNum<T>) -> CycNum<T> {
        let mut acc = CycNum::zero(self.level);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.mul_i64(i as i64)).collect();
        Self::new(self.level, coeffs)
    }

    /// Applies σ_ℓ to every coefficient.
    pub fn galois(&self, ell: i64) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.sigma(ell)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(self.level, coeffs))
    }

    pub fn conj(&self) -> Self {
        self.galois(self.level as i64 - 1).expect("N−1 is a unit")
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&CycNum<T>) -> CycNum<U>) -> Poly<U> {
        Poly::new(self.level, self.coeffs.iter().map(f).collect())
    }

    /// Complex coefficients under ζ ↦ e^{2πi/N}, low degree first.
    pub fn embed(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.embed()).collect()
    }
}

impl<T: FieldScalar> Poly<T> {
    /// Scales to leading coefficient 1.
    pub fn monic(&self) -> Result<Self> {
        let l = self.lead().ok_or(Error::ZeroLeadingCoefficient)?.inv()?;
        Ok(self.scale(&l))
    }

    /// Quotient and remainder.
    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let linv = d.lead().expect("nonzero").inv()?;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Self::zero(self.level), self.clone()));
        }
        let mut q = vec![CycNum::zero(self.level); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] * &linv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j].sub_assign_ref(&(&c * dc));
            }
            q[k] = c;
        }
        r.truncate(dd);
        Ok((Self::new(self.level, q), Self::new(self.level, r)))
    }

    /// Exact quotient; fails on a nonzero remainder.
    pub fn exact_div(&self, d: &Self) -> Result<Self> {
        let (q, r) = self.divrem(d)?;
        if !r.is_zero() {
            return Err(Error::NonzeroRemainder { exponent: r.degree().unwrap_or(0) as i64 });
        }
        Ok(q)
    }

    /// Monic gcd (zero if both inputs vanish).
    pub fn gcd(&self, o: &Self) -> Result<Self> {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b)?.1;
            a = b;
            b = if r.is_zero() { r } else { r.monic()? };
        }
        if a.is_zero() {
            Ok(a)
        } else {
            a.monic()
        }
    }

    /// Yun's square-free decomposition of a monic polynomial: pairs `(g_k, k)`
    /// with `f = Π g_k^k`, each `g_k` monic, square-free, of positive degree,
    /// pairwise coprime.
    pub fn squarefree_decomposition(&self) -> Result<Vec<(Self, u32)>> {
        let f = self.monic()?;
        let mut out = Vec::new();
        let df = f.derivative();
        let a0 = f.gcd(&df)?;
        let mut b = f.exact_div(&a0)?;
        let mut c = df.exact_div(&a0)?;
        let mut d = c.sub(&b.derivative());
        let mut k = 1u32;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d)?;
            b = b.exact_div(&a)?;
            c = d.exact_div(&a)?;
            d = c.sub(&b.derivative());
            if a.degree().unwrap_or(0) > 0 {
                out.push((a, k));
            }
            k += 1;
        }
        Ok(out)
    }

    /// The monic `h` with `h^k = f` for monic `f`, if one exists.
    ///
    /// The coefficients of `h` come from the power-series root of the reversed
    /// polynomial; `h^k = f` is then checked exactly.
    pub fn kth_root_monic(&self, k: u32) -> Result<Option<Self>> {
        let d = self.degree().ok_or(Error::ZeroLeadingCoefficient)?;
        if !self.lead().expect("nonzero").is_one() {
            return Err(Error::InvalidArgument("kth_root_monic needs a monic polynomial".into()));
        }
        if d % k as usize != 0 {
            return Ok(None);
        }
        let m = d / k as usize;
        // rev f = 1 + a_1 t + … ; g = (rev f)^{1/k}, g' f = (1/k) f' g.
        let a: Vec<CycNum<T>> = (0..=d).map(|i| self.coeff(d - i)).collect();
        let alpha = T::from_ratio(&BigInt::one(), &BigInt::from(k));
        let mut g: Vec<CycNum<T>> = vec![CycNum::one(self.level)];
        for n in 1..=m {
            let mut s = CycNum::zero(self.level);
            for j in 1..=n.min(d) {
                let w = alpha.mul_i64(j as i64) - T::from_i64((n - j) as i64);
                s.add_assign_ref(&(&a[j] * &g[n - j]).scale(&w));
            }
            g.push(s.scale(&T::from_ratio(&BigInt::one(), &BigInt::from(n))));
        }
        let h = Self::new(self.level, g.into_iter().rev().collect());
        Ok(if &h.pow(k) == self { Some(h) } else { None })
    }
}

/// Arithmetic in F_p for odd primes p < 2³¹.
#[derive(Clone, Copy, Debug)]
pub struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        (a % self.p != 0).then(|| self.pow(a, self.p - 2))
    }

    /// An element of exact order `n` (requires n | p − 1).
    pub fn root_of_unity(&self, n: u64) -> u64 {
        assert_eq!((self.p - 1) % n, 0);
        let qs: Vec<u64> = factorize(n).into_iter().map(|(q, _)| q).collect();
        (2..self.p)
            .map(|x| self.pow(x, (self.p - 1) / n))
            .find(|&w| qs.iter().all(|&q| self.pow(w, n / q) != 1))
            .expect("F_p^× is cyclic")
    }

    fn reduce_int(&self, v: &BigInt) -> u64 {
        let p = BigInt::from(self.p);
        v.mod_floor(&p).to_u64().expect("reduced")
    }

    /// Image of a rational under Z_(p) → F_p, if p does not divide the denominator.
    pub fn reduce_rational(&self, v: &BigRational) -> Option<u64> {
        let d = self.inv(self.reduce_int(v.denom()))?;
        Some(self.mul(self.reduce_int(v.numer()), d))
    }

    /// Monic gcd of polynomials over F_p (low degree first, trimmed).
    pub fn poly_gcd(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let trim = |mut v: Vec<u64>| {
            while v.last() == Some(&0) {
                v.pop();
            }
            v
        };
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let linv = self.inv(*b.last().unwrap()).unwrap();
            while a.len() >= b.len() {
                let c = self.mul(*a.last().unwrap(), linv);
                let off = a.len() - b.len();
                for (j, &bj) in b.iter().enumerate() {
                    a[off + j] = self.sub(a[off + j], self.mul(c, bj));
                }
                a = trim(a);
                if a.is_empty() {
                    break;
                }
            }
            std::mem::swap(&mut a, &mut b);
        }
        if let Some(&l) = a.last() {
            let li = self.inv(l).unwrap();
            a.iter_mut().for_each(|x| *x = self.mul(*x, li));
        }
        a
    }
}

/// Primes `p ≡ 1 mod n`, in increasing order, starting above `start`.
pub fn primes_one_mod(n: u64, start: u64) -> impl Iterator<Item = u64> {
    let first = start / n * n + 1;
    (0..).map(move |k| first + k * n).filter(move |&p| p > start && p > 2 && is_prime(p))
}

impl Poly<BigRational> {
    /// Image under ζ ↦ w in F_p; `None` if some coefficient is not p-integral.
    pub fn reduce_mod(&self, f: &PrimeField, w: u64) -> Option<Vec<u64>> {
        self.coeffs
            .iter()
            .map(|c| {
                let mut acc = 0;
                let mut wp = 1;
                for x in c.coords() {
                    acc = f.add(acc, f.mul(f.reduce_rational(x)?, wp));
                    wp = f.mul(wp, w);
                }
                Some(acc)
            })
            .collect()
    }

    /// Certifies that the polynomial is square-free over K_N by finding a
    /// degree-one prime 𝔭 of K_N, with the polynomial 𝔭-integral and its
    /// leading coefficient a 𝔭-unit, such that the reduction is coprime to its
    /// derivative. Returns the prime used.
    pub fn squarefree_certificate(&self, attempts: usize) -> Option<u64> {
        let d = self.degree()?;
        let n = self.level as u64;
        for p in primes_one_mod(n, 1 << 20).take(attempts) {
            let f = PrimeField { p };
            let w = f.root_of_unity(n);
            let Some(red) = self.reduce_mod(&f, w) else { continue };
            if red.len() != d + 1 || red[d] == 0 {
                continue;
            }
            let der: Vec<u64> = red.iter().enumerate().skip(1).map(|(i, &c)| f.mul(c, i as u64 % p)).collect();
            if f.poly_gcd(&red, &der).len() == 1 {
                return Some(p);
            }
        }
        None
    }
}

/// All complex roots of `Σ c_i X^i` by Durand–Kerner iteration, followed by
/// Newton polishing.
pub fn roots_numeric(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return Vec::new();
    }
    let lead = c[d];
    let c: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::zero(), |acc, x| acc * z + x);
    let deval = |z: Complex64| {
        c.iter().enumerate().skip(1).rev().fold(Complex64::zero(), |acc, (i, x)| acc * z + x * i as f64)
    };
    let radius = 1.0 + c[..d].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32) * radius.min(2.0)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..d {
            let mut den = Complex64::one();
            for j in 0..d {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let dv = deval(*zi);
            if dv.norm() > 0.0 {
                *zi -= eval(*zi) / dv;
            }
        }
    }
    z
}

/// Largest distance from a point of `a` to its nearest partner in `b`, with
/// each point of `b` used once (greedy matching).
pub fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, dist) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        if k == usize::MAX {
            return f64::INFINITY;
        }
        used[k] = true;
        worst = worst.max(dist);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Cyc;

    fn lin(r: Cyc) -> Poly<BigRational> {
        Poly::linear(&r)
    }

    #[test]
    fn divrem_and_gcd() {
        let n = 5;
        let a = lin(Cyc::zeta(n)).mul(&lin(Cyc::from_i64(n, 2)));
        let b = lin(Cyc::zeta(n)).mul(&lin(Cyc::from_i64(n, 3)));
        assert_eq!(a.gcd(&b).unwrap(), lin(Cyc::zeta(n)));
        let (q, r) = a.divrem(&lin(Cyc::from_i64(n, 2))).unwrap();
        assert!(r.is_zero());
        assert_eq!(q, lin(Cyc::zeta(n)));
    }

    #[test]
    fn yun_and_kth_root() {
        let n = 3;
        let g1 = lin(Cyc::zeta(n));
        let g2 = lin(Cyc::from_i64(n, 1)).mul(&lin(Cyc::from_i64(n, -2)));
        let f = g1.mul(&g2.pow(3));
        let dec = f.squarefree_decomposition().unwrap();
        assert_eq!(dec, vec![(g1.clone(), 1), (g2.clone(), 3)]);
        let h = g1.mul(&g2);
        assert_eq!(h.pow(3).kth_root_monic(3).unwrap(), Some(h.clone()));
        assert_eq!(f.kth_root_monic(3).unwrap(), None);
    }

    #[test]
    fn modular_squarefree() {
        let n = 7;
        let g = lin(Cyc::zeta(n)).mul(&lin(Cyc::from_i64(n, 5)));
        assert!(g.squarefree_certificate(5).is_some());
        assert!(g.pow(2).squarefree_certificate(5).is_none());
    }

    #[test]
    fn numeric_roots() {
        let n = 4;
        let f = lin(Cyc::zeta(n)).mul(&lin(Cyc::from_i64(n, 3))).mul(&lin(Cyc::from_i64(n, -1)));
        let r = roots_numeric(&f.embed());
        let expect = [Complex64::i(), Complex64::new(3.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert!(match_distance(&r, &expect) < 1e-12);
    }
}
