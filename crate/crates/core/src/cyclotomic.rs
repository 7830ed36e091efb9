//! Exact arithmetic in K_N = Q(ζ_N) and its ring of integers Z[ζ_N].
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(N)-1}` and are
//! always reduced modulo Φ_N, so equality is coordinate-wise and the
//! integrality test is a coordinate test (the power basis is an integral
//! basis of Z[ζ_N]).
//!
//! Each level has one leaked, immutable [`CycCtx`] holding Φ_N and the
//! reduced powers ζ^k for `0 ≤ k < N`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, euler_phi, gcd, mobius, modn};
use crate::error::{Error, Result};
use crate::scalar::{ExactScalar, FieldScalar, Scalar};

/// Per-level data: Φ_N and the reduction table.
#[derive(Debug)]
pub struct CycCtx {
    pub n: u32,
    pub phi: usize,
    /// Coefficients of Φ_N, constant term first; monic of degree `phi`.
    pub cyclo: Vec<i64>,
    /// `zeta_pow[k]` is ζ^k in the power basis, `0 ≤ k < N`.
    pub zeta_pow: Vec<Vec<i64>>,
}

fn registry() -> &'static Mutex<HashMap<u32, &'static CycCtx>> {
    static REG: OnceLock<Mutex<HashMap<u32, &'static CycCtx>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Φ_N = Π_{d | N} (x^d − 1)^{μ(N/d)}, with integer coefficients.
pub fn cyclotomic_poly(n: u32) -> Vec<i64> {
    let mut num: Vec<BigInt> = vec![BigInt::one()];
    let mut den: Vec<BigInt> = vec![BigInt::one()];
    for d in divisors(n as u64) {
        let m = mobius(n as u64 / d);
        if m == 0 {
            continue;
        }
        let mut f = vec![BigInt::zero(); d as usize + 1];
        f[0] = BigInt::from(-1);
        f[d as usize] = BigInt::one();
        let target = if m == 1 { &mut num } else { &mut den };
        *target = int_poly_mul(target, &f);
    }
    let q = int_poly_exact_div(&num, &den);
    q.iter().map(|c| c.to_i64().expect("Φ_N coefficient overflow")).collect()
}

fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Division by a monic polynomial with zero remainder.
fn int_poly_exact_div(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![BigInt::zero(); num.len() - dd];
    for k in (0..q.len()).rev() {
        let c = r[k + dd].clone();
        for (j, dj) in den.iter().enumerate() {
            r[k + j] -= &c * dj;
        }
        q[k] = c;
    }
    debug_assert!(r.iter().all(Zero::is_zero));
    q
}

impl CycCtx {
    /// Returns the shared context for level `n ≥ 1`.
    pub fn get(n: u32) -> &'static CycCtx {
        assert!(n >= 1, "cyclotomic level must be positive");
        let mut reg = registry().lock().expect("cyclotomic registry poisoned");
        if let Some(c) = reg.get(&n) {
            return c;
        }
        let ctx: &'static CycCtx = Box::leak(Box::new(CycCtx::build(n)));
        reg.insert(n, ctx);
        ctx
    }

    fn build(n: u32) -> CycCtx {
        let cyclo = cyclotomic_poly(n);
        let phi = euler_phi(n as u64) as usize;
        debug_assert_eq!(cyclo.len(), phi + 1);
        let mut zeta_pow = Vec::with_capacity(n as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        if phi == 1 {
            // N ∈ {1, 2}: ζ = −cyclo[0].
            for _ in 0..n {
                zeta_pow.push(cur.clone());
                cur[0] *= -cyclo[0];
            }
        } else {
            for _ in 0..n {
                zeta_pow.push(cur.clone());
                let top = cur[phi - 1];
                let mut next = vec![0i64; phi];
                next[1..phi].copy_from_slice(&cur[..(phi - 1)]);
                for (j, c) in cyclo.iter().take(phi).enumerate() {
                    next[j] -= top * c;
                }
                cur = next;
            }
        }
        CycCtx { n, phi, cyclo, zeta_pow }
    }

    /// ζ^k for any integer `k`.
    pub fn zeta_pow_any(&self, k: i64) -> &[i64] {
        &self.zeta_pow[modn(k, self.n as i64) as usize]
    }

    /// Reduces a raw product vector (length ≤ 2φ−1) into the power basis.
    pub fn reduce_raw<T: Scalar>(&self, raw: &[T]) -> Vec<T> {
        let mut out: Vec<T> = raw.iter().take(self.phi).cloned().collect();
        out.resize(self.phi, T::zero());
        for (k, c) in raw.iter().enumerate().skip(self.phi) {
            if c.is_zero() {
                continue;
            }
            for (j, z) in self.zeta_pow_any(k as i64).iter().enumerate() {
                if *z != 0 {
                    out[j] += &c.mul_i64(*z);
                }
            }
        }
        out
    }
}

/// An element of K_N (or O_N when `T = BigInt`).
#[derive(Clone)]
pub struct CycNum<T: Scalar> {
    ctx: &'static CycCtx,
    coords: Vec<T>,
}

impl<T: Scalar> PartialEq for CycNum<T> {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.n == other.ctx.n && self.coords == other.coords
    }
}

impl<T: Scalar> fmt::Debug for CycNum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNum[N={}]{:?}", self.ctx.n, self.coords)
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for CycNum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})ζ")?,
                _ => write!(f, "({c})ζ^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl<T: Scalar> CycNum<T> {
    pub fn zero(n: u32) -> Self {
        let ctx = CycCtx::get(n);
        CycNum { ctx, coords: vec![T::zero(); ctx.phi] }
    }

    pub fn one(n: u32) -> Self {
        Self::from_scalar(n, T::one())
    }

    pub fn from_scalar(n: u32, v: T) -> Self {
        let mut z = Self::zero(n);
        z.coords[0] = v;
        z
    }

    pub fn from_i64(n: u32, v: i64) -> Self {
        Self::from_scalar(n, T::from_i64(v))
    }

    /// ζ^k for any integer `k`.
    pub fn zeta_pow(n: u32, k: i64) -> Self {
        let ctx = CycCtx::get(n);
        let coords = ctx.zeta_pow_any(k).iter().map(|&c| T::from_i64(c)).collect();
        CycNum { ctx, coords }
    }

    pub fn zeta(n: u32) -> Self {
        Self::zeta_pow(n, 1)
    }

    /// Builds `Σ c_i ζ^i` from any number of coefficients, reducing as needed.
    pub fn from_poly(n: u32, poly: &[T]) -> Self {
        let ctx = CycCtx::get(n);
        let mut coords = vec![T::zero(); ctx.phi];
        for (i, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, z) in ctx.zeta_pow_any(i as i64).iter().enumerate() {
                if *z != 0 {
                    coords[j] += &c.mul_i64(*z);
                }
            }
        }
        CycNum { ctx, coords }
    }

    /// Wraps already-reduced coordinates.
    pub fn from_coords(n: u32, coords: Vec<T>) -> Result<Self> {
        let ctx = CycCtx::get(n);
        if coords.len() != ctx.phi {
            return Err(Error::Malformed(format!(
                "expected {} coordinates at level {n}, got {}",
                ctx.phi,
                coords.len()
            )));
        }
        Ok(CycNum { ctx, coords })
    }

    pub fn level(&self) -> u32 {
        self.ctx.n
    }

    pub fn ctx(&self) -> &'static CycCtx {
        self.ctx
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(Zero::is_zero)
    }

    /// True iff the element lies in Z[ζ_N].
    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(Scalar::is_integral)
    }

    /// The rational number represented, if the element lies in Q.
    pub fn as_scalar(&self) -> Option<&T> {
        self.coords[1..].iter().all(Zero::is_zero).then(|| &self.coords[0])
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx.n != other.ctx.n {
            return Err(Error::LevelMismatch { left: self.ctx.n, right: other.ctx.n });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        out.add_assign_ref(other);
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        out.sub_assign_ref(other);
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut raw = vec![T::zero(); 2 * self.ctx.phi - 1];
        mul_raw_acc(&self.coords, &other.coords, &mut raw);
        Ok(CycNum { ctx: self.ctx, coords: self.ctx.reduce_raw(&raw) })
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        assert_eq!(self.ctx.n, other.ctx.n, "cyclotomic level mismatch");
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += b;
        }
    }

    pub fn sub_assign_ref(&mut self, other: &Self) {
        assert_eq!(self.ctx.n, other.ctx.n, "cyclotomic level mismatch");
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a -= b;
        }
    }

    pub fn neg(&self) -> Self {
        CycNum { ctx: self.ctx, coords: self.coords.iter().map(|c| -c.clone()).collect() }
    }

    pub fn scale(&self, k: &T) -> Self {
        CycNum { ctx: self.ctx, coords: self.coords.iter().map(|c| c.mul_ref(k)).collect() }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        CycNum { ctx: self.ctx, coords: self.coords.iter().map(|c| c.mul_i64(k)).collect() }
    }

    /// Exact division of every coordinate by `k`.
    pub fn div_i64_exact(&self, k: i64) -> Option<Self> {
        let coords = self
            .coords
            .iter()
            .map(|c| c.div_i64_exact(k))
            .collect::<Option<Vec<_>>>()?;
        Some(CycNum { ctx: self.ctx, coords })
    }

    /// Multiplication by ζ^k.
    pub fn mul_zeta_pow(&self, k: i64) -> Self {
        self * &Self::zeta_pow(self.level(), k)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.level());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// The automorphism σ_ℓ : ζ ↦ ζ^ℓ.
    pub fn sigma(&self, ell: i64) -> Result<Self> {
        let n = self.ctx.n as i64;
        if gcd(ell, n) != 1 {
            return Err(Error::NotCoprime { ell, level: self.ctx.n });
        }
        Ok(self.sigma_unchecked(ell))
    }

    pub(crate) fn sigma_unchecked(&self, ell: i64) -> Self {
        let mut coords = vec![T::zero(); self.ctx.phi];
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, z) in self.ctx.zeta_pow_any(i as i64 * ell).iter().enumerate() {
                if *z != 0 {
                    coords[j] += &c.mul_i64(*z);
                }
            }
        }
        CycNum { ctx: self.ctx, coords }
    }

    /// Complex conjugation, σ_{N−1}.
    pub fn conj(&self) -> Self {
        self.sigma_unchecked(self.ctx.n as i64 - 1)
    }

    /// Image under K_N ⊂ K_M (requires N | M), sending ζ_N to ζ_M^{M/N}.
    pub fn embed_into(&self, m: u32) -> Result<Self> {
        let n = self.ctx.n;
        if m % n != 0 {
            return Err(Error::InvalidArgument(format!("level {n} does not divide {m}")));
        }
        let step = (m / n) as i64;
        let target = CycCtx::get(m);
        let mut coords = vec![T::zero(); target.phi];
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, z) in target.zeta_pow_any(i as i64 * step).iter().enumerate() {
                if *z != 0 {
                    coords[j] += &c.mul_i64(*z);
                }
            }
        }
        Ok(CycNum { ctx: target, coords })
    }

    /// Value at ζ = exp(2πi/N).
    pub fn embed(&self) -> Complex<f64> {
        self.embed_as::<f64>()
    }

    /// Value at ζ = exp(2πi/N) in the float type `F`.
    pub fn embed_as<F: Float>(&self) -> Complex<F> {
        let n = self.ctx.n as f64;
        let mut acc = Complex::new(F::zero(), F::zero());
        for (i, c) in self.coords.iter().enumerate() {
            let v = F::from(c.to_f64()).unwrap_or_else(F::nan);
            let ang = 2.0 * PI * i as f64 / n;
            let z = Complex::new(F::from(ang.cos()).unwrap(), F::from(ang.sin()).unwrap());
            acc = acc + z * v;
        }
        acc
    }

    /// Maps coordinates through `f`, keeping the level.
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> CycNum<U> {
        CycNum { ctx: self.ctx, coords: self.coords.iter().map(f).collect() }
    }

    pub fn max_abs_coord(&self) -> f64 {
        self.coords.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

/// Accumulates the unreduced product of two coordinate vectors into `raw`.
pub fn mul_raw_acc<T: Scalar>(a: &[T], b: &[T], raw: &mut [T]) {
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            raw[i + j] += &x.mul_ref(y);
        }
    }
}

impl<T: FieldScalar> CycNum<T> {
    /// Multiplicative inverse via the extended Euclidean algorithm with Φ_N.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let modulus: Vec<T> = self.ctx.cyclo.iter().map(|&c| T::from_i64(c)).collect();
        let s = poly_inverse_mod(&self.coords, &modulus);
        Ok(CycNum::from_poly(self.ctx.n, &s))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self * &other.inv()?)
    }

    /// Norm down to Q: the product of all Galois conjugates.
    pub fn norm(&self) -> T {
        let n = self.ctx.n as i64;
        let mut acc = Self::one(self.ctx.n);
        for ell in 1..n.max(2) {
            if gcd(ell, n) == 1 {
                acc = &acc * &self.sigma_unchecked(ell);
            }
        }
        acc.coords[0].clone()
    }
}

fn trim<T: Scalar>(p: &mut Vec<T>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_divrem<T: FieldScalar>(a: &[T], b: &[T]) -> (Vec<T>, Vec<T>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = b[db].recip();
    if r.len() <= db {
        return (vec![T::zero()], r);
    }
    let mut q = vec![T::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db].mul_ref(&lead_inv);
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[k + j] -= &c.mul_ref(bj);
            }
        }
        q[k] = c;
    }
    r.truncate(db.max(1));
    trim(&mut r);
    (q, r)
}

fn poly_mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    mul_raw_acc(a, b, &mut out);
    out
}

fn poly_sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = a.to_vec();
    if out.len() < b.len() {
        out.resize(b.len(), T::zero());
    }
    for (o, x) in out.iter_mut().zip(b) {
        *o -= x;
    }
    trim(&mut out);
    out
}

/// `s` with `s·a ≡ 1 (mod m)` for coprime `a`, `m` over a field.
fn poly_inverse_mod<T: FieldScalar>(a: &[T], m: &[T]) -> Vec<T> {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    trim(&mut r1);
    let mut s0 = vec![T::zero()];
    let mut s1 = vec![T::one()];
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_divrem(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    // r0 is a nonzero constant gcd.
    let c = r0[0].recip();
    s0.iter().map(|x| x.mul_ref(&c)).collect()
}

impl CycNum<BigInt> {
    pub fn to_rational(&self) -> CycNum<BigRational> {
        self.map(|c| BigRational::from_integer(c.clone()))
    }

    /// Inverse in K_N; the result need not be integral.
    pub fn inv_rational(&self) -> Result<CycNum<BigRational>> {
        self.to_rational().inv()
    }
}

impl CycNum<BigRational> {
    /// The same element over Z, if all coordinates are integers.
    pub fn to_integral(&self) -> Option<CycNum<BigInt>> {
        self.is_integral().then(|| self.map(|c| c.to_integer()))
    }

    /// Returns `(x, d)` with `self = x / d`, `x` integral and `d ≥ 1` the least such.
    pub fn clear_denominators(&self) -> (CycNum<BigInt>, BigInt) {
        let d = self
            .coords
            .iter()
            .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
        let x = self.map(|c| (c * BigRational::from_integer(d.clone())).to_integer());
        (x, d)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl<T: Scalar> std::ops::$tr<&CycNum<T>> for &CycNum<T> {
            type Output = CycNum<T>;
            fn $m(self, rhs: &CycNum<T>) -> CycNum<T> {
                self.$f(rhs).expect("cyclotomic level mismatch")
            }
        }
        impl<T: Scalar> std::ops::$tr<CycNum<T>> for CycNum<T> {
            type Output = CycNum<T>;
            fn $m(self, rhs: CycNum<T>) -> CycNum<T> {
                (&self).$f(&rhs).expect("cyclotomic level mismatch")
            }
        }
    };
}
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl<T: Scalar> std::ops::Neg for &CycNum<T> {
    type Output = CycNum<T>;
    fn neg(self) -> CycNum<T> {
        CycNum::neg(self)
    }
}

impl<T: Scalar> std::ops::Neg for CycNum<T> {
    type Output = CycNum<T>;
    fn neg(self) -> CycNum<T> {
        CycNum::neg(&self)
    }
}

/// JSON form `{"N": n, "coords": [["num","den"], …]}`.
#[derive(Serialize, Deserialize)]
pub struct CycJson {
    #[serde(rename = "N")]
    pub n: u32,
    pub coords: Vec<[String; 2]>,
}

impl<T: ExactScalar> CycNum<T> {
    pub fn to_json(&self) -> CycJson {
        CycJson {
            n: self.ctx.n,
            coords: self
                .coords
                .iter()
                .map(|c| {
                    let (a, b) = c.numer_denom();
                    [a.to_string(), b.to_string()]
                })
                .collect(),
        }
    }

    pub fn from_json(j: &CycJson) -> Result<Self> {
        let coords = j
            .coords
            .iter()
            .map(|[a, b]| {
                let a: BigInt = a.parse().map_err(|_| Error::Malformed(format!("bad integer {a}")))?;
                let b: BigInt = b.parse().map_err(|_| Error::Malformed(format!("bad integer {b}")))?;
                T::from_numer_denom(a, b)
                    .ok_or_else(|| Error::Malformed("coordinate outside the scalar ring".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coords(j.n, coords)
    }
}

impl<T: ExactScalar> Serialize for CycNum<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de, T: ExactScalar> Deserialize<'de> for CycNum<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CycJson::deserialize(d)?;
        Self::from_json(&j).map_err(serde::de::Error::custom)
    }
}
