//! Truncated Laurent series in q = exp(2πiτ/N) with coefficients in K_N.
//!
//! A series stores the coefficients of `q^ord, …, q^{prec-1}`; every
//! exponent below `prec` is known exactly. After normalization the first
//! stored coefficient is nonzero, or the series is zero on its whole window
//! and is stored as `ord = prec` with no coefficients. Precision is only
//! ever propagated, never extended.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{mul_raw_acc, CycJson, CycNum};
use crate::error::{Error, Result};
use crate::scalar::{ExactScalar, FieldScalar, Scalar};

/// Work (in coefficient products) above which multiplication runs in parallel.
const PAR_THRESHOLD: usize = 1 << 12;

#[derive(Clone, Debug, PartialEq)]
pub struct QSeries<T: Scalar> {
    level: u32,
    ord: i64,
    prec: i64,
    coeffs: Vec<CycNum<T>>,
}

/// Result of comparing two series on their common window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Agreement {
    pub agree: bool,
    /// Exponents `lo..hi` were compared.
    pub lo: i64,
    pub hi: i64,
    /// First exponent at which the series differ.
    pub first_difference: Option<i64>,
}

impl Agreement {
    pub fn width(&self) -> i64 {
        self.hi - self.lo
    }
}

impl<T: Scalar> QSeries<T> {
    /// Builds a series from the coefficients of `q^ord, q^{ord+1}, …` known below `prec`.
    pub fn new(level: u32, ord: i64, prec: i64, coeffs: Vec<CycNum<T>>) -> Result<Self> {
        if coeffs.len() as i64 != prec - ord {
            return Err(Error::Malformed(format!(
                "window [{ord},{prec}) needs {} coefficients, got {}",
                prec - ord,
                coeffs.len()
            )));
        }
        if let Some(c) = coeffs.iter().find(|c| c.level() != level) {
            return Err(Error::LevelMismatch { left: level, right: c.level() });
        }
        Ok(Self::normalized(level, ord, prec, coeffs))
    }

    fn normalized(level: u32, ord: i64, prec: i64, mut coeffs: Vec<CycNum<T>>) -> Self {
        let lead = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(coeffs.len());
        coeffs.drain(..lead);
        QSeries { level, ord: ord + lead as i64, prec, coeffs }
    }

    /// Builds the series with coefficient `f(e)` at each exponent `ord ≤ e < prec`.
    pub fn from_fn(level: u32, ord: i64, prec: i64, f: impl Fn(i64) -> CycNum<T>) -> Self {
        let coeffs = (ord..prec).map(f).collect();
        Self::normalized(level, ord, prec.max(ord), coeffs)
    }

    /// The zero series known below `prec`.
    pub fn zero(level: u32, prec: i64) -> Self {
        QSeries { level, ord: prec, prec, coeffs: Vec::new() }
    }

    pub fn constant(c: CycNum<T>, prec: i64) -> Self {
        Self::monomial(c, 0, prec)
    }

    pub fn one(level: u32, prec: i64) -> Self {
        Self::constant(CycNum::one(level), prec)
    }

    /// `c·q^k` known below `prec`.
    pub fn monomial(c: CycNum<T>, k: i64, prec: i64) -> Self {
        let level = c.level();
        if k >= prec {
            return Self::zero(level, prec);
        }
        let mut coeffs = vec![CycNum::zero(level); (prec - k) as usize];
        coeffs[0] = c;
        Self::normalized(level, k, prec, coeffs)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// First stored exponent (equals `prec` for a series zero on its window).
    pub fn ord(&self) -> i64 {
        self.ord
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn coeffs(&self) -> &[CycNum<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Number of known exponents from the leading term on.
    pub fn rel_prec(&self) -> i64 {
        self.prec - self.ord
    }

    /// Order of the series; fails when it vanishes on the whole window.
    pub fn order(&self) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::InsufficientPrecision(format!(
                "series vanishes on its window below q^{}",
                self.prec
            )));
        }
        Ok(self.ord)
    }

    pub fn leading(&self) -> Result<&CycNum<T>> {
        self.coeffs.first().ok_or(Error::ZeroLeadingCoefficient)
    }

    /// Coefficient of `q^e`; fails for `e ≥ prec`.
    pub fn coeff(&self, e: i64) -> Result<CycNum<T>> {
        if e >= self.prec {
            return Err(Error::InsufficientPrecision(format!(
                "coefficient of q^{e} requested, known below q^{}",
                self.prec
            )));
        }
        Ok(self.coeff_ref(e).cloned().unwrap_or_else(|| CycNum::zero(self.level)))
    }

    fn coeff_ref(&self, e: i64) -> Option<&CycNum<T>> {
        if e < self.ord || e >= self.prec {
            None
        } else {
            Some(&self.coeffs[(e - self.ord) as usize])
        }
    }

    /// Forgets every coefficient at or above `prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        if prec <= self.ord {
            return Self::zero(self.level, prec);
        }
        let coeffs = self.coeffs[..(prec - self.ord) as usize].to_vec();
        Self::normalized(self.level, self.ord, prec, coeffs)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            return Err(Error::LevelMismatch { left: self.level, right: other.level });
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sub: bool) -> Result<Self> {
        self.check(other)?;
        let prec = self.prec.min(other.prec);
        let ord = self.ord.min(other.ord).min(prec);
        let coeffs = (ord..prec)
            .map(|e| {
                let mut c = self.coeff_ref(e).cloned().unwrap_or_else(|| CycNum::zero(self.level));
                if let Some(d) = other.coeff_ref(e) {
                    if sub {
                        c.sub_assign_ref(d);
                    } else {
                        c.add_assign_ref(d);
                    }
                }
                c
            })
            .collect();
        Ok(Self::normalized(self.level, ord, prec, coeffs))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    /// Product; `prec = min(a.prec + b.ord, b.prec + a.ord)`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let ord = self.ord + other.ord;
        let prec = (self.prec + other.ord).min(other.prec + self.ord);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.level, prec));
        }
        let len = (prec - ord) as usize;
        let phi = self.coeffs[0].ctx().phi;
        let nz_a: Vec<usize> = nonzero_indices(&self.coeffs, len);
        let nz_b: Vec<bool> = (0..len).map(|j| j < other.coeffs.len() && !other.coeffs[j].is_zero()).collect();
        let ctx = self.coeffs[0].ctx();
        let one_coeff = |k: usize| -> CycNum<T> {
            let mut raw = vec![T::zero(); 2 * phi - 1];
            for &i in &nz_a {
                if i > k {
                    break;
                }
                if nz_b[k - i] {
                    mul_raw_acc(self.coeffs[i].coords(), other.coeffs[k - i].coords(), &mut raw);
                }
            }
            CycNum::from_coords(self.level, ctx.reduce_raw(&raw)).expect("reduced length")
        };
        let work = nz_a.len() * len * phi * phi;
        let coeffs: Vec<CycNum<T>> = if work > PAR_THRESHOLD {
            (0..len).into_par_iter().map(one_coeff).collect()
        } else {
            (0..len).map(one_coeff).collect()
        };
        Ok(Self::normalized(self.level, ord, prec, coeffs))
    }

    pub fn neg(&self) -> Self {
        QSeries {
            level: self.level,
            ord: self.ord,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(CycNum::neg).collect(),
        }
    }

    /// Multiplies every coefficient by the constant `c`.
    pub fn scale(&self, c: &CycNum<T>) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        Self::normalized(self.level, self.ord, self.prec, coeffs)
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x.mul_i64(k)).collect();
        Self::normalized(self.level, self.ord, self.prec, coeffs)
    }

    /// Adds the constant `c` (a no-op when the window ends at or below q^0).
    pub fn add_scalar(&self, c: &CycNum<T>) -> Self {
        if self.prec <= 0 {
            return self.clone();
        }
        self.try_add(&Self::constant(c.clone(), self.prec)).expect("same level")
    }

    /// Multiplies by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        QSeries { level: self.level, ord: self.ord + k, prec: self.prec + k, coeffs: self.coeffs.clone() }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::one(self.level, i64::MAX / 4);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        if acc.prec > self.prec.max(0) + i64::MAX / 8 {
            // e = 0: the constant 1 is known to any precision; keep a finite window.
            return Self::one(self.level, self.prec.max(1));
        }
        acc
    }

    /// Inverse given the inverse of the leading coefficient; works over any ring
    /// in which that coefficient is a unit.
    pub fn inv_with(&self, lead_inv: &CycNum<T>) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let len = self.coeffs.len();
        let ctx = self.coeffs[0].ctx();
        let phi = ctx.phi;
        let nz: Vec<usize> = nonzero_indices(&self.coeffs, len);
        let mut out: Vec<CycNum<T>> = Vec::with_capacity(len);
        out.push(lead_inv.clone());
        for k in 1..len {
            let mut raw = vec![T::zero(); 2 * phi - 1];
            for &i in nz.iter().skip(1) {
                if i > k {
                    break;
                }
                if !out[k - i].is_zero() {
                    mul_raw_acc(self.coeffs[i].coords(), out[k - i].coords(), &mut raw);
                }
            }
            let s = CycNum::from_coords(self.level, ctx.reduce_raw(&raw)).expect("reduced length");
            out.push((&s * lead_inv).neg());
        }
        Ok(Self::normalized(self.level, -self.ord, self.prec - 2 * self.ord, out))
    }

    /// Applies σ_ℓ to every coefficient.
    pub fn galois(&self, ell: i64) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.sigma(ell)).collect::<Result<Vec<_>>>()?;
        Ok(QSeries { level: self.level, ord: self.ord, prec: self.prec, coeffs })
    }

    /// Complex conjugation of coefficients.
    pub fn conj(&self) -> Self {
        self.galois(self.level as i64 - 1).expect("N−1 is a unit")
    }

    /// The series of `f(ζ^i q)`: the coefficient of `q^e` is multiplied by ζ^{ie}.
    pub fn twist(&self, i: i64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.mul_zeta_pow(i * (self.ord + k as i64)))
            .collect();
        QSeries { level: self.level, ord: self.ord, prec: self.prec, coeffs }
    }

    /// True when every nonzero coefficient sits at an exponent divisible by `step`.
    pub fn on_grid(&self, step: i64) -> bool {
        self.first_off_grid(step).is_none()
    }

    pub fn first_off_grid(&self, step: i64) -> Option<i64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (self.ord + k as i64, c))
            .find(|(e, c)| e.rem_euclid(step) != 0 && !c.is_zero())
            .map(|(e, _)| e)
    }

    /// Substitutes `q ↦ q^k` (k ≥ 1).
    pub fn substitute_power(&self, k: i64) -> Self {
        assert!(k >= 1);
        if self.is_zero() {
            return Self::zero(self.level, self.prec * k);
        }
        let ord = self.ord * k;
        let prec = self.prec * k;
        let mut coeffs = vec![CycNum::zero(self.level); (prec - ord) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k as usize] = c.clone();
        }
        QSeries { level: self.level, ord, prec, coeffs }
    }

    /// Re-expresses a level-N series at level M (N | M): coefficients move into
    /// K_M and q_N = q_M^{M/N}.
    pub fn change_level(&self, m: u32) -> Result<Self> {
        if m % self.level != 0 {
            return Err(Error::InvalidArgument(format!("level {} does not divide {m}", self.level)));
        }
        let coeffs = self.coeffs.iter().map(|c| c.embed_into(m)).collect::<Result<Vec<_>>>()?;
        let lifted = QSeries { level: m, ord: self.ord, prec: self.prec, coeffs };
        Ok(lifted.substitute_power((m / self.level) as i64))
    }

    /// Compares coefficients on the common window `[min ord, min prec)`.
    pub fn agree(&self, other: &Self) -> Result<Agreement> {
        self.check(other)?;
        let hi = self.prec.min(other.prec);
        let lo = self.ord.min(other.ord);
        if hi <= lo {
            return Err(Error::EmptyWindow);
        }
        let zero = CycNum::zero(self.level);
        let first_difference = (lo..hi).find(|&e| {
            self.coeff_ref(e).unwrap_or(&zero) != other.coeff_ref(e).unwrap_or(&zero)
        });
        Ok(Agreement { agree: first_difference.is_none(), lo, hi, first_difference })
    }

    /// Maps coefficients into another scalar ring.
    pub fn map<U: Scalar>(&self, f: impl Fn(&CycNum<T>) -> CycNum<U>) -> QSeries<U> {
        QSeries { level: self.level, ord: self.ord, prec: self.prec, coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// True when every coefficient lies in O_N.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(CycNum::is_integral)
    }

    /// Numeric value of the truncated sum at a complex `q`.
    pub fn eval(&self, q: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * q + c.embed();
        }
        acc * q.powi(self.ord as i32)
    }
}

fn nonzero_indices<T: Scalar>(c: &[CycNum<T>], len: usize) -> Vec<usize> {
    c.iter().take(len).enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, _)| i).collect()
}

impl<T: FieldScalar> QSeries<T> {
    pub fn inv(&self) -> Result<Self> {
        let lead = self.leading()?.inv()?;
        self.inv_with(&lead)
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.inv()?)
    }
}

/// Product of many series as a balanced tree with a fixed association order.
pub fn product<T: Scalar>(items: &[QSeries<T>]) -> Option<QSeries<T>> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        n => {
            let (l, r) = items.split_at(n / 2);
            let (a, b) = rayon::join(|| product(l), || product(r));
            Some(&a? * &b?)
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl<T: Scalar> std::ops::$tr<&QSeries<T>> for &QSeries<T> {
            type Output = QSeries<T>;
            fn $m(self, rhs: &QSeries<T>) -> QSeries<T> {
                self.$f(rhs).expect("q-series level mismatch")
            }
        }
    };
}
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl<T: Scalar> std::ops::Neg for &QSeries<T> {
    type Output = QSeries<T>;
    fn neg(self) -> QSeries<T> {
        QSeries::neg(self)
    }
}

/// JSON form `{"N", "ord", "prec", "coeffs"}`.
#[derive(Serialize, Deserialize)]
pub struct QSeriesJson {
    #[serde(rename = "N")]
    pub n: u32,
    pub ord: i64,
    pub prec: i64,
    pub coeffs: Vec<CycJson>,
}

impl<T: ExactScalar> QSeries<T> {
    pub fn to_json(&self) -> QSeriesJson {
        QSeriesJson {
            n: self.level,
            ord: self.ord,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(CycNum::to_json).collect(),
        }
    }

    pub fn from_json(j: &QSeriesJson) -> Result<Self> {
        let coeffs = j.coeffs.iter().map(CycNum::from_json).collect::<Result<Vec<_>>>()?;
        Self::new(j.n, j.ord, j.prec, coeffs)
    }
}
