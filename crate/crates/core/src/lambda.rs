//! q-expansions of Λ(τ;Q₁,Q₂) as ratios of differences of E-series, of
//! Λ∘A for A ∈ SL₂(Z), of Λ_k, and of the auxiliary quotient W.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::arith::{gcd, mod_inv, modn};
use crate::error::{Error, Result};
use crate::forms::{e_series, leading_theta, to_integral, EIndex};
use crate::modgroup::{brace_mu, SL2Mat};
use crate::{Cyc, CycInt, IntSeries, Series};

/// A basis {Q₁, Q₂} of (Z/N)², stored as the rows of (r₁ s₁; r₂ s₂).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisPair {
    pub r1: i64,
    pub s1: i64,
    pub r2: i64,
    pub s2: i64,
    pub n: u32,
}

impl BasisPair {
    pub fn new(r1: i64, s1: i64, r2: i64, s2: i64, n: u32) -> Result<Self> {
        let nn = n as i64;
        let b = BasisPair { r1: modn(r1, nn), s1: modn(s1, nn), r2: modn(r2, nn), s2: modn(s2, nn), n };
        if gcd(b.det(), nn) != 1 {
            return Err(Error::Degenerate(format!(
                "({r1},{s1}),({r2},{s2}) is not a basis mod {n}"
            )));
        }
        Ok(b)
    }

    /// The rows of `A` mod N; Λ(τ; (a,b), (c,d)) = Λ∘A.
    pub fn from_matrix(m: &SL2Mat) -> Self {
        BasisPair::new(m.a, m.b, m.c, m.d, m.level).expect("determinant 1")
    }

    /// ((1,0),(0,k)), the basis of Λ_k.
    pub fn lambda_k(k: i64, n: u32) -> Result<Self> {
        BasisPair::new(1, 0, 0, k, n)
    }

    /// k = det(Q₁; Q₂) mod N.
    pub fn det(&self) -> i64 {
        modn(self.r1 * self.s2 - self.s1 * self.r2, self.n as i64)
    }

    /// (Q₁·A, Q₂·A), so that Λ(τ;Q₁,Q₂)∘A = Λ(τ;Q₁A,Q₂A).
    pub fn compose(&self, m: &SL2Mat) -> Self {
        BasisPair::new(
            self.r1 * m.a + self.s1 * m.c,
            self.r1 * m.b + self.s1 * m.d,
            self.r2 * m.a + self.s2 * m.c,
            self.r2 * m.b + self.s2 * m.d,
            self.n,
        )
        .expect("A is invertible")
    }

    /// (Q₂, Q₁).
    pub fn swapped(&self) -> Self {
        BasisPair { r1: self.r2, s1: self.s2, r2: self.r1, s2: self.s1, n: self.n }
    }

    fn indices(&self) -> (EIndex, EIndex, EIndex) {
        let n = self.n;
        (
            EIndex::new(self.r1, self.s1, n).expect("basis vector"),
            EIndex::new(self.r2, self.s2, n).expect("basis vector"),
            EIndex::new(self.r1 + self.r2, self.s1 + self.s2, n).expect("basis sum"),
        )
    }

    /// Order of the q-expansion: min({r₁},{r₁+r₂}) − min({r₂},{r₁+r₂}).
    pub fn order(&self) -> i64 {
        let (a, b, c) = self.indices();
        a.brace().min(c.brace()) - b.brace().min(c.brace())
    }

    /// Exact leading coefficient θ₁/θ₂.
    pub fn leading(&self) -> Result<Cyc> {
        let (a, b, c) = self.indices();
        let (t1, _) = leading_theta(&a, &c)?;
        let (t2, _) = leading_theta(&b, &c)?;
        t1.try_div(&t2)
    }
}

/// The numerator and denominator E-differences, known below `eprec`.
fn e_differences(b: &BasisPair, eprec: i64) -> (Series, Series) {
    let (i1, i2, i3) = b.indices();
    let e3 = e_series(&i3, eprec);
    (&e_series(&i1, eprec) - &e3, &e_series(&i2, eprec) - &e3)
}

fn e_precision(b: &BasisPair, prec: i64) -> i64 {
    let (i1, i2, i3) = b.indices();
    let o1 = i1.brace().min(i3.brace());
    let o2 = i2.brace().min(i3.brace());
    prec + o2 + (o2 - o1).max(0)
}

/// Λ(τ;Q₁,Q₂) known below q^prec, from the defining E-ratio.
pub fn lambda_basis_series(b: &BasisPair, prec: i64) -> Result<Series> {
    let (d1, d2) = e_differences(b, e_precision(b, prec));
    let s = d1.try_div(&d2)?;
    debug_assert!(s.prec() >= prec);
    Ok(s.truncate(prec))
}

/// Λ∘A known below q^prec.
pub fn lambda_series(m: &SL2Mat, prec: i64) -> Result<Series> {
    lambda_basis_series(&BasisPair::from_matrix(m), prec)
}

/// Λ_k = Λ(τ;(1,0),(0,k)).
pub fn lambda_k_series(k: i64, n: u32, prec: i64) -> Result<Series> {
    lambda_basis_series(&BasisPair::lambda_k(k, n)?, prec)
}

/// (1−ζ)³·Λ(τ;Q₁,Q₂) with coefficients in O_N, known below q^prec.
///
/// The denominator difference divided by its leading coefficient θ₂ is a
/// unit power series over O_N, so its inverse is computed over the integers;
/// every coefficient of the final product is checked to be integral.
pub fn lambda_scaled_int(b: &BasisPair, prec: i64) -> Result<IntSeries> {
    let n = b.n;
    let (d1, d2) = e_differences(b, e_precision(b, prec));
    let (_, i2, i3) = b.indices();
    let theta2 = leading_theta(&i2, &i3)?.0;
    let one_minus = &Cyc::one(n) - &Cyc::zeta(n);
    let cube = one_minus.pow(3);
    if d2.leading()? != &theta2 {
        return Err(Error::Degenerate("denominator leading coefficient differs from θ".into()));
    }
    let unit = d2.scale(&theta2.inv()?);
    let product = match to_integral(&unit) {
        Some(u) => {
            let u_inv = u.inv_with(&CycInt::one(n))?;
            let (x1, den) = series_clear_denominators(&d1);
            let scale = cube.try_div(&theta2.scale(&BigRational::from_integer(den)))?;
            (&x1 * &u_inv).map(|c| &c.to_rational() * &scale)
        }
        None => d1.try_div(&d2)?.scale(&cube),
    };
    let out = product.truncate(prec);
    to_integral(&out).ok_or_else(|| {
        Error::NotIntegral(format!("(1−ζ)³Λ for {b:?} has a non-integral coefficient"))
    })
}

/// Returns `(x, d)` with `s = x/d`, `x` over O_N, `d ≥ 1` minimal.
pub fn series_clear_denominators(s: &Series) -> (IntSeries, BigInt) {
    let mut d = BigInt::one();
    for c in s.coeffs() {
        for x in c.coords() {
            d = d.lcm(x.denom());
        }
    }
    let dq = BigRational::from_integer(d.clone());
    let x = s.map(|c| c.scale(&dq).to_integral().expect("denominators cleared"));
    (x, d)
}

/// W(τ;r₁,s₁,r₂,s₂) = (E(r₁,s₁) − E(r₂,s₂)) / (E(r₁,−s₁) − E(r₂,−s₂)).
pub fn w_series(i1: &EIndex, i2: &EIndex, prec: i64) -> Result<Series> {
    if i1.same_up_to_sign(i2) {
        return Err(Error::Degenerate(format!("{i1:?} ≡ ±{i2:?}")));
    }
    let n = i1.n;
    let o = i1.brace().min(i2.brace());
    let p = prec + o;
    let j1 = EIndex::new(i1.r, -i1.s, n)?;
    let j2 = EIndex::new(i2.r, -i2.s, n)?;
    let num = &e_series(i1, p) - &e_series(i2, p);
    let den = &e_series(&j1, p) - &e_series(&j2, p);
    Ok(num.try_div(&den)?.truncate(prec))
}

/// Leading coefficient of W from the case table.
pub fn w_leading(i1: &EIndex, i2: &EIndex) -> Cyc {
    let n = i1.n;
    let nn = n as i64;
    let (i1, i2) = if i1.brace() > i2.brace() { (i2, i1) } else { (i1, i2) };
    let (b1, m1) = brace_mu(i1.r, nn);
    let (b2, m2) = brace_mu(i2.r, nn);
    if b1 == b2 && b1 != 0 && 2 * b1 != nn {
        Cyc::zeta_pow(n, m1 * i1.s + m2 * i2.s).neg()
    } else if b2 > b1 && b1 != 0 {
        Cyc::zeta_pow(n, 2 * m1 * i1.s)
    } else {
        Cyc::one(n)
    }
}

/// A_k ≡ (a, bk; ck⁻¹, d) mod N, lifted to SL₂(Z).
pub fn galois_matrix(m: &SL2Mat, k: i64) -> Result<SL2Mat> {
    let n = m.level;
    let kinv = mod_inv(k, n as i64).ok_or(Error::NotCoprime { ell: k, level: n })?;
    SL2Mat::lift_mod(m.a, m.b * k, m.c * kinv, m.d, n)
}
