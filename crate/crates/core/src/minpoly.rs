//! The polynomial F(X,Y) with F(X,j) = Π_{A∈ℜ}(X − Λ∘A), and the checks of
//! its structure in X and in Y.
//!
//! The build works with μ_A = (1−ζ)³Λ∘A, whose q-expansions lie in O_N[[q]].
//! For one cusp the N conjugates μ_{A·Tⁱ} are twists of μ_A, so their power
//! sums are N times the q^N-grid part of μ_A^m. The elementary symmetric
//! functions of each orbit then follow from Newton's identities, and the
//! orbits are multiplied in a balanced tree. Everything is supported on the
//! q^N-grid from the orbit stage on, so those series are stored in the
//! variable q^N ("compressed").

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::counts::{d_n, ell_t, Route};
use crate::error::{Error, Result};
use crate::forms::j_series_int;
use crate::lambda::{lambda_basis_series, lambda_scaled_int, BasisPair};
use crate::modgroup::{cusp_reps_with, nu, transversal, CuspRep, PairConvention, SL2Mat};
use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::{Cyc, CycInt, CycNum, IntSeries, QSeries, Series};

/// Bumped whenever the stored form of F changes.
pub const FORMAT_VERSION: u32 = 1;

/// Environment variable naming the cache directory for built polynomials.
pub const CACHE_ENV: &str = "GENLAMBDA_CACHE";

/// F(X,Y) = Σ P_i(Y)·X^{d_N−i}; `p[i][k]` is the coefficient of Y^k in P_i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivarPoly {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "dN")]
    pub d: usize,
    #[serde(rename = "ellN")]
    pub ell: usize,
    #[serde(rename = "tN")]
    pub t: usize,
    #[serde(rename = "P", with = "p_json")]
    pub p: Vec<Poly<BigRational>>,
    /// Absolute q-precision of the build; not part of the stored form.
    #[serde(skip)]
    pub prec: i64,
}

mod p_json {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row {
        i: usize,
        poly: Vec<Cyc>,
    }

    pub fn serialize<S: Serializer>(p: &[Poly<BigRational>], s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Row> = p.iter().enumerate().map(|(i, q)| Row { i, poly: q.coeffs().to_vec() }).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Poly<BigRational>>, D::Error> {
        let mut rows = Vec::<Row>::deserialize(d)?;
        rows.sort_by_key(|r| r.i);
        if rows.iter().enumerate().any(|(k, r)| r.i != k) {
            return Err(serde::de::Error::custom("P rows must be indexed 0..=dN"));
        }
        rows.into_iter()
            .map(|r| {
                let level = r.poly.first().map(|c| c.level()).ok_or_else(|| serde::de::Error::custom("empty P_i"))?;
                Ok(Poly::new(level, r.poly))
            })
            .collect()
    }
}

impl BivarPoly {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: BivarPoly = serde_json::from_str(s)?;
        if f.p.len() != f.d + 1 || f.p.iter().any(|q| q.level() != f.n) {
            return Err(Error::Malformed("P must hold dN+1 polynomials at level N".into()));
        }
        Ok(f)
    }

    pub fn deg_y(&self) -> usize {
        self.p.iter().filter_map(|q| q.degree()).max().unwrap_or(0)
    }

    /// Coefficient of Y^k as a polynomial in X: Σ_i [Y^k]P_i · X^{d−i}.
    pub fn y_coefficient(&self, k: usize) -> Poly<BigRational> {
        let coeffs = (0..=self.d).map(|e| self.p[self.d - e].coeff(k)).collect();
        Poly::new(self.n, coeffs)
    }

    /// Q_k in F = Σ_k Q_k(X)·Y^{ℓ−k}.
    pub fn q(&self, k: usize) -> Poly<BigRational> {
        self.y_coefficient(self.deg_y() - k)
    }

    /// F(X, y).
    pub fn specialize(&self, y: &Cyc) -> Poly<BigRational> {
        let coeffs = (0..=self.d).map(|e| self.p[self.d - e].eval(y)).collect();
        Poly::new(self.n, coeffs)
    }

    /// Numeric F(x, y).
    pub fn eval_numeric(&self, x: crate::C64, y: crate::C64) -> crate::C64 {
        let mut acc = crate::C64::new(0.0, 0.0);
        for pi in &self.p {
            let v = pi.embed().iter().rev().fold(crate::C64::new(0.0, 0.0), |a, c| a * y + c);
            acc = acc * x + v;
        }
        acc
    }

    /// (1−ζ)^{3i}·P_i, which has coefficients in O_N.
    pub fn scaled(&self, i: usize) -> Poly<BigRational> {
        let c = unit_cube(self.n).pow(i as u64);
        self.p[i].scale(&c)
    }
}

/// (1−ζ)³.
pub fn unit_cube(n: u32) -> Cyc {
    (&Cyc::one(n) - &Cyc::zeta(n)).pow(3)
}

/// The default absolute precision N(ℓ_N + 2).
pub fn default_prec(n: u32) -> Result<i64> {
    let (ell, _) = ell_t(n as u64, Route::Enum)?;
    Ok(n as i64 * (ell + 2))
}

/// Re-expresses a series supported on exponents divisible by N in the variable q^N.
pub fn compress<T: Scalar>(s: &QSeries<T>) -> Result<QSeries<T>> {
    let n = s.level() as i64;
    if let Some(e) = s.first_off_grid(n) {
        return Err(Error::OffGrid { level: s.level(), exponent: e });
    }
    Ok(grid_part(s))
}

/// The q^N-grid part of a series, in the variable q^N.
fn grid_part<T: Scalar>(s: &QSeries<T>) -> QSeries<T> {
    let n = s.level() as i64;
    let prec = s.prec().div_euclid(n) + i64::from(s.prec().rem_euclid(n) != 0);
    if s.is_zero() {
        return QSeries::zero(s.level(), prec);
    }
    let ord = s.ord().div_euclid(n) + i64::from(s.ord().rem_euclid(n) != 0);
    QSeries::from_fn(s.level(), ord, prec, |e| {
        let k = e * n - s.ord();
        s.coeffs().get(k as usize).cloned().unwrap_or_else(|| CycNum::zero(s.level()))
    })
}

/// Powers J^0..=J^m of j in the variable q^N, each known below `prec`.
fn j_powers(n: u32, m: usize, prec: i64) -> Vec<IntSeries> {
    let base = compress(&j_series_int(n, n as i64 * (prec + m as i64))).expect("j lives on the grid");
    let mut out = vec![IntSeries::one(n, prec + m as i64)];
    for _ in 0..m {
        let next = out.last().unwrap() * &base;
        out.push(next);
    }
    out.into_iter().map(|s| s.truncate(prec)).collect()
}

fn reduce_compressed<T: Scalar>(f: &QSeries<T>, jp: &[QSeries<T>]) -> Result<Vec<CycNum<T>>> {
    let n = f.level();
    if f.prec() < 2 {
        return Err(Error::InsufficientPrecision("reduction needs the q^N coefficient".into()));
    }
    let m = if f.is_zero() { 0 } else { (-f.ord()).max(0) as usize };
    if m + 1 > jp.len() {
        return Err(Error::InsufficientPrecision(format!("pole of order {m} exceeds the cached j powers")));
    }
    let mut rem = f.clone();
    let mut poly = vec![CycNum::zero(n); m + 1];
    for k in (0..=m).rev() {
        let c = rem.coeff(-(k as i64))?;
        if !c.is_zero() {
            rem = rem.try_sub(&jp[k].scale(&c))?;
        }
        poly[k] = c;
    }
    if !rem.is_zero() {
        return Err(Error::NonzeroRemainder { exponent: rem.ord() * n as i64 });
    }
    Ok(poly)
}

/// The polynomial P with P(j) = f on the window of `f`; `f` must be supported
/// on exponents divisible by N and known past q^N.
pub fn reduce_to_j<T: Scalar>(f: &QSeries<T>) -> Result<Poly<T>> {
    let n = f.level();
    let c = compress(f)?;
    let m = if c.is_zero() { 0 } else { (-c.ord()).max(0) as usize };
    let jp: Vec<QSeries<T>> = j_powers(n, m, c.prec())
        .iter()
        .map(|s| s.map(|x| x.map(|v| T::from_bigint(v))))
        .collect();
    Ok(Poly::new(n, reduce_compressed(&c, &jp)?))
}

/// Polynomial in X with series coefficients, indexed by descending degree:
/// `v[i]` is the coefficient of X^{deg−i}, and `v[0] = 1`.
type SeriesPoly = Vec<IntSeries>;

fn series_poly_mul(a: &SeriesPoly, b: &SeriesPoly) -> Result<SeriesPoly> {
    let mut out: Vec<Option<IntSeries>> = vec![None; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let p = x.try_mul(y)?;
            out[i + j] = Some(match out[i + j].take() {
                None => p,
                Some(s) => s.try_add(&p)?,
            });
        }
    }
    Ok(out.into_iter().map(|s| s.expect("filled")).collect())
}

fn tree_product(items: &[SeriesPoly]) -> Result<SeriesPoly> {
    match items.len() {
        0 => Err(Error::InvalidArgument("empty product".into())),
        1 => Ok(items[0].clone()),
        len => {
            let (l, r) = items.split_at(len / 2);
            let (a, b) = rayon::join(|| tree_product(l), || tree_product(r));
            series_poly_mul(&a?, &b?)
        }
    }
}

/// Π_{i<N}(X − μ_{A·Tⁱ}) in the variable q^N, from μ_A known to relative
/// precision `rel`.
fn orbit_poly(rep: &CuspRep, rel: i64) -> Result<SeriesPoly> {
    let b = BasisPair::from_matrix(&rep.matrix);
    let n = b.n;
    let nn = n as i64;
    let mu = lambda_scaled_int(&b, b.order() + rel)?;
    let mut pw = mu.clone();
    let mut p = Vec::with_capacity(n as usize);
    for m in 1..=nn {
        if m > 1 {
            pw = &pw * &mu;
        }
        p.push(grid_part(&pw).mul_i64(nn));
    }
    let mut e: Vec<IntSeries> = vec![IntSeries::one(n, p[0].prec().max(1) + rel)];
    for m in 1..=n as usize {
        let mut acc: Option<IntSeries> = None;
        for k in 1..=m {
            let term = e[m - k].try_mul(&p[k - 1])?;
            let term = if k % 2 == 0 { term.neg() } else { term };
            acc = Some(match acc {
                None => term,
                Some(s) => s.try_add(&term)?,
            });
        }
        let s = acc.expect("m ≥ 1");
        let coeffs = s
            .coeffs()
            .iter()
            .map(|c| c.div_i64_exact(m as i64).ok_or_else(|| Error::NotIntegral(format!("Newton step {m}"))))
            .collect::<Result<Vec<_>>>()?;
        e.push(IntSeries::new(n, s.ord(), s.prec(), coeffs)?);
    }
    Ok(e.into_iter().enumerate().map(|(m, s)| if m % 2 == 1 { s.neg() } else { s }).collect())
}

/// Options for [`build_f_with`].
#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Absolute q-precision; `None` selects [`default_prec`].
    pub prec: Option<i64>,
    pub convention: PairConvention,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { prec: None, convention: PairConvention::Lexicographic }
    }
}

/// Number of cusps where Λ has a pole.
pub fn pole_cusp_count(n: u32) -> usize {
    cusp_reps_with(n, PairConvention::Lexicographic).iter().filter(|r| nu(&r.matrix) < 0).count()
}

/// Total pole order Σ_{ν<0} −ν over the cusp representatives.
pub fn pole_order(reps: &[CuspRep]) -> i64 {
    reps.iter().map(|r| (-nu(&r.matrix)).max(0)).sum()
}

pub fn build_f(n: u32, prec: Option<i64>) -> Result<BivarPoly> {
    build_f_with(n, BuildOptions { prec, ..Default::default() })
}

/// Builds F and checks F(Λ, j) = 0 for the identity on the build window.
pub fn build_f_with(n: u32, opts: BuildOptions) -> Result<BivarPoly> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("level {n} is below 3")));
    }
    let prec = match opts.prec {
        Some(p) => p,
        None => default_prec(n)?,
    };
    let nn = n as i64;
    let reps = cusp_reps_with(n, opts.convention);
    let ell = pole_order(&reps);
    if prec < nn * (ell + 1) + 1 {
        return Err(Error::InsufficientPrecision(format!(
            "precision {prec} does not reach past the pole order {} of the coefficients",
            nn * ell
        )));
    }
    let rel = prec + nn * ell;
    let orbits = reps.iter().map(|r| orbit_poly(r, rel)).collect::<Result<Vec<_>>>()?;
    let g = tree_product(&orbits)?;
    let d = d_n(n as u64) as usize;
    if g.len() != d + 1 {
        return Err(Error::Degenerate(format!("product has degree {} instead of {d}", g.len() - 1)));
    }
    let cprec = prec.div_euclid(nn) + i64::from(prec.rem_euclid(nn) != 0);
    let jp = j_powers(n, ell as usize, cprec);
    let cube_inv = unit_cube(n).inv()?;
    let mut p = Vec::with_capacity(d + 1);
    let mut scale = Cyc::one(n);
    for (i, gi) in g.iter().enumerate() {
        if gi.prec() < cprec {
            return Err(Error::InsufficientPrecision(format!(
                "coefficient {i} known below q^{} only",
                gi.prec() * nn
            )));
        }
        let ci = reduce_compressed(&gi.truncate(cprec), &jp)?;
        p.push(Poly::new(n, ci.iter().map(|c| &c.to_rational() * &scale).collect()));
        scale = &scale * &cube_inv;
    }
    let t = reps.iter().filter(|r| nu(&r.matrix) < 0).count();
    let f = BivarPoly { n, d, ell: 0, t, p, prec };
    let f = BivarPoly { ell: f.deg_y(), ..f };
    let window = nn.min(prec);
    if !root_identity(&f, &SL2Mat::identity(n), window)? {
        return Err(Error::NonzeroRemainder { exponent: window });
    }
    Ok(f)
}

/// F(X,j) as series coefficients in X, from the direct product of the d_N
/// linear factors X − Λ∘A; each coefficient is checked to lie on the q^N-grid.
/// `v[i]` is the coefficient of X^{d−i}.
pub fn product_poly(n: u32, prec: i64) -> Result<Vec<Series>> {
    let entries = transversal(n);
    let ell = pole_order(&cusp_reps_with(n, PairConvention::Lexicographic));
    let rel = prec + n as i64 * ell;
    let mut acc: Vec<Series> = vec![Series::one(n, rel + 1)];
    for e in &entries {
        let b = BasisPair::from_matrix(&e.matrix);
        let lam = lambda_basis_series(&b, b.order() + rel)?;
        let mut next: Vec<Series> = Vec::with_capacity(acc.len() + 1);
        for i in 0..=acc.len() {
            let mut s: Option<Series> = None;
            if i < acc.len() {
                s = Some(acc[i].clone());
            }
            if i > 0 {
                let t = acc[i - 1].try_mul(&lam)?.neg();
                s = Some(match s {
                    None => t,
                    Some(x) => x.try_add(&t)?,
                });
            }
            next.push(s.expect("nonempty"));
        }
        acc = next;
    }
    acc.into_iter()
        .enumerate()
        .map(|(i, s)| {
            if s.prec() < prec {
                return Err(Error::InsufficientPrecision(format!("coefficient {i} known below q^{}", s.prec())));
            }
            let s = s.truncate(prec);
            if let Some(e) = s.first_off_grid(n as i64) {
                return Err(Error::OffGrid { level: n, exponent: e });
            }
            Ok(s)
        })
        .collect()
}

/// Evaluates `Σ_k poly[k]·J^k` with `J` given in powers, as a level-N series.
fn eval_at_j(poly: &Poly<BigInt>, jp: &[IntSeries]) -> Result<IntSeries> {
    let n = poly.level();
    let prec = jp.iter().map(|s| s.prec()).min().unwrap_or(0);
    let mut acc = IntSeries::zero(n, prec);
    for (k, c) in poly.coeffs().iter().enumerate() {
        if !c.is_zero() {
            acc = acc.try_add(&jp[k].scale(c))?;
        }
    }
    Ok(acc.substitute_power(n as i64))
}

/// Window for [`root_identity`] at the identity that sees every coefficient:
/// the term P_i,k·j^k·Λ^{d−i} starts at q^{d−i−Nk} ≤ q^d.
pub fn check_window(f: &BivarPoly) -> i64 {
    f.d as i64 + 1
}

/// Checks F(Λ∘A, j) = 0 on exponents below `window`.
///
/// With c = (1−ζ)³ and c_i = c^i·P_i ∈ O_N[Y], a regular Λ∘A is tested as
/// Σ c_i(j)·μ^{d−i} = 0 for μ = cΛ∘A; at a pole, with μ' = c/Λ∘A, as
/// Σ c_i(j)·c^{2(d−i)}·μ'^i = 0. Both are identities in O_N((q)).
pub fn root_identity(f: &BivarPoly, a: &SL2Mat, window: i64) -> Result<bool> {
    let n = f.n;
    let nn = n as i64;
    let ell = f.deg_y() as i64;
    let ci: Vec<Poly<BigInt>> = (0..=f.d)
        .map(|i| {
            f.scaled(i)
                .coeffs()
                .iter()
                .map(|c| c.to_integral().ok_or_else(|| Error::NotIntegral(format!("(1−ζ)^{}P_{i}", 3 * i))))
                .collect::<Result<Vec<_>>>()
                .map(|v| Poly::new(n, v))
        })
        .collect::<Result<_>>()?;
    let cwin = window.div_euclid(nn) + 1;
    let jp = j_powers(n, ell as usize, cwin);
    let cj: Vec<IntSeries> = ci.iter().map(|p| eval_at_j(p, &jp)).collect::<Result<_>>()?;
    let b = BasisPair::from_matrix(a);
    let need = window + nn * ell;
    let acc = if b.order() >= 0 {
        let mu = lambda_scaled_int(&b, need.max(b.order() + 1))?;
        let mut acc = cj[0].clone();
        for c in &cj[1..] {
            acc = acc.try_mul(&mu)?.try_add(c)?;
        }
        acc
    } else {
        let sw = b.swapped();
        let mu = lambda_scaled_int(&sw, need.max(sw.order() + 1))?;
        let c2 = unit_cube(n).pow(2).to_integral().expect("integral");
        let mut w = vec![CycInt::one(n)];
        for k in 1..=f.d {
            let next = &w[k - 1] * &c2;
            w.push(next);
        }
        let mut acc = cj[f.d].clone();
        for i in (0..f.d).rev() {
            acc = acc.try_mul(&mu)?.try_add(&cj[i].scale(&w[f.d - i]))?;
        }
        acc
    };
    Ok(acc.prec() >= window && acc.truncate(window).is_zero())
}

/// Outcome of each clause of the structure theorem for the P_i.
#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    #[serde(rename = "N")]
    pub n: u32,
    /// False for N = 6, where the hypotheses fail.
    pub claimed: bool,
    pub last_is_one: bool,
    pub conjugate_symmetric: bool,
    pub degree_bound: bool,
    pub p1_p2_constant: bool,
    pub integral: bool,
    pub max_degree_at_nt: bool,
    pub ell_expected: i64,
    pub t_expected: i64,
    pub deg_y: usize,
    pub deg_p_nt: Option<usize>,
    pub failures: Vec<String>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.last_is_one
            && self.conjugate_symmetric
            && self.degree_bound
            && self.p1_p2_constant
            && self.integral
            && self.max_degree_at_nt
    }
}

pub fn verify_theorem1(f: &BivarPoly) -> Result<StructureReport> {
    let n = f.n;
    let d = f.d;
    let (ell, t) = ell_t(n as u64, Route::Enum)?;
    let mut failures = Vec::new();
    let last_is_one = f.p[d] == Poly::one(n);
    if !last_is_one {
        failures.push(format!("P_{d} ≠ 1"));
    }
    let mut conjugate_symmetric = true;
    for i in 0..=d {
        if f.p[d - i] != f.p[i].conj() {
            conjugate_symmetric = false;
            failures.push(format!("P_{} ≠ conj(P_{i})", d - i));
            break;
        }
    }
    let deg = |i: usize| f.p[i].degree().unwrap_or(0);
    let mut degree_bound = true;
    for i in 1..=d {
        if 2 * deg(i) >= i {
            degree_bound = false;
            failures.push(format!("deg P_{i} = {} is not below {i}/2", deg(i)));
        }
    }
    let p1_p2_constant = deg(1) == 0 && deg(2) == 0;
    let mut integral = true;
    for i in 0..=d {
        if !f.scaled(i).coeffs().iter().all(|c| c.is_integral()) {
            integral = false;
            failures.push(format!("(1−ζ)^{}P_{i} is not integral", 3 * i));
        }
    }
    let nt = n as usize * t as usize;
    let deg_p_nt = (nt <= d).then(|| deg(nt));
    let max_deg = (0..=d).map(deg).max().unwrap_or(0);
    let max_degree_at_nt = deg_p_nt == Some(max_deg) && max_deg as i64 == ell && f.deg_y() as i64 == ell;
    if !max_degree_at_nt {
        failures.push(format!("max deg {max_deg}, deg P_Nt {deg_p_nt:?}, ℓ {ell}"));
    }
    Ok(StructureReport {
        n,
        claimed: n != 6,
        last_is_one,
        conjugate_symmetric,
        degree_bound,
        p1_p2_constant,
        integral,
        max_degree_at_nt,
        ell_expected: ell,
        t_expected: t,
        deg_y: f.deg_y(),
        deg_p_nt,
        failures,
    })
}

/// Exact factorization data for F(X, y).
#[derive(Clone, Debug)]
pub enum Specialization {
    /// F(X,y) = c·H^k with H monic, H(0) ≠ 0 and H square-free modulo `prime`.
    Power {
        k: u32,
        c: Cyc,
        h: Poly<BigRational>,
        h0_nonzero: bool,
        squarefree_prime: Option<u64>,
        /// Whether Yun's decomposition over K_N is exactly `[(H, k)]`; run
        /// only when d_N ≤ [`YUN_MAX_DEGREE`].
        yun_agrees: Option<bool>,
    },
    /// F(X,y) is coprime to its X-derivative modulo `prime`.
    SquareFree { prime: u64 },
}

impl Specialization {
    /// True when every certificate held.
    pub fn certified(&self) -> bool {
        match self {
            Specialization::Power { h0_nonzero, squarefree_prime, yun_agrees, .. } => {
                *h0_nonzero && squarefree_prime.is_some() && yun_agrees.unwrap_or(true)
            }
            Specialization::SquareFree { .. } => true,
        }
    }

    pub fn h(&self) -> Option<&Poly<BigRational>> {
        match self {
            Specialization::Power { h, .. } => Some(h),
            Specialization::SquareFree { .. } => None,
        }
    }
}

/// Largest d_N for which the exact gcd-based decomposition is also run.
pub const YUN_MAX_DEGREE: usize = 24;

/// Certifies the shape of F(X, y): a cube at y = 0, a square at y = 1728, and
/// square-free elsewhere.
pub fn specialize_and_factor(f: &BivarPoly, y: &Cyc) -> Result<Specialization> {
    let g = f.specialize(y);
    let k = if y.is_zero() {
        3
    } else if *y == Cyc::from_i64(f.n, 1728) {
        2
    } else {
        let prime = g
            .squarefree_certificate(8)
            .ok_or_else(|| Error::ShapeViolated(format!("F(X,{y}) has no square-free certificate")))?;
        return Ok(Specialization::SquareFree { prime });
    };
    let c = g.lead().ok_or(Error::ZeroLeadingCoefficient)?.clone();
    let h = g
        .monic()?
        .kth_root_monic(k)?
        .ok_or_else(|| Error::ShapeViolated(format!("F(X,{y}) is not a constant times a {k}-th power")))?;
    let h0_nonzero = !h.coeff(0).is_zero();
    let squarefree_prime = h.squarefree_certificate(8);
    let yun_agrees = if f.d <= YUN_MAX_DEGREE {
        Some(g.squarefree_decomposition()? == vec![(h.clone(), k)])
    } else {
        None
    };
    Ok(Specialization::Power { k, c, h, h0_nonzero, squarefree_prime, yun_agrees })
}

/// Q₀, Q₁ with F = Q₀·Y + Q₁; only for ℓ_N = 1.
pub fn rational_j_expression(f: &BivarPoly) -> Result<(Poly<BigRational>, Poly<BigRational>)> {
    if f.deg_y() != 1 {
        return Err(Error::Unsupported(format!(
            "Λ does not generate the function field at level {} (ℓ = {})",
            f.n,
            f.deg_y()
        )));
    }
    Ok((f.q(0), f.q(1)))
}

/// j = −K·num(Λ)³/den(Λ)^e, the known j-expressions at levels 3 and 4.
pub struct JClosedForm {
    pub k: Cyc,
    pub num: Poly<BigRational>,
    pub den: Poly<BigRational>,
    pub den_power: u32,
}

fn lin(c: Cyc) -> Poly<BigRational> {
    Poly::linear(&c.neg())
}

fn quad(b: Cyc, c: Cyc) -> Poly<BigRational> {
    let n = b.level();
    Poly::new(n, vec![c, b, Cyc::one(n)])
}

fn q_rat(n: u32, a: i64, b: i64) -> Cyc {
    Cyc::from_scalar(n, BigRational::new(a.into(), b.into()))
}

pub fn j_closed_form(n: u32) -> Result<JClosedForm> {
    let z = Cyc::zeta(n);
    let one = Cyc::one(n);
    match n {
        3 => {
            let sqrt_m3 = &(&z + &z) + &one;
            let num = lin(&z - &one)
                .mul(&lin((&z - &one).scale(&BigRational::new(1.into(), 3.into()))))
                .mul(&lin(&z + &one))
                .mul(&lin((&z + &one).neg()));
            let den = Poly::monomial(one.clone(), 1).mul(&lin(one.neg())).mul(&lin(z.clone()));
            Ok(JClosedForm { k: sqrt_m3.mul_i64(81), num, den, den_power: 3 })
        }
        4 => {
            let i = z;
            let num = quad((&one - &i.mul_i64(2)).neg(), i.neg())
                .mul(&quad((&one.mul_i64(2) - &i).neg(), i.neg()))
                .mul(&quad(one.neg(), one.clone()))
                .mul(&quad(i.clone(), one.neg()));
            let den = Poly::monomial(one.clone(), 1)
                .mul(&lin(i.clone()))
                .mul(&lin(one.neg()))
                .mul(&lin(&i - &one))
                .mul(&lin((&q_rat(4, 1, 2) - &i.scale(&BigRational::new(1.into(), 2.into()))).neg()));
            Ok(JClosedForm { k: Cyc::from_i64(4, 64), num, den, den_power: 4 })
        }
        _ => Err(Error::Unsupported(format!("no closed form for j at level {n}"))),
    }
}

/// Checks Q₁·den^e = K·num³·Q₀, i.e. −Q₁/Q₀ equals the closed form.
pub fn verify_j_closed_form(f: &BivarPoly) -> Result<bool> {
    let (q0, q1) = rational_j_expression(f)?;
    let cf = j_closed_form(f.n)?;
    let lhs = q1.mul(&cf.den.pow(cf.den_power));
    let rhs = cf.num.pow(3).mul(&q0).scale(&cf.k);
    Ok(lhs == rhs)
}

/// Exact shape of Q₀ = c·X^{N·t}·Π_k(X − Λ(α_k))^N.
#[derive(Clone, Debug, Serialize)]
pub struct Q0Report {
    pub degree: usize,
    pub expected_degree: usize,
    pub x_power: usize,
    /// Values of Λ at the cusps where it is regular and nonzero.
    pub cusp_values: Vec<String>,
    pub matches: bool,
}

pub fn q0_structure(f: &BivarPoly) -> Result<Q0Report> {
    let n = f.n;
    let nn = n as usize;
    let q0 = f.q(0);
    let degree = q0.degree().unwrap_or(0);
    let expected_degree = f.d - nn * f.t;
    let x_power = q0.coeffs().iter().position(|c| !c.is_zero()).unwrap_or(0);
    let mut values = Vec::new();
    for r in cusp_reps_with(n, PairConvention::Lexicographic) {
        if nu(&r.matrix) == 0 {
            values.push(BasisPair::from_matrix(&r.matrix).leading()?);
        }
    }
    let mut target = Poly::monomial(q0.lead().cloned().unwrap_or_else(|| Cyc::one(n)), nn * f.t);
    for v in &values {
        target = target.mul(&Poly::linear(v).pow(n));
    }
    let matches = degree == expected_degree
        && x_power == nn * f.t
        && values.len() == f.d / nn - 2 * f.t
        && target == q0;
    Ok(Q0Report {
        degree,
        expected_degree,
        x_power,
        cusp_values: values.iter().map(|v| v.to_string()).collect(),
        matches,
    })
}

fn cache_path(dir: &Path, n: u32, prec: i64) -> PathBuf {
    dir.join(format!("F-N{n}-prec{prec}-v{FORMAT_VERSION}.json"))
}

/// Cache directory from the environment, if set.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

/// Loads F from `dir` if a cached copy passes the root-identity spot check;
/// otherwise builds and stores it.
pub fn load_or_build(n: u32, prec: Option<i64>, dir: Option<&Path>) -> Result<BivarPoly> {
    let prec = match prec {
        Some(p) => p,
        None => default_prec(n)?,
    };
    let Some(dir) = dir else {
        return build_f(n, Some(prec));
    };
    let path = cache_path(dir, n, prec);
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(mut f) = BivarPoly::from_json(&text) {
            f.prec = prec;
            if f.n == n && root_identity(&f, &SL2Mat::identity(n), check_window(&f)).unwrap_or(false) {
                return Ok(f);
            }
        }
    }
    let f = build_f(n, Some(prec))?;
    std::fs::create_dir_all(dir)?;
    std::fs::write(&path, f.to_json()?)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_examples() {
        let n = 3;
        let j = crate::forms::j_series(n, 30);
        assert_eq!(reduce_to_j(&j).unwrap(), Poly::new(n, vec![Cyc::zero(n), Cyc::one(n)]));
        let c = Series::constant(Cyc::zeta(n), 30);
        assert_eq!(reduce_to_j(&c).unwrap(), Poly::constant(Cyc::zeta(n)));
        let jj = crate::forms::j_series(n, 40);
        let f = (&(&jj * &jj) - &jj.mul_i64(1488)).truncate(30);
        let p = reduce_to_j(&f).unwrap();
        assert_eq!(p, Poly::new(n, vec![Cyc::zero(n), Cyc::from_i64(n, -1488), Cyc::one(n)]));
        let off = Series::monomial(Cyc::one(n), 1, 30);
        assert!(matches!(reduce_to_j(&off), Err(Error::OffGrid { .. })));
    }

    #[test]
    fn level_three_degrees_and_structure() {
        let f = build_f(3, None).unwrap();
        assert_eq!((f.d, f.deg_y(), f.t), (12, 1, 1));
        let r = verify_theorem1(&f).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert!(verify_j_closed_form(&f).unwrap());
        assert!(q0_structure(&f).unwrap().matches);
    }

    #[test]
    fn fast_build_matches_direct_product() {
        for n in [3u32, 4] {
            let f = build_f(n, None).unwrap();
            let direct = product_poly(n, f.prec).unwrap();
            assert_eq!(direct.len(), f.d + 1);
            for (i, s) in direct.iter().enumerate() {
                assert_eq!(reduce_to_j(s).unwrap(), f.p[i], "N={n} i={i}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let f = build_f(3, None).unwrap();
        let s = f.to_json().unwrap();
        assert!(s.starts_with("{\"N\":3,\"dN\":12,\"ellN\":1,\"tN\":1,\"P\":["));
        let g = BivarPoly::from_json(&s).unwrap();
        assert_eq!(g.p, f.p);
    }
}
