//! Combinatorics of Γ(N): the bracket {x} and sign μ(x), cusp
//! representatives with their Σ₁/Σ₂ split, lifts to SL₂(Z), the transversal
//! ℜ = {A·Tⁱ} of ±Γ(N) in SL₂(Z), and the order formula ν(A).

use serde::Serialize;

use crate::arith::{ext_gcd, gcd, modn};
use crate::error::{Error, Result};

/// `({x}, μ(x))` with `x ≡ μ(x)·{x} (mod N)` and `0 ≤ {x} ≤ N/2`.
pub fn brace_mu(x: i64, n: i64) -> (i64, i64) {
    let r = modn(x, n);
    let brace = r.min(n - r);
    let mu = if modn(2 * r, n) == 0 || 2 * r < n { 1 } else { -1 };
    (brace, mu)
}

pub fn brace(x: i64, n: i64) -> i64 {
    brace_mu(x, n).0
}

pub fn mu(x: i64, n: i64) -> i64 {
    brace_mu(x, n).1
}

/// An integer matrix `(a b; c d)` of determinant 1, tagged with a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SL2Mat {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
    pub level: u32,
}

impl SL2Mat {
    pub fn new(a: i64, b: i64, c: i64, d: i64, level: u32) -> Result<Self> {
        if a * d - b * c != 1 {
            return Err(Error::NotSl2(format!("({a},{b};{c},{d}) has determinant {}", a * d - b * c)));
        }
        Ok(SL2Mat { a, b, c, d, level })
    }

    pub fn identity(level: u32) -> Self {
        SL2Mat { a: 1, b: 0, c: 0, d: 1, level }
    }

    /// `T = (1 1; 0 1)`.
    pub fn t(level: u32) -> Self {
        SL2Mat { a: 1, b: 1, c: 0, d: 1, level }
    }

    /// `S = (0 1; −1 0)`.
    pub fn s(level: u32) -> Self {
        SL2Mat { a: 0, b: 1, c: -1, d: 0, level }
    }

    /// `Tⁱ = (1 i; 0 1)`.
    pub fn t_pow(i: i64, level: u32) -> Self {
        SL2Mat { a: 1, b: i, c: 0, d: 1, level }
    }

    pub fn mul(&self, o: &SL2Mat) -> SL2Mat {
        SL2Mat {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
            level: self.level,
        }
    }

    pub fn inverse(&self) -> SL2Mat {
        SL2Mat { a: self.d, b: -self.b, c: -self.c, d: self.a, level: self.level }
    }

    pub fn neg(&self) -> SL2Mat {
        SL2Mat { a: -self.a, b: -self.b, c: -self.c, d: -self.d, level: self.level }
    }

    /// Entries reduced into `[0, N)`.
    pub fn residue(&self) -> [[i64; 2]; 2] {
        let n = self.level as i64;
        [[modn(self.a, n), modn(self.b, n)], [modn(self.c, n), modn(self.d, n)]]
    }

    /// True when `self ≡ ±other (mod N)`.
    pub fn congruent_pm(&self, other: &SL2Mat) -> bool {
        self.residue() == other.residue() || self.residue() == other.neg().residue()
    }

    /// Lifts `(a b; c d)` with `ad − bc ≡ 1 (mod N)` to SL₂(Z).
    pub fn lift_mod(a: i64, b: i64, c: i64, d: i64, n: u32) -> Result<SL2Mat> {
        let nn = n as i64;
        if modn(a * d - b * c, nn) != modn(1, nn) {
            return Err(Error::NotSl2(format!("({a},{b};{c},{d}) has determinant ≢ 1 mod {n}")));
        }
        let m = lift_to_sl2(a, c, n)?;
        let db = modn(b - m.b, nn);
        let dd = modn(d - m.d, nn);
        let k = modn(m.d * db - m.b * dd, nn);
        Ok(SL2Mat { a: m.a, b: m.b + k * m.a, c: m.c, d: m.d + k * m.c, level: n })
    }

    pub fn as_rows(&self) -> [[i64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }
}

/// A matrix of determinant 1 whose first column is `≡ (a, c) (mod N)`.
///
/// With `a₀ = a mod N` and `c₀ = c mod N` (`c₀ = N` when `c ≡ 0` and `a₀ ≠ 1`),
/// the first column is `(a₀ + tN, c₀)` for the least `t ≥ 0` making it
/// primitive; the second column `(y, w)` has the least `w ≥ 0`.
pub fn lift_to_sl2(a: i64, c: i64, n: u32) -> Result<SL2Mat> {
    let nn = n as i64;
    if gcd(gcd(a, c), nn) != 1 {
        return Err(Error::InvalidArgument(format!("gcd({a}, {c}, {n}) ≠ 1")));
    }
    let a0 = modn(a, nn);
    let mut c0 = modn(c, nn);
    if c0 == 0 {
        if a0 == modn(1, nn) {
            return Ok(SL2Mat::identity(n));
        }
        c0 = nn;
    }
    let x = (0..)
        .map(|t| a0 + t * nn)
        .find(|&x| gcd(x, c0) == 1)
        .expect("a primitive column exists");
    let (_, u, _) = ext_gcd(x, c0);
    let w = modn(u, c0);
    let y = (x * w - 1) / c0;
    SL2Mat::new(x, y, c0, w, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CuspClass {
    S1,
    S2,
}

/// Which member of a Σ₁ pair receives the direct lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PairConvention {
    /// The member with the lexicographically smaller canonical pair.
    #[default]
    Lexicographic,
    /// The other member.
    Swapped,
}

/// One cusp class of Γ(N) with its fixed matrix in 𝔖.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspRep {
    /// Canonical residues of the pair (a, c).
    pub a: i64,
    pub c: i64,
    pub class: CuspClass,
    /// The matrix of 𝔖 for this cusp; its first column is `≡ ±(a, c)`.
    pub matrix: SL2Mat,
    /// For Σ₁, the matrix of the other member of the pair.
    pub partner: Option<SL2Mat>,
    /// For Σ₁, whether this member received the direct lift.
    pub primary: bool,
}

/// Canonical representative of `{(a,c), (−a,−c)}`.
pub fn canonical_pair(a: i64, c: i64, n: i64) -> (i64, i64) {
    let p = (modn(a, n), modn(c, n));
    let q = (modn(-a, n), modn(-c, n));
    p.min(q)
}

/// `(z, −w; x, −y)` from `A = (x, y; z, w)`: determinant 1, first column `(z, x)`.
pub fn partner_matrix(m: &SL2Mat) -> SL2Mat {
    SL2Mat { a: m.c, b: -m.d, c: m.a, d: -m.b, level: m.level }
}

/// All d_N/N cusp classes, sorted by canonical pair.
pub fn cusp_reps(n: u32) -> Vec<CuspRep> {
    cusp_reps_with(n, PairConvention::Lexicographic)
}

pub fn cusp_reps_with(n: u32, conv: PairConvention) -> Vec<CuspRep> {
    let nn = n as i64;
    let mut pairs = Vec::new();
    for a in 0..nn {
        for c in 0..nn {
            if gcd(gcd(a, c), nn) == 1 && canonical_pair(a, c, nn) == (a, c) {
                pairs.push((a, c));
            }
        }
    }
    pairs
        .iter()
        .map(|&(a, c)| {
            if modn(a - c, nn) == 0 || modn(a + c, nn) == 0 {
                let matrix = lift_to_sl2(a, c, n).expect("primitive pair");
                return CuspRep { a, c, class: CuspClass::S2, matrix, partner: None, primary: true };
            }
            let other = canonical_pair(c, a, nn);
            let smaller = (a, c) < other;
            let primary = match conv {
                PairConvention::Lexicographic => smaller,
                PairConvention::Swapped => !smaller,
            };
            let (pa, pc) = if primary { (a, c) } else { other };
            let base = lift_to_sl2(pa, pc, n).expect("primitive pair");
            let part = partner_matrix(&base);
            let (matrix, partner) = if primary { (base, part) } else { (part, base) };
            CuspRep { a, c, class: CuspClass::S1, matrix, partner: Some(partner), primary }
        })
        .collect()
}

/// ν(A) = min({a},{a+c}) − min({c},{a+c}), from the first column of `A`.
pub fn nu(m: &SL2Mat) -> i64 {
    nu_column(m.a, m.c, m.level as i64)
}

pub fn nu_column(a: i64, c: i64, n: i64) -> i64 {
    let ac = brace(a + c, n);
    brace(a, n).min(ac) - brace(c, n).min(ac)
}

/// An element `A·Tⁱ` of ℜ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransversalEntry {
    pub matrix: SL2Mat,
    /// Index into [`cusp_reps`].
    pub cusp: usize,
    pub i: u32,
}

/// The d_N matrices `A·Tⁱ`, `A ∈ 𝔖`, `0 ≤ i < N`, grouped by cusp.
pub fn transversal(n: u32) -> Vec<TransversalEntry> {
    transversal_from(&cusp_reps(n))
}

pub fn transversal_from(reps: &[CuspRep]) -> Vec<TransversalEntry> {
    let mut out = Vec::new();
    for (k, r) in reps.iter().enumerate() {
        let n = r.matrix.level;
        for i in 0..n {
            out.push(TransversalEntry { matrix: r.matrix.mul(&SL2Mat::t_pow(i as i64, n)), cusp: k, i });
        }
    }
    out
}

/// JSON row of the `cusps` report.
#[derive(Serialize)]
pub struct CuspJson {
    pub a: i64,
    pub c: i64,
    pub class: CuspClass,
    pub matrix: [[i64; 2]; 2],
    pub nu_orbit: Vec<i64>,
}

pub fn cusp_report(n: u32) -> Vec<CuspJson> {
    cusp_reps(n)
        .iter()
        .map(|r| CuspJson {
            a: r.a,
            c: r.c,
            class: r.class,
            matrix: r.matrix.as_rows(),
            nu_orbit: (0..n as i64).map(|i| nu(&r.matrix.mul(&SL2Mat::t_pow(i, n)))).collect(),
        })
        .collect()
}
