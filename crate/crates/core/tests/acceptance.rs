//! Acceptance criteria 1–9. Each prints one PASS/FAIL line.
//!
//! Two criteria contain relations or values that are misprinted in the source
//! text. Those are checked exactly as printed and reported FAIL; the test then
//! requires that the failing items are exactly the documented misprints and
//! that the corrected forms pass.

use std::time::{Duration, Instant};

use genlambda::arith::gcd;
use genlambda::cmval::{reciprocal_check, unit_circle_check, verify_cm_table, verify_identities};
use genlambda::counts::{count_report, ell_t, ray_class_degree, sums_sweep, Route};
use genlambda::lambda::{galois_matrix, lambda_basis_series, lambda_series, BasisPair};
use genlambda::minpoly::{
    build_f, build_f_with, default_prec, pole_cusp_count, specialize_and_factor, verify_theorem1, BivarPoly,
    BuildOptions, Specialization,
};
use genlambda::modgroup::{cusp_reps, nu, transversal, PairConvention};
use genlambda::poly::{match_distance, roots_numeric, Poly};
use genlambda::{Cyc, C64};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u32,
    passed: bool,
    detail: String,
    /// Names of failing items; must equal `known` when the criterion fails.
    failing: Vec<String>,
    known: &'static [&'static str],
}

impl Outcome {
    fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{status} criterion {}: {}", self.id, self.detail);
        if !self.passed {
            s.push_str(&format!(" | failing: {}", self.failing.join("; ")));
        }
        s
    }

    fn acceptable(&self) -> bool {
        self.passed || (!self.known.is_empty() && self.failing.iter().map(String::as_str).eq(self.known.iter().copied()))
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn power(f: &BivarPoly, y: i64) -> Option<(u32, Poly<BigRational>, bool)> {
    match specialize_and_factor(f, &Cyc::from_i64(f.n, y)).ok()? {
        s @ Specialization::Power { .. } if s.certified() => {
            let Specialization::Power { k, h, h0_nonzero, .. } = s else { unreachable!() };
            Some((k, h, h0_nonzero))
        }
        _ => None,
    }
}

fn c1_degrees() -> Outcome {
    let mut failing = Vec::new();
    let mut detail = String::new();
    for (n, d, ell) in [(3u32, 12usize, 1usize), (4, 24, 1), (5, 60, 4)] {
        let (f, t) = timed(|| build_f(n, None).unwrap());
        if (f.d, f.deg_y()) != (d, ell) {
            failing.push(format!("N={n}: ({}, {})", f.d, f.deg_y()));
        }
        if n == 5 && t > Duration::from_secs(30) {
            failing.push(format!("N=5 took {t:?}"));
        }
        detail.push_str(&format!("N={n} ({},{}) {:.2}s; ", f.d, f.deg_y(), t.as_secs_f64()));
    }
    Outcome { id: 1, passed: failing.is_empty(), detail, failing, known: &[] }
}

fn c2_structure() -> Outcome {
    let mut failing = Vec::new();
    let mut detail = String::new();
    for n in [3u32, 4, 5, 7] {
        let ((f, r), t) = timed(|| {
            let f = build_f(n, None).unwrap();
            let r = verify_theorem1(&f).unwrap();
            (f, r)
        });
        if !r.passed() {
            failing.push(format!("N={n}: {:?}", r.failures));
        }
        if n == 7 && t > Duration::from_secs(600) {
            failing.push(format!("N=7 took {t:?}"));
        }
        detail.push_str(&format!("N={n} d={} {:.1}s; ", f.d, t.as_secs_f64()));
    }
    Outcome { id: 2, passed: failing.is_empty(), detail, failing, known: &[] }
}

fn c3_orders() -> Outcome {
    let mut failing = Vec::new();
    let mut checked = 0;
    for n in 3u32..=9 {
        for e in transversal(n) {
            let s = lambda_series(&e.matrix, 2 * n as i64 + 2).unwrap();
            checked += 1;
            if s.order().ok() != Some(nu(&e.matrix)) {
                failing.push(format!("N={n} A={:?}", e.matrix.as_rows()));
            }
        }
        let nus: Vec<i64> = cusp_reps(n).iter().map(|r| nu(&r.matrix)).collect();
        let pos: i64 = nus.iter().filter(|&&v| v > 0).sum();
        let neg: i64 = -nus.iter().filter(|&&v| v < 0).sum::<i64>();
        let (ell, _) = ell_t(n as u64, Route::Enum).unwrap();
        if pos != ell || neg != ell {
            failing.push(format!("N={n}: Σν⁺={pos} Σν⁻={neg} ℓ={ell}"));
        }
    }
    let detail = format!("{checked} transversal elements for N=3..9, zero/pole balance = ℓ_N");
    Outcome { id: 3, passed: failing.is_empty(), detail, failing, known: &[] }
}

fn c4_specializations() -> Outcome {
    let mut failing = Vec::new();
    for n in [3u32, 4, 5] {
        let f = build_f(n, None).unwrap();
        match power(&f, 0) {
            Some((3, h, true)) if h.degree() == Some(f.d / 3) => {}
            _ => failing.push(format!("N={n} F(X,0)")),
        }
        match power(&f, 1728) {
            Some((2, h, true)) if h.degree() == Some(f.d / 2) => {}
            _ => failing.push(format!("N={n} F(X,1728)")),
        }
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..2 {
            let y = loop {
                let y = rng.gen_range(-5000i64..5000);
                if y != 0 && y != 1728 {
                    break y;
                }
            };
            if !matches!(specialize_and_factor(&f, &Cyc::from_i64(n, y)), Ok(Specialization::SquareFree { .. })) {
                failing.push(format!("N={n} y={y} not certified square-free"));
            }
        }
    }
    let f = build_f(3, None).unwrap();
    let z = Cyc::zeta(3).embed();
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let h2_listed = [i - z, -i - z, one - i * z, one + i * z, i + i * z, -i - i * z];
    let h1_listed = [one - z, (one - z) / 3.0, -z - one, z + one];
    let (_, h1, _) = power(&f, 0).unwrap();
    let (_, h2, _) = power(&f, 1728).unwrap();
    let e1 = match_distance(&roots_numeric(&h1.embed()), &h1_listed);
    let e2 = match_distance(&roots_numeric(&h2.embed()), &h2_listed);
    if e1 >= 1e-10 || e2 >= 1e-10 {
        failing.push(format!("N=3 root match {e1:.1e} / {e2:.1e}"));
    }
    let detail = format!("cube/square shapes for N=3,4,5; N=3 H₁ roots {e1:.1e}, H₂ roots {e2:.1e}");
    Outcome { id: 4, passed: failing.is_empty(), detail, failing, known: &[] }
}

const MISPRINTED_RELATIONS: &[&str] = &["N=3 g₃¹² = 81(1−ζ)(Λ−1)(Λ+ζ)/Λ³", "N=4 (Λg₄²)⁴ + (2Λ)⁴ = (2(Λ+1−i))⁴"];

fn c5_identities() -> Outcome {
    let mut failing = Vec::new();
    let mut corrected_ok = true;
    let mut count = 0;
    for n in [3u32, 4] {
        let r = verify_identities(n, 120, 2024).unwrap();
        for row in &r.rows {
            count += 1;
            if !row.as_printed {
                corrected_ok &= row.passed;
            } else if !row.passed {
                failing.push(format!("N={n} {}", row.name));
            }
        }
    }
    let mut o = Outcome {
        id: 5,
        passed: failing.is_empty(),
        detail: format!("{count} relations as exact series over 120 terms and at 3 random τ; corrected forms pass: {corrected_ok}"),
        failing,
        known: MISPRINTED_RELATIONS,
    };
    if !corrected_ok {
        o.known = &[];
    }
    o
}

fn c6_counts() -> Outcome {
    let mut failing = Vec::new();
    let (sweep, t) = timed(|| sums_sweep(200));
    if !sweep.passed() {
        failing.push(format!("{} closed-form mismatches", sweep.mismatches.len()));
    }
    if t > Duration::from_secs(60) {
        failing.push(format!("sweep took {t:?}"));
    }
    for n in 3..=40u64 {
        let r = count_report(n).unwrap();
        if !r.all_agree() {
            failing.push(format!("routes disagree at N={n}"));
        }
        if genlambda::arith::prime_power(n).is_some() && n <= 32 && r.closed_agrees != Some(true) {
            failing.push(format!("prime-power route at N={n}"));
        }
    }
    for n in [3u32, 4, 5, 7, 8, 9] {
        let (ell, tn) = ell_t(n as u64, Route::Enum).unwrap();
        let f = build_f(n, None).unwrap();
        if f.deg_y() as i64 != ell || f.t as i64 != tn || pole_cusp_count(n) as i64 != tn {
            failing.push(format!("N={n}: deg_Y={} t={} vs ({ell},{tn})", f.deg_y(), f.t));
        }
    }
    let detail = format!(
        "{} closed forms = enumeration in {:.2}s; three routes N≤40; deg_Y F = ℓ_N for N=3,4,5,7,8,9",
        sweep.compared,
        t.as_secs_f64()
    );
    Outcome { id: 6, passed: failing.is_empty(), detail, failing, known: &[] }
}

const MISPRINTED_VALUES: &[&str] = &["N=4 Λ(i) = (i−1)/√−2", "N=4 Λ((1+√−7)/2) = (1−3i+(1+i)√−7)/2"];

fn c7_cm() -> Outcome {
    let mut failing = Vec::new();
    let mut corrected_ok = true;
    let mut rows = 0;
    for n in [3u32, 4] {
        let r = verify_cm_table(n).unwrap();
        for row in &r.rows {
            rows += 1;
            if !row.as_printed {
                corrected_ok &= row.passed;
            } else if !row.passed {
                failing.push(format!("N={n} {}", row.name));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let pts: Vec<C64> = (0..5).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.4..2.0))).collect();
    let angles: Vec<f64> = (0..10).map(|k| std::f64::consts::PI * (0.52 + 0.045 * k as f64)).collect();
    let mut worst = (0.0f64, 0.0f64);
    for n in [3u32, 4, 5] {
        let u = unit_circle_check(n, &angles).unwrap();
        let r = reciprocal_check(n, &pts).unwrap();
        worst = (worst.0.max(u), worst.1.max(r));
        if u >= 1e-9 {
            failing.push(format!("unit circle N={n}: {u:.1e}"));
        }
        if r >= 1e-9 {
            failing.push(format!("reciprocal law N={n}: {r:.1e}"));
        }
    }
    Outcome {
        id: 7,
        passed: failing.is_empty(),
        detail: format!(
            "{rows} table rows; unit circle {:.1e}, reciprocal {:.1e}; corrected values pass: {corrected_ok}",
            worst.0, worst.1
        ),
        failing,
        known: if corrected_ok { MISPRINTED_VALUES } else { &[] },
    }
}

fn c8_ray_class() -> Outcome {
    let mut failing = Vec::new();
    for (d, n, e) in [(-11i64, 4u64, 3i128), (-11, 3, 1), (-7, 3, 2)] {
        let v = ray_class_degree(d, n).unwrap();
        if v != e.into() {
            failing.push(format!("({d},{n}) → {v}"));
        }
    }
    Outcome { id: 8, passed: failing.is_empty(), detail: "(−11,4)→3, (−11,3)→1, (−7,3)→2".into(), failing, known: &[] }
}

fn c9_robustness() -> Outcome {
    let mut failing = Vec::new();
    for n in [3u32, 4, 5] {
        let a = build_f(n, None).unwrap().to_json().unwrap();
        let b = build_f(n, Some(2 * default_prec(n).unwrap())).unwrap().to_json().unwrap();
        if a != b {
            failing.push(format!("precision doubling changes F at N={n}"));
        }
    }
    for n in [3u32, 4] {
        let a = build_f(n, None).unwrap().to_json().unwrap();
        let opts = BuildOptions { prec: None, convention: PairConvention::Swapped };
        if a != build_f_with(n, opts).unwrap().to_json().unwrap() {
            failing.push(format!("convention changes F at N={n}"));
        }
    }
    let mut galois = 0;
    for n in [5u32, 7] {
        let prec = 2 * n as i64;
        for e in transversal(n) {
            let base = lambda_series(&e.matrix, prec).unwrap();
            for k in (2..n as i64).filter(|&k| gcd(k, n as i64) == 1) {
                let ak = galois_matrix(&e.matrix, k).unwrap();
                let rhs = lambda_basis_series(&BasisPair::lambda_k(k, n).unwrap().compose(&ak), prec).unwrap();
                galois += 1;
                if base.galois(k).unwrap() != rhs {
                    failing.push(format!("Galois law N={n} k={k} A={:?}", e.matrix.as_rows()));
                }
            }
        }
    }
    let detail = format!("precision doubling N=3,4,5; convention N=3,4; {galois} Galois-law identities N=5,7");
    Outcome { id: 9, passed: failing.is_empty(), detail, failing, known: &[] }
}

#[test]
fn acceptance() {
    let outcomes = [
        c1_degrees(),
        c2_structure(),
        c3_orders(),
        c4_specializations(),
        c5_identities(),
        c6_counts(),
        c7_cm(),
        c8_ray_class(),
        c9_robustness(),
    ];
    for o in &outcomes {
        println!("{}", o.line());
    }
    let bad: Vec<String> = outcomes.iter().filter(|o| !o.acceptable()).map(Outcome::line).collect();
    assert!(bad.is_empty(), "unexpected failures:\n{}", bad.join("\n"));
}
