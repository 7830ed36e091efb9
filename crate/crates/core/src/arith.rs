//! Elementary integer arithmetic shared by every module.

/// Non-negative residue of `x` modulo `n > 0`.
pub fn modn(x: i64, n: i64) -> i64 {
    x.rem_euclid(n)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Returns `(g, x, y)` with `a·x + b·y = g = gcd(a, b) ≥ 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i64, 0i64);
    let (mut y0, mut y1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Inverse of `a` modulo `n`, in `[0, n)`.
pub fn mod_inv(a: i64, n: i64) -> Option<i64> {
    let (g, x, _) = ext_gcd(modn(a, n), n);
    (g == 1).then(|| modn(x, n))
}

/// Prime factorization as `(p, e)` pairs with increasing `p`. `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Product of the distinct primes dividing `n`.
pub fn radical(n: u64) -> u64 {
    factorize(n).iter().map(|&(p, _)| p).product()
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    v.sort_unstable();
    v
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

/// Returns `(p, m)` when `n = p^m` with `m ≥ 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    match factorize(n).as_slice() {
        [(p, e)] => Some((*p, *e)),
        _ => None,
    }
}

/// Kronecker symbol `(d / p)` for a prime `p`; `p = 2` uses the residue of `d` mod 8.
pub fn kronecker_prime(d: i64, p: u64) -> i64 {
    let pi = p as i64;
    if p == 2 {
        return match modn(d, 8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    let a = modn(d, pi);
    if a == 0 {
        return 0;
    }
    // Euler's criterion.
    let mut result = 1i128;
    let mut base = a as i128;
    let mut e = (pi - 1) / 2;
    let m = pi as i128;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    if result == 1 {
        1
    } else {
        -1
    }
}

/// True when `d` is the discriminant of a quadratic field.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let squarefree = |m: u64| factorize(m).iter().all(|&(_, e)| e == 1);
    match modn(d, 4) {
        1 => squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(modn(m, 4), 2 | 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}
