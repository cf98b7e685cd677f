//! Independent oracles for integration tests: exact rational arithmetic,
//! a 256-bit fixed-point logarithm, Pascal-triangle coefficients and brute
//! force enumerators. Nothing here calls into the library's numeric kernel.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

const PREC: u64 = 256;

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_pow(base: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= base;
    }
    acc
}

/// Pascal-triangle binomial coefficient.
pub fn pascal(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut row = vec![BigUint::one()];
    for i in 1..=n {
        let mut next = vec![BigUint::one(); i + 1];
        for j in 1..i {
            next[j] = &row[j - 1] + &row[j];
        }
        row = next;
    }
    row[k].clone()
}

pub fn pascal_rat(n: usize, k: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(pascal(n, k)))
}

fn fixed_mul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> PREC
}

/// 2 * atanh(z) in fixed point for |z| < 1/2, z given in fixed point.
fn two_atanh_fixed(z: &BigInt) -> BigInt {
    // shifts floor toward -inf, so a negative series would never reach zero
    if z.is_negative() {
        return -two_atanh_fixed(&-z);
    }
    let z2 = fixed_mul(z, z);
    let mut term = z.clone();
    let mut sum = BigInt::zero();
    let mut k: u64 = 1;
    while !term.is_zero() {
        sum += &term / BigInt::from(k);
        term = fixed_mul(&term, &z2);
        k += 2;
    }
    sum * 2
}

fn ln2_fixed() -> BigInt {
    let third = (BigInt::one() << PREC) / BigInt::from(3);
    two_atanh_fixed(&third)
}

/// Natural log of a positive rational, to ~75 decimal digits.
pub fn ln_rat(r: &BigRational) -> f64 {
    fixed_to_f64(&ln_rat_fixed(r))
}

fn ln_rat_fixed(r: &BigRational) -> BigInt {
    assert!(r.is_positive(), "ln of non-positive rational");
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let e = nb - db;
    let scale = if e >= 0 {
        BigRational::from_integer(BigInt::one() << (e as u64))
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << ((-e) as u64))
    };
    let m = r / scale;
    let z = (&m - BigRational::one()) / (&m + BigRational::one());
    let z_fixed = (z.numer() << PREC) / z.denom();
    two_atanh_fixed(&z_fixed) + ln2_fixed() * BigInt::from(e)
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits > 900 {
        let shift = bits - 900;
        (v >> shift).to_f64().unwrap() * 2f64.powi((shift as i64 - PREC as i64) as i32)
    } else {
        v.to_f64().unwrap() / 2f64.powi(PREC as i32)
    }
}

/// Sum of `ln` values computed in fixed point before rounding.
pub fn ln_rat_sum(parts: &[(i64, BigRational)]) -> f64 {
    let mut acc = BigInt::zero();
    for (coef, r) in parts {
        acc += ln_rat_fixed(r) * BigInt::from(*coef);
    }
    fixed_to_f64(&acc)
}

/// Exact `P[Bin(n, p) >= j]` for rational p.
pub fn binom_tail_exact(n: usize, p: &BigRational, j: usize) -> BigRational {
    let q = BigRational::one() - p;
    (j..=n)
        .map(|i| pascal_rat(n, i) * rat_pow(p, i as u32) * rat_pow(&q, (n - i) as u32))
        .fold(BigRational::zero(), |a, b| a + b)
}

pub fn binom_pmf_exact(n: usize, p: &BigRational, j: usize) -> BigRational {
    let q = BigRational::one() - p;
    pascal_rat(n, j) * rat_pow(p, j as u32) * rat_pow(&q, (n - j) as u32)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

/// Exact KL divergence `D(q||p)` for rationals, via the fixed-point log.
pub fn kl_exact(q: &BigRational, p: &BigRational) -> f64 {
    let one = BigRational::one();
    let a = q / p;
    let b = (&one - q) / (&one - p);
    // q ln a + (1-q) ln b, with the rational weights applied in fixed point
    let la = ln_rat_fixed(&a);
    let lb = ln_rat_fixed(&b);
    let wa = (q.numer() << PREC) / q.denom();
    let wb = ((&one - q).numer() << PREC) / (&one - q).denom();
    fixed_to_f64(&(fixed_mul(&la, &wa) + fixed_mul(&lb, &wb)))
}

/// Brute-force distribution of the success count over all 2^n outcomes.
pub fn poisson_binomial_brute(ps: &[f64]) -> Vec<f64> {
    let n = ps.len();
    let mut out = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let mut w = 1.0;
        for (i, p) in ps.iter().enumerate() {
            w *= if mask >> i & 1 == 1 { *p } else { 1.0 - p };
        }
        out[mask.count_ones() as usize] += w;
    }
    out
}

pub fn assert_rel(actual: f64, expected: f64, rel: f64, what: &str) {
    let scale = actual.abs().max(expected.abs()).max(1e-300);
    assert!(
        (actual - expected).abs() <= rel * scale,
        "{what}: actual {actual:e} vs expected {expected:e} (rel tol {rel:e})"
    );
}
