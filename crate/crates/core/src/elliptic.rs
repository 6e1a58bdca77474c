//! One-variable `q`-expansions of level-one elliptic modular forms.

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{bernoulli_numbers, sigma};
use crate::Error;

/// `E_k = 1 - (2k / B_k) sum sigma_{k-1}(n) q^n` up to `q^n_max`, for even `k >= 4`.
pub fn eisenstein(k: u32, n_max: usize) -> Result<Vec<BigInt>, Error> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::UnsupportedWeight(k));
    }
    let bk = bernoulli_numbers(k as usize)[k as usize].clone();
    let factor = -BigRational::from_integer(BigInt::from(2 * k)) / bk;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(BigInt::one());
    for n in 1..=n_max {
        let v = &factor * BigRational::from_integer(sigma(k - 1, n as u64));
        if !v.is_integer() {
            return Err(Error::UnsupportedWeight(k));
        }
        out.push(v.to_integer());
    }
    Ok(out)
}

/// Truncated product of two expansions.
pub fn mul(f: &[BigInt], g: &[BigInt]) -> Vec<BigInt> {
    let n = f.len().min(g.len());
    let mut out = vec![BigInt::zero(); n];
    for (i, a) in f.iter().enumerate().take(n) {
        if a.is_zero() {
            continue;
        }
        for (j, b) in g.iter().enumerate().take(n - i) {
            out[i + j] += a * b;
        }
    }
    out
}

/// `Delta = q prod (1 - q^n)^24` up to `q^n_max`.
pub fn delta(n_max: usize) -> Vec<BigInt> {
    let len = n_max + 1;
    // prod (1 - q^n) up to q^(len-1), then the 24th power
    let mut p = vec![BigInt::zero(); len];
    p[0] = BigInt::one();
    for n in 1..len {
        for i in (n..len).rev() {
            let t = p[i - n].clone();
            p[i] -= t;
        }
    }
    let mut pow = vec![BigInt::zero(); len];
    pow[0] = BigInt::one();
    for _ in 0..24 {
        pow = mul(&pow, &p);
    }
    let mut out = vec![BigInt::zero(); len];
    out[1..len].clone_from_slice(&pow[..(len - 1)]);
    out
}
