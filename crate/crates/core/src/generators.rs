//! Exact Fourier expansions of the Igusa generators `E4, E6, chi10, chi12`.
//!
//! Each generator is the Maass lift of an index-one Jacobi form. The Jacobi
//! Eisenstein series have coefficients `H(k-1, D) / H(k-1, 0)` (Cohen's
//! function) and the Jacobi cusp forms of weight 10 and 12 are fixed
//! combinations of those with elliptic Eisenstein series.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::ops::RangeInclusive;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{
    bernoulli_numbers, binomial, divisors, fundamental_decomposition, is_fundamental_discriminant,
    kronecker, moebius, sigma,
};
use crate::elliptic;
use crate::index::{enumerate_indices, FourierIndex};
use crate::series::TruncatedSeries;
use crate::Error;

fn rat(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// `S_m = sum_{a=1}^{f} chi(a) a^m` for `m = 0..=n`.
fn character_power_sums(d: i64, f: u64, n: u32) -> Vec<BigInt> {
    let mut sums: Vec<i128> = alloc::vec![0; n as usize + 1];
    let mut overflow = false;
    'outer: for a in 1..=f {
        let chi = kronecker(d, a) as i128;
        if chi == 0 {
            continue;
        }
        let mut pw: i128 = 1;
        for s in sums.iter_mut() {
            match s.checked_add(chi * pw) {
                Some(v) => *s = v,
                None => {
                    overflow = true;
                    break 'outer;
                }
            }
            pw = match pw.checked_mul(a as i128) {
                Some(v) => v,
                None => {
                    overflow = true;
                    break 'outer;
                }
            };
        }
    }
    if !overflow {
        return sums.into_iter().map(BigInt::from).collect();
    }
    let mut sums = alloc::vec![BigInt::zero(); n as usize + 1];
    for a in 1..=f {
        let chi = kronecker(d, a);
        if chi == 0 {
            continue;
        }
        let mut pw = BigInt::from(chi);
        for s in sums.iter_mut() {
            *s += &pw;
            pw *= a;
        }
    }
    sums
}

fn generalized_bernoulli_with(d: i64, n: u32, b: &[BigRational]) -> BigRational {
    let f = d.unsigned_abs();
    let s = character_power_sums(d, f, n);
    // B_{n,chi} = sum_j C(n,j) B_j S_{n-j} f^(j-1)
    let mut total = BigRational::zero();
    for j in 0..=n {
        if b[j as usize].is_zero() {
            continue;
        }
        let fpow = if j == 0 {
            BigRational::new(BigInt::one(), BigInt::from(f))
        } else {
            rat(num_traits::pow(BigInt::from(f), j as usize - 1))
        };
        total += rat(binomial(n as u64, j as u64)) * &b[j as usize] * rat(s[(n - j) as usize].clone()) * fpow;
    }
    total
}

/// `B_{n, chi_D}` for a fundamental discriminant `D` (possibly 1).
pub fn generalized_bernoulli(d: i64, n: u32) -> Result<BigRational, Error> {
    if !is_fundamental_discriminant(d) {
        return Err(Error::NonFundamentalDiscriminant(d));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("generalized Bernoulli index must be >= 1".into()));
    }
    Ok(generalized_bernoulli_with(d, n, &bernoulli_numbers(n as usize)))
}

/// Memoised values of Cohen's `H(r, N)`.
#[derive(Clone, Debug, Default)]
pub struct CohenTable {
    values: BTreeMap<(u32, u64), BigRational>,
    l_values: BTreeMap<(u32, i64), BigRational>,
    bernoulli: Vec<BigRational>,
}

impl CohenTable {
    pub fn new() -> CohenTable {
        CohenTable::default()
    }

    fn bernoulli(&mut self, n: usize) -> &[BigRational] {
        if self.bernoulli.len() <= n {
            self.bernoulli = bernoulli_numbers(n.max(16));
        }
        &self.bernoulli
    }

    /// `L(1 - r, chi_D) = -B_{r,chi_D} / r`.
    fn l_value(&mut self, r: u32, d: i64) -> BigRational {
        if let Some(v) = self.l_values.get(&(r, d)) {
            return v.clone();
        }
        let b = self.bernoulli(r as usize).to_vec();
        let v = -generalized_bernoulli_with(d, r, &b) / rat(BigInt::from(r));
        self.l_values.insert((r, d), v.clone());
        v
    }

    /// `H(r, N)`.
    pub fn h(&mut self, r: u32, n: u64) -> BigRational {
        if let Some(v) = self.values.get(&(r, n)) {
            return v.clone();
        }
        let v = if n % 4 == 1 || n % 4 == 2 {
            BigRational::zero()
        } else if n == 0 {
            // zeta(1 - 2r) = -B_{2r} / (2r)
            let b = self.bernoulli(2 * r as usize)[2 * r as usize].clone();
            -b / rat(BigInt::from(2 * r))
        } else {
            let (d, f) = fundamental_decomposition(n);
            let l = self.l_value(r, d);
            let mut s = BigInt::zero();
            for e in divisors(f) {
                let mu = moebius(e);
                if mu == 0 {
                    continue;
                }
                let chi = kronecker(d, e);
                if chi == 0 {
                    continue;
                }
                s += BigInt::from(mu * chi)
                    * num_traits::pow(BigInt::from(e), r as usize - 1)
                    * sigma(2 * r - 1, f / e);
            }
            l * rat(s)
        };
        self.values.insert((r, n), v.clone());
        v
    }

    /// Seeds the memo, e.g. from a cache file.
    pub fn insert(&mut self, r: u32, n: u64, v: BigRational) {
        self.values.insert((r, n), v);
    }

    /// All memoised `((r, N), H(r, N))` in increasing order.
    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u64), &BigRational)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Shorthand for a single `H(r, N)` without a shared memo.
pub fn cohen_h(r: u32, n: u64) -> BigRational {
    CohenTable::new().h(r, n)
}

/// Coefficients `c(D)` of an index-one Jacobi form `sum c(4n - r^2) q^n zeta^r`,
/// for admissible `D <= dmax` (`D = 0, 3 mod 4`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiCoefficientTable {
    weight: u32,
    dmax: u64,
    coeffs: BTreeMap<u64, BigRational>,
}

fn admissible(d: u64) -> bool {
    d % 4 == 0 || d % 4 == 3
}

impl JacobiCoefficientTable {
    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn dmax(&self) -> u64 {
        self.dmax
    }

    /// `c(D)`; zero for inadmissible `D`, `None` beyond `dmax`.
    pub fn get(&self, d: u64) -> Option<BigRational> {
        if d > self.dmax {
            return None;
        }
        Some(self.coeffs.get(&d).cloned().unwrap_or_else(BigRational::zero))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&u64, &BigRational)> {
        self.coeffs.iter()
    }
}

/// Jacobi Eisenstein series of weight 4 or 6: `e_k(D) = H(k-1, D) / H(k-1, 0)`.
pub fn jacobi_eisenstein(k: u32, dmax: u64, h: &mut CohenTable) -> Result<JacobiCoefficientTable, Error> {
    if k != 4 && k != 6 {
        return Err(Error::UnsupportedWeight(k));
    }
    let h0 = h.h(k - 1, 0);
    let mut coeffs = BTreeMap::new();
    for d in (0..=dmax).filter(|&d| admissible(d)) {
        coeffs.insert(d, h.h(k - 1, d) / &h0);
    }
    Ok(JacobiCoefficientTable {
        weight: k,
        dmax,
        coeffs,
    })
}

/// Jacobi cusp forms of weight 10 and 12, normalised by `c(3) = 1`:
/// `(E6 E_{4,1} - E4 E_{6,1}) / 144` and `(E4^2 E_{4,1} - E6 E_{6,1}) / 144`.
pub fn jacobi_cusp(k: u32, dmax: u64, h: &mut CohenTable) -> Result<JacobiCoefficientTable, Error> {
    let n_max = (dmax / 4) as usize + 1;
    let e4 = elliptic::eisenstein(4, n_max)?;
    let e6 = elliptic::eisenstein(6, n_max)?;
    let (f1, f2) = match k {
        10 => (e6, e4),
        12 => (elliptic::mul(&e4, &e4), e6),
        _ => return Err(Error::UnsupportedWeight(k)),
    };
    let j4 = jacobi_eisenstein(4, dmax, h)?;
    let j6 = jacobi_eisenstein(6, dmax, h)?;
    let denom = rat(BigInt::from(144));
    let mut coeffs = BTreeMap::new();
    for d in (0..=dmax).filter(|&d| admissible(d)) {
        let mut s = BigRational::zero();
        let mut j = 0u64;
        while 4 * j <= d {
            let dd = d - 4 * j;
            let a = rat(f1[j as usize].clone()) * j4.get(dd).unwrap_or_default();
            let b = rat(f2[j as usize].clone()) * j6.get(dd).unwrap_or_default();
            s += a - b;
            j += 1;
        }
        let v = s / &denom;
        if !v.is_zero() {
            coeffs.insert(d, v);
        }
    }
    Ok(JacobiCoefficientTable {
        weight: k,
        dmax,
        coeffs,
    })
}

/// Largest discriminant `4ac - b^2` among indices of trace at most `t`.
pub fn required_dmax(t: u32) -> u64 {
    let t = t as u64;
    if t % 2 == 0 {
        t * t
    } else {
        t * t - 1
    }
}

/// Lift coefficients for all indices whose trace lies in `traces`.
///
/// Cusp case: `a(N) = sum_{d | content(N)} d^(k-1) c(disc(N) / d^2)`.
/// Eisenstein case: the same sum times `2 / zeta(1-k)`, and `a(0) = 1`.
pub fn maass_lift_traces(
    jc: &JacobiCoefficientTable,
    is_eisenstein: bool,
    traces: RangeInclusive<u32>,
) -> Result<Vec<(FourierIndex, BigRational)>, Error> {
    let k = jc.weight;
    let needed = required_dmax(*traces.end());
    if jc.dmax < needed {
        return Err(Error::InsufficientCoverage {
            needed,
            available: jc.dmax,
        });
    }
    let scale = if is_eisenstein {
        let bk = bernoulli_numbers(k as usize)[k as usize].clone();
        // 2 / zeta(1 - k) = -2k / B_k
        -rat(BigInt::from(2 * k)) / bk
    } else {
        BigRational::one()
    };
    let mut out = Vec::new();
    for t in traces {
        for n in enumerate_indices(t) {
            if n.trace() == 0 {
                if is_eisenstein {
                    out.push((n, BigRational::one()));
                }
                continue;
            }
            let disc = n.disc() as u64;
            let mut s = BigRational::zero();
            for d in divisors(n.content()) {
                let c = jc.get(disc / (d * d)).expect("coverage checked");
                if !c.is_zero() {
                    s += rat(num_traits::pow(BigInt::from(d), k as usize - 1)) * c;
                }
            }
            let v = s * &scale;
            if !v.is_zero() {
                out.push((n, v));
            }
        }
    }
    Ok(out)
}

/// Maass lift truncated at trace `t`.
pub fn maass_lift(
    jc: &JacobiCoefficientTable,
    is_eisenstein: bool,
    t: u32,
) -> Result<TruncatedSeries, Error> {
    let entries = maass_lift_traces(jc, is_eisenstein, 0..=t)?;
    Ok(TruncatedSeries::from_sorted(jc.weight, t, entries.into_iter()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorId {
    E4,
    E6,
    Chi10,
    Chi12,
}

impl GeneratorId {
    pub const ALL: [GeneratorId; 4] = [GeneratorId::E4, GeneratorId::E6, GeneratorId::Chi10, GeneratorId::Chi12];

    pub fn weight(self) -> u32 {
        match self {
            GeneratorId::E4 => 4,
            GeneratorId::E6 => 6,
            GeneratorId::Chi10 => 10,
            GeneratorId::Chi12 => 12,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GeneratorId::E4 => "e4",
            GeneratorId::E6 => "e6",
            GeneratorId::Chi10 => "chi10",
            GeneratorId::Chi12 => "chi12",
        }
    }

    pub fn from_name(s: &str) -> Option<GeneratorId> {
        GeneratorId::ALL.into_iter().find(|g| g.name() == s)
    }

    pub fn is_eisenstein(self) -> bool {
        matches!(self, GeneratorId::E4 | GeneratorId::E6)
    }

    /// Position in `ALL`, also the exponent slot in eigenform monomials.
    pub fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The Jacobi form whose lift is `id`, covering discriminants up to `dmax`.
pub fn jacobi_table(id: GeneratorId, dmax: u64, h: &mut CohenTable) -> Result<JacobiCoefficientTable, Error> {
    match id {
        GeneratorId::E4 | GeneratorId::E6 => jacobi_eisenstein(id.weight(), dmax, h),
        GeneratorId::Chi10 | GeneratorId::Chi12 => jacobi_cusp(id.weight(), dmax, h),
    }
}

/// Entries of `id` with trace in `traces`, sharing the `H` memo.
pub fn generator_traces(
    id: GeneratorId,
    traces: RangeInclusive<u32>,
    h: &mut CohenTable,
) -> Result<Vec<(FourierIndex, BigRational)>, Error> {
    let jc = jacobi_table(id, required_dmax(*traces.end()), h)?;
    maass_lift_traces(&jc, id.is_eisenstein(), traces)
}

/// Generator `id` truncated at trace `t`, sharing the `H` memo.
pub fn igusa_generator_with(id: GeneratorId, t: u32, h: &mut CohenTable) -> Result<TruncatedSeries, Error> {
    let entries = generator_traces(id, 0..=t, h)?;
    Ok(TruncatedSeries::from_sorted(id.weight(), t, entries.into_iter()))
}

/// Extends `prefix`, a truncation of generator `id`, to trace `t`; only the
/// new traces are computed.
pub fn extend_generator(
    prefix: &TruncatedSeries,
    id: GeneratorId,
    t: u32,
    h: &mut CohenTable,
) -> Result<TruncatedSeries, Error> {
    if prefix.weight() != id.weight() {
        return Err(Error::WeightMismatch {
            left: prefix.weight(),
            right: id.weight(),
        });
    }
    let t0 = prefix.trace_bound();
    if t <= t0 {
        return Ok(prefix.truncate(t));
    }
    let tail = generator_traces(id, t0 + 1..=t, h)?;
    let entries = prefix.coefficients().iter().cloned().chain(tail);
    Ok(TruncatedSeries::from_sorted(id.weight(), t, entries))
}

/// Generator `id` truncated at trace `t`.
pub fn igusa_generator(id: GeneratorId, t: u32) -> Result<TruncatedSeries, Error> {
    igusa_generator_with(id, t, &mut CohenTable::new())
}
