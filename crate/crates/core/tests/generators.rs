//! Generator expansions against independently computed elliptic forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use siegel_core::bounds::generator_bound;
use siegel_core::generators::{igusa_generator_with, CohenTable, GeneratorId};

const T: u32 = 12;

fn sigma(k: u32, n: u64) -> BigInt {
    (1..=n).filter(|d| n % d == 0).map(|d| num_traits::pow(BigInt::from(d), k as usize)).sum()
}

// 1 + 240 sum sigma_3, 1 - 504 sum sigma_5
fn e4(n: usize) -> Vec<BigInt> {
    (0..=n as u64)
        .map(|m| if m == 0 { BigInt::from(1) } else { sigma(3, m) * 240 })
        .collect()
}

fn e6(n: usize) -> Vec<BigInt> {
    (0..=n as u64)
        .map(|m| if m == 0 { BigInt::from(1) } else { sigma(5, m) * -504 })
        .collect()
}

// tau(n) from Delta = (E4^3 - E6^2) / 1728
fn tau(n: usize) -> Vec<BigInt> {
    let conv = |f: &[BigInt], g: &[BigInt]| -> Vec<BigInt> {
        (0..=n).map(|k| (0..=k).map(|i| &f[i] * &g[k - i]).sum()).collect()
    };
    let a = e4(n);
    let b = e6(n);
    let cube = conv(&conv(&a, &a), &a);
    let sq = conv(&b, &b);
    cube.iter().zip(&sq).map(|(x, y)| (x - y) / 1728).collect()
}

fn int(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

fn series(id: GeneratorId) -> siegel_core::series::TruncatedSeries {
    igusa_generator_with(id, T, &mut CohenTable::new()).unwrap()
}

#[test]
fn tau_oracle_is_right() {
    let t = tau(6);
    let want = [0, 1, -24, 252, -1472, 4830, -6048];
    assert!(t.iter().zip(want).all(|(a, b)| *a == BigInt::from(b)));
}

#[test]
fn eisenstein_restrictions_factor() {
    for (id, ell) in [(GeneratorId::E4, e4(T as usize)), (GeneratorId::E6, e6(T as usize))] {
        let r = series(id).diagonal_restriction();
        for a in 0..=T {
            for c in 0..=T - a {
                let want = int(&(&ell[a as usize] * &ell[c as usize]));
                let got = r.get(&(a, c)).cloned().unwrap_or_else(BigRational::zero);
                assert_eq!(got, want, "{id} at ({a}, {c})");
            }
        }
    }
}

#[test]
fn cusp_form_restrictions() {
    let chi10 = series(GeneratorId::Chi10).diagonal_restriction();
    assert!(chi10.is_empty(), "{chi10:?}");
    let r = series(GeneratorId::Chi12).diagonal_restriction();
    let kappa = r[&(1, 1)].clone();
    assert!(!kappa.is_zero());
    let t = tau(T as usize);
    for a in 0..=T {
        for c in 0..=T - a {
            let want = &kappa * int(&(&t[a as usize] * &t[c as usize]));
            let got = r.get(&(a, c)).cloned().unwrap_or_else(BigRational::zero);
            assert_eq!(got, want, "chi12 at ({a}, {c})");
        }
    }
}

#[test]
fn integral_symmetric_and_within_envelopes() {
    for id in GeneratorId::ALL {
        let s = series(id);
        assert!(s.is_integral(), "{id}");
        assert!(s.is_symmetric(), "{id}");
        let b = generator_bound(id);
        for (n, v) in s.coefficients() {
            if n.trace() == 0 {
                continue;
            }
            let bound = BigInt::from(b.c) * num_traits::pow(BigInt::from(n.trace()), b.d as usize);
            assert!(v.abs() < int(&bound), "{id} at {n:?}");
        }
    }
}
