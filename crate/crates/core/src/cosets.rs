//! Left-coset representatives of the Hecke operators `T_p` and `T_{p^2,1}`
//! and their action on the Siegel upper half-space.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;

use crate::arith::is_prime;
use crate::ball::ComplexBall;
use crate::point::EvalPoint;
use crate::Error;

/// Hecke operators with an explicit left-coset decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeckeOperatorId {
    Tp(u64),
    Tp21(u64),
}

impl HeckeOperatorId {
    pub fn tp(p: u64) -> Result<HeckeOperatorId, Error> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(HeckeOperatorId::Tp(p))
    }

    pub fn tp2_1(p: u64) -> Result<HeckeOperatorId, Error> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(HeckeOperatorId::Tp21(p))
    }

    pub fn prime(self) -> u64 {
        match self {
            HeckeOperatorId::Tp(p) | HeckeOperatorId::Tp21(p) => p,
        }
    }

    /// Common similitude `m` of the representatives.
    pub fn similitude(self) -> u64 {
        match self {
            HeckeOperatorId::Tp(p) => p,
            HeckeOperatorId::Tp21(p) => p * p,
        }
    }

    pub fn degree(self) -> u64 {
        let p = self.prime();
        match self {
            HeckeOperatorId::Tp(_) => p * p * p + p * p + p + 1,
            HeckeOperatorId::Tp21(_) => p * p * p * p + p * p * p + p * p + p,
        }
    }

    pub fn reps(self) -> Vec<CosetRep> {
        match self {
            HeckeOperatorId::Tp(p) => tp_reps(p),
            HeckeOperatorId::Tp21(p) => tp2_1_reps(p),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HeckeOperatorId::Tp(_) => "tp",
            HeckeOperatorId::Tp21(_) => "tp2_1",
        }
    }
}

impl fmt::Display for HeckeOperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Which family of the decomposition a representative belongs to, and its
/// parameters in the order they are listed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetLabel {
    pub family: u8,
    pub params: [i64; 3],
}

impl fmt::Display for CosetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "family {} ({}, {}, {})",
            self.family, self.params[0], self.params[1], self.params[2]
        )
    }
}

pub type Matrix4 = [[i64; 4]; 4];

/// A 4x4 integer matrix `M = (A B; C D)` with `M^T J M = lambda J`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CosetRep {
    pub entries: Matrix4,
    pub similitude: i64,
    pub label: CosetLabel,
}

const J: Matrix4 = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]];

pub fn mat_mul(x: &Matrix4, y: &Matrix4) -> Matrix4 {
    let mut out = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    out
}

pub fn transpose(x: &Matrix4) -> Matrix4 {
    let mut out = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = x[j][i];
        }
    }
    out
}

/// `lambda` with `M^T J M = lambda J`, if `M` is a symplectic similitude.
pub fn similitude_of(m: &Matrix4) -> Option<i64> {
    let g = mat_mul(&mat_mul(&transpose(m), &J), m);
    let lambda = g[0][2];
    let expect = J.map(|row| row.map(|v| v * lambda));
    (g == expect).then_some(lambda)
}

fn block(m: &Matrix4, r: usize, c: usize) -> [[i64; 2]; 2] {
    [[m[r][c], m[r][c + 1]], [m[r + 1][c], m[r + 1][c + 1]]]
}

impl CosetRep {
    fn new(entries: Matrix4, similitude: i64, family: u8, params: [i64; 3]) -> CosetRep {
        debug_assert_eq!(similitude_of(&entries), Some(similitude));
        CosetRep {
            entries,
            similitude,
            label: CosetLabel { family, params },
        }
    }

    pub fn a(&self) -> [[i64; 2]; 2] {
        block(&self.entries, 0, 0)
    }

    pub fn b(&self) -> [[i64; 2]; 2] {
        block(&self.entries, 0, 2)
    }

    pub fn c(&self) -> [[i64; 2]; 2] {
        block(&self.entries, 2, 0)
    }

    pub fn d(&self) -> [[i64; 2]; 2] {
        block(&self.entries, 2, 2)
    }

    /// Row-major entries, space separated.
    pub fn row_major(&self) -> alloc::string::String {
        let mut s = alloc::string::String::new();
        for (i, v) in self.entries.iter().flatten().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&alloc::format!("{v}"));
        }
        s
    }

    /// `det(C Z + D)` and `M<Z> = (A Z + B)(C Z + D)^{-1}` on boxes.
    pub fn act_on_point(&self, z: &EvalPoint, prec: u32) -> Result<(EvalPoint, ComplexBall), Error> {
        let w = prec + 16;
        let zm = [[z.z1.clone(), z.z3.clone()], [z.z3.clone(), z.z2.clone()]];
        let lin = |x: [[i64; 2]; 2], y: [[i64; 2]; 2]| -> [[ComplexBall; 2]; 2] {
            // x Z + y
            core::array::from_fn(|i| {
                core::array::from_fn(|j| {
                    let mut acc = ComplexBall::from_i64(y[i][j]);
                    for (k, row) in zm.iter().enumerate() {
                        if x[i][k] != 0 {
                            acc = acc.add(&row[j].mul_int(&BigInt::from(x[i][k]), w), w);
                        }
                    }
                    acc
                })
            })
        };
        let num = lin(self.a(), self.b());
        let den = lin(self.c(), self.d());
        let det = den[0][0].mul(&den[1][1], w).sub(&den[0][1].mul(&den[1][0], w), w);
        if det.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let adj = [
            [den[1][1].clone(), den[0][1].neg()],
            [den[1][0].neg(), den[0][0].clone()],
        ];
        let entry = |i: usize, j: usize| -> Result<ComplexBall, Error> {
            let s = num[i][0].mul(&adj[0][j], w).add(&num[i][1].mul(&adj[1][j], w), w);
            s.div(&det, prec)
        };
        let image = EvalPoint::new(entry(0, 0)?, entry(1, 1)?, entry(0, 1)?, prec)?;
        Ok((image, det.round(prec)))
    }
}

/// The `p^3 + p^2 + p + 1` representatives of `T_p`, in four families.
pub fn tp_reps(p: u64) -> Vec<CosetRep> {
    let p = p as i64;
    let mut out = Vec::new();
    out.push(CosetRep::new(
        [[p, 0, 0, 0], [0, p, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
        p,
        1,
        [0; 3],
    ));
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                out.push(CosetRep::new(
                    [[1, 0, a, b], [0, 1, b, c], [0, 0, p, 0], [0, 0, 0, p]],
                    p,
                    2,
                    [a, b, c],
                ));
            }
        }
    }
    for a in 0..p {
        out.push(CosetRep::new(
            [[0, -p, 0, 0], [1, 0, a, 0], [0, 0, 0, -1], [0, 0, p, 0]],
            p,
            3,
            [a, 0, 0],
        ));
    }
    for a in 0..p {
        for m in 0..p {
            out.push(CosetRep::new(
                [[p, 0, 0, 0], [-m, 1, 0, a], [0, 0, 1, m], [0, 0, 0, p]],
                p,
                4,
                [a, m, 0],
            ));
        }
    }
    out
}

/// The `p^4 + p^3 + p^2 + p` representatives of `T_{p^2,1}`, in five families.
pub fn tp2_1_reps(p: u64) -> Vec<CosetRep> {
    let p = p as i64;
    let q = p * p;
    let mut out = Vec::new();
    for al in 0..p {
        out.push(CosetRep::new(
            [[q, 0, 0, 0], [-p * al, p, 0, 0], [0, 0, 1, al], [0, 0, 0, p]],
            q,
            1,
            [al, 0, 0],
        ));
    }
    out.push(CosetRep::new(
        [[p, 0, 0, 0], [0, q, 0, 0], [0, 0, p, 0], [0, 0, 0, 1]],
        q,
        2,
        [0; 3],
    ));
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                if (a, b, c) == (0, 0, 0) || (a * c - b * b).rem_euclid(p) != 0 {
                    continue;
                }
                out.push(CosetRep::new(
                    [[p, 0, a, b], [0, p, b, c], [0, 0, p, 0], [0, 0, 0, p]],
                    q,
                    3,
                    [a, b, c],
                ));
            }
        }
    }
    for al in 0..p {
        for be in 0..p {
            for cc in 0..q {
                out.push(CosetRep::new(
                    [
                        [p, 0, 0, p * be],
                        [-al, 1, be, al * be + cc],
                        [0, 0, p, p * al],
                        [0, 0, 0, q],
                    ],
                    q,
                    4,
                    [al, be, cc],
                ));
            }
        }
    }
    for be in 0..p {
        for aa in 0..q {
            out.push(CosetRep::new(
                [[1, 0, aa, be], [0, p, p * be, 0], [0, 0, q, 0], [0, 0, 0, p]],
                q,
                5,
                [be, aa, 0],
            ));
        }
    }
    out
}

/// Whether `x` lies in the left coset `Sp4(Z) r`, i.e. `x r^{-1}` is integral.
pub fn same_left_coset(x: &Matrix4, r: &CosetRep) -> bool {
    // lambda r^{-1} = -J r^T J
    let adj = mat_mul(&mat_mul(&J, &transpose(&r.entries)), &J).map(|row| row.map(|v| -v));
    similitude_of(x) == Some(r.similitude)
        && mat_mul(x, &adj)
            .iter()
            .flatten()
            .all(|v| v % r.similitude == 0)
}

/// `(A, -B; -C, D)`: the matrix whose coset gives the complex conjugate
/// summand at a purely imaginary point.
pub fn conjugate_matrix(m: &Matrix4) -> Matrix4 {
    let mut out = *m;
    for i in 0..4 {
        for j in 0..4 {
            if (i < 2) != (j < 2) {
                out[i][j] = -out[i][j];
            }
        }
    }
    out
}

fn partner_label(op: HeckeOperatorId, l: &CosetLabel) -> CosetLabel {
    let p = op.prime() as i64;
    let q = p * p;
    let [x, y, z] = l.params;
    let params = match (op, l.family) {
        (HeckeOperatorId::Tp(_), 2) | (HeckeOperatorId::Tp21(_), 3) => {
            [(-x).rem_euclid(p), (-y).rem_euclid(p), (-z).rem_euclid(p)]
        }
        (HeckeOperatorId::Tp(_), 3) => [(-x).rem_euclid(p), 0, 0],
        (HeckeOperatorId::Tp(_), 4) => [(-x).rem_euclid(p), y, 0],
        (HeckeOperatorId::Tp21(_), 4) => [x, (-y).rem_euclid(p), (-z).rem_euclid(q)],
        (HeckeOperatorId::Tp21(_), 5) => [(-x).rem_euclid(p), (-y).rem_euclid(q), 0],
        _ => l.params,
    };
    CosetLabel {
        family: l.family,
        params,
    }
}

/// For each representative, the index of the representative whose summand
/// is its complex conjugate at purely imaginary points.
pub fn conjugate_partners(op: HeckeOperatorId, reps: &[CosetRep]) -> Vec<usize> {
    let by_label: BTreeMap<CosetLabel, usize> = reps.iter().enumerate().map(|(i, r)| (r.label, i)).collect();
    reps.iter()
        .map(|r| by_label[&partner_label(op, &r.label)])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::Float;
    use num_rational::BigRational;

    const PRIMES: [u64; 4] = [2, 3, 5, 7];

    #[test]
    fn degrees_and_similitudes() {
        for p in PRIMES {
            let tp = tp_reps(p);
            assert_eq!(tp.len() as u64, p * p * p + p * p + p + 1);
            assert!(tp.iter().all(|r| similitude_of(&r.entries) == Some(p as i64)));
            let t21 = tp2_1_reps(p);
            assert_eq!(t21.len() as u64, p.pow(4) + p.pow(3) + p * p + p);
            assert!(t21.iter().all(|r| similitude_of(&r.entries) == Some((p * p) as i64)));
            let fam3 = t21.iter().filter(|r| r.label.family == 3).count() as u64;
            assert_eq!(fam3, p * p - 1);
            for reps in [&tp, &t21] {
                let mut m: alloc::vec::Vec<_> = reps.iter().map(|r| r.entries).collect();
                m.sort();
                m.dedup();
                assert_eq!(m.len(), reps.len());
            }
        }
        let fam3: alloc::vec::Vec<_> = tp2_1_reps(2)
            .into_iter()
            .filter(|r| r.label.family == 3)
            .map(|r| r.label.params)
            .collect();
        assert_eq!(fam3, [[0, 0, 1], [1, 0, 0], [1, 1, 1]]);
    }

    #[test]
    fn cosets_are_pairwise_distinct() {
        for p in [2, 3] {
            for reps in [tp_reps(p), tp2_1_reps(p)] {
                for (i, x) in reps.iter().enumerate() {
                    for (j, y) in reps.iter().enumerate() {
                        assert_eq!(same_left_coset(&x.entries, y), i == j, "{} vs {}", x.label, y.label);
                    }
                }
            }
        }
    }

    #[test]
    fn conjugate_partners_are_in_the_right_coset() {
        for p in [2, 3, 5] {
            for op in [HeckeOperatorId::Tp(p), HeckeOperatorId::Tp21(p)] {
                let reps = op.reps();
                let partners = conjugate_partners(op, &reps);
                for (i, r) in reps.iter().enumerate() {
                    let j = partners[i];
                    assert!(same_left_coset(&conjugate_matrix(&r.entries), &reps[j]), "{}", r.label);
                    assert_eq!(partners[j], i);
                }
            }
        }
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn action_examples() {
        let z = EvalPoint::purely_imaginary(&q(5, 1), &q(6, 1), &q(1, 1), 128).unwrap();
        let p = 3;
        let reps = tp_reps(p);
        // diag(p, p, 1, 1)
        let (w, det) = reps[0].act_on_point(&z, 128).unwrap();
        assert!(w.z1.contains(&Float::zero(), &Float::from_i64(15)));
        assert!(det.contains(&Float::one(), &Float::zero()));
        // (Z + B) / p with B = (1 2; 2 0)
        let r = reps.iter().find(|r| r.label == CosetLabel { family: 2, params: [1, 2, 0] }).unwrap();
        let (w, det) = r.act_on_point(&z, 128).unwrap();
        assert!(det.contains(&Float::from_i64(9), &Float::zero()));
        assert!(w.z1.re.overlaps(&crate::ball::Ball::from_rational(&q(1, 3), 128)));
        assert!(w.z2.re.contains(&Float::zero()));
        assert!(w.z3.re.overlaps(&crate::ball::Ball::from_rational(&q(2, 3), 128)));
        assert!(w.z2.im.overlaps(&crate::ball::Ball::from_rational(&q(2, 1), 128)));
        // diag(1, 1, p, p) as a raw matrix
        let m = CosetRep::new([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 3, 0], [0, 0, 0, 3]], 3, 0, [0; 3]);
        let (w, det) = m.act_on_point(&z, 128).unwrap();
        assert!(det.contains(&Float::from_i64(9), &Float::zero()));
        assert!(w.z1.im.overlaps(&crate::ball::Ball::from_rational(&q(5, 3), 128)));
    }

    #[test]
    fn images_stay_in_the_upper_half_space() {
        let z = EvalPoint::from_y11(&q(27, 10), 128).unwrap();
        for p in [2, 3, 5] {
            for op in [HeckeOperatorId::Tp(p), HeckeOperatorId::Tp21(p)] {
                for r in op.reps() {
                    let (w, _) = r.act_on_point(&z, 128).unwrap();
                    assert!(w.delta(128).unwrap().is_positive());
                }
            }
        }
    }
}
