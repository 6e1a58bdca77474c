//! Hecke eigenvalues as quotients `(F|T)(Z) / F(Z)`.
//!
//! `(F|T)(Z) = sum_M det(C Z + D)^-k F(M<Z>)` over the coset representatives
//! `M = (A B; C D)` of `T`. The raw quotient is the eigenvalue of this
//! unnormalized action; multiplying by `m^(2k-3)`, with `m` the similitude,
//! gives the usual integral normalization.
//!
//! Rigorous mode chooses a truncation per point and generator from the
//! coefficient envelopes and splits the quotient error as follows: with
//! `|y| >= y_lo` and `|x / y| <= z_up`, numerator and denominator errors
//! below `h eps y_lo / 2` and `min((1 - h) eps y_lo / (2 z_up), y_lo / 2)`
//! keep the quotient within `eps`, since `x/y - x_A/y_A = (e_x - e_y z_A) / (y_A + e_y)`.
//! Heuristic mode truncates every generator at trace `2m` and reports
//! rounding error only.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::ball::{Ball, ComplexBall, Consts, Float, Mag};
use crate::bounds::{generator_bound, truncation_bound, truncation_envelope, CoefficientBound};
use crate::cosets::{conjugate_partners, CosetRep, HeckeOperatorId};
use crate::eigenform::EigenformSpec;
use crate::eval::{EvalRequest, Evaluator, NumericSeries};
use crate::exec::Executor;
use crate::generators::{extend_generator, igusa_generator_with, CohenTable, GeneratorId};
use crate::index::FourierIndex;
use crate::point::{parse_decimal, EvalPoint};
use crate::series::TruncatedSeries;
use crate::Error;

/// Supplies exact generator expansions.
pub trait GeneratorSource {
    /// A series for `id` with trace bound at least `t`.
    fn generator(&mut self, id: GeneratorId, t: u32) -> Result<&TruncatedSeries, Error>;
}

/// Builds generators on demand and keeps the largest one of each kind.
#[derive(Default)]
pub struct MemorySource {
    h: CohenTable,
    series: BTreeMap<GeneratorId, TruncatedSeries>,
}

impl MemorySource {
    pub fn new() -> MemorySource {
        MemorySource::default()
    }

    pub fn insert(&mut self, s: TruncatedSeries, id: GeneratorId) {
        let keep = self.series.get(&id).map_or(true, |old| old.trace_bound() < s.trace_bound());
        if keep {
            self.series.insert(id, s);
        }
    }

    pub fn cohen_table(&mut self) -> &mut CohenTable {
        &mut self.h
    }
}

impl GeneratorSource for MemorySource {
    fn generator(&mut self, id: GeneratorId, t: u32) -> Result<&TruncatedSeries, Error> {
        let s = match self.series.get(&id) {
            Some(s) if s.trace_bound() >= t => None,
            Some(s) => Some(extend_generator(s, id, t, &mut self.h)?),
            None => Some(igusa_generator_with(id, t, &mut self.h)?),
        };
        if let Some(s) = s {
            self.series.insert(id, s);
        }
        Ok(&self.series[&id])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Rigorous,
    Heuristic,
}

#[derive(Clone, Debug)]
pub struct EigenvalueOptions {
    /// Target error `10^-digits` on the normalized eigenvalue.
    pub digits: u32,
    pub y11: Option<BigRational>,
    pub mode: Mode,
    /// Starting precision; escalated by doubling.
    pub precision_bits: Option<u32>,
    pub max_precision_bits: u32,
    /// Heuristic-mode generator trace; defaults to `2m`.
    pub trace_bound: Option<u32>,
    /// Evaluate one summand per conjugate pair (purely imaginary `Z` only).
    pub symmetry: bool,
    /// Share `h` of the quotient error given to the numerator.
    pub split: f64,
    /// Refinement depth of the coarse magnitude loop.
    pub max_coarse_depth: u32,
}

impl Default for EigenvalueOptions {
    fn default() -> EigenvalueOptions {
        EigenvalueOptions {
            digits: 5,
            y11: None,
            mode: Mode::Heuristic,
            precision_bits: None,
            max_precision_bits: 8192,
            trace_bound: None,
            symmetry: false,
            split: 0.5,
            max_coarse_depth: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics {
    pub prime: u64,
    pub operator: HeckeOperatorId,
    pub cosets: usize,
    /// Summands actually evaluated (fewer with the symmetry option).
    pub evaluated: usize,
    pub precision_bits: u32,
    pub attempts: u32,
    pub y11: BigRational,
    pub mode: Mode,
    /// Largest and smallest generator trace used over all points.
    pub trace_bound: u32,
    pub min_trace_bound: u32,
    /// Generator traces at the denominator point.
    pub denominator_traces: Vec<u32>,
    pub wall_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenvalueResult {
    pub raw_ratio: ComplexBall,
    pub normalized: ComplexBall,
    pub snapped: Option<BigInt>,
    pub diagnostics: Diagnostics,
}

impl EigenvalueResult {
    /// `prime,operator,cosets,precision_bits,trace_bound,wall_ms`.
    pub fn timing_line(&self) -> String {
        let d = &self.diagnostics;
        format!(
            "{},{},{},{},{},{}",
            d.prime,
            d.operator.name(),
            d.cosets,
            d.precision_bits,
            d.trace_bound,
            d.wall_ms.map_or(String::from("NA"), |w| format!("{w}"))
        )
    }
}

/// Evaluation points and working precisions that worked for `T_p` on the
/// weight-20 form: `(p, y11, bits)`.
const TABLE: [(u64, &str, u32); 12] = [
    (2, "2.7", 37),
    (3, "4.3", 62),
    (5, "6.1", 101),
    (7, "7.5", 130),
    (11, "9.5", 172),
    (13, "10.3", 190),
    (17, "10.9", 208),
    (19, "11.9", 226),
    (23, "12.3", 240),
    (29, "13.5", 267),
    (31, "13.9", 275),
    (37, "14.5", 295),
];

/// Extra bits over the table for the wider boxes of certified arithmetic.
const GUARD_BITS: u32 = 32;

fn ln_fit(value: impl Fn(usize) -> f64) -> (f64, f64) {
    let n = TABLE.len() as f64;
    let xs: Vec<f64> = TABLE.iter().map(|r| libm::log(r.0 as f64)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = (0..TABLE.len()).map(&value).sum::<f64>() / n;
    let sxy: f64 = (0..TABLE.len()).map(|i| (xs[i] - mx) * (value(i) - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Default `y11` for an operator of similitude `m`: the table value when
/// listed, else a fit linear in `log m`, rounded to one decimal.
pub fn default_y11(m: u64) -> BigRational {
    if let Some(r) = TABLE.iter().find(|r| r.0 == m) {
        return parse_decimal(r.1).unwrap_or_else(BigRational::one);
    }
    let (a, b) = ln_fit(|i| parse_decimal(TABLE[i].1).map_or(0.0, |r| rat_to_f64(&r)));
    let y = (a + b * libm::log(m as f64)).max(1.0);
    BigRational::new(BigInt::from(libm::round(y * 10.0) as i64), BigInt::from(10))
}

/// Default starting precision for similitude `m`.
pub fn default_precision(m: u64) -> u32 {
    let bits = match TABLE.iter().find(|r| r.0 == m) {
        Some(r) => r.2,
        None => {
            let (a, b) = ln_fit(|i| TABLE[i].2 as f64);
            libm::ceil(a + b * libm::log(m as f64)).max(32.0) as u32
        }
    };
    bits + GUARD_BITS
}

fn rat_to_f64(r: &BigRational) -> f64 {
    Float::from_rational(r, 64).0.to_f64()
}

/// Upper bound for `|error|` of a box, `sqrt(rad_re^2 + rad_im^2)`.
pub fn abs_radius(b: &ComplexBall) -> Mag {
    let (r, i) = (b.re.rad(), b.im.rad());
    r.mul(r).add(i.mul(i)).sqrt()
}

/// `10^-j`, rounded down.
pub fn ten_pow_neg(j: u32) -> Mag {
    Mag::one().div_down(Mag::from_u64(10).pow(j))
}

fn mid_box(b: &ComplexBall) -> ComplexBall {
    ComplexBall::new(Ball::exact(b.re.mid().clone()), Ball::exact(b.im.mid().clone()))
}

/// Certified bounds `(|x~| - 2 eps, |x~| + 2 eps)` for `|x|`, refining
/// `eps = 0.1, 0.01, ...` until `|x~| > 2 eps`. `eval(eps)` must return a
/// box around `x` with `abs_radius <= eps`; its midpoint is `x~`.
pub fn coarse_magnitude_bounds<F>(mut eval: F, max_depth: u32) -> Result<(Mag, Mag), Error>
where
    F: FnMut(Mag) -> Result<ComplexBall, Error>,
{
    for j in 1..=max_depth {
        let eps = ten_pow_neg(j);
        let b = eval(eps)?;
        if abs_radius(&b) > eps {
            return Err(Error::PrecisionExhausted(format!(
                "coarse estimate wider than 10^-{j}"
            )));
        }
        let m = mid_box(&b);
        let two = eps.mul_2exp(1);
        let lo = m.mag_down().sub_down(two);
        if !lo.is_zero() && m.mag_down() > two {
            return Ok((lo, m.mag_up().add(two)));
        }
    }
    Err(Error::LikelyZero(max_depth))
}

/// Budgets `(eps_x, eps_y)` with `eps_x < h eps y_lo / 2` and
/// `eps_y < min((1 - h) eps y_lo / (2 z_up), y_lo / 2)`.
pub fn quotient_budget(eps: Mag, h: f64, y_lower: Mag, z_upper: Mag) -> (Mag, Mag) {
    let shrink = Mag::from_f64_down(1.0 - 1.0 / (1u64 << 20) as f64);
    let ex = Mag::from_f64_down(h).mul_down(eps).mul_down(y_lower).mul_2exp(-1).mul_down(shrink);
    let ey1 = Mag::from_f64_down(1.0 - h)
        .mul_down(eps)
        .mul_down(y_lower)
        .mul_2exp(-1)
        .div_down(z_upper);
    let ey = ey1.min(y_lower.mul_2exp(-1)).mul_down(shrink);
    (ex, ey)
}

/// Normalized `lambda_{p^2}` from normalized `lambda_p` and `lambda_{p^2,1}`:
/// `lambda_{p^2,0} = p^(2k-6)` and
/// `lambda_{p^2,2} = lambda_p^2 - (p+1) lambda_{p^2,1} - (p^2+1)(p+1) lambda_{p^2,0}`.
pub fn assemble_tp2(lp: &ComplexBall, lp21: &ComplexBall, p: u64, k: u32, prec: u32) -> ComplexBall {
    let p_big = BigInt::from(p);
    let l0 = ComplexBall::real(Ball::from_bigint(&num_traits::pow(p_big, 2 * k as usize - 6), prec));
    let l2 = lp
        .sqr(prec)
        .sub(&lp21.mul_int(&BigInt::from(p + 1), prec), prec)
        .sub(&l0.mul_int(&BigInt::from((p * p + 1) * (p + 1)), prec), prec);
    l0.add(lp21, prec).add(&l2, prec)
}

/// The integer `n` such that `n + 0i` lies in the box, provided the real
/// part has radius below `1/2`.
pub fn snap(b: &ComplexBall) -> Option<BigInt> {
    if !(b.re.rad() < Mag::pow2(-1)) || !b.im.contains_zero() {
        return None;
    }
    let n = b.re.mid().round_nearest();
    b.re.contains(&Float::from_bigint(n.clone())).then_some(n)
}

/// The integer nearest to the real part, provided the box is narrower than
/// `1/2` in both parts and the imaginary part is below `1/2`.
pub fn round_nearest(b: &ComplexBall) -> Option<BigInt> {
    let half = Mag::pow2(-1);
    if !(b.re.rad() < half) || !(b.im.mag_up() < half) {
        return None;
    }
    Some(b.re.mid().round_nearest())
}

/// How to truncate the generator expansions at the Hecke images.
#[derive(Clone, Debug, PartialEq)]
pub enum TracePolicy {
    /// Every generator at this trace, no truncation error added.
    Uniform(u32),
    /// Per point and generator, so that each summand is within `per_summand`.
    Certified { per_summand: Mag },
}

struct Gen {
    id: GeneratorId,
    bound: CoefficientBound,
    // coefficients of trace <= LOW_TRACE, for magnitude estimates
    low: Vec<(FourierIndex, f64)>,
}

const LOW_TRACE: u32 = 4;
const REPLANS: u32 = 4;

struct Job {
    point: EvalPoint,
    traces: Vec<u32>,
}

/// One precision level: embedded coefficients and the shared evaluator.
struct Level {
    prec: u32,
    consts: Consts,
    coeffs: Vec<ComplexBall>,
    ln_coeffs: Vec<f64>,
    eval: Evaluator<NumericSeries>,
}

/// Shared machinery for one eigenform.
pub struct Engine<'a, S: GeneratorSource, E: Executor> {
    spec: &'a EigenformSpec,
    source: &'a mut S,
    exec: &'a E,
    gens: Vec<Gen>,
    level: Option<Level>,
    traces_used: (u32, u32),
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + libm::log(v.iter().map(|x| libm::exp(x - m)).sum::<f64>())
}

impl<'a, S: GeneratorSource, E: Executor> Engine<'a, S, E> {
    pub fn new(spec: &'a EigenformSpec, source: &'a mut S, exec: &'a E) -> Result<Engine<'a, S, E>, Error> {
        spec.validate()?;
        let maxe = spec.max_exponents();
        let mut gens = Vec::new();
        for id in GeneratorId::ALL {
            if maxe[id.slot()] == 0 {
                continue;
            }
            let s = source.generator(id, LOW_TRACE)?;
            let low = s
                .coefficients()
                .iter()
                .filter(|(n, _)| n.trace() <= LOW_TRACE)
                .map(|(n, v)| (*n, rat_to_f64(v).abs()))
                .collect();
            gens.push(Gen {
                id,
                bound: generator_bound(id),
                low,
            });
        }
        Ok(Engine {
            spec,
            source,
            exec,
            gens,
            level: None,
            traces_used: (u32::MAX, 0),
        })
    }

    fn set_precision(&mut self, prec: u32) -> Result<(), Error> {
        if self.level.as_ref().is_some_and(|l| l.prec == prec) {
            return Ok(());
        }
        let coeffs = self.spec.embed(prec)?;
        let ln_coeffs = coeffs
            .iter()
            .map(|c| c.mag_up().log2() * core::f64::consts::LN_2)
            .collect();
        let mut series = Vec::new();
        for g in &self.gens {
            series.push(NumericSeries::from_series(&self.source.generator(g.id, LOW_TRACE)?.truncate(LOW_TRACE), prec));
        }
        self.level = Some(Level {
            prec,
            consts: Consts::new(prec + 32),
            coeffs,
            ln_coeffs,
            eval: Evaluator::new(series, prec),
        });
        Ok(())
    }

    fn level(&self) -> &Level {
        self.level.as_ref().expect("precision set")
    }

    /// Makes every numeric generator available to trace `t[i]`.
    fn ensure_traces(&mut self, t: &[u32]) -> Result<(), Error> {
        let level = self.level.as_mut().expect("precision set");
        for (i, g) in self.gens.iter().enumerate() {
            if level.eval.series(i).trace_bound() >= t[i] {
                continue;
            }
            let s = self.source.generator(g.id, t[i])?;
            let s = if s.trace_bound() > t[i] { s.truncate(t[i]) } else { s.clone() };
            level.eval.replace_series(i, NumericSeries::from_series(&s, level.prec));
        }
        Ok(())
    }

    /// `ln |g_i(P)|` from the low-trace terms.
    fn ln_estimates(&self, p: &EvalPoint) -> Vec<f64> {
        let (y1, y2, y3) = (p.z1.im.to_f64(), p.z2.im.to_f64(), p.z3.im.to_f64());
        let tau = 2.0 * core::f64::consts::PI;
        self.gens
            .iter()
            .map(|g| {
                let terms: Vec<f64> = g
                    .low
                    .iter()
                    .map(|(n, v)| libm::log(*v) - tau * (n.a as f64 * y1 + n.b as f64 * y3 + n.c as f64 * y2))
                    .collect();
                log_sum_exp(&terms)
            })
            .collect()
    }

    /// Generator traces so that `F(P)` is within `exp(ln_target)`, with
    /// `extra[i]` more decimal digits for generator `i`.
    fn plan(&self, p: &EvalPoint, ln_target: f64, extra: &[i32]) -> Result<Vec<u32>, Error> {
        let level = self.level();
        let alpha = p.alpha_lower_f64(&level.consts)?;
        let est = self.ln_estimates(p);
        let n = self.gens.len() as f64;
        let mut out = Vec::with_capacity(self.gens.len());
        for (i, g) in self.gens.iter().enumerate() {
            let slot = g.id.slot();
            let mut parts = Vec::new();
            for (t, lc) in self.spec.terms.iter().zip(&level.ln_coeffs) {
                let e = t.expo[slot];
                if e == 0 {
                    continue;
                }
                let mut v = lc + libm::log(e as f64) + (e as f64 - 1.0) * est[i];
                for (j, h) in self.gens.iter().enumerate() {
                    if j != i {
                        v += t.expo[h.id.slot()] as f64 * est[j];
                    }
                }
                parts.push(v);
            }
            let sens = log_sum_exp(&parts);
            let ln_eta = (ln_target - libm::log(n) - sens - libm::log(4.0)).min(est[i] - libm::log(4.0));
            let h = libm::ceil(-ln_eta / core::f64::consts::LN_10) as i32 + extra[i];
            out.push(truncation_bound(g.bound, alpha, h.max(1)));
        }
        Ok(out)
    }

    fn note_traces(&mut self, t: &[u32]) {
        for &x in t {
            self.traces_used.0 = self.traces_used.0.min(x);
            self.traces_used.1 = self.traces_used.1.max(x);
        }
    }

    /// `F` at each job; with envelopes, also the part of the radius due to
    /// rounding alone.
    fn evaluate_jobs(&mut self, jobs: &[Job], envelopes: bool) -> Result<Vec<(ComplexBall, Mag)>, Error> {
        let mut need = vec![0u32; self.gens.len()];
        for j in jobs {
            for (n, t) in need.iter_mut().zip(&j.traces) {
                *n = (*n).max(*t);
            }
            self.note_traces(&j.traces);
        }
        self.ensure_traces(&need)?;
        let reqs: Vec<EvalRequest> = jobs
            .iter()
            .map(|j| EvalRequest {
                point: j.point.clone(),
                traces: j.traces.clone(),
            })
            .collect();
        let exec = self.exec;
        let level = self.level.as_mut().expect("precision set");
        let values = level.eval.evaluate(&reqs, exec)?;
        let (spec, gens) = (self.spec, &self.gens);
        let level = &*level;
        let items: Vec<(&Job, &Vec<ComplexBall>)> = jobs.iter().zip(&values).collect();
        let out = exec.map(&items, |(job, vals)| -> Result<(ComplexBall, Mag), Error> {
            let mut g: [ComplexBall; 4] = core::array::from_fn(|_| ComplexBall::zero());
            for (gen, v) in gens.iter().zip(vals.iter()) {
                g[gen.id.slot()] = v.clone();
            }
            let plain = spec.evaluate(&level.coeffs, &g, level.prec);
            if !envelopes {
                return Ok((plain.clone(), abs_radius(&plain)));
            }
            let alpha = job.point.alpha(64, &level.consts)?;
            for (gen, t) in gens.iter().zip(&job.traces) {
                let env = truncation_envelope(gen.bound, &alpha, *t, &level.consts)
                    .ok_or_else(|| Error::PrecisionExhausted(format!("trace {t} below the envelope range")))?;
                let s = gen.id.slot();
                g[s] = g[s].add_error(env);
            }
            let full = spec.evaluate(&level.coeffs, &g, level.prec);
            Ok((full, abs_radius(&plain)))
        });
        out.into_iter().collect()
    }

    /// Values of `F` at the points, each within its target (a natural log).
    fn certified_values(&mut self, points: &[EvalPoint], ln_targets: &[f64]) -> Result<Vec<ComplexBall>, Error> {
        let n = self.gens.len();
        let mut extra: Vec<Vec<i32>> = vec![vec![0; n]; points.len()];
        let mut out: Vec<Option<ComplexBall>> = vec![None; points.len()];
        for round in 0..=REPLANS {
            let todo: Vec<usize> = (0..points.len()).filter(|&i| out[i].is_none()).collect();
            if todo.is_empty() {
                break;
            }
            let mut jobs = Vec::with_capacity(todo.len());
            for &i in &todo {
                jobs.push(Job {
                    point: points[i].clone(),
                    traces: self.plan(&points[i], ln_targets[i], &extra[i])?,
                });
            }
            let vals = self.evaluate_jobs(&jobs, true)?;
            for (&i, (v, rounding)) in todo.iter().zip(vals) {
                let ln_rad = abs_radius(&v).log2() * core::f64::consts::LN_2;
                if ln_rad <= ln_targets[i] {
                    out[i] = Some(v);
                    continue;
                }
                let ln_round = rounding.log2() * core::f64::consts::LN_2;
                if ln_round > ln_targets[i] - core::f64::consts::LN_2 || round == REPLANS {
                    return Err(Error::SummandFailed {
                        index: i,
                        reason: format!(
                            "radius e^{ln_rad:.1} exceeds budget e^{:.1} (rounding e^{ln_round:.1})",
                            ln_targets[i]
                        ),
                    });
                }
                let deficit = libm::ceil((ln_rad - ln_targets[i]) / core::f64::consts::LN_10) as i32 + 1;
                for e in extra[i].iter_mut() {
                    *e += deficit;
                }
            }
        }
        Ok(out.into_iter().map(|v| v.unwrap_or_else(ComplexBall::zero)).collect())
    }

    /// Images `M<Z>` with `det(C Z + D)^-k`, for the representatives `which`.
    fn images(&self, z: &EvalPoint, reps: &[CosetRep], which: &[usize]) -> Result<Vec<(EvalPoint, ComplexBall)>, Error> {
        let level = self.level();
        let k = self.spec.weight as i64;
        let items: Vec<usize> = which.to_vec();
        self.exec
            .map(&items, |&i| -> Result<(EvalPoint, ComplexBall), Error> {
                let (p, det) = reps[i].act_on_point(z, level.prec).map_err(|e| Error::SummandFailed {
                    index: i,
                    reason: format!("{e}"),
                })?;
                Ok((p, det.powi(-k, level.prec)?))
            })
            .into_iter()
            .collect()
    }

    /// Representatives to evaluate and, for each, whether its conjugate
    /// partner's summand is added as the complex conjugate.
    fn summand_plan(&self, op: Option<HeckeOperatorId>, reps: &[CosetRep], symmetry: bool) -> Vec<(usize, bool)> {
        match (symmetry, op) {
            (true, Some(op)) => {
                let partners = conjugate_partners(op, reps);
                (0..reps.len())
                    .filter(|&i| partners[i] >= i)
                    .map(|i| (i, partners[i] != i))
                    .collect()
            }
            _ => (0..reps.len()).map(|i| (i, false)).collect(),
        }
    }

    fn sum_summands(&self, plan: &[(usize, bool)], dets: &[ComplexBall], values: &[ComplexBall]) -> ComplexBall {
        let prec = self.level().prec;
        let mut acc = ComplexBall::zero();
        for ((_, paired), (d, v)) in plan.iter().zip(dets.iter().zip(values)) {
            let s = d.mul(v, prec);
            acc = acc.add(&s, prec);
            if *paired {
                acc = acc.add(&s.conj(), prec);
            }
        }
        acc
    }

    /// `(F|T)(Z) = sum det(C Z + D)^-k F(M<Z>)` at precision `prec`.
    pub fn hecke_image(
        &mut self,
        z: &EvalPoint,
        reps: &[CosetRep],
        policy: &TracePolicy,
        prec: u32,
    ) -> Result<ComplexBall, Error> {
        if reps.is_empty() {
            return Err(Error::InvalidArgument("no coset representatives".into()));
        }
        self.set_precision(prec)?;
        let plan = self.summand_plan(None, reps, false);
        self.hecke_sum(z, reps, &plan, policy)
    }

    fn hecke_sum(
        &mut self,
        z: &EvalPoint,
        reps: &[CosetRep],
        plan: &[(usize, bool)],
        policy: &TracePolicy,
    ) -> Result<ComplexBall, Error> {
        let which: Vec<usize> = plan.iter().map(|x| x.0).collect();
        let imgs = self.images(z, reps, &which)?;
        let (points, dets): (Vec<EvalPoint>, Vec<ComplexBall>) = imgs.into_iter().unzip();
        let values = match policy {
            TracePolicy::Uniform(t) => {
                let jobs: Vec<Job> = points
                    .iter()
                    .map(|p| Job {
                        point: p.clone(),
                        traces: vec![*t; self.gens.len()],
                    })
                    .collect();
                self.evaluate_jobs(&jobs, false)?.into_iter().map(|v| v.0).collect()
            }
            TracePolicy::Certified { per_summand } => {
                let ln_share = per_summand.log2() * core::f64::consts::LN_2;
                let k = self.spec.weight as f64;
                // F(P) may be off by share * |det|^k
                let targets: Vec<f64> = dets
                    .iter()
                    .map(|d| ln_share - d.mag_up().log2() * core::f64::consts::LN_2 - libm::log(1.0 + 1e-9) * k)
                    .collect();
                self.certified_values(&points, &targets).map_err(|e| match e {
                    Error::SummandFailed { index, reason } => Error::SummandFailed {
                        index: which[index],
                        reason,
                    },
                    e => e,
                })?
            }
        };
        Ok(self.sum_summands(plan, &dets, &values))
    }

    /// One attempt at a fixed precision.
    fn attempt(
        &mut self,
        op: HeckeOperatorId,
        reps: &[CosetRep],
        y11: &BigRational,
        opts: &EigenvalueOptions,
        prec: u32,
    ) -> Result<(ComplexBall, ComplexBall, Vec<u32>, usize), Error> {
        self.set_precision(prec)?;
        let z = EvalPoint::from_y11(y11, prec)?;
        let k = self.spec.weight;
        let m = op.similitude();
        let norm = if 2 * k >= 3 {
            num_traits::pow(BigInt::from(m), (2 * k - 3) as usize)
        } else {
            BigInt::one()
        };
        let symmetric = opts.symmetry;
        if symmetric {
            let real = self.level().coeffs.iter().all(|c| c.im.is_exact() && c.im.mid().is_zero());
            if !real || !z.is_purely_imaginary() {
                return Err(Error::InvalidArgument("symmetry needs real coefficients and a purely imaginary point".into()));
            }
        }
        let plan = self.summand_plan(Some(op), reps, symmetric);
        let (x, y, dtraces) = match opts.mode {
            Mode::Heuristic => {
                let t = opts.trace_bound.unwrap_or(2 * m as u32);
                let x = self.hecke_sum(&z, reps, &plan, &TracePolicy::Uniform(t))?;
                let job = Job {
                    point: z.clone(),
                    traces: vec![t; self.gens.len()],
                };
                let y = self.evaluate_jobs(&[job], false)?.remove(0).0;
                (x, y, vec![t; self.gens.len()])
            }
            Mode::Rigorous => {
                let (y_lo, _) = coarse_magnitude_bounds(
                    |eps| {
                        let ln = eps.log2() * core::f64::consts::LN_2;
                        Ok(self.certified_values(core::slice::from_ref(&z), &[ln])?.remove(0))
                    },
                    opts.max_coarse_depth,
                )?;
                let eps = Mag::one().div_down(Mag::from_u64(10).pow(opts.digits)).div_down(mag_of_big(&norm));
                let (ex, _) = quotient_budget(eps, opts.split, y_lo, Mag::one());
                let share = ex.div_down(Mag::from_u64(reps.len() as u64));
                let x = self.hecke_sum(&z, reps, &plan, &TracePolicy::Certified { per_summand: share })?;
                if abs_radius(&x) > ex {
                    return Err(Error::PrecisionExhausted(format!(
                        "numerator radius 2^{:.1} above budget 2^{:.1}",
                        abs_radius(&x).log2(),
                        ex.log2()
                    )));
                }
                let z_up = x.mag_up().div(y_lo);
                let (_, ey) = quotient_budget(eps, opts.split, y_lo, z_up);
                let ln = ey.log2() * core::f64::consts::LN_2;
                let traces = self.plan(&z, ln, &vec![0; self.gens.len()])?;
                let y = self.certified_values(core::slice::from_ref(&z), &[ln])?.remove(0);
                if abs_radius(&y) > ey {
                    return Err(Error::PrecisionExhausted("denominator above budget".into()));
                }
                (x, y, traces)
            }
        };
        let raw = match x.div(&y, prec) {
            Ok(r) => r,
            Err(_) => return Err(Error::DenominatorContainsZero),
        };
        let normalized = raw.mul_int(&norm, prec);
        Ok((raw, normalized, dtraces, plan.len()))
    }

    /// Eigenvalue of the form under `op`, escalating precision until the
    /// normalized box is within `10^-digits`.
    pub fn eigenvalue(&mut self, op: HeckeOperatorId, opts: &EigenvalueOptions) -> Result<EigenvalueResult, Error> {
        if !(opts.split > 0.0 && opts.split < 1.0) {
            return Err(Error::InvalidArgument("split must lie in (0, 1)".into()));
        }
        let reps = op.reps();
        let m = op.similitude();
        let y11 = opts.y11.clone().unwrap_or_else(|| default_y11(m));
        let mut prec = opts.precision_bits.unwrap_or_else(|| default_precision(m));
        let tol = ten_pow_neg(opts.digits);
        let mut attempts = 0;
        loop {
            attempts += 1;
            self.traces_used = (u32::MAX, 0);
            let outcome = self.attempt(op, &reps, &y11, opts, prec);
            let retry = match outcome {
                Ok((raw, normalized, dtraces, evaluated)) => {
                    if abs_radius(&normalized) <= tol {
                        // heuristic boxes omit truncation error
                        let snapped = match opts.mode {
                            Mode::Rigorous => snap(&normalized),
                            Mode::Heuristic => round_nearest(&normalized),
                        };
                        return Ok(EigenvalueResult {
                            raw_ratio: raw,
                            normalized,
                            snapped,
                            diagnostics: Diagnostics {
                                prime: op.prime(),
                                operator: op,
                                cosets: reps.len(),
                                evaluated,
                                precision_bits: prec,
                                attempts,
                                y11: y11.clone(),
                                mode: opts.mode,
                                trace_bound: self.traces_used.1,
                                min_trace_bound: self.traces_used.0,
                                denominator_traces: dtraces,
                                wall_ms: None,
                            },
                        });
                    }
                    Error::PrecisionExhausted(format!("normalized radius 2^{:.1}", abs_radius(&normalized).log2()))
                }
                Err(e @ (Error::PrecisionExhausted(_) | Error::SummandFailed { .. } | Error::DenominatorContainsZero)) => e,
                Err(e) => return Err(e),
            };
            if prec.saturating_mul(2) > opts.max_precision_bits {
                return Err(match retry {
                    Error::DenominatorContainsZero => Error::DenominatorContainsZero,
                    _ => Error::PrecisionCeiling(opts.max_precision_bits),
                });
            }
            prec *= 2;
        }
    }
}

fn mag_of_big(n: &BigInt) -> Mag {
    Float::from_bigint(n.clone()).mag_up()
}

/// `(F|T)(Z)` for an eigenform evaluator built from `spec`.
pub fn hecke_image_at<S: GeneratorSource, E: Executor>(
    spec: &EigenformSpec,
    z: &EvalPoint,
    reps: &[CosetRep],
    policy: &TracePolicy,
    prec: u32,
    source: &mut S,
    exec: &E,
) -> Result<ComplexBall, Error> {
    Engine::new(spec, source, exec)?.hecke_image(z, reps, policy, prec)
}

/// Eigenvalue of `spec` under `op` with an in-memory generator source.
pub fn eigenvalue<E: Executor>(
    spec: &EigenformSpec,
    op: HeckeOperatorId,
    opts: &EigenvalueOptions,
    exec: &E,
) -> Result<EigenvalueResult, Error> {
    let mut src = MemorySource::new();
    Engine::new(spec, &mut src, exec)?.eigenvalue(op, opts)
}

/// Whether two eigenvalue boxes share a point.
pub fn consistent(a: &EigenvalueResult, b: &EigenvalueResult) -> bool {
    a.normalized.overlaps(&b.normalized)
}
