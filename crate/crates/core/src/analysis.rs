//! Integrals, jumps, collisions, increments and digit statistics of `f`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::numerals::{same_base, DigitExpansion};
use crate::rational::{ln_abs, to_f64, Rational};
use crate::salem::SalemSystem;
use crate::sample::DigitSampler;
use crate::{Error, Result};

/// Lebesgue integral of `f` over `[0, 1]`.
///
/// Splitting `[0, 1]` into the first-rank cylinders and applying
/// `f(x) = β_{θ(t)} + p_{θ(t)} f(σx)` on each gives
/// `I = Σ_t p_t β_{θ(t)} + I Σ_t p_t p_{θ(t)}`.
pub fn integral_closed_form(sys: &SalemSystem) -> Rational {
    let (num, overlap) = first_rank_moments(sys);
    num / (Rational::one() - overlap)
}

/// `(Σ_t p_t β_{θ(t)}, Σ_t p_t p_{θ(t)})`.
fn first_rank_moments(sys: &SalemSystem) -> (Rational, Rational) {
    let mut num = Rational::zero();
    let mut overlap = Rational::zero();
    for t in 0..sys.q() as u8 {
        let p = sys.params().weight(t);
        num += p * sys.image_offset(t);
        overlap += p * sys.image_weight(t);
    }
    (num, overlap)
}

/// Largest number of cylinders a uniform bracket will enumerate.
pub const MAX_BRACKET_CYLINDERS: u64 = 4_782_969; // 3^14

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralBracket {
    pub lower: Rational,
    pub upper: Rational,
    pub rank: usize,
    pub cylinders: u64,
}

impl IntegralBracket {
    pub fn gap(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, value: &Rational) -> bool {
        self.lower <= *value && *value <= self.upper
    }
}

fn cylinder_count(q: usize, rank: usize) -> Result<u64> {
    let limit = MAX_BRACKET_CYLINDERS;
    let count = (q as u64).checked_pow(rank as u32).filter(|&c| c <= limit);
    count.ok_or_else(|| {
        let mut best = 0;
        while (q as u64).pow(best as u32 + 1) <= limit {
            best += 1;
        }
        Error::ResourceLimit {
            what: format!("{q}^{rank} cylinders exceeds {limit}"),
            achievable: format!("rank {best}"),
        }
    })
}

/// Riemann-type bounds over the rank-`rank` cylinders using the values of
/// `f` at each cylinder's two endpoint spellings, `c(θ(0))` and
/// `c(θ(q-1))`.
///
/// Each cylinder contributes `|Λ_c| · min` and `|Λ_c| · max` of those two
/// values, so `upper - lower = |K_θ| (Σ_t p_t p_{θ(t)})^rank` exactly. The
/// bracket encloses the integral iff the integral lies between `f` of the
/// constant streams `(θ(0))` and `(θ(q-1))`; see [`integral_enclosure`] for
/// an unconditional bound.
pub fn integral_bracket(sys: &SalemSystem, rank: usize) -> Result<IntegralBracket> {
    let top = (sys.q() - 1) as u8;
    let params = sys.params();
    let start = params.constant_stream_value(sys.perm().apply(0));
    let end = params.constant_stream_value(sys.perm().apply(top));
    let (lo, hi) = if start <= end {
        (start, end)
    } else {
        (end, start)
    };
    riemann_sums(sys, rank, &lo, &hi)
}

/// Certified enclosure using only `0 ≤ f ≤ 1` on every cylinder; the gap is
/// `(Σ_t p_t p_{θ(t)})^rank`.
pub fn integral_enclosure(sys: &SalemSystem, rank: usize) -> Result<IntegralBracket> {
    riemann_sums(sys, rank, &Rational::zero(), &Rational::one())
}

/// `|K_θ| (Σ_t p_t p_{θ(t)})^rank`.
pub fn predicted_bracket_gap(sys: &SalemSystem, rank: usize) -> Rational {
    let (_, overlap) = first_rank_moments(sys);
    sys.increment_constant().abs() * num_traits::pow(overlap, rank)
}

/// Sums `|Λ_c| (A_c + P_c·lo)` and `|Λ_c| (A_c + P_c·hi)` over every rank-`rank`
/// cylinder `c`, where `f(Λ_c) = A_c + P_c·f([0,1])`.
fn riemann_sums(
    sys: &SalemSystem,
    rank: usize,
    lo: &Rational,
    hi: &Rational,
) -> Result<IntegralBracket> {
    let cylinders = cylinder_count(sys.q(), rank)?;
    let (offset_sum, scale_sum, denom) = match IntNode::weights(sys, rank) {
        Some(w) => w.sums(sys.q(), rank),
        None => rational_sums(sys, rank),
    };
    Ok(IntegralBracket {
        lower: (&offset_sum + &scale_sum * lo) / &denom,
        upper: (&offset_sum + &scale_sum * hi) / &denom,
        rank,
        cylinders,
    })
}

/// Weights over a common denominator `D`, used when every sum over rank-`m`
/// cylinders is an integer multiple of `D^{-2m}` below `2^128`.
struct IntNode {
    own: Vec<u128>,
    image: Vec<u128>,
    image_offset: Vec<u128>,
    d: u128,
}

impl IntNode {
    fn weights(sys: &SalemSystem, rank: usize) -> Option<Self> {
        let q = sys.q() as u8;
        let d = sys
            .params()
            .weights()
            .iter()
            .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let d = u128::try_from(d).ok()?;
        d.checked_pow(2 * rank as u32)?
            .checked_mul(sys.q() as u128)?;
        let scaled =
            |r: &Rational| u128::try_from((r * Rational::from_integer(d.into())).to_integer()).ok();
        Some(IntNode {
            own: (0..q)
                .map(|t| scaled(sys.params().weight(t)))
                .collect::<Option<_>>()?,
            image: (0..q)
                .map(|t| scaled(sys.image_weight(t)))
                .collect::<Option<_>>()?,
            image_offset: (0..q)
                .map(|t| scaled(sys.image_offset(t)))
                .collect::<Option<_>>()?,
            d,
        })
    }

    /// `(Σ N_c a_c, Σ N_c M_c, D^{2m})` where `|Λ_c| = N_c D^{-m}`,
    /// `A_c = a_c D^{-m}` and `P_c = M_c D^{-m}`.
    fn sums(&self, q: usize, rank: usize) -> (Rational, Rational, Rational) {
        // fan out over a few leading digits, then walk each subtree depth-first
        let split = rank.min(3);
        let heads: Vec<Vec<u8>> = words(q, split).collect();
        let (sa, sm) = heads
            .par_iter()
            .map(|head| {
                let mut node = (1u128, 0u128, 1u128);
                for &t in head {
                    node = self.child(node, t);
                }
                let mut acc = (0u128, 0u128);
                self.walk(node, rank - split, &mut acc);
                acc
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let big = |v: u128| Rational::from_integer(BigInt::from(v));
        (big(sa), big(sm), big(self.d.pow(2 * rank as u32)))
    }

    fn child(&self, (n, a, m): (u128, u128, u128), t: u8) -> (u128, u128, u128) {
        let t = t as usize;
        (
            n * self.own[t],
            a * self.d + m * self.image_offset[t],
            m * self.image[t],
        )
    }

    fn walk(&self, node: (u128, u128, u128), remaining: usize, acc: &mut (u128, u128)) {
        if remaining == 0 {
            acc.0 += node.0 * node.1;
            acc.1 += node.0 * node.2;
            return;
        }
        for t in 0..self.own.len() as u8 {
            self.walk(self.child(node, t), remaining - 1, acc);
        }
    }
}

fn rational_sums(sys: &SalemSystem, rank: usize) -> (Rational, Rational, Rational) {
    let split = rank.min(3);
    let heads: Vec<Vec<u8>> = words(sys.q(), split).collect();
    let (sa, sm) = heads
        .par_iter()
        .map(|head| {
            let mut node = Node::root();
            for &d in head {
                node = node.child(sys, d);
            }
            let mut acc = (Rational::zero(), Rational::zero());
            walk(sys, &node, rank - split, &mut acc);
            acc
        })
        .reduce(
            || (Rational::zero(), Rational::zero()),
            |a, b| (a.0 + b.0, a.1 + b.1),
        );
    (sa, sm, Rational::one())
}

struct Node {
    length: Rational,
    image_offset: Rational,
    image_scale: Rational,
}

impl Node {
    fn root() -> Self {
        Node {
            length: Rational::one(),
            image_offset: Rational::zero(),
            image_scale: Rational::one(),
        }
    }

    fn child(&self, sys: &SalemSystem, d: u8) -> Self {
        Node {
            length: &self.length * sys.params().weight(d),
            image_offset: &self.image_offset + &self.image_scale * sys.image_offset(d),
            image_scale: &self.image_scale * sys.image_weight(d),
        }
    }
}

fn walk(sys: &SalemSystem, node: &Node, remaining: usize, acc: &mut (Rational, Rational)) {
    if remaining == 0 {
        acc.0 += &node.length * &node.image_offset;
        acc.1 += &node.length * &node.image_scale;
        return;
    }
    for d in 0..sys.q() as u8 {
        walk(sys, &node.child(sys, d), remaining - 1, acc);
    }
}

/// Samples per independent random stream in the Monte Carlo routines.
pub const MC_BATCH: u64 = 8192;

/// Evaluation tolerance on the dropped tail `Π p_{θ(i_r)}`.
pub const MC_TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Mean of `f` at `n` Lebesgue-uniform points.
///
/// Batch `i` of [`MC_BATCH`] samples draws from ChaCha stream `i` of `seed`
/// and batches are merged in index order, so the result does not depend on
/// the thread count.
pub fn integral_monte_carlo(sys: &SalemSystem, n: u64, seed: u64) -> MonteCarloEstimate {
    let float = sys.float();
    let sampler = DigitSampler::new(sys.params());
    let batches = n.div_ceil(MC_BATCH);
    let stats: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let size = MC_BATCH.min(n - b * MC_BATCH);
            let mut m = Moments::default();
            for _ in 0..size {
                m.push(float.eval_digits(|| sampler.draw(&mut rng), MC_TAIL_TOLERANCE));
            }
            m
        })
        .collect();
    let total = stats.into_iter().fold(Moments::default(), Moments::merge);
    let std_error = if total.count > 1 {
        (total.m2 / (total.count - 1) as f64 / total.count as f64).sqrt()
    } else {
        0.0
    };
    MonteCarloEstimate {
        estimate: total.mean,
        std_error,
        samples: total.count,
    }
}

/// Running mean and sum of squared deviations (Welford / Chan).
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }
}

fn check_digits(q: usize, digits: &[u8]) -> Result<()> {
    DigitExpansion::from_raw(q, digits.to_vec(), Vec::new()).map(|_| ())
}

/// `μ_f(Λ_c) = f(sup Λ_c) - f(inf Λ_c)` with the supremum read through its
/// `(q-1)` spelling, i.e. `K_θ Π p_{θ(c_r)}`. Negative when `θ` reverses
/// the orientation of the cylinder.
pub fn cylinder_increment(base: &[u8], sys: &SalemSystem) -> Result<Rational> {
    check_digits(sys.q(), base)?;
    Ok(sys.increment_constant() * sys.image_word(base).scale)
}

/// `μ_f(Λ_c) / |Λ_c| = K_θ Π p_{θ(c_r)} / p_{c_r}`.
pub fn derivative_ratio(base: &[u8], sys: &SalemSystem) -> Result<Rational> {
    check_digits(sys.q(), base)?;
    Ok(sys.increment_constant() * ratio_product(base, sys))
}

/// `Π_r p_{θ(c_r)} / p_{c_r}`, accumulated over integers with a single
/// reduction at the end.
pub fn ratio_product(digits: &[u8], sys: &SalemSystem) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for &d in digits {
        let image = sys.image_weight(d);
        let own = sys.params().weight(d);
        if sys.perm().apply(d) == d {
            continue;
        }
        num *= image.numer() * own.denom();
        den *= image.denom() * own.numer();
    }
    Rational::new(num, den)
}

/// One-sided limits of `f` at a point with two spellings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JumpReport {
    pub point: DigitExpansion,
    pub left_limit: Rational,
    pub right_limit: Rational,
    /// `right_limit - left_limit`.
    pub jump: Rational,
}

/// For `x0 = c i (0) = c [i-1] (q-1)` the left limit is the value of
/// `θ(c) θ(i-1) (θ(q-1))` and the right limit is `f(x0)`, the value of
/// `θ(c) θ(i) (θ(0))`.
pub fn jump_at(x0: &DigitExpansion, sys: &SalemSystem) -> Result<JumpReport> {
    same_base(sys.q(), x0.q())?;
    let point = x0.canonicalize();
    if !point.is_p_rational() || point.is_one() {
        return Err(Error::Domain(format!(
            "{point} does not have two spellings; f is continuous there"
        )));
    }
    let top = (sys.q() - 1) as u8;
    let mut left_prefix = point.prefix().to_vec();
    *left_prefix.last_mut().unwrap() -= 1;
    let left_limit = sys.image_stream_value(&left_prefix, &[top]);
    let right_limit = sys.image_stream_value(point.prefix(), &[0]);
    Ok(JumpReport {
        jump: &right_limit - &left_limit,
        point,
        left_limit,
        right_limit,
    })
}

/// Points approaching `x0` from the left and from the right, agreeing with
/// the respective spelling of `x0` on its first `len + depth` digits.
pub fn one_sided_approximants(
    x0: &DigitExpansion,
    depth: usize,
) -> Result<(DigitExpansion, DigitExpansion)> {
    let point = x0.canonicalize();
    if !point.is_p_rational() || point.is_one() {
        return Err(Error::Domain(format!(
            "{point} does not have two spellings"
        )));
    }
    let q = point.q();
    let top = (q - 1) as u8;
    let mut left = point.prefix().to_vec();
    *left.last_mut().unwrap() -= 1;
    left.extend(std::iter::repeat_n(top, depth));
    let mut right = point.prefix().to_vec();
    right.extend(std::iter::repeat_n(0, depth));
    right.push(1);
    Ok((
        DigitExpansion::terminating(q, left)?,
        DigitExpansion::terminating(q, right)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollisionFamily {
    /// `c 2 (0)` and `c 0 (1)`.
    G1,
    /// `c 1 (0)` and `c 2 (1)`.
    G2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub x1: DigitExpansion,
    pub x2: DigitExpansion,
    pub fx: Rational,
}

/// Two distinct ternary points with the same image. The families are the
/// ones on which `θ_2` glues a `(0)` tail to a `(2)` tail.
pub fn collision_pair(
    prefix: &[u8],
    family: CollisionFamily,
    sys: &SalemSystem,
) -> Result<Collision> {
    if sys.q() != 3 {
        return Err(Error::Domain(
            "collision families are defined for q = 3".into(),
        ));
    }
    let spell = |digit: u8, tail: &[u8]| {
        let mut p = prefix.to_vec();
        p.push(digit);
        DigitExpansion::new(3, p, tail.to_vec())
    };
    let (x1, x2) = match family {
        CollisionFamily::G1 => (spell(2, &[])?, spell(0, &[1])?),
        CollisionFamily::G2 => (spell(1, &[])?, spell(2, &[1])?),
    };
    let f1 = sys.eval(&x1)?;
    let f2 = sys.eval(&x2)?;
    if f1 != f2 {
        return Err(Error::Domain(format!(
            "f({x1}) = {f1} differs from f({x2}) = {f2} under θ = {}",
            sys.perm()
        )));
    }
    Ok(Collision { x1, x2, fx: f1 })
}

/// `x1 < x2` with `f(x1) > f(x2)`, found among the points `c(0)` with `c`
/// of length 1, then 2, then 3. `None` when `f` is increasing there.
pub fn monotonicity_witness(sys: &SalemSystem) -> Result<Option<(DigitExpansion, DigitExpansion)>> {
    let q = sys.q();
    for len in 1..=3usize {
        // words of a fixed length in lexicographic order are increasing in
        // value, and the point 1 comes last
        let mut points = words(q, len)
            .map(|w| DigitExpansion::terminating(q, w))
            .collect::<Result<Vec<_>>>()?;
        points.push(DigitExpansion::one(q));
        let values = points
            .iter()
            .map(|e| sys.eval(e))
            .collect::<Result<Vec<_>>>()?;
        if let Some(i) = (0..points.len() - 1).find(|&i| values[i] > values[i + 1]) {
            return Ok(Some((points[i].clone(), points[i + 1].clone())));
        }
    }
    Ok(None)
}

/// One term of a difference-quotient sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientRow {
    pub n0: usize,
    /// Digit `i` of `x0` at position `n0` that was replaced by `j`.
    pub replaced: u8,
    /// `(f(x_n) - f(x0)) / (x_n - x0)`.
    pub quotient: Rational,
    /// `(β_{θj} - β_{θi} + (p_{θj} - p_{θi}) f(σ^{n0}x)) / (β_j - β_i + (p_j - p_i) σ^{n0}x)`.
    pub bounded_factor: Rational,
    /// `Π_{r<n0} p_{θ(c_r)} / p_{c_r}`.
    pub running_product: Rational,
}

impl QuotientRow {
    pub fn log_abs(&self) -> f64 {
        ln_abs(&self.quotient)
    }

    pub fn factorization_holds(&self) -> bool {
        self.quotient == &self.bounded_factor * &self.running_product
    }
}

/// Replaces digit `n0` of `x0` by `j` for `n0 = 1..=n0_max` and returns the
/// exact difference quotients. Positions where the digit already is `j` are
/// skipped. Values are taken on the streams as spelled.
pub fn difference_quotient_trace(
    x0: &DigitExpansion,
    n0_max: usize,
    j: u8,
    sys: &SalemSystem,
) -> Result<Vec<QuotientRow>> {
    same_base(sys.q(), x0.q())?;
    if j as usize >= sys.q() {
        return Err(Error::MalformedDigit {
            ch: char::from_digit(j as u32, 36).unwrap_or('?'),
            pos: 0,
            q: sys.q(),
        });
    }
    let params = sys.params();
    let tail_of = |e: &DigitExpansion| {
        if e.period().is_empty() {
            vec![0]
        } else {
            e.period().to_vec()
        }
    };
    let x_value = params.stream_value(x0.prefix(), &tail_of(x0));
    let f_value = sys.image_stream_value(x0.prefix(), &tail_of(x0));
    let mut rows = Vec::new();
    for n0 in 1..=n0_max {
        let i = x0.digit(n0 - 1);
        if i == j {
            continue;
        }
        let rest = x0.shift(n0);
        let mut head: Vec<u8> = x0.digits().take(n0).collect();
        head[n0 - 1] = j;
        head.extend_from_slice(rest.prefix());
        let xn = params.stream_value(&head, &tail_of(&rest));
        let fxn = sys.image_stream_value(&head, &tail_of(&rest));
        let dx = &xn - &x_value;
        if dx.is_zero() {
            continue;
        }
        let quotient = (&fxn - &f_value) / dx;
        let sigma_x = params.stream_value(rest.prefix(), &tail_of(&rest));
        let sigma_f = sys.image_stream_value(rest.prefix(), &tail_of(&rest));
        let top = sys.image_offset(j) - sys.image_offset(i)
            + (sys.image_weight(j) - sys.image_weight(i)) * sigma_f;
        let bottom =
            params.offset(j) - params.offset(i) + (params.weight(j) - params.weight(i)) * sigma_x;
        let prior: Vec<u8> = x0.digits().take(n0 - 1).collect();
        rows.push(QuotientRow {
            n0,
            replaced: i,
            quotient,
            bounded_factor: top / bottom,
            running_product: ratio_product(&prior, sys),
        });
    }
    Ok(rows)
}

/// Digit counts `N_s(x, k)` over a finite stream.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyReport {
    pub k: usize,
    pub counts: Vec<u64>,
    /// `Σ_r ln(p_{θ(c_r)} / p_{c_r})`.
    pub log_ratio: f64,
}

impl FrequencyReport {
    pub fn frequency(&self, s: u8) -> Rational {
        Rational::new(
            BigInt::from(self.counts[s as usize]),
            BigInt::from(self.k.max(1) as u64),
        )
    }
}

pub fn digit_frequency(digits: &[u8], sys: &SalemSystem) -> Result<FrequencyReport> {
    check_digits(sys.q(), digits)?;
    let mut counts = vec![0u64; sys.q()];
    for &d in digits {
        counts[d as usize] += 1;
    }
    let log_ratio = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(s, &n)| n as f64 * digit_log_ratio(sys, s as u8))
        .sum();
    Ok(FrequencyReport {
        k: digits.len(),
        counts,
        log_ratio,
    })
}

fn digit_log_ratio(sys: &SalemSystem, s: u8) -> f64 {
    ln_abs(sys.image_weight(s)) - ln_abs(sys.params().weight(s))
}

/// Almost-sure per-digit decay rate of `Π p_{θ(c_r)} / p_{c_r}` at a
/// Lebesgue-random point: `Σ_t p_t ln(p_{θ(t)} / p_t) ≤ 0`.
pub fn expected_log_slope(sys: &SalemSystem) -> f64 {
    (0..sys.q() as u8)
        .map(|t| to_f64(sys.params().weight(t)) * digit_log_ratio(sys, t))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogSlopeSample {
    /// Mean over streams of `ln|derivative_ratio| / len`.
    pub mean: f64,
    pub std_error: f64,
    pub expected: f64,
    pub streams: usize,
}

/// Draws `streams` Lebesgue-random digit streams of length `len` (stream `i`
/// from ChaCha stream `i` of `seed`) and averages the per-digit log of the
/// exact cylinder derivative ratio.
pub fn sampled_log_slope(
    sys: &SalemSystem,
    streams: usize,
    len: usize,
    seed: u64,
) -> LogSlopeSample {
    let sampler = DigitSampler::new(sys.params());
    let slopes: Vec<f64> = (0..streams as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let digits = sampler.stream(&mut rng, len);
            let ratio = derivative_ratio(&digits, sys).expect("sampled digits are valid");
            ln_abs(&ratio) / len.max(1) as f64
        })
        .collect();
    let n = slopes.len().max(1) as f64;
    let mean = slopes.iter().sum::<f64>() / n;
    let var = if slopes.len() > 1 {
        slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    LogSlopeSample {
        mean,
        std_error: (var / n).sqrt(),
        expected: expected_log_slope(sys),
        streams,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixedPointScan {
    /// `θ` is the identity, so every point is fixed.
    Identity,
    Points(Vec<DigitExpansion>),
}

/// Every canonical expansion with `prefix + period` length at most
/// `max_len` satisfying `f(x) = x`, in increasing order.
pub fn fixed_point_scan(sys: &SalemSystem, max_len: usize) -> Result<FixedPointScan> {
    if sys.perm().is_identity() {
        return Ok(FixedPointScan::Identity);
    }
    let q = sys.q();
    let mut candidates = std::collections::HashSet::new();
    for total in 0..=max_len {
        for period_len in 0..=total {
            let prefix_len = total - period_len;
            for word in words(q, total) {
                let e = DigitExpansion::new(
                    q,
                    word[..prefix_len].to_vec(),
                    word[prefix_len..].to_vec(),
                )?;
                candidates.insert(e);
            }
        }
    }
    let params = sys.params();
    let mut fixed: Vec<(Rational, DigitExpansion)> = candidates
        .into_par_iter()
        .filter_map(|e| {
            let x = params.stream_value(e.prefix(), e.period());
            let fx = sys.eval(&e).ok()?;
            (x == fx).then_some((x, e))
        })
        .collect();
    fixed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(FixedPointScan::Points(
        fixed.into_iter().map(|(_, e)| e).collect(),
    ))
}

/// All digit words of length `len` in lexicographic order.
pub fn words(q: usize, len: usize) -> impl Iterator<Item = Vec<u8>> {
    let count = (q as u64).pow(len as u32);
    (0..count).map(move |mut i| {
        let mut word = vec![0u8; len];
        for slot in word.iter_mut().rev() {
            *slot = (i % q as u64) as u8;
            i /= q as u64;
        }
        word
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerals::{parse_expansion, PartitionParams};
    use crate::rational::{frac, int};

    fn sys(p: &str, m: usize) -> SalemSystem {
        SalemSystem::ternary(PartitionParams::parse(p).unwrap(), m).unwrap()
    }

    fn ex(text: &str) -> DigitExpansion {
        parse_expansion(text, 3).unwrap()
    }

    /// The integral formula as printed for θ_2.
    fn printed_theta2_integral(p: &PartitionParams) -> Rational {
        let (p0, p1, p2) = (p.weight(0), p.weight(1), p.weight(2));
        let num = p1 * p1 + p0 * p1 + p0 * p2;
        let den = int(1) - p0 * p0 - int(2) * p1 * p2;
        num / den
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(integral_closed_form(&sys("1/3,1/3,1/3", 2)), frac(1, 2));
        assert_eq!(integral_closed_form(&sys("1/2,1/3,1/6", 2)), frac(13, 23));
        assert_eq!(integral_closed_form(&sys("1/2,1/4,1/4", 1)), frac(1, 2));
        assert_eq!(integral_closed_form(&sys("1/2,1/4,1/4", 2)), frac(1, 2));
        let s = sys("2/7,3/7,2/7", 2);
        assert_eq!(
            integral_closed_form(&s),
            printed_theta2_integral(s.params())
        );
    }

    #[test]
    fn integer_and_rational_sums_agree() {
        for (p, m) in [("1/2,1/3,1/6", 2), ("1/10,1/10,4/5", 5), ("2/7,3/7,2/7", 4)] {
            let sys = SalemSystem::ternary(PartitionParams::parse(p).unwrap(), m).unwrap();
            let (a, b, d) = IntNode::weights(&sys, 5).unwrap().sums(3, 5);
            let (ra, rb, rd) = rational_sums(&sys, 5);
            assert_eq!((a / &d, b / &d), (ra / &rd, rb / &rd));
        }
        // D = 2^40 overflows the integer path and takes the rational one
        let p = "1/1099511627776,1/1099511627776,549755813887/549755813888";
        let sys = SalemSystem::ternary(PartitionParams::parse(p).unwrap(), 2).unwrap();
        assert!(IntNode::weights(&sys, 2).is_none());
        let b = integral_enclosure(&sys, 2).unwrap();
        assert!(b.contains(&integral_closed_form(&sys)));
        assert_eq!(
            b.gap(),
            predicted_bracket_gap(&sys, 2) / sys.increment_constant().abs()
        );
    }

    #[test]
    fn bracket_small_ranks() {
        let s = sys("1/3,1/3,1/3", 2);
        let b = integral_bracket(&s, 1).unwrap();
        assert_eq!(b.gap(), frac(1, 2) * frac(1, 3));
        assert_eq!(b.gap(), predicted_bracket_gap(&s, 1));
        assert!(b.contains(&frac(1, 2)));
        let s = sys("1/2,1/3,1/6", 2);
        for rank in 0..6 {
            let b = integral_bracket(&s, rank).unwrap();
            assert_eq!(b.gap(), predicted_bracket_gap(&s, rank));
            assert!(b.contains(&frac(13, 23)));
            let e = integral_enclosure(&s, rank).unwrap();
            assert!(e.contains(&frac(13, 23)));
            assert_eq!(e.gap(), num_traits::pow(frac(13, 36), rank));
        }
    }

    #[test]
    fn bracket_rank_limit() {
        let err = integral_bracket(&sys("1/3,1/3,1/3", 2), 15).unwrap_err();
        match err {
            Error::ResourceLimit { achievable, .. } => assert_eq!(achievable, "rank 14"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn monte_carlo_single_sample() {
        let s = sys("1/2,1/4,1/4", 2);
        let m = integral_monte_carlo(&s, 1, 7);
        assert_eq!(m.samples, 1);
        assert_eq!(m.std_error, 0.0);
        assert!((0.0..=1.0).contains(&m.estimate));
        assert_eq!(
            integral_monte_carlo(&s, 20_000, 3),
            integral_monte_carlo(&s, 20_000, 3)
        );
    }

    #[test]
    fn increment_examples() {
        let s = sys("1/2,1/4,1/4", 2);
        assert_eq!(cylinder_increment(&[0, 2], &s).unwrap(), frac(1, 12));
        assert_eq!(cylinder_increment(&[], &s).unwrap(), s.increment_constant());
        assert_eq!(s.increment_constant(), frac(2, 3));
        let s6 = sys("1/2,1/4,1/4", 6);
        assert!(cylinder_increment(&[0], &s6).unwrap() < int(0));
        assert!(cylinder_increment(&[3], &s).is_err());
    }

    #[test]
    fn derivative_ratio_examples() {
        let s = sys("1/2,1/4,1/4", 2);
        assert_eq!(derivative_ratio(&[0, 2], &s).unwrap(), frac(2, 3));
        assert_eq!(
            derivative_ratio(&[0; 9], &s).unwrap(),
            s.increment_constant()
        );
        let s = sys("1/2,1/3,1/6", 2);
        let k = s.increment_constant();
        for m in 0..8 {
            let expected = &k * Rational::new(1.into(), BigInt::from(2).pow(m as u32));
            assert_eq!(derivative_ratio(&vec![1; m], &s).unwrap(), expected);
        }
    }

    #[test]
    fn jump_examples() {
        let s = sys("1/2,1/4,1/4", 2);
        let r = jump_at(&ex("1(0)"), &s).unwrap();
        assert_eq!(
            (r.left_limit, r.right_limit, r.jump),
            (frac(1, 3), frac(3, 4), frac(5, 12))
        );
        let u = sys("1/3,1/3,1/3", 2);
        let r = jump_at(&ex("2(0)"), &u).unwrap();
        assert_eq!((r.left_limit, r.right_limit), (frac(5, 6), frac(1, 3)));
        assert!(r.jump < int(0));
        assert!(jump_at(&ex("02(1)"), &s).is_err());
        assert!(jump_at(&ex("(0)"), &s).is_err());
        assert!(jump_at(&ex("(2)"), &s).is_err());
    }

    #[test]
    fn approximants_approach_limits() {
        let s = sys("1/2,1/4,1/4", 2);
        let x0 = ex("21(0)");
        let r = jump_at(&x0, &s).unwrap();
        let depth = 30;
        let (left, right) = one_sided_approximants(&x0, depth).unwrap();
        let p = s.params();
        let x = crate::numerals::value_of(&x0, p).unwrap();
        assert!(crate::numerals::value_of(&left, p).unwrap() < x);
        assert!(crate::numerals::value_of(&right, p).unwrap() > x);
        let bound = num_traits::pow(p.max_weight(), depth);
        assert!((s.eval(&left).unwrap() - &r.left_limit).abs() <= bound);
        assert!((s.eval(&right).unwrap() - &r.right_limit).abs() <= bound);
    }

    #[test]
    fn collision_examples() {
        let s = sys("1/2,1/4,1/4", 2);
        let p = s.params();
        let c = collision_pair(&[], CollisionFamily::G1, &s).unwrap();
        assert_eq!(crate::numerals::value_of(&c.x1, p).unwrap(), frac(3, 4));
        assert_eq!(crate::numerals::value_of(&c.x2, p).unwrap(), frac(1, 3));
        assert_eq!(c.fx, frac(1, 2));
        let c = collision_pair(&[], CollisionFamily::G2, &s).unwrap();
        assert_eq!((c.x1.clone(), c.x2.clone()), (ex("1(0)"), ex("2(1)")));
        assert_eq!(c.fx, s.eval(&c.x2).unwrap());
        let c = collision_pair(&[0], CollisionFamily::G1, &s).unwrap();
        assert_eq!(c.fx, frac(1, 4));
        assert!(collision_pair(&[], CollisionFamily::G1, &sys("1/2,1/4,1/4", 1)).is_err());
    }

    #[test]
    fn monotonicity_examples() {
        let s = sys("1/2,1/4,1/4", 2);
        let (x1, x2) = monotonicity_witness(&s).unwrap().unwrap();
        assert_eq!((x1.clone(), x2.clone()), (ex("1(0)"), ex("2(0)")));
        assert_eq!(s.eval(&x1).unwrap(), frac(3, 4));
        assert_eq!(s.eval(&x2).unwrap(), frac(1, 2));
        assert_eq!(monotonicity_witness(&sys("1/2,1/4,1/4", 1)).unwrap(), None);
        let (x1, x2) = monotonicity_witness(&sys("1/2,1/4,1/4", 6))
            .unwrap()
            .unwrap();
        assert_eq!((x1, x2), (ex("(0)"), ex("1(0)")));
        for m in 2..=6 {
            assert!(monotonicity_witness(&sys("1/3,1/3,1/3", m))
                .unwrap()
                .is_some());
        }
    }

    #[test]
    fn quotient_examples() {
        let u = sys("1/3,1/3,1/3", 2);
        let rows = difference_quotient_trace(&ex("(0)"), 6, 1, &u).unwrap();
        assert_eq!(rows.len(), 6);
        for row in &rows {
            assert_eq!(row.quotient, int(2));
            assert_eq!(row.running_product, int(1));
            assert!(row.factorization_holds());
        }
        let s = sys("1/2,1/3,1/6", 2);
        let rows = difference_quotient_trace(&ex("(1)"), 10, 2, &s).unwrap();
        let first = rows[0].quotient.clone();
        for row in &rows {
            assert!(row.factorization_holds());
            let scale = Rational::new(1.into(), BigInt::from(2).pow(row.n0 as u32 - 1));
            assert_eq!(row.running_product, scale);
            // σ^{n0} x is the same tail at every n0, so the bounded factor
            // is constant and the quotient halves per step
            assert_eq!(row.quotient, &first * scale);
        }
        let skipped = difference_quotient_trace(&ex("(1)"), 5, 1, &s).unwrap();
        assert!(skipped.is_empty());
    }

    #[test]
    fn frequency_examples() {
        let s = sys("1/2,1/3,1/6", 2);
        let e = ex("(012)");
        let digits: Vec<u8> = e.digits().take(300).collect();
        let r = digit_frequency(&digits, &s).unwrap();
        assert_eq!(r.counts, vec![100, 100, 100]);
        assert_eq!(r.frequency(1), frac(1, 3));
        let sym = sys("1/2,1/4,1/4", 2);
        let r = digit_frequency(&[1, 1, 2, 0, 1], &sym).unwrap();
        assert_eq!(r.log_ratio, 0.0);
    }

    #[test]
    fn expected_slope_examples() {
        let s = sys("1/2,1/3,1/6", 2);
        assert!((expected_log_slope(&s) - (1.0f64 / 6.0) * 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(expected_log_slope(&sys("1/2,1/4,1/4", 2)), 0.0);
        assert_eq!(expected_log_slope(&sys("1/2,1/3,1/6", 1)), 0.0);
    }

    #[test]
    fn fixed_point_examples() {
        let s = sys("1/2,1/3,1/6", 2);
        assert_eq!(
            fixed_point_scan(&s, 5).unwrap(),
            FixedPointScan::Points(vec![ex("(0)")])
        );
        assert_eq!(
            fixed_point_scan(&sys("1/3,1/3,1/3", 1), 4).unwrap(),
            FixedPointScan::Identity
        );
        // f_6 = 1 - x fixes 1/2, whose ternary spelling is (1)
        assert_eq!(
            fixed_point_scan(&sys("1/3,1/3,1/3", 6), 5).unwrap(),
            FixedPointScan::Points(vec![ex("(1)")])
        );
    }
}
