//! Random generators shared by the verification suites and tests.

use num_bigint::BigInt;
use rand::Rng;

use crate::numerals::{DigitExpansion, PartitionParams};
use crate::rational::{to_f64, Rational};

/// Random positive rational weights with denominators built from integers in
/// `1..=max_weight`.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R, q: usize, max_weight: u32) -> PartitionParams {
    let raw: Vec<u32> = (0..q)
        .map(|_| rng.random_range(1..=max_weight.max(1)))
        .collect();
    let total: u32 = raw.iter().sum();
    let p = raw
        .iter()
        .map(|&w| Rational::new(BigInt::from(w), BigInt::from(total)))
        .collect();
    PartitionParams::new(p).expect("positive weights summing to one")
}

/// Random canonical expansion with the given maximum prefix and period
/// lengths (a zero-length period means the `(0)` tail).
pub fn random_expansion<R: Rng + ?Sized>(
    rng: &mut R,
    q: usize,
    max_prefix: usize,
    max_period: usize,
) -> DigitExpansion {
    let prefix_len = rng.random_range(0..=max_prefix);
    let period_len = rng.random_range(0..=max_period);
    let prefix = (0..prefix_len)
        .map(|_| rng.random_range(0..q as u8))
        .collect();
    let period = (0..period_len)
        .map(|_| rng.random_range(0..q as u8))
        .collect();
    DigitExpansion::new(q, prefix, period).expect("digits drawn below q")
}

/// Random canonical point with two spellings, other than 0 and 1.
pub fn random_p_rational<R: Rng + ?Sized>(rng: &mut R, q: usize, max_len: usize) -> DigitExpansion {
    let len = rng.random_range(1..=max_len.max(1));
    let mut digits: Vec<u8> = (0..len).map(|_| rng.random_range(0..q as u8)).collect();
    *digits.last_mut().unwrap() = rng.random_range(1..q as u8);
    DigitExpansion::terminating(q, digits).expect("digits drawn below q")
}

/// Digit sampler for Lebesgue-uniform points.
///
/// Every cylinder `Λ_{c_1...c_m}` has length `p_{c_1}···p_{c_m}`, so a
/// uniform point's digits are i.i.d. with `P(digit = t) = p_t`.
#[derive(Clone, Debug)]
pub struct DigitSampler {
    cumulative: Vec<f64>,
}

impl DigitSampler {
    pub fn new(params: &PartitionParams) -> Self {
        let mut acc = 0.0;
        let cumulative = params
            .weights()
            .iter()
            .map(|w| {
                acc += to_f64(w);
                acc
            })
            .collect();
        DigitSampler { cumulative }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u8 {
        let u: f64 = rng.random();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1) as u8
    }

    pub fn stream<R: Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Vec<u8> {
        (0..len).map(|_| self.draw(rng)).collect()
    }
}
