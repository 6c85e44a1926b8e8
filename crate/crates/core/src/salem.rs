//! Digit permutations and the permuted Salem function.
//!
//! Input and output are read in the same representation, so the identity
//! permutation gives `f(x) = x` for any weights. The ternary row `θ_2 =
//! (0 2 1)` swaps the roles of the digits 1 and 2.

use std::fmt;

use num_traits::Zero;

use crate::numerals::{
    digits_of, same_base, value_of, DigitExpansion, Extraction, PartitionParams, WordImage,
};
use crate::rational::{to_f64, Rational};
use crate::{Error, Result};

/// The six digit permutations of `{0, 1, 2}`, in table order.
pub const TERNARY_TABLE: [[u8; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// A bijection `θ` of the digit alphabet `{0, ..., q-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitPermutation {
    table: Vec<u8>,
}

impl DigitPermutation {
    pub fn new(table: Vec<u8>) -> Result<Self> {
        let q = table.len();
        if !(2..=crate::numerals::MAX_BASE).contains(&q) {
            return Err(Error::InvalidPermutation(format!("{q} entries")));
        }
        let mut seen = vec![false; q];
        for &d in &table {
            if d as usize >= q || std::mem::replace(&mut seen[d as usize], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{table:?} is not a bijection of 0..{q}"
                )));
            }
        }
        Ok(DigitPermutation { table })
    }

    pub fn identity(q: usize) -> Self {
        DigitPermutation {
            table: (0..q as u8).collect(),
        }
    }

    /// Row `θ_m`, `m ∈ 1..=6`, of the ternary table.
    pub fn builtin(m: usize) -> Result<Self> {
        match m {
            1..=6 => Ok(DigitPermutation {
                table: TERNARY_TABLE[m - 1].to_vec(),
            }),
            _ => Err(Error::InvalidPermutation(format!(
                "built-in rows are numbered 1..=6, got {m}"
            ))),
        }
    }

    /// `θ_1, ..., θ_6` for q = 3.
    pub fn builtin_permutations() -> Vec<Self> {
        (1..=6).map(|m| Self::builtin(m).unwrap()).collect()
    }

    /// Parses a comma-separated image table such as `0,2,1`.
    pub fn parse(text: &str) -> Result<Self> {
        let table = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u8>()
                    .map_err(|_| Error::syntax("permutation", text, format!("bad entry '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(table)
    }

    pub fn q(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn apply(&self, d: u8) -> u8 {
        self.table[d as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.table.iter().enumerate().all(|(i, &d)| i == d as usize)
    }

    /// `m` such that this is `θ_m`, if it is a ternary table row.
    pub fn builtin_index(&self) -> Option<usize> {
        TERNARY_TABLE
            .iter()
            .position(|row| row[..] == self.table[..])
            .map(|i| i + 1)
    }
}

impl fmt::Display for DigitPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.table.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// The Salem function `S`: base-q digits read under P_q weights.
pub fn eval_salem(e: &DigitExpansion, params: &PartitionParams) -> Result<Rational> {
    value_of(e, params)
}

/// Maps every digit through `perm`, then canonicalizes.
pub fn apply_permutation(e: &DigitExpansion, perm: &DigitPermutation) -> Result<DigitExpansion> {
    same_base(perm.q(), e.q())?;
    Ok(e.map_digits(|d| perm.apply(d)).canonicalize())
}

/// `f(x)` evaluated from a rational argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointEvaluation {
    pub digits: Extraction,
    pub value: Rational,
    /// Zero when the argument's expansion was found exactly.
    pub error_bound: Rational,
}

/// Partial sum of the unrolled functional equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unrolled {
    pub value: Rational,
    /// `Π_{r ≤ depth} p_{θ(i_r)}`; bounds `|f(x) - value|`.
    pub tail_bound: Rational,
}

/// The pair `(P_q, θ)`, which fully determines `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SalemSystem {
    params: PartitionParams,
    perm: DigitPermutation,
}

impl SalemSystem {
    pub fn new(params: PartitionParams, perm: DigitPermutation) -> Result<Self> {
        same_base(params.q(), perm.q())?;
        Ok(SalemSystem { params, perm })
    }

    /// `θ_m` of the ternary table over the given weights.
    pub fn ternary(params: PartitionParams, m: usize) -> Result<Self> {
        Self::new(params, DigitPermutation::builtin(m)?)
    }

    pub fn params(&self) -> &PartitionParams {
        &self.params
    }

    pub fn perm(&self) -> &DigitPermutation {
        &self.perm
    }

    pub fn q(&self) -> usize {
        self.params.q()
    }

    pub fn is_theta2(&self) -> bool {
        self.perm.builtin_index() == Some(2)
    }

    /// `p_{θ(t)}`.
    pub fn image_weight(&self, t: u8) -> &Rational {
        self.params.weight(self.perm.apply(t))
    }

    /// `β_{θ(t)}`.
    pub fn image_offset(&self, t: u8) -> &Rational {
        self.params.offset(self.perm.apply(t))
    }

    /// Value of the permuted stream `θ(prefix) (θ(period))`, whatever the
    /// spelling of the input.
    /// An empty period is the tail `(0)`, which maps to `(θ(0))`.
    pub fn image_stream_value(&self, prefix: &[u8], period: &[u8]) -> Rational {
        let period = if period.is_empty() {
            &[0u8][..]
        } else {
            period
        };
        let map = |ds: &[u8]| ds.iter().map(|&d| self.perm.apply(d)).collect::<Vec<_>>();
        self.params.stream_value(&map(prefix), &map(period))
    }

    /// Affine map `u ↦ f-offset + scale·u` of the permuted word.
    pub fn image_word(&self, digits: &[u8]) -> WordImage {
        self.params
            .word_image(digits.iter().map(|&d| self.perm.apply(d)))
    }

    /// `f(x)` for a canonical expansion `x`.
    pub fn eval(&self, e: &DigitExpansion) -> Result<Rational> {
        let image = apply_permutation(e, &self.perm)?;
        value_of(&image, &self.params)
    }

    /// `f(y)` for a rational `y`, via greedy digit extraction.
    pub fn eval_at(&self, y: &Rational, max_digits: usize) -> Result<PointEvaluation> {
        let digits = digits_of(y, &self.params, max_digits)?;
        match &digits {
            Extraction::Exact(e) => Ok(PointEvaluation {
                value: self.eval(e)?,
                error_bound: Rational::zero(),
                digits,
            }),
            Extraction::Truncated { digits: ds, .. } => {
                let image = self.image_word(ds);
                Ok(PointEvaluation {
                    value: image.offset,
                    error_bound: image.scale,
                    digits,
                })
            }
        }
    }

    /// `f(σ^{n-1}x) - β_{θ(i_n)} - p_{θ(i_n)} f(σ^n x)`; identically zero.
    pub fn residual(&self, e: &DigitExpansion, n: usize) -> Result<Rational> {
        if n == 0 {
            return Err(Error::Domain(
                "functional equation index starts at n = 1".into(),
            ));
        }
        let digit = e.digit(n - 1);
        let before = self.eval(&e.shift(n - 1))?;
        let after = self.eval(&e.shift(n))?;
        Ok(before - self.image_offset(digit) - self.image_weight(digit) * after)
    }

    /// The functional equation unrolled `depth` times with `f(σ^depth x)`
    /// dropped.
    pub fn unroll(&self, e: &DigitExpansion, depth: usize) -> Result<Unrolled> {
        same_base(self.q(), e.q())?;
        let image = self
            .params
            .word_image(e.digits().take(depth).map(|d| self.perm.apply(d)));
        Ok(Unrolled {
            value: image.offset,
            tail_bound: image.scale,
        })
    }

    /// `K_θ = f((q-1)-stream) - f(0-stream)`, the increment of `f` across
    /// the rank-0 cylinder; every rank-m increment is `K_θ Π p_{θ(c_r)}`.
    pub fn increment_constant(&self) -> Rational {
        let top = (self.q() - 1) as u8;
        self.params.constant_stream_value(self.perm.apply(top))
            - self.params.constant_stream_value(self.perm.apply(0))
    }

    pub fn float(&self) -> FloatSystem {
        FloatSystem {
            p: self.params.weights().iter().map(to_f64).collect(),
            beta: self.params.offsets().iter().map(to_f64).collect(),
            table: self.perm.table().to_vec(),
        }
    }
}

/// `f64` mirror of a [`SalemSystem`] for sampling-heavy work.
#[derive(Clone, Debug)]
pub struct FloatSystem {
    pub p: Vec<f64>,
    pub beta: Vec<f64>,
    pub table: Vec<u8>,
}

impl FloatSystem {
    /// Unrolls `f` over the digit source until `Π p_{θ(i_r)} < tol`.
    pub fn eval_digits(&self, mut next_digit: impl FnMut() -> u8, tol: f64) -> f64 {
        let mut value = 0.0;
        let mut scale = 1.0;
        while scale >= tol {
            let d = self.table[next_digit() as usize] as usize;
            value += scale * self.beta[d];
            scale *= self.p[d];
        }
        value
    }

    pub fn max_weight(&self) -> f64 {
        self.p.iter().copied().fold(0.0, f64::max)
    }
}

impl Default for SalemSystem {
    /// `θ_2` at equal weights.
    fn default() -> Self {
        SalemSystem::ternary(PartitionParams::uniform(3).unwrap(), 2).unwrap()
    }
}
