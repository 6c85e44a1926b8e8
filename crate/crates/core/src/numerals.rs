//! P_q digit expansions.
//!
//! An expansion is stored as a finite prefix followed by a repeating period;
//! an empty period stands for the all-zero tail `(0)`. Under partition
//! parameters `p` the digit string `i_1 i_2 ...` denotes
//! `β_{i_1} + p_{i_1}(β_{i_2} + p_{i_2}(...))`, which for an eventually
//! periodic string sums to a rational in closed form.
//!
//! Every point whose string ends in `(0)` after a nonzero digit has a second
//! spelling ending in `(q-1)`. The canonical form always picks the `(0)`
//! spelling, except for the point 1 which only has the spelling `(q-1)`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::rational::{parse_rational, Rational};
use crate::{Error, Result};

pub const MAX_BASE: usize = 10;

/// The probability vector `(p_0, ..., p_{q-1})` with cumulative offsets
/// `β_t = p_0 + ... + p_{t-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionParams {
    p: Vec<Rational>,
    beta: Vec<Rational>,
}

impl PartitionParams {
    pub fn new(p: Vec<Rational>) -> Result<Self> {
        let q = p.len();
        if !(2..=MAX_BASE).contains(&q) {
            return Err(Error::InvalidParams(format!(
                "need between 2 and {MAX_BASE} weights, got {q}"
            )));
        }
        for (t, w) in p.iter().enumerate() {
            if *w <= Rational::zero() || *w >= Rational::one() {
                return Err(Error::InvalidParams(format!(
                    "p_{t} = {w} is not strictly between 0 and 1"
                )));
            }
        }
        let total: Rational = p.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidParams(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let mut beta = Vec::with_capacity(q);
        let mut acc = Rational::zero();
        for w in &p {
            beta.push(acc.clone());
            acc += w;
        }
        Ok(PartitionParams { p, beta })
    }

    /// Equal weights `1/q`; the Salem map is then the identity.
    pub fn uniform(q: usize) -> Result<Self> {
        let w = Rational::new(1.into(), (q.max(1) as i64).into());
        Self::new(vec![w; q])
    }

    /// Parses a comma-separated list such as `1/2,1/4,1/4` or `0.5,0.25,0.25`.
    pub fn parse(text: &str) -> Result<Self> {
        let p = text
            .split(',')
            .map(|s| parse_rational(s.trim()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(p)
    }

    pub fn q(&self) -> usize {
        self.p.len()
    }

    pub fn weight(&self, t: u8) -> &Rational {
        &self.p[t as usize]
    }

    pub fn offset(&self, t: u8) -> &Rational {
        &self.beta[t as usize]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.p
    }

    pub fn offsets(&self) -> &[Rational] {
        &self.beta
    }

    pub fn max_weight(&self) -> Rational {
        self.p.iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    /// Value of the constant stream `(t)`, i.e. `β_t / (1 - p_t)`.
    pub fn constant_stream_value(&self, t: u8) -> Rational {
        self.offset(t) / (Rational::one() - self.weight(t))
    }

    /// Affine image of `[0, 1]` under the prefix `digits`.
    pub fn word_image<I: IntoIterator<Item = u8>>(&self, digits: I) -> WordImage {
        let mut image = WordImage::identity();
        for d in digits {
            image.push(self, d);
        }
        image
    }

    /// Value of the (not necessarily canonical) stream `prefix (period)`.
    pub fn stream_value(&self, prefix: &[u8], period: &[u8]) -> Rational {
        let head = self.word_image(prefix.iter().copied());
        if period.is_empty() {
            return head.offset;
        }
        let cycle = self.word_image(period.iter().copied());
        let tail = cycle.offset / (Rational::one() - cycle.scale);
        head.apply(&tail)
    }
}

impl fmt::Display for PartitionParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.p.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// The map `u ↦ offset + scale·u` obtained by prepending a digit word.
///
/// Applied to `[0, 1]` it gives the cylinder of that word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordImage {
    pub offset: Rational,
    pub scale: Rational,
}

impl WordImage {
    pub fn identity() -> Self {
        WordImage {
            offset: Rational::zero(),
            scale: Rational::one(),
        }
    }

    /// Appends digit `d` to the word.
    pub fn push(&mut self, params: &PartitionParams, d: u8) {
        self.offset += &self.scale * params.offset(d);
        self.scale *= params.weight(d);
    }

    pub fn apply(&self, u: &Rational) -> Rational {
        &self.offset + &self.scale * u
    }
}

/// An eventually periodic digit string `prefix (period)` in base `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitExpansion {
    q: usize,
    prefix: Vec<u8>,
    period: Vec<u8>,
}

impl DigitExpansion {
    /// Validated and canonicalized.
    pub fn new(q: usize, prefix: Vec<u8>, period: Vec<u8>) -> Result<Self> {
        Ok(Self::from_raw(q, prefix, period)?.canonicalize())
    }

    /// Validated but kept exactly as spelled.
    pub fn from_raw(q: usize, prefix: Vec<u8>, period: Vec<u8>) -> Result<Self> {
        check_base(q)?;
        if let Some((pos, &d)) = prefix
            .iter()
            .chain(&period)
            .enumerate()
            .find(|(_, &d)| d as usize >= q)
        {
            return Err(Error::MalformedDigit {
                ch: char::from_digit(d as u32, 36).unwrap_or('?'),
                pos,
                q,
            });
        }
        Ok(DigitExpansion { q, prefix, period })
    }

    pub fn zero(q: usize) -> Self {
        DigitExpansion {
            q,
            prefix: Vec::new(),
            period: Vec::new(),
        }
    }

    /// The point 1, spelled `(q-1)`.
    pub fn one(q: usize) -> Self {
        DigitExpansion {
            q,
            prefix: Vec::new(),
            period: vec![(q - 1) as u8],
        }
    }

    /// `digits (0)`, canonicalized.
    pub fn terminating(q: usize, digits: Vec<u8>) -> Result<Self> {
        Self::new(q, digits, Vec::new())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    /// Repeating part; empty means the zero tail.
    pub fn period(&self) -> &[u8] {
        &self.period
    }

    /// Digit at 0-based position `k` of the infinite stream.
    pub fn digit(&self, k: usize) -> u8 {
        if k < self.prefix.len() {
            self.prefix[k]
        } else if self.period.is_empty() {
            0
        } else {
            self.period[(k - self.prefix.len()) % self.period.len()]
        }
    }

    /// The infinite digit stream.
    pub fn digits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..).map(move |k| self.digit(k))
    }

    pub fn is_zero(&self) -> bool {
        self.prefix.iter().chain(&self.period).all(|&d| d == 0)
    }

    pub fn is_one(&self) -> bool {
        let top = (self.q - 1) as u8;
        !self.period.is_empty() && self.prefix.iter().chain(&self.period).all(|&d| d == top)
    }

    pub fn is_canonical(&self) -> bool {
        *self == self.canonicalize()
    }

    /// Canonical spelling with the same value: reduced period, shortest
    /// prefix, `(0)` stored as the empty period, and every `(q-1)` tail after
    /// a prefix rewritten as the incremented prefix followed by `(0)`.
    pub fn canonicalize(&self) -> Self {
        let top = (self.q - 1) as u8;
        let mut prefix = self.prefix.clone();
        let mut period = if self.period.is_empty() {
            vec![0]
        } else {
            primitive_root(&self.period).to_vec()
        };
        while prefix.last() == period.last() {
            prefix.pop();
            period.rotate_right(1);
        }
        if period == [0] {
            period.clear();
        } else if period == [top] && !prefix.is_empty() {
            // prefix cannot end in `top` after the absorption above
            *prefix.last_mut().unwrap() += 1;
            period.clear();
        }
        DigitExpansion {
            q: self.q,
            prefix,
            period,
        }
    }

    /// `σ^n`: drops the first `n` digits.
    pub fn shift(&self, n: usize) -> Self {
        if n <= self.prefix.len() {
            return DigitExpansion {
                q: self.q,
                prefix: self.prefix[n..].to_vec(),
                period: self.period.clone(),
            };
        }
        let mut period = self.period.clone();
        if !period.is_empty() {
            let len = period.len();
            period.rotate_left((n - self.prefix.len()) % len);
        }
        DigitExpansion {
            q: self.q,
            prefix: Vec::new(),
            period,
        }
    }

    /// True for the points carrying two spellings (tail `(0)` after a
    /// nonzero digit) and for the point 1.
    pub fn is_p_rational(&self) -> bool {
        let c = self.canonicalize();
        (c.period.is_empty() && !c.prefix.is_empty()) || c.is_one()
    }

    /// Applies `map` to every digit of the stream, including the implicit
    /// zero tail, without canonicalizing.
    pub fn map_digits(&self, map: impl Fn(u8) -> u8) -> Self {
        let period = if self.period.is_empty() {
            vec![map(0)]
        } else {
            self.period.iter().map(|&d| map(d)).collect()
        };
        DigitExpansion {
            q: self.q,
            prefix: self.prefix.iter().map(|&d| map(d)).collect(),
            period,
        }
    }

    /// Lexicographic comparison of the two infinite digit streams.
    pub fn stream_cmp(&self, other: &Self) -> Ordering {
        let cycle = |e: &Self| e.period.len().max(1);
        let a = cycle(self);
        let b = cycle(other);
        let horizon = self.prefix.len().max(other.prefix.len()) + a / gcd(a, b) * b;
        self.digits()
            .zip(other.digits())
            .take(horizon)
            .map(|(x, y)| x.cmp(&y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn primitive_root(word: &[u8]) -> &[u8] {
    let n = word.len();
    (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .find(|&d| (d..n).all(|i| word[i] == word[i - d]))
        .map(|d| &word[..d])
        .unwrap_or(word)
}

fn check_base(q: usize) -> Result<()> {
    if (2..=MAX_BASE).contains(&q) {
        Ok(())
    } else {
        Err(Error::Domain(format!("base q={q} outside 2..={MAX_BASE}")))
    }
}

impl fmt::Display for DigitExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.prefix {
            write!(f, "{d}")?;
        }
        f.write_str("(")?;
        if self.period.is_empty() {
            f.write_str("0")?;
        }
        for d in &self.period {
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

/// Parses `digit+ [ "(" digit+ ")" ] | "(" digit+ ")"` and canonicalizes.
///
/// A `(q-1)` tail after a prefix is a legal number with a non-canonical
/// spelling; it is accepted and rewritten.
pub fn parse_expansion(text: &str, q: usize) -> Result<DigitExpansion> {
    check_base(q)?;
    let syntax = |reason: &str| Error::syntax("expansion", text, reason);
    if text.is_empty() {
        return Err(syntax("empty string"));
    }
    let (head, tail) = match text.find('(') {
        Some(open) => {
            let inner = text[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| syntax("missing closing ')' at end"))?;
            (&text[..open], Some((open + 1, inner)))
        }
        None => (text, None),
    };
    let digits = |s: &str, offset: usize| -> Result<Vec<u8>> {
        s.chars()
            .enumerate()
            .map(|(i, ch)| match ch.to_digit(10) {
                Some(d) if (d as usize) < q => Ok(d as u8),
                Some(_) => Err(Error::MalformedDigit {
                    ch,
                    pos: offset + i,
                    q,
                }),
                None => Err(syntax(&format!(
                    "unexpected '{ch}' at position {}",
                    offset + i
                ))),
            })
            .collect()
    };
    let prefix = digits(head, 0)?;
    let period = match tail {
        Some((_, "")) => return Err(syntax("empty parentheses")),
        Some((offset, inner)) => digits(inner, offset)?,
        None => Vec::new(),
    };
    if prefix.is_empty() && tail.is_none() {
        return Err(syntax("no digits"));
    }
    DigitExpansion::new(q, prefix, period)
}

/// Exact value of `e` under `params`.
pub fn value_of(e: &DigitExpansion, params: &PartitionParams) -> Result<Rational> {
    same_base(params.q(), e.q())?;
    Ok(params.stream_value(&e.prefix, &e.period))
}

pub(crate) fn same_base(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::BaseMismatch { expected, found })
    }
}

/// Result of greedy digit extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extraction {
    /// The remainder hit zero or cycled; the expansion is exact.
    Exact(DigitExpansion),
    /// The requested number of digits, with no repetition detected. The
    /// point lies in the cylinder of these digits.
    Truncated { q: usize, digits: Vec<u8> },
}

impl Extraction {
    pub fn is_exact(&self) -> bool {
        matches!(self, Extraction::Exact(_))
    }

    /// The exact expansion, or the left endpoint `digits (0)` of the cylinder.
    pub fn expansion(&self) -> DigitExpansion {
        match self {
            Extraction::Exact(e) => e.clone(),
            Extraction::Truncated { q, digits } => DigitExpansion {
                q: *q,
                prefix: digits.clone(),
                period: Vec::new(),
            },
        }
    }
}

impl fmt::Display for Extraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extraction::Exact(e) => e.fmt(f),
            Extraction::Truncated { digits, .. } => {
                for d in digits {
                    write!(f, "{d}")?;
                }
                f.write_str("...")
            }
        }
    }
}

/// Greedy inverse of [`value_of`].
///
/// Digit `t` is chosen on the half-open interval `[β_t, β_{t+1})`, so
/// boundary points receive their `(0)` spelling. Stops as soon as the
/// remainder is zero or repeats; otherwise after `count` digits.
pub fn digits_of(y: &Rational, params: &PartitionParams, count: usize) -> Result<Extraction> {
    let q = params.q();
    if *y < Rational::zero() || *y > Rational::one() {
        return Err(Error::OutOfRange(y.to_string()));
    }
    if y.is_one() {
        return Ok(Extraction::Exact(DigitExpansion::one(q)));
    }
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    let mut digits = Vec::new();
    let mut rest = y.clone();
    loop {
        if rest.is_zero() {
            return Ok(Extraction::Exact(DigitExpansion::new(
                q,
                digits,
                Vec::new(),
            )?));
        }
        if let Some(&start) = seen.get(&rest) {
            let period = digits.split_off(start);
            return Ok(Extraction::Exact(DigitExpansion::new(q, digits, period)?));
        }
        if digits.len() >= count {
            return Ok(Extraction::Truncated { q, digits });
        }
        let t = (0..q as u8)
            .rev()
            .find(|&t| *params.offset(t) <= rest)
            .unwrap_or(0);
        seen.insert(rest.clone(), digits.len());
        digits.push(t);
        rest = (rest - params.offset(t)) / params.weight(t);
    }
}

/// The closed interval of points whose expansion begins with `base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub base: Vec<u8>,
    pub inf: Rational,
    pub sup: Rational,
    pub length: Rational,
}

pub fn cylinder(base: &[u8], params: &PartitionParams) -> Result<Cylinder> {
    DigitExpansion::from_raw(params.q(), base.to_vec(), Vec::new())?;
    let image = params.word_image(base.iter().copied());
    Ok(Cylinder {
        base: base.to_vec(),
        sup: &image.offset + &image.scale,
        inf: image.offset,
        length: image.scale,
    })
}
