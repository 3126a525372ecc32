//! Integer sequences and string combinatorics behind the expansion formula.
//!
//! Positions are 1-based everywhere in the public surface. Subsets of
//! positions are [`PosSet`] bitmasks, which caps a single level at 64
//! positions; anything bigger is far beyond what can be enumerated anyway.

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::word::TwoRowWord;

/// Largest level width [`BContext`] will materialize.
pub const MAX_ROW_LEN: usize = 1 << 24;

pub(crate) fn check_rank(r: i64) -> Result<()> {
    if r < 2 {
        return Err(Error::InvalidRank(r));
    }
    Ok(())
}

/// A subset of `{1, ..., 64}`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PosSet(u64);

impl PosSet {
    pub const EMPTY: PosSet = PosSet(0);

    pub fn from_bits(bits: u64) -> Self {
        PosSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// `{1, ..., len}`.
    pub fn full(len: usize) -> Result<Self> {
        match len {
            0..=63 => Ok(PosSet((1u64 << len) - 1)),
            64 => Ok(PosSet(u64::MAX)),
            _ => Err(Error::TooManyPositions(len)),
        }
    }

    pub fn from_positions<I: IntoIterator<Item = usize>>(positions: I) -> Result<Self> {
        let mut s = PosSet::EMPTY;
        for p in positions {
            if p == 0 || p > 64 {
                return Err(Error::PositionOutOfRange { pos: p, len: 64 });
            }
            s.0 |= 1 << (p - 1);
        }
        Ok(s)
    }

    pub fn range(r: RangeInclusive<usize>) -> Self {
        PosSet::from_positions(r).expect("position range within 1..=64")
    }

    pub fn contains(self, p: usize) -> bool {
        (1..=64).contains(&p) && self.0 >> (p - 1) & 1 == 1
    }

    pub fn insert(&mut self, p: usize) {
        assert!((1..=64).contains(&p), "position {p} outside 1..=64");
        self.0 |= 1 << (p - 1);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn max(self) -> Option<usize> {
        (self.0 != 0).then(|| 64 - self.0.leading_zeros() as usize)
    }

    pub fn union(self, o: PosSet) -> PosSet {
        PosSet(self.0 | o.0)
    }

    pub fn intersection(self, o: PosSet) -> PosSet {
        PosSet(self.0 & o.0)
    }

    pub fn difference(self, o: PosSet) -> PosSet {
        PosSet(self.0 & !o.0)
    }

    pub fn is_subset(self, o: PosSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            (bits != 0).then(|| {
                let p = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                p + 1
            })
        })
    }

    /// Maximal runs of consecutive positions as `(start, length)`.
    pub fn runs(self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut bits = self.0;
        while bits != 0 {
            let start = bits.trailing_zeros() as usize;
            let len = (bits >> start).trailing_ones() as usize;
            out.push((start + 1, len));
            bits &= if start + len >= 64 { 0 } else { !0u64 << (start + len) };
        }
        out
    }

    /// All subsets of `self`, in binary-counter order.
    pub fn subsets(self) -> impl Iterator<Item = PosSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some(((cur | !mask).wrapping_add(1)) & mask)
            };
            Some(PosSet(cur))
        })
    }
}

impl fmt::Debug for PosSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for PosSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// `c_n` from `c_1 = 0, c_2 = 1, c_n = r c_(n-1) - c_(n-2)`.
pub fn c_seq(r: i64, n: i64) -> Result<BigInt> {
    check_rank(r)?;
    if n < 1 {
        return Err(Error::InvalidIndex { n, min: 1 });
    }
    let (mut prev, mut cur) = (BigInt::zero(), BigInt::from(1));
    if n == 1 {
        return Ok(prev);
    }
    for _ in 2..n {
        let next = &cur * r - &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// `c_n` as `sum_i (-1)^i C(n-2-i, i) r^(n-2-2i)`, for `n >= 2`.
pub fn c_closed_form(r: i64, n: i64) -> Result<BigInt> {
    check_rank(r)?;
    if n < 2 {
        return Err(Error::InvalidIndex { n, min: 2 });
    }
    let mut total = BigInt::zero();
    let mut i = 0;
    while n - 2 - 2 * i >= 0 {
        let term = binomial(BigInt::from(n - 2 - i), BigInt::from(i)) * BigInt::from(r).pow((n - 2 - 2 * i) as u32);
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        i += 1;
    }
    Ok(total)
}

fn c_usize(r: i64, n: i64) -> Result<usize> {
    let c = c_seq(r, n)?;
    c.to_usize()
        .filter(|&c| c <= MAX_ROW_LEN)
        .ok_or(Error::TooManyPositions(MAX_ROW_LEN + 1))
}

/// Strings over `{r-1, r}`; the domain of [`g_transform`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ExcString(Vec<i64>);

impl ExcString {
    pub fn new(r: i64, entries: Vec<i64>) -> Result<Self> {
        check_rank(r)?;
        if let Some(&bad) = entries.iter().find(|&&e| e != r && e != r - 1) {
            return Err(Error::InvalidExcEntry { entry: bad, r });
        }
        Ok(ExcString(entries))
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn g_entry(r: i64, e: i64, out: &mut Vec<i64>) {
    let n = e as usize;
    out.extend(std::iter::repeat_n(r, n - 1));
    out.push(r - 1);
}

fn g_slice(r: i64, s: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(s.len() * r as usize);
    for &e in s {
        g_entry(r, e, &mut out);
    }
    out
}

/// `g`: each `r` becomes `(r, ..., r, r-1)` of length `r`, each `r-1` becomes
/// the same pattern of length `r-1`.
pub fn g_transform(r: i64, s: &ExcString) -> ExcString {
    ExcString(g_slice(r, &s.0))
}

/// `g^s(r)` for every `s` whose result has length at most `max_len`.
fn generator_blocks(r: i64, max_len: usize) -> Vec<Vec<i64>> {
    let mut blocks = Vec::new();
    let mut cur = vec![r];
    while cur.len() <= max_len {
        let next = g_slice(r, &cur);
        let grew = next.len() > cur.len();
        blocks.push(cur);
        if !grew {
            break;
        }
        cur = next;
    }
    blocks
}

fn exceptional_slice(r: i64, s: &[i64]) -> bool {
    if s.is_empty() {
        return false;
    }
    let blocks = generator_blocks(r, s.len());
    // reachable[i]: s[..i] splits into generator blocks
    let mut reachable = vec![false; s.len() + 1];
    reachable[0] = true;
    for i in 0..s.len() {
        if !reachable[i] {
            continue;
        }
        for b in &blocks {
            if s[i..].starts_with(b) {
                reachable[i + b.len()] = true;
            }
        }
    }
    reachable[s.len()]
}

/// Whether `s` is a concatenation `g^s1(r) ... g^sj(r)` with `j >= 1`.
pub fn is_exceptional(r: i64, s: &ExcString) -> bool {
    exceptional_slice(r, &s.0)
}

/// Index bookkeeping for one `(r, n)`: the c-sequence and every b-row up to
/// level `n`.
#[derive(Clone, Debug)]
pub struct BContext {
    r: i64,
    n: usize,
    c: Vec<usize>,
    rows: Vec<Vec<i64>>,
    prefix: Vec<Vec<i64>>,
}

impl BContext {
    pub fn new(r: i64, n: i64) -> Result<Self> {
        check_rank(r)?;
        if n < 1 {
            return Err(Error::InvalidIndex { n, min: 1 });
        }
        let mut c = vec![0];
        for m in 1..=n {
            c.push(c_usize(r, m)?);
        }
        let n = n as usize;
        let mut rows = vec![Vec::new(), Vec::new()];
        for m in 2..=n {
            let row = if m == 2 {
                vec![r - 1]
            } else {
                let mut row = vec![r - 1];
                row.extend(g_slice(r, &rows[m - 1]));
                row
            };
            debug_assert_eq!(row.len(), c[m]);
            rows.push(row);
        }
        let prefix = rows
            .iter()
            .map(|row| {
                std::iter::once(0)
                    .chain(row.iter().scan(0, |acc, &b| {
                        *acc += b;
                        Some(*acc)
                    }))
                    .collect()
            })
            .collect();
        Ok(BContext { r, n, c, rows, prefix })
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    /// Highest level this context covers.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self, level: usize) -> usize {
        self.c[level]
    }

    /// `b_(level, 1..c_level)`.
    pub fn row(&self, level: usize) -> &[i64] {
        &self.rows[level]
    }

    /// `b_(level, i)`, 1-based.
    pub fn b(&self, level: usize, i: usize) -> i64 {
        self.rows[level][i - 1]
    }

    /// `sum_(k <= i) b_(level, k)`.
    fn prefix_sum(&self, level: usize, i: usize) -> usize {
        self.prefix[level][i] as usize
    }

    pub(crate) fn check_level(&self, level: usize, min: usize) -> Result<()> {
        if level < min || level > self.n {
            return Err(Error::InvalidIndex {
                n: level as i64,
                min: min as i64,
            });
        }
        Ok(())
    }

    /// Positions of `[c_level]` grouped by the entry of row `level - 1` that
    /// produced them. Block 1 is `1..=1+b_1`, block `i > 1` is
    /// `2+S(i-1)..=1+S(i)` with `S` the prefix sums of row `level - 1`.
    pub fn blocks(&self, level: usize) -> Vec<RangeInclusive<usize>> {
        let prev = level - 1;
        (1..=self.c[prev])
            .map(|i| {
                let start = if i == 1 { 1 } else { 2 + self.prefix_sum(prev, i - 1) };
                start..=1 + self.prefix_sum(prev, i)
            })
            .collect()
    }

    /// Whether the run `i..i+len` (1-based) of row `level` is exceptional.
    pub fn run_is_exceptional(&self, level: usize, start: usize, len: usize) -> bool {
        exceptional_slice(self.r, &self.rows[level][start - 1..start - 1 + len])
    }

    /// `f : subsets of [c_(n-1)] -> subsets of [c_n]`.
    pub fn f_map(&self, n: usize, v: PosSet) -> Result<PosSet> {
        self.check_level(n, 3)?;
        let prev = n - 1;
        check_subset(v, self.c[prev])?;
        PosSet::full(self.c[n])?;
        let mut out = PosSet::EMPTY;
        for (e, l) in v.runs() {
            let end = 1 + self.prefix_sum(prev, e + l - 1);
            let before = self.prefix_sum(prev, e - 1);
            let start = if self.run_is_exceptional(prev, e, l) {
                before + 2
            } else {
                before + 1
            };
            out = out.union(PosSet::range(start..=end));
        }
        Ok(out)
    }
}

pub(crate) fn check_subset(v: PosSet, len: usize) -> Result<()> {
    match v.max() {
        Some(p) if p > len => Err(Error::PositionOutOfRange { pos: p, len }),
        _ => Ok(()),
    }
}

/// Row `n` of the b-sequence, of length `c_n`.
pub fn b_row(r: i64, n: i64) -> Result<Vec<i64>> {
    let ctx = BContext::new(r, n)?;
    Ok(ctx.row(n as usize).to_vec())
}

/// `z_n = G^n(x)` in row form: top `(1, -1, ..., -1)`, bottom
/// `(0, 1, b_(n,1), ..., b_(n,c_n))`. `z_0` is `x`.
pub fn z_word(r: i64, n: i64) -> Result<TwoRowWord> {
    check_rank(r)?;
    if n < 0 {
        return Err(Error::InvalidIndex { n, min: 0 });
    }
    if n == 0 {
        return TwoRowWord::new(vec![1], vec![0]);
    }
    let ctx = BContext::new(r, n)?;
    Ok(z_word_in(&ctx, n as usize))
}

pub(crate) fn z_word_in(ctx: &BContext, level: usize) -> TwoRowWord {
    let c = ctx.c(level);
    let mut alpha = vec![-1; c + 2];
    alpha[0] = 1;
    let mut beta = Vec::with_capacity(c + 2);
    beta.extend([0, 1]);
    beta.extend_from_slice(ctx.row(level));
    TwoRowWord { alpha, beta }
}

/// `f_map` without a prebuilt context.
pub fn f_map(r: i64, n: i64, v: PosSet) -> Result<PosSet> {
    if n < 3 {
        return Err(Error::InvalidIndex { n, min: 3 });
    }
    BContext::new(r, n)?.f_map(n as usize, v)
}

/// Binomial coefficient with `C(a, b) = 0` unless `0 <= b <= a`.
pub fn binom(a: i64, b: i64) -> BigInt {
    if a < 0 || b < 0 || b > a {
        BigInt::zero()
    } else {
        binomial(BigInt::from(a), BigInt::from(b))
    }
}
