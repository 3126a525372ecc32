//! Substitution of `x`, `y` into polynomials: the monomial map `G` and the
//! Kontsevich map `F` with a truncated expansion of `(1 + y^r)^-1`.
//!
//! `F` sends `x -> x y x^-1` and `y -> (1 + y^r) x^-1`, so
//! `y^-1 -> x (1 + y^r)^-1`. The inverse is expanded as the geometric series
//! `sum_k (-1)^k y^(rk)`, capped at `k <= series_cap`. Each branch of the
//! expansion has a total y-degree `d0 + r * (sum of the k's)`, where `d0` is
//! the degree of the same branch with every `k = 0`. Total y-degree survives
//! free reduction, so every branch dropped by the cap lands in degree
//! `> d_min + r * series_cap`, and all coefficients at or below that degree
//! are exact.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use super::NCPoly;
use crate::coeff::Coeff;
use crate::word::{Gen, ReducedWord, WordStack};

/// Truncation parameters for [`apply_f_truncated`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationPolicy {
    /// Highest power `k` kept in each expansion of `(1 + y^r)^-1`.
    pub series_cap: u32,
    /// Reduced words with `|total y-degree|` above this are dropped.
    pub degree_bound: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    /// Expansion branches dropped because they could only land outside the
    /// degree window.
    pub discarded: u64,
    /// See [`min_branch_degree`]. `None` when no series is expanded.
    pub min_branch_degree: Option<i64>,
    /// Degree up to which the truncated series is exact, `d_min + r * K`.
    pub exact_threshold: Option<i64>,
    /// Whether the whole retained window `[-B, B]` is exact.
    pub exact_up_to_bound: bool,
}

impl OracleReport {
    /// Upper end of the degree window whose coefficients are certified.
    pub fn certified_bound(&self, policy: &TruncationPolicy) -> i64 {
        match self.exact_threshold {
            Some(d) => d.min(policy.degree_bound),
            None => policy.degree_bound,
        }
    }
}

fn check_rank(r: i64) {
    assert!(r >= 2, "rank must be at least 2");
}

/// Applies `G : x -> x y x^-1, y -> y^r x^-1`. Monomials go to monomials.
pub fn apply_g(p: &NCPoly, r: i64) -> NCPoly {
    check_rank(r);
    let mut out = NCPoly::with_capacity(p.len());
    let mut stack = WordStack::new();
    for (w, c) in p.terms() {
        stack.clear();
        for (g, e) in w.syllables() {
            match g {
                Gen::X => {
                    stack.push(Gen::X, 1);
                    stack.push(Gen::Y, e);
                    stack.push(Gen::X, -1);
                }
                Gen::Y if e > 0 => {
                    for _ in 0..e {
                        stack.push(Gen::Y, r);
                        stack.push(Gen::X, -1);
                    }
                }
                Gen::Y => {
                    for _ in 0..-e {
                        stack.push(Gen::X, 1);
                        stack.push(Gen::Y, -r);
                    }
                }
            }
        }
        out.add_term(stack.to_word(), c);
    }
    out
}

/// Minimum total y-degree over all-`k = 0` branches of `F(p)`, taken over
/// the words that expand a series at all (those with a negative y-power).
/// The image of `x^a` contributes `a`, y-powers contribute at least 0.
pub fn min_branch_degree(p: &NCPoly) -> Option<i64> {
    p.terms()
        .filter(|(w, _)| w.syllables().any(|(g, e)| g == Gen::Y && e < 0))
        .map(|(w, _)| w.x_degree())
        .min()
}

/// Smallest policy with the given window that is exact on all of it.
pub fn auto_policy(p: &NCPoly, r: i64, degree_bound: i64) -> TruncationPolicy {
    check_rank(r);
    let series_cap = match min_branch_degree(p) {
        Some(d) if degree_bound > d => (degree_bound - d + r - 1) / r,
        _ => 0,
    };
    TruncationPolicy {
        series_cap: u32::try_from(series_cap).expect("series cap out of range"),
        degree_bound,
    }
}

/// One factor of the expansion of a source word.
#[derive(Clone, Copy)]
enum Step {
    /// `x^a -> x y^a x^-1`.
    XPower(i64),
    /// One copy of `(1 + y^r) x^-1`.
    YPos,
    /// One copy of `x (1 + y^r)^-1`, truncated.
    YNeg,
}

struct Expander<'a> {
    r: i64,
    cap: i64,
    bound: i64,
    steps: Vec<Step>,
    suffix_min: Vec<i64>,
    suffix_max: Vec<i64>,
    suffix_branches: Vec<u64>,
    stack: WordStack,
    coeff: Coeff,
    out: &'a mut FxHashMap<ReducedWord, Coeff>,
    discarded: u64,
}

impl Expander<'_> {
    fn load(&mut self, w: &ReducedWord, coeff: &Coeff) {
        self.steps.clear();
        for (g, e) in w.syllables() {
            match g {
                Gen::X => self.steps.push(Step::XPower(e)),
                Gen::Y if e > 0 => self.steps.extend((0..e).map(|_| Step::YPos)),
                Gen::Y => self.steps.extend((0..-e).map(|_| Step::YNeg)),
            }
        }
        let n = self.steps.len();
        self.suffix_min.clear();
        self.suffix_min.resize(n + 1, 0);
        self.suffix_max.clear();
        self.suffix_max.resize(n + 1, 0);
        self.suffix_branches.clear();
        self.suffix_branches.resize(n + 1, 1);
        for i in (0..n).rev() {
            let (lo, hi, count) = match self.steps[i] {
                Step::XPower(a) => (a, a, 1),
                Step::YPos => (0, self.r, 2),
                Step::YNeg => (0, self.r * self.cap, self.cap as u64 + 1),
            };
            self.suffix_min[i] = self.suffix_min[i + 1] + lo;
            self.suffix_max[i] = self.suffix_max[i + 1] + hi;
            self.suffix_branches[i] = self.suffix_branches[i + 1].saturating_mul(count);
        }
        self.coeff = coeff.clone();
        self.stack.clear();
    }

    fn run(&mut self, idx: usize, degree: i64, negative: bool) {
        if degree + self.suffix_min[idx] > self.bound || degree + self.suffix_max[idx] < -self.bound {
            self.discarded = self.discarded.saturating_add(self.suffix_branches[idx]);
            return;
        }
        let Some(&step) = self.steps.get(idx) else {
            let c = if negative { -&self.coeff } else { self.coeff.clone() };
            *self.out.entry(self.stack.to_word()).or_default() += &c;
            return;
        };
        match step {
            Step::XPower(a) => {
                let u1 = self.stack.push(Gen::X, 1);
                let u2 = self.stack.push(Gen::Y, a);
                let u3 = self.stack.push(Gen::X, -1);
                self.run(idx + 1, degree + a, negative);
                self.stack.undo(u3);
                self.stack.undo(u2);
                self.stack.undo(u1);
            }
            Step::YPos => {
                let u = self.stack.push(Gen::X, -1);
                self.run(idx + 1, degree, negative);
                self.stack.undo(u);
                let u1 = self.stack.push(Gen::Y, self.r);
                let u2 = self.stack.push(Gen::X, -1);
                self.run(idx + 1, degree + self.r, negative);
                self.stack.undo(u2);
                self.stack.undo(u1);
            }
            Step::YNeg => {
                let u1 = self.stack.push(Gen::X, 1);
                for k in 0..=self.cap {
                    let u2 = self.stack.push(Gen::Y, self.r * k);
                    self.run(idx + 1, degree + self.r * k, negative ^ (k % 2 == 1));
                    self.stack.undo(u2);
                }
                self.stack.undo(u1);
            }
        }
    }
}

/// Applies `F_r` to `p` with the truncated series for `(1 + y^r)^-1`,
/// keeping only words with `|total y-degree| <= policy.degree_bound`.
///
/// Coefficients of retained words with degree at most
/// [`OracleReport::certified_bound`] equal those of the true `F_r(p)`.
/// Words above that may be truncation artifacts.
pub fn apply_f_truncated(p: &NCPoly, r: i64, policy: TruncationPolicy) -> (NCPoly, OracleReport) {
    check_rank(r);
    let cap = i64::from(policy.series_cap);
    let bound = policy.degree_bound;
    let sources: Vec<(&ReducedWord, &Coeff)> = p.terms().collect();

    let (map, discarded) = sources
        .par_iter()
        .fold(
            || (FxHashMap::<ReducedWord, Coeff>::default(), 0u64),
            |(mut map, discarded), (w, c)| {
                let mut ex = Expander {
                    r,
                    cap,
                    bound,
                    steps: Vec::new(),
                    suffix_min: Vec::new(),
                    suffix_max: Vec::new(),
                    suffix_branches: Vec::new(),
                    stack: WordStack::new(),
                    coeff: Coeff::ZERO,
                    out: &mut map,
                    discarded: 0,
                };
                ex.load(w, c);
                ex.run(0, 0, false);
                let d = ex.discarded;
                (map, discarded.saturating_add(d))
            },
        )
        .reduce(
            || (FxHashMap::default(), 0u64),
            |(a, da), (b, db)| {
                let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
                for (w, c) in small {
                    *big.entry(w).or_default() += &c;
                }
                (big, da.saturating_add(db))
            },
        );

    let min_degree = min_branch_degree(p);
    let threshold = min_degree.map(|d| d + r * cap);
    let report = OracleReport {
        discarded,
        min_branch_degree: min_degree,
        exact_threshold: threshold,
        exact_up_to_bound: threshold.is_none_or(|d| bound <= d),
    };
    (NCPoly::from_raw(map), report)
}

/// True iff raising the series cap by one leaves the retained window
/// unchanged.
pub fn stability_check(p: &NCPoly, r: i64, series_cap: u32, degree_bound: i64) -> bool {
    let base = TruncationPolicy {
        series_cap,
        degree_bound,
    };
    let more = TruncationPolicy {
        series_cap: series_cap + 1,
        degree_bound,
    };
    let (a, _) = apply_f_truncated(p, r, base);
    let (b, _) = apply_f_truncated(p, r, more);
    a == b
}
