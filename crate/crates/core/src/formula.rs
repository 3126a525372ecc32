//! The closed expansion of `x_n`.
//!
//! For `n >= 3`, `x_n` is a sum over `V ⊆ [c_(n-1)]` and `W ⊆ free(V)` of one
//! monomial each. `V` picks which `y`-exponents of `F(z_(n-2))` took the
//! `-r` branch; the gate plan of `V` fixes some output positions to the `-r`
//! branch and leaves the rest free, and `W` chooses among the free ones.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::coeff::Coeff;
use crate::combinator::{check_rank, check_subset, z_word_in, BContext, PosSet};
use crate::error::{Error, Result};
use crate::ncpoly::NCPoly;
use crate::word::{Gen, ReducedWord, TwoRowWord, WordStack};

/// Default refusal threshold for materializing `x_n`.
pub const DEFAULT_MAX_TERMS: u64 = 20_000_000;

/// `F(z_(n-2))|_V`: the summand of `F(z_(n-2))` with the `-r` branch taken
/// exactly at the positions in `V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Restriction {
    pub n: usize,
    pub v: PosSet,
    pub word: TwoRowWord,
}

pub fn restrict_fz(ctx: &BContext, n: usize, v: PosSet) -> Result<Restriction> {
    ctx.check_level(n, 3)?;
    let prev = n - 1;
    check_subset(v, ctx.c(prev))?;
    let mut word = z_word_in(ctx, prev);
    for p in v.iter() {
        word.beta[p + 1] -= ctx.r();
    }
    Ok(Restriction { n, v, word })
}

/// Which output positions of `F~(F(z_(n-2))|_V)` are forced to the `-r`
/// branch, and the x-exponents over `[c_n]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GatePlan {
    pub forced: PosSet,
    pub free: PosSet,
    /// `top[p - 1]` is the x-exponent at position `p`.
    pub top: Vec<i64>,
}

pub fn gate_plan(ctx: &BContext, n: usize, v: PosSet) -> Result<GatePlan> {
    ctx.check_level(n, 3)?;
    let prev = n - 1;
    let width = ctx.c(prev);
    check_subset(v, width)?;
    let all = PosSet::full(ctx.c(n))?;
    let blocks = ctx.blocks(n);
    let r = ctx.r();
    let mut top = vec![-1; ctx.c(n)];
    let mut forced = PosSet::EMPTY;
    for (i, block) in blocks.iter().enumerate() {
        let i = i + 1;
        let (start, end) = (*block.start(), *block.end());
        if v.contains(i) {
            forced = forced.union(PosSet::range(block.clone()));
            for t in &mut top[start - 1..end] {
                *t = 0;
            }
            if i == 1 {
                top[start - 1] = -1;
                top[end - 1] = 1;
            } else {
                top[end - 1] = r - ctx.b(prev, i);
            }
        } else if i < width && v.contains(i + 1) {
            let run = v.runs().into_iter().find(|&(s, _)| s == i + 1).map_or(0, |(_, l)| l);
            if !ctx.run_is_exceptional(prev, i + 1, run) {
                forced.insert(end);
            }
        }
    }
    Ok(GatePlan {
        forced,
        free: all.difference(forced),
        top,
    })
}

/// Everything needed to emit the words of one `V`.
struct Family {
    alpha: Vec<i64>,
    beta: Vec<i64>,
    free: PosSet,
    r: i64,
}

impl Family {
    fn new(ctx: &BContext, n: usize, v: PosSet) -> Result<Self> {
        let plan = gate_plan(ctx, n, v)?;
        let mut alpha = Vec::with_capacity(plan.top.len() + 2);
        alpha.push(1);
        alpha.extend_from_slice(&plan.top);
        alpha.push(-1);
        let mut beta = Vec::with_capacity(alpha.len());
        beta.extend([0, 1]);
        beta.extend_from_slice(ctx.row(n));
        for p in plan.forced.iter() {
            beta[p + 1] -= ctx.r();
        }
        Ok(Family {
            alpha,
            beta,
            free: plan.free,
            r: ctx.r(),
        })
    }

    /// Calls `visit` once per `W ⊆ free`, in binary-counter order, with the
    /// bottom row for that `W`. The rows are restored afterwards.
    fn for_each(&mut self, mut visit: impl FnMut(PosSet, &[i64], &[i64])) {
        let mut prev = PosSet::EMPTY;
        for w in self.free.subsets() {
            // binary increment: positions leaving W regain r, the new one loses it
            for p in prev.difference(w).iter() {
                self.beta[p + 1] += self.r;
            }
            for p in w.difference(prev).iter() {
                self.beta[p + 1] -= self.r;
            }
            visit(w, &self.alpha, &self.beta);
            prev = w;
        }
        for p in prev.iter() {
            self.beta[p + 1] += self.r;
        }
    }
}

pub fn expand_f_tilde(ctx: &BContext, n: usize, v: PosSet, w: PosSet) -> Result<TwoRowWord> {
    let mut fam = Family::new(ctx, n, v)?;
    if !w.is_subset(fam.free) {
        return Err(Error::NotFree {
            positions: w.difference(fam.free).iter().collect(),
        });
    }
    for p in w.iter() {
        fam.beta[p + 1] -= ctx.r();
    }
    Ok(TwoRowWord {
        alpha: fam.alpha,
        beta: fam.beta,
    })
}

/// The whole `F~(F(z_(n-2))|_V)` as a polynomial.
pub fn expand_family(ctx: &BContext, n: usize, v: PosSet) -> Result<NCPoly> {
    let mut fam = Family::new(ctx, n, v)?;
    let mut out = NCPoly::with_capacity(1 << fam.free.len().min(24));
    let mut stack = WordStack::new();
    fam.for_each(|_, a, b| out.add_term(rows_to_word(&mut stack, a, b), &Coeff::ONE));
    Ok(out)
}

pub(crate) fn rows_to_word(stack: &mut WordStack, alpha: &[i64], beta: &[i64]) -> ReducedWord {
    stack.clear();
    for (&a, &b) in alpha.iter().zip(beta) {
        stack.push(Gen::Y, b);
        stack.push(Gen::X, a);
    }
    stack.to_word()
}

fn check_index(r: i64, n: i64) -> Result<()> {
    check_rank(r)?;
    if n < 0 {
        return Err(Error::InvalidIndex { n, min: 0 });
    }
    Ok(())
}

/// Number of terms of `x_n`, `sum_V 2^|free(V)|`, without enumerating words.
pub fn count_terms(r: i64, n: i64) -> Result<BigInt> {
    check_index(r, n)?;
    match n {
        0 | 1 => return Ok(BigInt::one()),
        2 => return Ok(BigInt::from(2)),
        _ => {}
    }
    let ctx = BContext::new(r, n)?;
    let n = n as usize;
    let vs = PosSet::full(ctx.c(n - 1))?;
    PosSet::full(ctx.c(n))?;
    // histogram of |free| keeps the big-integer work to one term per size
    let mut hist = vec![0u64; ctx.c(n) + 1];
    for v in vs.subsets() {
        hist[gate_plan(&ctx, n, v)?.free.len()] += 1;
    }
    let mut total = BigInt::zero();
    for (k, &m) in hist.iter().enumerate() {
        if m > 0 {
            total += BigInt::from(m) << k;
        }
    }
    Ok(total)
}

/// Streams every term of `x_n` (`n >= 3`) as its two rows.
///
/// Work is split over `V` with rayon; each worker folds into its own
/// accumulator and the accumulators are combined with `merge`. Visiting
/// order inside one `V` is binary-counter order over `W`.
pub fn fold_terms<T, I, F, M>(r: i64, n: i64, init: I, fold: F, merge: M) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(&mut T, PosSet, PosSet, &[i64], &[i64]) + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    check_index(r, n)?;
    if n < 3 {
        return Err(Error::InvalidIndex { n, min: 3 });
    }
    let ctx = BContext::new(r, n)?;
    let n = n as usize;
    PosSet::full(ctx.c(n))?;
    let vs: Vec<PosSet> = PosSet::full(ctx.c(n - 1))?.subsets().collect();
    vs.into_par_iter()
        .try_fold(&init, |mut acc, v| {
            let mut fam = Family::new(&ctx, n, v)?;
            fam.for_each(|w, a, b| fold(&mut acc, v, w, a, b));
            Ok(acc)
        })
        .try_reduce(&init, |a, b| Ok(merge(a, b)))
}

/// Sequential streaming of reduced terms, in `V`-then-`W` binary order.
pub fn for_each_term(r: i64, n: i64, mut visit: impl FnMut(&ReducedWord)) -> Result<()> {
    check_index(r, n)?;
    if n < 3 {
        for (w, _) in base_case(r, n).sorted_terms() {
            visit(w);
        }
        return Ok(());
    }
    let ctx = BContext::new(r, n)?;
    let n = n as usize;
    PosSet::full(ctx.c(n))?;
    let mut stack = WordStack::new();
    for v in PosSet::full(ctx.c(n - 1))?.subsets() {
        let mut fam = Family::new(&ctx, n, v)?;
        fam.for_each(|_, a, b| visit(&rows_to_word(&mut stack, a, b)));
    }
    Ok(())
}

fn base_case(r: i64, n: i64) -> NCPoly {
    let w = |alpha: Vec<i64>, beta: Vec<i64>| TwoRowWord { alpha, beta }.reduce();
    match n {
        0 => NCPoly::x(),
        1 => NCPoly::from_words([w(vec![1, -1], vec![0, 1])]),
        _ => NCPoly::from_words([
            w(vec![1, -1, -1], vec![0, 1, -1]),
            w(vec![1, -1, -1], vec![0, 1, r - 1]),
        ]),
    }
}

/// `x_n` from the closed formula with the default term cap.
pub fn assemble_xn(r: i64, n: i64) -> Result<NCPoly> {
    assemble_xn_capped(r, n, DEFAULT_MAX_TERMS)
}

/// `x_n`, refusing when it has more than `cap` terms.
pub fn assemble_xn_capped(r: i64, n: i64, cap: u64) -> Result<NCPoly> {
    check_index(r, n)?;
    if n < 3 {
        return Ok(base_case(r, n));
    }
    let count = count_terms(r, n)?;
    if count > BigInt::from(cap) {
        return Err(Error::CapExceeded {
            count: count.to_string(),
            cap,
        });
    }
    let words = fold_terms(
        r,
        n,
        || (Vec::new(), WordStack::new()),
        |(acc, stack), _, _, a, b| acc.push(rows_to_word(stack, a, b)),
        |(mut a, s), (b, _)| {
            a.extend(b);
            (a, s)
        },
    )?;
    // from_words adds coefficients, so a repeated word would show up as 2
    Ok(NCPoly::from_words(words.0))
}

/// `x_n` for `r = 2` from the sign-pattern description: one word per
/// `alpha, beta ∈ {±1}^(n-1)` with `alpha_1 = -1`, `alpha_i = 1 ⇒ beta_i = -1`
/// and `alpha_i = -1, alpha_(i+1) = 1 ⇒ beta_i = -1`.
pub fn enumerate_r2(n: i64) -> Result<NCPoly> {
    if n < 3 {
        return Err(Error::InvalidIndex { n, min: 3 });
    }
    let m = (n - 1) as usize;
    if m > 40 {
        return Err(Error::TooManyPositions(m));
    }
    let mut out = NCPoly::zero();
    let mut stack = WordStack::new();
    let mut alpha = vec![-1i64; m + 2];
    alpha[0] = 1;
    let mut beta = vec![0i64; m + 2];
    beta[1] = 1;
    for amask in 0u64..1 << m {
        if amask & 1 == 1 {
            continue;
        }
        let a = |i: usize| if amask >> i & 1 == 1 { 1 } else { -1 };
        // positions whose beta is pinned to -1
        let mut pinned = 0u64;
        for i in 0..m {
            if a(i) == 1 || (i + 1 < m && a(i) == -1 && a(i + 1) == 1) {
                pinned |= 1 << i;
            }
        }
        for i in 0..m {
            alpha[i + 1] = a(i);
        }
        let open = !pinned & ((1u64 << m) - 1);
        for bmask in PosSet::from_bits(open).subsets() {
            for i in 0..m {
                let b_is_one = bmask.bits() >> i & 1 == 1;
                beta[i + 2] = if b_is_one { 1 } else { -1 };
            }
            out.add_term(rows_to_word(&mut stack, &alpha, &beta), &Coeff::ONE);
        }
    }
    Ok(out)
}

/// A symbolic multi-choice sum: position `i` ranges over `{0}` or `{0, 1}`,
/// and choosing 1 subtracts `r` from the y-exponent there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaFamily {
    pub r: i64,
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    /// Positions (1-based) whose choice set is `{0, 1}`.
    pub open: PosSet,
}

impl DeltaFamily {
    fn word(&self, v: PosSet) -> TwoRowWord {
        let mut alpha = vec![1];
        alpha.extend_from_slice(&self.alpha);
        alpha.push(-1);
        let mut beta = vec![0, 1];
        beta.extend(
            self.beta
                .iter()
                .enumerate()
                .map(|(i, &b)| if v.contains(i + 1) { b - self.r } else { b }),
        );
        TwoRowWord { alpha, beta }
    }

    /// `T|_V`: zero when `V` touches a closed position.
    pub fn restrict(&self, v: PosSet) -> NCPoly {
        if !v.is_subset(self.open) {
            return NCPoly::zero();
        }
        NCPoly::from_words([self.word(v).reduce()])
    }

    /// `T` itself, summed over every allowed choice.
    pub fn expand(&self) -> NCPoly {
        NCPoly::from_words(self.open.subsets().map(|v| self.word(v).reduce()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ps: &[usize]) -> PosSet {
        PosSet::from_positions(ps.iter().copied()).unwrap()
    }

    fn tr(alpha: &[i64], beta: &[i64]) -> TwoRowWord {
        TwoRowWord::new(alpha.to_vec(), beta.to_vec()).unwrap()
    }

    #[test]
    fn restriction_examples() {
        let ctx = BContext::new(3, 4).unwrap();
        assert_eq!(
            restrict_fz(&ctx, 3, set(&[])).unwrap().word,
            tr(&[1, -1, -1], &[0, 1, 2])
        );
        assert_eq!(
            restrict_fz(&ctx, 3, set(&[1])).unwrap().word,
            tr(&[1, -1, -1], &[0, 1, -1])
        );
        assert_eq!(restrict_fz(&ctx, 4, set(&[1, 2])).unwrap().word.beta, [0, 1, -1, 0, 2]);
        assert_eq!(restrict_fz(&ctx, 4, set(&[2, 3])).unwrap().word.beta, [0, 1, 2, 0, -1]);
        assert!(restrict_fz(&ctx, 4, set(&[4])).is_err());
    }

    #[test]
    fn gate_examples() {
        let ctx = BContext::new(3, 4).unwrap();
        let g = gate_plan(&ctx, 4, set(&[2])).unwrap();
        assert_eq!(g.forced, set(&[4, 5, 6]));
        assert_eq!(g.free, set(&[1, 2, 3, 7, 8]));
        assert_eq!(gate_plan(&ctx, 4, set(&[3])).unwrap().forced, set(&[6, 7, 8]));
        assert_eq!(gate_plan(&ctx, 4, set(&[])).unwrap().forced, PosSet::EMPTY);
    }

    #[test]
    fn expansion_examples() {
        let ctx = BContext::new(3, 4).unwrap();
        let e = |n, v: &[usize], w: &[usize]| expand_f_tilde(&ctx, n, set(v), set(w)).unwrap();
        assert_eq!(e(3, &[], &[1, 3]), tr(&[1, -1, -1, -1, -1], &[0, 1, -1, 3, -1]));
        assert_eq!(e(3, &[1], &[]), tr(&[1, -1, 0, 1, -1], &[0, 1, -1, 0, -1]));
        assert_eq!(
            e(4, &[1, 2, 3], &[]),
            tr(&[1, -1, 0, 1, 0, 0, 0, 0, 1, -1], &[0, 1, -1, 0, -1, 0, 0, -1, 0, -1])
        );
        assert_eq!(
            e(4, &[2], &[]),
            tr(&[1, -1, -1, -1, 0, 0, 0, -1, -1, -1], &[0, 1, 2, 3, 2, 0, 0, -1, 3, 2])
        );
        assert_eq!(
            e(4, &[2, 3], &[1]),
            tr(&[1, -1, -1, -1, 0, 0, 0, 0, 1, -1], &[0, 1, -1, 3, -1, 0, 0, -1, 0, -1])
        );
        assert!(matches!(
            expand_f_tilde(&ctx, 4, set(&[3]), set(&[6])),
            Err(Error::NotFree { .. })
        ));
    }

    #[test]
    fn x3_for_r3_is_the_nine_words() {
        let words = [
            (&[1, -1, -1, -1, -1][..], &[0, 1, 2, 3, 2][..]),
            (&[1, -1, -1, -1, -1], &[0, 1, -1, 0, 2]),
            (&[1, -1, -1, -1, -1], &[0, 1, -1, 3, 2]),
            (&[1, -1, -1, -1, -1], &[0, 1, -1, 3, -1]),
            (&[1, -1, -1, -1, -1], &[0, 1, 2, 0, 2]),
            (&[1, -1, -1, -1, -1], &[0, 1, 2, 0, -1]),
            (&[1, -1, -1, -1, -1], &[0, 1, 2, 3, -1]),
            (&[1, -1, -1, -1, -1], &[0, 1, -1, 0, -1]),
            (&[1, -1, 0, 1, -1], &[0, 1, -1, 0, -1]),
        ];
        let expect = NCPoly::from_words(words.iter().map(|(a, b)| tr(a, b).reduce()));
        assert_eq!(expect.len(), 9);
        assert_eq!(assemble_xn(3, 3).unwrap(), expect);
    }

    #[test]
    fn counts() {
        assert_eq!(count_terms(3, 3).unwrap(), BigInt::from(9));
        assert_eq!(count_terms(3, 4).unwrap(), BigInt::from(256 + 3 * 32 + 3 * 4 + 1));
        assert_eq!(count_terms(2, 3).unwrap(), BigInt::from(5));
        for (r, n) in [(2, 6), (3, 4), (4, 4)] {
            assert_eq!(
                BigInt::from(assemble_xn(r, n).unwrap().len()),
                count_terms(r, n).unwrap()
            );
        }
    }

    #[test]
    fn base_cases() {
        assert_eq!(assemble_xn(3, 0).unwrap(), NCPoly::x());
        assert_eq!(assemble_xn(3, 1).unwrap().to_text(), "1 * x^1 y^1 x^-1\n");
        assert_eq!(assemble_xn(4, 2).unwrap().len(), 2);
        assert!(assemble_xn(1, 3).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(assemble_xn_capped(3, 4, 364), Err(Error::CapExceeded { .. })));
        assert_eq!(assemble_xn_capped(3, 4, 365).unwrap().len(), 365);
    }

    #[test]
    fn gate_matches_f_map() {
        for (r, n) in [(2, 6), (3, 3), (3, 4), (3, 5), (4, 3), (4, 4)] {
            let ctx = BContext::new(r, n).unwrap();
            let n = n as usize;
            for v in PosSet::full(ctx.c(n - 1)).unwrap().subsets() {
                let plan = gate_plan(&ctx, n, v).unwrap();
                assert_eq!(plan.forced, ctx.f_map(n, v).unwrap(), "r={r} n={n} V={v:?}");
                assert_eq!(plan.forced.union(plan.free), PosSet::full(ctx.c(n)).unwrap());
            }
        }
    }

    #[test]
    fn unrestricted_expansion_is_z() {
        for r in 2..=4 {
            let ctx = BContext::new(r, 5).unwrap();
            for n in 3..=5 {
                let w = expand_f_tilde(&ctx, n, PosSet::EMPTY, PosSet::EMPTY).unwrap();
                assert_eq!(w, crate::combinator::z_word(r, n as i64).unwrap());
            }
        }
    }

    #[test]
    fn columns_have_the_z_shape() {
        let ctx = BContext::new(3, 4).unwrap();
        for v in PosSet::full(3).unwrap().subsets() {
            let fam = Family::new(&ctx, 4, v).unwrap();
            assert_eq!(fam.alpha.len(), 10);
            assert_eq!((fam.alpha[0], fam.alpha[9]), (1, -1));
            assert_eq!(&fam.beta[..2], [0, 1]);
        }
    }

    #[test]
    fn streaming_restores_rows() {
        let ctx = BContext::new(3, 4).unwrap();
        let mut fam = Family::new(&ctx, 4, set(&[2])).unwrap();
        let before = fam.beta.clone();
        let mut seen = Vec::new();
        fam.for_each(|w, _, b| {
            seen.push(w);
            let mut expect = before.clone();
            for p in w.iter() {
                expect[p + 1] -= 3;
            }
            assert_eq!(b, expect.as_slice());
        });
        assert_eq!(seen.len(), 32);
        assert_eq!(fam.beta, before);
    }

    #[test]
    fn r2_paths_agree() {
        assert_eq!(enumerate_r2(3).unwrap().len(), 5);
        let z3 = tr(&[1, -1, -1, -1], &[0, 1, 1, 1]).reduce();
        assert!(enumerate_r2(3).unwrap().contains(&z3));
        for n in 3..=8 {
            assert_eq!(enumerate_r2(n).unwrap(), assemble_xn(2, n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn z_is_a_term() {
        for (r, n) in [(2, 7), (3, 4), (4, 4)] {
            let z = crate::combinator::z_word(r, n).unwrap().reduce();
            assert!(assemble_xn(r, n).unwrap().coeff(&z).is_one());
        }
    }

    #[test]
    fn partition_of_a_delta_family() {
        let t = DeltaFamily {
            r: 3,
            alpha: vec![-1, 0, -1],
            beta: vec![2, 3, 2],
            open: set(&[1, 3]),
        };
        let mut sum = NCPoly::zero();
        for v in PosSet::full(3).unwrap().subsets() {
            sum.add_assign(&t.restrict(v));
        }
        assert_eq!(sum, t.expand());
        assert!(t.restrict(set(&[2])).is_zero());
    }

    #[test]
    fn streamed_terms_match_assembly() {
        let mut streamed = NCPoly::zero();
        for_each_term(3, 4, |w| streamed.add_term(w.clone(), &Coeff::ONE)).unwrap();
        assert_eq!(streamed, assemble_xn(3, 4).unwrap());
    }
}
