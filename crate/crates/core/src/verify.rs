//! Checks that tie the formula to the oracles. Each returns a
//! [`VerifyReport`]; none of them panic on a mismatch.

use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use serde::Serialize;

use crate::combinator::{BContext, PosSet};
use crate::error::{Error, Result};
use crate::formula::{assemble_xn, count_terms, enumerate_r2, expand_f_tilde, expand_family, fold_terms};
use crate::ncpoly::{apply_f_truncated, auto_policy, stability_check, NCPoly, TruncationPolicy};
use crate::special::{cluster_sequence, commutative_from_formula, commutative_specialize, cz_formula, CommPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The oracle window did not cover what had to be compared.
    Uncertified,
    /// The case is too large to run.
    Capacity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub key: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub case: String,
    pub status: Status,
    pub compared: u64,
    pub discarded: u64,
    /// Inclusive y-degree window the comparison is certified on.
    pub certified_window: Option<(i64, i64)>,
    pub wall_seconds: f64,
    pub counterexample: Option<Counterexample>,
    pub note: Option<String>,
}

impl VerifyReport {
    fn new(case: String) -> Self {
        VerifyReport {
            case,
            status: Status::Pass,
            compared: 0,
            discarded: 0,
            certified_window: None,
            wall_seconds: 0.0,
            counterexample: None,
            note: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    fn fail(&mut self, status: Status, note: impl Into<String>) {
        self.status = status;
        self.note = Some(note.into());
    }

    fn mismatch(&mut self, key: impl fmt::Display, expected: impl fmt::Display, actual: impl fmt::Display) {
        self.status = Status::Fail;
        self.counterexample = Some(Counterexample {
            key: key.to_string(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        });
    }

    /// Folds an error into the report instead of propagating it.
    fn absorb(&mut self, e: Error) {
        let status = match e {
            Error::CapExceeded { .. } | Error::TooManyPositions(_) => Status::Capacity,
            _ => Status::Fail,
        };
        self.fail(status, e.to_string());
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Uncertified => "UNCERTIFIED",
            Status::Capacity => "CAPACITY",
        };
        write!(
            f,
            "{status} {} compared={} ({:.2}s)",
            self.case, self.compared, self.wall_seconds
        )?;
        if let Some((lo, hi)) = self.certified_window {
            write!(f, " window=[{lo},{hi}]")?;
        }
        if let Some(c) = &self.counterexample {
            write!(
                f,
                " first mismatch at {}: expected {}, got {}",
                c.key, c.expected, c.actual
            )?;
        }
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

fn timed(case: String, body: impl FnOnce(&mut VerifyReport) -> Result<()>) -> VerifyReport {
    let start = Instant::now();
    let mut rep = VerifyReport::new(case);
    if let Err(e) = body(&mut rep) {
        rep.absorb(e);
    }
    rep.wall_seconds = start.elapsed().as_secs_f64();
    rep
}

/// Runs the truncated `F` on `source` and compares the certified window
/// with `expected`, which must lie inside it.
fn compare_with_oracle(
    rep: &mut VerifyReport,
    source: &NCPoly,
    expected: &NCPoly,
    r: i64,
    policy: Option<TruncationPolicy>,
    stability: bool,
) {
    let bound = expected.max_abs_y_degree().unwrap_or(0) + r;
    let policy = policy.unwrap_or_else(|| auto_policy(source, r, bound));
    let (image, report) = apply_f_truncated(source, r, policy);
    rep.discarded = report.discarded;
    let hi = report.certified_bound(&policy);
    rep.certified_window = Some((-policy.degree_bound, hi));
    if !report.exact_up_to_bound || expected.max_abs_y_degree().unwrap_or(0) > hi.min(policy.degree_bound) {
        rep.fail(
            Status::Uncertified,
            format!("series cap {} certifies degrees up to {hi} only", policy.series_cap),
        );
        return;
    }
    if stability && !stability_check(source, r, policy.series_cap, policy.degree_bound) {
        rep.fail(Status::Uncertified, "raising the series cap changed the window");
        return;
    }
    rep.compared = image.len().max(expected.len()) as u64;
    if let Some((w, want, got)) = expected.first_difference(&image) {
        rep.mismatch(w, want, got);
    }
}

/// `F(x_(n-1)) == x_n` on a certified window, both sides from the formula
/// except for the application of `F`. `policy = None` auto-tunes.
pub fn verify_formula(r: i64, n: i64, policy: Option<TruncationPolicy>) -> VerifyReport {
    timed(format!("formula r={r} n={n}"), |rep| {
        if n < 1 {
            return Err(Error::InvalidIndex { n, min: 1 });
        }
        let prev = assemble_xn(r, n - 1)?;
        let cur = assemble_xn(r, n)?;
        compare_with_oracle(rep, &prev, &cur, r, policy, true);
        Ok(())
    })
}

/// Above the materialization range: streams the formula's terms, checks the
/// count against [`count_terms`] and the commutative image against the
/// exchange recurrence.
pub fn verify_formula_streaming(r: i64, n: i64) -> VerifyReport {
    timed(format!("formula-stream r={r} n={n}"), |rep| {
        let (comm, streamed) = commutative_from_formula(r, n)?;
        rep.compared = streamed;
        let expected = count_terms(r, n)?;
        if BigInt::from(streamed) != expected {
            rep.mismatch("term count", expected, streamed);
            return Ok(());
        }
        compare_comm(rep, &cluster_sequence(r, n)?[n as usize], &comm);
        Ok(())
    })
}

fn compare_comm(rep: &mut VerifyReport, expected: &CommPoly, actual: &CommPoly) {
    if let Some(((a, b), want, got)) = expected.first_difference(actual) {
        rep.mismatch(format!("x^{a} y^{b}"), want, got);
    }
}

/// The per-`W'` identity behind the formula: applying `F` to the
/// `W'`-compatible level-`n` words gives the level-`n+1` family of `W'`.
pub fn verify_lemma_main(r: i64, n: i64, w_prime: PosSet) -> VerifyReport {
    timed(format!("lemma r={r} n={n} W'={w_prime:?}"), |rep| {
        if n < 3 {
            return Err(Error::InvalidIndex { n, min: 3 });
        }
        let ctx = BContext::new(r, n + 1)?;
        let lemma = lemma_sides(&ctx, n as usize, w_prime)?;
        compare_with_oracle(rep, &lemma.0, &lemma.1, r, None, false);
        Ok(())
    })
}

/// `(source, target)` of the identity for one `W'`.
pub fn lemma_sides(ctx: &BContext, n: usize, w_prime: PosSet) -> Result<(NCPoly, NCPoly)> {
    crate::combinator::check_subset(w_prime, ctx.c(n))?;
    let mut source = NCPoly::zero();
    for v in PosSet::full(ctx.c(n - 1))?.subsets() {
        let f = ctx.f_map(n, v)?;
        if f.is_subset(w_prime) {
            let word = expand_f_tilde(ctx, n, v, w_prime.difference(f))?.reduce();
            source.add_term(word, &crate::coeff::Coeff::ONE);
        }
    }
    let target = expand_family(ctx, n + 1, w_prime)?;
    Ok((source, target))
}

/// Every `W' ⊆ [c_n]`, one report each.
pub fn verify_lemma_all(r: i64, n: i64) -> Result<Vec<VerifyReport>> {
    let ctx = BContext::new(r, n)?;
    let all = PosSet::full(ctx.c(n as usize))?;
    Ok(all.subsets().map(|w| verify_lemma_main(r, n, w)).collect())
}

/// `(V, W) -> (V, W ∪ f(V))` and `(V, W') -> (V, W' \ f(V))` are inverse
/// bijections between `{W ∩ f(V) = ∅}` and `{f(V) ⊆ W'}`.
pub fn verify_bijection(r: i64, n: i64) -> VerifyReport {
    timed(format!("bijection r={r} n={n}"), |rep| {
        if n < 3 {
            return Err(Error::InvalidIndex { n, min: 3 });
        }
        let ctx = BContext::new(r, n)?;
        let n = n as usize;
        if ctx.c(n - 1) + ctx.c(n) > 30 {
            return Err(Error::TooManyPositions(ctx.c(n - 1) + ctx.c(n)));
        }
        let (mut left, mut right) = (0u64, 0u64);
        for v in PosSet::full(ctx.c(n - 1))?.subsets() {
            let f = ctx.f_map(n, v)?;
            for x in PosSet::full(ctx.c(n))?.subsets() {
                if x.intersection(f).is_empty() {
                    left += 1;
                    let image = x.union(f);
                    if !f.is_subset(image) || image.difference(f) != x {
                        rep.mismatch(format!("V={v:?} W={x:?}"), "round trip", format!("{image:?}"));
                        return Ok(());
                    }
                }
                if f.is_subset(x) {
                    right += 1;
                    let back = x.difference(f);
                    if !back.intersection(f).is_empty() || back.union(f) != x {
                        rep.mismatch(format!("V={v:?} W'={x:?}"), "round trip", format!("{back:?}"));
                        return Ok(());
                    }
                }
            }
        }
        rep.compared = left + right;
        if left != right {
            rep.mismatch("set sizes", left, right);
        }
        Ok(())
    })
}

/// Every coefficient of `x_n` is 1, its commutative image is nonnegative,
/// and the certified part of `F(x_(n-1))` only has coefficients 0 and 1.
pub fn verify_positivity_and_unit_coefficients(r: i64, n: i64) -> VerifyReport {
    timed(format!("positivity r={r} n={n}"), |rep| {
        let cur = assemble_xn(r, n)?;
        rep.compared = cur.len() as u64;
        if let Some((w, c)) = cur.sorted_terms().into_iter().find(|(_, c)| !c.is_one()) {
            rep.mismatch(w, 1, c);
            return Ok(());
        }
        if !commutative_specialize(&cur).all_nonnegative() {
            rep.fail(Status::Fail, "negative commutative coefficient");
            return Ok(());
        }
        if n >= 1 {
            let prev = assemble_xn(r, n - 1)?;
            let bound = cur.max_abs_y_degree().unwrap_or(0) + r;
            let policy = auto_policy(&prev, r, bound);
            let (image, report) = apply_f_truncated(&prev, r, policy);
            let hi = report.certified_bound(&policy);
            rep.certified_window = Some((-bound, hi));
            rep.discarded = report.discarded;
            let window = image.y_window(hi);
            if let Some((w, c)) = window.sorted_terms().into_iter().find(|(_, c)| !c.is_one()) {
                rep.mismatch(w, "0 or 1", c);
            }
        }
        Ok(())
    })
}

/// `commutative_specialize(x_n) == cluster_recurrence(r, n)`.
pub fn verify_specialization(r: i64, n: i64) -> VerifyReport {
    timed(format!("specialization r={r} n={n}"), |rep| {
        let comm = commutative_specialize(&assemble_xn(r, n)?);
        rep.compared = comm.len() as u64;
        compare_comm(rep, &cluster_sequence(r, n)?[n as usize], &comm);
        Ok(())
    })
}

/// `x_(m+1) x_(m-1) == x_m^r + 1` along the recurrence for `1 <= m < n_max`.
pub fn verify_exchange(r: i64, n_max: i64) -> VerifyReport {
    timed(format!("exchange r={r} n<={n_max}"), |rep| {
        let seq = cluster_sequence(r, n_max)?;
        for m in 1..seq.len() - 1 {
            let lhs = seq[m + 1].mul(&seq[m - 1])?;
            let rhs = seq[m].pow(r as u32)?.add(&CommPoly::one());
            rep.compared += 1;
            if let Some(((a, b), want, got)) = rhs.first_difference(&lhs) {
                rep.mismatch(format!("m={m} x^{a} y^{b}"), want, got);
                return Ok(());
            }
        }
        Ok(())
    })
}

/// Binomial closed form, recurrence and both `r = 2` term descriptions agree
/// for `2 <= n <= n_max` (the term descriptions from `n = 3`).
pub fn verify_cz(n_max: i64) -> VerifyReport {
    timed(format!("cz n<={n_max}"), |rep| {
        let seq = cluster_sequence(2, n_max.max(2))?;
        for n in 2..=n_max {
            let cz = cz_formula(n)?;
            rep.compared += 1;
            compare_comm(rep, &seq[n as usize], &cz);
            if n >= 3 && rep.passed() {
                compare_comm(rep, &cz, &commutative_specialize(&enumerate_r2(n)?));
                compare_comm(rep, &cz, &commutative_specialize(&assemble_xn(2, n)?));
            }
            if !rep.passed() {
                rep.note = Some(format!("n={n}"));
                return Ok(());
            }
        }
        Ok(())
    })
}

/// Counts the formula's terms by streaming them, for comparison with
/// [`count_terms`].
pub fn streamed_count(r: i64, n: i64) -> Result<u64> {
    fold_terms(r, n, || 0u64, |c, _, _, _, _| *c += 1, |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ps: &[usize]) -> PosSet {
        PosSet::from_positions(ps.iter().copied()).unwrap()
    }

    #[test]
    fn formula_small_cases() {
        for (r, n, terms) in [(3, 3, 9), (2, 3, 5), (3, 2, 2), (4, 3, 17)] {
            let rep = verify_formula(r, n, None);
            assert!(rep.passed(), "{rep}");
            assert_eq!(rep.compared, terms, "{rep}");
        }
    }

    #[test]
    fn too_small_a_policy_is_uncertified() {
        let policy = TruncationPolicy {
            series_cap: 0,
            degree_bound: 30,
        };
        assert_eq!(verify_formula(3, 3, Some(policy)).status, Status::Uncertified);
    }

    #[test]
    fn lemma_worked_case_and_base() {
        assert!(verify_lemma_main(3, 3, set(&[1, 2, 3])).passed());
        assert!(verify_lemma_main(3, 3, PosSet::EMPTY).passed());
        let reps = verify_lemma_all(3, 3).unwrap();
        assert_eq!(reps.len(), 8);
        assert!(reps.iter().all(|r| r.passed()));
    }

    #[test]
    fn lemma_fails_on_a_wrong_target() {
        let ctx = BContext::new(3, 4).unwrap();
        let (source, mut target) = lemma_sides(&ctx, 3, set(&[1, 2])).unwrap();
        target.add_term(crate::word::ReducedWord::y(), &crate::coeff::Coeff::ONE);
        let mut rep = VerifyReport::new("tampered".into());
        compare_with_oracle(&mut rep, &source, &target, 3, None, false);
        assert_eq!(rep.status, Status::Fail);
        assert!(rep.counterexample.is_some());
    }

    #[test]
    fn bijections() {
        for (r, n) in [(3, 3), (3, 4), (2, 6)] {
            let rep = verify_bijection(r, n);
            assert!(rep.passed(), "{rep}");
        }
        assert_eq!(verify_bijection(3, 3).compared, 2 * 9);
    }

    #[test]
    fn positivity_and_cz() {
        assert!(verify_positivity_and_unit_coefficients(3, 3).passed());
        assert!(verify_positivity_and_unit_coefficients(2, 6).passed());
        assert!(verify_cz(6).passed());
        assert!(verify_cz(2).passed());
    }

    #[test]
    fn exchange_and_specialization() {
        assert!(verify_exchange(3, 5).passed());
        assert!(verify_specialization(4, 3).passed());
        assert_eq!(verify_exchange(5, 12).status, Status::Capacity);
    }

    #[test]
    fn streaming_count() {
        assert_eq!(streamed_count(3, 4).unwrap(), 365);
        assert!(verify_formula_streaming(3, 4).passed());
    }

    #[test]
    fn report_json() {
        let rep = verify_bijection(3, 3);
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["status"], "pass");
        assert_eq!(v["case"], "bijection r=3 n=3");
    }
}
