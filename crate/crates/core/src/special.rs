//! Commutative and q-commuting images of non-commutative polynomials, and
//! the commutative oracles they are compared against.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rustc_hash::FxHashMap;

use crate::combinator::{binom, check_rank};
use crate::error::{Error, Result};
use crate::formula::fold_terms;
use crate::ncpoly::NCPoly;
use crate::word::{Gen, ReducedWord};

/// Upper bound on coefficient multiplications in one [`CommPoly::mul`].
pub const MAX_MUL_WORK: u128 = 100_000_000;

/// Laurent polynomial in commuting `x`, `y`; key `(a, b)` is `x^a y^b`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommPoly {
    terms: BTreeMap<(i64, i64), BigInt>,
}

impl CommPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, BigInt::one())
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, BigInt::one())
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, BigInt::one())
    }

    pub fn monomial(a: i64, b: i64, c: BigInt) -> Self {
        let mut p = Self::zero();
        p.add_term(a, b, c);
        p
    }

    pub fn add_term(&mut self, a: i64, b: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((a, b)).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn coeff(&self, a: i64, b: i64) -> BigInt {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &BigInt)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &CommPoly) -> CommPoly {
        let mut out = self.clone();
        for (&(a, b), c) in &o.terms {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &CommPoly) -> CommPoly {
        let mut out = self.clone();
        for (&(a, b), c) in &o.terms {
            out.add_term(a, b, -c);
        }
        out
    }

    pub fn mul(&self, o: &CommPoly) -> Result<CommPoly> {
        let work = self.len() as u128 * o.len() as u128;
        if work > MAX_MUL_WORK {
            return Err(Error::CapExceeded {
                count: work.to_string(),
                cap: MAX_MUL_WORK as u64,
            });
        }
        let mut acc: FxHashMap<(i64, i64), BigInt> = FxHashMap::default();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &o.terms {
                *acc.entry((a1 + a2, b1 + b2)).or_default() += c1 * c2;
            }
        }
        Ok(CommPoly {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn pow(&self, e: u32) -> Result<CommPoly> {
        let mut out = CommPoly::one();
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Exponent ranges `(min_a, max_a, min_b, max_b)`; `None` for zero.
    fn extents(&self) -> Option<(i64, i64, i64, i64)> {
        let mut it = self.terms.keys();
        let &(a, b) = it.next()?;
        Some(it.fold((a, a, b, b), |(la, ha, lb, hb), &(a, b)| {
            (la.min(a), ha.max(a), lb.min(b), hb.max(b))
        }))
    }

    /// Exact quotient `self / d`.
    ///
    /// Repeatedly cancels the lex-largest remaining term. If the quotient
    /// exists its exponents lie in the box given by the difference of the
    /// two exponent ranges, so any step outside that box, or any
    /// non-integral coefficient, proves the division inexact.
    pub fn div_exact(&self, d: &CommPoly) -> Result<CommPoly> {
        let Some((dla, dha, dlb, dhb)) = d.extents() else {
            return Err(Error::InexactDivision("division by zero".into()));
        };
        let Some((nla, nha, nlb, nhb)) = self.extents() else {
            return Ok(CommPoly::zero());
        };
        let (qla, qha, qlb, qhb) = (nla - dla, nha - dha, nlb - dlb, nhb - dhb);
        let (&(la, lb), lc) = d.terms.iter().next_back().expect("nonzero divisor");
        let mut rem = self.clone();
        let mut q = CommPoly::zero();
        while let Some((&(ra, rb), rc)) = rem.terms.iter().next_back() {
            let (qa, qb) = (ra - la, rb - lb);
            if qa < qla || qa > qha || qb < qlb || qb > qhb {
                return Err(Error::InexactDivision(format!(
                    "quotient term x^{qa} y^{qb} outside its range"
                )));
            }
            let (qc, r) = rc.div_rem(lc);
            if !r.is_zero() {
                return Err(Error::InexactDivision(format!(
                    "coefficient {rc} not divisible by {lc}"
                )));
            }
            for (&(a, b), c) in &d.terms {
                rem.add_term(a + qa, b + qb, -(c * &qc));
            }
            q.add_term(qa, qb, qc);
        }
        Ok(q)
    }

    pub fn all_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    pub fn first_difference(&self, o: &CommPoly) -> Option<((i64, i64), BigInt, BigInt)> {
        let keys: std::collections::BTreeSet<_> = self.terms.keys().chain(o.terms.keys()).collect();
        keys.into_iter()
            .map(|&k| (k, self.coeff(k.0, k.1), o.coeff(k.0, k.1)))
            .find(|(_, a, b)| a != b)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|(&(x, y), c)| serde_json::json!({"x": x, "y": y, "coeff": c.to_string()}))
            .collect();
        serde_json::json!({ "terms": terms })
    }
}

impl fmt::Display for CommPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return writeln!(f, "0");
        }
        for (&(a, b), c) in &self.terms {
            writeln!(f, "{c} * x^{a} y^{b}")?;
        }
        Ok(())
    }
}

/// Coefficients that are Laurent polynomials in `q`, keyed like [`CommPoly`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QPoly {
    terms: BTreeMap<(i64, i64), BTreeMap<i64, BigInt>>,
}

impl QPoly {
    pub fn add_term(&mut self, a: i64, b: i64, qexp: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let inner = self.terms.entry((a, b)).or_default();
        let slot = inner.entry(qexp).or_default();
        *slot += c;
        if slot.is_zero() {
            inner.remove(&qexp);
            if inner.is_empty() {
                self.terms.remove(&(a, b));
            }
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, a: i64, b: i64) -> BTreeMap<i64, BigInt> {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    /// Sets `q = 1`.
    pub fn at_q_one(&self) -> CommPoly {
        let mut out = CommPoly::zero();
        for (&(a, b), inner) in &self.terms {
            out.add_term(a, b, inner.values().sum());
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<_> = self
            .terms
            .iter()
            .map(|(&(x, y), inner)| {
                let total: BigInt = inner.values().sum();
                let q: Vec<_> = inner
                    .iter()
                    .map(|(e, c)| serde_json::json!([e, c.to_string()]))
                    .collect();
                serde_json::json!({"x": x, "y": y, "coeff": total.to_string(), "q": q})
            })
            .collect();
        serde_json::json!({ "terms": terms })
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return writeln!(f, "0");
        }
        for (&(a, b), inner) in &self.terms {
            let parts: Vec<String> = inner.iter().map(|(e, c)| format!("{c} q^{e}")).collect();
            writeln!(f, "({}) * x^{a} y^{b}", parts.join(" + "))?;
        }
        Ok(())
    }
}

pub fn commutative_specialize(p: &NCPoly) -> CommPoly {
    let mut out = CommPoly::zero();
    for (w, c) in p.terms() {
        out.add_term(w.x_degree(), w.y_degree(), c.to_bigint());
    }
    out
}

/// Exponent `s` with `w = q^(e s) y^(deg_y) x^(deg_x)` under `x y = q^e y x`.
pub fn normal_order_exponent(w: &ReducedWord) -> i64 {
    let mut y_right = 0;
    let mut s = 0;
    for (g, e) in w.syllables().rev() {
        match g {
            Gen::Y => y_right += e,
            Gen::X => s += e * y_right,
        }
    }
    s
}

/// Image under `x y = q^e y x`, every word written as `y^b x^a`.
pub fn q_specialize(p: &NCPoly, e: i64) -> QPoly {
    let mut out = QPoly::default();
    for (w, c) in p.terms() {
        out.add_term(w.x_degree(), w.y_degree(), e * normal_order_exponent(w), c.to_bigint());
    }
    out
}

/// Commutative image of `x_n` accumulated straight from the formula's term
/// stream, never materializing the words.
pub fn commutative_from_formula(r: i64, n: i64) -> Result<(CommPoly, u64)> {
    let acc = fold_terms(
        r,
        n,
        FxHashMap::<(i64, i64), u64>::default,
        |acc, _, _, a, b| {
            let key = (a.iter().sum(), b.iter().sum());
            *acc.entry(key).or_default() += 1;
        },
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        },
    )?;
    let total = acc.values().sum();
    let mut out = CommPoly::zero();
    for ((a, b), c) in acc {
        out.add_term(a, b, BigInt::from(c));
    }
    Ok((out, total))
}

/// `x_0 = x`, `x_1 = y`, `x_(m+1) = (1 + x_m^r) / x_(m-1)`; returns
/// `x_0 ..= x_n`. Fails with `CapExceeded` when a power gets too large to
/// multiply out and with `InexactDivision` if a quotient is not Laurent.
pub fn cluster_sequence(r: i64, n: i64) -> Result<Vec<CommPoly>> {
    check_rank(r)?;
    if n < 0 {
        return Err(Error::InvalidIndex { n, min: 0 });
    }
    let mut seq = vec![CommPoly::x(), CommPoly::y()];
    while (seq.len() as i64) <= n {
        let m = seq.len() - 1;
        let num = seq[m].pow(r as u32)?.add(&CommPoly::one());
        seq.push(num.div_exact(&seq[m - 1])?);
    }
    seq.truncate(n as usize + 1);
    Ok(seq)
}

pub fn cluster_recurrence(r: i64, n: i64) -> Result<CommPoly> {
    Ok(cluster_sequence(r, n)?.pop().expect("nonempty sequence"))
}

/// Binomial closed form for the commutative `x_n` at `r = 2`.
pub fn cz_formula(n: i64) -> Result<CommPoly> {
    if n < 2 {
        return Err(Error::InvalidIndex { n, min: 2 });
    }
    let mut out = CommPoly::zero();
    for q in 0..=n - 1 {
        out.add_term(-n + 1, 2 * q - n + 2, binom(n - 1, q));
    }
    for p in 1..=n {
        for q in 0..=n {
            let c = binom(n - 2 - q, p) * binom(n - 1 - p, q);
            out.add_term(2 * p - n + 1, 2 * q - n + 2, c);
        }
    }
    Ok(out)
}

/// Number of `p`-subsets of `{2, ..., n-1}` with `t` maximal runs:
/// `C(p-1, t-1) C(n-1-p, t)`, and 1 for the empty subset.
pub fn subset_component_count(n: i64, p: i64, t: i64) -> Result<BigInt> {
    if n < 2 {
        return Err(Error::InvalidIndex { n, min: 2 });
    }
    if p == 0 {
        return Ok(BigInt::from(u8::from(t == 0)));
    }
    Ok(binom(p - 1, t - 1) * binom(n - 1 - p, t))
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::formula::assemble_xn;
    use crate::word::{Gen, ReducedWord};
    use proptest::prelude::*;

    #[test]
    fn formula_images_satisfy_the_exchange_relation() {
        for (r, top) in [(2, 9), (3, 4), (4, 4)] {
            let xs: Vec<CommPoly> = (0..=top)
                .map(|n| commutative_specialize(&assemble_xn(r, n).unwrap()))
                .collect();
            for m in 1..top as usize {
                let lhs = xs[m + 1].mul(&xs[m - 1]).unwrap();
                let rhs = xs[m].pow(r as u32).unwrap().add(&CommPoly::one());
                assert_eq!(lhs, rhs, "r={r} m={m}");
            }
        }
    }

    #[test]
    fn cz_matches_recurrence_to_14() {
        let seq = cluster_sequence(2, 14).unwrap();
        for n in 2..=14 {
            assert_eq!(cz_formula(n).unwrap(), seq[n as usize], "n={n}");
        }
    }

    fn poly() -> impl Strategy<Value = NCPoly> {
        let word = prop::collection::vec((any::<bool>(), -3i64..=3), 0..6).prop_map(|s| {
            ReducedWord::from_syllables(s.into_iter().map(|(isx, e)| (if isx { Gen::X } else { Gen::Y }, e)))
        });
        prop::collection::vec(word, 0..6).prop_map(NCPoly::from_words)
    }

    proptest! {
        #[test]
        fn q_at_zero_is_commutative(p in poly()) {
            let q = q_specialize(&p, 0);
            prop_assert_eq!(q.at_q_one(), commutative_specialize(&p));
            for (&(a, b), _) in commutative_specialize(&p).terms() {
                prop_assert!(q.coeff(a, b).keys().all(|&e| e == 0));
            }
        }

        #[test]
        fn q_images_agree_at_q_one(p in poly(), e in -3i64..=3) {
            prop_assert_eq!(q_specialize(&p, e).at_q_one(), commutative_specialize(&p));
        }

        #[test]
        fn exact_division_undoes_multiplication(
            a in prop::collection::vec((-3i64..=3, -3i64..=3, 1i64..=4), 1..5),
            b in prop::collection::vec((-3i64..=3, -3i64..=3, 1i64..=4), 1..5),
        ) {
            let build = |ts: &[(i64, i64, i64)]| {
                let mut p = CommPoly::zero();
                for &(x, y, c) in ts {
                    p.add_term(x, y, BigInt::from(c));
                }
                p
            };
            let (a, b) = (build(&a), build(&b));
            prop_assert_eq!(a.mul(&b).unwrap().div_exact(&b).unwrap(), a);
        }
    }
}
