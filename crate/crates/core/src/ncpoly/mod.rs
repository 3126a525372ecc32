//! Sparse non-commutative Laurent polynomials over the integers.
//!
//! A polynomial is a finite map from [`ReducedWord`] to nonzero [`Coeff`].
//! Storage is hashed; anything user-visible goes through
//! [`NCPoly::sorted_terms`], which uses the canonical word order.

mod subst;

use std::collections::hash_map::Entry;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::word::ReducedWord;

pub use subst::{
    apply_f_truncated, apply_g, auto_policy, min_branch_degree, stability_check, OracleReport, TruncationPolicy,
};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NCPoly {
    terms: FxHashMap<ReducedWord, Coeff>,
}

impl NCPoly {
    pub fn zero() -> Self {
        NCPoly::default()
    }

    pub fn one() -> Self {
        NCPoly::monomial(ReducedWord::identity(), Coeff::ONE)
    }

    pub fn x() -> Self {
        NCPoly::monomial(ReducedWord::x(), Coeff::ONE)
    }

    pub fn y() -> Self {
        NCPoly::monomial(ReducedWord::y(), Coeff::ONE)
    }

    pub fn monomial(word: ReducedWord, coeff: Coeff) -> Self {
        let mut p = NCPoly::zero();
        p.add_term(word, &coeff);
        p
    }

    pub fn with_capacity(n: usize) -> Self {
        NCPoly {
            terms: FxHashMap::with_capacity_and_hasher(n, Default::default()),
        }
    }

    /// Sum of the given words, each with coefficient one.
    pub fn from_words<I: IntoIterator<Item = ReducedWord>>(words: I) -> Self {
        let mut p = NCPoly::zero();
        for w in words {
            p.add_term(w, &Coeff::ONE);
        }
        p
    }

    pub fn add_term(&mut self, word: ReducedWord, coeff: &Coeff) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(coeff.clone());
            }
        }
    }

    pub(crate) fn from_raw(mut terms: FxHashMap<ReducedWord, Coeff>) -> Self {
        terms.retain(|_, c| !c.is_zero());
        NCPoly { terms }
    }

    /// Number of nonzero terms.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, word: &ReducedWord) -> Coeff {
        self.terms.get(word).cloned().unwrap_or_default()
    }

    pub fn contains(&self, word: &ReducedWord) -> bool {
        self.terms.contains_key(word)
    }

    /// Terms in arbitrary order.
    pub fn terms(&self) -> impl Iterator<Item = (&ReducedWord, &Coeff)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (ReducedWord, Coeff)> {
        self.terms.into_iter()
    }

    /// Terms in canonical word order.
    pub fn sorted_terms(&self) -> Vec<(&ReducedWord, &Coeff)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_unstable_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn add(&self, other: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &NCPoly) {
        for (w, c) in &other.terms {
            self.add_term(w.clone(), c);
        }
    }

    pub fn neg(&self) -> NCPoly {
        NCPoly {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &NCPoly) -> NCPoly {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, k: &Coeff) -> NCPoly {
        if k.is_zero() {
            return NCPoly::zero();
        }
        NCPoly {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &NCPoly) -> NCPoly {
        let mut out = NCPoly::with_capacity(self.len() * other.len());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.mul(b), &(ca * cb));
            }
        }
        out
    }

    /// Largest `|total y-degree|` over the terms, or `None` for zero.
    pub fn max_abs_y_degree(&self) -> Option<i64> {
        self.terms.keys().map(|w| w.y_degree().abs()).max()
    }

    /// The terms whose total y-degree lies in `[-bound, bound]`.
    pub fn y_window(&self, bound: i64) -> NCPoly {
        NCPoly {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.y_degree().abs() <= bound)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn all_coefficients_one(&self) -> bool {
        self.terms.values().all(Coeff::is_one)
    }

    /// One line per term, `<coeff> * <word>`, in canonical order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (w, c) in self.sorted_terms() {
            s.push_str(&format!("{c} * {w}\n"));
        }
        s
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            terms: self
                .sorted_terms()
                .into_iter()
                .map(|(w, c)| TermJson {
                    word: w.to_string(),
                    coeff: c.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<NCPoly> {
        let mut p = NCPoly::zero();
        for t in &j.terms {
            let w: ReducedWord = t.word.parse()?;
            let c: Coeff = t.coeff.parse()?;
            p.add_term(w, &c);
        }
        Ok(p)
    }

    /// First place where two polynomials differ, in canonical order:
    /// the word and the two coefficients.
    pub fn first_difference(&self, other: &NCPoly) -> Option<(ReducedWord, Coeff, Coeff)> {
        let mut keys: Vec<&ReducedWord> = self
            .terms
            .keys()
            .chain(other.terms.keys().filter(|w| !self.terms.contains_key(*w)))
            .collect();
        keys.sort_unstable();
        keys.into_iter().find_map(|w| {
            let (a, b) = (self.coeff(w), other.coeff(w));
            (a != b).then(|| (w.clone(), a, b))
        })
    }
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.sorted_terms().into_iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*({w})")?;
        }
        Ok(())
    }
}

/// JSON form: `{"terms":[{"word":"x^1 y^1 x^-1","coeff":"1"}, ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub word: String,
    pub coeff: String,
}

impl std::str::FromStr for NCPoly {
    type Err = Error;

    /// Parses the JSON form.
    fn from_str(s: &str) -> Result<Self> {
        let j: PolyJson = serde_json::from_str(s).map_err(|e| Error::ParseWord {
            token: s.chars().take(40).collect(),
            reason: e.to_string(),
        })?;
        NCPoly::from_json(&j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rw(s: &str) -> ReducedWord {
        s.parse().unwrap()
    }

    fn poly(words: &[&str]) -> NCPoly {
        NCPoly::from_words(words.iter().map(|s| rw(s)))
    }

    #[test]
    fn x_times_y() {
        let p = NCPoly::x().mul(&NCPoly::y());
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(&rw("x^1 y^1")), Coeff::ONE);
    }

    #[test]
    fn add_negation_is_zero() {
        let p = poly(&["x^1 y^2", "y^-1", "1"]);
        assert!(p.add(&p.neg()).is_zero());
        assert!(p.sub(&p).is_zero());
    }

    #[test]
    fn distributes_over_two_terms() {
        let a = poly(&["x^1 y^1 x^-1"]);
        let b = poly(&["x^-1", "y^3 x^-1"]);
        let p = a.mul(&b);
        assert_eq!(p, poly(&["x^1 y^1 x^-2", "x^1 y^1 x^-1 y^3 x^-1"]));
    }

    #[test]
    fn cancellation_in_product_drops_terms() {
        let a = poly(&["x^1", "y^1"]);
        let b = NCPoly::monomial(rw("x^-1"), Coeff::ONE).sub(&NCPoly::monomial(rw("y^-1"), Coeff::ONE));
        // (x + y)(x^-1 - y^-1) = 1 - x y^-1 + y x^-1 - 1
        let p = a.mul(&b);
        assert_eq!(p.len(), 2);
        assert_eq!(p.coeff(&ReducedWord::identity()), Coeff::ZERO);
    }

    #[test]
    fn scalar_mul_by_zero() {
        assert!(poly(&["x^1"]).scalar_mul(&Coeff::ZERO).is_zero());
        assert_eq!(
            poly(&["x^1"]).scalar_mul(&Coeff::from(3)).coeff(&rw("x^1")),
            Coeff::from(3)
        );
    }

    #[test]
    fn json_round_trip_and_order() {
        let p = poly(&["y^1", "x^1 y^1 x^-1", "x^-1"]);
        let j = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(
            j,
            r#"{"terms":[{"word":"x^-1","coeff":"1"},{"word":"x^1 y^1 x^-1","coeff":"1"},{"word":"y^1","coeff":"1"}]}"#
        );
        assert_eq!(j.parse::<NCPoly>().unwrap(), p);
    }

    #[test]
    fn text_format() {
        let p = poly(&["y^1", "x^1"]).add(&poly(&["x^1"]));
        assert_eq!(p.to_text(), "2 * x^1\n1 * y^1\n");
    }

    #[test]
    fn first_difference_reports_both_sides() {
        let p = poly(&["x^1", "y^1"]);
        let q = poly(&["x^1", "y^2"]);
        let (w, a, b) = p.first_difference(&q).unwrap();
        assert_eq!(w, rw("y^1"));
        assert_eq!((a, b), (Coeff::ONE, Coeff::ZERO));
        assert!(p.first_difference(&p).is_none());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::word::Gen;
    use proptest::prelude::*;

    fn poly() -> impl Strategy<Value = NCPoly> {
        let word = prop::collection::vec((any::<bool>(), -2i64..=2), 0..4).prop_map(|s| {
            ReducedWord::from_syllables(s.into_iter().map(|(isx, e)| (if isx { Gen::X } else { Gen::Y }, e)))
        });
        prop::collection::vec((word, -3i64..=3), 0..5).prop_map(|terms| {
            let mut p = NCPoly::zero();
            for (w, c) in terms {
                p.add_term(w, &Coeff::from(c));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn mul_is_associative(a in poly(), b in poly(), c in poly()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn add_is_commutative(a in poly(), b in poly()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert!(a.sub(&a).is_zero());
        }

        #[test]
        fn mul_distributes(a in poly(), b in poly(), c in poly()) {
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn g_is_multiplicative(a in poly(), b in poly(), r in 2i64..=4) {
            prop_assert_eq!(apply_g(&a.mul(&b), r), apply_g(&a, r).mul(&apply_g(&b, r)));
        }

        #[test]
        fn serial_round_trips(a in poly()) {
            prop_assert_eq!(NCPoly::from_json(&a.to_json()).unwrap(), a.clone());
            let text = serde_json::to_string(&a.to_json()).unwrap();
            prop_assert_eq!(text.parse::<NCPoly>().unwrap(), a);
        }
    }
}
