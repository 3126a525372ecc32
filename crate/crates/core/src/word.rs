//! Monomials in the free group on `x`, `y`.
//!
//! Two representations are used. [`TwoRowWord`] is the row presentation
//! `y^b0 x^a1 y^b1 ... y^b(m-1) x^am`, where zero exponents are allowed and
//! carry positional meaning for the formula. [`ReducedWord`] is the free
//! group normal form (alternating generators, nonzero exponents) and is the
//! only thing ever used as a polynomial key.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gen {
    X,
    Y,
}

impl Gen {
    pub fn other(self) -> Gen {
        match self {
            Gen::X => Gen::Y,
            Gen::Y => Gen::X,
        }
    }

    fn letter(self) -> char {
        match self {
            Gen::X => 'x',
            Gen::Y => 'y',
        }
    }
}

/// Row presentation of a monomial. `alpha` holds the x-exponents
/// `a1..am`, `beta` the y-exponents `b0..b(m-1)`; both rows have length `m`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoRowWord {
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
}

impl TwoRowWord {
    pub fn new(alpha: Vec<i64>, beta: Vec<i64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::RowMismatch {
                alpha: alpha.len(),
                beta: beta.len(),
            });
        }
        Ok(TwoRowWord { alpha, beta })
    }

    pub fn identity() -> Self {
        TwoRowWord::default()
    }

    /// Number of columns `m`.
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn concat(&self, other: &TwoRowWord) -> TwoRowWord {
        let mut alpha = Vec::with_capacity(self.len() + other.len());
        alpha.extend_from_slice(&self.alpha);
        alpha.extend_from_slice(&other.alpha);
        let mut beta = Vec::with_capacity(self.len() + other.len());
        beta.extend_from_slice(&self.beta);
        beta.extend_from_slice(&other.beta);
        TwoRowWord { alpha, beta }
    }

    /// Syllables in reading order, zeros included.
    pub fn syllables(&self) -> impl Iterator<Item = (Gen, i64)> + '_ {
        self.beta
            .iter()
            .zip(&self.alpha)
            .flat_map(|(&b, &a)| [(Gen::Y, b), (Gen::X, a)])
    }

    pub fn reduce(&self) -> ReducedWord {
        ReducedWord::from_syllables(self.syllables())
    }

    pub fn x_degree(&self) -> i64 {
        self.alpha.iter().sum()
    }

    pub fn y_degree(&self) -> i64 {
        self.beta.iter().sum()
    }
}

impl fmt::Display for TwoRowWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |v: &[i64]| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "alpha=[{}] beta=[{}]", row(&self.alpha), row(&self.beta))
    }
}

/// Free group normal form. The first generator plus the exponent list
/// determine the word, since generators alternate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    lead: Gen,
    exps: Box<[i32]>,
}

fn narrow(e: i64) -> i32 {
    i32::try_from(e).expect("word exponent exceeds the i32 range")
}

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord {
            lead: Gen::X,
            exps: Box::new([]),
        }
    }

    pub fn generator(g: Gen, e: i64) -> Self {
        ReducedWord::from_syllables([(g, e)])
    }

    pub fn x() -> Self {
        ReducedWord::generator(Gen::X, 1)
    }

    pub fn y() -> Self {
        ReducedWord::generator(Gen::Y, 1)
    }

    /// Multiplies out a sequence of generator powers and reduces.
    pub fn from_syllables<I>(syllables: I) -> Self
    where
        I: IntoIterator<Item = (Gen, i64)>,
    {
        let mut stack = WordStack::new();
        for (g, e) in syllables {
            stack.push(g, e);
        }
        stack.to_word()
    }

    pub fn is_identity(&self) -> bool {
        self.exps.is_empty()
    }

    /// Number of syllables.
    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn syllables(&self) -> impl DoubleEndedIterator<Item = (Gen, i64)> + ExactSizeIterator + '_ {
        let lead = self.lead;
        self.exps.iter().enumerate().map(move |(i, &e)| {
            let g = if i % 2 == 0 { lead } else { lead.other() };
            (g, i64::from(e))
        })
    }

    pub fn mul(&self, other: &ReducedWord) -> ReducedWord {
        ReducedWord::from_syllables(self.syllables().chain(other.syllables()))
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord::from_syllables(self.syllables().rev().map(|(g, e)| (g, -e)))
    }

    pub fn x_degree(&self) -> i64 {
        self.syllables().filter(|(g, _)| *g == Gen::X).map(|(_, e)| e).sum()
    }

    pub fn y_degree(&self) -> i64 {
        self.syllables().filter(|(g, _)| *g == Gen::Y).map(|(_, e)| e).sum()
    }

    /// Minimal row presentation; a trailing y-power gets a padding `x^0`.
    pub fn to_two_row(&self) -> TwoRowWord {
        let mut alpha = Vec::with_capacity(self.len() / 2 + 1);
        let mut beta = Vec::with_capacity(self.len() / 2 + 1);
        let mut pending_y = 0;
        for (g, e) in self.syllables() {
            match g {
                Gen::Y => pending_y = e,
                Gen::X => {
                    beta.push(pending_y);
                    alpha.push(e);
                    pending_y = 0;
                }
            }
        }
        if pending_y != 0 {
            beta.push(pending_y);
            alpha.push(0);
        }
        TwoRowWord { alpha, beta }
    }
}

impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.syllables().cmp(other.syllables())
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("1");
        }
        for (i, (g, e)) in self.syllables().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}^{}", g.letter(), e)?;
        }
        Ok(())
    }
}

impl FromStr for ReducedWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut stack = WordStack::new();
        let mut any = false;
        for token in s.split_whitespace() {
            any = true;
            if token == "1" {
                continue;
            }
            let bad = |reason: &str| Error::ParseWord {
                token: token.to_string(),
                reason: reason.to_string(),
            };
            let (base, exp) = token
                .split_once('^')
                .ok_or_else(|| bad("expected x^<int> or y^<int>"))?;
            let g = match base {
                "x" => Gen::X,
                "y" => Gen::Y,
                _ => return Err(bad("generator must be x or y")),
            };
            let e: i32 = exp.parse().map_err(|_| bad("exponent is not a 32-bit integer"))?;
            stack.push(g, i64::from(e));
        }
        if !any {
            return Err(Error::ParseWord {
                token: s.to_string(),
                reason: "empty input; use 1 for the identity".to_string(),
            });
        }
        Ok(stack.to_word())
    }
}

/// Record of what a [`WordStack::push`] did, so it can be rolled back.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Undo {
    Noop,
    Pushed,
    Merged(i64),
    Cancelled(Gen, i64),
}

/// A word under construction, freely reduced after every push. Pushes can be
/// undone in reverse order, which lets depth-first expansions share prefixes.
#[derive(Clone, Debug, Default)]
pub(crate) struct WordStack {
    syllables: Vec<(Gen, i64)>,
}

impl WordStack {
    pub(crate) fn new() -> Self {
        WordStack::default()
    }

    pub(crate) fn clear(&mut self) {
        self.syllables.clear();
    }

    pub(crate) fn push(&mut self, g: Gen, e: i64) -> Undo {
        if e == 0 {
            return Undo::Noop;
        }
        match self.syllables.last_mut() {
            Some(top) if top.0 == g => {
                let prev = top.1;
                let merged = prev.checked_add(e).expect("word exponent overflow");
                if merged == 0 {
                    self.syllables.pop();
                    Undo::Cancelled(g, prev)
                } else {
                    top.1 = merged;
                    Undo::Merged(prev)
                }
            }
            _ => {
                self.syllables.push((g, e));
                Undo::Pushed
            }
        }
    }

    pub(crate) fn undo(&mut self, u: Undo) {
        match u {
            Undo::Noop => {}
            Undo::Pushed => {
                self.syllables.pop();
            }
            Undo::Merged(prev) => {
                self.syllables.last_mut().expect("undo on empty stack").1 = prev;
            }
            Undo::Cancelled(g, prev) => self.syllables.push((g, prev)),
        }
    }

    pub(crate) fn to_word(&self) -> ReducedWord {
        match self.syllables.first() {
            None => ReducedWord::identity(),
            Some(&(lead, _)) => ReducedWord {
                lead,
                exps: self.syllables.iter().map(|&(_, e)| narrow(e)).collect(),
            },
        }
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn two_row() -> impl Strategy<Value = TwoRowWord> {
        (0usize..7).prop_flat_map(|m| {
            (prop::collection::vec(-3i64..=3, m), prop::collection::vec(-3i64..=3, m))
                .prop_map(|(alpha, beta)| TwoRowWord::new(alpha, beta).unwrap())
        })
    }

    fn reduced() -> impl Strategy<Value = ReducedWord> {
        prop::collection::vec((any::<bool>(), -3i64..=3), 0..8).prop_map(|s| {
            ReducedWord::from_syllables(s.into_iter().map(|(isx, e)| (if isx { Gen::X } else { Gen::Y }, e)))
        })
    }

    proptest! {
        #[test]
        fn two_row_round_trip(r in reduced()) {
            prop_assert_eq!(r.to_two_row().reduce(), r);
        }

        #[test]
        fn reduce_is_a_homomorphism(a in two_row(), b in two_row()) {
            prop_assert_eq!(a.concat(&b).reduce(), a.reduce().mul(&b.reduce()));
        }

        #[test]
        fn concat_is_associative(a in two_row(), b in two_row(), c in two_row()) {
            prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
        }

        #[test]
        fn product_is_associative_with_inverses(a in reduced(), b in reduced(), c in reduced()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert!(a.mul(&a.inverse()).is_identity());
            prop_assert_eq!(a.mul(&b).y_degree(), a.y_degree() + b.y_degree());
        }

        #[test]
        fn text_round_trip(a in reduced()) {
            prop_assert_eq!(a.to_string().parse::<ReducedWord>().unwrap(), a);
        }
    }
}
