//! Iterates of the Kontsevich automorphism `x -> x y x^-1`,
//! `y -> (1 + y^r) x^-1` as explicit non-commutative Laurent polynomials.
//!
//! [`formula::assemble_xn`] builds `x_n` from a closed combinatorial
//! expansion. The other modules are there to check it: [`ncpoly`] applies the
//! map directly with a truncated series for `(1 + y^r)^-1`, [`special`]
//! compares commutative images with the exchange recurrence, and [`verify`]
//! runs the comparisons and reports.

pub mod coeff;
pub mod combinator;
pub mod error;
pub mod formula;
pub mod ncpoly;
pub mod special;
pub mod verify;
pub mod word;

pub use coeff::Coeff;
pub use combinator::{b_row, c_seq, f_map, g_transform, is_exceptional, z_word, BContext, ExcString, PosSet};
pub use error::{Error, Result};
pub use formula::{
    assemble_xn, count_terms, enumerate_r2, expand_f_tilde, gate_plan, restrict_fz, GatePlan, Restriction,
};
pub use ncpoly::{apply_f_truncated, apply_g, stability_check, NCPoly, OracleReport, TruncationPolicy};
pub use special::{cluster_recurrence, commutative_specialize, cz_formula, q_specialize, CommPoly, QPoly};
pub use verify::{Status, VerifyReport};
pub use word::{Gen, ReducedWord, TwoRowWord};
