//! Fractional-permission inference for array programs.
//!
//! [`infer::infer_method`] computes, for a parsed method, a permission
//! precondition and postcondition over the distinguished location
//! variables `qa` and `qi`. Loops are summarised by pointwise maxima, which
//! [`maxelim`] eliminates. [`oracle`] holds the ground-truth engines used
//! to test all of this. The guide in `book/` walks through each module.

pub mod approx;
pub mod expr;
pub mod frontend;
pub mod infer;
pub mod invariants;
pub mod maxelim;
pub mod oracle;
pub mod simplify;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/language.md")]
    mod language {}
    #[doc = include_str!("../../../book/src/permissions.md")]
    mod permissions {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/elimination.md")]
    mod elimination {}
    #[doc = include_str!("../../../book/src/invariants.md")]
    mod invariants {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
