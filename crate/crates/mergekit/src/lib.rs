//! Three-way merge tools and an evaluation harness.
//!
//! The library side provides:
//!
//! * [`textmodel`] — lines, terminators, whitespace-normalized comparison
//!   keys, and the character explosion used by the hires strategy.
//! * [`align`] — Myers line diff and three-way chunking of
//!   (base, left, right) into stable and changed regions.
//! * [`mergecore`] — the classic four-case resolution over chunks plus
//!   conflict rendering and parsing in merge/diff3/zdiff3 styles.
//! * [`strategies`] — the tool zoo: hires (character level), adjacent
//!   (non-overlapping edits on adjacent lines), imports, version-numbers,
//!   and their composition ivn, behind a named registry.
//! * [`evalharness`] — correct/incorrect/unhandled classification with
//!   fixup reclassification, the effort-reduction cost model, pairwise
//!   distinct-clean-merge matrices, and runtime statistics.
//! * [`corpus`] — on-disk scenario corpora, the built-in golden suite,
//!   and report serialization.
//!
//! The `mergekit` binary wraps all of this as a merge driver
//! (`mergekit merge`), a conflict fixup pass (`mergekit fixup`), and a
//! batch evaluation harness (`mergekit eval`).

pub mod align;
pub mod corpus;
pub mod error;
pub mod evalharness;
pub mod mergecore;
pub mod strategies;
pub mod textmodel;

pub use error::{Error, Result};
