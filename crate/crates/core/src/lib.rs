//! Gap-sum degree of compact null sets on the line, and an explicit
//! construction of smooth functions `f: R^n -> R` whose critical values
//! contain a prescribed set.
//!
//! Modules, bottom up:
//! - [`gapset`]: compact sets as hull + gaps, degree sums, Hölder quotients.
//! - [`sfc`]: n-dimensional Hilbert curve with dyadic cube codecs.
//! - [`cantor`]: the nested cube system and its geometric schedule.
//! - [`target`]: exponent sequences and the block decomposition of the target.
//! - [`builder`]: plateau extension, derivatives, verification, tiling.
//! - [`cli`]: command-line front end.

pub mod builder;
pub mod cantor;
pub mod cli;
pub mod gapset;
pub mod numeric;
pub mod sfc;
pub mod target;
