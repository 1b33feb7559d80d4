//! Runs the Rust listings of the guide in `book/` and of the README as
//! doctests, one module per file so a failure points at its source.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/signals.md")]
pub mod signals {}
#[doc = include_str!("../../../book/src/stft.md")]
pub mod stft {}
#[doc = include_str!("../../../book/src/frames.md")]
pub mod frames {}
#[doc = include_str!("../../../book/src/bspline_duals.md")]
pub mod bspline_duals {}
#[doc = include_str!("../../../book/src/scans.md")]
pub mod scans {}
#[doc = include_str!("../../../book/src/wilson.md")]
pub mod wilson {}
#[doc = include_str!("../../../book/src/hrt.md")]
pub mod hrt {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
