//! Finite-dimensional Gabor analysis on a centered periodic grid.
//!
//! Signals are complex samples on a [`SampleGrid`]; norms and inner products
//! carry the sampling step so they approximate `L^2(R)` quantities.

pub mod bspline_dual;
pub mod compact;
mod error;
pub mod export;
mod fft;
pub mod frame;
pub mod grid;
pub mod hrt;
pub mod lattice;
pub mod region;
pub mod scan;
pub mod signal;
pub mod stft;
pub mod wilson;
pub mod window;
pub mod zak;

pub use error::{Error, Result};
pub use grid::SampleGrid;
pub use signal::{inner, Signal, TFPoint};
pub use window::{sample_window, sample_window_with_tolerance, WindowFamily, WindowSpec};
pub use stft::{stft, stft_energy, stft_invert, PhaseSpaceField};
pub use frame::{
    analysis, canonical_dual, canonical_tight, frame_apply, frame_bounds, least_norm_check, synthesis,
    CoefficientArray, FrameReport,
};
pub use lattice::{make_lattice, Lattice, SnappedLattice};
pub use zak::{zak, zak_tightness, ZakMatrix, ZakProfile};
pub use bspline_dual::{bspline_compact_dual, compact_dual_on_grid, BlockSize, CompactDual};
pub use compact::{janssen_residual, CompactSignal};
pub use region::{classify_point_g2, FrameClass, RegionLabel};
pub use scan::{scan_frame_set, FrameSetMap, Range};
pub use wilson::{
    build_wilson_classical, build_wilson_general, make_wilson_window, wilson_onb_report, wilson_parseval_residual,
    zak_onb_criterion, WilsonReading, WilsonSystem,
};
pub use hrt::{
    classify_configuration, extension_field, extension_integral, gramian, independence_probe, normalize_configuration,
    schur_identity_check, Configuration, ExtensionField, GramianReport,
};
