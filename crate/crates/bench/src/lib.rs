//! Benchmark inputs shared by the criterion targets.

use stokes_core::symbol::bnr_symbol;
use stokes_core::{Region, RootSurface, Tolerances};

/// `xi^3 + 3 xi + 2 i x` over `[-3, 3]^2`.
pub fn bnr_surface() -> RootSurface {
    RootSurface::new(bnr_symbol(), Region::square(3.0), Tolerances::default()).expect("surface")
}
