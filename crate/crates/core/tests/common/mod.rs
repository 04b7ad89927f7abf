#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use stokes_core::geometry::all_turning_points;
use stokes_core::symbol::{airy_symbol, bnr_symbol};
use stokes_core::{
    build_geometry_with, Complex, GeometryConfig, NYProblem, Region, RootSurface, StokesGeometry,
    SymbolProblem, Tolerances, TurningPoint,
};

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn symbol_fixture(name: &str) -> SymbolProblem {
    SymbolProblem::from_json(&fixture_text(name)).expect("valid symbol fixture")
}

pub fn ny_fixture() -> NYProblem {
    NYProblem::from_json(&fixture_text("ny_example.json")).expect("valid NY fixture")
}

pub fn bnr_region() -> Region {
    Region::square(3.0)
}

pub fn bnr_surface() -> &'static RootSurface {
    static S: OnceLock<RootSurface> = OnceLock::new();
    S.get_or_init(|| RootSurface::new(bnr_symbol(), bnr_region(), Tolerances::default()).unwrap())
}

pub fn airy_surface() -> &'static RootSurface {
    static S: OnceLock<RootSurface> = OnceLock::new();
    S.get_or_init(|| RootSurface::new(airy_symbol(), Region::square(2.0), Tolerances::default()).unwrap())
}

/// Ordinary plus virtual turning points of the BNR symbol on `[-3, 3]^2`.
pub fn bnr_tps() -> &'static [TurningPoint] {
    static T: OnceLock<Vec<TurningPoint>> = OnceLock::new();
    T.get_or_init(|| all_turning_points(bnr_surface(), 2).unwrap())
}

pub fn bnr_geometry(theta: f64) -> StokesGeometry {
    build_geometry_with(bnr_surface(), bnr_tps(), &GeometryConfig::new(theta, bnr_region()))
}

pub fn bnr_geometry_at_zero() -> &'static StokesGeometry {
    static G: OnceLock<StokesGeometry> = OnceLock::new();
    G.get_or_init(|| bnr_geometry(0.0))
}

/// Distance from `z` to the polyline.
pub fn polyline_distance(points: &[Complex], z: Complex) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let len2 = d.norm_sqr();
            let s = if len2 == 0.0 { 0.0 } else { ((z - w[0]) * d.conj()).re / len2 };
            (w[0] + d * s.clamp(0.0, 1.0) - z).norm()
        })
        .fold(f64::INFINITY, f64::min)
}
