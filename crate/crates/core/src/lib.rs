//! Exact-WKB Stokes geometry for higher-order linear ODE symbols.
//!
//! The crate locates ordinary and virtual turning points of a characteristic
//! symbol `P(x, xi)`, traces Stokes curves `Im e^{i theta} (xi_j - xi_k) dx = 0`
//! from them, classifies which portions carry Stokes phenomena, and detects
//! topology changes of the Stokes graph as `theta = arg eta` or an external
//! parameter varies.

pub mod error;
pub mod exact;
pub mod geometry;
pub mod io;
pub mod noumi_yamada;
pub mod poly;
mod quadrature;
pub mod svg;
pub mod surface;
pub mod symbol;
pub mod tracer;
pub mod virtual_tp;

pub use error::{Result, WkbError};
pub use poly::XPolynomial;
pub use surface::{
    ordinary_turning_points, track_roots, RootSet, RootSurface, Tolerances, TpKind, TurningPoint,
};
pub use symbol::{eval_roots, CharSymbol, Region};
pub use geometry::{
    build_geometry, build_geometry_with, classify_activity, critical_angles, role_switch,
    sweep_theta, BuildOptions, Crossing, Degeneracy, DegeneracyKind, EventKind, Signature,
    StokesGeometry, SweepEvent, SweepResult,
};
pub use noumi_yamada::{
    continue_f, leading_order_f, ny_char_symbol, t_path_scan, NYParams, NYState, ScanOptions,
};
pub use tracer::{
    seed_directions, trace_curve, trace_from, ActivitySpan, GeometryConfig, StokesCurve,
    Termination,
};
pub use io::{parse_geometry, serialize_geometry, GeometryDocument, NYProblem, SymbolProblem};
pub use svg::{render_svg, RenderStyle};
pub use virtual_tp::{find_virtual_tps, vtp_residual, VtpProblem};

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
