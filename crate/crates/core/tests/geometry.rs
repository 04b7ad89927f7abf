//! Geometry assembly, activity classification, critical angles and sweeps.

mod common;

use common::*;
use std::f64::consts::PI;
use stokes_core::geometry::{all_critical_angles, critical_angles_of, DegeneracyKind, EventKind};
use stokes_core::symbol::airy_symbol;
use stokes_core::{
    build_geometry, build_geometry_with, classify_activity, critical_angles, role_switch, sweep_theta,
    BuildOptions, Complex, GeometryConfig, Region, StokesGeometry, TpKind,
};

fn virtual_curve(g: &StokesGeometry) -> usize {
    g.curves.iter().position(|c| c.is_virtual()).expect("a curve from the virtual point")
}

/// Positions along curve `ci` where its activity flips.
fn toggles(g: &StokesGeometry, ci: usize) -> Vec<f64> {
    let spans = &g.curves[ci].activity;
    spans.windows(2).filter(|w| w[0].active != w[1].active).map(|w| w[0].to).collect()
}

fn toggle_points(g: &StokesGeometry, ci: usize) -> Vec<Complex> {
    let pts = &g.curves[ci].points;
    toggles(g, ci)
        .into_iter()
        .map(|pos| {
            let i = (pos.floor() as usize).min(pts.len() - 2);
            pts[i] + (pts[i + 1] - pts[i]) * (pos - i as f64)
        })
        .collect()
}

#[test]
fn bnr_geometry_at_theta_zero() {
    let g = bnr_geometry_at_zero();
    assert_eq!(g.count_tps(TpKind::Ordinary), 2);
    assert_eq!(g.count_tps(TpKind::Virtual), 1);
    assert_eq!(g.curves.len(), 7);
    for (i, tp) in g.turning_points.iter().enumerate() {
        let n = g.curves_from(i).count();
        assert_eq!(n, if tp.kind == TpKind::Ordinary { 3 } else { 1 });
    }
    assert!(g.degeneracies.is_empty(), "{:?}", g.degeneracies);
    assert!(g.failures.is_empty());
    for c in &g.curves {
        assert!(c.level_error(0.0) <= g.config.tol_level);
    }
}

/// `Im e^{i theta} y` at `loc`, integrating from the curve's source along its
/// own polyline up to the segment holding `pos`.
fn level_at(g: &StokesGeometry, ci: usize, pos: f64, loc: Complex) -> f64 {
    let curve = &g.curves[ci];
    let sp = curve.source_point;
    let i = pos.floor() as usize;
    let mut path: Vec<Complex> =
        if i >= sp { curve.points[sp..=i].to_vec() } else { curve.points[i + 1..=sp].iter().rev().copied().collect() };
    path.push(loc);
    let vals = bnr_surface().integrate_all(&path).unwrap();
    let rot = Complex::from_polar(1.0, g.theta);
    // the curve's labels and those of the integral may differ by a permutation
    let mut best = f64::INFINITY;
    for p in 0..vals.len() {
        for q in 0..vals.len() {
            if p != q && (vals[p] - vals[q]).norm() > 1e-3 {
                best = best.min((rot * (vals[p] - vals[q])).im.abs());
            }
        }
    }
    best
}

#[test]
fn crossings_lie_on_both_curves() {
    let g = bnr_geometry_at_zero();
    assert!(!g.crossings.is_empty());
    for x in &g.crossings {
        for (ci, pos) in [(x.curves.0, x.positions.0), (x.curves.1, x.positions.1)] {
            // on the traced polyline up to its chord error
            assert!(polyline_distance(&g.curves[ci].points, x.location) < 1e-4);
            // and on the exact level curve
            let level = level_at(g, ci, pos, x.location);
            assert!(level <= 10.0 * g.config.tol_level, "{level} at {x:?}");
        }
    }
}

#[test]
fn bnr_virtual_curve_inactive_between_crossings() {
    let g = bnr_geometry_at_zero();
    let vi = virtual_curve(g);
    let curve = &g.curves[vi];
    let t = toggles(g, vi);
    assert_eq!(t.len(), 2, "{:?}", curve.activity);
    // inactive in the middle (through the virtual point), active outside
    assert!(curve.active_at(0.0));
    assert!(!curve.active_at(curve.source_point as f64));
    assert!(curve.active_at(curve.end_position()));
    // both toggles sit on crossings with curves from ordinary points
    let crossing_locs: Vec<Complex> = g
        .crossings_of(vi)
        .filter(|x| {
            let other = if x.curves.0 == vi { x.curves.1 } else { x.curves.0 };
            !g.curves[other].is_virtual()
        })
        .map(|x| x.location)
        .collect();
    for p in toggle_points(g, vi) {
        assert!(crossing_locs.iter().any(|l| (l - p).norm() < 1e-9));
    }
    // ordinary curves are fully active
    assert!(g.curves.iter().filter(|c| !c.is_virtual()).all(|c| c.activity.iter().all(|s| s.active)));
}

#[test]
fn virtual_curve_without_crossings_is_inactive() {
    let mut g = bnr_geometry_at_zero().clone();
    g.crossings.clear();
    classify_activity(&mut g);
    let vi = virtual_curve(&g);
    assert!(g.curves[vi].activity.iter().all(|s| !s.active));
}

#[test]
fn airy_geometry() {
    let g = build_geometry(&airy_symbol(), &GeometryConfig::new(0.0, Region::square(2.0)), &BuildOptions::default())
        .unwrap();
    assert_eq!(g.turning_points.len(), 1);
    assert_eq!(g.curves.len(), 3);
    assert!(g.crossings.is_empty());
    assert!(g.degeneracies.is_empty());
    assert!(g.curves.iter().all(|c| c.activity.iter().all(|s| s.active)));
}

#[test]
fn bnr_connection_at_half_pi() {
    let g = bnr_geometry(PI / 2.0);
    let connections: Vec<_> = g.degeneracies.iter().filter(|d| d.kind == DegeneracyKind::Connection).collect();
    assert!(!connections.is_empty());
    // a curve from a reaching b is matched by a curve from b reaching a
    for d in &g.degeneracies {
        assert!(g.degeneracies.iter().any(|e| e.from == d.to && e.to == d.from), "{:?}", g.degeneracies);
    }
}

fn bnr_connection_angles() -> Vec<f64> {
    let s = bnr_surface();
    let tps = s.turning_points();
    let path = s.straight_path(tps[0].location, tps[1].location).unwrap();
    let mut out = Vec::new();
    for pair in [tps[0].pair, tps[1].pair] {
        out.extend(critical_angles(s, pair, &path).unwrap());
    }
    out
}

#[test]
fn bnr_critical_angle_is_half_pi() {
    let angles = bnr_connection_angles();
    assert!(angles.iter().any(|a| (a - PI / 2.0).abs() <= 1e-6), "{angles:?}");
    assert!(angles.iter().all(|a| (0.0..2.0 * PI).contains(a)));
}

#[test]
fn critical_angles_are_scale_invariant_and_pi_apart() {
    for v in [Complex::new(1.0, 2.0), Complex::new(-0.3, 0.1), Complex::new(0.0, -5.0)] {
        let a = critical_angles_of(v, 1e-13).unwrap();
        let b = critical_angles_of(2.0 * v, 1e-13).unwrap();
        assert_eq!(a.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((a[1] - a[0] - PI).abs() < 1e-15);
        for t in &a {
            assert!((Complex::from_polar(1.0, *t) * v).im.abs() < 1e-12 * v.norm());
        }
    }
    assert!(critical_angles_of(Complex::new(0.0, 0.0), 1e-13).is_err());
}

#[test]
fn bnr_sweep_detects_one_connection_at_half_pi() {
    let s = bnr_surface();
    let tps = bnr_tps();
    let config = GeometryConfig::new(0.0, bnr_region());
    let sweep = sweep_theta(s, tps, 5.0 * PI / 12.0, 7.0 * PI / 12.0, 25, &config).unwrap();
    let hits: Vec<_> = sweep.events.iter().filter(|e| e.kind == EventKind::TpHit).collect();
    assert_eq!(hits.len(), 1, "{:#?}", sweep.events.iter().map(|e| (e.theta, e.kind)).collect::<Vec<_>>());
    let e = hits[0];
    assert!((e.theta - PI / 2.0).abs() <= 1e-6, "{}", e.theta);
    assert!(bnr_connection_angles().iter().any(|a| (a - e.theta).abs() <= 1e-6));
    assert_ne!(e.before.crossing_order, e.after.crossing_order);
    // turning points are computed once for the whole sweep
    assert_eq!(sweep.turning_points, tps);
    assert!(sweep.samples.iter().all(|s| s.signature.is_some()));
}

#[test]
fn role_switch_across_the_connection() {
    let s = bnr_surface();
    let tps = bnr_tps();
    let config = GeometryConfig::new(0.0, bnr_region());
    let before = build_geometry_with(s, tps, &config.with_theta(PI / 2.0 - 0.02));
    let at = build_geometry_with(s, tps, &config.with_theta(PI / 2.0));
    let after = build_geometry_with(s, tps, &config.with_theta(PI / 2.0 + 0.02));
    let r = role_switch(&before, &at, &after);
    assert!(r.same_turning_points && r.same_curve_count && r.incidence_changed, "{r:?}");
    assert!(r.holds(), "{r:?}");
}

#[test]
fn airy_sweep_has_no_connections() {
    let s = airy_surface();
    let config = GeometryConfig::new(0.0, Region::square(2.0));
    let sweep = sweep_theta(s, s.turning_points(), 0.0, 2.0 * PI * (1.0 - 1.0 / 24.0), 24, &config).unwrap();
    assert!(sweep.events.iter().all(|e| e.kind != EventKind::TpHit && e.participants.is_empty()));
    assert!(sweep.samples.iter().all(|s| s.signature.as_ref().is_some_and(|g| g.degeneracies.is_empty())));
}

#[test]
fn bnr_sweep_away_from_critical_angles_is_quiet() {
    let s = bnr_surface();
    let tps = bnr_tps();
    let critical: Vec<f64> = all_critical_angles(s, tps).into_iter().map(|c| c.theta).collect();
    let (from, to) = (0.15, 0.35);
    assert!(critical.iter().all(|t| !(from - 0.01..=to + 0.01).contains(t)), "{critical:?}");
    let sweep = sweep_theta(s, tps, from, to, 6, &GeometryConfig::new(0.0, bnr_region())).unwrap();
    assert!(sweep.events.is_empty(), "{:?}", sweep.events.iter().map(|e| (e.theta, e.kind)).collect::<Vec<_>>());
}

#[test]
fn activity_is_stable_under_step_halving() {
    let s = bnr_surface();
    let tps = bnr_tps();
    let config = GeometryConfig::new(0.0, bnr_region());
    let mut fine = config;
    fine.step_init *= 0.5;
    fine.step_max *= 0.5;
    let (g, h) = (build_geometry_with(s, tps, &config), build_geometry_with(s, tps, &fine));
    let (vg, vh) = (virtual_curve(&g), virtual_curve(&h));
    let (pg, ph) = (toggle_points(&g, vg), toggle_points(&h, vh));
    assert_eq!(pg.len(), ph.len());
    for (a, b) in pg.iter().zip(&ph) {
        assert!((a - b).norm() <= 1e-4, "{a} vs {b}");
    }
}

#[test]
fn sweep_needs_two_steps() {
    let s = airy_surface();
    assert!(sweep_theta(s, s.turning_points(), 0.0, 1.0, 1, &GeometryConfig::new(0.0, Region::square(2.0))).is_err());
}
