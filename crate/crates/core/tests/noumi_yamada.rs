//! Leading-order Noumi–Yamada branches, the characteristic symbol of the
//! linear system, and scans along `t` paths.

mod common;

use common::*;
use nalgebra::{Complex as NComplex, Matrix3};
use proptest::prelude::*;
use std::sync::OnceLock;
use stokes_core::noumi_yamada::{leading_order_f_with, ny_geometry, ny_matrix, NYEventKind, NYScan};
use stokes_core::{
    continue_f, eval_roots, leading_order_f, ny_char_symbol, t_path_scan, Complex, GeometryConfig, NYParams,
    NYState, Region, ScanOptions, Tolerances,
};

fn params(a0: f64, a1: f64) -> NYParams {
    NYParams::new([c(a0, 0.0), c(a1, 0.0), c(-a0 - a1, 0.0)]).unwrap()
}

fn telescoped(s: &NYState) -> Complex {
    let f = &s.f;
    (0..3).map(|j| f[j] * (f[(j + 1) % 3] - f[(j + 2) % 3])).sum()
}

#[test]
fn zero_alpha_has_the_coordinate_and_diagonal_solutions() {
    let p = params(0.0, 0.0);
    let t = c(0.7, -1.2);
    let z = c(0.0, 0.0);
    let sols = leading_order_f(&p, t).unwrap();
    for want in [[t, z, z], [z, t, z], [z, z, t], [t / 3.0; 3]] {
        assert!(sols.iter().any(|s| (0..3).all(|q| (s.f[q] - want[q]).norm() < 1e-9)), "missing {want:?}");
    }
}

#[test]
fn reference_alpha_states_have_small_residuals() {
    let p = NYParams::new([c(0.3, 0.0), c(-0.1, 0.0), c(-0.2, 0.0)]).unwrap();
    let sols = leading_order_f(&p, c(1.0, 0.0)).unwrap();
    for s in &sols {
        assert!(s.max_residual(&p) <= 1e-12, "{s:?}");
        assert!(telescoped(s).norm() <= 1e-12);
    }
    // regression: four isolated states, confirmed by a lattice 10x denser
    assert_eq!(sols.len(), 4);
    let dense = leading_order_f_with(&p, c(1.0, 0.0), 15).unwrap();
    assert_eq!(dense.len(), sols.len());
    for (a, b) in sols.iter().zip(&dense) {
        assert!((0..3).all(|q| (a.f[q] - b.f[q]).norm() < 1e-9));
    }
}

#[test]
fn trivial_branch_continues_linearly() {
    let p = params(0.0, 0.0);
    let z = c(0.0, 0.0);
    let s = NYState { t: c(1.0, 0.0), f: [c(1.0, 0.0), z, z], branch_id: 0 };
    let out = continue_f(&p, &s, &[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
    let end = out.last().unwrap();
    assert!((end.f[0] - c(2.0, 0.0)).norm() < 1e-12 && end.f[1].norm() < 1e-12 && end.f[2].norm() < 1e-12);
}

fn circle(center: Complex, radius: f64, n: usize) -> Vec<Complex> {
    (0..=n).map(|i| center + Complex::from_polar(radius, 2.0 * std::f64::consts::PI * i as f64 / n as f64)).collect()
}

#[test]
fn closed_loop_returns_to_the_same_state() {
    let p = NYParams::new([c(0.3, 0.0), c(-0.1, 0.0), c(-0.2, 0.0)]).unwrap();
    // nearest branch collision is ~0.51 away from t = 1
    let path: Vec<Complex> = circle(c(1.0, 0.0), 0.3, 48).into_iter().map(|z| z - 0.3).collect();
    for s in leading_order_f(&p, path[0]).unwrap() {
        let out = continue_f(&p, &s, &path).unwrap();
        let end = out.last().unwrap();
        assert!((0..3).all(|q| (end.f[q] - s.f[q]).norm() <= 1e-8), "{s:?} -> {end:?}");
        assert!(out.iter().all(|n| n.is_valid(&p)));
    }
}

/// Real branch collision of alpha = (0.3, -0.1, -0.2): a root of
/// 625 t^8 - 4200 t^4 + 3200 t^2 - 2352.
const COLLISION: f64 = 1.509_959_101_659_767_5;

#[test]
fn path_through_a_collision_is_an_error() {
    let p = NYParams::new([c(0.3, 0.0), c(-0.1, 0.0), c(-0.2, 0.0)]).unwrap();
    let t0 = c(1.0, 0.0);
    let near = c(COLLISION - 1e-4, 0.0);
    // the two branches that meet at the collision
    let states = leading_order_f(&p, t0).unwrap();
    let ends: Vec<NYState> = states.iter().map(|s| *continue_f(&p, s, &[t0, near]).unwrap().last().unwrap()).collect();
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            let d = (0..3).map(|q| (ends[i].f[q] - ends[j].f[q]).norm()).fold(0.0, f64::max);
            if d < best.2 {
                best = (i, j, d);
            }
        }
    }
    assert!(best.2 < 0.1, "no colliding pair: {best:?}");
    for k in [best.0, best.1] {
        let err = continue_f(&p, &states[k], &[t0, c(COLLISION, 0.0)]);
        assert!(err.is_err(), "branch {k} passed the collision: {err:?}");
    }
    // every other branch continues through
    for (k, s) in states.iter().enumerate().filter(|(k, _)| *k != best.0 && *k != best.1) {
        assert!(continue_f(&p, s, &[t0, c(COLLISION, 0.0)]).is_ok(), "branch {k}");
    }
}

#[test]
fn symbol_has_no_xi_squared_term_and_det_m_constant_term() {
    let p = NYParams::new([c(0.3, 0.1), c(-0.1, 0.2), c(-0.2, -0.3)]).unwrap();
    for s in leading_order_f(&p, c(0.8, 0.4)).unwrap() {
        let sym = ny_char_symbol(&s, &p).unwrap();
        assert!(sym.xi_coeffs()[2].is_zero());
        let d = p.diagonal();
        assert!((d[0] + d[1] + d[2]).norm() < 1e-15);
        let x = c(-0.6, 1.3);
        let m = ny_matrix(&s, &p, x);
        let det = Matrix3::from_fn(|r, q| NComplex::new(m[r][q].re, m[r][q].im)).determinant();
        assert!((sym.xi_coeffs()[0].eval(x) - c(det.re, det.im)).norm() < 1e-12);
    }
}

fn eigen_oracle_error(p: &NYParams, s: &NYState, x: Complex) -> f64 {
    let m = ny_matrix(s, p, x);
    let a = Matrix3::from_fn(|r, q| {
        let v = -m[r][q] / x;
        NComplex::new(v.re, v.im)
    });
    let eig = a.schur().eigenvalues().expect("complex Schur form is triangular");
    let roots = eval_roots(&ny_char_symbol(s, p).unwrap(), x).unwrap();
    let mut left: Vec<Complex> = roots;
    let mut worst: f64 = 0.0;
    for e in eig.iter() {
        let e = c(e.re, e.im);
        let (i, d) = left.iter().enumerate().map(|(i, r)| (i, (r - e).norm())).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        worst = worst.max(d / (1.0 + e.norm()));
        left.swap_remove(i);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn diagonal_is_trace_free(a0 in -2.0f64..2.0, a1 in -2.0f64..2.0, b0 in -2.0f64..2.0, b1 in -2.0f64..2.0) {
        let p = NYParams::new([c(a0, b0), c(a1, b1), c(-a0 - a1, -b0 - b1)]).unwrap();
        let d = p.diagonal();
        prop_assert!((d[0] + d[1] + d[2]).norm() <= 1e-15);
    }

    #[test]
    fn roots_match_eigenvalues(
        a0 in -1.0f64..1.0, a1 in -1.0f64..1.0, tr in 0.2f64..2.0, ti in -1.0f64..1.0,
        xr in -2.0f64..2.0, xi in -2.0f64..2.0, pick in 0usize..8,
    ) {
        prop_assume!(xr.hypot(xi) > 0.05);
        let p = params(a0, a1);
        let states = leading_order_f(&p, c(tr, ti)).unwrap();
        let s = &states[pick % states.len()];
        prop_assert!(telescoped(s).norm() <= 1e-11);
        let err = eigen_oracle_error(&p, s, c(xr, xi));
        prop_assert!(err <= 1e-10, "eigenvalue mismatch {}", err);
    }
}

fn fixture_setup() -> (NYParams, NYState, Vec<Complex>, GeometryConfig) {
    let prob = ny_fixture();
    let params = prob.params().unwrap();
    let state = prob.initial_state().unwrap();
    let path = prob.t_path.clone().expect("fixture carries a t path");
    let region = prob.region.map(|r| r.0).unwrap_or(Region::square(2.0));
    (params, state, path, GeometryConfig::new(0.0, region))
}

#[test]
fn origin_is_never_a_turning_point() {
    let (params, state, _, config) = fixture_setup();
    let g = ny_geometry(&params, &state, &config, Tolerances::default(), 1).unwrap();
    assert!(!g.turning_points.is_empty());
    assert!(g.turning_points.iter().all(|t| t.location.norm() > 1e-6));
    assert!(g.turning_points.iter().any(|t| t.kind == stokes_core::TpKind::Virtual));
    assert!(g.curves.iter().all(|c| c.points.iter().all(|z| z.norm() > 0.0)));
    for c in &g.curves {
        assert!(c.level_error(0.0) <= config.tol_level);
    }
}

/// Scan of a short piece of the fixture path around the two located events.
fn short_scan(reverse: bool) -> &'static NYScan {
    static FWD: OnceLock<NYScan> = OnceLock::new();
    static BWD: OnceLock<NYScan> = OnceLock::new();
    let cell = if reverse { &BWD } else { &FWD };
    cell.get_or_init(|| {
        let (params, state, _, config) = fixture_setup();
        let (t0, t1) = (c(1.15, 0.0), c(1.19, 0.0));
        let (from, to) = if reverse { (t1, t0) } else { (t0, t1) };
        let start = *continue_f(&params, &state, &[state.t, from]).unwrap().last().unwrap();
        let options = ScanOptions { samples_per_segment: 9, ..ScanOptions::default() };
        t_path_scan(&params, &start, &[from, to], &config, &options).unwrap()
    })
}

#[test]
fn reversed_path_reverses_the_events() {
    let (fwd, bwd) = (short_scan(false), short_scan(true));
    assert!(!fwd.events.is_empty());
    assert_eq!(fwd.events.len(), bwd.events.len());
    for (a, b) in fwd.events.iter().zip(bwd.events.iter().rev()) {
        assert!((a.t - b.t).norm() <= 1e-5, "{} vs {}", a.t, b.t);
        assert_eq!(a.before, b.after);
        assert_eq!(a.after, b.before);
    }
}

#[test]
fn events_keep_an_ordinary_virtual_connection() {
    for e in &short_scan(false).events {
        let has = |s: &stokes_core::noumi_yamada::KindSignature| {
            s.connections.iter().any(|c| c.0 != c.1 && c.2 == stokes_core::geometry::DegeneracyKind::Connection)
        };
        assert!(has(&e.before) && has(&e.after), "{e:?}");
        assert_ne!(e.before, e.after);
        assert!(matches!(
            e.kind,
            NYEventKind::RoleSwitch | NYEventKind::Topology | NYEventKind::DegeneracyAppeared | NYEventKind::DegeneracyVanished
        ));
        assert!((e.t_bracket.0 - e.t_bracket.1).norm() <= 1e-5);
        assert_eq!(e.before.ordinary, e.after.ordinary);
    }
}

#[test]
fn generic_short_path_has_no_events() {
    let (params, state, _, config) = fixture_setup();
    let (from, to) = (c(1.02, 0.0), c(1.05, 0.0));
    let start = *continue_f(&params, &state, &[state.t, from]).unwrap().last().unwrap();
    let options = ScanOptions { samples_per_segment: 5, ..ScanOptions::default() };
    let scan = t_path_scan(&params, &start, &[from, to], &config, &options).unwrap();
    assert!(scan.events.is_empty(), "{:?}", scan.events.iter().map(|e| e.t).collect::<Vec<_>>());
    assert!(scan.samples.iter().all(|s| s.error.is_none()));
    assert!(scan.samples.iter().all(|s| s.signature.as_ref().is_some_and(|g| g.virtual_count > 0)));
}
