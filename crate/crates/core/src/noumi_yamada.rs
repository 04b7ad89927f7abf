//! Leading-order Noumi–Yamada system.
//!
//! The algebraic system
//!
//! ```text
//! f_j (f_{j+1} - f_{j+2}) + alpha_j = 0   (j = 0, 1, 2, indices mod 3)
//! f_0 + f_1 + f_2 = t
//! ```
//!
//! is the leading-order part of the symmetric fourth Painlevé system with
//! `alpha_0 + alpha_1 + alpha_2 = 0`. Each solution `f` gives the third-order
//! symbol `det(M(x) + x xi I)` of the associated linear system in `x`, whose
//! Stokes geometry is studied along paths in `t`.

use crate::error::{Result, WkbError};
use crate::geometry::{
    all_turning_points, build_geometry_with, DegeneracyKind, StokesGeometry,
};
use crate::poly::XPolynomial;
use crate::surface::{lex_cmp, RootSurface, Tolerances, TpKind, TurningPoint};
use crate::symbol::CharSymbol;
use crate::tracer::GeometryConfig;
use crate::virtual_tp::{refine_virtual_tp, VtpProblem};
use crate::Complex;
use serde::{Deserialize, Serialize};

/// Tolerance on `|alpha_0 + alpha_1 + alpha_2|`.
pub const TOL_ALPHA: f64 = 1e-12;
/// Residual tolerance for a solution `f`, relative to its scale.
pub const TOL_F: f64 = 1e-12;
/// Solutions closer than this (relative) are the same.
const DEDUP: f64 = 1e-8;
const LATTICE: usize = 7;
const NEWTON_MAX_ITER: usize = 60;
/// Resolution in `t` of event refinement along a path.
pub const SCAN_RESOLUTION: f64 = 1e-5;

/// Diagonal of `M` as integer combinations of `(alpha_1, alpha_2)`, over 3.
const DIAGONAL: [[i32; 2]; 3] = [[2, 1], [-1, 1], [-1, -2]];
// The diagonal has zero trace for every alpha.
const _: () = assert!(
    DIAGONAL[0][0] + DIAGONAL[1][0] + DIAGONAL[2][0] == 0
        && DIAGONAL[0][1] + DIAGONAL[1][1] + DIAGONAL[2][1] == 0
);

/// Parameters `(alpha_0, alpha_1, alpha_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NYParams {
    pub alpha: [Complex; 3],
}

impl NYParams {
    pub fn new(alpha: [Complex; 3]) -> Result<Self> {
        let p = Self { alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(WkbError::Input("alpha must be finite".into()));
        }
        let s = self.alpha.iter().sum::<Complex>();
        if s.norm() > TOL_ALPHA {
            return Err(WkbError::Input(format!(
                "alpha_0 + alpha_1 + alpha_2 must vanish at leading order (got {s})"
            )));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Diagonal entries of `M`.
    pub fn diagonal(&self) -> [Complex; 3] {
        let (a1, a2) = (self.alpha[1], self.alpha[2]);
        DIAGONAL.map(|[p, q]| (a1 * p as f64 + a2 * q as f64) / 3.0)
    }
}

/// A solution of the leading-order system at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NYState {
    pub t: Complex,
    pub f: [Complex; 3],
    pub branch_id: usize,
}

impl NYState {
    /// Residuals of the three product equations and of the sum constraint.
    pub fn residuals(&self, params: &NYParams) -> [Complex; 4] {
        let f = &self.f;
        let r = |j: usize| f[j] * (f[(j + 1) % 3] - f[(j + 2) % 3]) + params.alpha[j];
        [r(0), r(1), r(2), f[0] + f[1] + f[2] - self.t]
    }

    pub fn max_residual(&self, params: &NYParams) -> f64 {
        self.residuals(params).iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    fn tolerance(&self, params: &NYParams) -> f64 {
        let s = self.f.iter().map(|v| v.norm()).fold(0.0, f64::max);
        TOL_F * (1.0 + s * s + params.scale() + self.t.norm())
    }

    pub fn is_valid(&self, params: &NYParams) -> bool {
        self.max_residual(params) <= self.tolerance(params)
    }
}

/// Residual of the independent equations (the third product equation follows
/// from the other two when the alphas sum to zero).
fn system(f: &[Complex; 3], alpha: &[Complex; 3], t: Complex) -> [Complex; 3] {
    [
        f[0] * (f[1] - f[2]) + alpha[0],
        f[1] * (f[2] - f[0]) + alpha[1],
        f[0] + f[1] + f[2] - t,
    ]
}

fn jacobian(f: &[Complex; 3]) -> [[Complex; 3]; 3] {
    let one = Complex::new(1.0, 0.0);
    [[f[1] - f[2], f[0], -f[0]], [-f[1], f[2] - f[0], f[1]], [one, one, one]]
}

fn det3(m: &[[Complex; 3]; 3]) -> Complex {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Cramer solve of `m z = b`; `None` when `m` is numerically singular.
fn solve3(m: &[[Complex; 3]; 3], b: &[Complex; 3]) -> Option<[Complex; 3]> {
    let d = det3(m);
    let scale = m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    if d.norm() <= 1e-14 * scale.powi(3) {
        return None;
    }
    let mut out = [Complex::new(0.0, 0.0); 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = *m;
        for r in 0..3 {
            mc[r][c] = b[r];
        }
        *o = det3(&mc) / d;
    }
    Some(out)
}

fn norm3(v: &[Complex; 3]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Damped Newton iteration on the system from `f`.
fn newton(mut f: [Complex; 3], alpha: &[Complex; 3], t: Complex) -> Option<[Complex; 3]> {
    let mut r = system(&f, alpha, t);
    for _ in 0..NEWTON_MAX_ITER {
        let scale = 1.0 + norm3(&f).powi(2) + t.norm();
        if norm3(&r) <= 0.1 * TOL_F * scale {
            return Some(f);
        }
        let delta = solve3(&jacobian(&f), &r)?;
        let mut lambda = 1.0;
        loop {
            let cand = [f[0] - delta[0] * lambda, f[1] - delta[1] * lambda, f[2] - delta[2] * lambda];
            let rc = system(&cand, alpha, t);
            if norm3(&rc) < norm3(&r) || lambda < 1e-3 {
                f = cand;
                r = rc;
                break;
            }
            lambda *= 0.5;
        }
    }
    let scale = 1.0 + norm3(&f).powi(2) + t.norm();
    (norm3(&r) <= TOL_F * scale).then_some(f)
}

/// Every isolated solution at `t`, from damped Newton runs seeded on a
/// deterministic `7 x 7 x 7` lattice scaled by `1 + |t| + max|alpha|`.
/// States are sorted lexicographically by `f` and numbered in that order.
pub fn leading_order_f(params: &NYParams, t: Complex) -> Result<Vec<NYState>> {
    leading_order_f_with(params, t, LATTICE)
}

/// [`leading_order_f`] with a `n x n x n` seed lattice.
pub fn leading_order_f_with(params: &NYParams, t: Complex, n: usize) -> Result<Vec<NYState>> {
    params.validate()?;
    let scale = 1.0 + t.norm() + params.scale();
    let n = n.max(2);
    // Deterministic complex lattice: a real grid rotated off the axes so that
    // no seed sits on a symmetric (singular) configuration.
    let tilt = Complex::from_polar(1.0, 0.37);
    let coord = |i: usize| -> Complex {
        let u = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        tilt * Complex::new(u, 0.31 * u * u - 0.17) * scale
    };
    let mut found: Vec<[Complex; 3]> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let seed = [coord(i), coord(j) * tilt, coord(k) * tilt * tilt];
                let Some(f) = newton(seed, &params.alpha, t) else { continue };
                let s = NYState { t, f, branch_id: 0 };
                if !s.is_valid(params) {
                    continue;
                }
                let fs = 1.0 + norm3(&f);
                if !found.iter().any(|g| {
                    (0..3).map(|q| (g[q] - f[q]).norm()).fold(0.0, f64::max) <= DEDUP * fs
                }) {
                    found.push(f);
                }
            }
        }
    }
    if found.is_empty() {
        return Err(WkbError::NoSolutions(t));
    }
    found.sort_by(|a, b| {
        lex_cmp(&a[0], &b[0]).then(lex_cmp(&a[1], &b[1])).then(lex_cmp(&a[2], &b[2]))
    });
    Ok(found.into_iter().enumerate().map(|(i, f)| NYState { t, f, branch_id: i }).collect())
}

/// Newton polish of an explicitly given triple at `t`.
pub fn polish_state(params: &NYParams, t: Complex, f: [Complex; 3], branch_id: usize) -> Result<NYState> {
    params.validate()?;
    let f = newton(f, &params.alpha, t)
        .ok_or_else(|| WkbError::Input(format!("f = {f:?} does not converge to a solution at t = {t}")))?;
    let s = NYState { t, f, branch_id };
    if s.is_valid(params) {
        Ok(s)
    } else {
        Err(WkbError::Input(format!("f = {f:?} is not a solution at t = {t}")))
    }
}

/// Continue the branch of `state` along the polyline `t_path` (which must start
/// at `state.t`), returning the state at every node.
///
/// Steps use a tangent predictor and a Newton corrector and are halved when
/// the corrector is slow or moves far from the prediction. A step underflow
/// or a singular Jacobian (two branches colliding) is an error carrying the
/// last good `t`.
pub fn continue_f(params: &NYParams, state: &NYState, t_path: &[Complex]) -> Result<Vec<NYState>> {
    params.validate()?;
    let Some(&t0) = t_path.first() else { return Ok(Vec::new()) };
    if (t0 - state.t).norm() > 1e-12 * (1.0 + t0.norm()) {
        return Err(WkbError::Input("t path must start at the state's t".into()));
    }
    let mut out = vec![NYState { t: t0, ..*state }];
    let mut cur = out[0];
    for &target in &t_path[1..] {
        cur = continue_segment(params, cur, target)?;
        out.push(cur);
    }
    Ok(out)
}

fn continue_segment(params: &NYParams, start: NYState, target: Complex) -> Result<NYState> {
    let total = target - start.t;
    let len = total.norm();
    if len == 0.0 {
        return Ok(start);
    }
    let scale = 1.0 + norm3(&start.f) + params.scale();
    let min_step = 1e-10 * (1.0 + len);
    let mut s = 0.0;
    let mut h = (0.05 * scale).min(len);
    let mut cur = start;
    let collision = |t: Complex, reason: &str| WkbError::Continuation { t, reason: reason.into() };
    while s < len {
        h = h.min(len - s);
        if h < min_step {
            return Err(collision(cur.t, "step underflow (branch collision)"));
        }
        let t_new = if s + h >= len { target } else { start.t + total * ((s + h) / len) };
        let dt = t_new - cur.t;
        // tangent: J df/dt = -dF/dt = (0, 0, 1)
        let j = jacobian(&cur.f);
        let Some(tangent) = solve3(&j, &[Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)])
        else {
            return Err(collision(cur.t, "singular Jacobian (branch collision)"));
        };
        let pred = [cur.f[0] + tangent[0] * dt, cur.f[1] + tangent[1] * dt, cur.f[2] + tangent[2] * dt];
        let moved = norm3(&[pred[0] - cur.f[0], pred[1] - cur.f[1], pred[2] - cur.f[2]]);
        match correct(pred, &params.alpha, t_new, moved) {
            Some(f) => {
                cur = NYState { t: t_new, f, branch_id: cur.branch_id };
                s += h;
                h *= 1.5;
            }
            None => h *= 0.5,
        }
    }
    Ok(cur)
}

/// Plain Newton corrector; rejects slow convergence and corrections that are
/// large compared with the predicted motion (a jump to another branch).
fn correct(mut f: [Complex; 3], alpha: &[Complex; 3], t: Complex, moved: f64) -> Option<[Complex; 3]> {
    let start = f;
    for _ in 0..8 {
        let r = system(&f, alpha, t);
        let scale = 1.0 + norm3(&f).powi(2) + t.norm();
        if norm3(&r) <= 0.1 * TOL_F * scale {
            let jump = norm3(&[f[0] - start[0], f[1] - start[1], f[2] - start[2]]);
            return (jump <= 0.25 * moved + 1e-10 * (1.0 + norm3(&f))).then_some(f);
        }
        let d = solve3(&jacobian(&f), &r)?;
        f = [f[0] - d[0], f[1] - d[1], f[2] - d[2]];
    }
    None
}

/// The characteristic symbol `det(M(x) + x xi I)` of the linear system, with
/// `x = 0` declared singular. Its `xi^2` coefficient `x^2 tr M` vanishes
/// identically.
pub fn ny_char_symbol(state: &NYState, params: &NYParams) -> Result<CharSymbol> {
    let [f0, f1, f2] = state.f;
    let [a, b, c] = params.diagonal();
    let zero = Complex::new(0.0, 0.0);
    let one = Complex::new(1.0, 0.0);
    // M = [[a, f1, 1], [x, b, f2], [x f0, x, c]]
    let e2 = a * b + a * c + b * c;
    let det0 = a * b * c;
    let det1 = f0 * f1 * f2 - a * f2 - c * f1 - b * f0;
    let coeffs = vec![
        XPolynomial::new(vec![det0, det1, one]),
        XPolynomial::new(vec![zero, e2, -(f0 + f1 + f2)]),
        XPolynomial::zero(),
        XPolynomial::monomial(one, 3),
    ];
    CharSymbol::with_singularities(coeffs, vec![zero])
}

/// The matrix `M(x)` itself.
pub fn ny_matrix(state: &NYState, params: &NYParams, x: Complex) -> [[Complex; 3]; 3] {
    let [f0, f1, f2] = state.f;
    let [a, b, c] = params.diagonal();
    let one = Complex::new(1.0, 0.0);
    [[a, f1, one], [x, b, f2], [x * f0, x, c]]
}

/// What changed across an event of a `t` scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NYEventKind {
    DegeneracyAppeared,
    DegeneracyVanished,
    /// A connection persists but the kinds of turning points it joins change.
    RoleSwitch,
    /// Crossing or termination pattern changed without any connection change.
    Topology,
}

/// Discrete summary of a geometry that does not depend on how turning points
/// are numbered (they move with `t`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KindSignature {
    pub ordinary: usize,
    pub virtual_count: usize,
    pub terminations: Vec<String>,
    /// Sorted `(source kind, target kind, degeneracy kind)`.
    pub connections: Vec<(TpKind, TpKind, DegeneracyKind)>,
    /// Sorted source kinds of crossing curve pairs.
    pub crossings: Vec<(TpKind, TpKind)>,
    pub failures: usize,
}

impl KindSignature {
    pub fn of(g: &StokesGeometry) -> Self {
        let mut terminations: Vec<String> = g
            .curves
            .iter()
            .flat_map(|c| c.start_termination.iter().chain(std::iter::once(&c.termination)))
            .map(|t| t.label().to_string())
            .collect();
        terminations.sort();
        let mut connections = g.degeneracy_kinds();
        connections.sort();
        let kind = |i: usize| g.curves[i].source.kind;
        let mut crossings: Vec<_> = g
            .crossings
            .iter()
            .map(|x| {
                let (a, b) = (kind(x.curves.0), kind(x.curves.1));
                (a.min(b), a.max(b))
            })
            .collect();
        crossings.sort();
        Self {
            ordinary: g.count_tps(TpKind::Ordinary),
            virtual_count: g.count_tps(TpKind::Virtual),
            terminations,
            connections,
            crossings,
            failures: g.failures.len(),
        }
    }

    fn connection_kinds(&self) -> Vec<(TpKind, TpKind)> {
        let mut v: Vec<_> = self
            .connections
            .iter()
            .filter(|c| c.2 == DegeneracyKind::Connection)
            .map(|c| (c.0.min(c.1), c.0.max(c.1)))
            .collect();
        v.sort();
        v
    }
}

/// Options of a `t` scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub tolerances: Tolerances,
    pub vtp_depth: usize,
    /// Samples per path segment.
    pub samples_per_segment: usize,
    /// Resolution of event refinement in `t`.
    pub resolution: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), vtp_depth: 1, samples_per_segment: 50, resolution: SCAN_RESOLUTION }
    }
}

/// A located change of the `x`-plane geometry along the `t` path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NYEvent {
    pub t: Complex,
    /// Path parameter (cumulative length along the path) of the bracket ends.
    pub bracket: (f64, f64),
    pub t_bracket: (Complex, Complex),
    /// Branch states at the two bracket ends.
    pub states: (NYState, NYState),
    pub kind: NYEventKind,
    pub before: KindSignature,
    pub after: KindSignature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NYSample {
    pub s: f64,
    pub t: Complex,
    pub f: [Complex; 3],
    pub signature: Option<KindSignature>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NYScan {
    pub samples: Vec<NYSample>,
    pub events: Vec<NYEvent>,
}

/// Geometry of the linear system at one point of a branch, with turning points
/// found from scratch.
pub fn ny_geometry(
    params: &NYParams,
    state: &NYState,
    config: &GeometryConfig,
    tolerances: Tolerances,
    vtp_depth: usize,
) -> Result<StokesGeometry> {
    config.validate()?;
    let symbol = ny_char_symbol(state, params)?;
    let surface = RootSurface::new(symbol, config.region, tolerances)?;
    let tps = all_turning_points(&surface, vtp_depth)?;
    Ok(build_geometry_with(&surface, &tps, config))
}

/// Point at arclength `s` along a polyline, with its segment index.
fn path_point(path: &[Complex], cum: &[f64], s: f64) -> Complex {
    let i = match cum.iter().position(|c| *c >= s) {
        Some(0) => return path[0],
        Some(i) => i,
        None => return *path.last().expect("nonempty path"),
    };
    let (a, b) = (cum[i - 1], cum[i]);
    let u = if b > a { (s - a) / (b - a) } else { 0.0 };
    path[i - 1] + (path[i] - path[i - 1]) * u
}

/// One scan sample: branch state, surface, turning points and geometry.
struct ScanPoint {
    state: NYState,
    tps: Vec<TurningPoint>,
    geometry: Option<StokesGeometry>,
    error: Option<String>,
}

struct Scanner<'a> {
    params: &'a NYParams,
    config: &'a GeometryConfig,
    options: &'a ScanOptions,
    anchor: Complex,
}

impl Scanner<'_> {
    fn surface(&self, state: &NYState) -> Result<RootSurface> {
        let symbol = ny_char_symbol(state, self.params)?;
        RootSurface::with_anchor(symbol, self.config.region, self.options.tolerances, self.anchor)
    }

    /// Turning points at `state`: ordinary ones located from scratch, virtual
    /// ones either searched for (no `previous`) or followed from `previous`.
    fn point(&self, state: NYState, previous: Option<&[TurningPoint]>) -> ScanPoint {
        let fail = |state, e: WkbError| ScanPoint { state, tps: Vec::new(), geometry: None, error: Some(e.to_string()) };
        let surface = match self.surface(&state) {
            Ok(s) => s,
            Err(e) => return fail(state, e),
        };
        let tps = match previous {
            None => all_turning_points(&surface, self.options.vtp_depth),
            Some(prev) => follow_virtual(&surface, prev),
        };
        let tps = match tps {
            Ok(t) => t,
            Err(e) => return fail(state, e),
        };
        let geometry = build_geometry_with(&surface, &tps, self.config);
        ScanPoint { state, tps, geometry: Some(geometry), error: None }
    }
}

/// Ordinary turning points of `surface` plus the virtual points of `previous`
/// refined by Newton iteration on the new surface. Parents are matched to the
/// nearest current turning points; points that cannot be followed are
/// dropped.
fn follow_virtual(surface: &RootSurface, previous: &[TurningPoint]) -> Result<Vec<TurningPoint>> {
    let mut tps: Vec<TurningPoint> = surface.turning_points().to_vec();
    let mut pending: Vec<&TurningPoint> = previous.iter().filter(|t| t.kind == TpKind::Virtual).collect();
    // Process in generations: a point can be followed once both parents have
    // a counterpart in the current list.
    let old_locations: Vec<Complex> = previous.iter().map(|t| t.location).collect();
    let nearest = |tps: &[TurningPoint], z: Complex| -> Option<usize> {
        tps.iter()
            .enumerate()
            .min_by(|a, b| (a.1.location - z).norm().total_cmp(&(b.1.location - z).norm()))
            .map(|(i, _)| i)
    };
    let mut progress = true;
    while progress && !pending.is_empty() {
        progress = false;
        let mut rest = Vec::new();
        for v in pending {
            let Some([pa, pb]) = v.parents else { continue };
            // Parents must be points of the previous list.
            let known = |p: Complex| old_locations.iter().any(|l| (l - p).norm() < 1e-9 * (1.0 + p.norm()));
            let parent_is_virtual = |p: Complex| {
                previous.iter().any(|t| t.kind == TpKind::Virtual && (t.location - p).norm() < 1e-12)
            };
            let resolved = |p: Complex| !parent_is_virtual(p) || tps.iter().any(|t| t.kind == TpKind::Virtual);
            if !(known(pa) && known(pb)) || !resolved(pa) || !resolved(pb) {
                rest.push(v);
                continue;
            }
            let (Some(ia), Some(ib)) = (nearest(&tps, pa), nearest(&tps, pb)) else { continue };
            progress = true;
            if ia == ib {
                continue;
            }
            let Some(problem) = VtpProblem::new(surface, &tps[ia], &tps[ib]) else { continue };
            if let Some(found) = refine_virtual_tp(surface, &problem, v.location)? {
                if !tps.iter().any(|t| (t.location - found.location).norm() < 1e-6) {
                    tps.push(found);
                }
            }
        }
        pending = rest;
    }
    tps.sort_by(|a, b| lex_cmp(&a.location, &b.location));
    Ok(tps)
}

fn classify(before: &KindSignature, after: &KindSignature) -> NYEventKind {
    let (b, a) = (before.connection_kinds(), after.connection_kinds());
    if b == a {
        if before.connections != after.connections {
            // same connected kinds, different incidences
            return NYEventKind::RoleSwitch;
        }
        return NYEventKind::Topology;
    }
    if b.len() == a.len() {
        NYEventKind::RoleSwitch
    } else if a.len() > b.len() {
        NYEventKind::DegeneracyAppeared
    } else {
        NYEventKind::DegeneracyVanished
    }
}

/// Scan the branch of `start` along `t_path`: sample the geometry of the
/// linear system, and bisect (in `t`) every change of the kind signature down
/// to `options.resolution`.
///
/// Virtual turning points are located once at the start and then followed
/// along the path. Samples that fail are recorded and skipped.
pub fn t_path_scan(
    params: &NYParams,
    start: &NYState,
    t_path: &[Complex],
    config: &GeometryConfig,
    options: &ScanOptions,
) -> Result<NYScan> {
    params.validate()?;
    config.validate()?;
    if t_path.len() < 2 {
        return Err(WkbError::Input("a t path needs at least two points".into()));
    }
    let mut cum = vec![0.0];
    for w in t_path.windows(2) {
        cum.push(cum.last().copied().unwrap_or(0.0) + (w[1] - w[0]).norm());
    }
    // Sample parameters: `samples_per_segment` per segment, shared endpoints.
    let per = options.samples_per_segment.max(2);
    let mut ss: Vec<f64> = vec![0.0];
    for w in cum.windows(2) {
        for i in 1..per {
            ss.push(w[0] + (w[1] - w[0]) * i as f64 / (per - 1) as f64);
        }
    }
    let ts: Vec<Complex> = ss.iter().map(|&s| path_point(t_path, &cum, s)).collect();
    let states = continue_f(params, start, &ts)?;

    // Fixed anchor for the whole scan so that labels stay comparable.
    let first = RootSurface::new(ny_char_symbol(&states[0], params)?, config.region, options.tolerances)?;
    let scanner = Scanner { params, config, options, anchor: first.anchor().x };

    let mut points: Vec<ScanPoint> = Vec::with_capacity(states.len());
    for st in &states {
        let prev: Option<Vec<TurningPoint>> = points.last().map(|_| {
            points.iter().rev().find(|p| p.geometry.is_some()).map(|p| p.tps.clone()).unwrap_or_default()
        });
        points.push(scanner.point(*st, prev.as_deref()));
    }

    let sig = |p: &ScanPoint| p.geometry.as_ref().map(KindSignature::of);
    let samples: Vec<NYSample> = points
        .iter()
        .zip(&ss)
        .map(|(p, &s)| NYSample { s, t: p.state.t, f: p.state.f, signature: sig(p), error: p.error.clone() })
        .collect();

    let mut events: Vec<NYEvent> = Vec::new();
    for i in 0..points.len().saturating_sub(1) {
        let (Some(s0), Some(s1)) = (&samples[i].signature, &samples[i + 1].signature) else { continue };
        if s0 == s1 {
            continue;
        }
        // bisection in s, continuing the branch and following virtual points
        let (mut lo, mut hi) = (ss[i], ss[i + 1]);
        let mut lo_state = points[i].state;
        let mut lo_tps = points[i].tps.clone();
        let s_lo = s0.clone();
        let mut s_hi = s1.clone();
        let mut hi_state = points[i + 1].state;
        while (hi - lo) > options.resolution {
            let mid = 0.5 * (lo + hi);
            let t_mid = path_point(t_path, &cum, mid);
            let Ok(st) = continue_f(params, &lo_state, &[lo_state.t, t_mid]) else { break };
            let p = scanner.point(st[1], Some(&lo_tps));
            let Some(sm) = sig(&p) else { break };
            if sm == s_lo {
                lo = mid;
                lo_state = p.state;
                lo_tps = p.tps;
            } else {
                hi = mid;
                s_hi = sm;
                hi_state = p.state;
            }
        }
        let kind = classify(&s_lo, &s_hi);
        events.push(NYEvent {
            t: path_point(t_path, &cum, 0.5 * (lo + hi)),
            bracket: (lo, hi),
            t_bracket: (lo_state.t, hi_state.t),
            states: (lo_state, hi_state),
            kind,
            before: s_lo,
            after: s_hi,
        });
    }
    Ok(NYScan { samples, events })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn zero_alpha_solutions() {
        let p = NYParams::new([c(0.0, 0.0); 3]).unwrap();
        let t = c(1.5, 0.5);
        let sols = leading_order_f(&p, t).unwrap();
        for expect in [[t, c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), t, c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0), t], [t / 3.0; 3]] {
            assert!(
                sols.iter().any(|s| (0..3).all(|q| (s.f[q] - expect[q]).norm() < 1e-9)),
                "missing {expect:?} in {sols:?}"
            );
        }
    }

    #[test]
    fn rejects_nonzero_alpha_sum() {
        assert!(NYParams::new([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn continuation_along_trivial_branch() {
        let p = NYParams::new([c(0.0, 0.0); 3]).unwrap();
        let s = NYState { t: c(1.0, 0.0), f: [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], branch_id: 0 };
        let out = continue_f(&p, &s, &[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let end = out.last().unwrap();
        assert!((end.f[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!(end.f[1].norm() < 1e-12 && end.f[2].norm() < 1e-12);
    }

    #[test]
    fn symbol_coefficients() {
        let p = NYParams::new([c(0.3, 0.0), c(-0.1, 0.0), c(-0.2, 0.0)]).unwrap();
        let s = leading_order_f(&p, c(1.0, 0.0)).unwrap()[0];
        let sym = ny_char_symbol(&s, &p).unwrap();
        assert!(sym.xi_coeffs()[2].is_zero());
        let x = c(0.4, -0.7);
        let m = ny_matrix(&s, &p, x);
        assert!((sym.xi_coeffs()[0].eval(x) - det3(&m)).norm() < 1e-13);
        assert_eq!(sym.singular_points(), &[c(0.0, 0.0)]);
    }
}
