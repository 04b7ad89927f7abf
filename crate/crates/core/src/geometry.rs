//! Full Stokes geometries: curves from every turning point, their crossings,
//! activity of curves from virtual turning points, connections between
//! turning points, and the sweep over `theta = arg eta`.

use crate::error::{Result, WkbError};
use crate::surface::{lex_cmp, RootSet, RootSurface, Tolerances, TpKind, TurningPoint};
use crate::symbol::CharSymbol;
use crate::tracer::{trace_from_labelled, ActivitySpan, GeometryConfig, StokesCurve, TracedCurve};
use crate::virtual_tp::virtual_turning_points;
use crate::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A curve identified by `(source index, direction)`.
pub type CurveKey = (usize, usize);

/// Distance under which three crossings count as one triple point.
pub const TRIPLE_POINT_TOL: f64 = 1e-6;
/// Angular resolution of event refinement in a sweep.
pub const SWEEP_RESOLUTION: f64 = 1e-6;
/// Events whose brackets are closer than this are merged.
const EVENT_MERGE_GAP: f64 = 2.0 * SWEEP_RESOLUTION;
/// Distance in `theta` within which an event is attributed to a critical angle.
const CRITICAL_ANGLE_MATCH: f64 = 1e-5;
const MAX_EVENTS_PER_WINDOW: usize = 16;

/// Options for assembling a geometry from a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub tolerances: Tolerances,
    /// Depth of the virtual-turning-point iteration (0 disables it).
    pub vtp_depth: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), vtp_depth: 2 }
    }
}

/// Two curves crossing transversally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub curves: (usize, usize),
    pub location: Complex,
    /// Position of the crossing along each curve (point index plus fraction).
    pub positions: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyKind {
    /// The curve ends on the turning point.
    Connection,
    /// The curve runs through a turning point without ending there.
    Incidence,
}

/// A Stokes curve from turning point `from` reaching turning point `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degeneracy {
    pub from: usize,
    pub to: usize,
    pub curve: usize,
    pub kind: DegeneracyKind,
}

/// A curve that could not be traced completely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFailure {
    pub source_index: usize,
    pub direction: Option<usize>,
    pub message: String,
}

/// Stokes geometry of one symbol at one `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesGeometry {
    pub symbol: CharSymbol,
    pub theta: f64,
    pub config: GeometryConfig,
    pub turning_points: Vec<TurningPoint>,
    pub curves: Vec<StokesCurve>,
    pub crossings: Vec<Crossing>,
    pub degeneracies: Vec<Degeneracy>,
    #[serde(default)]
    pub failures: Vec<CurveFailure>,
}

impl StokesGeometry {
    pub fn count_tps(&self, kind: TpKind) -> usize {
        self.turning_points.iter().filter(|t| t.kind == kind).count()
    }

    pub fn curves_from(&self, tp_index: usize) -> impl Iterator<Item = (usize, &StokesCurve)> {
        self.curves.iter().enumerate().filter(move |(_, c)| c.source_index == tp_index)
    }

    pub fn crossings_of(&self, curve: usize) -> impl Iterator<Item = &Crossing> {
        self.crossings.iter().filter(move |c| c.curves.0 == curve || c.curves.1 == curve)
    }

    /// Degeneracies with the kinds of the two turning points involved.
    pub fn degeneracy_kinds(&self) -> Vec<(TpKind, TpKind, DegeneracyKind)> {
        self.degeneracies
            .iter()
            .map(|d| (self.turning_points[d.from].kind, self.turning_points[d.to].kind, d.kind))
            .collect()
    }

    /// Whether some curve connects an ordinary and a virtual turning point.
    pub fn has_ordinary_virtual_connection(&self) -> bool {
        self.degeneracy_kinds().iter().any(|(a, b, k)| *k == DegeneracyKind::Connection && a != b)
    }
}

/// Ordinary turning points in the region plus virtual ones up to the
/// configured depth, sorted by `(re, im)`.
pub fn all_turning_points(surface: &RootSurface, vtp_depth: usize) -> Result<Vec<TurningPoint>> {
    let mut tps = surface.turning_points().to_vec();
    if vtp_depth > 0 {
        tps.extend(virtual_turning_points(surface, vtp_depth)?);
    }
    tps.sort_by(|a, b| lex_cmp(&a.location, &b.location));
    Ok(tps)
}

/// Locate all turning points and build the geometry at `config.theta`.
pub fn build_geometry(
    symbol: &CharSymbol,
    config: &GeometryConfig,
    options: &BuildOptions,
) -> Result<StokesGeometry> {
    config.validate()?;
    let surface = RootSurface::new(symbol.clone(), config.region, options.tolerances)?;
    let tps = all_turning_points(&surface, options.vtp_depth)?;
    Ok(build_geometry_with(&surface, &tps, config))
}

/// Geometry for known turning points (they are not recomputed). Curves that
/// fail are reported in `failures`, with their partial traces dropped.
pub fn build_geometry_with(
    surface: &RootSurface,
    tps: &[TurningPoint],
    config: &GeometryConfig,
) -> StokesGeometry {
    let mut traced: Vec<TracedCurve> = Vec::new();
    let mut failures = Vec::new();
    for (i, tp) in tps.iter().enumerate() {
        let fallback_direction = (tp.kind == TpKind::Virtual).then_some(0);
        for (n, r) in trace_from_labelled(surface, i, config, tps).into_iter().enumerate() {
            match r {
                Ok(t) => traced.push(t),
                Err(e) => failures.push(CurveFailure {
                    source_index: i,
                    direction: e.partial.as_ref().map(|c| c.direction).or(fallback_direction).or(Some(n)),
                    message: e.to_string(),
                }),
            }
        }
    }
    let tp_locations: Vec<Complex> = tps.iter().map(|t| t.location).collect();
    let crossings = find_crossings(surface, config, &traced, &tp_locations);
    let curves: Vec<StokesCurve> = traced.into_iter().map(|t| t.curve).collect();
    let degeneracies = collect_degeneracies(&curves);
    let mut geometry = StokesGeometry {
        symbol: surface.symbol().clone(),
        theta: config.theta,
        config: *config,
        turning_points: tps.to_vec(),
        curves,
        crossings,
        degeneracies,
        failures,
    };
    classify_activity(&mut geometry);
    geometry
}

fn collect_degeneracies(curves: &[StokesCurve]) -> Vec<Degeneracy> {
    let mut out = Vec::new();
    for (ci, c) in curves.iter().enumerate() {
        for to in c.endpoints_hit() {
            out.push(Degeneracy { from: c.source_index, to, curve: ci, kind: DegeneracyKind::Connection });
        }
        for inc in &c.incidences {
            out.push(Degeneracy {
                from: c.source_index,
                to: inc.tp,
                curve: ci,
                kind: DegeneracyKind::Incidence,
            });
        }
    }
    out.sort_by_key(|d| (d.from, d.to, d.curve, d.kind));
    out
}

fn bbox(a: Complex, b: Complex) -> [f64; 4] {
    [a.re.min(b.re), a.im.min(b.im), a.re.max(b.re), a.im.max(b.im)]
}

fn boxes_overlap(p: &[f64; 4], q: &[f64; 4]) -> bool {
    p[0] <= q[2] && q[0] <= p[2] && p[1] <= q[3] && q[1] <= p[3]
}

/// Parameters `(s, t)` of the proper intersection of segments `[a0,a1]` and
/// `[b0,b1]`.
fn segment_intersection(a0: Complex, a1: Complex, b0: Complex, b1: Complex) -> Option<(f64, f64)> {
    let da = a1 - a0;
    let db = b1 - b0;
    let denom = da.re * db.im - da.im * db.re;
    if denom.abs() <= 1e-300 || denom.abs() <= 1e-14 * da.norm() * db.norm() {
        return None;
    }
    let w = b0 - a0;
    let s = (w.re * db.im - w.im * db.re) / denom;
    let t = (w.re * da.im - w.im * da.re) / denom;
    ((0.0..1.0).contains(&s) && (0.0..1.0).contains(&t)).then_some((s, t))
}

const CHUNK: usize = 16;

fn chunk_boxes(points: &[Complex]) -> Vec<[f64; 4]> {
    let segs = points.len().saturating_sub(1);
    (0..segs.div_ceil(CHUNK))
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(segs);
            points[lo..=hi].iter().fold([f64::INFINITY, f64::INFINITY, -f64::INFINITY, -f64::INFINITY], |b, p| {
                [b[0].min(p.re), b[1].min(p.im), b[2].max(p.re), b[3].max(p.im)]
            })
        })
        .collect()
}

fn find_crossings(
    surface: &RootSurface,
    config: &GeometryConfig,
    curves: &[TracedCurve],
    tp_locations: &[Complex],
) -> Vec<Crossing> {
    let boxes: Vec<Vec<[f64; 4]>> = curves.iter().map(|c| chunk_boxes(&c.curve.points)).collect();
    let mut out = Vec::new();
    for a in 0..curves.len() {
        for b in a + 1..curves.len() {
            let pa = &curves[a].curve.points;
            let pb = &curves[b].curve.points;
            for (ca, ba) in boxes[a].iter().enumerate() {
                for (cb, bb) in boxes[b].iter().enumerate() {
                    if !boxes_overlap(ba, bb) {
                        continue;
                    }
                    let ra = ca * CHUNK..((ca + 1) * CHUNK).min(pa.len() - 1);
                    for i in ra {
                        let sa = bbox(pa[i], pa[i + 1]);
                        if !boxes_overlap(&sa, bb) {
                            continue;
                        }
                        let rb = cb * CHUNK..((cb + 1) * CHUNK).min(pb.len() - 1);
                        for k in rb {
                            if !boxes_overlap(&sa, &bbox(pb[k], pb[k + 1])) {
                                continue;
                            }
                            if let Some((s, t)) = segment_intersection(pa[i], pa[i + 1], pb[k], pb[k + 1]) {
                                let guess = pa[i] + (pa[i + 1] - pa[i]) * s;
                                // Curves meeting at a shared turning point do not cross.
                                if tp_locations.iter().any(|t| (t - guess).norm() <= 1e-9 * (1.0 + t.norm())) {
                                    continue;
                                }
                                let (location, positions) =
                                    refine_crossing(surface, config, &curves[a], i, &curves[b], k, guess)
                                        .unwrap_or((guess, (i as f64 + s, k as f64 + t)));
                                out.push(Crossing { curves: (a, b), location, positions });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Newton refinement of a polyline crossing onto the exact level curves.
/// Each curve's level function is `Im e^{i theta} y` continued from the start
/// of the segment; its gradient in `(re x, im x)` is `(Im w, Re w)` with
/// `w = e^{i theta} (xi_j - xi_k)`.
fn refine_crossing(
    surface: &RootSurface,
    config: &GeometryConfig,
    ca: &TracedCurve,
    ia: usize,
    cb: &TracedCurve,
    ib: usize,
    guess: Complex,
) -> Option<(Complex, (f64, f64))> {
    let rot = Complex::from_polar(1.0, config.theta);
    let eval = |c: &TracedCurve, i: usize, x: Complex| -> Option<(f64, Complex)> {
        // The first segment of a curve from an ordinary point starts on the
        // turning point itself; continue from its far end instead.
        let i = if i == 0 && !c.curve.is_virtual() { 1 } else { i };
        let start: &RootSet = &c.labels[i];
        let (dy, at) = surface.pair_panel(start, x, c.curve.pair).ok()?;
        let y = c.curve.y_values[i] + dy;
        let w = rot * (at.roots[c.curve.pair.0] - at.roots[c.curve.pair.1]);
        Some(((rot * y).im, w))
    };
    let seg_a = (ca.curve.points[ia + 1] - ca.curve.points[ia]).norm();
    let seg_b = (cb.curve.points[ib + 1] - cb.curve.points[ib]).norm();
    let reach = 2.0 * seg_a.max(seg_b);
    let mut x = guess;
    for _ in 0..12 {
        let (fa, wa) = eval(ca, ia, x)?;
        let (fb, wb) = eval(cb, ib, x)?;
        if fa.abs().max(fb.abs()) <= 1e-3 * config.tol_level {
            break;
        }
        let det = wa.im * wb.re - wa.re * wb.im;
        if det.abs() <= 1e-300 {
            return None;
        }
        let dre = (-fa * wb.re + fb * wa.re) / det;
        let dim = (-wa.im * fb + wb.im * fa) / det;
        x += Complex::new(dre, dim);
        if (x - guess).norm() > reach {
            return None;
        }
    }
    let pos = |c: &TracedCurve, i: usize| {
        let p0 = c.curve.points[i];
        let d = c.curve.points[i + 1] - p0;
        i as f64 + (((x - p0) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0)
    };
    Some((x, (pos(ca, ia), pos(cb, ib))))
}

/// A point where a curve from a virtual turning point meets a crossing of
/// two curves whose pairs chain through a third branch to its own pair.
#[derive(Debug, Clone, Copy)]
struct TriplePoint {
    position: f64,
    crossed: [(usize, f64); 2],
}

fn triple_points(g: &StokesGeometry, ci: usize) -> Vec<TriplePoint> {
    let curve = &g.curves[ci];
    let (j, l) = curve.pair;
    let set = |c: &StokesCurve| {
        let (a, b) = c.pair;
        (a.min(b), a.max(b))
    };
    // Crossings of this curve with curves sharing exactly one branch.
    let mine: Vec<(usize, f64, f64, Complex)> = g
        .crossings_of(ci)
        .filter_map(|x| {
            let (other, here, there) =
                if x.curves.0 == ci { (x.curves.1, x.positions.0, x.positions.1) } else { (x.curves.0, x.positions.1, x.positions.0) };
            let (p, q) = set(&g.curves[other]);
            let shares = (p == j || p == l || q == j || q == l) && (p, q) != (j.min(l), j.max(l));
            shares.then_some((other, here, there, x.location))
        })
        .collect();
    let mut out = Vec::new();
    for (ia, a) in mine.iter().enumerate() {
        for b in &mine[ia + 1..] {
            if (a.3 - b.3).norm() > TRIPLE_POINT_TOL {
                continue;
            }
            let (pa, qa) = set(&g.curves[a.0]);
            let (pb, qb) = set(&g.curves[b.0]);
            // {j,k} and {k,l} for one k outside {j,l}.
            let k_a = if pa == j || pa == l { qa } else { pa };
            let k_b = if pb == j || pb == l { qb } else { pb };
            let ends_a = if pa == k_a { qa } else { pa };
            let ends_b = if pb == k_b { qb } else { pb };
            if k_a == k_b && k_a != j && k_a != l && ends_a != ends_b {
                out.push(TriplePoint { position: 0.5 * (a.1 + b.1), crossed: [(a.0, a.2), (b.0, b.2)] });
            }
        }
    }
    out.sort_by(|a, b| a.position.total_cmp(&b.position));
    out
}

/// Activity flags by the ordered-crossing rule.
///
/// Curves from ordinary turning points are active everywhere. A curve from a
/// virtual turning point of pair `(j, l)` is inactive at its source and
/// toggles at every triple point where it passes the crossing of a `(j, k)`
/// curve with a `(k, l)` curve, provided both crossed curves are active
/// there. Since crossed curves may themselves come from virtual points, the
/// rule is applied until no flag changes.
pub fn classify_activity(g: &mut StokesGeometry) {
    for c in g.curves.iter_mut() {
        let active = !c.is_virtual();
        c.activity = vec![ActivitySpan { from: 0.0, to: c.end_position(), active }];
    }
    let virtual_curves: Vec<usize> = (0..g.curves.len()).filter(|&i| g.curves[i].is_virtual()).collect();
    let triples: Vec<(usize, Vec<TriplePoint>)> =
        virtual_curves.iter().map(|&i| (i, triple_points(g, i))).collect();
    let max_rounds = g.crossings.len() + 2;
    for _ in 0..max_rounds {
        let mut changed = false;
        for (ci, tri) in &triples {
            let spans = activity_from_toggles(g, *ci, tri);
            if spans != g.curves[*ci].activity {
                g.curves[*ci].activity = spans;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

fn activity_from_toggles(g: &StokesGeometry, ci: usize, tri: &[TriplePoint]) -> Vec<ActivitySpan> {
    let curve = &g.curves[ci];
    let src = curve.source_point as f64;
    let end = curve.end_position();
    let toggles: Vec<f64> = tri
        .iter()
        .filter(|t| t.crossed.iter().all(|(c, pos)| g.curves[*c].active_at(*pos)))
        .map(|t| t.position)
        .collect();
    let mut cuts = vec![0.0];
    cuts.extend(toggles.iter().copied());
    cuts.push(end);
    let spans = cuts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            // Inactive at the source; each toggle between here and the
            // source flips the state.
            let flips = toggles.iter().filter(|t| (**t - src) * (**t - mid) < 0.0 || **t == mid).count();
            ActivitySpan { from: w[0], to: w[1], active: flips % 2 == 1 }
        })
        .collect();
    merge_spans(spans)
}

fn merge_spans(spans: Vec<ActivitySpan>) -> Vec<ActivitySpan> {
    let mut out: Vec<ActivitySpan> = Vec::new();
    for s in spans {
        if s.to < s.from {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.active == s.active => last.to = s.to,
            _ => out.push(s),
        }
    }
    out
}

/// `theta` in `[0, 2 pi)` at which `Im e^{i theta} V = 0` for
/// `V = int_path (xi_j - xi_k) dx`; two angles a distance `pi` apart.
pub fn critical_angles(
    surface: &RootSurface,
    pair: (usize, usize),
    path: &[Complex],
) -> Result<Vec<f64>> {
    let vals = surface.integrate_all(path)?;
    critical_angles_of(vals[pair.0] - vals[pair.1], surface.tolerances().tol_quad)
}

/// Critical angles for a given connection integral `V`.
pub fn critical_angles_of(v: Complex, tol_quad: f64) -> Result<Vec<f64>> {
    if v.norm() <= tol_quad {
        return Err(WkbError::DegenerateConnection(v.norm()));
    }
    let t = (-v.arg()).rem_euclid(PI);
    Ok(vec![t, t + PI])
}

/// Critical angles for every pair of turning points and every branch pair
/// carried by the first of them, along straight (detoured) paths.
pub fn all_critical_angles(surface: &RootSurface, tps: &[TurningPoint]) -> Vec<CriticalAngle> {
    let mut out = Vec::new();
    for (a, ta) in tps.iter().enumerate() {
        for (b, tb) in tps.iter().enumerate() {
            if a == b {
                continue;
            }
            let Ok(path) = surface.straight_path(ta.location, tb.location) else { continue };
            let Ok(vals) = surface.integrate_all(&path) else { continue };
            let (j, k) = ta.pair;
            if let Ok(angles) = critical_angles_of(vals[j] - vals[k], surface.tolerances().tol_quad) {
                for theta in angles {
                    out.push(CriticalAngle { theta, from: a, to: b, pair: (j, k) });
                }
            }
        }
    }
    out.sort_by(|x, y| x.theta.total_cmp(&y.theta));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalAngle {
    pub theta: f64,
    pub from: usize,
    pub to: usize,
    pub pair: (usize, usize),
}

/// Discrete summary of a geometry, used to detect topology changes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub ordinary: usize,
    pub virtual_count: usize,
    /// Sorted termination labels of all curve ends.
    pub terminations: Vec<String>,
    /// Sorted crossing pairs, each curve keyed by `(source index, direction)`.
    pub crossings: Vec<((usize, usize), (usize, usize))>,
    /// Sorted `(from, to, kind)` triples.
    pub degeneracies: Vec<(usize, usize, DegeneracyKind)>,
    /// For every curve, the keys of the curves it crosses in the order met
    /// along it.
    pub crossing_order: Vec<(CurveKey, Vec<CurveKey>)>,
    pub failures: Vec<(usize, Option<usize>)>,
}

impl Signature {
    pub fn of(g: &StokesGeometry) -> Self {
        let mut terminations: Vec<String> = g
            .curves
            .iter()
            .flat_map(|c| c.start_termination.iter().chain(std::iter::once(&c.termination)))
            .map(|t| t.label().to_string())
            .collect();
        terminations.sort();
        let key = |i: usize| (g.curves[i].source_index, g.curves[i].direction);
        let mut crossings: Vec<_> = g
            .crossings
            .iter()
            .map(|x| {
                let (a, b) = (key(x.curves.0), key(x.curves.1));
                (a.min(b), a.max(b))
            })
            .collect();
        crossings.sort();
        let mut degeneracies: Vec<_> = g.degeneracies.iter().map(|d| (d.from, d.to, d.kind)).collect();
        degeneracies.sort();
        let mut failures: Vec<_> = g.failures.iter().map(|f| (f.source_index, f.direction)).collect();
        failures.sort();
        let mut crossing_order: Vec<_> = (0..g.curves.len())
            .map(|ci| {
                let mut met: Vec<(f64, Complex, (usize, usize))> = g
                    .crossings_of(ci)
                    .map(|x| {
                        let (pos, other) =
                            if x.curves.0 == ci { (x.positions.0, x.curves.1) } else { (x.positions.1, x.curves.0) };
                        (pos, x.location, key(other))
                    })
                    .collect();
                met.sort_by(|a, b| a.0.total_cmp(&b.0));
                // Coincident crossings (triple points) have no meaningful order.
                let mut groups: Vec<Vec<(Complex, (usize, usize))>> = Vec::new();
                for (_, loc, k) in met {
                    match groups.last_mut() {
                        Some(gr) if gr.iter().any(|(l, _)| (l - loc).norm() <= TRIPLE_POINT_TOL) => gr.push((loc, k)),
                        _ => groups.push(vec![(loc, k)]),
                    }
                }
                let order = groups
                    .into_iter()
                    .flat_map(|gr| {
                        let mut ks: Vec<_> = gr.into_iter().map(|(_, k)| k).collect();
                        ks.sort();
                        ks
                    })
                    .collect();
                (key(ci), order)
            })
            .collect();
        crossing_order.sort();
        Self {
            ordinary: g.count_tps(TpKind::Ordinary),
            virtual_count: g.count_tps(TpKind::Virtual),
            terminations,
            crossings,
            degeneracies,
            crossing_order,
            failures,
        }
    }

    pub fn has_connection(&self) -> bool {
        self.degeneracies.iter().any(|d| d.2 == DegeneracyKind::Connection)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A curve runs into a turning point.
    TpHit,
    /// Crossing pattern changes without an observed connection.
    Reordering,
    /// A crossing enters or leaves the bounded region; an artefact of
    /// truncating the plane.
    RegionExit,
}

/// A topology change located between two nearby values of `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEvent {
    pub theta: f64,
    pub bracket: (f64, f64),
    pub kind: EventKind,
    /// Turning points involved (from degeneracies or matched critical angles).
    pub participants: Vec<usize>,
    pub before: Signature,
    pub after: Signature,
    /// Signature exactly at an observed connection, if one was sampled.
    pub at: Option<Signature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub theta: f64,
    pub signature: Option<Signature>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub turning_points: Vec<TurningPoint>,
    pub samples: Vec<SweepSample>,
    pub events: Vec<SweepEvent>,
    pub critical_angles: Vec<CriticalAngle>,
}

/// Signatures at `steps` equally spaced angles in `[theta_from, theta_to]`;
/// every change between neighbours is bisected down to [`SWEEP_RESOLUTION`].
/// Turning points are computed once and shared by every sample.
pub fn sweep_theta(
    surface: &RootSurface,
    tps: &[TurningPoint],
    theta_from: f64,
    theta_to: f64,
    steps: usize,
    config: &GeometryConfig,
) -> Result<SweepResult> {
    if steps < 2 {
        return Err(WkbError::Input("a sweep needs at least 2 steps".into()));
    }
    let geometry_at = |theta: f64| build_geometry_with(surface, tps, &config.with_theta(theta));
    let samples: Vec<SweepSample> = (0..steps)
        .map(|i| {
            let theta = theta_from + (theta_to - theta_from) * i as f64 / (steps - 1) as f64;
            match config.with_theta(theta).validate() {
                Ok(()) => SweepSample { theta, signature: Some(Signature::of(&geometry_at(theta))), error: None },
                Err(e) => SweepSample { theta, signature: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let critical = all_critical_angles(surface, tps);

    let mut raw: Vec<SweepEvent> = Vec::new();
    for w in samples.windows(2) {
        let (Some(s0), Some(s1)) = (&w[0].signature, &w[1].signature) else { continue };
        // Several changes may fall between two samples: after locating one,
        // continue from its far side until the end signature is reached.
        let mut lo = w[0].theta;
        let mut slo = s0.clone();
        let mut g_lo: Option<StokesGeometry> = None;
        for _ in 0..MAX_EVENTS_PER_WINDOW {
            if slo == *s1 {
                break;
            }
            let mut a = lo;
            let mut hi = w[1].theta;
            let mut shi = s1.clone();
            let mut g_hi: Option<StokesGeometry> = None;
            while (hi - a).abs() > SWEEP_RESOLUTION {
                let mid = 0.5 * (a + hi);
                let gm = geometry_at(mid);
                let sm = Signature::of(&gm);
                if sm == slo {
                    a = mid;
                    g_lo = Some(gm);
                } else {
                    hi = mid;
                    shi = sm;
                    g_hi = Some(gm);
                }
            }
            let g_a = g_lo.take().unwrap_or_else(|| geometry_at(a));
            let g_b = g_hi.unwrap_or_else(|| geometry_at(hi));
            let mut event = make_event(a, hi, slo.clone(), shi.clone(), tps, &critical);
            if event.kind == EventKind::Reordering && is_region_exit(&g_a, &g_b) {
                event.kind = EventKind::RegionExit;
            }
            raw.push(event);
            lo = hi;
            slo = shi;
            g_lo = Some(g_b);
        }
    }
    let mut events: Vec<SweepEvent> = Vec::new();
    for e in raw {
        match events.last_mut() {
            Some(last) if (e.bracket.0 - last.bracket.1).abs() <= EVENT_MERGE_GAP => {
                // Prefer a signature that shows the connection itself.
                let at = [last.at.as_ref(), Some(&last.after), e.at.as_ref()]
                    .into_iter()
                    .flatten()
                    .find(|s| s.has_connection())
                    .or(last.at.as_ref())
                    .cloned();
                last.bracket.1 = e.bracket.1;
                last.theta = 0.5 * (last.bracket.0 + last.bracket.1);
                last.after = e.after;
                last.at = at;
                last.kind = match (last.kind, e.kind) {
                    (EventKind::TpHit, _) | (_, EventKind::TpHit) => EventKind::TpHit,
                    (EventKind::RegionExit, EventKind::RegionExit) => EventKind::RegionExit,
                    _ => EventKind::Reordering,
                };
                for p in e.participants {
                    if !last.participants.contains(&p) {
                        last.participants.push(p);
                    }
                }
                last.participants.sort();
                if last.at.as_ref().is_some_and(|s| s.has_connection()) {
                    last.theta = midpoint_of_connection(last, &critical);
                }
            }
            _ => events.push(e),
        }
    }
    Ok(SweepResult { turning_points: tps.to_vec(), samples, events, critical_angles: critical })
}

/// Best estimate of the angle of an event whose middle sample is exactly on
/// the connection: the critical angle in the bracket, else the bracket centre.
fn midpoint_of_connection(e: &SweepEvent, critical: &[CriticalAngle]) -> f64 {
    critical
        .iter()
        .map(|c| c.theta)
        .find(|t| *t >= e.bracket.0 - CRITICAL_ANGLE_MATCH && *t <= e.bracket.1 + CRITICAL_ANGLE_MATCH)
        .unwrap_or(0.5 * (e.bracket.0 + e.bracket.1))
}

fn make_event(
    lo: f64,
    hi: f64,
    before: Signature,
    after: Signature,
    tps: &[TurningPoint],
    critical: &[CriticalAngle],
) -> SweepEvent {
    let theta = 0.5 * (lo + hi);
    let near_critical: Vec<&CriticalAngle> = critical
        .iter()
        .filter(|c| angle_distance(c.theta, theta) <= CRITICAL_ANGLE_MATCH)
        .collect();
    let observed = before.has_connection() || after.has_connection();
    let mut participants: Vec<usize> = Vec::new();
    for s in [&before, &after] {
        for d in &s.degeneracies {
            participants.extend([d.0, d.1]);
        }
    }
    if participants.is_empty() {
        for c in &near_critical {
            participants.extend([c.from, c.to]);
        }
    }
    participants.retain(|p| *p < tps.len());
    participants.sort();
    participants.dedup();
    let kind = if observed || !near_critical.is_empty() { EventKind::TpHit } else { EventKind::Reordering };
    let at = if after.has_connection() {
        Some(after.clone())
    } else if before.has_connection() {
        Some(before.clone())
    } else {
        None
    };
    SweepEvent { theta, bracket: (lo, hi), kind, participants, before, after, at }
}

/// Whether two geometries differ only by crossings at the region boundary.
fn is_region_exit(a: &StokesGeometry, b: &StokesGeometry) -> bool {
    let (sa, sb) = (Signature::of(a), Signature::of(b));
    if sa.terminations != sb.terminations || sa.degeneracies != sb.degeneracies || sa.failures != sb.failures {
        return false;
    }
    let margin = 4.0 * a.config.step_max;
    let key = |g: &StokesGeometry, x: &Crossing| {
        let k = |i: usize| (g.curves[i].source_index, g.curves[i].direction);
        let (p, q) = (k(x.curves.0), k(x.curves.1));
        (p.min(q), p.max(q))
    };
    let mut changed = Vec::new();
    for (g, h) in [(a, b), (b, a)] {
        let mut pool: Vec<_> = h.crossings.iter().map(|x| key(h, x)).collect();
        for x in &g.crossings {
            let k = key(g, x);
            match pool.iter().position(|p| *p == k) {
                Some(i) => {
                    pool.swap_remove(i);
                }
                None => changed.push((g.config.region, x.location)),
            }
        }
    }
    !changed.is_empty() && changed.iter().all(|(r, loc)| r.boundary_distance(*loc) <= margin)
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Comparison of the configurations on both sides of an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleSwitch {
    pub same_turning_points: bool,
    pub same_curve_count: bool,
    pub incidence_changed: bool,
    /// Kinds of the turning points joined at the event, as `(from, to)`.
    pub participant_kinds: Vec<(TpKind, TpKind)>,
}

impl RoleSwitch {
    /// Turning points and curve counts unchanged while the incidence pattern
    /// changes, with connections involving both kinds of turning point.
    pub fn holds(&self) -> bool {
        self.same_turning_points
            && self.same_curve_count
            && self.incidence_changed
            && self.participant_kinds.iter().any(|(a, b)| a != b)
    }
}

/// Compare geometries just before, at, and just after an event.
pub fn role_switch(before: &StokesGeometry, at: &StokesGeometry, after: &StokesGeometry) -> RoleSwitch {
    let same_turning_points = before.turning_points == after.turning_points
        && before.turning_points == at.turning_points;
    let same_curve_count = before.curves.len() == after.curves.len();
    let (sb, sa) = (Signature::of(before), Signature::of(after));
    let incidence_changed = sb.crossings != sa.crossings || sb.degeneracies != sa.degeneracies;
    let mut participant_kinds: Vec<(TpKind, TpKind)> = at
        .degeneracies
        .iter()
        .filter(|d| d.kind == DegeneracyKind::Connection)
        .map(|d| (at.turning_points[d.from].kind, at.turning_points[d.to].kind))
        .collect();
    participant_kinds.sort();
    participant_kinds.dedup();
    RoleSwitch { same_turning_points, same_curve_count, incidence_changed, participant_kinds }
}
