//! Stokes curves as level curves `Im e^{i theta} y(x) = const`, where
//! `y(x) = int_source^x (xi_j - xi_k) dx`.
//!
//! Curves are traced by a predictor step along the direction in which
//! `e^{i theta} y` grows in real part, followed by Newton corrector steps
//! perpendicular to it. Root labels are carried along the curve itself, so
//! the pair `(j, k)` keeps its meaning without any global branch cuts.

use crate::error::{Result, WkbError};
use crate::surface::{RootSet, RootSurface, TpKind, TurningPoint};
use crate::symbol::Region;
use crate::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const MAX_CORRECTOR_ITER: usize = 5;
const EASY_STEPS_BEFORE_GROWTH: usize = 3;
const COEFF_SAMPLES: usize = 32;

/// Tracing parameters for one value of `theta = arg eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    pub theta: f64,
    pub region: Region,
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
    /// Allowed drift of `Im e^{i theta} y` along a curve.
    pub tol_level: f64,
    pub max_arclength: f64,
    /// Distance at which a curve is tested against a turning point.
    pub hit_radius: f64,
    /// Level mismatch accepted when deciding that a curve runs into a point.
    pub hit_level_tol: f64,
}

impl GeometryConfig {
    pub fn new(theta: f64, region: Region) -> Self {
        Self {
            theta,
            region,
            step_init: 1e-3,
            step_min: 1e-11,
            step_max: 0.05,
            tol_level: 1e-9,
            max_arclength: 10.0 * region.diameter().max(1.0),
            hit_radius: 1e-2,
            hit_level_tol: 1e-9,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.theta.is_finite()
            && self.region.is_bounded()
            && 0.0 < self.step_min
            && self.step_min <= self.step_init
            && self.step_init <= self.step_max
            && self.tol_level > 0.0
            && self.hit_level_tol > 0.0
            && self.hit_radius > 0.0
            && self.max_arclength > 0.0;
        if ok {
            Ok(())
        } else {
            Err(WkbError::Input(format!("inconsistent geometry configuration: {self:?}")))
        }
    }

    /// Distance from an ordinary turning point at which tracing starts.
    pub fn seed_offset(&self) -> f64 {
        10.0 * self.step_init
    }

    fn rotation(&self) -> Complex {
        Complex::from_polar(1.0, self.theta)
    }
}

/// Why a curve (or one end of it) stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    LeftRegion,
    HitTurningPoint { tp: usize, location: Complex, tp_kind: TpKind },
    HitSingularity { location: Complex },
    MaxLength,
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::LeftRegion => "left_region",
            Termination::HitTurningPoint { .. } => "hit_turning_point",
            Termination::HitSingularity { .. } => "hit_singularity",
            Termination::MaxLength => "max_length",
        }
    }

    pub fn hit_tp(&self) -> Option<usize> {
        match self {
            Termination::HitTurningPoint { tp, .. } => Some(*tp),
            _ => None,
        }
    }
}

/// A curve passing through a turning point without stopping there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incidence {
    pub tp: usize,
    pub location: Complex,
    /// Index of the curve point closest to the turning point.
    pub point: usize,
}

/// Uniform activity between two positions along the polyline. A position is
/// a point index plus the fraction of the following segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivitySpan {
    pub from: f64,
    pub to: f64,
    pub active: bool,
}

/// One traced Stokes curve.
///
/// Points run in the direction of increasing `Re e^{i theta} y`. For a curve
/// from a virtual turning point both directions are merged into one curve;
/// `source_point` is then the index of the virtual point itself and
/// `start_termination` records how the backward arm ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesCurve {
    pub source: TurningPoint,
    pub source_index: usize,
    pub direction: usize,
    /// Pair oriented so that `y = int (xi_j - xi_k) dx` grows along the curve.
    pub pair: (usize, usize),
    /// `-1` when `pair` is the source's pair reversed.
    pub branch_sign: i8,
    pub source_point: usize,
    pub seed_offset: f64,
    pub points: Vec<Complex>,
    pub y_values: Vec<Complex>,
    pub termination: Termination,
    #[serde(default)]
    pub start_termination: Option<Termination>,
    pub activity: Vec<ActivitySpan>,
    #[serde(default)]
    pub incidences: Vec<Incidence>,
}

impl StokesCurve {
    pub fn is_virtual(&self) -> bool {
        self.source.kind == TpKind::Virtual
    }

    /// Largest `|Im e^{i theta} y|` over the curve points.
    pub fn level_error(&self, theta: f64) -> f64 {
        let rot = Complex::from_polar(1.0, theta);
        self.y_values.iter().map(|y| (rot * y).im.abs()).fold(0.0, f64::max)
    }

    /// Activity at a polyline position (point index plus fraction).
    pub fn active_at(&self, pos: f64) -> bool {
        self.activity.iter().find(|s| s.from <= pos && pos <= s.to).is_some_and(|s| s.active)
    }

    /// Position of the polyline end.
    pub fn end_position(&self) -> f64 {
        self.points.len().saturating_sub(1) as f64
    }

    /// Turning points this curve ends on (either end).
    pub fn endpoints_hit(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.start_termination.iter().filter_map(Termination::hit_tp).collect();
        v.extend(self.termination.hit_tp());
        v
    }
}

/// Tracing failure; carries whatever part of the curve was traced.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct TraceError {
    #[source]
    pub error: WkbError,
    pub partial: Option<Box<StokesCurve>>,
}

impl From<WkbError> for TraceError {
    fn from(error: WkbError) -> Self {
        Self { error, partial: None }
    }
}

/// Seed angles `arg(x - a)` of the `m + 2` curves from a turning point of
/// multiplicity `m`, where `(xi_j - xi_k)^2 ~ c2 (x - a)^m`. Entry `n` solves
/// `Im e^{i theta} c (x - a)^{(m+2)/2} = 0` with the integer `n` in the
/// angle formula; the numbering is continuous in `theta`.
pub fn seed_angles(c2: Complex, multiplicity: usize, theta: f64) -> Vec<f64> {
    let m = multiplicity as f64;
    (0..multiplicity + 2)
        .map(|n| (2.0 * PI * n as f64 - 2.0 * theta - c2.arg()) / (m + 2.0))
        .collect()
}

/// Unit directions in which Stokes curves leave `tp`.
pub fn seed_directions(surface: &RootSurface, tp: &TurningPoint, theta: f64) -> Result<Vec<Complex>> {
    match tp.kind {
        TpKind::Ordinary => {
            let local = LocalExpansion::new(surface, tp, 1e-2)?;
            Ok(seed_angles(local.c2, tp.multiplicity, theta)
                .into_iter()
                .map(|a| Complex::from_polar(1.0, a))
                .collect())
        }
        TpKind::Virtual => {
            let w = Complex::from_polar(1.0, theta) * (tp.xi_pair[0] - tp.xi_pair[1]);
            if w.norm() <= surface.tolerances().tol_tp {
                return Err(WkbError::DegenerateSeed { tp: tp.location, magnitude: w.norm() });
            }
            let u = w.conj() / w.norm();
            Ok(vec![u, -u])
        }
    }
}

/// Leading behaviour of `(xi_j - xi_k)^2` at an ordinary turning point and
/// labels on a small circle around it.
struct LocalExpansion {
    centre: Complex,
    radius: f64,
    c2: Complex,
    /// Labels at `centre + radius e^{i phi}` for the sampled angles.
    ring: Vec<(f64, RootSet)>,
}

impl LocalExpansion {
    fn new(surface: &RootSurface, tp: &TurningPoint, radius: f64) -> Result<Self> {
        let a = tp.location;
        let nearest_other = surface
            .obstacles()
            .iter()
            .filter(|o| (**o - a).norm() > 1e-12)
            .map(|o| (o - a).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = radius.min(0.25 * nearest_other);
        let towards = surface.anchor().x - a;
        let psi = if towards.norm() > 0.0 { towards.arg() } else { 0.0 };
        let mut cur = surface.labels_at(a + Complex::from_polar(radius, psi))?;
        let (j, k) = tp.pair;
        let m = tp.multiplicity as i32;
        let mut ring = Vec::with_capacity(COEFF_SAMPLES);
        let mut sum = Complex::new(0.0, 0.0);
        for s in 0..COEFF_SAMPLES {
            let phi = psi + 2.0 * PI * s as f64 / COEFF_SAMPLES as f64;
            let x = a + Complex::from_polar(radius, phi);
            // Chords between neighbouring ring points stay close to the circle.
            let sub = 4;
            let prev = phi - 2.0 * PI / COEFF_SAMPLES as f64;
            if s > 0 {
                for t in 1..=sub {
                    let ang = prev + (phi - prev) * t as f64 / sub as f64;
                    cur = surface.step(&cur, a + Complex::from_polar(radius, ang))?;
                }
            }
            let d = cur.roots[j] - cur.roots[k];
            sum += d * d / (x - a).powi(m);
            ring.push((phi, cur.clone()));
        }
        let c2 = sum / COEFF_SAMPLES as f64;
        if c2.norm() <= surface.tolerances().tol_tp {
            return Err(WkbError::DegenerateSeed { tp: a, magnitude: c2.norm() });
        }
        Ok(Self { centre: a, radius, c2, ring })
    }

    /// Labels at `centre + r e^{i phi}`, carried from the nearest ring sample
    /// (along the arc, then radially).
    fn labels_at(&self, surface: &RootSurface, phi: f64, r: f64) -> Result<RootSet> {
        let (phi0, start) = self
            .ring
            .iter()
            .min_by(|a, b| angle_gap(a.0, phi).total_cmp(&angle_gap(b.0, phi)))
            .expect("ring samples");
        let delta = wrap_angle(phi - phi0);
        let mut cur = start.clone();
        for t in 1..=4 {
            let ang = phi0 + delta * t as f64 / 4.0;
            cur = surface.step(&cur, self.centre + Complex::from_polar(self.radius, ang))?;
        }
        surface.step(&cur, self.centre + Complex::from_polar(r, phi))
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

fn angle_gap(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// A traced curve with the labelled roots at every point.
#[derive(Debug, Clone)]
pub(crate) struct TracedCurve {
    pub curve: StokesCurve,
    pub labels: Vec<RootSet>,
}

/// Curves leaving turning point `all_tps[tp_index]`: `m + 2` curves for an
/// ordinary point (ordered by direction index), one merged curve for a
/// virtual point.
pub fn trace_from(
    surface: &RootSurface,
    tp_index: usize,
    config: &GeometryConfig,
    all_tps: &[TurningPoint],
) -> Vec<std::result::Result<StokesCurve, TraceError>> {
    trace_from_labelled(surface, tp_index, config, all_tps)
        .into_iter()
        .map(|r| r.map(|t| t.curve))
        .collect()
}

pub(crate) fn trace_from_labelled(
    surface: &RootSurface,
    tp_index: usize,
    config: &GeometryConfig,
    all_tps: &[TurningPoint],
) -> Vec<std::result::Result<TracedCurve, TraceError>> {
    let tp = &all_tps[tp_index];
    if let Err(e) = config.validate() {
        return vec![Err(e.into())];
    }
    match tp.kind {
        TpKind::Virtual => vec![trace_virtual(surface, tp_index, config, all_tps)],
        TpKind::Ordinary => match LocalExpansion::new(surface, tp, config.seed_offset()) {
            Err(e) => vec![Err(e.into())],
            Ok(local) => (0..tp.multiplicity + 2)
                .map(|n| trace_ordinary(surface, &local, tp_index, n, config, all_tps))
                .collect(),
        },
    }
}

/// The single curve with direction index `direction` from `all_tps[tp_index]`.
pub fn trace_curve(
    surface: &RootSurface,
    tp_index: usize,
    direction: usize,
    config: &GeometryConfig,
    all_tps: &[TurningPoint],
) -> std::result::Result<StokesCurve, TraceError> {
    config.validate()?;
    let tp = &all_tps[tp_index];
    match tp.kind {
        TpKind::Virtual => trace_virtual(surface, tp_index, config, all_tps).map(|t| t.curve),
        TpKind::Ordinary => {
            let local = LocalExpansion::new(surface, tp, config.seed_offset())?;
            if direction >= tp.multiplicity + 2 {
                return Err(WkbError::Input(format!("direction index {direction} out of range")).into());
            }
            trace_ordinary(surface, &local, tp_index, direction, config, all_tps).map(|t| t.curve)
        }
    }
}

fn trace_ordinary(
    surface: &RootSurface,
    local: &LocalExpansion,
    tp_index: usize,
    direction: usize,
    config: &GeometryConfig,
    all_tps: &[TurningPoint],
) -> std::result::Result<TracedCurve, TraceError> {
    let tp = &all_tps[tp_index];
    let a = tp.location;
    let rot = config.rotation();
    let phi = seed_angles(local.c2, tp.multiplicity, config.theta)[direction];
    let r = local.radius;
    let mut labels = local.labels_at(surface, phi, r)?;
    let (mut j, mut k) = tp.pair;
    let tol_quad = surface.tolerances().tol_quad;

    let y_from_source = |labels: &RootSet, (j, k): (usize, usize)| -> Result<Complex> {
        let (vals, _) = surface.integrate_segment(labels, a, true, tol_quad)?;
        Ok(vals[k] - vals[j])
    };
    let mut y = y_from_source(&labels, (j, k))?;
    let mut branch_sign = 1;
    if (rot * y).re < 0.0 {
        std::mem::swap(&mut j, &mut k);
        y = -y;
        branch_sign = -1;
    }
    // Put the seed exactly on the zero level.
    for _ in 0..8 {
        let res = (rot * y).im;
        if res.abs() <= 0.1 * config.tol_level {
            break;
        }
        let w = rot * (labels.roots[j] - labels.roots[k]);
        let target = labels.x - Complex::new(0.0, 1.0) * res / w;
        labels = surface.step(&labels, target)?;
        y = y_from_source(&labels, (j, k))?;
    }

    let mut curve = StokesCurve {
        source: tp.clone(),
        source_index: tp_index,
        direction,
        pair: (j, k),
        branch_sign,
        source_point: 0,
        seed_offset: r,
        points: Vec::new(),
        y_values: Vec::new(),
        termination: Termination::MaxLength,
        start_termination: None,
        activity: Vec::new(),
        incidences: Vec::new(),
    };
    // The polyline starts at the turning point itself; the first segment
    // stands in for the curve inside the seed disc.
    let at_source = crate::symbol::eval_roots_from(surface.symbol(), a, Some(&labels.roots))?;
    let mut source_labels = labels.clone();
    source_labels.x = a;
    source_labels.roots = labels.roots.iter().map(|r| at_source[crate::surface::nearest_index(&at_source, *r)]).collect();
    let arm = trace_arm(surface, config, all_tps, tp_index, (j, k), 1.0, labels, y, 0.0);
    let mut all_labels = vec![source_labels];
    all_labels.extend(arm.labels);
    curve.points = all_labels.iter().map(|l| l.x).collect();
    curve.y_values = std::iter::once(Complex::new(0.0, 0.0)).chain(arm.y_values).collect();
    curve.incidences = arm
        .incidences
        .into_iter()
        .map(|mut i| {
            i.point += 1;
            i
        })
        .collect();
    curve.activity = vec![ActivitySpan { from: 0.0, to: curve.end_position(), active: true }];
    match arm.outcome {
        Ok(t) => {
            curve.termination = t;
            Ok(TracedCurve { curve, labels: all_labels })
        }
        Err(error) => Err(TraceError { error, partial: Some(Box::new(curve)) }),
    }
}

fn trace_virtual(
    surface: &RootSurface,
    tp_index: usize,
    config: &GeometryConfig,
    all_tps: &[TurningPoint],
) -> std::result::Result<TracedCurve, TraceError> {
    let tp = &all_tps[tp_index];
    let start = surface.labels_at(tp.location)?;
    let pair = tp.pair;
    let zero = Complex::new(0.0, 0.0);
    let fwd = trace_arm(surface, config, all_tps, tp_index, pair, 1.0, start.clone(), zero, 0.0);
    let bwd = trace_arm(surface, config, all_tps, tp_index, pair, -1.0, start, zero, 0.0);

    let nb = bwd.labels.len();
    let mut labels: Vec<RootSet> = bwd.labels.iter().rev().cloned().collect();
    labels.extend(fwd.labels.iter().skip(1).cloned());
    let mut y_values: Vec<Complex> = bwd.y_values.iter().rev().copied().collect();
    y_values.extend(fwd.y_values.iter().skip(1).copied());
    let source_point = nb - 1;
    let mut incidences: Vec<Incidence> = bwd
        .incidences
        .into_iter()
        .map(|mut i| {
            i.point = source_point - i.point;
            i
        })
        .collect();
    incidences.reverse();
    incidences.extend(fwd.incidences.into_iter().map(|mut i| {
        i.point += source_point;
        i
    }));
    let last = labels.len().saturating_sub(1) as f64;
    let mut curve = StokesCurve {
        source: tp.clone(),
        source_index: tp_index,
        direction: 0,
        pair,
        branch_sign: 1,
        source_point,
        seed_offset: 0.0,
        points: labels.iter().map(|l| l.x).collect(),
        y_values,
        termination: Termination::MaxLength,
        start_termination: None,
        activity: vec![ActivitySpan { from: 0.0, to: last, active: false }],
        incidences,
    };
    match (bwd.outcome, fwd.outcome) {
        (Ok(s), Ok(e)) => {
            curve.start_termination = Some(s);
            curve.termination = e;
            Ok(TracedCurve { curve, labels })
        }
        (Err(error), _) | (_, Err(error)) => Err(TraceError { error, partial: Some(Box::new(curve)) }),
    }
}

struct Arm {
    labels: Vec<RootSet>,
    y_values: Vec<Complex>,
    incidences: Vec<Incidence>,
    outcome: Result<Termination>,
}

/// Follow the level curve through `start` in the direction where
/// `sign * Re e^{i theta} y` increases.
#[allow(clippy::too_many_arguments)]
fn trace_arm(
    surface: &RootSurface,
    config: &GeometryConfig,
    all_tps: &[TurningPoint],
    source_index: usize,
    pair: (usize, usize),
    sign: f64,
    start: RootSet,
    y0: Complex,
    level: f64,
) -> Arm {
    let mut arm = Arm {
        labels: vec![start],
        y_values: vec![y0],
        incidences: Vec::new(),
        outcome: Ok(Termination::MaxLength),
    };
    arm.outcome = trace_arm_inner(surface, config, all_tps, source_index, pair, sign, level, &mut arm);
    arm
}

#[allow(clippy::too_many_arguments)]
fn trace_arm_inner(
    surface: &RootSurface,
    config: &GeometryConfig,
    all_tps: &[TurningPoint],
    source_index: usize,
    (j, k): (usize, usize),
    sign: f64,
    level: f64,
    arm: &mut Arm,
) -> Result<Termination> {
    let rot = config.rotation();
    let tol = surface.tolerances();
    let singular = surface.symbol().singular_points().to_vec();
    let start_x = arm.labels[0].x;
    let mut inside: Vec<bool> =
        all_tps.iter().map(|t| (t.location - start_x).norm() < config.hit_radius).collect();
    let mut h = config.step_init;
    let mut easy = 0usize;
    let mut arclength = 0.0;

    loop {
        if arclength >= config.max_arclength {
            return Ok(Termination::MaxLength);
        }
        let cur = arm.labels.last().expect("nonempty").clone();
        let y = *arm.y_values.last().expect("nonempty");
        let x = cur.x;

        let mut h_eff = h.min(config.step_max);
        let obstacle_gap = surface.obstacle_distance(x);
        h_eff = h_eff.min((0.1 * obstacle_gap).max(config.step_min));
        // Never step across the hit disc of a turning point.
        for t in all_tps {
            let d = (t.location - x).norm();
            h_eff = h_eff.min((d - 0.5 * config.hit_radius).max(0.5 * config.hit_radius));
        }

        let (next, next_y, iters) = loop {
            match corrector_step(surface, config, &cur, y, (j, k), sign, level, h_eff) {
                Some((lab, yn, it)) => break (lab, yn, it),
                None => {
                    h_eff *= 0.5;
                    easy = 0;
                    if h_eff < config.step_min {
                        return Err(WkbError::StepUnderflow { x });
                    }
                }
            }
        };
        h = h_eff;
        if iters <= 2 {
            easy += 1;
            if easy >= EASY_STEPS_BEFORE_GROWTH {
                h = (2.0 * h).min(config.step_max);
                easy = 0;
            }
        } else {
            easy = 0;
        }
        arclength += (next.x - x).norm();
        let xn = next.x;
        arm.labels.push(next);
        arm.y_values.push(next_y);

        if !config.region.contains(xn) {
            return Ok(Termination::LeftRegion);
        }
        if let Some(s) = singular.iter().find(|s| (**s - xn).norm() < config.hit_radius) {
            return Ok(Termination::HitSingularity { location: *s });
        }
        for (idx, tp) in all_tps.iter().enumerate() {
            let d = (tp.location - xn).norm();
            if d >= config.hit_radius {
                inside[idx] = false;
                continue;
            }
            if inside[idx] || (idx == source_index && tp.kind == TpKind::Virtual) {
                continue;
            }
            inside[idx] = true;
            let at = arm.labels.last().expect("nonempty").clone();
            let end_singular = surface.obstacle_at(tp.location).is_some();
            let (vals, _) = surface.integrate_segment(&at, tp.location, end_singular, tol.tol_quad)?;
            let y_t = next_y + vals[j] - vals[k];
            if ((rot * y_t).im - level).abs() > config.hit_level_tol {
                continue;
            }
            let shares_branch = [tp.pair.0, tp.pair.1].iter().any(|b| *b == j || *b == k);
            if tp.kind == TpKind::Ordinary && shares_branch {
                let mut end = at;
                end.x = tp.location;
                end.roots = crate::symbol::eval_roots_from(surface.symbol(), tp.location, Some(&end.roots))?;
                arm.labels.push(end);
                arm.y_values.push(y_t);
                return Ok(Termination::HitTurningPoint {
                    tp: idx,
                    location: tp.location,
                    tp_kind: tp.kind,
                });
            }
            arm.incidences.push(Incidence {
                tp: idx,
                location: tp.location,
                point: arm.labels.len() - 1,
            });
        }
    }
}

/// One predictor-corrector step of length about `h`. Returns the new labels,
/// `y` there and the number of corrector iterations, or `None` when the step
/// should be retried with a smaller `h`.
#[allow(clippy::too_many_arguments)]
fn corrector_step(
    surface: &RootSurface,
    config: &GeometryConfig,
    cur: &RootSet,
    y: Complex,
    pair: (usize, usize),
    sign: f64,
    level: f64,
    h: f64,
) -> Option<(RootSet, Complex, usize)> {
    let rot = config.rotation();
    let (j, k) = pair;
    let w = rot * (cur.roots[j] - cur.roots[k]);
    if w.norm() == 0.0 {
        return None;
    }
    let u = w.conj() / w.norm() * sign;
    let (dy, mut lab) = surface.pair_panel(cur, cur.x + u * h, pair).ok()?;
    let mut yc = y + dy;
    let mut iters = 0;
    loop {
        let res = (rot * yc).im - level;
        if res.abs() <= 0.1 * config.tol_level {
            break;
        }
        if iters >= MAX_CORRECTOR_ITER {
            return None;
        }
        let wc = rot * (lab.roots[j] - lab.roots[k]);
        if wc.norm() == 0.0 {
            return None;
        }
        let delta = -Complex::new(0.0, 1.0) * res / wc;
        if delta.norm() > 0.5 * h {
            return None;
        }
        let (dy, next) = surface.pair_panel(&lab, lab.x + delta, pair).ok()?;
        yc += dy;
        lab = next;
        iters += 1;
    }
    let step = lab.x - cur.x;
    let forward = (step * u.conj()).re;
    if forward <= 0.5 * step.norm() || sign * (rot * (yc - y)).re <= 0.0 {
        return None;
    }
    Some((lab, yc, iters))
}
