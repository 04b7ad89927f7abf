//! Labelled characteristic roots over the `x`-plane.
//!
//! A [`RootSurface`] fixes a global labelling of the roots at an anchor point
//! and transports it to any other point by continuation along straight paths
//! (with small detours around turning points). Integrals of roots along paths
//! are computed with the same continuation, so a branch index means the same
//! thing for every operation that shares a surface.

use crate::error::{Result, WkbError};
use crate::poly::{abs, polynomial_roots, XPolynomial};
use crate::quadrature::gauss_legendre;
use crate::symbol::{eval_roots_from, CharSymbol, Region};
use crate::Complex;
use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by root tracking and path integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative backward error for polished roots.
    pub tol_root: f64,
    /// Root separation below which two roots count as coalesced.
    pub tol_tp: f64,
    /// Absolute quadrature tolerance for path integrals.
    pub tol_quad: f64,
    /// Minimum distance between a path and a turning point it does not end at.
    pub tp_clearance: f64,
    /// Smallest continuation step before matching is declared ambiguous.
    pub min_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_root: 1e-12, tol_tp: 1e-6, tol_quad: 1e-13, tp_clearance: 1e-3, min_step: 1e-13 }
    }
}

/// Roots of the symbol at `x`, indexed by global branch label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub x: Complex,
    pub roots: Vec<Complex>,
}

impl RootSet {
    /// Smallest distance between two roots.
    pub fn min_gap(&self) -> f64 {
        min_gap(&self.roots)
    }

    /// Index of the root closest to `z`.
    pub fn nearest(&self, z: Complex) -> usize {
        nearest_index(&self.roots, z)
    }

    /// Indices `(i, j)`, `i < j`, of the closest pair of roots.
    pub fn closest_pair(&self) -> (usize, usize) {
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..self.roots.len() {
            for j in i + 1..self.roots.len() {
                let d = (self.roots[i] - self.roots[j]).norm();
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        (best.0, best.1)
    }
}

pub(crate) fn min_gap(roots: &[Complex]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            g = g.min(abs(roots[i] - roots[j]));
        }
    }
    g
}

pub(crate) fn nearest_index(roots: &[Complex], z: Complex) -> usize {
    roots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
        .map(|(i, _)| i)
        .expect("nonempty root set")
}

/// Kind of a turning point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TpKind {
    Ordinary,
    Virtual,
}

/// A located turning point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    #[serde(rename = "loc")]
    pub location: Complex,
    pub kind: TpKind,
    /// Branch labels `(j, k)` of the pair attached to the point.
    pub pair: (usize, usize),
    pub multiplicity: usize,
    /// Values of the two paired roots at the point.
    pub xi_pair: [Complex; 2],
    /// Set when the point lies on the region boundary (within tolerance).
    #[serde(default)]
    pub on_boundary: bool,
    /// For a virtual point: locations of the two turning points it was
    /// generated from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parents: Option<[Complex; 2]>,
}

/// Stable total order on complex numbers: lexicographic by `(re, im)`.
pub fn lex_cmp(a: &Complex, b: &Complex) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Distance from `p` to the segment `[a, b]`, and the projection parameter.
pub(crate) fn segment_distance(p: Complex, a: Complex, b: Complex) -> (f64, f64) {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return ((p - a).norm(), 0.0);
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    ((a + d * t - p).norm(), t)
}

/// Straight path from `from` to `to` with a semicircular detour of radius
/// `2 * clearance` around every obstacle closer than `clearance` to the
/// segment. Obstacles at the endpoints themselves are not avoided.
pub fn straight_path(
    from: Complex,
    to: Complex,
    obstacles: &[Complex],
    clearance: f64,
) -> Result<Vec<Complex>> {
    let d = to - from;
    let len = d.norm();
    if len == 0.0 {
        return Ok(vec![from]);
    }
    let unit = d / len;
    let endpoint_tol = 1e-9 * (1.0 + from.norm().max(to.norm()));
    let mut hits: Vec<(f64, Complex)> = Vec::new();
    for &ob in obstacles {
        if (ob - from).norm() <= endpoint_tol || (ob - to).norm() <= endpoint_tol {
            continue;
        }
        let (dist, t) = segment_distance(ob, from, to);
        if dist < clearance {
            let along = t * len;
            let radius = 2.0 * clearance + dist;
            if along - radius <= 0.0 || along + radius >= len {
                return Err(WkbError::TooCloseToTurningPoint { tp: ob, clearance });
            }
            hits.push((along, ob));
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut path = vec![from];
    let left = unit * Complex::new(0.0, 1.0);
    for (along, ob) in hits {
        let centre = from + unit * along;
        let off = ob - centre;
        let radius = 2.0 * clearance + off.norm();
        // Arc from centre - radius*unit to centre + radius*unit through the
        // left side of the direction of travel.
        const ARC_SEGMENTS: usize = 12;
        for s in 0..=ARC_SEGMENTS {
            let phi = std::f64::consts::PI * (1.0 - s as f64 / ARC_SEGMENTS as f64);
            let p = centre + (unit * phi.cos() + left * phi.sin()) * radius;
            path.push(p);
        }
    }
    path.push(to);
    Ok(path)
}

/// Greedy nearest-pair assignment `old[i] -> new[assign[i]]`.
fn greedy_match(old: &[Complex], new: &[Complex]) -> Vec<usize> {
    let n = old.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, o) in old.iter().enumerate() {
        for (j, v) in new.iter().enumerate() {
            pairs.push(((o - v).norm_sqr(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut assign = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, i, j) in pairs {
        if assign[i] == usize::MAX && !used[j] {
            assign[i] = j;
            used[j] = true;
        }
    }
    assign
}

/// Continue labelled roots along the straight segment `from.x -> to`.
///
/// Steps are halved whenever the smallest gap between the new roots falls
/// below three times the largest root displacement of the step.
pub(crate) fn step_to(
    symbol: &CharSymbol,
    from: &RootSet,
    to: Complex,
    min_step: f64,
) -> Result<RootSet> {
    let mut cur = from.clone();
    let total = (to - from.x).norm();
    if total == 0.0 {
        return Ok(cur);
    }
    let mut h = total;
    loop {
        let rem = to - cur.x;
        let dist = rem.norm();
        if dist == 0.0 {
            return Ok(cur);
        }
        let last = h >= dist;
        let target = if last { to } else { cur.x + rem * (h / dist) };
        let dx = target - cur.x;
        let predicted: Vec<Complex> = cur
            .roots
            .iter()
            .zip(symbol.partials_many(cur.x, &cur.roots))
            .map(|(&r, (p_xi, p_x))| {
                let delta = -p_x / p_xi * dx;
                if delta.is_finite() && abs(delta) < 0.5 * (1.0 + abs(r)) {
                    r + delta
                } else {
                    r
                }
            })
            .collect();
        let new = eval_roots_from(symbol, target, Some(&predicted))?;
        let assign = greedy_match(&cur.roots, &new);
        let assigned: Vec<Complex> = assign.iter().map(|&j| new[j]).collect();
        let motion = cur
            .roots
            .iter()
            .zip(&assigned)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max);
        let gap = min_gap(&assigned);
        if gap > 0.0 && gap >= 3.0 * motion {
            cur = RootSet { x: target, roots: assigned };
            if last {
                return Ok(cur);
            }
            if gap > 12.0 * motion {
                h *= 2.0;
            }
        } else {
            h = h.min(dist) * 0.5;
            if h < min_step * (1.0 + cur.x.norm()) {
                return Err(WkbError::AmbiguousMatching { x: cur.x });
            }
        }
    }
}

/// Continue `start` (given at `path[0]`) along a polyline, returning the
/// labelled roots at every vertex.
///
/// The path must keep a distance of at least `tp_clearance` from every
/// obstacle; the offending turning point is named otherwise.
pub fn track_roots_with(
    symbol: &CharSymbol,
    path: &[Complex],
    start: &RootSet,
    obstacles: &[Complex],
    tol: &Tolerances,
) -> Result<Vec<RootSet>> {
    if path.is_empty() {
        return Ok(Vec::new());
    }
    check_clearance(path, obstacles, tol.tp_clearance, false)?;
    let mut out = Vec::with_capacity(path.len());
    let mut cur = if start.x == path[0] {
        start.clone()
    } else {
        step_to(symbol, start, path[0], tol.min_step)?
    };
    out.push(cur.clone());
    for &p in &path[1..] {
        cur = step_to(symbol, &cur, p, tol.min_step)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// [`track_roots_with`] using the symbol's own turning points and singular
/// points as obstacles.
pub fn track_roots(symbol: &CharSymbol, path: &[Complex], start: &RootSet) -> Result<Vec<RootSet>> {
    let tol = Tolerances::default();
    let obstacles = all_obstacles(symbol)?;
    track_roots_with(symbol, path, start, &obstacles, &tol)
}

fn all_obstacles(symbol: &CharSymbol) -> Result<Vec<Complex>> {
    let mut obs: Vec<Complex> =
        discriminant_clusters(symbol)?.into_iter().map(|(z, _)| z).collect();
    obs.extend_from_slice(symbol.singular_points());
    Ok(obs)
}

/// Every segment must clear every obstacle, except that path endpoints may
/// sit on an obstacle when `allow_endpoints` is set.
pub(crate) fn check_clearance(
    path: &[Complex],
    obstacles: &[Complex],
    clearance: f64,
    allow_endpoints: bool,
) -> Result<()> {
    let n = path.len();
    for (i, w) in path.windows(2).enumerate() {
        for &ob in obstacles {
            let at_start = i == 0 && (ob - path[0]).norm() <= 1e-9 * (1.0 + ob.norm());
            let at_end = i + 2 == n && (ob - path[n - 1]).norm() <= 1e-9 * (1.0 + ob.norm());
            if allow_endpoints && (at_start || at_end) {
                // Only the endpoint itself may touch; the segment must head away.
                continue;
            }
            if segment_distance(ob, w[0], w[1]).0 < clearance {
                return Err(WkbError::TooCloseToTurningPoint { tp: ob, clearance });
            }
        }
    }
    if n == 1 && !allow_endpoints {
        for &ob in obstacles {
            if (ob - path[0]).norm() < clearance {
                return Err(WkbError::TooCloseToTurningPoint { tp: ob, clearance });
            }
        }
    }
    Ok(())
}

/// Zeros of the discriminant grouped into clusters `(location, multiplicity)`,
/// excluding singular points of the symbol.
pub(crate) fn discriminant_clusters(symbol: &CharSymbol) -> Result<Vec<(Complex, usize)>> {
    let disc = symbol.discriminant()?;
    let mut coeffs = disc.coeffs().to_vec();
    // Exact zeros at the origin come from factors of x (only removed when x = 0
    // is singular; otherwise they are genuine turning points).
    let origin_singular = symbol.singular_points().iter().any(|s| s.norm() < 1e-12);
    let mut origin_mult = 0;
    while coeffs.first().is_some_and(|c| c.norm() == 0.0) && coeffs.len() > 1 {
        coeffs.remove(0);
        origin_mult += 1;
    }
    let mut zeros = polynomial_roots(&coeffs, None).ok_or(WkbError::RootFinding {
        x: Complex::new(f64::NAN, f64::NAN),
        coeffs: coeffs.clone(),
    })?;
    if !origin_singular {
        zeros.extend(std::iter::repeat_n(Complex::new(0.0, 0.0), origin_mult));
    }
    let scale = 1.0 + zeros.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut clusters: Vec<(Vec<Complex>, usize)> = Vec::new();
    for z in zeros {
        if symbol.singular_points().iter().any(|s| (s - z).norm() < 1e-7 * scale) {
            continue;
        }
        match clusters
            .iter_mut()
            .find(|(members, _)| members.iter().any(|m| (m - z).norm() < 1e-6 * scale))
        {
            Some((members, count)) => {
                members.push(z);
                *count += 1;
            }
            None => clusters.push((vec![z], 1)),
        }
    }
    let reduced = XPolynomial::new(coeffs);
    let mut out: Vec<(Complex, usize)> = clusters
        .into_iter()
        .map(|(members, count)| {
            let mean = members.iter().sum::<Complex>() / members.len() as f64;
            let z = if count > 1 { refine_multiple(&reduced, mean, count, 1e-6 * scale) } else { mean };
            (snap(z, scale), count)
        })
        .collect();
    out.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    Ok(out)
}

/// A zero of multiplicity `m` is a simple zero of the `(m-1)`-th derivative;
/// Newton on that derivative recovers the full precision the clustered roots
/// lose. Falls back to `guess` if the iteration leaves the cluster.
fn refine_multiple(p: &XPolynomial, guess: Complex, m: usize, radius: f64) -> Complex {
    let mut d = p.clone();
    for _ in 1..m {
        d = d.derivative();
    }
    let dd = d.derivative();
    let mut z = guess;
    for _ in 0..20 {
        let (v, s) = (d.eval(z), dd.eval(z));
        if s.norm() == 0.0 {
            return guess;
        }
        let step = v / s;
        z -= step;
        if (z - guess).norm() > radius {
            return guess;
        }
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

fn snap(z: Complex, scale: f64) -> Complex {
    let t = 1e-15 * scale;
    Complex::new(if z.re.abs() < t { 0.0 } else { z.re }, if z.im.abs() < t { 0.0 } else { z.im })
}

/// Labelled characteristic roots of a symbol, with its ordinary turning points.
#[derive(Debug, Clone)]
pub struct RootSurface {
    symbol: CharSymbol,
    region: Region,
    tol: Tolerances,
    anchor: RootSet,
    obstacles: Vec<Complex>,
    turning_points: Vec<TurningPoint>,
}

impl RootSurface {
    /// Surface with the default anchor: the node of a coarse grid over
    /// `region` where the roots are most widely separated.
    pub fn new(symbol: CharSymbol, region: Region, tol: Tolerances) -> Result<Self> {
        Self::build(symbol, region, tol, None)
    }

    pub fn with_anchor(
        symbol: CharSymbol,
        region: Region,
        tol: Tolerances,
        anchor: Complex,
    ) -> Result<Self> {
        Self::build(symbol, region, tol, Some(anchor))
    }

    fn build(
        symbol: CharSymbol,
        region: Region,
        tol: Tolerances,
        anchor: Option<Complex>,
    ) -> Result<Self> {
        if !region.is_bounded() {
            return Err(WkbError::Input("region must be bounded".into()));
        }
        let clusters = discriminant_clusters(&symbol)?;
        let mut obstacles: Vec<Complex> = clusters.iter().map(|c| c.0).collect();
        obstacles.extend_from_slice(symbol.singular_points());

        let anchor_x = match anchor {
            Some(a) => a,
            None => default_anchor(&symbol, &region, &obstacles, tol.tp_clearance)?,
        };
        let mut roots = eval_roots_from(&symbol, anchor_x, None)?;
        roots.sort_by(lex_cmp);
        let anchor = RootSet { x: anchor_x, roots };

        let mut surface =
            Self { symbol, region, tol, anchor, obstacles, turning_points: Vec::new() };
        let boundary_tol = 1e-9 * (1.0 + region.diameter());
        let mut tps = Vec::new();
        for (loc, mult) in clusters {
            if !region.contains_with_margin(loc, boundary_tol) {
                continue;
            }
            let mut tp = surface.classify_ordinary(loc, mult)?;
            tp.on_boundary = region.boundary_distance(loc).abs() <= boundary_tol;
            tps.push(tp);
        }
        surface.turning_points = tps;
        Ok(surface)
    }

    /// Pair labels of an ordinary turning point, read off from labels
    /// transported to a point just outside its clearance disc.
    fn classify_ordinary(&self, loc: Complex, multiplicity: usize) -> Result<TurningPoint> {
        let nearest_other = self
            .obstacles
            .iter()
            .filter(|o| (**o - loc).norm() > 1e-12)
            .map(|o| (o - loc).norm())
            .fold(f64::INFINITY, f64::min);
        let r = (10.0 * self.tol.tp_clearance).min(0.25 * nearest_other);
        let towards = self.anchor.x - loc;
        let dir = if towards.norm() > 0.0 { towards / towards.norm() } else { Complex::new(1.0, 0.0) };
        let probe = loc + dir * r;
        let near = self.labels_at(probe)?;
        let (j, k) = near.closest_pair();
        let at = eval_roots_from(&self.symbol, loc, Some(&near.roots))?;
        let xi_j = at[nearest_index(&at, near.roots[j])];
        let xi_k = at[nearest_index(&at, near.roots[k])];
        Ok(TurningPoint {
            location: loc,
            kind: TpKind::Ordinary,
            pair: (j, k),
            multiplicity,
            xi_pair: [xi_j, xi_k],
            on_boundary: false,
            parents: None,
        })
    }

    pub fn symbol(&self) -> &CharSymbol {
        &self.symbol
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn anchor(&self) -> &RootSet {
        &self.anchor
    }

    /// Ordinary turning points inside the region, sorted by `(re, im)`.
    pub fn turning_points(&self) -> &[TurningPoint] {
        &self.turning_points
    }

    /// All discriminant zeros (inside the region or not) and singular points.
    pub fn obstacles(&self) -> &[Complex] {
        &self.obstacles
    }

    pub fn degree(&self) -> usize {
        self.symbol.degree()
    }

    /// Whether `x` coincides with an obstacle (turning or singular point).
    pub fn obstacle_at(&self, x: Complex) -> Option<Complex> {
        self.obstacles.iter().copied().find(|o| (o - x).norm() <= 1e-9 * (1.0 + o.norm()))
    }

    /// Distance from `x` to the nearest obstacle.
    pub fn obstacle_distance(&self, x: Complex) -> f64 {
        self.obstacles.iter().map(|o| (o - x).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Straight path with detours around this surface's obstacles.
    pub fn straight_path(&self, from: Complex, to: Complex) -> Result<Vec<Complex>> {
        straight_path(from, to, &self.obstacles, self.tol.tp_clearance)
    }

    /// Labelled roots at `x`, transported from the anchor.
    pub fn labels_at(&self, x: Complex) -> Result<RootSet> {
        if let Some(ob) = self.obstacles.iter().find(|o| (**o - x).norm() < self.tol.tp_clearance) {
            return Err(WkbError::TooCloseToTurningPoint { tp: *ob, clearance: self.tol.tp_clearance });
        }
        let path = self.straight_path(self.anchor.x, x)?;
        let mut cur = self.anchor.clone();
        for &p in &path[1..] {
            cur = step_to(&self.symbol, &cur, p, self.tol.min_step)?;
        }
        Ok(cur)
    }

    /// Continue labelled roots along a polyline (clearance checked).
    pub fn track(&self, path: &[Complex], start: &RootSet) -> Result<Vec<RootSet>> {
        track_roots_with(&self.symbol, path, start, &self.obstacles, &self.tol)
    }

    /// Continue labelled roots to `to` along a straight segment without
    /// clearance checks.
    pub(crate) fn step(&self, from: &RootSet, to: Complex) -> Result<RootSet> {
        step_to(&self.symbol, from, to, self.tol.min_step)
    }

    /// `integral of (xi_j - xi_k) dx` along the segment `from.x -> to` from a
    /// single Gauss–Legendre panel, with the labels continued to `to`.
    /// Meant for short steps well away from turning points.
    pub(crate) fn pair_panel(
        &self,
        from: &RootSet,
        to: Complex,
        (j, k): (usize, usize),
    ) -> Result<(Complex, RootSet)> {
        let d = to - from.x;
        let mut cur = from.clone();
        let mut acc = Complex::new(0.0, 0.0);
        if d.norm() == 0.0 {
            return Ok((acc, cur));
        }
        for &(node, weight) in gauss_legendre() {
            cur = self.step(&cur, from.x + d * node)?;
            acc += (cur.roots[j] - cur.roots[k]) * weight;
        }
        Ok((acc * d, self.step(&cur, to)?))
    }

    /// `integral of xi_j dx` along `path`, with branch `j` fixed by the labels
    /// transported from the anchor to the midpoint of the first segment.
    pub fn integrate_root(&self, path: &[Complex], branch: usize) -> Result<Complex> {
        Ok(self.integrate_all(path)?[branch])
    }

    /// Integrals of every branch along `path` (see [`Self::integrate_root`]).
    /// Path endpoints may sit on turning points; interior points may not come
    /// within `tp_clearance` of one.
    pub fn integrate_all(&self, path: &[Complex]) -> Result<Vec<Complex>> {
        self.integrate_all_tol(path, self.tol.tol_quad)
    }

    pub(crate) fn integrate_all_tol(&self, path: &[Complex], tol_quad: f64) -> Result<Vec<Complex>> {
        let n = self.degree();
        let zero = vec![Complex::new(0.0, 0.0); n];
        let Some(k) = path.windows(2).position(|w| w[0] != w[1]) else {
            return Ok(zero);
        };
        check_clearance(path, &self.obstacles, self.tol.tp_clearance, true)?;
        let mid = 0.5 * (path[k] + path[k + 1]);
        let labels = self.labels_at(mid)?;
        self.integrate_from(path, k, &labels, tol_quad)
    }

    /// Integrals along `path` given labelled roots at a point in the interior
    /// of segment `k` (`labels.x` must lie on that segment).
    pub(crate) fn integrate_from(
        &self,
        path: &[Complex],
        k: usize,
        labels: &RootSet,
        tol_quad: f64,
    ) -> Result<Vec<Complex>> {
        let n = self.degree();
        let last = path.len() - 1;
        let mut total = vec![Complex::new(0.0, 0.0); n];

        let mut cur = labels.clone();
        for (i, &node) in path.iter().enumerate().skip(k + 1) {
            let singular = i == last && self.obstacle_at(node).is_some();
            let (vals, end) = self.integrate_segment(&cur, node, singular, tol_quad)?;
            for (t, v) in total.iter_mut().zip(vals) {
                *t += v;
            }
            if let Some(e) = end {
                cur = e;
            }
        }
        let mut cur = labels.clone();
        for i in (0..=k).rev() {
            let singular = i == 0 && self.obstacle_at(path[i]).is_some();
            let (vals, end) = self.integrate_segment(&cur, path[i], singular, tol_quad)?;
            for (t, v) in total.iter_mut().zip(vals) {
                *t -= v;
            }
            if let Some(e) = end {
                cur = e;
            }
        }
        Ok(total)
    }

    /// Integrals of every labelled root along the straight segment
    /// `start.x -> to`, by adaptive Gauss–Legendre quadrature with the roots
    /// continued to every node. When `end_singular` is set, `to` may be a
    /// turning point: the substitution `x = to - (to - start.x)(1 - u)^2`
    /// removes the square-root singularity and no root is evaluated at `to`.
    pub(crate) fn integrate_segment(
        &self,
        start: &RootSet,
        to: Complex,
        end_singular: bool,
        tol_quad: f64,
    ) -> Result<(Vec<Complex>, Option<RootSet>)> {
        let n = self.degree();
        let p = start.x;
        let d = to - p;
        if d.norm() == 0.0 {
            return Ok((vec![Complex::new(0.0, 0.0); n], Some(start.clone())));
        }
        let map = |u: f64| -> (Complex, Complex) {
            if end_singular {
                let s = 1.0 - u;
                (p + d * (1.0 - s * s), d * (2.0 * s))
            } else {
                (p + d * u, d)
            }
        };
        let mut cursor = start.clone();
        let rule = gauss_legendre();
        // Each panel also returns the integral of the largest |root|, which
        // bounds the noise that root errors put into the panel sums.
        let panel = |u0: f64, u1: f64, cursor: &mut RootSet| -> Result<(Vec<Complex>, f64)> {
            let w = u1 - u0;
            let mut acc = vec![Complex::new(0.0, 0.0); n];
            let mut mag = 0.0;
            for &(node, weight) in rule {
                let u = u0 + w * node;
                let (x, jac) = map(u);
                *cursor = step_to(&self.symbol, cursor, x, self.tol.min_step)?;
                for (a, r) in acc.iter_mut().zip(&cursor.roots) {
                    *a += r * jac * (weight * w);
                }
                let big = cursor.roots.iter().map(|r| abs(*r)).fold(0.0, f64::max);
                mag += big * abs(jac) * weight * w;
            }
            Ok((acc, mag))
        };

        const MAX_DEPTH: usize = 40;
        const QUAD_NOISE: f64 = 1e-13;
        let mut total = vec![Complex::new(0.0, 0.0); n];
        let whole = panel(0.0, 1.0, &mut cursor)?.0;
        let mut stack: Vec<(f64, f64, Vec<Complex>, usize)> = vec![(0.0, 1.0, whole, 0)];
        while let Some((u0, u1, whole, depth)) = stack.pop() {
            let um = 0.5 * (u0 + u1);
            let (left, lm) = panel(u0, um, &mut cursor)?;
            let (right, rm) = panel(um, u1, &mut cursor)?;
            let err = whole
                .iter()
                .zip(left.iter().zip(&right))
                .map(|(w, (l, r))| (w - l - r).norm())
                .fold(0.0, f64::max);
            // Roots carry a relative error of about QUAD_NOISE; refining below the
            // noise they induce only chases rounding.
            let floor = QUAD_NOISE * (lm + rm);
            if err <= (tol_quad * (u1 - u0)).max(floor) || depth >= MAX_DEPTH {
                for ((t, l), r) in total.iter_mut().zip(&left).zip(&right) {
                    *t += l + r;
                }
            } else {
                stack.push((um, u1, right, depth + 1));
                stack.push((u0, um, left, depth + 1));
            }
        }
        let end = if end_singular { None } else { Some(self.step(&cursor, to)?) };
        Ok((total, end))
    }
}

/// Grid node (9 x 9 over the region) maximising the smallest root gap, away
/// from turning and singular points.
fn default_anchor(
    symbol: &CharSymbol,
    region: &Region,
    obstacles: &[Complex],
    clearance: f64,
) -> Result<Complex> {
    const N: usize = 9;
    let mut best: Option<(f64, Complex)> = None;
    for i in 0..N {
        for j in 0..N {
            let x = Complex::new(
                region.x0 + region.width() * i as f64 / (N - 1) as f64,
                region.y0 + region.height() * j as f64 / (N - 1) as f64,
            );
            if obstacles.iter().any(|o| (o - x).norm() < 10.0 * clearance) {
                continue;
            }
            let Ok(r) = eval_roots_from(symbol, x, None) else { continue };
            let g = min_gap(&r);
            if best.is_none_or(|(bg, _)| g > bg) {
                best = Some((g, x));
            }
        }
    }
    best.map(|b| b.1).ok_or_else(|| WkbError::Input("no admissible anchor point in region".into()))
}

/// Ordinary turning points of `symbol` inside `region`.
pub fn ordinary_turning_points(symbol: &CharSymbol, region: Region) -> Result<Vec<TurningPoint>> {
    let surface = RootSurface::new(symbol.clone(), region, Tolerances::default())?;
    Ok(surface.turning_points().to_vec())
}
