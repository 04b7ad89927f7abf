//! Virtual turning points as zeros of the path-integral matching function
//!
//! ```text
//! F(x) = int_a^x xi_j dx - int_a^b xi_k dx - int_b^x xi_l dx
//! ```
//!
//! where `a` carries the pair `(j, k)` and `b` the pair `(k, l)`. `F` is
//! holomorphic away from turning points with `F'(x) = xi_j(x) - xi_l(x)`, so
//! zeros are found by damped Newton iteration from a seed grid.

use crate::error::Result;
use crate::surface::{lex_cmp, RootSet, RootSurface, TpKind, TurningPoint};
use crate::symbol::Region;
use crate::Complex;
use serde::{Deserialize, Serialize};

/// Tolerance on `|F|` for a converged virtual turning point.
pub const TOL_VTP: f64 = 1e-10;
/// Distance under which two located points are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Zeros closer than this to a singular point of the symbol are discarded:
/// the matching function has a logarithmic branch point there.
pub const SINGULAR_EXCLUSION: f64 = 1e-2;
const NEWTON_MAX_ITER: usize = 50;
const SCAN_TOL_QUAD: f64 = 1e-6;

/// Seed grid for the Newton search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedGrid {
    pub nx: usize,
    pub ny: usize,
}

impl Default for SeedGrid {
    fn default() -> Self {
        Self { nx: 41, ny: 41 }
    }
}

/// One instance of the matching condition.
#[derive(Debug, Clone, PartialEq)]
pub struct VtpProblem {
    pub tp_a: TurningPoint,
    pub tp_b: TurningPoint,
    /// Branch on the `a -> x` leg.
    pub j: usize,
    /// Shared branch, integrated along the connecting path.
    pub k: usize,
    /// Branch on the `b -> x` leg.
    pub l: usize,
    pub connecting_path: Vec<Complex>,
    pub region: Region,
    pub seeds: SeedGrid,
}

impl VtpProblem {
    /// Problem for two turning points whose pairs share exactly one branch,
    /// connected by a straight (detoured) path. `None` otherwise.
    pub fn new(surface: &RootSurface, tp_a: &TurningPoint, tp_b: &TurningPoint) -> Option<Self> {
        let (a0, a1) = tp_a.pair;
        let (b0, b1) = tp_b.pair;
        let shared: Vec<usize> = [a0, a1].into_iter().filter(|i| *i == b0 || *i == b1).collect();
        if shared.len() != 1 {
            return None;
        }
        let k = shared[0];
        let j = if a0 == k { a1 } else { a0 };
        let l = if b0 == k { b1 } else { b0 };
        if j == l {
            return None;
        }
        let connecting_path = surface.straight_path(tp_a.location, tp_b.location).ok()?;
        Some(Self {
            tp_a: tp_a.clone(),
            tp_b: tp_b.clone(),
            j,
            k,
            l,
            connecting_path,
            region: *surface.region(),
            seeds: SeedGrid::default(),
        })
    }

    pub fn with_connecting_path(mut self, path: Vec<Complex>) -> Self {
        self.connecting_path = path;
        self
    }
}

/// Result of a search: located points plus converged candidates rejected
/// because `F'` vanishes there.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VtpSearch {
    pub points: Vec<TurningPoint>,
    pub degenerate_candidates: Vec<Complex>,
}

/// Evaluator of `F` and `F'` for one problem; caches the middle integral.
pub struct MatchingFunction<'a> {
    surface: &'a RootSurface,
    problem: &'a VtpProblem,
    middle: Complex,
}

/// Value of `F`, its derivative and the labels used at `x`.
#[derive(Debug, Clone)]
pub struct MatchingValue {
    pub value: Complex,
    pub derivative: Complex,
    pub labels: RootSet,
}

impl<'a> MatchingFunction<'a> {
    pub fn new(surface: &'a RootSurface, problem: &'a VtpProblem) -> Result<Self> {
        let vals = surface.integrate_all(&problem.connecting_path)?;
        let middle = vals[shared_branch(surface, problem)?];
        Ok(Self { surface, problem, middle })
    }

    /// `int_a^b xi_k dx` along the connecting path.
    pub fn middle_integral(&self) -> Complex {
        self.middle
    }

    pub fn eval(&self, x: Complex) -> Result<MatchingValue> {
        self.eval_tol(x, self.surface.tolerances().tol_quad)
    }

    fn eval_tol(&self, x: Complex, tol_quad: f64) -> Result<MatchingValue> {
        let p = self.problem;
        let labels = self.surface.labels_at(x)?;
        let leg = |end: Complex| -> Result<Vec<Complex>> {
            let path = self.surface.straight_path(x, end)?;
            self.surface.integrate_from(&path, 0, &labels, tol_quad)
        };
        // int_x^a and int_x^b, continued from the labels at x
        let from_a = leg(p.tp_a.location)?;
        let from_b = leg(p.tp_b.location)?;
        let value = -from_a[p.j] - self.middle + from_b[p.l];
        let derivative = labels.roots[p.j] - labels.roots[p.l];
        Ok(MatchingValue { value, derivative, labels })
    }
}

/// Label, in the labelling [`RootSurface::integrate_all`] uses for the
/// connecting path, of the branch that takes the value of `xi_k` at both ends.
///
/// Labels along a bent path can differ from the global ones by a permutation,
/// so the branch is identified by its values next to `a` and `b` instead.
fn shared_branch(surface: &RootSurface, problem: &VtpProblem) -> Result<usize> {
    let path = &problem.connecting_path;
    let nondegenerate: Vec<usize> = (0..path.len().saturating_sub(1)).filter(|&i| path[i] != path[i + 1]).collect();
    let (Some(&first), Some(&last)) = (nondegenerate.first(), nondegenerate.last()) else {
        return Ok(problem.k);
    };
    let value_of_k = |tp: &TurningPoint| if tp.pair.0 == problem.k { tp.xi_pair[0] } else { tp.xi_pair[1] };
    let near = |from: Complex, towards: Complex| {
        let d = towards - from;
        let eps = (0.05 * d.norm()).max(10.0 * surface.tolerances().tp_clearance).min(0.5 * d.norm());
        from + d * (eps / d.norm())
    };
    let mid = 0.5 * (path[first] + path[first + 1]);
    let labels = surface.labels_at(mid)?;
    let near_a = surface.track(&[mid, near(path[first], path[first + 1])], &labels)?;
    let mut to_b = vec![mid];
    to_b.extend_from_slice(&path[first + 1..=last]);
    to_b.push(near(path[last + 1], path[last]));
    let near_b = surface.track(&to_b, &labels)?;
    let (ra, rb) = (&near_a[near_a.len() - 1].roots, &near_b[near_b.len() - 1].roots);
    let (va, vb) = (value_of_k(&problem.tp_a), value_of_k(&problem.tp_b));
    Ok((0..ra.len())
        .min_by(|&p, &q| {
            let score = |i: usize| (ra[i] - va).norm() + (rb[i] - vb).norm();
            score(p).total_cmp(&score(q))
        })
        .unwrap_or(problem.k))
}

/// `F(x)` for the problem (see module docs).
pub fn vtp_residual(surface: &RootSurface, problem: &VtpProblem, x: Complex) -> Result<Complex> {
    Ok(MatchingFunction::new(surface, problem)?.eval(x)?.value)
}

/// Zeros of `F` in the problem region that are not ordinary turning points.
///
/// Newton runs start from every seed-grid node where `|F|` is a local
/// minimum. Failure to converge from every seed yields an empty result.
pub fn find_virtual_tps(surface: &RootSurface, problem: &VtpProblem) -> Result<VtpSearch> {
    let f = MatchingFunction::new(surface, problem)?;
    let tol_tp = surface.tolerances().tol_tp;
    let region = problem.region;
    let (nx, ny) = (problem.seeds.nx.max(2), problem.seeds.ny.max(2));

    let node = |i: usize, j: usize| {
        Complex::new(
            region.x0 + region.width() * i as f64 / (nx - 1) as f64,
            region.y0 + region.height() * j as f64 / (ny - 1) as f64,
        )
    };
    let mut grid = vec![f64::INFINITY; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            if let Ok(v) = f.eval_tol(node(i, j), SCAN_TOL_QUAD) {
                grid[i * ny + j] = v.value.norm();
            }
        }
    }
    let mut seeds = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let v = grid[i * ny + j];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                        continue;
                    }
                    if grid[ii as usize * ny + jj as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push(node(i, j));
            }
        }
    }

    let mut out = VtpSearch::default();
    for seed in seeds {
        let Some((root, check)) = converge(&f, seed, &region) else { continue };
        if check.derivative.norm() <= tol_tp {
            if !out.degenerate_candidates.iter().any(|c| (c - root).norm() < DEDUP_RADIUS) {
                out.degenerate_candidates.push(root);
            }
            continue;
        }
        if out.points.iter().any(|t| (t.location - root).norm() < DEDUP_RADIUS) {
            continue;
        }
        out.points.push(virtual_point(problem, root, &check));
    }
    out.points.sort_by(|a, b| lex_cmp(&a.location, &b.location));
    Ok(out)
}

/// Newton refinement of a single virtual turning point from `guess`, e.g. to
/// follow a point while the symbol changes continuously. `None` if the
/// iteration does not converge to an admissible point.
pub fn refine_virtual_tp(
    surface: &RootSurface,
    problem: &VtpProblem,
    guess: Complex,
) -> Result<Option<TurningPoint>> {
    let f = MatchingFunction::new(surface, problem)?;
    Ok(converge(&f, guess, &problem.region)
        .filter(|(_, check)| check.derivative.norm() > surface.tolerances().tol_tp)
        .map(|(root, check)| virtual_point(problem, root, &check)))
}

fn virtual_point(problem: &VtpProblem, root: Complex, check: &MatchingValue) -> TurningPoint {
    TurningPoint {
        location: root,
        kind: TpKind::Virtual,
        pair: (problem.j, problem.l),
        multiplicity: 1,
        xi_pair: [check.labels.roots[problem.j], check.labels.roots[problem.l]],
        on_boundary: false,
        parents: Some([problem.tp_a.location, problem.tp_b.location]),
    }
}

/// Newton from `seed`, then re-verification with labels freshly transported
/// to the root.
fn converge(f: &MatchingFunction<'_>, seed: Complex, region: &Region) -> Option<(Complex, MatchingValue)> {
    let root = newton(f, seed, region)?;
    if f.surface.symbol().singular_points().iter().any(|s| (s - root).norm() < SINGULAR_EXCLUSION) {
        return None;
    }
    let check = f.eval(root).ok()?;
    (check.value.norm() <= TOL_VTP && region.contains(root)).then_some((root, check))
}

/// Damped Newton iteration on `F`; `None` if it does not converge.
fn newton(f: &MatchingFunction<'_>, seed: Complex, region: &Region) -> Option<Complex> {
    let mut x = seed;
    let mut cur = f.eval(x).ok()?;
    for _ in 0..NEWTON_MAX_ITER {
        if cur.value.norm() <= TOL_VTP {
            return Some(x);
        }
        if cur.derivative.norm() == 0.0 {
            return None;
        }
        let step = cur.value / cur.derivative;
        let mut t = 1.0;
        loop {
            let cand = x - step * t;
            if region.contains(cand) {
                if let Ok(v) = f.eval(cand) {
                    if v.value.norm() < cur.value.norm() {
                        x = cand;
                        cur = v;
                        break;
                    }
                }
            }
            t *= 0.5;
            if t < 1e-6 {
                return None;
            }
        }
    }
    (cur.value.norm() <= TOL_VTP).then_some(x)
}

/// Every admissible problem from ordered pairs of the given turning points.
pub fn enumerate_problems(surface: &RootSurface, tps: &[TurningPoint]) -> Vec<VtpProblem> {
    let mut out = Vec::new();
    for (ia, a) in tps.iter().enumerate() {
        for (ib, b) in tps.iter().enumerate() {
            if ia != ib {
                if let Some(p) = VtpProblem::new(surface, a, b) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Virtual turning points generated from the ordinary turning points of the
/// surface; each further level (up to `depth`) also pairs already-found
/// virtual points with the rest.
pub fn virtual_turning_points(surface: &RootSurface, depth: usize) -> Result<Vec<TurningPoint>> {
    let ordinary = surface.turning_points().to_vec();
    let mut found: Vec<TurningPoint> = Vec::new();
    let mut frontier: Vec<TurningPoint> = Vec::new();
    for level in 0..depth.max(1) {
        let mut problems = Vec::new();
        if level == 0 {
            problems = enumerate_problems(surface, &ordinary);
        } else {
            let mut all = ordinary.clone();
            all.extend(found.iter().cloned());
            for v in &frontier {
                for other in &all {
                    if (other.location - v.location).norm() < DEDUP_RADIUS {
                        continue;
                    }
                    problems.extend(VtpProblem::new(surface, v, other));
                    problems.extend(VtpProblem::new(surface, other, v));
                }
            }
        }
        let mut fresh = Vec::new();
        for p in &problems {
            for tp in find_virtual_tps(surface, p)?.points {
                let known = found.iter().chain(fresh.iter()).any(|t: &TurningPoint| {
                    (t.location - tp.location).norm() < DEDUP_RADIUS
                }) || ordinary.iter().any(|t| (t.location - tp.location).norm() < DEDUP_RADIUS);
                if !known {
                    fresh.push(tp);
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        found.extend(fresh.iter().cloned());
        frontier = fresh;
    }
    found.sort_by(|a, b| lex_cmp(&a.location, &b.location));
    Ok(found)
}
