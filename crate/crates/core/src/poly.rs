//! Dense univariate polynomials with complex coefficients and a simultaneous
//! (Aberth–Ehrlich) root finder with Newton polishing.

use crate::Complex;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial in `x` stored as ascending coefficients.
///
/// The coefficient vector is kept trimmed: the last entry is nonzero unless
/// the polynomial is zero, in which case the vector is empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Complex>", into = "Vec<Complex>")]
pub struct XPolynomial {
    coeffs: Vec<Complex>,
}

impl From<Vec<Complex>> for XPolynomial {
    fn from(coeffs: Vec<Complex>) -> Self {
        Self::new(coeffs)
    }
}

impl From<XPolynomial> for Vec<Complex> {
    fn from(p: XPolynomial) -> Self {
        p.coeffs
    }
}

impl XPolynomial {
    pub fn new(mut coeffs: Vec<Complex>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c * x^k`.
    pub fn monomial(c: Complex, k: usize) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::monomial(Complex::new(1.0, 0.0), 1)
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn coeff(&self, k: usize) -> Complex {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn eval(&self, x: Complex) -> Complex {
        horner(&self.coeffs, x)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Add for &XPolynomial {
    type Output = XPolynomial;
    fn add(self, rhs: &XPolynomial) -> XPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        XPolynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &XPolynomial {
    type Output = XPolynomial;
    fn sub(self, rhs: &XPolynomial) -> XPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        XPolynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &XPolynomial {
    type Output = XPolynomial;
    fn mul(self, rhs: &XPolynomial) -> XPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return XPolynomial::zero();
        }
        let mut out = vec![Complex::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        XPolynomial::new(out)
    }
}

impl Neg for &XPolynomial {
    type Output = XPolynomial;
    fn neg(self) -> XPolynomial {
        XPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

/// `|z|` without the overflow guards of `hypot`; fine for the magnitudes
/// handled here and much cheaper in inner loops.
#[inline]
pub(crate) fn abs(z: Complex) -> f64 {
    z.norm_sqr().sqrt()
}

pub(crate) fn horner(coeffs: &[Complex], x: Complex) -> Complex {
    coeffs
        .iter()
        .rev()
        .fold(Complex::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// Value and first derivative by Horner's scheme.
pub(crate) fn horner_with_derivative(coeffs: &[Complex], x: Complex) -> (Complex, Complex) {
    let zero = Complex::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Backward-error scale `sum |c_k| max(1, |x|)^k`, used to judge residuals.
pub(crate) fn residual_scale(coeffs: &[Complex], x: Complex) -> f64 {
    let r = abs(x).max(1.0);
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + abs(*c))
}

const ABERTH_MAX_ITER: usize = 600;

/// All roots of the polynomial with ascending coefficients `coeffs`.
///
/// `init`, when given, supplies starting guesses (one per root); this is how
/// root tracking warm-starts consecutive solves. Returns `None` when the
/// iteration fails to reach backward-stable residuals.
pub fn polynomial_roots(coeffs: &[Complex], init: Option<&[Complex]>) -> Option<Vec<Complex>> {
    let mut c: Vec<Complex> = coeffs.to_vec();
    while c.last().is_some_and(|v| abs(*v) == 0.0) {
        c.pop();
    }
    if c.is_empty() {
        return None;
    }
    let n = c.len() - 1;
    match n {
        0 => return Some(Vec::new()),
        1 => return Some(vec![-c[0] / c[1]]),
        _ => {}
    }
    let lead = c[n];
    let monic: Vec<Complex> = c.iter().map(|v| v / lead).collect();

    let mut z: Vec<Complex> = match init {
        Some(g) if g.len() == n && g.iter().all(|v| v.is_finite()) => separate_guesses(g),
        _ => initial_circle(&monic),
    };

    let eps = f64::EPSILON;
    let mut converged = vec![false; n];
    for _ in 0..ABERTH_MAX_ITER {
        let mut all_done = true;
        for k in 0..n {
            if converged[k] {
                continue;
            }
            let (p, dp) = horner_with_derivative(&monic, z[k]);
            let scale = residual_scale(&monic, z[k]);
            if abs(p) <= 4.0 * eps * scale {
                converged[k] = true;
                continue;
            }
            all_done = false;
            let ratio = if abs(dp) == 0.0 {
                Complex::new(1e-8 * (1.0 + abs(z[k])), 0.0)
            } else {
                p / dp
            };
            let mut s = Complex::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if abs(d) > 0.0 {
                        s += d.inv();
                    }
                }
            }
            let denom = Complex::new(1.0, 0.0) - ratio * s;
            let w = if abs(denom) == 0.0 { ratio } else { ratio / denom };
            z[k] -= w;
            if abs(w) <= 2.0 * eps * (1.0 + abs(z[k])) {
                converged[k] = true;
            }
        }
        if all_done {
            break;
        }
    }

    for zk in z.iter_mut() {
        polish(&monic, zk);
    }
    let ok = z.iter().all(|zk| {
        zk.is_finite() && {
            let p = horner(&monic, *zk);
            abs(p) <= 1e-11 * residual_scale(&monic, *zk).max(f64::MIN_POSITIVE)
        }
    });
    ok.then_some(z)
}

/// Newton polish that only accepts steps reducing the residual.
fn polish(monic: &[Complex], z: &mut Complex) {
    let mut best = abs(horner(monic, *z));
    for _ in 0..8 {
        if best == 0.0 {
            return;
        }
        let (p, dp) = horner_with_derivative(monic, *z);
        if abs(dp) == 0.0 {
            return;
        }
        let cand = *z - p / dp;
        let r = abs(horner(monic, cand));
        if r < best {
            *z = cand;
            best = r;
        } else {
            return;
        }
    }
}

fn initial_circle(monic: &[Complex]) -> Vec<Complex> {
    let n = monic.len() - 1;
    // Fujiwara-type radius: max |a_{n-k}|^{1/k}.
    let mut radius: f64 = 0.0;
    for k in 1..=n {
        radius = radius.max(abs(monic[n - k]).powf(1.0 / k as f64));
    }
    if radius == 0.0 {
        radius = 1.0;
    }
    let center = -monic[n - 1] / n as f64;
    (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            center + Complex::from_polar(radius, ang)
        })
        .collect()
}

fn separate_guesses(g: &[Complex]) -> Vec<Complex> {
    let mut z = g.to_vec();
    let scale = 1.0 + z.iter().map(|v| abs(*v)).fold(0.0, f64::max);
    for i in 0..z.len() {
        for j in 0..i {
            if abs(z[i] - z[j]) <= 1e-12 * scale {
                z[i] += Complex::from_polar(1e-7 * scale, 0.7 + i as f64);
            }
        }
    }
    z
}
