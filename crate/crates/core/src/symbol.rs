//! Characteristic symbols `P(x, xi)` with polynomial-in-`x` coefficients.

use crate::error::{Result, WkbError};
use crate::exact::{self, ExactPoly};
use crate::poly::{self, polynomial_roots, XPolynomial};
use crate::Complex;
use serde::{Deserialize, Serialize};

/// Coefficient degree above which the discriminant is computed numerically.
const EXACT_DEGREE_LIMIT: usize = 12;

/// Axis-aligned rectangle in the complex `x`-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Region {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0: x0.min(x1), y0: y0.min(y1), x1: x0.max(x1), y1: y0.max(y1) }
    }

    /// The square `[-h, h] x [-h, h]`.
    pub fn square(h: f64) -> Self {
        Self::new(-h, -h, h, h)
    }

    pub fn contains(&self, z: Complex) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    pub fn contains_with_margin(&self, z: Complex, margin: f64) -> bool {
        z.re >= self.x0 - margin
            && z.re <= self.x1 + margin
            && z.im >= self.y0 - margin
            && z.im <= self.y1 + margin
    }

    /// Distance from an interior point to the boundary (negative outside).
    pub fn boundary_distance(&self, z: Complex) -> f64 {
        (z.re - self.x0).min(self.x1 - z.re).min(z.im - self.y0).min(self.y1 - z.im)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex {
        Complex::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn is_bounded(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1].iter().all(|v| v.is_finite())
    }
}

/// The symbol `P(x, xi) = sum_m c_m(x) xi^m`.
///
/// A constant leading coefficient is normalized to one. A non-constant
/// leading coefficient is allowed; its zeros are treated as singular points
/// of the symbol, together with any explicitly declared singularities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymbolRepr", into = "SymbolRepr")]
pub struct CharSymbol {
    xi_coeffs: Vec<XPolynomial>,
    dx_coeffs: Vec<XPolynomial>,
    declared_singularities: Vec<Complex>,
    singular_points: Vec<Complex>,
}

/// Serialized form: `{"degree": n, "xi_coeffs": [...], "singularities": [...]}`.
#[derive(Serialize, Deserialize)]
struct SymbolRepr {
    degree: usize,
    xi_coeffs: Vec<XPolynomial>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    singularities: Vec<Complex>,
}

impl TryFrom<SymbolRepr> for CharSymbol {
    type Error = WkbError;
    fn try_from(r: SymbolRepr) -> Result<Self> {
        if r.xi_coeffs.len() != r.degree + 1 {
            return Err(WkbError::InvalidSymbol(format!(
                "degree {} needs {} xi coefficients, got {}",
                r.degree,
                r.degree + 1,
                r.xi_coeffs.len()
            )));
        }
        Self::with_singularities(r.xi_coeffs, r.singularities)
    }
}

impl From<CharSymbol> for SymbolRepr {
    fn from(s: CharSymbol) -> Self {
        Self { degree: s.degree(), xi_coeffs: s.xi_coeffs, singularities: s.declared_singularities }
    }
}

impl CharSymbol {
    pub fn new(xi_coeffs: Vec<XPolynomial>) -> Result<Self> {
        Self::with_singularities(xi_coeffs, Vec::new())
    }

    pub fn with_singularities(
        mut xi_coeffs: Vec<XPolynomial>,
        declared: Vec<Complex>,
    ) -> Result<Self> {
        if xi_coeffs.len() < 3 {
            return Err(WkbError::InvalidSymbol(format!(
                "degree in xi must be at least 2, got {}",
                xi_coeffs.len().saturating_sub(1)
            )));
        }
        let finite = xi_coeffs.iter().all(|p| p.coeffs().iter().all(|c| c.is_finite()))
            && declared.iter().all(|c| c.is_finite());
        if !finite {
            return Err(WkbError::InvalidSymbol("non-finite coefficient".into()));
        }
        let lead = xi_coeffs.last().expect("nonempty").clone();
        if lead.is_zero() {
            return Err(WkbError::InvalidSymbol("leading xi coefficient is zero".into()));
        }
        let mut singular_points = declared.clone();
        if lead.is_constant() {
            let s = lead.coeff(0).inv();
            for c in xi_coeffs.iter_mut() {
                *c = c.scale(s);
            }
        } else {
            // exact zeros at the origin first; the root finder is poor at
            // multiple roots
            let lc = lead.coeffs();
            let val = lc.iter().take_while(|c| c.norm() == 0.0).count();
            let mut zeros = vec![Complex::new(0.0, 0.0); val.min(1)];
            if lc.len() - val > 1 {
                zeros.extend(polynomial_roots(&lc[val..], None).ok_or_else(|| {
                    WkbError::InvalidSymbol("cannot locate zeros of the leading coefficient".into())
                })?);
            }
            for z in zeros {
                let z = snap_small(z);
                if !singular_points.iter().any(|s| (s - z).norm() < 1e-9) {
                    singular_points.push(z);
                }
            }
        }
        let dx_coeffs = xi_coeffs.iter().map(XPolynomial::derivative).collect();
        Ok(Self { xi_coeffs, dx_coeffs, declared_singularities: declared, singular_points })
    }

    /// Degree `n` in `xi`.
    pub fn degree(&self) -> usize {
        self.xi_coeffs.len() - 1
    }

    pub fn xi_coeffs(&self) -> &[XPolynomial] {
        &self.xi_coeffs
    }

    pub fn declared_singularities(&self) -> &[Complex] {
        &self.declared_singularities
    }

    /// Declared singularities plus zeros of a non-constant leading coefficient.
    pub fn singular_points(&self) -> &[Complex] {
        &self.singular_points
    }

    /// Largest coefficient degree in `x`.
    pub fn x_degree(&self) -> usize {
        self.xi_coeffs.iter().filter_map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Coefficients of `P(x, .)` at a fixed `x`, ascending in `xi`.
    pub fn coeffs_at(&self, x: Complex) -> Vec<Complex> {
        self.xi_coeffs.iter().map(|p| p.eval(x)).collect()
    }

    pub fn eval(&self, x: Complex, xi: Complex) -> Complex {
        poly::horner(&self.coeffs_at(x), xi)
    }

    /// `(P_xi, P_x)` at `(x, xi)`.
    /// `(P_xi, P_x)` at `x` for several values of `xi`.
    pub fn partials_many(&self, x: Complex, xis: &[Complex]) -> Vec<(Complex, Complex)> {
        let at_x: Vec<Complex> = self.coeffs_at(x);
        let d_coeffs: Vec<Complex> = self.dx_coeffs.iter().map(|p| p.eval(x)).collect();
        xis.iter()
            .map(|&xi| (poly::horner_with_derivative(&at_x, xi).1, poly::horner(&d_coeffs, xi)))
            .collect()
    }

    pub fn partials(&self, x: Complex, xi: Complex) -> (Complex, Complex) {
        let at_x: Vec<Complex> = self.coeffs_at(x);
        let (_, p_xi) = poly::horner_with_derivative(&at_x, xi);
        let d_coeffs: Vec<Complex> = self.dx_coeffs.iter().map(|p| p.eval(x)).collect();
        let p_x = poly::horner(&d_coeffs, xi);
        (p_xi, p_x)
    }

    /// Discriminant of `P(x, .)` with respect to `xi`, as a polynomial in `x`.
    ///
    /// Exact over the Gaussian rationals for coefficient degrees up to 12,
    /// otherwise by sampling the Sylvester determinant and interpolating.
    pub fn discriminant(&self) -> Result<XPolynomial> {
        let d = if self.x_degree() <= EXACT_DEGREE_LIMIT {
            self.discriminant_exact()?
        } else {
            self.discriminant_sampled()
        };
        if d.is_zero() {
            return Err(WkbError::DegenerateSymbol);
        }
        Ok(d)
    }

    pub(crate) fn exact_coeffs(&self) -> Result<Vec<ExactPoly>> {
        self.xi_coeffs
            .iter()
            .map(|p| {
                ExactPoly::from_complex(p.coeffs())
                    .ok_or_else(|| WkbError::InvalidSymbol("non-finite coefficient".into()))
            })
            .collect()
    }

    pub fn discriminant_exact(&self) -> Result<XPolynomial> {
        let exact = self.exact_coeffs()?;
        Ok(XPolynomial::new(exact::discriminant(&exact).to_complex()))
    }

    /// Sylvester determinant sampled on a circle and interpolated by an
    /// inverse discrete Fourier transform.
    pub fn discriminant_sampled(&self) -> XPolynomial {
        let n = self.degree();
        let bound = (2 * n - 1) * self.x_degree();
        let samples = bound + 1;
        let radius = 1.0;
        let values: Vec<Complex> = (0..samples)
            .map(|j| {
                let ang = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
                let x = Complex::from_polar(radius, ang + 0.1234);
                numeric_discriminant_at(&self.coeffs_at(x))
            })
            .collect();
        let mut coeffs = vec![Complex::new(0.0, 0.0); samples];
        for (k, ck) in coeffs.iter_mut().enumerate() {
            let mut acc = Complex::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let ang = 2.0 * std::f64::consts::PI * (j * k) as f64 / samples as f64;
                acc += v * Complex::from_polar(1.0, -ang);
            }
            // undo the rotation x = r e^{i(ang + phase)}
            *ck = acc / samples as f64 * Complex::from_polar(radius.powi(-(k as i32)), -0.1234 * k as f64);
        }
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for c in coeffs.iter_mut() {
            if c.norm() <= 1e-12 * scale {
                *c = Complex::new(0.0, 0.0);
            }
        }
        XPolynomial::new(coeffs)
    }
}

fn snap_small(z: Complex) -> Complex {
    Complex::new(
        if z.re.abs() < 1e-14 { 0.0 } else { z.re },
        if z.im.abs() < 1e-14 { 0.0 } else { z.im },
    )
}

/// `(-1)^{n(n-1)/2} Res(p, p') / a_n` for numeric coefficients.
pub(crate) fn numeric_discriminant_at(c: &[Complex]) -> Complex {
    let n = c.len() - 1;
    let dp: Vec<Complex> = c.iter().enumerate().skip(1).map(|(k, v)| v * k as f64).collect();
    let size = 2 * n - 1;
    let mut m = vec![vec![Complex::new(0.0, 0.0); size]; size];
    for i in 0..n - 1 {
        for (k, v) in c.iter().rev().enumerate() {
            m[i][i + k] = *v;
        }
    }
    for i in 0..n {
        for (k, v) in dp.iter().rev().enumerate() {
            m[n - 1 + i][i + k] = *v;
        }
    }
    let det = lu_determinant(m);
    let sign = if (n * (n - 1) / 2) % 2 == 1 { -1.0 } else { 1.0 };
    det / c[n] * sign
}

pub(crate) fn lu_determinant(mut m: Vec<Vec<Complex>>) -> Complex {
    let n = m.len();
    let mut det = Complex::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&a, &b| m[a][k].norm().total_cmp(&m[b][k].norm()))
            .expect("nonempty");
        if m[piv][k].norm() == 0.0 {
            return Complex::new(0.0, 0.0);
        }
        if piv != k {
            m.swap(piv, k);
            det = -det;
        }
        det *= m[k][k];
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            let f = row[k] / pivot_row[k];
            for (r, p) in row[k..n].iter_mut().zip(&pivot_row[k..n]) {
                *r -= f * p;
            }
        }
    }
    det
}

/// The `n` roots of `P(x, .)` in no particular order, polished to a relative
/// backward error of about `1e-12`; repeated roots appear with multiplicity.
pub fn eval_roots(symbol: &CharSymbol, x: Complex) -> Result<Vec<Complex>> {
    eval_roots_from(symbol, x, None)
}

pub(crate) fn eval_roots_from(
    symbol: &CharSymbol,
    x: Complex,
    init: Option<&[Complex]>,
) -> Result<Vec<Complex>> {
    let coeffs = symbol.coeffs_at(x);
    if !x.is_finite() || coeffs.last().is_none_or(|c| c.norm() == 0.0) {
        return Err(WkbError::RootFinding { x, coeffs });
    }
    match polynomial_roots(&coeffs, init) {
        Some(r) if r.len() == symbol.degree() => Ok(r),
        _ => Err(WkbError::RootFinding { x, coeffs }),
    }
}

/// Airy symbol `xi^2 - x`.
pub fn airy_symbol() -> CharSymbol {
    let c = |re: f64, im: f64| Complex::new(re, im);
    CharSymbol::new(vec![
        XPolynomial::new(vec![c(0.0, 0.0), c(-1.0, 0.0)]),
        XPolynomial::zero(),
        XPolynomial::constant(c(1.0, 0.0)),
    ])
    .expect("valid symbol")
}

/// The third-order symbol `xi^3 + 3 xi + 2 i x`.
pub fn bnr_symbol() -> CharSymbol {
    let c = |re: f64, im: f64| Complex::new(re, im);
    CharSymbol::new(vec![
        XPolynomial::new(vec![c(0.0, 0.0), c(0.0, 2.0)]),
        XPolynomial::constant(c(3.0, 0.0)),
        XPolynomial::zero(),
        XPolynomial::constant(c(1.0, 0.0)),
    ])
    .expect("valid symbol")
}
