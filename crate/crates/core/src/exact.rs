//! Exact arithmetic over the Gaussian rationals `Q(i)` and the polynomial
//! ring `Q(i)[x]`, used for resultants and discriminants of symbols whose
//! coefficients are small-degree polynomials.
//!
//! Floating-point inputs are converted exactly (every finite `f64` is a
//! dyadic rational), so the discriminant is exact for the symbol as given.

use crate::Complex;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn zero() -> Self {
        Self { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self { re: BigRational::one(), im: BigRational::zero() }
    }

    pub fn from_integer(n: i64) -> Self {
        Self { re: BigRational::from_integer(BigInt::from(n)), im: BigRational::zero() }
    }

    /// Exact conversion of a finite complex float.
    pub fn from_complex(z: Complex) -> Option<Self> {
        Some(Self { re: BigRational::from_float(z.re)?, im: BigRational::from_float(z.im)? })
    }

    pub fn to_complex(&self) -> Complex {
        Complex::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        assert!(!n.is_zero(), "inverse of zero");
        Self { re: &self.re / &n, im: -(&self.im / &n) }
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to scaled integer division for very large numerators/denominators.
    let num = r.numer();
    let den = r.denom();
    let shift = num.bits() as i64 - den.bits() as i64;
    let (n2, d2) = if shift > 60 {
        (num.clone(), den.clone() << (shift - 60) as usize)
    } else if shift < -60 {
        (num.clone() << (-shift - 60) as usize, den.clone())
    } else {
        (num.clone(), den.clone())
    };
    let q = BigRational::new(n2, d2).to_f64().unwrap_or(f64::NAN);
    let adj = if shift > 60 {
        (shift - 60) as i32
    } else if shift < -60 {
        -((-shift - 60) as i32)
    } else {
        0
    };
    q * 2f64.powi(adj)
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -&self.re, im: -&self.im }
    }
}

/// Polynomial in `x` over `Q(i)`, ascending coefficients, trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactPoly {
    coeffs: Vec<GaussianRational>,
}

impl ExactPoly {
    pub fn new(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::new(vec![c])
    }

    pub fn from_complex(coeffs: &[Complex]) -> Option<Self> {
        coeffs
            .iter()
            .map(|c| GaussianRational::from_complex(*c))
            .collect::<Option<Vec<_>>>()
            .map(Self::new)
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn to_complex(&self) -> Vec<Complex> {
        self.coeffs.iter().map(GaussianRational::to_complex).collect()
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Number of leading factors of `x` (index of the first nonzero coefficient).
    pub fn x_valuation(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Drop `k` factors of `x`; the low coefficients must be zero.
    pub fn shift_down(&self, k: usize) -> Self {
        assert!(self.coeffs.iter().take(k).all(|c| c.is_zero()));
        Self::new(self.coeffs.iter().skip(k).cloned().collect())
    }

    /// Exact division; `None` if `d` is zero or does not divide `self`.
    pub fn div_exact(&self, d: &ExactPoly) -> Option<ExactPoly> {
        let dd = d.degree()?;
        let Some(nd) = self.degree() else {
            return Some(ExactPoly::zero());
        };
        if nd < dd {
            return None;
        }
        let lead_inv = d.coeffs[dd].inv();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![GaussianRational::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = &rem[k + dd] * &lead_inv;
            if !q.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    rem[k + i] = &rem[k + i] - &(&q * dc);
                }
            }
            quot[k] = q;
        }
        rem.iter().all(|c| c.is_zero()).then(|| ExactPoly::new(quot))
    }
}

impl Add for &ExactPoly {
    type Output = ExactPoly;
    fn add(self, o: &ExactPoly) -> ExactPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = GaussianRational::zero();
        ExactPoly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&z) + o.coeffs.get(k).unwrap_or(&z))
                .collect(),
        )
    }
}

impl Sub for &ExactPoly {
    type Output = ExactPoly;
    fn sub(self, o: &ExactPoly) -> ExactPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = GaussianRational::zero();
        ExactPoly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&z) - o.coeffs.get(k).unwrap_or(&z))
                .collect(),
        )
    }
}

impl Mul for &ExactPoly {
    type Output = ExactPoly;
    fn mul(self, o: &ExactPoly) -> ExactPoly {
        if self.is_zero() || o.is_zero() {
            return ExactPoly::zero();
        }
        let mut out = vec![GaussianRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        ExactPoly::new(out)
    }
}

/// Determinant of a square matrix over `Q(i)[x]` by fraction-free Bareiss
/// elimination (every division is exact).
pub fn bareiss_determinant(mut m: Vec<Vec<ExactPoly>>) -> ExactPoly {
    let n = m.len();
    if n == 0 {
        return ExactPoly::constant(GaussianRational::one());
    }
    let mut sign = false;
    let mut prev = ExactPoly::constant(GaussianRational::one());
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = !sign;
                }
                None => return ExactPoly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[k][k] * &m[i][j]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign {
        det.scale(&GaussianRational::from_integer(-1))
    } else {
        det
    }
}

/// Sylvester matrix of `p` and `q`, both given by their coefficient
/// polynomials in ascending powers of the main variable.
pub fn sylvester_matrix(p: &[ExactPoly], q: &[ExactPoly]) -> Vec<Vec<ExactPoly>> {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![ExactPoly::zero(); size];
        for (k, c) in p.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![ExactPoly::zero(); size];
        for (k, c) in q.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Resultant with respect to the main variable.
pub fn resultant(p: &[ExactPoly], q: &[ExactPoly]) -> ExactPoly {
    bareiss_determinant(sylvester_matrix(p, q))
}

/// Discriminant with respect to the main variable of a polynomial whose
/// coefficients (ascending in the main variable) lie in `Q(i)[x]`:
/// `(-1)^{n(n-1)/2} Res(P, P') / a_n`.
pub fn discriminant(p: &[ExactPoly]) -> ExactPoly {
    let n = p.len() - 1;
    let dp: Vec<ExactPoly> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.scale(&GaussianRational::from_integer(k as i64)))
        .collect();
    let res = resultant(p, &dp);
    let quotient = res.div_exact(&p[n]).expect("leading coefficient divides Res(P, P')");
    if (n * (n - 1) / 2) % 2 == 1 {
        quotient.scale(&GaussianRational::from_integer(-1))
    } else {
        quotient
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> ExactPoly {
        ExactPoly::constant(GaussianRational::from_integer(n))
    }

    #[test]
    fn cubic_depressed_discriminant() {
        // xi^3 + 3 xi + 2i x: disc = -4*27 - 27*(2i x)^2 = 108 x^2 - 108
        let two_i_x = ExactPoly::from_complex(&[Complex::new(0.0, 0.0), Complex::new(0.0, 2.0)])
            .unwrap();
        let p = vec![two_i_x, int(3), int(0), int(1)];
        let d = discriminant(&p).to_complex();
        assert_eq!(d, vec![Complex::new(-108.0, 0.0), Complex::new(0.0, 0.0), Complex::new(108.0, 0.0)]);
    }

    #[test]
    fn quadratic_discriminant() {
        // a xi^2 + b xi + c with constants: b^2 - 4ac
        let p = vec![int(5), int(3), int(2)];
        assert_eq!(discriminant(&p).to_complex(), vec![Complex::new(9.0 - 40.0, 0.0)]);
    }

    #[test]
    fn exact_division_detects_remainder() {
        let x_plus_1 = ExactPoly::new(vec![GaussianRational::one(), GaussianRational::one()]);
        let sq = &x_plus_1 * &x_plus_1;
        assert_eq!(sq.div_exact(&x_plus_1), Some(x_plus_1.clone()));
        assert_eq!((&sq + &int(1)).div_exact(&x_plus_1), None);
    }
}
