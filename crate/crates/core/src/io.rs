//! Problem files, the versioned geometry document and JSON output with
//! 17-significant-digit numbers.

use crate::error::{Result, WkbError};
use crate::geometry::{Crossing, CurveFailure, Degeneracy, StokesGeometry};
use crate::noumi_yamada::{leading_order_f, polish_state, NYParams, NYState};
use crate::surface::TurningPoint;
use crate::symbol::{CharSymbol, Region};
use crate::tracer::{ActivitySpan, GeometryConfig, Incidence, StokesCurve, Termination};
use crate::Complex;
use serde::{Deserialize, Serialize};
use std::io;

/// Version of the geometry document layout.
pub const SCHEMA_VERSION: u32 = 1;

/// `[x0, y0, x1, y1]` as written in problem files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct RegionSpec(pub Region);

impl From<[f64; 4]> for RegionSpec {
    fn from(v: [f64; 4]) -> Self {
        Self(Region::new(v[0], v[1], v[2], v[3]))
    }
}

impl From<RegionSpec> for [f64; 4] {
    fn from(r: RegionSpec) -> Self {
        [r.0.x0, r.0.y0, r.0.x1, r.0.y1]
    }
}

/// Parses `x0,y0,x1,y1`.
pub fn parse_region(s: &str) -> Result<Region> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(WkbError::Input(format!("region needs four comma-separated numbers, got {s:?}")));
    }
    let mut v = [0.0; 4];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| WkbError::Input(format!("region: {p:?} is not a finite number")))?;
    }
    let r = Region::new(v[0], v[1], v[2], v[3]);
    if r.width() <= 0.0 || r.height() <= 0.0 {
        return Err(WkbError::Input(format!("region {s:?} is empty")));
    }
    Ok(r)
}

/// Evaluates an angle expression in radians: numbers, `pi` (or `π`),
/// `+ - * /`, parentheses, and implicit products such as `5pi/12`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let mut p = AngleParser { s: text.as_bytes(), i: 0, text };
    let v = p.expr()?;
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(p.error("unexpected input"));
    }
    if !v.is_finite() {
        return Err(WkbError::Input(format!("angle {text:?} is not finite")));
    }
    Ok(v)
}

struct AngleParser<'a> {
    s: &'a [u8],
    i: usize,
    text: &'a str,
}

impl AngleParser<'_> {
    fn error(&self, what: &str) -> WkbError {
        WkbError::Input(format!("angle {:?}: {what} at column {}", self.text, self.i + 1))
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            let r = self.term()?;
            v = if c == b'+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.i += 1;
                    v *= self.unary()?;
                }
                Some(b'/') => {
                    self.i += 1;
                    let d = self.unary()?;
                    if d == 0.0 {
                        return Err(self.error("division by zero"));
                    }
                    v /= d;
                }
                // implicit product: `5pi`, `2(pi/3)`
                Some(c) if c == b'(' || c.is_ascii_alphabetic() || c >= 0x80 => v *= self.unary()?,
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        match self.peek() {
            Some(b'-') => {
                self.i += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.i += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64> {
        let rest = &self.text[self.i..];
        if rest.starts_with('(') {
            self.i += 1;
            let v = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.error("expected ')'"));
            }
            self.i += 1;
            return Ok(v);
        }
        for name in ["pi", "PI", "Pi", "π"] {
            if rest.starts_with(name) {
                self.i += name.len();
                return Ok(std::f64::consts::PI);
            }
        }
        let len = rest
            .char_indices()
            .take_while(|(k, c)| {
                c.is_ascii_digit()
                    || *c == '.'
                    || ((*c == 'e' || *c == 'E') && *k > 0)
                    || ((*c == '-' || *c == '+') && *k > 0 && matches!(rest.as_bytes()[k - 1], b'e' | b'E'))
            })
            .count();
        if len == 0 {
            return Err(self.error("expected a number or pi"));
        }
        let v: f64 = rest[..len].parse().map_err(|_| self.error("malformed number"))?;
        self.i += len;
        Ok(v)
    }
}

/// Symbol problem file: `{"degree": n, "xi_coeffs": [...]}` with optional
/// `"singularities"` and `"region"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolProblem {
    #[serde(flatten)]
    pub symbol: CharSymbol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
}

impl SymbolProblem {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| WkbError::Input(format!("symbol problem: {e}")))
    }
}

/// Which leading-order solution to follow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BranchSpec {
    /// Index into the solutions returned by `leading_order_f`.
    Id(usize),
    /// Explicit `(f0, f1, f2)`, polished before use.
    Explicit([Complex; 3]),
}

impl Default for BranchSpec {
    fn default() -> Self {
        BranchSpec::Id(0)
    }
}

/// Noumi–Yamada problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NYProblem {
    pub alpha: [Complex; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_path: Option<Vec<Complex>>,
    #[serde(default)]
    pub branch: BranchSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
}

impl NYProblem {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| WkbError::Input(format!("NY problem: {e}")))?;
        match (&p.t, &p.t_path) {
            (None, None) => return Err(WkbError::Input("NY problem: one of \"t\" or \"t_path\" is required".into())),
            (_, Some(path)) if path.is_empty() => {
                return Err(WkbError::Input("NY problem: \"t_path\" is empty".into()))
            }
            _ => {}
        }
        p.params()?;
        Ok(p)
    }

    pub fn params(&self) -> Result<NYParams> {
        NYParams::new(self.alpha)
    }

    /// `t` if given, else the start of `t_path`.
    pub fn start_t(&self) -> Result<Complex> {
        self.t
            .or_else(|| self.t_path.as_ref().and_then(|p| p.first().copied()))
            .ok_or_else(|| WkbError::Input("NY problem: no t value".into()))
    }

    /// The branch state at `start_t`.
    pub fn initial_state(&self) -> Result<NYState> {
        let params = self.params()?;
        let t = self.start_t()?;
        match self.branch {
            BranchSpec::Id(id) => {
                let sols = leading_order_f(&params, t)?;
                let n = sols.len();
                sols.into_iter().nth(id).ok_or_else(|| {
                    WkbError::Input(format!("NY problem: branch {id} does not exist ({n} solutions at t = {t})"))
                })
            }
            BranchSpec::Explicit(f) => polish_state(&params, t, f, 0),
        }
    }
}

/// Outcome recorded in every output document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// Some curves failed; the rest is valid.
    Partial,
    Failed,
}

/// A curve as stored in the document; `source` indexes `turning_points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub source: usize,
    pub direction: usize,
    pub pair: (usize, usize),
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

/// Serialized geometry (schema 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryDocument {
    pub schema: u32,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub symbol: CharSymbol,
    pub theta: f64,
    pub config: GeometryConfig,
    pub turning_points: Vec<TurningPoint>,
    pub curves: Vec<CurveRecord>,
    pub crossings: Vec<Crossing>,
    pub degeneracies: Vec<Degeneracy>,
    pub failures: Vec<CurveFailure>,
}

impl GeometryDocument {
    pub fn from_geometry(g: &StokesGeometry) -> Self {
        let curves = g
            .curves
            .iter()
            .map(|c| CurveRecord {
                source: c.source_index,
                direction: c.direction,
                pair: c.pair,
                branch_sign: c.branch_sign,
                source_point: c.source_point,
                seed_offset: c.seed_offset,
                points: c.points.clone(),
                y_values: c.y_values.clone(),
                termination: c.termination.clone(),
                start_termination: c.start_termination.clone(),
                activity: c.activity.clone(),
                incidences: c.incidences.clone(),
            })
            .collect();
        Self {
            schema: SCHEMA_VERSION,
            status: if g.failures.is_empty() { Status::Ok } else { Status::Partial },
            message: None,
            symbol: g.symbol.clone(),
            theta: g.theta,
            config: g.config,
            turning_points: g.turning_points.clone(),
            curves,
            crossings: g.crossings.clone(),
            degeneracies: g.degeneracies.clone(),
            failures: g.failures.clone(),
        }
    }

    pub fn to_geometry(&self) -> Result<StokesGeometry> {
        if self.schema != SCHEMA_VERSION {
            return Err(WkbError::Input(format!("unsupported schema {}", self.schema)));
        }
        let curves = self
            .curves
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let source = self.turning_points.get(c.source).cloned().ok_or_else(|| {
                    WkbError::Input(format!("curves[{i}].source = {} is not a turning point index", c.source))
                })?;
                Ok(StokesCurve {
                    source,
                    source_index: c.source,
                    direction: c.direction,
                    pair: c.pair,
                    branch_sign: c.branch_sign,
                    source_point: c.source_point,
                    seed_offset: c.seed_offset,
                    points: c.points.clone(),
                    y_values: c.y_values.clone(),
                    termination: c.termination.clone(),
                    start_termination: c.start_termination.clone(),
                    activity: c.activity.clone(),
                    incidences: c.incidences.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StokesGeometry {
            symbol: self.symbol.clone(),
            theta: self.theta,
            config: self.config,
            turning_points: self.turning_points.clone(),
            curves,
            crossings: self.crossings.clone(),
            degeneracies: self.degeneracies.clone(),
            failures: self.failures.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| WkbError::Input(format!("geometry document: {e}")))
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }
}

/// Serializes `g` as a schema-1 document.
pub fn serialize_geometry(g: &StokesGeometry) -> String {
    GeometryDocument::from_geometry(g).to_json()
}

/// Inverse of [`serialize_geometry`].
pub fn parse_geometry(text: &str) -> Result<StokesGeometry> {
    GeometryDocument::from_json(text)?.to_geometry()
}

/// Compact JSON whose floats carry 17 significant digits.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Writes `value` as JSON with 17-significant-digit floats.
pub fn write_json<W: io::Write, T: Serialize + ?Sized>(writer: W, value: &T) -> serde_json::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, SeventeenDigits);
    value.serialize(&mut ser)
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    write_json(&mut buf, value).expect("serialization into memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        let s = to_json_string(&[0.1f64, -2.5e-300, 0.0]);
        assert_eq!(s, "[1.0000000000000001e-1,-2.5000000000000000e-300,0.0000000000000000e0]");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, -2.5e-300, 0.0]);
    }

    #[test]
    fn non_finite_floats_become_null() {
        assert_eq!(to_json_string(&[f64::NAN]), "[null]");
    }

    #[test]
    fn angle_expressions() {
        use std::f64::consts::PI;
        let cases = [
            ("0", 0.0),
            ("pi/2", PI / 2.0),
            ("5pi/12", 5.0 * PI / 12.0),
            ("5*pi/12", 5.0 * PI / 12.0),
            ("-pi", -PI),
            ("(1/2 - 1/12) pi", (0.5 - 1.0 / 12.0) * PI),
            ("0.25π", 0.25 * PI),
            ("1.5e-1", 0.15),
            (" 2 pi / 3 ", 2.0 * PI / 3.0),
        ];
        for (text, want) in cases {
            let got = parse_angle(text).unwrap();
            assert!((got - want).abs() < 1e-15, "{text}: {got} vs {want}");
        }
        for bad in ["", "pi/", "5pj", "1/0", "(pi", "pi)"] {
            assert!(parse_angle(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn region_parsing() {
        assert_eq!(parse_region("-2, -1.5, 2, 1.5").unwrap(), Region::new(-2.0, -1.5, 2.0, 1.5));
        assert!(parse_region("1,2,3").is_err());
        assert!(parse_region("0,0,0,1").is_err());
        assert!(parse_region("a,0,1,1").is_err());
    }

    #[test]
    fn symbol_problem_with_region() {
        let p = SymbolProblem::from_json(
            r#"{"degree": 2, "xi_coeffs": [[[0,0],[-1,0]], [[0,0]], [[1,0]]], "region": [-1,-1,1,1]}"#,
        )
        .unwrap();
        assert_eq!(p.symbol.degree(), 2);
        assert_eq!(p.region.unwrap().0, Region::square(1.0));
    }

    #[test]
    fn symbol_problem_errors_name_the_problem() {
        let e = SymbolProblem::from_json(r#"{"degree": 3, "xi_coeffs": [[[1,0]]]}"#).unwrap_err();
        assert!(e.to_string().contains("degree 3"), "{e}");
        let e = SymbolProblem::from_json("{\"degree\": 2,\n \"xi_coeffs\": [[[0,0]], [[0,0]], [[1,0]],]}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn ny_problem_branch_forms() {
        let p = NYProblem::from_json(r#"{"alpha": [[-0.5,0],[1,0],[-0.5,0]], "t": [1,0], "branch": 1}"#).unwrap();
        assert_eq!(p.branch, BranchSpec::Id(1));
        assert!(p.initial_state().unwrap().is_valid(&p.params().unwrap()));
        let q = NYProblem::from_json(
            r#"{"alpha": [[0,0],[0,0],[0,0]], "t_path": [[1,0],[2,0]], "branch": [[1,0],[0,0],[0,0]]}"#,
        )
        .unwrap();
        let st = q.initial_state().unwrap();
        assert!((st.f[0] - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!(NYProblem::from_json(r#"{"alpha": [[1,0],[0,0],[0,0]], "t": [1,0]}"#).is_err());
        assert!(NYProblem::from_json(r#"{"alpha": [[0,0],[0,0],[0,0]]}"#).is_err());
    }
}
