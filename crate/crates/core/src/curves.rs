//! Closed curves given by trigonometric polynomials, and their energies:
//! total curvature in ℝ³, elastic energy on S², and hyperbolic bending
//! energy in the upper half-plane.
//!
//! Text format, one curve per line:
//!
//! ```text
//! r3 x=0;1,0 y=0;0,1 z=0
//! s2 x=0;1,0 y=0;0,1 z=0.3;0,0;0,0.05
//! h2 x=0;1,0 y=1.41421356237;0,1
//! ```
//!
//! Each coordinate is `a0;c1,s1;c2,s2;…` meaning
//! `a0 + Σ_k (c_k cos kt + s_k sin kt)` for `t ∈ [0, 2π)`. Spherical curves are
//! the radial projection of the polynomial curve onto the unit sphere.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

pub const CURVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveAmbient {
    R3,
    S2,
    H2,
}

impl CurveAmbient {
    fn tag(self) -> &'static str {
        match self {
            CurveAmbient::R3 => "r3",
            CurveAmbient::S2 => "s2",
            CurveAmbient::H2 => "h2",
        }
    }

    fn dim(self) -> usize {
        match self {
            CurveAmbient::H2 => 2,
            _ => 3,
        }
    }
}

/// `a0 + Σ_k (c_k cos kt + s_k sin kt)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Harmonic {
    pub a0: f64,
    pub terms: Vec<(f64, f64)>,
}

impl Harmonic {
    pub fn constant(a0: f64) -> Self {
        Harmonic { a0, terms: Vec::new() }
    }

    pub fn new(a0: f64, terms: Vec<(f64, f64)>) -> Self {
        Harmonic { a0, terms }
    }

    /// Value and first three derivatives at `t`.
    pub fn eval(&self, t: f64) -> [f64; 4] {
        let mut out = [self.a0, 0.0, 0.0, 0.0];
        for (i, &(c, s)) in self.terms.iter().enumerate() {
            let k = (i + 1) as f64;
            let (sn, cs) = (k * t).sin_cos();
            let f = c * cs + s * sn;
            let df = k * (s * cs - c * sn);
            out[0] += f;
            out[1] += df;
            out[2] -= k * k * f;
            out[3] -= k * k * df;
        }
        out
    }
}

/// Position and two derivatives of a curve at one parameter value. Planar
/// curves keep `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveJet {
    pub pos: Vector3<f64>,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
}

/// A closed curve with period `2π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    pub ambient: CurveAmbient,
    pub coords: Vec<Harmonic>,
}

impl ClosedCurve {
    pub fn new(ambient: CurveAmbient, coords: Vec<Harmonic>) -> Result<Self> {
        if coords.len() != ambient.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} curves need {} coordinates, got {}",
                ambient.tag(),
                ambient.dim(),
                coords.len()
            )));
        }
        let curve = ClosedCurve { ambient, coords };
        curve.validate()?;
        Ok(curve)
    }

    /// Checks regularity, the half-plane condition and `|p| > 0` for
    /// spherical curves on a fine sample.
    pub fn validate(&self) -> Result<()> {
        const SAMPLES: usize = 1024;
        let scale = self.raw_jet(0.0).pos.norm().max(1.0);
        for k in 0..SAMPLES {
            let t = 2.0 * PI * k as f64 / SAMPLES as f64;
            let raw = self.raw_jet(t);
            if self.ambient == CurveAmbient::H2 && !(raw.pos.y > 0.0) {
                return Err(Error::LeavesHalfPlane { at: t });
            }
            if self.ambient == CurveAmbient::S2 && raw.pos.norm() < 1e-9 * scale {
                return Err(Error::IrregularCurve { at: t });
            }
            let j = self.jet(t);
            if !(j.d1.norm() > 1e-9 * scale) || !j.d1.norm().is_finite() {
                return Err(Error::IrregularCurve { at: t });
            }
        }
        Ok(())
    }

    fn raw(&self, t: f64) -> [Vector3<f64>; 4] {
        let mut out = [Vector3::zeros(); 4];
        for (c, h) in self.coords.iter().enumerate() {
            let e = h.eval(t);
            for d in 0..4 {
                out[d][c] = e[d];
            }
        }
        out
    }

    fn raw_jet(&self, t: f64) -> CurveJet {
        let [p, d1, d2, _] = self.raw(t);
        CurveJet { pos: p, d1, d2 }
    }

    /// Jet of the curve itself (after radial projection for S² curves).
    pub fn jet(&self, t: f64) -> CurveJet {
        let raw = self.raw_jet(t);
        if self.ambient != CurveAmbient::S2 {
            return raw;
        }
        let (p, p1, p2) = (raw.pos, raw.d1, raw.d2);
        let r = p.norm();
        let r1 = p.dot(&p1) / r;
        let r2 = (p1.norm_squared() + p.dot(&p2) - r1 * r1) / r;
        let g = p / r;
        let g1 = (p1 - g * r1) / r;
        let g2 = (p2 - g1 * (2.0 * r1) - g * r2) / r;
        CurveJet { pos: g, d1: g1, d2: g2 }
    }

    /// Third derivative of the raw polynomial curve (ℝ³ curves only).
    pub fn third_derivative(&self, t: f64) -> Vector3<f64> {
        self.raw(t)[3]
    }

    fn speed_at(&self, t: f64) -> Result<CurveJet> {
        let j = self.jet(t);
        if !(j.d1.norm() > 0.0) {
            return Err(Error::IrregularCurve { at: t });
        }
        Ok(j)
    }

    pub fn length(&self) -> Result<f64> {
        adaptive_simpson(|t| Ok(self.speed_at(t)?.d1.norm()), 0.0, 2.0 * PI, CURVE_TOL)
    }
}

impl fmt::Display for Harmonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.a0)?;
        for (c, s) in &self.terms {
            write!(f, ";{c},{s}")?;
        }
        Ok(())
    }
}

impl FromStr for Harmonic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |x: &str| -> Result<f64> {
            let v: f64 = x
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {x:?}")))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite coefficient {x:?}")));
            }
            Ok(v)
        };
        let mut parts = s.split(';');
        let a0 = num(parts.next().unwrap_or_default())?;
        let mut terms = Vec::new();
        for p in parts {
            let (c, sn) = p
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("harmonic term {p:?} is not c,s")))?;
            terms.push((num(c)?, num(sn)?));
        }
        if terms.len() > 64 {
            return Err(Error::Parse("more than 64 harmonics".into()));
        }
        Ok(Harmonic { a0, terms })
    }
}

impl fmt::Display for ClosedCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ambient.tag())?;
        for (name, h) in ["x", "y", "z"].iter().zip(&self.coords) {
            write!(f, " {name}={h}")?;
        }
        Ok(())
    }
}

/// Parses the text form without checking regularity.
pub fn parse_curve_unchecked(s: &str) -> Result<ClosedCurve> {
    let mut tokens = s.split_whitespace();
    let ambient = match tokens.next() {
        Some("r3") => CurveAmbient::R3,
        Some("s2") => CurveAmbient::S2,
        Some("h2") => CurveAmbient::H2,
        other => return Err(Error::Parse(format!("unknown curve ambient {other:?}"))),
    };
    let mut coords: [Option<Harmonic>; 3] = [None, None, None];
    for tok in tokens {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {tok:?}")))?;
        let slot = match key {
            "x" => 0,
            "y" => 1,
            "z" if ambient != CurveAmbient::H2 => 2,
            _ => return Err(Error::Parse(format!("unknown coordinate {key:?}"))),
        };
        if coords[slot].is_some() {
            return Err(Error::Parse(format!("coordinate {key} given twice")));
        }
        coords[slot] = Some(val.parse()?);
    }
    let n = ambient.dim();
    let coords: Vec<Harmonic> = coords
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| Error::Parse(format!("missing coordinate {}", ["x", "y", "z"][i]))))
        .collect::<Result<_>>()?;
    Ok(ClosedCurve { ambient, coords })
}

impl FromStr for ClosedCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let c = parse_curve_unchecked(s)?;
        c.validate()?;
        Ok(c)
    }
}

/// `∫|k| ds` for a curve in ℝ³.
pub fn total_curvature(curve: &ClosedCurve) -> Result<f64> {
    if curve.ambient != CurveAmbient::R3 {
        return Err(Error::UnsupportedAmbient("total curvature needs an ℝ³ curve"));
    }
    adaptive_simpson(
        |t| {
            let j = curve.speed_at(t)?;
            Ok(j.d1.cross(&j.d2).norm() / j.d1.norm_squared())
        },
        0.0,
        2.0 * PI,
        CURVE_TOL,
    )
}

/// Geodesic curvature of a spherical curve with respect to the normal `γ × T`.
pub fn geodesic_curvature_s2(j: &CurveJet) -> f64 {
    j.d2.dot(&j.pos.cross(&j.d1)) / j.d1.norm().powi(3)
}

/// `π ∫(1 + k²) ds` with `k` the geodesic curvature in S².
pub fn elastic_energy_s2(curve: &ClosedCurve) -> Result<f64> {
    if curve.ambient != CurveAmbient::S2 {
        return Err(Error::UnsupportedAmbient("elastic energy needs an S² curve"));
    }
    let integral = adaptive_simpson(
        |t| {
            let j = curve.speed_at(t)?;
            let k = geodesic_curvature_s2(&j);
            Ok((1.0 + k * k) * j.d1.norm())
        },
        0.0,
        2.0 * PI,
        CURVE_TOL,
    )?;
    Ok(PI * integral)
}

/// Curvature of a planar curve in the metric `(dx² + dy²)/y²`:
/// `k₋₁ = y·k + x'/|γ'|`, with `k` the euclidean curvature for the left normal.
pub fn hyperbolic_curvature(j: &CurveJet) -> f64 {
    let speed = j.d1.norm();
    let k = (j.d1.x * j.d2.y - j.d1.y * j.d2.x) / speed.powi(3);
    j.pos.y * k + j.d1.x / speed
}

/// `∫ k₋₁² ds` with hyperbolic arc length `ds = |γ'| dt / y`.
pub fn hyperbolic_bending(curve: &ClosedCurve) -> Result<f64> {
    if curve.ambient != CurveAmbient::H2 {
        return Err(Error::UnsupportedAmbient("hyperbolic bending needs an h2 curve"));
    }
    adaptive_simpson(
        |t| {
            let j = curve.speed_at(t)?;
            if !(j.pos.y > 0.0) {
                return Err(Error::LeavesHalfPlane { at: t });
            }
            let k = hyperbolic_curvature(&j);
            Ok(k * k * j.d1.norm() / j.pos.y)
        },
        0.0,
        2.0 * PI,
        CURVE_TOL,
    )
}

/// Circle `(x, y) = (r cos t, h + r sin t)` in the upper half-plane.
pub fn half_plane_circle(h: f64, r: f64) -> Result<ClosedCurve> {
    ClosedCurve::new(
        CurveAmbient::H2,
        vec![
            Harmonic::new(0.0, vec![(r, 0.0)]),
            Harmonic::new(h, vec![(0.0, r)]),
        ],
    )
}

/// The latitude `{z = height}` of S², optionally with a vertical ripple
/// `amp·sin(k t)` before projection.
pub fn latitude(height: f64, amp: f64, k: usize) -> Result<ClosedCurve> {
    let rho = (1.0 - height * height).max(0.0).sqrt();
    let mut z = Harmonic::constant(height);
    if amp != 0.0 && k > 0 {
        z.terms = vec![(0.0, 0.0); k];
        z.terms[k - 1] = (0.0, amp);
    }
    ClosedCurve::new(
        CurveAmbient::S2,
        vec![
            Harmonic::new(0.0, vec![(rho, 0.0)]),
            Harmonic::new(0.0, vec![(0.0, rho)]),
            z,
        ],
    )
}

/// The trefoil `((2 + cos 3t) cos 2t, (2 + cos 3t) sin 2t, sin 3t)`.
pub fn trefoil() -> ClosedCurve {
    // (2 + cos 3t) cos 2t = 2 cos 2t + (cos t + cos 5t)/2, and the sine analogue
    let x = Harmonic::new(0.0, vec![(0.5, 0.0), (2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.5, 0.0)]);
    let y = Harmonic::new(0.0, vec![(0.0, -0.5), (0.0, 2.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.5)]);
    let z = Harmonic::new(0.0, vec![(0.0, 0.0), (0.0, 0.0), (0.0, 1.0)]);
    ClosedCurve::new(CurveAmbient::R3, vec![x, y, z]).expect("trefoil is regular")
}

/// A random trigonometric space curve with up to four harmonics per
/// coordinate, redrawn until regular.
pub fn random_space_curve<R: rand::Rng + ?Sized>(rng: &mut R) -> ClosedCurve {
    loop {
        let coords = (0..3)
            .map(|_| {
                let k = rng.gen_range(1..=4);
                let terms = (0..k)
                    .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                Harmonic::new(rng.gen_range(-1.0..1.0), terms)
            })
            .collect();
        if let Ok(c) = ClosedCurve::new(CurveAmbient::R3, coords) {
            return c;
        }
    }
}

/// A random ellipse in the upper half-plane, tilted by a random angle.
pub fn random_convex_profile<R: rand::Rng + ?Sized>(rng: &mut R) -> ClosedCurve {
    loop {
        let a = rng.gen_range(0.2..1.5);
        let b = rng.gen_range(0.2..1.5);
        let tilt = rng.gen_range(0.0..PI);
        let (st, ct) = tilt.sin_cos();
        let reach = ((a * st).powi(2) + (b * ct).powi(2)).sqrt();
        let h = reach + rng.gen_range(0.05..3.0);
        let x0 = rng.gen_range(-2.0..2.0);
        let coords = vec![
            Harmonic::new(x0, vec![(a * ct, -b * st)]),
            Harmonic::new(h, vec![(a * st, b * ct)]),
        ];
        if let Ok(c) = ClosedCurve::new(CurveAmbient::H2, coords) {
            return c;
        }
    }
}

/// A latitude of S² with a random ripple.
pub fn random_perturbed_latitude<R: rand::Rng + ?Sized>(rng: &mut R) -> ClosedCurve {
    loop {
        let height = rng.gen_range(-0.6..0.6);
        let amp = rng.gen_range(0.02..0.15);
        let k = rng.gen_range(1..=4);
        if let Ok(c) = latitude(height, amp, k) {
            return c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trefoil_harmonics_match_the_product_form() {
        let c = trefoil();
        for k in 0..20 {
            let t = 0.31 * k as f64;
            let p = c.jet(t).pos;
            let expected = Vector3::new(
                (2.0 + (3.0 * t).cos()) * (2.0 * t).cos(),
                (2.0 + (3.0 * t).cos()) * (2.0 * t).sin(),
                (3.0 * t).sin(),
            );
            assert!((p - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn circle_and_ellipse_total_curvature() {
        let circle: ClosedCurve = "r3 x=0;1,0 y=0;0,1 z=0".parse().unwrap();
        assert_relative_eq!(total_curvature(&circle).unwrap(), 2.0 * PI, epsilon = 1e-9);
        let ellipse: ClosedCurve = "r3 x=0;2,0 y=0;0,1 z=0".parse().unwrap();
        assert_relative_eq!(total_curvature(&ellipse).unwrap(), 2.0 * PI, epsilon = 1e-8);
    }

    #[test]
    fn trefoil_exceeds_twice_fenchel() {
        assert!(total_curvature(&trefoil()).unwrap() > 4.0 * PI);
    }

    #[test]
    fn latitude_energy_closed_form() {
        for z in [0.0, 0.3, -0.6] {
            let e = elastic_energy_s2(&latitude(z, 0.0, 0).unwrap()).unwrap();
            assert_relative_eq!(e, 2.0 * PI * PI / (1.0 - z * z).sqrt(), max_relative = 1e-10);
        }
    }

    #[test]
    fn half_plane_circles_have_constant_curvature() {
        let c = half_plane_circle(2.0, 1.0).unwrap();
        for k in 0..10 {
            let j = c.jet(0.6 * k as f64);
            assert_relative_eq!(hyperbolic_curvature(&j), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn bending_of_circles() {
        let b = hyperbolic_bending(&half_plane_circle(2f64.sqrt(), 1.0).unwrap()).unwrap();
        assert_relative_eq!(b, 4.0 * PI, epsilon = 1e-8);
        let b = hyperbolic_bending(&half_plane_circle(2.0, 1.0).unwrap()).unwrap();
        assert_relative_eq!(b, 8.0 * PI / 3f64.sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn text_round_trip() {
        let src = "s2 x=0;1,0 y=0;0,1 z=0.3;0,0;0,0.05";
        let c: ClosedCurve = src.parse().unwrap();
        assert_eq!(c.to_string(), src);
        assert_eq!(c.to_string().parse::<ClosedCurve>().unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!("q3 x=0".parse::<ClosedCurve>().is_err());
        assert!("r3 x=0;1,0 y=0;0,1".parse::<ClosedCurve>().is_err());
        assert!("r3 x=0;1,0 x=0 y=0 z=0".parse::<ClosedCurve>().is_err());
        assert!("h2 x=0;1,0 y=0.5;0,1".parse::<ClosedCurve>().is_err());
        assert!(matches!(
            "r3 x=1 y=2 z=3".parse::<ClosedCurve>(),
            Err(Error::IrregularCurve { .. })
        ));
        assert!("r3 x=0;1 y=0 z=0".parse::<ClosedCurve>().is_err());
        assert!("r3 x=nan y=0 z=0".parse::<ClosedCurve>().is_err());
    }
}
