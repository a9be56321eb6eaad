//! The canonical family `(v, t) ↦ offset at distance t of F_v(S)`: area
//! landscape, the great-sphere sweepout, and limit spheres near `∂B⁴`.

use std::f64::consts::PI;

use nalgebra::Vector4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal_lab::closest_point;
use crate::error::{Error, Result};
use crate::optimize::nelder_mead_max;
use crate::quadrature::{golden_max, QuadratureGrid};
use crate::s3::{fit_round_sphere, ConformalParam, PointS3, RoundSphere, MAX_CONFORMAL_NORM};
use crate::shapes::s3_sphere;
use crate::surface::{offset_areas_from, Ambient, ParametricSurface};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyPoint {
    pub v: ConformalParam,
    pub t: f64,
}

impl FamilyPoint {
    pub fn new(v: Vector4<f64>, t: f64) -> Result<Self> {
        if !(-PI..=PI).contains(&t) {
            return Err(Error::InvalidArgument(format!("t = {t} outside [-π, π]")));
        }
        if v.norm() > MAX_CONFORMAL_NORM {
            return Err(Error::ParameterOutsideBall { norm: v.norm() });
        }
        Ok(FamilyPoint {
            v: ConformalParam::new(v)?,
            t,
        })
    }

    pub fn origin() -> Self {
        FamilyPoint {
            v: ConformalParam::zero(),
            t: 0.0,
        }
    }
}

fn image(s: &ParametricSurface, v: &ConformalParam) -> Result<ParametricSurface> {
    if s.ambient != Ambient::S3 {
        return Err(Error::UnsupportedAmbient("the canonical family lives in S³"));
    }
    if v.norm() == 0.0 {
        Ok(s.clone())
    } else {
        s.conformal_image(v)
    }
}

/// Area of the family member at `p`.
pub fn family_area(s: &ParametricSurface, p: &FamilyPoint, q: &QuadratureGrid) -> Result<f64> {
    image(s, &p.v)?.offset_area(p.t, q)
}

/// Offset areas of `F_v(S)` for several `t` from one curvature pass.
pub fn family_areas(s: &ParametricSurface, v: &ConformalParam, ts: &[f64], q: &QuadratureGrid) -> Result<Vec<f64>> {
    image(s, v)?.offset_areas(ts, q)
}

/// Sample lattice for the landscape: `per_axis` points on `[-radius, radius]`
/// in each `v` coordinate (kept if inside the ball) times `t_steps` values
/// on `[-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub per_axis: usize,
    pub radius: f64,
    pub t_steps: usize,
}

impl Default for LandscapeGrid {
    fn default() -> Self {
        LandscapeGrid {
            per_axis: 9,
            radius: 0.9,
            t_steps: 33,
        }
    }
}

impl LandscapeGrid {
    pub fn validate(&self) -> Result<()> {
        if self.per_axis < 5 || self.t_steps < 5 {
            return Err(Error::InvalidArgument("landscape grid needs at least 5 points per axis".into()));
        }
        if !(self.radius > 0.0 && self.radius <= MAX_CONFORMAL_NORM) {
            return Err(Error::InvalidArgument(format!("landscape radius {} outside (0, 1)", self.radius)));
        }
        Ok(())
    }

    pub fn v_points(&self) -> Vec<Vector4<f64>> {
        let n = self.per_axis;
        let axis: Vec<f64> = (0..n)
            .map(|i| -self.radius + 2.0 * self.radius * i as f64 / (n - 1) as f64)
            .collect();
        let mut out = Vec::new();
        for &a in &axis {
            for &b in &axis {
                for &c in &axis {
                    for &d in &axis {
                        let v = Vector4::new(a, b, c, d);
                        if v.norm() <= self.radius * (1.0 + 1e-12) {
                            out.push(v);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn t_points(&self) -> Vec<f64> {
        let n = self.t_steps;
        (0..n).map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    /// `(point, area)` in grid order.
    pub rows: Vec<(FamilyPoint, f64)>,
    pub sup: f64,
    pub argmax: FamilyPoint,
    pub willmore: f64,
    pub certified: bool,
}

fn lexicographic_key(p: &FamilyPoint) -> [f64; 5] {
    let v = p.v.vector();
    [v[0], v[1], v[2], v[3], p.t]
}

fn better(a: &(FamilyPoint, f64), b: &(FamilyPoint, f64)) -> bool {
    if a.1 != b.1 {
        return a.1 > b.1;
    }
    let (ka, kb) = (lexicographic_key(&a.0), lexicographic_key(&b.0));
    ka.iter()
        .zip(&kb)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .map(|o| o.is_lt())
        .unwrap_or(false)
}

/// Grid evaluation followed by a local Nelder–Mead refinement in `(v, t)`
/// from the best grid point. The reported `sup` is attained at a sampled
/// point and so bounds the true supremum from below.
pub fn sup_area_landscape(
    s: &ParametricSurface,
    grid: &LandscapeGrid,
    q: &QuadratureGrid,
    refine_budget: usize,
) -> Result<Landscape> {
    grid.validate()?;
    let willmore = s.willmore_energy(q)?;
    let vs = grid.v_points();
    let ts = grid.t_points();
    let per_v: Vec<Vec<f64>> = vs
        .par_iter()
        .map(|v| family_areas(s, &ConformalParam::new(*v)?, &ts, q))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(vs.len() * ts.len());
    for (v, areas) in vs.iter().zip(per_v) {
        for (&t, a) in ts.iter().zip(areas) {
            rows.push((FamilyPoint::new(*v, t)?, a));
        }
    }
    let mut best = rows[0];
    for r in &rows[1..] {
        if better(r, &best) {
            best = *r;
        }
    }
    if refine_budget > 0 {
        let start = lexicographic_key(&best.0);
        let radius = grid.radius;
        let local = nelder_mead_max(
            |x| {
                let v = Vector4::new(x[0], x[1], x[2], x[3]);
                if v.norm() > radius || x[4].abs() > PI {
                    return Ok(None);
                }
                let p = FamilyPoint::new(v, x[4])?;
                Ok(Some(family_area(s, &p, q)?))
            },
            &start,
            0.5 * radius / (grid.per_axis - 1) as f64,
            refine_budget,
            1e-9,
        )?;
        if local.value > best.1 {
            let x = &local.x;
            best = (FamilyPoint::new(Vector4::new(x[0], x[1], x[2], x[3]), x[4])?, local.value);
        }
    }
    Ok(Landscape {
        rows,
        sup: best.1,
        argmax: best.0,
        willmore,
        certified: best.1 <= willmore + 1e-6,
    })
}

/// `max_t` of the offset areas of `F_v(S)`: grid of `t_steps` values, then
/// golden-section refinement around the best one.
pub fn max_over_t(s: &ParametricSurface, v: &ConformalParam, t_steps: usize, q: &QuadratureGrid) -> Result<(f64, f64)> {
    let img = image(s, v)?;
    let weighted = img.weighted_samples(q)?;
    let n = t_steps.max(5);
    let ts: Vec<f64> = (0..n).map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64).collect();
    let areas = offset_areas_from(&weighted, &ts);
    let mut k = 0;
    for i in 1..n {
        if areas[i] > areas[k] {
            k = i;
        }
    }
    let h = 2.0 * PI / (n - 1) as f64;
    let (a, b) = ((ts[k] - h).max(-PI), (ts[k] + h).min(PI));
    let (t, area) = golden_max(|t| Ok(offset_areas_from(&weighted, &[t])[0]), a, b, 1e-10)?;
    Ok(if area >= areas[k] { (t, area) } else { (ts[k], areas[k]) })
}

/// `area(S³ ∩ {x₄ = 2t − 1}) = 4π(1 − (2t − 1)²)`.
pub fn sweepout_phi1(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("sweepout parameter {t} outside [0, 1]")));
    }
    let h = 2.0 * t - 1.0;
    Ok(4.0 * PI * (1.0 - h * h))
}

/// The same slice area by quadrature on the slice sphere, centered at the
/// north pole with geodesic radius `arccos(2t − 1)`.
pub fn sweepout_phi1_quadrature(t: f64, q: &QuadratureGrid) -> Result<f64> {
    sweepout_phi1(t)?;
    let r = (2.0 * t - 1.0).clamp(-1.0, 1.0).acos();
    if r.sin() == 0.0 {
        return Ok(0.0);
    }
    let sphere = s3_sphere(Vector4::new(0.0, 0.0, 0.0, 1.0), r);
    sphere.area(q)
}

/// How `v` approaches `p ∈ ∂B⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Approach {
    Radial,
    /// Straight line into the ball meeting the radial direction at angle `θ`,
    /// tilted towards the unit normal of the surface at `p`.
    Angled(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSphere {
    pub sphere: RoundSphere,
    pub residual: f64,
    pub v: ConformalParam,
    /// Unit normal of the surface at `p`.
    pub normal: Vector4<f64>,
}

/// Parameter of the approach at scale `δ`.
pub fn approach_param(p: &Vector4<f64>, normal: &Vector4<f64>, approach: Approach, delta: f64) -> Result<ConformalParam> {
    let v = match approach {
        Approach::Radial => p * (1.0 - delta),
        Approach::Angled(theta) => p + (normal * theta.sin() - p * theta.cos()) * delta,
    };
    ConformalParam::new(v)
}

/// Round sphere fitted to `F_v(S)` near the blow-up of `p`.
///
/// Sample points are taken on a log-polar parameter grid around `p` at
/// scales `δ·10^k`, `k ∈ [−2, 2]`, which `F_v` spreads over the limit.
pub fn limit_sphere_probe(s: &ParametricSurface, p: &PointS3, approach: Approach, delta: f64) -> Result<LimitSphere> {
    if s.ambient != Ambient::S3 {
        return Err(Error::UnsupportedAmbient("limit spheres live in S³"));
    }
    if !(delta > 1e-5 && delta < 0.1) {
        return Err(Error::InvalidArgument(format!("δ = {delta} outside the probe range")));
    }
    let (u0, v0, d) = closest_point(s, p.coords());
    if d > 1e-10 {
        return Err(Error::PointOffSurface { distance: d });
    }
    let sample = s.curvature_at(u0, v0)?;
    let normal = sample.normal;
    let v = approach_param(p.coords(), &normal, approach, delta)?;
    let map = v.map();
    let scale = 1.0 / sample.e.max(sample.g).sqrt();
    let mut points = Vec::new();
    const RINGS: usize = 41;
    const RAYS: usize = 24;
    for i in 0..RINGS {
        let rho = delta * scale * 10f64.powf(-2.0 + 4.0 * i as f64 / (RINGS - 1) as f64);
        for j in 0..RAYS {
            let a = 2.0 * PI * j as f64 / RAYS as f64;
            let x = s.position(u0 + rho * a.cos(), v0 + rho * a.sin());
            points.push(PointS3::normalized(crate::jet::AmbientMap::value(&map, &x))?);
        }
    }
    let (sphere, residual) = fit_round_sphere(&points)?;
    Ok(LimitSphere {
        sphere,
        residual,
        v,
        normal,
    })
}

/// A point at geodesic distance `d` from `S` along the normal at `(u, v)`.
pub fn normal_offset_point(s: &ParametricSurface, u: f64, v: f64, d: f64) -> Result<PointS3> {
    let c = s.curvature_at(u, v)?;
    PointS3::normalized(c.pos * d.cos() + c.normal * d.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Domain;
    use crate::shapes::ShapeSpec;
    use approx::assert_relative_eq;

    #[test]
    fn clifford_offsets_follow_cos_2t() {
        let s = ShapeSpec::clifford().build().unwrap();
        let q = QuadratureGrid::square(Domain::Torus, 32).unwrap();
        let p = FamilyPoint::new(Vector4::zeros(), PI / 8.0).unwrap();
        let a = family_area(&s, &p, &q).unwrap();
        assert_relative_eq!(a, 2.0 * PI * PI * (PI / 4.0).cos(), max_relative = 1e-12);
        for t in [-PI, PI] {
            let p = FamilyPoint::new(Vector4::new(0.1, 0.2, 0.0, -0.3), t).unwrap();
            assert!(family_area(&s, &p, &q).unwrap() <= 1e-6);
        }
    }

    #[test]
    fn sweepout_examples() {
        assert_relative_eq!(sweepout_phi1(0.5).unwrap(), 4.0 * PI);
        assert_eq!(sweepout_phi1(0.0).unwrap(), 0.0);
        assert_relative_eq!(sweepout_phi1(0.25).unwrap(), 3.0 * PI, epsilon = 1e-14);
        let q = QuadratureGrid::square(Domain::SphereChart, 32).unwrap();
        for t in [0.1, 0.25, 0.5, 0.8] {
            let d = sweepout_phi1_quadrature(t, &q).unwrap() - sweepout_phi1(t).unwrap();
            assert!(d.abs() <= 1e-12, "t = {t}: {d}");
        }
        assert!(sweepout_phi1(1.5).is_err());
    }

    #[test]
    fn product_slice_reaches_clifford_area() {
        let s = ShapeSpec::product(0.6).build().unwrap();
        let q = QuadratureGrid::square(Domain::Torus, 16).unwrap();
        let (_, m) = max_over_t(&s, &ConformalParam::zero(), 33, &q).unwrap();
        assert!((m - 2.0 * PI * PI).abs() <= 1e-7);
    }

    #[test]
    fn grid_validation() {
        let g = LandscapeGrid {
            per_axis: 4,
            ..Default::default()
        };
        assert!(g.validate().is_err());
        assert_eq!(LandscapeGrid::default().t_points().len(), 33);
    }
}
