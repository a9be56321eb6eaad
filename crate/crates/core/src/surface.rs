//! Parametric surfaces in ℝ³ and S³: curvature, area, Willmore energies,
//! offset areas, Euler–Lagrange residuals and total absolute curvature.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{AmbientMap, InverseStereographic, Jet};
use crate::quadrature::{gauss_legendre_on, pairwise_sum, Domain, QuadratureGrid};
use crate::s3::ConformalParam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ambient {
    R3,
    S3,
}

pub type JetFn = dyn Fn(f64, f64) -> Jet + Send + Sync;
pub type PositionFn = dyn Fn(f64, f64) -> Vector4<f64> + Send + Sync;

/// An immersion of a parameter domain with exact second-order jets.
///
/// Orientation `+1` selects the normal `N ∝ x_v × x_u` in ℝ³ (round spheres
/// in the standard chart get positive mean curvature) and the normal with
/// `det(N, x, x_u, x_v) > 0` in S³.
#[derive(Clone)]
pub struct ParametricSurface {
    pub ambient: Ambient,
    pub domain: Domain,
    pub orientation: f64,
    jet: Arc<JetFn>,
    flat_metric: Option<[f64; 3]>,
}

impl fmt::Debug for ParametricSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricSurface")
            .field("ambient", &self.ambient)
            .field("domain", &self.domain)
            .field("orientation", &self.orientation)
            .field("flat_metric", &self.flat_metric)
            .finish_non_exhaustive()
    }
}

/// Differential-geometric data at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub pos: Vector4<f64>,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub normal: Vector4<f64>,
    pub k1: f64,
    pub k2: f64,
    pub mean: f64,
    pub gauss: f64,
}

impl CurvatureSample {
    /// `√(EG − F²)`.
    pub fn area_element(&self) -> f64 {
        (self.e * self.g - self.f * self.f).sqrt()
    }

    /// Squared norm of the second fundamental form, `k₁² + k₂²`.
    pub fn second_form_norm_sq(&self) -> f64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }

    /// Jacobian of the normal offset `x ↦ cos t·x + sin t·N(x)` in S³.
    pub fn offset_jacobian(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        (c - self.k1 * s) * (c - self.k2 * s)
    }

    /// Distance along the normal geodesic (in the direction of `sign t`) to
    /// the first focal point.
    pub fn focal_time(&self, forward: bool) -> f64 {
        let arccot = |k: f64| PI / 2.0 - k.atan();
        if forward {
            arccot(self.k1).min(arccot(self.k2))
        } else {
            arccot(-self.k1).min(arccot(-self.k2))
        }
    }

    /// Offset Jacobian cut off at the first focal point, zero beyond it.
    pub fn truncated_offset_jacobian(&self, t: f64) -> f64 {
        if t.abs() >= self.focal_time(t >= 0.0) {
            0.0
        } else {
            self.offset_jacobian(t).max(0.0)
        }
    }
}

/// Generalized cross product in ℝ⁴: the vector `c` with `⟨c, w⟩ = det(a, b, d, w)`.
pub(crate) fn cross4(a: &Vector4<f64>, b: &Vector4<f64>, d: &Vector4<f64>) -> Vector4<f64> {
    let mut out = Vector4::zeros();
    for i in 0..4 {
        let mut e = Vector4::zeros();
        e[i] = 1.0;
        out[i] = Matrix4::from_columns(&[*a, *b, *d, e]).determinant();
    }
    out
}

impl ParametricSurface {
    pub fn new<F>(ambient: Ambient, domain: Domain, jet: F) -> Self
    where
        F: Fn(f64, f64) -> Jet + Send + Sync + 'static,
    {
        ParametricSurface {
            ambient,
            domain,
            orientation: 1.0,
            jet: Arc::new(jet),
            flat_metric: None,
        }
    }

    /// Surface known only through positions; jets come from Richardson
    /// extrapolated central differences with base step `1e−3`.
    pub fn from_positions<F>(ambient: Ambient, domain: Domain, pos: F) -> Self
    where
        F: Fn(f64, f64) -> Vector4<f64> + Send + Sync + 'static,
    {
        let pos: Arc<PositionFn> = Arc::new(pos);
        ParametricSurface::new(ambient, domain, move |u, v| fd_jet(pos.as_ref(), u, v, FD_STEP))
    }

    pub fn with_orientation(mut self, sign: f64) -> Self {
        self.orientation = if sign < 0.0 { -1.0 } else { 1.0 };
        self
    }

    /// Records that the metric is the constant `E du² + 2F du dv + G dv²`.
    pub fn with_flat_metric(mut self, efg: [f64; 3]) -> Self {
        self.flat_metric = Some(efg);
        self
    }

    pub fn flat_metric(&self) -> Option<[f64; 3]> {
        self.flat_metric
    }

    pub fn jet(&self, u: f64, v: f64) -> Jet {
        (self.jet)(u, v)
    }

    pub fn position(&self, u: f64, v: f64) -> Vector4<f64> {
        self.jet(u, v).pos
    }

    /// `map ∘ self`. A flat chart survives only if the caller vouches for it.
    pub fn pushforward(&self, map: Arc<dyn AmbientMap>, ambient: Ambient) -> ParametricSurface {
        let inner = self.jet.clone();
        ParametricSurface {
            ambient,
            domain: self.domain,
            orientation: self.orientation,
            jet: Arc::new(move |u, v| inner(u, v).push(map.as_ref())),
            flat_metric: None,
        }
    }

    /// `F_v ∘ self` for a surface in S³. The conformal structure, and hence
    /// the flat conformal chart if any, is preserved.
    pub fn conformal_image(&self, v: &ConformalParam) -> Result<ParametricSurface> {
        if self.ambient != Ambient::S3 {
            return Err(Error::UnsupportedAmbient("conformal maps act on S³ surfaces"));
        }
        let mut out = self.pushforward(Arc::new(v.map()), Ambient::S3);
        out.flat_metric = self.flat_metric;
        Ok(out)
    }

    /// Inverse stereographic image of an ℝ³ surface.
    pub fn lift_to_s3(&self) -> Result<ParametricSurface> {
        if self.ambient != Ambient::R3 {
            return Err(Error::UnsupportedAmbient("only ℝ³ surfaces can be lifted"));
        }
        Ok(self.pushforward(Arc::new(InverseStereographic), Ambient::S3))
    }

    pub fn curvature_at(&self, u: f64, v: f64) -> Result<CurvatureSample> {
        curvature_from_jet(&self.jet(u, v), self.ambient, self.orientation, u, v)
    }

    /// Curvature data at every node of `q`, in node order.
    pub fn samples(&self, q: &QuadratureGrid) -> Result<Vec<CurvatureSample>> {
        (0..q.len())
            .into_par_iter()
            .map(|k| {
                let (u, v, _) = q.node(k);
                self.curvature_at(u, v)
            })
            .collect()
    }

    /// `∫ f dμ` for a pointwise integrand of the curvature data.
    pub fn integrate<F>(&self, q: &QuadratureGrid, f: F) -> Result<f64>
    where
        F: Fn(&CurvatureSample) -> f64 + Sync,
    {
        let terms: Vec<f64> = (0..q.len())
            .into_par_iter()
            .map(|k| {
                let (u, v, w) = q.node(k);
                let s = self.curvature_at(u, v)?;
                Ok(w * s.area_element() * f(&s))
            })
            .collect::<Result<_>>()?;
        Ok(pairwise_sum(&terms))
    }

    pub fn area(&self, q: &QuadratureGrid) -> Result<f64> {
        self.integrate(q, |_| 1.0)
    }

    /// `∫H²dμ` in ℝ³ and `∫(1 + H²)dμ` in S³.
    pub fn willmore_energy(&self, q: &QuadratureGrid) -> Result<f64> {
        let shift = match self.ambient {
            Ambient::R3 => 0.0,
            Ambient::S3 => 1.0,
        };
        self.integrate(q, |s| shift + s.mean * s.mean)
    }

    pub fn gauss_integral(&self, q: &QuadratureGrid) -> Result<f64> {
        self.integrate(q, |s| s.gauss)
    }

    pub fn max_abs_mean_curvature(&self, q: &QuadratureGrid) -> Result<f64> {
        Ok(self
            .samples(q)?
            .iter()
            .map(|s| s.mean.abs())
            .fold(0.0, f64::max))
    }

    /// Area of the normal offset at distance `t`, integrating the offset
    /// Jacobian over the points whose normal geodesic has not yet reached a
    /// focal point.
    pub fn offset_area(&self, t: f64, q: &QuadratureGrid) -> Result<f64> {
        if self.ambient != Ambient::S3 {
            return Err(Error::UnsupportedAmbient("offsets are taken in S³"));
        }
        if !(-PI..=PI).contains(&t) {
            return Err(Error::InvalidArgument(format!("offset distance {t} outside [-π, π]")));
        }
        self.integrate(q, |s| s.truncated_offset_jacobian(t))
    }

    /// Offset areas for several distances from one pass of curvature data.
    pub fn offset_areas(&self, ts: &[f64], q: &QuadratureGrid) -> Result<Vec<f64>> {
        if self.ambient != Ambient::S3 {
            return Err(Error::UnsupportedAmbient("offsets are taken in S³"));
        }
        let weighted = self.weighted_samples(q)?;
        Ok(offset_areas_from(&weighted, ts))
    }

    /// `(weight·√g, sample)` at every node.
    pub fn weighted_samples(&self, q: &QuadratureGrid) -> Result<Vec<(f64, CurvatureSample)>> {
        (0..q.len())
            .into_par_iter()
            .map(|k| {
                let (u, v, w) = q.node(k);
                let s = self.curvature_at(u, v)?;
                Ok((w * s.area_element(), s))
            })
            .collect()
    }

    /// `∫|K| dμ` for surfaces in ℝ³.
    ///
    /// Each `v`-line (periodic) is split at the sign changes of `K`, which are
    /// located by bisection; every smooth piece is integrated by composite
    /// Gauss–Legendre. The outer `u` integral uses the grid's rule.
    pub fn total_abs_gauss(&self, q: &QuadratureGrid) -> Result<f64> {
        if self.ambient != Ambient::R3 {
            return Err(Error::UnsupportedAmbient("total absolute curvature is defined in ℝ³"));
        }
        let lines: Vec<f64> = (0..q.n_u)
            .into_par_iter()
            .map(|i| {
                let u = q.u_nodes[i];
                Ok(q.u_weights[i] * self.abs_gauss_line(u, q)?)
            })
            .collect::<Result<_>>()?;
        Ok(pairwise_sum(&lines))
    }

    fn abs_gauss_line(&self, u: f64, q: &QuadratureGrid) -> Result<f64> {
        let density = |v: f64| -> Result<f64> {
            let s = self.curvature_at(u, v)?;
            Ok(s.gauss * s.area_element())
        };
        let n = q.n_v;
        let h = 2.0 * PI / n as f64;
        let vals: Vec<f64> = (0..n).map(|j| density(h * j as f64)).collect::<Result<_>>()?;
        let mut roots = Vec::new();
        for j in 0..n {
            let (a, b) = (vals[j], vals[(j + 1) % n]);
            if (a < 0.0) != (b < 0.0) {
                roots.push(bisect(&density, h * j as f64, h * (j + 1) as f64, a)?);
            }
        }
        if roots.is_empty() {
            // no sign change: the line integrand is smooth and periodic
            return Ok(pairwise_sum(&vals).abs() * h);
        }
        let mut total = 0.0;
        for (k, &a) in roots.iter().enumerate() {
            let b = if k + 1 < roots.len() {
                roots[k + 1]
            } else {
                roots[0] + 2.0 * PI
            };
            total += composite_gauss(&density, a, b)?.abs();
        }
        Ok(total)
    }

    /// Sup norm over the nodes of `ΔH + 2H(H² − K)`, the Euler–Lagrange
    /// operator of the Willmore energy, with `Δ` discretized by second-order
    /// periodic finite differences in the parameters.
    pub fn el_residual(&self, q: &QuadratureGrid) -> Result<f64> {
        if self.domain != Domain::Torus {
            return Err(Error::UnsupportedDomain(
                "Euler-Lagrange residual needs a doubly periodic chart",
            ));
        }
        let field = MetricField::sample(self, q.n_u, q.n_v)?;
        let h: Vec<f64> = field.samples.iter().map(|s| s.mean).collect();
        let lap = field.laplacian(&h);
        Ok(field
            .samples
            .iter()
            .zip(&lap)
            .map(|(s, d)| (d + 2.0 * s.mean * (s.mean * s.mean - s.gauss)).abs())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn offset_areas_from(weighted: &[(f64, CurvatureSample)], ts: &[f64]) -> Vec<f64> {
    ts.iter()
        .map(|&t| {
            let terms: Vec<f64> = weighted
                .iter()
                .map(|(w, s)| w * s.truncated_offset_jacobian(t))
                .collect();
            pairwise_sum(&terms)
        })
        .collect()
}

fn bisect<F>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

fn composite_gauss<F>(f: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let pieces = ((b - a) / (PI / 8.0)).ceil().max(1.0) as usize;
    let step = (b - a) / pieces as f64;
    let mut terms = Vec::with_capacity(pieces * 16);
    for p in 0..pieces {
        let x0 = a + step * p as f64;
        let (x, w) = gauss_legendre_on(16, x0, x0 + step);
        for (xi, wi) in x.iter().zip(&w) {
            terms.push(wi * f(*xi)?);
        }
    }
    Ok(pairwise_sum(&terms))
}

pub(crate) fn curvature_from_jet(
    j: &Jet,
    ambient: Ambient,
    orientation: f64,
    u: f64,
    v: f64,
) -> Result<CurvatureSample> {
    let e = j.du.dot(&j.du);
    let f = j.du.dot(&j.dv);
    let g = j.dv.dot(&j.dv);
    let det = e * g - f * f;
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::DegenerateImmersion { u, v, det });
    }
    let raw = match ambient {
        Ambient::R3 => {
            let a = j.du.xyz();
            let b = j.dv.xyz();
            let c = b.cross(&a);
            Vector4::new(c.x, c.y, c.z, 0.0)
        }
        Ambient::S3 => -cross4(&j.pos, &j.du, &j.dv),
    };
    let norm = raw.norm();
    if !(norm > 0.0) {
        return Err(Error::DegenerateImmersion { u, v, det });
    }
    let normal = raw * (orientation / norm);
    let l = j.duu.dot(&normal);
    let m = j.duv.dot(&normal);
    let n = j.dvv.dot(&normal);
    // shape operator I⁻¹II; the discriminant is formed from its entries,
    // which avoids the cancellation in H² − K near umbilics
    let s11 = (g * l - f * m) / det;
    let s12 = (g * m - f * n) / det;
    let s21 = (e * m - f * l) / det;
    let s22 = (e * n - f * m) / det;
    let mean = 0.5 * (s11 + s22);
    let half_diff = 0.5 * (s11 - s22);
    let disc = (half_diff * half_diff + s12 * s21).max(0.0).sqrt();
    let (k1, k2) = (mean + disc, mean - disc);
    Ok(CurvatureSample {
        pos: j.pos,
        e,
        f,
        g,
        l,
        m,
        n,
        normal,
        k1,
        k2,
        mean,
        gauss: k1 * k2,
    })
}

pub(crate) const FD_STEP: f64 = 1e-3;

/// Second-order jet from positions by central differences at steps `h` and
/// `h/2`, Richardson extrapolated to fourth order.
pub(crate) fn fd_jet(pos: &PositionFn, u: f64, v: f64, h: f64) -> Jet {
    let x = pos(u, v);
    let stencil = |h: f64| {
        let (pu, mu) = (pos(u + h, v), pos(u - h, v));
        let (pv, mv) = (pos(u, v + h), pos(u, v - h));
        let mixed = pos(u + h, v + h) - pos(u + h, v - h) - pos(u - h, v + h) + pos(u - h, v - h);
        [
            (pu - mu) / (2.0 * h),
            (pv - mv) / (2.0 * h),
            (pu - x * 2.0 + mu) / (h * h),
            mixed / (4.0 * h * h),
            (pv - x * 2.0 + mv) / (h * h),
        ]
    };
    let coarse = stencil(h);
    let fine = stencil(0.5 * h);
    let r = |k: usize| (fine[k] * 4.0 - coarse[k]) / 3.0;
    Jet {
        pos: x,
        du: r(0),
        dv: r(1),
        duu: r(2),
        duv: r(3),
        dvv: r(4),
    }
}

/// Metric coefficients of a torus chart on a uniform grid, with the
/// flux coefficients `√g g^{ij}` at the half-integer points the conservative
/// stencil needs.
pub(crate) struct MetricField {
    pub n_u: usize,
    pub n_v: usize,
    pub h_u: f64,
    pub h_v: f64,
    pub samples: Vec<CurvatureSample>,
    /// `√g` at the nodes.
    pub sqrt_g: Vec<f64>,
    /// `√g g^{uu}` at `(i + ½, j)`.
    pub a_half: Vec<f64>,
    /// `√g g^{vv}` at `(i, j + ½)`.
    pub c_half: Vec<f64>,
    /// `√g g^{uv}` at the nodes.
    pub b_node: Vec<f64>,
}

fn inverse_metric_density(j: &Jet) -> (f64, f64, f64, f64) {
    let e = j.du.dot(&j.du);
    let f = j.du.dot(&j.dv);
    let g = j.dv.dot(&j.dv);
    let s = (e * g - f * f).sqrt();
    // √g·g^{ij} = (G, −F, E)/√g
    (g / s, -f / s, e / s, s)
}

impl MetricField {
    pub fn sample(surface: &ParametricSurface, n_u: usize, n_v: usize) -> Result<Self> {
        let h_u = 2.0 * PI / n_u as f64;
        let h_v = 2.0 * PI / n_v as f64;
        let rows: Vec<(CurvatureSample, f64, f64, f64)> = (0..n_u * n_v)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n_v, k % n_v);
                let (u, v) = (h_u * i as f64, h_v * j as f64);
                let s = surface.curvature_at(u, v)?;
                let (a, _, _, _) = inverse_metric_density(&surface.jet(u + 0.5 * h_u, v));
                let (_, _, c, _) = inverse_metric_density(&surface.jet(u, v + 0.5 * h_v));
                let b = -s.f / s.area_element();
                Ok((s, a, c, b))
            })
            .collect::<Result<_>>()?;
        let mut field = MetricField {
            n_u,
            n_v,
            h_u,
            h_v,
            samples: Vec::with_capacity(rows.len()),
            sqrt_g: Vec::with_capacity(rows.len()),
            a_half: Vec::with_capacity(rows.len()),
            c_half: Vec::with_capacity(rows.len()),
            b_node: Vec::with_capacity(rows.len()),
        };
        for (s, a, c, b) in rows {
            field.sqrt_g.push(s.area_element());
            field.samples.push(s);
            field.a_half.push(a);
            field.c_half.push(c);
            field.b_node.push(b);
        }
        Ok(field)
    }

    pub fn len(&self) -> usize {
        self.n_u * self.n_v
    }

    pub fn idx(&self, i: isize, j: isize) -> usize {
        let i = i.rem_euclid(self.n_u as isize) as usize;
        let j = j.rem_euclid(self.n_v as isize) as usize;
        i * self.n_v + j
    }

    /// Stencil of `√g·Δ` at node `k` as `(column, coefficient)` pairs.
    pub fn stencil(&self, k: usize) -> Vec<(usize, f64)> {
        let (i, j) = ((k / self.n_v) as isize, (k % self.n_v) as isize);
        let (hu2, hv2, huv) = (self.h_u * self.h_u, self.h_v * self.h_v, 4.0 * self.h_u * self.h_v);
        let a_p = self.a_half[self.idx(i, j)];
        let a_m = self.a_half[self.idx(i - 1, j)];
        let c_p = self.c_half[self.idx(i, j)];
        let c_m = self.c_half[self.idx(i, j - 1)];
        let b_ip = self.b_node[self.idx(i + 1, j)];
        let b_im = self.b_node[self.idx(i - 1, j)];
        let b_jp = self.b_node[self.idx(i, j + 1)];
        let b_jm = self.b_node[self.idx(i, j - 1)];
        let mut out = vec![
            (self.idx(i, j), -(a_p + a_m) / hu2 - (c_p + c_m) / hv2),
            (self.idx(i + 1, j), a_p / hu2),
            (self.idx(i - 1, j), a_m / hu2),
            (self.idx(i, j + 1), c_p / hv2),
            (self.idx(i, j - 1), c_m / hv2),
        ];
        if self.b_node.iter().any(|b| b.abs() > 0.0) {
            out.extend([
                (self.idx(i + 1, j + 1), (b_ip + b_jp) / huv),
                (self.idx(i + 1, j - 1), -(b_ip + b_jm) / huv),
                (self.idx(i - 1, j + 1), -(b_im + b_jp) / huv),
                (self.idx(i - 1, j - 1), (b_im + b_jm) / huv),
            ]);
        }
        out
    }

    /// Laplace–Beltrami of a nodal field.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                let acc: f64 = self.stencil(k).iter().map(|&(c, w)| w * f[c]).sum();
                acc / self.sqrt_g[k]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    fn round_sphere(rho: f64) -> ParametricSurface {
        ParametricSurface::new(Ambient::R3, Domain::SphereChart, move |th, ph| {
            let (st, ct) = th.sin_cos();
            let (sp, cp) = ph.sin_cos();
            Jet::from_r3(
                Vector3::new(st * cp, st * sp, ct) * rho,
                Vector3::new(ct * cp, ct * sp, -st) * rho,
                Vector3::new(-st * sp, st * cp, 0.0) * rho,
                Vector3::new(-st * cp, -st * sp, -ct) * rho,
                Vector3::new(-ct * sp, ct * cp, 0.0) * rho,
                Vector3::new(-st * cp, -st * sp, 0.0) * rho,
            )
        })
    }

    fn product_torus(a: f64) -> ParametricSurface {
        let b = (1.0 - a * a).sqrt();
        ParametricSurface::new(Ambient::S3, Domain::Torus, move |u, v| {
            let (su, cu) = u.sin_cos();
            let (sv, cv) = v.sin_cos();
            Jet {
                pos: Vector4::new(a * cu, a * su, b * cv, b * sv),
                du: Vector4::new(-a * su, a * cu, 0.0, 0.0),
                dv: Vector4::new(0.0, 0.0, -b * sv, b * cv),
                duu: Vector4::new(-a * cu, -a * su, 0.0, 0.0),
                duv: Vector4::zeros(),
                dvv: Vector4::new(0.0, 0.0, -b * cv, -b * sv),
            }
        })
    }

    #[test]
    fn sphere_is_umbilic_with_positive_curvature() {
        let s = round_sphere(2.5).curvature_at(0.7, 1.3).unwrap();
        assert_relative_eq!(s.k1, 0.4, epsilon = 1e-14);
        assert_relative_eq!(s.k2, 0.4, epsilon = 1e-14);
        assert_relative_eq!(s.gauss, 0.16, epsilon = 1e-14);
    }

    #[test]
    fn product_torus_principal_curvatures() {
        let s = product_torus(0.6).curvature_at(0.3, 2.0).unwrap();
        assert_relative_eq!(s.k1, 0.8 / 0.6, epsilon = 1e-13);
        assert_relative_eq!(s.k2, -0.6 / 0.8, epsilon = 1e-13);
        assert_relative_eq!(s.mean, 0.291_666_666_666_666_7, epsilon = 1e-13);
    }

    #[test]
    fn finite_difference_jets_agree_with_exact_ones() {
        let exact = product_torus(0.6);
        let e2 = exact.clone();
        let fd = ParametricSurface::from_positions(Ambient::S3, Domain::Torus, move |u, v| {
            e2.position(u, v)
        });
        let (a, b) = (exact.jet(0.4, 1.1), fd.jet(0.4, 1.1));
        for (x, y) in [(a.du, b.du), (a.dv, b.dv), (a.duu, b.duu), (a.duv, b.duv), (a.dvv, b.dvv)] {
            assert!((x - y).norm() < 1e-9, "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn sphere_area_and_energy() {
        let q = QuadratureGrid::square(Domain::SphereChart, 64).unwrap();
        let s = round_sphere(1.0);
        assert_relative_eq!(s.area(&q).unwrap(), 4.0 * PI, epsilon = 1e-11);
        assert_relative_eq!(s.willmore_energy(&q).unwrap(), 4.0 * PI, epsilon = 1e-11);
        assert_relative_eq!(s.total_abs_gauss(&q).unwrap(), 4.0 * PI, epsilon = 1e-10);
        assert_relative_eq!(s.gauss_integral(&q).unwrap(), 4.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn offsets_of_product_tori_follow_the_closed_form() {
        let q = QuadratureGrid::square(Domain::Torus, 32).unwrap();
        let phi = 0.6f64.acos();
        let s = product_torus(0.6);
        for t in [-1.0, -0.3, 0.0, 0.4, 0.6] {
            let expected = if phi + t > 0.0 && phi + t < PI / 2.0 {
                2.0 * PI * PI * (2.0 * (phi + t)).sin()
            } else {
                0.0
            };
            assert_relative_eq!(s.offset_area(t, &q).unwrap(), expected, epsilon = 1e-10);
        }
        assert_eq!(s.offset_area(PI, &q).unwrap(), 0.0);
        assert_eq!(s.offset_area(-PI, &q).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_point_is_reported() {
        let flat = ParametricSurface::new(Ambient::R3, Domain::Torus, |u, _| {
            Jet::from_r3(
                Vector3::new(u, 0.0, 0.0),
                Vector3::x(),
                Vector3::zeros(),
                Vector3::zeros(),
                Vector3::zeros(),
                Vector3::zeros(),
            )
        });
        assert!(matches!(
            flat.curvature_at(0.1, 0.2),
            Err(Error::DegenerateImmersion { .. })
        ));
    }

    #[test]
    fn laplacian_of_a_product_torus_mode() {
        // on the flat product torus Δ cos(mu) = −m²/a² cos(mu)
        let field = MetricField::sample(&product_torus(0.6), 128, 128).unwrap();
        let f: Vec<f64> = (0..field.len())
            .map(|k| (3.0 * field.h_u * (k / 128) as f64).cos())
            .collect();
        let lap = field.laplacian(&f);
        for k in (0..field.len()).step_by(97) {
            assert!((lap[k] + 9.0 / 0.36 * f[k]).abs() < 0.1);
        }
    }
}
