//! Geometry of the unit 3-sphere S³ ⊂ ℝ⁴: conformal maps `F_v`,
//! stereographic projection, the Hopf map and round 2-spheres.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{AmbientMap, Inversion};

/// Largest admissible `|v|`; the boundary of the ball is only approached.
pub const MAX_CONFORMAL_NORM: f64 = 1.0 - 1e-6;

/// A point of S³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointS3(Vector4<f64>);

impl PointS3 {
    /// Projects a non-zero vector radially onto S³.
    pub fn normalized(x: Vector4<f64>) -> Result<Self> {
        let n = x.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument(format!("cannot normalize {x:?}")));
        }
        Ok(PointS3(x / n))
    }

    /// Accepts `x` only if it already lies on S³ to within `1e-10`.
    pub fn new(x: Vector4<f64>) -> Result<Self> {
        if (x.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "point {x:?} is not on the unit sphere"
            )));
        }
        PointS3::normalized(x)
    }

    pub fn coords(&self) -> &Vector4<f64> {
        &self.0
    }

    pub fn north_pole() -> Self {
        PointS3(Vector4::new(0.0, 0.0, 0.0, 1.0))
    }

    /// Geodesic distance on S³.
    pub fn distance(&self, other: &PointS3) -> f64 {
        // atan2 form is accurate for nearby and antipodal points alike
        let cross = (self.0 - other.0).norm();
        let sum = (self.0 + other.0).norm();
        2.0 * cross.atan2(sum)
    }
}

/// A parameter `v` in the open unit 4-ball selecting the conformal map `F_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalParam(Vector4<f64>);

impl ConformalParam {
    /// Rejects `|v| ≥ 1`; clamps `|v|` to at most `1 − 1e−6`.
    pub fn new(v: Vector4<f64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n >= 1.0 {
            return Err(Error::ParameterOutsideBall { norm: n });
        }
        if n > MAX_CONFORMAL_NORM {
            return Ok(ConformalParam(v * (MAX_CONFORMAL_NORM / n)));
        }
        Ok(ConformalParam(v))
    }

    pub fn zero() -> Self {
        ConformalParam(Vector4::zeros())
    }

    pub fn vector(&self) -> &Vector4<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `F_v` as a map of ℝ⁴ with exact differentials.
    pub fn map(&self) -> Inversion {
        Inversion {
            scale: 1.0 - self.0.norm_squared(),
            center: self.0,
            offset: -self.0,
        }
    }

    /// Conformal factor `λ(x) = (1 − |v|²)/|x − v|²`, so that `|dF_v(h)| = λ|h|`.
    pub fn conformal_factor(&self, x: &Vector4<f64>) -> f64 {
        (1.0 - self.0.norm_squared()) / (x - self.0).norm_squared()
    }
}

/// `F_v(x) = ((1 − |v|²)/|x − v|²)(x − v) − v`.
pub fn apply_conformal(v: &ConformalParam, x: &PointS3) -> PointS3 {
    let y = v.map().value(&x.0);
    // re-project to remove rounding drift
    PointS3(y / y.norm())
}

/// Solves `F_v(x) = y` for `x ∈ S³` by Newton iteration on ℝ⁴.
pub fn invert_conformal(v: &ConformalParam, y: &PointS3) -> Result<PointS3> {
    let map = v.map();
    // F_{-v} is a good initial guess
    let mut x = apply_conformal(&ConformalParam(-v.0), y).0;
    let mut residual = f64::INFINITY;
    for _ in 0..50 {
        let r = map.value(&x) - y.0;
        residual = r.norm();
        if residual <= 1e-14 {
            break;
        }
        let mut jac = Matrix4::zeros();
        for i in 0..4 {
            let mut e = Vector4::zeros();
            e[i] = 1.0;
            jac.set_column(i, &map.d1(&x, &e));
        }
        let step = jac.lu().solve(&r).ok_or(Error::NoConvergence {
            what: "conformal inverse",
            residual,
        })?;
        x -= step;
    }
    if residual > 1e-10 {
        return Err(Error::NoConvergence {
            what: "conformal inverse",
            residual,
        });
    }
    Ok(PointS3(x / x.norm()))
}

/// Stereographic projection from the north pole `(0,0,0,1)` onto ℝ³.
pub fn to_r3(x: &PointS3) -> Result<Vector3<f64>> {
    let d = 1.0 - x.0.w;
    if d <= 1e-14 {
        return Err(Error::SingularProjection);
    }
    Ok(Vector3::new(x.0.x, x.0.y, x.0.z) / d)
}

/// Inverse stereographic projection ℝ³ → S³ ∖ {north pole}.
pub fn to_s3(y: &Vector3<f64>) -> PointS3 {
    let d = y.norm_squared() + 1.0;
    PointS3(Vector4::new(2.0 * y.x, 2.0 * y.y, 2.0 * y.z, y.norm_squared() - 1.0) / d)
}

/// Hopf map S³ → S², with `z₁ = x₁ + i x₂`, `z₂ = x₃ + i x₄` and
/// `(z₁, z₂) ↦ (|z₁|² − |z₂|², 2 Re(z₁ z̄₂), 2 Im(z₁ z̄₂))`.
pub fn hopf(x: &PointS3) -> Vector3<f64> {
    hopf_raw(&x.0)
}

pub(crate) fn hopf_raw(x: &Vector4<f64>) -> Vector3<f64> {
    let (a, b, c, d) = (x.x, x.y, x.z, x.w);
    Vector3::new(
        a * a + b * b - c * c - d * d,
        2.0 * (a * c + b * d),
        2.0 * (b * c - a * d),
    )
}

/// Multiplication by `e^{iθ}` on both complex coordinates (a Hopf fiber action).
pub fn fiber_rotate(x: &Vector4<f64>, theta: f64) -> Vector4<f64> {
    let (s, c) = theta.sin_cos();
    Vector4::new(
        c * x.x - s * x.y,
        s * x.x + c * x.y,
        c * x.z - s * x.w,
        s * x.z + c * x.w,
    )
}

/// Multiplication by `i` on both complex coordinates.
pub(crate) fn times_i(x: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(-x.y, x.x, -x.w, x.z)
}

/// A round 2-sphere `{x ∈ S³ : ⟨x, q⟩ = cos r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundSphere {
    pub center: PointS3,
    pub geodesic_radius: f64,
    pub orientation: f64,
}

impl RoundSphere {
    pub fn new(center: PointS3, geodesic_radius: f64) -> Result<Self> {
        if !(geodesic_radius > 0.0 && geodesic_radius < PI) {
            return Err(Error::InvalidArgument(format!(
                "geodesic radius {geodesic_radius} not in (0, π)"
            )));
        }
        Ok(RoundSphere {
            center,
            geodesic_radius,
            orientation: 1.0,
        })
    }

    /// The great sphere `{x₄ = 0}`.
    pub fn equator() -> Self {
        RoundSphere {
            center: PointS3::north_pole(),
            geodesic_radius: PI / 2.0,
            orientation: 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        4.0 * PI * self.geodesic_radius.sin().powi(2)
    }

    pub fn is_great(&self, tol: f64) -> bool {
        (self.geodesic_radius - PI / 2.0).abs() <= tol
    }

    /// Geodesic distance from `x` to the sphere.
    pub fn distance_to(&self, x: &PointS3) -> f64 {
        (self.center.distance(x) - self.geodesic_radius).abs()
    }

    /// Orthonormal frame `(q, e₁, e₂, e₃)` adapted to the center.
    pub fn frame(&self) -> [Vector4<f64>; 4] {
        orthonormal_frame(self.center.coords())
    }
}

/// Completes a unit vector to an orthonormal basis of ℝ⁴ (first column = `q`).
pub fn orthonormal_frame(q: &Vector4<f64>) -> [Vector4<f64>; 4] {
    let mut basis = vec![*q / q.norm()];
    for i in 0..4 {
        let mut e = Vector4::zeros();
        e[i] = 1.0;
        for b in &basis {
            e -= b * b.dot(&e);
        }
        if e.norm() > 1e-6 {
            basis.push(e.normalize());
        }
        if basis.len() == 4 {
            break;
        }
    }
    [basis[0], basis[1], basis[2], basis[3]]
}

/// Least-squares round sphere through points of S³.
///
/// Fits the affine hyperplane `⟨x, q⟩ = c` minimizing the squared residuals
/// (smallest principal axis of the centered cloud), canonicalized to `c ≥ 0`.
/// Returns the sphere and the root-mean-square geodesic distance of the
/// inputs to it.
pub fn fit_round_sphere(points: &[PointS3]) -> Result<(RoundSphere, f64)> {
    if points.len() < 10 {
        return Err(Error::NoUniqueSphere(format!(
            "need at least 10 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vector4::zeros(), |acc, p| acc + p.0) / n;
    let spread = points
        .iter()
        .map(|p| (p.0 - points[0].0).norm())
        .fold(0.0, f64::max);
    if spread <= 1e-9 {
        return Err(Error::NoUniqueSphere("all points coincide".into()));
    }
    let mut cov = Matrix4::zeros();
    for p in points {
        let d = p.0 - mean;
        cov += d * d.transpose();
    }
    let eig = crate::eigen::checked_symmetric_eigen(DMatrix::from_iterator(4, 4, cov.iter().copied()))?;
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let (l0, l1, l3) = (
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[3]],
    );
    // Points on a circle (or coplanar with fewer dimensions) leave a pencil of
    // spheres through them.
    if l1 <= 1e-12 * l3.max(f64::MIN_POSITIVE) || (l1 - l0) <= 1e-14 * l3 {
        return Err(Error::NoUniqueSphere("point cloud is rank deficient".into()));
    }
    let mut q: Vector4<f64> = Vector4::from_iterator(eig.eigenvectors.column(order[0]).iter().copied());
    q.normalize_mut();
    let mut c = mean.dot(&q);
    if c < 0.0 {
        q = -q;
        c = -c;
    }
    let radius = c.min(1.0).acos().max(1e-12);
    let sphere = RoundSphere {
        center: PointS3(q),
        geodesic_radius: radius,
        orientation: 1.0,
    };
    let ms = points
        .iter()
        .map(|p| sphere.distance_to(p).powi(2))
        .sum::<f64>()
        / n;
    Ok((sphere, ms.sqrt()))
}

/// As [`fit_round_sphere`], with the orientation taken from the majority
/// direction of the supplied unit normals relative to the sphere's outward normal.
pub fn fit_round_sphere_oriented(
    points: &[PointS3],
    normals: &[Vector4<f64>],
) -> Result<(RoundSphere, f64)> {
    let (mut sphere, residual) = fit_round_sphere(points)?;
    let q = sphere.center.0;
    let mut votes = 0i64;
    for (p, n) in points.iter().zip(normals) {
        // outward normal of the geodesic ball around q, tangent to S³ at p
        let out = p.0 * p.0.dot(&q) - q;
        if out.norm() > 1e-12 {
            votes += if out.dot(n) >= 0.0 { 1 } else { -1 };
        }
    }
    sphere.orientation = if votes >= 0 { 1.0 } else { -1.0 };
    Ok((sphere, residual))
}

/// Points of S³ for tests and searches: uniformly distributed.
pub fn random_point<R: rand::Rng + ?Sized>(rng: &mut R) -> PointS3 {
    loop {
        let x = Vector4::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = x.norm();
        if n > 1e-3 && n <= 1.0 {
            return PointS3(x / n);
        }
    }
}

/// Uniform point of the ball `|v| ≤ radius` in ℝ⁴.
pub fn random_param<R: rand::Rng + ?Sized>(rng: &mut R, radius: f64) -> ConformalParam {
    loop {
        let v = Vector4::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm() <= 1.0 {
            return ConformalParam(v * radius);
        }
    }
}
