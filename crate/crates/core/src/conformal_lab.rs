//! Conformal invariance, balancing, conformal volume, flat conformal
//! classes and the `λ₁·area` chain.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;
use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{AmbientMap, Inversion};
use crate::optimize::nelder_mead_max;
use crate::quadrature::{adaptive_cubature, pairwise_sum, AdaptiveOptions, QuadratureGrid};
use crate::s3::{ConformalParam, PointS3};
use crate::surface::{Ambient, ParametricSurface};

/// `|𝒲(F_v S) − 𝒲(S)| / 𝒲(S)`.
pub fn check_invariance(s: &ParametricSurface, v: &ConformalParam, q: &QuadratureGrid) -> Result<f64> {
    if v.norm() > 0.9 {
        warn!("|v| = {} is outside the accuracy domain |v| <= 0.9", v.norm());
    }
    let w0 = s.willmore_energy(q)?;
    if v.norm() == 0.0 {
        return Ok(0.0);
    }
    let w1 = s.conformal_image(v)?.willmore_energy(q)?;
    Ok((w1 - w0).abs() / w0)
}

/// The inversion `x ↦ x/|x|²` of ℝ³ applied to a surface.
pub fn invert_r3(s: &ParametricSurface) -> Result<ParametricSurface> {
    if s.ambient != Ambient::R3 {
        return Err(Error::UnsupportedAmbient("inversion acts on ℝ³ surfaces"));
    }
    let map = Inversion {
        scale: 1.0,
        center: Vector4::zeros(),
        offset: Vector4::zeros(),
    };
    Ok(s.pushforward(Arc::new(map), Ambient::R3))
}

/// `area(F_v S) = ∫ λ² dμ` by adaptive cubature, robust to the
/// concentration of `λ` as `|v| → 1`.
pub fn pushforward_area(s: &ParametricSurface, v: &ConformalParam, rel_tol: f64) -> Result<f64> {
    if s.ambient != Ambient::S3 {
        return Err(Error::UnsupportedAmbient("conformal maps act on S³ surfaces"));
    }
    let opts = AdaptiveOptions {
        rel_tol,
        abs_tol: 1e-12,
        max_rects: 200_000,
        initial_splits: 8,
    };
    adaptive_cubature(
        |a, b| {
            let j = s.jet(a, b);
            let e = j.du.norm_squared();
            let f = j.du.dot(&j.dv);
            let g = j.dv.norm_squared();
            let lam = v.conformal_factor(&j.pos);
            Ok(lam * lam * (e * g - f * f).max(0.0).sqrt())
        },
        s.domain.u_range(),
        s.domain.v_range(),
        opts,
    )
}

/// Outcome of [`balance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Balanced {
    pub v0: ConformalParam,
    /// `|∫ F_{v₀}(x) dμ_{g₀}|`, with `dμ_{g₀}` the flat measure normalized to the area.
    pub residual: f64,
    pub iterations: usize,
}

struct Moments {
    positions: Vec<Vector4<f64>>,
    weights: Vec<f64>,
}

impl Moments {
    fn new(s: &ParametricSurface, q: &QuadratureGrid, efg: [f64; 3]) -> Self {
        let density = (efg[0] * efg[2] - efg[1] * efg[1]).sqrt();
        let (positions, weights): (Vec<_>, Vec<_>) = (0..q.len())
            .into_par_iter()
            .map(|k| {
                let (u, v, w) = q.node(k);
                (s.position(u, v), w * density)
            })
            .unzip();
        Moments { positions, weights }
    }

    fn at(&self, v: &ConformalParam) -> Vector4<f64> {
        let map = v.map();
        let mut out = Vector4::zeros();
        for i in 0..4 {
            let terms: Vec<f64> = self
                .positions
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| w * map.value(x)[i])
                .collect();
            out[i] = pairwise_sum(&terms);
        }
        out
    }
}

const BALANCE_STEPS: usize = 200;
const BALANCE_FD_STEP: f64 = 1e-6;

/// Finds `v₀` with `∫ F_{v₀}(x) dμ_{g₀} = 0` by damped Newton iteration from
/// `v = 0`, for surfaces with a flat conformal chart.
pub fn balance(s: &ParametricSurface, q: &QuadratureGrid) -> Result<Balanced> {
    if s.ambient != Ambient::S3 {
        return Err(Error::UnsupportedAmbient("balancing acts on S³ surfaces"));
    }
    let efg = s.flat_metric().ok_or(Error::NotFlat)?;
    let moments = Moments::new(s, q, efg);
    let area: f64 = pairwise_sum(&moments.weights);
    let target = 1e-11 * area;
    let mut v = Vector4::zeros();
    let mut m = moments.at(&ConformalParam::zero());
    for it in 0..BALANCE_STEPS {
        if m.norm() <= target {
            return Ok(Balanced {
                v0: ConformalParam::new(v)?,
                residual: m.norm(),
                iterations: it,
            });
        }
        let mut jac = Matrix4::zeros();
        for i in 0..4 {
            let mut dv = Vector4::zeros();
            dv[i] = BALANCE_FD_STEP;
            let plus = moments.at(&ConformalParam::new(v + dv)?);
            let minus = moments.at(&ConformalParam::new(v - dv)?);
            jac.set_column(i, &((plus - minus) / (2.0 * BALANCE_FD_STEP)));
        }
        let step = jac.lu().solve(&(-m)).ok_or(Error::NoConvergence {
            what: "balancing (singular Jacobian)",
            residual: m.norm(),
        })?;
        let mut damping = 1.0;
        loop {
            let trial = v + step * damping;
            if trial.norm() < 0.999 {
                let mt = moments.at(&ConformalParam::new(trial)?);
                if mt.norm() < m.norm() {
                    v = trial;
                    m = mt;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-12 {
                // no further decrease is possible at this precision
                if m.norm() <= 1e-8 * area {
                    return Ok(Balanced {
                        v0: ConformalParam::new(v)?,
                        residual: m.norm(),
                        iterations: it,
                    });
                }
                return Err(Error::NoConvergence {
                    what: "balancing",
                    residual: m.norm(),
                });
            }
        }
    }
    if m.norm() <= 1e-8 * area {
        return Ok(Balanced {
            v0: ConformalParam::new(v)?,
            residual: m.norm(),
            iterations: BALANCE_STEPS,
        });
    }
    Err(Error::NoConvergence {
        what: "balancing",
        residual: m.norm(),
    })
}

/// The four moments `∫ F_v(x) dμ_{g₀}` (flat measure) by the grid's rule.
pub fn flat_moments(s: &ParametricSurface, v: &ConformalParam, q: &QuadratureGrid) -> Result<Vector4<f64>> {
    let efg = s.flat_metric().ok_or(Error::NotFlat)?;
    Ok(Moments::new(s, q, efg).at(v))
}

/// Lower bound for `sup_v area(F_v S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalVolume {
    pub value: f64,
    pub v: ConformalParam,
    pub evaluations: usize,
}

/// Grid search on `{|v| ≤ 0.95}` (`per_axis`⁴ points) followed by Nelder–Mead
/// from the best grid point with `budget` further evaluations.
pub fn conformal_volume(s: &ParametricSurface, per_axis: usize, budget: usize) -> Result<ConformalVolume> {
    const RADIUS: f64 = 0.95;
    let per_axis = per_axis.max(2);
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -RADIUS + 2.0 * RADIUS * i as f64 / (per_axis - 1) as f64)
        .collect();
    let mut grid = Vec::new();
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                for &d in &axis {
                    let v = Vector4::new(a, b, c, d);
                    if v.norm() <= RADIUS + 1e-12 {
                        grid.push(v);
                    }
                }
            }
        }
    }
    // v = 0 is always a candidate
    grid.push(Vector4::zeros());
    let values: Vec<f64> = grid
        .par_iter()
        .map(|v| pushforward_area(s, &ConformalParam::new(*v)?, 1e-9))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..grid.len() {
        if values[i] > values[best] {
            best = i;
        }
    }
    let start = grid[best];
    let local = nelder_mead_max(
        |x| {
            let v = Vector4::new(x[0], x[1], x[2], x[3]);
            if v.norm() > RADIUS {
                return Ok(None);
            }
            Ok(Some(pushforward_area(s, &ConformalParam::new(v)?, 1e-9)?))
        },
        start.as_slice(),
        0.05,
        budget,
        1e-6,
    )?;
    let (value, v) = if local.value > values[best] {
        (local.value, Vector4::new(local.x[0], local.x[1], local.x[2], local.x[3]))
    } else {
        (values[best], start)
    };
    Ok(ConformalVolume {
        value,
        v: ConformalParam::new(v)?,
        evaluations: grid.len() + local.evaluations,
    })
}

/// Lattice generated by `(1, 0)` and `(x, y)`, normalized so that
/// `0 ≤ x ≤ 1/2`, `y > 0`, `x² + y² ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub x: f64,
    pub y: f64,
}

const LATTICE_TOL: f64 = 1e-12;

impl Lattice {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let ok = x.is_finite()
            && y.is_finite()
            && (-LATTICE_TOL..=0.5 + LATTICE_TOL).contains(&x)
            && y > 0.0
            && x * x + y * y >= 1.0 - LATTICE_TOL;
        if !ok {
            return Err(Error::InvalidLattice { x, y });
        }
        Ok(Lattice { x, y })
    }

    pub fn square() -> Self {
        Lattice { x: 0.0, y: 1.0 }
    }

    /// Area of `ℝ²/Γ`.
    pub fn area(&self) -> f64 {
        self.y
    }

    /// Conformal class of the flat torus with Gram matrix `[[a, b], [b, c]]`
    /// for its period vectors.
    pub fn from_gram(a: f64, b: f64, c: f64) -> Result<Self> {
        let det = a * c - b * b;
        if !(a > 0.0 && c > 0.0 && det > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Gram matrix [[{a}, {b}], [{b}, {c}]] is not positive definite"
            )));
        }
        // Lagrange–Gauss reduction on the Gram matrix
        let (mut g11, mut g12, mut g22) = (a, b, c);
        for _ in 0..200 {
            if g22 < g11 {
                std::mem::swap(&mut g11, &mut g22);
            }
            let mu = (g12 / g11).round();
            if mu == 0.0 {
                break;
            }
            g22 = g22 - 2.0 * mu * g12 + mu * mu * g11;
            g12 -= mu * g11;
        }
        if g22 < g11 {
            std::mem::swap(&mut g11, &mut g22);
        }
        let x = (g12 / g11).abs().min(0.5);
        let y = det.sqrt() / g11;
        Lattice::new(x, y.max((1.0 - x * x).sqrt()))
    }
}

/// `λ₁ = 4π² min_{ξ ∈ Γ*∖0} |ξ|²` and `λ₁·area(ℝ²/Γ)`.
///
/// In two dimensions `Γ*` is `Γ` rotated by a right angle and scaled by
/// `1/area`, and `(1, 0)` is a shortest vector of a normalized lattice, so
/// the minimum is `1/y²`.
pub fn lattice_lambda1(lattice: &Lattice) -> (f64, f64) {
    let lambda1 = 4.0 * PI * PI / (lattice.y * lattice.y);
    (lambda1, lambda1 * lattice.area())
}

/// Conformal class of a surface carrying a flat chart on `[0, 2π)²`.
pub fn flat_conformal_class(s: &ParametricSurface) -> Result<Lattice> {
    let [e, f, g] = s.flat_metric().ok_or(Error::NotFlat)?;
    let p = 4.0 * PI * PI;
    Lattice::from_gram(p * e, p * f, p * g)
}

/// One line of the `λ₁·area ≤ 2𝒲` chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiYauRecord {
    pub shape: String,
    pub v0: [f64; 4],
    pub lambda1_area: f64,
    pub two_w: f64,
    pub holds: bool,
}

pub fn li_yau_chain(name: &str, s: &ParametricSurface, q: &QuadratureGrid) -> Result<LiYauRecord> {
    let lattice = flat_conformal_class(s)?;
    let balanced = balance(s, q)?;
    let image = s.conformal_image(&balanced.v0)?;
    let two_w = 2.0 * image.willmore_energy(q)?;
    let (_, lambda1_area) = lattice_lambda1(&lattice);
    let v = balanced.v0.vector();
    Ok(LiYauRecord {
        shape: name.to_string(),
        v0: [v[0], v[1], v[2], v[3]],
        lambda1_area,
        two_w,
        holds: lambda1_area <= two_w + 1e-8,
    })
}

/// Closest parameter point of `s` to `p` and its ambient distance.
pub fn closest_point(s: &ParametricSurface, p: &Vector4<f64>) -> (f64, f64, f64) {
    const N: usize = 64;
    let (u0, u1) = s.domain.u_range();
    let (v0, v1) = s.domain.v_range();
    let mut best = (0.0, 0.0, f64::INFINITY);
    for i in 0..N {
        for j in 0..N {
            let u = u0 + (u1 - u0) * (i as f64 + 0.5) / N as f64;
            let v = v0 + (v1 - v0) * j as f64 / N as f64;
            let d = (s.position(u, v) - p).norm();
            if d < best.2 {
                best = (u, v, d);
            }
        }
    }
    // Newton on the gradient of |X − p|²/2
    let (mut u, mut v) = (best.0, best.1);
    for _ in 0..50 {
        let j = s.jet(u, v);
        let r = j.pos - p;
        let g = [r.dot(&j.du), r.dot(&j.dv)];
        let h11 = j.du.dot(&j.du) + r.dot(&j.duu);
        let h12 = j.du.dot(&j.dv) + r.dot(&j.duv);
        let h22 = j.dv.dot(&j.dv) + r.dot(&j.dvv);
        let det = h11 * h22 - h12 * h12;
        if !(det.abs() > 1e-300) {
            break;
        }
        let du = (h22 * g[0] - h12 * g[1]) / det;
        let dv = (h11 * g[1] - h12 * g[0]) / det;
        let (nu, nv) = (u - du, v - dv);
        if (s.position(nu, nv) - p).norm() > (j.pos - p).norm() + 1e-15 {
            break;
        }
        u = nu;
        v = nv;
        if du.abs().max(dv.abs()) < 1e-15 {
            break;
        }
    }
    let d = (s.position(u, v) - p).norm();
    if d < best.2 {
        (u, v, d)
    } else {
        best
    }
}

/// Areas of `F_{tp}(patches)` along a sequence of `t`, with the number of
/// sheets through `p` and the predicted limit `4π·sheets`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPointLimit {
    pub sheets: usize,
    pub ts: Vec<f64>,
    pub areas: Vec<f64>,
    pub limit: f64,
}

/// Total area of the conformal images of several patches.
pub fn boundary_area(patches: &[ParametricSurface], v: &ConformalParam) -> Result<f64> {
    let areas: Vec<f64> = patches
        .iter()
        .map(|s| pushforward_area(s, v, 1e-8))
        .collect::<Result<_>>()?;
    Ok(areas.iter().sum())
}

pub fn kpoint_limit(patches: &[ParametricSurface], p: &PointS3, ts: &[f64]) -> Result<KPointLimit> {
    let mut sheets = 0;
    let mut nearest = f64::INFINITY;
    for s in patches {
        let (_, _, d) = closest_point(s, p.coords());
        nearest = nearest.min(d);
        if d <= 1e-10 {
            sheets += 1;
        }
    }
    if sheets == 0 {
        return Err(Error::PointOffSurface { distance: nearest });
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) || ts.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return Err(Error::InvalidArgument("t sequence must increase inside (0, 1)".into()));
    }
    let areas = ts
        .iter()
        .map(|&t| boundary_area(patches, &ConformalParam::new(p.coords() * t)?))
        .collect::<Result<_>>()?;
    Ok(KPointLimit {
        sheets,
        ts: ts.to_vec(),
        areas,
        limit: 4.0 * PI * sheets as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Domain;
    use crate::shapes::ShapeSpec;
    use approx::assert_relative_eq;

    #[test]
    fn lattice_validation() {
        assert!(Lattice::new(0.6, 1.0).is_err());
        assert!(Lattice::new(0.2, 0.5).is_err());
        assert!(Lattice::new(0.5, 3f64.sqrt() / 2.0).is_ok());
    }

    #[test]
    fn lattice_eigenvalue_examples() {
        let (_, sq) = lattice_lambda1(&Lattice::square());
        assert_relative_eq!(sq, 4.0 * PI * PI, epsilon = 1e-12);
        let (_, hex) = lattice_lambda1(&Lattice::new(0.5, 3f64.sqrt() / 2.0).unwrap());
        assert_relative_eq!(hex, 8.0 / 3f64.sqrt() * PI * PI, epsilon = 1e-12);
        let (_, rect) = lattice_lambda1(&Lattice::new(0.0, 2.0).unwrap());
        assert_relative_eq!(rect, 2.0 * PI * PI, epsilon = 1e-12);
    }

    #[test]
    fn gram_reduction_recovers_normalized_lattice() {
        // basis (1,0), (x + 2, y) reduces back to (x, y)
        let (x, y) = (0.3, 1.2);
        let w2 = (x + 2.0, y);
        let l = Lattice::from_gram(1.0, w2.0, w2.0 * w2.0 + w2.1 * w2.1).unwrap();
        assert_relative_eq!(l.x, x, epsilon = 1e-12);
        assert_relative_eq!(l.y, y, epsilon = 1e-12);
    }

    #[test]
    fn product_torus_class_is_rectangular() {
        let s = ShapeSpec::product(0.6).build().unwrap();
        let l = flat_conformal_class(&s).unwrap();
        assert_relative_eq!(l.x, 0.0);
        assert_relative_eq!(l.y, 4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn clifford_is_balanced_at_the_origin() {
        let s = ShapeSpec::clifford().build().unwrap();
        let q = QuadratureGrid::square(Domain::Torus, 32).unwrap();
        let b = balance(&s, &q).unwrap();
        assert!(b.v0.norm() <= 1e-12);
    }

    #[test]
    fn inversion_preserves_tube_energy() {
        let s = ShapeSpec::tube(2.0, 1.0).build().unwrap();
        let inv = invert_r3(&s).unwrap();
        let q = QuadratureGrid::square(Domain::Torus, 128).unwrap();
        let w = s.willmore_energy(&q).unwrap();
        assert_relative_eq!(inv.willmore_energy(&q).unwrap(), w, max_relative = 1e-9);
    }
}
