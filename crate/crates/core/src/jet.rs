//! Second-order jets of surface parametrizations and their pushforward
//! through smooth maps of the ambient space.
//!
//! Ambient points are stored as 4-vectors throughout; surfaces in ℝ³ keep
//! the last coordinate at zero.

use nalgebra::{Matrix4, Vector3, Vector4};

/// Position and first/second partial derivatives at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub pos: Vector4<f64>,
    pub du: Vector4<f64>,
    pub dv: Vector4<f64>,
    pub duu: Vector4<f64>,
    pub duv: Vector4<f64>,
    pub dvv: Vector4<f64>,
}

impl Jet {
    pub fn from_r3(
        pos: Vector3<f64>,
        du: Vector3<f64>,
        dv: Vector3<f64>,
        duu: Vector3<f64>,
        duv: Vector3<f64>,
        dvv: Vector3<f64>,
    ) -> Jet {
        let e = |w: Vector3<f64>| Vector4::new(w.x, w.y, w.z, 0.0);
        Jet {
            pos: e(pos),
            du: e(du),
            dv: e(dv),
            duu: e(duu),
            duv: e(duv),
            dvv: e(dvv),
        }
    }

    /// Chain rule: jet of `map ∘ self`.
    pub fn push<M: AmbientMap + ?Sized>(&self, map: &M) -> Jet {
        let x = self.pos;
        Jet {
            pos: map.value(&x),
            du: map.d1(&x, &self.du),
            dv: map.d1(&x, &self.dv),
            duu: map.d2(&x, &self.du, &self.du) + map.d1(&x, &self.duu),
            duv: map.d2(&x, &self.du, &self.dv) + map.d1(&x, &self.duv),
            dvv: map.d2(&x, &self.dv, &self.dv) + map.d1(&x, &self.dvv),
        }
    }
}

/// A smooth map of the ambient ℝ⁴ with exact first and second differentials.
pub trait AmbientMap: Send + Sync {
    fn value(&self, x: &Vector4<f64>) -> Vector4<f64>;
    /// `DΦ(x)·h`
    fn d1(&self, x: &Vector4<f64>, h: &Vector4<f64>) -> Vector4<f64>;
    /// `D²Φ(x)[h, k]`
    fn d2(&self, x: &Vector4<f64>, h: &Vector4<f64>, k: &Vector4<f64>) -> Vector4<f64>;
}

/// `x ↦ scale·(x − center)/|x − center|² + offset`.
///
/// With `scale = 1 − |v|²`, `center = v`, `offset = −v` this is the conformal
/// map `F_v` of S³; with `scale = 1`, `center = offset = 0` it is the inversion
/// in the unit sphere.
#[derive(Debug, Clone, Copy)]
pub struct Inversion {
    pub scale: f64,
    pub center: Vector4<f64>,
    pub offset: Vector4<f64>,
}

impl AmbientMap for Inversion {
    fn value(&self, x: &Vector4<f64>) -> Vector4<f64> {
        let w = x - self.center;
        w * (self.scale / w.norm_squared()) + self.offset
    }

    fn d1(&self, x: &Vector4<f64>, h: &Vector4<f64>) -> Vector4<f64> {
        let w = x - self.center;
        let q = w.norm_squared();
        (h - w * (2.0 * w.dot(h) / q)) * (self.scale / q)
    }

    fn d2(&self, x: &Vector4<f64>, h: &Vector4<f64>, k: &Vector4<f64>) -> Vector4<f64> {
        let w = x - self.center;
        let q = w.norm_squared();
        let wh = w.dot(h);
        let wk = w.dot(k);
        let hk = h.dot(k);
        let q2 = q * q;
        (h * (-2.0 * wk / q2) + k * (-2.0 * wh / q2) + w * (-2.0 * hk / q2 + 8.0 * wh * wk / (q2 * q)))
            * self.scale
    }
}

/// Linear map of ℝ⁴ (rotations, reflections, scalings).
#[derive(Debug, Clone, Copy)]
pub struct Linear(pub Matrix4<f64>);

impl AmbientMap for Linear {
    fn value(&self, x: &Vector4<f64>) -> Vector4<f64> {
        self.0 * x
    }
    fn d1(&self, _x: &Vector4<f64>, h: &Vector4<f64>) -> Vector4<f64> {
        self.0 * h
    }
    fn d2(&self, _x: &Vector4<f64>, _h: &Vector4<f64>, _k: &Vector4<f64>) -> Vector4<f64> {
        Vector4::zeros()
    }
}

/// Inverse stereographic projection ℝ³ → S³ (from the north pole `e₄`):
/// `y ↦ (2y, |y|² − 1)/(|y|² + 1)`. Reads only the first three coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct InverseStereographic;

fn spatial(x: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(x.x, x.y, x.z, 0.0)
}

impl AmbientMap for InverseStereographic {
    fn value(&self, x: &Vector4<f64>) -> Vector4<f64> {
        let y = spatial(x);
        let d = y.norm_squared() + 1.0;
        // e₄ + 2(y, −1)/d
        let p = Vector4::new(y.x, y.y, y.z, -1.0);
        Vector4::new(0.0, 0.0, 0.0, 1.0) + p * (2.0 / d)
    }

    fn d1(&self, x: &Vector4<f64>, h: &Vector4<f64>) -> Vector4<f64> {
        let y = spatial(x);
        let h = spatial(h);
        let d = y.norm_squared() + 1.0;
        let p = Vector4::new(y.x, y.y, y.z, -1.0);
        let ds = -2.0 * y.dot(&h) / (d * d);
        (h / d + p * ds) * 2.0
    }

    fn d2(&self, x: &Vector4<f64>, h: &Vector4<f64>, k: &Vector4<f64>) -> Vector4<f64> {
        let y = spatial(x);
        let h = spatial(h);
        let k = spatial(k);
        let d = y.norm_squared() + 1.0;
        let p = Vector4::new(y.x, y.y, y.z, -1.0);
        let ds_h = -2.0 * y.dot(&h) / (d * d);
        let ds_k = -2.0 * y.dot(&k) / (d * d);
        let dds = -2.0 * h.dot(&k) / (d * d) + 8.0 * y.dot(&h) * y.dot(&k) / (d * d * d);
        (h * ds_k + k * ds_h + p * dds) * 2.0
    }
}
