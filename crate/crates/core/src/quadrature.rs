//! Quadrature rules on parameter domains.
//!
//! Torus domains `[0, 2π)²` use the periodic trapezoid rule, which converges
//! geometrically for analytic periodic integrands. Sphere charts use
//! Gauss–Legendre in the polar angle on the open interval `(0, π)` (so no node
//! ever sits on a pole) times the trapezoid rule in longitude.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parameter domain of a surface chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Domain {
    /// Doubly periodic rectangle `[0, 2π) × [0, 2π)`.
    Torus,
    /// Polar angle `u ∈ (0, π)`, longitude `v ∈ [0, 2π)`.
    SphereChart,
}

impl Domain {
    pub fn u_range(self) -> (f64, f64) {
        match self {
            Domain::Torus => (0.0, 2.0 * PI),
            Domain::SphereChart => (0.0, PI),
        }
    }

    pub fn v_range(self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }

    pub fn area(self) -> f64 {
        let (a, b) = self.u_range();
        let (c, d) = self.v_range();
        (b - a) * (d - c)
    }
}

/// Tensor-product quadrature nodes over a parameter domain.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub n_u: usize,
    pub n_v: usize,
    pub domain: Domain,
    pub u_nodes: Vec<f64>,
    pub u_weights: Vec<f64>,
    pub v_nodes: Vec<f64>,
    pub v_weights: Vec<f64>,
}

pub const MIN_NODES: usize = 16;

impl QuadratureGrid {
    pub fn new(domain: Domain, n_u: usize, n_v: usize) -> Result<Self> {
        if n_u < MIN_NODES || n_v < MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least {MIN_NODES} nodes per direction, got {n_u}x{n_v}"
            )));
        }
        let (u_nodes, u_weights) = match domain {
            Domain::Torus => trapezoid(n_u, 0.0, 2.0 * PI),
            Domain::SphereChart => gauss_legendre_on(n_u, 0.0, PI),
        };
        let (v_nodes, v_weights) = trapezoid(n_v, 0.0, 2.0 * PI);
        Ok(QuadratureGrid {
            n_u,
            n_v,
            domain,
            u_nodes,
            u_weights,
            v_nodes,
            v_weights,
        })
    }

    /// Square grid with `n` nodes per direction.
    pub fn square(domain: Domain, n: usize) -> Result<Self> {
        Self::new(domain, n, n)
    }

    pub fn len(&self) -> usize {
        self.n_u * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `k` in row-major order (`u` index fastest varies slowest).
    pub fn node(&self, k: usize) -> (f64, f64, f64) {
        let i = k / self.n_v;
        let j = k % self.n_v;
        (
            self.u_nodes[i],
            self.v_nodes[j],
            self.u_weights[i] * self.v_weights[j],
        )
    }

    pub fn weight_sum(&self) -> f64 {
        pairwise_sum(&(0..self.len()).map(|k| self.node(k).2).collect::<Vec<_>>())
    }
}

fn trapezoid(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / n as f64;
    ((0..n).map(|i| a + h * i as f64).collect(), vec![h; n])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|w| w * half).collect(),
    )
}

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    u0: f64,
    u1: f64,
    v0: f64,
    v1: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Rect {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Rect {}
impl PartialOrd for Rect {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Rect {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Settings for [`adaptive_cubature`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_rects: usize,
    pub initial_splits: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_rects: 20_000,
            initial_splits: 4,
        }
    }
}

/// Globally adaptive tensor Gauss–Legendre cubature over a rectangle.
///
/// Each cell is integrated with an 8×8 and a 4×4 rule; their difference is the
/// cell error estimate. The cell with the largest estimate is split into four
/// until the total estimate meets the tolerance.
pub fn adaptive_cubature<F>(
    f: F,
    u_range: (f64, f64),
    v_range: (f64, f64),
    opts: AdaptiveOptions,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let (x8, w8) = gauss_legendre(8);
    let (x4, w4) = gauss_legendre(4);
    let eval = |u0: f64, u1: f64, v0: f64, v1: f64| -> Result<Rect> {
        let hu = 0.5 * (u1 - u0);
        let hv = 0.5 * (v1 - v0);
        let mu = 0.5 * (u0 + u1);
        let mv = 0.5 * (v0 + v1);
        let mut fine = 0.0;
        for (xi, wi) in x8.iter().zip(&w8) {
            for (xj, wj) in x8.iter().zip(&w8) {
                fine += wi * wj * f(mu + hu * xi, mv + hv * xj)?;
            }
        }
        let mut coarse = 0.0;
        for (xi, wi) in x4.iter().zip(&w4) {
            for (xj, wj) in x4.iter().zip(&w4) {
                coarse += wi * wj * f(mu + hu * xi, mv + hv * xj)?;
            }
        }
        fine *= hu * hv;
        coarse *= hu * hv;
        Ok(Rect {
            u0,
            u1,
            v0,
            v1,
            value: fine,
            error: (fine - coarse).abs(),
        })
    };

    let mut heap = BinaryHeap::new();
    let k = opts.initial_splits.max(1);
    let du = (u_range.1 - u_range.0) / k as f64;
    let dv = (v_range.1 - v_range.0) / k as f64;
    for i in 0..k {
        for j in 0..k {
            let u0 = u_range.0 + du * i as f64;
            let v0 = v_range.0 + dv * j as f64;
            heap.push(eval(u0, u0 + du, v0, v0 + dv)?);
        }
    }
    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(t, e), r| (t + r.value, e + r.error));
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            let mut cells: Vec<Rect> = heap.into_vec();
            cells.sort_by(|a, b| {
                (a.u0, a.v0)
                    .partial_cmp(&(b.u0, b.v0))
                    .unwrap_or(Ordering::Equal)
            });
            return Ok(pairwise_sum(
                &cells.iter().map(|r| r.value).collect::<Vec<_>>(),
            ));
        }
        if heap.len() >= opts.max_rects {
            return Err(Error::NoConvergence {
                what: "adaptive cubature",
                residual: err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let um = 0.5 * (worst.u0 + worst.u1);
        let vm = 0.5 * (worst.v0 + worst.v1);
        heap.push(eval(worst.u0, um, worst.v0, vm)?);
        heap.push(eval(um, worst.u1, worst.v0, vm)?);
        heap.push(eval(worst.u0, um, vm, worst.v1)?);
        heap.push(eval(um, worst.u1, vm, worst.v1)?);
    }
}

/// Adaptive Simpson quadrature of a scalar function on `[a, b]`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    // Seed with a uniform split so that periodic integrands with symmetric
    // cancellation cannot fool the first error estimate.
    const SEED: usize = 16;
    const MAX_DEPTH: u32 = 40;
    let h = (b - a) / SEED as f64;
    let mut total = 0.0;
    for k in 0..SEED {
        let x0 = a + h * k as f64;
        let x1 = x0 + h;
        let xm = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (f(x0)?, f(xm)?, f(x1)?);
        let whole = h / 6.0 * (f0 + 4.0 * fm + f1);
        total += simpson_step(&f, x0, x1, f0, fm, f1, whole, abs_tol / SEED as f64, MAX_DEPTH)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
pub fn golden_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(6);
        // degree 11 is the highest exact degree
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert_relative_eq!(integral, 2.0 / 11.0, epsilon = 1e-14);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn weights_sum_to_domain_area() {
        for domain in [Domain::Torus, Domain::SphereChart] {
            let q = QuadratureGrid::new(domain, 24, 32).unwrap();
            assert_relative_eq!(q.weight_sum(), domain.area(), epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(QuadratureGrid::new(Domain::Torus, 8, 32).is_err());
    }

    #[test]
    fn adaptive_cubature_resolves_a_sharp_peak() {
        // off-centre Gaussian, narrow compared with the initial cells
        let eps = 0.02;
        let f = |u: f64, v: f64| Ok((-((u - 0.31).powi(2) + (v + 0.17).powi(2)) / (eps * eps)).exp());
        let got = adaptive_cubature(f, (-1.0, 1.0), (-1.0, 1.0), AdaptiveOptions::default())
            .unwrap();
        assert_relative_eq!(got, PI * eps * eps, max_relative = 1e-8);
    }

    #[test]
    fn simpson_handles_periodic_integrands() {
        let got = adaptive_simpson(|t| Ok(t.cos().powi(2)), 0.0, 2.0 * PI, 1e-12).unwrap();
        assert_relative_eq!(got, PI, epsilon = 1e-10);
    }

    #[test]
    fn golden_section_finds_the_peak() {
        let (x, fx) = golden_max(|t| Ok(-(t - 0.3).powi(2)), -1.0, 2.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx.abs() < 1e-15);
    }
}
