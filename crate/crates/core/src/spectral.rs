//! Jacobi operator of the area functional on minimal surfaces in S³.
//!
//! Eigenvalues follow the second-variation convention: they belong to
//! `J = −Δ − |A|² − 2`, so negative eigenvalues are area-decreasing
//! directions and their count is the Morse index.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, Vector4};
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::eigen::{interleave, lowest_eigenvalues, EigenOptions, SparseSym};
use crate::error::{Error, Result};
use crate::quadrature::{Domain, QuadratureGrid, MIN_NODES};
use crate::surface::{Ambient, CurvatureSample, MetricField, ParametricSurface};

/// Minimality threshold on `|H|`.
pub const MINIMAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiSpectrum {
    pub eigenvalues: Vec<f64>,
    pub index: usize,
    pub nullity: usize,
    pub tol: f64,
    /// Dimension of the Jacobi fields induced by rotations of S³.
    pub killing_nullity: usize,
    pub indeterminate: bool,
}

impl JacobiSpectrum {
    fn classify(eigenvalues: Vec<f64>, killing_nullity: usize) -> Self {
        let tol = 1e-3 * eigenvalues.first().map_or(0.0, |l| l.abs());
        let index = eigenvalues.iter().filter(|&&l| l <= -tol).count();
        let nullity = eigenvalues.iter().filter(|&&l| l.abs() < tol).count();
        let indeterminate = nullity > killing_nullity;
        if indeterminate {
            warn!("{nullity} eigenvalues in the nullity band, only {killing_nullity} expected: index is indeterminate");
        }
        JacobiSpectrum {
            eigenvalues,
            index,
            nullity,
            tol,
            killing_nullity,
            indeterminate,
        }
    }
}

/// `l(l + 1) − 2` with multiplicity `2l + 1`, the first `count` of them.
pub fn equator_eigenvalues(count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut l = 0usize;
    while out.len() < count {
        let value = (l * (l + 1)) as f64 - 2.0;
        out.extend(std::iter::repeat(value).take((2 * l + 1).min(count - out.len())));
        l += 1;
    }
    out
}

fn check_minimal(samples: &[CurvatureSample]) -> Result<()> {
    let max_h = samples.iter().map(|s| s.mean.abs()).fold(0.0, f64::max);
    if max_h > MINIMAL_TOL {
        return Err(Error::NotMinimal { max_h });
    }
    Ok(())
}

/// Rank of the normal components `⟨N, Kx⟩` of the six rotation fields of ℝ⁴.
fn killing_rank(samples: &[CurvatureSample], weights: &[f64]) -> usize {
    let mut fields: Vec<Vec<f64>> = Vec::with_capacity(6);
    for a in 0..4 {
        for b in a + 1..4 {
            fields.push(samples.iter().map(|s| s.normal[b] * s.pos[a] - s.normal[a] * s.pos[b]).collect());
        }
    }
    let mut gram = DMatrix::zeros(6, 6);
    for i in 0..6 {
        for j in 0..6 {
            gram[(i, j)] = fields[i]
                .iter()
                .zip(&fields[j])
                .zip(weights)
                .map(|((x, y), w)| x * y * w)
                .sum::<f64>();
        }
    }
    let eig = crate::eigen::checked_symmetric_eigen(gram).expect("6x6 eigen");
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    eig.eigenvalues.iter().filter(|v| **v > 1e-8 * top).count()
}

/// Jacobi operator on the `n × n` periodic grid, symmetrized with the nodal
/// area weights, together with the band-reducing ordering.
fn assemble(field: &MetricField) -> (SparseSym, Vec<usize>) {
    let n = field.len();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let s = &field.samples[k];
            let potential = s.second_form_norm_sq() + 2.0;
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(9);
            for (c, w) in field.stencil(k) {
                let v = -w / (field.sqrt_g[k] * field.sqrt_g[c]).sqrt();
                match row.iter_mut().find(|(cc, _)| *cc == c) {
                    Some(e) => e.1 += v,
                    None => row.push((c, v)),
                }
            }
            match row.iter_mut().find(|(cc, _)| *cc == k) {
                Some(e) => e.1 -= potential,
                None => row.push((k, -potential)),
            }
            row
        })
        .collect();
    let perm = (0..n)
        .map(|k| interleave(k / field.n_v, field.n_u) * field.n_v + interleave(k % field.n_v, field.n_v))
        .collect();
    (SparseSym { rows }, perm)
}

/// The `count` lowest Jacobi eigenvalues of a minimal surface in S³.
///
/// Tori are discretized by second-order periodic finite differences on an
/// `n × n` parameter grid; sphere charts (which for minimal surfaces are
/// great spheres) use the closed form.
pub fn jacobi_spectrum(s: &ParametricSurface, n: usize, count: usize) -> Result<JacobiSpectrum> {
    if s.ambient != Ambient::S3 {
        return Err(Error::UnsupportedAmbient("the Jacobi operator is set up in S³"));
    }
    if n < MIN_NODES {
        return Err(Error::InvalidArgument(format!("resolution {n} below {}", MIN_NODES)));
    }
    match s.domain {
        Domain::SphereChart => {
            let q = QuadratureGrid::square(Domain::SphereChart, n)?;
            let samples = s.samples(&q)?;
            check_minimal(&samples)?;
            let weights: Vec<f64> = (0..q.len()).map(|k| q.node(k).2 * samples[k].area_element()).collect();
            let killing = killing_rank(&samples, &weights);
            Ok(JacobiSpectrum::classify(equator_eigenvalues(count), killing))
        }
        Domain::Torus => {
            let field = MetricField::sample(s, n, n)?;
            check_minimal(&field.samples)?;
            let weights: Vec<f64> = field.sqrt_g.clone();
            let killing = killing_rank(&field.samples, &weights);
            let (matrix, perm) = assemble(&field);
            let eigenvalues = lowest_eigenvalues(&matrix, count, &perm, EigenOptions::default())?;
            Ok(JacobiSpectrum::classify(eigenvalues, killing))
        }
    }
}

pub fn morse_index(s: &ParametricSurface, n: usize) -> Result<usize> {
    Ok(jacobi_spectrum(s, n, 24)?.index)
}

/// Spectral derivative along one axis of a row-major `n_u × n_v` field.
fn spectral_diff(f: &[f64], n_u: usize, n_v: usize, along_u: bool) -> Vec<f64> {
    let len = if along_u { n_u } else { n_v };
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut out = vec![0.0; f.len()];
    let lines = if along_u { n_v } else { n_u };
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for line in 0..lines {
        let at = |k: usize| if along_u { k * n_v + line } else { line * n_v + k };
        for (k, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(f[at(k)], 0.0);
        }
        fwd.process(&mut buf);
        for (k, b) in buf.iter_mut().enumerate() {
            let freq = if 2 * k < len {
                k as f64
            } else if 2 * k == len {
                0.0
            } else {
                k as f64 - len as f64
            };
            *b *= Complex::new(0.0, freq);
        }
        inv.process(&mut buf);
        for (k, b) in buf.iter().enumerate() {
            out[at(k)] = b.re / len as f64;
        }
    }
    out
}

/// Laplace–Beltrami by spectral differentiation on a doubly periodic chart,
/// in divergence form `(1/√g) ∂_i(√g g^{ij} ∂_j f)`.
pub fn spectral_laplacian(s: &ParametricSurface, f: &[f64], n: usize) -> Result<Vec<f64>> {
    if s.domain != Domain::Torus {
        return Err(Error::UnsupportedDomain("spectral differentiation needs a doubly periodic chart"));
    }
    let h = 2.0 * PI / n as f64;
    let coeffs: Vec<[f64; 4]> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let j = s.jet(h * (k / n) as f64, h * (k % n) as f64);
            let e = j.du.dot(&j.du);
            let ff = j.du.dot(&j.dv);
            let g = j.dv.dot(&j.dv);
            let root = (e * g - ff * ff).sqrt();
            [g / root, -ff / root, e / root, root]
        })
        .collect();
    let fu = spectral_diff(f, n, n, true);
    let fv = spectral_diff(f, n, n, false);
    let flux_u: Vec<f64> = (0..n * n).map(|k| coeffs[k][0] * fu[k] + coeffs[k][1] * fv[k]).collect();
    let flux_v: Vec<f64> = (0..n * n).map(|k| coeffs[k][1] * fu[k] + coeffs[k][2] * fv[k]).collect();
    let du = spectral_diff(&flux_u, n, n, true);
    let dv = spectral_diff(&flux_v, n, n, false);
    Ok((0..n * n).map(|k| (du[k] + dv[k]) / coeffs[k][3]).collect())
}

/// `sup |J f − λ f|` for `f` sampled at the `n × n` grid nodes.
pub fn jacobi_residual<F>(s: &ParametricSurface, f: F, lambda: f64, n: usize) -> Result<f64>
where
    F: Fn(&CurvatureSample) -> f64 + Sync,
{
    let h = 2.0 * PI / n as f64;
    let samples: Vec<CurvatureSample> = (0..n * n)
        .into_par_iter()
        .map(|k| s.curvature_at(h * (k / n) as f64, h * (k % n) as f64))
        .collect::<Result<_>>()?;
    check_minimal(&samples)?;
    let values: Vec<f64> = samples.iter().map(&f).collect();
    let lap = spectral_laplacian(s, &values, n)?;
    Ok(samples
        .iter()
        .zip(&values)
        .zip(&lap)
        .map(|((smp, v), d)| (-d - (smp.second_form_norm_sq() + 2.0) * v - lambda * v).abs())
        .fold(0.0, f64::max))
}

/// Residuals of `J⟨N, e_i⟩ + 2⟨N, e_i⟩` for the four coordinate directions.
pub fn normal_coordinate_residuals(s: &ParametricSurface, n: usize) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (i, r) in out.iter_mut().enumerate() {
        let e = Vector4::ith(i, 1.0);
        *r = jacobi_residual(s, |smp| smp.normal.dot(&e), -2.0, n)?;
    }
    Ok(out)
}

/// Rayleigh quotient of the constant function, `−∫(|A|² + 2) / area`.
pub fn constant_rayleigh_quotient(s: &ParametricSurface, q: &QuadratureGrid) -> Result<f64> {
    let num = s.integrate(q, |smp| smp.second_form_norm_sq() + 2.0)?;
    Ok(-num / s.area(q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::ShapeSpec;

    #[test]
    fn equator_closed_form() {
        assert_eq!(&equator_eigenvalues(5), &[-2.0, 0.0, 0.0, 0.0, 4.0]);
        let s = ShapeSpec::equator().build().unwrap();
        let spec = jacobi_spectrum(&s, 32, 9).unwrap();
        assert_eq!(spec.index, 1);
        assert_eq!(spec.nullity, 3);
        assert_eq!(spec.killing_nullity, 3);
        assert!(!spec.indeterminate);
    }

    #[test]
    fn clifford_at_moderate_resolution() {
        let s = ShapeSpec::clifford().build().unwrap();
        let spec = jacobi_spectrum(&s, 64, 9).unwrap();
        assert_eq!(spec.index, 5);
        assert_eq!(spec.killing_nullity, 4);
        assert!((spec.eigenvalues[0] + 4.0).abs() < 1e-10);
    }

    #[test]
    fn non_minimal_rejected() {
        let s = ShapeSpec::product(0.6).build().unwrap();
        assert!(matches!(jacobi_spectrum(&s, 32, 5), Err(Error::NotMinimal { .. })));
    }

    #[test]
    fn spectral_derivative_of_trig() {
        let n = 16;
        let h = 2.0 * PI / n as f64;
        let f: Vec<f64> = (0..n * n).map(|k| (3.0 * h * (k / n) as f64).sin()).collect();
        let d = spectral_diff(&f, n, n, true);
        for k in 0..n * n {
            assert!((d[k] - 3.0 * (3.0 * h * (k / n) as f64).cos()).abs() < 1e-12);
        }
    }
}
