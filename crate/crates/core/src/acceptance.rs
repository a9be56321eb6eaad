//! The acceptance suite: twelve numerical claims checked at fixed
//! tolerances, seeds and resolutions.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::Vector4;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conformal_lab::{boundary_area, check_invariance, kpoint_limit, lattice_lambda1, li_yau_chain, Lattice};
use crate::curves::{
    elastic_energy_s2, half_plane_circle, latitude, hyperbolic_bending, random_convex_profile, random_perturbed_latitude,
    random_space_curve, total_curvature, trefoil,
};
use crate::error::Result;
use crate::family::{max_over_t, normal_offset_point, sup_area_landscape, sweepout_phi1, sweepout_phi1_quadrature, LandscapeGrid};
use crate::quadrature::{Domain, QuadratureGrid};
use crate::s3::{random_param, ConformalParam, PointS3};
use crate::shapes::{hopf_torus, s3_sphere, tube_energy_profile, ShapeSpec};
use crate::spectral::{jacobi_spectrum, normal_coordinate_residuals};

pub const COUNT: u8 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

pub fn name(id: u8) -> &'static str {
    match id {
        1 => "Clifford energy",
        2 => "tube minimization",
        3 => "stereographic consistency",
        4 => "conformal invariance",
        5 => "offset areas below the energy",
        6 => "family landscape",
        7 => "sweepout",
        8 => "Jacobi indices",
        9 => "lambda1 area chain",
        10 => "k-point limits",
        11 => "curve identities",
        12 => "Euler-Lagrange residual",
        _ => "unknown",
    }
}

/// Runs criterion `id` (1 through 12).
pub fn run(id: u8) -> Outcome {
    let result = match id {
        1 => clifford_energy(),
        2 => tube_minimization(),
        3 => stereographic_consistency(),
        4 => conformal_invariance(),
        5 => offset_bound(),
        6 => landscape(),
        7 => sweepout(),
        8 => jacobi_indices(),
        9 => li_yau(),
        10 => kpoint(),
        11 => curve_identities(),
        12 => el_residual(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        name: name(id).to_string(),
        passed,
        detail,
    }
}

pub fn run_all() -> Vec<Outcome> {
    (1..=COUNT).map(run).collect()
}

type Check = Result<(bool, String)>;

fn two_pi_sq() -> f64 {
    2.0 * PI * PI
}

fn clifford_energy() -> Check {
    let start = Instant::now();
    let s = ShapeSpec::clifford().build_unchecked()?;
    let q = QuadratureGrid::square(Domain::Torus, 256)?;
    let w = s.willmore_energy(&q)?;
    let secs = start.elapsed().as_secs_f64();
    let err = (w - two_pi_sq()).abs();
    Ok((err <= 1e-9 && secs < 1.0, format!("|W - 2pi^2| = {err:.3e}, {secs:.3} s")))
}

fn tube_minimization() -> Check {
    let big_r = 2f64.sqrt();
    let q = QuadratureGrid::new(Domain::Torus, 16, 96)?;
    let samples: Vec<f64> = (0..=12_500).map(|k| 0.1 + 1e-4 * k as f64).collect();
    let profile = tube_energy_profile(big_r, &samples, &q)?;
    let (r, w) = profile
        .iter()
        .copied()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("non-empty profile");
    let ok = (r - 1.0).abs() <= 1e-4 && (w - two_pi_sq()).abs() <= 1e-7;
    Ok((ok, format!("argmin r = {r:.6}, min W - 2pi^2 = {:.3e}", w - two_pi_sq())))
}

fn stereographic_consistency() -> Check {
    let q = QuadratureGrid::square(Domain::Torus, 128)?;
    let tube = ShapeSpec::tube(2f64.sqrt(), 1.0).build_unchecked()?;
    let w_r3 = tube.willmore_energy(&q)?;
    let w_lift = tube.lift_to_s3()?.willmore_energy(&q)?;
    let w_clifford = ShapeSpec::clifford().build_unchecked()?.willmore_energy(&q)?;
    let d1 = (w_r3 - w_clifford).abs();
    let d2 = (w_lift - w_clifford).abs();
    Ok((
        d1 <= 1e-8 && d2 <= 1e-8,
        format!("|W(R3) - W(Clifford)| = {d1:.3e}, |W(lift) - W(Clifford)| = {d2:.3e}"),
    ))
}

fn conformal_invariance() -> Check {
    let q = QuadratureGrid::square(Domain::Torus, 256)?;
    let shapes = [
        ("clifford", ShapeSpec::clifford()),
        ("product(0.6)", ShapeSpec::product(0.6)),
        ("tube(2,1) lifted", ShapeSpec::tube(2.0, 1.0).lifted()),
    ];
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for (name, spec) in shapes {
        let s = spec.build_unchecked()?;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let v = random_param(&mut rng, 0.8);
            let d = check_invariance(&s, &v, &q)?;
            if d > worst {
                worst = d;
                worst_at = format!("{name}, |v| = {:.3}", v.norm());
            }
        }
    }
    Ok((worst <= 1e-6, format!("max relative deviation {worst:.3e} ({worst_at})")))
}

/// Catalog shapes in S³ used by the offset and landscape suites.
pub fn catalog_s3() -> Result<Vec<(String, ShapeSpec)>> {
    Ok(vec![
        ("clifford".into(), ShapeSpec::clifford()),
        ("product(0.6)".into(), ShapeSpec::product(0.6)),
        ("product(0.3)".into(), ShapeSpec::product(0.3)),
        ("equator".into(), ShapeSpec::equator()),
        ("cap(0.7)".into(), ShapeSpec::cap([0.0, 0.0, 0.0, 1.0], 0.7)),
        ("tube(2,1) lifted".into(), ShapeSpec::tube(2.0, 1.0).lifted()),
        ("sphere lifted".into(), ShapeSpec::sphere([0.3, 0.0, 0.2], 0.8).lifted()),
        ("hopf(latitude 0.4)".into(), ShapeSpec::hopf(latitude(0.4, 0.08, 3)?)),
        ("perturbed clifford".into(), ShapeSpec::perturbed(ShapeSpec::clifford(), 0.05, 2, 3)),
    ])
}

fn offset_bound() -> Check {
    let ts: Vec<f64> = (0..64).map(|k| -PI + 2.0 * PI * (k as f64 + 0.5) / 64.0).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = String::new();
    for (name, spec) in catalog_s3()? {
        let s = spec.build_unchecked()?;
        let q = QuadratureGrid::square(s.domain, 96)?;
        let w = s.willmore_energy(&q)?;
        for (t, a) in ts.iter().zip(s.offset_areas(&ts, &q)?) {
            if a - w > worst {
                worst = a - w;
                worst_at = format!("{name}, t = {t:.3}");
            }
        }
    }
    Ok((worst <= 1e-7, format!("max(area - W) = {worst:.3e} ({worst_at})")))
}

fn landscape() -> Check {
    let clifford = ShapeSpec::clifford().build_unchecked()?;
    let q = QuadratureGrid::square(Domain::Torus, 32)?;
    let l = sup_area_landscape(&clifford, &LandscapeGrid::default(), &q, 200)?;
    let at_origin = l.argmax.v.norm() <= 1e-9 && l.argmax.t.abs() <= 1e-9;
    let sup_err = (l.sup - two_pi_sq()).abs();
    let product = ShapeSpec::product(0.6).build_unchecked()?;
    let (_, slice_max) = max_over_t(&product, &ConformalParam::zero(), 33, &QuadratureGrid::square(Domain::Torus, 32)?)?;
    let slice_err = (slice_max - two_pi_sq()).abs();
    Ok((
        at_origin && l.certified && sup_err <= 1e-9 && slice_err <= 1e-7,
        format!(
            "sup - 2pi^2 = {:.3e} at |v| = {:.1e}, t = {:.1e}, certified = {}; product(0.6) slice max - 2pi^2 = {:.3e}",
            l.sup - two_pi_sq(),
            l.argmax.v.norm(),
            l.argmax.t,
            l.certified,
            slice_max - two_pi_sq()
        ),
    ))
}

fn sweepout() -> Check {
    let q = QuadratureGrid::square(Domain::SphereChart, 64)?;
    let mut best = (0.0, f64::NEG_INFINITY);
    let mut worst_quad: f64 = 0.0;
    for k in 0..=100 {
        let t = k as f64 / 100.0;
        let a = sweepout_phi1(t)?;
        worst_quad = worst_quad.max((sweepout_phi1_quadrature(t, &q)? - a).abs());
        if a > best.1 {
            best = (t, a);
        }
    }
    let err = (best.1 - 4.0 * PI).abs();
    Ok((
        best.0 == 0.5 && err <= 1e-12 && worst_quad <= 1e-12,
        format!("max at t = {}, |max - 4pi| = {err:.1e}, quadrature vs closed form {worst_quad:.1e}", best.0),
    ))
}

fn jacobi_indices() -> Check {
    let clifford = ShapeSpec::clifford().build_unchecked()?;
    let equator = ShapeSpec::equator().build_unchecked()?;
    let c64 = jacobi_spectrum(&clifford, 64, 24)?;
    let c128 = jacobi_spectrum(&clifford, 128, 24)?;
    let e64 = jacobi_spectrum(&equator, 64, 24)?;
    let e128 = jacobi_spectrum(&equator, 128, 24)?;
    let expected = [-4.0, -2.0, -2.0, -2.0, -2.0];
    let eig_err = c128
        .eigenvalues
        .iter()
        .zip(expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let res = normal_coordinate_residuals(&clifford, 64)?;
    let res_max = res.iter().copied().fold(0.0, f64::max);
    let ok = c64.index == 5
        && c128.index == 5
        && e64.index == 1
        && e128.index == 1
        && !c128.indeterminate
        && eig_err <= 1e-2
        && res_max <= 1e-6;
    Ok((
        ok,
        format!(
            "Clifford index {}/{} (64/128), equator {}/{}; negative eigenvalue error {eig_err:.2e}; residual {res_max:.1e}",
            c64.index, c128.index, e64.index, e128.index
        ),
    ))
}

fn li_yau() -> Check {
    let q = QuadratureGrid::square(Domain::Torus, 128)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, spec) in [
        ("clifford", ShapeSpec::clifford()),
        ("product(0.6)", ShapeSpec::product(0.6)),
        ("product(0.3)", ShapeSpec::product(0.3)),
        ("hopf(latitude 0.5)", ShapeSpec::hopf(latitude(0.5, 0.0, 0)?)),
    ] {
        let s = spec.build_unchecked()?;
        let r = li_yau_chain(name, &s, &q)?;
        ok &= r.holds;
        if name == "clifford" {
            let gap = (r.two_w - r.lambda1_area).abs();
            ok &= gap <= 1e-8;
            notes.push(format!("Clifford 2W - lambda1*A = {gap:.1e}"));
        }
    }
    let (_, square) = lattice_lambda1(&Lattice::square());
    let sq_err = (square - 4.0 * PI * PI).abs();
    ok &= sq_err <= 1e-12;
    notes.push(format!("square lattice error {sq_err:.1e}"));
    Ok((ok, format!("chain holds on 4 flat tori; {}", notes.join("; "))))
}

fn kpoint() -> Check {
    let clifford = ShapeSpec::clifford().build_unchecked()?;
    let p = PointS3::normalized(clifford.position(0.3, 1.1))?;
    let on = kpoint_limit(std::slice::from_ref(&clifford), &p, &[0.999])?;
    let on_err = (on.areas[0] / (4.0 * PI) - 1.0).abs();
    let off = normal_offset_point(&clifford, 0.3, 1.1, 0.3)?;
    let off_area = boundary_area(std::slice::from_ref(&clifford), &ConformalParam::new(off.coords() * 0.999)?)?;
    let e1 = PointS3::new(Vector4::new(1.0, 0.0, 0.0, 0.0))?;
    let sheets = [
        s3_sphere(Vector4::new(0.0, 0.0, 0.0, 1.0), PI / 2.0),
        s3_sphere(Vector4::new(0.0, 0.0, 1.0, 0.0), PI / 2.0),
    ];
    let two = kpoint_limit(&sheets, &e1, &[0.999])?;
    let two_err = (two.areas[0] / (8.0 * PI) - 1.0).abs();
    Ok((
        on_err <= 0.02 && off_area <= 0.1 && two.sheets == 2 && two_err <= 0.02,
        format!(
            "on torus {:.2}% from 4pi; off torus area {off_area:.2e}; two sheets {:.2}% from 8pi",
            100.0 * on_err,
            100.0 * two_err
        ),
    ))
}

fn curve_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut fenchel_min = f64::INFINITY;
    for _ in 0..50 {
        fenchel_min = fenchel_min.min(total_curvature(&random_space_curve(&mut rng))?);
    }
    let tref = total_curvature(&trefoil())?;
    let profile = hyperbolic_bending(&half_plane_circle(2f64.sqrt(), 1.0)?)?;
    let profile_err = (profile - 4.0 * PI).abs();
    let mut bending_min = f64::INFINITY;
    for _ in 0..50 {
        bending_min = bending_min.min(hyperbolic_bending(&random_convex_profile(&mut rng))?);
    }
    let q = QuadratureGrid::square(Domain::Torus, 128)?;
    let mut hopf_worst: f64 = 0.0;
    for _ in 0..20 {
        let curve = random_perturbed_latitude(&mut rng);
        let curve_side = elastic_energy_s2(&curve)?;
        let surface_side = hopf_torus(&curve)?.willmore_energy(&q)?;
        hopf_worst = hopf_worst.max((curve_side - surface_side).abs() / surface_side);
    }
    let ok = fenchel_min >= 2.0 * PI - 1e-8
        && tref > 4.0 * PI
        && profile_err <= 1e-7
        && bending_min >= 4.0 * PI - 1e-6
        && hopf_worst <= 1e-6;
    Ok((
        ok,
        format!(
            "min total curvature - 2pi = {:.3e}; trefoil - 4pi = {:.3}; profile error {profile_err:.1e}; min bending - 4pi = {:.3e}; Hopf identity {hopf_worst:.1e}",
            fenchel_min - 2.0 * PI,
            tref - 4.0 * PI,
            bending_min - 4.0 * PI
        ),
    ))
}

fn el_residual() -> Check {
    let optimal = ShapeSpec::tube(2f64.sqrt(), 1.0).build_unchecked()?;
    let mut residuals = Vec::new();
    for n in [64, 128, 256] {
        residuals.push(optimal.el_residual(&QuadratureGrid::square(Domain::Torus, n)?)?);
    }
    let rate = (residuals[1] / residuals[2]).log2();
    let control = ShapeSpec::tube(2.0, 1.0)
        .build_unchecked()?
        .el_residual(&QuadratureGrid::square(Domain::Torus, 256)?)?;
    Ok((
        residuals[2] <= 1e-3 && rate >= 1.8 && control >= 0.1,
        format!(
            "optimal tube {:.2e} / {:.2e} / {:.2e} (64/128/256, order {rate:.2}); tube(2,1) {control:.3}",
            residuals[0], residuals[1], residuals[2]
        ),
    ))
}
