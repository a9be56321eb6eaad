use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use willmore::jet::Linear;
use willmore::quadrature::{Domain, QuadratureGrid};
use willmore::shapes::ShapeSpec;
use willmore::spectral::{
    constant_rayleigh_quotient, jacobi_residual, jacobi_spectrum, morse_index, normal_coordinate_residuals,
};
use willmore::surface::Ambient;
use willmore::Error;

fn clifford_closed_form(max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for m in -4i32..=4 {
        for n in -4i32..=4 {
            let l = 2.0 * (m * m + n * n) as f64 - 4.0;
            if l <= max {
                out.push(l);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn clifford_spectrum_converges_to_closed_form() {
    let s = ShapeSpec::clifford().build().unwrap();
    let exact = clifford_closed_form(10.0);
    assert_eq!(exact.len(), 21);
    let err_at = |n: usize| {
        let spec = jacobi_spectrum(&s, n, exact.len()).unwrap();
        spec.eigenvalues
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err_at(64), err_at(128));
    assert!(fine <= 1e-2, "{fine}");
    let ratio = coarse / fine;
    assert!((3.5..=4.5).contains(&ratio), "{coarse} / {fine}");
}

#[test]
fn constant_mode_has_quotient_minus_four() {
    let s = ShapeSpec::clifford().build().unwrap();
    let q = QuadratureGrid::square(Domain::Torus, 64).unwrap();
    let rq = constant_rayleigh_quotient(&s, &q).unwrap();
    assert_relative_eq!(rq, -4.0, epsilon = 1e-12);
    let lowest = jacobi_spectrum(&s, 64, 1).unwrap().eigenvalues[0];
    assert!((lowest - rq).abs() <= 1e-2);
    assert!(jacobi_residual(&s, |_| 1.0, -4.0, 64).unwrap() <= 1e-10);
}

#[test]
fn normal_coordinates_are_jacobi_fields() {
    let s = ShapeSpec::clifford().build().unwrap();
    for r in normal_coordinate_residuals(&s, 64).unwrap() {
        assert!(r <= 1e-6);
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
    let a = Matrix4::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..4 {
        if r[(i, i)] < 0.0 {
            q.column_mut(i).neg_mut();
        }
    }
    q
}

#[test]
fn index_is_invariant_under_rotations() {
    let mut rng = ChaCha8Rng::seed_from_u64(419);
    let clifford = ShapeSpec::clifford().build().unwrap();
    for _ in 0..2 {
        let rot = random_rotation(&mut rng);
        assert!((rot.transpose() * rot - Matrix4::identity()).norm() <= 1e-12);
        let turned = clifford.pushforward(Arc::new(Linear(rot)), Ambient::S3);
        let spec = jacobi_spectrum(&turned, 64, 24).unwrap();
        assert_eq!(spec.index, 5);
        assert_eq!(spec.killing_nullity, 4);
    }
}

#[test]
fn equator_and_other_minimal_surfaces() {
    let equator = ShapeSpec::equator().build().unwrap();
    let spec = jacobi_spectrum(&equator, 32, 10).unwrap();
    assert_eq!(spec.index, 1);
    assert_eq!(spec.killing_nullity, 3);
    assert_relative_eq!(spec.eigenvalues[0], -2.0);
    assert_eq!(morse_index(&ShapeSpec::clifford().build().unwrap(), 128).unwrap(), 5);
    // A great sphere through another center is still an equator.
    let tilted = ShapeSpec::cap([0.5, 0.5, 0.5, 0.5], PI / 2.0).build().unwrap();
    assert_eq!(morse_index(&tilted, 32).unwrap(), 1);
}

#[test]
fn non_minimal_surfaces_are_rejected() {
    for spec in [ShapeSpec::product(0.6), ShapeSpec::tube(2.0, 1.0).lifted()] {
        let s = spec.build().unwrap();
        assert!(matches!(jacobi_spectrum(&s, 32, 4), Err(Error::NotMinimal { .. })));
    }
    let r3 = ShapeSpec::tube(2.0, 1.0).build().unwrap();
    assert!(jacobi_spectrum(&r3, 32, 4).is_err());
}
