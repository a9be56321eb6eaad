use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::Vector4;

use willmore::conformal_lab::pushforward_area;
use willmore::family::{
    family_area, family_areas, limit_sphere_probe, normal_offset_point, sup_area_landscape, sweepout_phi1,
    sweepout_phi1_quadrature, Approach, FamilyPoint, LandscapeGrid,
};
use willmore::quadrature::{Domain, QuadratureGrid};
use willmore::s3::{ConformalParam, PointS3};
use willmore::shapes::ShapeSpec;

fn clifford_point() -> PointS3 {
    PointS3::new(Vector4::new(1.0, 0.0, 1.0, 0.0) / 2f64.sqrt()).unwrap()
}

#[test]
fn family_examples() {
    let q = QuadratureGrid::square(Domain::Torus, 64).unwrap();
    let clifford = ShapeSpec::clifford().build().unwrap();
    assert_relative_eq!(family_area(&clifford, &FamilyPoint::origin(), &q).unwrap(), 2.0 * PI * PI, max_relative = 1e-12);
    let p = FamilyPoint::new(Vector4::zeros(), PI / 8.0).unwrap();
    assert_relative_eq!(family_area(&clifford, &p, &q).unwrap(), 2.0 * PI * PI * (PI / 4.0).cos(), max_relative = 1e-10);
    for spec in [ShapeSpec::clifford(), ShapeSpec::product(0.6), ShapeSpec::tube(2.0, 1.0).lifted()] {
        let s = spec.build().unwrap();
        for t in [PI, -PI] {
            let p = FamilyPoint::new(Vector4::new(0.3, -0.2, 0.1, 0.0), t).unwrap();
            assert!(family_area(&s, &p, &q).unwrap() <= 1e-6);
        }
    }
    assert!(FamilyPoint::new(Vector4::zeros(), 3.5).is_err());
    assert!(FamilyPoint::new(Vector4::new(1.0, 0.0, 0.0, 0.0), 0.0).is_err());
}

#[test]
fn family_is_continuous_in_t() {
    let q = QuadratureGrid::square(Domain::Torus, 64).unwrap();
    let s = ShapeSpec::tube(2.0, 1.0).lifted().build().unwrap();
    let v = ConformalParam::new(Vector4::new(0.2, 0.1, 0.0, -0.3)).unwrap();
    let n = 257;
    let ts: Vec<f64> = (0..n).map(|k| -PI + 2.0 * PI * k as f64 / (n - 1) as f64).collect();
    let areas = family_areas(&s, &v, &ts, &q).unwrap();
    let w = s.willmore_energy(&q).unwrap();
    let step = ts[1] - ts[0];
    for pair in areas.windows(2) {
        assert!((pair[1] - pair[0]).abs() <= 4.0 * w * step);
    }
    assert!(areas[0] <= 1e-6 && areas[n - 1] <= 1e-6);
}

#[test]
fn landscape_brackets_for_the_lifted_tube() {
    let q = QuadratureGrid::square(Domain::Torus, 32).unwrap();
    let s = ShapeSpec::tube(2.0, 1.0).lifted().build().unwrap();
    let l = sup_area_landscape(&s, &LandscapeGrid::default(), &q, 2000).unwrap();
    assert!(l.certified);
    assert!(l.sup >= 2.0 * PI * PI - 1e-6 && l.sup <= l.willmore + 1e-6, "{} {}", l.sup, l.willmore);
}

#[test]
fn sweepout_examples() {
    assert_relative_eq!(sweepout_phi1(0.5).unwrap(), 4.0 * PI);
    assert_eq!(sweepout_phi1(0.0).unwrap(), 0.0);
    assert_relative_eq!(sweepout_phi1(0.25).unwrap(), 3.0 * PI, max_relative = 1e-15);
    assert!(sweepout_phi1(1.5).is_err());
    let q = QuadratureGrid::square(Domain::SphereChart, 32).unwrap();
    for k in 1..20 {
        let t = k as f64 / 20.0;
        assert!((sweepout_phi1_quadrature(t, &q).unwrap() - sweepout_phi1(t).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn radial_limit_is_the_tangent_great_sphere() {
    let s = ShapeSpec::clifford().build().unwrap();
    let probe = limit_sphere_probe(&s, &clifford_point(), Approach::Radial, 1e-3).unwrap();
    assert!((probe.sphere.geodesic_radius - PI / 2.0).abs() <= 1e-2);
    let c = probe.sphere.center.coords();
    let d = (c - probe.normal).norm().min((c + probe.normal).norm());
    assert!(d <= 1e-2, "{d}");
}

#[test]
fn angled_limit_is_a_small_sphere_through_the_antipode() {
    let s = ShapeSpec::clifford().build().unwrap();
    let p = clifford_point();
    for theta in [PI / 8.0, PI / 4.0, 3.0 * PI / 8.0] {
        let probe = limit_sphere_probe(&s, &p, Approach::Angled(theta), 1e-3).unwrap();
        let antipode = PointS3::new(-p.coords()).unwrap();
        assert!(probe.sphere.distance_to(&antipode) <= 1e-2);
        assert!((probe.sphere.geodesic_radius - (PI / 2.0 - theta)).abs() <= 1e-2);
        assert!((probe.sphere.geodesic_radius - PI / 2.0).abs() > 0.1);
    }
}

#[test]
fn probe_residual_shrinks_with_delta() {
    let s = ShapeSpec::clifford().build().unwrap();
    let coarse = limit_sphere_probe(&s, &clifford_point(), Approach::Radial, 1e-3).unwrap();
    let fine = limit_sphere_probe(&s, &clifford_point(), Approach::Radial, 1e-4).unwrap();
    assert!(fine.residual < coarse.residual);
    assert!(limit_sphere_probe(&s, &clifford_point(), Approach::Radial, 0.5).is_err());
}

#[test]
fn boundary_limit_is_discontinuous_across_the_surface() {
    let s = ShapeSpec::clifford().build().unwrap();
    let delta = 1e-3;
    let on = clifford_point();
    let off = normal_offset_point(&s, 0.0, 0.0, 0.3).unwrap();
    let area_at = |p: &PointS3| {
        let v = ConformalParam::new(p.coords() * (1.0 - delta)).unwrap();
        pushforward_area(&s, &v, 1e-6).unwrap()
    };
    let (a_on, a_off) = (area_at(&on), area_at(&off));
    assert!(a_on - a_off >= 3.0 * PI, "{a_on} vs {a_off}");
}
