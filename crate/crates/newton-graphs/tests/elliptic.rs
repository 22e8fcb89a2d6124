//! Weierstrass evaluation and sigma-quotient function tests: classical
//! identities as oracles, plus the critical-point machinery.

use newton_graphs::elliptic_core::{
    random_configuration, EllipticError, EllipticFunction, Lattice, ZeroPoleData,
};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tau() -> Complex64 {
    c(0.3, 1.0)
}

fn lattice() -> Lattice {
    Lattice::from_tau(tau()).unwrap()
}

/// Order-2 reference configuration: zeros {1/4, 3tau/4 + 1/2}, poles
/// {1/2, closing point}.
fn fixture_r2() -> EllipticFunction {
    let lat = lattice();
    let data = ZeroPoleData {
        zeros: vec![c(0.25, 0.0), 0.75 * tau() + c(0.5, 0.0)],
        poles: vec![c(0.5, 0.0)],
        auto_close: true,
    };
    EllipticFunction::canonical(&data, lat).unwrap()
}

#[test]
fn sigma_vanishes_at_zero_and_is_odd() {
    let lat = lattice();
    assert_eq!(lat.sigma(c(0.0, 0.0)).norm(), 0.0);
    for k in 1..8 {
        let z = c(0.13 * k as f64, 0.07 * (8 - k) as f64);
        let a = lat.sigma(z);
        let b = lat.sigma(-z);
        assert!((a + b).norm() <= 1e-12 * a.norm(), "sigma must be odd at {z}");
    }
}

#[test]
fn sigma_behaves_like_z_near_zero() {
    let lat = lattice();
    let z = c(1e-3, 1e-3);
    let ratio = lat.sigma(z) / z;
    assert!((ratio - 1.0).norm() < 1e-5);
}

#[test]
fn sigma_quasi_periodicity() {
    let lat = lattice();
    for k in 0..10 {
        let z = c(0.09 * k as f64 + 0.05, 0.11 * k as f64 - 0.4);
        for (omega, eta) in [(lat.omega1(), lat.eta1()), (lat.omega2(), lat.eta2())] {
            let lhs = lat.sigma(z + omega);
            let rhs = -lat.sigma(z) * (eta * (z + omega / 2.0)).exp();
            assert!(
                (lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1e-12),
                "quasi-periodicity failed at {z} for period {omega}"
            );
        }
    }
}

#[test]
fn zeta_is_odd_and_quasi_periodic() {
    let lat = lattice();
    for k in 0..10 {
        let z = c(0.21 + 0.06 * k as f64, 0.17 + 0.05 * k as f64);
        let a = lat.zeta(z).unwrap();
        let b = lat.zeta(-z).unwrap();
        assert!((a + b).norm() <= 1e-10 * a.norm().max(1.0));
        let jump1 = lat.zeta(z + lat.omega1()).unwrap() - a;
        assert!((jump1 - lat.eta1()).norm() <= 1e-10 * lat.eta1().norm());
        let jump2 = lat.zeta(z + lat.omega2()).unwrap() - a;
        assert!((jump2 - lat.eta2()).norm() <= 1e-10 * lat.eta2().norm().max(1.0));
    }
}

#[test]
fn legendre_relation_holds() {
    for t in [tau(), c(0.0, 1.0), c(-0.2, 0.8), c(0.45, 1.7)] {
        let lat = Lattice::from_tau(t).unwrap();
        let legendre = lat.eta1() * lat.omega2() - lat.eta2() * lat.omega1();
        let target = c(0.0, 2.0 * std::f64::consts::PI);
        assert!(
            (legendre - target).norm() <= 1e-10 * target.norm(),
            "Legendre residual too large for tau = {t}"
        );
    }
}

#[test]
fn zeta_rejects_lattice_points() {
    let lat = lattice();
    assert!(matches!(
        lat.zeta(lat.omega1() + lat.omega2()),
        Err(EllipticError::PoleAtLattice)
    ));
}

#[test]
fn canonical_fixture_is_doubly_periodic() {
    let f = fixture_r2();
    let mut worst = 0.0f64;
    for k in 0..20 {
        let z = c(0.05 + 0.043 * k as f64, -0.3 + 0.07 * k as f64);
        if f.distance_to_singularity(z) < 0.05 {
            continue;
        }
        let v = f.eval(z);
        for omega in [f.lattice().omega1(), f.lattice().omega2()] {
            worst = worst.max((f.eval(z + omega) - v).norm() / (1.0 + v.norm()));
        }
    }
    assert!(worst <= 1e-8, "periodicity residual {worst}");
}

#[test]
fn colliding_zero_and_pole_is_rejected() {
    let lat = lattice();
    let data = ZeroPoleData {
        zeros: vec![c(0.5, 0.0), c(0.25, 0.25)],
        poles: vec![c(0.5, 0.0)],
        auto_close: true,
    };
    assert!(matches!(
        EllipticFunction::canonical(&data, lat),
        Err(EllipticError::ZeroPoleCollision(_))
    ));
}

#[test]
fn explicit_pole_sum_mismatch_is_rejected() {
    let lat = lattice();
    let data = ZeroPoleData {
        zeros: vec![c(0.25, 0.0), c(0.6, 0.3)],
        poles: vec![c(0.5, 0.0), c(0.1, 0.55)],
        auto_close: false,
    };
    assert!(matches!(
        EllipticFunction::canonical(&data, lat),
        Err(EllipticError::ConstraintUnsatisfiable(_))
    ));
}

#[test]
fn log_derivative_matches_finite_differences() {
    let f = fixture_r2();
    let h = 1e-5;
    let mut checked = 0;
    let mut k = 0u32;
    while checked < 50 {
        let t1 = 0.5 + 0.45 * (1.37 * f64::from(k)).sin();
        let t2 = 0.5 + 0.45 * (2.11 * f64::from(k)).cos();
        k += 1;
        let z = t1 * f.lattice().omega1() + t2 * f.lattice().omega2();
        if f.distance_to_singularity(z) < 0.05 {
            continue;
        }
        checked += 1;
        let exact = f.log_derivative(z).unwrap();
        let fd = (f.eval(z + c(h, 0.0)) - f.eval(z - c(h, 0.0))) / (2.0 * h * f.eval(z));
        assert!(
            (exact - fd).norm() <= 1e-6 * exact.norm().max(1.0),
            "finite-difference mismatch at {z}: {exact} vs {fd}"
        );
    }
}

#[test]
fn log_derivative_of_reciprocal_is_negated() {
    let f = fixture_r2();
    let g = f.reciprocal();
    let z = c(0.37, 0.41);
    let a = f.log_derivative(z).unwrap();
    let b = g.log_derivative(z).unwrap();
    assert!((a + b).norm() <= 1e-12 * a.norm().max(1.0));
}

#[test]
fn log_derivative_rejects_near_singular_points() {
    let f = fixture_r2();
    let z = f.zeros()[0] + c(1e-10, 0.0);
    assert!(matches!(
        f.log_derivative(z),
        Err(EllipticError::TooCloseToSingularity)
    ));
}

#[test]
fn residue_at_a_zero_is_one() {
    let f = fixture_r2();
    let center = f.zeros()[0];
    let radius = 0.02;
    let n = 512;
    let mut integral = c(0.0, 0.0);
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let offset = Complex64::from_polar(radius, theta);
        let dz = Complex64::i() * offset * (2.0 * std::f64::consts::PI / n as f64);
        integral += f.log_derivative(center + offset).unwrap() * dz;
    }
    let target = c(0.0, 2.0 * std::f64::consts::PI);
    assert!(
        (integral - target).norm() < 1e-4,
        "residue integral {integral} should be 2*pi*i"
    );
}

#[test]
fn cell_contour_integral_of_log_derivative_vanishes() {
    // As many zeros as poles inside the cell: the boundary integral of
    // f'/f (offset so no singularity sits on the contour) is zero.
    let f = fixture_r2();
    let lat = f.lattice();
    let base = c(-0.131, -0.177);
    let n = 3000;
    let mut integral = c(0.0, 0.0);
    let legs = [
        (base, lat.omega1()),
        (base + lat.omega1(), lat.omega2()),
        (base + lat.omega1() + lat.omega2(), -lat.omega1()),
        (base + lat.omega2(), -lat.omega2()),
    ];
    for (start, step) in legs {
        for k in 0..n {
            let z = start + step * ((k as f64 + 0.5) / n as f64);
            integral += f.log_derivative(z).unwrap() * step / n as f64;
        }
    }
    assert!(
        integral.norm() < 1e-3,
        "cell contour integral should vanish, got {integral}"
    );
}

#[test]
fn critical_points_of_order_two_fixture() {
    let f = fixture_r2();
    let crit = f.critical_points().unwrap();
    assert_eq!(crit.points.len(), 4);
    // Residual of f' at each point and pairwise separation.
    for (i, &p) in crit.points.iter().enumerate() {
        let l = f.log_derivative(p).unwrap();
        let fp = (l * f.eval(p)).norm();
        assert!(fp <= 1e-10, "f' residual {fp} at critical point {i}");
        for &q in &crit.points[..i] {
            assert!(f.lattice().min_image_distance(p, q) > 1e-6);
        }
    }
    // Values pair up under the order-2 involution z -> s - z, which fixes
    // f; generically the two pairs sit at different moduli.
    let mut logs: Vec<f64> = crit.values.iter().map(|v| v.norm().ln()).collect();
    logs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((logs[1] - logs[0]).abs() < 1e-9);
    assert!((logs[3] - logs[2]).abs() < 1e-9);
}

fn log_modulus_spread(f: &EllipticFunction) -> f64 {
    let crit = f.critical_points().unwrap();
    let logs: Vec<f64> = crit.values.iter().map(|v| v.norm().ln()).collect();
    logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - logs.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Order-2 configuration whose critical values all share one modulus: the
/// half-shifted pattern on the 45-degree-rotated square lattice.
fn equal_modulus_r2() -> EllipticFunction {
    let tau = c(0.5, 0.5);
    let lat = Lattice::from_tau(tau).unwrap();
    EllipticFunction::canonical(
        &ZeroPoleData {
            zeros: vec![c(0.0, 0.0), c(0.5, 0.0)],
            poles: vec![0.5 * tau],
            auto_close: true,
        },
        lat,
    )
    .unwrap()
}

/// Order-3 configuration with one critical modulus: the third-shifted
/// pattern on a flat rhombic lattice, inside the open parameter region
/// where the reflection `z -> -conj(z)` swaps the two saddle orbits.
fn equal_modulus_r3() -> EllipticFunction {
    let tau = c(0.5, 0.25);
    let lat = Lattice::from_tau(tau).unwrap();
    EllipticFunction::canonical(
        &ZeroPoleData {
            zeros: vec![c(0.0, 0.0), c(1.0 / 3.0, 0.0), c(2.0 / 3.0, 0.0)],
            poles: vec![2.0 * tau / 3.0, 2.0 * tau / 3.0 + c(1.0 / 3.0, 0.0)],
            auto_close: true,
        },
        lat,
    )
    .unwrap()
}

#[test]
fn symmetric_fixtures_have_one_critical_modulus() {
    let f2 = equal_modulus_r2();
    assert_eq!(f2.critical_points().unwrap().points.len(), 4);
    let s2 = log_modulus_spread(&f2);
    assert!(s2 <= 1e-6, "order-2 spread {s2}");
    let f3 = equal_modulus_r3();
    assert_eq!(f3.critical_points().unwrap().points.len(), 6);
    let s3 = log_modulus_spread(&f3);
    assert!(s3 <= 1e-6, "order-3 spread {s3}");
}

#[test]
fn critical_points_move_continuously_under_perturbation() {
    let f = fixture_r2();
    let crit = f.critical_points().unwrap();
    let lat = lattice();
    let data = ZeroPoleData {
        zeros: vec![c(0.251, 0.0), 0.75 * tau() + c(0.5, 0.0)],
        poles: vec![c(0.5, 0.0)],
        auto_close: true,
    };
    let g = EllipticFunction::canonical(&data, lat).unwrap();
    let crit_g = g.critical_points().unwrap();
    assert_eq!(crit_g.points.len(), 4);
    for &p in &crit.points {
        let moved = crit_g
            .points
            .iter()
            .map(|&q| f.lattice().min_image_distance(p, q))
            .fold(f64::INFINITY, f64::min);
        assert!(moved <= 1e-2, "critical point moved by {moved}");
    }
}

#[test]
fn critical_points_are_translation_invariant() {
    let lat = lattice();
    let shift = lat.omega1() + lat.omega2();
    let data = ZeroPoleData {
        zeros: vec![c(0.25, 0.0) + shift, 0.75 * tau() + c(0.5, 0.0) + shift],
        poles: vec![c(0.5, 0.0) + shift],
        auto_close: true,
    };
    let g = EllipticFunction::canonical(&data, lat).unwrap();
    let a = fixture_r2().critical_points().unwrap();
    let b = g.critical_points().unwrap();
    assert_eq!(a.points.len(), b.points.len());
    for (&p, &q) in a.points.iter().zip(&b.points) {
        assert!(g.lattice().min_image_distance(p, q) <= 1e-8);
    }
}

#[test]
fn normalization_brings_critical_modulus_to_one() {
    // Generic data: the geometric mean of the critical moduli becomes 1.
    let f = fixture_r2().with_scale(c(3.7, -1.2)).unwrap();
    let (g, modulus) = f.normalized().unwrap();
    assert!(modulus > 0.0);
    let crit = g.critical_points().unwrap();
    let mean: f64 = crit.values.iter().map(|v| v.norm().ln()).sum::<f64>() / 4.0;
    assert!(mean.abs() < 1e-8);
    // Equal-modulus data: every critical value lands on the unit circle.
    let (h, _) = equal_modulus_r2().with_scale(c(2.0, 1.0)).unwrap().normalized().unwrap();
    for v in &h.critical_points().unwrap().values {
        assert!((v.norm() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn random_configurations_are_valid_and_distinct() {
    let lat = lattice();
    for seed in 0..5u64 {
        let data = random_configuration(2, seed, &lat);
        let f = EllipticFunction::canonical(&data, lat.clone()).unwrap();
        assert_eq!(f.order(), 2);
    }
    let a = random_configuration(3, 1, &lat);
    let b = random_configuration(3, 2, &lat);
    assert!((a.zeros[0] - b.zeros[0]).norm() > 1e-6);
}

#[test]
fn function_spec_round_trips() {
    let f = fixture_r2();
    let text = newton_graphs::elliptic_core::function_to_json(&f);
    let g = newton_graphs::elliptic_core::function_from_json(&text).unwrap();
    assert_eq!(f.order(), g.order());
    for (&a, &b) in f.zeros().iter().zip(g.zeros()) {
        assert!((a - b).norm() < 1e-12);
    }
    let auto_text = r#"{
        "tau": [0.3, 1.0],
        "zeros": [[0.25, 0.0], [0.725, 0.75]],
        "poles": [[0.5, 0.0], "auto"],
        "scale": [1.0, 0.0]
    }"#;
    let h = newton_graphs::elliptic_core::function_from_json(auto_text).unwrap();
    assert_eq!(h.order(), 2);
}
