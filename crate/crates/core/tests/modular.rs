//! The modular momentum `<exp(-i p b)>` sees relative phases exactly where
//! the shift lays one packet onto another.

use std::f64::consts::PI;

use abwave::experiment::verify::modular_alpha_derivative;
use abwave::*;
use num_complex::Complex64;

#[test]
fn zero_shift_is_one() {
    for w in [
        make_two_packet(1.0, 0.2, 0.7).unwrap(),
        make_comb(6, 0.8, 0.2, 1.3).unwrap(),
        boosted_tophat(5.0, 2.0).unwrap(),
    ] {
        let v = modular_expectation(&w, 0.0).unwrap().value;
        assert!((v - 1.0).norm() < 1e-14);
    }
}

#[test]
fn two_packet_small_shift_ignores_alpha() {
    let (d, a) = (1.0, 0.25);
    let make = |al: f64| make_two_packet(d, a, al);
    for b in [0.0, 0.05, 0.2, 0.49, -0.3] {
        for al in [0.0, 1.0, PI / 2.0, 3.0] {
            let der = modular_alpha_derivative(make, al, b).unwrap();
            assert!(der < 1e-10, "b={b} alpha={al}: {der:e}");
        }
    }
}

#[test]
fn two_packet_shift_by_separation_carries_the_phase() {
    let (d, a) = (1.0, 0.25);
    let big_d = d + 2.0 * a;
    for al in [0.0, 0.4, PI / 2.0, PI] {
        let w = make_two_packet(d, a, al).unwrap();
        let v = modular_expectation(&w, big_d).unwrap().value;
        // Left packet shifted onto the right one: overlap fraction 1/2.
        let expected = Complex64::from_polar(0.5, -al);
        assert!((v - expected).norm() < 1e-14, "{v} vs {expected}");
        assert!(modular_alpha_derivative(|x| make_two_packet(d, a, x), al, big_d).unwrap() > 0.01);
    }
}

#[test]
fn comb_sensitivity_window() {
    let (n, d, eps, alpha) = (8, 1.0, 0.25, 0.7);
    let l = d + eps;
    let big_l = n as f64 * l;
    let make = |al: f64| make_comb(n, d, eps, al);
    for m in 1..n {
        let b = m as f64 * l;
        assert!(b > eps && b < big_l - eps);
        let der = modular_alpha_derivative(make, alpha, b).unwrap();
        // |d/d alpha ((N - m)/N) exp(-i m alpha)| = m (N - m)/N.
        let expected = (m * (n - m)) as f64 / n as f64;
        assert!((der - expected).abs() < 1e-5, "m={m}: {der} vs {expected}");
    }
    for b in [0.0, 0.1, eps, big_l - eps, big_l, big_l + 2.0, -big_l] {
        assert!(modular_alpha_derivative(make, alpha, b).unwrap() < 1e-10, "b={b}");
    }
}

#[test]
fn modular_values_are_bounded() {
    let w = make_comb(7, 0.9, 0.3, 2.1).unwrap();
    for k in 0..400 {
        let b = -10.0 + k as f64 * 0.05;
        assert!(modular_expectation(&w, b).unwrap().value.norm() <= 1.0 + 1e-12);
    }
}

#[test]
fn sampled_and_piecewise_agree() {
    // On an aligned grid with b a whole number of cells the discrete
    // autocorrelation of midpoint samples is exact.
    let w = make_two_packet(1.0, 0.25, 1.1).unwrap();
    let grid = Grid::for_wave(&w, 1.0 / 64.0, 4.0, 0.0).unwrap();
    let s = sample(&w, &grid).unwrap();
    for m in [0, 3, 20, 64, 96, 100, 150] {
        let b = m as f64 * grid.dx();
        let exact = modular_expectation(&w, b).unwrap().value;
        let spectral = modular_expectation(&s, b).unwrap().value;
        assert!((exact - spectral).norm() < 1e-12, "b={b}: {exact} vs {spectral}");
    }
}

#[test]
fn sampled_overlap_needs_same_grid() {
    let w = make_tophat(1.0).unwrap();
    let g1 = Grid::new(-1.0, 0.01, 400).unwrap();
    let g2 = Grid::new(-1.0, 0.01, 512).unwrap();
    let a = sample(&w, &g1).unwrap();
    let b = sample(&w, &g2).unwrap();
    assert!(matches!(overlap(&a, &b), Err(Error::IncompatibleGrids(_))));
    assert!((overlap(&a, &a).unwrap() - 1.0).norm() < 1e-12);
}

#[test]
fn faulty_program_breaks_the_modular_signature_only() {
    let flat = make_comb(8, 1.0, 0.25, 0.0).unwrap();
    let good = apply_phase_program(&flat, &PhaseProgram::staircase(8, 0.7)).unwrap();
    let bad = apply_phase_program(&flat, &PhaseProgram::staircase(8, 0.7).perturbed(3, 0.5)).unwrap();
    let l = 1.25;
    let signature = |w: &PiecewiseWave, m: usize| modular_expectation(w, m as f64 * l).unwrap().value;
    let expected = |m: usize| Complex64::from_polar((8 - m) as f64 / 8.0, -(m as f64) * 0.7);
    assert!((1..8).all(|m| (signature(&good, m) - expected(m)).norm() < 1e-14));
    assert!((1..8).any(|m| (signature(&bad, m) - expected(m)).norm() > 1e-3));
    // Positions are untouched.
    for x in [0.5, 3.9, 6.3] {
        assert!((bad.eval(x).norm() - good.eval(x).norm()).abs() < 1e-15);
    }
}
