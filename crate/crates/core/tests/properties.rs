use std::f64::consts::PI;

use abwave::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn two_packet_args() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.05f64..10.0, 0.001f64..3.0, -10.0f64..10.0)
}

fn comb_args() -> impl Strategy<Value = (usize, f64, f64, f64)> {
    (1usize..60, 0.05f64..5.0, 0.0f64..2.0, -7.0f64..7.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn constructors_are_normalized((d, a, alpha) in two_packet_args(), (n, dc, eps, beta) in comb_args()) {
        prop_assert!((make_tophat(d).unwrap().norm() - 1.0).abs() < 1e-12);
        prop_assert!((make_two_packet(d, a, alpha).unwrap().norm() - 1.0).abs() < 1e-12);
        prop_assert!((make_comb(n, dc, eps, beta).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_programs_keep_position_density(
        (n, d, eps, alpha) in comb_args(),
        phases in prop::collection::vec(-10.0f64..10.0, 60),
        probes in prop::collection::vec(0.0f64..1.0, 16),
    ) {
        let w = make_comb(n, d, eps, alpha).unwrap();
        let prog = PhaseProgram::new(phases[..n].to_vec());
        let v = apply_phase_program(&w, &prog).unwrap();
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        let (lo, hi) = w.support();
        for u in probes {
            let x = lo + u * (hi - lo);
            prop_assert!((v.eval(x).norm() - w.eval(x).norm()).abs() < 1e-14);
        }
        for (a, b) in w.segments().iter().zip(v.segments()) {
            prop_assert_eq!(a.start(), b.start());
            prop_assert_eq!(a.width(), b.width());
        }
    }

    #[test]
    fn phase_programs_compose(
        (n, d, eps, alpha) in comb_args(),
        p1 in prop::collection::vec(-5.0f64..5.0, 60),
        p2 in prop::collection::vec(-5.0f64..5.0, 60),
    ) {
        let w = make_comb(n, d, eps, alpha).unwrap();
        let a = PhaseProgram::new(p1[..n].to_vec());
        let b = PhaseProgram::new(p2[..n].to_vec());
        let twice = apply_phase_program(&apply_phase_program(&w, &a).unwrap(), &b).unwrap();
        let once = apply_phase_program(&w, &a.compose(&b).unwrap()).unwrap();
        for (x, y) in twice.segments().iter().zip(once.segments()) {
            prop_assert!((x.amplitude() - y.amplitude()).norm() < 1e-14);
        }
    }

    #[test]
    fn staircase_program_builds_the_comb((n, d, eps, alpha) in comb_args()) {
        let flat = make_comb(n, d, eps, 0.0).unwrap();
        let stair = apply_phase_program(&flat, &PhaseProgram::staircase(n, alpha)).unwrap();
        let direct = make_comb(n, d, eps, alpha).unwrap();
        for (x, y) in stair.segments().iter().zip(direct.segments()) {
            prop_assert!((x.amplitude() - y.amplitude()).norm() < 1e-13);
        }
    }

    #[test]
    fn relative_program_builds_the_two_packet_state((d, a, alpha) in two_packet_args()) {
        let base = make_two_packet(d, a, 0.0).unwrap();
        let v = apply_phase_program(&base, &PhaseProgram::relative(alpha)).unwrap();
        prop_assert_eq!(v, make_two_packet(d, a, alpha).unwrap());
    }

    #[test]
    fn wrong_program_length_is_rejected((n, d, eps, alpha) in comb_args()) {
        let w = make_comb(n, d, eps, alpha).unwrap();
        let short = PhaseProgram::zeros(n + 1);
        prop_assert!(
            matches!(
                apply_phase_program(&w, &short),
                Err(Error::LengthMismatch { .. })
            ),
            "expected a length mismatch"
        );
    }

    #[test]
    fn zero_alpha_two_packet_is_real_and_even((d, a, _alpha) in two_packet_args(), u in 0.0f64..1.0) {
        let w = make_two_packet(d, a, 0.0).unwrap();
        prop_assert!(w.is_real());
        // Even about 0 up to the half-open edge convention.
        let x = a + u * d;
        if x > a && x < a + d {
            prop_assert_eq!(w.eval(x), w.eval(-x));
        }
    }

    #[test]
    fn momentum_density_is_nonnegative_and_bounded((d, a, alpha) in two_packet_args(), p in -200.0f64..200.0) {
        let w = make_two_packet(d, a, alpha).unwrap();
        let v = momentum_density(&w, p);
        prop_assert!(v >= 0.0);
        // |amp|^2 <= (sum_k |a_k| w_k)^2 / (2 pi).
        prop_assert!(v <= 2.0 * d / (2.0 * PI) * (1.0 + 1e-12));
        let analytic = analytic_density_two_packet(d, d + 2.0 * a, alpha, p);
        prop_assert!((v - analytic).abs() <= 1e-12 * d.max(1.0));
    }

    #[test]
    fn overlaps_and_modular_values_bounded(
        (n, d, eps, alpha) in comb_args(),
        (d2, a2, alpha2) in two_packet_args(),
        b in -50.0f64..50.0,
    ) {
        let w = make_comb(n, d, eps, alpha).unwrap();
        let v = make_two_packet(d2, a2, alpha2).unwrap();
        prop_assert!(overlap(&w, &v).unwrap().norm() <= 1.0 + 1e-12);
        prop_assert!((overlap(&w, &w).unwrap() - 1.0).norm() < 1e-12);
        prop_assert!(modular_expectation(&w, b).unwrap().value.norm() <= 1.0 + 1e-12);
        // <exp(-i p b)> is the conjugate of <exp(i p b)>.
        let plus = modular_expectation(&w, b).unwrap().value;
        let minus = modular_expectation(&w, -b).unwrap().value;
        prop_assert!((plus - minus.conj()).norm() < 1e-12);
    }

    #[test]
    fn boosted_overlap_closed_form_matches(
        n in 1usize..80,
        l in 0.05f64..3.0,
        xi in 0.0f64..0.5,
        p0 in -4.0f64..4.0,
    ) {
        let d = l * (1.0 - xi);
        let psi = make_comb(n, d, l - d, p0 * l).unwrap();
        let phi = boosted_tophat(n as f64 * l, p0).unwrap();
        let got = overlap(&phi, &psi).unwrap();
        let closed = boosted_overlap_closed_form(n, l, d, p0).unwrap();
        prop_assert!((got - closed).norm() < 1e-12, "{} vs {}", got, closed);
        let flat = overlap(&make_tophat(n as f64 * l).unwrap(), &make_comb(n, d, l - d, 0.0).unwrap()).unwrap();
        prop_assert!((flat - Complex64::new((1.0 - xi).sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn modular_expectation_ignores_alpha_below_the_gap((d, a, alpha) in two_packet_args(), u in 0.0f64..1.0) {
        let b = u * 2.0 * a;
        let v0 = modular_expectation(&make_two_packet(d, a, 0.0).unwrap(), b).unwrap().value;
        let v1 = modular_expectation(&make_two_packet(d, a, alpha).unwrap(), b).unwrap().value;
        prop_assert!((v0 - v1).norm() < 1e-12);
    }

    #[test]
    fn sampling_preserves_norm_and_parseval(
        (d, a, alpha) in (0.5f64..3.0, 0.05f64..1.0, -4.0f64..4.0),
        div in 64.0f64..200.0,
    ) {
        let w = make_two_packet(d, a, alpha).unwrap();
        let grid = Grid::for_wave(&w, d / div, 3.0, 0.0).unwrap();
        let s = sample(&w, &grid).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-9);
        let total = fft_momentum_density(&s).unwrap().riemann();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn free_evolution_is_unitary(t in -3.0f64..3.0, m in 0.3f64..3.0, c in -2.0f64..2.0) {
        let grid = Grid::new(-60.0, 0.03, 4096).unwrap();
        let g = SampledWave::from_fn(&grid, Regularity::Smooth { scale: 0.7 }, |x| {
            Complex64::from_polar((-(x - c) * (x - c) / (4.0 * 0.49)).exp(), 0.8 * x)
        })
        .unwrap();
        let e = free_evolve(&g, PropagationSpec::new(t, m).unwrap()).unwrap();
        prop_assert!((e.norm() - 1.0).abs() < 1e-9);
        let drift = fft_momentum_density(&g).unwrap().max_abs_diff(&fft_momentum_density(&e).unwrap()).unwrap();
        prop_assert!(drift < 1e-9);
    }
}

#[test]
fn overlap_grows_along_the_refinement_family() {
    // Fixed L and p0; N doubles, so both xi and l/lambda shrink.
    let (big_l, p0) = (20.0 * PI, 1.0);
    let mut last = 0.0;
    for (n, xi) in [(10, 0.08), (20, 0.04), (40, 0.02), (80, 0.01), (160, 0.005)] {
        let l = big_l / n as f64;
        let d = l * (1.0 - xi);
        let psi = make_comb(n, d, l - d, p0 * l).unwrap();
        let v = overlap(&boosted_tophat(big_l, p0).unwrap(), &psi).unwrap().norm();
        assert!(v > last, "N={n}: {v} <= {last}");
        last = v;
    }
    assert!(last > 0.99);
}
