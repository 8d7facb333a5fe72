//! Free propagation against analytic Gaussians and the two-packet story.

use std::f64::consts::PI;

use abwave::experiment::runs::shared_mass;
use abwave::*;
use num_complex::Complex64;

/// Free Gaussian of initial width `s` centred at `c`, at time `t`.
fn gaussian_at(s: f64, c: f64, m: f64, t: f64, x: f64) -> Complex64 {
    let tau = Complex64::new(1.0, t / (2.0 * m * s * s));
    let norm = (2.0 * PI * s * s).powf(-0.25);
    norm / tau.sqrt() * (-(x - c) * (x - c) / (4.0 * s * s * tau)).exp()
}

fn gaussian_wave(grid: &Grid, s: f64, c: f64) -> SampledWave {
    SampledWave::from_fn(grid, Regularity::Smooth { scale: s }, |x| gaussian_at(s, c, 1.0, 0.0, x)).unwrap()
}

fn max_diff(a: &SampledWave, b: &SampledWave) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[test]
fn gaussian_spreads_at_the_analytic_rate() {
    let grid = Grid::new(-80.0, 0.02, 8192).unwrap();
    for (s, m) in [(0.5, 1.0), (1.0, 2.5), (0.3, 0.7)] {
        let g = gaussian_wave(&grid, s, 0.0);
        for t in [0.0, 0.4, 3.0] {
            let e = free_evolve(&g, PropagationSpec::new(t, m).unwrap()).unwrap();
            let width = (s * s + (t / (2.0 * m * s)).powi(2)).sqrt();
            let rho = position_density(&e);
            for (i, v) in rho.values().iter().enumerate() {
                let x = rho.abscissa(i);
                let exact = (-(x * x) / (2.0 * width * width)).exp() / (width * (2.0 * PI).sqrt());
                assert!((v - exact).abs() < 1e-8, "s={s} t={t} x={x}");
            }
            // The complex amplitude too, not only the density.
            for i in (0..e.len()).step_by(97) {
                let exact = gaussian_at(s, 0.0, m, t, e.x(i));
                assert!((e.samples()[i] - exact).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn zero_time_is_identity() {
    let w = make_two_packet(1.0, 0.25, 1.0).unwrap();
    let grid = Grid::for_wave(&w, 0.1 / 32.0, 8.0, 0.0).unwrap();
    let s = smooth_edges(&w, 0.1, &grid).unwrap();
    let e = free_evolve(&s, PropagationSpec::at(0.0).unwrap()).unwrap();
    assert!(max_diff(&s, &e) < 1e-12);
}

#[test]
fn evolution_composes() {
    let grid = Grid::new(-60.0, 0.03, 4096).unwrap();
    let g = gaussian_wave(&grid, 0.6, 3.0);
    let m = 1.7;
    let step = |w: &SampledWave, t: f64| free_evolve(w, PropagationSpec::new(t, m).unwrap()).unwrap();
    let direct = step(&g, 4.0);
    let split = step(&step(&g, 1.5), 2.5);
    assert!(max_diff(&direct, &split) < 1e-9);
    let back = step(&direct, -4.0);
    assert!(max_diff(&back, &g) < 1e-9);
}

#[test]
fn aliasing_is_rejected() {
    let grid = Grid::new(-10.0, 0.02, 1024).unwrap();
    let g = gaussian_wave(&grid, 0.3, 0.0);
    assert!(free_evolve(&g, PropagationSpec::at(0.01).unwrap()).is_ok());
    assert!(matches!(
        free_evolve(&g, PropagationSpec::at(20.0).unwrap()),
        Err(Error::Aliasing { .. })
    ));
}

struct TwoPacketRun {
    left: SampledWave,
    right: SampledWave,
    grid: Grid,
}

fn two_packet_run(t: f64) -> TwoPacketRun {
    let (d, a, sigma) = (1.0, 0.25, 0.1);
    let w = make_two_packet(d, a, 0.0).unwrap();
    let spec = PropagationSpec::at(t).unwrap();
    let grid = evolution_grid(&w, sigma, sigma / 32.0, spec).unwrap();
    let one = |k: usize| {
        let single = PiecewiseWave::normalized(vec![w.segments()[k]]).unwrap();
        free_evolve(&smooth_edges(&single, sigma, &grid).unwrap(), spec).unwrap()
    };
    TwoPacketRun {
        left: one(0),
        right: one(1),
        grid,
    }
}

fn evolved_pair(alpha: f64, t: f64, grid: &Grid) -> (SampledWave, SampledWave) {
    let w = make_two_packet(1.0, 0.25, alpha).unwrap();
    let s = smooth_edges(&w, 0.1, grid).unwrap();
    let e = free_evolve(&s, PropagationSpec::at(t).unwrap()).unwrap();
    (s, e)
}

#[test]
fn superposition_and_momentum_invariance() {
    let t = 0.3;
    let run = two_packet_run(t);
    for alpha in [0.0, 1.0, PI] {
        let (s, e) = evolved_pair(alpha, t, &run.grid);
        let phase = Complex64::cis(alpha);
        let sum: Vec<Complex64> = run
            .left
            .samples()
            .iter()
            .zip(run.right.samples())
            .map(|(l, r)| (l + phase * r) / 2f64.sqrt())
            .collect();
        let worst = e
            .samples()
            .iter()
            .zip(&sum)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst:e}");
        assert!((e.norm() - 1.0).abs() < 1e-9);
        let drift = fft_momentum_density(&s)
            .unwrap()
            .max_abs_diff(&fft_momentum_density(&e).unwrap())
            .unwrap();
        assert!(drift < 1e-9, "{drift:e}");
    }
}

#[test]
fn position_density_ignores_alpha_until_overlap() {
    let t = 0.3;
    let run = two_packet_run(t);
    let (s0, e0) = evolved_pair(0.0, t, &run.grid);
    let (s1, e1) = evolved_pair(PI, t, &run.grid);
    let before = position_density(&s0).l1_distance(&position_density(&s1)).unwrap();
    assert!(before < 1e-12);
    assert!(position_density(&s0).max_abs_diff(&position_density(&s1)).unwrap() < 1e-12);
    assert!(shared_mass(&run.left, &run.right) >= 0.1);
    let after = position_density(&e0).l1_distance(&position_density(&e1)).unwrap();
    assert!(after > 0.05, "{after}");
    assert!((position_density(&e0).trapezoid() - 1.0).abs() < 1e-9);
}

#[test]
fn fringes_shift_by_half_a_period() {
    // rho_0 + rho_pi is the fringe-free sum, so the two fringe patterns are
    // exact negatives of each other.
    let t = 0.3;
    let run = two_packet_run(t);
    let (_, e0) = evolved_pair(0.0, t, &run.grid);
    let (_, e1) = evolved_pair(PI, t, &run.grid);
    let r0 = position_density(&e0);
    let r1 = position_density(&e1);
    let mut fringe_size: f64 = 0.0;
    for i in 0..r0.len() {
        let background = 0.5 * (run.left.samples()[i].norm_sqr() + run.right.samples()[i].norm_sqr());
        let f0 = r0.values()[i] - background;
        let f1 = r1.values()[i] - background;
        assert!((f0 + f1).abs() < 1e-12);
        fringe_size = fringe_size.max(f0.abs());
    }
    assert!(fringe_size > 0.01);
}

#[test]
fn two_gaussian_fringe_period() {
    // Gaussians at +-D/2: the interference term oscillates with period
    // 4 pi s^2 (1 + tau^2) / (D tau), tau = t/(2 m s^2), which tends to
    // 2 pi t / (m D) in the far field.
    let (s, big_d, m, t) = (0.4, 3.0, 1.0, 2.0);
    let grid = Grid::new(-100.0, 0.02, 10000).unwrap();
    let make = |alpha: f64| {
        SampledWave::from_fn(&grid, Regularity::Smooth { scale: s }, |x| {
            gaussian_at(s, -big_d / 2.0, 1.0, 0.0, x) + Complex64::cis(alpha) * gaussian_at(s, big_d / 2.0, 1.0, 0.0, x)
        })
        .unwrap()
    };
    let spec = PropagationSpec::new(t, m).unwrap();
    let e0 = free_evolve(&make(0.0), spec).unwrap();
    let e1 = free_evolve(&make(PI), spec).unwrap();
    let norm0 = 2.0 * (1.0 + (-(big_d * big_d) / (8.0 * s * s)).exp());
    let norm1 = 2.0 * (1.0 - (-(big_d * big_d) / (8.0 * s * s)).exp());
    for i in (0..e0.len()).step_by(7) {
        let x = e0.x(i);
        let l = gaussian_at(s, -big_d / 2.0, m, t, x);
        let r = gaussian_at(s, big_d / 2.0, m, t, x);
        assert!((e0.samples()[i] - (l + r) / norm0.sqrt()).norm() < 1e-8);
        assert!((e1.samples()[i] - (l - r) / norm1.sqrt()).norm() < 1e-8);
    }
    let tau = t / (2.0 * m * s * s);
    let period = 4.0 * PI * s * s * (1.0 + tau * tau) / (big_d * tau);
    // Phase of psi_L^* psi_R advances by 2 pi per period.
    let phase = |x: f64| (gaussian_at(s, -big_d / 2.0, m, t, x).conj() * gaussian_at(s, big_d / 2.0, m, t, x)).arg();
    let shift = (phase(0.0) - phase(period / 2.0)).rem_euclid(2.0 * PI);
    assert!((shift - PI).abs() < 1e-9);
    // alpha = 0 has a bright fringe at x = 0 where alpha = pi is dark.
    let mid = grid.len() / 2;
    let rho0 = position_density(&e0);
    let rho1 = position_density(&e1);
    let x_mid = rho0.abscissa(mid);
    assert!(x_mid.abs() < grid.dx());
    assert!(rho0.values()[mid] > 10.0 * rho1.values()[mid]);
    let far = 2.0 * PI * t / (m * big_d);
    assert!((period - far).abs() / far < 0.1);
}
