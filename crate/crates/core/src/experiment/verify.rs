//! The invariant suite behind the `verify` verb.
//!
//! Each item is a named pass/fail check computed on small, fixed states, so
//! the whole suite runs in a few seconds. With `fault` set, one packet phase
//! of the comb test state is nudged: the moment checks must keep passing and
//! the modular check must catch it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::evolution::{evolution_grid, free_evolve, position_density, PropagationSpec};
use crate::spectral::{
    boosted_overlap_closed_form, fft_momentum_amplitude, fft_momentum_density, modular_expectation,
    moment, momentum_density, oracle_step, overlap, MomentEstimate, MAX_MOMENT_ORDER,
};
use crate::wavefunctions::{
    apply_phase_program, boosted_tophat, make_comb, make_tophat, make_two_packet, sample,
    smooth_edges, Grid, PhaseProgram, PiecewiseWave, Regularity, SampledWave,
};

use super::config::{ExperimentConfig, ExperimentKind};
use super::result::{Check, RunResult};
use super::runs::{shared_mass, EXACT_TOL, FRINGE_L1, ORACLE_BIAS, ORACLE_TOL, OVERLAP_FRACTION, UNITARITY_TOL};

/// Relative tolerance for moment agreement.
pub const MOMENT_TOL: f64 = 1e-6;
/// Minimum L1 change of the momentum density under the phase.
pub const DISTRIBUTION_CHANGE_L1: f64 = 0.2;
/// Bound on `|d/d alpha <exp(-i p b)>|` where the shift cannot connect packets.
pub const INSENSITIVE_TOL: f64 = 1e-10;
/// Lower bound on the same derivative where it does.
pub const SENSITIVE_MIN: f64 = 0.01;
pub const GAUSSIAN_TOL: f64 = 1e-8;

/// Packet index and size of the phase nudge applied in fault mode.
pub const FAULT_INDEX: usize = 3;
pub const FAULT_DELTA: f64 = 0.5;

// Smoothed two-packet test state.
const TP_D: f64 = 1.0;
const TP_A: f64 = 0.25;
const SIGMA: f64 = 0.1;
// Comb test state.
const COMB_N: usize = 8;
const COMB_D: f64 = 1.0;
const COMB_EPS: f64 = 0.25;
const COMB_ALPHA: f64 = 0.7;

const ALPHAS: [f64; 4] = [0.0, PI / 4.0, PI / 2.0, PI];
const FD_STEP: f64 = 1e-3;

/// Central difference in `alpha` of the modular expectation at shift `b`.
pub fn modular_alpha_derivative(
    make: impl Fn(f64) -> Result<PiecewiseWave>,
    alpha: f64,
    b: f64,
) -> Result<f64> {
    let plus = modular_expectation(&make(alpha + FD_STEP)?, b)?.value;
    let minus = modular_expectation(&make(alpha - FD_STEP)?, b)?.value;
    Ok((plus - minus).norm() / (2.0 * FD_STEP))
}

fn moments(w: &SampledWave) -> Result<Vec<MomentEstimate>> {
    (0..=MAX_MOMENT_ORDER).map(|n| moment(w, n)).collect()
}

/// Largest relative moment difference over orders `1..=4`.
fn worst_moment_gap(a: &[MomentEstimate], b: &[MomentEstimate]) -> f64 {
    a.iter()
        .zip(b)
        .skip(1)
        .map(|(x, y)| x.relative_difference(y))
        .fold(0.0, f64::max)
}

/// Phase program of the comb test state, nudged in fault mode.
pub fn comb_program(fault: bool) -> PhaseProgram {
    let prog = PhaseProgram::staircase(COMB_N, COMB_ALPHA);
    if fault {
        prog.perturbed(FAULT_INDEX, FAULT_DELTA)
    } else {
        prog
    }
}

fn smoothing_grid(w: &PiecewiseWave) -> Result<Grid> {
    let (lo, hi) = w.support();
    Grid::for_wave(w, SIGMA / 128.0, 4.0, hi - lo + 12.0 * SIGMA)
}

/// Analytic Gaussian `(2 pi s^2)^(-1/4) exp(-(x-c)^2/(4 s^2) + i k x)` and
/// its momentum amplitude.
fn gaussian(s: f64, c: f64, k: f64, x: f64) -> Complex64 {
    let norm = (2.0 * PI * s * s).powf(-0.25);
    Complex64::from_polar(norm * (-(x - c).powi(2) / (4.0 * s * s)).exp(), k * x)
}

fn gaussian_amplitude(s: f64, c: f64, k: f64, p: f64) -> Complex64 {
    let q = p - k;
    let mag = (2.0 * s * s / PI).powf(0.25) * (-(s * s) * q * q).exp();
    Complex64::from_polar(mag, -q * c)
}

fn parseval_gap(w: &SampledWave) -> Result<f64> {
    Ok((w.norm() - fft_momentum_density(w)?.riemann()).abs())
}

fn check_moments(r: &mut RunResult) -> Result<()> {
    let grid = smoothing_grid(&make_two_packet(TP_D, TP_A, 0.0)?)?;
    let sampled: Vec<SampledWave> = ALPHAS
        .iter()
        .map(|&al| smooth_edges(&make_two_packet(TP_D, TP_A, al)?, SIGMA, &grid))
        .collect::<Result<_>>()?;
    let m: Vec<Vec<MomentEstimate>> = sampled.iter().map(moments).collect::<Result<_>>()?;
    let gap = m[1..]
        .iter()
        .map(|mi| worst_moment_gap(&m[0], mi))
        .fold(0.0, f64::max);
    r.metric("moment_gap_two_packet", gap);
    let zeroth = m
        .iter()
        .map(|mi| (mi[0].value - 1.0).abs())
        .fold(0.0, f64::max);
    r.metric("moment_zero_error", zeroth);
    r.check(Check::at_most("moment_order_zero", zeroth, UNITARITY_TOL));
    r.check(Check::at_most("moment_invariance_two_packet", gap, MOMENT_TOL));

    // Same states: the density moves while the moments stay.
    let p0 = fft_momentum_density(&sampled[0])?;
    let p_half = fft_momentum_density(&sampled[2])?;
    let l1 = p0.l1_distance(&p_half)?;
    let max_p = p0.values().iter().cloned().fold(0.0, f64::max);
    let max_change = p0.max_abs_diff(&p_half)?;
    r.metric("l1_change_two_packet", l1);
    r.metric("max_change_over_peak", max_change / max_p);
    r.check(Check::new(
        "change_without_moment_change",
        l1 > DISTRIBUTION_CHANGE_L1 && max_change > 0.1 * max_p && gap <= MOMENT_TOL,
        format!("L1 {l1:e} > {DISTRIBUTION_CHANGE_L1:e}, max change {:e} of peak, moment gap {gap:e}", max_change / max_p),
    ));

    let flat = make_comb(COMB_N, COMB_D, COMB_EPS, 0.0)?;
    let phased = apply_phase_program(&flat, &comb_program(r.config.fault))?;
    let grid = smoothing_grid(&flat)?;
    let mf = moments(&smooth_edges(&flat, SIGMA, &grid)?)?;
    let mp = moments(&smooth_edges(&phased, SIGMA, &grid)?)?;
    let gap = worst_moment_gap(&mf, &mp);
    r.metric("moment_gap_comb", gap);
    r.check(Check::at_most("moment_invariance_comb", gap, MOMENT_TOL));
    Ok(())
}

fn check_modular(r: &mut RunResult) -> Result<()> {
    let two = |al: f64| make_two_packet(TP_D, TP_A, al);
    let big_d = TP_D + 2.0 * TP_A;
    let small = [0.0, 0.1, 0.3, 0.45]
        .iter()
        .map(|&b| modular_alpha_derivative(two, PI / 2.0, b))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let at_d = modular_alpha_derivative(two, PI / 2.0, big_d)?;
    r.metric("modular_derivative_small_shift", small);
    r.metric("modular_derivative_at_D", at_d);
    r.check(Check::at_most("modular_insensitive_small_shift", small, INSENSITIVE_TOL));
    r.check(Check::above("modular_sensitive_at_D", at_d, SENSITIVE_MIN));

    let comb = |al: f64| make_comb(COMB_N, COMB_D, COMB_EPS, al);
    let l = COMB_D + COMB_EPS;
    let big_l = COMB_N as f64 * l;
    let inside = (1..COMB_N)
        .map(|m| modular_alpha_derivative(comb, COMB_ALPHA, m as f64 * l))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let outside = [0.0, 0.1, 0.2, big_l - COMB_EPS, big_l - 0.1, big_l + 1.0]
        .iter()
        .map(|&b| modular_alpha_derivative(comb, COMB_ALPHA, b))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    r.metric("modular_comb_min_inside", inside);
    r.metric("modular_comb_max_outside", outside);
    r.check(Check::above("modular_comb_sensitive_inside", inside, SENSITIVE_MIN));
    r.check(Check::at_most("modular_comb_insensitive_outside", outside, INSENSITIVE_TOL));

    // The test state must show the staircase's modular signature exactly.
    let state = apply_phase_program(&comb(0.0)?, &comb_program(r.config.fault))?;
    let mismatch = (1..COMB_N)
        .map(|m| {
            let expected = Complex64::from_polar(
                (COMB_N - m) as f64 / COMB_N as f64,
                -(m as f64) * COMB_ALPHA,
            );
            Ok((modular_expectation(&state, m as f64 * l)?.value - expected).norm())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    r.metric("modular_signature_mismatch", mismatch);
    r.check(Check::at_most("modular_signature", mismatch, EXACT_TOL));
    Ok(())
}

fn check_oracles(r: &mut RunResult) -> Result<()> {
    let states: [(&str, PiecewiseWave); 3] = [
        ("tophat", make_tophat(1.0)?),
        ("two_packet", make_two_packet(2.0 * PI, 0.02 * PI, PI / 2.0)?),
        ("comb", make_comb(COMB_N, COMB_D, COMB_EPS, COMB_ALPHA)?),
    ];
    let mut worst_parseval: f64 = 0.0;
    for (name, w) in &states {
        let grid = Grid::for_wave(w, oracle_step(w, ORACLE_BIAS), 4.0, 0.0)?;
        let s = sample(w, &grid)?;
        let pmax = 64.0 / w.min_width();
        let c = fft_momentum_density(&s)?.restrict(-pmax, pmax)?;
        let diff = c
            .abscissae()
            .iter()
            .zip(c.values())
            .map(|(&p, v)| (momentum_density(w, p) - v).abs())
            .fold(0.0, f64::max);
        r.metric(&format!("oracle_diff_{name}"), diff);
        r.check(Check::at_most(format!("oracle_equivalence_{name}"), diff, ORACLE_TOL));
        worst_parseval = worst_parseval.max(parseval_gap(&s)?);
    }
    let grid = smoothing_grid(&make_two_packet(TP_D, TP_A, 0.0)?)?;
    let smoothed = smooth_edges(&make_two_packet(TP_D, TP_A, PI / 2.0)?, SIGMA, &grid)?;
    worst_parseval = worst_parseval.max(parseval_gap(&smoothed)?);
    r.metric("parseval_gap", worst_parseval);
    r.check(Check::at_most("parseval", worst_parseval, UNITARITY_TOL));

    let (s, c, k) = (0.7, 0.3, 1.1);
    let grid = Grid::new(-40.0, 0.02, 4096)?;
    let g = SampledWave::from_fn(&grid, Regularity::Smooth { scale: s }, |x| gaussian(s, c, k, x))?;
    let spec = fft_momentum_amplitude(&g)?;
    let amp_err = spec
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, z)| (z - gaussian_amplitude(s, c, k, spec.p(i))).norm())
        .fold(0.0, f64::max);
    r.metric("gaussian_amplitude_error", amp_err);
    r.check(Check::at_most("gaussian_self_duality", amp_err, GAUSSIAN_TOL));
    Ok(())
}

fn check_overlaps(r: &mut RunResult) -> Result<()> {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let f = i as f64;
        let n = 5 + 7 * i % 40;
        let l = 0.3 + 0.11 * f;
        let xi = 0.01 + 0.013 * f;
        let p0 = -1.5 + 0.17 * f;
        let d = l * (1.0 - xi);
        let psi = make_comb(n, d, l - d, p0 * l)?;
        let phi = boosted_tophat(n as f64 * l, p0)?;
        let got = overlap(&phi, &psi)?;
        worst = worst.max((got - boosted_overlap_closed_form(n, l, d, p0)?).norm());
        let flat = overlap(&make_tophat(n as f64 * l)?, &make_comb(n, d, l - d, 0.0)?)?;
        worst = worst.max((flat - (1.0 - xi).sqrt()).norm());
    }
    r.metric("boosted_overlap_error", worst);
    r.check(Check::at_most("boosted_overlap_closed_form", worst, EXACT_TOL));
    Ok(())
}

fn check_evolution(r: &mut RunResult) -> Result<()> {
    // Gaussian spreading.
    let (s, m) = (0.5, 1.0);
    let grid = Grid::new(-60.0, 0.015, 8192)?;
    let g = SampledWave::from_fn(&grid, Regularity::Smooth { scale: s }, |x| gaussian(s, 0.0, 0.0, x))?;
    let mut spread_err: f64 = 0.0;
    let mut unitarity: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let m0 = fft_momentum_density(&g)?;
    for t in [0.5, 2.0, 6.0] {
        let e = free_evolve(&g, PropagationSpec::new(t, m)?)?;
        let st = (s * s + (t / (2.0 * m * s)).powi(2)).sqrt();
        let rho = position_density(&e);
        for (i, v) in rho.values().iter().enumerate() {
            let x = rho.abscissa(i);
            let exact = (-(x * x) / (2.0 * st * st)).exp() / (st * (2.0 * PI).sqrt());
            spread_err = spread_err.max((v - exact).abs());
        }
        unitarity = unitarity.max((e.norm() - 1.0).abs());
        drift = drift.max(m0.max_abs_diff(&fft_momentum_density(&e)?)?);
    }
    let once = free_evolve(&g, PropagationSpec::at(3.5)?)?;
    let twice = free_evolve(&free_evolve(&g, PropagationSpec::at(1.5)?)?, PropagationSpec::at(2.0)?)?;
    let composition = once
        .samples()
        .iter()
        .zip(twice.samples())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    r.metric("gaussian_spread_error", spread_err);
    r.metric("composition_error", composition);
    r.check(Check::at_most("gaussian_spreading", spread_err, GAUSSIAN_TOL));
    r.check(Check::at_most("composition", composition, UNITARITY_TOL));

    // Phase latency on the smoothed two-packet state.
    let spec = PropagationSpec::at(0.3)?;
    let w_pi = make_two_packet(TP_D, TP_A, PI)?;
    let grid = evolution_grid(&w_pi, SIGMA, SIGMA / 32.0, spec)?;
    let s_pi = smooth_edges(&w_pi, SIGMA, &grid)?;
    let s_zero = smooth_edges(&make_two_packet(TP_D, TP_A, 0.0)?, SIGMA, &grid)?;
    let e_pi = free_evolve(&s_pi, spec)?;
    let e_zero = free_evolve(&s_zero, spec)?;
    unitarity = unitarity.max((e_pi.norm() - 1.0).abs());
    drift = drift.max(fft_momentum_density(&s_pi)?.max_abs_diff(&fft_momentum_density(&e_pi)?)?);
    let before = position_density(&s_pi).l1_distance(&position_density(&s_zero))?;
    let after = position_density(&e_pi).l1_distance(&position_density(&e_zero))?;
    let segs = w_pi.segments();
    let evolve_one = |k: usize| -> Result<SampledWave> {
        let single = PiecewiseWave::normalized(vec![segs[k]])?;
        free_evolve(&smooth_edges(&single, SIGMA, &grid)?, spec)
    };
    let shared = shared_mass(&evolve_one(0)?, &evolve_one(1)?);
    r.metric("unitarity_error", unitarity);
    r.metric("momentum_density_drift", drift);
    r.metric("latency_l1_before", before);
    r.metric("latency_l1_after", after);
    r.metric("latency_overlap_fraction", shared);
    r.check(Check::at_most("unitarity", unitarity, UNITARITY_TOL));
    r.check(Check::at_most("momentum_density_invariant", drift, UNITARITY_TOL));
    r.check(Check::at_most("no_effect_before_overlap", before, UNITARITY_TOL));
    r.check(Check::new(
        "interference_after_overlap",
        shared >= OVERLAP_FRACTION && after > FRINGE_L1,
        format!("overlap fraction {shared:e} >= {OVERLAP_FRACTION:e}, L1 {after:e} > {FRINGE_L1:e}"),
    ));
    Ok(())
}

/// Runs every invariant check; `cfg.fault` turns on the phase nudge.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<RunResult> {
    let mut echo = cfg.clone();
    echo.kind = ExperimentKind::Verify;
    let mut r = RunResult::new("verify", echo);
    check_moments(&mut r)?;
    check_modular(&mut r)?;
    check_oracles(&mut r)?;
    check_overlaps(&mut r)?;
    check_evolution(&mut r)?;
    Ok(r)
}

