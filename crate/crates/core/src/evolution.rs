//! Exact free-particle propagation on a periodic grid.
//!
//! With no potential in play the propagator is diagonal in momentum, so each
//! step is one forward FFT, a phase `exp(-i p^2 t / 2m)` and one inverse FFT.
//! There is no time-discretization error.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::spectral::{fft_momentum_density, DensityCurve};
use crate::wavefunctions::{smooth_edges, Grid, PiecewiseWave, SampledWave};

/// Fraction of the grid, per side, that must stay (almost) empty.
pub const GUARD_FRACTION: f64 = 0.125;
/// Largest probability tolerated in the guard zones.
pub const GUARD_MASS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSpec {
    t: f64,
    mass: f64,
}

impl PropagationSpec {
    pub fn new(t: f64, mass: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(invalid("t", "must be finite"));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", format!("must be positive, got {mass}")));
        }
        Ok(Self { t, mass })
    }

    /// Unit mass.
    pub fn at(t: f64) -> Result<Self> {
        Self::new(t, 1.0)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

fn check_guard(w: &SampledWave) -> Result<()> {
    let boundary_mass = w.boundary_mass(GUARD_FRACTION);
    if boundary_mass > GUARD_MASS {
        return Err(Error::Aliasing { boundary_mass });
    }
    Ok(())
}

/// Propagates `w` freely for `spec.t()`.
///
/// Rejects input or output with more than [`GUARD_MASS`] probability in the
/// outer [`GUARD_FRACTION`] of the grid, since the periodic transform would
/// wrap that mass around and fake interference.
pub fn free_evolve(w: &SampledWave, spec: PropagationSpec) -> Result<SampledWave> {
    check_guard(w)?;
    if spec.t == 0.0 {
        return Ok(w.clone());
    }
    let n = w.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = w.samples().to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    let dp = 2.0 * PI / (n as f64 * w.dx());
    let factor = -spec.t / (2.0 * spec.mass);
    let inv_n = (n as f64).recip();
    for (j, z) in buf.iter_mut().enumerate() {
        let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        let p = k * dp;
        *z *= Complex64::cis(factor * p * p) * inv_n;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let out = w.with_samples(buf);
    check_guard(&out)?;
    Ok(out)
}

/// Momentum below which all but `tail` of the probability of `w` lies.
pub fn momentum_extent(w: &SampledWave, tail: f64) -> Result<f64> {
    let c = fft_momentum_density(w)?;
    let v = c.values();
    let (mut lo, mut hi) = (0, v.len() - 1);
    let mut outside = 0.0;
    while lo < hi {
        let next = v[lo].max(v[hi]) * c.step();
        if outside + next > tail {
            break;
        }
        outside += next;
        if v[lo] >= v[hi] {
            lo += 1;
        } else {
            hi -= 1;
        }
    }
    Ok(c.abscissa(lo).abs().max(c.abscissa(hi).abs()))
}

/// Grid of step about `dx` on which the edge-smoothed `w` can be evolved up
/// to time `spec.t()` without reaching the guard zones.
///
/// The momentum content is measured on a tight grid first; the final grid
/// then covers the support plus the distance travelled by all but `1e-12`
/// of the probability, with the guard zones added on top.
pub fn evolution_grid(w: &PiecewiseWave, sigma: f64, dx: f64, spec: PropagationSpec) -> Result<Grid> {
    let (lo, hi) = w.support();
    let margin = 12.0 * sigma;
    let probe = Grid::for_wave(w, dx, 2.0, hi - lo + 2.0 * margin)?;
    let pmax = momentum_extent(&smooth_edges(w, sigma, &probe)?, 1e-12)?;
    let reach = pmax * spec.t.abs() / spec.mass;
    let core = hi - lo + margin + 2.0 * reach;
    let extent = 1.25 * core / (1.0 - 2.0 * GUARD_FRACTION);
    Grid::for_wave(w, dx, 1.0, extent)
}

/// `|psi(x)|^2` on the wave's grid.
pub fn position_density(w: &SampledWave) -> DensityCurve {
    DensityCurve::new(
        w.x0(),
        w.dx(),
        w.samples().iter().map(|z| z.norm_sqr()).collect(),
    )
    .expect("squared moduli are non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefunctions::{Grid, Regularity};

    fn gaussian(s: f64, grid: &Grid) -> SampledWave {
        SampledWave::from_fn(grid, Regularity::Smooth { scale: s }, |x| {
            Complex64::new((-(x * x) / (4.0 * s * s)).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(PropagationSpec::new(1.0, 0.0).is_err());
        assert!(PropagationSpec::new(f64::NAN, 1.0).is_err());
        assert_eq!(PropagationSpec::at(2.0).unwrap().mass(), 1.0);
    }

    #[test]
    fn zero_time_is_identity() {
        let g = Grid::new(-40.0, 0.05, 1600).unwrap();
        let w = gaussian(1.0, &g);
        let v = free_evolve(&w, PropagationSpec::at(0.0).unwrap()).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn rejects_wave_at_boundary() {
        let g = Grid::new(-5.0, 0.05, 200).unwrap();
        let w = gaussian(1.0, &g);
        assert!(matches!(
            free_evolve(&w, PropagationSpec::at(0.1).unwrap()),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn norm_is_preserved() {
        let g = Grid::new(-60.0, 0.05, 2400).unwrap();
        let w = gaussian(1.0, &g);
        for t in [0.3, 2.0, 7.5] {
            let v = free_evolve(&w, PropagationSpec::new(t, 1.3).unwrap()).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!((position_density(&v).riemann() - 1.0).abs() < 1e-12);
        }
    }
}
