//! Momentum-space quantities: closed-form amplitudes and densities, the FFT
//! oracle, overlaps, moments and modular (shift-operator) expectations.
//!
//! Fourier convention: `amp(p) = (2 pi)^(-1/2) * integral psi(x) exp(-i p x) dx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::wavefunctions::{PiecewiseWave, Regularity, SampledWave};

/// `sin(x) / x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `integral_lo^hi exp(i q x) dx`, exact for every `q` including 0.
fn phase_integral(q: f64, lo: f64, hi: f64) -> Complex64 {
    let w = hi - lo;
    Complex64::from_polar(w * sinc(0.5 * q * w), 0.5 * q * (lo + hi))
}

/// Exact momentum amplitude of a piecewise wave at momentum `p`.
pub fn momentum_amplitude(w: &PiecewiseWave, p: f64) -> Complex64 {
    let norm = (2.0 * PI).sqrt().recip();
    w.segments()
        .iter()
        .map(|s| s.amplitude() * phase_integral(s.rate() - p, s.start(), s.end()))
        .sum::<Complex64>()
        * norm
}

/// `|momentum_amplitude(w, p)|^2`.
pub fn momentum_density(w: &PiecewiseWave, p: f64) -> f64 {
    momentum_amplitude(w, p).norm_sqr()
}

/// Momentum density of two top-hats of length `d` whose centres are `big_d`
/// apart, with relative phase `alpha`:
/// `(d/pi) cos^2((p D - alpha)/2) sinc^2(p d/2)`.
pub fn analytic_density_two_packet(d: f64, big_d: f64, alpha: f64, p: f64) -> f64 {
    let c = (0.5 * (p * big_d - alpha)).cos();
    let s = sinc(0.5 * p * d);
    d / PI * c * c * s * s
}

/// Momentum density of the top-hat of length `big_l` boosted to `p0`:
/// `(L / 2 pi) sinc^2((p - p0) L / 2)`.
pub fn analytic_density_boosted_tophat(big_l: f64, p0: f64, p: f64) -> f64 {
    let s = sinc(0.5 * (p - p0) * big_l);
    big_l / (2.0 * PI) * s * s
}

/// Closed-form overlap of the boosted top-hat of length `N l` with the
/// `N`-packet staircase state of packet length `d`, period `l` and step
/// phase `p0 l`.
///
/// Written as `sqrt(N/(L d)) * d * exp(-i p0 d/2) * sinc(p0 d/2)`, which
/// equals `sqrt(N/(L d)) (exp(-i p0 d) - 1)/(-i p0)` and tends to
/// `sqrt(d/l)` as `p0 -> 0`.
pub fn boosted_overlap_closed_form(n: usize, l: f64, d: f64, p0: f64) -> Result<Complex64> {
    if n == 0 {
        return Err(invalid("n", "need at least one packet"));
    }
    if !(d > 0.0 && d <= l && l.is_finite()) {
        return Err(invalid("d", format!("need 0 < d <= l, got d={d}, l={l}")));
    }
    let big_l = n as f64 * l;
    let mag = (n as f64 / (big_l * d)).sqrt() * d * sinc(0.5 * p0 * d);
    Ok(Complex64::from_polar(mag, -0.5 * p0 * d))
}

/// Probability density sampled on a uniform grid. Used for momentum
/// densities (abscissa = p) and position densities (abscissa = x).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    start: f64,
    step: f64,
    density: Vec<f64>,
}

impl DensityCurve {
    pub fn new(start: f64, step: f64, density: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("step", format!("must be positive, got {step}")));
        }
        if density.is_empty() {
            return Err(invalid("density", "curve is empty"));
        }
        if let Some(bad) = density.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(invalid("density", format!("negative or non-finite value {bad}")));
        }
        Ok(Self {
            start,
            step,
            density,
        })
    }

    pub fn from_fn(start: f64, step: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let density = (0..len).map(|i| f(start + i as f64 * step)).collect();
        Self::new(start, step, density)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.density
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.abscissa(i)).collect()
    }

    /// Value at the grid point nearest to `x`, if `x` is on the grid's span.
    pub fn value_near(&self, x: f64) -> Option<f64> {
        let i = ((x - self.start) / self.step).round();
        if i < 0.0 || i as usize >= self.len() {
            None
        } else {
            Some(self.density[i as usize])
        }
    }

    pub fn trapezoid(&self) -> f64 {
        let n = self.len();
        if n == 1 {
            return 0.0;
        }
        let inner: f64 = self.density.iter().sum();
        (inner - 0.5 * (self.density[0] + self.density[n - 1])) * self.step
    }

    /// Composite Simpson's rule, closing an even point count with the 3/8
    /// rule on the last four points. Falls back to the trapezoid below four.
    pub fn simpson(&self) -> f64 {
        let f = &self.density;
        let n = f.len();
        if n < 4 {
            return self.trapezoid();
        }
        let h = self.step;
        let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
        let mut total = 0.0;
        for i in (0..simpson_end).step_by(2) {
            total += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        }
        if n % 2 == 0 {
            let j = n - 4;
            total += 3.0 * h / 8.0 * (f[j] + 3.0 * f[j + 1] + 3.0 * f[j + 2] + f[j + 3]);
        }
        total
    }

    /// `sum density * step`; exact discrete total for FFT-grid curves.
    pub fn riemann(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.step
    }

    /// Sub-curve of the points with `lo <= abscissa <= hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<DensityCurve> {
        let first = ((lo - self.start) / self.step - 1e-9).ceil().max(0.0) as usize;
        let last = ((hi - self.start) / self.step + 1e-9).floor();
        if last < 0.0 || first >= self.len() || (last as usize) < first {
            return Err(invalid("band", format!("[{lo}, {hi}] misses the curve")));
        }
        let last = (last as usize).min(self.len() - 1);
        DensityCurve::new(
            self.abscissa(first),
            self.step,
            self.density[first..=last].to_vec(),
        )
    }

    fn check_same_grid(&self, other: &DensityCurve) -> Result<()> {
        if self.len() != other.len()
            || (self.step - other.step).abs() > 1e-12 * self.step
            || (self.start - other.start).abs() > 1e-9 * self.step
        {
            return Err(Error::IncompatibleGrids(format!(
                "curves ({}, {}, {}) and ({}, {}, {})",
                self.start,
                self.step,
                self.len(),
                other.start,
                other.step,
                other.len()
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DensityCurve) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Trapezoidal integral of `|self - other|`.
    pub fn l1_distance(&self, other: &DensityCurve) -> Result<f64> {
        self.check_same_grid(other)?;
        let diff: Vec<f64> = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok(DensityCurve {
            start: self.start,
            step: self.step,
            density: diff,
        }
        .trapezoid())
    }

    /// Normalization check against the probability the band is known to hold.
    ///
    /// When `captured >= 1 - 1e-6` the Simpson integral must be within
    /// `tol` of 1; otherwise it must be within `tol` of `captured`.
    pub fn integrates_to(&self, captured: f64, tol: f64) -> bool {
        let target = if captured >= 1.0 - 1e-6 { 1.0 } else { captured };
        (self.simpson() - target).abs() <= tol
    }
}

/// Momentum amplitudes of a sampled wave on the FFT's conjugate grid, in
/// ascending momentum order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    p_start: f64,
    dp: f64,
    amplitude: Vec<Complex64>,
    nyquist_first: bool,
}

impl Spectrum {
    pub fn p_start(&self) -> f64 {
        self.p_start
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn p(&self, i: usize) -> f64 {
        self.p_start + i as f64 * self.dp
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitude
    }

    pub fn density(&self) -> DensityCurve {
        DensityCurve {
            start: self.p_start,
            step: self.dp,
            density: self.amplitude.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    /// Weight of `p^n` at index `i`: the unpaired Nyquist bin stands for both
    /// `+p` and `-p`, so odd powers vanish there.
    fn power(&self, i: usize, n: u32) -> f64 {
        let p = self.p(i);
        if i == 0 && self.nyquist_first && n % 2 == 1 {
            0.0
        } else {
            p.powi(n as i32)
        }
    }
}

fn check_resolution(w: &SampledWave) -> Result<()> {
    let required = w.regularity().max_dx();
    if w.dx() > required * (1.0 + 1e-9) {
        return Err(Error::UnderResolved {
            dx: w.dx(),
            required,
            feature: w.regularity().feature(),
        });
    }
    Ok(())
}

fn spectrum_unchecked(w: &SampledWave) -> Spectrum {
    let n = w.len();
    let mut buf = w.samples().to_vec();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let dx = w.dx();
    let dp = 2.0 * PI / (n as f64 * dx);
    let kmin = -((n / 2) as i64);
    let scale = dx / (2.0 * PI).sqrt();
    let amplitude = (0..n)
        .map(|i| {
            let k = kmin + i as i64;
            let j = k.rem_euclid(n as i64) as usize;
            let p = k as f64 * dp;
            buf[j] * Complex64::cis(-p * w.x0()) * scale
        })
        .collect();
    Spectrum {
        p_start: kmin as f64 * dp,
        dp,
        amplitude,
        nyquist_first: n % 2 == 0,
    }
}

/// Grid step at which the FFT density of the midpoint-sampled `w` is within
/// `tol` of the exact density everywhere, assuming the cells are aligned with
/// the edges.
///
/// Aligned midpoint sampling scales each amplitude by `x / sin x` with
/// `x = p dx / 2`, and `|amp(p)|^2 <= 2 S^2 / (pi p^2)` with `S = sum |a_k|`.
/// Together: bias <= (1 - 4/pi^2) S^2 dx^2 / (2 pi).
pub fn oracle_step(w: &PiecewiseWave, tol: f64) -> f64 {
    let s = w.amplitude_l1();
    let c = (1.0 - 4.0 / (PI * PI)) / (2.0 * PI);
    (tol / (c * s * s)).sqrt().min(w.min_width() / 64.0)
}

/// FFT estimate of the momentum amplitudes, with the same convention as
/// [`momentum_amplitude`].
pub fn fft_momentum_amplitude(w: &SampledWave) -> Result<Spectrum> {
    check_resolution(w)?;
    Ok(spectrum_unchecked(w))
}

/// FFT estimate of the momentum density; `sum density * dp` equals the
/// discrete position norm.
pub fn fft_momentum_density(w: &SampledWave) -> Result<DensityCurve> {
    Ok(fft_momentum_amplitude(w)?.density())
}

/// Probability that the momentum of `w` lies in `[lo, hi]`, by composite
/// Gauss-Legendre quadrature of the exact density.
pub fn band_mass(w: &PiecewiseWave, lo: f64, hi: f64) -> f64 {
    const NODES: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329_0,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const WEIGHTS: [f64; 4] = [
        0.362_683_783_378_362_0,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    if !(hi > lo) {
        return 0.0;
    }
    let (a, b) = w.support();
    // |amp|^2 oscillates in p with frequency at most the support extent.
    let max_panel = PI / (4.0 * (b - a));
    let panels = ((hi - lo) / max_panel).ceil().max(1.0) as usize;
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = lo + (k as f64 + 0.5) * h;
            let half = 0.5 * h;
            NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(x, wt)| {
                    wt * half
                        * (momentum_density(w, mid - half * x) + momentum_density(w, mid + half * x))
                })
                .sum::<f64>()
        })
        .sum()
}

/// Anything with an inner product and a translation operator.
pub trait Wave {
    /// `<self|other>`, conjugating `self`.
    fn inner(&self, other: &Self) -> Result<Complex64>;
    /// `<psi| exp(-i p b) |psi> = integral psi*(x) psi(x - b) dx`.
    fn shift_expectation(&self, b: f64) -> Result<Complex64>;
}

impl Wave for PiecewiseWave {
    fn inner(&self, other: &Self) -> Result<Complex64> {
        let (a, b) = (self.segments(), other.segments());
        let (mut i, mut j) = (0, 0);
        let mut acc = Complex64::new(0.0, 0.0);
        while i < a.len() && j < b.len() {
            let (sa, sb) = (&a[i], &b[j]);
            let lo = sa.start().max(sb.start());
            let hi = sa.end().min(sb.end());
            if hi > lo {
                acc += sa.amplitude().conj()
                    * sb.amplitude()
                    * phase_integral(sb.rate() - sa.rate(), lo, hi);
            }
            if sa.end() < sb.end() {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(acc)
    }

    fn shift_expectation(&self, b: f64) -> Result<Complex64> {
        self.inner(&self.shifted(b))
    }
}

impl Wave for SampledWave {
    fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.same_grid(other) {
            return Err(Error::IncompatibleGrids(format!(
                "x0 {} / {}, dx {} / {}, len {} / {}",
                self.x0(),
                other.x0(),
                self.dx(),
                other.dx(),
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .samples()
            .iter()
            .zip(other.samples())
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.dx())
    }

    /// Evaluated spectrally, `sum |amp_k|^2 exp(-i p_k b) dp`. The grid is
    /// periodic, so it must extend past the support by more than `|b|`.
    fn shift_expectation(&self, b: f64) -> Result<Complex64> {
        let spec = spectrum_unchecked(self);
        Ok(spec
            .amplitude
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let p = spec.p(i);
                let phase = if i == 0 && spec.nyquist_first {
                    Complex64::new((p * b).cos(), 0.0)
                } else {
                    Complex64::cis(-p * b)
                };
                z.norm_sqr() * phase
            })
            .sum::<Complex64>()
            * spec.dp)
    }
}

/// `<a|b>` with `a` conjugated.
pub fn overlap<W: Wave>(a: &W, b: &W) -> Result<Complex64> {
    a.inner(b)
}

/// One value of the modular momentum `<exp(-i p b)>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularSample {
    pub b: f64,
    pub value: Complex64,
}

pub fn modular_expectation<W: Wave>(w: &W, b: f64) -> Result<ModularSample> {
    Ok(ModularSample {
        b,
        value: w.shift_expectation(b)?,
    })
}

pub const MAX_MOMENT_ORDER: u32 = 4;

/// A momentum moment together with its scale and the spectral tail weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub order: u32,
    /// `<p^n>`.
    pub value: f64,
    /// `<|p|^n>`, the natural scale for comparing `value`s.
    pub abs_value: f64,
    /// Probability above half the Nyquist momentum.
    pub tail_mass: f64,
}

impl MomentEstimate {
    /// `|a - b| / max(|a|, |b|, <|p|^n>)`.
    pub fn relative_difference(&self, other: &MomentEstimate) -> f64 {
        let scale = self
            .value
            .abs()
            .max(other.value.abs())
            .max(self.abs_value.max(other.abs_value));
        if scale == 0.0 {
            0.0
        } else {
            (self.value - other.value).abs() / scale
        }
    }
}

/// `<p^n>` of a sampled wave for `n <= 4`, integrated over the FFT band.
pub fn moment(w: &SampledWave, n: u32) -> Result<MomentEstimate> {
    if n > MAX_MOMENT_ORDER {
        return Err(invalid(
            "n",
            format!("moment order {n} above supported maximum {MAX_MOMENT_ORDER}"),
        ));
    }
    if n >= 2 {
        if let Regularity::Discontinuous { .. } = w.regularity() {
            return Err(Error::Divergent { order: n });
        }
    }
    let spec = fft_momentum_amplitude(w)?;
    let half_nyquist = 0.5 * PI / w.dx();
    let (mut value, mut abs_value, mut tail) = (0.0, 0.0, 0.0);
    for (i, z) in spec.amplitude.iter().enumerate() {
        let rho = z.norm_sqr();
        let pn = spec.power(i, n);
        value += pn * rho;
        abs_value += spec.p(i).abs().powi(n as i32) * rho;
        if spec.p(i).abs() > half_nyquist {
            tail += rho;
        }
    }
    Ok(MomentEstimate {
        order: n,
        value: value * spec.dp,
        abs_value: abs_value * spec.dp,
        tail_mass: tail * spec.dp,
    })
}

/// Location of the global maximum, refined by a parabola through the three
/// points around the discrete argmax. Ties go to the smaller `|p|`, then to
/// positive `p`.
pub fn peak_location(c: &DensityCurve) -> Result<f64> {
    let v = c.values();
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::NoInteriorPeak);
    }
    let best = (0..v.len())
        .filter(|&i| v[i] >= max * (1.0 - 1e-12))
        .min_by(|&i, &j| {
            let (pi, pj) = (c.abscissa(i), c.abscissa(j));
            let key = |p: f64| (p.abs() / c.step()).round();
            key(pi)
                .partial_cmp(&key(pj))
                .unwrap()
                .then(pj.partial_cmp(&pi).unwrap())
        })
        .expect("non-empty curve");
    if best == 0 || best + 1 == v.len() {
        return Err(Error::NoInteriorPeak);
    }
    let (ym, y0, yp) = (v[best - 1], v[best], v[best + 1]);
    let denom = ym - 2.0 * y0 + yp;
    let offset = if denom < 0.0 {
        (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Ok(c.abscissa(best) + offset * c.step())
}
