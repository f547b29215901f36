//! Dephasing-type (generalized) spin-boson models with a vacuum bath.
//!
//! Level j couples to the boson field through a form factor f_j(omega); the
//! dephasing functions have the closed form
//!
//!   phi_{jl}(t) = e^{-i(w_j - w_l) t} e^{i theta_{jl}(t)}
//!                 exp{ -int |f_j - f_l|^2 (1 - cos wt) / w^2 dw },
//!
//!   theta_{jl}(t) = 2 Im int f_l^* f_j (1 - cos wt) / w^2 dw
//!                 + int (|f_j|^2 - |f_l|^2) (t/w - sin wt / w^2) dw.
//!
//! Flat (white) couplings are singular limits and bypass quadrature: the
//! full-line integral is pi |t|, the half-line one pi |t| / 2, and the
//! symmetric finite cutoff is an ordinary window integral. For flat full-line
//! couplings the multi-time vacuum correlations reduce to products over a
//! Kronecker-delta kernel, which is what makes the regression hierarchy hold
//! exactly there.
//!
//! Conventions: b(f) annihilates against f^*, so the coupling operator
//! b(f) + b^dag(f) has f multiplying the creation part. The truncated Fock
//! oracle below uses the same convention, which is what makes the phase
//! theta come out right for complex form factors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::{DephasingMatrix, DephasingTrajectory, TrajectorySource};
use crate::pvquad;
use crate::quad::{self, one_minus_cos_over_w2, t_minus_sin_over_w2};
use crate::regression::{IndexTuple, MultiTimeModel, TimeGrid};

use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Spectral coupling specification f(omega).
#[derive(Debug, Clone, PartialEq)]
pub enum FormFactor {
    /// f(w) = amplitude on the whole real line (singular; analytic limits).
    FlatFullLine { amplitude: f64 },
    /// f(w) = amplitude on w >= 0 (singular; analytic limits).
    FlatHalfLine { amplitude: f64 },
    /// f(w) = amplitude on the symmetric window [-cutoff, cutoff].
    FlatCutoff { amplitude: f64, cutoff: f64 },
    /// f(w) = amplitude * width^2 / ((w - center)^2 + width^2).
    Lorentzian { center: f64, width: f64, amplitude: f64 },
    /// f(w) = amplitude * exp(-(w - center)^2 / (2 width^2)).
    Gaussian { center: f64, width: f64, amplitude: f64 },
    /// Piecewise-linear complex samples (w, f(w)), zero outside the range.
    Tabulated { samples: Vec<(f64, Complex64)> },
    /// A single atom of weight |amplitude|^2 at a nonzero frequency.
    PointMass { frequency: f64, amplitude: Complex64 },
}

impl FormFactor {
    pub fn negated(&self) -> Self {
        match self {
            FormFactor::FlatFullLine { amplitude } => {
                FormFactor::FlatFullLine { amplitude: -amplitude }
            }
            FormFactor::FlatHalfLine { amplitude } => {
                FormFactor::FlatHalfLine { amplitude: -amplitude }
            }
            FormFactor::FlatCutoff { amplitude, cutoff } => {
                FormFactor::FlatCutoff { amplitude: -amplitude, cutoff: *cutoff }
            }
            FormFactor::Lorentzian { center, width, amplitude } => FormFactor::Lorentzian {
                center: *center,
                width: *width,
                amplitude: -amplitude,
            },
            FormFactor::Gaussian { center, width, amplitude } => FormFactor::Gaussian {
                center: *center,
                width: *width,
                amplitude: -amplitude,
            },
            FormFactor::Tabulated { samples } => FormFactor::Tabulated {
                samples: samples.iter().map(|&(w, f)| (w, -f)).collect(),
            },
            FormFactor::PointMass { frequency, amplitude } => FormFactor::PointMass {
                frequency: *frequency,
                amplitude: -amplitude,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            FormFactor::FlatCutoff { cutoff, .. } if *cutoff <= 0.0 => {
                Err(Error::Kind(format!("cutoff must be positive, got {cutoff}")))
            }
            FormFactor::PointMass { frequency, .. } if *frequency == 0.0 => {
                Err(Error::Kind("point-mass form factor requires a nonzero frequency".into()))
            }
            FormFactor::Tabulated { samples } => {
                if samples.iter().any(|(w, f)| !w.is_finite() || !f.re.is_finite() || !f.im.is_finite()) {
                    return Err(Error::Kind("tabulated samples must be finite".into()));
                }
                if samples.windows(2).any(|p| p[1].0 <= p[0].0) {
                    return Err(Error::Kind("tabulated samples must be strictly increasing in w".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn is_smooth(&self) -> bool {
        matches!(
            self,
            FormFactor::Lorentzian { .. } | FormFactor::Gaussian { .. } | FormFactor::Tabulated { .. }
        )
    }

    fn smooth_eval(&self, w: f64) -> Complex64 {
        match self {
            FormFactor::Lorentzian { center, width, amplitude } => {
                let d = w - center;
                c(amplitude * width * width / (d * d + width * width), 0.0)
            }
            FormFactor::Gaussian { center, width, amplitude } => {
                let d = (w - center) / width;
                c(amplitude * (-0.5 * d * d).exp(), 0.0)
            }
            FormFactor::Tabulated { samples } => {
                if samples.is_empty()
                    || w < samples[0].0
                    || w > samples[samples.len() - 1].0
                {
                    return c(0.0, 0.0);
                }
                let k = samples.partition_point(|&(x, _)| x <= w);
                if k == 0 {
                    return samples[0].1;
                }
                if k == samples.len() {
                    return samples[samples.len() - 1].1;
                }
                let (x0, y0) = samples[k - 1];
                let (x1, y1) = samples[k];
                y0 + (y1 - y0) * c((w - x0) / (x1 - x0), 0.0)
            }
            _ => unreachable!("smooth_eval is only called on smooth kinds"),
        }
    }
}

/// Quadrature controls for the smooth form-factor integrals: truncation
/// radius and panel tolerances.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    pub radius: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { radius: 200.0, abs_tol: 1e-13, rel_tol: 1e-10, max_segments: 200_000 }
    }
}

impl QuadratureSettings {
    /// Halved tolerances and doubled radius, for self-consistency checks.
    pub fn refined(&self) -> Self {
        Self {
            radius: self.radius * 2.0,
            abs_tol: self.abs_tol * 0.01,
            rel_tol: self.rel_tol * 0.01,
            max_segments: self.max_segments * 4,
        }
    }

    fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        Ok(quad::adaptive(f, lo, hi, self.abs_tol, self.rel_tol, self.max_segments)?.value)
    }
}

/// Level energies plus per-level form factors.
#[derive(Debug, Clone)]
pub struct GsbSpec {
    energies: Vec<f64>,
    couplings: Vec<FormFactor>,
}

impl GsbSpec {
    pub fn new(energies: Vec<f64>, couplings: Vec<FormFactor>) -> Result<Self> {
        if energies.len() < 2 || energies.len() != couplings.len() {
            return Err(Error::Model(format!(
                "need matching energies and couplings for d >= 2 levels, got {} and {}",
                energies.len(),
                couplings.len()
            )));
        }
        for f in &couplings {
            f.validate()?;
        }
        Ok(Self { energies, couplings })
    }

    /// Qubit specialization: f_0 = f, f_1 = -f.
    pub fn qubit(omega0: f64, omega1: f64, f: FormFactor) -> Result<Self> {
        let neg = f.negated();
        Self::new(vec![omega0, omega1], vec![f, neg])
    }

    /// Shared-modulus flat couplings f_j = s_j f with the rate convention
    /// gamma = 8 pi f^2 (full line) or gamma = 4 pi f^2 ... the half-line
    /// amplitude is chosen so that |phi|^2 = e^{-gamma |t|} in both cases.
    pub fn flat_pattern(energies: Vec<f64>, signs: &[i8], gamma: f64, line: Line) -> Result<Self> {
        if signs.len() != energies.len() {
            return Err(Error::Model("sign pattern length must match the level count".into()));
        }
        if gamma < 0.0 {
            return Err(Error::Model(format!("gamma must be nonnegative, got {gamma}")));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Model("sign pattern entries must be +1 or -1".into()));
        }
        let amp = match line {
            Line::Full => (gamma / (8.0 * PI)).sqrt(),
            Line::Half => (gamma / (4.0 * PI)).sqrt(),
        };
        let couplings = signs
            .iter()
            .map(|&s| match line {
                Line::Full => FormFactor::FlatFullLine { amplitude: s as f64 * amp },
                Line::Half => FormFactor::FlatHalfLine { amplitude: s as f64 * amp },
            })
            .collect();
        Self::new(energies, couplings)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energy(&self, j: usize) -> f64 {
        self.energies[j]
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn coupling(&self, j: usize) -> &FormFactor {
        &self.couplings[j]
    }
}

enum PairClass {
    FlatFull(f64, f64),
    FlatHalf(f64, f64),
    FlatCut(f64, f64, f64),
    /// (frequency, f_j at the atom, f_l at the atom)
    Atoms(Vec<(f64, Complex64, Complex64)>),
    Smooth,
}

fn classify(fj: &FormFactor, fl: &FormFactor) -> Result<PairClass> {
    use FormFactor::*;
    match (fj, fl) {
        (FlatFullLine { amplitude: a }, FlatFullLine { amplitude: b }) => {
            Ok(PairClass::FlatFull(*a, *b))
        }
        (FlatHalfLine { amplitude: a }, FlatHalfLine { amplitude: b }) => {
            Ok(PairClass::FlatHalf(*a, *b))
        }
        (FlatCutoff { amplitude: a, cutoff: wa }, FlatCutoff { amplitude: b, cutoff: wb }) => {
            if wa != wb {
                return Err(Error::Kind(format!(
                    "flat-cutoff pair needs a common window, got {wa} and {wb}"
                )));
            }
            Ok(PairClass::FlatCut(*a, *b, *wa))
        }
        (PointMass { frequency: wa, amplitude: a }, PointMass { frequency: wb, amplitude: b }) => {
            if wa == wb {
                Ok(PairClass::Atoms(vec![(*wa, *a, *b)]))
            } else {
                Ok(PairClass::Atoms(vec![
                    (*wa, *a, c(0.0, 0.0)),
                    (*wb, c(0.0, 0.0), *b),
                ]))
            }
        }
        _ if fj.is_smooth() && fl.is_smooth() => Ok(PairClass::Smooth),
        _ => Err(Error::Kind(format!(
            "unsupported form-factor combination: {fj:?} with {fl:?}"
        ))),
    }
}

/// Decay exponent and phase theta for one (j, l) pair; phi_{jl}(t) is then
/// e^{-i (w_j - w_l) t} e^{i theta} e^{-decay}.
pub fn gsb_exponents(
    spec: &GsbSpec,
    j: usize,
    l: usize,
    t: f64,
    settings: &QuadratureSettings,
) -> Result<(f64, f64)> {
    let d = spec.dim();
    if j >= d || l >= d {
        return Err(Error::Model(format!("level index out of range for d = {d}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::Model(format!("time must be nonnegative, got {t}")));
    }
    if j == l {
        return Ok((0.0, 0.0));
    }
    match classify(spec.coupling(j), spec.coupling(l))? {
        PairClass::FlatFull(a, b) => {
            // int (1 - cos wt)/w^2 over the line is pi |t|; the phase theta
            // vanishes: the first term is real, the second is odd in w and
            // cancels in the symmetric (principal value / cutoff) limit.
            let diff = a - b;
            Ok((diff * diff * PI * t.abs(), 0.0))
        }
        PairClass::FlatHalf(a, b) => {
            if (a * a - b * b).abs() > 1e-12 * (a * a + b * b).max(1.0) {
                return Err(Error::DivergentIntegral(format!(
                    "half-line flat couplings need |f_j| = |f_l| for the phase integral \
                     (t/w - sin wt / w^2) to converge; got amplitudes {a} and {b}"
                )));
            }
            let diff = a - b;
            Ok((diff * diff * PI * t.abs() / 2.0, 0.0))
        }
        PairClass::FlatCut(a, b, w) => {
            // symmetric window: theta = 0 exactly, decay through the window
            // integral 2 int_0^W (1 - cos wt)/w^2 dw
            let diff = a - b;
            let window = settings.integrate(|x| one_minus_cos_over_w2(x, t), 0.0, w)?;
            Ok((diff * diff * 2.0 * window, 0.0))
        }
        PairClass::Atoms(atoms) => {
            let mut decay = 0.0;
            let mut theta = 0.0;
            for (w, fj, fl) in atoms {
                let omc = one_minus_cos_over_w2(w, t);
                let tms = t_minus_sin_over_w2(w, t);
                decay += (fj - fl).norm_sqr() * omc;
                theta += 2.0 * (fl.conj() * fj).im * omc;
                theta += (fj.norm_sqr() - fl.norm_sqr()) * tms;
            }
            Ok((decay, theta))
        }
        PairClass::Smooth => {
            let fj = spec.coupling(j);
            let fl = spec.coupling(l);
            let r = settings.radius;
            let tail_decay = (fj.smooth_eval(r).norm_sqr() - fl.smooth_eval(r).norm_sqr()).abs()
                + (fj.smooth_eval(-r).norm_sqr() - fl.smooth_eval(-r).norm_sqr()).abs();
            if tail_decay > 1e-8 {
                return Err(Error::DivergentIntegral(format!(
                    "|f_j|^2 - |f_l|^2 does not vanish at the quadrature radius {r}: \
                     residual weight {tail_decay:e}"
                )));
            }
            let decay = settings.integrate(
                |w| (fj.smooth_eval(w) - fl.smooth_eval(w)).norm_sqr() * one_minus_cos_over_w2(w, t),
                -r,
                r,
            )?;
            let theta_first = settings.integrate(
                |w| 2.0 * (fl.smooth_eval(w).conj() * fj.smooth_eval(w)).im
                    * one_minus_cos_over_w2(w, t),
                -r,
                r,
            )?;
            let theta_second = settings.integrate(
                |w| (fj.smooth_eval(w).norm_sqr() - fl.smooth_eval(w).norm_sqr())
                    * t_minus_sin_over_w2(w, t),
                -r,
                r,
            )?;
            Ok((decay, theta_first + theta_second))
        }
    }
}

/// phi_{jl}(t) for a generalized spin-boson dephasing model with vacuum bath.
pub fn dephasing_gsb(
    spec: &GsbSpec,
    j: usize,
    l: usize,
    t: f64,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    if j == l {
        return Ok(c(1.0, 0.0));
    }
    let (decay, theta) = gsb_exponents(spec, j, l, t, settings)?;
    let phase = -(spec.energy(j) - spec.energy(l)) * t + theta;
    Ok(Complex64::from_polar((-decay).exp(), phase))
}

/// Qubit specialization f_0 = f, f_1 = -f: the decay exponent becomes
/// 4 int |f|^2 (1 - cos wt)/w^2 dw and theta vanishes.
pub fn dephasing_qubit_sb(
    f: &FormFactor,
    omega0: f64,
    omega1: f64,
    t: f64,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let spec = GsbSpec::qubit(omega0, omega1, f.clone())?;
    dephasing_gsb(&spec, 0, 1, t, settings)
}

/// Window choice for the constant-coupling construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Finite(f64),
    /// The w_cut -> infinity limit, where the window integral becomes pi |t|.
    Limit,
}

/// Dephasing for real constant couplings on a symmetric window. In the
/// infinite-cutoff limit the modulus is exp(-pi (f_j - f_l)^2 |t|); an
/// asymmetric window would instead leave a cutoff-dependent phase, so only
/// the symmetric construction is provided.
pub fn cutoff_dephasing(
    energies: &[f64],
    couplings: &[f64],
    cutoff: Cutoff,
    j: usize,
    l: usize,
    t: f64,
    settings: &QuadratureSettings,
) -> Result<Complex64> {
    let d = energies.len();
    if couplings.len() != d || j >= d || l >= d {
        return Err(Error::Model("cutoff model indices out of range".into()));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::Model(format!("time must be nonnegative, got {t}")));
    }
    if j == l {
        return Ok(c(1.0, 0.0));
    }
    let diff = couplings[j] - couplings[l];
    let window = match cutoff {
        Cutoff::Limit => PI * t.abs(),
        Cutoff::Finite(w) => {
            if w <= 0.0 {
                return Err(Error::Model(format!("cutoff must be positive, got {w}")));
            }
            2.0 * settings.integrate(|x| one_minus_cos_over_w2(x, t), 0.0, w)?
        }
    };
    let phase = -(energies[j] - energies[l]) * t;
    Ok(Complex64::from_polar((-diff * diff * window).exp(), phase))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Line {
    Full,
    Half,
}

/// Flat-coupling model with per-level real amplitudes: the closed-form
/// multi-time machine. Full-line models satisfy quantum regression exactly;
/// half-line models satisfy it up to a phase, so only their moduli are
/// available for multi-interval correlations.
#[derive(Debug, Clone)]
pub struct FlatWeylModel {
    energies: Vec<f64>,
    amplitudes: Vec<f64>,
    line: Line,
}

impl FlatWeylModel {
    pub fn new(energies: Vec<f64>, amplitudes: Vec<f64>, line: Line) -> Result<Self> {
        if energies.len() < 2 || energies.len() != amplitudes.len() {
            return Err(Error::Model(
                "need matching energies and amplitudes for at least two levels".into(),
            ));
        }
        if line == Line::Half {
            let a0 = amplitudes[0].abs();
            if amplitudes.iter().any(|a| (a.abs() - a0).abs() > 1e-12 * a0.max(1.0)) {
                return Err(Error::DivergentIntegral(
                    "half-line flat couplings need equal moduli across levels".into(),
                ));
            }
        }
        Ok(Self { energies, amplitudes, line })
    }

    /// Sign-pattern construction with gamma = 8 pi f^2 (full line) or the
    /// half-line amplitude giving the same modulus decay.
    pub fn flat_pattern(energies: Vec<f64>, signs: &[i8], gamma: f64, line: Line) -> Result<Self> {
        if signs.len() != energies.len() {
            return Err(Error::Model("sign pattern length must match the level count".into()));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Model("sign pattern entries must be +1 or -1".into()));
        }
        let amp = match line {
            Line::Full => (gamma / (8.0 * PI)).sqrt(),
            Line::Half => (gamma / (4.0 * PI)).sqrt(),
        };
        let amplitudes = signs.iter().map(|&s| s as f64 * amp).collect();
        Self::new(energies, amplitudes, line)
    }

    pub fn from_spec(spec: &GsbSpec) -> Result<Self> {
        let mut line = None;
        let mut amplitudes = Vec::with_capacity(spec.dim());
        for j in 0..spec.dim() {
            let (a, this_line) = match spec.coupling(j) {
                FormFactor::FlatFullLine { amplitude } => (*amplitude, Line::Full),
                FormFactor::FlatHalfLine { amplitude } => (*amplitude, Line::Half),
                other => {
                    return Err(Error::Kind(format!(
                        "flat Weyl model needs flat line couplings, got {other:?}"
                    )))
                }
            };
            if *line.get_or_insert(this_line) != this_line {
                return Err(Error::Kind("mixed full/half line couplings".into()));
            }
            amplitudes.push(a);
        }
        Self::new(spec.energies().to_vec(), amplitudes, line.expect("d >= 2"))
    }

    pub fn line(&self) -> Line {
        self.line
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    fn check_tuple(&self, increments: &[f64], tuple: &IndexTuple) -> Result<()> {
        if increments.len() != tuple.len() {
            return Err(Error::Model("tuple/grid length mismatch".into()));
        }
        let d = self.energies.len();
        if tuple.pairs().iter().any(|&(j, l)| j >= d || l >= d) {
            return Err(Error::Model(format!("tuple index out of range for d = {d}")));
        }
        Ok(())
    }

    /// Sum_{k,h} c_k c_h K(k,h) with c_k the amplitude differences and K the
    /// interval kernel; evaluates to 2 pi sum_k c_k^2 dt_k through the
    /// principal-value identities rather than by assuming the delta form.
    fn kernel_quadratic_form(&self, increments: &[f64], tuple: &IndexTuple) -> Result<f64> {
        let mut times = Vec::with_capacity(increments.len() + 1);
        times.push(0.0);
        let mut acc = 0.0;
        for &dt in increments {
            if dt < 0.0 {
                return Err(Error::Model(format!("negative increment {dt}")));
            }
            acc += dt;
            times.push(acc);
        }
        let coeff: Vec<f64> = tuple
            .pairs()
            .iter()
            .map(|&(j, l)| self.amplitudes[j] - self.amplitudes[l])
            .collect();
        let m = increments.len();
        let mut sum = 0.0;
        for k in 0..m {
            for h in 0..m {
                if coeff[k] == 0.0 || coeff[h] == 0.0 {
                    continue;
                }
                let kernel =
                    pvquad::kernel_integral(times[k + 1], times[k], times[h + 1], times[h])?;
                sum += coeff[k] * coeff[h] * kernel;
            }
        }
        Ok(sum)
    }

    fn phase_sum(&self, increments: &[f64], tuple: &IndexTuple) -> f64 {
        increments
            .iter()
            .zip(tuple.pairs())
            .map(|(&dt, &(j, l))| -(self.energies[j] - self.energies[l]) * dt)
            .sum()
    }
}

impl MultiTimeModel for FlatWeylModel {
    fn dim(&self) -> usize {
        self.energies.len()
    }

    fn single_interval(&self, j: usize, l: usize, dt: f64) -> Result<Complex64> {
        if j == l {
            return Ok(c(1.0, 0.0));
        }
        match self.line {
            Line::Full => {
                self.multi_interval(&[dt], &IndexTuple::new(vec![(j, l)]))
            }
            Line::Half => {
                let diff = self.amplitudes[j] - self.amplitudes[l];
                let decay = diff * diff * PI * dt.abs() / 2.0;
                let phase = -(self.energies[j] - self.energies[l]) * dt;
                Ok(Complex64::from_polar((-decay).exp(), phase))
            }
        }
    }

    fn multi_interval(&self, increments: &[f64], tuple: &IndexTuple) -> Result<Complex64> {
        if self.line != Line::Full {
            return Err(Error::Kind(
                "multi-time correlations are analytic only for flat full-line couplings; \
                 half-line models carry cutoff-dependent phases (use the modulus instead)"
                    .into(),
            ));
        }
        self.check_tuple(increments, tuple)?;
        let sum = self.kernel_quadratic_form(increments, tuple)?;
        let phase = self.phase_sum(increments, tuple);
        Ok(Complex64::from_polar((-0.5 * sum).exp(), phase))
    }
}

/// Multi-time vacuum correlation for a flat full-line model (closed form via
/// the kernel identity); errors on half-line models.
pub fn weyl_multitime_correlation(
    model: &FlatWeylModel,
    grid: &TimeGrid,
    tuple: &IndexTuple,
) -> Result<Complex64> {
    model.multi_interval(&grid.increments(), tuple)
}

/// Modulus of the multi-time vacuum correlation; available for both lines
/// because the real part of the half-line kernel is half the full-line one.
pub fn weyl_multitime_modulus(
    model: &FlatWeylModel,
    grid: &TimeGrid,
    tuple: &IndexTuple,
) -> Result<f64> {
    let increments = grid.increments();
    model.check_tuple(&increments, tuple)?;
    let sum = model.kernel_quadratic_form(&increments, tuple)?;
    let factor = match model.line {
        Line::Full => 0.5,
        Line::Half => 0.25,
    };
    Ok((-factor * sum).exp())
}

/// | |multi-time| - prod_k |single| | for one tuple; the half-line weaker
/// regression condition asserts this vanishes even though phases differ.
pub fn modulus_residual(
    model: &FlatWeylModel,
    grid: &TimeGrid,
    tuple: &IndexTuple,
) -> Result<f64> {
    let lhs = weyl_multitime_modulus(model, grid, tuple)?;
    let mut rhs = 1.0;
    for (&dt, &(j, l)) in grid.increments().iter().zip(tuple.pairs()) {
        rhs *= model.single_interval(j, l, dt)?.norm();
    }
    Ok((lhs - rhs).abs())
}

/// The phase integral
/// int_0^inf |f|^2 [sin(w t0)(1 - cos(w t1)) - sin(w t1)(1 - cos(w t0))] / w^2 dw
/// that obstructs exact regression for half-line flat coupling at two
/// intervals. Nonzero for generic t1 > t0 > 0.
pub fn halfline_phase_defect(
    model: &FlatWeylModel,
    t0: f64,
    t1: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if model.line != Line::Half {
        return Err(Error::Kind("the phase defect is a half-line quantity".into()));
    }
    if t0.is_nan() || t1.is_nan() || t0 < 0.0 || t1 < t0 {
        return Err(Error::Model(format!("need t1 >= t0 >= 0, got ({t0}, {t1})")));
    }
    if t0 == 0.0 || t0 == t1 {
        return Ok(0.0);
    }
    let weight = model.amplitudes[0] * model.amplitudes[0];
    let integrand = |w: f64| {
        if w == 0.0 {
            return 0.0; // removable: the numerator is O(w^3)
        }
        if (w * t1).abs() < 1e-6 {
            // leading series term w t0 t1 (t1 - t0) / 2 keeps the panel
            // evaluations finite arbitrarily close to the origin
            return 0.5 * w * t0 * t1 * (t1 - t0);
        }
        let s0 = (w * t0).sin();
        let s1 = (w * t1).sin();
        let c0 = 2.0 * (0.5 * w * t0).sin().powi(2);
        let c1 = 2.0 * (0.5 * w * t1).sin().powi(2);
        (s0 * c1 - s1 * c0) / (w * w)
    };
    let body = settings.integrate(integrand, 0.0, settings.radius)?;
    Ok(weight * body)
}

/// One boson mode: its frequency and the per-level coupling amplitudes.
#[derive(Debug, Clone)]
pub struct Mode {
    pub frequency: f64,
    pub couplings: Vec<Complex64>,
}

/// A finite collection of modes with a common per-mode Fock truncation.
#[derive(Debug, Clone)]
pub struct ModeSet {
    modes: Vec<Mode>,
    truncation: usize,
}

impl ModeSet {
    pub fn new(modes: Vec<Mode>, truncation: usize) -> Result<Self> {
        if truncation < 2 {
            return Err(Error::Model(format!("truncation must be >= 2, got {truncation}")));
        }
        if modes.is_empty() {
            return Err(Error::Model("mode set must not be empty".into()));
        }
        let d = modes[0].couplings.len();
        for (k, m) in modes.iter().enumerate() {
            if m.frequency == 0.0 {
                return Err(Error::Model(format!("mode {k} has zero frequency")));
            }
            if m.couplings.len() != d {
                return Err(Error::Model(format!("mode {k} has inconsistent coupling count")));
            }
        }
        Ok(Self { modes, truncation })
    }

    pub fn single_mode(frequency: f64, couplings: Vec<Complex64>, truncation: usize) -> Result<Self> {
        Self::new(vec![Mode { frequency, couplings }], truncation)
    }

    /// Riemann discretization of flat coupling |f|^2 = gamma / 8 pi on the
    /// window [-half_width, half_width]: `count` cells with midpoint
    /// frequencies and per-mode amplitude s_j sqrt(gamma delta / 8 pi).
    pub fn flat_window(
        signs: &[i8],
        gamma: f64,
        half_width: f64,
        count: usize,
        truncation: usize,
    ) -> Result<Self> {
        if count == 0 || half_width <= 0.0 || gamma < 0.0 {
            return Err(Error::Model("flat window needs count > 0, width > 0, gamma >= 0".into()));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Model("sign pattern entries must be +1 or -1".into()));
        }
        let delta = 2.0 * half_width / count as f64;
        let amp = (gamma / (8.0 * PI) * delta).sqrt();
        let modes = (0..count)
            .map(|k| {
                let frequency = -half_width + (k as f64 + 0.5) * delta;
                let couplings = signs.iter().map(|&s| c(s as f64 * amp, 0.0)).collect();
                Mode { frequency, couplings }
            })
            .collect();
        Self::new(modes, truncation)
    }

    /// Disjoint union of two mode sets over the same level structure.
    pub fn union(&self, other: &ModeSet) -> Result<Self> {
        if self.truncation != other.truncation {
            return Err(Error::Model("mode sets have different truncations".into()));
        }
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        Self::new(modes, self.truncation)
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }
}

/// Numerical ground truth for the spin-boson dephasing functions: per mode,
/// build the truncated Hamiltonians H_j = w n + conj(f_j) b + f_j b^dag,
/// propagate the vacuum, and take the overlap; the result is the product
/// over modes times the free phase e^{-i (w_j - w_l) t}. Occupation of the
/// top two Fock levels beyond 1e-10 raises `Leakage`.
pub fn truncated_fock_oracle(
    modes: &ModeSet,
    energies: &[f64],
    j: usize,
    l: usize,
    t: f64,
) -> Result<Complex64> {
    let d = energies.len();
    if j >= d || l >= d {
        return Err(Error::Model(format!("level index out of range for d = {d}")));
    }
    if modes.modes().iter().any(|m| m.couplings.len() != d) {
        return Err(Error::Model("mode coupling count does not match level count".into()));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::Model(format!("time must be nonnegative, got {t}")));
    }
    let m = modes.truncation();
    let mut product = c(1.0, 0.0);
    for (mode_index, mode) in modes.modes().iter().enumerate() {
        let build = |f: Complex64| {
            let mut h = CMat::zeros(m, m);
            for n in 0..m {
                h[(n, n)] = c(mode.frequency * n as f64, 0.0);
            }
            for n in 1..m {
                let root = (n as f64).sqrt();
                h[(n - 1, n)] = f.conj() * root; // annihilation part
                h[(n, n - 1)] = f * root; // creation part
            }
            h
        };
        let uj = linalg::herm_exp(&build(mode.couplings[j]), t)?;
        let ul = linalg::herm_exp(&build(mode.couplings[l]), t)?;
        let vj = uj.column(0);
        let vl = ul.column(0);
        for (label, v) in [("j", &vj), ("l", &vl)] {
            let leak = v[m - 1].norm_sqr() + v[m - 2].norm_sqr();
            let _ = label;
            if leak > 1e-10 {
                return Err(Error::Leakage { mode: mode_index, leak });
            }
        }
        let mut overlap = c(0.0, 0.0);
        for r in 0..m {
            overlap += vl[r].conj() * vj[r];
        }
        product *= overlap;
    }
    let phase = -(energies[j] - energies[l]) * t;
    Ok(product * Complex64::from_polar(1.0, phase))
}

/// Trajectory of dephasing matrices for a GSB spec on a time grid.
pub fn gsb_trajectory(
    spec: &GsbSpec,
    times: &[f64],
    settings: &QuadratureSettings,
) -> Result<DephasingTrajectory> {
    let d = spec.dim();
    let matrices = times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(DephasingMatrix::all_ones(d));
            }
            let mut phi = CMat::from_element(d, d, c(1.0, 0.0));
            for j in 0..d {
                for l in (j + 1)..d {
                    let v = dephasing_gsb(spec, j, l, t, settings)?;
                    phi[(j, l)] = v;
                    phi[(l, j)] = v.conj();
                }
            }
            DephasingMatrix::new(phi, t)
        })
        .collect::<Result<Vec<_>>>()?;
    DephasingTrajectory::from_matrices(matrices, TrajectorySource::SpinBoson)
}
