//! Spectral time propagation of an initial bare state, with optional
//! phenomenological decay and dephasing.
//!
//! For real eigenvectors the return probability takes the cosine form
//!
//! ```text
//!     P_s'(t) = Σ_{α,β} ⟨s|α⟩⟨α|s'⟩⟨s'|β⟩⟨β|s⟩ cos((ω_α − ω_β) · 2π·10⁻³ · t)
//! ```
//!
//! with ω in kHz and t in μs. Two optional damping channels model the
//! observed loss of contrast: a uniform amplitude decay e^{−t/τ_decay}
//! applied to all populations (radiative loss of the whole manifold) and an
//! exponential damping e^{−t/τ_φ} of the dressed-basis cross terms (α ≠ β)
//! only, which relaxes oscillations toward the time-averaged distribution
//! without moving population between sites.

use crate::error::{Error, Result};
use crate::spectral::DressedSpectrum;

/// The single place where ordinary-frequency kHz and μs meet angular phase:
/// phase = 2π · 10⁻³ · f[kHz] · t[μs].
pub const ANGULAR_KHZ_US: f64 = 2.0 * std::f64::consts::PI * 1.0e-3;

/// Phase accumulated by an eigenfrequency in kHz over a time in μs.
#[inline]
pub fn angular_phase(frequency_khz: f64, time_us: f64) -> f64 {
    ANGULAR_KHZ_US * frequency_khz * time_us
}

/// Phenomenological decoherence settings. `None` everywhere means closed-system
/// evolution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecoherenceParams {
    survival_time_us: Option<f64>,
    dephasing_time_us: Option<f64>,
    background_bin: bool,
}

impl DecoherenceParams {
    /// Closed-system evolution: no decay, no dephasing.
    pub fn closed() -> Self {
        Self::default()
    }

    /// Validates decoherence times (strictly positive when present).
    ///
    /// `background_bin` reports decayed population in an extra trajectory
    /// slot, mimicking decay products that show up as background in the
    /// ionization signal.
    pub fn new(
        survival_time_us: Option<f64>,
        dephasing_time_us: Option<f64>,
        background_bin: bool,
    ) -> Result<Self> {
        for (name, t) in [
            ("survival_time_us", survival_time_us),
            ("dephasing_time_us", dephasing_time_us),
        ] {
            if let Some(t) = t {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(Error::Spec(format!(
                        "{name} must be strictly positive and finite, got {t}"
                    )));
                }
            }
        }
        Ok(Self {
            survival_time_us,
            dephasing_time_us,
            background_bin,
        })
    }

    pub fn survival_time_us(&self) -> Option<f64> {
        self.survival_time_us
    }

    pub fn dephasing_time_us(&self) -> Option<f64> {
        self.dephasing_time_us
    }

    pub fn background_bin(&self) -> bool {
        self.background_bin
    }

    fn is_closed(&self) -> bool {
        self.survival_time_us.is_none() && self.dephasing_time_us.is_none()
    }
}

/// Per-site probabilities over a time grid, plus total surviving fraction.
///
/// `populations[k]` holds the M site probabilities at `times_us[k]`, followed
/// by one background slot when the trajectory was computed with
/// `background_bin` set.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrajectory {
    times_us: Vec<f64>,
    populations: Vec<Vec<f64>>,
    survival: Vec<f64>,
    n_sites: usize,
    has_background: bool,
    normalized: bool,
}

impl PopulationTrajectory {
    pub fn times_us(&self) -> &[f64] {
        &self.times_us
    }

    /// Number of chain sites M (excludes any background slot).
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn has_background(&self) -> bool {
        self.has_background
    }

    /// Whether site populations are fractional (renormalized by survival).
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// All population slots at one time point (sites, then background if any).
    pub fn populations_at(&self, time_index: usize) -> &[f64] {
        &self.populations[time_index]
    }

    /// Site populations only at one time point.
    pub fn site_populations_at(&self, time_index: usize) -> &[f64] {
        &self.populations[time_index][..self.n_sites]
    }

    /// Background slot at one time point, when present.
    pub fn background_at(&self, time_index: usize) -> Option<f64> {
        self.has_background
            .then(|| self.populations[time_index][self.n_sites])
    }

    /// Total surviving fraction at each time.
    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    /// Time series of one site's population.
    pub fn site_series(&self, site_index: usize) -> Result<Vec<f64>> {
        if site_index >= self.n_sites {
            return Err(Error::IndexOutOfRange {
                what: "site",
                index: site_index,
                len: self.n_sites,
            });
        }
        Ok(self.populations.iter().map(|p| p[site_index]).collect())
    }

    /// Renormalizes site populations by the surviving fraction pointwise, as
    /// when an experiment normalizes the total signal to unity at every time.
    ///
    /// Idempotent. The background slot, when present, keeps reporting the
    /// absolute decayed fraction (dividing it by survival would push it out
    /// of [0, 1]).
    pub fn fractionalize(&self) -> Result<PopulationTrajectory> {
        if self.normalized {
            return Ok(self.clone());
        }
        if let Some((k, &s)) = self
            .survival
            .iter()
            .enumerate()
            .find(|(_, &s)| !(s > 0.0))
        {
            return Err(Error::Degenerate(format!(
                "survival is {s} at t = {} μs; cannot renormalize",
                self.times_us[k]
            )));
        }
        let mut populations = self.populations.clone();
        for (row, &s) in populations.iter_mut().zip(self.survival.iter()) {
            for p in row.iter_mut().take(self.n_sites) {
                *p = (*p / s).min(1.0);
            }
        }
        Ok(PopulationTrajectory {
            times_us: self.times_us.clone(),
            populations,
            survival: self.survival.clone(),
            n_sites: self.n_sites,
            has_background: self.has_background,
            normalized: true,
        })
    }
}

/// Propagates a bare initial state through the dressed spectrum, returning
/// per-site populations on the supplied time grid.
///
/// The grid must be finite and strictly increasing. Negative times are
/// accepted for closed-system evolution (populations are even in t); with
/// decay or dephasing active they are rejected, since backward damping would
/// push populations out of [0, 1].
pub fn evolve(
    spectrum: &DressedSpectrum,
    initial_site: usize,
    times_us: &[f64],
    decoherence: &DecoherenceParams,
) -> Result<PopulationTrajectory> {
    let m = spectrum.dim();
    if initial_site >= m {
        return Err(Error::IndexOutOfRange {
            what: "site",
            index: initial_site,
            len: m,
        });
    }
    if times_us.is_empty() {
        return Err(Error::TimeGrid("empty time grid".into()));
    }
    if times_us.iter().any(|t| !t.is_finite()) {
        return Err(Error::TimeGrid("non-finite time value".into()));
    }
    if !times_us.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::TimeGrid(
            "time grid must be strictly increasing".into(),
        ));
    }
    if !decoherence.is_closed() && times_us[0] < 0.0 {
        return Err(Error::TimeGrid(
            "negative times require closed-system evolution".into(),
        ));
    }

    let vectors = spectrum.eigenvectors();
    let omegas = spectrum.eigenvalues_khz();
    // initial-state amplitudes in the dressed basis: a_α = ⟨α|initial⟩
    let initial_amps: Vec<f64> = (0..m).map(|alpha| vectors[(initial_site, alpha)]).collect();
    // weights[s][α] = ⟨initial|α⟩⟨α|s⟩; diagonal_population[s] is the
    // time-averaged (dephased) limit Σ_α weights²
    let weights: Vec<Vec<f64>> = (0..m)
        .map(|site| {
            (0..m)
                .map(|alpha| initial_amps[alpha] * vectors[(site, alpha)])
                .collect()
        })
        .collect();
    let diagonal_population: Vec<f64> = weights
        .iter()
        .map(|w| w.iter().map(|x| x * x).sum())
        .collect();

    let slots = if decoherence.background_bin() { m + 1 } else { m };
    let mut populations = Vec::with_capacity(times_us.len());
    let mut survival = Vec::with_capacity(times_us.len());
    let mut cos_phases = vec![0.0; m];
    let mut sin_phases = vec![0.0; m];

    for &t in times_us {
        for alpha in 0..m {
            let phase = angular_phase(omegas[alpha], t);
            cos_phases[alpha] = phase.cos();
            sin_phases[alpha] = phase.sin();
        }
        let coherence_damp = decoherence
            .dephasing_time_us()
            .map_or(1.0, |tau| (-t / tau).exp());
        let survive = decoherence
            .survival_time_us()
            .map_or(1.0, |tau| (-t / tau).exp());

        let mut row = Vec::with_capacity(slots);
        for site in 0..m {
            let w = &weights[site];
            let mut real = 0.0;
            let mut imag = 0.0;
            for alpha in 0..m {
                real += w[alpha] * cos_phases[alpha];
                imag += w[alpha] * sin_phases[alpha];
            }
            // closed-system probability, then cross terms damped toward the
            // diagonal (time-averaged) distribution
            let coherent = real * real + imag * imag;
            let diagonal = diagonal_population[site];
            let p = (diagonal + coherence_damp * (coherent - diagonal)) * survive;
            debug_assert!(p > -1e-12 && p < 1.0 + 1e-12, "population {p} out of range");
            row.push(p.clamp(0.0, 1.0));
        }
        if decoherence.background_bin() {
            row.push(1.0 - survive);
        }
        populations.push(row);
        survival.push(survive);
    }

    Ok(PopulationTrajectory {
        times_us: times_us.to_vec(),
        populations,
        survival,
        n_sites: m,
        has_background: decoherence.background_bin(),
        normalized: false,
    })
}

/// Uniform time grid from 0 to `t_max_us` inclusive.
pub fn uniform_grid(t_max_us: f64, samples: usize) -> Result<Vec<f64>> {
    if !(t_max_us > 0.0) || !t_max_us.is_finite() {
        return Err(Error::TimeGrid(format!(
            "t_max must be positive and finite, got {t_max_us}"
        )));
    }
    if samples < 2 {
        return Err(Error::TimeGrid(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let step = t_max_us / (samples - 1) as f64;
    Ok((0..samples).map(|k| k as f64 * step).collect())
}

/// Uniform grid over [0, t_max] dense enough to resolve every beat note of
/// the spectrum: at least 20 samples per period of the largest eigenvalue
/// gap, and never fewer than 64 samples overall.
pub fn oscillation_resolved_grid(spectrum: &DressedSpectrum, t_max_us: f64) -> Result<Vec<f64>> {
    let omegas = spectrum.eigenvalues_khz();
    let max_gap_khz = omegas[omegas.len() - 1] - omegas[0];
    let samples = if max_gap_khz > 0.0 {
        // fastest beat period in μs is 10³ / gap[kHz]
        let period_us = 1.0e3 / max_gap_khz;
        ((t_max_us / period_us * 20.0).ceil() as usize + 1).max(64)
    } else {
        64
    };
    uniform_grid(t_max_us, samples)
}
