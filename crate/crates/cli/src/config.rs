//! Declarative run configuration: one TOML file describes one experiment.
//!
//! Unknown keys are rejected everywhere so typos surface as config errors
//! instead of silently ignored settings.

use serde::{Deserialize, Serialize};
use sshchain::{DecoherenceParams, LatticeSpec, RampParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Evolve,
    SweepEdgeDetuning,
    SweepProtection,
    SplittingVsSize,
    DressedScan,
    SfiPipeline,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Evolve => "evolve",
            Experiment::SweepEdgeDetuning => "sweep_edge_detuning",
            Experiment::SweepProtection => "sweep_protection",
            Experiment::SplittingVsSize => "splitting_vs_size",
            Experiment::DressedScan => "dressed_scan",
            Experiment::SfiPipeline => "sfi_pipeline",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Initial bare state, by site label (evolve, sfi_pipeline).
    pub initial_site: Option<u32>,
    /// Write fractional (survival-renormalized) populations (evolve).
    #[serde(default)]
    pub normalize: bool,
    pub lattice: Option<LatticeConfig>,
    pub time: Option<TimeConfig>,
    pub decoherence: Option<DecoherenceConfig>,
    pub sweep: Option<SweepConfig>,
    pub scan: Option<ScanConfig>,
    pub sfi: Option<SfiConfig>,
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub site_labels: Vec<u32>,
    pub couplings_khz: Vec<f64>,
    /// Defaults to all-resonant when omitted.
    pub bond_detunings_khz: Option<Vec<f64>>,
}

impl LatticeConfig {
    pub fn build(&self) -> Result<LatticeSpec, CliError> {
        let detunings = self
            .bond_detunings_khz
            .clone()
            .unwrap_or_else(|| vec![0.0; self.couplings_khz.len()]);
        LatticeSpec::new(self.site_labels.clone(), self.couplings_khz.clone(), detunings)
            .map_err(CliError::from)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_max_us: Option<f64>,
    pub samples: Option<usize>,
    /// Explicit grid; mutually exclusive with t_max_us/samples.
    pub grid_us: Option<Vec<f64>>,
}

impl TimeConfig {
    pub fn build_grid(&self) -> Result<Vec<f64>, CliError> {
        match (&self.grid_us, self.t_max_us, self.samples) {
            (Some(grid), None, None) => Ok(grid.clone()),
            (None, Some(t_max), Some(samples)) => {
                sshchain::uniform_grid(t_max, samples).map_err(CliError::from)
            }
            _ => Err(CliError::Config(
                "time: give either grid_us, or t_max_us together with samples".into(),
            )),
        }
    }

    pub fn t_max(&self) -> Option<f64> {
        self.t_max_us
            .or_else(|| self.grid_us.as_ref().and_then(|g| g.last().copied()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceConfig {
    pub survival_time_us: Option<f64>,
    pub dephasing_time_us: Option<f64>,
    #[serde(default)]
    pub background_bin: bool,
}

impl DecoherenceConfig {
    pub fn build(&self) -> Result<DecoherenceParams, CliError> {
        DecoherenceParams::new(
            self.survival_time_us,
            self.dephasing_time_us,
            self.background_bin,
        )
        .map_err(CliError::from)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub bond_index: Option<usize>,
    /// Swept detunings in kHz, strictly monotone.
    pub values_khz: Option<Vec<f64>>,
    pub probe_time_us: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Chain sizes for splitting_vs_size (even, ≥ 4).
    pub sizes: Option<Vec<usize>>,
    /// Ω_S/Ω_W ratios for dressed_scan.
    pub ratios: Option<Vec<f64>>,
    /// Chain size for dressed_scan.
    pub size: Option<usize>,
    pub omega_weak_khz: Option<f64>,
    pub omega_strong_khz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SfiConfig {
    pub peak_field_v_per_cm: Option<f64>,
    pub time_constant_us: Option<f64>,
    pub width_us: Option<f64>,
    /// Additive Gaussian noise, as a fraction of the peak observed signal.
    pub noise_level: Option<f64>,
    pub grid_t_max_us: Option<f64>,
    pub grid_samples: Option<usize>,
    pub quantum_defect: Option<f64>,
    /// Include the broad background trace in the unmixing basis.
    #[serde(default)]
    pub background: bool,
}

impl SfiConfig {
    pub fn ramp(&self) -> Result<RampParams, CliError> {
        RampParams::new(
            self.peak_field_v_per_cm.unwrap_or(40.0),
            self.time_constant_us.unwrap_or(5.0),
        )
        .map_err(CliError::from)
    }

    pub fn width_us(&self) -> f64 {
        self.width_us.unwrap_or(0.3)
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level.unwrap_or(0.0)
    }

    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        sshchain::uniform_grid(
            self.grid_t_max_us.unwrap_or(16.0),
            self.grid_samples.unwrap_or(1601),
        )
        .map_err(CliError::from)
    }

    pub fn quantum_defect(&self) -> f64 {
        self.quantum_defect
            .unwrap_or(sshchain::sfi::TRIPLET_S_QUANTUM_DEFECT)
    }
}

impl Default for SfiConfig {
    fn default() -> Self {
        Self {
            peak_field_v_per_cm: None,
            time_constant_us: None,
            width_us: None,
            noise_level: None,
            grid_t_max_us: None,
            grid_samples: None,
            quantum_defect: None,
            background: false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    pub stem: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("unreadable config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Experiment/field cross-validation: every experiment names exactly the
    /// blocks it needs, and a missing block is reported by field path.
    fn validate(&self) -> Result<(), CliError> {
        let mut missing: Vec<&str> = Vec::new();
        let need = |cond: bool, name: &'static str, missing: &mut Vec<&str>| {
            if !cond {
                missing.push(name);
            }
        };
        match self.experiment {
            Experiment::Evolve => {
                need(self.lattice.is_some(), "lattice", &mut missing);
                need(self.initial_site.is_some(), "initial_site", &mut missing);
                need(self.time.is_some(), "time", &mut missing);
            }
            Experiment::SweepEdgeDetuning => {
                need(self.lattice.is_some(), "lattice", &mut missing);
                let sweep = self.sweep.as_ref();
                need(
                    sweep.is_some_and(|s| s.bond_index.is_some()),
                    "sweep.bond_index",
                    &mut missing,
                );
                need(
                    sweep.is_some_and(|s| s.values_khz.is_some()),
                    "sweep.values_khz",
                    &mut missing,
                );
            }
            Experiment::SweepProtection => {
                need(self.lattice.is_some(), "lattice", &mut missing);
                let sweep = self.sweep.as_ref();
                need(
                    sweep.is_some_and(|s| s.bond_index.is_some()),
                    "sweep.bond_index",
                    &mut missing,
                );
                need(
                    sweep.is_some_and(|s| s.values_khz.is_some()),
                    "sweep.values_khz",
                    &mut missing,
                );
                need(
                    sweep.is_some_and(|s| s.probe_time_us.is_some()),
                    "sweep.probe_time_us",
                    &mut missing,
                );
            }
            Experiment::SplittingVsSize => {
                let scan = self.scan.as_ref();
                need(scan.is_some_and(|s| s.sizes.is_some()), "scan.sizes", &mut missing);
                need(
                    scan.is_some_and(|s| s.omega_weak_khz.is_some()),
                    "scan.omega_weak_khz",
                    &mut missing,
                );
                need(
                    scan.is_some_and(|s| s.omega_strong_khz.is_some()),
                    "scan.omega_strong_khz",
                    &mut missing,
                );
            }
            Experiment::DressedScan => {
                let scan = self.scan.as_ref();
                need(scan.is_some_and(|s| s.ratios.is_some()), "scan.ratios", &mut missing);
                need(scan.is_some_and(|s| s.size.is_some()), "scan.size", &mut missing);
                need(
                    scan.is_some_and(|s| s.omega_weak_khz.is_some()),
                    "scan.omega_weak_khz",
                    &mut missing,
                );
            }
            Experiment::SfiPipeline => {
                need(self.lattice.is_some(), "lattice", &mut missing);
                need(self.initial_site.is_some(), "initial_site", &mut missing);
                need(self.time.is_some(), "time", &mut missing);
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "experiment '{}' is missing required fields: {}",
                self.experiment.name(),
                missing.join(", ")
            )))
        }
    }
}
