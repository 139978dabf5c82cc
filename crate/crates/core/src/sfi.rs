//! Selective-field-ionization detection model: ionization thresholds, ramp
//! inversion, synthetic signal traces, and non-negative unmixing of a mixed
//! trace into per-state populations.
//!
//! A triplet-S level with principal quantum number n and quantum defect δ
//! ionizes adiabatically at a field of 1/(16 (n−δ)⁴) atomic units. A ramped
//! field E(t) = E_p (1 − e^{−t/τ}) converts that threshold into an arrival
//! time, so each level produces a peak at a characteristic position; higher
//! n ionizes earlier. Peaks are modeled as unit-area Gaussians of
//! configurable width, and populations are recovered from an observed trace
//! by non-negative least squares against the per-level basis traces.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Atomic unit of electric field, in V/cm.
pub const FIELD_ATOMIC_UNIT_V_PER_CM: f64 = 5.142e9;

/// Quantum defect of strontium n³S₁ levels.
pub const TRIPLET_S_QUANTUM_DEFECT: f64 = 3.371;

/// Ionization ramp E(t) = E_p (1 − e^{−t/τ}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampParams {
    peak_field_v_per_cm: f64,
    time_constant_us: f64,
}

impl RampParams {
    pub fn new(peak_field_v_per_cm: f64, time_constant_us: f64) -> Result<Self> {
        if !(peak_field_v_per_cm > 0.0) || !peak_field_v_per_cm.is_finite() {
            return Err(Error::Spec(format!(
                "ramp peak field must be strictly positive, got {peak_field_v_per_cm}"
            )));
        }
        if !(time_constant_us > 0.0) || !time_constant_us.is_finite() {
            return Err(Error::Spec(format!(
                "ramp time constant must be strictly positive, got {time_constant_us}"
            )));
        }
        Ok(Self {
            peak_field_v_per_cm,
            time_constant_us,
        })
    }

    pub fn peak_field_v_per_cm(&self) -> f64 {
        self.peak_field_v_per_cm
    }

    pub fn time_constant_us(&self) -> f64 {
        self.time_constant_us
    }

    /// Instantaneous ramp field at a time after turn-on.
    pub fn field_at(&self, t_us: f64) -> f64 {
        self.peak_field_v_per_cm * (1.0 - (-t_us / self.time_constant_us).exp())
    }
}

/// Adiabatic ionization threshold of an n-level with the given quantum
/// defect: 1/(16 (n−δ)⁴) atomic units, returned in V/cm.
pub fn ionization_field(n: u32, quantum_defect: f64) -> Result<f64> {
    let effective_n = n as f64 - quantum_defect;
    if !(effective_n > 0.0) {
        return Err(Error::Domain(format!(
            "effective quantum number n − δ = {effective_n} must be positive"
        )));
    }
    Ok(FIELD_ATOMIC_UNIT_V_PER_CM / (16.0 * effective_n.powi(4)))
}

/// Time at which the ramp reaches a given field: t = −τ ln(1 − E/E_p).
/// Strictly increasing in the field. Fields at or above the ramp peak are
/// never reached and signal a lattice/ramp mismatch.
pub fn ionization_time(field_v_per_cm: f64, ramp: &RampParams) -> Result<f64> {
    if !(field_v_per_cm > 0.0) || !field_v_per_cm.is_finite() {
        return Err(Error::Domain(format!(
            "ionization field must be strictly positive, got {field_v_per_cm}"
        )));
    }
    if field_v_per_cm >= ramp.peak_field_v_per_cm {
        return Err(Error::RampMismatch {
            field: field_v_per_cm,
            peak: ramp.peak_field_v_per_cm,
        });
    }
    Ok(-ramp.time_constant_us * (1.0 - field_v_per_cm / ramp.peak_field_v_per_cm).ln())
}

/// A simulated ionization signal on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SfiTrace {
    times_us: Vec<f64>,
    signal: Vec<f64>,
    label: Option<u32>,
}

impl SfiTrace {
    /// Validates grid uniformity and signal non-negativity.
    pub fn new(times_us: Vec<f64>, signal: Vec<f64>, label: Option<u32>) -> Result<Self> {
        if times_us.len() < 2 || times_us.len() != signal.len() {
            return Err(Error::Spec(format!(
                "trace needs matching times and signal of length ≥ 2, got {} and {}",
                times_us.len(),
                signal.len()
            )));
        }
        let dt = times_us[1] - times_us[0];
        if !(dt > 0.0) {
            return Err(Error::TimeGrid("trace grid must be increasing".into()));
        }
        for w in times_us.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::TimeGrid("trace grid must be uniform".into()));
            }
        }
        if signal.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Spec("trace signal must be finite and non-negative".into()));
        }
        Ok(Self {
            times_us,
            signal,
            label,
        })
    }

    pub fn times_us(&self) -> &[f64] {
        &self.times_us
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn label(&self) -> Option<u32> {
        self.label
    }

    /// Trapezoidal integral of the signal over the grid.
    pub fn integral(&self) -> f64 {
        let dt = self.times_us[1] - self.times_us[0];
        let n = self.signal.len();
        let interior: f64 = self.signal[1..n - 1].iter().sum();
        dt * (0.5 * (self.signal[0] + self.signal[n - 1]) + interior)
    }

    fn same_grid_as(&self, other: &SfiTrace) -> bool {
        self.times_us.len() == other.times_us.len()
            && self
                .times_us
                .iter()
                .zip(&other.times_us)
                .all(|(a, b)| (a - b).abs() < 1e-9)
    }
}

/// Synthesizes the ionization trace of one level: a unit-area Gaussian of
/// standard deviation `width_us` centered at the level's ramp arrival time,
/// sampled on the given uniform grid.
pub fn synthesize_trace(
    n: u32,
    quantum_defect: f64,
    ramp: &RampParams,
    width_us: f64,
    grid_us: &[f64],
) -> Result<SfiTrace> {
    if !(width_us > 0.0) || !width_us.is_finite() {
        return Err(Error::Spec(format!(
            "trace width must be strictly positive, got {width_us}"
        )));
    }
    let center = ionization_time(ionization_field(n, quantum_defect)?, ramp)?;
    let signal = gaussian_on_grid(grid_us, center, width_us);
    SfiTrace::new(grid_us.to_vec(), signal, Some(n))
}

/// Fixed broad trace standing in for decay products that ionize over a wide
/// range of ramp times: a unit-area Gaussian centered at one ramp time
/// constant with standard deviation equal to the time constant.
pub fn broad_background_trace(ramp: &RampParams, grid_us: &[f64]) -> Result<SfiTrace> {
    let signal = gaussian_on_grid(grid_us, ramp.time_constant_us, ramp.time_constant_us);
    SfiTrace::new(grid_us.to_vec(), signal, None)
}

fn gaussian_on_grid(grid_us: &[f64], center_us: f64, width_us: f64) -> Vec<f64> {
    let norm = 1.0 / (width_us * (2.0 * std::f64::consts::PI).sqrt());
    grid_us
        .iter()
        .map(|&t| {
            let z = (t - center_us) / width_us;
            norm * (-0.5 * z * z).exp()
        })
        .collect()
}

/// Weighted sum of basis traces sharing one grid.
pub fn mix_traces(weights: &[f64], basis: &[SfiTrace]) -> Result<SfiTrace> {
    if weights.len() != basis.len() || basis.is_empty() {
        return Err(Error::Spec(format!(
            "need one weight per basis trace, got {} weights and {} traces",
            weights.len(),
            basis.len()
        )));
    }
    for trace in &basis[1..] {
        if !trace.same_grid_as(&basis[0]) {
            return Err(Error::TimeGrid("basis traces must share one grid".into()));
        }
    }
    let n = basis[0].signal.len();
    let mut signal = vec![0.0; n];
    for (w, trace) in weights.iter().zip(basis) {
        for (s, &b) in signal.iter_mut().zip(&trace.signal) {
            *s += w * b;
        }
    }
    SfiTrace::new(basis[0].times_us.clone(), signal, None)
}

/// Populations recovered by unmixing an observed trace.
#[derive(Debug, Clone, PartialEq)]
pub struct UnmixResult {
    /// Raw non-negative least-squares coefficients, one per basis trace.
    pub raw: Vec<f64>,
    /// Raw coefficients renormalized to sum to one.
    pub normalized: Vec<f64>,
    /// Coefficient of the background trace, when one was supplied.
    pub background: Option<f64>,
    /// Euclidean norm of the unexplained residual signal.
    pub residual: f64,
}

/// Recovers per-state populations from an observed trace by non-negative
/// least squares against the basis traces, optionally with one extra
/// background component.
///
/// All traces must share the observed grid and the basis must be numerically
/// independent; collinear columns are rejected with the offending pair named
/// (an index equal to `basis.len()` refers to the background trace). The
/// normalized coefficients cover the state basis only — the background
/// coefficient absorbs signal that is not attributable to any state.
pub fn unmix(
    observed: &SfiTrace,
    basis: &[SfiTrace],
    background: Option<&SfiTrace>,
) -> Result<UnmixResult> {
    if basis.is_empty() {
        return Err(Error::Spec("unmixing needs at least one basis trace".into()));
    }
    let mut columns: Vec<&SfiTrace> = basis.iter().collect();
    if let Some(bg) = background {
        columns.push(bg);
    }
    for trace in &columns {
        if !trace.same_grid_as(observed) {
            return Err(Error::TimeGrid(
                "basis traces must share the observed trace's grid".into(),
            ));
        }
    }

    let k = columns.len();
    let mut gram = DMatrix::zeros(k, k);
    let mut rhs = DVector::zeros(k);
    for i in 0..k {
        for j in i..k {
            let g = dot(&columns[i].signal, &columns[j].signal);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
        rhs[i] = dot(&columns[i].signal, &observed.signal);
    }

    for (i, col) in columns.iter().enumerate() {
        if gram[(i, i)] <= 0.0 {
            return Err(Error::Degenerate(format!(
                "basis trace {i} (label {:?}) is identically zero",
                col.label
            )));
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            let correlation = gram[(i, j)] / (gram[(i, i)] * gram[(j, j)]).sqrt();
            if correlation.abs() > 1.0 - 1e-10 {
                return Err(Error::IllPosedBasis {
                    first: i,
                    second: j,
                    correlation,
                });
            }
        }
    }

    let coefficients = nnls(&gram, &rhs)?;

    let raw: Vec<f64> = coefficients[..basis.len()].to_vec();
    let raw_sum: f64 = raw.iter().sum();
    if raw_sum <= 0.0 {
        return Err(Error::Degenerate(
            "observed trace has no overlap with the basis".into(),
        ));
    }
    let normalized: Vec<f64> = raw.iter().map(|c| c / raw_sum).collect();

    // residual in signal space
    let n = observed.signal.len();
    let mut residual_sq = 0.0;
    for s in 0..n {
        let mut model = 0.0;
        for (c, col) in coefficients.iter().zip(&columns) {
            model += c * col.signal[s];
        }
        residual_sq += (observed.signal[s] - model).powi(2);
    }

    Ok(UnmixResult {
        raw,
        normalized,
        background: background.map(|_| coefficients[basis.len()]),
        residual: residual_sq.sqrt(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lawson–Hanson active-set non-negative least squares on the normal
/// equations Gx = b with G = AᵀA, b = Aᵀy.
fn nnls(gram: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<Vec<f64>> {
    let k = rhs.len();
    let tolerance = 1e-12 * gram.diagonal().amax();
    let mut x = vec![0.0; k];
    let mut passive = vec![false; k];

    for _ in 0..(8 * k.max(4)) {
        // gradient of ½‖y − Ax‖²; most positive component outside the
        // passive set enters next
        let mut best: Option<(usize, f64)> = None;
        for j in 0..k {
            if passive[j] {
                continue;
            }
            let mut w = rhs[j];
            for i in 0..k {
                w -= gram[(j, i)] * x[i];
            }
            if w > tolerance && best.map_or(true, |(_, bw)| w > bw) {
                best = Some((j, w));
            }
        }
        let Some((entering, _)) = best else {
            return Ok(x);
        };
        passive[entering] = true;

        loop {
            let active: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let z = solve_subproblem(gram, rhs, &active)?;
            if z.iter().all(|&v| v > 0.0) {
                for (idx, &j) in active.iter().enumerate() {
                    x[j] = z[idx];
                }
                break;
            }
            // step toward z until the first coefficient hits zero
            let mut alpha = 1.0f64;
            for (idx, &j) in active.iter().enumerate() {
                if z[idx] <= 0.0 {
                    let denom = x[j] - z[idx];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for (idx, &j) in active.iter().enumerate() {
                x[j] += alpha * (z[idx] - x[j]);
                if x[j] <= tolerance.max(f64::EPSILON) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    Ok(x)
}

fn solve_subproblem(gram: &DMatrix<f64>, rhs: &DVector<f64>, active: &[usize]) -> Result<Vec<f64>> {
    let m = active.len();
    let mut sub = DMatrix::zeros(m, m);
    let mut sub_rhs = DVector::zeros(m);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            sub[(r, c)] = gram[(i, j)];
        }
        sub_rhs[r] = rhs[i];
    }
    let chol = sub.cholesky().ok_or_else(|| {
        Error::Convergence("normal equations lost positive definiteness during unmixing".into())
    })?;
    Ok(chol.solve(&sub_rhs).iter().copied().collect())
}
