//! Independent numerical oracles for cross-checking the library.
//!
//! Nothing here shares code with the implementation paths under test: the
//! eigensolver is a dense cyclic-Jacobi iteration (the library uses
//! tridiagonal QL) and the propagator is a fixed-step fourth-order
//! integrator of the Schrödinger equation (the library uses the spectral
//! cosine form).

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Angular factor joining kHz frequencies and μs times (duplicated here on
/// purpose — the oracle must not import the library's constant).
pub const ORACLE_ANGULAR: f64 = 2.0 * std::f64::consts::PI * 1.0e-3;

/// Dense symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted ascending with matching eigenvector columns.
/// Signs are not normalized; compare subspaces or squared amplitudes.
pub fn jacobi_eigen(matrix: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = matrix.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-300);

    for _sweep in 0..200 {
        let mut off_norm = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off_norm += a[(p, q)] * a[(p, q)];
            }
        }
        if off_norm.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- Gᵀ A G with G the rotation in the (p, q) plane
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[(k, k)]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, k)];
        }
    }
    (eigenvalues, vectors)
}

/// Mid-gap splitting read straight off the Jacobi eigenvalues.
pub fn jacobi_edge_splitting(matrix: &DMatrix<f64>) -> f64 {
    let (evals, _) = jacobi_eigen(matrix);
    let m = evals.len();
    evals[m / 2] - evals[m / 2 - 1]
}

/// Tridiagonal Hamiltonian for the direct integrator: main diagonal and
/// first off-diagonal, in kHz.
#[derive(Debug, Clone)]
pub struct TridiagonalKhz {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl TridiagonalKhz {
    pub fn from_dense(matrix: &DMatrix<f64>) -> Self {
        let n = matrix.nrows();
        Self {
            diag: (0..n).map(|i| matrix[(i, i)]).collect(),
            off: (0..n - 1).map(|i| matrix[(i, i + 1)]).collect(),
        }
    }

    fn apply(&self, state: &[Complex64], out: &mut [Complex64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut acc = state[i] * self.diag[i];
            if i > 0 {
                acc += state[i - 1] * self.off[i - 1];
            }
            if i + 1 < n {
                acc += state[i + 1] * self.off[i];
            }
            out[i] = acc;
        }
    }

    /// Largest angular frequency scale (rad/μs), from Gershgorin disks.
    fn angular_radius(&self) -> f64 {
        let n = self.diag.len();
        let mut bound = 0.0f64;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i < n - 1 { self.off[i].abs() } else { 0.0 };
            bound = bound.max(self.diag[i].abs() + left + right);
        }
        ORACLE_ANGULAR * bound.max(1.0)
    }
}

/// Fixed-step fourth-order (classical Runge–Kutta) integration of
/// i dψ/dt = 2π·10⁻³ H ψ from t = 0, reporting |ψ|² at each requested time.
///
/// `times_us` must be non-negative and ascending. The step is chosen so the
/// fastest phase advances ≲ 0.01 rad per step, keeping the global population
/// error well below 1e−7 over hundreds of μs.
pub fn rk4_populations(
    hamiltonian: &TridiagonalKhz,
    initial_site: usize,
    times_us: &[f64],
) -> Vec<Vec<f64>> {
    let n = hamiltonian.diag.len();
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    psi[initial_site] = Complex64::new(1.0, 0.0);

    let dt_max = 0.01 / hamiltonian.angular_radius();
    let mut results = Vec::with_capacity(times_us.len());
    let mut t = 0.0;

    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut stage = k1.clone();
    let mut h_psi = k1.clone();

    let derivative =
        |state: &[Complex64], out: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>| {
            hamiltonian.apply(state, scratch);
            for (o, h) in out.iter_mut().zip(scratch.iter()) {
                *o = Complex64::new(0.0, -ORACLE_ANGULAR) * h;
            }
        };

    for &target in times_us {
        assert!(target >= t, "oracle integrates forward from 0 only");
        while t < target {
            let span = target - t;
            let steps = (span / dt_max).ceil().max(1.0);
            let dt = span / steps;
            for _ in 0..steps as usize {
                derivative(&psi, &mut k1, &mut h_psi);
                for i in 0..n {
                    stage[i] = psi[i] + k1[i] * (dt / 2.0);
                }
                derivative(&stage, &mut k2, &mut h_psi);
                for i in 0..n {
                    stage[i] = psi[i] + k2[i] * (dt / 2.0);
                }
                derivative(&stage, &mut k3, &mut h_psi);
                for i in 0..n {
                    stage[i] = psi[i] + k3[i] * dt;
                }
                derivative(&stage, &mut k4, &mut h_psi);
                for i in 0..n {
                    psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
                }
            }
            t = target;
        }
        results.push(psi.iter().map(|c| c.norm_sqr()).collect());
    }
    results
}

/// Random chain parameters in the stress-test ranges: couplings in
/// [50, 1000] kHz, per-bond detunings in [−500, 500] kHz.
pub fn random_chain(rng: &mut impl Rng, sites: usize) -> (Vec<u32>, Vec<f64>, Vec<f64>) {
    let labels: Vec<u32> = (1..=sites as u32).collect();
    let couplings: Vec<f64> = (0..sites - 1)
        .map(|_| rng.random_range(50.0..1000.0))
        .collect();
    let detunings: Vec<f64> = (0..sites - 1)
        .map(|_| rng.random_range(-500.0..500.0))
        .collect();
    (labels, couplings, detunings)
}

/// Pearson correlation coefficient of two equal-length series.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt())
}
