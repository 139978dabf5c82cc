//! Property and oracle cross-check suite: invariants that must hold for any
//! chain, verified against independent implementations where one exists.

mod common;

use common::{jacobi_eigen, pearson_correlation, rk4_populations, TridiagonalKhz};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use sshchain::dynamics::{angular_phase, evolve, uniform_grid, DecoherenceParams};
use sshchain::{build_hamiltonian, diagonalize, LatticeSpec};

fn chain_strategy(
    max_sites: usize,
    with_detunings: bool,
) -> impl Strategy<Value = LatticeSpec> {
    (2..=max_sites).prop_flat_map(move |sites| {
        let couplings = proptest::collection::vec(50.0..1000.0f64, sites - 1);
        let detunings = if with_detunings {
            proptest::collection::vec(-500.0..500.0f64, sites - 1).boxed()
        } else {
            Just(vec![0.0; sites - 1]).boxed()
        };
        (couplings, detunings).prop_map(move |(c, d)| {
            LatticeSpec::new((1..=sites as u32).collect(), c, d).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Zero-diagonal chains have spectra symmetric about zero, and the
    // sublattice-alternating conjugate of every eigenvector is again an
    // eigenvector at the mirrored energy.
    #[test]
    fn chiral_chains_have_paired_spectra(spec in chain_strategy(8, false)) {
        let h = build_hamiltonian(&spec);
        let s = diagonalize(&h).unwrap();
        let m = s.dim();
        let ev = s.eigenvalues_khz();
        for k in 0..m {
            prop_assert!((ev[k] + ev[m - 1 - k]).abs() < 1e-8,
                "pairing broken: {} vs {}", ev[k], ev[m - 1 - k]);
        }
        let scale = spec.couplings_khz().iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        for alpha in 0..m {
            // Γv, with Γ = diag(+1, −1, +1, ...)
            let conjugated: Vec<f64> = (0..m)
                .map(|row| if row % 2 == 0 { s.amplitude(row, alpha) } else { -s.amplitude(row, alpha) })
                .collect();
            // must satisfy H (Γv) = −ω (Γv)
            for row in 0..m {
                let mut h_gv = 0.0;
                for col in 0..m {
                    h_gv += h.entry(row, col) * conjugated[col];
                }
                let residual = h_gv + ev[alpha] * conjugated[row];
                prop_assert!(residual.abs() < 1e-8 * scale,
                    "Γ-conjugate of eigenvector {alpha} is not an eigenvector at −ω");
            }
        }
    }

    // The QL implementation agrees with an independent dense Jacobi solver.
    #[test]
    fn ql_matches_jacobi_oracle(spec in chain_strategy(8, true)) {
        let h = build_hamiltonian(&spec);
        let s = diagonalize(&h).unwrap();
        let (oracle_evals, _) = jacobi_eigen(h.matrix());
        let scale = h.matrix().iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        for (a, b) in s.eigenvalues_khz().iter().zip(&oracle_evals) {
            prop_assert!((a - b).abs() < 1e-9 * scale, "QL {a} vs Jacobi {b}");
        }
    }

    // Orthonormality and spectral reconstruction of the Hamiltonian.
    #[test]
    fn eigenbasis_is_orthonormal_and_complete(spec in chain_strategy(8, true)) {
        let h = build_hamiltonian(&spec);
        let s = diagonalize(&h).unwrap();
        let v = s.eigenvectors();
        let m = s.dim();
        let gram = v.transpose() * v;
        for i in 0..m {
            for j in 0..m {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[(i, j)] - expected).abs() < 1e-10);
            }
        }
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            s.eigenvalues_khz().to_vec(),
        ));
        let rebuilt = v * lambda * v.transpose();
        let coupling_scale = spec.couplings_khz().iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        for i in 0..m {
            for j in 0..m {
                prop_assert!((rebuilt[(i, j)] - h.entry(i, j)).abs() < 1e-8 * coupling_scale);
            }
        }
    }

    // Perturbing one coupling by ε moves each eigenvalue by at most ε/2
    // (Weyl's bound with the Ω/2 matrix convention).
    #[test]
    fn eigenvalues_are_weyl_stable(
        spec in chain_strategy(8, true),
        bond_fraction in 0.0..1.0f64,
        epsilon in 0.0..100.0f64,
    ) {
        let bond = ((spec.bond_count() as f64 * bond_fraction) as usize).min(spec.bond_count() - 1);
        let s0 = diagonalize(&build_hamiltonian(&spec)).unwrap();
        let mut couplings = spec.couplings_khz().to_vec();
        couplings[bond] += epsilon;
        let perturbed = LatticeSpec::new(
            spec.site_labels().to_vec(),
            couplings,
            spec.bond_detunings_khz().to_vec(),
        ).unwrap();
        let s1 = diagonalize(&build_hamiltonian(&perturbed)).unwrap();
        for (a, b) in s0.eigenvalues_khz().iter().zip(s1.eigenvalues_khz()) {
            prop_assert!((a - b).abs() <= epsilon / 2.0 + 1e-8,
                "eigenvalue moved {} for ε = {epsilon}", (a - b).abs());
        }
    }

    // Closed-system evolution conserves probability at every sampled time.
    #[test]
    fn closed_evolution_is_unitary(spec in chain_strategy(8, true), seed_t in 1.0..200.0f64) {
        let s = diagonalize(&build_hamiltonian(&spec)).unwrap();
        let times = uniform_grid(seed_t, 64).unwrap();
        let traj = evolve(&s, 0, &times, &DecoherenceParams::closed()).unwrap();
        for k in 0..times.len() {
            let total: f64 = traj.site_populations_at(k).iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "Σ P = {total} at t = {}", times[k]);
        }
    }

    // P_{a→b}(t) = P_{b→a}(t) for a symmetric Hamiltonian.
    #[test]
    fn closed_evolution_is_reciprocal(
        spec in chain_strategy(6, true),
        t in 0.1..100.0f64,
    ) {
        let s = diagonalize(&build_hamiltonian(&spec)).unwrap();
        let m = s.dim();
        let forward = evolve(&s, 0, &[t], &DecoherenceParams::closed()).unwrap();
        let backward = evolve(&s, m - 1, &[t], &DecoherenceParams::closed()).unwrap();
        let p_ab = forward.site_populations_at(0)[m - 1];
        let p_ba = backward.site_populations_at(0)[0];
        prop_assert!((p_ab - p_ba).abs() < 1e-12);
    }

    // Evaluating the propagator in explicitly complex form leaves only
    // numerical-noise imaginary parts, and the real parts match evolve().
    #[test]
    fn complex_form_has_vanishing_imaginary_residue(
        spec in chain_strategy(6, true),
        t in 0.0..100.0f64,
    ) {
        let s = diagonalize(&build_hamiltonian(&spec)).unwrap();
        let m = s.dim();
        let traj = evolve(&s, 0, &[t.max(1e-6)], &DecoherenceParams::closed()).unwrap();
        for target in 0..m {
            let mut total = Complex64::new(0.0, 0.0);
            for alpha in 0..m {
                for beta in 0..m {
                    let weight = s.amplitude(0, alpha) * s.amplitude(target, alpha)
                        * s.amplitude(target, beta) * s.amplitude(0, beta);
                    let phase = angular_phase(
                        s.eigenvalues_khz()[alpha] - s.eigenvalues_khz()[beta],
                        t.max(1e-6),
                    );
                    total += Complex64::from_polar(weight, phase);
                }
            }
            prop_assert!(total.im.abs() < 1e-12, "imaginary residue {}", total.im);
            prop_assert!((total.re - traj.site_populations_at(0)[target]).abs() < 1e-10);
        }
    }

    // Reversing the chain end-for-end (couplings reversed, bond detunings
    // reversed and negated) permutation-conjugates the Hamiltonian up to the
    // uniform gauge shift −U_last; with zero net detuning the conjugation is
    // exact.
    #[test]
    fn chain_reversal_conjugates_the_hamiltonian(spec in chain_strategy(8, true)) {
        let m = spec.len();
        let h = build_hamiltonian(&spec);
        let reversed = LatticeSpec::new(
            spec.site_labels().to_vec(),
            spec.couplings_khz().iter().rev().copied().collect(),
            spec.bond_detunings_khz().iter().rev().map(|d| -d).collect(),
        ).unwrap();
        let h_rev = build_hamiltonian(&reversed);
        let u_last = h.entry(m - 1, m - 1);
        for i in 0..m {
            for j in 0..m {
                let expected = h.entry(m - 1 - i, m - 1 - j) - if i == j { u_last } else { 0.0 };
                prop_assert!((h_rev.entry(i, j) - expected).abs() < 1e-9);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Oracle sanity checks: the oracles themselves against closed-form results.
// ---------------------------------------------------------------------------

#[test]
fn jacobi_oracle_reproduces_the_two_level_system() {
    let h = DMatrix::from_row_slice(2, 2, &[0.0, 80.0, 80.0, 0.0]);
    let (evals, vecs) = jacobi_eigen(&h);
    assert!((evals[0] + 80.0).abs() < 1e-12);
    assert!((evals[1] - 80.0).abs() < 1e-12);
    for col in 0..2 {
        let norm: f64 = (0..2).map(|r| vecs[(r, col)] * vecs[(r, col)]).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn rk4_oracle_reproduces_the_rabi_formula() {
    let spec = LatticeSpec::new(vec![1, 2], vec![160.0], vec![0.0]).unwrap();
    let h = TridiagonalKhz::from_dense(build_hamiltonian(&spec).matrix());
    let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.125).collect();
    let pops = rk4_populations(&h, 0, &times);
    for (k, &t) in times.iter().enumerate() {
        let expected = (std::f64::consts::PI * 0.160 * t).sin().powi(2);
        assert!(
            (pops[k][1] - expected).abs() < 1e-8,
            "RK4 deviates from the Rabi formula at t = {t}"
        );
    }
}

#[test]
fn spectral_propagator_matches_direct_integration_spot_check() {
    let spec = LatticeSpec::new(
        vec![1, 2, 3, 4, 5, 6],
        vec![160.0, 800.0, 160.0, 800.0, 160.0],
        vec![30.0, -120.0, 0.0, 75.0, -10.0],
    )
    .unwrap();
    let h = build_hamiltonian(&spec);
    let s = diagonalize(&h).unwrap();
    let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
    let traj = evolve(&s, 1, &times, &DecoherenceParams::closed()).unwrap();
    let oracle = rk4_populations(&TridiagonalKhz::from_dense(h.matrix()), 1, &times);
    for k in 0..times.len() {
        for site in 0..6 {
            let err = (traj.site_populations_at(k)[site] - oracle[k][site]).abs();
            assert!(err < 1e-7, "site {site} error {err} at t = {}", times[k]);
        }
    }
}

#[test]
fn dephasing_protects_bulk_initialized_edges() {
    // with dephasing on (the documented 30 μs figure-matching value), bulk
    // wave packets never appreciably reach the chain ends
    let spec = LatticeSpec::alternating(58, 6, 160.0, 800.0).unwrap();
    let s = diagonalize(&build_hamiltonian(&spec)).unwrap();
    let dec = DecoherenceParams::new(None, Some(30.0), false).unwrap();
    let times = uniform_grid(200.0, 4001).unwrap();
    let traj = evolve(&s, 1, &times, &dec).unwrap();
    for k in 0..times.len() {
        let p = traj.site_populations_at(k);
        assert!(
            p[0] + p[5] < 0.05,
            "edge leakage {} at t = {}",
            p[0] + p[5],
            times[k]
        );
    }
}

#[test]
fn anticorrelated_edge_ripples() {
    // fast ripples of the initial edge population are antiphase with the
    // second-neighbour bulk site
    let spec = LatticeSpec::alternating(58, 6, 160.0, 800.0).unwrap();
    let s = diagonalize(&build_hamiltonian(&spec)).unwrap();
    let times = uniform_grid(5.0, 501).unwrap();
    let traj = evolve(&s, 0, &times, &DecoherenceParams::closed()).unwrap();
    let p58 = traj.site_series(0).unwrap();
    let p60 = traj.site_series(2).unwrap();
    let r = pearson_correlation(&p58, &p60);
    assert!(r < -0.5, "correlation {r}");
}
