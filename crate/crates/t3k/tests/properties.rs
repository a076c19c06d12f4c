//! Randomized invariants of the model, its dynamics and the front end.

use proptest::prelude::*;
use std::f64::consts::PI;

use t3k::config::parse_config;
use t3k::dynamics::evolve;
use t3k::feasibility::max_wall_thickness;
use t3k::hamiltonian::{build_hamiltonian, photon_parity, BasisState, Truncation};
use t3k::kernel::two_mode_evolve;
use t3k::modes::{
    coupling_overlap, coupling_overlap_quadrature, CavityProfile, Geometry, ModelParams, Well,
};
use t3k::selfenergy::{pt2_partial, pt2_series, xi_length};

fn params(ell: f64, d: f64, mass: f64, g0: f64, delta: f64) -> ModelParams {
    let mut p = ModelParams {
        geometry: Geometry::new(ell, d).unwrap(),
        mass,
        omega_internal_a: 0.0,
        omega_internal_b: 0.0,
        omega_cavity: 0.0,
        g0,
        cavity_profile: CavityProfile::Constant(1.0),
        hbar: 1.0,
    };
    p.omega_cavity = delta + p.omega_a1() - p.omega_internal_b;
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The closed-form overlap agrees with direct quadrature and obeys
    /// the mirror-parity relation for arbitrary geometries.
    #[test]
    fn overlap_closed_form_vs_quadrature(
        ell in 0.3f64..3.0,
        d in 0.2f64..3.0,
        j in 1u32..40,
    ) {
        let p = params(ell, d, 1.0, 1.0, 4.0);
        let closed = coupling_overlap(&p, Well::Left, j).unwrap();
        let quad = coupling_overlap_quadrature(&p, Well::Left, j, 1e-13).unwrap();
        prop_assert!((closed - quad).abs() < 1e-9 * closed.abs().max(1e-3));
        let right = coupling_overlap(&p, Well::Right, j).unwrap();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        prop_assert_eq!(right, sign * closed);
    }

    /// Overlaps are bounded by the total coupling strength.
    #[test]
    fn overlap_bounded_by_g0(
        ell in 0.3f64..3.0,
        d in 0.2f64..3.0,
        g0 in 0.0f64..10.0,
        j in 1u32..60,
    ) {
        let p = params(ell, d, 1.0, g0, 4.0);
        let g = coupling_overlap(&p, Well::Left, j).unwrap();
        prop_assert!(g.abs() <= g0 * (1.0 + 1e-12));
    }

    /// The assembled Hamiltonian is exactly symmetric and never connects
    /// different photon-parity sectors.
    #[test]
    fn hamiltonian_symmetric_and_parity_blocked(
        ell in 0.5f64..2.0,
        d in 0.3f64..2.0,
        g0 in 0.0f64..0.5,
        delta in 1.0f64..8.0,
        j_max in 1u32..6,
        n_max in 1u32..4,
        rwa in proptest::bool::ANY,
    ) {
        let p = params(ell, d, 1.0, g0, delta);
        let t = Truncation::new(j_max, n_max, false).unwrap();
        let h = build_hamiltonian(&p, t, rwa).unwrap();
        let m = h.matrix();
        for r in 0..h.dim() {
            for c in 0..r {
                prop_assert_eq!(m[(r, c)], m[(c, r)]);
                if photon_parity(h.basis()[r]) != photon_parity(h.basis()[c]) {
                    prop_assert_eq!(m[(r, c)], 0.0);
                }
            }
        }
    }

    /// Exact evolution keeps every probability in range, preserves the
    /// norm, and never puts more population in the tracked channels than
    /// the state carries.
    #[test]
    fn evolution_probabilities_well_behaved(
        g0 in 1e-4f64..5e-2,
        delta in 2.0f64..6.0,
        seed_t in 0.1f64..20.0,
    ) {
        let p = params(1.0, 1.0, 1.0, g0, delta);
        let h = build_hamiltonian(&p, Truncation::new(4, 2, false).unwrap(), false).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * seed_t).collect();
        let ts = evolve(&h, BasisState::A { sigma: Well::Left, n: 0 }, &grid).unwrap();
        for i in 0..grid.len() {
            for v in [ts.p_t3k[i], ts.p_left[i], ts.p_excited[i]] {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v), "probability {v}");
            }
            prop_assert!((ts.norm[i] - 1.0).abs() < 1e-12);
            let tracked = ts.p_t3k[i] + ts.p_left[i] + ts.p_excited[i];
            prop_assert!(tracked <= ts.norm[i] + 1e-12);
        }
    }

    /// Second-order self-energies are negative for positive detuning,
    /// the splitting is their difference, and adding terms only deepens
    /// both shifts.
    #[test]
    fn self_energy_series_structure(
        ell in 0.5f64..2.0,
        d in 0.3f64..2.0,
        g0 in 1e-3f64..0.3,
        delta in 0.5f64..8.0,
        j_max in 4u32..60,
    ) {
        let p = params(ell, d, 1.0, g0, delta);
        let few = pt2_partial(&p, j_max).unwrap();
        let more = pt2_partial(&p, j_max + 8).unwrap();
        prop_assert!(few.pi_ss < 0.0 && few.pi_aa < 0.0);
        prop_assert_eq!(few.delta_e, few.pi_aa - few.pi_ss);
        prop_assert!(more.pi_ss <= few.pi_ss && more.pi_aa <= few.pi_aa);
        let full = pt2_series(&p, 1e-10 * g0 * g0).unwrap();
        prop_assert!(full.converged);
        prop_assert!(full.tail_estimate >= 0.0);
    }

    /// `xi` scales as `1/sqrt(m |Delta|)` and ignores the detuning sign.
    #[test]
    fn xi_scaling(m in 0.1f64..50.0, delta in 0.1f64..100.0, factor in 1.0f64..16.0) {
        let base = xi_length(m, delta, 1.0).unwrap();
        let scaled = xi_length(m * factor, delta, 1.0).unwrap();
        prop_assert!((scaled * factor.sqrt() - base).abs() < 1e-12 * base);
        let neg = xi_length(m, -delta, 1.0).unwrap();
        prop_assert_eq!(neg, base);
        let sd = xi_length(m, delta * factor, 1.0).unwrap();
        prop_assert!((sd * factor.sqrt() - base).abs() < 1e-12 * base);
    }

    /// The tolerated wall thickness shrinks as the cavity gets lossier
    /// and is positive exactly when the bare rate beats the decay rate.
    #[test]
    fn wall_thickness_monotone_in_decay(
        xi in 1e-12f64..1e-9,
        eps in 1e-2f64..1e4,
        kappa in 1e-3f64..1e3,
    ) {
        let d1 = max_wall_thickness(xi, eps, kappa).unwrap();
        let d2 = max_wall_thickness(xi, eps, 2.0 * kappa).unwrap();
        prop_assert!(d2 <= d1);
        prop_assert_eq!(d1 > 0.0, eps > kappa);
    }

    /// Two-mode tunnelling stays unitary: `p + |c_L|^2 = 1` and the
    /// probability peaks at `sin^2` of the half-splitting phase.
    #[test]
    fn two_mode_unitary(
        e in -5.0f64..5.0,
        pi_ss in -1.0f64..0.0,
        gap in 1e-6f64..0.5,
        t_step in 0.01f64..50.0,
    ) {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * t_step).collect();
        let s = two_mode_evolve(e, pi_ss, pi_ss + gap, 1.0, &t).unwrap();
        for i in 0..t.len() {
            prop_assert!((s.p[i] + s.c_l[i].norm_sqr() - 1.0).abs() < 1e-14);
            prop_assert!((s.c_r[i].norm_sqr() - s.p[i]).abs() < 1e-14);
            let expect = (gap * t[i] / 2.0).sin().powi(2);
            prop_assert!((s.p[i] - expect).abs() < 1e-12);
        }
    }

    /// Any well-formed model config survives the echo round trip with
    /// byte-stable re-serialization.
    #[test]
    fn config_echo_round_trip(
        ell in 0.1f64..5.0,
        d in 0.1f64..5.0,
        mass in 0.1f64..10.0,
        g0 in 0.0f64..1.0,
        delta in proptest::sample::select(vec![-3.0f64, 0.5, 4.0, 17.25]),
        j_max in 1u32..50,
        n_samples in 2usize..50,
    ) {
        let text = format!(
            "[model]\nell = \"{ell} natural\"\nd = \"{d} natural\"\nmass = \"{mass} natural\"\n\
             g0 = \"{g0} natural\"\ndelta = \"{delta} natural\"\n\n\
             [truncation]\nj_max = {j_max}\n\n[evolve]\nn_samples = {n_samples}\n"
        );
        let cfg = parse_config(&text, "prop").unwrap();
        let echo = cfg.echo_toml();
        let back = parse_config(&echo, "echo").unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.echo_toml(), echo);
        let p = cfg.model_params().unwrap();
        prop_assert!((p.detuning() - delta).abs() <= 1e-9 * (1.0 + delta.abs() + p.omega_a1().abs()));
    }

    /// Mode frequencies grow quadratically in `j` on top of the internal
    /// frequency offset.
    #[test]
    fn box_mode_dispersion(ell in 0.3f64..2.0, d in 0.2f64..2.0, j in 1u32..30) {
        use t3k::modes::{mode_frequency, ModeId, Species};
        let p = params(ell, d, 1.0, 0.1, 4.0);
        let lb = p.geometry.box_width();
        let w1 = mode_frequency(&p, ModeId { species: Species::B, j: 1 }).unwrap();
        let wj = mode_frequency(&p, ModeId { species: Species::B, j }).unwrap();
        let kin1 = PI * PI / (2.0 * lb * lb);
        let expect = w1 + kin1 * ((j * j - 1) as f64);
        prop_assert!((wj - expect).abs() < 1e-10 * (1.0 + expect.abs()));
    }
}
