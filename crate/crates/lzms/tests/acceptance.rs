//! Acceptance gate: one test per required behavior, each printing a
//! single `PASS <name>: <numbers>` line (visible with `--nocapture`).
//! Tolerances are pinned inline; a failure here means the claimed
//! physics is not being reproduced, not that a bound needs loosening.

mod common;

use common::{max_entry_diff4, random_decay, random_model};
use lzms::dynamics::{
    evolve, evolve_lindblad4, lz_two_state_reference, transfer_efficiency, IntegratorConfig,
};
use lzms::model::{basis_state, chi, DecayParams, ModelParams};
use lzms::spectrum::{classify_crossing, eigenvalues_ideal, min_gap, CrossingClass};
use lzms::sweep::{run_sweep, Axis, AxisParam, AxisScale, SweepSpec};
use lzms::{C64, CMatrix4};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

fn endpoint_cfg() -> IntegratorConfig {
    IntegratorConfig { sample_count: 2, ..IntegratorConfig::default() }
}

/// For the qualitative thresholds (0.02 and up): integration error at
/// rel 1e-8 stays six orders below any bound checked with it.
fn coarse_cfg() -> IntegratorConfig {
    IntegratorConfig { rel_tol: 1e-8, abs_tol: 1e-10, ..endpoint_cfg() }
}

/// Model with Ω as the unit and the window the presets use.
fn dimensionless(omega_ratio: f64, kappa_ratio: f64, varphi: f64, t0: f64) -> ModelParams {
    ModelParams {
        sweep_rate: kappa_ratio,
        ladder_coupling: 1.0,
        direct_coupling: omega_ratio,
        ladder_phase: 0.0,
        direct_phase: varphi,
        half_window: t0,
    }
}

#[test]
fn matched_coupling_collapses_the_spectrum() {
    const TOL: f64 = 1e-10;
    let mut worst: f64 = 0.0;
    for unit in [1.0, 1.7] {
        // χ = 0: the top level is simple at 2Ω, the lower two meet at −Ω.
        let p = ModelParams {
            ladder_coupling: unit,
            direct_coupling: unit,
            half_window: 10.0,
            ..ModelParams::default()
        };
        let even = eigenvalues_ideal(&p, 0.0);
        for (got, want) in even.into_iter().zip([2.0 * unit, -unit, -unit]) {
            worst = worst.max((got - want).abs());
        }
        // χ = π: the bottom level is simple at −2Ω, the upper two meet at Ω.
        let p = ModelParams { direct_phase: PI, ..p };
        let odd = eigenvalues_ideal(&p, 0.0);
        for (got, want) in odd.into_iter().zip([unit, unit, -2.0 * unit]) {
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst < TOL, "worst degenerate-spectrum deviation {worst:.3e}");
    println!("PASS matched_coupling_collapses_the_spectrum: worst deviation {worst:.3e} (limit {TOL:e})");
}

#[test]
fn gap_stays_open_away_from_the_degenerate_points() {
    let start = Instant::now();
    let t0 = 500.0;
    let base = ModelParams { half_window: t0, ..ModelParams::default() };
    let sample: [(f64, f64); 15] = [
        (0.0, 0.0),
        (0.3, 0.0),
        (0.5, PI),
        (0.7, 0.5 * PI),
        (0.7, PI),
        (0.9, 0.0),
        (0.9, PI),
        (1.1, 0.0),
        (1.1, PI),
        (1.3, 0.5 * PI),
        (1.5, 0.0),
        (1.5, PI),
        (1.8, 2.0),
        (2.0, 0.0),
        (2.0, PI),
    ];
    let mut smallest_open = f64::INFINITY;
    for (omega_ratio, chi_target) in sample {
        let p = ModelParams { direct_coupling: omega_ratio, direct_phase: -chi_target, ..base };
        let (gap, _) = min_gap(&p, (-t0, t0), 201).unwrap();
        assert!(gap > 0.0, "gap closed at ω/Ω = {omega_ratio}, χ = {:.3}", chi(&p));
        assert_eq!(classify_crossing(&p, 1e-9), CrossingClass::NoCrossing);
        smallest_open = smallest_open.min(gap);
    }
    let mut largest_closed: f64 = 0.0;
    for chi_target in [0.0, PI] {
        let p = ModelParams { direct_coupling: 1.0, direct_phase: -chi_target, ..base };
        let (gap, _) = min_gap(&p, (-t0, t0), 201).unwrap();
        assert!(gap < 1e-8, "degenerate preset kept a gap of {gap:.3e}");
        largest_closed = largest_closed.max(gap);
    }
    println!(
        "PASS gap_stays_open_away_from_the_degenerate_points: open ≥ {smallest_open:.3e}, degenerate ≤ {largest_closed:.3e} (limit 1e-8), {:.2}s",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn closed_form_spectrum_on_the_special_surfaces() {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let mut p = random_model(&mut rng, 10.0);
        if k % 2 == 0 {
            p.direct_coupling = 0.0;
        } else {
            // cos χ = 0 ⇔ φ′ = 2φ ± π/2.
            p.direct_phase = 2.0 * p.ladder_phase + if k % 4 == 1 { 0.5 * PI } else { -0.5 * PI };
        }
        let t = 8.0 * (rng.gen::<f64>() - 0.5);
        let radius = (2.0 * p.ladder_coupling * p.ladder_coupling
            + p.direct_coupling * p.direct_coupling
            + p.sweep_rate * p.sweep_rate * t * t)
            .sqrt();
        let [l1, l2, l3] = eigenvalues_ideal(&p, t);
        worst = worst
            .max((l1 - radius).abs())
            .max(l2.abs())
            .max((l3 + radius).abs());
    }
    assert!(worst < TOL, "worst closed-form deviation {worst:.3e}");
    println!("PASS closed_form_spectrum_on_the_special_surfaces: worst deviation {worst:.3e} over 1000 draws (limit {TOL:e})");
}

#[test]
fn slow_sweep_plateau_with_monotone_degradation() {
    let start = Instant::now();
    let cfg = coarse_cfg();
    let kappas = [0.05, 0.5, 1.0, 2.5, 5.0];
    let mut effs = Vec::new();
    for kappa in kappas {
        let p = dimensionless(0.0, kappa, 0.0, 500.0);
        effs.push(transfer_efficiency(&p, None, 1, 3, &cfg).unwrap());
    }
    assert!(effs[0] > 0.95, "plateau efficiency {} at κ/Ω² = 0.05", effs[0]);
    for w in effs.windows(2) {
        assert!(w[1] < w[0], "efficiency must fall with κ: {effs:?}");
    }
    let listed: Vec<String> =
        kappas.iter().zip(&effs).map(|(k, e)| format!("κ={k}→{e:.4}")).collect();
    println!(
        "PASS slow_sweep_plateau_with_monotone_degradation: {} ({:.2}s)",
        listed.join(", "),
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn opposed_phase_dips_the_matched_coupling_transfer() {
    let start = Instant::now();
    let cfg = coarse_cfg();
    let at = |omega_ratio: f64| {
        let p = dimensionless(omega_ratio, 0.1, PI, 500.0);
        transfer_efficiency(&p, None, 1, 3, &cfg).unwrap()
    };
    let matched = at(1.0);
    let detuned = at(1.8);
    assert!(matched < 0.5, "the matched-coupling dip is missing: P₃ = {matched}");
    assert!(matched < detuned, "dip must undercut ω = 1.8Ω: {matched} vs {detuned}");
    println!(
        "PASS opposed_phase_dips_the_matched_coupling_transfer: P₃(ω=Ω) = {matched:.4} < 0.5 and < P₃(ω=1.8Ω) = {detuned:.4} ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn boundary_decay_rates_act_identically() {
    let start = Instant::now();
    let spec_for = |param: AxisParam| SweepSpec {
        axis1: Axis { param, min: -5.0, max: 5.0, n: 41, scale: AxisScale::Log10 },
        axis2: None,
        base_model: dimensionless(0.0, 0.1, 0.0, 500.0),
        base_decay: DecayParams::default(),
        from: 1,
        to: 3,
        cfg: coarse_cfg(),
    };
    let first = run_sweep(&spec_for(AxisParam::Gamma1)).unwrap();
    let third = run_sweep(&spec_for(AxisParam::Gamma3)).unwrap();
    let mut max_diff: f64 = 0.0;
    for (a, b) in first.records.iter().zip(&third.records) {
        assert!(!a.failed && !b.failed);
        max_diff = max_diff.max((a.populations[2] - b.populations[2]).abs());
    }
    assert!(max_diff < 0.02, "edge-decay curves split by {max_diff:.3e}");
    println!(
        "PASS boundary_decay_rates_act_identically: max |P₃(Γ₁)−P₃(Γ₃)| = {max_diff:.3e} over 41 log-spaced rates (limit 0.02, {:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn strong_middle_decay_revives_the_two_state_transfer() {
    let start = Instant::now();
    let cfg = endpoint_cfg();
    let p = dimensionless(1.0, 1.0, 0.0, 50.0);
    let d = DecayParams { gamma2: 1e4, ..DecayParams::default() };
    let revived = transfer_efficiency(&p, Some(&d), 1, 3, &cfg).unwrap();
    // The comparison target is the converged two-state value for (ω, κ):
    // by Ωt = 200 the finite-window ripple is ~1e-4, far below the bound,
    // as the asymptote check below confirms.
    let reference = lz_two_state_reference(1.0, 0.0, 1.0, 200.0, &cfg).unwrap();
    let asymptote = 1.0 - (-PI).exp();
    let dev_ref = (revived - reference).abs();
    let dev_asym = (reference - asymptote).abs();
    assert!(dev_ref < 0.02, "revived transfer {revived:.4} vs two-state {reference:.4}");
    assert!(dev_asym < 0.01, "two-state reference {reference:.6} vs asymptote {asymptote:.6}");
    println!(
        "PASS strong_middle_decay_revives_the_two_state_transfer: P₃ = {revived:.4}, two-state = {reference:.4} (Δ = {dev_ref:.3e} < 0.02), asymptote Δ = {dev_asym:.3e} < 0.01 ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn lindblad_block_matches_the_nonhermitian_state() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let cfg = endpoint_cfg();
    let mut worst_block: f64 = 0.0;
    let mut worst_trace: f64 = 0.0;
    for _ in 0..20 {
        let p = random_model(&mut rng, 20.0);
        let d = random_decay(&mut rng);
        let psi0 = basis_state(1).unwrap();
        let psi = evolve(&p, Some(&d), &psi0, &cfg).unwrap();
        let psi_final = psi.states.last().unwrap();

        let mut rho0 = CMatrix4::zeros();
        rho0[(0, 0)] = C64::from(1.0);
        let rho = evolve_lindblad4(&p, &d, &rho0, &cfg).unwrap();
        let rho_final = rho.states.last().unwrap();

        let mut outer = CMatrix4::zeros();
        for r in 0..3 {
            for c in 0..3 {
                outer[(r, c)] = psi_final[r] * psi_final[c].conj();
            }
        }
        // Only the chain block participates; the spectator entry carries
        // the leaked weight, so mirror it before the matrix comparison.
        outer[(3, 3)] = rho_final[(3, 3)];
        worst_block = worst_block.max(max_entry_diff4(rho_final, &outer));

        let trace: f64 = (0..4).map(|k| rho_final[(k, k)].re).sum();
        worst_trace = worst_trace.max((trace - 1.0).abs());
    }
    assert!(worst_block < 1e-6, "restricted block deviates by {worst_block:.3e}");
    assert!(worst_trace < 1e-8, "trace drifted by {worst_trace:.3e}");
    println!(
        "PASS lindblad_block_matches_the_nonhermitian_state: 20 draws, block Δ ≤ {worst_block:.3e} (limit 1e-6), trace Δ ≤ {worst_trace:.3e} (limit 1e-8) ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn uniform_decay_rescales_the_coherent_transfer() {
    const TOL: f64 = 1e-8;
    let cfg = endpoint_cfg();
    let p = ModelParams {
        sweep_rate: 1.0,
        ladder_coupling: 1.0,
        direct_coupling: 0.7,
        ladder_phase: 0.0,
        direct_phase: 0.9,
        half_window: 10.0,
    };
    let gamma = 0.05;
    let d = DecayParams { gamma1: gamma, gamma2: gamma, gamma3: gamma, ..DecayParams::default() };
    let ideal = transfer_efficiency(&p, None, 1, 3, &cfg).unwrap();
    let damped = transfer_efficiency(&p, Some(&d), 1, 3, &cfg).unwrap();
    let expected = ideal * (-4.0 * gamma * p.half_window).exp();
    let dev = (damped - expected).abs();
    assert!(dev < TOL, "uniform decay broke the rescaling: {dev:.3e}");
    println!(
        "PASS uniform_decay_rescales_the_coherent_transfer: |P₃ − P₃(ideal)·e^(−4Γt₀)| = {dev:.3e} (limit {TOL:e})"
    );
}

#[test]
fn coupling_phase_gauge_cannot_move_populations() {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let cfg = endpoint_cfg();
    let p = random_model(&mut rng, 5.0);
    let baseline = evolve(&p, None, &basis_state(1).unwrap(), &cfg).unwrap().final_populations();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let delta = 2.0 * PI * (rng.gen::<f64>() - 0.5);
        let shifted = ModelParams {
            ladder_phase: p.ladder_phase + delta,
            direct_phase: p.direct_phase + 2.0 * delta,
            ..p
        };
        let moved =
            evolve(&shifted, None, &basis_state(1).unwrap(), &cfg).unwrap().final_populations();
        for k in 0..3 {
            worst = worst.max((baseline[k] - moved[k]).abs());
        }
    }
    assert!(worst < TOL, "a gauge shift moved populations by {worst:.3e}");
    println!(
        "PASS coupling_phase_gauge_cannot_move_populations: max shift {worst:.3e} over 10 random δ (limit {TOL:e})"
    );
}

#[test]
fn efficiencies_are_converged_against_tolerance_halving() {
    let start = Instant::now();
    let cfg = endpoint_cfg();
    let halved = IntegratorConfig { rel_tol: cfg.rel_tol / 2.0, abs_tol: cfg.abs_tol / 2.0, ..cfg };

    let ideal = dimensionless(0.5, 0.5, 0.0, 50.0);
    let a = transfer_efficiency(&ideal, None, 1, 3, &cfg).unwrap();
    let b = transfer_efficiency(&ideal, None, 1, 3, &halved).unwrap();
    let ideal_shift = (a - b).abs();
    assert!(ideal_shift < 1e-6, "ideal efficiency moved by {ideal_shift:.3e}");

    let stiff_model = dimensionless(1.0, 1.0, 0.0, 50.0);
    let d = DecayParams { gamma2: 1e5, ..DecayParams::default() };
    let c = transfer_efficiency(&stiff_model, Some(&d), 1, 3, &cfg).unwrap();
    let e = transfer_efficiency(&stiff_model, Some(&d), 1, 3, &halved).unwrap();
    let stiff_shift = (c - e).abs();
    assert!(stiff_shift < 1e-5, "stiff efficiency moved by {stiff_shift:.3e}");

    println!(
        "PASS efficiencies_are_converged_against_tolerance_halving: ideal shift {ideal_shift:.3e} (limit 1e-6), stiff shift {stiff_shift:.3e} (limit 1e-5) ({:.2}s)",
        start.elapsed().as_secs_f64()
    );
}
