//! Shared oracle machinery for the integration suites: a classical
//! fixed-step Runge-Kutta integrator and random parameter draws.
//!
//! The Runge-Kutta path shares no code with the library's exponential
//! stepper (no matrix exponentials, no step control), so agreement
//! between the two is evidence rather than tautology. The Lindblad
//! right-hand side is likewise written in direct commutator form, not
//! through the vectorized generator the library integrates.

// Each test target compiles its own copy and uses a different subset.
#![allow(dead_code)]

use lzms::model::{
    effective_hamiltonian, four_level_hamiltonian, ideal_hamiltonian, DecayParams, ModelParams,
};
use lzms::{C64, CMatrix4, CVector3};
use nalgebra::SMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Classical RK4 with `n_steps` uniform steps, for any complex state shape.
pub fn rk4<const R: usize, const C: usize>(
    deriv: impl Fn(f64, &SMatrix<C64, R, C>) -> SMatrix<C64, R, C>,
    y0: SMatrix<C64, R, C>,
    t_start: f64,
    t_end: f64,
    n_steps: usize,
) -> SMatrix<C64, R, C> {
    let h = (t_end - t_start) / n_steps as f64;
    let mut y = y0;
    for k in 0..n_steps {
        let t = t_start + k as f64 * h;
        let k1 = deriv(t, &y);
        let k2 = deriv(t + 0.5 * h, &(y + k1 * C64::from(0.5 * h)));
        let k3 = deriv(t + 0.5 * h, &(y + k2 * C64::from(0.5 * h)));
        let k4 = deriv(t + h, &(y + k3 * C64::from(h)));
        y += (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0);
    }
    y
}

/// Final state of iψ̇ = (H(t) − i·diag Γ)ψ integrated classically over
/// the full sweep window.
pub fn rk4_state(
    p: &ModelParams,
    d: Option<&DecayParams>,
    psi0: &CVector3,
    n_steps: usize,
) -> CVector3 {
    let p = *p;
    let d = d.copied();
    let minus_i = C64::new(0.0, -1.0);
    rk4(
        move |t, psi: &CVector3| {
            let h = match &d {
                Some(d) => effective_hamiltonian(&p, d, t),
                None => ideal_hamiltonian(&p, t),
            };
            h * psi * minus_i
        },
        *psi0,
        -p.half_window,
        p.half_window,
        n_steps,
    )
}

/// ρ̇ = −i[H, ρ] + Σₙ 2Γₙ (|4⟩⟨n| ρ |n⟩⟨4| − ½{|n⟩⟨n|, ρ}), written out
/// entry by entry rather than through a superoperator matrix.
pub fn lindblad_rhs(p: &ModelParams, d: &DecayParams, t: f64, rho: &CMatrix4) -> CMatrix4 {
    let h = four_level_hamiltonian(p, d, t);
    let mut dot = (h * rho - rho * h) * C64::new(0.0, -1.0);
    for (n, gamma) in [d.gamma1, d.gamma2, d.gamma3].into_iter().enumerate() {
        let two_gamma = C64::from(2.0 * gamma);
        // |4⟩⟨n| ρ |n⟩⟨4| lands the (n,n) element on the (4,4) slot.
        dot[(3, 3)] += two_gamma * rho[(n, n)];
        // −½{|n⟩⟨n|, ρ} drains row n and column n.
        for k in 0..4 {
            dot[(n, k)] -= two_gamma * C64::from(0.5) * rho[(n, k)];
            dot[(k, n)] -= two_gamma * C64::from(0.5) * rho[(k, n)];
        }
        // The diagonal entry was hit by both the row and the column pass,
        // which is exactly the −2Γ·ρₙₙ the anticommutator requires.
    }
    dot
}

/// Final density matrix of the four-level master equation integrated
/// classically over the full sweep window.
pub fn rk4_lindblad(p: &ModelParams, d: &DecayParams, rho0: &CMatrix4, n_steps: usize) -> CMatrix4 {
    let p = *p;
    let d = *d;
    rk4(
        move |t, rho: &CMatrix4| lindblad_rhs(&p, &d, t, rho),
        *rho0,
        -p.half_window,
        p.half_window,
        n_steps,
    )
}

/// Random coherent parameters in the physically interesting ranges:
/// κ/Ω² ∈ [0.05, 3], couplings up to 2Ω, free phases.
pub fn random_model(rng: &mut ChaCha8Rng, half_window: f64) -> ModelParams {
    ModelParams {
        sweep_rate: 0.05 + 2.95 * rng.gen::<f64>(),
        ladder_coupling: 0.2 + 1.8 * rng.gen::<f64>(),
        direct_coupling: 2.0 * rng.gen::<f64>(),
        ladder_phase: TAU * (rng.gen::<f64>() - 0.5),
        direct_phase: TAU * (rng.gen::<f64>() - 0.5),
        half_window,
    }
}

/// Random decay rates up to ~1.5Ω plus a detuning, the regime where the
/// Lindblad and non-Hermitian descriptions are both well resolved.
pub fn random_decay(rng: &mut ChaCha8Rng) -> DecayParams {
    DecayParams {
        gamma1: 1.5 * rng.gen::<f64>(),
        gamma2: 1.5 * rng.gen::<f64>(),
        gamma3: 1.5 * rng.gen::<f64>(),
        detuning: rng.gen::<f64>() - 0.5,
        ground_offset: 0.5 + rng.gen::<f64>(),
    }
}

pub fn max_entry_diff4(a: &CMatrix4, b: &CMatrix4) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
