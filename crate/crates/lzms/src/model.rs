//! Parameter types and Hamiltonian builders.
//!
//! The three-state manifold is a chain |1⟩–|2⟩–|3⟩ with linearly swept bare
//! energies and a direct link closing the 1–3 loop:
//!
//! ```text
//!          ⎡ −κt        Ω e^{iφ}    ω e^{iφ′} ⎤
//! H(t)  =  ⎢ Ω e^{−iφ}     0        Ω e^{iφ}  ⎥
//!          ⎣ ω e^{−iφ′}  Ω e^{−iφ}    κt      ⎦
//! ```
//!
//! Decay out of the manifold enters either as the non-Hermitian diagonal
//! −i·diag(Γ₁, Γ₂, Γ₃) added to H(t), or as Lindblad drains into a fourth
//! spectator state at energy −ω_g. Only the phase combination χ = 2φ − φ′
//! has physical effect on populations; see [`chi`].
//!
//! All builders are pure and cheap; matrices are constructed fresh per call.

use crate::{C64, CMatrix3, CMatrix4, CVector3, Error};
use std::f64::consts::{PI, TAU};

/// Parameters of the coherent three-state model, natural units ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Sweep rate κ of the bare energies ∓κt (energy²).
    pub sweep_rate: f64,
    /// Nearest-neighbour coupling strength Ω (1–2 and 2–3 links).
    pub ladder_coupling: f64,
    /// Direct 1–3 coupling strength ω.
    pub direct_coupling: f64,
    /// Phase φ of the nearest-neighbour coupling (radians).
    pub ladder_phase: f64,
    /// Phase φ′ of the direct coupling (radians).
    pub direct_phase: f64,
    /// Half-width t₀ of the integration window [−t₀, t₀].
    pub half_window: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            sweep_rate: 1.0,
            ladder_coupling: 1.0,
            direct_coupling: 0.0,
            ladder_phase: 0.0,
            direct_phase: 0.0,
            half_window: 500.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), Error> {
        let finite = self.sweep_rate.is_finite()
            && self.ladder_coupling.is_finite()
            && self.direct_coupling.is_finite()
            && self.ladder_phase.is_finite()
            && self.direct_phase.is_finite()
            && self.half_window.is_finite();
        if !finite {
            return Err(Error::invalid("model parameters", "all fields must be finite"));
        }
        if self.sweep_rate <= 0.0 {
            return Err(Error::invalid("sweep_rate", format!("must be > 0, got {}", self.sweep_rate)));
        }
        if self.ladder_coupling < 0.0 {
            return Err(Error::invalid(
                "ladder_coupling",
                format!("must be >= 0, got {}", self.ladder_coupling),
            ));
        }
        if self.direct_coupling < 0.0 {
            return Err(Error::invalid(
                "direct_coupling",
                format!("must be >= 0, got {}", self.direct_coupling),
            ));
        }
        if self.half_window <= 0.0 {
            return Err(Error::invalid(
                "half_window",
                format!("must be > 0, got {}", self.half_window),
            ));
        }
        Ok(())
    }
}

/// Decay and offset parameters of the dissipative extension.
///
/// The Γₙ are amplitude decay rates: state |n⟩ drains into the spectator
/// ground state |4⟩ at population rate 2Γₙ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    /// Detuning Δ of state |2⟩ (default 0).
    pub detuning: f64,
    /// Energy offset ω_g of the spectator ground state. It couples to
    /// nothing, so any positive value leaves the restricted dynamics
    /// unchanged; kept configurable for the four-level cross-check.
    pub ground_offset: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        DecayParams { gamma1: 0.0, gamma2: 0.0, gamma3: 0.0, detuning: 0.0, ground_offset: 1.0 }
    }
}

impl DecayParams {
    pub fn validate(&self) -> Result<(), Error> {
        let finite = self.gamma1.is_finite()
            && self.gamma2.is_finite()
            && self.gamma3.is_finite()
            && self.detuning.is_finite()
            && self.ground_offset.is_finite();
        if !finite {
            return Err(Error::invalid("decay parameters", "all fields must be finite"));
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 || self.gamma3 < 0.0 {
            return Err(Error::invalid("gamma", "decay rates must be >= 0"));
        }
        if self.ground_offset <= 0.0 {
            return Err(Error::invalid(
                "ground_offset",
                format!("must be > 0, got {}", self.ground_offset),
            ));
        }
        Ok(())
    }

    /// True when every decay rate is zero (the evolution is unitary; Δ may
    /// still act on state |2⟩).
    pub fn is_decay_free(&self) -> bool {
        self.gamma1 == 0.0 && self.gamma2 == 0.0 && self.gamma3 == 0.0
    }
}

/// Coherent Hamiltonian H(t) of the three-state chain.
pub fn ideal_hamiltonian(p: &ModelParams, t: f64) -> CMatrix3 {
    let drift = p.sweep_rate * t;
    let ladder = C64::from_polar(p.ladder_coupling, p.ladder_phase);
    let direct = C64::from_polar(p.direct_coupling, p.direct_phase);
    CMatrix3::new(
        C64::new(-drift, 0.0),
        ladder,
        direct,
        ladder.conj(),
        C64::new(0.0, 0.0),
        ladder,
        direct.conj(),
        ladder.conj(),
        C64::new(drift, 0.0),
    )
}

/// Non-Hermitian effective Hamiltonian: H(t) + diag(−iΓ₁, Δ − iΓ₂, −iΓ₃).
///
/// Generates norm-decaying dynamics equivalent to the restricted block of
/// the four-level Lindblad evolution at zero temperature.
pub fn effective_hamiltonian(p: &ModelParams, d: &DecayParams, t: f64) -> CMatrix3 {
    let mut h = ideal_hamiltonian(p, t);
    h[(0, 0)] += C64::new(0.0, -d.gamma1);
    h[(1, 1)] += C64::new(d.detuning, -d.gamma2);
    h[(2, 2)] += C64::new(0.0, -d.gamma3);
    h
}

/// Hermitian four-level Hamiltonian: the three-state block (with Δ on
/// state |2⟩) plus the uncoupled spectator ground state at energy −ω_g.
pub fn four_level_hamiltonian(p: &ModelParams, d: &DecayParams, t: f64) -> CMatrix4 {
    let h3 = ideal_hamiltonian(p, t);
    let mut h = CMatrix4::zeros();
    for r in 0..3 {
        for c in 0..3 {
            h[(r, c)] = h3[(r, c)];
        }
    }
    h[(1, 1)] += C64::from(d.detuning);
    h[(3, 3)] = C64::from(-d.ground_offset);
    h
}

/// The gauge-invariant phase combination χ = 2φ − φ′, reduced to (−π, π].
///
/// Populations and the spectrum depend on the two coupling phases only
/// through cos χ; see the gauge covariance test below.
pub fn chi(p: &ModelParams) -> f64 {
    reduce_angle(2.0 * p.ladder_phase - p.direct_phase)
}

/// Reduce an angle to the interval (−π, π]. −π maps to +π.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Bare basis state |n⟩, n ∈ {1, 2, 3}.
pub fn basis_state(n: u8) -> Result<CVector3, Error> {
    if !(1..=3).contains(&n) {
        return Err(Error::invalid("state index", format!("must be 1..=3, got {n}")));
    }
    let mut v = CVector3::zeros();
    v[(n - 1) as usize] = C64::new(1.0, 0.0);
    Ok(v)
}
