//! Time evolution across the sweep: wavefunction propagation under the
//! coherent or decaying Hamiltonian, full density-matrix propagation with
//! population-conserving loss into the spectator level, and the two-state
//! reference problem used to calibrate strong-dephasing results.

use nalgebra::{SMatrix, SVector};

use crate::integrator::{advance_span, integrate_fixed, integrate_sampled, linspace, StepLimits};
use crate::model::{
    basis_state, effective_hamiltonian, four_level_hamiltonian, ideal_hamiltonian, DecayParams,
    ModelParams,
};
use crate::{C64, CMatrix3, CVector3, DensityMatrix4, Error};

/// Error control and sampling for one propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Relative tolerance per component. Capped at 1e-6 so step control
    /// can never be effectively switched off.
    pub rel_tol: f64,
    /// Absolute tolerance floor, guards components passing through zero.
    pub abs_tol: f64,
    /// Upper bound on the adaptive step. Resolved against the sweep as
    /// min(max_step, span/100); `None` means span/100.
    pub max_step: Option<f64>,
    /// First trial step; `None` means span/10⁴.
    pub init_step: Option<f64>,
    /// Number of equally spaced output samples, endpoints included.
    pub sample_count: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            init_step: None,
            sample_count: 201,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-6) {
            return Err(Error::invalid(
                "rel_tol",
                format!("must lie in (0, 1e-6], got {:e}", self.rel_tol),
            ));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid(
                "abs_tol",
                format!("must be positive and finite, got {:e}", self.abs_tol),
            ));
        }
        for (name, v) in [("max_step", self.max_step), ("init_step", self.init_step)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(name, format!("must be positive, got {v:e}")));
                }
            }
        }
        if self.sample_count < 2 {
            return Err(Error::invalid(
                "sample_count",
                format!("need at least 2 samples, got {}", self.sample_count),
            ));
        }
        Ok(())
    }

    /// Hard limits for a sweep covering `span` units of time.
    fn limits(&self, span: f64) -> StepLimits {
        StepLimits {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY).min(span / 100.0),
            h_min: 1e-14 * 0.5 * span,
        }
    }

    fn initial_step(&self, span: f64, limits: &StepLimits) -> f64 {
        self.init_step.unwrap_or(span * 1e-4).min(limits.max_step)
    }
}

/// Sampled states along one propagation. `times` is strictly increasing
/// with exact endpoints at ±t₀.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
}

impl Trajectory<CVector3> {
    /// |ψₙ|² per sample. Sums to 1 for coherent evolution and decays
    /// monotonically once any Γₙ is switched on.
    pub fn populations(&self) -> Vec<[f64; 3]> {
        self.states
            .iter()
            .map(|s| [s[0].norm_sqr(), s[1].norm_sqr(), s[2].norm_sqr()])
            .collect()
    }

    pub fn final_populations(&self) -> [f64; 3] {
        let s = self.states.last().expect("trajectory has at least two samples");
        [s[0].norm_sqr(), s[1].norm_sqr(), s[2].norm_sqr()]
    }

    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.norm()).collect()
    }
}

impl Trajectory<DensityMatrix4> {
    /// Diagonal of ρ per sample; the fourth entry is the accumulated loss.
    pub fn populations(&self) -> Vec<[f64; 4]> {
        self.states
            .iter()
            .map(|r| [r[(0, 0)].re, r[(1, 1)].re, r[(2, 2)].re, r[(3, 3)].re])
            .collect()
    }

    pub fn final_populations(&self) -> [f64; 4] {
        let r = self.states.last().expect("trajectory has at least two samples");
        [r[(0, 0)].re, r[(1, 1)].re, r[(2, 2)].re, r[(3, 3)].re]
    }

    /// Re tr ρ per sample; unity to rounding for the jump-operator model.
    pub fn traces(&self) -> Vec<f64> {
        self.states.iter().map(|r| (r[(0, 0)] + r[(1, 1)] + r[(2, 2)] + r[(3, 3)]).re).collect()
    }

    /// Upper-left 3×3 block of ρ at sample `k`: the coherences and
    /// populations still inside the chain.
    pub fn three_level_block(&self, k: usize) -> CMatrix3 {
        self.states[k].fixed_view::<3, 3>(0, 0).into_owned()
    }
}

fn check_normalized(initial: &CVector3) -> Result<(), Error> {
    let norm = initial.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("initial", format!("state must be normalized, ‖ψ‖ = {norm}")));
    }
    Ok(())
}

/// Propagate a wavefunction from −t₀ to t₀.
///
/// With `decay` absent the generator is −iH(t) and the norm is conserved;
/// with decay present the diagonal gains −iΓₙ (plus the level-2 detuning)
/// and ‖ψ‖² decays monotonically, the lost weight being the leak out of
/// the chain.
pub fn evolve(
    p: &ModelParams,
    decay: Option<&DecayParams>,
    initial: &CVector3,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<CVector3>, Error> {
    p.validate()?;
    if let Some(d) = decay {
        d.validate()?;
    }
    cfg.validate()?;
    check_normalized(initial)?;

    let span = 2.0 * p.half_window;
    let limits = cfg.limits(span);
    let times = linspace(-p.half_window, p.half_window, cfg.sample_count);
    let minus_i = C64::new(0.0, -1.0);
    let p = *p;
    let decay = decay.copied();
    let mut gen = move |t: f64| match decay {
        Some(d) => effective_hamiltonian(&p, &d, t) * minus_i,
        None => ideal_hamiltonian(&p, t) * minus_i,
    };
    let states = integrate_sampled(
        &times,
        *initial,
        cfg.initial_step(span, &limits),
        &limits,
        &mut gen,
        &mut |_| {},
    )?;
    Ok(Trajectory { times, states })
}

/// Fixed-step variant of [`evolve`] with no error control, exposed so the
/// integrator's convergence order can be measured from outside.
pub fn evolve_fixed(
    p: &ModelParams,
    decay: Option<&DecayParams>,
    initial: &CVector3,
    n_steps: usize,
) -> Result<Trajectory<CVector3>, Error> {
    p.validate()?;
    if let Some(d) = decay {
        d.validate()?;
    }
    check_normalized(initial)?;
    if n_steps == 0 {
        return Err(Error::invalid("n_steps", "need at least one step"));
    }

    let minus_i = C64::new(0.0, -1.0);
    let p_owned = *p;
    let decay = decay.copied();
    let mut gen = move |t: f64| match decay {
        Some(d) => effective_hamiltonian(&p_owned, &d, t) * minus_i,
        None => ideal_hamiltonian(&p_owned, t) * minus_i,
    };
    let (times, states) =
        integrate_fixed(-p.half_window, p.half_window, n_steps, *initial, &mut gen, &mut |_| {});
    Ok(Trajectory { times, states })
}

/// Population arriving in level `to` at +t₀ after starting in level
/// `from` at −t₀. Levels are numbered 1..=3.
pub fn transfer_efficiency(
    p: &ModelParams,
    decay: Option<&DecayParams>,
    from: u8,
    to: u8,
    cfg: &IntegratorConfig,
) -> Result<f64, Error> {
    if !(1..=3).contains(&to) {
        return Err(Error::invalid("to", format!("level must be 1..=3, got {to}")));
    }
    let traj = evolve(p, decay, &basis_state(from)?, cfg)?;
    Ok(traj.final_populations()[(to - 1) as usize])
}

/// Jump operators √(2Γₙ)|4⟩⟨n| dump each chain level into the spectator.
/// Their dissipator is time independent, so it is assembled once.
fn dissipator(d: &DecayParams) -> SMatrix<C64, 16, 16> {
    let mut total = SMatrix::<C64, 16, 16>::zeros();
    let id = SMatrix::<C64, 4, 4>::identity();
    for (n, gamma) in [d.gamma1, d.gamma2, d.gamma3].into_iter().enumerate() {
        if gamma == 0.0 {
            continue;
        }
        let mut jump = SMatrix::<C64, 4, 4>::zeros();
        jump[(3, n)] = C64::from((2.0 * gamma).sqrt());
        let jj = jump.adjoint() * jump;
        total += jump.conjugate().kronecker(&jump)
            - (id.kronecker(&jj) + jj.transpose().kronecker(&id)) * C64::from(0.5);
    }
    total
}

/// 16×16 generator of ρ̇ = 𝓛(t)vec(ρ) under column stacking, where
/// vec(AρB) = (Bᵀ⊗A)vec(ρ).
fn liouvillian_matrix(
    p: &ModelParams,
    d: &DecayParams,
    diss: &SMatrix<C64, 16, 16>,
    t: f64,
) -> SMatrix<C64, 16, 16> {
    let id = SMatrix::<C64, 4, 4>::identity();
    let h = four_level_hamiltonian(p, d, t);
    (id.kronecker(&h) - h.transpose().kronecker(&id)) * C64::new(0.0, -1.0) + diss
}

/// Instantaneous action of the master equation on ρ, computed through the
/// same vectorized generator [`evolve_lindblad4`] integrates. Exposed so
/// the generator can be cross-checked against the commutator-plus-jumps
/// form written out directly.
pub fn apply_liouvillian(
    p: &ModelParams,
    d: &DecayParams,
    t: f64,
    rho: &DensityMatrix4,
) -> DensityMatrix4 {
    let l = liouvillian_matrix(p, d, &dissipator(d), t);
    let v = l * SVector::<C64, 16>::from_column_slice(rho.as_slice());
    DensityMatrix4::from_column_slice(v.as_slice())
}

fn check_density_matrix(rho: &DensityMatrix4) -> Result<(), Error> {
    if (rho - rho.adjoint()).norm() > 1e-9 {
        return Err(Error::invalid("rho0", "density matrix must be Hermitian"));
    }
    let trace = (rho[(0, 0)] + rho[(1, 1)] + rho[(2, 2)] + rho[(3, 3)]).re;
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("rho0", format!("trace must be 1, got {trace}")));
    }
    let min_eig = rho
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &e| m.min(e));
    if min_eig < -1e-9 {
        return Err(Error::invalid(
            "rho0",
            format!("density matrix must be positive semidefinite, min eigenvalue {min_eig:e}"),
        ));
    }
    Ok(())
}

/// Propagate a 4-level density matrix under the chain Hamiltonian plus
/// jump operators into the spectator level.
///
/// The master equation is linearized by column stacking: ρ̇ = 𝓛(t)vec(ρ)
/// with 𝓛 = −i(I⊗H − Hᵀ⊗I) + Σₙ[L̄ₙ⊗Lₙ − ½(I⊗Lₙ†Lₙ + (Lₙ†Lₙ)ᵀ⊗I)].
/// Each accepted step re-symmetrizes ρ so Hermiticity cannot drift.
pub fn evolve_lindblad4(
    p: &ModelParams,
    d: &DecayParams,
    rho0: &DensityMatrix4,
    cfg: &IntegratorConfig,
) -> Result<Trajectory<DensityMatrix4>, Error> {
    p.validate()?;
    d.validate()?;
    cfg.validate()?;
    check_density_matrix(rho0)?;

    let span = 2.0 * p.half_window;
    let limits = cfg.limits(span);
    let times = linspace(-p.half_window, p.half_window, cfg.sample_count);
    let diss = dissipator(d);
    let p_owned = *p;
    let d_owned = *d;
    let mut gen = move |t: f64| liouvillian_matrix(&p_owned, &d_owned, &diss, t);
    let mut resym = |v: &mut SVector<C64, 16>| {
        let rho = DensityMatrix4::from_column_slice(v.as_slice());
        let sym = (rho + rho.adjoint()) * C64::from(0.5);
        v.copy_from_slice(sym.as_slice());
    };
    let states = integrate_sampled(
        &times,
        SVector::<C64, 16>::from_column_slice(rho0.as_slice()),
        cfg.initial_step(span, &limits),
        &limits,
        &mut gen,
        &mut resym,
    )?;
    let states = states
        .into_iter()
        .map(|v| DensityMatrix4::from_column_slice(v.as_slice()))
        .collect();
    Ok(Trajectory { times, states })
}

/// Final excited-state population of the isolated two-level crossing
/// H₂(t) = [[−κt, ωe^{iφ′}], [ωe^{−iφ′}, κt]], starting in level 1 at
/// −t₀. For κt₀² ≫ 1 this approaches 1 − exp(−πω²/κ).
pub fn lz_two_state_reference(
    omega: f64,
    varphi: f64,
    kappa: f64,
    t0: f64,
    cfg: &IntegratorConfig,
) -> Result<f64, Error> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid("kappa", format!("must be positive, got {kappa}")));
    }
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", format!("must be nonnegative, got {omega}")));
    }
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::invalid("t0", format!("must be positive, got {t0}")));
    }
    cfg.validate()?;

    let span = 2.0 * t0;
    let limits = cfg.limits(span);
    let coupling = C64::from_polar(omega, varphi);
    let mut gen = move |t: f64| {
        SMatrix::<C64, 2, 2>::new(
            C64::new(-kappa * t, 0.0),
            coupling,
            coupling.conj(),
            C64::new(kappa * t, 0.0),
        ) * C64::new(0.0, -1.0)
    };
    let mut y = SVector::<C64, 2>::new(C64::from(1.0), C64::from(0.0));
    let mut h = cfg.initial_step(span, &limits);
    advance_span(&mut y, -t0, t0, &mut h, &limits, &mut gen, &mut |_| {})?;
    Ok(y[1].norm_sqr())
}

/// Re-run a 1→3 transfer with both tolerances tightened tenfold and
/// report (tighter efficiency, |shift from the requested tolerances|).
/// A shift far above rel_tol means the requested tolerances are not
/// actually converged.
pub fn convergence_check(
    p: &ModelParams,
    decay: Option<&DecayParams>,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64), Error> {
    let base = transfer_efficiency(p, decay, 1, 3, cfg)?;
    let tight = IntegratorConfig {
        rel_tol: cfg.rel_tol / 10.0,
        abs_tol: cfg.abs_tol / 10.0,
        ..*cfg
    };
    let refined = transfer_efficiency(p, decay, 1, 3, &tight)?;
    Ok((refined, (refined - base).abs()))
}
