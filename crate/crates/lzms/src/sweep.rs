//! Parameter-plane scans of the transfer efficiency and the named figure
//! presets built on them.
//!
//! A sweep evaluates one propagation per grid point, axis1 outer and
//! axis2 inner, writing each record into its pre-allocated slot. With the
//! `parallel` feature rows are distributed over a worker pool; because
//! every point is independent and lands in its own slot, the result is
//! bit-identical for any worker count.

use crate::dynamics::{evolve, IntegratorConfig};
use crate::integrator::linspace;
use crate::model::{basis_state, DecayParams, ModelParams};
use crate::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Quantity a sweep axis varies. Couplings and rates are dimensionless
/// ratios against the ladder coupling Ω; decay axes are base-10 exponents
/// of Γ/Ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisParam {
    /// ω/Ω, the direct 1–3 coupling.
    OmegaRatio,
    /// κ/Ω², the sweep rate.
    KappaRatio,
    /// log₁₀(Γ₁/Ω).
    Gamma1,
    /// log₁₀(Γ₂/Ω).
    Gamma2,
    /// log₁₀(Γ₃/Ω).
    Gamma3,
    /// Ladder phase φ in radians.
    Phi,
    /// Direct phase φ′ in radians.
    Varphi,
}

impl AxisParam {
    pub fn name(&self) -> &'static str {
        match self {
            AxisParam::OmegaRatio => "omega_over_Omega",
            AxisParam::KappaRatio => "kappa_over_Omega2",
            AxisParam::Gamma1 => "log10_Gamma1",
            AxisParam::Gamma2 => "log10_Gamma2",
            AxisParam::Gamma3 => "log10_Gamma3",
            AxisParam::Phi => "phi",
            AxisParam::Varphi => "varphi",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "omega_over_Omega" => Ok(AxisParam::OmegaRatio),
            "kappa_over_Omega2" => Ok(AxisParam::KappaRatio),
            "log10_Gamma1" => Ok(AxisParam::Gamma1),
            "log10_Gamma2" => Ok(AxisParam::Gamma2),
            "log10_Gamma3" => Ok(AxisParam::Gamma3),
            "phi" => Ok(AxisParam::Phi),
            "varphi" => Ok(AxisParam::Varphi),
            other => Err(Error::invalid(
                "axis",
                format!(
                    "unknown axis `{other}`; valid: omega_over_Omega, kappa_over_Omega2, \
                     log10_Gamma1, log10_Gamma2, log10_Gamma3, phi, varphi"
                ),
            )),
        }
    }

    fn is_decay_rate(&self) -> bool {
        matches!(self, AxisParam::Gamma1 | AxisParam::Gamma2 | AxisParam::Gamma3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    Log10,
}

/// One sweep dimension. Coordinates are taken uniformly in [min, max];
/// for decay axes the coordinate is the exponent, so the rate itself is
/// log-spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: AxisParam,
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n == 0 {
            return Err(Error::invalid("axis", format!("{} needs n ≥ 1", self.param.name())));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::invalid("axis", format!("{} bounds must be finite", self.param.name())));
        }
        if self.n > 1 && self.min >= self.max {
            return Err(Error::invalid(
                "axis",
                format!("{} needs min < max for n > 1, got [{}, {}]", self.param.name(), self.min, self.max),
            ));
        }
        let want_log = self.param.is_decay_rate();
        let is_log = self.scale == AxisScale::Log10;
        if want_log != is_log {
            return Err(Error::invalid(
                "axis",
                format!(
                    "{} must use {} scale",
                    self.param.name(),
                    if want_log { "log10" } else { "linear" }
                ),
            ));
        }
        Ok(())
    }

    /// Grid coordinates, uniformly spaced with exact endpoints.
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            vec![self.min]
        } else {
            linspace(self.min, self.max, self.n)
        }
    }

    /// Override the parameter this axis controls, scaling dimensionless
    /// coordinates by the base ladder coupling.
    pub fn apply(&self, coord: f64, m: &mut ModelParams, d: &mut DecayParams) {
        let omega_big = m.ladder_coupling;
        match self.param {
            AxisParam::OmegaRatio => m.direct_coupling = coord * omega_big,
            AxisParam::KappaRatio => m.sweep_rate = coord * omega_big * omega_big,
            AxisParam::Gamma1 => d.gamma1 = 10f64.powf(coord) * omega_big,
            AxisParam::Gamma2 => d.gamma2 = 10f64.powf(coord) * omega_big,
            AxisParam::Gamma3 => d.gamma3 = 10f64.powf(coord) * omega_big,
            AxisParam::Phi => m.ladder_phase = coord,
            AxisParam::Varphi => m.direct_phase = coord,
        }
    }
}

/// Full description of a sweep: grid, base parameters the axes override,
/// transfer direction, and integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub base_model: ModelParams,
    pub base_decay: DecayParams,
    pub from: u8,
    pub to: u8,
    pub cfg: IntegratorConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), Error> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.param == self.axis1.param {
                return Err(Error::invalid("axis2", "axes must vary distinct parameters"));
            }
        }
        self.base_model.validate()?;
        self.base_decay.validate()?;
        self.cfg.validate()?;
        for (name, v) in [("from", self.from), ("to", self.to)] {
            if !(1..=3).contains(&v) {
                return Err(Error::invalid(name, format!("level must be 1..=3, got {v}")));
            }
        }
        Ok(())
    }
}

/// One grid point. `failed` marks integration failures; the populations
/// and leak are NaN there so they cannot be mistaken for data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub axis1: f64,
    pub axis2: Option<f64>,
    pub populations: [f64; 3],
    /// 1 − ΣPₙ: weight lost out of the chain (or −rounding for coherent runs).
    pub leak: f64,
    pub failed: bool,
}

/// Completed sweep: the spec that produced it plus n₁ × n₂ records in
/// row-major order, axis1 outer.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub records: Vec<SweepRecord>,
}

fn evaluate_point(spec: &SweepSpec, v1: f64, v2: Option<f64>) -> SweepRecord {
    let mut m = spec.base_model;
    let mut d = spec.base_decay;
    spec.axis1.apply(v1, &mut m, &mut d);
    if let (Some(a2), Some(v2)) = (&spec.axis2, v2) {
        a2.apply(v2, &mut m, &mut d);
    }
    let outcome = basis_state(spec.from)
        .and_then(|psi| evolve(&m, Some(&d), &psi, &spec.cfg))
        .map(|traj| traj.final_populations());
    match outcome {
        Ok(p) => SweepRecord {
            axis1: v1,
            axis2: v2,
            populations: p,
            leak: 1.0 - p[0] - p[1] - p[2],
            failed: false,
        },
        Err(_) => SweepRecord {
            axis1: v1,
            axis2: v2,
            populations: [f64::NAN; 3],
            leak: f64::NAN,
            failed: true,
        },
    }
}

fn fill_rows(spec: &SweepSpec, v1s: &[f64], v2s: &[f64], records: &mut [SweepRecord]) {
    let n2 = v2s.len().max(1);
    let row = |i: usize, slot: &mut [SweepRecord]| {
        let v1 = v1s[i];
        if v2s.is_empty() {
            slot[0] = evaluate_point(spec, v1, None);
        } else {
            for (j, &v2) in v2s.iter().enumerate() {
                slot[j] = evaluate_point(spec, v1, Some(v2));
            }
        }
    };
    #[cfg(feature = "parallel")]
    records.par_chunks_mut(n2).enumerate().for_each(|(i, slot)| row(i, slot));
    #[cfg(not(feature = "parallel"))]
    records.chunks_mut(n2).enumerate().for_each(|(i, slot)| row(i, slot));
}

/// Run a sweep on the default worker pool (all CPUs with the `parallel`
/// feature, in-order single-threaded without it).
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, Error> {
    run_sweep_with_workers(spec, None)
}

/// Run a sweep on `workers` threads. `None` means the default pool;
/// without the `parallel` feature the count is ignored and execution is
/// sequential.
pub fn run_sweep_with_workers(
    spec: &SweepSpec,
    workers: Option<usize>,
) -> Result<SweepResult, Error> {
    spec.validate()?;
    let v1s = spec.axis1.values();
    let v2s = spec.axis2.as_ref().map(|a| a.values()).unwrap_or_default();
    let n2 = v2s.len().max(1);
    let mut records = vec![
        SweepRecord { axis1: 0.0, axis2: None, populations: [f64::NAN; 3], leak: f64::NAN, failed: true };
        v1s.len() * n2
    ];

    #[cfg(feature = "parallel")]
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::invalid("workers", e.to_string()))?;
            pool.install(|| fill_rows(spec, &v1s, &v2s, &mut records));
        }
        None => fill_rows(spec, &v1s, &v2s, &mut records),
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        fill_rows(spec, &v1s, &v2s, &mut records);
    }

    Ok(SweepResult { spec: *spec, records })
}

/// Identifier of a preset parameter scan; `a`/`b`/`c` select the panel
/// variant (a phase, a coupling, or a rate, depending on the figure).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig1A, Fig1B, Fig1C,
    Fig2A, Fig2B, Fig2C,
    Fig3A, Fig3B, Fig3C,
    Fig4A, Fig4B, Fig4C,
    Fig5A, Fig5B, Fig5C,
}

impl FigureId {
    pub fn all() -> [FigureId; 15] {
        use FigureId::*;
        [
            Fig1A, Fig1B, Fig1C, Fig2A, Fig2B, Fig2C, Fig3A, Fig3B, Fig3C,
            Fig4A, Fig4B, Fig4C, Fig5A, Fig5B, Fig5C,
        ]
    }

    fn as_str(&self) -> &'static str {
        use FigureId::*;
        match self {
            Fig1A => "fig1a", Fig1B => "fig1b", Fig1C => "fig1c",
            Fig2A => "fig2a", Fig2B => "fig2b", Fig2C => "fig2c",
            Fig3A => "fig3a", Fig3B => "fig3b", Fig3C => "fig3c",
            Fig4A => "fig4a", Fig4B => "fig4b", Fig4C => "fig4c",
            Fig5A => "fig5a", Fig5B => "fig5b", Fig5C => "fig5c",
        }
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        FigureId::all()
            .into_iter()
            .find(|id| id.as_str() == lower)
            .ok_or_else(|| Error::UnknownFigureId {
                id: s.to_string(),
                valid: FigureId::all().map(|id| id.as_str()).join(", "),
            })
    }
}

/// One curve of a figure panel: its sweep plus a label that
/// distinguishes sibling curves in file names and metadata.
#[derive(Debug, Clone)]
pub struct FigureCurve {
    pub label: &'static str,
    pub spec: SweepSpec,
}

fn axis(param: AxisParam, min: f64, max: f64, n: usize) -> Axis {
    let scale = if param.is_decay_rate() { AxisScale::Log10 } else { AxisScale::Linear };
    Axis { param, min, max, n, scale }
}

/// Sweep configuration: only the endpoint populations matter, so two
/// samples per trajectory.
fn preset_cfg() -> IntegratorConfig {
    IntegratorConfig { sample_count: 2, ..IntegratorConfig::default() }
}

fn preset_base(omega_ratio: f64, kappa_ratio: f64, varphi: f64, t0: f64) -> ModelParams {
    ModelParams {
        sweep_rate: kappa_ratio,
        ladder_coupling: 1.0,
        direct_coupling: omega_ratio,
        ladder_phase: 0.0,
        direct_phase: varphi,
        half_window: t0,
    }
}

fn single_curve(spec: SweepSpec) -> Vec<FigureCurve> {
    vec![FigureCurve { label: "main", spec }]
}

/// All curves of one figure panel. Every 2D panel is a single curve;
/// the decay-comparison panels hold three, one per rate the swept Γ is
/// assigned to.
pub fn figure_curves(id: FigureId) -> Vec<FigureCurve> {
    use FigureId::*;
    let varphi_of = |letter: usize| [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI][letter];
    match id {
        Fig1A | Fig1B | Fig1C => {
            let letter = (id as usize) - (Fig1A as usize);
            single_curve(SweepSpec {
                axis1: axis(AxisParam::OmegaRatio, 0.0, 2.0, 101),
                axis2: Some(axis(AxisParam::KappaRatio, 0.05, 5.0, 101)),
                base_model: preset_base(0.0, 1.0, varphi_of(letter), 500.0),
                base_decay: DecayParams::default(),
                from: 1,
                to: 3,
                cfg: preset_cfg(),
            })
        }
        Fig2A | Fig2B | Fig2C => {
            let letter = (id as usize) - (Fig2A as usize);
            let (omega_ratio, kappa_ratio, t0) =
                [(0.0, 0.1, 500.0), (1.0, 0.1, 500.0), (1.0, 1.0, 50.0)][letter];
            [("gamma1", AxisParam::Gamma1), ("gamma2", AxisParam::Gamma2), ("gamma3", AxisParam::Gamma3)]
                .into_iter()
                .map(|(label, param)| FigureCurve {
                    label,
                    spec: SweepSpec {
                        axis1: axis(param, -5.0, 5.0, 201),
                        axis2: None,
                        base_model: preset_base(omega_ratio, kappa_ratio, 0.0, t0),
                        base_decay: DecayParams::default(),
                        from: 1,
                        to: 3,
                        cfg: preset_cfg(),
                    },
                })
                .collect()
        }
        Fig3A | Fig3B | Fig3C => {
            let letter = (id as usize) - (Fig3A as usize);
            let omega_ratio = [0.0, 0.5, 1.0][letter];
            single_curve(SweepSpec {
                axis1: axis(AxisParam::Gamma2, -5.0, 5.0, 101),
                axis2: Some(axis(AxisParam::KappaRatio, 0.05, 1.0, 101)),
                base_model: preset_base(omega_ratio, 1.0, 0.0, 500.0),
                base_decay: DecayParams::default(),
                from: 1,
                to: 3,
                cfg: preset_cfg(),
            })
        }
        Fig4A | Fig4B | Fig4C | Fig5A | Fig5B | Fig5C => {
            let (letter, kappa_ratio, t0) = if (id as usize) <= (Fig4C as usize) {
                ((id as usize) - (Fig4A as usize), 0.1, 500.0)
            } else {
                ((id as usize) - (Fig5A as usize), 1.0, 50.0)
            };
            single_curve(SweepSpec {
                axis1: axis(AxisParam::Gamma2, -5.0, 5.0, 101),
                axis2: Some(axis(AxisParam::OmegaRatio, 0.0, 2.0, 101)),
                base_model: preset_base(0.0, kappa_ratio, varphi_of(letter), t0),
                base_decay: DecayParams::default(),
                from: 1,
                to: 3,
                cfg: preset_cfg(),
            })
        }
    }
}

/// The panel's first (or only) sweep. Multi-curve panels expose their
/// siblings through [`figure_curves`].
pub fn figure_spec(id: FigureId) -> SweepSpec {
    figure_curves(id)
        .into_iter()
        .next()
        .expect("every figure id has at least one curve")
        .spec
}
