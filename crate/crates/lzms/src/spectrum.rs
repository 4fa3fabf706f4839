//! Closed-form spectrum of the coherent Hamiltonian and exact crossing
//! classification.
//!
//! The characteristic polynomial of H(t) has no λ² term (H is traceless),
//! so the spectrum is the real root triple of a depressed cubic
//! λ³ + pλ + q with
//!
//! ```text
//! p = −(2Ω² + ω² + κ²t²),    q = −2Ω²ω·cos χ,    χ = 2φ − φ′.
//! ```
//!
//! A level degeneracy requires κ²t² to hit [`crossing_rhs`], which is
//! strictly negative unless ω = Ω and cos²χ = 1; the only degeneracies are
//! therefore at t = 0 with either the top level isolated (χ even multiple
//! of π) or the bottom level isolated (χ odd multiple of π).

use crate::model::{chi, ModelParams};
use crate::Error;

/// Monic depressed cubic λ³ + pλ + q = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepressedCubic {
    /// Coefficient of λ (energy²). Nonpositive for every Hermitian H(t).
    pub p: f64,
    /// Constant term (energy³).
    pub q: f64,
}

impl DepressedCubic {
    /// Residual of a candidate root.
    pub fn eval(&self, lambda: f64) -> f64 {
        lambda * lambda * lambda + self.p * lambda + self.q
    }

    /// The three real roots, descending. Uses the trigonometric solution
    /// λ_k = 2√(−p/3)·cos(θ/3 − 2πk/3) with cos θ = −q/2 · (−3/p)^{3/2},
    /// clamping the cosine argument against rounding spill-over; valid
    /// whenever all roots are real (p ≤ 0 here, since −p is a sum of
    /// squares of the model couplings).
    pub fn real_roots(&self) -> [f64; 3] {
        if self.p >= 0.0 {
            // Reachable only at p = 0, which forces q = 0 for this model
            // (Ω = ω = 0 and t = 0): a triple root.
            let r = (-self.q).cbrt();
            return [r, r, r];
        }
        let radius = (-self.p / 3.0).sqrt();
        let cos_theta = (-self.q / (2.0 * radius * radius * radius)).clamp(-1.0, 1.0);
        let third = cos_theta.acos() / 3.0;
        let mut roots = [
            2.0 * radius * third.cos(),
            2.0 * radius * (third - 2.0 * std::f64::consts::FRAC_PI_3).cos(),
            2.0 * radius * (third - 4.0 * std::f64::consts::FRAC_PI_3).cos(),
        ];
        // θ/3 ∈ [0, π/3] already orders the branches; sort anyway so callers
        // can rely on it bitwise.
        roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
        roots
    }
}

/// Coefficients of the characteristic cubic of H(t).
pub fn characteristic_coeffs(p: &ModelParams, t: f64) -> DepressedCubic {
    let omega_big = p.ladder_coupling;
    let omega = p.direct_coupling;
    let drift = p.sweep_rate * t;
    DepressedCubic {
        p: -(2.0 * omega_big * omega_big + omega * omega + drift * drift),
        q: -2.0 * omega_big * omega_big * omega * chi(p).cos(),
    }
}

/// Instantaneous eigenvalues of H(t), sorted descending.
pub fn eigenvalues_ideal(p: &ModelParams, t: f64) -> [f64; 3] {
    characteristic_coeffs(p, t).real_roots()
}

/// Right-hand side of the degeneracy condition κ²t² = rhs.
///
/// Computed as 3·(Ω⁴ω²cos²χ)^{1/3} − ω² − 2Ω², which equals
/// −Ω²[x³ − 3(cos²χ)^{1/3}x + 2] with x = (ω²/Ω²)^{1/3} but stays finite
/// at Ω = 0. Nonnegative only when ω = Ω and cos²χ = 1 (where it is 0), so
/// a crossing can only ever happen at t = 0.
pub fn crossing_rhs(p: &ModelParams) -> f64 {
    let omega_big2 = p.ladder_coupling * p.ladder_coupling;
    let omega2 = p.direct_coupling * p.direct_coupling;
    let cos_chi = chi(p).cos();
    3.0 * (omega_big2 * omega_big2 * omega2 * cos_chi * cos_chi).cbrt() - omega2 - 2.0 * omega_big2
}

/// Degeneracy structure of the spectrum over the whole sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossingClass {
    /// All three gaps stay open for every t.
    NoCrossing,
    /// ω = Ω, χ = 2nπ: the top level is simple, the lower two touch.
    TopIsolated { crossing_time: f64 },
    /// ω = Ω, χ = (2n+1)π: the bottom level is simple, the upper two touch.
    BottomIsolated { crossing_time: f64 },
}

/// Classify whether the sweep contains a degeneracy.
///
/// `tol` is used as a relative tolerance on ω/Ω = 1 and as an absolute
/// circular distance (radians) of χ from the even/odd multiples of π.
/// The fully uncoupled corner Ω = ω = 0 rebuilds a triple bare crossing
/// that none of the classes describes; it reports NoCrossing.
pub fn classify_crossing(p: &ModelParams, tol: f64) -> CrossingClass {
    if p.ladder_coupling == 0.0 {
        return CrossingClass::NoCrossing;
    }
    let ratio_dev = (p.direct_coupling / p.ladder_coupling - 1.0).abs();
    if ratio_dev > tol {
        return CrossingClass::NoCrossing;
    }
    let phase = chi(p);
    // chi lives in (−π, π]: distance to the even class is |χ|, distance to
    // the odd class is measured to both ±π.
    let even_dist = phase.abs();
    let odd_dist = (phase.abs() - std::f64::consts::PI).abs();
    if even_dist <= tol {
        CrossingClass::TopIsolated { crossing_time: 0.0 }
    } else if odd_dist <= tol {
        CrossingClass::BottomIsolated { crossing_time: 0.0 }
    } else {
        CrossingClass::NoCrossing
    }
}

/// Smallest adjacent-level gap min(λ₁−λ₂, λ₂−λ₃) over a time interval.
///
/// Scans `n_samples` equally spaced times, then refines around the best
/// sample with a golden-section search (the gap is unimodal near its
/// minimum in every regime this model produces). Returns (gap, t_at).
pub fn min_gap(
    p: &ModelParams,
    t_range: (f64, f64),
    n_samples: usize,
) -> Result<(f64, f64), Error> {
    p.validate()?;
    if n_samples < 3 {
        return Err(Error::invalid("n_samples", format!("need at least 3, got {n_samples}")));
    }
    let (lo, hi) = t_range;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::invalid("t_range", format!("need finite lo < hi, got ({lo}, {hi})")));
    }
    let gap_at = |t: f64| {
        let [l1, l2, l3] = eigenvalues_ideal(p, t);
        (l1 - l2).min(l2 - l3)
    };

    let step = (hi - lo) / (n_samples - 1) as f64;
    let mut best_idx = 0;
    let mut best_gap = f64::INFINITY;
    for k in 0..n_samples {
        let g = gap_at(lo + step * k as f64);
        if g < best_gap {
            best_gap = g;
            best_idx = k;
        }
    }

    // Golden-section refinement inside the bracket around the best sample.
    let mut a = lo + step * best_idx.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_idx + 1) as f64).min(hi);
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = gap_at(x1);
    let mut f2 = gap_at(x2);
    for _ in 0..60 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = gap_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = gap_at(x2);
        }
    }
    let t_refined = if f1 <= f2 { x1 } else { x2 };
    let g_refined = f1.min(f2);
    let t_grid = lo + step * best_idx as f64;
    if g_refined < best_gap {
        Ok((g_refined, t_refined))
    } else {
        Ok((best_gap, t_grid))
    }
}
