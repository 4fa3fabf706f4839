//! Adaptive exponential-midpoint propagation shared by the wavefunction
//! and density-matrix evolvers.
//!
//! A step advances y' = G(t)·y by y ← exp(G(t+h/2)·h)·y, which is exact
//! for constant G (so arbitrarily stiff diagonal decay costs nothing) and
//! second order in h for time-dependent G. Error control is by step
//! doubling: the full step is compared against two half steps and the
//! half-step result is kept, so the propagated solution stays strictly
//! second order and the comparison gives a free local error estimate.

use nalgebra::{SMatrix, SVector};

use crate::expm::expm;
use crate::{C64, Error};

/// Hard limits the controller must respect.
pub(crate) struct StepLimits {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step the controller may take, already resolved against the
    /// span by the caller.
    pub max_step: f64,
    /// Steps below this abort with [`Error::StepUnderflow`].
    pub h_min: f64,
}

/// One midpoint-exponential step of width h starting at t.
fn step<const N: usize>(
    y: &SVector<C64, N>,
    t: f64,
    h: f64,
    gen: &mut impl FnMut(f64) -> SMatrix<C64, N, N>,
) -> SVector<C64, N> {
    let g = gen(t + 0.5 * h) * C64::from(h);
    expm(&g) * y
}

/// Scaled max-norm of the half-step/full-step discrepancy. A value of 1
/// means the estimated local error sits exactly on tolerance.
fn error_ratio<const N: usize>(
    y_half: &SVector<C64, N>,
    y_full: &SVector<C64, N>,
    limits: &StepLimits,
) -> f64 {
    let mut ratio: f64 = 0.0;
    for i in 0..N {
        let mag = y_half[i].norm().max(y_full[i].norm());
        // An overflowed or NaN trial state must reject the step. f64::max
        // would silently drop a NaN component ratio, so test mag directly.
        if !mag.is_finite() {
            return f64::INFINITY;
        }
        let scale = 3.0 * (limits.abs_tol + limits.rel_tol * mag);
        ratio = ratio.max((y_half[i] - y_full[i]).norm() / scale);
    }
    ratio
}

/// Advance y from t_start to t_end with adaptive step doubling.
///
/// `h` is the controller's working step and persists across calls so a
/// trajectory sampled in many short spans does not restart cold at every
/// sample point. `post` runs once per accepted step (the density-matrix
/// evolver re-symmetrizes there).
pub(crate) fn advance_span<const N: usize>(
    y: &mut SVector<C64, N>,
    t_start: f64,
    t_end: f64,
    h: &mut f64,
    limits: &StepLimits,
    gen: &mut impl FnMut(f64) -> SMatrix<C64, N, N>,
    post: &mut impl FnMut(&mut SVector<C64, N>),
) -> Result<(), Error> {
    debug_assert!(t_end >= t_start);
    let mut t = t_start;
    while t < t_end {
        let remaining = t_end - t;
        let mut h_step = h.min(limits.max_step);
        let clipped = h_step >= remaining;
        if clipped {
            h_step = remaining;
        }

        let y_full = step(y, t, h_step, gen);
        let y_mid = step(y, t, 0.5 * h_step, gen);
        let y_half = step(&y_mid, t + 0.5 * h_step, 0.5 * h_step, gen);
        let ratio = error_ratio(&y_half, &y_full, limits);

        if ratio <= 1.0 {
            *y = y_half;
            post(y);
            t = if clipped { t_end } else { t + h_step };
            let grow = (0.9 * ratio.powf(-1.0 / 3.0)).clamp(0.2, 5.0);
            if !clipped {
                *h = (h_step * grow).min(limits.max_step);
            }
        } else {
            let shrink = (0.9 * ratio.powf(-1.0 / 3.0)).clamp(0.2, 0.9);
            let h_new = h_step * shrink;
            if h_new < limits.h_min {
                return Err(Error::StepUnderflow { t, step: h_new });
            }
            *h = h_new;
        }
    }
    Ok(())
}

/// Propagate through `times`, returning the state at every entry.
/// `times[0]` carries the initial state unchanged.
pub(crate) fn integrate_sampled<const N: usize>(
    times: &[f64],
    initial: SVector<C64, N>,
    init_step: f64,
    limits: &StepLimits,
    gen: &mut impl FnMut(f64) -> SMatrix<C64, N, N>,
    post: &mut impl FnMut(&mut SVector<C64, N>),
) -> Result<Vec<SVector<C64, N>>, Error> {
    let mut states = Vec::with_capacity(times.len());
    let mut y = initial;
    let mut h = init_step;
    states.push(y);
    for w in times.windows(2) {
        advance_span(&mut y, w[0], w[1], &mut h, limits, gen, post)?;
        states.push(y);
    }
    Ok(states)
}

/// Fixed uniform stepping with no error control; the per-step states come
/// back so callers can measure convergence order directly.
pub(crate) fn integrate_fixed<const N: usize>(
    t_start: f64,
    t_end: f64,
    n_steps: usize,
    initial: SVector<C64, N>,
    gen: &mut impl FnMut(f64) -> SMatrix<C64, N, N>,
    post: &mut impl FnMut(&mut SVector<C64, N>),
) -> (Vec<f64>, Vec<SVector<C64, N>>) {
    let h = (t_end - t_start) / n_steps as f64;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut y = initial;
    times.push(t_start);
    states.push(y);
    for k in 0..n_steps {
        let t = t_start + h * k as f64;
        y = step(&y, t, h, gen);
        post(&mut y);
        times.push(if k + 1 == n_steps { t_end } else { t_start + h * (k + 1) as f64 });
        states.push(y);
    }
    (times, states)
}

/// `n` equally spaced points with exact endpoints.
pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { b } else { a + step * k as f64 })
        .collect()
}
