//! Matrix exponential for small dense complex matrices.
//!
//! Scaling and squaring with the Padé approximant ladder of degrees
//! {3, 5, 7, 9, 13} (Higham's θ thresholds). The propagator calls this once
//! or more per integration step on 2×2..16×16 matrices, so everything stays
//! on the stack; the solve is an LU with partial pivoting.

use crate::C64;
use nalgebra::SMatrix;

const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// e^A for a square complex matrix with finite entries.
pub fn expm<const N: usize>(a: &SMatrix<C64, N, N>) -> SMatrix<C64, N, N> {
    let norm = one_norm(a);
    if norm <= THETA9 {
        let (u, v) = pade_low(a, norm);
        return solve_pade(&u, &v);
    }
    // Scale A down to the degree-13 trust region, square back afterwards.
    let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
    let scaled = a * C64::from(2.0_f64.powi(-s));
    let (u, v) = pade13(&scaled);
    let mut r = solve_pade(&u, &v);
    for _ in 0..s {
        r = r * r;
    }
    r
}

/// Max absolute column sum.
fn one_norm<const N: usize>(a: &SMatrix<C64, N, N>) -> f64 {
    (0..N)
        .map(|j| (0..N).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// (U, V) for the lowest Padé degree whose trust region contains `norm`.
fn pade_low<const N: usize>(
    a: &SMatrix<C64, N, N>,
    norm: f64,
) -> (SMatrix<C64, N, N>, SMatrix<C64, N, N>) {
    let id = SMatrix::<C64, N, N>::identity();
    let a2 = a * a;
    if norm <= THETA3 {
        let u = a * (a2 * C64::from(B3[3]) + id * C64::from(B3[1]));
        let v = a2 * C64::from(B3[2]) + id * C64::from(B3[0]);
        return (u, v);
    }
    let a4 = a2 * a2;
    if norm <= THETA5 {
        let u = a * (a4 * C64::from(B5[5]) + a2 * C64::from(B5[3]) + id * C64::from(B5[1]));
        let v = a4 * C64::from(B5[4]) + a2 * C64::from(B5[2]) + id * C64::from(B5[0]);
        return (u, v);
    }
    let a6 = a4 * a2;
    if norm <= THETA7 {
        let u = a * (a6 * C64::from(B7[7])
            + a4 * C64::from(B7[5])
            + a2 * C64::from(B7[3])
            + id * C64::from(B7[1]));
        let v = a6 * C64::from(B7[6])
            + a4 * C64::from(B7[4])
            + a2 * C64::from(B7[2])
            + id * C64::from(B7[0]);
        return (u, v);
    }
    let a8 = a6 * a2;
    let u = a * (a8 * C64::from(B9[9])
        + a6 * C64::from(B9[7])
        + a4 * C64::from(B9[5])
        + a2 * C64::from(B9[3])
        + id * C64::from(B9[1]));
    let v = a8 * C64::from(B9[8])
        + a6 * C64::from(B9[6])
        + a4 * C64::from(B9[4])
        + a2 * C64::from(B9[2])
        + id * C64::from(B9[0]);
    (u, v)
}

fn pade13<const N: usize>(
    a: &SMatrix<C64, N, N>,
) -> (SMatrix<C64, N, N>, SMatrix<C64, N, N>) {
    let id = SMatrix::<C64, N, N>::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_high = a6 * (a6 * C64::from(B13[13]) + a4 * C64::from(B13[11]) + a2 * C64::from(B13[9]));
    let u_low = a6 * C64::from(B13[7])
        + a4 * C64::from(B13[5])
        + a2 * C64::from(B13[3])
        + id * C64::from(B13[1]);
    let u = a * (u_high + u_low);
    let v_high = a6 * (a6 * C64::from(B13[12]) + a4 * C64::from(B13[10]) + a2 * C64::from(B13[8]));
    let v_low = a6 * C64::from(B13[6])
        + a4 * C64::from(B13[4])
        + a2 * C64::from(B13[2])
        + id * C64::from(B13[0]);
    (u, v_high + v_low)
}

/// Solve (V − U) X = (V + U) by Gaussian elimination with partial
/// pivoting; the Padé denominator is nonsingular inside the θ trust
/// regions, so a vanishing pivot cannot occur for valid input.
fn solve_pade<const N: usize>(
    u: &SMatrix<C64, N, N>,
    v: &SMatrix<C64, N, N>,
) -> SMatrix<C64, N, N> {
    let mut lhs = v - u;
    let mut rhs = v + u;
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&a, &b| {
                lhs[(a, col)].norm_sqr().partial_cmp(&lhs[(b, col)].norm_sqr()).expect("finite pivots")
            })
            .expect("nonempty pivot range");
        if pivot != col {
            lhs.swap_rows(col, pivot);
            rhs.swap_rows(col, pivot);
        }
        let diag = lhs[(col, col)];
        assert!(diag.norm_sqr() > 0.0, "Pade denominator is singular; input norm outside trust region");
        for row in col + 1..N {
            let factor = lhs[(row, col)] / diag;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for k in col + 1..N {
                let sub = factor * lhs[(col, k)];
                lhs[(row, k)] -= sub;
            }
            for k in 0..N {
                let sub = factor * rhs[(col, k)];
                rhs[(row, k)] -= sub;
            }
        }
    }
    // Back substitution, column by column of the right-hand side.
    let mut x = SMatrix::<C64, N, N>::zeros();
    for k in 0..N {
        for row in (0..N).rev() {
            let mut acc = rhs[(row, k)];
            for j in row + 1..N {
                acc -= lhs[(row, j)] * x[(j, k)];
            }
            x[(row, k)] = acc / lhs[(row, row)];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SMatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix<const N: usize>(rng: &mut ChaCha8Rng, scale: f64) -> SMatrix<C64, N, N> {
        SMatrix::from_fn(|_, _| {
            C64::new(
                scale * (rng.gen::<f64>() - 0.5),
                scale * (rng.gen::<f64>() - 0.5),
            )
        })
    }

    fn max_abs_diff<const N: usize>(a: &SMatrix<C64, N, N>, b: &SMatrix<C64, N, N>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = SMatrix::<C64, 3, 3>::zeros();
        assert_eq!(expm(&z), SMatrix::<C64, 3, 3>::identity());
    }

    #[test]
    fn diagonal_matrix_exponentiates_entrywise() {
        let d = SMatrix::<C64, 3, 3>::from_diagonal(&nalgebra::Vector3::new(
            C64::new(0.3, -1.2),
            C64::new(-2.0, 0.7),
            C64::new(0.0, 4.0),
        ));
        let e = expm(&d);
        for i in 0..3 {
            assert_relative_eq!(e[(i, i)].re, d[(i, i)].exp().re, max_relative = 1e-14);
            assert_relative_eq!(e[(i, i)].im, d[(i, i)].exp().im, max_relative = 1e-14);
        }
        assert!(e[(0, 1)].norm() < 1e-15 && e[(2, 0)].norm() < 1e-15);
    }

    #[test]
    fn agrees_with_nalgebra_exp_across_norm_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // Spans all five Pade degrees plus the squaring branch.
        for &scale in &[1e-3, 0.1, 0.5, 1.5, 4.0, 30.0, 400.0] {
            for _ in 0..20 {
                let a = random_matrix::<3>(&mut rng, scale);
                let reference = a.exp();
                let diff = max_abs_diff(&expm(&a), &reference);
                let bound = 1e-12 * one_norm(&reference).max(1.0);
                assert!(diff < bound, "scale {scale}: diff {diff:.3e} > {bound:.3e}");
            }
        }
    }

    #[test]
    fn agrees_with_nalgebra_exp_on_other_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let a2 = random_matrix::<2>(&mut rng, 2.0);
            assert!(max_abs_diff(&expm(&a2), &a2.exp()) < 1e-12);
            let a4 = random_matrix::<4>(&mut rng, 2.0);
            assert!(max_abs_diff(&expm(&a4), &a4.exp()) < 1e-12);
            let a16 = random_matrix::<16>(&mut rng, 1.0);
            assert!(max_abs_diff(&expm(&a16), &a16.exp()) < 1e-11);
        }
    }

    #[test]
    fn anti_hermitian_argument_gives_unitary_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let h = {
                let m = random_matrix::<3>(&mut rng, 3.0);
                (m + m.adjoint()) * C64::from(0.5)
            };
            let e = expm(&(h * C64::new(0.0, -1.0)));
            let gram = e.adjoint() * e;
            assert!(
                max_abs_diff(&gram, &SMatrix::<C64, 3, 3>::identity()) < 1e-13,
                "exp(-iH) lost unitarity"
            );
        }
    }

    #[test]
    fn inverse_matches_negated_argument() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = random_matrix::<4>(&mut rng, 1.2);
        let prod = expm(&a) * expm(&(-a));
        assert!(max_abs_diff(&prod, &SMatrix::<C64, 4, 4>::identity()) < 1e-12);
    }

    #[test]
    fn strong_decay_stays_finite_and_accurate() {
        // Stiff diagonal: decay rates up to 1e5 over a 0.01 step.
        let mut a = SMatrix::<C64, 3, 3>::from_diagonal(&nalgebra::Vector3::new(
            C64::new(0.0, -0.5),
            C64::new(-1e3, 0.0),
            C64::new(0.0, 0.5),
        ));
        a[(0, 1)] = C64::new(0.01, 0.0);
        a[(1, 0)] = C64::new(0.01, 0.0);
        let e = expm(&a);
        assert!(e.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!(max_abs_diff(&e, &a.exp()) < 1e-12);
        // The decaying mode is annihilated up to second-order leakage
        // through the 0.01 coupling, (0.01/1e3)² = 1e-10.
        assert!(e[(1, 1)].norm() < 1e-9);

        // Without coupling the dead mode underflows cleanly to zero.
        let diag = SMatrix::<C64, 3, 3>::from_diagonal(&nalgebra::Vector3::new(
            C64::new(0.0, -0.5),
            C64::new(-1e3, 0.0),
            C64::new(0.0, 0.5),
        ));
        let e = expm(&diag);
        assert!(e[(1, 1)].norm() < 1e-300);
        assert!((e[(0, 0)].norm() - 1.0).abs() < 1e-13);
    }
}
