//! Two-spin singlet oracle.
//!
//! Probabilities come from a brute-force state-vector calculation: the
//! singlet `(|01> - |10>)/√2`, projected onto spin eigenstates along
//! directions at angle `θ` in a fixed plane. B's angle is measured from a
//! zero π away from A's, so equal angles give equal signs.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::rational::{simplest_within, to_f64, Q};

/// Snapping tolerance where the exact answer is known to be rational.
const SNAP: f64 = 1e-12;

pub fn singlet_state() -> [Complex64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        Complex64::zero(),
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
        Complex64::zero(),
    ]
}

/// `[plus, minus]` eigenvectors of `cos θ σ_z + sin θ σ_x`.
fn spin_basis(theta: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// `p[a][b]` for outcome signs (0 = `+`) with both zeros shared.
pub fn outcome_probabilities(state: &[Complex64; 4], theta_a: f64, theta_b: f64) -> [[f64; 2]; 2] {
    let (ua, ub) = (spin_basis(theta_a), spin_basis(theta_b));
    let mut p = [[0.0; 2]; 2];
    for (a, pa) in p.iter_mut().enumerate() {
        for (b, pab) in pa.iter_mut().enumerate() {
            let mut amp = Complex64::zero();
            for s in 0..2 {
                for t in 0..2 {
                    amp += ua[a][s].conj() * ub[b][t].conj() * state[2 * s + t];
                }
            }
            *pab = amp.norm_sqr();
        }
    }
    p
}

/// Singlet probabilities with B's zero rotated by π.
pub fn same_sign_probabilities(theta_a: f64, theta_b: f64) -> [[f64; 2]; 2] {
    outcome_probabilities(&singlet_state(), theta_a, theta_b + PI)
}

/// Exact row `[Pr(++), Pr(+-), Pr(-+), Pr(--)]`.
///
/// When the angle difference is a multiple of π/2 or π/3 the rational value
/// is recovered from the oracle; elsewhere it is rounded within `tolerance`,
/// which must then be given.
pub fn singlet_row(alpha: &Angle, beta: &Angle, tolerance: Option<f64>) -> Result<[Q; 4]> {
    let p = same_sign_probabilities(alpha.radians(), beta.radians());
    debug_assert!((p[0][1] - p[1][0]).abs() < SNAP && (p[0][0] - p[1][1]).abs() < SNAP);
    let rational_angle = alpha
        .difference_in_pi(beta)
        .is_some_and(|d| [1u8, 2, 3].iter().any(|&k| *d.denom() == k.into()));
    let mismatch = if rational_angle {
        let v = simplest_within(p[0][1], SNAP)?;
        debug_assert!((Q::from_integer(8.into()) * &v).is_integer());
        v
    } else if let Some(tol) = tolerance {
        simplest_within(p[0][1], tol)?
    } else {
        return Err(Error::InvalidScenario(format!(
            "singlet probabilities at angles {alpha} and {beta} are not rational; \
             a rounding tolerance is required"
        )));
    };
    let half = Q::new(1.into(), 2.into());
    let mismatch = mismatch.clamp(Q::zero(), half.clone());
    let same = half - &mismatch;
    Ok([same.clone(), mismatch.clone(), mismatch, same])
}

/// Largest deviation of an exact row from the oracle, for reporting.
pub fn oracle_deviation(alpha: &Angle, beta: &Angle, row: &[Q; 4]) -> f64 {
    let p = same_sign_probabilities(alpha.radians(), beta.radians());
    let flat = [p[0][0], p[0][1], p[1][0], p[1][1]];
    flat.iter()
        .zip(row)
        .map(|(f, q)| (f - to_f64(q)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use num_traits::One;

    #[test]
    fn raw_singlet_is_anticorrelated() {
        let p = outcome_probabilities(&singlet_state(), 0.3, 0.3);
        assert!(p[0][0].abs() < 1e-15 && p[1][1].abs() < 1e-15);
        assert!((p[0][1] - 0.5).abs() < 1e-15);
        let total: f64 = p.iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_sign_law() {
        for k in 0..24 {
            let d = k as f64 * PI / 12.0;
            let p = same_sign_probabilities(0.7 + d, 0.7);
            assert!((p[0][0] - 0.5 * (d / 2.0).cos().powi(2)).abs() < 1e-14);
            assert!((p[0][1] - 0.5 * (d / 2.0).sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_rows() {
        let zero = Angle::zero();
        let h = q(1, 2);
        let z = Q::zero();
        assert_eq!(
            singlet_row(&zero, &zero, None).unwrap(),
            [h.clone(), z.clone(), z.clone(), h.clone()]
        );
        let r = singlet_row(&Angle::pi_fraction(1, 3), &zero, None).unwrap();
        assert_eq!(r[1], q(1, 8));
        let r = singlet_row(&Angle::pi_fraction(2, 3), &zero, None).unwrap();
        assert_eq!(r[1], q(3, 8));
        let r = singlet_row(&Angle::pi_fraction(1, 2), &zero, None).unwrap();
        assert_eq!(r[1], q(1, 4));
        let r = singlet_row(&Angle::pi_fraction(1, 1), &zero, None).unwrap();
        assert_eq!(r, [z.clone(), h.clone(), h, z]);
        assert!(
            oracle_deviation(
                &Angle::pi_fraction(1, 3),
                &zero,
                &singlet_row(&Angle::pi_fraction(1, 3), &zero, None).unwrap()
            ) < 1e-15
        );
    }

    #[test]
    fn irrational_rows_need_tolerance() {
        let a = Angle::pi_fraction(1, 4);
        assert!(singlet_row(&a, &Angle::zero(), None).is_err());
        let r = singlet_row(&a, &Angle::zero(), Some(1e-6)).unwrap();
        let exact = 0.5 * (PI / 8.0).sin().powi(2);
        assert!((to_f64(&r[1]) - exact).abs() <= 1e-6);
        assert_eq!(r.iter().sum::<Q>(), Q::one());
        assert!(singlet_row(&Angle::Radians(0.4), &Angle::zero(), None).is_err());
    }
}
