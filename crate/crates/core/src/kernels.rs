// SPDX-License-Identifier: Apache-2.0

//! Horizontally periodic Stokeslet and derivatives of the bilaplacian Green
//! function on `𝕋 × ℝ`.
//!
//! The Stokeslet is returned with the `1/8π` normalization of the contour
//! dynamics equation. The component formulas sometimes quoted without that
//! prefactor are this matrix multiplied by `8π`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const INV_8PI: f64 = 1.0 / (8.0 * PI);
const INV_4PI: f64 = 1.0 / (4.0 * PI);

/// Components of the 2×2 matrix `S(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stokeslet2x2 {
    pub s11: f64,
    pub s12: f64,
    pub s21: f64,
    pub s22: f64,
}

impl Stokeslet2x2 {
    /// `S · v`.
    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (
            self.s11 * v.0 + self.s12 * v.1,
            self.s21 * v.0 + self.s22 * v.1,
        )
    }
}

/// `cosh x₂ − cos x₁` written as `2 sinh²(x₂/2) + 2 sin²(x₁/2)` so that it
/// keeps full relative precision near the origin and its periodic copies.
#[inline]
pub fn kernel_denominator(x1: f64, x2: f64) -> f64 {
    let a = (0.5 * x2).sinh();
    let x1 = x1 - TWO_PI * (x1 / TWO_PI).round();
    let b = (0.5 * x1).sin();
    2.0 * (a * a + b * b)
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn check_regular(x1: f64, x2: f64, d: f64) -> Result<()> {
    if d == 0.0 || !d.is_finite() {
        Err(Error::SingularPoint { x1, x2 })
    } else {
        Ok(())
    }
}

/// `S(x) = (1/8π)[log(2(cosh x₂ − cos x₁)) Id − x₂/(cosh x₂ − cos x₁) ·
/// [[−sinh x₂, sin x₁], [sin x₁, sinh x₂]]]`.
pub fn stokeslet(x1: f64, x2: f64) -> Result<Stokeslet2x2> {
    let d = kernel_denominator(x1, x2);
    check_regular(x1, x2, d)?;
    let log_term = (2.0 * d).ln();
    let r = x2 / d;
    let off = -r * x1.sin();
    let diag = r * x2.sinh();
    Ok(Stokeslet2x2 {
        s11: INV_8PI * (log_term + diag),
        s12: INV_8PI * off,
        s21: INV_8PI * off,
        s22: INV_8PI * (log_term - diag),
    })
}

/// `∂₁∂₂K(x) = (1/8π) x₂ sin x₁ / (cosh x₂ − cos x₁)`.
pub fn dk12(x1: f64, x2: f64) -> Result<f64> {
    let d = kernel_denominator(x1, x2);
    check_regular(x1, x2, d)?;
    Ok(INV_8PI * x2 * x1.sin() / d)
}

/// Default truncation: `max(64, ⌈40 / max(|x₂|, 0.05)⌉)`, capped at `10⁵`.
pub fn default_n_max(x2: f64) -> usize {
    let n = (40.0 / x2.abs().max(0.05)).ceil() as usize;
    n.max(64).min(100_000)
}

fn resolve_n_max(n_max: usize, x2: f64) -> usize {
    if n_max == 0 {
        default_n_max(x2)
    } else {
        n_max
    }
}

/// Partial sum of `∂₁K(x) = −(1/4π) Σ_{n≥1} (n|x₂| + 1)/n² e^{−n|x₂|} sin(n x₁)`.
///
/// `n_max = 0` selects [`default_n_max`].
pub fn dk1_series(x1: f64, x2: f64, n_max: usize) -> f64 {
    let n_max = resolve_n_max(n_max, x2);
    let a = x2.abs();
    let decay = (-a).exp();
    let (s, c) = x1.sin_cos();
    let (qr, qi) = (decay * c, decay * s);
    // q^n by complex recurrence
    let (mut pr, mut pi) = (qr, qi);
    let mut sum = 0.0;
    for n in 1..=n_max {
        let nf = n as f64;
        sum += (nf * a + 1.0) / (nf * nf) * pi;
        let next_r = pr * qr - pi * qi;
        pi = pr * qi + pi * qr;
        pr = next_r;
    }
    -INV_4PI * sum
}

/// Partial sum of the `k ≠ 0` part of the bilaplacian Green function,
/// `(1/4π) Σ_{n≥1} (1 + n|x₂|)/n³ e^{−n|x₂|} cos(n x₁)`.
///
/// `n_max = 0` selects [`default_n_max`].
pub fn biharm_pair_kernel(x1: f64, x2: f64, n_max: usize) -> f64 {
    let n_max = resolve_n_max(n_max, x2);
    let a = x2.abs();
    let decay = (-a).exp();
    let (s, c) = x1.sin_cos();
    let (qr, qi) = (decay * c, decay * s);
    let (mut pr, mut pi) = (qr, qi);
    let mut sum = 0.0;
    for n in 1..=n_max {
        let nf = n as f64;
        sum += (1.0 + nf * a) / (nf * nf * nf) * pr;
        let next_r = pr * qr - pi * qi;
        pi = pr * qi + pi * qr;
        pr = next_r;
        if pr.abs() + pi.abs() < 1e-300 {
            break;
        }
    }
    INV_4PI * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stokeslet_at_half_period() {
        let s = stokeslet(PI, 0.0).unwrap();
        assert_abs_diff_eq!(s.s11, 4f64.ln() * INV_8PI, epsilon = 1e-15);
        assert_abs_diff_eq!(s.s22, 4f64.ln() * INV_8PI, epsilon = 1e-15);
        assert_abs_diff_eq!(s.s12, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn stokeslet_off_diagonal_value() {
        // -(1/8π) · 1 · sin(π/2) / (cosh 1 − cos(π/2))
        let s = stokeslet(PI / 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(s.s12, -0.025_785_260_261_358_81, epsilon = 1e-15);
        assert_eq!(s.s12, s.s21);
    }

    #[test]
    fn singular_point_is_rejected() {
        assert!(stokeslet(0.0, 0.0).is_err());
        assert!(dk12(2.0 * PI, 0.0).is_err());
    }

    #[test]
    fn stokeslet_is_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let x1 = rng.gen_range(-PI..PI);
            let x2 = rng.gen_range(-3.0..3.0);
            let a = stokeslet(x1, x2).unwrap();
            let b = stokeslet(-x1, -x2).unwrap();
            assert_abs_diff_eq!(a.s11, b.s11, epsilon = 1e-14);
            assert_abs_diff_eq!(a.s12, b.s12, epsilon = 1e-14);
            assert_abs_diff_eq!(a.s22, b.s22, epsilon = 1e-14);
            assert_eq!(a.s12, a.s21);
        }
    }

    #[test]
    fn stokeslet_log_singularity_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let theta = rng.gen_range(0.0..2.0 * PI);
            let r = 10f64.powf(rng.gen_range(-8.0..-1.0));
            let s = stokeslet(r * theta.cos(), r * theta.sin()).unwrap();
            // |x₂ sinh x₂/D| ≤ 2 near the origin, log(2D) ≈ 2 log r
            let bound = 0.2 + r.ln().abs() / (4.0 * PI);
            assert!(s.s11.abs() <= bound, "r={r} s11={}", s.s11);
            assert!(s.s22.abs() <= bound);
        }
    }

    #[test]
    fn dk12_values_and_parity() {
        assert_eq!(dk12(1.3, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(
            dk12(PI / 2.0, 1.0).unwrap(),
            1.0 / (8.0 * PI * 1f64.cosh()),
            epsilon = 1e-16
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let x1 = rng.gen_range(-PI..PI);
            let x2 = rng.gen_range(-3.0..3.0);
            let v = dk12(x1, x2).unwrap();
            assert_abs_diff_eq!(dk12(-x1, x2).unwrap(), -v, epsilon = 1e-14);
            assert_abs_diff_eq!(dk12(x1, -x2).unwrap(), -v, epsilon = 1e-14);
        }
    }

    #[test]
    fn dk1_series_symmetries() {
        assert_eq!(dk1_series(0.0, 0.7, 50), 0.0);
        assert_eq!(dk1_series(1.1, 0.4, 0), dk1_series(1.1, -0.4, 0));
    }

    #[test]
    fn dk1_series_matches_closed_form_mixed_derivative() {
        let h = 1e-4;
        let fd = (dk1_series(PI / 2.0, 1.0 + h, 0) - dk1_series(PI / 2.0, 1.0 - h, 0)) / (2.0 * h);
        assert_abs_diff_eq!(fd, dk12(PI / 2.0, 1.0).unwrap(), epsilon = 1e-6);
    }

    #[test]
    fn biharm_kernel_examples() {
        assert_abs_diff_eq!(biharm_pair_kernel(0.0, 0.0, 1), INV_4PI, epsilon = 1e-16);
        assert_eq!(
            biharm_pair_kernel(0.9, 0.3, 200),
            biharm_pair_kernel(-0.9, 0.3, 200)
        );
        // ∂₁ of the series, term by term, against a central difference
        let h = 1e-5;
        let fd = (biharm_pair_kernel(PI / 2.0 + h, 1.0, 0) - biharm_pair_kernel(PI / 2.0 - h, 1.0, 0))
            / (2.0 * h);
        let termwise: f64 = -(1..200)
            .map(|n| {
                let n = n as f64;
                (1.0 + n) * (-n).exp() * (n * PI / 2.0).sin() / (n * n)
            })
            .sum::<f64>()
            * INV_4PI;
        assert_abs_diff_eq!(fd, termwise, epsilon = 1e-6);
        assert_abs_diff_eq!(fd, dk1_series(PI / 2.0, 1.0, 0), epsilon = 1e-6);
    }

    #[test]
    fn biharm_kernel_decays() {
        let grid: Vec<f64> = (0..200).map(|k| -PI + 2.0 * PI * k as f64 / 200.0).collect();
        let sup = |x2: f64| {
            grid.iter()
                .map(|x1| biharm_pair_kernel(*x1, x2, 0).abs())
                .fold(0.0, f64::max)
        };
        assert!(sup(10.0) <= 1e-3 * sup(0.0));
        // pointwise wherever the x₂ = 0 profile is away from its zero crossings
        for x1 in &grid {
            let near = biharm_pair_kernel(*x1, 0.0, 0).abs();
            if near >= 0.5 * INV_4PI {
                assert!(biharm_pair_kernel(*x1, 10.0, 0).abs() <= 1e-3 * near, "x1={x1}");
            }
        }
    }
}
