// SPDX-License-Identifier: Apache-2.0

//! Quadrature rules on uniform periodic grids.

use std::f64::consts::PI;

/// Which logarithm is integrated over the singular cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogCellVariant {
    /// `log(4 sin²(β/2))`, the small-amplitude limit of the kernel.
    #[default]
    Halfangle,
    /// `log(4 sin²(β))`, as the formula is sometimes printed.
    Printed,
}

/// Composite Simpson over one period of periodic nodal data (`values.len()` even).
///
/// With the wrap-around node counted once this is `w/3 (4 Σ_odd + 2 Σ_even)`.
pub fn periodic_simpson(values: &[f64], spacing: f64) -> f64 {
    debug_assert!(values.len() % 2 == 0);
    let mut odd = 0.0;
    let mut even = 0.0;
    for (j, v) in values.iter().enumerate() {
        if j % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    spacing / 3.0 * (4.0 * odd + 2.0 * even)
}

/// Composite Simpson weights for nodes `0..=n` of an interval with `n` even
/// sub-intervals of width `spacing`.
pub fn simpson_weights(n: usize, spacing: f64) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even number of intervals");
    (0..=n)
        .map(|j| {
            let c = if j == 0 || j == n {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * spacing / 3.0
        })
        .collect()
}

/// Composite Simpson of samples `values[0..=n]` (odd sample count).
pub fn simpson(values: &[f64], spacing: f64) -> f64 {
    let n = values.len() - 1;
    simpson_weights(n, spacing)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Composite Simpson of `values[0..=n]` for any `n ≥ 1`; an odd interval
/// count closes with the 3/8 rule on the last three intervals.
pub fn simpson_any(values: &[f64], spacing: f64) -> f64 {
    let n = values.len() - 1;
    match n {
        0 => 0.0,
        1 => 0.5 * spacing * (values[0] + values[1]),
        _ if n % 2 == 0 => simpson(values, spacing),
        _ => {
            let tail = &values[n - 3..];
            let head = if n > 3 { simpson(&values[..=n - 3], spacing) } else { 0.0 };
            head + 3.0 * spacing / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3])
        }
    }
}

/// Adaptive Simpson with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `∫₀^w log(4 sin²(β/2)) dβ` (or the printed `sin²(β)` form).
///
/// The `2 log β` part is integrated in closed form; the smooth remainder
/// `log(sinc²)` goes through adaptive Simpson.
pub fn log_cell_integral(w: f64, variant: LogCellVariant) -> f64 {
    assert!(w > 0.0 && w < PI);
    let singular = 2.0 * (w * w.ln() - w);
    let remainder = match variant {
        LogCellVariant::Halfangle => {
            // 4 sin²(β/2) = β² · (sin(β/2)/(β/2))²
            let g = |b: f64| {
                if b == 0.0 {
                    0.0
                } else {
                    let s = (0.5 * b).sin() / (0.5 * b);
                    2.0 * s.ln()
                }
            };
            adaptive_simpson(&g, 0.0, w, 1e-16)
        }
        LogCellVariant::Printed => {
            // 4 sin²(β) = β² · 4 (sin β / β)²
            let g = |b: f64| {
                if b == 0.0 {
                    4f64.ln()
                } else {
                    4f64.ln() + 2.0 * (b.sin() / b).ln()
                }
            };
            adaptive_simpson(&g, 0.0, w, 1e-16)
        }
    };
    singular + remainder
}

/// Product-integration weights for `∫_𝕋 log(4 sin²((α−β)/2)) g(β) dβ`.
///
/// Entry `k` multiplies `g(β_j)` when `i − j ≡ k (mod m)`. The weights are
/// exact for trigonometric polynomials of degree `< m/2`, so constants
/// integrate to zero.
pub fn log_kernel_weights(m: usize) -> Vec<f64> {
    assert!(m >= 4 && m % 2 == 0);
    let mf = m as f64;
    let half = m / 2;
    (0..m)
        .map(|k| {
            let x = 2.0 * PI * k as f64 / mf;
            let mut s = 0.0;
            for n in 1..half {
                s += (n as f64 * x).cos() / n as f64;
            }
            let nyquist = if k % 2 == 0 { 1.0 } else { -1.0 };
            -4.0 * PI / mf * s - 4.0 * PI / (mf * mf) * nyquist
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn periodic_simpson_of_trig_is_exact() {
        let m = 64;
        let w = 2.0 * PI / m as f64;
        let v: Vec<f64> = (0..m)
            .map(|j| (-PI + w * j as f64).sin().powi(2))
            .collect();
        assert_abs_diff_eq!(periodic_simpson(&v, w), PI, epsilon = 1e-13);
    }

    #[test]
    fn simpson_any_handles_odd_counts() {
        let h = 0.1;
        for n in 1..9usize {
            let v: Vec<f64> = (0..=n).map(|j| (j as f64 * h).powi(if n == 1 { 1 } else { 3 })).collect();
            let x = n as f64 * h;
            let exact = if n == 1 { x * x / 2.0 } else { x.powi(4) / 4.0 };
            assert_abs_diff_eq!(simpson_any(&v, h), exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn simpson_on_cubic_is_exact() {
        let n = 10;
        let h = 0.3;
        let v: Vec<f64> = (0..=n).map(|j| (j as f64 * h).powi(3)).collect();
        let exact = (n as f64 * h).powi(4) / 4.0;
        assert_abs_diff_eq!(simpson(&v, h), exact, epsilon = 1e-12);
    }

    #[test]
    fn log_cell_is_negative_and_matches_series() {
        let w = 2.0 * PI / 256.0;
        let v = log_cell_integral(w, LogCellVariant::Halfangle);
        assert!(v < 0.0);
        // log(sinc²(β/2)) = -β²/12 - β⁴/1440 + ...
        let series = 2.0 * (w * w.ln() - w) - w.powi(3) / 36.0 - w.powi(5) / 7200.0;
        assert_abs_diff_eq!(v, series, epsilon = 1e-14);
    }

    #[test]
    fn printed_cell_differs_by_log4_at_leading_order() {
        let w = 0.01;
        let d = log_cell_integral(w, LogCellVariant::Printed)
            - log_cell_integral(w, LogCellVariant::Halfangle);
        assert_abs_diff_eq!(d, w * 4f64.ln(), epsilon = 1e-6);
    }

    #[test]
    fn log_weights_reproduce_fourier_symbol() {
        // ∫ log(4 sin²((α-β)/2)) cos(nβ) dβ = -(2π/n) cos(nα)
        let m = 32;
        let w = log_kernel_weights(m);
        let alpha = |j: usize| -PI + 2.0 * PI * j as f64 / m as f64;
        for n in [0usize, 1, 3, 7] {
            for i in [0usize, 5, 17] {
                let s: f64 = (0..m)
                    .map(|j| w[(i + m - j) % m] * (n as f64 * alpha(j)).cos())
                    .sum();
                let exact = if n == 0 {
                    0.0
                } else {
                    -2.0 * PI / n as f64 * (n as f64 * alpha(i)).cos()
                };
                assert_abs_diff_eq!(s, exact, epsilon = 1e-12);
            }
        }
    }
}
