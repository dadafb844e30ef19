// SPDX-License-Identifier: Apache-2.0

//! Scalar monitors of an interface: potential energy and its dissipation,
//! length, curvature, heights, symmetry defects, finger counts and Wiener
//! norms.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution_graph::SchemeParams;
use crate::geometry::{self, GraphInterface, ParamCurve};
use crate::kernels;
use crate::par;
use crate::quadrature::periodic_simpson;

/// One time slice of monitored quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    /// `dE/dt` from the velocity field at the sample.
    pub energy_rate: f64,
    /// Dissipation `δ` scaled to the run's time units (`dE/dt` without
    /// viscosity), when requested.
    pub delta: Option<f64>,
    pub perimeter: f64,
    pub max_curvature: f64,
    pub max_height: f64,
    /// `−min z₂`, stored positive for interfaces crossing zero.
    pub min_height: f64,
    pub central_sym_err: Option<f64>,
    pub even_sym_err: Option<f64>,
    pub finger_count: Option<usize>,
    pub wiener_norm: Option<f64>,
    /// `min ∂_α z₁` for curve runs.
    pub min_slope_x1: Option<f64>,
}

/// Which optional monitors to compute at each sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsOptions {
    /// Slope threshold of the finger decomposition.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub wiener_s: Option<f64>,
    #[serde(default)]
    pub wiener_nu: Option<f64>,
    /// Series truncation for `δ`; `None` skips it.
    #[serde(default)]
    pub delta_n_max: Option<usize>,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            mu: Some(0.05),
            wiener_s: Some(0.0),
            wiener_nu: Some(0.0),
            delta_n_max: Some(256),
        }
    }
}

impl DiagnosticsOptions {
    /// Energy, length, curvature, heights and symmetry only.
    pub fn minimal() -> Self {
        Self {
            mu: None,
            wiener_s: None,
            wiener_nu: None,
            delta_n_max: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(mu) = self.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::InvalidInput(format!("mu must be positive, got {mu}")));
            }
        }
        for (name, v) in [("wiener_s", self.wiener_s), ("wiener_nu", self.wiener_nu)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("{name} must be non-negative, got {v}")));
                }
            }
        }
        if let Some(n) = self.delta_n_max {
            if n < 16 {
                return Err(Error::InvalidInput(format!("delta_n_max must be at least 16, got {n}")));
            }
        }
        Ok(())
    }
}

/// `E = ∫_𝕋 h² dα` (composite Simpson).
pub fn energy(interface: &GraphInterface) -> f64 {
    let sq: Vec<f64> = interface.heights().iter().map(|h| h * h).collect();
    periodic_simpson(&sq, interface.spacing())
}

/// `E = ∫_𝕋 z₂² ∂_α z₁ dα`, the same functional for a parametric curve.
pub fn energy_curve(curve: &ParamCurve) -> f64 {
    let (d1, _) = curve.tangent();
    let f: Vec<f64> = curve.z2().iter().zip(&d1).map(|(z, d)| z * z * d).collect();
    periodic_simpson(&f, curve.spacing())
}

/// `2 ∫ h h_t dα`.
pub fn energy_rate(interface: &GraphInterface, h_t: &[f64]) -> f64 {
    let f: Vec<f64> = interface.heights().iter().zip(h_t).map(|(h, v)| h * v).collect();
    2.0 * periodic_simpson(&f, interface.spacing())
}

/// `d/dt ∫ z₂² ∂_α z₁` for velocity `(u₁, u₂)` at the nodes.
pub fn energy_rate_curve(curve: &ParamCurve, u1: &[f64], u2: &[f64]) -> Result<f64> {
    let w = curve.spacing();
    let (d1, _) = curve.tangent();
    let du1 = geometry::central_diff(u1, w)?;
    let f: Vec<f64> = (0..curve.m())
        .map(|j| {
            let z = curve.z2()[j];
            2.0 * z * u2[j] * d1[j] + z * z * du1[j]
        })
        .collect();
    Ok(periodic_simpson(&f, w))
}

/// `δ = 4 ∬ h'(α) h'(β) K(α − β, h(α) − h(β)) dα dβ` with the periodic
/// biharmonic kernel truncated at `min(n_max, default_n_max(x₂))` terms.
pub fn delta_spectral(interface: &GraphInterface, n_max: usize) -> Result<f64> {
    if n_max < 16 {
        return Err(Error::InvalidInput(format!("n_max must be at least 16, got {n_max}")));
    }
    let m = interface.m();
    let w = interface.spacing();
    let h = interface.heights();
    let dh = interface.slope();
    let cos_tab: Vec<f64> = (0..m).map(|p| (w * p as f64).cos()).collect();
    let sin_tab: Vec<f64> = (0..m).map(|p| (w * p as f64).sin()).collect();
    // (1 + n a)/n³ = inv3[n] + a·inv2[n]
    let inv2: Vec<f64> = (0..=n_max).map(|n| if n == 0 { 0.0 } else { 1.0 / (n * n) as f64 }).collect();
    let inv3: Vec<f64> = (0..=n_max).map(|n| if n == 0 { 0.0 } else { 1.0 / (n * n * n) as f64 }).collect();
    let kernel = |p: usize, x2: f64| -> f64 {
        let a = x2.abs();
        let n_eff = n_max.min(kernels::default_n_max(x2));
        let r = (-a).exp();
        let q = Complex64::new(r * cos_tab[p], r * sin_tab[p]);
        let mut qn = q;
        let mut s = 0.0;
        for n in 1..=n_eff {
            s += (inv3[n] + a * inv2[n]) * qn.re;
            qn *= q;
            if qn.re.abs() + qn.im.abs() < 1e-300 {
                break;
            }
        }
        s / (4.0 * PI)
    };
    // K(x₁, x₂) = K(−x₁, −x₂): sum j > i twice plus the diagonal
    let rows: Vec<f64> = par::map_indices(m, |i| {
        let mut acc = 0.5 * dh[i] * dh[i] * kernel(0, 0.0);
        for j in i + 1..m {
            acc += dh[i] * dh[j] * kernel(j - i, h[j] - h[i]);
        }
        acc
    });
    let delta = 8.0 * w * w * rows.iter().sum::<f64>();
    if delta < -1e-6 {
        return Err(Error::Inconsistent(delta));
    }
    Ok(delta)
}

/// Centred (interior) and one-sided second-order (ends) differences of the
/// energy series; exact for quadratics on any strictly increasing grid.
pub fn de_dt_fd(times: &[f64], energies: &[f64]) -> Result<Vec<f64>> {
    let n = times.len();
    if n < 3 || energies.len() != n {
        return Err(Error::InvalidInput(format!(
            "need at least 3 matching samples, got {n} times and {} energies",
            energies.len()
        )));
    }
    if times.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::InvalidInput("sample times must be strictly increasing".into()));
    }
    // derivative at x of the quadratic through (t_a, t_b, t_c)
    let quad = |x: f64, t: [f64; 3], e: [f64; 3]| -> f64 {
        let [a, b, c] = t;
        e[0] * ((x - b) + (x - c)) / ((a - b) * (a - c))
            + e[1] * ((x - a) + (x - c)) / ((b - a) * (b - c))
            + e[2] * ((x - a) + (x - b)) / ((c - a) * (c - b))
    };
    Ok((0..n)
        .map(|k| {
            let c = k.clamp(1, n - 2);
            quad(
                times[k],
                [times[c - 1], times[c], times[c + 1]],
                [energies[c - 1], energies[c], energies[c + 1]],
            )
        })
        .collect())
}

/// [`de_dt_fd`] applied to a run.
pub fn de_dt_fd_trajectory(traj: &crate::trajectory::Trajectory) -> Result<Vec<f64>> {
    de_dt_fd(&traj.times(), &traj.energies())
}

/// Split of the grid into small-slope runs `I_μ` and the remainder `R_μ`.
///
/// Each run of `I_μ` shorter than the whole grid brackets a critical point of
/// `h`: a finger tip, a trough between fingers, or an inflection shelf where
/// `h'` touches zero. These are the counted zeros of the derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerDecomposition {
    pub mu: f64,
    /// Half-open node ranges `[start, end)`, sorted by start; `end` exceeds
    /// `m` for the run wrapping past the last node.
    pub flat_intervals: Vec<(usize, usize)>,
    pub zero_count: usize,
    /// Node of least `|δh|` in each counted run.
    pub zero_locations: Vec<usize>,
}

impl FingerDecomposition {
    /// Whether node `j` lies in `I_μ`.
    pub fn is_flat(&self, j: usize, m: usize) -> bool {
        self.flat_intervals
            .iter()
            .any(|&(a, b)| (a..b).any(|k| k % m == j))
    }
}

/// Finger decomposition of `h` at slope threshold `mu`.
///
/// `I_μ` is the union of maximal periodic runs with `|δh| ≤ mu`. A run
/// covering the whole grid is a flat state and carries no zero; every other
/// run counts one zero of the derivative, located at its smallest `|δh|`
/// (lowest index on ties).
pub fn finger_decomposition(interface: &GraphInterface, mu: f64) -> Result<FingerDecomposition> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidInput(format!("mu must be positive, got {mu}")));
    }
    let d = interface.slope();
    let m = d.len();
    let small: Vec<bool> = d.iter().map(|v| v.abs() <= mu).collect();
    if small.iter().all(|b| *b) {
        return Ok(FingerDecomposition {
            mu,
            flat_intervals: vec![(0, m)],
            zero_count: 0,
            zero_locations: Vec::new(),
        });
    }
    // walk the cycle from a steep node so that no run is split
    let start = (0..m).find(|&j| !small[j]).unwrap_or(0);
    let mut flat_intervals = Vec::new();
    let mut zero_locations = Vec::new();
    let mut k = 0;
    while k < m {
        let j = (start + k) % m;
        if !small[j] {
            k += 1;
            continue;
        }
        let len = (k..m).take_while(|&q| small[(start + q) % m]).count();
        flat_intervals.push((j, j + len));
        let argmin = (0..len)
            .map(|q| (j + q) % m)
            .min_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()).then(a.cmp(&b)))
            .unwrap_or(j);
        zero_locations.push(argmin);
        k += len;
    }
    flat_intervals.sort_unstable();
    zero_locations.sort_unstable();
    Ok(FingerDecomposition {
        mu,
        flat_intervals,
        zero_count: zero_locations.len(),
        zero_locations,
    })
}

/// Coefficients below this multiple of the largest one are FFT roundoff and
/// are dropped before weighting by `e^{ν|k|}`.
pub const WIENER_NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

/// `Σ_{k=−m/2+1}^{m/2} e^{ν|k|} |k|^s |ĥ(k)|` with `ĥ(k) = (1/m) Σ_j h_j e^{−ikα_j}`.
///
/// Modes with `|ĥ(k)| ≤ WIENER_NOISE_FLOOR · max |ĥ|` are treated as zero.
pub fn wiener_norm(interface: &GraphInterface, s: f64, nu: f64) -> Result<f64> {
    let m = interface.m();
    if !m.is_power_of_two() {
        return Err(Error::InvalidInput(format!("Wiener norm needs m a power of two, got {m}")));
    }
    if !(s >= 0.0 && nu >= 0.0) {
        return Err(Error::InvalidInput(format!("need s, nu >= 0, got {s}, {nu}")));
    }
    if nu * (m / 2) as f64 > 700.0 {
        return Err(Error::InvalidInput(format!(
            "nu·m/2 = {} exceeds the overflow guard 700",
            nu * (m / 2) as f64
        )));
    }
    let mut buf: Vec<Complex64> = interface
        .heights()
        .iter()
        .map(|h| Complex64::new(*h, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let half = (m / 2) as i64;
    let peak = buf.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = WIENER_NOISE_FLOOR * peak;
    let mut total = 0.0;
    for k in (-half + 1)..=half {
        let weight = if k == 0 {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            (nu * k.abs() as f64).exp() * (k.abs() as f64).powf(s)
        };
        if weight == 0.0 {
            continue;
        }
        let mag = buf[k.rem_euclid(m as i64) as usize].norm();
        if mag > floor {
            total += weight * mag / m as f64;
        }
    }
    Ok(total)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

/// Record for a graph sample with velocity `h_t`.
pub fn graph_record(
    t: f64,
    interface: &GraphInterface,
    h_t: &[f64],
    params: &SchemeParams,
    opts: &DiagnosticsOptions,
) -> Result<DiagnosticsRecord> {
    let curve = interface.to_curve();
    let (max_height, min_height) = geometry::height_extremes(&curve);
    let sym = if interface.m() % 4 == 0 {
        Some(geometry::symmetry_errors(&curve)?)
    } else {
        None
    };
    let delta = match opts.delta_n_max {
        // E' = −4π·sign_factor·δ for the inviscid flow
        Some(n) => Some(-4.0 * PI * params.sign_factor * delta_spectral(interface, n)?),
        None => None,
    };
    let finger_count = match opts.mu {
        Some(mu) => Some(finger_decomposition(interface, mu)?.zero_count),
        None => None,
    };
    let wiener_norm = match (opts.wiener_s, opts.wiener_nu) {
        (Some(s), Some(nu)) if interface.m().is_power_of_two() => Some(wiener_norm(interface, s, nu)?),
        _ => None,
    };
    Ok(DiagnosticsRecord {
        t,
        energy: energy(interface),
        energy_rate: energy_rate(interface, h_t),
        delta,
        perimeter: geometry::perimeter(&curve),
        max_curvature: max_of(&geometry::curvature(&curve)?),
        max_height,
        min_height,
        central_sym_err: sym.map(|s| s.central),
        even_sym_err: sym.map(|s| s.even),
        finger_count,
        wiener_norm,
        min_slope_x1: None,
    })
}

/// Record for a curve sample with nodal velocity `(u₁, u₂)`.
pub fn curve_record(t: f64, curve: &ParamCurve, u1: &[f64], u2: &[f64]) -> Result<DiagnosticsRecord> {
    let (max_height, min_height) = geometry::height_extremes(curve);
    let sym = if curve.m() % 4 == 0 {
        Some(geometry::symmetry_errors(curve)?)
    } else {
        None
    };
    Ok(DiagnosticsRecord {
        t,
        energy: energy_curve(curve),
        energy_rate: energy_rate_curve(curve, u1, u2)?,
        delta: None,
        perimeter: geometry::perimeter(curve),
        max_curvature: max_of(&geometry::curvature(curve)?),
        max_height,
        min_height,
        central_sym_err: sym.map(|s| s.central),
        even_sym_err: sym.map(|s| s.even),
        finger_count: None,
        wiener_norm: None,
        min_slope_x1: Some(geometry::min_slope_x1(curve)),
    })
}
