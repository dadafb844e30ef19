// SPDX-License-Identifier: Apache-2.0

//! Discrete interfaces on the uniform grid `α_j = −π + 2πj/m` and their
//! geometric measurements.
//!
//! Two representations are used: [`GraphInterface`] for `z = (α, h(α))` and
//! [`ParamCurve`] for general curves with the horizontal closure
//! `z₁(α + 2π) = z₁(α) + 2π`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::periodic_simpson;

const TWO_PI: f64 = 2.0 * PI;
const COINCIDENCE_TOL: f64 = 1e-12;

/// Grid spacing `2π/m`.
pub fn spacing(m: usize) -> f64 {
    TWO_PI / m as f64
}

/// Node `α_j = −π + 2πj/m`.
pub fn node(m: usize, j: usize) -> f64 {
    -PI + TWO_PI * j as f64 / m as f64
}

/// All `m` grid nodes.
pub fn nodes(m: usize) -> Vec<f64> {
    (0..m).map(|j| node(m, j)).collect()
}

/// Rejects grids that are odd or smaller than 8 nodes.
pub fn check_grid(m: usize) -> Result<()> {
    if m < 8 || m % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "grid size must be even and at least 8, got {m}"
        )));
    }
    Ok(())
}

/// Samples of a periodic height function `h(α)` on the uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInterface {
    h: Vec<f64>,
}

impl GraphInterface {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        check_grid(h.len())?;
        if let Some(j) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup { node: j });
        }
        Ok(Self { h })
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..m).map(|j| f(node(m, j))).collect())
    }

    pub fn flat(m: usize, level: f64) -> Result<Self> {
        Self::new(vec![level; m])
    }

    pub fn m(&self) -> usize {
        self.h.len()
    }

    pub fn spacing(&self) -> f64 {
        spacing(self.m())
    }

    pub fn alpha(&self) -> Vec<f64> {
        nodes(self.m())
    }

    pub fn heights(&self) -> &[f64] {
        &self.h
    }

    pub fn into_heights(self) -> Vec<f64> {
        self.h
    }

    /// Central-difference slope `δh`.
    pub fn slope(&self) -> Vec<f64> {
        central_diff_unchecked(&self.h, self.spacing())
    }

    /// The curve `(α, h(α))`.
    pub fn to_curve(&self) -> ParamCurve {
        ParamCurve {
            z1: self.alpha(),
            z2: self.h.clone(),
        }
    }
}

/// Samples of a curve `z(α) = (z₁, z₂)`, horizontally periodic with one
/// period per turn of `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCurve {
    z1: Vec<f64>,
    z2: Vec<f64>,
}

impl ParamCurve {
    /// Validates grid size, finiteness, `|ż| > 0` and absence of coincident nodes.
    pub fn new(z1: Vec<f64>, z2: Vec<f64>) -> Result<Self> {
        let curve = Self::new_unchecked(z1, z2)?;
        curve.check_speed()?;
        curve.check_self_intersection()?;
        Ok(curve)
    }

    /// Checks only sizes and finiteness; used inside time stepping, where the
    /// RHS itself reports degenerate geometry.
    pub fn new_unchecked(z1: Vec<f64>, z2: Vec<f64>) -> Result<Self> {
        if z1.len() != z2.len() {
            return Err(Error::InvalidInput(format!(
                "z1 has {} samples but z2 has {}",
                z1.len(),
                z2.len()
            )));
        }
        check_grid(z1.len())?;
        if let Some(j) = z1
            .iter()
            .zip(&z2)
            .position(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::NumericalBlowup { node: j });
        }
        Ok(Self { z1, z2 })
    }

    pub fn m(&self) -> usize {
        self.z1.len()
    }

    pub fn spacing(&self) -> f64 {
        spacing(self.m())
    }

    pub fn z1(&self) -> &[f64] {
        &self.z1
    }

    pub fn z2(&self) -> &[f64] {
        &self.z2
    }

    /// `z(α_j)` for any integer `j`, applying the horizontal closure.
    pub fn lifted(&self, j: i64) -> (f64, f64) {
        let m = self.m() as i64;
        let k = j.rem_euclid(m);
        let turns = (j - k) / m;
        (
            self.z1[k as usize] + TWO_PI * turns as f64,
            self.z2[k as usize],
        )
    }

    /// Central differences `(ż₁, ż₂)` with the closure applied to `z₁`.
    pub fn tangent(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.m();
        let w = self.spacing();
        let mut d1 = vec![0.0; m];
        for (j, d) in d1.iter_mut().enumerate() {
            let (next, _) = self.lifted(j as i64 + 1);
            let (prev, _) = self.lifted(j as i64 - 1);
            *d = (next - prev) / (2.0 * w);
        }
        (d1, central_diff_unchecked(&self.z2, w))
    }

    /// Second differences `(z̈₁, z̈₂)`.
    pub fn second_derivative(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.m();
        let w = self.spacing();
        let mut d1 = vec![0.0; m];
        for (j, d) in d1.iter_mut().enumerate() {
            let (next, _) = self.lifted(j as i64 + 1);
            let (prev, _) = self.lifted(j as i64 - 1);
            *d = (next - 2.0 * self.z1[j] + prev) / (w * w);
        }
        (d1, second_diff(&self.z2, w))
    }

    /// `|ż|` at every node.
    pub fn speed(&self) -> Vec<f64> {
        let (d1, d2) = self.tangent();
        d1.iter().zip(&d2).map(|(a, b)| a.hypot(*b)).collect()
    }

    fn check_speed(&self) -> Result<()> {
        for (node, speed) in self.speed().into_iter().enumerate() {
            if !(speed > 0.0) {
                return Err(Error::DegenerateParametrization { node, speed });
            }
        }
        Ok(())
    }

    /// Rejects two distinct nodes at the same point of the cylinder `𝕋 × ℝ`.
    pub fn check_self_intersection(&self) -> Result<()> {
        let m = self.m();
        let wrapped: Vec<f64> = self.z1.iter().map(|x| x.rem_euclid(TWO_PI)).collect();
        for i in 0..m {
            for j in (i + 1)..m {
                let mut dx = (wrapped[i] - wrapped[j]).abs();
                dx = dx.min(TWO_PI - dx);
                if dx <= COINCIDENCE_TOL && (self.z2[i] - self.z2[j]).abs() <= COINCIDENCE_TOL {
                    return Err(Error::SelfIntersection {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(())
    }

    /// Flat-packed state `[z₁; z₂]` for the integrator.
    pub fn to_state(&self) -> Vec<f64> {
        let mut y = self.z1.clone();
        y.extend_from_slice(&self.z2);
        y
    }

    pub fn from_state(y: &[f64]) -> Result<Self> {
        if y.len() % 2 != 0 {
            return Err(Error::InvalidInput("packed curve state has odd length".into()));
        }
        let m = y.len() / 2;
        Self::new_unchecked(y[..m].to_vec(), y[m..].to_vec())
    }
}

fn central_diff_unchecked(values: &[f64], spacing: f64) -> Vec<f64> {
    let m = values.len();
    (0..m)
        .map(|j| (values[(j + 1) % m] - values[(j + m - 1) % m]) / (2.0 * spacing))
        .collect()
}

/// Periodic central difference `(v_{j+1} − v_{j−1}) / (2·spacing)`.
pub fn central_diff(values: &[f64], spacing: f64) -> Result<Vec<f64>> {
    if values.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "central difference needs at least 3 samples, got {}",
            values.len()
        )));
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidInput(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    Ok(central_diff_unchecked(values, spacing))
}

/// Periodic 3-point second difference.
pub fn second_diff(values: &[f64], spacing: f64) -> Vec<f64> {
    let m = values.len();
    let w2 = spacing * spacing;
    (0..m)
        .map(|j| (values[(j + 1) % m] - 2.0 * values[j] + values[(j + m - 1) % m]) / w2)
        .collect()
}

/// Unsigned curvature `|ż₁ z̈₂ − z̈₁ ż₂| / |ż|³` at every node.
pub fn curvature(curve: &ParamCurve) -> Result<Vec<f64>> {
    let (d1, d2) = curve.tangent();
    let (dd1, dd2) = curve.second_derivative();
    (0..curve.m())
        .map(|j| {
            let speed = d1[j].hypot(d2[j]);
            if !(speed > 0.0) {
                return Err(Error::DegenerateParametrization { node: j, speed });
            }
            Ok((d1[j] * dd2[j] - dd1[j] * d2[j]).abs() / speed.powi(3))
        })
        .collect()
}

/// Curvature of a graph interface, `|δ²h| / (1 + δh²)^{3/2}`.
pub fn graph_curvature(interface: &GraphInterface) -> Vec<f64> {
    let w = interface.spacing();
    let dh = interface.slope();
    let ddh = second_diff(interface.heights(), w);
    dh.iter()
        .zip(&ddh)
        .map(|(d, dd)| dd.abs() / (1.0 + d * d).powf(1.5))
        .collect()
}

/// Length `∫_𝕋 |ż| dα` by composite Simpson.
pub fn perimeter(curve: &ParamCurve) -> f64 {
    periodic_simpson(&curve.speed(), curve.spacing())
}

/// `(M, m)` with `M = max z₂` and `m = −min z₂`, node-wise.
pub fn height_extremes(curve: &ParamCurve) -> (f64, f64) {
    let max = curve.z2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = curve.z2.iter().cloned().fold(f64::INFINITY, f64::min);
    (max, -min)
}

/// `min_j ∂_α z₁(α_j)`; positive means the curve is a graph.
pub fn min_slope_x1(curve: &ParamCurve) -> f64 {
    curve
        .tangent()
        .0
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Deviations from central symmetry and from the even reflection about `x₁ = ±π/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryErrors {
    pub central: f64,
    pub even: f64,
}

/// Max-norm deviations from `z(α) = −z(−α)` and from the reflection identities
/// `z₁(α) = ±π − z₁(±π − α)`, `z₂(α) = z₂(±π − α)`.
pub fn symmetry_errors(curve: &ParamCurve) -> Result<SymmetryErrors> {
    let m = curve.m();
    if m % 4 != 0 {
        return Err(Error::InvalidInput(format!(
            "symmetry errors need m divisible by 4, got {m}"
        )));
    }
    let mi = m as i64;
    let mut central: f64 = 0.0;
    for j in 0..mi {
        let (a1, a2) = curve.lifted(j);
        // −α_j = α_{m−j}; for j = 0 this is the lifted node α_m = π
        let (b1, b2) = curve.lifted(mi - j);
        central = central.max((a1 + b1).abs()).max((a2 + b2).abs());
    }
    let mut even: f64 = 0.0;
    for j in 1..=mi {
        let (a1, a2) = curve.lifted(j);
        if 2 * j > mi {
            // α ∈ (0, π]: π − α_j = α_{3m/2 − j}
            let (b1, b2) = curve.lifted(3 * mi / 2 - j);
            even = even.max((a1 - (PI - b1)).abs()).max((a2 - b2).abs());
        } else {
            // α ∈ (−π, 0]: −π − α_j = α_{m/2 − j}
            let (b1, b2) = curve.lifted(mi / 2 - j);
            even = even.max((a1 - (-PI - b1)).abs()).max((a2 - b2).abs());
        }
    }
    Ok(SymmetryErrors { central, even })
}
