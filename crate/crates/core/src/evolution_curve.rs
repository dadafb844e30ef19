// SPDX-License-Identifier: Apache-2.0

//! Parametric contour dynamics for curves that need not be graphs.
//!
//! The velocity `(ρ⁻ − ρ⁺) ∫ S(z(α) − z(β)) ż⊥(β) z₂(β) dβ` is split as
//! `log(4 sin²((α−β)/2))` times the density, integrated with exact
//! trigonometric product weights, plus a smooth remainder summed with the
//! periodic trapezoid rule. At `β = α` the remainder takes its limit: the
//! logarithmic ratio tends to `log |ż(α)|²` and the rational part of the
//! Stokeslet applied to `z₂ ż⊥` tends to `(2 z₂ ż₂, 0)`.

use std::f64::consts::PI;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::geometry::{self, ParamCurve};
use crate::ode::{self, IntegratorParams, OdeRhs};
use crate::par;
use crate::quadrature::log_kernel_weights;
use crate::trajectory::{Sample, Snapshot, Trajectory};

/// Node clustering ratio `max|ż| / min|ż|` beyond which a warning is logged.
pub const CLUSTERING_WARN_RATIO: f64 = 20.0;

/// Curve state; `delta_rho = ρ⁻ − ρ⁺` (negative is the unstable ordering).
#[derive(Debug, Clone, PartialEq)]
pub struct CurveState {
    pub t: f64,
    pub curve: ParamCurve,
    pub delta_rho: f64,
}

/// Grid tables for the curve quadrature.
#[derive(Debug, Clone)]
pub struct CurveScheme {
    m: usize,
    w: f64,
    delta_rho: f64,
    // indexed by the offset p = (i − j) mod m
    log_weights: Vec<f64>,
    log_tab: Vec<f64>,
}

impl CurveScheme {
    pub fn new(m: usize, delta_rho: f64) -> Result<Self> {
        geometry::check_grid(m)?;
        if !delta_rho.is_finite() || delta_rho == 0.0 {
            return Err(Error::InvalidInput(format!(
                "delta_rho must be finite and non-zero, got {delta_rho}"
            )));
        }
        let w = geometry::spacing(m);
        let log_tab = (0..m)
            .map(|p| {
                if p == 0 {
                    0.0
                } else {
                    (4.0 * (0.5 * w * p as f64).sin().powi(2)).ln()
                }
            })
            .collect();
        Ok(Self {
            m,
            w,
            delta_rho,
            log_weights: log_kernel_weights(m),
            log_tab,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Velocity `(u₁, u₂)` for the packed state `y = [z₁; z₂]`.
    pub fn rhs(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.m;
        if y.len() != 2 * m || out.len() != 2 * m {
            return Err(Error::InvalidInput(format!(
                "packed curve state has {} entries, expected {}",
                y.len(),
                2 * m
            )));
        }
        let (z1, z2) = y.split_at(m);
        let w = self.w;
        let mut d1 = vec![0.0; m];
        let mut d2 = vec![0.0; m];
        for j in 0..m {
            let (jp, jm) = ((j + 1) % m, (j + m - 1) % m);
            let mut dz1 = z1[jp] - z1[jm];
            if j == 0 || j == m - 1 {
                dz1 += 2.0 * PI;
            }
            d1[j] = dz1 / (2.0 * w);
            d2[j] = (z2[jp] - z2[jm]) / (2.0 * w);
        }
        // density z₂ ż⊥
        let g1: Vec<f64> = (0..m).map(|j| -z2[j] * d2[j]).collect();
        let g2: Vec<f64> = (0..m).map(|j| z2[j] * d1[j]).collect();
        let scale = self.delta_rho / (8.0 * PI);
        let rows: Vec<Result<(f64, f64)>> = par::map_indices(m, |i| {
            let (mut u1, mut u2) = (0.0, 0.0);
            let speed2 = d1[i] * d1[i] + d2[i] * d2[i];
            if !(speed2 > 0.0) {
                return Err(Error::DegenerateParametrization {
                    node: i,
                    speed: speed2.sqrt(),
                });
            }
            let diag = self.log_weights[0] + w * speed2.ln();
            u1 += diag * g1[i] - w * 2.0 * d2[i] * z2[i];
            u2 += diag * g2[i];
            let mut pair = |j: usize, p: usize| -> Result<()> {
                let x1 = z1[i] - z1[j];
                let x2 = z2[i] - z2[j];
                let (sh, ch) = (0.5 * x1).sin_cos();
                let sin1 = 2.0 * sh * ch;
                let em1 = x2.exp_m1();
                let e = x2.exp();
                let sinh = 0.5 * (em1 + em1 / e);
                let d = 0.5 * em1 * em1 / e + 2.0 * sh * sh;
                if !(d > 5e-25) {
                    return Err(if d.is_finite() {
                        Error::SelfIntersection {
                            first: i.min(j),
                            second: i.max(j),
                        }
                    } else {
                        Error::NumericalBlowup { node: i }
                    });
                }
                let lw = self.log_weights[p] + w * ((2.0 * d).ln() - self.log_tab[p]);
                let r = w * x2 / d;
                u1 += lw * g1[j] - r * (-sinh * g1[j] + sin1 * g2[j]);
                u2 += lw * g2[j] - r * (sin1 * g1[j] + sinh * g2[j]);
                Ok(())
            };
            for j in 0..i {
                pair(j, i - j)?;
            }
            for j in i + 1..m {
                pair(j, i + m - j)?;
            }
            let (u1, u2) = (scale * u1, scale * u2);
            if u1.is_finite() && u2.is_finite() {
                Ok((u1, u2))
            } else {
                Err(Error::NumericalBlowup { node: i })
            }
        });
        for (i, row) in rows.into_iter().enumerate() {
            let (u1, u2) = row?;
            out[i] = u1;
            out[m + i] = u2;
        }
        Ok(())
    }
}

impl OdeRhs for CurveScheme {
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        self.rhs(y, dydt)
    }
}

/// `(∂_t z₁, ∂_t z₂)` at every node.
pub fn rhs_curve(state: &CurveState) -> Result<(Vec<f64>, Vec<f64>)> {
    let scheme = CurveScheme::new(state.curve.m(), state.delta_rho)?;
    let mut out = vec![0.0; 2 * scheme.m()];
    scheme.rhs(&state.curve.to_state(), &mut out)?;
    let u2 = out.split_off(scheme.m());
    Ok((out, u2))
}

/// Evolves a curve through `sample_times`; each record carries `min ∂_α z₁`.
pub fn evolve_curve(
    initial: &CurveState,
    ip: &IntegratorParams,
    sample_times: &[f64],
) -> Result<Trajectory> {
    evolve_curve_with(initial, ip, sample_times, |_| Ok(()))
}

/// As [`evolve_curve`], handing each sample to `on_sample` as it is recorded.
pub fn evolve_curve_with<F>(
    initial: &CurveState,
    ip: &IntegratorParams,
    sample_times: &[f64],
    mut on_sample: F,
) -> Result<Trajectory>
where
    F: FnMut(&Sample) -> Result<()>,
{
    ip.validate()?;
    ode::validate_samples(initial.t, ip.t_end, sample_times)?;
    let m = initial.curve.m();
    let scheme = CurveScheme::new(m, initial.delta_rho)?;
    let mut traj = Trajectory::default();
    let mut warned = false;
    let outcome = ode::integrate_samples(
        &scheme,
        *ip,
        initial.t,
        &initial.curve.to_state(),
        sample_times,
        |t, y, dydt| {
            let curve = ParamCurve::from_state(y)?;
            let speed = curve.speed();
            let hi = speed.iter().cloned().fold(0.0, f64::max);
            let lo = speed.iter().cloned().fold(f64::INFINITY, f64::min);
            if !warned && hi > CLUSTERING_WARN_RATIO * lo {
                log::warn!("node clustering at t = {t}: |ż| ratio {:.1}", hi / lo);
                warned = true;
            }
            let record = diagnostics::curve_record(t, &curve, &dydt[..m], &dydt[m..])?;
            let sample = Sample {
                t,
                snapshot: Snapshot::Curve(curve),
                record,
            };
            on_sample(&sample)?;
            traj.samples.push(sample);
            Ok(())
        },
    );
    if let Err(err) = outcome {
        log::warn!("curve run stopped after {} samples: {err}", traj.samples.len());
        traj.failure = Some(err);
    }
    Ok(traj)
}
