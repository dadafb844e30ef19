// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) embedded Runge–Kutta pair with proportional step
//! control, FSAL stage reuse, and exact landing on requested output times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Right-hand side of `y' = f(t, y)`.
pub trait OdeRhs: Sync {
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()>;
}

impl<F> OdeRhs for F
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()> + Sync,
{
    fn eval(&self, t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        self(t, y, dydt)
    }
}

/// Tolerances and step bounds of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorParams {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
}

impl IntegratorParams {
    /// `rel_tol = 1e-6`, `abs_tol = 1e-9`, `dt ∈ [1e-10, 0.05]` starting at `1e-3`.
    pub fn with_end(t_end: f64) -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            dt_init: 1e-3,
            dt_min: 1e-10,
            dt_max: 0.05,
            t_end,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.rel_tol,
            self.abs_tol,
            self.dt_init,
            self.dt_min,
            self.dt_max,
            self.t_end,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("integrator parameters must be finite".into()));
        }
        if self.rel_tol < 1e-12 || self.abs_tol < 1e-12 {
            return Err(Error::InvalidInput(format!(
                "tolerances must be at least 1e-12 (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::InvalidInput(format!(
                "need 0 < dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            )));
        }
        Ok(())
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Result of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt_used: f64,
    pub error_estimate: f64,
    pub rejected: usize,
}

/// Integrator state: stage buffers and the current step proposal.
pub struct DormandPrince<'a, R: OdeRhs + ?Sized> {
    rhs: &'a R,
    params: IntegratorParams,
    n: usize,
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
    fsal_valid: bool,
    dt: f64,
    pub rhs_evals: usize,
}

fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

impl<'a, R: OdeRhs + ?Sized> DormandPrince<'a, R> {
    pub fn new(rhs: &'a R, params: IntegratorParams, n: usize) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            rhs,
            params,
            n,
            k: std::array::from_fn(|_| vec![0.0; n]),
            y_stage: vec![0.0; n],
            y_new: vec![0.0; n],
            fsal_valid: false,
            dt: params.dt_init,
            rhs_evals: 0,
        })
    }

    /// Proposed size of the next step.
    pub fn next_dt(&self) -> f64 {
        self.dt
    }

    /// `f(t, y)` at the start of the next step (evaluated if not cached).
    pub fn derivative(&mut self, t: f64, y: &[f64]) -> Result<&[f64]> {
        if !self.fsal_valid {
            self.rhs.eval(t, y, &mut self.k[0])?;
            self.rhs_evals += 1;
            self.fsal_valid = true;
        }
        Ok(&self.k[0])
    }

    /// Advances `(t, y)` by one accepted step not exceeding `t_limit`.
    ///
    /// A step that would end within a relative `1e-12` of `t_limit` is
    /// stretched to land on it exactly.
    pub fn step(&mut self, t: &mut f64, y: &mut [f64], t_limit: f64) -> Result<StepReport> {
        debug_assert_eq!(y.len(), self.n);
        self.derivative(*t, y)?;
        let p = self.params;
        let mut dt = self.dt.clamp(p.dt_min, p.dt_max);
        let mut rejected = 0;
        loop {
            let remaining = t_limit - *t;
            let landing = dt >= remaining - 1e-12 * t_limit.abs().max(1.0);
            let h = if landing { remaining } else { dt };
            let err = self.attempt(*t, y, h)?;
            if err <= 1.0 {
                let proposal = (h * step_factor(err)).min(p.dt_max);
                self.dt = if landing { proposal.max(dt.min(p.dt_max)) } else { proposal };
                y.copy_from_slice(&self.y_new);
                self.k.swap(0, 6);
                *t = if landing { t_limit } else { *t + h };
                return Ok(StepReport {
                    dt_used: h,
                    error_estimate: err,
                    rejected,
                });
            }
            rejected += 1;
            let shrunk = h * step_factor(err).min(1.0);
            if h <= p.dt_min * (1.0 + 1e-12) {
                return Err(Error::StepFailure {
                    t: *t,
                    dt_min: p.dt_min,
                    err,
                });
            }
            dt = shrunk.max(p.dt_min);
        }
    }

    /// One trial step of size `h`; returns the scaled error norm and leaves
    /// the fifth-order solution in `y_new` and `f(t+h, y_new)` in `k[6]`.
    fn attempt(&mut self, t: f64, y: &[f64], h: f64) -> Result<f64> {
        let n = self.n;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (r, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += a * self.k[r][i];
                    }
                }
                self.y_stage[i] = y[i] + h * acc;
            }
            let stage = self.rhs.eval(t + C[s] * h, &self.y_stage, &mut self.k[s]);
            self.rhs_evals += 1;
            match stage {
                Ok(()) => {}
                // an overlong trial step can leave the region where the field
                // is finite; shrinking the step is the remedy
                Err(Error::NumericalBlowup { .. }) => return Ok(f64::INFINITY),
                Err(e) => return Err(e),
            }
        }
        // stage 7 is evaluated at the fifth-order solution itself
        self.y_new.copy_from_slice(&self.y_stage);
        let p = self.params;
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (r, coef) in E.iter().enumerate() {
                if *coef != 0.0 {
                    e += coef * self.k[r][i];
                }
            }
            let scale = p.abs_tol + p.rel_tol * y[i].abs().max(self.y_new[i].abs());
            let ratio = (h * e).abs() / scale;
            if !ratio.is_finite() {
                return Ok(f64::INFINITY);
            }
            err = err.max(ratio);
        }
        Ok(err)
    }
}

/// Integrates from `t0` and calls `on_sample(t, y, f(t, y))` at each requested
/// time (all within `[t0, params.t_end]`, non-decreasing).
pub fn integrate_samples<R, S>(
    rhs: &R,
    params: IntegratorParams,
    t0: f64,
    y0: &[f64],
    sample_times: &[f64],
    mut on_sample: S,
) -> Result<Vec<f64>>
where
    R: OdeRhs + ?Sized,
    S: FnMut(f64, &[f64], &[f64]) -> Result<()>,
{
    validate_samples(t0, params.t_end, sample_times)?;
    let mut solver = DormandPrince::new(rhs, params, y0.len())?;
    let mut y = y0.to_vec();
    let mut t = t0;
    for &target in sample_times {
        while t < target {
            solver.step(&mut t, &mut y, target)?;
        }
        let dydt = solver.derivative(t, &y)?.to_vec();
        on_sample(t, &y, &dydt)?;
    }
    Ok(y)
}

pub(crate) fn validate_samples(t0: f64, t_end: f64, sample_times: &[f64]) -> Result<()> {
    let mut prev = t0;
    for &s in sample_times {
        if !s.is_finite() || s < prev || s > t_end * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::InvalidInput(format!(
                "sample time {s} outside [{t0}, {t_end}] or out of order"
            )));
        }
        prev = s;
    }
    Ok(())
}
