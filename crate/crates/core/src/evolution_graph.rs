// SPDX-License-Identifier: Apache-2.0

//! Graph-interface evolution `z = (α, h(α, t))`.
//!
//! The velocity integral is discretised by composite Simpson over the grid
//! nodes away from the target, a Taylor-expanded treatment of the two cells
//! adjacent to it, and (by default) subtraction of the leading
//! `h(α)(1 + h'(α)²) log(4 sin²((α−β)/2))` singularity, whose integral over
//! the non-singular range is known in closed form. Subtraction makes flat
//! states steady to roundoff and leaves a second-order scheme; without it
//! the punctured Simpson sum leaves a first-order `O(w)` defect next to the
//! logarithm.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsOptions};
use crate::error::{Error, Result};
use crate::geometry::{self, GraphInterface};
use crate::ode::{self, DormandPrince, IntegratorParams, OdeRhs};
use crate::par;
use crate::quadrature::{log_cell_integral, LogCellVariant};
use crate::trajectory::{Sample, Snapshot, Trajectory};

/// Graph state at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphState {
    pub t: f64,
    pub interface: GraphInterface,
}

/// Physical and discretisation constants of the graph scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeParams {
    /// `(ρ⁻ − ρ⁺)/(8π)`; `−1` is the unstable configuration.
    pub sign_factor: f64,
    /// Artificial viscosity `ε ≥ 0` multiplying the discrete `∂²_α h`.
    pub viscosity: f64,
    #[serde(default)]
    pub log_cell: LogCellVariant,
    /// Subtract and integrate exactly the leading logarithmic singularity.
    #[serde(default = "default_true")]
    pub log_subtraction: bool,
}

fn default_true() -> bool {
    true
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            sign_factor: -1.0,
            viscosity: 1e-3,
            log_cell: LogCellVariant::Halfangle,
            log_subtraction: true,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        if !self.sign_factor.is_finite() || self.sign_factor == 0.0 {
            return Err(Error::InvalidInput(format!(
                "sign_factor must be finite and non-zero, got {}",
                self.sign_factor
            )));
        }
        if !(self.viscosity >= 0.0 && self.viscosity.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "viscosity must be non-negative, got {}",
                self.viscosity
            )));
        }
        Ok(())
    }
}

/// Grid-dependent tables for one `(m, params)` pair; reusable across
/// right-hand-side evaluations.
#[derive(Debug, Clone)]
pub struct GraphScheme {
    params: SchemeParams,
    m: usize,
    w: f64,
    /// indexed by the offset `p = (i − j) mod m`
    sin_tab: Vec<f64>,
    one_minus_cos: Vec<f64>,
    log_tab: Vec<f64>,
    simpson: Vec<f64>,
    cell_log: f64,
    subtracted_total: f64,
}

impl GraphScheme {
    pub fn new(m: usize, params: SchemeParams) -> Result<Self> {
        geometry::check_grid(m)?;
        params.validate()?;
        let w = geometry::spacing(m);
        let mut sin_tab = vec![0.0; m];
        let mut one_minus_cos = vec![0.0; m];
        let mut log_tab = vec![0.0; m];
        for p in 1..m {
            let x = w * p as f64;
            let half = (0.5 * x).sin();
            sin_tab[p] = x.sin();
            one_minus_cos[p] = 2.0 * half * half;
            log_tab[p] = (4.0 * half * half).ln();
        }
        // composite Simpson over p = 1..m−1 (an even number of intervals)
        let mut simpson = vec![0.0; m];
        for (p, s) in simpson.iter_mut().enumerate().skip(1) {
            *s = if p == 1 || p == m - 1 {
                1.0
            } else if p % 2 == 0 {
                4.0
            } else {
                2.0
            } * w
                / 3.0;
        }
        let cell_log = log_cell_integral(w, params.log_cell);
        // ∫ over [w, 2π − w] of log(4 sin²(x/2)); the full-period integral is 0
        let subtracted_total = -2.0 * log_cell_integral(w, LogCellVariant::Halfangle);
        Ok(Self {
            params,
            m,
            w,
            sin_tab,
            one_minus_cos,
            log_tab,
            simpson,
            cell_log,
            subtracted_total,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// Contribution of the two cells `|β − α| ≤ w` for height `h` and slope
    /// `dh` at the node: twice the one-sided Taylor-cell value.
    pub fn singular_cells(&self, h: f64, dh: f64) -> f64 {
        2.0 * taylor_cell(h, dh, self.w, self.cell_log)
    }

    /// `h_t` at every node.
    pub fn rhs(&self, h: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.m;
        if h.len() != m || out.len() != m {
            return Err(Error::InvalidInput(format!(
                "state has {} nodes, scheme expects {m}",
                h.len()
            )));
        }
        let dh = geometry::central_diff(h, self.w)?;
        let visc = self.params.viscosity / (self.w * self.w);
        par::try_fill(out, |i| {
            let integral = self.node_integral(h, &dh, i);
            let lap = h[(i + 1) % m] - 2.0 * h[i] + h[(i + m - 1) % m];
            let v = self.params.sign_factor * integral + visc * lap;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NumericalBlowup { node: i })
            }
        })
    }

    fn node_integral(&self, h: &[f64], dh: &[f64], i: usize) -> f64 {
        let m = self.m;
        let (hi, di) = (h[i], dh[i]);
        let weight = hi * (1.0 + di * di);
        let sub = if self.params.log_subtraction { weight } else { 0.0 };
        let pair = |j: usize, p: usize| -> f64 {
            let (hj, dj) = (h[j], dh[j]);
            let x2 = hi - hj;
            let em1 = x2.exp_m1();
            let e = 1.0 + em1;
            let sinh = 0.5 * (em1 + em1 / e);
            let cosh_m1 = 0.5 * em1 * em1 / e;
            let d = cosh_m1 + self.one_minus_cos[p];
            let prod = di * dj;
            let log_term = (2.0 * d).ln() * hj * (1.0 + prod);
            let rational = hj * x2 / d * ((prod - 1.0) * sinh + (di + dj) * self.sin_tab[p]);
            self.simpson[p] * (log_term + rational - sub * self.log_tab[p])
        };
        // summed by offset so that a shift of the data shifts the result exactly
        let mut acc = 0.0;
        for p in 1..=i {
            acc += pair(i - p, p);
        }
        for p in i + 1..m {
            acc += pair(i + m - p, p);
        }
        acc + sub * self.subtracted_total + self.singular_cells(hi, di)
    }
}

/// One-sided cell `∫₀^w` of the integrand frozen at the node: the
/// logarithmic part against `log_cell = ∫₀^w log(4 sin²(β/2)) dβ` plus the
/// two constant Taylor terms.
fn taylor_cell(h: f64, dh: f64, w: f64, log_cell: f64) -> f64 {
    let s = dh * dh;
    h * (1.0 + s) * log_cell + h * (1.0 + s) * (1.0 + s).ln() * w + 2.0 * h * s * w
}

/// `h_t` for `state` (builds the scheme tables on each call).
pub fn rhs_graph(state: &GraphState, params: &SchemeParams) -> Result<Vec<f64>> {
    let scheme = GraphScheme::new(state.interface.m(), *params)?;
    let mut out = vec![0.0; scheme.m()];
    scheme.rhs(state.interface.heights(), &mut out)?;
    Ok(out)
}

/// Two-cell singular correction at `node` for cell width `panel_width`.
pub fn singular_cell_correction(
    state: &GraphState,
    node: usize,
    panel_width: f64,
    variant: LogCellVariant,
) -> Result<f64> {
    let m = state.interface.m();
    if node >= m {
        return Err(Error::InvalidInput(format!("node {node} out of range for m = {m}")));
    }
    let w = state.interface.spacing();
    if (panel_width - w).abs() > 1e-12 * w {
        return Err(Error::InvalidInput(format!(
            "panel width {panel_width} differs from the grid spacing {w}"
        )));
    }
    let h = state.interface.heights();
    let dh = geometry::central_diff(h, w)?;
    Ok(2.0 * taylor_cell(h[node], dh[node], w, log_cell_integral(w, variant)))
}

impl OdeRhs for GraphScheme {
    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        self.rhs(y, dydt)
    }
}

/// One accepted adaptive step from `state` starting with `dt = ip.dt_init`.
pub fn step_adaptive(
    state: &GraphState,
    params: &SchemeParams,
    ip: &IntegratorParams,
) -> Result<(GraphState, f64, f64)> {
    let scheme = GraphScheme::new(state.interface.m(), *params)?;
    let mut solver = DormandPrince::new(&scheme, *ip, scheme.m())?;
    let mut y = state.interface.heights().to_vec();
    let mut t = state.t;
    let limit = ip.t_end.max(t + ip.dt_init);
    let report = solver.step(&mut t, &mut y, limit)?;
    Ok((
        GraphState {
            t,
            interface: GraphInterface::new(y)?,
        },
        report.dt_used,
        report.error_estimate,
    ))
}

/// Evolves `initial` through `sample_times`, recording a snapshot and a
/// diagnostics record at each.
pub fn evolve(
    initial: &GraphState,
    params: &SchemeParams,
    ip: &IntegratorParams,
    sample_times: &[f64],
    diag: &DiagnosticsOptions,
) -> Result<Trajectory> {
    evolve_with(initial, params, ip, sample_times, diag, |_| Ok(()))
}

/// As [`evolve`], also handing each sample to `on_sample` as soon as it is
/// recorded. A runtime failure ends the run and is kept in
/// [`Trajectory::failure`] alongside the samples reached so far.
pub fn evolve_with<F>(
    initial: &GraphState,
    params: &SchemeParams,
    ip: &IntegratorParams,
    sample_times: &[f64],
    diag: &DiagnosticsOptions,
    mut on_sample: F,
) -> Result<Trajectory>
where
    F: FnMut(&Sample) -> Result<()>,
{
    ip.validate()?;
    ode::validate_samples(initial.t, ip.t_end, sample_times)?;
    let scheme = GraphScheme::new(initial.interface.m(), *params)?;
    let mut traj = Trajectory::default();
    let outcome = ode::integrate_samples(
        &scheme,
        *ip,
        initial.t,
        initial.interface.heights(),
        sample_times,
        |t, y, dydt| {
            let interface = GraphInterface::new(y.to_vec())?;
            let record = diagnostics::graph_record(t, &interface, dydt, params, diag)?;
            let sample = Sample {
                t,
                snapshot: Snapshot::Graph(interface),
                record,
            };
            on_sample(&sample)?;
            traj.samples.push(sample);
            Ok(())
        },
    );
    if let Err(err) = outcome {
        log::warn!(
            "graph run stopped after {} samples: {err}",
            traj.samples.len()
        );
        traj.failure = Some(err);
    }
    Ok(traj)
}

/// Inviscid growth rate of `a sin(kα)` as `a → 0`.
pub fn linear_growth_rate(sign_factor: f64, k: u32) -> f64 {
    -sign_factor * 2.0 * PI / k as f64
}
