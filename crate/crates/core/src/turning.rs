// SPDX-License-Identifier: Apache-2.0

//! Initial curves that lose graph form at `α = 0`, and the integrals that
//! give the sign of `d/dt ∂_α z₁(0, t)` at `t = 0`.
//!
//! `z₂` is `b·z*` on `[0, α₂]` and `z*` beyond, extended oddly. The
//! representative `z*` is a positive bump `A sin α φ(α/α₂)` followed by a
//! negative bump of depth `d` on `(α₂, α₃)`, with `φ(s) = exp(1 − 1/(1 − s²))`.
//! Both bumps are flat to all orders at their support ends, so the split at
//! `α₂` introduces no kink.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::geometry::{self, symmetry_errors, ParamCurve};
use crate::par;
use crate::quadrature::{adaptive_simpson, simpson_any};

/// Tolerance on the symmetry preconditions of the integral evaluators.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Slope of the even-variant transition at `α = π/2`.
pub const TRANSITION_END_SLOPE: f64 = 2.0;
const QUAD_TOL: f64 = 1e-15;
const THRESHOLD_REL_WIDTH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurningVariant {
    #[default]
    Basic,
    /// Also symmetric under `z₁ ↦ π − z₁` with `z₂` even about `α = π/2`.
    EvenSymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurningFamilyParams {
    pub b: f64,
    pub alpha2: f64,
    /// Right end of the negative bump (basic variant).
    pub alpha3: f64,
    /// Half-width of the zero windows around `α₂` and `π/2` (even variant).
    pub eps_flat: f64,
    /// Start of the `z₁` transition (even variant).
    pub alpha1: f64,
    /// `A`, so that `z*'(0) = A`.
    pub amplitude: f64,
    /// Depth `d` of the negative bump.
    pub depth: f64,
    pub variant: TurningVariant,
}

impl Default for TurningFamilyParams {
    fn default() -> Self {
        Self {
            b: 1.0,
            alpha2: 0.6,
            alpha3: 1.2,
            eps_flat: 0.1,
            alpha1: 0.5,
            amplitude: 1.0,
            depth: 0.0025,
            variant: TurningVariant::Basic,
        }
    }
}

impl TurningFamilyParams {
    /// Default even-symmetric family.
    pub fn even_default() -> Self {
        Self {
            depth: 0.001,
            variant: TurningVariant::EvenSymmetric,
            ..Self::default()
        }
    }

    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        let finite = [
            self.b,
            self.alpha2,
            self.alpha3,
            self.eps_flat,
            self.alpha1,
            self.amplitude,
            self.depth,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return bad("turning family parameters must be finite".into());
        }
        if self.b < 1.0 {
            return bad(format!("b must be at least 1, got {}", self.b));
        }
        match self.variant {
            TurningVariant::Basic => {
                if !(0.0 < self.alpha2 && self.alpha2 < self.alpha3 && self.alpha3 < FRAC_PI_2) {
                    return bad(format!(
                        "need 0 < alpha2 < alpha3 < pi/2, got alpha2 = {}, alpha3 = {}",
                        self.alpha2, self.alpha3
                    ));
                }
            }
            TurningVariant::EvenSymmetric => {
                let e = self.eps_flat;
                if !(e > 0.0 && e < self.alpha2 && self.alpha2 + e < FRAC_PI_2 - e) {
                    return bad(format!(
                        "need 0 < eps_flat < alpha2 and alpha2 + 2 eps_flat < pi/2, got alpha2 = {}, eps_flat = {e}",
                        self.alpha2
                    ));
                }
                if !(0.0 < self.alpha1 && self.alpha1 < FRAC_PI_2) {
                    return bad(format!("need 0 < alpha1 < pi/2, got {}", self.alpha1));
                }
            }
        }
        Ok(())
    }
}

fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Quintic on `[0, 1]` with prescribed value, slope and curvature at both
/// ends, stored as monomial coefficients.
#[derive(Debug, Clone, Copy)]
struct Quintic([f64; 6]);

impl Quintic {
    fn hermite(start: [f64; 3], end: [f64; 3]) -> Self {
        const BASIS: [[f64; 6]; 6] = [
            [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
            [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
            [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
            [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
            [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
            [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
        ];
        let data = [start[0], start[1], start[2], end[0], end[1], end[2]];
        let mut c = [0.0; 6];
        for (weight, basis) in data.iter().zip(BASIS.iter()) {
            for (ck, bk) in c.iter_mut().zip(basis) {
                *ck += weight * bk;
            }
        }
        Self(c)
    }

    fn value(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    fn slope(&self, t: f64) -> f64 {
        (1..6)
            .rev()
            .fold(0.0, |acc, k| acc * t + k as f64 * self.0[k])
    }
}

/// Closed-form family for a validated parameter set.
#[derive(Debug, Clone, Copy)]
pub struct TurningFamily {
    p: TurningFamilyParams,
    transition: Quintic,
}

impl TurningFamily {
    pub fn new(p: TurningFamilyParams) -> Result<Self> {
        p.validate()?;
        let a1 = p.alpha1;
        let len = FRAC_PI_2 - a1;
        // scaled to t = (α − α₁)/len
        let transition = Quintic::hermite(
            [a1 - a1.sin(), len * (1.0 - a1.cos()), len * len * a1.sin()],
            [FRAC_PI_2, len * TRANSITION_END_SLOPE, 0.0],
        );
        Ok(Self { p, transition })
    }

    pub fn params(&self) -> &TurningFamilyParams {
        &self.p
    }

    /// Positive-bump support end and the negative bump's centre and radius.
    fn layout(&self) -> (f64, f64, f64) {
        let p = &self.p;
        match p.variant {
            TurningVariant::Basic => (p.alpha2, 0.5 * (p.alpha2 + p.alpha3), 0.5 * (p.alpha3 - p.alpha2)),
            TurningVariant::EvenSymmetric => (
                p.alpha2 - p.eps_flat,
                0.5 * (p.alpha2 + FRAC_PI_2),
                0.5 * (FRAC_PI_2 - p.alpha2 - 2.0 * p.eps_flat),
            ),
        }
    }

    /// The unscaled profile `z*(α)` for `α ≥ 0`.
    pub fn z_star(&self, a: f64) -> f64 {
        let (pos_end, c, r) = self.layout();
        self.p.amplitude * a.sin() * bump(a / pos_end) - self.p.depth * bump((a - c) / r)
    }

    /// Folds `α` into the fundamental range: `[0, π]` (basic) or `[0, π/2]`
    /// (even), returning the reduced angle and the sign from odd reflection.
    fn fold(&self, a: f64) -> (f64, f64) {
        let (a, sign) = if a < 0.0 { (-a, -1.0) } else { (a, 1.0) };
        match self.p.variant {
            TurningVariant::Basic => (a, sign),
            TurningVariant::EvenSymmetric => (a.min(PI - a), sign),
        }
    }

    pub fn z2(&self, a: f64) -> f64 {
        let (r, sign) = self.fold(a);
        let scale = if r <= self.p.alpha2 { self.p.b } else { 1.0 };
        sign * scale * self.z_star(r)
    }

    /// `(z₁, ∂_α z₁)` on `[−π, π]`.
    pub fn z1(&self, a: f64) -> (f64, f64) {
        match self.p.variant {
            TurningVariant::Basic => (a - a.sin(), 1.0 - a.cos()),
            TurningVariant::EvenSymmetric => {
                let (x, sign) = if a < 0.0 { (-a, -1.0) } else { (a, 1.0) };
                let (v, d) = if x <= FRAC_PI_2 {
                    self.z1_quarter(x)
                } else {
                    let (v, d) = self.z1_quarter(PI - x);
                    (PI - v, d)
                };
                (sign * v, d)
            }
        }
    }

    fn z1_quarter(&self, x: f64) -> (f64, f64) {
        let a1 = self.p.alpha1;
        if x <= a1 {
            (x - x.sin(), 1.0 - x.cos())
        } else {
            let len = FRAC_PI_2 - a1;
            let t = (x - a1) / len;
            (self.transition.value(t), self.transition.slope(t) / len)
        }
    }

    /// `∂_α z₂(0) = b A`.
    pub fn z2_slope_at_origin(&self) -> f64 {
        self.p.b * self.p.amplitude
    }

    /// Integrand of the turning integral on `[0, π]` (basic) or `[0, π/2]` (even).
    fn integrand(&self, beta: f64) -> f64 {
        let (x1, dx1) = self.z1(beta);
        let x2 = self.z2(beta);
        turning_integrand(self.p.variant, x1, x2, dx1)
    }

    /// Splits the integral at `α₂` with adaptive Simpson on pieces that
    /// contain each bump; returns `(J₁, J₂, total)` or `(K₁, K₂, total)`.
    pub fn integrals(&self) -> (f64, f64, f64) {
        let (pos_end, c, r) = self.layout();
        let f = |x: f64| self.integrand(x);
        let raw1 = adaptive_simpson(&f, 0.0, 0.5 * pos_end, QUAD_TOL)
            + adaptive_simpson(&f, 0.5 * pos_end, pos_end, QUAD_TOL);
        let raw2 = adaptive_simpson(&f, c - r, c, QUAD_TOL) + adaptive_simpson(&f, c, c + r, QUAD_TOL);
        let pre = self.z2_slope_at_origin() / prefactor_denominator(self.p.variant);
        let (i1, i2) = (pre * raw1, pre * raw2);
        (i1, i2, i1 + i2)
    }

    /// `z₁` strictly increasing away from `α = 0` (and `α = ±π` for the even variant).
    fn check_monotone(&self, m: usize) -> Result<()> {
        for a in geometry::nodes(m) {
            let near_crest = a == 0.0
                || (self.p.variant == TurningVariant::EvenSymmetric && (a.abs() - PI).abs() < 1e-12);
            if near_crest {
                continue;
            }
            let d = self.z1(a).1;
            if !(d > 0.0) {
                return Err(Error::Construction {
                    property: "condition 2".into(),
                    detail: format!("dz1/dalpha = {d:e} at alpha = {a}"),
                });
            }
        }
        Ok(())
    }

    /// Node-wise sign properties of `z*`. Nodes within one spacing of an
    /// interval end are only held to the weak inequality, because `φ`
    /// underflows to zero there.
    fn check_signs(&self, m: usize) -> Result<()> {
        let p = &self.p;
        let w = geometry::spacing(m);
        let fail = |property: &str, detail: String| {
            Err(Error::Construction {
                property: property.into(),
                detail,
            })
        };
        if !(p.amplitude > 0.0) {
            return fail("(a)", format!("z*'(0) = {} must be positive", p.amplitude));
        }
        let (pos, neg, top) = match p.variant {
            TurningVariant::Basic => ((0.0, p.alpha2), (p.alpha2, p.alpha3), PI),
            TurningVariant::EvenSymmetric => (
                (0.0, p.alpha2 - p.eps_flat),
                (p.alpha2 + p.eps_flat, FRAC_PI_2 - p.eps_flat),
                FRAC_PI_2,
            ),
        };
        let interior = |a: f64, (lo, hi): (f64, f64)| a > lo + w && a < hi - w;
        let inside = |a: f64, (lo, hi): (f64, f64)| a > lo && a < hi;
        let mut neg_seen = false;
        for a in geometry::nodes(m).into_iter().filter(|a| *a > 0.0 && *a <= top) {
            let z = self.z_star(a);
            if inside(a, pos) {
                if z < 0.0 || (interior(a, pos) && !(z > 0.0)) {
                    return fail("(b)", format!("z*({a}) = {z:e} is not positive"));
                }
            } else if inside(a, neg) {
                if z > 0.0 || (interior(a, neg) && !(z < 0.0)) {
                    return fail("(c)", format!("z*({a}) = {z:e} is not negative"));
                }
                neg_seen |= z < 0.0;
            } else {
                let ok = match p.variant {
                    TurningVariant::Basic => a <= pos.1 || z <= 0.0,
                    TurningVariant::EvenSymmetric => z == 0.0,
                };
                if !ok {
                    return fail("(d)", format!("z*({a}) = {z:e} outside the bump supports"));
                }
            }
        }
        if !neg_seen {
            return fail("(c)", "no grid node sees the negative bump".into());
        }
        Ok(())
    }
}

fn prefactor_denominator(variant: TurningVariant) -> f64 {
    match variant {
        TurningVariant::Basic => 4.0 * PI,
        TurningVariant::EvenSymmetric => 2.0 * PI,
    }
}

/// Integrand without prefactor; the removable singularity at the origin
/// evaluates to 0.
fn turning_integrand(variant: TurningVariant, x1: f64, x2: f64, dx1: f64) -> f64 {
    let (num, den) = match variant {
        TurningVariant::Basic => (x2 * x1.sin() * dx1, x2.cosh() - x1.cos()),
        TurningVariant::EvenSymmetric => {
            let ch = x2.cosh();
            (x2 * x1.sin() * ch * dx1, ch * ch - x1.cos().powi(2))
        }
    };
    if den == 0.0 || num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Samples the family on the grid after checking condition 2 and the sign
/// properties of `z*`.
pub fn build_turning_family(p: TurningFamilyParams, m: usize) -> Result<ParamCurve> {
    geometry::check_grid(m)?;
    if m % 4 != 0 {
        return Err(Error::InvalidInput(format!(
            "turning families need m divisible by 4, got {m}"
        )));
    }
    let family = TurningFamily::new(p)?;
    family.check_monotone(m)?;
    family.check_signs(m)?;
    let alpha = geometry::nodes(m);
    let z1 = alpha.iter().map(|a| family.z1(*a).0).collect();
    let z2 = alpha.iter().map(|a| family.z2(*a)).collect();
    ParamCurve::new(z1, z2)
}

/// Grid version of the turning integrals over `[0, split]` and
/// `[split, top]`, with `∂_α` taken by central differences.
fn grid_integrals(
    curve: &ParamCurve,
    split: f64,
    variant: TurningVariant,
) -> Result<(f64, f64, f64)> {
    let m = curve.m();
    if m % 4 != 0 {
        return Err(Error::InvalidInput(format!(
            "turning integrals need m divisible by 4, got {m}"
        )));
    }
    let sym = symmetry_errors(curve)?;
    if sym.central > SYMMETRY_TOL {
        return Err(Error::InvalidInput(format!(
            "curve is not centrally symmetric (error {:e})",
            sym.central
        )));
    }
    let top = match variant {
        TurningVariant::Basic => PI,
        TurningVariant::EvenSymmetric => {
            if sym.even > SYMMETRY_TOL {
                return Err(Error::InvalidInput(format!(
                    "curve is not even-symmetric (error {:e})",
                    sym.even
                )));
            }
            FRAC_PI_2
        }
    };
    let w = curve.spacing();
    if !(split > 0.0 && split < top) {
        return Err(Error::InvalidInput(format!(
            "split point {split} outside (0, {top})"
        )));
    }
    let origin = m / 2;
    let (d1, d2) = curve.tangent();
    let slope0 = d2[origin];
    if slope0 < 0.0 {
        return Err(Error::InvalidInput(format!(
            "dz2/dalpha(0) = {slope0:e} must not be negative"
        )));
    }
    let last = (top / w).round() as usize;
    let mid = ((split / w).round() as usize).clamp(1, last - 1);
    let f: Vec<f64> = (0..=last)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            let (x1, x2) = curve.lifted((origin + k) as i64);
            turning_integrand(variant, x1, x2, d1[(origin + k) % m])
        })
        .collect();
    let pre = slope0 / prefactor_denominator(variant);
    let i1 = pre * simpson_any(&f[..=mid], w);
    let i2 = pre * simpson_any(&f[mid..], w);
    Ok((i1, i2, i1 + i2))
}

/// `(J₁, J₂, J₁ + J₂)` for a centrally symmetric curve, splitting at `alpha2`.
pub fn turning_integral(curve: &ParamCurve, alpha2: f64) -> Result<(f64, f64, f64)> {
    grid_integrals(curve, alpha2, TurningVariant::Basic)
}

/// `(K₁, K₂, K₁ + K₂)` for a curve with both symmetries, splitting at `alpha2`.
pub fn turning_integral_even(curve: &ParamCurve, alpha2: f64) -> Result<(f64, f64, f64)> {
    grid_integrals(curve, alpha2, TurningVariant::EvenSymmetric)
}

/// Totals of the closed-form family at each `b`, evaluated in parallel.
pub fn sweep_totals(p: TurningFamilyParams, bs: &[f64]) -> Result<Vec<f64>> {
    par::map_indices(bs.len(), |i| {
        TurningFamily::new(p.with_b(bs[i])).map(|f| f.integrals().2)
    })
    .into_iter()
    .collect()
}

/// Bisects `total(b)` on `[b_lo, b_hi]` to relative width `1e-6`.
pub fn find_b_threshold(p: TurningFamilyParams, b_lo: f64, b_hi: f64) -> Result<f64> {
    if !(b_lo >= 1.0 && b_hi > b_lo && b_hi.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need 1 <= b_lo < b_hi, got [{b_lo}, {b_hi}]"
        )));
    }
    let total = |b: f64| TurningFamily::new(p.with_b(b)).map(|f| f.integrals().2);
    let (mut lo, mut hi) = (b_lo, b_hi);
    let (t_lo, t_hi) = (total(lo)?, total(hi)?);
    if !(t_lo > 0.0 && t_hi < 0.0) {
        return Err(Error::Bracketing {
            b_lo,
            b_hi,
            total_lo: t_lo,
            total_hi: t_hi,
        });
    }
    while hi - lo > THRESHOLD_REL_WIDTH * lo {
        let mid = 0.5 * (lo + hi);
        if total(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quintic_matches_end_data() {
        let q = Quintic::hermite([0.1, 0.2, 0.3], [1.0, 2.0, 0.0]);
        assert_relative_eq!(q.value(0.0), 0.1);
        assert_relative_eq!(q.slope(0.0), 0.2);
        assert_relative_eq!(q.value(1.0), 1.0, epsilon = 1e-14);
        assert_relative_eq!(q.slope(1.0), 2.0, epsilon = 1e-14);
        let h = 1e-4;
        let curv = (q.value(1.0 + h) - 2.0 * q.value(1.0) + q.value(1.0 - h)) / (h * h);
        assert!(curv.abs() < 1e-5);
    }

    #[test]
    fn basic_family_has_a_crest_at_origin() {
        let m = 256;
        let c = build_turning_family(TurningFamilyParams::default(), m).unwrap();
        let (d1, _) = c.tangent();
        let w = c.spacing();
        for (j, d) in d1.iter().enumerate() {
            if j == m / 2 {
                assert!(*d < w * w, "crest slope {d}");
            } else {
                assert!(*d > 0.0, "node {j}: {d}");
            }
        }
        assert!(symmetry_errors(&c).unwrap().central <= 1e-12);
    }

    #[test]
    fn even_family_is_flat_near_quarter_turns() {
        let p = TurningFamilyParams::even_default();
        let m = 512;
        let c = build_turning_family(p, m).unwrap();
        let s = symmetry_errors(&c).unwrap();
        assert!(s.central <= 1e-12 && s.even <= 1e-12, "{s:?}");
        for (a, z) in geometry::nodes(m).iter().zip(c.z2()) {
            if (a.abs() - FRAC_PI_2).abs() <= p.eps_flat {
                assert!(z.abs() <= 1e-12, "z2({a}) = {z}");
            }
        }
    }

    #[test]
    fn violated_signs_are_named() {
        let err = |p: TurningFamilyParams| match build_turning_family(p, 256) {
            Err(Error::Construction { property, .. }) => property,
            other => panic!("expected a construction error, got {other:?}"),
        };
        let base = TurningFamilyParams::default();
        assert_eq!(err(TurningFamilyParams { amplitude: -1.0, ..base }), "(a)");
        assert_eq!(err(TurningFamilyParams { depth: -0.01, ..base }), "(c)");
        assert_eq!(err(TurningFamilyParams { depth: 0.0, ..base }), "(c)");
    }

    #[test]
    fn flat_curve_integrals_vanish() {
        let m = 64;
        let alpha = geometry::nodes(m);
        let c = ParamCurve::new(alpha.clone(), vec![0.0; m]).unwrap();
        assert_eq!(turning_integral(&c, 0.6).unwrap(), (0.0, 0.0, 0.0));
        assert_eq!(turning_integral_even(&c, 0.6).unwrap(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn asymmetric_curve_is_rejected() {
        let m = 64;
        let alpha = geometry::nodes(m);
        let z2 = alpha.iter().map(|a| 0.1 * a.cos()).collect();
        let c = ParamCurve::new(alpha, z2).unwrap();
        assert!(matches!(turning_integral(&c, 0.6), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn parts_add_up() {
        for b in [1.0, 10.0, 100.0] {
            let (j1, j2, t) = TurningFamily::new(TurningFamilyParams::default().with_b(b))
                .unwrap()
                .integrals();
            assert!((j1 + j2 - t).abs() <= 1e-12 * t.abs().max(1e-300));
            assert!(j2 < 0.0);
        }
    }

    #[test]
    fn degenerate_family_cannot_be_bracketed() {
        let p = TurningFamilyParams {
            amplitude: 0.0,
            depth: 0.0,
            ..TurningFamilyParams::default()
        };
        assert!(matches!(find_b_threshold(p, 1.0, 200.0), Err(Error::Bracketing { .. })));
    }
}
