//! Ground-state filament modes by shooting.
//!
//! The transverse mode equation
//!
//! ```text
//! E'' + (d − 1)/r · E' + (k0² ε(E²) − β²) E = 0,   E(0) = e0,  E'(0) = 0
//! ```
//!
//! is integrated outward for a trial propagation constant `β` and the tail
//! is classified. Too small a `β` overshoots through zero, too large a `β`
//! turns upward and diverges; the bound state sits at the single flip
//! between the two, which is located by bisection. `d = 2` is the
//! cylindrical filament, `d = 1` the planar (slab) mode used by the
//! one-dimensional experiments.
//!
//! Beyond the radius where double precision stops resolving the decaying
//! solution from the growing one, the profile is continued with the exact
//! linear tail (`K0(κr)` or `exp(−κr)`).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::medium::{MediumParams, WaveParams};

/// Peak of the Townes ground state of `R'' + R'/ρ − R + R³ = 0`; used only to
/// guess the decay rate before the real one is known.
const TOWNES_PEAK: f64 = 2.206_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModeGeometry {
    /// Two transverse dimensions, radial coordinate.
    #[default]
    Cylinder,
    /// One transverse dimension, `r = |x|`.
    Slab,
}

impl ModeGeometry {
    fn dims(self) -> f64 {
        match self {
            ModeGeometry::Cylinder => 2.0,
            ModeGeometry::Slab => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailClass {
    /// The field turned upward while still positive.
    DivergingPositive,
    /// The field crossed zero (includes oscillating tails).
    Crossing,
    /// Reached `r_max` positive and decreasing.
    Decayed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOutcome {
    pub class: TailClass,
    /// Field value where the integration stopped.
    pub terminal: f64,
    /// Radius where the integration stopped.
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileTolerances {
    /// Output grid spacing.
    pub dr: f64,
    /// Outer radius; chosen from the decay rate when absent.
    pub r_max: Option<f64>,
    /// Relative local error target for the Runge–Kutta integrator.
    pub rtol: f64,
    pub geometry: ModeGeometry,
}

impl Default for ProfileTolerances {
    fn default() -> Self {
        Self {
            dr: 0.01,
            r_max: None,
            rtol: 1e-12,
            geometry: ModeGeometry::Cylinder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub geometry: ModeGeometry,
    pub r_grid: Vec<f64>,
    pub e_t: Vec<f64>,
    /// `dE_t/dr` at the grid points.
    pub de_t: Vec<f64>,
    pub beta: f64,
    pub power: f64,
    pub kappa: f64,
    /// Radius beyond which the samples are the analytic linear tail.
    pub r_splice: f64,
    pub k0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub peak_amplitudes: Vec<f64>,
    pub powers: Vec<f64>,
    pub critical_power: f64,
}

struct ModeOde<'a> {
    p: &'a MediumParams,
    k0sq: f64,
    beta_sq: f64,
    dm1: f64,
}

impl ModeOde<'_> {
    #[inline]
    fn q(&self, e: f64) -> f64 {
        self.k0sq * (self.p.eps_lin + self.p.d_epsilon_unchecked(e * e)) - self.beta_sq
    }

    #[inline]
    fn rhs(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        [y[1], -self.dm1 * y[1] / r - self.q(y[0]) * y[0]]
    }

    /// Regular expansion `e0 + c2 r² + c4 r⁴` about the axis.
    fn series(&self, e0: f64, d: f64, r: f64) -> [f64; 2] {
        let g0 = self.q(e0) * e0;
        let i0 = e0 * e0;
        let s = 1.0 + i0 / self.p.i_sat;
        let eps_slope = self.p.d_eps / (s * s);
        let g1 = self.q(e0) + 2.0 * i0 * self.k0sq * eps_slope;
        let c2 = -g0 / (2.0 * d);
        let c4 = -g1 * c2 / (8.0 + 4.0 * d);
        let r2 = r * r;
        [e0 + c2 * r2 + c4 * r2 * r2, 2.0 * c2 * r + 4.0 * c4 * r2 * r]
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: [f64; 2], terms: &[(f64, [f64; 2])], h: f64) -> [f64; 2] {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// One attempted Dormand–Prince step; returns the 5th-order solution and
/// the embedded error estimate.
fn dopri_step(ode: &ModeOde, r: f64, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
    let k1 = ode.rhs(r, y);
    let k2 = ode.rhs(r + C2 * h, axpy(y, &[(A21, k1)], h));
    let k3 = ode.rhs(r + C3 * h, axpy(y, &[(A31, k1), (A32, k2)], h));
    let k4 = ode.rhs(r + C4 * h, axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
    let k5 = ode.rhs(
        r + C5 * h,
        axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h),
    );
    let k6 = ode.rhs(
        r + h,
        axpy(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], h),
    );
    let y5 = axpy(y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)], h);
    let k7 = ode.rhs(r + h, y5);
    let err = axpy(
        [0.0, 0.0],
        &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)],
        h,
    );
    (y5, err)
}

struct Trajectory {
    class: TailClass,
    /// Samples on the uniform grid up to the stopping point.
    e: Vec<f64>,
    de: Vec<f64>,
    terminal: f64,
    radius: f64,
}

fn integrate(
    e0: f64,
    beta: f64,
    p: &MediumParams,
    w: &WaveParams,
    r_max: f64,
    dr: f64,
    rtol: f64,
    geometry: ModeGeometry,
    keep_samples: bool,
) -> Result<Trajectory> {
    let d = geometry.dims();
    let ode = ModeOde {
        p,
        k0sq: w.k0 * w.k0,
        beta_sq: beta * beta,
        dm1: d - 1.0,
    };
    let n_steps = (r_max / dr).round() as usize;
    let mut e = Vec::new();
    let mut de = Vec::new();
    if keep_samples {
        e.reserve(n_steps + 1);
        de.reserve(n_steps + 1);
        e.push(e0);
        de.push(0.0);
    }
    let atol = 1e-3 * rtol * e0;

    let r_start = 1e-2 * dr;
    let mut y = ode.series(e0, d, r_start);
    let mut r = r_start;
    let mut h = dr - r_start;
    for i in 1..=n_steps {
        let target = i as f64 * dr;
        while r < target {
            let step = h.min(target - r);
            let (y_new, err) = dopri_step(&ode, r, y, step);
            let scale0 = atol + rtol * y[0].abs().max(y_new[0].abs());
            let scale1 = atol + rtol * y[1].abs().max(y_new[1].abs());
            let norm = ((err[0] / scale0).powi(2) + (err[1] / scale1).powi(2)).sqrt() / 2f64.sqrt();
            if !y_new[0].is_finite() || !y_new[1].is_finite() {
                if step < 1e-12 * dr {
                    return Err(Error::IntegrationBlowup { radius: r });
                }
                h = 0.25 * step;
                continue;
            }
            if norm <= 1.0 {
                r += step;
                y = y_new;
                let grow = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).min(5.0) };
                // Never let the snapped final substep shrink the working step.
                if step >= h {
                    h *= grow;
                }
                h = h.min(dr);
            } else {
                h = step * (0.9 * norm.powf(-0.2)).max(0.1);
                if h < 1e-14 * dr.max(1.0) {
                    return Err(Error::IntegrationBlowup { radius: r });
                }
            }
        }
        r = target;
        if keep_samples {
            e.push(y[0]);
            de.push(y[1]);
        }
        if y[0] < 0.0 {
            return Ok(Trajectory { class: TailClass::Crossing, e, de, terminal: y[0], radius: r });
        }
        if y[1] > 0.0 {
            return Ok(Trajectory {
                class: TailClass::DivergingPositive,
                e,
                de,
                terminal: y[0],
                radius: r,
            });
        }
    }
    Ok(Trajectory { class: TailClass::Decayed, e, de, terminal: y[0], radius: r })
}

fn check_common(e0: f64, p: &MediumParams, dr: f64, w: &WaveParams) -> Result<()> {
    p.validate()?;
    if !(e0 > 0.0) || !e0.is_finite() {
        return Err(Error::Domain(format!("peak amplitude must be > 0 (got {e0})")));
    }
    if !(dr > 0.0) || dr > w.lambda_med / 50.0 {
        return Err(Error::InvalidParams(format!(
            "dr must be in (0, lambda/50 = {}] (got {dr})",
            w.lambda_med / 50.0
        )));
    }
    Ok(())
}

/// Integrates the mode equation outward from the axis and classifies the tail.
pub fn shoot(
    e0: f64,
    beta: f64,
    p: &MediumParams,
    w: &WaveParams,
    r_max: f64,
    dr: f64,
) -> Result<ShootOutcome> {
    shoot_with(e0, beta, p, w, r_max, dr, ModeGeometry::Cylinder)
}

pub fn shoot_with(
    e0: f64,
    beta: f64,
    p: &MediumParams,
    w: &WaveParams,
    r_max: f64,
    dr: f64,
    geometry: ModeGeometry,
) -> Result<ShootOutcome> {
    check_common(e0, p, dr, w)?;
    if !(r_max > dr) {
        return Err(Error::InvalidParams(format!("r_max must exceed dr (got {r_max})")));
    }
    let t = integrate(e0, beta, p, w, r_max, dr, 1e-12, geometry, false)?;
    Ok(ShootOutcome { class: t.class, terminal: t.terminal, radius: t.radius })
}

/// Rough decay-rate guess from the Kerr scaling of the local nonlinear index.
fn kappa_guess(e0: f64, p: &MediumParams, w: &WaveParams, geometry: ModeGeometry) -> f64 {
    let peak = match geometry {
        ModeGeometry::Cylinder => TOWNES_PEAK,
        ModeGeometry::Slab => std::f64::consts::SQRT_2,
    };
    w.k0 * p.d_epsilon_unchecked(e0 * e0).sqrt() / peak
}

/// Solves for the nodeless mode with peak amplitude `e0`.
pub fn solve_profile(
    e0: f64,
    p: &MediumParams,
    w: &WaveParams,
    tol: &ProfileTolerances,
) -> Result<RadialProfile> {
    check_common(e0, p, tol.dr, w)?;
    let geometry = tol.geometry;
    let k_lin = w.k_lin(p);
    let k_peak = w.k0 * (p.eps_lin + p.d_epsilon_unchecked(e0 * e0)).sqrt();
    if !(k_peak > k_lin * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(Error::NoBracket {
            e0,
            reason: "no index contrast between the peak and the background".into(),
        });
    }
    let kg = kappa_guess(e0, p, w, geometry);
    let mut r_max = tol.r_max.unwrap_or(40.0 / kg);
    let dr = tol.dr;

    let classify = |beta: f64, r_max: f64| -> Result<TailClass> {
        Ok(integrate(e0, beta, p, w, r_max, dr, tol.rtol, geometry, false)?.class)
    };

    let mut lo = k_lin;
    let mut hi = k_peak;
    if classify(lo, r_max)? != TailClass::Crossing {
        return Err(Error::NoBracket { e0, reason: "lower end does not overshoot".into() });
    }
    if classify(hi, r_max)? == TailClass::Crossing {
        return Err(Error::NoBracket { e0, reason: "upper end does not undershoot".into() });
    }
    // Bisect until the bracket is exhausted in floating point.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(mid, r_max)? {
            TailClass::Crossing => lo = mid,
            _ => hi = mid,
        }
    }
    let beta = 0.5 * (lo + hi);
    let kappa = (beta * beta - k_lin * k_lin).max(0.0).sqrt();
    if !(kappa > 0.0) {
        return Err(Error::NoBracket { e0, reason: "mode has no evanescent decay".into() });
    }
    if tol.r_max.is_none() {
        r_max = r_max.max(25.0 / kappa);
    }

    let a = integrate(e0, lo, p, w, r_max, dr, tol.rtol, geometry, true)?;
    let b = integrate(e0, hi, p, w, r_max, dr, tol.rtol, geometry, true)?;
    let n = (r_max / dr).round() as usize + 1;
    let common = a.e.len().min(b.e.len());
    // Trust the samples while the two bracketing trajectories agree.
    let mut splice = 0;
    for i in 0..common {
        let mid = 0.5 * (a.e[i] + b.e[i]);
        if mid <= 0.0 || (a.e[i] - b.e[i]).abs() > 1e-6 * mid || a.de[i] > 0.0 || b.de[i] > 0.0 {
            break;
        }
        splice = i;
    }
    if splice < 2 {
        return Err(Error::NoBracket { e0, reason: "shooting solutions disagree at the axis".into() });
    }
    // Back off a little from the point of disagreement.
    splice = splice.saturating_sub((0.5 / (kappa * dr)).ceil() as usize).max(2);

    let mut e_t = Vec::with_capacity(n);
    let mut de_t = Vec::with_capacity(n);
    let mut r_grid = Vec::with_capacity(n);
    for i in 0..n {
        r_grid.push(i as f64 * dr);
    }
    for i in 0..=splice {
        e_t.push(0.5 * (a.e[i] + b.e[i]));
        de_t.push(0.5 * (a.de[i] + b.de[i]));
    }
    let r_s = r_grid[splice];
    let e_s = e_t[splice];
    let x_s = kappa * r_s;
    for &r in &r_grid[splice + 1..] {
        let x = kappa * r;
        let (v, dv) = match geometry {
            ModeGeometry::Cylinder => {
                let ratio = (-(x - x_s)).exp() / scaled_bessel_k(0, x_s);
                (
                    e_s * scaled_bessel_k(0, x) * ratio,
                    -kappa * e_s * scaled_bessel_k(1, x) * ratio,
                )
            }
            ModeGeometry::Slab => {
                let v = e_s * (-(x - x_s)).exp();
                (v, -kappa * v)
            }
        };
        e_t.push(v);
        de_t.push(dv);
    }

    let mut profile = RadialProfile {
        geometry,
        r_grid,
        e_t,
        de_t,
        beta,
        power: 0.0,
        kappa,
        r_splice: r_s,
        k0: w.k0,
    };
    profile.power = power_of(&profile);
    Ok(profile)
}

/// `exp(x) · K_ν(x)` for ν ∈ {0, 1}, x > 0, from `∫₀^∞ exp(−x(cosh t − 1)) cosh(νt) dt`.
pub fn scaled_bessel_k(nu: u32, x: f64) -> f64 {
    assert!(x > 0.0, "scaled_bessel_k needs x > 0");
    let h: f64 = 0.02;
    let mut sum = 0.5;
    let mut t = h;
    loop {
        let term = (-x * (t.cosh() - 1.0)).exp() * (nu as f64 * t).cosh();
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        t += h;
    }
    sum * h
}

/// Transverse power: `∫ E² 2πr dr` for filaments, `∫ E² dx` over the full line for slabs.
/// Trapezoidal quadrature on the profile grid.
pub fn power_of(profile: &RadialProfile) -> f64 {
    let r = &profile.r_grid;
    let e = &profile.e_t;
    if r.len() < 2 {
        return 0.0;
    }
    let f = |i: usize| -> f64 {
        match profile.geometry {
            ModeGeometry::Cylinder => 2.0 * PI * r[i] * e[i] * e[i],
            ModeGeometry::Slab => 2.0 * e[i] * e[i],
        }
    };
    let mut s = 0.0;
    for i in 0..r.len() - 1 {
        s += 0.5 * (f(i) + f(i + 1)) * (r[i + 1] - r[i]);
    }
    s
}

impl RadialProfile {
    pub fn dr(&self) -> f64 {
        self.r_grid[1] - self.r_grid[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.r_grid.last().unwrap_or(&0.0)
    }

    pub fn peak(&self) -> f64 {
        self.e_t[0]
    }

    /// Cubic Hermite interpolation of `(E_t, dE_t/dr)` at `r`.
    pub fn sample(&self, r: f64) -> Result<(f64, f64)> {
        let r_max = self.r_max();
        if !(r >= 0.0 && r <= r_max) {
            return Err(Error::Domain(format!("r = {r} outside profile grid [0, {r_max}]")));
        }
        let dr = self.dr();
        let i = ((r / dr).floor() as usize).min(self.r_grid.len() - 2);
        let t = (r - self.r_grid[i]) / dr;
        let (y0, y1) = (self.e_t[i], self.e_t[i + 1]);
        let (m0, m1) = (self.de_t[i] * dr, self.de_t[i + 1] * dr);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dv = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1;
        Ok((v, dv / dr))
    }

    /// Largest radius at which the field is still above `frac` of the peak.
    pub fn radius_above(&self, frac: f64) -> f64 {
        let thr = frac * self.peak();
        let mut r = 0.0;
        for (ri, ei) in self.r_grid.iter().zip(&self.e_t) {
            if ei.abs() >= thr {
                r = *ri;
            }
        }
        r
    }

    /// Max-norm residual of the mode equation under fourth-order centered
    /// differences, scaled by `max|E_t| · k0²`.
    pub fn scaled_residual(&self, p: &MediumParams) -> f64 {
        let e = &self.e_t;
        let n = e.len();
        let dr = self.dr();
        let dm1 = self.geometry.dims() - 1.0;
        let k0sq = self.k0 * self.k0;
        let bsq = self.beta * self.beta;
        let at = |j: isize| -> f64 { e[j.unsigned_abs()] };
        let mut worst: f64 = 0.0;
        for i in 0..n.saturating_sub(2) {
            let j = i as isize;
            let d2 = (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1) - at(j + 2))
                / (12.0 * dr * dr);
            let lap = if i == 0 {
                (dm1 + 1.0) * d2
            } else {
                let d1 = (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * dr);
                d2 + dm1 * d1 / self.r_grid[i]
            };
            let q = k0sq * (p.eps_lin + p.d_epsilon_unchecked(e[i] * e[i])) - bsq;
            worst = worst.max((lap + q * e[i]).abs());
        }
        worst / (self.peak().abs() * k0sq)
    }

    /// Decay rate fitted to `log(E √r)` (cylinder) or `log E` (slab) over
    /// the last decade of amplitude above `floor` of the peak.
    pub fn fitted_decay_rate(&self, floor: f64) -> Option<f64> {
        let lo = floor * self.peak();
        let hi = 10.0 * lo;
        let pts: Vec<(f64, f64)> = self
            .r_grid
            .iter()
            .zip(&self.e_t)
            .filter(|(r, e)| **r > 0.0 && **e >= lo && **e <= hi)
            .map(|(r, e)| {
                let y = match self.geometry {
                    ModeGeometry::Cylinder => (e * r.sqrt()).ln(),
                    ModeGeometry::Slab => e.ln(),
                };
                (*r, y)
            })
            .collect();
        if pts.len() < 3 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(-sxy / sxx)
    }

    /// Power rescaled to the dimensionless cubic-NLS norm `k0² d_eps · P`.
    pub fn rescaled_norm(&self, p: &MediumParams) -> f64 {
        self.k0 * self.k0 * p.d_eps * self.power
    }
}

/// Sweeps peak amplitude and records the power of each trapped mode.
///
/// Amplitudes are log-spaced over `[e_min, e_max]`. Amplitudes that fail to
/// bracket are skipped. The critical power is the power extrapolated
/// linearly in `e0²` from the two weakest trapped modes down to the trapping
/// threshold (zero when the weakest requested amplitude already traps).
pub fn critical_power(
    p: &MediumParams,
    w: &WaveParams,
    amplitude_range: (f64, f64, usize),
    tol: &ProfileTolerances,
) -> Result<PowerCurve> {
    let (e_min, e_max, count) = amplitude_range;
    if !(e_min > 0.0) || !(e_max >= 10.0 * e_min) || count < 2 {
        return Err(Error::InvalidParams(
            "amplitude range must be positive, span at least one decade, and hold >= 2 points".into(),
        ));
    }
    let ratio = (e_max / e_min).ln();
    let amps: Vec<f64> = (0..count)
        .map(|k| e_min * (ratio * k as f64 / (count - 1) as f64).exp())
        .collect();
    let mut peak_amplitudes = Vec::new();
    let mut powers = Vec::new();
    let mut threshold: f64 = 0.0;
    for &e0 in &amps {
        match solve_profile(e0, p, w, tol) {
            Ok(prof) => {
                peak_amplitudes.push(e0);
                powers.push(prof.power);
            }
            Err(Error::NoBracket { .. }) | Err(Error::IntegrationBlowup { .. }) => {
                if peak_amplitudes.is_empty() {
                    threshold = e0;
                }
            }
            Err(e) => return Err(e),
        }
    }
    let critical = match peak_amplitudes.len() {
        0 => return Err(Error::AllFailed),
        1 => powers[0],
        _ => {
            let (x0, x1) = (peak_amplitudes[0].powi(2), peak_amplitudes[1].powi(2));
            let slope = (powers[1] - powers[0]) / (x1 - x0);
            powers[0] + slope * (threshold * threshold - x0)
        }
    };
    Ok(PowerCurve { peak_amplitudes, powers, critical_power: critical })
}
