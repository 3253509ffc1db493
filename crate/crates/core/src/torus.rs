//! Curvature fixed point of a bent filament and quantized torus solutions.
//!
//! A straight filament mode `E = x̂ E_t(r) cos(βz − ωt)` is transplanted onto
//! curved cylindrical coordinates `(r, θ, α)` about a circle of radius
//! `R = 1/C`, with `z = Rα` and `ρ = R + r cos θ` (θ = 0 points away from the
//! centre of curvature). The magnetic response then sees the cycle-averaged
//! curl-squared
//!
//! ```text
//! u = ½ [ (R/ρ)² β² E_t² + E_t'² sin²θ ]
//! ```
//!
//! which is larger on the inner side of the bend. The resulting index tilt
//! bends the wave surface; `γ(C)` is the ratio of that bending curvature to
//! the geometric curvature, and a torus closes where `γ = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::medium::{MediumParams, WaveParams};
use crate::radial::RadialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry {
    /// Curvature `1/R`; zero is the straight cylinder.
    pub curvature: f64,
}

impl TorusGeometry {
    pub fn straight() -> Self {
        Self { curvature: 0.0 }
    }

    pub fn from_curvature(c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::Geometry(format!("curvature must be finite and >= 0 (got {c})")));
        }
        Ok(Self { curvature: c })
    }

    pub fn from_radius(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Geometry(format!("major radius must be > 0 (got {r})")));
        }
        Self::from_curvature(1.0 / r)
    }

    /// Major radius; infinite for the straight cylinder.
    pub fn major_radius(&self) -> f64 {
        1.0 / self.curvature
    }

    /// `ρ / R = 1 + C r cos θ`.
    #[inline]
    pub fn rho_over_r(&self, r: f64, theta_cos: f64) -> f64 {
        1.0 + self.curvature * r * theta_cos
    }

    /// Requires `ρ > 0` on the disk of radius `r_max`.
    pub fn check(&self, r_max: f64) -> Result<()> {
        if self.curvature * r_max >= 1.0 {
            return Err(Error::Geometry(format!(
                "evaluation radius {r_max} reaches the axis of curvature (R = {})",
                self.major_radius()
            )));
        }
        Ok(())
    }
}

/// Cycle-averaged curl-squared of the straight filament field.
///
/// With `E_r = E_t cos θ`, `E_θ = −E_t sin θ` the longitudinal part
/// `(∂E/∂z)²` averages to `β² E_t² / 2` and the transverse part
/// `(1/r²)(∂(rE_θ)/∂r − ∂E_r/∂θ)² = E_t'² sin²θ` averages to half of that.
pub fn curl_sq_straight(profile: &RadialProfile, r: f64, theta: f64) -> Result<f64> {
    let (e, de) = profile.sample(r)?;
    let s = theta.sin();
    Ok(0.5 * (profile.beta * profile.beta * e * e + de * de * s * s))
}

/// Components `(r, θ, α)` of a vector field and their first partial
/// derivatives at one point. Derivatives along the loop are taken with
/// respect to arc length on the axis, `∂/∂z = (1/R) ∂/∂α`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldJet {
    pub value: [f64; 3],
    pub d_r: [f64; 3],
    pub d_theta: [f64; 3],
    pub d_z: [f64; 3],
}

/// Curl in curved cylindrical coordinates:
///
/// ```text
/// (curl E)_r = 1/(r ρ) { ∂[ρ E_α]/∂θ − r ∂E_θ/∂α }
/// (curl E)_θ = 1/ρ     { ∂E_r/∂α − ∂[ρ E_α]/∂r }
/// (curl E)_α = 1/r     { ∂(r E_θ)/∂r − ∂E_r/∂θ }
/// ```
///
/// written with `∂/∂α = R ∂/∂z` so that `C = 0` is the straight cylinder.
pub fn curl_components_curved(
    jet: &FieldJet,
    geometry: &TorusGeometry,
    r: f64,
    theta: f64,
) -> Result<[f64; 3]> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("curl needs r > 0 (got {r})")));
    }
    let c = geometry.curvature;
    let (s, co) = theta.sin_cos();
    let rho_r = geometry.rho_over_r(r, co);
    if !(rho_r > 0.0) {
        return Err(Error::Geometry(format!("rho <= 0 at r = {r}, theta = {theta}")));
    }
    let [_, e_t, e_a] = jet.value;
    // ∂(ρE_α)/∂θ / ρ  and  ∂(ρE_α)/∂r / ρ, with ρ' = −r sinθ and cosθ.
    let d_rho_ea_dtheta = -c * r * s * e_a / rho_r + jet.d_theta[2];
    let d_rho_ea_dr = c * co * e_a / rho_r + jet.d_r[2];
    let curl_r = d_rho_ea_dtheta / r - jet.d_z[1] / rho_r;
    let curl_t = jet.d_z[0] / rho_r - d_rho_ea_dr;
    let curl_a = (e_t + r * jet.d_r[1] - jet.d_theta[0]) / r;
    Ok([curl_r, curl_t, curl_a])
}

/// The straight filament field carried onto the curved coordinates at
/// propagation phase `phase = βz − ωt`; `E_α ≡ 0`.
pub fn filament_jet(profile: &RadialProfile, r: f64, theta: f64, phase: f64) -> Result<FieldJet> {
    let (e, de) = profile.sample(r)?;
    let (s, c) = theta.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let b = profile.beta;
    Ok(FieldJet {
        value: [e * c * cp, -e * s * cp, 0.0],
        d_r: [de * c * cp, -de * s * cp, 0.0],
        d_theta: [-e * s * cp, -e * c * cp, 0.0],
        d_z: [-b * e * c * sp, b * e * s * sp, 0.0],
    })
}

/// Cycle-averaged curl-squared of the transplanted filament in the curved
/// coordinates. Each component is `a cos φ + b sin φ`, so the average over a
/// cycle is half the sum of the squares at `φ = 0` and `φ = π/2`.
pub fn curl_sq_curved(profile: &RadialProfile, geometry: &TorusGeometry, r: f64, theta: f64) -> Result<f64> {
    let c0 = curl_components_curved(&filament_jet(profile, r, theta, 0.0)?, geometry, r, theta)?;
    let c1 = curl_components_curved(&filament_jet(profile, r, theta, 0.5 * PI)?, geometry, r, theta)?;
    let sq = |v: [f64; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    Ok(0.5 * (sq(c0) + sq(c1)))
}

/// Midpoint quadrature grid on the disk `r < r_max`.
///
/// `n_theta` is a multiple of four and the angle tables are filled from the
/// first quadrant, so `θ ↔ π − θ` pairs have exactly opposite cosines.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub r: Vec<f64>,
    pub dr: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub theta: Vec<f64>,
    pub dtheta: f64,
}

impl PolarGrid {
    pub fn new(n_r: usize, n_theta: usize, r_max: f64) -> Result<Self> {
        if n_r < 2 || n_theta < 4 || n_theta % 4 != 0 || !(r_max > 0.0) {
            return Err(Error::InvalidParams(format!(
                "polar grid needs n_r >= 2, n_theta a positive multiple of 4, r_max > 0 (got {n_r}, {n_theta}, {r_max})"
            )));
        }
        let dr = r_max / n_r as f64;
        let r = (0..n_r).map(|j| (j as f64 + 0.5) * dr).collect();
        let dtheta = 2.0 * PI / n_theta as f64;
        let q = n_theta / 4;
        let mut cos = vec![0.0; n_theta];
        let mut sin = vec![0.0; n_theta];
        let mut theta = vec![0.0; n_theta];
        for k in 0..q {
            let t = (k as f64 + 0.5) * dtheta;
            let (s, c) = t.sin_cos();
            // quadrants: t, π − t, π + t, 2π − t
            let idx = [k, 2 * q - 1 - k, 2 * q + k, 4 * q - 1 - k];
            let vals = [(t, c, s), (PI - t, -c, s), (PI + t, -c, -s), (2.0 * PI - t, c, -s)];
            for (i, (tt, cc, ss)) in idx.into_iter().zip(vals) {
                theta[i] = tt;
                cos[i] = cc;
                sin[i] = ss;
            }
        }
        Ok(Self { r, dr, cos, sin, theta, dtheta })
    }

    pub fn r_max(&self) -> f64 {
        self.dr * self.r.len() as f64
    }

    /// Index of the mirror angle `π − θ`.
    pub fn mirror(&self, k: usize) -> usize {
        let n = self.theta.len();
        (n / 2 + n - 1 - k) % n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_theta: usize,
    /// Core radius as the radius where `E_t` falls to this fraction of its peak.
    pub core_fraction: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_r: 200, n_theta: 64, core_fraction: 1e-3 }
    }
}

impl GridSpec {
    pub fn build(&self, profile: &RadialProfile) -> Result<PolarGrid> {
        let r_core = profile.radius_above(self.core_fraction);
        PolarGrid::new(self.n_r, self.n_theta, r_core)
    }
}

/// Index over the core cross-section, `n[j * n_theta + k]` at `(r_j, θ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexField {
    pub grid: PolarGrid,
    pub n: Vec<f64>,
}

struct CoreSamples {
    e: Vec<f64>,
    de: Vec<f64>,
}

fn core_samples(profile: &RadialProfile, grid: &PolarGrid) -> Result<CoreSamples> {
    let mut e = Vec::with_capacity(grid.r.len());
    let mut de = Vec::with_capacity(grid.r.len());
    for &r in &grid.r {
        let (v, d) = profile.sample(r)?;
        e.push(v);
        de.push(d);
    }
    Ok(CoreSamples { e, de })
}

/// Cycle-averaged curl-squared on the grid, from the closed form that the
/// curved-curl kernels reduce to for the transplanted filament.
#[inline]
fn u_curved(beta: f64, e: f64, de: f64, rho_r: f64, sin: f64) -> f64 {
    0.5 * (beta * beta * e * e / (rho_r * rho_r) + de * de * sin * sin)
}

pub fn delta_index_field(
    profile: &RadialProfile,
    p: &MediumParams,
    geometry: &TorusGeometry,
    grid: &PolarGrid,
) -> Result<IndexField> {
    p.validate()?;
    geometry.check(grid.r_max())?;
    let s = core_samples(profile, grid)?;
    let nt = grid.theta.len();
    let mut n = vec![0.0; grid.r.len() * nt];
    for (j, &r) in grid.r.iter().enumerate() {
        let eps = p.eps_lin + p.d_epsilon_unchecked(s.e[j] * s.e[j]);
        for k in 0..nt {
            let rho_r = geometry.rho_over_r(r, grid.cos[k]);
            let u = u_curved(profile.beta, s.e[j], s.de[j], rho_r, grid.sin[k]);
            n[j * nt + k] = (eps * (1.0 + p.delta_mu_unchecked(u))).sqrt();
        }
    }
    Ok(IndexField { grid: grid.clone(), n })
}

impl IndexField {
    /// `∫ n cos θ w dA` with intensity weight `w = E_t²`, summed over mirror
    /// pairs so that a mirror-symmetric index gives exactly zero.
    pub fn odd_moment(&self, profile: &RadialProfile) -> Result<f64> {
        let s = core_samples(profile, &self.grid)?;
        let nt = self.grid.theta.len();
        let mut acc = 0.0;
        for (j, &r) in self.grid.r.iter().enumerate() {
            let w = s.e[j] * s.e[j] * r;
            let mut ring = 0.0;
            for k in 0..nt {
                let m = self.grid.mirror(k);
                if self.grid.cos[k] > 0.0 {
                    ring += (self.n[j * nt + k] - self.n[j * nt + m]) * self.grid.cos[k];
                }
            }
            acc += w * ring;
        }
        Ok(acc * self.grid.dr * self.grid.dtheta)
    }
}

/// Weighted sums over the core: `(∫ w dA, ∫ n w dA, ∫ n ∂w/∂x dA)` with
/// intensity weight `w = E_t²` and `∂w/∂x = 2 E_t E_t' cos θ`.
fn weighted_sums(n: impl Fn(usize, usize) -> f64, s: &CoreSamples, grid: &PolarGrid) -> (f64, f64, f64) {
    let nt = grid.theta.len();
    let (mut pw, mut nw, mut grad) = (0.0, 0.0, 0.0);
    for (j, &r) in grid.r.iter().enumerate() {
        let w = s.e[j] * s.e[j] * r;
        let wx = 2.0 * s.e[j] * s.de[j] * r;
        let mut ring = 0.0;
        for k in 0..nt {
            let nv = n(j, k);
            pw += w;
            nw += nv * w;
            // pair θ with π − θ so a mirror-symmetric index cancels exactly
            if grid.cos[k] > 0.0 {
                ring += (nv - n(j, grid.mirror(k))) * grid.cos[k];
            }
        }
        grad += ring * wx;
    }
    (pw, nw, grad)
}

/// Ray curvature toward the bend centre, `−⟨∂n/∂x⟩_w / n̄`.
///
/// The weighted gradient is integrated by parts,
/// `⟨∂n/∂x⟩_w = −∫ n ∂w/∂x dA / ∫ w dA`; the weight is negligible at the
/// core edge.
pub fn ray_curvature(field: &IndexField, profile: &RadialProfile) -> Result<f64> {
    let s = core_samples(profile, &field.grid)?;
    let nt = field.grid.theta.len();
    let (_, nw, grad) = weighted_sums(|j, k| field.n[j * nt + k], &s, &field.grid);
    Ok(grad / nw)
}

/// Ratio of the index-induced ray curvature to the geometric curvature.
///
/// At `C = 0` the ratio is the derivative of the ray curvature with respect
/// to `C`, evaluated analytically.
pub fn gamma_of_c(profile: &RadialProfile, p: &MediumParams, c: f64, grid: &PolarGrid) -> Result<f64> {
    let geometry = TorusGeometry::from_curvature(c)?;
    if profile.power <= 0.0 || profile.peak() <= 0.0 {
        return Err(Error::ZeroPower);
    }
    if c == 0.0 {
        return gamma_at_zero(profile, p, grid);
    }
    let field = delta_index_field(profile, p, &geometry, grid)?;
    Ok(ray_curvature(&field, profile)? / c)
}

fn gamma_at_zero(profile: &RadialProfile, p: &MediumParams, grid: &PolarGrid) -> Result<f64> {
    p.validate()?;
    let s = core_samples(profile, grid)?;
    let nt = grid.theta.len();
    let b = profile.beta;
    let mut n0 = vec![0.0; grid.r.len() * nt];
    let mut dn = vec![0.0; grid.r.len() * nt];
    for (j, &r) in grid.r.iter().enumerate() {
        let eps = p.eps_lin + p.d_epsilon_unchecked(s.e[j] * s.e[j]);
        let a = 0.5 * b * b * s.e[j] * s.e[j];
        for k in 0..nt {
            let u = u_curved(b, s.e[j], s.de[j], 1.0, grid.sin[k]);
            let mu = 1.0 + p.delta_mu_unchecked(u);
            let n = (eps * mu).sqrt();
            // du/dC = −2 a r cos θ at C = 0
            let du = -2.0 * a * r * grid.cos[k];
            n0[j * nt + k] = n;
            dn[j * nt + k] = 0.5 * n / mu * p.delta_mu_slope(u) * du;
        }
    }
    // The straight index is mirror symmetric, so only the gradient term of
    // grad/nw carries a first-order contribution.
    let (_, nw, _) = weighted_sums(|j, k| n0[j * nt + k], &s, grid);
    let (_, _, grad) = weighted_sums(|j, k| dn[j * nt + k], &s, grid);
    Ok(grad / nw)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub c: f64,
    pub gamma: f64,
    /// Downward crossing of one.
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureScan {
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    /// First downward crossing of `γ = 1`.
    pub c0: Option<f64>,
    pub stability: bool,
    pub crossings: Vec<Crossing>,
}

impl CurvatureScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("c,gamma\n");
        for (c, g) in self.c_values.iter().zip(&self.gamma_values) {
            s.push_str(&format!("{c:.16e},{g:.16e}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRange {
    pub c_min: f64,
    pub c_max: f64,
    pub count: usize,
}

impl CurvatureRange {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count.max(2);
        (0..n)
            .map(|k| self.c_min + (self.c_max - self.c_min) * k as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Scans `γ(C)` and refines every crossing of one by bisection.
pub fn find_fixed_point_with(
    gamma: impl Fn(f64) -> Result<f64> + Sync,
    range: &CurvatureRange,
) -> Result<CurvatureScan> {
    if !(range.c_min >= 0.0 && range.c_max > range.c_min) {
        return Err(Error::InvalidParams(format!(
            "curvature range must satisfy 0 <= c_min < c_max (got {} .. {})",
            range.c_min, range.c_max
        )));
    }
    let c_values = range.values();
    let gamma_values: Vec<f64> = c_values.par_iter().map(|&c| gamma(c)).collect::<Result<_>>()?;
    let mut crossings = Vec::new();
    for i in 0..c_values.len() {
        let g0 = gamma_values[i] - 1.0;
        if g0 == 0.0 {
            crossings.push(classify_crossing(&gamma, c_values[i])?);
            continue;
        }
        let Some(&next) = gamma_values.get(i + 1) else { break };
        let g1 = next - 1.0;
        if g1 == 0.0 || g0.signum() == g1.signum() {
            continue;
        }
        let (mut lo, mut hi) = (c_values[i], c_values[i + 1]);
        let mut c = 0.5 * (lo + hi);
        let mut gc = gamma(c)? - 1.0;
        while gc.abs() >= 1e-10 {
            if gc.signum() == g0.signum() {
                lo = c;
            } else {
                hi = c;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            c = mid;
            gc = gamma(c)? - 1.0;
        }
        crossings.push(classify_crossing(&gamma, c)?);
    }
    let first_stable = crossings.iter().find(|x| x.stable).copied();
    Ok(CurvatureScan {
        c_values,
        gamma_values,
        c0: first_stable.map(|x| x.c),
        stability: first_stable.is_some(),
        crossings,
    })
}

fn classify_crossing(gamma: &impl Fn(f64) -> Result<f64>, c: f64) -> Result<Crossing> {
    let delta = 1e-3 * c;
    let below = gamma(c - delta)?;
    let above = gamma(c + delta)?;
    Ok(Crossing { c, gamma: gamma(c)?, stable: below > 1.0 && above < 1.0 })
}

pub fn find_fixed_point(
    profile: &RadialProfile,
    p: &MediumParams,
    range: &CurvatureRange,
    grid: &PolarGrid,
) -> Result<CurvatureScan> {
    if range.c_max * grid.r_max() >= 1.0 {
        return Err(Error::Geometry(format!(
            "c_max = {} too large for core radius {}",
            range.c_max,
            grid.r_max()
        )));
    }
    find_fixed_point_with(|c| gamma_of_c(profile, p, c, grid), range)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum ModePolicy {
    Nearest,
    /// Every `m` with `|freq_shift − 1| ≤ delta`.
    AllWithin { delta: f64 },
}

/// Phase-closed winding: `2π r0 = m · lambda_adj`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusMode {
    pub r0: f64,
    pub m: u64,
    pub lambda_adj: f64,
    pub freq_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusSolution {
    pub r0: f64,
    pub m: u64,
    pub lambda_adj: f64,
    pub freq_shift: f64,
    pub energy: f64,
}

fn mode_for(r0: f64, m: u64, lambda_med: f64) -> TorusMode {
    let lambda_adj = 2.0 * PI * r0 / m as f64;
    TorusMode { r0, m, lambda_adj, freq_shift: lambda_med / lambda_adj }
}

pub fn quantize(r0: f64, w: &WaveParams, policy: ModePolicy) -> Result<Vec<TorusMode>> {
    let lam = w.lambda_med;
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::NoSolution(format!("r0 must be finite and > 0 (got {r0})")));
    }
    if r0 < lam / (2.0 * PI) {
        return Err(Error::NoSolution(format!(
            "loop length 2π·{r0} is shorter than one wavelength {lam}"
        )));
    }
    let ratio = 2.0 * PI * r0 / lam;
    match policy {
        ModePolicy::Nearest => Ok(vec![mode_for(r0, (ratio.round() as u64).max(1), lam)]),
        ModePolicy::AllWithin { delta } => {
            if !(delta >= 0.0) {
                return Err(Error::InvalidParams(format!("delta must be >= 0 (got {delta})")));
            }
            // freq_shift = m / ratio
            let lo = ((1.0 - delta) * ratio).ceil().max(1.0) as u64;
            let hi = ((1.0 + delta) * ratio).floor() as u64;
            Ok((lo..=hi)
                .map(|m| mode_for(r0, m, lam))
                .filter(|s| (s.freq_shift - 1.0).abs() <= delta)
                .collect())
        }
    }
}

/// `U = P_crit · m · lambda_adj · n_group` with `n_group = sqrt(eps_lin)`, c = 1.
pub fn torus_energy(critical_power: f64, mode: &TorusMode, p: &MediumParams) -> f64 {
    critical_power * mode.m as f64 * mode.lambda_adj * p.n_lin()
}

impl TorusSolution {
    pub fn new(mode: TorusMode, critical_power: f64, p: &MediumParams) -> Self {
        Self {
            r0: mode.r0,
            m: mode.m,
            lambda_adj: mode.lambda_adj,
            freq_shift: mode.freq_shift,
            energy: torus_energy(critical_power, &mode, p),
        }
    }
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub mu1: f64,
    pub u_sat: f64,
    pub crossing: bool,
    pub stable: bool,
    pub c0: Option<f64>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        let mut s = String::from("mu1,u_sat,crossing,stable,c0,gamma_min,gamma_max,error\n");
        for c in &self.cells {
            s.push_str(&format!(
                "{:.16e},{:.16e},{},{},{},{},{},{}\n",
                c.mu1,
                c.u_sat,
                c.crossing,
                c.stable,
                opt(c.c0),
                opt(c.gamma_min),
                opt(c.gamma_max),
                c.error.as_deref().unwrap_or("").replace(',', ";")
            ));
        }
        s
    }
}

/// Scans the magnetic response over `mu1 × u_sat` (row-major, `mu1` outer)
/// for a fixed filament profile and electric response.
pub fn sweep_gamma(
    profile: &RadialProfile,
    base: &MediumParams,
    mu1_values: &[f64],
    u_sat_values: &[f64],
    range: &CurvatureRange,
    grid: &PolarGrid,
) -> SweepReport {
    let cells: Vec<(f64, f64)> = mu1_values
        .iter()
        .flat_map(|&m| u_sat_values.iter().map(move |&u| (m, u)))
        .collect();
    let cells = cells
        .par_iter()
        .map(|&(mu1, u_sat)| {
            let p = MediumParams { mu1, u_sat, ..*base };
            match find_fixed_point(profile, &p, range, grid) {
                Ok(scan) => SweepCell {
                    mu1,
                    u_sat,
                    crossing: !scan.crossings.is_empty(),
                    stable: scan.stability,
                    c0: scan.c0,
                    gamma_min: scan.gamma_values.iter().cloned().reduce(f64::min),
                    gamma_max: scan.gamma_values.iter().cloned().reduce(f64::max),
                    error: None,
                },
                Err(e) => SweepCell {
                    mu1,
                    u_sat,
                    crossing: false,
                    stable: false,
                    c0: None,
                    gamma_min: None,
                    gamma_max: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    SweepReport { cells }
}

/// Unused by the solvers; exposes the transplanted field on a Cartesian
/// cross-section for plotting.
pub fn index_map_cartesian(
    profile: &RadialProfile,
    p: &MediumParams,
    geometry: &TorusGeometry,
    n: usize,
    half_width: f64,
) -> Result<Vec<Vec<f64>>> {
    geometry.check(half_width * std::f64::consts::SQRT_2)?;
    let d = 2.0 * half_width / (n - 1) as f64;
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let y = -half_width + j as f64 * d;
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let x = -half_width + i as f64 * d;
            let r = x.hypot(y);
            let (e, de) = profile.sample(r.min(profile.r_max()))?;
            let (co, si) = if r > 0.0 { (x / r, y / r) } else { (1.0, 0.0) };
            let u = u_curved(profile.beta, e, de, geometry.rho_over_r(r, co), si);
            let eps = p.eps_lin + p.d_epsilon_unchecked(e * e);
            row.push((eps * (1.0 + p.delta_mu_unchecked(u))).sqrt());
        }
        rows.push(row);
    }
    Ok(rows)
}
