//! Saturable material response.
//!
//! Both the electric and the magnetic response use the rational form
//! `x / (1 + x / x_sat)`, which is linear for small arguments and levels off
//! at `x_sat`. An infinite saturation scale gives the pure Kerr (or purely
//! linear magnetic) limit.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Linear relative permittivity.
    pub eps_lin: f64,
    /// Permittivity increment per unit intensity at low intensity.
    pub d_eps: f64,
    /// Intensity saturation scale. `f64::INFINITY` is the pure Kerr limit.
    pub i_sat: f64,
    /// Permeability increment per unit curl-squared at low argument.
    pub mu1: f64,
    /// Curl-squared saturation scale.
    pub u_sat: f64,
}

impl Default for MediumParams {
    fn default() -> Self {
        Self {
            eps_lin: 1.0,
            d_eps: 0.5,
            i_sat: 1.0,
            mu1: 0.0,
            u_sat: 1.0,
        }
    }
}

fn saturable(x: f64, x_sat: f64) -> f64 {
    x / (1.0 + x / x_sat)
}

impl MediumParams {
    pub fn kerr(eps_lin: f64, d_eps: f64) -> Self {
        Self {
            eps_lin,
            d_eps,
            i_sat: f64::INFINITY,
            mu1: 0.0,
            u_sat: 1.0,
        }
    }

    /// Collects every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.eps_lin >= 1.0) || !self.eps_lin.is_finite() {
            out.push(format!("eps_lin must be finite and >= 1 (got {})", self.eps_lin));
        }
        if !(self.d_eps >= 0.0) || !self.d_eps.is_finite() {
            out.push(format!("d_eps must be finite and >= 0 (got {})", self.d_eps));
        }
        if !(self.i_sat > 0.0) {
            out.push(format!("i_sat must be > 0 (got {})", self.i_sat));
        }
        if !(self.mu1 >= 0.0) || !self.mu1.is_finite() {
            out.push(format!("mu1 must be finite and >= 0 (got {})", self.mu1));
        }
        if !(self.u_sat > 0.0) {
            out.push(format!("u_sat must be > 0 (got {})", self.u_sat));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v.join("; ")))
        }
    }

    pub fn n_lin(&self) -> f64 {
        self.eps_lin.sqrt()
    }

    /// Nonlinear permittivity increment `ε(i) − eps_lin`, without argument checks.
    #[inline]
    pub(crate) fn d_epsilon_unchecked(&self, i: f64) -> f64 {
        self.d_eps * saturable(i, self.i_sat)
    }

    #[inline]
    pub(crate) fn delta_mu_unchecked(&self, u: f64) -> f64 {
        self.mu1 * saturable(u, self.u_sat)
    }

    /// Derivative of the permeability increment with respect to `u`.
    #[inline]
    pub(crate) fn delta_mu_slope(&self, u: f64) -> f64 {
        let s = 1.0 + u / self.u_sat;
        self.mu1 / (s * s)
    }

    pub fn epsilon_sup(&self) -> f64 {
        self.eps_lin + self.d_eps * self.i_sat
    }

    pub fn delta_mu_sup(&self) -> f64 {
        self.mu1 * self.u_sat
    }
}

pub fn epsilon_of_intensity(i: f64, p: &MediumParams) -> Result<f64> {
    if !(i >= 0.0) {
        return Err(Error::Domain(format!("intensity must be >= 0 (got {i})")));
    }
    Ok(p.eps_lin + p.d_epsilon_unchecked(i))
}

pub fn delta_mu(u: f64, p: &MediumParams) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("curl-squared must be >= 0 (got {u})")));
    }
    Ok(p.delta_mu_unchecked(u))
}

/// Refractive index `n = sqrt(ε(i) · (1 + δμ(u)))`.
pub fn index(i: f64, u: f64, p: &MediumParams) -> Result<f64> {
    let eps = epsilon_of_intensity(i, p)?;
    let mu = 1.0 + delta_mu(u, p)?;
    Ok((eps * mu).sqrt())
}

/// Free-space wavenumber, angular frequency (c = 1) and in-medium wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub k0: f64,
    pub omega: f64,
    pub lambda_med: f64,
}

impl WaveParams {
    pub fn new(k0: f64, p: &MediumParams) -> Result<Self> {
        if !(k0 > 0.0) || !k0.is_finite() {
            return Err(Error::InvalidParams(format!("k0 must be finite and > 0 (got {k0})")));
        }
        Ok(Self {
            k0,
            omega: k0,
            lambda_med: 2.0 * PI / (k0 * p.n_lin()),
        })
    }

    /// Background propagation constant `k0 · sqrt(eps_lin)`.
    pub fn k_lin(&self, p: &MediumParams) -> f64 {
        self.k0 * p.n_lin()
    }

    pub fn is_consistent(&self, p: &MediumParams) -> bool {
        let lam = 2.0 * PI / (self.k0 * p.n_lin());
        (self.omega - self.k0).abs() <= 1e-12 * self.k0
            && (self.lambda_med - lam).abs() <= 1e-12 * lam
    }
}
