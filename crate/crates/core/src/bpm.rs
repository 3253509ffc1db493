//! Symmetric split-step Fourier propagation of a paraxial envelope.
//!
//! The envelope `A(x, y, z)` of `E = A · exp(i k z)` (with `k = k0 n_lin`)
//! obeys
//!
//! ```text
//! ∂A/∂z = i/(2k) ∇⊥² A + i k0 Δn(|A|²) A,     Δn = Δε / (2 n_lin)
//! ```
//!
//! With this first-order index increment the stationary states of the
//! envelope are exactly the modes returned by [`crate::radial`]. Each step is
//! a half linear step in Fourier space, a full nonlinear phase, and another
//! half linear step. A grid with `ny == 1` is a one-dimensional transverse
//! problem.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::medium::{MediumParams, WaveParams};
use crate::radial::{ModeGeometry, RadialProfile};

/// Peak-relative amplitude allowed on the outermost samples.
pub const GUARD_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub z: f64,
    /// Row-major samples, index `j * nx + i`.
    pub amp: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if !nx.is_power_of_two() || !ny.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "grid dimensions must be powers of two (got {nx} x {ny})"
            )));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::InvalidParams(format!("grid steps must be > 0 (got {dx}, {dy})")));
        }
        Ok(Self { nx, ny, dx, dy, z: 0.0, amp: vec![Complex64::new(0.0, 0.0); nx * ny] })
    }

    pub fn from_fn(
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Result<Self> {
        let mut field = Self::zeros(nx, ny, dx, dy)?;
        for j in 0..ny {
            let y = field.y(j);
            for i in 0..nx {
                field.amp[j * nx + i] = f(field.x(i), y);
            }
        }
        Ok(field)
    }

    /// Places a mode profile centred at `(x0, y0)`.
    pub fn from_profile(
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        profile: &RadialProfile,
        center: (f64, f64),
    ) -> Result<Self> {
        let r_max = profile.r_max();
        Self::from_fn(nx, ny, dx, dy, |x, y| {
            let r = match profile.geometry {
                ModeGeometry::Cylinder => (x - center.0).hypot(y - center.1),
                ModeGeometry::Slab => (x - center.0).abs(),
            };
            if r > r_max {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(profile.sample(r).map(|s| s.0).unwrap_or(0.0), 0.0)
            }
        })
    }

    /// Transverse coordinate of column `i`; the grid centre is at index `nx / 2`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx / 2) as f64) * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if self.ny == 1 {
            0.0
        } else {
            (j as f64 - (self.ny / 2) as f64) * self.dy
        }
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn cell_area(&self) -> f64 {
        if self.is_1d() {
            self.dx
        } else {
            self.dx * self.dy
        }
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amp.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.amp.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest amplitude on the outermost ring of samples relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.peak_amplitude();
        if peak == 0.0 {
            return 0.0;
        }
        let (nx, ny) = (self.nx, self.ny);
        let mut edge: f64 = 0.0;
        for j in 0..ny {
            edge = edge.max(self.amp[j * nx].norm()).max(self.amp[j * nx + nx - 1].norm());
        }
        if ny > 1 {
            for i in 0..nx {
                edge = edge.max(self.amp[i].norm()).max(self.amp[(ny - 1) * nx + i].norm());
            }
        }
        edge / peak
    }

    pub fn boundary_contaminated(&self) -> bool {
        self.boundary_ratio() >= GUARD_RATIO
    }

    pub fn is_finite(&self) -> bool {
        self.amp.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

pub fn power(field: &ScalarField) -> f64 {
    field.amp.iter().map(|a| a.norm_sqr()).sum::<f64>() * field.cell_area()
}

/// Intensity-weighted mean position.
pub fn centroid(field: &ScalarField) -> Result<(f64, f64)> {
    let (mut s, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for j in 0..field.ny {
        let y = field.y(j);
        for i in 0..field.nx {
            let w = field.amp[j * field.nx + i].norm_sqr();
            s += w;
            sx += w * field.x(i);
            sy += w * y;
        }
    }
    if !(s > 0.0) {
        return Err(Error::ZeroPower);
    }
    Ok((sx / s, sy / s))
}

/// Second-moment radius `sqrt(<(x − x̄)² + (y − ȳ)²>)`.
pub fn width(field: &ScalarField) -> Result<f64> {
    let (cx, cy) = centroid(field)?;
    let (mut s, mut m2) = (0.0, 0.0);
    for j in 0..field.ny {
        let dy = field.y(j) - cy;
        for i in 0..field.nx {
            let w = field.amp[j * field.nx + i].norm_sqr();
            let dx = field.x(i) - cx;
            s += w;
            m2 += w * (dx * dx + dy * dy);
        }
    }
    Ok((m2 / s).sqrt())
}

/// Centroid restricted to `|x − x_c| ≤ half_window` (and likewise in y).
pub fn windowed_centroid(field: &ScalarField, center: (f64, f64), half_window: f64) -> Result<(f64, f64)> {
    let (mut s, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for j in 0..field.ny {
        let y = field.y(j);
        if !field.is_1d() && (y - center.1).abs() > half_window {
            continue;
        }
        for i in 0..field.nx {
            let x = field.x(i);
            if (x - center.0).abs() > half_window {
                continue;
            }
            let w = field.amp[j * field.nx + i].norm_sqr();
            s += w;
            sx += w * x;
            sy += w * y;
        }
    }
    if !(s > 0.0) {
        return Err(Error::ZeroPower);
    }
    Ok((sx / s, sy / s))
}

/// Power inside a disk (or interval, in 1D) of radius `radius` about `center`.
pub fn power_within(field: &ScalarField, center: (f64, f64), radius: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..field.ny {
        let y = field.y(j);
        for i in 0..field.nx {
            let x = field.x(i);
            if (x - center.0).hypot(y - center.1) <= radius {
                s += field.amp[j * field.nx + i].norm_sqr();
            }
        }
    }
    s * field.cell_area()
}

/// Damping rim along the periodic boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Absorber {
    /// Rim width; `None` means `8 · max(dx, dy)`.
    pub width: Option<f64>,
    /// Peak damping rate (inverse length) at the outer edge.
    pub strength: f64,
}

impl Default for Absorber {
    fn default() -> Self {
        Self { width: None, strength: 0.5 }
    }
}

/// A complex transmission screen located at `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskPlane {
    pub z: f64,
    pub transmission: Vec<Complex64>,
}

struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            scratch: vec![Complex64::new(0.0, 0.0); nx * ny],
        }
    }

    fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
        dst.par_chunks_mut(rows).enumerate().for_each(|(c, out)| {
            for (r, v) in out.iter_mut().enumerate() {
                *v = src[r * cols + c];
            }
        });
    }

    /// Unnormalized transform in place.
    fn process(&mut self, data: &mut [Complex64], inverse: bool) {
        let (fx, fy) = if inverse {
            (self.inv_x.clone(), self.inv_y.clone())
        } else {
            (self.fwd_x.clone(), self.fwd_y.clone())
        };
        let nx = self.nx;
        data.par_chunks_mut(nx).for_each(|row| fx.process(row));
        if self.ny > 1 {
            let ny = self.ny;
            Self::transpose(data, &mut self.scratch, ny, nx);
            self.scratch.par_chunks_mut(ny).for_each(|col| fy.process(col));
            Self::transpose(&self.scratch, data, nx, ny);
        }
    }
}

fn wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let l = n as f64 * d;
    (0..n)
        .map(|i| {
            let m = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
            2.0 * PI * m / l
        })
        .collect()
}

/// Reusable stepping state for a fixed grid, medium and step length.
pub struct Propagator {
    nx: usize,
    ny: usize,
    dz: f64,
    medium: MediumParams,
    /// `k0 / (2 n_lin)`: phase per unit length per unit Δε.
    nl_coeff: f64,
    /// Half-step diffraction factors, including the inverse-transform scale.
    half_linear: Vec<Complex64>,
    damping: Option<Vec<f64>>,
    fft: Fft2,
}

impl Propagator {
    pub fn new(
        like: &ScalarField,
        dz: f64,
        p: &MediumParams,
        w: &WaveParams,
        absorber: Option<Absorber>,
    ) -> Result<Self> {
        p.validate()?;
        if !(dz > 0.0) || dz > w.lambda_med / 10.0 * (1.0 + 1e-12) {
            return Err(Error::InvalidParams(format!(
                "dz must be in (0, lambda/10 = {}] (got {dz})",
                w.lambda_med / 10.0
            )));
        }
        let (nx, ny) = (like.nx, like.ny);
        let k = w.k_lin(p);
        let kx = wavenumbers(nx, like.dx);
        let ky = if ny > 1 { wavenumbers(ny, like.dy) } else { vec![0.0] };
        let scale = 1.0 / (nx * ny) as f64;
        let mut half_linear = Vec::with_capacity(nx * ny);
        for &qy in &ky {
            for &qx in &kx {
                let phase = -(qx * qx + qy * qy) * dz / (4.0 * k);
                half_linear.push(Complex64::from_polar(scale, phase));
            }
        }
        let damping = absorber.map(|a| {
            let rim = a.width.unwrap_or(8.0 * like.dx.max(if ny > 1 { like.dy } else { 0.0 }));
            let mut out = vec![1.0; nx * ny];
            // distance to the periodic seam, symmetric under x -> -x
            let half_x = (nx / 2) as f64 * like.dx;
            let half_y = (ny / 2) as f64 * like.dy;
            for j in 0..ny {
                for i in 0..nx {
                    let dist_x = half_x - like.x(i).abs();
                    let dist = if ny > 1 { dist_x.min(half_y - like.y(j).abs()) } else { dist_x };
                    if dist < rim {
                        let s = (rim - dist) / rim;
                        out[j * nx + i] = (-a.strength * s * s * dz).exp();
                    }
                }
            }
            out
        });
        Ok(Self {
            nx,
            ny,
            dz,
            medium: *p,
            nl_coeff: w.k0 / (2.0 * p.n_lin()),
            half_linear,
            damping,
            fft: Fft2::new(nx, ny),
        })
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    fn linear_half(&mut self, amp: &mut [Complex64]) {
        self.fft.process(amp, false);
        amp.par_iter_mut().zip(self.half_linear.par_iter()).for_each(|(a, h)| *a *= h);
        self.fft.process(amp, true);
    }

    /// Advances the field by one step `dz`.
    pub fn step(&mut self, field: &mut ScalarField) -> Result<()> {
        if field.nx != self.nx || field.ny != self.ny {
            return Err(Error::InvalidParams("field grid does not match propagator".into()));
        }
        let mut amp = std::mem::take(&mut field.amp);
        self.linear_half(&mut amp);
        let coeff = self.nl_coeff * self.dz;
        let medium = self.medium;
        amp.par_iter_mut().for_each(|a| {
            let d_eps = medium.d_epsilon_unchecked(a.norm_sqr());
            *a *= Complex64::from_polar(1.0, coeff * d_eps);
        });
        self.linear_half(&mut amp);
        if let Some(d) = &self.damping {
            amp.iter_mut().zip(d).for_each(|(a, f)| *a *= f);
        }
        field.amp = amp;
        field.z += self.dz;
        if !field.is_finite() {
            return Err(Error::Blowup { z: field.z });
        }
        Ok(())
    }
}

/// One split step with a freshly built propagator (no absorber).
pub fn step(field: &ScalarField, dz: f64, p: &MediumParams, w: &WaveParams) -> Result<ScalarField> {
    let mut out = field.clone();
    Propagator::new(field, dz, p, w, None)?.step(&mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub z: f64,
    pub power: f64,
    pub peak: f64,
    pub centroid_x: f64,
    pub centroid_y: f64,
    pub width: f64,
    pub boundary_contaminated: bool,
}

impl TraceRecord {
    pub fn of(field: &ScalarField) -> Self {
        let (cx, cy) = centroid(field).unwrap_or((f64::NAN, f64::NAN));
        Self {
            z: field.z,
            power: power(field),
            peak: field.peak_amplitude(),
            centroid_x: cx,
            centroid_y: cy,
            width: width(field).unwrap_or(f64::NAN),
            boundary_contaminated: field.boundary_contaminated(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PropagationTrace {
    pub records: Vec<TraceRecord>,
}

impl PropagationTrace {
    pub fn first(&self) -> &TraceRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("trace has at least one record")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("z,power,peak,centroid_x,centroid_y,width,boundary_contaminated\n");
        for r in &self.records {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                r.z, r.power, r.peak, r.centroid_x, r.centroid_y, r.width, r.boundary_contaminated
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagateOptions {
    /// Record every this many steps (the first and last state are always recorded).
    pub record_every: usize,
    pub absorber: Option<Absorber>,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self { record_every: 1, absorber: None }
    }
}

/// Steps `field` from its current `z` to `z_end`.
///
/// A mask is applied once, at the first step boundary at or beyond its
/// plane, so adding a transparent mask never changes the stepping. The step
/// is shortened if needed so that a whole number of steps reaches `z_end`.
/// The observer sees the field after every recorded step.
pub fn propagate(
    field: &mut ScalarField,
    z_end: f64,
    dz: f64,
    p: &MediumParams,
    w: &WaveParams,
    masks: &[MaskPlane],
    opts: &PropagateOptions,
    mut observer: impl FnMut(&ScalarField),
) -> Result<PropagationTrace> {
    let z0 = field.z;
    if !(z_end >= z0) {
        return Err(Error::Config(format!("z_end = {z_end} precedes the field position {z0}")));
    }
    for (k, m) in masks.iter().enumerate() {
        if !(m.z >= z0 && m.z <= z_end) {
            return Err(Error::Config(format!("mask at z = {} outside [{z0}, {z_end}]", m.z)));
        }
        if k > 0 && m.z < masks[k - 1].z {
            return Err(Error::Config("masks must be sorted by z".into()));
        }
        if m.transmission.len() != field.amp.len() {
            return Err(Error::Config("mask size does not match the grid".into()));
        }
    }
    // uniform steps no longer than dz that land exactly on z_end
    let n_steps = ((z_end - z0) / dz - 1e-9).ceil().max(0.0) as usize;
    let dz = if n_steps > 0 { (z_end - z0) / n_steps as f64 } else { dz };
    let mut prop = Propagator::new(field, dz, p, w, opts.absorber)?;
    let every = opts.record_every.max(1);
    let mut trace = PropagationTrace::default();
    let mut next_mask = 0;
    let snap = 1e-9 * dz;

    let apply_due = |field: &mut ScalarField, next_mask: &mut usize| {
        while *next_mask < masks.len() && masks[*next_mask].z <= field.z + snap {
            for (a, t) in field.amp.iter_mut().zip(&masks[*next_mask].transmission) {
                if *t != Complex64::new(1.0, 0.0) {
                    *a *= t;
                }
            }
            *next_mask += 1;
        }
    };

    apply_due(field, &mut next_mask);
    trace.records.push(TraceRecord::of(field));
    observer(field);
    for s in 1..=n_steps {
        prop.step(field)?;
        field.z = z0 + s as f64 * dz;
        apply_due(field, &mut next_mask);
        if s % every == 0 || s == n_steps {
            trace.records.push(TraceRecord::of(field));
            observer(field);
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Perturbation {
    /// Cylindrically symmetric amplitude bump on a ring at the field's
    /// second-moment radius.
    SymmetricRing { level: f64 },
    /// Linear phase tilt of angle `level` (radians) along x.
    AsymmetricTilt { level: f64 },
    /// Seeded multiplicative amplitude and phase noise.
    Noise { seed: u64, level: f64 },
}

impl Perturbation {
    pub fn level(&self) -> f64 {
        match *self {
            Perturbation::SymmetricRing { level }
            | Perturbation::AsymmetricTilt { level }
            | Perturbation::Noise { level, .. } => level,
        }
    }
}

pub fn perturb(
    field: &ScalarField,
    kind: Perturbation,
    p: &MediumParams,
    w: &WaveParams,
) -> Result<ScalarField> {
    let mut out = field.clone();
    if kind.level() == 0.0 {
        return Ok(out);
    }
    let nx = field.nx;
    match kind {
        Perturbation::SymmetricRing { level } => {
            let (cx, cy) = centroid(field)?;
            let ring = width(field)?;
            for j in 0..field.ny {
                for i in 0..nx {
                    let r = (field.x(i) - cx).hypot(field.y(j) - cy);
                    let g = (-((r - ring) / (0.5 * ring)).powi(2)).exp();
                    out.amp[j * nx + i] *= (1.0 + 2.0 * level * g).sqrt();
                }
            }
        }
        Perturbation::AsymmetricTilt { level } => {
            let kx = w.k_lin(p) * level;
            for j in 0..field.ny {
                for i in 0..nx {
                    out.amp[j * nx + i] *= Complex64::from_polar(1.0, kx * field.x(i));
                }
            }
        }
        Perturbation::Noise { seed, level } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for a in out.amp.iter_mut() {
                let u: f64 = rng.random_range(-1.0..=1.0);
                let phi: f64 = rng.random_range(-PI..=PI);
                *a *= (1.0 + 2.0 * level * u).sqrt() * Complex64::from_polar(1.0, level * phi);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian(nx: usize, dx: f64, w0: f64, shift: f64) -> ScalarField {
        ScalarField::from_fn(nx, nx, dx, dx, |x, y| {
            Complex64::new((-((x - shift).powi(2) + y * y) / (w0 * w0)).exp(), 0.0)
        })
        .unwrap()
    }

    fn linear() -> (MediumParams, WaveParams) {
        let p = MediumParams { d_eps: 0.0, ..MediumParams::default() };
        (p, WaveParams::new(1.0, &p).unwrap())
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(ScalarField::zeros(100, 64, 1.0, 1.0).is_err());
        assert!(ScalarField::zeros(64, 64, 0.0, 1.0).is_err());
        assert!(ScalarField::zeros(64, 1, 1.0, 1.0).is_ok());
    }

    #[test]
    fn centroid_of_centered_gaussian() {
        let f = gaussian(64, 0.5, 3.0, 0.0);
        let (cx, cy) = centroid(&f).unwrap();
        assert!(cx.abs() < 0.5 / 100.0 && cy.abs() < 0.5 / 100.0);
    }

    #[test]
    fn centroid_translation() {
        let dx = 0.5;
        let a = gaussian(64, dx, 3.0, 0.0);
        let mut b = a.clone();
        let nx = 64;
        for j in 0..nx {
            for i in 0..nx {
                b.amp[j * nx + i] = a.amp[j * nx + (i + nx - 3) % nx];
            }
        }
        let (ca, _) = centroid(&a).unwrap();
        let (cb, _) = centroid(&b).unwrap();
        assert_relative_eq!(cb - ca, 3.0 * dx, max_relative = 1e-10);
        assert_relative_eq!(width(&a).unwrap(), width(&b).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn two_gaussians_moments() {
        let (a, w0) = (6.0, 2.0);
        let f = ScalarField::from_fn(128, 128, 0.25, 0.25, |x, y| {
            let g = |s: f64| (-((x - s).powi(2) + y * y) / (w0 * w0)).exp();
            Complex64::new(g(a) + g(-a), 0.0)
        })
        .unwrap();
        let (cx, cy) = centroid(&f).unwrap();
        assert!(cx.abs() < 1e-12 && cy.abs() < 1e-12);
        assert_relative_eq!(width(&f).unwrap().powi(2), a * a + w0 * w0 / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn zero_field_moments_undefined() {
        let f = ScalarField::zeros(16, 16, 1.0, 1.0).unwrap();
        assert!(matches!(centroid(&f), Err(Error::ZeroPower)));
        assert!(matches!(width(&f), Err(Error::ZeroPower)));
        assert_eq!(power(&f), 0.0);
    }

    #[test]
    fn uniform_field_unchanged_in_linear_medium() {
        let (p, w) = linear();
        let f = ScalarField::from_fn(32, 32, 1.0, 1.0, |_, _| Complex64::new(0.7, 0.2)).unwrap();
        let g = step(&f, 0.5, &p, &w).unwrap();
        for (a, b) in f.amp.iter().zip(&g.amp) {
            assert!((a - b).norm() < 1e-14);
        }
        assert_relative_eq!(g.z, 0.5);
    }

    #[test]
    fn step_rejects_long_steps() {
        let (p, w) = linear();
        let f = gaussian(16, 1.0, 3.0, 0.0);
        assert!(step(&f, w.lambda_med / 5.0, &p, &w).is_err());
    }

    #[test]
    fn step_conserves_power() {
        let p = MediumParams::default();
        let w = WaveParams::new(1.0, &p).unwrap();
        let f = gaussian(64, 0.5, 3.0, 1.0);
        let g = step(&f, 0.5, &p, &w).unwrap();
        assert_relative_eq!(power(&g), power(&f), max_relative = 1e-12);
    }

    #[test]
    fn kerr_collapse_reports_blowup() {
        let p = MediumParams::kerr(1.0, 1.0);
        let w = WaveParams::new(1.0, &p).unwrap();
        let mut f = ScalarField::from_fn(32, 32, 0.5, 0.5, |x, y| {
            Complex64::new(1e160 * (-(x * x + y * y)).exp(), 0.0)
        })
        .unwrap();
        let mut prop = Propagator::new(&f, 0.1, &p, &w, None).unwrap();
        let err = (0..5).try_for_each(|_| prop.step(&mut f)).unwrap_err();
        assert!(matches!(err, Error::Blowup { .. }));
    }

    #[test]
    fn perturbations() {
        let p = MediumParams::default();
        let w = WaveParams::new(1.0, &p).unwrap();
        let f = gaussian(64, 0.5, 3.0, 0.0);
        for kind in [
            Perturbation::SymmetricRing { level: 0.0 },
            Perturbation::AsymmetricTilt { level: 0.0 },
            Perturbation::Noise { seed: 3, level: 0.0 },
        ] {
            assert_eq!(perturb(&f, kind, &p, &w).unwrap(), f);
        }
        let p0 = power(&f);
        for kind in [
            Perturbation::SymmetricRing { level: 0.05 },
            Perturbation::AsymmetricTilt { level: 0.05 },
            Perturbation::Noise { seed: 3, level: 0.05 },
        ] {
            let g = perturb(&f, kind, &p, &w).unwrap();
            assert!((power(&g) - p0).abs() <= 2.0 * 0.05 * p0);
        }
        let n1 = perturb(&f, Perturbation::Noise { seed: 9, level: 0.1 }, &p, &w).unwrap();
        let n2 = perturb(&f, Perturbation::Noise { seed: 9, level: 0.1 }, &p, &w).unwrap();
        assert_eq!(n1, n2);
        let ring = perturb(&f, Perturbation::SymmetricRing { level: 0.1 }, &p, &w).unwrap();
        let (cx, cy) = centroid(&ring).unwrap();
        assert!(cx.abs() < 1e-10 && cy.abs() < 1e-10);
    }

    #[test]
    fn masks_out_of_range_rejected() {
        let (p, w) = linear();
        let mut f = gaussian(16, 1.0, 3.0, 0.0);
        let m = MaskPlane { z: 5.0, transmission: vec![Complex64::new(1.0, 0.0); 256] };
        let err = propagate(&mut f, 1.0, 0.5, &p, &w, &[m], &PropagateOptions::default(), |_| {});
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn absorber_removes_edge_power_only() {
        let (p, w) = linear();
        let mut f = ScalarField::from_fn(64, 1, 1.0, 1.0, |x, _| {
            Complex64::new(if x.abs() > 28.0 { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let mut prop = Propagator::new(&f, 0.5, &p, &w, Some(Absorber::default())).unwrap();
        let before = power(&f);
        prop.step(&mut f).unwrap();
        assert!(power(&f) < before);
        let mut g = gaussian(64, 0.5, 2.0, 0.0);
        let mut prop = Propagator::new(&g, 0.5, &p, &w, Some(Absorber::default())).unwrap();
        let before = power(&g);
        prop.step(&mut g).unwrap();
        assert_relative_eq!(power(&g), before, max_relative = 1e-9);
    }
}
