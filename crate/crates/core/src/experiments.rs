//! Scripted propagation experiments: perturbation stability, coherent
//! filament pairs and the two-hole (Young) deflection.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bpm::{
    centroid, perturb, power, power_within, propagate, width, windowed_centroid, Absorber, MaskPlane,
    Perturbation, PropagateOptions, PropagationTrace, Propagator, ScalarField,
};
use crate::error::{Error, Result};
use crate::medium::{MediumParams, WaveParams};
use crate::radial::{solve_profile, ModeGeometry, ProfileTolerances, RadialProfile};

/// Grid, stepping and soliton shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setup {
    pub medium: MediumParams,
    pub wave: WaveParams,
    /// Peak amplitude of the embedded soliton.
    pub e0: f64,
    pub nx: usize,
    /// `1` selects a (1+1)D run.
    pub ny: usize,
    pub dx: f64,
    pub dz: f64,
    pub z_end: f64,
    pub record_every: usize,
    pub absorber: Option<Absorber>,
    /// Radial step for the embedded mode.
    pub profile_dr: f64,
}

impl Default for Setup {
    fn default() -> Self {
        let medium = MediumParams::default();
        Self {
            medium,
            wave: WaveParams::new(1.0, &medium).expect("default medium is valid"),
            e0: 1.0,
            nx: 128,
            ny: 128,
            dx: 0.5,
            dz: 0.2,
            z_end: 200.0,
            record_every: 10,
            absorber: Some(Absorber::default()),
            profile_dr: 0.01,
        }
    }
}

impl Setup {
    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn geometry(&self) -> ModeGeometry {
        if self.is_1d() {
            ModeGeometry::Slab
        } else {
            ModeGeometry::Cylinder
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        if !self.wave.is_consistent(&self.medium) {
            return Err(Error::InvalidParams("wave parameters inconsistent with the medium".into()));
        }
        if self.nx < 8 || self.ny == 0 || !(self.dx > 0.0) || !(self.dz > 0.0) || !(self.z_end >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "need nx >= 8, ny >= 1, dx > 0, dz > 0, z_end >= 0 (got {}, {}, {}, {}, {})",
                self.nx, self.ny, self.dx, self.dz, self.z_end
            )));
        }
        if !(self.e0 > 0.0) {
            return Err(Error::InvalidParams(format!("e0 must be > 0 (got {})", self.e0)));
        }
        Ok(())
    }

    pub fn soliton(&self) -> Result<RadialProfile> {
        let tol = ProfileTolerances { dr: self.profile_dr, geometry: self.geometry(), ..Default::default() };
        solve_profile(self.e0, &self.medium, &self.wave, &tol)
    }

    pub fn blank(&self) -> Result<ScalarField> {
        ScalarField::zeros(self.nx, self.ny, self.dx, if self.is_1d() { 1.0 } else { self.dx })
    }

    fn embed(&self, profile: &RadialProfile, center: (f64, f64)) -> Result<ScalarField> {
        let b = self.blank()?;
        ScalarField::from_profile(b.nx, b.ny, b.dx, b.dy, profile, center)
    }

    /// The soliton centred on the grid with `kind` applied.
    pub fn launch(&self, kind: Perturbation) -> Result<ScalarField> {
        self.validate()?;
        let clean = self.embed(&self.soliton()?, (0.0, 0.0))?;
        perturb(&clean, kind, &self.medium, &self.wave)
    }

    pub fn options(&self) -> PropagateOptions {
        PropagateOptions { record_every: self.record_every.max(1), absorber: self.absorber }
    }

    fn guard(&self) -> f64 {
        match self.absorber {
            Some(a) => a.width.unwrap_or(8.0 * self.dx),
            None => 0.0,
        }
    }

    fn run(&self, field: &mut ScalarField, masks: &[MaskPlane], observer: impl FnMut(&ScalarField)) -> Result<PropagationTrace> {
        propagate(field, self.z_end, self.dz, &self.medium, &self.wave, masks, &self.options(), observer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MaskKind {
    SingleHole { center: f64, radius: f64 },
    DoubleHole { centers: [f64; 2], radius: f64 },
    Custom,
}

/// Screen with holes centred on the x axis: intervals in 1D, disks in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub kind: MaskKind,
    pub transmission: Vec<Complex64>,
}

impl Mask {
    fn holes(like: &ScalarField, centers: &[f64], radius: f64, guard: f64, kind: MaskKind) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Mask(format!("hole radius must be > 0 (got {radius})")));
        }
        let half = (like.nx / 2) as f64 * like.dx - guard;
        for &c in centers {
            if c - radius < -half || c + radius > half {
                return Err(Error::Mask(format!(
                    "hole at x = {c} with radius {radius} leaves the guarded window [-{half}, {half}]"
                )));
            }
        }
        if !like.is_1d() && radius > (like.ny / 2) as f64 * like.dy - guard {
            return Err(Error::Mask(format!("hole radius {radius} leaves the guarded window in y")));
        }
        let mut t = vec![Complex64::new(0.0, 0.0); like.amp.len()];
        for j in 0..like.ny {
            let y = like.y(j);
            for i in 0..like.nx {
                let x = like.x(i);
                if centers.iter().any(|&c| (x - c).hypot(y) <= radius) {
                    t[j * like.nx + i] = Complex64::new(1.0, 0.0);
                }
            }
        }
        Ok(Self { kind, transmission: t })
    }

    pub fn single_hole(like: &ScalarField, center: f64, radius: f64, guard: f64) -> Result<Self> {
        Self::holes(like, &[center], radius, guard, MaskKind::SingleHole { center, radius })
    }

    pub fn double_hole(like: &ScalarField, centers: [f64; 2], radius: f64, guard: f64) -> Result<Self> {
        Self::holes(like, &centers, radius, guard, MaskKind::DoubleHole { centers, radius })
    }

    pub fn custom(like: &ScalarField, transmission: Vec<Complex64>) -> Result<Self> {
        if transmission.len() != like.amp.len() {
            return Err(Error::Mask(format!(
                "transmission has {} samples, grid has {}",
                transmission.len(),
                like.amp.len()
            )));
        }
        if let Some(k) = transmission.iter().position(|t| !(t.norm() <= 1.0)) {
            return Err(Error::Mask(format!("|transmission| > 1 at sample {k}")));
        }
        Ok(Self { kind: MaskKind::Custom, transmission })
    }

    pub fn at(&self, z: f64) -> MaskPlane {
        MaskPlane { z, transmission: self.transmission.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityVerdict {
    Stable,
    Unstable,
    CurvedIntact,
    Disrupted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub perturbation: Perturbation,
    pub trace: PropagationTrace,
    /// Filament position (windowed centroid) at each record.
    pub centroid_x: Vec<f64>,
    pub centroid_drift: f64,
    pub width_drift: f64,
    /// Smallest fraction of the input power found within the core disk.
    pub min_core_fraction: f64,
    pub monotone: bool,
    pub verdict: StabilityVerdict,
}

/// Perturbs the embedded soliton and follows it.
///
/// A nonzero tilt is judged by whether the filament moves monotonically
/// while its core keeps more than 90% of the input power; every other
/// perturbation by centroid drift below `dx` and width drift below 5%.
pub fn run_stability(kind: Perturbation, setup: &Setup) -> Result<StabilityReport> {
    setup.validate()?;
    let profile = setup.soliton()?;
    let clean = setup.embed(&profile, (0.0, 0.0))?;
    let mut field = perturb(&clean, kind, &setup.medium, &setup.wave)?;
    let p_in = power(&field);
    let w0 = width(&clean)?;
    let core = 3.0 * w0;
    let window = 4.0 * w0;

    let mut pos = Vec::new();
    let mut core_min = f64::INFINITY;
    let mut err = None;
    let mut center = (0.0, 0.0);
    let trace = setup.run(&mut field, &[], |f| match windowed_centroid(f, center, window) {
        Ok(c) => {
            center = c;
            pos.push(c.0);
            core_min = core_min.min(power_within(f, c, core) / p_in);
        }
        Err(e) => err = Some(e),
    })
    .map_err(|e| match e {
        Error::Blowup { z } => Error::NonFinite(format!("stability run ({kind:?}) blew up at z = {z}")),
        other => other,
    })?;
    if let Some(e) = err {
        return Err(e);
    }

    let drift = pos.last().copied().unwrap_or(0.0) - pos[0];
    let w_end = trace.last().width;
    let w_start = trace.first().width;
    let width_drift = (w_end - w_start).abs() / w_start;
    let sign = drift.signum();
    let monotone = drift != 0.0 && pos.windows(2).all(|p| (p[1] - p[0]) * sign > 0.0);

    let verdict = match kind {
        Perturbation::AsymmetricTilt { level } if level != 0.0 => {
            if monotone && core_min > 0.9 {
                StabilityVerdict::CurvedIntact
            } else {
                StabilityVerdict::Disrupted
            }
        }
        _ => {
            if drift.abs() < setup.dx && width_drift < 0.05 {
                StabilityVerdict::Stable
            } else {
                StabilityVerdict::Unstable
            }
        }
    };
    Ok(StabilityReport {
        perturbation: kind,
        trace,
        centroid_x: pos,
        centroid_drift: drift,
        width_drift,
        min_core_fraction: core_min,
        monotone,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairVerdict {
    Attract,
    Repel,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub separation_initial: f64,
    pub relative_phase: f64,
    pub z: Vec<f64>,
    pub separation: Vec<f64>,
    pub center_of_mass: Vec<f64>,
    pub merged: bool,
    /// `(separation_end − separation_start) / Δz`.
    pub mean_rate: f64,
    pub verdict: PairVerdict,
}

impl PairReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("z,separation,center_of_mass\n");
        for k in 0..self.z.len() {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", self.z[k], self.separation[k], self.center_of_mass[k]));
        }
        s
    }
}

/// Intensity summed over y for each column.
fn column_intensity(f: &ScalarField) -> Vec<f64> {
    let mut col = vec![0.0; f.nx];
    for j in 0..f.ny {
        for i in 0..f.nx {
            col[i] += f.amp[j * f.nx + i].norm_sqr();
        }
    }
    col
}

/// Positions of the two strongest local maxima (parabolic refinement), or
/// `None` when fewer than two maxima exceed 10% of the global maximum.
fn two_peaks(f: &ScalarField) -> Option<(f64, f64)> {
    let col = column_intensity(f);
    let top = col.iter().cloned().fold(0.0, f64::max);
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for i in 1..f.nx - 1 {
        let (a, b, c) = (col[i - 1], col[i], col[i + 1]);
        if b > a && b >= c && b > 0.1 * top {
            let denom = a - 2.0 * b + c;
            let off = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            peaks.push((b, f.x(i) + off * f.dx));
        }
    }
    if peaks.len() < 2 {
        return None;
    }
    peaks.sort_by(|p, q| q.0.total_cmp(&p.0));
    let (x1, x2) = (peaks[0].1, peaks[1].1);
    Some((x1.min(x2), x1.max(x2)))
}

/// Two identical solitons at `x = ±separation/2` with relative phase
/// `relative_phase` on the right one.
pub fn run_pair(separation: f64, relative_phase: f64, setup: &Setup) -> Result<PairReport> {
    setup.validate()?;
    let profile = setup.soliton()?;
    let core = profile.radius_above((-1.0f64).exp());
    if separation < 3.0 * core {
        return Err(Error::InvalidParams(format!(
            "separation {separation} below three core radii ({})",
            3.0 * core
        )));
    }
    let left = setup.embed(&profile, (-0.5 * separation, 0.0))?;
    let right = setup.embed(&profile, (0.5 * separation, 0.0))?;
    let rot = Complex64::from_polar(1.0, relative_phase);
    let mut field = left.clone();
    field.amp.iter_mut().zip(&right.amp).for_each(|(a, b)| *a += rot * b);

    let (mut z, mut sep, mut com) = (Vec::new(), Vec::new(), Vec::new());
    let mut merged = false;
    let mut err = None;
    setup.run(&mut field, &[], |f| {
        if merged || err.is_some() {
            return;
        }
        match two_peaks(f) {
            Some((a, b)) => match centroid(f) {
                Ok(c) => {
                    z.push(f.z);
                    sep.push(b - a);
                    com.push(c.0);
                }
                Err(e) => err = Some(e),
            },
            None => merged = true,
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    if sep.is_empty() {
        return Err(Error::InvalidParams("filaments not resolved at the start of the run".into()));
    }
    let change = sep[sep.len() - 1] - sep[0];
    let span = z[z.len() - 1] - z[0];
    let mean_rate = if span > 0.0 { change / span } else { 0.0 };
    let verdict = if merged || change < -setup.dx {
        PairVerdict::Attract
    } else if change > setup.dx {
        PairVerdict::Repel
    } else {
        PairVerdict::Neutral
    };
    Ok(PairReport {
        separation_initial: separation,
        relative_phase,
        z,
        separation: sep,
        center_of_mass: com,
        merged,
        mean_rate,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungConfig {
    pub filament_x: f64,
    pub hole1_x: f64,
    pub hole2_x: f64,
    /// Half-width of a slit, or radius of a hole in 2D.
    pub hole_radius: f64,
    /// Screen plane; the soliton starts at `z = 0`.
    pub screen_z: f64,
    /// Amplitude transmission of hole 2; zero closes it.
    pub hole2_transmission: f64,
    /// Makes hole 2 incoherent with hole 1: the test run becomes the mean
    /// over `realizations` copies whose hole-2 phases are equally spaced
    /// from a seeded random offset.
    pub randomize_seed: Option<u64>,
    pub realizations: usize,
    pub significance: f64,
    /// Half-width of the centroid window about the filament; `None` means
    /// four times the soliton's rms width.
    pub window: Option<f64>,
}

impl Default for YoungConfig {
    fn default() -> Self {
        Self {
            filament_x: 0.0,
            hole1_x: 0.0,
            hole2_x: 12.0,
            hole_radius: 5.0,
            screen_z: 0.0,
            hole2_transmission: 1.0,
            randomize_seed: None,
            realizations: 4,
            significance: 5.0,
            window: None,
        }
    }
}

impl YoungConfig {
    /// Reflection across the slit axis.
    pub fn mirrored(&self) -> Self {
        Self { filament_x: -self.filament_x, hole1_x: -self.hole1_x, hole2_x: -self.hole2_x, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeflectionVerdict {
    Consistent,
    Inconsistent,
    NullEffect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflectionReport {
    pub z: Vec<f64>,
    pub control_x: Vec<f64>,
    pub test_x: Vec<f64>,
    /// Terminal displacement of the single-hole run from the start position.
    pub control_deflection: f64,
    /// Terminal displacement of the two-hole run.
    pub deflection: f64,
    /// Weighted fringe gradient felt by the core; positive pulls toward +x.
    pub fringe_gradient: f64,
    pub threshold: f64,
    pub verdict: DeflectionVerdict,
}

impl DeflectionReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("z,control_x,test_x\n");
        for k in 0..self.z.len() {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", self.z[k], self.control_x[k], self.test_x[k]));
        }
        s
    }
}

/// Smallest displacement the Young harness treats as resolved.
pub fn resolution_floor(setup: &Setup) -> f64 {
    0.1 * setup.dx
}

/// Control mask and one test mask per hole-2 phase.
fn young_masks(setup: &Setup, cfg: &YoungConfig, like: &ScalarField) -> Result<(Mask, Vec<Mask>)> {
    let guard = setup.guard();
    if (cfg.hole1_x - cfg.hole2_x).abs() <= 2.0 * cfg.hole_radius {
        return Err(Error::Mask("holes overlap".into()));
    }
    if !(cfg.hole2_transmission >= 0.0 && cfg.hole2_transmission <= 1.0) {
        return Err(Error::Mask(format!("hole 2 transmission must be in [0, 1] (got {})", cfg.hole2_transmission)));
    }
    let control = Mask::single_hole(like, cfg.hole1_x, cfg.hole_radius, guard)?;
    let both = Mask::double_hole(like, [cfg.hole1_x, cfg.hole2_x], cfg.hole_radius, guard)?;
    let phases: Vec<f64> = match cfg.randomize_seed {
        None => vec![0.0],
        Some(seed) => {
            if cfg.realizations < 2 {
                return Err(Error::InvalidParams("phase randomization needs at least 2 realizations".into()));
            }
            let offset = ChaCha8Rng::seed_from_u64(seed).random_range(-PI..PI);
            let n = cfg.realizations;
            (0..n).map(|k| offset + 2.0 * PI * k as f64 / n as f64).collect()
        }
    };
    let tests = phases
        .into_iter()
        .map(|phase| {
            let t2 = Complex64::from_polar(cfg.hole2_transmission, phase);
            let t = both
                .transmission
                .iter()
                .zip(&control.transmission)
                .map(|(b, c)| if *b != *c { t2 } else { *c })
                .collect();
            Mask::custom(like, t).map(|m| Mask { kind: both.kind.clone(), ..m })
        })
        .collect::<Result<_>>()?;
    Ok((control, tests))
}

/// Control (hole 1 only) and test (both holes) runs of the same soliton.
///
/// The filament must sit inside hole 1, or exactly midway between two
/// holes for the symmetric calibration. The fringe gradient is the
/// intensity-weighted gradient of `|A_c + A_2|² − |A_c|²` at the core,
/// with `A_c` the control field and `A_2` the light of hole 2 propagated
/// linearly, weighted by the remaining distance `z_end − z`.
pub fn run_young(setup: &Setup, cfg: &YoungConfig) -> Result<DeflectionReport> {
    setup.validate()?;
    let midway = cfg.filament_x - cfg.hole1_x == cfg.hole2_x - cfg.filament_x;
    if (cfg.filament_x - cfg.hole1_x).abs() > cfg.hole_radius && !midway {
        return Err(Error::Mask(format!(
            "filament at x = {} is not covered by hole 1 (x = {}, radius {})",
            cfg.filament_x, cfg.hole1_x, cfg.hole_radius
        )));
    }
    if !(cfg.screen_z >= 0.0 && cfg.screen_z <= setup.z_end) {
        return Err(Error::Mask(format!("screen at z = {} outside the run", cfg.screen_z)));
    }
    if !(cfg.significance >= 1.0) {
        return Err(Error::InvalidParams(format!("significance factor must be >= 1 (got {})", cfg.significance)));
    }
    let profile = setup.soliton()?;
    let start = setup.embed(&profile, (cfg.filament_x, 0.0))?;
    let (control_mask, test_masks) = young_masks(setup, cfg, &start)?;
    let window = cfg.window.unwrap_or(4.0 * width(&start)?);
    let x0 = cfg.filament_x;

    let track = |mask: &Mask| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut field = start.clone();
        let (mut z, mut xs) = (Vec::new(), Vec::new());
        let mut err = None;
        setup.run(&mut field, &[mask.at(cfg.screen_z)], |f| match windowed_centroid(f, (x0, 0.0), window) {
            Ok(c) => {
                z.push(f.z);
                xs.push(c.0);
            }
            Err(e) => err = Some(e),
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok((z, xs)),
        }
    };
    let (z, control_x) = track(&control_mask)?;
    let mut test_x = vec![0.0; z.len()];
    let mut fringe = 0.0;
    let n = test_masks.len() as f64;
    for mask in &test_masks {
        let (_, xs) = track(mask)?;
        test_x.iter_mut().zip(&xs).for_each(|(a, b)| *a += b / n);
        fringe += fringe_gradient(setup, cfg, &start, &control_mask, mask, window)? / n;
    }
    let control_deflection = control_x[control_x.len() - 1] - control_x[0];
    let deflection = test_x[test_x.len() - 1] - test_x[0];
    let fringe_gradient = fringe;

    let threshold = cfg.significance * control_deflection.abs().max(resolution_floor(setup));
    let verdict = if deflection.abs() < threshold {
        DeflectionVerdict::NullEffect
    } else if deflection.signum() == fringe_gradient.signum() {
        DeflectionVerdict::Consistent
    } else {
        DeflectionVerdict::Inconsistent
    };
    Ok(DeflectionReport { z, control_x, test_x, control_deflection, deflection, fringe_gradient, threshold, verdict })
}

fn fringe_gradient(
    setup: &Setup,
    cfg: &YoungConfig,
    start: &ScalarField,
    control: &Mask,
    test: &Mask,
    window: f64,
) -> Result<f64> {
    let n_steps = (((setup.z_end - cfg.screen_z) / setup.dz) - 1e-9).ceil().max(0.0) as usize;
    // reach the screen along the control path
    let mut at_screen = start.clone();
    let quiet = PropagateOptions { record_every: usize::MAX, absorber: setup.absorber };
    propagate(&mut at_screen, cfg.screen_z, setup.dz, &setup.medium, &setup.wave, &[], &quiet, |_| {})?;
    let mut a_c = at_screen.clone();
    let mut a_2 = at_screen.clone();
    for (k, a) in at_screen.amp.iter().enumerate() {
        let (t, c) = (test.transmission[k], control.transmission[k]);
        a_c.amp[k] = a * c;
        // what the test screen passes beyond the control screen
        a_2.amp[k] = a * (t - c);
    }
    let lin = MediumParams { d_eps: 0.0, ..setup.medium };
    if n_steps == 0 {
        return Ok(0.0);
    }
    let dz = (setup.z_end - cfg.screen_z) / n_steps as f64;
    let mut p_c = Propagator::new(&a_c, dz, &setup.medium, &setup.wave, setup.absorber)?;
    let mut p_2 = Propagator::new(&a_2, dz, &lin, &setup.wave, setup.absorber)?;
    let nx = a_c.nx;
    let mut acc = 0.0;
    for s in 0..=n_steps {
        if s > 0 {
            p_c.step(&mut a_c)?;
            p_2.step(&mut a_2)?;
        }
        let z = cfg.screen_z + s as f64 * dz;
        let weight = (setup.z_end - z) * if s == 0 || s == n_steps { 0.5 } else { 1.0 };
        if weight == 0.0 {
            continue;
        }
        let mut g = 0.0;
        for j in 0..a_c.ny {
            for i in 1..nx - 1 {
                if (a_c.x(i) - cfg.filament_x).abs() > window {
                    continue;
                }
                let k = j * nx + i;
                let fringe = |k: usize| (a_c.amp[k] + a_2.amp[k]).norm_sqr() - a_c.amp[k].norm_sqr();
                let grad = (fringe(k + 1) - fringe(k - 1)) / (2.0 * a_c.dx);
                g += a_c.amp[k].norm_sqr() * grad;
            }
        }
        acc += weight * g;
    }
    Ok(acc * dz)
}
