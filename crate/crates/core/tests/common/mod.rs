//! Test-only oracles. None of them call the propagation or shooting paths they check.
#![allow(dead_code)]

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use toroton_core::experiments::{Setup, YoungConfig};

/// Ground mode relaxed on a periodic 2D (or 1D when `ny == 1`) grid.
pub struct RelaxedMode {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub field: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl RelaxedMode {
    pub fn power(&self) -> f64 {
        let area = if self.ny == 1 { self.dx } else { self.dx * self.dx };
        self.field.iter().map(|v| v * v).sum::<f64>() * area
    }

    pub fn peak(&self) -> f64 {
        self.field.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// Samples along the +x axis through the grid centre: `(x, value)`.
    pub fn axis(&self) -> Vec<(f64, f64)> {
        let jc = self.ny / 2;
        let ic = self.nx / 2;
        (ic..self.nx)
            .map(|i| ((i - ic) as f64 * self.dx, self.field[jc * self.nx + i]))
            .collect()
    }
}

fn fft2(data: &mut [Complex64], nx: usize, ny: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fx = if inverse { planner.plan_fft_inverse(nx) } else { planner.plan_fft_forward(nx) };
    for row in data.chunks_mut(nx) {
        fx.process(row);
    }
    if ny > 1 {
        let fy = if inverse { planner.plan_fft_inverse(ny) } else { planner.plan_fft_forward(ny) };
        let mut col = vec![Complex64::new(0.0, 0.0); ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = data[j * nx + i];
            }
            fy.process(&mut col);
            for j in 0..ny {
                data[j * nx + i] = col[j];
            }
        }
    }
    if inverse {
        let s = 1.0 / (nx * ny) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

fn wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let l = n as f64 * d;
    (0..n)
        .map(|i| {
            let m = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
            2.0 * std::f64::consts::PI * m / l
        })
        .collect()
}

/// Petviashvili relaxation for `(−∇² + κ²) E = g(E²) E` at fixed `κ²`.
///
/// `g` is the nonlinear potential (for the optical mode, `k0² Δε(E²)`).
pub fn relax_mode(
    g: impl Fn(f64) -> f64,
    kappa_sq: f64,
    nx: usize,
    ny: usize,
    dx: f64,
    guess_width: f64,
    guess_peak: f64,
) -> RelaxedMode {
    let kx = wavenumbers(nx, dx);
    let ky = if ny > 1 { wavenumbers(ny, dx) } else { vec![0.0] };
    let mut op = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            op[j * nx + i] = kx[i] * kx[i] + ky[j] * ky[j] + kappa_sq;
        }
    }
    let (ic, jc) = (nx / 2, ny / 2);
    let mut u: Vec<f64> = (0..nx * ny)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let x = (i as f64 - ic as f64) * dx;
            let y = if ny > 1 { (j as f64 - jc as f64) * dx } else { 0.0 };
            guess_peak * (-(x * x + y * y) / (guess_width * guess_width)).exp()
        })
        .collect();
    let mut uh = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut nh = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut residual = f64::INFINITY;
    let mut it = 0;
    while it < 5000 {
        it += 1;
        for k in 0..nx * ny {
            uh[k] = Complex64::new(u[k], 0.0);
            nh[k] = Complex64::new(g(u[k] * u[k]) * u[k], 0.0);
        }
        fft2(&mut uh, nx, ny, false);
        fft2(&mut nh, nx, ny, false);
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..nx * ny {
            num += op[k] * uh[k].norm_sqr();
            den += (uh[k].conj() * nh[k]).re;
        }
        let m = num / den;
        let factor = m.powf(1.5);
        let mut next = nh.clone();
        for k in 0..nx * ny {
            next[k] = factor * nh[k] / op[k];
        }
        fft2(&mut next, nx, ny, true);
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for k in 0..nx * ny {
            diff = diff.max((next[k].re - u[k]).abs());
            scale = scale.max(next[k].re.abs());
            u[k] = next[k].re;
        }
        residual = diff / scale;
        if residual < 1e-13 && (m - 1.0).abs() < 1e-12 {
            break;
        }
    }
    RelaxedMode { nx, ny, dx, field: u, iterations: it, residual }
}

/// Dimensionless Townes norm `∫ψ² dA` for `∇²ψ − ψ + ψ³ = 0`.
pub fn townes_norm(n: usize, half_width: f64) -> f64 {
    let dx = 2.0 * half_width / n as f64;
    let m = relax_mode(|i| i, 1.0, n, n, dx, 1.5, 2.0);
    assert!(m.residual < 1e-10, "oracle did not converge: {}", m.residual);
    m.power()
}

/// Sign oracle for the Young deflection: the ideal slab soliton interfering
/// with the linearly diffracted light of hole 2, evaluated by a direct
/// angular-spectrum sum. Returns the remaining-distance-weighted force
/// `∫ (z_end − z) ∫ |A1|² ∂x(|A1 + A2|² − |A1|²) dx dz`.
pub fn fringe_oracle(setup: &Setup, cfg: &YoungConfig) -> f64 {
    let prof = setup.soliton().unwrap();
    let k = setup.wave.k_lin(&setup.medium);
    let q = (prof.beta * prof.beta - k * k) / (2.0 * k);
    let n = setup.nx;
    let dx = setup.dx;
    let xs = |i: usize| (i as f64 - (n / 2) as f64) * dx;
    let amp = |x: f64| -> (f64, f64) {
        let r = (x - cfg.filament_x).abs();
        if r > prof.r_max() {
            (0.0, 0.0)
        } else {
            let (e, de) = prof.sample(r).unwrap();
            (e, de * (x - cfg.filament_x).signum())
        }
    };
    // spectrum of the field passed by hole 2
    let kk: Vec<f64> = (0..n).map(|m| 2.0 * PI * (m as f64 - (n / 2) as f64) / (n as f64 * dx)).collect();
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let x = xs(i);
        if (x - cfg.hole2_x).abs() > cfg.hole_radius {
            continue;
        }
        let a = amp(x).0;
        for (m, &km) in kk.iter().enumerate() {
            spectrum[m] += a * Complex64::from_polar(dx / (n as f64 * dx), -km * x);
        }
    }
    let core: Vec<f64> = (0..n).map(xs).filter(|x| (x - cfg.filament_x).abs() <= 4.0 * prof.radius_above(0.5)).collect();
    let basis: Vec<Vec<Complex64>> =
        core.iter().map(|&x| kk.iter().map(|&km| Complex64::from_polar(1.0, km * x)).collect()).collect();

    let n_z = 400;
    let dz = (setup.z_end - cfg.screen_z) / n_z as f64;
    let mut total = 0.0;
    for s in 0..=n_z {
        let z = cfg.screen_z + s as f64 * dz;
        let prop: Vec<Complex64> =
            kk.iter().zip(&spectrum).map(|(&km, &c)| c * Complex64::from_polar(1.0, -km * km * z / (2.0 * k))).collect();
        let rot = Complex64::from_polar(1.0, q * z);
        let mut force = 0.0;
        for (c, &x) in core.iter().enumerate() {
            let (mut a2, mut d2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (m, &km) in kk.iter().enumerate() {
                let t = prop[m] * basis[c][m];
                a2 += t;
                d2 += Complex64::new(0.0, km) * t;
            }
            let (e, de) = amp(x);
            let a1 = rot * e;
            let d1 = rot * de;
            let grad = 2.0 * (d1.conj() * a2 + a1.conj() * d2).re + 2.0 * (d2.conj() * a2).re;
            force += e * e * grad;
        }
        let w = (setup.z_end - z) * if s == 0 || s == n_z { 0.5 } else { 1.0 };
        total += w * force;
    }
    total
}
