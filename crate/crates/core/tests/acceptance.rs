//! Acceptance harness: one pass/fail line per criterion.
//!
//! Every tolerance is a named constant below. Criteria listed in
//! `EXPECTED_UNMET` are computed in full and reported; the test asserts that
//! all other criteria pass and that the listed ones are still unmet, so a
//! change that starts meeting one forces this list to be revisited.

mod common;

use common::{fringe_oracle, townes_norm};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::Write;
use toroton_core::bpm::*;
use toroton_core::experiments::*;
use toroton_core::io::config::{GridSection, RunConfig};
use toroton_core::io::dispatch::{dispatch, Subcommand, TableFormat};
use toroton_core::io::solgrid::{decode_grid, encode_grid};
use toroton_core::io::{dump_grid, load_grid};
use toroton_core::radial::{solve_profile, ProfileTolerances, RadialProfile};
use toroton_core::torus::*;
use toroton_core::{MediumParams, WaveParams};

/// Criteria computed faithfully but known not to hold; see the detail line.
const EXPECTED_UNMET: &[u32] = &[7];

const TOWNES_REL_TOL: f64 = 1e-3;
const TOWNES_ORACLE_GRID: usize = 512;
const KERR_POWER_INVARIANCE: f64 = 5e-3;
const DIFFRACTION_REL_TOL: f64 = 1e-4;
const DIFFRACTION_GRID: usize = 1024;
const POWER_CONSERVATION: f64 = 1e-7;
const CONSERVATION_STEPS: usize = 10_000;
const RICHARDSON_SLOPE: f64 = 2.0;
const RICHARDSON_TOL: f64 = 0.2;
const STATIONARY_WIDTH_DRIFT: f64 = 0.02;
const STATIONARY_DIFFRACTION_LENGTHS: f64 = 50.0;
const REDUCTION_K_TOL: f64 = 0.10;
const FIXED_POINT_GAMMA_TOL: f64 = 1e-9;
const FIXTURE_C0_TOL: f64 = 0.01;
const QUANTIZE_TOL: f64 = 1e-10;
const YOUNG_FACTOR: f64 = 5.0;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(o: &Outcome) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    let note = if !o.pass && EXPECTED_UNMET.contains(&o.id) { " (expected unmet)" } else { "" };
    // straight to the terminal, past the test harness capture
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {:>2} [{verdict}] {}{note}: {}", o.id, o.name, o.detail);
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn saturable() -> MediumParams {
    MediumParams { eps_lin: 1.0, d_eps: 0.5, i_sat: 1.0, mu1: 0.0, u_sat: 1.0 }
}

fn townes() -> Outcome {
    let oracle = townes_norm(TOWNES_ORACLE_GRID, 20.0);
    let p = MediumParams::kerr(1.0, 0.1);
    let w = WaveParams::new(1.0, &p).unwrap();
    let tol = ProfileTolerances { dr: 0.005, ..Default::default() };
    let norm = solve_profile(1.0, &p, &w, &tol).unwrap().rescaled_norm(&p);
    let powers: Vec<f64> = [0.3, 1.0, 3.0].iter().map(|&e| solve_profile(e, &p, &w, &tol).unwrap().power).collect();
    let pmax = powers.iter().cloned().fold(f64::MIN, f64::max);
    let pmin = powers.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (pmax - pmin) / pmin;
    let err = rel(norm, oracle);
    Outcome {
        id: 1,
        name: "townes constant",
        pass: err < TOWNES_REL_TOL && spread < KERR_POWER_INVARIANCE,
        detail: format!(
            "norm {norm:.6} vs relaxation {oracle:.6} (rel {err:.2e} < {TOWNES_REL_TOL:e}); power spread over e0 0.3..3 {spread:.2e} < {KERR_POWER_INVARIANCE:e}"
        ),
    }
}

fn diffraction() -> Outcome {
    let p = MediumParams { d_eps: 0.0, ..saturable() };
    let w = WaveParams::new(1.0, &p).unwrap();
    let (w0, dx) = (8.0, 0.25);
    let n = DIFFRACTION_GRID;
    let mut f =
        ScalarField::from_fn(n, n, dx, dx, |x, y| Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0)).unwrap();
    let z_r = w.k_lin(&p) * w0 * w0 / 2.0;
    let width0 = width(&f).unwrap();
    let opts = PropagateOptions { record_every: 1, absorber: None };
    let tr = propagate(&mut f, z_r, z_r / 64.0, &p, &w, &[], &opts, |_| {}).unwrap();
    let end = tr.last();
    let expect = width0 * 2f64.sqrt();
    let err = rel(end.width, expect);
    Outcome {
        id: 2,
        name: "linear diffraction",
        pass: (end.z - z_r).abs() < 1e-9 && err < DIFFRACTION_REL_TOL,
        detail: format!("width at z_R {:.8} vs sqrt(2)·w(0) {expect:.8} (rel {err:.2e} < {DIFFRACTION_REL_TOL:e}) on {n}²", end.width),
    }
}

fn conservation() -> Outcome {
    let p = saturable();
    let w = WaveParams::new(1.0, &p).unwrap();
    let prof = solve_profile(1.0, &p, &w, &ProfileTolerances::default()).unwrap();
    let start = ScalarField::from_profile(64, 64, 1.0, 1.0, &prof, (0.0, 0.0)).unwrap();
    let start = perturb(&start, Perturbation::AsymmetricTilt { level: 0.1 }, &p, &w).unwrap();
    let start = perturb(&start, Perturbation::SymmetricRing { level: 0.2 }, &p, &w).unwrap();

    let mut f = start.clone();
    let p0 = power(&f);
    let mut prop = Propagator::new(&f, 0.25, &p, &w, None).unwrap();
    for _ in 0..CONSERVATION_STEPS {
        prop.step(&mut f).unwrap();
    }
    let drift = (power(&f) - p0).abs() / p0;

    let opts = PropagateOptions { record_every: 100, absorber: None };
    let fields: Vec<ScalarField> = [0.4, 0.2, 0.1]
        .iter()
        .map(|&dz| {
            let mut g = start.clone();
            propagate(&mut g, 8.0, dz, &p, &w, &[], &opts, |_| {}).unwrap();
            g
        })
        .collect();
    let diff = |a: &ScalarField, b: &ScalarField| -> f64 {
        a.amp.iter().zip(&b.amp).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    };
    let slope = (diff(&fields[0], &fields[1]) / diff(&fields[1], &fields[2])).log2();
    Outcome {
        id: 3,
        name: "conservation and order",
        pass: drift < POWER_CONSERVATION && (slope - RICHARDSON_SLOPE).abs() <= RICHARDSON_TOL,
        detail: format!(
            "power drift over {CONSERVATION_STEPS} steps {drift:.2e} < {POWER_CONSERVATION:e}; Richardson slope {slope:.3} (2 ± {RICHARDSON_TOL})"
        ),
    }
}

fn stationarity() -> Outcome {
    let p = saturable();
    let w = WaveParams::new(1.0, &p).unwrap();
    let prof = solve_profile(1.0, &p, &w, &ProfileTolerances::default()).unwrap();
    let mut f = ScalarField::from_profile(128, 128, 0.5, 0.5, &prof, (0.0, 0.0)).unwrap();
    let w0 = width(&f).unwrap();
    let ld = w.k_lin(&p) * w0 * w0;
    let opts = PropagateOptions { record_every: 20, absorber: None };
    let tr = propagate(&mut f, STATIONARY_DIFFRACTION_LENGTHS * ld, 0.6, &p, &w, &[], &opts, |_| {}).unwrap();
    let drift = tr.records.iter().map(|r| (r.width / w0 - 1.0).abs()).fold(0.0, f64::max);

    let setup = Setup { nx: 128, ny: 128, dx: 0.5, dz: 0.25, z_end: 200.0, record_every: 40, ..Default::default() };
    let ring = run_stability(Perturbation::SymmetricRing { level: 0.05 }, &setup).unwrap();
    let tilt = run_stability(Perturbation::AsymmetricTilt { level: 0.05 }, &setup).unwrap();
    Outcome {
        id: 4,
        name: "soliton stationarity",
        pass: drift < STATIONARY_WIDTH_DRIFT
            && ring.verdict == StabilityVerdict::Stable
            && tilt.verdict == StabilityVerdict::CurvedIntact
            && tilt.monotone,
        detail: format!(
            "max width drift {drift:.2e} over {STATIONARY_DIFFRACTION_LENGTHS} L_D (< {STATIONARY_WIDTH_DRIFT}); ring {:?}; tilt {:?}, monotone {}, drift {:.3}",
            ring.verdict, tilt.verdict, tilt.monotone, tilt.centroid_drift
        ),
    }
}

fn interaction() -> Outcome {
    let setup = Setup { nx: 256, ny: 128, dx: 0.5, dz: 0.25, z_end: 400.0, record_every: 40, ..Default::default() };
    let a = run_pair(16.0, 0.0, &setup).unwrap();
    let r = run_pair(16.0, PI, &setup).unwrap();
    let com = a.center_of_mass.iter().chain(&r.center_of_mass).map(|c| c.abs()).fold(0.0, f64::max);
    Outcome {
        id: 5,
        name: "coherent interaction",
        pass: a.verdict == PairVerdict::Attract && r.verdict == PairVerdict::Repel && com < setup.dx,
        detail: format!(
            "in phase {:?} (merged {}), anti-phase {:?} (rate {:.3e}); max |centre of mass| {com:.2e} < dx",
            a.verdict, a.merged, r.verdict, r.mean_rate
        ),
    }
}

fn reduction_constant(prof: &RadialProfile, c: f64, n: usize) -> f64 {
    let g = TorusGeometry::from_curvature(c).unwrap();
    let r_core = prof.radius_above(1e-3);
    let mut k = 0.0f64;
    for j in 1..=n {
        let r = r_core * j as f64 / n as f64;
        for i in 0..n {
            let th = 2.0 * PI * (i as f64 + 0.5) / n as f64;
            let d = (curl_sq_curved(prof, &g, r, th).unwrap() - curl_sq_straight(prof, r, th).unwrap()).abs();
            k = k.max(d / (c * r));
        }
    }
    k
}

fn torus_profile() -> RadialProfile {
    let p = MediumParams { mu1: 10.0, ..saturable() };
    let w = WaveParams::new(1.0, &p).unwrap();
    solve_profile(1.0, &p, &w, &ProfileTolerances::default()).unwrap()
}

fn reduction() -> Outcome {
    let prof = torus_profile();
    let mut worst: f64 = 0.0;
    let mut ks = Vec::new();
    for c in [1e-3, 1e-4, 1e-5] {
        let coarse = reduction_constant(&prof, c, 60);
        let fine = reduction_constant(&prof, c, 120);
        worst = worst.max(rel(fine, coarse));
        ks.push(fine);
    }
    Outcome {
        id: 6,
        name: "curved to straight reduction",
        pass: worst < REDUCTION_K_TOL && ks.iter().all(|k| k.is_finite() && *k > 0.0),
        detail: format!(
            "K at C = 1e-3, 1e-4, 1e-5: {:.4}, {:.4}, {:.4}; worst change under 2x refinement {worst:.2e} < {REDUCTION_K_TOL}",
            ks[0], ks[1], ks[2]
        ),
    }
}

fn fixed_point() -> Outcome {
    // synthetic curves with known crossings and stability
    let range = CurvatureRange { c_min: 0.0, c_max: 0.1, count: 11 };
    let stable = find_fixed_point_with(|c| Ok(2.0 / (1.0 + c / 0.0371)), &range).unwrap();
    let unstable = find_fixed_point_with(|c| Ok(c / 0.052), &range).unwrap();
    let both = find_fixed_point_with(|c| Ok(1.0 + 0.5 * (2.0 * PI * c / 0.1 - 0.3).sin()), &range).unwrap();
    let all: Vec<Crossing> = [&stable, &unstable, &both].iter().flat_map(|s| s.crossings.clone()).collect();
    let gamma_err = all.iter().map(|x| (x.gamma - 1.0).abs()).fold(0.0, f64::max);
    let flags = stable.crossings.len() == 1
        && stable.crossings[0].stable
        && stable.c0.is_some()
        && unstable.crossings.len() == 1
        && !unstable.crossings[0].stable
        && unstable.c0.is_none()
        && both.crossings.len() == 2
        && !both.crossings[0].stable
        && both.crossings[1].stable
        && both.c0 == Some(both.crossings[1].c);
    let synthetic_ok = flags && gamma_err < FIXED_POINT_GAMMA_TOL;

    // reference fixture: the first stable cell of a pinned sweep
    let base = saturable();
    let w = WaveParams::new(1.0, &base).unwrap();
    let prof = solve_profile(1.0, &base, &w, &ProfileTolerances::default()).unwrap();
    let mu1_values = [0.1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e6];
    let u_sat_values = [0.01, 0.1, 1.0, 10.0, 100.0, f64::INFINITY];
    let coarse = GridSpec::default().build(&prof).unwrap();
    let sweep_range = CurvatureRange { c_min: 0.0, c_max: 0.95 / coarse.r_max(), count: 41 };
    let sweep = sweep_gamma(&prof, &base, &mu1_values, &u_sat_values, &sweep_range, &coarse);
    let gamma_max = sweep.cells.iter().filter_map(|c| c.gamma_max).fold(f64::MIN, f64::max);
    let fixture = match sweep.cells.iter().find(|c| c.stable) {
        None => format!(
            "reference fixture: no stable cell in the pinned {}x{} sweep (max gamma {gamma_max:.4}, never reaches 1 from above)",
            mu1_values.len(),
            u_sat_values.len()
        ),
        Some(cell) => {
            let p = MediumParams { mu1: cell.mu1, u_sat: cell.u_sat, ..base };
            let fine = GridSpec { n_r: 400, n_theta: 128, ..GridSpec::default() }.build(&prof).unwrap();
            let a = find_fixed_point(&prof, &p, &sweep_range, &coarse).unwrap().c0;
            let b = find_fixed_point(&prof, &p, &sweep_range, &fine).unwrap().c0;
            match (a, b) {
                (Some(a), Some(b)) if rel(b, a) < FIXTURE_C0_TOL => {
                    return Outcome {
                        id: 7,
                        name: "curvature fixed point",
                        pass: synthetic_ok,
                        detail: format!(
                            "synthetic max |gamma - 1| {gamma_err:.1e}, flags {flags}; fixture mu1 {} u_sat {}: C0 {a:.6e} vs {b:.6e}",
                            cell.mu1, cell.u_sat
                        ),
                    }
                }
                other => format!("reference fixture C0 not reproduced across grids: {other:?}"),
            }
        }
    };
    Outcome {
        id: 7,
        name: "curvature fixed point",
        pass: false,
        detail: format!(
            "synthetic max |gamma - 1| {gamma_err:.1e} < {FIXED_POINT_GAMMA_TOL:e}, flags {flags}; {fixture}"
        ),
    }
}

fn quantization() -> Outcome {
    let p = MediumParams { eps_lin: 16.0 * PI * PI, ..saturable() };
    let w = WaveParams::new(1.0, &p).unwrap();
    let modes = quantize(1.0, &w, ModePolicy::Nearest).unwrap();
    let m = modes[0];
    // independent arithmetic for r0 = 1, wavelength 1/2
    let expect_shift = 13.0 / (4.0 * PI);
    let expect_adj = 2.0 * PI / 13.0;
    let mut commensurate: f64 = 0.0;
    for r0 in [0.37, 1.0, 2.5, 17.3, 1234.5] {
        for s in quantize(r0, &w, ModePolicy::AllWithin { delta: 0.2 }).unwrap() {
            let loop_len = 2.0 * PI * r0;
            commensurate = commensurate.max((s.m as f64 * s.lambda_adj - loop_len).abs() / loop_len);
        }
    }
    let pass = (w.lambda_med - 0.5).abs() < QUANTIZE_TOL
        && m.m == 13
        && (m.freq_shift - expect_shift).abs() < QUANTIZE_TOL
        && (m.lambda_adj - expect_adj).abs() < QUANTIZE_TOL
        && commensurate <= 4.0 * f64::EPSILON;
    Outcome {
        id: 8,
        name: "quantization",
        pass,
        detail: format!(
            "m {} freq_shift {:.12} (expect {expect_shift:.12}); max relative commensurability error {commensurate:.1e}",
            m.m, m.freq_shift
        ),
    }
}

fn young() -> Outcome {
    let setup = Setup { nx: 4096, ny: 1, dx: 0.25, dz: 0.25, z_end: 2000.0, record_every: 50, ..Default::default() };
    let cfg = YoungConfig::default();
    let r = run_young(&setup, &cfg).unwrap();
    let control = r.control_deflection.abs().max(resolution_floor(&setup));
    let ratio = r.deflection.abs() / control;
    let oracle = fringe_oracle(&setup, &cfg);
    let symmetric = YoungConfig { hole1_x: -7.0, hole2_x: 7.0, ..cfg.clone() };
    let sym = run_young(&setup, &symmetric).unwrap();
    let random = run_young(&setup, &YoungConfig { randomize_seed: Some(11), ..cfg.clone() }).unwrap();
    let pass = ratio >= YOUNG_FACTOR
        && oracle.signum() == r.deflection.signum()
        && sym.deflection.abs() < setup.dx
        && 2.0 * random.deflection.abs() <= r.deflection.abs();
    Outcome {
        id: 9,
        name: "young deflection",
        pass,
        detail: format!(
            "deflection {:.4} vs control floor {control:.3e} (x{ratio:.1}); oracle sign {:+}; symmetric {:.2e} < dx; randomized {:.4}",
            r.deflection,
            oracle.signum(),
            sym.deflection,
            random.deflection
        ),
    }
}

fn roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    for k in 0..16 {
        let (nx, ny) = (rng.random_range(1..40), rng.random_range(1..40));
        let f = ScalarField {
            nx,
            ny,
            dx: rng.random_range(1e-3..10.0),
            dy: rng.random_range(1e-3..10.0),
            z: rng.random_range(-100.0..100.0),
            amp: (0..nx * ny).map(|_| Complex64::new(rng.random_range(-1e3..1e3), rng.random::<f64>())).collect(),
        };
        let path = dir.path().join(format!("f{k}.solgrid"));
        dump_grid(&f, &path).unwrap();
        let g = load_grid(&path).unwrap();
        identical &= g == f && decode_grid(&encode_grid(&g)).unwrap() == f;
    }

    let mut cfg = RunConfig::default();
    cfg.grid = GridSection { nx: 32, ny: 32, z_end: 6.0, record_every: 5, ..cfg.grid };
    cfg.run.perturbation = "noise".into();
    cfg.run.level = 0.1;
    cfg.run.seed = 99;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ma = dispatch(Subcommand::Propagate, &cfg, &a, TableFormat::Csv).unwrap();
    let mb = dispatch(Subcommand::Propagate, &cfg, &b, TableFormat::Csv).unwrap();
    let same = ma.timeless() == mb.timeless();
    Outcome {
        id: 10,
        name: "round trip and determinism",
        pass: identical && same,
        detail: format!(
            "16 random SOLGRID1 fields identical after load(dump): {identical}; repeated propagate manifests identical: {same} ({} files)",
            ma.files.len()
        ),
    }
}

#[test]
fn acceptance() {
    let criteria: [fn() -> Outcome; 10] = [
        townes,
        diffraction,
        conservation,
        stationarity,
        interaction,
        reduction,
        fixed_point,
        quantization,
        young,
        roundtrip,
    ];
    let outcomes: Vec<Outcome> = criteria
        .iter()
        .map(|run| {
            let o = run();
            report(&o);
            o
        })
        .collect();
    let unexpected: Vec<u32> =
        outcomes.iter().filter(|o| !o.pass && !EXPECTED_UNMET.contains(&o.id)).map(|o| o.id).collect();
    let newly_met: Vec<u32> =
        outcomes.iter().filter(|o| o.pass && EXPECTED_UNMET.contains(&o.id)).map(|o| o.id).collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
    assert!(newly_met.is_empty(), "criteria now pass, update EXPECTED_UNMET: {newly_met:?}");
}
