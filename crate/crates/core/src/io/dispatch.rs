//! Runs one subcommand, writes its outputs and then the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::solgrid::encode_grid;
use super::svg::{svg_string, Figure, Heatmap, LinePlot, Series};
use crate::bpm::{power, propagate, ScalarField};
use crate::experiments::{run_pair, run_stability, run_young};
use crate::radial::{critical_power, solve_profile, ModeGeometry, ProfileTolerances, RadialProfile};
use crate::torus::{find_fixed_point, index_map_cartesian, quantize, sweep_gamma, TorusGeometry, TorusSolution};
use crate::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const ERROR_REPORT: &str = "error.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Profile,
    Propagate,
    Stability,
    Pair,
    Young,
    Curvature,
    Torus,
    Sweep,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::Profile,
        Subcommand::Propagate,
        Subcommand::Stability,
        Subcommand::Pair,
        Subcommand::Young,
        Subcommand::Curvature,
        Subcommand::Torus,
        Subcommand::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Profile => "profile",
            Subcommand::Propagate => "propagate",
            Subcommand::Stability => "stability",
            Subcommand::Pair => "pair",
            Subcommand::Young => "young",
            Subcommand::Curvature => "curvature",
            Subcommand::Torus => "torus",
            Subcommand::Sweep => "sweep",
        }
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown subcommand '{s}'")))
    }
}

/// Encoding of tabular outputs; summaries are always JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Usage(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: Subcommand,
    pub tool_version: String,
    /// SHA-256 of the canonical configuration document.
    pub config_hash: String,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileDigest>,
}

impl RunManifest {
    /// Copy with the wall-clock field zeroed, for reproducibility checks.
    pub fn timeless(&self) -> Self {
        Self { wall_clock_seconds: 0.0, ..self.clone() }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(cfg: &RunConfig) -> String {
    sha256_hex(cfg.to_toml().as_bytes())
}

struct Outputs {
    dir: PathBuf,
    format: TableFormat,
    files: Vec<FileDigest>,
}

impl Outputs {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(FileDigest { path: name.into(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// `stem.csv` or `stem.json` depending on the chosen format.
    fn table(&mut self, stem: &str, csv: String, value: &impl Serialize) -> Result<()> {
        match self.format {
            TableFormat::Csv => self.write(&format!("{stem}.csv"), csv.as_bytes()),
            TableFormat::Json => self.json(&format!("{stem}.json"), value),
        }
    }

    fn svg(&mut self, name: &str, fig: &Figure) -> Result<()> {
        let s = svg_string(fig)?;
        self.write(name, s.as_bytes())
    }
}

/// Runs `sub` into `out_dir`. On success the manifest is written last; on
/// failure `error.json` is written instead and the error is returned.
pub fn dispatch(sub: Subcommand, cfg: &RunConfig, out_dir: &Path, format: TableFormat) -> Result<RunManifest> {
    fs::create_dir_all(out_dir)?;
    for stale in [MANIFEST, ERROR_REPORT] {
        let p = out_dir.join(stale);
        if p.exists() {
            fs::remove_file(p)?;
        }
    }
    let start = Instant::now();
    let mut out = Outputs { dir: out_dir.to_path_buf(), format, files: Vec::new() };
    let result = validate(cfg)
        .and_then(|_| out.write("config.toml", cfg.to_toml().as_bytes()))
        .and_then(|_| run(sub, cfg, &mut out));
    match result {
        Ok(()) => {
            let manifest = RunManifest {
                subcommand: sub,
                tool_version: env!("CARGO_PKG_VERSION").into(),
                config_hash: config_hash(cfg),
                seed: cfg.run.seed,
                wall_clock_seconds: start.elapsed().as_secs_f64(),
                files: out.files,
            };
            let mut s = serde_json::to_string_pretty(&manifest)?;
            s.push('\n');
            fs::write(out_dir.join(MANIFEST), s)?;
            Ok(manifest)
        }
        Err(e) => {
            write_error_report(out_dir, Some(sub), &e)?;
            Err(e)
        }
    }
}

/// Structured failure record; also used by the binary for usage errors.
pub fn write_error_report(out_dir: &Path, sub: Option<Subcommand>, e: &Error) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let report = json!({
        "subcommand": sub.map(Subcommand::name),
        "kind": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    fs::write(out_dir.join(ERROR_REPORT), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<()> {
    let v = cfg.violations();
    if v.is_empty() {
        Ok(())
    } else {
        let msg: Vec<String> = v.into_iter().map(|(k, m)| format!("{k}: {m}")).collect();
        Err(Error::Config(msg.join("; ")))
    }
}

fn run(sub: Subcommand, cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    match sub {
        Subcommand::Profile => profile(cfg, out),
        Subcommand::Propagate => propagate_cmd(cfg, out),
        Subcommand::Stability => stability(cfg, out),
        Subcommand::Pair => pair(cfg, out),
        Subcommand::Young => young(cfg, out),
        Subcommand::Curvature => curvature(cfg, out),
        Subcommand::Torus => torus(cfg, out),
        Subcommand::Sweep => sweep(cfg, out),
    }
}

fn tolerances(cfg: &RunConfig, geometry: ModeGeometry) -> ProfileTolerances {
    ProfileTolerances { dr: cfg.grid.profile_dr, geometry, ..Default::default() }
}

fn cylinder_profile(cfg: &RunConfig) -> Result<RadialProfile> {
    solve_profile(cfg.run.e0, &cfg.medium, &cfg.wave_params()?, &tolerances(cfg, ModeGeometry::Cylinder))
}

fn series(label: &str, x: &[f64], y: &[f64]) -> Series {
    let (x, y) = x.iter().zip(y).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(a, b)| (*a, *b)).unzip();
    Series { label: label.into(), x, y }
}

fn lines(title: &str, x_label: &str, y_label: &str, series: Vec<Series>) -> Figure {
    Figure::Lines(LinePlot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series })
}

fn profile_csv(p: &RadialProfile) -> String {
    let mut s = String::from("r,e_t,de_t\n");
    for k in 0..p.r_grid.len() {
        s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.r_grid[k], p.e_t[k], p.de_t[k]));
    }
    s
}

fn profile(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let setup = cfg.setup()?;
    let p = setup.soliton()?;
    out.table("profile", profile_csv(&p), &json!({ "r": p.r_grid, "e_t": p.e_t, "de_t": p.de_t }))?;
    out.json(
        "profile_summary.json",
        &json!({
            "geometry": p.geometry,
            "e0": cfg.run.e0,
            "beta": p.beta,
            "power": p.power,
            "kappa": p.kappa,
            "rescaled_norm": p.rescaled_norm(&cfg.medium),
            "r_max": p.r_max(),
        }),
    )?;
    out.svg("profile.svg", &lines("mode profile", "r", "E_t", vec![series("E_t", &p.r_grid, &p.e_t)]))
}

/// Block-averaged intensity, at most `cap` cells per axis.
fn intensity_map(f: &ScalarField, cap: usize) -> Heatmap {
    let bx = f.nx.div_ceil(cap);
    let by = f.ny.div_ceil(cap);
    let (mx, my) = (f.nx / bx, f.ny / by);
    let mut values = vec![0.0; mx * my];
    for j in 0..my * by {
        for i in 0..mx * bx {
            values[(j / by) * mx + i / bx] += f.amp[j * f.nx + i].norm_sqr();
        }
    }
    Heatmap { title: format!("intensity at z = {:.3}", f.z), nx: mx, ny: my, values }
}

fn propagate_cmd(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let setup = cfg.setup()?;
    let mut field = setup.launch(cfg.perturbation())?;
    out.write("initial.solgrid", &encode_grid(&field))?;
    let p_in = power(&field);
    let trace = propagate(
        &mut field,
        setup.z_end,
        setup.dz,
        &setup.medium,
        &setup.wave,
        &[],
        &setup.options(),
        |_| {},
    )?;
    out.write("final.solgrid", &encode_grid(&field))?;
    out.table("trace", trace.to_csv(), &trace)?;
    let z: Vec<f64> = trace.records.iter().map(|r| r.z).collect();
    let rel: Vec<f64> = trace.records.iter().map(|r| r.power / p_in).collect();
    let w: Vec<f64> = trace.records.iter().map(|r| r.width).collect();
    out.svg("power.svg", &lines("power", "z", "P / P(0)", vec![series("power", &z, &rel)]))?;
    out.svg("width.svg", &lines("rms width", "z", "width", vec![series("width", &z, &w)]))?;
    if setup.is_1d() {
        let x: Vec<f64> = (0..field.nx).map(|i| field.x(i)).collect();
        out.svg("final_intensity.svg", &lines("final intensity", "x", "|A|²", vec![series("|A|²", &x, &field.intensity())]))
    } else {
        out.svg("final_intensity.svg", &Figure::Heat(intensity_map(&field, 128)))
    }
}

fn stability(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let setup = cfg.setup()?;
    let r = run_stability(cfg.perturbation(), &setup)?;
    let z: Vec<f64> = r.trace.records.iter().map(|t| t.z).collect();
    let mut csv = String::from("z,centroid_x,width,power\n");
    for (k, t) in r.trace.records.iter().enumerate() {
        let cx = r.centroid_x.get(k).copied().unwrap_or(f64::NAN);
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", t.z, cx, t.width, t.power));
    }
    out.table("stability", csv, &r)?;
    out.json(
        "stability_summary.json",
        &json!({
            "perturbation": r.perturbation,
            "verdict": r.verdict,
            "centroid_drift": r.centroid_drift,
            "width_drift": r.width_drift,
            "min_core_fraction": r.min_core_fraction,
            "monotone": r.monotone,
        }),
    )?;
    let n = z.len().min(r.centroid_x.len());
    out.svg("centroid.svg", &lines("filament position", "z", "x", vec![series("x", &z[..n], &r.centroid_x[..n])]))
}

fn pair(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let setup = cfg.setup()?;
    let r = run_pair(cfg.run.separation, cfg.run.relative_phase, &setup)?;
    out.table("pair", r.to_csv(), &r)?;
    out.json(
        "pair_summary.json",
        &json!({
            "separation_initial": r.separation_initial,
            "relative_phase": r.relative_phase,
            "merged": r.merged,
            "mean_rate": r.mean_rate,
            "verdict": r.verdict,
        }),
    )?;
    out.svg(
        "separation.svg",
        &lines(
            "pair separation",
            "z",
            "separation",
            vec![series("separation", &r.z, &r.separation), series("centre of mass", &r.z, &r.center_of_mass)],
        ),
    )
}

fn young(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let setup = cfg.setup()?;
    let r = run_young(&setup, &cfg.young())?;
    out.table("young", r.to_csv(), &r)?;
    out.json(
        "young_summary.json",
        &json!({
            "control_deflection": r.control_deflection,
            "deflection": r.deflection,
            "fringe_gradient": r.fringe_gradient,
            "threshold": r.threshold,
            "verdict": r.verdict,
        }),
    )?;
    out.svg(
        "young.svg",
        &lines(
            "filament position",
            "z",
            "x",
            vec![series("single hole", &r.z, &r.control_x), series("two holes", &r.z, &r.test_x)],
        ),
    )
}

fn gamma_figure(scan: &crate::torus::CurvatureScan) -> Figure {
    let one = vec![1.0; scan.c_values.len()];
    lines(
        "curvature ratio",
        "C",
        "gamma",
        vec![series("gamma", &scan.c_values, &scan.gamma_values), series("gamma = 1", &scan.c_values, &one)],
    )
}

fn curvature(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let prof = cylinder_profile(cfg)?;
    let grid = cfg.grid_spec().build(&prof)?;
    let range = cfg.curvature_range(grid.r_max());
    let scan = find_fixed_point(&prof, &cfg.medium, &range, &grid)?;
    out.table("gamma", scan.to_csv(), &scan)?;
    out.json(
        "curvature_summary.json",
        &json!({
            "core_radius": grid.r_max(),
            "c_min": range.c_min,
            "c_max": range.c_max,
            "c0": scan.c0,
            "stable": scan.stability,
            "crossings": scan.crossings,
        }),
    )?;
    out.svg("gamma.svg", &gamma_figure(&scan))?;
    let c = scan.c0.unwrap_or(0.5 * range.c_max);
    let half = grid.r_max().min(0.9 / (c * std::f64::consts::SQRT_2));
    let rows = index_map_cartesian(&prof, &cfg.medium, &TorusGeometry::from_curvature(c)?, 65, half)?;
    let heat = Heatmap { title: format!("index at C = {c:.4e}"), nx: 65, ny: 65, values: rows.concat() };
    out.svg("index_map.svg", &Figure::Heat(heat))
}

fn torus(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let wave = cfg.wave_params()?;
    let prof = cylinder_profile(cfg)?;
    let grid = cfg.grid_spec().build(&prof)?;
    let range = cfg.curvature_range(grid.r_max());
    let scan = find_fixed_point(&prof, &cfg.medium, &range, &grid)?;
    out.table("gamma", scan.to_csv(), &scan)?;
    out.svg("gamma.svg", &gamma_figure(&scan))?;
    let (r0, source) = match (scan.c0, cfg.scan.r0) {
        (Some(c0), _) => (1.0 / c0, "fixed-point"),
        (None, Some(r0)) => (r0, "configured"),
        (None, None) => {
            return Err(Error::NoSolution(
                "no stable curvature fixed point in the scanned range and no scan.r0 configured".into(),
            ))
        }
    };
    let curve = critical_power(
        &cfg.medium,
        &wave,
        (cfg.run.crit_e_min, cfg.run.crit_e_max, cfg.run.crit_count),
        &tolerances(cfg, ModeGeometry::Cylinder),
    )?;
    let modes = quantize(r0, &wave, cfg.policy())?;
    let solutions: Vec<TorusSolution> =
        modes.into_iter().map(|m| TorusSolution::new(m, curve.critical_power, &cfg.medium)).collect();
    let mut csv = String::from("r0,m,lambda_adj,freq_shift,energy\n");
    for s in &solutions {
        csv.push_str(&format!(
            "{:.16e},{},{:.16e},{:.16e},{:.16e}\n",
            s.r0, s.m, s.lambda_adj, s.freq_shift, s.energy
        ));
    }
    out.table("torus_modes", csv, &solutions)?;
    out.json(
        "torus.json",
        &json!({
            "c0": scan.c0,
            "stable": scan.stability,
            "r0": r0,
            "r0_source": source,
            "lambda_med": wave.lambda_med,
            "critical_power": curve.critical_power,
            "power_curve": curve,
            "solutions": solutions,
        }),
    )
}

fn sweep(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let prof = cylinder_profile(cfg)?;
    let grid = cfg.grid_spec().build(&prof)?;
    let range = cfg.curvature_range(grid.r_max());
    let report = sweep_gamma(&prof, &cfg.medium, &cfg.scan.mu1_values, &cfg.scan.u_sat_values, &range, &grid);
    out.table("sweep", report.to_csv(), &report)?;
    let stable: Vec<_> = report.cells.iter().filter(|c| c.stable).map(|c| (c.mu1, c.u_sat, c.c0)).collect();
    out.json(
        "sweep_summary.json",
        &json!({
            "cells": report.cells.len(),
            "with_crossing": report.cells.iter().filter(|c| c.crossing).count(),
            "stable": stable,
            "failed": report.cells.iter().filter(|c| c.error.is_some()).count(),
        }),
    )?;
    let floor = report.cells.iter().filter_map(|c| c.gamma_max).fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { 0.0 };
    let heat = Heatmap {
        title: "max gamma (rows mu1, columns u_sat)".into(),
        nx: cfg.scan.u_sat_values.len(),
        ny: cfg.scan.mu1_values.len(),
        values: report.cells.iter().map(|c| c.gamma_max.unwrap_or(floor)).collect(),
    };
    out.svg("sweep.svg", &Figure::Heat(heat))
}
