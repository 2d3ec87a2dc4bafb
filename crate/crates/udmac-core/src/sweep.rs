//! Experiment harness: parameter sweeps, CSV output and run manifests.
//!
//! Every command resolves its configuration, fans the sweep points out over a
//! bounded worker pool, merges rows in sweep order (so output bytes do not
//! depend on scheduling) and writes one CSV plus one TOML manifest that
//! records the resolved config, the seeds and the crate version.

use crate::config::AppConfig;
use crate::error::{Result, UdmacError};
use crate::geometry::{scf_probability, Dimension, SceneGeometry, ScfQuery};
use crate::geometry::{scf_probability_1d, scf_probability_2d, scf_probability_3d};
use crate::markov::{nscf_from_positions, throughput, Quantize, ThroughputReport};
use crate::oracle::{dim_stream_seed, estimate_with_positions, sample_returning_positions, SamplerConfig};
use crate::sim::{compare, run, Protocol};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Where results land and how wide the worker pool is.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: AppConfig,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

impl RunContext {
    pub fn new(config: AppConfig, out_dir: PathBuf, jobs: usize) -> Self {
        RunContext { config, out_dir, jobs: jobs.max(1) }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| UdmacError::Config(format!("worker pool: {e}")))
    }

    fn write_outputs(
        &self,
        command: &str,
        header: &[&str],
        rows: &[Vec<String>],
        seeds: &[u64],
    ) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)?;
        let csv_path = self.out_dir.join(format!("{command}.csv"));
        let mut text = String::new();
        writeln!(text, "{}", header.join(",")).unwrap();
        for row in rows {
            writeln!(text, "{}", row.join(",")).unwrap();
        }
        let mut file = fs::File::create(&csv_path)?;
        file.write_all(text.as_bytes())?;

        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seeds,
            jobs: self.jobs,
            config: &self.config,
        };
        let manifest_path = self.out_dir.join(format!("{command}.manifest.toml"));
        fs::write(
            &manifest_path,
            toml::to_string_pretty(&manifest)
                .map_err(|e| UdmacError::Config(format!("manifest: {e}")))?,
        )?;
        Ok(csv_path)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seeds: &'a [u64],
    jobs: usize,
    config: &'a AppConfig,
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Deterministic uniform station placement over the valid activity range;
/// the analytic sweeps derive the courier population from these positions.
pub fn uniform_station_positions(scene: &SceneGeometry, n: u32) -> Vec<[f64; 3]> {
    let h = scene.height_km();
    let lo = scene.comm_range_km();
    match scene.dim() {
        Dimension::One => {
            let hi = scene.outer_extent_km();
            (0..n)
                .map(|i| [lo + (i as f64 + 0.5) * (hi - lo) / n as f64, 0.0, h])
                .collect()
        }
        Dimension::Two => {
            // area-uniform radii
            let hi2 = scene.outer_extent_km().powi(2);
            (0..n)
                .map(|i| {
                    let rho = (lo * lo + (i as f64 + 0.5) * (hi2 - lo * lo) / n as f64).sqrt();
                    [rho, 0.0, h]
                })
                .collect()
        }
        Dimension::Three => {
            // volume-uniform radii
            let hi3 = scene.radius_km().powi(3);
            (0..n)
                .map(|i| {
                    let rho =
                        (lo.powi(3) + (i as f64 + 0.5) * (hi3 - lo.powi(3)) / n as f64).cbrt();
                    [0.0, 0.0, rho]
                })
                .collect()
        }
    }
}

/// Oracle scatter position the closed form is evaluated against.
fn probe_position(scene: &SceneGeometry, d: f64) -> [f64; 3] {
    match scene.dim() {
        Dimension::One | Dimension::Two => {
            let h = scene.height_km();
            [(d * d - h * h).sqrt(), 0.0, h]
        }
        Dimension::Three => [0.0, 0.0, d],
    }
}

fn closed_form(scene: &SceneGeometry, d: f64, t: f64) -> Result<f64> {
    let q = ScfQuery::new(d, t);
    Ok(match scene.dim() {
        Dimension::One => scf_probability_1d(scene, &q)?,
        Dimension::Two => scf_probability_2d(scene, &q)?,
        Dimension::Three => scf_probability_3d(scene, &q)?,
    }
    .probability)
}

/// Closed form vs Monte Carlo over the (dim, d, t) grid, one scatter per
/// dimension, plus a max-error summary row per dimension.
pub fn run_validate_probability(ctx: &RunContext, dims: &[Dimension]) -> Result<PathBuf> {
    let cfg = &ctx.config;
    let seeds = vec![cfg.sweep.base_seed];
    let pool = ctx.pool()?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for &dim in dims {
        let scene = cfg.scene(dim)?;
        let sampler = SamplerConfig::new(
            scene,
            cfg.sweep.mc_points,
            dim_stream_seed(cfg.sweep.base_seed, dim),
        )?;
        let scatter = sample_returning_positions(&sampler);
        let grid: Vec<(f64, f64)> = cfg
            .sweep
            .d_grid_km
            .iter()
            .flat_map(|&d| cfg.sweep.t_grid_s.iter().map(move |&t| (d, t)))
            .collect();
        let point_rows: Vec<Result<(Vec<String>, f64)>> = pool.install(|| {
            grid.par_iter()
                .map(|&(d, t)| {
                    let p_closed = closed_form(&scene, d, t)?;
                    let est =
                        estimate_with_positions(&scene, probe_position(&scene, d), t, &scatter);
                    let abs_err = (p_closed - est.p_hat).abs();
                    Ok((
                        vec![
                            "point".into(),
                            dim.as_u8().to_string(),
                            fmt(d),
                            fmt(t),
                            fmt(p_closed),
                            fmt(est.p_hat),
                            fmt(est.stderr),
                            fmt(abs_err),
                        ],
                        abs_err,
                    ))
                })
                .collect()
        });
        let mut max_err = 0.0f64;
        for r in point_rows {
            let (row, err) = r?;
            max_err = max_err.max(err);
            rows.push(row);
        }
        rows.push(vec![
            "max_error".into(),
            dim.as_u8().to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            fmt(max_err),
        ]);
    }
    ctx.write_outputs(
        "validate_prob",
        &["kind", "dim", "d_km", "t_s", "p_closed_form", "p_mc", "stderr", "abs_error"],
        &rows,
        &seeds,
    )
}

/// Analytic + simulated throughput for both protocols across the waiting-time
/// sweep, with the improvement ratio per row.
pub fn run_throughput(ctx: &RunContext, dims: &[Dimension]) -> Result<PathBuf> {
    let cfg = &ctx.config;
    let seeds = cfg.seeds();
    let pool = ctx.pool()?;
    let mut points: Vec<(Dimension, f64, f64, u32, ThroughputReport)> = Vec::new();
    for &dim in dims {
        let scene = cfg.scene(dim)?;
        let positions = uniform_station_positions(&scene, cfg.population.n);
        for &t in &cfg.sweep.t_grid_s {
            let (real, quant) =
                nscf_from_positions(&scene, &positions, t, Quantize::Floor)?;
            let mix = crate::markov::PopulationMix::new(
                cfg.population.n,
                quant,
                real / cfg.population.n as f64,
            )?;
            let report = throughput(
                &cfg.backoff_params()?,
                &mix,
                &cfg.timing_params()?,
                &cfg.throughput_inputs()?,
            )?;
            points.push((dim, t, real, quant, report));
        }
    }
    let tasks: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let rows: Vec<Result<Vec<String>>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, seed)| {
                let (dim, t, real, quant, report) = &points[i];
                let base = cfg.sim_config(*quant, 0, Protocol::UdMac, seed)?;
                let cmp = compare(&base, &[seed])?.remove(0);
                Ok(vec![
                    dim.as_u8().to_string(),
                    fmt(*t),
                    fmt(*real),
                    quant.to_string(),
                    seed.to_string(),
                    fmt(report.s_total_bps),
                    fmt(report.s_scf_bps),
                    fmt(report.s_mh_bps),
                    fmt(cmp.udmac.throughput_bps),
                    fmt(cmp.udmac.scf.throughput_bps),
                    fmt(cmp.udmac.mh.throughput_bps),
                    fmt(cmp.vemac.throughput_bps),
                    fmt(cmp.improvement_ratio()),
                ])
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    ctx.write_outputs(
        "throughput",
        &[
            "dim",
            "t_s",
            "n_scf_real",
            "n_scf",
            "seed",
            "s_analytic_bps",
            "s_analytic_scf_bps",
            "s_analytic_mh_bps",
            "s_udmac_sim_bps",
            "s_udmac_scf_bps",
            "s_udmac_mh_bps",
            "s_vemac_sim_bps",
            "improvement_ratio",
        ],
        &rows,
        &seeds,
    )
}

/// Freeze-length tradeoff: per-(t, F, seed) totals and mode splits (1-D
/// courier populations).
pub fn run_freeze_tradeoff(ctx: &RunContext) -> Result<PathBuf> {
    let cfg = &ctx.config;
    let seeds = cfg.seeds();
    let pool = ctx.pool()?;
    let scene = cfg.scene(Dimension::One)?;
    let positions = uniform_station_positions(&scene, cfg.population.n);
    let mut points: Vec<(f64, u32, u32)> = Vec::new();
    for &t in &cfg.sweep.t_grid_s {
        let (_, quant) = nscf_from_positions(&scene, &positions, t, Quantize::Floor)?;
        for &f in &cfg.sweep.f_grid {
            points.push((t, f, quant));
        }
    }
    let tasks: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let rows: Vec<Result<Vec<String>>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, seed)| {
                let (t, f, quant) = points[i];
                let sim_cfg = cfg.sim_config(quant, f, Protocol::UdMac, seed)?;
                let stats = run(&sim_cfg)?;
                Ok(vec![
                    fmt(t),
                    f.to_string(),
                    quant.to_string(),
                    seed.to_string(),
                    fmt(stats.throughput_bps),
                    fmt(stats.scf.throughput_bps),
                    fmt(stats.mh.throughput_bps),
                    fmt(stats.mh_bit_share()),
                ])
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    ctx.write_outputs(
        "freeze_tradeoff",
        &[
            "t_s",
            "freeze_slots",
            "n_scf",
            "seed",
            "s_total_bps",
            "s_scf_bps",
            "s_mh_bps",
            "mh_bit_share",
        ],
        &rows,
        &seeds,
    )
}

/// Single-point simulation runs across the seed list.
pub fn run_sim(ctx: &RunContext, dim: Dimension, protocol: Protocol) -> Result<PathBuf> {
    let cfg = &ctx.config;
    let seeds = cfg.seeds();
    let pool = ctx.pool()?;
    let scene = cfg.scene(dim)?;
    let positions = uniform_station_positions(&scene, cfg.population.n);
    let (real, quant) =
        nscf_from_positions(&scene, &positions, cfg.sim.wait_s, Quantize::Floor)?;
    let rows: Vec<Result<Vec<String>>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let sim_cfg = cfg.sim_config(quant, cfg.sim.freeze_slots, protocol, seed)?;
                let stats = run(&sim_cfg)?;
                Ok(vec![
                    protocol.name().into(),
                    dim.as_u8().to_string(),
                    fmt(cfg.sim.wait_s),
                    fmt(real),
                    quant.to_string(),
                    seed.to_string(),
                    fmt(stats.sim_time_s),
                    stats.rounds.to_string(),
                    stats.idle_slots.to_string(),
                    stats.scf.handshakes.to_string(),
                    stats.mh.handshakes.to_string(),
                    stats.scf.collisions.to_string(),
                    stats.mh.collisions.to_string(),
                    (stats.scf.blocked + stats.mh.blocked).to_string(),
                    fmt(stats.scf.throughput_bps),
                    fmt(stats.mh.throughput_bps),
                    fmt(stats.throughput_bps),
                ])
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    ctx.write_outputs(
        "sim",
        &[
            "protocol",
            "dim",
            "t_s",
            "n_scf_real",
            "n_scf",
            "seed",
            "sim_time_s",
            "rounds",
            "idle_slots",
            "scf_handshakes",
            "mh_handshakes",
            "scf_collisions",
            "mh_collisions",
            "blocked",
            "s_scf_bps",
            "s_mh_bps",
            "s_total_bps",
        ],
        &rows,
        &seeds,
    )
}

/// Matched-seed protocol comparison across the waiting-time sweep.
pub fn run_compare(ctx: &RunContext, dims: &[Dimension]) -> Result<PathBuf> {
    let cfg = &ctx.config;
    let seeds = cfg.seeds();
    let pool = ctx.pool()?;
    let mut points: Vec<(Dimension, f64, u32)> = Vec::new();
    for &dim in dims {
        let scene = cfg.scene(dim)?;
        let positions = uniform_station_positions(&scene, cfg.population.n);
        for &t in &cfg.sweep.t_grid_s {
            let (_, quant) = nscf_from_positions(&scene, &positions, t, Quantize::Floor)?;
            points.push((dim, t, quant));
        }
    }
    let tasks: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|i| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let rows: Vec<Result<Vec<String>>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, seed)| {
                let (dim, t, quant) = points[i];
                let base = cfg.sim_config(quant, cfg.sim.freeze_slots, Protocol::UdMac, seed)?;
                let cmp = compare(&base, &[seed])?.remove(0);
                Ok(vec![
                    dim.as_u8().to_string(),
                    fmt(t),
                    quant.to_string(),
                    seed.to_string(),
                    fmt(cmp.udmac.throughput_bps),
                    fmt(cmp.udmac.scf.throughput_bps),
                    fmt(cmp.udmac.mh.throughput_bps),
                    fmt(cmp.vemac.throughput_bps),
                    fmt(cmp.vemac.scf.throughput_bps),
                    fmt(cmp.vemac.mh.throughput_bps),
                    fmt(cmp.improvement_ratio()),
                ])
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    ctx.write_outputs(
        "compare",
        &[
            "dim",
            "t_s",
            "n_scf",
            "seed",
            "s_udmac_bps",
            "s_udmac_scf_bps",
            "s_udmac_mh_bps",
            "s_vemac_bps",
            "s_vemac_scf_bps",
            "s_vemac_mh_bps",
            "improvement_ratio",
        ],
        &rows,
        &seeds,
    )
}

/// Read a CSV produced by this harness back into header + rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| UdmacError::Config(format!("{}: empty csv", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn small_ctx(dir: &Path) -> RunContext {
        let mut cfg = AppConfig::default();
        cfg.sweep.d_grid_km = vec![2.5];
        cfg.sweep.t_grid_s = vec![0.0, 300.0];
        cfg.sweep.mc_points = 20_000;
        cfg.sweep.seed_count = 2;
        cfg.sim.duration_s = 0.02;
        cfg.population.n = 30;
        RunContext::new(cfg, dir.to_path_buf(), 2)
    }

    #[test]
    fn placement_is_valid_and_uniform() {
        let cfg = AppConfig::default();
        for dim in [Dimension::One, Dimension::Two, Dimension::Three] {
            let scene = cfg.scene(dim).unwrap();
            let pos = uniform_station_positions(&scene, 100);
            assert_eq!(pos.len(), 100);
            for p in pos {
                // every placed station admits a probability evaluation
                scf_probability(&scene, p).unwrap();
            }
        }
    }

    #[test]
    fn validate_probability_writes_points_and_summaries() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = small_ctx(dir.path());
        let path = run_validate_probability(&ctx, &[Dimension::One, Dimension::Three]).unwrap();
        let (header, rows) = read_csv(&path).unwrap();
        assert_eq!(header[0], "kind");
        let points = rows.iter().filter(|r| r[0] == "point").count();
        let summaries = rows.iter().filter(|r| r[0] == "max_error").count();
        assert_eq!(points, 2 * 2); // 1 distance x 2 times x 2 dims
        assert_eq!(summaries, 2);
        assert!(dir.path().join("validate_prob.manifest.toml").exists());
    }

    #[test]
    fn csv_output_is_byte_stable_across_worker_counts() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut ctx_a = small_ctx(dir_a.path());
        let mut ctx_b = small_ctx(dir_b.path());
        ctx_a.jobs = 1;
        ctx_b.jobs = 4;
        let a = run_throughput(&ctx_a, &[Dimension::One]).unwrap();
        let b = run_throughput(&ctx_b, &[Dimension::One]).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn freeze_tradeoff_covers_the_grid() {
        let dir = tempfile::tempdir().unwrap();
        let mut ctx = small_ctx(dir.path());
        ctx.config.sweep.f_grid = vec![0, 50];
        ctx.config.sweep.t_grid_s = vec![300.0];
        let path = run_freeze_tradeoff(&ctx).unwrap();
        let (_, rows) = read_csv(&path).unwrap();
        // 1 time x 2 freezes x 2 seeds
        assert_eq!(rows.len(), 4);
    }
}
