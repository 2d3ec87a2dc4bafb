//! Monte Carlo cross-check of the closed-form encounter probabilities.
//!
//! Courier positions are scattered uniformly over the activity space (minus
//! the GU exclusion), each courier flies straight toward the GU, and a scatter
//! point counts as a hit when that inbound path passes within communication
//! range of the queried UAV inside the travel budget `v*t`. The hit ratio
//! estimates the same probability the closed forms compute.
//!
//! Streams are split per dimension with [`dim_stream_seed`] so a sweep can
//! reuse one scatter per dimension and stay reproducible across platforms
//! (ChaCha8 keyed by a 64-bit seed).

use crate::error::{Result, UdmacError};
use crate::geometry::{Dimension, SceneGeometry};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Scatter configuration. 100 000 points mirrors the validation experiments.
#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    pub num_points: usize,
    pub seed: u64,
    pub scene: SceneGeometry,
}

impl SamplerConfig {
    pub fn new(scene: SceneGeometry, num_points: usize, seed: u64) -> Result<Self> {
        if num_points == 0 {
            return Err(UdmacError::Config("num_points must be >= 1".into()));
        }
        Ok(SamplerConfig { num_points, seed, scene })
    }
}

/// Binomial estimate of one encounter probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    /// sqrt(p_hat * (1 - p_hat) / n)
    pub stderr: f64,
    pub hits: u64,
    pub n: u64,
}

/// Derive the per-dimension scatter stream from a base seed.
pub fn dim_stream_seed(seed: u64, dim: Dimension) -> u64 {
    seed.wrapping_add(dim.as_u8() as u64)
}

/// Uniform scatter over the activity space, excluding the GU range.
///
/// 1-D: both segments `|x| in (sqrt(r^2-H^2), sqrt(R^2-H^2)]` at height H.
/// 2-D: the annulus between the same in-plane radii at height H.
/// 3-D: the hemispherical shell `r < |p| <= R`, `z >= 0`.
pub fn sample_returning_positions(cfg: &SamplerConfig) -> Vec<[f64; 3]> {
    let scene = &cfg.scene;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.num_points);
    match scene.dim() {
        Dimension::One => {
            let (lo, hi) = (scene.inner_extent_km(), scene.outer_extent_km());
            for _ in 0..cfg.num_points {
                let x = lo + rng.gen::<f64>() * (hi - lo);
                let side = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                out.push([side * x, 0.0, scene.height_km()]);
            }
        }
        Dimension::Two => {
            let (lo2, hi2) = (
                scene.inner_extent_km().powi(2),
                scene.outer_extent_km().powi(2),
            );
            for _ in 0..cfg.num_points {
                let rho = (lo2 + rng.gen::<f64>() * (hi2 - lo2)).sqrt();
                let phi = rng.gen::<f64>() * std::f64::consts::TAU;
                out.push([rho * phi.cos(), rho * phi.sin(), scene.height_km()]);
            }
        }
        Dimension::Three => {
            let (lo3, hi3) = (scene.comm_range_km().powi(3), scene.radius_km().powi(3));
            for _ in 0..cfg.num_points {
                let rho = (lo3 + rng.gen::<f64>() * (hi3 - lo3)).cbrt();
                let cos_polar = rng.gen::<f64>(); // upper hemisphere
                let phi = rng.gen::<f64>() * std::f64::consts::TAU;
                let s = (1.0 - cos_polar * cos_polar).sqrt();
                out.push([rho * s * phi.cos(), rho * s * phi.sin(), rho * cos_polar]);
            }
        }
    }
    out
}

/// Point the courier flies toward: the GU for 3-D, the point above the GU for
/// the planar spaces.
fn inbound_target(scene: &SceneGeometry) -> [f64; 3] {
    match scene.dim() {
        Dimension::One | Dimension::Two => [0.0, 0.0, scene.height_km()],
        Dimension::Three => [0.0, 0.0, 0.0],
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Exact distance from `p` to the segment `a -> b` (no stepping).
fn point_segment_distance(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1] + ab[2] * ab[2];
    if len2 == 0.0 {
        return norm(ap);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1] + ap[2] * ab[2]) / len2).clamp(0.0, 1.0);
    norm([ap[0] - t * ab[0], ap[1] - t * ab[1], ap[2] - t * ab[2]])
}

/// True when a courier starting at `returning` comes within communication
/// range of `uav` while flying straight toward the GU for at most `v*t`.
pub fn encounters_within(
    scene: &SceneGeometry,
    uav: [f64; 3],
    returning: [f64; 3],
    wait_s: f64,
) -> bool {
    let target = inbound_target(scene);
    let offset = sub(returning, target);
    let dist_to_target = norm(offset);
    let travel = (scene.speed_kms() * wait_s).min(dist_to_target);
    let end = if dist_to_target == 0.0 {
        returning
    } else {
        let k = (dist_to_target - travel) / dist_to_target;
        [
            target[0] + offset[0] * k,
            target[1] + offset[1] * k,
            target[2] + offset[2] * k,
        ]
    };
    point_segment_distance(uav, returning, end) <= scene.comm_range_km()
}

/// Estimate from a pre-drawn scatter (one scatter serves a whole sweep).
pub fn estimate_with_positions(
    scene: &SceneGeometry,
    uav: [f64; 3],
    wait_s: f64,
    positions: &[[f64; 3]],
) -> McEstimate {
    let hits = positions
        .iter()
        .filter(|p| encounters_within(scene, uav, **p, wait_s))
        .count() as u64;
    let n = positions.len() as u64;
    let p_hat = hits as f64 / n as f64;
    McEstimate {
        p_hat,
        stderr: (p_hat * (1.0 - p_hat) / n as f64).sqrt(),
        hits,
        n,
    }
}

/// Scatter per the configuration, then estimate. Deterministic per seed.
pub fn estimate_scf_probability(
    scene: &SceneGeometry,
    uav: [f64; 3],
    wait_s: f64,
    cfg: &SamplerConfig,
) -> McEstimate {
    let positions = sample_returning_positions(cfg);
    estimate_with_positions(scene, uav, wait_s, &positions)
}
