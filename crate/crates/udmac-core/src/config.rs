//! Run configuration: a TOML file of nested sections, every field defaulting
//! to the built-in `paper-2023` preset, plus CLI-flag overrides on top.

use crate::error::{Result, UdmacError};
use crate::geometry::{Dimension, SceneGeometry};
use crate::markov::{BackoffParams, PopulationMix, ThroughputInputs, TimingParams};
use crate::sim::{ModeAssignment, Protocol, SimConfig};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_radius() -> f64 {
    5.0
}
fn default_comm_range() -> f64 {
    0.1
}
fn default_height() -> f64 {
    0.05
}
fn default_speed() -> f64 {
    18.0
}

/// Activity-space geometry, kilometres and km/h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSection {
    pub radius_km: f64,
    pub comm_range_km: f64,
    pub height_km: f64,
    pub speed_kmh: f64,
}

impl Default for SceneSection {
    fn default() -> Self {
        SceneSection {
            radius_km: default_radius(),
            comm_range_km: default_comm_range(),
            height_km: default_height(),
            speed_kmh: default_speed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackoffSection {
    pub cw_min: u32,
    pub max_stage: u32,
    pub p_hp: f64,
}

impl Default for BackoffSection {
    fn default() -> Self {
        BackoffSection { cw_min: 16, max_stage: 6, p_hp: 1.0 }
    }
}

/// Control-channel timing, microseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingSection {
    pub rts: f64,
    pub cts: f64,
    pub rcts: f64,
    pub sifs: f64,
    pub difs: f64,
    pub sigma: f64,
}

impl Default for TimingSection {
    fn default() -> Self {
        TimingSection { rts: 4.5, cts: 3.2, rcts: 3.2, sifs: 10.0, difs: 28.0, sigma: 9.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelsSection {
    pub data_channels: u32,
    pub rate_bps: f64,
    pub a2a: u32,
    pub a2g: u32,
}

impl Default for ChannelsSection {
    fn default() -> Self {
        ChannelsSection { data_channels: 13, rate_bps: 36e6, a2a: 6, a2g: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficSection {
    pub payload_bits: f64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        TrafficSection { payload_bits: 27_000.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationSection {
    /// Stations within two hops.
    pub n: u32,
}

impl Default for PopulationSection {
    fn default() -> Self {
        PopulationSection { n: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub duration_s: f64,
    pub freeze_slots: u32,
    /// Waiting time used by the single-point `sim` command to derive the
    /// courier population.
    pub wait_s: f64,
    /// fixed-split | bernoulli
    pub mode_assignment: String,
    pub vemac_frame_slots: u32,
    pub vemac_guard_us: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            duration_s: 0.3,
            freeze_slots: 0,
            wait_s: 480.0,
            mode_assignment: "fixed-split".into(),
            vemac_frame_slots: 100,
            vemac_guard_us: 9.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub dims: Vec<u8>,
    pub d_grid_km: Vec<f64>,
    pub t_grid_s: Vec<f64>,
    pub f_grid: Vec<u32>,
    pub base_seed: u64,
    pub seed_count: u32,
    pub mc_points: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            dims: vec![1, 2, 3],
            d_grid_km: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5],
            // reconstruction of the experiment grid; the source material does
            // not state the exact waiting-time grid
            t_grid_s: vec![0.0, 60.0, 120.0, 180.0, 240.0, 300.0, 360.0, 420.0, 480.0, 540.0, 600.0],
            f_grid: vec![0, 25, 50, 100],
            base_seed: 1,
            seed_count: 10,
            mc_points: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppConfig {
    pub scene: SceneSection,
    pub backoff: BackoffSection,
    pub timing_us: TimingSection,
    pub channels: ChannelsSection,
    pub traffic: TrafficSection,
    pub population: PopulationSection,
    pub sim: SimSection,
    pub sweep: SweepSection,
}

impl AppConfig {
    /// Built-in presets. `paper-2023` carries the published constants.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-2023" => Ok(AppConfig::default()),
            other => Err(UdmacError::Config(format!(
                "unknown preset '{other}' (available: paper-2023)"
            ))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| UdmacError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn scene(&self, dim: Dimension) -> Result<SceneGeometry> {
        SceneGeometry::new(
            dim,
            self.scene.radius_km,
            self.scene.comm_range_km,
            self.scene.height_km,
            self.scene.speed_kmh,
        )
    }

    pub fn backoff_params(&self) -> Result<BackoffParams> {
        BackoffParams::new(self.backoff.cw_min, self.backoff.max_stage, self.backoff.p_hp)
    }

    pub fn timing_params(&self) -> Result<TimingParams> {
        TimingParams::new(
            self.timing_us.rts,
            self.timing_us.cts,
            self.timing_us.rcts,
            self.timing_us.sifs,
            self.timing_us.difs,
            self.timing_us.sigma,
        )
    }

    pub fn throughput_inputs(&self) -> Result<ThroughputInputs> {
        ThroughputInputs::new(
            self.traffic.payload_bits,
            self.channels.data_channels,
            self.channels.rate_bps,
        )
    }

    pub fn mode_assignment(&self, p_scf: f64) -> Result<ModeAssignment> {
        match self.sim.mode_assignment.as_str() {
            "fixed-split" => Ok(ModeAssignment::FixedSplit),
            "bernoulli" => Ok(ModeAssignment::Bernoulli(p_scf)),
            other => Err(UdmacError::Config(format!(
                "unknown mode assignment '{other}' (fixed-split | bernoulli)"
            ))),
        }
    }

    pub fn sweep_dims(&self) -> Result<Vec<Dimension>> {
        self.sweep.dims.iter().map(|&d| Dimension::from_u8(d)).collect()
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.sweep.seed_count as u64).map(|i| self.sweep.base_seed.wrapping_add(i)).collect()
    }

    /// Simulation scenario for one sweep point.
    pub fn sim_config(
        &self,
        n_scf: u32,
        freeze_slots: u32,
        protocol: Protocol,
        seed: u64,
    ) -> Result<SimConfig> {
        let n = self.population.n;
        let p_scf = if n > 0 { n_scf as f64 / n as f64 } else { 0.0 };
        let cfg = SimConfig {
            mix: PopulationMix::new(n, n_scf, p_scf)?,
            backoff: self.backoff_params()?,
            timing: self.timing_params()?,
            tin: self.throughput_inputs()?,
            freeze_slots,
            mode_assignment: self.mode_assignment(p_scf)?,
            duration_s: self.sim.duration_s,
            seed,
            protocol,
            vemac_frame_slots: self.sim.vemac_frame_slots,
            vemac_guard_us: self.sim.vemac_guard_us,
            a2a_channels: self.channels.a2a,
            a2g_channels: self.channels.a2g,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Full cross-section validation, run once per CLI invocation. Rejects
    /// payloads that violate the multi-channel admissibility bound.
    pub fn validate(&self) -> Result<()> {
        for &d in &self.sweep.dims {
            let dim = Dimension::from_u8(d)?;
            let scene = self.scene(dim)?;
            for &dist in &self.sweep.d_grid_km {
                scene.case_boundary_time(dist).map_err(|e| {
                    UdmacError::Config(format!("d-grid point {dist} is invalid: {e}"))
                })?;
            }
        }
        if self.sweep.d_grid_km.is_empty() {
            return Err(UdmacError::Config("d-grid must not be empty".into()));
        }
        if self.sweep.t_grid_s.is_empty() {
            return Err(UdmacError::Config("t-grid must not be empty".into()));
        }
        if self.sweep.t_grid_s.iter().any(|t| *t < 0.0) {
            return Err(UdmacError::Config("t-grid times must be >= 0".into()));
        }
        if self.sweep.seed_count == 0 {
            return Err(UdmacError::Config("seed_count must be >= 1".into()));
        }
        if self.sweep.mc_points == 0 {
            return Err(UdmacError::Config("mc_points must be >= 1".into()));
        }
        self.backoff_params()?;
        let timing = self.timing_params()?;
        let tin = self.throughput_inputs()?;
        tin.validate_against(&timing)?;
        if self.channels.a2a + self.channels.a2g != self.channels.data_channels {
            return Err(UdmacError::Config(format!(
                "channel split {} + {} does not cover the {} data channels",
                self.channels.a2a, self.channels.a2g, self.channels.data_channels
            )));
        }
        self.mode_assignment(0.0)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_carries_the_published_constants() {
        let cfg = AppConfig::preset("paper-2023").unwrap();
        assert_eq!(cfg.scene.radius_km, 5.0);
        assert_eq!(cfg.scene.comm_range_km, 0.1);
        assert_eq!(cfg.scene.speed_kmh, 18.0);
        assert_eq!(cfg.channels.data_channels, 13);
        assert_eq!(cfg.channels.rate_bps, 36e6);
        assert_eq!(cfg.traffic.payload_bits, 27_000.0);
        assert_eq!(cfg.population.n, 100);
        let timing = cfg.timing_params().unwrap();
        assert!((timing.t_success_us() - 58.9).abs() < 1e-12);
        assert!((timing.t_collision_us() - 32.5).abs() < 1e-12);
        assert!(cfg.validate().is_ok());
        assert!(AppConfig::preset("paper-2024").is_err());
    }

    #[test]
    fn partial_files_inherit_preset_defaults() {
        let cfg: AppConfig = toml::from_str("[population]\nn = 40\n").unwrap();
        assert_eq!(cfg.population.n, 40);
        assert_eq!(cfg.scene.radius_km, 5.0);
        let bad: std::result::Result<AppConfig, _> = toml::from_str("[population]\nm = 40\n");
        assert!(bad.is_err(), "unknown keys are rejected");
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = AppConfig::default();
        let text = cfg.to_toml();
        let back: AppConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn admissibility_violations_are_rejected_by_name() {
        let mut cfg = AppConfig::default();
        cfg.traffic.payload_bits = 28_000.0;
        match cfg.validate() {
            Err(UdmacError::PayloadBound { payload_bits, .. }) => {
                assert_eq!(payload_bits, 28_000.0)
            }
            other => panic!("expected PayloadBound, got {other:?}"),
        }
    }

    #[test]
    fn grid_validation_catches_bad_points() {
        let mut cfg = AppConfig::default();
        cfg.sweep.d_grid_km = vec![0.05]; // inside the communication range
        assert!(cfg.validate().is_err());
        let mut cfg = AppConfig::default();
        cfg.sweep.t_grid_s.clear();
        assert!(cfg.validate().is_err());
    }
}
