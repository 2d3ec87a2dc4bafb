//! Seeded, slot-accurate simulators of the two protocols.
//!
//! Both simulators advance in renewal units: the contention simulator in
//! idle slots and busy handshake periods, the slotted baseline in fixed data
//! slots. Runs are deterministic per `(config, seed)`; independent seeds can
//! execute concurrently.

mod udmac;
mod vemac;

pub use udmac::run_udmac;
pub use vemac::run_vemac;

use crate::error::{Result, UdmacError};
use crate::markov::{BackoffParams, PopulationMix, ThroughputInputs, TimingParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    UdMac,
    VeMac,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::UdMac => "ud-mac",
            Protocol::VeMac => "vemac",
        }
    }
}

/// How stations are split between courier and relay mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeAssignment {
    /// The first `n_scf` stations are couriers for the whole run (and a
    /// courier re-enters courier mode after its freeze). Used for the
    /// analytic-agreement experiments.
    FixedSplit,
    /// Each station draws its mode from Bernoulli(p) at start-up and again
    /// whenever it leaves a freeze.
    Bernoulli(f64),
}

/// Full scenario for one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub mix: PopulationMix,
    pub backoff: BackoffParams,
    pub timing: TimingParams,
    pub tin: ThroughputInputs,
    /// Freeze extension after a successful courier handshake, in empty-slot
    /// units of simulated time (the freeze always spans at least the
    /// contention round that follows the success).
    pub freeze_slots: u32,
    pub mode_assignment: ModeAssignment,
    pub duration_s: f64,
    pub seed: u64,
    pub protocol: Protocol,
    /// Slotted-baseline frame length L.
    pub vemac_frame_slots: u32,
    /// Guard time appended to each baseline data slot.
    pub vemac_guard_us: f64,
    /// Air-to-air / air-to-ground split of the data channels.
    pub a2a_channels: u32,
    pub a2g_channels: u32,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0) {
            return Err(UdmacError::Config("duration must be positive".into()));
        }
        if self.backoff.p_hp != 1.0 {
            return Err(UdmacError::Config(
                "the simulator models saturation only (p_hp = 1)".into(),
            ));
        }
        if let ModeAssignment::Bernoulli(p) = self.mode_assignment {
            if !(0.0..=1.0).contains(&p) {
                return Err(UdmacError::Config(format!("Bernoulli p must be in [0, 1] (got {p})")));
            }
        }
        if self.a2a_channels + self.a2g_channels != self.tin.data_channels {
            return Err(UdmacError::Config(format!(
                "channel split {} + {} does not cover the {} data channels",
                self.a2a_channels, self.a2g_channels, self.tin.data_channels
            )));
        }
        if self.vemac_frame_slots == 0 {
            return Err(UdmacError::Config("vemac_frame_slots must be >= 1".into()));
        }
        if !(self.vemac_guard_us >= 0.0) {
            return Err(UdmacError::Config("vemac_guard_us must be >= 0".into()));
        }
        Ok(())
    }

    /// Baseline slot length: one payload at the aggregate data rate plus the
    /// guard.
    pub fn vemac_slot_us(&self) -> f64 {
        self.tin.payload_bits / (self.tin.data_channels as f64 * self.tin.rate_bps) * 1e6
            + self.vemac_guard_us
    }
}

/// Initial courier/relay assignment, shared by both simulators so matcheddice
/// seeds see matched populations.
pub(crate) fn assign_modes(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Vec<bool> {
    match cfg.mode_assignment {
        ModeAssignment::FixedSplit => {
            (0..cfg.mix.n).map(|i| i < cfg.mix.n_scf).collect()
        }
        ModeAssignment::Bernoulli(p) => {
            (0..cfg.mix.n).map(|_| rng.gen::<f64>() < p).collect()
        }
    }
}

/// Per-mode outcome counters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeStats {
    pub handshakes: u64,
    pub collisions: u64,
    pub delivered_bits: f64,
    /// Successful handshakes that found every data channel busy.
    pub blocked: u64,
    pub throughput_bps: f64,
}

/// Slot-accurate outcome of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimStats {
    pub protocol: Protocol,
    pub seed: u64,
    pub sim_time_s: f64,
    pub rounds: u64,
    pub idle_slots: u64,
    pub idle_time_us: f64,
    pub success_time_us: f64,
    pub collision_time_us: f64,
    pub scf: ModeStats,
    pub mh: ModeStats,
    pub throughput_bps: f64,
}

impl SimStats {
    pub fn busy_time_us(&self) -> f64 {
        self.success_time_us + self.collision_time_us
    }

    /// Fraction of delivered bits carried by relay mode.
    pub fn mh_bit_share(&self) -> f64 {
        let total = self.scf.delivered_bits + self.mh.delivered_bits;
        if total > 0.0 {
            self.mh.delivered_bits / total
        } else {
            0.0
        }
    }
}

/// Run the configured protocol.
pub fn run(cfg: &SimConfig) -> Result<SimStats> {
    match cfg.protocol {
        Protocol::UdMac => run_udmac(cfg),
        Protocol::VeMac => run_vemac(cfg),
    }
}

/// Matched-seed comparison row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolComparison {
    pub seed: u64,
    pub udmac: SimStats,
    pub vemac: SimStats,
}

impl ProtocolComparison {
    pub fn improvement_ratio(&self) -> f64 {
        self.udmac.throughput_bps / self.vemac.throughput_bps
    }
}

/// Run both protocols on matched seeds and populations.
pub fn compare(cfg: &SimConfig, seeds: &[u64]) -> Result<Vec<ProtocolComparison>> {
    seeds
        .iter()
        .map(|&seed| {
            let mut ud = *cfg;
            ud.seed = seed;
            ud.protocol = Protocol::UdMac;
            let mut ve = ud;
            ve.protocol = Protocol::VeMac;
            Ok(ProtocolComparison { seed, udmac: run_udmac(&ud)?, vemac: run_vemac(&ve)? })
        })
        .collect()
}

#[cfg(test)]
pub(crate) fn test_config(n: u32, n_scf: u32, duration_s: f64, seed: u64) -> SimConfig {
    SimConfig {
        mix: PopulationMix::new(n, n_scf, if n > 0 { n_scf as f64 / n as f64 } else { 0.0 })
            .unwrap(),
        backoff: BackoffParams::new(16, 6, 1.0).unwrap(),
        timing: TimingParams::new(4.5, 3.2, 3.2, 10.0, 28.0, 9.0).unwrap(),
        tin: ThroughputInputs::new(27_000.0, 13, 36e6).unwrap(),
        freeze_slots: 0,
        mode_assignment: ModeAssignment::FixedSplit,
        duration_s,
        seed,
        protocol: Protocol::UdMac,
        vemac_frame_slots: 100,
        vemac_guard_us: 9.0,
        a2a_channels: 6,
        a2g_channels: 7,
    }
}
