//! Two-priority saturation-throughput model of the contention protocol.
//!
//! Stations run binary exponential backoff on a shared control channel.
//! Courier-mode (SCF) stations get strict priority through a shorter
//! inter-frame wait, so they only collide with each other; relay-mode (MH)
//! stations collide with each other only in rounds the couriers leave silent.
//! After a successful courier handshake the station passes through a
//! semi-active freeze state before contending again.
//!
//! The per-round transmission probability `tau` of a class follows from the
//! stationary distribution of the backoff chain. That distribution is coupled
//! to the conditional collision probability of the class, so each class is a
//! scalar fixed point; the courier class is solved first and feeds the relay
//! class. Throughput then follows from the renewal structure of idle slots,
//! successful handshakes and collisions.

use crate::error::{Result, UdmacError};
use crate::geometry::{scf_probability, SceneGeometry};

/// Exponential-backoff parameters. Stage `i` draws its counter uniformly from
/// `[0, 2^i * W - 1]`, capped at stage `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffParams {
    /// Minimum contention window W (the window size, counter range `[0, W-1]`).
    pub cw_min: u32,
    /// Maximum backoff stage m.
    pub max_stage: u32,
    /// Probability that a station holds a packet. Saturation sets this to 1.
    pub p_hp: f64,
}

impl BackoffParams {
    pub fn new(cw_min: u32, max_stage: u32, p_hp: f64) -> Result<Self> {
        if cw_min < 1 {
            return Err(UdmacError::Config("cw_min must be >= 1".into()));
        }
        if !(p_hp > 0.0 && p_hp <= 1.0) {
            return Err(UdmacError::Config(format!("p_hp must be in (0, 1] (got {p_hp})")));
        }
        // 2^m * W must stay inside u32 for the simulator's counter draws.
        if (max_stage as u64) > 20 || (cw_min as u64) << max_stage > u32::MAX as u64 {
            return Err(UdmacError::Config("2^max_stage * cw_min is too large".into()));
        }
        Ok(BackoffParams { cw_min, max_stage, p_hp })
    }

    /// Window size at stage `i`.
    pub fn window(&self, stage: u32) -> u32 {
        self.cw_min << stage.min(self.max_stage)
    }
}

/// Station population split into courier (SCF) and relay (MH) classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationMix {
    /// Stations within two hops.
    pub n: u32,
    /// Stations currently in courier mode (already quantized).
    pub n_scf: u32,
    /// Probability weight of the courier mode in the chain (the semi-active
    /// state only exists for courier transmissions).
    pub p_scf: f64,
}

impl PopulationMix {
    pub fn new(n: u32, n_scf: u32, p_scf: f64) -> Result<Self> {
        if n_scf > n {
            return Err(UdmacError::Config(format!("n_scf = {n_scf} exceeds n = {n}")));
        }
        if !(0.0..=1.0).contains(&p_scf) {
            return Err(UdmacError::Config(format!("p_scf must be in [0, 1] (got {p_scf})")));
        }
        Ok(PopulationMix { n, n_scf, p_scf })
    }

    pub fn p_mh(&self) -> f64 {
        1.0 - self.p_scf
    }

    pub fn n_mh(&self) -> u32 {
        self.n - self.n_scf
    }
}

/// Sum over the backoff grid of the stationary chain, as a multiple of the
/// base state probability `b_00`.
///
/// The textbook closed form divides by `(1 - 2 pc)`, which is a removable
/// singularity at `pc = 1/2`; expanding `1 - (2 pc)^m` as a geometric series
/// cancels it, so this form is valid on the whole of `[0, 1)`.
fn grid_sum_over_b00(pc: f64, bp: &BackoffParams) -> f64 {
    let w = bp.cw_min as f64;
    let mut series = 0.0;
    let mut pow = 1.0;
    for _ in 0..bp.max_stage {
        series += pow;
        pow *= 2.0 * pc;
    }
    ((w + 1.0) + pc * w * series) / (2.0 * (1.0 - pc))
}

/// Per-round transmission probability of a station whose conditional collision
/// probability is `pc`, with the semi-active state weighted by `p_scf`.
///
/// Derived by eliminating `b_00` between the normalization condition and
/// `tau = b_00 / (1 - pc)`; the freeze state is entered only after a
/// successful transmission, so it contributes `p_scf * b_00` to the
/// normalization.
pub fn tau_from_pc(pc: f64, bp: &BackoffParams, p_scf: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&pc) {
        return Err(UdmacError::Config(format!("collision probability must be in [0, 1) (got {pc})")));
    }
    if !(0.0..=1.0).contains(&p_scf) {
        return Err(UdmacError::Config(format!("p_scf must be in [0, 1] (got {p_scf})")));
    }
    let b00 = ((2.0 * bp.p_hp - 1.0) / bp.p_hp) / (grid_sum_over_b00(pc, bp) + p_scf);
    Ok(b00 / (1.0 - pc))
}

/// Stationary probabilities of the backoff chain, enumerated state by state.
/// Used as an internal consistency check of the closed forms.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pub b_00: f64,
    /// `b_ik[i][k]` for stage `i`, counter `k in [0, W_i - 1]`.
    pub b_ik: Vec<Vec<f64>>,
    pub b_idle: f64,
    pub b_semiactive: f64,
}

impl StationaryDistribution {
    pub fn total(&self) -> f64 {
        self.b_ik.iter().flatten().sum::<f64>() + self.b_idle + self.b_semiactive
    }

    pub fn tau(&self) -> f64 {
        self.b_ik.iter().map(|row| row[0]).sum()
    }
}

/// Enumerate the full stationary distribution for the given collision
/// probability.
pub fn stationary_distribution(
    pc: f64,
    bp: &BackoffParams,
    p_scf: f64,
) -> Result<StationaryDistribution> {
    if !(0.0..1.0).contains(&pc) {
        return Err(UdmacError::Config(format!("collision probability must be in [0, 1) (got {pc})")));
    }
    let b00 = ((2.0 * bp.p_hp - 1.0) / bp.p_hp) / (grid_sum_over_b00(pc, bp) + p_scf);
    let m = bp.max_stage as usize;
    let mut b_ik = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let head = if i < m {
            pc.powi(i as i32) * b00
        } else {
            pc.powi(m as i32) / (1.0 - pc) * b00
        };
        let w = bp.window(i as u32) as f64;
        let row: Vec<f64> = (0..bp.window(i as u32)).map(|k| (w - k as f64) / w * head).collect();
        b_ik.push(row);
    }
    Ok(StationaryDistribution {
        b_00: b00,
        b_ik,
        b_idle: (1.0 - bp.p_hp) / bp.p_hp,
        b_semiactive: p_scf * b00,
    })
}

/// Solution of one class fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassSolution {
    pub tau: f64,
    pub p_c: f64,
    /// Contender count behind the solution; zero marks an empty class.
    pub contenders: u32,
    pub residual: f64,
}

const SOLVER_TOL: f64 = 1e-12;
const PICARD_CAP: u64 = 100_000;

/// Bracketing bisection on the collision probability, with a damped Picard
/// fallback. `target(pc)` must be decreasing minus identity.
fn solve_collision_fixed_point(target: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-15);
    let g = |pc: f64| target(pc) - pc;
    if g(lo) >= 0.0 && g(hi) <= 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let pc = 0.5 * (lo + hi);
        let residual = (target(pc) - pc).abs();
        if residual <= SOLVER_TOL {
            return Ok((pc, residual));
        }
    }
    // Bracket failed or bisection left residual above tolerance: damped Picard.
    let mut pc = 0.5;
    let mut residual = f64::INFINITY;
    for it in 0..PICARD_CAP {
        let next = 0.5 * pc + 0.5 * target(pc);
        residual = (next - pc).abs();
        pc = next;
        if residual <= SOLVER_TOL {
            return Ok((pc, residual));
        }
        if !pc.is_finite() {
            return Err(UdmacError::NoConvergence { iterations: it, residual: f64::NAN });
        }
    }
    Err(UdmacError::NoConvergence { iterations: PICARD_CAP, residual })
}

/// Fixed point of the courier class: a courier transmission collides when
/// another of the `n_scf` couriers transmits in the same round.
pub fn solve_scf_class(bp: &BackoffParams, mix: &PopulationMix) -> Result<ClassSolution> {
    let ns = mix.n_scf;
    if ns == 0 {
        return Ok(ClassSolution { tau: 0.0, p_c: 0.0, contenders: 0, residual: 0.0 });
    }
    if ns == 1 {
        return Ok(ClassSolution {
            tau: tau_from_pc(0.0, bp, 1.0)?,
            p_c: 0.0,
            contenders: 1,
            residual: 0.0,
        });
    }
    let bp = *bp;
    let target = move |pc: f64| {
        let tau = tau_from_pc(pc, &bp, 1.0).unwrap_or(0.0);
        1.0 - (1.0 - tau).powi(ns as i32 - 1)
    };
    let (p_c, residual) = solve_collision_fixed_point(target)?;
    Ok(ClassSolution { tau: tau_from_pc(p_c, &bp, 1.0)?, p_c, contenders: ns, residual })
}

/// Fixed point of the relay class, given the solved courier class: a relay
/// transmission collides when every courier is silent and another relay
/// transmits. The relay chain has no semi-active state.
pub fn solve_mh_class(
    bp: &BackoffParams,
    mix: &PopulationMix,
    tau_scf: f64,
) -> Result<ClassSolution> {
    let nm = mix.n_mh();
    if nm == 0 {
        return Ok(ClassSolution { tau: 0.0, p_c: 0.0, contenders: 0, residual: 0.0 });
    }
    if nm == 1 {
        // the product form collapses to exactly zero collisions
        return Ok(ClassSolution {
            tau: tau_from_pc(0.0, bp, 0.0)?,
            p_c: 0.0,
            contenders: 1,
            residual: 0.0,
        });
    }
    let scf_silent = (1.0 - tau_scf).powi(mix.n_scf as i32);
    let bp = *bp;
    let target = move |pc: f64| {
        let tau = tau_from_pc(pc, &bp, 0.0).unwrap_or(0.0);
        scf_silent * (1.0 - (1.0 - tau).powi(nm as i32 - 1))
    };
    let (p_c, residual) = solve_collision_fixed_point(target)?;
    Ok(ClassSolution { tau: tau_from_pc(p_c, &bp, 0.0)?, p_c, contenders: nm, residual })
}

/// Both class fixed points together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSolution {
    pub tau_scf: f64,
    pub tau_mh: f64,
    pub p_c1: f64,
    pub p_c2: f64,
    /// Larger of the two class residuals.
    pub residual: f64,
}

pub fn solve_fixed_points(bp: &BackoffParams, mix: &PopulationMix) -> Result<FixedPointSolution> {
    let scf = solve_scf_class(bp, mix)?;
    let mh = solve_mh_class(bp, mix, scf.tau)?;
    Ok(FixedPointSolution {
        tau_scf: scf.tau,
        tau_mh: mh.tau,
        p_c1: scf.p_c,
        p_c2: mh.p_c,
        residual: scf.residual.max(mh.residual),
    })
}

/// Control-channel timing, microseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingParams {
    pub rts_us: f64,
    pub cts_us: f64,
    pub rcts_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    /// Empty-slot duration sigma.
    pub sigma_us: f64,
}

impl TimingParams {
    pub fn new(
        rts_us: f64,
        cts_us: f64,
        rcts_us: f64,
        sifs_us: f64,
        difs_us: f64,
        sigma_us: f64,
    ) -> Result<Self> {
        let all = [rts_us, cts_us, rcts_us, sifs_us, difs_us, sigma_us];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(UdmacError::Config("timing durations must be positive".into()));
        }
        if difs_us <= sifs_us {
            // the priority scheme needs the relay wait to be strictly longer
            return Err(UdmacError::Config(format!(
                "DIFS must exceed SIFS (DIFS = {difs_us}, SIFS = {sifs_us})"
            )));
        }
        Ok(TimingParams { rts_us, cts_us, rcts_us, sifs_us, difs_us, sigma_us })
    }

    /// Channel-busy time of a successful handshake.
    pub fn t_success_us(&self) -> f64 {
        self.rts_us + self.sifs_us + self.cts_us + self.sifs_us + self.rcts_us + self.difs_us
    }

    /// Channel-busy time of a collision.
    pub fn t_collision_us(&self) -> f64 {
        self.rts_us + self.difs_us
    }
}

/// Payload and data-plane capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputInputs {
    /// Mean packet payload E[P], bits.
    pub payload_bits: f64,
    /// Number of data channels M.
    pub data_channels: u32,
    /// Per-channel transmission rate, bits/s.
    pub rate_bps: f64,
}

impl ThroughputInputs {
    pub fn new(payload_bits: f64, data_channels: u32, rate_bps: f64) -> Result<Self> {
        if payload_bits <= 0.0 || rate_bps <= 0.0 || data_channels == 0 {
            return Err(UdmacError::Config("payload, rate and channel count must be positive".into()));
        }
        Ok(ThroughputInputs { payload_bits, data_channels, rate_bps })
    }

    /// Admissibility: one handshake time must buy enough aggregate capacity
    /// to drain one payload, otherwise data channels saturate.
    pub fn admissibility_bound_bits(&self, timing: &TimingParams) -> f64 {
        timing.t_success_us() * 1e-6 * self.data_channels as f64 * self.rate_bps
    }

    pub fn validate_against(&self, timing: &TimingParams) -> Result<()> {
        let bound = self.admissibility_bound_bits(timing);
        if self.payload_bits > bound {
            return Err(UdmacError::PayloadBound {
                payload_bits: self.payload_bits,
                bound_bits: bound,
            });
        }
        Ok(())
    }
}

/// Analytic saturation throughput and its per-mode split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputReport {
    pub fixed_point: FixedPointSolution,
    /// Probability that a round carries at least one transmission.
    pub p_tr: f64,
    /// Probability that a busy round is a success.
    pub p_s: f64,
    /// Mean round duration, microseconds.
    pub mean_round_us: f64,
    pub s_total_bps: f64,
    pub s_scf_bps: f64,
    pub s_mh_bps: f64,
}

/// Saturation throughput of the two-class network.
pub fn throughput(
    bp: &BackoffParams,
    mix: &PopulationMix,
    timing: &TimingParams,
    tin: &ThroughputInputs,
) -> Result<ThroughputReport> {
    tin.validate_against(timing)?;
    let fp = solve_fixed_points(bp, mix)?;
    let ns = mix.n_scf as i32;
    let nm = mix.n_mh() as i32;
    let scf_silent = (1.0 - fp.tau_scf).powi(ns);
    let p_tr = 1.0 - scf_silent * (1.0 - fp.tau_mh).powi(nm);
    let succ_scf = ns as f64 * fp.tau_scf * (1.0 - fp.tau_scf).powi(ns - 1);
    let succ_mh = nm as f64 * fp.tau_mh * scf_silent * (1.0 - fp.tau_mh).powi(nm - 1);
    let p_s = if p_tr > 0.0 { (succ_scf + succ_mh) / p_tr } else { 0.0 };
    let mean_round_us = (1.0 - p_tr) * timing.sigma_us
        + (succ_scf + succ_mh) * timing.t_success_us()
        + (p_tr - succ_scf - succ_mh) * timing.t_collision_us();
    let per_round = tin.payload_bits / (mean_round_us * 1e-6);
    Ok(ThroughputReport {
        fixed_point: fp,
        p_tr,
        p_s,
        mean_round_us,
        s_total_bps: (succ_scf + succ_mh) * per_round,
        s_scf_bps: succ_scf * per_round,
        s_mh_bps: succ_mh * per_round,
    })
}

/// Quantization rule for the courier population.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantize {
    Floor,
    Round,
    Ceil,
}

impl Quantize {
    fn apply(self, x: f64) -> u32 {
        let q = match self {
            Quantize::Floor => x.floor(),
            Quantize::Round => x.round(),
            Quantize::Ceil => x.ceil(),
        };
        q as u32
    }
}

/// Expected courier population: the sum of per-position encounter
/// probabilities, plus its integer quantization for the chain model.
pub fn nscf_from_positions(
    scene: &SceneGeometry,
    positions: &[[f64; 3]],
    wait_s: f64,
    quantize: Quantize,
) -> Result<(f64, u32)> {
    let mut sum = 0.0;
    for &pos in positions {
        sum += scf_probability(scene, pos)?.at(wait_s)?;
    }
    Ok((sum, quantize.apply(sum)))
}
