//! Slotted TDMA baseline with class-partitioned frames.
//!
//! Each frame of `L` data slots is split between the courier and relay
//! classes in proportion to the class populations. Every station claims one
//! uniformly random slot inside its partition each frame; a slot with exactly
//! one claimant carries one payload over the full data band, a slot with more
//! claimants is wasted. Slots are re-drawn every frame.

use super::{assign_modes, ModeStats, Protocol, SimConfig, SimStats};
use crate::error::{Result, UdmacError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_vemac(cfg: &SimConfig) -> Result<SimStats> {
    if cfg.protocol != Protocol::VeMac {
        return Err(UdmacError::Config("config selects a different protocol".into()));
    }
    cfg.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let modes = assign_modes(cfg, &mut rng);
    let n = modes.len() as u64;
    let n_scf = modes.iter().filter(|&&m| m).count() as u64;
    let n_mh = n - n_scf;

    let l = cfg.vemac_frame_slots as u64;
    // slot share proportional to the class head-count
    let l_scf = if n == 0 { 0 } else { (l * n_scf).div_ceil(n) };
    let l_mh = l - l_scf;
    if n_scf > 0 && l_scf == 0 {
        return Err(UdmacError::Config("courier partition is empty but couriers exist".into()));
    }
    if n_mh > 0 && l_mh == 0 {
        return Err(UdmacError::Config(format!(
            "relay partition is empty but {n_mh} relay stations exist \
             (frame of {l} slots, {n_scf} couriers of {n})"
        )));
    }

    let slot_us = cfg.vemac_slot_us();
    let frame_us = l as f64 * slot_us;
    let duration_us = cfg.duration_s * 1e6;

    let mut claims: Vec<u32> = vec![0; l as usize];
    let mut owner: Vec<usize> = vec![usize::MAX; l as usize];

    let mut now_us = 0.0f64;
    let mut rounds = 0u64;
    let mut idle_slots = 0u64;
    let mut idle_time = 0.0f64;
    let mut success_time = 0.0f64;
    let mut collision_time = 0.0f64;
    let mut scf = ModeStats::default();
    let mut mh = ModeStats::default();

    while now_us < duration_us {
        claims.fill(0);
        for (i, &is_scf) in modes.iter().enumerate() {
            let slot = if is_scf {
                rng.gen_range(0..l_scf)
            } else {
                l_scf + rng.gen_range(0..l_mh)
            } as usize;
            claims[slot] += 1;
            owner[slot] = i;
        }
        for (slot, &c) in claims.iter().enumerate() {
            rounds += 1;
            match c {
                0 => {
                    idle_slots += 1;
                    idle_time += slot_us;
                }
                1 => {
                    success_time += slot_us;
                    let stats = if modes[owner[slot]] { &mut scf } else { &mut mh };
                    stats.handshakes += 1;
                    stats.delivered_bits += cfg.tin.payload_bits;
                }
                _ => {
                    collision_time += slot_us;
                    let stats = if slot < l_scf as usize { &mut scf } else { &mut mh };
                    stats.collisions += c as u64;
                }
            }
        }
        now_us += frame_us;
    }

    let sim_time_s = now_us * 1e-6;
    scf.throughput_bps = scf.delivered_bits / sim_time_s;
    mh.throughput_bps = mh.delivered_bits / sim_time_s;
    Ok(SimStats {
        protocol: Protocol::VeMac,
        seed: cfg.seed,
        sim_time_s,
        rounds,
        idle_slots,
        idle_time_us: idle_time,
        success_time_us: success_time,
        collision_time_us: collision_time,
        scf,
        mh,
        throughput_bps: (scf.delivered_bits + mh.delivered_bits) / sim_time_s,
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_config;
    use super::*;

    fn vemac_config(n: u32, n_scf: u32, duration_s: f64, seed: u64) -> SimConfig {
        let mut cfg = test_config(n, n_scf, duration_s, seed);
        cfg.protocol = Protocol::VeMac;
        cfg
    }

    #[test]
    fn lone_station_owns_every_frame() {
        let cfg = vemac_config(1, 0, 1.0, 5);
        let s = run_vemac(&cfg).unwrap();
        // one success per frame of L slots
        let expect = 27_000.0 / (100.0 * cfg.vemac_slot_us() * 1e-6);
        let rel = (s.throughput_bps - expect).abs() / expect;
        assert!(rel < 1e-9, "sim {} expect {}", s.throughput_bps, expect);
    }

    #[test]
    fn full_frame_matches_the_occupancy_expectation() {
        // N = L claimants in one class: E[successes/frame] = N (1 - 1/L)^(N-1)
        let cfg = vemac_config(100, 0, 5.0, 9);
        let s = run_vemac(&cfg).unwrap();
        let frames = (s.sim_time_s * 1e6 / (100.0 * cfg.vemac_slot_us())).round();
        let per_frame = s.mh.handshakes as f64 / frames;
        let expect = 100.0 * (1.0f64 - 0.01).powi(99);
        // binomial-ish spread over the frame count
        let sd = (expect * (1.0 - expect / 100.0) / frames).sqrt() * 3.0;
        assert!(
            (per_frame - expect).abs() < sd.max(0.5),
            "per-frame {per_frame} expect {expect}"
        );
    }

    #[test]
    fn empty_relay_partition_with_relays_is_rejected() {
        // 99 couriers of 100 on a 10-slot frame: ceil(10*99/100) = 10 slots,
        // leaving the one relay station nothing
        let mut cfg = vemac_config(100, 99, 0.1, 2);
        cfg.vemac_frame_slots = 10;
        assert!(run_vemac(&cfg).is_err());
    }

    #[test]
    fn accounting_conserves_time() {
        let cfg = vemac_config(60, 12, 1.0, 13);
        let s = run_vemac(&cfg).unwrap();
        let total = s.idle_time_us + s.success_time_us + s.collision_time_us;
        assert!((total - s.sim_time_s * 1e6).abs() <= cfg.vemac_slot_us());
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = vemac_config(40, 10, 0.5, 77);
        assert_eq!(run_vemac(&cfg).unwrap(), run_vemac(&cfg).unwrap());
    }
}
