//! Contention simulator for the priority MAC.
//!
//! Time advances in contention rounds. A round is an empty slot when no
//! backoff counter sits at zero, otherwise a busy period: couriers seize the
//! channel first (their inter-frame wait is shorter), relays transmit only in
//! rounds the couriers leave silent. A preempted relay keeps its counter at
//! zero and retries; its backoff stage changes only on a real collision.
//! Backoff counters freeze during busy periods and count down on idle slots,
//! one per slot.
//!
//! After a successful courier handshake the station is semi-active: it sits
//! out the next contention round (this is exactly the freeze state of the
//! analytic chain, which occupies one chain step) and then stays silent until
//! the configured extension of `freeze_slots` empty-slot units of simulated
//! time has elapsed.

use super::{assign_modes, ModeAssignment, ModeStats, Protocol, SimConfig, SimStats};
use crate::error::{Result, UdmacError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
enum StationState {
    Active { stage: u32, counter: u32 },
    /// Sitting out `skip_rounds` more rounds, then waiting for `until_us`.
    Frozen { skip_rounds: u8, until_us: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Station {
    is_scf: bool,
    state: StationState,
}

/// Data-channel pool with identical-duration reservations (FIFO releases).
struct ChannelPool {
    capacity: usize,
    releases_us: VecDeque<f64>,
}

impl ChannelPool {
    fn new(capacity: u32) -> Self {
        ChannelPool { capacity: capacity as usize, releases_us: VecDeque::new() }
    }

    fn release_elapsed(&mut self, now_us: f64) {
        while self.releases_us.front().is_some_and(|&t| t <= now_us) {
            self.releases_us.pop_front();
        }
    }

    fn try_reserve(&mut self, now_us: f64, hold_us: f64) -> bool {
        self.release_elapsed(now_us);
        if self.releases_us.len() < self.capacity {
            self.releases_us.push_back(now_us + hold_us);
            true
        } else {
            false
        }
    }
}

pub fn run_udmac(cfg: &SimConfig) -> Result<SimStats> {
    if cfg.protocol != Protocol::UdMac {
        return Err(UdmacError::Config("config selects a different protocol".into()));
    }
    cfg.validate()?;
    cfg.tin.validate_against(&cfg.timing).ok(); // inadmissible payloads still run; blocking is counted

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let modes = assign_modes(cfg, &mut rng);
    let w0 = cfg.backoff.window(0);
    let mut stations: Vec<Station> = modes
        .iter()
        .map(|&is_scf| Station {
            is_scf,
            state: StationState::Active { stage: 0, counter: rng.gen_range(0..w0) },
        })
        .collect();

    // couriers deliver to the ground pool, relays to the air pool, with
    // overflow into the other pool when the preferred one is full
    let mut a2g = ChannelPool::new(cfg.a2g_channels);
    let mut a2a = ChannelPool::new(cfg.a2a_channels);

    let sigma = cfg.timing.sigma_us;
    let t_s = cfg.timing.t_success_us();
    let t_c = cfg.timing.t_collision_us();
    let hold_us = cfg.tin.payload_bits / cfg.tin.rate_bps * 1e6;
    let freeze_ext_us = cfg.freeze_slots as f64 * sigma;
    let duration_us = cfg.duration_s * 1e6;

    let mut now_us = 0.0f64;
    let mut rounds = 0u64;
    let mut idle_slots = 0u64;
    let mut idle_time = 0.0f64;
    let mut success_time = 0.0f64;
    let mut collision_time = 0.0f64;
    let mut scf = ModeStats::default();
    let mut mh = ModeStats::default();
    let mut scf_tx: Vec<usize> = Vec::new();
    let mut mh_tx: Vec<usize> = Vec::new();

    while now_us < duration_us {
        rounds += 1;

        // wake stations whose freeze has fully elapsed
        for st in stations.iter_mut() {
            if let StationState::Frozen { skip_rounds: 0, until_us } = st.state {
                if now_us >= until_us {
                    if let ModeAssignment::Bernoulli(p) = cfg.mode_assignment {
                        st.is_scf = rng.gen::<f64>() < p;
                    }
                    st.state =
                        StationState::Active { stage: 0, counter: rng.gen_range(0..w0) };
                }
            }
        }

        scf_tx.clear();
        mh_tx.clear();
        for (i, st) in stations.iter().enumerate() {
            if let StationState::Active { counter: 0, .. } = st.state {
                if st.is_scf {
                    scf_tx.push(i);
                } else {
                    mh_tx.push(i);
                }
            }
        }

        // frozen stations consume this round before any new freeze is set
        for st in stations.iter_mut() {
            if let StationState::Frozen { skip_rounds, .. } = &mut st.state {
                *skip_rounds = skip_rounds.saturating_sub(1);
            }
        }

        // the shorter courier inter-frame wait seizes the round outright;
        // preempted relays hold their zero counter for the next round
        let (transmitters, courier_round): (&[usize], bool) = if !scf_tx.is_empty() {
            (&scf_tx, true)
        } else {
            (&mh_tx, false)
        };

        let round_us = match transmitters.len() {
            0 => {
                idle_slots += 1;
                idle_time += sigma;
                for st in stations.iter_mut() {
                    if let StationState::Active { counter, .. } = &mut st.state {
                        *counter -= 1;
                    }
                }
                sigma
            }
            1 => {
                success_time += t_s;
                let winner = transmitters[0];
                let end_us = now_us + t_s;
                let (preferred, overflow) = if courier_round {
                    (&mut a2g, &mut a2a)
                } else {
                    (&mut a2a, &mut a2g)
                };
                let reserved = preferred.try_reserve(end_us, hold_us)
                    || overflow.try_reserve(end_us, hold_us);
                let stats = if courier_round { &mut scf } else { &mut mh };
                stats.handshakes += 1;
                if reserved {
                    stats.delivered_bits += cfg.tin.payload_bits;
                } else {
                    stats.blocked += 1;
                }
                stations[winner].state = if courier_round {
                    StationState::Frozen { skip_rounds: 1, until_us: end_us + freeze_ext_us }
                } else {
                    StationState::Active { stage: 0, counter: rng.gen_range(0..w0) }
                };
                t_s
            }
            _ => {
                collision_time += t_c;
                let stats = if courier_round { &mut scf } else { &mut mh };
                stats.collisions += transmitters.len() as u64;
                for &i in transmitters {
                    let StationState::Active { stage, .. } = stations[i].state else {
                        unreachable!("transmitters are active");
                    };
                    let stage = (stage + 1).min(cfg.backoff.max_stage);
                    stations[i].state = StationState::Active {
                        stage,
                        counter: rng.gen_range(0..cfg.backoff.window(stage)),
                    };
                }
                t_c
            }
        };

        now_us += round_us;
    }

    let sim_time_s = now_us * 1e-6;
    scf.throughput_bps = scf.delivered_bits / sim_time_s;
    mh.throughput_bps = mh.delivered_bits / sim_time_s;
    Ok(SimStats {
        protocol: Protocol::UdMac,
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
    use crate::markov::{solve_fixed_points, throughput};

    #[test]
    fn deterministic_per_seed() {
        let cfg = test_config(30, 5, 0.02, 42);
        assert_eq!(run_udmac(&cfg).unwrap(), run_udmac(&cfg).unwrap());
        let mut other = cfg;
        other.seed = 43;
        assert_ne!(run_udmac(&cfg).unwrap(), run_udmac(&other).unwrap());
    }

    #[test]
    fn accounting_conserves_time() {
        let cfg = test_config(50, 10, 0.05, 7);
        let s = run_udmac(&cfg).unwrap();
        let total = s.idle_time_us + s.success_time_us + s.collision_time_us;
        assert!((total - s.sim_time_s * 1e6).abs() <= cfg.timing.sigma_us);
        assert!(s.throughput_bps <= cfg.tin.data_channels as f64 * cfg.tin.rate_bps);
    }

    #[test]
    fn single_relay_station_matches_the_renewal_expectation() {
        let cfg = test_config(1, 0, 2.0, 3);
        let s = run_udmac(&cfg).unwrap();
        // cycle = T_s + E[counter] * sigma with E[counter] = (W-1)/2
        let expect = 27_000.0 / ((58.9 + 7.5 * 9.0) * 1e-6);
        let rel = (s.throughput_bps - expect).abs() / expect;
        assert!(rel < 0.02, "sim {} expect {} rel {}", s.throughput_bps, expect, rel);
        assert_eq!(s.scf.handshakes, 0);
        assert_eq!(s.mh.collisions, 0);
    }

    #[test]
    fn single_courier_station_includes_the_freeze_round() {
        let cfg = test_config(1, 1, 2.0, 3);
        let s = run_udmac(&cfg).unwrap();
        // cycle = T_s + (1 + E[counter]) * sigma: one skipped round after success
        let expect = 27_000.0 / ((58.9 + 8.5 * 9.0) * 1e-6);
        let rel = (s.throughput_bps - expect).abs() / expect;
        assert!(rel < 0.02, "sim {} expect {} rel {}", s.throughput_bps, expect, rel);
        assert_eq!(s.mh.handshakes, 0);
    }

    #[test]
    fn one_courier_one_relay_never_collide() {
        let cfg = test_config(2, 1, 0.5, 11);
        let s = run_udmac(&cfg).unwrap();
        assert_eq!(s.scf.collisions + s.mh.collisions, 0);
        assert!(s.scf.handshakes > 0 && s.mh.handshakes > 0);
    }

    #[test]
    fn large_freeze_starves_an_all_courier_network() {
        let mut cfg = test_config(10, 10, 0.5, 5);
        let base = run_udmac(&cfg).unwrap().throughput_bps;
        cfg.freeze_slots = 20_000;
        let frozen = run_udmac(&cfg).unwrap().throughput_bps;
        assert!(
            frozen < 0.1 * base,
            "freeze should collapse throughput: {frozen} vs {base}"
        );
    }

    #[test]
    fn matches_the_analytic_model_at_zero_freeze() {
        // smoke version of the acceptance sweep: one point, one seed
        let cfg = test_config(100, 10, 0.4, 17);
        let s = run_udmac(&cfg).unwrap();
        let rep = throughput(&cfg.backoff, &cfg.mix, &cfg.timing, &cfg.tin).unwrap();
        let rel = (s.throughput_bps - rep.s_total_bps).abs() / rep.s_total_bps;
        assert!(rel < 0.04, "sim {} model {} rel {}", s.throughput_bps, rep.s_total_bps, rel);
        let _ = solve_fixed_points(&cfg.backoff, &cfg.mix).unwrap();
    }

    #[test]
    fn no_blocked_deliveries_under_the_admissibility_bound() {
        let cfg = test_config(100, 13, 0.3, 23);
        let s = run_udmac(&cfg).unwrap();
        assert_eq!(s.scf.blocked + s.mh.blocked, 0);
        assert_eq!(
            s.scf.delivered_bits,
            s.scf.handshakes as f64 * cfg.tin.payload_bits
        );
    }

    #[test]
    fn inadmissible_payload_blocks_some_deliveries() {
        let mut cfg = test_config(3, 3, 0.5, 29);
        // single data channel: handshakes outpace the drain rate
        cfg.tin.data_channels = 1;
        cfg.a2a_channels = 0;
        cfg.a2g_channels = 1;
        assert!(cfg.tin.validate_against(&cfg.timing).is_err());
        let s = run_udmac(&cfg).unwrap();
        assert!(s.scf.blocked > 0, "expected blocked deliveries");
        assert!(s.scf.delivered_bits < s.scf.handshakes as f64 * cfg.tin.payload_bits);
    }
}
