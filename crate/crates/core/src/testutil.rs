//! Seeded random instances for unit tests: a line topology with fast
//! inter-server links and tasks whose channel rates make the deadlines
//! attainable, so capacity contention is what gets exercised.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::model::{MecServer, RadioParams, ServerId, SlotConfig, Task, TaskId};
use crate::radio::{gain_from_distance, ChannelModel};
use crate::topology::{Link, Topology};

pub fn test_slot_config() -> SlotConfig {
    SlotConfig { bandwidth_hz: 8.0e8, ..SlotConfig::default() }
}

pub fn test_channel() -> ChannelModel {
    ChannelModel { bandwidth_hz: 8.0e8, pathloss_exponent: 4.0, reference_gain: 1.0 }
}

pub fn line_topology_n(n: usize, capacities: &[f64]) -> Topology {
    let servers: Vec<MecServer> = (0..n)
        .map(|i| MecServer::new(i, i as f64 * 200.0, 0.0, capacities[i % capacities.len()]))
        .collect();
    let links: Vec<Link> = (0..n.saturating_sub(1))
        .map(|i| Link { a: ServerId(i), b: ServerId(i + 1), rate_bps: 1e10, distance_m: 200.0 })
        .collect();
    Topology::new(servers, links).unwrap()
}

pub fn random_task(id: usize, n_servers: usize, rng: &mut ChaCha8Rng) -> Task {
    let dist = rng.gen_range(20.0..150.0);
    let gain = gain_from_distance(dist, &test_channel());
    Task {
        id: TaskId(id),
        host: ServerId(rng.gen_range(0..n_servers)),
        data_size_bits: rng.gen_range(0.1..7.0) * 8e6,
        instr_millions: f64::max(23000.0 + rng.gen_range(-3.0..3.0) * 3500.0, 1.0),
        deadline_s: rng.gen_range(0.075..0.9),
        arrival_s: 0.0,
        mu_distance_m: dist,
        alpha: 0.1,
        radio: RadioParams { tx_power_w: 1.5, gain, interference_w: 0.0, noise_w: 1e-9 },
    }
}

/// An instance tight enough that some seeds overflow capacity.
pub fn random_instance(
    seed: u64,
    n_servers: usize,
    n_tasks: usize,
) -> (Topology, Vec<Task>, SlotConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let caps = [5e5, 7e5, 9e5];
    let topo = line_topology_n(n_servers, &caps);
    let tasks: Vec<Task> = (0..n_tasks).map(|i| random_task(i, n_servers, &mut rng)).collect();
    (topo, tasks, test_slot_config())
}
