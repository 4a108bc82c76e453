//! Domain types and the latency/allocation equations shared by every
//! scheduler and the exact solver.
//!
//! All quantities use one unit system: bits, bits/s, million instructions
//! (MI), MIPS, meters, seconds. Converters from other units (MB, ms) live
//! at the config boundary, never here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::Topology;

/// Identifier of a MEC server. Doubles as the index into topology matrices.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct ServerId(pub usize);

impl std::fmt::Display for ServerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Identifier of a task.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct TaskId(pub usize);

impl std::fmt::Display for TaskId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// Radio-channel parameters of the mobile user that issued a task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    /// Transmission power of the MU, watts.
    pub tx_power_w: f64,
    /// Channel gain, dimensionless.
    pub gain: f64,
    /// Interference from other MUs, watts.
    pub interference_w: f64,
    /// White-noise power, watts.
    pub noise_w: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        // 1.5 W transmit power; noise read as -60 dBW; single-cell (no
        // interference); unit gain unless derived from geometry.
        Self {
            tx_power_w: 1.5,
            gain: 1.0,
            interference_w: 0.0,
            noise_w: 1e-6,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if self.tx_power_w <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "tx_power_w must be > 0, got {}",
                self.tx_power_w
            )));
        }
        if self.gain <= 0.0 {
            return Err(Error::InvalidInput(format!("gain must be > 0, got {}", self.gain)));
        }
        if self.interference_w < 0.0 {
            return Err(Error::InvalidInput(format!(
                "interference_w must be >= 0, got {}",
                self.interference_w
            )));
        }
        if self.noise_w <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "noise_w must be > 0, got {}",
                self.noise_w
            )));
        }
        Ok(())
    }
}

/// One offloaded request, as seen by the schedulers.
///
/// `deadline_s` is relative to the task's arrival instant; the simulation
/// shrinks it as the task waits for a slot boundary or is deferred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    /// Host server: the MEC server that receives this task from its MU.
    pub host: ServerId,
    /// Input data size, bits.
    pub data_size_bits: f64,
    /// Computational demand, million instructions.
    pub instr_millions: f64,
    /// Maximum acceptable response time, seconds from arrival.
    pub deadline_s: f64,
    /// Arrival instant, seconds from the start of the run. Tasks arriving
    /// mid-slot wait for the next slot boundary; the wait counts against
    /// the deadline.
    pub arrival_s: f64,
    /// Distance from the MU to its host server, meters.
    pub mu_distance_m: f64,
    /// Response-to-input size ratio for this task's application.
    pub alpha: f64,
    pub radio: RadioParams,
}

impl Task {
    /// Slot whose boundary first schedules this task: arrivals exactly on a
    /// boundary run in that slot, anything later waits for the next one.
    pub fn arrival_slot(&self, slot_s: f64) -> usize {
        (self.arrival_s / slot_s).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.data_size_bits <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "{}: data_size_bits must be > 0",
                self.id
            )));
        }
        if self.instr_millions <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "{}: instr_millions must be > 0",
                self.id
            )));
        }
        if self.deadline_s <= 0.0 {
            return Err(Error::InvalidInput(format!("{}: deadline_s must be > 0", self.id)));
        }
        if self.alpha < 0.0 {
            return Err(Error::InvalidInput(format!("{}: alpha must be >= 0", self.id)));
        }
        self.radio.validate()
    }
}

/// A MEC server: position in the service area and processing capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MecServer {
    pub id: ServerId,
    /// Position, meters.
    pub position: (f64, f64),
    /// Processing capacity, MIPS.
    pub capacity_mips: f64,
}

impl MecServer {
    pub fn new(id: usize, x_m: f64, y_m: f64, capacity_mips: f64) -> Self {
        Self { id: ServerId(id), position: (x_m, y_m), capacity_mips }
    }

    pub fn distance_to(&self, point: (f64, f64)) -> f64 {
        let dx = self.position.0 - point.0;
        let dy = self.position.1 - point.1;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Global slot constants shared by every scheduler and the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotConfig {
    /// Slot length tau, seconds.
    pub slot_s: f64,
    /// Scheduling-decision time, seconds. Constant per slot.
    pub decision_s: f64,
    /// Default response-to-input size ratio; tasks may carry their own.
    pub alpha: f64,
    /// Signal propagation speed, m/s.
    pub v_c_mps: f64,
    /// Uplink bandwidth between MUs and their host server, Hz.
    pub bandwidth_hz: f64,
    /// Big-M penalty added to the response time of unserved tasks, seconds.
    /// Must exceed every deadline.
    pub big_m_s: f64,
}

impl Default for SlotConfig {
    fn default() -> Self {
        Self {
            slot_s: 2.0,
            decision_s: 0.0,
            alpha: 0.1,
            v_c_mps: 3.0e8,
            bandwidth_hz: 2.0e7,
            big_m_s: 1.0e4,
        }
    }
}

impl SlotConfig {
    pub fn validate(&self) -> Result<()> {
        if self.slot_s <= 0.0 {
            return Err(Error::InvalidInput("slot_s must be > 0".into()));
        }
        if self.alpha < 0.0 {
            return Err(Error::InvalidInput("alpha must be >= 0".into()));
        }
        if self.v_c_mps <= 0.0 {
            return Err(Error::InvalidInput("v_c_mps must be > 0".into()));
        }
        if self.big_m_s <= 0.0 {
            return Err(Error::InvalidInput("big_m_s must be > 0".into()));
        }
        Ok(())
    }
}

/// Where a task ended up within one slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Placement {
    /// Executing on `server` with `alloc_mips` of its capacity.
    Assigned { server: ServerId, alloc_mips: f64 },
    /// No feasible server this slot.
    Unassigned,
}

impl Placement {
    pub fn server(&self) -> Option<ServerId> {
        match self {
            Placement::Assigned { server, .. } => Some(*server),
            Placement::Unassigned => None,
        }
    }

    pub fn alloc_mips(&self) -> Option<f64> {
        match self {
            Placement::Assigned { alloc_mips, .. } => Some(*alloc_mips),
            Placement::Unassigned => None,
        }
    }

    pub fn is_assigned(&self) -> bool {
        matches!(self, Placement::Assigned { .. })
    }
}

/// Outcome for one task in one slot: placement, total response time and
/// the violation flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub task_id: TaskId,
    pub placement: Placement,
    pub trt_s: f64,
    pub violated: bool,
}

/// Per-slot schedule: the assignment of every task due in the slot plus
/// what is left of each server's capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub slot: usize,
    pub assignments: Vec<Assignment>,
    /// Residual capacity per server after placement, MIPS, indexed by id.
    pub residual_mips: Vec<f64>,
}

impl Schedule {
    pub fn violations(&self) -> usize {
        self.assignments.iter().filter(|a| a.violated).count()
    }

    pub fn assigned(&self) -> usize {
        self.assignments.iter().filter(|a| a.placement.is_assigned()).count()
    }

    /// Checks the capacity constraint: allocations on each server must not
    /// exceed its capacity (tiny relative slack for float accumulation).
    pub fn check_capacity(&self, topo: &Topology) -> Result<()> {
        let mut used = vec![0.0f64; topo.server_count()];
        for a in &self.assignments {
            if let Placement::Assigned { server, alloc_mips } = a.placement {
                used[server.0] += alloc_mips;
            }
        }
        for server in topo.servers() {
            let cap = server.capacity_mips;
            if used[server.id.0] > cap * (1.0 + 1e-9) {
                return Err(Error::InvalidInput(format!(
                    "capacity exceeded on {}: {} > {}",
                    server.id, used[server.id.0], cap
                )));
            }
        }
        Ok(())
    }
}

/// Time to move the task from the MU onto its host server: serialization
/// on the radio channel plus propagation.
pub fn upload_time(task: &Task, rate_bps: f64, cfg: &SlotConfig) -> Result<f64> {
    if rate_bps <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "{}: channel rate must be > 0, got {rate_bps}",
            task.id
        )));
    }
    Ok(task.data_size_bits / rate_bps + task.mu_distance_m / cfg.v_c_mps)
}

/// Time to move the task's data from its host server to the executing
/// server. Exactly zero when the task stays on its host.
pub fn migration_time(
    task: &Task,
    from: ServerId,
    to: ServerId,
    topo: &Topology,
    cfg: &SlotConfig,
) -> Result<f64> {
    if from == to {
        return Ok(0.0);
    }
    let rate = topo.effective_rate_bps(from, to)?;
    let dist = topo.distance_m(from, to)?;
    Ok(task.data_size_bits / rate + dist / cfg.v_c_mps)
}

/// Time to return the response file to the MU: executing server back to the
/// host, then host down to the MU. A zero-size response sends nothing and
/// costs nothing.
pub fn response_time(
    task: &Task,
    exec: ServerId,
    topo: &Topology,
    rate_bps: f64,
    cfg: &SlotConfig,
) -> Result<f64> {
    if rate_bps <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "{}: channel rate must be > 0, got {rate_bps}",
            task.id
        )));
    }
    let response_bits = task.alpha * task.data_size_bits;
    if response_bits == 0.0 {
        return Ok(0.0);
    }
    let inter_server = if exec == task.host {
        0.0
    } else {
        let rate = topo.effective_rate_bps(task.host, exec)?;
        let dist = topo.distance_m(task.host, exec)?;
        response_bits / rate + dist / cfg.v_c_mps
    };
    Ok(inter_server + response_bits / rate_bps)
}

/// Processing-time budget left for the task on `exec` once every transfer
/// is paid for. A result `<= 0` means the server is infeasible for this
/// task; callers must treat it so rather than as an error.
pub fn process_budget(
    task: &Task,
    exec: ServerId,
    topo: &Topology,
    rate_bps: f64,
    cfg: &SlotConfig,
) -> f64 {
    let deadline_cap = task.deadline_s.min(cfg.slot_s);
    let upload = match upload_time(task, rate_bps, cfg) {
        Ok(t) => t,
        Err(_) => return f64::NEG_INFINITY,
    };
    let migration = match migration_time(task, task.host, exec, topo, cfg) {
        Ok(t) => t,
        Err(_) => return f64::NEG_INFINITY,
    };
    let response = match response_time(task, exec, topo, rate_bps, cfg) {
        Ok(t) => t,
        Err(_) => return f64::NEG_INFINITY,
    };
    deadline_cap - cfg.decision_s - upload - migration - response
}

/// MIPS that must be allocated to finish `instr_millions` within the budget.
pub fn required_mips(task: &Task, budget_s: f64) -> Result<f64> {
    if budget_s <= 0.0 {
        return Err(Error::InfeasibleBudget(budget_s));
    }
    Ok(task.instr_millions / budget_s)
}

/// Total response time of a task under a placement decision.
///
/// Assigned tasks pay decision + upload + migration + processing at the
/// allocated rate + response. Unassigned tasks pay decision + upload plus
/// the big-M penalty, which forces a violation.
pub fn total_response_time(
    task: &Task,
    placement: &Placement,
    topo: &Topology,
    rate_bps: f64,
    cfg: &SlotConfig,
) -> Result<f64> {
    let upload = upload_time(task, rate_bps, cfg)?;
    match placement {
        Placement::Assigned { server, alloc_mips } => {
            if *alloc_mips <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{}: allocation must be > 0, got {alloc_mips}",
                    task.id
                )));
            }
            let migration = migration_time(task, task.host, *server, topo, cfg)?;
            let process = task.instr_millions / alloc_mips;
            let response = response_time(task, *server, topo, rate_bps, cfg)?;
            Ok(cfg.decision_s + upload + migration + process + response)
        }
        Placement::Unassigned => Ok(cfg.decision_s + upload + cfg.big_m_s),
    }
}

/// SLA violation test: strict, so finishing exactly at the deadline is fine.
pub fn violation_flag(trt_s: f64, deadline_s: f64) -> bool {
    trt_s > deadline_s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Link, Topology};

    fn test_task(data_size_bits: f64, instr: f64, deadline: f64, dist: f64, alpha: f64) -> Task {
        Task {
            id: TaskId(0),
            host: ServerId(0),
            data_size_bits,
            instr_millions: instr,
            deadline_s: deadline,
            arrival_s: 0.0,
            mu_distance_m: dist,
            alpha,
            radio: RadioParams::default(),
        }
    }

    fn line_topology(rates: &[f64], dists: &[f64]) -> Topology {
        let n = rates.len() + 1;
        let servers: Vec<MecServer> = (0..n)
            .map(|i| MecServer::new(i, i as f64 * 100.0, 0.0, 1000.0))
            .collect();
        let links: Vec<Link> = (0..rates.len())
            .map(|i| Link { a: ServerId(i), b: ServerId(i + 1), rate_bps: rates[i], distance_m: dists[i] })
            .collect();
        Topology::new(servers, links).unwrap()
    }

    #[test]
    fn upload_time_unit_division() {
        let cfg = SlotConfig::default();
        let task = test_task(1e6, 100.0, 1.0, 0.0, 0.0);
        assert_eq!(upload_time(&task, 1e6, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn upload_time_with_propagation() {
        let cfg = SlotConfig::default();
        let task = test_task(8e6, 100.0, 1.0, 300.0, 0.0);
        let t = upload_time(&task, 8e6, &cfg).unwrap();
        assert!((t - (1.0 + 1e-6)).abs() < 1e-15);
    }

    #[test]
    fn upload_time_ar_sized() {
        // 7 MB at 20 Mbps from 100 m away.
        let cfg = SlotConfig::default();
        let task = test_task(5.6e7, 100.0, 1.0, 100.0, 0.0);
        let t = upload_time(&task, 2e7, &cfg).unwrap();
        assert!((t - 2.8000003333333333).abs() < 1e-12);
    }

    #[test]
    fn upload_time_rejects_bad_rate() {
        let cfg = SlotConfig::default();
        let task = test_task(1e6, 100.0, 1.0, 0.0, 0.0);
        assert!(upload_time(&task, 0.0, &cfg).is_err());
        assert!(upload_time(&task, -1.0, &cfg).is_err());
    }

    #[test]
    fn migration_self_is_free() {
        let cfg = SlotConfig::default();
        let topo = line_topology(&[1e9], &[1000.0]);
        let task = test_task(1e6, 100.0, 1.0, 0.0, 0.0);
        assert_eq!(migration_time(&task, ServerId(0), ServerId(0), &topo, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn migration_single_link() {
        let cfg = SlotConfig::default();
        let topo = line_topology(&[1e9], &[1000.0]);
        let task = test_task(1e6, 100.0, 1.0, 0.0, 0.0);
        let t = migration_time(&task, ServerId(0), ServerId(1), &topo, &cfg).unwrap();
        let expected = 1e-3 + 1000.0 / 3e8;
        assert!((t - expected).abs() < 1e-15, "{t} vs {expected}");
    }

    #[test]
    fn migration_two_hops_serializes_per_hop() {
        // Effective rate over 1 Gbps then 0.5 Gbps must reproduce the sum
        // of per-hop serialization times.
        let cfg = SlotConfig::default();
        let topo = line_topology(&[1e9, 5e8], &[100.0, 200.0]);
        let task = test_task(1e6, 100.0, 1.0, 0.0, 0.0);
        let t = migration_time(&task, ServerId(0), ServerId(2), &topo, &cfg).unwrap();
        let per_hop = 1e6 / 1e9 + 1e6 / 5e8 + (100.0 + 200.0) / 3e8;
        assert!((t - per_hop).abs() < 1e-15, "{t} vs {per_hop}");
        assert!((t - (3e-3 + 300.0 / 3e8)).abs() < 1e-15);
    }

    #[test]
    fn response_zero_alpha_is_free() {
        let cfg = SlotConfig::default();
        let topo = line_topology(&[1e9], &[1000.0]);
        let task = test_task(1e6, 100.0, 1.0, 50.0, 0.0);
        assert_eq!(response_time(&task, ServerId(1), &topo, 1e6, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn response_on_host_only_downlink() {
        let cfg = SlotConfig::default();
        let topo = line_topology(&[1e9], &[1000.0]);
        let task = test_task(1e6, 100.0, 1.0, 50.0, 0.1);
        let t = response_time(&task, ServerId(0), &topo, 1e6, &cfg).unwrap();
        assert!((t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn response_remote_exec() {
        let cfg = SlotConfig::default();
        let topo = line_topology(&[1e9], &[1000.0]);
        let task = test_task(1e6, 100.0, 1.0, 50.0, 0.1);
        let t = response_time(&task, ServerId(1), &topo, 1e6, &cfg).unwrap();
        let expected = 1e5 / 1e9 + 1000.0 / 3e8 + 1e5 / 1e6;
        assert!((t - expected).abs() < 1e-15, "{t} vs {expected}");
    }

    #[test]
    fn budget_deadline_binds() {
        let cfg = SlotConfig { alpha: 0.0, ..SlotConfig::default() };
        let topo = line_topology(&[1e9], &[1000.0]);
        // Transfer-free task: infinite-rate channel approximated by huge rate.
        let mut task = test_task(1e-9, 100.0, 0.1, 0.0, 0.0);
        task.alpha = 0.0;
        let b = process_budget(&task, ServerId(0), &topo, 1e30, &cfg);
        assert!((b - 0.1).abs() < 1e-12);
    }

    #[test]
    fn budget_slot_binds() {
        let cfg = SlotConfig::default();
        let topo = line_topology(&[1e9], &[1000.0]);
        let mut task = test_task(3e6, 100.0, 5.0, 0.0, 0.0);
        task.alpha = 0.0;
        // Transfer total 0.3 s on the host at 10 Mbps.
        let b = process_budget(&task, ServerId(0), &topo, 1e7, &cfg);
        assert!((b - 1.7).abs() < 1e-12, "{b}");
    }

    #[test]
    fn budget_negative_signals_infeasible() {
        // AR-like deadline 75 ms, transfers 80 ms.
        let cfg = SlotConfig::default();
        let topo = line_topology(&[1e9], &[1000.0]);
        let mut task = test_task(8e5, 100.0, 0.075, 0.0, 0.0);
        task.alpha = 0.0;
        let b = process_budget(&task, ServerId(0), &topo, 1e7, &cfg);
        assert!((b - (-0.005)).abs() < 1e-12, "{b}");
    }

    #[test]
    fn required_mips_is_unit_division() {
        let task = test_task(1.0, 23000.0, 1.0, 0.0, 0.0);
        assert_eq!(required_mips(&task, 1.0).unwrap(), 23000.0);
        assert_eq!(required_mips(&task, 2.0).unwrap(), 11500.0);
        let small = test_task(1.0, 100.0, 1.0, 0.0, 0.0);
        assert_eq!(required_mips(&small, 0.05).unwrap(), 2000.0);
        assert!(matches!(required_mips(&task, 0.0), Err(Error::InfeasibleBudget(_))));
        assert!(matches!(required_mips(&task, -1.0), Err(Error::InfeasibleBudget(_))));
    }

    #[test]
    fn trt_back_substitution_identity() {
        // When the allocation comes from the budget, TRT lands exactly on
        // min(deadline, slot) wherever the task executes.
        let cfg = SlotConfig::default();
        let topo = line_topology(&[1e9, 5e8], &[100.0, 200.0]);
        let task = test_task(1e6, 500.0, 0.8, 120.0, 0.1);
        let rate = 2e7;
        for exec in [ServerId(0), ServerId(1), ServerId(2)] {
            let budget = process_budget(&task, exec, &topo, rate, &cfg);
            assert!(budget > 0.0);
            let alloc = required_mips(&task, budget).unwrap();
            let placement = Placement::Assigned { server: exec, alloc_mips: alloc };
            let trt = total_response_time(&task, &placement, &topo, rate, &cfg).unwrap();
            assert!(
                (trt - task.deadline_s.min(cfg.slot_s)).abs() < 1e-9,
                "exec {exec}: trt {trt}"
            );
        }
    }

    #[test]
    fn trt_unassigned_gets_big_m() {
        let cfg = SlotConfig { big_m_s: 1000.0, ..SlotConfig::default() };
        let topo = line_topology(&[1e9], &[1000.0]);
        let task = test_task(1e6, 100.0, 0.1, 0.0, 0.0);
        let trt = total_response_time(&task, &Placement::Unassigned, &topo, 1e7, &cfg).unwrap();
        assert!(trt > 1000.0);
        assert!(violation_flag(trt, task.deadline_s));
    }

    #[test]
    fn violation_is_strict() {
        assert!(!violation_flag(0.074, 0.075));
        assert!(!violation_flag(0.075, 0.075));
        assert!(violation_flag(1000.0, 0.1));
    }

    #[test]
    fn arrival_slot_boundary_rules() {
        let mut task = test_task(1.0, 1.0, 1.0, 0.0, 0.0);
        assert_eq!(task.arrival_slot(2.0), 0);
        task.arrival_s = 0.1;
        assert_eq!(task.arrival_slot(2.0), 1);
        task.arrival_s = 2.0;
        assert_eq!(task.arrival_slot(2.0), 1);
        task.arrival_s = 2.0001;
        assert_eq!(task.arrival_slot(2.0), 2);
    }
}
