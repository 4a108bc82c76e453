//! Per-slot schedulers behind one interface: the greedy migration-enabled
//! scheduler, the no-migration baseline and the random baseline.
//!
//! All three share the same feasibility test (positive processing budget,
//! enough residual capacity) and the same finalization, so their results
//! differ only in placement policy.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    self, Assignment, Placement, Schedule, ServerId, SlotConfig, Task, TaskId,
};
use crate::radio::{channel_rate, ChannelModel};
use crate::topology::Topology;

/// Relative headroom added to every allocation so float rounding can never
/// push a scheduled task past its deadline.
const ALLOC_GUARD: f64 = 1e-12;

/// Everything a scheduler needs for one slot.
#[derive(Debug, Clone)]
pub struct SlotProblem<'a> {
    pub slot: usize,
    /// Tasks due this slot. `deadline_s` is the remaining deadline.
    pub tasks: Vec<Task>,
    pub topo: &'a Topology,
    /// Uplink channel rate per task, parallel to `tasks`.
    pub rates_bps: Vec<f64>,
    pub cfg: SlotConfig,
}

impl<'a> SlotProblem<'a> {
    /// Builds a slot problem, deriving each task's channel rate from its
    /// radio parameters and the configured bandwidth.
    pub fn new(slot: usize, tasks: Vec<Task>, topo: &'a Topology, cfg: SlotConfig) -> Result<Self> {
        let channel = ChannelModel { bandwidth_hz: cfg.bandwidth_hz, ..ChannelModel::default() };
        let rates_bps = tasks.iter().map(|t| channel_rate(&t.radio, &channel)).collect();
        let problem = Self { slot, tasks, topo, rates_bps, cfg };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_rates(
        slot: usize,
        tasks: Vec<Task>,
        topo: &'a Topology,
        rates_bps: Vec<f64>,
        cfg: SlotConfig,
    ) -> Result<Self> {
        if rates_bps.len() != tasks.len() {
            return Err(Error::InvalidInput("one rate per task required".into()));
        }
        let problem = Self { slot, tasks, topo, rates_bps, cfg };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        for t in &self.tasks {
            t.validate()?;
            self.topo.server(t.host)?;
        }
        Ok(())
    }

    /// Required allocation for running `task_idx` on `server`, or None when
    /// the budget is non-positive.
    pub fn required_alloc(&self, task_idx: usize, server: ServerId) -> Option<f64> {
        let task = &self.tasks[task_idx];
        let budget =
            model::process_budget(task, server, self.topo, self.rates_bps[task_idx], &self.cfg);
        if budget <= 0.0 {
            return None;
        }
        let f = model::required_mips(task, budget).expect("budget checked positive");
        Some(f * (1.0 + ALLOC_GUARD))
    }
}

/// Work counters kept by each scheduler run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchedulerStats {
    /// Sort-comparator invocations (task and server orderings).
    pub comparisons: u64,
    /// Feasibility evaluations of a (task, server) pair.
    pub servers_probed: u64,
}

/// A slot schedule plus which tasks found no feasible server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulerResult {
    pub schedule: Schedule,
    pub unassigned: Vec<TaskId>,
    pub stats: SchedulerStats,
}

impl SchedulerResult {
    pub fn violations(&self) -> usize {
        self.schedule.violations()
    }
}

/// Approximate MIPS demand used to order tasks: instruction count over the
/// tightest applicable time bound.
pub fn priority(task: &Task, cfg: &SlotConfig) -> f64 {
    task.instr_millions / task.deadline_s.min(cfg.slot_s)
}

/// Common scheduler interface; implementations are pure per invocation.
pub trait Scheduler: Sync {
    fn name(&self) -> &'static str;
    fn schedule(&self, problem: &SlotProblem) -> SchedulerResult;
}

/// Greedy migration-enabled scheduler: tasks in ascending priority, servers
/// in ascending path distance from the host.
pub struct Mesa;

impl Scheduler for Mesa {
    fn name(&self) -> &'static str {
        "mesa"
    }

    fn schedule(&self, problem: &SlotProblem) -> SchedulerResult {
        mesa_schedule(problem)
    }
}

/// Baseline that may only use each task's host server.
pub struct NoMigration;

impl Scheduler for NoMigration {
    fn name(&self) -> &'static str {
        "no-migration"
    }

    fn schedule(&self, problem: &SlotProblem) -> SchedulerResult {
        no_migration_schedule(problem)
    }
}

/// Baseline that draws one server uniformly per task, no retries.
pub struct RandomAssign {
    pub seed: u64,
}

impl Scheduler for RandomAssign {
    fn name(&self) -> &'static str {
        "random"
    }

    fn schedule(&self, problem: &SlotProblem) -> SchedulerResult {
        // Stride the seed per slot so multi-slot runs stay deterministic
        // without repeating slot 0's draws.
        let slot_seed = self.seed.wrapping_add((problem.slot as u64).wrapping_mul(0x9E3779B97F4A7C15));
        random_schedule(problem, slot_seed)
    }
}

/// Looks up a scheduler by its CLI name.
pub fn by_name(name: &str, seed: u64) -> Result<Box<dyn Scheduler>> {
    match name {
        "mesa" => Ok(Box::new(Mesa)),
        "no-migration" => Ok(Box::new(NoMigration)),
        "random" => Ok(Box::new(RandomAssign { seed })),
        other => Err(Error::Config(format!(
            "unknown scheduler '{other}' (expected mesa | no-migration | random)"
        ))),
    }
}

/// Greedy assignment over an explicit candidate-server policy.
fn greedy_assign(
    problem: &SlotProblem,
    migration_allowed: bool,
) -> (Vec<Placement>, SchedulerStats) {
    let mut stats = SchedulerStats::default();
    let n = problem.tasks.len();

    let mut order: Vec<usize> = (0..n).collect();
    let phis: Vec<f64> = problem.tasks.iter().map(|t| priority(t, &problem.cfg)).collect();
    order.sort_by(|&a, &b| {
        stats.comparisons += 1;
        phis[a]
            .partial_cmp(&phis[b])
            .expect("priority is finite")
            .then(problem.tasks[a].id.cmp(&problem.tasks[b].id))
    });

    let mut residual: Vec<f64> =
        problem.topo.servers().iter().map(|s| s.capacity_mips).collect();
    let mut placements = vec![Placement::Unassigned; n];

    for &ti in &order {
        let host = problem.tasks[ti].host;
        let candidates: Vec<ServerId> = if migration_allowed {
            let mut servers: Vec<ServerId> = problem.topo.server_ids().collect();
            servers.sort_by(|&a, &b| {
                stats.comparisons += 1;
                let da = problem.topo.distance_m(host, a).expect("validated id");
                let db = problem.topo.distance_m(host, b).expect("validated id");
                da.partial_cmp(&db)
                    .expect("distance is finite")
                    .then((a != host).cmp(&(b != host)))
                    .then(a.cmp(&b))
            });
            servers
        } else {
            vec![host]
        };

        for k in candidates {
            stats.servers_probed += 1;
            if let Some(alloc) = problem.required_alloc(ti, k) {
                if residual[k.0] >= alloc {
                    residual[k.0] -= alloc;
                    placements[ti] = Placement::Assigned { server: k, alloc_mips: alloc };
                    break;
                }
            }
        }
    }
    (placements, stats)
}

pub fn mesa_schedule(problem: &SlotProblem) -> SchedulerResult {
    let (placements, stats) = greedy_assign(problem, true);
    finalize(problem, placements, stats)
}

pub fn no_migration_schedule(problem: &SlotProblem) -> SchedulerResult {
    let (placements, stats) = greedy_assign(problem, false);
    finalize(problem, placements, stats)
}

/// One uniform server draw per task in arrival order; an infeasible draw
/// leaves the task unassigned rather than retrying.
pub fn random_schedule(problem: &SlotProblem, seed: u64) -> SchedulerResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = SchedulerStats::default();
    let m = problem.topo.server_count();
    let mut residual: Vec<f64> =
        problem.topo.servers().iter().map(|s| s.capacity_mips).collect();
    let mut placements = vec![Placement::Unassigned; problem.tasks.len()];

    for ti in 0..problem.tasks.len() {
        let k = ServerId(rng.gen_range(0..m));
        stats.servers_probed += 1;
        if let Some(alloc) = problem.required_alloc(ti, k) {
            if residual[k.0] >= alloc {
                residual[k.0] -= alloc;
                placements[ti] = Placement::Assigned { server: k, alloc_mips: alloc };
            }
        }
    }
    finalize(problem, placements, stats)
}

/// Turns raw placements into a schedule: response times, violation flags
/// and residual capacities. Each task contributes at most one violation.
pub(crate) fn finalize(
    problem: &SlotProblem,
    placements: Vec<Placement>,
    stats: SchedulerStats,
) -> SchedulerResult {
    let mut residual: Vec<f64> =
        problem.topo.servers().iter().map(|s| s.capacity_mips).collect();
    let mut assignments = Vec::with_capacity(placements.len());
    let mut unassigned = Vec::new();

    for (ti, placement) in placements.into_iter().enumerate() {
        let task = &problem.tasks[ti];
        let trt_s =
            model::total_response_time(task, &placement, problem.topo, problem.rates_bps[ti], &problem.cfg)
                .expect("placements come from feasibility checks");
        if let Placement::Assigned { server, alloc_mips } = placement {
            residual[server.0] -= alloc_mips;
        } else {
            unassigned.push(task.id);
        }
        assignments.push(Assignment {
            task_id: task.id,
            placement,
            trt_s,
            violated: model::violation_flag(trt_s, task.deadline_s),
        });
    }

    SchedulerResult {
        schedule: Schedule { slot: problem.slot, assignments, residual_mips: residual },
        unassigned,
        stats,
    }
}
