//! Time-slotted scheduling simulator for heterogeneous mobile edge cloud
//! networks: latency model, greedy and baseline schedulers, an exact
//! small-instance solver, workload/topology generators and an experiment
//! runner.

pub mod error;
pub mod graphml;
pub mod model;
pub mod radio;
pub mod scheduler;
pub mod topology;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use model::{
    Assignment, MecServer, Placement, RadioParams, Schedule, ServerId, SlotConfig, Task, TaskId,
};
pub use radio::ChannelModel;
pub use scheduler::{Scheduler, SchedulerResult, SchedulerStats, SlotProblem};
pub use topology::{Link, Topology, TopologyDoc};
