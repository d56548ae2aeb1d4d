//! Synchronizing sequences for synchronized Petri nets.
//!
//! A synchronized net labels each transition with an external event; on an
//! event every enabled transition carrying that label fires at once. A
//! synchronizing sequence drives the net from any reachable marking to one
//! known marking.

pub mod automata;
pub mod document;
pub mod error;
pub mod fixtures;
pub mod genbench;
pub mod limits;
pub mod net;
pub mod reachability;
pub mod rg_sync;
pub mod sm_structure;
pub mod sts;
pub mod subnet;
pub mod sync;

pub use automata::{build_auxiliary, exists_ss, greedy_ss, AutomatonWithInputs, AuxiliaryGraph};
pub use document::NetDocument;
pub use error::{Error, Result};
pub use genbench::{random_sm, run_benchmark, BenchConfig, BenchRecord, GenParams};
pub use limits::Deadline;
pub use net::{
    token_distributions, EventId, EventSequence, Marking, NetBuilder, PlaceId, PlaceTransitionNet,
    SynchronizedNet, TransitionId,
};
pub use reachability::{build_rg, build_rg_seeded, complete_rg, count_reachable_sm, ReachabilityGraph, DEFAULT_NODE_BUDGET};
pub use rg_sync::{ss_via_rg, ss_via_rg_from, ss_via_rg_until};
pub use sm_structure::{decompose, ergodic_count, ss_single_ergodic, CondensedGraph, ComponentPartition};
pub use sts::{find_sts, is_k_extensible, k_ss_from_sts, one_ss_from_sts, SearchMode, SynchronizingTransitionSequence};
pub use subnet::{check_isolation, check_label_condition, ss_via_subnets, SubnetDecomposition};
pub use sync::{SyncMethod, SyncResult};
