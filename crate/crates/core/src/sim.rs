//! Deterministic failure-and-repair exerciser: replays a trace of block
//! failures, whole-block repairs and collections against a system state,
//! accounting every downloaded symbol and checking the data-collection
//! contract. Time is a logical counter; at most one block is down at any
//! instant (sigma = 1), and traces requesting overlapping failures are
//! rejected before execution.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bfr::{BfrError, BfrParams, BfrSystem, HelperSet};
use crate::field::FieldElement;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Bfr(#[from] BfrError),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error(
        "collect mismatch at time {time}: blocks {blocks:?}, nodes {nodes:?}, \
         first differing symbol index {first_diff}"
    )]
    CollectMismatch {
        time: u64,
        blocks: Vec<usize>,
        nodes: Vec<Vec<usize>>,
        first_diff: usize,
    },
    #[error("repair mismatch at time {time}: block {block} node {node}")]
    RepairMismatch {
        time: u64,
        block: usize,
        node: usize,
    },
    #[error(
        "bandwidth mismatch at time {time}: block {block} node {node} downloaded {downloaded}, \
         operating point claims {expected}"
    )]
    BandwidthMismatch {
        time: u64,
        block: usize,
        node: usize,
        downloaded: u64,
        expected: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEventKind {
    BlockFail {
        block: usize,
    },
    /// Repair every node of the currently failed block, then revive it.
    RepairAll {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        helpers: Option<Vec<HelperSet>>,
    },
    Collect {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        blocks: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nodes: Option<Vec<Vec<usize>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: u64,
    #[serde(flatten)]
    pub kind: TraceEventKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub seed: u64,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(s: &str) -> Result<Trace, SimError> {
        serde_json::from_str(s).map_err(|e| SimError::InvalidTrace(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairRecord {
    pub time: u64,
    pub block: usize,
    pub node: usize,
    pub downloaded: u64,
}

/// Every symbol downloaded during repairs, per node and in total.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandwidthLedger {
    pub repairs: Vec<RepairRecord>,
    pub total_downloaded: u64,
}

impl BandwidthLedger {
    fn record(&mut self, rec: RepairRecord) {
        self.total_downloaded += rec.downloaded;
        self.repairs.push(rec);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceReport {
    pub events_run: usize,
    pub collects: usize,
    pub collect_successes: usize,
    pub repairs: usize,
    pub repairs_exact: bool,
    /// None when the trace leaves too few live blocks to attempt the final
    /// canonical collection.
    pub durability_ok: Option<bool>,
    pub ledger: BandwidthLedger,
}

/// Walk the trace symbolically and reject invariant violations before any
/// state is touched.
fn validate_trace(params: &BfrParams, trace: &Trace) -> Result<(), SimError> {
    let mut dead: Option<usize> = None;
    for (i, ev) in trace.events.iter().enumerate() {
        match &ev.kind {
            TraceEventKind::BlockFail { block } => {
                if *block >= params.b {
                    return Err(SimError::InvalidTrace(format!(
                        "event {i}: block {block} out of range"
                    )));
                }
                if let Some(down) = dead {
                    return Err(SimError::InvalidTrace(format!(
                        "event {i}: block failure while block {down} is down (sigma = 1)"
                    )));
                }
                dead = Some(*block);
            }
            TraceEventKind::RepairAll { helpers } => {
                let Some(failed) = dead else {
                    return Err(SimError::InvalidTrace(format!(
                        "event {i}: repair with no failed block"
                    )));
                };
                if let Some(hs) = helpers {
                    if hs.iter().any(|h| h.block == failed) {
                        return Err(SimError::InvalidTrace(format!(
                            "event {i}: helper set names the failed block {failed}"
                        )));
                    }
                }
                dead = None;
            }
            TraceEventKind::Collect { blocks, nodes } => {
                if blocks.is_some() != nodes.is_some() {
                    return Err(SimError::InvalidTrace(format!(
                        "event {i}: collect must name blocks and nodes together"
                    )));
                }
                if let Some(bs) = blocks {
                    if bs.len() != params.collect_block_count() {
                        return Err(SimError::InvalidTrace(format!(
                            "event {i}: collect names {} blocks, needs {}",
                            bs.len(),
                            params.collect_block_count()
                        )));
                    }
                    if let Some(d) = dead {
                        if bs.contains(&d) {
                            return Err(SimError::InvalidTrace(format!(
                                "event {i}: collect reads dead block {d}"
                            )));
                        }
                    }
                } else if dead.is_some() && params.rho == 0 {
                    return Err(SimError::InvalidTrace(format!(
                        "event {i}: canonical collect impossible with a dead block at rho = 0"
                    )));
                }
                if let Some(ns) = nodes {
                    for choice in ns {
                        if choice.len() != params.collect_per_block() {
                            return Err(SimError::InvalidTrace(format!(
                                "event {i}: collect reads {} nodes per block, needs {}",
                                choice.len(),
                                params.collect_per_block()
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Replay a trace against a fresh encoding of `file`. Any collect returning
/// the wrong file or repair returning wrong bytes aborts with the
/// counterexample; otherwise the report carries the full ledger.
pub fn run_trace(
    system: &BfrSystem,
    file: &[FieldElement],
    trace: &Trace,
) -> Result<TraceReport, SimError> {
    validate_trace(system.params(), trace)?;
    let pristine = system.encode(file)?;
    let mut state = pristine.clone();
    let mut ledger = BandwidthLedger::default();
    let gamma = system.params().gamma() as u64;
    let mut collects = 0;
    let mut collect_successes = 0;
    let mut repairs = 0;
    for ev in &trace.events {
        match &ev.kind {
            TraceEventKind::BlockFail { block } => {
                state.fail_block(*block)?;
            }
            TraceEventKind::RepairAll { helpers } => {
                let failed = (0..system.params().b)
                    .find(|&b| !state.is_alive(b))
                    .expect("validated: a block is down");
                let choice = match helpers {
                    Some(h) => h.clone(),
                    None => system.default_helper_choice(failed),
                };
                for node in 0..system.params().block_capacity() {
                    let rep = system.repair_node(&state, failed, node, &choice)?;
                    if rep.content != pristine.node(failed, node)? {
                        return Err(SimError::RepairMismatch {
                            time: ev.time,
                            block: failed,
                            node,
                        });
                    }
                    if rep.downloaded != gamma {
                        return Err(SimError::BandwidthMismatch {
                            time: ev.time,
                            block: failed,
                            node,
                            downloaded: rep.downloaded,
                            expected: gamma,
                        });
                    }
                    ledger.record(RepairRecord {
                        time: ev.time,
                        block: failed,
                        node,
                        downloaded: rep.downloaded,
                    });
                    state.set_node(failed, node, rep.content)?;
                    repairs += 1;
                }
                state.revive_block(failed)?;
            }
            TraceEventKind::Collect { blocks, nodes } => {
                let (bs, ns) = match (blocks, nodes) {
                    (Some(bs), Some(ns)) => (bs.clone(), ns.clone()),
                    _ => system.default_collect_choice(&state)?,
                };
                collects += 1;
                let got = system.collect(&state, &bs, &ns)?;
                if got != file {
                    let first_diff = got
                        .iter()
                        .zip(file)
                        .position(|(a, b)| a != b)
                        .unwrap_or(got.len().min(file.len()));
                    return Err(SimError::CollectMismatch {
                        time: ev.time,
                        blocks: bs,
                        nodes: ns,
                        first_diff,
                    });
                }
                collect_successes += 1;
            }
        }
    }
    // durability: a canonical collect after the whole trace
    let durability_ok = match system.default_collect_choice(&state) {
        Ok((bs, ns)) => Some(system.collect(&state, &bs, &ns)? == file),
        Err(_) => None,
    };
    Ok(TraceReport {
        events_run: trace.events.len(),
        collects,
        collect_successes,
        repairs,
        repairs_exact: true,
        durability_ok,
        ledger,
    })
}

/// Reproducible random trace: uniform block choice for failures, uniform
/// admissible node and helper choices, never more than one block down, and
/// never ending with a dead block.
pub fn random_trace(seed: u64, length: usize, params: &BfrParams) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::with_capacity(length);
    let mut dead: Option<usize> = None;
    let all_blocks: Vec<usize> = (0..params.b).collect();
    let all_nodes: Vec<usize> = (0..params.block_capacity()).collect();
    for time in 0..length as u64 {
        let last = time as usize == length - 1;
        let kind = if let Some(failed) = dead {
            let helpers: Vec<HelperSet> = all_blocks
                .iter()
                .filter(|&&b| b != failed)
                .map(|&b| {
                    let mut nodes: Vec<usize> = all_nodes
                        .choose_multiple(&mut rng, params.repair_per_block())
                        .copied()
                        .collect();
                    nodes.sort_unstable();
                    HelperSet { block: b, nodes }
                })
                .collect();
            dead = None;
            TraceEventKind::RepairAll {
                helpers: Some(helpers),
            }
        } else if !last && rng.gen_bool(0.5) {
            let block = *all_blocks.choose(&mut rng).expect("b >= 2");
            dead = Some(block);
            TraceEventKind::BlockFail { block }
        } else {
            let mut blocks: Vec<usize> = all_blocks
                .choose_multiple(&mut rng, params.collect_block_count())
                .copied()
                .collect();
            blocks.sort_unstable();
            let nodes: Vec<Vec<usize>> = blocks
                .iter()
                .map(|_| {
                    let mut ns: Vec<usize> = all_nodes
                        .choose_multiple(&mut rng, params.collect_per_block())
                        .copied()
                        .collect();
                    ns.sort_unstable();
                    ns
                })
                .collect();
            TraceEventKind::Collect {
                blocks: Some(blocks),
                nodes: Some(nodes),
            }
        };
        events.push(TraceEvent { time, kind });
    }
    Trace { seed, events }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::regen::RegenParams;

    fn msr_system() -> BfrSystem {
        let f = Field::gf_default(8).unwrap();
        BfrSystem::plane_placement(f, 2, RegenParams::msr(6, 3).unwrap()).unwrap()
    }

    fn file_of(system: &BfrSystem, seed: u64) -> Vec<FieldElement> {
        let f = system.field();
        (0..system.params().file_len)
            .map(|i| f.element((seed * 37 + i as u64 * 11) % 256).unwrap())
            .collect()
    }

    #[test]
    fn fail_repair_collect_ledger() {
        let sys = msr_system();
        let file = file_of(&sys, 1);
        let trace = Trace {
            seed: 0,
            events: vec![
                TraceEvent {
                    time: 0,
                    kind: TraceEventKind::BlockFail { block: 0 },
                },
                TraceEvent {
                    time: 1,
                    kind: TraceEventKind::RepairAll { helpers: None },
                },
                TraceEvent {
                    time: 2,
                    kind: TraceEventKind::Collect {
                        blocks: None,
                        nodes: None,
                    },
                },
            ],
        };
        let report = run_trace(&sys, &file, &trace).unwrap();
        assert_eq!(report.collect_successes, 1);
        assert_eq!(report.repairs, 2);
        // two nodes repaired at gamma = 12 each
        assert_eq!(report.ledger.total_downloaded, 24);
        assert!(report.ledger.repairs.iter().all(|r| r.downloaded == 12));
        assert_eq!(report.durability_ok, Some(true));
    }

    #[test]
    fn empty_trace_is_trivial_success() {
        let sys = msr_system();
        let file = file_of(&sys, 2);
        let report = run_trace(
            &sys,
            &file,
            &Trace {
                seed: 0,
                events: vec![],
            },
        )
        .unwrap();
        assert_eq!(report.events_run, 0);
        assert_eq!(report.durability_ok, Some(true));
    }

    #[test]
    fn overlapping_failures_rejected_before_execution() {
        let sys = msr_system();
        let trace = Trace {
            seed: 0,
            events: vec![
                TraceEvent {
                    time: 0,
                    kind: TraceEventKind::BlockFail { block: 0 },
                },
                TraceEvent {
                    time: 1,
                    kind: TraceEventKind::BlockFail { block: 1 },
                },
            ],
        };
        let file = file_of(&sys, 3);
        assert!(matches!(
            run_trace(&sys, &file, &trace),
            Err(SimError::InvalidTrace(_))
        ));
    }

    #[test]
    fn repair_without_failure_rejected() {
        let sys = msr_system();
        let trace = Trace {
            seed: 0,
            events: vec![TraceEvent {
                time: 0,
                kind: TraceEventKind::RepairAll { helpers: None },
            }],
        };
        let file = file_of(&sys, 4);
        assert!(matches!(
            run_trace(&sys, &file, &trace),
            Err(SimError::InvalidTrace(_))
        ));
    }

    #[test]
    fn random_trace_is_deterministic() {
        let sys = msr_system();
        let a = random_trace(99, 40, sys.params());
        let b = random_trace(99, 40, sys.params());
        assert_eq!(a, b);
        let c = random_trace(100, 40, sys.params());
        assert_ne!(a, c);
        assert_eq!(random_trace(7, 0, sys.params()).events.len(), 0);
    }

    #[test]
    fn random_trace_collects_have_exact_counts() {
        let sys = msr_system();
        let trace = random_trace(5, 60, sys.params());
        for ev in &trace.events {
            if let TraceEventKind::Collect { blocks, nodes } = &ev.kind {
                let bs = blocks.as_ref().unwrap();
                let ns = nodes.as_ref().unwrap();
                assert_eq!(bs.len(), sys.params().collect_block_count());
                assert!(ns
                    .iter()
                    .all(|c| c.len() == sys.params().collect_per_block()));
            }
        }
        // and the full trace actually runs clean
        let file = file_of(&sys, 5);
        let report = run_trace(&sys, &file, &trace).unwrap();
        assert_eq!(report.collects, report.collect_successes);
        assert_eq!(report.durability_ok, Some(true));
    }

    #[test]
    fn hundred_event_transpose_trace() {
        let f = Field::gf_default(8).unwrap();
        let sys = BfrSystem::transpose(f, 8, 4).unwrap();
        let file = file_of(&sys, 6);
        let trace = random_trace(42, 100, sys.params());
        let report = run_trace(&sys, &file, &trace).unwrap();
        assert_eq!(report.collects, report.collect_successes);
        assert!(report.ledger.repairs.iter().all(|r| r.downloaded == 4));
        assert_eq!(report.durability_ok, Some(true));
    }

    #[test]
    fn trace_json_round_trip() {
        let sys = msr_system();
        let trace = random_trace(11, 20, sys.params());
        let json = trace.to_json();
        let back = Trace::from_json(&json).unwrap();
        assert_eq!(back, trace);
    }
}
