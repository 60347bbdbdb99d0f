//! Block-failure-resilient regenerating codes.
//!
//! A distributed storage system groups its `n` nodes into `b` correlated
//! failure domains (blocks). The codes in this crate keep two contracts
//! under whole-block failures:
//!
//! * **load-balanced data collection** — the file is recoverable by reading
//!   the same number of nodes, `k / (b - rho)`, from each of any `b - rho`
//!   live blocks;
//! * **cross-block node repair** — any node of a failed block is rebuilt
//!   bit-identically by downloading `beta` symbols from `d / (b - 1)` nodes
//!   of each of the other `b - 1` blocks.
//!
//! Three constructions are provided: a two-block transpose code, a
//! projective-plane placement of product-matrix sub-codes (minimum-storage
//! and minimum-bandwidth variants), and a rank-metric precoded variant that
//! tolerates `rho > 0` missing blocks at collection time. A bounds engine
//! computes the exact file-size limits and operating points these codes
//! achieve and cross-checks them against an information-flow-graph max-flow
//! oracle. A deterministic failure/repair simulator accounts every
//! downloaded symbol.
//!
//! Modules map one-to-one onto the subsystems: [`field`], [`design`],
//! [`regen`], [`bfr`], [`gabidulin`], [`bounds`], [`sim`], [`verify`].

pub mod bfr;
pub mod bounds;
pub mod design;
pub mod field;
pub mod gabidulin;
pub mod regen;
pub mod sim;
pub mod verify;

pub use bfr::{BfrParams, BfrSystem, Construction, Descriptor, HelperSet, Repair, SystemState};
pub use bounds::{Rational, TradeoffPoint};
pub use design::Design;
pub use field::{Field, FieldElement, FieldError, FieldSpec, Matrix};
pub use gabidulin::GabidulinCode;
pub use regen::{RegenCodeKind, RegenParams, SubCode, SubCodeword};
pub use sim::{BandwidthLedger, Trace, TraceReport};
pub use verify::{VerifyLevel, VerifyReport};

#[cfg(test)]
mod thread_safety {
    use super::*;

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn shared_types_are_send_and_sync() {
        // fields, codes and built systems are immutable and freely shared
        // across threads; states are single-writer via &mut
        assert_send_sync::<Field>();
        assert_send_sync::<FieldElement>();
        assert_send_sync::<Matrix>();
        assert_send_sync::<Design>();
        assert_send_sync::<SubCode>();
        assert_send_sync::<GabidulinCode>();
        assert_send_sync::<BfrSystem>();
        assert_send_sync::<SystemState>();
    }

    #[test]
    fn concurrent_reads_of_one_system() {
        use regen::RegenParams;
        let field = Field::gf_default(8).unwrap();
        let sys = std::sync::Arc::new(
            BfrSystem::plane_placement(field, 2, RegenParams::msr(6, 3).unwrap()).unwrap(),
        );
        let file = verify::synthetic_file(sys.field(), 42, 77);
        let state = std::sync::Arc::new(sys.encode(&file).unwrap());
        let handles: Vec<_> = (0..4)
            .map(|t| {
                let sys = sys.clone();
                let state = state.clone();
                let file = file.clone();
                std::thread::spawn(move || {
                    let blocks: Vec<usize> = (0..7).collect();
                    let nodes: Vec<Vec<usize>> = (0..7).map(|b| vec![(b + t) % 2]).collect();
                    assert_eq!(sys.collect(&state, &blocks, &nodes).unwrap(), file);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
    }
}
