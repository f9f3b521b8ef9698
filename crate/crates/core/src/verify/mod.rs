//! Verdicts, certificates, counterexample replays, and bounded adversary search.

mod certificate;
mod classify;
mod monitors;
mod replay;
mod search;
mod structural;

pub use certificate::{
    detect_scaling_loop, CertificateError, CertificateJson, ConfigJson, ScalingLoopCertificate, VALIDATION_REPEATS,
};
pub use classify::{classify_stabilization, Classification, ClassificationReport};
pub use monitors::{check_lemma12_stationary, check_lemma13_pattern, check_same_lc_progress};
pub use monitors::{MonitorSpec, MonitorState, Violation as PropertyViolation};
pub use replay::{replay_paper_counterexample, ClaimedConfig, CounterexampleReplay, ReplayError, REPLAY_NAMES};
pub use search::{
    adversary_search, all_starts, find_certificate, reachable_cs_color_pairs, same_color_starts, SearchConfig,
    SearchOutcome,
};
pub use structural::{label_adversary, reachable_labels, structural_check, LabelAdversary, StructuralReport};

use crate::engine::Trace;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every explored branch met; `time` is the latest meeting time.
    Rendezvous {
        time: u64,
    },
    Diverges {
        certificate: Box<ScalingLoopCertificate>,
    },
    InconclusiveAtHorizon {
        horizon: u64,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Rendezvous { .. } => "Rendezvous",
            Verdict::Diverges { .. } => "Diverges",
            Verdict::InconclusiveAtHorizon { .. } => "Inconclusive",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Rendezvous { .. } => 0,
            Verdict::Diverges { .. } => 2,
            Verdict::InconclusiveAtHorizon { .. } => 3,
        }
    }

    pub fn certificate(&self) -> Option<&ScalingLoopCertificate> {
        match self {
            Verdict::Diverges { certificate } => Some(certificate),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Verdict::Diverges { .. } => 2,
            Verdict::InconclusiveAtHorizon { .. } => 1,
            Verdict::Rendezvous { .. } => 0,
        }
    }
}

/// Diverges dominates, then Inconclusive, then Rendezvous. Among equals the
/// earliest wins, so the result does not depend on evaluation order.
pub fn aggregate<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> Option<&'a Verdict> {
    let mut best: Option<&Verdict> = None;
    for v in verdicts {
        let better = match best {
            None => true,
            Some(b) => match v.rank().cmp(&b.rank()) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Equal => match (v, b) {
                    (Verdict::Rendezvous { time: a }, Verdict::Rendezvous { time: c }) => a > c,
                    _ => false,
                },
                std::cmp::Ordering::Less => false,
            },
        };
        if better {
            best = Some(v);
        }
    }
    best
}

/// Verdict for a single finished trace.
pub fn check_rendezvous(trace: &Trace, certificate: Option<ScalingLoopCertificate>) -> Verdict {
    if let Some(time) = trace.rendezvous_time() {
        return Verdict::Rendezvous { time };
    }
    match certificate {
        Some(c) => Verdict::Diverges {
            certificate: Box::new(c),
        },
        None => Verdict::InconclusiveAtHorizon {
            horizon: trace.last_time(),
        },
    }
}
