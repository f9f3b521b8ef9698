//! Empirical, horizon-bounded stabilization class of an algorithm.

use std::fmt;

use super::search::{adversary_search, same_color_starts, SearchConfig, SearchOutcome};
use super::Verdict;
use crate::engine::InitialConfig;
use crate::model::{int, LightGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    SelfStabilizing,
    QuasiSelfStabilizing,
    NonQuasiSelfStabilizing,
    NotSolving,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::SelfStabilizing => "SelfStabilizing",
            Classification::QuasiSelfStabilizing => "QuasiSelfStabilizing",
            Classification::NonQuasiSelfStabilizing => "NonQuasiSelfStabilizing",
            Classification::NotSolving => "NotSolving",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub classification: Classification,
    pub same_color: Vec<SearchOutcome>,
    /// One start per unordered pair of distinct colors.
    pub mixed: Vec<SearchOutcome>,
}

fn met(o: &SearchOutcome) -> bool {
    matches!(o.verdict, Verdict::Rendezvous { .. })
}

/// Searches every same-color start and every unordered mixed start at the
/// distance of `cfg.initial[0]` (1 if empty); `cfg.initial` is otherwise
/// ignored. Only certified divergence counts against a class, so inconclusive
/// starts can leave an algorithm at `NotSolving`.
pub fn classify_stabilization(g: &LightGraph, cfg: &SearchConfig) -> ClassificationReport {
    let d = cfg.initial.first().map_or(int(1), |i| i.distance.clone());
    let same = SearchConfig {
        initial: same_color_starts(g, &d),
        ..cfg.clone()
    };
    let mixed_starts: Vec<InitialConfig> = g
        .colors()
        .flat_map(|a| g.colors().filter(move |b| a < *b).map(move |b| (a, b)))
        .map(|(a, b)| InitialConfig::new(a, b, d.clone()))
        .collect();
    let same_color = adversary_search(g, &same);
    let all_same = same_color.iter().all(met);
    let mixed = if all_same {
        adversary_search(
            g,
            &SearchConfig {
                initial: mixed_starts,
                ..cfg.clone()
            },
        )
    } else {
        Vec::new()
    };
    let diverges = |o: &SearchOutcome| matches!(o.verdict, Verdict::Diverges { .. });
    let classification = if all_same && mixed.iter().all(met) {
        Classification::SelfStabilizing
    } else if all_same && mixed.iter().any(diverges) {
        Classification::QuasiSelfStabilizing
    } else if same_color.iter().any(diverges) && same_color.iter().any(met) {
        Classification::NonQuasiSelfStabilizing
    } else {
        Classification::NotSolving
    };
    ClassificationReport {
        classification,
        same_color,
        mixed,
    }
}
