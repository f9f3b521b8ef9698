//! Required edge labels and the adversaries that exploit a missing one.

use num_traits::{One, Zero};

use super::certificate::detect_scaling_loop;
use super::{check_rendezvous, Verdict};
use crate::engine::{run_steps, InitialConfig, OpKind, Trace};
use crate::model::{int, ratio, Color, LightGraph, MovementModel, Ratio, SchedulerClass};
use crate::schedules::ScheduleStep;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LabelAdversary {
    /// No 1/2 label: both robots every round (FSYNC).
    Simultaneous,
    /// No 1 label: one robot per round, alternating.
    Alternate,
    /// No 0 label: alternate, but activate both whenever the scheduled robot
    /// would jump onto its partner.
    AlternateJoinOnJump,
}

impl LabelAdversary {
    pub fn name(&self) -> &'static str {
        match self {
            LabelAdversary::Simultaneous => "sim",
            LabelAdversary::Alternate => "alternate",
            LabelAdversary::AlternateJoinOnJump => "alternate-join",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralReport {
    pub has_half: bool,
    pub has_one: bool,
    pub has_zero: bool,
}

impl StructuralReport {
    fn of_labels<'a>(labels: impl IntoIterator<Item = &'a Ratio>) -> Self {
        let mut r = StructuralReport {
            has_half: false,
            has_one: false,
            has_zero: false,
        };
        for l in labels {
            r.has_half |= *l == ratio(1, 2);
            r.has_one |= l.is_one();
            r.has_zero |= l.is_zero();
        }
        r
    }

    pub fn complete(&self) -> bool {
        self.has_half && self.has_one && self.has_zero
    }

    /// Adversaries applicable to the missing labels, in label order 1/2, 1, 0.
    pub fn adversaries(&self) -> Vec<LabelAdversary> {
        let mut out = Vec::new();
        if !self.has_half {
            out.push(LabelAdversary::Simultaneous);
        }
        if !self.has_one {
            out.push(LabelAdversary::Alternate);
        }
        if !self.has_zero {
            out.push(LabelAdversary::AlternateJoinOnJump);
        }
        out
    }

    pub fn missing(&self) -> String {
        let mut m = Vec::new();
        if !self.has_half {
            m.push("1/2");
        }
        if !self.has_one {
            m.push("1");
        }
        if !self.has_zero {
            m.push("0");
        }
        if m.is_empty() {
            "none".into()
        } else {
            m.join("|")
        }
    }
}

/// Labels present anywhere in the graph.
pub fn structural_check(g: &LightGraph) -> StructuralReport {
    StructuralReport::of_labels(g.colors().map(|c| &g.edge(c).lambda))
}

/// Labels on edges leaving colors reachable from `start`; from `(X,X)` the
/// robots only ever show and observe these colors under the adversaries.
pub fn reachable_labels(g: &LightGraph, start: Color) -> StructuralReport {
    let mut seen = vec![false; g.num_colors()];
    let mut c = start;
    while !seen[c.index()] {
        seen[c.index()] = true;
        c = g.edge(c).next;
    }
    StructuralReport::of_labels(g.colors().filter(|c| seen[c.index()]).map(|c| &g.edge(c).lambda))
}

/// Runs a deterministic adversary in SSYNC, Rigid, from `(start,start;1)`.
pub fn label_adversary(g: &LightGraph, start: Color, adversary: LabelAdversary, rounds: u64) -> (Trace, Verdict) {
    let initial = InitialConfig::new(start, start, int(1));
    let cls = SchedulerClass::SSYNC;
    let mut steps = Vec::new();
    // colors only: in SSYNC both robots are idle between rounds
    let mut lights = [start, start];
    let mut turn = 0;
    for k in 0..rounds {
        let active = match adversary {
            LabelAdversary::Simultaneous => [true, true],
            LabelAdversary::Alternate => [turn == 0, turn == 1],
            LabelAdversary::AlternateJoinOnJump => {
                let jumps = g.transition(lights[1 - turn]).1.is_one();
                if jumps {
                    [true, true]
                } else {
                    [turn == 0, turn == 1]
                }
            }
        };
        let t = 2 * k + 1;
        let op = |a: bool, o: OpKind| if a { o } else { OpKind::Noop };
        steps.push(ScheduleStep::new(
            t,
            [op(active[0], OpKind::LC), op(active[1], OpKind::LC)],
        ));
        steps.push(ScheduleStep::new(
            t + 1,
            [op(active[0], OpKind::M), op(active[1], OpKind::M)],
        ));
        let seen = lights;
        for i in 0..2 {
            if active[i] {
                lights[i] = g.transition(seen[1 - i]).0;
            }
        }
        turn = 1 - turn;
    }
    let trace = run_steps(g, &steps, &initial, cls, &MovementModel::Rigid).expect("adversary schedules are legal");
    let cert = detect_scaling_loop(&trace, &initial);
    let verdict = check_rendezvous(&trace, cert);
    (trace, verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{builtin, AlgorithmId};

    #[test]
    fn builtins_have_all_labels() {
        for id in [AlgorithmId::Ss3, AlgorithmId::Ss5, AlgorithmId::Qss4] {
            assert!(structural_check(&builtin(&id).unwrap()).complete());
        }
    }

    #[test]
    fn half_only() {
        let g = LightGraph::from_edges(vec![(Color(1), ratio(1, 2)), (Color(0), ratio(1, 2))]);
        let r = structural_check(&g);
        assert_eq!(
            r.adversaries(),
            vec![LabelAdversary::Alternate, LabelAdversary::AlternateJoinOnJump]
        );
        let (_, v) = label_adversary(&g, Color(0), LabelAdversary::Alternate, 40);
        let cert = v.certificate().expect("diverges");
        cert.validate().unwrap();
    }

    #[test]
    fn no_half_defeated_by_sim() {
        let g = LightGraph::from_edges(vec![(Color(1), int(0)), (Color(0), int(1))]);
        let (_, v) = label_adversary(&g, Color(0), LabelAdversary::Simultaneous, 40);
        assert_eq!(v.certificate().expect("diverges").ratio, int(1));
    }

    #[test]
    fn no_zero_defeated_by_join() {
        let g = LightGraph::from_edges(vec![(Color(1), ratio(1, 2)), (Color(0), int(1))]);
        let (_, v) = label_adversary(&g, Color(0), LabelAdversary::AlternateJoinOnJump, 40);
        v.certificate().expect("diverges").validate().unwrap();
    }

    #[test]
    fn ss3_needs_every_label() {
        let g = builtin(&AlgorithmId::Ss3).unwrap();
        let (_, v) = label_adversary(&g, Color(0), LabelAdversary::Alternate, 40);
        assert!(matches!(v, Verdict::Rendezvous { .. }));
    }
}
