//! Trace properties checked step by step: the stationary partner, the shrink
//! pattern from a `{B,C}` cycle start, and progress under simultaneous LCs.

use num_traits::{Signed, Zero};

use crate::engine::{distance_at, is_cs_state, is_rendezvous, OpKind, Pair, SimState, Trace};
use crate::model::{ratio, Color, LightGraph, MovementModel, Position, Ratio};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub property: &'static str,
    pub times: Vec<u64>,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} at {:?}: {}", self.property, self.times, self.detail)
    }
}

/// Which properties to watch, in terms of the graph's colors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonitorSpec {
    /// `(alpha, beta)`: a robot showing `beta` against a partner showing
    /// `alpha` keeps its color and position until the partner's next LC.
    pub stationary: Vec<(Color, Color)>,
    /// From an unordered cycle-start pair, the next differing cycle-start pair
    /// must be one of these with the distance reduced by δ, or distance 0.
    pub shrink: Option<((Color, Color), Vec<(Color, Color)>)>,
    /// The color whose edge is labeled 1/2; under simultaneous LCs each round
    /// from this color reduces the distance by 2δ or to 0.
    pub halving: Option<Color>,
    pub delta: Ratio,
    pub rigid: bool,
}

fn unordered(a: Color, b: Color) -> (Color, Color) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MonitorSpec {
    /// Stationary pairs are the λ=0 edges `alpha → beta`; the halving color is
    /// the one with label 1/2.
    pub fn for_graph(g: &LightGraph, movement: &MovementModel) -> Self {
        let stationary = g
            .colors()
            .filter_map(|a| {
                let e = g.edge(a);
                (e.next != a && e.lambda.is_zero()).then_some((a, e.next))
            })
            .collect();
        let halving = g.colors().find(|c| g.edge(*c).lambda == ratio(1, 2));
        MonitorSpec {
            stationary,
            shrink: None,
            halving,
            delta: movement.delta().cloned().unwrap_or_else(Ratio::zero),
            rigid: movement.is_rigid(),
        }
    }

    /// Adds the shrink pattern `{B,C}` → `{C,D}` or `{D,A}` (four-color names).
    pub fn with_bc_shrink(mut self, g: &LightGraph) -> Self {
        let c = |n: &str| g.color_by_name(n);
        if let (Some(a), Some(b), Some(cc), Some(d)) = (c("A"), c("B"), c("C"), c("D")) {
            self.shrink = Some((unordered(b, cc), vec![unordered(cc, d), unordered(d, a)]));
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Watch {
    alpha_robot: usize,
    beta: Color,
    position: Position,
    since: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonitorState {
    watches: Vec<Watch>,
    obligation: Option<(Ratio, u64)>,
    same_lc: bool,
    last_halving: Option<(Ratio, u64)>,
}

impl Default for MonitorState {
    fn default() -> Self {
        MonitorState {
            watches: Vec::new(),
            obligation: None,
            same_lc: true,
            last_halving: None,
        }
    }
}

impl MonitorState {
    /// Registers the starting state at `t0`.
    pub fn start(spec: &MonitorSpec, g: &LightGraph, state: &SimState, t0: u64) -> Result<Self, Violation> {
        let mut m = MonitorState::default();
        m.at_time(spec, g, state, t0)?;
        Ok(m)
    }

    /// Feeds the step at `t`: `before` is in effect at `t`, `after` from `t+1`.
    pub fn observe(
        &mut self,
        spec: &MonitorSpec,
        g: &LightGraph,
        before: &SimState,
        t: u64,
        ops: &Pair<OpKind>,
        after: &SimState,
    ) -> Result<(), Violation> {
        // a watch covers the alpha robot's next LC time itself, not beyond
        self.watches.retain(|w| !ops[w.alpha_robot].looks());

        let lc = [ops[0].looks(), ops[1].looks()];
        if lc[0] != lc[1] {
            self.same_lc = false;
            self.last_halving = None;
        } else if lc[0] && self.same_lc {
            let d = distance_at(before, t);
            if let Some((prev, since)) = &self.last_halving {
                let ok = d.is_zero() || (!spec.rigid && d <= prev - &spec.delta - &spec.delta);
                if !ok {
                    return Err(Violation {
                        property: "same-lc-progress",
                        times: vec![*since, t],
                        detail: format!("distance {prev} -> {d} after a halving round"),
                    });
                }
            }
            let halving = spec
                .halving
                .is_some_and(|h| before[0].light == h && before[1].light == h);
            self.last_halving = halving.then_some((d, t));
        }
        if is_rendezvous(after, t + 1, g) {
            self.obligation = None;
        }
        self.at_time(spec, g, after, t + 1)
    }

    fn at_time(&mut self, spec: &MonitorSpec, g: &LightGraph, state: &SimState, t: u64) -> Result<(), Violation> {
        for w in &self.watches {
            let o = &state[1 - w.alpha_robot];
            if o.light != w.beta || o.position_at(t) != w.position {
                return Err(Violation {
                    property: "stationary-partner",
                    times: vec![w.since, t],
                    detail: format!(
                        "partner showing {} left {} (now {} at {})",
                        g.name(w.beta),
                        w.position,
                        g.name(o.light),
                        o.position_at(t)
                    ),
                });
            }
        }
        if !is_cs_state(state, t, g) {
            return Ok(());
        }
        let d = distance_at(state, t);
        let pair = unordered(state[0].light, state[1].light);
        if let Some(((from, to), (d_c, since))) = spec.shrink.as_ref().zip(self.obligation.as_ref()) {
            if pair != *from {
                let shrunk = if spec.rigid { d < *d_c } else { d <= d_c - &spec.delta };
                if !(d.is_zero() || (shrunk && to.contains(&pair))) {
                    return Err(Violation {
                        property: "bc-shrink",
                        times: vec![*since, t],
                        detail: format!(
                            "from distance {d_c} reached {{{},{}}} at distance {d}",
                            g.name(pair.0),
                            g.name(pair.1)
                        ),
                    });
                }
                self.obligation = None;
            }
        }
        if let Some((from, _)) = &spec.shrink {
            if pair == *from && self.obligation.is_none() && d.is_positive() {
                self.obligation = Some((d.clone(), t));
            }
        }
        for alpha_robot in 0..2 {
            let (a, b) = (state[alpha_robot].light, state[1 - alpha_robot].light);
            if spec.stationary.contains(&(a, b)) && !self.watches.iter().any(|w| w.alpha_robot == alpha_robot) {
                self.watches.push(Watch {
                    alpha_robot,
                    beta: b,
                    position: state[1 - alpha_robot].position_at(t),
                    since: t,
                });
            }
        }
        Ok(())
    }

    /// Search-key material: positions to translate, lengths to scale, and tags.
    pub(crate) fn key_parts(&self, swap: bool) -> (Vec<i64>, Vec<Position>, Vec<Ratio>) {
        let mut tags = vec![self.same_lc as i64];
        let mut points = Vec::new();
        let mut watches: Vec<&Watch> = self.watches.iter().collect();
        if swap {
            watches.reverse();
        }
        for w in watches {
            let robot = if swap { 1 - w.alpha_robot } else { w.alpha_robot };
            tags.extend([robot as i64, w.beta.0 as i64]);
            points.push(w.position.clone());
        }
        let mut lengths = Vec::new();
        for (i, item) in [&self.obligation, &self.last_halving].into_iter().enumerate() {
            if let Some((d, _)) = item {
                tags.push(10 + i as i64);
                lengths.push(d.clone());
            }
        }
        (tags, points, lengths)
    }
}

fn check_trace(trace: &Trace, spec: &MonitorSpec) -> Result<(), Violation> {
    let g = &trace.graph;
    let mut m = MonitorState::start(spec, g, &trace.initial, trace.t0)?;
    let mut before = &trace.initial;
    for st in &trace.steps {
        m.observe(spec, g, before, st.time, &st.ops, &st.after)?;
        before = &st.after;
    }
    Ok(())
}

/// Only the stationary-partner property of `spec`.
pub fn check_lemma12_stationary(trace: &Trace, spec: &MonitorSpec) -> Result<(), Violation> {
    let only = MonitorSpec {
        shrink: None,
        halving: None,
        ..spec.clone()
    };
    check_trace(trace, &only)
}

/// Only the shrink pattern of `spec`.
pub fn check_lemma13_pattern(trace: &Trace, spec: &MonitorSpec) -> Result<(), Violation> {
    let only = MonitorSpec {
        stationary: Vec::new(),
        halving: None,
        ..spec.clone()
    };
    check_trace(trace, &only)
}

/// Only the simultaneous-LC progress property of `spec`.
pub fn check_same_lc_progress(trace: &Trace, spec: &MonitorSpec) -> Result<(), Violation> {
    let only = MonitorSpec {
        stationary: Vec::new(),
        shrink: None,
        ..spec.clone()
    };
    check_trace(trace, &only)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{builtin, AlgorithmId};
    use crate::engine::{run_steps, InitialConfig, TraceStep};
    use crate::model::{int, SchedulerClass};
    use crate::schedules::{random_schedule, RandomScheduleOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qss4_spec(movement: &MovementModel) -> (LightGraph, MonitorSpec) {
        let g = builtin(&AlgorithmId::Qss4).unwrap();
        let spec = MonitorSpec::for_graph(&g, movement).with_bc_shrink(&g);
        (g, spec)
    }

    #[test]
    fn spec_from_qss4() {
        let (g, spec) = qss4_spec(&MovementModel::non_rigid(ratio(1, 4)));
        let c = |n| g.color_by_name(n).unwrap();
        assert_eq!(spec.stationary, vec![(c("B"), c("C")), (c("D"), c("A"))]);
        assert_eq!(spec.halving, Some(c("A")));
    }

    #[test]
    fn random_traces_from_bc_hold() {
        let movement = MovementModel::non_rigid(ratio(1, 4));
        let (g, spec) = qss4_spec(&movement);
        let (b, c) = (g.color_by_name("B").unwrap(), g.color_by_name("C").unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let opts = RandomScheduleOptions {
            fractions: vec![ratio(0, 1), ratio(1, 2), ratio(1, 1)],
            ..Default::default()
        };
        for d in [int(1), ratio(1, 8)] {
            for _ in 0..200 {
                let steps = random_schedule(&mut rng, SchedulerClass::LC_ATOMIC, &opts);
                let tr = run_steps(
                    &g,
                    &steps,
                    &InitialConfig::new(b, c, d.clone()),
                    SchedulerClass::LC_ATOMIC,
                    &movement,
                )
                .unwrap();
                check_lemma12_stationary(&tr, &spec).unwrap();
                check_lemma13_pattern(&tr, &spec).unwrap();
            }
        }
    }

    #[test]
    fn corrupted_trace_is_caught() {
        let movement = MovementModel::non_rigid(ratio(1, 4));
        let (g, spec) = qss4_spec(&movement);
        let (b, c) = (g.color_by_name("B").unwrap(), g.color_by_name("C").unwrap());
        let tr0 = run_steps(
            &g,
            &[],
            &InitialConfig::new(b, c, int(1)),
            SchedulerClass::LC_ATOMIC,
            &movement,
        )
        .unwrap();
        let mut tr = tr0.clone();
        let mut moved = tr.initial.clone();
        moved[1].position = ratio(1, 2);
        tr.steps.push(TraceStep {
            time: 1,
            ops: [OpKind::Noop, OpKind::Noop],
            fractions: [None, None],
            after: moved,
        });
        let v = check_lemma12_stationary(&tr, &spec).unwrap_err();
        assert_eq!(v.property, "stationary-partner");
        assert_eq!(v.times, vec![0, 2]);
    }

    #[test]
    fn same_lc_rounds_shrink() {
        let movement = MovementModel::non_rigid(ratio(1, 4));
        let (g, spec) = qss4_spec(&movement);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let opts = RandomScheduleOptions {
            same_lc: true,
            fractions: vec![ratio(0, 1), ratio(1, 1)],
            ..Default::default()
        };
        for c in g.colors() {
            for _ in 0..100 {
                let steps = random_schedule(&mut rng, SchedulerClass::LC_ATOMIC, &opts);
                let tr = run_steps(
                    &g,
                    &steps,
                    &InitialConfig::new(c, c, int(1)),
                    SchedulerClass::LC_ATOMIC,
                    &movement,
                )
                .unwrap();
                check_same_lc_progress(&tr, &spec).unwrap();
                assert!(tr.rendezvous_time().is_some());
            }
        }
    }
}
