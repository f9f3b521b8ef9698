//! Bounded adversary search.
//!
//! At every time the adversary picks an operation pair, a stop fraction for
//! moves, and (when moves are not atomic) how long a move lasts. Fairness is
//! bounded: a robot able to act may be skipped at most `max_idle` times in a
//! row. Two searches run over this game:
//!
//! * a layered exploration from each start, deduplicating states up to
//!   translation and reflection (and scale in Rigid); it ends when every
//!   branch has met, or at the horizon;
//! * a depth-first search in Rigid movement for a state that recurs up to
//!   similarity, turned into a [`ScalingLoopCertificate`] and validated.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};

use super::certificate::{detect_scaling_loop, ScalingLoopCertificate};
use super::monitors::{MonitorSpec, MonitorState, Violation};
use super::Verdict;
use crate::engine::{
    initial_state, is_cs_state, is_rendezvous, run_steps, set_move_end, step, InitialConfig, OpKind, Pair, Phase,
    SimState,
};
use crate::model::{truncate_move, Color, LightGraph, MovementModel, Position, Ratio, SchedulerClass, SchedulerKind};
use crate::par::Parallelism;
use crate::schedules::ScheduleStep;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub horizon: u64,
    /// Adversarial stop fractions offered for every move.
    pub fractions: Vec<Ratio>,
    pub initial: Vec<InitialConfig>,
    pub scheduler: SchedulerClass,
    pub movement: MovementModel,
    pub max_idle: u32,
    /// Offered MB-to-ME spans when moves are not atomic; a span of 1 is `M`.
    pub move_durations: Vec<u64>,
    /// Depth bound for the certificate search; 0 disables it.
    pub certificate_depth: u64,
    /// Node budget for one certificate search.
    pub certificate_budget: usize,
    /// Layer width beyond which exploration gives up as inconclusive.
    pub max_layer: usize,
    pub monitors: Option<MonitorSpec>,
    pub parallelism: Parallelism,
}

impl SearchConfig {
    pub fn new(scheduler: SchedulerClass, movement: MovementModel, initial: Vec<InitialConfig>, horizon: u64) -> Self {
        SearchConfig {
            horizon,
            fractions: vec![Ratio::zero(), Ratio::one()],
            initial,
            scheduler,
            movement,
            max_idle: 2,
            move_durations: vec![1, 2],
            certificate_depth: horizon,
            certificate_budget: 200_000,
            max_layer: 400_000,
            monitors: None,
            parallelism: Parallelism::default(),
        }
    }
}

pub fn same_color_starts(g: &LightGraph, distance: &Ratio) -> Vec<InitialConfig> {
    g.colors().map(|c| InitialConfig::new(c, c, distance.clone())).collect()
}

/// All ordered color pairs.
pub fn all_starts(g: &LightGraph, distance: &Ratio) -> Vec<InitialConfig> {
    g.colors()
        .flat_map(|a| g.colors().map(move |b| (a, b)))
        .map(|(a, b)| InitialConfig::new(a, b, distance.clone()))
        .collect()
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub initial: InitialConfig,
    pub verdict: Verdict,
    /// States expanded by the exploration.
    pub explored: usize,
    /// Branches still open when the exploration stopped.
    pub open: usize,
    /// False when the layer cap cut the exploration short.
    pub exhaustive: bool,
    /// Unordered color pairs seen at cycle-start times.
    pub cs_pairs: BTreeSet<(Color, Color)>,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Node {
    pub state: SimState,
    pub idle: [u32; 2],
    pub monitor: Option<MonitorState>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Key {
    tags: Vec<i64>,
    coords: Vec<Ratio>,
}

const NONE: i64 = -1;

fn robot_parts(node: &Node, i: usize, t: u64, tags: &mut Vec<i64>, points: &mut Vec<Position>) {
    let r = &node.state[i];
    tags.push(r.light.0 as i64);
    tags.push(node.idle[i] as i64);
    points.push(r.position.clone());
    match &r.phase {
        Phase::Idle => tags.push(0),
        Phase::Computed => tags.push(1),
        Phase::Moving { to, begin, end } => {
            tags.extend([2, *begin as i64 - t as i64, end.map_or(NONE, |e| e as i64 - t as i64)]);
            points.push(to.clone());
        }
    }
    match &r.snapshot {
        Some(s) => {
            tags.push(s.other_light.0 as i64);
            points.push(s.other_position.clone());
            points.push(s.my_position.clone());
        }
        None => tags.push(NONE),
    }
    match &r.pending {
        Some(p) => {
            tags.push(p.next_light.0 as i64);
            points.push(p.dest.clone());
        }
        None => tags.push(NONE),
    }
}

fn oriented_key(node: &Node, t: u64, swap: bool, scale: bool) -> Key {
    let order = if swap { [1, 0] } else { [0, 1] };
    let mut tags = Vec::with_capacity(24);
    let mut points = Vec::with_capacity(12);
    for i in order {
        robot_parts(node, i, t, &mut tags, &mut points);
    }
    let mut lengths = Vec::new();
    if let Some(m) = &node.monitor {
        let (mt, mp, ml) = m.key_parts(swap);
        tags.extend(mt);
        points.extend(mp);
        lengths = ml;
    }
    let origin = points[0].clone();
    for p in points.iter_mut() {
        *p -= &origin;
    }
    if let Some(first) = points.iter().find(|p| !p.is_zero()).cloned() {
        if first.is_negative() {
            for p in points.iter_mut() {
                *p = -p.clone();
            }
        }
        if scale {
            let s = first.abs();
            for p in points.iter_mut().chain(lengths.iter_mut()) {
                *p /= &s;
            }
        }
    }
    points.extend(lengths);
    Key { tags, coords: points }
}

/// Canonical key over both robot orders; the flag tells whether the
/// canonical form exchanged the robots.
pub(crate) fn canonical_key(node: &Node, t: u64, movement: &MovementModel) -> (Key, bool) {
    let scale = movement.is_rigid();
    let a = oriented_key(node, t, false, scale);
    let b = oriented_key(node, t, true, scale);
    if b < a {
        (b, true)
    } else {
        (a, false)
    }
}

pub(crate) struct Transition {
    pub steps: Vec<ScheduleStep>,
    pub node: Node,
    /// Time from which `node` is in effect.
    pub time: u64,
}

#[derive(Clone)]
enum Choice {
    Wait,
    Op(OpKind, Option<Ratio>, Option<u64>),
}

fn stops(state: &SimState, i: usize, movement: &MovementModel, fractions: &[Ratio]) -> Vec<Option<Ratio>> {
    let r = &state[i];
    let Some(p) = &r.pending else {
        return vec![None];
    };
    let mut seen: Vec<Position> = Vec::new();
    let mut out = Vec::new();
    let full = [Ratio::one()];
    let fr = if fractions.is_empty() || movement.is_rigid() {
        &full[..]
    } else {
        fractions
    };
    for f in fr {
        let stop = truncate_move(&r.position, &p.dest, movement, f);
        if !seen.contains(&stop) {
            seen.push(stop);
            out.push(Some(f.clone()));
        }
    }
    out
}

fn robot_choices(node: &Node, i: usize, t: u64, cfg: &SearchConfig) -> (Vec<Choice>, bool) {
    let r = &node.state[i];
    let cls = cfg.scheduler;
    let mut out = vec![Choice::Wait];
    let can_act = match &r.phase {
        Phase::Idle if r.snapshot.is_none() => {
            out.push(Choice::Op(OpKind::LC, None, None));
            if !cls.lc_atomic {
                out.push(Choice::Op(OpKind::Look, None, None));
            }
            true
        }
        Phase::Idle => {
            out.push(Choice::Op(OpKind::Comp, None, None));
            true
        }
        Phase::Computed => {
            for f in stops(&node.state, i, &cfg.movement, &cfg.fractions) {
                out.push(Choice::Op(OpKind::M, f.clone(), None));
                if !cls.move_atomic {
                    for d in cfg.move_durations.iter().filter(|d| **d >= 2) {
                        out.push(Choice::Op(OpKind::MB, f.clone(), Some(t + d)));
                    }
                }
            }
            true
        }
        Phase::Moving { end, .. } => {
            if *end == Some(t) || end.is_none() {
                out = vec![Choice::Op(OpKind::ME, None, None)];
            }
            false
        }
    };
    if can_act && node.idle[i] >= cfg.max_idle {
        out.remove(0);
    }
    (out, can_act)
}

fn apply(
    node: &Node,
    t: u64,
    ops: Pair<OpKind>,
    fractions: Pair<Option<Ratio>>,
    ends: Pair<Option<u64>>,
    can_act: [bool; 2],
    cfg: &SearchConfig,
    g: &LightGraph,
) -> Option<(Node, ScheduleStep, Result<(), Violation>)> {
    let mut next = step(&node.state, t, ops, &fractions, cfg.scheduler, &cfg.movement, g).ok()?;
    for i in 0..2 {
        if let Some(e) = ends[i] {
            set_move_end(&mut next[i], e);
        }
    }
    let mut idle = node.idle;
    for i in 0..2 {
        idle[i] = if can_act[i] && ops[i] == OpKind::Noop {
            idle[i] + 1
        } else {
            0
        };
    }
    let mut monitor = node.monitor.clone();
    let mut check = Ok(());
    if let (Some(m), Some(spec)) = (monitor.as_mut(), cfg.monitors.as_ref()) {
        check = m.observe(spec, g, &node.state, t, &ops, &next);
    }
    let st = ScheduleStep {
        time: t,
        ops,
        fractions,
    };
    Some((
        Node {
            state: next,
            idle,
            monitor,
        },
        st,
        check,
    ))
}

/// Legal adversary moves from `node` at time `t`, with monitor results.
pub(crate) fn successors(
    node: &Node,
    t: u64,
    cfg: &SearchConfig,
    g: &LightGraph,
) -> Vec<(Transition, Result<(), Violation>)> {
    if cfg.scheduler.is_round_based() {
        return round_successors(node, t, cfg, g);
    }
    let (c0, a0) = robot_choices(node, 0, t, cfg);
    let (c1, a1) = robot_choices(node, 1, t, cfg);
    let can_act = [a0, a1];
    let mut out = Vec::new();
    for x in &c0 {
        for y in &c1 {
            let both_wait = matches!((x, y), (Choice::Wait, Choice::Wait));
            if both_wait && (a0 || a1) {
                continue;
            }
            let mut ops = [OpKind::Noop; 2];
            let mut fr: Pair<Option<Ratio>> = [None, None];
            let mut ends = [None, None];
            for (i, c) in [x, y].into_iter().enumerate() {
                if let Choice::Op(op, f, e) = c {
                    ops[i] = *op;
                    fr[i] = f.clone();
                    ends[i] = *e;
                }
            }
            if let Some((n, st, check)) = apply(node, t, ops, fr, ends, can_act, cfg, g) {
                out.push((
                    Transition {
                        steps: vec![st],
                        node: n,
                        time: t + 1,
                    },
                    check,
                ));
            }
        }
    }
    if out.is_empty() && cfg.max_idle > 0 {
        // fairness forced an impossible combination; let the robots wait
        let relaxed = SearchConfig {
            max_idle: u32::MAX,
            ..cfg.clone()
        };
        return successors(node, t, &relaxed, g);
    }
    out
}

fn round_successors(
    node: &Node,
    t: u64,
    cfg: &SearchConfig,
    g: &LightGraph,
) -> Vec<(Transition, Result<(), Violation>)> {
    let subsets: &[[bool; 2]] = match cfg.scheduler.kind {
        SchedulerKind::Fsync => &[[true, true]],
        _ => &[[true, false], [false, true], [true, true]],
    };
    let mut out = Vec::new();
    for active in subsets {
        if (0..2).any(|i| !active[i] && node.idle[i] >= cfg.max_idle) {
            continue;
        }
        let ops = active.map(|a| if a { OpKind::LC } else { OpKind::Noop });
        let Some((mid, st1, check1)) = apply(node, t, ops, [None, None], [None, None], [true, true], cfg, g) else {
            continue;
        };
        let f0 = if active[0] {
            stops(&mid.state, 0, &cfg.movement, &cfg.fractions)
        } else {
            vec![None]
        };
        let f1 = if active[1] {
            stops(&mid.state, 1, &cfg.movement, &cfg.fractions)
        } else {
            vec![None]
        };
        for a in &f0 {
            for b in &f1 {
                let ops2 = active.map(|x| if x { OpKind::M } else { OpKind::Noop });
                let mut mid2 = mid.clone();
                mid2.idle = node.idle;
                let Some((mut n, st2, check2)) = apply(
                    &mid2,
                    t + 1,
                    ops2,
                    [a.clone(), b.clone()],
                    [None, None],
                    [false, false],
                    cfg,
                    g,
                ) else {
                    continue;
                };
                for i in 0..2 {
                    n.idle[i] = if active[i] { 0 } else { node.idle[i] + 1 };
                }
                let check = check1.clone().and(check2);
                out.push((
                    Transition {
                        steps: vec![st1.clone(), st2],
                        node: n,
                        time: t + 2,
                    },
                    check,
                ));
            }
        }
    }
    out
}

fn start_node(init: &InitialConfig, cfg: &SearchConfig, g: &LightGraph) -> Result<Node, Violation> {
    let state = initial_state(init.c_r, init.c_s, &init.distance);
    let monitor = match &cfg.monitors {
        Some(spec) => Some(MonitorState::start(spec, g, &state, 0)?),
        None => None,
    };
    Ok(Node {
        state,
        idle: [0, 0],
        monitor,
    })
}

fn cs_pair(state: &SimState) -> (Color, Color) {
    let (a, b) = (state[0].light, state[1].light);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

struct Exploration {
    latest_meeting: u64,
    explored: usize,
    open: usize,
    exhaustive: bool,
    cs_pairs: BTreeSet<(Color, Color)>,
    violations: Vec<Violation>,
}

const MAX_VIOLATIONS: usize = 16;

fn explore(g: &LightGraph, init: &InitialConfig, cfg: &SearchConfig) -> Exploration {
    let mut ex = Exploration {
        latest_meeting: 0,
        explored: 0,
        open: 0,
        exhaustive: true,
        cs_pairs: BTreeSet::new(),
        violations: Vec::new(),
    };
    let start = match start_node(init, cfg, g) {
        Ok(n) => n,
        Err(v) => {
            ex.violations.push(v);
            return ex;
        }
    };
    if is_cs_state(&start.state, 0, g) {
        ex.cs_pairs.insert(cs_pair(&start.state));
    }
    if is_rendezvous(&start.state, 0, g) {
        return ex;
    }
    // round-based layers advance two time units at once
    let mut layer: Vec<Node> = vec![start];
    let mut t = 1;
    while !layer.is_empty() && t <= cfg.horizon {
        if layer.len() > cfg.max_layer {
            ex.exhaustive = false;
            break;
        }
        ex.explored += layer.len();
        let expanded = cfg.parallelism.map(&layer, |n| successors(n, t, cfg, g));
        let mut index: HashMap<Key, ()> = HashMap::with_capacity(layer.len() * 2);
        let mut next = Vec::new();
        let mut time_after = t + 1;
        for succ in expanded {
            for (tr, check) in succ {
                time_after = tr.time;
                if let Err(v) = check {
                    if ex.violations.len() < MAX_VIOLATIONS && !ex.violations.contains(&v) {
                        ex.violations.push(v);
                    }
                }
                if is_cs_state(&tr.node.state, tr.time, g) {
                    ex.cs_pairs.insert(cs_pair(&tr.node.state));
                }
                if is_rendezvous(&tr.node.state, tr.time, g) {
                    ex.latest_meeting = ex.latest_meeting.max(tr.time);
                    continue;
                }
                let (key, _) = canonical_key(&tr.node, tr.time, &cfg.movement);
                if index.insert(key, ()).is_none() {
                    next.push(tr.node);
                }
            }
        }
        layer = next;
        t = time_after;
    }
    ex.open = layer.len();
    ex
}

struct CertSearch<'a> {
    g: &'a LightGraph,
    cfg: SearchConfig,
    initial: &'a InitialConfig,
    marks: HashMap<Key, bool>,
    stack: Vec<(Key, bool, u64)>,
    path: Vec<ScheduleStep>,
    budget: usize,
}

impl CertSearch<'_> {
    fn dfs(&mut self, node: &Node, t: u64) -> Option<ScalingLoopCertificate> {
        if self.budget == 0 || t > self.cfg.certificate_depth {
            return None;
        }
        self.budget -= 1;
        let (key, swapped) = canonical_key(node, t, &self.cfg.movement);
        self.marks.insert(key.clone(), true);
        self.stack.push((key.clone(), swapped, t));
        for (tr, _) in successors(node, t, &self.cfg, self.g) {
            if is_rendezvous(&tr.node.state, tr.time, self.g) {
                continue;
            }
            let (k2, sw2) = canonical_key(&tr.node, tr.time, &self.cfg.movement);
            let path_len = self.path.len();
            self.path.extend(tr.steps.iter().cloned());
            let found = match self.marks.get(&k2) {
                Some(true) => {
                    let (entry_swapped, entry_t) = self
                        .stack
                        .iter()
                        .find(|(k, _, _)| *k == k2)
                        .map(|(_, s, t)| (*s, *t))
                        .unwrap();
                    self.close_loop(entry_t, tr.time, entry_swapped != sw2)
                }
                Some(false) => None,
                None => self.dfs(&tr.node, tr.time),
            };
            self.path.truncate(path_len);
            if found.is_some() {
                return found;
            }
        }
        self.stack.pop();
        self.marks.insert(key, false);
        None
    }

    /// The path returns to a state seen at `entry_t` up to similarity:
    /// append one more copy of the cycle and look for a certificate.
    fn close_loop(&self, entry_t: u64, end_t: u64, swapped: bool) -> Option<ScalingLoopCertificate> {
        let len = end_t - entry_t;
        let mut steps = self.path.clone();
        let block: Vec<ScheduleStep> = self.path.iter().filter(|s| s.time >= entry_t).cloned().collect();
        for s in block {
            let s = if swapped { s.mirrored() } else { s };
            steps.push(ScheduleStep {
                time: s.time + len,
                ..s
            });
        }
        let trace = run_steps(self.g, &steps, self.initial, self.cfg.scheduler, &MovementModel::Rigid).ok()?;
        detect_scaling_loop(&trace, self.initial)
    }
}

/// Depth-first search in Rigid movement with full moves for a validated
/// scaling loop from `init`.
pub fn find_certificate(g: &LightGraph, init: &InitialConfig, cfg: &SearchConfig) -> Option<ScalingLoopCertificate> {
    if cfg.certificate_depth == 0 || init.distance.is_zero() {
        return None;
    }
    let rigid = SearchConfig {
        movement: MovementModel::Rigid,
        fractions: vec![Ratio::one()],
        monitors: None,
        ..cfg.clone()
    };
    let start = Node {
        state: initial_state(init.c_r, init.c_s, &init.distance),
        idle: [0, 0],
        monitor: None,
    };
    let mut search = CertSearch {
        g,
        initial: init,
        marks: HashMap::new(),
        stack: Vec::new(),
        path: Vec::new(),
        budget: cfg.certificate_budget,
        cfg: rigid,
    };
    search.dfs(&start, 1)
}

fn search_one(g: &LightGraph, init: &InitialConfig, cfg: &SearchConfig) -> SearchOutcome {
    // a Rigid certificate settles the start without the exhaustive tree
    if cfg.movement.is_rigid() {
        if let Some(c) = find_certificate(g, init, cfg) {
            return SearchOutcome {
                initial: init.clone(),
                verdict: Verdict::Diverges {
                    certificate: Box::new(c),
                },
                explored: 0,
                open: 0,
                exhaustive: false,
                cs_pairs: BTreeSet::new(),
                violations: Vec::new(),
            };
        }
    }
    let ex = explore(g, init, cfg);
    let closed = ex.open == 0 && ex.exhaustive;
    let verdict = if closed {
        Verdict::Rendezvous {
            time: ex.latest_meeting,
        }
    } else if cfg.movement.is_rigid() {
        Verdict::InconclusiveAtHorizon { horizon: cfg.horizon }
    } else {
        match find_certificate(g, init, cfg) {
            Some(c) => Verdict::Diverges {
                certificate: Box::new(c),
            },
            None => Verdict::InconclusiveAtHorizon { horizon: cfg.horizon },
        }
    };
    SearchOutcome {
        initial: init.clone(),
        verdict,
        explored: ex.explored,
        open: ex.open,
        exhaustive: ex.exhaustive,
        cs_pairs: ex.cs_pairs,
        violations: ex.violations,
    }
}

/// One outcome per initial configuration of `cfg`, in order.
pub fn adversary_search(g: &LightGraph, cfg: &SearchConfig) -> Vec<SearchOutcome> {
    let inner = SearchConfig {
        parallelism: cfg.parallelism,
        ..cfg.clone()
    };
    cfg.initial.iter().map(|init| search_one(g, init, &inner)).collect()
}

/// Union of the cycle-start color pairs over the explored trees.
pub fn reachable_cs_color_pairs(g: &LightGraph, cfg: &SearchConfig) -> BTreeSet<(Color, Color)> {
    let mut out = BTreeSet::new();
    for init in &cfg.initial {
        out.extend(explore(g, init, cfg).cs_pairs);
    }
    out
}
