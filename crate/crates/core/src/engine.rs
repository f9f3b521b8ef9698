//! Integer-timeline execution of Look / Comp / Move operations.
//!
//! Time conventions: the state "at time `t`" is the state produced by every
//! operation performed strictly before `t`. Operations at `t` all read that
//! state before any of them writes, so a Look at `t` never sees a color set
//! by a Comp at `t`. Positions are continuous: a robot moving between its
//! `MB` at `b` and `ME` at `e` is observed at the linear interpolation for
//! `b < t < e` and at its stop point from `e` on.

use std::fmt;
use std::io::{self, Write};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    destination, fmt_ratio, int, truncate_move, Color, LightGraph, MovementModel, Position, Ratio, SchedulerClass,
};
use crate::schedules::{check_legal, Schedule, ScheduleStep, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Robot {
    R,
    S,
}

impl Robot {
    pub const BOTH: [Robot; 2] = [Robot::R, Robot::S];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Robot {
        match self {
            Robot::R => Robot::S,
            Robot::S => Robot::R,
        }
    }
}

impl fmt::Display for Robot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Robot::R => "r",
            Robot::S => "s",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    #[serde(rename = "LOOK")]
    Look,
    #[serde(rename = "COMP")]
    Comp,
    #[serde(rename = "LC")]
    LC,
    #[serde(rename = "MB")]
    MB,
    #[serde(rename = "ME")]
    ME,
    /// Move-atomic move: begins at `t`, visible at its stop point from `t + 1`.
    #[serde(rename = "M")]
    M,
    #[serde(rename = "-")]
    Noop,
}

impl OpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Look => "LOOK",
            OpKind::Comp => "COMP",
            OpKind::LC => "LC",
            OpKind::MB => "MB",
            OpKind::ME => "ME",
            OpKind::M => "M",
            OpKind::Noop => "-",
        }
    }

    pub fn parse(s: &str) -> Option<OpKind> {
        Some(match s {
            "LOOK" | "Look" => OpKind::Look,
            "COMP" | "Comp" => OpKind::Comp,
            "LC" => OpKind::LC,
            "MB" => OpKind::MB,
            "ME" => OpKind::ME,
            "M" => OpKind::M,
            "-" => OpKind::Noop,
            _ => return None,
        })
    }

    /// Operations that take a snapshot.
    pub fn looks(self) -> bool {
        matches!(self, OpKind::Look | OpKind::LC)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Snapshot {
    pub other_light: Color,
    pub other_position: Position,
    pub my_position: Position,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pending {
    pub next_light: Color,
    pub dest: Position,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Idle,
    Computed,
    Moving {
        /// Stop point after adversarial truncation.
        to: Position,
        begin: u64,
        /// Time of the matching `ME`, when known.
        end: Option<u64>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RobotState {
    pub light: Color,
    /// Current position; for a moving robot, the position at `MB`.
    pub position: Position,
    pub phase: Phase,
    pub snapshot: Option<Snapshot>,
    pub pending: Option<Pending>,
}

impl RobotState {
    pub fn idle(light: Color, position: Position) -> Self {
        RobotState {
            light,
            position,
            phase: Phase::Idle,
            snapshot: None,
            pending: None,
        }
    }

    /// Position observed by a Look at time `t`.
    pub fn position_at(&self, t: u64) -> Position {
        match &self.phase {
            Phase::Moving { to, begin, end } => match end {
                Some(e) if t >= *e => to.clone(),
                Some(e) if t > *begin => {
                    let frac = Ratio::new(((t - begin) as i64).into(), ((e - begin) as i64).into());
                    &self.position + (to - &self.position) * frac
                }
                _ => self.position.clone(),
            },
            _ => self.position.clone(),
        }
    }

    pub fn phase_name(&self) -> &'static str {
        match (&self.phase, &self.snapshot) {
            (Phase::Idle, None) => "idle",
            (Phase::Idle, Some(_)) => "looked",
            (Phase::Computed, _) => "computed",
            (Phase::Moving { .. }, _) => "moving",
        }
    }

    /// The move this robot will still perform in its current cycle, as
    /// `(from, to)` at time `t`; `None` when nothing is left to do.
    fn remaining_move(&self, t: u64, g: &LightGraph) -> Option<(Position, Position)> {
        match &self.phase {
            Phase::Idle => self.snapshot.as_ref().map(|snap| {
                let (_, lambda) = g.transition(snap.other_light);
                let dest = destination(&snap.my_position, &snap.other_position, lambda);
                (self.position.clone(), dest)
            }),
            Phase::Computed => self.pending.as_ref().map(|p| (self.position.clone(), p.dest.clone())),
            Phase::Moving { to, .. } => Some((self.position_at(t), to.clone())),
        }
    }

    /// Whether the rest of the current cycle neither moves the robot nor
    /// changes its light (or no cycle is in progress).
    pub fn at_cycle_start(&self, t: u64, g: &LightGraph) -> bool {
        if matches!(self.phase, Phase::Idle) {
            if let Some(snap) = &self.snapshot {
                if g.transition(snap.other_light).0 != self.light {
                    return false;
                }
            }
        }
        match self.remaining_move(t, g) {
            None => true,
            Some((from, to)) => from == to && self.position_at(t) == to,
        }
    }

    /// Idle with no snapshot: the next operation must be a Look.
    pub fn strictly_idle(&self) -> bool {
        matches!(self.phase, Phase::Idle) && self.snapshot.is_none()
    }

    fn has_pending_displacement(&self, t: u64, g: &LightGraph) -> bool {
        match self.remaining_move(t, g) {
            None => false,
            Some((from, to)) => from != to,
        }
    }
}

pub type Pair<T> = [T; 2];

/// Both robots, `r` first.
pub type SimState = Pair<RobotState>;

/// Both robots idle, `r` at 0 and `s` at `distance`.
pub fn initial_state(c_r: Color, c_s: Color, distance: &Ratio) -> SimState {
    [RobotState::idle(c_r, int(0)), RobotState::idle(c_s, distance.clone())]
}

pub fn distance_at(state: &SimState, t: u64) -> Ratio {
    (state[0].position_at(t) - state[1].position_at(t)).abs()
}

/// Distance zero and neither robot has movement left in its cycle.
pub fn is_rendezvous(state: &SimState, t: u64, g: &LightGraph) -> bool {
    distance_at(state, t).is_zero()
        && !state[0].has_pending_displacement(t, g)
        && !state[1].has_pending_displacement(t, g)
}

pub fn is_cs_state(state: &SimState, t: u64, g: &LightGraph) -> bool {
    state[0].at_cycle_start(t, g) && state[1].at_cycle_start(t, g)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("t={time}: robot {robot} cannot perform {op} while {phase}")]
    IllegalOp {
        time: u64,
        robot: Robot,
        op: OpKind,
        phase: &'static str,
    },
    #[error("t={time}: {rule}")]
    AtomicityViolation { time: u64, rule: String },
    #[error("illegal schedule: {0}")]
    IllegalSchedule(Violation),
}

/// Applies the operations both robots perform at `time`.
///
/// `fractions` picks the adversarial stop point of a move starting now
/// (`None` means a full move).
pub fn step(
    state: &SimState,
    time: u64,
    ops: Pair<OpKind>,
    fractions: &Pair<Option<Ratio>>,
    scheduler: SchedulerClass,
    movement: &MovementModel,
    g: &LightGraph,
) -> Result<SimState, EngineError> {
    for robot in Robot::BOTH {
        let (i, o) = (robot.index(), robot.other().index());
        if !ops[i].looks() {
            continue;
        }
        let other = &state[o];
        if scheduler.lc_atomic && other.snapshot.is_some() && ops[o] != OpKind::Comp {
            return Err(EngineError::AtomicityViolation {
                time,
                rule: format!("lc-atomic: {robot} looks inside {}'s Look-Comp window", robot.other()),
            });
        }
        if scheduler.move_atomic {
            if let Phase::Moving { begin, end, .. } = &other.phase {
                if *begin < time && *end != Some(time) && ops[o] != OpKind::ME {
                    return Err(EngineError::AtomicityViolation {
                        time,
                        rule: format!("move-atomic: {robot} looks inside {}'s move", robot.other()),
                    });
                }
            }
        }
    }

    let mut next = state.clone();
    for robot in Robot::BOTH {
        let (i, o) = (robot.index(), robot.other().index());
        let me = &state[i];
        let illegal = || EngineError::IllegalOp {
            time,
            robot,
            op: ops[i],
            phase: me.phase_name(),
        };
        let take_snapshot = || Snapshot {
            other_light: state[o].light,
            other_position: state[o].position_at(time),
            my_position: me.position_at(time),
        };
        let full = Ratio::one();
        let fraction = fractions[i].as_ref().unwrap_or(&full);
        let out = &mut next[i];
        match ops[i] {
            OpKind::Noop => {}
            OpKind::Look => {
                if !me.strictly_idle() {
                    return Err(illegal());
                }
                out.snapshot = Some(take_snapshot());
            }
            OpKind::Comp => {
                let snap = match (&me.phase, &me.snapshot) {
                    (Phase::Idle, Some(s)) => s.clone(),
                    _ => return Err(illegal()),
                };
                compute(out, &snap, g);
            }
            OpKind::LC => {
                if !me.strictly_idle() {
                    return Err(illegal());
                }
                compute(out, &take_snapshot(), g);
            }
            OpKind::MB | OpKind::M => {
                let dest = match (&me.phase, &me.pending) {
                    (Phase::Computed, Some(p)) => &p.dest,
                    _ => return Err(illegal()),
                };
                let stop = truncate_move(&me.position, dest, movement, fraction);
                if ops[i] == OpKind::M {
                    out.position = stop;
                    out.phase = Phase::Idle;
                    out.pending = None;
                } else {
                    out.phase = Phase::Moving {
                        to: stop,
                        begin: time,
                        end: None,
                    };
                }
            }
            OpKind::ME => {
                let to = match &me.phase {
                    Phase::Moving { to, .. } => to.clone(),
                    _ => return Err(illegal()),
                };
                out.position = to;
                out.phase = Phase::Idle;
                out.pending = None;
            }
        }
    }
    Ok(next)
}

fn compute(out: &mut RobotState, snap: &Snapshot, g: &LightGraph) {
    let (next_light, lambda) = g.transition(snap.other_light);
    let dest = destination(&snap.my_position, &snap.other_position, lambda);
    out.light = next_light;
    out.pending = Some(Pending { next_light, dest });
    out.snapshot = None;
    out.phase = Phase::Computed;
}

/// Records the end time of a move that has just begun.
pub fn set_move_end(robot: &mut RobotState, end_time: u64) {
    if let Phase::Moving { end, .. } = &mut robot.phase {
        *end = Some(end_time);
    }
}

/// Exchanges the roles of `r` and `s`.
pub fn swap_state(state: &SimState) -> SimState {
    [state[1].clone(), state[0].clone()]
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InitialConfig {
    pub c_r: Color,
    pub c_s: Color,
    pub distance: Ratio,
}

impl InitialConfig {
    pub fn new(c_r: Color, c_s: Color, distance: Ratio) -> Self {
        InitialConfig { c_r, c_s, distance }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub time: u64,
    pub ops: Pair<OpKind>,
    pub fractions: Pair<Option<Ratio>>,
    /// State from `time + 1` on (until the next step).
    pub after: SimState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunEnd {
    Rendezvous { time: u64 },
    ScheduleEnd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub graph: LightGraph,
    pub scheduler: SchedulerClass,
    pub movement: MovementModel,
    pub t0: u64,
    pub initial: SimState,
    pub steps: Vec<TraceStep>,
    pub end: RunEnd,
}

/// The `(c_r, c_s; d)` view of a time instant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConfigurationView {
    pub c_r: Color,
    pub c_s: Color,
    pub d: Ratio,
}

impl ConfigurationView {
    pub fn swapped(&self) -> Self {
        ConfigurationView {
            c_r: self.c_s,
            c_s: self.c_r,
            d: self.d.clone(),
        }
    }

    pub fn show(&self, g: &LightGraph) -> String {
        format!("({},{};{})", g.name(self.c_r), g.name(self.c_s), self.d)
    }
}

pub fn configuration_of(state: &SimState, t: u64) -> ConfigurationView {
    ConfigurationView {
        c_r: state[0].light,
        c_s: state[1].light,
        d: distance_at(state, t),
    }
}

/// Runs a schedule from both robots idle in `initial`.
///
/// Stops at rendezvous or when the (unrolled, horizon-bounded) schedule is
/// exhausted. Move fractions default to full moves.
pub fn run(
    g: &LightGraph,
    schedule: &Schedule,
    initial: &InitialConfig,
    scheduler: SchedulerClass,
    movement: &MovementModel,
) -> Result<Trace, EngineError> {
    check_legal(schedule, scheduler).map_err(EngineError::IllegalSchedule)?;
    run_steps(g, &schedule.unroll(), initial, scheduler, movement)
}

/// Like [`run`] over an explicit step list, starting at `t0 = 0`, without the
/// up-front legality check (the engine still rejects illegal operations).
pub fn run_steps(
    g: &LightGraph,
    steps: &[ScheduleStep],
    initial: &InitialConfig,
    scheduler: SchedulerClass,
    movement: &MovementModel,
) -> Result<Trace, EngineError> {
    let start = initial_state(initial.c_r, initial.c_s, &initial.distance);
    run_from(g, steps, start, 0, scheduler, movement)
}

pub fn run_from(
    g: &LightGraph,
    steps: &[ScheduleStep],
    start: SimState,
    t0: u64,
    scheduler: SchedulerClass,
    movement: &MovementModel,
) -> Result<Trace, EngineError> {
    drive(g, steps, start, t0, scheduler, movement, true)
}

/// Applies every step even after the robots meet; `end` still records the
/// first rendezvous.
pub fn run_past_rendezvous(
    g: &LightGraph,
    steps: &[ScheduleStep],
    initial: &InitialConfig,
    scheduler: SchedulerClass,
    movement: &MovementModel,
) -> Result<Trace, EngineError> {
    let start = initial_state(initial.c_r, initial.c_s, &initial.distance);
    drive(g, steps, start, 0, scheduler, movement, false)
}

fn drive(
    g: &LightGraph,
    steps: &[ScheduleStep],
    start: SimState,
    t0: u64,
    scheduler: SchedulerClass,
    movement: &MovementModel,
    stop: bool,
) -> Result<Trace, EngineError> {
    let mut trace = Trace {
        graph: g.clone(),
        scheduler,
        movement: movement.clone(),
        t0,
        initial: start.clone(),
        steps: Vec::with_capacity(steps.len()),
        end: RunEnd::ScheduleEnd,
    };
    if is_rendezvous(&start, t0, g) {
        trace.end = RunEnd::Rendezvous { time: t0 };
        if stop {
            return Ok(trace);
        }
    }
    let mut state = start;
    for (k, st) in steps.iter().enumerate() {
        let mut next = step(&state, st.time, st.ops, &st.fractions, scheduler, movement, g)?;
        for robot in Robot::BOTH {
            let i = robot.index();
            if st.ops[i] == OpKind::MB {
                if let Some(end) = steps[k + 1..]
                    .iter()
                    .find(|later| later.ops[i] == OpKind::ME)
                    .map(|later| later.time)
                {
                    set_move_end(&mut next[i], end);
                }
            }
        }
        trace.steps.push(TraceStep {
            time: st.time,
            ops: st.ops,
            fractions: st.fractions.clone(),
            after: next.clone(),
        });
        state = next;
        if trace.end == RunEnd::ScheduleEnd && is_rendezvous(&state, st.time + 1, g) {
            trace.end = RunEnd::Rendezvous { time: st.time + 1 };
            if stop {
                break;
            }
        }
    }
    Ok(trace)
}

impl Trace {
    /// State in effect at time `t`.
    pub fn state_at(&self, t: u64) -> &SimState {
        let idx = self.steps.partition_point(|s| s.time < t);
        if idx == 0 {
            &self.initial
        } else {
            &self.steps[idx - 1].after
        }
    }

    pub fn last_time(&self) -> u64 {
        self.steps.last().map_or(self.t0, |s| s.time + 1)
    }

    pub fn final_state(&self) -> &SimState {
        self.steps.last().map_or(&self.initial, |s| &s.after)
    }

    pub fn configuration_at(&self, t: u64) -> ConfigurationView {
        configuration_of(self.state_at(t), t)
    }

    pub fn distance_at(&self, t: u64) -> Ratio {
        distance_at(self.state_at(t), t)
    }

    pub fn rendezvous_time(&self) -> Option<u64> {
        match self.end {
            RunEnd::Rendezvous { time } => Some(time),
            RunEnd::ScheduleEnd => None,
        }
    }

    /// First time at or after `t` when `robot` performs `op`.
    pub fn next_op(&self, robot: Robot, op: OpKind, t: u64) -> Option<u64> {
        self.steps
            .iter()
            .find(|s| s.time >= t && s.ops[robot.index()] == op)
            .map(|s| s.time)
    }

    /// Last time at or before `t` when `robot` performed `op`; `t0` if never.
    pub fn prev_op(&self, robot: Robot, op: OpKind, t: u64) -> u64 {
        self.steps
            .iter()
            .rev()
            .find(|s| s.time <= t && s.ops[robot.index()] == op)
            .map_or(self.t0, |s| s.time)
    }

    /// Every cycle start time in `[t0, last_time]`.
    pub fn cs_times(&self) -> Vec<u64> {
        (self.t0..=self.last_time())
            .filter(|&t| is_cs_state(self.state_at(t), t, &self.graph))
            .collect()
    }

    /// Cycle start times where both robots are idle with no snapshot.
    pub fn strict_cs_times(&self) -> Vec<u64> {
        (self.t0..=self.last_time())
            .filter(|&t| {
                let st = self.state_at(t);
                st[0].strictly_idle() && st[1].strictly_idle()
            })
            .collect()
    }

    pub fn rows(&self) -> Vec<TraceRow> {
        let g = &self.graph;
        let row = |t: u64, ops: [&str; 2], st: &SimState, at: u64| TraceRow {
            t,
            ops: ops.map(str::to_string),
            lights: [g.name(st[0].light).to_string(), g.name(st[1].light).to_string()],
            positions: [fmt_ratio(&st[0].position_at(at)), fmt_ratio(&st[1].position_at(at))],
            distance: fmt_ratio(&distance_at(st, at)),
        };
        let mut rows = vec![row(self.t0, ["-", "-"], &self.initial, self.t0)];
        rows.extend(
            self.steps
                .iter()
                .map(|s| row(s.time, s.ops.map(OpKind::as_str), &s.after, s.time + 1)),
        );
        rows
    }

    /// One JSON object per line; the first line is the initial configuration,
    /// later lines show lights and positions once the step's operations apply.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for row in self.rows() {
            serde_json::to_writer(&mut w, &row)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,ops_r,ops_s,lights_r,lights_s,positions_r,positions_s,distance")?;
        for r in self.rows() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.t, r.ops[0], r.ops[1], r.lights[0], r.lights[1], r.positions[0], r.positions[1], r.distance
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub ops: [String; 2],
    pub lights: [String; 2],
    pub positions: [String; 2],
    pub distance: String,
}
