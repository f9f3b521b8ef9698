//! Schedules as data: a finite prefix plus an optional repeating block.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{OpKind, Pair, Robot};
use crate::model::{fmt_ratio, parse_ratio, Ratio, SchedulerClass};

pub const DEFAULT_HORIZON: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScheduleStep {
    pub time: u64,
    pub ops: Pair<OpKind>,
    /// Adversarial stop fraction for a move beginning at this step.
    pub fractions: Pair<Option<Ratio>>,
}

impl ScheduleStep {
    pub fn new(time: u64, ops: Pair<OpKind>) -> Self {
        ScheduleStep {
            time,
            ops,
            fractions: [None, None],
        }
    }

    pub fn mirrored(&self) -> Self {
        ScheduleStep {
            time: self.time,
            ops: [self.ops[1], self.ops[0]],
            fractions: [self.fractions[1].clone(), self.fractions[0].clone()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LoopBlock {
    /// One entry per consecutive time unit.
    pub ops: Vec<(Pair<OpKind>, Pair<Option<Ratio>>)>,
}

impl LoopBlock {
    pub fn period(&self) -> usize {
        self.ops.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Schedule {
    pub prefix: Vec<ScheduleStep>,
    pub looped: Option<LoopBlock>,
    /// Maximum number of steps when a loop is present.
    pub horizon: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            prefix: Vec::new(),
            looped: None,
            horizon: DEFAULT_HORIZON,
        }
    }
}

fn looping(ops: &[[OpKind; 2]]) -> Schedule {
    Schedule {
        prefix: Vec::new(),
        looped: Some(LoopBlock {
            ops: ops.iter().map(|o| (*o, [None, None])).collect(),
        }),
        horizon: DEFAULT_HORIZON,
    }
}

use OpKind::{Noop as N, LC, M};

/// `([LC,-],[-,LC],[M,-],[-,M])`, repeated.
pub fn alt() -> Schedule {
    looping(&[[LC, N], [N, LC], [M, N], [N, M]])
}

/// `alt` with the robots' roles exchanged.
pub fn alt_mirror() -> Schedule {
    alt().mirrored()
}

/// `alt` followed by its mirror image, repeated: the leading robot alternates.
pub fn alt_pair() -> Schedule {
    looping(&[[LC, N], [N, LC], [M, N], [N, M], [N, LC], [LC, N], [N, M], [M, N]])
}

/// `alt`, its mirror, the mirror again, then `alt`: after a block that ends
/// with the robots' colors exchanged, the next block runs mirrored.
pub fn alt_swap() -> Schedule {
    let a = [[LC, N], [N, LC], [M, N], [N, M]];
    let m = [[N, LC], [LC, N], [N, M], [M, N]];
    looping(&[a, m, m, a].concat())
}

/// `([LC,LC],[M,M])`, repeated.
pub fn sim() -> Schedule {
    looping(&[[LC, LC], [M, M]])
}

/// SSYNC rounds activating one robot at a time: `r`, then `s`.
pub fn ssync_alternating() -> Schedule {
    looping(&[[LC, N], [M, N], [N, LC], [N, M]])
}

pub fn named(name: &str) -> Option<Schedule> {
    Some(match name {
        "alt" => alt(),
        "alt-mirror" => alt_mirror(),
        "alt-pair" => alt_pair(),
        "alt-swap" => alt_swap(),
        "sim" => sim(),
        "ssync-alt" => ssync_alternating(),
        _ => return None,
    })
}

impl Schedule {
    pub fn from_steps(steps: Vec<ScheduleStep>) -> Self {
        Schedule {
            horizon: steps.len(),
            prefix: steps,
            looped: None,
        }
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn mirrored(&self) -> Self {
        Schedule {
            prefix: self.prefix.iter().map(ScheduleStep::mirrored).collect(),
            looped: self.looped.as_ref().map(|l| LoopBlock {
                ops: l
                    .ops
                    .iter()
                    .map(|(o, f)| ([o[1], o[0]], [f[1].clone(), f[0].clone()]))
                    .collect(),
            }),
            horizon: self.horizon,
        }
    }

    /// Concrete steps: the whole prefix, then loop iterations until `horizon`
    /// steps in total. Loop times continue right after the prefix.
    pub fn unroll(&self) -> Vec<ScheduleStep> {
        let mut out = self.prefix.clone();
        let Some(block) = &self.looped else {
            return out;
        };
        if block.ops.is_empty() {
            return out;
        }
        let mut t = out.last().map_or(1, |s| s.time + 1);
        'outer: loop {
            for (ops, fr) in &block.ops {
                if out.len() >= self.horizon {
                    break 'outer;
                }
                out.push(ScheduleStep {
                    time: t,
                    ops: *ops,
                    fractions: fr.clone(),
                });
                t += 1;
            }
        }
        out
    }
}

/// Renumbers steps to consecutive times starting at `start`, keeping gaps.
pub fn shift_steps(steps: &[ScheduleStep], start: u64) -> Vec<ScheduleStep> {
    let Some(first) = steps.first() else {
        return Vec::new();
    };
    let base = first.time;
    steps
        .iter()
        .map(|s| ScheduleStep {
            time: s.time - base + start,
            ..s.clone()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    NonIncreasingTime,
    IllegalOp,
    LcAtomicity,
    MoveAtomicity,
    RoundStructure,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{kind:?} at times {times:?}: {message}")]
pub struct Violation {
    pub kind: ViolationKind,
    pub robot: Option<Robot>,
    pub times: Vec<u64>,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AbsPhase {
    Idle,
    Looked(u64),
    Computed,
    Moving(u64),
}

fn advance(phase: AbsPhase, op: OpKind, t: u64) -> Option<AbsPhase> {
    use AbsPhase::*;
    Some(match (phase, op) {
        (p, OpKind::Noop) => p,
        (Idle, OpKind::Look) => Looked(t),
        (Idle, OpKind::LC) | (Looked(_), OpKind::Comp) => Computed,
        (Computed, OpKind::MB) => Moving(t),
        (Computed, OpKind::M) | (Moving(_), OpKind::ME) => Idle,
        _ => return None,
    })
}

/// Checks a schedule (unrolled up to its horizon) against a scheduler class.
pub fn check_legal(s: &Schedule, cls: SchedulerClass) -> Result<(), Violation> {
    check_steps(&s.unroll(), cls)
}

pub fn check_steps(steps: &[ScheduleStep], cls: SchedulerClass) -> Result<(), Violation> {
    let mut phase = [AbsPhase::Idle; 2];
    let mut prev_time: Option<u64> = None;
    for st in steps {
        let t = st.time;
        if prev_time.is_some_and(|p| p >= t) {
            return Err(Violation {
                kind: ViolationKind::NonIncreasingTime,
                robot: None,
                times: vec![prev_time.unwrap(), t],
                message: "times must strictly increase".into(),
            });
        }
        prev_time = Some(t);
        for robot in Robot::BOTH {
            let (i, o) = (robot.index(), robot.other().index());
            if !st.ops[i].looks() {
                continue;
            }
            if cls.lc_atomic {
                if let AbsPhase::Looked(tl) = phase[o] {
                    if st.ops[o] != OpKind::Comp {
                        return Err(Violation {
                            kind: ViolationKind::LcAtomicity,
                            robot: Some(robot),
                            times: vec![tl, t],
                            message: format!("{robot} looks between {}'s Look and Comp", robot.other()),
                        });
                    }
                }
            }
            if cls.move_atomic {
                if let AbsPhase::Moving(tb) = phase[o] {
                    if tb < t && st.ops[o] != OpKind::ME {
                        return Err(Violation {
                            kind: ViolationKind::MoveAtomicity,
                            robot: Some(robot),
                            times: vec![tb, t],
                            message: format!("{robot} looks between {}'s MB and ME", robot.other()),
                        });
                    }
                }
            }
        }
        for robot in Robot::BOTH {
            let i = robot.index();
            phase[i] = advance(phase[i], st.ops[i], t).ok_or_else(|| Violation {
                kind: ViolationKind::IllegalOp,
                robot: Some(robot),
                times: vec![t],
                message: format!("{} out of cycle order for {robot}", st.ops[i]),
            })?;
        }
    }
    if cls.is_round_based() {
        check_rounds(steps, cls)?;
    }
    Ok(())
}

fn check_rounds(steps: &[ScheduleStep], cls: SchedulerClass) -> Result<(), Violation> {
    let bad = |times: Vec<u64>, message: &str| Violation {
        kind: ViolationKind::RoundStructure,
        robot: None,
        times,
        message: message.to_string(),
    };
    for pair in steps.chunks(2) {
        let look = &pair[0];
        let Some(mv) = pair.get(1) else {
            // a trailing half round is the truncation of an unrolled loop
            continue;
        };
        if mv.time != look.time + 1 {
            return Err(bad(vec![look.time, mv.time], "a round is LC at t and M at t+1"));
        }
        let active: Vec<bool> = look.ops.iter().map(|o| *o == OpKind::LC).collect();
        if look.ops.iter().any(|o| !matches!(o, OpKind::LC | OpKind::Noop)) || !active.iter().any(|a| *a) {
            return Err(bad(vec![look.time], "round must start with LC by a nonempty subset"));
        }
        for i in 0..2 {
            let want = if active[i] { OpKind::M } else { OpKind::Noop };
            if mv.ops[i] != want {
                return Err(bad(
                    vec![look.time, mv.time],
                    "round must end with M by the same robots",
                ));
            }
        }
        if cls.kind == crate::model::SchedulerKind::Fsync && !(active[0] && active[1]) {
            return Err(bad(vec![look.time], "FSYNC activates both robots every round"));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FairnessError {
    #[error("schedule has no repeating block")]
    NoLoop,
    #[error("robot {0} never completes a cycle in the loop")]
    Unfair(Robot),
}

/// Each robot must complete at least one cycle inside the repeating block.
pub fn check_fair(s: &Schedule) -> Result<(), FairnessError> {
    let block = s.looped.as_ref().ok_or(FairnessError::NoLoop)?;
    let ops: Vec<Pair<OpKind>> = block.ops.iter().map(|(o, _)| *o).collect();
    match starved_robot(&ops) {
        Some(r) => Err(FairnessError::Unfair(r)),
        None => Ok(()),
    }
}

/// A robot that neither looks nor finishes a move in `ops`.
pub fn starved_robot(ops: &[Pair<OpKind>]) -> Option<Robot> {
    Robot::BOTH.into_iter().find(|r| {
        let i = r.index();
        let looks = ops.iter().any(|o| o[i].looks());
        let moves = ops.iter().any(|o| matches!(o[i], OpKind::M | OpKind::ME));
        !(looks && moves)
    })
}

#[derive(Clone, Debug)]
pub struct RandomScheduleOptions {
    pub steps: usize,
    /// A robot able to act may stay inactive at most this many consecutive times.
    pub max_idle: u32,
    /// Longest MB-to-ME span when moves are not atomic.
    pub max_move_duration: u64,
    pub fractions: Vec<Ratio>,
    /// Only ever perform LC with both robots at once.
    pub same_lc: bool,
}

impl Default for RandomScheduleOptions {
    fn default() -> Self {
        RandomScheduleOptions {
            steps: DEFAULT_HORIZON,
            max_idle: 3,
            max_move_duration: 2,
            fractions: vec![Ratio::from_integer(1.into())],
            same_lc: false,
        }
    }
}

/// A random schedule, legal for `cls` by construction.
pub fn random_schedule<R: Rng>(rng: &mut R, cls: SchedulerClass, opts: &RandomScheduleOptions) -> Vec<ScheduleStep> {
    let mut out = Vec::with_capacity(opts.steps);
    let pick_fraction = |rng: &mut R| opts.fractions.choose(rng).cloned();
    if cls.is_round_based() {
        let mut t = 1;
        while out.len() + 2 <= opts.steps {
            let active = match cls.kind {
                crate::model::SchedulerKind::Fsync => [true, true],
                _ => *[[true, false], [false, true], [true, true]].choose(rng).unwrap(),
            };
            let op = |a: bool, o: OpKind| if a { o } else { OpKind::Noop };
            out.push(ScheduleStep::new(t, [op(active[0], LC), op(active[1], LC)]));
            out.push(ScheduleStep {
                time: t + 1,
                ops: [op(active[0], M), op(active[1], M)],
                fractions: [pick_fraction(rng), pick_fraction(rng)],
            });
            t += 2;
        }
        return out;
    }

    let mut phase = [AbsPhase::Idle; 2];
    let mut move_end = [0u64; 2];
    let mut idle = [0u32; 2];
    for t in 1..=opts.steps as u64 {
        // voluntary options per robot; the first entry is always "wait" unless forced
        let mut choices: [Vec<OpKind>; 2] = Default::default();
        for i in 0..2 {
            choices[i] = match phase[i] {
                AbsPhase::Idle if opts.same_lc => vec![N, LC],
                AbsPhase::Idle if cls.lc_atomic => vec![N, LC],
                AbsPhase::Idle => vec![N, OpKind::Look, LC],
                AbsPhase::Looked(_) => vec![N, OpKind::Comp],
                AbsPhase::Computed if cls.move_atomic => vec![N, M],
                AbsPhase::Computed => vec![N, OpKind::MB],
                AbsPhase::Moving(_) if move_end[i] == t => vec![OpKind::ME],
                AbsPhase::Moving(_) => vec![N],
            };
        }
        let mut ops = [N, N];
        for _attempt in 0..32 {
            for i in 0..2 {
                let forced = idle[i] >= opts.max_idle && choices[i].len() > 1;
                let opts_i = if forced { &choices[i][1..] } else { &choices[i][..] };
                ops[i] = *opts_i.choose(rng).unwrap();
            }
            if opts.same_lc {
                let both_idle = phase.iter().all(|p| *p == AbsPhase::Idle);
                if !both_idle {
                    for op in ops.iter_mut() {
                        if *op == LC {
                            *op = N;
                        }
                    }
                } else if ops.contains(&LC) {
                    ops = [LC, LC];
                }
            }
            if cls.lc_atomic {
                for i in 0..2 {
                    let o = 1 - i;
                    if ops[i].looks() && matches!(phase[o], AbsPhase::Looked(_)) && ops[o] != OpKind::Comp {
                        ops[i] = N;
                    }
                }
            }
            let someone_could_act = choices.iter().any(|c| c.len() > 1 || c[0] != N);
            if ops != [N, N] || !someone_could_act {
                break;
            }
        }
        let mut fractions = [None, None];
        for i in 0..2 {
            let could_act = choices[i].len() > 1;
            if ops[i] == N && could_act {
                idle[i] += 1;
            } else if ops[i] != N {
                idle[i] = 0;
            }
            if matches!(ops[i], OpKind::MB | OpKind::M) {
                fractions[i] = pick_fraction(rng);
            }
            if ops[i] == OpKind::MB {
                move_end[i] = t + rng.gen_range(1..=opts.max_move_duration.max(1));
            }
            phase[i] = advance(phase[i], ops[i], t).expect("generator keeps cycle order");
        }
        out.push(ScheduleStep {
            time: t,
            ops,
            fractions,
        });
    }
    out
}

// ---- JSON form ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepJson {
    pub t: u64,
    pub ops: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractions: Option<[Option<String>; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopJson {
    pub period: usize,
    pub ops: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractions: Option<Vec<[Option<String>; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleJson {
    #[serde(default)]
    pub prefix: Vec<StepJson>,
    #[serde(default, rename = "loop", skip_serializing_if = "Option::is_none")]
    pub looped: Option<LoopJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("bad schedule: {0}")]
pub struct ScheduleFormatError(pub String);

fn ops_to_json(ops: &Pair<OpKind>) -> [String; 2] {
    ops.map(|o| o.as_str().to_string())
}

fn fractions_to_json(f: &Pair<Option<Ratio>>) -> Option<[Option<String>; 2]> {
    if f.iter().all(Option::is_none) {
        None
    } else {
        Some([f[0].as_ref().map(fmt_ratio), f[1].as_ref().map(fmt_ratio)])
    }
}

fn ops_from_json(ops: &[String; 2]) -> Result<Pair<OpKind>, ScheduleFormatError> {
    let p = |s: &String| OpKind::parse(s).ok_or_else(|| ScheduleFormatError(format!("unknown op {s:?}")));
    Ok([p(&ops[0])?, p(&ops[1])?])
}

fn fractions_from_json(f: &Option<[Option<String>; 2]>) -> Result<Pair<Option<Ratio>>, ScheduleFormatError> {
    let Some(f) = f else {
        return Ok([None, None]);
    };
    let p = |s: &Option<String>| -> Result<Option<Ratio>, ScheduleFormatError> {
        s.as_deref()
            .map(|s| parse_ratio(s).map_err(|e| ScheduleFormatError(e.to_string())))
            .transpose()
    };
    Ok([p(&f[0])?, p(&f[1])?])
}

impl Schedule {
    pub fn to_json(&self) -> ScheduleJson {
        ScheduleJson {
            prefix: self
                .prefix
                .iter()
                .map(|s| StepJson {
                    t: s.time,
                    ops: ops_to_json(&s.ops),
                    fractions: fractions_to_json(&s.fractions),
                })
                .collect(),
            looped: self.looped.as_ref().map(|l| {
                let any_fraction = l.ops.iter().any(|(_, f)| f.iter().any(Option::is_some));
                LoopJson {
                    period: l.period(),
                    ops: l.ops.iter().map(|(o, _)| ops_to_json(o)).collect(),
                    fractions: any_fraction.then(|| {
                        l.ops
                            .iter()
                            .map(|(_, f)| [f[0].as_ref().map(fmt_ratio), f[1].as_ref().map(fmt_ratio)])
                            .collect()
                    }),
                }
            }),
            horizon: Some(self.horizon),
        }
    }

    pub fn from_json(j: &ScheduleJson) -> Result<Schedule, ScheduleFormatError> {
        let prefix = j
            .prefix
            .iter()
            .map(|s| {
                Ok(ScheduleStep {
                    time: s.t,
                    ops: ops_from_json(&s.ops)?,
                    fractions: fractions_from_json(&s.fractions)?,
                })
            })
            .collect::<Result<Vec<_>, ScheduleFormatError>>()?;
        let looped = match &j.looped {
            None => None,
            Some(l) => {
                if l.ops.len() != l.period {
                    return Err(ScheduleFormatError(format!(
                        "loop period {} but {} op pairs",
                        l.period,
                        l.ops.len()
                    )));
                }
                let mut ops = Vec::with_capacity(l.period);
                for (k, o) in l.ops.iter().enumerate() {
                    let f = l.fractions.as_ref().and_then(|fs| fs.get(k).cloned());
                    ops.push((ops_from_json(o)?, fractions_from_json(&f)?));
                }
                Some(LoopBlock { ops })
            }
        };
        let horizon = j.horizon.unwrap_or(if looped.is_some() {
            DEFAULT_HORIZON
        } else {
            prefix.len()
        });
        Ok(Schedule {
            prefix,
            looped,
            horizon,
        })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |o: &Pair<OpKind>| format!("[{},{}]", o[0], o[1]);
        let pre: Vec<String> = self.prefix.iter().map(|s| show(&s.ops)).collect();
        write!(f, "{}", pre.join(""))?;
        if let Some(l) = &self.looped {
            let body: Vec<String> = l.ops.iter().map(|(o, _)| show(o)).collect();
            write!(f, "({})*", body.join(""))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alt_shape() {
        let steps = alt().with_horizon(8).unroll();
        assert_eq!(steps.len(), 8);
        assert_eq!(steps[0].ops, [LC, N]);
        assert_eq!(steps[3].ops, [N, M]);
        assert_eq!(
            steps.iter().map(|s| s.time).collect::<Vec<_>>(),
            (1..=8).collect::<Vec<_>>()
        );
    }

    #[test]
    fn sim_shape() {
        let steps = sim().with_horizon(2).unroll();
        assert_eq!(steps[0].ops, [LC, LC]);
        assert_eq!(steps[1].ops, [M, M]);
        assert!(check_legal(&sim(), SchedulerClass::FSYNC).is_ok());
    }

    #[test]
    fn named_schedules_are_legal_and_fair() {
        assert!(check_legal(&alt(), SchedulerClass::LC_MOVE_ATOMIC).is_ok());
        assert!(check_legal(&alt_pair(), SchedulerClass::LC_MOVE_ATOMIC).is_ok());
        assert!(check_legal(&alt_swap(), SchedulerClass::LC_MOVE_ATOMIC).is_ok());
        assert!(check_legal(&ssync_alternating(), SchedulerClass::SSYNC).is_ok());
        assert!(check_fair(&alt()).is_ok());
        assert!(check_fair(&sim()).is_ok());
        // alt interleaves the two robots' cycles: not a round structure
        assert!(check_legal(&alt(), SchedulerClass::SSYNC).is_err());
    }

    #[test]
    fn foreign_look_inside_lc_window() {
        let s = Schedule::from_steps(vec![
            ScheduleStep::new(1, [OpKind::Look, N]),
            ScheduleStep::new(2, [N, LC]),
            ScheduleStep::new(3, [OpKind::Comp, N]),
        ]);
        let v = check_legal(&s, SchedulerClass::LC_ATOMIC).unwrap_err();
        assert_eq!(v.kind, ViolationKind::LcAtomicity);
        assert_eq!(v.times, vec![1, 2]);
        assert!(check_legal(&s, SchedulerClass::ASYNC).is_ok());
    }

    #[test]
    fn foreign_look_inside_move() {
        let s = Schedule::from_steps(vec![
            ScheduleStep::new(1, [LC, N]),
            ScheduleStep::new(2, [OpKind::MB, N]),
            ScheduleStep::new(3, [N, LC]),
            ScheduleStep::new(4, [OpKind::ME, N]),
        ]);
        let v = check_legal(&s, SchedulerClass::LC_MOVE_ATOMIC).unwrap_err();
        assert_eq!(v.kind, ViolationKind::MoveAtomicity);
        assert_eq!(v.times, vec![2, 3]);
        assert!(check_legal(&s, SchedulerClass::LC_ATOMIC).is_ok());
    }

    #[test]
    fn unfair_loop() {
        assert_eq!(
            check_fair(&looping(&[[LC, N], [M, N]])),
            Err(FairnessError::Unfair(Robot::S))
        );
        assert_eq!(check_fair(&Schedule::default()), Err(FairnessError::NoLoop));
    }

    #[test]
    fn json_round_trip() {
        let mut s = alt_pair().with_horizon(20);
        s.prefix.push(ScheduleStep {
            time: 1,
            ops: [LC, LC],
            fractions: [None, None],
        });
        s.looped.as_mut().unwrap().ops[2].1 = [Some(Ratio::new(1.into(), 3.into())), None];
        let text = serde_json::to_string(&s.to_json()).unwrap();
        assert!(text.contains("\"loop\":{\"period\":8"));
        let back = Schedule::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn random_schedules_are_legal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for cls in [
            SchedulerClass::ASYNC,
            SchedulerClass::LC_ATOMIC,
            SchedulerClass::LC_MOVE_ATOMIC,
            SchedulerClass::SSYNC,
            SchedulerClass::FSYNC,
        ] {
            for same_lc in [false, true] {
                let opts = RandomScheduleOptions {
                    same_lc,
                    ..Default::default()
                };
                for _ in 0..50 {
                    let steps = random_schedule(&mut rng, cls, &opts);
                    check_steps(&steps, cls).unwrap();
                }
            }
        }
    }

    #[test]
    fn stricter_class_legality_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let classes = [
            SchedulerClass::FSYNC,
            SchedulerClass::SSYNC,
            SchedulerClass::LC_MOVE_ATOMIC,
            SchedulerClass::LC_ATOMIC,
            SchedulerClass::ASYNC,
        ];
        for strict in classes {
            for _ in 0..30 {
                let steps = random_schedule(&mut rng, strict, &RandomScheduleOptions::default());
                for weak in classes.iter().filter(|w| strict.at_least_as_strict_as(w)) {
                    assert!(check_steps(&steps, *weak).is_ok(), "{strict} -> {weak}");
                }
            }
        }
    }
}
