//! Scaling-loop certificates: a finite witness that an execution never meets.
//!
//! In Rigid movement the future of a state where both robots are strictly idle
//! depends only on the two colors and the distance, up to translation,
//! reflection, and scale. If a schedule block leads from `(c_r, c_s; d)` to the
//! same color pair (possibly with the robots exchanged) at distance `ratio * d`
//! with `ratio > 0`, repeating the block (mirrored when exchanged) never reaches
//! distance zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_traits::{One, Zero};

use crate::engine::{configuration_of, run_steps, ConfigurationView, InitialConfig, OpKind, Pair, Trace};
use crate::model::{
    fmt_ratio, parse_ratio, validate_graph, GraphSpec, LightGraph, MovementModel, Ratio, SchedulerClass,
};
use crate::schedules::{check_steps, starved_robot, ScheduleStep, StepJson};

/// Block repetitions replayed by [`ScalingLoopCertificate::validate`].
pub const VALIDATION_REPEATS: u64 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalingLoopCertificate {
    pub graph: LightGraph,
    pub scheduler: SchedulerClass,
    pub initial: InitialConfig,
    /// Steps before the loop entry, absolute times.
    pub prefix: Vec<ScheduleStep>,
    pub entry_time: u64,
    pub entry: ConfigurationView,
    /// One block, times relative to the entry (first step at offset 0 or later).
    pub block: Vec<ScheduleStep>,
    pub block_len: u64,
    pub ratio: Ratio,
    /// The block ends with the colors exchanged between the robots.
    pub swapped: bool,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("ratio {0} outside (0,1]")]
    BadRatio(String),
    #[error("entry distance must be positive")]
    ZeroEntry,
    #[error("malformed block: {0}")]
    MalformedBlock(String),
    #[error("robot {0} never completes a cycle in the loop")]
    Unfair(String),
    #[error("illegal schedule: {0}")]
    Illegal(String),
    #[error("replay failed: {0}")]
    Replay(String),
    #[error("at t={time}: expected {expected}, found {found}")]
    Mismatch { time: u64, expected: String, found: String },
    #[error("bad certificate file: {0}")]
    Format(String),
}

impl ScalingLoopCertificate {
    /// The `k`-th block copy, at absolute times.
    pub fn block_copy(&self, k: u64) -> Vec<ScheduleStep> {
        let start = self.entry_time + k * self.block_len;
        self.block
            .iter()
            .map(|s| {
                let s = if self.swapped && k % 2 == 1 {
                    s.mirrored()
                } else {
                    s.clone()
                };
                ScheduleStep {
                    time: start + s.time,
                    ..s
                }
            })
            .collect()
    }

    /// Prefix followed by `repeats` block copies.
    pub fn unrolled(&self, repeats: u64) -> Vec<ScheduleStep> {
        let mut steps = self.prefix.clone();
        for k in 0..repeats {
            steps.extend(self.block_copy(k));
        }
        steps
    }

    pub fn expected_at(&self, k: u64) -> ConfigurationView {
        let mut d = self.entry.d.clone();
        for _ in 0..k {
            d *= &self.ratio;
        }
        let view = ConfigurationView {
            d,
            ..self.entry.clone()
        };
        if self.swapped && k % 2 == 1 {
            view.swapped()
        } else {
            view
        }
    }

    /// Replays the prefix and several block copies in Rigid movement and
    /// checks every block boundary.
    pub fn validate(&self) -> Result<Trace, CertificateError> {
        if !(self.ratio > Ratio::zero() && self.ratio <= Ratio::one()) {
            return Err(CertificateError::BadRatio(fmt_ratio(&self.ratio)));
        }
        if self.entry.d <= Ratio::zero() {
            return Err(CertificateError::ZeroEntry);
        }
        if self.block.is_empty() || self.block_len == 0 {
            return Err(CertificateError::MalformedBlock("empty block".into()));
        }
        if self.block.last().unwrap().time >= self.block_len {
            return Err(CertificateError::MalformedBlock("step beyond block length".into()));
        }
        if self.prefix.last().is_some_and(|s| s.time >= self.entry_time) {
            return Err(CertificateError::MalformedBlock("prefix overlaps the loop".into()));
        }
        let mut loop_ops: Vec<Pair<OpKind>> = self.block.iter().map(|s| s.ops).collect();
        if self.swapped {
            loop_ops.extend(self.block.iter().map(|s| [s.ops[1], s.ops[0]]));
        }
        if let Some(r) = starved_robot(&loop_ops) {
            return Err(CertificateError::Unfair(r.to_string()));
        }
        let steps = self.unrolled(VALIDATION_REPEATS);
        check_steps(&steps, self.scheduler).map_err(|v| CertificateError::Illegal(v.to_string()))?;
        let trace = run_steps(
            &self.graph,
            &steps,
            &self.initial,
            self.scheduler,
            &MovementModel::Rigid,
        )
        .map_err(|e| CertificateError::Replay(e.to_string()))?;
        if let Some(t) = trace.rendezvous_time() {
            return Err(CertificateError::Replay(format!("robots meet at t={t}")));
        }
        for k in 0..=VALIDATION_REPEATS {
            let t = self.entry_time + k * self.block_len;
            let state = trace.state_at(t);
            let found = configuration_of(state, t);
            let expected = self.expected_at(k);
            if !(state[0].strictly_idle() && state[1].strictly_idle()) || found != expected {
                return Err(CertificateError::Mismatch {
                    time: t,
                    expected: expected.show(&self.graph),
                    found: found.show(&self.graph),
                });
            }
        }
        Ok(trace)
    }

    /// Builds a candidate from a trace between two strict cs-times.
    pub fn from_trace(trace: &Trace, initial: &InitialConfig, t1: u64, t2: u64) -> Option<Self> {
        let a = configuration_of(trace.state_at(t1), t1);
        let b = configuration_of(trace.state_at(t2), t2);
        if a.d.is_zero() || t2 <= t1 {
            return None;
        }
        let swapped = if (a.c_r, a.c_s) == (b.c_r, b.c_s) {
            false
        } else if (a.c_r, a.c_s) == (b.c_s, b.c_r) {
            true
        } else {
            return None;
        };
        let steps: Vec<ScheduleStep> = trace
            .steps
            .iter()
            .map(|s| ScheduleStep {
                time: s.time,
                ops: s.ops,
                fractions: s.fractions.clone(),
            })
            .collect();
        let prefix: Vec<ScheduleStep> = steps.iter().filter(|s| s.time < t1).cloned().collect();
        let block: Vec<ScheduleStep> = steps
            .iter()
            .filter(|s| s.time >= t1 && s.time < t2)
            .map(|s| ScheduleStep {
                time: s.time - t1,
                ..s.clone()
            })
            .collect();
        Some(ScalingLoopCertificate {
            graph: trace.graph.clone(),
            scheduler: trace.scheduler,
            initial: initial.clone(),
            prefix,
            entry_time: t1,
            ratio: &b.d / &a.d,
            entry: a,
            block,
            block_len: t2 - t1,
            swapped,
        })
    }
}

/// Looks for a validated scaling loop between strict cs-times of `trace`.
///
/// Only meaningful for traces in which the two robots have not met; the
/// certificate is replayed in Rigid movement, so under Non-Rigid it stands
/// for the execution where every move is completed.
pub fn detect_scaling_loop(trace: &Trace, initial: &InitialConfig) -> Option<ScalingLoopCertificate> {
    if trace.rendezvous_time().is_some() {
        return None;
    }
    let times = trace.strict_cs_times();
    for (j, &t2) in times.iter().enumerate() {
        for &t1 in times[..j].iter() {
            let Some(cert) = ScalingLoopCertificate::from_trace(trace, initial, t1, t2) else {
                continue;
            };
            if cert.validate().is_ok() {
                return Some(cert);
            }
        }
    }
    None
}

// ---- JSON form ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigJson {
    pub colors: [String; 2],
    pub distance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    pub graph: GraphSpec,
    pub class: String,
    pub initial: ConfigJson,
    pub prefix: Vec<StepJson>,
    pub entry: ConfigJson,
    pub block: Vec<StepJson>,
    pub block_length: u64,
    pub ratio: String,
    pub swapped: bool,
}

fn steps_json(steps: &[ScheduleStep]) -> Vec<StepJson> {
    crate::schedules::Schedule::from_steps(steps.to_vec()).to_json().prefix
}

fn steps_from_json(steps: &[StepJson]) -> Result<Vec<ScheduleStep>, CertificateError> {
    let j = crate::schedules::ScheduleJson {
        prefix: steps.to_vec(),
        looped: None,
        horizon: None,
    };
    crate::schedules::Schedule::from_json(&j)
        .map(|s| s.prefix)
        .map_err(|e| CertificateError::Format(e.to_string()))
}

impl ScalingLoopCertificate {
    pub fn to_json(&self) -> CertificateJson {
        let g = &self.graph;
        CertificateJson {
            graph: g.to_spec(),
            class: self.scheduler.to_string(),
            initial: ConfigJson {
                colors: [g.name(self.initial.c_r).into(), g.name(self.initial.c_s).into()],
                distance: fmt_ratio(&self.initial.distance),
                time: None,
            },
            prefix: steps_json(&self.prefix),
            entry: ConfigJson {
                colors: [g.name(self.entry.c_r).into(), g.name(self.entry.c_s).into()],
                distance: fmt_ratio(&self.entry.d),
                time: Some(self.entry_time),
            },
            block: steps_json(&self.block),
            block_length: self.block_len,
            ratio: fmt_ratio(&self.ratio),
            swapped: self.swapped,
        }
    }

    pub fn from_json(j: &CertificateJson) -> Result<Self, CertificateError> {
        let fmt_err = |e: String| CertificateError::Format(e);
        let graph = validate_graph(&j.graph).map_err(|e| fmt_err(e.to_string()))?;
        let color = |n: &str| {
            graph
                .color_by_name(n)
                .ok_or_else(|| fmt_err(format!("unknown color {n}")))
        };
        let dist = |s: &str| parse_ratio(s).map_err(|e| fmt_err(e.to_string()));
        Ok(ScalingLoopCertificate {
            scheduler: SchedulerClass::parse(&j.class).map_err(fmt_err)?,
            initial: InitialConfig::new(
                color(&j.initial.colors[0])?,
                color(&j.initial.colors[1])?,
                dist(&j.initial.distance)?,
            ),
            prefix: steps_from_json(&j.prefix)?,
            entry_time: j.entry.time.ok_or_else(|| fmt_err("entry needs a time".into()))?,
            entry: ConfigurationView {
                c_r: color(&j.entry.colors[0])?,
                c_s: color(&j.entry.colors[1])?,
                d: dist(&j.entry.distance)?,
            },
            block: steps_from_json(&j.block)?,
            block_len: j.block_length,
            ratio: dist(&j.ratio)?,
            swapped: j.swapped,
            graph,
        })
    }
}
