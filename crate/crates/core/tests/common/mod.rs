//! Engine invariant checks shared by the property tests and the acceptance run.

#![allow(dead_code)]

use lumirend::algorithms::{builtin, enumerate, family_samples, AlgorithmId};
use lumirend::engine::{run_past_rendezvous, run_steps, InitialConfig, OpKind, Trace};
use lumirend::model::{int, ratio, Color, LightGraph, MovementModel, Ratio, SchedulerClass};
use lumirend::schedules::{random_schedule, RandomScheduleOptions, ScheduleStep};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn builtins() -> Vec<(String, LightGraph)> {
    let mut ids = vec![
        AlgorithmId::Ss3,
        AlgorithmId::NonQss3,
        AlgorithmId::Qss4,
        AlgorithmId::Ss5,
        AlgorithmId::AlgA,
        AlgorithmId::AlgB,
    ];
    for n in 1..=6 {
        ids.extend(family_samples(n).into_iter().filter_map(|l| AlgorithmId::family(n, l)));
    }
    ids.into_iter()
        .map(|id| (id.to_string(), builtin(&id).unwrap()))
        .collect()
}

fn three_color_labels() -> Vec<Ratio> {
    vec![int(0), ratio(1, 2), int(1)]
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> LightGraph {
    let en = enumerate(3, &three_color_labels());
    en.get(rng.gen_range(0..en.total()))
}

fn random_colors(rng: &mut ChaCha8Rng, g: &LightGraph) -> (Color, Color) {
    let n = g.num_colors() as u8;
    (Color(rng.gen_range(0..n)), Color(rng.gen_range(0..n)))
}

fn async_steps(rng: &mut ChaCha8Rng, cls: SchedulerClass, fractions: Vec<Ratio>) -> Vec<ScheduleStep> {
    let opts = RandomScheduleOptions {
        steps: 48,
        max_idle: 3,
        max_move_duration: 3,
        fractions,
        same_lc: false,
    };
    random_schedule(rng, cls, &opts)
}

fn jsonl(t: &Trace) -> Vec<u8> {
    let mut buf = Vec::new();
    t.write_jsonl(&mut buf).unwrap();
    buf
}

/// Two runs of the same input give identical bytes.
pub fn check_determinism(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(&mut rng);
    let (a, b) = random_colors(&mut rng, &g);
    let steps = async_steps(&mut rng, SchedulerClass::ASYNC, vec![ratio(1, 3), int(1)]);
    let init = InitialConfig::new(a, b, int(1));
    let mv = MovementModel::non_rigid(ratio(1, 4));
    let x = run_steps(&g, &steps, &init, SchedulerClass::ASYNC, &mv).map_err(|e| e.to_string())?;
    let y = run_steps(&g, &steps, &init, SchedulerClass::ASYNC, &mv).map_err(|e| e.to_string())?;
    if jsonl(&x) != jsonl(&y) {
        return Err(format!("seed {seed}: reruns differ"));
    }
    Ok(())
}

/// A move computed from an old snapshot ignores the partner's later move.
pub fn check_staleness() -> Result<(), String> {
    use OpKind::*;
    let g = builtin(&AlgorithmId::Ss3).unwrap();
    let steps = vec![
        ScheduleStep::new(1, [Look, Noop]),
        ScheduleStep::new(2, [Noop, LC]),
        ScheduleStep::new(3, [Noop, M]),
        ScheduleStep::new(4, [Comp, Noop]),
        ScheduleStep::new(5, [M, Noop]),
    ];
    let init = InitialConfig::new(Color(0), Color(0), int(1));
    let t = run_steps(&g, &steps, &init, SchedulerClass::ASYNC, &MovementModel::Rigid).map_err(|e| e.to_string())?;
    let st = t.state_at(6);
    // s sat at 1 when r looked: r goes to 1/2, not to the midpoint 1/4 of the fresh positions
    if st[0].position != ratio(1, 2) || st[1].position != ratio(1, 2) {
        return Err(format!("positions {} {}", st[0].position, st[1].position));
    }
    Ok(())
}

/// A light set by Comp at `t` is seen by Looks from `t + 1` only.
pub fn check_visibility() -> Result<(), String> {
    use OpKind::*;
    let g = builtin(&AlgorithmId::Ss3).unwrap();
    let init = InitialConfig::new(Color(0), Color(0), int(1));
    let seen_at = |look: u64| -> Result<Color, String> {
        let mut steps = vec![ScheduleStep::new(1, [Look, Noop])];
        if look == 2 {
            steps.push(ScheduleStep::new(2, [Comp, Look]));
        } else {
            steps.push(ScheduleStep::new(2, [Comp, Noop]));
            steps.push(ScheduleStep::new(look, [Noop, Look]));
        }
        steps.push(ScheduleStep::new(look + 1, [Noop, Comp]));
        let t =
            run_steps(&g, &steps, &init, SchedulerClass::ASYNC, &MovementModel::Rigid).map_err(|e| e.to_string())?;
        Ok(t.state_at(look + 2)[1].light)
    };
    // seeing A gives B, seeing B gives C
    let (same, after) = (seen_at(2)?, seen_at(3)?);
    if same != Color(1) || after != Color(2) {
        return Err(format!("Look at Comp time gave {same:?}, one later gave {after:?}"));
    }
    Ok(())
}

/// Rigid runs from distance `k` are the runs from distance 1 scaled by `k`.
pub fn check_rigid_scaling(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(&mut rng);
    let (a, b) = random_colors(&mut rng, &g);
    let cls = [SchedulerClass::ASYNC, SchedulerClass::LC_ATOMIC, SchedulerClass::SSYNC][rng.gen_range(0..3)];
    let steps = async_steps(&mut rng, cls, vec![int(1)]);
    let k = [int(2), ratio(1, 3), ratio(7, 5)][rng.gen_range(0..3)].clone();
    let one = run_steps(
        &g,
        &steps,
        &InitialConfig::new(a, b, int(1)),
        cls,
        &MovementModel::Rigid,
    )
    .map_err(|e| e.to_string())?;
    let kd = run_steps(
        &g,
        &steps,
        &InitialConfig::new(a, b, k.clone()),
        cls,
        &MovementModel::Rigid,
    )
    .map_err(|e| e.to_string())?;
    if one.last_time() != kd.last_time() {
        return Err(format!("seed {seed}: runs end at different times"));
    }
    for t in 0..=one.last_time() {
        let (x, y) = (one.state_at(t), kd.state_at(t));
        for i in 0..2 {
            if &x[i].position_at(t) * &k != y[i].position_at(t) || x[i].light != y[i].light {
                return Err(format!("seed {seed}: robot {i} differs at t={t} ({})", g.describe()));
            }
        }
    }
    Ok(())
}

/// Exchanging the robots (and their operations) reflects the run.
pub fn check_swap_symmetry(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(&mut rng);
    let (a, b) = random_colors(&mut rng, &g);
    let steps = async_steps(&mut rng, SchedulerClass::ASYNC, vec![int(0), ratio(1, 2), int(1)]);
    let mirrored: Vec<ScheduleStep> = steps.iter().map(ScheduleStep::mirrored).collect();
    let mv = MovementModel::non_rigid(ratio(1, 8));
    let d = int(1);
    let x = run_steps(
        &g,
        &steps,
        &InitialConfig::new(a, b, d.clone()),
        SchedulerClass::ASYNC,
        &mv,
    )
    .map_err(|e| e.to_string())?;
    let y = run_steps(
        &g,
        &mirrored,
        &InitialConfig::new(b, a, d.clone()),
        SchedulerClass::ASYNC,
        &mv,
    )
    .map_err(|e| e.to_string())?;
    if x.rendezvous_time() != y.rendezvous_time() {
        return Err(format!(
            "seed {seed}: rendezvous {:?} vs {:?}",
            x.rendezvous_time(),
            y.rendezvous_time()
        ));
    }
    for t in 0..=x.last_time() {
        let (p, q) = (x.state_at(t), y.state_at(t));
        for i in 0..2 {
            let j = 1 - i;
            if &d - p[i].position_at(t) != q[j].position_at(t) || p[i].light != q[j].light {
                return Err(format!("seed {seed}: mismatch at t={t}"));
            }
        }
    }
    Ok(())
}

/// Once the robots share a point they never separate, for every built-in.
pub fn check_absorbing(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (name, g) in builtins() {
        let (a, b) = random_colors(&mut rng, &g);
        let cls = [SchedulerClass::ASYNC, SchedulerClass::LC_ATOMIC][rng.gen_range(0..2)];
        let steps = async_steps(&mut rng, cls, vec![int(0), ratio(1, 2), int(1)]);
        let mv = MovementModel::non_rigid(ratio(1, 4));
        for d in [int(0), int(1)] {
            let t =
                run_past_rendezvous(&g, &steps, &InitialConfig::new(a, b, d), cls, &mv).map_err(|e| e.to_string())?;
            if let Some(met) = t.rendezvous_time() {
                if let Some(bad) = (met..=t.last_time()).find(|&u| !t.distance_at(u).is_zero()) {
                    return Err(format!("{name} seed {seed}: met at {met}, apart at {bad}"));
                }
            }
        }
    }
    Ok(())
}
