//! Command-line front end: `run`, `verify`, `enumerate`, `replay`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algorithms::{builtin, classify_shape, enumerate, AlgorithmId};
use crate::engine::{run, InitialConfig};
use crate::model::{
    fmt_ratio, parse_ratio, validate_graph, Color, GraphSpec, LightGraph, MovementModel, Ratio, SchedulerClass,
};
use crate::par::Parallelism;
use crate::schedules::{named, Schedule, ScheduleJson};
use crate::verify::{
    adversary_search, aggregate, all_starts, check_rendezvous, classify_stabilization, detect_scaling_loop,
    label_adversary, reachable_labels, replay_paper_counterexample, same_color_starts, structural_check,
    CertificateJson, MonitorSpec, ScalingLoopCertificate, SearchConfig, SearchOutcome, Verdict,
};

/// Requests above this many algorithms need `--force`.
pub const ENUMERATE_LIMIT: u64 = 1000;

#[derive(Parser, Debug)]
#[command(name = "lumirend", version, about = "Two-robot rendezvous with external lights")]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON object whose keys are flags of the chosen subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one schedule and print the trace.
    Run(RunArgs),
    /// Search all adversarial schedules, or validate a certificate file.
    Verify(VerifyArgs),
    /// Survey every algorithm with k colors over a label set.
    Enumerate(EnumerateArgs),
    /// Replay a named counterexample schedule.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone)]
pub struct AlgArgs {
    /// Built-in name (`ss3`, `qss4`, `alg3`, ...) or a light-graph JSON file.
    #[arg(long, value_name = "NAME|FILE")]
    pub alg: Option<String>,
    /// Parameter of the alg1..alg6 families.
    #[arg(long)]
    pub lambda: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct MoveArgs {
    /// Scheduler class: fsync, ssync, async, lc-atomic, move-atomic (comma separated).
    #[arg(long, default_value = "async")]
    pub class: String,
    #[arg(long, conflicts_with = "nonrigid")]
    pub rigid: bool,
    #[arg(long, requires = "delta")]
    pub nonrigid: bool,
    /// Minimum move length for --nonrigid, as p/q.
    #[arg(long)]
    pub delta: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Jsonl,
    Csv,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub alg: AlgArgs,
    #[command(flatten)]
    pub movement: MoveArgs,
    /// alt, sim, alt-mirror, alt-pair, alt-swap, ssync-alt, or a schedule JSON file.
    #[arg(long, default_value = "alt")]
    pub schedule: String,
    /// Initial colors `X,Y`.
    #[arg(long, default_value = "A,A")]
    pub init: String,
    #[arg(long, default_value = "1")]
    pub dist: String,
    #[arg(long, env = "LUMIREND_HORIZON", default_value_t = 64)]
    pub horizon: u64,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: TraceFormat,
    /// Write the trace here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the certificate here when the run diverges.
    #[arg(long)]
    pub cert: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub alg: AlgArgs,
    #[command(flatten)]
    pub movement: MoveArgs,
    #[arg(long, env = "LUMIREND_HORIZON", default_value_t = 64)]
    pub horizon: u64,
    /// Initial colors `X,Y`; repeatable. Without it the algorithm is classified.
    #[arg(long = "init", alias = "inits")]
    pub inits: Vec<String>,
    #[arg(long, default_value = "1")]
    pub dist: String,
    /// Stop fractions offered to the adversary.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub fractions: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub max_idle: u32,
    /// Check the trace invariants on every explored branch.
    #[arg(long)]
    pub monitors: bool,
    #[arg(long)]
    pub sequential: bool,
    /// Re-run a certificate file instead of searching.
    #[arg(long, value_name = "FILE")]
    pub validate: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long, default_value_t = 3)]
    pub colors: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,1/2,1")]
    pub labels: Vec<String>,
    #[command(flatten)]
    pub movement: MoveArgs,
    #[arg(long, env = "LUMIREND_HORIZON", default_value_t = 64)]
    pub horizon: u64,
    /// Also search every mixed start.
    #[arg(long)]
    pub all_starts: bool,
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    pub name: String,
    #[arg(long)]
    pub lambda: Option<String>,
    /// Write the certificate here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses the command line, splicing in `--config` entries right after the
/// subcommand name so explicit flags override them.
pub fn parse_args(args: Vec<String>) -> Result<Cli, clap::Error> {
    let expanded = expand_config(args).map_err(|e| clap::Error::raw(clap::error::ErrorKind::Io, e + "\n"))?;
    Cli::try_parse_from(expanded)
}

fn expand_config(mut args: Vec<String>) -> Result<Vec<String>, String> {
    let pos = args.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else { return Ok(args) };
    let path = match args[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => args.get(pos + 1).cloned().ok_or("--config needs a file")?,
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("{path}: {e}"))?;
    let obj: serde_json::Map<String, Value> = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
    let mut extra = Vec::new();
    for (k, v) in obj {
        let flag = format!("--{}", k.replace('_', "-"));
        let mut push = |v: &Value| -> Result<(), String> {
            match v {
                Value::Bool(true) => extra.push(flag.clone()),
                Value::Bool(false) | Value::Null => {}
                Value::String(s) => extra.extend([flag.clone(), s.clone()]),
                Value::Number(n) => extra.extend([flag.clone(), n.to_string()]),
                _ => return Err(format!("{path}: unsupported value for {k}")),
            }
            Ok(())
        };
        match &v {
            Value::Array(items) => items.iter().try_for_each(&mut push)?,
            other => push(other)?,
        }
    }
    let sub = args
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| ["run", "verify", "enumerate", "replay"].contains(&a.as_str()))
        .map(|(i, _)| i)
        .ok_or("--config needs a subcommand")?;
    let tail = args.split_off(sub + 1);
    args.extend(extra);
    args.extend(tail);
    Ok(args)
}

fn ratio_arg(s: &str, what: &str) -> Result<Ratio, String> {
    parse_ratio(s).map_err(|e| format!("--{what} {s:?}: {e}"))
}

fn load_graph(a: &AlgArgs) -> Result<(String, LightGraph), String> {
    let name = a.alg.as_deref().ok_or("--alg is required")?;
    if Path::new(name).is_file() {
        let text = fs::read_to_string(name).map_err(|e| format!("{name}: {e}"))?;
        let spec: GraphSpec = serde_json::from_str(&text).map_err(|e| format!("{name}: {e}"))?;
        return Ok((
            name.to_string(),
            validate_graph(&spec).map_err(|e| format!("{name}: {e}"))?,
        ));
    }
    let full = match &a.lambda {
        Some(l) => format!("{name}:{l}"),
        None => name.to_string(),
    };
    let id = AlgorithmId::parse(&full).map_err(|e| e.to_string())?;
    Ok((id.to_string(), builtin(&id).map_err(|e| e.to_string())?))
}

fn movement(m: &MoveArgs) -> Result<(SchedulerClass, MovementModel), String> {
    let cls = SchedulerClass::parse(&m.class)?;
    let mv = if m.nonrigid {
        MovementModel::non_rigid(ratio_arg(m.delta.as_deref().unwrap_or_default(), "delta")?)
    } else {
        if m.delta.is_some() {
            return Err("--delta needs --nonrigid".into());
        }
        MovementModel::Rigid
    };
    Ok((cls, mv))
}

fn parse_init(g: &LightGraph, s: &str, d: &Ratio) -> Result<InitialConfig, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("--init {s:?}: expected X,Y"))?;
    let color = |n: &str| {
        g.color_by_name(n.trim())
            .ok_or_else(|| format!("--init: unknown color {n:?}"))
    };
    Ok(InitialConfig::new(color(a)?, color(b)?, d.clone()))
}

fn load_schedule(s: &str) -> Result<Schedule, String> {
    if let Some(sched) = named(s) {
        return Ok(sched);
    }
    let text = fs::read_to_string(s).map_err(|e| format!("schedule {s:?}: not a named schedule and {e}"))?;
    let j: ScheduleJson = serde_json::from_str(&text).map_err(|e| format!("{s}: {e}"))?;
    Schedule::from_json(&j).map_err(|e| format!("{s}: {e}"))
}

fn write_out(path: &Option<PathBuf>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => stdout.write_all(bytes).map_err(|e| e.to_string()),
    }
}

fn cert_json(c: &ScalingLoopCertificate) -> Value {
    serde_json::to_value(c.to_json()).expect("certificate serializes")
}

fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Rendezvous { time } => json!({"verdict": v.name(), "time": time}),
        Verdict::Diverges { certificate } => json!({"verdict": v.name(), "certificate": cert_json(certificate)}),
        Verdict::InconclusiveAtHorizon { horizon } => json!({"verdict": v.name(), "horizon": horizon}),
    }
}

fn outcome_json(g: &LightGraph, o: &SearchOutcome) -> Value {
    let mut v = verdict_json(&o.verdict);
    let m = v.as_object_mut().expect("object");
    m.insert("init".into(), json!([g.name(o.initial.c_r), g.name(o.initial.c_s)]));
    m.insert("distance".into(), json!(fmt_ratio(&o.initial.distance)));
    m.insert("explored".into(), json!(o.explored));
    m.insert("open".into(), json!(o.open));
    m.insert("exhaustive".into(), json!(o.exhaustive));
    let pairs: Vec<String> = o
        .cs_pairs
        .iter()
        .map(|(a, b)| format!("{},{}", g.name(*a), g.name(*b)))
        .collect();
    m.insert("cs_pairs".into(), json!(pairs));
    let viol: Vec<Value> = o
        .violations
        .iter()
        .map(|x| json!({"property": x.property, "times": x.times, "detail": x.detail}))
        .collect();
    m.insert("violations".into(), json!(viol));
    v
}

/// Runs a parsed command; returns the exit code.
pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, String> {
    match cli.command {
        Command::Run(a) => cmd_run(a, stdout, stderr),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
        Command::Enumerate(a) => cmd_enumerate(a, stdout, stderr),
        Command::Replay(a) => cmd_replay(a, stdout, stderr),
    }
}

fn cmd_run(a: RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, String> {
    let (_, g) = load_graph(&a.alg)?;
    let (cls, mv) = movement(&a.movement)?;
    let d = ratio_arg(&a.dist, "dist")?;
    if d < Ratio::from_integer(0.into()) {
        return Err("--dist must be non-negative".into());
    }
    let init = parse_init(&g, &a.init, &d)?;
    let horizon = usize::try_from(a.horizon).map_err(|e| e.to_string())?;
    let schedule = load_schedule(&a.schedule)?.with_horizon(horizon);
    let trace = run(&g, &schedule, &init, cls, &mv).map_err(|e| e.to_string())?;
    let cert = if mv.is_rigid() {
        detect_scaling_loop(&trace, &init)
    } else {
        None
    };
    let verdict = check_rendezvous(&trace, cert);
    let mut buf = Vec::new();
    match a.format {
        TraceFormat::Jsonl => trace.write_jsonl(&mut buf),
        TraceFormat::Csv => trace.write_csv(&mut buf),
    }
    .map_err(|e| e.to_string())?;
    write_out(&a.out, &buf, stdout)?;
    let summary = match &verdict {
        Verdict::Rendezvous { time } => format!("Rendezvous at t={time}"),
        Verdict::Diverges { certificate: c } => format!(
            "Diverges: {} at t={} recurs every {} steps with ratio {}{}",
            c.entry.show(&g),
            c.entry_time,
            c.block_len,
            fmt_ratio(&c.ratio),
            if c.swapped { " (swapped)" } else { "" }
        ),
        Verdict::InconclusiveAtHorizon { horizon } => format!("Inconclusive at t={horizon}"),
    };
    writeln!(stderr, "{summary}").map_err(|e| e.to_string())?;
    if let (Some(path), Some(c)) = (&a.cert, verdict.certificate()) {
        let text = serde_json::to_string_pretty(&c.to_json()).expect("serializes");
        fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(verdict.exit_code())
}

fn validate_file(path: &Path, stdout: &mut dyn Write) -> Result<i32, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let j: CertificateJson = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let cert = ScalingLoopCertificate::from_json(&j).map_err(|e| e.to_string())?;
    cert.validate().map_err(|e| format!("invalid certificate: {e}"))?;
    writeln!(
        stdout,
        "valid: {} at t={} recurs with ratio {}",
        cert.entry.show(&cert.graph),
        cert.entry_time,
        fmt_ratio(&cert.ratio)
    )
    .map_err(|e| e.to_string())?;
    Ok(Verdict::Diverges {
        certificate: Box::new(cert),
    }
    .exit_code())
}

fn cmd_verify(a: VerifyArgs, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> Result<i32, String> {
    if let Some(path) = &a.validate {
        return validate_file(path, stdout);
    }
    let (name, g) = load_graph(&a.alg)?;
    let (cls, mv) = movement(&a.movement)?;
    let d = ratio_arg(&a.dist, "dist")?;
    let inits = a
        .inits
        .iter()
        .map(|s| parse_init(&g, s, &d))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cfg = SearchConfig::new(cls, mv.clone(), inits.clone(), a.horizon);
    cfg.fractions = a
        .fractions
        .iter()
        .map(|f| ratio_arg(f, "fractions"))
        .collect::<Result<_, _>>()?;
    cfg.max_idle = a.max_idle;
    if a.sequential {
        cfg.parallelism = Parallelism::Sequential;
    }
    if a.monitors {
        let mut spec = MonitorSpec::for_graph(&g, &mv);
        if name == "qss4" {
            spec = spec.with_bc_shrink(&g);
        }
        cfg.monitors = Some(spec);
    }
    let head = json!({
        "algorithm": name,
        "graph": g.to_spec(),
        "class": cls.to_string(),
        "movement": match mv.delta() { Some(dl) => format!("nonrigid {}", fmt_ratio(dl)), None => "rigid".into() },
        "horizon": a.horizon,
    });
    let (report, code) = if inits.is_empty() {
        let r = classify_stabilization(
            &g,
            &SearchConfig {
                initial: vec![InitialConfig::new(Color(0), Color(0), d)],
                ..cfg
            },
        );
        let all: Vec<&SearchOutcome> = r.same_color.iter().chain(&r.mixed).collect();
        let inconclusive = all
            .iter()
            .filter(|o| matches!(o.verdict, Verdict::InconclusiveAtHorizon { .. }))
            .count();
        let report = json!({
            "same_color": r.same_color.iter().map(|o| outcome_json(&g, o)).collect::<Vec<_>>(),
            "mixed": r.mixed.iter().map(|o| outcome_json(&g, o)).collect::<Vec<_>>(),
            "inconclusive": inconclusive,
            "classification": r.classification.to_string(),
        });
        (report, 0)
    } else {
        let out = adversary_search(&g, &cfg);
        let verdict = aggregate(out.iter().map(|o| &o.verdict)).expect("at least one start");
        let inconclusive = out
            .iter()
            .filter(|o| matches!(o.verdict, Verdict::InconclusiveAtHorizon { .. }))
            .count();
        let report = json!({
            "results": out.iter().map(|o| outcome_json(&g, o)).collect::<Vec<_>>(),
            "inconclusive": inconclusive,
            "verdict": verdict.name(),
        });
        (report, verdict.exit_code())
    };
    let mut full = head;
    full.as_object_mut()
        .expect("object")
        .extend(report.as_object().expect("object").clone());
    let text = serde_json::to_string_pretty(&full).expect("serializes");
    writeln!(stdout, "{text}").map_err(|e| e.to_string())?;
    Ok(code)
}

fn cmd_enumerate(a: EnumerateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, String> {
    let labels = a
        .labels
        .iter()
        .map(|l| ratio_arg(l, "labels"))
        .collect::<Result<Vec<_>, _>>()?;
    if a.colors == 0 || a.colors > 26 {
        return Err("--colors must be between 1 and 26".into());
    }
    let en = enumerate(a.colors, &labels);
    let total = en.total();
    if total > ENUMERATE_LIMIT && !a.force {
        return Err(format!("{total} algorithms exceed {ENUMERATE_LIMIT}; pass --force"));
    }
    let (cls, mv) = movement(&a.movement)?;
    let par = if a.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::default()
    };
    let rows = par.map_range(total, |i| survey_row(&en.get(i), i, cls, &mv, a.horizon, a.all_starts));
    let mut out = String::from("index,graph,shape,missing_labels,label_adversaries,starts,verdict\n");
    let mut counts = [0usize; 3];
    for (line, v) in &rows {
        out.push_str(line);
        out.push('\n');
        counts[match v.as_str() {
            "Rendezvous" => 0,
            "Diverges" => 1,
            _ => 2,
        }] += 1;
    }
    stdout.write_all(out.as_bytes()).map_err(|e| e.to_string())?;
    writeln!(
        stderr,
        "algorithms={total} rendezvous={} diverges={} inconclusive={}",
        counts[0], counts[1], counts[2]
    )
    .map_err(|e| e.to_string())?;
    Ok(0)
}

/// One CSV row and the aggregate verdict name.
pub fn survey_row(
    g: &LightGraph,
    index: u64,
    cls: SchedulerClass,
    mv: &MovementModel,
    horizon: u64,
    mixed: bool,
) -> (String, String) {
    let one = Ratio::from_integer(1.into());
    let starts = if mixed {
        all_starts(g, &one)
    } else {
        same_color_starts(g, &one)
    };
    let mut cfg = SearchConfig::new(cls, mv.clone(), starts, horizon);
    cfg.parallelism = Parallelism::Sequential;
    let out = adversary_search(g, &cfg);
    let verdict = aggregate(out.iter().map(|o| &o.verdict))
        .expect("at least one start")
        .name()
        .to_string();
    let per_start: Vec<String> = out
        .iter()
        .map(|o| {
            format!(
                "{}{}:{}",
                g.name(o.initial.c_r),
                g.name(o.initial.c_s),
                &o.verdict.name()[..1]
            )
        })
        .collect();
    let label_runs: Vec<String> = g
        .colors()
        .flat_map(|c| {
            reachable_labels(g, c)
                .adversaries()
                .into_iter()
                .map(move |adv| (c, adv))
        })
        .map(|(c, adv)| {
            let (_, v) = label_adversary(g, c, adv, horizon / 2);
            format!("{}:{}:{}", g.name(c), adv.name(), &v.name()[..1])
        })
        .collect();
    let line = format!(
        "{index},{},{},{},{},{},{verdict}",
        g.describe(),
        classify_shape(g),
        structural_check(g).missing(),
        if label_runs.is_empty() {
            "-".into()
        } else {
            label_runs.join(" ")
        },
        per_start.join(" "),
    );
    (line, verdict)
}

fn cmd_replay(a: ReplayArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, String> {
    let lambda = a.lambda.as_deref().map(|l| ratio_arg(l, "lambda")).transpose()?;
    let rep = replay_paper_counterexample(&a.name, lambda.as_ref()).map_err(|e| e.to_string())?;
    let g = &rep.graph;
    let w = |stderr: &mut dyn Write, s: String| writeln!(stderr, "{s}").map_err(|e| e.to_string());
    for (c, o) in rep.claimed.iter().zip(&rep.observed) {
        let status = if (c.c_r, c.c_s, &c.factor * &rep.initial.distance) == (o.c_r, o.c_s, o.d.clone()) {
            "ok"
        } else {
            "MISMATCH"
        };
        w(
            stderr,
            format!(
                "t={}: claimed ({},{};{}) run {} {status}",
                c.time,
                g.name(c.c_r),
                g.name(c.c_s),
                fmt_ratio(&(&c.factor * &rep.initial.distance)),
                o.show(g)
            ),
        )?;
    }
    match &rep.verdict {
        Verdict::Diverges { certificate } => {
            certificate
                .validate()
                .map_err(|e| format!("certificate failed validation: {e}"))?;
            w(
                stderr,
                format!(
                    "certificate: {} at t={} every {} steps, ratio {}{}",
                    certificate.entry.show(g),
                    certificate.entry_time,
                    certificate.block_len,
                    fmt_ratio(&certificate.ratio),
                    if certificate.swapped { " (swapped)" } else { "" }
                ),
            )?;
            let text = serde_json::to_string_pretty(&certificate.to_json()).expect("serializes") + "\n";
            write_out(&a.out, text.as_bytes(), stdout)?;
        }
        Verdict::Rendezvous { time } => w(stderr, format!("no divergence: the replay meets at t={time}"))?,
        Verdict::InconclusiveAtHorizon { horizon } => w(stderr, format!("no loop found by t={horizon}"))?,
    }
    Ok(rep.verdict.exit_code())
}

/// Entry point shared by the binary: parse, execute, map errors to exit 1.
pub fn main_with(args: Vec<String>) -> i32 {
    let cli = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    match execute(cli, &mut out, &mut err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
