//! Implementations of the subcommands.
//!
//! Cost-reporting commands print a comma-separated table headed
//! `instance,strategy,scale,multiple,cost,gain` to stdout; columns that do
//! not apply stay empty. `simulate` appends a `stderr` column with the
//! estimate's standard error.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use svrp_core::assign::EvalContext;
use svrp_core::bench::{
    gain, gen_instance, performance_profile, read_instance, read_pool, read_solution,
    synthetic_pool, write_instance, write_pool, write_solution, AddressPool, GeneratorParams,
    SolutionFile, WaitingMode,
};
use svrp_core::expect::expected_cost;
use svrp_core::model::{
    rescale_solution, scale_instance, Capacity, Instance, Strategy, Time,
};
use svrp_core::rng::SplitMix64;
use svrp_core::search::{
    scheduled_search, solve_exact, trim_to_horizon, MemoryLog, Phase, SearchConfig, SearchResult,
    LOG_HEADER,
};
use svrp_core::simulate::{monte_carlo_recourse, monte_carlo_wait_and_serve, McEstimate};

use crate::manifest::ManifestBuilder;
use crate::{
    EvaluateArgs, ExactArgs, Failure, GenerateArgs, ModeArg, ProfileArgs, SimulateArgs, SolveArgs,
};

const TABLE_HEADER: &str = "instance,strategy,scale,multiple,cost,gain";

fn opt_field<T: std::fmt::Display>(value: Option<T>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn table_row(
    instance: &str,
    strategy: &str,
    scale: Time,
    multiple: Option<Time>,
    cost: f64,
    gain: Option<f64>,
) -> String {
    format!("{instance},{strategy},{scale},{},{cost},{}", opt_field(multiple), opt_field(gain))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    read_instance(&read_text(path)?).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load_solution(path: &Path) -> Result<SolutionFile, Failure> {
    read_solution(&read_text(path)?).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load_pool(path: &Path) -> Result<AddressPool, Failure> {
    read_pool(&read_text(path)?).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}

fn default_manifest(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest.json", out.display()))
}

fn parse_capacity(text: &str) -> Result<Capacity, Failure> {
    if text == "unbounded" {
        return Ok(Capacity::Unbounded);
    }
    text.parse::<i64>()
        .map(Capacity::Finite)
        .map_err(|_| Failure::Usage(format!("capacity must be an integer or `unbounded`, got `{text}`")))
}

pub fn generate(args: &GenerateArgs) -> Result<(), Failure> {
    let mut manifest = ManifestBuilder::new("generate", args, Some(args.seed));
    let pool = match (&args.pool, args.synthetic) {
        (Some(_), true) => {
            return Err(Failure::Usage("--pool and --synthetic are mutually exclusive".into()))
        }
        (Some(path), false) => load_pool(path)?,
        (None, true) => synthetic_pool(args.pool_size, args.pool_seed),
        (None, false) => {
            return Err(Failure::Usage("no address pool: pass --pool FILE or --synthetic".into()))
        }
    };
    let mode = match args.mode {
        ModeArg::Separated => {
            let waiting = args
                .waiting
                .ok_or_else(|| Failure::Usage("separated mode needs --waiting".into()))?;
            WaitingMode::Separated { waiting }
        }
        ModeArg::Colocated => {
            if args.waiting.is_some() {
                return Err(Failure::Usage(
                    "colocated mode derives the waiting locations from the customers; drop --waiting".into(),
                ));
            }
            WaitingMode::Colocated
        }
    };
    let mut params = GeneratorParams::standard(args.customers, mode, args.seed);
    params.vehicles = args.vehicles;
    params.capacity = parse_capacity(&args.capacity)?;
    params.horizon = args.horizon;
    params.slot_length = args.slot_length;
    params.service = args.service;
    params.sigma = args.sigma;
    params.name = args.name.clone();
    let instance = gen_instance(&pool, &params).map_err(|e| Failure::Usage(e.to_string()))?;
    write_text(&args.out, &write_instance(&instance))?;
    manifest.output(&args.out);
    if let Some(path) = &args.save_pool {
        write_text(path, &write_pool(&pool))?;
        manifest.output(path);
    }
    manifest.note(format!(
        "instance {}: {} potential requests",
        instance.name,
        instance.requests().len()
    ));
    println!(
        "wrote {} ({}, {} potential requests)",
        args.out.display(),
        instance.name,
        instance.requests().len()
    );
    let path = args.manifest.clone().unwrap_or_else(|| default_manifest(&args.out));
    manifest.emit(Some(&path))
}

pub fn evaluate(args: &EvaluateArgs) -> Result<(), Failure> {
    let mut manifest = ManifestBuilder::new("evaluate", args, None);
    let instance = load_instance(&args.instance)?;
    let file = load_solution(&args.solution)?;
    if file.instance_name != instance.name {
        eprintln!(
            "note: solution was stored for `{}`, evaluating against `{}`",
            file.instance_name, instance.name
        );
    }
    let scale = args.scale.unwrap_or(file.scale);
    if scale < 1 {
        return Err(Failure::Usage(format!("scale must be at least 1, got {scale}")));
    }
    let gate = args.gate.to_core();
    let (label, row_scale, cost) = if args.true_cost {
        let restored = rescale_solution(&file.solution, scale);
        let ctx = EvalContext::new(&instance, &restored)
            .map_err(|e| Failure::Infeasible(e.to_string()))?;
        let report =
            expected_cost(&ctx, Strategy::RQPlus, gate).map_err(|e| Failure::Usage(e.to_string()))?;
        ("rq+", 1, report.expected_rejected)
    } else {
        let storage;
        let graded: &Instance = if scale == 1 {
            &instance
        } else {
            storage = scale_instance(&instance, scale);
            &storage
        };
        let ctx = EvalContext::new(graded, &file.solution)
            .map_err(|e| Failure::Infeasible(e.to_string()))?;
        let report = expected_cost(&ctx, args.strategy.to_core(), gate)
            .map_err(|e| Failure::Usage(e.to_string()))?;
        (args.strategy.label(), scale, report.expected_rejected)
    };
    manifest.note(format!("cost {cost} under {label} at scale {row_scale}"));
    println!("{TABLE_HEADER}");
    println!(
        "{}",
        table_row(&instance.name, label, row_scale, None, cost, args.baseline.and_then(|b| gain(b, cost)))
    );
    manifest.emit(args.manifest.as_ref())
}

fn parse_phase(text: &str) -> Result<Phase, Failure> {
    let bad = |what: &str| Failure::Usage(format!("phase `{text}`: {what}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected scale:multiple:fraction"));
    }
    Ok(Phase {
        scale: parts[0].parse().map_err(|_| bad("invalid scale"))?,
        multiple: parts[1].parse().map_err(|_| bad("invalid multiple"))?,
        fraction: parts[2].parse().map_err(|_| bad("invalid fraction"))?,
    })
}

fn build_phases(args: &SolveArgs) -> Result<Vec<Phase>, Failure> {
    match (args.multiple, args.phase.is_empty()) {
        (Some(_), false) => {
            Err(Failure::Usage("--multiple and --phase are mutually exclusive".into()))
        }
        (Some(multiple), true) => Ok(vec![Phase { scale: 1, multiple, fraction: 1.0 }]),
        (None, false) => args.phase.iter().map(|text| parse_phase(text)).collect(),
        (None, true) => Err(Failure::Usage(
            "pass --multiple M or at least one --phase scale:multiple:fraction".into(),
        )),
    }
}

fn run_restarts(
    instance: &Instance,
    config: &SearchConfig,
    threads: usize,
) -> Result<Vec<(SearchResult, MemoryLog)>, Failure> {
    let run_one = |offset: u64| -> Result<(SearchResult, MemoryLog), Failure> {
        let mut cfg = config.clone();
        cfg.seed = config.seed.wrapping_add(offset);
        let mut rng = SplitMix64::new(cfg.seed);
        let mut log = MemoryLog::default();
        let result = scheduled_search(instance, &cfg, &mut rng, &mut log)
            .map_err(|e| Failure::Internal(format!("search failed: {e}")))?;
        Ok((result, log))
    };
    if threads == 1 {
        return Ok(vec![run_one(0)?]);
    }
    let run_one = &run_one;
    let mut results = Vec::with_capacity(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> =
            (0..threads).map(|i| scope.spawn(move || run_one(i as u64))).collect();
        for handle in handles {
            results.push(handle.join().expect("search thread panicked"));
        }
    });
    results.into_iter().collect()
}

pub fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let mut manifest = ManifestBuilder::new("solve", args, Some(args.seed));
    let instance = load_instance(&args.instance)?;
    let phases = build_phases(args)?;
    let time_limit = args.time_limit.unwrap_or(f64::INFINITY);
    if time_limit.is_infinite() && args.iters.is_none() {
        return Err(Failure::Usage(
            "the run would never stop: pass --time-limit and/or --iters".into(),
        ));
    }
    if args.threads < 1 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let config = SearchConfig {
        t_init: args.t_init,
        t_min: args.t_min,
        alpha: args.alpha,
        time_limit,
        max_iters: args.iters,
        strategy: args.strategy.to_core(),
        gate: args.gate.to_core(),
        phases,
        seed: args.seed,
    };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let restarts = run_restarts(&instance, &config, args.threads)?;
    let mut winner = 0;
    for (i, (result, _)) in restarts.iter().enumerate() {
        manifest.note(format!(
            "restart {i}: seed {}, cost {}, {} iterations",
            config.seed.wrapping_add(i as u64),
            result.report_cost,
            result.iterations
        ));
        if result.report_cost < restarts[winner].0.report_cost {
            winner = i;
        }
    }
    let (result, log) = &restarts[winner];
    let winning_seed = config.seed.wrapping_add(winner as u64);
    for note in &log.notes {
        manifest.note(format!("restart {winner}: {note}"));
    }

    let file = SolutionFile {
        instance_name: instance.name.clone(),
        strategy: args.strategy.label().to_string(),
        scale: 1,
        cost: result.report_cost,
        seed: winning_seed,
        solution: result.solution.clone(),
    };
    write_text(&args.out, &write_solution(&file))?;
    manifest.output(&args.out);
    if let Some(path) = &args.log {
        let mut text = String::with_capacity(64 + 40 * log.lines.len());
        let _ = writeln!(text, "{LOG_HEADER}");
        for line in &log.lines {
            let _ = writeln!(text, "{line}");
        }
        write_text(path, &text)?;
        manifest.output(path);
    }

    let multiple = config.phases.last().map(|p| p.multiple);
    println!("{TABLE_HEADER}");
    println!(
        "{}",
        table_row(
            &instance.name,
            args.strategy.label(),
            1,
            multiple,
            result.report_cost,
            args.baseline.and_then(|b| gain(b, result.report_cost)),
        )
    );
    let path = args.manifest.clone().unwrap_or_else(|| default_manifest(&args.out));
    manifest.emit(Some(&path))
}

pub fn exact(args: &ExactArgs) -> Result<(), Failure> {
    let mut manifest = ManifestBuilder::new("exact", args, None);
    let instance = load_instance(&args.instance)?;
    if args.scale < 1 {
        return Err(Failure::Usage(format!("scale must be at least 1, got {}", args.scale)));
    }
    if args.multiple < 1 || args.multiple % args.scale != 0 {
        return Err(Failure::Usage(format!(
            "the waiting multiple must be a positive multiple of the scale, got {} at scale {}",
            args.multiple, args.scale
        )));
    }
    let storage;
    let grid: &Instance = if args.scale == 1 {
        &instance
    } else {
        storage = scale_instance(&instance, args.scale);
        &storage
    };
    let gate = args.gate.to_core();
    let outcome =
        solve_exact(grid, args.strategy.to_core(), gate, args.multiple / args.scale, args.budget)
            .map_err(|e| Failure::Budget(e.to_string()))?;
    manifest.note(format!(
        "grid optimum at scale {}: cost {}, {} candidates evaluated",
        args.scale, outcome.cost, outcome.explored
    ));

    let mut restored = rescale_solution(&outcome.solution, args.scale);
    if restored.validate(&instance).is_err() {
        restored = trim_to_horizon(&instance, restored, args.multiple);
        manifest.note("rescaled optimum exceeded the horizon; waiting times were trimmed");
    }
    let ctx = EvalContext::new(&instance, &restored)
        .map_err(|e| Failure::Internal(format!("rescaled optimum is invalid: {e}")))?;
    let cost = expected_cost(&ctx, Strategy::RQPlus, gate)
        .map_err(|e| Failure::Internal(format!("cannot report the rescaled optimum: {e}")))?
        .expected_rejected;

    if let Some(out) = &args.out {
        let file = SolutionFile {
            instance_name: instance.name.clone(),
            strategy: args.strategy.label().to_string(),
            scale: 1,
            cost,
            seed: 0,
            solution: restored,
        };
        write_text(out, &write_solution(&file))?;
        manifest.output(out);
    }
    println!("{TABLE_HEADER}");
    println!(
        "{}",
        table_row(
            &instance.name,
            args.strategy.label(),
            1,
            Some(args.multiple),
            cost,
            args.baseline.and_then(|b| gain(b, cost)),
        )
    );
    let path = args.manifest.clone().or_else(|| args.out.as_deref().map(default_manifest));
    manifest.emit(path.as_ref())
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let mut manifest = ManifestBuilder::new("simulate", args, Some(args.seed));
    let instance = load_instance(&args.instance)?;
    if args.samples < 1 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    if args.threads < 1 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let gate = args.gate.to_core();
    let est: McEstimate = match args.policy.recourse() {
        None => {
            if args.solution.is_some() {
                return Err(Failure::Usage("the wait-and-serve baseline takes no --solution".into()));
            }
            if args.check {
                return Err(Failure::Usage(
                    "--check compares against a closed form; wait-and-serve has none".into(),
                ));
            }
            monte_carlo_wait_and_serve(&instance, args.samples, args.seed, args.threads)
        }
        Some(strategy) => {
            let path = args
                .solution
                .as_ref()
                .ok_or_else(|| Failure::Usage("recourse policies need a --solution to follow".into()))?;
            let file = load_solution(path)?;
            let restored = rescale_solution(&file.solution, file.scale.max(1));
            let ctx = EvalContext::new(&instance, &restored)
                .map_err(|e| Failure::Infeasible(e.to_string()))?;
            let est =
                monte_carlo_recourse(&ctx, strategy, gate, args.samples, args.seed, args.threads);
            if args.check {
                let closed = expected_cost(&ctx, strategy, gate)
                    .map_err(|e| Failure::Usage(e.to_string()))?
                    .expected_rejected;
                let delta = (closed - est.mean).abs();
                let bound = 4.0 * est.std_err + 1e-9;
                manifest.note(format!(
                    "check: closed form {closed}, sampled {}, standard error {}",
                    est.mean, est.std_err
                ));
                if delta > bound {
                    return Err(Failure::Internal(format!(
                        "closed form {closed} and {}-sample estimate {} disagree by {delta} \
                         (allowed four sigma = {})",
                        est.samples,
                        est.mean,
                        4.0 * est.std_err
                    )));
                }
                eprintln!(
                    "check ok: closed form {closed} vs sampled {} (four sigma = {})",
                    est.mean,
                    4.0 * est.std_err
                );
            }
            est
        }
    };
    manifest.note(format!(
        "{} samples: mean {}, standard error {}",
        est.samples, est.mean, est.std_err
    ));
    println!("{TABLE_HEADER},stderr");
    println!(
        "{},{}",
        table_row(&instance.name, args.policy.label(), 1, None, est.mean, None),
        est.std_err
    );
    manifest.emit(args.manifest.as_ref())
}

fn intern(names: &mut Vec<String>, name: &str) -> usize {
    match names.iter().position(|n| n == name) {
        Some(i) => i,
        None => {
            names.push(name.to_string());
            names.len() - 1
        }
    }
}

fn parse_cost_table(path: &Path, text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), Failure> {
    let err = |line: usize, what: String| {
        Failure::Parse(format!("{} line {line}: {what}", path.display()))
    };
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match rows.next() {
        Some((_, header)) if header == "approach,instance,cost" => {}
        Some((no, header)) => {
            return Err(err(no, format!("expected header `approach,instance,cost`, got `{header}`")))
        }
        None => return Err(Failure::Parse(format!("{}: empty cost table", path.display()))),
    }
    let mut approaches: Vec<String> = Vec::new();
    let mut instances: Vec<String> = Vec::new();
    let mut cells: HashMap<(usize, usize), f64> = HashMap::new();
    for (no, line) in rows {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(no, format!("expected approach,instance,cost, got `{line}`")));
        }
        let a = intern(&mut approaches, fields[0]);
        let i = intern(&mut instances, fields[1]);
        let cost: f64 = fields[2]
            .parse()
            .map_err(|_| err(no, format!("invalid cost `{}`", fields[2])))?;
        if cells.insert((a, i), cost).is_some() {
            return Err(err(no, format!("duplicate cost for `{}` on `{}`", fields[0], fields[1])));
        }
    }
    if approaches.is_empty() {
        return Err(Failure::Parse(format!("{}: no cost rows", path.display())));
    }
    let mut matrix = vec![vec![0.0; instances.len()]; approaches.len()];
    for (a, approach) in approaches.iter().enumerate() {
        for (i, inst) in instances.iter().enumerate() {
            match cells.get(&(a, i)) {
                Some(&cost) => matrix[a][i] = cost,
                None => {
                    return Err(Failure::Parse(format!(
                        "{}: missing cost for `{approach}` on `{inst}`",
                        path.display()
                    )))
                }
            }
        }
    }
    Ok((approaches, matrix))
}

pub fn profile(args: &ProfileArgs) -> Result<(), Failure> {
    let mut manifest = ManifestBuilder::new("profile", args, None);
    let text = read_text(&args.costs)?;
    let (approaches, matrix) = parse_cost_table(&args.costs, &text)?;
    let curves = performance_profile(&matrix)
        .map_err(|e| Failure::Parse(format!("{}: {e}", args.costs.display())))?;
    println!("approach,ratio,fraction");
    for (name, curve) in approaches.iter().zip(&curves) {
        for (ratio, fraction) in curve.points() {
            println!("{name},{ratio},{fraction}");
        }
    }
    manifest.note(format!("{} approaches over {} instances", approaches.len(), matrix[0].len()));
    manifest.emit(args.manifest.as_ref())
}
