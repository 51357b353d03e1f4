mod args;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use serde_json::json;

use dockthrottle::bench::{
    emit_report, parse_matrix, parse_samples, run_matrix, speedup_table, summarize, write_report_files, BenchError,
};
use dockthrottle::executor::output_path;
use dockthrottle::pdbqt::{parse_ligand, parse_output, parse_receptor};
use dockthrottle::scheduler::{detect_cores, JobOutcome, SchedulerPolicy};
use dockthrottle::screenpipe::{
    parse_vina_config, rank_outcomes, screen, write_failures, write_ranking, EngineChoice, LigandSource,
    ScreenError, ScreeningConfig, FAILURES_FILE, RANKING_FILE,
};

use args::{BenchArgs, Cli, Command, EngineArg, ParseArgs, PdbqtKind, RankArgs, ReportArgs, SchedulerArg, ScreenArgs};

/// Exit status 1: the invocation or its inputs are wrong.
/// Exit status 2: the run itself went wrong.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn classify(e: ScreenError) -> Failure {
    match e {
        ScreenError::Io { .. } | ScreenError::Locked(_) => runtime(e),
        _ => usage(e),
    }
}

fn build_config(a: &ScreenArgs) -> Result<ScreeningConfig, Failure> {
    let vina = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))
                .map_err(usage)?;
            parse_vina_config(&text)
                .with_context(|| format!("in {}", path.display()))
                .map_err(usage)?
        }
        None => Default::default(),
    };
    let receptor = a
        .receptor
        .clone()
        .or_else(|| vina.receptor.clone())
        .ok_or_else(|| usage(anyhow!("no receptor given: pass --receptor or set `receptor` in --config")))?;
    let grid = vina
        .grid()
        .map_err(usage)?
        .ok_or_else(|| usage(anyhow!("no grid box given: --config must set center_x/y/z and size_x/y/z")))?;
    let source = match (&a.ligand_dir, &a.ligand_list) {
        (Some(dir), None) => LigandSource::Dir(dir.clone()),
        (None, Some(list)) => LigandSource::ListFile(list.clone()),
        _ => return Err(usage(anyhow!("give exactly one of --ligand-dir or --ligand-list"))),
    };
    let out = a.out.clone().or_else(|| vina.out.clone()).unwrap_or_else(|| PathBuf::from("out"));

    let mut c = ScreeningConfig::new(receptor, source, grid, out);
    vina.apply_kernel(&mut c.kernel);
    if let Some(seed) = a.seed {
        c.kernel.seed = seed;
    }
    if let Some(e) = a.exhaustiveness {
        c.kernel.exhaustiveness = e;
    }
    if let Some(s) = a.mc_steps {
        c.kernel.mc_steps = s;
    }
    c.total_cores = a.total_cores;
    c.jobs = match a.jobs {
        Some(j) => j,
        None => detect_cores(a.total_cores).map_err(usage)?,
    };
    c.cores_per_job = a.cpus_per_job.or(vina.cpu).unwrap_or(1);
    c.policy = match a.scheduler {
        SchedulerArg::Eventdriven => SchedulerPolicy::event_driven(),
        SchedulerArg::Polling => SchedulerPolicy::polling(a.poll_interval).map_err(usage)?,
    };
    c.top_k = a.top_k;
    c.resume = !a.no_resume;
    c.oversubscribe = a.oversubscribe;
    c.retries = a.retries;
    c.write_trace = a.trace;
    c.config_path = a.config.clone();
    let timeout = match a.timeout {
        Some(t) if !(t > 0.0 && t.is_finite()) => return Err(usage(anyhow!("--timeout must be positive"))),
        t => t.map(Duration::from_secs_f64),
    };
    c.engine = match (a.engine, &a.command) {
        (EngineArg::Mock, None) => EngineChoice::Mock,
        (EngineArg::Mock, Some(_)) => return Err(usage(anyhow!("--command needs --engine external"))),
        (EngineArg::External, Some(t)) => EngineChoice::External {
            template: t.clone(),
            timeout,
        },
        (EngineArg::External, None) => return Err(usage(anyhow!("--engine external needs --command"))),
    };
    c.validate().map_err(usage)?;
    Ok(c)
}

fn cmd_screen(a: &ScreenArgs) -> Outcome {
    let config = build_config(a)?;
    let report = screen(&config).map_err(classify)?;
    println!(
        "{} ligands: {} ranked, {} failed, {} resumed; elapsed {:.3} s",
        report.outcomes.len(),
        report.ranking.len(),
        report.failures.len(),
        report.resumed(),
        report.elapsed
    );
    println!("ranking: {}", config.out_dir.join(RANKING_FILE).display());
    if !report.failures.is_empty() {
        eprintln!(
            "{} ligand(s) failed; see {}",
            report.failures.len(),
            config.out_dir.join(FAILURES_FILE).display()
        );
        if a.strict {
            return Err(runtime(anyhow!("{} ligand(s) failed", report.failures.len())));
        }
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Outcome {
    let base = build_config(&a.screen)?;
    let text = fs::read_to_string(&a.matrix)
        .with_context(|| format!("cannot read matrix {}", a.matrix.display()))
        .map_err(usage)?;
    let matrix = parse_matrix(&text, a.iterations).map_err(usage)?;
    let (samples, failures) = run_matrix(&matrix, &base).map_err(runtime)?;
    for f in &failures {
        eprintln!("{} iteration {}: {}", f.config_label, f.iteration, f.error);
    }
    report(&samples, &a.baseline, &base.out_dir)?;
    if samples.is_empty() {
        return Err(runtime(anyhow!("every benchmark run failed")));
    }
    if a.screen.strict && !failures.is_empty() {
        return Err(runtime(anyhow!("{} benchmark run(s) failed", failures.len())));
    }
    Ok(())
}

fn report(samples: &[dockthrottle::bench::RunSample], baseline: &str, dir: &Path) -> Outcome {
    let summaries = summarize(samples);
    let speedups = match speedup_table(&summaries, baseline) {
        Ok(s) => s,
        Err(BenchError::MissingBaseline(l)) => {
            log::warn!("no {l} row; speedup columns left empty");
            Vec::new()
        }
        Err(e) => return Err(runtime(e)),
    };
    let r = emit_report(&summaries, &speedups);
    write_report_files(dir, samples, &r).map_err(runtime)?;
    print!("{}", r.table);
    println!("report written to {}", dir.display());
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Outcome {
    let text = fs::read_to_string(&a.samples)
        .with_context(|| format!("cannot read {}", a.samples.display()))
        .map_err(usage)?;
    let samples = parse_samples(&text).map_err(usage)?;
    if samples.is_empty() {
        return Err(usage(anyhow!("{} holds no samples", a.samples.display())));
    }
    let dir = a
        .out
        .clone()
        .unwrap_or_else(|| a.samples.parent().map(Path::to_path_buf).unwrap_or_default());
    report(&samples, &a.baseline, &dir)
}

fn cmd_rank(a: &RankArgs) -> Outcome {
    if a.top_k < 1 {
        return Err(usage(anyhow!("--top-k must be >= 1")));
    }
    let entries = fs::read_dir(&a.out)
        .with_context(|| format!("cannot read {}", a.out.display()))
        .map_err(usage)?;
    let mut ids: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join("out.pdbqt").is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    ids.sort();
    let outcomes: Vec<JobOutcome> = ids
        .iter()
        .map(|id| {
            let path = output_path(&a.out, id);
            match fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|t| {
                parse_output(id, &t).map_err(|e| e.to_string())
            }) {
                Ok(parsed) => JobOutcome::ok(id, parsed),
                Err(e) => JobOutcome::failed(id, format!("{}: {e}", path.display())),
            }
        })
        .collect();
    let (ranking, failures) = rank_outcomes(&outcomes);
    let csv = write_ranking(&ranking, a.top_k);
    let write = |name: &str, text: &str| {
        let p = a.out.join(name);
        fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))
    };
    write(RANKING_FILE, &csv).map_err(runtime)?;
    write(FAILURES_FILE, &write_failures(&failures)).map_err(runtime)?;
    print!("{csv}");
    Ok(())
}

fn guess_kind(text: &str) -> PdbqtKind {
    let has = |kw: &str| text.lines().any(|l| l.split_whitespace().next() == Some(kw));
    if has("MODEL") {
        PdbqtKind::Output
    } else if has("ROOT") {
        PdbqtKind::Ligand
    } else {
        PdbqtKind::Receptor
    }
}

fn cmd_parse(a: &ParseArgs) -> Outcome {
    let text = fs::read_to_string(&a.file)
        .with_context(|| format!("cannot read {}", a.file.display()))
        .map_err(usage)?;
    let id = a
        .file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let bad = |e: dockthrottle::pdbqt::PdbqtError| usage(anyhow!("{}: {e}", a.file.display()));
    let summary = match a.kind.unwrap_or_else(|| guess_kind(&text)) {
        PdbqtKind::Ligand => {
            let l = parse_ligand(&id, &text).map_err(bad)?;
            json!({
                "kind": "ligand",
                "id": l.id,
                "atoms": l.atoms.len(),
                "heavy_atoms": l.heavy_count(),
                "branches": l.torsion_tree.branches.len(),
                "torsdof": l.torsion_tree.torsdof,
            })
        }
        PdbqtKind::Receptor => {
            let r = parse_receptor(&id, &text).map_err(bad)?;
            json!({
                "kind": "receptor",
                "id": r.id,
                "atoms": r.atoms.len(),
                "heavy_atoms": r.atoms.iter().filter(|a| a.is_heavy()).count(),
            })
        }
        PdbqtKind::Output => {
            let o = parse_output(&id, &text).map_err(bad)?;
            let modes: Vec<_> = o
                .modes
                .iter()
                .map(|m| json!({"mode": m.mode_index, "energy": m.energy, "rmsd_lb": m.rmsd_lb, "rmsd_ub": m.rmsd_ub}))
                .collect();
            json!({"kind": "output", "id": o.ligand_id, "modes": modes})
        }
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("json value serialises"));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let name = match &cli.command {
        Command::Screen(_) => "screen",
        Command::Bench(_) => "bench",
        Command::Rank(_) => "rank",
        Command::Parse(_) => "parse",
        Command::Report(_) => "report",
    };
    let result = match &cli.command {
        Command::Screen(a) => cmd_screen(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Parse(a) => cmd_parse(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            let mut cmd = Cli::command();
            cmd.build();
            if let Some(sub) = cmd.find_subcommand_mut(name) {
                eprintln!("\n{}\n\nFor more information, try '--help'.", sub.render_usage());
            }
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
