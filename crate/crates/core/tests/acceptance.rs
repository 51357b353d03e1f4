//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

mod common;

use std::fs;
use std::time::Instant;

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dockthrottle::bench::{parse_matrix, run_matrix, speedup_table, Summary};
use dockthrottle::dockkern::{
    apply_pose, dock, ilp_run_units, ligand_cost_units, rmsd_lb, rmsd_ub, KernelConfig, Pose,
};
use dockthrottle::pdbqt::{parse_output, write_output};
use dockthrottle::scheduler::{
    check_trace, Clock, CoreBudget, JobOutcome, JobSpec, Scheduler, SchedulerPolicy,
};
use dockthrottle::screenpipe::{screen, ScreeningConfig, SimDuration, Timing, RANKING_FILE};
use dockthrottle::synthetic::synthetic_ligand;

use common::{check_exactly_once, check_refill, event_driven_makespan, kinematics_oracle, Fixture};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_close(got: f64, want: f64, tol: f64) -> bool {
    ((got - want) / want).abs() <= tol
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Worker budget for the scaling criteria: min(cores on this machine, 8).
fn machine_m() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)
}

/// Kernel settings for the timed criteria: full exhaustiveness, short searches.
fn quick_kernel() -> KernelConfig {
    KernelConfig {
        mc_steps: 120,
        seed: 5,
        ..KernelConfig::default()
    }
}

fn timed_screen(config: &ScreeningConfig) -> Result<f64, String> {
    if config.out_dir.exists() {
        fs::remove_dir_all(&config.out_dir).map_err(|e| e.to_string())?;
    }
    let t = Instant::now();
    let report = screen(config).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed().as_secs_f64();
    ensure(report.failures.is_empty(), || format!("{} ligands failed", report.failures.len()))?;
    Ok(elapsed)
}

fn shaped(fx: &Fixture, out: &str, jobs: usize, cores: usize, total: usize) -> ScreeningConfig {
    let mut c = fx.config(out);
    c.kernel = quick_kernel();
    c.jobs = jobs;
    c.cores_per_job = cores;
    c.total_cores = Some(total);
    c.resume = false;
    c
}

fn published_speedups() -> Check {
    let published = [
        ("N/A|1", 429636.0),
        ("64|1", 12554.0),
        ("32|2", 12652.0),
        ("16|4", 12909.0),
        ("N/A|64", 79522.0),
    ];
    let summaries: Vec<Summary> = published
        .iter()
        .map(|&(l, mean)| Summary {
            config_label: l.into(),
            samples: 5,
            mean,
            stddev_pct: 0.0,
        })
        .collect();
    let rows = speedup_table(&summaries, "N/A|1").map_err(|e| e.to_string())?;
    let get = |l: &str| rows.iter().find(|r| r.config_label == l).unwrap();
    let mut detail = Vec::new();
    for (label, published) in [("64|1", 34.22), ("32|2", 33.95), ("16|4", 33.28)] {
        let v = get(label).vs_single;
        ensure(rel_close(v, published, 0.005), || format!("vs_single({label}) = {v:.4}, published {published}"))?;
        detail.push(format!("{label} {v:.2}"));
    }
    let ilp = get("64|1").vs_ilp.ok_or("no ILP comparator for 64|1")?;
    ensure(rel_close(ilp, 6.33, 0.005), || format!("vs_ilp(64|1) = {ilp:.4}, published 6.33"))?;
    Ok(format!("vs_single {}; vs_ilp 64|1 {ilp:.2}", detail.join(", ")))
}

fn dlp_scaling(fx: &Fixture) -> Check {
    let m = machine_m();
    let serial = timed_screen(&shaped(fx, "c2_serial", 1, 1, m))?;
    let parallel = timed_screen(&shaped(fx, "c2_parallel", m, 1, m))?;
    let bound = serial / (0.7 * m as f64);
    ensure(parallel <= bound, || {
        format!("M={m}: elapsed(J=M) {parallel:.3}s > elapsed(J=1)/(0.7M) {bound:.3}s")
    })?;
    Ok(format!(
        "M={m}, {} ligands: J=1 {serial:.3}s, J=M {parallel:.3}s, bound {bound:.3}s",
        fx.ligands.len()
    ))
}

fn dlp_beats_ilp(fx: &Fixture) -> Check {
    let mut dlp = Vec::new();
    let mut ilp = Vec::new();
    // alternate so drift in machine load hits both shapes alike
    for _ in 0..5 {
        let mut a = shaped(fx, "c3_dlp", 8, 1, 8);
        a.oversubscribe = true;
        dlp.push(timed_screen(&a)?);
        let mut b = shaped(fx, "c3_ilp", 1, 8, 8);
        b.oversubscribe = true;
        ilp.push(timed_screen(&b)?);
    }
    let (d, i) = (median(dlp), median(ilp));
    ensure(d < i, || format!("median elapsed J=8,C=1 {d:.3}s >= J=1,C=8 {i:.3}s"))?;
    Ok(format!("median of 5: J=8,C=1 {d:.3}s < J=1,C=8 {i:.3}s (ratio {:.3})", i / d))
}

fn ilp_saturation(fx: &Fixture) -> Check {
    let (u64c, u8c) = (ilp_run_units(8, 64, 0.01), ilp_run_units(8, 8, 0.01));
    ensure((u64c - 1.63).abs() < 1e-12 && (u8c - 1.07).abs() < 1e-12, || {
        format!("run units {u64c} / {u8c}, expected 1.63 / 1.07")
    })?;

    // engine-only rows on the virtual clock, charged their modeled cost
    let mut base = fx.config("c4");
    base.kernel = KernelConfig {
        mc_steps: 40,
        ..quick_kernel()
    };
    base.total_cores = Some(64);
    base.timing = Timing::Virtual(SimDuration::ModeledCost { seconds_per_unit: 1e-6 });
    let matrix = parse_matrix("ilp 8\nilp 64\n", 1).map_err(|e| e.to_string())?;
    let (samples, failures) = run_matrix(&matrix, &base).map_err(|e| e.to_string())?;
    ensure(failures.is_empty() && samples.len() == 2, || format!("bench failures: {failures:?}"))?;
    let (v8, v64) = (samples[0].elapsed, samples[1].elapsed);
    ensure(v64 > v8, || format!("virtual elapsed C=64 {v64:.3}s <= C=8 {v8:.3}s"))?;

    // and the executed kernel on the wall clock
    let lig = &fx.ligands[1];
    let kernel = quick_kernel();
    let wall = |cores: usize| -> Result<f64, String> {
        let mut xs = Vec::new();
        for _ in 0..3 {
            let r = dock(&fx.receptor, lig, &fx.grid, &kernel, cores).map_err(|e| e.to_string())?;
            xs.push(r.wall_time);
        }
        Ok(median(xs))
    };
    let (w8, w64) = (wall(8)?, wall(64)?);
    ensure(w64 > w8, || format!("measured dock C=64 {w64:.4}s <= C=8 {w8:.4}s"))?;
    Ok(format!(
        "run units 1.63 > 1.07; virtual C=64 {v64:.2}s > C=8 {v8:.2}s; measured {w64:.3}s > {w8:.3}s"
    ))
}

fn ranking_invariance() -> Check {
    // polling at J=1 pays up to 0.33 s per ligand, so a smaller library
    let fx = &Fixture::new(60, 150);
    let shapes = [
        ("c5_a", 1, 1, SchedulerPolicy::event_driven()),
        ("c5_b", 4, 2, SchedulerPolicy::event_driven()),
        ("c5_c", 8, 1, SchedulerPolicy::event_driven()),
        ("c5_d", 1, 1, SchedulerPolicy::polling(0.33).unwrap()),
        ("c5_e", 8, 1, SchedulerPolicy::polling(0.33).unwrap()),
    ];
    let mut files = Vec::new();
    for (out, jobs, cores, policy) in shapes {
        let mut c = shaped(fx, out, jobs, cores, machine_m());
        c.kernel.mc_steps = 40;
        c.oversubscribe = true;
        c.policy = policy;
        timed_screen(&c)?;
        files.push(fs::read(c.out_dir.join(RANKING_FILE)).map_err(|e| e.to_string())?);
    }
    ensure(files.windows(2).all(|w| w[0] == w[1]), || "ranking.csv files differ".into())?;
    let rows = String::from_utf8_lossy(&files[0]).lines().count() - 1;
    Ok(format!("5 configurations, identical {}-byte ranking.csv ({rows} rows)", files[0].len()))
}

fn scheduler_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut runs = 0;
    for q in 0..1000 {
        let n = rng.gen_range(0..60);
        let slots = rng.gen_range(1..=8);
        let durations: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..10.0)).collect();
        let queue: Vec<JobSpec> = (0..n)
            .map(|i| JobSpec {
                job_id: format!("q{q}_{i}"),
                ligand_path: "x".into(),
                cores: 1,
            })
            .collect();
        let ids: Vec<String> = queue.iter().map(|j| j.job_id.clone()).collect();
        for polling in [false, true] {
            let table = durations.clone();
            let clock = Clock::Virtual(std::sync::Arc::new(move |job: &JobSpec, _: &JobOutcome| {
                table[job.job_id.rsplit('_').next().unwrap().parse::<usize>().unwrap()]
            }));
            let policy = if polling {
                SchedulerPolicy::polling(0.33).unwrap()
            } else {
                SchedulerPolicy::event_driven()
            };
            let budget = CoreBudget {
                total_cores: slots,
                jobs: slots,
                cores_per_job: 1,
                oversubscribe: false,
            };
            let exec = |j: &JobSpec| JobOutcome::failed(&j.job_id, "simulated");
            let report = Scheduler::new(policy, budget)
                .with_clock(clock)
                .run(&queue, &exec)
                .map_err(|e| e.to_string())?;
            let ctx = |e: String| format!("queue {q} (n={n}, J={slots}, polling={polling}): {e}");
            ensure(report.outcomes.len() == n, || ctx("outcome count".into()))?;
            check_trace(&report.trace, slots).map_err(ctx)?;
            check_exactly_once(&report.trace, &ids).map_err(ctx)?;
            if polling {
                check_refill(&report.trace, 0.33).map_err(ctx)?;
            } else {
                check_refill(&report.trace, 0.0).map_err(ctx)?;
                let want = event_driven_makespan(&durations, slots);
                ensure((report.elapsed - want).abs() <= 1e-9, || {
                    ctx(format!("makespan {} vs replay {want}", report.elapsed))
                })?;
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} runs over 1000 queues: slot bound, exactly-once, refill latency ok"))
}

fn pdbqt_round_trip(fx: &Fixture) -> Check {
    let kernel = KernelConfig {
        mc_steps: 200,
        seed: 3,
        ..KernelConfig::default()
    };
    let mut count = 0;
    let mut modes = 0;
    for lig in fx.ligands.iter().take(100) {
        let out = dock(&fx.receptor, lig, &fx.grid, &kernel, 1)
            .map_err(|e| e.to_string())?
            .to_output();
        out.validate().map_err(|e| format!("{}: {e}", lig.id))?;
        let first = &out.modes[0];
        ensure(first.rmsd_lb == 0.0 && first.rmsd_ub == 0.0, || format!("{}: mode 1 rmsd", lig.id))?;
        ensure(out.modes.windows(2).all(|w| w[0].energy <= w[1].energy), || {
            format!("{}: energies not ascending", lig.id)
        })?;
        let text = write_output(&out).map_err(|e| e.to_string())?;
        let parsed = parse_output(&lig.id, &text).map_err(|e| format!("{}: {e}", lig.id))?;
        ensure(parsed == out, || format!("{}: parse(write(x)) != x", lig.id))?;
        ensure(write_output(&parsed).map_err(|e| e.to_string())? == text, || {
            format!("{}: write(parse(text)) != text", lig.id)
        })?;
        count += 1;
        modes += out.modes.len();
    }
    ensure(count >= 100, || format!("only {count} outputs"))?;
    let mut bad = dock(&fx.receptor, &fx.ligands[1], &fx.grid, &kernel, 1)
        .map_err(|e| e.to_string())?
        .to_output();
    if bad.modes.len() >= 2 {
        bad.modes.swap(0, 1);
        ensure(write_output(&bad).is_err(), || "unsorted output was written".into())?;
    }
    ensure(modes > count, || "every output has a single mode".into())?;
    Ok(format!("{count} outputs, {modes} modes round-tripped"))
}

fn random_pose(rng: &mut ChaCha8Rng, torsions: usize) -> Pose {
    let axis = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    Pose {
        translation: Vector3::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)),
        orientation: UnitQuaternion::from_scaled_axis(axis.normalize() * rng.gen_range(0.0..std::f64::consts::PI)),
        torsions: (0..torsions).map(|_| rng.gen_range(-3.14..3.14)).collect(),
    }
}

fn rmsd_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..1000 {
        let heavy = rng.gen_range(5..40);
        let lig = synthetic_ligand("r", k, heavy, rng.gen_range(0..10));
        let mask = lig.heavy_mask();
        let types = lig.types();
        let n = lig.torsion_tree.branches.len();
        let a = apply_pose(&lig, &random_pose(&mut rng, n)).map_err(|e| e.to_string())?;
        let b = apply_pose(&lig, &random_pose(&mut rng, n)).map_err(|e| e.to_string())?;
        let lb = rmsd_lb(&a, &b, &types, &mask).unwrap();
        let ub = rmsd_ub(&a, &b, &mask).unwrap();
        ensure(lb <= ub, || format!("pair {k}: lb {lb} > ub {ub}"))?;
        ensure(rmsd_ub(&a, &a, &mask).unwrap() == 0.0 && rmsd_lb(&a, &a, &types, &mask).unwrap() == 0.0, || {
            format!("pair {k}: rmsd(x, x) != 0")
        })?;
        let d = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        let moved: Vec<[f64; 3]> = a.iter().map(|p| [p[0] + d[0], p[1] + d[1], p[2] + d[2]]).collect();
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let t = rmsd_ub(&a, &moved, &mask).unwrap();
        ensure((t - norm).abs() <= 1e-9, || format!("pair {k}: translated ub {t} vs |d| {norm}"))?;
    }
    // two heavy atoms of one type trade places
    let lig = synthetic_ligand("s", 3, 12, 0);
    let mask = lig.heavy_mask();
    let types = lig.types();
    let (i, j) = (0..types.len())
        .flat_map(|i| (i + 1..types.len()).map(move |j| (i, j)))
        .find(|&(i, j)| mask[i] && mask[j] && types[i] == types[j])
        .ok_or("no same-type heavy pair")?;
    let a = lig.coordinates();
    let mut b = a.clone();
    b.swap(i, j);
    let lb = rmsd_lb(&a, &b, &types, &mask).unwrap();
    let ub = rmsd_ub(&a, &b, &mask).unwrap();
    ensure(lb == 0.0 && ub > 0.0, || format!("swap: lb {lb}, ub {ub}"))?;
    Ok(format!("1000 pose pairs ok; swapped pair lb 0, ub {ub:.3}"))
}

fn heterogeneous_cost(fx: &Fixture) -> Check {
    let config = quick_kernel();
    let costs: Vec<f64> = fx
        .ligands
        .iter()
        .map(|l| ligand_cost_units(l, &fx.receptor, &config, 1))
        .collect();
    let max = costs.iter().cloned().fold(f64::MIN, f64::max);
    let min = costs.iter().cloned().fold(f64::MAX, f64::min);
    let modeled = max / min;
    ensure(modeled >= 5.0, || format!("modeled max/min {modeled:.2} < 5"))?;

    let (small, large) = (&fx.ligands[0], &fx.ligands[1]);
    let wall = |lig| -> Result<f64, String> {
        let mut xs = Vec::new();
        for _ in 0..3 {
            xs.push(dock(&fx.receptor, lig, &fx.grid, &config, 1).map_err(|e| e.to_string())?.wall_time);
        }
        Ok(median(xs))
    };
    let measured = wall(large)? / wall(small)?;
    ensure(measured >= 5.0, || format!("measured largest/smallest {measured:.2} < 5"))?;
    Ok(format!(
        "{} ligands ({}-{} heavy atoms): modeled max/min {modeled:.1}x, measured {measured:.1}x",
        fx.ligands.len(),
        fx.ligands.iter().map(|l| l.heavy_count()).min().unwrap(),
        fx.ligands.iter().map(|l| l.heavy_count()).max().unwrap(),
    ))
}

fn kinematics_oracle_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let heavy = rng.gen_range(3..60);
        let lig = synthetic_ligand("k", case, heavy, rng.gen_range(0..=12));
        let pose = random_pose(&mut rng, lig.torsion_tree.branches.len());
        let got = apply_pose(&lig, &pose).map_err(|e| e.to_string())?;
        let want = kinematics_oracle(&lig, &pose);
        for (g, w) in got.iter().zip(&want) {
            for k in 0..3 {
                worst = worst.max((g[k] - w[k]).abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e} Å"))?;
    Ok(format!("100 cases, max deviation {worst:.1e} Å"))
}

fn main() {
    let started = Instant::now();
    let library = Fixture::new(200, 150);
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("published speedups", Box::new(published_speedups)),
        ("DLP scaling", Box::new(|| dlp_scaling(&library))),
        ("DLP beats ILP", Box::new(|| dlp_beats_ilp(&library))),
        ("ILP saturation", Box::new(|| ilp_saturation(&library))),
        ("ranking invariance", Box::new(ranking_invariance)),
        ("scheduler invariants", Box::new(scheduler_properties)),
        ("PDBQT round trip", Box::new(|| pdbqt_round_trip(&library))),
        ("RMSD properties", Box::new(rmsd_properties)),
        ("heterogeneous cost", Box::new(|| heterogeneous_cost(&library))),
        ("kinematics oracle", Box::new(kinematics_oracle_check)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {reason}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
