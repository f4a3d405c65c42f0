//! Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if
//! any fails. Run with `cargo test -p misaka-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use misaka_core::consensus::{predict_fixed_point, run, run_iterations, spread};
use misaka_core::graph::{fixtures, scc_analyze, scc_analyze_lists};
use misaka_core::mesh::{run_lockstep, LinkModel, LockstepSimulation, MeshConfig};
use misaka_core::swarm::{forward_kinematics, inverse_kinematics, BodyVelocity, MotionLimits, RobotPose, RobotRole, Scene, Surface};
use misaka_core::{ConvergenceConfig, StateVector, TransitionMatrix};
use rand::Rng;

type Verdict = Result<String, String>;

fn sv(v: &[f64]) -> StateVector {
    StateVector::new(v.to_vec()).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn one_to_ten() -> Vec<f64> {
    (1..=10).map(f64::from).collect()
}

fn case1_golden() -> Verdict {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/golden/case1.csv");
    let golden = misaka_core::trajectory_csv::read_rows(&std::fs::read_to_string(root).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("case1.csv");
    let started = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_misaka"))
        .args(["run", "--scenario", "case1", "--iterations", "10", "--out"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    ensure(status.status.success(), || format!("run exited with {}", status.status))?;
    let got = misaka_core::trajectory_csv::read_rows(&std::fs::read_to_string(&out).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(got.len() == 11 && golden.len() == 11, || "expected 11 rows".into())?;
    let mut worst = 0.0f64;
    let mut count = 0;
    for (w, g) in golden.iter().zip(&got) {
        for (a, b) in w.iter().zip(g) {
            worst = worst.max((a - b).abs());
            count += 1;
        }
    }
    ensure(count == 44, || format!("compared {count} values"))?;
    ensure(worst <= 5e-7, || format!("max |diff| {worst:.3e} > 5e-7"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("44 values, max |diff| {worst:.2e}, {} ms", elapsed.as_millis()))
}

fn case2_pathology() -> Verdict {
    let g = fixtures::case2();
    let t = run(&TransitionMatrix::row_stochastic(&g), sv(&one_to_ten()), &ConvergenceConfig::default())
        .map_err(|e| e.to_string())?;
    let worst = t.last().values().iter().map(|v| (v - 9.0).abs()).fold(0.0, f64::max);
    ensure(t.converged && worst < 1e-6, || format!("max |s - 9| = {worst:.3e}"))?;
    let report = scc_analyze(&g);
    ensure(!report.is_strongly_connected, || "reported strongly connected".into())?;
    let closed = report.closed_members();
    ensure(closed.len() == 1 && closed[0] == [8], || format!("closed components {closed:?}"))?;
    let cli = Command::new(env!("CARGO_BIN_EXE_misaka"))
        .args(["analyze", "--scenario", "case2"])
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&cli.stdout);
    ensure(
        text.contains("strongly connected: no") && text.contains("closed components: {9}"),
        || format!("analyze printed: {text}"),
    )?;
    Ok(format!("{} iterations, max |s - 9| {worst:.2e}, closed {{9}}", t.iterations_run()))
}

fn case2_repair() -> Verdict {
    let g = fixtures::case2_repaired();
    ensure(scc_analyze(&g).is_strongly_connected, || "not strongly connected".into())?;
    let q = TransitionMatrix::row_stochastic(&g);
    let s0 = sv(&one_to_ten());
    let t = run(&q, s0.clone(), &ConvergenceConfig::default()).map_err(|e| e.to_string())?;
    let limit = predict_fixed_point(&q).map_err(|e| e.to_string())?.predicted_limit(&s0);
    let s = spread(t.last());
    ensure(s < 1e-6, || format!("spread {s:.3e}"))?;
    let worst = t.last().values().iter().zip(&limit).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-6, || format!("max |s - prediction| {worst:.3e}"))?;
    Ok(format!("limit {:.9}, spread {s:.2e}, |diff| {worst:.2e}", limit[0]))
}

fn dispatch_conservation() -> Verdict {
    let s0 = sv(&[5.0, 2.0, 1.0]);
    let q = TransitionMatrix::column_stochastic(&fixtures::dispatch3());
    let t = run_iterations(&q, s0.clone(), 10_000, 1e-6).map_err(|e| e.to_string())?;
    let drift = t.states.iter().map(|s| (s.sum() - 8.0).abs()).fold(0.0, f64::max);
    ensure(drift < 1e-9, || format!("sum drifted by {drift:.3e}"))?;
    let expected = [16.0 / 9.0, 32.0 / 9.0, 8.0 / 3.0];
    let pred = predict_fixed_point(&q).map_err(|e| e.to_string())?.predicted_limit(&s0);
    for ((got, p), want) in t.last().values().iter().zip(&pred).zip(expected) {
        ensure((got - want).abs() < 1e-6 && (p - want).abs() < 1e-6, || {
            format!("limit {:?} vs {expected:?}", t.last().values())
        })?;
    }
    let q = TransitionMatrix::metropolis(&fixtures::dispatch3().symmetrized()).map_err(|e| e.to_string())?;
    let t = run_iterations(&q, s0, 10_000, 1e-6).map_err(|e| e.to_string())?;
    for v in t.last().values() {
        ensure((v - 8.0 / 3.0).abs() < 1e-6, || format!("metropolis limit {:?}", t.last().values()))?;
    }
    Ok(format!("sum drift {drift:.2e}; column limit [16/9, 32/9, 8/3]; metropolis 8/3 each"))
}

fn mesh_equivalence() -> Verdict {
    let mut worst = 0.0f64;
    let mut compare = |q: &TransitionMatrix, s0: &[f64], seed: u64| -> Result<(), String> {
        let mesh = run_lockstep(q, sv(s0), &MeshConfig::ideal(seed), 50).map_err(|e| e.to_string())?;
        let matrix = run_iterations(q, sv(s0), 50, 1e-6).map_err(|e| e.to_string())?;
        for (a, b) in mesh.states.iter().zip(&matrix.states) {
            for (x, y) in a.values().iter().zip(b.values()) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok(())
    };
    compare(&TransitionMatrix::row_stochastic(&fixtures::case1()), &[1.0, 2.0, 3.0, 4.0], 0)?;
    compare(&TransitionMatrix::row_stochastic(&fixtures::case2()), &one_to_ten(), 0)?;
    compare(&TransitionMatrix::column_stochastic(&fixtures::dispatch3()), &[5.0, 2.0, 1.0], 0)?;
    let mut rng = common::rng(101);
    for seed in 0..100 {
        let n = rng.gen_range(2..=8);
        let g = common::random_strongly_connected(&mut rng, n, 0.3);
        let s0 = common::random_values(&mut rng, n);
        compare(&TransitionMatrix::row_stochastic(&g), &s0, seed)?;
    }
    ensure(worst <= 1e-12, || format!("max |mesh - matrix| {worst:.3e}"))?;
    Ok(format!("3 scenarios + 100 random graphs, max |diff| {worst:.2e}"))
}

fn fault_safety() -> Verdict {
    let mut rng = common::rng(102);
    let mut failures = 0usize;
    for trial in 0..1000u64 {
        let n = rng.gen_range(2..=8);
        let g = common::random_strongly_connected(&mut rng, n, 0.3);
        let s0 = common::random_values(&mut rng, n);
        let (lo, hi) = s0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let mut links = LinkModel::uniform_drop(rng.gen_range(0.0..0.8));
        for (i, j) in g.edges() {
            if i != j && rng.gen_bool(0.3) {
                links = links.with_drop(i, j, rng.gen_range(0.0..=1.0));
            }
        }
        let q = TransitionMatrix::row_stochastic(&g);
        let mut sim = LockstepSimulation::new(&q, sv(&s0), &MeshConfig::with_links(links, trial)).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            sim.step_round();
        }
        let states = &sim.trajectory().states;
        for s in states {
            for v in s.values() {
                ensure(lo <= *v && *v <= hi, || format!("trial {trial}: {v} left [{lo}, {hi}]"))?;
            }
        }
        // Failed handshakes carry zero weight: recompute each update from
        // the respondents alone.
        for (k, log) in sim.logs().iter().enumerate() {
            failures += log.failed.len();
            let (before, after) = (states[k].values(), states[k + 1].values());
            for i in 0..n {
                let heard = &log.respondents[i];
                for &(reader, peer) in &log.failed {
                    ensure(reader != i || peer == i || !heard.contains(&peer), || format!("trial {trial}: failed peer used"))?;
                }
                let answered: f64 = heard.iter().map(|&j| q.get(i, j)).sum();
                let want = if answered == 0.0 {
                    before[i]
                } else {
                    heard.iter().map(|&j| q.get(i, j) * before[j]).sum::<f64>() / answered
                };
                ensure((after[i] - want).abs() < 1e-12, || format!("trial {trial} node {i}: {} vs {want}", after[i]))?;
            }
        }
    }
    Ok(format!("1000 configurations, {failures} failed handshakes, all values in range"))
}

fn scc_oracle() -> Verdict {
    let mut checked = 0usize;
    let mut check = |a: &[Vec<bool>]| -> Result<(), String> {
        let lists: Vec<Vec<usize>> = a.iter().map(|r| (0..r.len()).filter(|&j| r[j]).collect()).collect();
        let report = scc_analyze_lists(&lists);
        let label = common::oracle_components(&common::reachability(a));
        let n = a.len();
        for i in 0..n {
            for j in 0..n {
                let same = report.component_of[i] == report.component_of[j];
                ensure(same == (label[i] == label[j]), || format!("disagree on {a:?}"))?;
            }
        }
        ensure(report.is_strongly_connected == common::strongly_connected(a), || format!("verdict on {a:?}"))?;
        checked += 1;
        Ok(())
    };
    for n in 1..=4usize {
        for bits in 0u32..(1 << (n * n)) {
            let a: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| bits >> (i * n + j) & 1 == 1).collect()).collect();
            check(&a)?;
        }
    }
    let mut rng = common::rng(103);
    for _ in 0..1000 {
        let n = rng.gen_range(5..=8);
        let p = rng.gen_range(0.05..0.5);
        check(&common::random_matrix(&mut rng, n, p))?;
    }
    Ok(format!("{checked} graphs agree with boolean reachability"))
}

fn motion() -> Verdict {
    let limits = MotionLimits::default();
    let mut rng = common::rng(104);
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..200 {
        let mut scene = Scene::new(Surface::default(), limits).map_err(|e| e.to_string())?;
        let id = scene.add_robot(
            RobotPose::at(rng.gen_range(0.0..1000.0), rng.gen_range(0.0..700.0)),
            RobotRole::Widget { slot: 0 },
        );
        let dt = rng.gen_range(0.001..0.5);
        scene
            .set_target(id, RobotPose::at(rng.gen_range(0.0..1000.0), rng.gen_range(0.0..700.0)))
            .map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let before = scene.robot(id).unwrap().pose;
            scene.tick(dt).map_err(|e| e.to_string())?;
            let moved = before.distance_to(&scene.robot(id).unwrap().pose);
            worst_excess = worst_excess.max(moved - limits.v_max * dt);
        }
    }
    ensure(worst_excess <= 1e-9, || format!("tick overshoot {worst_excess:.3e} mm"))?;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let speed = rng.gen_range(0.0..=limits.v_max);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let v = BodyVelocity::new(speed * angle.cos(), speed * angle.sin(), rng.gen_range(-4.0..4.0));
        let back = forward_kinematics(&limits, inverse_kinematics(&limits, v).map_err(|e| e.to_string())?);
        worst = worst
            .max((back.vx - v.vx).abs())
            .max((back.vy - v.vy).abs())
            .max((back.omega - v.omega).abs());
    }
    ensure(worst < 1e-9, || format!("kinematics round-trip error {worst:.3e}"))?;
    Ok(format!("20000 ticks within v_max*dt; 1000 round trips, max error {worst:.2e}"))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs = [
        ["case2-repaired", "lockstep", "0.25"],
        ["case1", "async", "0.3"],
        ["dispatch3", "matrix", "0"],
    ];
    for [scenario, engine, drop] in runs {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{scenario}-{engine}-{k}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_misaka"))
                .args(["run", "--scenario", scenario, "--engine", engine, "--drop", drop, "--seed", "7"])
                .args(["--iterations", "60", "--out"])
                .arg(&path)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || format!("{scenario}/{engine} exited with {}", status.status))?;
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || format!("{scenario}/{engine} differs between runs"))?;
    }
    Ok("matrix, lockstep and async runs byte-identical across two runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("case 1 golden trajectory", case1_golden),
        ("case 2 pathology", case2_pathology),
        ("case 2 repair", case2_repair),
        ("dispatch conservation", dispatch_conservation),
        ("mesh equivalence", mesh_equivalence),
        ("fault safety", fault_safety),
        ("scc oracle equivalence", scc_oracle),
        ("motion properties", motion),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
