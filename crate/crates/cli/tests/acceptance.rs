//! Acceptance suite: one PASS/FAIL line per primary criterion.
//! Runs without the libtest harness so the lines always print: `cargo test -p catch-cli --test acceptance`.

mod common;
#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::fs;
use std::time::{Duration, Instant};

use catch_core::control::{
    apply_commands, calibrate, classify_posture, command_for_class, CalibrationMap, ControlOptions, IndexTargets,
    PostureClass, SampleGrid, ThumbController, ThumbStageKind,
};
use catch_core::grasps::{run_catalog, RESIDUAL_TOL_DEG};
use catch_core::hand_model::{default_catch919, CableId, Finger, HandModel, JointId, MOVEMENT_RANGES};
use catch_core::linkage::{coupling_curve, solve_coupler, Branch, FourBarDims};
use catch_core::statics::{
    chute_force_threshold, solve_equilibrium, EquilibriumProblem, ExternalForce, Objective,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn table_ranges() -> Outcome {
    let m = default_catch919();
    let expected = [
        (JointId::THUMB_CMC_FLEX, -30.0, 45.0),
        (JointId::THUMB_CMC_ABD, -45.0, 45.0),
        (JointId::THUMB_MCP_FLEX, 0.0, 90.0),
        (JointId::THUMB_MCP_PROSUP, 0.0, 45.0),
        (JointId::THUMB_IP_FLEX, 0.0, 90.0),
        (JointId::INDEX_MCP_FLEX, -30.0, 90.0),
        (JointId::INDEX_MCP_ABD, -30.0, 30.0),
        (JointId::INDEX_PIP_FLEX, 0.0, 90.0),
        (JointId::INDEX_DIP_FLEX, -30.0, 90.0),
    ];
    check(MOVEMENT_RANGES == expected, || "range table differs".into())?;
    let mut rejected = 0;
    for (id, lo, hi) in expected {
        let j = m.joint(id);
        check(j.min_deg == lo && j.max_deg == hi, || format!("{id}: [{}, {}]", j.min_deg, j.max_deg))?;
        for bad in [lo - 1.0, hi + 1.0] {
            let mut q = m.rest_pose();
            q[id] = bad;
            check(m.check_limits(&q, 0.0).is_err(), || format!("{id} = {bad} accepted"))?;
            rejected += 1;
        }
    }
    let map = CalibrationMap::from_model(&m);
    let t = IndexTargets { mcp_deg: 95.0, pip_deg: 0.0, force_n: 0.0 };
    check(
        command_for_class(&m, PostureClass::McpFlexIpExt, &t, &map, &ControlOptions::for_model(&m)).is_err(),
        || "out-of-range index target accepted".into(),
    )?;
    Ok(format!("9/9 ranges exact, {rejected}/18 out-of-range poses rejected"))
}

fn coupling() -> Outcome {
    let m = default_catch919();
    let dims = m.linkages[&Finger::Index];
    let curve = coupling_curve(&dims, 0.0, 90.0, 91).map_err(|e| e.to_string())?;
    check(curve.is_monotone(), || "canonical curve not monotone".into())?;
    let (d0, d90) = (curve.samples[0].1, curve.samples[90].1);
    check(d0.abs() < 1e-9 && (d90 - 90.0).abs() <= 2.0, || format!("endpoints {d0}, {d90}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(919);
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    while cases < 1000 {
        let raw = FourBarDims {
            ground_mm: rng.random_range(5.0..50.0),
            input_mm: rng.random_range(5.0..50.0),
            coupler_mm: rng.random_range(5.0..50.0),
            output_mm: rng.random_range(5.0..50.0),
            input_mount_deg: rng.random_range(5.0..175.0),
            output_mount_deg: 0.0,
            branch: if rng.random_bool(0.5) { Branch::Open } else { Branch::Crossed },
        };
        let Ok(d) = raw.zeroed() else { continue };
        if coupling_curve(&d, 0.0, 90.0, 181).is_err() {
            continue;
        }
        let pip = rng.random_range(0.0..90.0);
        let got = solve_coupler(&d, pip).map_err(|e| e.to_string())?;
        let want = oracles::bisect_dip(&d, pip).ok_or("oracle failed to assemble")?;
        worst = worst.max((got - want).abs());
        cases += 1;
    }
    check(worst < 1e-6, || format!("worst deviation {worst:e} deg"))?;
    Ok(format!("DIP(90) = {d90:.3}°, 1000 random cases within {worst:.1e}°"))
}

fn hold_ramp(moving: JointId, held: JointId, hold: f64, ramp: &[f64]) -> Result<f64, String> {
    let m = default_catch919();
    let map = CalibrationMap::from_model(&m);
    let opts = ControlOptions::for_model(&m);
    let mut q = m.rest_pose();
    let mut worst: f64 = 0.0;
    let mut moved = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in ramp {
        let (mcp, pip) = if moving == JointId::INDEX_MCP_FLEX { (v, hold) } else { (hold, v) };
        let mut target = m.rest_pose();
        target[JointId::INDEX_MCP_FLEX] = mcp;
        target[JointId::INDEX_PIP_FLEX] = pip;
        let class = classify_posture(&target, false, opts.eps_deg);
        let ff = command_for_class(&m, class, &IndexTargets { mcp_deg: mcp, pip_deg: pip, force_n: 0.0 }, &map, &opts)
            .map_err(|e| e.to_string())?;
        let mut p = EquilibriumProblem::new(&m);
        apply_commands(&mut p.commands, &ff);
        let r = solve_equilibrium(&p, &q).map_err(|e| e.to_string())?;
        q = r.q_star;
        worst = worst.max((q[held] - hold).abs());
        moved = (moved.0.min(q[moving]), moved.1.max(q[moving]));
    }
    check(moved.1 - moved.0 > 0.8 * (ramp[ramp.len() - 1] - ramp[0]), || format!("moving joint only spanned {moved:?}"))?;
    Ok(worst)
}

fn independent_joints() -> Outcome {
    let start = Instant::now();
    let ip: Vec<f64> = (0..=16).map(|i| 5.0 * i as f64).collect();
    let mcp: Vec<f64> = (0..=22).map(|i| -20.0 + 5.0 * i as f64).collect();
    let ip_dev = hold_ramp(JointId::INDEX_PIP_FLEX, JointId::INDEX_MCP_FLEX, 30.0, &ip)?;
    let mcp_dev = hold_ramp(JointId::INDEX_MCP_FLEX, JointId::INDEX_PIP_FLEX, 40.0, &mcp)?;
    let elapsed = start.elapsed();
    check(ip_dev <= 1.0, || format!("MCP drifted {ip_dev:.3}° during IP ramp"))?;
    check(mcp_dev <= 1.0, || format!("PIP drifted {mcp_dev:.3}° during MCP ramp"))?;
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("MCP drift {ip_dev:.3}°, PIP drift {mcp_dev:.3}°, {:.2} s", elapsed.as_secs_f64()))
}

fn round_trip() -> Outcome {
    let m = default_catch919();
    let map = CalibrationMap::from_model(&m);
    let opts = ControlOptions::for_model(&m);
    let cases = [
        (PostureClass::McpExtIpExt, [(-30.0, 0.0), (-15.0, 0.0), (3.0, 0.0)]),
        (PostureClass::McpExtIpFlex, [(-10.0, 80.0), (-30.0, 45.0), (0.0, 20.0)]),
        (PostureClass::McpFlexIpExt, [(30.0, 0.0), (60.0, 0.0), (90.0, 0.0)]),
        (PostureClass::McpFlexIpFlex, [(45.0, 45.0), (20.0, 70.0), (80.0, 30.0)]),
    ];
    let mut ok = 0;
    let mut misses = Vec::new();
    for (class, targets) in cases {
        for (mcp, pip) in targets {
            let t = IndexTargets { mcp_deg: mcp, pip_deg: pip, force_n: 0.0 };
            let ff = command_for_class(&m, class, &t, &map, &opts).map_err(|e| e.to_string())?;
            let mut p = EquilibriumProblem::new(&m);
            apply_commands(&mut p.commands, &ff);
            let r = solve_equilibrium(&p, &m.rest_pose()).map_err(|e| e.to_string())?;
            let got = classify_posture(&r.q_star, false, opts.eps_deg);
            if got == class {
                ok += 1;
            } else {
                misses.push(format!("{class}({mcp},{pip})->{got}"));
            }
        }
    }
    check(ok == 12, || format!("{ok}/12; {misses:?}"))?;
    Ok("12/12".into())
}

fn thumb_staging() -> Outcome {
    let m = default_catch919();
    let mut c = ThumbController::new(&m);
    let full = c.displacement_for(90.0, 45.0, 90.0) * 1.05;
    let mut stages = Vec::new();
    let mut last = c.step(0.0, false);
    for i in 0..=1000 {
        last = c.step(full * i as f64 / 1000.0, false);
        if stages.last() != Some(&last.stage.kind) {
            stages.push(last.stage.kind);
        }
    }
    use ThumbStageKind::*;
    check(stages == [McpFlexing, Pronating, IpFlexing], || format!("stages {stages:?}"))?;
    let fin = (last.mcp_flex_deg, last.mcp_prosup_deg, last.ip_flex_deg);
    check(fin == (90.0, 45.0, 90.0), || format!("final {fin:?}"))?;

    let mut c = ThumbController::new(&m);
    let mut frozen = None;
    for i in 0..=1000 {
        let d = full * i as f64 / 1000.0;
        let probe = c.clone().step(d, false);
        let t = c.step(d, frozen.is_none() && probe.mcp_flex_deg >= 40.0);
        if frozen.is_none() && c.frozen_mcp().is_some() {
            check(t.stage.kind == Pronating, || format!("stage after contact {:?}", t.stage.kind))?;
            frozen = Some(t.mcp_flex_deg);
        }
        last = t;
    }
    let f = frozen.ok_or("resistance never froze MCP")?;
    check((f - 40.0).abs() <= 0.5 && last.mcp_flex_deg == f, || format!("froze at {f}, ended at {}", last.mcp_flex_deg))?;
    Ok(format!("McpFlexing → Pronating → IpFlexing to (90, 45, 90); contact froze MCP at {f:.3}°"))
}

fn compliance() -> Outcome {
    let m = default_catch919();
    let threshold = chute_force_threshold(&m);
    let chute = |f: f64, q0| -> Result<(f64, catch_core::hand_model::JointVector), String> {
        let mut p = EquilibriumProblem::new(&m);
        if f > 0.0 {
            p = p.with_force(ExternalForce::palmar(Finger::Index, f));
        }
        let r = solve_equilibrium(&p, &q0).map_err(|e| e.to_string())?;
        Ok((r.chute_extension_deg, r.q_star))
    };
    let mut last = -1.0;
    let mut q = m.rest_pose();
    for i in 0..20 {
        let f = 20.0 * i as f64 / 19.0;
        let (c, _) = chute(f, m.rest_pose())?;
        if f <= threshold {
            check(c == 0.0, || format!("chute {c}° at {f:.3} N below threshold {threshold:.3} N"))?;
        } else {
            check(c > 0.0, || format!("chute closed at {f:.3} N above threshold"))?;
        }
        check(c >= last - 1e-9 && c <= 30.0, || format!("non-monotone at {f:.3} N"))?;
        last = c;
        q = chute(f, m.rest_pose())?.1;
    }
    check((last - 30.0).abs() < 1e-9, || format!("saturates at {last}°"))?;
    let (back, _) = chute(0.0, q)?;
    check(back.abs() < 1e-9, || format!("chute {back}° after release"))?;
    Ok(format!("threshold {threshold:.3} N, 20 levels monotone, saturates at 30°, returns to {back}°"))
}

fn equilibrium_oracle() -> Outcome {
    let m = oracles::toy_model();
    let grid = oracles::ToyGrid::new(&m);
    let kc = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut ok = 0;
    for _ in 0..50 {
        let cmd = [rng.random_range(-5.0..15.0), rng.random_range(-5.0..15.0), rng.random_range(-5.0..6.0)];
        let mut p = EquilibriumProblem::new(&m)
            .with_command(CableId::IndexBL, cmd[0])
            .with_command(CableId::IndexOL, cmd[1])
            .with_command(CableId::IndexPL, cmd[2]);
        p.cable_stiffness = kc;
        let r = solve_equilibrium(&p, &m.rest_pose()).map_err(|e| e.to_string())?;
        let (gm, gp) = grid.argmin(&cmd, kc);
        if (r.q_star[JointId::INDEX_MCP_FLEX] - gm).abs() <= 0.25 && (r.q_star[JointId::INDEX_PIP_FLEX] - gp).abs() <= 0.25 {
            ok += 1;
        }
    }
    check(ok == 50, || format!("{ok}/50"))?;
    Ok("50/50 within one 0.25° cell".into())
}

fn gradient() -> Outcome {
    let m = default_catch919();
    let mut rng = ChaCha8Rng::seed_from_u64(1919);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut p = EquilibriumProblem::new(&m);
        for c in CableId::ALL {
            p.commands[c] = rng.random_range(-5.0..20.0);
        }
        if rng.random_bool(0.5) {
            p.external_force = Some(ExternalForce::palmar(Finger::Index, rng.random_range(0.0..10.0)));
        }
        let mut q = m.rest_pose();
        for spec in &m.joints {
            q[spec.id] = spec.min_deg + rng.random_range(0.05..0.95) * (spec.max_deg - spec.min_deg);
        }
        let q = m.complete(&q);
        let obj = Objective::new(&p, &q).map_err(|e| e.to_string())?;
        let g = obj.reduced_gradient(&q);
        let x = obj.reduce(&q);
        let mut diff = 0.0;
        let mut scale = 0.0;
        for i in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            let num = (obj.energy(&obj.expand(&xp, &q)) - obj.energy(&obj.expand(&xm, &q))) / (2.0 * h);
            diff += (g[i] - num).powi(2);
            scale += num * num;
        }
        worst = worst.max(diff.sqrt() / scale.sqrt().max(1e-12));
    }
    check(worst < 1e-5, || format!("worst relative error {worst:e}"))?;
    Ok(format!("100 states, worst relative error {worst:.1e}"))
}

fn calibration() -> Outcome {
    let m = default_catch919();
    let exact = calibrate(&m, &SampleGrid::uniform(&m, 200, 1), 1, 0.0, 1).map_err(|e| e.to_string())?;
    check(exact.fit_rms_mm < 1e-9, || format!("zero-noise rms {:e}", exact.fit_rms_mm))?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for seed in 0..20 {
        let map = calibrate(&m, &SampleGrid::uniform(&m, 200, 500 + seed), 1, 0.1, seed).map_err(|e| e.to_string())?;
        lo = lo.min(map.fit_rms_mm);
        hi = hi.max(map.fit_rms_mm);
    }
    check(lo >= 0.05 && hi <= 0.2, || format!("noisy rms range [{lo:.4}, {hi:.4}]"))?;
    Ok(format!("zero-noise rms {:.1e} mm; 0.1 mm noise rms in [{lo:.4}, {hi:.4}] over 20 seeds", exact.fit_rms_mm))
}

fn catalog() -> Outcome {
    let canonical = run_catalog(&default_catch919());
    let worst = canonical.presets.iter().filter_map(|r| r.residual_deg).fold(0.0, f64::max);
    check(canonical.realizable_count == 33 && canonical.total == 33, || {
        let failed: Vec<_> = canonical.presets.iter().filter(|r| !r.realizable).map(|r| r.taxonomy_id).collect();
        format!("{}/33 realizable; failing {failed:?}", canonical.realizable_count)
    })?;
    check(worst <= RESIDUAL_TOL_DEG, || format!("worst residual {worst}"))?;
    let mut ablated: HandModel = default_catch919();
    ablated.joints[JointId::THUMB_MCP_PROSUP.index()].max_deg = 0.0;
    let a = run_catalog(&ablated);
    check(a.realizable_count < 33, || "ablated model still realizes 33/33".into())?;
    Ok(format!("33/33 (worst residual {worst:.3}°); ProSup-ablated model {}/33", a.realizable_count))
}

fn cli_suite(dir: &std::path::Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let ramp: Vec<(f64, f64)> = (0..=6).map(|k| (30.0, 15.0 * k as f64)).collect();
    fs::write(dir.join("ramp.csv"), common::index_ramp_script(&ramp)).map_err(|e| e.to_string())?;
    fs::write(dir.join("pose.json"), r#"{"Index.MCP.FlexExt": 40, "Index.PIP.FlexExt": 10}"#).map_err(|e| e.to_string())?;
    fs::write(dir.join("curve.csv"), "pip_deg,dip_deg\n0,0\n30,30\n60,60\n90,90\n").map_err(|e| e.to_string())?;
    let runs: [&[&str]; 7] = [
        &["simulate", "--script", "ramp.csv", "--out", "run.csv", "--svg", "run.svg", "--seed", "7"],
        &["plot", "--run", "run.csv", "--out", "plot.svg"],
        &["posture", "classify", "--q", "pose.json", "--out", "class.json"],
        &["grasp", "run-all", "--report", "report.json"],
        &["grasp", "list", "--out", "list.json"],
        &["calibrate", "--noise-mm", "0.1", "--seed", "7", "--out", "calibration.json"],
        &["linkage", "synth", "--curve", "curve.csv", "--restarts", "2", "--seed", "7", "--out", "dims.json"],
    ];
    for args in runs {
        let out = common::catch(args, dir);
        check(out.code == 0, || format!("{args:?} exited {}: {}", out.code, out.stderr))?;
    }
    let mut files = Vec::new();
    for name in ["run.csv", "run.svg", "plot.svg", "class.json", "report.json", "list.json", "calibration.json", "dims.json"] {
        files.push((name.to_string(), fs::read(dir.join(name)).map_err(|e| format!("{name}: {e}"))?));
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = cli_suite(a.path())?;
    let second = cli_suite(b.path())?;
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        check(x == y, || format!("{name} differs between runs"))?;
    }
    let bytes: usize = first.iter().map(|(_, x)| x.len()).sum();
    Ok(format!("{} output files, {bytes} bytes, byte-identical", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("joint ranges", table_ranges),
        ("four-bar coupling", coupling),
        ("independent-joint ramps", independent_joints),
        ("control-table round trip", round_trip),
        ("thumb staging", thumb_staging),
        ("fingertip compliance", compliance),
        ("equilibrium oracle", equilibrium_oracle),
        ("gradient check", gradient),
        ("calibration", calibration),
        ("grasp catalog", catalog),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                println!("FAIL {:>2} {name}: {why}", k + 1);
                failed.push(*name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
}
