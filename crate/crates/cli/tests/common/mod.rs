#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

use catch_core::control::{classify_posture, command_for_class, CalibrationMap, ControlOptions, IndexTargets};
use catch_core::hand_model::{default_catch919, CableId, JointId};

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn catch(args: &[&str], dir: &Path) -> Output {
    catch_env(args, dir, &[])
}

pub fn catch_env(args: &[&str], dir: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_catch"));
    cmd.args(args).current_dir(dir).env_remove("CATCH_MODEL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("UTF-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("UTF-8 stderr"),
    }
}

/// Script rows holding index (MCP, PIP) targets through the class
/// feedforward, one row per target.
pub fn index_ramp_script(targets: &[(f64, f64)]) -> String {
    let m = default_catch919();
    let map = CalibrationMap::from_model(&m);
    let opts = ControlOptions::for_model(&m);
    let cables = [CableId::IndexBL, CableId::IndexOL, CableId::IndexPL];
    let mut s = cables.map(|c| c.to_string()).join(",");
    s.push('\n');
    for &(mcp, pip) in targets {
        let mut q = m.rest_pose();
        q[JointId::INDEX_MCP_FLEX] = mcp;
        q[JointId::INDEX_PIP_FLEX] = pip;
        let class = classify_posture(&q, false, opts.eps_deg);
        let ff = command_for_class(&m, class, &IndexTargets { mcp_deg: mcp, pip_deg: pip, force_n: 0.0 }, &map, &opts)
            .expect("in-range target");
        let row: Vec<String> = cables.iter().map(|c| format!("{:?}", ff.commands.get(c).copied().unwrap_or(0.0))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// `(step, points)` for each finger silhouette in an SVG from `plot`.
pub fn silhouettes(svg: &str) -> Vec<(usize, Vec<(f64, f64)>)> {
    svg.lines()
        .filter(|l| l.starts_with(r#"<polyline class="finger""#))
        .map(|l| {
            let step = attr(l, "data-step").parse().unwrap();
            let points = attr(l, "points")
                .split(' ')
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect();
            (step, points)
        })
        .collect()
}

fn attr<'a>(line: &'a str, name: &str) -> &'a str {
    let start = line.find(&format!(r#"{name}=""#)).unwrap() + name.len() + 2;
    let end = start + line[start..].find('"').unwrap();
    &line[start..end]
}

/// Absolute direction (deg, flexion positive) of each silhouette segment.
pub fn segment_angles(points: &[(f64, f64)]) -> Vec<f64> {
    points.windows(2).map(|w| (w[1].1 - w[0].1).atan2(w[1].0 - w[0].0).to_degrees()).collect()
}
