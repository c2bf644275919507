//! Independent reference computations shared by the integration tests.
//! Nothing here calls the solver, closure or kinematics code under test.
#![allow(dead_code)]

use catch_core::hand_model::{CableId, Finger, HandModel, JointId, JointVector, SpringKind, SpringSpec};
use catch_core::linkage::{Branch, FourBarDims};

pub const DEG: f64 = std::f64::consts::PI / 180.0;

fn wrap_deg(x: f64) -> f64 {
    let y = x.rem_euclid(360.0);
    if y > 180.0 { y - 360.0 } else { y }
}

/// DIP angle by bisection on the loop-closure residual
/// `|B(θ4) − A|² − coupler²`, which is monotone on each branch's half-turn.
pub fn bisect_dip(dims: &FourBarDims, pip_deg: f64) -> Option<f64> {
    let (a, b, c, d) = (dims.input_mm, dims.coupler_mm, dims.output_mm, dims.ground_mm);
    let t2 = (dims.input_mount_deg + pip_deg).to_radians();
    let (ax, ay) = (a * t2.cos(), a * t2.sin());
    let s = (ax - d).hypot(ay);
    if !(b > (c - s).abs() && b < c + s) {
        return None;
    }
    let phi = ay.atan2(ax - d);
    let f = |t: f64| (d + c * t.cos() - ax).powi(2) + (c * t.sin() - ay).powi(2) - b * b;
    // f is positive at the far end of the bracket and negative at phi.
    let (mut pos, mut neg) = match dims.branch {
        Branch::Open => (phi - std::f64::consts::PI, phi),
        Branch::Crossed => (phi + std::f64::consts::PI, phi),
    };
    for _ in 0..200 {
        let mid = 0.5 * (pos + neg);
        if f(mid) > 0.0 { pos = mid } else { neg = mid }
    }
    Some(wrap_deg((0.5 * (pos + neg)).to_degrees() - dims.output_mount_deg))
}

type Mat3 = [[f64; 3]; 3];

fn mul(x: &Mat3, y: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    out
}

/// Flexion by `deg` turns the frame toward −y.
fn flex(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn along(len: f64) -> Mat3 {
    [[1.0, 0.0, len], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// Fingertip by chaining homogeneous transforms joint by joint.
pub fn fk_tip(model: &HandModel, finger: Finger, q: &JointVector) -> (f64, f64) {
    let l = model.phalanx_lengths(finger);
    let mut t = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let steps: Vec<Mat3> = match finger {
        Finger::Thumb => vec![
            flex(q[JointId::THUMB_CMC_FLEX]),
            along(l[0]),
            flex(q[JointId::THUMB_MCP_FLEX]),
            along(l[1]),
            flex(q[JointId::THUMB_IP_FLEX]),
            along(l[2]),
        ],
        Finger::Palm => vec![],
        f => {
            let chain = JointId::flexion_chain(f);
            let chute = if f == Finger::Index { q[JointId::INDEX_DIP_CHUTE] } else { 0.0 };
            vec![
                along(l[0]),
                flex(q[chain[0]]),
                along(l[1]),
                flex(q[chain[1]]),
                along(l[2]),
                flex(q[chain[2]] - chute),
                along(l[3]),
            ]
        }
    };
    for s in &steps {
        t = mul(&t, s);
    }
    (t[0][2], t[1][2])
}

/// Canonical model with a return spring on the index MCP, so the index
/// has a unique unloaded equilibrium for every cable command.
pub fn toy_model() -> HandModel {
    let mut m = catch_core::hand_model::default_catch919();
    m.springs.push(SpringSpec {
        joint: JointId::INDEX_MCP_FLEX,
        stiffness_nmm_per_deg: 2.0,
        rest_deg: 0.0,
        kind: SpringKind::LinearReturn,
        preload_nmm: 0.0,
    });
    m
}

/// Exhaustive minimizer of the index MCP/PIP energy on a 0.25° grid, with
/// every other joint at rest. Returns (mcp, pip).
pub struct ToyGrid {
    pub mcp: Vec<f64>,
    pub pip: Vec<f64>,
    dip: Vec<f64>,
    springs: Vec<(JointId, f64, f64, f64)>,
    arms: Vec<(CableId, Vec<(JointId, f64)>)>,
}

impl ToyGrid {
    pub fn new(model: &HandModel) -> Self {
        let range = |j: JointId| {
            let s = model.joint(j);
            let n = ((s.max_deg - s.min_deg) / 0.25).round() as usize;
            (0..=n).map(|i| s.min_deg + 0.25 * i as f64).collect::<Vec<_>>()
        };
        let mcp = range(JointId::INDEX_MCP_FLEX);
        let pip = range(JointId::INDEX_PIP_FLEX);
        let dims = model.linkages[&Finger::Index];
        let dspec = model.joint(JointId::INDEX_DIP_FLEX);
        let dip = pip.iter().map(|&p| bisect_dip(&dims, p).unwrap().clamp(dspec.min_deg, dspec.max_deg)).collect();
        let springs = model
            .springs
            .iter()
            .filter(|s| [JointId::INDEX_MCP_FLEX, JointId::INDEX_PIP_FLEX].contains(&s.joint))
            .map(|s| (s.joint, s.stiffness_nmm_per_deg, s.rest_deg, s.preload_nmm))
            .collect();
        let arms = [CableId::IndexBL, CableId::IndexOL, CableId::IndexPL]
            .into_iter()
            .map(|c| {
                let r = model.route(c).unwrap();
                (c, r.segments.iter().map(|s| (s.joint, f64::from(s.sign) * s.moment_arm_mm)).collect())
            })
            .collect();
        ToyGrid { mcp, pip, dip, springs, arms }
    }

    pub fn energy(&self, commands: &[f64; 3], kc: f64, mcp: f64, pip: f64, dip: f64) -> f64 {
        let angle = |j: JointId| match j {
            JointId::INDEX_MCP_FLEX => mcp,
            JointId::INDEX_PIP_FLEX => pip,
            JointId::INDEX_DIP_FLEX => dip,
            _ => 0.0,
        };
        let mut e = 0.0;
        for &(j, k, rest, pre) in &self.springs {
            let d = angle(j) - rest;
            e += DEG * (pre * d + 0.5 * k * d * d);
        }
        for (i, (_, segs)) in self.arms.iter().enumerate() {
            let exc: f64 = segs.iter().map(|&(j, r)| r * angle(j) * DEG).sum();
            let stretch = commands[i] - exc;
            if stretch > 0.0 {
                e += 0.5 * kc * stretch * stretch;
            }
        }
        e
    }

    /// Commands are for BL, OL, PL in that order.
    pub fn argmin(&self, commands: &[f64; 3], kc: f64) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for &m in &self.mcp {
            for (k, &p) in self.pip.iter().enumerate() {
                let e = self.energy(commands, kc, m, p, self.dip[k]);
                if e < best.0 {
                    best = (e, m, p);
                }
            }
        }
        (best.1, best.2)
    }
}
