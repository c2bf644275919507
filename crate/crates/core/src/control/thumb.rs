//! Staged thumb controllers.
//!
//! The pink cable flexes the MCP joint first, then pronates it, then flexes
//! the IP joint; contact resistance ends MCP flexion early. The light-blue
//! cable adducts the CMC joint to its limit and then flexes it, opposed by
//! the yellow cable's abduction. Cable displacement is converted to joint
//! rotation through the route's moment arm at each joint.

use serde::{Deserialize, Serialize};

use crate::hand_model::{CableId, HandModel, JointId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ThumbStageKind {
    McpFlexing,
    Pronating,
    IpFlexing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThumbStage {
    pub kind: ThumbStageKind,
    /// Fraction of the current stage's travel completed, 0..1.
    pub progress: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThumbTargets {
    pub mcp_flex_deg: f64,
    pub mcp_prosup_deg: f64,
    pub ip_flex_deg: f64,
    pub stage: ThumbStage,
}

/// Joint travel (deg) per mm of cable for a segment with arm `r` mm.
fn deg_per_mm(r: f64) -> f64 {
    (1.0 / r).to_degrees()
}

fn arm(model: &HandModel, cable: CableId, joint: JointId) -> f64 {
    let r = model.moment_arm(cable, joint);
    if r > 0.0 { r } else { f64::INFINITY }
}

/// Pink-cable state machine. Feed it a non-decreasing displacement ramp;
/// a decrease starts a new ramp.
#[derive(Clone, Debug, PartialEq)]
pub struct ThumbController {
    arms: [f64; 3],
    rest: [f64; 3],
    limits: [f64; 3],
    frozen_mcp: Option<f64>,
    last_mm: f64,
    last: ThumbTargets,
}

impl ThumbController {
    pub fn new(model: &HandModel) -> Self {
        let joints = [JointId::THUMB_MCP_FLEX, JointId::THUMB_MCP_PROSUP, JointId::THUMB_IP_FLEX];
        let arms = joints.map(|j| arm(model, CableId::ThumbPink, j));
        let rest = joints.map(|j| model.joint(j).rest_deg);
        let limits = joints.map(|j| model.joint(j).max_deg);
        let last = ThumbTargets {
            mcp_flex_deg: rest[0],
            mcp_prosup_deg: rest[1],
            ip_flex_deg: rest[2],
            stage: ThumbStage { kind: ThumbStageKind::McpFlexing, progress: 0.0 },
        };
        ThumbController { arms, rest, limits, frozen_mcp: None, last_mm: 0.0, last }
    }

    pub fn reset(&mut self) {
        self.frozen_mcp = None;
        self.last_mm = 0.0;
    }

    /// The MCP angle at which contact stopped flexion, if it has.
    pub fn frozen_mcp(&self) -> Option<f64> {
        self.frozen_mcp
    }

    /// Advances the ramp to `pink_mm`. `resistance` reports contact with an
    /// object; while MCP is still flexing it freezes MCP where it is.
    pub fn step(&mut self, pink_mm: f64, resistance: bool) -> ThumbTargets {
        let pink_mm = pink_mm.max(0.0);
        if pink_mm < self.last_mm {
            self.reset();
        }
        self.last_mm = pink_mm;
        if resistance && self.frozen_mcp.is_none() && self.last.stage.kind == ThumbStageKind::McpFlexing {
            let mcp = self.mcp_travel(pink_mm);
            self.frozen_mcp = Some(self.rest[0] + mcp);
        }
        self.last = self.evaluate(pink_mm);
        self.last
    }

    fn mcp_travel(&self, pink_mm: f64) -> f64 {
        (pink_mm * deg_per_mm(self.arms[0])).min(self.limits[0] - self.rest[0])
    }

    fn evaluate(&self, pink_mm: f64) -> ThumbTargets {
        let mcp_cap = self.frozen_mcp.unwrap_or(self.limits[0]) - self.rest[0];
        let ps_cap = self.limits[1] - self.rest[1];
        let ip_cap = self.limits[2] - self.rest[2];

        let mcp_mm = mcp_cap / deg_per_mm(self.arms[0]);
        let ps_mm = ps_cap / deg_per_mm(self.arms[1]);
        let ip_mm = ip_cap / deg_per_mm(self.arms[2]);

        let mcp = (pink_mm * deg_per_mm(self.arms[0])).min(mcp_cap);
        let after_mcp = (pink_mm - mcp_mm).max(0.0);
        let ps = (after_mcp * deg_per_mm(self.arms[1])).min(ps_cap);
        let after_ps = (after_mcp - ps_mm).max(0.0);
        let ip = (after_ps * deg_per_mm(self.arms[2])).min(ip_cap);

        let frozen = self.frozen_mcp.is_some();
        let stage = if !frozen && pink_mm < mcp_mm {
            ThumbStage { kind: ThumbStageKind::McpFlexing, progress: pink_mm / mcp_mm }
        } else if after_mcp < ps_mm {
            ThumbStage { kind: ThumbStageKind::Pronating, progress: after_mcp / ps_mm }
        } else {
            ThumbStage { kind: ThumbStageKind::IpFlexing, progress: (after_ps / ip_mm).min(1.0) }
        };
        ThumbTargets {
            mcp_flex_deg: self.rest[0] + mcp,
            mcp_prosup_deg: self.rest[1] + ps,
            ip_flex_deg: self.rest[2] + ip,
            stage,
        }
    }

    /// Pink displacement (mm) at which the ramp produces the given targets,
    /// with MCP frozen at `frozen_mcp` when contact occurs.
    pub fn displacement_for(&self, mcp_deg: f64, prosup_deg: f64, ip_deg: f64) -> f64 {
        (mcp_deg - self.rest[0]) / deg_per_mm(self.arms[0])
            + (prosup_deg - self.rest[1]) / deg_per_mm(self.arms[1])
            + (ip_deg - self.rest[2]) / deg_per_mm(self.arms[2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmcTargets {
    pub abd_add_deg: f64,
    pub flex_ext_deg: f64,
}

/// CMC targets from the light-blue and yellow displacements: net adduction
/// is light blue minus yellow; light blue beyond the adduction limit flexes
/// the joint.
pub fn cmc_step(lightblue_mm: f64, yellow_mm: f64, model: &HandModel) -> CmcTargets {
    let abd = model.joint(JointId::THUMB_CMC_ABD);
    let flex = model.joint(JointId::THUMB_CMC_FLEX);
    let lb_abd = deg_per_mm(arm(model, CableId::ThumbLightBlue, JointId::THUMB_CMC_ABD));
    let lb_flex = deg_per_mm(arm(model, CableId::ThumbLightBlue, JointId::THUMB_CMC_FLEX));
    let y_abd = deg_per_mm(arm(model, CableId::ThumbYellow, JointId::THUMB_CMC_ABD));

    let net = abd.rest_deg + lightblue_mm.max(0.0) * lb_abd - yellow_mm.max(0.0) * y_abd;
    let abd_add_deg = abd.clamp(net);
    let excess_mm = (net - abd.max_deg).max(0.0) / lb_abd;
    let flex_ext_deg = flex.clamp(flex.rest_deg + excess_mm * lb_flex);
    CmcTargets { abd_add_deg, flex_ext_deg }
}

/// Light-blue and yellow displacements that [`cmc_step`] maps to the given
/// targets, using yellow only for abduction.
pub fn cmc_displacements_for(targets: CmcTargets, model: &HandModel) -> (f64, f64) {
    let abd = model.joint(JointId::THUMB_CMC_ABD);
    let flex = model.joint(JointId::THUMB_CMC_FLEX);
    let lb_abd = deg_per_mm(arm(model, CableId::ThumbLightBlue, JointId::THUMB_CMC_ABD));
    let lb_flex = deg_per_mm(arm(model, CableId::ThumbLightBlue, JointId::THUMB_CMC_FLEX));
    let y_abd = deg_per_mm(arm(model, CableId::ThumbYellow, JointId::THUMB_CMC_ABD));
    let d_abd = targets.abd_add_deg - abd.rest_deg;
    if d_abd < 0.0 {
        return (0.0, -d_abd / y_abd);
    }
    let flex_mm = (targets.flex_ext_deg - flex.rest_deg).max(0.0) / lb_flex;
    (d_abd / lb_abd + flex_mm, 0.0)
}
