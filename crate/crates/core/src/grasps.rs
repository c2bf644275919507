//! The 33-grasp taxonomy as joint-target presets, with feasibility and
//! realizability checks.
//!
//! Preset angles are reconstructed by hand: the grasps are documented only
//! as photographs. Each preset respects the hand's actuation: middle and
//! ring/little fingers sit on their single-flexor equilibrium family, and
//! the thumb follows its cable staging (CMC adducts fully before flexing;
//! pronation needs MCP at its limit or stopped by contact; IP flexion
//! needs full pronation).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::control::{
    classify_posture, cmc_displacements_for, cmc_step, command_for_class, hold_pose, CalibrationMap, CmcTargets,
    ControlOptions, HoldRequest, IndexTargets, ThumbController, ThumbStage, ThumbStageKind,
};
use crate::hand_model::{CableId, CableValues, Finger, HandModel, JointId, JointVector};
use crate::statics::{solve_equilibrium, EquilibriumProblem};

/// Largest per-joint deviation from the preset for it to count as realized.
pub const RESIDUAL_TOL_DEG: f64 = 5.0;
/// Largest DIP deviation from the linkage curve, deg.
pub const LINKAGE_TOL_DEG: f64 = 2.0;

const CATALOG_JSON: &str = include_str!("../../../data/grasps.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraspPreset {
    pub taxonomy_id: u8,
    pub name: String,
    pub targets: JointVector,
    pub thumb_stage_hint: ThumbStage,
    #[serde(default)]
    pub requires_force_closure_pair: Option<(Finger, Finger)>,
    /// Angles chosen by hand rather than measured.
    pub reconstructed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresetReport {
    pub taxonomy_id: u8,
    pub name: String,
    pub limit_ok: bool,
    pub linkage_ok: bool,
    pub realizable: bool,
    /// Largest per-joint deviation of the equilibrium from the targets, deg;
    /// absent when the preset was not simulated.
    pub residual_deg: Option<f64>,
    pub worst_joint: Option<JointId>,
    pub thumb_stage_reached: Option<ThumbStageKind>,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub presets: Vec<PresetReport>,
    pub total: usize,
    pub realizable_count: usize,
}

/// Thumb pose in controller terms.
#[derive(Clone, Copy, Debug)]
struct ThumbPose {
    cmc_abd: f64,
    cmc_flex: f64,
    mcp: f64,
    prosup: f64,
    ip: f64,
}

struct PresetSpec {
    id: u8,
    name: &'static str,
    /// Index MCP abduction, MCP flexion, PIP flexion.
    index: (f64, f64, f64),
    /// MCP flexion of the middle finger and of ring/little.
    middle_mcp: f64,
    ring_little_mcp: f64,
    thumb: ThumbPose,
    pair: Option<(Finger, Finger)>,
}

const fn th(cmc_abd: f64, cmc_flex: f64, mcp: f64, prosup: f64, ip: f64) -> ThumbPose {
    ThumbPose { cmc_abd, cmc_flex, mcp, prosup, ip }
}

const THUMB_REST: ThumbPose = th(0.0, -30.0, 0.0, 0.0, 0.0);
const TI: Option<(Finger, Finger)> = Some((Finger::Thumb, Finger::Index));
const TM: Option<(Finger, Finger)> = Some((Finger::Thumb, Finger::Middle));

#[rustfmt::skip]
const SPECS: [PresetSpec; 33] = [
    PresetSpec { id: 1, name: "Large Diameter", index: (0.0, 40.0, 60.0), middle_mcp: 40.0, ring_little_mcp: 40.0, thumb: th(45.0, 0.0, 30.0, 20.0, 0.0), pair: None },
    PresetSpec { id: 2, name: "Small Diameter", index: (0.0, 70.0, 90.0), middle_mcp: 70.0, ring_little_mcp: 70.0, thumb: th(45.0, 20.0, 60.0, 45.0, 40.0), pair: None },
    PresetSpec { id: 3, name: "Medium Wrap", index: (0.0, 55.0, 80.0), middle_mcp: 55.0, ring_little_mcp: 55.0, thumb: th(45.0, 10.0, 40.0, 30.0, 0.0), pair: None },
    PresetSpec { id: 4, name: "Adducted Thumb", index: (0.0, 60.0, 80.0), middle_mcp: 60.0, ring_little_mcp: 60.0, thumb: th(45.0, -30.0, 10.0, 0.0, 0.0), pair: None },
    PresetSpec { id: 5, name: "Light Tool", index: (0.0, 50.0, 70.0), middle_mcp: 60.0, ring_little_mcp: 65.0, thumb: th(45.0, -30.0, 20.0, 0.0, 0.0), pair: None },
    PresetSpec { id: 6, name: "Prismatic 4 Finger", index: (0.0, 30.0, 40.0), middle_mcp: 20.0, ring_little_mcp: 20.0, thumb: th(45.0, 15.0, 40.0, 45.0, 20.0), pair: None },
    PresetSpec { id: 7, name: "Prismatic 3 Finger", index: (0.0, 30.0, 40.0), middle_mcp: 20.0, ring_little_mcp: 45.0, thumb: th(45.0, 15.0, 40.0, 45.0, 20.0), pair: None },
    PresetSpec { id: 8, name: "Prismatic 2 Finger", index: (0.0, 30.0, 40.0), middle_mcp: 45.0, ring_little_mcp: 60.0, thumb: th(45.0, 15.0, 40.0, 45.0, 20.0), pair: TI },
    PresetSpec { id: 9, name: "Palmar Pinch", index: (0.0, 45.0, 30.0), middle_mcp: 10.0, ring_little_mcp: 10.0, thumb: th(45.0, 20.0, 30.0, 45.0, 10.0), pair: TI },
    PresetSpec { id: 10, name: "Power Disk", index: (10.0, 35.0, 50.0), middle_mcp: 35.0, ring_little_mcp: 35.0, thumb: th(45.0, 5.0, 25.0, 15.0, 0.0), pair: None },
    PresetSpec { id: 11, name: "Power Sphere", index: (10.0, 40.0, 50.0), middle_mcp: 35.0, ring_little_mcp: 35.0, thumb: th(45.0, 20.0, 40.0, 30.0, 0.0), pair: None },
    PresetSpec { id: 12, name: "Precision Disk", index: (15.0, 30.0, 30.0), middle_mcp: 15.0, ring_little_mcp: 15.0, thumb: th(45.0, 10.0, 20.0, 20.0, 0.0), pair: None },
    PresetSpec { id: 13, name: "Precision Sphere", index: (10.0, 35.0, 40.0), middle_mcp: 20.0, ring_little_mcp: 20.0, thumb: th(45.0, 15.0, 30.0, 25.0, 0.0), pair: None },
    PresetSpec { id: 14, name: "Tripod", index: (0.0, 40.0, 40.0), middle_mcp: 20.0, ring_little_mcp: 5.0, thumb: th(45.0, 20.0, 35.0, 45.0, 10.0), pair: TI },
    PresetSpec { id: 15, name: "Fixed Hook", index: (0.0, 0.0, 80.0), middle_mcp: 40.0, ring_little_mcp: 40.0, thumb: THUMB_REST, pair: None },
    PresetSpec { id: 16, name: "Lateral", index: (0.0, 60.0, 70.0), middle_mcp: 60.0, ring_little_mcp: 60.0, thumb: th(45.0, 0.0, 20.0, 45.0, 10.0), pair: TI },
    PresetSpec { id: 17, name: "Index Finger Extension", index: (0.0, 0.0, 0.0), middle_mcp: 60.0, ring_little_mcp: 60.0, thumb: th(45.0, 10.0, 40.0, 20.0, 0.0), pair: None },
    PresetSpec { id: 18, name: "Extension Type", index: (0.0, 20.0, 0.0), middle_mcp: 10.0, ring_little_mcp: 10.0, thumb: th(45.0, 10.0, 30.0, 30.0, 0.0), pair: None },
    PresetSpec { id: 19, name: "Distal Type", index: (0.0, 20.0, 60.0), middle_mcp: 30.0, ring_little_mcp: 40.0, thumb: th(45.0, 0.0, 30.0, 45.0, 30.0), pair: TI },
    PresetSpec { id: 20, name: "Writing Tripod", index: (0.0, 30.0, 50.0), middle_mcp: 25.0, ring_little_mcp: 45.0, thumb: th(45.0, 15.0, 35.0, 45.0, 20.0), pair: TI },
    PresetSpec { id: 21, name: "Tripod Variation", index: (0.0, 35.0, 30.0), middle_mcp: 30.0, ring_little_mcp: 40.0, thumb: th(45.0, 10.0, 30.0, 35.0, 0.0), pair: TM },
    PresetSpec { id: 22, name: "Parallel Extension", index: (0.0, 50.0, 0.0), middle_mcp: 10.0, ring_little_mcp: 10.0, thumb: th(45.0, 0.0, 20.0, 20.0, 0.0), pair: TI },
    PresetSpec { id: 23, name: "Adduction Grip", index: (10.0, 20.0, 20.0), middle_mcp: 20.0, ring_little_mcp: 20.0, thumb: THUMB_REST, pair: Some((Finger::Index, Finger::Middle)) },
    PresetSpec { id: 24, name: "Tip Pinch", index: (0.0, 45.0, 60.0), middle_mcp: 15.0, ring_little_mcp: 10.0, thumb: th(45.0, 25.0, 40.0, 45.0, 30.0), pair: TI },
    PresetSpec { id: 25, name: "Lateral Tripod", index: (0.0, 50.0, 70.0), middle_mcp: 50.0, ring_little_mcp: 60.0, thumb: th(45.0, 5.0, 25.0, 45.0, 15.0), pair: TM },
    PresetSpec { id: 26, name: "Sphere 4 Finger", index: (10.0, 35.0, 45.0), middle_mcp: 25.0, ring_little_mcp: 25.0, thumb: th(45.0, 20.0, 35.0, 30.0, 0.0), pair: None },
    PresetSpec { id: 27, name: "Quadpod", index: (5.0, 35.0, 45.0), middle_mcp: 25.0, ring_little_mcp: 20.0, thumb: th(45.0, 20.0, 35.0, 40.0, 0.0), pair: None },
    PresetSpec { id: 28, name: "Sphere 3 Finger", index: (10.0, 35.0, 45.0), middle_mcp: 25.0, ring_little_mcp: 50.0, thumb: th(45.0, 20.0, 35.0, 30.0, 0.0), pair: None },
    PresetSpec { id: 29, name: "Stick", index: (0.0, 45.0, 70.0), middle_mcp: 45.0, ring_little_mcp: 45.0, thumb: th(45.0, -30.0, 10.0, 0.0, 0.0), pair: None },
    PresetSpec { id: 30, name: "Palmar", index: (0.0, 10.0, 20.0), middle_mcp: 10.0, ring_little_mcp: 10.0, thumb: th(20.0, -30.0, 0.0, 0.0, 0.0), pair: None },
    PresetSpec { id: 31, name: "Ring", index: (0.0, 50.0, 60.0), middle_mcp: 15.0, ring_little_mcp: 10.0, thumb: th(45.0, 15.0, 40.0, 45.0, 25.0), pair: TI },
    PresetSpec { id: 32, name: "Ventral", index: (0.0, 30.0, 20.0), middle_mcp: 30.0, ring_little_mcp: 30.0, thumb: th(30.0, -30.0, 20.0, 0.0, 0.0), pair: None },
    PresetSpec { id: 33, name: "Inferior Pincer", index: (0.0, 40.0, 50.0), middle_mcp: 10.0, ring_little_mcp: 5.0, thumb: th(45.0, 25.0, 45.0, 45.0, 20.0), pair: TI },
];

/// PIP angle a single-flexor finger settles at when its MCP is at `mcp_deg`:
/// the flexor tension that holds MCP against its spring also loads PIP
/// (directly and through the coupled DIP) against the PIP spring.
pub fn single_flexor_pip(model: &HandModel, finger: Finger, mcp_deg: f64) -> f64 {
    let chain = JointId::flexion_chain(finger);
    let (mcp, pip, dip) = (chain[0], chain[1], chain[2]);
    let cable = match finger {
        Finger::Middle => CableId::MiddleFlexor,
        Finger::Ring | Finger::Little => CableId::RingLittleFlexor,
        _ => return model.joint(pip).rest_deg,
    };
    let torque = |j: JointId, v: f64| {
        model.spring(j).map_or(0.0, |s| s.preload_nmm + s.stiffness_nmm_per_deg * (v - s.rest_deg))
    };
    let r_m = model.moment_arm(cable, mcp);
    if r_m <= 0.0 || mcp_deg <= model.joint(mcp).rest_deg {
        return model.joint(pip).rest_deg;
    }
    let tension = torque(mcp, mcp_deg) / r_m;
    let (r_p, r_d) = (model.moment_arm(cable, pip), model.moment_arm(cable, dip));
    let k_p = model.spring(pip).map_or(f64::INFINITY, |s| s.stiffness_nmm_per_deg);
    let spec = model.joint(pip);
    let mut p = spec.rest_deg;
    for _ in 0..60 {
        let slope = model.linkages.get(&finger).and_then(|d| d.coupling_slope(p).ok()).unwrap_or(1.0);
        let drive = tension * (r_p + r_d * slope);
        let rest_torque = torque(pip, spec.rest_deg);
        p = spec.clamp(spec.rest_deg + (drive - rest_torque) / k_p);
    }
    p
}

fn thumb_ramp(model: &HandModel, pose: &ThumbPose) -> (ThumbController, crate::control::ThumbTargets) {
    let mut ctl = ThumbController::new(model);
    let mcp_max = model.joint(JointId::THUMB_MCP_FLEX).max_deg;
    let d = ctl.displacement_for(pose.mcp, pose.prosup, pose.ip);
    let contact = pose.prosup > 0.0 && pose.mcp < mcp_max;
    let mut t = ctl.step(0.0, false);
    if contact {
        let d_contact = ctl.displacement_for(pose.mcp, 0.0, 0.0);
        ctl.step(d_contact, false);
        ctl.step(d_contact, true);
    }
    if d > 0.0 {
        t = ctl.step(d, false);
    }
    (ctl, t)
}

fn build(model: &HandModel, spec: &PresetSpec) -> GraspPreset {
    let mut q = model.rest_pose();
    q[JointId::INDEX_MCP_ABD] = spec.index.0;
    q[JointId::INDEX_MCP_FLEX] = spec.index.1;
    q[JointId::INDEX_PIP_FLEX] = spec.index.2;
    q[JointId::MIDDLE_MCP_FLEX] = spec.middle_mcp;
    q[JointId::MIDDLE_PIP_FLEX] = single_flexor_pip(model, Finger::Middle, spec.middle_mcp);
    for f in [Finger::Ring, Finger::Little] {
        let chain = JointId::flexion_chain(f);
        q[chain[0]] = spec.ring_little_mcp;
        q[chain[1]] = single_flexor_pip(model, f, spec.ring_little_mcp);
    }
    let t = spec.thumb;
    q[JointId::THUMB_CMC_ABD] = t.cmc_abd;
    q[JointId::THUMB_CMC_FLEX] = t.cmc_flex;
    q[JointId::THUMB_MCP_FLEX] = t.mcp;
    q[JointId::THUMB_MCP_PROSUP] = t.prosup;
    q[JointId::THUMB_IP_FLEX] = t.ip;
    let (_, reached) = thumb_ramp(model, &t);
    GraspPreset {
        taxonomy_id: spec.id,
        name: spec.name.to_string(),
        targets: model.complete(&q),
        thumb_stage_hint: reached.stage,
        requires_force_closure_pair: spec.pair,
        reconstructed: true,
    }
}

/// The catalog computed from the canonical model; the shipped catalog
/// file is this list serialized by [`catalog_json`].
pub fn builtin_catalog() -> Vec<GraspPreset> {
    let model = crate::hand_model::default_catch919();
    SPECS.iter().map(|s| build(&model, s)).collect()
}

pub fn catalog_json(presets: &[GraspPreset]) -> String {
    let mut s = serde_json::to_string_pretty(presets).expect("presets serialize");
    s.push('\n');
    s
}

/// The shipped catalog.
pub fn load_catalog() -> Vec<GraspPreset> {
    parse_catalog(CATALOG_JSON).expect("shipped catalog parses")
}

pub fn parse_catalog(text: &str) -> Result<Vec<GraspPreset>, serde_json::Error> {
    serde_json::from_str(text)
}

fn thumb_pose(q: &JointVector) -> ThumbPose {
    ThumbPose {
        cmc_abd: q[JointId::THUMB_CMC_ABD],
        cmc_flex: q[JointId::THUMB_CMC_FLEX],
        mcp: q[JointId::THUMB_MCP_FLEX],
        prosup: q[JointId::THUMB_MCP_PROSUP],
        ip: q[JointId::THUMB_IP_FLEX],
    }
}

/// Cable commands, direct-joint targets and contact stops realizing a
/// preset, as produced by the controllers.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetCommands {
    pub commands: CableValues,
    pub direct_joints: BTreeMap<JointId, f64>,
    pub stops: BTreeMap<JointId, f64>,
    /// The pose the controllers aim at (thumb angles as staged).
    pub target: JointVector,
    pub thumb_stage: ThumbStageKind,
}

/// Runs the index feedforward, the thumb and CMC controllers and the
/// single-flexor holds for a target pose.
pub fn commands_for_pose(
    model: &HandModel,
    targets: &JointVector,
    options: &ControlOptions,
) -> Result<PresetCommands, crate::control::ControlError> {
    let map = CalibrationMap::from_model(model);
    let mut commands = CableValues::zeros();
    let mut target = model.complete(targets);

    let index = IndexTargets {
        mcp_deg: target[JointId::INDEX_MCP_FLEX],
        pip_deg: target[JointId::INDEX_PIP_FLEX],
        force_n: 0.0,
    };
    let class = classify_posture(&target, false, options.eps_deg);
    let ff = command_for_class(model, class, &index, &map, options)?;
    crate::control::apply_commands(&mut commands, &ff);

    // Thumb: replay the staged controllers to get the angles they reach.
    let pose = thumb_pose(&target);
    let (ctl, reached) = thumb_ramp(model, &pose);
    target[JointId::THUMB_MCP_FLEX] = reached.mcp_flex_deg;
    target[JointId::THUMB_MCP_PROSUP] = reached.mcp_prosup_deg;
    target[JointId::THUMB_IP_FLEX] = reached.ip_flex_deg;
    let (lb, y) = cmc_displacements_for(CmcTargets { abd_add_deg: pose.cmc_abd, flex_ext_deg: pose.cmc_flex }, model);
    let cmc = cmc_step(lb, y, model);
    target[JointId::THUMB_CMC_ABD] = cmc.abd_add_deg;
    target[JointId::THUMB_CMC_FLEX] = cmc.flex_ext_deg;
    let mut stops = BTreeMap::new();
    if let Some(mcp) = ctl.frozen_mcp() {
        stops.insert(JointId::THUMB_MCP_FLEX, mcp);
    }

    for tensioned in [
        vec![CableId::MiddleFlexor],
        vec![CableId::RingLittleFlexor],
        vec![CableId::ThumbPink],
        vec![CableId::ThumbLightBlue, CableId::ThumbYellow],
    ] {
        let req = HoldRequest { target, tensioned, released: Vec::new(), force: None, stops: stops.clone() };
        let ff = hold_pose(model, &req, &map, options)?;
        crate::control::apply_commands(&mut commands, &ff);
    }

    let mut direct_joints = BTreeMap::new();
    for spec in &model.joints {
        if spec.drive == crate::hand_model::Drive::DirectServo {
            direct_joints.insert(spec.id, spec.clamp(target[spec.id]));
        }
    }
    Ok(PresetCommands { commands, direct_joints, stops, target: model.complete(&target), thumb_stage: reached.stage.kind })
}

/// Limit, linkage and realizability checks for one preset.
pub fn check_feasible(model: &HandModel, preset: &GraspPreset) -> PresetReport {
    let q = &preset.targets;
    let limit_ok = model.check_limits(q, 0.0).is_ok();
    let linkage_ok = Finger::DIGITS.iter().all(|&f| match JointId::linkage_pair(f) {
        Some((pip, dip)) => model.coupled_dip(f, q[pip]).is_ok_and(|d| (d - q[dip]).abs() <= LINKAGE_TOL_DEG),
        None => true,
    });
    let mut report = PresetReport {
        taxonomy_id: preset.taxonomy_id,
        name: preset.name.clone(),
        limit_ok,
        linkage_ok,
        realizable: false,
        residual_deg: None,
        worst_joint: None,
        thumb_stage_reached: None,
        converged: false,
    };
    if !(limit_ok && linkage_ok) {
        return report;
    }
    let options = ControlOptions::for_model(model);
    let Ok(plan) = commands_for_pose(model, q, &options) else {
        return report;
    };
    let mut problem = EquilibriumProblem::new(model).with_commands(plan.commands);
    problem.direct_joints = plan.direct_joints;
    problem.stops = plan.stops;
    let Ok(result) = solve_equilibrium(&problem, &model.rest_pose()) else {
        return report;
    };
    let (worst, residual) = JointId::ALL
        .iter()
        .map(|&j| (j, (result.q_star[j] - q[j]).abs()))
        .fold((JointId::ALL[0], 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    report.residual_deg = Some(residual);
    report.worst_joint = Some(worst);
    report.thumb_stage_reached = Some(plan.thumb_stage);
    report.converged = result.converged;
    report.realizable = residual <= RESIDUAL_TOL_DEG;
    report
}

/// Checks every preset of the shipped catalog against `model`.
pub fn run_catalog(model: &HandModel) -> CatalogReport {
    run_presets(model, &load_catalog())
}

pub fn run_presets(model: &HandModel, presets: &[GraspPreset]) -> CatalogReport {
    let rows: Vec<PresetReport> = presets.iter().map(|p| check_feasible(model, p)).collect();
    let realizable_count = rows.iter().filter(|r| r.realizable).count();
    CatalogReport { total: rows.len(), realizable_count, presets: rows }
}
