//! Posture taxonomy, activation tables and feedforward cable commands.
//!
//! Index-finger postures in the sagittal plane fall into six classes: the
//! four combinations of MCP and IP flexion/extension without load, and
//! two classes for a fingertip pushed from the palmar side. Each class has
//! an activation set over the blue (BL), orange (OL) and pink (PL) cables
//! and the passive PIP spring (SP). Commands for a class are found by
//! solving for non-negative cable tensions that make the target pose an
//! equilibrium, then converting tensions to reel-in lengths through a
//! calibration map.

pub mod calibration;
pub mod nnls;
pub mod thumb;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use calibration::{calibrate, CablePolynomial, CalibrationError, CalibrationMap, SampleGrid};
pub use thumb::{cmc_displacements_for, cmc_step, CmcTargets, ThumbController, ThumbStage, ThumbStageKind, ThumbTargets};

use crate::hand_model::{CableId, CableValues, Finger, HandModel, JointId, JointVector, LimitViolation};
use crate::statics::{chute_force_threshold, EquilibriumProblem, ExternalForce, Objective, StaticsError};
use crate::tendon::jacobian;

/// Default flexion threshold separating "flexed" from "extended", deg.
pub const DEFAULT_EPS_DEG: f64 = 5.0;
/// Default release applied to inactive cables, mm.
pub const DEFAULT_SLACK_MARGIN_MM: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PostureClass {
    #[serde(rename = "A")]
    McpExtIpExt,
    #[serde(rename = "B")]
    McpExtIpFlex,
    #[serde(rename = "C")]
    McpFlexIpExt,
    #[serde(rename = "D")]
    McpFlexIpFlex,
    #[serde(rename = "E")]
    ForcedPipExt,
    #[serde(rename = "F")]
    ForcedPipFlex,
}

impl PostureClass {
    pub const ALL: [PostureClass; 6] = [
        PostureClass::McpExtIpExt,
        PostureClass::McpExtIpFlex,
        PostureClass::McpFlexIpExt,
        PostureClass::McpFlexIpFlex,
        PostureClass::ForcedPipExt,
        PostureClass::ForcedPipFlex,
    ];

    pub fn letter(self) -> char {
        match self {
            PostureClass::McpExtIpExt => 'A',
            PostureClass::McpExtIpFlex => 'B',
            PostureClass::McpFlexIpExt => 'C',
            PostureClass::McpFlexIpFlex => 'D',
            PostureClass::ForcedPipExt => 'E',
            PostureClass::ForcedPipFlex => 'F',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PostureClass::McpExtIpExt => "McpExtIpExt",
            PostureClass::McpExtIpFlex => "McpExtIpFlex",
            PostureClass::McpFlexIpExt => "McpFlexIpExt",
            PostureClass::McpFlexIpFlex => "McpFlexIpFlex",
            PostureClass::ForcedPipExt => "ForcedPipExt",
            PostureClass::ForcedPipFlex => "ForcedPipFlex",
        }
    }

    pub fn is_forced(self) -> bool {
        matches!(self, PostureClass::ForcedPipExt | PostureClass::ForcedPipFlex)
    }
}

impl fmt::Display for PostureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for PostureClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PostureClass::ALL
            .into_iter()
            .find(|c| s.eq_ignore_ascii_case(c.name()) || s.eq_ignore_ascii_case(&c.letter().to_string()))
            .ok_or_else(|| format!("unknown posture class {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ActivationLevel {
    Inactive,
    Active,
    /// Engaged only in some circumstances: PL holds its joint, BL engages
    /// above a force threshold, SP resists once deflected.
    Conditional,
}

impl ActivationLevel {
    pub fn symbol(self) -> &'static str {
        match self {
            ActivationLevel::Inactive => "",
            ActivationLevel::Active => "+",
            ActivationLevel::Conditional => "(+)",
        }
    }
}

/// Activation of the index cables and the PIP spring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActivationSet {
    pub bl: ActivationLevel,
    pub ol: ActivationLevel,
    pub sp: ActivationLevel,
    pub pl: ActivationLevel,
}

/// Activation of the human muscles the index cables stand in for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MuscleActivation {
    pub fdp: ActivationLevel,
    pub fds: ActivationLevel,
    pub pi_di: ActivationLevel,
    pub edc: ActivationLevel,
}

impl MuscleActivation {
    /// The robot-side reading: FDS→BL, FDP→OL, PI/DI→SP, EDC→PL.
    pub fn as_robot(self) -> ActivationSet {
        ActivationSet { bl: self.fds, ol: self.fdp, sp: self.pi_di, pl: self.edc }
    }
}

/// Columns in which two activation sets differ, by cable/spring name.
pub fn activation_differences(a: ActivationSet, b: ActivationSet) -> Vec<&'static str> {
    [("BL", a.bl, b.bl), ("OL", a.ol, b.ol), ("SP", a.sp, b.sp), ("PL", a.pl, b.pl)]
        .into_iter()
        .filter(|(_, x, y)| x != y)
        .map(|(n, _, _)| n)
        .collect()
}

/// Classifies an index pose. Without load the class follows MCP and PIP
/// each against `eps_deg`; with load it follows PIP alone.
pub fn classify_posture(q: &JointVector, forced: bool, eps_deg: f64) -> PostureClass {
    let mcp_flexed = q[JointId::INDEX_MCP_FLEX] > eps_deg;
    let ip_flexed = q[JointId::INDEX_PIP_FLEX] > eps_deg;
    match (forced, mcp_flexed, ip_flexed) {
        (true, _, false) => PostureClass::ForcedPipExt,
        (true, _, true) => PostureClass::ForcedPipFlex,
        (false, false, false) => PostureClass::McpExtIpExt,
        (false, false, true) => PostureClass::McpExtIpFlex,
        (false, true, false) => PostureClass::McpFlexIpExt,
        (false, true, true) => PostureClass::McpFlexIpFlex,
    }
}

/// The robot's control strategy for each class.
pub fn activation_for(class: PostureClass) -> ActivationSet {
    use ActivationLevel::{Active as A, Conditional as C, Inactive as I};
    let (bl, ol, sp, pl) = match class {
        PostureClass::McpExtIpExt => (I, I, C, A),
        PostureClass::McpExtIpFlex => (A, A, C, A),
        PostureClass::McpFlexIpExt | PostureClass::McpFlexIpFlex => (A, A, C, C),
        PostureClass::ForcedPipExt | PostureClass::ForcedPipFlex => (C, A, C, I),
    };
    ActivationSet { bl, ol, sp, pl }
}

/// Human muscle activation for the posture analogous to each class.
pub fn human_reference_activation(class: PostureClass) -> MuscleActivation {
    use ActivationLevel::{Active as A, Conditional as C, Inactive as I};
    let (fdp, fds, pi_di, edc) = match class {
        PostureClass::McpExtIpExt => (I, I, A, A),
        PostureClass::McpExtIpFlex => (A, A, I, A),
        PostureClass::McpFlexIpExt => (A, A, A, C),
        PostureClass::McpFlexIpFlex => (A, A, I, C),
        PostureClass::ForcedPipExt => (C, A, A, I),
        PostureClass::ForcedPipFlex => (C, A, I, I),
    };
    MuscleActivation { fdp, fds, pi_di, edc }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("target MCP {mcp_deg}°, PIP {pip_deg}°, force {force_n} N is class {actual}, not {requested}")]
    ClassMismatch { requested: PostureClass, actual: PostureClass, mcp_deg: f64, pip_deg: f64, force_n: f64 },
    #[error("target out of range: {0}")]
    OutOfRange(#[from] LimitViolation),
    #[error("calibration map has no polynomial for {0}")]
    Uncalibrated(CableId),
    #[error(transparent)]
    Statics(#[from] StaticsError),
}

/// Desired index angles and fingertip load.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexTargets {
    pub mcp_deg: f64,
    pub pip_deg: f64,
    /// Palmar fingertip force, N; zero for the unloaded classes.
    #[serde(default)]
    pub force_n: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlOptions {
    pub eps_deg: f64,
    pub slack_margin_mm: f64,
    /// Fingertip force above which a conditional BL engages, N.
    pub bl_engage_force_n: f64,
    /// N/mm; must match the stiffness the commands are solved with.
    pub cable_stiffness: f64,
}

impl ControlOptions {
    pub fn for_model(model: &HandModel) -> Self {
        ControlOptions {
            eps_deg: DEFAULT_EPS_DEG,
            slack_margin_mm: DEFAULT_SLACK_MARGIN_MM,
            bl_engage_force_n: chute_force_threshold(model),
            cable_stiffness: crate::statics::DEFAULT_CABLE_STIFFNESS,
        }
    }
}

/// Tensions that hold a pose, and the commands that produce them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feedforward {
    /// Reel-in lengths relative to rest, mm, for every cable involved.
    pub commands: BTreeMap<CableId, f64>,
    /// Planned tensions, N.
    pub tensions: BTreeMap<CableId, f64>,
    /// Unbalanced generalized torque left at the target, N·mm/deg.
    pub residual: f64,
}

/// What to hold and with which cables.
#[derive(Clone, Debug, PartialEq)]
pub struct HoldRequest {
    /// Completed target pose.
    pub target: JointVector,
    /// Cables allowed to carry tension.
    pub tensioned: Vec<CableId>,
    /// Cables to slacken by the slack margin.
    pub released: Vec<CableId>,
    pub force: Option<ExternalForce>,
    /// Contact stops on free joints, treated as upper limits.
    pub stops: BTreeMap<JointId, f64>,
}

/// Finds non-negative tensions on `tensioned` cables so that `target` is
/// an equilibrium: every interior joint the cables cross is balanced, and
/// joints resting on a limit or stop are pressed into it by a small
/// margin. Solved as a non-negative least-squares problem with slack
/// variables for the one-sided rows and light Tikhonov damping.
pub fn hold_pose(
    model: &HandModel,
    request: &HoldRequest,
    map: &CalibrationMap,
    options: &ControlOptions,
) -> Result<Feedforward, ControlError> {
    let target = model.complete(&request.target);
    let mut passive = EquilibriumProblem::new(model);
    passive.cable_stiffness = options.cable_stiffness;
    passive.external_force = request.force;
    passive.stops = request.stops.clone();
    // Slack every cable far enough that only springs and load remain.
    for c in CableId::ALL {
        passive.commands[c] = -1e6;
    }
    let obj = Objective::new(&passive, &target)?;
    let b_all = obj.reduced_gradient(&target);
    let jac = jacobian(model, &target);
    let columns: Vec<Vec<f64>> = request.tensioned.iter().map(|&c| obj.fold(&target, &jac.row(c))).collect();

    // Rows: free joints crossed by at least one tensioned cable.
    let free = obj.free_joints();
    let rows: Vec<usize> = (0..free.len()).filter(|&i| columns.iter().any(|col| col[i] != 0.0)).collect();

    let n = request.tensioned.len();
    let mut bound_rows = Vec::new();
    for (r, &i) in rows.iter().enumerate() {
        let j = free[i];
        let spec = model.joint(j);
        let upper = request.stops.get(&j).map_or(spec.max_deg, |&s| s.min(spec.max_deg));
        if target[j] >= upper - 1e-9 {
            bound_rows.push((r, 1.0));
        } else if target[j] <= spec.min_deg + 1e-9 {
            bound_rows.push((r, -1.0));
        }
    }
    let m = rows.len();
    let ns = bound_rows.len();
    let mut a = DMatrix::zeros(m + n + ns, n + ns);
    let mut b = DVector::zeros(m + n + ns);
    for (r, &i) in rows.iter().enumerate() {
        for (k, col) in columns.iter().enumerate() {
            a[(r, k)] = col[i];
        }
        b[r] = b_all[i];
    }
    for (s, &(r, dir)) in bound_rows.iter().enumerate() {
        let margin = 0.02 * b[r].abs() + 0.005;
        // Upper: A f − s = b + m, so A f ≥ b + m. Lower: A f + s = b − m.
        a[(r, n + s)] = -dir;
        b[r] += dir * margin;
    }
    let scale = a.view((0, 0), (m, n)).norm().max(1e-12);
    let damping = 1e-4 * scale;
    for k in 0..n + ns {
        if k < n {
            a[(m + k, k)] = damping;
        } else {
            a[(m + n + (k - n), k)] = damping;
        }
    }
    let x = nnls::nnls(&a, &b);

    let mut residual_sq = 0.0;
    for (r, &i) in rows.iter().enumerate() {
        let torque: f64 = (0..n).map(|k| columns[k][i] * x[k]).sum();
        let mut err = torque - b_all[i];
        if let Some(&(_, dir)) = bound_rows.iter().find(|(br, _)| *br == r) {
            // One-sided rows only count violations.
            err = if dir > 0.0 { err.min(0.0) } else { err.max(0.0) };
        }
        residual_sq += err * err;
    }

    let rest = model.rest_pose();
    let delta = |c: CableId| -> Result<f64, ControlError> {
        let now = map.predict(c, &target).ok_or(ControlError::Uncalibrated(c))?;
        let base = map.predict(c, &rest).ok_or(ControlError::Uncalibrated(c))?;
        Ok(now - base)
    };
    let mut commands = BTreeMap::new();
    let mut tensions = BTreeMap::new();
    for (k, &c) in request.tensioned.iter().enumerate() {
        commands.insert(c, delta(c)? + x[k] / options.cable_stiffness);
        tensions.insert(c, x[k]);
    }
    for &c in &request.released {
        commands.insert(c, delta(c)? - options.slack_margin_mm);
        tensions.insert(c, 0.0);
    }
    Ok(Feedforward { commands, tensions, residual: residual_sq.sqrt() })
}

/// Index target pose: rest with the given MCP and PIP, coupled DIP filled in.
pub fn index_target_pose(model: &HandModel, targets: &IndexTargets) -> Result<JointVector, ControlError> {
    for (j, v) in [(JointId::INDEX_MCP_FLEX, targets.mcp_deg), (JointId::INDEX_PIP_FLEX, targets.pip_deg)] {
        let spec = model.joint(j);
        if !spec.contains(v) {
            return Err(LimitViolation { joint: j, value_deg: v, min_deg: spec.min_deg, max_deg: spec.max_deg }.into());
        }
    }
    let mut q = model.rest_pose();
    q[JointId::INDEX_MCP_FLEX] = targets.mcp_deg;
    q[JointId::INDEX_PIP_FLEX] = targets.pip_deg;
    Ok(model.complete(&q))
}

/// Index cable commands realizing `targets` under the strategy of
/// `class`. Active cables are tensioned; a conditional PL holds its joint;
/// a conditional BL engages only above the configured force; inactive
/// cables are released by the slack margin.
pub fn command_for_class(
    model: &HandModel,
    class: PostureClass,
    targets: &IndexTargets,
    map: &CalibrationMap,
    options: &ControlOptions,
) -> Result<Feedforward, ControlError> {
    if !(targets.force_n >= 0.0 && targets.force_n.is_finite()) {
        return Err(StaticsError::InvalidProblem(format!("force magnitude {} N", targets.force_n)).into());
    }
    let target = index_target_pose(model, targets)?;
    let forced = targets.force_n > 0.0;
    let actual = classify_posture(&target, forced, options.eps_deg);
    if actual != class {
        return Err(ControlError::ClassMismatch {
            requested: class,
            actual,
            mcp_deg: targets.mcp_deg,
            pip_deg: targets.pip_deg,
            force_n: targets.force_n,
        });
    }
    let set = activation_for(class);
    let mut tensioned = Vec::new();
    let mut released = Vec::new();
    for (cable, level) in [(CableId::IndexBL, set.bl), (CableId::IndexOL, set.ol), (CableId::IndexPL, set.pl)] {
        let engaged = match level {
            ActivationLevel::Active => true,
            ActivationLevel::Inactive => false,
            ActivationLevel::Conditional => cable != CableId::IndexBL || targets.force_n > options.bl_engage_force_n,
        };
        if engaged { tensioned.push(cable) } else { released.push(cable) }
    }
    let request = HoldRequest {
        target,
        tensioned,
        released,
        force: forced.then(|| ExternalForce::palmar(Finger::Index, targets.force_n)),
        stops: BTreeMap::new(),
    };
    hold_pose(model, &request, map, options)
}

/// Writes feedforward commands into a full command vector.
pub fn apply_commands(commands: &mut CableValues, ff: &Feedforward) {
    for (&c, &v) in &ff.commands {
        commands[c] = v;
    }
}
