//! Parametric hand description: joints, phalanges, cable routes, springs,
//! actuators and linkages, plus the JSON hand-description file format.
//!
//! Angles are degrees everywhere in this module and in files. Flexion,
//! adduction and pronation are positive; hyperextension is a negative
//! flexion angle.

mod catch919;
mod ids;
mod vectors;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catch919::{default_catch919, INDEX_LINKAGE, LINKAGE_SEED};
pub use ids::{Axis, CableId, Finger, Joint, JointId, CABLE_COUNT, DOF_COUNT, JOINT_COUNT};
pub use vectors::{CableValues, JointVector};

use crate::linkage::{solve_coupler, FourBarDims};

/// One kg·cm expressed in N·mm.
pub const KGCM_TO_NMM: f64 = 98.0665;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Drive {
    Cable,
    DirectServo,
    Passive,
    LinkageCoupled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    pub id: JointId,
    pub min_deg: f64,
    pub max_deg: f64,
    pub rest_deg: f64,
    pub drive: Drive,
}

impl JointSpec {
    pub fn clamp(&self, deg: f64) -> f64 {
        deg.clamp(self.min_deg, self.max_deg)
    }

    pub fn contains(&self, deg: f64) -> bool {
        deg >= self.min_deg && deg <= self.max_deg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhalanxName {
    Metacarpal,
    Proximal,
    Middle,
    Distal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhalanxSpec {
    pub name: PhalanxName,
    pub length_mm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSegment {
    pub joint: JointId,
    pub moment_arm_mm: f64,
    /// +1: tension flexes the joint; −1: tension extends it.
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableRoute {
    pub cable: CableId,
    pub segments: Vec<RouteSegment>,
    pub slack_allowed: bool,
}

impl CableRoute {
    pub fn crosses(&self, joint: JointId) -> bool {
        self.segments.iter().any(|s| s.joint == joint)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpringKind {
    Torsional,
    LinearReturn,
}

/// Return spring. The restoring torque is `preload + stiffness·(θ − rest)`;
/// a nonzero preload is only allowed when the rest angle sits on the
/// joint's lower limit, so the spring presses the joint into its stop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpringSpec {
    pub joint: JointId,
    pub stiffness_nmm_per_deg: f64,
    pub rest_deg: f64,
    pub kind: SpringKind,
    pub preload_nmm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActuatorKind {
    CableSpool,
    DirectJoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActuatorTarget {
    Cable(CableId),
    Joint(JointId),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorSpec {
    pub id: u8,
    pub kind: ActuatorKind,
    pub target: ActuatorTarget,
    pub max_torque_nmm: f64,
    /// Zero for direct-drive actuators.
    pub spool_radius_mm: f64,
}

impl ActuatorSpec {
    pub fn max_torque_kgcm(&self) -> f64 {
        self.max_torque_nmm / KGCM_TO_NMM
    }
}

/// The complete parametric hand. Treated as immutable once validated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandModel {
    pub joints: Vec<JointSpec>,
    pub phalanges: BTreeMap<Finger, Vec<PhalanxSpec>>,
    pub cables: Vec<CableRoute>,
    pub springs: Vec<SpringSpec>,
    pub actuators: Vec<ActuatorSpec>,
    pub linkages: BTreeMap<Finger, FourBarDims>,
    pub palm_coupling_gain: f64,
    /// Angle between the thumb and middle-finger proximal phalanges in the
    /// palm plane at the initial position.
    pub reference_pose_offset_deg: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated at `{path}`: {message}")]
    Invariant { path: String, message: String },
    #[error("dangling reference at `{path}`: {message}")]
    Reference { path: String, message: String },
}

fn invariant(path: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Invariant { path: path.into(), message: message.into() }
}

/// Joint ranges measured on the physical hand: (joint, min, max).
pub const MOVEMENT_RANGES: [(JointId, f64, f64); 9] = [
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

/// How far a linkage curve may run past the DIP range before the model is
/// rejected; coupled DIP angles are clamped to the range.
pub const DIP_OVERSHOOT_TOL_DEG: f64 = 5.0;

/// Joints whose range must equal the measured range exactly.
const EXACT_RANGE_JOINTS: [JointId; 3] =
    [JointId::INDEX_MCP_ABD, JointId::THUMB_CMC_ABD, JointId::THUMB_MCP_PROSUP];

/// A joint angle outside its allowed range.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{joint} = {value_deg}° is outside its range [{min_deg}°, {max_deg}°]")]
pub struct LimitViolation {
    pub joint: JointId,
    pub value_deg: f64,
    pub min_deg: f64,
    pub max_deg: f64,
}

fn cable_finger(c: CableId) -> &'static str {
    match c {
        CableId::IndexBL | CableId::IndexOL | CableId::IndexPL => "index",
        CableId::MiddleFlexor => "middle",
        CableId::RingLittleFlexor => "ring+little",
        CableId::ThumbYellow | CableId::ThumbLightBlue | CableId::ThumbPink => "thumb",
    }
}

fn expected_phalanges(f: Finger) -> &'static [PhalanxName] {
    use PhalanxName::*;
    match f {
        Finger::Thumb => &[Metacarpal, Proximal, Distal],
        Finger::Palm => &[],
        _ => &[Metacarpal, Proximal, Middle, Distal],
    }
}

impl HandModel {
    /// Parses and validates a hand-description document.
    pub fn from_json(text: &str) -> Result<HandModel, ModelError> {
        let mut model: HandModel = serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
        model.joints.sort_by_key(|j| j.id.index());
        model.validate()?;
        Ok(model)
    }

    /// Pretty JSON with a trailing newline; the inverse of [`HandModel::from_json`].
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn joint(&self, id: JointId) -> &JointSpec {
        // Validated models store joints in canonical order.
        let spec = &self.joints[id.index()];
        debug_assert_eq!(spec.id, id);
        spec
    }

    pub fn route(&self, cable: CableId) -> Option<&CableRoute> {
        self.cables.iter().find(|r| r.cable == cable)
    }

    pub fn spring(&self, joint: JointId) -> Option<&SpringSpec> {
        self.springs.iter().find(|s| s.joint == joint)
    }

    pub fn phalanx_lengths(&self, finger: Finger) -> Vec<f64> {
        self.phalanges
            .get(&finger)
            .map(|v| v.iter().map(|p| p.length_mm).collect())
            .unwrap_or_default()
    }

    pub fn dof_count(&self) -> usize {
        self.joints.iter().filter(|j| j.id.is_dof()).count()
    }

    /// Moment arm of `cable` at `joint`, or 0 if the route does not cross it.
    pub fn moment_arm(&self, cable: CableId, joint: JointId) -> f64 {
        self.route(cable)
            .and_then(|r| r.segments.iter().find(|s| s.joint == joint))
            .map(|s| s.moment_arm_mm)
            .unwrap_or(0.0)
    }

    /// DIP angle the linkage of `finger` produces at `pip_deg`.
    pub fn coupled_dip(&self, finger: Finger, pip_deg: f64) -> Result<f64, crate::linkage::LinkageError> {
        match self.linkages.get(&finger) {
            Some(dims) => solve_coupler(dims, pip_deg),
            None => Ok(pip_deg),
        }
    }

    /// Palm arch driven by ring and little MCP flexion.
    pub fn palm_arch(&self, q: &JointVector) -> f64 {
        let mean = 0.5 * (q[JointId::RING_MCP_FLEX] + q[JointId::LITTLE_MCP_FLEX]);
        self.joint(JointId::PALM_ARCH).clamp(self.palm_coupling_gain * mean)
    }

    /// Recomputes every dependent entry of `q`: linkage-coupled DIP angles
    /// and the palm arch. Falls back to the previous DIP value when a
    /// linkage fails to assemble.
    pub fn complete(&self, q: &JointVector) -> JointVector {
        let mut out = *q;
        for finger in Finger::DIGITS {
            if let Some((pip, dip)) = JointId::linkage_pair(finger) {
                if let Ok(v) = self.coupled_dip(finger, out[pip]) {
                    out[dip] = self.joint(dip).clamp(v);
                }
            }
        }
        out[JointId::PALM_ARCH] = self.palm_arch(&out);
        out
    }

    pub fn rest_pose(&self) -> JointVector {
        let mut q = JointVector::zeros();
        for spec in &self.joints {
            q[spec.id] = spec.rest_deg;
        }
        self.complete(&q)
    }

    /// First joint found outside its range, if any.
    pub fn check_limits(&self, q: &JointVector, tol: f64) -> Result<(), LimitViolation> {
        for spec in &self.joints {
            let v = q[spec.id];
            if !(v >= spec.min_deg - tol && v <= spec.max_deg + tol) {
                return Err(LimitViolation {
                    joint: spec.id,
                    value_deg: v,
                    min_deg: spec.min_deg,
                    max_deg: spec.max_deg,
                });
            }
        }
        Ok(())
    }

    /// Checks every structural invariant of the description.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.validate_joints()?;
        self.validate_phalanges()?;
        self.validate_cables()?;
        self.validate_springs()?;
        self.validate_actuators()?;
        self.validate_linkages()?;
        if !(self.palm_coupling_gain.is_finite() && self.palm_coupling_gain >= 0.0) {
            return Err(invariant("palm_coupling_gain", "must be a finite non-negative number"));
        }
        if !(self.reference_pose_offset_deg > 0.0 && self.reference_pose_offset_deg < 180.0) {
            return Err(invariant("reference_pose_offset_deg", "must lie in (0°, 180°)"));
        }
        Ok(())
    }

    fn validate_joints(&self) -> Result<(), ModelError> {
        if self.joints.len() != JOINT_COUNT {
            return Err(invariant(
                "joints",
                format!("expected {JOINT_COUNT} joints, found {}", self.joints.len()),
            ));
        }
        for (i, (spec, id)) in self.joints.iter().zip(JointId::ALL).enumerate() {
            let path = format!("joints[{i}]");
            if spec.id != id {
                return Err(invariant(path, format!("missing or duplicate joint, expected `{id}`")));
            }
            if !(spec.min_deg < spec.max_deg) {
                return Err(invariant(path, format!("{id}: min {} must be below max {}", spec.min_deg, spec.max_deg)));
            }
            if !spec.contains(spec.rest_deg) {
                return Err(invariant(path, format!("{id}: rest {} outside [{}, {}]", spec.rest_deg, spec.min_deg, spec.max_deg)));
            }
            let expected_drive = match id {
                JointId::INDEX_MCP_ABD => Some(Drive::DirectServo),
                JointId::PALM_ARCH | JointId::INDEX_DIP_CHUTE => Some(Drive::Passive),
                _ if JointId::linkage_pair(id.finger()).is_some_and(|(_, dip)| dip == id) => {
                    Some(Drive::LinkageCoupled)
                }
                _ => None,
            };
            if let Some(d) = expected_drive {
                if spec.drive != d {
                    return Err(invariant(path, format!("{id} must be driven as {d:?}")));
                }
            }
        }
        for (id, lo, hi) in MOVEMENT_RANGES {
            let spec = self.joint(id);
            let path = format!("joints[{}]", id.index());
            if spec.min_deg < lo {
                return Err(invariant(path, format!("{id} min {}° exceeds the movement-range limit {lo}°", spec.min_deg)));
            }
            if spec.max_deg > hi {
                return Err(invariant(path, format!("{id} max {}° exceeds the movement-range limit {hi}°", spec.max_deg)));
            }
            if EXACT_RANGE_JOINTS.contains(&id) && (spec.min_deg != lo || spec.max_deg != hi) {
                return Err(invariant(path, format!("{id} range must be exactly [{lo}°, {hi}°]")));
            }
        }
        Ok(())
    }

    fn validate_phalanges(&self) -> Result<(), ModelError> {
        for finger in Finger::DIGITS {
            let path = format!("phalanges.{finger}");
            let Some(list) = self.phalanges.get(&finger) else {
                return Err(invariant(path, "missing phalanx list"));
            };
            let names: Vec<_> = list.iter().map(|p| p.name).collect();
            if names != expected_phalanges(finger) {
                return Err(invariant(path, format!("expected phalanges {:?}", expected_phalanges(finger))));
            }
            if let Some(p) = list.iter().find(|p| !(p.length_mm > 0.0)) {
                return Err(invariant(path, format!("{:?} length must be positive", p.name)));
            }
        }
        if self.phalanges.contains_key(&Finger::Palm) {
            return Err(invariant("phalanges.Palm", "the palm has no phalanges"));
        }
        Ok(())
    }

    fn validate_cables(&self) -> Result<(), ModelError> {
        for cable in CableId::ALL {
            let n = self.cables.iter().filter(|r| r.cable == cable).count();
            if n != 1 {
                return Err(invariant("cables", format!("cable {cable} must appear exactly once, found {n}")));
            }
        }
        for (i, route) in self.cables.iter().enumerate() {
            for (k, seg) in route.segments.iter().enumerate() {
                let path = format!("cables[{i}].segments[{k}]");
                if !(seg.moment_arm_mm > 0.0) {
                    return Err(invariant(path, "moment arm must be positive"));
                }
                if seg.sign != 1 && seg.sign != -1 {
                    return Err(invariant(path, "sign must be +1 or -1"));
                }
                if !seg.joint.is_dof() || seg.joint == JointId::PALM_ARCH {
                    return Err(ModelError::Reference {
                        path,
                        message: format!("cable cannot act on {}", seg.joint),
                    });
                }
            }
        }
        let pl = self.route(CableId::IndexPL).expect("checked above");
        let mcp = pl.segments.iter().find(|s| s.joint == JointId::INDEX_MCP_FLEX);
        if mcp.map(|s| s.sign) != Some(-1) {
            return Err(invariant("cables.IndexPL", "must extend the index MCP joint"));
        }
        if pl.crosses(JointId::INDEX_PIP_FLEX) || pl.crosses(JointId::INDEX_DIP_FLEX) {
            return Err(invariant("cables.IndexPL", "must not act on the index IP joints"));
        }
        Ok(())
    }

    fn validate_springs(&self) -> Result<(), ModelError> {
        for (i, s) in self.springs.iter().enumerate() {
            let path = format!("springs[{i}]");
            if self.springs.iter().filter(|o| o.joint == s.joint).count() > 1 {
                return Err(invariant(path, format!("more than one spring on {}", s.joint)));
            }
            if !(s.stiffness_nmm_per_deg > 0.0) {
                return Err(invariant(path, "stiffness must be positive"));
            }
            if !(s.preload_nmm >= 0.0) {
                return Err(invariant(path, "preload must be non-negative"));
            }
            let spec = self.joint(s.joint);
            if !spec.contains(s.rest_deg) {
                return Err(invariant(path, format!("rest angle outside the range of {}", s.joint)));
            }
            if s.preload_nmm > 0.0 && s.rest_deg != spec.min_deg {
                return Err(invariant(path, "a preloaded spring must rest on the joint's lower limit"));
            }
            if matches!(spec.drive, Drive::LinkageCoupled) || s.joint == JointId::PALM_ARCH {
                return Err(invariant(path, format!("{} is a dependent joint and cannot carry a spring", s.joint)));
            }
        }
        Ok(())
    }

    fn validate_actuators(&self) -> Result<(), ModelError> {
        if self.actuators.len() != 9 {
            return Err(invariant("actuators", format!("expected 9 actuators, found {}", self.actuators.len())));
        }
        let mut ids: Vec<u8> = self.actuators.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids != (0..9).collect::<Vec<u8>>() {
            return Err(invariant("actuators", "actuator ids must be exactly 0..8"));
        }
        let mut per_group: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, a) in self.actuators.iter().enumerate() {
            let path = format!("actuators[{i}]");
            if !(a.max_torque_nmm > 0.0) {
                return Err(invariant(path, "max torque must be positive"));
            }
            let group = match (a.kind, a.target) {
                (ActuatorKind::CableSpool, ActuatorTarget::Cable(c)) => {
                    if !(a.spool_radius_mm > 0.0) {
                        return Err(invariant(path, "spool radius must be positive"));
                    }
                    cable_finger(c)
                }
                (ActuatorKind::DirectJoint, ActuatorTarget::Joint(j)) => {
                    if self.joint(j).drive != Drive::DirectServo {
                        return Err(ModelError::Reference {
                            path,
                            message: format!("{j} is not a direct-servo joint"),
                        });
                    }
                    match j.finger() {
                        Finger::Index => "index",
                        Finger::Thumb => "thumb",
                        Finger::Middle => "middle",
                        Finger::Ring | Finger::Little => "ring+little",
                        Finger::Palm => "palm",
                    }
                }
                _ => return Err(invariant(path, "actuator kind does not match its target")),
            };
            *per_group.entry(group).or_default() += 1;
        }
        for cable in CableId::ALL {
            let n = self
                .actuators
                .iter()
                .filter(|a| a.target == ActuatorTarget::Cable(cable))
                .count();
            if n != 1 {
                return Err(invariant("actuators", format!("cable {cable} must be driven by exactly one actuator")));
            }
        }
        let expected = [("index", 4), ("middle", 1), ("ring+little", 1), ("thumb", 3)];
        for (group, n) in expected {
            let got = per_group.get(group).copied().unwrap_or(0);
            if got != n {
                return Err(invariant("actuators", format!("{group} needs {n} actuators, found {got}")));
            }
        }
        Ok(())
    }

    fn validate_linkages(&self) -> Result<(), ModelError> {
        for finger in Finger::DIGITS {
            let Some((pip, dip)) = JointId::linkage_pair(finger) else {
                continue;
            };
            let path = format!("linkages.{finger}");
            let Some(dims) = self.linkages.get(&finger) else {
                return Err(invariant(path, "missing linkage"));
            };
            if dims.lengths().iter().any(|&l| !(l > 0.0)) {
                return Err(invariant(path, "link lengths must be positive"));
            }
            let zero = solve_coupler(dims, 0.0).map_err(|e| invariant(path.clone(), e.to_string()))?;
            if zero.abs() > 1e-6 {
                return Err(invariant(path, format!("PIP 0° must map to DIP 0°, got {zero}°")));
            }
            let pip_spec = self.joint(pip);
            let dip_spec = self.joint(dip);
            let n = 91;
            for k in 0..n {
                let p = pip_spec.min_deg + (pip_spec.max_deg - pip_spec.min_deg) * k as f64 / (n - 1) as f64;
                let d = solve_coupler(dims, p).map_err(|e| invariant(path.clone(), e.to_string()))?;
                if d < dip_spec.min_deg - DIP_OVERSHOOT_TOL_DEG || d > dip_spec.max_deg + DIP_OVERSHOOT_TOL_DEG {
                    return Err(invariant(path, format!("DIP {d}° at PIP {p}° leaves the DIP range")));
                }
            }
        }
        for finger in self.linkages.keys() {
            if JointId::linkage_pair(*finger).is_none() {
                return Err(ModelError::Reference {
                    path: format!("linkages.{finger}"),
                    message: "finger has no PIP/DIP pair".into(),
                });
            }
        }
        Ok(())
    }
}

/// Clamps every independent joint into its range, then recomputes coupled
/// DIP angles from PIP and the palm arch from ring/little MCP.
pub fn clamp_pose(model: &HandModel, q: &JointVector) -> JointVector {
    let mut out = *q;
    for spec in &model.joints {
        out[spec.id] = spec.clamp(out[spec.id]);
    }
    model.complete(&out)
}

/// Loads and validates a hand description from JSON text.
pub fn load_model(document: &str) -> Result<HandModel, ModelError> {
    HandModel::from_json(document)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical_json() -> String {
        default_catch919().to_json()
    }

    #[test]
    fn canonical_counts() {
        let m = default_catch919();
        assert_eq!(m.dof_count(), 19);
        assert_eq!(m.cables.len(), 8);
        assert_eq!(m.actuators.len(), 9);
        assert!(m.actuators.iter().all(|a| (a.max_torque_kgcm() - 40.0).abs() < 1e-9));
    }

    #[test]
    fn load_accepts_canonical_file() {
        let m = load_model(&canonical_json()).unwrap();
        assert_eq!(m, default_catch919());
    }

    #[test]
    fn dip_max_above_measured_range_is_rejected() {
        let mut m = default_catch919();
        m.joints[JointId::INDEX_DIP_FLEX.index()].max_deg = 91.0;
        let err = load_model(&m.to_json()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Index.DIP.FlexExt"), "{msg}");
        assert!(msg.contains("90"), "{msg}");
    }

    #[test]
    fn dangling_joint_reference_is_rejected() {
        let text = canonical_json().replacen("\"joint\": \"Index.PIP.FlexExt\"", "\"joint\": \"Index.PIP.AbdAdd\"", 1);
        let err = load_model(&text).unwrap_err();
        assert!(matches!(err, ModelError::Schema(ref m) if m.contains("Index.PIP.AbdAdd")), "{err}");

        let text = canonical_json().replacen("\"joint\": \"Index.PIP.FlexExt\"", "\"joint\": \"Palm.Arch.FlexExt\"", 1);
        assert!(matches!(load_model(&text), Err(ModelError::Reference { .. })));
    }

    #[test]
    fn unknown_keys_and_wrong_units_are_schema_errors() {
        let text = canonical_json().replacen("\"palm_coupling_gain\"", "\"palm_gain\"", 1);
        assert!(matches!(load_model(&text), Err(ModelError::Schema(_))));
        let text = canonical_json().replacen("\"min_deg\"", "\"min_rad\"", 1);
        assert!(matches!(load_model(&text), Err(ModelError::Schema(_))));
    }

    #[test]
    fn actuator_allocation_is_enforced() {
        let mut m = default_catch919();
        m.actuators.pop();
        assert!(matches!(m.validate(), Err(ModelError::Invariant { .. })));
    }

    #[test]
    fn clamp_examples() {
        let m = default_catch919();
        let rest = m.rest_pose();
        assert_eq!(clamp_pose(&m, &rest), rest);

        let mut q = rest;
        q[JointId::INDEX_MCP_FLEX] = 120.0;
        assert_eq!(clamp_pose(&m, &q)[JointId::INDEX_MCP_FLEX], 90.0);

        let mut q = rest;
        q[JointId::INDEX_PIP_FLEX] = 45.0;
        q[JointId::INDEX_DIP_FLEX] = -12.0;
        let expected = solve_coupler(&m.linkages[&Finger::Index], 45.0).unwrap();
        assert_eq!(clamp_pose(&m, &q)[JointId::INDEX_DIP_FLEX], expected);
    }

    #[test]
    fn palm_arch_follows_ring_and_little() {
        let m = default_catch919();
        let mut q = m.rest_pose();
        q[JointId::RING_MCP_FLEX] = 60.0;
        q[JointId::LITTLE_MCP_FLEX] = 40.0;
        assert!((m.complete(&q)[JointId::PALM_ARCH] - 10.0).abs() < 1e-12);
    }
}
