use std::collections::BTreeMap;

use super::*;
use crate::linkage::{Branch, FourBarDims};

const MOMENT_ARM_MM: f64 = 8.0;
const SPOOL_RADIUS_MM: f64 = 10.0;
const SERVO_TORQUE_KGCM: f64 = 40.0;

const INDEX_LENGTHS: [f64; 4] = [70.0, 45.0, 25.0, 22.0];
const THUMB_LENGTHS: [f64; 3] = [50.0, 32.0, 25.0];

/// Index-finger IP linkage: the result of [`crate::linkage::synthesize`]
/// against the identity coupling on [0°, 90°] from [`LINKAGE_SEED`], with
/// finger-scale bounds, rounded to 0.1 µm / 0.0001°. Reconstructed, not
/// measured.
pub const INDEX_LINKAGE: FourBarDims = FourBarDims {
    ground_mm: 19.6808,
    input_mm: 11.2882,
    coupler_mm: 19.6808,
    output_mm: 11.2882,
    input_mount_deg: 54.4637,
    output_mount_deg: 54.4637,
    branch: Branch::Open,
};

/// Starting point used to fit [`INDEX_LINKAGE`].
pub const LINKAGE_SEED: FourBarDims = FourBarDims {
    ground_mm: 25.0,
    input_mm: 10.0,
    coupler_mm: 24.0,
    output_mm: 12.0,
    input_mount_deg: 60.0,
    output_mount_deg: 0.0,
    branch: Branch::Open,
};

fn finger_scale(f: Finger) -> f64 {
    match f {
        Finger::Middle => 1.08,
        Finger::Little => 0.82,
        _ => 1.0,
    }
}

fn joint(id: JointId, min_deg: f64, max_deg: f64, rest_deg: f64, drive: Drive) -> JointSpec {
    JointSpec { id, min_deg, max_deg, rest_deg, drive }
}

fn seg(joint: JointId, sign: i8) -> RouteSegment {
    RouteSegment { joint, moment_arm_mm: MOMENT_ARM_MM, sign }
}

fn route(cable: CableId, segments: Vec<RouteSegment>) -> CableRoute {
    CableRoute { cable, segments, slack_allowed: true }
}

fn spring(joint: JointId, kind: SpringKind, k: f64, rest_deg: f64, preload_nmm: f64) -> SpringSpec {
    SpringSpec { joint, stiffness_nmm_per_deg: k, rest_deg, kind, preload_nmm }
}

fn spool(id: u8, cable: CableId) -> ActuatorSpec {
    ActuatorSpec {
        id,
        kind: ActuatorKind::CableSpool,
        target: ActuatorTarget::Cable(cable),
        max_torque_nmm: SERVO_TORQUE_KGCM * KGCM_TO_NMM,
        spool_radius_mm: SPOOL_RADIUS_MM,
    }
}

/// The built-in CATCH-919 hand.
pub fn default_catch919() -> HandModel {
    use Drive::*;
    use JointId as J;

    let joints = vec![
        joint(J::THUMB_CMC_FLEX, -30.0, 45.0, -30.0, Cable),
        joint(J::THUMB_CMC_ABD, -45.0, 45.0, 0.0, Cable),
        joint(J::THUMB_MCP_FLEX, 0.0, 90.0, 0.0, Cable),
        joint(J::THUMB_MCP_PROSUP, 0.0, 45.0, 0.0, Cable),
        joint(J::THUMB_IP_FLEX, 0.0, 90.0, 0.0, Cable),
        joint(J::INDEX_MCP_FLEX, -30.0, 90.0, 0.0, Cable),
        joint(J::INDEX_MCP_ABD, -30.0, 30.0, 0.0, DirectServo),
        joint(J::INDEX_PIP_FLEX, 0.0, 90.0, 0.0, Cable),
        joint(J::INDEX_DIP_FLEX, -30.0, 90.0, 0.0, LinkageCoupled),
        joint(J::INDEX_DIP_CHUTE, 0.0, 30.0, 0.0, Passive),
        joint(J::MIDDLE_MCP_FLEX, 0.0, 90.0, 0.0, Cable),
        joint(J::MIDDLE_PIP_FLEX, 0.0, 90.0, 0.0, Cable),
        joint(J::MIDDLE_DIP_FLEX, 0.0, 90.0, 0.0, LinkageCoupled),
        joint(J::RING_MCP_FLEX, 0.0, 90.0, 0.0, Cable),
        joint(J::RING_PIP_FLEX, 0.0, 90.0, 0.0, Cable),
        joint(J::RING_DIP_FLEX, 0.0, 90.0, 0.0, LinkageCoupled),
        joint(J::LITTLE_MCP_FLEX, 0.0, 90.0, 0.0, Cable),
        joint(J::LITTLE_PIP_FLEX, 0.0, 90.0, 0.0, Cable),
        joint(J::LITTLE_DIP_FLEX, 0.0, 90.0, 0.0, LinkageCoupled),
        joint(J::PALM_ARCH, 0.0, 20.0, 0.0, Passive),
    ];

    let mut phalanges = BTreeMap::new();
    let names4 = [PhalanxName::Metacarpal, PhalanxName::Proximal, PhalanxName::Middle, PhalanxName::Distal];
    for f in [Finger::Index, Finger::Middle, Finger::Ring, Finger::Little] {
        let s = finger_scale(f);
        let list = names4
            .iter()
            .zip(INDEX_LENGTHS)
            .map(|(&name, l)| PhalanxSpec { name, length_mm: l * s })
            .collect();
        phalanges.insert(f, list);
    }
    let names3 = [PhalanxName::Metacarpal, PhalanxName::Proximal, PhalanxName::Distal];
    phalanges.insert(
        Finger::Thumb,
        names3
            .iter()
            .zip(THUMB_LENGTHS)
            .map(|(&name, length_mm)| PhalanxSpec { name, length_mm })
            .collect(),
    );

    let cables = vec![
        route(CableId::IndexBL, vec![seg(J::INDEX_MCP_FLEX, 1), seg(J::INDEX_PIP_FLEX, 1)]),
        route(
            CableId::IndexOL,
            vec![seg(J::INDEX_MCP_FLEX, 1), seg(J::INDEX_PIP_FLEX, 1), seg(J::INDEX_DIP_FLEX, 1)],
        ),
        route(CableId::IndexPL, vec![seg(J::INDEX_MCP_FLEX, -1)]),
        route(
            CableId::MiddleFlexor,
            vec![seg(J::MIDDLE_MCP_FLEX, 1), seg(J::MIDDLE_PIP_FLEX, 1), seg(J::MIDDLE_DIP_FLEX, 1)],
        ),
        route(
            CableId::RingLittleFlexor,
            vec![
                seg(J::RING_MCP_FLEX, 1),
                seg(J::RING_PIP_FLEX, 1),
                seg(J::RING_DIP_FLEX, 1),
                seg(J::LITTLE_MCP_FLEX, 1),
                seg(J::LITTLE_PIP_FLEX, 1),
                seg(J::LITTLE_DIP_FLEX, 1),
            ],
        ),
        route(CableId::ThumbYellow, vec![seg(J::THUMB_CMC_ABD, -1)]),
        route(CableId::ThumbLightBlue, vec![seg(J::THUMB_CMC_ABD, 1), seg(J::THUMB_CMC_FLEX, 1)]),
        route(
            CableId::ThumbPink,
            vec![seg(J::THUMB_MCP_FLEX, 1), seg(J::THUMB_MCP_PROSUP, 1), seg(J::THUMB_IP_FLEX, 1)],
        ),
    ];

    use SpringKind::*;
    let springs = vec![
        // Thumb: preloads stage the shared cables (adduct before flex;
        // MCP flexion, then pronation, then IP flexion).
        spring(J::THUMB_CMC_FLEX, LinearReturn, 1.5, -30.0, 80.0),
        spring(J::THUMB_CMC_ABD, LinearReturn, 1.5, 0.0, 0.0),
        spring(J::THUMB_MCP_FLEX, LinearReturn, 1.5, 0.0, 0.0),
        spring(J::THUMB_MCP_PROSUP, Torsional, 3.0, 0.0, 150.0),
        spring(J::THUMB_IP_FLEX, LinearReturn, 1.5, 0.0, 300.0),
        // Spring 1 holds the index IP joints extended; Spring 2 keeps the
        // distal chute closed.
        spring(J::INDEX_PIP_FLEX, Torsional, 2.0, 0.0, 0.0),
        spring(J::INDEX_DIP_CHUTE, LinearReturn, 1.0, 0.0, 50.0),
        spring(J::MIDDLE_MCP_FLEX, LinearReturn, 1.5, 0.0, 0.0),
        spring(J::MIDDLE_PIP_FLEX, LinearReturn, 1.5, 0.0, 0.0),
        spring(J::RING_MCP_FLEX, LinearReturn, 1.5, 0.0, 0.0),
        spring(J::RING_PIP_FLEX, LinearReturn, 1.5, 0.0, 0.0),
        spring(J::LITTLE_MCP_FLEX, LinearReturn, 1.5, 0.0, 0.0),
        spring(J::LITTLE_PIP_FLEX, LinearReturn, 1.5, 0.0, 0.0),
    ];

    let mut direct = spool(5, CableId::IndexBL);
    direct.kind = ActuatorKind::DirectJoint;
    direct.target = ActuatorTarget::Joint(J::INDEX_MCP_ABD);
    direct.spool_radius_mm = 0.0;
    let actuators = vec![
        spool(0, CableId::RingLittleFlexor),
        spool(1, CableId::MiddleFlexor),
        spool(2, CableId::IndexBL),
        spool(3, CableId::IndexOL),
        spool(4, CableId::IndexPL),
        direct,
        spool(6, CableId::ThumbYellow),
        spool(7, CableId::ThumbLightBlue),
        spool(8, CableId::ThumbPink),
    ];

    let linkages = [Finger::Index, Finger::Middle, Finger::Ring, Finger::Little]
        .into_iter()
        .map(|f| (f, INDEX_LINKAGE.scaled(finger_scale(f))))
        .collect();

    HandModel {
        joints,
        phalanges,
        cables,
        springs,
        actuators,
        linkages,
        palm_coupling_gain: 0.2,
        reference_pose_offset_deg: 75.0,
    }
}
