use catch_core::hand_model::{
    clamp_pose, default_catch919, load_model, Drive, Finger, JointId, ModelError, MOVEMENT_RANGES,
};
use catch_core::linkage::solve_coupler;
use proptest::prelude::*;

const SHIPPED: &str = include_str!("../../../data/catch919.json");

#[test]
fn shipped_description_is_the_serialized_default() {
    assert_eq!(default_catch919().to_json(), SHIPPED);
    assert_eq!(load_model(SHIPPED).unwrap(), default_catch919());
}

#[test]
fn measured_ranges_are_reproduced_exactly() {
    let m = default_catch919();
    for (id, lo, hi) in MOVEMENT_RANGES {
        let j = m.joint(id);
        assert_eq!((j.min_deg, j.max_deg), (lo, hi), "{id}");
    }
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
    assert_eq!(MOVEMENT_RANGES, expected);
}

#[test]
fn thumb_rest_pose() {
    let m = default_catch919();
    let rest = m.rest_pose();
    assert_eq!(rest[JointId::THUMB_CMC_FLEX], -30.0);
    assert_eq!(rest[JointId::THUMB_MCP_FLEX], 0.0);
    assert_eq!(rest[JointId::THUMB_IP_FLEX], 0.0);
    assert!(m.check_limits(&rest, 0.0).is_ok());
}

#[test]
fn out_of_range_targets_are_rejected() {
    let m = default_catch919();
    for (id, lo, hi) in MOVEMENT_RANGES {
        for bad in [lo - 0.5, hi + 0.5] {
            let mut q = m.rest_pose();
            q[id] = bad;
            let err = m.check_limits(&q, 0.0).unwrap_err();
            assert_eq!(err.joint, id);
        }
    }
}

#[test]
fn counts_by_enumeration() {
    let m = default_catch919();
    let dof = JointId::ALL.iter().filter(|j| j.is_dof()).count();
    assert_eq!(dof, 19);
    assert_eq!(m.dof_count(), 19);
    assert_eq!(m.cables.len() + m.joints.iter().filter(|j| j.drive == Drive::DirectServo).count(), 9);
    assert_eq!(m.actuators.len(), 9);
}

#[test]
fn raised_dip_bound_is_an_invariant_error() {
    let mut m = default_catch919();
    m.joints[JointId::INDEX_DIP_FLEX.index()].max_deg = 91.0;
    assert!(matches!(load_model(&m.to_json()), Err(ModelError::Invariant { .. })));
}

#[test]
fn route_to_missing_joint_is_a_reference_error() {
    let text = SHIPPED.replacen("\"joint\": \"Index.PIP.FlexExt\"", "\"joint\": \"Palm.Arch.FlexExt\"", 1);
    assert!(matches!(load_model(&text), Err(ModelError::Reference { .. })));
}

#[test]
fn clamp_recomputes_coupled_dip() {
    let m = default_catch919();
    for f in [Finger::Index, Finger::Middle, Finger::Ring, Finger::Little] {
        let (pip, dip) = JointId::linkage_pair(f).unwrap();
        let mut q = m.rest_pose();
        q[pip] = 45.0;
        q[dip] = 80.0;
        let c = clamp_pose(&m, &q);
        assert_eq!(c[dip], solve_coupler(&m.linkages[&f], 45.0).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn serialize_load_round_trip(
        k in 0.1f64..10.0,
        gain in 0.0f64..0.5,
        arm in 2.0f64..20.0,
        scale in 0.8f64..1.2,
        rest_frac in 0.0f64..1.0,
    ) {
        let mut m = default_catch919();
        m.springs[0].stiffness_nmm_per_deg = k;
        m.palm_coupling_gain = gain;
        m.cables[3].segments[0].moment_arm_mm = arm;
        for p in m.phalanges.values_mut().flatten() {
            p.length_mm *= scale;
        }
        let j = &mut m.joints[JointId::MIDDLE_MCP_FLEX.index()];
        j.rest_deg = j.min_deg + rest_frac * (j.max_deg - j.min_deg);
        let back = load_model(&m.to_json()).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_json(), m.to_json());
    }

    #[test]
    fn clamp_is_idempotent_and_in_range(raw in prop::array::uniform20(-200.0f64..200.0)) {
        let m = default_catch919();
        let q = catch_core::hand_model::JointVector(raw);
        let c = clamp_pose(&m, &q);
        prop_assert!(m.check_limits(&c, 1e-9).is_ok());
        prop_assert_eq!(clamp_pose(&m, &c), c);
    }
}
