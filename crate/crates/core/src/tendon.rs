//! Cable kinematics: excursion, the excursion Jacobian and the mapping
//! from cable tensions to joint torques. Purely geometric; cable
//! elasticity lives in [`crate::statics`].

use nalgebra::SMatrix;
use thiserror::Error;

use crate::hand_model::{CableId, CableRoute, CableValues, HandModel, JointId, JointVector, CABLE_COUNT, JOINT_COUNT};

const DEG: f64 = std::f64::consts::PI / 180.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TendonError {
    #[error("cable {cable} has negative tension {tension_n} N")]
    NegativeTension { cable: CableId, tension_n: f64 },
}

/// Length of cable that must be reeled in to reach `q` from the all-zero
/// pose, in mm: Σ sign·r·θ with θ in radians.
pub fn excursion(route: &CableRoute, q: &JointVector) -> f64 {
    route
        .segments
        .iter()
        .map(|s| f64::from(s.sign) * s.moment_arm_mm * q[s.joint] * DEG)
        .sum()
}

/// Excursion of every cable at `q`; cables without a route read 0.
pub fn excursions(model: &HandModel, q: &JointVector) -> CableValues {
    let mut out = CableValues::zeros();
    for route in &model.cables {
        out[route.cable] = excursion(route, q);
    }
    out
}

/// ∂(cable length)/∂(joint angle) in mm/deg; rows are cables in
/// [`CableId::ALL`] order, columns joints in [`JointId::ALL`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExcursionJacobian {
    pub matrix: SMatrix<f64, CABLE_COUNT, JOINT_COUNT>,
}

impl ExcursionJacobian {
    pub fn entry(&self, cable: CableId, joint: JointId) -> f64 {
        self.matrix[(cable.index(), joint.index())]
    }

    pub fn row(&self, cable: CableId) -> JointVector {
        let mut out = JointVector::zeros();
        for (k, v) in out.0.iter_mut().enumerate() {
            *v = self.matrix[(cable.index(), k)];
        }
        out
    }
}

/// Moment arms are constant, so the Jacobian does not depend on `q`; the
/// argument keeps the signature ready for angle-dependent arms.
pub fn jacobian(model: &HandModel, _q: &JointVector) -> ExcursionJacobian {
    let mut matrix = SMatrix::<f64, CABLE_COUNT, JOINT_COUNT>::zeros();
    for route in &model.cables {
        for s in &route.segments {
            matrix[(route.cable.index(), s.joint.index())] += f64::from(s.sign) * s.moment_arm_mm * DEG;
        }
    }
    ExcursionJacobian { matrix }
}

/// Joint torques (N·mm, flexion positive) produced by cable tensions (N):
/// τ_j = Σ_c sign·r·f_c.
pub fn torques_from_tensions(
    model: &HandModel,
    q: &JointVector,
    tensions: &CableValues,
) -> Result<JointVector, TendonError> {
    if let Some((cable, t)) = tensions.iter().find(|&(_, t)| !(t >= 0.0)) {
        return Err(TendonError::NegativeTension { cable, tension_n: t });
    }
    let j = jacobian(model, q);
    let mut tau = JointVector::zeros();
    for (cable, f) in tensions.iter() {
        for (k, t) in tau.0.iter_mut().enumerate() {
            // J is in mm/deg; divide out the degree conversion to get mm/rad.
            *t += j.matrix[(cable.index(), k)] / DEG * f;
        }
    }
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hand_model::default_catch919;

    #[test]
    fn single_segment_arc_length() {
        let m = default_catch919();
        let route = m.route(CableId::IndexPL).unwrap();
        let mut q = JointVector::zeros();
        assert_eq!(excursion(route, &q), 0.0);
        q[JointId::INDEX_MCP_FLEX] = -90.0;
        assert!((excursion(route, &q) - 8.0 * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn pl_row_extends_mcp_only() {
        let m = default_catch919();
        let j = jacobian(&m, &m.rest_pose());
        assert!(j.entry(CableId::IndexPL, JointId::INDEX_MCP_FLEX) < 0.0);
        assert_eq!(j.entry(CableId::IndexPL, JointId::INDEX_PIP_FLEX), 0.0);
        assert_eq!(j.entry(CableId::IndexPL, JointId::INDEX_DIP_FLEX), 0.0);
    }

    #[test]
    fn pl_tension_gives_extension_torque() {
        let m = default_catch919();
        let mut f = CableValues::zeros();
        f[CableId::IndexPL] = 10.0;
        let tau = torques_from_tensions(&m, &m.rest_pose(), &f).unwrap();
        for (id, t) in tau.iter() {
            let expected = if id == JointId::INDEX_MCP_FLEX { -80.0 } else { 0.0 };
            assert!((t - expected).abs() < 1e-9, "{id}: {t}");
        }
    }

    #[test]
    fn negative_tension_rejected() {
        let m = default_catch919();
        let mut f = CableValues::zeros();
        f[CableId::ThumbPink] = -1.0;
        assert!(matches!(
            torques_from_tensions(&m, &m.rest_pose(), &f),
            Err(TendonError::NegativeTension { cable: CableId::ThumbPink, .. })
        ));
    }
}
