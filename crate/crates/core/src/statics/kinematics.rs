//! Sagittal-plane forward kinematics.
//!
//! Each finger's metacarpal lies along +x from its base at the origin;
//! flexion rotates the following phalanges toward −y. The index distal
//! phalanx is rotated back (dorsally) by the chute angle.

use crate::hand_model::{Finger, HandModel, JointId, JointVector};

/// Planar point in mm.
pub type Point = (f64, f64);

/// Joints whose flexion turns each phalanx, proximal to distal, with the
/// sign of their contribution.
fn phalanx_drivers(finger: Finger) -> Vec<Vec<(JointId, f64)>> {
    let chain = JointId::flexion_chain(finger);
    match finger {
        Finger::Palm => Vec::new(),
        Finger::Thumb => {
            // The thumb metacarpal itself turns about the CMC joint.
            (0..3).map(|k| chain[..=k].iter().map(|&j| (j, 1.0)).collect()).collect()
        }
        _ => {
            let mut out: Vec<Vec<(JointId, f64)>> =
                (0..4).map(|k| chain[..k].iter().map(|&j| (j, 1.0)).collect()).collect();
            if finger == Finger::Index {
                out[3].push((JointId::INDEX_DIP_CHUTE, -1.0));
            }
            out
        }
    }
}

/// Cumulative flexion angle (deg) of each phalanx.
pub fn phalanx_angles(finger: Finger, q: &JointVector) -> Vec<f64> {
    phalanx_drivers(finger)
        .iter()
        .map(|drivers| drivers.iter().map(|&(j, s)| s * q[j]).sum())
        .collect()
}

/// Base, joint and tip points of a finger: one more point than phalanges.
pub fn finger_chain(model: &HandModel, finger: Finger, q: &JointVector) -> Vec<Point> {
    let lengths = model.phalanx_lengths(finger);
    let mut p = (0.0, 0.0);
    let mut out = vec![p];
    for (len, phi) in lengths.iter().zip(phalanx_angles(finger, q)) {
        let r = phi.to_radians();
        p = (p.0 + len * r.cos(), p.1 - len * r.sin());
        out.push(p);
    }
    out
}

/// Fingertip position; the origin for the palm.
pub fn fingertip_position(model: &HandModel, finger: Finger, q: &JointVector) -> Point {
    *finger_chain(model, finger, q).last().expect("chain has a base point")
}

/// Unit dorsal normal of the distal phalanx.
pub fn distal_dorsal_normal(finger: Finger, q: &JointVector) -> Point {
    let phi = phalanx_angles(finger, q).last().copied().unwrap_or(0.0).to_radians();
    (phi.sin(), phi.cos())
}

/// Derivative (mm/deg) of `n · tip` with respect to each joint angle.
pub(crate) fn tip_projection_gradient(model: &HandModel, finger: Finger, q: &JointVector, n: Point) -> JointVector {
    let lengths = model.phalanx_lengths(finger);
    let mut g = JointVector::zeros();
    for ((len, phi), drivers) in lengths.iter().zip(phalanx_angles(finger, q)).zip(phalanx_drivers(finger)) {
        let r = phi.to_radians();
        // d(tip)/d(phi) for this phalanx, phi in radians.
        let d = (-len * r.sin(), -len * r.cos());
        let dn = (n.0 * d.0 + n.1 * d.1).to_radians();
        for (j, s) in drivers {
            g[j] += s * dn;
        }
    }
    g
}
