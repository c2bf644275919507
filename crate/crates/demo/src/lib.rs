//! Browser demo: three operations on the built-in hand model, returned as
//! JSON strings for a plain-JavaScript page.

use catch_core::control::classify_posture;
use catch_core::hand_model::{default_catch919, CableId, Finger, JointId};
use catch_core::linkage::coupling_curve;
use catch_core::statics::{chute_force_threshold, finger_chain, solve_equilibrium, EquilibriumProblem, ExternalForce};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn to_js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

/// Index PIP→DIP coupling of the canonical linkage, `n` samples over 0–90°.
#[wasm_bindgen]
pub fn coupling(n: usize) -> Result<String, JsError> {
    let m = default_catch919();
    let curve = coupling_curve(&m.linkages[&Finger::Index], 0.0, 90.0, n.max(2)).map_err(to_js)?;
    Ok(json!({ "samples": curve.samples }).to_string())
}

/// Index-finger equilibrium for BL/OL/PL commands (mm) and a palmar
/// fingertip load (N).
#[wasm_bindgen]
pub fn index_equilibrium(bl_mm: f64, ol_mm: f64, pl_mm: f64, force_n: f64) -> Result<String, JsError> {
    let m = default_catch919();
    let mut p = EquilibriumProblem::new(&m)
        .with_command(CableId::IndexBL, bl_mm)
        .with_command(CableId::IndexOL, ol_mm)
        .with_command(CableId::IndexPL, pl_mm);
    if force_n > 0.0 {
        p = p.with_force(ExternalForce::palmar(Finger::Index, force_n));
    }
    let r = solve_equilibrium(&p, &m.rest_pose()).map_err(to_js)?;
    let q = r.q_star;
    Ok(json!({
        "mcp_deg": q[JointId::INDEX_MCP_FLEX],
        "pip_deg": q[JointId::INDEX_PIP_FLEX],
        "dip_deg": q[JointId::INDEX_DIP_FLEX],
        "chute_deg": r.chute_extension_deg,
        "tensions_n": {
            "BL": r.cable_tensions[CableId::IndexBL],
            "OL": r.cable_tensions[CableId::IndexOL],
            "PL": r.cable_tensions[CableId::IndexPL],
        },
        "posture_class": classify_posture(&q, force_n > 0.0, 5.0),
        "converged": r.converged,
        "chain": finger_chain(&m, Finger::Index, &q),
    })
    .to_string())
}

/// Chute extension of the unactuated index finger under `n` fingertip loads
/// from 0 to `max_force_n`.
#[wasm_bindgen]
pub fn compliance_sweep(max_force_n: f64, n: usize) -> Result<String, JsError> {
    let m = default_catch919();
    let n = n.max(2);
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let f = max_force_n * k as f64 / (n - 1) as f64;
        let mut p = EquilibriumProblem::new(&m);
        if f > 0.0 {
            p = p.with_force(ExternalForce::palmar(Finger::Index, f));
        }
        let r = solve_equilibrium(&p, &m.rest_pose()).map_err(to_js)?;
        points.push((f, r.chute_extension_deg));
    }
    Ok(json!({ "threshold_n": chute_force_threshold(&m), "points": points }).to_string())
}
