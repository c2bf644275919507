//! Quasi-static simulation and control of a 19-DOF, 9-actuator
//! cable-driven anthropomorphic hand.
//!
//! Angles are degrees at every public boundary, lengths millimetres,
//! forces newtons and torques N·mm.

pub mod control;
pub mod grasps;
pub mod hand_model;
pub mod linkage;
pub mod statics;
pub mod tendon;
