//! The single authoritative simulation state.

use std::collections::BTreeMap;

use catch_core::control::{classify_posture, ControlOptions, PostureClass, ThumbController, ThumbStage, ThumbStageKind};
use catch_core::grasps::{commands_for_pose, load_catalog, GraspPreset};
use catch_core::hand_model::{CableId, CableValues, Drive, Finger, HandModel, JointId, JointVector};
use catch_core::statics::kinematics::{finger_chain, Point};
use catch_core::statics::{solve_equilibrium, EquilibriumProblem, EquilibriumResult, ExternalForce, StaticsError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::Command;

/// Largest accepted cable command magnitude, mm.
pub const MAX_CABLE_TRAVEL_MM: f64 = 100.0;
/// Largest accepted fingertip load, N.
pub const MAX_FORCE_N: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("{0}")]
    Invalid(String),
    #[error("no preset with taxonomy id {0}")]
    UnknownPreset(u8),
    #[error("controller: {0}")]
    Control(String),
    #[error(transparent)]
    Statics(#[from] StaticsError),
}

/// Point-in-time view of the session, as broadcast to clients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionState {
    pub tick: u64,
    /// Equilibrium joint angles, deg.
    pub q: JointVector,
    /// Cable commands in force, mm.
    pub commands: CableValues,
    /// Cable tensions at equilibrium, N.
    pub tensions: CableValues,
    pub direct_joints: BTreeMap<JointId, f64>,
    pub external_force: Option<ExternalForce>,
    pub resistance: bool,
    pub posture_class: PostureClass,
    pub thumb_stage: ThumbStage,
    pub chute_extension_deg: f64,
    /// N·mm.
    pub energy: f64,
    pub converged: bool,
    pub preset: Option<u8>,
    /// Sagittal-plane base, joint and tip points per finger, mm.
    pub fingers: BTreeMap<Finger, Vec<Point>>,
}

#[derive(Clone, Debug)]
pub struct Session {
    model: HandModel,
    options: ControlOptions,
    catalog: Vec<GraspPreset>,
    commands: CableValues,
    direct_joints: BTreeMap<JointId, f64>,
    force: Option<ExternalForce>,
    resistance: bool,
    thumb: ThumbController,
    thumb_stage: ThumbStage,
    stops: BTreeMap<JointId, f64>,
    preset: Option<u8>,
    result: EquilibriumResult,
    tick: u64,
}

fn rest_stage() -> ThumbStage {
    ThumbStage { kind: ThumbStageKind::McpFlexing, progress: 0.0 }
}

impl Session {
    /// A session at the rest pose, tick 0.
    pub fn new(model: HandModel) -> Result<Self, SessionError> {
        let rest = model.rest_pose();
        let result = solve_equilibrium(&EquilibriumProblem::new(&model), &rest)?;
        Ok(Session {
            options: ControlOptions::for_model(&model),
            catalog: load_catalog(),
            thumb: ThumbController::new(&model),
            commands: CableValues::zeros(),
            direct_joints: BTreeMap::new(),
            force: None,
            resistance: false,
            thumb_stage: rest_stage(),
            stops: BTreeMap::new(),
            preset: None,
            result,
            tick: 0,
            model,
        })
    }

    pub fn model(&self) -> &HandModel {
        &self.model
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn snapshot(&self) -> SessionState {
        let q = self.result.q_star;
        SessionState {
            tick: self.tick,
            q,
            commands: self.commands,
            tensions: self.result.cable_tensions,
            direct_joints: self.direct_joints.clone(),
            external_force: self.force,
            resistance: self.resistance,
            posture_class: classify_posture(&q, self.force.is_some(), self.options.eps_deg),
            thumb_stage: self.thumb_stage,
            chute_extension_deg: self.result.chute_extension_deg,
            energy: self.result.energy,
            converged: self.result.converged,
            preset: self.preset,
            fingers: Finger::DIGITS.iter().map(|&f| (f, finger_chain(&self.model, f, &q))).collect(),
        }
    }

    /// Validates and applies one command, re-solving the equilibrium. On
    /// error the session is unchanged.
    pub fn apply(&mut self, command: &Command) -> Result<u64, SessionError> {
        let mut next = self.clone();
        let from_rest = next.stage(command)?;
        next.solve(from_rest)?;
        next.tick += 1;
        *self = next;
        Ok(self.tick)
    }

    /// Updates the inputs; returns whether the solve restarts from rest.
    fn stage(&mut self, command: &Command) -> Result<bool, SessionError> {
        match *command {
            Command::SetCable { cable, displacement_mm } => {
                if !(displacement_mm.is_finite() && displacement_mm.abs() <= MAX_CABLE_TRAVEL_MM) {
                    return Err(SessionError::Invalid(format!(
                        "{cable} displacement {displacement_mm} mm is outside ±{MAX_CABLE_TRAVEL_MM} mm"
                    )));
                }
                self.commands[cable] = displacement_mm;
                self.preset = None;
                if cable == CableId::ThumbPink {
                    self.step_thumb();
                }
                Ok(false)
            }
            Command::SetDirectJoint { joint, deg } => {
                let spec = self.model.joint(joint);
                if spec.drive != Drive::DirectServo {
                    return Err(SessionError::Invalid(format!("{joint} is not servo-driven")));
                }
                if !(deg.is_finite() && spec.contains(deg)) {
                    return Err(SessionError::Invalid(format!(
                        "{joint} = {deg}° is outside its range [{}°, {}°]",
                        spec.min_deg, spec.max_deg
                    )));
                }
                self.direct_joints.insert(joint, deg);
                self.preset = None;
                Ok(false)
            }
            Command::SetForce { finger, newtons } => {
                if finger != Finger::Index {
                    return Err(SessionError::Invalid(format!("only the index fingertip takes a load, not {finger}")));
                }
                if !(newtons.is_finite() && (0.0..=MAX_FORCE_N).contains(&newtons)) {
                    return Err(SessionError::Invalid(format!("force {newtons} N is outside [0, {MAX_FORCE_N}] N")));
                }
                self.force = (newtons > 0.0).then(|| ExternalForce::palmar(finger, newtons));
                Ok(false)
            }
            Command::SetResistance { active } => {
                self.resistance = active;
                self.step_thumb();
                Ok(false)
            }
            Command::LoadPreset { taxonomy_id } => {
                let preset = self
                    .catalog
                    .iter()
                    .find(|p| p.taxonomy_id == taxonomy_id)
                    .ok_or(SessionError::UnknownPreset(taxonomy_id))?;
                let plan = commands_for_pose(&self.model, &preset.targets, &self.options)
                    .map_err(|e| SessionError::Control(e.to_string()))?;
                self.commands = plan.commands;
                self.direct_joints = plan.direct_joints;
                self.stops = plan.stops;
                self.thumb = ThumbController::new(&self.model);
                self.thumb_stage = preset.thumb_stage_hint;
                self.force = None;
                self.resistance = false;
                self.preset = Some(taxonomy_id);
                Ok(true)
            }
            Command::Reset {} => {
                self.commands = CableValues::zeros();
                self.direct_joints.clear();
                self.stops.clear();
                self.force = None;
                self.resistance = false;
                self.thumb = ThumbController::new(&self.model);
                self.thumb_stage = rest_stage();
                self.preset = None;
                Ok(true)
            }
        }
    }

    /// Advances the pink-cable stage machine. Contact freezes thumb MCP
    /// where the hand currently is.
    fn step_thumb(&mut self) {
        let targets = self.thumb.step(self.commands[CableId::ThumbPink], self.resistance);
        self.thumb_stage = targets.stage;
        if self.thumb.frozen_mcp().is_some() {
            let here = self.result.q_star[JointId::THUMB_MCP_FLEX];
            self.stops.entry(JointId::THUMB_MCP_FLEX).or_insert(here);
        } else {
            self.stops.remove(&JointId::THUMB_MCP_FLEX);
        }
    }

    fn solve(&mut self, from_rest: bool) -> Result<(), SessionError> {
        let mut problem = EquilibriumProblem::new(&self.model).with_commands(self.commands);
        problem.direct_joints = self.direct_joints.clone();
        problem.stops = self.stops.clone();
        problem.external_force = self.force;
        let start = if from_rest { self.model.rest_pose() } else { self.result.q_star };
        self.result = solve_equilibrium(&problem, &start)?;
        Ok(())
    }
}
