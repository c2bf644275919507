//! Quasi-static equilibrium: the joint configuration minimising total
//! potential energy (springs + elastic cables − external work) within the
//! joint limits.
//!
//! Cables are stiff unilateral springs. A command is the length reeled in
//! relative to the rest pose, so the stretch of cable `c` at `q` is
//! `command − (excursion(q) − excursion(rest))` and its tension is
//! `k_c · max(0, stretch)`.
//!
//! The solver works in reduced coordinates: every cable-driven joint plus
//! the index chute. Linkage-coupled DIP angles follow PIP, the palm arch
//! follows ring/little MCP, and direct-servo joints are held at their
//! commanded angle.

pub mod kinematics;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kinematics::{distal_dorsal_normal, finger_chain, fingertip_position, phalanx_angles, Point};

use crate::hand_model::{
    CableId, CableValues, Drive, Finger, HandModel, JointId, JointVector, LimitViolation,
};
use crate::tendon::excursion;

const DEG: f64 = std::f64::consts::PI / 180.0;

/// Default cable stiffness, N/mm.
pub const DEFAULT_CABLE_STIFFNESS: f64 = 50.0;
/// Stopping tolerance on the projected-gradient norm, N·mm/deg.
pub const GRADIENT_TOL: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForceDirection {
    /// Pushes on the palmar pad of the fingertip, along the dorsal normal
    /// of the distal phalanx taken at the start of the solve.
    PalmarOnFingertip,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalForce {
    pub finger: Finger,
    pub magnitude_n: f64,
    pub direction: ForceDirection,
}

impl ExternalForce {
    pub fn palmar(finger: Finger, magnitude_n: f64) -> Self {
        ExternalForce { finger, magnitude_n, direction: ForceDirection::PalmarOnFingertip }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumProblem<'a> {
    pub model: &'a HandModel,
    /// Cable length reeled in relative to the rest pose, mm.
    pub commands: CableValues,
    /// Targets for direct-servo joints; absent joints keep their start value.
    pub direct_joints: BTreeMap<JointId, f64>,
    pub external_force: Option<ExternalForce>,
    /// N/mm.
    pub cable_stiffness: f64,
    /// Contact stops: upper-limit overrides for individual joints.
    pub stops: BTreeMap<JointId, f64>,
}

impl<'a> EquilibriumProblem<'a> {
    pub fn new(model: &'a HandModel) -> Self {
        EquilibriumProblem {
            model,
            commands: CableValues::zeros(),
            direct_joints: BTreeMap::new(),
            external_force: None,
            cable_stiffness: DEFAULT_CABLE_STIFFNESS,
            stops: BTreeMap::new(),
        }
    }

    pub fn with_commands(mut self, commands: CableValues) -> Self {
        self.commands = commands;
        self
    }

    pub fn with_command(mut self, cable: CableId, mm: f64) -> Self {
        self.commands[cable] = mm;
        self
    }

    pub fn with_force(mut self, force: ExternalForce) -> Self {
        self.external_force = Some(force);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub q_star: JointVector,
    /// N·mm.
    pub energy: f64,
    /// N; exactly zero for slack cables.
    pub cable_tensions: CableValues,
    /// Projected-gradient norm at `q_star`, N·mm/deg.
    pub residual_norm: f64,
    pub iterations: usize,
    pub active_limits: Vec<JointId>,
    pub chute_extension_deg: f64,
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StaticsError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("external force on {0} is not supported; only the index fingertip carries one")]
    UnsupportedFinger(Finger),
    #[error("initial pose out of limits: {0}")]
    OutOfLimits(#[from] LimitViolation),
}

/// Fingertip force (N) at which the chute preload is just balanced when
/// the force is normal to the distal phalanx: preload ÷ distal length.
pub fn chute_force_threshold(model: &HandModel) -> f64 {
    let preload = model.spring(JointId::INDEX_DIP_CHUTE).map_or(0.0, |s| s.preload_nmm);
    let distal = model.phalanx_lengths(Finger::Index).last().copied().unwrap_or(f64::INFINITY);
    preload / distal
}

/// True for joints the solver moves freely.
pub fn is_free_joint(model: &HandModel, id: JointId) -> bool {
    id != JointId::PALM_ARCH && !matches!(model.joint(id).drive, Drive::LinkageCoupled | Drive::DirectServo)
}

/// The energy of one problem with its force direction resolved.
#[derive(Clone, Debug)]
pub struct Objective<'p, 'a> {
    problem: &'p EquilibriumProblem<'a>,
    rest_excursion: CableValues,
    /// Force vector (N) and the fingertip reference point it does work from.
    force: Option<(Finger, Point, Point)>,
    free: Vec<JointId>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl<'p, 'a> Objective<'p, 'a> {
    /// Validates the problem and resolves the force direction at `q_dir`.
    pub fn new(problem: &'p EquilibriumProblem<'a>, q_dir: &JointVector) -> Result<Self, StaticsError> {
        let model = problem.model;
        if !(problem.cable_stiffness > 0.0 && problem.cable_stiffness.is_finite()) {
            return Err(StaticsError::InvalidProblem("cable stiffness must be positive".into()));
        }
        if let Some((c, v)) = problem.commands.iter().find(|(_, v)| !v.is_finite()) {
            return Err(StaticsError::InvalidProblem(format!("command for {c} is not finite: {v}")));
        }
        for (&j, &v) in &problem.direct_joints {
            let spec = model.joint(j);
            if spec.drive != Drive::DirectServo {
                return Err(StaticsError::InvalidProblem(format!("{j} is not a direct-servo joint")));
            }
            if !spec.contains(v) {
                return Err(LimitViolation { joint: j, value_deg: v, min_deg: spec.min_deg, max_deg: spec.max_deg }.into());
            }
        }
        let force = match problem.external_force {
            None => None,
            Some(f) if f.finger != Finger::Index => return Err(StaticsError::UnsupportedFinger(f.finger)),
            Some(f) if !(f.magnitude_n >= 0.0 && f.magnitude_n.is_finite()) => {
                return Err(StaticsError::InvalidProblem(format!("force magnitude {} N", f.magnitude_n)));
            }
            Some(f) => {
                let n = distal_dorsal_normal(f.finger, &model.complete(q_dir));
                let p_ref = fingertip_position(model, f.finger, &model.rest_pose());
                Some((f.finger, (f.magnitude_n * n.0, f.magnitude_n * n.1), p_ref))
            }
        };

        let rest = model.rest_pose();
        let mut rest_excursion = CableValues::zeros();
        for route in &model.cables {
            rest_excursion[route.cable] = excursion(route, &rest);
        }

        let free: Vec<JointId> = JointId::ALL.iter().copied().filter(|&j| is_free_joint(model, j)).collect();
        let mut lo = Vec::with_capacity(free.len());
        let mut hi = Vec::with_capacity(free.len());
        for &j in &free {
            let spec = model.joint(j);
            let mut upper = spec.max_deg;
            if let Some(&stop) = problem.stops.get(&j) {
                if stop < spec.min_deg {
                    return Err(StaticsError::InvalidProblem(format!("stop {stop}° on {j} is below its lower limit")));
                }
                upper = upper.min(stop);
            }
            lo.push(spec.min_deg);
            hi.push(upper);
        }
        for &j in problem.stops.keys() {
            if !free.contains(&j) {
                return Err(StaticsError::InvalidProblem(format!("{j} cannot carry a contact stop")));
            }
        }
        Ok(Objective { problem, rest_excursion, force, free, lo, hi })
    }

    pub fn free_joints(&self) -> &[JointId] {
        &self.free
    }

    /// Full joint vector for reduced coordinates `x`, taking direct-servo
    /// angles from `base` unless commanded.
    pub fn expand(&self, x: &[f64], base: &JointVector) -> JointVector {
        let mut q = *base;
        for (&j, &v) in &self.problem.direct_joints {
            q[j] = v;
        }
        for (&j, &v) in self.free.iter().zip(x) {
            q[j] = v;
        }
        self.problem.model.complete(&q)
    }

    pub fn reduce(&self, q: &JointVector) -> Vec<f64> {
        self.free.iter().map(|&j| q[j]).collect()
    }

    fn stretch(&self, cable: CableId, q: &JointVector) -> f64 {
        let route = self.problem.model.route(cable).expect("validated model routes every cable");
        self.problem.commands[cable] - (excursion(route, q) - self.rest_excursion[cable])
    }

    /// Cable tensions (N) at a completed pose.
    pub fn tensions(&self, q: &JointVector) -> CableValues {
        let mut out = CableValues::zeros();
        for c in CableId::ALL {
            let s = self.stretch(c, q);
            if s > 0.0 {
                out[c] = self.problem.cable_stiffness * s;
            }
        }
        out
    }

    /// Total potential energy (N·mm) at a completed pose.
    pub fn energy(&self, q: &JointVector) -> f64 {
        self.energy_and_full_gradient(q, false).0
    }

    fn energy_and_full_gradient(&self, q: &JointVector, want_grad: bool) -> (f64, JointVector) {
        let model = self.problem.model;
        let mut e = 0.0;
        let mut g = JointVector::zeros();
        for s in &model.springs {
            let d = q[s.joint] - s.rest_deg;
            e += DEG * (s.preload_nmm * d + 0.5 * s.stiffness_nmm_per_deg * d * d);
            g[s.joint] += DEG * (s.preload_nmm + s.stiffness_nmm_per_deg * d);
        }
        let k = self.problem.cable_stiffness;
        for route in &model.cables {
            let s = self.stretch(route.cable, q);
            if s > 0.0 {
                e += 0.5 * k * s * s;
                if want_grad {
                    for seg in &route.segments {
                        g[seg.joint] -= k * s * f64::from(seg.sign) * seg.moment_arm_mm * DEG;
                    }
                }
            }
        }
        if let Some((finger, f, p_ref)) = self.force {
            let p = fingertip_position(model, finger, q);
            e -= f.0 * (p.0 - p_ref.0) + f.1 * (p.1 - p_ref.1);
            if want_grad {
                let norm = f.0.hypot(f.1);
                if norm > 0.0 {
                    let dir = (f.0 / norm, f.1 / norm);
                    let gp = kinematics::tip_projection_gradient(model, finger, q, dir);
                    for (v, d) in g.0.iter_mut().zip(gp.0) {
                        *v -= norm * d;
                    }
                }
            }
        }
        (e, g)
    }

    /// Energy gradient (N·mm/deg) with respect to the reduced coordinates,
    /// coupled DIP contributions folded into PIP by the chain rule.
    pub fn reduced_gradient(&self, q: &JointVector) -> Vec<f64> {
        let (_, g) = self.energy_and_full_gradient(q, true);
        self.fold(q, &g)
    }

    /// Maps a full joint-space covector to reduced coordinates.
    pub fn fold(&self, q: &JointVector, g: &JointVector) -> Vec<f64> {
        let model = self.problem.model;
        self.free
            .iter()
            .map(|&j| {
                let mut v = g[j];
                if let Some((pip, dip)) = JointId::linkage_pair(j.finger()) {
                    if pip == j {
                        v += g[dip] * coupled_slope(model, j.finger(), q[pip], q[dip]);
                    }
                }
                v
            })
            .collect()
    }

    fn projected(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (&xi, &gi))| {
                if (xi <= self.lo[i] && gi > 0.0) || (xi >= self.hi[i] && gi < 0.0) {
                    0.0
                } else {
                    gi
                }
            })
            .collect()
    }

    fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lo[i], self.hi[i]);
        }
    }

    fn gradient_at(&self, x: &[f64], base: &JointVector) -> Vec<f64> {
        let q = self.expand(x, base);
        let (_, g) = self.energy_and_full_gradient(&q, true);
        self.fold(&q, &g)
    }

    /// Projected-Newton direction: coordinates pinned at a bound with the
    /// gradient pushing outward stay put; the rest take a damped Newton
    /// step on a finite-difference Hessian of the analytic gradient.
    fn newton_direction(&self, x: &[f64], g: &[f64], base: &JointVector) -> Option<Vec<f64>> {
        let free: Vec<usize> = (0..x.len())
            .filter(|&i| !((x[i] <= self.lo[i] && g[i] > 0.0) || (x[i] >= self.hi[i] && g[i] < 0.0)))
            .collect();
        if free.is_empty() {
            return None;
        }
        let h = 1e-5;
        let n = free.len();
        let mut hess = DMatrix::zeros(n, n);
        for (c, &i) in free.iter().enumerate() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let (gp, gm) = (self.gradient_at(&xp, base), self.gradient_at(&xm, base));
            for (r, &k) in free.iter().enumerate() {
                hess[(r, c)] = (gp[k] - gm[k]) / (2.0 * h);
            }
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        let rhs = DVector::from_iterator(n, free.iter().map(|&i| -g[i]));
        let scale = hess.diagonal().amax().max(1e-12);
        let mut mu = 1e-10 * scale;
        while mu < 1e3 * scale {
            let shifted = &hess + DMatrix::identity(n, n) * mu;
            if let Some(ch) = shifted.cholesky() {
                let d_free = ch.solve(&rhs);
                let mut d = vec![0.0; x.len()];
                for (k, &i) in free.iter().enumerate() {
                    d[i] = d_free[k];
                }
                return Some(d);
            }
            mu *= 100.0;
        }
        None
    }
}

/// d(DIP)/d(PIP) of the linkage, zero where the DIP value is clamped.
fn coupled_slope(model: &HandModel, finger: Finger, pip: f64, dip: f64) -> f64 {
    let Some(dims) = model.linkages.get(&finger) else {
        return 1.0;
    };
    let spec = model.joint(JointId::linkage_pair(finger).expect("linkage finger").1);
    match model.coupled_dip(finger, pip) {
        // Round-off past the range end must not zero the slope.
        Ok(raw) if raw == dip || (raw >= spec.min_deg - 1e-9 && raw <= spec.max_deg + 1e-9) => {
            dims.coupling_slope(pip).unwrap_or(0.0)
        }
        _ => 0.0,
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Total potential energy at `q` (coupled joints recomputed first). A
/// fingertip force acts along the dorsal normal at `q` itself.
pub fn potential_energy(problem: &EquilibriumProblem, q: &JointVector) -> Result<f64, StaticsError> {
    let obj = Objective::new(problem, q)?;
    Ok(obj.energy(&problem.model.complete(q)))
}

/// Reduced energy gradient at `q` as a joint vector; entries of dependent
/// and direct-servo joints are zero.
pub fn energy_gradient(problem: &EquilibriumProblem, q: &JointVector) -> Result<JointVector, StaticsError> {
    let obj = Objective::new(problem, q)?;
    let q = problem.model.complete(q);
    let mut out = JointVector::zeros();
    for (&j, v) in obj.free.iter().zip(obj.reduced_gradient(&q)) {
        out[j] = v;
    }
    Ok(out)
}

/// Projected descent started from `q_init`: a projected-Newton step when
/// it gives sufficient decrease, otherwise a Barzilai–Borwein gradient
/// step, both with Armijo backtracking. Every accepted iterate lowers the
/// energy. Hitting the iteration cap is not an error: the best iterate is
/// returned with `converged == false`.
pub fn solve_equilibrium(problem: &EquilibriumProblem, q_init: &JointVector) -> Result<EquilibriumResult, StaticsError> {
    let model = problem.model;
    let obj = Objective::new(problem, q_init)?;
    for &j in &obj.free {
        let spec = model.joint(j);
        let v = q_init[j];
        if !(v >= spec.min_deg - 1e-9 && v <= spec.max_deg + 1e-9) {
            return Err(LimitViolation { joint: j, value_deg: v, min_deg: spec.min_deg, max_deg: spec.max_deg }.into());
        }
    }

    let base = *q_init;
    let mut x = obj.reduce(q_init);
    obj.project(&mut x);
    let mut q = obj.expand(&x, &base);
    let (mut e, gfull) = obj.energy_and_full_gradient(&q, true);
    let mut g = obj.fold(&q, &gfull);
    let mut pg_norm = norm(&obj.projected(&x, &g));
    let mut alpha = 1.0;
    let mut iterations = 0;

    while pg_norm >= GRADIENT_TOL && iterations < MAX_ITERATIONS {
        iterations += 1;
        let newton = obj.newton_direction(&x, &g, &base).and_then(|d| {
            let mut t = 1.0;
            while t > 1e-10 {
                let mut xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
                obj.project(&mut xn);
                let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let qn = obj.expand(&xn, &base);
                let en = obj.energy(&qn);
                let decrease = dot(&g, &s);
                if decrease < 0.0 && en <= e + 1e-4 * decrease {
                    return Some((xn, qn, en, s));
                }
                t *= 0.5;
            }
            None
        });
        let accepted = newton.or_else(|| {
            let mut step = alpha;
            loop {
                let mut xn: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
                obj.project(&mut xn);
                let d: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let qn = obj.expand(&xn, &base);
                let en = obj.energy(&qn);
                if en <= e + 1e-4 * dot(&g, &d) {
                    break Some((xn, qn, en, d));
                }
                step *= 0.5;
                if step < 1e-14 {
                    break None;
                }
            }
        });
        let Some((xn, qn, en, s)) = accepted else {
            break;
        };
        let (_, gfull) = obj.energy_and_full_gradient(&qn, true);
        let gn = obj.fold(&qn, &gfull);
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        alpha = if sy > 0.0 { (dot(&s, &s) / sy).clamp(1e-6, 1e6) } else { (alpha * 2.0).min(1e6) };
        x = xn;
        q = qn;
        e = en;
        g = gn;
        pg_norm = norm(&obj.projected(&x, &g));
    }

    let active_limits = obj
        .free
        .iter()
        .enumerate()
        .filter(|&(i, _)| x[i] <= obj.lo[i] || x[i] >= obj.hi[i])
        .map(|(_, &j)| j)
        .collect();
    Ok(EquilibriumResult {
        q_star: q,
        energy: e,
        cable_tensions: obj.tensions(&q),
        residual_norm: pg_norm,
        iterations,
        active_limits,
        chute_extension_deg: q[JointId::INDEX_DIP_CHUTE],
        converged: pg_norm < GRADIENT_TOL,
    })
}

/// [`solve_equilibrium`] for a problem that carries a fingertip force.
pub fn apply_fingertip_force(problem: &EquilibriumProblem, q_init: &JointVector) -> Result<EquilibriumResult, StaticsError> {
    match problem.external_force {
        None => Err(StaticsError::InvalidProblem("no external force given".into())),
        Some(_) => solve_equilibrium(problem, q_init),
    }
}
