//! Planar four-bar linkage coupling the DIP joint to the PIP joint.
//!
//! Frame: the ground link is the middle-phalanx segment between the two
//! pins, laid along +x from the input pivot `O2` to the output pivot `O4`.
//! The input crank turns with the proximal phalanx, the output rocker with
//! the distal phalanx. PIP flexion advances the crank angle
//! `θ2 = input_mount + pip`; the output angle `θ4` is mapped back to a DIP
//! angle as `θ4 − output_mount`, and `output_mount` is chosen so that
//! PIP 0° gives DIP 0°.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Distance of the closure cosine from ±1 below which the linkage is
/// considered to be at a toggle position.
const TOGGLE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Open,
    Crossed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourBarDims {
    pub ground_mm: f64,
    pub input_mm: f64,
    pub coupler_mm: f64,
    pub output_mm: f64,
    pub input_mount_deg: f64,
    pub output_mount_deg: f64,
    pub branch: Branch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrashofClass {
    CrankRocker,
    DoubleCrank,
    DoubleRocker,
    ChangePoint,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkageError {
    #[error("linkage does not assemble at PIP {pip_deg:.4}°")]
    AssemblyFailure { pip_deg: f64 },
    #[error("linkage is at a toggle position at PIP {pip_deg:.4}°")]
    BranchSingularity { pip_deg: f64 },
    #[error("sample {index} of the coupling curve failed: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<LinkageError>,
    },
    #[error("invalid curve request: {0}")]
    InvalidRange(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    #[error("target curve must have strictly increasing PIP and non-decreasing DIP samples")]
    NonMonotoneTarget,
    #[error("target curve needs at least two samples")]
    TooFewSamples,
    #[error("infeasible bounds for `{0}`")]
    InfeasibleBounds(&'static str),
    #[error("initial linkage does not assemble over the target range: {0}")]
    InitialDoesNotAssemble(LinkageError),
}

/// (pip, dip) samples of the coupling between the two joints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingCurve {
    pub samples: Vec<(f64, f64)>,
}

impl CouplingCurve {
    pub fn identity(lo: f64, hi: f64, n: usize) -> Self {
        let samples = linspace(lo, hi, n).map(|x| (x, x)).collect();
        CouplingCurve { samples }
    }

    /// PIP strictly increasing, DIP non-decreasing.
    pub fn is_monotone(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + step * i as f64 })
}

/// Loop-closure state at one crank angle.
struct Closure {
    theta3: f64,
    theta4: f64,
}

impl FourBarDims {
    /// Parallelogram with ground = coupler and input = output.
    pub fn parallelogram(ground_mm: f64, crank_mm: f64, mount_deg: f64) -> Self {
        FourBarDims {
            ground_mm,
            input_mm: crank_mm,
            coupler_mm: ground_mm,
            output_mm: crank_mm,
            input_mount_deg: mount_deg,
            output_mount_deg: mount_deg,
            branch: Branch::Open,
        }
    }

    pub fn lengths(&self) -> [f64; 4] {
        [self.ground_mm, self.input_mm, self.coupler_mm, self.output_mm]
    }

    /// Uniformly scales every link length; the coupling curve is unchanged.
    pub fn scaled(&self, factor: f64) -> Self {
        FourBarDims {
            ground_mm: self.ground_mm * factor,
            input_mm: self.input_mm * factor,
            coupler_mm: self.coupler_mm * factor,
            output_mm: self.output_mm * factor,
            ..*self
        }
    }

    fn close(&self, pip_deg: f64) -> Result<Closure, LinkageError> {
        let (a, b, c, d) = (self.input_mm, self.coupler_mm, self.output_mm, self.ground_mm);
        let theta2 = (self.input_mount_deg + pip_deg).to_radians();
        let (ax, ay) = (a * theta2.cos(), a * theta2.sin());
        let (dx, dy) = (ax - d, ay);
        let s = dx.hypot(dy);
        if s < 1e-12 {
            return Err(LinkageError::AssemblyFailure { pip_deg });
        }
        let cos_gamma = (c * c + s * s - b * b) / (2.0 * c * s);
        if !cos_gamma.is_finite() || cos_gamma.abs() > 1.0 + TOGGLE_TOL {
            return Err(LinkageError::AssemblyFailure { pip_deg });
        }
        if cos_gamma.abs() > 1.0 - TOGGLE_TOL {
            return Err(LinkageError::BranchSingularity { pip_deg });
        }
        let phi = dy.atan2(dx);
        let gamma = cos_gamma.acos();
        let theta4 = match self.branch {
            Branch::Open => phi - gamma,
            Branch::Crossed => phi + gamma,
        };
        let (bx, by) = (d + c * theta4.cos(), c * theta4.sin());
        let theta3 = (by - ay).atan2(bx - ax);
        Ok(Closure { theta3, theta4 })
    }

    /// Sets `output_mount_deg` so that PIP 0° maps to DIP 0°.
    pub fn zeroed(mut self) -> Result<Self, LinkageError> {
        let closure = self.close(0.0)?;
        self.output_mount_deg = closure.theta4.to_degrees();
        Ok(self)
    }

    /// d(dip)/d(pip) at the given PIP angle.
    pub fn coupling_slope(&self, pip_deg: f64) -> Result<f64, LinkageError> {
        let cl = self.close(pip_deg)?;
        let theta2 = (self.input_mount_deg + pip_deg).to_radians();
        let denom = self.output_mm * (cl.theta4 - cl.theta3).sin();
        if denom.abs() < 1e-12 {
            return Err(LinkageError::BranchSingularity { pip_deg });
        }
        Ok(self.input_mm * (theta2 - cl.theta3).sin() / denom)
    }
}

fn wrap_deg(x: f64) -> f64 {
    let mut y = x % 360.0;
    if y > 180.0 {
        y -= 360.0;
    } else if y <= -180.0 {
        y += 360.0;
    }
    y
}

/// DIP angle produced by the linkage at the given PIP angle.
pub fn solve_coupler(dims: &FourBarDims, pip_deg: f64) -> Result<f64, LinkageError> {
    let closure = dims.close(pip_deg)?;
    Ok(wrap_deg(closure.theta4.to_degrees() - dims.output_mount_deg))
}

/// `n` uniformly spaced samples of the coupling over `[lo, hi]`.
pub fn coupling_curve(dims: &FourBarDims, lo: f64, hi: f64, n: usize) -> Result<CouplingCurve, LinkageError> {
    if !(lo < hi) {
        return Err(LinkageError::InvalidRange(format!("lo {lo} must be below hi {hi}")));
    }
    if n < 2 {
        return Err(LinkageError::InvalidRange(format!("need at least 2 samples, got {n}")));
    }
    let samples = linspace(lo, hi, n)
        .enumerate()
        .map(|(index, pip)| {
            solve_coupler(dims, pip)
                .map(|dip| (pip, dip))
                .map_err(|e| LinkageError::Sample { index, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CouplingCurve { samples })
}

/// Grashof classification from the shortest + longest vs the other two links.
pub fn grashof_class(dims: &FourBarDims) -> GrashofClass {
    let lengths = dims.lengths();
    let (mut s_idx, mut l_idx) = (0, 0);
    for (i, &x) in lengths.iter().enumerate() {
        if x < lengths[s_idx] {
            s_idx = i;
        }
        if x > lengths[l_idx] {
            l_idx = i;
        }
    }
    let total: f64 = lengths.iter().sum();
    let s_plus_l = lengths[s_idx] + lengths[l_idx];
    let p_plus_q = total - s_plus_l;
    let scale = total.max(1.0);
    if (s_plus_l - p_plus_q).abs() <= 1e-12 * scale {
        return GrashofClass::ChangePoint;
    }
    if s_plus_l > p_plus_q {
        return GrashofClass::DoubleRocker;
    }
    match s_idx {
        0 => GrashofClass::DoubleCrank,
        1 | 3 => GrashofClass::CrankRocker,
        _ => GrashofClass::DoubleRocker,
    }
}

/// Per-field search intervals for [`synthesize`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisBounds {
    pub ground_mm: (f64, f64),
    pub input_mm: (f64, f64),
    pub coupler_mm: (f64, f64),
    pub output_mm: (f64, f64),
    pub input_mount_deg: (f64, f64),
}

impl SynthesisBounds {
    /// Links between 5 and 50 mm, crank mount anywhere in (5°, 175°).
    pub fn finger_scale() -> Self {
        SynthesisBounds {
            ground_mm: (5.0, 50.0),
            input_mm: (5.0, 50.0),
            coupler_mm: (5.0, 50.0),
            output_mm: (5.0, 50.0),
            input_mount_deg: (5.0, 175.0),
        }
    }

    fn as_array(&self) -> [(f64, f64); 5] {
        [self.ground_mm, self.input_mm, self.coupler_mm, self.output_mm, self.input_mount_deg]
    }
}

const PARAM_NAMES: [&str; 5] = ["ground_mm", "input_mm", "coupler_mm", "output_mm", "input_mount_deg"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Synthesis {
    pub dims: FourBarDims,
    pub rms_deg: f64,
    /// False when the search stalled above the RMS tolerance; `dims` is
    /// then the best linkage found.
    pub converged: bool,
}

/// RMS tolerance (deg) at which synthesis stops.
pub const SYNTHESIS_TOL_DEG: f64 = 1e-4;

fn params_of(d: &FourBarDims) -> [f64; 5] {
    [d.ground_mm, d.input_mm, d.coupler_mm, d.output_mm, d.input_mount_deg]
}

fn dims_of(p: &[f64; 5], branch: Branch) -> FourBarDims {
    FourBarDims {
        ground_mm: p[0],
        input_mm: p[1],
        coupler_mm: p[2],
        output_mm: p[3],
        input_mount_deg: p[4],
        output_mount_deg: 0.0,
        branch,
    }
}

/// Sum of squared DIP residuals, or infinity if any sample fails to assemble.
fn sse(p: &[f64; 5], branch: Branch, target: &CouplingCurve) -> f64 {
    let Ok(dims) = dims_of(p, branch).zeroed() else {
        return f64::INFINITY;
    };
    let mut acc = 0.0;
    for &(pip, dip) in &target.samples {
        match solve_coupler(&dims, pip) {
            Ok(x) => acc += (x - dip).powi(2),
            Err(_) => return f64::INFINITY,
        }
    }
    acc
}

fn golden_section(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 { (x1, f1) } else { (x2, f2) }
}

/// Fits linkage dimensions to a target coupling curve by coordinate descent
/// with golden-section line searches. The output mount is always re-derived
/// so that PIP 0° maps to DIP 0°. Deterministic for a given input.
pub fn synthesize(
    target: &CouplingCurve,
    initial: &FourBarDims,
    bounds: &SynthesisBounds,
) -> Result<Synthesis, SynthesisError> {
    if target.samples.len() < 2 {
        return Err(SynthesisError::TooFewSamples);
    }
    if !target.is_monotone() {
        return Err(SynthesisError::NonMonotoneTarget);
    }
    let b = bounds.as_array();
    for (i, &(lo, hi)) in b.iter().enumerate() {
        let length_field = i < 4;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() || (length_field && lo <= 0.0) {
            return Err(SynthesisError::InfeasibleBounds(PARAM_NAMES[i]));
        }
    }

    let branch = initial.branch;
    let mut x = params_of(initial);
    for (v, &(lo, hi)) in x.iter_mut().zip(b.iter()) {
        *v = v.clamp(lo, hi);
    }
    let mut fx = sse(&x, branch, target);
    if !fx.is_finite() {
        let dims = dims_of(&x, branch);
        let err = dims
            .zeroed()
            .and_then(|d| {
                for &(pip, _) in &target.samples {
                    solve_coupler(&d, pip)?;
                }
                Ok(())
            })
            .expect_err("infinite objective implies an assembly error");
        return Err(SynthesisError::InitialDoesNotAssemble(err));
    }

    let n = target.samples.len() as f64;
    let rms = |f: f64| (f / n).sqrt();
    let mut step: [f64; 5] = std::array::from_fn(|i| 0.25 * (b[i].1 - b[i].0).max(1e-9));

    for _sweep in 0..2000 {
        if rms(fx) < SYNTHESIS_TOL_DEG {
            break;
        }
        let mut improved = false;
        for i in 0..5 {
            let lo = (x[i] - step[i]).max(b[i].0);
            let hi = (x[i] + step[i]).min(b[i].1);
            if hi - lo < 1e-12 {
                continue;
            }
            let mut trial = x;
            let (xi, fi) = golden_section(lo, hi, |v| {
                trial[i] = v;
                sse(&trial, branch, target)
            });
            if fi < fx {
                x[i] = xi;
                fx = fi;
                improved = true;
            }
        }
        if !improved {
            for s in step.iter_mut() {
                *s *= 0.5;
            }
            if step.iter().all(|&s| s < 1e-10) {
                break;
            }
        }
    }

    let dims = dims_of(&x, branch)
        .zeroed()
        .expect("accepted iterates always assemble");
    let rms_deg = rms(fx);
    Ok(Synthesis { dims, rms_deg, converged: rms_deg < SYNTHESIS_TOL_DEG })
}
