//! Fitting cable length against joint angles from sampled poses.
//!
//! Each cable gets a total-degree polynomial in the independent joints its
//! route crosses (a coupled DIP is represented by its PIP). Samples are
//! split 80/20 by seed; the reported RMS comes from the held-out part.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hand_model::{CableId, HandModel, JointId, JointVector};
use crate::statics::is_free_joint;
use crate::tendon::excursion;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("design matrix for {cable} is rank deficient ({rank} of {terms} terms identifiable from {samples} samples)")]
    RankDeficient { cable: CableId, rank: usize, terms: usize, samples: usize },
    #[error("invalid calibration request: {0}")]
    Invalid(String),
}

/// Joint-angle samples to calibrate against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub samples: Vec<JointVector>,
}

impl SampleGrid {
    /// `n` poses with every independent joint drawn uniformly over its range.
    pub fn uniform(model: &HandModel, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rest = model.rest_pose();
        let samples = (0..n)
            .map(|_| {
                let mut q = rest;
                for spec in &model.joints {
                    if is_free_joint(model, spec.id) {
                        q[spec.id] = rng.random_range(spec.min_deg..=spec.max_deg);
                    }
                }
                model.complete(&q)
            })
            .collect();
        SampleGrid { samples }
    }
}

/// Polynomial for one cable: `Σ coefficient · Π angle^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CablePolynomial {
    pub joints: Vec<JointId>,
    /// One exponent vector per term, aligned with `joints`.
    pub exponents: Vec<Vec<u32>>,
    pub coefficients: Vec<f64>,
}

impl CablePolynomial {
    fn features(&self, q: &JointVector) -> Vec<f64> {
        self.exponents
            .iter()
            .map(|e| {
                self.joints
                    .iter()
                    .zip(e)
                    .map(|(&j, &p)| q[j].powi(p as i32))
                    .product()
            })
            .collect()
    }

    pub fn predict(&self, q: &JointVector) -> f64 {
        self.features(q).iter().zip(&self.coefficients).map(|(f, c)| f * c).sum()
    }
}

/// Cable-length predictions from joint angles, in mm relative to the
/// all-zero pose.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMap {
    pub degree: u32,
    pub cables: BTreeMap<CableId, CablePolynomial>,
    /// RMS residual on held-out samples, mm.
    pub fit_rms_mm: f64,
    pub sample_count: usize,
}

impl CalibrationMap {
    /// The linear map implied by the model's constant moment arms. Coupled
    /// DIP terms fold into PIP with the linkage slope at PIP 0°, which is
    /// exact for a parallelogram-like coupling.
    pub fn from_model(model: &HandModel) -> Self {
        let mut cables = BTreeMap::new();
        for route in &model.cables {
            let joints = route_inputs(model, route.cable);
            let mut exponents = vec![vec![0; joints.len()]];
            let mut coefficients = vec![0.0];
            for (k, &j) in joints.iter().enumerate() {
                let mut e = vec![0; joints.len()];
                e[k] = 1;
                exponents.push(e);
                // A coupled DIP folds into its PIP with the linkage slope at 0.
                let mut c = 0.0;
                for s in &route.segments {
                    let factor = if s.joint == j {
                        1.0
                    } else if !is_free_joint(model, s.joint)
                        && JointId::linkage_pair(s.joint.finger()).is_some_and(|(pip, dip)| dip == s.joint && pip == j)
                    {
                        model.linkages[&j.finger()].coupling_slope(0.0).unwrap_or(1.0)
                    } else {
                        0.0
                    };
                    c += factor * f64::from(s.sign) * s.moment_arm_mm * std::f64::consts::PI / 180.0;
                }
                coefficients.push(c);
            }
            cables.insert(route.cable, CablePolynomial { joints, exponents, coefficients });
        }
        CalibrationMap { degree: 1, cables, fit_rms_mm: 0.0, sample_count: 0 }
    }

    pub fn predict(&self, cable: CableId, q: &JointVector) -> Option<f64> {
        self.cables.get(&cable).map(|p| p.predict(q))
    }
}

/// Independent joints that determine a cable's excursion.
fn route_inputs(model: &HandModel, cable: CableId) -> Vec<JointId> {
    let route = model.route(cable).expect("validated model routes every cable");
    let mut out: Vec<JointId> = Vec::new();
    for s in &route.segments {
        let j = if is_free_joint(model, s.joint) {
            s.joint
        } else if let Some((pip, dip)) = JointId::linkage_pair(s.joint.finger()) {
            if dip == s.joint { pip } else { continue }
        } else {
            continue;
        };
        if !out.contains(&j) {
            out.push(j);
        }
    }
    out
}

/// All exponent vectors over `k` variables with total degree ≤ `degree`,
/// in graded lexicographic order.
fn monomials(k: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut cur = vec![0; k];
        fill(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, remaining: u32) {
    if pos + 1 >= cur.len() {
        if let Some(k) = cur.len().checked_sub(1) {
            cur[k] = remaining;
            out.push(cur.clone());
            cur[k] = 0;
        } else if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for p in (0..=remaining).rev() {
        cur[pos] = p;
        fill(out, cur, pos + 1, remaining - p);
    }
    cur[pos] = 0;
}

/// Least-squares polynomial fit of every cable's excursion, observed with
/// additive Gaussian noise of standard deviation `noise_sd_mm`.
pub fn calibrate(
    model: &HandModel,
    grid: &SampleGrid,
    degree: u32,
    noise_sd_mm: f64,
    seed: u64,
) -> Result<CalibrationMap, CalibrationError> {
    if !(noise_sd_mm >= 0.0 && noise_sd_mm.is_finite()) {
        return Err(CalibrationError::Invalid(format!("noise sd {noise_sd_mm} mm")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd_mm).map_err(|e| CalibrationError::Invalid(e.to_string()))?;

    let mut order: Vec<usize> = (0..grid.samples.len()).collect();
    order.shuffle(&mut rng);
    let n_train = (grid.samples.len() * 4).div_ceil(5);
    let (train, test) = order.split_at(n_train);

    let mut cables = BTreeMap::new();
    let mut sq_sum = 0.0;
    let mut sq_count = 0usize;
    for route in &model.cables {
        let joints = route_inputs(model, route.cable);
        let exponents = monomials(joints.len(), degree);
        let mut poly = CablePolynomial { joints, exponents, coefficients: Vec::new() };
        let observed: Vec<f64> = grid
            .samples
            .iter()
            .map(|q| excursion(route, q) + if noise_sd_mm > 0.0 { noise.sample(&mut rng) } else { 0.0 })
            .collect();

        let terms = poly.exponents.len();
        let mut a = DMatrix::zeros(train.len(), terms);
        let mut b = DVector::zeros(train.len());
        for (r, &i) in train.iter().enumerate() {
            for (c, f) in poly.features(&grid.samples[i]).into_iter().enumerate() {
                a[(r, c)] = f;
            }
            b[r] = observed[i];
        }
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|&&s| s > smax * 1e-10 && s > 0.0).count();
        if rank < terms || train.len() < terms {
            return Err(CalibrationError::RankDeficient {
                cable: route.cable,
                rank,
                terms,
                samples: train.len(),
            });
        }
        let x = svd.solve(&b, smax * 1e-12).map_err(|e| CalibrationError::Invalid(e.to_string()))?;
        poly.coefficients = x.iter().copied().collect();

        for &i in test {
            let r = poly.predict(&grid.samples[i]) - observed[i];
            sq_sum += r * r;
            sq_count += 1;
        }
        cables.insert(route.cable, poly);
    }
    if sq_count == 0 {
        return Err(CalibrationError::Invalid("no held-out samples; use at least 2 poses".into()));
    }
    Ok(CalibrationMap {
        degree,
        cables,
        fit_rms_mm: (sq_sum / sq_count as f64).sqrt(),
        sample_count: grid.samples.len(),
    })
}
