//! Command scripts and run tables for `simulate` and `plot`.
//!
//! A script is a CSV file with one row per step. Recognized columns are the
//! eight cable names (mm reeled in), `Index.MCP.AbdAdd` (deg) and `force_n`
//! (palmar index fingertip load, N). A blank cell keeps the previous value.
//!
//! A run table has columns `step`, the 20 joint ids (deg), `tension_<cable>`
//! for each cable (N), `energy` (N·mm) and `posture_class` (A–F).

use std::collections::BTreeMap;

use catch_core::control::{classify_posture, PostureClass};
use catch_core::hand_model::{CableId, CableValues, Drive, Finger, HandModel, JointId, JointVector};
use catch_core::statics::{solve_equilibrium, EquilibriumProblem, ExternalForce};
use catch_service::MAX_CABLE_TRAVEL_MM;

use crate::CliError;

pub const FORCE_COLUMN: &str = "force_n";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScriptStep {
    pub cables: Vec<(CableId, f64)>,
    pub direct: Vec<(JointId, f64)>,
    pub force_n: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub step: usize,
    pub q: JointVector,
    pub tensions: CableValues,
    pub energy: f64,
    pub class: PostureClass,
}

enum Column {
    Cable(CableId),
    Direct(JointId),
    Force,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

pub fn parse_script(text: &str, model: &HandModel) -> Result<Vec<ScriptStep>, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| invalid(format!("script header: {e}")))?.clone();
    let mut columns = Vec::new();
    for h in &headers {
        let column = if h == FORCE_COLUMN {
            Column::Force
        } else if let Ok(c) = h.parse::<CableId>() {
            Column::Cable(c)
        } else if let Ok(j) = h.parse::<JointId>() {
            if model.joint(j).drive != Drive::DirectServo {
                return Err(invalid(format!("script column `{h}` is not a servo-driven joint")));
            }
            Column::Direct(j)
        } else {
            return Err(invalid(format!("unknown script column `{h}`")));
        };
        columns.push(column);
    }
    let mut steps = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| invalid(format!("script row {}: {e}", row + 1)))?;
        let mut step = ScriptStep::default();
        for (column, cell) in columns.iter().zip(record.iter()) {
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| invalid(format!("script row {}: `{cell}` is not a number", row + 1)))?;
            if !v.is_finite() {
                return Err(invalid(format!("script row {}: `{cell}` is not finite", row + 1)));
            }
            match *column {
                Column::Cable(c) => {
                    if v.abs() > MAX_CABLE_TRAVEL_MM {
                        return Err(invalid(format!("script row {}: {c} = {v} mm exceeds ±{MAX_CABLE_TRAVEL_MM} mm", row + 1)));
                    }
                    step.cables.push((c, v));
                }
                Column::Direct(j) => {
                    let spec = model.joint(j);
                    if !spec.contains(v) {
                        return Err(invalid(format!(
                            "script row {}: {j} = {v}° is outside its range [{}°, {}°]",
                            row + 1,
                            spec.min_deg,
                            spec.max_deg
                        )));
                    }
                    step.direct.push((j, v));
                }
                Column::Force => {
                    if v < 0.0 {
                        return Err(invalid(format!("script row {}: force {v} N is negative", row + 1)));
                    }
                    step.force_n = Some(v);
                }
            }
        }
        steps.push(step);
    }
    Ok(steps)
}

/// Solves each step from the previous equilibrium. Rows are returned even
/// when a solve stops at the iteration cap; the second value lists those
/// steps.
pub fn simulate(model: &HandModel, script: &[ScriptStep], eps_deg: f64) -> Result<(Vec<RunRow>, Vec<usize>), CliError> {
    let mut commands = CableValues::zeros();
    let mut direct = BTreeMap::new();
    let mut force = 0.0;
    let mut q = model.rest_pose();
    let mut rows = Vec::with_capacity(script.len());
    let mut stalled = Vec::new();
    for (step, s) in script.iter().enumerate() {
        for &(c, v) in &s.cables {
            commands[c] = v;
        }
        for &(j, v) in &s.direct {
            direct.insert(j, v);
        }
        if let Some(f) = s.force_n {
            force = f;
        }
        let mut problem = EquilibriumProblem::new(model).with_commands(commands);
        problem.direct_joints = direct.clone();
        if force > 0.0 {
            problem.external_force = Some(ExternalForce::palmar(Finger::Index, force));
        }
        let r = solve_equilibrium(&problem, &q).map_err(|e| invalid(format!("step {step}: {e}")))?;
        if !r.converged {
            stalled.push(step);
        }
        q = r.q_star;
        rows.push(RunRow {
            step,
            q,
            tensions: r.cable_tensions,
            energy: r.energy,
            class: classify_posture(&q, force > 0.0, eps_deg),
        });
    }
    Ok((rows, stalled))
}

fn header() -> Vec<String> {
    let mut h = vec!["step".to_string()];
    h.extend(JointId::ALL.iter().map(|j| j.to_string()));
    h.extend(CableId::ALL.iter().map(|c| format!("tension_{c}")));
    h.push("energy".into());
    h.push("posture_class".into());
    h
}

pub fn write_run_csv(rows: &[RunRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header()).expect("in-memory write");
    for r in rows {
        let mut rec = vec![r.step.to_string()];
        rec.extend(r.q.0.iter().map(|v| v.to_string()));
        rec.extend(r.tensions.0.iter().map(|v| v.to_string()));
        rec.push(r.energy.to_string());
        rec.push(r.class.to_string());
        w.write_record(rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

pub fn read_run_csv(text: &str) -> Result<Vec<RunRow>, CliError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let got: Vec<String> = reader.headers().map_err(|e| invalid(format!("run header: {e}")))?.iter().map(String::from).collect();
    if got != header() {
        return Err(invalid("run table header does not match the run format"));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| invalid(format!("run row {}: {e}", i + 1)))?;
        let num = |k: usize| -> Result<f64, CliError> {
            record[k].parse().map_err(|_| invalid(format!("run row {}: `{}` is not a number", i + 1, &record[k])))
        };
        let mut q = JointVector::zeros();
        for k in 0..q.0.len() {
            q.0[k] = num(1 + k)?;
        }
        let mut tensions = CableValues::zeros();
        let base = 1 + q.0.len();
        for k in 0..tensions.0.len() {
            tensions.0[k] = num(base + k)?;
        }
        let e = base + tensions.0.len();
        rows.push(RunRow {
            step: record[0].parse().map_err(|_| invalid(format!("run row {}: bad step", i + 1)))?,
            q,
            tensions,
            energy: num(e)?,
            class: record[e + 1].parse().map_err(|m: String| invalid(format!("run row {}: {m}", i + 1)))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use catch_core::hand_model::default_catch919;

    #[test]
    fn script_blank_cells_carry_over() {
        let m = default_catch919();
        let s = parse_script("IndexBL,force_n\n3,\n,2\n", &m).unwrap();
        assert_eq!(s[0].cables, vec![(CableId::IndexBL, 3.0)]);
        assert_eq!(s[1].force_n, Some(2.0));
        assert!(s[1].cables.is_empty());
    }

    #[test]
    fn script_rejects_unknown_columns_and_ranges() {
        let m = default_catch919();
        assert!(parse_script("Bogus\n1\n", &m).is_err());
        assert!(parse_script("Index.PIP.FlexExt\n1\n", &m).is_err());
        assert!(parse_script("Index.MCP.AbdAdd\n45\n", &m).is_err());
        assert!(parse_script("force_n\n-1\n", &m).is_err());
    }

    #[test]
    fn run_table_round_trips() {
        let m = default_catch919();
        let steps = parse_script("IndexBL,IndexPL\n0,0\n4,1\n", &m).unwrap();
        let (rows, stalled) = simulate(&m, &steps, 5.0).unwrap();
        assert!(stalled.is_empty());
        let text = write_run_csv(&rows);
        assert_eq!(read_run_csv(&text).unwrap(), rows);
    }
}
