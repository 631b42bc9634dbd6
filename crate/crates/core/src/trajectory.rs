//! Subject histories and their long-format CSV representation.

use crate::design::ModelMode;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// One follow-up visit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitRecord {
    /// Recommended months until this visit.
    pub a: f64,
    /// Actual elapsed months since the previous visit.
    pub delta: f64,
    /// Recorded response.
    pub y: f64,
    /// Latent response before censoring (extended mode, bookkeeping).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_latent: Option<f64>,
    /// True when the response was carried forward from the previous visit.
    #[serde(default)]
    pub carried_forward: bool,
}

/// One subject's history: baseline covariates and response plus visits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub covariates: Vec<f64>,
    pub y0: f64,
    pub visits: Vec<VisitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<u32>,
}

impl Trajectory {
    pub fn p(&self) -> usize {
        self.covariates.len()
    }

    /// Cumulative calendar time at each visit.
    pub fn cumulative_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.visits
            .iter()
            .map(|v| {
                t += v.delta;
                t
            })
            .collect()
    }

    pub fn total_time(&self) -> f64 {
        self.visits.iter().map(|v| v.delta).sum()
    }

    /// Response at the previous visit (baseline for the first visit).
    pub fn y_prev(&self, visit_idx: usize) -> f64 {
        if visit_idx == 0 {
            self.y0
        } else {
            self.visits[visit_idx - 1].y
        }
    }

    /// Check the structural invariants for the given mode.
    pub fn validate(&self, mode: ModelMode) -> Result<()> {
        for (t, v) in self.visits.iter().enumerate() {
            if !(v.delta > 0.0) {
                return Err(Error::domain(format!("visit {t}: delta {} not positive", v.delta)));
            }
            if !(v.a > 0.0) {
                return Err(Error::domain(format!("visit {t}: recommendation {} not positive", v.a)));
            }
            if v.carried_forward && v.y != self.y_prev(t) {
                return Err(Error::domain(format!(
                    "visit {t}: carried_forward but y {} != previous {}",
                    v.y,
                    self.y_prev(t)
                )));
            }
            if mode == ModelMode::Extended && !(0.0..=1.0).contains(&v.y) {
                return Err(Error::domain(format!("visit {t}: y {} outside [0,1]", v.y)));
            }
        }
        if mode == ModelMode::Extended && !(0.0..=1.0).contains(&self.y0) {
            return Err(Error::domain(format!("baseline y0 {} outside [0,1]", self.y0)));
        }
        Ok(())
    }
}

/// Write trajectories in the long CSV format:
/// `subject_id,visit_index,X_1..X_p,A,delta,Y,carried_forward`,
/// baseline rows (visit_index 0) with empty A/delta.
pub fn write_csv<W: Write>(out: W, trajectories: &[Trajectory]) -> Result<()> {
    let p = trajectories.first().map(|t| t.p()).unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["subject_id".to_string(), "visit_index".to_string()];
    for j in 1..=p {
        header.push(format!("X_{j}"));
    }
    header.extend(["A", "delta", "Y", "carried_forward"].map(str::to_string));
    w.write_record(&header)?;

    for (sid, traj) in trajectories.iter().enumerate() {
        if traj.p() != p {
            return Err(Error::dim(format!(
                "subject {sid} has {} covariates, expected {p}",
                traj.p()
            )));
        }
        let xcols: Vec<String> = traj.covariates.iter().map(|x| format!("{x}")).collect();
        let mut row = vec![sid.to_string(), "0".to_string()];
        row.extend(xcols.iter().cloned());
        row.extend(["".into(), "".into(), format!("{}", traj.y0), "".into()]);
        w.write_record(&row)?;
        for (t, v) in traj.visits.iter().enumerate() {
            let mut row = vec![sid.to_string(), (t + 1).to_string()];
            row.extend(xcols.iter().cloned());
            row.push(format!("{}", v.a));
            row.push(format!("{}", v.delta));
            row.push(format!("{}", v.y));
            row.push(if v.carried_forward { "true" } else { "false" }.into());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_path(path: &std::path::Path, trajectories: &[Trajectory]) -> Result<()> {
    write_csv(std::fs::File::create(path)?, trajectories)
}

/// Read trajectories from the long CSV format.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<Trajectory>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let mut xcols = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if h.starts_with("X_") {
            xcols.push(i);
        }
    }
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::dim(format!("missing column {name}")))
    };
    let c_sid = col("subject_id")?;
    let c_vi = col("visit_index")?;
    let c_a = col("A")?;
    let c_d = col("delta")?;
    let c_y = col("Y")?;
    let c_cf = col("carried_forward")?;

    let mut out: Vec<Trajectory> = Vec::new();
    let mut current_sid: Option<String> = None;
    for rec in r.records() {
        let rec = rec?;
        let sid = rec[c_sid].to_string();
        let vi: usize = rec[c_vi]
            .parse()
            .map_err(|_| Error::domain(format!("bad visit_index {}", &rec[c_vi])))?;
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::domain(format!("bad {what}: {s:?}")))
        };
        if current_sid.as_deref() != Some(sid.as_str()) {
            if vi != 0 {
                return Err(Error::domain(format!(
                    "subject {sid} must start with a baseline row (visit_index 0)"
                )));
            }
            let covariates = xcols
                .iter()
                .map(|&i| parse_f(&rec[i], "covariate"))
                .collect::<Result<Vec<_>>>()?;
            out.push(Trajectory {
                covariates,
                y0: parse_f(&rec[c_y], "Y")?,
                visits: Vec::new(),
                group_id: None,
            });
            current_sid = Some(sid);
        } else {
            let traj = out.last_mut().expect("current trajectory");
            if vi != traj.visits.len() + 1 {
                return Err(Error::domain(format!(
                    "subject {sid}: visit_index {vi} out of order"
                )));
            }
            traj.visits.push(VisitRecord {
                a: parse_f(&rec[c_a], "A")?,
                delta: parse_f(&rec[c_d], "delta")?,
                y: parse_f(&rec[c_y], "Y")?,
                y_latent: None,
                carried_forward: matches!(&rec[c_cf], "true" | "1" | "TRUE"),
            });
        }
    }
    Ok(out)
}

pub fn read_csv_path(path: &std::path::Path) -> Result<Vec<Trajectory>> {
    read_csv(std::fs::File::open(path)?)
}
