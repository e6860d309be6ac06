//! Per-iteration trajectory records and their bit-exact CSV encoding.

use std::path::Path;

use crate::Result;

/// Floats are written in scientific notation with 17 significant digits so
/// values round-trip exactly; non-finite values become `nan`/`inf`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// One trajectory row. Row `t` describes the iterate `x_t` together with
/// the step that leaves it; the final row of a finished run has no step, so
/// its `stepsize` and `loss_batch` are `nan`. `dist_to_opt` is `nan` when
/// the solution is unknown. `cesaro_loss` is the full loss at the running
/// mean of `x_0..x_{t-1}` (at `t = 0` it equals `loss_full`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: usize,
    pub loss_full: f64,
    pub loss_batch: f64,
    pub stepsize: f64,
    pub dist_to_opt: f64,
    pub cesaro_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<TrajectoryRow>,
    pub seed: u64,
    pub config_digest: String,
    /// Set when the run diverged; holds the failure description.
    pub failed: Option<String>,
}

pub const CSV_HEADER: &str = "t,loss_full,loss_batch,stepsize,dist_to_opt,cesaro_loss";

impl RunRecord {
    pub fn new(seed: u64, config_digest: String) -> Self {
        RunRecord {
            rows: Vec::new(),
            seed,
            config_digest,
            failed: None,
        }
    }

    /// Full loss at the last recorded iterate.
    pub fn final_loss(&self) -> Option<f64> {
        self.rows.last().map(|r| r.loss_full)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.t,
                format_f64(row.loss_full),
                format_f64(row.loss_batch),
                format_f64(row.stepsize),
                format_f64(row.dist_to_opt),
                format_f64(row.cesaro_loss)
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}
