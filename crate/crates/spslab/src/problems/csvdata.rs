//! Loader for external `y,x1..xd` datasets: header row, comma-separated,
//! first column the target, remaining columns the features.

use std::path::Path;

use crate::{Error, ParamVector, Result};

pub fn load_xy_csv(path: &Path) -> Result<(Vec<ParamVector>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Invalid(format!("cannot open {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: line + 2,
            msg: e.to_string(),
        })?;
        if record.len() < 2 {
            return Err(Error::Parse {
                line: line + 2,
                msg: "need a target column and at least one feature".into(),
            });
        }
        let mut values = Vec::with_capacity(record.len());
        for field in record.iter() {
            values.push(field.parse::<f64>().map_err(|e| Error::Parse {
                line: line + 2,
                msg: format!("bad number `{field}`: {e}"),
            })?);
        }
        targets.push(values[0]);
        rows.push(ParamVector::from_vec(values[1..].to_vec()));
    }
    if rows.is_empty() {
        return Err(Error::Invalid(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Invalid("ragged feature rows".into()));
    }
    Ok((rows, targets))
}
