use std::path::Path;

use serde::Serialize;

use crate::error::{LabError, LabResult};

/// Writes `rows` as CSV with a header taken from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> LabResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => LabError::io(path.display().to_string(), io),
        other => LabError::Invalid(format!("{other:?}")),
    })?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| LabError::io(path.display().to_string(), e))
}
