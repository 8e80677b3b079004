use std::fs::File;
use std::path::Path;

use taulasso::Dataset;

use crate::error::CliError;

/// Reads a dataset whose header starts with `y`, followed by the predictor
/// names. Every cell must be a finite number.
pub fn read_dataset(path: &Path) -> Result<(Dataset, Vec<String>), CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let where_ = |line: u64| format!("{}:{line}", path.display());

    let header = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .clone();
    if header.is_empty() || &header[0] != "y" {
        return Err(CliError::Input(format!("{}: first column must be named 'y'", where_(1))));
    }
    if header.len() < 2 {
        return Err(CliError::Input(format!("{}: no predictor columns", where_(1))));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();

    let mut y = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Input(format!("{}: {e}", where_(line)))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut values = Vec::with_capacity(record.len());
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Input(format!(
                    "{}, column {} ('{}'): '{cell}' is not a number",
                    where_(line),
                    col + 1,
                    &header[col]
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Input(format!(
                    "{}, column {} ('{}'): value must be finite",
                    where_(line),
                    col + 1,
                    &header[col]
                )));
            }
            values.push(v);
        }
        y.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    let data = Dataset::from_rows(y, &rows).map_err(CliError::from)?;
    Ok((data, names))
}
