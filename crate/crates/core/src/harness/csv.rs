//! Plain-text interchange for run records: one row per (record, checkpoint),
//! comma-separated, UTF-8, `.` decimal separator, header required.
//!
//! Floating-point errors are written with 17 significant digits, which is
//! enough to reconstruct every finite double exactly, so export → ingest is
//! lossless. Malformed input is rejected with the line number and column
//! name; duplicate (algorithm, function, run, evaluations) keys are a
//! conflict, not a silent overwrite.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::util::format_g17;

use super::RunRecord;

/// Schema columns, in file order.
pub const CSV_COLUMNS: [&str; 8] = [
    "algorithm",
    "function",
    "dimension",
    "run",
    "evaluations",
    "error",
    "seed",
    "wall_ms",
];

/// Writes records to `path` in the interchange schema.
pub fn export_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(records)?)?;
    Ok(())
}

/// Renders records to CSV text (the pure core of [`export_csv`]).
///
/// Failure diagnostics are not part of the schema and are not written; a
/// record's numeric payload survives the round trip bit for bit.
pub fn render_csv(records: &[RunRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to export".into()));
    }
    let mut out = String::new();
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for record in records {
        for field in [&record.algorithm, &record.function] {
            if field.is_empty() || field.contains(',') || field.contains('\n') || field.contains('\r') {
                return Err(Error::InvalidInput(format!(
                    "id '{field}' cannot be written to CSV"
                )));
            }
        }
        for (evaluations, error) in &record.errors {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                record.algorithm,
                record.function,
                record.dimension,
                record.run,
                evaluations,
                format_g17(*error),
                record.seed,
                record.wall_ms,
            ));
        }
    }
    Ok(out)
}

/// Reads records from a CSV file in the interchange schema.
pub fn ingest_csv(path: &Path) -> Result<Vec<RunRecord>> {
    parse_csv(&std::fs::read_to_string(path)?)
}

/// Gathered while folding rows into one record.
struct PartialRecord {
    dimension: usize,
    seed: u64,
    wall_ms: u64,
    errors: BTreeMap<usize, f64>,
}

/// Parses CSV text into records, sorted by (algorithm, function, run).
/// Columns may appear in any order; every schema column must be present.
pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::CsvParse {
            line: 1,
            column: "algorithm".into(),
            message: "empty file; expected a header row".into(),
        })?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    for name in &names {
        if !CSV_COLUMNS.contains(name) {
            return Err(Error::CsvParse {
                line: 1,
                column: (*name).to_string(),
                message: "unknown column".into(),
            });
        }
    }
    let mut index = [0usize; 8];
    for (i, column) in CSV_COLUMNS.iter().enumerate() {
        index[i] = names.iter().position(|n| n == column).ok_or_else(|| Error::CsvParse {
            line: 1,
            column: (*column).to_string(),
            message: "missing column".into(),
        })?;
    }

    let mut partials: BTreeMap<(String, String, usize), PartialRecord> = BTreeMap::new();
    for (line_index, row) in lines {
        let line = line_index + 1;
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(Error::CsvParse {
                line,
                column: names
                    .get(fields.len())
                    .copied()
                    .unwrap_or("<extra field>")
                    .to_string(),
                message: format!("row has {} fields, expected {}", fields.len(), names.len()),
            });
        }
        let field = |i: usize| fields[index[i]];
        let parse_int = |i: usize| -> Result<u64> {
            field(i).parse::<u64>().map_err(|e| Error::CsvParse {
                line,
                column: CSV_COLUMNS[i].to_string(),
                message: e.to_string(),
            })
        };
        let algorithm = field(0).to_string();
        let function = field(1).to_string();
        for (column, value) in [("algorithm", &algorithm), ("function", &function)] {
            if value.is_empty() {
                return Err(Error::CsvParse {
                    line,
                    column: column.into(),
                    message: "empty id".into(),
                });
            }
        }
        let dimension = parse_int(2)? as usize;
        let run = parse_int(3)? as usize;
        let evaluations = parse_int(4)? as usize;
        let error: f64 = field(5).parse().map_err(|e: std::num::ParseFloatError| {
            Error::CsvParse { line, column: "error".into(), message: e.to_string() }
        })?;
        if !error.is_finite() || error < 0.0 {
            return Err(Error::CsvParse {
                line,
                column: "error".into(),
                message: format!("error must be finite and non-negative, got {error}"),
            });
        }
        let seed = parse_int(6)?;
        let wall_ms = parse_int(7)?;

        let key = (algorithm, function, run);
        let entry = partials.entry(key.clone()).or_insert(PartialRecord {
            dimension,
            seed,
            wall_ms,
            errors: BTreeMap::new(),
        });
        if entry.dimension != dimension || entry.seed != seed || entry.wall_ms != wall_ms {
            return Err(Error::CsvConflict(format!(
                "rows for algorithm={} function={} run={} disagree on dimension/seed/wall_ms",
                key.0, key.1, key.2
            )));
        }
        if entry.errors.insert(evaluations, error).is_some() {
            return Err(Error::CsvConflict(format!(
                "duplicate row for algorithm={} function={} run={} evaluations={evaluations}",
                key.0, key.1, key.2
            )));
        }
    }
    if partials.is_empty() {
        return Err(Error::InvalidInput("CSV contains no data rows".into()));
    }
    Ok(partials
        .into_iter()
        .map(|((algorithm, function, run), partial)| RunRecord {
            algorithm,
            function,
            dimension: partial.dimension,
            run,
            seed: partial.seed,
            errors: partial.errors,
            wall_ms: partial.wall_ms,
            failure: None,
        })
        .collect())
}
