use std::fs;
use std::path::Path;

use qrecompile::recompiler::RecompileRow;

use crate::error::CliError;

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: impl IntoIterator<Item = S>) -> Self {
        let mut csv = Self::default();
        csv.push_row(header.into_iter().map(|s| s.as_ref().to_string()));
        csv
    }

    pub fn push_row(&mut self, fields: impl IntoIterator<Item = String>) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.text)
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn param_names(n: usize) -> impl Iterator<Item = String> {
    (0..n).map(|k| format!("p{k}"))
}

/// Trace of a recompilation or elimination run.
pub fn recompile_csv(rows: &[RecompileRow<f64>], with_removals: bool) -> Csv {
    let n = rows.first().map_or(0, |r| r.params.len());
    let mut header: Vec<String> = ["iteration", "energy", "bound", "fidelity", "ansatz_fidelity", "stage"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if with_removals {
        header.push("removed".into());
    }
    header.extend(param_names(n));
    let mut csv = Csv::new(header);
    for r in rows {
        let mut fields = vec![
            r.iteration.to_string(),
            float(r.energy),
            float(r.bound),
            float(r.fidelity),
            float(r.ansatz_fidelity),
            float(r.stage),
        ];
        if with_removals {
            fields.push(r.removed.map_or_else(String::new, |k| k.to_string()));
        }
        fields.extend(r.params.iter().map(|p| float(*p)));
        csv.push_row(fields);
    }
    csv
}
