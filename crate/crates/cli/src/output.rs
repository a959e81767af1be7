use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use crate::error::CliError;

/// 17 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        // normalise -0
        format!("{:.16e}", x + 0.0)
    }
}

/// CSV fields never contain commas or quotes except in free-text reasons.
pub fn text(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

pub fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(path) => {
            let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_csv(out: &Option<PathBuf>, header: &str, rows: impl IntoIterator<Item = String>) -> Result<(), CliError> {
    let mut w = sink(out)?;
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{row}")?;
    }
    w.flush()?;
    Ok(())
}
