use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::args::Format;
use crate::error::CliError;

/// `format`, or `default`, if `allowed` for `command`.
pub fn resolve_format(
    format: Option<Format>,
    default: Format,
    allowed: &[Format],
    command: &str,
) -> Result<Format, CliError> {
    let f = format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!(
            "{command} does not support --format {f:?}"
        )))
    }
}

/// Runs `write` against `out` or stdout. A file that was not completely
/// written is removed.
pub fn emit<F>(out: Option<&Path>, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match out {
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Some(path) => {
            let result = File::create(path)
                .map_err(|e| CliError::Infrastructure(format!("{}: {e}", path.display())))
                .and_then(|f| {
                    let mut w = BufWriter::new(f);
                    write(&mut w)?;
                    w.flush()?;
                    Ok(())
                });
            if result.is_err() {
                let _ = fs::remove_file(path);
            }
            result
        }
    }
}

pub fn write_json<T: serde::Serialize>(w: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}
