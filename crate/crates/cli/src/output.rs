//! Tables go to `<out>/<name>.csv`, or to stdout when no directory is
//! given. Verdict documents are only written with `--out`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> Result<Self, CliError> {
        if let Some(d) = dir {
            fs::create_dir_all(d)?;
        }
        Ok(Sink { dir: dir.map(Path::to_path_buf) })
    }

    /// Writes a header row and records. `primary` tables are echoed to
    /// stdout when there is no output directory; the rest are dropped.
    pub fn table(&self, name: &str, header: &[&str], rows: &[Vec<String>], primary: bool) -> Result<(), CliError> {
        let out: Box<dyn Write> = match &self.dir {
            Some(d) => Box::new(io::BufWriter::new(fs::File::create(d.join(format!("{name}.csv")))?)),
            None if primary => Box::new(io::stdout().lock()),
            None => return Ok(()),
        };
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn document<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            let mut text = serde_json::to_string_pretty(value).map_err(mdpkit::Error::from)?;
            text.push('\n');
            fs::write(d.join(format!("{name}.json")), text)?;
        }
        Ok(())
    }
}

pub fn cell(x: impl ToString) -> String {
    x.to_string()
}

pub fn set(items: &[usize]) -> String {
    items.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}
