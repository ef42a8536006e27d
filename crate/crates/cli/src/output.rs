//! Atomic artifact writes: each file is written to a temporary sibling and
//! renamed into place, so readers never see a partial file.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

pub struct OutDir {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl OutDir {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(OutDir { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        {
            let mut w = BufWriter::new(tmp.as_file());
            body(&mut w)?;
            w.flush()?;
        }
        tmp.as_file().sync_all()?;
        let path = self.dir.join(name);
        tmp.persist(&path).map_err(|e| CliError::Io(e.error))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    /// CSV with a fixed header; each row is already formatted field by field.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        self.write(name, |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(header)?;
            for r in rows {
                c.write_record(r)?;
            }
            c.flush()?;
            Ok(())
        })
    }
}
