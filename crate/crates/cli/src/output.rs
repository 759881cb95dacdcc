//! Output directory locking and atomic artifact writes.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub const LOCK_FILE: &str = ".hitrocket.lock";

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputDir {
    path: PathBuf,
    lock: PathBuf,
}

impl OutputDir {
    pub fn lock(path: &Path) -> Result<Self> {
        fs::create_dir_all(path)?;
        let lock = path.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(Self {
                    path: path.to_path_buf(),
                    lock,
                })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Usage(format!(
                "output directory {} is in use (remove {} if no other run is active)",
                path.display(),
                lock.display()
            ))),
            Err(e) => Err(e.into()),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes `name` through a temporary file so readers never see a partial artifact.
    pub fn write_with<F>(&self, name: &str, f: F) -> Result<()>
    where
        F: FnOnce(&mut File) -> Result<()>,
    {
        let tmp = self.path.join(format!(".{name}.tmp"));
        let result = File::create(&tmp)
            .map_err(CliError::from)
            .and_then(|mut file| {
                f(&mut file)?;
                file.sync_all()?;
                Ok(())
            })
            .and_then(|()| fs::rename(&tmp, self.path.join(name)).map_err(CliError::from));
        if result.is_err() {
            let _ = fs::remove_file(&tmp);
        }
        result
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        self.write_with(name, |f| Ok(f.write_all(bytes)?))
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

/// CSV text from a header and rows of already formatted cells.
pub fn csv_bytes<S: AsRef<str>>(header: &[S], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(header.iter().map(AsRef::as_ref)).map_err(to_err)?;
    for row in rows {
        w.write_record(row).map_err(to_err)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
}
