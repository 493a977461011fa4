//! CSV writers. Payload rows are deterministic; wall times and other
//! run-dependent values only appear in `#` comment lines above the header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};

pub struct Table {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl Table {
    /// Creates `dir/name` with the given comment lines and column header.
    pub fn create(dir: &Path, name: &str, comments: &[String], header: &[&str]) -> Result<Table> {
        let path = dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut buf = BufWriter::new(file);
        for c in comments {
            writeln!(buf, "# {c}")?;
        }
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(header)?;
        Ok(Table { path, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).with_context(|| format!("writing {}", self.path.display()))
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().with_context(|| format!("writing {}", self.path.display()))?;
        Ok(self.path)
    }
}

/// Writes `dir/name` through a raw writer callback.
pub fn write_with<F>(dir: &Path, name: &str, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut buf = BufWriter::new(file);
    f(&mut buf).and_then(|_| buf.flush()).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn num(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn secs(d: Duration) -> String {
    format!("wall_time_s = {:.6}", d.as_secs_f64())
}
