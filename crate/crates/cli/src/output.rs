//! Atomic CSV output and metadata sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// A CSV field. Floats use the shortest representation that round-trips,
/// switching to exponent notation for very large or small magnitudes.
pub enum Field<'a> {
    F(f64),
    U(usize),
    S(&'a str),
}

impl Field<'_> {
    fn render(&self) -> String {
        match self {
            Field::F(v) => format!("{v:?}"),
            Field::U(v) => v.to_string(),
            Field::S(s) => s.to_string(),
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Output(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::Output(format!("{}: {e}", path.display())));
    }
    Ok(())
}

/// Renders a CSV document with the given header.
pub fn csv_bytes<'a, I>(header: &[&str], rows: I) -> CliResult<Vec<u8>>
where
    I: IntoIterator<Item = Vec<Field<'a>>>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(CliError::Output(format!(
                "row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(Field::render))?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

/// Writes a CSV file atomically.
pub fn write_csv<'a, I>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<Field<'a>>>,
{
    write_atomic(path, &csv_bytes(header, rows)?)
}

/// Output files of one command run, plus a sidecar describing them.
pub struct Outputs {
    dir: PathBuf,
    command: &'static str,
    files: Vec<String>,
    notes: Vec<(String, String)>,
}

impl Outputs {
    pub fn new(cfg: &RunConfig, command: &'static str) -> Self {
        Self {
            dir: cfg.out_dir.clone(),
            command,
            files: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv<'a, I>(&mut self, name: &str, header: &[&str], rows: I) -> CliResult<PathBuf>
    where
        I: IntoIterator<Item = Vec<Field<'a>>>,
    {
        let path = self.path(name);
        write_csv(&path, header, rows)?;
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn text(&mut self, name: &str, body: &str) -> CliResult<PathBuf> {
        let path = self.path(name);
        write_atomic(&path, body.as_bytes())?;
        self.files.push(name.to_string());
        Ok(path)
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    /// Writes `<command>.meta` with the tool version, the resolved config,
    /// run notes and the files produced. Contains no timestamps.
    pub fn finish(self, cfg: &RunConfig) -> CliResult<PathBuf> {
        let mut body = String::new();
        body.push_str(&format!("tool = foldwave {}\n", env!("CARGO_PKG_VERSION")));
        body.push_str(&format!("command = {}\n", self.command));
        for f in &self.files {
            body.push_str(&format!("file = {f}\n"));
        }
        body.push_str("\n[config]\n");
        for (k, v) in cfg.entries() {
            body.push_str(&format!("{k} = {v}\n"));
        }
        if !self.notes.is_empty() {
            body.push_str("\n[run]\n");
            for (k, v) in &self.notes {
                body.push_str(&format!("{k} = {v}\n"));
            }
        }
        let path = self.dir.join(format!("{}.meta", self.command));
        write_atomic(&path, body.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let vals = [0.1, 1.0 / 3.0, -2.5e-300, 1e22, std::f64::consts::PI];
        let bytes = csv_bytes(&["x"], vals.iter().map(|&v| vec![Field::F(v)])).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let back: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
        assert_eq!(back, vals);
        assert!(text.starts_with("x\n"));
    }

    #[test]
    fn row_width_is_checked() {
        assert!(csv_bytes(&["a", "b"], [vec![Field::U(1)]]).is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("f.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        let leftovers = fs::read_dir(p.parent().unwrap()).unwrap().count();
        assert_eq!(leftovers, 1);
    }
}
