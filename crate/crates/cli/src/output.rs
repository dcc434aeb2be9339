//! CSV tables with `#` metadata lines, JSON documents and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub name: String,
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        s.push_str(&self.header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// CSV cell text. Floats use the shortest round-trip form, switching to
/// exponent notation for very small or large magnitudes.
pub trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        format!("{self:?}")
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
display_cell!(usize, i32, i64, u64, bool, str, String);

impl<T: Cell + ?Sized> Cell for &T {
    fn cell(&self) -> String {
        (**self).cell()
    }
}

/// Formats a row of mixed cells.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::cell(&$x)),*] };
}

pub enum Artifact {
    Csv(Table),
    Json { name: String, value: Value },
    Text { name: String, content: String },
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self> {
        Ok(Artifact::Json {
            name: name.to_string(),
            value: serde_json::to_value(value)?,
        })
    }

    fn file_name(&self) -> String {
        match self {
            Artifact::Csv(t) => format!("{}.csv", t.name),
            Artifact::Json { name, .. } => format!("{name}.json"),
            Artifact::Text { name, .. } => name.clone(),
        }
    }

    fn bytes(&self) -> Result<Vec<u8>> {
        Ok(match self {
            Artifact::Csv(t) => t.render().into_bytes(),
            Artifact::Json { value, .. } => {
                let mut v = serde_json::to_vec_pretty(value)?;
                v.push(b'\n');
                v
            }
            Artifact::Text { content, .. } => content.clone().into_bytes(),
        })
    }
}

pub fn hex_digest(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// Single collector: artifacts are written one at a time, in the order produced.
pub struct Output {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, artifact: Artifact) -> Result<()> {
        let name = artifact.file_name();
        let bytes = artifact.bytes()?;
        fs::write(self.dir.join(&name), &bytes)?;
        self.files.push((name, hex_digest(&bytes)));
        Ok(())
    }

    pub fn write_all(&mut self, artifacts: Vec<Artifact>) -> Result<()> {
        artifacts.into_iter().try_for_each(|a| self.write(a))
    }

    /// Writes manifest.json: config echo, input hash, wall time and file digests.
    pub fn finish(self, command: &str, config: &Value, seed: u64, wall: Duration) -> Result<PathBuf> {
        let input = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": config,
            "seed": seed,
        });
        let hash = hex_digest(&serde_json::to_vec(&input)?);
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|(n, h)| json!({ "name": n, "sha256": h }))
            .collect();
        let manifest = json!({
            "tool": "magnon",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config": config,
            "seed": seed,
            "input_hash": hash,
            "wall_time_s": wall.as_secs_f64(),
            "files": files,
        });
        let path = self.dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes)?;
        Ok(path)
    }
}
