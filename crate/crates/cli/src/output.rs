//! Writes bundles to disk under deterministic names.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::config::{config_hash, emit_config};
use crate::runner::{ResultBundle, Table};

#[derive(Debug, Error)]
#[error("{path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    pub const ALL: Formats = Formats {
        csv: true,
        json: true,
        svg: true,
    };
}

impl FromStr for Formats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut f = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "csv" => f.csv = true,
                "json" => f.json = true,
                "svg" => f.svg = true,
                other => return Err(format!("unknown format `{other}` (expected csv, json, svg)")),
            }
        }
        Ok(f)
    }
}

/// `<kind>-<seed>-<config hash>`
pub fn file_stem(bundle: &ResultBundle) -> String {
    format!(
        "{}-{}-{:016x}",
        bundle.config.experiment.kind(),
        bundle.config.system.seed,
        config_hash(&bundle.config)
    )
}

pub fn table_csv(t: &Table) -> String {
    let mut s = t.columns.join(",");
    s.push('\n');
    for row in &t.rows {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            write!(s, "{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, OutputError> {
    std::fs::write(&path, contents).map_err(|source| OutputError {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// The resolved configuration is always written; tables, the JSON bundle
/// and figures only in the requested formats.
pub fn emit_outputs(bundle: &ResultBundle, formats: Formats, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError {
        path: dir.to_path_buf(),
        source,
    })?;
    let stem = file_stem(bundle);
    let mut written = vec![write(dir.join(format!("{stem}.toml")), &emit_config(&bundle.config))?];
    if formats.json {
        let json = serde_json::to_string_pretty(bundle).expect("bundles always serialize");
        written.push(write(dir.join(format!("{stem}.json")), &json)?);
    }
    if formats.csv {
        for t in &bundle.tables {
            written.push(write(dir.join(format!("{stem}-{}.csv", t.name)), &table_csv(t))?);
        }
    }
    if formats.svg {
        for f in &bundle.figures {
            written.push(write(dir.join(format!("{stem}-{}.svg", f.name)), &f.svg)?);
        }
    }
    Ok(written)
}
