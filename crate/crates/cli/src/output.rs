//! CSV writing and the verdict list every command appends to.

use anyhow::{Context, Result};
use std::path::{Path, PathBuf};

/// Fixed 17-significant-digit form so reruns are byte-identical.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn vector(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

pub struct Table {
    path: PathBuf,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(dir: &Path, file: &str, header: &[&str]) -> Self {
        Table {
            path: dir.join(file),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn write(&self) -> Result<PathBuf> {
        let mut w = csv::Writer::from_path(&self.path).with_context(|| format!("creating {}", self.path.display()))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(self.path.clone())
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub command: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct Verdicts {
    pub checks: Vec<Check>,
}

impl Verdicts {
    pub fn push(&mut self, command: &'static str, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            command,
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self, dir: &Path, file: &str, only_failures: bool) -> Table {
        let mut t = Table::new(dir, file, &["command", "check", "verdict", "detail"]);
        for c in self.checks.iter().filter(|c| !only_failures || !c.pass) {
            t.row(vec![
                c.command.into(),
                c.name.clone(),
                if c.pass { "pass" } else { "fail" }.into(),
                c.detail.clone(),
            ]);
        }
        t
    }
}
