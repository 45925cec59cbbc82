//! Report rendering (CSV and Markdown), run manifests and atomic output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ml::EvalReport;
use crate::ranking::RankingTable;
use crate::stats::CorrelationReport;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Ordered `key=value` lines describing a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.render().as_bytes())
    }

    /// Parses the rendered form back.
    pub fn parse(text: &str) -> Manifest {
        Manifest {
            entries: text
                .lines()
                .filter_map(|l| l.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

/// Named output files plus the manifest they were produced under.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub manifest: Manifest,
    pub files: Vec<(String, Vec<u8>)>,
}

pub const MANIFEST_FILE: &str = "run-manifest.txt";

impl Bundle {
    pub fn new(manifest: Manifest) -> Self {
        Bundle {
            manifest,
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents.into_bytes()));
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Writes every report and the manifest into `dir`, each atomically.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            write_atomic(&path, bytes)?;
            written.push(path);
        }
        let path = dir.join(MANIFEST_FILE);
        write_atomic(&path, self.manifest.render().as_bytes())?;
        written.push(path);
        Ok(written)
    }
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn csv_preamble(manifest_hash: &str) -> String {
    format!("# manifest-sha256: {manifest_hash}\n")
}

fn md_footer(manifest_hash: &str) -> String {
    format!("\nManifest SHA-256: `{manifest_hash}`\n")
}

pub fn correlations_csv(report: &CorrelationReport, manifest_hash: &str) -> String {
    let mut out = csv_preamble(manifest_hash);
    out.push_str("metric,rho\n");
    for (m, rho) in &report.entries {
        let _ = writeln!(out, "{m},{rho}");
    }
    out
}

pub fn correlations_full_csv(report: &CorrelationReport, manifest_hash: &str) -> String {
    let mut out = csv_preamble(manifest_hash);
    out.push_str("metric,rho,above_threshold,skipped\n");
    for e in &report.full {
        let rho = e.rho.map(|r| r.to_string()).unwrap_or_default();
        let above = e.rho.is_some_and(|r| r.abs() >= report.threshold);
        let skipped = e.skipped.as_deref().unwrap_or("").replace(',', ";");
        let _ = writeln!(out, "{},{rho},{above},{skipped}", e.metric);
    }
    out
}

pub fn correlations_md(report: &CorrelationReport, manifest_hash: &str) -> String {
    let mut out = format!(
        "# Spearman correlation with {}\n\nPopulation: {} ({} records). Threshold: |rho| >= {}.\n\n| Metric | Coefficient |\n|---|---|\n",
        report.target,
        report.population.as_str(),
        report.population_size,
        report.threshold
    );
    for (m, rho) in &report.entries {
        let _ = writeln!(out, "| {m} | {rho:.6} |");
    }
    out.push_str("\n## All independent variables\n\n| Metric | Coefficient |\n|---|---|\n");
    for e in &report.full {
        match (e.rho, &e.skipped) {
            (Some(r), _) => {
                let _ = writeln!(out, "| {} | {r:.6} |", e.metric);
            }
            (None, reason) => {
                let _ = writeln!(out, "| {} | skipped: {} |", e.metric, reason.as_deref().unwrap_or(""));
            }
        }
    }
    out.push_str(&md_footer(manifest_hash));
    out
}

pub fn classification_csv(report: &EvalReport, manifest_hash: &str) -> String {
    let mut out = csv_preamble(manifest_hash);
    out.push_str("classifier,accuracy,precision,recall,f_measure,auc,tp,tn,fp,fn\n");
    for c in &report.classifiers {
        let k = &c.confusion;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.kind, c.accuracy, c.precision, c.recall, c.f_measure, c.auc, k.tp, k.tn, k.fp, k.fn_
        );
    }
    out
}

pub fn classification_md(report: &EvalReport, manifest_hash: &str) -> String {
    let mut out = format!(
        "# Classification results\n\n{}-fold stratified cross-validation, seed {}. Precision, recall and F-measure are class-weighted; AUC is over pooled out-of-fold scores.\n\n| Classifier | Accuracy | Precision | Recall | F-Measure | AUC |\n|---|---|---|---|---|---|\n",
        report.folds, report.seed
    );
    for c in &report.classifiers {
        let _ = writeln!(
            out,
            "| {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.3} |",
            c.kind.title(),
            c.accuracy,
            c.precision,
            c.recall,
            c.f_measure,
            c.auc
        );
    }
    out.push_str(&md_footer(manifest_hash));
    out
}

fn max_rows(tables: &[RankingTable], top: usize) -> usize {
    tables.iter().map(|t| t.entries.len()).max().unwrap_or(0).min(top)
}

pub fn ranking_csv(tables: &[RankingTable], top: usize, manifest_hash: &str) -> String {
    let mut out = csv_preamble(manifest_hash);
    out.push_str("rank");
    for t in tables {
        let _ = write!(out, ",{a},{a}_score", a = t.algorithm.short());
    }
    out.push('\n');
    for r in 0..max_rows(tables, top) {
        let _ = write!(out, "{}", r + 1);
        for t in tables {
            match t.entries.get(r) {
                Some((m, s)) => {
                    let _ = write!(out, ",{m},{s}");
                }
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn ranking_md(tables: &[RankingTable], top: usize, manifest_hash: &str) -> String {
    let mut out = String::from("# Feature ranking\n\n| Rank |");
    for t in tables {
        let _ = write!(out, " {} |", t.algorithm.title());
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(tables.len()));
    out.push('\n');
    for r in 0..max_rows(tables, top) {
        let _ = write!(out, "| {} |", r + 1);
        for t in tables {
            match t.entries.get(r) {
                Some((m, s)) => {
                    let _ = write!(out, " {m} ({s:.4}) |");
                }
                None => out.push_str("  |"),
            }
        }
        out.push('\n');
    }
    out.push_str(&md_footer(manifest_hash));
    out
}
