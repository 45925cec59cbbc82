//! End-to-end extraction: source trees in, one [`ClassRecord`] per
//! production/test pair out.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::ast::SyntaxTree;
use super::index::{build_corpus_index, CorpusIndex};
use super::metrics::{code_metrics, compute_test_effort_metrics, ClassView};
use super::parse_source;
use crate::error::{Error, Result};
use crate::model::{ClassRecord, MetricId};

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
}

/// Reads every `.java` file below `roots` in a stable order.
pub fn read_java_sources(roots: &[impl AsRef<Path>]) -> Result<Vec<SourceFile>> {
    let mut out = Vec::new();
    for root in roots {
        let root = root.as_ref();
        if !root.exists() {
            return Err(Error::io(
                root,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
            ));
        }
        for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
            let entry = entry.map_err(|e| {
                let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.to_path_buf());
                Error::io(path, e.into())
            })?;
            let path = entry.path();
            if entry.file_type().is_file() && path.extension().is_some_and(|e| e == "java") {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                out.push(SourceFile {
                    path: path.display().to_string(),
                    text,
                });
            }
        }
    }
    Ok(out)
}

/// Parses all files in parallel; on failure returns every parse error in file order.
pub fn parse_corpus(files: &[SourceFile]) -> std::result::Result<Vec<SyntaxTree>, Vec<Error>> {
    let results: Vec<Result<SyntaxTree>> = files.par_iter().map(|f| parse_source(&f.text, &f.path)).collect();
    let mut trees = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(t) => trees.push(t),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(trees)
    } else {
        Err(errors)
    }
}

/// Parses a pairing file: one `production-class-id,test-class-id` per line.
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split(',').map(str::trim).collect::<Vec<_>>().as_slice() {
            [class, test] if !class.is_empty() && !test.is_empty() => pairs.push((class.to_string(), test.to_string())),
            _ => {
                return Err(Error::InvalidValue(format!(
                    "pairing file line {}: expected `class,test`, found `{line}`",
                    i + 1
                )))
            }
        }
    }
    Ok(pairs)
}

/// Pairs `p.X` with `p.XTest`, or with `p.TestX` when there is no `p.XTest`.
pub fn pair_by_convention(index: &CorpusIndex) -> Vec<(String, String)> {
    let names: BTreeSet<&str> = index.classes().map(|c| c.qualified.as_str()).collect();
    let mut pairs = Vec::new();
    for &q in &names {
        let (pkg, simple) = match q.rsplit_once('.') {
            Some((p, s)) => (format!("{p}."), s),
            None => (String::new(), q),
        };
        let candidates = [format!("{pkg}{simple}Test"), format!("{pkg}Test{simple}")];
        if let Some(test) = candidates.iter().find(|c| names.contains(c.as_str())) {
            pairs.push((q.to_string(), test.clone()));
        }
    }
    pairs
}

#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    /// Explicit pairs; when present they replace the naming convention.
    pub pairs: Option<Vec<(String, String)>>,
    /// NBI per top-level class, from compiled class files.
    pub nbi: Option<BTreeMap<String, u64>>,
}

/// Computes records for every production/test pair, sorted by class id.
pub fn extract_records(trees: Vec<SyntaxTree>, options: &ExtractOptions) -> Result<Vec<ClassRecord>> {
    let mut index = build_corpus_index(trees)?;
    if index.is_empty() {
        return Err(Error::NoClasses);
    }
    let pairs = match &options.pairs {
        Some(p) => {
            for (class, test) in p {
                for id in [class, test] {
                    if index.get(id).is_none() {
                        return Err(Error::InvalidValue(format!("pairing file names unknown class `{id}`")));
                    }
                }
            }
            p.clone()
        }
        None => pair_by_convention(&index),
    };
    if pairs.is_empty() {
        return Err(Error::InvalidValue("no production/test class pairs found".into()));
    }
    let mut seen = BTreeSet::new();
    for (class, test) in &pairs {
        if !seen.insert((class, test)) {
            return Err(Error::InvalidValue(format!("pair ({class}, {test}) listed twice")));
        }
    }
    index.set_test_classes(pairs.iter().map(|(_, t)| t.clone()));
    let index = index;

    let mut records: Vec<ClassRecord> = pairs
        .par_iter()
        .map(|(class, test)| {
            let mut record = ClassRecord::new(class.clone(), test.clone());
            record.metrics = code_metrics(&index, class).expect("pair validated");
            let view = ClassView::from_index(&index, test).expect("pair validated");
            record.metrics.extend(compute_test_effort_metrics(&view));
            if let Some(nbi) = &options.nbi {
                let n = nbi
                    .get(class)
                    .ok_or_else(|| Error::InvalidValue(format!("no class file supplied for `{class}`")))?;
                record.set(MetricId::Nbi, *n as f64);
            }
            Ok(record)
        })
        .collect::<Result<_>>()?;
    records.sort_by(|a, b| (&a.class_id, &a.test_id).cmp(&(&b.class_id, &b.test_id)));
    Ok(records)
}

/// Reads sources, optional class files and an optional pairing file, and extracts records.
pub fn extract_from_paths(
    sources: &[PathBuf],
    classes: &[PathBuf],
    pairs_file: Option<&Path>,
) -> std::result::Result<Vec<ClassRecord>, Vec<Error>> {
    let files = read_java_sources(sources).map_err(|e| vec![e])?;
    let trees = parse_corpus(&files)?;
    let pairs = match pairs_file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| vec![Error::io(p, e)])?;
            Some(parse_pairs(&text).map_err(|e| vec![e])?)
        }
        None => None,
    };
    let nbi = if classes.is_empty() {
        None
    } else {
        let summaries = crate::classfile::read_class_inputs(classes, Default::default()).map_err(|e| vec![e])?;
        Some(crate::classfile::nbi_by_top_level(&summaries))
    };
    extract_records(trees, &ExtractOptions { pairs, nbi }).map_err(|e| vec![e])
}
