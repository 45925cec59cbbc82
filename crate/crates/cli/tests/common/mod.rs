#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use testlens::dataset::write_records_csv;
use testlens::model::{ClassRecord, MetricId, ValueKind};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_testlens"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn core_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// Records with every independent metric and a mutation score that falls as
/// NBI, RFC and LOC grow; the remaining metrics are noise.
pub fn synthetic_records(n: usize, seed: u64) -> Vec<ClassRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let z: f64 = rng.gen();
            let mut r = ClassRecord::new(format!("p.C{i}"), format!("p.C{i}Test"));
            for m in MetricId::independent() {
                let v = match m.value_kind() {
                    ValueKind::Count => f64::from(rng.gen_range(0u32..40)),
                    ValueKind::NonNegative => (rng.gen_range(0.0..10.0f64) * 8.0).round() / 8.0,
                    ValueKind::Ratio { lo, hi } => lo + (hi - lo) * f64::from(rng.gen_range(0u32..=16)) / 16.0,
                };
                r.set(m, v);
            }
            r.set(
                MetricId::Nbi,
                (z * 2000.0).round() + f64::from(rng.gen_range(0u32..100)),
            );
            r.set(MetricId::Rfc, (z * 60.0).round() + f64::from(rng.gen_range(0u32..8)));
            r.set(MetricId::Loc, (z * 400.0).round() + f64::from(rng.gen_range(0u32..40)));
            let (nmci, nmce) = (f64::from(rng.gen_range(0u32..10)), f64::from(rng.gen_range(0u32..10)));
            r.set(MetricId::Nmci, nmci);
            r.set(MetricId::Nmce, nmce);
            r.set(MetricId::Nmc, nmci + nmce);
            let m = (1.0 - 0.8 * z + rng.gen_range(-0.1..0.1)).clamp(0.0, 1.0);
            r.set(MetricId::MutationScore, (m * 1000.0).round() / 1000.0);
            r
        })
        .collect()
}

pub fn write_dataset(dir: &Path, name: &str, records: &[ClassRecord]) -> PathBuf {
    let mut buf = Vec::new();
    write_records_csv(&mut buf, records, None).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, buf).unwrap();
    path
}

/// Every file in `dir`, sorted by name, with its bytes.
pub fn read_bundle(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}
