//! Python bindings. Metrics are addressed by their column names ("LOC",
//! "T-NOT", "M"); labels are booleans, `True` meaning effective.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use testlens::classfile::{self, ClassFileSummary};
use testlens::dataset::{self, IngestOptions, LabeledDataset, RawDataset};
use testlens::java::extract::extract_from_paths;
use testlens::ml::{self, ClassifierKind, ClassifierReport, ClassifierSpec, TrainedModel};
use testlens::model::{ClassRecord, EffectivenessLabel, FeatureMatrix, MetricId};
use testlens::ranking::{self, RankingAlgorithm};
use testlens::stats::{self, Population};

create_exception!(testlens_py, TestlensError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    TestlensError::new_err(e.to_string())
}

fn metric(name: &str) -> PyResult<MetricId> {
    name.parse().map_err(err)
}

fn metrics(names: &[String]) -> PyResult<Vec<MetricId>> {
    names.iter().map(|n| metric(n)).collect()
}

fn to_labels(flags: &[bool]) -> Vec<EffectivenessLabel> {
    flags
        .iter()
        .map(|&b| EffectivenessLabel::from_index(usize::from(b)))
        .collect()
}

fn from_labels(labels: &[EffectivenessLabel]) -> Vec<bool> {
    labels.iter().map(|&l| l == EffectivenessLabel::Effective).collect()
}

/// One class/test pair with its metric values.
#[pyclass(name = "Record", module = "testlens_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyRecord(ClassRecord);

#[pymethods]
impl PyRecord {
    #[new]
    #[pyo3(signature = (class_id, test_id, metrics = BTreeMap::new()))]
    fn new(class_id: String, test_id: String, metrics: BTreeMap<String, f64>) -> PyResult<Self> {
        let mut r = ClassRecord::new(class_id, test_id);
        for (k, v) in metrics {
            r.set(metric(&k)?, v);
        }
        Ok(PyRecord(r))
    }

    #[getter]
    fn class_id(&self) -> &str {
        &self.0.class_id
    }

    #[getter]
    fn test_id(&self) -> &str {
        &self.0.test_id
    }

    fn get(&self, name: &str) -> PyResult<Option<f64>> {
        Ok(self.0.get(metric(name)?))
    }

    fn metrics(&self) -> BTreeMap<&'static str, f64> {
        self.0.metrics.iter().map(|(m, v)| (m.name(), *v)).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Record({:?}, {:?}, {} metrics)",
            self.0.class_id,
            self.0.test_id,
            self.0.metrics.len()
        )
    }
}

/// Ingested metrics table.
#[pyclass(name = "Dataset", module = "testlens_py", frozen)]
struct PyDataset(RawDataset);

fn options(require_nbi: bool, lenient: bool) -> IngestOptions {
    if lenient {
        IngestOptions::lenient()
    } else {
        IngestOptions::analysis(require_nbi)
    }
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    #[pyo3(signature = (path, require_nbi = false, lenient = false))]
    fn from_csv(path: PathBuf, require_nbi: bool, lenient: bool) -> PyResult<Self> {
        dataset::ingest_path(&path, &options(require_nbi, lenient))
            .map(PyDataset)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (text, require_nbi = false, lenient = false))]
    fn from_csv_text(text: &str, require_nbi: bool, lenient: bool) -> PyResult<Self> {
        dataset::ingest_csv(text.as_bytes(), "<text>", &options(require_nbi, lenient))
            .map(PyDataset)
            .map_err(err)
    }

    #[staticmethod]
    fn from_records(records: Vec<PyRecord>) -> Self {
        let records: Vec<ClassRecord> = records.into_iter().map(|r| r.0).collect();
        let columns = MetricId::ALL
            .into_iter()
            .filter(|m| records.iter().any(|r| r.metrics.contains_key(m)))
            .collect();
        PyDataset(RawDataset {
            records,
            columns,
            provenance: "python".into(),
        })
    }

    fn __len__(&self) -> usize {
        self.0.records.len()
    }

    #[getter]
    fn records(&self) -> Vec<PyRecord> {
        self.0.records.iter().cloned().map(PyRecord).collect()
    }

    #[getter]
    fn columns(&self) -> Vec<&'static str> {
        self.0.columns.iter().map(|m| m.name()).collect()
    }

    /// Quartile labeling, or fixed `(q1, q3)` thresholds when given.
    #[pyo3(signature = (thresholds = None))]
    fn label(&self, thresholds: Option<(f64, f64)>) -> PyResult<PyLabeledDataset> {
        testlens::pipeline::label(&self.0, thresholds)
            .map(PyLabeledDataset)
            .map_err(err)
    }

    /// Spearman rho of every independent metric with M, keyed by name;
    /// `None` for metrics that could not be correlated.
    #[pyo3(signature = (population = "raw", thresholds = None))]
    fn correlations(
        &self,
        population: &str,
        thresholds: Option<(f64, f64)>,
    ) -> PyResult<BTreeMap<&'static str, Option<f64>>> {
        let population: Population = population.parse().map_err(err)?;
        let records = match population {
            Population::Raw => self.0.records.clone(),
            Population::Labeled => self.label(thresholds)?.0.records.into_iter().map(|(r, _)| r).collect(),
        };
        let table = stats::correlation_table(&records, MetricId::MutationScore, 0.0, population).map_err(err)?;
        Ok(table.full.iter().map(|e| (e.metric.name(), e.rho)).collect())
    }
}

#[pyclass(name = "LabeledDataset", module = "testlens_py", frozen)]
struct PyLabeledDataset(LabeledDataset);

#[pymethods]
impl PyLabeledDataset {
    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn thresholds(&self) -> (f64, f64) {
        (self.0.q1_threshold, self.0.q3_threshold)
    }

    #[getter]
    fn discarded(&self) -> usize {
        self.0.discarded_count
    }

    /// `(effective, non_effective)`.
    #[getter]
    fn counts(&self) -> (usize, usize) {
        let [non, eff] = self.0.label_counts();
        (eff, non)
    }

    #[getter]
    fn labels(&self) -> Vec<bool> {
        self.0
            .records
            .iter()
            .map(|(_, l)| *l == EffectivenessLabel::Effective)
            .collect()
    }

    #[pyo3(signature = (features = None))]
    fn feature_matrix(&self, features: Option<Vec<String>>) -> PyResult<PyFeatureMatrix> {
        let features = features.map(|f| metrics(&f)).transpose()?;
        testlens::pipeline::feature_matrix(&self.0, features.as_deref())
            .map(PyFeatureMatrix)
            .map_err(err)
    }
}

#[pyclass(name = "FeatureMatrix", module = "testlens_py", frozen)]
struct PyFeatureMatrix(FeatureMatrix);

#[pymethods]
impl PyFeatureMatrix {
    #[new]
    fn new(features: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<bool>) -> PyResult<Self> {
        FeatureMatrix::new(metrics(&features)?, rows, to_labels(&labels))
            .map(PyFeatureMatrix)
            .map_err(err)
    }

    #[getter]
    fn features(&self) -> Vec<&'static str> {
        self.0.feature_ids().iter().map(|m| m.name()).collect()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.n_rows(), self.0.n_features())
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<bool> {
        from_labels(self.0.targets())
    }
}

#[pyclass(name = "Model", module = "testlens_py", frozen)]
struct PyModel(TrainedModel);

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        TrainedModel::from_json(text).map(PyModel).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().short()
    }

    #[getter]
    fn features(&self) -> Vec<&'static str> {
        self.0.feature_ids.iter().map(|m| m.name()).collect()
    }

    /// Probability of the effective class.
    fn score(&self, row: Vec<f64>) -> PyResult<f64> {
        self.0.score(&row).map_err(err)
    }

    /// `(is_effective, score)`.
    fn predict(&self, row: Vec<f64>) -> PyResult<(bool, f64)> {
        let (label, score) = ml::predict(&self.0, &row).map_err(err)?;
        Ok((label == EffectivenessLabel::Effective, score))
    }
}

fn spec(classifier: &str) -> PyResult<ClassifierSpec> {
    let kind: ClassifierKind = classifier.parse().map_err(err)?;
    Ok(ClassifierSpec::default_for(kind))
}

/// Trains `dt`, `rf` or `mlp` with default hyperparameters.
#[pyfunction]
#[pyo3(signature = (matrix, classifier, seed = 0))]
fn train(py: Python<'_>, matrix: &PyFeatureMatrix, classifier: &str, seed: u64) -> PyResult<PyModel> {
    let spec = spec(classifier)?;
    let m = &matrix.0;
    py.detach(|| ml::train(m, &spec, seed)).map(PyModel).map_err(err)
}

fn report_dict<'py>(py: Python<'py>, r: &ClassifierReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("classifier", r.kind.short())?;
    d.set_item("accuracy", r.accuracy)?;
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("f_measure", r.f_measure)?;
    d.set_item("auc", r.auc)?;
    let c = &r.confusion;
    d.set_item("confusion", (c.tp, c.tn, c.fp, c.fn_))?;
    d.set_item("scores", r.scores.clone())?;
    Ok(d)
}

/// Stratified k-fold cross-validation of one classifier.
#[pyfunction]
#[pyo3(signature = (matrix, classifier, k = 10, seed = 0))]
fn evaluate<'py>(
    py: Python<'py>,
    matrix: &PyFeatureMatrix,
    classifier: &str,
    k: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = spec(classifier)?;
    let m = &matrix.0;
    let report = py.detach(|| ml::evaluate(m, &spec, k, seed)).map_err(err)?;
    report_dict(py, &report)
}

/// Metric names and scores, best first.
#[pyfunction]
fn rank_features(matrix: &PyFeatureMatrix, algorithm: &str) -> PyResult<Vec<(&'static str, f64)>> {
    let alg: RankingAlgorithm = algorithm.parse().map_err(err)?;
    let table = ranking::rank_features(&matrix.0, alg).map_err(err)?;
    Ok(table.entries.iter().map(|(m, s)| (m.name(), *s)).collect())
}

#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::spearman(&x, &y).map_err(err)
}

#[pyfunction]
fn average_ranks(values: Vec<f64>) -> Vec<f64> {
    stats::average_ranks(&values)
}

#[pyfunction]
fn compute_quartiles(scores: Vec<f64>) -> PyResult<(f64, f64)> {
    dataset::compute_quartiles(&scores).map_err(err)
}

#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    ml::auc(&scores, &to_labels(&labels)).map_err(err)
}

/// `(train, test)` index lists per fold.
#[pyfunction]
fn stratified_kfold(labels: Vec<bool>, k: usize, seed: u64) -> PyResult<Vec<(Vec<usize>, Vec<usize>)>> {
    ml::stratified_kfold(&to_labels(&labels), k, seed).map_err(err)
}

/// Metrics for paired classes under the source roots; class-file inputs add NBI.
#[pyfunction]
#[pyo3(signature = (src, classes = Vec::new(), pairs = None))]
fn extract(
    py: Python<'_>,
    src: Vec<PathBuf>,
    classes: Vec<PathBuf>,
    pairs: Option<PathBuf>,
) -> PyResult<Vec<PyRecord>> {
    let records = py
        .detach(|| extract_from_paths(&src, &classes, pairs.as_deref()))
        .map_err(|errors| err(errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")))?;
    Ok(records.into_iter().map(PyRecord).collect())
}

fn summary_dict<'py>(py: Python<'py>, s: &ClassFileSummary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("class_name", &s.class_name)?;
    d.set_item("major_version", s.major_version)?;
    let methods = s
        .methods
        .iter()
        .map(|m| (m.name.clone(), m.descriptor.clone(), m.instruction_count, m.code_length))
        .collect::<Vec<_>>();
    d.set_item("methods", methods)?;
    d.set_item("nbi", classfile::count_nbi(s))?;
    Ok(d)
}

/// Class name, version and `(name, descriptor, instructions, code_length)` per method.
#[pyfunction]
fn parse_classfile<'py>(py: Python<'py>, data: &[u8]) -> PyResult<Bound<'py, PyDict>> {
    let s = classfile::parse_classfile(data).map_err(err)?;
    summary_dict(py, &s)
}

#[pyfunction]
fn count_nbi(data: &[u8]) -> PyResult<u64> {
    classfile::parse_classfile(data)
        .map(|s| classfile::count_nbi(&s))
        .map_err(err)
}

#[pyfunction]
fn metric_names() -> Vec<&'static str> {
    MetricId::ALL.iter().map(|m| m.name()).collect()
}

#[pymodule]
fn testlens_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TestlensError", m.py().get_type::<TestlensError>())?;
    m.add_class::<PyRecord>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyLabeledDataset>()?;
    m.add_class::<PyFeatureMatrix>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(rank_features, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(average_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(compute_quartiles, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(stratified_kfold, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(parse_classfile, m)?)?;
    m.add_function(wrap_pyfunction!(count_nbi, m)?)?;
    m.add_function(wrap_pyfunction!(metric_names, m)?)?;
    Ok(())
}
