//! Long-format CSV + JSON manifest dataset files.
//!
//! Data file header: `trial,class,sample,ch0,...,ch{C-1}`. Rows are written
//! sorted by (class, trial, sample); any order is accepted on read since the
//! `sample` column fixes each row's position inside its trial.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{Trial, TrialTensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    pub samples_per_trial: usize,
    pub channels: usize,
    pub trials_per_class: usize,
    pub classes: usize,
    /// Explicit class labels; `1..=classes` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_labels: Option<Vec<i64>>,
}

impl Manifest {
    pub fn for_tensor(name: &str, tensor: &TrialTensor) -> Result<Self> {
        let labels: Vec<i64> = tensor.class_labels().iter().copied().collect();
        let default: Vec<i64> = (1..=labels.len() as i64).collect();
        Ok(Self {
            name: name.to_string(),
            samples_per_trial: tensor.samples_per_trial(),
            channels: tensor.channel_count(),
            trials_per_class: tensor.trials_per_class()?,
            classes: labels.len(),
            class_labels: (labels != default).then_some(labels),
        })
    }

    pub fn labels(&self) -> Result<BTreeSet<i64>> {
        let labels: BTreeSet<i64> = match &self.class_labels {
            Some(l) => l.iter().copied().collect(),
            None => (1..=self.classes as i64).collect(),
        };
        if labels.len() != self.classes {
            return Err(Error::InvalidDataset(format!(
                "manifest declares {} classes but lists {} distinct labels",
                self.classes,
                labels.len()
            )));
        }
        Ok(labels)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize, what: &str, line: u64) -> Result<T> {
    let raw = record.get(i).unwrap_or("").trim();
    raw.parse().map_err(|_| {
        Error::InvalidDataset(format!("line {line}: cannot parse {what} from {raw:?}"))
    })
}

/// Reads a dataset and checks it against its manifest.
pub fn load_dataset(data_path: &Path, manifest_path: &Path) -> Result<TrialTensor> {
    let manifest = Manifest::read(manifest_path)?;
    let labels = manifest.labels()?;
    let channels = manifest.channels;
    let samples = manifest.samples_per_trial;

    let csv_err = |source| Error::Csv {
        path: data_path.to_path_buf(),
        source,
    };
    let file = File::open(data_path).map_err(|source| Error::Io {
        path: data_path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(BufReader::new(file));

    let header = reader.headers().map_err(csv_err)?.clone();
    if header.len() != channels + 3 {
        return Err(Error::DimensionMismatch(format!(
            "header has {} channel columns, manifest says {}",
            header.len().saturating_sub(3),
            channels
        )));
    }
    if header.get(0) != Some("trial") || header.get(1) != Some("class") || header.get(2) != Some("sample") {
        return Err(Error::InvalidDataset(
            "header must start with trial,class,sample".into(),
        ));
    }

    // (class, trial) -> (data, filled-sample mask)
    let mut trials: BTreeMap<(i64, usize), (Array2<f64>, Vec<bool>)> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(csv_err)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != channels + 3 {
            return Err(Error::DimensionMismatch(format!(
                "line {line}: {} channel values, manifest says {}",
                record.len().saturating_sub(3),
                channels
            )));
        }
        let trial: usize = field(&record, 0, "trial", line)?;
        let class: i64 = field(&record, 1, "class", line)?;
        let sample: usize = field(&record, 2, "sample", line)?;
        if !labels.contains(&class) {
            return Err(Error::UnknownClass {
                label: class,
                declared: manifest.classes,
            });
        }
        if sample >= samples {
            return Err(Error::DimensionMismatch(format!(
                "line {line}: sample {sample} outside 0..{samples}"
            )));
        }
        let (data, filled) = trials
            .entry((class, trial))
            .or_insert_with(|| (Array2::zeros((samples, channels)), vec![false; samples]));
        if filled[sample] {
            return Err(Error::InvalidDataset(format!(
                "line {line}: duplicate row for class {class} trial {trial} sample {sample}"
            )));
        }
        filled[sample] = true;
        for ch in 0..channels {
            let v: f64 = field(&record, ch + 3, "value", line)?;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("line {line}, channel {ch}")));
            }
            data[[sample, ch]] = v;
        }
    }

    let mut per_class: BTreeMap<i64, usize> = labels.iter().map(|&l| (l, 0)).collect();
    let mut out = Vec::with_capacity(trials.len());
    for ((class, trial), (data, filled)) in trials {
        if let Some(missing) = filled.iter().position(|f| !f) {
            return Err(Error::DimensionMismatch(format!(
                "class {class} trial {trial} is missing sample {missing}"
            )));
        }
        *per_class.get_mut(&class).unwrap() += 1;
        out.push(Trial::new(class, trial, data));
    }
    for (class, count) in per_class {
        if count != manifest.trials_per_class {
            return Err(Error::DimensionMismatch(format!(
                "class {class} has {count} trials, manifest says {}",
                manifest.trials_per_class
            )));
        }
    }
    TrialTensor::new(out, channels, samples, labels)
}

/// Writes `tensor` as CSV + manifest. Values use shortest round-trip decimals,
/// so a reload reproduces every cell exactly.
pub fn write_dataset(tensor: &TrialTensor, name: &str, data_path: &Path, manifest_path: &Path) -> Result<()> {
    let manifest = Manifest::for_tensor(name, tensor)?;
    let io_err = |source| Error::Io {
        path: data_path.to_path_buf(),
        source,
    };
    let file = File::create(data_path).map_err(io_err)?;
    let mut out = BufWriter::new(file);

    let mut header = String::from("trial,class,sample");
    for ch in 0..tensor.channel_count() {
        header.push_str(&format!(",ch{ch}"));
    }
    writeln!(out, "{header}").map_err(io_err)?;

    let mut line = String::new();
    for (class, trials) in tensor.trials_by_class() {
        for trial in trials {
            for (s, row) in trial.data.outer_iter().enumerate() {
                line.clear();
                line.push_str(&format!("{},{},{}", trial.trial_index, class, s));
                for v in row {
                    line.push(',');
                    line.push_str(&v.to_string());
                }
                line.push('\n');
                out.write_all(line.as_bytes()).map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)?;
    manifest.write(manifest_path)
}
