//! Dataset schema, samples, CSV ingestion and offline normalization.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttributeKind,
    /// Number of distinct values `V_i`; categorical attributes only.
    #[serde(rename = "values", default, skip_serializing_if = "Option::is_none")]
    pub value_count: Option<usize>,
    /// Optional string names for the categorical values, in index order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(skip)]
    pub index: usize,
}

impl AttributeSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeSchema {
            name: name.into(),
            kind: AttributeKind::Numeric,
            value_count: None,
            categories: None,
            index: 0,
        }
    }

    pub fn categorical(name: impl Into<String>, values: usize) -> Self {
        AttributeSchema {
            name: name.into(),
            kind: AttributeKind::Categorical,
            value_count: Some(values),
            categories: None,
            index: 0,
        }
    }
}

/// Where an attribute's value lives inside a [`Sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Numeric(usize),
    Categorical(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub attributes: Vec<AttributeSchema>,
    #[serde(rename = "labels")]
    pub label_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_names: Option<Vec<String>>,
    #[serde(skip)]
    slots: Vec<Slot>,
    #[serde(skip)]
    value_counts: Vec<usize>,
}

impl DatasetSchema {
    pub fn new(attributes: Vec<AttributeSchema>, label_count: usize) -> Result<Self> {
        let mut schema = DatasetSchema {
            attributes,
            label_count,
            label_names: None,
            slots: Vec::new(),
            value_counts: Vec::new(),
        };
        schema.finish()?;
        Ok(schema)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut schema: DatasetSchema = serde_json::from_str(text)?;
        schema.finish()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Validate and compute the derived index tables.
    fn finish(&mut self) -> Result<()> {
        if self.attributes.is_empty() {
            return Err(Error::Schema("at least one attribute is required".into()));
        }
        if self.label_count < 2 {
            return Err(Error::Schema(format!(
                "label count must be at least 2, got {}",
                self.label_count
            )));
        }
        if let Some(names) = &self.label_names {
            if names.len() != self.label_count {
                return Err(Error::Schema(format!(
                    "{} label names given for {} labels",
                    names.len(),
                    self.label_count
                )));
            }
        }
        self.slots.clear();
        self.value_counts.clear();
        let (mut n, mut c) = (0, 0);
        for (i, attr) in self.attributes.iter_mut().enumerate() {
            attr.index = i;
            match attr.kind {
                AttributeKind::Numeric => {
                    if attr.value_count.is_some() {
                        return Err(Error::Schema(format!(
                            "numeric attribute '{}' must not declare a value count",
                            attr.name
                        )));
                    }
                    self.slots.push(Slot::Numeric(n));
                    n += 1;
                }
                AttributeKind::Categorical => {
                    let v = match (attr.value_count, &attr.categories) {
                        (Some(v), Some(names)) if names.len() != v => {
                            return Err(Error::Schema(format!(
                                "attribute '{}' declares {} values but names {}",
                                attr.name,
                                v,
                                names.len()
                            )))
                        }
                        (Some(v), _) => v,
                        (None, Some(names)) => names.len(),
                        (None, None) => {
                            return Err(Error::Schema(format!(
                                "categorical attribute '{}' needs a value count",
                                attr.name
                            )))
                        }
                    };
                    if v < 2 {
                        return Err(Error::Schema(format!(
                            "categorical attribute '{}' needs at least 2 values, got {v}",
                            attr.name
                        )));
                    }
                    attr.value_count = Some(v);
                    self.slots.push(Slot::Categorical(c));
                    self.value_counts.push(v);
                    c += 1;
                }
            }
        }
        Ok(())
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn numeric_count(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| matches!(s, Slot::Numeric(_)))
            .count()
    }

    pub fn categorical_count(&self) -> usize {
        self.value_counts.len()
    }

    /// `V_i` for each categorical attribute, in categorical slot order.
    pub fn value_counts(&self) -> &[usize] {
        &self.value_counts
    }

    pub fn slot(&self, attribute: usize) -> Slot {
        self.slots[attribute]
    }

    /// Attribute index of the `k`-th numeric attribute.
    pub fn numeric_attribute(&self, k: usize) -> usize {
        self.slots
            .iter()
            .position(|s| *s == Slot::Numeric(k))
            .expect("numeric slot in range")
    }

    pub fn check(&self, sample: &Sample) -> Result<()> {
        if sample.numeric.len() != self.numeric_count()
            || sample.categorical.len() != self.categorical_count()
        {
            return Err(Error::Contract(format!(
                "sample has {} numeric / {} categorical values, schema expects {} / {}",
                sample.numeric.len(),
                sample.categorical.len(),
                self.numeric_count(),
                self.categorical_count()
            )));
        }
        for (k, (&v, &cap)) in sample
            .categorical
            .iter()
            .zip(self.value_counts.iter())
            .enumerate()
        {
            if v as usize >= cap {
                return Err(Error::Contract(format!(
                    "categorical value {v} out of range for slot {k} (V={cap})"
                )));
            }
        }
        if sample.label as usize >= self.label_count {
            return Err(Error::Contract(format!(
                "label {} out of range (L={})",
                sample.label, self.label_count
            )));
        }
        Ok(())
    }
}

/// One labeled observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub numeric: Vec<f64>,
    pub categorical: Vec<u32>,
    pub label: u32,
}

impl Sample {
    pub fn new(numeric: Vec<f64>, categorical: Vec<u32>, label: u32) -> Self {
        Sample {
            numeric,
            categorical,
            label,
        }
    }
}

fn lookup(names: Option<&Vec<String>>, field: &str) -> Option<u64> {
    names.and_then(|n| n.iter().position(|s| s == field).map(|p| p as u64))
}

/// Streaming CSV reader yielding samples in file order.
pub struct CsvStream {
    schema: DatasetSchema,
    reader: csv::Reader<BufReader<File>>,
    record: csv::StringRecord,
}

impl CsvStream {
    fn parse_record(&self, line: usize) -> Result<Sample> {
        let schema = &self.schema;
        let record = &self.record;
        let expected = schema.attribute_count() + 1;
        if record.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let mut numeric = Vec::with_capacity(schema.numeric_count());
        let mut categorical = Vec::with_capacity(schema.categorical_count());
        for (attr, field) in schema.attributes.iter().zip(record.iter()) {
            match attr.kind {
                AttributeKind::Numeric => {
                    let v: f64 = field.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("unparsable numeric value '{field}' for '{}'", attr.name),
                    })?;
                    numeric.push(v);
                }
                AttributeKind::Categorical => {
                    let v = lookup(attr.categories.as_ref(), field)
                        .or_else(|| field.parse::<u64>().ok())
                        .ok_or_else(|| Error::Parse {
                            line,
                            message: format!(
                                "unparsable categorical value '{field}' for '{}'",
                                attr.name
                            ),
                        })?;
                    let cap = attr.value_count.unwrap_or(0) as u64;
                    if v >= cap {
                        return Err(Error::Parse {
                            line,
                            message: format!(
                                "categorical out of range: {v} for '{}' (V={cap})",
                                attr.name
                            ),
                        });
                    }
                    categorical.push(v as u32);
                }
            }
        }
        let field = &record[expected - 1];
        let label = lookup(schema.label_names.as_ref(), field)
            .or_else(|| field.parse::<u64>().ok())
            .ok_or_else(|| Error::Parse {
                line,
                message: format!("unparsable label '{field}'"),
            })?;
        if label >= schema.label_count as u64 {
            return Err(Error::Parse {
                line,
                message: format!("label out of range: {label} (L={})", schema.label_count),
            });
        }
        Ok(Sample::new(numeric, categorical, label as u32))
    }
}

impl Iterator for CsvStream {
    type Item = Result<Sample>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.reader.read_record(&mut self.record) {
            Ok(false) => None,
            Ok(true) => {
                let line = self.record.position().map_or(0, |p| p.line() as usize);
                Some(self.parse_record(line))
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Some(Err(Error::Parse {
                    line,
                    message: e.to_string(),
                }))
            }
        }
    }
}

/// Open `path` as a stream of samples. The label is the last column.
pub fn parse_csv(path: impl AsRef<Path>, schema: &DatasetSchema, header: bool) -> Result<CsvStream> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    Ok(CsvStream {
        schema: schema.clone(),
        reader,
        record: csv::StringRecord::new(),
    })
}

/// Read a whole file into memory.
pub fn read_csv(path: impl AsRef<Path>, schema: &DatasetSchema, header: bool) -> Result<Vec<Sample>> {
    parse_csv(path, schema, header)?.collect()
}

pub fn write_csv(
    path: impl AsRef<Path>,
    schema: &DatasetSchema,
    samples: &[Sample],
    header: bool,
) -> Result<()> {
    let path = path.as_ref();
    let map_err = |e: std::io::Error| Error::io(PathBuf::from(path), e);
    let mut out = std::io::BufWriter::new(File::create(path).map_err(map_err)?);
    if header {
        let mut names: Vec<&str> = schema.attributes.iter().map(|a| a.name.as_str()).collect();
        names.push("label");
        writeln!(out, "{}", names.join(",")).map_err(map_err)?;
    }
    let mut line = String::new();
    for s in samples {
        line.clear();
        for i in 0..schema.attribute_count() {
            if i > 0 {
                line.push(',');
            }
            match schema.slot(i) {
                Slot::Numeric(k) => line.push_str(&s.numeric[k].to_string()),
                Slot::Categorical(k) => line.push_str(&s.categorical[k].to_string()),
            }
        }
        line.push(',');
        line.push_str(&s.label.to_string());
        writeln!(out, "{line}").map_err(map_err)?;
    }
    out.flush().map_err(map_err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRange {
    pub index: usize,
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Observed min/max per numeric attribute; enough to replay the transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub attributes: Vec<AttributeRange>,
}

impl NormalizationStats {
    /// Map every numeric value into `[-1, 1]`; constant attributes go to 0.
    pub fn apply(&self, samples: &mut [Sample]) {
        for (k, r) in self.attributes.iter().enumerate() {
            let span = r.max - r.min;
            for s in samples.iter_mut() {
                let v = &mut s.numeric[k];
                *v = if span > 0.0 {
                    2.0 * (*v - r.min) / span - 1.0
                } else {
                    0.0
                };
            }
        }
    }
}

pub fn normalize(schema: &DatasetSchema, mut samples: Vec<Sample>) -> (Vec<Sample>, NormalizationStats) {
    let mut attributes = Vec::with_capacity(schema.numeric_count());
    for k in 0..schema.numeric_count() {
        let index = schema.numeric_attribute(k);
        let (min, max) = samples
            .iter()
            .map(|s| s.numeric[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        attributes.push(AttributeRange {
            index,
            name: schema.attributes[index].name.clone(),
            min,
            max,
        });
    }
    let stats = NormalizationStats { attributes };
    stats.apply(&mut samples);
    (samples, stats)
}
