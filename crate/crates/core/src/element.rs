//! Bounded pool of training elements and the leaf-to-element table.
//!
//! Every learning leaf borrows one [`LeafElement`] from a fixed-capacity
//! [`ElementPool`]. When the pool runs dry the leaf keeps predicting from its
//! label counts but collects no split statistics until a slot is handed back.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::data::{DatasetSchema, Sample};
use crate::error::{Error, Result};
use crate::sketch::{GaussianStat, Histogram, QuantileSet};

pub type LeafId = usize;
pub type ElementId = usize;

/// Which summary backs numeric attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ObserverMode {
    #[default]
    Quantile,
    Gaussian,
}

impl std::str::FromStr for ObserverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantile" => Ok(ObserverMode::Quantile),
            "gaussian" => Ok(ObserverMode::Gaussian),
            other => Err(Error::Config(format!("unknown observer '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverConfig {
    pub mode: ObserverMode,
    pub quantiles: usize,
    pub lambda: f64,
    pub fixed_point: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NumericSketch {
    Quantile(QuantileSet),
    Gaussian(GaussianStat),
}

impl NumericSketch {
    /// Estimated share of the class mass at or left of `pt`.
    pub fn left_fraction(&self, pt: f64) -> f64 {
        match self {
            NumericSketch::Quantile(q) => q.left_fraction(pt),
            NumericSketch::Gaussian(g) => g.cdf(pt),
        }
    }
}

/// Training state of one leaf.
#[derive(Debug, Clone)]
pub struct LeafElement {
    config: ObserverConfig,
    labels: usize,
    numeric: usize,
    n_f: u64,
    class_counts: Vec<u64>,
    min: Vec<f64>,
    max: Vec<f64>,
    /// `numeric × labels`, row-major by attribute.
    sketches: Vec<Option<NumericSketch>>,
    histograms: Vec<Histogram>,
    samples_since_trial: u64,
}

impl LeafElement {
    pub fn new(schema: &DatasetSchema, config: ObserverConfig) -> Self {
        let numeric = schema.numeric_count();
        let labels = schema.label_count;
        LeafElement {
            config,
            labels,
            numeric,
            n_f: 0,
            class_counts: vec![0; labels],
            min: vec![f64::INFINITY; numeric],
            max: vec![f64::NEG_INFINITY; numeric],
            sketches: vec![None; numeric * labels],
            histograms: schema
                .value_counts()
                .iter()
                .map(|&v| Histogram::new(v, labels))
                .collect(),
            samples_since_trial: 0,
        }
    }

    /// Forget everything learned; histograms only lose their status bit.
    pub fn reset(&mut self) {
        self.n_f = 0;
        self.class_counts.fill(0);
        self.min.fill(f64::INFINITY);
        self.max.fill(f64::NEG_INFINITY);
        self.sketches.fill(None);
        self.histograms.iter_mut().for_each(Histogram::invalidate);
        self.samples_since_trial = 0;
    }

    pub fn observe(&mut self, sample: &Sample) -> Result<()> {
        let label = sample.label as usize;
        if label >= self.labels {
            return Err(Error::Contract(format!("label {label} out of range")));
        }
        self.n_f += 1;
        self.class_counts[label] += 1;
        for (i, &x) in sample.numeric.iter().enumerate() {
            if x > self.max[i] {
                self.max[i] = x;
            }
            if x < self.min[i] {
                self.min[i] = x;
            }
            // only the row matching the label moves
            let cell = &mut self.sketches[i * self.labels + label];
            match cell {
                Some(NumericSketch::Quantile(q)) => q.update(x),
                Some(NumericSketch::Gaussian(g)) => g.update(x, 1.0),
                None => {
                    *cell = Some(match self.config.mode {
                        ObserverMode::Quantile => NumericSketch::Quantile(QuantileSet::seed_with(
                            x,
                            self.config.quantiles,
                            self.config.lambda,
                            self.config.fixed_point,
                        )?),
                        ObserverMode::Gaussian => {
                            let mut g = GaussianStat::new();
                            g.update(x, 1.0);
                            NumericSketch::Gaussian(g)
                        }
                    });
                }
            }
        }
        for (h, &v) in self.histograms.iter_mut().zip(&sample.categorical) {
            h.observe(v as usize, label)?;
        }
        self.samples_since_trial += 1;
        Ok(())
    }

    pub fn n_f(&self) -> u64 {
        self.n_f
    }

    pub fn class_counts(&self) -> &[u64] {
        &self.class_counts
    }

    /// Observed `(min, max)` of a numeric attribute, `None` before any sample.
    pub fn range(&self, numeric: usize) -> Option<(f64, f64)> {
        (self.min[numeric] <= self.max[numeric]).then(|| (self.min[numeric], self.max[numeric]))
    }

    pub fn sketch(&self, numeric: usize, label: usize) -> Option<&NumericSketch> {
        self.sketches[numeric * self.labels + label].as_ref()
    }

    /// Sketches of one numeric attribute for every class.
    pub fn sketch_row(&self, numeric: usize) -> &[Option<NumericSketch>] {
        &self.sketches[numeric * self.labels..(numeric + 1) * self.labels]
    }

    pub fn histogram(&self, categorical: usize) -> &Histogram {
        &self.histograms[categorical]
    }

    pub fn numeric_count(&self) -> usize {
        self.numeric
    }

    pub fn categorical_count(&self) -> usize {
        self.histograms.len()
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    pub fn samples_since_trial(&self) -> u64 {
        self.samples_since_trial
    }

    pub fn reset_trial_counter(&mut self) {
        self.samples_since_trial = 0;
    }

    pub fn config(&self) -> ObserverConfig {
        self.config
    }
}

/// Fixed set of `E` elements with a bijective leaf ↔ element table.
#[derive(Debug, Clone)]
pub struct ElementPool {
    elements: Vec<LeafElement>,
    owner: Vec<Option<LeafId>>,
    free: BTreeSet<ElementId>,
    table: HashMap<LeafId, ElementId>,
}

impl ElementPool {
    pub fn new(capacity: usize, schema: &DatasetSchema, config: ObserverConfig) -> Self {
        let proto = LeafElement::new(schema, config);
        ElementPool {
            elements: vec![proto; capacity],
            owner: vec![None; capacity],
            free: (0..capacity).collect(),
            table: HashMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.elements.len()
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    pub fn bound_count(&self) -> usize {
        self.table.len()
    }

    /// Bind a freshly reset slot to `leaf`. `Ok(None)` means the pool is
    /// exhausted, which is not an error.
    pub fn allocate(&mut self, leaf: LeafId) -> Result<Option<ElementId>> {
        if self.table.contains_key(&leaf) {
            return Err(Error::Contract(format!("leaf {leaf} already holds an element")));
        }
        let Some(id) = self.free.pop_first() else {
            return Ok(None);
        };
        self.elements[id].reset();
        self.owner[id] = Some(leaf);
        self.table.insert(leaf, id);
        Ok(Some(id))
    }

    pub fn release(&mut self, leaf: LeafId) -> Result<ElementId> {
        let id = self
            .table
            .remove(&leaf)
            .ok_or_else(|| Error::Contract(format!("leaf {leaf} holds no element")))?;
        self.owner[id] = None;
        self.free.insert(id);
        Ok(id)
    }

    pub fn element_of(&self, leaf: LeafId) -> Option<ElementId> {
        self.table.get(&leaf).copied()
    }

    pub fn owner_of(&self, id: ElementId) -> Option<LeafId> {
        self.owner[id]
    }

    pub fn element(&self, id: ElementId) -> &LeafElement {
        &self.elements[id]
    }

    pub fn element_mut(&mut self, id: ElementId) -> &mut LeafElement {
        &mut self.elements[id]
    }

    /// Check the bijection between bound slots and table entries.
    pub fn check_invariants(&self) -> Result<()> {
        if self.table.len() + self.free.len() != self.capacity() {
            return Err(Error::Contract("bound + free != capacity".into()));
        }
        for (&leaf, &id) in &self.table {
            if self.owner[id] != Some(leaf) || self.free.contains(&id) {
                return Err(Error::Contract(format!("slot {id} inconsistent for leaf {leaf}")));
            }
        }
        for (id, owner) in self.owner.iter().enumerate() {
            if owner.is_none() != self.free.contains(&id) {
                return Err(Error::Contract(format!("slot {id} neither free nor bound")));
            }
        }
        Ok(())
    }
}
