use crate::error::{Error, Result};

/// Value-by-class occurrence counts for one categorical attribute.
///
/// A cleared status bit marks the content as logically zero without touching
/// the counts; the next observation rewrites the whole table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    values: usize,
    labels: usize,
    counts: Vec<u64>,
    valid: bool,
}

impl Histogram {
    pub fn new(values: usize, labels: usize) -> Self {
        Histogram {
            values,
            labels,
            counts: vec![0; values * labels],
            valid: false,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    /// Clear the status bit only.
    pub fn invalidate(&mut self) {
        self.valid = false;
    }

    pub fn observe(&mut self, value: usize, label: usize) -> Result<()> {
        if value >= self.values || label >= self.labels {
            return Err(Error::Contract(format!(
                "histogram index ({value}, {label}) outside {}x{}",
                self.values, self.labels
            )));
        }
        let idx = value * self.labels + label;
        if self.valid {
            self.counts[idx] += 1;
        } else {
            self.counts.fill(0);
            self.counts[idx] = 1;
            self.valid = true;
        }
        Ok(())
    }

    pub fn count(&self, value: usize, label: usize) -> u64 {
        if self.valid {
            self.counts[value * self.labels + label]
        } else {
            0
        }
    }

    /// Class counts for samples whose value equals `value`.
    pub fn row(&self, value: usize) -> Vec<u64> {
        (0..self.labels).map(|l| self.count(value, l)).collect()
    }

    pub fn total(&self) -> u64 {
        if self.valid {
            self.counts.iter().sum()
        } else {
            0
        }
    }

    pub fn value_count(&self) -> usize {
        self.values
    }

    #[cfg(test)]
    pub(crate) fn scribble(&mut self, fill: u64) {
        self.counts.fill(fill);
    }
}
