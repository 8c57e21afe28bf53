//! Interleaved test-then-train evaluation.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{DatasetSchema, Sample};
use crate::error::{Error, Result};
use crate::split::HyperParams;
use crate::tree::{HoeffdingTree, ObserverMode};

pub const DEFAULT_CURVE_INTERVAL: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerOptions {
    pub mode: ObserverMode,
    pub hp: HyperParams,
    pub fixed_point: bool,
    pub curve_interval: u64,
}

impl Default for LearnerOptions {
    fn default() -> Self {
        LearnerOptions {
            mode: ObserverMode::Quantile,
            hp: HyperParams::default(),
            fixed_point: false,
            curve_interval: DEFAULT_CURVE_INTERVAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub samples: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub observer: ObserverMode,
    pub quantiles: usize,
    pub samples_seen: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub splits: u64,
    pub splits_by_bound: u64,
    pub splits_by_tie: u64,
    pub trials: u64,
    pub pool_exhausted: u64,
    pub depth_limited: u64,
    pub leaf_limited: u64,
    pub leaves: usize,
    pub depth: usize,
    pub fixed_point_saturations: u64,
    pub curve: Vec<CurvePoint>,
}

impl EvalReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn write_curve_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("samples,accuracy\n");
        for p in &self.curve {
            out.push_str(&format!("{},{}\n", p.samples, p.accuracy));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Predict each sample before learning from it; accuracy covers the whole
/// stream including the cold start.
pub fn run_prequential<I>(schema: &DatasetSchema, stream: I, opts: &LearnerOptions) -> Result<(EvalReport, HoeffdingTree)>
where
    I: IntoIterator<Item = Result<Sample>>,
{
    let mut tree = HoeffdingTree::new(schema.clone(), opts.hp, opts.mode, opts.fixed_point)?;
    let mut seen = 0u64;
    let mut correct = 0u64;
    let mut curve = Vec::new();
    for (index, item) in stream.into_iter().enumerate() {
        let sample = item.map_err(|e| Error::Stream {
            index,
            source: Box::new(e),
        })?;
        if tree.predict(&sample) == sample.label {
            correct += 1;
        }
        tree.learn_one(&sample).map_err(|e| Error::Stream {
            index,
            source: Box::new(e),
        })?;
        seen += 1;
        if opts.curve_interval > 0 && seen.is_multiple_of(opts.curve_interval) {
            curve.push(CurvePoint {
                samples: seen,
                accuracy: correct as f64 / seen as f64,
            });
        }
    }
    let m = *tree.metrics();
    let report = EvalReport {
        observer: opts.mode,
        quantiles: opts.hp.quantiles,
        samples_seen: seen,
        correct,
        accuracy: if seen == 0 { 0.0 } else { correct as f64 / seen as f64 },
        splits: m.splits,
        splits_by_bound: m.splits_by_bound,
        splits_by_tie: m.splits_by_tie,
        trials: m.trials,
        pool_exhausted: m.pool_exhausted,
        depth_limited: m.depth_limited,
        leaf_limited: m.leaf_limited,
        leaves: tree.leaf_count(),
        depth: tree.depth(),
        fixed_point_saturations: m.fixed.saturations,
        curve,
    };
    Ok((report, tree))
}

/// Convenience wrapper over an in-memory dataset.
pub fn evaluate(schema: &DatasetSchema, samples: &[Sample], opts: &LearnerOptions) -> Result<EvalReport> {
    run_prequential(schema, samples.iter().cloned().map(Ok), opts).map(|(r, _)| r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub quantiles: usize,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

/// One prequential run per quantile count over the same stream order. A bad
/// row records its error and the sweep carries on.
pub fn sweep_quantiles(
    schema: &DatasetSchema,
    samples: &[Sample],
    opts: &LearnerOptions,
    counts: &[usize],
) -> Vec<SweepRow> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = counts
            .iter()
            .map(|&q| {
                let opts = LearnerOptions {
                    mode: ObserverMode::Quantile,
                    hp: HyperParams { quantiles: q, ..opts.hp },
                    ..*opts
                };
                scope.spawn(move || match evaluate(schema, samples, &opts) {
                    Ok(r) => SweepRow {
                        quantiles: q,
                        accuracy: Some(r.accuracy),
                        error: None,
                    },
                    Err(e) => SweepRow {
                        quantiles: q,
                        accuracy: None,
                        error: Some(e.to_string()),
                    },
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

pub fn write_sweep_csv(rows: &[SweepRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "quantiles,accuracy,error")?;
    for r in rows {
        let acc = r.accuracy.map(|a| format!("{a:.6}")).unwrap_or_default();
        let err = r.error.as_deref().unwrap_or("").replace(',', ";");
        writeln!(out, "{},{},{}", r.quantiles, acc, err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::AttributeSchema;
    use crate::synth::{gen_synthetic, SynthKind};

    #[test]
    fn constant_label_stream() {
        let schema = DatasetSchema::new(vec![AttributeSchema::numeric("x")], 2).unwrap();
        let samples: Vec<Sample> = (0..1000)
            .map(|i| Sample::new(vec![(i as f64 / 1000.0) * 2.0 - 1.0], vec![], 1))
            .collect();
        let r = evaluate(&schema, &samples, &LearnerOptions::default()).unwrap();
        assert_eq!(r.samples_seen, 1000);
        assert_eq!(r.correct, 999);
        assert!(r.accuracy >= 0.999);
    }

    #[test]
    fn stream_errors_carry_index() {
        let schema = DatasetSchema::new(vec![AttributeSchema::numeric("x")], 2).unwrap();
        let items = vec![
            Ok(Sample::new(vec![0.0], vec![], 0)),
            Err(Error::Parse { line: 2, message: "bad".into() }),
        ];
        match run_prequential(&schema, items, &LearnerOptions::default()) {
            Err(Error::Stream { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn curve_points() {
        let (schema, samples) = gen_synthetic(SynthKind::Separable, 2500, 3).unwrap();
        let opts = LearnerOptions { curve_interval: 1000, ..LearnerOptions::default() };
        let r = evaluate(&schema, &samples, &opts).unwrap();
        let xs: Vec<u64> = r.curve.iter().map(|p| p.samples).collect();
        assert_eq!(xs, vec![1000, 2000]);
        assert_eq!(r.accuracy, r.correct as f64 / r.samples_seen as f64);
    }

    #[test]
    fn sweep_rows_and_bad_q() {
        let (schema, samples) = gen_synthetic(SynthKind::Separable, 1000, 3).unwrap();
        let rows = sweep_quantiles(&schema, &samples, &LearnerOptions::default(), &[1, 8]);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].accuracy.is_none() && rows[0].error.is_some());
        assert!(rows[1].accuracy.is_some());
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn truncation_does_not_change_earlier_predictions() {
        let (schema, samples) = gen_synthetic(SynthKind::GaussianMix, 3000, 5).unwrap();
        let opts = LearnerOptions::default();
        let predictions = |data: &[Sample]| {
            let mut t = HoeffdingTree::new(schema.clone(), opts.hp, opts.mode, false).unwrap();
            data.iter()
                .map(|s| {
                    let p = t.predict(s);
                    t.learn_one(s).unwrap();
                    p
                })
                .collect::<Vec<_>>()
        };
        let full = predictions(&samples);
        let cut = 1700;
        let mut replaced = samples[..cut].to_vec();
        let (_, other) = gen_synthetic(SynthKind::UniformNoise, 1300, 77).unwrap();
        replaced.extend(other.into_iter().map(|s| Sample::new(s.numeric[..2].to_vec(), vec![], s.label)));
        let alt = predictions(&replaced);
        assert_eq!(full[..cut], alt[..cut]);
    }
}
