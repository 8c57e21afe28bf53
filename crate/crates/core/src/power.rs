//! Power-model generation flow: power clustering, cluster-count selection,
//! attribute elimination and hardware-aware parameter checks over
//! activity/power trace files.

use std::collections::BTreeMap;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{self, DesignParams};
use crate::data::{AttributeSchema, DatasetSchema, Sample};
use crate::error::{Error, Result};

pub const POWER_COLUMN: &str = "power_w";
const MAX_ITERATIONS: usize = 100;
const CONVERGED: f64 = 1e-9;
const RESTARTS: u64 = 8;
/// Rows used to rank attributes.
pub const DESIGN_WINDOW: usize = 5000;
pub const CART_DEPTH: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub signals: Vec<String>,
    pub activity: Vec<Vec<f64>>,
    pub power: Vec<f64>,
}

impl TraceSet {
    pub fn new(signals: Vec<String>, activity: Vec<Vec<f64>>, power: Vec<f64>) -> Result<Self> {
        if activity.len() != power.len() {
            return Err(Error::Contract(format!(
                "{} activity rows but {} power values",
                activity.len(),
                power.len()
            )));
        }
        for (i, row) in activity.iter().enumerate() {
            if row.len() != signals.len() {
                return Err(Error::Contract(format!(
                    "row {i} has {} activities, expected {}",
                    row.len(),
                    signals.len()
                )));
            }
        }
        if let Some(i) = power.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Contract(format!("row {i}: power must be finite and non-negative")));
        }
        Ok(TraceSet { signals, activity, power })
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// Read a trace CSV with a header; `power_w` must be the last column.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn from_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
            .clone();
        let names: Vec<String> = header.iter().map(str::to_string).collect();
        if names.last().map(String::as_str) != Some(POWER_COLUMN) {
            return Err(Error::Schema(format!("last trace column must be '{POWER_COLUMN}'")));
        }
        let signals = names[..names.len() - 1].to_vec();
        let mut activity = Vec::new();
        let mut power = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
            let vals = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { line, message: e.to_string() })?;
            let (p, acts) = vals.split_last().ok_or(Error::Parse { line, message: "empty row".into() })?;
            activity.push(acts.to_vec());
            power.push(*p);
        }
        Self::new(signals, activity, power)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Ascending.
    pub centers: Vec<f64>,
    pub assignments: Vec<usize>,
    pub silhouette: f64,
    pub inertia: f64,
    pub iterations: usize,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centers.len()
    }
}

fn nearest(centers: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (j, c) in centers.iter().enumerate().skip(1) {
        if (x - c).abs() < (x - centers[best]).abs() {
            best = j;
        }
    }
    best
}

fn inertia(values: &[f64], centers: &[f64], assign: &[usize]) -> f64 {
    values.iter().zip(assign).map(|(x, &a)| (x - centers[a]).powi(2)).sum()
}

fn seed_plus_plus(values: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centers = vec![values[rng.random_range(0..values.len())]];
    while centers.len() < k {
        let d2: Vec<f64> = values
            .iter()
            .map(|&x| centers.iter().map(|c| (x - c).powi(2)).fold(f64::INFINITY, f64::min))
            .collect();
        // at least k distinct values guarantee a positive total
        let pick = WeightedIndex::new(&d2).expect("positive distance mass");
        centers.push(values[pick.sample(rng)]);
    }
    centers
}

fn lloyd(values: &[f64], mut centers: Vec<f64>) -> (Vec<f64>, Vec<usize>, f64, usize) {
    let k = centers.len();
    let mut assign: Vec<usize> = values.iter().map(|&x| nearest(&centers, x)).collect();
    let mut last = inertia(values, &centers, &assign);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&x, &a) in values.iter().zip(&assign) {
            sums[a] += x;
            counts[a] += 1;
        }
        let mut moved: f64 = 0.0;
        let mut next = centers.clone();
        for j in 0..k {
            if counts[j] > 0 {
                next[j] = sums[j] / counts[j] as f64;
            }
        }
        // an empty cluster takes over the worst-served point
        for j in 0..k {
            if counts[j] == 0 {
                let far = (0..values.len())
                    .max_by(|&a, &b| {
                        let da = (values[a] - next[assign[a]]).abs();
                        let db = (values[b] - next[assign[b]]).abs();
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                next[j] = values[far];
                counts[j] = 1;
                counts[assign[far]] -= 1;
                assign[far] = j;
            }
        }
        for j in 0..k {
            moved = moved.max((next[j] - centers[j]).abs());
        }
        centers = next;
        assign = values.iter().map(|&x| nearest(&centers, x)).collect();
        let now = inertia(values, &centers, &assign);
        assert!(now <= last * (1.0 + 1e-12) + 1e-12, "k-means inertia rose from {last} to {now}");
        last = now;
        if moved < CONVERGED {
            break;
        }
    }
    (centers, assign, last, iterations)
}

/// Lloyd k-means on scalar power values with k-means++ seeding.
///
/// The fit runs on a sorted copy, so the result does not depend on row order.
pub fn kmeans_power(powers: &[f64], k: usize, seed: u64) -> Result<Clustering> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {k}")));
    }
    if powers.iter().any(|p| !p.is_finite()) {
        return Err(Error::Contract("power values must be finite".into()));
    }
    let mut sorted = powers.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() < k {
        return Err(Error::Contract(format!(
            "{} distinct power values, need at least {k}",
            distinct.len()
        )));
    }
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(RESTARTS).wrapping_add(restart));
        let init = seed_plus_plus(&sorted, k, &mut rng);
        let (centers, _, inertia, iters) = lloyd(&sorted, init);
        if best.as_ref().is_none_or(|b| inertia < b.1) {
            best = Some((centers, inertia, iters));
        }
    }
    let (mut centers, _, iterations) = best.expect("at least one restart");
    centers.sort_by(f64::total_cmp);
    // score on the sorted copy so float summation order is fixed too
    let sorted_assign: Vec<usize> = sorted.iter().map(|&x| nearest(&centers, x)).collect();
    let inertia = inertia(&sorted, &centers, &sorted_assign);
    let mut c = Clustering { centers, assignments: sorted_assign, silhouette: 0.0, inertia, iterations };
    c.silhouette = silhouette(&c, &sorted)?;
    c.assignments = powers.iter().map(|&x| nearest(&c.centers, x)).collect();
    Ok(c)
}

/// Exact mean silhouette on scalars in O(n k log n) using per-cluster
/// sorted prefix sums.
pub fn silhouette(clustering: &Clustering, powers: &[f64]) -> Result<f64> {
    let k = clustering.k();
    if k < 2 {
        return Err(Error::Contract("silhouette needs at least 2 clusters".into()));
    }
    if clustering.assignments.len() != powers.len() {
        return Err(Error::Contract("clustering and power rows differ in length".into()));
    }
    let mut members: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (&x, &a) in powers.iter().zip(&clustering.assignments) {
        members
            .get_mut(a)
            .ok_or_else(|| Error::Contract(format!("assignment {a} out of range")))?
            .push(x);
    }
    if let Some(j) = members.iter().position(Vec::is_empty) {
        return Err(Error::Contract(format!("cluster {j} is empty")));
    }
    let sums: Vec<(Vec<f64>, Vec<f64>)> = members
        .into_iter()
        .map(|mut m| {
            m.sort_by(f64::total_cmp);
            let mut prefix = Vec::with_capacity(m.len() + 1);
            prefix.push(0.0);
            for x in &m {
                prefix.push(prefix.last().unwrap() + x);
            }
            (m, prefix)
        })
        .collect();
    let dist_sum = |j: usize, x: f64| -> f64 {
        let (m, prefix) = &sums[j];
        let below = m.partition_point(|&v| v <= x);
        let total = prefix[m.len()];
        (x * below as f64 - prefix[below]) + (total - prefix[below] - x * (m.len() - below) as f64)
    };
    let mut acc = 0.0;
    for (&x, &a) in powers.iter().zip(&clustering.assignments) {
        let own = sums[a].0.len();
        if own == 1 {
            continue;
        }
        let ai = dist_sum(a, x) / (own - 1) as f64;
        let bi = (0..k)
            .filter(|&j| j != a)
            .map(|j| dist_sum(j, x) / sums[j].0.len() as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = ai.max(bi);
        if denom > 0.0 {
            acc += (bi - ai) / denom;
        }
    }
    Ok(acc / powers.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningConstraints {
    pub max_labels: u64,
    pub max_numeric: u64,
    pub elements: u64,
    pub quantiles: u64,
    pub max_depth: u64,
    pub bram_fraction: f64,
    /// Device totals in 36 Kb blocks and DSP slices.
    pub device_bram36: f64,
    pub device_dsp: u64,
}

impl Default for TuningConstraints {
    fn default() -> Self {
        TuningConstraints {
            max_labels: 5,
            max_numeric: 8,
            elements: 64,
            quantiles: 8,
            max_depth: 7,
            bram_fraction: 0.20,
            device_bram36: 2160.0,
            device_dsp: 6840,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub k: usize,
    pub clustering: Clustering,
    pub scores: Vec<KScore>,
}

/// Pick k in `lo..=hi` (clipped to `[2, max_labels]`) with the best
/// silhouette; ties go to the smaller k.
pub fn select_k(powers: &[f64], lo: usize, hi: usize, constraints: &TuningConstraints, seed: u64) -> Result<Selection> {
    let lo = lo.max(2);
    let hi = hi.min(constraints.max_labels as usize);
    if lo > hi {
        return Err(Error::Config(format!("empty feasible k range {lo}..={hi}")));
    }
    let runs: Vec<Result<Clustering>> = std::thread::scope(|s| {
        let handles: Vec<_> = (lo..=hi)
            .map(|k| s.spawn(move || kmeans_power(powers, k, seed.wrapping_add(k as u64))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("k-means worker panicked")).collect()
    });
    let mut best: Option<Clustering> = None;
    let mut scores = Vec::new();
    for run in runs {
        let c = match run {
            Ok(c) => c,
            // k beyond the number of distinct values
            Err(Error::Contract(_)) if best.is_some() => break,
            Err(e) => return Err(e),
        };
        scores.push(KScore { k: c.k(), silhouette: c.silhouette });
        if best.as_ref().is_none_or(|b| c.silhouette > b.silhouette) {
            best = Some(c);
        }
    }
    let clustering = best.expect("non-empty range");
    Ok(Selection { k: clustering.k(), clustering, scores })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledTraces {
    pub signals: Vec<String>,
    pub activity: Vec<Vec<f64>>,
    pub labels: Vec<u32>,
    /// Label index to cluster center in watts.
    pub centers: BTreeMap<u32, f64>,
}

impl LabeledTraces {
    pub fn label_count(&self) -> usize {
        self.centers.len()
    }

    /// Restrict to a subset of signals, in the given order.
    pub fn select(&self, signals: &[String]) -> Result<LabeledTraces> {
        let idx = signals
            .iter()
            .map(|s| {
                self.signals
                    .iter()
                    .position(|t| t == s)
                    .ok_or_else(|| Error::Config(format!("unknown signal '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledTraces {
            signals: signals.to_vec(),
            activity: self.activity.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect(),
            labels: self.labels.clone(),
            centers: self.centers.clone(),
        })
    }

    /// All-numeric schema and samples for the online tree.
    pub fn to_stream(&self) -> Result<(DatasetSchema, Vec<Sample>)> {
        let attrs = self.signals.iter().map(AttributeSchema::numeric).collect();
        let schema = DatasetSchema::new(attrs, self.label_count())?;
        let samples = self
            .activity
            .iter()
            .zip(&self.labels)
            .map(|(r, &l)| Sample::new(r.clone(), Vec::new(), l))
            .collect();
        Ok((schema, samples))
    }
}

pub fn relabel_traces(traces: &TraceSet, clustering: &Clustering) -> Result<LabeledTraces> {
    if clustering.k() < 2 {
        return Err(Error::Contract("relabeling needs at least 2 clusters".into()));
    }
    if clustering.assignments.len() != traces.len() {
        return Err(Error::Contract(format!(
            "clustering covers {} rows, traces have {}",
            clustering.assignments.len(),
            traces.len()
        )));
    }
    if let Some(&a) = clustering.assignments.iter().find(|&&a| a >= clustering.k()) {
        return Err(Error::Contract(format!("assignment {a} out of range")));
    }
    Ok(LabeledTraces {
        signals: traces.signals.clone(),
        activity: traces.activity.clone(),
        labels: clustering.assignments.iter().map(|&a| a as u32).collect(),
        centers: clustering.centers.iter().enumerate().map(|(j, &c)| (j as u32, c)).collect(),
    })
}

fn gini_of(counts: &[f64], n: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / n).powi(2)).sum::<f64>()
}

/// Gini-gain importance per attribute from a depth-limited CART fit.
pub fn cart_importance(rows: &[Vec<f64>], labels: &[u32], labels_k: usize, max_depth: usize) -> Vec<f64> {
    let m = rows.first().map_or(0, Vec::len);
    let mut importance = vec![0.0; m];
    let idx: Vec<usize> = (0..rows.len()).collect();
    grow(rows, labels, labels_k, idx, 1, max_depth, &mut importance);
    importance
}

fn grow(
    rows: &[Vec<f64>],
    labels: &[u32],
    k: usize,
    idx: Vec<usize>,
    depth: usize,
    max_depth: usize,
    importance: &mut [f64],
) {
    let n = idx.len();
    if n < 2 || depth > max_depth {
        return;
    }
    let mut counts = vec![0.0; k];
    for &i in &idx {
        counts[labels[i] as usize] += 1.0;
    }
    let parent = gini_of(&counts, n as f64);
    if parent == 0.0 {
        return;
    }
    // (gain, attribute, threshold)
    let mut best: Option<(f64, usize, f64)> = None;
    for a in 0..importance.len() {
        let mut order = idx.clone();
        order.sort_by(|&x, &y| rows[x][a].total_cmp(&rows[y][a]));
        let mut left = vec![0.0; k];
        for pos in 0..n - 1 {
            left[labels[order[pos]] as usize] += 1.0;
            let (v, next) = (rows[order[pos]][a], rows[order[pos + 1]][a]);
            if v == next {
                continue;
            }
            let nl = (pos + 1) as f64;
            let nr = n as f64 - nl;
            let right: Vec<f64> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
            let gain = n as f64 * parent - nl * gini_of(&left, nl) - nr * gini_of(&right, nr);
            if best.is_none_or(|b| gain > b.0 + 1e-12) {
                best = Some((gain, a, v + (next - v) / 2.0));
            }
        }
    }
    let Some((gain, a, threshold)) = best else { return };
    if gain <= 1e-12 {
        return;
    }
    importance[a] += gain;
    let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| rows[i][a] <= threshold);
    grow(rows, labels, k, l, depth + 1, max_depth, importance);
    grow(rows, labels, k, r, depth + 1, max_depth, importance);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    /// Every signal, most important first.
    pub order: Vec<String>,
    /// The surviving `N_max` signals, most important first.
    pub selected: Vec<String>,
}

/// Recursive elimination: fit a CART on the design window, drop the least
/// important attribute (ties drop the later one), repeat until `max_numeric`
/// remain.
pub fn rank_attributes(traces: &LabeledTraces, constraints: &TuningConstraints) -> Ranking {
    let window = traces.activity.len().min(DESIGN_WINDOW);
    let rows = &traces.activity[..window];
    let labels = &traces.labels[..window];
    let k = traces.label_count().max(labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0));
    let keep = constraints.max_numeric as usize;
    let mut alive: Vec<usize> = (0..traces.signals.len()).collect();
    if alive.len() <= keep {
        log::warn!("{} signals already within the limit of {keep}; ranking is the input order", alive.len());
        let order = traces.signals.clone();
        return Ranking { selected: order.clone(), order };
    }
    let project = |alive: &[usize]| -> Vec<Vec<f64>> {
        rows.iter().map(|r| alive.iter().map(|&i| r[i]).collect()).collect()
    };
    let mut eliminated = Vec::new();
    let importance = loop {
        let importance = cart_importance(&project(&alive), labels, k, CART_DEPTH);
        if alive.len() <= keep {
            break importance;
        }
        let mut worst = 0;
        for j in 1..alive.len() {
            if importance[j] <= importance[worst] {
                worst = j;
            }
        }
        eliminated.push(alive.remove(worst));
    };
    let mut survivors: Vec<(usize, f64)> = alive.into_iter().zip(importance).collect();
    survivors.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let selected: Vec<String> = survivors.iter().map(|(i, _)| traces.signals[*i].clone()).collect();
    let mut order = selected.clone();
    order.extend(eliminated.iter().rev().map(|&i| traces.signals[i].clone()));
    Ranking { order, selected }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub pass: bool,
    pub violations: Vec<String>,
    pub bram36: f64,
    pub bram_fraction: f64,
    /// Per-term share of the device BRAM.
    pub bram_terms: BTreeMap<String, f64>,
    pub dsp: u64,
    pub dsp_fraction: f64,
}

pub fn check_constraints(params: &DesignParams, constraints: &TuningConstraints) -> ConstraintReport {
    let c = constraints;
    let mut violations = Vec::new();
    let mut require = |ok: bool, name: String| {
        if !ok {
            violations.push(name);
        }
    };
    require(params.labels <= c.max_labels, format!("L ≤ {}", c.max_labels));
    require(params.numeric <= c.max_numeric, format!("N ≤ {}", c.max_numeric));
    require(params.elements == c.elements, format!("E = {}", c.elements));
    require(params.quantiles == c.quantiles, format!("Q = {}", c.quantiles));
    require(params.depth <= c.max_depth, format!("depth ≤ {}", c.max_depth));

    let b = cost::bram(params);
    let share = |blocks: u64| blocks as f64 / 2.0 / c.device_bram36;
    let bram_fraction = share(b.overall);
    require(
        bram_fraction <= c.bram_fraction,
        format!("BRAM ≤ {:.0}% (model {:.1}%)", c.bram_fraction * 100.0, bram_fraction * 100.0),
    );
    let bram_terms = [
        ("inference", b.inference),
        ("numeric", b.numeric),
        ("categorical", b.categorical),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), share(v)))
    .collect();
    let dsp = cost::dsp(params).overall;
    ConstraintReport {
        pass: violations.is_empty(),
        violations,
        bram36: b.bram36(),
        bram_fraction,
        bram_terms,
        dsp,
        dsp_fraction: dsp as f64 / c.device_dsp as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::Normal;

    fn blobs(means: &[f64], sigma: f64, per: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for &m in means {
            let d = Normal::new(m, sigma).unwrap();
            out.extend((0..per).map(|_| d.sample(&mut rng).max(0.0)));
        }
        out
    }

    fn brute_silhouette(c: &Clustering, xs: &[f64]) -> f64 {
        let k = c.k();
        let mut total = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let a_i = c.assignments[i];
            let mut sums = vec![0.0; k];
            let mut counts = vec![0usize; k];
            for (j, &y) in xs.iter().enumerate() {
                if i != j {
                    sums[c.assignments[j]] += (x - y).abs();
                    counts[c.assignments[j]] += 1;
                }
            }
            if counts[a_i] == 0 {
                continue;
            }
            let a = sums[a_i] / counts[a_i] as f64;
            let b = (0..k).filter(|&j| j != a_i).map(|j| sums[j] / counts[j] as f64).fold(f64::INFINITY, f64::min);
            if a.max(b) > 0.0 {
                total += (b - a) / a.max(b);
            }
        }
        total / xs.len() as f64
    }

    #[test]
    fn two_obvious_groups() {
        let c = kmeans_power(&[1.0, 2.0, 10.0, 11.0], 2, 1).unwrap();
        assert_eq!(c.centers, vec![1.5, 10.5]);
        assert_eq!(c.assignments, vec![0, 0, 1, 1]);
    }

    #[test]
    fn identical_values_rejected() {
        assert!(kmeans_power(&[3.0; 10], 2, 1).is_err());
        assert!(kmeans_power(&[1.0, 2.0], 1, 1).is_err());
    }

    #[test]
    fn three_blobs_recovered() {
        let xs = blobs(&[1.0, 5.0, 9.0], 0.1, 300, 7);
        let c = kmeans_power(&xs, 3, 1).unwrap();
        for (c, m) in c.centers.iter().zip([1.0, 5.0, 9.0]) {
            assert!((c - m).abs() < 0.05, "{c} vs {m}");
        }
    }

    #[test]
    fn silhouette_examples() {
        let xs = [0.0, 0.01, 10.0, 10.01];
        let c = kmeans_power(&xs, 2, 3).unwrap();
        assert!(c.silhouette > 0.9);

        let tight = [1.0, 1.0, 5.0, 5.0];
        let c = kmeans_power(&tight, 2, 3).unwrap();
        assert_eq!(c.silhouette, 1.0);

        let one = blobs(&[5.0], 0.5, 400, 2);
        let c = kmeans_power(&one, 2, 3).unwrap();
        assert!(c.silhouette < 0.7, "{}", c.silhouette);
        let blob_pair = blobs(&[1.0, 9.0], 0.1, 200, 2);
        let sep = kmeans_power(&blob_pair, 2, 3).unwrap();
        assert!(c.silhouette < sep.silhouette - 0.25);
    }

    #[test]
    fn silhouette_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..30 {
            let n = rng.random_range(6..80);
            let xs: Vec<f64> = (0..n).map(|_| (rng.random_range(0..40) as f64) * 0.25).collect();
            let k = rng.random_range(2..5);
            let Ok(c) = kmeans_power(&xs, k, trial) else { continue };
            let fast = silhouette(&c, &xs).unwrap();
            let slow = brute_silhouette(&c, &xs);
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }

    #[test]
    fn silhouette_rejects_empty_cluster() {
        let c = Clustering {
            centers: vec![1.0, 2.0, 3.0],
            assignments: vec![0, 0, 1],
            silhouette: 0.0,
            inertia: 0.0,
            iterations: 0,
        };
        assert!(silhouette(&c, &[1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn select_k_examples() {
        let xs = blobs(&[1.0, 5.0, 9.0], 0.1, 200, 9);
        let tc = TuningConstraints::default();
        let s = select_k(&xs, 2, 5, &tc, 1).unwrap();
        assert_eq!(s.k, 3);
        assert_eq!(s.scores.len(), 4);

        let narrow = TuningConstraints { max_labels: 2, ..tc.clone() };
        let s = select_k(&xs, 2, 5, &narrow, 1).unwrap();
        assert_eq!(s.k, 2);
        assert_eq!(s.scores.len(), 1);

        assert!(select_k(&xs, 4, 5, &narrow, 1).is_err());
    }

    #[test]
    fn select_k_ignores_row_order() {
        let mut xs = blobs(&[1.0, 3.0, 9.0], 0.4, 150, 4);
        let a = select_k(&xs, 2, 5, &TuningConstraints::default(), 5).unwrap();
        xs.reverse();
        let b = select_k(&xs, 2, 5, &TuningConstraints::default(), 5).unwrap();
        assert_eq!(a.k, b.k);
        assert_eq!(a.clustering.centers, b.clustering.centers);
        assert_eq!(a.scores, b.scores);
    }

    #[test]
    fn relabel_examples() {
        let xs = [1.0, 2.0, 10.0, 11.0];
        let traces = TraceSet::new(vec!["s".into()], xs.iter().map(|&x| vec![x]).collect(), xs.to_vec()).unwrap();
        let c = kmeans_power(&xs, 2, 1).unwrap();
        let l = relabel_traces(&traces, &c).unwrap();
        assert_eq!(l.labels, vec![0, 0, 1, 1]);
        assert_eq!(l.centers, BTreeMap::from([(0, 1.5), (1, 10.5)]));

        let single = Clustering { centers: vec![6.0], assignments: vec![0; 4], ..c.clone() };
        assert!(relabel_traces(&traces, &single).is_err());

        let short = Clustering { assignments: vec![0, 1], ..c.clone() };
        assert!(relabel_traces(&traces, &short).is_err());
    }

    #[test]
    fn relabel_round_trip_within_radius() {
        let xs = blobs(&[2.0, 4.0, 7.0], 0.3, 100, 5);
        let traces = TraceSet::new(vec![], vec![vec![]; xs.len()], xs.clone()).unwrap();
        let c = kmeans_power(&xs, 3, 2).unwrap();
        let l = relabel_traces(&traces, &c).unwrap();
        assert_eq!(l.labels.len(), xs.len());
        let mut radius = vec![0.0f64; 3];
        for (x, &a) in xs.iter().zip(&c.assignments) {
            radius[a] = radius[a].max((x - c.centers[a]).abs());
        }
        for (x, &lab) in xs.iter().zip(&l.labels) {
            assert!((x - l.centers[&lab]).abs() <= radius[lab as usize]);
        }
    }

    fn labeled(signals: usize, rows: Vec<(Vec<f64>, u32)>, k: usize) -> LabeledTraces {
        LabeledTraces {
            signals: (0..signals).map(|i| format!("s{i}")).collect(),
            activity: rows.iter().map(|r| r.0.clone()).collect(),
            labels: rows.iter().map(|r| r.1).collect(),
            centers: (0..k as u32).map(|j| (j, j as f64)).collect(),
        }
    }

    #[test]
    fn label_identical_attribute_ranked_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = (0..2000)
            .map(|_| {
                let y = rng.random_range(0..3u32);
                let mut r: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
                r[4] = y as f64;
                (r, y)
            })
            .collect();
        let t = labeled(6, rows, 3);
        let tc = TuningConstraints { max_numeric: 2, ..TuningConstraints::default() };
        let r = rank_attributes(&t, &tc);
        assert_eq!(r.order[0], "s4");
        assert_eq!(r.selected.len(), 2);
        let mut sorted = r.order.clone();
        sorted.sort();
        assert_eq!(sorted, t.signals);
        assert_eq!(r, rank_attributes(&t, &tc));
    }

    #[test]
    fn constant_attribute_eliminated_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rows = (0..1000)
            .map(|_| {
                let r = vec![0.5, rng.random::<f64>(), rng.random::<f64>()];
                let y = u32::from(r[1] + 0.3 * r[2] > 0.6);
                (r, y)
            })
            .collect();
        let t = labeled(3, rows, 2);
        let tc = TuningConstraints { max_numeric: 2, ..TuningConstraints::default() };
        let r = rank_attributes(&t, &tc);
        assert_eq!(r.order.last().unwrap(), "s0");
        assert!(!r.selected.contains(&"s0".to_string()));
    }

    #[test]
    fn duplicated_attribute_survives_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rows = (0..3000)
            .map(|_| {
                let x = rng.random::<f64>();
                let y = rng.random::<f64>();
                let z = rng.random::<f64>();
                let lab = u32::from(x > 0.5) + u32::from(y > 0.3);
                (vec![x, x, y, z], lab)
            })
            .collect();
        let t = labeled(4, rows, 3);
        let tc = TuningConstraints { max_numeric: 2, ..TuningConstraints::default() };
        let r = rank_attributes(&t, &tc);
        let dups = r.selected.iter().filter(|s| *s == "s0" || *s == "s1").count();
        assert_eq!(dups, 1, "{:?}", r);
        assert!(r.selected.contains(&"s2".to_string()));
    }

    #[test]
    fn few_attributes_identity() {
        let t = labeled(2, vec![(vec![0.0, 1.0], 0), (vec![1.0, 0.0], 1)], 2);
        let r = rank_attributes(&t, &TuningConstraints::default());
        assert_eq!(r.order, t.signals);
    }

    #[test]
    fn constraint_checks() {
        let base = DesignParams {
            labels: 5,
            numeric: 8,
            categorical: 0,
            quantiles: 8,
            elements: 64,
            depth: 7,
            ..DesignParams::default()
        };
        let tc = TuningConstraints::default();
        let rep = check_constraints(&base, &tc);
        assert!(rep.violations.iter().all(|v| v.starts_with("BRAM")), "{:?}", rep.violations);
        assert_eq!(rep.pass, rep.bram_fraction <= 0.20);
        let total: f64 = rep.bram_terms.values().sum();
        assert!((total - rep.bram_fraction).abs() < 1e-12);

        let l6 = check_constraints(&DesignParams { labels: 6, ..base.clone() }, &tc);
        assert!(!l6.pass);
        assert!(l6.violations.iter().any(|v| v == "L ≤ 5"));
        let n9 = check_constraints(&DesignParams { numeric: 9, ..base.clone() }, &tc);
        assert!(n9.violations.iter().any(|v| v == "N ≤ 8"));

        let small = DesignParams { numeric: 2, labels: 2, ..base };
        assert!(check_constraints(&small, &tc).pass);
    }

    #[test]
    fn trace_csv() {
        let text = "a,b,power_w\n0.1,0.2,1.5\n0.3,0.4,2.5\n";
        let t = TraceSet::from_reader(text.as_bytes()).unwrap();
        assert_eq!(t.signals, vec!["a", "b"]);
        assert_eq!(t.power, vec![1.5, 2.5]);
        assert!(TraceSet::from_reader("a,power\n1,2\n".as_bytes()).is_err());
        assert!(TraceSet::from_reader("a,power_w\n1,-2\n".as_bytes()).is_err());
        assert!(TraceSet::from_reader("a,power_w\n1,2,3\n".as_bytes()).is_err());
    }
}
