//! Analytical performance and resource models of the streaming tree
//! accelerator.
//!
//! Every ceiling is computed in integer arithmetic. BRAM figures are in the
//! models' native unit (18 Kb blocks, matching the 18/36-bit width divisors);
//! [`BramReport::bram36`] halves them for comparison with 36 Kb block counts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input buffer + internal buffer, four cycles each.
pub const L_BUFF: u64 = 8;
/// Pipeline stages per tree level.
pub const P_LEVEL: u64 = 3;
pub const L_PRED: u64 = 2;
pub const B_NUMERIC_BITS: u64 = 32;
pub const D_SPLIT: u64 = 4;
pub const B_BUFF_I: u64 = 32;
/// Bytes per GB in the bandwidth figures.
pub const GIGA: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignParams {
    pub labels: u64,
    pub numeric: u64,
    pub categorical: u64,
    /// `V_i` for each categorical attribute.
    pub values: Vec<u64>,
    pub quantiles: u64,
    pub elements: u64,
    pub depth: u64,
    pub freq_mhz: f64,
    pub samples: u64,
    pub cold_start_cycles: f64,
    pub cycles_per_sample: f64,
    pub ddr_read_gbs: f64,
    pub ddr_write_gbs: f64,
}

impl Default for DesignParams {
    fn default() -> Self {
        DesignParams {
            labels: 2,
            numeric: 1,
            categorical: 0,
            values: Vec::new(),
            quantiles: 8,
            elements: 1024,
            depth: 15,
            freq_mhz: 200.0,
            samples: 0,
            cold_start_cycles: 0.0,
            cycles_per_sample: 1.047,
            ddr_read_gbs: 9.5,
            ddr_write_gbs: 8.9,
        }
    }
}

impl DesignParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.labels < 2 {
            return bad("labels must be at least 2");
        }
        if self.numeric + self.categorical == 0 {
            return bad("need at least one attribute");
        }
        if self.values.len() as u64 != self.categorical {
            return Err(Error::Config(format!(
                "{} categorical attributes but {} value counts",
                self.categorical,
                self.values.len()
            )));
        }
        if self.values.iter().any(|&v| v < 2) {
            return bad("every categorical attribute needs at least 2 values");
        }
        if self.quantiles == 0 || self.elements == 0 || self.depth == 0 {
            return bad("quantiles, elements and depth must be positive");
        }
        if !(self.freq_mhz > 0.0) {
            return bad("frequency must be positive");
        }
        if self.cycles_per_sample <= 0.0 || self.ddr_read_gbs <= 0.0 || self.ddr_write_gbs <= 0.0 {
            return bad("cycle and bandwidth constants must be positive");
        }
        Ok(())
    }

    fn freq_hz(&self) -> f64 {
        self.freq_mhz * 1e6
    }
}

/// Parse `"2x44"`, `"3,17"` or mixes like `"2x3,17"` into a value-count list.
pub fn parse_values(spec: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || Error::Config(format!("bad value-count item '{item}'"));
        match item.split_once('x') {
            Some((v, n)) => {
                let v: u64 = v.parse().map_err(|_| bad())?;
                let n: usize = n.parse().map_err(|_| bad())?;
                out.extend(std::iter::repeat_n(v, n));
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

pub fn ceil_log2(n: u64) -> u64 {
    if n <= 1 {
        0
    } else {
        u64::from(64 - (n - 1).leading_zeros())
    }
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// `⌈2^exp⌉` for a possibly negative exponent.
fn ceil_pow2(exp: i64) -> u64 {
    if exp <= 0 {
        1
    } else {
        1u64 << exp
    }
}

pub fn latency(depth: u64) -> u64 {
    L_BUFF + P_LEVEL * depth + L_PRED
}

/// Widest categorical encoding, `max ⌈log2 V_i⌉`.
pub fn categorical_bits(values: &[u64]) -> u64 {
    values.iter().map(|&v| ceil_log2(v)).max().unwrap_or(0)
}

pub fn sample_bits(p: &DesignParams) -> u64 {
    ceil_log2(p.labels) + B_NUMERIC_BITS * p.numeric + categorical_bits(&p.values) * p.categorical
}

/// `(TP_FPGA, TP_overall)` in bits per second.
pub fn throughput(p: &DesignParams) -> Result<(f64, f64)> {
    if p.categorical > 0 && p.values.is_empty() {
        return Err(Error::Config("categorical attributes need value counts".into()));
    }
    let tp_fpga = sample_bits(p) as f64 * p.freq_hz();
    let ddr = p.ddr_read_gbs * GIGA * 8.0;
    Ok((tp_fpga, tp_fpga.min(ddr)))
}

pub fn exec_cycles(p: &DesignParams) -> f64 {
    p.cycles_per_sample * p.samples as f64 + p.cold_start_cycles
}

pub fn exec_time(p: &DesignParams) -> Result<f64> {
    if p.freq_mhz == 0.0 {
        return Err(Error::Config("frequency must be non-zero".into()));
    }
    Ok(exec_cycles(p) / p.freq_hz())
}

/// Cold-start cycles that make the model hit a measured execution time.
pub fn fit_cold_start(p: &DesignParams, measured_seconds: f64) -> f64 {
    measured_seconds * p.freq_hz() - p.cycles_per_sample * p.samples as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DspReport {
    pub numeric: u64,
    pub categorical: u64,
    pub split: u64,
    pub overall: u64,
}

pub fn dsp(p: &DesignParams) -> DspReport {
    let numeric = (3 * p.labels + 12) * p.numeric;
    let categorical = (2 * p.labels + 4) * p.categorical;
    DspReport {
        numeric,
        categorical,
        split: D_SPLIT,
        overall: numeric + categorical + D_SPLIT,
    }
}

/// Node-memory blocks of one tree level (root is level 1).
pub fn bram_level(level: u64, depth: u64, attributes: u64) -> u64 {
    let width = 33 + depth + ceil_log2(depth) + ceil_log2(attributes);
    match level {
        0 | 1 => 0,
        2..=11 => ceil_div(width, 18),
        _ => ceil_div(width, 36) * (1 << (level - 11)) + 4,
    }
}

pub fn bram_pred(elements: u64, labels: u64) -> u64 {
    let e_blocks = ceil_div(elements, 1024);
    ceil_pow2(ceil_log2(elements) as i64 + ceil_log2(labels) as i64 - 10)
        + e_blocks
        + ceil_div(12 + labels + ceil_log2(labels), 18) * e_blocks
}

pub fn bram_quantile(numeric: u64, elements: u64, labels: u64, quantiles: u64) -> u64 {
    let depth_blocks = ceil_pow2(ceil_log2(elements) as i64 + ceil_log2(labels) as i64 - 10);
    numeric * (depth_blocks * 2 * quantiles + ceil_div(8 * quantiles, 9) * labels)
}

pub fn bram_buff_numeric(numeric: u64, elements: u64, labels: u64) -> u64 {
    let l = labels;
    numeric * (8 + 2 * l + ceil_div(ceil_log2(elements) + ceil_log2(l) + 32, 18))
        + numeric
            * ceil_div(elements, 1024)
            * (5 + 4 * l + ceil_div(1 + 6 * l, 18) + ceil_div(2 * l, 3))
}

pub fn bram_buff_categorical(categorical: u64, elements: u64, labels: u64) -> u64 {
    (ceil_div(2 * labels, 3) + 2) * ceil_div(elements, 1024) + 10 * categorical
}

pub fn bram_histogram(values: &[u64], elements: u64, labels: u64) -> u64 {
    let le = ceil_log2(elements) as i64;
    let ll = ceil_log2(labels) as i64;
    let per_pair = ceil_pow2(le - 9)
        + 3 * ceil_pow2(le + ll - 11)
        + ceil_pow2(le + ll - 13)
        + ceil_div(elements, 8192);
    values.iter().map(|&v| ceil_div(v, 2) * per_pair).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BramReport {
    pub buff_inference: u64,
    /// `B_level` for levels `1..=D_tree`.
    pub levels: Vec<u64>,
    pub tree: u64,
    pub pred: u64,
    pub inference: u64,
    pub buff_numeric: u64,
    pub quantile: u64,
    pub numeric: u64,
    pub buff_categorical: u64,
    pub histogram: u64,
    pub categorical: u64,
    pub overall: u64,
}

impl BramReport {
    /// Overall usage in 36 Kb blocks.
    pub fn bram36(&self) -> f64 {
        self.overall as f64 / 2.0
    }
}

pub fn bram(p: &DesignParams) -> BramReport {
    let attrs = p.numeric + p.categorical;
    let levels: Vec<u64> = (1..=p.depth).map(|l| bram_level(l, p.depth, attrs)).collect();
    let tree = levels.iter().sum();
    let pred = bram_pred(p.elements, p.labels);
    let inference = B_BUFF_I + tree + pred;
    let buff_numeric = bram_buff_numeric(p.numeric, p.elements, p.labels);
    let quantile = bram_quantile(p.numeric, p.elements, p.labels, p.quantiles);
    let numeric = buff_numeric + quantile;
    let buff_categorical = bram_buff_categorical(p.categorical, p.elements, p.labels);
    let histogram = bram_histogram(&p.values, p.elements, p.labels);
    let categorical = buff_categorical + histogram;
    BramReport {
        buff_inference: B_BUFF_I,
        levels,
        tree,
        pred,
        inference,
        buff_numeric,
        quantile,
        numeric,
        buff_categorical,
        histogram,
        categorical,
        overall: inference + numeric + categorical,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub params: DesignParams,
    pub latency_cycles: u64,
    pub sample_bits: u64,
    pub tp_fpga_bps: f64,
    pub tp_overall_bps: f64,
    pub exec_cycles: f64,
    pub exec_time_s: f64,
    pub dsp: DspReport,
    pub bram: BramReport,
    pub bram36: f64,
}

pub fn report(p: &DesignParams) -> Result<CostReport> {
    p.validate()?;
    let (tp_fpga_bps, tp_overall_bps) = throughput(p)?;
    let bram = bram(p);
    Ok(CostReport {
        params: p.clone(),
        latency_cycles: latency(p.depth),
        sample_bits: sample_bits(p),
        tp_fpga_bps,
        tp_overall_bps,
        exec_cycles: exec_cycles(p),
        exec_time_s: exec_time(p)?,
        dsp: dsp(p),
        bram36: bram.bram36(),
        bram,
    })
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(
            f,
            "design      L={} N={} C={} Q={} E={} D={} f={} MHz S={}",
            p.labels, p.numeric, p.categorical, p.quantiles, p.elements, p.depth, p.freq_mhz, p.samples
        )?;
        writeln!(f, "latency     {} cycles", self.latency_cycles)?;
        writeln!(
            f,
            "throughput  {:.3} Gb/s fpga, {:.3} Gb/s overall ({} bits/sample)",
            self.tp_fpga_bps / 1e9,
            self.tp_overall_bps / 1e9,
            self.sample_bits
        )?;
        writeln!(f, "exec time   {:.6} ms ({:.0} cycles)", self.exec_time_s * 1e3, self.exec_cycles)?;
        let d = &self.dsp;
        writeln!(
            f,
            "dsp         {} = numeric {} + categorical {} + split {}",
            d.overall, d.numeric, d.categorical, d.split
        )?;
        let b = &self.bram;
        writeln!(
            f,
            "bram        {} (= {:.1} x36)  inference {} [buff {} tree {} pred {}]",
            b.overall, self.bram36, b.inference, b.buff_inference, b.tree, b.pred
        )?;
        writeln!(f, "            numeric {} [buff {} quantile {}]", b.numeric, b.buff_numeric, b.quantile)?;
        write!(
            f,
            "            categorical {} [buff {} histogram {}]",
            b.categorical, b.buff_categorical, b.histogram
        )
    }
}
