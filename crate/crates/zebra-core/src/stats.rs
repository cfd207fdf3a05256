//! Paired significance tests and labeling-cost accounting.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two aligned per-prompt score sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    pub ids: Vec<String>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PairedSample {
    pub fn new(ids: Vec<String>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || ids.len() != a.len() {
            return Err(Error::Dimension(format!(
                "paired sample lengths differ: {} ids, {} vs {} scores",
                ids.len(),
                a.len(),
                b.len()
            )));
        }
        if a.len() < 2 {
            return Err(Error::Config(format!(
                "paired sample needs n >= 2, got {}",
                a.len()
            )));
        }
        Ok(PairedSample { ids, a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn diffs(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(x, y)| x - y).collect()
    }

    /// Loads two `id,score` CSV files and aligns rows by id, keeping the
    /// first file's order. Mismatched id sets are an error.
    pub fn from_csv_paths(path_a: &Path, path_b: &Path) -> Result<Self> {
        let a = read_score_csv(path_a)?;
        let b = read_score_csv(path_b)?;
        if a.len() != b.len() {
            return Err(Error::Validation(format!(
                "id sets differ: {} rows in {}, {} rows in {}",
                a.len(),
                path_a.display(),
                b.len(),
                path_b.display()
            )));
        }
        let mut ids = Vec::with_capacity(a.len());
        let mut xs = Vec::with_capacity(a.len());
        let mut ys = Vec::with_capacity(a.len());
        for (id, x) in a {
            let y = b
                .iter()
                .find(|(other, _)| *other == id)
                .map(|(_, y)| *y)
                .ok_or_else(|| {
                    Error::Validation(format!("id `{id}` missing from {}", path_b.display()))
                })?;
            ids.push(id);
            xs.push(x);
            ys.push(y);
        }
        PairedSample::new(ids, xs, ys)
    }
}

fn read_score_csv(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = String::new();
    file.read_to_string(&mut buf)
        .map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(buf.as_bytes());
    let mut rows = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Validation(format!("row {}: {e}", idx + 1)))?;
        if record.len() != 2 {
            return Err(Error::Validation(format!(
                "row {}: expected 2 columns (id, score), got {}",
                idx + 1,
                record.len()
            )));
        }
        // Optional header line.
        if idx == 0 && record[0].eq_ignore_ascii_case("id") {
            continue;
        }
        let id = record[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::Validation(format!(
                "row {}: duplicate id `{id}`",
                idx + 1
            )));
        }
        let score: f64 = record[1].parse().map_err(|_| {
            Error::Validation(format!("row {}: non-numeric score `{}`", idx + 1, &record[1]))
        })?;
        rows.push((id, score));
    }
    if rows.is_empty() {
        return Err(Error::Validation(format!("{}: no rows", path.display())));
    }
    Ok(rows)
}

/// Paired t-test output. `degenerate` marks the all-differences-zero case
/// where `p_t` is pinned to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_stat: f64,
    pub p_t: f64,
    pub mean_delta: f64,
    pub degenerate: bool,
}

/// Two-sided paired Student's t-test on `a - b` with sample (n-1) variance.
pub fn paired_t_test(sample: &PairedSample) -> Result<TTestResult> {
    let d = sample.diffs();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        if d.iter().all(|&x| x == 0.0) {
            return Ok(TTestResult {
                t_stat: 0.0,
                p_t: 1.0,
                mean_delta: 0.0,
                degenerate: true,
            });
        }
        return Err(Error::ZeroVariance);
    }
    let t = mean / (var.sqrt() / n.sqrt());
    let p = student_t_two_sided_p(t, n - 1.0);
    Ok(TTestResult {
        t_stat: t,
        p_t: p,
        mean_delta: mean,
        degenerate: false,
    })
}

/// Two-sided p-value for a t statistic with `df` degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    regularized_inc_beta(df / 2.0, 0.5, df / (df + t * t))
}

/// Student's t cumulative distribution function.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let p = student_t_two_sided_p(t, df);
    if t >= 0.0 {
        1.0 - p / 2.0
    } else {
        p / 2.0
    }
}

// Lanczos approximation (g = 7, n = 9).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

// Continued fraction for the incomplete beta (Lentz's method).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 1e-15;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn regularized_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Sign-flip permutation test on the paired differences.
///
/// The statistic is `|mean(d)|`; the p-value uses add-one smoothing,
/// `(hits + 1) / (n_shuffles + 1)`, under the >= rule. A fixed seed fixes
/// the result.
pub fn permutation_test(sample: &PairedSample, n_shuffles: u64, seed: u64) -> Result<f64> {
    if n_shuffles < 1 {
        return Err(Error::Config("n_shuffles must be at least 1".into()));
    }
    let d = sample.diffs();
    let n = d.len() as f64;
    let observed = (d.iter().sum::<f64>() / n).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: u64 = 0;
    for _ in 0..n_shuffles {
        let sum: f64 = d
            .iter()
            .map(|&x| if rng.random::<bool>() { x } else { -x })
            .sum();
        if (sum / n).abs() >= observed {
            hits += 1;
        }
    }
    Ok((hits + 1) as f64 / (n_shuffles + 1) as f64)
}

/// Combined comparison output; the `stats compare` JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub t: f64,
    pub p_t: f64,
    pub mean_delta: f64,
    pub p_perm: f64,
    pub n: usize,
    pub n_shuffles: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

/// Runs both tests on one sample.
pub fn compare(sample: &PairedSample, n_shuffles: u64, seed: u64) -> Result<ComparisonResult> {
    let t = paired_t_test(sample)?;
    let p_perm = permutation_test(sample, n_shuffles, seed)?;
    Ok(ComparisonResult {
        t: t.t_stat,
        p_t: t.p_t,
        mean_delta: t.mean_delta,
        p_perm,
        n: sample.len(),
        n_shuffles,
        seed,
        degenerate: t.degenerate,
    })
}

/// One labeling-cost row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub label: String,
    pub pairs: u64,
    pub unit_cost: f64,
    pub total: f64,
}

/// Cost report: the priced instance-wise row next to the zero-cost
/// behavior-wise row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub rows: Vec<CostRow>,
}

pub fn cost_report(n_pairs: u64, unit_cost: f64) -> Result<CostReport> {
    if !unit_cost.is_finite() || unit_cost < 0.0 {
        return Err(Error::Validation(format!(
            "unit cost must be a non-negative number, got {unit_cost}"
        )));
    }
    Ok(CostReport {
        rows: vec![
            CostRow {
                label: "instance_wise".into(),
                pairs: n_pairs,
                unit_cost,
                total: n_pairs as f64 * unit_cost,
            },
            CostRow {
                label: "zebra".into(),
                pairs: n_pairs,
                unit_cost: 0.0,
                total: 0.0,
            },
        ],
    })
}
