//! Behavior profiles derived from benchmark score tables.
//!
//! A raw model-by-benchmark score table is min-max normalized per benchmark
//! column into ability vectors. The mean of a model's normalized entries is
//! its MB-SUP score; cosine similarity between ability vectors gives the
//! MB-SIM matrix used by the pair-selection strategies.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Capability category a benchmark is tagged with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Knowledge,
    Reasoning,
    InstructionFollowing,
    Other,
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "knowledge" => Ok(Category::Knowledge),
            "reasoning" => Ok(Category::Reasoning),
            "instruction_following" | "instruction-following" => {
                Ok(Category::InstructionFollowing)
            }
            "other" => Ok(Category::Other),
            other => Err(Error::Config(format!("unknown category `{other}`"))),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::Knowledge => "knowledge",
            Category::Reasoning => "reasoning",
            Category::InstructionFollowing => "instruction_following",
            Category::Other => "other",
        };
        f.write_str(s)
    }
}

/// A benchmark column: name plus capability tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Benchmark {
    pub name: String,
    pub category: Category,
}

/// Raw model-by-benchmark score matrix. Cells may be missing; scales may be
/// heterogeneous across columns (percentages next to fractions are fine
/// because normalization is per column).
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkTable {
    pub models: Vec<String>,
    pub benchmarks: Vec<Benchmark>,
    /// `scores[i][b]` is model `i`'s raw score on benchmark `b`.
    pub scores: Vec<Vec<Option<f64>>>,
}

/// JSON form of a benchmark table.
#[derive(Serialize, Deserialize)]
struct TableJson {
    models: Vec<String>,
    benchmarks: Vec<Benchmark>,
    scores: Vec<Vec<Option<f64>>>,
}

impl BenchmarkTable {
    /// Loads a table from CSV or JSON, dispatching on the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json_reader(reader),
            _ => Self::from_csv_reader(reader),
        }
    }

    /// Parses the benchmark CSV format: first column `model`, remaining
    /// columns benchmark names, optional second header line `#category:`
    /// tagging each column. Empty cells are missing values.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let mut records = csv.records();
        let header = match records.next() {
            Some(rec) => rec.map_err(|e| Error::Schema(format!("bad header: {e}")))?,
            None => return Err(Error::Schema("empty table".into())),
        };
        if header.len() < 2 {
            return Err(Error::Schema(
                "header must name a model column and at least one benchmark".into(),
            ));
        }
        if !header[0].eq_ignore_ascii_case("model") {
            return Err(Error::Schema(format!(
                "first header column must be `model`, got `{}`",
                &header[0]
            )));
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();

        let mut categories = vec![Category::Other; names.len()];
        let mut models = Vec::new();
        let mut scores = Vec::new();
        let mut row_no = 1usize;

        for rec in records {
            row_no += 1;
            let rec = rec.map_err(|e| Error::Schema(format!("row {row_no}: {e}")))?;
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            if rec[0].starts_with("#category") {
                if rec.len() != names.len() + 1 {
                    return Err(Error::Schema(format!(
                        "category line has {} columns, expected {}",
                        rec.len(),
                        names.len() + 1
                    )));
                }
                for (slot, field) in categories.iter_mut().zip(rec.iter().skip(1)) {
                    *slot = field.parse()?;
                }
                continue;
            }
            if rec.len() != names.len() + 1 {
                return Err(Error::Schema(format!(
                    "row {row_no} has {} columns, expected {}",
                    rec.len(),
                    names.len() + 1
                )));
            }
            let model = rec[0].to_owned();
            let mut row = Vec::with_capacity(names.len());
            for (b, cell) in rec.iter().skip(1).enumerate() {
                if cell.is_empty() {
                    row.push(None);
                } else {
                    let value = cell.parse::<f64>().map_err(|_| Error::Parse {
                        row: row_no,
                        column: names[b].clone(),
                        message: format!("non-numeric cell `{cell}`"),
                    })?;
                    row.push(Some(value));
                }
            }
            models.push(model);
            scores.push(row);
        }

        let benchmarks = names
            .into_iter()
            .zip(categories)
            .map(|(name, category)| Benchmark { name, category })
            .collect();
        let table = BenchmarkTable {
            models,
            benchmarks,
            scores,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let raw: TableJson = serde_json::from_reader(reader)?;
        let table = BenchmarkTable {
            models: raw.models,
            benchmarks: raw.benchmarks,
            scores: raw.scores,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        if self.models.is_empty() || self.benchmarks.is_empty() {
            return Err(Error::Schema("empty table".into()));
        }
        let mut seen = HashSet::new();
        for model in &self.models {
            if model.is_empty() {
                return Err(Error::Schema("empty model identifier".into()));
            }
            if !seen.insert(model.as_str()) {
                return Err(Error::Schema(format!("duplicate model `{model}`")));
            }
        }
        let mut seen = HashSet::new();
        for bench in &self.benchmarks {
            if !seen.insert(bench.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate benchmark `{}`",
                    bench.name
                )));
            }
        }
        for (model, row) in self.models.iter().zip(&self.scores) {
            if row.len() != self.benchmarks.len() {
                return Err(Error::Schema(format!(
                    "model `{model}` has {} scores, expected {}",
                    row.len(),
                    self.benchmarks.len()
                )));
            }
            if row.iter().all(|c| c.is_none()) {
                return Err(Error::Schema(format!(
                    "model `{model}` has no non-missing score"
                )));
            }
        }
        if self.scores.len() != self.models.len() {
            return Err(Error::Schema("score row count != model count".into()));
        }
        Ok(())
    }

    /// Drops the named models, e.g. pool members whose scores are unreliable.
    /// Normalization ranges are computed after the drop.
    pub fn exclude_models(&mut self, excluded: &[String]) {
        let keep: Vec<bool> = self
            .models
            .iter()
            .map(|m| !excluded.iter().any(|e| e == m))
            .collect();
        let mut idx = 0;
        self.models.retain(|_| {
            let k = keep[idx];
            idx += 1;
            k
        });
        let mut idx = 0;
        self.scores.retain(|_| {
            let k = keep[idx];
            idx += 1;
            k
        });
    }
}

/// Per-model normalized ability vector plus its MB-SUP mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbilityProfile {
    pub model: String,
    /// One entry in [0, 1] per benchmark, in table column order.
    pub vector: Vec<f64>,
    /// Mean of `vector`; the model's scalar superiority score.
    pub mb_sup: f64,
    /// Benchmarks whose missing cells were imputed with the column mean.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub imputed: Vec<String>,
    /// Free-form annotation (e.g. score provenance caveats).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Min-max normalizes each benchmark column and derives MB-SUP per model.
///
/// Missing cells are imputed with the mean of the column's normalized values
/// and the profile is flagged. A degenerate column (max == min) maps to 0.5
/// for every model, keeping it informationless.
pub fn normalize(table: &BenchmarkTable) -> Result<Vec<AbilityProfile>> {
    let n_models = table.models.len();
    let n_benches = table.benchmarks.len();
    let mut columns: Vec<Vec<Option<f64>>> = vec![vec![None; n_models]; n_benches];

    for b in 0..n_benches {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut any = false;
        for row in &table.scores {
            if let Some(v) = row[b] {
                min = min.min(v);
                max = max.max(v);
                any = true;
            }
        }
        if !any {
            return Err(Error::Normalization(format!(
                "benchmark `{}` has no non-missing score",
                table.benchmarks[b].name
            )));
        }
        let span = max - min;
        for (i, row) in table.scores.iter().enumerate() {
            columns[b][i] = row[b].map(|v| if span == 0.0 { 0.5 } else { (v - min) / span });
        }
    }

    // Column means of normalized values, used to fill missing cells.
    let col_means: Vec<f64> = columns
        .iter()
        .map(|col| {
            let present: Vec<f64> = col.iter().flatten().copied().collect();
            present.iter().sum::<f64>() / present.len() as f64
        })
        .collect();

    let profiles = table
        .models
        .iter()
        .enumerate()
        .map(|(i, model)| {
            let mut vector = Vec::with_capacity(n_benches);
            let mut imputed = Vec::new();
            for b in 0..n_benches {
                match columns[b][i] {
                    Some(v) => vector.push(v),
                    None => {
                        vector.push(col_means[b]);
                        imputed.push(table.benchmarks[b].name.clone());
                    }
                }
            }
            if !imputed.is_empty() {
                log::warn!("model `{model}`: imputed missing scores for {imputed:?}");
            }
            let mb_sup = vector.iter().sum::<f64>() / vector.len() as f64;
            AbilityProfile {
                model: model.clone(),
                vector,
                mb_sup,
                imputed,
                note: None,
            }
        })
        .collect();
    Ok(profiles)
}

/// Symmetric MB-SIM matrix over a model pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub models: Vec<String>,
    pub sim: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn index_of(&self, model: &str) -> Option<usize> {
        self.models.iter().position(|m| m == model)
    }

    /// Similarity of two models by name.
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.index_of(a)?;
        let j = self.index_of(b)?;
        Some(self.sim[i][j])
    }
}

/// Cosine similarity of two equal-length vectors. Zero vectors compare as 0
/// against anything (and are given similarity 1 with themselves only via the
/// matrix diagonal).
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    // sqrt(na * nb) keeps cosine of identical vectors exactly 1.
    (dot / (na * nb).sqrt()).clamp(0.0, 1.0)
}

/// Computes the MB-SIM matrix: cosine over every unordered profile pair,
/// mirrored so symmetry is exact.
pub fn similarity_matrix(profiles: &[AbilityProfile]) -> Result<SimilarityMatrix> {
    if profiles.is_empty() {
        return Err(Error::Config("at least one profile required".into()));
    }
    let dim = profiles[0].vector.len();
    for p in profiles {
        if p.vector.len() != dim {
            return Err(Error::Dimension(format!(
                "model `{}` has vector length {}, expected {}",
                p.model,
                p.vector.len(),
                dim
            )));
        }
    }
    let n = profiles.len();
    let mut sim = vec![vec![0.0; n]; n];
    for (i, p) in profiles.iter().enumerate() {
        if p.vector.iter().all(|&v| v == 0.0) {
            log::warn!(
                "model `{}` has a zero ability vector; its similarities are 0",
                p.model
            );
        }
        sim[i][i] = 1.0;
        for (j, q) in profiles.iter().enumerate().take(i) {
            let s = cosine(&p.vector, &q.vector);
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    Ok(SimilarityMatrix {
        models: profiles.iter().map(|p| p.model.clone()).collect(),
        sim,
    })
}

/// Bundled profile artifact: benchmark names and tags, per-model profiles,
/// and the MB-SIM matrix. This is the `profiles.json` schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub benchmarks: Vec<String>,
    pub categories: Vec<Category>,
    pub models: Vec<AbilityProfile>,
    pub similarity: Vec<Vec<f64>>,
}

impl ProfileSet {
    pub fn from_table(table: &BenchmarkTable) -> Result<Self> {
        let models = normalize(table)?;
        let matrix = similarity_matrix(&models)?;
        Ok(ProfileSet {
            benchmarks: table.benchmarks.iter().map(|b| b.name.clone()).collect(),
            categories: table.benchmarks.iter().map(|b| b.category).collect(),
            models,
            similarity: matrix.sim,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let set: ProfileSet = serde_json::from_reader(BufReader::new(file))?;
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        if self.benchmarks.len() != self.categories.len() {
            return Err(Error::Schema(
                "benchmarks and categories lengths differ".into(),
            ));
        }
        let n = self.models.len();
        if self.similarity.len() != n || self.similarity.iter().any(|row| row.len() != n) {
            return Err(Error::Schema(
                "similarity matrix shape does not match model count".into(),
            ));
        }
        Ok(())
    }

    pub fn benchmark_tags(&self) -> Vec<Benchmark> {
        self.benchmarks
            .iter()
            .zip(&self.categories)
            .map(|(name, &category)| Benchmark {
                name: name.clone(),
                category,
            })
            .collect()
    }

    pub fn similarity_matrix(&self) -> SimilarityMatrix {
        SimilarityMatrix {
            models: self.models.iter().map(|p| p.model.clone()).collect(),
            sim: self.similarity.clone(),
        }
    }
}
