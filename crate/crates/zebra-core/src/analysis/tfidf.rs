//! TF-IDF audit of response similarity for a model pair.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::dataset::InstructionRecord;
use crate::error::{Error, Result};

/// Mean per-instruction TF-IDF cosine between two models' responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfAuditResult {
    pub model_a: String,
    pub model_b: String,
    pub mean_pair_similarity: f64,
    /// Instructions answered by both models.
    pub n_instructions: usize,
}

/// Lowercased alphanumeric runs.
fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

// Sorted maps so every accumulation below runs in a fixed term order and the
// result is bit-reproducible.
fn term_counts(text: &str) -> BTreeMap<String, f64> {
    let mut counts = BTreeMap::new();
    for token in tokenize(text) {
        *counts.entry(token).or_insert(0.0) += 1.0;
    }
    counts
}

fn weighted_cosine(
    a: &BTreeMap<String, f64>,
    b: &BTreeMap<String, f64>,
    idf: &HashMap<String, f64>,
) -> f64 {
    fn weight<'t>(
        terms: &'t BTreeMap<String, f64>,
        idf: &HashMap<String, f64>,
    ) -> BTreeMap<&'t str, f64> {
        terms
            .iter()
            .map(|(t, tf)| (t.as_str(), tf * idf.get(t).copied().unwrap_or(1.0)))
            .collect()
    }
    let wa = weight(a, idf);
    let wb = weight(b, idf);
    let na: f64 = wa.values().map(|w| w * w).sum::<f64>().sqrt();
    let nb: f64 = wb.values().map(|w| w * w).sum::<f64>().sqrt();
    if na == 0.0 && nb == 0.0 {
        return 1.0; // both responses empty of tokens: identical behavior
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = wa
        .iter()
        .filter_map(|(t, w)| wb.get(t).map(|v| w * v))
        .sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Audits how similar two models' response texts are across the pool.
///
/// Document frequencies come from every response in the pool (the corpus);
/// term frequency is the raw in-document count and
/// `idf = ln((1 + N) / (1 + df)) + 1`. The result averages the per-instruction
/// cosine between the two models' TF-IDF vectors over instructions both
/// answered.
pub fn tfidf_audit<I>(pool: I, model_a: &str, model_b: &str) -> Result<TfidfAuditResult>
where
    I: IntoIterator<Item = Result<InstructionRecord>>,
{
    let mut n_docs: u64 = 0;
    let mut df: HashMap<String, u64> = HashMap::new();
    let mut pairs: Vec<(BTreeMap<String, f64>, BTreeMap<String, f64>)> = Vec::new();

    for record in pool {
        let record = record?;
        let mut a_counts = None;
        let mut b_counts = None;
        for response in &record.responses {
            let counts = term_counts(&response.text);
            n_docs += 1;
            for term in counts.keys() {
                *df.entry(term.clone()).or_insert(0) += 1;
            }
            if response.model == model_a {
                a_counts = Some(counts);
            } else if response.model == model_b {
                b_counts = Some(counts);
            }
        }
        if let (Some(a), Some(b)) = (a_counts, b_counts) {
            pairs.push((a, b));
        }
    }

    if pairs.is_empty() {
        return Err(Error::Audit(format!(
            "models `{model_a}` and `{model_b}` share no instruction"
        )));
    }

    let idf: HashMap<String, f64> = df
        .into_iter()
        .map(|(term, count)| {
            let value = ((1.0 + n_docs as f64) / (1.0 + count as f64)).ln() + 1.0;
            (term, value)
        })
        .collect();

    let total: f64 = pairs
        .iter()
        .map(|(a, b)| weighted_cosine(a, b, &idf))
        .sum();
    Ok(TfidfAuditResult {
        model_a: model_a.to_string(),
        model_b: model_b.to_string(),
        mean_pair_similarity: total / pairs.len() as f64,
        n_instructions: pairs.len(),
    })
}
