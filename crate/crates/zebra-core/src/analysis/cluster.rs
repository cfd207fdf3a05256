//! Agglomerative clustering of ability vectors with a flat cut.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{cosine, AbilityProfile, Benchmark, Category};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    Average,
    Single,
    Complete,
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            other => Err(Error::Config(format!("unknown linkage `{other}`"))),
        }
    }
}

/// One merge: clusters `a` and `b` (leaves are 0..n-1, merged clusters get
/// ids n, n+1, ... in merge order) joined at `distance` into a cluster of
/// `size` leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
}

/// Stepwise dendrogram plus the flat clusters at `cut`; the
/// `dendrogram.json` schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub models: Vec<String>,
    pub merges: Vec<MergeStep>,
    pub cut: f64,
    /// Model name -> flat cluster id after applying merges with
    /// distance <= cut. Ids are numbered by first leaf appearance.
    pub clusters: BTreeMap<String, usize>,
}

/// Pairwise behavior distance over the filtered benchmark columns: cosine
/// distance (1 - cosine) in general, absolute difference when the filter
/// leaves a single column (cosine collapses to 0 on 1-D nonnegative data).
fn distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        (a[0] - b[0]).abs()
    } else {
        (1.0 - cosine(a, b)).max(0.0)
    }
}

/// Agglomerative clustering with the configured linkage over cosine
/// distances, cut into flat clusters at `cut`.
///
/// `filter` restricts the distance computation to benchmarks of one
/// category; `None` uses every column.
pub fn cluster(
    profiles: &[AbilityProfile],
    benchmarks: &[Benchmark],
    filter: Option<Category>,
    cut: f64,
    linkage: Linkage,
) -> Result<Dendrogram> {
    if profiles.len() < 2 {
        return Err(Error::Config(format!(
            "clustering requires at least 2 profiles, got {}",
            profiles.len()
        )));
    }
    let columns: Vec<usize> = benchmarks
        .iter()
        .enumerate()
        .filter(|(_, b)| filter.is_none_or(|c| b.category == c))
        .map(|(i, _)| i)
        .collect();
    if columns.is_empty() {
        return Err(Error::Config(format!(
            "category filter `{}` selects no benchmark column",
            filter.map(|c| c.to_string()).unwrap_or_default()
        )));
    }
    for p in profiles {
        if p.vector.len() != benchmarks.len() {
            return Err(Error::Dimension(format!(
                "model `{}` has vector length {}, expected {}",
                p.model,
                p.vector.len(),
                benchmarks.len()
            )));
        }
    }

    let points: Vec<Vec<f64>> = profiles
        .iter()
        .map(|p| columns.iter().map(|&c| p.vector[c]).collect())
        .collect();
    let n = points.len();

    // Active cluster state: stable id, leaf count, and mutual distances,
    // maintained with Lance-Williams updates.
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes: Vec<usize> = vec![1; n];
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| distance(&points[i], &points[j])).collect())
        .collect();
    let mut active: Vec<usize> = (0..n).collect(); // slots into ids/sizes/dist
    let mut merges = Vec::with_capacity(n - 1);
    let mut cut_sets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    for step in 0..(n - 1) {
        // Closest active pair; ties go to the smallest sorted id pair.
        let mut best: Option<(f64, (usize, usize), (usize, usize))> = None;
        for (ai, &sa) in active.iter().enumerate() {
            for &sb in active.iter().skip(ai + 1) {
                let d = dist[sa][sb];
                let key = if ids[sa] < ids[sb] {
                    (ids[sa], ids[sb])
                } else {
                    (ids[sb], ids[sa])
                };
                let take = match &best {
                    None => true,
                    Some((bd, bkey, _)) => d < *bd || (d == *bd && key < *bkey),
                };
                if take {
                    best = Some((d, key, (sa, sb)));
                }
            }
        }
        let (d, (id_a, id_b), (sa, sb)) = best.expect("at least one active pair");
        let new_size = sizes[sa] + sizes[sb];
        merges.push(MergeStep {
            a: id_a,
            b: id_b,
            distance: d,
            size: new_size,
        });

        // Merge sb into sa's slot; sa takes the new cluster identity.
        for &sk in &active {
            if sk == sa || sk == sb {
                continue;
            }
            let updated = match linkage {
                Linkage::Average => {
                    (sizes[sa] as f64 * dist[sa][sk] + sizes[sb] as f64 * dist[sb][sk])
                        / new_size as f64
                }
                Linkage::Single => dist[sa][sk].min(dist[sb][sk]),
                Linkage::Complete => dist[sa][sk].max(dist[sb][sk]),
            };
            dist[sa][sk] = updated;
            dist[sk][sa] = updated;
        }
        ids[sa] = n + step;
        sizes[sa] = new_size;
        active.retain(|&s| s != sb);

        if d <= cut {
            let moved = std::mem::take(&mut cut_sets[sb]);
            cut_sets[sa].extend(moved);
        }
    }

    // Flat clusters: groups remaining in cut_sets, numbered by smallest leaf.
    let mut groups: Vec<Vec<usize>> = cut_sets.into_iter().filter(|g| !g.is_empty()).collect();
    for g in groups.iter_mut() {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    let mut clusters = BTreeMap::new();
    for (cluster_id, group) in groups.iter().enumerate() {
        for &leaf in group {
            clusters.insert(profiles[leaf].model.clone(), cluster_id);
        }
    }

    Ok(Dendrogram {
        models: profiles.iter().map(|p| p.model.clone()).collect(),
        merges,
        cut,
        clusters,
    })
}
