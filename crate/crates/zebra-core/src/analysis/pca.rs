//! Two-component PCA of ability vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::profile::AbilityProfile;

/// Planar projection of the model pool; the `pca.json` schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection2D {
    pub models: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    /// Fractions of total variance carried by the two axes, non-increasing.
    pub explained_variance: [f64; 2],
    /// True when the input had no variance; all coordinates are (0, 0).
    pub degenerate: bool,
}

/// PCA internals: column means and the two principal directions, alongside
/// the projected coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaDecomposition {
    pub mean: Vec<f64>,
    pub components: [Vec<f64>; 2],
    pub coords: Vec<[f64; 2]>,
    pub explained_variance: [f64; 2],
    pub degenerate: bool,
}

/// Covariance PCA over row vectors. Data is column-mean centered; the top two
/// eigenvectors of the covariance matrix define the plane. Each component's
/// sign is normalized so its largest-magnitude loading is positive.
pub fn pca_decompose(vectors: &[Vec<f64>]) -> Result<PcaDecomposition> {
    let n = vectors.len();
    if n < 3 {
        return Err(Error::Config(format!(
            "pca requires at least 3 vectors, got {n}"
        )));
    }
    let dim = vectors[0].len();
    if dim < 2 {
        return Err(Error::Dimension(format!(
            "pca requires vectors of length >= 2, got {dim}"
        )));
    }
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::Dimension("vectors have mixed lengths".into()));
    }

    let mean: Vec<f64> = (0..dim)
        .map(|b| vectors.iter().map(|v| v[b]).sum::<f64>() / n as f64)
        .collect();
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut cov = vec![vec![0.0; dim]; dim];
    for row in &centered {
        for i in 0..dim {
            for j in i..dim {
                cov[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }

    let total: f64 = (0..dim).map(|i| cov[i][i]).sum();
    if total < 1e-12 {
        log::warn!("pca input has no variance; projection is degenerate");
        return Ok(PcaDecomposition {
            mean,
            components: [vec![0.0; dim], vec![0.0; dim]],
            coords: vec![[0.0, 0.0]; n],
            explained_variance: [0.0, 0.0],
            degenerate: true,
        });
    }

    let (values, vectors_out) = symmetric_eigen(&cov);
    let mut components: [Vec<f64>; 2] = [vectors_out[0].clone(), vectors_out[1].clone()];
    for comp in components.iter_mut() {
        let lead = comp
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if comp[lead] < 0.0 {
            for x in comp.iter_mut() {
                *x = -*x;
            }
        }
    }

    // Suppress numerically-noise eigenvalues so rank-deficient data reports
    // exact zeros.
    let lead_value = values[0].max(0.0);
    let fraction = |v: f64| {
        let v = if v < 1e-12 * lead_value.max(1e-300) { 0.0 } else { v };
        (v / total).clamp(0.0, 1.0)
    };
    let explained_variance = [fraction(values[0]), fraction(values[1])];

    let coords: Vec<[f64; 2]> = centered
        .iter()
        .map(|row| {
            [
                row.iter().zip(&components[0]).map(|(a, b)| a * b).sum(),
                row.iter().zip(&components[1]).map(|(a, b)| a * b).sum(),
            ]
        })
        .collect();

    Ok(PcaDecomposition {
        mean,
        components,
        coords,
        explained_variance,
        degenerate: false,
    })
}

/// Projects profiles to the plane spanned by their top two principal axes.
pub fn pca_project(profiles: &[AbilityProfile]) -> Result<Projection2D> {
    let vectors: Vec<Vec<f64>> = profiles.iter().map(|p| p.vector.clone()).collect();
    let d = pca_decompose(&vectors)?;
    Ok(Projection2D {
        models: profiles.iter().map(|p| p.model.clone()).collect(),
        coords: d.coords,
        explained_variance: d.explained_variance,
        degenerate: d.degenerate,
    })
}
