//! Mini-batch K-means over velocity-field rows.
//!
//! Fitting is deterministic for a fixed seed, batch size, and input order:
//! batches are drawn from a seeded ChaCha stream, distance scans may run in
//! parallel but are reduced in point order, and every tie breaks toward the
//! lowest index. When `batch_size` covers the whole sample the update is the
//! exact batch mean, so each iteration is a plain Lloyd step; with smaller
//! batches the standard per-point incremental-mean update applies.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::sq_dist;
use crate::motion::VelocityField;
use crate::parallel;

/// Fitted centroid set plus the metadata needed to reproduce the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    centroids: Vec<f64>,
    k: usize,
    feature_dim: usize,
    seed: u64,
    inertia: f64,
    iterations_run: u32,
}

impl ClusterModel {
    pub fn from_raw(
        centroids: Vec<f64>,
        k: usize,
        feature_dim: usize,
        seed: u64,
        inertia: f64,
        iterations_run: u32,
    ) -> Result<Self> {
        if centroids.len() != k * feature_dim || k == 0 {
            return Err(Error::DimensionMismatch {
                context: "cluster centroids",
                expected: k * feature_dim,
                actual: centroids.len(),
            });
        }
        if !centroids.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("cluster centroids"));
        }
        Ok(ClusterModel {
            centroids,
            k,
            feature_dim,
            seed,
            inertia,
            iterations_run,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Final sum of squared distances over the training rows.
    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    pub fn iterations_run(&self) -> u32 {
        self.iterations_run
    }

    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.feature_dim..(c + 1) * self.feature_dim]
    }

    pub fn centroids(&self) -> &[f64] {
        &self.centroids
    }

    /// Nearest centroid index and its squared distance; ties break low.
    pub fn assign(&self, point: &[f64]) -> (u32, f64) {
        nearest_centroid(&self.centroids, self.feature_dim, point)
    }
}

fn nearest_centroid(centroids: &[f64], dim: usize, point: &[f64]) -> (u32, f64) {
    let mut best = 0u32;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
        let d = sq_dist(point, centroid);
        if d < best_d {
            best_d = d;
            best = c as u32;
        }
    }
    (best, best_d)
}

/// Fit configuration; defaults follow common mini-batch practice.
#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub seed: u64,
    pub batch_size: usize,
    pub max_iters: usize,
    /// Stop once no centroid moves farther than this between iterations.
    pub tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            seed: 0,
            batch_size: 1024,
            max_iters: 100,
            tol: 1e-6,
        }
    }
}

/// Flattened view over the rows of several velocity fields.
struct Points<'a> {
    fields: &'a [VelocityField],
    dim: usize,
    len: usize,
}

impl<'a> Points<'a> {
    fn new(fields: &'a [VelocityField]) -> Result<Self> {
        let dim = match fields.first() {
            Some(f) => f.feature_dim(),
            None => {
                return Err(Error::TooFewSamples { samples: 0, k: 1 });
            }
        };
        for f in fields {
            if f.feature_dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "velocity field dims",
                    expected: dim,
                    actual: f.feature_dim(),
                });
            }
        }
        let len = fields.iter().map(|f| f.num_frames()).sum();
        Ok(Points { fields, dim, len })
    }

    fn row(&self, mut i: usize) -> &[f64] {
        for f in self.fields {
            if i < f.num_frames() {
                return f.row(i);
            }
            i -= f.num_frames();
        }
        unreachable!("point index out of range")
    }
}

/// K-means++ seeding: one uniform pick, then distance-weighted picks.
///
/// Points already coinciding with a chosen centroid carry zero weight, so
/// clean data with at least `k` distinct rows gets `k` distinct seeds. When
/// the total weight degenerates to zero a uniform pick is used instead.
fn kmeanspp_init(points: &Points, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dim = points.dim;
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..points.len);
    centroids.extend_from_slice(points.row(first));

    let mut dist2: Vec<f64> = parallel::map_indexed(points.len, |i| {
        sq_dist(points.row(i), &centroids[0..dim])
    });

    for c in 1..k {
        let total: f64 = dist2.iter().sum();
        let idx = if total > 0.0 && total.is_finite() {
            let r = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = points.len - 1;
            for (i, &d) in dist2.iter().enumerate() {
                acc += d;
                if acc > r {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..points.len)
        };
        let start = c * dim;
        centroids.extend_from_slice(points.row(idx));
        let new = centroids[start..start + dim].to_vec();
        for (i, d) in dist2.iter_mut().enumerate() {
            let nd = sq_dist(points.row(i), &new);
            if nd < *d {
                *d = nd;
            }
        }
    }
    centroids
}

/// Reseed centroids that own no points from the farthest member of the
/// largest cluster. Ties break toward lower indices; each donor point is
/// used at most once per pass.
fn reseed_empty(
    centroids: &mut [f64],
    dim: usize,
    empty: &[usize],
    members: impl Fn(usize) -> Vec<usize>,
    counts: &[usize],
    point: impl Fn(usize) -> Vec<f64>,
) {
    let mut used: Vec<usize> = Vec::new();
    for &c in empty {
        let mut largest = 0;
        for (i, &count) in counts.iter().enumerate() {
            if count > counts[largest] {
                largest = i;
            }
        }
        let centroid = centroids[largest * dim..(largest + 1) * dim].to_vec();
        let mut far_idx = None;
        let mut far_d = -1.0;
        for i in members(largest) {
            if used.contains(&i) {
                continue;
            }
            let d = sq_dist(&point(i), &centroid);
            if d > far_d {
                far_d = d;
                far_idx = Some(i);
            }
        }
        if let Some(i) = far_idx {
            used.push(i);
            centroids[c * dim..(c + 1) * dim].copy_from_slice(&point(i));
        }
    }
}

/// Fit `k` centroids to the rows of `fields` by mini-batch K-means with
/// K-means++ initialization.
pub fn fit_clusters(fields: &[VelocityField], k: usize, config: &FitConfig) -> Result<ClusterModel> {
    if k == 0 {
        return Err(Error::TooFewSamples { samples: 0, k: 0 });
    }
    let points = Points::new(fields)?;
    let n = points.len;
    if n < k {
        return Err(Error::TooFewSamples { samples: n, k });
    }
    let dim = points.dim;
    let batch_size = config.batch_size.max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids = kmeanspp_init(&points, k, &mut rng);
    let mut counts = vec![0usize; k];
    let mut iterations_run = 0u32;

    for _ in 0..config.max_iters {
        iterations_run += 1;
        let prev = centroids.clone();

        if batch_size >= n {
            // Full coverage: exact Lloyd step.
            let assign: Vec<u32> = {
                let c = &centroids;
                parallel::map_indexed(n, |i| nearest_centroid(c, dim, points.row(i)).0)
            };
            let mut sums = vec![0.0; k * dim];
            let mut batch_counts = vec![0usize; k];
            for (i, &a) in assign.iter().enumerate() {
                let c = a as usize;
                batch_counts[c] += 1;
                for (s, v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(points.row(i)) {
                    *s += v;
                }
            }
            for c in 0..k {
                if batch_counts[c] > 0 {
                    let count = batch_counts[c] as f64;
                    for (dst, s) in centroids[c * dim..(c + 1) * dim]
                        .iter_mut()
                        .zip(&sums[c * dim..(c + 1) * dim])
                    {
                        *dst = s / count;
                    }
                }
            }
            let empty: Vec<usize> = (0..k).filter(|&c| batch_counts[c] == 0).collect();
            if !empty.is_empty() {
                reseed_empty(
                    &mut centroids,
                    dim,
                    &empty,
                    |cluster| {
                        assign
                            .iter()
                            .enumerate()
                            .filter(|(_, &a)| a as usize == cluster)
                            .map(|(i, _)| i)
                            .collect()
                    },
                    &batch_counts,
                    |i| points.row(i).to_vec(),
                );
            }
            counts = batch_counts;
        } else {
            let batch = rand::seq::index::sample(&mut rng, n, batch_size).into_vec();
            let assign: Vec<u32> = {
                let c = &centroids;
                let b = &batch;
                parallel::map_indexed(batch.len(), |i| {
                    nearest_centroid(c, dim, points.row(b[i])).0
                })
            };
            let mut batch_counts = vec![0usize; k];
            for (&i, &a) in batch.iter().zip(&assign) {
                let c = a as usize;
                counts[c] += 1;
                batch_counts[c] += 1;
                let eta = 1.0 / counts[c] as f64;
                for (dst, v) in centroids[c * dim..(c + 1) * dim]
                    .iter_mut()
                    .zip(points.row(i))
                {
                    *dst += eta * (v - *dst);
                }
            }
            let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
            if !empty.is_empty() {
                reseed_empty(
                    &mut centroids,
                    dim,
                    &empty,
                    |cluster| {
                        batch
                            .iter()
                            .zip(&assign)
                            .filter(|(_, &a)| a as usize == cluster)
                            .map(|(&i, _)| i)
                            .collect()
                    },
                    &batch_counts,
                    |i| points.row(i).to_vec(),
                );
            }
        }

        let movement = (0..k)
            .map(|c| sq_dist(&prev[c * dim..(c + 1) * dim], &centroids[c * dim..(c + 1) * dim]))
            .fold(0.0f64, f64::max)
            .sqrt();
        if movement <= config.tol {
            break;
        }
    }

    let sq_dists: Vec<f64> = {
        let c = &centroids;
        parallel::map_indexed(n, |i| nearest_centroid(c, dim, points.row(i)).1)
    };
    let inertia: f64 = sq_dists.iter().sum();

    ClusterModel::from_raw(centroids, k, dim, config.seed, inertia, iterations_run)
}

/// Nearest-centroid label per field row; ties break toward the lowest index.
pub fn assign_labels(field: &VelocityField, model: &ClusterModel) -> Result<Vec<u32>> {
    if field.feature_dim() != model.feature_dim() {
        return Err(Error::DimensionMismatch {
            context: "assign_labels",
            expected: model.feature_dim(),
            actual: field.feature_dim(),
        });
    }
    Ok(parallel::map_indexed(field.num_frames(), |t| {
        model.assign(field.row(t)).0
    }))
}
