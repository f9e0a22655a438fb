//! Dataset representation, seeded splitting, and the stratified bootstrap
//! sampler that feeds ensemble training.
//!
//! A [`Dataset`] couples a feature matrix (dense or sparse row-major) with
//! integer class labels. Datasets are immutable once built and cheap to share
//! across threads; every randomized operation takes an explicit seed and is
//! bit-reproducible regardless of scheduling.

mod io;

pub use io::{load_csv, load_libsvm, DENSE_LIMIT};

use crate::error::{Error, Result};
use crate::seeding;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Borrowed view of a single feature row.
///
/// Sparse rows carry parallel `indices`/`values` slices sorted by column.
#[derive(Clone, Copy, Debug)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse {
        dim: usize,
        indices: &'a [usize],
        values: &'a [f64],
    },
}

impl<'a> Row<'a> {
    pub fn dim(&self) -> usize {
        match self {
            Row::Dense(v) => v.len(),
            Row::Sparse { dim, .. } => *dim,
        }
    }

    /// Value at column `j` (zero for absent sparse entries).
    pub fn get(&self, j: usize) -> f64 {
        match self {
            Row::Dense(v) => v[j],
            Row::Sparse {
                indices, values, ..
            } => match indices.binary_search(&j) {
                Ok(pos) => values[pos],
                Err(_) => 0.0,
            },
        }
    }

    /// Iterate stored entries as `(column, value)`. Dense rows yield every
    /// column; sparse rows yield only stored entries.
    pub fn entries(&self) -> RowEntries<'a> {
        match *self {
            Row::Dense(v) => RowEntries::Dense(v.iter().enumerate()),
            Row::Sparse {
                indices, values, ..
            } => RowEntries::Sparse(indices.iter().zip(values.iter())),
        }
    }

    /// Densify into `buf`, which must have length `dim()`.
    pub fn copy_into(&self, buf: &mut [f64]) {
        assert_eq!(buf.len(), self.dim(), "buffer length must equal row dim");
        match self {
            Row::Dense(v) => buf.copy_from_slice(v),
            Row::Sparse {
                indices, values, ..
            } => {
                buf.fill(0.0);
                for (&j, &v) in indices.iter().zip(values.iter()) {
                    buf[j] = v;
                }
            }
        }
    }

    pub fn sq_norm(&self) -> f64 {
        match self {
            Row::Dense(v) => v.iter().map(|x| x * x).sum(),
            Row::Sparse { values, .. } => values.iter().map(|x| x * x).sum(),
        }
    }

    /// Inner product with another row of the same dimensionality.
    pub fn dot(&self, other: &Row<'_>) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        match (self, other) {
            (Row::Dense(a), Row::Dense(b)) => a.iter().zip(b.iter()).map(|(x, y)| x * y).sum(),
            (Row::Dense(d), Row::Sparse { indices, values, .. })
            | (Row::Sparse { indices, values, .. }, Row::Dense(d)) => indices
                .iter()
                .zip(values.iter())
                .map(|(&j, &v)| d[j] * v)
                .sum(),
            (
                Row::Sparse {
                    indices: ia,
                    values: va,
                    ..
                },
                Row::Sparse {
                    indices: ib,
                    values: vb,
                    ..
                },
            ) => {
                // Merge walk over two column-sorted entry lists.
                let (mut p, mut q, mut acc) = (0, 0, 0.0);
                while p < ia.len() && q < ib.len() {
                    match ia[p].cmp(&ib[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            acc += va[p] * vb[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                acc
            }
        }
    }
}

/// Iterator over the stored `(column, value)` entries of a [`Row`].
pub enum RowEntries<'a> {
    Dense(std::iter::Enumerate<std::slice::Iter<'a, f64>>),
    Sparse(std::iter::Zip<std::slice::Iter<'a, usize>, std::slice::Iter<'a, f64>>),
}

impl<'a> Iterator for RowEntries<'a> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowEntries::Dense(it) => it.next().map(|(j, &v)| (j, v)),
            RowEntries::Sparse(it) => it.next().map(|(&j, &v)| (j, v)),
        }
    }
}

/// Cosine similarity between two rows; defined as 0 when either has zero norm.
pub fn cosine_similarity(a: &Row<'_>, b: &Row<'_>) -> f64 {
    let na = a.sq_norm().sqrt();
    let nb = b.sq_norm().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dot(b) / (na * nb)
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row entry lists; each list must be sorted by column
    /// with strictly increasing indices below `ncols`.
    pub fn from_rows(rows: &[Vec<(usize, f64)>], ncols: usize) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            let mut last: Option<usize> = None;
            for &(j, v) in row {
                if j >= ncols {
                    return Err(Error::InvalidData(format!(
                        "sparse column index {j} out of range for dim {ncols}"
                    )));
                }
                if last.is_some_and(|p| p >= j) {
                    return Err(Error::InvalidData(
                        "sparse row indices must be strictly increasing".into(),
                    ));
                }
                last = Some(j);
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        Row::Sparse {
            dim: self.ncols,
            indices: &self.indices[lo..hi],
            values: &self.values[lo..hi],
        }
    }

    /// Gather the given rows (duplicates allowed) into a new matrix.
    pub fn select(&self, rows: &[usize]) -> CsrMatrix {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for &i in rows {
            let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
            indices.extend_from_slice(&self.indices[lo..hi]);
            values.extend_from_slice(&self.values[lo..hi]);
            indptr.push(indices.len());
        }
        CsrMatrix {
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.nrows(), self.ncols));
        for i in 0..self.nrows() {
            let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
            for (&j, &v) in self.indices[lo..hi].iter().zip(&self.values[lo..hi]) {
                out[(i, j)] = v;
            }
        }
        out
    }
}

/// Feature storage: dense `N × D` matrix or sparse row-major equivalent.
#[derive(Clone, Debug)]
pub enum FeatureMatrix {
    Dense(Array2<f64>),
    Sparse(CsrMatrix),
}

impl FeatureMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            FeatureMatrix::Dense(a) => a.nrows(),
            FeatureMatrix::Sparse(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            FeatureMatrix::Dense(a) => a.ncols(),
            FeatureMatrix::Sparse(m) => m.ncols(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, FeatureMatrix::Dense(_))
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        match self {
            FeatureMatrix::Dense(a) => Row::Dense(
                a.row(i)
                    .to_slice()
                    .expect("dense feature matrices are stored row-major"),
            ),
            FeatureMatrix::Sparse(m) => m.row(i),
        }
    }

    pub fn select(&self, rows: &[usize]) -> FeatureMatrix {
        match self {
            FeatureMatrix::Dense(a) => {
                let mut out = Array2::zeros((rows.len(), a.ncols()));
                for (dst, &src) in rows.iter().enumerate() {
                    out.row_mut(dst).assign(&a.row(src));
                }
                FeatureMatrix::Dense(out)
            }
            FeatureMatrix::Sparse(m) => FeatureMatrix::Sparse(m.select(rows)),
        }
    }

    /// Stack two matrices of identical storage kind and width.
    pub fn vstack(&self, other: &FeatureMatrix) -> Result<FeatureMatrix> {
        if self.ncols() != other.ncols() {
            return Err(Error::InvalidData(format!(
                "cannot stack feature matrices of widths {} and {}",
                self.ncols(),
                other.ncols()
            )));
        }
        match (self, other) {
            (FeatureMatrix::Dense(a), FeatureMatrix::Dense(b)) => {
                let mut out = Array2::zeros((a.nrows() + b.nrows(), a.ncols()));
                out.slice_mut(ndarray::s![..a.nrows(), ..]).assign(a);
                out.slice_mut(ndarray::s![a.nrows().., ..]).assign(b);
                Ok(FeatureMatrix::Dense(out))
            }
            (FeatureMatrix::Sparse(a), FeatureMatrix::Sparse(b)) => {
                let mut indptr = a.indptr.clone();
                let base = a.indices.len();
                indptr.extend(b.indptr[1..].iter().map(|p| p + base));
                let mut indices = a.indices.clone();
                indices.extend_from_slice(&b.indices);
                let mut values = a.values.clone();
                values.extend_from_slice(&b.values);
                Ok(FeatureMatrix::Sparse(CsrMatrix {
                    ncols: a.ncols,
                    indptr,
                    indices,
                    values,
                }))
            }
            _ => Err(Error::InvalidData(
                "cannot stack dense and sparse feature matrices".into(),
            )),
        }
    }
}

/// Labeled pool: `N × D` features plus class ids in `{0..C−1}`.
///
/// `class_counts` has length `C`; a zero count means the class id is declared
/// (e.g. inherited from a parent dataset) but absent from this subset.
#[derive(Clone, Debug)]
pub struct Dataset {
    features: FeatureMatrix,
    labels: Vec<usize>,
    class_counts: Vec<usize>,
}

impl Dataset {
    /// Build a dataset, inferring the class count as `max(label) + 1`.
    pub fn new(features: FeatureMatrix, labels: Vec<usize>) -> Result<Dataset> {
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        Dataset::with_classes(features, labels, num_classes)
    }

    /// Build a dataset with an explicit class-id space `{0..num_classes−1}`.
    pub fn with_classes(
        features: FeatureMatrix,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Dataset> {
        if features.nrows() != labels.len() {
            return Err(Error::InvalidData(format!(
                "feature rows ({}) and labels ({}) disagree",
                features.nrows(),
                labels.len()
            )));
        }
        let mut class_counts = vec![0usize; num_classes];
        for &y in &labels {
            if y >= num_classes {
                return Err(Error::InvalidData(format!(
                    "label {y} out of range for {num_classes} classes"
                )));
            }
            class_counts[y] += 1;
        }
        Ok(Dataset {
            features,
            labels,
            class_counts,
        })
    }

    pub fn from_dense(features: Array2<f64>, labels: Vec<usize>) -> Result<Dataset> {
        Dataset::new(FeatureMatrix::Dense(features), labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimensionality D.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Size of the declared class-id space C.
    pub fn num_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        self.features.row(i)
    }

    /// Per-class example counts N_g, length `num_classes()`.
    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Number of classes with at least one example present.
    pub fn present_classes(&self) -> usize {
        self.class_counts.iter().filter(|&&c| c > 0).count()
    }

    /// Gather rows by index (duplicates allowed); the declared class space is
    /// inherited so models trained on subsets stay size-compatible.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let features = self.features.select(rows);
        let labels: Vec<usize> = rows.iter().map(|&i| self.labels[i]).collect();
        Dataset::with_classes(features, labels, self.num_classes())
            .expect("subset of a valid dataset is valid")
    }

    /// Concatenate two datasets over the same feature space.
    pub fn vstack(&self, other: &Dataset) -> Result<Dataset> {
        let features = self.features.vstack(&other.features)?;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let num_classes = self.num_classes().max(other.num_classes());
        Dataset::with_classes(features, labels, num_classes)
    }
}

/// How to carve one dataset into initial / candidate / test partitions.
#[derive(Clone, Copy, Debug)]
pub struct SplitSpec {
    pub seed: u64,
    pub initial_size: usize,
    /// Fraction of the post-initial remainder assigned to candidates, in (0, 1].
    pub candidate_fraction: f64,
    /// Guarantee every present class appears in the initial set (requires
    /// `initial_size ≥` number of classes).
    pub stratify_initial: bool,
}

/// Index partition produced by [`split_indices`].
#[derive(Clone, Debug)]
pub struct SplitIndices {
    pub initial: Vec<usize>,
    pub candidates: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partition `0..labels.len()` into initial/candidate/test index sets.
///
/// All N indices are shuffled once with the seeded generator. The initial set
/// takes the first `initial_size` entries — under stratification, the first
/// ⌈initial_size·N_g/N⌉ entries of each class, trimmed back to exactly
/// `initial_size` (trimming never empties a class). The remainder is split by
/// `candidate_fraction` in shuffle order.
pub fn split_indices(labels: &[usize], spec: &SplitSpec) -> Result<SplitIndices> {
    let n = labels.len();
    if spec.initial_size > n {
        return Err(Error::InvalidData(format!(
            "initial_size {} exceeds dataset size {n}",
            spec.initial_size
        )));
    }
    if !(spec.candidate_fraction > 0.0 && spec.candidate_fraction <= 1.0) {
        return Err(Error::InvalidData(format!(
            "candidate_fraction must be in (0, 1], got {}",
            spec.candidate_fraction
        )));
    }

    let mut rng = seeding::stream_rng(spec.seed, 0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let initial: Vec<usize> = if spec.stratify_initial {
        let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
        let mut counts = vec![0usize; num_classes];
        for &y in labels {
            counts[y] += 1;
        }
        let present = counts.iter().filter(|&&c| c > 0).count();
        if spec.initial_size < present {
            return Err(Error::InvalidData(format!(
                "stratified initial_size {} is below the number of present classes {present}",
                spec.initial_size
            )));
        }
        // Per-class quota ⌈initial_size·N_g/N⌉; quotas sum to at least
        // initial_size and overshoot by fewer than C entries.
        let quota: Vec<usize> = counts
            .iter()
            .map(|&ng| (spec.initial_size * ng).div_ceil(n))
            .collect();
        let mut taken = vec![0usize; num_classes];
        let mut picked: Vec<usize> = Vec::with_capacity(spec.initial_size + num_classes);
        for &i in &order {
            let g = labels[i];
            if taken[g] < quota[g] {
                taken[g] += 1;
                picked.push(i);
            }
        }
        // Trim uniformly at random back to initial_size, never removing the
        // last representative of a class.
        while picked.len() > spec.initial_size {
            let eligible: Vec<usize> = (0..picked.len())
                .filter(|&p| taken[labels[picked[p]]] > 1)
                .collect();
            let victim = eligible[rng.random_range(0..eligible.len())];
            taken[labels[picked[victim]]] -= 1;
            picked.remove(victim);
        }
        picked
    } else {
        order[..spec.initial_size].to_vec()
    };

    let in_initial: std::collections::HashSet<usize> = initial.iter().copied().collect();
    let remainder: Vec<usize> = order
        .iter()
        .copied()
        .filter(|i| !in_initial.contains(i))
        .collect();
    let n_cand = (spec.candidate_fraction * remainder.len() as f64).floor() as usize;
    let candidates = remainder[..n_cand].to_vec();
    let test = remainder[n_cand..].to_vec();

    Ok(SplitIndices {
        initial,
        candidates,
        test,
    })
}

/// Split a dataset into materialized (initial, candidates, test) parts,
/// with rows assigned by [`split_indices`].
pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let idx = split_indices(data.labels(), spec)?;
    Ok((
        data.subset(&idx.initial),
        data.subset(&idx.candidates),
        data.subset(&idx.test),
    ))
}

/// Ensemble resampling parameters: K bootstrap draws of per-class fraction β.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    /// Number of bootstrap models K ≥ 1.
    pub num_models: usize,
    /// Per-class sample-size fraction β > 0; each draw takes ⌊β·N_g⌋
    /// examples of class g with replacement.
    pub sample_fraction: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            num_models: 25,
            sample_fraction: 1.0,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.num_models < 1 {
            problems.push("ensemble size K must be at least 1".to_string());
        }
        if self.sample_fraction.is_nan() || self.sample_fraction <= 0.0 {
            problems.push(format!(
                "bootstrap fraction beta must be positive, got {}",
                self.sample_fraction
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

/// Draw K stratified bootstrap samples from `initial`.
///
/// Each sample contains exactly ⌊β·N_g⌋ examples of every present class g,
/// drawn with replacement from that class. Draw k uses the generator derived
/// from `(seed, k)`, so samples are independent and the call is deterministic
/// under any parallel schedule.
pub fn stratified_bootstrap(
    initial: &Dataset,
    cfg: &BootstrapConfig,
    seed: u64,
) -> Result<Vec<Dataset>> {
    cfg.validate()?;
    let mut class_rows: Vec<Vec<usize>> = vec![Vec::new(); initial.num_classes()];
    for (i, &y) in initial.labels().iter().enumerate() {
        class_rows[y].push(i);
    }
    let mut draw_sizes = vec![0usize; initial.num_classes()];
    for (g, rows) in class_rows.iter().enumerate() {
        if rows.is_empty() {
            continue; // declared but absent class contributes nothing
        }
        let take = (cfg.sample_fraction * rows.len() as f64).floor() as usize;
        if take == 0 {
            return Err(Error::InvalidData(format!(
                "bootstrap fraction {} yields zero samples for class {g} (N_{g} = {})",
                cfg.sample_fraction,
                rows.len()
            )));
        }
        draw_sizes[g] = take;
    }

    let samples: Vec<Dataset> = (0..cfg.num_models)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeding::stream_rng(seed, k as u64);
            let mut picked = Vec::with_capacity(draw_sizes.iter().sum());
            for (rows, &take) in class_rows.iter().zip(&draw_sizes) {
                for _ in 0..take {
                    picked.push(rows[rng.random_range(0..rows.len())]);
                }
            }
            initial.subset(&picked)
        })
        .collect();
    Ok(samples)
}
