//! Binary defect classifiers: logistic regression (IRLS) and random forest.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("need at least 2 training rows, got {0}")]
    TooFewRows(usize),
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} rows but {1} labels")]
    LabelMismatch(usize, usize),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    LogisticRegression,
    RandomForest,
}

impl ClassifierKind {
    pub fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::LogisticRegression => "lr",
            ClassifierKind::RandomForest => "rf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub max_iterations: usize,
    /// Stop when the largest coefficient update falls below this.
    pub tolerance: f64,
    /// Added to the diagonal of the normal equations.
    pub ridge: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-6,
            ridge: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeaturesPerSplit {
    /// `max(1, ⌊√p⌋)`
    Sqrt,
    All,
    Fixed(usize),
}

impl FeaturesPerSplit {
    fn count(self, p: usize) -> usize {
        let k = match self {
            FeaturesPerSplit::Sqrt => (p as f64).sqrt().floor() as usize,
            FeaturesPerSplit::All => p,
            FeaturesPerSplit::Fixed(k) => k,
        };
        k.clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub features_per_split: FeaturesPerSplit,
    pub min_leaf_size: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            features_per_split: FeaturesPerSplit::Sqrt,
            min_leaf_size: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub lr: LogisticParams,
    pub rf: ForestParams,
}

/// Fitted logistic model on internally standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub means: Vec<f64>,
    /// Zero for constant training columns; those features are mapped to 0.
    pub scales: Vec<f64>,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LogisticModel {
    /// Intercept and slopes on the original feature scale.
    pub fn raw_coefficients(&self) -> (f64, Vec<f64>) {
        let mut b0 = self.intercept;
        let slopes = self
            .coefficients
            .iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(&b, (&mu, &sd))| {
                if sd == 0.0 {
                    0.0
                } else {
                    b0 -= b * mu / sd;
                    b / sd
                }
            })
            .collect();
        (b0, slopes)
    }

    fn linear_score(&self, row: &[f64]) -> f64 {
        self.intercept
            + row
                .iter()
                .zip(&self.coefficients)
                .zip(self.means.iter().zip(&self.scales))
                .map(|((&x, &b), (&mu, &sd))| if sd == 0.0 { 0.0 } else { b * (x - mu) / sd })
                .sum::<f64>()
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

const SCORE_CAP: f64 = 30.0;

fn log_likelihood(z: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = z * beta;
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &t)| {
            let e = e.clamp(-SCORE_CAP, SCORE_CAP);
            // log σ(e) = −log(1+e^{−e})
            t * -(-e).exp().ln_1p() + (1.0 - t) * -(e.exp().ln_1p())
        })
        .sum()
}

fn check_training(x: &Matrix, y: &[bool]) -> Result<(), ModelError> {
    if x.n_rows() != y.len() {
        return Err(ModelError::LabelMismatch(x.n_rows(), y.len()));
    }
    if y.len() < 2 {
        return Err(ModelError::TooFewRows(y.len()));
    }
    let pos = y.iter().filter(|&&b| b).count();
    if pos == 0 || pos == y.len() {
        return Err(ModelError::SingleClass);
    }
    Ok(())
}

/// Maximum-likelihood logistic regression by iteratively reweighted least squares.
///
/// Linear scores are capped at ±30 while fitting, so separable data stops with
/// `converged = false` instead of overflowing; the best iterate by
/// log-likelihood is kept.
pub fn fit_logistic(x: &Matrix, y: &[bool], params: &LogisticParams) -> Result<LogisticModel, ModelError> {
    check_training(x, y)?;
    if params.max_iterations == 0 || params.tolerance <= 0.0 || params.ridge < 0.0 {
        return Err(ModelError::InvalidHyperparameter("logistic regression"));
    }
    let (n, p) = (x.n_rows(), x.n_cols());
    let mut means = vec![0.0; p];
    let mut scales = vec![0.0; p];
    for c in 0..p {
        let col = x.column(c);
        let mu = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64;
        means[c] = mu;
        scales[c] = if var > 0.0 { var.sqrt() } else { 0.0 };
    }
    let z = DMatrix::from_fn(n, p + 1, |r, c| {
        if c == 0 {
            1.0
        } else if scales[c - 1] == 0.0 {
            0.0
        } else {
            (x.get(r, c - 1) - means[c - 1]) / scales[c - 1]
        }
    });
    let t = DVector::from_iterator(n, y.iter().map(|&b| if b { 1.0 } else { 0.0 }));

    let mut beta = DVector::zeros(p + 1);
    let mut ll = log_likelihood(&z, &t, &beta);
    let mut best = (ll, beta.clone());
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=params.max_iterations {
        iterations = it;
        let eta = &z * &beta;
        let prob: Vec<f64> = eta.iter().map(|&e| sigmoid(e.clamp(-SCORE_CAP, SCORE_CAP))).collect();
        let resid = DVector::from_iterator(n, t.iter().zip(&prob).map(|(ti, pi)| ti - pi));
        let grad = z.transpose() * resid;
        let mut weighted = z.clone();
        for (r, pi) in prob.iter().enumerate() {
            let w = (pi * (1.0 - pi)).max(1e-12);
            weighted.row_mut(r).scale_mut(w);
        }
        let mut hess = z.transpose() * weighted;
        for d in 0..=p {
            hess[(d, d)] += params.ridge.max(f64::EPSILON);
        }
        let Some(chol) = hess.cholesky() else { break };
        let step = chol.solve(&grad);

        // step halving keeps the likelihood from dropping
        let mut scale = 1.0;
        let mut candidate = &beta + &step;
        let mut cand_ll = log_likelihood(&z, &t, &candidate);
        for _ in 0..10 {
            if cand_ll >= ll - 1e-12 {
                break;
            }
            scale *= 0.5;
            candidate = &beta + &step * scale;
            cand_ll = log_likelihood(&z, &t, &candidate);
        }
        let change = (&step * scale).amax();
        beta = candidate;
        ll = cand_ll;
        if ll > best.0 {
            best = (ll, beta.clone());
        }
        if change < params.tolerance {
            converged = true;
            break;
        }
    }
    let beta = if converged { beta } else { best.1 };
    if !converged {
        log::debug!("logistic regression stopped after {iterations} iterations without converging");
    }
    Ok(LogisticModel {
        means,
        scales,
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        buggy_fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// One CART tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { buggy_fraction } => return *buggy_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Best Gini split of `samples` on one feature, or `None` if the feature is
/// constant on the node or no split respects `min_leaf`.
fn best_split_on(
    columns: &[Vec<f64>],
    y: &[bool],
    samples: &[usize],
    feature: usize,
    min_leaf: usize,
    scratch: &mut Vec<(f64, bool)>,
) -> Option<SplitCandidate> {
    let col = &columns[feature];
    scratch.clear();
    scratch.extend(samples.iter().map(|&s| (col[s], y[s])));
    scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = scratch.len();
    let total_pos = scratch.iter().filter(|v| v.1).count();
    let mut left_pos = 0;
    let mut best: Option<SplitCandidate> = None;
    for k in 1..n {
        left_pos += scratch[k - 1].1 as usize;
        if scratch[k].0 == scratch[k - 1].0 || k < min_leaf || n - k < min_leaf {
            continue;
        }
        let impurity = k as f64 * gini(left_pos, k) + (n - k) as f64 * gini(total_pos - left_pos, n - k);
        if best.as_ref().is_none_or(|b| impurity < b.impurity) {
            let lo = scratch[k - 1].0;
            let hi = scratch[k].0;
            let mut threshold = lo + (hi - lo) / 2.0;
            if threshold >= hi {
                threshold = lo;
            }
            best = Some(SplitCandidate {
                feature,
                threshold,
                impurity,
            });
        }
    }
    best
}

fn grow_tree(columns: &[Vec<f64>], y: &[bool], params: &ForestParams, seed: u64) -> Tree {
    let n = y.len();
    let p = columns.len();
    let mut rng = seed::rng(seed);
    let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mtry = params.features_per_split.count(p);
    let min_leaf = params.min_leaf_size.max(1);

    let mut nodes = vec![Node::Leaf { buggy_fraction: 0.0 }];
    let mut stack = vec![(0usize, bootstrap)];
    let mut feature_order: Vec<usize> = (0..p).collect();
    let mut scratch = Vec::new();
    while let Some((id, samples)) = stack.pop() {
        let pos = samples.iter().filter(|&&s| y[s]).count();
        let fraction = pos as f64 / samples.len() as f64;
        nodes[id] = Node::Leaf {
            buggy_fraction: fraction,
        };
        if pos == 0 || pos == samples.len() || samples.len() < 2 * min_leaf {
            continue;
        }
        feature_order.shuffle(&mut rng);
        let mut best: Option<SplitCandidate> = None;
        // the first mtry features are the candidates; further ones only if none could split
        for (tried, &f) in feature_order.iter().enumerate() {
            if tried >= mtry && best.is_some() {
                break;
            }
            if let Some(c) = best_split_on(columns, y, &samples, f, min_leaf, &mut scratch) {
                if best.as_ref().is_none_or(|b| c.impurity < b.impurity) {
                    best = Some(c);
                }
            }
        }
        let Some(split) = best else { continue };
        let col = &columns[split.feature];
        let (left, right): (Vec<usize>, Vec<usize>) = samples.into_iter().partition(|&s| col[s] <= split.threshold);
        let l = nodes.len();
        nodes.push(Node::Leaf { buggy_fraction: 0.0 });
        nodes.push(Node::Leaf { buggy_fraction: 0.0 });
        nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: l + 1,
        };
        stack.push((l + 1, right));
        stack.push((l, left));
    }
    Tree { nodes }
}

/// Bagged CART forest with Gini splits. Tree `t` draws from its own stream
/// seeded by `(seed, t)`, so the forest is identical at any thread count.
pub fn fit_random_forest(x: &Matrix, y: &[bool], params: &ForestParams, seed: u64) -> Result<ForestModel, ModelError> {
    check_training(x, y)?;
    if params.n_trees == 0 {
        return Err(ModelError::InvalidHyperparameter("n_trees must be positive"));
    }
    if x.n_cols() == 0 {
        return Err(ModelError::InvalidHyperparameter(
            "random forest needs at least one feature",
        ));
    }
    let columns: Vec<Vec<f64>> = (0..x.n_cols()).map(|c| x.column(c)).collect();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(&columns, y, params, seed::derive(seed, &[seed::tag::TREE, t as u64])))
        .collect();
    Ok(ForestModel { trees })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelState {
    Logistic(LogisticModel),
    Forest(ForestModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub hyperparameters: Hyperparameters,
}

/// A fitted classifier producing defect probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub feature_count: usize,
    pub state: ModelState,
    pub meta: TrainingMeta,
}

impl TrainedModel {
    /// `false` only for a logistic fit that hit the iteration limit.
    pub fn converged(&self) -> bool {
        match &self.state {
            ModelState::Logistic(m) => m.converged,
            ModelState::Forest(_) => true,
        }
    }

    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<f64>, ModelError> {
        if x.n_cols() != self.feature_count {
            return Err(ModelError::DimensionMismatch {
                expected: self.feature_count,
                got: x.n_cols(),
            });
        }
        Ok(match &self.state {
            ModelState::Logistic(m) => x.rows_iter().map(|r| sigmoid(m.linear_score(r))).collect(),
            ModelState::Forest(f) => {
                let k = f.trees.len() as f64;
                x.rows_iter()
                    .map(|r| f.trees.iter().map(|t| t.predict_row(r)).sum::<f64>() / k)
                    .collect()
            }
        })
    }
}

pub fn fit(
    kind: ClassifierKind,
    x: &Matrix,
    y: &[bool],
    hp: &Hyperparameters,
    seed: u64,
) -> Result<TrainedModel, ModelError> {
    let state = match kind {
        ClassifierKind::LogisticRegression => ModelState::Logistic(fit_logistic(x, y, &hp.lr)?),
        ClassifierKind::RandomForest => ModelState::Forest(fit_random_forest(x, y, &hp.rf, seed)?),
    };
    Ok(TrainedModel {
        kind,
        feature_count: x.n_cols(),
        state,
        meta: TrainingMeta {
            seed,
            hyperparameters: *hp,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::auc_roc;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn lr(x: &Matrix, y: &[bool]) -> TrainedModel {
        fit(ClassifierKind::LogisticRegression, x, y, &Hyperparameters::default(), 0).unwrap()
    }

    #[test]
    fn separated_one_dimensional() {
        let x = Matrix::from_rows(&(0..10).map(|i| vec![i as f64]).collect::<Vec<_>>());
        let y: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        let m = lr(&x, &y);
        assert!(!m.converged());
        let p = m.predict_proba(&x).unwrap();
        assert_eq!(auc_roc(&p, &y).unwrap(), 1.0);
        assert!(p.windows(2).all(|w| w[0] <= w[1]));
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn intercept_only_gives_base_rate() {
        let x = Matrix::from_rows(&vec![vec![3.0, -1.0]; 8]);
        let y = [true, false, false, true, false, false, false, false];
        let m = lr(&x, &y);
        assert!(m.converged());
        for p in m.predict_proba(&x).unwrap() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-9);
        }
    }

    #[test]
    fn zero_coefficients_give_half() {
        let m = TrainedModel {
            kind: ClassifierKind::LogisticRegression,
            feature_count: 2,
            state: ModelState::Logistic(LogisticModel {
                means: vec![0.0; 2],
                scales: vec![1.0; 2],
                intercept: 0.0,
                coefficients: vec![0.0; 2],
                iterations: 0,
                converged: true,
            }),
            meta: TrainingMeta {
                seed: 0,
                hyperparameters: Hyperparameters::default(),
            },
        };
        let x = Matrix::from_rows(&[vec![5.0, -2.0], vec![1e6, 3.0]]);
        assert_eq!(m.predict_proba(&x).unwrap(), vec![0.5, 0.5]);
        assert_eq!(
            m.predict_proba(&Matrix::zeros(1, 3)),
            Err(ModelError::DimensionMismatch { expected: 2, got: 3 })
        );
    }

    fn noisy_problem(seed: u64, n: usize, p: usize) -> (Matrix, Vec<bool>) {
        let mut r = seed::rng(seed);
        let beta: Vec<f64> = (0..p).map(|_| r.random_range(-1.5..1.5)).collect();
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let row: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut r)).collect();
            let eta: f64 = 0.3 + row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
            y.push(r.random::<f64>() < sigmoid(eta));
            rows.push(row);
        }
        (Matrix::from_rows(&rows), y)
    }

    /// Oracle: plain gradient ascent on the raw-feature log-likelihood.
    fn gradient_oracle(x: &Matrix, y: &[bool]) -> Vec<f64> {
        let p = x.n_cols();
        let n = x.n_rows() as f64;
        let mut w = vec![0.0; p + 1];
        for _ in 0..200_000 {
            let mut g = vec![0.0; p + 1];
            for (row, &t) in x.rows_iter().zip(y) {
                let eta = w[0] + row.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>();
                let e = (t as u8 as f64) - sigmoid(eta);
                g[0] += e;
                for j in 0..p {
                    g[j + 1] += e * row[j];
                }
            }
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt() / n;
            for j in 0..=p {
                w[j] += 0.5 * g[j] / n;
            }
            if norm < 1e-10 {
                break;
            }
        }
        w
    }

    #[test]
    fn irls_matches_gradient_oracle() {
        let (x, y) = noisy_problem(17, 150, 2);
        let m = fit_logistic(&x, &y, &LogisticParams::default()).unwrap();
        assert!(m.converged);
        let (b0, b) = m.raw_coefficients();
        let w = gradient_oracle(&x, &y);
        assert_abs_diff_eq!(b0, w[0], epsilon = 1e-4);
        assert_abs_diff_eq!(b[0], w[1], epsilon = 1e-4);
        assert_abs_diff_eq!(b[1], w[2], epsilon = 1e-4);
    }

    #[test]
    fn probability_is_sigmoid_of_raw_coefficients() {
        let (x, y) = noisy_problem(3, 80, 3);
        let m = lr(&x, &y);
        let ModelState::Logistic(inner) = &m.state else {
            unreachable!()
        };
        let (b0, b) = inner.raw_coefficients();
        let q = [0.4, -1.2, 2.0];
        let by_hand = sigmoid(b0 + q.iter().zip(&b).map(|(a, c)| a * c).sum::<f64>());
        let got = m.predict_proba(&Matrix::from_rows(&[q.to_vec()])).unwrap()[0];
        assert_abs_diff_eq!(got, by_hand, epsilon = 1e-12);
    }

    #[test]
    fn affine_rescaling_and_column_permutation_invariance() {
        let (x, y) = noisy_problem(8, 120, 3);
        let base = lr(&x, &y).predict_proba(&x).unwrap();
        let mut scaled = x.clone();
        for r in 0..x.n_rows() {
            scaled.set(r, 1, 1000.0 * x.get(r, 1) - 42.0);
        }
        let p2 = lr(&scaled, &y).predict_proba(&scaled).unwrap();
        let perm = x.select_columns(&[2, 0, 1]);
        let p3 = lr(&perm, &y).predict_proba(&perm).unwrap();
        for i in 0..base.len() {
            assert_abs_diff_eq!(base[i], p2[i], epsilon = 1e-6);
            assert_abs_diff_eq!(base[i], p3[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]);
        for kind in [ClassifierKind::LogisticRegression, ClassifierKind::RandomForest] {
            assert_eq!(
                fit(kind, &x, &[false, false], &Hyperparameters::default(), 1).unwrap_err(),
                ModelError::SingleClass
            );
        }
        assert_eq!(
            fit_logistic(&Matrix::from_rows(&[vec![1.0]]), &[true], &LogisticParams::default()).unwrap_err(),
            ModelError::TooFewRows(1)
        );
    }

    fn threshold_data(seed: u64, n: usize) -> (Matrix, Vec<bool>) {
        let mut r = seed::rng(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| StandardNormal.sample(&mut r)).collect())
            .collect();
        let y = rows.iter().map(|row: &Vec<f64>| row[0] > 0.0).collect();
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn forest_learns_threshold_rule() {
        let (x, y) = threshold_data(1, 500);
        let (xt, yt) = threshold_data(2, 500);
        let m = fit(ClassifierKind::RandomForest, &x, &y, &Hyperparameters::default(), 7).unwrap();
        let p = m.predict_proba(&xt).unwrap();
        assert!(auc_roc(&p, &yt).unwrap() > 0.95);
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn forest_is_seed_deterministic_across_thread_counts() {
        let (x, y) = threshold_data(4, 200);
        let hp = Hyperparameters::default();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| fit(ClassifierKind::RandomForest, &x, &y, &hp, 11).unwrap());
        let b = many.install(|| fit(ClassifierKind::RandomForest, &x, &y, &hp, 11).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.predict_proba(&x).unwrap(), b.predict_proba(&x).unwrap());
        let c = fit(ClassifierKind::RandomForest, &x, &y, &hp, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forest_pure_leaves_give_certain_probabilities() {
        // widely separated classes: every tree isolates them at the root
        let x = Matrix::from_rows(&[vec![0.0], vec![0.1], vec![10.0], vec![10.1]]);
        let y = [false, false, true, true];
        let hp = Hyperparameters {
            rf: ForestParams {
                n_trees: 25,
                ..ForestParams::default()
            },
            ..Hyperparameters::default()
        };
        let m = fit(ClassifierKind::RandomForest, &x, &y, &hp, 3).unwrap();
        let ModelState::Forest(f) = &m.state else {
            unreachable!()
        };
        let q = Matrix::from_rows(&[vec![100.0], vec![-100.0]]);
        let p = m.predict_proba(&q).unwrap();
        // a bootstrap without any buggy row yields a pure clean tree
        let trees_with_buggy = f.trees.iter().filter(|t| t.predict_row(&[100.0]) == 1.0).count();
        assert_abs_diff_eq!(p[0], trees_with_buggy as f64 / 25.0, epsilon = 1e-12);
        assert!(p[1] <= 1.0 - trees_with_buggy as f64 / 25.0 + 1e-12);
    }

    #[test]
    fn features_per_split_counts() {
        assert_eq!(FeaturesPerSplit::Sqrt.count(19), 4);
        assert_eq!(FeaturesPerSplit::Sqrt.count(3), 1);
        assert_eq!(FeaturesPerSplit::All.count(3), 3);
        assert_eq!(FeaturesPerSplit::Fixed(9).count(3), 3);
    }
}
