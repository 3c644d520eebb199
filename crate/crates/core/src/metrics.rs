//! Evaluation metrics over a feature space: class-separation indices
//! (Davies-Bouldin, silhouette), pairwise verification curves (ROC-AUC,
//! average precision), K-Means and pair-counting clustering scores.
//!
//! All pairwise quantities range over unordered template pairs `(i, j)`,
//! `i < j`, enumerated row-major.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learned::group_by_label;
use crate::model::Distance;

/// Condensed upper-triangle distance matrix.
pub struct PairDistances {
    n: usize,
    values: Vec<f64>,
}

impl PairDistances {
    pub fn compute<D: Distance + ?Sized>(templates: &[Vec<f64>], distance: &D) -> Self {
        let n = templates.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .map(|j| distance.distance(&templates[i], &templates[j]))
                    .collect()
            })
            .collect();
        PairDistances {
            n,
            values: rows.into_iter().flatten().collect(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // offset of row a in the condensed layout
        let offset = a * self.n - a * (a + 1) / 2;
        self.values[offset + (b - a - 1)]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_labels<L: AsRef<str>>(templates: &[Vec<f64>], labels: &[L]) -> Result<(Vec<String>, Vec<Vec<usize>>)> {
    if templates.len() != labels.len() {
        return Err(Error::Parameter(format!(
            "{} templates but {} labels",
            templates.len(),
            labels.len()
        )));
    }
    let groups = group_by_label(labels);
    if groups.0.len() < 2 {
        return Err(Error::InsufficientClasses(groups.0.len()));
    }
    Ok(groups)
}

fn centroid(templates: &[Vec<f64>], idx: &[usize]) -> Vec<f64> {
    let dim = templates[idx[0]].len();
    let mut c = vec![0.0; dim];
    for &i in idx {
        for (a, v) in c.iter_mut().zip(&templates[i]) {
            *a += v;
        }
    }
    c.iter_mut().for_each(|a| *a /= idx.len() as f64);
    c
}

/// Davies-Bouldin index: mean over classes of the worst ratio of summed
/// spreads to centroid separation. Lower is better.
pub fn davies_bouldin<L: AsRef<str>, D: Distance + ?Sized>(
    templates: &[Vec<f64>],
    labels: &[L],
    distance: &D,
) -> Result<f64> {
    let (classes, members) = check_labels(templates, labels)?;
    let centroids: Vec<Vec<f64>> = members.iter().map(|m| centroid(templates, m)).collect();
    let spreads: Vec<f64> = members
        .iter()
        .zip(&centroids)
        .map(|(m, c)| m.iter().map(|&i| distance.distance(&templates[i], c)).sum::<f64>() / m.len() as f64)
        .collect();
    let k = classes.len();
    let mut total = 0.0;
    for a in 0..k {
        let mut worst = f64::NEG_INFINITY;
        for b in 0..k {
            if a == b {
                continue;
            }
            let sep = distance.distance(&centroids[a], &centroids[b]);
            if sep == 0.0 {
                return Err(Error::CoincidentCentroids(classes[a].clone(), classes[b].clone()));
            }
            worst = worst.max((spreads[a] + spreads[b]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

/// Mean silhouette. `a` averages over the other members of a template's
/// class; members of singleton classes and points with `a = b = 0` score 0.
pub fn silhouette<L: AsRef<str>, D: Distance + ?Sized>(
    templates: &[Vec<f64>],
    labels: &[L],
    distance: &D,
) -> Result<f64> {
    let (_, members) = check_labels(templates, labels)?;
    let pairs = PairDistances::compute(templates, distance);
    let mut class_of = vec![0usize; templates.len()];
    for (c, m) in members.iter().enumerate() {
        for &i in m {
            class_of[i] = c;
        }
    }
    let scores: Vec<f64> = (0..templates.len())
        .into_par_iter()
        .map(|i| {
            let own = &members[class_of[i]];
            if own.len() == 1 {
                return 0.0;
            }
            let a = own.iter().filter(|&&j| j != i).map(|&j| pairs.get(i, j)).sum::<f64>() / (own.len() - 1) as f64;
            let b = members
                .iter()
                .enumerate()
                .filter(|(c, _)| *c != class_of[i])
                .map(|(_, m)| m.iter().map(|&j| pairs.get(i, j)).sum::<f64>() / m.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Distances of all unordered pairs with a same-identity flag, row-major.
pub fn labelled_pairs<L: AsRef<str>, D: Distance + ?Sized>(
    templates: &[Vec<f64>],
    labels: &[L],
    distance: &D,
) -> Result<Vec<(f64, bool)>> {
    if templates.len() != labels.len() {
        return Err(Error::Parameter(format!(
            "{} templates but {} labels",
            templates.len(),
            labels.len()
        )));
    }
    let pairs = PairDistances::compute(templates, distance);
    let n = templates.len();
    let mut out = Vec::with_capacity(pairs.len());
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            out.push((pairs.values[k], labels[i].as_ref() == labels[j].as_ref()));
            k += 1;
        }
    }
    let pos = out.iter().filter(|p| p.1).count();
    if pos == 0 || pos == out.len() {
        return Err(Error::UndefinedMetric(
            "ROC/PR need at least one same-identity and one cross-identity pair".into(),
        ));
    }
    Ok(out)
}

/// ROC-AUC from scored pairs (score = negative distance), Mann-Whitney form
/// with ties counted as one half.
pub fn roc_auc_from_pairs(pairs: &[(f64, bool)]) -> Result<f64> {
    let mut sorted: Vec<(f64, bool)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let positives = sorted.iter().filter(|p| p.1).count() as f64;
    let negatives = sorted.len() as f64 - positives;
    if positives == 0.0 || negatives == 0.0 {
        return Err(Error::UndefinedMetric("need positive and negative pairs".into()));
    }
    let mut ordered = 0.0;
    let mut pos_before = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        let (mut pos_g, mut neg_g) = (0.0, 0.0);
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 {
                pos_g += 1.0;
            } else {
                neg_g += 1.0;
            }
            j += 1;
        }
        ordered += neg_g * pos_before + 0.5 * neg_g * pos_g;
        pos_before += pos_g;
        i = j;
    }
    Ok(ordered / (positives * negatives))
}

pub fn roc_auc<L: AsRef<str>, D: Distance + ?Sized>(templates: &[Vec<f64>], labels: &[L], distance: &D) -> Result<f64> {
    roc_auc_from_pairs(&labelled_pairs(templates, labels, distance)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragePrecision {
    pub ap: f64,
    /// Fraction of pairs that are same-identity pairs.
    pub prevalence: f64,
    /// Pairs whose distance equals that of another pair; their relative
    /// order follows pair enumeration order.
    pub tied_pairs: usize,
}

/// Average precision of pairs swept by ascending distance.
pub fn average_precision_from_pairs(pairs: &[(f64, bool)]) -> Result<AveragePrecision> {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0).then(a.cmp(&b)));
    let positives = pairs.iter().filter(|p| p.1).count();
    if positives == 0 || positives == pairs.len() {
        return Err(Error::UndefinedMetric("need positive and negative pairs".into()));
    }
    let mut hits = 0usize;
    let mut ap = 0.0;
    let mut tied = 0usize;
    for (rank, &idx) in order.iter().enumerate() {
        let d = pairs[idx].0;
        let tie_prev = rank > 0 && pairs[order[rank - 1]].0 == d;
        let tie_next = rank + 1 < order.len() && pairs[order[rank + 1]].0 == d;
        if tie_prev || tie_next {
            tied += 1;
        }
        if pairs[idx].1 {
            hits += 1;
            ap += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(AveragePrecision {
        ap: ap / positives as f64,
        prevalence: positives as f64 / pairs.len() as f64,
        tied_pairs: tied,
    })
}

pub fn pr_auc_detailed<L: AsRef<str>, D: Distance + ?Sized>(
    templates: &[Vec<f64>],
    labels: &[L],
    distance: &D,
) -> Result<AveragePrecision> {
    average_precision_from_pairs(&labelled_pairs(templates, labels, distance)?)
}

pub fn pr_auc<L: AsRef<str>, D: Distance + ?Sized>(templates: &[Vec<f64>], labels: &[L], distance: &D) -> Result<f64> {
    Ok(pr_auc_detailed(templates, labels, distance)?.ap)
}

/// The four class-separation and verification metrics of one feature space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationMetrics {
    pub dbi: f64,
    pub sc: f64,
    pub roc: f64,
    pub pr: f64,
}

impl SeparationMetrics {
    pub fn compute<L: AsRef<str>, D: Distance + ?Sized>(templates: &[Vec<f64>], labels: &[L], distance: &D) -> Result<Self> {
        let pairs = labelled_pairs(templates, labels, distance)?;
        Ok(SeparationMetrics {
            dbi: davies_bouldin(templates, labels, distance)?,
            sc: silhouette(templates, labels, distance)?,
            roc: roc_auc_from_pairs(&pairs)?,
            pr: average_precision_from_pairs(&pairs)?.ap,
        })
    }

    pub fn named(&self) -> [(&'static str, f64); 4] {
        [("dbi", self.dbi), ("sc", self.sc), ("roc", self.roc), ("pr", self.pr)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub assignment: Vec<usize>,
    pub k: usize,
    /// Within-cluster sum of squared Euclidean distances.
    pub sse: f64,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = vec![points[rng.gen_range(0..n)].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 && target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            while nearest[chosen] == 0.0 {
                chosen -= 1;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = points[pick].clone();
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>]) -> Vec<usize> {
    points
        .par_iter()
        .map(|p| {
            let mut best = (f64::INFINITY, 0);
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(p, center);
                if d < best.0 {
                    best = (d, c);
                }
            }
            best.1
        })
        .collect()
}

fn sse(points: &[Vec<f64>], centers: &[Vec<f64>], assignment: &[usize]) -> f64 {
    points.iter().zip(assignment).map(|(p, &c)| sq_dist(p, &centers[c])).sum()
}

/// Lloyd's algorithm with k-means++ seeding on Euclidean feature vectors.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<ClusteringResult> {
    if k == 0 || k > points.len() {
        return Err(Error::Parameter(format!(
            "K must lie in 1..={}, got {k}",
            points.len()
        )));
    }
    if max_iter == 0 {
        return Err(Error::Parameter("max_iter must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = plus_plus_init(points, k, &mut rng);
    let mut assignment = assign(points, &centers);
    let mut iterations = 0;
    let dim = points[0].len();

    while iterations < max_iter {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // Re-seed each empty cluster at the point farthest from its centroid.
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..points.len())
                .filter(|&i| counts[assignment[i]] > 1)
                .max_by(|&a, &b| {
                    sq_dist(&points[a], &centers[assignment[a]])
                        .total_cmp(&sq_dist(&points[b], &centers[assignment[b]]))
                        .then(b.cmp(&a))
                });
            if let Some(i) = far {
                counts[assignment[i]] -= 1;
                assignment[i] = c;
                counts[c] = 1;
                centers[c] = points[i].clone();
            }
        }
        let next = assign(points, &centers);
        if next == assignment {
            break;
        }
        assignment = next;
    }
    let error = sse(points, &centers, &assignment);
    Ok(ClusteringResult {
        assignment,
        k,
        sse: error,
        iterations,
    })
}

/// Best of `restarts` seeded runs by SSE. Run `r` uses a seed derived from `seed` and `r`.
pub fn kmeans_restarts(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize, restarts: usize) -> Result<ClusteringResult> {
    let mut best: Option<ClusteringResult> = None;
    for r in 0..restarts.max(1) {
        let s = if r == 0 { seed } else { crate::seeds::derive_seed(seed, &format!("restart-{r}")) };
        let run = kmeans(points, k, s, max_iter)?;
        if best.as_ref().is_none_or(|b| run.sse < b.sse) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one run"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairConfusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl PairConfusion {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringScores {
    pub purity: f64,
    pub rand_index: f64,
    pub f_measure: f64,
    pub jaccard: f64,
    pub fowlkes_mallows: f64,
    pub pairs: PairConfusion,
}

impl ClusteringScores {
    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("purity", self.purity),
            ("ri", self.rand_index),
            ("f", self.f_measure),
            ("ji", self.jaccard),
            ("fmi", self.fowlkes_mallows),
        ]
    }
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Purity and the pair-counting indices of a clustering against true identities.
pub fn clustering_scores<L: AsRef<str>>(assignment: &[usize], labels: &[L]) -> Result<ClusteringScores> {
    if assignment.len() != labels.len() {
        return Err(Error::Parameter(format!(
            "{} assignments but {} labels",
            assignment.len(),
            labels.len()
        )));
    }
    let n = assignment.len() as u64;
    let (_, members) = group_by_label(labels);
    let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; members.len()]; k];
    for (class, m) in members.iter().enumerate() {
        for &i in m {
            table[assignment[i]][class] += 1;
        }
    }
    let same_both: u64 = table.iter().flatten().map(|&c| choose2(c)).sum();
    let same_cluster: u64 = table.iter().map(|row| choose2(row.iter().sum())).sum();
    let same_class: u64 = members.iter().map(|m| choose2(m.len() as u64)).sum();
    let tp = same_both;
    let fp = same_cluster - tp;
    let fn_ = same_class - tp;
    let tn = choose2(n) - tp - fp - fn_;
    if tp + fp == 0 || tp + fn_ == 0 {
        return Err(Error::UndefinedMetric(
            "precision or recall undefined: no pair shares a cluster or an identity".into(),
        ));
    }
    let p = tp as f64 / (tp + fp) as f64;
    let r = tp as f64 / (tp + fn_) as f64;
    let purity = table.iter().map(|row| row.iter().copied().max().unwrap_or(0)).sum::<u64>() as f64 / n as f64;
    Ok(ClusteringScores {
        purity,
        rand_index: (tp + tn) as f64 / (tp + tn + fp + fn_) as f64,
        f_measure: if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 },
        jaccard: tp as f64 / (tp + fp + fn_) as f64,
        fowlkes_mallows: (p * r).sqrt(),
        pairs: PairConfusion { tp, tn, fp, fn_ },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Euclidean;

    fn rect() -> (Vec<Vec<f64>>, Vec<&'static str>) {
        (
            vec![vec![0.0, 0.0], vec![0.0, 2.0], vec![10.0, 0.0], vec![10.0, 2.0]],
            vec!["a", "a", "b", "b"],
        )
    }

    #[test]
    fn dbi_fixtures() {
        let (t, l) = rect();
        assert!((davies_bouldin(&t, &l, &Euclidean).unwrap() - 0.2).abs() < 1e-15);
        let single = vec![vec![0.0], vec![10.0]];
        assert_eq!(davies_bouldin(&single, &["a", "b"], &Euclidean).unwrap(), 0.0);
        let same = vec![vec![0.0], vec![1.0], vec![0.5]];
        let labels = ["a", "a", "b"];
        assert!(matches!(
            davies_bouldin(&same, &labels, &Euclidean),
            Err(Error::CoincidentCentroids(..))
        ));
        assert!(matches!(
            davies_bouldin(&single, &["a", "a"], &Euclidean),
            Err(Error::InsufficientClasses(1))
        ));
    }

    #[test]
    fn silhouette_fixtures() {
        let (t, l) = rect();
        let b = (10.0 + 104f64.sqrt()) / 2.0;
        let expected = (b - 2.0) / b;
        assert!((silhouette(&t, &l, &Euclidean).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.8020).abs() < 1e-4);

        let same = vec![vec![1.0, 1.0]; 4];
        assert_eq!(silhouette(&same, &l, &Euclidean).unwrap(), 0.0);

        let tight = vec![vec![0.0], vec![0.01], vec![100.0], vec![100.01]];
        assert!(silhouette(&tight, &l, &Euclidean).unwrap() > 0.999);
    }

    #[test]
    fn roc_fixtures() {
        let pairs = |pos: &[f64], neg: &[f64]| -> Vec<(f64, bool)> {
            pos.iter().map(|&d| (d, true)).chain(neg.iter().map(|&d| (d, false))).collect()
        };
        assert_eq!(roc_auc_from_pairs(&pairs(&[1.0, 2.0], &[3.0, 4.0])).unwrap(), 1.0);
        assert_eq!(roc_auc_from_pairs(&pairs(&[1.0, 1.0], &[1.0, 1.0])).unwrap(), 0.5);
        assert_eq!(roc_auc_from_pairs(&pairs(&[1.0, 3.0], &[2.0, 4.0])).unwrap(), 0.75);
        assert!(roc_auc_from_pairs(&pairs(&[1.0], &[])).is_err());
    }

    #[test]
    fn ap_fixtures() {
        let perfect = [(1.0, true), (2.0, true), (3.0, false)];
        assert_eq!(average_precision_from_pairs(&perfect).unwrap().ap, 1.0);
        let last = [(1.0, false), (2.0, false), (3.0, false), (4.0, true)];
        let ap = average_precision_from_pairs(&last).unwrap();
        assert_eq!(ap.ap, 0.25);
        assert_eq!(ap.prevalence, 0.25);
        assert_eq!(ap.tied_pairs, 0);
        let tied = [(1.0, false), (1.0, true)];
        assert_eq!(average_precision_from_pairs(&tied).unwrap().tied_pairs, 2);
    }

    #[test]
    fn pair_metrics_need_both_kinds() {
        let t = vec![vec![0.0], vec![1.0]];
        assert!(matches!(roc_auc(&t, &["a", "a"], &Euclidean), Err(Error::UndefinedMetric(_))));
        assert!(matches!(pr_auc(&t, &["a", "b"], &Euclidean), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn pair_count_fixture() {
        let s = clustering_scores(&[0, 0, 0, 1], &["a", "a", "b", "b"]).unwrap();
        assert_eq!(s.pairs, PairConfusion { tp: 1, tn: 2, fp: 2, fn_: 1 });
        assert_eq!(s.rand_index, 0.5);
        assert!((s.f_measure - 0.4).abs() < 1e-15);
        assert_eq!(s.jaccard, 0.25);
        assert!((s.fowlkes_mallows - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.purity, 0.75);

        let perfect = clustering_scores(&[1, 1, 0, 0], &["a", "a", "b", "b"]).unwrap();
        for (_, v) in perfect.named() {
            assert_eq!(v, 1.0);
        }
        assert!(matches!(
            clustering_scores(&[0, 1, 2], &["a", "b", "c"]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn kmeans_saturation_and_separation() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 1.5, (i * i) as f64]).collect();
        let r = kmeans(&pts, 6, 3, 50).unwrap();
        assert_eq!(r.sse, 0.0);
        let mut ids = r.assignment.clone();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 6);

        let mut two = Vec::new();
        for i in 0..10 {
            two.push(vec![i as f64 * 0.01, 0.0]);
            two.push(vec![1000.0 + i as f64 * 0.01, 5.0]);
        }
        let r = kmeans(&two, 2, 9, 100).unwrap();
        for i in 0..10 {
            assert_eq!(r.assignment[2 * i], r.assignment[0]);
            assert_eq!(r.assignment[2 * i + 1], r.assignment[1]);
        }
        assert_ne!(r.assignment[0], r.assignment[1]);
        assert!(kmeans(&two, 21, 0, 10).is_err());
        assert!(kmeans(&two, 2, 0, 0).is_err());
    }

    #[test]
    fn pair_distance_indexing() {
        let t: Vec<Vec<f64>> = (0..5).map(|i| vec![(i * i) as f64]).collect();
        let p = PairDistances::compute(&t, &Euclidean);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(p.get(i, j), ((i * i) as f64 - (j * j) as f64).abs());
            }
        }
    }
}
