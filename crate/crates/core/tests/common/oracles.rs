//! Independent reference implementations used by the tests. Written directly
//! from the formulas, with plain loops and no shared code with the library.
#![allow(dead_code)]

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn classes(labels: &[String]) -> Vec<String> {
    let mut c: Vec<String> = labels.to_vec();
    c.sort();
    c.dedup();
    c
}

fn mean_of(points: &[&Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    (0..d).map(|k| points.iter().map(|p| p[k]).sum::<f64>() / points.len() as f64).collect()
}

pub fn dbi(t: &[Vec<f64>], labels: &[String], dist: &dyn Fn(&[f64], &[f64]) -> f64) -> f64 {
    let cs = classes(labels);
    let groups: Vec<Vec<&Vec<f64>>> = cs
        .iter()
        .map(|c| t.iter().zip(labels).filter(|(_, l)| *l == c).map(|(p, _)| p).collect())
        .collect();
    let mu: Vec<Vec<f64>> = groups.iter().map(|g| mean_of(g)).collect();
    let sigma: Vec<f64> = groups
        .iter()
        .zip(&mu)
        .map(|(g, m)| g.iter().map(|p| dist(p, m)).sum::<f64>() / g.len() as f64)
        .collect();
    let mut total = 0.0;
    for i in 0..cs.len() {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..cs.len() {
            if i != j {
                worst = worst.max((sigma[i] + sigma[j]) / dist(&mu[i], &mu[j]));
            }
        }
        total += worst;
    }
    total / cs.len() as f64
}

pub fn silhouette(t: &[Vec<f64>], labels: &[String], dist: &dyn Fn(&[f64], &[f64]) -> f64) -> f64 {
    let cs = classes(labels);
    let mut total = 0.0;
    for i in 0..t.len() {
        let own: Vec<usize> = (0..t.len()).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(&t[i], &t[j])).sum::<f64>() / own.len() as f64;
        let mut b = f64::INFINITY;
        for c in &cs {
            if *c == labels[i] {
                continue;
            }
            let other: Vec<usize> = (0..t.len()).filter(|&j| labels[j] == *c).collect();
            b = b.min(other.iter().map(|&j| dist(&t[i], &t[j])).sum::<f64>() / other.len() as f64);
        }
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / t.len() as f64
}

/// All unordered pairs `(i, j)`, `i < j`, in row-major order.
pub fn pairs(t: &[Vec<f64>], labels: &[String], dist: &dyn Fn(&[f64], &[f64]) -> f64) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            out.push((dist(&t[i], &t[j]), labels[i] == labels[j]));
        }
    }
    out
}

/// Exhaustive comparison of every positive with every negative pair.
pub fn roc(p: &[(f64, bool)]) -> f64 {
    let pos: Vec<f64> = p.iter().filter(|x| x.1).map(|x| x.0).collect();
    let neg: Vec<f64> = p.iter().filter(|x| !x.1).map(|x| x.0).collect();
    let mut s = 0.0;
    for a in &pos {
        for b in &neg {
            s += if a < b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            };
        }
    }
    s / (pos.len() * neg.len()) as f64
}

/// AP = sum over ranks k of (R_k - R_{k-1}) * P_k, ranks by ascending distance
/// with ties kept in enumeration order.
pub fn average_precision(p: &[(f64, bool)]) -> f64 {
    let mut ranked: Vec<(usize, &(f64, bool))> = p.iter().enumerate().collect();
    ranked.sort_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap().then(a.0.cmp(&b.0)));
    let total_pos = p.iter().filter(|x| x.1).count() as f64;
    let mut tp = 0.0;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for (k, (_, x)) in ranked.iter().enumerate() {
        if x.1 {
            tp += 1.0;
        }
        let recall = tp / total_pos;
        let precision = tp / (k + 1) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    ap
}

/// (tp, fp, fn, tn) by enumerating every pair.
pub fn pair_counts(assign: &[usize], labels: &[String]) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut fnn, mut tn) = (0, 0, 0, 0);
    for i in 0..assign.len() {
        for j in i + 1..assign.len() {
            match (assign[i] == assign[j], labels[i] == labels[j]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnn += 1,
                (false, false) => tn += 1,
            }
        }
    }
    (tp, fp, fnn, tn)
}

pub fn purity(assign: &[usize], labels: &[String]) -> f64 {
    let k = assign.iter().max().map_or(0, |m| m + 1);
    let mut total = 0;
    for c in 0..k {
        let members: Vec<&String> = (0..assign.len()).filter(|&i| assign[i] == c).map(|i| &labels[i]).collect();
        let best = members
            .iter()
            .map(|l| members.iter().filter(|m| *m == l).count())
            .max()
            .unwrap_or(0);
        total += best;
    }
    total as f64 / assign.len() as f64
}

/// (P, RI, F, JI, FMI).
pub fn clustering(assign: &[usize], labels: &[String]) -> [f64; 5] {
    let (tp, fp, fnn, tn) = pair_counts(assign, labels);
    let (tp, fp, fnn, tn) = (tp as f64, fp as f64, fnn as f64, tn as f64);
    let p = tp / (tp + fp);
    let r = tp / (tp + fnn);
    [
        purity(assign, labels),
        (tp + tn) / (tp + fp + fnn + tn),
        if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 },
        tp / (tp + fp + fnn),
        (p * r).sqrt(),
    ]
}

pub fn sse(points: &[Vec<f64>], assign: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..k {
        let m: Vec<&Vec<f64>> = points.iter().zip(assign).filter(|(_, a)| **a == c).map(|(p, _)| p).collect();
        if m.is_empty() {
            continue;
        }
        let mu = mean_of(&m);
        total += m.iter().map(|p| euclid(p, &mu).powi(2)).sum::<f64>();
    }
    total
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
/// eigenvalues descending with eigenvectors as columns `vecs[row][col]`.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap());
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vecs = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (values, vecs)
}

/// Between- and within-class scatter with class priors as weights.
pub fn scatter(x: &[Vec<f64>], labels: &[String]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let d = x[0].len();
    let n = x.len() as f64;
    let all: Vec<&Vec<f64>> = x.iter().collect();
    let mu = mean_of(&all);
    let mut sb = vec![vec![0.0; d]; d];
    let mut sw = vec![vec![0.0; d]; d];
    for c in classes(labels) {
        let g: Vec<&Vec<f64>> = x.iter().zip(labels).filter(|(_, l)| **l == c).map(|(p, _)| p).collect();
        let prior = g.len() as f64 / n;
        let mc = mean_of(&g);
        for i in 0..d {
            for j in 0..d {
                sb[i][j] += prior * (mc[i] - mu[i]) * (mc[j] - mu[j]);
                for p in &g {
                    sw[i][j] += prior / g.len() as f64 * (p[i] - mc[i]) * (p[j] - mc[j]);
                }
            }
        }
    }
    (sb, sw)
}

/// `tr(W^T A W)` for `W` given as rows (each row one direction).
pub fn trace_criterion(rows: &[Vec<f64>], a: &[Vec<f64>]) -> f64 {
    rows.iter()
        .map(|w| {
            let mut s = 0.0;
            for i in 0..w.len() {
                for j in 0..w.len() {
                    s += w[i] * a[i][j] * w[j];
                }
            }
            s
        })
        .sum()
}

/// Piecewise-linear interpolation of `y` sampled at `0..y.len()-1` onto `t`
/// equally spaced points over the same span.
pub fn interpolate(y: &[f64], t: usize) -> Vec<f64> {
    let span = (y.len() - 1) as f64;
    (0..t)
        .map(|k| {
            let x = span * k as f64 / (t - 1) as f64;
            let i = (x.floor() as usize).min(y.len() - 2);
            let w = x - i as f64;
            y[i] * (1.0 - w) + y[i + 1] * w
        })
        .collect()
}

/// Kolmogorov-Smirnov statistic of `values` against Uniform[0, 1].
pub fn ks_uniform(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max)
}
