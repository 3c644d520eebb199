mod common;

use common::{oracles, rigid, sample_from};
use gaitlab_core::geometric::{
    extract_geometric, joint_angle_signal, preset_broad, preset_lower_body, step_length_and_speed, Primitive, Statistic,
};
use gaitlab_core::learned::{compute_scatter, fit_mmc_linear, fit_pcalda_linear};
use gaitlab_core::normalize::{normalize_sample, resample_cycle, vectorize};
use gaitlab_core::sample::GaitSample;
use gaitlab_core::skeleton::{JointMask, JOINT_COUNT};
use gaitlab_core::synth::synthesize_dataset;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATE: f64 = 120.0;

fn walker(seed: u64) -> GaitSample {
    synthesize_dataset(1, 1, seed).unwrap().samples()[0].clone()
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn sub(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

fn labelled_cloud(rng: &mut ChaCha8Rng, classes: usize, per: usize, dim: usize, spread: f64) -> (Vec<Vec<f64>>, Vec<String>) {
    let centers: Vec<Vec<f64>> = (0..classes).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let mut x = Vec::new();
    let mut l = Vec::new();
    for (c, m) in centers.iter().enumerate() {
        for _ in 0..per {
            x.push(m.iter().map(|v| v + spread * rng.gen_range(-1.0..1.0)).collect());
            l.push(format!("c{c}"));
        }
    }
    (x, l)
}

fn stat(s: Statistic, v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    match s {
        Statistic::Mean => mean,
        Statistic::Std => (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt(),
        Statistic::Max => v.iter().cloned().fold(f64::MIN, f64::max),
    }
}

fn angle_oracle(s: &GaitSample, a: usize, b: usize, c: usize) -> Vec<f64> {
    s.frames()
        .iter()
        .map(|f| {
            let u: Vec<f64> = (0..3).map(|k| f[a][k] - f[b][k]).collect();
            let v: Vec<f64> = (0..3).map(|k| f[c][k] - f[b][k]).collect();
            let dot: f64 = (0..3).map(|k| u[k] * v[k]).sum();
            let norm = (u.iter().map(|x| x * x).sum::<f64>() * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
            (dot / norm).clamp(-1.0, 1.0).acos()
        })
        .collect()
}

fn horizontal(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn primitive_oracle(s: &GaitSample, p: &Primitive) -> Vec<f64> {
    let frames = s.frames();
    match *p {
        Primitive::BoneLength { joints: [a, b] } | Primitive::InterJointDistance { joints: [a, b] } => {
            frames.iter().map(|f| oracles::euclid(&f[a], &f[b])).collect()
        }
        Primitive::Height => frames
            .iter()
            .map(|f| {
                let ys: Vec<f64> = f.iter().map(|j| j[1]).collect();
                ys.iter().cloned().fold(f64::MIN, f64::max) - ys.iter().cloned().fold(f64::MAX, f64::min)
            })
            .collect(),
        Primitive::StepLength => {
            let (l, r) = (gaitlab_core::skeleton::joint_index("lfoot").unwrap(), gaitlab_core::skeleton::joint_index("rfoot").unwrap());
            frames.iter().map(|f| horizontal(&f[l], &f[r])).collect()
        }
        Primitive::WalkSpeed => {
            let secs = (frames.len() - 1) as f64 / RATE;
            vec![horizontal(&frames[0][0], &frames[frames.len() - 1][0]) / secs]
        }
        Primitive::JointAngle { joints: [a, b, c] } => angle_oracle(s, a, b, c),
    }
}

#[test]
fn resampling_matches_linear_interpolation() {
    let s = sample_from("a", 5, |f, j| {
        let t = f as f64;
        [(t + j as f64).sin(), (0.7 * t).cos() * j as f64, t * t - 0.3 * j as f64]
    });
    let r = resample_cycle(&s, 9).unwrap();
    for j in 0..JOINT_COUNT {
        for a in 0..3 {
            let src: Vec<f64> = s.frames().iter().map(|f| f[j][a]).collect();
            let got: Vec<f64> = r.frames().iter().map(|f| f[j][a]).collect();
            for (g, w) in got.iter().zip(oracles::interpolate(&src, 9)) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn vectorize_restricts_the_full_layout() {
    let s = walker(4);
    let full = vectorize(&s, &JointMask::full(), 12).unwrap();
    assert_eq!(full.len(), 3 * 31 * 12);
    let mask = JointMask::new(vec![0, 3, 4, 17, 30]).unwrap();
    let part = vectorize(&s, &mask, 12).unwrap();
    let mut want = Vec::new();
    for f in 0..12 {
        for &j in mask.indices() {
            for a in 0..3 {
                want.push(full[f * 3 * JOINT_COUNT + 3 * j + a]);
            }
        }
    }
    assert_eq!(part, want);
}

#[test]
fn normalization_is_rigid_invariant_and_idempotent() {
    let s = walker(9);
    let base = normalize_sample(&s).unwrap();
    let moved = normalize_sample(&rigid(&s, std::f64::consts::FRAC_PI_2, [5.0, 0.0, 3.0])).unwrap();
    let again = normalize_sample(&base).unwrap();
    for ((a, b), c) in base.frames().iter().zip(moved.frames()).zip(again.frames()) {
        for j in 0..JOINT_COUNT {
            for k in 0..3 {
                assert!((a[j][k] - b[j][k]).abs() < 1e-9);
                assert!((a[j][k] - c[j][k]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn presets_match_per_primitive_oracles() {
    for seed in 0..3 {
        let s = walker(seed);
        for spec in [preset_broad(), preset_lower_body()] {
            let got = extract_geometric(&s, &spec, Some(RATE)).unwrap();
            assert_eq!(got.len(), spec.len());
            for (g, d) in got.iter().zip(&spec.descriptors) {
                let want = stat(d.statistic, &primitive_oracle(&s, &d.primitive));
                assert!((g - want).abs() < 1e-9, "{d}: {g} vs {want}");
            }
        }
    }
}

#[test]
fn step_length_matches_frame_scan() {
    let s = walker(2);
    let (step, speed) = step_length_and_speed(&s, Some(RATE)).unwrap();
    let scan = primitive_oracle(&s, &Primitive::StepLength);
    assert!((step - scan.iter().cloned().fold(f64::MIN, f64::max)).abs() < 1e-12);
    assert!((speed - primitive_oracle(&s, &Primitive::WalkSpeed)[0]).abs() < 1e-12);
}

#[test]
fn knee_angle_matches_arccos() {
    let s = walker(5);
    let j = |n| gaitlab_core::skeleton::joint_index(n).unwrap();
    let got = joint_angle_signal(&s, j("lfemur"), j("ltibia"), j("lfoot")).unwrap();
    for (g, w) in got.iter().zip(angle_oracle(&s, j("lfemur"), j("ltibia"), j("lfoot"))) {
        assert!((g - w).abs() < 1e-9);
    }
}

#[test]
fn geometric_features_survive_rigid_motion() {
    let s = walker(7);
    let spec = preset_broad();
    let a = extract_geometric(&normalize_sample(&s).unwrap(), &spec, Some(RATE)).unwrap();
    let moved = rigid(&s, 1.1, [-2.0, 0.5, 7.0]);
    let b = extract_geometric(&normalize_sample(&moved).unwrap(), &spec, Some(RATE)).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn scatter_matches_direct_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (x, l) = labelled_cloud(&mut rng, 4, 7, 5, 1.0);
    let s = compute_scatter(&x, &l).unwrap();
    let (sb, sw) = oracles::scatter(&x, &l);
    for i in 0..5 {
        for j in 0..5 {
            assert!((s.between[(i, j)] - sb[i][j]).abs() < 1e-12);
            assert!((s.within[(i, j)] - sw[i][j]).abs() < 1e-12);
        }
    }
}

fn check_mmc(x: &[Vec<f64>], l: &[String]) {
    let fit = fit_mmc_linear(x, l).unwrap();
    let (sb, sw) = oracles::scatter(x, l);
    let crit = sub(&sb, &sw);
    let rows = rows_of(&fit.projection);
    let sum: f64 = fit.eigenvalues.iter().sum();
    assert!((sum - oracles::trace_criterion(&rows, &crit)).abs() < 1e-8 * (1.0 + sum.abs()));
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            let dot: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
            assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
        }
    }
    let (values, _) = oracles::jacobi_eigen(&crit);
    let scale: f64 = values.iter().map(|v| v.abs()).sum();
    let positive: Vec<f64> = values.into_iter().filter(|&v| v > 1e-10 * scale).collect();
    assert_eq!(positive.len(), fit.eigenvalues.len());
    for (g, w) in fit.eigenvalues.iter().zip(&positive) {
        assert!((g - w).abs() < 1e-8 * (1.0 + w.abs()), "{g} vs {w}");
    }
}

#[test]
fn mmc_matches_trace_criterion_and_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (x, l) = labelled_cloud(&mut rng, 5, 20, 20, 1.0);
    check_mmc(&x, &l);
}

#[test]
fn mmc_in_the_sample_span_when_dimension_exceeds_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (x, l) = labelled_cloud(&mut rng, 5, 4, 40, 1.0);
    check_mmc(&x, &l);
}

#[test]
fn mmc_criterion_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (x, l) = labelled_cloud(&mut rng, 5, 12, 10, 1.0);
    let base: f64 = fit_mmc_linear(&x, &l).unwrap().eigenvalues.iter().sum();
    for _ in 0..3 {
        let q = DMatrix::from_fn(10, 10, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        let rotated: Vec<Vec<f64>> = x
            .iter()
            .map(|v| (&q * nalgebra::DVector::from_column_slice(v)).iter().copied().collect())
            .collect();
        let sum: f64 = fit_mmc_linear(&rotated, &l).unwrap().eigenvalues.iter().sum();
        assert!((sum - base).abs() < 1e-6 * base.abs().max(1.0));
    }
}

/// `A^{-1/2}` of a symmetric positive definite matrix.
fn inv_sqrt(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (vals, vecs) = oracles::jacobi_eigen(a);
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| vecs[i][k] * vecs[j][k] / vals[k].sqrt()).sum()).collect())
        .collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a.len())
        .map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

#[test]
fn pcalda_matches_generalized_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let d = 6;
    let (x, l) = labelled_cloud(&mut rng, 4, 15, d, 1.0);
    let fit = fit_pcalda_linear(&x, &l, 1.0).unwrap();
    assert_eq!(fit.projection.nrows(), 3);

    let (sb, mut sw) = oracles::scatter(&x, &l);
    let eps = 1e-6 * (0..d).map(|i| sw[i][i]).sum::<f64>() / d as f64;
    for (i, row) in sw.iter_mut().enumerate() {
        row[i] += eps;
    }
    let w = inv_sqrt(&sw);
    let m = matmul(&matmul(&w, &sb), &w);
    let (vals, u) = oracles::jacobi_eigen(&m);
    let dirs: Vec<Vec<f64>> = (0..3)
        .map(|c| {
            let v: Vec<f64> = (0..d).map(|i| (0..d).map(|k| w[i][k] * u[k][c]).sum()).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            v.iter().map(|a| a / n).collect()
        })
        .collect();
    for (g, w) in fit.eigenvalues.iter().zip(&vals) {
        assert!((g - w).abs() < 1e-6 * w.abs().max(1.0));
    }

    let got = rows_of(&fit.projection);
    for class in 0..4 {
        let members: Vec<&Vec<f64>> = x.iter().zip(&l).filter(|(_, c)| **c == format!("c{class}")).map(|(v, _)| v).collect();
        let mean: Vec<f64> = (0..d).map(|k| members.iter().map(|v| v[k]).sum::<f64>() / members.len() as f64).collect();
        for (g, w) in got.iter().zip(&dirs) {
            let pg: f64 = g.iter().zip(&mean).map(|(a, b)| a * b).sum();
            let pw: f64 = w.iter().zip(&mean).map(|(a, b)| a * b).sum();
            let sign: f64 = g.iter().zip(w).map(|(a, b)| a * b).sum::<f64>().signum();
            assert!((pg - sign * pw).abs() < 1e-6, "{pg} vs {pw}");
        }
    }
}
