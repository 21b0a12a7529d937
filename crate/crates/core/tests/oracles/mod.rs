//! Independent reference computations. Nothing here calls into the library's
//! numerics; only plain `Vec<f64>` arithmetic.
#![allow(dead_code)]

/// Fraction of (positive, negative) pairs where the positive scores higher,
/// ties counting one half.
pub fn pairwise_auc(scores: &[f64], truth: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !truth[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if truth[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation, two-pass.
pub fn sample_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Sample covariance of row vectors.
pub fn covariance(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mu: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for a in 0..d {
        for b in 0..d {
            cov[a][b] = rows.iter().map(|r| (r[a] - mu[a]) * (r[b] - mu[b])).sum::<f64>() / (n - 1.0);
        }
    }
    (mu, cov)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}

/// Determinant and inverse by Gauss-Jordan elimination with partial pivoting.
pub fn det_and_inverse(m: &[Vec<f64>]) -> (f64, Vec<Vec<f64>>) {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap()).unwrap();
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    (det, inv)
}

/// Log of the multivariate normal density written out term by term.
pub fn gaussian_log_density(x: &[f64], mu: &[f64], cov: &[Vec<f64>]) -> f64 {
    let d = x.len();
    let (det, inv) = det_and_inverse(cov);
    let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
    let mut q = 0.0;
    for a in 0..d {
        for b in 0..d {
            q += diff[a] * inv[a][b] * diff[b];
        }
    }
    -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + det.ln() + q)
}

/// Gaussian class-conditional posteriors. Each class covariance gets the
/// ridge `ridge * (trace / d) * I` before use.
pub struct GaussianPosterior {
    pub classes: Vec<i64>,
    pub log_priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covs: Vec<Vec<Vec<f64>>>,
}

impl GaussianPosterior {
    pub fn fit(rows: &[Vec<f64>], labels: &[i64], ridge: f64) -> Self {
        let mut classes: Vec<i64> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let mut out =
            GaussianPosterior { classes: classes.clone(), log_priors: Vec::new(), means: Vec::new(), covs: Vec::new() };
        for c in classes {
            let members: Vec<Vec<f64>> =
                rows.iter().zip(labels).filter(|(_, &l)| l == c).map(|(r, _)| r.clone()).collect();
            let (mu, mut cov) = covariance(&members);
            let d = cov.len();
            let tr: f64 = (0..d).map(|i| cov[i][i]).sum::<f64>() / d as f64;
            for (i, row) in cov.iter_mut().enumerate() {
                row[i] += ridge * tr;
            }
            out.log_priors.push((members.len() as f64 / rows.len() as f64).ln());
            out.means.push(mu);
            out.covs.push(cov);
        }
        out
    }

    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        let lj: Vec<f64> = (0..self.classes.len())
            .map(|c| self.log_priors[c] + gaussian_log_density(x, &self.means[c], &self.covs[c]))
            .collect();
        let max = lj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = lj.iter().map(|l| (l - max).exp()).sum();
        lj.iter().map(|l| (l - max).exp() / z).collect()
    }
}

#[test]
fn oracles_self_check() {
    assert_eq!(pairwise_auc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]), 0.75);
    assert_eq!(sample_std(&[1.0, 2.0, 3.0]), 1.0);
    let ev = jacobi_eigenvalues(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
    assert!((ev[0] - 3.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    let (det, inv) = det_and_inverse(&[vec![4.0, 7.0], vec![2.0, 6.0]]);
    assert!((det - 10.0).abs() < 1e-12);
    assert!((inv[0][0] - 0.6).abs() < 1e-15 && (inv[0][1] + 0.7).abs() < 1e-15);
}
