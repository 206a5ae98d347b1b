//! Small numeric helpers shared across modules.

use nalgebra::{Cholesky, DMatrix, DVector};

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Streaming log-sum-exp with a running maximum.
#[derive(Clone, Debug)]
pub(crate) struct LogSumExp {
    max: f64,
    acc: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            acc: 0.0,
        }
    }

    pub fn add(&mut self, w: f64) {
        if w <= self.max {
            self.acc += (w - self.max).exp();
        } else {
            self.acc = self.acc * (self.max - w).exp() + 1.0;
            self.max = w;
        }
    }

    pub fn value(&self) -> f64 {
        self.max + self.acc.ln()
    }
}

/// Solves the symmetric positive-definite system `m x = b` by Cholesky,
/// retrying with a small ridge before giving up.
pub(crate) fn solve_spd(m: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Some(chol.solve(b));
    }
    let scale = m.diagonal().amax().max(1e-12);
    for ridge in [1e-10, 1e-8, 1e-6] {
        let mut r = m.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += ridge * scale;
        }
        if let Some(chol) = Cholesky::new(r) {
            return Some(chol.solve(b));
        }
    }
    None
}

/// Solves `m x = b` through a truncated eigendecomposition: directions whose
/// eigenvalue falls below a small fraction of the largest are dropped
/// entirely. On a rank-deficient information matrix this moves the iterate
/// only along directions the data (or a simulation pool) actually inform,
/// instead of amplifying noise along flat ones.
pub(crate) fn solve_truncated(m: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let lam_max = eig.eigenvalues.amax();
    if !lam_max.is_finite() || lam_max <= 0.0 {
        return None;
    }
    let cut = 1e-8 * lam_max;
    let coeffs = eig.eigenvectors.transpose() * b;
    let mut x = DVector::zeros(b.len());
    for (i, lam) in eig.eigenvalues.iter().enumerate() {
        if *lam >= cut {
            x += eig.eigenvectors.column(i) * (coeffs[i] / lam);
        }
    }
    Some(x)
}

/// Inverts a symmetric positive-semidefinite matrix. Cholesky when positive
/// definite; otherwise the eigenvalues are floored at a small fraction of
/// the largest one, so flat (non-identified) directions come back with
/// huge-but-finite variances instead of a failure.
pub(crate) fn invert_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Some(chol.inverse());
    }
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let lam_max = eig.eigenvalues.amax();
    if !lam_max.is_finite() || lam_max <= 0.0 {
        return None;
    }
    let floor = 1e-10 * lam_max;
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.max(floor)));
    Some(&eig.eigenvectors * inv_diag * eig.eigenvectors.transpose())
}

/// Linear-interpolation quantile of a sorted slice, q in [0, 1].
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Monte Carlo standard error of the mean of a (possibly autocorrelated)
/// chain, by non-overlapping batch means with ~sqrt(len) batches.
pub(crate) fn batch_means_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return f64::INFINITY;
    }
    let batches = (n as f64).sqrt().floor() as usize;
    let batches = batches.clamp(2, n / 2);
    let size = n / batches;
    let used = batches * size;
    let overall = mean(&xs[..used]);
    let mut ssq = 0.0;
    for b in 0..batches {
        let bm = mean(&xs[b * size..(b + 1) * size]);
        ssq += (bm - overall).powi(2);
    }
    let var_of_means = ssq / (batches as f64 - 1.0);
    (var_of_means / batches as f64).sqrt()
}
