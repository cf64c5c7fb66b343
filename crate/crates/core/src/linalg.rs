//! Small dense symmetric linear algebra for the local design matrices
//! (dimension at most a few dozen).

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { n, data: rows.concat() }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Eigenvalues (ascending) and column eigenvectors of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// `vectors.get(i, k)` is component `i` of eigenvector `k`.
    pub vectors: SymMatrix,
}

impl Eigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Cyclic Jacobi eigen-decomposition. Sweeps until the off-diagonal
/// Frobenius norm is below `tol` times the Frobenius norm of the input.
pub fn jacobi_eigen(a: &SymMatrix, tol: f64) -> Eigen {
    let n = a.size();
    let mut m = a.clone();
    let mut v = SymMatrix::zeros(n);
    (0..n).for_each(|i| v.set(i, i, 1.0));
    let total: f64 = m.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = |m: &SymMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m.get(i, j) * m.get(i, j);
                }
            }
        }
        s.sqrt()
    };
    for _sweep in 0..100 {
        if total == 0.0 || off(&m) <= tol * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m.get(p, p), m.get(q, q));
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m.get(k, p), m.get(k, q));
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let (mpk, mqk) = (m.get(p, k), m.get(q, k));
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = SymMatrix::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, k, v.get(i, src));
        }
    }
    Eigen { values, vectors }
}

/// Solves `A x = b` by Cholesky. Returns `None` when a pivot is not
/// positive relative to `rel_tol * max|A|`.
pub fn cholesky_solve(a: &SymMatrix, b: &[f64], rel_tol: f64) -> Option<Vec<f64>> {
    let n = a.size();
    let floor = rel_tol * a.max_abs();
    let mut l = SymMatrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > floor) {
            return None;
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / djj);
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l.get(i, k) * y[k]).sum();
        y[i] = (b[i] - s) / l.get(i, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l.get(k, i) * x[k]).sum();
        x[i] = (y[i] - s) / l.get(i, i);
    }
    Some(x)
}

/// Solves with an existing eigen-decomposition: `x = V diag(1/lambda) V^T b`.
pub fn eigen_solve(eig: &Eigen, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for k in 0..n {
        let coef: f64 = (0..n).map(|i| eig.vectors.get(i, k) * b[i]).sum::<f64>() / eig.values[k];
        for i in 0..n {
            x[i] += coef * eig.vectors.get(i, k);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_spd(seed: &[f64], n: usize) -> SymMatrix {
        // A = B B^T + 0.1 I
        let mut a = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| seed[i * n + k] * seed[j * n + k]).sum();
                a.set(i, j, s + if i == j { 0.1 } else { 0.0 });
            }
        }
        a
    }

    proptest! {
        #[test]
        fn jacobi_agrees_with_nalgebra(vals in proptest::collection::vec(-2.0f64..2.0, 36), n in 1usize..=6) {
            let mut a = SymMatrix::zeros(n);
            for i in 0..n {
                for j in 0..=i {
                    let v = vals[i * 6 + j];
                    a.set(i, j, v);
                    a.set(j, i, v);
                }
            }
            let eig = jacobi_eigen(&a, 1e-14);
            let na = nalgebra::DMatrix::from_row_slice(n, n, a.as_slice());
            let mut want: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
            want.sort_by(f64::total_cmp);
            for (g, w) in eig.values.iter().zip(&want) {
                prop_assert!((g - w).abs() < 1e-10 * (1.0 + w.abs()));
            }
            // A v_k = lambda_k v_k
            for k in 0..n {
                let vk: Vec<f64> = (0..n).map(|i| eig.vectors.get(i, k)).collect();
                let av = a.mul_vec(&vk);
                for i in 0..n {
                    prop_assert!((av[i] - eig.values[k] * vk[i]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn cholesky_and_eigen_solves_agree(vals in proptest::collection::vec(-1.0f64..1.0, 25), b in proptest::collection::vec(-5.0f64..5.0, 5)) {
            let a = random_spd(&vals, 5);
            let x1 = cholesky_solve(&a, &b, 1e-14).unwrap();
            let x2 = eigen_solve(&jacobi_eigen(&a, 1e-15), &b);
            let r = a.mul_vec(&x1);
            for i in 0..5 {
                prop_assert!((r[i] - b[i]).abs() < 1e-8);
                prop_assert!((x1[i] - x2[i]).abs() < 1e-7 * (1.0 + x1[i].abs()));
            }
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(cholesky_solve(&a, &[1.0, 1.0], 1e-12).is_none());
        assert!(cholesky_solve(&SymMatrix::zeros(2), &[0.0, 0.0], 1e-12).is_none());
        let e = jacobi_eigen(&a, 1e-14);
        assert!(e.min().abs() < 1e-14 && (e.max() - 2.0).abs() < 1e-14);
    }
}
