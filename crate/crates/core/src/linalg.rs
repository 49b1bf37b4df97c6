//! Small dense and tridiagonal solvers used by the Newton iterations.

use crate::scalar::Real;

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Clone, Debug)]
pub(crate) struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

/// `L D L^T` factorisation of a [`SymTridiagonal`] without pivoting.
pub(crate) struct TridiagonalFactor<T> {
    pivots: Vec<T>,
    lower: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// Fails when a pivot collapses below `rel_floor` times the largest entry.
    pub fn factor(&self, rel_floor: T) -> Option<TridiagonalFactor<T>> {
        let n = self.len();
        let scale = self.diag.iter().chain(self.off.iter()).fold(T::zero(), |m, v| m.max(v.abs()));
        let floor = rel_floor * scale.max(T::min_positive_value());
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n.saturating_sub(1));
        let mut d = self.diag[0];
        if !d.is_finite() || d.abs() <= floor {
            return None;
        }
        pivots.push(d);
        for i in 1..n {
            let l = self.off[i - 1] / d;
            d = self.diag[i] - l * self.off[i - 1];
            if !d.is_finite() || d.abs() <= floor {
                return None;
            }
            lower.push(l);
            pivots.push(d);
        }
        Some(TridiagonalFactor { pivots, lower })
    }
}

impl<T: Real> TridiagonalFactor<T> {
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.pivots.len();
        for i in 1..n {
            b[i] = b[i] - self.lower[i - 1] * b[i - 1];
        }
        for (bi, p) in b.iter_mut().zip(&self.pivots) {
            *bi = *bi / *p;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            b[i] = b[i] - self.lower[i] * b[i + 1];
        }
    }

    /// Number of negative eigenvalues (Sylvester inertia of the LDL^T factor).
    pub fn negative_count(&self) -> usize {
        self.pivots.iter().filter(|p| **p < T::zero()).count()
    }
}

/// Row-major dense square matrix.
#[derive(Clone, Debug)]
pub(crate) struct Dense<T> {
    pub n: usize,
    pub a: Vec<T>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![T::zero(); n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.a[i * self.n + j] = v;
    }

    /// Gaussian elimination with partial pivoting; consumes the matrix.
    pub fn lu_solve(mut self, b: &mut [T]) -> Option<()> {
        let n = self.n;
        let scale = self.a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() || !scale.is_finite() {
            return None;
        }
        let floor = scale * T::epsilon() * T::from_usize_lossy(n);
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, self.at(i, k).abs()))
                    .fold((k, T::zero()), |acc, c| if c.1 > acc.1 { c } else { acc });
            if pmax <= floor {
                return None;
            }
            if p != k {
                for j in 0..n {
                    self.a.swap(k * n + j, p * n + j);
                }
                b.swap(k, p);
            }
            let piv = self.at(k, k);
            for i in k + 1..n {
                let f = self.at(i, k) / piv;
                if f == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let v = self.at(i, j) - f * self.at(k, j);
                    self.set(i, j, v);
                }
                b[i] = b[i] - f * b[k];
            }
        }
        for k in (0..n).rev() {
            let s = (k + 1..n).fold(b[k], |s, j| s - self.at(k, j) * b[j]);
            b[k] = s / self.at(k, k);
        }
        Some(())
    }
}
