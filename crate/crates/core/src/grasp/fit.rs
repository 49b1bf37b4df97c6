use crate::error::{Error, Result};
use crate::scalar::Real;

/// Least-squares line `theta = slope * z + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineFit<T> {
    /// deg / mm
    pub slope: T,
    /// deg
    pub intercept: T,
    /// deg
    pub residual_rms: T,
    pub n_points: usize,
}

impl<T: Real> AffineFit<T> {
    pub fn predict(&self, z: T) -> T {
        self.slope * z + self.intercept
    }
}

/// Ordinary least squares of `theta` on `z` over `(z, theta)` pairs.
pub fn fit_affine<T: Real>(points: &[(T, T)]) -> Result<AffineFit<T>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateFit);
    }
    let nn = T::from_usize_lossy(n);
    let (sz, st) = points.iter().fold((T::zero(), T::zero()), |(a, b), (z, t)| (a + *z, b + *t));
    let (mz, mt) = (sz / nn, st / nn);
    // centred sums keep the normal equations well conditioned for z ~ 100 mm
    let (szz, szt) = points.iter().fold((T::zero(), T::zero()), |(a, b), (z, t)| {
        let dz = *z - mz;
        (a + dz * dz, b + dz * (*t - mt))
    });
    if !(szz > T::zero()) {
        return Err(Error::DegenerateFit);
    }
    let slope = szt / szz;
    let intercept = mt - slope * mz;
    let ss = points.iter().fold(T::zero(), |a, (z, t)| {
        let r = *t - (slope * *z + intercept);
        a + r * r
    });
    Ok(AffineFit { slope, intercept, residual_rms: (ss / nn).sqrt(), n_points: n })
}
