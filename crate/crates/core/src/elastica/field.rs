//! Minimal energy and its gradient over a lattice of contact #2 positions.

use rayon::prelude::*;

use super::contact::FrictionBound;
use super::{inflection_count, solve_min_energy_shape, RodShape, RodSpec, SolveError, SolverConfig};
use crate::error::{Error, Result};
use crate::scalar::{Real, Vec2};

/// Regular lattice of endpoint positions, inclusive of both extents (mm).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub x_min: T,
    pub x_max: T,
    pub nx: usize,
    pub z_min: T,
    pub z_max: T,
    pub nz: usize,
}

impl<T: Real> GridSpec<T> {
    /// Upper half-disk of radius `length`, `nx` by `nz` points.
    pub fn half_disk(length: T, nx: usize, nz: usize) -> Self {
        Self { x_min: -length, x_max: length, nx, z_min: T::zero(), z_max: length, nz }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.nz == 0 {
            return Err(Error::InvalidSpec("grid needs at least one point per axis".into()));
        }
        if self.z_min < T::zero() {
            return Err(Error::InvalidSpec("grid must lie in the closed upper half-plane".into()));
        }
        if !(self.x_max >= self.x_min) || !(self.z_max >= self.z_min) {
            return Err(Error::InvalidSpec("grid extents are inverted".into()));
        }
        if (self.nx == 1 && self.x_max != self.x_min) || (self.nz == 1 && self.z_max != self.z_min) {
            return Err(Error::InvalidSpec("single-point axis needs equal extents".into()));
        }
        Ok(())
    }

    fn axis(min: T, max: T, n: usize, i: usize) -> T {
        if n == 1 {
            min
        } else {
            min + (max - min) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)
        }
    }

    pub fn x(&self, i: usize) -> T {
        Self::axis(self.x_min, self.x_max, self.nx, i)
    }

    pub fn z(&self, j: usize) -> T {
        Self::axis(self.z_min, self.z_max, self.nz, j)
    }

    pub fn dx(&self) -> T {
        if self.nx > 1 {
            (self.x_max - self.x_min) / T::from_usize_lossy(self.nx - 1)
        } else {
            T::zero()
        }
    }

    pub fn dz(&self) -> T {
        if self.nz > 1 {
            (self.z_max - self.z_min) / T::from_usize_lossy(self.nz - 1)
        } else {
            T::zero()
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index, `z` rows of `x` columns.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn point(&self, idx: usize) -> Vec2<T> {
        Vec2::new(self.x(idx % self.nx), self.z(idx / self.nx))
    }
}

/// One lattice point of an [`EnergyField`]. Masked cells carry no values.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldCell<T> {
    pub point: Vec2<T>,
    pub reachable: bool,
    pub converged: bool,
    pub energy: Option<T>,
    /// dU*/d(p_x, p_z), i.e. the contact force.
    pub gradient: Option<Vec2<T>>,
    pub mu_min: Option<FrictionBound<T>>,
    pub shape: Option<RodShape<T>>,
}

impl<T: Real> FieldCell<T> {
    fn masked(point: Vec2<T>) -> Self {
        Self { point, reachable: false, converged: false, energy: None, gradient: None, mu_min: None, shape: None }
    }

    pub fn inflections(&self) -> Option<usize> {
        self.shape.as_ref().map(inflection_count)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyField<T> {
    pub grid: GridSpec<T>,
    pub rod: RodSpec<T>,
    pub cells: Vec<FieldCell<T>>,
}

impl<T: Real> EnergyField<T> {
    pub fn cell(&self, i: usize, j: usize) -> &FieldCell<T> {
        &self.cells[self.grid.index(i, j)]
    }

    /// Reachable cells whose solve failed.
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.reachable && !c.converged).count()
    }

    pub fn reachable(&self) -> usize {
        self.cells.iter().filter(|c| c.reachable).count()
    }
}

/// Solves every reachable lattice point from the flat state. Cells are
/// independent, so the result does not depend on evaluation order.
pub fn compute_energy_field<T: Real>(
    rod: &RodSpec<T>,
    grid: &GridSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<EnergyField<T>> {
    rod.validate()?;
    grid.validate()?;
    cfg.validate()?;
    let cells = (0..grid.len()).into_par_iter().map(|idx| solve_cell(rod, grid.point(idx), cfg)).collect();
    Ok(EnergyField { grid: *grid, rod: *rod, cells })
}

fn solve_cell<T: Real>(rod: &RodSpec<T>, p: Vec2<T>, cfg: &SolverConfig<T>) -> FieldCell<T> {
    if !rod.reaches(p, cfg.tol_c) {
        return FieldCell::masked(p);
    }
    match solve_min_energy_shape(rod, p, cfg) {
        Ok(sol) => FieldCell {
            point: p,
            reachable: true,
            converged: true,
            energy: Some(sol.energy),
            gradient: Some(sol.contact_force),
            mu_min: Some(sol.mu_min),
            shape: Some(sol.shape),
        },
        Err(SolveError::NoConvergence(_)) | Err(_) => FieldCell { reachable: true, ..FieldCell::masked(p) },
    }
}

/// Energy gradient per cell from the stored multipliers; `None` where masked or failed.
pub fn energy_gradient_field<T: Real>(field: &EnergyField<T>) -> Vec<Option<Vec2<T>>> {
    field.cells.iter().map(|c| if c.converged { c.gradient } else { None }).collect()
}

/// Second-order central differences of the stored energies, defined on cells
/// whose four neighbours all converged.
pub fn finite_difference_gradient<T: Real>(field: &EnergyField<T>) -> Vec<Option<Vec2<T>>> {
    let g = &field.grid;
    let two = T::lit(2.0);
    (0..g.len())
        .map(|idx| {
            let (i, j) = (idx % g.nx, idx / g.nx);
            if i == 0 || j == 0 || i + 1 >= g.nx || j + 1 >= g.nz || !field.cells[idx].converged {
                return None;
            }
            let e = |ii: usize, jj: usize| field.cell(ii, jj).energy;
            let (xp, xm, zp, zm) = (e(i + 1, j)?, e(i - 1, j)?, e(i, j + 1)?, e(i, j - 1)?);
            Some(Vec2::new((xp - xm) / (two * g.dx()), (zp - zm) / (two * g.dz())))
        })
        .collect()
}
