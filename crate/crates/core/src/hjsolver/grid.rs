//! Seven-axis rectilinear grid, gridded fields, interpolation and costates.

use super::SolveError;
use serde::{Deserialize, Serialize};

pub const NDIM: usize = 7;
pub type Point = [f64; NDIM];
pub type Index = [usize; NDIM];

/// Axis names in storage order.
pub const AXIS_NAMES: [&str; NDIM] = ["s", "sigma", "h_tau", "v_a", "chi_a", "gamma_a", "delta_t"];

/// Snap tolerance (in cells) for queries that land on a node.
const SNAP: f64 = 1e-9;

/// One grid axis. Periodic axes exclude `max` (it coincides with `min`).
/// An axis with a single node is frozen: it carries no dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub periodic: bool,
}

impl Axis {
    pub fn new(n: usize, min: f64, max: f64, periodic: bool) -> Self {
        Self { n, min, max, periodic }
    }

    pub fn frozen(value: f64) -> Self {
        Self { n: 1, min: value, max: value, periodic: false }
    }

    pub fn is_frozen(&self) -> bool {
        self.n == 1
    }

    pub fn spacing(&self) -> f64 {
        match (self.n, self.periodic) {
            (1, _) => 0.0,
            (n, true) => (self.max - self.min) / n as f64,
            (n, false) => (self.max - self.min) / (n - 1) as f64,
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn validate(&self, name: &str) -> Result<(), SolveError> {
        let bad = |why: &str| Err(SolveError::Grid(format!("axis {name}: {why}")));
        if !(self.min.is_finite() && self.max.is_finite()) {
            return bad("bounds must be finite");
        }
        if self.n == 1 {
            return Ok(());
        }
        if self.n < 3 {
            return bad("needs at least 3 nodes (or exactly 1 to freeze it)");
        }
        if !(self.max > self.min) {
            return bad("max must exceed min");
        }
        Ok(())
    }

    /// Fractional cell position of `x`, wrapped on periodic axes.
    fn locate(&self, x: f64, axis: usize) -> Result<(usize, usize, f64), SolveError> {
        if self.is_frozen() {
            return Ok((0, 0, 0.0));
        }
        let h = self.spacing();
        let mut u = (x - self.min) / h;
        if self.periodic {
            u = u.rem_euclid(self.n as f64);
        } else if u < -SNAP || u > (self.n - 1) as f64 + SNAP {
            return Err(SolveError::OutOfBounds { axis: AXIS_NAMES[axis], value: x });
        }
        let r = u.round();
        if (u - r).abs() < SNAP {
            u = r;
        }
        if self.periodic {
            let i0 = (u.floor() as usize) % self.n;
            Ok((i0, (i0 + 1) % self.n, u - u.floor()))
        } else {
            let u = u.clamp(0.0, (self.n - 1) as f64);
            let i0 = (u.floor() as usize).min(self.n - 2);
            Ok((i0, i0 + 1, u - i0 as f64))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid7 {
    pub axes: [Axis; NDIM],
}

impl Grid7 {
    pub fn new(axes: [Axis; NDIM]) -> Result<Self, SolveError> {
        for (i, a) in axes.iter().enumerate() {
            a.validate(AXIS_NAMES[i])?;
        }
        Ok(Self { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> [usize; NDIM] {
        let mut st = [1; NDIM];
        for d in (0..NDIM - 1).rev() {
            st[d] = st[d + 1] * self.axes[d + 1].n;
        }
        st
    }

    pub fn flat(&self, idx: &Index) -> usize {
        let st = self.strides();
        (0..NDIM).map(|d| idx[d] * st[d]).sum()
    }

    pub fn multi(&self, mut flat: usize) -> Index {
        let mut idx = [0; NDIM];
        for d in (0..NDIM).rev() {
            idx[d] = flat % self.axes[d].n;
            flat /= self.axes[d].n;
        }
        idx
    }

    pub fn point(&self, idx: &Index) -> Point {
        std::array::from_fn(|d| self.axes[d].coord(idx[d]))
    }

    pub fn spacing(&self) -> [f64; NDIM] {
        std::array::from_fn(|d| self.axes[d].spacing())
    }

    /// Multilinear interpolation of `values` at `x`. Corners with zero
    /// weight are skipped, so queries on a node read the node exactly.
    pub fn interpolate(&self, values: &[f64], x: &Point) -> Result<f64, SolveError> {
        let st = self.strides();
        let mut base = 0;
        let mut active: Vec<(usize, f64)> = Vec::with_capacity(NDIM);
        for d in 0..NDIM {
            let (i0, i1, w) = self.axes[d].locate(x[d], d)?;
            base += i0 * st[d];
            if w > 0.0 {
                let step = (i1 * st[d]) as isize - (i0 * st[d]) as isize;
                active.push((step as usize, w));
            }
        }
        let mut acc = 0.0;
        for mask in 0..(1usize << active.len()) {
            let mut off = base;
            let mut wt = 1.0;
            for (k, &(step, w)) in active.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    off = off.wrapping_add(step);
                    wt *= w;
                } else {
                    wt *= 1.0 - w;
                }
            }
            acc += wt * values[off];
        }
        Ok(acc)
    }
}

/// A scalar field over a grid at time `t` (≤ 0).
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedValueFunction {
    pub grid: Grid7,
    pub values: Vec<f64>,
    pub t: f64,
}

/// Per-node controls recorded by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTable {
    pub grid: Grid7,
    pub alpha: Vec<f64>,
    pub mu: Vec<f64>,
}

/// ∂V/∂x at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Costate {
    pub q: [f64; NDIM],
    /// At least one axis fell back to a one-sided difference.
    pub one_sided: bool,
}

/// Value at `x` and whether `x` lies in the zero-sublevel set.
pub fn brs_query(v: &GriddedValueFunction, x: &Point) -> Result<(f64, bool), SolveError> {
    let val = v.grid.interpolate(&v.values, x)?;
    Ok((val, val <= 0.0))
}

/// Central differences of the interpolated field with one grid spacing.
pub fn costate_at(v: &GriddedValueFunction, x: &Point) -> Result<Costate, SolveError> {
    let mut q = [0.0; NDIM];
    let mut one_sided = false;
    let here = v.grid.interpolate(&v.values, x)?;
    for d in 0..NDIM {
        let a = &v.grid.axes[d];
        if a.is_frozen() {
            continue;
        }
        let h = a.spacing();
        let mut lo = *x;
        let mut hi = *x;
        lo[d] -= h;
        hi[d] += h;
        let (has_lo, has_hi) = if a.periodic {
            (true, true)
        } else {
            (lo[d] >= a.min - SNAP * h, hi[d] <= a.max + SNAP * h)
        };
        q[d] = match (has_lo, has_hi) {
            (true, true) => (v.grid.interpolate(&v.values, &hi)? - v.grid.interpolate(&v.values, &lo)?) / (2.0 * h),
            (false, true) => {
                one_sided = true;
                (v.grid.interpolate(&v.values, &hi)? - here) / h
            }
            (true, false) => {
                one_sided = true;
                (here - v.grid.interpolate(&v.values, &lo)?) / h
            }
            (false, false) => 0.0,
        };
    }
    Ok(Costate { q, one_sided })
}
