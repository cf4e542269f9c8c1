//! The time-frequency lattice aℤ × bℤ and its grid-compatibility certificate.

use core::fmt;

use crate::signal::{GridError, GridSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeError {
    /// `a` or `b` not strictly positive.
    NonPositive,
    /// `a` is not a whole number of grid steps.
    ShiftIncompatible { a: f64, delta: f64 },
    /// `1/b` is not a whole number of grid steps.
    ModulationIncompatible { b: f64, delta: f64 },
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::NonPositive => write!(f, "lattice parameters must be positive"),
            LatticeError::ShiftIncompatible { a, delta } => {
                write!(f, "a = {a} is not an integer multiple of delta = {delta}")
            }
            LatticeError::ModulationIncompatible { b, delta } => {
                write!(f, "1/b for b = {b} is not an integer multiple of delta = {delta}")
            }
        }
    }
}

impl core::error::Error for LatticeError {}

/// Shift parameter `a` and modulation parameter `b`, certified compatible
/// with a grid: both `a` and `1/b` are whole numbers of grid steps, so every
/// lattice translate is exact. No constraint ties `a·b` to 1; the identity
/// machinery does not need one.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeSpec {
    a: f64,
    b: f64,
    /// `a / delta`.
    shift_steps: i64,
    /// `(1/b) / delta`.
    inv_b_steps: i64,
    /// The grid this certificate was issued for.
    grid: GridSpec,
}

impl LatticeSpec {
    pub fn new(a: f64, b: f64, grid: &GridSpec) -> Result<Self, LatticeError> {
        if !(a > 0.0) || !(b > 0.0) {
            return Err(LatticeError::NonPositive);
        }
        let shift_steps = grid
            .steps_of(a)
            .map_err(|_| LatticeError::ShiftIncompatible { a, delta: grid.delta })?;
        let inv_b_steps = grid
            .steps_of(1.0 / b)
            .map_err(|_| LatticeError::ModulationIncompatible { b, delta: grid.delta })?;
        if shift_steps <= 0 || inv_b_steps <= 0 {
            return Err(LatticeError::NonPositive);
        }
        Ok(Self {
            a,
            b,
            shift_steps,
            inv_b_steps,
            grid: *grid,
        })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn inv_b(&self) -> f64 {
        1.0 / self.b
    }

    /// Grid steps per shift `a`.
    #[inline]
    pub fn shift_steps(&self) -> i64 {
        self.shift_steps
    }

    /// Grid steps per modulation period `1/b`.
    #[inline]
    pub fn inv_b_steps(&self) -> i64 {
        self.inv_b_steps
    }
}

/// Convenience: validate a grid/lattice pair in one shot.
pub fn certify(a: f64, b: f64, grid: &GridSpec) -> Result<LatticeSpec, LatticeError> {
    LatticeSpec::new(a, b, grid)
}

impl From<GridError> for LatticeError {
    fn from(_: GridError) -> Self {
        LatticeError::NonPositive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certifies_compatible_pairs() {
        let grid = GridSpec::symmetric(1e-3, 8.0).unwrap();
        let lat = LatticeSpec::new(1.0, 0.5, &grid).unwrap();
        assert_eq!(lat.shift_steps(), 1000);
        assert_eq!(lat.inv_b_steps(), 2000);
    }

    #[test]
    fn rejects_incompatible_shift() {
        let grid = GridSpec::symmetric(1e-3, 8.0).unwrap();
        let err = LatticeSpec::new(0.0005, 1.0, &grid).unwrap_err();
        assert!(matches!(err, LatticeError::ShiftIncompatible { .. }));
    }

    #[test]
    fn rejects_incompatible_modulation() {
        let grid = GridSpec::symmetric(1e-3, 8.0).unwrap();
        let err = LatticeSpec::new(1.0, 0.3333, &grid).unwrap_err();
        assert!(matches!(err, LatticeError::ModulationIncompatible { .. }));
    }

    #[test]
    fn ab_greater_than_one_is_allowed() {
        let grid = GridSpec::symmetric(1e-2, 4.0).unwrap();
        assert!(LatticeSpec::new(2.0, 1.0, &grid).is_ok());
    }
}
