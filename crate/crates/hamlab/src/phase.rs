//! Phase-space points.
//!
//! A state is stored flat as `(q_1..q_n, p_1..p_n)` so the same buffer feeds
//! the integrator, the linear algebra, and the CSV/JSON exporters without
//! reshuffling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(q, p)` of a 2n-dimensional phase space, `n` degrees of freedom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseState {
    /// Flat coordinates `(q_1..q_n, p_1..p_n)`.
    pub coords: Vec<f64>,
}

impl PhaseState {
    /// Builds a state from position and momentum slices of equal length.
    pub fn new(q: &[f64], p: &[f64]) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                got: p.len(),
            });
        }
        let mut coords = Vec::with_capacity(2 * q.len());
        coords.extend_from_slice(q);
        coords.extend_from_slice(p);
        Ok(Self { coords })
    }

    /// Builds a state from flat coordinates; the length must be even.
    pub fn from_flat(coords: Vec<f64>) -> Result<Self> {
        if coords.len() % 2 != 0 || coords.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "phase state needs an even, positive number of coordinates, got {}",
                coords.len()
            )));
        }
        Ok(Self { coords })
    }

    /// The origin of a 2n-dimensional phase space.
    pub fn zeros(dof: usize) -> Self {
        Self {
            coords: vec![0.0; 2 * dof],
        }
    }

    pub fn dof(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn q(&self, i: usize) -> f64 {
        self.coords[i]
    }

    pub fn p(&self, i: usize) -> f64 {
        self.coords[self.dof() + i]
    }

    /// Euclidean norm of the full state.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean norm of a subset of coordinates, by flat index.
    pub fn component_norm(&self, indices: &[usize]) -> f64 {
        indices
            .iter()
            .map(|&i| self.coords[i] * self.coords[i])
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// `self + scale * direction`, used to place probe initial conditions.
    pub fn offset(&self, direction: &PhaseState, scale: f64) -> Self {
        let coords = self
            .coords
            .iter()
            .zip(&direction.coords)
            .map(|(a, d)| a + scale * d)
            .collect();
        Self { coords }
    }
}

/// Euclidean norm of a raw coordinate slice.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}
