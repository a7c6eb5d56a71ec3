use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense 2^n × 2^n density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_data(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(DensityMatrix { dim, data })
    }

    /// |00…0⟩⟨00…0| on `n` atoms.
    pub fn ground(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        DensityMatrix { dim, data }
    }

    /// |ψ⟩⟨ψ|.
    pub fn pure(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in psi {
            for b in psi {
                data.push(a * b.conj());
            }
        }
        DensityMatrix { dim, data }
    }

    /// I / 2^n.
    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for a in 0..dim {
            data[a * dim + a] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|a| self.data[a * self.dim + a]).sum()
    }

    /// max |ρ − ρ†| over entries.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in a..d {
                worst = worst.max((self.data[a * d + b] - self.data[b * d + a].conj()).norm());
            }
        }
        worst
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.to_matrix();
        let hermitian = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        hermitian
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Population of each computational basis state.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim).map(|a| self.data[a * self.dim + a].re).collect()
    }
}
