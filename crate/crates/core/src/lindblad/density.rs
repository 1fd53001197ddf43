use num_complex::Complex;

use crate::scalar::Real;

/// Dense complex density matrix in a fixed basis, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn from_vec(dim: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), dim * dim, "density matrix data has wrong length");
        Self { dim, data }
    }

    /// Diagonal (coherence-free) state with the given populations.
    pub fn from_diagonal(p: &[T]) -> Self {
        let mut rho = Self::zeros(p.len());
        for (i, &pi) in p.iter().enumerate() {
            rho.set(i, i, Complex::new(pi, T::zero()));
        }
        rho
    }

    /// `|k><k|`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut rho = Self::zeros(dim);
        rho.set(k, k, Complex::new(T::one(), T::zero()));
        rho
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.data[row * self.dim + col] = value;
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self.get(i, i))
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// Replaces the matrix by `(rho + rho^dagger) / 2`.
    pub fn hermitize(&mut self) {
        Self::hermitize_slice(self.dim, &mut self.data);
    }

    pub(crate) fn hermitize_slice(dim: usize, data: &mut [Complex<T>]) {
        let half = T::from_f64_lossy(0.5);
        for i in 0..dim {
            data[i * dim + i].im = T::zero();
            for j in i + 1..dim {
                let avg = (data[i * dim + j] + data[j * dim + i].conj()) * half;
                data[i * dim + j] = avg;
                data[j * dim + i] = avg.conj();
            }
        }
    }

    /// Largest off-diagonal modulus.
    pub fn max_coherence(&self) -> T {
        let mut max = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    max = max.max(self.get(i, j).norm());
                }
            }
        }
        max
    }
}

/// Real diagonal of `rho`; negative round-off down to `-1e-10` is set to zero.
pub fn extract_diagonals<T: Real>(rho: &DensityMatrix<T>) -> Vec<T> {
    let floor = T::from_f64_lossy(-1e-10);
    (0..rho.dim())
        .map(|i| {
            let p = rho.get(i, i).re;
            if p < T::zero() && p >= floor {
                T::zero()
            } else {
                p
            }
        })
        .collect()
}
