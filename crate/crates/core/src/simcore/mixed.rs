use num_complex::Complex;

use super::gate::{cz_sign, Circuit, GateOp};
use super::pure::{check_qubit_count, PureState};
use super::MAX_MIXED_QUBITS;
use crate::dist::BasisDistribution;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;

/// Density matrix, stored dense and row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState<T = f64> {
    n_qubits: usize,
    dim: usize,
    rho: Vec<Complex<T>>,
}

impl<T: Real> MixedState<T> {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits, MAX_MIXED_QUBITS)?;
        let dim = 1usize << n_qubits;
        let mut rho = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        rho[0] = Complex::new(T::one(), T::zero());
        Ok(Self { n_qubits, dim, rho })
    }

    /// |psi><psi|
    pub fn from_pure(state: &PureState<T>) -> Result<Self> {
        check_qubit_count(state.n_qubits(), MAX_MIXED_QUBITS)?;
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut rho = Vec::with_capacity(dim * dim);
        for a in amps {
            rho.extend(amps.iter().map(|b| *a * b.conj()));
        }
        Ok(Self {
            n_qubits: state.n_qubits(),
            dim,
            rho,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex<T> {
        self.rho[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.entry(i, j) - self.entry(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Smallest eigenvalue, via the real symmetric embedding of rho.
    pub fn min_eigenvalue(&self) -> T {
        let n = self.dim;
        let m = 2 * n;
        let mut a = vec![T::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self.entry(i, j);
                a[i * m + j] = z.re;
                a[(i + n) * m + (j + n)] = z.re;
                a[i * m + (j + n)] = -z.im;
                a[(i + n) * m + j] = z.im;
            }
        }
        linalg::symmetric_eigenvalues(&mut a, m)
            .into_iter()
            .fold(T::infinity(), T::min)
    }

    pub fn apply(&mut self, gate: &GateOp<T>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let dim = self.dim;
        if let GateOp::Cz(a, b) = *gate {
            for i in 0..dim {
                let si = cz_sign(i, a, b);
                for j in 0..dim {
                    if si != cz_sign(j, a, b) {
                        let e = &mut self.rho[i * dim + j];
                        *e = -*e;
                    }
                }
            }
            return Ok(());
        }
        let (q, u) = gate.single_qubit_matrix().expect("single-qubit gate");
        let bit = 1usize << q;
        // rho <- U rho
        for col in 0..dim {
            for i in (0..dim).filter(|i| i & bit == 0) {
                let j = i | bit;
                let (r0, r1) = (self.rho[i * dim + col], self.rho[j * dim + col]);
                self.rho[i * dim + col] = u[0][0] * r0 + u[0][1] * r1;
                self.rho[j * dim + col] = u[1][0] * r0 + u[1][1] * r1;
            }
        }
        // rho <- rho U^dagger
        for row in self.rho.chunks_exact_mut(dim) {
            for i in (0..dim).filter(|i| i & bit == 0) {
                let j = i | bit;
                let (c0, c1) = (row[i], row[j]);
                row[i] = c0 * u[0][0].conj() + c1 * u[0][1].conj();
                row[j] = c0 * u[1][0].conj() + c1 * u[1][1].conj();
            }
        }
        Ok(())
    }

    pub fn apply_gate(&self, gate: &GateOp<T>) -> Result<Self> {
        let mut next = self.clone();
        next.apply(gate)?;
        Ok(next)
    }

    /// Two-qubit depolarizing channel: with probability `lambda` the pair
    /// `(a, b)` is replaced by I/4, leaving the reduced state on the rest.
    pub fn depolarize(&mut self, a: usize, b: usize, lambda: T) -> Result<()> {
        if !(lambda >= T::zero() && lambda <= T::one()) {
            return Err(Error::Config(format!(
                "depolarizing rate {lambda} outside [0, 1]"
            )));
        }
        GateOp::<T>::Cz(a, b).validate(self.n_qubits)?;
        if lambda == T::zero() {
            return Ok(());
        }
        let dim = self.dim;
        let mask = (1usize << a) | (1usize << b);
        let offsets = [0, 1usize << a, 1usize << b, mask];
        let keep = T::one() - lambda;
        let mix = lambda / T::lit(4.0);

        let mut next: Vec<Complex<T>> = self.rho.iter().map(|z| *z * keep).collect();
        for i0 in (0..dim).filter(|i| i & mask == 0) {
            for j0 in (0..dim).filter(|j| j & mask == 0) {
                let partial: Complex<T> = offsets
                    .iter()
                    .map(|o| self.rho[(i0 | o) * dim + (j0 | o)])
                    .sum();
                for o in offsets {
                    next[(i0 | o) * dim + (j0 | o)] = next[(i0 | o) * dim + (j0 | o)] + partial * mix;
                }
            }
        }
        self.rho = next;
        Ok(())
    }

    /// Runs a circuit, depolarizing each CZ pair at rate `cz_lambda` right after the gate.
    pub fn run(&mut self, circuit: &Circuit<T>, cz_lambda: Option<T>) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::Contract(format!(
                "circuit on {} qubits applied to {}-qubit state",
                circuit.n_qubits(),
                self.n_qubits
            )));
        }
        for g in circuit.gates() {
            self.apply(g)?;
            if let (GateOp::Cz(a, b), Some(lambda)) = (g, cz_lambda) {
                self.depolarize(*a, *b, lambda)?;
            }
        }
        Ok(())
    }

    /// Diagonal of rho, with round-off negatives clamped.
    pub fn probabilities(&self) -> BasisDistribution<T> {
        BasisDistribution::normalized_from((0..self.dim).map(|i| self.entry(i, i).re).collect())
    }
}

/// Functional form of [`MixedState::depolarize`].
pub fn apply_depolarizing<T: Real>(
    state: &MixedState<T>,
    pair: (usize, usize),
    lambda: T,
) -> Result<MixedState<T>> {
    let mut next = state.clone();
    next.depolarize(pair.0, pair.1, lambda)?;
    Ok(next)
}

/// Runs `circuit` from |0...0> on the density-matrix backend.
pub fn simulate_mixed<T: Real>(circuit: &Circuit<T>, cz_lambda: Option<T>) -> Result<MixedState<T>> {
    let mut state = MixedState::zero_state(circuit.n_qubits())?;
    state.run(circuit, cz_lambda)?;
    Ok(state)
}
