use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One gate from the simulator's gate set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateOp<T = f64> {
    H(usize),
    X(usize),
    /// Rotation about Y by the given angle in radians.
    Ry(usize, T),
    /// Controlled-Z on an unordered pair of distinct qubits.
    Cz(usize, usize),
}

pub(crate) type Mat2<T> = [[Complex<T>; 2]; 2];

impl<T: Real> GateOp<T> {
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(Error::Contract(format!(
                    "qubit index {q} out of range for {n_qubits} qubits"
                )))
            }
        };
        match *self {
            GateOp::H(q) | GateOp::X(q) => check(q),
            GateOp::Ry(q, theta) => {
                check(q)?;
                if theta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Contract(format!("non-finite RY angle {theta}")))
                }
            }
            GateOp::Cz(a, b) => {
                check(a)?;
                check(b)?;
                if a == b {
                    return Err(Error::Contract(format!("CZ on repeated qubit {a}")));
                }
                Ok(())
            }
        }
    }

    /// Inverse gate. H, X and CZ are self-inverse.
    pub fn adjoint(&self) -> Self {
        match *self {
            GateOp::Ry(q, theta) => GateOp::Ry(q, -theta),
            g => g,
        }
    }

    /// 2x2 unitary of a single-qubit gate, `None` for CZ.
    pub(crate) fn single_qubit_matrix(&self) -> Option<(usize, Mat2<T>)> {
        let re = |v: T| Complex::new(v, T::zero());
        match *self {
            GateOp::H(q) => {
                let s = re(T::FRAC_1_SQRT_2());
                Some((q, [[s, s], [s, -s]]))
            }
            GateOp::X(q) => Some((q, [[re(T::zero()), re(T::one())], [re(T::one()), re(T::zero())]])),
            GateOp::Ry(q, theta) => {
                let half = theta / T::lit(2.0);
                let (s, c) = half.sin_cos();
                Some((q, [[re(c), re(-s)], [re(s), re(c)]]))
            }
            GateOp::Cz(..) => None,
        }
    }
}

/// Sign CZ(a, b) applies to basis state `x`.
#[inline]
pub(crate) fn cz_sign(x: usize, a: usize, b: usize) -> bool {
    (x >> a) & 1 == 1 && (x >> b) & 1 == 1
}

/// Ordered gate list on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<T = f64> {
    n_qubits: usize,
    gates: Vec<GateOp<T>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn with_gates(n_qubits: usize, gates: Vec<GateOp<T>>) -> Result<Self> {
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn push(&mut self, gate: GateOp<T>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateOp<T>] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Circuit that prepares basis state `x` from |0...0> with X gates.
    pub fn basis_preparation(n_qubits: usize, x: usize) -> Self {
        let gates = (0..n_qubits)
            .filter(|q| (x >> q) & 1 == 1)
            .map(GateOp::X)
            .collect();
        Self { n_qubits, gates }
    }

    /// Gate sequence undoing this circuit.
    pub fn inverse(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(GateOp::adjoint).collect(),
        }
    }
}
