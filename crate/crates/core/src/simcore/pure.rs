use num_complex::Complex;

use super::gate::{cz_sign, Circuit, GateOp};
use super::MAX_QUBITS;
use crate::dist::BasisDistribution;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Statevector over `2^n` basis amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T = f64> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

pub(crate) fn check_qubit_count(n_qubits: usize, cap: usize) -> Result<()> {
    if (1..=cap).contains(&n_qubits) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "qubit count {n_qubits} outside supported range 1..={cap}"
        )))
    }
}

impl<T: Real> PureState<T> {
    /// |0...0> on `n_qubits` qubits.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits, MAX_QUBITS)?;
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1usize << n_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Ok(Self { n_qubits, amps })
    }

    /// Builds a state from raw amplitudes; the vector must have unit norm.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Contract(format!("{len} amplitudes is not 2^n")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubit_count(n_qubits, MAX_QUBITS)?;
        let state = Self { n_qubits, amps };
        let norm = state.norm_sqr();
        if (norm - T::one()).abs() > T::lit(1e-10).max(T::roundoff()) {
            return Err(Error::Contract(format!("state norm^2 is {norm}, not 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &GateOp<T>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if let GateOp::Cz(a, b) = *gate {
            for (x, amp) in self.amps.iter_mut().enumerate() {
                if cz_sign(x, a, b) {
                    *amp = -*amp;
                }
            }
            return Ok(());
        }
        let (q, u) = gate.single_qubit_matrix().expect("single-qubit gate");
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit != 0 {
                continue;
            }
            let j = i | bit;
            let (a0, a1) = (self.amps[i], self.amps[j]);
            self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
            self.amps[j] = u[1][0] * a0 + u[1][1] * a1;
        }
        Ok(())
    }

    /// Returns the state after `gate`, leaving `self` untouched.
    pub fn apply_gate(&self, gate: &GateOp<T>) -> Result<Self> {
        let mut next = self.clone();
        next.apply(gate)?;
        Ok(next)
    }

    pub fn run(&mut self, circuit: &Circuit<T>) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::Contract(format!(
                "circuit on {} qubits applied to {}-qubit state",
                circuit.n_qubits(),
                self.n_qubits
            )));
        }
        for g in circuit.gates() {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Born-rule distribution `|amp_x|^2`.
    pub fn probabilities(&self) -> BasisDistribution<T> {
        BasisDistribution::normalized_from(self.amps.iter().map(|a| a.norm_sqr()).collect())
    }
}

/// Runs `circuit` from |0...0> and returns the final statevector.
pub fn simulate_pure<T: Real>(circuit: &Circuit<T>) -> Result<PureState<T>> {
    let mut state = PureState::zero_state(circuit.n_qubits())?;
    state.run(circuit)?;
    Ok(state)
}
