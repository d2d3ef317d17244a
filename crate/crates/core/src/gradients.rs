//! Cost functions and their partial derivatives.

use alloc::vec::Vec;

use crate::circuit::CircuitProgram;
use crate::error::{invalid, Error, Result};
use crate::pauli::ObservableDecomposition;
use crate::state::SimState;

/// Program, observable and initial state of a cost Tr(O Φ(ρ0)).
#[derive(Clone, Debug)]
pub struct CostSpec<S> {
    pub program: CircuitProgram,
    pub observable: ObservableDecomposition,
    pub initial: S,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum GradientMethod {
    Commutator,
    ParameterShift,
    FiniteDifference { h: f64 },
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;

impl<S: SimState> CostSpec<S> {
    pub fn new(program: CircuitProgram, observable: ObservableDecomposition, initial: S) -> Result<Self> {
        let n = program.n_qubits();
        if observable.n() != n {
            return Err(Error::Dimension { expected: n, actual: observable.n() });
        }
        if initial.n_qubits() != n {
            return Err(Error::Dimension { expected: n, actual: initial.n_qubits() });
        }
        Ok(CostSpec { program, observable, initial })
    }

    /// Tr(O Φ(ρ0)).
    pub fn cost(&self, theta: &[f64]) -> Result<f64> {
        let mut s = self.initial.clone();
        self.program.evaluate(theta, &mut s)?;
        Ok(s.expectation(&self.observable))
    }

    fn cost_shifted(&self, theta: &[f64], op: usize, delta: f64) -> f64 {
        let mut s = self.initial.clone();
        self.program.apply_range(theta, &mut s, 0..self.program.n_ops(), Some((op, delta)));
        s.expectation(&self.observable)
    }

    fn check_param(&self, theta: &[f64], mu: usize) -> Result<Vec<usize>> {
        self.program.check_theta(theta)?;
        if mu >= self.program.n_params() {
            return Err(invalid(alloc::format!("parameter {mu} out of range")));
        }
        Ok(self.program.occurrences(mu))
    }

    /// ∂C/∂θ_μ = Σ_occurrences Tr(O Φ_post(i[ρ_pre, H_μ])), with ρ_pre the state
    /// right after the gate. Gates outside the light cone contribute exactly 0.
    pub fn gradient_commutator(&self, theta: &[f64], mu: usize) -> Result<f64> {
        let occ = self.check_param(theta, mu)?;
        let cone = self.program.op_light_cone(&self.observable.support());
        let ops: Vec<_> = self.program.ops().collect();
        let live: Vec<usize> = occ
            .into_iter()
            .filter(|&i| ops[i].sites().iter().any(|s| cone[i].contains(s)))
            .collect();
        let Some(&last) = live.last() else {
            return Ok(0.0);
        };
        let n_ops = ops.len();
        let mut state = self.initial.clone();
        let mut done = 0;
        let mut total = 0.0;
        for &i in &live {
            self.program.apply_range(theta, &mut state, done..i + 1, None);
            done = i + 1;
            let (h, sites) = ops[i].local_generator().expect("parameterized op");
            for (w, mut part) in state.commutator_parts(&h, &sites) {
                self.program.apply_range(theta, &mut part, i + 1..n_ops, None);
                total += w * part.expectation(&self.observable);
            }
            if i == last {
                break;
            }
        }
        Ok(total)
    }

    /// Two-term shift rule per occurrence; needs generators with spectrum {−r, r}.
    pub fn gradient_parameter_shift(&self, theta: &[f64], mu: usize) -> Result<f64> {
        let occ = self.check_param(theta, mu)?;
        let mut total = 0.0;
        for i in occ {
            let r = self
                .program
                .shift_frequency(i)
                .ok_or_else(|| Error::Unsupported("parameter shift needs an involutory generator".into()))?;
            let s = core::f64::consts::PI / (4.0 * r);
            total += r * (self.cost_shifted(theta, i, s) - self.cost_shifted(theta, i, -s));
        }
        Ok(total)
    }

    /// Central difference in θ_μ.
    pub fn gradient_finite_difference(&self, theta: &[f64], mu: usize, h: f64) -> Result<f64> {
        self.check_param(theta, mu)?;
        if !(h > 0.0) {
            return Err(invalid("finite-difference step must be positive"));
        }
        let mut t = theta.to_vec();
        t[mu] = theta[mu] + h;
        let plus = self.cost(&t)?;
        t[mu] = theta[mu] - h;
        let minus = self.cost(&t)?;
        Ok((plus - minus) / (2.0 * h))
    }

    pub fn gradient(&self, theta: &[f64], mu: usize, method: GradientMethod) -> Result<f64> {
        match method {
            GradientMethod::Commutator => self.gradient_commutator(theta, mu),
            GradientMethod::ParameterShift => self.gradient_parameter_shift(theta, mu),
            GradientMethod::FiniteDifference { h } => self.gradient_finite_difference(theta, mu, h),
        }
    }

    /// Full gradient vector.
    pub fn gradient_vector(&self, theta: &[f64], method: GradientMethod) -> Result<Vec<f64>> {
        (0..self.program.n_params())
            .map(|mu| self.gradient(theta, mu, method))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{brickwork_ansatz, Generator, Layer, LayerKind, Op, ParamPlan, ResetPlan};
    use crate::pauli::{Pauli, PauliString};
    use crate::state::{DensityState, MixtureState};
    use alloc::sync::Arc;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rx_program() -> CircuitProgram {
        let mut p = CircuitProgram::new(1, 1, 1, 1);
        p.push(Layer::new(
            LayerKind::SingleQubit,
            alloc::vec![Op::Rotation {
                param: 0,
                generator: Arc::new(Generator::half_pauli(Pauli::X)),
                sites: alloc::vec![0],
            }],
        ))
        .unwrap();
        p
    }

    fn z(n: usize, q: usize) -> ObservableDecomposition {
        ObservableDecomposition::single(PauliString::single(n, q, Pauli::Z).unwrap())
    }

    #[test]
    fn bloch_rotation_cost_and_gradients() {
        let spec = CostSpec::new(rx_program(), z(1, 0), DensityState::zero(1)).unwrap();
        for t in [0.0, 0.3, 1.7, -2.2] {
            assert!((spec.cost(&[t]).unwrap() - libm::cos(t)).abs() < 1e-14);
            for m in [GradientMethod::Commutator, GradientMethod::ParameterShift] {
                assert!((spec.gradient(&[t], 0, m).unwrap() + libm::sin(t)).abs() < 1e-13);
            }
        }
        let id = ObservableDecomposition::single(PauliString::identity(1));
        let spec = CostSpec::new(rx_program(), id, DensityState::zero(1)).unwrap();
        assert!((spec.cost(&[0.8]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(spec.gradient_commutator(&[0.8], 0).unwrap(), 0.0);
        assert!(spec.gradient_commutator(&[0.8], 1).is_err());
    }

    #[test]
    fn shift_rule_rejects_non_involutory_generator() {
        let mut p = CircuitProgram::new(2, 1, 1, 1);
        p.push(Layer::new(
            LayerKind::TwoQubit,
            alloc::vec![Op::Rotation {
                param: 0,
                generator: Arc::new(Generator::controlled_half_pauli(Pauli::X)),
                sites: alloc::vec![0, 1],
            }],
        ))
        .unwrap();
        let spec = CostSpec::new(p, z(2, 1), DensityState::basis(2, 2)).unwrap();
        assert!(matches!(spec.gradient_parameter_shift(&[0.4], 0), Err(Error::Unsupported(_))));
        let a = spec.gradient_commutator(&[0.4], 0).unwrap();
        let b = spec.gradient_finite_difference(&[0.4], 0, 1e-5).unwrap();
        assert!((a - b).abs() < 1e-9);
        assert!((a + libm::sin(0.4)).abs() < 1e-12);
    }

    #[test]
    fn brick_shift_rule_matches_finite_difference() {
        let an = brickwork_ansatz(2, 1, None, ParamPlan::Independent, 0).unwrap();
        let spec = CostSpec::new(an.program, z(2, 1), DensityState::zero(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let t: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 6.0).collect();
            for mu in 0..4 {
                let ps = spec.gradient_parameter_shift(&t, mu).unwrap();
                let fd = spec.gradient_finite_difference(&t, mu, 1e-5).unwrap();
                assert!((ps - fd).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn methods_agree_on_reset_brickwork() {
        let plan = ResetPlan::strided(4, 2, 2, 1.0).unwrap();
        for corr in [ParamPlan::Independent, ParamPlan::Correlated { period: 2 }] {
            let an = brickwork_ansatz(4, 6, Some(&plan), corr, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let t: Vec<f64> = (0..an.program.n_params()).map(|_| rng.random::<f64>() * 6.0).collect();
            let dense = CostSpec::new(an.program.clone(), z(4, 1), DensityState::zero(4)).unwrap();
            let mix = CostSpec::new(an.program.clone(), z(4, 1), MixtureState::zero(4)).unwrap();
            for mu in [an.grad_param, 0, 5, 13] {
                let c1 = dense.gradient_commutator(&t, mu).unwrap();
                let c2 = mix.gradient_commutator(&t, mu).unwrap();
                let ps = dense.gradient_parameter_shift(&t, mu).unwrap();
                let fd = dense.gradient_finite_difference(&t, mu, 1e-5).unwrap();
                assert!((c1 - c2).abs() < 1e-12);
                assert!((c1 - ps).abs() < 1e-11);
                assert!((c1 - fd).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn gates_outside_light_cone_have_exact_zero_gradient() {
        let an = brickwork_ansatz(8, 2, None, ParamPlan::Independent, 1).unwrap();
        let spec = CostSpec::new(an.program, z(8, 1), MixtureState::zero(8)).unwrap();
        let t = alloc::vec![0.9; spec.program.n_params()];
        // layer 1 brick on (6, 7) is outside the two-layer cone of Z_1
        let far = (3 * 4) + 2;
        assert_eq!(spec.gradient_commutator(&t, far).unwrap(), 0.0);
        assert_ne!(spec.gradient_commutator(&t, an.grad_param).unwrap(), 0.0);
    }
}
