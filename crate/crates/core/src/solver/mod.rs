//! Feynman-Kac / stochastic-heat evolution on the torus: forward endpoint
//! densities, backward conditional weights, and Gibbs path marginals.

pub mod backward;
pub mod field;
pub mod forward;
pub mod model;
pub mod propagator;

pub use backward::{gibbs_marginal, pairing_bracket, run_backward, BackwardTrajectory, KeepPolicy};
pub use field::{BackwardState, FieldState, InitialData, Terminal};
pub use forward::{forward_step, run_forward, NullObserver, StepObserver};
pub use model::{PolymerModel, TiltFault};
pub use propagator::{build_propagator, heat_kernel_direct, HeatPropagator};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::noise::NoiseSlice;
    use crate::environment::Mollifier;
    use crate::environment::{
        mollify_slice, sample_noise_slice, DomainSpec, MollifierShape, NoiseStream,
    };

    fn model(beta: f64, n_steps: usize) -> PolymerModel {
        let domain = DomainSpec::new(1, 64, 0.5, 0.02, n_steps, beta).unwrap();
        PolymerModel::new(domain, MollifierShape::Triangular, 1, 1.0).unwrap()
    }

    #[test]
    fn beta_zero_step_has_zero_increment() {
        let m = model(0.0, 10);
        let state = FieldState::initial(InitialData::DeltaAtOrigin, &m.domain);
        let eta = sample_noise_slice(NoiseStream::new(1, 0), 0, &m.domain).unwrap();
        let xi = mollify_slice(&eta, &m.kernel, &m.domain).unwrap();
        let next = forward_step(&state, &xi, &m.propagator, m.r0(), &m.domain).unwrap();
        assert_eq!(next.log_mass, 0.0);
        assert_eq!(next.step, 1);
        // density equals the propagated density
        let oracle = heat_kernel_direct(&m.domain, m.domain.dt, 0);
        for (a, b) in next.density.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_slice_increment_is_exact() {
        let m = model(1.3, 10);
        let mut state = FieldState::initial(InitialData::DeltaAtOrigin, &m.domain);
        state.step = 2;
        let c = 0.7;
        let xi = crate::environment::XiSlice {
            values: vec![c; m.domain.sites()],
            step: 2,
        };
        let next = forward_step(&state, &xi, &m.propagator, m.r0(), &m.domain).unwrap();
        let beta = m.domain.beta;
        let expect = beta * c * m.domain.dt - 0.5 * beta * beta * m.r0() * m.domain.dt;
        assert!((next.log_mass - expect).abs() < 1e-13);
    }

    #[test]
    fn single_site_increment_matches_slice() {
        let domain = DomainSpec::new(1, 1, 1.0, 0.05, 4, 0.9).unwrap();
        let kernel = Mollifier::single_site(1.4, &domain).unwrap();
        let m = PolymerModel::with_kernel(domain, kernel).unwrap();
        assert!((m.r0() - 1.4 * 1.4).abs() < 1e-15);
        let stream = NoiseStream::new(77, 3);
        let final_state =
            run_forward(&m, stream, InitialData::DeltaAtOrigin, &mut NullObserver).unwrap();
        // reconstruct the expected log mass from the regenerated slices
        let mut expect = 0.0;
        for step in 0..m.domain.n_steps {
            let eta = sample_noise_slice(stream, step, &m.domain).unwrap();
            let xi = mollify_slice(&eta, &m.kernel, &m.domain).unwrap();
            expect += m.domain.beta * xi.values[0] * m.domain.dt
                - 0.5 * m.domain.beta * m.domain.beta * m.r0() * m.domain.dt;
        }
        assert!((final_state.log_mass - expect).abs() < 1e-12);
    }

    #[test]
    fn step_mismatch_is_usage_error() {
        let m = model(1.0, 10);
        let state = FieldState::initial(InitialData::DeltaAtOrigin, &m.domain);
        let xi = crate::environment::XiSlice {
            values: vec![0.0; m.domain.sites()],
            step: 3,
        };
        assert!(forward_step(&state, &xi, &m.propagator, m.r0(), &m.domain).is_err());
    }

    #[test]
    fn nan_slice_reports_numerical_failure_with_step() {
        let m = model(1.0, 10);
        let mut state = FieldState::initial(InitialData::DeltaAtOrigin, &m.domain);
        state.step = 5;
        let xi = crate::environment::XiSlice {
            values: vec![f64::NAN; m.domain.sites()],
            step: 5,
        };
        let err = forward_step(&state, &xi, &m.propagator, m.r0(), &m.domain).unwrap_err();
        match err {
            crate::error::Error::Numerical { step, .. } => assert_eq!(step, 5),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn beta_zero_forward_matches_heat_kernel() {
        let m = model(0.0, 25);
        let state = run_forward(
            &m,
            NoiseStream::new(5, 0),
            InitialData::DeltaAtOrigin,
            &mut NullObserver,
        )
        .unwrap();
        assert_eq!(state.log_mass, 0.0);
        let oracle = heat_kernel_direct(&m.domain, m.domain.horizon(), 0);
        for (a, b) in state.density.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn densities_stay_normalized() {
        let m = model(1.0, 50);
        struct NormCheck {
            domain: DomainSpec,
        }
        impl StepObserver for NormCheck {
            fn on_step_end(&mut self, state: &FieldState) {
                let mass = state.mass(&self.domain);
                assert!(
                    (mass - 1.0).abs() < 1e-12,
                    "step {} mass {}",
                    state.step,
                    mass
                );
            }
        }
        let mut obs = NormCheck { domain: m.domain };
        run_forward(
            &m,
            NoiseStream::new(11, 2),
            InitialData::DeltaAtOrigin,
            &mut obs,
        )
        .unwrap();
    }

    #[test]
    fn beta_zero_backward_weights_stay_constant() {
        let m = model(0.0, 20);
        let traj = run_backward(
            &m,
            NoiseStream::new(3, 0),
            Terminal::ConstantOne,
            0,
            KeepPolicy::All,
        )
        .unwrap();
        assert_eq!(traj.kept.len(), 21);
        let inv = 1.0 / m.domain.side_length();
        for state in &traj.kept {
            assert_eq!(state.log_mass, 0.0);
            for w in &state.weights {
                assert!((w - inv).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn beta_zero_backward_delta_matches_heat_kernel() {
        let m = model(0.0, 20);
        let site = 17;
        let traj = run_backward(
            &m,
            NoiseStream::new(3, 0),
            Terminal::DeltaAt(site),
            0,
            KeepPolicy::AtSteps(vec![5, 20]),
        )
        .unwrap();
        let at5 = traj.at_step(5).unwrap();
        let oracle = heat_kernel_direct(&m.domain, 15.0 * m.domain.dt, site);
        for (a, b) in at5.weights.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(traj.at_step(7).is_none());
    }

    #[test]
    fn pairing_bracket_is_step_invariant() {
        let m = model(1.0, 40);
        let stream = NoiseStream::new(21, 4);
        let bwd = run_backward(&m, stream, Terminal::ConstantOne, 0, KeepPolicy::All).unwrap();

        struct Pairing<'a> {
            model: &'a PolymerModel,
            bwd: &'a BackwardTrajectory,
            brackets: Vec<f64>,
        }
        impl StepObserver for Pairing<'_> {
            fn on_init(&mut self, state: &FieldState) {
                let b = self.bwd.at_step(0).unwrap();
                self.brackets.push(pairing_bracket(state, b, self.model));
            }
            fn on_step_end(&mut self, state: &FieldState) {
                let b = self.bwd.at_step(state.step).unwrap();
                self.brackets.push(pairing_bracket(state, b, self.model));
            }
        }
        let mut obs = Pairing {
            model: &m,
            bwd: &bwd,
            brackets: Vec::new(),
        };
        run_forward(&m, stream, InitialData::DeltaAtOrigin, &mut obs).unwrap();
        let first = obs.brackets[0];
        for b in &obs.brackets {
            assert!((b - first).abs() < 1e-10, "bracket drifted: {b} vs {first}");
        }
    }

    #[test]
    fn gibbs_marginal_normalizes_and_reduces_at_horizon() {
        let m = model(0.8, 30);
        let stream = NoiseStream::new(100, 0);
        let bwd = run_backward(&m, stream, Terminal::ConstantOne, 0, KeepPolicy::All).unwrap();
        let fwd_final =
            run_forward(&m, stream, InitialData::DeltaAtOrigin, &mut NullObserver).unwrap();
        // at i = n_steps with constant terminal the marginal is the forward density
        let mu = gibbs_marginal(&fwd_final, bwd.at_step(30).unwrap(), &m).unwrap();
        for (a, b) in mu.iter().zip(&fwd_final.density) {
            assert!((a - b).abs() < 1e-12);
        }
        let mass = m.domain.cell_volume() * mu.iter().sum::<f64>();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tilt_fault_breaks_single_site_identity() {
        let domain = DomainSpec::new(1, 1, 1.0, 0.05, 4, 0.9).unwrap();
        let kernel = Mollifier::single_site(1.4, &domain).unwrap();
        let m = PolymerModel::with_kernel(domain, kernel)
            .unwrap()
            .with_fault(TiltFault::FlipItoSign);
        let stream = NoiseStream::new(77, 3);
        let final_state =
            run_forward(&m, stream, InitialData::DeltaAtOrigin, &mut NullObserver).unwrap();
        let mut expect = 0.0;
        for step in 0..m.domain.n_steps {
            let eta = sample_noise_slice(stream, step, &m.domain).unwrap();
            let xi = mollify_slice(&eta, &m.kernel, &m.domain).unwrap();
            expect += m.domain.beta * xi.values[0] * m.domain.dt
                - 0.5 * m.domain.beta * m.domain.beta * m.r0() * m.domain.dt;
        }
        assert!((final_state.log_mass - expect).abs() > 1e-6);
    }

    #[test]
    fn backward_rejects_bad_arguments() {
        let m = model(1.0, 10);
        assert!(run_backward(
            &m,
            NoiseStream::new(0, 0),
            Terminal::ConstantOne,
            11,
            KeepPolicy::All
        )
        .is_err());
        assert!(run_backward(
            &m,
            NoiseStream::new(0, 0),
            Terminal::DeltaAt(usize::MAX),
            0,
            KeepPolicy::All
        )
        .is_err());
    }

    #[test]
    fn mollify_noise_slice_shape_mismatch() {
        let m = model(1.0, 10);
        let eta = NoiseSlice {
            values: vec![0.0; 3],
            step: 0,
        };
        assert!(mollify_slice(&eta, &m.kernel, &m.domain).is_err());
    }
}
