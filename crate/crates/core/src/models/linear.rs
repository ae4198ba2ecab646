use crate::ode::OdeSystem;

/// Scalar linear decay `y' = −k y`; parameter `[k]`, state `[y]`.
///
/// Sampled on a uniform grid the solution obeys `y(t + Δ) = e^{−kΔ} y(t)`,
/// which makes it an exactly learnable target for linear forecasters.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearDecay;

impl OdeSystem for LinearDecay {
    fn dimension(&self) -> usize {
        1
    }

    fn state_names(&self) -> Vec<String> {
        vec!["y".into()]
    }

    fn parameter_names(&self) -> Vec<String> {
        vec!["k".into()]
    }

    fn rhs(&self, _t: f64, y: &[f64], params: &[f64], dydt: &mut [f64]) {
        dydt[0] = -params[0] * y[0];
    }

    fn jacobian(&self, _t: f64, _y: &[f64], params: &[f64], jac: &mut [f64]) -> bool {
        jac[0] = -params[0];
        true
    }
}
