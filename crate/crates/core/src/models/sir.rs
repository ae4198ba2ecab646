//! Susceptible–Infected–Recovered dynamics, optionally with a cumulative
//! new-case counter.
//!
//! ```text
//! dS/dt = −β S I / N
//! dI/dt =  β S I / N − γ I
//! dR/dt =  γ I
//! dC/dt =  β S I / N        (cumulative new cases)
//! ```

use super::ModelError;
use crate::ode::OdeSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirParams {
    /// Transmission rate (1/day).
    pub beta: f64,
    /// Recovery rate (1/day).
    pub gamma: f64,
    /// Total population.
    pub population: f64,
}

impl SirParams {
    pub fn new(beta: f64, gamma: f64, population: f64) -> Result<Self, ModelError> {
        for (name, v) in [("beta", beta), ("gamma", gamma), ("N", population)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { beta, gamma, population })
    }

    fn from_slice(p: &[f64]) -> Self {
        Self { beta: p[0], gamma: p[1], population: p[2] }
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.beta, self.gamma, self.population]
    }

    /// Basic reproduction number β/γ.
    pub fn r0(&self) -> f64 {
        self.beta / self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirCumulativeState {
    pub s: f64,
    pub i: f64,
    pub r: f64,
    pub c_sigma: f64,
}

/// `(dS, dI, dR)`.
pub fn sir_rhs(_t: f64, state: &SirState, params: &SirParams) -> [f64; 3] {
    let infections = params.beta * state.s * state.i / params.population;
    let recoveries = params.gamma * state.i;
    [-infections, infections - recoveries, recoveries]
}

/// `(dS, dI, dR, dC_sigma)`; `dC_sigma` is the infection flux and equals `−dS`.
pub fn sir_cumulative_rhs(t: f64, state: &SirCumulativeState, params: &SirParams) -> [f64; 4] {
    let [ds, di, dr] = sir_rhs(t, &SirState { s: state.s, i: state.i, r: state.r }, params);
    [ds, di, dr, -ds]
}

fn sir_jacobian(y: &[f64], p: &SirParams, d: usize, jac: &mut [f64]) {
    let (s, i) = (y[0], y[1]);
    let b = p.beta / p.population;
    jac.iter_mut().for_each(|v| *v = 0.0);
    jac[0] = -b * i;
    jac[1] = -b * s;
    jac[d] = b * i;
    jac[d + 1] = b * s - p.gamma;
    jac[2 * d + 1] = p.gamma;
    if d == 4 {
        jac[3 * d] = b * i;
        jac[3 * d + 1] = b * s;
    }
}

/// SIR as an [`OdeSystem`]; parameters `[beta, gamma, N]`, states `[S, I, R]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sir;

impl OdeSystem for Sir {
    fn dimension(&self) -> usize {
        3
    }

    fn state_names(&self) -> Vec<String> {
        ["S", "I", "R"].map(String::from).to_vec()
    }

    fn parameter_names(&self) -> Vec<String> {
        ["beta", "gamma", "N"].map(String::from).to_vec()
    }

    fn rhs(&self, t: f64, y: &[f64], params: &[f64], dydt: &mut [f64]) {
        let d = sir_rhs(t, &SirState { s: y[0], i: y[1], r: y[2] }, &SirParams::from_slice(params));
        dydt.copy_from_slice(&d);
    }

    fn jacobian(&self, _t: f64, y: &[f64], params: &[f64], jac: &mut [f64]) -> bool {
        sir_jacobian(y, &SirParams::from_slice(params), 3, jac);
        true
    }
}

/// SIR plus cumulative new cases; states `[S, I, R, C_sigma]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SirCumulative;

impl OdeSystem for SirCumulative {
    fn dimension(&self) -> usize {
        4
    }

    fn state_names(&self) -> Vec<String> {
        ["S", "I", "R", "C_sigma"].map(String::from).to_vec()
    }

    fn parameter_names(&self) -> Vec<String> {
        Sir.parameter_names()
    }

    fn rhs(&self, t: f64, y: &[f64], params: &[f64], dydt: &mut [f64]) {
        let state = SirCumulativeState { s: y[0], i: y[1], r: y[2], c_sigma: y[3] };
        let d = sir_cumulative_rhs(t, &state, &SirParams::from_slice(params));
        dydt.copy_from_slice(&d);
    }

    fn jacobian(&self, _t: f64, y: &[f64], params: &[f64], jac: &mut [f64]) -> bool {
        sir_jacobian(y, &SirParams::from_slice(params), 4, jac);
        true
    }
}
