//! Fixed-step implicit trapezoidal rule for stiff systems.

use super::dopri::segment_steps;
use super::{all_finite, check_inputs, OdeError, OdeSystem, SolverConfig, TimeGrid, Trajectory};
use crate::linalg::solve_in_place;

const MAX_NEWTON_ITERATIONS: usize = 25;
const MAX_HALVINGS: usize = 10;

/// Integrate with the trapezoidal rule `z = y + h/2 (f(t, y) + f(t + h, z))`.
///
/// The step is the resolved `h_init` of `cfg` (clipped to `h_max`); each grid
/// interval is split into equal steps no larger than that. Each step is solved
/// by damped Newton iteration using the system Jacobian when provided and
/// central finite differences otherwise. Newton converges when the update
/// satisfies `‖Δ‖∞ ≤ atol + rtol·‖z‖∞`.
pub fn integrate_implicit(
    system: &dyn OdeSystem,
    params: &[f64],
    y0: &[f64],
    grid: &TimeGrid,
    cfg: &SolverConfig,
) -> Result<Trajectory, OdeError> {
    check_inputs(system, params, y0)?;
    let d = y0.len();
    let span = grid.span();
    let h = if span > 0.0 { cfg.bounds(span)?.h_init } else { 0.0 };

    let mut newton = Newton::new(system, params, d);
    let mut t = grid.t0();
    let mut y = y0.to_vec();
    let mut f = vec![0.0; d];
    system.rhs(t, &y, params, &mut f);
    if !all_finite(&f) {
        return Err(OdeError::NonFiniteRhs { t });
    }

    let mut states = Vec::with_capacity(grid.len());
    for &target in grid.points() {
        let gap = target - t;
        if gap > 0.0 {
            let n = segment_steps(gap, h);
            let dt = gap / n as f64;
            for i in 0..n {
                let t_new = if i + 1 == n { target } else { t + dt };
                let step = t_new - t;
                newton.solve(t, t_new, step, &y, &f, cfg)?;
                std::mem::swap(&mut y, &mut newton.z);
                f.copy_from_slice(&newton.fz);
                t = t_new;
            }
        }
        states.push(y.clone());
    }
    Ok(Trajectory { grid: grid.clone(), states })
}

struct Newton<'a> {
    system: &'a dyn OdeSystem,
    params: &'a [f64],
    d: usize,
    z: Vec<f64>,
    fz: Vec<f64>,
    residual: Vec<f64>,
    jac: Vec<f64>,
    trial: Vec<f64>,
    f_trial: Vec<f64>,
    r_trial: Vec<f64>,
    fp: Vec<f64>,
    fm: Vec<f64>,
}

impl<'a> Newton<'a> {
    fn new(system: &'a dyn OdeSystem, params: &'a [f64], d: usize) -> Self {
        let z = || vec![0.0; d];
        Self {
            system,
            params,
            d,
            z: z(),
            fz: z(),
            residual: z(),
            jac: vec![0.0; d * d],
            trial: z(),
            f_trial: z(),
            r_trial: z(),
            fp: z(),
            fm: z(),
        }
    }

    fn residual_into(y: &[f64], f_y: &[f64], z: &[f64], f_z: &[f64], h: f64, out: &mut [f64]) {
        for i in 0..y.len() {
            out[i] = z[i] - y[i] - 0.5 * h * (f_y[i] + f_z[i]);
        }
    }

    fn jacobian(&mut self, t: f64) {
        let d = self.d;
        if self.system.jacobian(t, &self.z, self.params, &mut self.jac) {
            return;
        }
        let mut probe = self.z.clone();
        for j in 0..d {
            let orig = probe[j];
            let eps = 1e-6 * (1.0 + orig.abs());
            probe[j] = orig + eps;
            self.system.rhs(t, &probe, self.params, &mut self.fp);
            probe[j] = orig - eps;
            self.system.rhs(t, &probe, self.params, &mut self.fm);
            probe[j] = orig;
            for i in 0..d {
                self.jac[i * d + j] = (self.fp[i] - self.fm[i]) / (2.0 * eps);
            }
        }
    }

    /// Solve for the state at `t_new`; the result is left in `self.z` / `self.fz`.
    fn solve(
        &mut self,
        t: f64,
        t_new: f64,
        h: f64,
        y: &[f64],
        f_y: &[f64],
        cfg: &SolverConfig,
    ) -> Result<(), OdeError> {
        let d = self.d;
        self.z.copy_from_slice(y);
        self.system.rhs(t_new, &self.z, self.params, &mut self.fz);
        if !all_finite(&self.fz) {
            return Err(OdeError::NonFiniteRhs { t: t_new });
        }
        Self::residual_into(y, f_y, &self.z, &self.fz, h, &mut self.residual);

        for _ in 0..MAX_NEWTON_ITERATIONS {
            self.jacobian(t_new);
            // Iteration matrix I − h/2 · J, right-hand side −G(z).
            for v in self.jac.iter_mut() {
                *v *= -0.5 * h;
            }
            for i in 0..d {
                self.jac[i * d + i] += 1.0;
            }
            let mut delta: Vec<f64> = self.residual.iter().map(|r| -r).collect();
            if !solve_in_place(&mut self.jac, &mut delta, d, 1, 1e-14) {
                return Err(OdeError::NewtonDivergence { t, iterations: MAX_NEWTON_ITERATIONS });
            }

            let g_norm = inf_norm(&self.residual);
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                for i in 0..d {
                    self.trial[i] = self.z[i] + lambda * delta[i];
                }
                self.system.rhs(t_new, &self.trial, self.params, &mut self.f_trial);
                if all_finite(&self.f_trial) {
                    Self::residual_into(y, f_y, &self.trial, &self.f_trial, h, &mut self.r_trial);
                    if inf_norm(&self.r_trial) <= g_norm || lambda < 1.0 / 512.0 {
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(OdeError::NonFiniteRhs { t: t_new });
            }
            std::mem::swap(&mut self.z, &mut self.trial);
            std::mem::swap(&mut self.fz, &mut self.f_trial);
            std::mem::swap(&mut self.residual, &mut self.r_trial);

            let step_norm = lambda * inf_norm(&delta);
            if step_norm <= cfg.atol + cfg.rtol * inf_norm(&self.z) {
                return Ok(());
            }
        }
        Err(OdeError::NewtonDivergence { t, iterations: MAX_NEWTON_ITERATIONS })
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
