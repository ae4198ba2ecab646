//! Dormand–Prince 5(4) explicit Runge–Kutta pair.

use super::{all_finite, check_inputs, OdeError, OdeSystem, SolverConfig, TimeGrid, Trajectory};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// 5th-order solution weights (also row 7 of the tableau, FSAL).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension (Hairer, Nørsett & Wanner, order 4).
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Single-step machinery shared by the grid drivers and the steady-state search.
pub(crate) struct Stepper<'a> {
    system: &'a dyn OdeSystem,
    params: &'a [f64],
    pub t: f64,
    pub y: Vec<f64>,
    /// `f(t, y)` at the current point.
    pub f: Vec<f64>,
    k: [Vec<f64>; 7],
    y_new: Vec<f64>,
    tmp: Vec<f64>,
    err: Vec<f64>,
    // Continuous extension of the last accepted step on [t_old, t_old + h_old].
    cont: [Vec<f64>; 5],
    t_old: f64,
    h_old: f64,
}

pub(crate) enum Attempt {
    /// Weighted RMS error of the trial step.
    Finished(f64),
    NonFinite,
}

impl<'a> Stepper<'a> {
    pub fn new(
        system: &'a dyn OdeSystem,
        params: &'a [f64],
        t0: f64,
        y0: &[f64],
    ) -> Result<Self, OdeError> {
        check_inputs(system, params, y0)?;
        let d = y0.len();
        let mut f = vec![0.0; d];
        system.rhs(t0, y0, params, &mut f);
        if !all_finite(&f) {
            return Err(OdeError::NonFiniteRhs { t: t0 });
        }
        let z = || vec![0.0; d];
        Ok(Self {
            system,
            params,
            t: t0,
            y: y0.to_vec(),
            f,
            k: [z(), z(), z(), z(), z(), z(), z()],
            y_new: z(),
            tmp: z(),
            err: z(),
            cont: [z(), z(), z(), z(), z()],
            t_old: t0,
            h_old: 0.0,
        })
    }

    fn stage(&mut self, c: f64, h: f64, weights: &[(usize, f64)], out: usize) {
        let d = self.y.len();
        for i in 0..d {
            let mut acc = 0.0;
            for &(j, a) in weights {
                acc += a * self.k[j][i];
            }
            self.tmp[i] = self.y[i] + h * acc;
        }
        let (t, params) = (self.t + c * h, self.params);
        self.system.rhs(t, &self.tmp, params, &mut self.k[out]);
    }

    /// Compute a trial step of size `h`; the current point is untouched.
    pub fn attempt(&mut self, h: f64, rtol: f64, atol: f64) -> Attempt {
        let d = self.y.len();
        self.k[0].copy_from_slice(&self.f);
        self.stage(C2, h, &[(0, A21)], 1);
        self.stage(C3, h, &[(0, A31), (1, A32)], 2);
        self.stage(C4, h, &[(0, A41), (1, A42), (2, A43)], 3);
        self.stage(C5, h, &[(0, A51), (1, A52), (2, A53), (3, A54)], 4);
        self.stage(1.0, h, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)], 5);
        for i in 0..d {
            let k = &self.k;
            self.y_new[i] = self.y[i]
                + h * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        let t_new = self.t + h;
        self.system.rhs(t_new, &self.y_new, self.params, &mut self.k[6]);

        let mut sum = 0.0;
        for i in 0..d {
            let k = &self.k;
            let e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
            self.err[i] = e;
            let scale = atol + rtol * self.y[i].abs().max(self.y_new[i].abs());
            sum += (e / scale).powi(2);
        }
        let norm = (sum / d.max(1) as f64).sqrt();
        if !norm.is_finite() || !all_finite(&self.y_new) || !all_finite(&self.k[6]) {
            return Attempt::NonFinite;
        }
        Attempt::Finished(norm)
    }

    /// Commit the last trial step, ending exactly at `t_new`.
    pub fn accept(&mut self, h: f64, t_new: f64) {
        let d = self.y.len();
        for i in 0..d {
            let k = &self.k;
            let ydiff = self.y_new[i] - self.y[i];
            let bspl = h * k[0][i] - ydiff;
            self.cont[0][i] = self.y[i];
            self.cont[1][i] = ydiff;
            self.cont[2][i] = bspl;
            self.cont[3][i] = ydiff - h * k[6][i] - bspl;
            self.cont[4][i] = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                    + D7 * k[6][i]);
        }
        self.t_old = self.t;
        self.h_old = h;
        self.t = t_new;
        std::mem::swap(&mut self.y, &mut self.y_new);
        self.f.copy_from_slice(&self.k[6]);
    }

    /// Evaluate the continuous extension of the last accepted step at `t`.
    pub fn interpolate(&self, t: f64, out: &mut Vec<f64>) {
        let s = (t - self.t_old) / self.h_old;
        let s1 = 1.0 - s;
        out.clear();
        out.extend((0..self.y.len()).map(|i| {
            let c = &self.cont;
            c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])))
        }));
    }
}

/// Integrate with adaptive Dormand–Prince 5(4) steps and report the state at
/// every grid point.
///
/// Steps are not aligned to grid points; interior points come from the dense
/// output and the final point is hit exactly.
pub fn integrate(
    system: &dyn OdeSystem,
    params: &[f64],
    y0: &[f64],
    grid: &TimeGrid,
    cfg: &SolverConfig,
) -> Result<Trajectory, OdeError> {
    let mut stepper = Stepper::new(system, params, grid.t0(), y0)?;
    let points = grid.points();
    let mut states = Vec::with_capacity(points.len());
    let mut idx = 0;
    while idx < points.len() && points[idx] == grid.t0() {
        states.push(y0.to_vec());
        idx += 1;
    }
    if idx == points.len() {
        return Ok(Trajectory { grid: grid.clone(), states });
    }

    let t_end = points[points.len() - 1];
    let bounds = cfg.bounds(grid.span())?;
    let mut h = bounds.h_init;
    let mut err_prev: f64 = 1e-4;
    let mut rejected = false;
    let mut steps = 0usize;
    let mut buf = Vec::with_capacity(y0.len());

    while idx < points.len() {
        if steps >= cfg.max_steps {
            return Err(OdeError::StepLimitExceeded { t: stepper.t, max_steps: cfg.max_steps });
        }
        steps += 1;
        let remaining = t_end - stepper.t;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        match stepper.attempt(h, cfg.rtol, cfg.atol) {
            Attempt::Finished(err) if err <= 1.0 => {
                let t_new = if last { t_end } else { stepper.t + h };
                stepper.accept(h, t_new);
                while idx < points.len() && points[idx] <= t_new {
                    if points[idx] == t_new {
                        states.push(stepper.y.clone());
                    } else {
                        stepper.interpolate(points[idx], &mut buf);
                        states.push(buf.clone());
                    }
                    idx += 1;
                }
                let err = err.max(1e-4);
                let mut fac = (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX);
                if rejected {
                    fac = fac.min(1.0);
                }
                err_prev = err;
                rejected = false;
                h = (h * fac).min(bounds.h_max);
            }
            Attempt::Finished(err) => {
                let fac = (SAFETY * err.powf(-ALPHA)).max(FAC_MIN);
                h *= fac;
                rejected = true;
                if h < bounds.h_min {
                    return Err(OdeError::StepUnderflow { t: stepper.t, h });
                }
            }
            Attempt::NonFinite => {
                h *= FAC_MIN;
                rejected = true;
                if h < bounds.h_min {
                    return Err(OdeError::NonFiniteRhs { t: stepper.t });
                }
            }
        }
    }
    Ok(Trajectory { grid: grid.clone(), states })
}

/// Integrate with a forced constant step `h` (no error control).
///
/// Each interval between consecutive grid points is split into
/// `⌈Δt / h⌉` equal steps so that grid points are hit exactly.
pub fn integrate_fixed(
    system: &dyn OdeSystem,
    params: &[f64],
    y0: &[f64],
    grid: &TimeGrid,
    h: f64,
) -> Result<Trajectory, OdeError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(OdeError::InvalidConfig(format!("step must be finite and positive, got {h}")));
    }
    let mut stepper = Stepper::new(system, params, grid.t0(), y0)?;
    let mut states = Vec::with_capacity(grid.len());
    for &target in grid.points() {
        let gap = target - stepper.t;
        if gap > 0.0 {
            let n = segment_steps(gap, h);
            let dt = gap / n as f64;
            for i in 0..n {
                let t_new = if i + 1 == n { target } else { stepper.t + dt };
                match stepper.attempt(dt, 1.0, 1.0) {
                    Attempt::Finished(_) => stepper.accept(dt, t_new),
                    Attempt::NonFinite => return Err(OdeError::NonFiniteRhs { t: stepper.t }),
                }
            }
        }
        states.push(stepper.y.clone());
    }
    Ok(Trajectory { grid: grid.clone(), states })
}

/// Number of equal steps of size at most `h` covering `gap`.
pub(crate) fn segment_steps(gap: f64, h: f64) -> usize {
    // Tolerate representation error so that e.g. 1.0 / 0.1 gives 10 steps, not 11.
    ((gap / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::super::test_systems::{Constant, Exponential, StiffCosine};
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let sys = Exponential { rate: -1.0 };
        let grid = TimeGrid::new(0.0, vec![1.0]).unwrap();
        let cfg = SolverConfig::default();
        let traj = integrate(&sys, &[], &[1.0], &grid, &cfg).unwrap();
        let expected = (-1.0f64).exp();
        assert!((traj.states[0][0] - expected).abs() < cfg.rtol * 10.0);
    }

    #[test]
    fn zero_rhs_keeps_constant() {
        let sys = Constant(0.0);
        let grid = TimeGrid::uniform(0.0, 0.37, 9).unwrap();
        let traj = integrate(&sys, &[], &[2.5], &grid, &SolverConfig::default()).unwrap();
        assert!(traj.states.iter().all(|s| s[0] == 2.5));
    }

    #[test]
    fn output_times_are_grid_times() {
        let sys = Exponential { rate: -0.3 };
        let points = vec![0.1, 0.3333, 1.7, 2.0, 9.99];
        let grid = TimeGrid::new(0.0, points.clone()).unwrap();
        let traj = integrate(&sys, &[], &[1.0], &grid, &SolverConfig::default()).unwrap();
        assert_eq!(traj.times(), points.as_slice());
        for (t, s) in points.iter().zip(&traj.states) {
            assert!((s[0] - (-0.3 * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn first_point_at_t0_is_initial_state() {
        let sys = Exponential { rate: 2.0 };
        let grid = TimeGrid::uniform(0.0, 0.5, 3).unwrap();
        let traj = integrate(&sys, &[], &[3.0], &grid, &SolverConfig::default()).unwrap();
        assert_eq!(traj.states[0], vec![3.0]);
    }

    #[test]
    fn step_limit_is_reported() {
        let sys = Exponential { rate: -1.0 };
        let grid = TimeGrid::new(0.0, vec![100.0]).unwrap();
        let cfg = SolverConfig { max_steps: 3, h_max: Some(1.0), ..Default::default() };
        assert!(matches!(
            integrate(&sys, &[], &[1.0], &grid, &cfg),
            Err(OdeError::StepLimitExceeded { .. })
        ));
    }

    #[test]
    fn stiff_problem_underflows_with_large_h_min() {
        let sys = StiffCosine { lambda: 1e7 };
        let grid = TimeGrid::new(0.0, vec![1.0]).unwrap();
        let cfg = SolverConfig { h_min: 1e-5, ..Default::default() };
        assert!(matches!(
            integrate(&sys, &[], &[0.0], &grid, &cfg),
            Err(OdeError::StepUnderflow { .. })
        ));
    }

    #[test]
    fn non_finite_initial_rhs_is_reported() {
        let sys = Exponential { rate: f64::NAN };
        let grid = TimeGrid::new(0.0, vec![1.0]).unwrap();
        assert!(matches!(
            integrate(&sys, &[], &[1.0], &grid, &SolverConfig::default()),
            Err(OdeError::NonFiniteRhs { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let sys = Exponential { rate: -1.0 };
        let grid = TimeGrid::new(0.0, vec![1.0]).unwrap();
        assert!(matches!(
            integrate(&sys, &[], &[1.0, 2.0], &grid, &SolverConfig::default()),
            Err(OdeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fixed_step_convergence_is_fifth_order() {
        let sys = Exponential { rate: -1.0 };
        let grid = TimeGrid::new(0.0, vec![1.0]).unwrap();
        let exact = (-1.0f64).exp();
        let errors: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| (integrate_fixed(&sys, &[], &[1.0], &grid, h).unwrap().states[0][0] - exact).abs())
            .collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!((24.0..=40.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn segment_steps_rounds_representation_error() {
        assert_eq!(segment_steps(1.0, 0.1), 10);
        assert_eq!(segment_steps(1.0, 0.3), 4);
        assert_eq!(segment_steps(0.01, 0.1), 1);
    }

    #[test]
    fn integration_is_deterministic() {
        let sys = StiffCosine { lambda: 3.0 };
        let grid = TimeGrid::uniform(0.0, 0.25, 40).unwrap();
        let cfg = SolverConfig::default();
        let a = integrate(&sys, &[], &[0.4], &grid, &cfg).unwrap();
        let b = integrate(&sys, &[], &[0.4], &grid, &cfg).unwrap();
        let bits = |t: &Trajectory| t.states.iter().map(|s| s[0].to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
