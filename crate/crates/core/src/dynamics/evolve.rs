use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::master::{LinearFlow, MasterEquation};
use super::DensityMatrix;
use crate::error::{Error, Result};

/// Default RK4 step, ns.
pub const DEFAULT_STEP_NS: f64 = 1.0;

const TRACE_TOLERANCE: f64 = 1e-6;

/// Observation times `0, Δ, 2Δ, …, T` (inclusive), in integer nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeGrid {
    pub total_ns: u64,
    pub observe_every_ns: u64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            total_ns: 1000,
            observe_every_ns: 50,
        }
    }
}

impl TimeGrid {
    pub fn new(total_ns: u64, observe_every_ns: u64) -> Result<Self> {
        if total_ns == 0 || observe_every_ns == 0 {
            return Err(Error::InvalidParameter(
                "total time and observation interval must be positive".into(),
            ));
        }
        if !total_ns.is_multiple_of(observe_every_ns) {
            return Err(Error::InvalidParameter(format!(
                "observation interval {observe_every_ns} ns does not divide total time {total_ns} ns"
            )));
        }
        Ok(TimeGrid {
            total_ns,
            observe_every_ns,
        })
    }

    /// Number of observation points, endpoints included.
    pub fn points(&self) -> usize {
        (self.total_ns / self.observe_every_ns) as usize + 1
    }

    pub fn times_ns(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.points() as u64).map(|k| k * self.observe_every_ns)
    }

    /// True when every point of `other` is also a point of `self`.
    pub fn contains(&self, other: &TimeGrid) -> bool {
        other.total_ns <= self.total_ns && other.observe_every_ns.is_multiple_of(self.observe_every_ns)
    }
}

/// Fixed-step fourth-order Runge–Kutta integrator with reusable buffers.
pub struct Rk4<'a, E: LinearFlow> {
    equation: &'a E,
    k: [Vec<Complex64>; 4],
    scratch: Vec<Complex64>,
}

impl<'a, E: LinearFlow> Rk4<'a, E> {
    pub fn new(equation: &'a E) -> Self {
        let n = equation.len();
        let zero = vec![Complex64::new(0.0, 0.0); n];
        Rk4 {
            equation,
            k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
            scratch: zero,
        }
    }

    pub fn step(&mut self, rho: &mut [Complex64], dt: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        let s = &mut self.scratch;
        let eq = self.equation;
        eq.rhs(rho, k1);
        axpy_into(s, rho, k1, dt / 2.0);
        eq.rhs(s, k2);
        axpy_into(s, rho, k2, dt / 2.0);
        eq.rhs(s, k3);
        axpy_into(s, rho, k3, dt);
        eq.rhs(s, k4);
        let w = dt / 6.0;
        for i in 0..rho.len() {
            rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}

fn axpy_into(out: &mut [Complex64], x: &[Complex64], y: &[Complex64], a: f64) {
    for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + yi * a;
    }
}

/// Integrates the flow from `x` and calls `observe(k, x)` at every grid
/// point, starting with `k = 0` at t = 0. Aborts if `trace(x)` drifts from 1
/// by more than 1e-6.
pub fn integrate<E, T, F>(
    flow: &E,
    mut x: Vec<Complex64>,
    grid: TimeGrid,
    step_ns: f64,
    trace: T,
    mut observe: F,
) -> Result<()>
where
    E: LinearFlow,
    T: Fn(&[Complex64]) -> f64,
    F: FnMut(usize, &[Complex64]) -> Result<()>,
{
    if x.len() != flow.len() {
        return Err(Error::DimensionMismatch {
            expected: flow.len(),
            found: x.len(),
        });
    }
    let steps_per_point = steps_per_point(grid, step_ns)?;
    let dt = step_ns * 1e-3;
    let mut rk = Rk4::new(flow);
    for k in 0..grid.points() {
        if k > 0 {
            for _ in 0..steps_per_point {
                rk.step(&mut x, dt);
            }
        }
        let drift = (trace(&x) - 1.0).abs();
        if drift.is_nan() || drift > TRACE_TOLERANCE {
            return Err(Error::Invariant {
                time_ns: k as u64 * grid.observe_every_ns,
                detail: format!("trace drifted by {drift:e}"),
            });
        }
        observe(k, &x)?;
    }
    Ok(())
}

fn steps_per_point(grid: TimeGrid, step_ns: f64) -> Result<usize> {
    let ratio = grid.observe_every_ns as f64 / step_ns;
    let steps = ratio.round() as usize;
    if step_ns.is_nan() || step_ns <= 0.0 || steps == 0 || (ratio - steps as f64).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "step {step_ns} ns must divide the observation interval {} ns",
            grid.observe_every_ns
        )));
    }
    Ok(steps)
}

/// [`integrate`] over full density matrices.
pub fn evolve_with<E, F>(equation: &E, rho0: DensityMatrix, grid: TimeGrid, step_ns: f64, mut observe: F) -> Result<()>
where
    E: MasterEquation,
    F: FnMut(usize, &DensityMatrix) -> Result<()>,
{
    let dim = equation.dim();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho0.dim(),
        });
    }
    let trace = |x: &[Complex64]| (0..dim).map(|a| x[a * dim + a].re).sum::<f64>();
    integrate(equation, rho0.as_slice().to_vec(), grid, step_ns, trace, |k, x| {
        observe(k, &DensityMatrix::from_data(dim, x.to_vec())?)
    })
}

/// Density matrices at every grid point.
pub fn evolve<E: MasterEquation>(
    equation: &E,
    rho0: DensityMatrix,
    grid: TimeGrid,
    step_ns: f64,
) -> Result<Vec<DensityMatrix>> {
    let mut states = Vec::with_capacity(grid.points());
    evolve_with(equation, rho0, grid, step_ns, |_, rho| {
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(states)
}
