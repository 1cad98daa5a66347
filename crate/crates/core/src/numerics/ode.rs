use nalgebra::SMatrix;

use super::C64;
use crate::error::{Error, Result};

/// Uniform time grid `t0, t0 + dt, ...` whose last step is shortened to land
/// exactly on `t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGrid {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    steps: usize,
}

impl StepGrid {
    pub fn new(t0: f64, t1: f64, dt: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::InvalidInput(format!("need t1 > t0, got [{t0}, {t1}]")));
        }
        if !(dt > 0.0 && dt <= t1 - t0) {
            return Err(Error::InvalidInput(format!(
                "need 0 < dt <= t1 - t0, got dt = {dt}"
            )));
        }
        // tolerate round-off in (t1 - t0) / dt so an exact multiple does not
        // produce a sliver step at the end
        let steps = (((t1 - t0) / dt) - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { t0, t1, dt, steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Time of grid node `k`, `0 <= k <= steps`.
    pub fn time(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.t1
        } else {
            self.t0 + k as f64 * self.dt
        }
    }
}

/// One classic fourth-order Runge-Kutta step of `y' = rhs(t, y)`.
#[inline]
pub fn rk4_step<const R: usize, const C: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &SMatrix<C64, R, C>,
    h: f64,
) -> SMatrix<C64, R, C>
where
    F: FnMut(f64, &SMatrix<C64, R, C>) -> SMatrix<C64, R, C>,
{
    let half = C64::from(0.5 * h);
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &(y + k1 * half));
    let k3 = rhs(t + 0.5 * h, &(y + k2 * half));
    let k4 = rhs(t + h, &(y + k3 * C64::from(h)));
    y + (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(h / 6.0)
}

/// Fixed-step RK4 integration with a per-node observer.
///
/// `observe(k, t, &mut y)` runs at node 0 and after every step; it may
/// modify the state in place (renormalization, for instance). Returns the
/// state at `t1`.
pub fn integrate_observed<const R: usize, const C: usize, F, O>(
    mut rhs: F,
    y0: SMatrix<C64, R, C>,
    grid: &StepGrid,
    mut observe: O,
) -> Result<SMatrix<C64, R, C>>
where
    F: FnMut(f64, &SMatrix<C64, R, C>) -> SMatrix<C64, R, C>,
    O: FnMut(usize, f64, &mut SMatrix<C64, R, C>),
{
    let mut y = y0;
    observe(0, grid.t0, &mut y);
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let h = grid.time(k + 1) - t;
        y = rk4_step(&mut rhs, t, &y, h);
        let t_next = grid.time(k + 1);
        if !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        observe(k + 1, t_next, &mut y);
    }
    Ok(y)
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` and returns every node,
/// both endpoints included.
pub fn integrate_ode<const R: usize, const C: usize, F>(
    rhs: F,
    y0: SMatrix<C64, R, C>,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<Vec<(f64, SMatrix<C64, R, C>)>>
where
    F: FnMut(f64, &SMatrix<C64, R, C>) -> SMatrix<C64, R, C>,
{
    let grid = StepGrid::new(t0, t1, dt)?;
    let mut out = Vec::with_capacity(grid.steps() + 1);
    integrate_observed(rhs, y0, &grid, |_, t, y| out.push((t, *y)))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::StateVector;
    use std::f64::consts::PI;

    #[test]
    fn global_phase_rotation() {
        let y0 = StateVector::<3>::from([C64::new(1.0, 0.0), C64::default(), C64::default()]);
        let traj = integrate_ode(|_, y| y * C64::new(0.0, -1.0), y0, 0.0, PI, 1e-3).unwrap();
        let (t, y) = traj.last().unwrap();
        assert_eq!(*t, PI);
        assert!((y[0] - C64::new(-1.0, 0.0)).norm() < 1e-9);
        assert!(y[1].norm() == 0.0 && y[2].norm() == 0.0);
        assert_eq!(traj[0].0, 0.0);
    }

    #[test]
    fn zero_rhs_keeps_state() {
        let y0 = StateVector::<4>::from([C64::new(0.5, 0.5); 4]);
        let traj = integrate_ode(|_, _| StateVector::<4>::zeros(), y0, 1.0, 2.0, 0.3).unwrap();
        assert_eq!(traj.len(), 5);
        assert!(traj.iter().all(|(_, y)| *y == y0));
        assert_eq!(traj.last().unwrap().0, 2.0);
    }

    #[test]
    fn grid_handles_exact_multiples() {
        let g = StepGrid::new(0.0, 37.5, 1e-3).unwrap();
        assert_eq!(g.steps(), 37_500);
        let g = StepGrid::new(0.0, 1.0, 0.3).unwrap();
        assert_eq!(g.steps(), 4);
        assert!((g.time(4) - g.time(3) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn invalid_windows_rejected() {
        assert!(StepGrid::new(1.0, 1.0, 0.1).is_err());
        assert!(StepGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(StepGrid::new(0.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let y0 = StateVector::<3>::from([C64::new(1.0, 0.0); 3]);
        let err = integrate_ode(|_, y| y * C64::from(1e3), y0, 0.0, 200.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { .. }));
    }
}
