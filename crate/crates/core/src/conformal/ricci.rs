//! Newton's method on the discrete Ricci energy.

use std::f64::consts::PI;

use log::debug;
use serde::Serialize;

use super::curvature::{check_metric, compute_curvatures, curvature_jacobian};
use crate::error::{Error, Result};
use crate::linalg::solve_pinned;
use crate::mesh::{validate_topology, Mesh};

#[derive(Debug, Clone, Copy)]
pub struct RicciOptions {
    /// Stop once `max |K_target - K| <= tolerance`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step halvings allowed per iteration.
    pub max_halvings: usize,
}

impl Default for RicciOptions {
    fn default() -> Self {
        RicciOptions {
            tolerance: 1e-6,
            max_iterations: 100,
            max_halvings: 30,
        }
    }
}

/// One accepted Newton step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RicciIteration {
    pub iteration: usize,
    /// Residual after the step.
    pub residual: f64,
    pub step: f64,
    /// Total curvature after the step.
    pub curvature_sum: f64,
}

#[derive(Debug, Clone)]
pub struct RicciSolution {
    pub u: Vec<f64>,
    pub curvature: Vec<f64>,
    pub residual: f64,
    /// Curvature residual and total curvature at the starting point `u = 0`.
    pub initial_residual: f64,
    pub initial_curvature_sum: f64,
    pub log: Vec<RicciIteration>,
}

impl RicciSolution {
    pub fn iterations(&self) -> usize {
        self.log.len()
    }
}

fn residual_inf(target: &[f64], k: &[f64]) -> f64 {
    target
        .iter()
        .zip(k)
        .map(|(t, k)| (t - k).abs())
        .fold(0.0, f64::max)
}

/// Finds conformal factors `u` (with `u[0] = 0`) whose metric realizes the
/// target curvature.
///
/// Each step solves `J d = K_target - K` for the curvature Jacobian `J`
/// (equivalently `H d = K - K_target` for the energy Hessian) and halves
/// the step until every face is valid and the residual drops.
pub fn ricci_flow(mesh: &Mesh, target: &[f64], opts: &RicciOptions) -> Result<RicciSolution> {
    let n = mesh.vertex_count();
    if target.len() != n {
        return Err(Error::Invalid(format!(
            "{} target curvatures for {n} vertices",
            target.len()
        )));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let chi = validate_topology(mesh).euler_characteristic as f64;
    let total: f64 = target.iter().sum();
    if (total - 2.0 * PI * chi).abs() > 1e-9 {
        return Err(Error::Invalid(format!(
            "target curvature sums to {total}, expected 2 pi chi = {}",
            2.0 * PI * chi
        )));
    }

    let mut u = vec![0.0; n];
    let mut k = compute_curvatures(mesh, &u)?;
    let mut residual = residual_inf(target, &k);
    let initial_residual = residual;
    let initial_curvature_sum = k.iter().sum();
    let mut log = Vec::new();
    for iteration in 1..=opts.max_iterations {
        if residual <= opts.tolerance {
            break;
        }
        let rhs: Vec<f64> = target.iter().zip(&k).map(|(t, k)| t - k).collect();
        let jac = curvature_jacobian(mesh, &u)?;
        let delta = solve_pinned(&jac, &rhs, 0, 1e-12)?;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(u, d)| u + step * d).collect();
            if check_metric(mesh, &trial).is_ok() {
                let k_trial = compute_curvatures(mesh, &trial)?;
                let r_trial = residual_inf(target, &k_trial);
                if r_trial < residual {
                    accepted = Some((trial, k_trial, r_trial));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, k_trial, r_trial)) = accepted else {
            return Err(Error::StepUnderflow {
                solver: "ricci flow",
                halvings: opts.max_halvings,
            });
        };
        u = trial;
        k = k_trial;
        residual = r_trial;
        let curvature_sum = k.iter().sum();
        debug!("ricci iteration {iteration}: residual {residual:e}, step {step}");
        log.push(RicciIteration {
            iteration,
            residual,
            step,
            curvature_sum,
        });
    }
    if residual > opts.tolerance {
        return Err(Error::NoConvergence {
            solver: "ricci flow",
            iterations: opts.max_iterations,
            residual,
        });
    }
    Ok(RicciSolution {
        u,
        curvature: k,
        residual,
        initial_residual,
        initial_curvature_sum,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{default_corners, target_curvatures};
    use crate::shapes;

    #[test]
    fn flat_grid_is_a_fixed_point() {
        let m = shapes::grid(7, 7);
        let target = target_curvatures(&m, [0, 6, 48, 42]).unwrap();
        let sol = ricci_flow(&m, &target, &RicciOptions::default()).unwrap();
        assert_eq!(sol.iterations(), 0);
        assert!(sol.u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn small_cap_converges_monotonically() {
        let m = shapes::hemisphere_cap(6);
        let target = target_curvatures(&m, default_corners(&m).unwrap()).unwrap();
        let sol = ricci_flow(&m, &target, &RicciOptions::default()).unwrap();
        assert!(sol.residual <= 1e-6);
        let mut prev = sol.initial_residual;
        for it in &sol.log {
            assert!(it.residual < prev);
            assert!((it.curvature_sum - 2.0 * PI).abs() < 1e-8);
            prev = it.residual;
        }
        assert_eq!(sol.u[0], 0.0);
    }

    #[test]
    fn rejects_inadmissible_targets() {
        let m = shapes::grid(4, 4);
        let mut target = target_curvatures(&m, [0, 3, 15, 12]).unwrap();
        for c in [0, 3, 15, 12] {
            target[c] = PI / 4.0;
        }
        assert!(matches!(
            ricci_flow(&m, &target, &RicciOptions::default()),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let m = shapes::hemisphere_cap(5);
        let target = target_curvatures(&m, default_corners(&m).unwrap()).unwrap();
        let opts = RicciOptions {
            max_iterations: 1,
            tolerance: 1e-14,
            ..RicciOptions::default()
        };
        let err = ricci_flow(&m, &target, &opts).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }), "{err}");
    }
}
