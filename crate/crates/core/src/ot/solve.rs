use std::io::Write;

use log::debug;
use serde::Serialize;

use super::diagram::{power_diagram, PowerDiagram};
use super::OtProblem;
use crate::error::{Error, Result};
use crate::geom::{dot2, norm2, sub2};
use crate::linalg::{solve_pinned, CsrMatrix};
use crate::mesh::Mesh;
use crate::param::{ParamMap, Stage};

/// Compensated sum, so that tiny energy decreases near the optimum are
/// not lost to rounding.
fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `E(h) = sum_i integral over W_i of (<x, p_i> + h_i) dx - sum_i nu_i h_i`
/// for the diagram's own heights.
pub fn ot_energy_of(problem: &OtProblem, diagram: &PowerDiagram) -> f64 {
    neumaier_sum(problem.sites().iter().enumerate().map(|(i, p)| {
        let cell = &diagram.cells[i];
        let h = diagram.heights[i];
        cell.area * (dot2(cell.centroid, *p) + h) - problem.nu()[i] * h
    }))
}

pub fn ot_energy(problem: &OtProblem, heights: &[f64]) -> Result<f64> {
    let diagram = power_diagram(problem.sites(), heights)?;
    Ok(ot_energy_of(problem, &diagram))
}

/// `w_i(h) - nu_i`.
pub fn ot_gradient(problem: &OtProblem, diagram: &PowerDiagram) -> Vec<f64> {
    diagram
        .cells
        .iter()
        .zip(problem.nu())
        .map(|(c, n)| c.area - n)
        .collect()
}

/// `-|e_ij| / |p_i - p_j|` for adjacent cells, diagonal equal to minus the
/// row's off-diagonal sum.
pub fn ot_hessian(problem: &OtProblem, diagram: &PowerDiagram) -> CsrMatrix {
    let sites = problem.sites();
    let mut t = Vec::with_capacity(diagram.edges.len() * 4);
    for e in &diagram.edges {
        let w = e.length / norm2(sub2(sites[e.i], sites[e.j]));
        t.push((e.i, e.j, -w));
        t.push((e.j, e.i, -w));
        t.push((e.i, e.i, w));
        t.push((e.j, e.j, w));
    }
    CsrMatrix::from_triplets(problem.len(), t)
}

#[derive(Debug, Clone)]
pub struct OtOptions {
    /// Stop once `max |w_i - nu_i| <= tolerance`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Starting heights; the Voronoi heights when absent.
    pub initial_heights: Option<Vec<f64>>,
}

impl Default for OtOptions {
    fn default() -> Self {
        OtOptions {
            tolerance: 1e-6,
            max_iterations: 200,
            max_halvings: 40,
            initial_heights: None,
        }
    }
}

/// State after an accepted step; iteration 0 is the starting point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OtIteration {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
    /// Accepted step scale (0 for the starting point).
    pub step: f64,
    /// Empty cells produced by the full Newton step.
    pub empty_cells: usize,
}

#[derive(Debug, Clone)]
pub struct OtSolution {
    pub heights: Vec<f64>,
    pub diagram: PowerDiagram,
    pub log: Vec<OtIteration>,
}

impl OtSolution {
    pub fn grad_norm(&self) -> f64 {
        self.log.last().map_or(f64::INFINITY, |it| it.grad_norm)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton on the heights. Each step solves `H d = grad E` with the
/// last height pinned, then halves `lambda` in `h - lambda d` until no cell
/// is empty and the energy decreases.
pub fn solve_ot(problem: &OtProblem, opts: &OtOptions) -> Result<OtSolution> {
    let k = problem.len();
    if !(opts.tolerance > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let mut h = match &opts.initial_heights {
        Some(h0) if h0.len() != k => {
            return Err(Error::Invalid(format!("{} initial heights for {k} sites", h0.len())));
        }
        Some(h0) => h0.clone(),
        None => problem.voronoi_heights(),
    };
    let mut diagram = power_diagram(problem.sites(), &h)?;
    if let Some(&i) = diagram.empty_cells().first() {
        return Err(Error::EmptyCell(i));
    }
    let mut grad = ot_gradient(problem, &diagram);
    let mut energy = ot_energy_of(problem, &diagram);
    let mut log = vec![OtIteration {
        iteration: 0,
        energy,
        grad_norm: inf_norm(&grad),
        step: 0.0,
        empty_cells: 0,
    }];

    for iteration in 1..=opts.max_iterations {
        if inf_norm(&grad) <= opts.tolerance {
            break;
        }
        let hess = ot_hessian(problem, &diagram);
        let delta = solve_pinned(&hess, &grad, k - 1, 1e-12)?;
        let mut step = 1.0;
        let mut first_empty = None;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = h.iter().zip(&delta).map(|(h, d)| h - step * d).collect();
            let d = power_diagram(problem.sites(), &trial)?;
            let empty = d.empty_cells().len();
            first_empty.get_or_insert(empty);
            if empty == 0 {
                let e = ot_energy_of(problem, &d);
                if e < energy {
                    accepted = Some((trial, d, e));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, d, e)) = accepted else {
            return Err(Error::StepUnderflow {
                solver: "optimal transport",
                halvings: opts.max_halvings,
            });
        };
        h = trial;
        diagram = d;
        energy = e;
        grad = ot_gradient(problem, &diagram);
        let grad_norm = inf_norm(&grad);
        debug!("ot iteration {iteration}: energy {energy}, |grad| {grad_norm:e}, step {step}");
        log.push(OtIteration {
            iteration,
            energy,
            grad_norm,
            step,
            empty_cells: first_empty.unwrap_or(0),
        });
    }
    let residual = inf_norm(&grad);
    if residual > opts.tolerance {
        return Err(Error::NoConvergence {
            solver: "optimal transport",
            iterations: opts.max_iterations,
            residual,
        });
    }
    Ok(OtSolution {
        heights: h,
        diagram,
        log,
    })
}

/// Moves every vertex to the centroid of its power cell.
pub fn area_preserving_uv(mesh: &Mesh, conformal: &ParamMap, solution: &OtSolution) -> Result<ParamMap> {
    let cells = &solution.diagram.cells;
    if cells.len() != mesh.vertex_count() || conformal.uv.len() != mesh.vertex_count() {
        return Err(Error::Invalid(format!(
            "{} cells and {} uv entries for {} vertices",
            cells.len(),
            conformal.uv.len(),
            mesh.vertex_count()
        )));
    }
    let mut uv = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            return Err(Error::EmptyCell(i));
        }
        uv.push([cell.centroid[0].clamp(0.0, 1.0), cell.centroid[1].clamp(0.0, 1.0)]);
    }
    Ok(ParamMap {
        uv,
        stage: Stage::AreaPreserving,
        corners: conformal.corners,
    })
}

pub fn write_log_csv<W: Write>(log: &[OtIteration], mut out: W) -> std::io::Result<()> {
    writeln!(out, "iteration,energy,grad_inf_norm,lambda,empty_cells")?;
    for it in log {
        writeln!(
            out,
            "{},{},{},{},{}",
            it.iteration, it.energy, it.grad_norm, it.step, it.empty_cells
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(nu: [f64; 2]) -> OtProblem {
        OtProblem::new(vec![[0.25, 0.5], [0.75, 0.5]], nu.to_vec()).unwrap()
    }

    fn random_problem(k: usize, seed: u64) -> OtProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = (0..k).map(|_| [rng.random(), rng.random()]).collect();
        let raw: Vec<f64> = (0..k).map(|_| 0.5 + rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        OtProblem::new(sites, raw.iter().map(|x| x / s).collect()).unwrap()
    }

    #[test]
    fn single_site_energy() {
        let p = OtProblem::new(vec![[0.5, 0.5]], vec![1.0]).unwrap();
        assert!((ot_energy(&p, &[0.0]).unwrap() - 0.5).abs() < 1e-15);
        let sol = solve_ot(&p, &OtOptions::default()).unwrap();
        assert_eq!(sol.log.len(), 1);
        assert_eq!(sol.diagram.cells[0].area, 1.0);
    }

    #[test]
    fn energy_is_shift_invariant() {
        let p = random_problem(6, 1);
        let h = p.voronoi_heights();
        let shifted: Vec<f64> = h.iter().map(|x| x + 0.37).collect();
        let a = ot_energy(&p, &h).unwrap();
        let b = ot_energy(&p, &shifted).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn gradient_of_symmetric_pair() {
        let p = pair([0.25, 0.75]);
        let d = power_diagram(p.sites(), &p.voronoi_heights()).unwrap();
        let g = ot_gradient(&p, &d);
        assert!((g[0] - 0.25).abs() < 1e-15 && (g[1] + 0.25).abs() < 1e-15);
        let h = ot_hessian(&p, &d).to_dense();
        assert!((h[0][1] + 2.0).abs() < 1e-14 && (h[0][0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_energy_differences() {
        for seed in 0..5 {
            let p = random_problem(5, seed);
            let h = p.voronoi_heights();
            let d = power_diagram(p.sites(), &h).unwrap();
            let g = ot_gradient(&p, &d);
            let step = 1e-6;
            for i in 0..5 {
                let mut up = h.clone();
                let mut dn = h.clone();
                up[i] += step;
                dn[i] -= step;
                let fd = (ot_energy(&p, &up).unwrap() - ot_energy(&p, &dn).unwrap()) / (2.0 * step);
                assert!((fd - g[i]).abs() < 1e-6, "seed {seed}, i {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn pair_converges_to_analytic_bisector() {
        let p = pair([0.25, 0.75]);
        let sol = solve_ot(&p, &OtOptions::default()).unwrap();
        let a = sol.diagram.areas();
        assert!((a[0] - 0.25).abs() < 1e-8);
        let xmax = sol.diagram.cells[0].polygon.iter().map(|q| q[0]).fold(0.0, f64::max);
        assert!((xmax - 0.25).abs() < 1e-8);
        // raw heights: 0.5 x = h1 - h2 at the bisector
        assert!((sol.heights[0] - sol.heights[1] - 0.125).abs() < 1e-8);
        for w in sol.log.windows(2) {
            assert!(w[1].energy < w[0].energy);
        }
    }

    #[test]
    fn csv_has_one_row_per_logged_iteration() {
        let sol = solve_ot(&random_problem(20, 3), &OtOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_log_csv(&sol.log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), sol.log.len() + 1);
        assert!(text.starts_with("iteration,energy,grad_inf_norm,lambda,empty_cells\n"));
    }

    #[test]
    fn problem_validation() {
        assert!(OtProblem::new(vec![[0.5, 0.5]], vec![0.5]).is_err());
        assert!(OtProblem::new(vec![[1.5, 0.5]], vec![1.0]).is_err());
        assert!(OtProblem::new(vec![[0.5, 0.5], [0.2, 0.2]], vec![1.0, 0.0]).is_err());
        assert!(matches!(
            OtProblem::new(vec![[0.5, 0.5], [0.5, 0.5]], vec![0.5, 0.5]),
            Err(Error::DuplicateSites(0, 1))
        ));
    }
}
