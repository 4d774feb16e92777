//! Empirical convergence studies: error ladders against a finer reference
//! run and least-squares rate estimation on log2-log2 data.
//!
//! Two ladders are provided.  The time ladder fixes the mesh and refines the
//! step size, measuring (a) the field at an off-boundary observation point in
//! the max-over-time norm and (b) the boundary densities at the final time in
//! the discrete tangential L2 norm.  The space ladder fixes the step size and
//! refines the mesh, measuring the final-time densities against the
//! finest-level run in the tangential L2 norm and in a graph-norm surrogate
//! (L2 plus surface-divergence L2).  Fields on different sphere meshes are
//! compared through central projection onto the reference triangulation.

use crate::cq::{radau_tableau, CQGrid};
use crate::error::{Error, Result};
use crate::materials::MaterialPair;
use crate::mesh::{icosphere, Point, RTSpace};
use crate::ops::{PotentialTargets, QuadConfig};
use crate::quad::tri_rule;
use crate::scattering::{
    reconstruct_fields, solve_scattering, IncidentWave, ScatterRun,
};
use crate::materials::Side;
use nalgebra::Matrix3;

/// One ladder entry.
#[derive(Debug, Clone)]
pub struct RateRow {
    /// Discretization parameter: the step size for time ladders, the mesh
    /// width for space ladders.
    pub parameter: f64,
    /// Problem size: the number of steps or the number of unknowns.
    pub size: usize,
    pub error: f64,
}

/// A fitted error ladder.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log2(error)` against `log2(parameter)`.
    pub slope: f64,
    /// Standard error of the fitted slope (0 for a two-point fit).
    pub stderr: f64,
    /// Whether the errors decay monotonically along the ladder.
    pub monotone: bool,
    /// Human-readable description of the reference solution.
    pub reference: String,
}

impl ConvergenceReport {
    pub fn from_rows(rows: Vec<RateRow>, reference: impl Into<String>) -> Result<Self> {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.parameter, r.error)).collect();
        let (slope, stderr) = fit_order(&pts)?;
        let monotone = rows.windows(2).all(|w| w[1].error < w[0].error);
        Ok(Self { rows, slope, stderr, monotone, reference: reference.into() })
    }
}

/// Least-squares slope (with its standard error) of `log2 err` against
/// `log2 parameter`.  Needs at least two points with positive entries.
pub fn fit_order(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs at least two ladder points, got {}",
            points.len()
        )));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(p, e) in points {
        if !(p > 0.0) || !(e > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rate fit needs positive parameters and errors, got ({p}, {e})"
            )));
        }
        xs.push(p.log2());
        ys.push(e.log2());
    }
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all ladder parameters coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let dof = xs.len() as i64 - 2;
    let stderr = if dof > 0 {
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| {
                let r = y - (intercept + slope * x);
                r * r
            })
            .sum();
        (ss_res / dof as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, stderr))
}

/// Shared physical setup of a ladder (everything except the discretization).
#[derive(Debug, Clone)]
pub struct LadderSetup {
    pub interior: MaterialPair,
    pub exterior: MaterialPair,
    pub wave: IncidentWave,
    pub quad: QuadConfig,
    /// Final time `T` of the simulation window.
    pub t_final: f64,
}

/// Time-refinement study on a fixed mesh.
#[derive(Debug, Clone)]
pub struct TimeLadder {
    pub setup: LadderSetup,
    /// Runge-Kutta stage count.
    pub stages: usize,
    /// Step counts of the ladder, strictly increasing; each must divide the
    /// reference count.
    pub n_list: Vec<usize>,
    pub reference_n: usize,
    /// Exterior observation point for the field error.
    pub observation_point: Point,
}

/// The two reports of a time study.
#[derive(Debug, Clone)]
pub struct TimeStudy {
    /// Max-over-time field error at the observation point.
    pub field: ConvergenceReport,
    /// Discrete tangential L2 error of the densities at the final time.
    pub density: ConvergenceReport,
}

fn density_l2(space: &RTSpace, diff: &[f64]) -> f64 {
    let n = space.n_dofs();
    let mut total = 0.0;
    for b in 0..4 {
        let e = space.l2_norm(&diff[b * n..(b + 1) * n]);
        total += e * e;
    }
    total.sqrt()
}

pub fn converge_time(space: &RTSpace, ladder: &TimeLadder) -> Result<TimeStudy> {
    if ladder.n_list.len() < 2 {
        return Err(Error::InvalidParameter("time ladder needs at least two step counts".into()));
    }
    if !ladder.n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("time ladder step counts must increase".into()));
    }
    for &n in &ladder.n_list {
        if ladder.reference_n % n != 0 || n >= ladder.reference_n {
            return Err(Error::InvalidParameter(format!(
                "step count {n} must properly divide the reference count {}",
                ladder.reference_n
            )));
        }
    }
    let targets = PotentialTargets::new(
        vec![ladder.observation_point],
        vec![Side::Exterior],
        &space.mesh,
    )?;
    let tableau = radau_tableau(ladder.stages)?;
    let run_once = |n: usize| -> Result<(Vec<f64>, Vec<(Point, Point)>)> {
        let run = ScatterRun {
            space,
            interior: ladder.setup.interior.clone(),
            exterior: ladder.setup.exterior.clone(),
            tableau: tableau.clone(),
            grid: CQGrid::new(ladder.setup.t_final, n)?,
            wave: ladder.setup.wave.clone(),
            quad: ladder.setup.quad.clone(),
        };
        let hist = solve_scattering(&run)?;
        let frames = reconstruct_fields(&run, &hist, &targets)?;
        let final_density = hist.signal.point_value(n).to_vec();
        Ok((final_density, frames.into_iter().map(|f| (f.e[0], f.h[0])).collect()))
    };

    let (ref_density, ref_frames) = run_once(ladder.reference_n)?;
    let mut field_rows = Vec::new();
    let mut density_rows = Vec::new();
    for &n in &ladder.n_list {
        let (density, frames) = run_once(n)?;
        let stride = ladder.reference_n / n;
        let field_err = frames
            .iter()
            .enumerate()
            .map(|(k, (e, h))| {
                let (re, rh) = &ref_frames[k * stride];
                (e - re).norm().max((h - rh).norm())
            })
            .fold(0.0_f64, f64::max);
        let diff: Vec<f64> = density.iter().zip(&ref_density).map(|(a, b)| a - b).collect();
        let tau = ladder.setup.t_final / n as f64;
        field_rows.push(RateRow { parameter: tau, size: n, error: field_err });
        density_rows.push(RateRow { parameter: tau, size: n, error: density_l2(space, &diff) });
    }
    let reference = format!("self-reference with N = {}", ladder.reference_n);
    Ok(TimeStudy {
        field: ConvergenceReport::from_rows(field_rows, reference.clone())?,
        density: ConvergenceReport::from_rows(density_rows, reference)?,
    })
}

/// Mesh-refinement study on the unit-sphere geometry at a fixed step count.
#[derive(Debug, Clone)]
pub struct SpaceLadder {
    pub setup: LadderSetup,
    pub stages: usize,
    pub n_steps: usize,
    /// Icosphere subdivision levels of the ladder, strictly increasing.
    pub levels: Vec<usize>,
    pub reference_level: usize,
    pub radius: f64,
}

/// The two reports of a space study.
#[derive(Debug, Clone)]
pub struct SpaceStudy {
    /// Tangential L2 error of the final-time densities.
    pub trace: ConvergenceReport,
    /// Graph-norm surrogate: tangential L2 plus surface-divergence L2.
    pub graph: ConvergenceReport,
}

/// Evaluates an RT0 coefficient field on a sphere mesh at an arbitrary
/// direction through central projection: the triangle pierced by the ray
/// `r -> r xhat` is located, and the basis is evaluated at the piercing
/// point of its plane.
pub struct SphereEvaluator<'a> {
    space: &'a RTSpace,
    /// Per-triangle inverse of the vertex matrix, for barycentric solves.
    inverses: Vec<Matrix3<f64>>,
}

impl<'a> SphereEvaluator<'a> {
    pub fn new(space: &'a RTSpace) -> Result<Self> {
        let mut inverses = Vec::with_capacity(space.mesh.n_triangles());
        for tri in &space.mesh.triangles {
            let m = Matrix3::from_columns(&[
                space.mesh.vertices[tri[0]],
                space.mesh.vertices[tri[1]],
                space.mesh.vertices[tri[2]],
            ]);
            let inv = m.try_inverse().ok_or_else(|| {
                Error::Mesh("degenerate triangle in sphere evaluator".into())
            })?;
            inverses.push(inv);
        }
        Ok(Self { space, inverses })
    }

    /// Locate the triangle pierced by the ray through `xhat` and return the
    /// piercing point.  The best candidate (largest minimal barycentric
    /// coordinate) is used, which is robust on shared edges.
    fn locate(&self, xhat: &Point) -> (usize, Point) {
        let mut best = (0usize, f64::NEG_INFINITY, Point::zeros());
        for (t, inv) in self.inverses.iter().enumerate() {
            let c = inv * xhat;
            let s = c.x + c.y + c.z;
            if s <= 0.0 {
                continue;
            }
            let lam = c / s;
            let min_bary = lam.x.min(lam.y).min(lam.z);
            if min_bary > best.1 {
                let tri = self.space.mesh.triangles[t];
                let point = self.space.mesh.vertices[tri[0]] * lam.x
                    + self.space.mesh.vertices[tri[1]] * lam.y
                    + self.space.mesh.vertices[tri[2]] * lam.z;
                best = (t, min_bary, point);
            }
        }
        (best.0, best.2)
    }

    /// Field value and surface divergence of the coefficient vector at the
    /// triangle pierced along `xhat`.
    pub fn value_and_div(&self, coeffs: &[f64], xhat: &Point) -> (Point, f64) {
        let (t, x) = self.locate(xhat);
        let value = self.space.eval(coeffs, t, &x);
        let div: f64 = (0..3)
            .map(|k| self.space.basis_div(t, k) * coeffs[self.space.tri_edges[t][k].0])
            .sum();
        (value, div)
    }
}

/// Cross-mesh density error at the final time: tangential L2 and the graph
/// surrogate, integrated over the coarse mesh against the reference field.
fn cross_mesh_errors(
    coarse: &RTSpace,
    coarse_density: &[f64],
    reference: &SphereEvaluator,
    reference_density: &[f64],
) -> (f64, f64) {
    let rule = tri_rule(4);
    let n = coarse.n_dofs();
    let nr = reference.space.n_dofs();
    let mut l2 = 0.0;
    let mut div2 = 0.0;
    for b in 0..4 {
        let cb = &coarse_density[b * n..(b + 1) * n];
        let rb = &reference_density[b * nr..(b + 1) * nr];
        for t in 0..coarse.mesh.n_triangles() {
            let tri = coarse.mesh.triangles[t];
            let (v0, v1, v2) = (
                coarse.mesh.vertices[tri[0]],
                coarse.mesh.vertices[tri[1]],
                coarse.mesh.vertices[tri[2]],
            );
            let div_c: f64 =
                (0..3).map(|k| coarse.basis_div(t, k) * cb[coarse.tri_edges[t][k].0]).sum();
            for &(l1, l2w, w) in &rule {
                let x = v0 * l1 + v1 * l2w + v2 * (1.0 - l1 - l2w);
                let val_c = coarse.eval(cb, t, &x);
                let (val_r, div_r) = reference.value_and_div(rb, &x.normalize());
                let wa = w * coarse.mesh.areas[t];
                l2 += wa * (val_c - val_r).norm_squared();
                div2 += wa * (div_c - div_r) * (div_c - div_r);
            }
        }
    }
    (l2.sqrt(), (l2 + div2).sqrt())
}

pub fn converge_space(ladder: &SpaceLadder) -> Result<SpaceStudy> {
    if ladder.levels.len() < 2 {
        return Err(Error::InvalidParameter("space ladder needs at least two levels".into()));
    }
    if !ladder.levels.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter("space ladder levels must increase".into()));
    }
    if *ladder.levels.last().unwrap() >= ladder.reference_level {
        return Err(Error::InvalidParameter(format!(
            "reference level {} must exceed the finest ladder level",
            ladder.reference_level
        )));
    }
    let tableau = radau_tableau(ladder.stages)?;
    let solve_level = |level: usize| -> Result<(RTSpace, Vec<f64>)> {
        let space = RTSpace::new(icosphere(level, ladder.radius)?, 0)?;
        let run = ScatterRun {
            space: &space,
            interior: ladder.setup.interior.clone(),
            exterior: ladder.setup.exterior.clone(),
            tableau: tableau.clone(),
            grid: CQGrid::new(ladder.setup.t_final, ladder.n_steps)?,
            wave: ladder.setup.wave.clone(),
            quad: ladder.setup.quad.clone(),
        };
        let hist = solve_scattering(&run)?;
        let density = hist.signal.point_value(ladder.n_steps).to_vec();
        Ok((space, density))
    };

    let (ref_space, ref_density) = solve_level(ladder.reference_level)?;
    let evaluator = SphereEvaluator::new(&ref_space)?;
    let mut trace_rows = Vec::new();
    let mut graph_rows = Vec::new();
    for &level in &ladder.levels {
        let (space, density) = solve_level(level)?;
        let (l2, graph) = cross_mesh_errors(&space, &density, &evaluator, &ref_density);
        trace_rows.push(RateRow { parameter: space.mesh.h, size: space.n_dofs(), error: l2 });
        graph_rows.push(RateRow { parameter: space.mesh.h, size: space.n_dofs(), error: graph });
    }
    let reference = format!(
        "self-reference at level {} ({} unknowns)",
        ladder.reference_level,
        ref_space.n_dofs()
    );
    Ok(SpaceStudy {
        trace: ConvergenceReport::from_rows(trace_rows, reference.clone())?,
        graph: ConvergenceReport::from_rows(graph_rows, reference)?,
    })
}
