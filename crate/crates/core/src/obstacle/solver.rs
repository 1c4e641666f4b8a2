use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::DiscreteProblem;
use crate::convex::{lower_convex_envelope, ma_atoms, MaAtomTable, PLConvexFunction, Point};
use crate::geom::{self, LabeledPolygon, P2};
use crate::linalg::{conjugate_gradient, SymSparse};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// Damped Newton on the atom equations, kept inside the subsolution set.
    Newton,
    /// Node-by-node bisection lifting, sequential.
    GaussSeidel,
    /// Node-by-node bisection lifting from a frozen snapshot.
    Jacobi,
}

impl SolverMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverMode::Newton => "newton",
            SolverMode::GaussSeidel => "gauss_seidel",
            SolverMode::Jacobi => "jacobi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub mode: SolverMode,
    /// Target for the largest relative atom excess `(atom − μ)/μ` at free nodes.
    pub tol: f64,
    /// Newton iterations or lifting sweeps.
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolverMode::Newton,
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

/// One accepted update of the lifting.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub method: &'static str,
    /// Largest relative atom excess at free nodes before the update.
    pub residual: f64,
    /// Smallest `atom/μ` over interior nodes after the update.
    pub min_ratio: f64,
    pub max_lift: f64,
    pub step: f64,
    pub contacts: usize,
    /// No node value decreased.
    pub monotone: bool,
    /// Values stay below the obstacle and equal the data on the boundary.
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub values: Vec<f64>,
    pub function: PLConvexFunction,
    pub atoms: MaAtomTable,
    pub contact: Vec<bool>,
    pub history: Vec<IterationRecord>,
    pub residual: f64,
    pub mode: SolverMode,
}

impl DiscreteSolution {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// `atom_i/μ_i − 1` at interior node `i`.
    pub fn relative_excess(&self, problem: &DiscreteProblem, i: usize) -> f64 {
        self.atoms.atoms[i] / problem.mu[i] - 1.0
    }
}

/// Atoms may fall below `μ` by this relative amount through rounding.
const ACCEPT_SLACK: f64 = 1e-12;
const MAX_HALVINGS: usize = 12;

struct State {
    values: Vec<f64>,
    function: PLConvexFunction,
    atoms: MaAtomTable,
}

impl State {
    fn new(problem: &DiscreteProblem, values: Vec<f64>) -> Result<State> {
        let function = lower_convex_envelope(&problem.cloud, &values)?;
        let atoms = ma_atoms(&function)?;
        Ok(State {
            values,
            function,
            atoms,
        })
    }

    /// Every interior node is a hull vertex with atom at least `μ`.
    fn min_ratio(&self, problem: &DiscreteProblem) -> f64 {
        interior(problem)
            .map(|i| {
                if self.function.is_vertex(i) {
                    self.atoms.atoms[i] / problem.mu[i]
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn residual(&self, problem: &DiscreteProblem, contact: &[bool]) -> f64 {
        interior(problem)
            .map(|i| {
                let r = self.atoms.atoms[i] / problem.mu[i] - 1.0;
                if contact[i] {
                    (-r).max(0.0)
                } else {
                    r.abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

fn interior(problem: &DiscreteProblem) -> impl Iterator<Item = usize> + '_ {
    (0..problem.len()).filter(|&i| !problem.cloud.tag(i).is_boundary())
}

/// Largest discrete subsolution below the obstacle with the prescribed
/// boundary values, reached by monotone lifting from `problem.initial`.
pub fn solve(problem: &DiscreteProblem, options: &SolveOptions) -> Result<DiscreteSolution> {
    if !(options.tol > 0.0) {
        return Err(Error::Config("solver tolerance must be positive".into()));
    }
    let n = problem.len();
    let mut values = problem.initial.clone();
    for i in 0..n {
        if problem.cloud.tag(i).is_boundary() {
            values[i] = problem.boundary_values[i];
        }
        values[i] = values[i].min(problem.obstacle[i]);
    }
    let mut state = State::new(problem, values)?;
    let start = state.min_ratio(problem);
    if start < 1.0 - 1e-9 {
        return Err(Error::Config(format!(
            "starting function is not a subsolution (min atom/mu = {start})"
        )));
    }
    let mut contact: Vec<bool> = (0..n).map(|i| at_obstacle(state.values[i], problem.obstacle[i])).collect();
    let mut history = Vec::new();
    let mut newton = NewtonControl::default();
    let mut residual = state.residual(problem, &contact);
    for iteration in 0..options.max_iter {
        if residual <= options.tol {
            break;
        }
        let (next, method, step) = match options.mode {
            SolverMode::Newton => match newton_step(problem, &state, &contact, residual, options.tol, &mut newton)? {
                Some((s, step)) => (s, "newton", step),
                None => (local_sweep(problem, &state, &contact, true)?, "jacobi", 1.0),
            },
            SolverMode::GaussSeidel => (local_sweep(problem, &state, &contact, false)?, "gauss_seidel", 1.0),
            SolverMode::Jacobi => (local_sweep(problem, &state, &contact, true)?, "jacobi", 1.0),
        };
        let mut monotone = true;
        let mut feasible = true;
        let mut max_lift: f64 = 0.0;
        for i in 0..n {
            let lift = next.values[i] - state.values[i];
            monotone &= lift >= 0.0;
            max_lift = max_lift.max(lift);
            feasible &= next.values[i] <= problem.obstacle[i];
            if problem.cloud.tag(i).is_boundary() {
                feasible &= next.values[i] == problem.boundary_values[i];
            }
        }
        for i in 0..n {
            contact[i] |= at_obstacle(next.values[i], problem.obstacle[i]);
        }
        state = next;
        let previous = residual;
        residual = state.residual(problem, &contact);
        history.push(IterationRecord {
            iteration,
            method,
            residual: previous,
            min_ratio: state.min_ratio(problem),
            max_lift,
            step,
            contacts: contact.iter().filter(|c| **c).count(),
            monotone,
            feasible,
        });
        if max_lift == 0.0 && options.mode != SolverMode::Newton {
            break;
        }
    }
    if residual > options.tol {
        return Err(Error::NonConvergence {
            iterations: history.len(),
            residual,
            history: history.iter().map(|r| r.residual).collect(),
        });
    }
    Ok(DiscreteSolution {
        values: state.values,
        function: state.function,
        atoms: state.atoms,
        contact,
        history,
        residual,
        mode: options.mode,
    })
}

fn at_obstacle(value: f64, obstacle: f64) -> bool {
    obstacle.is_finite() && value >= obstacle - 1e-14 * (1.0 + obstacle.abs())
}

/// Newton aims at `μ(1 + η)` with `η = κ·residual` (at most `1/2`) so that
/// the overshoot of the linear model stays inside the subsolution set; nodes
/// below the target pull their lift to zero. `κ` adapts to the overshoot.
struct NewtonControl {
    kappa: f64,
}

impl Default for NewtonControl {
    fn default() -> Self {
        NewtonControl { kappa: 0.25 }
    }
}

fn newton_step(
    problem: &DiscreteProblem,
    state: &State,
    contact: &[bool],
    residual: f64,
    tol: f64,
    control: &mut NewtonControl,
) -> Result<Option<(State, f64)>> {
    let n = problem.len();
    let movable: Vec<bool> = (0..n)
        .map(|i| !problem.cloud.tag(i).is_boundary() && !contact[i])
        .collect();
    if !movable.iter().any(|m| *m) {
        return Ok(None);
    }
    let weights = stiffness(&state.function);
    let mut incident = vec![Vec::new(); n];
    for &((i, j), w) in &weights {
        incident[i].push((j, w));
        incident[j].push((i, w));
    }
    for _ in 0..4 {
        let eta = (control.kappa * residual).clamp(0.25 * tol, 0.5);
        let lift = constrained_lift(problem, state, &movable, &incident, eta);
        let mut tau = 1.0;
        for _ in 0..MAX_HALVINGS {
            let mut values = state.values.clone();
            for i in 0..n {
                if movable[i] {
                    values[i] = (values[i] + tau * lift[i]).min(problem.obstacle[i]);
                }
            }
            let trial = State::new(problem, values)?;
            if trial.min_ratio(problem) >= 1.0 - ACCEPT_SLACK {
                if tau == 1.0 {
                    control.kappa = (control.kappa * 0.5).max(1e-3);
                }
                return Ok(Some((trial, tau)));
            }
            tau *= 0.5;
        }
        control.kappa = (control.kappa * 2.0).min(0.5);
    }
    Ok(None)
}

/// Newton lift towards atoms `μ(1 + η)` with lifts kept in `[0, g − u]`:
/// nodes whose solved lift leaves that range are pinned at the violated bound
/// and the remaining nodes are solved again.
fn constrained_lift(
    problem: &DiscreteProblem,
    state: &State,
    movable: &[bool],
    incident: &[Vec<(usize, f64)>],
    eta: f64,
) -> Vec<f64> {
    let n = problem.len();
    let mut pinned: Vec<Option<f64>> = vec![None; n];
    let mut lift = vec![0.0; n];
    for _ in 0..8 {
        let order: Vec<usize> = (0..n).filter(|&i| movable[i] && pinned[i].is_none()).collect();
        let mut index = vec![usize::MAX; n];
        for (k, &i) in order.iter().enumerate() {
            index[i] = k;
        }
        let mut a = SymSparse::new(order.len());
        let mut rhs = Vec::with_capacity(order.len());
        for (k, &i) in order.iter().enumerate() {
            let mut b = state.atoms.atoms[i] - problem.mu[i] * (1.0 + eta);
            for &(j, w) in &incident[i] {
                a.diag[k] += w;
                if index[j] != usize::MAX {
                    a.off[k].push((index[j], -w));
                } else if let Some(l) = pinned[j] {
                    b += w * l;
                }
            }
            rhs.push(b);
        }
        let dmax = a.diag.iter().fold(0.0f64, |m, d| m.max(*d));
        for d in a.diag.iter_mut() {
            *d += 1e-14 * dmax.max(1e-300);
        }
        let (delta, _) = conjugate_gradient(&a, &rhs, 1e-12, 20 * order.len() + 100);
        let mut changed = false;
        for (k, &i) in order.iter().enumerate() {
            let room = problem.obstacle[i] - state.values[i];
            if delta[k] < 0.0 {
                pinned[i] = Some(0.0);
                changed = true;
            } else if delta[k] > room {
                pinned[i] = Some(room);
                changed = true;
            }
            lift[i] = delta[k].clamp(0.0, room.max(0.0));
        }
        for i in 0..n {
            if let Some(l) = pinned[i] {
                lift[i] = l;
            }
        }
        if !changed {
            break;
        }
    }
    lift
}

/// `∂atom_i/∂u_j` for every edge: measure of the dual face of the edge in
/// gradient space over the edge length.
fn stiffness(f: &PLConvexFunction) -> Vec<((usize, usize), f64)> {
    let dim = f.dim();
    let nodes = f.cloud().nodes();
    let mut rings: BTreeMap<(usize, usize), Vec<Point>> = BTreeMap::new();
    for facet in f.facets() {
        let ids = &facet.nodes;
        for a in 0..ids.len() {
            for b in (a + 1)..ids.len() {
                let key = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                rings.entry(key).or_default().push(facet.gradient);
            }
        }
    }
    rings
        .into_iter()
        .filter_map(|((i, j), grads)| {
            let e = [
                nodes[j][0] - nodes[i][0],
                nodes[j][1] - nodes[i][1],
                nodes[j][2] - nodes[i][2],
            ];
            let len = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
            let face = if dim == 2 {
                if grads.len() != 2 {
                    return None;
                }
                let d = [grads[0][0] - grads[1][0], grads[0][1] - grads[1][1]];
                (d[0] * d[0] + d[1] * d[1]).sqrt()
            } else {
                if grads.len() < 3 {
                    return None;
                }
                let (u, v) = plane_basis(&[e[0] / len, e[1] / len, e[2] / len]);
                let proj: Vec<P2> = grads
                    .iter()
                    .map(|g| [g[0] * u[0] + g[1] * u[1] + g[2] * u[2], g[0] * v[0] + g[1] * v[1] + g[2] * v[2]])
                    .collect();
                geom::area(&geom::convex_hull(&proj))
            };
            Some(((i, j), face / len))
        })
        .collect()
}

fn plane_basis(e: &Point) -> (Point, Point) {
    let a = if e[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let mut u = [
        e[1] * a[2] - e[2] * a[1],
        e[2] * a[0] - e[0] * a[2],
        e[0] * a[1] - e[1] * a[0],
    ];
    let un = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    for c in u.iter_mut() {
        *c /= un;
    }
    let v = [
        e[1] * u[2] - e[2] * u[1],
        e[2] * u[0] - e[0] * u[2],
        e[0] * u[1] - e[1] * u[0],
    ];
    (u, v)
}

/// One sweep of node-wise lifting: each free node is raised to the largest
/// value whose atom is still at least `μ`, capped by the obstacle.
fn local_sweep(problem: &DiscreteProblem, state: &State, contact: &[bool], frozen: bool) -> Result<State> {
    let f = &state.function;
    let n = problem.len();
    let ring: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = f.neighbors(i);
            if problem.dim() == 2 && !frozen {
                // stale one-rings miss edges created earlier in the sweep
                for j in f.neighbors(i) {
                    r.extend(f.neighbors(j));
                }
                r.sort_unstable();
                r.dedup();
                r.retain(|&j| j != i);
            }
            r
        })
        .collect();
    let free = |i: usize| !problem.cloud.tag(i).is_boundary() && !contact[i];
    let mut values = state.values.clone();
    if frozen {
        let lifted: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                if free(i) {
                    lift_node(problem, &state.values, &ring[i], i)
                } else {
                    state.values[i]
                }
            })
            .collect();
        values = lifted;
    } else {
        for i in 0..n {
            if free(i) {
                values[i] = lift_node(problem, &values, &ring[i], i);
            }
        }
    }
    State::new(problem, values)
}

/// Largest `t ∈ [u_i, g_i]` with `|∂u(x_i)| ≥ μ_i` when `u_i = t`, others fixed.
fn lift_node(problem: &DiscreteProblem, values: &[f64], ring: &[usize], i: usize) -> f64 {
    let mu = problem.mu[i];
    let cap = problem.obstacle[i];
    let atom = |t: f64| local_atom(problem, values, ring, i, t);
    let lo0 = values[i];
    if atom(lo0) < mu {
        return lo0;
    }
    if cap.is_finite() && atom(cap) >= mu {
        return cap;
    }
    let spread = ring
        .iter()
        .map(|&j| (values[j] - lo0).abs())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let mut hi = lo0 + spread;
    let mut guard = 0;
    while (!cap.is_finite() || hi < cap) && atom(hi) >= mu && guard < 60 {
        hi = lo0 + 2.0 * (hi - lo0);
        guard += 1;
    }
    if cap.is_finite() {
        hi = hi.min(cap);
    }
    let mut lo = lo0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if atom(mid) >= mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Area/volume of `{p : ⟨p, x_j − x_i⟩ ≤ u_j − t, j ∈ ring}`.
fn local_atom(problem: &DiscreteProblem, values: &[f64], ring: &[usize], i: usize, t: f64) -> f64 {
    let nodes = problem.cloud.nodes();
    let xi = nodes[i];
    if problem.dim() == 2 {
        let mut bound: f64 = 1.0;
        for &j in ring {
            let d = ((nodes[j][0] - xi[0]).powi(2) + (nodes[j][1] - xi[1]).powi(2)).sqrt();
            bound = bound.max((values[j] - t).abs() / d);
        }
        let b = 1e3 * bound;
        let mut cell = LabeledPolygon::from_domain(&geom::square(-b, b));
        for &j in ring {
            cell.clip(
                [nodes[j][0] - xi[0], nodes[j][1] - xi[1]],
                values[j] - t,
                j as i64,
            );
            if cell.is_empty() {
                return 0.0;
            }
        }
        if cell.labels.iter().any(|l| *l < 0) {
            return f64::INFINITY;
        }
        return cell.area();
    }
    let normals: Vec<[f64; 3]> = ring
        .iter()
        .map(|&j| [nodes[j][0] - xi[0], nodes[j][1] - xi[1], nodes[j][2] - xi[2]])
        .collect();
    let offsets: Vec<f64> = ring.iter().map(|&j| values[j] - t).collect();
    geom::halfspace_polytope_volume(3, &normals, &offsets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{NodeTag, PointCloud};

    /// Square grid on `[-1, 1]²` with boundary data `|x|²/2` and Lebesgue masses.
    fn quadratic_problem(m: i32, obstacle: impl Fn(&Point) -> f64) -> DiscreteProblem {
        let h = 1.0 / m as f64;
        let mut nodes = Vec::new();
        let mut tags = Vec::new();
        for i in -m..=m {
            for j in -m..=m {
                nodes.push([i as f64 * h, j as f64 * h, 0.0]);
                tags.push(if i.abs() == m || j.abs() == m {
                    NodeTag::Boundary
                } else {
                    NodeTag::Interior
                });
            }
        }
        let cloud = PointCloud::new(2, nodes, tags).unwrap();
        let q = |p: &Point| 0.5 * (p[0] * p[0] + p[1] * p[1]);
        let n = cloud.len();
        let boundary: Vec<f64> = (0..n)
            .map(|i| if cloud.tag(i).is_boundary() { q(&cloud.node(i)) } else { f64::NAN })
            .collect();
        let obst: Vec<f64> = (0..n).map(|i| obstacle(&cloud.node(i))).collect();
        let init: Vec<f64> = (0..n)
            .map(|i| {
                let x = cloud.node(i);
                if cloud.tag(i).is_boundary() {
                    q(&x)
                } else {
                    (x[0] * x[0] + x[1] * x[1] - 2.0).min(obst[i])
                }
            })
            .collect();
        DiscreteProblem::new(cloud, vec![h * h; n], boundary, obst, init).unwrap()
    }

    #[test]
    fn newton_recovers_the_quadratic() {
        let p = quadratic_problem(8, |_| f64::INFINITY);
        let s = solve(&p, &SolveOptions::default()).unwrap();
        for i in 0..p.len() {
            let x = p.cloud.node(i);
            assert!((s.values[i] - 0.5 * (x[0] * x[0] + x[1] * x[1])).abs() < 1e-8, "{i}");
        }
        assert!(s.history.iter().all(|r| r.monotone && r.feasible));
    }

    #[test]
    fn reference_modes_agree_with_newton() {
        let g = |x: &Point| if x[0] == 0.0 && x[1].abs() <= 0.25 { -0.05 } else { f64::INFINITY };
        let p = quadratic_problem(4, g);
        let tol = 1e-9;
        let newton = solve(&p, &SolveOptions { tol, ..Default::default() }).unwrap();
        for mode in [SolverMode::GaussSeidel, SolverMode::Jacobi] {
            let s = solve(
                &p,
                &SolveOptions {
                    mode,
                    tol,
                    max_iter: 20000,
                },
            )
            .unwrap();
            let gap = s
                .values
                .iter()
                .zip(&newton.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(gap < 1e-6, "{mode:?}: {gap}");
            assert!(s.history.iter().all(|r| r.monotone && r.feasible));
        }
        assert!(newton.contact.iter().any(|c| *c));
    }

    #[test]
    fn non_subsolution_start_is_rejected() {
        let mut p = quadratic_problem(4, |_| f64::INFINITY);
        for i in 0..p.len() {
            if !p.cloud.tag(i).is_boundary() {
                p.initial[i] = 0.5;
            }
        }
        assert!(matches!(solve(&p, &SolveOptions::default()), Err(Error::Config(_))));
    }
}
