use serde::{Deserialize, Serialize};

use super::shape::{is_convex_ccw, SampleSet};
use crate::geom::{self, P2};
use crate::linalg::{conjugate_gradient, SymSparse};
use crate::power::{power_diagram, PowerDiagram};
use crate::{Error, Result};

/// Halvings tried on a Newton step before falling back to an ascent step.
const NEWTON_HALVINGS: usize = 30;
/// Halvings tried on an ascent step.
const ASCENT_HALVINGS: usize = 40;
/// Cells must keep this fraction of the smallest prescribed mass, or half of
/// the smallest starting area when the start is below that.
const POSITIVITY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualOptions {
    /// Target for `max_i |area_i − w_i| / w_i`.
    pub tol: f64,
    /// Step budget (Newton and ascent steps together).
    pub max_steps: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions { tol: 1e-7, max_steps: 50 }
    }
}

/// One accepted step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualStep {
    pub step: usize,
    pub method: String,
    /// `‖area − w‖₂` after the step.
    pub residual: f64,
    /// `max_i |area_i − w_i| / w_i` after the step.
    pub max_relative: f64,
    pub damping: f64,
    /// Tiling defect of the accepted diagram.
    pub tiling: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualSolution {
    pub source: Vec<P2>,
    pub sites: Vec<P2>,
    pub masses: Vec<f64>,
    /// Weights `ψ_i`, normalised by `ψ_0 = 0`.
    pub weights: Vec<f64>,
    pub areas: Vec<f64>,
    pub history: Vec<DualStep>,
    /// Final `max_i |area_i − w_i| / w_i`.
    pub residual: f64,
}

impl DualSolution {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn diagram(&self) -> Result<PowerDiagram> {
        power_diagram(&self.sites, &self.weights, &self.source)
    }

    /// `sqrt(|source| / N)`.
    pub fn cell_size(&self) -> f64 {
        (geom::area(&self.source) / self.len() as f64).sqrt()
    }

    /// Index of the cell containing `x`.
    pub fn cell_of(&self, x: P2) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, (p, w)) in self.sites.iter().zip(&self.weights).enumerate() {
            let d = geom::sub(x, *p);
            let v = geom::dot(d, d) - w;
            if v < best.0 {
                best = (v, i);
            }
        }
        best.1
    }

    /// Transport map: the site of the cell containing `x`.
    pub fn map(&self, x: P2) -> P2 {
        self.sites[self.cell_of(x)]
    }
}

struct Iterate {
    weights: Vec<f64>,
    diagram: PowerDiagram,
    norm: f64,
}

impl Iterate {
    fn new(sites: &[P2], weights: Vec<f64>, source: &[P2], masses: &[f64]) -> Result<Iterate> {
        let diagram = power_diagram(sites, &weights, source)?;
        let norm = diagram
            .areas
            .iter()
            .zip(masses)
            .map(|(a, w)| (a - w) * (a - w))
            .sum::<f64>()
            .sqrt();
        Ok(Iterate { weights, diagram, norm })
    }

    fn max_relative(&self, masses: &[f64]) -> f64 {
        self.diagram
            .areas
            .iter()
            .zip(masses)
            .map(|(a, w)| (a - w).abs() / w)
            .fold(0.0, f64::max)
    }

    fn admissible(&self, floor: f64) -> bool {
        self.diagram.areas.iter().all(|a| *a >= floor)
    }
}

/// Weights `ψ` whose power cells in the convex `source` have areas equal to
/// the sample masses: damped Newton on the concave dual, with a
/// Jacobi-scaled ascent step when Newton keeps being rejected.
pub fn solve_dual(source: &[P2], samples: &SampleSet, options: &DualOptions) -> Result<DualSolution> {
    if source.len() < 3 || !is_convex_ccw(source) {
        return Err(Error::Config("source must be a convex counter-clockwise polygon".into()));
    }
    let n = samples.len();
    if n == 0 || samples.masses.len() != n {
        return Err(Error::Config("one mass per site required".into()));
    }
    if !(options.tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {}", options.tol)));
    }
    let area = geom::area(source);
    let total: f64 = samples.masses.iter().sum();
    if (total - area).abs() > 1e-9 * area {
        return Err(Error::Config(format!("masses sum to {total}, source area is {area}")));
    }
    let sites = &samples.sites;
    let masses = &samples.masses;
    let floor_mass = POSITIVITY * masses.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut current = Iterate::new(sites, initial_weights(source, sites), source, masses)?;
    let smallest = current.diagram.areas.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = floor_mass.min(0.5 * smallest);
    let mut history = Vec::new();
    let mut max_rel = current.max_relative(masses);
    let mut step = 0;
    while max_rel > options.tol {
        if step >= options.max_steps {
            return Err(Error::NonConvergence {
                iterations: step,
                residual: max_rel,
                history: history.iter().map(|h: &DualStep| h.max_relative).collect(),
            });
        }
        step += 1;
        let (next, method, damping) = match newton(&current, sites, masses, source, floor)? {
            Some((it, tau)) => (it, "newton", tau),
            None => match ascent(&current, sites, masses, source, floor)? {
                Some((it, tau)) => (it, "ascent", tau),
                None => {
                    return Err(Error::NonConvergence {
                        iterations: step,
                        residual: max_rel,
                        history: history.iter().map(|h| h.max_relative).collect(),
                    })
                }
            },
        };
        current = next;
        max_rel = current.max_relative(masses);
        history.push(DualStep {
            step,
            method: method.into(),
            residual: current.norm,
            max_relative: max_rel,
            damping,
            tiling: current.diagram.tiling_defect(),
        });
    }
    Ok(DualSolution {
        source: source.to_vec(),
        sites: sites.clone(),
        masses: masses.clone(),
        areas: current.diagram.areas.clone(),
        weights: current.weights,
        history,
        residual: max_rel,
    })
}

/// Weights whose power diagram is the Voronoi diagram of the sites shrunk
/// towards the source centroid until they fit inside the source, so every
/// cell starts non-empty.
fn initial_weights(source: &[P2], sites: &[P2]) -> Vec<f64> {
    let c = geom::centroid(source);
    let inradius = geom::dist_to_boundary(source, c);
    let reach = sites.iter().map(|p| geom::dist(*p, c)).fold(0.0, f64::max);
    let lambda = if reach > 0.0 { (0.5 * inradius / reach).min(1.0) } else { 1.0 };
    let raw: Vec<f64> = sites
        .iter()
        .map(|p| {
            let d = geom::sub(*p, c);
            (1.0 - lambda) * geom::dot(d, d)
        })
        .collect();
    raw.iter().map(|w| w - raw[0]).collect()
}

fn accept(trial: &Iterate, current: &Iterate, floor: f64) -> bool {
    trial.admissible(floor) && trial.norm < current.norm
}

fn newton(current: &Iterate, sites: &[P2], masses: &[f64], source: &[P2], floor: f64) -> Result<Option<(Iterate, f64)>> {
    let n = sites.len();
    if n == 1 {
        return Ok(None);
    }
    // Unknowns are ψ_1..ψ_{N−1}; ψ_0 stays fixed at zero.
    let mut a = SymSparse::new(n - 1);
    for e in &current.diagram.edges {
        let c = e.len / (2.0 * geom::dist(sites[e.i], sites[e.j]));
        for (p, q) in [(e.i, e.j), (e.j, e.i)] {
            if p > 0 {
                a.diag[p - 1] += c;
                if q > 0 {
                    a.off[p - 1].push((q - 1, -c));
                }
            }
        }
    }
    let rhs: Vec<f64> = (1..n).map(|i| masses[i] - current.diagram.areas[i]).collect();
    let (delta, _) = conjugate_gradient(&a, &rhs, 1e-12, 10 * n + 100);
    if delta.iter().any(|d| !d.is_finite()) {
        return Ok(None);
    }
    let mut tau = 1.0;
    for _ in 0..NEWTON_HALVINGS {
        let mut weights = current.weights.clone();
        for i in 1..n {
            weights[i] += tau * delta[i - 1];
        }
        let trial = Iterate::new(sites, weights, source, masses)?;
        if accept(&trial, current, floor) {
            return Ok(Some((trial, tau)));
        }
        tau *= 0.5;
    }
    Ok(None)
}

fn ascent(current: &Iterate, sites: &[P2], masses: &[f64], source: &[P2], floor: f64) -> Result<Option<(Iterate, f64)>> {
    let n = sites.len();
    let mut diag = vec![0.0; n];
    for e in &current.diagram.edges {
        let c = e.len / (2.0 * geom::dist(sites[e.i], sites[e.j]));
        diag[e.i] += c;
        diag[e.j] += c;
    }
    let mut tau = 1.0;
    for _ in 0..ASCENT_HALVINGS {
        let mut weights = current.weights.clone();
        for i in 1..n {
            if diag[i] > 0.0 {
                weights[i] += tau * (masses[i] - current.diagram.areas[i]) / diag[i];
            }
        }
        let trial = Iterate::new(sites, weights, source, masses)?;
        if accept(&trial, current, floor) {
            return Ok(Some((trial, tau)));
        }
        tau *= 0.5;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ot::shape::{ShapeName, ShapeSpec};

    #[test]
    fn single_site_takes_the_whole_source() {
        let source = geom::square(-1.0, 1.0);
        let samples = SampleSet {
            sites: vec![[3.0, 0.5]],
            masses: vec![4.0],
        };
        let d = solve_dual(&source, &samples, &DualOptions::default()).unwrap();
        assert_eq!(d.weights, vec![0.0]);
        assert!((d.areas[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn split_ball_converges_and_tiles() {
        let spec = ShapeSpec::new(ShapeName::SplitBall);
        let samples = spec.sample(300).unwrap();
        let d = solve_dual(&spec.source_polygon(), &samples, &DualOptions::default()).unwrap();
        assert!(d.residual <= 1e-7);
        assert_eq!(d.weights[0], 0.0);
        for s in &d.history {
            assert!(s.tiling <= 1e-9);
        }
        for w in d.history.windows(2) {
            assert!(w[1].residual < w[0].residual);
        }
    }

    #[test]
    fn mismatched_mass_is_rejected() {
        let samples = SampleSet {
            sites: vec![[0.0, 0.0], [0.5, 0.0]],
            masses: vec![1.0, 1.0],
        };
        assert!(solve_dual(&geom::square(-1.0, 1.0), &samples, &DualOptions::default())
            .unwrap_err()
            .is_config());
    }
}
