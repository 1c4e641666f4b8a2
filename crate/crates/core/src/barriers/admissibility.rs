use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::barrier::dist_to_span;
use super::obstacle::TailProfile;
use super::radial::w_profile;
use crate::{Error, Result};

/// Slack for the non-strict comparisons of the chain.
const CHAIN_TOL: f64 = 1e-12;

/// Which lower barrier the chain is built around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chain", rename_all = "snake_case")]
pub enum Chain {
    /// `|(x, y)|²/2 + |x|/4`, singular set `{x = 0}`.
    Line,
    /// `|(x, y)|²/2 + |x|/16 + L` around a face `{x = 0}` with the polytope on
    /// the side `x₁ ≥ 0` and `L = −x₁/8`.
    Polytope,
    /// `|p|²/2 + Σ dist(p, ⟨d_i⟩)/(8k)` for segments through the origin.
    Cross { directions: Vec<Vec<f64>> },
}

impl Chain {
    pub fn name(&self) -> &'static str {
        match self {
            Chain::Line => "phi_line",
            Chain::Polytope => "phi_polytope",
            Chain::Cross { .. } => "phi_cross",
        }
    }

    /// Gradient jump of the barrier across its singular set: the density bound
    /// implied when every inequality holds.
    pub fn implied_bound(&self) -> f64 {
        match self {
            Chain::Line => 0.5,
            Chain::Polytope => 0.125,
            Chain::Cross { directions } => 0.25 / directions.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub chain: String,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub rho: f64,
    pub alpha: f64,
    pub records: Vec<InequalityRecord>,
    pub pass: bool,
    /// Lower bound on the singular density, present only when `pass`.
    pub implied_bound: Option<f64>,
}

impl AdmissibilityReport {
    /// Names of the failing records.
    pub fn failures(&self) -> Vec<&str> {
        self.records.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect()
    }

    /// Flat `key = value` text block.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "chain = {}\nn = {}\nk = {}\neps = {}\nrho = {}\nalpha = {}\n",
            self.chain, self.n, self.k, self.eps, self.rho, self.alpha
        );
        for r in &self.records {
            s += &format!(
                "[{}] lhs = {:.12e} rhs = {:.12e} pass = {}\n",
                r.name, r.lhs, r.rhs, r.pass
            );
        }
        s += &format!("pass = {}\n", self.pass);
        match self.implied_bound {
            Some(b) => s += &format!("implied_bound = {b}\n"),
            None => s += "implied_bound = none\n",
        }
        s
    }
}

fn record(name: &str, lhs: f64, rhs: f64) -> InequalityRecord {
    InequalityRecord {
        name: name.into(),
        lhs,
        rhs,
        pass: lhs <= rhs + CHAIN_TOL,
    }
}

/// Checks the line chain: `W_n(ε) ≤ ρ/2`, `ρ²/2 ≤ ρ/4`, `D ≥ ρ/2` on `∂B_ρ`,
/// `Φ ≤ D` on `∂B_ρ` and `Φ ≤ g` on the obstacle support.
pub fn admissibility_check(n: usize, k: usize, eps: f64, rho: f64, alpha: f64) -> Result<AdmissibilityReport> {
    admissibility_check_chain(&Chain::Line, n, k, eps, rho, alpha)
}

pub fn admissibility_check_chain(
    chain: &Chain,
    n: usize,
    k: usize,
    eps: f64,
    rho: f64,
    alpha: f64,
) -> Result<AdmissibilityReport> {
    if !(eps > 0.0 && eps < rho && rho < 1.0) {
        return Err(Error::Config(format!(
            "need 0 < eps < rho < 1, got eps = {eps}, rho = {rho}"
        )));
    }
    if !(2..=3).contains(&n) {
        return Err(Error::Config(format!("admissibility is checked for n = 2, 3; got {n}")));
    }
    let tail = TailProfile::new(alpha)?;
    if let Chain::Cross { directions } = chain {
        if directions.is_empty() || directions.iter().any(|d| d.len() != n) {
            return Err(Error::Config("cross directions must be nonempty n-vectors".into()));
        }
    } else if k < 1 || k >= n {
        return Err(Error::Config(format!("need 1 <= k <= n-1, got n = {n}, k = {k}")));
    }
    let nn = n as u32;
    let w_eps = w_profile(nn, eps);
    let w_rho = w_profile(nn, rho);
    let d_rho = w_rho - w_eps;

    let mut records = vec![
        record("W_n(eps) <= rho/2", w_eps, 0.5 * rho),
        record("rho <= W_n(rho)", rho, w_rho),
        record("rho/2 <= D(rho)", 0.5 * rho, d_rho),
    ];
    let quad_rhs = match chain {
        Chain::Line => 0.25 * rho,
        _ => rho / 16.0,
    };
    let quad_name = match chain {
        Chain::Line => "rho^2/2 <= rho/4",
        _ => "rho^2/2 <= rho/16",
    };
    records.insert(1, record(quad_name, 0.5 * rho * rho, quad_rhs));

    let phi = |p: &[f64]| barrier_value(chain, n, k, p);
    let sphere_max = max_on_sphere(n, rho, &phi);
    records.push(record("max Phi on sphere <= D(rho)", sphere_max, d_rho));

    let g = |r: f64| eps * eps * tail.value(r / eps).to_f64();
    let gap = max_gap_on_support(chain, n, k, eps, &phi, &g);
    records.push(record("Phi - g <= 0 on support", gap, 0.0));

    let pass = records.iter().all(|r| r.pass);
    Ok(AdmissibilityReport {
        chain: chain.name().into(),
        n,
        k: match chain {
            Chain::Cross { directions } => directions.len(),
            _ => k,
        },
        eps,
        rho,
        alpha,
        records,
        pass,
        implied_bound: pass.then(|| chain.implied_bound()),
    })
}

fn barrier_value(chain: &Chain, n: usize, k: usize, p: &[f64]) -> f64 {
    let sq = 0.5 * p.iter().map(|v| v * v).sum::<f64>();
    match chain {
        Chain::Line => sq + p[..n - k].iter().map(|v| v * v).sum::<f64>().sqrt() / 4.0,
        Chain::Polytope => sq + p[..n - k].iter().map(|v| v * v).sum::<f64>().sqrt() / 16.0 - p[0] / 8.0,
        Chain::Cross { directions } => {
            sq + directions.iter().map(|d| dist_to_span(p, d)).sum::<f64>() / (8.0 * directions.len() as f64)
        }
    }
}

/// Maximum of `f` on the sphere of radius `rho`: a dense angular scan followed
/// by golden-section refinement (one angle in 2-D, two in 3-D).
fn max_on_sphere(n: usize, rho: f64, f: &dyn Fn(&[f64]) -> f64) -> f64 {
    if n == 2 {
        let h = |t: f64| f(&[rho * t.cos(), rho * t.sin()]);
        return scan_and_refine(&h, 0.0, 2.0 * PI, 4096);
    }
    let mut best = f64::NEG_INFINITY;
    let m = 256;
    for i in 0..=m {
        let theta = PI * i as f64 / m as f64;
        let h = |phi: f64| f(&[rho * theta.sin() * phi.cos(), rho * theta.sin() * phi.sin(), rho * theta.cos()]);
        best = best.max(scan_and_refine(&h, 0.0, 2.0 * PI, 512));
    }
    best
}

fn scan_and_refine(h: &dyn Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let step = (b - a) / m as f64;
    let (mut arg, mut best) = (a, h(a));
    for i in 1..=m {
        let t = a + step * i as f64;
        let v = h(t);
        if v > best {
            best = v;
            arg = t;
        }
    }
    let (mut lo, mut hi) = (arg - step, arg + step);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = hi - gr * (hi - lo);
        let d = lo + gr * (hi - lo);
        if h(c) > h(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    best.max(h(0.5 * (lo + hi)))
}

/// `max (Φ − g)` over the finite part of the obstacle. For the cross the
/// obstacle carries the same `Σ dist(·, ⟨d_i⟩)/(8k)` term as the barrier.
fn max_gap_on_support(
    chain: &Chain,
    n: usize,
    k: usize,
    eps: f64,
    phi: &dyn Fn(&[f64]) -> f64,
    g: &dyn Fn(f64) -> f64,
) -> f64 {
    let m = 2000;
    let mut best = f64::NEG_INFINITY;
    let radii = (0..=m).map(|i| eps * i as f64 / m as f64);
    match chain {
        Chain::Line => {
            for r in radii {
                let mut p = vec![0.0; n];
                p[n - k] = r;
                best = best.max(phi(&p) - g(r));
            }
        }
        Chain::Polytope => {
            // part of the polytope near the face: x₁ ≥ 0 inside B_ε
            for r in radii {
                for j in 0..=64 {
                    let t = -0.5 * PI + PI * j as f64 / 64.0;
                    let mut p = vec![0.0; n];
                    p[0] = r * t.cos();
                    p[n - 1] = r * t.sin();
                    best = best.max(phi(&p) - g(r));
                }
            }
        }
        Chain::Cross { directions } => {
            for d in directions {
                let len = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                for r in radii.clone() {
                    for s in [-1.0, 1.0] {
                        let p: Vec<f64> = d.iter().map(|v| s * r * v / len).collect();
                        let spread: f64 = directions.iter().map(|e| dist_to_span(&p, e)).sum::<f64>()
                            / (8.0 * directions.len() as f64);
                        best = best.max(phi(&p) - g(r) - spread);
                    }
                }
            }
        }
    }
    best
}
