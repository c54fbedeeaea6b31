//! The suspension flow on `M(σ)`, points `(x, t)` with `x` an infinite path
//! and `(x, 1) ~ (σx, 0)`, cylinder sets and the lattice decomposition at
//! rational times.
//!
//! Infinite paths are carried as finite prefixes; the prefix length is the
//! precision and operations that would need more edges fail.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::graph::{Graph, GraphError, Path};
use crate::quiver::{normalize_edge, QuiverError, QuiverPath, Time};
use crate::scalar::{floor, Rat};
use crate::transform::{delay_embed_path, higher_power, EdgeLabel, LabeledGraph, VertexLabel};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("prefix of length {have} is too short, need {need} edges")]
    InsufficientPrecision { have: usize, need: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
}

/// `(x, t)` with `t ∈ [0, 1)`, `x` known through a finite prefix.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FlowPoint {
    prefix: Path,
    t: Time,
}

impl FlowPoint {
    /// Accepts `t ∈ [0, 1]`; `(x, 1)` is glued to `(σx, 0)`.
    pub fn new(g: &Graph, prefix: Path, t: Rat) -> Result<Self, FlowError> {
        if prefix.is_empty() {
            return Err(FlowError::InsufficientPrecision { have: 0, need: 1 });
        }
        if t.is_one() {
            if prefix.len() < 2 {
                return Err(FlowError::InsufficientPrecision {
                    have: prefix.len(),
                    need: 2,
                });
            }
            return Ok(FlowPoint {
                prefix: shift(g, &prefix, 1),
                t: Time::zero(),
            });
        }
        let t = Time::new(t)?;
        Ok(FlowPoint { prefix, t })
    }

    pub fn prefix(&self) -> &Path {
        &self.prefix
    }

    pub fn t(&self) -> Time {
        self.t
    }

    pub fn precision(&self) -> usize {
        self.prefix.len()
    }
}

fn shift(g: &Graph, p: &Path, k: usize) -> Path {
    p.sub(g, k, p.len())
}

/// `θ^∞(x, t) = [x₁x₂, t][x₂x₃, t] …`, truncated to the prefix.
pub fn theta_inf(g: &Graph, p: &FlowPoint) -> Result<QuiverPath, FlowError> {
    let x = &p.prefix;
    if x.len() < 2 {
        return Err(FlowError::InsufficientPrecision {
            have: x.len(),
            need: 2,
        });
    }
    let edges = (0..x.len() - 1)
        .map(|i| normalize_edge(g, &x.sub(g, i, i + 2), p.t.value(), 1))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuiverPath::from_edges(g, edges)?)
}

/// `lt_l(x, t) = (σ^{⌊t+l⌋} x, frac(t + l))` for rational `l ≥ 0`.
pub fn apply_flow(g: &Graph, p: &FlowPoint, l: Rat) -> Result<FlowPoint, FlowError> {
    if l < Rat::zero() {
        return Err(FlowError::InvalidParameter(format!(
            "flow time must be nonnegative, got {l}"
        )));
    }
    let pos = p.t.value() + l;
    let k = floor(&pos) as usize;
    if k >= p.prefix.len() {
        return Err(FlowError::InsufficientPrecision {
            have: p.prefix.len(),
            need: k + 1,
        });
    }
    Ok(FlowPoint {
        prefix: shift(g, &p.prefix, k),
        t: Time::frac_of(pos),
    })
}

/// Flow by a real time. The result is marked inexact because the time
/// coordinate is a float.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatFlowPoint {
    pub prefix: Path,
    pub t: f64,
    pub inexact: bool,
}

pub fn apply_flow_float(g: &Graph, p: &FlowPoint, l: f64) -> Result<FloatFlowPoint, FlowError> {
    if l.is_nan() || l < 0.0 || !l.is_finite() {
        return Err(FlowError::InvalidParameter(format!(
            "flow time must be finite and nonnegative, got {l}"
        )));
    }
    let t0 = *p.t.value().numer() as f64 / *p.t.value().denom() as f64;
    let pos = t0 + l;
    let k = libm::floor(pos) as usize;
    if k >= p.prefix.len() {
        return Err(FlowError::InsufficientPrecision {
            have: p.prefix.len(),
            need: k + 1,
        });
    }
    Ok(FloatFlowPoint {
        prefix: shift(g, &p.prefix, k),
        t: pos - libm::floor(pos),
        inexact: true,
    })
}

/// Basic open sets of `M(σ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cylinder {
    /// `Z(μ, (a, b)) = {(x, t) : x ∈ μE^∞, t ∈ (a, b)}`, `0 ≤ a < b ≤ 1`.
    Interval { mu: Path, a: Rat, b: Rat },
    /// `Z(μ, ε)`: a neighbourhood of the glued seam over `μE^∞`,
    /// `{(eμx, t) : t ∈ (1 − ε, 1)} ∪ {(μx, t) : t ∈ [0, ε)}`.
    Wrap { mu: Path, eps: Rat },
}

impl Cylinder {
    pub fn interval(mu: Path, a: Rat, b: Rat) -> Result<Self, FlowError> {
        if !(Rat::zero() <= a && a < b && b <= Rat::one()) {
            return Err(FlowError::InvalidParameter(format!(
                "need 0 <= a < b <= 1, got ({a}, {b})"
            )));
        }
        Ok(Cylinder::Interval { mu, a, b })
    }

    pub fn wrap(mu: Path, eps: Rat) -> Result<Self, FlowError> {
        if !(Rat::zero() < eps && eps < Rat::one()) {
            return Err(FlowError::InvalidParameter(format!(
                "need 0 < eps < 1, got {eps}"
            )));
        }
        Ok(Cylinder::Wrap { mu, eps })
    }

    pub fn mu(&self) -> &Path {
        match self {
            Cylinder::Interval { mu, .. } | Cylinder::Wrap { mu, .. } => mu,
        }
    }

    /// Prefix length needed to decide membership.
    pub fn depth(&self) -> usize {
        match self {
            Cylinder::Interval { mu, .. } => mu.len().max(1),
            Cylinder::Wrap { mu, .. } => mu.len() + 1,
        }
    }
}

fn starts_with_at(x: &Path, g: &Graph, k: usize, mu: &Path) -> bool {
    let v = x.vertex_at(g, k);
    v == mu.range() && x.edges()[k..].starts_with(mu.edges())
}

pub fn in_cylinder(g: &Graph, p: &FlowPoint, c: &Cylinder) -> Result<bool, FlowError> {
    let x = &p.prefix;
    if x.len() < c.depth() {
        return Err(FlowError::InsufficientPrecision {
            have: x.len(),
            need: c.depth(),
        });
    }
    let t = p.t.value();
    Ok(match c {
        Cylinder::Interval { mu, a, b } => *a < t && t < *b && starts_with_at(x, g, 0, mu),
        Cylinder::Wrap { mu, eps } => {
            (t > Rat::one() - eps && starts_with_at(x, g, 1, mu))
                || (t < *eps && starts_with_at(x, g, 0, mu))
        }
    })
}

/// `μ ∨ ν`: the longer path when one extends the other.
pub fn join(mu: &Path, nu: &Path) -> Option<Path> {
    if mu.starts_with(nu) {
        Some(mu.clone())
    } else if nu.starts_with(mu) {
        Some(nu.clone())
    } else {
        None
    }
}

fn interval_or_empty(mu: Option<Path>, a: Rat, b: Rat) -> Option<Cylinder> {
    let mu = mu?;
    (a < b).then_some(Cylinder::Interval { mu, a, b })
}

/// Intersection of two cylinders as a finite union of cylinders.
pub fn intersect(g: &Graph, c: &Cylinder, d: &Cylinder) -> Vec<Cylinder> {
    match (c, d) {
        (
            Cylinder::Interval { mu, a, b },
            Cylinder::Interval {
                mu: nu,
                a: c0,
                b: d0,
            },
        ) => interval_or_empty(join(mu, nu), (*a).max(*c0), (*b).min(*d0))
            .into_iter()
            .collect(),
        (Cylinder::Wrap { mu, eps }, Cylinder::Wrap { mu: nu, eps: delta }) => match join(mu, nu) {
            Some(j) => alloc::vec![Cylinder::Wrap {
                mu: j,
                eps: (*eps).min(*delta)
            }],
            None => Vec::new(),
        },
        (Cylinder::Interval { mu, a, b }, Cylinder::Wrap { mu: nu, eps }) => {
            let mut out = Vec::new();
            for &e in g.edges_from(nu.range()) {
                let enu = Path::edge(g, e).concat(g, nu).expect("e ∈ E¹r(ν)");
                out.extend(interval_or_empty(
                    join(mu, &enu),
                    (*a).max(Rat::one() - eps),
                    *b,
                ));
            }
            out.extend(interval_or_empty(join(mu, nu), *a, (*b).min(*eps)));
            out
        }
        (Cylinder::Wrap { .. }, Cylinder::Interval { .. }) => intersect(g, d, c),
    }
}

/// Result of comparing the time-`m/n` flow on lattice points with the shift
/// on `D_n(E)(0, m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeReport {
    pub points: usize,
    pub passed: bool,
    pub first_mismatch: Option<String>,
}

/// The lattice point `(x, j/n)` as a path of `D_n(E)(0, m)`: delay `x`,
/// drop `j` edges and group into blocks of `m`.
fn lattice_word(
    d: &LabeledGraph,
    power: &LabeledGraph,
    g: &Graph,
    x: &Path,
    j: usize,
    m: usize,
) -> Path {
    let y = delay_embed_path(g, d, x);
    let dg = &d.graph;
    let blocks = (y.len() - j) / m;
    if blocks == 0 {
        let v = power
            .vertex_for(&VertexLabel::Vertex(y.vertex_at(dg, j)))
            .expect("vertex of power graph");
        return Path::vertex(v);
    }
    let edges = (0..blocks)
        .map(|b| {
            let w = y.sub(dg, j + b * m, j + (b + 1) * m);
            power
                .edge_for(&EdgeLabel::Path(w))
                .expect("block is an edge of the power graph")
        })
        .collect();
    Path::from_edges(&power.graph, edges).expect("blocks compose")
}

/// Runs `lt_{m/n}` on every lattice point `(x, j/n)` with `|x| ≤ max_len`
/// and compares with one step of the shift on `D_n(E)(0, m)`.
pub fn lattice_decomposition_check(
    g: &Graph,
    m: u32,
    n: u32,
    max_len: usize,
) -> Result<LatticeReport, FlowError> {
    if m == 0 || n == 0 {
        return Err(FlowError::InvalidParameter(String::from(
            "need m >= 1 and n >= 1",
        )));
    }
    if num_integer::gcd(m, n) != 1 {
        return Err(FlowError::InvalidParameter(format!(
            "gcd({m}, {n}) must be 1"
        )));
    }
    g.require_no_sinks()?;
    let red = crate::quiver::reduce_parameter(g, m as i64, n)?;
    let d = &red.delay;
    let power = higher_power(&d.graph, m as usize).map_err(QuiverError::from)?;
    let l = Rat::new(m as i64, n as i64);
    let nn = n as i64;
    let mut points = 0;
    for k in 1..=max_len {
        for x in g.enumerate_paths(k) {
            for j in 0..n as usize {
                let p = FlowPoint::new(g, x.clone(), Rat::new(j as i64, nn))?;
                let q = match apply_flow(g, &p, l) {
                    Ok(q) => q,
                    Err(FlowError::InsufficientPrecision { .. }) => continue,
                    Err(e) => return Err(e),
                };
                points += 1;
                let jq = q.t.value() * Rat::from_integer(nn);
                let mismatch = |why: String| LatticeReport {
                    points,
                    passed: false,
                    first_mismatch: Some(why),
                };
                if !jq.is_integer() {
                    return Ok(mismatch(format!(
                        "{} at {j}/{n} leaves the lattice",
                        x.display(g)
                    )));
                }
                let before = lattice_word(d, &power, g, &x, j, m as usize);
                let after = lattice_word(
                    d,
                    &power,
                    g,
                    &q.prefix,
                    jq.to_integer() as usize,
                    m as usize,
                );
                if before.is_empty() {
                    continue;
                }
                let shifted = &before.edges()[1..];
                let common = shifted.len().min(after.len());
                let range_ok = after.range() == before.vertex_at(&power.graph, 1);
                if !range_ok || shifted[..common] != after.edges()[..common] {
                    return Ok(mismatch(format!(
                        "{} at {j}/{n}: shift gives {}, flow gives {}",
                        x.display(g),
                        before.display(&power.graph),
                        after.display(&power.graph)
                    )));
                }
            }
        }
    }
    Ok(LatticeReport {
        points,
        passed: true,
        first_mismatch: None,
    })
}
