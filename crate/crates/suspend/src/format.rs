//! The JSON graph file format and parameter syntax.

use serde::{Deserialize, Serialize};
use suspend_core::{Graph, GraphError, Rat};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
    #[error("empty id in graph file")]
    EmptyId,
    #[error("cannot parse {what} from {input:?}")]
    Syntax { what: &'static str, input: String },
    #[error("{0}")]
    Range(String),
}

impl FormatError {
    /// Syntax and structure problems are exit 1; out-of-range values are 2.
    pub fn is_precondition(&self) -> bool {
        matches!(self, FormatError::Range(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: String,
    pub src: String,
    pub dst: String,
}

/// `{"vertices": [...], "edges": [{"id", "src", "dst"}, ...]}` with `src`
/// the source `s(e)` and `dst` the range `r(e)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeRecord>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph) -> Self {
        GraphFile {
            vertices: g.vertices().map(|v| g.vertex_name(v).to_string()).collect(),
            edges: g
                .edges()
                .map(|e| EdgeRecord {
                    id: g.edge_name(e).to_string(),
                    src: g.vertex_name(g.s(e)).to_string(),
                    dst: g.vertex_name(g.r(e)).to_string(),
                })
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph, FormatError> {
        if self.vertices.iter().any(String::is_empty) || self.edges.iter().any(|e| e.id.is_empty())
        {
            return Err(FormatError::EmptyId);
        }
        Ok(Graph::new(
            self.vertices.iter().map(String::as_str),
            self.edges
                .iter()
                .map(|e| (e.id.as_str(), e.src.as_str(), e.dst.as_str())),
        )?)
    }
}

pub fn parse_graph(text: &str) -> Result<Graph, FormatError> {
    serde_json::from_str::<GraphFile>(text)?.to_graph()
}

/// Canonical serialisation: declaration order, two-space indent, trailing
/// newline.
pub fn write_graph(g: &Graph) -> String {
    let mut s =
        serde_json::to_string_pretty(&GraphFile::from_graph(g)).expect("graph file serialises");
    s.push('\n');
    s
}

pub const MAX_DENOMINATOR: u64 = 1_000_000;

/// `"m/n"` or `"m"` with optional sign, in lowest terms, `0 < n ≤ 10^6`.
pub fn parse_fraction(input: &str) -> Result<(i64, u64), FormatError> {
    let syntax = || FormatError::Syntax {
        what: "rational m/n",
        input: input.to_string(),
    };
    let s = input.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let m: i64 = num
        .strip_prefix('+')
        .unwrap_or(num)
        .parse()
        .map_err(|_| syntax())?;
    let n: u64 = den.parse().map_err(|_| syntax())?;
    if n == 0 {
        return Err(FormatError::Range(String::from(
            "denominator must be positive",
        )));
    }
    if n > MAX_DENOMINATOR {
        return Err(FormatError::Range(format!(
            "denominator {n} exceeds {MAX_DENOMINATOR}"
        )));
    }
    if num_integer::gcd(m.unsigned_abs(), n) != 1 {
        return Err(FormatError::Range(format!(
            "{m}/{n} is not in lowest terms"
        )));
    }
    Ok((m, n))
}

/// A rational in any form (not necessarily reduced), used for times.
pub fn parse_rat(input: &str) -> Result<Rat, FormatError> {
    let syntax = || FormatError::Syntax {
        what: "rational",
        input: input.to_string(),
    };
    let s = input.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let m: i64 = num
        .strip_prefix('+')
        .unwrap_or(num)
        .parse()
        .map_err(|_| syntax())?;
    let n: i64 = den.parse().map_err(|_| syntax())?;
    if n <= 0 {
        return Err(FormatError::Range(String::from(
            "denominator must be positive",
        )));
    }
    if n as u64 > MAX_DENOMINATOR {
        return Err(FormatError::Range(format!(
            "denominator {n} exceeds {MAX_DENOMINATOR}"
        )));
    }
    Ok(Rat::new(m, n))
}

/// Comma-separated edge ids, or a single vertex id, as a path.
pub fn parse_path(g: &Graph, input: &str) -> Result<suspend_core::Path, FormatError> {
    let names: Vec<&str> = input
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if let [single] = names.as_slice() {
        if g.edge_by_name(single).is_none() {
            if let Some(v) = g.vertex_by_name(single) {
                return Ok(suspend_core::Path::vertex(v));
            }
        }
    }
    Ok(g.path_from_names(&names)?)
}
