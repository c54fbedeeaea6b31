//! Verification suites driven by `suspend verify`.

use std::fmt;
use std::str::FromStr;

use suspend_core::flow::{lattice_decomposition_check, FlowError};
use suspend_core::opalg::{
    check_matrix_units, check_product_formula, check_tck, eta_generators, jmath, kappa_report,
    limit_formulas, morita_combinatorics, Mode, OpError, TruncatedRep,
};
use suspend_core::scalar::rat;
use suspend_core::{Graph, GraphError, Rat, Report};

use crate::sample;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Suite {
    Tck,
    Jmath,
    Limits,
    Eta,
    Kappa,
    Morita,
    Flow,
    All,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Tck,
        Suite::Jmath,
        Suite::Limits,
        Suite::Eta,
        Suite::Kappa,
        Suite::Morita,
        Suite::Flow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Tck => "tck",
            Suite::Jmath => "jmath",
            Suite::Limits => "limits",
            Suite::Eta => "eta",
            Suite::Kappa => "kappa",
            Suite::Morita => "morita",
            Suite::Flow => "flow",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .iter()
            .chain([Suite::All].iter())
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                format!("unknown suite {s:?}; expected tck|jmath|limits|eta|kappa|morita|flow|all")
            })
    }
}

#[derive(Clone, Debug)]
pub struct Params {
    /// Truncation length `L`.
    pub cap: usize,
    pub seed: u64,
    pub m: Option<u32>,
    pub n: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuiteError {
    /// Exit 2: the graph or parameters fall outside the suite's hypotheses.
    Precondition(String),
    /// Exit 1: an internal structural error.
    Structural(String),
}

impl fmt::Display for SuiteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuiteError::Precondition(s) => write!(f, "precondition: {s}"),
            SuiteError::Structural(s) => write!(f, "error: {s}"),
        }
    }
}

impl From<OpError> for SuiteError {
    fn from(e: OpError) -> Self {
        match e {
            OpError::InvalidParameter(_)
            | OpError::TooLarge(..)
            | OpError::Graph(GraphError::HasSinks(_) | GraphError::HasSources(_)) => {
                SuiteError::Precondition(e.to_string())
            }
            other => SuiteError::Structural(other.to_string()),
        }
    }
}

impl From<FlowError> for SuiteError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidParameter(_)
            | FlowError::InsufficientPrecision { .. }
            | FlowError::Graph(GraphError::HasSinks(_) | GraphError::HasSources(_)) => {
                SuiteError::Precondition(e.to_string())
            }
            other => SuiteError::Structural(other.to_string()),
        }
    }
}

/// Names the sinks and sources of a graph.
pub fn diagnostics_line(g: &Graph) -> String {
    let d = g.diagnostics();
    let names = |vs: &[suspend_core::VertexId]| {
        vs.iter()
            .map(|&v| g.vertex_name(v))
            .collect::<Vec<_>>()
            .join(",")
    };
    format!(
        "sinks [{}], sources [{}], strongly connected {}, period {}, simple cycle {}, condition L {}",
        names(&d.sinks),
        names(&d.sources),
        d.strongly_connected,
        d.period.map_or_else(|| String::from("-"), |p| p.to_string()),
        d.simple_cycle,
        d.condition_l
    )
}

fn require(g: &Graph, suite: Suite) -> Result<(), SuiteError> {
    let sources = !g.sources().is_empty();
    let sinks = !g.sinks().is_empty();
    if sources || (sinks && suite != Suite::Tck) {
        return Err(SuiteError::Precondition(format!(
            "suite {} needs a graph without {}: {}",
            suite.name(),
            if suite == Suite::Tck {
                "sources"
            } else {
                "sinks or sources"
            },
            diagnostics_line(g)
        )));
    }
    Ok(())
}

fn m_values(p: &Params) -> Vec<u32> {
    p.m.map_or_else(|| vec![1, 2], |m| vec![m])
}

fn pairs(p: &Params, defaults: &[(u32, u32)]) -> Vec<(u32, u32)> {
    match (p.m, p.n) {
        (Some(m), Some(n)) => vec![(m, n)],
        (Some(m), None) => vec![(m, 1)],
        (None, Some(n)) => vec![(1, n)],
        (None, None) => defaults.to_vec(),
    }
}

pub fn run(g: &Graph, suite: Suite, p: &Params) -> Result<Report, SuiteError> {
    if p.cap == 0 {
        return Err(SuiteError::Precondition(String::from(
            "L must be at least 1",
        )));
    }
    if suite == Suite::All {
        let mut report = Report::new();
        for s in Suite::ALL {
            report.extend(run(g, s, p)?);
        }
        return Ok(report);
    }
    require(g, suite)?;
    let mut rng = sample::rng(p.seed);
    let mut report = Report::new();
    match suite {
        Suite::Tck => {
            let rep = TruncatedRep::new(g, p.cap)?;
            report.extend(check_tck(&rep, Mode::Toeplitz));
            report.extend(check_tck(&rep, Mode::CuntzKrieger));
            report.extend(check_product_formula(
                &rep,
                &sample::product_samples(&mut rng, g, 1, 40),
            ));
            report.extend(check_matrix_units(
                &rep,
                &sample::unit_pairs(&mut rng, g, 1, 30),
            ));
        }
        Suite::Jmath => {
            for (a, b) in [(1, 2), (1, 3), (2, 3)] {
                report.extend(jmath(g, a, b, p.cap)?.report);
            }
        }
        Suite::Limits => {
            for m in m_values(p) {
                let a = sample::vertex_function(&mut rng, g)?;
                let xi = sample::edge_function(&mut rng, g, m)?;
                report.extend(limit_formulas(g, m, p.cap, &a, &xi, 10, 1e-3)?.report);
            }
        }
        Suite::Eta => {
            for m in m_values(p) {
                report.extend(eta_generators(g, m, p.cap)?.report);
            }
        }
        Suite::Kappa => {
            let times: Vec<Rat> = (0..=8).map(|k| rat(k, 8)).collect();
            for m in m_values(p) {
                let a = sample::vertex_function(&mut rng, g)?;
                let xi = sample::edge_function(&mut rng, g, m)?;
                report.extend(kappa_report(g, m, p.cap, &a, &xi, &times)?);
            }
        }
        Suite::Morita => {
            for (m, n) in pairs(p, &[(1, 2), (2, 3), (3, 2)]) {
                let cap = p.cap.max(3 * n as usize);
                report.extend(morita_combinatorics(g, m, n, cap, 6)?.report);
            }
        }
        Suite::Flow => {
            for (m, n) in pairs(p, &[(1, 2), (2, 3)]) {
                let r = lattice_decomposition_check(g, m, n, p.cap)?;
                let detail = match &r.first_mismatch {
                    None => format!("{} lattice points agree", r.points),
                    Some(why) => why.clone(),
                };
                report.push(format!("flow_lattice(l={m}/{n})"), r.passed, detail);
            }
        }
        Suite::All => unreachable!("handled above"),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_graph;

    fn two_loop() -> Graph {
        parse_graph(r#"{"vertices":["v"],"edges":[{"id":"e","src":"v","dst":"v"},{"id":"f","src":"v","dst":"v"}]}"#)
            .unwrap()
    }

    fn params(cap: usize) -> Params {
        Params {
            cap,
            seed: 0,
            m: None,
            n: None,
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn tck_suite_passes_on_two_loop() {
        let r = run(&two_loop(), Suite::Tck, &params(4)).unwrap();
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn morita_rejects_common_factor() {
        let p = Params {
            cap: 4,
            seed: 0,
            m: Some(2),
            n: Some(4),
        };
        assert!(matches!(
            run(&two_loop(), Suite::Morita, &p),
            Err(SuiteError::Precondition(_))
        ));
    }

    #[test]
    fn sources_are_a_precondition() {
        let g = parse_graph(r#"{"vertices":["a","b"],"edges":[{"id":"x","src":"a","dst":"b"},{"id":"y","src":"b","dst":"b"}]}"#)
            .unwrap();
        assert!(matches!(
            run(&g, Suite::All, &params(3)),
            Err(SuiteError::Precondition(_))
        ));
    }
}
