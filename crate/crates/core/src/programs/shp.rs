//! All-pairs shortest paths over weighted directed edges.

use std::fmt;
use std::sync::Arc;

use crate::engine::{compose, rule, Body, Program};
use crate::matching::{Guard, Pattern};
use crate::state::Constraint;

pub type Node = Arc<str>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub source: Node,
    pub target: Node,
    pub weight: i64,
}

impl Edge {
    pub fn new(source: &str, target: &str, weight: i64) -> Self {
        Edge {
            source: source.into(),
            target: target.into(),
            weight,
        }
    }
}

/// A walk from `source` to `target`; `nodes` lists every node visited.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub source: Node,
    pub target: Node,
    pub weight: i64,
    pub nodes: Vec<Node>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphFact {
    Edge(Edge),
    Path(Path),
}

/// Edges are indexed by their target, paths by their endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GraphKey {
    EdgeTarget(Node),
    PathEnds(Node, Node),
}

impl Constraint for GraphFact {
    type Key = GraphKey;

    fn index(&self) -> Option<GraphKey> {
        Some(match self {
            GraphFact::Edge(e) => GraphKey::EdgeTarget(e.target.clone()),
            GraphFact::Path(p) => GraphKey::PathEnds(p.source.clone(), p.target.clone()),
        })
    }
}

impl GraphFact {
    pub fn as_edge(&self) -> Option<&Edge> {
        match self {
            GraphFact::Edge(e) => Some(e),
            GraphFact::Path(_) => None,
        }
    }

    pub fn as_path(&self) -> Option<&Path> {
        match self {
            GraphFact::Path(p) => Some(p),
            GraphFact::Edge(_) => None,
        }
    }

    pub fn is_edge(&self) -> bool {
        self.as_edge().is_some()
    }

    pub fn is_path(&self) -> bool {
        self.as_path().is_some()
    }
}

impl From<Edge> for GraphFact {
    fn from(e: Edge) -> Self {
        GraphFact::Edge(e)
    }
}

impl From<Path> for GraphFact {
    fn from(p: Path) -> Self {
        GraphFact::Path(p)
    }
}

impl fmt::Display for GraphFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphFact::Edge(e) => write!(f, "edge({}, {}, {})", e.source, e.target, e.weight),
            GraphFact::Path(p) => {
                let nodes: Vec<&str> = p.nodes.iter().map(|n| &**n).collect();
                write!(
                    f,
                    "path({}, {}, {}, [{}])",
                    p.source,
                    p.target,
                    p.weight,
                    nodes.join(", ")
                )
            }
        }
    }
}

fn edge_path<'a>(v: &[&'a GraphFact]) -> (&'a Edge, &'a Path) {
    (
        v[0].as_edge().expect("edge pattern"),
        v[1].as_path().expect("path pattern"),
    )
}

/// Keeps the lighter of two paths with equal endpoints.
pub fn clear_duplicate_paths() -> Program<GraphFact> {
    rule(
        "clear duplicate paths",
        vec![Pattern::new(GraphFact::is_path).indexed_by(1, |y: &GraphFact| {
            y.as_path()
                .map(|p| GraphKey::PathEnds(p.source.clone(), p.target.clone()))
        })],
        vec![Pattern::new(GraphFact::is_path)],
        Guard::new(|v: &[&GraphFact]| {
            let (a, b) = (v[0].as_path().unwrap(), v[1].as_path().unwrap());
            a.source == b.source && a.target == b.target && a.weight <= b.weight
        }),
        Body::empty(),
    )
}

/// Every edge is a path.
pub fn primitive_paths() -> Program<GraphFact> {
    rule(
        "primitive paths",
        vec![Pattern::new(GraphFact::is_edge)],
        vec![],
        Guard::always(),
        Body::new(|v: &[&GraphFact]| {
            let e = v[0].as_edge().expect("edge pattern");
            vec![GraphFact::Path(Path {
                source: e.source.clone(),
                target: e.target.clone(),
                weight: e.weight,
                nodes: vec![e.source.clone(), e.target.clone()],
            })]
        }),
    )
}

/// An edge into the source of a path extends the path.
pub fn transitive_paths() -> Program<GraphFact> {
    rule(
        "transitive paths",
        vec![
            Pattern::new(GraphFact::is_edge).indexed_by(1, |y: &GraphFact| {
                y.as_path().map(|p| GraphKey::EdgeTarget(p.source.clone()))
            }),
            Pattern::new(GraphFact::is_path),
        ],
        vec![],
        Guard::new(|v: &[&GraphFact]| {
            let (e, p) = edge_path(v);
            e.target == p.source
        }),
        Body::new(|v: &[&GraphFact]| {
            let (e, p) = edge_path(v);
            let mut nodes = Vec::with_capacity(p.nodes.len() + 1);
            nodes.push(e.source.clone());
            nodes.extend(p.nodes.iter().cloned());
            vec![GraphFact::Path(Path {
                source: e.source.clone(),
                target: p.target.clone(),
                weight: e.weight + p.weight,
                nodes,
            })]
        }),
    )
}

pub fn shortest_path_program() -> Program<GraphFact> {
    compose([clear_duplicate_paths(), primitive_paths(), transitive_paths()])
}
