//! Variable-free linearization of AMR graphs and repair-restoration of model output.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::penman::{is_constant_token, normalize_role, AmrGraph, Emit, PenmanError, Traversal};
use crate::smatch::{compute_smatch, SmatchScore, DEFAULT_RESTARTS};

pub const WIKI_ROLE: &str = ":wiki";

/// Single-line token sequence: concepts, roles, parentheses and constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearizedAmr {
    pub tokens: Vec<String>,
}

impl LinearizedAmr {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for LinearizedAmr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

impl FromStr for LinearizedAmr {
    type Err = core::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(LinearizedAmr {
            tokens: s.split_whitespace().map(str::to_string).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinearizeError {
    #[error(transparent)]
    Graph(#[from] PenmanError),
    #[error("no concept token to restore a graph from")]
    Unrestorable,
}

struct TokenWriter {
    tokens: Vec<String>,
}

impl Emit for TokenWriter {
    fn open(&mut self, _var: &str, concept: &str) {
        self.tokens.push("(".to_string());
        self.tokens.push(concept.to_string());
    }
    fn close(&mut self) {
        self.tokens.push(")".to_string());
    }
    fn role(&mut self, role: &str) {
        self.tokens.push(role.to_string());
    }
    fn reference(&mut self, _var: &str, concept: &str) {
        self.tokens.push("(".to_string());
        self.tokens.push(concept.to_string());
        self.tokens.push(")".to_string());
    }
    fn constant(&mut self, value: &str) {
        self.tokens.push(value.to_string());
    }
}

/// Drops `:wiki` attributes and variables. A re-entrant reference becomes a
/// single-node copy `( concept )` of the node it points to.
pub fn preprocess(g: &AmrGraph) -> Result<LinearizedAmr, LinearizeError> {
    let mut t = Traversal::new(g, Some(WIKI_ROLE))?;
    let mut w = TokenWriter { tokens: Vec::new() };
    t.run(&mut w);
    Ok(LinearizedAmr { tokens: w.tokens })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Open,
    Close,
    Role,
    Constant,
    Concept,
}

fn classify(tok: &str) -> Option<Kind> {
    match tok {
        "(" => Some(Kind::Open),
        ")" => Some(Kind::Close),
        _ if tok.len() > 1 && tok.starts_with(':') => Some(Kind::Role),
        _ if is_constant_token(tok) => Some(Kind::Constant),
        _ if tok.chars().next().is_some_and(char::is_alphabetic) => Some(Kind::Concept),
        _ => None,
    }
}

struct Node<'a> {
    concept: &'a str,
    children: Vec<(&'a str, Child<'a>)>,
}

enum Child<'a> {
    Node(Node<'a>),
    Constant(&'a str),
}

struct Restorer<'a> {
    toks: Vec<(Kind, &'a str)>,
    pos: usize,
}

impl<'a> Restorer<'a> {
    fn peek(&self) -> Option<Kind> {
        self.toks.get(self.pos).map(|t| t.0)
    }

    /// Body of a node whose opening paren (if any) is already consumed.
    /// Returns `None` when the node never gets a concept.
    fn node(&mut self, mut head: Option<&'a str>) -> Option<Node<'a>> {
        let mut children = Vec::new();
        while let Some(&(kind, text)) = self.toks.get(self.pos) {
            self.pos += 1;
            match (kind, head) {
                (Kind::Close, _) => break,
                (Kind::Concept, None) => head = Some(text),
                // nothing before the concept can attach to anything
                (Kind::Role | Kind::Constant, None) => {}
                (Kind::Open, None) => {}
                (Kind::Role, Some(_)) => match self.peek() {
                    Some(Kind::Open) => {
                        self.pos += 1;
                        if let Some(n) = self.node(None) {
                            children.push((text, Child::Node(n)));
                        }
                    }
                    Some(Kind::Concept) => {
                        let concept = self.toks[self.pos].1;
                        self.pos += 1;
                        children.push((
                            text,
                            Child::Node(Node {
                                concept,
                                children: Vec::new(),
                            }),
                        ));
                    }
                    Some(Kind::Constant) => {
                        children.push((text, Child::Constant(self.toks[self.pos].1)));
                        self.pos += 1;
                    }
                    // role without a filler
                    _ => {}
                },
                // unattached subtree: consume it so its closer is not mistaken for ours
                (Kind::Open, Some(_)) => {
                    let _ = self.node(None);
                }
                (Kind::Concept | Kind::Constant, Some(_)) => {}
            }
        }
        head.map(|concept| Node { concept, children })
    }
}

struct Builder {
    graph: AmrGraph,
    next: usize,
}

impl Builder {
    fn add(&mut self, node: &Node<'_>) -> String {
        let var = format!("v{}", self.next);
        self.next += 1;
        self.graph.add_node(&var, node.concept);
        for (role, child) in &node.children {
            let (role, inverted) = normalize_role(role);
            match child {
                Child::Node(n) => {
                    let c = self.add(n);
                    if inverted {
                        self.graph.add_edge(&c, &role, &var);
                    } else {
                        self.graph.add_edge(&var, &role, &c);
                    }
                }
                Child::Constant(value) => self.graph.add_attribute(&var, &role, value),
            }
        }
        var
    }
}

/// Rebuilds a valid graph from arbitrary model output.
///
/// Unclassifiable tokens are dropped, roles without a filler are dropped,
/// stray closers are ignored and missing closers are implied at the end.
/// Variables `v0, v1, ...` are assigned in pre-order. Only the first complete
/// top-level node is kept.
pub fn restore<S: AsRef<str>>(tokens: &[S]) -> Result<AmrGraph, LinearizeError> {
    let toks: Vec<(Kind, &str)> = tokens
        .iter()
        .filter_map(|t| classify(t.as_ref()).map(|k| (k, t.as_ref())))
        .collect();
    let mut r = Restorer { toks, pos: 0 };
    while let Some(kind) = r.peek() {
        r.pos += 1;
        let root = match kind {
            Kind::Open => r.node(None),
            Kind::Concept => {
                let head = r.toks[r.pos - 1].1;
                r.node(Some(head))
            }
            _ => None,
        };
        if let Some(root) = root {
            let mut b = Builder {
                graph: AmrGraph::default(),
                next: 0,
            };
            let var = b.add(&root);
            b.graph.root = var;
            return Ok(b.graph);
        }
    }
    Err(LinearizeError::Unrestorable)
}

/// Graph without its `:wiki` attributes.
pub fn strip_wiki(g: &AmrGraph) -> AmrGraph {
    let mut out = g.clone();
    out.attributes.retain(|a| a.role != WIKI_ROLE);
    out
}

/// Smatch of `restore(preprocess(g))` (candidate) against `g` without wiki
/// links (gold).
pub fn roundtrip_score(g: &AmrGraph) -> Result<SmatchScore, LinearizeError> {
    let gold = strip_wiki(g);
    let restored = restore(&preprocess(g)?.tokens)?;
    Ok(compute_smatch(&restored, &gold, DEFAULT_RESTARTS, 0))
}
