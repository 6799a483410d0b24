//! PENMAN notation: parsing, canonical serialization and structural validation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Roles that end in `-of` but are not inverted relations.
const LEXICAL_OF_ROLES: &[&str] = &[":consist-of", ":prep-out-of", ":prep-on-behalf-of"];

/// A directed, labeled edge between two variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: String,
    pub role: String,
    pub target: String,
}

/// A constant attached to a variable, e.g. `:polarity -`.
///
/// `value` keeps its surface form, so quoted strings retain their quotes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attribute {
    pub var: String,
    pub role: String,
    pub value: String,
}

/// Rooted labeled graph. Role strings carry their leading `:`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AmrGraph {
    pub root: String,
    pub nodes: BTreeMap<String, String>,
    pub edges: Vec<Edge>,
    pub attributes: Vec<Attribute>,
}

impl AmrGraph {
    pub fn single(var: &str, concept: &str) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(var.to_string(), concept.to_string());
        AmrGraph {
            root: var.to_string(),
            nodes,
            edges: Vec::new(),
            attributes: Vec::new(),
        }
    }

    pub fn add_node(&mut self, var: &str, concept: &str) {
        self.nodes.insert(var.to_string(), concept.to_string());
    }

    pub fn add_edge(&mut self, source: &str, role: &str, target: &str) {
        self.edges.push(Edge {
            source: source.to_string(),
            role: role.to_string(),
            target: target.to_string(),
        });
    }

    pub fn add_attribute(&mut self, var: &str, role: &str, value: &str) {
        self.attributes.push(Attribute {
            var: var.to_string(),
            role: role.to_string(),
            value: value.to_string(),
        });
    }

    /// True when both graphs hold the same root, nodes, and edge/attribute sets,
    /// ignoring the order edges and attributes were recorded in.
    pub fn same_structure(&self, other: &AmrGraph) -> bool {
        let e1: BTreeSet<&Edge> = self.edges.iter().collect();
        let e2: BTreeSet<&Edge> = other.edges.iter().collect();
        let a1: BTreeSet<&Attribute> = self.attributes.iter().collect();
        let a2: BTreeSet<&Attribute> = other.attributes.iter().collect();
        self.root == other.root && self.nodes == other.nodes && e1 == e2 && a1 == a2
    }

    /// True if some node is the target of more than one edge.
    pub fn has_reentrancy(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges.iter().any(|e| !seen.insert(e.target.as_str()))
    }
}

impl fmt::Display for AmrGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serialize_penman(self) {
            Ok(text) => f.write_str(&text),
            Err(_) => f.write_str("(<invalid graph>)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PenmanError {
    #[error("unbalanced parentheses at byte {offset}")]
    UnbalancedParens { offset: usize },
    #[error("variable `{var}` declared twice (byte {offset})")]
    DuplicateVariable { var: String, offset: usize },
    #[error("reference to undeclared variable `{var}` at byte {offset}")]
    DanglingReference { var: String, offset: usize },
    #[error("node without concept at byte {offset}")]
    EmptyConcept { offset: usize },
    #[error("unexpected `{found}` at byte {offset}")]
    UnexpectedToken { found: String, offset: usize },
    #[error("graph is malformed: {0}")]
    InvariantViolation(String),
}

/// A structural problem reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingRoot(String),
    EmptyConcept(String),
    DanglingReference(String),
    BadRole(String),
    Disconnected(Vec<String>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingRoot(r) => write!(f, "root `{r}` is not a node"),
            Violation::EmptyConcept(v) => write!(f, "node `{v}` has an empty concept"),
            Violation::DanglingReference(v) => write!(f, "reference to undeclared variable `{v}`"),
            Violation::BadRole(r) => write!(f, "malformed role `{r}`"),
            Violation::Disconnected(vs) => write!(f, "unreachable from root: {}", vs.join(", ")),
        }
    }
}

/// Checks every structural invariant of [`AmrGraph`]. An empty list means the
/// graph is well formed.
pub fn validate(g: &AmrGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    if !g.nodes.contains_key(&g.root) {
        out.push(Violation::MissingRoot(g.root.clone()));
    }
    for (var, concept) in &g.nodes {
        if concept.trim().is_empty() {
            out.push(Violation::EmptyConcept(var.clone()));
        }
    }
    let mut dangling = BTreeSet::new();
    for e in &g.edges {
        for v in [&e.source, &e.target] {
            if !g.nodes.contains_key(v) {
                dangling.insert(v.clone());
            }
        }
        if !is_role(&e.role) {
            out.push(Violation::BadRole(e.role.clone()));
        }
    }
    for a in &g.attributes {
        if !g.nodes.contains_key(&a.var) {
            dangling.insert(a.var.clone());
        }
        if !is_role(&a.role) {
            out.push(Violation::BadRole(a.role.clone()));
        }
    }
    out.extend(dangling.into_iter().map(Violation::DanglingReference));

    if g.nodes.contains_key(&g.root) {
        let reached = undirected_reach(g);
        let missing: Vec<String> = g
            .nodes
            .keys()
            .filter(|v| !reached.contains(v.as_str()))
            .cloned()
            .collect();
        if !missing.is_empty() {
            out.push(Violation::Disconnected(missing));
        }
    }
    out
}

fn is_role(role: &str) -> bool {
    role.len() > 1 && role.starts_with(':') && !role.contains(char::is_whitespace)
}

fn undirected_reach(g: &AmrGraph) -> BTreeSet<&str> {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &g.edges {
        adj.entry(e.source.as_str()).or_default().push(e.target.as_str());
        adj.entry(e.target.as_str()).or_default().push(e.source.as_str());
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![g.root.as_str()];
    while let Some(v) = stack.pop() {
        if seen.insert(v) {
            if let Some(next) = adj.get(v) {
                stack.extend(next.iter().copied());
            }
        }
    }
    seen
}

/// Maps an inverted role like `:ARG0-of` to `(:ARG0, true)`.
pub fn normalize_role(role: &str) -> (String, bool) {
    if role.len() > 4 && role.ends_with("-of") && !LEXICAL_OF_ROLES.contains(&role) {
        (role[..role.len() - 3].to_string(), true)
    } else {
        (role.to_string(), false)
    }
}

/// Inverse of [`normalize_role`] for the inverted direction.
pub fn invert_role(role: &str) -> String {
    format!("{role}-of")
}

/// Token shapes that parse as constants when not declared as variables.
pub fn is_constant_token(tok: &str) -> bool {
    if tok == "-" || tok == "+" || tok.starts_with('"') {
        return true;
    }
    let body = tok.strip_prefix(['-', '+']).unwrap_or(tok);
    body.chars().next().is_some_and(|c| c.is_ascii_digit())
        || (body.starts_with('.') && body[1..].chars().next().is_some_and(|c| c.is_ascii_digit()))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Slash,
    Role(&'a str),
    Quoted(&'a str),
    Symbol(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn next_token(&mut self) -> Option<(Tok<'a>, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return None;
        }
        let start = self.pos;
        let tok = match bytes[start] {
            b'(' => {
                self.pos += 1;
                Tok::Open
            }
            b')' => {
                self.pos += 1;
                Tok::Close
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'"' => {
                let mut i = start + 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                self.pos = (i + 1).min(bytes.len());
                Tok::Quoted(&self.src[start..self.pos])
            }
            _ => {
                let mut i = start;
                while i < bytes.len() {
                    let c = bytes[i];
                    if c.is_ascii_whitespace() || c == b'(' || c == b')' || c == b'/' || c == b'"' {
                        break;
                    }
                    i += 1;
                }
                self.pos = i;
                let text = &self.src[start..i];
                if text.starts_with(':') {
                    Tok::Role(text)
                } else {
                    Tok::Symbol(text)
                }
            }
        };
        Some((tok, start))
    }
}

struct Parser<'a> {
    tokens: Vec<(Tok<'a>, usize)>,
    pos: usize,
    end: usize,
    graph: AmrGraph,
    decl_offsets: BTreeMap<String, usize>,
    // (parent, role, referenced variable, offset, inverted)
    pending: Vec<(String, String, String, usize, bool)>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(Tok<'a>, usize)> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<(Tok<'a>, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn unexpected(&self, tok: &Tok<'_>, offset: usize) -> PenmanError {
        let found = match tok {
            Tok::Open => "(".to_string(),
            Tok::Close => ")".to_string(),
            Tok::Slash => "/".to_string(),
            Tok::Role(s) | Tok::Quoted(s) | Tok::Symbol(s) => s.to_string(),
        };
        PenmanError::UnexpectedToken { found, offset }
    }

    /// Parses `( var / concept (role value)* )`; the opening paren is next.
    fn node(&mut self) -> Result<String, PenmanError> {
        let open_at = match self.bump() {
            Some((Tok::Open, off)) => off,
            Some((t, off)) => return Err(self.unexpected(&t, off)),
            None => return Err(PenmanError::EmptyConcept { offset: self.end }),
        };
        let var = match self.bump() {
            Some((Tok::Symbol(v), _)) => v.to_string(),
            Some((Tok::Close, off)) => return Err(PenmanError::EmptyConcept { offset: off }),
            Some((t, off)) => return Err(self.unexpected(&t, off)),
            None => return Err(PenmanError::UnbalancedParens { offset: open_at }),
        };
        match self.bump() {
            Some((Tok::Slash, _)) => {}
            Some((Tok::Close, off)) => return Err(PenmanError::EmptyConcept { offset: off }),
            Some((t, off)) => return Err(self.unexpected(&t, off)),
            None => return Err(PenmanError::UnbalancedParens { offset: open_at }),
        }
        let concept = match self.bump() {
            Some((Tok::Symbol(c), _)) | Some((Tok::Quoted(c), _)) => c.to_string(),
            Some((Tok::Close, off)) | Some((Tok::Role(_), off)) => {
                return Err(PenmanError::EmptyConcept { offset: off })
            }
            Some((t, off)) => return Err(self.unexpected(&t, off)),
            None => return Err(PenmanError::EmptyConcept { offset: self.end }),
        };
        if self.graph.nodes.contains_key(&var) {
            return Err(PenmanError::DuplicateVariable {
                var,
                offset: open_at,
            });
        }
        self.graph.nodes.insert(var.clone(), concept);
        self.decl_offsets.insert(var.clone(), open_at);

        loop {
            match self.bump() {
                Some((Tok::Close, _)) => return Ok(var),
                Some((Tok::Role(role), _)) => {
                    let (role, inverted) = normalize_role(role);
                    match self.peek().cloned() {
                        Some((Tok::Open, _)) => {
                            let child = self.node()?;
                            self.push_edge(&var, &role, &child, inverted);
                        }
                        Some((Tok::Quoted(c), _)) => {
                            self.pos += 1;
                            self.graph.add_attribute(&var, &role, c);
                        }
                        Some((Tok::Symbol(s), off)) => {
                            self.pos += 1;
                            self.pending
                                .push((var.clone(), role, s.to_string(), off, inverted));
                        }
                        Some((t, off)) => return Err(self.unexpected(&t, off)),
                        None => return Err(PenmanError::UnbalancedParens { offset: open_at }),
                    }
                }
                Some((t, off)) => return Err(self.unexpected(&t, off)),
                None => return Err(PenmanError::UnbalancedParens { offset: open_at }),
            }
        }
    }

    fn push_edge(&mut self, parent: &str, role: &str, child: &str, inverted: bool) {
        if inverted {
            self.graph.add_edge(child, role, parent);
        } else {
            self.graph.add_edge(parent, role, child);
        }
    }
}

/// Parses one PENMAN graph. Whitespace, including newlines, between tokens is
/// insignificant. Roles ending in `-of` are stored as edges in the forward
/// direction.
pub fn parse_penman(input: &str) -> Result<AmrGraph, PenmanError> {
    let mut lexer = Lexer::new(input);
    let mut tokens = Vec::new();
    while let Some(t) = lexer.next_token() {
        tokens.push(t);
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        end: input.len(),
        graph: AmrGraph::default(),
        decl_offsets: BTreeMap::new(),
        pending: Vec::new(),
    };
    match p.peek() {
        Some((Tok::Open, _)) => {}
        Some((Tok::Close, off)) => return Err(PenmanError::UnbalancedParens { offset: *off }),
        Some((t, off)) => return Err(p.unexpected(t, *off)),
        None => return Err(PenmanError::EmptyConcept { offset: 0 }),
    }
    let root = p.node()?;
    if let Some((t, off)) = p.peek() {
        return Err(match t {
            Tok::Close => PenmanError::UnbalancedParens { offset: *off },
            other => p.unexpected(other, *off),
        });
    }
    p.graph.root = root;

    for (parent, role, target, offset, inverted) in core::mem::take(&mut p.pending) {
        if p.graph.nodes.contains_key(&target) {
            p.push_edge(&parent, &role, &target, inverted);
        } else if is_constant_token(&target) {
            p.graph.add_attribute(&parent, &role, &target);
        } else {
            return Err(PenmanError::DanglingReference {
                var: target,
                offset,
            });
        }
    }
    Ok(p.graph)
}

/// One outgoing item of a node in canonical emission order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Item {
    /// A relation to another variable, with the role as it is written.
    Rel { role: String, target: String, edge: usize },
    Attr { role: String, value: String },
}

impl Item {
    fn key(&self) -> (&str, &str) {
        match self {
            Item::Rel { role, target, .. } => (role, target),
            Item::Attr { role, value } => (role, value),
        }
    }
}

/// Shared depth-first traversal used by serialization and linearization.
///
/// Forward edges are followed first; a node that cannot be reached from the
/// root along edge direction is reached through an inverted `-of` role.
pub(crate) struct Traversal<'g> {
    g: &'g AmrGraph,
    forward_reach: BTreeSet<&'g str>,
    used_edges: Vec<bool>,
    declared: BTreeSet<&'g str>,
    skip_role: Option<&'g str>,
}

/// Callbacks driven by [`Traversal`].
pub(crate) trait Emit {
    fn open(&mut self, var: &str, concept: &str);
    fn close(&mut self);
    fn role(&mut self, role: &str);
    fn reference(&mut self, var: &str, concept: &str);
    fn constant(&mut self, value: &str);
}

impl<'g> Traversal<'g> {
    pub(crate) fn new(g: &'g AmrGraph, skip_role: Option<&'g str>) -> Result<Self, PenmanError> {
        let violations = validate(g);
        if !violations.is_empty() {
            let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(PenmanError::InvariantViolation(msg.join("; ")));
        }
        let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &g.edges {
            out.entry(e.source.as_str()).or_default().push(e.target.as_str());
        }
        let mut forward_reach = BTreeSet::new();
        let mut stack = vec![g.root.as_str()];
        while let Some(v) = stack.pop() {
            if forward_reach.insert(v) {
                if let Some(n) = out.get(v) {
                    stack.extend(n.iter().copied());
                }
            }
        }
        Ok(Traversal {
            g,
            forward_reach,
            used_edges: vec![false; g.edges.len()],
            declared: BTreeSet::new(),
            skip_role,
        })
    }

    fn items(&self, var: &str) -> Vec<Item> {
        let mut items = Vec::new();
        for (i, e) in self.g.edges.iter().enumerate() {
            if self.used_edges[i] {
                continue;
            }
            if e.source == var {
                items.push(Item::Rel {
                    role: e.role.clone(),
                    target: e.target.clone(),
                    edge: i,
                });
            } else if e.target == var && !self.forward_reach.contains(e.source.as_str()) {
                items.push(Item::Rel {
                    role: invert_role(&e.role),
                    target: e.source.clone(),
                    edge: i,
                });
            }
        }
        for a in &self.g.attributes {
            if a.var == var && Some(a.role.as_str()) != self.skip_role {
                items.push(Item::Attr {
                    role: a.role.clone(),
                    value: a.value.clone(),
                });
            }
        }
        items.sort_by(|a, b| a.key().cmp(&b.key()));
        items
    }

    pub(crate) fn run<E: Emit>(&mut self, sink: &mut E) {
        let root = self.g.root.as_str();
        self.visit(root, sink);
    }

    fn visit<E: Emit>(&mut self, var: &'g str, sink: &mut E) {
        self.declared.insert(var);
        sink.open(var, &self.g.nodes[var]);
        for item in self.items(var) {
            match item {
                Item::Attr { role, value } => {
                    sink.role(&role);
                    sink.constant(&value);
                }
                Item::Rel { role, target, edge } => {
                    // an earlier subtree may have consumed this edge already
                    if self.used_edges[edge] {
                        continue;
                    }
                    self.used_edges[edge] = true;
                    sink.role(&role);
                    let (target, concept) = self
                        .g
                        .nodes
                        .get_key_value(target.as_str())
                        .expect("validated graph");
                    if self.declared.contains(target.as_str()) {
                        sink.reference(target, concept);
                    } else {
                        self.visit(target.as_str(), sink);
                    }
                }
            }
        }
        sink.close();
    }
}

struct PenmanWriter {
    out: String,
}

impl Emit for PenmanWriter {
    fn open(&mut self, var: &str, concept: &str) {
        self.out.push('(');
        self.out.push_str(var);
        self.out.push_str(" / ");
        self.out.push_str(concept);
    }
    fn close(&mut self) {
        self.out.push(')');
    }
    fn role(&mut self, role: &str) {
        self.out.push(' ');
        self.out.push_str(role);
        self.out.push(' ');
    }
    fn reference(&mut self, var: &str, _concept: &str) {
        self.out.push_str(var);
    }
    fn constant(&mut self, value: &str) {
        self.out.push_str(value);
    }
}

/// Serializes a valid graph as single-line PENMAN text.
///
/// Children are ordered by (role, target); each node is declared at its first
/// occurrence in depth-first order and referenced by variable afterwards.
pub fn serialize_penman(g: &AmrGraph) -> Result<String, PenmanError> {
    let mut t = Traversal::new(g, None)?;
    let mut w = PenmanWriter { out: String::new() };
    t.run(&mut w);
    Ok(w.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eat() -> AmrGraph {
        let mut g = AmrGraph::single("e", "eat-01");
        g.add_node("d", "dog");
        g.add_node("b", "bone");
        g.add_edge("e", ":ARG0", "d");
        g.add_edge("e", ":ARG1", "b");
        g
    }

    fn want() -> AmrGraph {
        let mut g = AmrGraph::single("w", "want-01");
        g.add_node("b", "boy");
        g.add_node("g", "go-02");
        g.add_edge("w", ":ARG0", "b");
        g.add_edge("w", ":ARG1", "g");
        g.add_edge("g", ":ARG0", "b");
        g
    }

    #[test]
    fn parses_single_node() {
        let g = parse_penman("(d / dog)").unwrap();
        assert_eq!(g, AmrGraph::single("d", "dog"));
    }

    #[test]
    fn parses_eat_graph() {
        let g = parse_penman("(e / eat-01 :ARG0 (d / dog) :ARG1 (b / bone))").unwrap();
        assert!(g.same_structure(&eat()));
        assert_eq!(g.nodes.len(), 3);
    }

    #[test]
    fn parses_reentrancy_as_edge() {
        let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        assert!(g.same_structure(&want()));
        assert!(g.has_reentrancy());
    }

    #[test]
    fn multi_line_and_forward_reference() {
        let text = "(w / want-01\n   :ARG1 (g / go-02\n      :ARG0 b)\n   :ARG0 (b / boy))";
        let g = parse_penman(text).unwrap();
        assert!(g.same_structure(&want()));
    }

    #[test]
    fn constants_and_inverse_roles() {
        let g = parse_penman(
            "(p / person :ARG0-of (t / teach-01 :polarity -) :quant 3 :name (n / name :op1 \"Kim\"))",
        )
        .unwrap();
        assert!(g.edges.contains(&Edge {
            source: "t".into(),
            role: ":ARG0".into(),
            target: "p".into()
        }));
        assert!(g.attributes.contains(&Attribute {
            var: "t".into(),
            role: ":polarity".into(),
            value: "-".into()
        }));
        assert!(g.attributes.iter().any(|a| a.value == "3"));
        assert!(g.attributes.iter().any(|a| a.value == "\"Kim\""));
        assert!(validate(&g).is_empty());
        let back = parse_penman(&serialize_penman(&g).unwrap()).unwrap();
        assert!(back.same_structure(&g));
    }

    #[test]
    fn lexical_of_role_is_not_inverted() {
        let g = parse_penman("(c / cake :consist-of (f / flour))").unwrap();
        assert_eq!(g.edges[0].role, ":consist-of");
        assert_eq!(g.edges[0].source, "c");
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert_eq!(
            parse_penman("(d / dog"),
            Err(PenmanError::UnbalancedParens { offset: 0 })
        );
        assert_eq!(
            parse_penman("(d / dog))"),
            Err(PenmanError::UnbalancedParens { offset: 9 })
        );
        assert!(matches!(
            parse_penman("(a / x :ARG0 (a / y))"),
            Err(PenmanError::DuplicateVariable { offset: 13, .. })
        ));
        assert!(matches!(
            parse_penman("(a / x :ARG0 zz)"),
            Err(PenmanError::DanglingReference { offset: 13, .. })
        ));
        assert_eq!(
            parse_penman("(a / )"),
            Err(PenmanError::EmptyConcept { offset: 5 })
        );
        assert!(parse_penman("").is_err());
        assert!(parse_penman("dog").is_err());
    }

    #[test]
    fn serializes_canonically() {
        assert_eq!(
            serialize_penman(&AmrGraph::single("d", "dog")).unwrap(),
            "(d / dog)"
        );
        assert_eq!(
            serialize_penman(&eat()).unwrap(),
            "(e / eat-01 :ARG0 (d / dog) :ARG1 (b / bone))"
        );
        assert_eq!(
            serialize_penman(&want()).unwrap(),
            "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))"
        );
    }

    #[test]
    fn serializes_upward_edges_with_inverse_roles() {
        // root r is only connected through an edge pointing into it
        let mut g = AmrGraph::single("r", "person");
        g.add_node("t", "teach-01");
        g.add_edge("t", ":ARG0", "r");
        let text = serialize_penman(&g).unwrap();
        assert_eq!(text, "(r / person :ARG0-of (t / teach-01))");
        assert!(parse_penman(&text).unwrap().same_structure(&g));
    }

    #[test]
    fn serialize_rejects_malformed() {
        let mut g = AmrGraph::single("d", "dog");
        g.add_edge("d", ":ARG0", "x");
        assert!(matches!(
            serialize_penman(&g),
            Err(PenmanError::InvariantViolation(_))
        ));
    }

    #[test]
    fn validate_reports_violations() {
        assert!(validate(&AmrGraph::single("d", "dog")).is_empty());

        let mut dangling = AmrGraph::single("d", "dog");
        dangling.add_edge("d", ":ARG0", "x");
        assert_eq!(
            validate(&dangling),
            vec![Violation::DanglingReference("x".into())]
        );

        let mut split = AmrGraph::single("d", "dog");
        split.add_node("c", "cat");
        assert_eq!(
            validate(&split),
            vec![Violation::Disconnected(vec!["c".into()])]
        );

        let mut bad = AmrGraph::single("d", "dog");
        bad.add_node("c", "cat");
        bad.add_edge("d", "ARG0", "c");
        assert_eq!(validate(&bad), vec![Violation::BadRole("ARG0".into())]);

        let missing = AmrGraph {
            root: "q".into(),
            ..AmrGraph::single("d", "dog")
        };
        assert!(validate(&missing).contains(&Violation::MissingRoot("q".into())));
    }
}
