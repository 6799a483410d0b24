//! Seeded generators of random graphs and token sequences, for property tests
//! and fuzzing of the parsers and the metric.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::penman::AmrGraph;

const CONCEPTS: &[&str] = &["dog", "cat", "eat-01", "want-01", "big", "boy"];
const ROLES: &[&str] = &[":ARG0", ":ARG1", ":ARG2", ":mod", ":location"];
const ATTRIBUTE_ROLES: &[&str] = &[":polarity", ":quant", ":name"];
const CONSTANTS: &[&str] = &["-", "+", "3", "42", "\"Paris\""];

/// A random tree with `1..=max_nodes` nodes and occasional attributes.
///
/// Concepts repeat on purpose so that variable alignment is ambiguous.
pub fn random_tree<R: Rng>(rng: &mut R, max_nodes: usize) -> AmrGraph {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let mut g = AmrGraph::single("v0", CONCEPTS.choose(rng).unwrap());
    for i in 1..n {
        let var = format!("v{i}");
        g.add_node(&var, CONCEPTS.choose(rng).unwrap());
        let parent = format!("v{}", rng.gen_range(0..i));
        g.add_edge(&parent, ROLES.choose(rng).unwrap(), &var);
    }
    for i in 0..n {
        if rng.gen_bool(0.2) {
            g.add_attribute(&format!("v{i}"), ATTRIBUTE_ROLES.choose(rng).unwrap(), CONSTANTS.choose(rng).unwrap());
        }
    }
    g
}

/// A random tree plus up to `n / 2` extra edges, which may create
/// re-entrancies and cycles.
pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize) -> AmrGraph {
    let mut g = random_tree(rng, max_nodes);
    let n = g.nodes.len();
    if n < 2 {
        return g;
    }
    for _ in 0..rng.gen_range(0..=n / 2) {
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        let role = ROLES.choose(rng).unwrap();
        let (s, t) = (format!("v{s}"), format!("v{t}"));
        if s != t && !g.edges.iter().any(|e| e.source == s && e.target == t && e.role == *role) {
            g.add_edge(&s, role, &t);
        }
    }
    g
}

/// Random token soup over the linearized vocabulary plus junk tokens.
pub fn random_tokens<R: Rng>(rng: &mut R, max_len: usize) -> Vec<String> {
    const JUNK: &[&str] = &["(", ")", "(", ")", "/", "<unk>", "</s>", ":ARG0-of", ":", "\"", "-", "7"];
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| match rng.gen_range(0..4) {
            0 => CONCEPTS.choose(rng).unwrap().to_string(),
            1 => ROLES.choose(rng).unwrap().to_string(),
            2 => CONSTANTS.choose(rng).unwrap().to_string(),
            _ => JUNK.choose(rng).unwrap().to_string(),
        })
        .collect()
}
