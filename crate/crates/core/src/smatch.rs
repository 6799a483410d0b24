//! Smatch: F1 over matched triples under the best injective variable mapping.
//!
//! The search is restarted steepest-ascent hill climbing. [`compute_smatch_exact`]
//! enumerates every mapping and serves as the optimality oracle for small
//! graphs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec::{derive_seed, Executor, Sequential};
use crate::penman::AmrGraph;

pub const DEFAULT_RESTARTS: usize = 4;
pub const TOP_ROLE: &str = "TOP";
const TOP_VALUE: &str = "top";
/// Largest graph (in variables) [`compute_smatch_exact`] accepts.
pub const EXACT_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmatchError {
    #[error("exhaustive search limited to {EXACT_LIMIT} variables, got {0}")]
    TooLarge(usize),
    #[error("corpus is empty")]
    EmptyCorpus,
}

/// Triple decomposition of a graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct TripleSet {
    /// `(variable, concept)`
    pub instances: BTreeSet<(String, String)>,
    /// `(role, source, target)`
    pub relations: BTreeSet<(String, String, String)>,
    /// `(role, variable, constant)`; holds the `(TOP, root, top)` triple.
    pub attributes: BTreeSet<(String, String, String)>,
}

impl TripleSet {
    pub fn len(&self) -> usize {
        self.instances.len() + self.relations.len() + self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Variables in sorted order.
    pub fn variables(&self) -> Vec<&str> {
        self.instances.iter().map(|(v, _)| v.as_str()).collect()
    }
}

pub fn extract_triples(g: &AmrGraph) -> TripleSet {
    let mut t = TripleSet::default();
    for (var, concept) in &g.nodes {
        t.instances.insert((var.clone(), concept.clone()));
    }
    for e in &g.edges {
        t.relations
            .insert((e.role.clone(), e.source.clone(), e.target.clone()));
    }
    for a in &g.attributes {
        t.attributes
            .insert((a.role.clone(), a.var.clone(), a.value.clone()));
    }
    t.attributes.insert((
        TOP_ROLE.to_string(),
        g.root.clone(),
        TOP_VALUE.to_string(),
    ));
    t
}

/// Number of left triples that become identical to a right triple once left
/// variables are renamed through `mapping`. Unmapped variables match nothing.
pub fn score_mapping(
    left: &TripleSet,
    right: &TripleSet,
    mapping: &BTreeMap<String, String>,
) -> usize {
    let m = |v: &String| mapping.get(v).cloned();
    let mut n = 0;
    for (v, c) in &left.instances {
        if let Some(w) = m(v) {
            n += right.instances.contains(&(w, c.clone())) as usize;
        }
    }
    for (r, a, b) in &left.relations {
        if let (Some(x), Some(y)) = (m(a), m(b)) {
            n += right.relations.contains(&(r.clone(), x, y)) as usize;
        }
    }
    for (r, v, c) in &left.attributes {
        if let Some(w) = m(v) {
            n += right.attributes.contains(&(r.clone(), w, c.clone())) as usize;
        }
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmatchScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub total_left: usize,
    pub total_right: usize,
    /// Best mapping found, candidate variable to gold variable.
    pub mapping: BTreeMap<String, String>,
}

impl SmatchScore {
    pub fn from_counts(matched: usize, total_left: usize, total_right: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(matched, total_left);
        let recall = ratio(matched, total_right);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        SmatchScore {
            precision,
            recall,
            f1,
            matched,
            total_left,
            total_right,
            mapping: BTreeMap::new(),
        }
    }
}

type LeftRelation = (usize, usize, Vec<(usize, usize)>);

/// Index-based view of a pair of triple sets used by the search.
struct Problem {
    n_left: usize,
    n_right: usize,
    /// `unary[a * n_right + b]`: instance and attribute triples of left `a`
    /// matched when `a` maps to right `b`.
    unary: Vec<u32>,
    /// per left relation: source, target and the right `(b1, b2)` pairs it
    /// would match
    relations: Vec<LeftRelation>,
}

impl Problem {
    fn new(left: &TripleSet, right: &TripleSet) -> Self {
        let lv = left.variables();
        let rv = right.variables();
        let li = |v: &str| lv.binary_search(&v).expect("variable has an instance");
        let ri = |v: &str| rv.binary_search(&v).expect("variable has an instance");
        let (n_left, n_right) = (lv.len(), rv.len());
        let mut unary = vec![0u32; n_left * n_right];
        for (a, ca) in &left.instances {
            for (b, cb) in &right.instances {
                if ca == cb {
                    unary[li(a) * n_right + ri(b)] += 1;
                }
            }
        }
        for (ra, a, ca) in &left.attributes {
            for (rb, b, cb) in &right.attributes {
                if ra == rb && ca == cb {
                    unary[li(a) * n_right + ri(b)] += 1;
                }
            }
        }
        let relations = left
            .relations
            .iter()
            .map(|(r, a1, a2)| {
                let cands = right
                    .relations
                    .iter()
                    .filter(|(rr, _, _)| rr == r)
                    .map(|(_, b1, b2)| (ri(b1), ri(b2)))
                    .collect();
                (li(a1), li(a2), cands)
            })
            .collect();
        Problem {
            n_left,
            n_right,
            unary,
            relations,
        }
    }

    fn score(&self, map: &[Option<usize>]) -> usize {
        let mut s = 0usize;
        for (a, b) in map.iter().enumerate() {
            if let Some(b) = b {
                s += self.unary[a * self.n_right + b] as usize;
            }
        }
        for (a1, a2, cands) in &self.relations {
            if let (Some(b1), Some(b2)) = (map[*a1], map[*a2]) {
                s += cands.contains(&(b1, b2)) as usize;
            }
        }
        s
    }

    fn greedy_init(&self, left: &TripleSet, right: &TripleSet) -> Vec<Option<usize>> {
        let mut used = vec![false; self.n_right];
        let rc: Vec<&String> = right.instances.iter().map(|(_, c)| c).collect();
        left.instances
            .iter()
            .map(|(_, c)| {
                let hit = (0..self.n_right).find(|&b| !used[b] && rc[b] == c);
                if let Some(b) = hit {
                    used[b] = true;
                }
                hit
            })
            .collect()
    }

    fn random_init(&self, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
        let mut perm: Vec<usize> = (0..self.n_right).collect();
        perm.shuffle(rng);
        (0..self.n_left).map(|a| perm.get(a).copied()).collect()
    }

    /// Steepest ascent over reassignment (to a free right variable or to
    /// nothing) and swap moves. Ties keep the first move in variable order.
    fn climb(&self, mut map: Vec<Option<usize>>) -> (usize, Vec<Option<usize>>) {
        let mut current = self.score(&map);
        loop {
            let mut used = vec![false; self.n_right];
            for b in map.iter().flatten() {
                used[*b] = true;
            }
            let mut best: Option<(usize, Vec<Option<usize>>)> = None;
            let consider = |cand: Vec<Option<usize>>, best: &mut Option<(usize, Vec<Option<usize>>)>| {
                let s = self.score(&cand);
                if s > best.as_ref().map_or(current, |b| b.0) {
                    *best = Some((s, cand));
                }
            };
            for a in 0..self.n_left {
                for (b, &taken) in used.iter().enumerate() {
                    if !taken {
                        let mut cand = map.clone();
                        cand[a] = Some(b);
                        consider(cand, &mut best);
                    }
                }
                if map[a].is_some() {
                    let mut cand = map.clone();
                    cand[a] = None;
                    consider(cand, &mut best);
                }
            }
            for a in 0..self.n_left {
                for a2 in a + 1..self.n_left {
                    if map[a] != map[a2] {
                        let mut cand = map.clone();
                        cand.swap(a, a2);
                        consider(cand, &mut best);
                    }
                }
            }
            match best {
                Some((s, m)) => {
                    current = s;
                    map = m;
                }
                None => return (current, map),
            }
        }
    }
}

fn named_mapping(left: &TripleSet, right: &TripleSet, map: &[Option<usize>]) -> BTreeMap<String, String> {
    let lv = left.variables();
    let rv = right.variables();
    map.iter()
        .enumerate()
        .filter_map(|(a, b)| b.map(|b| (lv[a].to_string(), rv[b].to_string())))
        .collect()
}

fn hill_climb(left: &TripleSet, right: &TripleSet, restarts: usize, seed: u64) -> (usize, Vec<Option<usize>>) {
    let problem = Problem::new(left, right);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = problem.climb(problem.greedy_init(left, right));
    for _ in 1..restarts.max(1) {
        let found = problem.climb(problem.random_init(&mut rng));
        if found.0 > best.0 {
            best = found;
        }
    }
    best
}

/// Smatch of `candidate` against `gold`: precision is relative to the
/// candidate's triples, recall to the gold's.
///
/// The search always runs in a canonical orientation, so swapping the
/// arguments swaps precision and recall exactly.
pub fn compute_smatch(candidate: &AmrGraph, gold: &AmrGraph, restarts: usize, seed: u64) -> SmatchScore {
    let left = extract_triples(candidate);
    let right = extract_triples(gold);
    let forward = (left.instances.len(), &left) <= (right.instances.len(), &right);
    let (matched, mapping) = if forward {
        let (m, map) = hill_climb(&left, &right, restarts, seed);
        (m, named_mapping(&left, &right, &map))
    } else {
        let (m, map) = hill_climb(&right, &left, restarts, seed);
        let inverse = named_mapping(&right, &left, &map)
            .into_iter()
            .map(|(g, c)| (c, g))
            .collect();
        (m, inverse)
    };
    let mut score = SmatchScore::from_counts(matched, left.len(), right.len());
    score.mapping = mapping;
    score
}

/// Globally optimal Smatch by enumerating every injective partial mapping.
pub fn compute_smatch_exact(candidate: &AmrGraph, gold: &AmrGraph) -> Result<SmatchScore, SmatchError> {
    let largest = candidate.nodes.len().max(gold.nodes.len());
    if largest > EXACT_LIMIT {
        return Err(SmatchError::TooLarge(largest));
    }
    let left = extract_triples(candidate);
    let right = extract_triples(gold);
    let lv: Vec<String> = left.variables().into_iter().map(String::from).collect();
    let rv: Vec<String> = right.variables().into_iter().map(String::from).collect();

    struct Search<'a> {
        left: &'a TripleSet,
        right: &'a TripleSet,
        lv: &'a [String],
        rv: &'a [String],
        used: Vec<bool>,
        current: BTreeMap<String, String>,
        best: Option<(usize, BTreeMap<String, String>)>,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize) {
            if i == self.lv.len() {
                let s = score_mapping(self.left, self.right, &self.current);
                if self.best.as_ref().is_none_or(|b| s > b.0) {
                    self.best = Some((s, self.current.clone()));
                }
                return;
            }
            self.go(i + 1);
            for j in 0..self.rv.len() {
                if !self.used[j] {
                    self.used[j] = true;
                    self.current.insert(self.lv[i].clone(), self.rv[j].clone());
                    self.go(i + 1);
                    self.current.remove(&self.lv[i]);
                    self.used[j] = false;
                }
            }
        }
    }
    let mut search = Search {
        left: &left,
        right: &right,
        lv: &lv,
        rv: &rv,
        used: vec![false; rv.len()],
        current: BTreeMap::new(),
        best: None,
    };
    search.go(0);
    let (matched, mapping) = search.best.expect("at least the empty mapping");
    let mut score = SmatchScore::from_counts(matched, left.len(), right.len());
    score.mapping = mapping;
    Ok(score)
}

/// Scores each `(candidate, gold)` pair with a seed derived from `seed` and
/// the pair index, so results do not depend on the executor's schedule.
pub fn score_pairs<E: Executor>(
    exec: &E,
    pairs: &[(AmrGraph, AmrGraph)],
    restarts: usize,
    seed: u64,
) -> Vec<SmatchScore> {
    exec.map(pairs, |i, (c, g)| {
        compute_smatch(c, g, restarts, derive_seed(seed, i as u64))
    })
}

/// Micro-average: counts are summed before computing precision and recall.
pub fn aggregate(scores: &[SmatchScore]) -> Result<SmatchScore, SmatchError> {
    if scores.is_empty() {
        return Err(SmatchError::EmptyCorpus);
    }
    let (m, l, r) = scores.iter().fold((0, 0, 0), |acc, s| {
        (acc.0 + s.matched, acc.1 + s.total_left, acc.2 + s.total_right)
    });
    Ok(SmatchScore::from_counts(m, l, r))
}

pub fn corpus_smatch(
    pairs: &[(AmrGraph, AmrGraph)],
    restarts: usize,
    seed: u64,
) -> Result<SmatchScore, SmatchError> {
    aggregate(&score_pairs(&Sequential, pairs, restarts, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::parse_penman;

    fn g(text: &str) -> AmrGraph {
        parse_penman(text).unwrap()
    }

    #[test]
    fn triple_counts() {
        assert_eq!(extract_triples(&g("(d / dog)")).len(), 2);
        assert_eq!(
            extract_triples(&g("(e / eat-01 :ARG0 (d / dog) :ARG1 (b / bone))")).len(),
            6
        );
        let t = extract_triples(&g("(g / go-02 :polarity -)"));
        assert!(t
            .attributes
            .contains(&(":polarity".into(), "g".into(), "-".into())));
    }

    #[test]
    fn score_mapping_examples() {
        let a = extract_triples(&g("(e / eat-01 :ARG0 (d / dog))"));
        let id: BTreeMap<String, String> =
            [("e", "e"), ("d", "d")].iter().map(|(x, y)| (x.to_string(), y.to_string())).collect();
        assert_eq!(score_mapping(&a, &a, &id), a.len());
        assert_eq!(score_mapping(&a, &a, &BTreeMap::new()), 0);

        let dog = extract_triples(&g("(a / dog)"));
        let cat = extract_triples(&g("(b / cat)"));
        let ab: BTreeMap<String, String> = [("a".to_string(), "b".to_string())].into();
        assert_eq!(score_mapping(&dog, &cat, &ab), 1);
    }

    #[test]
    fn small_examples() {
        let eat = g("(e / eat-01 :ARG0 (d / dog) :ARG1 (b / bone))");
        let s = compute_smatch(&eat, &eat, DEFAULT_RESTARTS, 1);
        assert_eq!(s.f1, 1.0);
        assert_eq!(s.matched, 6);

        let s = compute_smatch(&g("(a / dog)"), &g("(b / cat)"), DEFAULT_RESTARTS, 1);
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));

        let left = g("(e / eat-01 :ARG0 (d / dog))");
        let right = g("(e2 / eat-01 :ARG0 (c / cat))");
        let s = compute_smatch(&left, &right, DEFAULT_RESTARTS, 1);
        let exact = compute_smatch_exact(&left, &right).unwrap();
        assert_eq!((s.matched, s.total_left, s.total_right), (3, 4, 4));
        assert_eq!(s.f1, 0.75);
        assert_eq!(exact.matched, 3);
        assert_eq!(s.mapping, exact.mapping);
    }

    #[test]
    fn exact_on_disjoint_concepts() {
        let s = compute_smatch_exact(
            &g("(a / x :mod (b / y))"),
            &g("(c / p :ARG0 (d / q))"),
        )
        .unwrap();
        assert_eq!(s.matched, 1);
    }

    #[test]
    fn exact_rejects_large_graphs() {
        let mut big = AmrGraph::single("v0", "c");
        for i in 1..=EXACT_LIMIT {
            let v = alloc::format!("v{i}");
            big.add_node(&v, "c");
            big.add_edge("v0", ":op", &v);
        }
        assert_eq!(
            compute_smatch_exact(&big, &big),
            Err(SmatchError::TooLarge(EXACT_LIMIT + 1))
        );
    }

    #[test]
    fn corpus_micro_average() {
        let a = SmatchScore::from_counts(3, 4, 4);
        let b = SmatchScore::from_counts(1, 2, 2);
        let s = aggregate(&[a, b]).unwrap();
        assert!((s.precision - 4.0 / 6.0).abs() < 1e-15);
        assert!((s.recall - 4.0 / 6.0).abs() < 1e-15);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(corpus_smatch(&[], 4, 0), Err(SmatchError::EmptyCorpus));

        let x = g("(e / eat-01 :ARG0 (d / dog))");
        let y = g("(e2 / eat-01 :ARG0 (c / cat))");
        let single = corpus_smatch(&[(x.clone(), y.clone())], 4, 0).unwrap();
        assert_eq!(single.f1, compute_smatch(&x, &y, 4, derive_seed(0, 0)).f1);
        let same = corpus_smatch(&[(x.clone(), x.clone()), (y.clone(), y)], 4, 0).unwrap();
        assert_eq!(same.f1, 1.0);
    }

    #[test]
    fn swap_exchanges_precision_and_recall() {
        let a = g("(e / eat-01 :ARG0 (d / dog) :ARG1 (b / bone))");
        let b = g("(x / eat-01 :ARG0 (y / dog))");
        let ab = compute_smatch(&a, &b, 4, 9);
        let ba = compute_smatch(&b, &a, 4, 9);
        assert_eq!(ab.precision, ba.recall);
        assert_eq!(ab.recall, ba.precision);
        assert_eq!(ab.f1, ba.f1);
    }
}
