use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::Dfs;

use crate::frontend::{Program, Symbol};

/// Predicate dependency structure of a program.
#[derive(Clone, Debug)]
pub struct CallGraph {
    /// Direct "refers to" edges.
    pub refers: BTreeSet<(Symbol, Symbol)>,
    /// Predicates reachable from each predicate by one or more edges.
    pub closure: BTreeMap<Symbol, BTreeSet<Symbol>>,
    /// Strongly connected components, each sorted, in a deterministic order.
    pub sccs: Vec<Vec<Symbol>>,
    /// Per clause, 0-based indices of body atoms mutually recursive with the head.
    pub recursive_atoms: Vec<Vec<usize>>,
}

impl CallGraph {
    pub fn depends_on(&self, p: &Symbol, q: &Symbol) -> bool {
        self.closure.get(p).is_some_and(|s| s.contains(q))
    }

    /// `p` and `q` depend on each other.
    pub fn mutually_recursive(&self, p: &Symbol, q: &Symbol) -> bool {
        self.depends_on(p, q) && self.depends_on(q, p)
    }

    pub fn is_recursive_clause(&self, clause: usize) -> bool {
        !self.recursive_atoms[clause].is_empty()
    }
}

pub fn build_call_graph(program: &Program) -> CallGraph {
    let mut g: DiGraph<Symbol, ()> = DiGraph::new();
    let mut index: BTreeMap<Symbol, NodeIndex> = BTreeMap::new();
    for (p, _) in program.predicates() {
        index.insert(p.clone(), g.add_node(p.clone()));
    }
    let mut refers = BTreeSet::new();
    for c in &program.clauses {
        for b in &c.body {
            if refers.insert((c.head.predicate.clone(), b.predicate.clone())) {
                g.add_edge(index[&c.head.predicate], index[&b.predicate], ());
            }
        }
    }

    let mut closure = BTreeMap::new();
    for (p, &start) in &index {
        let mut reach = BTreeSet::new();
        for n in g.neighbors(start) {
            let mut dfs = Dfs::new(&g, n);
            while let Some(m) = dfs.next(&g) {
                reach.insert(g[m].clone());
            }
        }
        closure.insert(p.clone(), reach);
    }

    let mut sccs: Vec<Vec<Symbol>> = tarjan_scc(&g)
        .into_iter()
        .map(|comp| {
            let mut names: Vec<Symbol> = comp.into_iter().map(|n| g[n].clone()).collect();
            names.sort();
            names
        })
        .collect();
    sccs.sort();

    let mut cg = CallGraph { refers, closure, sccs, recursive_atoms: Vec::new() };
    cg.recursive_atoms = program
        .clauses
        .iter()
        .map(|c| {
            c.body
                .iter()
                .enumerate()
                .filter(|(_, b)| cg.mutually_recursive(&c.head.predicate, &b.predicate))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    cg
}
