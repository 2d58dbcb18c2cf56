use std::collections::BTreeMap;
use std::fmt;

use super::absint::{AbsVal, CallPattern, Domain};
use crate::frontend::{Symbol, TypeGrammar};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NodeLabel {
    Sym(Symbol),
    Max,
    Or,
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeLabel::Sym(s) => write!(f, "{s}"),
            NodeLabel::Max => write!(f, "MAX"),
            NodeLabel::Or => write!(f, "OR"),
        }
    }
}

/// An arc; `argpos` is `None` for arcs leaving an OR node.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GraphArc {
    pub from: usize,
    pub to: usize,
    pub argpos: Option<usize>,
}

/// Tree of forward arcs plus back arcs to ancestors. Node 0 is the root.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct RigidTypeGraph {
    pub labels: Vec<NodeLabel>,
    pub forarcs: Vec<GraphArc>,
    pub backarcs: Vec<GraphArc>,
}

/// Root-to-MAX path along forward arcs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CriticalPath {
    pub steps: Vec<GraphArc>,
}

enum Target {
    New(usize),
    Back(usize),
}

struct Builder<'a> {
    dom: Domain<'a>,
    g: RigidTypeGraph,
}

/// Marks a type alias whose expansion is in progress without a node.
const ALIAS: usize = usize::MAX;

impl Builder<'_> {
    fn node(&mut self, label: NodeLabel) -> usize {
        self.g.labels.push(label);
        self.g.labels.len() - 1
    }

    fn arc(&mut self, from: usize, to: Target, argpos: Option<usize>) {
        match to {
            Target::New(to) => self.g.forarcs.push(GraphArc { from, to, argpos }),
            Target::Back(to) => self.g.backarcs.push(GraphArc { from, to, argpos }),
        }
    }

    fn symbol_node(
        &mut self,
        f: &Symbol,
        args: &[AbsVal],
        open: &mut Vec<(AbsVal, usize)>,
        key: Option<&AbsVal>,
    ) -> usize {
        let id = self.node(NodeLabel::Sym(f.clone()));
        if let Some(k) = key {
            open.push((k.clone(), id));
        }
        for (i, a) in args.iter().enumerate() {
            let t = self.expand(a, open);
            self.arc(id, t, Some(i + 1));
        }
        if key.is_some() {
            open.pop();
        }
        id
    }

    fn expand(&mut self, v: &AbsVal, open: &mut Vec<(AbsVal, usize)>) -> Target {
        match v {
            AbsVal::Any => Target::New(self.node(NodeLabel::Max)),
            AbsVal::Struct(f, args) => Target::New(self.symbol_node(f, args, open, None)),
            AbsVal::Named(_) | AbsVal::Ground => {
                if let Some(&(_, id)) = open.iter().rev().find(|(k, _)| k == v) {
                    if id == ALIAS {
                        // an alias cycle denotes no terms; MAX over-approximates it
                        return Target::New(self.node(NodeLabel::Max));
                    }
                    return Target::Back(id);
                }
                let alts = self.dom.alternatives(v);
                match alts.as_slice() {
                    [AbsVal::Struct(f, args)] => {
                        Target::New(self.symbol_node(f, args, open, Some(v)))
                    }
                    [single] => {
                        open.push((v.clone(), ALIAS));
                        let t = self.expand(single, open);
                        open.pop();
                        t
                    }
                    _ => {
                        let id = self.node(NodeLabel::Or);
                        open.push((v.clone(), id));
                        for alt in &alts {
                            let t = self.expand(alt, open);
                            self.arc(id, t, None);
                        }
                        open.pop();
                        Target::New(id)
                    }
                }
            }
        }
    }
}

/// Materialises a call pattern as a rigid type graph.
pub fn pattern_to_type_graph(
    pattern: &CallPattern,
    functions: &BTreeMap<Symbol, usize>,
    grammar: &TypeGrammar,
) -> RigidTypeGraph {
    let mut b = Builder { dom: Domain { grammar, functions }, g: RigidTypeGraph::default() };
    b.symbol_node(&pattern.predicate, &pattern.args, &mut Vec::new(), None);
    b.g
}

impl RigidTypeGraph {
    pub fn root(&self) -> usize {
        0
    }

    fn children(&self, n: usize) -> impl Iterator<Item = &GraphArc> {
        self.forarcs.iter().filter(move |a| a.from == n)
    }

    pub fn parent(&self, n: usize) -> Option<usize> {
        self.forarcs.iter().find(|a| a.to == n).map(|a| a.from)
    }

    /// `a` is `b` or an ancestor of `b` in the tree.
    pub fn is_ancestor_or_self(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(n) = cur {
            if n == a {
                return true;
            }
            cur = self.parent(n);
        }
        false
    }

    /// Checks the structural invariants, returning a description of the first violation.
    pub fn validate(&self, arity: impl Fn(&Symbol) -> Option<usize>) -> Result<(), String> {
        let n = self.labels.len();
        let mut indeg = vec![0usize; n];
        for a in &self.forarcs {
            if a.from >= n || a.to >= n {
                return Err(format!("arc {a:?} out of range"));
            }
            indeg[a.to] += 1;
        }
        if n == 0 || indeg[0] != 0 {
            return Err("root missing or has a parent".into());
        }
        if let Some(bad) = (1..n).find(|&i| indeg[i] != 1) {
            return Err(format!("node {bad} has {} tree parents", indeg[bad]));
        }
        if let Some(bad) = (1..n).find(|&i| !self.is_ancestor_or_self(0, i)) {
            return Err(format!("node {bad} is not connected to the root"));
        }
        for a in &self.backarcs {
            if !self.is_ancestor_or_self(a.to, a.from) {
                return Err(format!("backarc {a:?} does not point to an ancestor"));
            }
        }
        for (i, label) in self.labels.iter().enumerate() {
            let mut pos: Vec<Option<usize>> = self
                .forarcs
                .iter()
                .chain(&self.backarcs)
                .filter(|a| a.from == i)
                .map(|a| a.argpos)
                .collect();
            match label {
                NodeLabel::Max if !pos.is_empty() => {
                    return Err(format!("MAX node {i} has outgoing arcs"))
                }
                NodeLabel::Sym(f) => {
                    let k = arity(f).ok_or_else(|| format!("unknown symbol {f}"))?;
                    pos.sort();
                    let want: Vec<Option<usize>> = (1..=k).map(Some).collect();
                    if pos != want {
                        return Err(format!("node {i} ({f}/{k}) has arcs {pos:?}"));
                    }
                }
                NodeLabel::Or if pos.iter().any(Option::is_some) => {
                    return Err(format!("OR node {i} has labelled arcs"))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// All forward paths from the root to a MAX node, depth first by argument position.
pub fn critical_paths(g: &RigidTypeGraph) -> Vec<CriticalPath> {
    fn go(g: &RigidTypeGraph, n: usize, path: &mut Vec<GraphArc>, out: &mut Vec<CriticalPath>) {
        if g.labels[n] == NodeLabel::Max {
            out.push(CriticalPath { steps: path.clone() });
            return;
        }
        for a in g.children(n) {
            path.push(*a);
            go(g, a.to, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    if !g.labels.is_empty() {
        go(g, 0, &mut Vec::new(), &mut out);
    }
    out
}
