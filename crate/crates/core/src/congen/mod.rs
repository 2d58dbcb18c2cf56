//! Symbolic termination conditions and their reduction to Diophantine constraints.

mod dump;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;

use crate::callset::{
    critical_paths, pattern_to_type_graph, CallGraph, CallPattern, NodeLabel,
};
use crate::frontend::{Atom, Program, Symbol, TypeGrammar};
use crate::polyalg::{
    compose, symbol_stem, Interpretation, Monomial, PolyError, PolyTemplate, Shape, UPoly,
    Unknown, UnknownMinter, VPoly, Var,
};

pub use dump::{parse_system, DumpError};

/// `lhs >= rhs`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Ineq {
    pub lhs: VPoly,
    pub rhs: VPoly,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CondKind {
    /// Validity of the head's interargument relation, given the body's.
    Interargument { clause: usize },
    /// Decrease from the head to the recursive body atom `atom` (0-based).
    Decrease { clause: usize, atom: usize },
}

impl CondKind {
    pub fn clause(&self) -> usize {
        match self {
            CondKind::Interargument { clause } | CondKind::Decrease { clause, .. } => *clause,
        }
    }
}

impl fmt::Display for CondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondKind::Interargument { clause } => {
                write!(f, "interargument relation of clause {}", clause + 1)
            }
            CondKind::Decrease { clause, atom } => {
                write!(f, "decrease for body atom {} of clause {}", atom + 1, clause + 1)
            }
        }
    }
}

/// `premises => conclusion`, all over one clause's variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CondConstraint {
    pub premises: Vec<Ineq>,
    pub conclusion: Ineq,
    pub kind: CondKind,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Relation {
    Geq0,
    Eq0,
    Gt0,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Geq0 => ">=",
            Relation::Eq0 => "=",
            Relation::Gt0 => ">",
        })
    }
}

/// Where a Diophantine constraint came from.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Origin {
    Rigidity { pattern: String, path: usize },
    /// Coefficient of `monomial` in the unconditional form of condition `cond`.
    Coefficient { cond: usize, monomial: String },
    /// The `conc` polynomial of condition `cond` is not constant.
    ConcNonConstant { cond: usize },
    Text(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Rigidity { pattern, path } => {
                write!(f, "rigidity of {pattern}, critical path {}", path + 1)
            }
            Origin::Coefficient { cond, monomial } => {
                write!(f, "condition {}, coefficient of {monomial}", cond + 1)
            }
            Origin::ConcNonConstant { cond } => write!(f, "condition {}, conc not constant", cond + 1),
            Origin::Text(t) => f.write_str(t),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DioConstraint {
    pub poly: UPoly,
    pub relation: Relation,
    pub origin: Origin,
}

impl DioConstraint {
    pub fn holds(&self, value: &num_bigint::BigInt) -> bool {
        use num_traits::Zero;
        match self.relation {
            Relation::Geq0 => *value >= num_bigint::BigInt::zero(),
            Relation::Eq0 => value.is_zero(),
            Relation::Gt0 => *value > num_bigint::BigInt::zero(),
        }
    }
}

/// Constraints plus the largest value of every unknown (all start at 0).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DioSystem {
    pub constraints: Vec<DioConstraint>,
    pub domains: IndexMap<Unknown, u64>,
}

impl DioSystem {
    pub fn register(&mut self, u: &Unknown, max: u64) {
        self.domains.entry(u.clone()).or_insert(max);
    }

    pub fn push(&mut self, c: DioConstraint) {
        for u in c.poly.vars() {
            self.domains.entry(u).or_insert(0);
        }
        self.constraints.push(c);
    }
}

/// Interargument polynomials `(i_p, o_p)` over the argument levels.
pub type Relations = BTreeMap<Symbol, (VPoly, VPoly)>;

#[derive(Clone, Debug)]
pub struct InterargTemplate {
    pub predicate: Symbol,
    pub i: PolyTemplate,
    pub o: PolyTemplate,
}

/// `prem` (absent without premises) and `conc` for one conditional constraint.
#[derive(Clone, Debug)]
pub struct PremConc {
    pub prem: Option<PolyTemplate>,
    pub conc: PolyTemplate,
}

/// Symbolic interpretation: a template for every function and predicate symbol.
pub fn interpretation_templates(
    program: &Program,
    fun_shape: Shape,
    minter: &mut UnknownMinter,
) -> BTreeMap<Symbol, PolyTemplate> {
    let mut out = BTreeMap::new();
    for (f, n) in program.functions() {
        let stem = minter.stem(&symbol_stem(f));
        out.insert(f.clone(), PolyTemplate::new(fun_shape, n, &stem, minter));
    }
    for (p, n) in program.predicates() {
        let stem = minter.stem(&symbol_stem(p));
        out.insert(p.clone(), PolyTemplate::new(Shape::Linear, n, &stem, minter));
    }
    out
}

pub fn interarg_templates(
    program: &Program,
    minter: &mut UnknownMinter,
) -> BTreeMap<Symbol, InterargTemplate> {
    program
        .predicates()
        .map(|(p, n)| {
            let base = symbol_stem(p);
            let is = minter.stem(&format!("i_{base}"));
            let os = minter.stem(&format!("o_{base}"));
            let t = InterargTemplate {
                predicate: p.clone(),
                i: PolyTemplate::new(Shape::Linear, n, &is, minter),
                o: PolyTemplate::new(Shape::Linear, n, &os, minter),
            };
            (p.clone(), t)
        })
        .collect()
}

pub fn template_interpretation(templates: &BTreeMap<Symbol, PolyTemplate>) -> Interpretation {
    let mut i = Interpretation::new();
    for (s, t) in templates {
        i.insert(s.clone(), t.arity, t.poly());
    }
    i
}

pub fn template_relations(templates: &BTreeMap<Symbol, InterargTemplate>) -> Relations {
    templates.iter().map(|(p, t)| (p.clone(), (t.i.poly(), t.o.poly()))).collect()
}

/// Product over the symbol-labelled arcs of each critical path of the sum of
/// coefficients whose monomial involves the arc's argument position; one
/// `= 0` constraint per distinct product.
pub fn gen_rigidity(
    patterns: &[CallPattern],
    functions: &BTreeMap<Symbol, usize>,
    grammar: &TypeGrammar,
    templates: &BTreeMap<Symbol, PolyTemplate>,
) -> Vec<DioConstraint> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for pattern in patterns {
        let g = pattern_to_type_graph(pattern, functions, grammar);
        for (k, path) in critical_paths(&g).iter().enumerate() {
            let mut product = UPoly::one();
            for step in &path.steps {
                let (NodeLabel::Sym(f), Some(pos)) = (&g.labels[step.from], step.argpos) else {
                    continue;
                };
                let Some(t) = templates.get(f) else { continue };
                let x = Var::formal(pos);
                let sum = t
                    .coeffs
                    .iter()
                    .filter(|(m, _)| m.exponent(&x) > 0)
                    .fold(UPoly::zero(), |acc, (_, u)| acc.add(&UPoly::unknown(u.clone())));
                product = product.mul(&sum);
            }
            if seen.insert(product.to_string()) {
                out.push(DioConstraint {
                    poly: product,
                    relation: Relation::Eq0,
                    origin: Origin::Rigidity { pattern: pattern.to_string(), path: k },
                });
            }
        }
    }
    out
}

fn relation_ineq(atom: &Atom, interp: &Interpretation, rel: &Relations) -> Result<Ineq, PolyError> {
    let (i, o) = rel
        .get(&atom.predicate)
        .ok_or_else(|| PolyError::Uninterpreted(atom.predicate.to_string()))?;
    let levels = atom.args.iter().map(|t| interp.level_map(t)).collect::<Result<Vec<_>, _>>()?;
    Ok(Ineq { lhs: compose(i, &levels)?, rhs: compose(o, &levels)? })
}

/// One constraint per clause whose head predicate is in `only` (all if `None`).
pub fn gen_interargument(
    program: &Program,
    interp: &Interpretation,
    rel: &Relations,
    only: Option<&BTreeSet<Symbol>>,
) -> Result<Vec<CondConstraint>, PolyError> {
    let mut out = Vec::new();
    for (k, c) in program.clauses.iter().enumerate() {
        if only.is_some_and(|s| !s.contains(&c.head.predicate)) {
            continue;
        }
        let premises =
            c.body.iter().map(|b| relation_ineq(b, interp, rel)).collect::<Result<_, _>>()?;
        out.push(CondConstraint {
            premises,
            conclusion: relation_ineq(&c.head, interp, rel)?,
            kind: CondKind::Interargument { clause: k },
        });
    }
    Ok(out)
}

/// One constraint per recursive body atom of every recursive clause.
pub fn gen_decrease(
    program: &Program,
    graph: &CallGraph,
    interp: &Interpretation,
    rel: &Relations,
) -> Result<Vec<CondConstraint>, PolyError> {
    let mut out = Vec::new();
    for (k, c) in program.clauses.iter().enumerate() {
        let head = interp.level_map_atom(&c.head)?;
        for &i in &graph.recursive_atoms[k] {
            let premises = c.body[..i]
                .iter()
                .map(|b| relation_ineq(b, interp, rel))
                .collect::<Result<_, _>>()?;
            let body = interp.level_map_atom(&c.body[i])?;
            out.push(CondConstraint {
                premises,
                conclusion: Ineq { lhs: head.clone(), rhs: body.add(&VPoly::int(1)) },
                kind: CondKind::Decrease { clause: k, atom: i },
            });
        }
    }
    Ok(out)
}

/// `conc(p) - conc(q) - prem(p_1..p_n) + prem(q_1..q_n)`; `prem` is ignored
/// when there are no premises.
pub fn unconditional_form(
    c: &CondConstraint,
    prem: Option<&VPoly>,
    conc: &VPoly,
) -> Result<VPoly, PolyError> {
    let mut out = compose(conc, &[c.conclusion.lhs.clone()])?
        .sub(&compose(conc, &[c.conclusion.rhs.clone()])?);
    if !c.premises.is_empty() {
        let prem = prem.ok_or(PolyError::ArityMismatch {
            var: "prem".into(),
            arity: c.premises.len(),
        })?;
        let ps: Vec<VPoly> = c.premises.iter().map(|i| i.lhs.clone()).collect();
        let qs: Vec<VPoly> = c.premises.iter().map(|i| i.rhs.clone()).collect();
        out = out.sub(&compose(prem, &ps)?).add(&compose(prem, &qs)?);
    }
    Ok(out)
}

/// Phase one: the unconditional form plus `sum of conc's non-constant coefficients > 0`.
pub fn remove_implication(
    c: &CondConstraint,
    cond: usize,
    pc: &PremConc,
) -> Result<(VPoly, Vec<DioConstraint>), PolyError> {
    let prem = pc.prem.as_ref().map(PolyTemplate::poly);
    let vpoly = unconditional_form(c, prem.as_ref(), &pc.conc.poly())?;
    let sum = pc
        .conc
        .nonconstant_unknowns()
        .fold(UPoly::zero(), |acc, u| acc.add(&UPoly::unknown(u.clone())));
    let side = DioConstraint {
        poly: sum,
        relation: Relation::Gt0,
        origin: Origin::ConcNonConstant { cond },
    };
    Ok((vpoly, vec![side]))
}

/// Phase two: every coefficient must be non-negative.
pub fn extract_diophantine(vpoly: &VPoly, cond: usize) -> Vec<DioConstraint> {
    vpoly
        .terms()
        .map(|(m, c)| DioConstraint {
            poly: c.clone(),
            relation: Relation::Geq0,
            origin: Origin::Coefficient { cond, monomial: m.to_string() },
        })
        .collect()
}

/// Predicates whose interargument relations can be used as premises of a
/// decrease condition, directly or through other interargument conditions.
pub fn needed_relations(program: &Program, graph: &CallGraph) -> BTreeSet<Symbol> {
    let mut needed: BTreeSet<Symbol> = BTreeSet::new();
    for (k, c) in program.clauses.iter().enumerate() {
        if let Some(&last) = graph.recursive_atoms[k].iter().max() {
            needed.extend(c.body[..last].iter().map(|b| b.predicate.clone()));
        }
    }
    let mut frontier: Vec<Symbol> = needed.iter().cloned().collect();
    while let Some(p) = frontier.pop() {
        for (_, c) in program.clauses_of(&p) {
            for b in &c.body {
                if needed.insert(b.predicate.clone()) {
                    frontier.push(b.predicate.clone());
                }
            }
        }
    }
    needed
}

#[derive(Clone, Copy, Debug)]
pub struct SystemConfig {
    /// Shape of function symbol interpretations; also used for `prem`.
    pub shape: Shape,
    pub coeff_max: u64,
}

/// A generated system together with everything needed to read a solution back.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub system: DioSystem,
    pub templates: BTreeMap<Symbol, PolyTemplate>,
    pub interargs: BTreeMap<Symbol, InterargTemplate>,
    pub conds: Vec<CondConstraint>,
    pub premconc: Vec<PremConc>,
    /// Unconditional forms, one per entry of `conds`.
    pub unconditional: Vec<VPoly>,
}

pub fn assemble_system(
    program: &Program,
    graph: &CallGraph,
    patterns: &[CallPattern],
    grammar: &TypeGrammar,
    config: SystemConfig,
) -> Result<Assembled, PolyError> {
    let mut minter = UnknownMinter::new();
    let templates = interpretation_templates(program, config.shape, &mut minter);
    let interargs = interarg_templates(program, &mut minter);
    let interp = template_interpretation(&templates);
    let rel = template_relations(&interargs);
    let needed = needed_relations(program, graph);

    let mut system = DioSystem::default();
    for t in templates.values() {
        for u in t.unknowns() {
            system.register(u, config.coeff_max);
        }
    }
    for (p, t) in &interargs {
        // relations nobody relies on are fixed to the trivial 0 >= 0
        let max = if needed.contains(p) { config.coeff_max } else { 0 };
        for u in t.i.unknowns().chain(t.o.unknowns()) {
            system.register(u, max);
        }
    }

    for c in gen_rigidity(patterns, &program.signature.functions, grammar, &templates) {
        system.push(c);
    }

    let mut conds = gen_interargument(program, &interp, &rel, Some(&needed))?;
    conds.extend(gen_decrease(program, graph, &interp, &rel)?);

    let mut premconc = Vec::new();
    let mut unconditional = Vec::new();
    for (k, c) in conds.iter().enumerate() {
        let prem = (!c.premises.is_empty()).then(|| {
            let stem = minter.stem(&format!("prem{}", k + 1));
            PolyTemplate::new(config.shape, c.premises.len(), &stem, &mut minter)
        });
        let stem = minter.stem(&format!("conc{}", k + 1));
        let conc = PolyTemplate::new(Shape::Linear, 1, &stem, &mut minter);
        let pc = PremConc { prem, conc };
        for u in pc.prem.iter().flat_map(|p| p.unknowns()).chain(pc.conc.unknowns()) {
            system.register(u, config.coeff_max);
        }
        let (vpoly, side) = remove_implication(c, k, &pc)?;
        for d in side.into_iter().chain(extract_diophantine(&vpoly, k)) {
            system.push(d);
        }
        premconc.push(pc);
        unconditional.push(vpoly);
    }

    Ok(Assembled { system, templates, interargs, conds, premconc, unconditional })
}

impl Assembled {
    /// The monomials of the unconditional form of condition `k`.
    pub fn monomials(&self, k: usize) -> Vec<Monomial<Var>> {
        self.unconditional[k].monomials().cloned().collect()
    }
}
