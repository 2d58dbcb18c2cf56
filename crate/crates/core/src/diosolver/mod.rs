//! Finite-domain search for natural solutions of Diophantine systems.
//!
//! Constraints are compiled to `i128` sums of monomials over unknown indices.
//! Search is depth first with bounds propagation: every value of an unknown
//! that cannot satisfy some constraint, given the current intervals of the
//! other unknowns, is removed before branching.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use thiserror::Error;

use crate::congen::{DioSystem, Relation};
use crate::polyalg::{eval_upoly, Assignment, PolyError, Unknown};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SolveOutcome {
    Sat(Assignment),
    Unsat,
    Timeout(Duration),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("domain of `{0}` exceeds 0..63")]
    DomainTooLarge(Unknown),
    #[error("domain cube has more than {0} points")]
    CubeTooLarge(u128),
    #[error("coefficient too large for the solver: {0}")]
    Overflow(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

type Dom = u64;

/// Interval sums below this magnitude are exact, so they can be subtracted.
const SAFE: i128 = i128::MAX / 4;

fn lo(d: Dom) -> i128 {
    d.trailing_zeros() as i128
}

fn hi(d: Dom) -> i128 {
    63 - d.leading_zeros() as i128
}

/// Integer operations used for interval bounds.
trait Arith {
    fn mul(a: i128, b: i128) -> i128;
    fn add(a: i128, b: i128) -> i128;
    #[inline]
    fn pow(b: i128, e: u32) -> i128 {
        match e {
            0 => 1,
            1 => b,
            2 => Self::mul(b, b),
            _ => (0..e).fold(1, |acc, _| Self::mul(acc, b)),
        }
    }
}

/// Plain operations, for systems whose terms provably stay far from overflow.
struct Exact;

/// Saturating operations; a saturated bound only weakens pruning.
struct Saturating;

impl Arith for Exact {
    #[inline]
    fn mul(a: i128, b: i128) -> i128 {
        a * b
    }
    #[inline]
    fn add(a: i128, b: i128) -> i128 {
        a + b
    }
}

impl Arith for Saturating {
    fn mul(a: i128, b: i128) -> i128 {
        a.saturating_mul(b)
    }
    fn add(a: i128, b: i128) -> i128 {
        a.saturating_add(b)
    }
    fn pow(b: i128, e: u32) -> i128 {
        b.saturating_pow(e)
    }
}

#[derive(Clone, Debug)]
struct Term {
    coef: i128,
    vars: Vec<(usize, u32)>,
}

/// `factor * sum(terms) rel 0`, with `factor` a product of unknowns.
#[derive(Clone, Debug)]
struct Cons {
    factor: Vec<(usize, u32)>,
    /// Indices of the terms mentioning each unknown of the constraint, in order.
    by_var: Vec<Vec<usize>>,
    terms: Vec<Term>,
    rel: Relation,
}

/// What the current domains allow for a constraint.
struct State {
    /// The factor can be 0.
    zero: bool,
    /// The factor can be positive.
    pos: bool,
    /// Interval of the sum.
    q: (i128, i128),
}

fn range(doms: &[Dom], v: usize, fixed: Option<(usize, i128)>) -> (i128, i128) {
    match fixed {
        Some((u, x)) if u == v => (x, x),
        _ => (lo(doms[v]), hi(doms[v])),
    }
}

impl Term {
    /// Interval of the term's value, `fixed` overriding one unknown.
    fn bounds<A: Arith>(&self, doms: &[Dom], fixed: Option<(usize, i128)>) -> (i128, i128) {
        let (mut mn, mut mx) = (1i128, 1i128);
        for &(v, e) in &self.vars {
            let (a, b) = range(doms, v, fixed);
            mn = A::mul(mn, A::pow(a, e));
            mx = A::mul(mx, A::pow(b, e));
        }
        scaled::<A>(self.coef, mn, mx)
    }

    fn has(&self, u: usize) -> bool {
        self.vars.iter().any(|&(v, _)| v == u)
    }
}

/// `coef * [mn, mx]` for `0 <= mn <= mx`.
fn scaled<A: Arith>(coef: i128, mn: i128, mx: i128) -> (i128, i128) {
    let (a, b) = (A::mul(coef, mn), A::mul(coef, mx));
    if coef >= 0 {
        (a, b)
    } else {
        (b, a)
    }
}

fn add<A: Arith>((a, b): (i128, i128), (x, y): (i128, i128)) -> (i128, i128) {
    (A::add(a, x), A::add(b, y))
}

impl Cons {
    fn state_with(&self, doms: &[Dom], fixed: Option<(usize, i128)>, q: (i128, i128)) -> State {
        State {
            zero: self.factor.iter().any(|&(v, _)| range(doms, v, fixed).0 == 0),
            pos: self.factor.iter().all(|&(v, _)| range(doms, v, fixed).1 >= 1),
            q,
        }
    }

    fn feasible(&self, s: &State) -> bool {
        match self.rel {
            Relation::Geq0 => s.zero || s.q.1 >= 0,
            Relation::Gt0 => s.pos && s.q.1 >= 1,
            Relation::Eq0 => s.zero || (s.q.0 <= 0 && s.q.1 >= 0),
        }
    }

    fn entailed(&self, s: &State) -> bool {
        match self.rel {
            Relation::Geq0 => !s.pos || s.q.0 >= 0,
            Relation::Gt0 => !s.zero && s.q.0 >= 1,
            Relation::Eq0 => !s.pos || s.q == (0, 0),
        }
    }

    fn vars(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self
            .factor
            .iter()
            .chain(self.terms.iter().flat_map(|t| &t.vars))
            .map(|v| v.0)
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

struct Compiled {
    names: Vec<Unknown>,
    init: Vec<Dom>,
    cons: Vec<Cons>,
    /// Unknowns of each constraint.
    vars: Vec<Vec<usize>>,
    /// Constraints mentioning each unknown.
    occurs: Vec<Vec<usize>>,
    /// No bound computation can leave the `SAFE` range.
    exact: bool,
}

/// Splits off the largest monomial dividing every term.
fn factor_out(terms: &mut [Term]) -> Vec<(usize, u32)> {
    let Some(first) = terms.first() else { return Vec::new() };
    let mut common: Vec<(usize, u32)> = first.vars.clone();
    for t in &terms[1..] {
        common = common
            .into_iter()
            .filter_map(|(v, e)| {
                let f = t.vars.iter().find(|w| w.0 == v)?.1;
                Some((v, e.min(f)))
            })
            .collect();
    }
    for t in terms.iter_mut() {
        for &(v, e) in &common {
            let slot = t.vars.iter_mut().find(|w| w.0 == v).expect("common factor");
            slot.1 -= e;
        }
        t.vars.retain(|w| w.1 > 0);
    }
    common
}

fn compile(system: &DioSystem) -> Result<Compiled, SolveError> {
    let names: Vec<Unknown> = system.domains.keys().cloned().collect();
    let mut init = Vec::with_capacity(names.len());
    for (u, &max) in &system.domains {
        if max > 63 {
            return Err(SolveError::DomainTooLarge(u.clone()));
        }
        init.push(if max == 63 { u64::MAX } else { (1u64 << (max + 1)) - 1 });
    }
    let mut occurs = vec![Vec::new(); names.len()];
    let mut exact = true;
    let mut cons = Vec::new();
    let mut vars = Vec::new();
    for (k, c) in system.constraints.iter().enumerate() {
        let mut terms = Vec::new();
        for (m, coef) in c.poly.terms() {
            let coef = i128::try_from(coef).map_err(|_| SolveError::Overflow(coef.to_string()))?;
            let vars = m
                .powers()
                .iter()
                .map(|(u, e)| {
                    let i = system.domains.get_index_of(u).expect("constraint unknowns have domains");
                    (i, *e)
                })
                .collect();
            terms.push(Term { coef, vars });
        }
        // every partial product and sum is bounded by the sum of the terms' maxima
        let magnitude = terms.iter().try_fold(0i128, |acc, t| {
            t.vars
                .iter()
                .try_fold(t.coef.checked_abs()?, |m, &(v, e)| m.checked_mul(hi(init[v]).checked_pow(e)?))
                .and_then(|m| acc.checked_add(m))
        });
        exact &= magnitude.is_some_and(|m| m < SAFE);
        let factor = factor_out(&mut terms);
        let mut c = Cons { factor, terms, by_var: Vec::new(), rel: c.relation };
        let vs = c.vars();
        c.by_var = vs
            .iter()
            .map(|&u| (0..c.terms.len()).filter(|&t| c.terms[t].has(u)).collect())
            .collect();
        for &v in &vs {
            occurs[v].push(k);
        }
        vars.push(vs);
        cons.push(c);
    }
    Ok(Compiled { names, init, cons, vars, occurs, exact })
}

/// Open unknowns linked by live constraints.
struct Component {
    vars: Vec<usize>,
    cons: Vec<usize>,
}

const CACHE_LIMIT: usize = 1 << 20;

struct Search<'a, A> {
    arith: std::marker::PhantomData<A>,
    /// Outcomes of solved components: the domains of their unknowns, or `None` if unsolvable.
    cache: HashMap<Vec<u64>, Option<Vec<(usize, Dom)>>>,
    c: &'a Compiled,
    deadline: Option<Instant>,
    timed_out: bool,
    /// The current run hit its failure limit and restarts.
    aborted: bool,
    fails: u64,
    fail_limit: u64,
    ticks: u32,
    /// Failure counts per constraint, steering the branching order.
    weight: Vec<u64>,
    /// Constraints known to hold for every point of the current domains.
    done: Vec<bool>,
    queue: Vec<usize>,
    queued: Vec<bool>,
    /// Scratch: `(coef, min, max, exponent)` of the terms of one unknown.
    parts: Vec<(i128, i128, i128, u32)>,
    /// Scratch: bounds of the terms of one constraint.
    tb: Vec<(i128, i128)>,
}

impl<A: Arith> Search<'_, A> {
    fn out_of_time(&mut self) -> bool {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks % 64 == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                }
            }
        }
        self.stopped()
    }

    fn stopped(&self) -> bool {
        self.timed_out || self.aborted
    }

    fn enqueue(&mut self, u: usize) {
        for &k in &self.c.occurs[u] {
            if !self.done[k] && !self.queued[k] {
                self.queued[k] = true;
                self.queue.push(k);
            }
        }
    }

    fn drain(&mut self) {
        for k in self.queue.drain(..) {
            self.queued[k] = false;
        }
    }

    /// Removes unsupported values until nothing changes; `false` on a wipe-out.
    fn propagate(&mut self, doms: &mut [Dom]) -> bool {
        while let Some(k) = self.queue.pop() {
            self.queued[k] = false;
            if self.out_of_time() {
                self.drain();
                return false;
            }
            let cons = &self.c.cons[k];
            let mut tb = std::mem::take(&mut self.tb);
            tb.clear();
            tb.extend(cons.terms.iter().map(|t| t.bounds::<A>(doms, None)));
            let mut total = tb.iter().fold((0, 0), |a, &b| add::<A>(a, b));
            let st = cons.state_with(doms, None, total);
            if !cons.feasible(&st) {
                self.tb = tb;
                self.weight[k] += 1;
                self.drain();
                return false;
            }
            if cons.entailed(&st) {
                self.tb = tb;
                self.done[k] = true;
                continue;
            }
            for (j, &u) in self.c.vars[k].iter().enumerate() {
                let d = doms[u];
                if d.count_ones() == 1 {
                    continue;
                }
                let with_u = &cons.by_var[j];
                let sub = with_u.iter().fold((0, 0), |a, &t| add::<A>(a, tb[t]));
                let rest = if [total.0, total.1, sub.0, sub.1].iter().all(|v| v.abs() < SAFE) {
                    (total.0 - sub.0, total.1 - sub.1)
                } else {
                    cons.terms
                        .iter()
                        .filter(|t| !t.has(u))
                        .fold((0, 0), |acc, t| add::<A>(acc, t.bounds::<A>(doms, None)))
                };
                let in_factor = cons.factor.iter().any(|f| f.0 == u);
                // fixing `u` keeps every term inside its current bounds
                if !in_factor && cons.feasible(&cons.state_with(doms, None, add::<A>(rest, (sub.1, sub.0)))) {
                    continue;
                }
                // each term is monotone in `u`, so its value at `x` is its
                // product over the other unknowns times `x^e`
                self.parts.clear();
                for &t in with_u {
                    let term = &cons.terms[t];
                    let (mut mn, mut mx, mut e) = (1i128, 1i128, 0);
                    for &(v, ev) in &term.vars {
                        if v == u {
                            e = ev;
                        } else {
                            mn = A::mul(mn, A::pow(lo(doms[v]), ev));
                            mx = A::mul(mx, A::pow(hi(doms[v]), ev));
                        }
                    }
                    self.parts.push((term.coef, mn, mx, e));
                }
                let at = |parts: &[(i128, i128, i128, u32)], x: i128| {
                    parts.iter().fold(rest, |acc, &(coef, mn, mx, e)| {
                        let p = A::pow(x, e);
                        add::<A>(acc, scaled::<A>(coef, A::mul(mn, p), A::mul(mx, p)))
                    })
                };
                if !in_factor {
                    // worst case over the whole interval, from its endpoints
                    let (l, h) = (lo(d), hi(d));
                    let worst = self.parts.iter().fold(rest, |acc, &(coef, mn, mx, e)| {
                        let ends = [l, h].map(|x| {
                            let p = A::pow(x, e);
                            scaled::<A>(coef, A::mul(mn, p), A::mul(mx, p))
                        });
                        add::<A>(acc, (ends[0].0.max(ends[1].0), ends[0].1.min(ends[1].1)))
                    });
                    if cons.feasible(&cons.state_with(doms, None, worst)) {
                        continue;
                    }
                }
                let mut keep = 0u64;
                let mut bits = d;
                while bits != 0 {
                    let x = bits.trailing_zeros();
                    bits &= bits - 1;
                    let q = at(&self.parts, x as i128);
                    if cons.feasible(&cons.state_with(doms, Some((u, x as i128)), q)) {
                        keep |= 1 << x;
                    }
                }
                if keep == 0 {
                    self.weight[k] += 1;
                    self.drain();
                    self.tb = tb;
                    return false;
                }
                if keep != d {
                    doms[u] = keep;
                    self.enqueue(u);
                    for &t in with_u {
                        tb[t] = cons.terms[t].bounds::<A>(doms, None);
                    }
                    total = tb.iter().fold((0, 0), |a, &b| add::<A>(a, b));
                }
            }
            self.tb = tb;
        }
        true
    }

    /// Groups the open unknowns of `scope` linked through live constraints,
    /// with the live constraints of each group.
    fn components(&self, doms: &[Dom], scope: &[usize]) -> Vec<Component> {
        let n = doms.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let open = |u: usize| doms[u].count_ones() > 1;
        let mut linked = vec![false; n];
        let mut seen = vec![false; self.c.cons.len()];
        let mut live = Vec::new();
        for &u in scope.iter().filter(|&&u| open(u)) {
            for &k in &self.c.occurs[u] {
                if self.done[k] || seen[k] {
                    continue;
                }
                seen[k] = true;
                live.push(k);
                let mut root = None;
                for &v in self.c.vars[k].iter().filter(|&&v| open(v)) {
                    linked[v] = true;
                    let rv = find(&mut parent, v);
                    match root {
                        None => root = Some(rv),
                        Some(r) if r != rv => parent[rv] = r,
                        _ => {}
                    }
                }
            }
        }
        let mut groups: Vec<(usize, Component)> = Vec::new();
        for &u in scope.iter().filter(|&&u| open(u) && linked[u]) {
            let r = find(&mut parent, u);
            match groups.iter_mut().find(|g| g.0 == r) {
                Some(g) => g.1.vars.push(u),
                None => groups.push((r, Component { vars: vec![u], cons: Vec::new() })),
            }
        }
        live.sort_unstable();
        for k in live {
            let v = *self.c.vars[k].iter().find(|&&v| open(v)).expect("live constraint has an open unknown");
            let r = find(&mut parent, v);
            groups.iter_mut().find(|g| g.0 == r).expect("group").1.cons.push(k);
        }
        groups.into_iter().map(|g| g.1).collect()
    }

    /// The subproblem of a component is fixed by its constraints and the
    /// domains of every unknown they mention.
    fn key(&self, doms: &[Dom], comp: &Component) -> Vec<u64> {
        let mut vs: Vec<usize> = comp.cons.iter().flat_map(|&k| self.c.vars[k].iter().copied()).collect();
        vs.sort_unstable();
        vs.dedup();
        let mut key: Vec<u64> = comp.cons.iter().map(|&k| k as u64).collect();
        key.push(u64::MAX);
        for v in vs {
            key.push(v as u64);
            key.push(doms[v]);
        }
        key
    }

    /// Branching unknown in `comp`: largest total weight of live constraints
    /// per domain value, then declaration order.
    fn pick(&self, doms: &[Dom], comp: &[usize]) -> usize {
        let score = |u: usize| {
            let w: u64 = self.c.occurs[u].iter().filter(|&&k| !self.done[k]).map(|&k| self.weight[k]).sum();
            (w, doms[u].count_ones() as u64)
        };
        let mut best: Option<(usize, (u64, u64))> = None;
        for &u in comp.iter().filter(|&&u| doms[u].count_ones() > 1) {
            let (w, d) = score(u);
            // w / d > bw / bd without division
            if best.is_none_or(|(_, (bw, bd))| w * bd > bw * d) {
                best = Some((u, (w, d)));
            }
        }
        best.expect("open unknown").0
    }

    /// Solves every independent part of `scope`; the first part that fails decides.
    fn solve_scope(&mut self, doms: &mut Vec<Dom>, scope: &[usize]) -> bool {
        let mut comps = self.components(doms, scope);
        // small parts first: a failure there is cheap and decides the whole scope
        comps.sort_by_key(|c| c.vars.len());
        comps.iter().all(|comp| self.solve_cached(doms, comp))
    }

    fn solve_cached(&mut self, doms: &mut Vec<Dom>, comp: &Component) -> bool {
        let key = self.key(doms, comp);
        match self.cache.get(&key) {
            Some(None) => return false,
            Some(Some(sol)) => {
                for &(v, d) in sol {
                    doms[v] = d;
                }
                for &k in &comp.cons {
                    self.done[k] = true;
                }
                return true;
            }
            None => {}
        }
        let ok = self.solve_comp(doms, &comp.vars);
        if self.stopped() {
            return false;
        }
        if self.cache.len() < CACHE_LIMIT {
            let sol = ok.then(|| comp.vars.iter().map(|&v| (v, doms[v])).collect());
            self.cache.insert(key, sol);
        }
        ok
    }

    fn solve_comp(&mut self, doms: &mut Vec<Dom>, comp: &[usize]) -> bool {
        if self.out_of_time() {
            return false;
        }
        let u = self.pick(doms, comp);
        let mut bits = doms[u];
        while bits != 0 {
            let x = bits.trailing_zeros();
            bits &= bits - 1;
            let saved = (doms.clone(), self.done.clone());
            doms[u] = 1 << x;
            self.enqueue(u);
            if self.propagate(doms) && self.solve_scope(doms, comp) {
                return true;
            }
            (*doms, self.done) = saved;
            self.fails += 1;
            if self.fails > self.fail_limit {
                self.aborted = true;
            }
            if self.stopped() {
                return false;
            }
        }
        false
    }
}

/// Failures allowed in the first run; later runs follow the Luby sequence.
const RESTART_UNIT: u64 = 64;

/// 1, 1, 2, 1, 1, 2, 4, 1, 1, 2, ...
fn luby(i: u64) -> u64 {
    let mut i = i;
    loop {
        let k = 64 - i.leading_zeros() as u64;
        if i == (1 << k) - 1 {
            return 1 << (k - 1);
        }
        i -= (1 << (k - 1)) - 1;
    }
}

/// Searches for an assignment within the domains. `budget` of `None` means unlimited.
pub fn solve(system: &DioSystem, budget: Option<Duration>) -> Result<SolveOutcome, SolveError> {
    let start = Instant::now();
    if budget == Some(Duration::ZERO) {
        return Ok(SolveOutcome::Timeout(Duration::ZERO));
    }
    let c = compile(system)?;
    let deadline = budget.map(|b| start + b);
    let found = if c.exact { search::<Exact>(&c, deadline) } else { search::<Saturating>(&c, deadline) };
    let doms = match found {
        None => return Ok(SolveOutcome::Timeout(start.elapsed())),
        Some(None) => return Ok(SolveOutcome::Unsat),
        Some(Some(doms)) => doms,
    };
    // unknowns left open occur only in entailed constraints; take the least value
    let a: Assignment =
        c.names.iter().zip(&doms).map(|(u, &d)| (u.clone(), lo(d) as u64)).collect();
    assert!(check(system, &a)?, "solver produced an assignment that fails exact checking");
    Ok(SolveOutcome::Sat(a))
}

/// Final domains of a solution, `Some(None)` if there is none, `None` on timeout.
fn search<A: Arith>(c: &Compiled, deadline: Option<Instant>) -> Option<Option<Vec<Dom>>> {
    let n = c.cons.len();
    let mut s = Search::<A> {
        arith: std::marker::PhantomData,
        c,
        cache: HashMap::new(),
        deadline,
        timed_out: false,
        aborted: false,
        fails: 0,
        fail_limit: 0,
        ticks: 0,
        weight: vec![1; n],
        done: Vec::new(),
        queue: Vec::new(),
        queued: vec![false; n],
        parts: Vec::new(),
        tb: Vec::new(),
    };
    let all: Vec<usize> = (0..c.names.len()).collect();
    // restarts keep the learned weights and the cache, whose entries stay valid
    for run in 1.. {
        s.aborted = false;
        s.fails = 0;
        s.fail_limit = luby(run).saturating_mul(RESTART_UNIT);
        s.done = vec![false; n];
        s.queue = (0..n).rev().collect();
        s.queued = vec![true; n];
        let mut doms = c.init.clone();
        let found = s.propagate(&mut doms) && s.solve_scope(&mut doms, &all);
        if s.timed_out {
            return None;
        }
        if s.aborted {
            continue;
        }
        return Some(found.then_some(doms));
    }
    unreachable!("the restart loop only exits by returning")
}

/// Exact check of every constraint; errors if `a` misses an unknown.
pub fn check(system: &DioSystem, a: &Assignment) -> Result<bool, SolveError> {
    for c in &system.constraints {
        let v: BigInt = eval_upoly(&c.poly, a)?;
        if !c.holds(&v) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All solutions by brute force, refusing cubes with more than `cap` points.
pub fn enumerate_all(system: &DioSystem, cap: u128) -> Result<Vec<Assignment>, SolveError> {
    let names: Vec<&Unknown> = system.domains.keys().collect();
    let maxes: Vec<u64> = system.domains.values().copied().collect();
    let size = maxes.iter().try_fold(1u128, |acc, &m| acc.checked_mul(m as u128 + 1));
    match size {
        Some(s) if s <= cap => {}
        _ => return Err(SolveError::CubeTooLarge(cap)),
    }
    let mut point = vec![0u64; names.len()];
    let mut out = Vec::new();
    loop {
        let a: Assignment = names.iter().map(|u| (*u).clone()).zip(point.iter().copied()).collect();
        if check(system, &a)? {
            out.push(a);
        }
        let mut i = 0;
        loop {
            if i == point.len() {
                return Ok(out);
            }
            if point[i] < maxes[i] {
                point[i] += 1;
                break;
            }
            point[i] = 0;
            i += 1;
        }
    }
}
