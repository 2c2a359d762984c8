// SPDX-License-Identifier: Apache-2.0

//! Exact two-level minimization.
//!
//! Prime implicants come from Quine-McCluskey merging. The cover is chosen by
//! an exact branch-and-bound search that minimizes, in order, the number of
//! products, the number of literals, and the sorted `(value, care)` key
//! sequence of the chosen implicants.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome, Variable};

use crate::expr::Expr;
use crate::truthtable::Minterms;

/// A product term over `n` inputs. Bit `n-1-i` of each mask refers to
/// input `i`, matching row index numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Implicant {
    pub n: usize,
    /// 1 where the input appears as a literal.
    pub care_mask: u32,
    /// Polarity of each cared input; zero outside `care_mask`.
    pub value_mask: u32,
}

impl Implicant {
    pub fn minterm(n: usize, row: u32) -> Self {
        Implicant {
            n,
            care_mask: (1 << n) - 1,
            value_mask: row,
        }
    }

    pub fn literal_count(&self) -> u32 {
        self.care_mask.count_ones()
    }

    pub fn covers(&self, row: u32) -> bool {
        row & self.care_mask == self.value_mask
    }

    /// Rows covered by this product, ascending.
    pub fn coverage(&self) -> Vec<u32> {
        (0..1u32 << self.n).filter(|&r| self.covers(r)).collect()
    }

    /// Tie-break key.
    pub fn key(&self) -> (u32, u32) {
        (self.value_mask, self.care_mask)
    }

    /// The product as an expression, literals in input order.
    pub fn to_expr(&self, input_names: &[String]) -> Expr {
        let literals = input_names
            .iter()
            .enumerate()
            .filter_map(|(i, name)| {
                let bit = 1 << (self.n - 1 - i);
                (self.care_mask & bit != 0).then(|| {
                    if self.value_mask & bit != 0 {
                        Expr::var(name)
                    } else {
                        Expr::not(Expr::var(name))
                    }
                })
            })
            .collect();
        Expr::and(literals)
    }
}

impl PartialOrd for Implicant {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Implicant {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key()).then(self.n.cmp(&other.n))
    }
}

/// All prime implicants of `on_set ∪ dc_set` that cover at least one on-set
/// row, sorted by key.
pub fn prime_implicants(m: &Minterms) -> Vec<Implicant> {
    let n = m.n;
    let mut current: BTreeSet<(u32, u32)> = m
        .on_set
        .iter()
        .chain(&m.dc_set)
        .map(|&row| ((1 << n) - 1, row))
        .collect();
    let mut primes = BTreeSet::new();

    while !current.is_empty() {
        let mut next = BTreeSet::new();
        let mut merged = HashSet::new();
        for &(care, value) in &current {
            for bit in (0..n).map(|b| 1u32 << b) {
                if care & bit == 0 || value & bit != 0 {
                    continue;
                }
                let partner = (care, value | bit);
                if current.contains(&partner) {
                    next.insert((care & !bit, value));
                    merged.insert((care, value));
                    merged.insert(partner);
                }
            }
        }
        primes.extend(current.iter().filter(|c| !merged.contains(c)));
        current = next;
    }

    let mut out: Vec<Implicant> = primes
        .into_iter()
        .map(|(care_mask, value_mask)| Implicant {
            n,
            care_mask,
            value_mask,
        })
        .filter(|imp| m.on_set.iter().any(|&r| imp.covers(r)))
        .collect();
    out.sort();
    out
}

/// Bit set sized at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn full(len: usize) -> Self {
        let mut b = Bits::new(len);
        for i in 0..len {
            b.set(i);
        }
        b
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn or(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a | b).collect())
    }

    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }

    fn and_not(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & !b).collect())
    }

    fn intersects(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).any(|(a, b)| a & b != 0)
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn count_and(&self, o: &Bits) -> u32 {
        self.0.iter().zip(&o.0).map(|(a, b)| (a & b).count_ones()).sum()
    }

    /// `self & mask` is a subset of `o & mask`.
    fn subset_within(&self, o: &Bits, mask: &Bits) -> bool {
        self.0
            .iter()
            .zip(&o.0)
            .zip(&mask.0)
            .all(|((a, b), m)| a & m & !b == 0)
    }

    fn iter_and<'a>(&'a self, o: &'a Bits) -> impl Iterator<Item = usize> + 'a {
        self.0.iter().zip(&o.0).enumerate().flat_map(|(w, (&a, &b))| {
            let word = a & b;
            (0..64).filter(move |i| word >> i & 1 == 1).map(move |i| w * 64 + i)
        })
    }

    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

/// Inclusive limits on the products and literals of a cover.
#[derive(Debug, Clone, Copy)]
struct Budget {
    terms: usize,
    lits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Goal {
    /// Each cover found lowers the product budget below it.
    FewerTerms,
    /// Each cover found lowers the literal budget below it.
    FewerLits,
    /// Stop at the first cover within budget.
    Any,
}

/// Exact unate covering by branch and bound.
///
/// Each node is first reduced: primes covering nothing open are dropped,
/// essential primes are taken, a row is dropped when another open row's
/// candidates are a subset of its own, and a prime is dropped when another
/// prime covers at least its open rows with no more literals. None of these
/// steps removes every cover within budget.
///
/// Nodes are then bounded by a set of rows with pairwise disjoint
/// candidates and by the LP relaxation, solved through its dual so that
/// reduced costs can exclude primes. The search branches on the open row
/// with the fewest candidates.
struct CoverSearch<'a> {
    primes: &'a [Implicant],
    /// Rows covered by each prime.
    covers: Vec<Bits>,
    /// Primes covering each row.
    candidates: Vec<Bits>,
    budget: Budget,
    goal: Goal,
    found: Option<Vec<usize>>,
}

/// Row weights from a dual LP solution and the bound they certify.
struct Dual {
    y: Vec<f64>,
    /// Multiplier of the product-count constraint, if any.
    mu: f64,
    value: f64,
}

impl Dual {
    fn load(&self, cover: &Bits, open: &Bits) -> f64 {
        cover.iter_and(open).map(|r| self.y[r]).sum()
    }
}

impl CoverSearch<'_> {
    fn new(primes: &[Implicant], covers: Vec<Bits>, rows: usize) -> CoverSearch<'_> {
        let mut candidates = vec![Bits::new(primes.len()); rows];
        for (p, c) in covers.iter().enumerate() {
            for r in c.iter() {
                candidates[r].set(p);
            }
        }
        CoverSearch {
            primes,
            covers,
            candidates,
            budget: Budget {
                terms: usize::MAX,
                lits: u32::MAX,
            },
            goal: Goal::Any,
            found: None,
        }
    }

    fn lits(&self, p: usize) -> u32 {
        self.primes[p].literal_count()
    }

    fn cover_lits(&self, cover: &[usize]) -> u32 {
        cover.iter().map(|&p| self.lits(p)).sum()
    }

    /// Repeatedly takes the prime covering the most open rows per literal.
    fn greedy(&self) -> Vec<usize> {
        let mut open = Bits::full(self.candidates.len());
        let mut chosen = Vec::new();
        while !open.is_empty() {
            let score = |p: usize| {
                f64::from(self.covers[p].count_and(&open)) / f64::from(self.lits(p).max(1))
            };
            let p = (0..self.primes.len())
                .max_by(|&a, &b| score(a).total_cmp(&score(b)).then(b.cmp(&a)))
                .expect("some prime covers an open row");
            chosen.push(p);
            open = open.and_not(&self.covers[p]);
        }
        chosen
    }

    /// Applies the reductions until none fires. Returns false if some open
    /// row has no candidate left.
    fn reduce(&self, open: &mut Bits, avail: &mut Bits, chosen: &mut Vec<usize>, lits: &mut u32) -> bool {
        loop {
            let mut changed = false;
            for p in avail.iter().collect::<Vec<_>>() {
                if !self.covers[p].intersects(open) {
                    avail.clear(p);
                }
            }

            for r in open.iter().collect::<Vec<_>>() {
                if !open.get(r) {
                    continue;
                }
                match self.candidates[r].count_and(avail) {
                    0 => return false,
                    1 => {
                        let p = self.candidates[r].iter_and(avail).next().unwrap();
                        chosen.push(p);
                        *lits += self.lits(p);
                        *open = open.and_not(&self.covers[p]);
                        avail.clear(p);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if changed {
                continue;
            }

            let rows: Vec<usize> = open.iter().collect();
            for &a in &rows {
                let dominated = rows.iter().any(|&b| {
                    b != a
                        && open.get(b)
                        && self.candidates[b].subset_within(&self.candidates[a], avail)
                        && (b < a || !self.candidates[a].subset_within(&self.candidates[b], avail))
                });
                if dominated {
                    open.clear(a);
                    changed = true;
                }
            }

            let cols: Vec<usize> = avail.iter().collect();
            for &p in &cols {
                let dominated = cols.iter().any(|&q| {
                    q != p
                        && avail.get(q)
                        && self.lits(q) <= self.lits(p)
                        && self.covers[p].subset_within(&self.covers[q], open)
                        && (q < p
                            || self.lits(q) < self.lits(p)
                            || !self.covers[q].subset_within(&self.covers[p], open))
                });
                if dominated {
                    avail.clear(p);
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    /// Open rows with pairwise disjoint candidate sets, each of which needs
    /// its own prime, with the cheapest literal count among its candidates.
    fn independent_rows(&self, open: &Bits, avail: &Bits) -> Vec<(Bits, u32)> {
        let cands: Vec<(usize, Bits)> = open
            .iter()
            .map(|r| (r, self.candidates[r].and(avail)))
            .collect();
        // Prefer rows with few candidates that conflict with few other rows.
        let mut rows: Vec<(u32, usize, usize, &Bits)> = cands
            .iter()
            .map(|(r, c)| {
                let conflicts = cands.iter().filter(|(_, d)| d.intersects(c)).count();
                (c.count(), conflicts, *r, c)
            })
            .collect();
        rows.sort_by_key(|(count, conflicts, r, _)| (*count, *conflicts, *r));
        let mut used = Bits::new(self.primes.len());
        let mut out = Vec::new();
        for (_, _, _, c) in rows {
            if !c.intersects(&used) {
                let cheapest = c.iter().map(|p| self.lits(p)).min().unwrap_or(0);
                used = used.or(c);
                out.push((c.clone(), cheapest));
            }
        }
        out
    }

    /// Dual of the LP relaxation of the remaining cover, with product count
    /// as cost: row weights such that no prime's open rows weigh more
    /// than 1.
    fn term_dual(&self, open: &Bits, avail: &Bits) -> Dual {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<(usize, Variable)> = open
            .iter()
            .map(|r| (r, lp.add_var(1.0, (0.0, 1.0))))
            .collect();
        for p in avail.iter() {
            let col: LinearExpr = vars
                .iter()
                .filter(|(r, _)| self.covers[p].get(*r))
                .map(|&(_, v)| (v, 1.0))
                .collect();
            lp.add_constraint(col, ComparisonOp::Le, 1.0);
        }
        let mut dual = Dual {
            y: vec![0.0; self.candidates.len()],
            mu: 0.0,
            value: 0.0,
        };
        if let Ok(SolveOutcome::Solution(s)) = lp.solve() {
            for (r, v) in vars {
                dual.y[r] = s.var_value(v).max(0.0);
            }
        }
        // Scale away solver round-off so the bound is exact.
        let excess = avail
            .iter()
            .map(|p| dual.load(&self.covers[p], open))
            .fold(1.0, f64::max);
        for v in &mut dual.y {
            *v /= excess;
        }
        dual.value = open.iter().map(|r| dual.y[r]).sum();
        dual
    }

    /// Dual of the LP relaxation with literal count as cost and at most `k`
    /// more products: row weights and a multiplier `mu` such that each
    /// prime's open rows weigh at most its literal count plus `mu`. `None`
    /// when not even a fractional cover by `k` products exists.
    fn literal_dual(&self, open: &Bits, avail: &Bits, k: usize) -> Option<Dual> {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<(usize, Variable)> = open
            .iter()
            .map(|r| (r, lp.add_var(1.0, (0.0, f64::INFINITY))))
            .collect();
        let mu = lp.add_var(-(k as f64), (0.0, f64::INFINITY));
        for p in avail.iter() {
            let mut col: LinearExpr = vars
                .iter()
                .filter(|(r, _)| self.covers[p].get(*r))
                .map(|&(_, v)| (v, 1.0))
                .collect();
            col.add(mu, -1.0);
            lp.add_constraint(col, ComparisonOp::Le, f64::from(self.lits(p)));
        }
        let mut dual = Dual {
            y: vec![0.0; self.candidates.len()],
            mu: 0.0,
            value: 0.0,
        };
        match lp.solve() {
            Ok(SolveOutcome::Solution(s)) => {
                for (r, v) in vars {
                    dual.y[r] = s.var_value(v).max(0.0);
                }
                dual.mu = s.var_value(mu).max(0.0);
            }
            Err(microlp::Error::Unbounded) => return None,
            _ => {}
        }
        // Raise mu to absorb solver round-off so the bound is exact.
        let excess = avail
            .iter()
            .map(|p| dual.load(&self.covers[p], open) - dual.mu - f64::from(self.lits(p)))
            .fold(0.0, f64::max);
        dual.mu += excess;
        dual.value = open.iter().map(|r| dual.y[r]).sum::<f64>() - k as f64 * dual.mu;
        Some(dual)
    }

    /// Explores a node; returns true once the goal says to stop.
    fn search(&mut self, open: Bits, avail: Bits, chosen: &mut Vec<usize>, lits: u32) -> bool {
        let mark = chosen.len();
        let stop = self.explore(open, avail, chosen, lits);
        chosen.truncate(mark);
        stop
    }

    fn explore(&mut self, mut open: Bits, mut avail: Bits, chosen: &mut Vec<usize>, mut lits: u32) -> bool {
        let mut duals: Option<(Dual, Option<Dual>)> = None;
        loop {
            if !self.reduce(&mut open, &mut avail, chosen, &mut lits) {
                return false;
            }
            let budget = self.budget;
            if chosen.len() > budget.terms || lits > budget.lits {
                return false;
            }
            if open.is_empty() {
                self.found = Some(chosen.clone());
                match self.goal {
                    Goal::Any => return true,
                    Goal::FewerTerms => self.budget.terms = chosen.len() - 1,
                    Goal::FewerLits => match lits.checked_sub(1) {
                        Some(l) => self.budget.lits = l,
                        None => return true,
                    },
                }
                return false;
            }

            let rows = self.independent_rows(&open, &avail);
            let mis_terms = chosen.len() + rows.len();
            let mis_lits = lits + rows.iter().map(|r| r.1).sum::<u32>();
            if mis_terms > budget.terms || mis_lits > budget.lits {
                return false;
            }
            let k = budget.terms - chosen.len();
            // Later rounds reuse the duals: restricted to fewer rows and
            // primes they stay feasible, so their bounds still hold.
            if duals.is_none() {
                let literals = if budget.lits < u32::MAX {
                    match self.literal_dual(&open, &avail, k) {
                        None => return false,
                        some => some,
                    }
                } else {
                    None
                };
                duals = Some((self.term_dual(&open, &avail), literals));
            }
            let (terms, literals) = duals.as_mut().unwrap();
            terms.value = open.iter().map(|r| terms.y[r]).sum();
            if chosen.len() + ceil_bound(terms.value) > budget.terms {
                return false;
            }
            if let Some(d) = literals.as_mut() {
                d.value = open.iter().map(|r| d.y[r]).sum::<f64>() - k as f64 * d.mu;
                if lits as usize + ceil_bound(d.value) > budget.lits as usize {
                    return false;
                }
            }

            // Drop primes whose selection alone breaks the budget. A prime
            // meets at most one independent row, and any completion using
            // it costs at least the LP bound plus its reduced cost.
            let mut dropped = false;
            for p in avail.iter().collect::<Vec<_>>() {
                let (t, l) = match rows.iter().find(|r| r.0.get(p)) {
                    Some(r) => (mis_terms, mis_lits - r.1 + self.lits(p)),
                    None => (mis_terms + 1, mis_lits + self.lits(p)),
                };
                let reduced = (1.0 - terms.load(&self.covers[p], &open)).max(0.0);
                let mut drop = t > budget.terms
                    || l > budget.lits
                    || chosen.len() + ceil_bound(terms.value + reduced) > budget.terms;
                if let Some(d) = &literals {
                    let reduced =
                        (f64::from(self.lits(p)) + d.mu - d.load(&self.covers[p], &open)).max(0.0);
                    drop |= lits as usize + ceil_bound(d.value + reduced) > budget.lits as usize;
                }
                if drop {
                    avail.clear(p);
                    dropped = true;
                }
            }
            if !dropped {
                break;
            }
        }

        let row = open
            .iter()
            .min_by_key(|&r| (self.candidates[r].count_and(&avail), r))
            .unwrap();
        let mut branches: Vec<usize> = self.candidates[row].iter_and(&avail).collect();
        branches.sort_by_key(|&p| {
            (
                self.lits(p),
                std::cmp::Reverse(self.covers[p].count_and(&open)),
                p,
            )
        });
        let mut rest = avail;
        for p in branches {
            rest.clear(p);
            chosen.push(p);
            let next = open.and_not(&self.covers[p]);
            if self.search(next, rest.clone(), chosen, lits + self.lits(p)) {
                return true;
            }
            chosen.pop();
        }
        false
    }
}

/// Smallest integer not below `x`, allowing for LP round-off.
fn ceil_bound(x: f64) -> usize {
    (x - 1e-6).ceil().max(0.0) as usize
}

fn coverage_bits(p: &Implicant, rows: &[u32]) -> Bits {
    let mut b = Bits::new(rows.len());
    for (pos, &r) in rows.iter().enumerate() {
        if p.covers(r) {
            b.set(pos);
        }
    }
    b
}

/// Picks a minimum cover of the on-set from `primes` (sorted by key): fewest
/// products, then fewest literals, then the smallest sorted sequence of
/// keys. Returns indices into `primes`, ascending.
pub fn minimum_cover(m: &Minterms, primes: &[Implicant]) -> Vec<usize> {
    let rows: Vec<u32> = m.on_set.iter().copied().collect();
    let covers: Vec<Bits> = primes.iter().map(|p| coverage_bits(p, &rows)).collect();
    let mut search = CoverSearch::new(primes, covers.clone(), rows.len());
    let full = || (Bits::full(rows.len()), Bits::full(primes.len()));

    // Fewest products.
    let greedy = search.greedy();
    search.goal = Goal::FewerTerms;
    search.budget.terms = greedy.len() - 1;
    search.found = Some(greedy);
    let (open, avail) = full();
    search.search(open, avail, &mut Vec::new(), 0);
    let cover = search.found.take().expect("greedy cover");

    // Fewest literals among those.
    let terms = cover.len();
    search.goal = Goal::FewerLits;
    search.budget = Budget {
        terms,
        lits: search.cover_lits(&cover).saturating_sub(1),
    };
    search.found = Some(cover);
    let (open, avail) = full();
    search.search(open, avail, &mut Vec::new(), 0);
    let cover = search.found.take().expect("cover from the previous step");
    let lits = search.cover_lits(&cover);

    // Fix primes in key order: take each one that completes to an optimal
    // cover together with the primes taken so far, using only later primes.
    // `witness` is an optimal cover extending `taken`, so its smallest
    // remaining prime needs no search.
    search.goal = Goal::Any;
    search.budget = Budget { terms, lits };
    let mut witness = cover;
    let mut taken = Vec::new();
    let mut open = Bits::full(rows.len());
    for (c, cover_c) in covers.iter().enumerate() {
        if open.is_empty() {
            break;
        }
        if !cover_c.intersects(&open) {
            continue;
        }
        let rest = open.and_not(cover_c);
        let next = witness.iter().copied().filter(|p| !taken.contains(p)).min();
        if next == Some(c) {
            taken.push(c);
            open = rest;
            continue;
        }
        let mut later = Bits::new(primes.len());
        for j in c + 1..primes.len() {
            later.set(j);
        }
        let mut chosen = taken.clone();
        chosen.push(c);
        let lits_so_far = search.cover_lits(&chosen);
        if search.search(rest.clone(), later, &mut chosen, lits_so_far) {
            witness = search.found.take().expect("cover within budget");
            taken.push(c);
            open = rest;
        }
    }
    debug_assert_eq!((taken.len(), search.cover_lits(&taken)), (terms, lits));
    taken
}

/// Products of the minimal cover, sorted by key.
pub fn minimal_products(m: &Minterms) -> Vec<Implicant> {
    if m.on_set.is_empty() {
        return Vec::new();
    }
    let primes = prime_implicants(m);
    minimum_cover(m, &primes)
        .into_iter()
        .map(|i| primes[i])
        .collect()
}

/// Minimal sum of products for `m`.
///
/// An empty on-set gives `0`; an on-set that together with the don't-cares
/// fills every row gives `1`.
pub fn minimize(m: &Minterms, input_names: &[String]) -> Expr {
    assert_eq!(m.n, input_names.len(), "input name count must match width");
    if m.on_set.is_empty() {
        return Expr::Const(false);
    }
    if m.on_set.len() + m.dc_set.len() == 1 << m.n {
        return Expr::Const(true);
    }
    Expr::or(
        minimal_products(m)
            .iter()
            .map(|p| p.to_expr(input_names))
            .collect(),
    )
}
