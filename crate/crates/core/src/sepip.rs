//! Separation oracle for the Poonen inequalities.
//!
//! Given a union-closed `A` (with `∅ ∈ A`, `U(A) = [n]`), weights `c` and a
//! domain `D ⊆ P([n])`, find a union-closed `B ⊆ D` with `A ⊎ B = B`
//! maximizing `|B| - 2 Σ_i c_i |B_i|`. A positive optimum is a violated
//! inequality; an optimum `<= 0` proves `c` satisfies all of them over `D`.
//!
//! The 0/1 program has a variable `x_S` per `S ∈ D` with
//! `x_S + x_T <= 1 + x_{S∪T}` and `x_S <= x_{A∪S}`, maximizing
//! `Σ_S (1 - 2c(S)) x_S`. It is solved by an exact branch and bound over
//! closures: a feasible family is always the closure `B ∪ {U ∪ Y : Y ∈ B ∪ A}`
//! of positively weighted generators, so only positively weighted sets are
//! branched on.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use num::{BigInt, Integer, One, ToPrimitive, Zero};
use thiserror::Error;

use crate::fcsolve::WeightVector;
use crate::ratlp::Rational;
use crate::setfam::{universe, uplus, Family, MemberSet, PowerSetMask, UCFamily};

/// Largest ground set accepted by [`solve_separation`].
pub const MAX_SEPARATION_GROUND: usize = 8;
/// Largest domain accepted by [`brute_separation`].
pub const MAX_BRUTE_DOMAIN: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SepError {
    #[error("base family must contain the empty set")]
    MissingEmptySet,
    #[error("base family universe must be [{0}]")]
    UniverseNotFull(usize),
    #[error("base family is not union-closed")]
    BaseNotClosed,
    #[error("domain is not closed under union")]
    DomainNotClosed,
    #[error("domain is not closed under union with members of the base family")]
    DomainNotAbsorbing,
    #[error("domain must contain the empty set and every member of the base family")]
    DomainMissingBase,
    #[error("ground size mismatch")]
    GroundMismatch,
    #[error("ground size {0} exceeds the separation cap of 8")]
    GroundTooLarge(usize),
    #[error("domain of {0} sets is too large for exhaustive search (max 16)")]
    DomainTooLarge(usize),
    #[error("weight vector has {got} entries, expected {want}")]
    WeightLength { got: usize, want: usize },
    #[error("weights too large for exact integer scaling")]
    WeightOverflow,
    #[error("separation cancelled")]
    Cancelled,
}

/// One instance of the separation program.
#[derive(Clone, Debug)]
pub struct SeparationProblem {
    n: usize,
    base: UCFamily,
    weights: WeightVector,
    domain: Family,
}

/// Optimum of the separation program and a family attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationResult {
    /// Best value found; the maximum when `exhaustive`.
    pub optimum: Rational,
    pub witness: Family,
    /// False only when a node budget ended the search at a positive value.
    pub exhaustive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Prove the global maximum.
    #[default]
    Optimum,
    /// Stop at the first family with positive value; otherwise prove `<= 0`.
    FirstViolation,
}

/// Branching order. Both are exact; they differ in which candidate is
/// branched on and which child is visited first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BranchOrder {
    /// Largest bound contribution, ties to the smallest set; include first.
    #[default]
    Primary,
    /// Largest bound contribution, ties to the largest set; exclude first.
    Reverse,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions<'a> {
    pub mode: SearchMode,
    pub order: BranchOrder,
    pub stop: Option<&'a AtomicBool>,
    pub deadline: Option<Instant>,
    /// Once this many nodes are explored, return the incumbent if it is
    /// positive.
    pub node_budget: Option<u64>,
}

/// `|B| - 2 Σ_i c_i |B_i|`.
pub fn violation(b: &Family, c: &WeightVector) -> Rational {
    let two = Rational::from_integer(BigInt::from(2));
    let mut v = Rational::from_integer(BigInt::from(b.len()));
    for s in b.iter() {
        for e in s.elements() {
            v -= &two * &c.entries()[e - 1];
        }
    }
    v
}

/// Validates and assembles a separation instance.
pub fn build_separation(
    a: &UCFamily,
    c: &WeightVector,
    domain: &Family,
) -> Result<SeparationProblem, SepError> {
    let n = a.ground_size();
    if domain.ground_size() != n {
        return Err(SepError::GroundMismatch);
    }
    if c.len() != n {
        return Err(SepError::WeightLength {
            got: c.len(),
            want: n,
        });
    }
    if !a.contains(MemberSet::EMPTY) {
        return Err(SepError::MissingEmptySet);
    }
    if universe(a) != MemberSet::full(n) {
        return Err(SepError::UniverseNotFull(n));
    }
    if !a.is_union_closed() {
        return Err(SepError::BaseNotClosed);
    }
    let mask = PowerSetMask::from_family(domain);
    for s in domain.iter() {
        for t in a.iter() {
            if !mask.contains(s.union(t)) {
                return Err(SepError::DomainNotAbsorbing);
            }
        }
    }
    if !domain.is_union_closed() {
        return Err(SepError::DomainNotClosed);
    }
    if !a.is_subfamily_of(domain) {
        return Err(SepError::DomainMissingBase);
    }
    Ok(SeparationProblem {
        n,
        base: a.clone(),
        weights: c.clone(),
        domain: domain.clone(),
    })
}

impl SeparationProblem {
    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &UCFamily {
        &self.base
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn domain(&self) -> &Family {
        &self.domain
    }

    /// One 0/1 variable per domain set.
    pub fn num_variables(&self) -> usize {
        self.domain.len()
    }

    /// Non-redundant constraints of the 0/1 program: union constraints for
    /// incomparable pairs plus absorption constraints with `A ⊄ S`.
    pub fn num_constraints(&self) -> usize {
        let d = self.domain.members();
        let mut count = 0;
        for (i, &s) in d.iter().enumerate() {
            for &t in &d[i + 1..] {
                if !s.is_subset(t) && !t.is_subset(s) {
                    count += 1;
                }
            }
            count += self.base.iter().filter(|a| !a.is_subset(s)).count();
        }
        count
    }

    /// Objective coefficient `1 - 2 c(S)`.
    pub fn coefficient(&self, s: MemberSet) -> Rational {
        let two = Rational::from_integer(BigInt::from(2));
        let mut v = Rational::one();
        for e in s.elements() {
            v -= &two * &self.weights.entries()[e - 1];
        }
        v
    }

    /// Evaluates the 0/1 constraints at `x`, indexed like `domain().members()`.
    pub fn is_feasible_point(&self, x: &[bool]) -> bool {
        let d = self.domain.members();
        if x.len() != d.len() {
            return false;
        }
        let idx = |s: MemberSet| d.binary_search(&s).ok();
        for (i, &s) in d.iter().enumerate() {
            for (j, &t) in d.iter().enumerate() {
                if x[i] && x[j] {
                    match idx(s.union(t)) {
                        Some(k) if x[k] => {}
                        _ => return false,
                    }
                }
            }
            if x[i] {
                for a in self.base.iter() {
                    match idx(a.union(s)) {
                        Some(k) if x[k] => {}
                        _ => return false,
                    }
                }
            }
        }
        true
    }

    /// Direct set-level feasibility: `B ⊆ D`, union-closed, `A ⊎ B = B`.
    pub fn is_feasible_family(&self, b: &Family) -> bool {
        b.ground_size() == self.n
            && b.is_subfamily_of(&self.domain)
            && b.is_union_closed()
            && uplus(&self.base, b).is_ok_and(|u| u == *b)
    }

    fn scaled_weights(&self) -> Result<(Vec<i128>, BigInt), SepError> {
        let mut lcm = BigInt::one();
        for c in self.weights.entries() {
            lcm = lcm.lcm(c.denom());
        }
        let scaled: Vec<BigInt> = self
            .weights
            .entries()
            .iter()
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let total = 1usize << self.n;
        let mut w = vec![0i128; total];
        for (bits, slot) in w.iter_mut().enumerate() {
            let s = MemberSet::from_bits(bits as u16);
            let mut v = lcm.clone();
            for e in s.elements() {
                v -= &scaled[e - 1] * 2;
            }
            *slot = v.to_i128().ok_or(SepError::WeightOverflow)?;
            // keep headroom for sums over up to 256 sets
            if slot.unsigned_abs() > (i128::MAX as u128) >> 10 {
                return Err(SepError::WeightOverflow);
            }
        }
        Ok((w, lcm))
    }
}

type Bits = [u64; 4];

fn has(b: &Bits, s: u16) -> bool {
    b[(s >> 6) as usize] & (1 << (s & 63)) != 0
}

fn put(b: &mut Bits, s: u16) {
    b[(s >> 6) as usize] |= 1 << (s & 63);
}

#[derive(Clone)]
struct Node {
    in_b: Bits,
    members: Vec<u16>,
    forbidden: Bits,
    value: i128,
}

struct Candidate {
    set: u16,
    forced: Vec<u16>,
    contribution: i128,
}

type Visitor<'v> = &'v mut dyn FnMut(&[u16]);

struct Bnb<'a, 'v> {
    w: Vec<i128>,
    absorb: Vec<u16>,
    positives: Vec<u16>,
    opts: SolveOptions<'a>,
    best_value: i128,
    best_members: Vec<u16>,
    nodes: u64,
    done: bool,
    truncated: bool,
    visit: Option<Visitor<'v>>,
}

/// Lowers the largest entries of `values[idx]` by a total of `mass > 0`,
/// never below zero while positive excess remains; any rest goes to the
/// largest entry.
fn water_fill(values: &mut [i128], idx: &mut [u32], mass: i128) {
    idx.sort_unstable_by(|a, b| values[*b as usize].cmp(&values[*a as usize]));
    let v = |j: usize, values: &[i128]| values[idx[j] as usize];
    if v(0, values) <= 0 {
        values[idx[0] as usize] -= mass;
        return;
    }
    let mut sum = 0i128;
    for g in 1..=idx.len() {
        sum += v(g - 1, values);
        let next = if g < idx.len() {
            v(g, values).max(0)
        } else {
            0
        };
        let cost = sum - g as i128 * next;
        if cost >= mass {
            let total = sum - mass;
            let t = total / g as i128;
            let r = (total - t * g as i128) as usize;
            for (j, &id) in idx[..g].iter().enumerate() {
                values[id as usize] = if j < r { t + 1 } else { t };
            }
            return;
        }
        if next == 0 {
            for &id in &idx[..g] {
                values[id as usize] = 0;
            }
            values[idx[0] as usize] -= mass - cost;
            return;
        }
    }
}

impl Bnb<'_, '_> {
    fn check_stop(&self) -> Result<(), SepError> {
        if self.nodes.is_multiple_of(256) {
            if self.opts.stop.is_some_and(|s| s.load(Ordering::Relaxed)) {
                return Err(SepError::Cancelled);
            }
            if self.opts.deadline.is_some_and(|d| Instant::now() >= d) {
                return Err(SepError::Cancelled);
            }
        }
        Ok(())
    }

    fn explore(&mut self, mut node: Node) -> Result<(), SepError> {
        self.nodes += 1;
        self.check_stop()?;
        if let Some(v) = self.visit.as_mut() {
            v(&node.members);
        }
        if node.value > self.best_value {
            self.best_value = node.value;
            self.best_members = node.members.clone();
            if self.opts.mode == SearchMode::FirstViolation && self.best_value > 0 {
                self.done = true;
                return Ok(());
            }
        }
        if self.best_value > 0 && self.opts.node_budget.is_some_and(|b| self.nodes >= b) {
            self.done = true;
            self.truncated = true;
            return Ok(());
        }
        let mut cands: Vec<Candidate> = Vec::new();
        let mut forcing: Vec<(u16, u32)> = Vec::new();
        for &u in &self.positives {
            if has(&node.in_b, u) || has(&node.forbidden, u) {
                continue;
            }
            let mut seen: Bits = [0; 4];
            let mut forced = Vec::new();
            let mut ok = true;
            for &y in node.members.iter().chain(&self.absorb) {
                let z = u | y;
                if has(&node.in_b, z) || has(&seen, z) {
                    continue;
                }
                if has(&node.forbidden, z) {
                    ok = false;
                    break;
                }
                put(&mut seen, z);
                forced.push(z);
            }
            if !ok {
                put(&mut node.forbidden, u);
                continue;
            }
            let idx = cands.len() as u32;
            for &z in &forced {
                if self.w[z as usize] < 0 {
                    forcing.push((z, idx));
                }
            }
            cands.push(Candidate {
                set: u,
                forced,
                contribution: self.w[u as usize],
            });
        }
        // Each negative set's weight is split among the candidates forcing
        // it; any split summing to the weight keeps the bound valid.
        forcing.sort_unstable();
        let mut values: Vec<i128> = cands.iter().map(|c| c.contribution).collect();
        let mut group: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < forcing.len() {
            let z = forcing[i].0;
            group.clear();
            while i < forcing.len() && forcing[i].0 == z {
                group.push(forcing[i].1);
                i += 1;
            }
            water_fill(&mut values, &mut group, -self.w[z as usize]);
        }
        let mut bound = node.value;
        for (c, v) in cands.iter_mut().zip(values) {
            c.contribution = v;
            bound += v.max(0);
        }
        let floor = match self.opts.mode {
            SearchMode::Optimum => self.best_value,
            SearchMode::FirstViolation => self.best_value.max(0),
        };
        if bound <= floor || cands.is_empty() {
            return Ok(());
        }
        let pick = match self.opts.order {
            BranchOrder::Primary => cands
                .iter()
                .enumerate()
                .max_by(|a, b| {
                    a.1.contribution
                        .cmp(&b.1.contribution)
                        .then(b.1.set.cmp(&a.1.set))
                })
                .map(|(i, _)| i),
            BranchOrder::Reverse => cands
                .iter()
                .enumerate()
                .max_by(|a, b| {
                    a.1.contribution
                        .cmp(&b.1.contribution)
                        .then(a.1.set.cmp(&b.1.set))
                })
                .map(|(i, _)| i),
        }
        .expect("nonempty candidates");
        let chosen = cands.swap_remove(pick);
        let mut include = node.clone();
        for &z in &chosen.forced {
            put(&mut include.in_b, z);
            include.members.push(z);
            include.value += self.w[z as usize];
        }
        let mut exclude = node;
        put(&mut exclude.forbidden, chosen.set);
        let children = match self.opts.order {
            BranchOrder::Primary => [include, exclude],
            BranchOrder::Reverse => [exclude, include],
        };
        for child in children {
            self.explore(child)?;
            if self.done {
                break;
            }
        }
        Ok(())
    }
}

fn run_bnb(
    p: &SeparationProblem,
    opts: SolveOptions<'_>,
    visit: Option<Visitor<'_>>,
) -> Result<SeparationResult, SepError> {
    if p.n > MAX_SEPARATION_GROUND {
        return Err(SepError::GroundTooLarge(p.n));
    }
    let (w, lcm) = p.scaled_weights()?;
    let positives: Vec<u16> = p
        .domain
        .iter()
        .map(|s| s.bits())
        .filter(|&s| w[s as usize] > 0)
        .collect();
    let mut forbidden: Bits = [0; 4];
    let dmask = PowerSetMask::from_family(&p.domain);
    for bits in 0..(1u32 << p.n) {
        if !dmask.contains(MemberSet::from_bits(bits as u16)) {
            put(&mut forbidden, bits as u16);
        }
    }
    let mut bnb = Bnb {
        w,
        absorb: p.base.iter().map(|s| s.bits()).collect(),
        positives,
        opts,
        best_value: 0,
        best_members: Vec::new(),
        nodes: 0,
        done: false,
        truncated: false,
        visit,
    };
    bnb.explore(Node {
        in_b: [0; 4],
        members: Vec::new(),
        forbidden,
        value: 0,
    })?;
    log::trace!("separation: {} nodes", bnb.nodes);
    let witness = Family::new(
        p.n,
        bnb.best_members.iter().map(|&b| MemberSet::from_bits(b)),
    )
    .expect("witness lies in the ground set");
    let optimum = Rational::new(BigInt::from(bnb.best_value), lcm);
    debug_assert_eq!(optimum, violation(&witness, &p.weights));
    Ok(SeparationResult {
        optimum,
        witness,
        exhaustive: !bnb.truncated,
    })
}

/// Exact maximum of the separation program.
pub fn solve_separation(
    p: &SeparationProblem,
    opts: SolveOptions<'_>,
) -> Result<SeparationResult, SepError> {
    run_bnb(p, opts, None)
}

/// As [`solve_separation`], calling `visit` with the family held at every
/// search node. Each such family is feasible.
pub fn solve_separation_traced(
    p: &SeparationProblem,
    opts: SolveOptions<'_>,
    visit: &mut dyn FnMut(&Family),
) -> Result<SeparationResult, SepError> {
    let n = p.n;
    let mut adapter = |members: &[u16]| {
        let f = Family::new(n, members.iter().map(|&b| MemberSet::from_bits(b)))
            .expect("node family lies in the ground set");
        visit(&f);
    };
    run_bnb(p, opts, Some(&mut adapter))
}

/// Exhaustive search over all subfamilies of the domain. Independent of the
/// branch and bound; requires `|D| <= 16`.
pub fn brute_separation(
    a: &UCFamily,
    c: &WeightVector,
    domain: &Family,
) -> Result<SeparationResult, SepError> {
    let p = build_separation(a, c, domain)?;
    let d = domain.members();
    if d.len() > MAX_BRUTE_DOMAIN {
        return Err(SepError::DomainTooLarge(d.len()));
    }
    let k = d.len();
    let index_of = |s: MemberSet| d.binary_search(&s).ok();
    // union table and absorption targets as domain indices
    let mut union_idx = vec![vec![usize::MAX; k]; k];
    for i in 0..k {
        for j in 0..k {
            union_idx[i][j] = index_of(d[i].union(d[j])).unwrap_or(usize::MAX);
        }
    }
    let absorb: Vec<Vec<usize>> = (0..k)
        .map(|i| {
            a.iter()
                .map(|x| index_of(x.union(d[i])).unwrap_or(usize::MAX))
                .collect()
        })
        .collect();
    let coef: Vec<Rational> = d.iter().map(|&s| p.coefficient(s)).collect();
    let in_mask = |mask: u32, idx: usize| idx != usize::MAX && mask & (1 << idx) != 0;

    let mut best = Rational::zero();
    let mut best_mask = 0u32;
    for mask in 1u32..(1u32 << k) {
        let mut ok = true;
        'outer: for i in 0..k {
            if mask & (1 << i) == 0 {
                continue;
            }
            if absorb[i].iter().any(|&t| !in_mask(mask, t)) {
                ok = false;
                break;
            }
            for (j, &u) in union_idx[i].iter().enumerate().skip(i + 1) {
                if mask & (1 << j) != 0 && !in_mask(mask, u) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if !ok {
            continue;
        }
        let value: Rational = (0..k)
            .filter(|&i| mask & (1 << i) != 0)
            .map(|i| coef[i].clone())
            .sum();
        if value > best {
            best = value;
            best_mask = mask;
        }
    }
    let witness = Family::new(
        a.ground_size(),
        (0..k).filter(|&i| best_mask & (1 << i) != 0).map(|i| d[i]),
    )
    .expect("witness lies in the ground set");
    Ok(SeparationResult {
        optimum: best,
        witness,
        exhaustive: true,
    })
}

/// Every subset of `[n]` except the singletons.
pub fn no_singletons(n: usize) -> Family {
    Family::new(
        n,
        Family::power_set(n)
            .expect("valid ground size")
            .iter()
            .filter(|s| s.len() != 1),
    )
    .expect("valid ground size")
}
