//! FC and V-FC decisions by cutting planes.
//!
//! `A` is FC iff some `c >= 0` with `Σ c_i = 1` satisfies
//! `Σ_i c_i |B_i| >= |B| / 2` for every union-closed `B` with `⟨A⟩ ⊎ B = B`.
//! [`is_fc`] alternates an exact LP over the inequalities found so far with
//! the separation oracle in [`crate::sepip`]. It returns either weights that
//! the oracle cannot violate or a Farkas combination of the collected
//! inequalities.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use num::{BigInt, Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::{joint_automorphism_group, joint_orbits, CanonError, OrbitPartition};
use crate::ratlp::{
    format_rational, lp_solve, parse_rational, FarkasCertificate, LinearProgram, LpError,
    LpOutcome, Rational, Sense,
};
use crate::sepip::{
    build_separation, solve_separation, SearchMode, SepError, SolveOptions, MAX_SEPARATION_GROUND,
};
use crate::setfam::{
    frequencies, union_closure, universe, uplus, Family, FrequencyTable, MemberSet, SetFamError,
    UCFamily, MAX_GROUND,
};

/// Separation nodes spent improving a violated cut before it is accepted.
const CUT_NODE_BUDGET: u64 = 2_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FcError {
    #[error("family has an empty universe")]
    EmptyUniverse,
    #[error("ground size {0} exceeds the solver cap of 8")]
    GroundTooLarge(usize),
    #[error("family universe must be [{0}] when a domain is given")]
    UniverseNotFull(usize),
    #[error("invalid domain: {0}")]
    InvalidDomain(SepError),
    #[error("weights must be nonnegative and sum to 1")]
    InvalidWeights,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("time limit reached")]
    TimedOut,
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl From<LpError> for FcError {
    fn from(e: LpError) -> Self {
        FcError::Internal(e.to_string())
    }
}

impl From<CanonError> for FcError {
    fn from(e: CanonError) -> Self {
        FcError::Internal(e.to_string())
    }
}

/// A weight per element of `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    entries: Vec<Rational>,
}

impl WeightVector {
    /// Validated constructor: entries nonnegative, summing to 1.
    pub fn new(entries: Vec<Rational>) -> Result<Self, FcError> {
        let w = WeightVector { entries };
        if w.is_valid() {
            Ok(w)
        } else {
            Err(FcError::InvalidWeights)
        }
    }

    /// Holds arbitrary entries; used for certificates read from disk.
    pub fn from_entries_unchecked(entries: Vec<Rational>) -> Self {
        WeightVector { entries }
    }

    pub fn uniform(n: usize) -> Self {
        let share = Rational::new(BigInt::one(), BigInt::from(n.max(1)));
        WeightVector {
            entries: vec![share; n],
        }
    }

    pub fn is_valid(&self) -> bool {
        !self.entries.is_empty()
            && self.entries.iter().all(|c| !c.is_negative())
            && self.entries.iter().sum::<Rational>().is_one()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ_i c_i |B_i| - |B| / 2` computed from the cut's cached counts.
    pub fn slack(&self, cut: &Cut) -> Rational {
        let mut s = -Rational::new(BigInt::from(cut.size), BigInt::from(2));
        for (c, &k) in self.entries.iter().zip(&cut.freq.counts) {
            s += c * BigInt::from(k);
        }
        s
    }

    pub fn satisfies(&self, cut: &Cut) -> bool {
        !self.slack(cut).is_negative()
    }
}

/// One inequality `Σ_i c_i |B_i| >= |B| / 2` with its cached counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cut {
    pub family: Family,
    pub size: usize,
    pub freq: FrequencyTable,
}

impl Cut {
    pub fn new(family: Family) -> Self {
        let freq = frequencies(&family);
        Cut {
            size: family.len(),
            freq,
            family,
        }
    }

    /// `[|B|, |B_1|, ..., |B_n|]`.
    pub fn counts(&self) -> Vec<u64> {
        std::iter::once(self.size as u64)
            .chain(self.freq.counts.iter().map(|&c| c as u64))
            .collect()
    }

    pub fn is_consistent(&self) -> bool {
        self.size == self.family.len()
            && self.freq.family_size == self.size
            && self.freq == frequencies(&self.family)
    }
}

/// Domain restriction for the containing families' fibers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Full,
    Explicit(Family),
}

impl Domain {
    /// `{S ⊆ [n] : |S| != 1}`.
    pub fn no_singletons(n: usize) -> Self {
        Domain::Explicit(crate::sepip::no_singletons(n))
    }

    pub fn family(&self, n: usize) -> Family {
        match self {
            Domain::Full => Family::power_set(n).expect("ground size checked"),
            Domain::Explicit(f) => f.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FcCertificate {
    pub family: Family,
    pub closure_size: usize,
    pub domain: Domain,
    pub weights: WeightVector,
    pub cuts: Vec<Cut>,
    pub symmetry: bool,
    pub orbits: Option<OrbitPartition>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonFcCertificate {
    pub family: Family,
    pub closure_size: usize,
    pub domain: Domain,
    pub cuts: Vec<Cut>,
    /// `multipliers[j]` pairs with `cuts[j]`; `lambda` has one entry for
    /// `Σ c_i = 1`.
    pub farkas: FarkasCertificate,
    pub symmetry: bool,
    pub orbits: Option<OrbitPartition>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Fc(FcCertificate),
    NonFc(NonFcCertificate),
}

impl Certificate {
    pub fn is_fc(&self) -> bool {
        matches!(self, Certificate::Fc(_))
    }

    pub fn family(&self) -> &Family {
        match self {
            Certificate::Fc(c) => &c.family,
            Certificate::NonFc(c) => &c.family,
        }
    }

    pub fn cuts(&self) -> &[Cut] {
        match self {
            Certificate::Fc(c) => &c.cuts,
            Certificate::NonFc(c) => &c.cuts,
        }
    }

    pub fn domain(&self) -> &Domain {
        match self {
            Certificate::Fc(c) => &c.domain,
            Certificate::NonFc(c) => &c.domain,
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.is_fc() {
            "FC"
        } else {
            "Non-FC"
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct FcOptions<'a> {
    pub symmetry: bool,
    pub warm_start: bool,
    /// Union-closed `V ⊆ P([n])` containing `⟨A⟩`; `None` means `P([n])`.
    pub domain: Option<Family>,
    pub deadline: Option<Instant>,
    pub stop: Option<&'a AtomicBool>,
}

/// Aggregates variables over orbits: one variable per orbit whose
/// coefficient is the sum of its members' coefficients.
pub fn symmetry_reduce(lp: &LinearProgram, orbits: &OrbitPartition) -> LinearProgram {
    let r = orbits.num_orbits();
    let fold = |row: &[Rational]| {
        let mut out = vec![Rational::zero(); r];
        for (a, &o) in row.iter().zip(&orbits.orbit_id) {
            out[o] += a;
        }
        out
    };
    let mut nonneg = vec![true; r];
    for (j, &o) in orbits.orbit_id.iter().enumerate() {
        nonneg[o] &= lp.nonneg[j];
    }
    LinearProgram {
        num_vars: r,
        equalities: lp
            .equalities
            .iter()
            .map(|(row, b)| (fold(row), b.clone()))
            .collect(),
        inequalities: lp
            .inequalities
            .iter()
            .map(|(row, b)| (fold(row), b.clone()))
            .collect(),
        nonneg,
        objective: lp.objective.as_ref().map(|(c, s)| (fold(c), *s)),
    }
}

/// Replicates an orbit-space point onto every element.
pub fn lift(point: &[Rational], orbits: &OrbitPartition) -> Vec<Rational> {
    orbits.orbit_id.iter().map(|&o| point[o].clone()).collect()
}

/// `c >= 0`, `Σ c_i = 1`, `Σ_i |B_i| c_i >= |B| / 2` per cut.
pub fn poonen_lp(n: usize, cuts: &[Cut]) -> LinearProgram {
    let mut lp = LinearProgram::new(n).eq(vec![Rational::one(); n], Rational::one());
    for cut in cuts {
        lp = lp.ge(
            cut.freq
                .counts
                .iter()
                .map(|&k| Rational::from_integer(BigInt::from(k)))
                .collect(),
            Rational::new(BigInt::from(cut.size), BigInt::from(2)),
        );
    }
    lp
}

enum PoonenSolution {
    Point(Vec<Rational>),
    Infeasible { y: Vec<Rational> },
}

/// Decides a system of the [`poonen_lp`] shape (one equality with
/// right-hand side 1 and positive coefficients, `>=` rows, `x >= 0`) via
/// its small dual: maximize `g·y + λ` subject to `Gᵀy + eλ <= 0`,
/// `Σ y = 1`, `y >= 0`. A positive optimum makes `y` an infeasibility
/// proof; otherwise the row duals are a feasible point.
fn solve_poonen(p: &LinearProgram) -> Result<PoonenSolution, FcError> {
    let r = p.num_vars;
    let m = p.inequalities.len();
    let e = &p.equalities[0].0;
    let mut q = LinearProgram::new(m + 1).free(m);
    for j in 0..r {
        let mut row: Vec<Rational> = p.inequalities.iter().map(|(g, _)| -&g[j]).collect();
        row.push(-&e[j]);
        q = q.ge(row, Rational::zero());
    }
    let mut simplex = vec![Rational::one(); m];
    simplex.push(Rational::zero());
    q = q.eq(simplex, Rational::one());
    let mut obj: Vec<Rational> = p.inequalities.iter().map(|(_, b)| b.clone()).collect();
    obj.push(Rational::one());
    q = q.with_objective(obj, Sense::Maximize);
    match lp_solve(&q)? {
        LpOutcome::Optimal {
            point,
            value,
            duals,
        } => {
            if value.is_positive() {
                Ok(PoonenSolution::Infeasible {
                    y: point[..m].to_vec(),
                })
            } else {
                Ok(PoonenSolution::Point(duals[1..=r].to_vec()))
            }
        }
        other => Err(FcError::Internal(format!(
            "dual of the cut system is not bounded and feasible: {other:?}"
        ))),
    }
}

fn check_stop(opts: &FcOptions<'_>) -> Result<(), FcError> {
    if opts.stop.is_some_and(|s| s.load(Ordering::Relaxed))
        || opts.deadline.is_some_and(|d| Instant::now() >= d)
    {
        return Err(FcError::TimedOut);
    }
    Ok(())
}

struct Prepared {
    family: Family,
    closure: UCFamily,
    domain: Domain,
    domain_family: Family,
}

fn prepare(a: &Family, opts: &FcOptions<'_>) -> Result<Prepared, FcError> {
    let family = match &opts.domain {
        None => {
            let (f, old) = a.compact();
            if old.is_empty() {
                return Err(FcError::EmptyUniverse);
            }
            f
        }
        Some(_) => {
            let n = a.ground_size();
            if universe(a) != MemberSet::full(n) {
                return Err(if universe(a).is_empty() {
                    FcError::EmptyUniverse
                } else {
                    FcError::UniverseNotFull(n)
                });
            }
            a.clone()
        }
    };
    let n = family.ground_size();
    if n > MAX_SEPARATION_GROUND {
        return Err(FcError::GroundTooLarge(n));
    }
    let closure = union_closure(&family);
    let domain = match &opts.domain {
        None => Domain::Full,
        Some(v) => Domain::Explicit(v.clone()),
    };
    let domain_family = domain.family(n);
    build_separation(&closure, &WeightVector::uniform(n), &domain_family)
        .map_err(FcError::InvalidDomain)?;
    Ok(Prepared {
        family,
        closure,
        domain,
        domain_family,
    })
}

/// Decides whether `A` is FC (or V-FC when `opts.domain` is set).
///
/// Without a domain the universe of `A` is first relabeled to `[u]`; the
/// certificate refers to the relabeled family. With a domain, `U(A)` must
/// already be `[n]`.
pub fn is_fc(a: &Family, opts: &FcOptions<'_>) -> Result<Certificate, FcError> {
    let Prepared {
        family,
        closure,
        domain,
        domain_family,
    } = prepare(a, opts)?;
    let n = family.ground_size();
    let orbits = if opts.symmetry {
        match &domain {
            Domain::Full => joint_orbits(&[closure.family()])?,
            Domain::Explicit(v) => joint_orbits(&[closure.family(), v])?,
        }
    } else {
        OrbitPartition::trivial(n)
    };

    let mut cuts: Vec<Cut> = Vec::new();
    let mut seen: HashSet<Family> = HashSet::new();
    if opts.warm_start {
        let mut done_orbits = HashSet::new();
        for i in 1..=n {
            if !done_orbits.insert(orbits.orbit_id[i - 1]) {
                continue;
            }
            let rest = Family::new(
                n,
                Family::power_set(n)
                    .expect("ground size checked")
                    .iter()
                    .filter(|s| !s.contains(i)),
            )
            .expect("ground size checked");
            let b = uplus(&closure, &rest).expect("same ground");
            if b.is_subfamily_of(&domain_family) && seen.insert(b.clone()) {
                cuts.push(Cut::new(b));
            }
        }
    }

    let mut iterations = 0usize;
    loop {
        check_stop(opts)?;
        iterations += 1;
        let weights = if cuts.is_empty() {
            WeightVector::uniform(n)
        } else {
            let full = poonen_lp(n, &cuts);
            let reduced = symmetry_reduce(&full, &orbits);
            match solve_poonen(&reduced)? {
                PoonenSolution::Point(c) => WeightVector::new(lift(&c, &orbits))
                    .map_err(|_| FcError::Internal("dual point is not a weight vector".into()))?,
                PoonenSolution::Infeasible { y } => {
                    log::debug!("non-FC after {iterations} iterations, {} cuts", cuts.len());
                    let cert = non_fc_certificate(
                        family,
                        &closure,
                        domain,
                        &domain_family,
                        cuts,
                        y,
                        opts.symmetry.then_some(orbits),
                    )?;
                    return Ok(Certificate::NonFc(cert));
                }
            }
        };
        if let Some(bad) = cuts.iter().find(|c| !weights.satisfies(c)) {
            return Err(FcError::Internal(format!(
                "weights violate stored cut {}",
                bad.family
            )));
        }
        let problem =
            build_separation(&closure, &weights, &domain_family).map_err(FcError::InvalidDomain)?;
        let result = solve_separation(
            &problem,
            SolveOptions {
                mode: SearchMode::Optimum,
                stop: opts.stop,
                deadline: opts.deadline,
                node_budget: Some(CUT_NODE_BUDGET),
                ..Default::default()
            },
        )
        .map_err(|e| match e {
            SepError::Cancelled => FcError::TimedOut,
            other => FcError::Internal(other.to_string()),
        })?;
        if !result.optimum.is_positive() {
            log::debug!("FC after {iterations} iterations, {} cuts", cuts.len());
            cuts.sort_by(|a, b| a.family.cmp(&b.family));
            return Ok(Certificate::Fc(FcCertificate {
                family,
                closure_size: closure.len(),
                domain,
                weights,
                cuts,
                symmetry: opts.symmetry,
                orbits: opts.symmetry.then_some(orbits),
            }));
        }
        if !seen.insert(result.witness.clone()) {
            return Err(FcError::Internal("separation returned a stored cut".into()));
        }
        cuts.push(Cut::new(result.witness));
    }
}

/// Builds the full-space Farkas certificate. Under symmetry every cut is
/// replaced by its images under the joint automorphism group, each carrying
/// an equal share of the cut's multiplier.
fn non_fc_certificate(
    family: Family,
    closure: &UCFamily,
    domain: Domain,
    domain_family: &Family,
    cuts: Vec<Cut>,
    y: Vec<Rational>,
    orbits: Option<OrbitPartition>,
) -> Result<NonFcCertificate, FcError> {
    let n = family.ground_size();
    let mut weighted: BTreeMap<Family, Rational> = BTreeMap::new();
    if orbits.is_some() {
        let group = match &domain {
            Domain::Full => joint_automorphism_group(&[closure.family()])?,
            Domain::Explicit(_) => joint_automorphism_group(&[closure.family(), domain_family])?,
        };
        for (cut, yb) in cuts.iter().zip(&y) {
            let images: HashSet<Family> =
                group.iter().map(|p| p.apply_family(&cut.family)).collect();
            let share = yb / BigInt::from(images.len());
            for img in images {
                *weighted.entry(img).or_insert_with(Rational::zero) += &share;
            }
        }
    } else {
        for (cut, yb) in cuts.into_iter().zip(y) {
            *weighted.entry(cut.family).or_insert_with(Rational::zero) += yb;
        }
    }
    let (cuts, multipliers): (Vec<Cut>, Vec<Rational>) = weighted
        .into_iter()
        .map(|(f, yb)| (Cut::new(f), yb))
        .unzip();
    let lambda = canonical_lambda(n, &cuts, &multipliers);
    let farkas = FarkasCertificate {
        multipliers,
        lambda: vec![lambda],
    };
    if !farkas.verify(&poonen_lp(n, &cuts)) {
        return Err(FcError::Internal(
            "Farkas combination does not verify".into(),
        ));
    }
    Ok(NonFcCertificate {
        family,
        closure_size: closure.len(),
        domain,
        cuts,
        farkas,
        symmetry: orbits.is_some(),
        orbits,
    })
}

/// `-max_i Σ_B y_B |B_i|`: the largest `λ` for which every combined
/// coefficient is `<= 0`.
pub fn canonical_lambda(n: usize, cuts: &[Cut], y: &[Rational]) -> Rational {
    (0..n)
        .map(|i| {
            cuts.iter()
                .zip(y)
                .map(|(c, yb)| yb * BigInt::from(c.freq.counts[i]))
                .sum::<Rational>()
        })
        .max()
        .map(|m| -m)
        .unwrap_or_else(Rational::zero)
}

/// `⌊n/2⌋ + 1` for `n >= 4`.
pub fn fc3_value(n: u64) -> Result<u64, FcError> {
    if n < 4 {
        return Err(FcError::InvalidParameters(format!("n = {n} < 4")));
    }
    Ok(n / 2 + 1)
}

fn falling(n: u64, k: u64) -> BigInt {
    (0..k).map(|i| BigInt::from(n - i)).product()
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    falling(n, k) / falling(k, k)
}

/// Upper bound on `FC(k, n)` from `m0 = FC(k, n0)`:
/// `1 + ⌈(m0 - 1) · n^(k) / n0^(k)⌉` with falling factorials.
pub fn upper_bound(k: u64, n: u64, n0: u64, m0: u64) -> Result<u64, FcError> {
    if !(k >= 3 && n0 >= k && n > n0) {
        return Err(FcError::InvalidParameters(format!(
            "need n > n0 >= k >= 3, got k={k}, n={n}, n0={n0}"
        )));
    }
    if m0 == 0 || BigInt::from(m0) > binomial(n0, k) {
        return Err(FcError::InvalidParameters(format!(
            "m0 = {m0} must lie in 1..=C({n0},{k})"
        )));
    }
    let num = BigInt::from(m0 - 1) * falling(n, k);
    let den = falling(n0, k);
    let (q, r): (BigInt, BigInt) = num.div_rem(&den);
    let ceil: BigInt = if r.is_zero() { q } else { q + 1u32 };
    let result: BigInt = ceil + 1u32;
    if result > binomial(n, k) {
        return Err(FcError::Internal(format!(
            "bound {result} exceeds C({n},{k})"
        )));
    }
    result
        .to_u64()
        .ok_or_else(|| FcError::InvalidParameters("bound overflows u64".into()))
}

#[derive(Debug, Error)]
pub enum CertError {
    #[error("malformed certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed certificate: {0}")]
    Structure(String),
}

impl From<SetFamError> for CertError {
    fn from(e: SetFamError) -> Self {
        CertError::Structure(e.to_string())
    }
}

impl From<LpError> for CertError {
    fn from(e: LpError) -> Self {
        CertError::Structure(e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DomainJson {
    Name(String),
    Sets(Vec<Vec<i64>>),
}

#[derive(Serialize, Deserialize)]
struct FarkasJson {
    multipliers: Vec<String>,
    lambda: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateJson {
    kind: String,
    n: usize,
    family: Vec<Vec<i64>>,
    domain: DomainJson,
    weights: Vec<String>,
    cuts: Vec<Vec<Vec<i64>>>,
    farkas: Option<FarkasJson>,
    symmetry: bool,
    closure_size: usize,
    #[serde(default)]
    orbits: Option<Vec<Vec<i64>>>,
    cut_counts: Vec<Vec<u64>>,
}

fn lists(f: &Family) -> Vec<Vec<i64>> {
    f.to_lists()
        .into_iter()
        .map(|s| s.into_iter().map(|e| e as i64).collect())
        .collect()
}

fn family_from_lists(n: usize, lists: &[Vec<i64>]) -> Result<Family, CertError> {
    let mut sets = Vec::with_capacity(lists.len());
    for l in lists {
        let mut bits = 0u16;
        for &e in l {
            if e < 1 || e as usize > n {
                return Err(SetFamError::OutOfRange {
                    element: e,
                    ground: n,
                }
                .into());
            }
            bits |= 1 << (e - 1);
        }
        sets.push(MemberSet::from_bits(bits));
    }
    Ok(Family::new(n, sets)?)
}

/// Serializes a certificate as pretty-printed JSON.
pub fn certificate_to_json(cert: &Certificate) -> String {
    let (family, closure_size, domain, cuts, symmetry, orbits) = match cert {
        Certificate::Fc(c) => (
            &c.family,
            c.closure_size,
            &c.domain,
            &c.cuts,
            c.symmetry,
            &c.orbits,
        ),
        Certificate::NonFc(c) => (
            &c.family,
            c.closure_size,
            &c.domain,
            &c.cuts,
            c.symmetry,
            &c.orbits,
        ),
    };
    let json = CertificateJson {
        kind: if cert.is_fc() { "fc" } else { "non-fc" }.to_string(),
        n: family.ground_size(),
        family: lists(family),
        domain: match domain {
            Domain::Full => DomainJson::Name("full".into()),
            Domain::Explicit(v) => DomainJson::Sets(lists(v)),
        },
        weights: match cert {
            Certificate::Fc(c) => c.weights.entries().iter().map(format_rational).collect(),
            Certificate::NonFc(_) => Vec::new(),
        },
        cuts: cuts.iter().map(|c| lists(&c.family)).collect(),
        farkas: match cert {
            Certificate::Fc(_) => None,
            Certificate::NonFc(c) => Some(FarkasJson {
                multipliers: c.farkas.multipliers.iter().map(format_rational).collect(),
                lambda: c
                    .farkas
                    .lambda
                    .first()
                    .map(format_rational)
                    .unwrap_or_else(|| "0/1".into()),
            }),
        },
        symmetry,
        closure_size,
        orbits: orbits.as_ref().map(|o| {
            o.orbits()
                .into_iter()
                .map(|v| v.into_iter().map(|e| e as i64).collect())
                .collect()
        }),
        cut_counts: cuts.iter().map(Cut::counts).collect(),
    };
    serde_json::to_string_pretty(&json).expect("certificate serializes")
}

/// Parses a certificate. Only the shape is checked here; mathematical
/// validity is the job of [`crate::verify`].
pub fn parse_certificate(text: &str) -> Result<Certificate, CertError> {
    let j: CertificateJson = serde_json::from_str(text)?;
    let n = j.n;
    if n == 0 || n > MAX_GROUND {
        return Err(CertError::Structure(format!(
            "ground size {n} out of range"
        )));
    }
    let family = family_from_lists(n, &j.family)?;
    let domain = match &j.domain {
        DomainJson::Name(s) if s == "full" => Domain::Full,
        DomainJson::Name(s) => return Err(CertError::Structure(format!("unknown domain {s:?}"))),
        DomainJson::Sets(l) => Domain::Explicit(family_from_lists(n, l)?),
    };
    if j.cut_counts.len() != j.cuts.len() {
        return Err(CertError::Structure(
            "cut_counts length differs from cuts".into(),
        ));
    }
    let mut cuts = Vec::with_capacity(j.cuts.len());
    for (l, counts) in j.cuts.iter().zip(&j.cut_counts) {
        if counts.len() != n + 1 {
            return Err(CertError::Structure(
                "cut_counts entry has wrong length".into(),
            ));
        }
        let narrow = |v: u64| {
            u32::try_from(v).map_err(|_| CertError::Structure("cut count out of range".into()))
        };
        let size = counts[0] as usize;
        cuts.push(Cut {
            family: family_from_lists(n, l)?,
            size,
            freq: FrequencyTable {
                counts: counts[1..]
                    .iter()
                    .map(|&v| narrow(v))
                    .collect::<Result<_, _>>()?,
                family_size: size,
            },
        });
    }
    let orbits = match &j.orbits {
        None => None,
        Some(o) => {
            let mut orbit_id = vec![usize::MAX; n];
            for (id, members) in o.iter().enumerate() {
                for &e in members {
                    if e < 1 || e as usize > n || orbit_id[e as usize - 1] != usize::MAX {
                        return Err(CertError::Structure("orbits are not a partition".into()));
                    }
                    orbit_id[e as usize - 1] = id;
                }
            }
            if orbit_id.contains(&usize::MAX) {
                return Err(CertError::Structure("orbits are not a partition".into()));
            }
            Some(OrbitPartition { orbit_id })
        }
    };
    match j.kind.as_str() {
        "fc" => {
            if j.farkas.is_some() {
                return Err(CertError::Structure(
                    "FC certificate carries Farkas data".into(),
                ));
            }
            if j.weights.len() != n {
                return Err(CertError::Structure(format!(
                    "expected {n} weights, found {}",
                    j.weights.len()
                )));
            }
            let entries = j
                .weights
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Certificate::Fc(FcCertificate {
                family,
                closure_size: j.closure_size,
                domain,
                weights: WeightVector::from_entries_unchecked(entries),
                cuts,
                symmetry: j.symmetry,
                orbits,
            }))
        }
        "non-fc" => {
            if !j.weights.is_empty() {
                return Err(CertError::Structure(
                    "Non-FC certificate carries weights".into(),
                ));
            }
            let f = j
                .farkas
                .ok_or_else(|| CertError::Structure("missing Farkas data".into()))?;
            if f.multipliers.len() != cuts.len() {
                return Err(CertError::Structure(
                    "multiplier count differs from cut count".into(),
                ));
            }
            let multipliers = f
                .multipliers
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>, _>>()?;
            let lambda = parse_rational(&f.lambda)?;
            Ok(Certificate::NonFc(NonFcCertificate {
                family,
                closure_size: j.closure_size,
                domain,
                cuts,
                farkas: FarkasCertificate {
                    multipliers,
                    lambda: vec![lambda],
                },
                symmetry: j.symmetry,
                orbits,
            }))
        }
        other => Err(CertError::Structure(format!("unknown kind {other:?}"))),
    }
}
