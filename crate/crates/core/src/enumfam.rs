//! Isomorph-free enumeration of k-set families and the searches built on it:
//! Non-FC classification by recursive extension, `FC(k, n)`, the
//! lexicographic-prefix scan and `FC_V(k, n)`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::canon::{canonical_form, Permutation};
use crate::fcsolve::{
    certificate_to_json, is_fc, Certificate, FcCertificate, FcError, FcOptions, NonFcCertificate,
};
use crate::sepip::{no_singletons, MAX_SEPARATION_GROUND};
use crate::setfam::{lex_prefix, universe, Family, MemberSet};

#[derive(Debug, Error)]
pub enum EnumError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Fc(#[from] FcError),
    #[error("domain is not invariant under all permutations of [{0}]")]
    AsymmetricDomain(usize),
    #[error("no FC prefix up to m = {0}")]
    NoFcPrefix(usize),
    #[error("m_max = {0} reached before the value was determined")]
    Exhausted(usize),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn check_params(n: usize, k: usize) -> Result<(), EnumError> {
    if k < 3 || k > n || n > MAX_SEPARATION_GROUND {
        return Err(EnumError::InvalidParameters(format!(
            "need 3 <= k <= n <= {MAX_SEPARATION_GROUND}, got k={k}, n={n}"
        )));
    }
    Ok(())
}

/// Canonical key of a family: its canonical relabeling onto `[|U|]`.
fn key(f: &Family) -> Family {
    canonical_form(f).relabeled
}

fn k_sets(n: usize, k: usize) -> Vec<MemberSet> {
    Family::k_subsets(n, k)
        .expect("ground size checked")
        .members()
        .to_vec()
}

/// One representative per isomorphism class of families of `m` distinct
/// `k`-subsets of `[n]` with universe exactly `[n]`, in canonical form and
/// sorted.
pub fn gen_noniso_families(n: usize, k: usize, m: usize) -> Vec<Family> {
    if k == 0
        || k > n
        || n > crate::canon::MAX_GROUP_UNIVERSE
        || m == 0
        || k * m < n
        || m > binomial(n, k)
    {
        return Vec::new();
    }
    let sets = k_sets(n, k);
    let mut level: Vec<Family> = vec![Family::new(n, [MemberSet::full(k)]).expect("k <= n")];
    for size in 2..=m {
        let remaining = m - size;
        let mut seen: HashSet<Family> = HashSet::new();
        let mut next = Vec::new();
        for f in &level {
            for &s in &sets {
                if f.contains(s) {
                    continue;
                }
                let g = f.with_member(s).expect("same ground");
                if universe(&g).len() + remaining * k < n {
                    continue;
                }
                let canon = key(&g);
                if seen.insert(canon.clone()) {
                    next.push(canon.with_ground_size(n).expect("universe fits"));
                }
            }
        }
        level = next;
    }
    let mut out: Vec<Family> = level
        .into_iter()
        .filter(|f| universe(f) == MemberSet::full(n))
        .collect();
    out.sort();
    out
}

/// Solver settings shared by the enumeration drivers.
#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    pub symmetry: bool,
    pub warm_start: bool,
    pub time_limit: Option<Duration>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            symmetry: true,
            warm_start: false,
            time_limit: None,
        }
    }
}

impl SearchConfig {
    fn options(&self, domain: Option<Family>) -> FcOptions<'static> {
        FcOptions {
            symmetry: self.symmetry,
            warm_start: self.warm_start,
            domain,
            deadline: self.time_limit.map(|t| Instant::now() + t),
            stop: None,
        }
    }
}

/// Canonical-form registries of one recursion level.
#[derive(Clone, Debug, Default)]
pub struct NfcRegistry {
    pub nfc: HashSet<Family>,
    pub fc: HashSet<Family>,
}

/// Non-FC classes for one `(n, k, m)`.
#[derive(Clone, Debug)]
pub struct NfcLevel {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    /// Canonical representatives with their certificates, sorted.
    pub families: Vec<(Family, NonFcCertificate)>,
    pub registry: NfcRegistry,
    pub candidates: usize,
    pub skipped_by_subfamily: usize,
    pub elapsed: Duration,
}

/// Memoized Non-FC enumeration for a fixed `k`.
pub struct NfcSolver {
    k: usize,
    config: SearchConfig,
    memo: HashMap<(usize, usize), NfcLevel>,
}

impl NfcSolver {
    pub fn new(k: usize, config: SearchConfig) -> Self {
        NfcSolver {
            k,
            config,
            memo: HashMap::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// All computed levels ordered by `(n, m)`.
    pub fn levels(&self) -> Vec<&NfcLevel> {
        let mut v: Vec<&NfcLevel> = self.memo.values().collect();
        v.sort_by_key(|l| (l.n, l.m));
        v
    }

    /// Pairwise non-isomorphic Non-FC families of `m` distinct `k`-sets with
    /// universe `[n]`.
    pub fn get_nfc(&mut self, n: usize, m: usize) -> Result<&NfcLevel, EnumError> {
        check_params(n, self.k)?;
        self.ensure(n, m)?;
        Ok(&self.memo[&(n, m)])
    }

    fn classify(&self, candidates: Vec<Family>) -> Result<Vec<(Family, Certificate)>, EnumError> {
        let results: Vec<Result<(Family, Certificate), FcError>> = candidates
            .into_par_iter()
            .map(|f| {
                let cert = is_fc(&f, &self.config.options(None))?;
                Ok((f, cert))
            })
            .collect();
        results
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
            .map_err(EnumError::from)
    }

    fn ensure(&mut self, n: usize, m: usize) -> Result<(), EnumError> {
        if self.memo.contains_key(&(n, m)) {
            return Ok(());
        }
        let k = self.k;
        let start = Instant::now();
        let mut level = NfcLevel {
            n,
            k,
            m,
            families: Vec::new(),
            registry: NfcRegistry::default(),
            candidates: 0,
            skipped_by_subfamily: 0,
            elapsed: Duration::ZERO,
        };
        if k * m < n || m > binomial(n, k) || m == 0 {
            self.memo.insert((n, m), level);
            return Ok(());
        }
        let classified = if k * (m - 1) < n {
            let cands = gen_noniso_families(n, k, m);
            level.candidates = cands.len();
            self.classify(cands)?
        } else {
            let lo = k.max(n - k);
            for i in lo..=n {
                self.ensure(i, m - 1)?;
            }
            let sets = k_sets(n, k);
            let mut seen: HashSet<Family> = HashSet::new();
            let mut fresh: Vec<Family> = Vec::new();
            for i in lo..=n {
                for (f, _) in &self.memo[&(i, m - 1)].families {
                    let f = f.with_ground_size(n).expect("i <= n");
                    for &s in &sets {
                        if f.contains(s) {
                            continue;
                        }
                        let g = f.with_member(s).expect("same ground");
                        if universe(&g) != MemberSet::full(n) {
                            continue;
                        }
                        let canon = key(&g);
                        if seen.insert(canon.clone()) {
                            fresh.push(canon);
                        }
                    }
                }
            }
            fresh.sort();
            level.candidates = fresh.len();
            let (skip, keep): (Vec<Family>, Vec<Family>) = fresh
                .into_par_iter()
                .partition(|g| self.has_fc_subfamily(g, m));
            level.skipped_by_subfamily = skip.len();
            level.registry.fc.extend(skip);
            self.classify(keep)?
        };
        for (f, cert) in classified {
            match cert {
                Certificate::Fc(_) => {
                    level.registry.fc.insert(f);
                }
                Certificate::NonFc(c) => {
                    level.registry.nfc.insert(f.clone());
                    level.families.push((f, c));
                }
            }
        }
        level.families.sort_by(|a, b| a.0.cmp(&b.0));
        level.elapsed = start.elapsed();
        log::info!(
            "getNFC(n={n}, k={k}, m={m}): {} Non-FC of {} candidates ({} skipped) in {:.2?}",
            level.families.len(),
            level.candidates,
            level.skipped_by_subfamily,
            level.elapsed
        );
        self.memo.insert((n, m), level);
        Ok(())
    }

    /// Some subfamily with one fewer member is FC, i.e. absent from the
    /// Non-FC registry of its universe size.
    fn has_fc_subfamily(&self, g: &Family, m: usize) -> bool {
        (0..g.len()).any(|j| {
            let sub = g.without_index(j);
            let u = universe(&sub).len();
            match self.memo.get(&(u, m - 1)) {
                Some(level) => !level.registry.nfc.contains(&key(&sub)),
                None => false,
            }
        })
    }

    /// Writes one directory per computed level with the Non-FC families,
    /// their certificates and a manifest.
    pub fn write_results(&self, dir: &Path) -> Result<(), EnumError> {
        fs::create_dir_all(dir)?;
        let mut manifest = Vec::new();
        for level in self.levels() {
            let name = format!("n{}_k{}_m{}", level.n, level.k, level.m);
            let sub = dir.join(&name);
            fs::create_dir_all(&sub)?;
            let mut entries = Vec::new();
            for (idx, (f, cert)) in level.families.iter().enumerate() {
                let fam_path = format!("{name}/{:04}.fam", idx + 1);
                let cert_path = format!("{name}/{:04}.cert.json", idx + 1);
                fs::write(dir.join(&fam_path), f.to_text())?;
                fs::write(
                    dir.join(&cert_path),
                    certificate_to_json(&Certificate::NonFc(cert.clone())),
                )?;
                entries.push(ManifestFamily {
                    family: fam_path,
                    certificate: cert_path,
                });
            }
            manifest.push(ManifestLevel {
                n: level.n,
                k: level.k,
                m: level.m,
                non_fc: level.families.len(),
                candidates: level.candidates,
                skipped_by_subfamily: level.skipped_by_subfamily,
                seconds: level.elapsed.as_secs_f64(),
                families: entries,
            });
        }
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )?;
        Ok(())
    }
}

#[derive(Serialize)]
struct ManifestFamily {
    family: String,
    certificate: String,
}

#[derive(Serialize)]
struct ManifestLevel {
    n: usize,
    k: usize,
    m: usize,
    non_fc: usize,
    candidates: usize,
    skipped_by_subfamily: usize,
    seconds: f64,
    families: Vec<ManifestFamily>,
}

/// Non-FC representatives for one `(n, k, m)` with default settings.
pub fn get_nfc(n: usize, k: usize, m: usize) -> Result<Vec<Family>, EnumError> {
    let mut solver = NfcSolver::new(k, SearchConfig::default());
    Ok(solver
        .get_nfc(n, m)?
        .families
        .iter()
        .map(|(f, _)| f.clone())
        .collect())
}

/// Non-FC counts for one `m`, keyed by universe size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelCounts {
    pub m: usize,
    pub per_universe: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug)]
pub struct FcValueReport {
    pub k: usize,
    pub n: usize,
    /// `None` when even the complete family of `k`-sets is not FC.
    pub value: Option<usize>,
    pub witness: Option<Family>,
    pub witness_certificate: Option<NonFcCertificate>,
    pub counts: Vec<LevelCounts>,
    pub elapsed: Duration,
}

/// Least `m <= m_max` such that every family of `m` distinct `k`-subsets of
/// `[n]` is FC, quantifying over all universe sizes `k..=n`.
pub fn fc_value(
    k: usize,
    n: usize,
    m_max: Option<usize>,
    solver: &mut NfcSolver,
) -> Result<FcValueReport, EnumError> {
    check_params(n, k)?;
    if solver.k() != k {
        return Err(EnumError::InvalidParameters(
            "solver built for another k".into(),
        ));
    }
    let start = Instant::now();
    let top = binomial(n, k);
    let limit = m_max.unwrap_or(top).min(top);
    let mut counts = Vec::new();
    let mut witness: Option<(Family, NonFcCertificate)> = None;
    for m in 1..=limit {
        let mut per_universe = BTreeMap::new();
        let mut found: Option<(Family, NonFcCertificate)> = None;
        for i in k..=n {
            let level = solver.get_nfc(i, m)?;
            per_universe.insert(i, level.families.len());
            if found.is_none() {
                found = level.families.first().cloned();
            }
        }
        counts.push(LevelCounts { m, per_universe });
        match found {
            None => {
                return Ok(FcValueReport {
                    k,
                    n,
                    value: Some(m),
                    witness: witness.as_ref().map(|w| w.0.clone()),
                    witness_certificate: witness.map(|w| w.1),
                    counts,
                    elapsed: start.elapsed(),
                });
            }
            Some(w) => witness = Some(w),
        }
    }
    if limit == top {
        return Ok(FcValueReport {
            k,
            n,
            value: None,
            witness: witness.as_ref().map(|w| w.0.clone()),
            witness_certificate: witness.map(|w| w.1),
            counts,
            elapsed: start.elapsed(),
        });
    }
    Err(EnumError::Exhausted(limit))
}

#[derive(Clone, Debug)]
pub struct LexScanReport {
    pub k: usize,
    pub n: usize,
    /// First `m` (among prefixes with universe `[n]`) with `[S_m]` FC.
    pub m: usize,
    pub prefix: FcCertificate,
    /// Certificate for `[S_{m-1}]`; its universe may be smaller than `[n]`.
    pub previous: Option<Certificate>,
    /// `[S_{m-1}]` is Non-FC.
    pub tight: bool,
}

/// Scans lexicographic prefixes `[S_m]` with universe `[n]` upward until one
/// is FC.
pub fn lex_scan(k: usize, n: usize, config: SearchConfig) -> Result<LexScanReport, EnumError> {
    check_params(n, k)?;
    let top = binomial(n, k);
    let first = (1..=top)
        .find(|&m| universe(&lex_prefix(n, k, m).expect("m <= C(n,k)")) == MemberSet::full(n))
        .expect("the complete family covers [n]");
    for m in first..=top {
        let prefix = lex_prefix(n, k, m).expect("m <= C(n,k)");
        let cert = is_fc(&prefix, &config.options(None))?;
        log::info!("lexscan k={k} n={n} m={m}: {}", cert.verdict());
        if let Certificate::Fc(fc) = cert {
            let previous = if m > 1 {
                let p = lex_prefix(n, k, m - 1).expect("m - 1 <= C(n,k)");
                Some(is_fc(&p, &config.options(None))?)
            } else {
                None
            };
            let tight = previous.as_ref().is_some_and(|c| !c.is_fc());
            return Ok(LexScanReport {
                k,
                n,
                m,
                prefix: fc,
                previous,
                tight,
            });
        }
    }
    Err(EnumError::NoFcPrefix(top))
}

/// Domain selector for V-FC searches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainSpec {
    NoSingletons,
    Explicit(Family),
}

impl DomainSpec {
    pub fn family(&self, n: usize) -> Family {
        match self {
            DomainSpec::NoSingletons => no_singletons(n),
            DomainSpec::Explicit(f) => f.clone(),
        }
    }
}

/// `V` is fixed by the transposition `(1 2)` and the cycle `(1 2 ... n)`,
/// which generate all permutations of `[n]`.
pub fn is_symmetric_domain(v: &Family) -> bool {
    let n = v.ground_size();
    if n < 2 {
        return true;
    }
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    [swap, cycle].into_iter().all(|images| {
        let p = Permutation::from_images(images).expect("valid permutation");
        p.apply_family(v) == *v
    })
}

/// Least `m` such that every family of at least `m` distinct `k`-sets with
/// universe `[n]` is V-FC.
pub fn fcv_value(
    k: usize,
    n: usize,
    spec: &DomainSpec,
    config: SearchConfig,
) -> Result<FcValueReport, EnumError> {
    check_params(n, k)?;
    let start = Instant::now();
    let v = spec.family(n);
    if v.ground_size() != n {
        return Err(EnumError::InvalidParameters(
            "domain ground size differs from n".into(),
        ));
    }
    if !is_symmetric_domain(&v) {
        return Err(EnumError::AsymmetricDomain(n));
    }
    let top = binomial(n, k);
    let mut counts = Vec::new();
    let mut prev_vfc: HashSet<Family> = HashSet::new();
    let mut worst: Option<(usize, Family, NonFcCertificate)> = None;
    for m in 1..=top {
        let families = gen_noniso_families(n, k, m);
        let (inherited, open): (Vec<Family>, Vec<Family>) =
            families.into_par_iter().partition(|g| {
                (0..g.len()).any(|j| {
                    let sub = g.without_index(j);
                    universe(&sub) == MemberSet::full(n) && prev_vfc.contains(&key(&sub))
                })
            });
        let results: Vec<Result<(Family, Certificate), FcError>> = open
            .into_par_iter()
            .map(|g| {
                let cert = is_fc(&g, &config.options(Some(v.clone())))?;
                Ok((g, cert))
            })
            .collect();
        let mut vfc: HashSet<Family> = inherited.into_iter().collect();
        let mut non: Vec<(Family, NonFcCertificate)> = Vec::new();
        for r in results {
            match r? {
                (g, Certificate::Fc(_)) => {
                    vfc.insert(g);
                }
                (g, Certificate::NonFc(c)) => non.push((g, c)),
            }
        }
        non.sort_by(|a, b| a.0.cmp(&b.0));
        log::info!(
            "FC_V k={k} n={n} m={m}: {} not V-FC, {} V-FC",
            non.len(),
            vfc.len()
        );
        counts.push(LevelCounts {
            m,
            per_universe: BTreeMap::from([(n, non.len())]),
        });
        if let Some((g, c)) = non.into_iter().next() {
            worst = Some((m, g, c));
        } else if m >= n && !vfc.is_empty() {
            // every larger family keeps universe [n] after dropping some member
            break;
        }
        prev_vfc = vfc;
    }
    let value = worst.as_ref().map_or(1, |w| w.0 + 1);
    Ok(FcValueReport {
        k,
        n,
        value: Some(value),
        witness: worst.as_ref().map(|w| w.1.clone()),
        witness_certificate: worst.map(|w| w.2),
        counts,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noniso_examples() {
        assert_eq!(
            gen_noniso_families(3, 3, 1),
            vec![Family::from_lists(3, &[&[1, 2, 3]])]
        );
        assert!(gen_noniso_families(4, 3, 1).is_empty());
        assert_eq!(gen_noniso_families(4, 3, 2).len(), 1);
        assert_eq!(gen_noniso_families(5, 3, 2).len(), 1);
        assert!(gen_noniso_families(4, 3, 5).is_empty());
    }

    #[test]
    fn nfc_examples() {
        assert_eq!(
            get_nfc(3, 3, 1).unwrap(),
            vec![Family::from_lists(3, &[&[1, 2, 3]])]
        );
        assert!(get_nfc(6, 3, 4).unwrap().is_empty());
        assert!(get_nfc(5, 4, 5).unwrap().is_empty());
        assert!(get_nfc(3, 2, 1).is_err());
    }

    #[test]
    fn fc_value_small() {
        let mut s = NfcSolver::new(3, SearchConfig::default());
        let r = fc_value(3, 4, None, &mut s).unwrap();
        assert_eq!(r.value, Some(3));
        assert_eq!(r.witness.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn symmetric_domain_check() {
        assert!(is_symmetric_domain(&no_singletons(5)));
        let lopsided = Family::from_lists(3, &[&[], &[1], &[1, 2, 3]]);
        assert!(!is_symmetric_domain(&lopsided));
    }
}
