//! Set families over a small ground set `[n] = {1, ..., n}`.
//!
//! A [`MemberSet`] is a 16-bit vector where bit `i - 1` stands for element
//! `i`. A [`Family`] is a strictly sorted list of distinct member sets
//! together with the size of its ground set; equality is structural on this
//! normal form.

use std::fmt;

use thiserror::Error;

/// Largest ground set supported by [`Family`].
pub const MAX_GROUND: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetFamError {
    #[error("ground size {0} exceeds the supported maximum of 16")]
    GroundTooLarge(usize),
    #[error("ground size must be at least 1")]
    EmptyGround,
    #[error("element {element} out of range 1..={ground}")]
    OutOfRange { element: i64, ground: usize },
    #[error("ground size mismatch: {0} vs {1}")]
    GroundMismatch(usize, usize),
    #[error("fiber set intersects [{0}]")]
    FiberIntersectsPrefix(usize),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A subset of `[16]`; bit `i - 1` is set iff element `i` is present.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MemberSet(u16);

impl MemberSet {
    pub const EMPTY: MemberSet = MemberSet(0);

    pub const fn from_bits(bits: u16) -> Self {
        MemberSet(bits)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    /// `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_GROUND);
        if n >= 16 {
            MemberSet(u16::MAX)
        } else {
            MemberSet(((1u32 << n) - 1) as u16)
        }
    }

    /// Builds a set from 1-based elements. Panics on elements outside `1..=16`.
    pub fn of(elements: &[usize]) -> Self {
        let mut bits = 0u16;
        for &e in elements {
            assert!((1..=MAX_GROUND).contains(&e), "element {e} out of range");
            bits |= 1 << (e - 1);
        }
        MemberSet(bits)
    }

    pub fn singleton(element: usize) -> Self {
        Self::of(&[element])
    }

    pub fn contains(self, element: usize) -> bool {
        (1..=MAX_GROUND).contains(&element) && self.0 & (1 << (element - 1)) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        MemberSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        MemberSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        MemberSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Elements in increasing order, 1-based.
    pub fn elements(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..16).filter(move |i| bits & (1 << i) != 0).map(|i| i + 1)
    }

    /// Largest element, or 0 for the empty set.
    pub fn max_element(self) -> usize {
        16 - self.0.leading_zeros() as usize
    }

    /// Applies a relabeling given as a 0-based image table.
    pub fn map(self, images: &[usize]) -> Self {
        let mut out = 0u16;
        let mut bits = self.0;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out |= 1 << images[i];
        }
        MemberSet(out)
    }
}

impl fmt::Debug for MemberSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MemberSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (j, e) in self.elements().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// A finite family of distinct subsets of `[ground_size]` in normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family {
    ground_size: usize,
    members: Vec<MemberSet>,
}

impl Family {
    /// Normalizes `members` (sort, dedup) and checks they fit in `[ground_size]`.
    pub fn new(
        ground_size: usize,
        members: impl IntoIterator<Item = MemberSet>,
    ) -> Result<Self, SetFamError> {
        check_ground(ground_size)?;
        let full = MemberSet::full(ground_size);
        let mut members: Vec<MemberSet> = members.into_iter().collect();
        for s in &members {
            if !s.is_subset(full) {
                return Err(SetFamError::OutOfRange {
                    element: s.max_element() as i64,
                    ground: ground_size,
                });
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(Family {
            ground_size,
            members,
        })
    }

    /// Convenience constructor from nested element lists. Panics on bad input;
    /// meant for literals in tests and examples.
    pub fn from_lists(ground_size: usize, lists: &[&[usize]]) -> Self {
        Self::new(ground_size, lists.iter().map(|l| MemberSet::of(l)))
            .expect("invalid family literal")
    }

    pub fn empty(ground_size: usize) -> Result<Self, SetFamError> {
        Self::new(ground_size, [])
    }

    /// All subsets of `[n]`.
    pub fn power_set(n: usize) -> Result<Self, SetFamError> {
        check_ground(n)?;
        Ok(Family {
            ground_size: n,
            members: (0..(1u32 << n)).map(|b| MemberSet(b as u16)).collect(),
        })
    }

    /// All `k`-subsets of `[n]`.
    pub fn k_subsets(n: usize, k: usize) -> Result<Self, SetFamError> {
        check_ground(n)?;
        Ok(Family {
            ground_size: n,
            members: (0..(1u32 << n))
                .filter(|b| b.count_ones() as usize == k)
                .map(|b| MemberSet(b as u16))
                .collect(),
        })
    }

    pub(crate) fn from_sorted_unchecked(ground_size: usize, members: Vec<MemberSet>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Family {
            ground_size,
            members,
        }
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn members(&self) -> &[MemberSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: MemberSet) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    pub fn is_subfamily_of(&self, other: &Family) -> bool {
        self.members.iter().all(|&s| other.contains(s))
    }

    pub fn iter(&self) -> impl Iterator<Item = MemberSet> + '_ {
        self.members.iter().copied()
    }

    /// Same members over a different ground set.
    pub fn with_ground_size(&self, ground_size: usize) -> Result<Family, SetFamError> {
        Family::new(ground_size, self.members.iter().copied())
    }

    /// Adds one member, returning a new family.
    pub fn with_member(&self, s: MemberSet) -> Result<Family, SetFamError> {
        Family::new(
            self.ground_size,
            self.members.iter().copied().chain(std::iter::once(s)),
        )
    }

    /// Removes the member at `index`.
    pub fn without_index(&self, index: usize) -> Family {
        let mut members = self.members.clone();
        members.remove(index);
        Family {
            ground_size: self.ground_size,
            members,
        }
    }

    pub fn is_union_closed(&self) -> bool {
        let mask = PowerSetMask::from_family(self);
        self.members.iter().enumerate().all(|(i, &s)| {
            self.members[i + 1..]
                .iter()
                .all(|&t| mask.contains(s.union(t)))
        })
    }

    /// Relabels by a 0-based image table of length `ground_size`.
    pub fn map(&self, images: &[usize], new_ground: usize) -> Result<Family, SetFamError> {
        Family::new(new_ground, self.members.iter().map(|s| s.map(images)))
    }

    /// Relabels the universe onto `[|U|]` preserving element order. Returns the
    /// compacted family and the old element (1-based) for each new label.
    pub fn compact(&self) -> (Family, Vec<usize>) {
        let u = universe(self);
        let old: Vec<usize> = u.elements().collect();
        let mut images = vec![0usize; MAX_GROUND];
        for (new, &o) in old.iter().enumerate() {
            images[o - 1] = new;
        }
        let n = old.len().max(1);
        let fam = self
            .map(&images, n)
            .expect("compacted family fits its universe");
        (fam, old)
    }

    /// Text form: an `n=` header followed by one member per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("n={}\n", self.ground_size);
        for s in &self.members {
            if s.is_empty() {
                out.push_str("{}\n");
            } else {
                let parts: Vec<String> = s.elements().map(|e| e.to_string()).collect();
                out.push_str(&parts.join(","));
                out.push('\n');
            }
        }
        out
    }

    /// Member sets as sorted element lists.
    pub fn to_lists(&self) -> Vec<Vec<usize>> {
        self.members
            .iter()
            .map(|s| s.elements().collect())
            .collect()
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Family(n={}, ", self.ground_size)?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (j, s) in self.members.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

fn check_ground(n: usize) -> Result<(), SetFamError> {
    if n == 0 {
        Err(SetFamError::EmptyGround)
    } else if n > MAX_GROUND {
        Err(SetFamError::GroundTooLarge(n))
    } else {
        Ok(())
    }
}

/// Membership bitmap over all `2^n` subsets of `[n]`.
#[derive(Clone, PartialEq, Eq)]
pub struct PowerSetMask {
    words: Vec<u64>,
}

impl PowerSetMask {
    pub fn new(n: usize) -> Self {
        let bits = 1usize << n;
        PowerSetMask {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    pub fn from_family(f: &Family) -> Self {
        let mut m = Self::new(f.ground_size());
        for s in f.iter() {
            m.insert(s);
        }
        m
    }

    pub fn contains(&self, s: MemberSet) -> bool {
        let b = s.bits() as usize;
        self.words[b / 64] & (1 << (b % 64)) != 0
    }

    /// Returns true if `s` was not present.
    pub fn insert(&mut self, s: MemberSet) -> bool {
        let b = s.bits() as usize;
        let w = &mut self.words[b / 64];
        let fresh = *w & (1 << (b % 64)) == 0;
        *w |= 1 << (b % 64);
        fresh
    }
}

/// A family known to be closed under pairwise union.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct UCFamily(Family);

impl UCFamily {
    /// Wraps `f` after checking closure.
    pub fn new(f: Family) -> Option<Self> {
        f.is_union_closed().then_some(UCFamily(f))
    }

    pub fn family(&self) -> &Family {
        &self.0
    }

    pub fn into_family(self) -> Family {
        self.0
    }
}

impl std::ops::Deref for UCFamily {
    type Target = Family;
    fn deref(&self) -> &Family {
        &self.0
    }
}

/// Parses the line-oriented family format.
///
/// Each line holds one member as comma-separated elements; `{}` or an empty
/// line is the empty set, `#` starts a comment, and an optional `n=<size>`
/// header fixes the ground size. Without a header or an explicit
/// `ground_size`, the ground size is the largest element seen. Trailing
/// blank lines are ignored.
pub fn parse_family(text: &str, ground_size: Option<usize>) -> Result<Family, SetFamError> {
    let mut header: Option<usize> = None;
    let mut raw: Vec<(usize, Vec<i64>)> = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    let last_content = lines
        .iter()
        .rposition(|l| !l.trim().is_empty())
        .map_or(0, |p| p + 1);
    for (idx, line) in lines[..last_content].iter().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        let content = match trimmed.find('#') {
            Some(p) => trimmed[..p].trim(),
            None => trimmed,
        };
        if let Some(rest) = content.strip_prefix("n=") {
            if header.is_some() || !raw.is_empty() {
                return Err(SetFamError::Parse {
                    line: lineno,
                    msg: "header must be the first entry".into(),
                });
            }
            let n: usize = rest.trim().parse().map_err(|_| SetFamError::Parse {
                line: lineno,
                msg: format!("bad ground size {rest:?}"),
            })?;
            header = Some(n);
            continue;
        }
        let inner = content
            .strip_prefix('{')
            .and_then(|c| c.strip_suffix('}'))
            .unwrap_or(content)
            .trim();
        let mut elems = Vec::new();
        if !inner.is_empty() {
            for tok in inner.split(',') {
                let tok = tok.trim();
                let v: i64 = tok.parse().map_err(|_| SetFamError::Parse {
                    line: lineno,
                    msg: format!("bad element {tok:?}"),
                })?;
                elems.push(v);
            }
        }
        raw.push((lineno, elems));
    }
    let n = match (ground_size, header) {
        (Some(a), Some(b)) if a != b => return Err(SetFamError::GroundMismatch(a, b)),
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => raw
            .iter()
            .flat_map(|(_, e)| e.iter().copied())
            .max()
            .unwrap_or(1)
            .clamp(1, i64::MAX) as usize,
    };
    check_ground(n)?;
    let mut members = Vec::with_capacity(raw.len());
    for (_, elems) in raw {
        let mut bits = 0u16;
        for e in elems {
            if e < 1 || e as u64 > n as u64 {
                return Err(SetFamError::OutOfRange {
                    element: e,
                    ground: n,
                });
            }
            bits |= 1 << (e - 1);
        }
        members.push(MemberSet(bits));
    }
    Family::new(n, members)
}

/// Smallest union-closed family containing `a` and the empty set.
pub fn union_closure(a: &Family) -> UCFamily {
    let mut mask = PowerSetMask::new(a.ground_size());
    let mut out = vec![MemberSet::EMPTY];
    mask.insert(MemberSet::EMPTY);
    for s in a.iter() {
        let len = out.len();
        for j in 0..len {
            let u = out[j].union(s);
            if mask.insert(u) {
                out.push(u);
            }
        }
    }
    out.sort_unstable();
    UCFamily(Family::from_sorted_unchecked(a.ground_size(), out))
}

/// `{A ∪ B : A ∈ a, B ∈ b}`.
pub fn uplus(a: &Family, b: &Family) -> Result<Family, SetFamError> {
    if a.ground_size() != b.ground_size() {
        return Err(SetFamError::GroundMismatch(
            a.ground_size(),
            b.ground_size(),
        ));
    }
    let mut mask = PowerSetMask::new(a.ground_size());
    let mut out = Vec::new();
    for x in a.iter() {
        for y in b.iter() {
            let u = x.union(y);
            if mask.insert(u) {
                out.push(u);
            }
        }
    }
    out.sort_unstable();
    Ok(Family::from_sorted_unchecked(a.ground_size(), out))
}

/// Per-element member counts: `counts[i - 1] = |F_i|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FrequencyTable {
    pub counts: Vec<u32>,
    pub family_size: usize,
}

impl FrequencyTable {
    pub fn count(&self, element: usize) -> u32 {
        self.counts[element - 1]
    }

    /// Some element lies in at least half of the members.
    pub fn frankl_element(&self) -> bool {
        self.counts
            .iter()
            .any(|&c| 2 * c as usize >= self.family_size)
    }
}

pub fn frequencies(f: &Family) -> FrequencyTable {
    let mut counts = vec![0u32; f.ground_size()];
    for s in f.iter() {
        for e in s.elements() {
            counts[e - 1] += 1;
        }
    }
    FrequencyTable {
        counts,
        family_size: f.len(),
    }
}

/// Union of all members.
pub fn universe(f: &Family) -> MemberSet {
    f.iter().fold(MemberSet::EMPTY, MemberSet::union)
}

/// The fiber `{S ∩ [n] : S ∈ f, S \ [n] = t}` as a family over `[n]`.
pub fn restrict_fiber(f: &Family, t: MemberSet, n: usize) -> Result<Family, SetFamError> {
    check_ground(n)?;
    if n > f.ground_size() {
        return Err(SetFamError::InvalidParameters(format!(
            "prefix size {n} exceeds ground size {}",
            f.ground_size()
        )));
    }
    let prefix = MemberSet::full(n);
    if !t.intersection(prefix).is_empty() {
        return Err(SetFamError::FiberIntersectsPrefix(n));
    }
    Family::new(
        n,
        f.iter()
            .filter(|s| s.difference(prefix) == t)
            .map(|s| s.intersection(prefix)),
    )
}

/// `a < b` in the lexicographic order on equal-size sets: `min(a Δ b) ∈ a`.
pub fn lex_less(a: MemberSet, b: MemberSet) -> bool {
    let d = a.bits() ^ b.bits();
    d != 0 && a.bits() & (d & d.wrapping_neg()) != 0
}

/// All `k`-subsets of `[n]` in lexicographic order.
pub fn lex_order(n: usize, k: usize) -> Result<Vec<MemberSet>, SetFamError> {
    if k == 0 || k > n {
        return Err(SetFamError::InvalidParameters(format!(
            "need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    check_ground(n)?;
    let mut out = Vec::new();
    let mut comb: Vec<usize> = (1..=k).collect();
    loop {
        out.push(MemberSet::of(&comb));
        // advance to the next combination in lexicographic order
        let mut i = k;
        while i > 0 && comb[i - 1] == n - k + i {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        comb[i - 1] += 1;
        for j in i..k {
            comb[j] = comb[j - 1] + 1;
        }
    }
    Ok(out)
}

/// The first `m` `k`-subsets of `[n]` in lexicographic order.
pub fn lex_prefix(n: usize, k: usize, m: usize) -> Result<Family, SetFamError> {
    let order = lex_order(n, k)?;
    if m == 0 || m > order.len() {
        return Err(SetFamError::InvalidParameters(format!(
            "m={m} outside 1..={}",
            order.len()
        )));
    }
    Family::new(n, order.into_iter().take(m))
}

/// A family over a ground set too large for [`MemberSet`]; members are
/// sorted element lists (1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WideFamily {
    pub ground_size: usize,
    pub members: Vec<Vec<usize>>,
}

impl WideFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.ground_size];
        for m in &self.members {
            for &e in m {
                d[e - 1] += 1;
            }
        }
        d
    }

    /// Narrows to a [`Family`] when the ground set fits.
    pub fn to_family(&self) -> Result<Family, SetFamError> {
        check_ground(self.ground_size)?;
        Family::new(
            self.ground_size,
            self.members.iter().map(|m| MemberSet::of(m)),
        )
    }
}

/// All translates of `R × {0}` and `{0} × R` inside `Z_n × Z_n`, with cell
/// `(row, col)` numbered `row * n + col + 1`.
pub fn translates_family(n: usize, r: &[usize]) -> Result<WideFamily, SetFamError> {
    if n < 4 {
        return Err(SetFamError::InvalidParameters(format!("n={n} < 4")));
    }
    let mut residues: Vec<usize> = r.iter().map(|&x| x % n).collect();
    residues.sort_unstable();
    residues.dedup();
    if r.len() != 3 || residues.len() != 3 {
        return Err(SetFamError::InvalidParameters(
            "R must hold exactly 3 distinct residues".into(),
        ));
    }
    let cell = |row: usize, col: usize| (row % n) * n + (col % n) + 1;
    let mut members = Vec::with_capacity(2 * n * n);
    for gr in 0..n {
        for gc in 0..n {
            let mut horiz: Vec<usize> = residues.iter().map(|&x| cell(gr, gc + x)).collect();
            let mut vert: Vec<usize> = residues.iter().map(|&x| cell(gr + x, gc)).collect();
            horiz.sort_unstable();
            vert.sort_unstable();
            members.push(horiz);
            members.push(vert);
        }
    }
    members.sort();
    members.dedup();
    Ok(WideFamily {
        ground_size: n * n,
        members,
    })
}

fn common_degree(degrees: &[usize]) -> Option<usize> {
    let mut present = degrees.iter().copied().filter(|&d| d > 0);
    let first = present.next()?;
    present.all(|d| d == first).then_some(first)
}

/// Common degree of all universe elements, if the family is regular.
pub fn regularity(f: &Family) -> Option<usize> {
    let freq = frequencies(f);
    let degrees: Vec<usize> = freq.counts.iter().map(|&c| c as usize).collect();
    common_degree(&degrees)
}

pub fn wide_regularity(f: &WideFamily) -> Option<usize> {
    common_degree(&f.degrees())
}

fn regular_3set_check(
    sizes: impl Iterator<Item = usize>,
    degree: Option<usize>,
    universe: usize,
) -> bool {
    let mut sizes = sizes.peekable();
    if sizes.peek().is_none() {
        return false;
    }
    sizes.all(|s| s == 3) && degree.is_some_and(|d| d >= 2) && universe >= 4
}

/// A regular family of 3-sets with degree at least 2 on at least 4 elements.
/// Such a family has `m = dn/3 >= ceil(2n/3) >= floor(n/2) + 1` members and
/// is therefore FC.
pub fn regular_3set_fc(f: &Family) -> bool {
    regular_3set_check(
        f.iter().map(MemberSet::len),
        regularity(f),
        universe(f).len(),
    )
}

pub fn wide_regular_3set_fc(f: &WideFamily) -> bool {
    let universe = f.degrees().iter().filter(|&&d| d > 0).count();
    regular_3set_check(f.members.iter().map(Vec::len), wide_regularity(f), universe)
}
