//! Canonical labeling, isomorphism, automorphisms and element orbits.
//!
//! Everything here runs on a small colored hypergraph: elements `0..n` and
//! colored edges (member sets). An ordered partition of the elements is
//! refined by iterated incidence signatures; individualize-and-refine
//! backtracking then explores the remaining choices. The canonical form of
//! a family is the least relabeled member list over all leaves of that
//! search tree, compared by bit-vector value.

use std::fmt;

use thiserror::Error;

use crate::setfam::{universe, Family, MemberSet, PowerSetMask};

/// Listing a whole automorphism group is limited to universes this large.
pub const MAX_GROUP_UNIVERSE: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanonError {
    #[error("universe of {0} elements is too large for a full automorphism listing (max 10)")]
    UniverseTooLarge(usize),
    #[error("families disagree on ground size")]
    GroundMismatch,
    #[error("not a permutation: {0:?}")]
    NotBijective(Vec<usize>),
}

/// A bijection of `[n]`, stored 0-based: `images[i]` is the image of `i + 1`, minus one.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// From a 0-based image table.
    pub fn from_images(images: Vec<usize>) -> Result<Self, CanonError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(CanonError::NotBijective(images));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    /// From 1-based images: `images[i - 1]` is the image of `i`.
    pub fn from_one_based(images: &[usize]) -> Result<Self, CanonError> {
        if images.contains(&0) {
            return Err(CanonError::NotBijective(images.to_vec()));
        }
        Self::from_images(images.iter().map(|&i| i - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// 0-based image table.
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Image of the 1-based element `e`.
    pub fn apply(&self, e: usize) -> usize {
        self.images[e - 1] + 1
    }

    pub fn apply_set(&self, s: MemberSet) -> MemberSet {
        s.map(&self.images)
    }

    pub fn apply_family(&self, f: &Family) -> Family {
        f.map(&self.images, f.ground_size())
            .expect("permutation preserves the ground set")
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one: Vec<usize> = self.images.iter().map(|i| i + 1).collect();
        write!(f, "Perm{one:?}")
    }
}

/// Relabeled family in canonical form plus the relabeling that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    /// Canonical relabeling, over the compacted universe `[|U(F)|]`.
    pub relabeled: Family,
    /// Maps the input's ground set onto labels; universe elements land in
    /// `1..=|U(F)|`, the rest above it in increasing order.
    pub witness: Permutation,
}

/// Element orbits of the automorphism group, ids dense from 0 in order of
/// first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrbitPartition {
    pub orbit_id: Vec<usize>,
}

impl OrbitPartition {
    pub fn trivial(n: usize) -> Self {
        OrbitPartition {
            orbit_id: (0..n).collect(),
        }
    }

    fn from_union_find(uf: &mut UnionFind) -> Self {
        let n = uf.parent.len();
        let mut ids = vec![usize::MAX; n];
        let mut orbit_id = vec![0; n];
        let mut next = 0;
        for (i, slot) in orbit_id.iter_mut().enumerate() {
            let r = uf.find(i);
            if ids[r] == usize::MAX {
                ids[r] = next;
                next += 1;
            }
            *slot = ids[r];
        }
        OrbitPartition { orbit_id }
    }

    pub fn num_orbits(&self) -> usize {
        self.orbit_id.iter().max().map_or(0, |m| m + 1)
    }

    /// Orbits as lists of 1-based elements, ordered by id.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_orbits()];
        for (i, &o) in self.orbit_id.iter().enumerate() {
            out[o].push(i + 1);
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.num_orbits() == 1
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // keep the smaller index as root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

type Cells = Vec<Vec<usize>>;

/// Elements `0..n` with colored edges.
struct Structure {
    n: usize,
    edges: Vec<(u16, u8)>,
    incident: Vec<Vec<usize>>,
    masks: Vec<PowerSetMask>,
}

impl Structure {
    fn new(n: usize, families: &[&Family]) -> Self {
        let mut edges = Vec::new();
        let mut masks = Vec::new();
        for (color, f) in families.iter().enumerate() {
            for s in f.iter() {
                edges.push((s.bits(), color as u8));
            }
            let mut m = PowerSetMask::new(n);
            for s in f.iter() {
                m.insert(s);
            }
            masks.push(m);
        }
        let mut incident = vec![Vec::new(); n];
        for (ei, &(bits, _)) in edges.iter().enumerate() {
            for (x, inc) in incident.iter_mut().enumerate() {
                if bits & (1 << x) != 0 {
                    inc.push(ei);
                }
            }
        }
        Structure {
            n,
            edges,
            incident,
            masks,
        }
    }

    fn is_automorphism(&self, images: &[usize]) -> bool {
        self.edges.iter().all(|&(bits, color)| {
            let img = MemberSet::from_bits(bits).map(images);
            self.masks[color as usize].contains(img)
        })
    }

    /// Refines `cells` to an equitable-style partition. Returns a trace
    /// fingerprint that agrees for corresponding partitions of isomorphic
    /// inputs.
    fn refine(&self, cells: &mut Cells) -> u64 {
        let mut trace = Fnv::new();
        loop {
            let mut cell_of = vec![0usize; self.n];
            for (ci, c) in cells.iter().enumerate() {
                for &x in c {
                    cell_of[x] = ci;
                }
            }
            let ncells = cells.len();
            // edge profile: color followed by per-cell counts
            let profiles: Vec<Vec<u8>> = self
                .edges
                .iter()
                .map(|&(bits, color)| {
                    let mut p = vec![0u8; ncells + 1];
                    p[0] = color;
                    let mut b = bits;
                    while b != 0 {
                        let x = b.trailing_zeros() as usize;
                        b &= b - 1;
                        p[cell_of[x] + 1] += 1;
                    }
                    p
                })
                .collect();
            let mut order: Vec<usize> = (0..profiles.len()).collect();
            order.sort_by(|&a, &b| profiles[a].cmp(&profiles[b]));
            let mut rank = vec![0u32; profiles.len()];
            let mut r = 0u32;
            for w in 0..order.len() {
                if w > 0 && profiles[order[w]] != profiles[order[w - 1]] {
                    r += 1;
                }
                rank[order[w]] = r;
            }
            let sigs: Vec<Vec<u32>> = (0..self.n)
                .map(|x| {
                    let mut s: Vec<u32> = self.incident[x].iter().map(|&e| rank[e]).collect();
                    s.sort_unstable();
                    s
                })
                .collect();
            let mut next: Cells = Vec::with_capacity(ncells);
            for c in cells.iter() {
                if c.len() == 1 {
                    next.push(c.clone());
                    continue;
                }
                let mut c = c.clone();
                c.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
                let mut start = 0;
                for j in 1..=c.len() {
                    if j == c.len() || sigs[c[j]] != sigs[c[start]] {
                        trace.write(j - start);
                        for &v in &sigs[c[start]] {
                            trace.write(v as usize);
                        }
                        next.push(c[start..j].to_vec());
                        start = j;
                    }
                }
                trace.write(usize::MAX);
            }
            let changed = next.len() != ncells;
            *cells = next;
            if !changed {
                return trace.finish();
            }
        }
    }

    fn initial_cells(&self) -> Cells {
        if self.n == 0 {
            Vec::new()
        } else {
            vec![(0..self.n).collect()]
        }
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf29ce484222325)
    }
    fn write(&mut self, v: usize) {
        for b in (v as u64).to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

fn individualize(cells: &Cells, cell: usize, v: usize) -> Cells {
    let mut out = Vec::with_capacity(cells.len() + 1);
    for (ci, c) in cells.iter().enumerate() {
        if ci == cell {
            out.push(vec![v]);
            out.push(c.iter().copied().filter(|&x| x != v).collect());
        } else {
            out.push(c.clone());
        }
    }
    out
}

fn target_cell(cells: &Cells) -> Option<usize> {
    cells.iter().position(|c| c.len() > 1)
}

fn leaf_images(cells: &Cells, n: usize) -> Vec<usize> {
    let mut images = vec![0; n];
    for (pos, c) in cells.iter().enumerate() {
        images[c[0]] = pos;
    }
    images
}

struct CanonSearch<'a> {
    s: &'a Structure,
    best: Option<(Vec<u16>, Vec<usize>)>,
    autos: Vec<Vec<usize>>,
}

impl CanonSearch<'_> {
    fn relabel(&self, images: &[usize]) -> Vec<u16> {
        let mut v: Vec<u16> = self
            .s
            .edges
            .iter()
            .map(|&(b, _)| MemberSet::from_bits(b).map(images).bits())
            .collect();
        v.sort_unstable();
        v
    }

    fn run(&mut self, mut cells: Cells, prefix: &mut Vec<usize>) {
        self.s.refine(&mut cells);
        let Some(tc) = target_cell(&cells) else {
            let images = leaf_images(&cells, self.s.n);
            let relabeled = self.relabel(&images);
            match &self.best {
                None => self.best = Some((relabeled, images)),
                Some((b, bimg)) => match relabeled.cmp(b) {
                    std::cmp::Ordering::Less => self.best = Some((relabeled, images)),
                    std::cmp::Ordering::Equal => {
                        // bimg^{-1} ∘ images is an automorphism
                        let mut inv = vec![0; self.s.n];
                        for (i, &j) in bimg.iter().enumerate() {
                            inv[j] = i;
                        }
                        let auto: Vec<usize> = images.iter().map(|&j| inv[j]).collect();
                        if auto.iter().enumerate().any(|(i, &j)| i != j) {
                            self.autos.push(auto);
                        }
                    }
                    std::cmp::Ordering::Greater => {}
                },
            }
            return;
        };
        let candidates = cells[tc].clone();
        let mut explored: Vec<usize> = Vec::new();
        for &v in &candidates {
            if !explored.is_empty() && self.pruned(v, &explored, prefix) {
                continue;
            }
            explored.push(v);
            prefix.push(v);
            let child = individualize(&cells, tc, v);
            self.run(child, prefix);
            prefix.pop();
        }
    }

    /// `v` is the image of an explored sibling under a known automorphism
    /// fixing the individualized prefix.
    fn pruned(&self, v: usize, explored: &[usize], prefix: &[usize]) -> bool {
        let mut uf = UnionFind::new(self.s.n);
        let mut any = false;
        for a in &self.autos {
            if prefix.iter().all(|&p| a[p] == p) {
                any = true;
                for (i, &j) in a.iter().enumerate() {
                    uf.union(i, j);
                }
            }
        }
        if !any {
            return false;
        }
        let rv = uf.find(v);
        explored.iter().any(|&w| uf.find(w) == rv)
    }
}

/// Canonical relabeling of `f` over its compacted universe.
pub fn canonical_form(f: &Family) -> CanonicalForm {
    let (compact, old) = f.compact();
    let u = old.len();
    let s = Structure::new(u, &[&compact]);
    let mut search = CanonSearch {
        s: &s,
        best: None,
        autos: Vec::new(),
    };
    search.run(s.initial_cells(), &mut Vec::new());
    let (bits, images) = search.best.unwrap_or_else(|| {
        // u = 0: the family is empty or {∅}
        let v: Vec<u16> = compact.iter().map(|m| m.bits()).collect();
        (v, Vec::new())
    });
    let relabeled = Family::new(u.max(1), bits.into_iter().map(MemberSet::from_bits))
        .expect("relabeled family fits its universe");
    let n = f.ground_size();
    let mut witness = vec![usize::MAX; n];
    for (new_pos, &o) in old.iter().enumerate() {
        witness[o - 1] = images.get(new_pos).copied().unwrap_or(new_pos);
    }
    let mut next = u;
    for w in witness.iter_mut() {
        if *w == usize::MAX {
            *w = next;
            next += 1;
        }
    }
    CanonicalForm {
        relabeled,
        witness: Permutation { images: witness },
    }
}

/// Isomorphic as families: some bijection of universes maps one onto the other.
pub fn are_isomorphic(a: &Family, b: &Family) -> bool {
    a.len() == b.len()
        && universe(a).len() == universe(b).len()
        && canonical_form(a).relabeled == canonical_form(b).relabeled
}

/// Enumerates automorphisms of the structure via paired refinement. With
/// `first` set, only those mapping `first.0` to `first.1`, stopping after one.
struct AutoSearch<'a> {
    s: &'a Structure,
    found: Vec<Vec<usize>>,
    stop_after_one: bool,
}

impl AutoSearch<'_> {
    fn run(&mut self, mut src: Cells, mut dst: Cells) {
        if self.stop_after_one && !self.found.is_empty() {
            return;
        }
        let t1 = self.s.refine(&mut src);
        let t2 = self.s.refine(&mut dst);
        if t1 != t2
            || src.len() != dst.len()
            || src.iter().zip(&dst).any(|(a, b)| a.len() != b.len())
        {
            return;
        }
        let Some(tc) = target_cell(&src) else {
            let mut images = vec![0; self.s.n];
            for (a, b) in src.iter().zip(&dst) {
                images[a[0]] = b[0];
            }
            if self.s.is_automorphism(&images) {
                self.found.push(images);
            }
            return;
        };
        let x = src[tc][0];
        let src_child = individualize(&src, tc, x);
        for &y in &dst[tc].clone() {
            self.run(src_child.clone(), individualize(&dst, tc, y));
            if self.stop_after_one && !self.found.is_empty() {
                return;
            }
        }
    }
}

fn structure_group(s: &Structure) -> Vec<Permutation> {
    let mut search = AutoSearch {
        s,
        found: Vec::new(),
        stop_after_one: false,
    };
    search.run(s.initial_cells(), s.initial_cells());
    let mut out: Vec<Permutation> = search
        .found
        .into_iter()
        .map(|images| Permutation { images })
        .collect();
    out.sort();
    out
}

fn structure_orbits(s: &Structure) -> OrbitPartition {
    let mut uf = UnionFind::new(s.n);
    let mut root = s.initial_cells();
    s.refine(&mut root);
    for (ci, cell) in root.iter().enumerate() {
        let mut reps: Vec<usize> = vec![cell[0]];
        for &y in &cell[1..] {
            let mut joined = false;
            for &r in &reps {
                if uf.find(r) == uf.find(y) {
                    joined = true;
                    break;
                }
            }
            if joined {
                continue;
            }
            for &r in &reps {
                let mut search = AutoSearch {
                    s,
                    found: Vec::new(),
                    stop_after_one: true,
                };
                search.run(individualize(&root, ci, r), individualize(&root, ci, y));
                if let Some(a) = search.found.pop() {
                    for (i, &j) in a.iter().enumerate() {
                        uf.union(i, j);
                    }
                    joined = true;
                    break;
                }
            }
            if !joined {
                reps.push(y);
            }
        }
    }
    OrbitPartition::from_union_find(&mut uf)
}

/// All permutations of `[n]` fixing `f` setwise; elements outside `U(f)` are
/// left fixed.
pub fn automorphism_group(f: &Family) -> Result<Vec<Permutation>, CanonError> {
    let (compact, old) = f.compact();
    let u = old.len();
    if u > MAX_GROUP_UNIVERSE {
        return Err(CanonError::UniverseTooLarge(u));
    }
    let s = Structure::new(u, &[&compact]);
    let n = f.ground_size();
    let mut out: Vec<Permutation> = structure_group(&s)
        .into_iter()
        .map(|p| {
            let mut images: Vec<usize> = (0..n).collect();
            for (i, &j) in p.images.iter().enumerate() {
                images[old[i] - 1] = old[j] - 1;
            }
            Permutation { images }
        })
        .collect();
    if out.is_empty() {
        out.push(Permutation::identity(n));
    }
    out.sort();
    Ok(out)
}

/// Permutations of the whole ground set fixing every family in `families`
/// simultaneously.
pub fn joint_automorphism_group(families: &[&Family]) -> Result<Vec<Permutation>, CanonError> {
    let n = check_same_ground(families)?;
    if n > MAX_GROUP_UNIVERSE {
        return Err(CanonError::UniverseTooLarge(n));
    }
    let s = Structure::new(n, families);
    Ok(structure_group(&s))
}

/// Orbits of the whole ground set under permutations fixing every family.
pub fn joint_orbits(families: &[&Family]) -> Result<OrbitPartition, CanonError> {
    let n = check_same_ground(families)?;
    Ok(structure_orbits(&Structure::new(n, families)))
}

fn check_same_ground(families: &[&Family]) -> Result<usize, CanonError> {
    let n = families.first().map_or(0, |f| f.ground_size());
    if families.iter().any(|f| f.ground_size() != n) {
        return Err(CanonError::GroundMismatch);
    }
    Ok(n)
}

/// Orbits of `Aut(f)` on the ground set; elements outside `U(f)` are singletons.
pub fn orbits(f: &Family) -> OrbitPartition {
    let (compact, old) = f.compact();
    let s = Structure::new(old.len(), &[&compact]);
    let inner = structure_orbits(&s);
    let n = f.ground_size();
    let mut uf = UnionFind::new(n);
    for (i, &oi) in inner.orbit_id.iter().enumerate() {
        for (j, &oj) in inner.orbit_id.iter().enumerate().skip(i + 1) {
            if oi == oj {
                uf.union(old[i] - 1, old[j] - 1);
            }
        }
    }
    OrbitPartition::from_union_find(&mut uf)
}

/// Orbit partition induced by an explicit list of permutations.
pub fn orbits_of_group(n: usize, group: &[Permutation]) -> OrbitPartition {
    let mut uf = UnionFind::new(n);
    for p in group {
        for (i, &j) in p.images.iter().enumerate() {
            uf.union(i, j);
        }
    }
    OrbitPartition::from_union_find(&mut uf)
}
