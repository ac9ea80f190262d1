//! Free bigraded modules over a truncation window, maps of fixed bidegree
//! between them, and the keyed families of such maps (faces, morphism and
//! homotopy components, cyclic and dihedral operators).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{matrix_multiply, RingSpec, Scalar, SparseMatrix};

/// (simplicial level n, internal degree m).
pub type Bidegree = (usize, i64);

/// Bounds of every computation: levels 0..=max_level, internal degrees in
/// the inclusive range `internal`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TruncationWindow {
    pub max_level: usize,
    pub internal: (i64, i64),
}

impl TruncationWindow {
    pub fn new(max_level: usize, lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Window(format!("empty internal range {lo}..{hi}")));
        }
        if lo < 0 {
            return Err(Error::Window(format!("internal degrees must be nonnegative, got {lo}")));
        }
        Ok(TruncationWindow { max_level, internal: (lo, hi) })
    }

    pub fn contains(&self, (n, m): Bidegree) -> bool {
        n <= self.max_level && m >= self.internal.0 && m <= self.internal.1
    }

    pub fn bidegrees(&self) -> impl Iterator<Item = Bidegree> + '_ {
        (0..=self.max_level).flat_map(move |n| (self.internal.0..=self.internal.1).map(move |m| (n, m)))
    }

    pub fn internal_degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.internal.0..=self.internal.1
    }
}

/// A free module X_{n,m} of given rank at each bidegree of a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeBigradedModule {
    window: TruncationWindow,
    dims: BTreeMap<Bidegree, usize>,
    labels: Option<BTreeMap<Bidegree, Vec<String>>>,
}

impl FreeBigradedModule {
    /// Bidegrees missing from `dims` get rank 0; keys outside the window are
    /// rejected.
    pub fn new(window: TruncationWindow, dims: BTreeMap<Bidegree, usize>) -> Result<Self> {
        let mut full = BTreeMap::new();
        for (b, r) in &dims {
            if !window.contains(*b) {
                return Err(Error::Window(format!("bidegree {b:?} outside the window")));
            }
            full.insert(*b, *r);
        }
        for b in window.bidegrees() {
            full.entry(b).or_insert(0);
        }
        Ok(FreeBigradedModule { window, dims: full, labels: None })
    }

    pub fn with_labels(mut self, labels: BTreeMap<Bidegree, Vec<String>>) -> Result<Self> {
        for (b, l) in &labels {
            if l.len() != self.dim(*b) {
                return Err(Error::Dimension(format!("{} labels for rank {} at {b:?}", l.len(), self.dim(*b))));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn window(&self) -> &TruncationWindow {
        &self.window
    }

    /// Rank at a bidegree; 0 outside the window.
    pub fn dim(&self, b: Bidegree) -> usize {
        self.dims.get(&b).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> &BTreeMap<Bidegree, usize> {
        &self.dims
    }

    pub fn labels(&self, b: Bidegree) -> Option<&[String]> {
        self.labels.as_ref().and_then(|l| l.get(&b)).map(|v| v.as_slice())
    }

    pub fn max_level(&self) -> usize {
        self.window.max_level
    }

    /// Nonzero bidegrees at level n.
    pub fn level(&self, n: usize) -> impl Iterator<Item = (i64, usize)> + '_ {
        self.dims.range((n, i64::MIN)..=(n, i64::MAX)).filter(|(_, r)| **r > 0).map(|((_, m), r)| (*m, *r))
    }
}

/// True when two module handles denote the same module.
pub fn same_module(a: &Arc<FreeBigradedModule>, b: &Arc<FreeBigradedModule>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A linear map of fixed bidegree. The block at source bidegree (n, m) is a
/// matrix from the basis of X_{n,m} to the basis of Y_{n+Δn, m+Δm}
/// (columns index the source). Missing blocks are zero.
#[derive(Clone, Debug)]
pub struct GradedMap {
    source: Arc<FreeBigradedModule>,
    target: Arc<FreeBigradedModule>,
    bidegree: (i64, i64),
    ring: RingSpec,
    blocks: BTreeMap<Bidegree, SparseMatrix>,
}

fn shift(b: Bidegree, by: (i64, i64)) -> Option<Bidegree> {
    let n = b.0 as i64 + by.0;
    (n >= 0).then_some((n as usize, b.1 + by.1))
}

impl GradedMap {
    pub fn zero(
        source: Arc<FreeBigradedModule>,
        target: Arc<FreeBigradedModule>,
        bidegree: (i64, i64),
        ring: RingSpec,
    ) -> Self {
        GradedMap { source, target, bidegree, ring, blocks: BTreeMap::new() }
    }

    pub fn identity(module: Arc<FreeBigradedModule>, ring: RingSpec) -> Self {
        let blocks = module
            .dims()
            .iter()
            .filter(|(_, r)| **r > 0)
            .map(|(b, r)| (*b, SparseMatrix::identity(ring, *r)))
            .collect();
        GradedMap { source: module.clone(), target: module, bidegree: (0, 0), ring, blocks }
    }

    pub fn source(&self) -> &Arc<FreeBigradedModule> {
        &self.source
    }
    pub fn target(&self) -> &Arc<FreeBigradedModule> {
        &self.target
    }
    pub fn bidegree(&self) -> (i64, i64) {
        self.bidegree
    }
    pub fn ring(&self) -> RingSpec {
        self.ring
    }
    pub fn blocks(&self) -> &BTreeMap<Bidegree, SparseMatrix> {
        &self.blocks
    }

    /// Target bidegree of the block at `b`, if it lies in the target window.
    pub fn target_of(&self, b: Bidegree) -> Option<Bidegree> {
        shift(b, self.bidegree).filter(|t| self.target.window().contains(*t))
    }

    /// Sets the block at source bidegree `b`. Blocks landing outside the
    /// target window must be zero and are dropped.
    pub fn set_block(&mut self, b: Bidegree, m: SparseMatrix) -> Result<()> {
        if m.ring() != self.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), m.ring().to_string()));
        }
        let rows = self.target_of(b).map_or(0, |t| self.target.dim(t));
        if m.cols() != self.source.dim(b) || (m.rows() != rows && !(m.is_zero() && rows == 0)) {
            return Err(Error::Dimension(format!(
                "block at {b:?} is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                rows,
                self.source.dim(b)
            )));
        }
        if m.is_zero() || rows == 0 {
            self.blocks.remove(&b);
        } else {
            self.blocks.insert(b, m);
        }
        Ok(())
    }

    pub fn block(&self, b: Bidegree) -> Option<&SparseMatrix> {
        self.blocks.get(&b)
    }

    /// Block at `b`, materialized as a zero matrix when absent.
    pub fn block_or_zero(&self, b: Bidegree) -> SparseMatrix {
        match self.blocks.get(&b) {
            Some(m) => m.clone(),
            None => {
                let rows = self.target_of(b).map_or(0, |t| self.target.dim(t));
                SparseMatrix::zero(self.ring, rows, self.source.dim(b))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Keeps only the blocks at level n.
    pub fn restrict_level(&self, n: usize) -> GradedMap {
        let blocks = self.blocks.range((n, i64::MIN)..=(n, i64::MAX)).map(|(b, m)| (*b, m.clone())).collect();
        GradedMap { blocks, ..self.clone_shell() }
    }

    fn clone_shell(&self) -> GradedMap {
        GradedMap {
            source: self.source.clone(),
            target: self.target.clone(),
            bidegree: self.bidegree,
            ring: self.ring,
            blocks: BTreeMap::new(),
        }
    }

    /// g ∘ f (apply f first).
    pub fn compose(g: &GradedMap, f: &GradedMap) -> Result<GradedMap> {
        if !same_module(&f.target, &g.source) {
            return Err(Error::Incompatible("compose: target of f is not the source of g".into()));
        }
        if f.ring != g.ring {
            return Err(Error::RingMismatch(g.ring.to_string(), f.ring.to_string()));
        }
        let bidegree = (f.bidegree.0 + g.bidegree.0, f.bidegree.1 + g.bidegree.1);
        let mut out = GradedMap::zero(f.source.clone(), g.target.clone(), bidegree, f.ring);
        for (b, fm) in &f.blocks {
            let Some(mid) = f.target_of(*b) else { continue };
            let Some(gm) = g.blocks.get(&mid) else { continue };
            if out.target_of(*b).is_none() {
                continue;
            }
            let p = matrix_multiply(gm, fm)?;
            if !p.is_zero() {
                out.blocks.insert(*b, p);
            }
        }
        Ok(out)
    }

    /// ca·a + cb·b.
    pub fn add(a: &GradedMap, b: &GradedMap, (ca, cb): (&Scalar, &Scalar)) -> Result<GradedMap> {
        a.check_parallel(b)?;
        let mut out = a.clone_shell();
        let keys: std::collections::BTreeSet<Bidegree> = a.blocks.keys().chain(b.blocks.keys()).copied().collect();
        for k in keys {
            let m = match (a.blocks.get(&k), b.blocks.get(&k)) {
                (Some(x), Some(y)) => x.lin_comb(ca, y, cb)?,
                (Some(x), None) => x.scale(ca),
                (None, Some(y)) => y.scale(cb),
                (None, None) => unreachable!(),
            };
            if !m.is_zero() {
                out.blocks.insert(k, m);
            }
        }
        Ok(out)
    }

    /// self += c·other, in place.
    pub fn add_assign_scaled(&mut self, other: &GradedMap, c: &Scalar) -> Result<()> {
        self.check_parallel(other)?;
        if c.is_zero() {
            return Ok(());
        }
        let one = self.ring.one();
        for (k, y) in &other.blocks {
            let m = match self.blocks.get(k) {
                Some(x) => x.lin_comb(&one, y, c)?,
                None => y.scale(c),
            };
            if m.is_zero() {
                self.blocks.remove(k);
            } else {
                self.blocks.insert(*k, m);
            }
        }
        Ok(())
    }

    pub fn sub(a: &GradedMap, b: &GradedMap) -> Result<GradedMap> {
        let r = a.ring;
        GradedMap::add(a, b, (&r.one(), &r.from_i64(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> GradedMap {
        let mut out = self.clone_shell();
        for (k, m) in &self.blocks {
            let s = m.scale(c);
            if !s.is_zero() {
                out.blocks.insert(*k, s);
            }
        }
        out
    }

    pub fn neg(&self) -> GradedMap {
        self.scale(&self.ring.from_i64(-1))
    }

    /// Multiplies the block at (n, m) by sign(n, m) = ±1.
    pub fn twist(&self, sign: impl Fn(Bidegree) -> bool) -> GradedMap {
        let mut out = self.clone_shell();
        let minus = self.ring.from_i64(-1);
        for (k, m) in &self.blocks {
            out.blocks.insert(*k, if sign(*k) { m.scale(&minus) } else { m.clone() });
        }
        out
    }

    fn check_parallel(&self, other: &GradedMap) -> Result<()> {
        if !same_module(&self.source, &other.source) || !same_module(&self.target, &other.target) {
            return Err(Error::Incompatible("maps have different source or target".into()));
        }
        if self.bidegree != other.bidegree {
            return Err(Error::Dimension(format!("bidegree {:?} vs {:?}", self.bidegree, other.bidegree)));
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring.to_string(), other.ring.to_string()));
        }
        Ok(())
    }

    /// Exact equality of the underlying linear maps.
    pub fn equals(&self, other: &GradedMap) -> bool {
        self.bidegree == other.bidegree && self.blocks == other.blocks
    }
}

/// Strictly increasing tuple of nonnegative integers (possibly empty).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    pub fn new(v: Vec<usize>) -> Result<Self> {
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Tuple(format!("{v:?} is not strictly increasing")));
        }
        Ok(IndexTuple(v))
    }

    pub fn empty() -> Self {
        IndexTuple(Vec::new())
    }

    /// (a, a+1, …, b−1).
    pub fn range(a: usize, b: usize) -> Self {
        IndexTuple((a..b).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
    pub fn sum(&self) -> usize {
        self.0.iter().sum()
    }
    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// All k-subsets of {0..=n}, lexicographic.
    pub fn all_of_size(n: usize, k: usize) -> Vec<IndexTuple> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<IndexTuple>) {
            if cur.len() == k {
                out.push(IndexTuple(cur.clone()));
                return;
            }
            let need = k - cur.len();
            for i in start..=n {
                if n + 1 - i < need {
                    break;
                }
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        rec(0, n, k, &mut cur, &mut out);
        out
    }

    /// (n − i_k, …, n − i₁).
    pub fn reflect(&self, n: usize) -> IndexTuple {
        IndexTuple(self.0.iter().rev().map(|i| n - i).collect())
    }
}

impl TryFrom<Vec<usize>> for IndexTuple {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        IndexTuple::new(v)
    }
}

impl From<IndexTuple> for Vec<usize> {
    fn from(t: IndexTuple) -> Vec<usize> {
        t.0
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// What a family of components stands for; fixes the bidegree of each entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// ∂_I, bidegree (−k, k−1)
    Face,
    /// f_I, bidegree (−k, k)
    Morphism,
    /// h_I, bidegree (−k, k+1)
    Homotopy,
}

impl FamilyKind {
    pub fn bidegree(&self, k: usize) -> (i64, i64) {
        let k = k as i64;
        match self {
            FamilyKind::Face => (-k, k - 1),
            FamilyKind::Morphism => (-k, k),
            FamilyKind::Homotopy => (-k, k + 1),
        }
    }
}

/// Sparse family (n, I) ↦ map restricted to level n. Absent keys are zero.
#[derive(Clone, Debug)]
pub struct ComponentFamily {
    kind: FamilyKind,
    source: Arc<FreeBigradedModule>,
    target: Arc<FreeBigradedModule>,
    ring: RingSpec,
    entries: BTreeMap<(usize, IndexTuple), GradedMap>,
}

impl ComponentFamily {
    pub fn new(
        kind: FamilyKind,
        source: Arc<FreeBigradedModule>,
        target: Arc<FreeBigradedModule>,
        ring: RingSpec,
    ) -> Self {
        ComponentFamily { kind, source, target, ring, entries: BTreeMap::new() }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }
    pub fn source(&self) -> &Arc<FreeBigradedModule> {
        &self.source
    }
    pub fn target(&self) -> &Arc<FreeBigradedModule> {
        &self.target
    }
    pub fn ring(&self) -> RingSpec {
        self.ring
    }
    pub fn entries(&self) -> &BTreeMap<(usize, IndexTuple), GradedMap> {
        &self.entries
    }

    /// Checks the index constraints of a key: entries ≤ n, and 1 ≤ k ≤ n for
    /// faces, k ≤ n otherwise.
    pub fn check_key(&self, n: usize, tuple: &IndexTuple) -> Result<()> {
        let k = tuple.len();
        if self.kind == FamilyKind::Face && k == 0 {
            return Err(Error::Tuple("faces need a nonempty tuple".into()));
        }
        if k > n || tuple.last().is_some_and(|l| l > n) {
            return Err(Error::Tuple(format!("{tuple} is not a valid tuple at level {n}")));
        }
        Ok(())
    }

    pub fn insert(&mut self, n: usize, tuple: IndexTuple, map: GradedMap) -> Result<()> {
        self.check_key(n, &tuple)?;
        if map.bidegree() != self.kind.bidegree(tuple.len()) {
            return Err(Error::Dimension(format!(
                "component {tuple} has bidegree {:?}, expected {:?}",
                map.bidegree(),
                self.kind.bidegree(tuple.len())
            )));
        }
        if !same_module(map.source(), &self.source) || !same_module(map.target(), &self.target) {
            return Err(Error::Incompatible(format!("component {tuple} acts between other modules")));
        }
        if map.blocks().keys().any(|b| b.0 != n) {
            return Err(Error::Dimension(format!("component ({n}, {tuple}) has blocks off level {n}")));
        }
        if map.is_zero() {
            self.entries.remove(&(n, tuple));
        } else {
            self.entries.insert((n, tuple), map);
        }
        Ok(())
    }

    pub fn get(&self, n: usize, tuple: &IndexTuple) -> Option<&GradedMap> {
        self.entries.get(&(n, tuple.clone()))
    }

    pub fn zero_component(&self, k: usize) -> GradedMap {
        GradedMap::zero(self.source.clone(), self.target.clone(), self.kind.bidegree(k), self.ring)
    }

    pub fn get_or_zero(&self, n: usize, tuple: &IndexTuple) -> GradedMap {
        self.get(n, tuple).cloned().unwrap_or_else(|| self.zero_component(tuple.len()))
    }

    pub fn scale(&self, c: &Scalar) -> ComponentFamily {
        let mut out = ComponentFamily::new(self.kind, self.source.clone(), self.target.clone(), self.ring);
        for (k, m) in &self.entries {
            let s = m.scale(c);
            if !s.is_zero() {
                out.entries.insert(k.clone(), s);
            }
        }
        out
    }

    /// Componentwise sum of two families of the same kind.
    pub fn add(&self, other: &ComponentFamily) -> Result<ComponentFamily> {
        if self.kind != other.kind {
            return Err(Error::Incompatible("families of different kinds".into()));
        }
        let mut out = self.clone();
        let one = self.ring.one();
        for (k, m) in &other.entries {
            let cur = out.entries.remove(k);
            let s = match cur {
                Some(c) => GradedMap::add(&c, m, (&one, &one))?,
                None => m.clone(),
            };
            if !s.is_zero() {
                out.entries.insert(k.clone(), s);
            }
        }
        Ok(out)
    }

    /// Keys where the two families differ.
    pub fn differences(&self, other: &ComponentFamily) -> Vec<(usize, IndexTuple)> {
        let mut keys: Vec<(usize, IndexTuple)> = self.entries.keys().chain(other.entries.keys()).cloned().collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter(|(n, t)| {
                let a = self.get(*n, t);
                let b = other.get(*n, t);
                match (a, b) {
                    (Some(x), Some(y)) => !x.equals(y),
                    (None, None) => false,
                    _ => true,
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    CyclicT,
    DihedralR,
}

/// The level-preserving operators t = {t_n} or r = {r_n}, stored as one map
/// of bidegree (0, 0).
#[derive(Clone, Debug)]
pub struct OperatorFamily {
    pub kind: OperatorKind,
    pub map: GradedMap,
}

impl OperatorFamily {
    pub fn new(kind: OperatorKind, map: GradedMap) -> Result<Self> {
        if map.bidegree() != (0, 0) || !same_module(map.source(), map.target()) {
            return Err(Error::Incompatible("operators are endomorphisms of bidegree (0,0)".into()));
        }
        Ok(OperatorFamily { kind, map })
    }

    pub fn at_level(&self, n: usize) -> GradedMap {
        self.map.restrict_level(n)
    }

    /// t_n^{e mod (n+1)} restricted to level n; t_n^{−q} = t_n^{n+1−q}.
    pub fn power_of_t(&self, n: usize, e: i64) -> Result<GradedMap> {
        if self.kind != OperatorKind::CyclicT {
            return Err(Error::Incompatible("power_of_t needs the cyclic operator".into()));
        }
        let e = e.rem_euclid(n as i64 + 1) as usize;
        let ring = self.map.ring();
        let id = GradedMap::identity(self.map.source().clone(), ring).restrict_level(n);
        let t = self.at_level(n);
        let mut acc = id;
        for _ in 0..e {
            acc = GradedMap::compose(&t, &acc)?;
        }
        Ok(acc)
    }
}

/// The ring element (−1)^e.
pub fn sign(ring: RingSpec, e: i64) -> Scalar {
    ring.sign(e)
}
