//! ∞-simplicial combinatorics: the hat operator, shuffle partitions, the
//! symbolic right-hand sides of the face, morphism, composition and homotopy
//! relations, and their evaluation on concrete component families.
//!
//! Expressions are symbolic in the entries of the index tuple: a slot
//! `i_a − s` refers to position `a` of the tuple shifted down by `s`. The
//! shuffle structure only depends on the order of the entries, so one
//! symbolic expansion per arity serves every concrete tuple.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graded::{ComponentFamily, FreeBigradedModule, GradedMap, IndexTuple};
use crate::report::Report;

/// σ̂ applied to a tuple: `sigma[s]` is the position of the tuple entry placed
/// at slot s; each placed entry is lowered by the number of smaller entries
/// to its right.
pub fn hat_tuple(sigma: &[usize], tuple: &[i64]) -> Result<Vec<i64>> {
    if sigma.len() != tuple.len() {
        return Err(Error::Dimension(format!("permutation of {} for a {}-tuple", sigma.len(), tuple.len())));
    }
    let mut seen = vec![false; sigma.len()];
    for &s in sigma {
        if s >= sigma.len() || std::mem::replace(&mut seen[s], true) {
            return Err(Error::Tuple(format!("{sigma:?} is not a permutation")));
        }
    }
    let permuted: Vec<i64> = sigma.iter().map(|&s| tuple[s]).collect();
    Ok((0..permuted.len())
        .map(|s| permuted[s] - permuted[s + 1..].iter().filter(|&&u| u < permuted[s]).count() as i64)
        .collect())
}

/// Parity of the number of inversions.
pub fn parity(perm: &[usize]) -> usize {
    let mut inv = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    inv % 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Face,
    MorphismF,
    MorphismG,
    Homotopy,
}

impl SymbolKind {
    pub fn symbol(&self) -> &'static str {
        match self {
            SymbolKind::Face => "∂",
            SymbolKind::MorphismF => "f",
            SymbolKind::MorphismG => "g",
            SymbolKind::Homotopy => "h",
        }
    }
}

/// i_pos − shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub pos: usize,
    pub shift: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub kind: SymbolKind,
    pub slots: Vec<Slot>,
}

impl Factor {
    fn full(kind: SymbolKind, k: usize) -> Factor {
        Factor { kind, slots: (0..k).map(|pos| Slot { pos, shift: 0 }).collect() }
    }

    /// Concrete tuple for a given index tuple.
    pub fn instantiate(&self, tuple: &IndexTuple) -> IndexTuple {
        let v = self.slots.iter().map(|s| tuple.as_slice()[s.pos] - s.shift).collect();
        IndexTuple::new(v).expect("hatted halves are increasing")
    }

    fn render(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .slots
            .iter()
            .map(|s| if s.shift == 0 { names[s.pos].clone() } else { format!("{}−{}", names[s.pos], s.shift) })
            .collect();
        format!("{}({})", self.kind.symbol(), parts.join(","))
    }

    fn render_concrete(&self, tuple: &IndexTuple) -> String {
        format!("{}{}", self.kind.symbol(), self.instantiate(tuple))
    }
}

/// coeff · left ∘ right (right acts first), or coeff · left alone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormalTerm {
    pub coeff: i64,
    pub left: Factor,
    pub right: Option<Factor>,
}

impl FormalTerm {
    fn render_with(&self, body: String) -> String {
        let sign = if self.coeff < 0 { "−" } else { "+" };
        let mag = self.coeff.unsigned_abs();
        if mag == 1 {
            format!("{sign}{body}")
        } else {
            format!("{sign}{mag}·{body}")
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        let body = match &self.right {
            Some(r) => format!("{}∘{}", self.left.render(names), r.render(names)),
            None => self.left.render(names),
        };
        self.render_with(body)
    }

    pub fn render_concrete(&self, tuple: &IndexTuple) -> String {
        let body = match &self.right {
            Some(r) => format!("{}∘{}", self.left.render_concrete(tuple), r.render_concrete(tuple)),
            None => self.left.render_concrete(tuple),
        };
        self.render_with(body)
    }
}

/// Which relation an expression is the right-hand side of.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationKind {
    /// d(∂_I)
    Face,
    /// d(f_I)
    Morphism,
    /// (gf)_I
    Composition,
    /// d(h_I)
    Homotopy,
}

impl RelationKind {
    /// Bidegree of the evaluated right-hand side for a k-tuple.
    pub fn bidegree(&self, k: usize) -> (i64, i64) {
        let k = k as i64;
        match self {
            RelationKind::Face => (-k, k - 2),
            RelationKind::Morphism => (-k, k - 1),
            RelationKind::Composition | RelationKind::Homotopy => (-k, k),
        }
    }
}

/// Canonical signed sum of terms: identical terms merged, zeros dropped,
/// positive terms first, otherwise in generation order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalExpression {
    pub relation: RelationKind,
    pub arity: usize,
    pub terms: Vec<FormalTerm>,
}

impl FormalExpression {
    fn build(relation: RelationKind, arity: usize, raw: Vec<FormalTerm>) -> Self {
        let mut merged: Vec<FormalTerm> = Vec::new();
        for t in raw {
            match merged.iter_mut().find(|m| m.left == t.left && m.right == t.right) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0);
        let (mut pos, neg): (Vec<_>, Vec<_>) = merged.into_iter().partition(|t| t.coeff > 0);
        pos.extend(neg);
        FormalExpression { relation, arity, terms: pos }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rendering with the given index names, e.g. "+∂(j−1)∘∂(i) −∂(i)∘∂(j)".
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms.iter().map(|t| t.render(names)).collect::<Vec<_>>().join(" ")
    }

    /// Rendering for a concrete tuple, e.g. "+∂(1)∘∂(0) −∂(0)∘∂(2)".
    pub fn render_concrete(&self, tuple: &IndexTuple) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms.iter().map(|t| t.render_concrete(tuple)).collect::<Vec<_>>().join(" ")
    }

    /// Multiset of rendered terms, for order-independent comparison.
    pub fn term_set(&self, names: &[String]) -> Vec<String> {
        let mut v: Vec<String> = self.terms.iter().map(|t| t.render(names)).collect();
        v.sort();
        v
    }
}

impl fmt::Display for FormalExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&default_names(self.arity)))
    }
}

/// i; i, j; i1, i2, … for k ≥ 3.
pub fn default_names(k: usize) -> Vec<String> {
    match k {
        1 => vec!["i".into()],
        2 => vec!["i".into(), "j".into()],
        _ => (1..=k).map(|a| format!("i{a}")).collect(),
    }
}

/// One shuffle partition: the sign parity of σ and the hatted left and right
/// halves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shuffle {
    pub parity: usize,
    pub left: Vec<Slot>,
    pub right: Vec<Slot>,
}

/// All (σ, m) with both halves increasing, for m in `m_range`. Such a pair is
/// determined by the set of positions placed on the left.
pub fn shuffles(k: usize, m_range: std::ops::RangeInclusive<usize>) -> Vec<Shuffle> {
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << k) {
        let m = mask.count_ones() as usize;
        if !m_range.contains(&m) {
            continue;
        }
        let left: Vec<usize> = (0..k).filter(|a| mask >> a & 1 == 1).collect();
        let right: Vec<usize> = (0..k).filter(|a| mask >> a & 1 == 0).collect();
        let order: Vec<usize> = left.iter().chain(right.iter()).copied().collect();
        let hat: Vec<Slot> = (0..k)
            .map(|s| Slot { pos: order[s], shift: order[s + 1..].iter().filter(|&&u| u < order[s]).count() })
            .collect();
        out.push(Shuffle { parity: parity(&order), left: hat[..m].to_vec(), right: hat[m..].to_vec() });
    }
    out
}

fn pair(coeff: i64, lk: SymbolKind, l: Vec<Slot>, rk: SymbolKind, r: Vec<Slot>) -> FormalTerm {
    FormalTerm { coeff, left: Factor { kind: lk, slots: l }, right: Some(Factor { kind: rk, slots: r }) }
}

fn face_sign(parity: usize) -> i64 {
    if parity == 0 {
        -1
    } else {
        1
    }
}

/// Right-hand side of d(∂_I) for a k-tuple.
pub fn face_relation(k: usize) -> FormalExpression {
    let raw = if k < 2 {
        Vec::new()
    } else {
        shuffles(k, 1..=k - 1)
            .into_iter()
            .map(|s| pair(face_sign(s.parity), SymbolKind::Face, s.left, SymbolKind::Face, s.right))
            .collect()
    };
    FormalExpression::build(RelationKind::Face, k, raw)
}

/// Right-hand side of d(f_I).
pub fn morphism_relation(k: usize) -> FormalExpression {
    use SymbolKind::{Face, MorphismF};
    let mut raw = Vec::new();
    if k >= 1 {
        raw.push(pair(-1, Face, Factor::full(Face, k).slots, MorphismF, Vec::new()));
        raw.push(pair(1, MorphismF, Vec::new(), Face, Factor::full(Face, k).slots));
        for s in shuffles(k, 1..=k - 1) {
            let c = face_sign(s.parity);
            raw.push(pair(c, Face, s.left.clone(), MorphismF, s.right.clone()));
            raw.push(pair(-c, MorphismF, s.left, Face, s.right));
        }
    }
    FormalExpression::build(RelationKind::Morphism, k, raw)
}

/// (gf)_I as a sum of g_J ∘ f_L.
pub fn composition(k: usize) -> FormalExpression {
    let raw = shuffles(k, 0..=k)
        .into_iter()
        .map(|s| {
            let c = if s.parity == 0 { 1 } else { -1 };
            pair(c, SymbolKind::MorphismG, s.left, SymbolKind::MorphismF, s.right)
        })
        .collect();
    FormalExpression::build(RelationKind::Composition, k, raw)
}

/// Right-hand side of d(h_I) for a homotopy h from f to g.
pub fn homotopy_relation(k: usize) -> FormalExpression {
    use SymbolKind::{Face, Homotopy, MorphismF, MorphismG};
    let mut raw = vec![
        FormalTerm { coeff: 1, left: Factor::full(MorphismF, k), right: None },
        FormalTerm { coeff: -1, left: Factor::full(MorphismG, k), right: None },
    ];
    if k >= 1 {
        raw.push(pair(-1, Face, Factor::full(Face, k).slots, Homotopy, Vec::new()));
        raw.push(pair(-1, Homotopy, Vec::new(), Face, Factor::full(Face, k).slots));
        for s in shuffles(k, 1..=k - 1) {
            let c = face_sign(s.parity);
            raw.push(pair(c, Face, s.left.clone(), Homotopy, s.right.clone()));
            raw.push(pair(c, Homotopy, s.left, Face, s.right));
        }
    }
    FormalExpression::build(RelationKind::Homotopy, k, raw)
}

pub fn expand_face_relation(tuple: &IndexTuple) -> Result<FormalExpression> {
    if tuple.is_empty() {
        return Err(Error::Tuple("the face relation needs k ≥ 1".into()));
    }
    Ok(face_relation(tuple.len()))
}

pub fn expand_morphism_relation(tuple: &IndexTuple) -> FormalExpression {
    morphism_relation(tuple.len())
}

pub fn expand_composition(tuple: &IndexTuple) -> FormalExpression {
    composition(tuple.len())
}

pub fn expand_homotopy_relation(tuple: &IndexTuple) -> FormalExpression {
    homotopy_relation(tuple.len())
}

/// Families substituted for the symbols of an expression. A face acting
/// first (right factor) is taken from the source module, a face acting last
/// from the target module.
#[derive(Clone, Copy, Debug, Default)]
pub struct Bindings<'a> {
    pub source_faces: Option<&'a ComponentFamily>,
    pub target_faces: Option<&'a ComponentFamily>,
    pub f: Option<&'a ComponentFamily>,
    pub g: Option<&'a ComponentFamily>,
    pub h: Option<&'a ComponentFamily>,
}

impl<'a> Bindings<'a> {
    fn family(&self, kind: SymbolKind, acts_first: bool) -> Result<&'a ComponentFamily> {
        let fam = match kind {
            SymbolKind::Face if acts_first => self.source_faces,
            SymbolKind::Face => self.target_faces,
            SymbolKind::MorphismF => self.f,
            SymbolKind::MorphismG => self.g,
            SymbolKind::Homotopy => self.h,
        };
        fam.ok_or_else(|| Error::MissingBinding(kind.symbol().to_string()))
    }

    fn modules(&self) -> Result<(Arc<FreeBigradedModule>, Arc<FreeBigradedModule>)> {
        let src = [self.source_faces, self.f, self.g, self.h]
            .into_iter()
            .flatten()
            .next()
            .ok_or_else(|| Error::MissingBinding("any".into()))?;
        let tgt = [self.target_faces, self.f, self.g, self.h]
            .into_iter()
            .flatten()
            .next()
            .ok_or_else(|| Error::MissingBinding("any".into()))?;
        Ok((src.source().clone(), tgt.target().clone()))
    }
}

/// Substitutes concrete components into `expr` for the tuple `tuple` at
/// level n. In a product J∘L the right factor acts at level n and the left
/// one at level n − |L|. Absent components are zero.
pub fn evaluate_expression(
    expr: &FormalExpression,
    bindings: &Bindings<'_>,
    tuple: &IndexTuple,
    n: usize,
) -> Result<GradedMap> {
    if tuple.len() != expr.arity {
        return Err(Error::Tuple(format!("{tuple} for an expression of arity {}", expr.arity)));
    }
    let (src, tgt) = bindings.modules()?;
    // ring from whichever family is bound
    let ring = [bindings.source_faces, bindings.target_faces, bindings.f, bindings.g, bindings.h]
        .into_iter()
        .flatten()
        .next()
        .map(|f| f.ring())
        .ok_or_else(|| Error::MissingBinding("any".into()))?;
    let mut acc = GradedMap::zero(src, tgt, expr.relation.bidegree(tuple.len()), ring);
    for term in &expr.terms {
        let c = ring.from_i64(term.coeff);
        match &term.right {
            None => {
                let fam = bindings.family(term.left.kind, true)?;
                let j = term.left.instantiate(tuple);
                if let Some(m) = fam.get(n, &j) {
                    acc.add_assign_scaled(m, &c)?;
                }
            }
            Some(right) => {
                let rf = bindings.family(right.kind, true)?;
                let lf = bindings.family(term.left.kind, false)?;
                let l = right.instantiate(tuple);
                let j = term.left.instantiate(tuple);
                let Some(rm) = rf.get(n, &l) else { continue };
                let Some(lm) = lf.get(n - l.len(), &j) else { continue };
                let p = GradedMap::compose(lm, rm)?;
                acc.add_assign_scaled(&p, &c)?;
            }
        }
    }
    Ok(acc)
}

/// Records one violation per nonzero block of `diff`.
pub(crate) fn record_difference(
    report: &mut Report,
    relation: &str,
    n: usize,
    tuple: Option<&IndexTuple>,
    diff: &GradedMap,
) {
    report.checks += 1;
    for (b, m) in diff.blocks() {
        report.violation(relation, Some(n as i64), tuple, Some(*b), format!("{} nonzero entries", m.nnz()));
    }
}

/// d∘φ + σ·φ∘d for a map φ at level n (d given per level).
pub(crate) fn d_bracket(d_src: &GradedMap, d_tgt: &GradedMap, phi: &GradedMap, sigma: i64) -> Result<GradedMap> {
    let ring = phi.ring();
    let a = GradedMap::compose(d_tgt, phi)?;
    let b = GradedMap::compose(phi, d_src)?;
    GradedMap::add(&a, &b, (&ring.one(), &ring.from_i64(sigma)))
}

/// Checks the face relation d∂_I + ∂_I d = Σ ± ∂_J ∂_L for every tuple of
/// every level of the window.
pub fn verify_finfty(d: &GradedMap, faces: &ComponentFamily) -> Result<Report> {
    let mut report = Report::new("face relations");
    let module = faces.source().clone();
    let dd = GradedMap::compose(d, d)?;
    if !dd.is_zero() {
        report.note("the differential does not square to zero");
    }
    let bindings = Bindings { source_faces: Some(faces), target_faces: Some(faces), ..Default::default() };
    for n in 1..=module.max_level() {
        let d_n = d.restrict_level(n);
        for k in 1..=n {
            let expr = face_relation(k);
            let zero = faces.zero_component(k);
            for tuple in IndexTuple::all_of_size(n, k) {
                let phi = faces.get(n, &tuple).unwrap_or(&zero);
                let lhs = d_bracket(&d_n, d, phi, 1)?;
                let rhs = evaluate_expression(&expr, &bindings, &tuple, n)?;
                let diff = GradedMap::sub(&lhs, &rhs)?;
                record_difference(&mut report, "face-coherence", n, Some(&tuple), &diff);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::{RingSpec, SparseMatrix};
    use crate::graded::{FamilyKind, TruncationWindow};
    use std::collections::BTreeMap;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn set(v: &[&str]) -> Vec<String> {
        let mut v: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        v.sort();
        v
    }

    #[test]
    fn hat_examples() {
        assert_eq!(hat_tuple(&[0, 1], &[1, 3]).unwrap(), vec![1, 3]);
        assert_eq!(hat_tuple(&[1, 0], &[2, 5]).unwrap(), vec![4, 2]);
        assert_eq!(hat_tuple(&[2, 0, 1], &[0, 1, 4]).unwrap(), vec![2, 0, 1]);
        assert!(hat_tuple(&[0], &[1, 2]).is_err());
        assert!(hat_tuple(&[0, 0], &[1, 2]).is_err());
    }

    #[test]
    fn face_low_arities() {
        assert!(face_relation(1).is_empty());
        let e = face_relation(2);
        assert_eq!(e.render(&names(&["i", "j"])), "+∂(j−1)∘∂(i) −∂(i)∘∂(j)");
        let e3 = face_relation(3);
        assert_eq!(
            e3.term_set(&default_names(3)),
            set(&[
                "−∂(i1)∘∂(i2,i3)",
                "−∂(i1,i2)∘∂(i3)",
                "−∂(i3−2)∘∂(i1,i2)",
                "−∂(i2−1,i3−1)∘∂(i1)",
                "+∂(i2−1)∘∂(i1,i3)",
                "+∂(i1,i3−1)∘∂(i2)",
            ])
        );
    }

    #[test]
    fn right_factor_is_never_shifted() {
        for k in 1..=6 {
            for s in shuffles(k, 0..=k) {
                assert!(s.right.iter().all(|sl| sl.shift == 0));
                assert!(s.right.windows(2).all(|w| w[0].pos < w[1].pos));
            }
        }
    }

    #[test]
    fn composition_term_counts() {
        for k in 0..=4 {
            assert_eq!(composition(k).terms.len(), 1 << k);
        }
        assert_eq!(composition(0).to_string(), "+g()∘f()");
        assert_eq!(
            composition(2).term_set(&names(&["i1", "i2"])),
            set(&["+g()∘f(i1,i2)", "+g(i1,i2)∘f()", "+g(i1)∘f(i2)", "−g(i2−1)∘f(i1)"])
        );
    }

    #[test]
    fn homotopy_low_arities() {
        assert_eq!(homotopy_relation(0).to_string(), "+f() −g()");
        assert_eq!(homotopy_relation(1).term_set(&names(&["i"])), set(&["+f(i)", "−g(i)", "−∂(i)∘h()", "−h()∘∂(i)"]));
    }

    #[test]
    fn concrete_rendering() {
        let t = IndexTuple::new(vec![0, 2]).unwrap();
        assert_eq!(face_relation(2).render_concrete(&t), "+∂(1)∘∂(0) −∂(0)∘∂(2)");
    }

    /// Strict simplicial faces on a "simplex" module: X_n has basis the
    /// (n+1)-subsets... kept tiny: X_n = K^{n+1}, ∂_i deletes coordinate i.
    fn strict_module(ring: RingSpec, top: usize) -> (GradedMap, ComponentFamily) {
        let w = TruncationWindow::new(top, 0, 0).unwrap();
        let dims: BTreeMap<_, _> = (0..=top).map(|n| ((n, 0), n + 1)).collect();
        let x = Arc::new(FreeBigradedModule::new(w, dims).unwrap());
        let d = GradedMap::zero(x.clone(), x.clone(), (0, -1), ring);
        let mut faces = ComponentFamily::new(FamilyKind::Face, x.clone(), x.clone(), ring);
        for n in 1..=top {
            for i in 0..=n {
                // basis e_0..e_n; ∂_i e_j = e_j (j<i), e_{j−1} (j>i), e_i ↦ e_{i} clipped
                let trip = (0..=n).map(|j| {
                    let r = if j <= i { j.min(n - 1) } else { j - 1 };
                    (r, j, ring.one())
                });
                let m = SparseMatrix::from_triplets(ring, n, n + 1, trip).unwrap();
                let mut g = GradedMap::zero(x.clone(), x.clone(), (-1, 0), ring);
                g.set_block((n, 0), m).unwrap();
                faces.insert(n, IndexTuple::new(vec![i]).unwrap(), g).unwrap();
            }
        }
        (d, faces)
    }

    #[test]
    fn strict_faces_pass_and_planted_defect_is_localized() {
        let ring = RingSpec::PrimeField(5);
        let (d, faces) = strict_module(ring, 3);
        let rep = verify_finfty(&d, &faces).unwrap();
        assert!(rep.passed(), "{rep}");
        // zero faces pass as well
        let zero = ComponentFamily::new(FamilyKind::Face, faces.source().clone(), faces.target().clone(), ring);
        assert!(verify_finfty(&d, &zero).unwrap().passed());
        // break ∂_0 at level 2: only k = 2 relations at levels 2 and 3 see it
        let mut broken = faces.clone();
        let t0 = IndexTuple::new(vec![0]).unwrap();
        let mut g = broken.get(2, &t0).unwrap().clone();
        let m = g.block_or_zero((2, 0));
        let m2 = m.add(&SparseMatrix::from_triplets(ring, 2, 3, vec![(0, 1, ring.one())]).unwrap()).unwrap();
        g.set_block((2, 0), m2).unwrap();
        broken.insert(2, t0, g).unwrap();
        let rep = verify_finfty(&d, &broken).unwrap();
        assert!(!rep.passed());
        for v in &rep.violations {
            assert!(matches!(v.level, Some(2) | Some(3)));
            assert_eq!(v.tuple.as_ref().unwrap().len(), 2);
        }
    }

    #[test]
    fn simplicial_identity_as_matrix_product() {
        let ring = RingSpec::Rationals;
        let (_, faces) = strict_module(ring, 2);
        let b = Bindings { source_faces: Some(&faces), target_faces: Some(&faces), ..Default::default() };
        let expr = FormalExpression::build(
            RelationKind::Face,
            2,
            vec![pair(
                1,
                SymbolKind::Face,
                vec![Slot { pos: 0, shift: 0 }],
                SymbolKind::Face,
                vec![Slot { pos: 1, shift: 0 }],
            )],
        );
        let t = IndexTuple::new(vec![0, 1]).unwrap();
        let got = evaluate_expression(&expr, &b, &t, 2).unwrap();
        let want = GradedMap::compose(
            faces.get(1, &IndexTuple::new(vec![0]).unwrap()).unwrap(),
            faces.get(2, &IndexTuple::new(vec![1]).unwrap()).unwrap(),
        )
        .unwrap();
        assert!(got.equals(&want));
        // the full k = 2 relation evaluates to ∂_{j−1}∂_i − ∂_i∂_j = 0
        assert!(evaluate_expression(&face_relation(2), &b, &t, 2).unwrap().is_zero());
        // empty expression is the zero map
        assert!(evaluate_expression(&face_relation(1), &b, &IndexTuple::new(vec![0]).unwrap(), 2).unwrap().is_zero());
        // missing binding
        let nb = Bindings { source_faces: Some(&faces), ..Default::default() };
        assert!(matches!(evaluate_expression(&face_relation(2), &nb, &t, 2), Err(Error::MissingBinding(_))));
    }
}
