//! The tensor dihedral module M(A) = {A^{⊗(n+1)}} of an involutive
//! A∞-algebra, and the morphisms M(f) and homotopies M(h) induced by
//! A∞-morphisms and homotopies.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::ainfty::{
    add_term, eval_pieces, lin, verify_ainfty, verify_ainfty_homotopy, verify_ainfty_morphism, verify_involution,
    AInftyAlgebra, AInftyHomotopy, AInftyMorphism, MultiMap, Piece, TVec,
};
use crate::dihedral::{compose_df, DFHomotopy, DFModule, DFMorphism};
use crate::error::{Error, Result};
use crate::exactlin::{RingSpec, TripletBuilder};
use crate::graded::{ComponentFamily, FamilyKind, FreeBigradedModule, GradedMap, IndexTuple, TruncationWindow};
use crate::report::Report;

/// Basis of M(A)_{n,m}: tuples (a₀,…,a_n) of generators with Σ|a_i| = m,
/// lexicographic per (n, m).
#[derive(Clone, Debug)]
pub struct TensorBasis {
    pub elements: BTreeMap<(usize, i64), Vec<Vec<usize>>>,
    index: HashMap<Vec<usize>, usize>,
}

impl TensorBasis {
    pub fn new(alg: &AInftyAlgebra, max_level: usize) -> Self {
        let mut elements: BTreeMap<(usize, i64), Vec<Vec<usize>>> = BTreeMap::new();
        let top = (max_level as i64 + 1) * alg.max_degree();
        for n in 0..=max_level {
            for t in alg.inputs(n + 1, top) {
                elements.entry((n, alg.tuple_degree(&t))).or_default().push(t);
            }
        }
        let mut index = HashMap::new();
        for v in elements.values() {
            for (i, t) in v.iter().enumerate() {
                index.insert(t.clone(), i);
            }
        }
        TensorBasis { elements, index }
    }

    /// Position of a tuple inside its (n, m) block.
    pub fn position(&self, t: &[usize]) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn at(&self, n: usize, m: i64) -> &[Vec<usize>] {
        self.elements.get(&(n, m)).map_or(&[], |v| v.as_slice())
    }
}

/// M(A) together with its basis bookkeeping.
#[derive(Clone, Debug)]
pub struct TensorModule {
    pub algebra: Arc<AInftyAlgebra>,
    pub basis: TensorBasis,
    pub df: Arc<DFModule>,
}

impl TensorModule {
    pub fn max_level(&self) -> usize {
        self.df.max_level()
    }

    pub fn carrier(&self) -> &Arc<FreeBigradedModule> {
        &self.df.carrier
    }
}

/// How a tuple enters the face family of M(A).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceCase {
    /// (j, …, j+k−1) with j ≤ n − k: 1^{⊗j}⊗π_{k−1}⊗1^{⊗(n−k−j)}.
    Block { j: usize },
    /// (0, …, k−q−1, n−q+1, …, n): ∂_{(0..k−1)} t^q.
    Rotated { q: usize },
    /// Every other tuple: zero.
    Annihilated,
}

/// Decomposition of a tuple into maximal runs of consecutive entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TupleShape {
    /// i_k < n: runs of lengths n₁..n_s, separated by k₁..k_{s+1} untouched
    /// positions; γ = Σ n_i(n_{i+1}+…+n_s).
    Interior { runs: Vec<(usize, usize)>, ns: Vec<usize>, ks: Vec<usize>, gamma: usize },
    /// i_k = n: a suffix run of length q ending at n, an optional prefix run
    /// starting at 0, and middle runs; z = prefix + q. `rebased` is the
    /// interior tuple (0..z−1) followed by the middle runs shifted by q.
    Wraparound { prefix: usize, q: usize, z: usize, middle: Vec<(usize, usize)>, rebased: IndexTuple },
}

impl TupleShape {
    /// Number of middle runs (wraparound) or runs (interior).
    pub fn s(&self) -> usize {
        match self {
            TupleShape::Interior { runs, .. } => runs.len(),
            TupleShape::Wraparound { middle, .. } => middle.len(),
        }
    }

    /// Regenerates the tuple at level n.
    pub fn to_tuple(&self, n: usize) -> IndexTuple {
        let mut v = Vec::new();
        let push_runs = |v: &mut Vec<usize>, runs: &[(usize, usize)]| {
            for &(a, l) in runs {
                v.extend(a..a + l);
            }
        };
        match self {
            TupleShape::Interior { runs, .. } => push_runs(&mut v, runs),
            TupleShape::Wraparound { prefix, q, middle, .. } => {
                v.extend(0..*prefix);
                push_runs(&mut v, middle);
                v.extend(n + 1 - q..=n);
            }
        }
        IndexTuple::new(v).expect("runs are increasing")
    }
}

fn runs(t: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &i in t {
        match out.last_mut() {
            Some((a, l)) if *a + *l == i => *l += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

fn check_level(tuple: &IndexTuple, n: usize) -> Result<()> {
    if tuple.len() > n || tuple.last().is_some_and(|l| l > n) {
        return Err(Error::Tuple(format!("{tuple} is not a valid tuple at level {n}")));
    }
    Ok(())
}

pub fn classify_tuple(tuple: &IndexTuple, n: usize) -> Result<TupleShape> {
    check_level(tuple, n)?;
    let k = tuple.len();
    let rs = runs(tuple.as_slice());
    if tuple.last().is_none_or(|l| l < n) {
        let ns: Vec<usize> = rs.iter().map(|r| r.1).collect();
        let mut ks = Vec::with_capacity(rs.len() + 1);
        if let Some(first) = rs.first() {
            ks.push(first.0);
        }
        for w in rs.windows(2) {
            ks.push(w[1].0 - (w[0].0 + w[0].1 - 1) - 2);
        }
        ks.push(n + 1 - ks.iter().sum::<usize>() - k - rs.len());
        let gamma = (0..ns.len()).map(|i| ns[i] * ns[i + 1..].iter().sum::<usize>()).sum();
        return Ok(TupleShape::Interior { runs: rs, ns, ks, gamma });
    }
    let q = rs.last().unwrap().1;
    let mut middle: Vec<(usize, usize)> = rs[..rs.len() - 1].to_vec();
    let mut prefix = 0;
    if middle.first().is_some_and(|r| r.0 == 0) {
        prefix = middle.remove(0).1;
    }
    let z = prefix + q;
    let mut v: Vec<usize> = (0..z).collect();
    for &(a, l) in &middle {
        v.extend(a + q..a + q + l);
    }
    Ok(TupleShape::Wraparound { prefix, q, z, middle, rebased: IndexTuple::new(v)? })
}

pub fn face_case(tuple: &IndexTuple, n: usize) -> FaceCase {
    let k = tuple.len();
    let t = tuple.as_slice();
    if k == 0 || k > n {
        return FaceCase::Annihilated;
    }
    let j = t[0];
    if t.iter().enumerate().all(|(a, &i)| i == j + a) && j + k <= n {
        return FaceCase::Block { j };
    }
    for q in 1..=k {
        if t[..k - q].iter().enumerate().all(|(a, &i)| i == a)
            && t[k - q..].iter().enumerate().all(|(a, &i)| i == n + 1 - q + a)
        {
            return FaceCase::Rotated { q };
        }
    }
    FaceCase::Annihilated
}

/// t(a₀⊗…⊗a_n) = (−1)^{|a_n|(|a₀|+…+|a_{n−1}|)} a_n⊗a₀⊗…⊗a_{n−1}.
pub fn rotate(alg: &AInftyAlgebra, vec: &TVec) -> TVec {
    let ring = alg.ring;
    let mut acc = TVec::new();
    for (t, c) in vec {
        let n = t.len() - 1;
        let e = alg.degree(t[n]) * alg.tuple_degree(&t[..n]);
        let mut nt = Vec::with_capacity(t.len());
        nt.push(t[n]);
        nt.extend_from_slice(&t[..n]);
        add_term(ring, &mut acc, nt, &ring.mul(c, &ring.sign(e)));
    }
    acc
}

fn rotate_pow(alg: &AInftyAlgebra, vec: TVec, q: usize) -> TVec {
    let mut v = vec;
    for _ in 0..q {
        v = rotate(alg, &v);
    }
    v
}

/// r(a₀⊗…⊗a_n) = (−1)^{Σ_{0<i<j}|a_i||a_j|} a₀*⊗a_n*⊗…⊗a₁*.
pub fn reflect(alg: &AInftyAlgebra, vec: &TVec) -> TVec {
    let ring = alg.ring;
    let mut acc = TVec::new();
    for (t, c) in vec {
        let n = t.len() - 1;
        let mut e = 0;
        for i in 1..=n {
            for j in i + 1..=n {
                e += alg.degree(t[i]) * alg.degree(t[j]);
            }
        }
        let mut seq = vec![t[0]];
        seq.extend(t[1..].iter().rev());
        let starred = alg.star_each(&[(seq, ring.mul(c, &ring.sign(e)))].into_iter().collect());
        lin(ring, &mut acc, &starred, &ring.one());
    }
    acc
}

fn unit(ring: RingSpec, t: &[usize]) -> TVec {
    [(t.to_vec(), ring.one())].into_iter().collect()
}

/// ∂_I on a basis tensor of level n.
pub fn face_apply(alg: &AInftyAlgebra, tuple: &IndexTuple, t: &[usize]) -> TVec {
    let ring = alg.ring;
    let n = t.len() - 1;
    let k = tuple.len();
    match face_case(tuple, n) {
        FaceCase::Annihilated => TVec::new(),
        FaceCase::Block { j } => {
            let mut pieces = vec![Piece::Id; j];
            pieces.push(Piece::Map { map: alg.op(k - 1), arity: k + 1, degree: k as i64 - 1 });
            pieces.extend(std::iter::repeat_n(Piece::Id, n - k - j));
            let p = alg.tuple_degree(t);
            let s = ring.sign(k as i64 * (p - 1));
            eval_pieces(alg, &pieces, t).into_iter().map(|(kk, c)| (kk, ring.mul(&c, &s))).collect()
        }
        FaceCase::Rotated { q } => {
            let base = IndexTuple::range(0, k);
            let mut acc = TVec::new();
            for (x, c) in rotate_pow(alg, unit(ring, t), q) {
                lin(ring, &mut acc, &face_apply(alg, &base, &x), &c);
            }
            acc.into_iter().map(|(kk, c)| (kk, ring.mul(&c, &ring.sign((q * (k - 1)) as i64)))).collect()
        }
    }
}

/// Assembles the level-n block map of a tensor-defined operator.
fn level_map(
    src: &TensorBasis,
    src_mod: &Arc<FreeBigradedModule>,
    tgt: &TensorBasis,
    tgt_mod: &Arc<FreeBigradedModule>,
    ring: RingSpec,
    bidegree: (i64, i64),
    n: usize,
    eval: impl Fn(&[usize]) -> TVec,
) -> Result<GradedMap> {
    let mut out = GradedMap::zero(src_mod.clone(), tgt_mod.clone(), bidegree, ring);
    let Some(tn) = n.checked_add_signed(bidegree.0 as isize) else { return Ok(out) };
    for (m, _) in src_mod.level(n) {
        let cols = src.at(n, m);
        let tm = m + bidegree.1;
        let rows = tgt.at(tn, tm).len();
        let mut b = TripletBuilder::new(ring, rows, cols.len());
        for (c, x) in cols.iter().enumerate() {
            for (y, v) in eval(x) {
                let r = tgt.position(&y).filter(|_| y.len() == tn + 1).ok_or_else(|| {
                    Error::Dimension(format!("tensor operator produced {y:?} outside the expected block"))
                })?;
                if tgt.at(tn, tm).get(r) != Some(&y) {
                    return Err(Error::Dimension(format!("tensor operator produced {y:?} of the wrong degree")));
                }
                b.push(r, c, v);
            }
        }
        out.set_block((n, m), b.build())?;
    }
    Ok(out)
}

/// M(A) without checking the A∞ relations (used to plant defects).
pub fn build_tensor_df_unchecked(alg: &Arc<AInftyAlgebra>, max_level: usize) -> Result<TensorModule> {
    let ring = alg.ring;
    let basis = TensorBasis::new(alg, max_level);
    let top = (max_level as i64 + 1) * alg.max_degree();
    let window = TruncationWindow::new(max_level, 0, top)?;
    let dims = basis.elements.iter().map(|(b, v)| (*b, v.len())).collect();
    let labels = basis
        .elements
        .iter()
        .map(|(b, v)| {
            let names = v
                .iter()
                .map(|t| t.iter().map(|&a| alg.generators[a].name.as_str()).collect::<Vec<_>>().join("⊗"))
                .collect();
            (*b, names)
        })
        .collect();
    let x = Arc::new(FreeBigradedModule::new(window, dims)?.with_labels(labels)?);
    let mut d = GradedMap::zero(x.clone(), x.clone(), (0, -1), ring);
    let mut t = GradedMap::zero(x.clone(), x.clone(), (0, 0), ring);
    let mut r = GradedMap::zero(x.clone(), x.clone(), (0, 0), ring);
    let mut faces = ComponentFamily::new(FamilyKind::Face, x.clone(), x.clone(), ring);
    for n in 0..=max_level {
        let add = |acc: &mut GradedMap, m: GradedMap| -> Result<()> { acc.add_assign_scaled(&m, &ring.one()) };
        add(&mut d, level_map(&basis, &x, &basis, &x, ring, (0, -1), n, |v| alg.tensor_d(&unit(ring, v)))?)?;
        add(&mut t, level_map(&basis, &x, &basis, &x, ring, (0, 0), n, |v| rotate(alg, &unit(ring, v)))?)?;
        add(&mut r, level_map(&basis, &x, &basis, &x, ring, (0, 0), n, |v| reflect(alg, &unit(ring, v)))?)?;
        for k in 1..=n {
            for tuple in IndexTuple::all_of_size(n, k) {
                if face_case(&tuple, n) == FaceCase::Annihilated || alg.op(k - 1).is_none() {
                    continue;
                }
                let bd = FamilyKind::Face.bidegree(k);
                let m = level_map(&basis, &x, &basis, &x, ring, bd, n, |v| face_apply(alg, &tuple, v))?;
                faces.insert(n, tuple, m)?;
            }
        }
    }
    let df = DFModule::new(x, ring, d, faces, t, r)?;
    Ok(TensorModule { algebra: alg.clone(), basis, df: Arc::new(df) })
}

fn require(report: Report) -> Result<()> {
    if report.passed() {
        Ok(())
    } else {
        Err(Error::Unverified(report.to_string()))
    }
}

/// M(A) for a verified involutive A∞-algebra, levels 0..=max_level and all
/// internal degrees that occur.
pub fn build_tensor_df(alg: &Arc<AInftyAlgebra>, max_level: usize) -> Result<TensorModule> {
    require(verify_ainfty(alg)?)?;
    require(verify_involution(alg)?)?;
    build_tensor_df_unchecked(alg, max_level)
}

fn morph_piece(f: &AInftyMorphism, n: usize) -> Piece<'_> {
    Piece::Map { map: f.component(n), arity: n + 1, degree: n as i64 }
}

/// M(f)_I on a basis tensor.
pub fn induced_morphism_apply(f: &AInftyMorphism, tuple: &IndexTuple, t: &[usize]) -> Result<TVec> {
    let src = &*f.source;
    let ring = src.ring;
    let n = t.len() - 1;
    let k = tuple.len();
    match classify_tuple(tuple, n)? {
        TupleShape::Wraparound { q, rebased, .. } => {
            let mut acc = TVec::new();
            for (x, c) in rotate_pow(src, unit(ring, t), q) {
                lin(ring, &mut acc, &induced_morphism_apply(f, &rebased, &x)?, &c);
            }
            let s = ring.sign((q * (k.max(1) - 1)) as i64);
            Ok(acc.into_iter().map(|(kk, c)| (kk, ring.mul(&c, &s))).collect())
        }
        TupleShape::Interior { ns, ks, gamma, .. } => {
            let mut pieces = Vec::new();
            for i in 0..ns.len() {
                pieces.extend(std::iter::repeat_n(morph_piece(f, 0), ks[i]));
                pieces.push(morph_piece(f, ns[i]));
            }
            pieces.extend(std::iter::repeat_n(morph_piece(f, 0), ks[ns.len()]));
            let p = src.tuple_degree(t);
            let s = ring.sign(k as i64 * (p - 1) + gamma as i64);
            Ok(eval_pieces(src, &pieces, t).into_iter().map(|(kk, c)| (kk, ring.mul(&c, &s))).collect())
        }
    }
}

fn homotopy_piece(h: &AInftyHomotopy, n: usize) -> Piece<'_> {
    Piece::Map { map: h.component(n), arity: n + 1, degree: n as i64 + 1 }
}

/// M(h)_I on a basis tensor: staircases g…g h f…f over the runs and over the
/// untouched positions.
pub fn induced_homotopy_apply(h: &AInftyHomotopy, tuple: &IndexTuple, t: &[usize]) -> Result<TVec> {
    let src = &*h.f.source;
    let ring = src.ring;
    let n = t.len() - 1;
    let k = tuple.len();
    match classify_tuple(tuple, n)? {
        TupleShape::Wraparound { q, rebased, .. } => {
            let mut acc = TVec::new();
            for (x, c) in rotate_pow(src, unit(ring, t), q) {
                lin(ring, &mut acc, &induced_homotopy_apply(h, &rebased, &x)?, &c);
            }
            let s = ring.sign((q * (k.max(1) - 1)) as i64);
            Ok(acc.into_iter().map(|(kk, c)| (kk, ring.mul(&c, &s))).collect())
        }
        TupleShape::Interior { ns, ks, gamma, .. } => {
            let s = ns.len();
            let (f, g) = (&h.f, &h.g);
            let mut total = TVec::new();
            // h on the i-th run
            for i in 0..s {
                let mut pieces = Vec::new();
                for a in 0..s {
                    let mp = if a < i { g } else { f };
                    pieces.extend(std::iter::repeat_n(morph_piece(mp, 0), ks[a]));
                    pieces.push(if a == i { homotopy_piece(h, ns[a]) } else { morph_piece(mp, ns[a]) });
                }
                pieces.extend(std::iter::repeat_n(morph_piece(f, 0), ks[s]));
                let sg = ring.sign(ns[..i].iter().sum::<usize>() as i64);
                lin(ring, &mut total, &eval_pieces(src, &pieces, t), &sg);
            }
            // h₀ on the j-th untouched position of the i-th gap
            for i in 0..=s {
                for j in 1..=ks[i] {
                    let mut pieces = Vec::new();
                    for a in 0..=s {
                        let mp = if a < i { g } else { f };
                        if a == i {
                            pieces.extend(std::iter::repeat_n(morph_piece(g, 0), j - 1));
                            pieces.push(homotopy_piece(h, 0));
                            pieces.extend(std::iter::repeat_n(morph_piece(f, 0), ks[i] - j));
                        } else {
                            pieces.extend(std::iter::repeat_n(morph_piece(mp, 0), ks[a]));
                        }
                        if a < s {
                            pieces.push(morph_piece(mp, ns[a]));
                        }
                    }
                    let sg = ring.sign(ns[..i].iter().sum::<usize>() as i64);
                    lin(ring, &mut total, &eval_pieces(src, &pieces, t), &sg);
                }
            }
            let p = src.tuple_degree(t);
            let sg = ring.sign(k as i64 * (p - 1) + gamma as i64);
            Ok(total.into_iter().map(|(kk, c)| (kk, ring.mul(&c, &sg))).collect())
        }
    }
}

fn check_same_algebra(m: &TensorModule, a: &Arc<AInftyAlgebra>, what: &str) -> Result<()> {
    if !Arc::ptr_eq(&m.algebra, a) && m.algebra.generators != a.generators {
        return Err(Error::Incompatible(format!("{what} is not the tensor module of the given algebra")));
    }
    Ok(())
}

fn induced_family(
    kind: FamilyKind,
    src: &TensorModule,
    tgt: &TensorModule,
    support: impl Fn(&IndexTuple, usize) -> Result<bool>,
    apply: impl Fn(&IndexTuple, &[usize]) -> Result<TVec>,
) -> Result<ComponentFamily> {
    let ring = src.algebra.ring;
    let mut fam = ComponentFamily::new(kind, src.carrier().clone(), tgt.carrier().clone(), ring);
    let top = src.max_level().min(tgt.max_level());
    for n in 0..=top {
        for k in 0..=n {
            for tuple in IndexTuple::all_of_size(n, k) {
                if !support(&tuple, n)? {
                    continue;
                }
                let err = std::cell::RefCell::new(None);
                let m =
                    level_map(&src.basis, src.carrier(), &tgt.basis, tgt.carrier(), ring, kind.bidegree(k), n, |x| {
                        apply(&tuple, x).unwrap_or_else(|e| {
                            *err.borrow_mut() = Some(e);
                            TVec::new()
                        })
                    })?;
                if let Some(e) = err.into_inner() {
                    return Err(e);
                }
                fam.insert(n, tuple, m)?;
            }
        }
    }
    Ok(fam)
}

/// False when M(f)_I vanishes because it needs a zero component of f.
fn morphism_support(f: &AInftyMorphism, tuple: &IndexTuple, n: usize) -> Result<bool> {
    let shape = match classify_tuple(tuple, n)? {
        TupleShape::Wraparound { rebased, .. } => classify_tuple(&rebased, n)?,
        s => s,
    };
    Ok(match shape {
        TupleShape::Interior { ns, ks, .. } => {
            ns.iter().all(|&m| f.component(m).is_some()) && (ks.iter().all(|&k| k == 0) || f.component(0).is_some())
        }
        TupleShape::Wraparound { .. } => true,
    })
}

/// M(f) without verifying f.
pub fn induce_df_morphism_unchecked(f: &AInftyMorphism, src: &TensorModule, tgt: &TensorModule) -> Result<DFMorphism> {
    check_same_algebra(src, &f.source, "source")?;
    check_same_algebra(tgt, &f.target, "target")?;
    let fam = induced_family(
        FamilyKind::Morphism,
        src,
        tgt,
        |tuple, n| morphism_support(f, tuple, n),
        |tuple, x| induced_morphism_apply(f, tuple, x),
    )?;
    DFMorphism::new(src.df.clone(), tgt.df.clone(), fam)
}

/// M(f) for a verified involutive A∞-morphism.
pub fn induce_df_morphism(f: &AInftyMorphism, src: &TensorModule, tgt: &TensorModule) -> Result<DFMorphism> {
    require(verify_ainfty_morphism(f)?)?;
    induce_df_morphism_unchecked(f, src, tgt)
}

/// M(h) : M(f) ⇒ M(g) for a verified A∞-homotopy.
pub fn induce_df_homotopy(h: &AInftyHomotopy, src: &TensorModule, tgt: &TensorModule) -> Result<DFHomotopy> {
    require(verify_ainfty_homotopy(h)?)?;
    let mf = induce_df_morphism_unchecked(&h.f, src, tgt)?;
    let mg = induce_df_morphism_unchecked(&h.g, src, tgt)?;
    let fam = induced_family(
        FamilyKind::Homotopy,
        src,
        tgt,
        |_, _| Ok(true),
        |tuple, x| induced_homotopy_apply(h, tuple, x),
    )?;
    DFHomotopy::new(mf, mg, fam)
}

/// Componentwise comparison of M(gf) with M(g)∘M(f).
pub fn functoriality_check(
    f: &AInftyMorphism,
    g: &AInftyMorphism,
    ma: &TensorModule,
    mb: &TensorModule,
    mc: &TensorModule,
) -> Result<Report> {
    let mut report = Report::new("tensor functoriality");
    let gf = crate::ainfty::compose_ainfty(g, f)?;
    let lhs = induce_df_morphism_unchecked(&gf, ma, mc)?;
    let rhs = compose_df(&induce_df_morphism_unchecked(g, mb, mc)?, &induce_df_morphism_unchecked(f, ma, mb)?)?;
    report.checks = lhs.components.entries().len().max(rhs.components.entries().len());
    for (n, tuple) in lhs.components.differences(&rhs.components) {
        report.violation("functoriality", Some(n as i64), Some(&tuple), None, "M(gf) differs from M(g)M(f)");
    }
    Ok(report)
}

/// Multilinear map helper for tests and fixtures: φ given by a closure on
/// input tuples.
pub fn multimap_from(alg: &AInftyAlgebra, arity: usize, max_deg: i64, f: impl Fn(&[usize]) -> TVec) -> MultiMap {
    let mut out = MultiMap::new();
    for t in alg.inputs(arity, max_deg) {
        let v: BTreeMap<usize, _> = f(&t).into_iter().map(|(k, c)| (k[0], c)).collect();
        if !v.is_empty() {
            out.insert(t, v);
        }
    }
    out
}
