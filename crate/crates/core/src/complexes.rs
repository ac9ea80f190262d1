//! D-differential modules d_q^k, the folded complexes (X̄, b) and (X̄, b′),
//! the operators T̄, N̄, R̄, the bicomplex C(X̄) with its ℤ₂-action ϑ, the
//! triple complex D(X̄), totalization, induced maps and homology.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::dihedral::{verify_df_homotopy, verify_df_morphism, DFHomotopy, DFModule, DFMorphism};
use crate::error::{Error, Result};
use crate::exactlin::{
    rank, smith_normal_form, sparse_kernel_basis, FieldEchelon, RingSpec, Scalar, SparseMatrix, TripletBuilder,
};
use crate::graded::{sign, Bidegree, ComponentFamily, FreeBigradedModule, GradedMap};
use crate::report::Report;

/// A family d⁰, d¹, … with d^i of bidegree (−i, i−1).
#[derive(Clone, Debug)]
pub struct DModule {
    pub carrier: Arc<FreeBigradedModule>,
    pub ring: RingSpec,
    pub q: usize,
    pub family: Vec<GradedMap>,
}

/// Σ_{I ⊂ [0, n−q], |I| = k} (−1)^{ΣI} φ_I, grouped by k.
fn signed_sums(fam: &ComponentFamily, q: usize, kmax: usize) -> Result<Vec<GradedMap>> {
    let ring = fam.ring();
    let mut out: Vec<GradedMap> = (0..=kmax).map(|k| fam.zero_component(k)).collect();
    for ((n, tuple), map) in fam.entries() {
        if tuple.last().is_some_and(|l| l + q > *n) || tuple.len() > kmax {
            continue;
        }
        out[tuple.len()].add_assign_scaled(map, &sign(ring, tuple.sum() as i64))?;
    }
    Ok(out)
}

/// d_q^0 = d, d_q^k = Σ_{0≤i₁<…<i_k≤n−q} (−1)^{i₁+…+i_k} ∂_{(i₁,…,i_k)}.
pub fn build_d_family(x: &DFModule, q: usize) -> Result<DModule> {
    if q > 1 {
        return Err(Error::Window(format!("only q = 0 and q = 1 are supported, got {q}")));
    }
    let mut family = signed_sums(&x.faces, q, x.max_level())?;
    family[0] = x.d.clone();
    Ok(DModule { carrier: x.carrier.clone(), ring: x.ring, q, family })
}

/// Σ_{i+j=k} d^i d^j = 0 for every k the window can see.
pub fn verify_d_module(dm: &DModule) -> Result<Report> {
    let mut report = Report::new(format!("D-module (q = {})", dm.q));
    let top = dm.family.len() - 1;
    for k in 0..=2 * top {
        let mut acc: Option<GradedMap> = None;
        for i in k.saturating_sub(top)..=k.min(top) {
            let c = GradedMap::compose(&dm.family[i], &dm.family[k - i])?;
            match &mut acc {
                None => acc = Some(c),
                Some(a) => a.add_assign_scaled(&c, &dm.ring.one())?,
            }
        }
        report.checks += 1;
        if let Some(a) = acc {
            for b in a.blocks().keys() {
                report.violation(
                    "d-module",
                    Some(b.0 as i64),
                    None,
                    Some(*b),
                    format!("Σ d^i d^j ≠ 0 for i + j = {k}"),
                );
            }
        }
    }
    Ok(report)
}

/// X̄_s = ⊕_{p+q=s} X_{p,q}: the nonzero cells of each folded degree with
/// their offsets, p ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldedLayout {
    cells: Vec<Vec<(Bidegree, usize)>>,
    dims: Vec<usize>,
}

impl FoldedLayout {
    /// Folded degrees 0..=top; requires top ≤ the module's level bound.
    pub fn new(module: &FreeBigradedModule, top: usize) -> Result<Self> {
        if top > module.max_level() {
            return Err(Error::Window(format!(
                "folded degree {top} needs levels beyond the truncation N = {}",
                module.max_level()
            )));
        }
        let mut cells = Vec::with_capacity(top + 1);
        let mut dims = Vec::with_capacity(top + 1);
        for s in 0..=top {
            let mut off = 0;
            let mut row = Vec::new();
            for p in 0..=s {
                let b = (p, (s - p) as i64);
                let d = module.dim(b);
                if d > 0 {
                    row.push((b, off));
                    off += d;
                }
            }
            cells.push(row);
            dims.push(off);
        }
        Ok(FoldedLayout { cells, dims })
    }

    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dim(&self, s: usize) -> usize {
        self.dims.get(s).copied().unwrap_or(0)
    }

    pub fn cells(&self, s: usize) -> &[(Bidegree, usize)] {
        self.cells.get(s).map_or(&[], |v| v.as_slice())
    }

    fn offset(&self, s: usize, b: Bidegree) -> Option<usize> {
        self.cells(s).iter().find(|c| c.0 == b).map(|c| c.1)
    }
}

/// The matrix X̄_s → Ȳ_{s+Δ} of a sum of graded maps of total degree Δ.
pub fn fold_at(maps: &[&GradedMap], src: &FoldedLayout, tgt: &FoldedLayout, s: usize) -> Result<SparseMatrix> {
    let ring = maps.first().map(|m| m.ring()).ok_or_else(|| Error::Dimension("nothing to fold".into()))?;
    let delta = maps[0].bidegree().0 + maps[0].bidegree().1;
    if maps.iter().any(|m| m.bidegree().0 + m.bidegree().1 != delta) {
        return Err(Error::Dimension("folded maps must share their total degree".into()));
    }
    let ts = s as i64 + delta;
    if ts < 0 || ts as usize > tgt.top() {
        return Ok(SparseMatrix::zero(ring, 0, src.dim(s)));
    }
    let ts = ts as usize;
    let mut tb = TripletBuilder::new(ring, tgt.dim(ts), src.dim(s));
    for &(b, co) in src.cells(s) {
        for m in maps {
            let Some(block) = m.block(b) else { continue };
            let Some(tbd) = m.target_of(b) else { continue };
            let ro = tgt
                .offset(ts, tbd)
                .ok_or_else(|| Error::Dimension(format!("folded target cell {tbd:?} is missing")))?;
            tb.push_block(ro, co, block, &ring.one());
        }
    }
    Ok(tb.build())
}

/// (X̄, d̄) with d̄ = Σ d^i; `differential[s]` maps X̄_s → X̄_{s−1}.
#[derive(Clone, Debug)]
pub struct FoldedComplex {
    pub ring: RingSpec,
    pub layout: FoldedLayout,
    pub differential: Vec<SparseMatrix>,
}

pub fn fold(dm: &DModule, top: usize) -> Result<FoldedComplex> {
    let layout = FoldedLayout::new(&dm.carrier, top)?;
    let maps: Vec<&GradedMap> = dm.family.iter().collect();
    let mut differential = vec![SparseMatrix::zero(dm.ring, 0, layout.dim(0))];
    for s in 1..=top {
        differential.push(fold_at(&maps, &layout, &layout, s)?);
    }
    Ok(FoldedComplex { ring: dm.ring, layout, differential })
}

/// d̄² = 0 on every folded degree.
pub fn verify_folded(fc: &FoldedComplex, name: &str) -> Result<Report> {
    let mut report = Report::new(format!("folded complex {name}"));
    for s in 2..fc.differential.len() {
        report.checks += 1;
        if !fc.differential[s - 1].multiply(&fc.differential[s])?.is_zero() {
            report.violation(&format!("{name}-square"), Some(s as i64), None, None, "d̄² ≠ 0");
        }
    }
    Ok(report)
}

/// T̄, N̄, R̄ and R̄T̄ on each folded degree (block diagonal over levels).
#[derive(Clone, Debug)]
pub struct FoldedOperators {
    pub t: Vec<SparseMatrix>,
    pub norm: Vec<SparseMatrix>,
    pub r: Vec<SparseMatrix>,
    pub rt: Vec<SparseMatrix>,
}

pub fn build_operators(x: &DFModule, layout: &FoldedLayout) -> Result<FoldedOperators> {
    let ring = x.ring;
    let mut ops = FoldedOperators { t: vec![], norm: vec![], r: vec![], rt: vec![] };
    for s in 0..=layout.top() {
        let dim = layout.dim(s);
        let mut tb = TripletBuilder::new(ring, dim, dim);
        let mut nb = TripletBuilder::new(ring, dim, dim);
        let mut rb = TripletBuilder::new(ring, dim, dim);
        let mut rtb = TripletBuilder::new(ring, dim, dim);
        for &(b, off) in layout.cells(s) {
            let p = b.0 as i64;
            let k = x.carrier.dim(b);
            let t = x.t.map.block_or_zero(b).scale(&sign(ring, p));
            let r = x.r.map.block_or_zero(b).scale(&sign(ring, p * (p + 1) / 2));
            let mut pow = SparseMatrix::identity(ring, k);
            let mut norm = SparseMatrix::identity(ring, k);
            for _ in 0..p {
                pow = t.multiply(&pow)?;
                norm = norm.add(&pow)?;
            }
            let one = ring.one();
            tb.push_block(off, off, &t, &one);
            nb.push_block(off, off, &norm, &one);
            rb.push_block(off, off, &r, &one);
            rtb.push_block(off, off, &r.multiply(&t)?, &one);
        }
        ops.t.push(tb.build());
        ops.norm.push(nb.build());
        ops.r.push(rb.build());
        ops.rt.push(rtb.build());
    }
    Ok(ops)
}

/// The data of C(X̄) and D(X̄) up to folded degree `top`: b, b′ and the
/// folded operators. Cells C_{n,m} = D_{n,m,l} = X̄_n.
#[derive(Clone, Debug)]
pub struct Bicomplex {
    pub ring: RingSpec,
    pub layout: FoldedLayout,
    pub b: FoldedComplex,
    pub b_prime: FoldedComplex,
    pub ops: FoldedOperators,
    /// Simplicial truncation N of the underlying module.
    pub truncation: usize,
}

pub fn build_bicomplex(x: &DFModule, top: usize) -> Result<Bicomplex> {
    let b = fold(&build_d_family(x, 0)?, top)?;
    let b_prime = fold(&build_d_family(x, 1)?, top)?;
    let ops = build_operators(x, &b.layout)?;
    Ok(Bicomplex { ring: x.ring, layout: b.layout.clone(), b, b_prime, ops, truncation: x.max_level() })
}

impl Bicomplex {
    fn id(&self, n: usize) -> SparseMatrix {
        SparseMatrix::identity(self.ring, self.layout.dim(n))
    }

    /// δ₁ : C_{n,m} → C_{n−1,m}.
    pub fn delta1(&self, n: usize, m: usize) -> SparseMatrix {
        if m.is_multiple_of(2) {
            self.b.differential[n].clone()
        } else {
            self.b_prime.differential[n].neg()
        }
    }

    /// δ₂ : C_{n,m} → C_{n,m−1}, m ≥ 1.
    pub fn delta2(&self, n: usize, m: usize) -> Result<SparseMatrix> {
        if m % 2 == 1 {
            self.id(n).sub(&self.ops.t[n])
        } else {
            Ok(self.ops.norm[n].clone())
        }
    }

    /// ϑ on C_{n,m}: (−1)^k R̄ for m = 2k, (−1)^{k+1} R̄T̄ for m = 2k+1.
    pub fn theta(&self, n: usize, m: usize) -> SparseMatrix {
        let k = (m / 2) as i64;
        if m.is_multiple_of(2) {
            self.ops.r[n].scale(&sign(self.ring, k))
        } else {
            self.ops.rt[n].scale(&sign(self.ring, k + 1))
        }
    }

    /// δ₃ : D_{n,m,l} → D_{n,m,l−1}, l ≥ 1: (−1)^{n+m}(1 + (−1)^l ϑ).
    pub fn delta3(&self, n: usize, m: usize, l: usize) -> Result<SparseMatrix> {
        let ring = self.ring;
        let inner = self.id(n).lin_comb(&ring.one(), &self.theta(n, m), &sign(ring, l as i64))?;
        Ok(inner.scale(&sign(ring, (n + m) as i64)))
    }
}

/// Exact checks of b² = b′² = 0, the relations between b, b′, T̄, N̄, R̄,
/// ϑ² = 1 and the ϑ-equivariance of δ₁, δ₂, on every column pair up to
/// `m_max`.
pub fn verify_bicomplex(bc: &Bicomplex, m_max: usize) -> Result<Report> {
    let mut report = Report::new("bicomplex identities");
    report.absorb(verify_folded(&bc.b, "b")?);
    report.absorb(verify_folded(&bc.b_prime, "b'")?);
    let check = |report: &mut Report, tag: &str, n: usize, ok: bool| {
        report.checks += 1;
        if !ok {
            report.violation(tag, Some(n as i64), None, None, format!("{tag} fails in folded degree {n}"));
        }
    };
    for n in 0..=bc.layout.top() {
        let (t, nn, r, rt) = (&bc.ops.t[n], &bc.ops.norm[n], &bc.ops.r[n], &bc.ops.rt[n]);
        let one_t = bc.id(n).sub(t)?;
        // (1−T̄)(R̄T̄) = −R̄(1−T̄), N̄R̄ = (R̄T̄)N̄
        check(&mut report, "T-RT", n, one_t.multiply(rt)?.add(&r.multiply(&one_t)?)?.is_zero());
        check(&mut report, "N-R", n, nn.multiply(r)?.sub(&rt.multiply(nn)?)?.is_zero());
        // b(1−T̄) = (1−T̄)b′ and b′N̄ = N̄b
        if n >= 1 {
            let one_t_lo = bc.id(n - 1).sub(&bc.ops.t[n - 1])?;
            let (b, bp) = (&bc.b.differential[n], &bc.b_prime.differential[n]);
            check(&mut report, "b-R", n, b.multiply(r)?.sub(&bc.ops.r[n - 1].multiply(b)?)?.is_zero());
            check(&mut report, "b'-RT", n, bp.multiply(rt)?.sub(&bc.ops.rt[n - 1].multiply(bp)?)?.is_zero());
            check(&mut report, "b-T", n, b.multiply(&one_t)?.sub(&one_t_lo.multiply(bp)?)?.is_zero());
            check(&mut report, "b'-N", n, bp.multiply(nn)?.sub(&bc.ops.norm[n - 1].multiply(b)?)?.is_zero());
        }
        for m in 0..=m_max {
            let th = bc.theta(n, m);
            check(&mut report, "theta-square", n, th.multiply(&th)?.sub(&bc.id(n))?.is_zero());
            if n >= 1 {
                let d1 = bc.delta1(n, m);
                let lhs = bc.theta(n - 1, m).multiply(&d1)?;
                check(&mut report, "theta-delta1", n, lhs.sub(&d1.multiply(&th)?)?.is_zero());
                if m >= 1 {
                    let ac =
                        bc.delta1(n, m - 1).multiply(&bc.delta2(n, m)?)?.add(&bc.delta2(n - 1, m)?.multiply(&d1)?)?;
                    check(&mut report, "delta1-delta2", n, ac.is_zero());
                }
            }
            if m >= 1 {
                let d2 = bc.delta2(n, m)?;
                let lhs = bc.theta(n, m - 1).multiply(&d2)?;
                check(&mut report, "theta-delta2", n, lhs.sub(&d2.multiply(&th)?)?.is_zero());
                if m >= 2 {
                    check(&mut report, "delta2-square", n, bc.delta2(n, m - 1)?.multiply(&d2)?.is_zero());
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomologyKind {
    /// Tot C(X̄), cells (n, m, 0).
    Cyclic,
    /// Tot D(X̄), cells (n, m, l).
    Dihedral,
}

impl std::fmt::Display for HomologyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HomologyKind::Cyclic => "cyclic",
            HomologyKind::Dihedral => "dihedral",
        })
    }
}

/// Tot_D = ⊕ cells of total degree D, each a copy of X̄_n.
#[derive(Clone, Debug)]
pub struct TotalComplex {
    pub ring: RingSpec,
    pub kind: HomologyKind,
    pub bicomplex: Bicomplex,
    /// Per total degree: (n, m, l) and offset.
    pub cells: Vec<Vec<((usize, usize, usize), usize)>>,
    pub dims: Vec<usize>,
    /// `differential[D]` : Tot_D → Tot_{D−1}.
    pub differential: Vec<SparseMatrix>,
    /// Largest total degree whose homology is exact despite truncation.
    pub certified_bound: Option<usize>,
}

impl TotalComplex {
    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dim(&self, d: usize) -> usize {
        self.dims.get(d).copied().unwrap_or(0)
    }

    fn offset(&self, d: usize, cell: (usize, usize, usize)) -> Option<usize> {
        self.cells.get(d)?.iter().find(|c| c.0 == cell).map(|c| c.1)
    }
}

/// Totalizes C(X̄) (cyclic) or D(X̄) (dihedral) in degrees 0..=top.
pub fn totalize(bc: &Bicomplex, kind: HomologyKind, top: usize) -> Result<TotalComplex> {
    if top > bc.layout.top() {
        return Err(Error::Window(format!(
            "total degree {top} exceeds the folded degrees built ({})",
            bc.layout.top()
        )));
    }
    let ring = bc.ring;
    let mut cells = Vec::new();
    let mut dims = Vec::new();
    for d in 0..=top {
        let mut row = Vec::new();
        let mut off = 0;
        for n in 0..=d {
            let rest = d - n;
            let ls: Vec<usize> = match kind {
                HomologyKind::Cyclic => vec![0],
                HomologyKind::Dihedral => (0..=rest).collect(),
            };
            for l in ls {
                let m = rest - l;
                if bc.layout.dim(n) > 0 {
                    row.push(((n, m, l), off));
                    off += bc.layout.dim(n);
                }
            }
        }
        cells.push(row);
        dims.push(off);
    }
    let mut total = TotalComplex {
        ring,
        kind,
        bicomplex: bc.clone(),
        cells,
        dims,
        differential: vec![SparseMatrix::zero(ring, 0, 0)],
        certified_bound: None,
    };
    total.differential[0] = SparseMatrix::zero(ring, 0, total.dim(0));
    // precomputed pieces per n
    let mut one_minus_t = Vec::new();
    for n in 0..=top {
        one_minus_t.push(bc.id(n).sub(&bc.ops.t[n])?);
    }
    let one = ring.one();
    for d in 1..=top {
        let mut tb = TripletBuilder::new(ring, total.dim(d - 1), total.dim(d));
        for &((n, m, l), co) in &total.cells[d] {
            if n >= 1 {
                if let Some(ro) = total.offset(d - 1, (n - 1, m, l)) {
                    let blk = &bc.b.differential[n];
                    let c = if m % 2 == 0 { one.clone() } else { ring.neg(&one) };
                    let blk = if m % 2 == 0 { blk } else { &bc.b_prime.differential[n] };
                    tb.push_block(ro, co, blk, &c);
                }
            }
            if m >= 1 {
                if let Some(ro) = total.offset(d - 1, (n, m - 1, l)) {
                    let blk = if m % 2 == 1 { &one_minus_t[n] } else { &bc.ops.norm[n] };
                    tb.push_block(ro, co, blk, &one);
                }
            }
            if l >= 1 {
                if let Some(ro) = total.offset(d - 1, (n, m, l - 1)) {
                    tb.push_block(ro, co, &bc.delta3(n, m, l)?, &one);
                }
            }
        }
        total.differential.push(tb.build());
    }
    total.certified_bound = top.checked_sub(1);
    Ok(total)
}

/// The total complex of X certified through total degree `max_degree`
/// (materializes folded degrees up to max_degree + 1 ≤ N).
pub fn total_complex(x: &DFModule, kind: HomologyKind, max_degree: usize) -> Result<TotalComplex> {
    let top = max_degree + 1;
    if top > x.max_level() {
        return Err(Error::Window(format!(
            "degree {max_degree} is beyond the certified bound N − 1 = {} of truncation N = {}",
            x.max_level() as i64 - 1,
            x.max_level()
        )));
    }
    totalize(&build_bicomplex(x, top)?, kind, top)
}

/// δ̂² = 0 in every materialized degree.
pub fn verify_total(total: &TotalComplex) -> Result<Report> {
    let mut report = Report::new(format!("{} total complex", total.kind));
    for d in 2..=total.top() {
        report.checks += 1;
        if !total.differential[d - 1].multiply(&total.differential[d])?.is_zero() {
            report.violation("total-square", Some(d as i64), None, None, "δ̂² ≠ 0");
        }
    }
    Ok(report)
}

/// Matrices of a map between total complexes, one per source degree,
/// raising degree by `shift`.
#[derive(Clone, Debug)]
pub struct TotalChainMap {
    pub shift: usize,
    pub matrices: Vec<SparseMatrix>,
}

fn induced_total(
    fam: &ComponentFamily,
    src: &TotalComplex,
    tgt: &TotalComplex,
    shift: usize,
    sign_of_column: impl Fn(usize) -> bool,
) -> Result<TotalChainMap> {
    let ring = src.ring;
    let kmax = fam.source().max_level();
    let bars = [signed_sums(fam, 0, kmax)?, signed_sums(fam, 1, kmax)?];
    let refs: Vec<Vec<&GradedMap>> = bars.iter().map(|v| v.iter().collect()).collect();
    let (sl, tl) = (&src.bicomplex.layout, &tgt.bicomplex.layout);
    let mut folded: BTreeMap<(usize, usize), SparseMatrix> = BTreeMap::new();
    let mut matrices = Vec::new();
    for d in 0..=src.top() {
        let td = d + shift;
        if td > tgt.top() {
            break;
        }
        let mut tb = TripletBuilder::new(ring, tgt.dim(td), src.dim(d));
        for &((n, m, l), co) in &src.cells[d] {
            let Some(ro) = tgt.offset(td, (n + shift, m, l)) else { continue };
            let q = m % 2;
            if let std::collections::btree_map::Entry::Vacant(e) = folded.entry((q, n)) {
                e.insert(fold_at(&refs[q], sl, tl, n)?);
            }
            let c = if sign_of_column(m) { ring.from_i64(-1) } else { ring.one() };
            tb.push_block(ro, co, &folded[&(q, n)], &c);
        }
        matrices.push(tb.build());
    }
    Ok(TotalChainMap { shift, matrices })
}

fn check_carriers(fam: &ComponentFamily, src: &TotalComplex, tgt: &TotalComplex) -> Result<()> {
    if src.kind != tgt.kind || src.ring != tgt.ring || fam.ring() != src.ring {
        return Err(Error::Incompatible("total complexes of different kinds or rings".into()));
    }
    Ok(())
}

/// C(f) without verifying f: f̄₀ on even columns, f̄₁ on odd columns.
pub fn induce_bicomplex_map_unchecked(f: &DFMorphism, src: &TotalComplex, tgt: &TotalComplex) -> Result<TotalChainMap> {
    check_carriers(&f.components, src, tgt)?;
    induced_total(&f.components, src, tgt, 0, |_| false)
}

pub fn induce_bicomplex_map(f: &DFMorphism, src: &TotalComplex, tgt: &TotalComplex) -> Result<TotalChainMap> {
    let rep = verify_df_morphism(f)?;
    if !rep.passed() {
        return Err(Error::Unverified(rep.to_string()));
    }
    induce_bicomplex_map_unchecked(f, src, tgt)
}

/// C(h) = (−1)^m h̄_{m mod 2}, raising total degree by one.
pub fn induce_bicomplex_homotopy_unchecked(
    h: &DFHomotopy,
    src: &TotalComplex,
    tgt: &TotalComplex,
) -> Result<TotalChainMap> {
    check_carriers(&h.components, src, tgt)?;
    induced_total(&h.components, src, tgt, 1, |m| m % 2 == 1)
}

pub fn induce_bicomplex_homotopy(h: &DFHomotopy, src: &TotalComplex, tgt: &TotalComplex) -> Result<TotalChainMap> {
    let rep = verify_df_homotopy(h)?;
    if !rep.passed() {
        return Err(Error::Unverified(rep.to_string()));
    }
    induce_bicomplex_homotopy_unchecked(h, src, tgt)
}

/// δ̂ C(f) = C(f) δ̂ in every degree where both sides are materialized.
pub fn verify_chain_map(src: &TotalComplex, tgt: &TotalComplex, f: &TotalChainMap) -> Result<Report> {
    let mut report = Report::new("induced chain map");
    for d in 1..f.matrices.len() {
        report.checks += 1;
        let lhs = tgt.differential[d].multiply(&f.matrices[d])?;
        let rhs = f.matrices[d - 1].multiply(&src.differential[d])?;
        if !lhs.sub(&rhs)?.is_zero() {
            report.violation("chain-map", Some(d as i64), None, None, "δ̂C(f) ≠ C(f)δ̂");
        }
    }
    Ok(report)
}

/// δ̂C(h) + C(h)δ̂ = C(f) − C(g) in degrees d with d + 1 materialized.
pub fn verify_chain_homotopy(
    src: &TotalComplex,
    tgt: &TotalComplex,
    h: &TotalChainMap,
    f: &TotalChainMap,
    g: &TotalChainMap,
) -> Result<Report> {
    let mut report = Report::new("induced chain homotopy");
    for d in 0..h.matrices.len() {
        report.checks += 1;
        let mut lhs = tgt.differential[d + 1].multiply(&h.matrices[d])?;
        if d >= 1 {
            lhs = lhs.add(&h.matrices[d - 1].multiply(&src.differential[d])?)?;
        }
        let rhs = f.matrices[d].sub(&g.matrices[d])?;
        if !lhs.sub(&rhs)?.is_zero() {
            report.violation("chain-homotopy", Some(d as i64), None, None, "δ̂C(h) + C(h)δ̂ ≠ C(f) − C(g)");
        }
    }
    Ok(report)
}

/// Composite of chain maps, degreewise.
pub fn compose_chain_maps(g: &TotalChainMap, f: &TotalChainMap) -> Result<TotalChainMap> {
    let mut matrices = Vec::new();
    for (d, fm) in f.matrices.iter().enumerate() {
        let Some(gm) = g.matrices.get(d + f.shift) else { break };
        matrices.push(gm.multiply(fm)?);
    }
    Ok(TotalChainMap { shift: f.shift + g.shift, matrices })
}

/// f̄₀(1−T̄) = (1−T̄)f̄₁ and f̄₁N̄ = N̄f̄₀, plus f̄₀ b = b f̄₀, f̄₁ b′ = b′ f̄₁
/// and C(f)ϑ = ϑC(f), on every folded degree of the two bicomplexes.
pub fn verify_induced_identities(f: &DFMorphism, src: &Bicomplex, tgt: &Bicomplex, m_max: usize) -> Result<Report> {
    let mut report = Report::new("induced map identities");
    let kmax = f.components.source().max_level();
    let bars = [signed_sums(&f.components, 0, kmax)?, signed_sums(&f.components, 1, kmax)?];
    let top = src.layout.top().min(tgt.layout.top());
    let fold = |q: usize, n: usize| -> Result<SparseMatrix> {
        let refs: Vec<&GradedMap> = bars[q].iter().collect();
        fold_at(&refs, &src.layout, &tgt.layout, n)
    };
    let check = |report: &mut Report, tag: &str, n: usize, ok: bool| {
        report.checks += 1;
        if !ok {
            report.violation(tag, Some(n as i64), None, None, format!("{tag} fails in folded degree {n}"));
        }
    };
    for n in 0..=top {
        let (f0, f1) = (fold(0, n)?, fold(1, n)?);
        let s1 = src.id(n).sub(&src.ops.t[n])?;
        let t1 = tgt.id(n).sub(&tgt.ops.t[n])?;
        check(&mut report, "f-T", n, f0.multiply(&s1)?.sub(&t1.multiply(&f1)?)?.is_zero());
        check(&mut report, "f-N", n, f1.multiply(&src.ops.norm[n])?.sub(&tgt.ops.norm[n].multiply(&f0)?)?.is_zero());
        if n >= 1 {
            let (g0, g1) = (fold(0, n - 1)?, fold(1, n - 1)?);
            let lhs = tgt.b.differential[n].multiply(&f0)?.sub(&g0.multiply(&src.b.differential[n])?)?;
            check(&mut report, "f-b", n, lhs.is_zero());
            let lhs = tgt.b_prime.differential[n].multiply(&f1)?.sub(&g1.multiply(&src.b_prime.differential[n])?)?;
            check(&mut report, "f-b'", n, lhs.is_zero());
        }
        for m in 0..=m_max {
            let fm = if m % 2 == 0 { &f0 } else { &f1 };
            let lhs = fm.multiply(&src.theta(n, m))?.sub(&tgt.theta(n, m).multiply(fm)?)?;
            check(&mut report, "f-theta", n, lhs.is_zero());
        }
    }
    Ok(report)
}

/// Homology in one total degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyDegree {
    pub degree: usize,
    /// Rank of the chain group.
    pub chain_rank: usize,
    /// Betti number (fields) or free rank (ℤ).
    pub rank: usize,
    /// Nontrivial invariant factors (ℤ only), ascending divisibility chain.
    #[serde(serialize_with = "ser_bigints")]
    pub torsion: Vec<BigInt>,
}

fn ser_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyResult {
    pub ring: String,
    pub kind: HomologyKind,
    pub certified_bound: Option<usize>,
    pub degrees: Vec<HomologyDegree>,
}

/// Rank (fields) or invariant factors (ℤ) of each differential, cached.
struct Ranks<'a> {
    total: &'a TotalComplex,
    cache: BTreeMap<usize, Vec<BigInt>>,
}

impl<'a> Ranks<'a> {
    fn new(total: &'a TotalComplex) -> Self {
        Ranks { total, cache: BTreeMap::new() }
    }

    fn factors(&mut self, d: usize) -> Result<&[BigInt]> {
        if !self.cache.contains_key(&d) {
            let m = match self.total.differential.get(d) {
                Some(m) => m,
                None => return Err(Error::Window(format!("degree {d} is not materialized"))),
            };
            let v = if self.total.ring.is_field() { vec![BigInt::one(); rank(m)?] } else { smith_normal_form(m)? };
            self.cache.insert(d, v);
        }
        Ok(&self.cache[&d])
    }
}

fn check_certified(total: &TotalComplex, degrees: &RangeInclusive<usize>) -> Result<()> {
    match total.certified_bound {
        Some(b) if *degrees.end() <= b => Ok(()),
        b => Err(Error::Window(format!(
            "degrees {}..{} exceed the certified bound {}",
            degrees.start(),
            degrees.end(),
            b.map_or("(none)".to_string(), |b| b.to_string())
        ))),
    }
}

pub fn homology(total: &TotalComplex, degrees: RangeInclusive<usize>) -> Result<HomologyResult> {
    check_certified(total, &degrees)?;
    let mut ranks = Ranks::new(total);
    let mut out = Vec::new();
    for d in degrees {
        let r_in = if d == 0 { 0 } else { ranks.factors(d)?.len() };
        let out_f = ranks.factors(d + 1)?.to_vec();
        let torsion: Vec<BigInt> = out_f.into_iter().filter(|x| !x.is_one()).collect();
        let r_out = ranks.factors(d + 1)?.len();
        out.push(HomologyDegree { degree: d, chain_rank: total.dim(d), rank: total.dim(d) - r_in - r_out, torsion });
    }
    Ok(HomologyResult {
        ring: total.ring.to_string(),
        kind: total.kind,
        certified_bound: total.certified_bound,
        degrees: out,
    })
}

/// Deterministic homology basis over a field in one degree: boundaries
/// first (untagged), then kernel vectors; independent ones are the class
/// representatives and carry their index as tag.
struct FieldHomologyBasis {
    echelon: FieldEchelon,
    reps: Vec<Vec<(usize, Scalar)>>,
}

impl FieldHomologyBasis {
    fn new(total: &TotalComplex, d: usize) -> Result<Self> {
        let ring = total.ring;
        let mut echelon = FieldEchelon::new(ring)?;
        if let Some(out) = total.differential.get(d + 1) {
            for col in out.transpose().row_lists() {
                echelon.insert(&col, &[]);
            }
        }
        let cycles = if d == 0 {
            (0..total.dim(0)).map(|i| vec![(i, ring.one())]).collect()
        } else {
            sparse_kernel_basis(&total.differential[d])?
        };
        let mut reps = Vec::new();
        for z in cycles {
            if echelon.insert(&z, &[(reps.len(), ring.one())]) {
                reps.push(z);
            }
        }
        Ok(FieldHomologyBasis { echelon, reps })
    }

    /// Coordinates of a cycle in the representative basis.
    fn coordinates(&self, v: &[(usize, Scalar)]) -> Result<Vec<(usize, Scalar)>> {
        let (rem, tag) = self.echelon.reduce(v);
        if !rem.is_empty() {
            return Err(Error::Dimension("image vector is not a cycle".into()));
        }
        Ok(tag)
    }
}

/// HD(f) (or HC(f)) in one degree.
#[derive(Clone, Debug)]
pub struct InducedDegree {
    pub degree: usize,
    pub source: HomologyDegree,
    pub target: HomologyDegree,
    /// Matrix on the deterministic homology bases (fields only).
    pub matrix: Option<SparseMatrix>,
    pub isomorphism: bool,
}

#[derive(Clone, Debug)]
pub struct InducedHomologyMap {
    pub ring: RingSpec,
    pub degrees: Vec<InducedDegree>,
}

impl InducedHomologyMap {
    pub fn is_isomorphism(&self) -> bool {
        self.degrees.iter().all(|d| d.isomorphism)
    }
}

/// Mapping cone of a degree-0 chain map: cone_D = X_{D−1} ⊕ Y_D,
/// d(x, y) = (−dx, f x + dy). Differentials up to degree `top`.
fn cone_differentials(
    src: &TotalComplex,
    tgt: &TotalComplex,
    f: &TotalChainMap,
    top: usize,
) -> Result<Vec<SparseMatrix>> {
    let ring = src.ring;
    let cdim = |d: usize| if d == 0 { tgt.dim(0) } else { src.dim(d - 1) + tgt.dim(d) };
    let mut out = Vec::new();
    for d in 0..=top {
        let mut tb = TripletBuilder::new(ring, if d == 0 { 0 } else { cdim(d - 1) }, cdim(d));
        if d >= 1 {
            let sx = src.dim(d - 1);
            let tx = if d >= 2 { src.dim(d - 2) } else { 0 };
            let one = ring.one();
            if d >= 2 {
                tb.push_block(0, 0, &src.differential[d - 1], &ring.neg(&one));
            }
            tb.push_block(tx, 0, &f.matrices[d - 1], &one);
            tb.push_block(tx, sx, &tgt.differential[d], &one);
        }
        out.push(tb.build());
    }
    Ok(out)
}

/// Induced map on homology in the given degrees with an isomorphism verdict.
/// Over a field the matrix is computed on deterministic bases; over ℤ the
/// verdict comes from the invariant factors and the mapping cone.
pub fn induced_homology_map(
    src: &TotalComplex,
    tgt: &TotalComplex,
    f: &TotalChainMap,
    degrees: RangeInclusive<usize>,
) -> Result<InducedHomologyMap> {
    check_certified(src, &degrees)?;
    check_certified(tgt, &degrees)?;
    if f.shift != 0 || f.matrices.len() <= *degrees.end() {
        return Err(Error::Dimension("chain map does not cover the requested degrees".into()));
    }
    let hs = homology(src, degrees.clone())?;
    let ht = homology(tgt, degrees.clone())?;
    let ring = src.ring;
    let mut out = Vec::new();
    if ring.is_field() {
        for (i, d) in degrees.enumerate() {
            let bs = FieldHomologyBasis::new(src, d)?;
            let bt = FieldHomologyBasis::new(tgt, d)?;
            let mut tb = TripletBuilder::new(ring, bt.reps.len(), bs.reps.len());
            for (j, z) in bs.reps.iter().enumerate() {
                for (r, c) in bt.coordinates(&f.matrices[d].mul_sparse_vec(z))? {
                    tb.push(r, j, c);
                }
            }
            let m = tb.build();
            let iso = m.rows() == m.cols() && rank(&m)? == m.cols();
            out.push(InducedDegree {
                degree: d,
                source: hs.degrees[i].clone(),
                target: ht.degrees[i].clone(),
                matrix: Some(m),
                isomorphism: iso,
            });
        }
    } else {
        // induction from degree 0: f_* is bijective in degrees ≤ D iff in each
        // such degree the groups agree and the mapping cone is acyclic
        let hi = *degrees.end();
        let hs = homology(src, 0..=hi)?;
        let ht = homology(tgt, 0..=hi)?;
        let cone = cone_differentials(src, tgt, f, hi + 1)?;
        let mut ok = true;
        for d in 0..=hi {
            let (a, b) = (&hs.degrees[d], &ht.degrees[d]);
            let r_in = if d == 0 { 0 } else { smith_normal_form(&cone[d])?.len() };
            let out_f = smith_normal_form(&cone[d + 1])?;
            let acyclic = cone[d].cols() == r_in + out_f.len() && out_f.iter().all(|x| x.is_one());
            ok &= a.rank == b.rank && a.torsion == b.torsion && acyclic;
            if degrees.contains(&d) {
                out.push(InducedDegree {
                    degree: d,
                    source: a.clone(),
                    target: b.clone(),
                    matrix: None,
                    isomorphism: ok,
                });
            }
        }
    }
    Ok(InducedHomologyMap { ring, degrees: out })
}
