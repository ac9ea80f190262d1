//! Involutive A∞-algebras over a free graded basis: structure maps,
//! morphisms, homotopies, composition, and exhaustive verification of the
//! defining relations on basis tensors.
//!
//! Evaluation follows the Koszul rule: applying u⊗v to a⊗b gives
//! (−1)^{|v||a|} u(a)⊗v(b).

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{RingSpec, Scalar};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
}

/// Linear combination of generators.
pub type Vector = BTreeMap<usize, Scalar>;
/// Multilinear map on basis tensors: input tuple ↦ output combination.
pub type MultiMap = BTreeMap<Vec<usize>, Vector>;
/// Linear combination of basis tensors.
pub type TVec = BTreeMap<Vec<usize>, Scalar>;

/// (A, d, π_n, *). `ops[n]` is π_n of arity n + 2 and degree n.
#[derive(Clone, Debug)]
pub struct AInftyAlgebra {
    pub ring: RingSpec,
    pub generators: Vec<Generator>,
    pub d: MultiMap,
    pub ops: BTreeMap<usize, MultiMap>,
    pub involution: MultiMap,
}

fn clean(m: &MultiMap) -> MultiMap {
    m.iter()
        .filter_map(|(k, v)| {
            let v: Vector = v.iter().filter(|(_, s)| !s.is_zero()).map(|(o, s)| (*o, s.clone())).collect();
            (!v.is_empty()).then(|| (k.clone(), v))
        })
        .collect()
}

/// Checks arity, indices, ring and the degree shift of every entry.
fn check_multimap(
    ring: RingSpec,
    src: &[Generator],
    tgt: &[Generator],
    m: &MultiMap,
    arity: usize,
    degree: i64,
    what: &str,
) -> Result<()> {
    for (inp, out) in m {
        if inp.len() != arity {
            return Err(Error::Dimension(format!("{what}: input {inp:?} should have {arity} entries")));
        }
        if inp.iter().any(|&a| a >= src.len()) {
            return Err(Error::Dimension(format!("{what}: unknown generator in {inp:?}")));
        }
        let d_in: i64 = inp.iter().map(|&a| src[a].degree).sum();
        for (o, s) in out {
            if *o >= tgt.len() {
                return Err(Error::Dimension(format!("{what}: unknown output generator {o}")));
            }
            if !ring.owns(s) {
                return Err(Error::RingMismatch(ring.to_string(), format!("scalar {s}")));
            }
            if tgt[*o].degree != d_in + degree {
                return Err(Error::Incompatible(format!(
                    "{what}: {inp:?} ↦ {} changes degree by {}, expected {degree}",
                    tgt[*o].name,
                    tgt[*o].degree - d_in
                )));
            }
        }
    }
    Ok(())
}

impl AInftyAlgebra {
    pub fn new(
        ring: RingSpec,
        generators: Vec<Generator>,
        d: MultiMap,
        ops: BTreeMap<usize, MultiMap>,
        involution: MultiMap,
    ) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.degree < 0) {
            return Err(Error::Window(format!("generator {} has negative degree", g.name)));
        }
        check_multimap(ring, &generators, &generators, &d, 1, -1, "d")?;
        check_multimap(ring, &generators, &generators, &involution, 1, 0, "involution")?;
        for (n, op) in &ops {
            check_multimap(ring, &generators, &generators, op, n + 2, *n as i64, &format!("π_{n}"))?;
        }
        let d = clean(&d);
        let involution = clean(&involution);
        let ops = ops.iter().map(|(n, m)| (*n, clean(m))).filter(|(_, m)| !m.is_empty()).collect();
        Ok(AInftyAlgebra { ring, generators, d, ops, involution })
    }

    /// The ground ring: one generator of degree 0, π₀(1⊗1) = 1, trivial
    /// involution.
    pub fn ground(ring: RingSpec) -> Self {
        let one = ring.one();
        let mut pi0 = MultiMap::new();
        pi0.insert(vec![0, 0], [(0, one.clone())].into_iter().collect());
        let inv: MultiMap = [(vec![0], [(0, one)].into_iter().collect())].into_iter().collect();
        AInftyAlgebra::new(
            ring,
            vec![Generator { name: "1".into(), degree: 0 }],
            MultiMap::new(),
            [(0, pi0)].into_iter().collect(),
            inv,
        )
        .expect("the ground algebra is well formed")
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn degree(&self, a: usize) -> i64 {
        self.generators[a].degree
    }

    pub fn tuple_degree(&self, t: &[usize]) -> i64 {
        t.iter().map(|&a| self.generators[a].degree).sum()
    }

    pub fn max_degree(&self) -> i64 {
        self.generators.iter().map(|g| g.degree).max().unwrap_or(0)
    }

    /// Largest n with π_n ≠ 0.
    pub fn arity_bound(&self) -> usize {
        self.ops.keys().next_back().copied().unwrap_or(0)
    }

    pub fn op(&self, n: usize) -> Option<&MultiMap> {
        self.ops.get(&n)
    }

    /// All basis tensors of the given length with total degree ≤ max_deg,
    /// lexicographic.
    pub fn inputs(&self, arity: usize, max_deg: i64) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(arity);
        self.inputs_rec(arity, max_deg, &mut cur, &mut out);
        out
    }

    fn inputs_rec(&self, arity: usize, budget: i64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == arity {
            out.push(cur.clone());
            return;
        }
        for a in 0..self.dim() {
            let dg = self.degree(a);
            if dg <= budget {
                cur.push(a);
                self.inputs_rec(arity, budget - dg, cur, out);
                cur.pop();
            }
        }
    }

    /// Leibniz extension of d to tensors: Σ (−1)^{|a₀|+…+|a_{i−1}|} a₀⊗…⊗da_i⊗….
    pub fn tensor_d(&self, vec: &TVec) -> TVec {
        let ring = self.ring;
        let mut acc = TVec::new();
        for (t, c) in vec {
            let mut pre = 0;
            for (i, &a) in t.iter().enumerate() {
                if let Some(da) = self.d.get(&vec![a]) {
                    let s = ring.mul(c, &ring.sign(pre));
                    for (o, v) in da {
                        let mut nt = t.clone();
                        nt[i] = *o;
                        add_term(ring, &mut acc, nt, &ring.mul(&s, v));
                    }
                }
                pre += self.degree(a);
            }
        }
        acc
    }

    /// Applies * to each factor of a tensor vector.
    pub fn star_each(&self, vec: &TVec) -> TVec {
        let ring = self.ring;
        let mut acc = TVec::new();
        for (t, c) in vec {
            let mut partial: TVec = [(Vec::new(), c.clone())].into_iter().collect();
            for &a in t {
                let mut next = TVec::new();
                if let Some(img) = self.involution.get(&vec![a]) {
                    for (k, v) in &partial {
                        for (o, s) in img {
                            let mut nk = k.clone();
                            nk.push(*o);
                            add_term(ring, &mut next, nk, &ring.mul(v, s));
                        }
                    }
                }
                partial = next;
            }
            for (k, v) in partial {
                add_term(ring, &mut acc, k, &v);
            }
        }
        acc
    }
}

pub(crate) fn add_term(ring: RingSpec, acc: &mut TVec, k: Vec<usize>, c: &Scalar) {
    if c.is_zero() {
        return;
    }
    match acc.entry(k) {
        Entry::Vacant(v) => {
            v.insert(c.clone());
        }
        Entry::Occupied(mut o) => {
            let s = ring.add(o.get(), c);
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

/// acc += c·vec.
pub fn lin(ring: RingSpec, acc: &mut TVec, vec: &TVec, c: &Scalar) {
    for (k, v) in vec {
        add_term(ring, acc, k.clone(), &ring.mul(v, c));
    }
}

/// Applies a multilinear map to a vector of tensors of its arity; outputs are
/// 1-tensors.
pub fn post(ring: RingSpec, phi: &MultiMap, vec: &TVec) -> TVec {
    let mut acc = TVec::new();
    for (k, v) in vec {
        if let Some(out) = phi.get(k) {
            for (o, c) in out {
                add_term(ring, &mut acc, vec![*o], &ring.mul(v, c));
            }
        }
    }
    acc
}

/// One tensor factor of a composite: an identity on one input, or a
/// multilinear map of given arity and degree. `None` maps are zero.
#[derive(Clone, Copy, Debug)]
pub enum Piece<'a> {
    Id,
    Map { map: Option<&'a MultiMap>, arity: usize, degree: i64 },
}

impl Piece<'_> {
    fn arity(&self) -> usize {
        match self {
            Piece::Id => 1,
            Piece::Map { arity, .. } => *arity,
        }
    }
}

/// Evaluates p₁⊗…⊗p_r on a basis tensor of `alg` with Koszul signs.
pub fn eval_pieces(alg: &AInftyAlgebra, pieces: &[Piece<'_>], t: &[usize]) -> TVec {
    let ring = alg.ring;
    let total: usize = pieces.iter().map(|p| p.arity()).sum();
    assert_eq!(total, t.len(), "pieces consume {total} inputs, tensor has {}", t.len());
    let mut res: TVec = [(Vec::new(), ring.one())].into_iter().collect();
    let mut pos = 0;
    let mut pre = 0i64;
    for p in pieces {
        let inp = &t[pos..pos + p.arity()];
        pos += p.arity();
        let mut next = TVec::new();
        match p {
            Piece::Id => {
                for (k, v) in &res {
                    let mut nk = k.clone();
                    nk.push(inp[0]);
                    add_term(ring, &mut next, nk, v);
                }
            }
            Piece::Map { map, degree, .. } => {
                let Some(out) = map.and_then(|m| m.get(inp)) else { return TVec::new() };
                let s = ring.sign(degree * pre);
                for (k, v) in &res {
                    for (o, c) in out {
                        let mut nk = k.clone();
                        nk.push(*o);
                        add_term(ring, &mut next, nk, &ring.mul(&s, &ring.mul(v, c)));
                    }
                }
            }
        }
        if next.is_empty() {
            return next;
        }
        res = next;
        pre += alg.tuple_degree(inp);
    }
    res
}

/// (d∘φ − (−1)^deg φ∘d) on the basis tensor t.
fn d_comm(src: &AInftyAlgebra, tgt: &AInftyAlgebra, phi: Option<&MultiMap>, deg: i64, t: &[usize]) -> TVec {
    let ring = src.ring;
    let Some(phi) = phi else { return TVec::new() };
    let unit: TVec = [(t.to_vec(), ring.one())].into_iter().collect();
    let mut acc = tgt.tensor_d(&post(ring, phi, &unit));
    let inner = post(ring, phi, &src.tensor_d(&unit));
    lin(ring, &mut acc, &inner, &ring.neg(&ring.sign(deg)));
    acc
}

/// Compositions of `total` into `parts` nonnegative parts, lexicographic.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for a in 0..=total {
            cur.push(a);
            rec(total - a, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// ε(n₁,…,n_r) = Σ_i (n_i + 1)(n_{i+1} + … + n_r).
pub fn epsilon(ns: &[usize]) -> i64 {
    let mut e = 0;
    for i in 0..ns.len() {
        let tail: usize = ns[i + 1..].iter().sum();
        e += (ns[i] + 1) * tail;
    }
    e as i64
}

fn unit_vec(ring: RingSpec, t: &[usize]) -> TVec {
    [(t.to_vec(), ring.one())].into_iter().collect()
}

fn id_pieces<'a>(before: usize, mid: Piece<'a>, after: usize) -> Vec<Piece<'a>> {
    let mut v = vec![Piece::Id; before];
    v.push(mid);
    v.extend(std::iter::repeat_n(Piece::Id, after));
    v
}

fn op_piece(alg: &AInftyAlgebra, n: usize) -> Piece<'_> {
    Piece::Map { map: alg.op(n), arity: n + 2, degree: n as i64 }
}

/// Σ_{m=0}^{n} Σ_t (−1)^{t(n−m+1)+n+1} π_m(1^{t−1}⊗π_{n−m}⊗1^{m−t+2}) on t.
fn stasheff_rhs(alg: &AInftyAlgebra, n: usize, t: &[usize]) -> TVec {
    let ring = alg.ring;
    let mut acc = TVec::new();
    for m in 0..=n {
        let Some(outer) = alg.op(m) else { continue };
        if alg.op(n - m).is_none() {
            continue;
        }
        for tt in 1..=m + 2 {
            let pieces = id_pieces(tt - 1, op_piece(alg, n - m), m + 2 - tt);
            let inner = eval_pieces(alg, &pieces, t);
            let s = ring.sign((tt * (n - m + 1) + n + 1) as i64);
            lin(ring, &mut acc, &post(ring, outer, &inner), &s);
        }
    }
    acc
}

fn tvec_detail(alg: &AInftyAlgebra, v: &TVec) -> String {
    let parts: Vec<String> = v
        .iter()
        .take(3)
        .map(|(k, c)| {
            let names: Vec<&str> = k.iter().map(|&a| alg.generators[a].name.as_str()).collect();
            format!("{c}·{}", names.join("⊗"))
        })
        .collect();
    format!("residual {}{}", parts.join(" + "), if v.len() > 3 { " + …" } else { "" })
}

fn input_label(alg: &AInftyAlgebra, t: &[usize]) -> String {
    let names: Vec<&str> = t.iter().map(|&a| alg.generators[a].name.as_str()).collect();
    names.join("⊗")
}

/// Relations d(π_{n+1}) = Σ ± π_m(1⊗…⊗π_{n−m}⊗…⊗1) on every basis tensor,
/// for n from −1 up to the top degree (above it both sides vanish for
/// degree reasons).
pub fn verify_ainfty(alg: &AInftyAlgebra) -> Result<Report> {
    let mut report = Report::new("A∞ relations");
    let ring = alg.ring;
    let top = alg.max_degree();
    report.note(format!("relations checked for n = -1..{top}"));
    for dd in alg.d.values() {
        let img: TVec = dd.iter().map(|(o, c)| (vec![*o], c.clone())).collect();
        if !alg.tensor_d(&img).is_empty() {
            report.violation("differential-square", None, None, None, "d∘d ≠ 0");
        }
    }
    for n in -1..=top {
        let ar = (n + 3) as usize;
        let op = alg.op((n + 1) as usize);
        for t in alg.inputs(ar, top - n) {
            report.checks += 1;
            let mut lhs = d_comm(alg, alg, op, n + 1, &t);
            if n >= 0 {
                lin(ring, &mut lhs, &stasheff_rhs(alg, n as usize, &t), &ring.from_i64(-1));
            }
            if !lhs.is_empty() {
                report.violation(
                    "stasheff",
                    Some(n),
                    None,
                    None,
                    format!("{}: {}", input_label(alg, &t), tvec_detail(alg, &lhs)),
                );
            }
        }
    }
    Ok(report)
}

/// (3.5)-type condition for one multilinear map of the given arity:
/// φ(a₁,…,a_r)* = (−1)^{(r−2)(r−1)/2 + Σ_{i<j}|a_i||a_j|} φ(a_r*,…,a₁*).
fn check_reversal(
    report: &mut Report,
    tag: &str,
    level: i64,
    src: &AInftyAlgebra,
    tgt: &AInftyAlgebra,
    phi: Option<&MultiMap>,
    arity: usize,
    max_deg: i64,
) {
    let ring = src.ring;
    let Some(phi) = phi else { return };
    for t in src.inputs(arity, max_deg) {
        report.checks += 1;
        let mut lhs = tgt.star_each(&post(ring, phi, &unit_vec(ring, &t)));
        let mut rev = t.clone();
        rev.reverse();
        let starred = src.star_each(&unit_vec(ring, &rev));
        let mut e = ((arity as i64 - 2) * (arity as i64 - 1) / 2).rem_euclid(2);
        for i in 0..arity {
            for j in i + 1..arity {
                e += src.degree(t[i]) * src.degree(t[j]);
            }
        }
        lin(ring, &mut lhs, &post(ring, phi, &starred), &ring.neg(&ring.sign(e)));
        if !lhs.is_empty() {
            report.violation(
                tag,
                Some(level),
                None,
                None,
                format!("{}: {}", input_label(src, &t), tvec_detail(tgt, &lhs)),
            );
        }
    }
}

/// ** = 1, d* = *d and the star-reversal condition for every π_n.
pub fn verify_involution(alg: &AInftyAlgebra) -> Result<Report> {
    let mut report = Report::new("involution");
    let ring = alg.ring;
    for a in 0..alg.dim() {
        report.checks += 2;
        let u = unit_vec(ring, &[a]);
        let ss = alg.star_each(&alg.star_each(&u));
        if ss != u {
            report.violation(
                "involution-square",
                None,
                None,
                None,
                format!("{}** ≠ {}", alg.generators[a].name, alg.generators[a].name),
            );
        }
        let lhs = alg.tensor_d(&alg.star_each(&u));
        let rhs = alg.star_each(&alg.tensor_d(&u));
        if lhs != rhs {
            report.violation("involution-d", None, None, None, format!("d({0}*) ≠ (d{0})*", alg.generators[a].name));
        }
    }
    let top = alg.max_degree();
    for (&n, op) in &alg.ops {
        check_reversal(&mut report, "involution-reversal", n as i64, alg, alg, Some(op), n + 2, top - n as i64);
    }
    Ok(report)
}

/// f : A → B with components f_n of arity n + 1 and degree n.
#[derive(Clone, Debug)]
pub struct AInftyMorphism {
    pub source: Arc<AInftyAlgebra>,
    pub target: Arc<AInftyAlgebra>,
    pub components: BTreeMap<usize, MultiMap>,
}

impl AInftyMorphism {
    pub fn new(
        source: Arc<AInftyAlgebra>,
        target: Arc<AInftyAlgebra>,
        components: BTreeMap<usize, MultiMap>,
    ) -> Result<Self> {
        if source.ring != target.ring {
            return Err(Error::RingMismatch(source.ring.to_string(), target.ring.to_string()));
        }
        for (n, c) in &components {
            check_multimap(
                source.ring,
                &source.generators,
                &target.generators,
                c,
                n + 1,
                *n as i64,
                &format!("f_{n}"),
            )?;
        }
        let components = components.iter().map(|(n, m)| (*n, clean(m))).filter(|(_, m)| !m.is_empty()).collect();
        Ok(AInftyMorphism { source, target, components })
    }

    pub fn identity(alg: Arc<AInftyAlgebra>) -> Self {
        let one = alg.ring.one();
        let f0: MultiMap = (0..alg.dim()).map(|a| (vec![a], [(a, one.clone())].into_iter().collect())).collect();
        AInftyMorphism { source: alg.clone(), target: alg, components: [(0, f0)].into_iter().collect() }
    }

    pub fn component(&self, n: usize) -> Option<&MultiMap> {
        self.components.get(&n)
    }

    fn piece(&self, n: usize) -> Piece<'_> {
        Piece::Map { map: self.component(n), arity: n + 1, degree: n as i64 }
    }
}

/// Σ_{m=0}^{n} Σ_t (−1)^{t(n−m+1)+n+1+shift} φ_m(1⊗…⊗π_{n−m}⊗…⊗1).
fn inner_op_terms(src: &AInftyAlgebra, phi: &BTreeMap<usize, MultiMap>, n: usize, shift: usize, t: &[usize]) -> TVec {
    let ring = src.ring;
    let mut acc = TVec::new();
    for m in 0..=n {
        let Some(outer) = phi.get(&m) else { continue };
        if src.op(n - m).is_none() {
            continue;
        }
        for tt in 1..=m + 1 {
            let pieces = id_pieces(tt - 1, op_piece(src, n - m), m + 1 - tt);
            let inner = eval_pieces(src, &pieces, t);
            let s = ring.sign((tt * (n - m + 1) + n + 1 + shift) as i64);
            lin(ring, &mut acc, &post(ring, outer, &inner), &s);
        }
    }
    acc
}

/// Σ_{m} Σ_{ns} (−1)^{ε(ns)} π_m(f_{n₁}⊗…⊗f_{n_{m+2}}) on t, over m from 0 to n.
fn outer_op_terms(f: &AInftyMorphism, n: usize, t: &[usize]) -> TVec {
    let (src, tgt) = (&*f.source, &*f.target);
    let ring = src.ring;
    let mut acc = TVec::new();
    for m in 0..=n {
        let Some(outer) = tgt.op(m) else { continue };
        for ns in compositions(n - m, m + 2) {
            let pieces: Vec<Piece> = ns.iter().map(|&x| f.piece(x)).collect();
            let inner = eval_pieces(src, &pieces, t);
            lin(ring, &mut acc, &post(ring, outer, &inner), &ring.sign(epsilon(&ns)));
        }
    }
    acc
}

/// d(f_{n+1}) = Σ ± f_m(1⊗…⊗π⊗…⊗1) − Σ ± π_m(f⊗…⊗f), and the
/// star-reversal condition for each f_n.
pub fn verify_ainfty_morphism(f: &AInftyMorphism) -> Result<Report> {
    let mut report = Report::new("A∞ morphism");
    let (src, tgt) = (&*f.source, &*f.target);
    let ring = src.ring;
    let top = tgt.max_degree();
    report.note(format!("relations checked for n = -1..{top}"));
    for n in -1..=top {
        let ar = (n + 2) as usize;
        for t in src.inputs(ar, top - n) {
            report.checks += 1;
            let mut lhs = d_comm(src, tgt, f.component((n + 1) as usize), n + 1, &t);
            if n >= 0 {
                let n = n as usize;
                lin(ring, &mut lhs, &inner_op_terms(src, &f.components, n, 0, &t), &ring.from_i64(-1));
                lin(ring, &mut lhs, &outer_op_terms(f, n, &t), &ring.one());
            }
            if !lhs.is_empty() {
                report.violation(
                    "ainfty-morphism",
                    Some(n),
                    None,
                    None,
                    format!("{}: {}", input_label(src, &t), tvec_detail(tgt, &lhs)),
                );
            }
        }
    }
    for (&n, c) in &f.components {
        check_reversal(&mut report, "morphism-involution", n as i64, src, tgt, Some(c), n + 1, top - n as i64);
    }
    Ok(report)
}

/// (gf)_{n+1} = Σ_{m=−1}^{n} Σ_{ns} (−1)^{ε(ns)} g_{m+1}(f_{n₁}⊗…⊗f_{n_{m+2}}).
pub fn compose_ainfty(g: &AInftyMorphism, f: &AInftyMorphism) -> Result<AInftyMorphism> {
    if !Arc::ptr_eq(&f.target, &g.source) && f.target.generators != g.source.generators {
        return Err(Error::Incompatible("compose_ainfty: target of f is not the source of g".into()));
    }
    let (src, tgt) = (&*f.source, &*g.target);
    let ring = src.ring;
    let top = tgt.max_degree();
    let mut comps = BTreeMap::new();
    for n in -1..=top {
        let mut phi = MultiMap::new();
        for t in src.inputs((n + 2) as usize, top - n) {
            let mut acc = TVec::new();
            for m in -1..=n {
                let Some(outer) = g.component((m + 1) as usize) else { continue };
                for ns in compositions((n - m) as usize, (m + 2) as usize) {
                    let pieces: Vec<Piece> = ns.iter().map(|&x| f.piece(x)).collect();
                    let inner = eval_pieces(src, &pieces, &t);
                    lin(ring, &mut acc, &post(ring, outer, &inner), &ring.sign(epsilon(&ns)));
                }
            }
            let out: Vector = acc.into_iter().map(|(k, v)| (k[0], v)).collect();
            if !out.is_empty() {
                phi.insert(t, out);
            }
        }
        if !phi.is_empty() {
            comps.insert((n + 1) as usize, phi);
        }
    }
    AInftyMorphism::new(f.source.clone(), g.target.clone(), comps)
}

/// h : f ⇒ g with components h_n of arity n + 1 and degree n + 1.
#[derive(Clone, Debug)]
pub struct AInftyHomotopy {
    pub f: AInftyMorphism,
    pub g: AInftyMorphism,
    pub components: BTreeMap<usize, MultiMap>,
}

impl AInftyHomotopy {
    pub fn new(f: AInftyMorphism, g: AInftyMorphism, components: BTreeMap<usize, MultiMap>) -> Result<Self> {
        let (src, tgt) = (&*f.source, &*f.target);
        if src.generators != g.source.generators || tgt.generators != g.target.generators {
            return Err(Error::Incompatible("homotopy endpoints act between different algebras".into()));
        }
        for (n, c) in &components {
            check_multimap(src.ring, &src.generators, &tgt.generators, c, n + 1, *n as i64 + 1, &format!("h_{n}"))?;
        }
        let components = components.iter().map(|(n, m)| (*n, clean(m))).filter(|(_, m)| !m.is_empty()).collect();
        Ok(AInftyHomotopy { f, g, components })
    }

    pub fn component(&self, n: usize) -> Option<&MultiMap> {
        self.components.get(&n)
    }
}

/// The part of d(h_{n+1}) beyond f_{n+1} − g_{n+1}:
/// Σ ± h_m(1⊗…⊗π⊗…⊗1) + Σ (−1)^ϱ π_m(g⊗…⊗g⊗h⊗f⊗…⊗f).
fn homotopy_rest(h: &AInftyHomotopy, n: usize, t: &[usize]) -> TVec {
    let (src, tgt) = (&*h.f.source, &*h.f.target);
    let ring = src.ring;
    let mut acc = inner_op_terms(src, &h.components, n, 1, t);
    for m in 0..=n {
        let Some(outer) = tgt.op(m) else { continue };
        for ns in compositions(n - m, m + 2) {
            for i in 0..m + 2 {
                let pieces: Vec<Piece> = ns
                    .iter()
                    .enumerate()
                    .map(|(a, &x)| {
                        if a < i {
                            h.g.piece(x)
                        } else if a == i {
                            Piece::Map { map: h.component(x), arity: x + 1, degree: x as i64 + 1 }
                        } else {
                            h.f.piece(x)
                        }
                    })
                    .collect();
                let inner = eval_pieces(src, &pieces, t);
                let rho = m as i64 + epsilon(&ns) + ns[..i].iter().sum::<usize>() as i64;
                lin(ring, &mut acc, &post(ring, outer, &inner), &ring.sign(rho));
            }
        }
    }
    acc
}

/// d(h_{n+1}) = f_{n+1} − g_{n+1} + (higher terms), and the star-reversal
/// condition for each h_n.
pub fn verify_ainfty_homotopy(h: &AInftyHomotopy) -> Result<Report> {
    let mut report = Report::new("A∞ homotopy");
    let (src, tgt) = (&*h.f.source, &*h.f.target);
    let ring = src.ring;
    let top = tgt.max_degree();
    report.note(format!("relations checked for n = -1..{top}"));
    for n in -1..=top {
        let ar = (n + 2) as usize;
        let k = (n + 1) as usize;
        for t in src.inputs(ar, top - n) {
            report.checks += 1;
            let u = unit_vec(ring, &t);
            let mut lhs = d_comm(src, tgt, h.component(k), n + 2, &t);
            if let Some(fk) = h.f.component(k) {
                lin(ring, &mut lhs, &post(ring, fk, &u), &ring.from_i64(-1));
            }
            if let Some(gk) = h.g.component(k) {
                lin(ring, &mut lhs, &post(ring, gk, &u), &ring.one());
            }
            if n >= 0 {
                lin(ring, &mut lhs, &homotopy_rest(h, n as usize, &t), &ring.from_i64(-1));
            }
            if !lhs.is_empty() {
                report.violation(
                    "ainfty-homotopy",
                    Some(n),
                    None,
                    None,
                    format!("{}: {}", input_label(src, &t), tvec_detail(tgt, &lhs)),
                );
            }
        }
    }
    for (&n, c) in &h.components {
        check_reversal(&mut report, "homotopy-involution", n as i64, src, tgt, Some(c), n + 1, top - n as i64 - 1);
    }
    Ok(report)
}

/// φ + φ^σ where φ^σ(a₁,…,a_r) = ±φ(a_r*,…,a₁*)* is the star-reversal
/// conjugate; the result satisfies the reversal condition whenever * is an
/// involution.
pub fn symmetrize(alg: &AInftyAlgebra, phi: &MultiMap, arity: usize, max_deg: i64) -> MultiMap {
    let ring = alg.ring;
    let mut out = MultiMap::new();
    for t in alg.inputs(arity, max_deg) {
        let mut rev = t.clone();
        rev.reverse();
        let v = post(ring, phi, &alg.star_each(&unit_vec(ring, &rev)));
        let mut e = ((arity as i64 - 2) * (arity as i64 - 1) / 2).rem_euclid(2);
        for i in 0..arity {
            for j in i + 1..arity {
                e += alg.degree(t[i]) * alg.degree(t[j]);
            }
        }
        let mut acc = alg.star_each(&v);
        acc = acc.into_iter().map(|(k, c)| (k, ring.mul(&c, &ring.sign(e)))).collect();
        lin(ring, &mut acc, &post(ring, phi, &unit_vec(ring, &t)), &ring.one());
        let o: Vector = acc.into_iter().map(|(k, c)| (k[0], c)).collect();
        if !o.is_empty() {
            out.insert(t, o);
        }
    }
    out
}
