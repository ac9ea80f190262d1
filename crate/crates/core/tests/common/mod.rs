#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dihedral::ainfty::{
    compositions, epsilon, eval_pieces, lin, post, symmetrize, AInftyAlgebra, AInftyMorphism, Generator, MultiMap,
    Piece, TVec, Vector,
};
use dihedral::dihedral::{DFHomotopy, DFModule, DFMorphism};
use dihedral::exactlin::{RingSpec, Scalar, SparseMatrix, TripletBuilder};
use dihedral::graded::{ComponentFamily, FamilyKind, GradedMap, IndexTuple};

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gens(spec: &[(&str, i64)]) -> Vec<Generator> {
    spec.iter().map(|(n, d)| Generator { name: n.to_string(), degree: *d }).collect()
}

pub fn mm(ring: RingSpec, entries: &[(&[usize], &[(usize, i64)])]) -> MultiMap {
    entries
        .iter()
        .map(|(i, o)| (i.to_vec(), o.iter().map(|&(g, c)| (g, ring.from_i64(c))).collect::<Vector>()))
        .collect()
}

fn identity_involution(ring: RingSpec, dim: usize) -> MultiMap {
    (0..dim).map(|a| (vec![a], [(a, ring.one())].into_iter().collect())).collect()
}

/// Unit 1 of degree 0 acting on both sides.
fn unital(ring: RingSpec, dim: usize, mut mul: MultiMap) -> MultiMap {
    for a in 0..dim {
        mul.insert(vec![0, a], [(a, ring.one())].into_iter().collect());
        mul.insert(vec![a, 0], [(a, ring.one())].into_iter().collect());
    }
    mul
}

pub fn ground(ring: RingSpec) -> Arc<AInftyAlgebra> {
    Arc::new(AInftyAlgebra::ground(ring))
}

/// 1, u (deg 1), v (deg 0): du = v, uv = vu = αu, v² = αv; identity involution.
pub fn alg2(ring: RingSpec, alpha: i64) -> AInftyAlgebra {
    let mul =
        unital(ring, 3, mm(ring, &[(&[1, 2], &[(1, alpha)]), (&[2, 1], &[(1, alpha)]), (&[2, 2], &[(2, alpha)])]));
    AInftyAlgebra::new(
        ring,
        gens(&[("1", 0), ("u", 1), ("v", 0)]),
        mm(ring, &[(&[1], &[(2, 1)])]),
        [(0, mul)].into_iter().collect(),
        identity_involution(ring, 3),
    )
    .unwrap()
}

/// 1, x (deg 1), y (deg 2): x² = c·y, d = 0, y* = −y.
pub fn alg3(ring: RingSpec, c: i64) -> AInftyAlgebra {
    let mul = unital(ring, 3, mm(ring, &[(&[1, 1], &[(2, c)])]));
    AInftyAlgebra::new(
        ring,
        gens(&[("1", 0), ("x", 1), ("y", 2)]),
        MultiMap::new(),
        [(0, mul)].into_iter().collect(),
        mm(ring, &[(&[0], &[(0, 1)]), (&[1], &[(1, 1)]), (&[2], &[(2, -1)])]),
    )
    .unwrap()
}

/// Exterior algebra on x, y (deg 1) with dy = b·1, d(xy) = −b·x and
/// x* = −x, (xy)* = −xy.
pub fn ext2(ring: RingSpec, b: i64) -> AInftyAlgebra {
    let mul = unital(ring, 4, mm(ring, &[(&[1, 2], &[(3, 1)]), (&[2, 1], &[(3, -1)])]));
    AInftyAlgebra::new(
        ring,
        gens(&[("1", 0), ("x", 1), ("y", 1), ("xy", 2)]),
        mm(ring, &[(&[2], &[(0, b)]), (&[3], &[(1, -b)])]),
        [(0, mul)].into_iter().collect(),
        mm(ring, &[(&[0], &[(0, 1)]), (&[1], &[(1, -1)]), (&[2], &[(2, 1)]), (&[3], &[(3, -1)])]),
    )
    .unwrap()
}

/// K × K with idempotents e₁, e₂ and the swap involution.
pub fn kxk(ring: RingSpec) -> AInftyAlgebra {
    AInftyAlgebra::new(
        ring,
        gens(&[("e1", 0), ("e2", 0)]),
        MultiMap::new(),
        [(0, mm(ring, &[(&[0, 0], &[(0, 1)]), (&[1, 1], &[(1, 1)])]))].into_iter().collect(),
        mm(ring, &[(&[0], &[(1, 1)]), (&[1], &[(0, 1)])]),
    )
    .unwrap()
}

/// K ⊕ (u, v | du = v), all operations zero, identity involution; e spans K.
pub fn contractible(ring: RingSpec) -> AInftyAlgebra {
    AInftyAlgebra::new(
        ring,
        gens(&[("e", 0), ("u", 1), ("v", 0)]),
        mm(ring, &[(&[1], &[(2, 1)])]),
        BTreeMap::new(),
        identity_involution(ring, 3),
    )
    .unwrap()
}

/// K spanned by e, all operations zero.
pub fn line(ring: RingSpec) -> AInftyAlgebra {
    AInftyAlgebra::new(ring, gens(&[("e", 0)]), MultiMap::new(), BTreeMap::new(), identity_involution(ring, 1)).unwrap()
}

/// A random involutive DG algebra of total dimension ≤ 3: one of the
/// families above with random structure constants.
pub fn random_dg(ring: RingSpec, r: &mut ChaCha8Rng) -> AInftyAlgebra {
    let c = r.gen_range(1..5);
    match r.gen_range(0..3) {
        0 => alg2(ring, c),
        1 => alg3(ring, c),
        _ => {
            // 1, x (deg 1): d = 0, x² = 0, x* = ±x (only x* = x is compatible
            // with the sign of the reversal on x⊗x being irrelevant)
            let mul = unital(ring, 2, MultiMap::new());
            AInftyAlgebra::new(
                ring,
                gens(&[("1", 0), ("x", 1)]),
                MultiMap::new(),
                [(0, mul)].into_iter().collect(),
                mm(ring, &[(&[0], &[(0, 1)]), (&[1], &[(1, if c % 2 == 0 { 1 } else { -1 })])]),
            )
            .unwrap()
        }
    }
}

/// Random multilinear map of given arity and degree with small coefficients.
pub fn random_multimap(alg: &AInftyAlgebra, arity: usize, degree: i64, r: &mut ChaCha8Rng, density: f64) -> MultiMap {
    let ring = alg.ring;
    let mut out = MultiMap::new();
    for t in alg.inputs(arity, alg.max_degree()) {
        let target = alg.tuple_degree(&t) + degree;
        let outs: Vec<usize> = (0..alg.dim()).filter(|&o| alg.degree(o) == target).collect();
        if outs.is_empty() || !r.gen_bool(density) {
            continue;
        }
        let v: Vector =
            outs.into_iter().map(|o| (o, ring.from_i64(r.gen_range(-2..=2)))).filter(|(_, c)| !c.is_zero()).collect();
        if !v.is_empty() {
            out.insert(t, v);
        }
    }
    out
}

/// f₀ = 1 and symmetrized random f_n for n in `arities`.
pub fn gauge(alg: &AInftyAlgebra, r: &mut ChaCha8Rng, arities: &[usize]) -> BTreeMap<usize, MultiMap> {
    let ring = alg.ring;
    let mut f = BTreeMap::new();
    f.insert(0, identity_involution(ring, alg.dim()));
    for &n in arities {
        let raw = random_multimap(alg, n + 1, n as i64, r, 0.7);
        f.insert(n, symmetrize(alg, &raw, n + 1, alg.max_degree()));
    }
    f
}

fn unit(ring: RingSpec, t: &[usize]) -> TVec {
    [(t.to_vec(), ring.one())].into_iter().collect()
}

fn map_piece(map: Option<&MultiMap>, arity: usize, degree: i64) -> Piece<'_> {
    Piece::Map { map, arity, degree }
}

/// The A∞ structure π′ on the generators of `target` that makes f (with
/// f₀ = 1) an A∞-morphism (A, π′) → target.
pub fn pull_back(target: &Arc<AInftyAlgebra>, f: &BTreeMap<usize, MultiMap>) -> (Arc<AInftyAlgebra>, AInftyMorphism) {
    let b = &**target;
    let ring = b.ring;
    let top = b.max_degree();
    let mut pip: BTreeMap<usize, MultiMap> = BTreeMap::new();
    for n in 0..=top.max(0) as usize {
        let mut ph = MultiMap::new();
        for t in b.inputs(n + 2, top - n as i64) {
            let u = unit(ring, &t);
            // d f_{n+1} − (−1)^{n+1} f_{n+1} d
            let mut acc = TVec::new();
            if let Some(fm) = f.get(&(n + 1)) {
                acc = b.tensor_d(&post(ring, fm, &u));
                lin(ring, &mut acc, &post(ring, fm, &b.tensor_d(&u)), &ring.neg(&ring.sign(n as i64 + 1)));
            }
            for m in 1..=n {
                for tt in 1..=m + 1 {
                    let e = (tt * (n - m + 1) + n + 1) as i64;
                    let mut pieces = vec![Piece::Id; tt - 1];
                    pieces.push(map_piece(pip.get(&(n - m)), n - m + 2, (n - m) as i64));
                    pieces.extend(std::iter::repeat_n(Piece::Id, m + 1 - tt));
                    if let Some(fm) = f.get(&m) {
                        let v = post(ring, fm, &eval_pieces(b, &pieces, &t));
                        lin(ring, &mut acc, &v, &ring.neg(&ring.sign(e)));
                    }
                }
            }
            for m in 0..=n {
                for ns in compositions(n - m, m + 2) {
                    let pieces: Vec<Piece> = ns.iter().map(|&x| map_piece(f.get(&x), x + 1, x as i64)).collect();
                    if let Some(op) = b.op(m) {
                        let v = post(ring, op, &eval_pieces(b, &pieces, &t));
                        lin(ring, &mut acc, &v, &ring.sign(epsilon(&ns)));
                    }
                }
            }
            let out: Vector = acc.into_iter().map(|(k, c)| (k[0], c)).collect();
            if !out.is_empty() {
                ph.insert(t, out);
            }
        }
        pip.insert(n, ph);
    }
    let src = Arc::new(AInftyAlgebra::new(ring, b.generators.clone(), b.d.clone(), pip, b.involution.clone()).unwrap());
    let mor = AInftyMorphism::new(src.clone(), target.clone(), f.clone()).unwrap();
    (src, mor)
}

/// An equivariant h_() : X → Y of bidegree (0, 1) (random φ averaged over
/// the dihedral group at each level), h_I = 0 for k ≥ 1, and the morphism
/// g = f − (dh + hd) at k = 0, g_I = f_I − ∂_I h − h ∂_I at k ≥ 1.
pub fn df_homotopy(f: &DFMorphism, r: &mut ChaCha8Rng) -> DFHomotopy {
    let (x, y) = (&f.source, &f.target);
    let ring = x.ring;
    let mut hc = ComponentFamily::new(FamilyKind::Homotopy, x.carrier.clone(), y.carrier.clone(), ring);
    for n in 0..=x.max_level() {
        let mut phi = GradedMap::zero(x.carrier.clone(), y.carrier.clone(), (0, 1), ring);
        for (m, dim) in x.carrier.level(n) {
            let rows = y.carrier.dim((n, m + 1));
            if rows == 0 {
                continue;
            }
            let mut tb = TripletBuilder::new(ring, rows, dim);
            // a few entries per block keeps the averaged map sparse
            for _ in 0..2 {
                let (i, j) = (r.gen_range(0..rows), r.gen_range(0..dim));
                tb.push(i, j, ring.from_i64(r.gen_range(-2..=2)));
            }
            phi.set_block((n, m), tb.build()).unwrap();
        }
        let mut avg = GradedMap::zero(x.carrier.clone(), y.carrier.clone(), (0, 1), ring);
        for a in 0..=n as i64 {
            for b in 0..2 {
                let mut gx = x.t.power_of_t(n, a).unwrap();
                let mut gy = y.t.power_of_t(n, a).unwrap();
                if b == 1 {
                    gx = GradedMap::compose(&gx, &x.r.at_level(n)).unwrap();
                    gy = GradedMap::compose(&gy, &y.r.at_level(n)).unwrap();
                }
                // γ⁻¹ on X: (t^a r^b)⁻¹ = r^b t^{−a}
                let mut gx_inv = x.t.power_of_t(n, -a).unwrap();
                if b == 1 {
                    gx_inv = GradedMap::compose(&x.r.at_level(n), &gx_inv).unwrap();
                }
                let _ = gx;
                let term = GradedMap::compose(&GradedMap::compose(&gy, &phi).unwrap(), &gx_inv).unwrap();
                avg.add_assign_scaled(&term, &ring.one()).unwrap();
            }
        }
        hc.insert(n, IndexTuple::empty(), avg).unwrap();
    }
    let h0 = |n: usize| hc.get_or_zero(n, &IndexTuple::empty());
    let mut gc = ComponentFamily::new(FamilyKind::Morphism, x.carrier.clone(), y.carrier.clone(), ring);
    for n in 0..=x.max_level() {
        for k in 0..=n {
            for tuple in IndexTuple::all_of_size(n, k) {
                let mut g = f.components.get_or_zero(n, &tuple);
                let bracket = if k == 0 {
                    let dn = x.d.restrict_level(n);
                    GradedMap::add(
                        &GradedMap::compose(&y.d, &h0(n)).unwrap(),
                        &GradedMap::compose(&h0(n), &dn).unwrap(),
                        (&ring.one(), &ring.one()),
                    )
                    .unwrap()
                } else {
                    let fx = x.faces.get_or_zero(n, &tuple);
                    let fy = y.faces.get_or_zero(n, &tuple);
                    GradedMap::add(
                        &GradedMap::compose(&fy, &h0(n)).unwrap(),
                        &GradedMap::compose(&h0(n - k), &fx).unwrap(),
                        (&ring.one(), &ring.one()),
                    )
                    .unwrap()
                };
                g.add_assign_scaled(&bracket, &ring.from_i64(-1)).unwrap();
                gc.insert(n, tuple, g).unwrap();
            }
        }
    }
    let g = DFMorphism::new(x.clone(), y.clone(), gc).unwrap();
    DFHomotopy::new(f.clone(), g, hc).unwrap()
}

/// Replaces one entry of one block of a map by a different value.
pub fn corrupt(map: &GradedMap, r: &mut ChaCha8Rng) -> Option<GradedMap> {
    let ring = map.ring();
    let blocks: Vec<_> = map.blocks().iter().filter(|(_, m)| m.rows() > 0 && m.cols() > 0).collect();
    if blocks.is_empty() {
        return None;
    }
    let (b, m) = blocks[r.gen_range(0..blocks.len())];
    let (i, j) = (r.gen_range(0..m.rows()), r.gen_range(0..m.cols()));
    let old = m.get(i, j);
    let mut tb = TripletBuilder::new(ring, m.rows(), m.cols());
    for (a, c, v) in m.entries() {
        if (*a, *c) != (i, j) {
            tb.push(*a, *c, v.clone());
        }
    }
    tb.push(i, j, ring.add(&old, &ring.one()));
    let mut out = map.clone();
    out.set_block(*b, tb.build()).unwrap();
    Some(out)
}

// ---------------------------------------------------------------------------
// dense oracles, independent of the sparse elimination in the library

pub fn dense_i(m: &SparseMatrix) -> Vec<Vec<BigInt>> {
    let mut a = vec![vec![BigInt::zero(); m.cols()]; m.rows()];
    for (i, j, v) in m.entries() {
        a[*i][*j] = match v {
            Scalar::Int(x) => x.clone(),
            Scalar::Mod(x) => BigInt::from(*x),
            Scalar::Rat(q) => {
                assert!(q.is_integer(), "oracle expects integral matrices");
                q.to_integer()
            }
        };
    }
    a
}

/// Rank over ℚ by dense fraction-free elimination: each eliminated row is
/// an integer combination of two rows, divided by its content.
pub fn dense_rank_q(m: &SparseMatrix) -> usize {
    let mut a = dense_i(m);
    let (rows, cols) = (a.len(), m.cols());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(rank, p);
        let (top, rest) = a.split_at_mut(rank + 1);
        let prow = &top[rank];
        for row in rest.iter_mut().filter(|r| !r[c].is_zero()) {
            let g = prow[c].gcd(&row[c]);
            let (x, y) = (&prow[c] / &g, &row[c] / &g);
            let mut content = BigInt::zero();
            for j in c..cols {
                row[j] = &x * &row[j] - &y * &prow[j];
                content = content.gcd(&row[j]);
            }
            if !content.is_zero() && !content.is_one() {
                for v in row[c..].iter_mut() {
                    *v = &*v / &content;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over ℤ/p by dense Gaussian elimination.
pub fn dense_rank_p(m: &SparseMatrix, p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = dense_i(m)
        .into_iter()
        .map(|r| r.into_iter().map(|x| x.mod_floor(&BigInt::from(p)).try_into().unwrap()).collect())
        .collect();
    let (rows, cols) = (a.len(), m.cols());
    let inv = |x: u64| -> u64 {
        let (mut b, mut e, mut r) = (x % p, p - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(rank, piv);
        let iv = inv(a[rank][c]);
        for j in c..cols {
            a[rank][j] = a[rank][j] * iv % p;
        }
        let prow = a[rank].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let f = row[c];
                for j in c..cols {
                    row[j] = (row[j] + (p - f) * prow[j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Invariant factors by dense elementary row/column operations.
pub fn dense_invariant_factors(m: &SparseMatrix) -> Vec<BigInt> {
    let mut a = dense_i(m);
    let (rows, cols) = (a.len(), m.cols());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the remaining block, stopping at a unit
        let mut best: Option<(usize, usize)> = None;
        'scan: for i in t..rows {
            for j in t..cols {
                if a[i][j].is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                    if a[i][j].abs().is_one() {
                        break 'scan;
                    }
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        let mut done = false;
        while !done {
            done = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                if !q.is_zero() {
                    for j in t..cols {
                        if !a[t][j].is_zero() {
                            let s = &q * &a[t][j];
                            a[i][j] -= s;
                        }
                    }
                }
                if !a[i][t].is_zero() {
                    a.swap(t, i);
                    done = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                if !q.is_zero() {
                    for row in a.iter_mut() {
                        if !row[t].is_zero() {
                            let s = &q * &row[t];
                            row[j] -= s;
                        }
                    }
                }
                if !a[t][j].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    done = false;
                }
            }
            if done && !a[t][t].abs().is_one() {
                // pivot must divide the rest of the block
                if let Some(i) = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&a[t][t]))) {
                    for j in t..cols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                    done = false;
                }
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// (rank, torsion) per degree of a total complex by the dense oracles.
pub fn dense_homology(tot: &dihedral::complexes::TotalComplex, hi: usize) -> Vec<(usize, Vec<BigInt>)> {
    let ring = tot.ring;
    let factors = |d: usize| -> Vec<BigInt> {
        let m = &tot.differential[d];
        match ring {
            RingSpec::Rationals => vec![BigInt::one(); dense_rank_q(m)],
            RingSpec::PrimeField(p) => vec![BigInt::one(); dense_rank_p(m, p)],
            RingSpec::Integers => dense_invariant_factors(m),
        }
    };
    let all: Vec<Vec<BigInt>> = (0..=hi + 1).map(|d| if d == 0 { Vec::new() } else { factors(d) }).collect();
    (0..=hi)
        .map(|d| {
            let r_in = all[d].len();
            let out = &all[d + 1];
            let torsion = out.iter().filter(|x| !x.is_one()).cloned().collect();
            (tot.dim(d) - r_in - out.len(), torsion)
        })
        .collect()
}

/// Every DF fixture used by the bicomplex checks, with a name.
pub fn df_fixtures(ring: RingSpec, n: usize, r: &mut ChaCha8Rng) -> Vec<(String, Arc<DFModule>)> {
    use dihedral::tensor::build_tensor_df;
    let mut out = vec![("M(K)".to_string(), build_tensor_df(&ground(ring), n).unwrap().df.clone())];
    out.push(("M(KxK)".into(), build_tensor_df(&Arc::new(kxk(ring)), n).unwrap().df.clone()));
    let small = n.min(5);
    out.push(("M(alg2)".into(), build_tensor_df(&Arc::new(alg2(ring, 2)), small).unwrap().df.clone()));
    let a3 = Arc::new(alg3(ring, 2));
    let (b3, _) = pull_back(&a3, &gauge(&a3, r, &[1]));
    out.push(("M(alg3 gauged)".into(), build_tensor_df(&b3, small).unwrap().df.clone()));
    out
}
