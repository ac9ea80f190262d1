//! Exact coefficients (ℤ, ℚ, ℤ/p), sparse matrices, and the elimination
//! kernels used by homology and verification: rank, Smith normal form and
//! kernel bases.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient ring of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RingSpec {
    Integers,
    Rationals,
    PrimeField(u64),
}

/// An exact ring element. The variant always matches the ring it was made in.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Int(BigInt),
    Rat(BigRational),
    Mod(u64),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn mod_inv(a: u64, p: u64) -> u64 {
    mod_pow(a, p - 2, p)
}

fn bigint_mod(v: &BigInt, p: u64) -> u64 {
    let r = v.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits in u64")
}

impl RingSpec {
    /// ℤ/p; rejects composite p and p ≥ 2³¹ (products must fit in 64 bits).
    pub fn prime_field(p: u64) -> Result<Self> {
        if !is_prime(p) || p >= (1 << 31) {
            return Err(Error::NotPrime(p));
        }
        Ok(RingSpec::PrimeField(p))
    }

    pub fn is_field(&self) -> bool {
        !matches!(self, RingSpec::Integers)
    }

    pub fn zero(&self) -> Scalar {
        match self {
            RingSpec::Integers => Scalar::Int(BigInt::zero()),
            RingSpec::Rationals => Scalar::Rat(BigRational::zero()),
            RingSpec::PrimeField(_) => Scalar::Mod(0),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        self.from_bigint(&BigInt::from(v))
    }

    pub fn from_bigint(&self, v: &BigInt) -> Scalar {
        match self {
            RingSpec::Integers => Scalar::Int(v.clone()),
            RingSpec::Rationals => Scalar::Rat(BigRational::from_integer(v.clone())),
            RingSpec::PrimeField(p) => Scalar::Mod(bigint_mod(v, *p)),
        }
    }

    /// num/den in this ring; fails when den is not invertible (or, over ℤ,
    /// does not divide num).
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<Scalar> {
        if den.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        match self {
            RingSpec::Integers => {
                let (q, r) = num.div_rem(den);
                if !r.is_zero() {
                    return Err(Error::Parse(format!("{num}/{den} is not an integer")));
                }
                Ok(Scalar::Int(q))
            }
            RingSpec::Rationals => Ok(Scalar::Rat(BigRational::new(num.clone(), den.clone()))),
            RingSpec::PrimeField(p) => {
                let d = bigint_mod(den, *p);
                if d == 0 {
                    return Err(Error::Parse(format!("{den} is not invertible mod {p}")));
                }
                Ok(Scalar::Mod(bigint_mod(num, *p) * mod_inv(d, *p) % p))
            }
        }
    }

    /// Parses "17", "-3", "3/4" (ℚ, or ℤ/p with invertible denominator).
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar> {
        let t = text.trim();
        let t = t.strip_prefix('+').unwrap_or(t);
        let bad = || Error::Parse(format!("bad scalar {text:?}"));
        if let Some((n, d)) = t.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            self.from_ratio(&n, &d)
        } else {
            let n = BigInt::from_str(t).map_err(|_| bad())?;
            Ok(self.from_bigint(&n))
        }
    }

    /// True when `s` is a canonical element of this ring.
    pub fn owns(&self, s: &Scalar) -> bool {
        match (self, s) {
            (RingSpec::Integers, Scalar::Int(_)) => true,
            (RingSpec::Rationals, Scalar::Rat(_)) => true,
            (RingSpec::PrimeField(p), Scalar::Mod(v)) => v < p,
            _ => false,
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x + y),
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Scalar::Mod(x), Scalar::Mod(y)) => Scalar::Mod((x + y) % self.modulus()),
            _ => panic!("scalar variants do not match ring {self}"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Int(x) => Scalar::Int(-x),
            Scalar::Rat(x) => Scalar::Rat(-x),
            Scalar::Mod(x) => {
                let p = self.modulus();
                Scalar::Mod((p - x % p) % p)
            }
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x * y),
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Scalar::Mod(x), Scalar::Mod(y)) => Scalar::Mod(x * y % self.modulus()),
            _ => panic!("scalar variants do not match ring {self}"),
        }
    }

    /// Multiplicative inverse, if it exists in this ring.
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        match a {
            Scalar::Int(x) => {
                if x.is_one() || (-x).is_one() {
                    Some(Scalar::Int(x.clone()))
                } else {
                    None
                }
            }
            Scalar::Rat(x) => (!x.is_zero()).then(|| Scalar::Rat(x.recip())),
            Scalar::Mod(x) => (*x != 0).then(|| Scalar::Mod(mod_inv(*x, self.modulus()))),
        }
    }

    /// (−1)^e as a ring element.
    pub fn sign(&self, e: i64) -> Scalar {
        if e.rem_euclid(2) == 0 {
            self.one()
        } else {
            self.from_i64(-1)
        }
    }

    fn modulus(&self) -> u64 {
        match self {
            RingSpec::PrimeField(p) => *p,
            _ => panic!("modulus of {self}"),
        }
    }

    fn check_same(&self, other: &RingSpec) -> Result<()> {
        if self != other {
            return Err(Error::RingMismatch(self.to_string(), other.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Integers => write!(f, "z"),
            RingSpec::Rationals => write!(f, "q"),
            RingSpec::PrimeField(p) => write!(f, "zp:{p}"),
        }
    }
}

impl FromStr for RingSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "z" | "Z" => Ok(RingSpec::Integers),
            "q" | "Q" => Ok(RingSpec::Rationals),
            other => {
                let p = other
                    .strip_prefix("zp:")
                    .and_then(|p| p.parse::<u64>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown ring {other:?}")))?;
                RingSpec::prime_field(p)
            }
        }
    }
}

impl TryFrom<String> for RingSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RingSpec> for String {
    fn from(r: RingSpec) -> String {
        r.to_string()
    }
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Int(x) => x.is_zero(),
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Mod(x) => *x == 0,
        }
    }

    /// Integer value for ℤ elements and ℤ/p residues; None for non-integral
    /// rationals.
    pub fn to_bigint(&self) -> Option<BigInt> {
        match self {
            Scalar::Int(x) => Some(x.clone()),
            Scalar::Rat(x) => x.is_integer().then(|| x.to_integer()),
            Scalar::Mod(x) => Some(BigInt::from(*x)),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(x) => write!(f, "{x}"),
            Scalar::Rat(x) => {
                if x.is_integer() {
                    write!(f, "{}", x.numer())
                } else {
                    write!(f, "{}/{}", x.numer(), x.denom())
                }
            }
            Scalar::Mod(x) => write!(f, "{x}"),
        }
    }
}

/// Sparse matrix in canonical row-major triplet form: no duplicates, no
/// stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    ring: RingSpec,
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, Scalar)>,
}

impl SparseMatrix {
    /// Builds from arbitrary triplets; duplicates are summed, zeros dropped.
    pub fn from_triplets<I>(ring: RingSpec, rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Scalar)>,
    {
        let mut v: Vec<(usize, usize, Scalar)> = Vec::new();
        for (r, c, s) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::Dimension(format!("entry ({r},{c}) outside {rows}x{cols}")));
            }
            if !ring.owns(&s) {
                return Err(Error::RingMismatch(ring.to_string(), format!("scalar {s}")));
            }
            v.push((r, c, s));
        }
        Ok(Self::canonical(ring, rows, cols, v))
    }

    fn canonical(ring: RingSpec, rows: usize, cols: usize, mut v: Vec<(usize, usize, Scalar)>) -> Self {
        v.sort_by_key(|a| (a.0, a.1));
        let mut out: Vec<(usize, usize, Scalar)> = Vec::with_capacity(v.len());
        for (r, c, s) in v {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => {
                    last.2 = ring.add(&last.2, &s);
                }
                _ => out.push((r, c, s)),
            }
        }
        out.retain(|e| !e.2.is_zero());
        SparseMatrix { ring, rows, cols, entries: out }
    }

    pub fn zero(ring: RingSpec, rows: usize, cols: usize) -> Self {
        SparseMatrix { ring, rows, cols, entries: Vec::new() }
    }

    pub fn identity(ring: RingSpec, n: usize) -> Self {
        let entries = (0..n).map(|i| (i, i, ring.one())).collect();
        SparseMatrix { ring, rows: n, cols: n, entries }
    }

    /// Convenience constructor from small integer rows.
    pub fn from_dense_i64(ring: RingSpec, dense: &[Vec<i64>]) -> Result<Self> {
        let rows = dense.len();
        let cols = dense.first().map_or(0, |r| r.len());
        let mut trip = Vec::new();
        for (r, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension("ragged dense rows".into()));
            }
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    trip.push((r, c, ring.from_i64(v)));
                }
            }
        }
        Self::from_triplets(ring, rows, cols, trip)
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn entries(&self) -> &[(usize, usize, Scalar)] {
        &self.entries
    }
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        match self.entries.binary_search_by(|e| (e.0, e.1).cmp(&(r, c))) {
            Ok(i) => self.entries[i].2.clone(),
            Err(_) => self.ring.zero(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        let mut d = vec![vec![self.ring.zero(); self.cols]; self.rows];
        for (r, c, s) in &self.entries {
            d[*r][*c] = s.clone();
        }
        d
    }

    /// Start offsets of each row inside `entries` (length rows + 1).
    fn row_starts(&self) -> Vec<usize> {
        let mut starts = vec![0usize; self.rows + 1];
        for (r, _, _) in &self.entries {
            starts[r + 1] += 1;
        }
        for i in 0..self.rows {
            starts[i + 1] += starts[i];
        }
        starts
    }

    /// Rows as sorted (column, value) lists.
    pub fn row_lists(&self) -> Vec<Vec<(usize, Scalar)>> {
        let mut out = vec![Vec::new(); self.rows];
        for (r, c, s) in &self.entries {
            out[*r].push((*c, s.clone()));
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let v = self.entries.iter().map(|(r, c, s)| (*c, *r, s.clone())).collect();
        Self::canonical(self.ring, self.cols, self.rows, v)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let v = self.entries.iter().map(|(r, col, s)| (*r, *col, self.ring.mul(c, s))).collect();
        Self::canonical(self.ring, self.rows, self.cols, v)
    }

    pub fn neg(&self) -> Self {
        self.scale(&self.ring.from_i64(-1))
    }

    /// a·self + b·other.
    pub fn lin_comb(&self, a: &Scalar, other: &SparseMatrix, b: &Scalar) -> Result<Self> {
        self.ring.check_same(&other.ring)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!("{}x{} vs {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let ring = self.ring;
        let mut v: Vec<_> = self.entries.iter().map(|(r, c, s)| (*r, *c, ring.mul(a, s))).collect();
        v.extend(other.entries.iter().map(|(r, c, s)| (*r, *c, ring.mul(b, s))));
        Ok(Self::canonical(ring, self.rows, self.cols, v))
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<Self> {
        let one = self.ring.one();
        self.lin_comb(&one, other, &one)
    }

    pub fn sub(&self, other: &SparseMatrix) -> Result<Self> {
        self.lin_comb(&self.ring.one(), other, &self.ring.from_i64(-1))
    }

    /// Exact product self · other.
    pub fn multiply(&self, other: &SparseMatrix) -> Result<Self> {
        matrix_multiply(self, other)
    }

    /// self · v for a dense column vector.
    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        let mut out = vec![self.ring.zero(); self.rows];
        for (r, c, s) in &self.entries {
            if !v[*c].is_zero() {
                out[*r] = self.ring.add(&out[*r], &self.ring.mul(s, &v[*c]));
            }
        }
        Ok(out)
    }

    /// self · v for a sparse column vector given as sorted (index, value).
    pub fn mul_sparse_vec(&self, v: &[(usize, Scalar)]) -> Vec<(usize, Scalar)> {
        let t = self.transpose();
        let starts = t.row_starts();
        let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
        for (c, x) in v {
            for (_, r, s) in &t.entries[starts[*c]..starts[*c + 1]] {
                let e = acc.entry(*r).or_insert_with(|| self.ring.zero());
                *e = self.ring.add(e, &self.ring.mul(s, x));
            }
        }
        acc.into_iter().filter(|(_, s)| !s.is_zero()).collect()
    }
}

/// Exact product a · b.
pub fn matrix_multiply(a: &SparseMatrix, b: &SparseMatrix) -> Result<SparseMatrix> {
    a.ring.check_same(&b.ring)?;
    if a.cols != b.rows {
        return Err(Error::Dimension(format!("cannot multiply {}x{} by {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    let ring = a.ring;
    if a.is_zero() || b.is_zero() {
        return Ok(SparseMatrix::zero(ring, a.rows, b.cols));
    }
    let bstarts = b.row_starts();
    let mut acc: Vec<Option<Scalar>> = vec![None; b.cols];
    let mut touched: Vec<usize> = Vec::new();
    let mut out: Vec<(usize, usize, Scalar)> = Vec::new();
    let mut i = 0;
    while i < a.entries.len() {
        let row = a.entries[i].0;
        while i < a.entries.len() && a.entries[i].0 == row {
            let (_, k, x) = &a.entries[i];
            for (_, c, y) in &b.entries[bstarts[*k]..bstarts[*k + 1]] {
                let p = ring.mul(x, y);
                match &mut acc[*c] {
                    Some(v) => *v = ring.add(v, &p),
                    slot => {
                        *slot = Some(p);
                        touched.push(*c);
                    }
                }
            }
            i += 1;
        }
        touched.sort_unstable();
        for c in touched.drain(..) {
            if let Some(v) = acc[c].take() {
                if !v.is_zero() {
                    out.push((row, c, v));
                }
            }
        }
    }
    Ok(SparseMatrix { ring, rows: a.rows, cols: b.cols, entries: out })
}

/// Accumulates triplets for block assembly; duplicates are summed on build.
#[derive(Clone, Debug)]
pub struct TripletBuilder {
    ring: RingSpec,
    rows: usize,
    cols: usize,
    trip: Vec<(usize, usize, Scalar)>,
}

impl TripletBuilder {
    pub fn new(ring: RingSpec, rows: usize, cols: usize) -> Self {
        TripletBuilder { ring, rows, cols, trip: Vec::new() }
    }

    pub fn push(&mut self, r: usize, c: usize, s: Scalar) {
        debug_assert!(r < self.rows && c < self.cols);
        if !s.is_zero() {
            self.trip.push((r, c, s));
        }
    }

    /// Adds coeff·block with its top-left corner at (r0, c0).
    pub fn push_block(&mut self, r0: usize, c0: usize, block: &SparseMatrix, coeff: &Scalar) {
        if coeff.is_zero() {
            return;
        }
        let one = coeff == &self.ring.one();
        for (r, c, s) in block.entries() {
            let v = if one { s.clone() } else { self.ring.mul(coeff, s) };
            self.push(r0 + r, c0 + c, v);
        }
    }

    pub fn build(self) -> SparseMatrix {
        SparseMatrix::canonical(self.ring, self.rows, self.cols, self.trip)
    }
}

// ---------------------------------------------------------------------------
// elimination over ℤ/p

type ModRow = Vec<(usize, u64)>;

/// row − f·other (mod p), both sorted by column.
fn mod_axpy(row: &ModRow, f: u64, other: &ModRow, p: u64) -> ModRow {
    let nf = (p - f % p) % p;
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < other.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = other.get(j).map_or(usize::MAX, |e| e.0);
        if ci < cj {
            out.push(row[i]);
            i += 1;
        } else if cj < ci {
            let v = other[j].1 * nf % p;
            if v != 0 {
                out.push((cj, v));
            }
            j += 1;
        } else {
            let v = (row[i].1 + other[j].1 * nf) % p;
            if v != 0 {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn mod_rows(m: &SparseMatrix, p: u64) -> Vec<ModRow> {
    let mut rows = vec![Vec::new(); m.rows];
    for (r, c, s) in &m.entries {
        if let Scalar::Mod(v) = s {
            rows[*r].push((*c, *v % p));
        }
    }
    rows
}

fn mod_rank(mut rows: Vec<ModRow>, p: u64) -> usize {
    rows.sort_by_key(|r| r.len());
    let mut pivots: HashMap<usize, ModRow> = HashMap::new();
    for mut row in rows {
        while let Some(&(c, v)) = row.first() {
            match pivots.get(&c) {
                Some(piv) => row = mod_axpy(&row, v, piv, p),
                None => {
                    let inv = mod_inv(v, p);
                    for e in row.iter_mut() {
                        e.1 = e.1 * inv % p;
                    }
                    pivots.insert(c, row);
                    break;
                }
            }
        }
    }
    pivots.len()
}

// ---------------------------------------------------------------------------
// fraction-free elimination over ℚ (rows kept integral and primitive)

type IntRow = Vec<(usize, BigInt)>;

fn content_normalize(row: &mut IntRow) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            break;
        }
    }
    if let Some((_, lead)) = row.first() {
        if lead.is_negative() {
            g = -g;
        }
    }
    if !g.is_zero() && !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

/// a·row − b·other, sorted by column.
fn int_comb(a: &BigInt, row: &IntRow, b: &BigInt, other: &IntRow) -> IntRow {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < other.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = other.get(j).map_or(usize::MAX, |e| e.0);
        if ci < cj {
            out.push((ci, a * &row[i].1));
            i += 1;
        } else if cj < ci {
            out.push((cj, -(b * &other[j].1)));
            j += 1;
        } else {
            let v = a * &row[i].1 - b * &other[j].1;
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rows of a rational matrix, each scaled to a primitive integer row.
fn integral_rows(m: &SparseMatrix) -> Vec<IntRow> {
    let mut rows: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); m.rows];
    for (r, c, s) in &m.entries {
        let q = match s {
            Scalar::Rat(q) => q.clone(),
            Scalar::Int(i) => BigRational::from_integer(i.clone()),
            Scalar::Mod(v) => BigRational::from_integer(BigInt::from(*v)),
        };
        rows[*r].push((*c, q));
    }
    rows.into_iter()
        .map(|row| {
            let mut l = BigInt::one();
            for (_, q) in &row {
                l = l.lcm(q.denom());
            }
            let mut out: IntRow =
                row.into_iter().map(|(c, q)| (c, (q * BigRational::from_integer(l.clone())).to_integer())).collect();
            content_normalize(&mut out);
            out
        })
        .collect()
}

fn rational_rank(mut rows: Vec<IntRow>) -> usize {
    rows.sort_by_key(|r| r.len());
    let mut pivots: HashMap<usize, IntRow> = HashMap::new();
    for mut row in rows {
        while let Some((c, v)) = row.first().cloned() {
            match pivots.get(&c) {
                Some(piv) => {
                    let pv = &piv[0].1;
                    let g = pv.gcd(&v);
                    row = int_comb(&(pv / &g), &row, &(&v / &g), piv);
                    content_normalize(&mut row);
                }
                None => {
                    pivots.insert(c, row);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Exact rank over a field (ℚ or ℤ/p) by fraction-free sparse elimination.
pub fn rank(m: &SparseMatrix) -> Result<usize> {
    match m.ring {
        RingSpec::Integers => Err(Error::NotAField(m.ring.to_string())),
        RingSpec::PrimeField(p) => Ok(mod_rank(mod_rows(m, p), p)),
        RingSpec::Rationals => Ok(rational_rank(integral_rows(m))),
    }
}

// ---------------------------------------------------------------------------
// Smith normal form over ℤ

struct UnitElim {
    rows: Vec<BTreeMap<usize, BigInt>>,
    cols: Vec<BTreeSet<usize>>,
    by_len: BTreeSet<(usize, usize)>,
}

impl UnitElim {
    fn new(m: &SparseMatrix) -> Self {
        let mut rows = vec![BTreeMap::new(); m.rows];
        let mut cols = vec![BTreeSet::new(); m.cols];
        for (r, c, s) in &m.entries {
            let v = s.to_bigint().expect("integer entry");
            rows[*r].insert(*c, v);
            cols[*c].insert(*r);
        }
        let by_len = rows.iter().enumerate().filter(|(_, r)| !r.is_empty()).map(|(i, r)| (r.len(), i)).collect();
        UnitElim { rows, cols, by_len }
    }

    fn find_unit_pivot(&self) -> Option<(usize, usize)> {
        for &(_, r) in &self.by_len {
            let mut best: Option<(usize, usize)> = None;
            for (c, v) in &self.rows[r] {
                if v.abs().is_one() {
                    let len = self.cols[*c].len();
                    if best.is_none_or(|(l, _)| len < l) {
                        best = Some((len, *c));
                    }
                }
            }
            if let Some((_, c)) = best {
                return Some((r, c));
            }
        }
        None
    }

    fn set(&mut self, r: usize, c: usize, v: BigInt) {
        if v.is_zero() {
            if self.rows[r].remove(&c).is_some() {
                self.cols[c].remove(&r);
            }
        } else if self.rows[r].insert(c, v).is_none() {
            self.cols[c].insert(r);
        }
    }

    /// Clears column c with the unit at (r, c), then drops row r and column c.
    fn eliminate(&mut self, r: usize, c: usize) {
        let u = self.rows[r][&c].clone();
        let prow: Vec<(usize, BigInt)> = self.rows[r].iter().map(|(k, v)| (*k, v.clone())).collect();
        let others: Vec<usize> = self.cols[c].iter().copied().filter(|&x| x != r).collect();
        for o in others {
            let len_before = self.rows[o].len();
            let f = &self.rows[o][&c] * &u;
            for (k, v) in &prow {
                let cur = self.rows[o].get(k).cloned().unwrap_or_else(BigInt::zero);
                self.set(o, *k, cur - &f * v);
            }
            self.by_len.remove(&(len_before, o));
            if !self.rows[o].is_empty() {
                self.by_len.insert((self.rows[o].len(), o));
            }
        }
        self.by_len.remove(&(self.rows[r].len(), r));
        for (k, _) in &prow {
            self.cols[*k].remove(&r);
        }
        self.rows[r].clear();
    }
}

/// Invariant factors of a dense integer matrix (divisibility chain, all > 0).
fn dense_snf(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m && t < n {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(BigInt, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, v) in row.iter().enumerate().skip(t) {
                if !v.is_zero() && best.as_ref().is_none_or(|(b, _, _)| v.abs() < *b) {
                    best = Some((v.abs(), i, j));
                }
            }
        }
        let Some((_, bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    for j in t..n {
                        let s = &q * &a[t][j];
                        a[i][j] -= s;
                    }
                    if !a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..n {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    for row in a.iter_mut().skip(t) {
                        let s = &q * &row[t];
                        row[j] -= s;
                    }
                    if !a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                // move the smallest remainder in row/column t to the pivot
                let mut best = (a[t][t].abs(), t, t);
                for i in t + 1..m {
                    if !a[i][t].is_zero() && a[i][t].abs() < best.0 {
                        best = (a[i][t].abs(), i, t);
                    }
                }
                for j in t + 1..n {
                    if !a[t][j].is_zero() && a[t][j].abs() < best.0 {
                        best = (a[t][j].abs(), t, j);
                    }
                }
                let (_, bi, bj) = best;
                if bi != t {
                    a.swap(t, bi);
                }
                if bj != t {
                    for row in a.iter_mut() {
                        row.swap(t, bj);
                    }
                }
                continue;
            }
            // divisibility of the trailing block by the pivot
            let piv = a[t][t].clone();
            let mut bad_row = None;
            'scan: for i in t + 1..m {
                for j in t + 1..n {
                    if !a[i][j].is_zero() && !a[i][j].is_multiple_of(&piv) {
                        bad_row = Some(i);
                        break 'scan;
                    }
                }
            }
            match bad_row {
                Some(i) => {
                    for j in t..n {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// Invariant factors d₁ | d₂ | … | d_r (all positive) of an integer matrix.
pub fn smith_normal_form(m: &SparseMatrix) -> Result<Vec<BigInt>> {
    if m.ring != RingSpec::Integers {
        return Err(Error::NotIntegers(m.ring.to_string()));
    }
    let mut el = UnitElim::new(m);
    let mut ones = 0usize;
    while let Some((r, c)) = el.find_unit_pivot() {
        el.eliminate(r, c);
        ones += 1;
    }
    let live_rows: Vec<usize> = (0..m.rows).filter(|&r| !el.rows[r].is_empty()).collect();
    let live_cols: Vec<usize> = (0..m.cols).filter(|&c| !el.cols[c].is_empty()).collect();
    let col_pos: HashMap<usize, usize> = live_cols.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let dense: Vec<Vec<BigInt>> = live_rows
        .iter()
        .map(|&r| {
            let mut row = vec![BigInt::zero(); live_cols.len()];
            for (c, v) in &el.rows[r] {
                row[col_pos[c]] = v.clone();
            }
            row
        })
        .collect();
    let mut out = vec![BigInt::one(); ones];
    out.extend(dense_snf(dense));
    Ok(out)
}

// ---------------------------------------------------------------------------
// incremental echelon form over a field

/// Row-echelon basis over a field, built one vector at a time. Each stored
/// row carries an optional coefficient vector (`tag`) that is transported
/// through the reductions; this is what lets homology classes be read off.
#[derive(Clone, Debug)]
pub struct FieldEchelon {
    ring: RingSpec,
    pivots: BTreeMap<usize, (Vec<(usize, Scalar)>, Vec<(usize, Scalar)>)>,
}

fn sparse_axpy(ring: RingSpec, x: &[(usize, Scalar)], f: &Scalar, y: &[(usize, Scalar)]) -> Vec<(usize, Scalar)> {
    // x − f·y
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let ci = x.get(i).map_or(usize::MAX, |e| e.0);
        let cj = y.get(j).map_or(usize::MAX, |e| e.0);
        if ci < cj {
            out.push(x[i].clone());
            i += 1;
        } else if cj < ci {
            let v = ring.neg(&ring.mul(f, &y[j].1));
            if !v.is_zero() {
                out.push((cj, v));
            }
            j += 1;
        } else {
            let v = ring.sub(&x[i].1, &ring.mul(f, &y[j].1));
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl FieldEchelon {
    pub fn new(ring: RingSpec) -> Result<Self> {
        if !ring.is_field() {
            return Err(Error::NotAField(ring.to_string()));
        }
        Ok(FieldEchelon { ring, pivots: BTreeMap::new() })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Fully reduces `v` by the stored rows (leading-term reduction).
    /// Returns the remainder and the accumulated tag Σ λ_r·tag_r.
    pub fn reduce(&self, v: &[(usize, Scalar)]) -> (Vec<(usize, Scalar)>, Vec<(usize, Scalar)>) {
        let ring = self.ring;
        let mut rem: Vec<(usize, Scalar)> = Vec::new();
        let mut cur: Vec<(usize, Scalar)> = v.iter().filter(|e| !e.1.is_zero()).cloned().collect();
        let mut tag: Vec<(usize, Scalar)> = Vec::new();
        let minus_one = ring.from_i64(-1);
        while let Some((c, x)) = cur.first().cloned() {
            match self.pivots.get(&c) {
                Some((row, rtag)) => {
                    cur = sparse_axpy(ring, &cur, &x, row);
                    tag = sparse_axpy(ring, &tag, &ring.mul(&x, &minus_one), rtag);
                }
                None => {
                    rem.push((c, x));
                    cur.remove(0);
                }
            }
        }
        (rem, tag)
    }

    /// Inserts `v` (with tag) and returns true when it was independent.
    pub fn insert(&mut self, v: &[(usize, Scalar)], tag: &[(usize, Scalar)]) -> bool {
        let ring = self.ring;
        let mut cur: Vec<(usize, Scalar)> = v.iter().filter(|e| !e.1.is_zero()).cloned().collect();
        let mut t: Vec<(usize, Scalar)> = tag.to_vec();
        while let Some((c, x)) = cur.first().cloned() {
            match self.pivots.get(&c) {
                Some((row, rtag)) => {
                    cur = sparse_axpy(ring, &cur, &x, row);
                    t = sparse_axpy(ring, &t, &x, rtag);
                }
                None => {
                    let inv = ring.inv(&x).expect("nonzero in a field");
                    let cur: Vec<_> = cur.iter().map(|(k, y)| (*k, ring.mul(&inv, y))).collect();
                    let t: Vec<_> = t.iter().map(|(k, y)| (*k, ring.mul(&inv, y))).filter(|e| !e.1.is_zero()).collect();
                    self.pivots.insert(c, (cur, t));
                    return true;
                }
            }
        }
        false
    }

    /// Pivot columns in increasing order.
    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }

    /// Reduced row echelon rows (pivot entries 1, pivot columns cleared).
    pub fn reduced_rows(&self) -> Vec<(usize, Vec<(usize, Scalar)>)> {
        let ring = self.ring;
        let mut done: BTreeMap<usize, Vec<(usize, Scalar)>> = BTreeMap::new();
        for (&c, (row, _)) in self.pivots.iter().rev() {
            let mut r = row.clone();
            let mut k = 1;
            while k < r.len() {
                let col = r[k].0;
                if let Some(other) = done.get(&col) {
                    let f = r[k].1.clone();
                    r = sparse_axpy(ring, &r, &f, other);
                } else {
                    k += 1;
                }
            }
            done.insert(c, r);
        }
        done.into_iter().collect()
    }
}

/// Basis of the kernel of `m` as dense column vectors.
///
/// Over a field this is the standard free-variable basis of the reduced
/// echelon form. Over ℤ it is a ℤ-basis of ker ∩ ℤⁿ (saturated lattice),
/// obtained from a unimodular column reduction.
pub fn kernel_basis(m: &SparseMatrix) -> Result<Vec<Vec<Scalar>>> {
    let ring = m.ring;
    if ring == RingSpec::Integers {
        return Ok(integer_kernel(m));
    }
    Ok(sparse_kernel_basis(m)?
        .into_iter()
        .map(|sv| {
            let mut v = vec![ring.zero(); m.cols];
            for (i, x) in sv {
                v[i] = x;
            }
            v
        })
        .collect())
}

/// Free-variable kernel basis over a field, as sparse vectors sorted by
/// index. Deterministic: one vector per non-pivot column, in column order.
pub fn sparse_kernel_basis(m: &SparseMatrix) -> Result<Vec<Vec<(usize, Scalar)>>> {
    let ring = m.ring;
    let mut ech = FieldEchelon::new(ring)?;
    for row in m.row_lists() {
        ech.insert(&row, &[]);
    }
    let rref = ech.reduced_rows();
    let pivot_cols: BTreeSet<usize> = rref.iter().map(|(c, _)| *c).collect();
    // free column ↦ entries (pivot column, −coefficient)
    let mut by_free: BTreeMap<usize, Vec<(usize, Scalar)>> = BTreeMap::new();
    for (pc, row) in &rref {
        for (c, x) in row.iter().skip(1) {
            by_free.entry(*c).or_default().push((*pc, ring.neg(x)));
        }
    }
    Ok((0..m.cols)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut v = by_free.remove(&free).unwrap_or_default();
            v.push((free, ring.one()));
            v.sort_by_key(|e| e.0);
            v
        })
        .collect())
}

fn integer_kernel(m: &SparseMatrix) -> Vec<Vec<Scalar>> {
    let n = m.cols;
    let mut a: Vec<Vec<BigInt>> =
        m.to_dense().into_iter().map(|r| r.into_iter().map(|s| s.to_bigint().expect("integer")).collect()).collect();
    let mut u: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    // column operations act on a (rows) and u (columns of u are basis vectors)
    let col_op = |a: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, q: &BigInt| {
        for row in a.iter_mut() {
            let s = q * &row[src];
            row[dst] -= s;
        }
        for row in u.iter_mut() {
            let s = q * &row[src];
            row[dst] -= s;
        }
    };
    let swap_cols = |a: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in u.iter_mut() {
            row.swap(i, j);
        }
    };
    let mut c = 0;
    for r in 0..a.len() {
        if c >= n {
            break;
        }
        loop {
            // gather nonzero entries of row r in columns c..n
            let mut best: Option<(BigInt, usize)> = None;
            let mut count = 0;
            for j in c..n {
                if !a[r][j].is_zero() {
                    count += 1;
                    if best.as_ref().is_none_or(|(b, _)| a[r][j].abs() < *b) {
                        best = Some((a[r][j].abs(), j));
                    }
                }
            }
            let Some((_, bj)) = best else { break };
            swap_cols(&mut a, &mut u, c, bj);
            if count == 1 {
                c += 1;
                break;
            }
            for j in c + 1..n {
                if !a[r][j].is_zero() {
                    let q = a[r][j].div_floor(&a[r][c]);
                    col_op(&mut a, &mut u, j, c, &q);
                }
            }
        }
    }
    (c..n).map(|j| (0..n).map(|i| Scalar::Int(u[i][j].clone())).collect()).collect()
}
