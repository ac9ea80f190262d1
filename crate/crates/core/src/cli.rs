//! Batch front end: the JSON interchange format, the five commands and the
//! rendering of their reports.
//!
//! Exit codes: 0 when every check passes or the computation completes, 1
//! when a verification finds violations (including unverified inputs to a
//! computation), 2 on input or window errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::ainfty::{
    compose_ainfty, verify_ainfty, verify_ainfty_homotopy, verify_ainfty_morphism, verify_involution, AInftyAlgebra,
    AInftyHomotopy, AInftyMorphism, Generator, MultiMap, Vector,
};
use crate::complexes::{
    homology, induce_bicomplex_map, induced_homology_map, total_complex, HomologyKind, HomologyResult,
    InducedHomologyMap,
};
use crate::dihedral::{verify_df_homotopy, verify_df_module, verify_df_morphism, DFHomotopy, DFModule, DFMorphism};
use crate::error::{Error, Result};
use crate::exactlin::{RingSpec, SparseMatrix, TripletBuilder};
use crate::graded::{ComponentFamily, FamilyKind, FreeBigradedModule, GradedMap, IndexTuple, TruncationWindow};
use crate::report::Report;
use crate::sface::{
    composition, default_names, expand_composition, expand_face_relation, expand_homotopy_relation,
    expand_morphism_relation, face_relation, homotopy_relation, morphism_relation, FormalExpression,
};
use crate::tensor::{build_tensor_df, induce_df_morphism, TensorModule};

// ---------------------------------------------------------------------------
// interchange format

/// (input basis tuple, output generator, scalar). Scalars are strings:
/// decimal integers, "num/den", or residues.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry(pub Vec<String>, pub String, pub String);

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub differential: Vec<Entry>,
    /// π_n keyed by n; π_n has n + 2 inputs.
    #[serde(default)]
    pub operations: BTreeMap<usize, Vec<Entry>>,
    #[serde(default)]
    pub involution: Vec<Entry>,
}

/// Components keyed by n: f_n has n + 1 inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentsSpec {
    pub components: BTreeMap<usize, Vec<Entry>>,
}

/// One block of a graded map: the source bidegree and sparse
/// (row, column, scalar) entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub source: (usize, i64),
    pub entries: Vec<(usize, usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceSpec {
    pub level: usize,
    pub tuple: Vec<usize>,
    pub blocks: Vec<BlockSpec>,
}

/// A module with ∞-simplicial faces and cyclic and dihedral operators. With
/// `strict` set, the faces are the simplicial ∂_i (one-element tuples) of a
/// strict dihedral module and are lifted with the sign (−1)^m.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    pub max_level: usize,
    pub internal: (i64, i64),
    /// (n, m, rank).
    pub dims: Vec<(usize, i64, usize)>,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub d: Vec<BlockSpec>,
    #[serde(default)]
    pub faces: Vec<FaceSpec>,
    pub t: Vec<BlockSpec>,
    pub r: Vec<BlockSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DFHomotopySpec {
    pub components: Vec<FaceSpec>,
    /// The second endpoint g; the first is `df_morphism`.
    pub to: Vec<FaceSpec>,
}

/// A job input. Every section is optional; each command states what it
/// needs.
///
/// - `algebra` is A and `target` is B (B defaults to A).
/// - `morphism` is f : A → B and `inverse` is g : B → A.
/// - `homotopy` witnesses 1_A ≃ g∘f and `inverse_homotopy` witnesses
///   1_B ≃ f∘g.
/// - `module`, `target_module`, `df_morphism` (X → Y) and `df_homotopy`
///   carry structures given directly on free bigraded modules.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<AlgebraSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<ComponentsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<ComponentsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homotopy: Option<ComponentsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_homotopy: Option<ComponentsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<ModuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_module: Option<ModuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df_morphism: Option<Vec<FaceSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df_homotopy: Option<DFHomotopySpec>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Document::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The flag wins over the document; ℚ when neither names a ring.
    pub fn ring(&self, flag: Option<RingSpec>) -> Result<RingSpec> {
        match (flag, &self.ring) {
            (Some(r), _) => Ok(r),
            (None, Some(s)) => s.parse(),
            (None, None) => Ok(RingSpec::Rationals),
        }
    }
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref().ok_or_else(|| Error::Parse(format!("missing section \"{name}\"")))
}

fn generator_index(gens: &[Generator], name: &str, what: &str) -> Result<usize> {
    gens.iter().position(|g| g.name == name).ok_or_else(|| Error::Parse(format!("{what}: unknown generator {name:?}")))
}

fn entries_to_multimap(
    ring: RingSpec,
    src: &[Generator],
    tgt: &[Generator],
    entries: &[Entry],
    what: &str,
) -> Result<MultiMap> {
    let mut out = MultiMap::new();
    for Entry(inp, o, c) in entries {
        let key = inp.iter().map(|a| generator_index(src, a, what)).collect::<Result<Vec<_>>>()?;
        let o = generator_index(tgt, o, what)?;
        let c = ring.parse_scalar(c).map_err(|e| Error::Parse(format!("{what}: {e}")))?;
        let v: &mut Vector = out.entry(key).or_default();
        let cur = v.remove(&o).unwrap_or_else(|| ring.zero());
        let sum = ring.add(&cur, &c);
        if !sum.is_zero() {
            v.insert(o, sum);
        }
    }
    Ok(out)
}

fn multimap_to_entries(src: &[Generator], tgt: &[Generator], m: &MultiMap) -> Vec<Entry> {
    let mut out = Vec::new();
    for (inp, v) in m {
        for (o, c) in v {
            let names = inp.iter().map(|&a| src[a].name.clone()).collect();
            out.push(Entry(names, tgt[*o].name.clone(), c.to_string()));
        }
    }
    out
}

pub fn algebra_from_spec(ring: RingSpec, spec: &AlgebraSpec) -> Result<AInftyAlgebra> {
    let g = &spec.generators;
    for (i, a) in g.iter().enumerate() {
        if g[..i].iter().any(|b| b.name == a.name) {
            return Err(Error::Parse(format!("duplicate generator {:?}", a.name)));
        }
    }
    let d = entries_to_multimap(ring, g, g, &spec.differential, "differential")?;
    let inv = entries_to_multimap(ring, g, g, &spec.involution, "involution")?;
    let mut ops = BTreeMap::new();
    for (n, e) in &spec.operations {
        ops.insert(*n, entries_to_multimap(ring, g, g, e, &format!("operation {n}"))?);
    }
    AInftyAlgebra::new(ring, g.clone(), d, ops, inv)
}

pub fn algebra_to_spec(alg: &AInftyAlgebra) -> AlgebraSpec {
    let g = &alg.generators;
    AlgebraSpec {
        generators: g.clone(),
        differential: multimap_to_entries(g, g, &alg.d),
        operations: alg.ops.iter().map(|(n, m)| (*n, multimap_to_entries(g, g, m))).collect(),
        involution: multimap_to_entries(g, g, &alg.involution),
    }
}

fn components_from_spec(
    ring: RingSpec,
    src: &AInftyAlgebra,
    tgt: &AInftyAlgebra,
    spec: &ComponentsSpec,
    what: &str,
) -> Result<BTreeMap<usize, MultiMap>> {
    spec.components
        .iter()
        .map(|(n, e)| Ok((*n, entries_to_multimap(ring, &src.generators, &tgt.generators, e, &format!("{what} {n}"))?)))
        .collect()
}

pub fn components_to_spec(src: &AInftyAlgebra, tgt: &AInftyAlgebra, c: &BTreeMap<usize, MultiMap>) -> ComponentsSpec {
    ComponentsSpec {
        components: c.iter().map(|(n, m)| (*n, multimap_to_entries(&src.generators, &tgt.generators, m))).collect(),
    }
}

fn map_from_blocks(
    ring: RingSpec,
    src: &Arc<FreeBigradedModule>,
    tgt: &Arc<FreeBigradedModule>,
    bidegree: (i64, i64),
    blocks: &[BlockSpec],
    what: &str,
) -> Result<GradedMap> {
    let mut map = GradedMap::zero(src.clone(), tgt.clone(), bidegree, ring);
    for b in blocks {
        if !src.window().contains(b.source) {
            return Err(Error::Window(format!("{what}: block at {:?} outside the window", b.source)));
        }
        let rows = map.target_of(b.source).map_or(0, |t| tgt.dim(t));
        let cols = src.dim(b.source);
        let mut tb = TripletBuilder::new(ring, rows, cols);
        for (i, j, c) in &b.entries {
            if *i >= rows || *j >= cols {
                return Err(Error::Dimension(format!(
                    "{what}: entry ({i},{j}) outside a {rows}x{cols} block at {:?}",
                    b.source
                )));
            }
            tb.push(*i, *j, ring.parse_scalar(c).map_err(|e| Error::Parse(format!("{what}: {e}")))?);
        }
        let m = tb.build();
        let mut merged = map.block_or_zero(b.source);
        merged = merged.add(&m)?;
        map.set_block(b.source, merged)?;
    }
    Ok(map)
}

fn blocks_of(map: &GradedMap) -> Vec<BlockSpec> {
    map.blocks()
        .iter()
        .map(|(b, m)| BlockSpec {
            source: *b,
            entries: m.entries().iter().map(|(i, j, c)| (*i, *j, c.to_string())).collect(),
        })
        .collect()
}

fn family_from_spec(
    ring: RingSpec,
    kind: FamilyKind,
    src: &Arc<FreeBigradedModule>,
    tgt: &Arc<FreeBigradedModule>,
    faces: &[FaceSpec],
    what: &str,
) -> Result<ComponentFamily> {
    let mut fam = ComponentFamily::new(kind, src.clone(), tgt.clone(), ring);
    for f in faces {
        let tuple = IndexTuple::new(f.tuple.clone())?;
        let bd = kind.bidegree(tuple.len());
        let m = map_from_blocks(ring, src, tgt, bd, &f.blocks, &format!("{what} {:?} at level {}", f.tuple, f.level))?;
        fam.insert(f.level, tuple, m)?;
    }
    Ok(fam)
}

fn family_to_spec(fam: &ComponentFamily) -> Vec<FaceSpec> {
    fam.entries()
        .iter()
        .map(|((n, t), m)| FaceSpec { level: *n, tuple: t.as_slice().to_vec(), blocks: blocks_of(m) })
        .collect()
}

fn carrier_from_spec(spec: &ModuleSpec) -> Result<Arc<FreeBigradedModule>> {
    let window = TruncationWindow::new(spec.max_level, spec.internal.0, spec.internal.1)?;
    let mut dims = BTreeMap::new();
    for &(n, m, r) in &spec.dims {
        if dims.insert((n, m), r).is_some() {
            return Err(Error::Parse(format!("rank at ({n},{m}) given twice")));
        }
    }
    Ok(Arc::new(FreeBigradedModule::new(window, dims)?))
}

pub fn module_from_spec(ring: RingSpec, spec: &ModuleSpec) -> Result<DFModule> {
    let x = carrier_from_spec(spec)?;
    let d = map_from_blocks(ring, &x, &x, (0, -1), &spec.d, "d")?;
    let t = map_from_blocks(ring, &x, &x, (0, 0), &spec.t, "t")?;
    let r = map_from_blocks(ring, &x, &x, (0, 0), &spec.r, "r")?;
    if spec.strict {
        let mut strict = BTreeMap::new();
        for f in &spec.faces {
            let [i] = f.tuple[..] else {
                return Err(Error::Parse(format!("strict faces take one index, got {:?}", f.tuple)));
            };
            let m = map_from_blocks(ring, &x, &x, (-1, 0), &f.blocks, &format!("face {i} at level {}", f.level))?;
            strict.insert((f.level, i), m);
        }
        DFModule::from_strict(x, ring, d, &strict, t, r)
    } else {
        let faces = family_from_spec(ring, FamilyKind::Face, &x, &x, &spec.faces, "face")?;
        DFModule::new(x, ring, d, faces, t, r)
    }
}

pub fn module_to_spec(x: &DFModule) -> ModuleSpec {
    let w = x.carrier.window();
    ModuleSpec {
        max_level: w.max_level,
        internal: w.internal,
        dims: x.carrier.dims().iter().filter(|(_, r)| **r > 0).map(|(&(n, m), &r)| (n, m, r)).collect(),
        strict: false,
        d: blocks_of(&x.d),
        faces: family_to_spec(&x.faces),
        t: blocks_of(&x.t.map),
        r: blocks_of(&x.r.map),
    }
}

pub fn df_morphism_from_spec(x: &Arc<DFModule>, y: &Arc<DFModule>, spec: &[FaceSpec]) -> Result<DFMorphism> {
    let fam = family_from_spec(x.ring, FamilyKind::Morphism, &x.carrier, &y.carrier, spec, "morphism component")?;
    DFMorphism::new(x.clone(), y.clone(), fam)
}

pub fn df_morphism_to_spec(f: &DFMorphism) -> Vec<FaceSpec> {
    family_to_spec(&f.components)
}

// ---------------------------------------------------------------------------
// command line

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Cyclic,
    Dihedral,
}

impl From<Kind> for HomologyKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Cyclic => HomologyKind::Cyclic,
            Kind::Dihedral => HomologyKind::Dihedral,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExpandKind {
    Face,
    Morphism,
    Composition,
    Homotopy,
}

#[derive(Debug, Parser)]
#[command(name = "dihedral", version, about = "Exact cyclic and dihedral homology of involutive A∞-algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Coefficient ring: z, q or zp:<p>. Overrides the document's ring.
    #[arg(long, global = true, value_parser = parse_ring)]
    pub ring: Option<RingSpec>,
    /// Highest simplicial level N of the tensor module.
    #[arg(long, global = true)]
    pub truncate: Option<usize>,
    /// Total degrees lo..hi (inclusive).
    #[arg(long, global = true, value_parser = parse_degrees)]
    pub degrees: Option<(usize, usize)>,
    #[arg(long, global = true, value_enum, default_value_t = Kind::Dihedral)]
    pub kind: Kind,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every structure in the input and list all violations.
    Verify { input: PathBuf },
    /// Betti numbers or invariant factors of HC or HD of the input.
    Homology { input: PathBuf },
    /// The map HD(f) induced by the input's morphism.
    InducedMap { input: PathBuf },
    /// Verify a homotopy equivalence with its witnesses, then check that
    /// HD(f) is an isomorphism.
    InvarianceCheck { input: PathBuf },
    /// Symbolic expansion of a relation for an index tuple such as "(i,j)",
    /// "(0,2)" or "()".
    Expand {
        #[arg(value_enum, value_name = "KIND")]
        relation: ExpandKind,
        tuple: String,
    },
}

fn parse_ring(s: &str) -> std::result::Result<RingSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn parse_degrees(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let lo: usize = a.trim().parse().map_err(|_| format!("bad lower degree {a:?}"))?;
    let hi: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad upper degree {b:?}"))?;
    if lo > hi {
        return Err(format!("empty degree range {s}"));
    }
    Ok((lo, hi))
}

/// Truncation N and degree range: N defaults to hi + 1, hi to N − 1, and
/// both together to N = 5. N must be at least hi + 1.
pub fn job_window(truncate: Option<usize>, degrees: Option<(usize, usize)>) -> Result<(usize, RangeInclusive<usize>)> {
    let (n, (lo, hi)) = match (truncate, degrees) {
        (Some(n), Some(d)) => (n, d),
        (Some(n), None) => (n, (0, n.saturating_sub(1))),
        (None, Some(d)) => (d.1 + 1, d),
        (None, None) => (5, (0, 4)),
    };
    if n == 0 || hi + 1 > n {
        return Err(Error::Window(format!(
            "truncation N = {n} certifies degrees up to {}, asked for {hi}",
            n as i64 - 1
        )));
    }
    Ok((n, lo..=hi))
}

/// What a command produced: the rendered report and its exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
}

pub fn run(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok(o) => o,
        Err(e) => {
            let text = match cli.format {
                Format::Text => format!("error: {e}\n"),
                Format::Json => json(&serde_json::json!({ "error": e.to_string() })),
            };
            let code = if matches!(e, Error::Unverified(_)) { 1 } else { 2 };
            Outcome { code, text }
        }
    }
}

/// Runs the command and writes its report; returns the exit code.
pub fn main_with(cli: &Cli) -> i32 {
    let out = run(cli);
    let written = match &cli.output {
        Some(p) => std::fs::write(p, &out.text).map_err(|e| e.to_string()),
        None => std::io::stdout().write_all(out.text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => out.code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Verify { input } => cmd_verify(cli, &Document::load(input)?),
        Command::Homology { input } => cmd_homology(cli, &Document::load(input)?),
        Command::InducedMap { input } => cmd_induced_map(cli, &Document::load(input)?),
        Command::InvarianceCheck { input } => cmd_invariance_check(cli, &Document::load(input)?),
        Command::Expand { relation, tuple } => cmd_expand(cli, *relation, tuple),
    }
}

fn render_reports(cli: &Cli, command: &str, reports: &[Report], extra: Option<serde_json::Value>) -> Outcome {
    let passed = reports.iter().all(Report::passed);
    let text = match cli.format {
        Format::Text => {
            let mut s = String::new();
            for r in reports {
                s.push_str(&r.to_string());
            }
            let _ = writeln!(s, "{}", if passed { "all checks pass" } else { "violations found" });
            s
        }
        Format::Json => {
            let mut v = serde_json::json!({ "command": command, "passed": passed, "reports": reports });
            if let Some(e) = extra {
                v["result"] = e;
            }
            json(&v)
        }
    };
    Outcome { code: if passed { 0 } else { 1 }, text }
}

struct Loaded {
    ring: RingSpec,
    a: Arc<AInftyAlgebra>,
    b: Arc<AInftyAlgebra>,
}

fn load_algebras(cli: &Cli, doc: &Document) -> Result<Loaded> {
    let ring = doc.ring(cli.ring)?;
    let a = Arc::new(algebra_from_spec(ring, section(&doc.algebra, "algebra")?)?);
    let b = match &doc.target {
        Some(t) => Arc::new(algebra_from_spec(ring, t)?),
        None => a.clone(),
    };
    Ok(Loaded { ring, a, b })
}

fn algebra_reports(name: &str, alg: &AInftyAlgebra) -> Result<Vec<Report>> {
    let mut a = verify_ainfty(alg)?;
    a.subject = format!("{name}: {}", a.subject);
    let mut i = verify_involution(alg)?;
    i.subject = format!("{name}: {}", i.subject);
    Ok(vec![a, i])
}

fn named(mut r: Report, name: &str) -> Report {
    r.subject = format!("{name}: {}", r.subject);
    r
}

fn cmd_verify(cli: &Cli, doc: &Document) -> Result<Outcome> {
    let mut reports = Vec::new();
    let (n, _) = job_window(cli.truncate, cli.degrees)?;
    if doc.algebra.is_some() {
        let l = load_algebras(cli, doc)?;
        reports.extend(algebra_reports("A", &l.a)?);
        let a_ok = reports.iter().all(Report::passed);
        if a_ok {
            let m = build_tensor_df(&l.a, n)?;
            reports.push(named(verify_df_module(&m.df)?, &format!("M(A), N = {n}")));
        }
        if doc.target.is_some() {
            reports.extend(algebra_reports("B", &l.b)?);
        }
        let f = doc.morphism.as_ref().map(|s| components_from_spec(l.ring, &l.a, &l.b, s, "morphism")).transpose()?;
        let g = doc.inverse.as_ref().map(|s| components_from_spec(l.ring, &l.b, &l.a, s, "inverse")).transpose()?;
        let f = f.map(|c| AInftyMorphism::new(l.a.clone(), l.b.clone(), c)).transpose()?;
        let g = g.map(|c| AInftyMorphism::new(l.b.clone(), l.a.clone(), c)).transpose()?;
        if let Some(f) = &f {
            reports.push(named(verify_ainfty_morphism(f)?, "f"));
        }
        if let Some(g) = &g {
            reports.push(named(verify_ainfty_morphism(g)?, "g"));
        }
        reports.extend(witness_reports(l.ring, &l, f.as_ref(), g.as_ref(), doc)?);
    }
    if let Some(ms) = &doc.module {
        let ring = doc.ring(cli.ring)?;
        let x = Arc::new(module_from_spec(ring, ms)?);
        reports.push(named(verify_df_module(&x)?, "X"));
        let y = match &doc.target_module {
            Some(t) => {
                let y = Arc::new(module_from_spec(ring, t)?);
                reports.push(named(verify_df_module(&y)?, "Y"));
                y
            }
            None => x.clone(),
        };
        if let Some(fs) = &doc.df_morphism {
            let f = df_morphism_from_spec(&x, &y, fs)?;
            reports.push(named(verify_df_morphism(&f)?, "f"));
            if let Some(hs) = &doc.df_homotopy {
                let g = df_morphism_from_spec(&x, &y, &hs.to)?;
                reports.push(named(verify_df_morphism(&g)?, "g"));
                let fam = family_from_spec(
                    ring,
                    FamilyKind::Homotopy,
                    &x.carrier,
                    &y.carrier,
                    &hs.components,
                    "homotopy component",
                )?;
                let h = DFHomotopy::new(f, g, fam)?;
                reports.push(named(verify_df_homotopy(&h)?, "h"));
            }
        } else if doc.df_homotopy.is_some() {
            return Err(Error::Parse("\"df_homotopy\" needs \"df_morphism\"".into()));
        }
    }
    if reports.is_empty() {
        return Err(Error::Parse("nothing to verify: give \"algebra\" or \"module\"".into()));
    }
    Ok(render_reports(cli, "verify", &reports, None))
}

/// Reports for `homotopy` (1_A ≃ g∘f) and `inverse_homotopy` (1_B ≃ f∘g).
fn witness_reports(
    ring: RingSpec,
    l: &Loaded,
    f: Option<&AInftyMorphism>,
    g: Option<&AInftyMorphism>,
    doc: &Document,
) -> Result<Vec<Report>> {
    let mut out = Vec::new();
    for (spec, name, first, second, base) in
        [(&doc.homotopy, "homotopy", f, g, &l.a), (&doc.inverse_homotopy, "inverse_homotopy", g, f, &l.b)]
    {
        let Some(spec) = spec else { continue };
        let (Some(first), Some(second)) = (first, second) else {
            return Err(Error::Parse(format!("\"{name}\" needs both \"morphism\" and \"inverse\"")));
        };
        let comp = compose_ainfty(second, first)?;
        let c = components_from_spec(ring, base, base, spec, name)?;
        let h = AInftyHomotopy::new(AInftyMorphism::identity(base.clone()), comp, c)?;
        out.push(named(verify_ainfty_homotopy(&h)?, name));
    }
    Ok(out)
}

#[derive(Serialize)]
struct HomologyReport<'a> {
    command: &'static str,
    truncation: usize,
    #[serde(flatten)]
    result: &'a HomologyResult,
}

fn render_homology(h: &HomologyResult, n: usize) -> String {
    let mut s = String::new();
    let label = match h.kind {
        HomologyKind::Cyclic => "HC",
        HomologyKind::Dihedral => "HD",
    };
    let bound = h.certified_bound.map_or("none".to_string(), |b| b.to_string());
    let _ = writeln!(s, "{label} over {} (truncation N = {n}, certified through degree {bound})", h.ring);
    for d in &h.degrees {
        let _ = write!(s, "degree {}: rank {}", d.degree, d.rank);
        if !d.torsion.is_empty() {
            let t: Vec<String> = d.torsion.iter().map(|x| format!("Z/{x}")).collect();
            let _ = write!(s, ", torsion {}", t.join(" + "));
        }
        let _ = writeln!(s, " (chains {})", d.chain_rank);
    }
    s
}

/// The DF module the homology commands work on: M(A) for an algebra
/// input, the module itself otherwise.
fn input_module(cli: &Cli, doc: &Document, n: usize) -> Result<Arc<DFModule>> {
    if doc.algebra.is_some() {
        let l = load_algebras(cli, doc)?;
        return Ok(build_tensor_df(&l.a, n)?.df);
    }
    let ring = doc.ring(cli.ring)?;
    let x = module_from_spec(ring, section(&doc.module, "algebra\" or \"module")?)?;
    let rep = verify_df_module(&x)?;
    if !rep.passed() {
        return Err(Error::Unverified(rep.to_string()));
    }
    Ok(Arc::new(x))
}

fn cmd_homology(cli: &Cli, doc: &Document) -> Result<Outcome> {
    let (n, degrees) = job_window(cli.truncate, cli.degrees)?;
    let x = input_module(cli, doc, n)?;
    let tot = total_complex(&x, cli.kind.into(), n - 1)?;
    let h = homology(&tot, degrees)?;
    let text = match cli.format {
        Format::Text => render_homology(&h, n),
        Format::Json => json(&HomologyReport { command: "homology", truncation: n, result: &h }),
    };
    Ok(Outcome { code: 0, text })
}

fn render_induced(map: &InducedHomologyMap, kind: HomologyKind, n: usize, certified: Option<usize>) -> String {
    let mut s = String::new();
    let label = match kind {
        HomologyKind::Cyclic => "HC(f)",
        HomologyKind::Dihedral => "HD(f)",
    };
    let bound = certified.map_or("none".to_string(), |b| b.to_string());
    let _ = writeln!(s, "{label} over {} (truncation N = {n}, certified through degree {bound})", map.ring);
    for d in &map.degrees {
        let verdict = if d.isomorphism { "isomorphism" } else { "not an isomorphism" };
        let _ = write!(s, "degree {}: rank {} -> rank {}, {verdict}", d.degree, d.source.rank, d.target.rank);
        if let Some(m) = &d.matrix {
            let _ = write!(s, ", matrix {}", matrix_text(m));
        }
        let _ = writeln!(s);
    }
    s
}

fn matrix_text(m: &SparseMatrix) -> String {
    let rows: Vec<String> = m
        .to_dense()
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")))
        .collect();
    format!("[{}]", rows.join(" "))
}

#[derive(Serialize)]
struct InducedJson {
    degree: usize,
    source: crate::complexes::HomologyDegree,
    target: crate::complexes::HomologyDegree,
    matrix: Option<Vec<Vec<String>>>,
    isomorphism: bool,
}

fn induced_json(
    command: &str,
    map: &InducedHomologyMap,
    n: usize,
    certified: Option<usize>,
    extra: Vec<Report>,
) -> String {
    let degrees: Vec<InducedJson> = map
        .degrees
        .iter()
        .map(|d| InducedJson {
            degree: d.degree,
            source: d.source.clone(),
            target: d.target.clone(),
            matrix: d
                .matrix
                .as_ref()
                .map(|m| m.to_dense().iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect()),
            isomorphism: d.isomorphism,
        })
        .collect();
    json(&serde_json::json!({
        "command": command,
        "ring": map.ring.to_string(),
        "truncation": n,
        "certified_bound": certified,
        "isomorphism": map.is_isomorphism(),
        "degrees": degrees,
        "reports": extra,
    }))
}

fn induced_on_homology(
    cli: &Cli,
    f: &AInftyMorphism,
    n: usize,
    degrees: RangeInclusive<usize>,
) -> Result<(InducedHomologyMap, Option<usize>)> {
    let ma: TensorModule = build_tensor_df(&f.source, n)?;
    let mb: TensorModule = build_tensor_df(&f.target, n)?;
    let mf = induce_df_morphism(f, &ma, &mb)?;
    let kind: HomologyKind = cli.kind.into();
    let ta = total_complex(&ma.df, kind, n - 1)?;
    let tb = total_complex(&mb.df, kind, n - 1)?;
    let cf = induce_bicomplex_map(&mf, &ta, &tb)?;
    let map = induced_homology_map(&ta, &tb, &cf, degrees)?;
    Ok((map, ta.certified_bound))
}

fn cmd_induced_map(cli: &Cli, doc: &Document) -> Result<Outcome> {
    let (n, degrees) = job_window(cli.truncate, cli.degrees)?;
    let l = load_algebras(cli, doc)?;
    let c = components_from_spec(l.ring, &l.a, &l.b, section(&doc.morphism, "morphism")?, "morphism")?;
    let f = AInftyMorphism::new(l.a.clone(), l.b.clone(), c)?;
    let (map, cert) = induced_on_homology(cli, &f, n, degrees)?;
    let text = match cli.format {
        Format::Text => render_induced(&map, cli.kind.into(), n, cert),
        Format::Json => induced_json("induced-map", &map, n, cert, Vec::new()),
    };
    Ok(Outcome { code: 0, text })
}

fn cmd_invariance_check(cli: &Cli, doc: &Document) -> Result<Outcome> {
    let (n, degrees) = job_window(cli.truncate, cli.degrees)?;
    let l = load_algebras(cli, doc)?;
    let fc = components_from_spec(l.ring, &l.a, &l.b, section(&doc.morphism, "morphism")?, "morphism")?;
    let gc = components_from_spec(l.ring, &l.b, &l.a, section(&doc.inverse, "inverse")?, "inverse")?;
    section(&doc.homotopy, "homotopy")?;
    section(&doc.inverse_homotopy, "inverse_homotopy")?;
    let f = AInftyMorphism::new(l.a.clone(), l.b.clone(), fc)?;
    let g = AInftyMorphism::new(l.b.clone(), l.a.clone(), gc)?;
    let mut reports = algebra_reports("A", &l.a)?;
    reports.extend(algebra_reports("B", &l.b)?);
    reports.push(named(verify_ainfty_morphism(&f)?, "f"));
    reports.push(named(verify_ainfty_morphism(&g)?, "g"));
    reports.extend(witness_reports(l.ring, &l, Some(&f), Some(&g), doc)?);
    if !reports.iter().all(Report::passed) {
        return Ok(render_reports(cli, "invariance-check", &reports, None));
    }
    let (map, cert) = induced_on_homology(cli, &f, n, degrees)?;
    let code = if map.is_isomorphism() { 0 } else { 1 };
    let text = match cli.format {
        Format::Text => {
            let mut s: String = reports.iter().map(|r| r.to_string()).collect();
            s.push_str(&render_induced(&map, cli.kind.into(), n, cert));
            let _ = writeln!(s, "{}", if code == 0 { "invariance holds" } else { "invariance fails" });
            s
        }
        Format::Json => induced_json("invariance-check", &map, n, cert, reports),
    };
    Ok(Outcome { code, text })
}

/// "(i,j)", "i,j", "(0,2)" or "()". Returns the tuple, either symbolic
/// names or a concrete strictly increasing index tuple.
pub enum ParsedTuple {
    Names(Vec<String>),
    Concrete(IndexTuple),
}

pub fn parse_tuple(s: &str) -> Result<ParsedTuple> {
    let inner = s.trim();
    let inner = inner.strip_prefix('(').map_or(Ok(inner), |r| {
        r.strip_suffix(')').ok_or_else(|| Error::Tuple(format!("unbalanced parentheses in {s:?}")))
    })?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if inner.split(',').filter(|p| p.trim().is_empty()).count() > usize::from(parts.is_empty()) {
        return Err(Error::Tuple(format!("empty entry in {s:?}")));
    }
    if parts.iter().all(|p| p.parse::<usize>().is_ok()) {
        return Ok(ParsedTuple::Concrete(IndexTuple::new(parts.iter().map(|p| p.parse().unwrap()).collect())?));
    }
    if let Some(bad) = parts.iter().find(|p| !p.chars().all(|c| c.is_alphanumeric() || c == '_')) {
        return Err(Error::Tuple(format!("malformed index {bad:?}")));
    }
    for (i, p) in parts.iter().enumerate() {
        if parts[..i].contains(p) {
            return Err(Error::Tuple(format!("repeated index {p:?}")));
        }
    }
    Ok(ParsedTuple::Names(parts.iter().map(|p| p.to_string()).collect()))
}

pub fn expand(kind: ExpandKind, tuple: &str) -> Result<String> {
    let (expr, concrete): (FormalExpression, Option<IndexTuple>) = match parse_tuple(tuple)? {
        ParsedTuple::Concrete(t) => {
            let e = match kind {
                ExpandKind::Face => expand_face_relation(&t)?,
                ExpandKind::Morphism => expand_morphism_relation(&t),
                ExpandKind::Composition => expand_composition(&t),
                ExpandKind::Homotopy => expand_homotopy_relation(&t),
            };
            (e, Some(t))
        }
        ParsedTuple::Names(names) => {
            let k = names.len();
            let e = match kind {
                ExpandKind::Face if k == 0 => return Err(Error::Tuple("the face relation needs k ≥ 1".into())),
                ExpandKind::Face => face_relation(k),
                ExpandKind::Morphism => morphism_relation(k),
                ExpandKind::Composition => composition(k),
                ExpandKind::Homotopy => homotopy_relation(k),
            };
            return Ok(e.render(&names));
        }
    };
    let t = concrete.expect("concrete branch");
    Ok(if t.is_empty() { expr.render(&default_names(0)) } else { expr.render_concrete(&t) })
}

fn cmd_expand(cli: &Cli, kind: ExpandKind, tuple: &str) -> Result<Outcome> {
    let e = expand(kind, tuple)?;
    let text = match cli.format {
        Format::Text => format!("{e}\n"),
        Format::Json => {
            let k = format!("{kind:?}").to_lowercase();
            json(&serde_json::json!({ "command": "expand", "kind": k, "tuple": tuple, "expression": e }))
        }
    };
    Ok(Outcome { code: 0, text })
}
