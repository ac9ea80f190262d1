//! Dihedral modules with ∞-simplicial faces, their morphisms and homotopies:
//! exhaustive verification of every relation inside the window, composition,
//! identities and the algebra of homotopies.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactlin::RingSpec;
use crate::graded::{
    same_module, ComponentFamily, FamilyKind, FreeBigradedModule, GradedMap, IndexTuple, OperatorFamily, OperatorKind,
};
use crate::report::Report;
use crate::sface::{
    composition, d_bracket, evaluate_expression, homotopy_relation, morphism_relation, record_difference,
    verify_finfty, Bindings,
};

/// (X, d, ∂, t, r).
#[derive(Clone, Debug)]
pub struct DFModule {
    pub carrier: Arc<FreeBigradedModule>,
    pub ring: RingSpec,
    pub d: GradedMap,
    pub faces: ComponentFamily,
    pub t: OperatorFamily,
    pub r: OperatorFamily,
}

fn check_endo(
    name: &str,
    m: &GradedMap,
    x: &Arc<FreeBigradedModule>,
    ring: RingSpec,
    bidegree: (i64, i64),
) -> Result<()> {
    if !same_module(m.source(), x) || !same_module(m.target(), x) {
        return Err(Error::Incompatible(format!("{name} does not act on the carrier")));
    }
    if m.ring() != ring {
        return Err(Error::RingMismatch(ring.to_string(), m.ring().to_string()));
    }
    if m.bidegree() != bidegree {
        return Err(Error::Dimension(format!("{name} has bidegree {:?}, expected {bidegree:?}", m.bidegree())));
    }
    Ok(())
}

impl DFModule {
    /// Shape checks only; the relations are checked by [`verify_df_module`].
    pub fn new(
        carrier: Arc<FreeBigradedModule>,
        ring: RingSpec,
        d: GradedMap,
        faces: ComponentFamily,
        t: GradedMap,
        r: GradedMap,
    ) -> Result<Self> {
        check_endo("d", &d, &carrier, ring, (0, -1))?;
        check_endo("t", &t, &carrier, ring, (0, 0))?;
        check_endo("r", &r, &carrier, ring, (0, 0))?;
        if faces.kind() != FamilyKind::Face
            || !same_module(faces.source(), &carrier)
            || !same_module(faces.target(), &carrier)
        {
            return Err(Error::Incompatible("face family does not act on the carrier".into()));
        }
        if faces.ring() != ring {
            return Err(Error::RingMismatch(ring.to_string(), faces.ring().to_string()));
        }
        Ok(DFModule {
            carrier,
            ring,
            d,
            faces,
            t: OperatorFamily::new(OperatorKind::CyclicT, t)?,
            r: OperatorFamily::new(OperatorKind::DihedralR, r)?,
        })
    }

    /// Lifts a strict dihedral module with simplicial faces ∂_i commuting
    /// with d: ∂_(i) = (−1)^m ∂_i on X_{n,m}, higher faces zero.
    /// `strict` maps (n, i) to ∂_i restricted to level n, of bidegree (−1, 0).
    pub fn from_strict(
        carrier: Arc<FreeBigradedModule>,
        ring: RingSpec,
        d: GradedMap,
        strict: &BTreeMap<(usize, usize), GradedMap>,
        t: GradedMap,
        r: GradedMap,
    ) -> Result<Self> {
        let mut faces = ComponentFamily::new(FamilyKind::Face, carrier.clone(), carrier.clone(), ring);
        for (&(n, i), m) in strict {
            if m.bidegree() != (-1, 0) {
                return Err(Error::Dimension(format!("strict face ∂_{i} must have bidegree (-1,0)")));
            }
            let lifted = m.twist(|(_, deg)| deg.rem_euclid(2) == 1);
            faces.insert(n, IndexTuple::new(vec![i])?, lifted)?;
        }
        DFModule::new(carrier, ring, d, faces, t, r)
    }

    pub fn max_level(&self) -> usize {
        self.carrier.max_level()
    }
}

/// f : X → Y with components f_I of bidegree (−k, k).
#[derive(Clone, Debug)]
pub struct DFMorphism {
    pub source: Arc<DFModule>,
    pub target: Arc<DFModule>,
    pub components: ComponentFamily,
}

impl DFMorphism {
    pub fn new(source: Arc<DFModule>, target: Arc<DFModule>, components: ComponentFamily) -> Result<Self> {
        if components.kind() != FamilyKind::Morphism
            || !same_module(components.source(), &source.carrier)
            || !same_module(components.target(), &target.carrier)
        {
            return Err(Error::Incompatible("morphism components do not match the modules".into()));
        }
        if source.ring != target.ring || components.ring() != source.ring {
            return Err(Error::RingMismatch(source.ring.to_string(), target.ring.to_string()));
        }
        Ok(DFMorphism { source, target, components })
    }

    /// 1_X: identity at k = 0, zero above.
    pub fn identity(x: Arc<DFModule>) -> Self {
        let mut c = ComponentFamily::new(FamilyKind::Morphism, x.carrier.clone(), x.carrier.clone(), x.ring);
        let id = GradedMap::identity(x.carrier.clone(), x.ring);
        for n in 0..=x.max_level() {
            c.insert(n, IndexTuple::empty(), id.restrict_level(n)).expect("identity components are well formed");
        }
        DFMorphism { source: x.clone(), target: x, components: c }
    }
}

/// h : f ⇒ g with components h_I of bidegree (−k, k+1).
#[derive(Clone, Debug)]
pub struct DFHomotopy {
    pub f: DFMorphism,
    pub g: DFMorphism,
    pub components: ComponentFamily,
}

impl DFHomotopy {
    pub fn new(f: DFMorphism, g: DFMorphism, components: ComponentFamily) -> Result<Self> {
        if !Arc::ptr_eq(&f.source, &g.source) && !same_module(&f.source.carrier, &g.source.carrier) {
            return Err(Error::Incompatible("homotopy endpoints have different sources".into()));
        }
        if !same_module(&f.target.carrier, &g.target.carrier) {
            return Err(Error::Incompatible("homotopy endpoints have different targets".into()));
        }
        if components.kind() != FamilyKind::Homotopy
            || !same_module(components.source(), &f.source.carrier)
            || !same_module(components.target(), &f.target.carrier)
        {
            return Err(Error::Incompatible("homotopy components do not match the modules".into()));
        }
        Ok(DFHomotopy { f, g, components })
    }

    /// The zero homotopy f ⇒ f.
    pub fn zero(f: DFMorphism) -> Self {
        let c = ComponentFamily::new(
            FamilyKind::Homotopy,
            f.source.carrier.clone(),
            f.target.carrier.clone(),
            f.source.ring,
        );
        DFHomotopy { g: f.clone(), f, components: c }
    }
}

/// φ at level n composed after an operator at level n, and an operator at
/// level n − k after ψ.
fn op_after(op: &OperatorFamily, level: usize, phi: &GradedMap) -> Result<GradedMap> {
    GradedMap::compose(&op.at_level(level), phi)
}

/// The cyclic and dihedral relations shared by faces, morphism components and
/// homotopy components:
///   φ_I t_n = t_{n−k} φ_{I−1}                    (i₁ > 0)
///   φ_I t_n = (−1)^{k−1} φ_{(i₂−1,…,i_k−1,n)}    (i₁ = 0)
///   φ_I r_n = (−1)^{k(k−1)/2} r_{n−k} φ_{reflect(I)}
/// and at k = 0 plain commutation with t and r.
fn check_equivariance(
    report: &mut Report,
    prefix: &str,
    fam: &ComponentFamily,
    src: &DFModule,
    tgt: &DFModule,
    k_min: usize,
) -> Result<()> {
    let ring = fam.ring();
    let cyc = format!("{prefix}-cyclic");
    let dih = format!("{prefix}-dihedral");
    for n in 0..=src.max_level() {
        let t_n = src.t.at_level(n);
        let r_n = src.r.at_level(n);
        for k in k_min..=n {
            let zero = fam.zero_component(k);
            for tuple in IndexTuple::all_of_size(n, k) {
                let phi = fam.get(n, &tuple).unwrap_or(&zero);
                let lhs_t = GradedMap::compose(phi, &t_n)?;
                let rhs_t = if k == 0 {
                    op_after(&tgt.t, n, phi)?
                } else if tuple.as_slice()[0] > 0 {
                    let lowered = IndexTuple::new(tuple.as_slice().iter().map(|i| i - 1).collect())?;
                    op_after(&tgt.t, n - k, fam.get(n, &lowered).unwrap_or(&zero))?
                } else {
                    let mut v: Vec<usize> = tuple.as_slice()[1..].iter().map(|i| i - 1).collect();
                    v.push(n);
                    let wrapped = IndexTuple::new(v)?;
                    fam.get(n, &wrapped).unwrap_or(&zero).scale(&ring.sign(k as i64 - 1))
                };
                record_difference(report, &cyc, n, Some(&tuple), &GradedMap::sub(&lhs_t, &rhs_t)?);

                let lhs_r = GradedMap::compose(phi, &r_n)?;
                let rhs_r = if k == 0 {
                    op_after(&tgt.r, n, phi)?
                } else {
                    let refl = tuple.reflect(n);
                    let e = (k * (k - 1) / 2) as i64;
                    op_after(&tgt.r, n - k, fam.get(n, &refl).unwrap_or(&zero))?.scale(&ring.sign(e))
                };
                record_difference(report, &dih, n, Some(&tuple), &GradedMap::sub(&lhs_r, &rhs_r)?);
            }
        }
    }
    Ok(())
}

fn level_identity(x: &DFModule, n: usize) -> GradedMap {
    GradedMap::identity(x.carrier.clone(), x.ring).restrict_level(n)
}

/// Checks d² = 0, the operator relations, commutation of t and r with d,
/// the face relations and their compatibility with t and r.
pub fn verify_df_module(x: &DFModule) -> Result<Report> {
    let mut report = Report::new("dihedral module");
    for n in 0..=x.max_level() {
        let id = level_identity(x, n);
        let d_n = x.d.restrict_level(n);
        let t_n = x.t.at_level(n);
        let r_n = x.r.at_level(n);
        record_difference(&mut report, "differential-square", n, None, &GradedMap::compose(&x.d, &d_n)?);
        let mut tp = id.clone();
        for _ in 0..=n {
            tp = GradedMap::compose(&t_n, &tp)?;
        }
        record_difference(&mut report, "t-order", n, None, &GradedMap::sub(&tp, &id)?);
        let rr = GradedMap::compose(&r_n, &r_n)?;
        record_difference(&mut report, "r-order", n, None, &GradedMap::sub(&rr, &id)?);
        let rt = GradedMap::compose(&r_n, &t_n)?;
        let t_inv = x.t.power_of_t(n, -1)?;
        let tr = GradedMap::compose(&t_inv, &r_n)?;
        record_difference(&mut report, "r-t", n, None, &GradedMap::sub(&rt, &tr)?);
        let dt = GradedMap::sub(&GradedMap::compose(&x.d, &t_n)?, &GradedMap::compose(&t_n, &d_n)?)?;
        record_difference(&mut report, "d-t", n, None, &dt);
        let dr = GradedMap::sub(&GradedMap::compose(&x.d, &r_n)?, &GradedMap::compose(&r_n, &d_n)?)?;
        record_difference(&mut report, "d-r", n, None, &dr);
    }
    let fin = verify_finfty(&x.d, &x.faces)?;
    report.checks += fin.checks;
    report.violations.extend(fin.violations);
    check_equivariance(&mut report, "face", &x.faces, x, x, 1)?;
    Ok(report)
}

/// Checks d(f_I) = df_I − f_I d against the morphism relation and the
/// cyclic and dihedral conditions, for every tuple in the window.
pub fn verify_df_morphism(f: &DFMorphism) -> Result<Report> {
    let mut report = Report::new("dihedral morphism");
    let (x, y) = (&*f.source, &*f.target);
    let bindings = Bindings {
        source_faces: Some(&x.faces),
        target_faces: Some(&y.faces),
        f: Some(&f.components),
        ..Default::default()
    };
    for n in 0..=x.max_level() {
        let d_n = x.d.restrict_level(n);
        for k in 0..=n {
            let expr = morphism_relation(k);
            let zero = f.components.zero_component(k);
            for tuple in IndexTuple::all_of_size(n, k) {
                let phi = f.components.get(n, &tuple).unwrap_or(&zero);
                let lhs = d_bracket(&d_n, &y.d, phi, -1)?;
                let rhs = evaluate_expression(&expr, &bindings, &tuple, n)?;
                record_difference(&mut report, "morphism-coherence", n, Some(&tuple), &GradedMap::sub(&lhs, &rhs)?);
            }
        }
    }
    check_equivariance(&mut report, "morphism", &f.components, x, y, 0)?;
    Ok(report)
}

/// Checks d(h_I) = dh_I + h_I d against the homotopy relation for f ⇒ g and
/// the cyclic and dihedral conditions.
pub fn verify_df_homotopy(h: &DFHomotopy) -> Result<Report> {
    let mut report = Report::new("dihedral homotopy");
    let (x, y) = (&*h.f.source, &*h.f.target);
    let bindings = Bindings {
        source_faces: Some(&x.faces),
        target_faces: Some(&y.faces),
        f: Some(&h.f.components),
        g: Some(&h.g.components),
        h: Some(&h.components),
    };
    for n in 0..=x.max_level() {
        let d_n = x.d.restrict_level(n);
        for k in 0..=n {
            let expr = homotopy_relation(k);
            let zero = h.components.zero_component(k);
            for tuple in IndexTuple::all_of_size(n, k) {
                let phi = h.components.get(n, &tuple).unwrap_or(&zero);
                let lhs = d_bracket(&d_n, &y.d, phi, 1)?;
                let rhs = evaluate_expression(&expr, &bindings, &tuple, n)?;
                record_difference(&mut report, "homotopy-coherence", n, Some(&tuple), &GradedMap::sub(&lhs, &rhs)?);
            }
        }
    }
    check_equivariance(&mut report, "homotopy", &h.components, x, y, 0)?;
    Ok(report)
}

/// g∘f with components given by the composition formula.
pub fn compose_df(g: &DFMorphism, f: &DFMorphism) -> Result<DFMorphism> {
    if !same_module(&f.target.carrier, &g.source.carrier) {
        return Err(Error::Incompatible("compose_df: target of f is not the source of g".into()));
    }
    let x = &f.source;
    let mut comps = ComponentFamily::new(FamilyKind::Morphism, x.carrier.clone(), g.target.carrier.clone(), x.ring);
    let bindings = Bindings { f: Some(&f.components), g: Some(&g.components), ..Default::default() };
    for n in 0..=x.max_level() {
        for k in 0..=n {
            let expr = composition(k);
            for tuple in IndexTuple::all_of_size(n, k) {
                let m = evaluate_expression(&expr, &bindings, &tuple, n)?;
                comps.insert(n, tuple, m)?;
            }
        }
    }
    DFMorphism::new(f.source.clone(), g.target.clone(), comps)
}

/// −h : g ⇒ f.
pub fn homotopy_negate(h: &DFHomotopy) -> DFHomotopy {
    let ring = h.components.ring();
    DFHomotopy { f: h.g.clone(), g: h.f.clone(), components: h.components.scale(&ring.from_i64(-1)) }
}

/// h + H : f ⇒ p for h : f ⇒ g and H : g ⇒ p.
pub fn homotopy_add(h: &DFHomotopy, big: &DFHomotopy) -> Result<DFHomotopy> {
    if !h.g.components.differences(&big.f.components).is_empty() {
        return Err(Error::Incompatible("homotopy_add: endpoints do not match".into()));
    }
    Ok(DFHomotopy { f: h.f.clone(), g: big.g.clone(), components: h.components.add(&big.components)? })
}

/// True when two morphisms have identical components.
pub fn morphisms_equal(a: &DFMorphism, b: &DFMorphism) -> bool {
    a.components.differences(&b.components).is_empty()
}
