//! Conjugacy and centralizers of bisets with extra marked points, reduced
//! to a minimal-biset oracle and conjugacy of portraits.
//!
//! A bundle is a minimal biset with a portrait of its extra points; this is
//! the representative of the biset over the larger group modulo knitting.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::affine::{eval_2222, AffineElement};
use crate::error::{invalid, precondition, Error, Result};
use crate::nucleus::{nucleus_compute, Nucleus};
use crate::portrait::{portrait_conjugate, standard_minimal_portrait, ExpPortrait, MarkedDynamics};
use crate::shadow::{
    endo_preimage, portrait_conj_tor, portrait_orbit_tor, residue_mismatch, transport_portrait,
    SymbolicOrbitTor, TorPortrait,
};
use crate::tor::{minimal_tor_conjugacy, recognize_2222, tor_centralizer, ModGElement, TorBiset};
use crate::words::{forget, FreeWord, GroupHom, Signature};
use crate::wreath::{BisetElement, WreathBiset};

/// Budgets for the searches behind a reduction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub nucleus: usize,
    pub ball: usize,
    pub orbit: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            nucleus: crate::nucleus::DEFAULT_NUCLEUS_BUDGET,
            ball: crate::nucleus::DEFAULT_BALL_BUDGET,
            orbit: 10_000,
        }
    }
}

/// Decision procedures for minimal bisets over free groups.
pub trait ExpOracle {
    fn name(&self) -> &str;
    /// `phi` with `B^phi ≅ C`, if the bisets are conjugate.
    fn conjugacy(&self, b: &WreathBiset, c: &WreathBiset) -> Result<Option<GroupHom>>;
    /// Generators of the centralizer of `B` in the mapping class group.
    fn centralizer(&self, b: &WreathBiset) -> Result<Vec<GroupHom>>;
}

/// Oracle for hyperbolic rational maps with trivial centralizer: identical
/// recursions are conjugate by the identity, anything else is undecided.
#[derive(Clone, Copy, Debug, Default)]
pub struct TrivialExpOracle;

impl ExpOracle for TrivialExpOracle {
    fn name(&self) -> &str {
        "trivial-exp"
    }

    fn conjugacy(&self, b: &WreathBiset, c: &WreathBiset) -> Result<Option<GroupHom>> {
        if b == c {
            Ok(Some(GroupHom::identity(b.rank())))
        } else {
            Err(Error::OracleUnavailable(
                "trivial-exp decides identical recursions only".into(),
            ))
        }
    }

    fn centralizer(&self, _b: &WreathBiset) -> Result<Vec<GroupHom>> {
        Ok(Vec::new())
    }
}

/// The Tor backend is built in; the Exp backend needs an external oracle.
#[derive(Default)]
pub struct MinimalOracle {
    pub exp: Option<Box<dyn ExpOracle>>,
}

impl MinimalOracle {
    pub fn tor_only() -> Self {
        MinimalOracle { exp: None }
    }

    pub fn with_exp(oracle: Box<dyn ExpOracle>) -> Self {
        MinimalOracle { exp: Some(oracle) }
    }

    pub fn capabilities(&self) -> Vec<String> {
        let mut out = vec!["tor".to_string()];
        if let Some(o) = &self.exp {
            out.push(format!("exp:{}", o.name()));
        }
        out
    }

    fn exp(&self) -> Result<&dyn ExpOracle> {
        self.exp
            .as_deref()
            .ok_or_else(|| Error::OracleUnavailable("no oracle for minimal Exp bisets".into()))
    }
}

/// Minimal biset and portrait of a bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleData {
    Tor {
        biset: TorBiset,
        portrait: TorPortrait,
    },
    Exp {
        biset: WreathBiset,
        portrait: ExpPortrait,
    },
}

/// A minimal biset with the portrait induced by the extra points, and the
/// steps that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricBundle {
    pub data: BundleData,
    #[serde(default)]
    pub history: Vec<String>,
}

impl GeometricBundle {
    pub fn tor(biset: TorBiset, portrait: TorPortrait) -> Result<Self> {
        portrait.orbit.validate()?;
        Ok(GeometricBundle {
            data: BundleData::Tor { biset, portrait },
            history: Vec::new(),
        })
    }

    pub fn exp(biset: WreathBiset, portrait: ExpPortrait) -> Result<Self> {
        portrait.validate(&biset)?;
        Ok(GeometricBundle {
            data: BundleData::Exp { biset, portrait },
            history: Vec::new(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match &self.data {
            BundleData::Tor { portrait, .. } => portrait.orbit.validate(),
            BundleData::Exp { biset, portrait } => portrait.validate(biset),
        }
    }

    /// Names and images of the extra points.
    pub fn extra_dynamics(&self) -> (Vec<String>, Vec<String>) {
        match &self.data {
            BundleData::Tor { portrait, .. } => {
                let o = &portrait.orbit;
                (
                    o.names.clone(),
                    o.f.iter().map(|&j| o.names[j].clone()).collect(),
                )
            }
            BundleData::Exp { portrait, .. } => {
                let d = &portrait.dynamics;
                let pts = d.marked..d.len();
                (
                    d.names[pts.clone()].to_vec(),
                    pts.map(|c| d.names[d.fstar[c]].clone()).collect(),
                )
            }
        }
    }

    /// Bundle of `Push(s) ∘ f ∘ Push(t)` for a motion of the extra point
    /// `point`: `C_d = s B_d t`.
    pub fn push(&self, point: &str, s: &FreeWord, t: &FreeWord) -> Result<GeometricBundle> {
        let BundleData::Exp { biset, portrait } = &self.data else {
            return precondition("pushes are supported on the Exp backend");
        };
        let d = &portrait.dynamics;
        let c = d
            .index_of(point)
            .filter(|&c| !d.is_marked(c))
            .ok_or_else(|| Error::Invalid(format!("{point} is not an extra point")))?;
        let sig = biset.signature();
        let mut history = self.history.clone();
        let mut p = portrait.clone();
        p.reps[c] = portrait.reps[c]
            .iter()
            .map(|r| {
                let out = biset.right_mul(&r.left_mul(s), t);
                let lhs = if s.is_identity() {
                    format!("{}·{}", fmt_element(sig, r), fmt_word(sig, t))
                } else {
                    format!(
                        "{}·{}·{}",
                        fmt_word(sig, s),
                        fmt_element(sig, r),
                        fmt_word(sig, t)
                    )
                };
                history.push(format!("C_{point}: {lhs} → {}", fmt_element(sig, &out)));
                out
            })
            .collect();
        p.validate(biset)?;
        Ok(GeometricBundle {
            data: BundleData::Exp {
                biset: biset.clone(),
                portrait: p,
            },
            history,
        })
    }
}

fn subscript(s: &str) -> String {
    s.chars()
        .map(|ch| match ch {
            '-' => '₋',
            '0'..='9' => char::from_u32('₀' as u32 + ch.to_digit(10).expect("digit"))
                .expect("subscript digit"),
            _ => ch,
        })
        .collect()
}

fn gen_name(sig: &Signature, i: usize) -> String {
    let name = sig
        .point_of_generator(i)
        .map(|p| sig.names()[p].clone())
        .unwrap_or_else(|| i.to_string());
    if name.chars().all(|c| c == '-' || c.is_ascii_digit()) {
        format!("γ{}", subscript(&name))
    } else {
        format!("γ_{name}")
    }
}

/// A word in the peripheral generators, e.g. `γ₋₁⁻¹γ₀`.
pub fn fmt_word(sig: &Signature, w: &FreeWord) -> String {
    if w.is_identity() {
        return "1".into();
    }
    w.letters()
        .iter()
        .map(|&l| {
            let g = gen_name(sig, l.unsigned_abs() as usize);
            if l > 0 {
                g
            } else {
                format!("{g}⁻¹")
            }
        })
        .collect()
}

/// A biset element, e.g. `γ₀·x₂`.
pub fn fmt_element(sig: &Signature, b: &BisetElement) -> String {
    let x = format!("x{}", subscript(&b.letter.to_string()));
    if b.prefix.is_identity() {
        x
    } else {
        format!("{}·{x}", fmt_word(sig, &b.prefix))
    }
}

/// Erases the points `erased` (by name) from a recursion over `G~`: the
/// minimal biset is the pushed-forward recursion and the extra points keep
/// the pushed-forward subbisets of the minimal portrait of `G~`.
pub fn bundle_from_wreath(w: &WreathBiset, erased: &[String]) -> Result<GeometricBundle> {
    let sig = w.signature();
    let mut idx = Vec::new();
    for name in erased {
        idx.push(
            sig.index_of(name)
                .ok_or_else(|| Error::Invalid(format!("unknown point {name}")))?,
        );
    }
    idx.sort_unstable();
    idx.dedup();
    let (hom, target) = forget(sig, &idx)?;
    let keep: Vec<usize> = (1..=sig.rank())
        .filter(|&i| !idx.contains(&sig.point_of_generator(i).expect("free signature")))
        .collect();
    let small = w.map_states(target.clone(), &keep, &hom)?;
    let full = standard_minimal_portrait(w)?;
    let kept: Vec<usize> = (0..sig.len()).filter(|p| !idx.contains(p)).collect();
    let order: Vec<usize> = kept.iter().chain(idx.iter()).copied().collect();
    let pos = |p: usize| {
        order
            .iter()
            .position(|&q| q == p)
            .expect("every point is ordered")
    };
    let names = order.iter().map(|&p| sig.names()[p].clone()).collect();
    let fstar = order.iter().map(|&p| pos(full.dynamics.fstar[p])).collect();
    let deg = order.iter().map(|&p| full.dynamics.deg[p]).collect();
    let dynamics = MarkedDynamics::new(names, kept.len(), fstar, deg)?;
    let push = |b: &BisetElement| -> Result<BisetElement> {
        Ok(BisetElement::new(hom.apply(&b.prefix)?, b.letter))
    };
    let mut history = vec![format!("forget {}", erased.join(", "))];
    if target.len() == 4
        && target
            .orders()
            .iter()
            .all(|o| *o == crate::words::Order::Finite(2))
    {
        return tor_bundle_from_forgotten(&small, &dynamics, &full, &idx, history);
    }
    let min = standard_minimal_portrait(&small)?;
    let mut reps = min.reps.clone();
    for &p in &idx {
        let pushed: Vec<BisetElement> = full.reps[p].iter().map(push).collect::<Result<_>>()?;
        history.push(format!(
            "B_{} = {{{}}}",
            sig.names()[p],
            pushed
                .iter()
                .map(|b| fmt_element(&target, b))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        reps.push(pushed);
    }
    // the pushed subbisets of kept points are those of the minimal portrait
    for (k, &p) in kept.iter().enumerate() {
        let pushed: Vec<BisetElement> = full.reps[p].iter().map(push).collect::<Result<_>>()?;
        if !min.same_subbiset(&small, k, &pushed) {
            return Err(Error::Invalid(format!(
                "pushed subbiset of {} is not minimal",
                sig.names()[p]
            )));
        }
    }
    let portrait = ExpPortrait {
        dynamics,
        ell: min.ell,
        reps,
    };
    portrait.validate(&small)?;
    Ok(GeometricBundle {
        data: BundleData::Exp {
            biset: small,
            portrait,
        },
        history,
    })
}

/// Affine images `a_x` of the basis with `x -> b0 a_x` a biset isomorphism
/// onto the recognized `B_{M^v}`.
pub fn tor_basis(
    w: &WreathBiset,
    b: &TorBiset,
    assignment: &[AffineElement],
) -> Result<Vec<AffineElement>> {
    let sig = w.signature();
    let eval = |g: &FreeWord| eval_2222(sig, assignment, g);
    let d = w.degree();
    let bound = 3;
    for e in [crate::affine::Sign::Plus, crate::affine::Sign::Minus] {
        for x0 in -bound..=bound {
            for y0 in -bound..=bound {
                let mut a: Vec<Option<AffineElement>> = vec![None; d];
                a[0] = Some(AffineElement::new([x0, y0], e));
                let mut stack = vec![1usize];
                let mut ok = true;
                'walk: while let Some(x) = stack.pop() {
                    let ax = a[x - 1].expect("assigned");
                    for i in 1..=sig.rank() {
                        let g = FreeWord::generator(i as i32);
                        let (s, y) = w.state_and_perm(&g, x);
                        // b0 a_x g = M^v(s) b0 a_y
                        let want = b
                            .endo()
                            .apply(&eval(&s)?)
                            .inverse()
                            .mul(&ax)
                            .mul(&eval(&g)?);
                        match a[y - 1] {
                            Some(v) if v != want => {
                                ok = false;
                                break 'walk;
                            }
                            Some(_) => {}
                            None => {
                                a[y - 1] = Some(want);
                                stack.push(y);
                            }
                        }
                    }
                }
                if !ok || a.iter().any(|v| v.is_none()) {
                    continue;
                }
                let a: Vec<AffineElement> = a.into_iter().map(|v| v.expect("assigned")).collect();
                // distinct left cosets of M^v(G)
                let distinct = (0..d).all(|i| {
                    (i + 1..d)
                        .all(|j| endo_preimage(b.endo(), &a[i].mul(&a[j].inverse())).is_none())
                });
                if distinct {
                    return Ok(a);
                }
            }
        }
    }
    invalid("no affine basis realizes the recursion")
}

fn tor_bundle_from_forgotten(
    small: &WreathBiset,
    dynamics: &MarkedDynamics,
    full: &ExpPortrait,
    erased: &[usize],
    mut history: Vec<String>,
) -> Result<GeometricBundle> {
    let rec = recognize_2222(small)?;
    let basis = tor_basis(small, &rec.biset, &rec.assignment)?;
    let sig = small.signature();
    let (j, _) = dynamics.split();
    if !j.is_empty() {
        return precondition("Tor bundles support extra points that never reach the marked set");
    }
    let (hom, _) = forget(&full_signature_names(full, erased)?, erased)?;
    let mut elements = Vec::new();
    for &p in erased {
        let b = &full.reps[p][0];
        let g = eval_2222(sig, &rec.assignment, &hom.apply(&b.prefix)?)?;
        elements.push(rec.biset.endo().apply(&g).mul(&basis[b.letter - 1]));
    }
    let names: Vec<String> = dynamics.names[dynamics.marked..].to_vec();
    let f = (dynamics.marked..dynamics.len())
        .map(|c| dynamics.fstar[c] - dynamics.marked)
        .collect();
    history.push(format!(
        "recognized M = {}, v = {:?}",
        rec.biset.m(),
        rec.biset.v()
    ));
    let orbit = SymbolicOrbitTor::new(names, f, elements)?;
    Ok(GeometricBundle {
        data: BundleData::Tor {
            biset: rec.biset,
            portrait: TorPortrait { orbit },
        },
        history,
    })
}

fn full_signature_names(full: &ExpPortrait, _erased: &[usize]) -> Result<Signature> {
    let names: Vec<&str> = full.dynamics.names.iter().map(|s| s.as_str()).collect();
    Signature::free(&names)
}

/// Mapping-class part of a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingClass {
    Tor(ModGElement),
    Exp(GroupHom),
}

/// Portrait conjugator entry of a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointConjugator {
    Tor(AffineElement),
    Exp(FreeWord),
}

/// A conjugacy `phi` of minimal bisets with a portrait conjugator, and the
/// steps that produced them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub phi: MappingClass,
    pub ell: BTreeMap<String, PointConjugator>,
    pub verified: bool,
    pub transcript: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Yes { certificate: Certificate },
    No { invariant: String },
}

fn no(s: &str) -> Verdict {
    Verdict::No {
        invariant: s.to_string(),
    }
}

/// Decides conjugacy of two bundles.
pub fn reduce_conjugacy(
    b1: &GeometricBundle,
    b2: &GeometricBundle,
    oracle: &MinimalOracle,
    budgets: &Budgets,
) -> Result<Verdict> {
    b1.validate()?;
    b2.validate()?;
    if b1.extra_dynamics() != b2.extra_dynamics() {
        return Ok(no("peripheral-mismatch"));
    }
    let mut transcript: Vec<String> = b1.history.iter().chain(&b2.history).cloned().collect();
    match (&b1.data, &b2.data) {
        (
            BundleData::Tor {
                biset: b,
                portrait: p,
            },
            BundleData::Tor {
                biset: c,
                portrait: q,
            },
        ) => {
            let conj = minimal_tor_conjugacy(b, c)?;
            let Some(phi) = conj.conjugator else {
                return Ok(no(conj
                    .reason
                    .as_deref()
                    .unwrap_or("minimal-not-conjugate")));
            };
            transcript.push(format!(
                "minimal bisets conjugate by M = {}, v = {:?}",
                phi.matrix(),
                phi.endo().v
            ));
            let moved = transport_portrait(b, &phi, c, p)?;
            let orbit = portrait_orbit_tor(c, &moved, budgets.orbit)?;
            transcript.push(format!(
                "Z(B)-orbit of the portrait class has {} element(s)",
                orbit.orbit.len()
            ));
            for (k, cand) in orbit.orbit.iter().enumerate() {
                if let Some(ell) = portrait_conj_tor(c, cand, q)? {
                    let psi = orbit_path(&orbit, c, &moved, k)?;
                    let total = phi.compose(&psi);
                    let certificate = tor_certificate(b, c, p, q, total, ell, transcript)?;
                    return Ok(Verdict::Yes { certificate });
                }
            }
            if orbit.orbit.len() == 1 && residue_mismatch(c, &moved, q)? {
                return Ok(no("shadow-residue-mismatch"));
            }
            Ok(no("portrait-not-conjugate"))
        }
        (
            BundleData::Exp {
                biset: b,
                portrait: p,
            },
            BundleData::Exp {
                biset: c,
                portrait: q,
            },
        ) => {
            if p.dynamics != q.dynamics {
                return Ok(no("peripheral-mismatch"));
            }
            let ex = oracle.exp()?;
            let Some(phi) = ex.conjugacy(b, c)? else {
                return Ok(no("minimal-not-conjugate"));
            };
            if !phi.is_identity() || !ex.centralizer(b)?.is_empty() {
                return Err(Error::OracleUnavailable(
                    "portrait transport needs an identity conjugator and trivial centralizer"
                        .into(),
                ));
            }
            transcript.push(format!(
                "{}: minimal bisets equal, trivial centralizer",
                ex.name()
            ));
            let n = nucleus_if_needed(b, &p.dynamics, budgets.nucleus)?;
            let Some(g) = portrait_conjugate(b, p, q, n.as_ref(), budgets.ball)? else {
                return Ok(no("portrait-not-conjugate"));
            };
            let sig = b.signature();
            for c in p.dynamics.marked..p.dynamics.len() {
                if !g[c].is_identity() {
                    transcript.push(format!(
                        "ℓ_{} = {}",
                        p.dynamics.names[c],
                        fmt_word(sig, &g[c])
                    ));
                }
            }
            let verified = p.act(b, &g).same_as(b, q);
            if !verified {
                return Err(Error::Invalid(
                    "portrait conjugator failed verification".into(),
                ));
            }
            transcript.push("portraits conjugate; certificate verified".into());
            let ell = p
                .dynamics
                .names
                .iter()
                .cloned()
                .zip(g.into_iter().map(PointConjugator::Exp))
                .collect();
            Ok(Verdict::Yes {
                certificate: Certificate {
                    phi: MappingClass::Exp(phi),
                    ell,
                    verified,
                    transcript,
                },
            })
        }
        _ => invalid("bundles use different backends"),
    }
}

/// Nucleus of `b` when some extra point never reaches the marked set.
pub fn nucleus_if_needed(
    b: &WreathBiset,
    d: &MarkedDynamics,
    budget: usize,
) -> Result<Option<Nucleus>> {
    let (_, i) = d.split();
    if i.is_empty() {
        Ok(None)
    } else {
        nucleus_compute(b, budget).map(Some)
    }
}

/// Element of `Z(C)` carrying the base class to orbit element `k`.
fn orbit_path(
    orbit: &crate::shadow::PortraitOrbit,
    c: &TorBiset,
    base: &TorPortrait,
    k: usize,
) -> Result<ModGElement> {
    // breadth-first search over generator words, matching by class
    if k == 0 {
        return Ok(ModGElement::identity());
    }
    let target = &orbit.orbit[k];
    let mut frontier = vec![(ModGElement::identity(), base.clone())];
    let mut seen: HashSet<ModGElement> = HashSet::from([ModGElement::identity()]);
    for _ in 0..orbit.orbit.len() {
        let mut next = Vec::new();
        for (psi, p) in &frontier {
            for g in &orbit.generators {
                for h in [*g, g.inverse()] {
                    let img = transport_portrait(c, &h, c, p)?;
                    let total = psi.compose(&h);
                    if portrait_conj_tor(c, &img, target)?.is_some() {
                        return Ok(total);
                    }
                    if seen.insert(total) {
                        next.push((total, img));
                    }
                }
            }
        }
        frontier = next;
    }
    Err(Error::Invalid(
        "orbit element not reached from the base class".into(),
    ))
}

fn tor_certificate(
    b: &TorBiset,
    c: &TorBiset,
    p: &TorPortrait,
    q: &TorPortrait,
    phi: ModGElement,
    _hint: Vec<AffineElement>,
    mut transcript: Vec<String>,
) -> Result<Certificate> {
    let moved = transport_portrait(b, &phi, c, p)?;
    let ell = portrait_conj_tor(c, &moved, q)?
        .ok_or_else(|| Error::Invalid("composite mapping class fails verification".into()))?;
    let verified = moved.orbit.conjugate(c, &ell) == q.orbit;
    if !verified {
        return Err(Error::Invalid(
            "portrait conjugator fails verification".into(),
        ));
    }
    transcript.push("portraits conjugate; certificate verified".into());
    let ell = q
        .orbit
        .names
        .iter()
        .cloned()
        .zip(ell.into_iter().map(PointConjugator::Tor))
        .collect();
    Ok(Certificate {
        phi: MappingClass::Tor(phi),
        ell,
        verified,
        transcript,
    })
}

/// Stabilizer of the portrait class in `Z(B)`, with its index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralizerReport {
    pub generators: Vec<MappingClass>,
    pub centralizer_generators: Vec<MappingClass>,
    pub orbit_size: usize,
    pub index: usize,
}

/// Stabilizer of the portrait class: generators and the index in `Z(B)`.
pub fn reduce_centralizer(
    b: &GeometricBundle,
    oracle: &MinimalOracle,
    budgets: &Budgets,
) -> Result<CentralizerReport> {
    b.validate()?;
    match &b.data {
        BundleData::Tor { biset, portrait } => {
            let orbit = portrait_orbit_tor(biset, portrait, budgets.orbit)?;
            if !orbit.verify(biset)? {
                return Err(Error::Invalid(
                    "stabilizer element moves the portrait class".into(),
                ));
            }
            let z = tor_centralizer(biset)?;
            Ok(CentralizerReport {
                generators: orbit
                    .stabilizer
                    .iter()
                    .copied()
                    .map(MappingClass::Tor)
                    .collect(),
                centralizer_generators: z.into_iter().map(MappingClass::Tor).collect(),
                orbit_size: orbit.orbit.len(),
                index: orbit.orbit.len(),
            })
        }
        BundleData::Exp { biset, .. } => {
            let z = oracle.exp()?.centralizer(biset)?;
            if !z.is_empty() {
                return Err(Error::OracleUnavailable(
                    "portrait action of a nontrivial Exp centralizer".into(),
                ));
            }
            Ok(CentralizerReport {
                generators: Vec::new(),
                centralizer_generators: Vec::new(),
                orbit_size: 1,
                index: 1,
            })
        }
    }
}

/// How a knitting iteration ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KnittingEnd {
    Trivial,
    NotClosed,
}

/// Iterated lifts of a push tuple through the biset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnittingTranscript {
    pub iterations: usize,
    pub end: KnittingEnd,
    pub steps: Vec<Vec<String>>,
}

/// Push tuple at the extra points of a bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PushTuple {
    Tor(Vec<AffineElement>),
    Exp(Vec<FreeWord>),
}

/// Lifts `(g_d)` through the bundle, `b_d g_{f(d)} = h_d b_d`, until every
/// component is trivial or some lift no longer closes up.
pub fn knitting_trivialize(
    b: &GeometricBundle,
    tuple: &PushTuple,
    budget: usize,
) -> Result<KnittingTranscript> {
    let mut steps = Vec::new();
    match (&b.data, tuple) {
        (BundleData::Tor { biset, portrait }, PushTuple::Tor(g)) => {
            let o = &portrait.orbit;
            if g.len() != o.len() {
                return invalid("one push per extra point is required");
            }
            let mut cur = g.clone();
            steps.push(cur.iter().map(|x| x.to_string()).collect());
            for it in 0..=budget {
                if cur.iter().all(|x| x.is_identity()) {
                    return Ok(KnittingTranscript {
                        iterations: it,
                        end: KnittingEnd::Trivial,
                        steps,
                    });
                }
                // b0 x g = h b0 x  gives  M^v(h) = x g x^-1
                let next: Option<Vec<AffineElement>> = (0..o.len())
                    .map(|d| {
                        let x = o.elements[d];
                        endo_preimage(biset.endo(), &x.mul(&cur[o.f[d]]).mul(&x.inverse()))
                    })
                    .collect();
                match next {
                    Some(n) => {
                        cur = n;
                        steps.push(cur.iter().map(|x| x.to_string()).collect());
                    }
                    None => {
                        return Ok(KnittingTranscript {
                            iterations: it,
                            end: KnittingEnd::NotClosed,
                            steps,
                        })
                    }
                }
            }
            Err(Error::Budget("knitting lifts did not trivialize".into()))
        }
        (BundleData::Exp { biset, portrait }, PushTuple::Exp(g)) => {
            let d = &portrait.dynamics;
            let extra: Vec<usize> = (d.marked..d.len()).collect();
            if g.len() != extra.len() {
                return invalid("one push per extra point is required");
            }
            let sig = biset.signature();
            let mut cur = g.clone();
            steps.push(cur.iter().map(|x| fmt_word(sig, x)).collect());
            for it in 0..=budget {
                if cur.iter().all(|x| x.is_identity()) {
                    return Ok(KnittingTranscript {
                        iterations: it,
                        end: KnittingEnd::Trivial,
                        steps,
                    });
                }
                let mut next = Vec::new();
                for (k, &c) in extra.iter().enumerate() {
                    let f = d.fstar[c];
                    if d.is_marked(f) {
                        return precondition(
                            "pushes are lifted along extra points that stay extra",
                        );
                    }
                    let _ = k;
                    let b = &portrait.reps[c][0];
                    let (s, y) = biset.state_and_perm(&cur[f - d.marked], b.letter);
                    if y != b.letter {
                        return Ok(KnittingTranscript {
                            iterations: it,
                            end: KnittingEnd::NotClosed,
                            steps,
                        });
                    }
                    next.push(b.prefix.mul(&s).mul(&b.prefix.inverse()));
                }
                cur = next;
                steps.push(cur.iter().map(|x| fmt_word(sig, x)).collect());
            }
            Err(Error::Budget("knitting lifts did not trivialize".into()))
        }
        _ => invalid("push tuple does not match the bundle backend"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::Sign;
    use crate::portrait::examples::{basilica_beta, basilica_sqrt2, beta_push};
    use crate::sl2::IntMatrix2;
    use crate::tor::tor_to_wreath;
    use crate::wreath::examples::{basilica, w};

    fn exp_oracle() -> MinimalOracle {
        MinimalOracle::with_exp(Box::new(TrivialExpOracle))
    }

    fn beta_bundle() -> GeometricBundle {
        bundle_from_wreath(&basilica_beta(), &["beta".into()]).unwrap()
    }

    fn alpha_bundle() -> GeometricBundle {
        let b = beta_bundle();
        let BundleData::Exp {
            biset,
            mut portrait,
        } = b.data
        else {
            unreachable!()
        };
        portrait.reps[3] = vec![BisetElement::letter(1)];
        GeometricBundle::exp(biset, portrait).unwrap()
    }

    #[test]
    fn marked_beta_bundle() {
        let b = beta_bundle();
        let BundleData::Exp { biset, portrait } = &b.data else {
            panic!("exp bundle")
        };
        assert_eq!(biset, &basilica());
        assert_eq!(portrait.reps[3], vec![BisetElement::letter(2)]);
        assert_eq!(portrait.dynamics.names[3], "beta");
    }

    #[test]
    fn marked_sqrt2_bundle() {
        let b = bundle_from_wreath(&basilica_sqrt2(), &["sqrt2".into(), "1".into()]).unwrap();
        let BundleData::Exp { biset, portrait } = &b.data else {
            panic!("exp bundle")
        };
        assert_eq!(biset, &basilica());
        assert_eq!(
            portrait.dynamics.names[3..],
            ["sqrt2".to_string(), "1".to_string()]
        );
        assert_eq!(portrait.reps[3], vec![BisetElement::letter(2)]);
        assert_eq!(portrait.reps[4], vec![BisetElement::letter(2)]);
    }

    #[test]
    fn erase_nothing() {
        let b = bundle_from_wreath(&basilica(), &[]).unwrap();
        let BundleData::Exp { portrait, .. } = &b.data else {
            panic!("exp bundle")
        };
        assert_eq!(portrait.dynamics.len(), 3);
    }

    #[test]
    fn twisted_beta_is_alpha() {
        let twisted = basilica_beta().twist(&beta_push()).unwrap();
        let from_recursion = bundle_from_wreath(&twisted, &["beta".into()]).unwrap();
        let pushed = beta_bundle().push("beta", &w(&[]), &w(&[-1])).unwrap();
        assert!(
            pushed.history.iter().any(|l| l.contains("x₂·γ₋₁⁻¹ → x₁")),
            "{:?}",
            pushed.history
        );
        assert_eq!(from_recursion.data, pushed.data);
        let o = exp_oracle();
        let budgets = Budgets::default();
        let v = reduce_conjugacy(&pushed, &alpha_bundle(), &o, &budgets).unwrap();
        let Verdict::Yes { certificate } = v else {
            panic!("expected conjugate")
        };
        assert!(certificate.verified);
        assert!(certificate
            .transcript
            .iter()
            .any(|l| l.contains("x₂·γ₋₁⁻¹ → x₁")));
    }

    #[test]
    fn alpha_and_beta_differ() {
        let o = exp_oracle();
        let budgets = Budgets::default();
        let v = reduce_conjugacy(&beta_bundle(), &alpha_bundle(), &o, &budgets).unwrap();
        assert_eq!(v, no("portrait-not-conjugate"));
        let v = reduce_conjugacy(&beta_bundle(), &beta_bundle(), &o, &budgets).unwrap();
        let Verdict::Yes { certificate } = v else {
            panic!("expected conjugate")
        };
        assert!(certificate
            .ell
            .values()
            .all(|e| *e == PointConjugator::Exp(FreeWord::identity())));
        assert!(matches!(
            reduce_conjugacy(
                &beta_bundle(),
                &beta_bundle(),
                &MinimalOracle::tor_only(),
                &budgets
            ),
            Err(Error::OracleUnavailable(_))
        ));
        let r = reduce_centralizer(&beta_bundle(), &o, &budgets).unwrap();
        assert_eq!((r.generators.len(), r.index), (0, 1));
    }

    fn tor_bundle(
        m: IntMatrix2,
        v: [i128; 2],
        elements: Vec<AffineElement>,
        f: Vec<usize>,
    ) -> GeometricBundle {
        let names = (0..elements.len()).map(|k| format!("p{k}")).collect();
        let orbit = SymbolicOrbitTor::new(names, f, elements).unwrap();
        GeometricBundle::tor(TorBiset::new(m, v).unwrap(), TorPortrait { orbit }).unwrap()
    }

    #[test]
    fn tor_conjugacy_by_mapping_class() {
        let two = IntMatrix2::scalar(2);
        let b = tor_bundle(
            two,
            [0, 0],
            vec![AffineElement::involution([0, 0])],
            vec![0],
        );
        let phi = ModGElement::new(IntMatrix2::new(1, 2, 0, 1), [0, 0]).unwrap();
        let BundleData::Tor { biset, portrait } = &b.data else {
            unreachable!()
        };
        let c = crate::tor::conjugate_biset(biset, &phi);
        let moved = transport_portrait(biset, &phi, &c, portrait).unwrap();
        let b2 = GeometricBundle::tor(c, moved).unwrap();
        let v = reduce_conjugacy(&b, &b2, &MinimalOracle::tor_only(), &Budgets::default()).unwrap();
        let Verdict::Yes { certificate } = v else {
            panic!("expected conjugate")
        };
        assert!(certificate.verified);
        let v = reduce_conjugacy(&b, &b, &MinimalOracle::tor_only(), &Budgets::default()).unwrap();
        assert!(matches!(v, Verdict::Yes { .. }));
    }

    #[test]
    fn tor_centralizer_report() {
        let two = IntMatrix2::scalar(2);
        let empty = tor_bundle(two, [0, 0], vec![], vec![]);
        let r =
            reduce_centralizer(&empty, &MinimalOracle::tor_only(), &Budgets::default()).unwrap();
        assert_eq!(r.index, 1);
        assert!(!r.generators.is_empty());
        let one = tor_bundle(
            two,
            [0, 0],
            vec![AffineElement::translation([1, 0])],
            vec![0],
        );
        let r = reduce_centralizer(&one, &MinimalOracle::tor_only(), &Budgets::default()).unwrap();
        // Z(2I) is congruent to I mod 2, so it fixes fixed-point classes
        assert_eq!(r.index, 1);
        assert_eq!(r.index, r.orbit_size);
    }

    #[test]
    fn knitting_examples() {
        let two = IntMatrix2::scalar(2);
        let b = tor_bundle(two, [0, 0], vec![AffineElement::identity()], vec![0]);
        let t =
            knitting_trivialize(&b, &PushTuple::Tor(vec![AffineElement::identity()]), 10).unwrap();
        assert_eq!(t.iterations, 0);
        let t = knitting_trivialize(
            &b,
            &PushTuple::Tor(vec![AffineElement::translation([4, 0])]),
            10,
        )
        .unwrap();
        assert_eq!((t.iterations, t.end), (2, KnittingEnd::NotClosed));
        let beta = beta_bundle();
        let t = knitting_trivialize(&beta, &PushTuple::Exp(vec![w(&[2])]), 10).unwrap();
        assert_eq!((t.iterations, t.end), (1, KnittingEnd::Trivial));
    }

    #[test]
    fn tor_basis_of_affine_recursion() {
        let b = TorBiset::new(IntMatrix2::new(2, 1, 0, 1), [1, 0]).unwrap();
        let wr = tor_to_wreath(&b);
        let rec = recognize_2222(&wr).unwrap();
        let basis = tor_basis(&wr, &rec.biset, &rec.assignment).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(basis
            .iter()
            .all(|a| a.e == Sign::Plus || a.e == Sign::Minus));
    }

    #[test]
    fn word_formatting() {
        let sig = basilica().signature().clone();
        assert_eq!(fmt_word(&sig, &w(&[-1, 2])), "γ₋₁⁻¹γ₀");
        assert_eq!(fmt_element(&sig, &BisetElement::new(w(&[1]), 2)), "γ₋₁·x₂");
    }
}
