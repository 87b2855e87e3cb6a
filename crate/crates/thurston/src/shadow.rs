//! Rational shadowing of symbolic orbits for torus-covered bisets, local
//! groups, relative centralizers and portraits over the Tor backend.
//!
//! The biset `B_{M^v}` is realized by the map `F(z) = M z + v/2` on the
//! plane, which satisfies `F(g z) = M^v(g) F(z)`. A symbolic orbit
//! `b_i = b0 g_i` shadows the unique points with `F(r_i) = g_i r_{f(i)}`,
//! that is `r_i = M^-1 (e_i r_{f(i)} + t_i - v/2)`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::affine::{vadd, vmod2, vsub, AffineElement, Sign};
use crate::error::{invalid, precondition, Error, Result};
use crate::index::{index_structure, IndexStructure};
use crate::rational::{QMat, QVec, Q};
use crate::tor::{
    classify, conjugate_biset, tor_centralizer, AffineEndo, Lattice, ModGElement, TorBiset,
};
use crate::Int;

/// An indexed family `b_i = b0 g_i` with index map `f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicOrbitTor {
    pub names: Vec<String>,
    pub f: Vec<usize>,
    pub elements: Vec<AffineElement>,
}

impl SymbolicOrbitTor {
    pub fn new(names: Vec<String>, f: Vec<usize>, elements: Vec<AffineElement>) -> Result<Self> {
        let o = SymbolicOrbitTor { names, f, elements };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.f.len();
        if self.names.len() != n || self.elements.len() != n {
            return invalid("orbit names, map and elements differ in length");
        }
        if self.f.iter().any(|&j| j >= n) {
            return invalid("orbit index map is not total");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Conjugate by `(l_i)`: `b_i -> l_i b_i l_{f(i)}^-1`.
    pub fn conjugate(&self, b: &TorBiset, ell: &[AffineElement]) -> SymbolicOrbitTor {
        let elements = (0..self.len())
            .map(|i| {
                b.endo()
                    .apply(&ell[i])
                    .mul(&self.elements[i])
                    .mul(&ell[self.f[i]].inverse())
            })
            .collect();
        SymbolicOrbitTor {
            names: self.names.clone(),
            f: self.f.clone(),
            elements,
        }
    }
}

/// Class of a point in `R^2 / G`, with the fold flag recording whether the
/// representative came from `-r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Residue {
    pub point: QVec,
    pub folded: bool,
}

pub fn residue(r: &QVec) -> Residue {
    let a = r.frac();
    let b = r.neg().frac();
    if b < a {
        Residue {
            point: b,
            folded: true,
        }
    } else {
        Residue {
            point: a,
            folded: false,
        }
    }
}

/// Shadowed points and their residues.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowSolution {
    pub points: Vec<QVec>,
    pub residues: Vec<Residue>,
}

fn half(v: [Int; 2]) -> QVec {
    QVec::from_int(v).scale(Q::new(1, 2))
}

fn mat_q(b: &TorBiset) -> QMat {
    let m = b.m();
    QMat::from_int([[m.a, m.b], [m.c, m.d]])
}

/// `F(z) = M z + v/2`.
pub fn forward(b: &TorBiset, z: &QVec) -> QVec {
    mat_q(b).apply(z).add(&half(b.v()))
}

/// `F^-1(g z)`.
pub fn inverse_branch(b: &TorBiset, g: &AffineElement, z: &QVec) -> QVec {
    let minv = mat_q(b).inverse().expect("det M > 0");
    minv.apply(&g.act(z).sub(&half(b.v())))
}

fn check_geometric(b: &TorBiset) -> Result<()> {
    let c = classify(&b.m())?;
    if !c.is_geometric() {
        return precondition(format!("{} classifies as {c:?}", b.m()));
    }
    Ok(())
}

/// Solves the cycle through `cycle[start]` and returns its points in cycle order.
fn solve_cycle(
    b: &TorBiset,
    o: &SymbolicOrbitTor,
    cycle: &[usize],
    start: usize,
) -> Result<Vec<QVec>> {
    let n = cycle.len();
    let minv = mat_q(b).inverse().expect("det M > 0");
    // r_{c_k} = L_k r_{c_{k+1}} + c_k, composed from the start index
    let mut lin = QMat::identity();
    let mut off = QVec::zero();
    for step in 0..n {
        let i = cycle[(start + step) % n];
        let g = o.elements[i];
        let lk = minv.scale(Q::from_integer(g.e.value()));
        let ck = minv.apply(&QVec::from_int(g.t).sub(&half(b.v())));
        off = off.add(&lin.apply(&ck));
        lin = lin.mul(&lk);
    }
    let sys = QMat::identity().sub(&lin);
    let r0 = sys
        .solve(&off)
        .ok_or_else(|| Error::Precondition("cycle equation is singular (eigenvalue +-1)".into()))?;
    let mut pts = vec![QVec::zero(); n];
    pts[start] = r0;
    for step in (1..n).rev() {
        let k = (start + step) % n;
        let next = pts[(k + 1) % n];
        pts[k] = inverse_branch(b, &o.elements[cycle[k]], &next);
    }
    Ok(pts)
}

/// Shadows a symbolic orbit by exact rational solves.
pub fn shadow_orbit(b: &TorBiset, o: &SymbolicOrbitTor) -> Result<ShadowSolution> {
    check_geometric(b)?;
    o.validate()?;
    shadow_with_starts(b, o, &|_| 0)
}

/// Same as [`shadow_orbit`], eliminating each cycle from the given position.
pub fn shadow_with_starts(
    b: &TorBiset,
    o: &SymbolicOrbitTor,
    start: &dyn Fn(usize) -> usize,
) -> Result<ShadowSolution> {
    let st = index_structure(&o.f);
    let mut points = vec![QVec::zero(); o.len()];
    for (k, cyc) in st.cycles.iter().enumerate() {
        let pts = solve_cycle(b, o, cyc, start(k) % cyc.len())?;
        for (i, p) in cyc.iter().zip(pts) {
            points[*i] = p;
        }
    }
    for &i in &st.preperiodic {
        points[i] = inverse_branch(b, &o.elements[i], &points[o.f[i]]);
    }
    let residues = points.iter().map(residue).collect();
    Ok(ShadowSolution { points, residues })
}

fn same_points(a: &ShadowSolution, b: &ShadowSolution) -> bool {
    a.residues.len() == b.residues.len()
        && a.residues
            .iter()
            .zip(&b.residues)
            .all(|(x, y)| x.point == y.point)
}

impl ShadowSolution {
    /// Checks `r_i = M^-1 (e_i r_{f(i)} + t_i - v/2)` exactly.
    pub fn verify(&self, b: &TorBiset, o: &SymbolicOrbitTor) -> bool {
        (0..o.len())
            .all(|i| self.points[i] == inverse_branch(b, &o.elements[i], &self.points[o.f[i]]))
    }
}

/// Local group of `G` at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum LocalGroup {
    Trivial,
    OrderTwo { witness: AffineElement },
}

/// The stabilizer of `r`: generated by `z -> 2r - z` when `2r` is integral.
pub fn local_group_at(r: &QVec) -> LocalGroup {
    match r.scale(Q::from_integer(2)).to_int() {
        Some(t) => LocalGroup::OrderTwo {
            witness: AffineElement::involution(t),
        },
        None => LocalGroup::Trivial,
    }
}

fn local_elements(r: &QVec) -> Vec<AffineElement> {
    match local_group_at(r) {
        LocalGroup::Trivial => vec![AffineElement::identity()],
        LocalGroup::OrderTwo { witness } => vec![AffineElement::identity(), witness],
    }
}

/// Some `g` in `G` with `g r = r'`.
pub fn carrying_element(r: &QVec, r2: &QVec) -> Option<AffineElement> {
    if let Some(t) = r2.sub(r).to_int() {
        return Some(AffineElement::translation(t));
    }
    r2.add(r).to_int().map(AffineElement::involution)
}

/// Preimage under `M^v`, if any.
pub fn endo_preimage(e: &AffineEndo, g: &AffineElement) -> Option<AffineElement> {
    let m = QMat::from_int([[e.m.a, e.m.b], [e.m.c, e.m.d]]);
    let t = match g.e {
        Sign::Plus => g.t,
        Sign::Minus => vsub(g.t, e.v),
    };
    let s = m.solve(&QVec::from_int(t))?.to_int()?;
    Some(AffineElement::new(s, g.e))
}

/// All families `(l_i)` with `l_i b_i = b'_i l_{f(i)}` (at most `limit`).
fn orbit_conjugators(
    b: &TorBiset,
    o: &SymbolicOrbitTor,
    o2: &SymbolicOrbitTor,
    limit: usize,
) -> Result<Vec<Vec<AffineElement>>> {
    if o.f != o2.f {
        return invalid("orbits have different index maps");
    }
    let s1 = shadow_orbit(b, o)?;
    let s2 = shadow_orbit(b, o2)?;
    if !same_points(&s1, &s2) {
        return Ok(Vec::new());
    }
    let st = index_structure(&o.f);
    let e = b.endo();
    // backward step: l_i = (M^v)^-1 (g'_i l_{f(i)} g_i^-1)
    let pull = |i: usize, lf: &AffineElement| -> Option<AffineElement> {
        endo_preimage(e, &o2.elements[i].mul(lf).mul(&o.elements[i].inverse()))
    };
    let mut per_cycle: Vec<Vec<Vec<(usize, AffineElement)>>> = Vec::new();
    for cyc in &st.cycles {
        let i0 = cyc[0];
        let l0 = carrying_element(&s1.points[i0], &s2.points[i0]).expect("residues agree");
        let mut options = Vec::new();
        for loc in local_elements(&s1.points[i0]) {
            let cand = l0.mul(&loc);
            let mut assigned = vec![(i0, cand)];
            let mut cur = cand;
            let mut ok = true;
            for k in (0..cyc.len()).rev() {
                let i = cyc[k];
                match pull(i, &cur) {
                    Some(l) => {
                        cur = l;
                        if k > 0 {
                            assigned.push((i, l));
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && cur == cand {
                options.push(assigned);
            }
        }
        if options.is_empty() {
            return Ok(Vec::new());
        }
        per_cycle.push(options);
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; per_cycle.len()];
    'families: loop {
        let mut ell = vec![AffineElement::identity(); o.len()];
        for (c, opts) in per_cycle.iter().enumerate() {
            for &(i, l) in &opts[choice[c]] {
                ell[i] = l;
            }
        }
        let mut ok = true;
        for &i in &st.preperiodic {
            match pull(i, &ell[o.f[i]]) {
                Some(l) => ell[i] = l,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && o.conjugate(b, &ell) == *o2 {
            out.push(ell);
            if out.len() >= limit {
                break;
            }
        }
        for c in 0..per_cycle.len() {
            choice[c] += 1;
            if choice[c] < per_cycle[c].len() {
                continue 'families;
            }
            choice[c] = 0;
        }
        break;
    }
    Ok(out)
}

/// Finite group of self-conjugacies `(l_i)` of a symbolic orbit.
pub fn relative_centralizer_tor(
    b: &TorBiset,
    o: &SymbolicOrbitTor,
) -> Result<Vec<Vec<AffineElement>>> {
    check_geometric(b)?;
    orbit_conjugators(b, o, o, usize::MAX)
}

/// Extra marked points over the Tor backend: every extra point maps to an
/// extra point with local degree 1, so the portrait is its symbolic orbit.
/// The peripheral part is the normalized minimal portrait ([`minimal_portrait_tor`]).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorPortrait {
    pub orbit: SymbolicOrbitTor,
}

/// Subbiset of a cone point in the minimal portrait.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeSubbiset {
    pub class: [u8; 2],
    pub image_class: [u8; 2],
    pub reps: Vec<AffineElement>,
}

/// Minimal portrait of `B_{M^v}` for the cone points `c` in `{0,1}^2` with
/// peripheral involutions `(c,-1)`: `B_c = {b0 h, b0 h (c',-1)}` where
/// `c'` is the image class and `h = ((M c + v - c')/2, +1)`.
pub fn minimal_portrait_tor(b: &TorBiset) -> Vec<ConeSubbiset> {
    let m = b.m();
    [[0u8, 0], [1, 0], [1, 1], [0, 1]]
        .into_iter()
        .map(|c| {
            let ci = [c[0] as Int, c[1] as Int];
            let img = vadd(m.apply(ci), b.v());
            let cf = vmod2(img);
            let s = vsub(img, [cf[0] as Int, cf[1] as Int]);
            let h = AffineElement::translation([s[0] / 2, s[1] / 2]);
            let gf = AffineElement::involution([cf[0] as Int, cf[1] as Int]);
            debug_assert_eq!(
                b.endo().apply(&AffineElement::involution(ci)).mul(&h),
                h.mul(&gf)
            );
            ConeSubbiset {
                class: c,
                image_class: cf,
                reps: vec![h, h.mul(&gf)],
            }
        })
        .collect()
}

/// Decides conjugacy of two Tor portraits over the same biset.
pub fn portrait_conj_tor(
    b: &TorBiset,
    p: &TorPortrait,
    q: &TorPortrait,
) -> Result<Option<Vec<AffineElement>>> {
    check_geometric(b)?;
    if p.orbit.f != q.orbit.f {
        return invalid("portraits have different dynamics");
    }
    Ok(orbit_conjugators(b, &p.orbit, &q.orbit, 1)?
        .into_iter()
        .next())
}

/// Whether two portraits shadow different points of the orbifold.
pub fn residue_mismatch(b: &TorBiset, p: &TorPortrait, q: &TorPortrait) -> Result<bool> {
    Ok(!same_points(
        &shadow_orbit(b, &p.orbit)?,
        &shadow_orbit(b, &q.orbit)?,
    ))
}

fn forward_power(b: &TorBiset, z: &QVec, n: usize) -> QVec {
    (0..n).fold(*z, |acc, _| forward(b, &acc))
}

fn is_cone(z: &QVec) -> bool {
    z.scale(Q::from_integer(2)).to_int().is_some()
}

/// Orbifold points of exact period `n` of `F`, one per residue class.
fn periodic_points(b: &TorBiset, n: usize, budget: usize) -> Result<Vec<QVec>> {
    let m = b.m();
    let mn = m.pow(n as u32);
    let mut cn = QVec::zero();
    let mut mk = crate::sl2::IntMatrix2::identity();
    for _ in 0..n {
        let mkq = QMat::from_int([[mk.a, mk.b], [mk.c, mk.d]]);
        cn = cn.add(&mkq.apply(&half(b.v())));
        mk = mk.mul(&m);
    }
    let mut seen: HashSet<QVec> = HashSet::new();
    let mut out = Vec::new();
    for theta in [1 as Int, -1] {
        let a = mn.sub(&crate::sl2::IntMatrix2::scalar(theta));
        if a.det() == 0 {
            return precondition("M^n has eigenvalue +-1");
        }
        let lat = Lattice::of(&a);
        if lat.index() as usize > budget {
            return Err(Error::Budget(format!(
                "{} candidate periodic points",
                lat.index()
            )));
        }
        let aq = QMat::from_int([[a.a, a.b], [a.c, a.d]]);
        for mvec in lat.reps() {
            let z = aq
                .solve(&QVec::from_int(mvec).sub(&cn))
                .expect("nonsingular");
            let res = residue(&z);
            if is_cone(&z) || !seen.insert(res.point) {
                continue;
            }
            let exact = (1..n)
                .filter(|k| n % k == 0)
                .all(|k| residue(&forward_power(b, &z, k)).point != res.point);
            if exact {
                out.push(res.point);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Orbifold preimages of `y` under `F` that are not cone points.
fn preimages(b: &TorBiset, y: &QVec) -> Vec<QVec> {
    let lat = Lattice::of(&b.m());
    let minv = mat_q(b).inverse().expect("det > 0");
    let mut seen: HashSet<QVec> = HashSet::new();
    let mut out = Vec::new();
    for sign in [1 as Int, -1] {
        for mvec in lat.reps() {
            let z = minv.apply(
                &y.scale(Q::from_integer(sign))
                    .add(&QVec::from_int(mvec))
                    .sub(&half(b.v())),
            );
            let res = residue(&z);
            if !is_cone(&z) && seen.insert(res.point) {
                out.push(res.point);
            }
        }
    }
    out.sort();
    out
}

/// Element `g` with `F(z) = g w` exactly.
fn element_between(b: &TorBiset, z: &QVec, w: &QVec) -> AffineElement {
    carrying_element(w, &forward(b, z)).expect("F(z) and w lie in the same G-orbit")
}

/// Lists one portrait per conjugacy class for extra points with dynamics
/// `f` (indices into the extra points, local degree 1 each).
pub fn portrait_list_tor(
    b: &TorBiset,
    names: &[String],
    f: &[usize],
    budget: usize,
) -> Result<Vec<TorPortrait>> {
    check_geometric(b)?;
    if names.len() != f.len() || f.iter().any(|&j| j >= f.len()) {
        return invalid("extra-point dynamics must map extra points to extra points");
    }
    let st = index_structure(f);
    let mut cycle_choices: Vec<Vec<QVec>> = Vec::new();
    for cyc in &st.cycles {
        cycle_choices.push(periodic_points(b, cyc.len(), budget)?);
    }
    let mut results: Vec<TorPortrait> = Vec::new();
    let mut assignment: Vec<Option<QVec>> = vec![None; f.len()];
    let mut count = 0usize;
    list_cycles(
        b,
        names,
        f,
        &st,
        &cycle_choices,
        0,
        &mut assignment,
        &mut results,
        &mut count,
        budget,
    )?;
    // certify pairwise non-conjugacy
    let mut reps: Vec<TorPortrait> = Vec::new();
    for p in results {
        let mut dup = false;
        for r in &reps {
            if portrait_conj_tor(b, r, &p)?.is_some() {
                dup = true;
                break;
            }
        }
        if !dup {
            reps.push(p);
        }
    }
    Ok(reps)
}

#[allow(clippy::too_many_arguments)]
fn list_cycles(
    b: &TorBiset,
    names: &[String],
    f: &[usize],
    st: &IndexStructure,
    choices: &[Vec<QVec>],
    k: usize,
    assignment: &mut Vec<Option<QVec>>,
    out: &mut Vec<TorPortrait>,
    count: &mut usize,
    budget: usize,
) -> Result<()> {
    if k == st.cycles.len() {
        return list_preperiodic(b, names, f, st, 0, assignment, out, count, budget);
    }
    let cyc = &st.cycles[k];
    for z in &choices[k] {
        let mut pts = vec![*z];
        for _ in 1..cyc.len() {
            let next = forward(b, pts.last().expect("nonempty"));
            pts.push(next);
        }
        let used: HashSet<QVec> = assignment
            .iter()
            .flatten()
            .map(|p| residue(p).point)
            .collect();
        if pts.iter().any(|p| used.contains(&residue(p).point)) {
            continue;
        }
        for (i, p) in cyc.iter().zip(&pts) {
            assignment[*i] = Some(*p);
        }
        list_cycles(
            b,
            names,
            f,
            st,
            choices,
            k + 1,
            assignment,
            out,
            count,
            budget,
        )?;
        for i in cyc {
            assignment[*i] = None;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn list_preperiodic(
    b: &TorBiset,
    names: &[String],
    f: &[usize],
    st: &IndexStructure,
    k: usize,
    assignment: &mut Vec<Option<QVec>>,
    out: &mut Vec<TorPortrait>,
    count: &mut usize,
    budget: usize,
) -> Result<()> {
    if k == st.preperiodic.len() {
        *count += 1;
        if *count > budget {
            return Err(Error::Budget("portrait enumeration".into()));
        }
        let pts: Vec<QVec> = assignment
            .iter()
            .map(|p| p.expect("all assigned"))
            .collect();
        let elements = (0..f.len())
            .map(|i| element_between(b, &pts[i], &pts[f[i]]))
            .collect();
        let orbit = SymbolicOrbitTor::new(names.to_vec(), f.to_vec(), elements)?;
        debug_assert_eq!(shadow_orbit(b, &orbit)?.points, pts);
        out.push(TorPortrait { orbit });
        return Ok(());
    }
    let i = st.preperiodic[k];
    let y = assignment[f[i]].expect("image assigned first");
    let used: HashSet<QVec> = assignment
        .iter()
        .flatten()
        .map(|p| residue(p).point)
        .collect();
    for z in preimages(b, &y) {
        if used.contains(&residue(&z).point) {
            continue;
        }
        assignment[i] = Some(z);
        list_preperiodic(b, names, f, st, k + 1, assignment, out, count, budget)?;
        assignment[i] = None;
    }
    Ok(())
}

/// Carries a portrait of `B` to one of `C`, given `phi` with `B^phi ≅ C`:
/// `g_i -> k phi^-1(g_i)` where `inn_k ∘ (phi^-1 M^v phi) = C`.
pub fn transport_portrait(
    b: &TorBiset,
    phi: &ModGElement,
    c: &TorBiset,
    p: &TorPortrait,
) -> Result<TorPortrait> {
    let conj = conjugate_biset(b, phi);
    let eps = if conj.m() == c.m() {
        1
    } else if conj.m() == c.m().neg() {
        -1
    } else {
        return invalid("mapping class does not conjugate the first biset to the second");
    };
    let s = vsub(c.v(), [eps * conj.v()[0], eps * conj.v()[1]]);
    if vmod2(s) != [0, 0] {
        return invalid("mapping class does not conjugate the first biset to the second");
    }
    let k = AffineElement::new([s[0] / 2, s[1] / 2], Sign::from_value(eps));
    debug_assert_eq!(conj.endo().inner_twist(&k), *c.endo());
    let inv = phi.inverse();
    let elements = p
        .orbit
        .elements
        .iter()
        .map(|g| k.mul(&inv.endo().apply(g)))
        .collect();
    Ok(TorPortrait {
        orbit: SymbolicOrbitTor {
            names: p.orbit.names.clone(),
            f: p.orbit.f.clone(),
            elements,
        },
    })
}

/// Action of `phi` in `Z(B)` on a portrait.
pub fn act_on_portrait(b: &TorBiset, phi: &ModGElement, p: &TorPortrait) -> Result<TorPortrait> {
    transport_portrait(b, phi, b, p)
}

/// Letter of a Schreier word: generator index (0-based) and exponent sign.
pub type SchreierLetter = (usize, i8);

/// Orbit of a portrait class under `Z(B)` with Schreier generators of the
/// stabilizer, written as words in the centralizer generators.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PortraitOrbit {
    pub generators: Vec<ModGElement>,
    pub orbit: Vec<TorPortrait>,
    pub stabilizer_words: Vec<Vec<SchreierLetter>>,
    pub stabilizer: Vec<ModGElement>,
}

fn eval_schreier(gens: &[ModGElement], w: &[SchreierLetter]) -> ModGElement {
    w.iter().fold(ModGElement::identity(), |acc, &(g, e)| {
        let x = if e > 0 { gens[g] } else { gens[g].inverse() };
        acc.compose(&x)
    })
}

/// Breadth-first orbit of the class of `p` under the generators of `Z(B)`.
pub fn portrait_orbit_tor(b: &TorBiset, p: &TorPortrait, budget: usize) -> Result<PortraitOrbit> {
    let generators = tor_centralizer(b)?;
    let mut orbit: Vec<TorPortrait> = vec![p.clone()];
    let mut paths: Vec<Vec<SchreierLetter>> = vec![Vec::new()];
    let mut stabilizer_words = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut class_cache: HashMap<TorPortrait, usize> = HashMap::new();
    class_cache.insert(p.clone(), 0);
    while let Some(k) = queue.pop_front() {
        for g in 0..generators.len() {
            for e in [1i8, -1] {
                let phi = if e > 0 {
                    generators[g]
                } else {
                    generators[g].inverse()
                };
                let img = act_on_portrait(b, &phi, &orbit[k])?;
                let found = match class_cache.get(&img) {
                    Some(&j) => Some(j),
                    None => {
                        let mut hit = None;
                        for (j, q) in orbit.iter().enumerate() {
                            if portrait_conj_tor(b, q, &img)?.is_some() {
                                hit = Some(j);
                                break;
                            }
                        }
                        if let Some(j) = hit {
                            class_cache.insert(img.clone(), j);
                        }
                        hit
                    }
                };
                let mut word = paths[k].clone();
                word.push((g, e));
                match found {
                    Some(j) => {
                        let mut w = word;
                        for &(h, s) in paths[j].iter().rev() {
                            w.push((h, -s));
                        }
                        let w = free_reduce(w);
                        if !w.is_empty() && !stabilizer_words.contains(&w) {
                            stabilizer_words.push(w);
                        }
                    }
                    None => {
                        if orbit.len() >= budget {
                            return Err(Error::Budget("portrait orbit under Z(B)".into()));
                        }
                        class_cache.insert(img.clone(), orbit.len());
                        orbit.push(img);
                        paths.push(word);
                        queue.push_back(orbit.len() - 1);
                    }
                }
            }
        }
    }
    let stabilizer = stabilizer_words
        .iter()
        .map(|w| eval_schreier(&generators, w))
        .filter(|x| !x.is_trivial())
        .collect();
    Ok(PortraitOrbit {
        generators,
        orbit,
        stabilizer_words,
        stabilizer,
    })
}

fn free_reduce(w: Vec<SchreierLetter>) -> Vec<SchreierLetter> {
    let mut out: Vec<SchreierLetter> = Vec::new();
    for l in w {
        if out.last() == Some(&(l.0, -l.1)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

impl PortraitOrbit {
    /// Verifies that every stabilizer element fixes the class of the base portrait.
    pub fn verify(&self, b: &TorBiset) -> Result<bool> {
        let base = &self.orbit[0];
        for phi in &self.stabilizer {
            let img = act_on_portrait(b, phi, base)?;
            if portrait_conj_tor(b, base, &img)?.is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2::IntMatrix2;

    fn tb(m: IntMatrix2, v: [Int; 2]) -> TorBiset {
        TorBiset::new(m, v).unwrap()
    }

    fn single(g: AffineElement) -> SymbolicOrbitTor {
        SymbolicOrbitTor::new(vec!["p".into()], vec![0], vec![g]).unwrap()
    }

    fn q(n: Int, d: Int) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn shadow_examples() {
        let b = tb(IntMatrix2::scalar(2), [0, 0]);
        let s = shadow_orbit(&b, &single(AffineElement::identity())).unwrap();
        assert_eq!(s.points, vec![QVec::zero()]);
        let s2 = shadow_orbit(&b, &single(AffineElement::translation([1, 0]))).unwrap();
        assert_eq!(s2.points, vec![QVec::from_int([1, 0])]);
        assert_eq!(s2.residues, s.residues);

        let b = tb(IntMatrix2::new(3, 1, 1, 1), [0, 0]);
        let o = SymbolicOrbitTor::new(
            vec!["a".into(), "b".into()],
            vec![1, 0],
            vec![
                AffineElement::translation([1, 0]),
                AffineElement::identity(),
            ],
        )
        .unwrap();
        let s = shadow_orbit(&b, &o).unwrap();
        assert!(s.verify(&b, &o));
    }

    #[test]
    fn local_group_examples() {
        assert_eq!(
            local_group_at(&QVec::zero()),
            LocalGroup::OrderTwo {
                witness: AffineElement::involution([0, 0])
            }
        );
        assert_eq!(
            local_group_at(&QVec([q(1, 2), q(0, 1)])),
            LocalGroup::OrderTwo {
                witness: AffineElement::involution([1, 0])
            }
        );
        assert_eq!(
            local_group_at(&QVec([q(1, 3), q(0, 1)])),
            LocalGroup::Trivial
        );
    }

    #[test]
    fn relative_centralizer_examples() {
        let b = tb(IntMatrix2::scalar(2), [0, 0]);
        let z = relative_centralizer_tor(&b, &single(AffineElement::identity())).unwrap();
        assert_eq!(z.len(), 2);
        // fixed point at (1/3, 0): z = (2z + (1,0))... shadowing a non-cone point
        let o = single(AffineElement::involution([1, 0]));
        let s = shadow_orbit(&b, &o).unwrap();
        assert_eq!(s.points[0], QVec([q(1, 3), q(0, 1)]));
        assert_eq!(relative_centralizer_tor(&b, &o).unwrap().len(), 1);
        // an escaping index over a non-cone fixed point is forced trivial
        let o = SymbolicOrbitTor::new(
            vec!["c".into(), "e".into()],
            vec![0, 0],
            vec![AffineElement::involution([1, 0]), AffineElement::identity()],
        )
        .unwrap();
        let fams = relative_centralizer_tor(&b, &o).unwrap();
        assert_eq!(fams.len(), 1);
        assert!(fams[0][1].is_identity());
    }

    #[test]
    fn minimal_portrait_relation() {
        for (m, v) in [
            (IntMatrix2::scalar(2), [0, 0]),
            (IntMatrix2::new(3, 1, 1, 1), [1, 0]),
        ] {
            let b = tb(m, v);
            for c in minimal_portrait_tor(&b) {
                let ga = AffineElement::involution([c.class[0] as Int, c.class[1] as Int]);
                let gf =
                    AffineElement::involution([c.image_class[0] as Int, c.image_class[1] as Int]);
                assert_eq!(b.endo().apply(&ga).mul(&c.reps[0]), c.reps[0].mul(&gf));
            }
        }
    }

    #[test]
    fn list_fixed_points_of_doubling() {
        let b = tb(IntMatrix2::scalar(2), [0, 0]);
        let reps = portrait_list_tor(&b, &["p".into()], &[0], 10_000).unwrap();
        assert_eq!(reps.len(), 4);
        for r in &reps {
            let s = shadow_orbit(&b, &r.orbit).unwrap();
            assert_eq!(*s.points[0].0[0].denom() * *s.points[0].0[1].denom() % 3, 0);
        }
        assert_eq!(portrait_list_tor(&b, &[], &[], 10).unwrap().len(), 1);
    }

    #[test]
    fn list_two_cycles_pairwise_distinct() {
        let b = tb(IntMatrix2::scalar(2), [0, 0]);
        let reps = portrait_list_tor(&b, &["a".into(), "b".into()], &[1, 0], 100_000).unwrap();
        assert!(!reps.is_empty());
        for (i, p) in reps.iter().enumerate() {
            for q in &reps[i + 1..] {
                assert!(portrait_conj_tor(&b, p, q).unwrap().is_none());
            }
        }
    }

    #[test]
    fn conjugated_portrait_is_found() {
        let b = tb(IntMatrix2::new(3, 1, 1, 1), [1, 0]);
        let reps = portrait_list_tor(&b, &["a".into()], &[0], 10_000).unwrap();
        let p = &reps[0];
        let ell = vec![AffineElement::new([2, -1], Sign::Minus)];
        let q = TorPortrait {
            orbit: p.orbit.conjugate(&b, &ell),
        };
        let found = portrait_conj_tor(&b, p, &q).unwrap().unwrap();
        assert_eq!(p.orbit.conjugate(&b, &found), q.orbit);
    }

    #[test]
    fn doubling_fixed_point_orbit_has_size_four() {
        let b = tb(IntMatrix2::scalar(2), [0, 0]);
        let reps = portrait_list_tor(&b, &["p".into()], &[0], 10_000).unwrap();
        let orb = portrait_orbit_tor(&b, &reps[0], 100).unwrap();
        assert_eq!(orb.orbit.len(), 4);
        assert!(orb.verify(&b).unwrap());
    }
}
