//! Endomorphisms `M^v` of `G = Z^2 x| {+1,-1}`, their bisets, and conjugacy
//! of minimal torus-covered bisets under `Mod(G)`.

use std::collections::{HashMap, VecDeque};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::affine::{
    eval_2222, order2_class, standard_2222_signature, standard_assignment, standard_word_for, vadd,
    vmod2, vscale, vsub, AffineElement, Sign, Vec2,
};
use crate::error::{invalid, precondition, Error, Result};
use crate::rational::{QMat, QVec};
use crate::sl2::{conjugator_unchecked, is_gamma2, sl2_centralizer, CentralizerRank, IntMatrix2};
use crate::words::{FreeWord, Order};
use crate::wreath::{GeneratorRecursion, WreathBiset};
use crate::Int;

/// The endomorphism `M^v`: `(n,+1) -> (Mn,+1)`, `(n,-1) -> (Mn+v,-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineEndo {
    #[serde(rename = "M")]
    pub m: IntMatrix2,
    pub v: Vec2,
}

impl AffineEndo {
    pub fn new(m: IntMatrix2, v: Vec2) -> Self {
        AffineEndo { m, v }
    }

    pub fn identity() -> Self {
        AffineEndo::new(IntMatrix2::identity(), [0, 0])
    }

    pub fn apply(&self, g: &AffineElement) -> AffineElement {
        match g.e {
            Sign::Plus => AffineElement::translation(self.m.apply(g.t)),
            Sign::Minus => AffineElement::involution(vadd(self.m.apply(g.t), self.v)),
        }
    }

    /// `self ∘ inner`: `N^w ∘ M^v = (NM)^{w + N v}`.
    pub fn compose(&self, inner: &AffineEndo) -> AffineEndo {
        AffineEndo::new(self.m.mul(&inner.m), vadd(self.v, self.m.apply(inner.v)))
    }

    /// Induced map on the four involution classes, in the order
    /// `(0,0), (0,1), (1,0), (1,1)`.
    pub fn peripheral_action(&self) -> [([u8; 2], [u8; 2]); 4] {
        [[0u8, 0], [0, 1], [1, 0], [1, 1]].map(|a| {
            let g = AffineElement::involution([a[0] as Int, a[1] as Int]);
            (
                a,
                order2_class(&self.apply(&g)).expect("image of an involution is an involution"),
            )
        })
    }

    /// `inn_k ∘ self` for `k = (s, e)`: `(eM)^{e v + 2 s}`.
    pub fn inner_twist(&self, k: &AffineElement) -> AffineEndo {
        let e = k.e.value();
        AffineEndo::new(self.m.scale(e), vadd(vscale(e, self.v), vscale(2, k.t)))
    }
}

/// The biset `B_{M^v}`, identified with `G` via the basepoint `b0`:
/// `g b0 = b0 M^v(g)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AffineEndo", into = "AffineEndo")]
pub struct TorBiset {
    endo: AffineEndo,
}

impl TryFrom<AffineEndo> for TorBiset {
    type Error = Error;
    fn try_from(e: AffineEndo) -> Result<Self> {
        TorBiset::new(e.m, e.v)
    }
}

impl From<TorBiset> for AffineEndo {
    fn from(b: TorBiset) -> Self {
        b.endo
    }
}

impl TorBiset {
    pub fn new(m: IntMatrix2, v: Vec2) -> Result<Self> {
        if m.det() <= 0 {
            return invalid(format!("det {} of {m} is not positive", m.det()));
        }
        Ok(TorBiset {
            endo: AffineEndo::new(m, v),
        })
    }

    pub fn endo(&self) -> &AffineEndo {
        &self.endo
    }

    pub fn m(&self) -> IntMatrix2 {
        self.endo.m
    }

    pub fn v(&self) -> Vec2 {
        self.endo.v
    }

    pub fn degree(&self) -> Int {
        self.endo.m.det()
    }
}

/// Classification of torus-covered maps by the matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TorClass {
    Expanding,
    Exceptional,
    EigenvaluePlusMinusOne,
    Invertible,
}

impl TorClass {
    pub fn is_geometric(self) -> bool {
        matches!(self, TorClass::Expanding | TorClass::Exceptional)
    }
}

/// Classifies `M` using only trace and determinant.
pub fn classify(m: &IntMatrix2) -> Result<TorClass> {
    let (t, d) = (m.trace(), m.det());
    if d <= 0 {
        return invalid(format!("det {d} is not positive"));
    }
    if d == 1 {
        return Ok(TorClass::Invertible);
    }
    let p1 = 1 - t + d;
    let pm1 = 1 + t + d;
    if p1 == 0 || pm1 == 0 {
        return Ok(TorClass::EigenvaluePlusMinusOne);
    }
    // real roots, exactly one of them in (-1, 1)
    if t * t > 4 * d && p1.signum() * pm1.signum() < 0 {
        return Ok(TorClass::Exceptional);
    }
    Ok(TorClass::Expanding)
}

/// `B_{M^v} = B_{N^w}` iff `M = +-N` and `v = w mod 2`.
pub fn biset_iso(b: &TorBiset, c: &TorBiset) -> bool {
    (b.m() == c.m() || b.m() == c.m().neg()) && vmod2(b.v()) == vmod2(c.v())
}

/// An element of `Mod(G)`: `Y^w` with `det Y = 1`, `Y = I mod 2`, `w` even.
///
/// Stored with the sign of `Y` normalized so that its first nonzero entry is
/// positive (`Y^w ~ (-Y)^{-w}` modulo inner automorphisms). Two elements
/// define the same mapping class iff their [`ModGElement::canonical`] forms
/// agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "AffineEndo", into = "AffineEndo")]
pub struct ModGElement {
    endo: AffineEndo,
}

impl TryFrom<AffineEndo> for ModGElement {
    type Error = Error;
    fn try_from(e: AffineEndo) -> Result<Self> {
        ModGElement::new(e.m, e.v)
    }
}

impl From<ModGElement> for AffineEndo {
    fn from(p: ModGElement) -> Self {
        p.endo
    }
}

impl PartialOrd for AffineEndo {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AffineEndo {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.m, self.v).cmp(&(other.m, other.v))
    }
}

fn first_nonzero_negative(m: &IntMatrix2) -> bool {
    [m.a, m.b, m.c, m.d]
        .into_iter()
        .find(|&x| x != 0)
        .is_some_and(|x| x < 0)
}

impl ModGElement {
    pub fn new(y: IntMatrix2, w: Vec2) -> Result<Self> {
        if !is_gamma2(&y) {
            return invalid(format!("{y} is not in Gamma(2)"));
        }
        if vmod2(w) != [0, 0] {
            return invalid("translation part of a mapping class must be even");
        }
        Ok(if first_nonzero_negative(&y) {
            ModGElement {
                endo: AffineEndo::new(y.neg(), vscale(-1, w)),
            }
        } else {
            ModGElement {
                endo: AffineEndo::new(y, w),
            }
        })
    }

    pub fn identity() -> Self {
        ModGElement {
            endo: AffineEndo::identity(),
        }
    }

    pub fn endo(&self) -> &AffineEndo {
        &self.endo
    }

    pub fn matrix(&self) -> IntMatrix2 {
        self.endo.m
    }

    /// Representative with zero translation part.
    pub fn canonical(&self) -> ModGElement {
        ModGElement {
            endo: AffineEndo::new(self.endo.m, [0, 0]),
        }
    }

    pub fn same_class(&self, o: &ModGElement) -> bool {
        self.canonical() == o.canonical()
    }

    pub fn is_trivial(&self) -> bool {
        self.endo.m == IntMatrix2::identity()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ModGElement) -> ModGElement {
        let e = self.endo.compose(&other.endo);
        ModGElement::new(e.m, e.v).expect("Mod(G) is closed under composition")
    }

    pub fn inverse(&self) -> ModGElement {
        let yi = self.endo.m.adj();
        ModGElement::new(yi, vscale(-1, yi.apply(self.endo.v))).expect("inverse stays in Mod(G)")
    }
}

/// The biset of `phi^-1 ∘ M^v ∘ phi`; for `phi = Y^{2u}` this is
/// `(Y^-1 M Y)^{Y^-1 (v + (M - I) 2u)}`.
pub fn conjugate_biset(b: &TorBiset, phi: &ModGElement) -> TorBiset {
    let y = phi.endo.m;
    let yi = y.adj();
    let m = b.m();
    let w = phi.endo.v;
    let inner = vadd(b.v(), m.sub(&IntMatrix2::identity()).apply(w));
    TorBiset {
        endo: AffineEndo::new(m.conjugate_by(&y), yi.apply(inner)),
    }
}

/// Outcome of conjugacy of minimal bisets, with the centralizer of the first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorConjugacy {
    pub conjugator: Option<ModGElement>,
    pub reason: Option<String>,
    pub centralizer: Vec<ModGElement>,
}

fn check_minimal_geometric(b: &TorBiset) -> Result<()> {
    let class = classify(&b.m())?;
    if !class.is_geometric() {
        return precondition(format!("{} classifies as {class:?}", b.m()));
    }
    Ok(())
}

/// Representatives in `Z(M)` for each element of its image in SL2(F_2).
fn centralizer_mod2_reps(m: &IntMatrix2) -> HashMap<[u8; 4], IntMatrix2> {
    let z = sl2_centralizer(m);
    let gens = z.generators();
    let mut reps = HashMap::from([(IntMatrix2::identity().mod2(), IntMatrix2::identity())]);
    let mut queue = VecDeque::from([IntMatrix2::identity()]);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = x.mul(g);
            reps.entry(y.mod2()).or_insert_with(|| {
                queue.push_back(y);
                y
            });
        }
    }
    reps
}

/// Adjusts `X` by an element of `Z(M)` so that the product lies in Gamma(2).
fn adjust_into_gamma2(m: &IntMatrix2, x: &IntMatrix2) -> Option<IntMatrix2> {
    let target = x.adj().mod2();
    centralizer_mod2_reps(m).get(&target).map(|z| z.mul(x))
}

/// Generators of `Z(B) = {Y in Gamma(2) : Y^-1 M Y = +-M} / {+-I}`.
pub fn tor_centralizer(b: &TorBiset) -> Result<Vec<ModGElement>> {
    check_minimal_geometric(b)?;
    let m = b.m();
    let mut gens: Vec<IntMatrix2> = Vec::new();
    if m.is_scalar() {
        gens.push(IntMatrix2::new(1, 2, 0, 1));
        gens.push(IntMatrix2::new(1, 0, 2, 1));
    } else {
        let z = sl2_centralizer(&m);
        let gamma2 = |x: &IntMatrix2| x.mod2() == [1, 0, 0, 1];
        let tors = {
            let mut group = vec![IntMatrix2::identity()];
            let mut k = 0;
            while k < group.len() {
                for t in &z.torsion {
                    let y = group[k].mul(t);
                    if !group.contains(&y) {
                        group.push(y);
                    }
                }
                k += 1;
            }
            group
        };
        gens.extend(tors.iter().filter(|t| gamma2(t)).copied());
        if let Some(u) = z.free {
            debug_assert!(z.rank == CentralizerRank::One);
            let mut p = u;
            'search: for _ in 0..6 {
                for t in &tors {
                    let y = t.mul(&p);
                    if gamma2(&y) {
                        gens.push(y);
                        break 'search;
                    }
                }
                p = p.mul(&u);
            }
        }
    }
    if m.trace() == 0 {
        if let Some(x) = conjugator_unchecked(&m, &m.neg()) {
            if let Some(y) = adjust_into_gamma2(&m, &x) {
                gens.push(y);
            }
        }
    }
    let mut out: Vec<ModGElement> = Vec::new();
    for y in gens {
        let e = ModGElement::new(y, [0, 0]).expect("generator lies in Gamma(2)");
        if !e.is_trivial() && !out.contains(&e) {
            out.push(e);
        }
    }
    Ok(out)
}

/// Decides whether `C` is a `Mod(G)`-conjugate of `B` and returns `Z(B)`.
pub fn minimal_tor_conjugacy(b: &TorBiset, c: &TorBiset) -> Result<TorConjugacy> {
    check_minimal_geometric(b)?;
    check_minimal_geometric(c)?;
    let centralizer = tor_centralizer(b)?;
    let no = |reason: &str| TorConjugacy {
        conjugator: None,
        reason: Some(reason.to_string()),
        centralizer: centralizer.clone(),
    };
    if b.endo.peripheral_action() != c.endo.peripheral_action() {
        return Ok(no("peripheral-mismatch"));
    }
    if b.m().det() != c.m().det() {
        return Ok(no("degree-mismatch"));
    }
    let (m, n) = (b.m(), c.m());
    for target in [n, n.neg()] {
        let Some(x) = conjugator_unchecked(&m, &target) else {
            continue;
        };
        let Some(y) = adjust_into_gamma2(&m, &x) else {
            continue;
        };
        let phi = ModGElement::new(y, [0, 0]).expect("adjusted conjugator lies in Gamma(2)");
        let conj = conjugate_biset(b, &phi);
        if biset_iso(&conj, c) {
            return Ok(TorConjugacy {
                conjugator: Some(phi),
                reason: None,
                centralizer,
            });
        }
    }
    Ok(no("matrix-not-conjugate-in-gamma2"))
}

/// Lattice `M Z^2` in column Hermite normal form `(p, 0; q, r)`.
#[derive(Clone, Copy, Debug)]
pub struct Lattice {
    p: Int,
    q: Int,
    r: Int,
}

impl Lattice {
    pub fn of(m: &IntMatrix2) -> Self {
        let e = m.a.extended_gcd(&m.b);
        let (p, q0) = if e.gcd < 0 {
            (-e.gcd, -(e.x * m.c + e.y * m.d))
        } else {
            (e.gcd, e.x * m.c + e.y * m.d)
        };
        let r = m.det().abs() / p;
        Lattice {
            p,
            q: q0.rem_euclid(r),
            r,
        }
    }

    pub fn index(&self) -> Int {
        self.p * self.r
    }

    /// Canonical representative in `[0,p) x [0,r)`.
    pub fn reduce(&self, v: Vec2) -> Vec2 {
        let k = Integer::div_floor(&v[0], &self.p);
        let y = v[1] - k * self.q;
        [v[0] - k * self.p, y.rem_euclid(self.r)]
    }

    pub fn contains(&self, v: Vec2) -> bool {
        self.reduce(v) == [0, 0]
    }

    pub fn reps(&self) -> Vec<Vec2> {
        let mut out = Vec::new();
        for x in 0..self.p {
            for y in 0..self.r {
                out.push([x, y]);
            }
        }
        out
    }
}

fn solve_int(m: &IntMatrix2, v: Vec2) -> Vec2 {
    QMat::from_int([[m.a, m.b], [m.c, m.d]])
        .solve(&QVec::from_int(v))
        .and_then(|q| q.to_int())
        .expect("vector lies in the lattice")
}

/// Wreath recursion of `B_{M^v}` over the standard `(2,2,2,2)` presentation,
/// with basis `x_i = b0 (rho_i, +1)` for coset representatives `rho_i`.
pub fn tor_to_wreath(b: &TorBiset) -> WreathBiset {
    let m = b.m();
    let lat = Lattice::of(&m);
    let reps = lat.reps();
    let index: HashMap<Vec2, usize> = reps.iter().enumerate().map(|(k, r)| (*r, k + 1)).collect();
    let gens = standard_assignment();
    let sig = standard_2222_signature();
    let recs = gens[..3]
        .iter()
        .map(|g| {
            let mut perm = Vec::new();
            let mut states = Vec::new();
            for rho in &reps {
                let (rho_j, s) = match g.e {
                    Sign::Plus => {
                        let rj = lat.reduce(vadd(*rho, g.t));
                        (
                            rj,
                            AffineElement::translation(solve_int(&m, vsub(vadd(*rho, g.t), rj))),
                        )
                    }
                    Sign::Minus => {
                        let rj = lat.reduce(vsub(vsub(b.v(), *rho), g.t));
                        let w = vsub(vadd(vadd(*rho, g.t), rj), b.v());
                        (rj, AffineElement::involution(solve_int(&m, w)))
                    }
                };
                perm.push(index[&rho_j]);
                states.push(standard_word_for(&s));
            }
            GeneratorRecursion { perm, states }
        })
        .collect();
    WreathBiset::new(sig, lat.index() as usize, recs).expect("biset of M^v is a valid recursion")
}

/// Result of recognizing a `(2,2,2,2)` recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recognition {
    pub biset: TorBiset,
    /// Involution assigned to each marked point, in signature order.
    pub assignment: Vec<AffineElement>,
}

/// Recovers `M^v` (up to sign of `M` and `v` mod 2) from a recursion over a
/// four-point signature with all orders 2.
pub fn recognize_2222(w: &WreathBiset) -> Result<Recognition> {
    let sig = w.signature();
    if sig.len() != 4 || sig.orders().iter().any(|o| *o != Order::Finite(2)) {
        return invalid("signature is not (2,2,2,2)");
    }
    let assignment: Vec<AffineElement> = standard_assignment().to_vec();
    let eval = |word: &FreeWord| eval_2222(sig, &assignment, word);
    // word for a group element in the recursion's own generators
    let gen_imgs: Vec<AffineElement> = (1..=sig.rank())
        .map(|i| eval(&FreeWord::generator(i as i32)))
        .collect::<Result<_>>()?;
    let word_for = |g: &AffineElement| -> Result<FreeWord> {
        // translate the standard word through the generator images
        let std_word = standard_word_for(g);
        let std_gens = standard_assignment();
        let pick: Vec<FreeWord> = std_gens[..3]
            .iter()
            .map(|s| {
                (1..=sig.rank())
                    .find(|&i| gen_imgs[i - 1] == *s)
                    .map(|i| FreeWord::generator(i as i32))
                    .or_else(|| {
                        // the dependent point: inverse of the product of the others
                        let p = sig
                            .peripheral()
                            .iter()
                            .position(|pw| eval(pw).ok() == Some(*s))?;
                        Some(sig.peripheral()[p].clone())
                    })
                    .expect("every standard involution is a peripheral element")
            })
            .collect();
        crate::words::GroupHom::new(pick).apply(&std_word)
    };
    let bound: Int = 6;
    let mut pairs: Vec<(Vec2, Vec2)> = Vec::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            let n = AffineElement::translation([x, y]);
            let (s, l) = w.state_and_perm(&word_for(&n)?, 1);
            if l == 1 {
                let sv = eval(&s)?;
                if sv.e != Sign::Plus {
                    return invalid("translation lifts to an involution");
                }
                pairs.push(([x, y], sv.t));
            }
        }
    }
    let det = |a: Vec2, b: Vec2| a[0] * b[1] - a[1] * b[0];
    let (n1, s1, n2, s2) = pairs
        .iter()
        .flat_map(|p| pairs.iter().map(move |q| (p, q)))
        .find(|(p, q)| det(p.1, q.1) != 0)
        .map(|(p, q)| (p.0, p.1, q.0, q.1))
        .ok_or_else(|| {
            Error::Invalid("translation subgroup has rank < 2 in the stabilizer".into())
        })?;
    let nmat = QMat::from_int([[n1[0], n2[0]], [n1[1], n2[1]]]);
    let smat = QMat::from_int([[s1[0], s2[0]], [s1[1], s2[1]]]);
    let mq = nmat.mul(&smat.inverse().expect("independent states"));
    let mut ent = [0 as Int; 4];
    for (k, q) in [mq.0[0][0], mq.0[0][1], mq.0[1][0], mq.0[1][1]]
        .iter()
        .enumerate()
    {
        if !q.is_integer() {
            return invalid("restriction to translations is not integral");
        }
        ent[k] = q.to_integer();
    }
    let m = IntMatrix2::new(ent[0], ent[1], ent[2], ent[3]);
    if m.det() != w.degree() as Int {
        return invalid("recovered matrix has the wrong determinant");
    }
    for (n, s) in &pairs {
        if m.apply(*s) != *n {
            return invalid("recursion is not affine on translations");
        }
    }
    let mut v = None;
    'outer: for x in -bound..=bound {
        for y in -bound..=bound {
            let t = AffineElement::involution([x, y]);
            let (s, l) = w.state_and_perm(&word_for(&t)?, 1);
            if l == 1 {
                let sv = eval(&s)?;
                if sv.e != Sign::Minus {
                    return invalid("involution lifts to a translation");
                }
                v = Some(vmod2(vsub([x, y], m.apply(sv.t))));
                break 'outer;
            }
        }
    }
    let v = v.ok_or_else(|| Error::Invalid("no involution fixes the first letter".into()))?;
    let biset = TorBiset::new(m, [v[0] as Int, v[1] as Int])?;
    // round trip: the recovered biset maps each lifted class onto its point
    for (p, pw) in sig.peripheral().iter().enumerate() {
        if let Some(x) = (1..=w.degree()).find(|&x| w.state_and_perm(pw, x).1 == x) {
            // the state is the peripheral element at a preimage of point p
            let lifted = eval(&w.state(pw, x))?;
            if order2_class(&biset.endo.apply(&lifted))? != order2_class(&assignment[p])? {
                return invalid(
                    "peripheral action of the recursion disagrees with the recovered biset",
                );
            }
        }
    }
    Ok(Recognition { biset, assignment })
}
