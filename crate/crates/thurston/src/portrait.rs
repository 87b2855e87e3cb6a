//! Portraits of bisets over wreath recursions.
//!
//! A portrait assigns to every point `c` of an extended marked set a cyclic
//! subgroup `H_c` (trivial off the original marked set `A`) and an
//! `H_c`-`G_{f(c)}` subbiset `B_c`. A family `(g_c)` acts by
//! `B_c -> g_c^-1 B_c g_{f(c)}` and `H_c -> g_c^-1 H_c g_c`.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Error, Result};
use crate::nucleus::Nucleus;
use crate::orbits::{orbit_centralizer_exp, orbit_conjugate_exp, orbit_reduce, SymbolicOrbitExp};
use crate::words::{free_ball, FreeWord};
use crate::wreath::{BisetElement, WreathBiset};

/// Dynamics on an extended marked set whose first `marked` points are the
/// points of the biset's signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkedDynamics {
    pub names: Vec<String>,
    pub marked: usize,
    pub fstar: Vec<usize>,
    pub deg: Vec<usize>,
}

impl MarkedDynamics {
    pub fn new(
        names: Vec<String>,
        marked: usize,
        fstar: Vec<usize>,
        deg: Vec<usize>,
    ) -> Result<Self> {
        let d = MarkedDynamics {
            names,
            marked,
            fstar,
            deg,
        };
        let n = d.names.len();
        if d.fstar.len() != n || d.deg.len() != n || marked > n {
            return invalid("dynamics names, map and degrees differ in length");
        }
        let mut seen = HashSet::new();
        if !d.names.iter().all(|s| seen.insert(s)) {
            return invalid("duplicate point name in dynamics");
        }
        for c in 0..n {
            let f = d.fstar[c];
            if f >= n {
                return invalid(format!("image of {} out of range", d.names[c]));
            }
            if d.deg[c] == 0 {
                return invalid(format!("degree of {} must be positive", d.names[c]));
            }
            if c < marked && f >= marked {
                return invalid("marked points must map to marked points");
            }
            if c >= marked && f >= marked && d.deg[c] != 1 {
                return invalid(format!(
                    "{} maps off the marked set, so its degree must be 1",
                    d.names[c]
                ));
            }
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_marked(&self, c: usize) -> bool {
        c < self.marked
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|s| s == name)
    }

    /// Number of steps for an extra point to reach the marked set.
    pub fn escape_depth(&self, c: usize) -> Option<usize> {
        let mut x = c;
        for k in 0..=self.len() {
            if self.is_marked(x) {
                return Some(k);
            }
            x = self.fstar[x];
        }
        None
    }

    /// Extra points reaching the marked set (ordered by escape depth) and
    /// extra points that never do.
    pub fn split(&self) -> (Vec<usize>, Vec<usize>) {
        let mut j: Vec<(usize, usize)> = Vec::new();
        let mut i = Vec::new();
        for c in self.marked..self.len() {
            match self.escape_depth(c) {
                Some(k) => j.push((k, c)),
                None => i.push(c),
            }
        }
        j.sort();
        (j.into_iter().map(|(_, c)| c).collect(), i)
    }

    /// Checks that the restriction to the marked points is the biset's own.
    pub fn check_against(&self, w: &WreathBiset) -> Result<()> {
        let (f, deg) = induced_dynamics(w)?;
        if self.marked != f.len() || self.names[..self.marked] != *w.signature().names() {
            return invalid("dynamics do not list the signature points first");
        }
        if self.fstar[..self.marked] != f[..] || self.deg[..self.marked] != deg[..] {
            return invalid("dynamics disagree with the biset's action on marked points");
        }
        Ok(())
    }
}

/// Map and local degrees induced on the signature points: `c -> a` when a
/// cycle of `sigma_{gamma_a}` has first return conjugate to `gamma_c`.
pub fn induced_dynamics(w: &WreathBiset) -> Result<(Vec<usize>, Vec<usize>)> {
    let per = w.signature().peripheral();
    let cycles: Vec<_> = per.iter().map(|g| w.cycle_data(g)).collect();
    let mut f = Vec::new();
    let mut deg = Vec::new();
    for (c, h) in per.iter().enumerate() {
        let mut found = None;
        for (a, cs) in cycles.iter().enumerate() {
            for cd in cs {
                if !cd.first_return.is_identity() && h.conjugator_to(&cd.first_return).is_some() {
                    if found.is_some() {
                        return invalid(format!(
                            "point {} has several preimage cycles",
                            w.signature().names()[c]
                        ));
                    }
                    found = Some((a, cd.letters.len()));
                }
            }
        }
        let (a, k) = found.ok_or_else(|| {
            Error::Invalid(format!(
                "no cycle returns to the peripheral class of {}",
                w.signature().names()[c]
            ))
        })?;
        f.push(a);
        deg.push(k);
    }
    Ok((f, deg))
}

/// A portrait of bisets in a wreath recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpPortrait {
    pub dynamics: MarkedDynamics,
    /// `H_a = <ell_a^-1 gamma_a ell_a>` for marked `a`.
    pub ell: Vec<FreeWord>,
    /// `deg(c)` representatives of the left `H_c`-orbits of `B_c`.
    pub reps: Vec<Vec<BisetElement>>,
}

impl ExpPortrait {
    /// Generator of `H_c`; the identity for extra points.
    pub fn group_generator(&self, w: &WreathBiset, c: usize) -> FreeWord {
        if self.dynamics.is_marked(c) {
            w.signature().peripheral()[c].conjugate_by(&self.ell[c])
        } else {
            FreeWord::identity()
        }
    }

    /// Whether `b` lies in `B_c`.
    pub fn contains(&self, w: &WreathBiset, c: usize, b: &BisetElement) -> bool {
        let h = self.group_generator(w, c);
        self.reps[c].iter().any(|r| {
            r.letter == b.letter && b.prefix.mul(&r.prefix.inverse()).power_of(&h).is_some()
        })
    }

    /// Whether `others` represent the same subbiset as `B_c`.
    pub fn same_subbiset(&self, w: &WreathBiset, c: usize, others: &[BisetElement]) -> bool {
        let letters: HashSet<usize> = others.iter().map(|b| b.letter).collect();
        others.len() == self.reps[c].len()
            && letters.len() == others.len()
            && others.iter().all(|b| self.contains(w, c, b))
    }

    /// Left-orbit label of `B_c`: the letters of its elements.
    pub fn label(&self, c: usize) -> Vec<usize> {
        let mut l: Vec<usize> = self.reps[c].iter().map(|b| b.letter).collect();
        l.sort_unstable();
        l
    }

    pub fn validate(&self, w: &WreathBiset) -> Result<()> {
        let d = &self.dynamics;
        d.check_against(w)?;
        if self.ell.len() != d.marked || self.reps.len() != d.len() {
            return invalid("portrait has the wrong number of groups or subbisets");
        }
        for c in 0..d.len() {
            let reps = &self.reps[c];
            if reps.len() != d.deg[c] {
                return invalid(format!(
                    "subbiset of {} needs {} representatives",
                    d.names[c], d.deg[c]
                ));
            }
            for b in reps {
                if b.letter == 0 || b.letter > w.degree() {
                    return invalid(format!("letter x{} out of range", b.letter));
                }
                b.prefix.check_rank(w.rank())?;
            }
            let h = self.group_generator(w, c);
            let g = self.group_generator(w, d.fstar[c]);
            // r_0 g^j runs through all classes and closes up at H r_0
            let mut cur = reps[0].clone();
            let mut hit = HashSet::new();
            for _ in 0..reps.len() {
                let k = reps
                    .iter()
                    .position(|r| {
                        r.letter == cur.letter
                            && cur.prefix.mul(&r.prefix.inverse()).power_of(&h).is_some()
                    })
                    .ok_or_else(|| {
                        Error::Invalid(format!(
                            "subbiset of {} is not right-transitive",
                            d.names[c]
                        ))
                    })?;
                hit.insert(k);
                cur = w.right_mul(&cur, &g);
            }
            let closes =
                cur.letter == reps[0].letter && cur.prefix.mul(&reps[0].prefix.inverse()) == h;
            if hit.len() != reps.len() || !closes {
                return invalid(format!(
                    "subbiset of {} is not left-free of degree {}",
                    d.names[c], d.deg[c]
                ));
            }
        }
        for c in 0..d.len() {
            for c2 in c + 1..d.len() {
                if d.fstar[c] == d.fstar[c2] && self.label(c) == self.label(c2) {
                    return invalid(format!(
                        "{} and {} have the same left orbit",
                        d.names[c], d.names[c2]
                    ));
                }
            }
        }
        Ok(())
    }

    /// `B_c -> g_c^-1 B_c g_{f(c)}`, `ell_a -> ell_a g_a`.
    pub fn act(&self, w: &WreathBiset, g: &[FreeWord]) -> ExpPortrait {
        let d = &self.dynamics;
        let reps = (0..d.len())
            .map(|c| {
                let gi = g[c].inverse();
                self.reps[c]
                    .iter()
                    .map(|r| w.right_mul(&r.left_mul(&gi), &g[d.fstar[c]]))
                    .collect()
            })
            .collect();
        let ell = self.ell.iter().zip(g).map(|(l, x)| l.mul(x)).collect();
        ExpPortrait {
            dynamics: d.clone(),
            ell,
            reps,
        }
    }

    /// Equality of portraits as collections of subgroups and subbisets.
    pub fn same_as(&self, w: &WreathBiset, other: &ExpPortrait) -> bool {
        self.dynamics == other.dynamics
            && (0..self.dynamics.marked)
                .all(|a| self.group_generator(w, a) == other.group_generator(w, a))
            && (0..self.dynamics.len()).all(|c| self.same_subbiset(w, c, &other.reps[c]))
    }

    /// Portrait on the extended set, keeping this portrait on the marked points.
    pub fn extend(
        &self,
        w: &WreathBiset,
        dynamics: MarkedDynamics,
        extra: Vec<Vec<BisetElement>>,
    ) -> Result<ExpPortrait> {
        if dynamics.marked != self.dynamics.marked
            || extra.len() + dynamics.marked != dynamics.len()
        {
            return invalid("extension does not match the marked points");
        }
        let mut reps = self.reps[..self.dynamics.marked].to_vec();
        reps.extend(extra);
        let p = ExpPortrait {
            dynamics,
            ell: self.ell.clone(),
            reps,
        };
        p.validate(w)?;
        Ok(p)
    }
}

/// The unique minimal portrait with groups `H_a = <ell_a^-1 gamma_a ell_a>`:
/// `B_c = H_c k_c x G_{f(c)}` where `x g^deg = (k_c^-1 h_c k_c) x`.
pub fn minimal_portrait(w: &WreathBiset, ell: &[FreeWord]) -> Result<ExpPortrait> {
    let sig = w.signature();
    if sig.len() < 3 {
        return precondition("minimal portraits need at least three marked points");
    }
    if ell.len() != sig.len() {
        return invalid("one conjugator per marked point is required");
    }
    let (f, deg) = induced_dynamics(w)?;
    let dynamics = MarkedDynamics::new(sig.names().to_vec(), sig.len(), f.clone(), deg.clone())?;
    let gen = |a: usize| sig.peripheral()[a].conjugate_by(&ell[a]);
    let mut reps = Vec::new();
    for c in 0..sig.len() {
        let h = gen(c);
        let g = gen(f[c]);
        let seed = w
            .cycle_data(&g)
            .into_iter()
            .filter(|cd| cd.letters.len() == deg[c])
            .find_map(|cd| {
                h.conjugator_to(&cd.first_return)
                    .map(|k| BisetElement::new(k, cd.letters[0]))
            })
            .ok_or_else(|| {
                Error::Invalid(format!("no seed for the subbiset of {}", sig.names()[c]))
            })?;
        let mut list = vec![seed];
        for _ in 1..deg[c] {
            let next = w.right_mul(list.last().expect("nonempty"), &g);
            list.push(next);
        }
        reps.push(list);
    }
    let p = ExpPortrait {
        dynamics,
        ell: ell.to_vec(),
        reps,
    };
    p.validate(w)?;
    Ok(p)
}

/// Minimal portrait for the standard peripheral generators.
pub fn standard_minimal_portrait(w: &WreathBiset) -> Result<ExpPortrait> {
    minimal_portrait(w, &vec![FreeWord::identity(); w.signature().len()])
}

/// Data of an extra point reaching the marked set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreperiodicEntry {
    pub name: String,
    pub image: String,
    pub label: Vec<usize>,
    pub reps: Vec<BisetElement>,
}

/// Extra points reaching the marked set, by escape depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreperiodicRecord {
    pub entries: Vec<PreperiodicEntry>,
}

/// Splits the extra points: the record of those reaching the marked set,
/// and the symbolic orbit `B_i = {b_i}` on those that never do.
pub fn portrait_to_symbolic(p: &ExpPortrait) -> Result<(PreperiodicRecord, SymbolicOrbitExp)> {
    let d = &p.dynamics;
    let (j, i) = d.split();
    let entries = j
        .iter()
        .map(|&c| PreperiodicEntry {
            name: d.names[c].clone(),
            image: d.names[d.fstar[c]].clone(),
            label: p.label(c),
            reps: p.reps[c].clone(),
        })
        .collect();
    Ok((PreperiodicRecord { entries }, i_orbit(p, &i)?))
}

fn i_orbit(p: &ExpPortrait, i: &[usize]) -> Result<SymbolicOrbitExp> {
    let d = &p.dynamics;
    let pos: HashMap<usize, usize> = i.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let mut elements = Vec::new();
    for &c in i {
        if p.reps[c].len() != 1 {
            return invalid(format!("subbiset of {} is not a singleton", d.names[c]));
        }
        elements.push(p.reps[c][0].clone());
    }
    SymbolicOrbitExp::new(
        i.iter().map(|&c| d.names[c].clone()).collect(),
        i.iter().map(|&c| pos[&d.fstar[c]]).collect(),
        elements,
    )
}

/// Conjugacy of orbits through their reductions into `N X`; returns `F`
/// with `F_i b_i = b'_i F_{f(i)}`.
fn orbit_conjugate_via_reduction(
    w: &WreathBiset,
    o: &SymbolicOrbitExp,
    o2: &SymbolicOrbitExp,
    n: &Nucleus,
    budget: usize,
) -> Result<Option<Vec<FreeWord>>> {
    let (r1, l1) = orbit_reduce(w, o, n, budget)?;
    let (r2, l2) = orbit_reduce(w, o2, n, budget)?;
    Ok(orbit_conjugate_exp(w, &r1, &r2, n, budget)?.map(|k| {
        (0..o.len())
            .map(|i| l2[i].inverse().mul(&k[i]).mul(&l1[i]))
            .collect()
    }))
}

/// A family `(g_c)` with `q = p.act(g)`, if one exists.
pub fn portrait_conjugate(
    w: &WreathBiset,
    p: &ExpPortrait,
    q: &ExpPortrait,
    n: Option<&Nucleus>,
    budget: usize,
) -> Result<Option<Vec<FreeWord>>> {
    if p.dynamics != q.dynamics {
        return invalid("portraits have different dynamics");
    }
    p.validate(w)?;
    q.validate(w)?;
    let d = &p.dynamics;
    // normalize the marked part: H_a is self-normalizing, so g_a is forced
    let mut g: Vec<FreeWord> = vec![FreeWord::identity(); d.len()];
    for a in 0..d.marked {
        g[a] = p.ell[a].inverse().mul(&q.ell[a]);
    }
    let p1 = p.act(w, &g);
    if !(0..d.marked).all(|a| p1.same_subbiset(w, a, &q.reps[a])) {
        return Ok(None);
    }
    let mut l: Vec<FreeWord> = vec![FreeWord::identity(); d.len()];
    let (j, i) = d.split();
    for &c in &j {
        let lf = l[d.fstar[c]].clone();
        let bl = w.right_mul(&p1.reps[c][0], &lf);
        let Some(b2) = q.reps[c].iter().find(|b| b.letter == bl.letter) else {
            return Ok(None);
        };
        let lc = bl.prefix.mul(&b2.prefix.inverse());
        let li = lc.inverse();
        let moved: Vec<BisetElement> = p1.reps[c]
            .iter()
            .map(|r| w.right_mul(&r.left_mul(&li), &lf))
            .collect();
        if !q.same_subbiset(w, c, &moved) {
            return Ok(None);
        }
        l[c] = lc;
    }
    if !i.is_empty() {
        let n =
            n.ok_or_else(|| Error::Precondition("periodic extra points need a nucleus".into()))?;
        let o1 = i_orbit(&p1, &i)?;
        let o2 = i_orbit(q, &i)?;
        match orbit_conjugate_via_reduction(w, &o1, &o2, n, budget)? {
            Some(fam) => {
                for (k, &c) in i.iter().enumerate() {
                    l[c] = fam[k].inverse();
                }
            }
            None => return Ok(None),
        }
    }
    let total: Vec<FreeWord> = g.iter().zip(&l).map(|(a, b)| a.mul(b)).collect();
    if !p.act(w, &total).same_as(w, q) {
        return Err(Error::Invalid(
            "assembled portrait conjugator fails verification".into(),
        ));
    }
    Ok(Some(total))
}

/// A listed portrait class with the size of its centralizer on the points
/// that never reach the marked set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListedPortrait {
    pub portrait: ExpPortrait,
    pub centralizer_size: usize,
}

/// Choices for `B_c`, `c` reaching the marked set, up to conjugacy: cycles
/// of `sigma_{gamma_f}` with trivial return, or single letters.
fn j_options(w: &WreathBiset, d: &MarkedDynamics, c: usize) -> Vec<Vec<BisetElement>> {
    let f = d.fstar[c];
    if d.is_marked(f) {
        let g = &w.signature().peripheral()[f];
        w.cycle_data(g)
            .into_iter()
            .filter(|cd| cd.letters.len() == d.deg[c] && cd.first_return.is_identity())
            .map(|cd| {
                let mut list = vec![BisetElement::letter(cd.letters[0])];
                for _ in 1..d.deg[c] {
                    let next = w.right_mul(list.last().expect("nonempty"), g);
                    list.push(next);
                }
                list
            })
            .collect()
    } else {
        (1..=w.degree())
            .map(|x| vec![BisetElement::letter(x)])
            .collect()
    }
}

/// Cartesian product with a compatibility filter on partial assignments.
fn assignments<T: Clone>(
    options: &[Vec<T>],
    ok: &dyn Fn(&[T]) -> bool,
    limit: usize,
) -> Result<Vec<Vec<T>>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::new();
        for partial in &out {
            for o in opts {
                let mut v = partial.clone();
                v.push(o.clone());
                if ok(&v) {
                    next.push(v);
                    if next.len() > limit {
                        return Err(Error::Budget("portrait enumeration exceeds budget".into()));
                    }
                }
            }
        }
        out = next;
    }
    Ok(out)
}

/// The newest entry of a partial assignment has a left-orbit label
/// different from earlier entries over the same image point.
fn distinct_labels(d: &MarkedDynamics, pts: &[usize], v: &[Vec<BisetElement>]) -> bool {
    let label = |x: &Vec<BisetElement>| {
        let mut l: Vec<usize> = x.iter().map(|b| b.letter).collect();
        l.sort_unstable();
        l
    };
    let k = v.len() - 1;
    (0..k).all(|m| d.fstar[pts[m]] != d.fstar[pts[k]] || label(&v[m]) != label(&v[k]))
}

/// Least orbit on the cycle reached by repeatedly conjugating by prefixes.
fn reduction_label(w: &WreathBiset, o: &SymbolicOrbitExp) -> SymbolicOrbitExp {
    let mut seen: HashMap<SymbolicOrbitExp, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut cur = o.clone();
    while !seen.contains_key(&cur) {
        seen.insert(cur.clone(), path.len());
        path.push(cur.clone());
        let ell: Vec<FreeWord> = cur.elements.iter().map(|b| b.prefix.inverse()).collect();
        cur = cur.conjugate(w, &ell);
    }
    path[seen[&cur]..]
        .iter()
        .min_by(|a, b| a.elements.cmp(&b.elements))
        .expect("nonempty cycle")
        .clone()
}

/// One representative per conjugacy class of portraits with the given
/// dynamics, in deterministic order.
pub fn portrait_list_exp(
    w: &WreathBiset,
    dynamics: &MarkedDynamics,
    n: Option<&Nucleus>,
    budget: usize,
) -> Result<Vec<ListedPortrait>> {
    dynamics.check_against(w)?;
    let min = standard_minimal_portrait(w)?;
    let d = dynamics;
    let (j, i) = d.split();
    let j_opts: Vec<_> = j.iter().map(|&c| j_options(w, d, c)).collect();
    let j_choices = assignments(
        &j_opts,
        &|v: &[Vec<BisetElement>]| distinct_labels(d, &j, v),
        budget,
    )?;

    let classes = if i.is_empty() {
        vec![SymbolicOrbitExp::new(Vec::new(), Vec::new(), Vec::new())?]
    } else {
        let n =
            n.ok_or_else(|| Error::Precondition("periodic extra points need a nucleus".into()))?;
        i_classes(w, d, &i, n, budget)?
    };
    let mut out = Vec::new();
    for jc in &j_choices {
        for o in &classes {
            let mut extra = vec![Vec::new(); d.len() - d.marked];
            for (k, &c) in j.iter().enumerate() {
                extra[c - d.marked] = jc[k].clone();
            }
            for (k, &c) in i.iter().enumerate() {
                extra[c - d.marked] = vec![o.elements[k].clone()];
            }
            let portrait = min.extend(w, d.clone(), extra)?;
            let centralizer_size = match n {
                Some(n) if !o.is_empty() => orbit_centralizer_exp(w, o, n, budget)?.len(),
                _ => 1,
            };
            out.push(ListedPortrait {
                portrait,
                centralizer_size,
            });
        }
    }
    Ok(out)
}

/// Classes of orbits on the never-escaping points with elements in `N X`.
fn i_classes(
    w: &WreathBiset,
    d: &MarkedDynamics,
    i: &[usize],
    n: &Nucleus,
    budget: usize,
) -> Result<Vec<SymbolicOrbitExp>> {
    let cand: Vec<Vec<BisetElement>> = n
        .elements()
        .iter()
        .flat_map(|g| (1..=w.degree()).map(move |x| vec![BisetElement::new(g.clone(), x)]))
        .collect();
    let i_opts = vec![cand; i.len()];
    let i_all = assignments(
        &i_opts,
        &|v: &[Vec<BisetElement>]| distinct_labels(d, i, v),
        budget,
    )?;
    let pos: HashMap<usize, usize> = i.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let i_f: Vec<usize> = i.iter().map(|&c| pos[&d.fstar[c]]).collect();
    let names: Vec<String> = i.iter().map(|&c| d.names[c].clone()).collect();
    let mut groups: BTreeMap<Vec<BisetElement>, SymbolicOrbitExp> = BTreeMap::new();
    for choice in i_all {
        let o = SymbolicOrbitExp::new(
            names.clone(),
            i_f.clone(),
            choice.into_iter().map(|mut v| v.remove(0)).collect(),
        )?;
        let label = reduction_label(w, &o);
        groups.entry(label.elements.clone()).or_insert(label);
    }
    let mut classes: Vec<SymbolicOrbitExp> = Vec::new();
    for o in groups.into_values() {
        let mut new = true;
        for c in &classes {
            if orbit_conjugate_exp(w, c, &o, n, budget)?.is_some() {
                new = false;
                break;
            }
        }
        if new {
            classes.push(o);
        }
    }
    Ok(classes)
}

/// Maps `x_i -> c_i x_{pi(i)}` with `c_i` in the free ball of `radius` that
/// commute with both actions.
pub fn biset_self_maps(w: &WreathBiset, radius: usize) -> Vec<Vec<BisetElement>> {
    let rank = w.rank();
    let d = w.degree();
    let ball = free_ball(rank, radius);
    let mut out = Vec::new();
    for c in &ball {
        for y in 1..=d {
            let mut img: Vec<Option<BisetElement>> = vec![None; d];
            img[0] = Some(BisetElement::new(c.clone(), y));
            let mut stack = vec![1usize];
            let mut ok = true;
            while let Some(x) = stack.pop() {
                let phi_x = img[x - 1].clone().expect("assigned");
                for k in 1..=rank {
                    let g = FreeWord::generator(k as i32);
                    let (s, x2) = w.state_and_perm(&g, x);
                    // phi(x) g = s phi(x^g)
                    let want = w.right_mul(&phi_x, &g).left_mul(&s.inverse());
                    match &img[x2 - 1] {
                        Some(b) if *b != want => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => {
                            img[x2 - 1] = Some(want);
                            stack.push(x2);
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok || img.iter().any(|b| b.is_none()) {
                continue;
            }
            let img: Vec<BisetElement> = img.into_iter().map(|b| b.expect("assigned")).collect();
            let letters: HashSet<usize> = img.iter().map(|b| b.letter).collect();
            if letters.len() == d {
                out.push(img);
            }
        }
    }
    out
}

/// Marked Basilica and `z^3` recursions used by tests and the corpus.
pub mod examples {
    use crate::words::{GroupHom, Signature};
    use crate::wreath::examples::w;
    use crate::wreath::{GeneratorRecursion, WreathBiset};

    fn gen(perm: &[usize], states: &[&[i32]]) -> GeneratorRecursion {
        GeneratorRecursion {
            perm: perm.to_vec(),
            states: states.iter().map(|s| w(s)).collect(),
        }
    }

    /// Basilica with `beta` marked: generators `g-1, gbeta, g0`.
    pub fn basilica_beta() -> WreathBiset {
        let sig = Signature::free(&["-1", "beta", "0", "inf"]).unwrap();
        WreathBiset::new(
            sig,
            2,
            vec![
                gen(&[2, 1], &[&[], &[3]]),
                gen(&[1, 2], &[&[], &[2]]),
                gen(&[1, 2], &[&[1], &[]]),
            ],
        )
        .unwrap()
    }

    /// Mapping class pushing `beta` once around `-1`: `g-1 -> g-1^{(g-1 gbeta)^-1}`,
    /// `gbeta -> gbeta^{g-1^-1}`, `g0` fixed.
    pub fn beta_push() -> GroupHom {
        GroupHom::new(vec![w(&[1, 2, 1, -2, -1]), w(&[1, 2, -1]), w(&[3])])
    }

    /// Basilica with `sqrt2 -> 1 -> 0` marked: generators `g-1, gsqrt2, g1, g0`.
    pub fn basilica_sqrt2() -> WreathBiset {
        let sig = Signature::free(&["-1", "sqrt2", "1", "0", "inf"]).unwrap();
        WreathBiset::new(
            sig,
            2,
            vec![
                gen(&[2, 1], &[&[], &[4]]),
                gen(&[1, 2], &[&[], &[]]),
                gen(&[1, 2], &[&[], &[2]]),
                gen(&[1, 2], &[&[1], &[3]]),
            ],
        )
        .unwrap()
    }

    /// `z^3` on `{0, 1, inf}`: `g0 = <1,1,g0>(1,2,3)`, `g1 = <g1,1,1>`.
    pub fn cube() -> WreathBiset {
        let sig = Signature::free(&["0", "1", "inf"]).unwrap();
        WreathBiset::new(
            sig,
            3,
            vec![
                gen(&[2, 3, 1], &[&[], &[], &[1]]),
                gen(&[1, 2, 3], &[&[2], &[], &[]]),
            ],
        )
        .unwrap()
    }
}
