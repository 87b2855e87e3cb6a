//! Symbolic orbits in wreath-recursion bisets: reduction into `N X`,
//! conjugacy and centralizers by bounded search.
//!
//! Families `(l_i)` conjugate `(b_i)` to `(c_i)` when `l_i b_i = c_i l_{f(i)}`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Error, Result};
use crate::index::index_structure;
use crate::nucleus::{find_t_with, ContractionData, NBall, Nucleus};
use crate::words::FreeWord;
use crate::wreath::{BisetElement, WreathBiset};

/// An indexed family of biset elements with index map `f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicOrbitExp {
    pub names: Vec<String>,
    pub f: Vec<usize>,
    pub elements: Vec<BisetElement>,
}

impl SymbolicOrbitExp {
    pub fn new(names: Vec<String>, f: Vec<usize>, elements: Vec<BisetElement>) -> Result<Self> {
        let o = SymbolicOrbitExp { names, f, elements };
        if o.names.len() != o.f.len() || o.elements.len() != o.f.len() {
            return invalid("orbit names, map and elements differ in length");
        }
        if o.f.iter().any(|&j| j >= o.f.len()) {
            return invalid("orbit index map is not total");
        }
        Ok(o)
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn check(&self, w: &WreathBiset) -> Result<()> {
        for b in &self.elements {
            if b.letter == 0 || b.letter > w.degree() {
                return invalid(format!("letter x{} out of range", b.letter));
            }
            b.prefix.check_rank(w.rank())?;
        }
        Ok(())
    }

    /// `b_i -> l_i b_i l_{f(i)}^-1`.
    pub fn conjugate(&self, w: &WreathBiset, ell: &[FreeWord]) -> SymbolicOrbitExp {
        let elements = (0..self.len())
            .map(|i| {
                w.right_mul(
                    &self.elements[i].left_mul(&ell[i]),
                    &ell[self.f[i]].inverse(),
                )
            })
            .collect();
        SymbolicOrbitExp {
            names: self.names.clone(),
            f: self.f.clone(),
            elements,
        }
    }

    /// Checks `l_i b_i = c_i l_{f(i)}` for every index.
    pub fn conjugated_by(
        &self,
        w: &WreathBiset,
        other: &SymbolicOrbitExp,
        ell: &[FreeWord],
    ) -> bool {
        self.f == other.f
            && ell.len() == self.len()
            && (0..self.len()).all(|i| {
                self.elements[i].left_mul(&ell[i])
                    == w.right_mul(&other.elements[i], &ell[self.f[i]])
            })
    }

    pub fn is_reduced(&self, n: &Nucleus) -> bool {
        self.elements.iter().all(|b| n.contains(&b.prefix))
    }
}

/// Conjugates by prefixes, `g x -> x g`, until every element lies in `N X`.
/// Returns the reduced orbit and the composite family.
pub fn orbit_reduce(
    w: &WreathBiset,
    o: &SymbolicOrbitExp,
    n: &Nucleus,
    budget: usize,
) -> Result<(SymbolicOrbitExp, Vec<FreeWord>)> {
    o.check(w)?;
    let mut cur = o.clone();
    let mut total = vec![FreeWord::identity(); o.len()];
    let mut steps = 0;
    while !cur.is_reduced(n) {
        steps += 1;
        if steps > budget {
            return Err(Error::Budget("orbit reduction did not reach N X".into()));
        }
        let ell: Vec<FreeWord> = cur.elements.iter().map(|b| b.prefix.inverse()).collect();
        cur = cur.conjugate(w, &ell);
        total = total.iter().zip(&ell).map(|(t, l)| l.mul(t)).collect();
    }
    debug_assert!(o.conjugated_by(w, &cur, &total));
    Ok((cur, total))
}

/// `b_i ⊗ b_{f(i)} ⊗ ... ⊗ b_{f^{m-1}(i)}` in the basis `X^m`.
pub fn mfold(w: &WreathBiset, o: &SymbolicOrbitExp, i: usize, m: usize) -> (FreeWord, Vec<usize>) {
    let mut prefix = o.elements[i].prefix.clone();
    let mut letters = vec![o.elements[i].letter];
    let mut j = o.f[i];
    for _ in 1..m {
        let b = &o.elements[j];
        let (s, moved) = w.state_and_perm_level(&b.prefix, &letters);
        prefix = prefix.mul(&s);
        letters = moved;
        letters.push(b.letter);
        j = o.f[j];
    }
    (prefix, letters)
}

/// Contraction data for which `l_i ∈ N^{t-1}` holds on these orbits. At
/// basis level `m` the slack must be at least `2a+1`, where `a` bounds the
/// `N`-length of the prefixes of the level-`m` products; the level giving
/// the least `t` is chosen.
pub fn adequate_data(
    w: &WreathBiset,
    n: &Nucleus,
    orbits: &[&SymbolicOrbitExp],
    budget: usize,
) -> Result<ContractionData> {
    let slack = |m: usize, ball: &NBall| -> Option<usize> {
        let mut a = 0;
        for o in orbits {
            for i in 0..o.len() {
                a = a.max(ball.n_length(&mfold(w, o, i, m).0)?);
            }
        }
        Some((2 * a + 1).max(3))
    };
    find_t_with(w, n, &slack, budget)
}

/// `l_i` from `l_{f(i)}`: `l_i p x = q' (l_f@y) y^{l_f}` forces `x = y^{l_f}`.
fn pull_back(
    w: &WreathBiset,
    b: &BisetElement,
    c: &BisetElement,
    lf: &FreeWord,
) -> Option<FreeWord> {
    let (s, z) = w.state_and_perm(lf, c.letter);
    (z == b.letter).then(|| c.prefix.mul(&s).mul(&b.prefix.inverse()))
}

fn conjugators(
    w: &WreathBiset,
    o: &SymbolicOrbitExp,
    o2: &SymbolicOrbitExp,
    n: &Nucleus,
    limit: usize,
    budget: usize,
) -> Result<Vec<Vec<FreeWord>>> {
    if o.f != o2.f {
        return invalid("orbits have different index maps");
    }
    o.check(w)?;
    o2.check(w)?;
    if !o.is_reduced(n) || !o2.is_reduced(n) {
        return precondition("orbits must be reduced into N X");
    }
    let cd = adequate_data(w, n, &[o, o2], budget)?;
    let st = index_structure(&o.f);
    let pull = |i: usize, lf: &FreeWord| pull_back(w, &o.elements[i], &o2.elements[i], lf);
    let mut per_cycle: Vec<Vec<Vec<(usize, FreeWord)>>> = Vec::new();
    for cyc in &st.cycles {
        let mut options = Vec::new();
        for cand in cd.ball.elements_up_to(cd.t - 1) {
            let mut assigned = vec![(cyc[0], cand.clone())];
            let mut cur = cand.clone();
            let mut ok = true;
            for k in (0..cyc.len()).rev() {
                match pull(cyc[k], &cur) {
                    Some(l) => {
                        cur = l;
                        if k > 0 {
                            assigned.push((cyc[k], cur.clone()));
                        }
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && cur == *cand {
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
        let mut ell = vec![FreeWord::identity(); o.len()];
        for (c, opts) in per_cycle.iter().enumerate() {
            for (i, l) in &opts[choice[c]] {
                ell[*i] = l.clone();
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
        if ok && o.conjugated_by(w, o2, &ell) {
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

/// Decides conjugacy of orbits reduced into `N X` by searching `l_i` in
/// `N^{t-1}` for adequate contraction data.
pub fn orbit_conjugate_exp(
    w: &WreathBiset,
    o: &SymbolicOrbitExp,
    o2: &SymbolicOrbitExp,
    n: &Nucleus,
    budget: usize,
) -> Result<Option<Vec<FreeWord>>> {
    Ok(conjugators(w, o, o2, n, 1, budget)?.into_iter().next())
}

/// All self-conjugacies of a reduced orbit, checked to form a group.
pub fn orbit_centralizer_exp(
    w: &WreathBiset,
    o: &SymbolicOrbitExp,
    n: &Nucleus,
    budget: usize,
) -> Result<Vec<Vec<FreeWord>>> {
    let fams = conjugators(w, o, o, n, usize::MAX, budget)?;
    let set: HashSet<&Vec<FreeWord>> = fams.iter().collect();
    for a in &fams {
        for b in &fams {
            let prod: Vec<FreeWord> = a.iter().zip(b).map(|(x, y)| x.mul(y)).collect();
            if !set.contains(&prod) {
                return Err(Error::Invalid(
                    "centralizer search is not closed under products".into(),
                ));
            }
        }
    }
    Ok(fams)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nucleus::{find_t, nucleus_compute, DEFAULT_BALL_BUDGET, DEFAULT_NUCLEUS_BUDGET};
    use crate::wreath::examples::{basilica, odometer, w};

    fn fixed(b: BisetElement) -> SymbolicOrbitExp {
        SymbolicOrbitExp::new(vec!["p".into()], vec![0], vec![b]).unwrap()
    }

    fn setup(b: &WreathBiset) -> ContractionData {
        let n = nucleus_compute(b, DEFAULT_NUCLEUS_BUDGET).unwrap();
        find_t(b, &n, DEFAULT_BALL_BUDGET).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let b = basilica();
        let cd = setup(&b);
        let o = fixed(BisetElement::letter(1));
        let (r, ell) = orbit_reduce(&b, &o, &cd.nucleus, 100).unwrap();
        assert_eq!(r, o);
        assert_eq!(ell, vec![FreeWord::identity()]);

        let o = fixed(BisetElement::new(w(&[2, 2, 2]), 1));
        let (r, ell) = orbit_reduce(&b, &o, &cd.nucleus, 100).unwrap();
        assert!(r.is_reduced(&cd.nucleus));
        assert!(o.conjugated_by(&b, &r, &ell));
    }

    #[test]
    fn basilica_fixed_points_are_distinct() {
        let b = basilica();
        let cd = setup(&b);
        let alpha = fixed(BisetElement::letter(1));
        let beta = fixed(BisetElement::letter(2));
        assert!(
            orbit_conjugate_exp(&b, &alpha, &beta, &cd.nucleus, DEFAULT_BALL_BUDGET)
                .unwrap()
                .is_none()
        );
        assert_eq!(
            orbit_conjugate_exp(&b, &alpha, &alpha, &cd.nucleus, DEFAULT_BALL_BUDGET).unwrap(),
            Some(vec![FreeWord::identity()])
        );
        let z = orbit_centralizer_exp(&b, &beta, &cd.nucleus, DEFAULT_BALL_BUDGET).unwrap();
        assert_eq!(z, vec![vec![FreeWord::identity()]]);
        // x2 g1^-1 = x1
        let twisted = fixed(b.right_mul(&BisetElement::letter(2), &w(&[-1])));
        assert_eq!(twisted, alpha);
    }

    #[test]
    fn conjugate_by_known_family_is_found() {
        let b = basilica();
        let cd = setup(&b);
        let o = SymbolicOrbitExp::new(
            vec!["a".into(), "b".into()],
            vec![1, 0],
            vec![
                BisetElement::new(w(&[1]), 1),
                BisetElement::new(w(&[2, -1]), 2),
            ],
        )
        .unwrap();
        let ell = vec![w(&[1, -2]), w(&[2])];
        let c = o.conjugate(&b, &ell);
        let (c, _) = orbit_reduce(&b, &c, &cd.nucleus, 100).unwrap();
        let found = orbit_conjugate_exp(&b, &o, &c, &cd.nucleus, DEFAULT_BALL_BUDGET)
            .unwrap()
            .unwrap();
        assert!(o.conjugated_by(&b, &c, &found));
    }

    #[test]
    fn empty_orbit_centralizer_is_trivial() {
        let b = odometer();
        let cd = setup(&b);
        let o = SymbolicOrbitExp::new(vec![], vec![], vec![]).unwrap();
        assert_eq!(
            orbit_centralizer_exp(&b, &o, &cd.nucleus, 1000).unwrap(),
            vec![Vec::<FreeWord>::new()]
        );
    }

    #[test]
    fn mfold_matches_iterated_right_mul() {
        let b = basilica();
        let o = fixed(BisetElement::new(w(&[1]), 2));
        let (p, xs) = mfold(&b, &o, 0, 2);
        // g1 x2 g1 x2 = g1 (g1@x2) x2^g1 x2 = g1 g2 x1 x2
        assert_eq!(p, w(&[1, 2]));
        assert_eq!(xs, vec![1, 2]);
    }
}
