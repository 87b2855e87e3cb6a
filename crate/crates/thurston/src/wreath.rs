//! Left-free bisets over free groups presented by wreath recursions.
//!
//! A biset with basis `X = {x_1..x_d}` is given, per generator `g`, by a
//! permutation `x -> x^g` and states `g@x`, so that `x g = (g@x) x^g`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::words::{FreeWord, Letter, Signature};

/// Permutation and states of one generator; `perm[x-1]` is `x^g` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorRecursion {
    pub perm: Vec<usize>,
    pub states: Vec<FreeWord>,
}

/// A wreath recursion over the free group of a signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WreathRaw", into = "WreathRaw")]
pub struct WreathBiset {
    signature: Signature,
    degree: usize,
    gens: Vec<GeneratorRecursion>,
    inv_perm: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WreathRaw {
    pub signature: Signature,
    pub degree: usize,
    pub generators: Vec<GeneratorRecursion>,
}

impl TryFrom<WreathRaw> for WreathBiset {
    type Error = Error;
    fn try_from(r: WreathRaw) -> Result<Self> {
        WreathBiset::new(r.signature, r.degree, r.generators)
    }
}

impl From<WreathBiset> for WreathRaw {
    fn from(w: WreathBiset) -> Self {
        WreathRaw {
            signature: w.signature,
            degree: w.degree,
            generators: w.gens,
        }
    }
}

/// A biset element `prefix * x_letter`; ordered shortlex on `(prefix, letter)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BisetElement {
    pub prefix: FreeWord,
    pub letter: usize,
}

impl fmt::Display for BisetElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prefix.is_identity() {
            write!(f, "x{}", self.letter)
        } else {
            write!(f, "{}·x{}", self.prefix, self.letter)
        }
    }
}

impl BisetElement {
    pub fn new(prefix: FreeWord, letter: usize) -> Self {
        BisetElement { prefix, letter }
    }

    pub fn letter(letter: usize) -> Self {
        BisetElement {
            prefix: FreeWord::identity(),
            letter,
        }
    }

    pub fn left_mul(&self, h: &FreeWord) -> BisetElement {
        BisetElement {
            prefix: h.mul(&self.prefix),
            letter: self.letter,
        }
    }
}

/// One cycle of a generator's permutation with its first-return state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleData {
    pub letters: Vec<usize>,
    pub first_return: FreeWord,
}

impl WreathBiset {
    pub fn new(signature: Signature, degree: usize, gens: Vec<GeneratorRecursion>) -> Result<Self> {
        if degree == 0 {
            return invalid("degree must be positive");
        }
        if gens.len() != signature.rank() {
            return invalid(format!(
                "{} generator recursions for a signature of rank {}",
                gens.len(),
                signature.rank()
            ));
        }
        let mut inv_perm = Vec::new();
        for (k, g) in gens.iter().enumerate() {
            if g.perm.len() != degree || g.states.len() != degree {
                return invalid(format!(
                    "generator {} has wrong permutation or state count",
                    k + 1
                ));
            }
            let mut inv = vec![0; degree];
            for (x, &y) in g.perm.iter().enumerate() {
                if y == 0 || y > degree || inv[y - 1] != 0 {
                    return invalid(format!(
                        "generator {} permutation is not a bijection",
                        k + 1
                    ));
                }
                inv[y - 1] = x + 1;
            }
            for s in &g.states {
                s.check_rank(signature.rank())?;
            }
            inv_perm.push(inv);
        }
        let w = WreathBiset {
            signature,
            degree,
            gens,
            inv_perm,
        };
        w.check_transitive()?;
        Ok(w)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank(&self) -> usize {
        self.signature.rank()
    }

    pub fn generators(&self) -> &[GeneratorRecursion] {
        &self.gens
    }

    fn letter_step(&self, l: Letter, x: usize) -> (FreeWord, usize) {
        let k = l.unsigned_abs() as usize - 1;
        if l > 0 {
            (self.gens[k].states[x - 1].clone(), self.gens[k].perm[x - 1])
        } else {
            let y = self.inv_perm[k][x - 1];
            (self.gens[k].states[y - 1].inverse(), y)
        }
    }

    /// `(g@x, x^g)`.
    pub fn state_and_perm(&self, g: &FreeWord, x: usize) -> (FreeWord, usize) {
        let mut state = FreeWord::identity();
        let mut cur = x;
        for &l in g.letters() {
            let (s, y) = self.letter_step(l, cur);
            state = state.mul(&s);
            cur = y;
        }
        (state, cur)
    }

    pub fn state(&self, g: &FreeWord, x: usize) -> FreeWord {
        self.state_and_perm(g, x).0
    }

    /// `x^g` on level `m` words of letters, with the level-`m` state.
    pub fn state_and_perm_level(&self, g: &FreeWord, xs: &[usize]) -> (FreeWord, Vec<usize>) {
        let mut cur = g.clone();
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            let (s, y) = self.state_and_perm(&cur, x);
            out.push(y);
            cur = s;
        }
        (cur, out)
    }

    /// `(h x) g = (h (g@x)) x^g`.
    pub fn right_mul(&self, b: &BisetElement, g: &FreeWord) -> BisetElement {
        let (s, y) = self.state_and_perm(g, b.letter);
        BisetElement {
            prefix: b.prefix.mul(&s),
            letter: y,
        }
    }

    fn check_transitive(&self) -> Result<()> {
        let d = self.degree;
        let letters: Vec<Letter> = (1..=self.rank() as Letter).flat_map(|i| [i, -i]).collect();
        let mut seen = HashSet::from([(1usize, 1usize)]);
        let mut queue = VecDeque::from([(1usize, 1usize)]);
        while let Some((x, y)) = queue.pop_front() {
            for &l in &letters {
                let (s, x2) = self.letter_step(l, x);
                let (_, y2) = self.state_and_perm(&s, y);
                if seen.insert((x2, y2)) {
                    queue.push_back((x2, y2));
                }
            }
        }
        if seen.len() != d * d {
            return invalid("recursion is not transitive on levels 1 and 2");
        }
        Ok(())
    }

    /// Cycles of `sigma_{g^power}` with first-return states, for a
    /// peripheral word `g` of the signature.
    pub fn peripheral_cycle_data(&self, g: &FreeWord, power: i64) -> Result<Vec<CycleData>> {
        if !g.is_identity() && !self.signature.peripheral().contains(g) {
            return invalid(format!("{g} is not a peripheral word"));
        }
        Ok(self.cycle_data(&g.pow(power)))
    }

    /// Cycles of `sigma_g` with first-return states, for any word `g`.
    pub fn cycle_data(&self, g: &FreeWord) -> Vec<CycleData> {
        let mut done = vec![false; self.degree];
        let mut out = Vec::new();
        for x in 1..=self.degree {
            if done[x - 1] {
                continue;
            }
            let mut letters = vec![x];
            let mut ret = FreeWord::identity();
            let mut cur = x;
            loop {
                done[cur - 1] = true;
                let (s, y) = self.state_and_perm(g, cur);
                ret = ret.mul(&s);
                if y == x {
                    break;
                }
                letters.push(y);
                cur = y;
            }
            out.push(CycleData {
                letters,
                first_return: ret,
            });
        }
        out
    }

    /// Recursion obtained by applying `h` to all states (the forgetful
    /// push-forward when `h` kills erased generators).
    pub fn map_states(
        &self,
        target: Signature,
        keep: &[usize],
        h: &crate::words::GroupHom,
    ) -> Result<WreathBiset> {
        let mut gens = Vec::new();
        for &k in keep {
            let g = &self.gens[k - 1];
            gens.push(GeneratorRecursion {
                perm: g.perm.clone(),
                states: g.states.iter().map(|s| h.apply(s)).collect::<Result<_>>()?,
            });
        }
        WreathBiset::new(target, self.degree, gens)
    }

    /// Recursion of the biset twisted by `phi`: generator `g` acts as `phi(g)`.
    pub fn twist(&self, phi: &crate::words::GroupHom) -> Result<WreathBiset> {
        if phi.source_rank() != self.rank() {
            return invalid("twist hom has the wrong rank");
        }
        let mut gens = Vec::new();
        for img in &phi.images {
            let mut perm = Vec::new();
            let mut states = Vec::new();
            for x in 1..=self.degree {
                let (s, y) = self.state_and_perm(img, x);
                perm.push(y);
                states.push(s);
            }
            gens.push(GeneratorRecursion { perm, states });
        }
        WreathBiset::new(self.signature.clone(), self.degree, gens)
    }

    /// Letters of the level-`m` basis in lexicographic order.
    pub fn level_words(&self, m: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..m {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (1..=self.degree).map(move |x| {
                        let mut v = w.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

/// Small recursions used by tests and the corpus.
pub mod examples {
    use super::*;

    pub fn w(l: &[Letter]) -> FreeWord {
        FreeWord::new(l.iter().copied())
    }

    /// `g1 = <1, g2>(1,2)`, `g2 = <g1, 1>`.
    pub fn basilica() -> WreathBiset {
        let sig = Signature::free(&["-1", "0", "inf"]).unwrap();
        WreathBiset::new(
            sig,
            2,
            vec![
                GeneratorRecursion {
                    perm: vec![2, 1],
                    states: vec![w(&[]), w(&[2])],
                },
                GeneratorRecursion {
                    perm: vec![1, 2],
                    states: vec![w(&[1]), w(&[])],
                },
            ],
        )
        .unwrap()
    }

    /// `g = <1, g>(1,2)` over the free group of rank 1.
    pub fn odometer() -> WreathBiset {
        let sig = Signature::free(&["0", "inf"]).unwrap();
        WreathBiset::new(
            sig,
            2,
            vec![GeneratorRecursion {
                perm: vec![2, 1],
                states: vec![w(&[]), w(&[1])],
            }],
        )
        .unwrap()
    }
}
