//! Free-group words, orbisphere signatures and homomorphisms given on generators.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Signed 1-based generator index: `i` is `g_i`, `-i` is its inverse.
pub type Letter = i32;

/// A freely reduced word in the free group.
///
/// Ordering is shortlex, with letters ordered `1 < -1 < 2 < -2 < ...`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Letter>", into = "Vec<Letter>")]
pub struct FreeWord(Vec<Letter>);

fn letter_key(l: Letter) -> (u32, bool) {
    (l.unsigned_abs(), l < 0)
}

impl Ord for FreeWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| {
            self.0
                .iter()
                .map(|&l| letter_key(l))
                .cmp(other.0.iter().map(|&l| letter_key(l)))
        })
    }
}

impl PartialOrd for FreeWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<Vec<Letter>> for FreeWord {
    type Error = Error;
    fn try_from(letters: Vec<Letter>) -> Result<Self> {
        if letters.contains(&0) {
            return invalid("word contains the letter 0");
        }
        Ok(FreeWord::new(letters))
    }
}

impl From<FreeWord> for Vec<Letter> {
    fn from(w: FreeWord) -> Self {
        w.0
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

impl FreeWord {
    /// Builds a word from letters, freely reducing. Panics on a zero letter.
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            assert!(l != 0, "zero is not a generator index");
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord(out)
    }

    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn generator(l: Letter) -> Self {
        FreeWord::new([l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        FreeWord(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord(out)
    }

    pub fn pow(&self, e: i64) -> FreeWord {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::identity();
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `k^-1 * self * k`.
    pub fn conjugate_by(&self, k: &FreeWord) -> FreeWord {
        k.inverse().mul(self).mul(k)
    }

    /// Largest absolute generator index occurring in the word.
    pub fn max_index(&self) -> usize {
        self.0
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn check_rank(&self, rank: usize) -> Result<()> {
        match self.0.iter().find(|l| l.unsigned_abs() as usize > rank) {
            Some(&l) => Err(Error::IndexOutOfRange {
                index: l as i64,
                rank,
            }),
            None => Ok(()),
        }
    }

    /// Splits `self = p * c * p^-1` with `c` cyclically reduced; returns `(p, c)`.
    pub fn cyclic_reduction(&self) -> (FreeWord, FreeWord) {
        let w = &self.0;
        let mut k = 0;
        while w.len() >= 2 * (k + 1) && w[k] == -w[w.len() - 1 - k] {
            k += 1;
        }
        (
            FreeWord(w[..k].to_vec()),
            FreeWord(w[k..w.len() - k].to_vec()),
        )
    }

    /// Some `k` with `k^-1 * self * k = other`, if the two are conjugate.
    pub fn conjugator_to(&self, other: &FreeWord) -> Option<FreeWord> {
        let (p, u) = self.cyclic_reduction();
        let (q, v) = other.cyclic_reduction();
        if u.len() != v.len() {
            return None;
        }
        if u.is_empty() {
            return Some(p.mul(&q.inverse()));
        }
        let n = u.len();
        (0..n)
            .find(|&r| (0..n).all(|i| u.0[(i + r) % n] == v.0[i]))
            .map(|r| {
                let a = FreeWord(u.0[..r].to_vec());
                p.mul(&a).mul(&q.inverse())
            })
    }

    /// `Some(e)` with `self = base^e`, for a nontrivial cyclically reduced-or-not base.
    pub fn power_of(&self, base: &FreeWord) -> Option<i64> {
        if self.is_empty() {
            return Some(0);
        }
        if base.is_empty() {
            return None;
        }
        let (p, c) = base.cyclic_reduction();
        let inner = self.conjugate_by(&p);
        if inner.len() % c.len() != 0 {
            return None;
        }
        let e = (inner.len() / c.len()) as i64;
        if c.pow(e) == inner {
            Some(e)
        } else if c.pow(-e) == inner {
            Some(-e)
        } else {
            None
        }
    }
}

/// Cone order of a marked point; `0` encodes infinity in files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl TryFrom<u32> for Order {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        match n {
            0 => Ok(Order::Infinite),
            1 => invalid("cone order 1 is not allowed"),
            n => Ok(Order::Finite(n)),
        }
    }
}

impl From<Order> for u32 {
    fn from(o: Order) -> u32 {
        match o {
            Order::Infinite => 0,
            Order::Finite(n) => n,
        }
    }
}

/// Orbisphere signature: marked points with orders and peripheral words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SignatureRaw", into = "SignatureRaw")]
pub struct Signature {
    names: Vec<String>,
    orders: Vec<Order>,
    peripheral: Vec<FreeWord>,
    rank: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignatureRaw {
    pub names: Vec<String>,
    pub orders: Vec<Order>,
    pub peripheral: Vec<FreeWord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

impl TryFrom<SignatureRaw> for Signature {
    type Error = Error;
    fn try_from(r: SignatureRaw) -> Result<Self> {
        Signature::with_rank(r.names, r.orders, r.peripheral, r.rank)
    }
}

impl From<Signature> for SignatureRaw {
    fn from(s: Signature) -> Self {
        SignatureRaw {
            names: s.names,
            orders: s.orders,
            peripheral: s.peripheral,
            rank: Some(s.rank),
        }
    }
}

impl Signature {
    /// Rank defaults to the largest generator index used by a peripheral word.
    pub fn new(names: Vec<String>, orders: Vec<Order>, peripheral: Vec<FreeWord>) -> Result<Self> {
        Signature::with_rank(names, orders, peripheral, None)
    }

    pub fn with_rank(
        names: Vec<String>,
        orders: Vec<Order>,
        peripheral: Vec<FreeWord>,
        rank: Option<usize>,
    ) -> Result<Self> {
        if names.len() != orders.len() || names.len() != peripheral.len() {
            return invalid("names, orders and peripheral words differ in length");
        }
        let mut seen = std::collections::HashSet::new();
        if !names.iter().all(|n| seen.insert(n.clone())) {
            return invalid("duplicate marked-point name");
        }
        let rank =
            rank.unwrap_or_else(|| peripheral.iter().map(|w| w.max_index()).max().unwrap_or(0));
        for w in &peripheral {
            w.check_rank(rank)?;
        }
        let product = peripheral
            .iter()
            .fold(FreeWord::identity(), |acc, w| acc.mul(w));
        if !product.is_identity() {
            return invalid(format!(
                "product of peripheral words is {product}, not trivial"
            ));
        }
        Ok(Signature {
            names,
            orders,
            peripheral,
            rank,
        })
    }

    /// Signature of a free orbisphere group: generator `i` is the peripheral
    /// word of point `i`, the last point carries `(g_1 ... g_n)^-1`.
    pub fn free(names: &[&str]) -> Result<Self> {
        let n = names.len();
        if n < 2 {
            return invalid("need at least two marked points");
        }
        let mut peripheral: Vec<FreeWord> = (1..n as Letter).map(FreeWord::generator).collect();
        peripheral.push(FreeWord::new((1..n as Letter).rev().map(|i| -i)));
        Signature::new(
            names.iter().map(|s| s.to_string()).collect(),
            vec![Order::Infinite; n],
            peripheral,
        )
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }

    pub fn peripheral(&self) -> &[FreeWord] {
        &self.peripheral
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Marked point whose peripheral word is the single generator `g_i`.
    pub fn point_of_generator(&self, i: usize) -> Option<usize> {
        self.peripheral
            .iter()
            .position(|w| w.letters() == [i as Letter])
    }

    /// Checks the free-group restriction used by the wreath backend: all
    /// orders infinite, every generator is the peripheral word of exactly one
    /// point, and exactly one further point carries the dependent word.
    pub fn check_free(&self) -> Result<()> {
        if self.orders.iter().any(|o| *o != Order::Infinite) {
            return invalid("free backend requires all orders infinite");
        }
        if self.len() != self.rank + 1 {
            return invalid("free backend requires rank = number of points - 1");
        }
        for i in 1..=self.rank {
            let count = self
                .peripheral
                .iter()
                .filter(|w| w.letters() == [i as Letter])
                .count();
            if count != 1 {
                return invalid(format!(
                    "generator {i} is not the peripheral word of exactly one point"
                ));
            }
        }
        Ok(())
    }
}

/// Homomorphism between free groups, given by images of generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupHom {
    pub images: Vec<FreeWord>,
}

impl GroupHom {
    pub fn new(images: Vec<FreeWord>) -> Self {
        GroupHom { images }
    }

    pub fn identity(rank: usize) -> Self {
        GroupHom {
            images: (1..=rank as Letter).map(FreeWord::generator).collect(),
        }
    }

    pub fn source_rank(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, w: &FreeWord) -> Result<FreeWord> {
        w.check_rank(self.images.len())?;
        let mut out = FreeWord::identity();
        for &l in w.letters() {
            let img = &self.images[l.unsigned_abs() as usize - 1];
            out = if l > 0 {
                out.mul(img)
            } else {
                out.mul(&img.inverse())
            };
        }
        Ok(out)
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &GroupHom) -> Result<GroupHom> {
        Ok(GroupHom {
            images: inner
                .images
                .iter()
                .map(|w| self.apply(w))
                .collect::<Result<_>>()?,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(k, w)| w.letters() == [(k + 1) as Letter])
    }
}

/// Forgetful map erasing marked points of a free signature.
///
/// Erased generators map to the identity and the remaining generators are
/// renumbered in order. Erasing the point carrying the dependent word is
/// rejected. Returns the hom and the target signature.
pub fn forget(sig: &Signature, erased: &[usize]) -> Result<(GroupHom, Signature)> {
    sig.check_free()?;
    let mut new_index = vec![0 as Letter; sig.rank() + 1];
    let mut next = 0;
    for i in 1..=sig.rank() {
        let p = sig.point_of_generator(i).expect("checked free");
        if !erased.contains(&p) {
            next += 1;
            new_index[i] = next;
        }
    }
    for &p in erased {
        if p >= sig.len() {
            return invalid(format!("erased point {p} out of range"));
        }
        if sig.peripheral()[p].len() != 1 {
            return invalid("cannot erase the point carrying the dependent peripheral word");
        }
    }
    let hom = GroupHom::new(
        (1..=sig.rank())
            .map(|i| {
                if new_index[i] == 0 {
                    FreeWord::identity()
                } else {
                    FreeWord::generator(new_index[i])
                }
            })
            .collect(),
    );
    let mut names = Vec::new();
    let mut orders = Vec::new();
    let mut peripheral = Vec::new();
    for p in 0..sig.len() {
        if erased.contains(&p) {
            continue;
        }
        names.push(sig.names()[p].clone());
        orders.push(sig.orders()[p]);
        peripheral.push(hom.apply(&sig.peripheral()[p])?);
    }
    let target = Signature::with_rank(names, orders, peripheral, Some(next as usize))?;
    Ok((hom, target))
}

/// Shortlex enumeration of the ball of radius `r` in the free group of `rank`.
pub fn free_ball(rank: usize, r: usize) -> Vec<FreeWord> {
    let mut out = vec![FreeWord::identity()];
    let mut frontier = vec![FreeWord::identity()];
    let letters: Vec<Letter> = (1..=rank as Letter).flat_map(|i| [i, -i]).collect();
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                if w.letters().last() == Some(&-l) {
                    continue;
                }
                next.push(w.mul(&FreeWord::generator(l)));
            }
        }
        next.sort();
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(l: &[Letter]) -> FreeWord {
        FreeWord::new(l.iter().copied())
    }

    #[test]
    fn word_mul_examples() {
        assert_eq!(w(&[1]).mul(&w(&[-1])), w(&[]));
        assert_eq!(w(&[1, 2]).mul(&w(&[-2, 1])), w(&[1, 1]));
        assert_eq!(w(&[]).mul(&w(&[3])), w(&[3]));
    }

    #[test]
    fn apply_hom_examples() {
        assert_eq!(
            GroupHom::identity(2).apply(&w(&[1, -2])).unwrap(),
            w(&[1, -2])
        );
        let swap = GroupHom::new(vec![w(&[2]), w(&[1])]);
        assert_eq!(swap.apply(&w(&[1, 2])).unwrap(), w(&[2, 1]));
        let kill = GroupHom::new(vec![w(&[1]), w(&[])]);
        assert_eq!(kill.apply(&w(&[1, 2, -1])).unwrap(), w(&[]));
        assert!(swap.apply(&w(&[3])).is_err());
    }

    #[test]
    fn signature_relation_checked() {
        assert!(Signature::free(&["-1", "0", "inf"]).is_ok());
        let bad = Signature::new(
            vec!["a".into(), "b".into()],
            vec![Order::Infinite; 2],
            vec![w(&[1]), w(&[1])],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn conjugator_between_rotations() {
        let u = w(&[2, 1, 1, -2]);
        let v = w(&[1, 2, 1, 1, -2, -1]);
        let k = u.conjugator_to(&v).unwrap();
        assert_eq!(u.conjugate_by(&k), v);
        assert!(w(&[1, 2]).conjugator_to(&w(&[1, 1])).is_none());
    }

    #[test]
    fn power_detection() {
        let g = w(&[2, 1, -2]);
        assert_eq!(g.pow(3).power_of(&g), Some(3));
        assert_eq!(g.pow(-2).power_of(&g), Some(-2));
        assert_eq!(w(&[1]).power_of(&g), None);
    }

    #[test]
    fn forget_kills_erased_generator() {
        let sig = Signature::free(&["-1", "beta", "0", "inf"]).unwrap();
        let (h, target) = forget(&sig, &[1]).unwrap();
        assert_eq!(h.apply(&w(&[1, 2, 3])).unwrap(), w(&[1, 2]));
        assert_eq!(target.names(), &["-1", "0", "inf"]);
        assert_eq!(target.peripheral()[2], w(&[-2, -1]));
        assert!(forget(&sig, &[3]).is_err());
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(free_ball(2, 0).len(), 1);
        assert_eq!(free_ball(2, 1).len(), 5);
        assert_eq!(free_ball(2, 2).len(), 17);
    }
}
