//! Cyclic bisets `m b n = d m + b + n` over `Z`, and the invariants
//! `x_a = c_a/d + c_{f(a)}/d^2 + ...` of integer orbits in them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Result};
use crate::index::index_structure;
use crate::rational::Q;
use crate::Int;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclicBiset {
    d: Int,
}

impl CyclicBiset {
    pub fn new(d: Int) -> Result<Self> {
        if d.abs() < 2 {
            return invalid("cyclic biset degree must satisfy |d| >= 2");
        }
        Ok(CyclicBiset { d })
    }

    pub fn degree(&self) -> Int {
        self.d
    }

    /// `m b n`.
    pub fn act(&self, m: Int, b: Int, n: Int) -> Int {
        self.d * m + b + n
    }
}

/// An orbit `(c_a)` of biset elements with index map `f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclicOrbit {
    pub f: Vec<usize>,
    pub c: Vec<Int>,
}

impl CyclicOrbit {
    pub fn new(f: Vec<usize>, c: Vec<Int>) -> Result<Self> {
        if f.len() != c.len() || f.iter().any(|&j| j >= f.len()) {
            return invalid("cyclic orbit map and entries disagree");
        }
        Ok(CyclicOrbit { f, c })
    }

    /// `c_a -> l_a^-1 c_a l_{f(a)}`, i.e. `-d l_a + c_a + l_{f(a)}`.
    pub fn conjugate(&self, b: &CyclicBiset, ell: &[Int]) -> CyclicOrbit {
        let c = (0..self.c.len())
            .map(|a| b.act(-ell[a], self.c[a], ell[self.f[a]]))
            .collect();
        CyclicOrbit {
            f: self.f.clone(),
            c,
        }
    }

    /// Every entry shifted by `k`, the automorphism `b -> b + k`.
    pub fn shift(&self, k: Int) -> CyclicOrbit {
        CyclicOrbit {
            f: self.f.clone(),
            c: self.c.iter().map(|x| x + k).collect(),
        }
    }
}

fn frac(q: Q) -> Q {
    q - Q::from_integer(q.floor().to_integer())
}

/// `x_a` in `[0,1)` for each index. Exact sums are kept until the end since
/// the preperiodic step divides by `d`.
pub fn cyclic_invariant(b: &CyclicBiset, o: &CyclicOrbit) -> Result<Vec<Q>> {
    let d = b.degree();
    if d < 2 {
        return precondition("invariants are defined for d >= 2");
    }
    let n = o.f.len();
    let st = index_structure(&o.f);
    let mut x = vec![Q::from_integer(0); n];
    for cyc in &st.cycles {
        let k = cyc.len() as u32;
        let dk = d
            .checked_pow(k)
            .ok_or(crate::Error::Overflow("cyclic invariant"))?;
        // x_{i0} = (sum_j c_{f^j i0} d^{k-1-j}) / (d^k - 1)
        for s in 0..cyc.len() {
            let mut num: Int = 0;
            for j in 0..cyc.len() {
                let term = o.c[cyc[(s + j) % cyc.len()]]
                    .checked_mul(d.pow(k - 1 - j as u32))
                    .ok_or(crate::Error::Overflow("cyclic invariant"))?;
                num = num
                    .checked_add(term)
                    .ok_or(crate::Error::Overflow("cyclic invariant"))?;
            }
            x[cyc[s]] = Q::new(num, dk - 1);
        }
    }
    for &a in &st.preperiodic {
        x[a] = (Q::from_integer(o.c[a]) + x[o.f[a]]) / Q::from_integer(d);
    }
    Ok(x.into_iter().map(frac).collect())
}

/// Whether some two invariants coincide.
pub fn is_obstructed(x: &[Q]) -> bool {
    let mut v = x.to_vec();
    v.sort();
    v.windows(2).any(|p| p[0] == p[1])
}

/// `k` in `0..d-1` with `x'_a = x_a + k/(d-1)` mod 1 for all `a`.
pub fn cyclic_conjugate(b: &CyclicBiset, x: &[Q], x2: &[Q]) -> Result<Option<Int>> {
    let d = b.degree();
    if d < 2 {
        return precondition("invariants are defined for d >= 2");
    }
    if is_obstructed(x) || is_obstructed(x2) {
        return invalid("obstructed: invariant points are not pairwise different");
    }
    if x.len() != x2.len() {
        return Ok(None);
    }
    Ok((0..d - 1).find(|&k| {
        let s = Q::new(k, d - 1);
        x.iter().zip(x2).all(|(a, a2)| frac(*a + s) == *a2)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: Int, d: Int) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn invariant_examples() {
        let b2 = CyclicBiset::new(2).unwrap();
        let b3 = CyclicBiset::new(3).unwrap();
        let fixed = |c| CyclicOrbit::new(vec![0], vec![c]).unwrap();
        assert_eq!(cyclic_invariant(&b2, &fixed(0)).unwrap(), vec![q(0, 1)]);
        assert_eq!(cyclic_invariant(&b3, &fixed(1)).unwrap(), vec![q(1, 2)]);
        let two = CyclicOrbit::new(vec![1, 0], vec![1, 0]).unwrap();
        assert_eq!(cyclic_invariant(&b2, &two).unwrap(), vec![q(2, 3), q(1, 3)]);
        // preperiodic: 1/2 + x_fixed/2 with x_fixed = 0
        let pre = CyclicOrbit::new(vec![1, 1], vec![1, 0]).unwrap();
        assert_eq!(cyclic_invariant(&b2, &pre).unwrap(), vec![q(1, 2), q(0, 1)]);
    }

    #[test]
    fn conjugacy_examples() {
        let b = CyclicBiset::new(3).unwrap();
        let o = CyclicOrbit::new(vec![1, 0], vec![1, 0]).unwrap();
        let x = cyclic_invariant(&b, &o).unwrap();
        assert_eq!(cyclic_conjugate(&b, &x, &x).unwrap(), Some(0));
        let x1 = cyclic_invariant(&b, &o.shift(1)).unwrap();
        assert_eq!(cyclic_conjugate(&b, &x, &x1).unwrap(), Some(1));
        let other =
            cyclic_invariant(&b, &CyclicOrbit::new(vec![1, 0], vec![2, 0]).unwrap()).unwrap();
        assert_eq!(cyclic_conjugate(&b, &x, &other).unwrap(), None);
        let collide = vec![q(1, 3), q(1, 3)];
        assert!(cyclic_conjugate(&b, &collide, &x).is_err());
    }

    #[test]
    fn conjugation_preserves_invariants() {
        let b = CyclicBiset::new(5).unwrap();
        let o = CyclicOrbit::new(vec![1, 2, 0, 0], vec![3, -7, 11, 2]).unwrap();
        let c = o.conjugate(&b, &[4, -2, 9, 1]);
        assert_eq!(
            cyclic_invariant(&b, &o).unwrap(),
            cyclic_invariant(&b, &c).unwrap()
        );
    }
}
