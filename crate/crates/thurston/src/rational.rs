//! Exact rational 2-vectors.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::Int;

pub type Q = Ratio<Int>;

/// Rational 2-vector, serialized as `[[num, den], [num, den]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[[Int; 2]; 2]", into = "[[Int; 2]; 2]")]
pub struct QVec(pub [Q; 2]);

impl TryFrom<[[Int; 2]; 2]> for QVec {
    type Error = Error;
    fn try_from(v: [[Int; 2]; 2]) -> Result<Self> {
        let mut out = [Q::zero(); 2];
        for k in 0..2 {
            let [n, d] = v[k];
            if d <= 0 || n.gcd(&d) != 1 {
                return invalid("rationals need a positive denominator coprime to the numerator");
            }
            out[k] = Q::new(n, d);
        }
        Ok(QVec(out))
    }
}

impl From<QVec> for [[Int; 2]; 2] {
    fn from(v: QVec) -> Self {
        [
            [*v.0[0].numer(), *v.0[0].denom()],
            [*v.0[1].numer(), *v.0[1].denom()],
        ]
    }
}

impl std::fmt::Display for QVec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.0[0], self.0[1])
    }
}

impl QVec {
    pub fn zero() -> Self {
        QVec([Q::zero(); 2])
    }

    pub fn from_int(v: [Int; 2]) -> Self {
        QVec([Q::from_integer(v[0]), Q::from_integer(v[1])])
    }

    pub fn add(&self, o: &QVec) -> QVec {
        QVec([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }

    pub fn sub(&self, o: &QVec) -> QVec {
        QVec([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }

    pub fn scale(&self, s: Q) -> QVec {
        QVec([self.0[0] * s, self.0[1] * s])
    }

    pub fn neg(&self) -> QVec {
        QVec([-self.0[0], -self.0[1]])
    }

    /// The integer vector, if both coordinates are integral.
    pub fn to_int(&self) -> Option<[Int; 2]> {
        if self.0.iter().all(|q| q.is_integer()) {
            Some([self.0[0].to_integer(), self.0[1].to_integer()])
        } else {
            None
        }
    }

    /// Coordinates reduced into `[0, 1)`.
    pub fn frac(&self) -> QVec {
        QVec([self.0[0] - self.0[0].floor(), self.0[1] - self.0[1].floor()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|q| q.is_zero())
    }
}

/// Rational 2x2 matrix used for exact solves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QMat(pub [[Q; 2]; 2]);

impl QMat {
    pub fn from_int(m: [[Int; 2]; 2]) -> Self {
        QMat([
            [Q::from_integer(m[0][0]), Q::from_integer(m[0][1])],
            [Q::from_integer(m[1][0]), Q::from_integer(m[1][1])],
        ])
    }

    pub fn identity() -> Self {
        QMat([[Q::one(), Q::zero()], [Q::zero(), Q::one()]])
    }

    pub fn det(&self) -> Q {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        let a = &self.0;
        let b = &o.0;
        let mut r = [[Q::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        QMat(r)
    }

    pub fn apply(&self, v: &QVec) -> QVec {
        QVec([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    pub fn scale(&self, s: Q) -> QMat {
        let mut r = self.0;
        for row in r.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        QMat(r)
    }

    pub fn sub(&self, o: &QMat) -> QMat {
        let mut r = self.0;
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] -= o.0[i][j];
            }
        }
        QMat(r)
    }

    pub fn inverse(&self) -> Option<QMat> {
        let d = self.det();
        if d.is_zero() {
            return None;
        }
        let a = &self.0;
        Some(QMat([
            [a[1][1] / d, -a[0][1] / d],
            [-a[1][0] / d, a[0][0] / d],
        ]))
    }

    /// Solves `self * x = b` by Cramer's rule.
    pub fn solve(&self, b: &QVec) -> Option<QVec> {
        self.inverse().map(|inv| inv.apply(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_roundtrip() {
        let m = QMat::from_int([[2, 1], [1, 1]]);
        let b = QVec::from_int([3, -4]);
        let x = m.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
    }

    #[test]
    fn serde_rejects_unreduced() {
        assert!(serde_json::from_str::<QVec>("[[2,4],[0,1]]").is_err());
        let v: QVec = serde_json::from_str("[[1,3],[-1,2]]").unwrap();
        assert_eq!(serde_json::to_string(&v).unwrap(), "[[1,3],[-1,2]]");
    }
}
