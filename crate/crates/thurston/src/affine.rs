//! The group `G = Z^2 x| {+1,-1}` acting on the plane by `z -> e z + t`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rational::{QVec, Q};
use crate::words::{FreeWord, Letter, Order, Signature};
use crate::Int;

/// A sign in `{+1, -1}`, serialized as an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl TryFrom<i8> for Sign {
    type Error = Error;
    fn try_from(e: i8) -> Result<Self> {
        match e {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => invalid(format!("sign must be +1 or -1, got {e}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Sign {
    pub fn value(self) -> Int {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn mul(self, o: Sign) -> Sign {
        if self == o {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn from_value(v: Int) -> Sign {
        if v < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

pub type Vec2 = [Int; 2];

pub fn vadd(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn vsub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn vscale(s: Int, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

pub fn vmod2(a: Vec2) -> [u8; 2] {
    [a[0].rem_euclid(2) as u8, a[1].rem_euclid(2) as u8]
}

/// Element `z -> e z + t` of `G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineElement {
    pub t: Vec2,
    pub e: Sign,
}

impl fmt::Display for AffineElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({},{}),{:+})", self.t[0], self.t[1], i8::from(self.e))
    }
}

impl AffineElement {
    pub fn new(t: Vec2, e: Sign) -> Self {
        AffineElement { t, e }
    }

    pub fn translation(t: Vec2) -> Self {
        AffineElement { t, e: Sign::Plus }
    }

    pub fn involution(t: Vec2) -> Self {
        AffineElement { t, e: Sign::Minus }
    }

    pub fn identity() -> Self {
        AffineElement::translation([0, 0])
    }

    pub fn is_identity(&self) -> bool {
        *self == AffineElement::identity()
    }

    /// `(n, s)(m, d) = (n + s m, s d)`.
    pub fn mul(&self, o: &AffineElement) -> AffineElement {
        AffineElement {
            t: vadd(self.t, vscale(self.e.value(), o.t)),
            e: self.e.mul(o.e),
        }
    }

    pub fn inverse(&self) -> AffineElement {
        AffineElement {
            t: vscale(-self.e.value(), self.t),
            e: self.e,
        }
    }

    pub fn pow(&self, k: i64) -> AffineElement {
        let base = if k < 0 { self.inverse() } else { *self };
        (0..k.unsigned_abs()).fold(AffineElement::identity(), |acc, _| acc.mul(&base))
    }

    pub fn act(&self, z: &QVec) -> QVec {
        let s = Q::from_integer(self.e.value());
        z.scale(s).add(&QVec::from_int(self.t))
    }
}

/// Conjugacy class of an involution: its translation part mod 2.
pub fn order2_class(a: &AffineElement) -> Result<[u8; 2]> {
    if a.e == Sign::Plus {
        return invalid(format!("{a} has infinite order or is trivial"));
    }
    Ok(vmod2(a.t))
}

/// Standard identification of the four cone points with involutions at
/// `(0,0), (1,0), (1,1), (0,1)`, in that order.
pub fn standard_assignment() -> [AffineElement; 4] {
    [
        AffineElement::involution([0, 0]),
        AffineElement::involution([1, 0]),
        AffineElement::involution([1, 1]),
        AffineElement::involution([0, 1]),
    ]
}

/// Signature for the standard `(2,2,2,2)` presentation: generators
/// `1, 2, 3` are the first three points, the fourth is `(g1 g2 g3)^-1`.
pub fn standard_2222_signature() -> Signature {
    Signature::new(
        vec!["p0".into(), "p1".into(), "p2".into(), "p3".into()],
        vec![Order::Finite(2); 4],
        vec![
            FreeWord::new([1]),
            FreeWord::new([2]),
            FreeWord::new([3]),
            FreeWord::new([-3, -2, -1]),
        ],
    )
    .expect("standard signature is valid")
}

/// A word in the standard `(2,2,2,2)` generators evaluating to `g` under
/// [`standard_assignment`].
pub fn standard_word_for(g: &AffineElement) -> FreeWord {
    // g1 g2 -> ((-1,0),+1), g2 g3 -> ((0,-1),+1)
    let tau1 = FreeWord::new([1, 2]);
    let tau2 = FreeWord::new([2, 3]);
    let mut w = tau1.pow(-(g.t[0] as i64)).mul(&tau2.pow(-(g.t[1] as i64)));
    if g.e == Sign::Minus {
        w = w.mul(&FreeWord::generator(1));
    }
    w
}

/// Validates an identification of a 4-point order-2 signature with `G`.
fn check_2222_assignment(sig: &Signature, assignment: &[AffineElement]) -> Result<()> {
    if sig.len() != 4 || sig.orders().iter().any(|o| *o != Order::Finite(2)) {
        return invalid("signature is not (2,2,2,2)");
    }
    if assignment.len() != 4 {
        return invalid("assignment needs one element per marked point");
    }
    let mut classes = Vec::new();
    for a in assignment {
        let c = order2_class(a)?;
        if classes.contains(&c) {
            return invalid("assigned involutions share a conjugacy class");
        }
        classes.push(c);
    }
    let product = assignment
        .iter()
        .fold(AffineElement::identity(), |acc, a| acc.mul(a));
    if !product.is_identity() {
        return invalid("assigned elements do not satisfy the sphere relation");
    }
    for i in 1..=sig.rank() {
        if sig.point_of_generator(i).is_none() {
            return invalid(format!("generator {i} is not a peripheral generator"));
        }
    }
    Ok(())
}

/// Evaluates `w` under the identification sending the peripheral generator
/// of point `p` to `assignment[p]`.
pub fn eval_2222(
    sig: &Signature,
    assignment: &[AffineElement],
    w: &FreeWord,
) -> Result<AffineElement> {
    check_2222_assignment(sig, assignment)?;
    w.check_rank(sig.rank())?;
    let gens: Vec<AffineElement> = (1..=sig.rank())
        .map(|i| assignment[sig.point_of_generator(i).expect("checked")])
        .collect();
    Ok(eval_letters(&gens, w))
}

/// Evaluates a word on given generator images without validation.
pub fn eval_letters(gens: &[AffineElement], w: &FreeWord) -> AffineElement {
    w.letters()
        .iter()
        .fold(AffineElement::identity(), |acc, &l: &Letter| {
            let g = gens[l.unsigned_abs() as usize - 1];
            acc.mul(&if l > 0 { g } else { g.inverse() })
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv(t: Vec2) -> AffineElement {
        AffineElement::involution(t)
    }

    #[test]
    fn affine_mul_examples() {
        assert!(inv([0, 0]).mul(&inv([0, 0])).is_identity());
        assert!(inv([1, 0]).mul(&inv([1, 0])).is_identity());
        assert_eq!(
            AffineElement::translation([1, 2]).mul(&AffineElement::translation([3, 4])),
            AffineElement::translation([4, 6])
        );
    }

    #[test]
    fn order2_class_examples() {
        assert_eq!(order2_class(&inv([0, 0])).unwrap(), [0, 0]);
        assert_eq!(order2_class(&inv([2, 3])).unwrap(), [0, 1]);
        assert!(order2_class(&AffineElement::translation([1, 1])).is_err());
    }

    #[test]
    fn eval_2222_examples() {
        let sig = standard_2222_signature();
        let asg = standard_assignment();
        assert!(eval_2222(&sig, &asg, &FreeWord::new([1, 1]))
            .unwrap()
            .is_identity());
        let relation = sig
            .peripheral()
            .iter()
            .fold(FreeWord::identity(), |a, w| a.mul(w));
        assert!(eval_2222(&sig, &asg, &relation).unwrap().is_identity());
        let g123 = eval_2222(&sig, &asg, &FreeWord::new([1, 2, 3])).unwrap();
        assert_eq!(g123.mul(&asg[3]), AffineElement::identity());
        assert_eq!(
            eval_2222(&sig, &asg, &FreeWord::new([1, 2])).unwrap(),
            AffineElement::translation([-1, 0])
        );
        let mut bad = asg;
        bad[1] = inv([2, 0]);
        assert!(eval_2222(&sig, &bad, &FreeWord::new([1])).is_err());
    }

    #[test]
    fn standard_words_evaluate_back() {
        let sig = standard_2222_signature();
        let asg = standard_assignment();
        for x in -3..=3 {
            for y in -3..=3 {
                for e in [Sign::Plus, Sign::Minus] {
                    let g = AffineElement::new([x, y], e);
                    assert_eq!(eval_2222(&sig, &asg, &standard_word_for(&g)).unwrap(), g);
                }
            }
        }
    }
}
