//! 2x2 integer matrices: conjugacy in SL2(Z), centralizers, unit equations.
//!
//! Every matrix `M = (a b; c d)` carries the binary quadratic form
//! `f_M(v) = det(v, Mv) = c x^2 + (d-a) xy - b y^2`. For `X` in SL2(Z),
//! `f_{X^-1 M X} = f_M . X`, and `M` is recovered from its trace and `f_M`.
//! Conjugacy of non-scalar matrices with equal trace therefore reduces to
//! proper equivalence of forms, decided by reduction theory for every
//! discriminant sign.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::Int;

/// Row-major integer matrix `(a b; c d)`, serialized as `[[a,b],[c,d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[[Int; 2]; 2]", into = "[[Int; 2]; 2]")]
pub struct IntMatrix2 {
    pub a: Int,
    pub b: Int,
    pub c: Int,
    pub d: Int,
}

impl From<[[Int; 2]; 2]> for IntMatrix2 {
    fn from(m: [[Int; 2]; 2]) -> Self {
        IntMatrix2 {
            a: m[0][0],
            b: m[0][1],
            c: m[1][0],
            d: m[1][1],
        }
    }
}

impl From<IntMatrix2> for [[Int; 2]; 2] {
    fn from(m: IntMatrix2) -> Self {
        [[m.a, m.b], [m.c, m.d]]
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.a, self.b, self.c, self.d)
    }
}

fn cmul(x: Int, y: Int) -> Int {
    x.checked_mul(y)
        .expect("integer overflow in matrix arithmetic")
}

fn cadd(x: Int, y: Int) -> Int {
    x.checked_add(y)
        .expect("integer overflow in matrix arithmetic")
}

impl IntMatrix2 {
    pub const fn new(a: Int, b: Int, c: Int, d: Int) -> Self {
        IntMatrix2 { a, b, c, d }
    }

    pub const fn identity() -> Self {
        IntMatrix2::new(1, 0, 0, 1)
    }

    pub const fn scalar(k: Int) -> Self {
        IntMatrix2::new(k, 0, 0, k)
    }

    /// `S = (0,-1;1,0)`.
    pub const fn s() -> Self {
        IntMatrix2::new(0, -1, 1, 0)
    }

    /// `T = (1,1;0,1)`.
    pub const fn t() -> Self {
        IntMatrix2::new(1, 1, 0, 1)
    }

    pub fn det(&self) -> Int {
        cmul(self.a, self.d) - cmul(self.b, self.c)
    }

    pub fn trace(&self) -> Int {
        self.a + self.d
    }

    pub fn mul(&self, o: &IntMatrix2) -> IntMatrix2 {
        IntMatrix2 {
            a: cadd(cmul(self.a, o.a), cmul(self.b, o.c)),
            b: cadd(cmul(self.a, o.b), cmul(self.b, o.d)),
            c: cadd(cmul(self.c, o.a), cmul(self.d, o.c)),
            d: cadd(cmul(self.c, o.b), cmul(self.d, o.d)),
        }
    }

    /// Checked product, `None` on overflow.
    pub fn checked_mul(&self, o: &IntMatrix2) -> Option<IntMatrix2> {
        let f = |x: Int, y: Int, z: Int, w: Int| x.checked_mul(y)?.checked_add(z.checked_mul(w)?);
        Some(IntMatrix2 {
            a: f(self.a, o.a, self.b, o.c)?,
            b: f(self.a, o.b, self.b, o.d)?,
            c: f(self.c, o.a, self.d, o.c)?,
            d: f(self.c, o.b, self.d, o.d)?,
        })
    }

    pub fn add(&self, o: &IntMatrix2) -> IntMatrix2 {
        IntMatrix2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    pub fn sub(&self, o: &IntMatrix2) -> IntMatrix2 {
        IntMatrix2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }

    pub fn scale(&self, k: Int) -> IntMatrix2 {
        IntMatrix2::new(
            cmul(k, self.a),
            cmul(k, self.b),
            cmul(k, self.c),
            cmul(k, self.d),
        )
    }

    pub fn neg(&self) -> IntMatrix2 {
        self.scale(-1)
    }

    /// Adjugate `(d,-b;-c,a)`; the inverse when `det = 1`.
    pub fn adj(&self) -> IntMatrix2 {
        IntMatrix2::new(self.d, -self.b, -self.c, self.a)
    }

    /// Inverse of a determinant `+-1` matrix.
    pub fn unimodular_inverse(&self) -> Option<IntMatrix2> {
        match self.det() {
            1 => Some(self.adj()),
            -1 => Some(self.adj().neg()),
            _ => None,
        }
    }

    pub fn pow(&self, k: u32) -> IntMatrix2 {
        (0..k).fold(IntMatrix2::identity(), |acc, _| acc.mul(self))
    }

    pub fn apply(&self, v: [Int; 2]) -> [Int; 2] {
        [
            cadd(cmul(self.a, v[0]), cmul(self.b, v[1])),
            cadd(cmul(self.c, v[0]), cmul(self.d, v[1])),
        ]
    }

    pub fn is_scalar(&self) -> bool {
        self.b == 0 && self.c == 0 && self.a == self.d
    }

    pub fn mod2(&self) -> [u8; 4] {
        [self.a, self.b, self.c, self.d].map(|x| x.rem_euclid(2) as u8)
    }

    /// Conjugate `X^-1 self X` for `X` in SL2(Z).
    pub fn conjugate_by(&self, x: &IntMatrix2) -> IntMatrix2 {
        x.adj().mul(self).mul(x)
    }

    /// `f_M = (c, d-a, -b)`.
    pub fn form(&self) -> QuadForm {
        QuadForm {
            a: self.c,
            b: self.d - self.a,
            c: -self.b,
        }
    }

    pub fn commutes_with(&self, o: &IntMatrix2) -> bool {
        self.mul(o) == o.mul(self)
    }
}

/// True iff `det X = 1` and `X = I mod 2`.
pub fn is_gamma2(x: &IntMatrix2) -> bool {
    x.det() == 1 && x.mod2() == [1, 0, 0, 1]
}

/// Integer square root of a nonnegative integer.
pub fn isqrt(n: Int) -> Int {
    assert!(n >= 0, "isqrt of a negative number");
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as Int;
    while x > 0 && x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

pub fn exact_sqrt(n: Int) -> Option<Int> {
    if n < 0 {
        return None;
    }
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Binary quadratic form `a x^2 + b xy + c y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: Int,
    pub b: Int,
    pub c: Int,
}

impl QuadForm {
    pub fn disc(&self) -> Int {
        cmul(self.b, self.b) - cmul(4, cmul(self.a, self.c))
    }

    pub fn eval(&self, x: Int, y: Int) -> Int {
        cmul(self.a, cmul(x, x)) + cmul(self.b, cmul(x, y)) + cmul(self.c, cmul(y, y))
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }

    /// `f . X` for `X = (p q; r s)`.
    pub fn act(&self, x: &IntMatrix2) -> QuadForm {
        let (p, q, r, s) = (x.a, x.b, x.c, x.d);
        QuadForm {
            a: self.eval(p, r),
            b: cmul(cmul(2, self.a), cmul(p, q))
                + cmul(self.b, cmul(p, s) + cmul(q, r))
                + cmul(cmul(2, self.c), cmul(r, s)),
            c: self.eval(q, s),
        }
    }

    fn neg(&self) -> QuadForm {
        QuadForm {
            a: -self.a,
            b: -self.b,
            c: -self.c,
        }
    }

    pub fn content(&self) -> Int {
        self.a.gcd(&self.b).gcd(&self.c)
    }
}

fn translate(k: Int) -> IntMatrix2 {
    IntMatrix2::new(1, k, 0, 1)
}

/// Canonical data of a form under proper equivalence, with the transform
/// `R` such that `f . R` is the representative.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Reduced {
    /// A unique representative: definite, square or zero discriminant.
    Unique(QuadForm),
    /// A reduced form on a cycle (indefinite, non-square discriminant).
    Cycle(QuadForm),
}

fn reduce_definite(f: &QuadForm) -> (QuadForm, IntMatrix2) {
    let negative = f.a < 0;
    let mut g = if negative { f.neg() } else { *f };
    let mut r = IntMatrix2::identity();
    loop {
        let k = Integer::div_floor(&(g.a - g.b), &(2 * g.a));
        if k != 0 {
            let t = translate(k);
            g = g.act(&t);
            r = r.mul(&t);
        }
        if g.a > g.c {
            g = g.act(&IntMatrix2::s());
            r = r.mul(&IntMatrix2::s());
        } else {
            break;
        }
    }
    if g.a == g.c && g.b < 0 {
        g = g.act(&IntMatrix2::s());
        r = r.mul(&IntMatrix2::s());
    }
    (if negative { g.neg() } else { g }, r)
}

/// Completes a primitive vector `(p, r)` to a matrix in SL2(Z).
fn complete_column(p: Int, r: Int) -> IntMatrix2 {
    let e = p.extended_gcd(&r);
    debug_assert_eq!(e.gcd.abs(), 1);
    let (u, w) = if e.gcd == 1 { (e.x, e.y) } else { (-e.x, -e.y) };
    IntMatrix2::new(p, -w, r, u)
}

fn primitive(p: Int, r: Int) -> (Int, Int) {
    let g = p.gcd(&r);
    (p / g, r / g)
}

fn reduce_square(f: &QuadForm, n: Int) -> (QuadForm, IntMatrix2) {
    let roots: Vec<(Int, Int)> = if f.a == 0 {
        vec![(1, 0), primitive(-f.c, f.b)]
    } else {
        vec![primitive(-f.b + n, 2 * f.a), primitive(-f.b - n, 2 * f.a)]
    };
    for (p, r) in roots {
        let x1 = complete_column(p, r);
        let g = f.act(&x1);
        debug_assert_eq!(g.a, 0);
        if g.b == n {
            let k = -Integer::div_floor(&g.c, &n);
            let t = translate(k);
            return (g.act(&t), x1.mul(&t));
        }
    }
    unreachable!("one rational root of a square-discriminant form gives middle coefficient +n")
}

fn reduce_parabolic(f: &QuadForm) -> (QuadForm, IntMatrix2) {
    let (p, r) = if f.a != 0 {
        primitive(-f.b, 2 * f.a)
    } else {
        (1, 0)
    };
    let x1 = complete_column(p, r);
    (f.act(&x1), x1)
}

struct Indefinite {
    s: Int,
}

impl Indefinite {
    fn new(disc: Int) -> Self {
        Indefinite { s: isqrt(disc) }
    }

    fn is_reduced(&self, f: &QuadForm) -> bool {
        let a2 = 2 * f.a.abs();
        f.b > 0 && f.b <= self.s && a2 - f.b <= self.s && a2 + f.b > self.s
    }

    /// Normalizes the middle coefficient modulo `2a`.
    fn normalize(&self, f: &QuadForm) -> (QuadForm, IntMatrix2) {
        let aa = f.a.abs();
        let m = 2 * aa;
        let target = if aa > self.s {
            (f.b + aa - 1).rem_euclid(m) - aa + 1
        } else {
            self.s - (self.s - f.b).rem_euclid(m)
        };
        let k = (target - f.b) / (2 * f.a);
        let t = translate(k);
        (f.act(&t), t)
    }

    fn rho(&self, f: &QuadForm) -> (QuadForm, IntMatrix2) {
        let g = f.act(&IntMatrix2::s());
        let (h, t) = self.normalize(&g);
        (h, IntMatrix2::s().mul(&t))
    }

    fn reduce(&self, f: &QuadForm) -> (QuadForm, IntMatrix2) {
        let (mut g, mut r) = self.normalize(f);
        while !self.is_reduced(&g) {
            let (h, t) = self.rho(&g);
            g = h;
            r = r.mul(&t);
        }
        (g, r)
    }

    /// Walks the cycle of a reduced form; returns the transform to `target`
    /// if it lies on the cycle, else `None`.
    fn find_on_cycle(&self, start: &QuadForm, target: &QuadForm) -> Option<IntMatrix2> {
        let mut g = *start;
        let mut p = IntMatrix2::identity();
        loop {
            if g == *target {
                return Some(p);
            }
            let (h, t) = self.rho(&g);
            g = h;
            p = p.mul(&t);
            if g == *start {
                return None;
            }
        }
    }

    /// Product of the transforms around the full cycle: a generator of the
    /// proper automorphs modulo sign.
    fn cycle_automorph(&self, start: &QuadForm) -> IntMatrix2 {
        let mut g = *start;
        let mut p = IntMatrix2::identity();
        loop {
            let (h, t) = self.rho(&g);
            g = h;
            p = p.mul(&t);
            if g == *start {
                return p;
            }
        }
    }
}

fn reduce_form(f: &QuadForm) -> (Reduced, IntMatrix2) {
    let disc = f.disc();
    if f.is_zero() {
        return (Reduced::Unique(*f), IntMatrix2::identity());
    }
    if disc < 0 {
        let (g, r) = reduce_definite(f);
        return (Reduced::Unique(g), r);
    }
    if disc == 0 {
        let (g, r) = reduce_parabolic(f);
        return (Reduced::Unique(g), r);
    }
    if let Some(n) = exact_sqrt(disc) {
        let (g, r) = reduce_square(f, n);
        return (Reduced::Unique(g), r);
    }
    let ind = Indefinite::new(disc);
    let (g, r) = ind.reduce(f);
    (Reduced::Cycle(g), r)
}

/// Some `X` in SL2(Z) with `f . X = g`, if the forms are properly equivalent.
pub fn form_equivalence(f: &QuadForm, g: &QuadForm) -> Option<IntMatrix2> {
    if f.disc() != g.disc() {
        return None;
    }
    let (rf, tf) = reduce_form(f);
    let (rg, tg) = reduce_form(g);
    let mid = match (&rf, &rg) {
        (Reduced::Unique(a), Reduced::Unique(b)) => (a == b).then(IntMatrix2::identity)?,
        (Reduced::Cycle(a), Reduced::Cycle(b)) => Indefinite::new(f.disc()).find_on_cycle(a, b)?,
        _ => return None,
    };
    let x = tf.mul(&mid).mul(&tg.adj());
    debug_assert_eq!(f.act(&x), *g);
    Some(x)
}

/// Decides conjugacy in SL2(Z): returns `X` with `det X = 1` and
/// `X^-1 M X = N`, or `None` when no such `X` exists.
///
/// Matrices conjugate only by a determinant `-1` matrix are reported as not
/// conjugate.
pub fn sl2_conjugator(m: &IntMatrix2, n: &IntMatrix2) -> Result<Option<IntMatrix2>> {
    let (dm, dn) = (m.det(), n.det());
    if dm != dn {
        return precondition(format!("determinants differ: {dm} vs {dn}"));
    }
    if dm <= 0 {
        return precondition(format!("determinant {dm} is not positive"));
    }
    Ok(conjugator_unchecked(m, n))
}

/// Conjugacy test without the determinant precondition.
pub fn conjugator_unchecked(m: &IntMatrix2, n: &IntMatrix2) -> Option<IntMatrix2> {
    if m.trace() != n.trace() || m.det() != n.det() {
        return None;
    }
    if m.is_scalar() || n.is_scalar() {
        return (m == n).then(IntMatrix2::identity);
    }
    let x = form_equivalence(&m.form(), &n.form())?;
    debug_assert_eq!(m.conjugate_by(&x), *n);
    Some(x)
}

/// Integer solutions of `a^2 + t ab + d b^2 = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PellSolutions {
    /// Definite or square discriminant: the complete finite list.
    Finite { solutions: Vec<(Int, Int)> },
    /// Positive non-square discriminant: all solutions are `+-eps^k` with
    /// `eps = a + b x` in `Z[x]/(x^2 - t x + d)`.
    Fundamental { a: Int, b: Int },
    /// Zero discriminant: `+-(base + k step)` for `k` in `Z`.
    Family { base: (Int, Int), step: (Int, Int) },
}

fn companion(t: Int, d: Int) -> IntMatrix2 {
    IntMatrix2::new(0, -d, 1, t)
}

/// Solves `a^2 + t ab + d b^2 = 1`, the determinant equation of `aI + bM`
/// for `tr M = t` and `det M = d`.
pub fn pell_units(t: Int, d: Int) -> PellSolutions {
    let disc = cmul(t, t) - cmul(4, d);
    let form = QuadForm { a: 1, b: t, c: d };
    if disc < 0 {
        // (2a + tb)^2 - disc b^2 = 4 forces |b| <= 1
        let mut sols = Vec::new();
        for b in -1..=1 {
            let rad = cmul(t * b, t * b) - 4 * (d * b * b - 1);
            if let Some(r) = exact_sqrt(rad) {
                for s in [r, -r] {
                    let num = -t * b + s;
                    if num % 2 == 0 && form.eval(num / 2, b) == 1 && !sols.contains(&(num / 2, b)) {
                        sols.push((num / 2, b));
                    }
                }
            }
        }
        sols.sort();
        return PellSolutions::Finite { solutions: sols };
    }
    if disc == 0 {
        return PellSolutions::Family {
            base: (1, 0),
            step: (-t / 2, 1),
        };
    }
    if exact_sqrt(disc).is_some() {
        return PellSolutions::Finite {
            solutions: vec![(-1, 0), (1, 0)],
        };
    }
    let ind = Indefinite::new(disc);
    let (g, r) = ind.reduce(&form);
    let p = ind.cycle_automorph(&g);
    let u = r.mul(&p).mul(&r.adj());
    debug_assert!(u.commutes_with(&companion(t, d)));
    let (a, b) = (u.a, u.c);
    let cands = [(a, b), (-a, -b), (a + t * b, -b), (-a - t * b, b)];
    let (a, b) = cands
        .into_iter()
        .filter(|&(_, b)| b > 0)
        .max_by_key(|&(a, _)| a)
        .expect("a unit with positive b exists");
    PellSolutions::Fundamental { a, b }
}

/// Rank of the centralizer modulo torsion; `Full` marks all of SL2(Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentralizerRank {
    Zero,
    One,
    Full,
}

/// Generators of `{X in SL2(Z) : XM = MX}`.
///
/// For rank `Full` the torsion list is `[-I, S]` and the free generator is
/// `T`, which together generate SL2(Z).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralizerDescription {
    pub torsion: Vec<IntMatrix2>,
    pub free: Option<IntMatrix2>,
    pub rank: CentralizerRank,
}

fn matrix_order(x: &IntMatrix2) -> Option<u32> {
    let mut p = *x;
    for k in 1..=12 {
        if p == IntMatrix2::identity() {
            return Some(k);
        }
        p = p.mul(x);
    }
    None
}

/// Decomposition `M = lambda I + g M0` with `M0 = (0, b/g; c/g, (d-a)/g)`.
fn primitive_part(m: &IntMatrix2) -> Option<IntMatrix2> {
    let g = m.b.gcd(&m.c).gcd(&(m.d - m.a));
    if g == 0 {
        return None;
    }
    Some(IntMatrix2::new(0, m.b / g, m.c / g, (m.d - m.a) / g))
}

pub fn sl2_centralizer(m: &IntMatrix2) -> CentralizerDescription {
    let minus = IntMatrix2::scalar(-1);
    let Some(m0) = primitive_part(m) else {
        return CentralizerDescription {
            torsion: vec![minus, IntMatrix2::s()],
            free: Some(IntMatrix2::t()),
            rank: CentralizerRank::Full,
        };
    };
    let lin = |a: Int, b: Int| IntMatrix2::scalar(a).add(&m0.scale(b));
    match pell_units(m0.trace(), m0.det()) {
        PellSolutions::Fundamental { a, b } => CentralizerDescription {
            torsion: vec![minus],
            free: Some(lin(a, b)),
            rank: CentralizerRank::One,
        },
        PellSolutions::Family { base, step } => CentralizerDescription {
            torsion: vec![minus],
            free: Some(lin(base.0 + step.0, base.1 + step.1)),
            rank: CentralizerRank::One,
        },
        PellSolutions::Finite { solutions } => {
            let best = solutions
                .iter()
                .map(|&(a, b)| (lin(a, b), a, b))
                .filter(|(x, _, _)| matrix_order(x).is_some_and(|o| o > 2))
                .max_by_key(|&(x, a, b)| (matrix_order(&x), b > 0, a));
            let mut torsion = vec![minus];
            if let Some((x, _, _)) = best {
                torsion.push(x);
            }
            CentralizerDescription {
                torsion,
                free: None,
                rank: CentralizerRank::Zero,
            }
        }
    }
}

impl CentralizerDescription {
    pub fn generators(&self) -> Vec<IntMatrix2> {
        let mut g = self.torsion.clone();
        g.extend(self.free);
        g
    }

    fn torsion_group(&self) -> Vec<IntMatrix2> {
        let mut group = vec![IntMatrix2::identity()];
        let mut k = 0;
        while k < group.len() {
            for t in &self.torsion {
                let x = group[k].mul(t);
                if !group.contains(&x) {
                    group.push(x);
                }
            }
            k += 1;
            if group.len() > 24 {
                break;
            }
        }
        group
    }

    /// Membership of `X` in the group generated by the description, found by
    /// dividing out powers of the free generator up to exponent `max_power`.
    pub fn contains(&self, x: &IntMatrix2, max_power: u32) -> bool {
        if x.det() != 1 {
            return false;
        }
        if self.rank == CentralizerRank::Full {
            return true;
        }
        let tors = self.torsion_group();
        let Some(u) = self.free else {
            return tors.contains(x);
        };
        let uinv = u.adj();
        let (mut up, mut down) = (*x, *x);
        for _ in 0..=max_power {
            if tors.contains(&up) || tors.contains(&down) {
                return true;
            }
            match (up.checked_mul(&uinv), down.checked_mul(&u)) {
                (Some(a), Some(b)) => {
                    up = a;
                    down = b;
                }
                _ => return false,
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(a: Int, b: Int, c: Int, d: Int) -> IntMatrix2 {
        IntMatrix2::new(a, b, c, d)
    }

    /// Independent conjugator search over a box of SL2(Z).
    fn brute_conjugator(x: &IntMatrix2, y: &IntMatrix2, bound: Int) -> Option<IntMatrix2> {
        for p in -bound..=bound {
            for q in -bound..=bound {
                for r in -bound..=bound {
                    for s in -bound..=bound {
                        let c = m(p, q, r, s);
                        if c.det() == 1 && x.mul(&c) == c.mul(y) {
                            return Some(c);
                        }
                    }
                }
            }
        }
        None
    }

    #[test]
    fn conjugator_examples() {
        let x = sl2_conjugator(&m(2, 1, 1, 1), &m(1, 1, 1, 2))
            .unwrap()
            .unwrap();
        assert_eq!(m(2, 1, 1, 1).conjugate_by(&x), m(1, 1, 1, 2));
        assert_eq!(
            sl2_conjugator(&m(1, 1, 0, 1), &m(1, 2, 0, 1)).unwrap(),
            None
        );
        assert_eq!(
            sl2_conjugator(&IntMatrix2::scalar(2), &IntMatrix2::scalar(2)).unwrap(),
            Some(IntMatrix2::identity())
        );
        assert!(sl2_conjugator(&m(2, 0, 0, 1), &m(1, 0, 0, 1)).is_err());
        assert!(sl2_conjugator(&m(0, 1, 1, 0), &m(0, 1, 1, 0)).is_err());
    }

    #[test]
    fn parabolic_rejection_agrees_with_search() {
        assert!(brute_conjugator(&m(1, 1, 0, 1), &m(1, 2, 0, 1), 6).is_none());
    }

    #[test]
    fn verdicts_agree_with_search_on_small_matrices() {
        let mut mats = Vec::new();
        for a in -3..=3 {
            for b in -3..=3 {
                for c in -3..=3 {
                    for d in -3..=3 {
                        let x = m(a, b, c, d);
                        if x.det() >= 1 && x.det() <= 3 && !x.is_scalar() {
                            mats.push(x);
                        }
                    }
                }
            }
        }
        let mut checked = 0;
        for (i, x) in mats.iter().enumerate().step_by(7) {
            for y in mats.iter().skip(i % 5).step_by(11) {
                if x.trace() != y.trace() || x.det() != y.det() {
                    continue;
                }
                let fast = sl2_conjugator(x, y).unwrap();
                if let Some(c) = fast {
                    assert_eq!(x.conjugate_by(&c), *y);
                } else {
                    assert!(brute_conjugator(x, y, 4).is_none(), "{x} ~ {y} missed");
                }
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn centralizer_examples() {
        let z = sl2_centralizer(&m(2, 1, 1, 1));
        assert_eq!(z.rank, CentralizerRank::One);
        assert_eq!(z.torsion, vec![IntMatrix2::scalar(-1)]);
        assert_eq!(z.free, Some(m(2, 1, 1, 1)));

        let z = sl2_centralizer(&m(0, -1, 1, 0));
        assert_eq!(z.rank, CentralizerRank::Zero);
        assert_eq!(z.torsion, vec![IntMatrix2::scalar(-1), m(0, -1, 1, 0)]);

        let z = sl2_centralizer(&IntMatrix2::identity());
        assert_eq!(z.rank, CentralizerRank::Full);
    }

    #[test]
    fn centralizer_complete_on_box() {
        for mat in [
            m(2, 1, 1, 1),
            m(1, 1, 0, 1),
            m(3, 2, 1, 1),
            m(0, -1, 1, 1),
            m(4, 1, 2, 3),
            m(2, 3, 1, 2),
        ] {
            let z = sl2_centralizer(&mat);
            for g in z.generators() {
                assert!(g.commutes_with(&mat));
            }
            for p in -12..=12 {
                for q in -12..=12 {
                    for r in -12..=12 {
                        // s is determined by commuting with a non-scalar matrix
                        for s in [p - 24, p - 12, p, p + 12, p + 24]
                            .into_iter()
                            .chain(-12..=12)
                        {
                            let x = m(p, q, r, s);
                            if x.det() == 1 && x.commutes_with(&mat) {
                                assert!(z.contains(&x, 40), "{x} commutes with {mat}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pell_examples() {
        assert_eq!(pell_units(3, 1), PellSolutions::Fundamental { a: 0, b: 1 });
        assert_eq!(
            pell_units(0, 1),
            PellSolutions::Finite {
                solutions: vec![(-1, 0), (0, -1), (0, 1), (1, 0)]
            }
        );
        assert_eq!(
            pell_units(2, 1),
            PellSolutions::Family {
                base: (1, 0),
                step: (-1, 1)
            }
        );
    }

    #[test]
    fn pell_fundamental_is_minimal() {
        for (t, d) in [(3, 1), (4, 1), (1, -1), (0, -2), (5, 3), (2, -7), (6, 2)] {
            let PellSolutions::Fundamental { a, b } = pell_units(t, d) else {
                panic!("expected fundamental solution for t={t} d={d}");
            };
            assert_eq!(a * a + t * a * b + d * b * b, 1);
            for bb in 1..b {
                for aa in -200..=200 {
                    assert_ne!(
                        aa * aa + t * aa * bb + d * bb * bb,
                        1,
                        "smaller solution for t={t} d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn gamma2_examples() {
        assert!(!is_gamma2(&m(1, 2, 2, 1)));
        assert!(is_gamma2(&m(3, 2, 4, 3)));
        assert!(!is_gamma2(&m(0, -1, 1, 0)));
    }

    #[test]
    fn isqrt_edges() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(15), 3);
        assert_eq!(isqrt(16), 4);
        assert_eq!(isqrt(i128::MAX), 13043817825332782212);
    }
}
