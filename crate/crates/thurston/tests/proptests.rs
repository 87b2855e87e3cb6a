//! Randomized invariants across the public API.

use proptest::prelude::*;

use thurston::affine::{AffineElement, Sign};
use thurston::cyclic::{cyclic_invariant, CyclicBiset, CyclicOrbit};
use thurston::io::{Document, OrbitDoc, Payload};
use thurston::rational::{QMat, QVec, Q};
use thurston::shadow::{forward, inverse_branch, shadow_orbit, SymbolicOrbitTor};
use thurston::sl2::{sl2_conjugator, IntMatrix2};
use thurston::tor::{biset_iso, conjugate_biset, AffineEndo, ModGElement, TorBiset};
use thurston::words::FreeWord;
use thurston::Int;

fn word(rank: i32) -> impl Strategy<Value = FreeWord> {
    prop::collection::vec((1..=rank, any::<bool>()), 0..12)
        .prop_map(|v| FreeWord::new(v.into_iter().map(|(g, s)| if s { g } else { -g })))
}

fn element() -> impl Strategy<Value = AffineElement> {
    ([-20i128..=20, -20i128..=20], any::<bool>())
        .prop_map(|(t, s)| AffineElement::new(t, if s { Sign::Plus } else { Sign::Minus }))
}

fn matrix(k: Int) -> impl Strategy<Value = IntMatrix2> {
    [-k..=k, -k..=k, -k..=k, -k..=k].prop_map(|[a, b, c, d]| IntMatrix2::new(a, b, c, d))
}

fn tor_biset() -> impl Strategy<Value = TorBiset> {
    (matrix(4), [-4i128..=4, -4i128..=4])
        .prop_filter_map("positive determinant", |(m, v)| TorBiset::new(m, v).ok())
}

/// Products of `(1,1;0,1)` and `(0,-1;1,0)` and their inverses.
fn sl2() -> impl Strategy<Value = IntMatrix2> {
    prop::collection::vec(0usize..4, 0..8).prop_map(|v| {
        let gens = [
            IntMatrix2::new(1, 1, 0, 1),
            IntMatrix2::new(1, -1, 0, 1),
            IntMatrix2::new(0, -1, 1, 0),
            IntMatrix2::new(0, 1, -1, 0),
        ];
        v.into_iter()
            .fold(IntMatrix2::identity(), |acc, i| acc.mul(&gens[i]))
    })
}

fn qvec() -> impl Strategy<Value = QVec> {
    [(-30i128..=30, 1i128..=12), (-30i128..=30, 1i128..=12)]
        .prop_map(|[(a, b), (c, d)]| QVec([Q::new(a, b), Q::new(c, d)]))
}

proptest! {
    #[test]
    fn free_group_axioms(a in word(3), b in word(3), c in word(3)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert!(a.mul(&a.inverse()).is_identity());
        prop_assert_eq!(a.mul(&b).inverse(), b.inverse().mul(&a.inverse()));
    }

    #[test]
    fn cyclic_reduction_splits(a in word(3)) {
        let (p, c) = a.cyclic_reduction();
        prop_assert_eq!(p.mul(&c).mul(&p.inverse()), a);
    }

    #[test]
    fn conjugator_found_for_conjugates(a in word(3), k in word(3)) {
        let b = a.conjugate_by(&k);
        let found = a.conjugator_to(&b).expect("conjugate words");
        prop_assert_eq!(a.conjugate_by(&found), b);
    }

    #[test]
    fn affine_group_axioms(a in element(), b in element(), c in element(), z in qvec()) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert!(a.mul(&a.inverse()).is_identity());
        prop_assert_eq!(a.mul(&b).act(&z), a.act(&b.act(&z)));
    }

    #[test]
    fn endo_composition(m in matrix(4), n in matrix(4), v in [-5i128..=5, -5i128..=5],
                        w in [-5i128..=5, -5i128..=5], g in element()) {
        let a = AffineEndo::new(n, w);
        let b = AffineEndo::new(m, v);
        prop_assert_eq!(a.compose(&b).apply(&g), a.apply(&b.apply(&g)));
    }

    #[test]
    fn inner_twists_are_isomorphic(b in tor_biset(), k in element()) {
        let t = b.endo().inner_twist(&k);
        let c = TorBiset::new(t.m, t.v).unwrap();
        prop_assert!(biset_iso(&b, &c));
        prop_assert!(biset_iso(&c, &b));
    }

    #[test]
    fn sl2_conjugacy_round_trip(m in matrix(5), x in sl2()) {
        prop_assume!(m.det() > 0);
        let n = m.conjugate_by(&x);
        let y = sl2_conjugator(&m, &n).unwrap().expect("conjugate pair");
        prop_assert_eq!(y.det(), 1);
        prop_assert_eq!(m.conjugate_by(&y), n);
    }

    #[test]
    fn mapping_classes_form_a_group(y in sl2(), w in [-3i128..=3, -3i128..=3], b in tor_biset()) {
        let y2 = y.mul(&y);
        // squares of SL2 elements reduce to Γ(2) after squaring again
        let y4 = y2.mul(&y2);
        prop_assume!(y4.mod2() == IntMatrix2::identity().mod2());
        let phi = ModGElement::new(y4, [2 * w[0], 2 * w[1]]).unwrap();
        prop_assert!(phi.compose(&phi.inverse()).is_trivial());
        let c = conjugate_biset(&b, &phi);
        // equal up to an inner twist, since Mod(G) identifies Y with -Y
        prop_assert!(biset_iso(&conjugate_biset(&c, &phi.inverse()), &b));
    }

    #[test]
    fn inverse_branch_is_a_section(b in tor_biset(), g in element(), z in qvec()) {
        prop_assert_eq!(forward(&b, &inverse_branch(&b, &g, &z)), g.act(&z));
    }

    #[test]
    fn shadow_solves_the_orbit(
        b in tor_biset(),
        spec in prop::collection::vec((0usize..4, element()), 1..4),
    ) {
        prop_assume!(thurston::tor::classify(&b.m()).map(|c| c.is_geometric()).unwrap_or(false));
        let n = spec.len();
        let f: Vec<usize> = spec.iter().map(|(i, _)| i % n).collect();
        let els: Vec<AffineElement> = spec.iter().map(|(_, g)| *g).collect();
        let names = (0..n).map(|i| format!("p{i}")).collect();
        let o = SymbolicOrbitTor::new(names, f, els).unwrap();
        let s = shadow_orbit(&b, &o).unwrap();
        prop_assert!(s.verify(&b, &o));
    }

    #[test]
    fn cyclic_shift_adds_k_over_d_minus_1(
        d in 2i128..=6,
        spec in prop::collection::vec((0usize..5, -9i128..=9), 1..5),
        k in 0i128..5,
    ) {
        let k = k % (d - 1);
        let n = spec.len();
        let o = CyclicOrbit::new(spec.iter().map(|(i, _)| i % n).collect(), spec.iter().map(|(_, c)| *c).collect()).unwrap();
        let b = CyclicBiset::new(d).unwrap();
        let x = cyclic_invariant(&b, &o).unwrap();
        let xs = cyclic_invariant(&b, &o.shift(k)).unwrap();
        for (a, b2) in x.iter().zip(&xs) {
            let diff = b2 - a - Q::new(k, d - 1);
            prop_assert!(diff.is_integer());
        }
    }

    #[test]
    fn tor_documents_round_trip(
        b in tor_biset(),
        spec in prop::collection::vec((0usize..4, element()), 1..4),
    ) {
        let n = spec.len();
        let names = (0..n).map(|i| format!("p{i}")).collect();
        let orbit = SymbolicOrbitTor::new(names, spec.iter().map(|(i, _)| i % n).collect(), spec.iter().map(|(_, g)| *g).collect()).unwrap();
        for doc in [
            Document::new(Payload::TorBiset(b.clone())),
            Document::new(Payload::Orbit(OrbitDoc::Tor { biset: b.clone(), orbit: orbit.clone() })),
        ] {
            prop_assert_eq!(Document::parse(&doc.to_json()).unwrap(), doc);
        }
    }

    #[test]
    fn rational_solve(m in matrix(6), z in qvec()) {
        let q = QMat::from_int([[m.a, m.b], [m.c, m.d]]);
        prop_assume!(m.det() != 0);
        let rhs = q.apply(&z);
        prop_assert_eq!(q.solve(&rhs), Some(z));
    }
}
