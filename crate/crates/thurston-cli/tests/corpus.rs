//! The bundled corpus under `corpus/` is regenerated from the library and
//! compared byte for byte; set `THURSTON_UPDATE_CORPUS=1` to rewrite it.

use std::path::PathBuf;

use thurston::affine::AffineElement;
use thurston::cyclic::{CyclicBiset, CyclicOrbit};
use thurston::io::{Document, OrbitDoc, Payload, PortraitDoc};
use thurston::nucleus::DEFAULT_BALL_BUDGET;
use thurston::portrait::examples::{basilica_beta, basilica_sqrt2, cube};
use thurston::portrait::{portrait_list_exp, standard_minimal_portrait, MarkedDynamics};
use thurston::reduce::{bundle_from_wreath, BundleData, GeometricBundle};
use thurston::shadow::{SymbolicOrbitTor, TorPortrait};
use thurston::sl2::IntMatrix2;
use thurston::tor::TorBiset;
use thurston::words::FreeWord;
use thurston::wreath::examples::basilica;
use thurston::wreath::BisetElement;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn tor(m: [[i128; 2]; 2], v: [i128; 2]) -> TorBiset {
    TorBiset::new(IntMatrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]), v).unwrap()
}

fn exp_bundle(
    b: &GeometricBundle,
) -> (
    thurston::wreath::WreathBiset,
    thurston::portrait::ExpPortrait,
) {
    match &b.data {
        BundleData::Exp { biset, portrait } => (biset.clone(), portrait.clone()),
        BundleData::Tor { .. } => unreachable!("exp bundle"),
    }
}

fn documents() -> Vec<(&'static str, Payload)> {
    let mut out = Vec::new();
    out.push(("basilica.json", Payload::WreathBiset(basilica())));
    out.push(("basilica-beta.json", Payload::WreathBiset(basilica_beta())));
    out.push((
        "basilica-sqrt2.json",
        Payload::WreathBiset(basilica_sqrt2()),
    ));
    out.push(("cube.json", Payload::WreathBiset(cube())));

    let beta = bundle_from_wreath(&basilica_beta(), &["beta".into()]).unwrap();
    let (w, mut p) = exp_bundle(&beta);
    p.reps[3] = vec![BisetElement::letter(1)];
    let alpha = GeometricBundle::exp(w.clone(), p).unwrap();
    let twisted = beta
        .push("beta", &FreeWord::identity(), &FreeWord::new([-1]))
        .unwrap();
    out.push(("basilica-beta-bundle.json", Payload::Bundle(beta)));
    out.push(("basilica-alpha-bundle.json", Payload::Bundle(alpha.clone())));
    out.push((
        "basilica-twisted-beta-bundle.json",
        Payload::Bundle(twisted),
    ));
    let sqrt2 = bundle_from_wreath(&basilica_sqrt2(), &["sqrt2".into(), "1".into()]).unwrap();
    out.push(("basilica-sqrt2-bundle.json", Payload::Bundle(sqrt2)));
    let (_, ap) = exp_bundle(&alpha);
    out.push((
        "basilica-fixed-point.json",
        Payload::Portrait(PortraitDoc::Exp {
            biset: w,
            portrait: ap,
        }),
    ));
    let empty = standard_minimal_portrait(&basilica()).unwrap();
    out.push((
        "basilica-empty.json",
        Payload::Portrait(PortraitDoc::Exp {
            biset: basilica(),
            portrait: empty,
        }),
    ));

    let names = vec!["0".into(), "1".into(), "inf".into(), "omega".into()];
    let d = MarkedDynamics::new(names, 3, vec![0, 1, 2, 1], vec![3, 1, 3, 1]).unwrap();
    let first = portrait_list_exp(&cube(), &d, None, DEFAULT_BALL_BUDGET)
        .unwrap()
        .remove(0)
        .portrait;
    out.push((
        "cube-extra.json",
        Payload::Portrait(PortraitDoc::Exp {
            biset: cube(),
            portrait: first,
        }),
    ));

    let cyc = |d, f: Vec<usize>, c: Vec<i128>| {
        Payload::Orbit(OrbitDoc::Cyclic {
            biset: CyclicBiset::new(d).unwrap(),
            orbit: CyclicOrbit::new(f, c).unwrap(),
        })
    };
    out.push(("cyclic-2-period2.json", cyc(2, vec![1, 0], vec![1, 0])));
    out.push(("cyclic-3-period2.json", cyc(3, vec![1, 0], vec![1, 0])));
    out.push((
        "cyclic-3-period2-shifted.json",
        cyc(3, vec![1, 0], vec![2, 1]),
    ));
    out.push(("cyclic-3-obstructed.json", cyc(3, vec![0, 1], vec![0, 0])));

    out.push((
        "tor-2I.json",
        Payload::TorBiset(tor([[2, 0], [0, 2]], [0, 0])),
    ));
    out.push((
        "tor-2I-v10.json",
        Payload::TorBiset(tor([[2, 0], [0, 2]], [1, 0])),
    ));
    out.push((
        "tor-m2I-v32.json",
        Payload::TorBiset(tor([[-2, 0], [0, -2]], [3, 2])),
    ));
    out.push((
        "tor-3111.json",
        Payload::TorBiset(tor([[3, 1], [1, 1]], [0, 0])),
    ));
    out.push((
        "tor-1102.json",
        Payload::TorBiset(tor([[1, 1], [0, 2]], [0, 0])),
    ));
    out.push((
        "tor-2111.json",
        Payload::TorBiset(tor([[2, 1], [1, 1]], [0, 0])),
    ));
    let two = tor([[2, 0], [0, 2]], [0, 0]);
    let fixed =
        SymbolicOrbitTor::new(vec!["p".into()], vec![0], vec![AffineElement::identity()]).unwrap();
    out.push((
        "tor-2I-fixed-orbit.json",
        Payload::Orbit(OrbitDoc::Tor {
            biset: two,
            orbit: fixed.clone(),
        }),
    ));
    let bundle = GeometricBundle::tor(two, TorPortrait { orbit: fixed }).unwrap();
    out.push(("tor-2I-bundle.json", Payload::Bundle(bundle)));
    out
}

#[test]
fn corpus_matches_library() {
    let dir = corpus_dir();
    let update = std::env::var_os("THURSTON_UPDATE_CORPUS").is_some();
    for (name, payload) in documents() {
        let doc = Document::new(payload);
        let text = doc.to_json();
        let path = dir.join(name);
        if update {
            std::fs::write(&path, &text).unwrap();
        }
        let on_disk =
            std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, text, "{name} is stale");
        assert_eq!(
            Document::parse(&on_disk).unwrap(),
            doc,
            "{name} does not round-trip"
        );
    }
}
