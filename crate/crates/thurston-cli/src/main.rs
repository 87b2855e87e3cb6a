use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use thurston::cyclic::{cyclic_conjugate, cyclic_invariant, is_obstructed};
use thurston::io::{Document, OrbitDoc, Payload, PortraitDoc};
use thurston::portrait::{portrait_conjugate, portrait_list_exp, standard_minimal_portrait};
use thurston::reduce::{
    bundle_from_wreath, knitting_trivialize, nucleus_if_needed, reduce_centralizer,
    reduce_conjugacy, Budgets, BundleData, MinimalOracle, PushTuple, TrivialExpOracle,
};
use thurston::shadow::{minimal_portrait_tor, portrait_conj_tor, portrait_list_tor, shadow_orbit};
use thurston::sl2::sl2_centralizer;
use thurston::tor::{
    biset_iso, classify, conjugate_biset, minimal_tor_conjugacy, tor_centralizer, TorBiset,
    TorClass,
};
use thurston::words::FreeWord;
use thurston::Error;

#[derive(Parser)]
#[command(
    name = "thurston",
    version,
    about = "Decision procedures for Thurston maps with extra marked points"
)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct GlobalOpts {
    /// Element budget of the nucleus closure.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget_nucleus: Option<u64>,
    /// Element budget of ball and conjugator searches.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget_ball: Option<u64>,
    /// Size budget of portrait-class orbits and listings.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget_orbit: Option<u64>,
    /// Oracle for minimal Exp bisets.
    #[arg(long, global = true, value_enum, default_value_t = OracleChoice::None)]
    oracle: OracleChoice,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleChoice {
    None,
    TrivialExp,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the map of a tor-biset.
    Classify { input: PathBuf },
    /// Decide isomorphism of two tor-bisets.
    Iso { a: PathBuf, b: PathBuf },
    /// Decide conjugacy of two tor-bisets or two bundles.
    Conj {
        a: PathBuf,
        b: PathBuf,
        /// Also write the verdict to this file.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Centralizer of a tor-biset or of a bundle's portrait class.
    Centralizer { input: PathBuf },
    /// Shadow a Tor symbolic orbit.
    Shadow { input: PathBuf },
    /// Minimal portrait of a tor-biset or wreath-biset.
    PortraitMinimal { input: PathBuf },
    /// Decide conjugacy of two portraits.
    PortraitConj { a: PathBuf, b: PathBuf },
    /// List the portrait classes with the dynamics of a portrait or bundle.
    PortraitList { input: PathBuf },
    /// Invariants of a cyclic orbit, optionally compared with a second one.
    CyclicInvariant {
        input: PathBuf,
        other: Option<PathBuf>,
    },
    /// Bundle a wreath-biset, push an extra point, or run knitting lifts.
    Reduce {
        input: PathBuf,
        /// Points of a wreath-biset to treat as extra.
        #[arg(long, value_delimiter = ',')]
        erase: Vec<String>,
        /// Extra point to push.
        #[arg(long)]
        push_point: Option<String>,
        /// Left factor of the push, as a JSON word.
        #[arg(long, default_value = "[]")]
        left: String,
        /// Right factor of the push, as a JSON word.
        #[arg(long, default_value = "[]")]
        right: String,
        /// Push tuple to lift through the bundle, as JSON.
        #[arg(long)]
        knit: Option<String>,
        /// Maximal number of knitting lifts.
        #[arg(long, default_value_t = 64)]
        max_lifts: usize,
    },
}

enum Failure {
    Input(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget(_) => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Out = Result<Value, Failure>;

fn input_err<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Input(msg.into()))
}

fn read(p: &Path) -> Result<Document, Failure> {
    Ok(Document::read(p)?)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("outputs serialize")
}

fn tor_biset(p: &Path) -> Result<TorBiset, Failure> {
    match read(p)?.payload {
        Payload::TorBiset(b) => Ok(b),
        other => input_err(format!(
            "{}: expected a tor-biset document, found {}",
            p.display(),
            other.kind()
        )),
    }
}

fn portrait(p: &Path) -> Result<PortraitDoc, Failure> {
    match read(p)?.payload {
        Payload::Portrait(d) => Ok(d),
        Payload::Bundle(b) => Ok(b.data.into()),
        other => input_err(format!(
            "{}: expected a portrait document, found {}",
            p.display(),
            other.kind()
        )),
    }
}

fn class_name(c: TorClass) -> &'static str {
    match c {
        TorClass::Expanding => "Expanding",
        TorClass::Exceptional => "Exceptional",
        TorClass::EigenvaluePlusMinusOne => "LevyObstructed",
        TorClass::Invertible => "Invertible",
    }
}

fn word(s: &str) -> Result<FreeWord, Failure> {
    serde_json::from_str(s).map_err(|e| Failure::Input(format!("bad word {s}: {e}")))
}

fn run(cli: Cli) -> Out {
    let defaults = Budgets::default();
    let budgets = Budgets {
        nucleus: cli
            .opts
            .budget_nucleus
            .map_or(defaults.nucleus, |x| x as usize),
        ball: cli.opts.budget_ball.map_or(defaults.ball, |x| x as usize),
        orbit: cli.opts.budget_orbit.map_or(defaults.orbit, |x| x as usize),
    };
    let oracle = match cli.opts.oracle {
        OracleChoice::None => MinimalOracle::tor_only(),
        OracleChoice::TrivialExp => MinimalOracle::with_exp(Box::new(TrivialExpOracle)),
    };
    match cli.cmd {
        Cmd::Classify { input } => {
            let b = tor_biset(&input)?;
            let class = classify(&b.m())?;
            let table: Vec<Value> = b
                .endo()
                .peripheral_action()
                .iter()
                .map(|(c, img)| json!({"point": c, "image": img}))
                .collect();
            Ok(
                json!({"class": class_name(class), "degree": b.degree(), "peripheral_action": table}),
            )
        }
        Cmd::Iso { a, b } => {
            let (x, y) = (tor_biset(&a)?, tor_biset(&b)?);
            Ok(json!({"isomorphic": biset_iso(&x, &y)}))
        }
        Cmd::Conj { a, b, certificate } => {
            let out = match (read(&a)?.payload, read(&b)?.payload) {
                (Payload::TorBiset(x), Payload::TorBiset(y)) => {
                    let c = minimal_tor_conjugacy(&x, &y)?;
                    match c.conjugator {
                        Some(phi) => {
                            let verified = biset_iso(&conjugate_biset(&x, &phi), &y);
                            if !verified {
                                return input_err("conjugator failed verification");
                            }
                            json!({"verdict": "yes", "certificate": {"phi": phi, "verified": verified}})
                        }
                        None => json!({"verdict": "no", "invariant": c.reason}),
                    }
                }
                (Payload::Bundle(x), Payload::Bundle(y)) => {
                    to_value(&reduce_conjugacy(&x, &y, &oracle, &budgets)?)
                }
                (p, q) => {
                    return input_err(format!("cannot compare {} with {}", p.kind(), q.kind()))
                }
            };
            if let Some(path) = certificate {
                let text = serde_json::to_string_pretty(&out).expect("json") + "\n";
                std::fs::write(&path, text)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
            Ok(out)
        }
        Cmd::Centralizer { input } => match read(&input)?.payload {
            Payload::TorBiset(b) => {
                let class = classify(&b.m())?;
                let matrix = sl2_centralizer(&b.m());
                if !class.is_geometric() {
                    // no minimal-biset centralizer: report the matrix centralizer
                    let gens = matrix.generators();
                    let verified = gens.iter().all(|g| g.commutes_with(&b.m()));
                    return Ok(json!({
                        "class": class_name(class),
                        "generators": gens,
                        "verified": verified,
                        "matrix_centralizer": matrix,
                    }));
                }
                let gens = tor_centralizer(&b)?;
                let verified = gens.iter().all(|g| biset_iso(&conjugate_biset(&b, g), &b));
                Ok(json!({
                    "class": class_name(class),
                    "generators": gens,
                    "verified": verified,
                    "matrix_centralizer": matrix,
                }))
            }
            Payload::Bundle(b) => Ok(to_value(&reduce_centralizer(&b, &oracle, &budgets)?)),
            other => input_err(format!(
                "centralizer of a {} document is not defined",
                other.kind()
            )),
        },
        Cmd::Shadow { input } => match read(&input)?.payload {
            Payload::Orbit(OrbitDoc::Tor { biset, orbit }) => {
                let s = shadow_orbit(&biset, &orbit)?;
                let verified = s.verify(&biset, &orbit);
                Ok(
                    json!({"names": orbit.names, "points": s.points, "residues": s.residues, "verified": verified}),
                )
            }
            _ => input_err("shadow expects a Tor orbit document"),
        },
        Cmd::PortraitMinimal { input } => match read(&input)?.payload {
            Payload::TorBiset(b) => Ok(json!({"cones": minimal_portrait_tor(&b)})),
            Payload::WreathBiset(w) => Ok(to_value(&standard_minimal_portrait(&w)?)),
            other => input_err(format!(
                "no minimal portrait for a {} document",
                other.kind()
            )),
        },
        Cmd::PortraitConj { a, b } => match (portrait(&a)?, portrait(&b)?) {
            (
                PortraitDoc::Tor { biset, portrait: p },
                PortraitDoc::Tor {
                    biset: c,
                    portrait: q,
                },
            ) => {
                if biset != c {
                    return input_err("portraits live in different bisets");
                }
                match portrait_conj_tor(&biset, &p, &q)? {
                    Some(ell) => Ok(json!({"verdict": "yes", "ell": ell})),
                    None => Ok(json!({"verdict": "no", "invariant": "portrait-not-conjugate"})),
                }
            }
            (
                PortraitDoc::Exp { biset, portrait: p },
                PortraitDoc::Exp {
                    biset: c,
                    portrait: q,
                },
            ) => {
                if biset != c {
                    return input_err("portraits live in different bisets");
                }
                let n = nucleus_if_needed(&biset, &p.dynamics, budgets.nucleus)?;
                match portrait_conjugate(&biset, &p, &q, n.as_ref(), budgets.ball)? {
                    Some(ell) => Ok(json!({"verdict": "yes", "ell": ell})),
                    None => Ok(json!({"verdict": "no", "invariant": "portrait-not-conjugate"})),
                }
            }
            _ => input_err("portraits use different backends"),
        },
        Cmd::PortraitList { input } => match portrait(&input)? {
            PortraitDoc::Tor { biset, portrait } => {
                let o = &portrait.orbit;
                let list = portrait_list_tor(&biset, &o.names, &o.f, budgets.orbit)?;
                Ok(json!({"count": list.len(), "classes": list}))
            }
            PortraitDoc::Exp { biset, portrait } => {
                let n = nucleus_if_needed(&biset, &portrait.dynamics, budgets.nucleus)?;
                let list = portrait_list_exp(&biset, &portrait.dynamics, n.as_ref(), budgets.ball)?;
                Ok(json!({"count": list.len(), "classes": list}))
            }
        },
        Cmd::CyclicInvariant { input, other } => {
            let cyclic = |p: &Path| match read(p)?.payload {
                Payload::Orbit(OrbitDoc::Cyclic { biset, orbit }) => Ok((biset, orbit)),
                _ => input_err("expected a cyclic orbit document"),
            };
            let (b, o) = cyclic(&input)?;
            let x = cyclic_invariant(&b, &o)?;
            let mut out = json!({"invariant": x.iter().map(|q| [*q.numer(), *q.denom()]).collect::<Vec<_>>(),
                                 "obstructed": is_obstructed(&x)});
            if let Some(p2) = other {
                let (b2, o2) = cyclic(&p2)?;
                if b2 != b {
                    return input_err("orbits live in different cyclic bisets");
                }
                let x2 = cyclic_invariant(&b2, &o2)?;
                out["shift"] = match cyclic_conjugate(&b, &x, &x2)? {
                    Some(k) => json!(k),
                    None => Value::Null,
                };
                out["verdict"] = json!(if out["shift"].is_null() { "no" } else { "yes" });
            }
            Ok(out)
        }
        Cmd::Reduce {
            input,
            erase,
            push_point,
            left,
            right,
            knit,
            max_lifts,
        } => match read(&input)?.payload {
            Payload::WreathBiset(w) => {
                let b = bundle_from_wreath(&w, &erase)?;
                Ok(to_value(&Document::new(Payload::Bundle(b))))
            }
            Payload::Bundle(b) => {
                if let Some(point) = push_point {
                    let pushed = b.push(&point, &word(&left)?, &word(&right)?)?;
                    return Ok(to_value(&Document::new(Payload::Bundle(pushed))));
                }
                let Some(tuple) = knit else {
                    return input_err("reduce on a bundle needs --push-point or --knit");
                };
                let tuple: PushTuple = match &b.data {
                    BundleData::Tor { .. } => PushTuple::Tor(
                        serde_json::from_str(&tuple)
                            .map_err(|e| Failure::Input(format!("bad push tuple: {e}")))?,
                    ),
                    BundleData::Exp { .. } => PushTuple::Exp(
                        serde_json::from_str(&tuple)
                            .map_err(|e| Failure::Input(format!("bad push tuple: {e}")))?,
                    ),
                };
                Ok(to_value(&knitting_trivialize(&b, &tuple, max_lifts)?))
            }
            other => input_err(format!(
                "reduce expects a wreath-biset or bundle, found {}",
                other.kind()
            )),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(v) => {
            // a closed pipe downstream is not an error of ours
            let text = serde_json::to_string_pretty(&v).expect("json");
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exhausted: {m}");
            ExitCode::from(2)
        }
    }
}
