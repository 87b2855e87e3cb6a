//! Versioned JSON documents exchanged by the command-line tool.
//!
//! Words are arrays of signed 1-based generator indices, matrices are
//! row-major nested arrays, rationals are `[num, den]` with `den > 0` in
//! lowest terms, and the order infinity is written `0`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cyclic::{CyclicBiset, CyclicOrbit};
use crate::error::{invalid, Error, Result};
use crate::orbits::SymbolicOrbitExp;
use crate::portrait::ExpPortrait;
use crate::reduce::{BundleData, GeometricBundle};
use crate::shadow::{SymbolicOrbitTor, TorPortrait};
use crate::tor::TorBiset;
use crate::words::Signature;
use crate::wreath::WreathBiset;

pub const FORMAT_VERSION: u32 = 1;

/// A portrait together with the biset it lives in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortraitDoc {
    Tor {
        biset: TorBiset,
        portrait: TorPortrait,
    },
    Exp {
        biset: WreathBiset,
        portrait: ExpPortrait,
    },
}

/// A symbolic orbit together with its biset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitDoc {
    Tor {
        biset: TorBiset,
        orbit: SymbolicOrbitTor,
    },
    Exp {
        biset: WreathBiset,
        orbit: SymbolicOrbitExp,
    },
    Cyclic {
        biset: CyclicBiset,
        orbit: CyclicOrbit,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "payload", rename_all = "kebab-case")]
pub enum Payload {
    Signature(Signature),
    WreathBiset(WreathBiset),
    TorBiset(TorBiset),
    Portrait(PortraitDoc),
    Orbit(OrbitDoc),
    Bundle(GeometricBundle),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Signature(_) => "signature",
            Payload::WreathBiset(_) => "wreath-biset",
            Payload::TorBiset(_) => "tor-biset",
            Payload::Portrait(_) => "portrait",
            Payload::Orbit(_) => "orbit",
            Payload::Bundle(_) => "bundle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Document {
    pub version: u32,
    #[serde(flatten)]
    pub payload: Payload,
}

impl Document {
    pub fn new(payload: Payload) -> Self {
        Document {
            version: FORMAT_VERSION,
            payload,
        }
    }

    /// Parses and validates a document.
    pub fn parse(text: &str) -> Result<Document> {
        // dispatch on the tag by hand: serde's tag buffering cannot hold i128
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            version: u32,
            kind: String,
            payload: serde_json::Value,
        }
        fn de<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T> {
            serde_json::from_value(v).map_err(|e| Error::Invalid(format!("parse error: {e}")))
        }
        let raw: Raw =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("parse error: {e}")))?;
        let payload = match raw.kind.as_str() {
            "signature" => Payload::Signature(de(raw.payload)?),
            "wreath-biset" => Payload::WreathBiset(de(raw.payload)?),
            "tor-biset" => Payload::TorBiset(de(raw.payload)?),
            "portrait" => Payload::Portrait(de(raw.payload)?),
            "orbit" => Payload::Orbit(de(raw.payload)?),
            "bundle" => Payload::Bundle(de(raw.payload)?),
            k => return invalid(format!("unknown document kind {k}")),
        };
        let doc = Document {
            version: raw.version,
            payload,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Document> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Document::parse(&text)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }

    /// Cross-references that the type-level checks cannot see.
    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return invalid(format!("unsupported format version {}", self.version));
        }
        match &self.payload {
            Payload::Signature(_) | Payload::WreathBiset(_) | Payload::TorBiset(_) => Ok(()),
            Payload::Portrait(PortraitDoc::Tor { portrait, .. }) => portrait.orbit.validate(),
            Payload::Portrait(PortraitDoc::Exp { biset, portrait }) => portrait.validate(biset),
            Payload::Orbit(OrbitDoc::Tor { orbit, .. }) => orbit.validate(),
            Payload::Orbit(OrbitDoc::Exp { biset, orbit }) => {
                let sig = biset.signature();
                for b in &orbit.elements {
                    b.prefix.check_rank(sig.rank())?;
                    if b.letter == 0 || b.letter > biset.degree() {
                        return invalid(format!("letter {} out of range", b.letter));
                    }
                }
                SymbolicOrbitExp::new(orbit.names.clone(), orbit.f.clone(), orbit.elements.clone())
                    .map(|_| ())
            }
            Payload::Orbit(OrbitDoc::Cyclic { orbit, .. }) => {
                CyclicOrbit::new(orbit.f.clone(), orbit.c.clone()).map(|_| ())
            }
            Payload::Bundle(b) => b.validate(),
        }
    }

    pub fn expect_kind(&self, kind: &str) -> Result<&Payload> {
        if self.payload.kind() == kind {
            Ok(&self.payload)
        } else {
            invalid(format!(
                "expected a {kind} document, found {}",
                self.payload.kind()
            ))
        }
    }
}

impl From<BundleData> for PortraitDoc {
    fn from(d: BundleData) -> Self {
        match d {
            BundleData::Tor { biset, portrait } => PortraitDoc::Tor { biset, portrait },
            BundleData::Exp { biset, portrait } => PortraitDoc::Exp { biset, portrait },
        }
    }
}

impl From<PortraitDoc> for BundleData {
    fn from(d: PortraitDoc) -> Self {
        match d {
            PortraitDoc::Tor { biset, portrait } => BundleData::Tor { biset, portrait },
            PortraitDoc::Exp { biset, portrait } => BundleData::Exp { biset, portrait },
        }
    }
}
