//! On-disk cache of Hefer decompositions, one JSON record per polynomial.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{hefer_decompose, BihomogeneousPolynomial, HeferDecomposition};
use crate::error::{Error, Result};
use crate::polycore::{ComplexRational, HomogeneousPolynomial, MultiIndex};

pub const CACHE_ENV: &str = "HODGE_CACHE_DIR";
pub const CACHE_FORMAT: &str = "hodge-hefer-cache";
pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Coef {
    re: [String; 2],
    im: [String; 2],
}

impl Coef {
    fn from(c: &ComplexRational) -> Self {
        let (re, im) = c.to_fraction_pairs();
        Self { re, im }
    }

    fn to(&self) -> Result<ComplexRational> {
        ComplexRational::from_fraction_strings(&self.re, &self.im)
            .ok_or_else(|| Error::Cache("malformed coefficient".into()))
    }
}

#[derive(Serialize, Deserialize)]
struct SourceTerm {
    exponents: Vec<u32>,
    #[serde(flatten)]
    coef: Coef,
}

#[derive(Serialize, Deserialize)]
struct HeferTerm {
    zeta: Vec<u32>,
    z: Vec<u32>,
    #[serde(flatten)]
    coef: Coef,
}

#[derive(Serialize, Deserialize)]
struct Record {
    format: String,
    version: u32,
    key: String,
    num_vars: usize,
    degree: u32,
    source: Vec<SourceTerm>,
    coefficients: Vec<Vec<HeferTerm>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CacheEntry {
    pub key: String,
    pub path: PathBuf,
    pub bytes: u64,
    pub version: Option<u32>,
    pub num_vars: Option<usize>,
    pub degree: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct HeferCache {
    dir: PathBuf,
}

/// Cache directory: `$HODGE_CACHE_DIR`, else `$XDG_CACHE_HOME/hodge-currents`,
/// else `$HOME/.cache/hodge-currents`, else `.hodge-cache`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os(CACHE_ENV).filter(|s| !s.is_empty()) {
        return PathBuf::from(d);
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME").filter(|s| !s.is_empty()) {
        return PathBuf::from(d).join("hodge-currents");
    }
    if let Some(h) = std::env::var_os("HOME").filter(|s| !s.is_empty()) {
        return PathBuf::from(h).join(".cache").join("hodge-currents");
    }
    PathBuf::from(".hodge-cache")
}

impl HeferCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn from_env() -> Self {
        Self::new(default_cache_dir())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("hefer-{key}.json"))
    }

    /// Returns the cached decomposition when present and valid, else computes and stores it.
    /// The flag reports a cache hit.
    pub fn load_or_compute(&self, p: &HomogeneousPolynomial) -> Result<(HeferDecomposition, bool)> {
        let key = p.content_hash();
        let path = self.path_for(&key);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(h) = decode(&text, &key, p) {
                return Ok((h, true));
            }
        }
        let h = hefer_decompose(p)?;
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, encode(&h, &key))?;
        fs::rename(&tmp, &path)?;
        Ok((h, false))
    }

    pub fn inspect(&self) -> Result<Vec<CacheEntry>> {
        let mut out = Vec::new();
        let rd = match fs::read_dir(&self.dir) {
            Ok(rd) => rd,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e.into()),
        };
        for ent in rd {
            let ent = ent?;
            let name = ent.file_name().to_string_lossy().into_owned();
            let Some(key) = name
                .strip_prefix("hefer-")
                .and_then(|s| s.strip_suffix(".json"))
            else {
                continue;
            };
            let path = ent.path();
            let bytes = ent.metadata()?.len();
            let rec: Option<Record> = fs::read_to_string(&path)
                .ok()
                .and_then(|t| serde_json::from_str(&t).ok());
            out.push(CacheEntry {
                key: key.to_string(),
                path,
                bytes,
                version: rec.as_ref().map(|r| r.version),
                num_vars: rec.as_ref().map(|r| r.num_vars),
                degree: rec.as_ref().map(|r| r.degree),
            });
        }
        out.sort_by(|a, b| a.key.cmp(&b.key));
        Ok(out)
    }

    /// Removes all cache records; returns how many were deleted.
    pub fn clear(&self) -> Result<usize> {
        let entries = self.inspect()?;
        for e in &entries {
            fs::remove_file(&e.path)?;
        }
        Ok(entries.len())
    }
}

fn encode(h: &HeferDecomposition, key: &str) -> String {
    let rec = Record {
        format: CACHE_FORMAT.into(),
        version: CACHE_VERSION,
        key: key.into(),
        num_vars: h.source.num_vars(),
        degree: h.source.degree(),
        source: h
            .source
            .terms()
            .iter()
            .map(|(e, c)| SourceTerm {
                exponents: e.0.clone(),
                coef: Coef::from(c),
            })
            .collect(),
        coefficients: h
            .coefficients
            .iter()
            .map(|q| {
                q.terms()
                    .iter()
                    .map(|((a, b), c)| HeferTerm {
                        zeta: a.0.clone(),
                        z: b.0.clone(),
                        coef: Coef::from(c),
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&rec).expect("serializable record")
}

fn decode(text: &str, key: &str, p: &HomogeneousPolynomial) -> Result<HeferDecomposition> {
    let rec: Record = serde_json::from_str(text).map_err(|e| Error::Cache(e.to_string()))?;
    if rec.format != CACHE_FORMAT || rec.version != CACHE_VERSION || rec.key != key {
        return Err(Error::Cache("stale or foreign cache record".into()));
    }
    let source = HomogeneousPolynomial::from_terms(
        rec.num_vars,
        rec.degree,
        rec.source
            .iter()
            .map(|t| Ok((MultiIndex(t.exponents.clone()), t.coef.to()?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    if &source != p {
        return Err(Error::Cache("hash collision or corrupted source".into()));
    }
    if rec.coefficients.len() != rec.num_vars || rec.degree == 0 {
        return Err(Error::Cache("wrong coefficient count".into()));
    }
    let coefficients = rec
        .coefficients
        .iter()
        .map(|ts| {
            BihomogeneousPolynomial::from_terms(
                rec.num_vars,
                rec.degree - 1,
                ts.iter()
                    .map(|t| {
                        Ok((
                            (MultiIndex(t.zeta.clone()), MultiIndex(t.z.clone())),
                            t.coef.to()?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let h = HeferDecomposition {
        source,
        coefficients,
    };
    if !h.verify() {
        return Err(Error::Cache(
            "cached decomposition fails the identity".into(),
        ));
    }
    Ok(h)
}
