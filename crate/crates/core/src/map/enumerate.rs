//! Enumeration of connected rooted p-regular maps and the on-disk atlas.

use super::{CanonicalCode, CombMap, CONVENTION_VERSION};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Largest `p·n` enumerated unless the caller raises it.
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

/// Environment variable overriding the atlas cache directory.
pub const CACHE_ENV: &str = "FREETENSOR_CACHE_DIR";

const NONE: usize = usize::MAX;

/// One representative per class of `B_n^{(p)}`, sorted by code.
pub fn enumerate_bn(p: usize, n: usize) -> Result<Vec<CombMap>> {
    enumerate_bn_with_cap(p, n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_bn_with_cap(p: usize, n: usize, cap: usize) -> Result<Vec<CombMap>> {
    if p == 0 || n == 0 || (p * n) % 2 == 1 {
        return Ok(Vec::new());
    }
    if p * n > cap {
        return Err(Error::Resource(format!("p·n = {} exceeds the enumeration cap {cap}", p * n)));
    }
    // Pairings are built half-edge by half-edge in increasing order; a new
    // vertex can only be entered through its first half-edge and vertices
    // are entered in label order. Those are exactly the fixed points of the
    // canonical walk, so every class appears once.
    let m = p * n;
    let mut alpha = vec![NONE; m];
    let mut out = Vec::new();
    grow(p, n, &mut alpha, 0, 1, &mut out);
    let mut coded: Vec<(CanonicalCode, CombMap)> = out
        .into_iter()
        .map(|a| {
            let map = CombMap::from_blocks(&vec![p; n], a).expect("generated pairing is valid");
            map.canonical()
        })
        .collect();
    coded.sort_by(|a, b| a.0.cmp(&b.0));
    debug_assert!(coded.windows(2).all(|w| w[0].0 != w[1].0));
    Ok(coded.into_iter().map(|(_, m)| m).collect())
}

fn grow(p: usize, n: usize, alpha: &mut [usize], from: usize, entered: usize, out: &mut Vec<Vec<usize>>) {
    let m = alpha.len();
    let Some(h) = (from..m).find(|&h| alpha[h] == NONE) else {
        if entered == n {
            out.push(alpha.to_vec());
        }
        return;
    };
    if h / p >= entered {
        return; // the walk cannot reach this vertex: disconnected
    }
    for q in h + 1..entered * p {
        if alpha[q] == NONE {
            alpha[h] = q;
            alpha[q] = h;
            grow(p, n, alpha, h + 1, entered, out);
            alpha[h] = NONE;
            alpha[q] = NONE;
        }
    }
    if entered < n {
        let q = entered * p;
        alpha[h] = q;
        alpha[q] = h;
        grow(p, n, alpha, h + 1, entered + 1, out);
        alpha[h] = NONE;
        alpha[q] = NONE;
    }
}

/// Cache record for one class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasRecord {
    pub p: usize,
    pub n: usize,
    /// 1-based vertex cycles
    pub cycles: Vec<Vec<usize>>,
    /// 1-based pairs
    pub pairing: Vec<(usize, usize)>,
    pub gamma: usize,
    /// hex canonical code
    pub code: String,
}

impl AtlasRecord {
    pub fn from_map(p: usize, n: usize, map: &CombMap) -> Self {
        AtlasRecord {
            p,
            n,
            cycles: map.cycles_one_based(),
            pairing: map.pairs_one_based(),
            gamma: map.gamma(),
            code: map.canonical_code().to_hex(),
        }
    }

    pub fn to_map(&self) -> Result<CombMap> {
        super::build_map(&self.cycles, &self.pairing)
    }
}

/// `B_n^{(p)}` with optional JSON cache on disk.
#[derive(Clone, Debug)]
pub struct Atlas {
    dir: Option<PathBuf>,
    cap: usize,
}

impl Default for Atlas {
    fn default() -> Self {
        Atlas::from_env()
    }
}

impl Atlas {
    /// No disk cache.
    pub fn in_memory() -> Self {
        Atlas { dir: None, cap: DEFAULT_ENUMERATION_CAP }
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Atlas { dir: Some(dir.into()), cap: DEFAULT_ENUMERATION_CAP }
    }

    /// Uses `FREETENSOR_CACHE_DIR` when set, otherwise no disk cache.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Atlas::with_dir(PathBuf::from(d)),
            _ => Atlas::in_memory(),
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn cache_path(&self, p: usize, n: usize) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("atlas-v{CONVENTION_VERSION}-p{p}-n{n}.json")))
    }

    /// Serialized records, exactly as written to the cache.
    pub fn render(p: usize, n: usize, maps: &[CombMap]) -> Result<String> {
        let recs: Vec<AtlasRecord> = maps.iter().map(|m| AtlasRecord::from_map(p, n, m)).collect();
        let mut s = serde_json::to_string_pretty(&recs)?;
        s.push('\n');
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Vec<CombMap>> {
        let recs: Vec<AtlasRecord> = serde_json::from_str(text)?;
        recs.iter().map(AtlasRecord::to_map).collect()
    }

    /// Classes of `B_n^{(p)}`, read from the cache when present.
    pub fn get(&self, p: usize, n: usize) -> Result<Vec<CombMap>> {
        if let Some(path) = self.cache_path(p, n) {
            if let Ok(text) = std::fs::read_to_string(&path) {
                if let Ok(maps) = Self::parse(&text) {
                    return Ok(maps);
                }
            }
            let maps = enumerate_bn_with_cap(p, n, self.cap)?;
            std::fs::create_dir_all(path.parent().expect("file in a directory"))?;
            let tmp = path.with_extension("json.tmp");
            std::fs::write(&tmp, Self::render(p, n, &maps)?)?;
            std::fs::rename(&tmp, &path)?;
            return Ok(maps);
        }
        enumerate_bn_with_cap(p, n, self.cap)
    }

    /// Compares the cached file (creating it if needed) with a fresh enumeration, byte for byte.
    pub fn verify(&self, p: usize, n: usize) -> Result<bool> {
        let fresh = Self::render(p, n, &enumerate_bn_with_cap(p, n, self.cap)?)?;
        let Some(path) = self.cache_path(p, n) else { return Ok(true) };
        self.get(p, n)?;
        Ok(std::fs::read_to_string(path)? == fresh)
    }
}
