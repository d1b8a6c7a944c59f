//! Binary cache of twisted operator sets, keyed by a hash of everything the
//! sets depend on.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use skewlab_core::cocycle::ToralCocycle;
use skewlab_core::inducing::InducingScheme;
use skewlab_core::operators::{build_twisted_sets, TwistedOperatorSet, UlamGrid};

use crate::config::{CocycleSection, MapConfig, SchemeSection};
use crate::error::{CliError, Result};
use crate::output::write_atomic;

#[derive(Serialize)]
struct Key<'a> {
    format: u32,
    map: &'a MapConfig,
    scheme: &'a SchemeSection,
    y: (f64, f64),
    m: usize,
    phi_max: usize,
    ks: &'a [Vec<i32>],
    cocycle: &'a CocycleSection,
}

pub struct OperatorCache {
    dir: Option<PathBuf>,
}

/// What a lookup did; reported in the manifest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Miss,
    Disabled,
}

impl OperatorCache {
    pub fn new(dir: Option<&Path>) -> Self {
        Self { dir: dir.map(Path::to_path_buf) }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn key(
        map: &MapConfig,
        scheme_cfg: &SchemeSection,
        scheme: &InducingScheme,
        cocycle: &CocycleSection,
        m: usize,
        phi_max: usize,
        ks: &[Vec<i32>],
    ) -> Result<String> {
        let key = Key { format: 1, map, scheme: scheme_cfg, y: (scheme.y_lo, scheme.y_hi), m, phi_max, ks, cocycle };
        let mut bytes = Vec::new();
        ciborium::into_writer(&key, &mut bytes).map_err(|e| CliError::Cache(e.to_string()))?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    /// Loads the sets for `key` or builds and stores them.
    pub fn get_or_build(
        &self,
        key: &str,
        scheme: &InducingScheme,
        h: &ToralCocycle,
        ks: &[Vec<i32>],
        m: usize,
        phi_max: usize,
    ) -> Result<(Vec<TwistedOperatorSet>, CacheOutcome)> {
        let Some(dir) = &self.dir else {
            let grid = UlamGrid::for_scheme(scheme, m)?;
            return Ok((build_twisted_sets(scheme, h, ks, &grid, phi_max)?, CacheOutcome::Disabled));
        };
        let path = dir.join(format!("{key}.cbor"));
        if let Ok(file) = std::fs::File::open(&path) {
            // A corrupt or outdated entry is rebuilt rather than trusted.
            if let Ok(sets) = ciborium::from_reader::<Vec<TwistedOperatorSet>, _>(std::io::BufReader::new(file)) {
                if sets.len() == ks.len() && sets.iter().zip(ks).all(|(s, k)| &s.k == k) {
                    return Ok((sets, CacheOutcome::Hit));
                }
            }
        }
        let grid = UlamGrid::for_scheme(scheme, m)?;
        let sets = build_twisted_sets(scheme, h, ks, &grid, phi_max)?;
        let mut bytes = Vec::new();
        ciborium::into_writer(&sets, &mut bytes).map_err(|e| CliError::Cache(e.to_string()))?;
        write_atomic(&path, &bytes)?;
        Ok((sets, CacheOutcome::Miss))
    }
}
