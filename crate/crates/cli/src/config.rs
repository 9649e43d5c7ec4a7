use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use discgrp::{CorrespondenceContext, Tolerance};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Moebius,
    Matrixrep,
    Pseudo,
    Center,
    Isometry,
    Normality,
    Morita,
    Eval,
    All,
}

impl Suite {
    pub const EVERY: [Suite; 8] = [
        Suite::Moebius,
        Suite::Matrixrep,
        Suite::Pseudo,
        Suite::Center,
        Suite::Isometry,
        Suite::Normality,
        Suite::Morita,
        Suite::Eval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moebius => "moebius",
            Suite::Matrixrep => "matrixrep",
            Suite::Pseudo => "pseudo",
            Suite::Center => "center",
            Suite::Isometry => "isometry",
            Suite::Normality => "normality",
            Suite::Morita => "morita",
            Suite::Eval => "eval",
            Suite::All => "all",
        }
    }

    /// Expands `all` and removes duplicates, keeping the canonical order.
    pub fn expand(selected: &[Suite]) -> Vec<Suite> {
        if selected.contains(&Suite::All) {
            return Suite::EVERY.to_vec();
        }
        let mut out: Vec<Suite> = selected.to_vec();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub graph: PathBuf,
    pub suites: Vec<Suite>,
    pub seed: u64,
    pub trials: usize,
    pub tol: Tolerance,
    /// Per-vertex ranks as given on the command line; unnamed vertices get 1.
    pub morita_ranks: Option<BTreeMap<String, usize>>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// True when `all` was requested, in which case suites whose hypotheses
    /// fail are skipped rather than reported as errors.
    pub fn is_all(&self) -> bool {
        self.suites.contains(&Suite::All)
    }
}

/// Parses `v1=2,v2=1`.
pub fn parse_ranks(text: &str) -> Result<BTreeMap<String, usize>, String> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, rank) = item
            .split_once('=')
            .ok_or_else(|| format!("expected `vertex=rank`, got `{item}`"))?;
        let rank: usize = rank
            .trim()
            .parse()
            .map_err(|_| format!("rank `{}` is not a non-negative integer", rank.trim()))?;
        if out.insert(name.trim().to_string(), rank).is_some() {
            return Err(format!("vertex `{}` given twice", name.trim()));
        }
    }
    if out.is_empty() {
        return Err("no ranks given".into());
    }
    Ok(out)
}

/// Resolves named ranks to vertex order. Without user ranks the first vertex
/// gets rank 2, so the default run exercises a non-trivial amplification.
pub fn resolve_ranks(
    ctx: &CorrespondenceContext,
    named: Option<&BTreeMap<String, usize>>,
) -> Result<Vec<usize>, CliError> {
    let g = ctx.graph();
    let mut ranks = vec![1; g.num_vertices()];
    match named {
        None => {
            if let Some(first) = ranks.first_mut() {
                *first = 2;
            }
        }
        Some(named) => {
            for (name, &rank) in named {
                let v = g
                    .vertex_index(name)
                    .ok_or_else(|| CliError::Input(format!("--morita-ranks: unknown vertex `{name}`")))?;
                if rank == 0 {
                    return Err(CliError::Input(format!("--morita-ranks: vertex `{name}` has rank 0")));
                }
                ranks[v] = rank;
            }
        }
    }
    Ok(ranks)
}

/// Per-trial seed derived from the run seed (splitmix64 finaliser), so a
/// single failing trial can be replayed in isolation.
pub fn trial_seed(seed: u64, suite: Suite, trial: usize) -> u64 {
    let mut z = seed
        ^ (suite as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_parse() {
        let r = parse_ranks("v1=2, v2=1").unwrap();
        assert_eq!(r["v1"], 2);
        assert_eq!(r["v2"], 1);
        assert!(parse_ranks("v1").is_err());
        assert!(parse_ranks("v1=x").is_err());
        assert!(parse_ranks("v1=1,v1=2").is_err());
    }

    #[test]
    fn all_expands_in_order() {
        assert_eq!(Suite::expand(&[Suite::Eval, Suite::All]), Suite::EVERY.to_vec());
        assert_eq!(Suite::expand(&[Suite::Eval, Suite::Moebius, Suite::Eval]), vec![Suite::Moebius, Suite::Eval]);
    }

    #[test]
    fn trial_seeds_differ() {
        assert_ne!(trial_seed(1, Suite::Moebius, 0), trial_seed(1, Suite::Moebius, 1));
        assert_ne!(trial_seed(1, Suite::Moebius, 0), trial_seed(1, Suite::Eval, 0));
        assert_eq!(trial_seed(7, Suite::Pseudo, 3), trial_seed(7, Suite::Pseudo, 3));
    }
}
