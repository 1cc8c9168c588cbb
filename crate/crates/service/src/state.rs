use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use regspec_core::cnl::{abstract_registry, parse, render, CnlDocument, CnlError};
use regspec_core::datagen::Generators;
use regspec_core::mmsr;
use regspec_core::ruleset::{load_ruleset, Ruleset, RulesetError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot list {path}: {source}")]
    Dir { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Ruleset { path: PathBuf, source: RulesetError },
    #[error("{path}: {source}")]
    Cnl { path: PathBuf, source: CnlError },
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: cannot abstract the root contract: {reason}")]
    Abstract { path: PathBuf, reason: String },
}

/// A ruleset as served: registry, generators and its controlled-language view.
#[derive(Debug, Clone)]
pub struct LoadedRuleset {
    pub ruleset: Ruleset,
    pub generators: Generators,
    /// Text rendered from the registry's abstraction at the root.
    pub cnl_text: String,
    /// The authored document shipped next to the ruleset, or the abstraction.
    pub document: CnlDocument,
}

impl LoadedRuleset {
    pub fn new(ruleset: Ruleset, authored: Option<CnlDocument>) -> Result<Self, String> {
        let abstraction = abstract_registry(&ruleset.registry, &ruleset.root).map_err(|e| e.to_string())?;
        Ok(LoadedRuleset {
            cnl_text: render(&abstraction.document),
            document: authored.unwrap_or(abstraction.document),
            generators: mmsr::generators(),
            ruleset,
        })
    }
}

/// Immutable after construction; handlers share it read-only.
#[derive(Debug, Clone, Default)]
pub struct AppState {
    pub rulesets: Arc<BTreeMap<String, LoadedRuleset>>,
}

impl AppState {
    pub fn new(rulesets: BTreeMap<String, LoadedRuleset>) -> Self {
        AppState {
            rulesets: Arc::new(rulesets),
        }
    }

    /// Only the bundled ruleset, under the id `mmsr`.
    pub fn bundled() -> Self {
        let loaded = LoadedRuleset::new(mmsr::ruleset(), Some(mmsr::cnl_document())).expect("bundle abstracts");
        AppState::new(BTreeMap::from([("mmsr".to_owned(), loaded)]))
    }

    /// Every `<id>.json` in `dir`, each with an optional `<id>.cnl` beside it.
    pub fn load_dir(dir: &Path) -> Result<Self, LoadError> {
        let entries = std::fs::read_dir(dir).map_err(|source| LoadError::Dir { path: dir.into(), source })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut rulesets = BTreeMap::new();
        for path in paths {
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else { continue };
            let ruleset = load_ruleset(&path).map_err(|source| LoadError::Ruleset { path: path.clone(), source })?;
            let cnl_path = path.with_extension("cnl");
            let authored = if cnl_path.exists() {
                let text = std::fs::read_to_string(&cnl_path)
                    .map_err(|source| LoadError::Read { path: cnl_path.clone(), source })?;
                Some(parse(&text).map_err(|source| LoadError::Cnl { path: cnl_path.clone(), source })?)
            } else {
                None
            };
            let loaded =
                LoadedRuleset::new(ruleset, authored).map_err(|reason| LoadError::Abstract { path: path.clone(), reason })?;
            rulesets.insert(id, loaded);
        }
        Ok(AppState::new(rulesets))
    }
}
