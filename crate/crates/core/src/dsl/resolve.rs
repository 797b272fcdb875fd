use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// A resolved include: a canonical identity (used for cycle detection) and its text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolved {
    pub id: String,
    pub text: String,
}

/// Looks up non-prelude includes. `including` is the id of the file that
/// contains the `include` line (the root file's id for top-level includes).
pub trait IncludeResolver {
    fn resolve(&self, including: &str, name: &str) -> Option<Resolved>;
}

/// Rejects every include other than the prelude.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoIncludes;

impl IncludeResolver for NoIncludes {
    fn resolve(&self, _including: &str, _name: &str) -> Option<Resolved> {
        None
    }
}

/// In-memory include table keyed by include name.
#[derive(Debug, Default, Clone)]
pub struct MapResolver(pub HashMap<String, String>);

impl IncludeResolver for MapResolver {
    fn resolve(&self, _including: &str, name: &str) -> Option<Resolved> {
        self.0.get(name).map(|text| Resolved { id: name.to_string(), text: text.clone() })
    }
}

/// Resolves includes as filesystem paths relative to the including file.
#[derive(Debug, Default, Clone, Copy)]
pub struct FsResolver;

impl IncludeResolver for FsResolver {
    fn resolve(&self, including: &str, name: &str) -> Option<Resolved> {
        let base = Path::new(including).parent().map(Path::to_path_buf).unwrap_or_default();
        let path: PathBuf = base.join(name);
        let text = std::fs::read_to_string(&path).ok()?;
        let id = path.canonicalize().unwrap_or(path).to_string_lossy().into_owned();
        Some(Resolved { id, text })
    }
}
