//! The seven bundled example systems.
//!
//! Specs live as `.nt` files in the crate's `corpus/` directory, or in the
//! directory named by `DIMGEN_CORPUS`.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::datapath::{build_design, DatapathError, DesignOptions, RtlDesign};
use crate::dsl::{parse_file, SourceSpec, SpecFileError};
use crate::pi::{synthesize_pi, PiBasis, PiError};

pub const CORPUS_ENV: &str = "DIMGEN_CORPUS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusEntry {
    /// Short name, also the design name.
    pub key: &'static str,
    pub file: &'static str,
    pub title: &'static str,
    pub invariant: &'static str,
    pub target: &'static str,
    /// What the target measures.
    pub target_label: &'static str,
}

pub const CORPUS: [CorpusEntry; 7] = [
    CorpusEntry {
        key: "beam",
        file: "beam.nt",
        title: "Beam",
        invariant: "Beam",
        target: "delta",
        target_label: "beam deflection",
    },
    CorpusEntry {
        key: "pendulum",
        file: "pendulum.nt",
        title: "Pendulum, static",
        invariant: "Pendulum",
        target: "t",
        target_label: "oscillation period",
    },
    CorpusEntry {
        key: "fluid_in_pipe",
        file: "fluid_in_pipe.nt",
        title: "Fluid in pipe",
        invariant: "FluidInPipe",
        target: "v",
        target_label: "fluid velocity",
    },
    CorpusEntry {
        key: "glider",
        file: "glider.nt",
        title: "Unpowered flight",
        invariant: "UAVglider",
        target: "h",
        target_label: "height",
    },
    CorpusEntry {
        key: "vibrating_string",
        file: "vibrating_string.nt",
        title: "Vibrating string",
        invariant: "VibratingString",
        target: "f",
        target_label: "oscillation frequency",
    },
    CorpusEntry {
        key: "warm_vibrating_string",
        file: "warm_vibrating_string.nt",
        title: "Warm vibrating string",
        invariant: "WarmVibratingString",
        target: "f",
        target_label: "oscillation frequency",
    },
    CorpusEntry {
        key: "spring_mass",
        file: "spring_mass.nt",
        title: "Spring-mass system",
        invariant: "SpringMass",
        target: "k",
        target_label: "spring constant",
    },
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus file {} not found", path.display())]
    Missing { path: PathBuf },
    #[error(transparent)]
    Spec(#[from] SpecFileError),
    #[error("{key}: {source}")]
    Pi { key: String, source: PiError },
    #[error("{key}: {source}")]
    Datapath { key: String, source: DatapathError },
}

/// `DIMGEN_CORPUS` if set, otherwise the bundled directory.
pub fn corpus_dir() -> PathBuf {
    std::env::var_os(CORPUS_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus")))
}

pub fn entry(key: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.key == key)
}

impl CorpusEntry {
    pub fn path(&self, dir: &Path) -> PathBuf {
        dir.join(self.file)
    }

    pub fn load(&self, dir: &Path) -> Result<SourceSpec, CorpusError> {
        let path = self.path(dir);
        if !path.is_file() {
            return Err(CorpusError::Missing { path });
        }
        Ok(parse_file(&path)?)
    }

    pub fn basis(&self, dir: &Path) -> Result<PiBasis, CorpusError> {
        let spec = self.load(dir)?;
        synthesize_pi(&spec, Some(self.invariant), self.target)
            .map_err(|source| CorpusError::Pi { key: self.key.to_string(), source })
    }

    pub fn design(
        &self,
        dir: &Path,
        options: &DesignOptions,
    ) -> Result<(PiBasis, RtlDesign), CorpusError> {
        let basis = self.basis(dir)?;
        let design = build_design(&basis, self.key, options)
            .map_err(|source| CorpusError::Datapath { key: self.key.to_string(), source })?;
        Ok((basis, design))
    }
}
