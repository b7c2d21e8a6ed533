//! Corpus and triplet records as stored in JSONL files. Motion references
//! are paths relative to the directory of the file holding the record.

use std::fmt;

use fmf_core::compose::ComplexEdit;
use fmf_core::qc::FilterVerdict;
use fmf_core::vocab::{parse_fine_script, render_fine_script};
use fmf_core::{AtomicEdit, EditKind, FineScript};
use serde::{Deserialize, Serialize};

use crate::error::FmfError;

/// Serializes a script in its `<SEP>`-joined text rendering.
pub mod script_text {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(fs: &FineScript, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render_fine_script(fs))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<FineScript, D::Error> {
        let text = String::deserialize(d)?;
        parse_fine_script(&text).map_err(serde::de::Error::custom)
    }
}

mod script_text_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[FineScript], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(render_fine_script))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<FineScript>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| parse_fine_script(t).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Result<Split, FmfError> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(FmfError::UnknownSplitId(other.to_string())),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One source motion with its descriptions. The split is kept as text so an
/// unknown id can be reported rather than failing the whole file parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub caption: String,
    #[serde(with = "script_text")]
    pub fine_script: FineScript,
    pub motion_file: String,
    pub split: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Annotation {
    Pending,
    Accepted,
    Rejected,
    Revised { text: String },
}

/// Quality-control outcome: one verdict for an atomic triplet, one per step
/// for a complex one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qc {
    pub accepted: bool,
    pub verdicts: Vec<FilterVerdict>,
}

impl Qc {
    pub fn from_verdicts(verdicts: Vec<FilterVerdict>) -> Qc {
        Qc {
            accepted: !verdicts.is_empty() && verdicts.iter().all(|v| v.accepted),
            verdicts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    /// `direct`, or `swapped` when a deletion was built from its inverse.
    pub mode: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CotStep {
    pub instruction: String,
    pub edit: AtomicEdit,
    pub motion_id: String,
    pub motion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexInfo {
    pub members: Vec<String>,
    #[serde(with = "script_text_vec")]
    pub scripts: Vec<FineScript>,
    /// Each step paired with the motion it produces.
    pub cot: Vec<CotStep>,
}

impl ComplexInfo {
    pub fn steps(&self) -> impl Iterator<Item = &AtomicEdit> {
        self.cot.iter().map(|c| &c.edit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EditInfo {
    Atomic { edit: AtomicEdit },
    Complex(ComplexInfo),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditTriplet {
    pub id: String,
    pub caption: String,
    pub source_id: String,
    pub source_motion: String,
    #[serde(with = "script_text")]
    pub source_script: FineScript,
    pub target_id: String,
    pub target_motion: String,
    #[serde(with = "script_text")]
    pub target_script: FineScript,
    pub edit: EditInfo,
    pub instruction_basic: String,
    #[serde(default)]
    pub instructions_rewritten: Vec<String>,
    pub qc: Option<Qc>,
    pub annotation: Annotation,
    pub split: Split,
    pub provenance: Provenance,
}

impl EditTriplet {
    pub fn atomic_edit(&self) -> Option<&AtomicEdit> {
        match &self.edit {
            EditInfo::Atomic { edit } => Some(edit),
            EditInfo::Complex(_) => None,
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.edit, EditInfo::Complex(_))
    }

    /// Kind of an atomic triplet, or of each step of a complex one.
    pub fn kinds(&self) -> Vec<EditKind> {
        match &self.edit {
            EditInfo::Atomic { edit } => vec![edit.kind()],
            EditInfo::Complex(c) => c.steps().map(|s| s.kind()).collect(),
        }
    }

    pub fn qc_accepted(&self) -> bool {
        self.qc.as_ref().is_some_and(|q| q.accepted)
    }

    /// The instruction a consumer should train on: a revision if present.
    pub fn final_instruction(&self) -> &str {
        match &self.annotation {
            Annotation::Revised { text } => text,
            _ => &self.instruction_basic,
        }
    }

    /// Every motion this record references.
    pub fn motion_refs(&self) -> Vec<&str> {
        let mut v = vec![self.source_motion.as_str(), self.target_motion.as_str()];
        if let EditInfo::Complex(c) = &self.edit {
            v.extend(c.cot.iter().map(|s| s.motion.as_str()));
        }
        v
    }

    /// Rewrites every motion reference.
    pub fn map_refs(&mut self, mut f: impl FnMut(&str) -> Result<String, FmfError>) -> Result<(), FmfError> {
        self.source_motion = f(&self.source_motion)?;
        self.target_motion = f(&self.target_motion)?;
        if let EditInfo::Complex(c) = &mut self.edit {
            for s in &mut c.cot {
                s.motion = f(&s.motion)?;
            }
        }
        Ok(())
    }
}

impl From<&ComplexEdit> for ComplexInfo {
    /// Motion ids and references are filled in by the caller.
    fn from(c: &ComplexEdit) -> Self {
        ComplexInfo {
            members: c.members.clone(),
            scripts: c.scripts.clone(),
            cot: c
                .steps
                .iter()
                .zip(&c.step_instructions)
                .map(|(e, i)| CotStep {
                    instruction: i.clone(),
                    edit: e.clone(),
                    motion_id: String::new(),
                    motion: String::new(),
                })
                .collect(),
        }
    }
}
