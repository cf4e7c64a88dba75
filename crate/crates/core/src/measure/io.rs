//! JSON instance files.
//!
//! ```json
//! {"weights": ["1/3","1/3","1/3"], "sets": {"prefix": [[0],[1]], "tail": [], "stab": 2}}
//! {"weights": ["1/2","1/2"], "funcs": {"prefix": [["0","1"]], "tail": ["1","1"], "stab": 1}}
//! ```

use serde::{Deserialize, Serialize};

use super::{FiniteProbSpace, FuncSeq, MeasureError, PointSet, SetSeq};
use crate::num::{serde_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSeqFile {
    pub prefix: Vec<PointSet>,
    pub tail: PointSet,
    pub stab: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuncSeqFile {
    #[serde(with = "serde_rational::vec2")]
    pub prefix: Vec<Vec<Rational>>,
    #[serde(with = "serde_rational::vec")]
    pub tail: Vec<Rational>,
    pub stab: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(with = "serde_rational::vec")]
    pub weights: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<SetSeqFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub funcs: Option<FuncSeqFile>,
}

impl From<&SetSeq> for SetSeqFile {
    fn from(s: &SetSeq) -> Self {
        SetSeqFile { prefix: s.prefix().to_vec(), tail: s.tail().clone(), stab: s.stab_index() }
    }
}

impl From<&FuncSeq> for FuncSeqFile {
    fn from(f: &FuncSeq) -> Self {
        FuncSeqFile { prefix: f.prefix().to_vec(), tail: f.tail().to_vec(), stab: f.stab_index() }
    }
}

impl SetSeqFile {
    pub fn to_seq(&self) -> Result<SetSeq, MeasureError> {
        if self.stab != self.prefix.len() {
            return Err(MeasureError::StabMismatch { stab: self.stab, prefix: self.prefix.len() });
        }
        Ok(SetSeq::new(self.prefix.clone(), self.tail.clone()))
    }
}

impl FuncSeqFile {
    pub fn to_seq(&self) -> Result<FuncSeq, MeasureError> {
        if self.stab != self.prefix.len() {
            return Err(MeasureError::StabMismatch { stab: self.stab, prefix: self.prefix.len() });
        }
        FuncSeq::new(self.prefix.clone(), self.tail.clone())
    }
}

impl Instance {
    pub fn with_sets(space: &FiniteProbSpace, seq: &SetSeq) -> Self {
        Instance { weights: space.weights().to_vec(), sets: Some(seq.into()), funcs: None }
    }

    pub fn with_funcs(space: &FiniteProbSpace, fs: &FuncSeq) -> Self {
        Instance { weights: space.weights().to_vec(), sets: None, funcs: Some(fs.into()) }
    }

    pub fn space(&self) -> Result<FiniteProbSpace, MeasureError> {
        FiniteProbSpace::new(self.weights.clone())
    }

    pub fn set_seq(&self) -> Result<Option<SetSeq>, MeasureError> {
        let space = self.space()?;
        self.sets
            .as_ref()
            .map(|s| {
                let seq = s.to_seq()?;
                seq.validate(&space)?;
                Ok(seq)
            })
            .transpose()
    }

    pub fn func_seq(&self) -> Result<Option<FuncSeq>, MeasureError> {
        let space = self.space()?;
        self.funcs
            .as_ref()
            .map(|f| {
                let fs = f.to_seq()?;
                fs.validate(&space)?;
                Ok(fs)
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn reads_the_documented_layouts() {
        let text = r#"{"weights":["1/3","1/3","1/3"],"sets":{"prefix":[[0],[1]],"tail":[],"stab":2}}"#;
        let inst: Instance = serde_json::from_str(text).unwrap();
        let seq = inst.set_seq().unwrap().unwrap();
        assert_eq!(seq.stab_index(), 2);
        assert_eq!(serde_json::to_string(&inst).unwrap(), text);

        let text = r#"{"weights":["1/2","1/2"],"funcs":{"prefix":[["0","1"]],"tail":["1","1"],"stab":1}}"#;
        let inst: Instance = serde_json::from_str(text).unwrap();
        let fs = inst.func_seq().unwrap().unwrap();
        assert_eq!(fs.get(0), &[rat(0, 1), rat(1, 1)]);
        assert_eq!(serde_json::to_string(&inst).unwrap(), text);
    }

    #[test]
    fn rejects_inconsistent_files() {
        let bad_stab = r#"{"weights":["1"],"sets":{"prefix":[[0]],"tail":[],"stab":3}}"#;
        let inst: Instance = serde_json::from_str(bad_stab).unwrap();
        assert!(matches!(inst.set_seq(), Err(MeasureError::StabMismatch { .. })));
        let bad_point = r#"{"weights":["1"],"sets":{"prefix":[[4]],"tail":[],"stab":1}}"#;
        let inst: Instance = serde_json::from_str(bad_point).unwrap();
        assert!(matches!(inst.set_seq(), Err(MeasureError::PointOutOfRange { .. })));
        let decimal = r#"{"weights":["0.5","0.5"]}"#;
        assert!(serde_json::from_str::<Instance>(decimal).is_err());
    }
}
