use crate::data::synth::SyntheticSequence;
use crate::data::{DatasetManifest, FrameRecord};
use crate::error::{contract, Result};
use crate::num::Real;

/// Anything that yields labelled sequences of frames.
pub trait FrameSource<T>: Sync {
    fn sequence_ids(&self) -> Vec<String>;
    fn load_sequence(&self, id: &str) -> Result<Vec<FrameRecord<T>>>;
}

impl<T: Real> FrameSource<T> for [SyntheticSequence<T>] {
    fn sequence_ids(&self) -> Vec<String> {
        self.iter().map(|s| s.id.clone()).collect()
    }

    fn load_sequence(&self, id: &str) -> Result<Vec<FrameRecord<T>>> {
        match self.iter().find(|s| s.id == id) {
            Some(s) => Ok(s.frames.clone()),
            None => contract(format!("unknown sequence '{}'", id)),
        }
    }
}

impl<T: Real> FrameSource<T> for Vec<SyntheticSequence<T>> {
    fn sequence_ids(&self) -> Vec<String> {
        self.as_slice().sequence_ids()
    }

    fn load_sequence(&self, id: &str) -> Result<Vec<FrameRecord<T>>> {
        self.as_slice().load_sequence(id)
    }
}

impl<T: Real> FrameSource<T> for DatasetManifest {
    fn sequence_ids(&self) -> Vec<String> {
        self.sequences.iter().map(|s| s.id.clone()).collect()
    }

    fn load_sequence(&self, id: &str) -> Result<Vec<FrameRecord<T>>> {
        let Some(seq) = self.sequence(id) else {
            return contract(format!("unknown sequence '{}'", id));
        };
        seq.frames.iter().map(|f| self.load_frame(seq, f)).collect()
    }
}
