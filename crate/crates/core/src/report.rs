//! Serde helpers shared by the JSON reports.

use serde::Serializer;

use crate::mask::SubsetMask;

/// Serializes a mask as its sorted list of element indices.
pub fn mask_as_list<S: Serializer>(m: &SubsetMask, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(m.iter())
}
