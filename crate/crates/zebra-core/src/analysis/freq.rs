//! Chosen/rejected selection frequencies over an emitted pair stream.

use std::collections::BTreeMap;

use crate::dataset::PreferencePair;
use crate::error::Result;
use crate::select::PairCounts;

/// Exact per-model tallies; the sum of chosen counts equals the number of
/// pairs. This is the `frequencies.json` schema.
pub fn frequency_report<I>(pairs: I) -> Result<BTreeMap<String, PairCounts>>
where
    I: IntoIterator<Item = Result<PreferencePair>>,
{
    let mut counts: BTreeMap<String, PairCounts> = BTreeMap::new();
    for pair in pairs {
        let pair = pair?;
        counts.entry(pair.chosen.model).or_default().chosen += 1;
        counts.entry(pair.rejected.model).or_default().rejected += 1;
    }
    Ok(counts)
}
