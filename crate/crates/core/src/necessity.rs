//! Necessary-condition search and the factor split it induces.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{necessity_consistency, CaseTable, FactorSchema, Level, Literal, Ratio};

/// Conventional necessity threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.9;

/// Every literal whose necessity consistency strictly exceeds `threshold`,
/// by consistency descending (ties by factor, then level).
pub fn necessary_conditions(table: &CaseTable, decision_label: Level, threshold: f64) -> Result<Vec<(Literal, Ratio)>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParameter { name: "necessity threshold", reason: alloc::format!("{threshold} is outside (0, 1]") });
    }
    let mut out = Vec::new();
    for lit in table.schema().literals() {
        let c = necessity_consistency(lit, table, decision_label)?;
        if c.value() > threshold {
            out.push((lit, c));
        }
    }
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(out)
}

/// Factor indices that carry no necessary literal, ascending.
pub fn exclude_necessary(schema: &FactorSchema, necessary: &[Literal]) -> Vec<usize> {
    let taken: BTreeSet<usize> = necessary.iter().map(|l| l.factor).collect();
    (0..schema.len()).filter(|i| !taken.contains(i)).collect()
}

/// Factors with more than one qualifying level (only possible for thresholds
/// at or below 0.5).
pub fn ambiguous_factors(necessary: &[(Literal, Ratio)]) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut dup = BTreeSet::new();
    for (lit, _) in necessary {
        if !seen.insert(lit.factor) {
            dup.insert(lit.factor);
        }
    }
    dup.into_iter().collect()
}
