use macroreal_core::bell::settings_budget;
use serde::Serialize;

use crate::config::{BigCount, BudgetParams};
use crate::error::{LabError, LabResult};
use crate::report::{Check, Outcome};

#[derive(Debug, Clone, Serialize)]
struct Record {
    /// Decimal strings, since the values may not fit a JSON double.
    total: Option<String>,
    partitions: Option<String>,
    region_size: u64,
    body: u64,
    budget: u64,
    expected: u64,
}

/// Region size from an explicit value or from `total / partitions`, which
/// must divide exactly.
fn region_size(total: Option<u128>, partitions: Option<u128>, explicit: Option<u64>) -> LabResult<u64> {
    if let Some(n) = explicit {
        return Ok(n);
    }
    let (t, p) = total
        .zip(partitions)
        .ok_or_else(|| LabError::Invalid("missing region size".into()))?;
    if p == 0 || t % p != 0 {
        return Err(LabError::Invalid(format!(
            "{p} partitions do not divide {t} spins evenly"
        )));
    }
    u64::try_from(t / p).map_err(|_| LabError::Invalid(format!("region size {} overflows", t / p)))
}

pub fn run(p: &BudgetParams) -> LabResult<Outcome> {
    let records = p
        .cases
        .iter()
        .map(|c| {
            let total = c.total.as_ref().and_then(BigCount::value);
            let partitions = c.partitions.as_ref().and_then(BigCount::value);
            let n = region_size(total, partitions, c.region_size)?;
            Ok(Record {
                total: total.map(|t| t.to_string()),
                partitions: partitions.map(|p| p.to_string()),
                region_size: n,
                body: c.body,
                budget: settings_budget(n, c.body)?,
                expected: c.expected,
            })
        })
        .collect::<LabResult<Vec<_>>>()?;
    let mut out = Outcome::default();
    let wrong = records.iter().filter(|r| r.budget != r.expected).count();
    out.summarize(
        "budgets",
        records
            .iter()
            .map(|r| format!("floor({} / {}) = {}", r.region_size, r.body, r.budget))
            .collect::<Vec<_>>(),
    );
    out.check(Check::count_zero("budgets_exact", wrong, records.len()));
    records.into_iter().for_each(|r| out.record(r));
    Ok(out)
}
