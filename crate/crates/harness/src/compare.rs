//! Pairing two CSV runs by key columns and comparing their timings.

use std::collections::BTreeMap;

use crate::emit::CsvRecord;
use crate::stats::{compare, ComparisonReport};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyColumn {
    Benchmark,
    Class,
    Workers,
    SafeMode,
}

impl KeyColumn {
    pub fn parse_list(s: &str) -> Result<Vec<KeyColumn>, HarnessError> {
        s.split(',')
            .map(|k| match k.trim() {
                "benchmark" => Ok(KeyColumn::Benchmark),
                "class" => Ok(KeyColumn::Class),
                "workers" => Ok(KeyColumn::Workers),
                "safe_mode" => Ok(KeyColumn::SafeMode),
                other => Err(HarnessError::Usage(format!("unknown key column `{other}`"))),
            })
            .collect()
    }

    fn value(self, r: &CsvRecord) -> String {
        match self {
            KeyColumn::Benchmark => r.benchmark.clone(),
            KeyColumn::Class => r.class.to_string(),
            KeyColumn::Workers => r.workers.to_string(),
            KeyColumn::SafeMode => r.safe_mode.to_string(),
        }
    }
}

fn label(keys: &[KeyColumn], r: &CsvRecord) -> String {
    keys.iter()
        .map(|k| k.value(r))
        .collect::<Vec<_>>()
        .join("/")
}

fn group(keys: &[KeyColumn], rows: &[CsvRecord]) -> BTreeMap<String, Vec<(usize, f64)>> {
    let mut m: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows {
        m.entry(label(keys, r))
            .or_default()
            .push((r.rep, r.seconds));
    }
    for v in m.values_mut() {
        v.sort_by_key(|(rep, _)| *rep);
    }
    m
}

/// One report per key present in both inputs. Samples pair by repetition
/// order, so both sides need the same number of rows per key.
pub fn compare_runs(
    name_a: &str,
    a: &[CsvRecord],
    name_b: &str,
    b: &[CsvRecord],
    keys: &[KeyColumn],
) -> Result<Vec<ComparisonReport>, HarnessError> {
    let ga = group(keys, a);
    let gb = group(keys, b);
    let mut out = Vec::new();
    for (key, sa) in &ga {
        let Some(sb) = gb.get(key) else { continue };
        let xa: Vec<f64> = sa.iter().map(|p| p.1).collect();
        let xb: Vec<f64> = sb.iter().map(|p| p.1).collect();
        let report = compare(
            &format!("{name_a}[{key}]"),
            &xa,
            &format!("{name_b}[{key}]"),
            &xb,
        )
        .map_err(|e| HarnessError::Usage(format!("{key}: {e}")))?;
        out.push(report);
    }
    Ok(out)
}
