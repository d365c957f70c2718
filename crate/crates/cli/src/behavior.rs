//! Behavior files for classical audits.
//!
//! ```text
//! # optional comment lines
//! items: a b c d
//! x0: 1 0 1 1
//! x1: 0 0 1 0
//! y0: 1 1 1 0
//! y1: 0 1 0 0
//! ```
//!
//! Without an `items:` line, items are named `j1..jn`.

use latsem_core::bell::{BinaryBehavior, ItemUniverse};
use latsem_core::{Error, Result};

pub const LABELS: [&str; 4] = ["x0", "x1", "y0", "y1"];

pub struct BehaviorSet {
    pub universe: ItemUniverse,
    /// In `x0, x1, y0, y1` order.
    pub behaviors: [BinaryBehavior; 4],
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse(text: &str) -> Result<BehaviorSet> {
    let mut items: Option<Vec<String>> = None;
    let mut rows: [Option<(usize, Vec<bool>)>; 4] = Default::default();
    let mut last = 0;
    for (n, line) in text.lines().enumerate().map(|(n, l)| (n + 1, l.trim())) {
        last = n;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| parse_error(n, "expected `label: values`"))?;
        let key = key.trim();
        if key == "items" {
            if items.is_some() {
                return Err(parse_error(n, "repeated `items:` line"));
            }
            items = Some(rest.split_whitespace().map(str::to_string).collect());
            continue;
        }
        let slot = LABELS
            .iter()
            .position(|&l| l == key)
            .ok_or_else(|| parse_error(n, format!("unknown label `{key}` (expected x0, x1, y0, y1)")))?;
        if rows[slot].is_some() {
            return Err(parse_error(n, format!("repeated `{key}` line")));
        }
        let values = rest
            .split_whitespace()
            .map(|t| match t {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(parse_error(n, format!("expected 0 or 1, found `{other}`"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        rows[slot] = Some((n, values));
    }

    let width = rows.iter().flatten().map(|(_, v)| v.len()).next().unwrap_or(0);
    let universe = match items {
        Some(names) => ItemUniverse::new(names),
        None => ItemUniverse::numbered(width),
    };
    let mut behaviors = Vec::with_capacity(4);
    for (label, row) in LABELS.iter().zip(rows) {
        let (n, values) = row.ok_or_else(|| parse_error(last.max(1), format!("missing `{label}` line")))?;
        if values.len() != universe.len() {
            return Err(parse_error(
                n,
                format!("expected {} values, found {}", universe.len(), values.len()),
            ));
        }
        behaviors.push(BinaryBehavior::new(&universe, values)?);
    }
    let behaviors: [BinaryBehavior; 4] = behaviors.try_into().unwrap_or_else(|_| unreachable!("four labels"));
    Ok(BehaviorSet { universe, behaviors })
}
