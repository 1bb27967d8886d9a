//! Support patterns `Omega` inside an `m x n` grid.
//!
//! A pattern is stored column-wise: column `j` holds the bitmask of the rows
//! `omega_j` it observes. All external formats are 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{self, Mask, MAX_BITS};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportPattern {
    m: usize,
    n: usize,
    columns: Vec<Mask>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Indicator,
    Json,
}

/// One deletion performed by [`SupportPattern::reduce`]. `index` is the
/// 1-based position in the pattern at the time of deletion, `original` the
/// 1-based position in the input pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionStep {
    Column { index: usize, original: usize },
    Row { index: usize, original: usize },
}

#[derive(Serialize, Deserialize)]
struct PatternJson {
    m: usize,
    n: usize,
    columns: Vec<Vec<usize>>,
}

impl SupportPattern {
    /// Builds a pattern from column bitmasks (bit `k` = row `k + 1`).
    pub fn from_masks(m: usize, columns: Vec<Mask>) -> Result<Self> {
        check_dims(m, columns.len())?;
        let allowed = bits::full(m);
        if let Some(j) = columns.iter().position(|&c| c & !allowed != 0) {
            return Err(Error::contract(format!(
                "column {} has a row index above m = {m}",
                j + 1
            )));
        }
        Ok(SupportPattern {
            m,
            n: columns.len(),
            columns,
        })
    }

    /// Builds a pattern from 1-based column supports.
    pub fn from_columns(m: usize, columns: &[Vec<usize>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(columns.len());
        for (j, col) in columns.iter().enumerate() {
            let mut mask = 0;
            for &i in col {
                if i == 0 || i > m {
                    return Err(Error::contract(format!(
                        "column {}: row {i} out of range 1..={m}",
                        j + 1
                    )));
                }
                mask |= 1u64 << (i - 1);
            }
            masks.push(mask);
        }
        Self::from_masks(m, masks)
    }

    /// Builds a pattern from a 0/1 indicator matrix given as rows.
    pub fn from_indicator(rows: &[Vec<u8>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::contract("ragged indicator matrix"));
        }
        let columns = (0..n)
            .map(|j| bits::from_zero_based((0..m).filter(|&i| rows[i][j] != 0)))
            .collect();
        Self::from_masks(m, columns)
    }

    pub fn full(m: usize, n: usize) -> Result<Self> {
        Self::from_masks(m, vec![bits::full(m); n])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Column support masks, 0-based column order.
    pub fn columns(&self) -> &[Mask] {
        &self.columns
    }

    /// Column support for 0-based column `j`.
    pub fn column(&self, j: usize) -> Mask {
        self.columns[j]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        bits::contains(self.columns[j], i)
    }

    /// `size(Omega)`.
    pub fn size(&self) -> usize {
        self.columns.iter().map(|&c| bits::card(c)).sum()
    }

    /// `r(m + n - r)`, the dimension of the variety of rank-`r` matrices.
    pub fn base_size(&self, r: usize) -> usize {
        r * (self.m + self.n) - r * r
    }

    /// Union of the supports of the given 0-based columns.
    pub fn union_of(&self, cols: impl IntoIterator<Item = usize>) -> Mask {
        cols.into_iter().fold(0, |acc, j| acc | self.columns[j])
    }

    /// `Omega_J`: the pattern restricted to the 0-based columns `cols`,
    /// in the given order.
    pub fn restrict_columns(&self, cols: &[usize]) -> SupportPattern {
        SupportPattern {
            m: self.m,
            n: cols.len(),
            columns: cols.iter().map(|&j| self.columns[j]).collect(),
        }
    }

    /// Row-degree and column-degree vectors.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let rows = (0..self.m)
            .map(|i| self.columns.iter().filter(|&&c| bits::contains(c, i)).count())
            .collect();
        let cols = self.columns.iter().map(|&c| bits::card(c)).collect();
        (rows, cols)
    }

    /// Minimum over all row and column degrees (`None` for an empty grid).
    pub fn min_degree(&self) -> Option<usize> {
        let (r, c) = self.degrees();
        r.into_iter().chain(c).min()
    }

    pub fn transpose(&self) -> SupportPattern {
        let columns = (0..self.m)
            .map(|i| bits::from_zero_based((0..self.n).filter(|&j| bits::contains(self.columns[j], i))))
            .collect();
        SupportPattern {
            m: self.n,
            n: self.m,
            columns,
        }
    }

    fn remove_column(&mut self, j: usize) {
        self.columns.remove(j);
        self.n -= 1;
    }

    fn remove_row(&mut self, i: usize) {
        let low = bits::full(i);
        for c in &mut self.columns {
            *c = (*c & low) | ((*c >> 1) & !low);
        }
        self.m -= 1;
    }

    /// Deletes columns of size exactly `r` and rows of degree exactly `r`
    /// until neither exists. Each pass goes in ascending index order; a
    /// column pass always precedes the row pass of the same round.
    pub fn reduce(&self, r: usize) -> Result<(SupportPattern, Vec<ReductionStep>)> {
        if r == 0 {
            return Err(Error::contract("reduce requires r >= 1"));
        }
        let mut cur = self.clone();
        let mut col_orig: Vec<usize> = (1..=self.n).collect();
        let mut row_orig: Vec<usize> = (1..=self.m).collect();
        let mut log = Vec::new();
        loop {
            let mut changed = false;
            let mut j = 0;
            while j < cur.n {
                if bits::card(cur.columns[j]) == r {
                    log.push(ReductionStep::Column {
                        index: j + 1,
                        original: col_orig.remove(j),
                    });
                    cur.remove_column(j);
                    changed = true;
                } else {
                    j += 1;
                }
            }
            let mut i = 0;
            while i < cur.m {
                let deg = cur.columns.iter().filter(|&&c| bits::contains(c, i)).count();
                if deg == r {
                    log.push(ReductionStep::Row {
                        index: i + 1,
                        original: row_orig.remove(i),
                    });
                    cur.remove_row(i);
                    changed = true;
                } else {
                    i += 1;
                }
            }
            if !changed {
                return Ok((cur, log));
            }
        }
    }

    /// Applies a reduction log to `self`.
    pub fn replay(&self, log: &[ReductionStep]) -> Result<SupportPattern> {
        let mut cur = self.clone();
        for step in log {
            match *step {
                ReductionStep::Column { index, .. } => {
                    if index == 0 || index > cur.n {
                        return Err(Error::contract(format!("column {index} out of range")));
                    }
                    cur.remove_column(index - 1);
                }
                ReductionStep::Row { index, .. } => {
                    if index == 0 || index > cur.m {
                        return Err(Error::contract(format!("row {index} out of range")));
                    }
                    cur.remove_row(index - 1);
                }
            }
        }
        Ok(cur)
    }

    pub fn to_indicator_rows(&self) -> Vec<Vec<u8>> {
        (0..self.m)
            .map(|i| self.columns.iter().map(|&c| bits::contains(c, i) as u8).collect())
            .collect()
    }

    /// Canonical text serialization.
    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Indicator => {
                let mut out = String::new();
                for row in self.to_indicator_rows() {
                    let tokens: Vec<&str> = row.iter().map(|&b| if b == 1 { "1" } else { "0" }).collect();
                    out.push_str(&tokens.join(" "));
                    out.push('\n');
                }
                out
            }
            Format::Json => serde_json::to_string(&self.to_json()).expect("pattern serializes"),
        }
    }

    fn to_json(&self) -> PatternJson {
        PatternJson {
            m: self.m,
            n: self.n,
            columns: self.columns.iter().map(|&c| bits::to_one_based(c)).collect(),
        }
    }

    /// Parses either the indicator-matrix format or the JSON format
    /// (detected by a leading `{`).
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.is_empty() {
            return Err(Error::parse("input", "empty pattern text"));
        }
        if trimmed.starts_with('{') {
            Self::parse_json(trimmed)
        } else {
            Self::parse_indicator(text)
        }
    }

    fn parse_indicator(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<u8>> = Vec::new();
        let lines: Vec<&str> = text.lines().collect();
        let last = lines
            .iter()
            .rposition(|l| !l.trim().is_empty())
            .ok_or_else(|| Error::parse("input", "empty pattern text"))?;
        for (ln, line) in lines[..=last].iter().enumerate() {
            let mut row = Vec::new();
            for (tn, tok) in line.split_whitespace().enumerate() {
                match tok {
                    "0" => row.push(0),
                    "1" => row.push(1),
                    other => {
                        return Err(Error::parse(
                            format!("line {}, token {}", ln + 1, tn + 1),
                            format!("expected 0 or 1, found {other:?}"),
                        ))
                    }
                }
            }
            if row.is_empty() {
                return Err(Error::parse(format!("line {}", ln + 1), "empty row"));
            }
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::parse(
                        format!("line {}", ln + 1),
                        format!("ragged row: {} tokens, expected {}", row.len(), first.len()),
                    ));
                }
            }
            rows.push(row);
        }
        let (m, n) = (rows.len(), rows[0].len());
        if m > MAX_BITS || n > MAX_BITS {
            return Err(Error::Capacity {
                what: "grid side",
                value: m.max(n),
                ceiling: MAX_BITS,
            });
        }
        Self::from_indicator(&rows)
    }

    fn parse_json(text: &str) -> Result<Self> {
        let doc: PatternJson = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("json line {}", e.line()), e.to_string()))?;
        if doc.m == 0 || doc.n == 0 {
            return Err(Error::parse("m/n", "dimensions must be positive"));
        }
        check_dims(doc.m, doc.n)?;
        if doc.columns.len() != doc.n {
            return Err(Error::parse(
                "columns",
                format!("expected {} columns, found {}", doc.n, doc.columns.len()),
            ));
        }
        let mut masks = Vec::with_capacity(doc.n);
        for (j, col) in doc.columns.iter().enumerate() {
            let mut mask: Mask = 0;
            for (k, &i) in col.iter().enumerate() {
                if i == 0 || i > doc.m {
                    return Err(Error::parse(
                        format!("columns[{j}][{k}]"),
                        format!("row index {i} outside 1..={}", doc.m),
                    ));
                }
                if bits::contains(mask, i - 1) {
                    return Err(Error::parse(
                        format!("columns[{j}][{k}]"),
                        format!("duplicate row index {i}"),
                    ));
                }
                mask |= 1u64 << (i - 1);
            }
            masks.push(mask);
        }
        Self::from_masks(doc.m, masks)
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    for (what, v) in [("m", m), ("n", n)] {
        if v > MAX_BITS {
            return Err(Error::Capacity {
                what,
                value: v,
                ceiling: MAX_BITS,
            });
        }
    }
    Ok(())
}

impl fmt::Debug for SupportPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SupportPattern({}x{}) ", self.m, self.n)?;
        f.debug_list()
            .entries(self.columns.iter().map(|&c| bits::to_one_based(c)))
            .finish()
    }
}

impl fmt::Display for SupportPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.emit(Format::Indicator))
    }
}

impl Serialize for SupportPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SupportPattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PatternJson::deserialize(d)?;
        SupportPattern::from_columns(doc.m, &doc.columns)
            .and_then(|p| {
                if p.n == doc.n {
                    Ok(p)
                } else {
                    Err(Error::parse("columns", "column count does not match n"))
                }
            })
            .map_err(serde::de::Error::custom)
    }
}
