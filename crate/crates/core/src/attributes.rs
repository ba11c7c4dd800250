//! Per-node covariates with explicit missingness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The seven individual-level covariates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attribute {
    Sex,
    Age,
    Religion,
    Caste,
    Education,
    Workflag,
    Savings,
}

impl Attribute {
    pub const ALL: [Attribute; 7] = [
        Attribute::Sex,
        Attribute::Age,
        Attribute::Religion,
        Attribute::Caste,
        Attribute::Education,
        Attribute::Workflag,
        Attribute::Savings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Sex => "sex",
            Attribute::Age => "age",
            Attribute::Religion => "religion",
            Attribute::Caste => "caste",
            Attribute::Education => "education",
            Attribute::Workflag => "workflag",
            Attribute::Savings => "savings",
        }
    }

    /// Age and education are stored in years.
    pub fn is_numeric(self) -> bool {
        matches!(self, Attribute::Age | Attribute::Education)
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Attribute::Workflag | Attribute::Savings)
    }

    /// Category labels for categorical and binary attributes, indexed by code.
    pub fn categories(self) -> &'static [&'static str] {
        match self {
            Attribute::Sex => &["male", "female"],
            Attribute::Religion => &["Hinduism", "Islam", "Christianity"],
            Attribute::Caste => &["Scheduled Caste", "Scheduled Tribe", "OBC", "General"],
            Attribute::Workflag | Attribute::Savings => &["0", "1"],
            Attribute::Age | Attribute::Education => &[],
        }
    }

    /// Parses a raw CSV cell into the attribute's code. Empty means missing.
    pub fn parse_value(self, raw: &str) -> Result<Option<u32>> {
        let raw = raw.trim();
        if raw.is_empty() {
            return Ok(None);
        }
        let invalid = || Error::InvalidValue {
            attribute: self.name().to_owned(),
            value: raw.to_owned(),
        };
        let key = raw.to_ascii_lowercase().replace(['_', '-'], " ");
        let code = match self {
            Attribute::Age | Attribute::Education => key.parse::<u32>().map_err(|_| invalid())?,
            Attribute::Sex => match key.as_str() {
                "male" | "m" | "1" => 0,
                "female" | "f" | "2" => 1,
                _ => return Err(invalid()),
            },
            Attribute::Religion => match key.as_str() {
                "hinduism" | "hindu" | "1" => 0,
                "islam" | "muslim" | "2" => 1,
                "christianity" | "christian" | "3" => 2,
                _ => return Err(invalid()),
            },
            Attribute::Caste => match key.as_str() {
                "scheduled caste" | "sc" => 0,
                "scheduled tribe" | "st" => 1,
                "obc" | "other backward class" | "other backward caste" => 2,
                "general" => 3,
                _ => return Err(invalid()),
            },
            Attribute::Workflag | Attribute::Savings => match key.as_str() {
                "0" | "no" | "false" => 0,
                "1" | "yes" | "true" => 1,
                _ => return Err(invalid()),
            },
        };
        Ok(Some(code))
    }

    /// Canonical CSV text for a code.
    pub fn format_value(self, code: u32) -> String {
        if self.is_numeric() {
            code.to_string()
        } else {
            self.categories()[code as usize].to_owned()
        }
    }

    pub fn category_count(self) -> usize {
        self.categories().len()
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Attribute::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .or(match key.as_str() {
                "work" | "employment" => Some(Attribute::Workflag),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownAttribute(s.to_owned()))
    }
}

/// Integer bins given by inclusive upper edges; values above the last edge
/// fall in a final open bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bins {
    pub upper_edges: Vec<u32>,
}

impl Bins {
    pub fn new(mut upper_edges: Vec<u32>) -> Self {
        upper_edges.sort_unstable();
        upper_edges.dedup();
        Self { upper_edges }
    }

    /// 18–30, 31–40, 41–50, 51–64, over 64.
    pub fn default_age() -> Self {
        Self::new(vec![30, 40, 50, 64])
    }

    /// none, 1–9, 10–13, 14 and more years.
    pub fn default_education() -> Self {
        Self::new(vec![0, 9, 13])
    }

    pub fn bin(&self, value: u32) -> u32 {
        self.upper_edges.partition_point(|&edge| edge < value) as u32
    }

    pub fn bin_count(&self) -> usize {
        self.upper_edges.len() + 1
    }

    pub fn label(&self, bin: u32) -> String {
        let b = bin as usize;
        let lo = if b == 0 {
            None
        } else {
            Some(self.upper_edges[b - 1] + 1)
        };
        match (lo, self.upper_edges.get(b)) {
            (None, Some(hi)) => format!("<={hi}"),
            (Some(lo), Some(hi)) if lo == *hi => format!("{lo}"),
            (Some(lo), Some(hi)) => format!("{lo}-{hi}"),
            (Some(lo), None) => format!(">={lo}"),
            (None, None) => "all".to_owned(),
        }
    }
}

/// One node's covariates; `None` marks a missing value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeAttributes {
    values: [Option<u32>; 7],
}

impl NodeAttributes {
    pub fn missing() -> Self {
        Self::default()
    }

    pub fn get(&self, attr: Attribute) -> Option<u32> {
        self.values[attr as usize]
    }

    pub fn set(&mut self, attr: Attribute, code: Option<u32>) {
        if let Some(c) = code {
            debug_assert!(attr.is_numeric() || (c as usize) < attr.category_count());
        }
        self.values[attr as usize] = code;
    }

    pub fn with(mut self, attr: Attribute, code: u32) -> Self {
        self.set(attr, Some(code));
        self
    }

    pub fn is_all_missing(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }
}

/// Covariates indexed identically to the graph's nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeTable {
    rows: Vec<NodeAttributes>,
}

impl AttributeTable {
    pub fn new(rows: Vec<NodeAttributes>) -> Self {
        Self { rows }
    }

    pub fn all_missing(n: usize) -> Self {
        Self {
            rows: vec![NodeAttributes::missing(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &NodeAttributes {
        &self.rows[i]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut NodeAttributes {
        &mut self.rows[i]
    }

    pub fn get(&self, i: usize, attr: Attribute) -> Option<u32> {
        self.rows[i].get(attr)
    }

    /// Codes of one attribute for every node, optionally binned.
    pub fn labels(&self, attr: Attribute, bins: Option<&Bins>) -> Vec<Option<u32>> {
        self.rows
            .iter()
            .map(|r| {
                r.get(attr).map(|v| match bins {
                    Some(b) if attr.is_numeric() => b.bin(v),
                    _ => v,
                })
            })
            .collect()
    }

    /// Rows of the given node indices, in order.
    pub fn select(&self, nodes: &[usize]) -> AttributeTable {
        AttributeTable {
            rows: nodes.iter().map(|&i| self.rows[i]).collect(),
        }
    }

    pub fn observed_count(&self, attr: Attribute) -> usize {
        self.rows.iter().filter(|r| r.get(attr).is_some()).count()
    }
}

/// True exactly where every attribute in `attrs` is present.
pub fn complete_case_mask(table: &AttributeTable, attrs: &[Attribute]) -> Result<Vec<bool>> {
    if attrs.is_empty() {
        return Err(Error::Config(
            "complete-case mask needs at least one attribute".into(),
        ));
    }
    Ok(table
        .rows
        .iter()
        .map(|r| attrs.iter().all(|&a| r.get(a).is_some()))
        .collect())
}

/// [`complete_case_mask`] with attribute names.
pub fn complete_case_mask_by_name(table: &AttributeTable, names: &[&str]) -> Result<Vec<bool>> {
    let attrs = names
        .iter()
        .map(|n| n.parse())
        .collect::<Result<Vec<Attribute>>>()?;
    complete_case_mask(table, &attrs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_categories_and_codes() {
        assert_eq!(Attribute::Caste.parse_value("OBC").unwrap(), Some(2));
        assert_eq!(
            Attribute::Caste.parse_value("scheduled_tribe").unwrap(),
            Some(1)
        );
        assert_eq!(Attribute::Sex.parse_value("Female").unwrap(), Some(1));
        assert_eq!(Attribute::Age.parse_value(" 42 ").unwrap(), Some(42));
        assert_eq!(Attribute::Savings.parse_value("").unwrap(), None);
        assert!(Attribute::Age.parse_value("-3").is_err());
        assert!(Attribute::Religion.parse_value("Jainism").is_err());
    }

    #[test]
    fn format_round_trips() {
        for attr in Attribute::ALL {
            let codes: Vec<u32> = if attr.is_numeric() {
                vec![0, 17, 65]
            } else {
                (0..attr.category_count() as u32).collect()
            };
            for c in codes {
                assert_eq!(attr.parse_value(&attr.format_value(c)).unwrap(), Some(c));
            }
        }
    }

    #[test]
    fn attribute_names() {
        assert_eq!("Caste".parse::<Attribute>().unwrap(), Attribute::Caste);
        assert!(matches!(
            "income".parse::<Attribute>(),
            Err(Error::UnknownAttribute(_))
        ));
    }

    #[test]
    fn default_bins() {
        let age = Bins::default_age();
        let got: Vec<u32> = [18, 30, 31, 40, 41, 50, 51, 64, 65, 90]
            .iter()
            .map(|&v| age.bin(v))
            .collect();
        assert_eq!(got, vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
        let edu = Bins::default_education();
        let got: Vec<u32> = [0, 1, 9, 10, 13, 14, 15]
            .iter()
            .map(|&v| edu.bin(v))
            .collect();
        assert_eq!(got, vec![0, 1, 1, 2, 2, 3, 3]);
        assert_eq!(age.label(0), "<=30");
        assert_eq!(age.label(1), "31-40");
        assert_eq!(age.label(4), ">=65");
        assert_eq!(edu.label(0), "<=0");
    }

    #[test]
    fn complete_cases() {
        let full = NodeAttributes::missing()
            .with(Attribute::Sex, 0)
            .with(Attribute::Savings, 1);
        let no_savings = NodeAttributes::missing().with(Attribute::Sex, 1);
        let t = AttributeTable::new(vec![full, no_savings, NodeAttributes::missing()]);
        assert_eq!(
            complete_case_mask(&t, &[Attribute::Sex]).unwrap(),
            vec![true, true, false]
        );
        assert_eq!(
            complete_case_mask_by_name(&t, &["sex", "savings"]).unwrap(),
            vec![true, false, false]
        );
        assert!(complete_case_mask_by_name(&t, &["height"]).is_err());
        let all = AttributeTable::new(vec![full; 3]);
        assert_eq!(
            complete_case_mask(&all, &[Attribute::Sex, Attribute::Savings]).unwrap(),
            vec![true; 3]
        );
    }
}
