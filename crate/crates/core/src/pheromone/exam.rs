use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_TABLE: &str = include_str!("../../data/exam_table.tsv");

/// Examination probabilities of the single browsing model, indexed by
/// (result position, position of the last previous click; 0 = none).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExaminationTable {
    probs: BTreeMap<(u32, u32), f64>,
}

impl ExaminationTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The bundled approximate table covering positions 1 to 100.
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_TABLE.as_bytes()).expect("bundled examination table is valid")
    }

    pub fn insert(&mut self, position: u32, last_clicked: u32, p_exam: f64) -> Result<()> {
        if position == 0 || last_clicked >= position {
            return Err(Error::InvalidParameter(format!(
                "examination entry ({position}, {last_clicked}) needs 0 <= last_clicked < position"
            )));
        }
        if !(p_exam > 0.0 && p_exam <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "examination probability {p_exam} outside (0, 1]"
            )));
        }
        self.probs.insert((position, last_clicked), p_exam);
        Ok(())
    }

    pub fn get(&self, position: u32, last_clicked: u32) -> Option<f64> {
        self.probs.get(&(position, last_clicked)).copied()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Reads `position \t last_clicked \t p_exam` rows. Blank lines and
    /// `#` comments are ignored.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut table = Self::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(line_no, format!("expected 3 fields, found {}", fields.len())));
            }
            let position = fields[0]
                .trim()
                .parse::<u32>()
                .map_err(|e| Error::parse(line_no, format!("position: {e}")))?;
            let last = fields[1]
                .trim()
                .parse::<u32>()
                .map_err(|e| Error::parse(line_no, format!("last_clicked: {e}")))?;
            let p = fields[2]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(line_no, format!("p_exam: {e}")))?;
            table
                .insert(position, last, p)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (&(position, last), p) in &self.probs {
            writeln!(out, "{position}\t{last}\t{p}")?;
        }
        Ok(())
    }
}
