use std::path::Path;

use crate::error::{Error, Result};

/// Time series of named diagnostic channels, one row per output time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChannelTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ChannelTable {
    pub fn new(columns: Vec<String>) -> Self {
        ChannelTable {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Appends a row given as `(name, value)` pairs in header order.
    pub fn push_named(&mut self, row: &[(String, f64)]) {
        debug_assert!(row.iter().zip(&self.columns).all(|((a, _), b)| a == b));
        self.push(row.iter().map(|(_, v)| *v).collect());
    }

    pub fn has(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c == name)
    }

    /// Fails with every absent name listed.
    pub fn require(&self, names: &[&str]) -> Result<()> {
        let missing: Vec<String> = names
            .iter()
            .filter(|n| !self.has(n))
            .map(|n| n.to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingChannels(missing))
        }
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::MissingChannels(vec![name.to_owned()]))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.column("time")
    }

    /// Value of `name` in the first row.
    pub fn initial(&self, name: &str) -> Result<f64> {
        self.column(name)?
            .first()
            .copied()
            .ok_or_else(|| Error::MissingChannels(vec![format!("{name} (no rows)")]))
    }

    pub fn last_row(&self) -> Option<&[f64]> {
        self.rows.last().map(Vec::as_slice)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        self.write_into(&mut writer)?;
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        self.write_into(&mut writer)?;
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    fn write_into<W: std::io::Write>(&self, writer: &mut csv::Writer<W>) -> Result<()> {
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(|v| v.to_string()))?;
        }
        Ok(())
    }

    /// Reads a table written by [`ChannelTable::write_csv`].
    ///
    /// Cells that do not parse as numbers load as NaN, so a damaged column
    /// fails the checks that read it instead of the whole load.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let columns: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
        let mut table = ChannelTable::new(columns);
        for record in reader.records() {
            let record = record?;
            let row: Vec<f64> = record
                .iter()
                .map(|cell| cell.trim().parse().unwrap_or(f64::NAN))
                .collect();
            if row.len() != table.columns.len() {
                return Err(Error::SizeMismatch {
                    expected: table.columns.len(),
                    got: row.len(),
                });
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = ChannelTable::new(vec!["time".into(), "x".into()]);
        t.push(vec![0.0, 0.1 + 0.2]);
        t.push(vec![1e-3, f64::NAN]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        t.write_csv(&path).unwrap();
        let back = ChannelTable::read_csv(&path).unwrap();
        assert_eq!(back.columns(), t.columns());
        assert_eq!(back.column("x").unwrap()[0], 0.1 + 0.2);
        assert!(back.column("x").unwrap()[1].is_nan());
        assert_eq!(std::fs::read_to_string(&path).unwrap(), t.to_csv_string().unwrap());
    }

    #[test]
    fn missing_channels_are_named() {
        let t = ChannelTable::new(vec!["time".into()]);
        match t.require(&["time", "theta_l2", "u_l2"]) {
            Err(Error::MissingChannels(m)) => assert_eq!(m, vec!["theta_l2", "u_l2"]),
            other => panic!("{other:?}"),
        }
    }
}
