//! Report envelope and writers.

use crate::config::RunConfig;
use crate::CliError;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Numeric series for CSV output: one header row, one record per row.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Series {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Series {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Shortest round-trip formatting, so CSV matches the JSON values.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: String,
    pub config: RunConfig,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub result: serde_json::Value,
    #[serde(skip)]
    pub series: Option<Series>,
}

impl Report {
    pub fn new(config: &RunConfig, result: impl Serialize) -> Result<Self, CliError> {
        Ok(Self {
            tool: "lksmult",
            version: crate::version(),
            config: config.clone(),
            tolerances: BTreeMap::new(),
            result: serde_json::to_value(result).map_err(|e| CliError::Io(e.to_string()))?,
            series: None,
        })
    }

    pub fn tolerance(mut self, name: &'static str, value: f64) -> Self {
        self.tolerances.insert(name, value);
        self
    }

    pub fn with_series(mut self, s: Series) -> Self {
        self.series = Some(s);
        self
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// JSON to `config.out` or stdout; the series to `config.csv` when set.
    pub fn emit(&self) -> Result<(), CliError> {
        let json = self.to_json()?;
        match &self.config.out {
            Some(p) => write_file(p, &json)?,
            None => std::io::stdout().write_all(json.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
        }
        if let Some(p) = &self.config.csv {
            let s = self.series.as_ref().ok_or_else(|| CliError::Config("this command has no CSV series".into()))?;
            write_file(p, &s.to_csv()?)?;
        }
        Ok(())
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_fields() {
        let mut s = Series::new(&["name", "value"]);
        s.push(vec!["a,b".into(), num(0.1)]);
        s.push(vec!["say \"hi\"".into(), num(1e-20)]);
        assert_eq!(s.to_csv().unwrap(), "name,value\n\"a,b\",0.1\n\"say \"\"hi\"\"\",1e-20\n");
    }

    #[test]
    fn report_embeds_config_and_version() {
        let cfg = RunConfig::default();
        let r = Report::new(&cfg, serde_json::json!({"x": 1})).unwrap().tolerance("gap", 1e-6);
        let j = r.to_json().unwrap();
        assert!(j.contains("\"version\"") && j.contains("\"window\": 32") && j.contains("\"gap\": 1e-6"));
        assert!(!j.contains("\"out\""));
    }
}
