//! Tabular output and the pass/fail summary shared by all subcommands.

use std::io::Write;
use std::path::Path;

/// One asserted comparison `value` against `bound`.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when value ≤ bound.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, margin: bound - value, pass: value <= bound }
    }

    /// Passes when value ≥ bound.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, margin: value - bound, pass: value >= bound }
    }
}

/// Data table, checks and notes produced by one subcommand.
#[derive(Debug, Default)]
pub struct Report {
    pub anchor: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

/// Shortest round-trip formatting, so repeated runs are byte-identical;
/// exponent notation for very small or large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

impl Report {
    pub fn new(anchor: &'static str, header: &[&'static str]) -> Self {
        Self { anchor, header: header.to_vec(), ..Self::default() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn table_csv(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }

    fn summary_csv(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "value", "bound", "margin", "pass"])?;
        for c in &self.checks {
            w.write_record([c.name.clone(), num(c.value), num(c.bound), num(c.margin), c.pass.to_string()])?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }

    /// Writes the table to `out` (or stdout after the summary) and the summary to
    /// stdout and, if given, to `summary`.
    pub fn emit(&self, out: Option<&Path>, summary: Option<&Path>) -> std::io::Result<()> {
        let table = self.table_csv().map_err(std::io::Error::other)?;
        let sum = self.summary_csv().map_err(std::io::Error::other)?;
        let stdout = std::io::stdout();
        let mut o = stdout.lock();
        writeln!(o, "# verifies: {}", self.anchor)?;
        for n in &self.notes {
            writeln!(o, "# {n}")?;
        }
        o.write_all(&sum)?;
        if let Some(p) = summary {
            std::fs::write(p, &sum)?;
        }
        match out {
            Some(p) => std::fs::write(p, &table)?,
            None => {
                writeln!(o)?;
                o.write_all(&table)?;
            }
        }
        o.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_margins() {
        let c = Check::at_most("x", 1.0, 3.0);
        assert!(c.pass && c.margin == 2.0);
        let c = Check::at_least("y", 1.0, 3.0);
        assert!(!c.pass && c.margin == -2.0);
    }

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(1e-8), "1e-8");
        assert_eq!(num(-2.5e-12), "-2.5e-12");
        assert_eq!(num(0.0), "0");
    }

    #[test]
    fn csv_quoting() {
        let mut r = Report::new("anchor", &["a", "b"]);
        r.row(vec!["1".into(), "x,y".into()]);
        r.checks.push(Check::at_most("c", 0.5, 1.0));
        let t = String::from_utf8(r.table_csv().unwrap()).unwrap();
        assert_eq!(t, "a,b\n1,\"x,y\"\n");
        let s = String::from_utf8(r.summary_csv().unwrap()).unwrap();
        assert_eq!(s, "check,value,bound,margin,pass\nc,0.5,1,0.5,true\n");
        assert!(r.passed());
    }
}
