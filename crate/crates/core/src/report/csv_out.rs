use crate::stats::SummaryRow;
use crate::{Error, Result};

/// Shortest round-trip rendering; identical values always print the same.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

/// In-memory CSV file.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row<I, S>(&mut self, record: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(record)?;
        Ok(())
    }

    pub fn finish(self) -> Result<String> {
        let bytes = self
            .writer
            .into_inner()
            .map_err(|e| Error::io("csv buffer", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV built from UTF-8 strings"))
    }
}

/// Table of summary rows, one per named variable.
pub fn summary_table(rows: &[(&str, Option<SummaryRow>)]) -> Result<String> {
    let mut t = Table::new(std::iter::once("variable").chain(SummaryRow::HEADER))?;
    for (name, row) in rows {
        match row {
            Some(r) => t.row(
                std::iter::once(name.to_string()).chain(r.values().iter().map(|v| fmt_f64(*v))),
            )?,
            None => t.row(
                std::iter::once(name.to_string()).chain(std::iter::repeat_n(String::new(), 8)),
            )?,
        }
    }
    t.finish()
}

pub fn key_values(rows: &[(&str, String)]) -> Result<String> {
    let mut t = Table::new(["key", "value"])?;
    for (k, v) in rows {
        t.row([*k, v.as_str()])?;
    }
    t.finish()
}

pub fn histogram_table(bins: &[crate::stats::HistogramBin]) -> Result<String> {
    let mut t = Table::new(["bin", "count"])?;
    for b in bins {
        t.row([fmt_f64(b.lower), b.count.to_string()])?;
    }
    t.finish()
}
