use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::config::Format;
use crate::failure::Failure;

/// Round-trip-safe rendering with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    writer: csv::Writer<Box<dyn Write>>,
}

impl Table {
    pub fn create(path: Option<&Path>, format: Format, header: &[&str]) -> Result<Self, Failure> {
        let sink: Box<dyn Write> = match path {
            Some(p) => {
                Box::new(BufWriter::new(File::create(p).map_err(|e| {
                    Failure::io(format!("cannot create {}: {e}", p.display()))
                })?))
            }
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let delimiter = match format {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        };
        let mut writer = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(sink);
        writer.write_record(header).map_err(Failure::io)?;
        Ok(Table { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), Failure>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(Failure::io)
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        self.writer.flush().map_err(Failure::io)
    }
}
