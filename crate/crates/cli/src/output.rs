//! CSV emitters. Every number goes through [`fmt_num`] so output files are
//! stable across platforms.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::{CliError, Result};

/// `x` rounded to 12 significant digits, printed in shortest form.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

/// A CSV file under construction.
pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(dir: &Path, stem: &str, header: &[&str]) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(format!("{stem}.csv"));
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        writer.write_record(header)?;
        Ok(Self { path, writer })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn nums(&mut self, values: &[f64]) -> Result<()> {
        self.writer.write_record(values.iter().map(|&v| fmt_num(v)))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// Writes one `key=value` summary line.
pub(crate) fn summary(out: &mut dyn Write, pairs: &[(&str, String)]) -> Result<()> {
    let line: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(out, "{}", line.join(" ")).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.07 + 1e-17), "0.07");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(-123456.7890123456), "-123456.789012");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }

    #[test]
    fn rounding_is_idempotent() {
        for x in [0.25492076972556504, 1e-9 / 7.0, 12345.678901234567] {
            let once = fmt_num(x);
            assert_eq!(fmt_num(once.parse().unwrap()), once);
        }
    }
}
