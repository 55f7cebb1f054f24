//! CSV output of sweeps.

use std::io::{self, Write};

use crate::config::SweepVariable;
use crate::harness::{Summary, TrialRecord};

pub const RECORD_HEADER: &str = "sweep_var,sweep_value,solver,trial,admitted,total_power_mw,est_int_pu1_mw,est_int_pu2_mw,true_int_pu1_mw,true_int_pu2_mw";
pub const SUMMARY_HEADER: &str = "sweep_var,sweep_value,solver,mean_admitted,stderr";

/// Formats `x` with 9 significant digits, like C's `%.9g`.
pub fn sig9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exponent) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    } else {
        let decimals = (DIGITS - 1 - exponent) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes per-trial records.
pub struct RecordWriter<W: Write> {
    out: W,
    variable: SweepVariable,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut out: W, variable: SweepVariable) -> io::Result<Self> {
        writeln!(out, "{RECORD_HEADER}")?;
        Ok(Self { out, variable })
    }

    pub fn write(&mut self, r: &TrialRecord) -> io::Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{},{},{},{},{}",
            self.variable,
            sig9(r.sweep_value),
            r.solver,
            r.trial,
            r.admitted,
            sig9(r.total_power_mw),
            sig9(r.est_interference_mw[0]),
            sig9(r.est_interference_mw[1]),
            sig9(r.true_interference_mw[0]),
            sig9(r.true_interference_mw[1]),
        )
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Writes the summary table.
pub fn write_summary<W: Write>(mut out: W, variable: SweepVariable, summary: &Summary) -> io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for cell in summary.cells() {
        writeln!(
            out,
            "{},{},{},{},{}",
            variable,
            sig9(cell.sweep_value),
            cell.solver,
            sig9(cell.mean_admitted),
            sig9(cell.stderr)
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(128.0), "128");
        assert_eq!(sig9(-30.0), "-30");
        assert_eq!(sig9(0.1), "0.1");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(2.0 / 3.0 * 1e-7), "6.66666667e-08");
        assert_eq!(sig9(1e6), "1000000");
        assert_eq!(sig9(1e9), "1e+09");
        assert_eq!(sig9(123456789012.0), "1.23456789e+11");
        assert_eq!(sig9(0.00012345678912), "0.000123456789");
        assert_eq!(sig9(9.999999999), "10");
        assert_eq!(sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn round_trip_precision() {
        for x in [std::f64::consts::PI, 1.234e-12, 6.02e23, 0.5] {
            let y: f64 = sig9(x).parse().unwrap();
            assert!((x - y).abs() <= 5e-9 * x.abs());
        }
    }
}
