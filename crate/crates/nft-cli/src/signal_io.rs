//! Text serialization of sampled signals for the transform subcommands.
//!
//! Format: one header line carrying the exact grid, then one `re<TAB>im`
//! row per sample:
//!
//! ```text
//! # time-signal start=-3.2e1 end=3.2e1 len=2048
//! 1.234e-3    -5.678e-4
//! ...
//! ```

use std::io::{BufRead, Write};

use num_complex::Complex64;

use nft::{SpectralGrid, SpectralSignal, TimeGrid, TimeSignal};

use crate::experiment::RunError;

fn parse_header(line: &str, tag: &str) -> Result<(f64, f64, usize), RunError> {
    let bad = |m: &str| RunError::Validation(format!("signal file: {m}"));
    let rest = line
        .strip_prefix('#')
        .ok_or_else(|| bad("missing header"))?
        .trim();
    let mut start = None;
    let mut end = None;
    let mut len = None;
    let mut kind = None;
    for (i, tok) in rest.split_whitespace().enumerate() {
        if i == 0 {
            kind = Some(tok.to_string());
            continue;
        }
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| bad(&format!("bad header token {tok}")))?;
        match k {
            "start" => start = v.parse().ok(),
            "end" => end = v.parse().ok(),
            "len" => len = v.parse().ok(),
            _ => return Err(bad(&format!("unknown header field {k}"))),
        }
    }
    if kind.as_deref() != Some(tag) {
        return Err(bad(&format!(
            "expected a {tag} header, found {}",
            kind.as_deref().unwrap_or("nothing")
        )));
    }
    match (start, end, len) {
        (Some(s), Some(e), Some(l)) => Ok((s, e, l)),
        _ => Err(bad("header must carry start=, end=, len=")),
    }
}

fn read_samples(
    lines: impl Iterator<Item = std::io::Result<String>>,
) -> Result<Vec<Complex64>, RunError> {
    let mut out = Vec::new();
    for line in lines {
        let line = line.map_err(|e| RunError::Validation(format!("read failure: {e}")))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut cols = t.split_whitespace();
        let re: f64 = cols
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| RunError::Validation(format!("bad sample row: {t}")))?;
        let im: f64 = cols
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| RunError::Validation(format!("bad sample row: {t}")))?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

pub fn write_time_signal(signal: &TimeSignal, mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "# time-signal start={:.17e} end={:.17e} len={}",
        signal.grid.start(),
        signal.grid.end(),
        signal.grid.len()
    )?;
    for s in &signal.samples {
        writeln!(out, "{:.17e}\t{:.17e}", s.re, s.im)?;
    }
    Ok(())
}

pub fn read_time_signal(mut input: impl BufRead) -> Result<TimeSignal, RunError> {
    let mut header = String::new();
    input
        .read_line(&mut header)
        .map_err(|e| RunError::Validation(format!("read failure: {e}")))?;
    let (start, end, len) = parse_header(&header, "time-signal")?;
    let grid = TimeGrid::new(start, end, len).map_err(|e| RunError::Validation(e.to_string()))?;
    let samples = read_samples(input.lines())?;
    TimeSignal::new(grid, samples).map_err(|e| RunError::Validation(e.to_string()))
}

pub fn write_spectral_signal(signal: &SpectralSignal, mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "# spectral-signal start={:.17e} end={:.17e} len={}",
        signal.grid.start(),
        signal.grid.end(),
        signal.grid.len()
    )?;
    for s in &signal.samples {
        writeln!(out, "{:.17e}\t{:.17e}", s.re, s.im)?;
    }
    Ok(())
}

pub fn read_spectral_signal(mut input: impl BufRead) -> Result<SpectralSignal, RunError> {
    let mut header = String::new();
    input
        .read_line(&mut header)
        .map_err(|e| RunError::Validation(format!("read failure: {e}")))?;
    let (start, end, len) = parse_header(&header, "spectral-signal")?;
    let grid =
        SpectralGrid::new(start, end, len).map_err(|e| RunError::Validation(e.to_string()))?;
    let samples = read_samples(input.lines())?;
    SpectralSignal::new(grid, samples).map_err(|e| RunError::Validation(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_signal_round_trip_is_exact() {
        let grid = TimeGrid::new(-1.5, 2.5, 8).unwrap();
        let sig = TimeSignal::from_fn(grid, |t| Complex64::new(t.sin(), t.cos() / 3.0));
        let mut buf = Vec::new();
        write_time_signal(&sig, &mut buf).unwrap();
        let back = read_time_signal(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, sig);
    }

    #[test]
    fn spectral_header_mismatch_rejected() {
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let sig = TimeSignal::zeros(grid);
        let mut buf = Vec::new();
        write_time_signal(&sig, &mut buf).unwrap();
        assert!(read_spectral_signal(std::io::Cursor::new(buf)).is_err());
    }
}
