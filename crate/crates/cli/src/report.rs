//! CSV and JSON emitters. Floats are written as `{:.12e}`, rows end in LF.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use qwdecay_core::certify::{BoundCheck, ShellNorm};
use qwdecay_core::spectrum::{EssentialArcs, SpectrumResult};
use serde::Serialize;

fn float(x: f64) -> String {
    format!("{x:.12e}")
}

fn writer(path: &Path) -> std::io::Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?)))
}

fn io(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

/// `gap_mass[i]` is `(d(lambda_i), core mass)`.
pub fn write_spectrum(path: &Path, spectrum: &SpectrumResult, gap_mass: &[(f64, f64)]) -> std::io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["index", "re_lambda", "im_lambda", "arg_lambda", "residual", "gap_distance", "core_mass"])
        .map_err(io)?;
    for (i, (z, (gap, mass))) in spectrum.eigenvalues.iter().zip(gap_mass).enumerate() {
        w.write_record([
            i.to_string(),
            float(z.re),
            float(z.im),
            float(z.arg()),
            float(spectrum.residuals[i]),
            float(*gap),
            float(*mass),
        ])
        .map_err(io)?;
    }
    w.flush()
}

pub fn write_arcs(path: &Path, arcs: &EssentialArcs) -> std::io::Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<String> = (1..=arcs.grid.dim).map(|j| format!("k_{j}")).collect();
    header.extend(["branch", "re_mu", "im_mu"].map(String::from));
    w.write_record(&header).map_err(io)?;
    for s in &arcs.samples {
        let mut row: Vec<String> = s.k.iter().copied().map(float).collect();
        row.extend([s.branch.to_string(), float(s.mu[0]), float(s.mu[1])]);
        w.write_record(&row).map_err(io)?;
    }
    w.flush()
}

pub fn write_shells(path: &Path, shells: &[ShellNorm]) -> std::io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["n", "R_lo", "R_hi", "shell_norm", "log_shell_norm"]).map_err(io)?;
    for s in shells {
        w.write_record([s.n.to_string(), float(s.r_lo), float(s.r_hi), float(s.norm), float(s.norm.ln())])
            .map_err(io)?;
    }
    w.flush()
}

pub fn write_bounds(path: &Path, rows: &[BoundCheck]) -> std::io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["check", "delta", "N_or_R", "measured", "bound", "pass"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.check.name().to_string(),
            float(r.delta),
            float(r.parameter),
            float(r.measured),
            float(r.bound),
            r.passed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()
}
