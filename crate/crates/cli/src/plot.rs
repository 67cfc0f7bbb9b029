//! gnuplot scripts over the result CSVs.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::{PlotArgs, PlotKind};

fn column_of(path: &Path, name: &str) -> Result<usize> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header = text.lines().next().unwrap_or_default();
    match header.split(',').position(|c| c.trim() == name) {
        Some(i) => Ok(i + 1),
        None => bail!("{} has no \"{name}\" column", path.display()),
    }
}

fn quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', "''"))
}

pub fn script(inputs: &[&Path], kind: PlotKind, image: &Path) -> Result<String> {
    let (column, label, log) = match kind {
        PlotKind::Fer => ("fer", "FER", true),
        PlotKind::Ber => ("ber", "BER", true),
        PlotKind::Steps => ("saving_pct", "step saving (%)", false),
    };
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,650\n");
    s.push_str(&format!("set output {}\n", quote(image)));
    s.push_str("set grid\nset key bottom left\n");
    s.push_str("set xlabel 'Eb/N0 (dB)'\n");
    s.push_str(&format!("set ylabel '{label}'\n"));
    if log {
        s.push_str("set logscale y\nset format y '10^{%L}'\n");
    }
    let mut series = Vec::new();
    for path in inputs {
        let col = column_of(path, column)?;
        let title = path.file_stem().map(|t| t.to_string_lossy().into_owned()).unwrap_or_default();
        series.push(format!("{} using 1:{col} skip 1 with linespoints title '{}'", quote(path), title.replace('\'', "''")));
    }
    s.push_str("plot ");
    s.push_str(&series.join(", \\\n     "));
    s.push('\n');
    Ok(s)
}

pub fn run(a: &PlotArgs) -> Result<()> {
    let inputs: Vec<&Path> = a.inputs.iter().map(|p| p.as_path()).collect();
    let text = script(&inputs, a.kind, &a.image)?;
    match &a.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
