use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pac_core::bounds::normal_approximation_fer;
use pac_core::channel::{run_point, simulate_frames, ChannelConfig, StopRule};
use pac_core::construction::{
    beta_expansion, ga_density_evolution, genetic_construct_with, rm_rule, CodeTemplate, GaConfig,
    DEFAULT_BETA, PROGRESS_CSV_HEADER,
};
use pac_core::fano::FanoConfig;
use pac_core::list::{distance_spectrum, ListConfig};
use pac_core::{CodeSpec, ConvSpec, FrozenSet, PacError};

use crate::config::ConfigFile;
use crate::{
    plot, BoundArgs, Cli, Command, ConstructArgs, DecoderArgs, GridArgs, Method, SimulateArgs, SpectrumArgs,
    StepsArgs,
};

pub const SIMULATE_CSV_HEADER: &str = "ebn0_db,frames,frame_errors,fer,bit_errors,ber,avg_steps,budget_exceeded,stop";
pub const STEPS_CSV_HEADER: &str = "ebn0_db,avg_steps_base,avg_steps_simplified,saving_pct,divergent_frames";

const DEFAULT_DESIGN_SNR_DB: f64 = 2.0;
const DEFAULT_STEPS_FRAMES: u64 = 10_000;
const STEPS_CHUNK: u64 = 4096;

pub fn run(cli: Cli) -> Result<()> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    if let Some(w) = cfg.resolve_opt(cli.workers, "workers")? {
        if w == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global().context("starting worker pool")?;
    }
    match cli.command {
        Command::Construct(a) => construct(&a, &cfg),
        Command::Simulate(a) => simulate(&a, &cfg),
        Command::Steps(a) => steps(&a, &cfg),
        Command::Bound(a) => bound(&a, &cfg),
        Command::Spectrum(a) => spectrum(&a, &cfg),
        Command::Plot(a) => plot::run(&a),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_spec(path: &Path) -> Result<CodeSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.parse::<CodeSpec>().with_context(|| format!("parsing {}", path.display()))
}

/// Inclusive SNR grid, rounded to suppress accumulated float noise.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
        bail!("SNR grid bounds must be finite");
    }
    if step <= 0.0 {
        bail!("--snr-step must be positive");
    }
    if stop < start {
        bail!("--snr-stop ({stop}) is below --snr-start ({start})");
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

fn grid(g: &GridArgs, cfg: &ConfigFile) -> Result<Vec<f64>> {
    snr_grid(
        cfg.resolve(g.snr_start, "snr-start", 0.0)?,
        cfg.resolve(g.snr_stop, "snr-stop", 3.0)?,
        cfg.resolve(g.snr_step, "snr-step", 0.5)?,
    )
}

fn fano_config(d: &DecoderArgs, cfg: &ConfigFile, big_n: usize) -> Result<FanoConfig> {
    let base = FanoConfig::for_length(big_n);
    let fano = FanoConfig {
        delta: cfg.resolve(d.delta, "delta", base.delta)?,
        max_steps: cfg.resolve(d.max_steps, "max-steps", base.max_steps)?,
        use_shortcuts: !cfg.switch(d.no_shortcuts, "no-shortcuts")?,
    };
    fano.validate()?;
    Ok(fano)
}

fn conv_for(a: &ConstructArgs, cfg: &ConfigFile, systematic: bool) -> Result<ConvSpec> {
    let forward = cfg.resolve_opt(a.conv_forward.clone(), "conv-forward")?;
    let feedback = cfg.resolve_opt(a.conv_feedback.clone(), "conv-feedback")?;
    Ok(match (systematic, forward, feedback) {
        (false, None, None) => ConvSpec::default_feedforward(),
        (false, Some(f), None) => ConvSpec::feedforward_octal(&f)?,
        (false, _, Some(_)) => bail!("--conv-feedback applies to systematic codes only"),
        (true, None, None) => ConvSpec::default_recursive(),
        (true, Some(f), Some(b)) => ConvSpec::recursive_octal(&f, &b)?,
        (true, _, _) => bail!("systematic codes need both --conv-forward and --conv-feedback, or neither"),
    })
}

fn construct(a: &ConstructArgs, cfg: &ConfigFile) -> Result<()> {
    let method = cfg.resolve(a.method, "method", Method::Rm)?;
    let systematic = cfg.switch(a.systematic, "systematic")?;
    let simplified = cfg.switch(a.simplified, "simplified")?;
    let conv = conv_for(a, cfg, systematic)?;
    let (big_n, k) = (a.big_n, a.k);
    let frozen: FrozenSet = match method {
        Method::Rm => rm_rule(big_n, k)?,
        Method::Gade => ga_density_evolution(big_n, k, cfg.resolve(a.design_snr, "design-snr", DEFAULT_DESIGN_SNR_DB)?)?,
        Method::Beta => beta_expansion(big_n, k, cfg.resolve(a.beta, "beta", DEFAULT_BETA)?)?,
        Method::Genetic => {
            let d = GaConfig::default();
            let ga = GaConfig {
                population_size: cfg.resolve(a.population, "population", d.population_size)?,
                it_max: cfg.resolve(a.iters, "iters", d.it_max)?,
                crossover_count: cfg.resolve(a.crossovers, "crossovers", d.crossover_count)?,
                mutation_swaps: cfg.resolve(a.mutation_swaps, "mutation-swaps", d.mutation_swaps)?,
                spectrum_list_size: cfg.resolve(a.spectrum_list, "spectrum-list", d.spectrum_list_size)?,
                seed: cfg.seed(a.seed)?,
                ..d
            };
            genetic(big_n, k, &ga, &CodeTemplate { conv: conv.clone(), systematic }, a)?
        }
    };
    let spec = CodeSpec::new(frozen, conv, systematic, simplified)?;
    let mut out = open_output(a.output.as_deref())?;
    out.write_all(spec.to_spec_string().as_bytes())?;
    out.flush()?;
    Ok(())
}

fn genetic(big_n: usize, k: usize, ga: &GaConfig, template: &CodeTemplate, a: &ConstructArgs) -> Result<FrozenSet> {
    let log_path: Option<PathBuf> = a.log.clone().or_else(|| a.output.as_ref().map(|o| o.with_extension("ga.csv")));
    let mut log: Box<dyn Write> = match &log_path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stderr()),
    };
    writeln!(log, "{PROGRESS_CSV_HEADER}")?;
    let mut write_err = None;
    let result = genetic_construct_with(big_n, k, ga, template, |r| {
        let row = writeln!(log, "{},{},{},{}", r.iter, r.best_dmin, r.best_admin, r.population_size);
        if let Err(e) = row.and_then(|_| log.flush()) {
            write_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(e).context("writing the progress log");
    }
    let best = result.best();
    if let Some(f) = &best.fitness {
        let head: Vec<String> = f.entries.iter().take(3).map(|(d, a)| format!("{d}({a})")).collect();
        eprintln!("best distance profile: {}", head.join(", "));
    }
    Ok(best.frozen.clone())
}

fn simulate(a: &SimulateArgs, cfg: &ConfigFile) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let grid = grid(&a.grid, cfg)?;
    let fano = fano_config(&a.decoder, cfg, spec.big_n())?;
    let d = StopRule::default();
    let stop = StopRule {
        min_frame_errors: cfg.resolve(a.min_errors, "min-errors", d.min_frame_errors)?,
        max_frames: cfg.resolve(a.max_frames, "max-frames", d.max_frames)?,
    };
    stop.validate()?;
    let seed = cfg.seed(a.seed)?;
    let mut out = open_output(a.output.as_deref())?;
    writeln!(out, "{SIMULATE_CSV_HEADER}")?;
    out.flush()?;
    for ebn0 in grid {
        let ch = ChannelConfig::for_spec(&spec, ebn0, seed)?;
        let r = run_point(&spec, &ch, &fano, &stop)?;
        let s = r.stats;
        if s.budget_exceeded > 0 {
            eprintln!("warning: {ebn0} dB: {} frames exceeded the step budget", s.budget_exceeded);
        }
        writeln!(
            out,
            "{},{},{},{:e},{},{:e},{:.3},{},{}",
            ebn0,
            s.frames,
            s.frame_errors,
            s.fer(),
            s.bit_errors,
            s.ber(),
            s.avg_steps(),
            s.budget_exceeded,
            r.stop.as_str()
        )?;
        out.flush()?;
    }
    Ok(())
}

fn steps(a: &StepsArgs, cfg: &ConfigFile) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let base = spec.with_simplified(false)?;
    let simp = spec.with_simplified(true)?;
    let grid = grid(&a.grid, cfg)?;
    let fano = fano_config(&a.decoder, cfg, spec.big_n())?;
    if !fano.use_shortcuts {
        bail!("the step comparison needs Rate-0/Rate-1 shortcuts enabled");
    }
    let frames = cfg.resolve(a.frames, "frames", DEFAULT_STEPS_FRAMES)?;
    if frames == 0 {
        bail!("--frames must be positive");
    }
    let seed = cfg.seed(a.seed)?;
    let mut out = open_output(a.output.as_deref())?;
    writeln!(out, "{STEPS_CSV_HEADER}")?;
    out.flush()?;
    for ebn0 in grid {
        let ch = ChannelConfig::for_spec(&spec, ebn0, seed)?;
        let (mut steps_base, mut steps_simp, mut divergent) = (0u64, 0u64, 0u64);
        let mut first = 0;
        while first < frames {
            let count = STEPS_CHUNK.min(frames - first);
            let fa = simulate_frames(&base, &ch, &fano, first, count)?;
            let fb = simulate_frames(&simp, &ch, &fano, first, count)?;
            for (x, y) in fa.iter().zip(&fb) {
                steps_base += x.steps;
                steps_simp += y.steps;
                divergent += u64::from(x.msg_hat != y.msg_hat);
            }
            first += count;
        }
        let (ab, asimp) = (steps_base as f64 / frames as f64, steps_simp as f64 / frames as f64);
        writeln!(out, "{},{:.3},{:.3},{:.3},{}", ebn0, ab, asimp, 100.0 * (1.0 - asimp / ab), divergent)?;
        out.flush()?;
    }
    Ok(())
}

fn bound(a: &BoundArgs, cfg: &ConfigFile) -> Result<()> {
    let grid = grid(&a.grid, cfg)?;
    let mut out = open_output(a.output.as_deref())?;
    writeln!(out, "ebn0_db,fer")?;
    let mut failed = 0;
    for ebn0 in grid {
        match normal_approximation_fer(a.big_n, a.k, ebn0) {
            Ok(fer) => writeln!(out, "{ebn0},{fer:e}")?,
            Err(e @ PacError::Numeric(_)) => {
                eprintln!("warning: {ebn0} dB: {e}");
                writeln!(out, "{ebn0},nan")?;
                failed += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.flush()?;
    if failed > 0 {
        return Err(PacError::Numeric(format!("{failed} grid points failed")).into());
    }
    Ok(())
}

fn spectrum(a: &SpectrumArgs, cfg: &ConfigFile) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let list_size = cfg.resolve(a.list_size, "list-size", GaConfig::default().spectrum_list_size)?;
    let s = distance_spectrum(&spec, &ListConfig::new(list_size)?)?;
    let mut out = open_output(a.output.as_deref())?;
    out.write_all(s.to_report().as_bytes())?;
    out.flush()?;
    Ok(())
}
