//! Frozen-set construction: Reed-Muller rule, Gaussian-approximation
//! density evolution, β-expansion, and a genetic search whose fitness is
//! the list-decoding estimate of the distance spectrum.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::sigma_for_ebn0;
use crate::error::{input_err, PacError, Result};
use crate::list::{compare_spectra, distance_spectrum, DistanceSpectrum, ListConfig};
use crate::model::{systematic_round_trip, CodeSpec, ConvSpec, FrozenSet};

/// Default β for the β-expansion.
pub const DEFAULT_BETA: f64 = 1.189_207_115_002_721; // 2^{1/4}

/// Design SNRs (Eb/N0, dB) of the density-evolution seeds.
pub const SEED_DESIGN_SNRS_DB: [f64; 3] = [1.0, 2.0, 3.0];

fn check_sizes(big_n: usize, k: usize) -> Result<()> {
    if !big_n.is_power_of_two() || big_n < 2 {
        return input_err(format!("N={big_n} is not a power of two >= 2"));
    }
    if k > big_n {
        return input_err(format!("K={k} exceeds N={big_n}"));
    }
    Ok(())
}

/// Freezes the `N − K` indices that come first under `less_reliable`.
fn freeze_least(big_n: usize, k: usize, score: impl Fn(usize) -> f64) -> Result<FrozenSet> {
    let mut order: Vec<usize> = (0..big_n).collect();
    order.sort_by(|&a, &b| score(a).total_cmp(&score(b)).then(a.cmp(&b)));
    FrozenSet::from_indices(big_n, &order[..big_n - k])
}

/// β-expansion score of index `i`: `Σ_j b_j β^j` over its binary digits.
pub fn beta_score(i: usize, beta: f64) -> f64 {
    (0..usize::BITS as i32).filter(|&j| (i >> j) & 1 == 1).map(|j| beta.powi(j)).sum()
}

pub fn beta_expansion(big_n: usize, k: usize, beta: f64) -> Result<FrozenSet> {
    check_sizes(big_n, k)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return input_err(format!("beta must be positive, got {beta}"));
    }
    freeze_least(big_n, k, |i| beta_score(i, beta))
}

/// Reed-Muller rule: freeze the rows of lowest weight `2^popcount(i)`,
/// lower β-expansion score first within a weight class.
pub fn rm_rule(big_n: usize, k: usize) -> Result<FrozenSet> {
    check_sizes(big_n, k)?;
    let mut order: Vec<usize> = (0..big_n).collect();
    order.sort_by(|&a, &b| {
        a.count_ones()
            .cmp(&b.count_ones())
            .then(beta_score(a, DEFAULT_BETA).total_cmp(&beta_score(b, DEFAULT_BETA)))
            .then(a.cmp(&b))
    });
    FrozenSet::from_indices(big_n, &order[..big_n - k])
}

const PHI_SWITCH: f64 = 10.0;

/// `ln φ(x)` for the Gaussian-approximation function φ.
fn ln_phi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < PHI_SWITCH {
        -0.4527 * x.powf(0.86) + 0.0218
    } else {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }
}

/// Solves `ln φ(x) = ln_y` by bisection (φ is decreasing).
fn phi_inv_ln(ln_y: f64) -> f64 {
    if ln_y >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while ln_phi(hi) > ln_y {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > ln_y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean of the degraded (check-node) channel.
fn ga_minus(m: f64) -> f64 {
    // 1 − (1 − φ)^2 = φ(2 − φ), kept in the log domain.
    let lp = ln_phi(m);
    phi_inv_ln(lp + (2.0 - lp.exp()).ln())
}

/// Per-index LLR means under the Gaussian approximation, natural order:
/// the most significant index bit is the first polarization step.
pub fn ga_means(big_n: usize, sigma: f64) -> Vec<f64> {
    let n = big_n.trailing_zeros();
    let m0 = 2.0 / (sigma * sigma);
    (0..big_n)
        .map(|i| {
            (0..n).rev().fold(m0, |m, j| if (i >> j) & 1 == 1 { 2.0 * m } else { ga_minus(m) })
        })
        .collect()
}

/// Density evolution under the Gaussian approximation at design Eb/N0
/// `design_snr_db` (rate K/N).
pub fn ga_density_evolution(big_n: usize, k: usize, design_snr_db: f64) -> Result<FrozenSet> {
    check_sizes(big_n, k)?;
    if !design_snr_db.is_finite() {
        return input_err("design SNR must be finite");
    }
    if k == 0 {
        return FrozenSet::from_mask(vec![true; big_n]);
    }
    let sigma = sigma_for_ebn0(design_snr_db, k as f64 / big_n as f64);
    let means = ga_means(big_n, sigma);
    freeze_least(big_n, k, |i| means[i])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub frozen: FrozenSet,
    /// `None` until evaluated.
    pub fitness: Option<DistanceSpectrum>,
    pub valid: bool,
}

impl Candidate {
    pub fn new(frozen: FrozenSet) -> Self {
        Self { frozen, fitness: None, valid: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub it_max: usize,
    pub mutation_swaps: usize,
    pub crossover_count: usize,
    pub spectrum_list_size: usize,
    pub seed: u64,
    /// Attempts per offspring before giving up on systematic validity.
    pub max_retries: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 32,
            it_max: 50,
            mutation_swaps: 1,
            crossover_count: 32,
            spectrum_list_size: 1 << 14,
            seed: 0,
            max_retries: 1000,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return input_err("population size must be at least 2");
        }
        if self.it_max < 1 {
            return input_err("it_max must be at least 1");
        }
        if self.spectrum_list_size < 2 {
            return input_err("spectrum list size must be at least 2");
        }
        if self.max_retries < 1 {
            return input_err("max_retries must be at least 1");
        }
        Ok(())
    }
}

/// Code family the construction targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeTemplate {
    pub conv: ConvSpec,
    pub systematic: bool,
}

impl CodeTemplate {
    fn accepts(&self, frozen: &FrozenSet) -> bool {
        !self.systematic || systematic_round_trip(frozen, &self.conv, false)
    }

    fn spec(&self, frozen: &FrozenSet) -> Result<CodeSpec> {
        CodeSpec::new_unchecked(frozen.clone(), self.conv.clone(), self.systematic, false)
    }
}

fn crossover(a: &FrozenSet, b: &FrozenSet, rng: &mut ChaCha8Rng) -> FrozenSet {
    let target = a.num_frozen();
    let mut mask: Vec<bool> = a.mask().iter().zip(b.mask()).map(|(&x, &y)| x && y).collect();
    let disagree: Vec<usize> = (0..mask.len()).filter(|&i| a.is_frozen(i) != b.is_frozen(i)).collect();
    let need = target - mask.iter().filter(|&&f| f).count();
    for j in sample(rng, disagree.len(), need) {
        mask[disagree[j]] = true;
    }
    FrozenSet::from_mask(mask).expect("same length as parents")
}

fn mutate(a: &FrozenSet, swaps: usize, rng: &mut ChaCha8Rng) -> FrozenSet {
    let mut mask = a.mask().to_vec();
    for _ in 0..swaps {
        let frozen: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let info: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
        if frozen.is_empty() || info.is_empty() {
            break;
        }
        let f = frozen[rng.gen_range(0..frozen.len())];
        let i = info[rng.gen_range(0..info.len())];
        mask[f] = false;
        mask[i] = true;
    }
    FrozenSet::from_mask(mask).expect("length unchanged")
}

/// Adds up to `crossover_count` crossover offspring and one `m`-swap mutant
/// per current member. Offspring duplicating a member are redrawn; systematic
/// templates redraw offspring that fail the round-trip check. A slot whose
/// redraws all fail stays empty; the call fails only if offspring were
/// requested and none could be added.
pub fn extend_population(
    pop: &[Candidate],
    cfg: &GaConfig,
    template: &CodeTemplate,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Candidate>> {
    if pop.is_empty() {
        return input_err("population is empty");
    }
    let mut out = pop.to_vec();
    let mut seen: HashSet<FrozenSet> = pop.iter().map(|c| c.frozen.clone()).collect();
    let mut draw = |make: &mut dyn FnMut(&mut ChaCha8Rng) -> FrozenSet,
                    out: &mut Vec<Candidate>,
                    rng: &mut ChaCha8Rng| {
        for _ in 0..cfg.max_retries {
            let f = make(rng);
            if seen.contains(&f) || !template.accepts(&f) {
                continue;
            }
            seen.insert(f.clone());
            out.push(Candidate::new(f));
            return;
        }
    };
    if pop.len() >= 2 {
        for _ in 0..cfg.crossover_count {
            let mut make = |rng: &mut ChaCha8Rng| {
                let i = rng.gen_range(0..pop.len());
                let j = (i + rng.gen_range(1..pop.len())) % pop.len();
                crossover(&pop[i].frozen, &pop[j].frozen, rng)
            };
            draw(&mut make, &mut out, rng);
        }
    }
    if cfg.mutation_swaps > 0 {
        for parent in pop {
            let mut make = |rng: &mut ChaCha8Rng| mutate(&parent.frozen, cfg.mutation_swaps, rng);
            draw(&mut make, &mut out, rng);
        }
    }
    let attempted = (pop.len() >= 2 && cfg.crossover_count > 0) || cfg.mutation_swaps > 0;
    if attempted && out.len() == pop.len() {
        return Err(PacError::Construction(format!(
            "no new {} frozen set after {} attempts (N={}, K={})",
            if template.systematic { "systematic-valid" } else { "distinct" },
            cfg.max_retries,
            pop[0].frozen.len(),
            pop[0].frozen.num_info()
        )));
    }
    Ok(out)
}

/// One row of the progress log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaProgress {
    pub iter: usize,
    pub best_dmin: usize,
    pub best_admin: u64,
    pub population_size: usize,
}

pub const PROGRESS_CSV_HEADER: &str = "iter,best_dmin,best_Admin,population_size";

pub fn progress_csv(rows: &[GaProgress]) -> String {
    let mut s = String::from(PROGRESS_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.iter, r.best_dmin, r.best_admin, r.population_size));
    }
    s
}

#[derive(Debug, Clone)]
pub struct GaResult {
    /// Final population, best first.
    pub population: Vec<Candidate>,
    pub progress: Vec<GaProgress>,
    /// Best spectrum after each progress row.
    pub best_history: Vec<DistanceSpectrum>,
}

impl GaResult {
    pub fn best(&self) -> &Candidate {
        &self.population[0]
    }
}

/// Seed sets: RM rule, GA density evolution at the seed SNRs, β-expansion.
pub fn seed_population(big_n: usize, k: usize, template: &CodeTemplate) -> Result<Vec<Candidate>> {
    let mut sets = vec![rm_rule(big_n, k)?];
    for snr in SEED_DESIGN_SNRS_DB {
        sets.push(ga_density_evolution(big_n, k, snr)?);
    }
    sets.push(beta_expansion(big_n, k, DEFAULT_BETA)?);
    let mut seen = HashSet::new();
    let seeds: Vec<Candidate> = sets
        .into_iter()
        .filter(|f| seen.insert(f.clone()) && template.accepts(f))
        .map(Candidate::new)
        .collect();
    if seeds.is_empty() {
        return Err(PacError::Construction(format!(
            "no seed construction admits systematic encoding at (N={big_n}, K={k})"
        )));
    }
    Ok(seeds)
}

fn evaluate(pop: &mut [Candidate], template: &CodeTemplate, list_size: usize) -> Result<()> {
    let cfg = ListConfig::new(list_size)?;
    pop.par_iter_mut().filter(|c| c.fitness.is_none()).try_for_each(|c| {
        let spec = template.spec(&c.frozen)?;
        c.fitness = Some(distance_spectrum(&spec, &cfg)?);
        Ok::<(), PacError>(())
    })
}

/// Best-first; ties keep the earlier member.
fn rank(pop: &mut Vec<Candidate>, keep: usize) {
    pop.sort_by(|a, b| {
        let (fa, fb) = (a.fitness.as_ref().expect("evaluated"), b.fitness.as_ref().expect("evaluated"));
        compare_spectra(fb, fa)
    });
    pop.truncate(keep);
}

fn progress_row(iter: usize, pop: &[Candidate]) -> GaProgress {
    let best = pop[0].fitness.as_ref().expect("evaluated");
    GaProgress {
        iter,
        best_dmin: best.d_min().unwrap_or(0),
        best_admin: best.a_min().unwrap_or(0),
        population_size: pop.len(),
    }
}

fn best_fitness(pop: &[Candidate]) -> DistanceSpectrum {
    pop[0].fitness.clone().expect("ranked members are evaluated")
}

/// Genetic construction with distance-spectrum fitness. The progress log
/// has one row for the evaluated seeds (iteration 0) and one per iteration.
pub fn genetic_construct(
    big_n: usize,
    k: usize,
    cfg: &GaConfig,
    systematic: bool,
    conv: ConvSpec,
) -> Result<GaResult> {
    genetic_construct_with(big_n, k, cfg, &CodeTemplate { conv, systematic }, |_| {})
}

/// As [`genetic_construct`], reporting each progress row as it is produced.
pub fn genetic_construct_with(
    big_n: usize,
    k: usize,
    cfg: &GaConfig,
    template: &CodeTemplate,
    mut on_progress: impl FnMut(&GaProgress),
) -> Result<GaResult> {
    check_sizes(big_n, k)?;
    cfg.validate()?;
    if k == 0 {
        return input_err("K must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop = seed_population(big_n, k, template)?;
    evaluate(&mut pop, template, cfg.spectrum_list_size)?;
    rank(&mut pop, cfg.population_size);
    let mut progress = vec![progress_row(0, &pop)];
    let mut best_history = vec![best_fitness(&pop)];
    on_progress(&progress[0]);
    for iter in 1..=cfg.it_max {
        let mut next = extend_population(&pop, cfg, template, &mut rng)?;
        evaluate(&mut next, template, cfg.spectrum_list_size)?;
        rank(&mut next, cfg.population_size);
        pop = next;
        let row = progress_row(iter, &pop);
        on_progress(&row);
        progress.push(row);
        best_history.push(best_fitness(&pop));
    }
    Ok(GaResult { population: pop, progress, best_history })
}
