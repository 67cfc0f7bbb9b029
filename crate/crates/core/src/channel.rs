//! BPSK over AWGN and the Monte-Carlo frame loop.
//!
//! Frame `f` of a run draws its message and its noise from a ChaCha8
//! stream keyed by `(seed, f)`, so results do not depend on how frames are
//! spread over workers, and two runs with the same seed and the same `K`
//! see the same messages and the same noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::codec::encode;
use crate::error::{input_err, Result};
use crate::fano::{fano_decode, DecodeStatus, FanoConfig};
use crate::model::CodeSpec;

/// LLR clamp (natural-log units).
pub const LLR_MAX: f64 = 40.0;

/// Frames decoded per parallel batch.
const BATCH: u64 = 256;

/// Noise standard deviation for unit-energy BPSK at `ebn0_db` and code rate
/// `rate`: `σ² = 1 / (2 · rate · 10^{ebn0_db/10})`.
pub fn sigma_for_ebn0(ebn0_db: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub ebn0_db: f64,
    pub rate: f64,
    pub seed: u64,
    /// Replace the noisy channel by saturated, correct LLRs.
    pub noiseless: bool,
}

impl ChannelConfig {
    pub fn new(ebn0_db: f64, rate: f64, seed: u64) -> Result<Self> {
        if !ebn0_db.is_finite() {
            return input_err("Eb/N0 must be finite");
        }
        if !(rate > 0.0 && rate <= 1.0) {
            return input_err(format!("rate must lie in (0, 1], got {rate}"));
        }
        Ok(Self { ebn0_db, rate, seed, noiseless: false })
    }

    pub fn for_spec(spec: &CodeSpec, ebn0_db: f64, seed: u64) -> Result<Self> {
        Self::new(ebn0_db, spec.rate(), seed)
    }

    pub fn sigma(&self) -> f64 {
        sigma_for_ebn0(self.ebn0_db, self.rate)
    }
}

/// Bit 0 → +1, bit 1 → −1.
pub fn modulate_bpsk(x: &[u8]) -> Vec<f64> {
    x.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect()
}

/// Adds N(0, σ²) noise and returns `2y/σ²`, clamped to `±LLR_MAX`.
pub fn awgn_llr<R: Rng + ?Sized>(symbols: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    symbols
        .iter()
        .map(|&s| {
            let n: f64 = rng.sample(StandardNormal);
            (scale * (s + sigma * n)).clamp(-LLR_MAX, LLR_MAX)
        })
        .collect()
}

/// Random-number stream for one frame.
pub fn frame_rng(seed: u64, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame);
    rng
}

/// Accumulated counts of a run. Merging is order-independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialStats {
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub total_info_bits: u64,
    pub total_steps: u64,
    pub budget_exceeded: u64,
}

impl TrialStats {
    pub fn merge(&mut self, other: &TrialStats) {
        self.frames += other.frames;
        self.frame_errors += other.frame_errors;
        self.bit_errors += other.bit_errors;
        self.total_info_bits += other.total_info_bits;
        self.total_steps += other.total_steps;
        self.budget_exceeded += other.budget_exceeded;
    }

    pub fn add_frame(&mut self, f: &FrameResult) {
        self.frames += 1;
        self.frame_errors += u64::from(f.frame_error);
        self.bit_errors += f.bit_errors;
        self.total_info_bits += f.info_bits;
        self.total_steps += f.steps;
        self.budget_exceeded += u64::from(f.status == DecodeStatus::BudgetExceeded);
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.frames)
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.total_info_bits)
    }

    pub fn avg_steps(&self) -> f64 {
        ratio(self.total_steps, self.frames)
    }

    pub fn fer_ci95(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.frames, 1.959_963_984_540_054)
    }

    pub fn ber_ci95(&self) -> (f64, f64) {
        wilson_interval(self.bit_errors, self.total_info_bits, 1.959_963_984_540_054)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub max_frames: u64,
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.min_frame_errors == 0 || self.max_frames == 0 {
            return input_err("stop rule limits must be positive");
        }
        Ok(())
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self { min_frame_errors: 200, max_frames: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FrameErrors,
    MaxFrames,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::FrameErrors => "frame_errors",
            StopReason::MaxFrames => "max_frames",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub frame_error: bool,
    pub bit_errors: u64,
    pub info_bits: u64,
    pub steps: u64,
    pub status: DecodeStatus,
    pub codeword_hat: Vec<u8>,
    pub msg_hat: Vec<u8>,
}

/// Draws, encodes, transmits and decodes frame `frame` of a run.
pub fn simulate_frame(spec: &CodeSpec, cfg: &ChannelConfig, fano: &FanoConfig, frame: u64) -> Result<FrameResult> {
    let mut rng = frame_rng(cfg.seed, frame);
    let msg: Vec<u8> = (0..spec.k()).map(|_| rng.gen_range(0..=1u8)).collect();
    let codeword = encode(&msg, spec)?;
    let symbols = modulate_bpsk(&codeword);
    let llr = if cfg.noiseless {
        symbols.iter().map(|&s| s * LLR_MAX).collect()
    } else {
        awgn_llr(&symbols, cfg.sigma(), &mut rng)
    };
    let out = fano_decode(&llr, spec, fano)?;
    let bit_errors = msg.iter().zip(&out.msg_hat).filter(|(a, b)| a != b).count() as u64;
    Ok(FrameResult {
        frame_error: bit_errors > 0 || out.status == DecodeStatus::BudgetExceeded,
        bit_errors,
        info_bits: spec.k() as u64,
        steps: out.steps,
        status: out.status,
        codeword_hat: out.codeword_hat,
        msg_hat: out.msg_hat,
    })
}

/// Simulates frames `first..first + count` in parallel, in frame order.
pub fn simulate_frames(
    spec: &CodeSpec,
    cfg: &ChannelConfig,
    fano: &FanoConfig,
    first: u64,
    count: u64,
) -> Result<Vec<FrameResult>> {
    (first..first + count).into_par_iter().map(|f| simulate_frame(spec, cfg, fano, f)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub ebn0_db: f64,
    pub stats: TrialStats,
    pub stop: StopReason,
}

/// Runs frames until `min_frame_errors` errors or `max_frames` frames,
/// whichever comes first. Frames are counted strictly in frame order.
pub fn run_point(spec: &CodeSpec, cfg: &ChannelConfig, fano: &FanoConfig, stop: &StopRule) -> Result<PointResult> {
    stop.validate()?;
    fano.validate()?;
    let mut stats = TrialStats::default();
    let mut next = 0u64;
    loop {
        let count = BATCH.min(stop.max_frames - next);
        for f in simulate_frames(spec, cfg, fano, next, count)? {
            stats.add_frame(&f);
            if stats.frame_errors >= stop.min_frame_errors {
                return Ok(PointResult { ebn0_db: cfg.ebn0_db, stats, stop: StopReason::FrameErrors });
            }
        }
        next += count;
        if next >= stop.max_frames {
            return Ok(PointResult { ebn0_db: cfg.ebn0_db, stats, stop: StopReason::MaxFrames });
        }
    }
}
