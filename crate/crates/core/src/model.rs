//! Shared domain types: frozen sets, convolutional code descriptions and
//! the immutable [`CodeSpec`] every encoder and decoder works from.
//!
//! Bits are `u8` values in `{0, 1}`. LLRs are `f64` in the natural-log
//! domain with the convention that a positive value favours bit 0.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec;
use crate::error::{input_err, PacError, Result};
use crate::polar::TransformPlan;

/// Largest supported convolutional memory (register length).
pub const MAX_MEMORY: usize = 63;

/// Positions of the input vector that carry fixed (frozen) values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrozenSet {
    mask: Vec<bool>,
}

impl FrozenSet {
    /// Builds a frozen set from a length-N mask (`true` = frozen).
    pub fn from_mask(mask: Vec<bool>) -> Result<Self> {
        if !mask.len().is_power_of_two() {
            return input_err(format!("block length {} is not a power of two", mask.len()));
        }
        Ok(Self { mask })
    }

    /// Builds a frozen set of length `len` from a list of frozen indices.
    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = vec![false; len];
        for &i in indices {
            if i >= len {
                return input_err(format!("frozen index {i} out of range for N={len}"));
            }
            if mask[i] {
                return input_err(format!("duplicate frozen index {i}"));
            }
            mask[i] = true;
        }
        Self::from_mask(mask)
    }

    /// Empty frozen set (rate-1 code).
    pub fn none(len: usize) -> Result<Self> {
        Self::from_mask(vec![false; len])
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    #[inline]
    pub fn is_frozen(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn num_frozen(&self) -> usize {
        self.mask.iter().filter(|&&f| f).count()
    }

    pub fn num_info(&self) -> usize {
        self.len() - self.num_frozen()
    }

    /// Frozen indices in ascending order.
    pub fn frozen_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i)
    }

    /// Information (non-frozen) indices in ascending order.
    pub fn info_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &f)| !f).map(|(i, _)| i)
    }
}

/// Convolutional encoder family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvKind {
    /// Rate-1 feedforward encoder `x_i = sum_j g_j u_{i-j}`.
    Feedforward,
    /// Rate-1/2 recursive systematic encoder whose outputs are multiplexed
    /// by the frozen mask into a rate-1 stream.
    RecursiveSystematic,
}

/// Convolutional code description. Taps are MSB-first: `taps[0]` multiplies
/// the current input, `taps[nu]` the oldest register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConvSpec {
    kind: ConvKind,
    forward: Vec<u8>,
    feedback: Vec<u8>,
    nu: usize,
    // Register masks: bit j-1 set iff tap j (j >= 1) is set.
    forward_mask: u64,
    feedback_mask: u64,
}

fn register_mask(taps: &[u8]) -> u64 {
    taps.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &t)| t == 1)
        .fold(0u64, |m, (j, _)| m | (1u64 << (j - 1)))
}

fn check_taps(taps: &[u8], what: &str) -> Result<()> {
    if taps.is_empty() {
        return input_err(format!("{what} taps are empty"));
    }
    if taps.iter().any(|&t| t > 1) {
        return input_err(format!("{what} taps must be binary"));
    }
    if taps.len() - 1 > MAX_MEMORY {
        return input_err(format!("{what} memory {} exceeds {MAX_MEMORY}", taps.len() - 1));
    }
    if taps[0] != 1 || taps[taps.len() - 1] != 1 {
        return input_err(format!("{what} taps must start and end with 1"));
    }
    Ok(())
}

impl ConvSpec {
    /// Feedforward generator given as MSB-first taps.
    pub fn feedforward(taps: Vec<u8>) -> Result<Self> {
        check_taps(&taps, "forward")?;
        let nu = taps.len() - 1;
        Ok(Self {
            kind: ConvKind::Feedforward,
            forward_mask: register_mask(&taps),
            feedback_mask: 0,
            forward: taps,
            feedback: Vec::new(),
            nu,
        })
    }

    /// Recursive systematic encoder: `parity` taps feed the multiplexed
    /// parity output, `feedback` taps drive the recursion. Both polynomials
    /// must have the same degree.
    pub fn recursive(parity: Vec<u8>, feedback: Vec<u8>) -> Result<Self> {
        check_taps(&parity, "parity")?;
        check_taps(&feedback, "feedback")?;
        if parity.len() != feedback.len() {
            return input_err("parity and feedback polynomials must have equal degree");
        }
        let nu = parity.len() - 1;
        Ok(Self {
            kind: ConvKind::RecursiveSystematic,
            forward_mask: register_mask(&parity),
            feedback_mask: register_mask(&feedback),
            forward: parity,
            feedback,
            nu,
        })
    }

    pub fn feedforward_octal(octal: &str) -> Result<Self> {
        Self::feedforward(octal_to_taps(octal)?)
    }

    pub fn recursive_octal(parity: &str, feedback: &str) -> Result<Self> {
        Self::recursive(octal_to_taps(parity)?, octal_to_taps(feedback)?)
    }

    /// Memory-0 feedforward code (plain polar code after the transform).
    pub fn identity() -> Self {
        Self::feedforward(vec![1]).expect("identity taps are valid")
    }

    /// The (131)_8 feedforward polynomial, constraint length 7.
    pub fn default_feedforward() -> Self {
        Self::feedforward_octal("131").expect("valid polynomial")
    }

    /// The (115)_8 parity / (147)_8 feedback recursive systematic encoder.
    pub fn default_recursive() -> Self {
        Self::recursive_octal("115", "147").expect("valid polynomials")
    }

    pub fn kind(&self) -> ConvKind {
        self.kind
    }

    pub fn taps_forward(&self) -> &[u8] {
        &self.forward
    }

    pub fn taps_feedback(&self) -> &[u8] {
        &self.feedback
    }

    /// Memory ν; the constraint length is ν + 1.
    pub fn nu(&self) -> usize {
        self.nu
    }

    #[inline]
    pub(crate) fn forward_mask(&self) -> u64 {
        self.forward_mask
    }

    #[inline]
    pub(crate) fn feedback_mask(&self) -> u64 {
        self.feedback_mask
    }

    #[inline]
    pub(crate) fn state_mask(&self) -> u64 {
        if self.nu == 64 {
            u64::MAX
        } else {
            (1u64 << self.nu) - 1
        }
    }
}

/// Parses an octal polynomial into MSB-first binary taps.
///
/// `"131"` becomes `[1,0,1,1,0,0,1]`; leading zero bits are dropped so the
/// result always starts with 1.
pub fn octal_to_taps(octal: &str) -> Result<Vec<u8>> {
    let s = octal.trim();
    let s = s.strip_prefix("0o").unwrap_or(s);
    if s.is_empty() {
        return input_err("empty octal polynomial");
    }
    let mut bits = Vec::with_capacity(3 * s.len());
    for c in s.chars() {
        let d = c
            .to_digit(8)
            .ok_or_else(|| PacError::Input(format!("invalid octal digit '{c}' in \"{s}\"")))?;
        bits.extend([(d >> 2) as u8 & 1, (d >> 1) as u8 & 1, d as u8 & 1]);
    }
    match bits.iter().position(|&b| b == 1) {
        Some(first) => Ok(bits.split_off(first)),
        None => input_err(format!("octal polynomial \"{s}\" is zero")),
    }
}

/// Inverse of [`octal_to_taps`].
pub fn taps_to_octal(taps: &[u8]) -> String {
    let pad = (3 - taps.len() % 3) % 3;
    let padded: Vec<u8> = std::iter::repeat_n(0, pad).chain(taps.iter().copied()).collect();
    let s: String = padded
        .chunks(3)
        .map(|c| char::from(b'0' + (c[0] << 2 | c[1] << 1 | c[2])))
        .collect();
    let trimmed = s.trim_start_matches('0');
    if trimmed.is_empty() {
        "0".into()
    } else {
        trimmed.into()
    }
}

/// Immutable description of one PAC code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeSpec {
    n: usize,
    big_n: usize,
    k: usize,
    frozen: FrozenSet,
    conv: ConvSpec,
    systematic: bool,
    simplified: bool,
}

impl CodeSpec {
    /// Builds and validates a code. Systematic codes need a recursive
    /// systematic encoder and a frozen set that passes
    /// [`validate_frozen_set`]; non-systematic codes need a feedforward one.
    pub fn new(frozen: FrozenSet, conv: ConvSpec, systematic: bool, simplified: bool) -> Result<Self> {
        let spec = Self::new_unchecked(frozen, conv, systematic, simplified)?;
        if systematic && !validate_frozen_set(&spec) {
            return Err(PacError::Construction(format!(
                "frozen set does not admit systematic encoding at (N={}, K={})",
                spec.big_n, spec.k
            )));
        }
        Ok(spec)
    }

    /// Structural checks only; skips the systematic round-trip probe.
    pub fn new_unchecked(
        frozen: FrozenSet,
        conv: ConvSpec,
        systematic: bool,
        simplified: bool,
    ) -> Result<Self> {
        let big_n = frozen.len();
        if big_n < 2 {
            return input_err("block length must be at least 2");
        }
        let k = frozen.num_info();
        if k == 0 {
            return input_err("code must carry at least one information bit");
        }
        match (systematic, conv.kind()) {
            (true, ConvKind::RecursiveSystematic) | (false, ConvKind::Feedforward) => {}
            (true, ConvKind::Feedforward) => {
                return Err(PacError::Unsupported(
                    "systematic codes need a recursive systematic encoder".into(),
                ))
            }
            (false, ConvKind::RecursiveSystematic) => {
                return Err(PacError::Unsupported(
                    "non-systematic codes need a feedforward encoder".into(),
                ))
            }
        }
        Ok(Self {
            n: big_n.trailing_zeros() as usize,
            big_n,
            k,
            frozen,
            conv,
            systematic,
            simplified,
        })
    }

    /// Exponent n with N = 2^n.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Block length N.
    pub fn big_n(&self) -> usize {
        self.big_n
    }

    /// Message length K.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.big_n as f64
    }

    pub fn frozen(&self) -> &FrozenSet {
        &self.frozen
    }

    pub fn conv(&self) -> &ConvSpec {
        &self.conv
    }

    pub fn systematic(&self) -> bool {
        self.systematic
    }

    pub fn simplified(&self) -> bool {
        self.simplified
    }

    /// Same code with the simplified flag replaced.
    pub fn with_simplified(&self, simplified: bool) -> Result<Self> {
        Self::new(self.frozen.clone(), self.conv.clone(), self.systematic, simplified)
    }

    /// Transform plan for the final polarization: the Rate-0/Rate-1 skip set
    /// when simplified, an empty plan otherwise.
    pub fn transform_plan(&self) -> TransformPlan {
        if self.simplified {
            TransformPlan::from_frozen(&self.frozen)
        } else {
            TransformPlan::empty(self.big_n)
        }
    }

    /// Serializes to the line-oriented code-spec format.
    pub fn to_spec_string(&self) -> String {
        let frozen: Vec<String> = self.frozen.frozen_indices().map(|i| i.to_string()).collect();
        let feedback = match self.conv.kind() {
            ConvKind::Feedforward => "-".to_string(),
            ConvKind::RecursiveSystematic => taps_to_octal(self.conv.taps_feedback()),
        };
        format!(
            "N={}\nK={}\nsystematic={}\nsimplified={}\nconv_forward={}\nconv_feedback={}\nfrozen={}\n",
            self.big_n,
            self.k,
            u8::from(self.systematic),
            u8::from(self.simplified),
            taps_to_octal(self.conv.taps_forward()),
            feedback,
            frozen.join(",")
        )
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec_string())
    }
}

/// Splits `key=value` lines, skipping blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| PacError::Input(format!("line {}: expected key=value", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => input_err(format!("{key} must be 0 or 1, got \"{v}\"")),
    }
}

impl FromStr for CodeSpec {
    type Err = PacError;

    fn from_str(text: &str) -> Result<Self> {
        let mut big_n = None;
        let mut k = None;
        let mut systematic = false;
        let mut simplified = false;
        let mut forward = None;
        let mut feedback = None;
        let mut frozen = None;
        for (key, v) in parse_key_values(text)? {
            match key.as_str() {
                "N" => big_n = Some(v.parse::<usize>().map_err(|e| PacError::Input(format!("N: {e}")))?),
                "K" => k = Some(v.parse::<usize>().map_err(|e| PacError::Input(format!("K: {e}")))?),
                "systematic" => systematic = parse_flag(&key, &v)?,
                "simplified" => simplified = parse_flag(&key, &v)?,
                "conv_forward" => forward = Some(v),
                "conv_feedback" => feedback = Some(v),
                "frozen" => {
                    let idx = if v.is_empty() {
                        Vec::new()
                    } else {
                        v.split(',')
                            .map(|s| s.trim().parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|e| PacError::Input(format!("frozen: {e}")))?
                    };
                    if idx.windows(2).any(|w| w[0] >= w[1]) {
                        return input_err("frozen indices must be strictly ascending");
                    }
                    frozen = Some(idx);
                }
                other => return input_err(format!("unknown key \"{other}\"")),
            }
        }
        let big_n = big_n.ok_or_else(|| PacError::Input("missing N".into()))?;
        let k = k.ok_or_else(|| PacError::Input("missing K".into()))?;
        let frozen = FrozenSet::from_indices(big_n, &frozen.unwrap_or_default())?;
        if frozen.num_info() != k {
            return input_err(format!(
                "K={k} inconsistent with {} frozen indices at N={big_n}",
                frozen.num_frozen()
            ));
        }
        let forward = forward.unwrap_or_else(|| "1".into());
        let conv = match feedback.as_deref() {
            None | Some("-") => ConvSpec::feedforward_octal(&forward)?,
            Some(fb) => ConvSpec::recursive_octal(&forward, fb)?,
        };
        CodeSpec::new(frozen, conv, systematic, simplified)
    }
}

/// Number of random probe messages used when exhaustive probing is too large.
pub const RANDOM_PROBES: usize = 1000;
/// Exhaustive probing is used up to this message length.
pub const EXHAUSTIVE_PROBE_MAX_K: usize = 12;

/// Checks that systematic encoding round-trips for this frozen set:
/// every probe message reappears at the information positions of its
/// codeword. Non-systematic specs trivially pass.
pub fn validate_frozen_set(spec: &CodeSpec) -> bool {
    if !spec.systematic() {
        return true;
    }
    systematic_round_trip(spec.frozen(), spec.conv(), spec.simplified())
}

/// Round-trip probe on raw components, used while searching frozen sets.
pub fn systematic_round_trip(frozen: &FrozenSet, conv: &ConvSpec, simplified: bool) -> bool {
    let k = frozen.num_info();
    let info: Vec<usize> = frozen.info_indices().collect();
    let plan = if simplified {
        TransformPlan::from_frozen(frozen)
    } else {
        TransformPlan::empty(frozen.len())
    };
    let check = |msg: &[u8]| -> bool {
        let cw = codec::systematic_pipeline(msg, frozen, conv, &plan);
        info.iter().zip(msg).all(|(&i, &m)| cw[i] == m)
    };
    let mut msg = vec![0u8; k];
    if k <= EXHAUSTIVE_PROBE_MAX_K {
        for word in 0u64..(1u64 << k) {
            for (j, b) in msg.iter_mut().enumerate() {
                *b = ((word >> j) & 1) as u8;
            }
            if !check(&msg) {
                return false;
            }
        }
        return true;
    }
    for j in 0..k {
        msg.fill(0);
        msg[j] = 1;
        if !check(&msg) {
            return false;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    for _ in 0..RANDOM_PROBES {
        msg.iter_mut().for_each(|b| *b = rng.gen_range(0..=1));
        if !check(&msg) {
            return false;
        }
    }
    true
}
