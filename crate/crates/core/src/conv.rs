//! Shift-register machinery for the rate-1 convolutional pre-transform.
//!
//! Register bit `j` of a [`ConvState`] holds the input `j + 1` steps in the
//! past (for the recursive encoder, the post-feedback bit). The encoder is
//! neither terminated nor tail-biting.

use crate::error::{input_err, Result};
use crate::model::{ConvKind, ConvSpec, FrozenSet};

/// Register contents; bit 0 is the most recent entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ConvState(pub u64);

impl ConvState {
    pub const ZERO: ConvState = ConvState(0);

    /// Register contents as bits, most recent first.
    pub fn regs(&self, nu: usize) -> Vec<u8> {
        (0..nu).map(|j| ((self.0 >> j) & 1) as u8).collect()
    }

    pub fn from_regs(regs: &[u8]) -> Self {
        ConvState(regs.iter().enumerate().fold(0, |acc, (j, &b)| acc | (u64::from(b & 1) << j)))
    }

    #[inline]
    fn shift_in(self, bit: u8, conv: &ConvSpec) -> Self {
        ConvState(((self.0 << 1) | u64::from(bit)) & conv.state_mask())
    }
}

#[inline]
fn parity(x: u64) -> u8 {
    (x.count_ones() & 1) as u8
}

/// One feedforward step: `x = g0·u ⊕ Σ_{j≥1} g_j·state[j−1]`.
#[inline]
pub fn ff_step(state: ConvState, u: u8, conv: &ConvSpec) -> (u8, ConvState) {
    debug_assert_eq!(conv.kind(), ConvKind::Feedforward);
    let x = (u & conv.taps_forward()[0]) ^ parity(state.0 & conv.forward_mask());
    (x, state.shift_in(u, conv))
}

/// One step of the multiplexed recursive systematic encoder. The register
/// takes the post-feedback bit `a`; the output is the parity at frozen
/// positions and the systematic bit elsewhere.
#[inline]
pub fn rscc_step(state: ConvState, b: u8, is_frozen: bool, conv: &ConvSpec) -> (u8, ConvState) {
    debug_assert_eq!(conv.kind(), ConvKind::RecursiveSystematic);
    let a = b ^ parity(state.0 & conv.feedback_mask());
    let x = if is_frozen {
        (a & conv.taps_forward()[0]) ^ parity(state.0 & conv.forward_mask())
    } else {
        b
    };
    (x, state.shift_in(a, conv))
}

/// Expected output at a frozen position (input fixed to 0) and the next state.
#[inline]
pub fn dynamic_frozen_bit(state: ConvState, conv: &ConvSpec) -> (u8, ConvState) {
    match conv.kind() {
        ConvKind::Feedforward => ff_step(state, 0, conv),
        ConvKind::RecursiveSystematic => rscc_step(state, 0, true, conv),
    }
}

/// Decoder-side step at an information position: given the decided output
/// bit, returns the encoder input that produced it and the next state.
#[inline]
pub fn info_step(state: ConvState, out: u8, conv: &ConvSpec) -> (u8, ConvState) {
    match conv.kind() {
        ConvKind::Feedforward => {
            // g0 == 1, so the input is recoverable from the output.
            let u = out ^ parity(state.0 & conv.forward_mask());
            (u, state.shift_in(u, conv))
        }
        ConvKind::RecursiveSystematic => {
            let a = out ^ parity(state.0 & conv.feedback_mask());
            (out, state.shift_in(a, conv))
        }
    }
}

/// Rate-1 feedforward encoding from the zero state.
pub fn ff_encode(u: &[u8], conv: &ConvSpec) -> Vec<u8> {
    let mut state = ConvState::ZERO;
    u.iter()
        .map(|&b| {
            let (x, next) = ff_step(state, b, conv);
            state = next;
            x
        })
        .collect()
}

/// Rate-1 recursive systematic encoding from the zero state; the frozen
/// mask selects parity (frozen) or systematic (information) output.
pub fn rscc_encode_rate1(v: &[u8], frozen: &FrozenSet, conv: &ConvSpec) -> Result<Vec<u8>> {
    if v.len() != frozen.len() {
        return input_err(format!("input length {} does not match N={}", v.len(), frozen.len()));
    }
    if conv.kind() != ConvKind::RecursiveSystematic {
        return input_err("rscc_encode_rate1 needs a recursive systematic encoder");
    }
    let mut state = ConvState::ZERO;
    Ok(v.iter()
        .enumerate()
        .map(|(i, &b)| {
            let (x, next) = rscc_step(state, b, frozen.is_frozen(i), conv);
            state = next;
            x
        })
        .collect())
}
