//! PAC encoders: non-systematic, systematic (polarize, re-freeze, RSCC,
//! polarize) and the simplified variant whose polarizations omit the
//! Rate-0/Rate-1 subtree interiors.

use crate::conv::{ff_encode, rscc_encode_rate1};
use crate::error::{input_err, PacError, Result};
use crate::model::{CodeSpec, ConvKind, ConvSpec, FrozenSet};
use crate::polar::{polar_transform_in_place, simplified_inverse_transform, simplified_transform, TransformPlan};

/// Intermediate vectors of one encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodeTrace {
    /// Message placed at the information positions, zeros elsewhere.
    pub u_extended: Vec<u8>,
    /// Input to the convolutional encoder (re-frozen first-pass output for
    /// systematic codes, `u_extended` otherwise).
    pub conv_in: Vec<u8>,
    pub conv_out: Vec<u8>,
    pub codeword: Vec<u8>,
}

fn hex_bits(bits: &[u8]) -> String {
    bits.chunks(4)
        .map(|c| {
            let v = c.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b)) << (4 - c.len());
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

impl EncodeTrace {
    /// One `name=<hex>` line per stage, bits packed MSB-first into nibbles.
    pub fn to_hex_dump(&self) -> String {
        format!(
            "u_extended={}\nconv_in={}\nconv_out={}\ncodeword={}\n",
            hex_bits(&self.u_extended),
            hex_bits(&self.conv_in),
            hex_bits(&self.conv_out),
            hex_bits(&self.codeword)
        )
    }
}

/// Places `msg` at the information positions (ascending), zeros elsewhere.
pub fn extend_with_frozen_bits(msg: &[u8], frozen: &FrozenSet) -> Result<Vec<u8>> {
    if msg.len() != frozen.num_info() {
        return input_err(format!("message length {} does not match K={}", msg.len(), frozen.num_info()));
    }
    let mut out = vec![0u8; frozen.len()];
    for (i, &m) in frozen.info_indices().zip(msg) {
        out[i] = m;
    }
    Ok(out)
}

fn check_msg(msg: &[u8], spec: &CodeSpec) -> Result<()> {
    if msg.len() != spec.k() {
        return input_err(format!("message length {} does not match K={}", msg.len(), spec.k()));
    }
    Ok(())
}

fn ns_trace(msg: &[u8], spec: &CodeSpec, plan: &TransformPlan) -> Result<EncodeTrace> {
    check_msg(msg, spec)?;
    if spec.conv().kind() != ConvKind::Feedforward {
        return Err(PacError::Unsupported("non-systematic encoding needs a feedforward encoder".into()));
    }
    let u_extended = extend_with_frozen_bits(msg, spec.frozen())?;
    let conv_out = ff_encode(&u_extended, spec.conv());
    let codeword = simplified_transform(&conv_out, plan)?;
    Ok(EncodeTrace { conv_in: u_extended.clone(), u_extended, conv_out, codeword })
}

fn sys_trace(msg: &[u8], frozen: &FrozenSet, conv: &ConvSpec, plan: &TransformPlan) -> EncodeTrace {
    let u_extended = extend_with_frozen_bits(msg, frozen).expect("caller checked length");
    // First pass is the inverse of the final map so that the systematic
    // positions survive when the final map is simplified.
    let mut conv_in = simplified_inverse_transform(&u_extended, plan).expect("plan matches N");
    for i in frozen.frozen_indices() {
        conv_in[i] = 0;
    }
    let conv_out = rscc_encode_rate1(&conv_in, frozen, conv).expect("recursive encoder");
    let codeword = simplified_transform(&conv_out, plan).expect("plan matches N");
    EncodeTrace { u_extended, conv_in, conv_out, codeword }
}

/// Systematic pipeline on raw components (no validity check).
pub(crate) fn systematic_pipeline(msg: &[u8], frozen: &FrozenSet, conv: &ConvSpec, plan: &TransformPlan) -> Vec<u8> {
    sys_trace(msg, frozen, conv, plan).codeword
}

/// Non-systematic PAC encoding: extend, feedforward-encode, polarize.
pub fn encode_ns(msg: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    if spec.systematic() {
        return Err(PacError::Unsupported("encode_ns called on a systematic spec".into()));
    }
    let mut t = ns_trace(msg, spec, &TransformPlan::empty(spec.big_n()))?;
    // Plain transform regardless of the simplified flag.
    t.codeword = t.conv_out.clone();
    polar_transform_in_place(&mut t.codeword);
    Ok(t.codeword)
}

/// Systematic PAC encoding: polarize the extended message, re-freeze,
/// RSCC-encode, polarize again.
pub fn encode_sys(msg: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    if !spec.systematic() {
        return Err(PacError::Unsupported("encode_sys called on a non-systematic spec".into()));
    }
    check_msg(msg, spec)?;
    if spec.conv().kind() != ConvKind::RecursiveSystematic {
        return Err(PacError::Construction("systematic encoding needs a recursive systematic encoder".into()));
    }
    Ok(systematic_pipeline(msg, spec.frozen(), spec.conv(), &TransformPlan::empty(spec.big_n())))
}

/// Simplified-variant encoding for either family: every polarization skips
/// the interior stages of the maximal Rate-0/Rate-1 subtrees.
pub fn encode_simplified(msg: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    let plan = TransformPlan::from_frozen(spec.frozen());
    Ok(trace_with_plan(msg, spec, &plan)?.codeword)
}

fn trace_with_plan(msg: &[u8], spec: &CodeSpec, plan: &TransformPlan) -> Result<EncodeTrace> {
    if spec.systematic() {
        check_msg(msg, spec)?;
        Ok(sys_trace(msg, spec.frozen(), spec.conv(), plan))
    } else {
        ns_trace(msg, spec, plan)
    }
}

/// Encodes with the encoder selected by the spec's flags.
pub fn encode(msg: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    Ok(encode_trace(msg, spec)?.codeword)
}

/// Encodes and keeps every intermediate stage.
pub fn encode_trace(msg: &[u8], spec: &CodeSpec) -> Result<EncodeTrace> {
    trace_with_plan(msg, spec, &spec.transform_plan())
}

/// Reads the message off a systematic codeword.
pub fn extract_message(codeword: &[u8], spec: &CodeSpec) -> Result<Vec<u8>> {
    if !spec.systematic() {
        return Err(PacError::Unsupported("message extraction needs a systematic code".into()));
    }
    if codeword.len() != spec.big_n() {
        return input_err(format!("codeword length {} does not match N={}", codeword.len(), spec.big_n()));
    }
    Ok(spec.frozen().info_indices().map(|i| codeword[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::polar_transform;

    fn rm84() -> FrozenSet {
        FrozenSet::from_indices(8, &[0, 1, 2, 4]).unwrap()
    }

    #[test]
    fn extend_examples() {
        let f = FrozenSet::from_indices(4, &[0, 1]).unwrap();
        assert_eq!(extend_with_frozen_bits(&[1, 0], &f).unwrap(), vec![0, 0, 1, 0]);
        let none = FrozenSet::none(4).unwrap();
        assert_eq!(extend_with_frozen_bits(&[1, 0, 1, 1], &none).unwrap(), vec![1, 0, 1, 1]);
        assert!(extend_with_frozen_bits(&[1], &f).is_err());
    }

    #[test]
    fn extend_inverse_exhaustive() {
        for len in [2usize, 4, 8, 16] {
            for fmask in 0u32..(1 << len.min(8)) {
                let mask: Vec<bool> = (0..len).map(|i| i < 8 && (fmask >> i) & 1 == 1).collect();
                let f = FrozenSet::from_mask(mask).unwrap();
                let k = f.num_info();
                for word in 0u32..(1 << k.min(8)) {
                    let msg: Vec<u8> = (0..k).map(|j| ((word >> (j % 8)) & 1) as u8).collect();
                    let ext = extend_with_frozen_bits(&msg, &f).unwrap();
                    let back: Vec<u8> = f.info_indices().map(|i| ext[i]).collect();
                    assert_eq!(back, msg);
                    assert!(f.frozen_indices().all(|i| ext[i] == 0));
                }
            }
        }
    }

    #[test]
    fn zero_message_gives_zero_codeword() {
        let ns = CodeSpec::new(rm84(), ConvSpec::default_feedforward(), false, false).unwrap();
        let s = CodeSpec::new(rm84(), ConvSpec::default_recursive(), true, false).unwrap();
        for spec in [&ns, &s] {
            assert_eq!(encode(&[0; 4], spec).unwrap(), vec![0; 8]);
            assert_eq!(encode_simplified(&[0; 4], spec).unwrap(), vec![0; 8]);
        }
    }

    #[test]
    fn identity_conv_is_plain_polar() {
        let spec = CodeSpec::new(rm84(), ConvSpec::identity(), false, false).unwrap();
        for word in 0u8..16 {
            let msg: Vec<u8> = (0..4).map(|j| (word >> j) & 1).collect();
            let ext = extend_with_frozen_bits(&msg, spec.frozen()).unwrap();
            assert_eq!(encode_ns(&msg, &spec).unwrap(), polar_transform(&ext).unwrap());
        }
    }

    #[test]
    fn systematic_exhaustive_rm84() {
        let spec = CodeSpec::new(rm84(), ConvSpec::default_recursive(), true, false).unwrap();
        for word in 0u8..16 {
            let msg: Vec<u8> = (0..4).map(|j| (word >> j) & 1).collect();
            let cw = encode_sys(&msg, &spec).unwrap();
            assert_eq!(extract_message(&cw, &spec).unwrap(), msg);
        }
        assert_eq!(extract_message(&[0; 8], &spec).unwrap(), vec![0; 4]);
    }

    #[test]
    fn wrong_family_errors() {
        let ns = CodeSpec::new(rm84(), ConvSpec::default_feedforward(), false, false).unwrap();
        let s = CodeSpec::new(rm84(), ConvSpec::default_recursive(), true, false).unwrap();
        assert!(matches!(encode_sys(&[0; 4], &ns), Err(PacError::Unsupported(_))));
        assert!(matches!(encode_ns(&[0; 4], &s), Err(PacError::Unsupported(_))));
        assert!(matches!(extract_message(&[0; 8], &ns), Err(PacError::Unsupported(_))));
        assert!(encode(&[0; 3], &ns).is_err());
    }

    #[test]
    fn empty_skip_set_matches_unsimplified() {
        // A frozen set with no special node of size >= 2.
        let f = FrozenSet::from_indices(8, &[0, 2, 4, 6]).unwrap();
        assert!(TransformPlan::from_frozen(&f).is_empty());
        let ns = CodeSpec::new(f.clone(), ConvSpec::default_feedforward(), false, false).unwrap();
        for word in 0u8..16 {
            let msg: Vec<u8> = (0..4).map(|j| (word >> j) & 1).collect();
            assert_eq!(encode_simplified(&msg, &ns).unwrap(), encode_ns(&msg, &ns).unwrap());
        }
    }

    #[test]
    fn hex_dump_layout() {
        let spec = CodeSpec::new(rm84(), ConvSpec::default_feedforward(), false, false).unwrap();
        let t = encode_trace(&[1, 0, 0, 0], &spec).unwrap();
        assert_eq!(t.u_extended, vec![0, 0, 0, 1, 0, 0, 0, 0]);
        let dump = t.to_hex_dump();
        assert!(dump.starts_with("u_extended=10\n"));
        assert_eq!(dump.lines().count(), 4);
    }
}
