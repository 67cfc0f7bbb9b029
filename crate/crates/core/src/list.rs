//! Successive-cancellation list decoding with dynamic frozen bits, and the
//! distance-spectrum estimate built on it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::conv::{dynamic_frozen_bit, info_step, ConvState};
use crate::error::{input_err, PacError, Result};
use crate::model::CodeSpec;
use crate::polar::polar_transform_in_place;
use crate::tree::{branch_penalty, f_minsum, g_update, hard_decision};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ListConfig {
    pub list_size: usize,
}

impl ListConfig {
    pub fn new(list_size: usize) -> Result<Self> {
        if list_size == 0 {
            return input_err("list size must be at least 1");
        }
        Ok(Self { list_size })
    }
}

/// One surviving decoding path.
#[derive(Debug, Clone, PartialEq)]
pub struct ListPath {
    pub conv_input: Vec<u8>,
    /// Convolutional-encoder output (polar-transform input).
    pub v_hat: Vec<u8>,
    pub penalty: f64,
}

impl ListPath {
    pub fn codeword(&self) -> Vec<u8> {
        let mut c = self.v_hat.clone();
        polar_transform_in_place(&mut c);
        c
    }

    /// Decoded message under the spec's message mapping.
    pub fn message(&self, spec: &CodeSpec) -> Vec<u8> {
        if spec.systematic() {
            let c = self.codeword();
            spec.frozen().info_indices().map(|i| c[i]).collect()
        } else {
            spec.frozen().info_indices().map(|i| self.conv_input[i]).collect()
        }
    }
}

/// Per-path decoder memory in flat slot-major buffers. Stage `s < n` of a
/// slot lives at offsets `[2^s, 2^{s+1})` of its `len`-sized chunk.
struct Paths {
    len: usize,
    alpha: Vec<f64>,
    beta: Vec<u8>,
    v: Vec<u8>,
    u: Vec<u8>,
    state: Vec<ConvState>,
    penalty: Vec<f64>,
}

impl Paths {
    fn with_capacity(len: usize, slots: usize) -> Self {
        Self {
            len,
            alpha: Vec::with_capacity(len * slots),
            beta: Vec::with_capacity(len * slots),
            v: Vec::with_capacity(len * slots),
            u: Vec::with_capacity(len * slots),
            state: Vec::with_capacity(slots),
            penalty: Vec::with_capacity(slots),
        }
    }

    fn count(&self) -> usize {
        self.state.len()
    }

    fn push_empty(&mut self) {
        let len = self.len;
        self.alpha.resize(self.alpha.len() + len, 0.0);
        self.beta.resize(self.beta.len() + len, 0);
        self.v.resize(self.v.len() + len, 0);
        self.u.resize(self.u.len() + len, 0);
        self.state.push(ConvState::ZERO);
        self.penalty.push(0.0);
    }

    fn push_copy(&mut self, src: &Paths, p: usize) {
        let r = p * self.len..(p + 1) * self.len;
        self.alpha.extend_from_slice(&src.alpha[r.clone()]);
        self.beta.extend_from_slice(&src.beta[r.clone()]);
        self.v.extend_from_slice(&src.v[r.clone()]);
        self.u.extend_from_slice(&src.u[r]);
        self.state.push(src.state[p]);
        self.penalty.push(src.penalty[p]);
    }

    fn clear(&mut self) {
        self.alpha.clear();
        self.beta.clear();
        self.v.clear();
        self.u.clear();
        self.state.clear();
        self.penalty.clear();
    }

    /// Computes the leaf-`i` LLR of slot `p`.
    fn leaf_llr(&mut self, p: usize, i: usize, n: usize, llr: &[f64]) -> f64 {
        let len = self.len;
        let alpha = &mut self.alpha[p * len..(p + 1) * len];
        let beta = &self.beta[p * len..(p + 1) * len];
        let top = if i == 0 { n - 1 } else { i.trailing_zeros() as usize };
        for s in (0..=top).rev() {
            let h = 1usize << s;
            let (lo, hi) = alpha.split_at_mut(2 * h);
            let child = &mut lo[h..2 * h];
            let parent: &[f64] = if s + 1 == n { llr } else { &hi[..2 * h] };
            if s == top && i != 0 {
                let left = &beta[h..2 * h];
                for j in 0..h {
                    child[j] = g_update(parent[j], parent[h + j], left[j]);
                }
            } else {
                for j in 0..h {
                    child[j] = f_minsum(parent[j], parent[h + j]);
                }
            }
        }
        alpha[1]
    }

    /// Records output bit `bit` at leaf `i` of slot `p` and propagates the
    /// partial sums of completed left children.
    fn decide(&mut self, p: usize, i: usize, n: usize, bit: u8, input: u8, next: ConvState, pen: f64, scratch: &mut [u8]) {
        let len = self.len;
        self.v[p * len + i] = bit;
        self.u[p * len + i] = input;
        self.state[p] = next;
        self.penalty[p] += pen;
        let beta = &mut self.beta[p * len..(p + 1) * len];
        scratch[0] = bit;
        let mut s = 0;
        while s < n && (i >> s) & 1 == 1 {
            let h = 1usize << s;
            for j in 0..h {
                scratch[h + j] = scratch[j];
                scratch[j] ^= beta[h + j];
            }
            s += 1;
        }
        if s < n {
            let h = 1usize << s;
            beta[h..2 * h].copy_from_slice(&scratch[..h]);
        }
    }
}

fn check_input(llr: &[f64], spec: &CodeSpec) -> Result<()> {
    if llr.len() != spec.big_n() {
        return input_err(format!("LLR length {} does not match N={}", llr.len(), spec.big_n()));
    }
    if llr.iter().any(|x| !x.is_finite()) {
        return input_err("LLRs must be finite");
    }
    if spec.simplified() {
        return Err(PacError::Unsupported("list decoding of simplified codes is not supported".into()));
    }
    Ok(())
}

/// List decoding; returns up to `list_size` paths by ascending penalty.
/// Ties keep the lower path index, then the ML branch.
pub fn scl_decode(llr: &[f64], spec: &CodeSpec, cfg: &ListConfig) -> Result<Vec<ListPath>> {
    check_input(llr, spec)?;
    if cfg.list_size == 0 {
        return input_err("list size must be at least 1");
    }
    let big_n = spec.big_n();
    let n = spec.n();
    let conv = spec.conv();
    if n == 0 {
        // Single-bit code: one leaf, no tree.
        return Ok(single_leaf(llr[0], spec, cfg.list_size));
    }
    let cap = cfg.list_size.saturating_mul(2).min(1 << 22);
    let mut paths = Paths::with_capacity(big_n, cap.min(cfg.list_size * 2));
    let mut next = Paths::with_capacity(big_n, cap.min(cfg.list_size * 2));
    paths.push_empty();
    let mut scratch = vec![0u8; big_n];
    // (penalty, parent, branch, bit) candidates.
    let mut cand: Vec<(f64, usize, u8, u8)> = Vec::new();
    for i in 0..big_n {
        let count = paths.count();
        if spec.frozen().is_frozen(i) {
            for p in 0..count {
                let l = paths.leaf_llr(p, i, n, llr);
                let (bit, st) = dynamic_frozen_bit(paths.state[p], conv);
                paths.decide(p, i, n, bit, 0, st, branch_penalty(l, bit), &mut scratch);
            }
            continue;
        }
        cand.clear();
        let mut leaf = Vec::with_capacity(count);
        for p in 0..count {
            let l = paths.leaf_llr(p, i, n, llr);
            leaf.push(l);
            let ml = hard_decision(l);
            cand.push((paths.penalty[p], p, 0, ml));
            cand.push((paths.penalty[p] + l.abs(), p, 1, ml ^ 1));
        }
        let key = |a: &(f64, usize, u8, u8), b: &(f64, usize, u8, u8)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        };
        if cand.len() > cfg.list_size {
            cand.select_nth_unstable_by(cfg.list_size - 1, key);
            cand.truncate(cfg.list_size);
        }
        // Keep parents in order so copies are cache-friendly and deterministic.
        cand.sort_unstable_by(|a, b| a.1.cmp(&b.1).then(a.2.cmp(&b.2)));
        next.clear();
        for (slot, &(_, p, _, bit)) in cand.iter().enumerate() {
            next.push_copy(&paths, p);
            let (u, st) = info_step(paths.state[p], bit, conv);
            next.decide(slot, i, n, bit, u, st, branch_penalty(leaf[p], bit), &mut scratch);
        }
        std::mem::swap(&mut paths, &mut next);
    }
    let mut order: Vec<usize> = (0..paths.count()).collect();
    order.sort_by(|&a, &b| paths.penalty[a].total_cmp(&paths.penalty[b]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .map(|p| ListPath {
            conv_input: paths.u[p * big_n..(p + 1) * big_n].to_vec(),
            v_hat: paths.v[p * big_n..(p + 1) * big_n].to_vec(),
            penalty: paths.penalty[p],
        })
        .collect())
}

fn single_leaf(l: f64, spec: &CodeSpec, list_size: usize) -> Vec<ListPath> {
    let conv = spec.conv();
    if spec.frozen().is_frozen(0) {
        let (v, _) = dynamic_frozen_bit(ConvState::ZERO, conv);
        return vec![ListPath { conv_input: vec![0], v_hat: vec![v], penalty: branch_penalty(l, v) }];
    }
    let ml = hard_decision(l);
    let mut out: Vec<ListPath> = [ml, ml ^ 1]
        .iter()
        .map(|&b| ListPath {
            conv_input: vec![info_step(ConvState::ZERO, b, conv).0],
            v_hat: vec![b],
            penalty: branch_penalty(l, b),
        })
        .collect();
    out.truncate(list_size);
    out
}

/// Successive-cancellation decoding (list of one).
pub fn sc_decode(llr: &[f64], spec: &CodeSpec) -> Result<ListPath> {
    let mut paths = scl_decode(llr, spec, &ListConfig { list_size: 1 })?;
    Ok(paths.remove(0))
}

/// Weight multiplicities of nonzero codewords, ascending in weight. The
/// all-zero codeword is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DistanceSpectrum {
    pub entries: BTreeMap<usize, u64>,
    pub list_size: usize,
}

impl DistanceSpectrum {
    pub fn from_weights(weights: impl IntoIterator<Item = usize>, list_size: usize) -> Self {
        let mut entries = BTreeMap::new();
        for w in weights.into_iter().filter(|&w| w > 0) {
            *entries.entry(w).or_insert(0) += 1;
        }
        Self { entries, list_size }
    }

    pub fn d_min(&self) -> Option<usize> {
        self.entries.keys().next().copied()
    }

    /// Multiplicity at the minimum distance.
    pub fn a_min(&self) -> Option<u64> {
        self.entries.values().next().copied()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// `# list_size=<L>` followed by one `d=<int> A=<int>` line per weight.
    pub fn to_report(&self) -> String {
        self.to_string()
    }

    pub fn parse_report(text: &str) -> Result<Self> {
        let mut list_size = None;
        let mut entries = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("# list_size=") {
                list_size = Some(rest.parse().map_err(|_| PacError::Input(format!("bad list size: {rest}")))?);
                continue;
            }
            let mut d = None;
            let mut a = None;
            for tok in line.split_whitespace() {
                match tok.split_once('=') {
                    Some(("d", v)) => d = v.parse::<usize>().ok(),
                    Some(("A", v)) => a = v.parse::<u64>().ok(),
                    _ => {}
                }
            }
            match (d, a) {
                (Some(d), Some(a)) if a > 0 => {
                    entries.insert(d, a);
                }
                _ => return input_err(format!("bad spectrum line: {line}")),
            }
        }
        let list_size = list_size.ok_or_else(|| PacError::Input("missing list_size header".into()))?;
        Ok(Self { entries, list_size })
    }
}

impl fmt::Display for DistanceSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# list_size={}", self.list_size)?;
        for (d, a) in &self.entries {
            writeln!(f, "d={d} A={a}")?;
        }
        Ok(())
    }
}

/// List-decoding estimate of the low-weight spectrum: decode the noiseless
/// all-zero word and tally the distinct nonzero codewords on the list.
/// A lower bound, exact once `list_size >= 2^K`.
pub fn distance_spectrum(spec: &CodeSpec, cfg: &ListConfig) -> Result<DistanceSpectrum> {
    if cfg.list_size < 2 {
        return input_err("distance spectrum needs a list size of at least 2");
    }
    let llr = vec![1.0; spec.big_n()];
    let paths = scl_decode(&llr, spec, cfg)?;
    let mut seen = HashSet::with_capacity(paths.len());
    let mut weights = Vec::with_capacity(paths.len());
    for p in &paths {
        let c = p.codeword();
        let w = c.iter().filter(|&&b| b == 1).count();
        if seen.insert(c) {
            weights.push(w);
        }
    }
    Ok(DistanceSpectrum::from_weights(weights, cfg.list_size))
}

/// Ranks two spectra: `Greater` means `a` is the better profile. Larger
/// minimum distance wins, then smaller multiplicity, entry by entry; when
/// one list is a prefix of the other, fewer low-weight codewords wins.
pub fn compare_spectra(a: &DistanceSpectrum, b: &DistanceSpectrum) -> Ordering {
    for ((da, aa), (db, ab)) in a.entries.iter().zip(&b.entries) {
        let ord = da.cmp(db).then(ab.cmp(aa));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    b.total().cmp(&a.total())
}
