//! Fano sequential decoding of PAC codes over the polar decoding tree.
//!
//! The path metric is the list-decoding penalty (sum of `|LLR|` over
//! decisions that contradict the hard decision), so it never decreases
//! along a path and only grows at frozen positions or on non-ML branches.
//! The threshold starts at 0 and is only ever loosened by `delta`; the
//! search is a depth-first walk that backs up to the deepest information
//! position whose untried sibling is admissible, and restarts from the root
//! with a looser threshold when none is left.
//!
//! Step accounting: every layer move on the tree is one step, every
//! evaluation of a Rate-0/Rate-1 node is one step, and for codes whose
//! transform still polarizes inside those nodes the evaluation also pays
//! one step per internal stage to move partial sums between the node and
//! its leaves. The final ascent to the root is counted.

use crate::conv::{dynamic_frozen_bit, info_step, ConvState};
use crate::error::{input_err, PacError, Result};
use crate::model::CodeSpec;
use crate::polar::{classify_nodes, polar_transform_in_place, simplified_transform, NodeTag};
use crate::tree::{branch_penalty, hard_decision, TreeCursor};

/// Rate bias of the classical Fano metric. The penalty metric needs none.
pub const METRIC_BIAS: f64 = 0.0;

/// Reference budget at N = 128; scaled linearly with N.
pub const DEFAULT_STEPS_AT_128: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoConfig {
    /// Threshold increment Δ.
    pub delta: f64,
    /// Decoding-step budget per frame.
    pub max_steps: u64,
    /// Decode maximal Rate-0/Rate-1 nodes in one step.
    pub use_shortcuts: bool,
}

impl FanoConfig {
    /// Δ = 2, shortcuts on, budget scaled to block length `big_n`.
    pub fn for_length(big_n: usize) -> Self {
        Self {
            delta: 2.0,
            max_steps: (DEFAULT_STEPS_AT_128 * big_n as u64 / 128).max(1),
            use_shortcuts: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return input_err(format!("delta must be positive, got {}", self.delta));
        }
        if self.max_steps == 0 {
            return input_err("max_steps must be positive");
        }
        Ok(())
    }
}

impl Default for FanoConfig {
    fn default() -> Self {
        Self::for_length(128)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    Converged,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Estimated convolutional-encoder input.
    pub conv_input: Vec<u8>,
    /// Estimated convolutional-encoder output (the polar-transform input).
    pub v_hat: Vec<u8>,
    pub msg_hat: Vec<u8>,
    pub codeword_hat: Vec<u8>,
    pub steps: u64,
    pub status: DecodeStatus,
    /// Penalty of the returned path.
    pub penalty: f64,
    /// Threshold in force when the search ended.
    pub final_threshold: f64,
    /// Penalty accumulated before each position (length N + 1).
    pub cumulative_penalty: Vec<f64>,
    /// Positions where the returned path took the non-ML branch.
    pub non_ml: Vec<bool>,
}

impl DecodeOutcome {
    pub fn converged(&self) -> bool {
        self.status == DecodeStatus::Converged
    }
}

/// Recorded decoding-step count of an outcome.
pub fn count_steps(outcome: &DecodeOutcome) -> u64 {
    outcome.steps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UnitKind {
    Frozen,
    Info,
    Rate0,
    Rate1,
}

#[derive(Debug, Clone, Copy)]
struct Unit {
    kind: UnitKind,
    stage: usize,
    start: usize,
}

impl Unit {
    fn end(&self) -> usize {
        self.start + (1 << self.stage)
    }

    fn block(&self) -> usize {
        self.start >> self.stage
    }
}

fn build_units(spec: &CodeSpec, shortcuts: bool) -> Vec<Unit> {
    let leaf = |i: usize| Unit {
        kind: if spec.frozen().is_frozen(i) { UnitKind::Frozen } else { UnitKind::Info },
        stage: 0,
        start: i,
    };
    if !shortcuts {
        return (0..spec.big_n()).map(leaf).collect();
    }
    let mut units = Vec::new();
    for node in classify_nodes(spec.frozen()) {
        match node.tag {
            NodeTag::Rate0 => units.push(Unit { kind: UnitKind::Rate0, stage: node.stage, start: node.start }),
            NodeTag::Rate1 => units.push(Unit { kind: UnitKind::Rate1, stage: node.stage, start: node.start }),
            NodeTag::Mixed => units.extend((node.start..node.end()).map(leaf)),
        }
    }
    units
}

struct Search<'a> {
    spec: &'a CodeSpec,
    cfg: FanoConfig,
    units: Vec<Unit>,
    unit_of: Vec<usize>,
    cursor: TreeCursor,
    llr_at: Vec<f64>,
    pen_before: Vec<f64>,
    state_before: Vec<ConvState>,
    flipped: Vec<bool>,
    conv_out: Vec<u8>,
    conv_in: Vec<u8>,
    penalty: f64,
    state: ConvState,
    threshold: f64,
    steps: u64,
    scratch: Vec<u8>,
}

impl<'a> Search<'a> {
    /// Extra steps a special-node evaluation pays when its interior is
    /// still polarized.
    fn special_cost(&self, stage: usize) -> u64 {
        1 + if self.spec.simplified() { 0 } else { stage as u64 }
    }

    fn record(&mut self, pos: usize, llr: f64, flip: bool) {
        self.pen_before[pos] = self.penalty;
        self.state_before[pos] = self.state;
        self.llr_at[pos] = llr;
        self.flipped[pos] = flip;
    }

    fn decide_info(&mut self, pos: usize, llr: f64, flip: bool) -> u8 {
        self.record(pos, llr, flip);
        let bit = hard_decision(llr) ^ u8::from(flip);
        if flip {
            self.penalty += llr.abs();
        }
        let (u, next) = info_step(self.state, bit, self.spec.conv());
        self.conv_out[pos] = bit;
        self.conv_in[pos] = u;
        self.state = next;
        bit
    }

    /// Processes unit `ui` starting at position `from`, taking the non-ML
    /// branch at `from` when `flip` is set. Returns false when a frozen
    /// evaluation pushes the penalty above the threshold.
    fn advance(&mut self, ui: usize, from: usize, flip: bool) -> bool {
        let unit = self.units[ui];
        let conv = self.spec.conv();
        match unit.kind {
            UnitKind::Frozen => {
                self.steps += self.cursor.move_to(0, unit.start) as u64;
                let llr = self.cursor.alpha()[0];
                let (v, next) = dynamic_frozen_bit(self.state, conv);
                let pen = branch_penalty(llr, v);
                if self.penalty + pen > self.threshold {
                    return false;
                }
                self.record(unit.start, llr, false);
                self.penalty += pen;
                self.state = next;
                self.conv_out[unit.start] = v;
                self.conv_in[unit.start] = 0;
                self.cursor.commit(0, unit.start, &[v]);
                true
            }
            UnitKind::Info => {
                self.steps += self.cursor.move_to(0, unit.start) as u64;
                let llr = self.cursor.alpha()[0];
                let bit = self.decide_info(unit.start, llr, flip);
                self.cursor.commit(0, unit.start, &[bit]);
                true
            }
            UnitKind::Rate0 => {
                self.steps += self.cursor.move_to(unit.stage, unit.block()) as u64;
                self.steps += self.special_cost(unit.stage);
                let mut state = self.state;
                self.scratch.clear();
                for _ in unit.start..unit.end() {
                    let (v, next) = dynamic_frozen_bit(state, conv);
                    self.scratch.push(v);
                    state = next;
                }
                let w = self.scratch.clone();
                if !self.spec.simplified() {
                    polar_transform_in_place(&mut self.scratch);
                }
                let alpha = self.cursor.alpha();
                let pen: f64 = alpha.iter().zip(&self.scratch).map(|(&a, &b)| branch_penalty(a, b)).sum();
                if self.penalty + pen > self.threshold {
                    return false;
                }
                let mut st = self.state;
                for (k, &v) in (unit.start..unit.end()).zip(&w) {
                    self.pen_before[k] = self.penalty;
                    self.state_before[k] = st;
                    self.flipped[k] = false;
                    self.conv_out[k] = v;
                    self.conv_in[k] = 0;
                    st = dynamic_frozen_bit(st, conv).1;
                }
                self.penalty += pen;
                self.state = state;
                let bits = std::mem::take(&mut self.scratch);
                self.cursor.commit(unit.stage, unit.block(), &bits);
                self.scratch = bits;
                true
            }
            UnitKind::Rate1 => {
                self.steps += self.cursor.move_to(unit.stage, unit.block()) as u64;
                self.steps += self.special_cost(unit.stage);
                if self.spec.simplified() {
                    for k in from..unit.end() {
                        let llr = self.cursor.alpha()[k - unit.start];
                        self.decide_info(k, llr, flip && k == from);
                    }
                    let w = self.conv_out[unit.start..unit.end()].to_vec();
                    self.cursor.commit(unit.stage, unit.block(), &w);
                } else {
                    // Leaf-level search inside the node keeps decisions
                    // identical to the unshortcut decoder; these moves are
                    // part of the single node evaluation.
                    for k in from..unit.end() {
                        self.cursor.move_to(0, k);
                        let llr = self.cursor.alpha()[0];
                        let bit = self.decide_info(k, llr, flip && k == from);
                        self.cursor.commit(0, k, &[bit]);
                    }
                    self.cursor.move_to(unit.stage, unit.block());
                }
                true
            }
        }
    }

    fn is_info(&self, pos: usize) -> bool {
        !self.spec.frozen().is_frozen(pos)
    }

    /// Deepest position before `pos` whose non-ML branch is still untried
    /// and admissible under the current threshold.
    fn backtrack_target(&self, pos: usize) -> Option<usize> {
        (0..pos)
            .rev()
            .find(|&j| self.is_info(j) && !self.flipped[j] && self.pen_before[j] + self.llr_at[j].abs() <= self.threshold)
    }

    fn run(&mut self) -> DecodeStatus {
        let big_n = self.spec.big_n();
        let mut pos = 0;
        loop {
            if self.steps > self.cfg.max_steps {
                return DecodeStatus::BudgetExceeded;
            }
            if pos == big_n {
                self.steps += self.cursor.distance(self.cursor.depth(), 0) as u64;
                return DecodeStatus::Converged;
            }
            let ui = self.unit_of[pos];
            if self.advance(ui, pos, false) {
                pos = self.units[ui].end();
                continue;
            }
            match self.backtrack_target(pos) {
                Some(j) => {
                    self.penalty = self.pen_before[j];
                    self.state = self.state_before[j];
                    let uj = self.unit_of[j];
                    self.advance(uj, j, true);
                    pos = self.units[uj].end();
                }
                None => {
                    self.threshold += self.cfg.delta;
                    self.penalty = 0.0;
                    self.state = ConvState::ZERO;
                    pos = 0;
                }
            }
        }
    }
}

/// Decodes one frame of channel LLRs with the Fano algorithm.
pub fn fano_decode(llr: &[f64], spec: &CodeSpec, cfg: &FanoConfig) -> Result<DecodeOutcome> {
    cfg.validate()?;
    let big_n = spec.big_n();
    if llr.len() != big_n {
        return input_err(format!("LLR length {} does not match N={big_n}", llr.len()));
    }
    if llr.iter().any(|x| !x.is_finite()) {
        return input_err("LLRs must be finite");
    }
    if spec.simplified() && !cfg.use_shortcuts {
        return Err(PacError::Unsupported(
            "simplified codes are decoded at Rate-0/Rate-1 node level; enable shortcuts".into(),
        ));
    }
    let units = build_units(spec, cfg.use_shortcuts);
    let mut unit_of = vec![0usize; big_n];
    for (ui, u) in units.iter().enumerate() {
        unit_of[u.start..u.end()].iter_mut().for_each(|x| *x = ui);
    }
    let mut search = Search {
        spec,
        cfg: *cfg,
        units,
        unit_of,
        cursor: TreeCursor::new(llr),
        llr_at: vec![0.0; big_n],
        pen_before: vec![0.0; big_n],
        state_before: vec![ConvState::ZERO; big_n],
        flipped: vec![false; big_n],
        conv_out: vec![0; big_n],
        conv_in: vec![0; big_n],
        penalty: 0.0,
        state: ConvState::ZERO,
        threshold: 0.0,
        steps: 0,
        scratch: Vec::with_capacity(big_n),
    };
    let status = search.run();
    Ok(finish(search, status))
}

fn finish(search: Search<'_>, status: DecodeStatus) -> DecodeOutcome {
    let spec = search.spec;
    let big_n = spec.big_n();
    let (mut conv_input, mut v_hat) = (search.conv_in, search.conv_out);
    let mut cumulative = search.pen_before;
    cumulative.push(search.penalty);
    // An interrupted search leaves stale decisions past its last position;
    // re-deriving the encoder input keeps the returned vectors consistent.
    let mut state = ConvState::ZERO;
    for i in 0..big_n {
        if spec.frozen().is_frozen(i) {
            let (v, next) = dynamic_frozen_bit(state, spec.conv());
            v_hat[i] = v;
            conv_input[i] = 0;
            state = next;
        } else {
            let (u, next) = info_step(state, v_hat[i], spec.conv());
            conv_input[i] = u;
            state = next;
        }
    }
    let codeword_hat = simplified_transform(&v_hat, &spec.transform_plan()).expect("length matches plan");
    let msg_hat: Vec<u8> = if spec.systematic() {
        spec.frozen().info_indices().map(|i| codeword_hat[i]).collect()
    } else {
        spec.frozen().info_indices().map(|i| conv_input[i]).collect()
    };
    DecodeOutcome {
        conv_input,
        v_hat,
        msg_hat,
        codeword_hat,
        steps: search.steps,
        status,
        penalty: search.penalty,
        final_threshold: search.threshold,
        cumulative_penalty: cumulative,
        non_ml: search.flipped,
    }
}
