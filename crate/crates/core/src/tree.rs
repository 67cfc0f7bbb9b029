//! Single-path navigation of the polar decoding tree with min-sum LLR
//! updates. The cursor can jump between arbitrary nodes; it keeps the LLRs
//! of every ancestor of its current node and the partial sums of every
//! completed block, which is what backtracking decoders need.

/// Min-sum check-node update.
#[inline]
pub(crate) fn f_minsum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// Variable-node update given the left partial sum.
#[inline]
pub(crate) fn g_update(a: f64, b: f64, left: u8) -> f64 {
    if left == 0 {
        b + a
    } else {
        b - a
    }
}

/// Penalty of deciding `bit` against LLR `llr` (0 if it agrees with the hard
/// decision, `|llr|` otherwise). Ties hard-decide 0.
#[inline]
pub fn branch_penalty(llr: f64, bit: u8) -> f64 {
    if hard_decision(llr) == bit {
        0.0
    } else {
        llr.abs()
    }
}

#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    u8::from(llr < 0.0)
}

pub(crate) struct TreeCursor {
    n: usize,
    /// `alpha[s]` holds the LLRs of the current path's stage-`s` node.
    alpha: Vec<Vec<f64>>,
    /// `beta[s][k·2^s ..]` holds the partial sums of completed block `k`.
    beta: Vec<Vec<u8>>,
    stage: usize,
    block: usize,
}

impl TreeCursor {
    pub(crate) fn new(llr: &[f64]) -> Self {
        let len = llr.len();
        let n = len.trailing_zeros() as usize;
        let mut alpha: Vec<Vec<f64>> = (0..=n).map(|s| vec![0.0; 1 << s]).collect();
        alpha[n].copy_from_slice(llr);
        Self { n, alpha, beta: vec![vec![0u8; len]; n + 1], stage: n, block: 0 }
    }

    /// LLRs of the current node.
    pub(crate) fn alpha(&self) -> &[f64] {
        &self.alpha[self.stage]
    }

    /// Number of layer moves from the current node to `(stage, block)`.
    pub(crate) fn distance(&self, stage: usize, block: usize) -> usize {
        let mut t = self.stage.max(stage);
        while (self.block >> (t - self.stage)) != (block >> (t - stage)) {
            t += 1;
        }
        (t - self.stage) + (t - stage)
    }

    /// Moves to the node `(stage, block)`, recomputing LLRs below the
    /// common ancestor. Returns the number of layer moves.
    pub(crate) fn move_to(&mut self, stage: usize, block: usize) -> usize {
        let mut t = self.stage.max(stage);
        while (self.block >> (t - self.stage)) != (block >> (t - stage)) {
            t += 1;
        }
        let moves = (t - self.stage) + (t - stage);
        for s in (stage..t).rev() {
            let b = block >> (s - stage);
            let half = 1usize << s;
            let (lo, hi) = self.alpha.split_at_mut(s + 1);
            let parent = &hi[0];
            let child = &mut lo[s];
            let (pa, pb) = parent.split_at(half);
            if b & 1 == 0 {
                for ((c, &a), &bb) in child.iter_mut().zip(pa).zip(pb) {
                    *c = f_minsum(a, bb);
                }
            } else {
                let left = &self.beta[s][(b - 1) * half..b * half];
                for (((c, &a), &bb), &l) in child.iter_mut().zip(pa).zip(pb).zip(left) {
                    *c = g_update(a, bb, l);
                }
            }
        }
        self.stage = stage;
        self.block = block;
        moves
    }

    /// Records the partial sums of block `(stage, block)` and combines
    /// completed siblings upward.
    pub(crate) fn commit(&mut self, stage: usize, block: usize, bits: &[u8]) {
        let size = 1usize << stage;
        debug_assert_eq!(bits.len(), size);
        self.beta[stage][block * size..(block + 1) * size].copy_from_slice(bits);
        let (mut s, mut b) = (stage, block);
        while b & 1 == 1 && s < self.n {
            let half = 1usize << s;
            let off = (b - 1) * half;
            let (lower, upper) = self.beta.split_at_mut(s + 1);
            let src = &lower[s];
            let dst = &mut upper[0];
            for j in 0..half {
                dst[off + j] = src[off + j] ^ src[off + half + j];
                dst[off + half + j] = src[off + half + j];
            }
            s += 1;
            b >>= 1;
        }
    }

    /// Partial sums at the root (the codeword) once every leaf is committed.
    #[cfg(test)]
    pub(crate) fn root_beta(&self) -> &[u8] {
        &self.beta[self.n]
    }

    pub(crate) fn depth(&self) -> usize {
        self.n
    }
}
