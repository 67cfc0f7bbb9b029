//! Polar transform `x = v · F2^{⊗n}` and the decoding-tree geometry used by
//! the simplified (Rate-0/Rate-1 unpolarized) variant.
//!
//! Index convention: natural order, no bit reversal. A tree node at stage
//! `s` covers the `2^s` leaves `[start, start + 2^s)`.

use crate::error::{input_err, Result};
use crate::model::FrozenSet;

/// In-place butterfly. Panics if the length is not a power of two.
pub fn polar_transform_in_place(x: &mut [u8]) {
    let len = x.len();
    assert!(len.is_power_of_two(), "polar transform needs a power-of-two length");
    let mut h = 1;
    while h < len {
        for block in x.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            lo.iter_mut().zip(hi.iter()).for_each(|(a, b)| *a ^= *b);
        }
        h *= 2;
    }
}

/// Returns `v · F2^{⊗n}` over GF(2).
pub fn polar_transform(v: &[u8]) -> Result<Vec<u8>> {
    if !v.len().is_power_of_two() {
        return input_err(format!("length {} is not a power of two", v.len()));
    }
    let mut x = v.to_vec();
    polar_transform_in_place(&mut x);
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeTag {
    Rate0,
    Rate1,
    Mixed,
}

/// A subtree of the decoding tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeClass {
    pub tag: NodeTag,
    pub stage: usize,
    pub start: usize,
}

impl NodeClass {
    pub fn size(&self) -> usize {
        1 << self.stage
    }

    pub fn end(&self) -> usize {
        self.start + self.size()
    }

    pub fn is_special(&self) -> bool {
        self.tag != NodeTag::Mixed
    }
}

/// Partition of the leaves into maximal Rate-0/Rate-1 subtrees (at least
/// two leaves) and size-2 Mixed nodes. Entries are in leaf order and cover
/// each leaf exactly once.
pub fn classify_nodes(frozen: &FrozenSet) -> Vec<NodeClass> {
    fn walk(mask: &[bool], start: usize, stage: usize, out: &mut Vec<NodeClass>) {
        let size = 1usize << stage;
        let block = &mask[start..start + size];
        if stage >= 1 {
            if block.iter().all(|&f| f) {
                out.push(NodeClass { tag: NodeTag::Rate0, stage, start });
                return;
            }
            if block.iter().all(|&f| !f) {
                out.push(NodeClass { tag: NodeTag::Rate1, stage, start });
                return;
            }
        }
        if stage <= 1 {
            out.push(NodeClass { tag: NodeTag::Mixed, stage, start });
            return;
        }
        walk(mask, start, stage - 1, out);
        walk(mask, start + size / 2, stage - 1, out);
    }
    let mut out = Vec::new();
    let len = frozen.len();
    walk(frozen.mask(), 0, len.trailing_zeros() as usize, &mut out);
    out
}

/// Set of subtrees whose internal polarization stages are omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformPlan {
    len: usize,
    skip: Vec<NodeClass>,
    // Per leaf: stage of the skipped node containing it (0 if none).
    skip_stage: Vec<u8>,
}

impl TransformPlan {
    /// Plan that omits nothing.
    pub fn empty(len: usize) -> Self {
        Self { len, skip: Vec::new(), skip_stage: vec![0; len] }
    }

    /// Maximal Rate-0/Rate-1 subtrees of the frozen set.
    pub fn from_frozen(frozen: &FrozenSet) -> Self {
        let skip = classify_nodes(frozen).into_iter().filter(NodeClass::is_special).collect();
        Self::new(frozen.len(), skip).expect("classified nodes are aligned and disjoint")
    }

    /// Explicit skip set; nodes must be aligned to subtree boundaries and
    /// pairwise disjoint.
    pub fn new(len: usize, skip: Vec<NodeClass>) -> Result<Self> {
        if !len.is_power_of_two() {
            return input_err(format!("length {len} is not a power of two"));
        }
        let mut skip_stage = vec![0u8; len];
        for node in &skip {
            if node.end() > len || node.start % node.size() != 0 {
                return input_err(format!(
                    "skip node at {} of size {} is not a subtree of a length-{len} tree",
                    node.start,
                    node.size()
                ));
            }
            for s in &mut skip_stage[node.start..node.end()] {
                if *s != 0 {
                    return input_err("skip nodes overlap");
                }
                *s = node.stage as u8;
            }
        }
        Ok(Self { len, skip, skip_stage })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.skip.is_empty()
    }

    pub fn skip_set(&self) -> &[NodeClass] {
        &self.skip
    }

    /// Number of XOR gates the plan removes from the encoder circuit.
    pub fn removed_xor_count(&self) -> usize {
        self.skip.iter().map(|n| n.stage * n.size() / 2).sum()
    }

    fn check_len(&self, v: &[u8]) -> Result<()> {
        if v.len() != self.len {
            return input_err(format!("vector length {} does not match plan length {}", v.len(), self.len));
        }
        Ok(())
    }

    /// Stage-`h` butterfly restricted to pairs not internal to a skip node.
    fn stage(&self, x: &mut [u8], h: usize) {
        for base in (0..self.len).step_by(2 * h) {
            // Pairs of a 2h block are internal iff the block lies inside a
            // skip node of size >= 2h.
            if (1usize << self.skip_stage[base]) >= 2 * h {
                continue;
            }
            for j in base..base + h {
                x[j] ^= x[j + h];
            }
        }
    }
}

/// Polar butterfly (stages in ascending order) with the stages internal to
/// the plan's skip nodes omitted. Equals [`polar_transform`] for an empty plan.
pub fn simplified_transform(v: &[u8], plan: &TransformPlan) -> Result<Vec<u8>> {
    plan.check_len(v)?;
    let mut x = v.to_vec();
    let mut h = 1;
    while h < plan.len {
        plan.stage(&mut x, h);
        h *= 2;
    }
    Ok(x)
}

/// Inverse of [`simplified_transform`]: the same restricted stages applied
/// in descending order.
pub fn simplified_inverse_transform(v: &[u8], plan: &TransformPlan) -> Result<Vec<u8>> {
    plan.check_len(v)?;
    let mut x = v.to_vec();
    let mut h = plan.len / 2;
    while h >= 1 {
        plan.stage(&mut x, h);
        h /= 2;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit_generator(n: usize) -> Vec<Vec<u8>> {
        let mut g = vec![vec![1u8]];
        for _ in 0..n {
            let m = g.len();
            let mut next = vec![vec![0u8; 2 * m]; 2 * m];
            for i in 0..m {
                for j in 0..m {
                    // F2 = [[1,0],[1,1]] ⊗ G
                    next[i][j] = g[i][j];
                    next[m + i][j] = g[i][j];
                    next[m + i][m + j] = g[i][j];
                }
            }
            g = next;
        }
        g
    }

    fn mat_mul(v: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
        (0..v.len())
            .map(|j| v.iter().zip(g).fold(0, |acc, (&vi, row)| acc ^ (vi & row[j])))
            .collect()
    }

    #[test]
    fn small_examples() {
        for u0 in 0..2 {
            for u1 in 0..2 {
                assert_eq!(polar_transform(&[u0, u1]).unwrap(), vec![u0 ^ u1, u1]);
            }
        }
        assert_eq!(polar_transform(&[0, 0, 0, 1]).unwrap(), vec![1, 1, 1, 1]);
        assert!(polar_transform(&[0, 1, 0]).is_err());
    }

    #[test]
    fn matches_kronecker_matrix() {
        let g = explicit_generator(3);
        for word in 0u32..256 {
            let v: Vec<u8> = (0..8).map(|i| ((word >> i) & 1) as u8).collect();
            assert_eq!(polar_transform(&v).unwrap(), mat_mul(&v, &g));
        }
    }

    fn mask(len: usize, frozen: &[usize]) -> FrozenSet {
        FrozenSet::from_indices(len, frozen).unwrap()
    }

    #[test]
    fn classify_examples() {
        let all = classify_nodes(&mask(8, &[0, 1, 2, 3, 4, 5, 6, 7]));
        assert_eq!(all, vec![NodeClass { tag: NodeTag::Rate0, stage: 3, start: 0 }]);
        let none = classify_nodes(&mask(8, &[]));
        assert_eq!(none, vec![NodeClass { tag: NodeTag::Rate1, stage: 3, start: 0 }]);
        let rm = classify_nodes(&mask(8, &[0, 1, 2, 4]));
        assert_eq!(
            rm,
            vec![
                NodeClass { tag: NodeTag::Rate0, stage: 1, start: 0 },
                NodeClass { tag: NodeTag::Mixed, stage: 1, start: 2 },
                NodeClass { tag: NodeTag::Mixed, stage: 1, start: 4 },
                NodeClass { tag: NodeTag::Rate1, stage: 1, start: 6 },
            ]
        );
    }

    #[test]
    fn pc_8_5_removes_five_xors() {
        let plan = TransformPlan::from_frozen(&mask(8, &[0, 1, 2]));
        assert_eq!(plan.removed_xor_count(), 5);
        assert_eq!(simplified_transform(&[0; 8], &plan).unwrap(), vec![0; 8]);
    }

    #[test]
    fn empty_plan_is_plain_transform() {
        let plan = TransformPlan::empty(16);
        for word in [0u32, 1, 0xbeef, 0xffff, 0x1234] {
            let v: Vec<u8> = (0..16).map(|i| ((word >> i) & 1) as u8).collect();
            assert_eq!(simplified_transform(&v, &plan).unwrap(), polar_transform(&v).unwrap());
        }
    }

    #[test]
    fn misaligned_plan_is_rejected() {
        let bad = NodeClass { tag: NodeTag::Rate1, stage: 2, start: 2 };
        assert!(TransformPlan::new(8, vec![bad]).is_err());
        let a = NodeClass { tag: NodeTag::Rate1, stage: 2, start: 0 };
        let b = NodeClass { tag: NodeTag::Rate0, stage: 1, start: 2 };
        assert!(TransformPlan::new(8, vec![a, b]).is_err());
        let plan = TransformPlan::empty(8);
        assert!(simplified_transform(&[0; 4], &plan).is_err());
    }
}
