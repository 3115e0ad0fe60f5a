//! Relabeling-invariant shape keys.

use super::{Kind, SimplexStructure, Start};

fn encode(s: &SimplexStructure, o: &super::Orientation, i: usize) -> String {
    let mut groups: Vec<String> = o.children[i]
        .values()
        .map(|kids| {
            let mut parts: Vec<String> = kids.iter().map(|&j| encode(s, o, j)).collect();
            parts.sort();
            format!("[{}]", parts.concat())
        })
        .collect();
    groups.sort();
    format!("({}{})", s.simplices()[i].dim(), groups.concat())
}

/// A string equal for two structures iff they agree up to renaming vertices
/// and simplices. Trees take the minimum rooted encoding over all roots;
/// cycles take the minimum dimension sequence over rotations and reflections.
pub fn shape_key(s: &SimplexStructure) -> String {
    match s.kind() {
        Kind::Tree => (0..s.simplices().len())
            .map(|i| encode(s, &s.orient(Start::Simplex(i)), i))
            .min()
            .map(|k| format!("T{k}"))
            .unwrap_or_default(),
        Kind::Cycle => {
            let dims = s.dims();
            let n = dims.len();
            let mut best: Option<Vec<usize>> = None;
            for start in 0..n {
                for rev in [false, true] {
                    let seq: Vec<usize> = (0..n)
                        .map(|j| {
                            if rev {
                                dims[(start + n - j) % n]
                            } else {
                                dims[(start + j) % n]
                            }
                        })
                        .collect();
                    if best.as_ref().is_none_or(|b| seq < *b) {
                        best = Some(seq);
                    }
                }
            }
            let body: Vec<String> = best.unwrap_or_default().iter().map(usize::to_string).collect();
            format!("C({})", body.join(","))
        }
    }
}

/// 64-bit FNV-1a hash of [`shape_key`].
pub fn shape_hash(s: &SimplexStructure) -> u64 {
    fnv1a(shape_key(s).as_bytes())
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
