use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{Cover, DomainShape, Protocol, Rect, Selector};
use crate::error::{CommlabError, Result};

/// A node of a deterministic protocol tree. At a split, `party` announces
/// whether its input lies in `left` or `right`; the two lists must partition
/// the index set that party still has at this node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Leaf,
    Split {
        party: usize,
        left: Vec<usize>,
        right: Vec<usize>,
        children: Box<[TreeNode; 2]>,
    },
}

impl TreeNode {
    pub fn split(
        party: usize,
        left: Vec<usize>,
        right: Vec<usize>,
        l: TreeNode,
        r: TreeNode,
    ) -> Self {
        TreeNode::Split {
            party,
            left,
            right,
            children: Box::new([l, r]),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf => 1,
            TreeNode::Split { children, .. } => children[0].leaf_count() + children[1].leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf => 0,
            TreeNode::Split { children, .. } => 1 + children[0].depth().max(children[1].depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolTree {
    pub shape: DomainShape,
    pub root: TreeNode,
}

impl ProtocolTree {
    pub fn new(shape: DomainShape, root: TreeNode) -> Self {
        ProtocolTree { shape, root }
    }

    /// The tree with no communication at all.
    pub fn silent(shape: DomainShape) -> Self {
        ProtocolTree {
            shape,
            root: TreeNode::Leaf,
        }
    }

    /// `party` announces its whole input, one bisection at a time.
    pub fn reveal(shape: DomainShape, party: usize) -> Self {
        let all: Vec<usize> = (0..shape.sizes()[party]).collect();
        let root = reveal_node(party, &all, TreeNode::Leaf, &|| TreeNode::Leaf);
        ProtocolTree { shape, root }
    }

    /// Every party announces its whole input in turn; leaves are single cells.
    pub fn full_communication(shape: DomainShape) -> Self {
        fn build(shape: &DomainShape, party: usize) -> TreeNode {
            if party == shape.arity() {
                return TreeNode::Leaf;
            }
            let all: Vec<usize> = (0..shape.sizes()[party]).collect();
            reveal_node(party, &all, build(shape, party + 1), &|| {
                build(shape, party + 1)
            })
        }
        let root = build(&shape, 0);
        ProtocolTree { shape, root }
    }

    /// Random tree: at each node stop with probability `stop_prob` (or when
    /// every party's set is a singleton), otherwise a uniformly chosen party
    /// with at least two candidates splits a random shuffle of its set at a
    /// uniform cut point.
    pub fn random<R: Rng + ?Sized>(shape: DomainShape, rng: &mut R, stop_prob: f64) -> Self {
        fn grow<R: Rng + ?Sized>(sets: &mut Vec<Vec<usize>>, rng: &mut R, stop: f64) -> TreeNode {
            let splittable: Vec<usize> = (0..sets.len()).filter(|&p| sets[p].len() > 1).collect();
            if splittable.is_empty() || rng.gen_bool(stop) {
                return TreeNode::Leaf;
            }
            let party = splittable[rng.gen_range(0..splittable.len())];
            let mut items = sets[party].clone();
            items.shuffle(rng);
            let cut = rng.gen_range(1..items.len());
            let mut left = items[..cut].to_vec();
            let mut right = items[cut..].to_vec();
            left.sort_unstable();
            right.sort_unstable();
            let saved = std::mem::replace(&mut sets[party], left.clone());
            let l = grow(sets, rng, stop);
            sets[party] = right.clone();
            let r = grow(sets, rng, stop);
            sets[party] = saved;
            TreeNode::split(party, left, right, l, r)
        }
        let mut sets: Vec<Vec<usize>> = shape.sizes().iter().map(|&s| (0..s).collect()).collect();
        let root = grow(&mut sets, rng, stop_prob.clamp(0.0, 1.0));
        ProtocolTree { shape, root }
    }
}

fn reveal_node(
    party: usize,
    set: &[usize],
    leaf: TreeNode,
    make: &dyn Fn() -> TreeNode,
) -> TreeNode {
    if set.len() <= 1 {
        return leaf;
    }
    let mid = set.len() / 2;
    let l = reveal_node(party, &set[..mid], make(), make);
    let r = reveal_node(party, &set[mid..], make(), make);
    TreeNode::split(party, set[..mid].to_vec(), set[mid..].to_vec(), l, r)
}

/// Turns a protocol tree into the partition protocol of its leaves. Leaves
/// are numbered in left-first depth-first order and the selector maps each
/// cell to its unique leaf.
pub fn compile_tree(tree: &ProtocolTree) -> Result<Protocol> {
    let shape = &tree.shape;
    let mut sets: Vec<FixedBitSet> = shape
        .sizes()
        .iter()
        .map(|&s| {
            let mut b = FixedBitSet::with_capacity(s);
            b.insert_range(..);
            b
        })
        .collect();
    let mut leaves = Vec::new();
    collect_leaves(&tree.root, shape, &mut sets, &mut leaves)?;
    let mut table = vec![usize::MAX; shape.cell_count()];
    for (i, leaf) in leaves.iter().enumerate() {
        leaf.for_each_cell(shape, |c| table[c] = i);
    }
    debug_assert!(table.iter().all(|&t| t != usize::MAX));
    let cover = Cover::new(shape.clone(), leaves)?;
    Protocol::new(cover, Selector::Explicit { table })
}

fn collect_leaves(
    node: &TreeNode,
    shape: &DomainShape,
    sets: &mut Vec<FixedBitSet>,
    out: &mut Vec<Rect>,
) -> Result<()> {
    match node {
        TreeNode::Leaf => {
            out.push(Rect::from_sets(shape, sets.clone())?);
            Ok(())
        }
        TreeNode::Split {
            party,
            left,
            right,
            children,
        } => {
            let party = *party;
            if party >= shape.arity() {
                return Err(CommlabError::InvalidTree(format!(
                    "split owned by party {party}, domain has {} parties",
                    shape.arity()
                )));
            }
            let size = shape.sizes()[party];
            let to_set = |items: &[usize], side: &str| -> Result<FixedBitSet> {
                let mut b = FixedBitSet::with_capacity(size);
                for &v in items {
                    if v >= size || b.put(v) {
                        return Err(CommlabError::InvalidTree(format!(
                            "{side} side of a party-{party} split has a repeated or out-of-range index {v}"
                        )));
                    }
                }
                if b.is_clear() {
                    return Err(CommlabError::InvalidTree(format!(
                        "{side} side of a party-{party} split is empty"
                    )));
                }
                Ok(b)
            };
            let l = to_set(left, "left")?;
            let r = to_set(right, "right")?;
            let current = &sets[party];
            let mut union = l.clone();
            union.union_with(&r);
            if !l.is_disjoint(&r) || union != *current {
                return Err(CommlabError::InvalidTree(format!(
                    "party-{party} split {left:?} | {right:?} is not a 2-way partition of {:?}",
                    current.ones().collect::<Vec<_>>()
                )));
            }
            let saved = std::mem::replace(&mut sets[party], l);
            collect_leaves(&children[0], shape, sets, out)?;
            sets[party] = r;
            collect_leaves(&children[1], shape, sets, out)?;
            sets[party] = saved;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ThicknessScope;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_by_two() -> DomainShape {
        DomainShape::new(vec![2, 2]).unwrap()
    }

    #[test]
    fn single_leaf_is_full_box() {
        let p = compile_tree(&ProtocolTree::silent(two_by_two())).unwrap();
        assert_eq!(p.cover().len(), 1);
        assert_eq!(p.cover().boxes()[0], Rect::full(&two_by_two()));
    }

    #[test]
    fn row_split_gives_row_rectangles() {
        let t = ProtocolTree::new(
            two_by_two(),
            TreeNode::split(0, vec![0], vec![1], TreeNode::Leaf, TreeNode::Leaf),
        );
        let p = compile_tree(&t).unwrap();
        let s = two_by_two();
        assert_eq!(
            p.cover().boxes(),
            &[
                Rect::new(&s, vec![vec![0], vec![0, 1]]).unwrap(),
                Rect::new(&s, vec![vec![1], vec![0, 1]]).unwrap()
            ]
        );
        assert_eq!(p.transcripts(), vec![Some(0), Some(0), Some(1), Some(1)]);
    }

    #[test]
    fn depth_two_tree_gives_singletons() {
        let col = || TreeNode::split(1, vec![0], vec![1], TreeNode::Leaf, TreeNode::Leaf);
        let t = ProtocolTree::new(
            two_by_two(),
            TreeNode::split(0, vec![0], vec![1], col(), col()),
        );
        let p = compile_tree(&t).unwrap();
        assert_eq!(p.cover().len(), 4);
        let s = two_by_two();
        for (i, b) in p.cover().boxes().iter().enumerate() {
            assert_eq!(b.cell_count(), 1);
            assert_eq!(b, &Rect::singleton(&s, &s.cell(i)).unwrap());
        }
        assert_eq!(t, ProtocolTree::full_communication(two_by_two()));
    }

    #[test]
    fn bad_splits_are_rejected() {
        let bad = [
            TreeNode::split(0, vec![0], vec![0], TreeNode::Leaf, TreeNode::Leaf),
            TreeNode::split(0, vec![0], vec![], TreeNode::Leaf, TreeNode::Leaf),
            TreeNode::split(0, vec![0, 1], vec![2], TreeNode::Leaf, TreeNode::Leaf),
            TreeNode::split(2, vec![0], vec![1], TreeNode::Leaf, TreeNode::Leaf),
            TreeNode::split(
                0,
                vec![0],
                vec![1],
                TreeNode::split(0, vec![0], vec![1], TreeNode::Leaf, TreeNode::Leaf),
                TreeNode::Leaf,
            ),
        ];
        for root in bad {
            let err = compile_tree(&ProtocolTree::new(two_by_two(), root)).unwrap_err();
            assert!(matches!(err, CommlabError::InvalidTree(_)), "{err:?}");
        }
    }

    #[test]
    fn random_trees_compile_to_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for sizes in [vec![4, 4], vec![5, 3], vec![2, 3, 4], vec![16, 16]] {
            for _ in 0..20 {
                let t =
                    ProtocolTree::random(DomainShape::new(sizes.clone()).unwrap(), &mut rng, 0.2);
                let p = compile_tree(&t).unwrap();
                let r = p.cover().validate();
                assert!(r.is_partition);
                assert_eq!(p.cover().thickness(&ThicknessScope::Global).unwrap(), 1);
                assert_eq!(p.cover().len(), t.root.leaf_count());
            }
        }
    }
}
