use super::Cover;
use crate::error::{CommlabError, Result};

/// How a protocol picks, for each cell, one of the boxes containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    /// Smallest index among the boxes containing the cell.
    MinIndex,
    /// Among the boxes containing cell `c` (ascending index order), pick the
    /// one at position `hash64(seed, linear(c)) mod ρ_c`.
    SeededRandom { seed: u64 },
    /// Box index per cell, in linear cell order.
    Explicit { table: Vec<usize> },
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Portable 64-bit mix used by [`Selector::SeededRandom`]:
/// `splitmix64(splitmix64(seed) ^ index)` with the standard SplitMix64
/// finaliser constants.
pub fn hash64(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

/// A nondeterministic protocol: a cover plus a transcript selector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protocol {
    cover: Cover,
    selector: Selector,
}

impl Protocol {
    /// Checks the selector against the cover. An explicit table must name a
    /// containing box for every cell; the other selectors accept partial
    /// covers and fail later on uncovered cells.
    pub fn new(cover: Cover, selector: Selector) -> Result<Self> {
        if let Selector::Explicit { table } = &selector {
            let shape = cover.shape();
            if table.len() != shape.cell_count() {
                return Err(CommlabError::invalid(format!(
                    "explicit selector has {} entries, domain has {} cells",
                    table.len(),
                    shape.cell_count()
                )));
            }
            for (i, &b) in table.iter().enumerate() {
                let cell = shape.cell(i);
                match cover.boxes().get(b) {
                    Some(r) if r.contains(&cell) => {}
                    _ => {
                        if cover.boxes_containing(&cell).is_empty() {
                            return Err(CommlabError::UncoveredCell { cell });
                        }
                        return Err(CommlabError::InvalidSelector { cell, box_index: b });
                    }
                }
            }
        }
        Ok(Protocol { cover, selector })
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn selector(&self) -> &Selector {
        &self.selector
    }

    fn pick(&self, linear: usize, candidates: &[u32]) -> usize {
        match &self.selector {
            Selector::MinIndex => candidates[0] as usize,
            Selector::SeededRandom { seed } => {
                let k = hash64(*seed, linear as u64) % candidates.len() as u64;
                candidates[k as usize] as usize
            }
            Selector::Explicit { table } => table[linear],
        }
    }

    /// `t(c)`: the box designated for `cell`.
    pub fn select(&self, cell: &[usize]) -> Result<usize> {
        let linear = self.cover.shape().linear_index(cell)?;
        let candidates: Vec<u32> = self
            .cover
            .boxes_containing(cell)
            .into_iter()
            .map(|b| b as u32)
            .collect();
        if candidates.is_empty() {
            return Err(CommlabError::UncoveredCell {
                cell: cell.to_vec(),
            });
        }
        Ok(self.pick(linear, &candidates))
    }

    /// Selected box for every cell in linear order; `None` for uncovered cells.
    pub fn transcripts(&self) -> Vec<Option<usize>> {
        self.cover
            .incidence()
            .iter()
            .enumerate()
            .map(|(i, cands)| (!cands.is_empty()).then(|| self.pick(i, cands)))
            .collect()
    }

    /// Stable 64-bit digest of the sizes, boxes and selector.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fingerprint::default();
        for &s in self.cover.shape().sizes() {
            h.push(s as u64);
        }
        for b in self.cover.boxes() {
            h.push(u64::MAX);
            for p in 0..b.arity() {
                h.push(u64::MAX - 1);
                for v in b.factor(p).ones() {
                    h.push(v as u64);
                }
            }
        }
        match &self.selector {
            Selector::MinIndex => h.push(1),
            Selector::SeededRandom { seed } => {
                h.push(2);
                h.push(*seed);
            }
            Selector::Explicit { table } => {
                h.push(3);
                for &t in table {
                    h.push(t as u64);
                }
            }
        }
        h.finish()
    }
}

#[derive(Default)]
pub(crate) struct Fingerprint(u64);

impl Fingerprint {
    pub(crate) fn push(&mut self, v: u64) {
        self.0 = splitmix64(self.0 ^ v.rotate_left(17)).wrapping_add(v);
    }

    pub(crate) fn finish(&self) -> u64 {
        splitmix64(self.0)
    }
}
