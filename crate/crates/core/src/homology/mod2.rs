//! Homology and induced maps with ℤ/2 coefficients, computed on the same
//! reduced complex as the integer route. Used as a negative control: maps of
//! even degree become invisible mod 2.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use super::reduction::ReducedComplex;
use super::{chain_image, Chain, Homology, HomologyError};
use crate::complex::{SimplicialComplex, SimplicialMap};

type Bits = Vec<u64>;

fn bits(len: usize) -> Bits {
    vec![0; len.div_ceil(64)]
}

fn get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn flip(b: &mut Bits, i: usize) {
    b[i / 64] ^= 1 << (i % 64);
}

fn xor(dst: &mut Bits, src: &Bits) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

fn lowest(b: &Bits) -> Option<usize> {
    next_set(b, 0)
}

fn next_set(b: &Bits, from: usize) -> Option<usize> {
    let mut i = from / 64;
    if i >= b.len() {
        return None;
    }
    let mut w = b[i] & (!0u64 << (from % 64));
    loop {
        if w != 0 {
            return Some(i * 64 + w.trailing_zeros() as usize);
        }
        i += 1;
        if i == b.len() {
            return None;
        }
        w = b[i];
    }
}

/// Incremental echelon basis over GF(2). Every stored vector's lowest set
/// bit is its pivot, and each carries a tag of combination bits.
#[derive(Debug, Clone, Default)]
struct Echelon {
    pivots: HashMap<usize, (Bits, Bits)>,
}

impl Echelon {
    /// Clears every pivot position of `v`, updating `tag` alongside.
    fn reduce(&self, mut v: Bits, mut tag: Bits) -> (Bits, Bits) {
        let mut from = 0;
        while let Some(p) = next_set(&v, from) {
            if let Some((bv, bt)) = self.pivots.get(&p) {
                xor(&mut v, bv);
                xor(&mut tag, bt);
            }
            from = p + 1;
        }
        (v, tag)
    }

    /// Inserts `v`; returns the reduced tag instead if `v` was dependent.
    fn insert(&mut self, v: Bits, tag: Bits) -> Result<(), Bits> {
        let (v, tag) = self.reduce(v, tag);
        match lowest(&v) {
            None => Err(tag),
            Some(p) => {
                self.pivots.insert(p, (v, tag));
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Mod2Level {
    echelon: Echelon,
    tag_bits: usize,
    rank: usize,
    generators: Vec<Chain>,
}

/// ℤ/2 homology sharing the reduction of an integer [`Homology`].
#[derive(Debug, Clone)]
pub struct Mod2Homology {
    reduced: Arc<ReducedComplex>,
    components: usize,
    levels: Vec<Option<Mod2Level>>,
}

/// Columns of the reduced boundary at `level`, reduced mod 2.
fn boundary_columns(reduced: &ReducedComplex, level: usize) -> (usize, Vec<Bits>) {
    let m = reduced.boundary_matrix(level);
    let cols = (0..m.cols())
        .map(|j| {
            let mut b = bits(m.rows());
            for i in 0..m.rows() {
                if m.get(i, j).bit(0) {
                    flip(&mut b, i);
                }
            }
            b
        })
        .collect();
    (m.rows(), cols)
}

impl Mod2Homology {
    pub fn from_integral(h: &Homology) -> Result<Self, HomologyError> {
        let reduced = h.reduced_arc();
        let mut levels = vec![None];
        for q in 1..=h.up_to() {
            let level = q + 1;
            let n = reduced.survivors(level).len();
            // Kernel of the outgoing boundary: row-reduce the transpose by
            // tracking column combinations.
            let (_, out_cols) = boundary_columns(&reduced, level);
            let mut row_space = Echelon::default();
            let mut kernel = Vec::new();
            for (j, col) in out_cols.into_iter().enumerate() {
                let mut combo = bits(n);
                flip(&mut combo, j);
                if let Err(combo) = row_space.insert(col, combo) {
                    kernel.push(combo);
                }
            }
            let tag_bits = kernel.len();
            let mut echelon = Echelon::default();
            let in_cols = if level + 1 < reduced.levels() { boundary_columns(&reduced, level + 1).1 } else { Vec::new() };
            for col in in_cols {
                let _ = echelon.insert(col, bits(tag_bits));
            }
            let mut reps = Vec::new();
            for z in kernel {
                let mut tag = bits(tag_bits);
                flip(&mut tag, reps.len());
                if echelon.insert(z.clone(), tag).is_ok() {
                    reps.push(z);
                }
            }
            let mut generators = Vec::new();
            for z in &reps {
                let coords: Vec<i64> = (0..n).map(|i| get(z, i) as i64).collect();
                let lifted = reduced.lift(level, &coords)?;
                let mut terms: Vec<(u32, i64)> = lifted
                    .into_iter()
                    .filter(|(_, c)| c.rem_euclid(2) == 1)
                    .map(|(cell, _)| (reduced.simplex_index(level, cell) as u32, 1))
                    .collect();
                terms.sort_unstable();
                generators.push(Chain { dim: q, terms });
            }
            levels.push(Some(Mod2Level { echelon, tag_bits, rank: reps.len(), generators }));
        }
        Ok(Self { reduced, components: h.rank(0), levels })
    }

    pub fn betti(&self) -> Vec<usize> {
        self.levels
            .iter()
            .map(|l| match l {
                None => self.components,
                Some(l) => l.rank,
            })
            .collect()
    }

    pub fn generators(&self, q: usize) -> &[Chain] {
        self.levels[q].as_ref().map_or(&[], |l| &l.generators)
    }

    /// Coordinates (as bits) of the mod-2 class of a cycle in dimension `q ≥ 1`.
    pub fn coordinates(&self, cycle: &Chain) -> Result<Vec<u8>, HomologyError> {
        let q = cycle.dim;
        let level_data = self
            .levels
            .get(q)
            .and_then(Option::as_ref)
            .ok_or(HomologyError::DimensionOutOfRange { dim: q, d_max: self.levels.len() - 1 })?;
        let level = q + 1;
        let map: HashMap<u32, i64> = cycle.terms.iter().map(|&(idx, c)| (self.reduced.cell(q, idx as usize), c)).collect();
        let projected = self.reduced.project(level, &map)?;
        let mut v = bits(projected.len());
        for (i, c) in projected.iter().enumerate() {
            if c.rem_euclid(2) == 1 {
                flip(&mut v, i);
            }
        }
        let (rest, tag) = level_data.echelon.reduce(v, bits(level_data.tag_bits));
        if lowest(&rest).is_some() {
            return Err(HomologyError::Inconsistent("chain is not a cycle mod 2".into()));
        }
        Ok((0..level_data.rank).map(|i| get(&tag, i) as u8).collect())
    }
}

/// Matrix (entries 0/1) of the map induced on ℤ/2 homology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mod2InducedMap {
    pub dim: usize,
    pub matrix: Vec<Vec<u8>>,
}

impl Mod2InducedMap {
    /// The single entry when both sides have rank one.
    pub fn multiplier(&self) -> Option<u8> {
        match self.matrix.as_slice() {
            [row] if row.len() == 1 => Some(row[0]),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(Zero::is_zero)
    }
}

pub fn induced_map_mod2(
    phi: &SimplicialMap,
    k: &SimplicialComplex,
    l: &SimplicialComplex,
    hk: &Mod2Homology,
    hl: &Mod2Homology,
    dim: usize,
) -> Result<Mod2InducedMap, HomologyError> {
    if dim == 0 {
        return Err(HomologyError::DimensionOutOfRange { dim, d_max: hk.levels.len() - 1 });
    }
    phi.check(k, l)?;
    let target_rank = hl.betti().get(dim).copied().ok_or(HomologyError::DimensionOutOfRange { dim, d_max: hl.levels.len() - 1 })?;
    let mut matrix = vec![Vec::new(); target_rank];
    for g in hk.generators(dim) {
        let image = chain_image(phi, k, l, g)?;
        let coords = hl.coordinates(&image)?;
        for (row, c) in matrix.iter_mut().zip(coords) {
            row.push(c);
        }
    }
    Ok(Mod2InducedMap { dim, matrix })
}
