//! Integer simplicial homology with explicit generators, and the matrices
//! of maps induced on homology by simplicial maps.
//!
//! The augmented chain complex is first shrunk by exact reductions
//! ([`reduction`]); Smith normal forms of the small remaining boundary
//! matrices then give Betti numbers, torsion and a generator basis, and
//! cycles of the original complex are expressed in that basis by pushing
//! them through the reduction.

pub mod matrix;
pub mod mod2;
pub mod reduction;

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::complex::{ComplexError, SimplicialComplex, SimplicialMap};
pub use matrix::{smith_normal_form, smith_normal_form_with, IntegerMatrix, PivotStrategy, SnfResult};
pub use reduction::{ReducedComplex, ReductionOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologyError {
    #[error("dimension {dim} out of range 1..={d_max}")]
    DimensionOutOfRange { dim: usize, d_max: usize },
    #[error("homology up to dimension {up_to} needs simplices of dimension {needed}, but d_max is {d_max}")]
    UpToTooLarge { up_to: usize, needed: usize, d_max: usize },
    #[error("complex is not closed under taking faces")]
    NotClosed,
    #[error("reduced complex too large for dense Smith normal form ({cells} cells)")]
    TooLarge { cells: usize },
    #[error("integer overflow in chain arithmetic")]
    Overflow,
    #[error("homology was computed for a different complex")]
    ComplexMismatch,
    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),
    #[error("multiplier needs free rank-1 H1 on both sides without torsion (source rank {source_rank}, target rank {target_rank})")]
    NotRankOne { source_rank: usize, target_rank: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A simplicial chain: `terms` pairs a simplex index (within dimension
/// `dim`, lexicographic order) with its coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub dim: usize,
    pub terms: Vec<(u32, i64)>,
}

impl Chain {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Dense boundary matrix of `∂_dim` with respect to lexicographic simplex
/// order.
pub fn boundary_matrix(k: &SimplicialComplex, dim: usize) -> Result<IntegerMatrix, HomologyError> {
    if dim == 0 || dim > k.d_max() {
        return Err(HomologyError::DimensionOutOfRange { dim, d_max: k.d_max() });
    }
    let mut m = IntegerMatrix::zeros(k.count(dim - 1), k.count(dim));
    let mut facet = Vec::new();
    for (j, s) in k.iter(dim).enumerate() {
        for skip in 0..=dim {
            facet.clear();
            facet.extend(s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
            let i = k.index_of(&facet).ok_or(HomologyError::NotClosed)?;
            m.set(i, j, BigInt::from(if skip % 2 == 0 { 1 } else { -1 }));
        }
    }
    Ok(m)
}

/// Sparse boundary of a chain.
pub fn boundary_of(k: &SimplicialComplex, chain: &Chain) -> Result<Chain, HomologyError> {
    let mut out: HashMap<u32, i64> = HashMap::new();
    if chain.dim == 0 {
        return Ok(Chain { dim: 0, terms: Vec::new() });
    }
    let mut facet = Vec::new();
    for &(idx, c) in &chain.terms {
        let s = k.simplex(chain.dim, idx as usize);
        for skip in 0..=chain.dim {
            facet.clear();
            facet.extend(s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
            let f = k.index_of(&facet).ok_or(HomologyError::NotClosed)? as u32;
            let sign = if skip % 2 == 0 { c } else { -c };
            *out.entry(f).or_insert(0) += sign;
        }
    }
    Ok(chain_from_map(chain.dim - 1, out))
}

/// True iff `∂_{q} ∘ ∂_{q+1} = 0` for every `q ≥ 1`, checked simplex by
/// simplex.
pub fn boundary_squared_vanishes(k: &SimplicialComplex) -> Result<bool, HomologyError> {
    for q in 2..=k.d_max() {
        for idx in 0..k.count(q) {
            let c = Chain { dim: q, terms: vec![(idx as u32, 1)] };
            if !boundary_of(k, &boundary_of(k, &c)?)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn chain_from_map(dim: usize, map: HashMap<u32, i64>) -> Chain {
    let mut terms: Vec<(u32, i64)> = map.into_iter().filter(|&(_, c)| c != 0).collect();
    terms.sort_unstable();
    Chain { dim, terms }
}

/// Basis data for one homology dimension `q ≥ 1`.
#[derive(Debug, Clone)]
struct LevelBasis {
    /// Rank of the outgoing boundary in survivor coordinates.
    rank_out: usize,
    v_inv: IntegerMatrix,
    /// Change of basis on the cycle lattice that diagonalises boundaries.
    u2: IntegerMatrix,
    rank_in: usize,
    factors: Vec<BigInt>,
    /// Free generators first, then torsion generators, as survivor vectors.
    free_generators: Vec<Vec<BigInt>>,
    torsion_generators: Vec<Vec<BigInt>>,
}

/// Betti numbers, torsion and generator chains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomologySummary {
    pub betti: Vec<usize>,
    /// Invariant factors greater than one, per dimension (saturating at
    /// `u64::MAX`).
    pub torsion: Vec<Vec<u64>>,
    #[serde(skip)]
    pub generators: Vec<Vec<Chain>>,
}

/// Homology of a complex with coordinates available for arbitrary cycles.
#[derive(Debug, Clone)]
pub struct Homology {
    up_to: usize,
    num_vertices: usize,
    counts: Vec<usize>,
    reduced: Arc<ReducedComplex>,
    /// Component label per vertex (index into `component_reps`).
    component: Vec<u32>,
    component_reps: Vec<u32>,
    levels: Vec<Option<LevelBasis>>,
    generators: Vec<Vec<Chain>>,
}

/// Homology in dimensions `0..=up_to` using the default reduction.
pub fn homology(k: &SimplicialComplex, up_to: usize) -> Result<Homology, HomologyError> {
    Homology::compute(k, up_to, ReductionOptions::default(), PivotStrategy::default())
}

/// Homology from dense Smith normal forms of the full boundary matrices,
/// without any reduction.
pub fn homology_unreduced(k: &SimplicialComplex, up_to: usize) -> Result<Homology, HomologyError> {
    Homology::compute(k, up_to, ReductionOptions::none(), PivotStrategy::default())
}

impl Homology {
    pub fn compute(
        k: &SimplicialComplex,
        up_to: usize,
        options: ReductionOptions,
        strategy: PivotStrategy,
    ) -> Result<Self, HomologyError> {
        if up_to + 1 > k.d_max() {
            return Err(HomologyError::UpToTooLarge { up_to, needed: up_to + 1, d_max: k.d_max() });
        }
        let trimmed = k.truncated(up_to + 1);
        let reduced = Arc::new(ReducedComplex::new(&trimmed, options)?);
        let (component, component_reps) = components(k);
        let mut levels = vec![None];
        let mut generators = vec![component_reps.iter().map(|&v| Chain { dim: 0, terms: vec![(v, 1)] }).collect()];
        for q in 1..=up_to {
            let basis = level_basis(&reduced, q + 1, strategy);
            let mut gens = Vec::new();
            for g in basis.free_generators.iter().chain(&basis.torsion_generators) {
                let coords: Vec<i64> = g.iter().map(|c| c.to_i64().ok_or(HomologyError::Overflow)).collect::<Result<_, _>>()?;
                let lifted = reduced.lift(q + 1, &coords)?;
                let terms = lifted.into_iter().map(|(cell, c)| (reduced.simplex_index(q + 1, cell) as u32, c)).collect();
                gens.push(chain_from_map(q, terms));
            }
            generators.push(gens);
            levels.push(Some(basis));
        }
        Ok(Homology {
            up_to,
            num_vertices: k.num_vertices(),
            counts: trimmed.counts(),
            reduced,
            component,
            component_reps,
            levels,
            generators,
        })
    }

    pub fn up_to(&self) -> usize {
        self.up_to
    }

    pub fn betti(&self) -> Vec<usize> {
        (0..=self.up_to).map(|q| self.rank(q)).collect()
    }

    /// Free rank in dimension `q`.
    pub fn rank(&self, q: usize) -> usize {
        match &self.levels[q] {
            None => self.component_reps.len(),
            Some(b) => b.free_generators.len(),
        }
    }

    /// Invariant factors greater than one in dimension `q`.
    pub fn torsion(&self, q: usize) -> Vec<BigInt> {
        match &self.levels[q] {
            None => Vec::new(),
            Some(b) => b.factors.iter().filter(|f| !f.is_one()).cloned().collect(),
        }
    }

    /// Generator chains in dimension `q`: the free generators come first,
    /// followed by one generator per torsion factor.
    pub fn generators(&self, q: usize) -> &[Chain] {
        &self.generators[q]
    }

    pub fn summary(&self) -> HomologySummary {
        HomologySummary {
            betti: self.betti(),
            torsion: (0..=self.up_to)
                .map(|q| self.torsion(q).iter().map(|f| f.to_u64().unwrap_or(u64::MAX)).collect())
                .collect(),
            generators: self.generators.clone(),
        }
    }

    pub fn reduced(&self) -> &ReducedComplex {
        &self.reduced
    }

    pub(crate) fn reduced_arc(&self) -> Arc<ReducedComplex> {
        Arc::clone(&self.reduced)
    }

    fn matches(&self, k: &SimplicialComplex) -> bool {
        k.num_vertices() == self.num_vertices && k.truncated(self.up_to + 1).counts() == self.counts
    }

    /// Free coordinates of the homology class of a cycle of dimension `q`.
    pub fn coordinates(&self, cycle: &Chain) -> Result<Vec<BigInt>, HomologyError> {
        let q = cycle.dim;
        if q > self.up_to {
            return Err(HomologyError::DimensionOutOfRange { dim: q, d_max: self.up_to });
        }
        match &self.levels[q] {
            None => {
                let mut out = vec![BigInt::zero(); self.component_reps.len()];
                for &(v, c) in &cycle.terms {
                    out[self.component[v as usize] as usize] += c;
                }
                Ok(out)
            }
            Some(basis) => {
                let level = q + 1;
                let map: HashMap<u32, i64> =
                    cycle.terms.iter().map(|&(idx, c)| (self.reduced.cell(q, idx as usize), c)).collect();
                let projected = self.reduced.project(level, &map)?;
                let w = basis.v_inv.apply(&projected.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>());
                if w[..basis.rank_out].iter().any(|c| !c.is_zero()) {
                    return Err(HomologyError::Inconsistent("chain is not a cycle".into()));
                }
                let c = basis.u2.apply(&w[basis.rank_out..]);
                Ok(c[basis.rank_in..].to_vec())
            }
        }
    }
}

fn components(k: &SimplicialComplex) -> (Vec<u32>, Vec<u32>) {
    let n = k.num_vertices();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    if k.d_max() >= 1 {
        for e in k.iter(1) {
            let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
            if a != b {
                let (lo, hi) = (a.min(b), a.max(b));
                parent[hi as usize] = lo;
            }
        }
    }
    // Roots are the smallest vertex of each component.
    let mut label = vec![u32::MAX; n];
    let mut reps = Vec::new();
    let mut component = vec![0u32; n];
    for v in 0..n as u32 {
        let r = find(&mut parent, v);
        if label[r as usize] == u32::MAX {
            label[r as usize] = reps.len() as u32;
            reps.push(r);
        }
        component[v as usize] = label[r as usize];
    }
    (component, reps)
}

fn level_basis(reduced: &ReducedComplex, level: usize, strategy: PivotStrategy) -> LevelBasis {
    let m = reduced.boundary_matrix(level);
    let snf = smith_normal_form_with(&m, strategy);
    let r = snf.rank;
    let n = m.cols();
    let incoming = if level + 1 < reduced.levels() {
        reduced.boundary_matrix(level + 1)
    } else {
        IntegerMatrix::zeros(n, 0)
    };
    let projected = snf.v_inv.mul(&incoming).row_block(r, n);
    let snf2 = smith_normal_form_with(&projected, strategy);
    let kernel = snf.v.column_block(r, n);
    let gens = kernel.mul(&snf2.u_inv);
    let column = |j: usize| (0..gens.rows()).map(|i| gens.get(i, j).clone()).collect::<Vec<_>>();
    let factors = snf2.invariant_factors();
    let torsion_generators = (0..snf2.rank).filter(|&i| !factors[i].abs().is_one()).map(column).collect();
    let free_generators = (snf2.rank..n - r).map(column).collect();
    LevelBasis { rank_out: r, v_inv: snf.v_inv, u2: snf2.u, rank_in: snf2.rank, factors, free_generators, torsion_generators }
}

/// Pushes a chain forward along a simplicial map; simplices with repeated
/// image vertices contribute nothing.
pub fn chain_image(
    phi: &SimplicialMap,
    source: &SimplicialComplex,
    target: &SimplicialComplex,
    chain: &Chain,
) -> Result<Chain, HomologyError> {
    let mut out: HashMap<u32, i64> = HashMap::new();
    let mut img = Vec::with_capacity(chain.dim + 1);
    for &(idx, c) in &chain.terms {
        let s = source.simplex(chain.dim, idx as usize);
        img.clear();
        img.extend(s.iter().map(|&v| phi.apply(v)));
        let sign = sort_with_sign(&mut img);
        if img.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let j = target.index_of(&img).ok_or_else(|| ComplexError::NotSimplicial {
            source_simplex: s.to_vec(),
            image: img.clone(),
        })?;
        *out.entry(j as u32).or_insert(0) += sign * c;
    }
    Ok(chain_from_map(chain.dim, out))
}

/// Insertion sort returning the sign of the sorting permutation.
fn sort_with_sign(v: &mut [u32]) -> i64 {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    sign
}

/// Matrix of the map induced on free homology in one dimension, in the
/// generator bases of the source and target homology.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedMap {
    pub dim: usize,
    pub source_rank: usize,
    pub target_rank: usize,
    /// `target_rank × source_rank`; column `j` holds the image of source
    /// generator `j`.
    pub matrix: IntegerMatrix,
    pub source_torsion: bool,
    pub target_torsion: bool,
}

impl InducedMap {
    /// Invariant factors of the matrix (basis independent).
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        smith_normal_form(&self.matrix).invariant_factors()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }
}

pub fn induced_map(
    phi: &SimplicialMap,
    k: &SimplicialComplex,
    l: &SimplicialComplex,
    hk: &Homology,
    hl: &Homology,
    dim: usize,
) -> Result<InducedMap, HomologyError> {
    if !hk.matches(k) || !hl.matches(l) {
        return Err(HomologyError::ComplexMismatch);
    }
    if dim > hk.up_to || dim > hl.up_to {
        return Err(HomologyError::DimensionOutOfRange { dim, d_max: hk.up_to.min(hl.up_to) });
    }
    phi.check(k, l)?;
    let (sr, tr) = (hk.rank(dim), hl.rank(dim));
    let mut matrix = IntegerMatrix::zeros(tr, sr);
    for (j, g) in hk.generators(dim)[..sr].iter().enumerate() {
        let image = chain_image(phi, k, l, g)?;
        let coords = hl.coordinates(&image)?;
        for (i, c) in coords.into_iter().enumerate() {
            matrix.set(i, j, c);
        }
    }
    Ok(InducedMap {
        dim,
        source_rank: sr,
        target_rank: tr,
        matrix,
        source_torsion: !hk.torsion(dim).is_empty(),
        target_torsion: !hl.torsion(dim).is_empty(),
    })
}

/// Degree magnitude of a map between spaces with free rank-1 `H₁`. The sign
/// depends on generator orientations and is therefore not reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Multiplier {
    pub magnitude: u64,
    pub sign_ambiguous: bool,
}

pub fn h1_multiplier(m: &InducedMap) -> Result<Multiplier, HomologyError> {
    if m.dim != 1 || m.source_rank != 1 || m.target_rank != 1 || m.source_torsion || m.target_torsion {
        return Err(HomologyError::NotRankOne { source_rank: m.source_rank, target_rank: m.target_rank });
    }
    let magnitude = m.matrix.get(0, 0).abs().to_u64().ok_or(HomologyError::Overflow)?;
    Ok(Multiplier { magnitude, sign_ambiguous: true })
}
