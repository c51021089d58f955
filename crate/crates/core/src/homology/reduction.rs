//! Exact chain-complex reduction of the augmented simplicial chain complex.
//!
//! A reduction pair `(a, b)` with `⟨∂b, a⟩ = λ = ±1` is removed while
//! preserving integer homology. Two families are used:
//!
//! * elementary coreductions (`b` has a single remaining face `a`) and
//!   collapses (`a` has a single remaining coface `b`), which leave every
//!   surviving boundary equal to the original one restricted to survivors;
//! * general unit-pivot reductions on the small remainder, which update
//!   `∂y ← ∂y − (⟨∂y, a⟩/λ)·∂b` for the other cofaces `y` of `a`.
//!
//! Every step is recorded so chains can be pushed into the reduced complex
//! (`project`, `x ← x − (x_a/λ)·∂b`) and lifted back (`lift`,
//! `y ← y − (⟨∂y, a⟩/λ)·b`), which are mutually inverse on homology.
//!
//! Level 0 holds the single empty cell; level `l ≥ 1` holds the
//! `(l−1)`-simplices, and each vertex has boundary `+∅`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use num_bigint::BigInt;

use super::matrix::IntegerMatrix;
use super::HomologyError;
use crate::complex::SimplicialComplex;

/// Which reduction passes to run. With both disabled the "reduced" complex
/// is the full augmented complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionOptions {
    pub elementary: bool,
    pub general: bool,
    /// Abort when more than this many cells survive at one level.
    pub max_dense_cells: usize,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self { elementary: true, general: true, max_dense_cells: 4000 }
    }
}

impl ReductionOptions {
    pub fn none() -> Self {
        Self { elementary: false, general: false, max_dense_cells: usize::MAX }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Coreduction,
    Collapse,
    /// Index into `ReducedComplex::general`.
    General(u32),
}

#[derive(Debug, Clone, Copy)]
struct Record {
    a: u32,
    b: u32,
    level_a: u8,
    lambda: i8,
    kind: Kind,
}

#[derive(Debug, Clone)]
struct GeneralRecord {
    /// `∂b` at the time of the reduction, without `a`.
    boundary: Vec<(u32, i64)>,
    /// Other cofaces `y` of `a` with `⟨∂y, a⟩` at the time of the reduction.
    coboundary: Vec<(u32, i64)>,
}

/// The augmented complex after reduction, with enough history to move
/// chains in both directions.
#[derive(Debug, Clone)]
pub struct ReducedComplex {
    /// `offsets[l]` is the first cell id at level `l`; the last entry is the
    /// total cell count.
    offsets: Vec<usize>,
    face_start: Vec<usize>,
    face_ids: Vec<u32>,
    face_sign: Vec<i8>,
    coface_start: Vec<usize>,
    coface_ids: Vec<u32>,
    coface_sign: Vec<i8>,
    /// Step at which each cell was removed (`u32::MAX` for survivors).
    death: Vec<u32>,
    records: Vec<Record>,
    general: Vec<GeneralRecord>,
    /// Surviving cells per level, ascending.
    survivors: Vec<Vec<u32>>,
    /// Boundary of each survivor within the reduced complex.
    boundary: HashMap<u32, BTreeMap<u32, i64>>,
}

impl ReducedComplex {
    /// Reduces the augmented chain complex of `k` (all stored dimensions).
    pub fn new(k: &SimplicialComplex, options: ReductionOptions) -> Result<Self, HomologyError> {
        let levels = k.d_max() + 2;
        let mut offsets = vec![0usize, 1];
        for q in 0..=k.d_max() {
            offsets.push(offsets.last().unwrap() + k.count(q));
        }
        let total = *offsets.last().unwrap();
        if total > u32::MAX as usize - 1 {
            return Err(HomologyError::TooLarge { cells: total });
        }

        // Faces in CSR form.
        let mut face_start = Vec::with_capacity(total + 1);
        let mut face_ids = Vec::new();
        let mut face_sign = Vec::new();
        face_start.push(0);
        face_start.push(0); // the empty cell has no faces
        for _ in 0..k.count(0) {
            face_ids.push(0);
            face_sign.push(1);
            face_start.push(face_ids.len());
        }
        let mut facet = Vec::with_capacity(k.d_max() + 1);
        for q in 1..=k.d_max() {
            for s in k.iter(q) {
                for skip in 0..=q {
                    facet.clear();
                    facet.extend(s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                    let idx = k.index_of(&facet).ok_or(HomologyError::NotClosed)?;
                    face_ids.push((offsets[q] + idx) as u32);
                    face_sign.push(if skip % 2 == 0 { 1 } else { -1 });
                }
                face_start.push(face_ids.len());
            }
        }

        // Cofaces by transposition.
        let mut coface_count = vec![0usize; total + 1];
        for &f in &face_ids {
            coface_count[f as usize + 1] += 1;
        }
        for i in 0..total {
            coface_count[i + 1] += coface_count[i];
        }
        let coface_start = coface_count;
        let mut fill = coface_start.clone();
        let mut coface_ids = vec![0u32; face_ids.len()];
        let mut coface_sign = vec![0i8; face_ids.len()];
        for cell in 0..total {
            for e in face_start[cell]..face_start[cell + 1] {
                let f = face_ids[e] as usize;
                coface_ids[fill[f]] = cell as u32;
                coface_sign[fill[f]] = face_sign[e];
                fill[f] += 1;
            }
        }

        let mut rc = ReducedComplex {
            offsets,
            face_start,
            face_ids,
            face_sign,
            coface_start,
            coface_ids,
            coface_sign,
            death: vec![u32::MAX; total],
            records: Vec::new(),
            general: Vec::new(),
            survivors: vec![Vec::new(); levels],
            boundary: HashMap::new(),
        };
        if options.elementary {
            rc.elementary_pass();
        }
        rc.build_survivor_boundaries();
        if options.general {
            rc.general_pass()?;
        }
        rc.collect_survivors();
        for (level, s) in rc.survivors.iter().enumerate() {
            if level >= 2 && s.len() > options.max_dense_cells {
                return Err(HomologyError::TooLarge { cells: s.len() });
            }
        }
        Ok(rc)
    }

    pub fn levels(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn level_of(&self, cell: u32) -> usize {
        self.offsets.partition_point(|&o| o <= cell as usize) - 1
    }

    /// Cell id of the `index`-th simplex of dimension `q`.
    pub fn cell(&self, q: usize, index: usize) -> u32 {
        (self.offsets[q + 1] + index) as u32
    }

    /// Simplex index (within its dimension) of a cell at level `level`.
    pub fn simplex_index(&self, level: usize, cell: u32) -> usize {
        cell as usize - self.offsets[level]
    }

    pub fn survivors(&self, level: usize) -> &[u32] {
        self.survivors.get(level).map_or(&[], |s| s)
    }

    pub fn reduction_steps(&self) -> usize {
        self.records.len()
    }

    fn faces(&self, c: usize) -> impl Iterator<Item = (u32, i8)> + '_ {
        let r = self.face_start[c]..self.face_start[c + 1];
        self.face_ids[r.clone()].iter().copied().zip(self.face_sign[r].iter().copied())
    }

    fn cofaces(&self, c: usize) -> impl Iterator<Item = (u32, i8)> + '_ {
        let r = self.coface_start[c]..self.coface_start[c + 1];
        self.coface_ids[r.clone()].iter().copied().zip(self.coface_sign[r].iter().copied())
    }

    fn elementary_pass(&mut self) {
        let total = self.death.len();
        let mut alive = vec![true; total];
        let mut nf: Vec<u32> = (0..total).map(|c| (self.face_start[c + 1] - self.face_start[c]) as u32).collect();
        let mut nc: Vec<u32> = (0..total).map(|c| (self.coface_start[c + 1] - self.coface_start[c]) as u32).collect();
        let mut queue: VecDeque<u32> = (0..total as u32).collect();
        while let Some(c) = queue.pop_front() {
            let c = c as usize;
            if !alive[c] {
                continue;
            }
            let pair = if nf[c] == 1 {
                let (a, sign) = self.faces(c).find(|&(f, _)| alive[f as usize]).expect("counted face");
                Some((a, c as u32, sign, Kind::Coreduction))
            } else if nc[c] == 1 {
                let (b, sign) = self.cofaces(c).find(|&(f, _)| alive[f as usize]).expect("counted coface");
                Some((c as u32, b, sign, Kind::Collapse))
            } else {
                None
            };
            let Some((a, b, lambda, kind)) = pair else { continue };
            let step = self.records.len() as u32;
            self.records.push(Record { a, b, level_a: self.level_of(a) as u8, lambda, kind });
            for cell in [a, b] {
                alive[cell as usize] = false;
                self.death[cell as usize] = step;
            }
            for cell in [a as usize, b as usize] {
                for e in self.face_start[cell]..self.face_start[cell + 1] {
                    let f = self.face_ids[e] as usize;
                    if alive[f] {
                        nc[f] -= 1;
                        queue.push_back(f as u32);
                    }
                }
                for e in self.coface_start[cell]..self.coface_start[cell + 1] {
                    let f = self.coface_ids[e] as usize;
                    if alive[f] {
                        nf[f] -= 1;
                        queue.push_back(f as u32);
                    }
                }
            }
        }
    }

    fn build_survivor_boundaries(&mut self) {
        let total = self.death.len();
        let mut boundary = HashMap::new();
        for c in 0..total {
            if self.death[c] != u32::MAX {
                continue;
            }
            let bd: BTreeMap<u32, i64> =
                self.faces(c).filter(|&(f, _)| self.death[f as usize] == u32::MAX).map(|(f, s)| (f, s as i64)).collect();
            boundary.insert(c as u32, bd);
        }
        self.boundary = boundary;
    }

    fn general_pass(&mut self) -> Result<(), HomologyError> {
        let mut cob: HashMap<u32, BTreeMap<u32, i64>> = self.boundary.keys().map(|&c| (c, BTreeMap::new())).collect();
        for (&y, bd) in &self.boundary {
            for (&x, &e) in bd {
                cob.get_mut(&x).expect("survivor").insert(y, e);
            }
        }
        let cost = |bd_len: usize, cob_len: usize| (bd_len.saturating_sub(1) as u64) * (cob_len.saturating_sub(1) as u64);
        let mut heap: BinaryHeap<Reverse<(u64, u32, u32)>> = BinaryHeap::new();
        let push_unit_pairs = |heap: &mut BinaryHeap<Reverse<(u64, u32, u32)>>,
                               b: u32,
                               boundary: &HashMap<u32, BTreeMap<u32, i64>>,
                               cob: &HashMap<u32, BTreeMap<u32, i64>>| {
            let bd = &boundary[&b];
            for (&a, &e) in bd {
                if e.abs() == 1 {
                    heap.push(Reverse((cost(bd.len(), cob[&a].len()), b, a)));
                }
            }
        };
        let mut cells: Vec<u32> = self.boundary.keys().copied().collect();
        cells.sort_unstable();
        for &b in &cells {
            push_unit_pairs(&mut heap, b, &self.boundary, &cob);
        }
        while let Some(Reverse((c, b, a))) = heap.pop() {
            let (Some(bd_b), Some(cob_a)) = (self.boundary.get(&b), cob.get(&a)) else { continue };
            let Some(&lambda) = bd_b.get(&a) else { continue };
            if lambda.abs() != 1 {
                continue;
            }
            let now = cost(bd_b.len(), cob_a.len());
            if now > c {
                heap.push(Reverse((now, b, a)));
                continue;
            }
            let bd_b = self.boundary.remove(&b).unwrap();
            let cob_a = cob.remove(&a).unwrap();
            let boundary_rest: Vec<(u32, i64)> = bd_b.iter().filter(|&(&x, _)| x != a).map(|(&x, &e)| (x, e)).collect();
            let coboundary_rest: Vec<(u32, i64)> = cob_a.iter().filter(|&(&y, _)| y != b).map(|(&y, &e)| (y, e)).collect();
            // Detach a and b from their neighbours.
            for &(x, _) in &boundary_rest {
                cob.get_mut(&x).unwrap().remove(&b);
            }
            if let Some(bd_a) = self.boundary.remove(&a) {
                for z in bd_a.keys() {
                    if let Some(m) = cob.get_mut(z) {
                        m.remove(&a);
                    }
                }
            }
            if let Some(cob_b) = cob.remove(&b) {
                for w in cob_b.keys() {
                    if let Some(m) = self.boundary.get_mut(w) {
                        m.remove(&b);
                    }
                }
            }
            // ∂y ← ∂y − (c_y/λ)·∂b for the remaining cofaces y of a.
            for &(y, cy) in &coboundary_rest {
                let factor = cy * lambda; // c_y / λ with λ = ±1
                let bd_y = self.boundary.get_mut(&y).unwrap();
                bd_y.remove(&a);
                for &(x, e) in &boundary_rest {
                    let delta = factor.checked_mul(e).ok_or(HomologyError::Overflow)?;
                    let entry = bd_y.entry(x).or_insert(0);
                    *entry = entry.checked_sub(delta).ok_or(HomologyError::Overflow)?;
                    let value = *entry;
                    let cx = cob.get_mut(&x).unwrap();
                    if value == 0 {
                        bd_y.remove(&x);
                        cx.remove(&y);
                    } else {
                        cx.insert(y, value);
                    }
                }
            }
            let step = self.records.len() as u32;
            self.death[a as usize] = step;
            self.death[b as usize] = step;
            self.general.push(GeneralRecord { boundary: boundary_rest, coboundary: coboundary_rest.clone() });
            self.records.push(Record {
                a,
                b,
                level_a: self.level_of(a) as u8,
                lambda: lambda as i8,
                kind: Kind::General(self.general.len() as u32 - 1),
            });
            for &(y, _) in &coboundary_rest {
                push_unit_pairs(&mut heap, y, &self.boundary, &cob);
            }
        }
        Ok(())
    }

    /// Top-level cells with zero boundary are dropped: nothing is computed
    /// in the top dimension, and they add nothing to the image below.
    fn collect_survivors(&mut self) {
        let top = self.survivors.len() - 1;
        for s in &mut self.survivors {
            s.clear();
        }
        for (c, &d) in self.death.iter().enumerate() {
            if d == u32::MAX {
                let level = self.level_of(c as u32);
                if level == top && level >= 2 && self.boundary[&(c as u32)].is_empty() {
                    continue;
                }
                self.survivors[level].push(c as u32);
            }
        }
    }

    /// Boundary matrix from level `level` to level `level − 1` among
    /// survivors (rows and columns in ascending cell order).
    pub fn boundary_matrix(&self, level: usize) -> IntegerMatrix {
        let rows = self.survivors(level.wrapping_sub(1));
        let cols = self.survivors(level);
        let row_pos: HashMap<u32, usize> = rows.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut m = IntegerMatrix::zeros(rows.len(), cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (x, &e) in &self.boundary[c] {
                m.set(row_pos[x], j, BigInt::from(e));
            }
        }
        m
    }

    /// Pushes a chain of the original complex at `level` into survivor
    /// coordinates (ascending survivor order).
    pub fn project(&self, level: usize, chain: &HashMap<u32, i64>) -> Result<Vec<i64>, HomologyError> {
        let mut x = chain.clone();
        for (t, r) in self.records.iter().enumerate() {
            if r.level_a as usize != level {
                continue;
            }
            let Some(xa) = x.remove(&r.a) else { continue };
            if xa == 0 {
                continue;
            }
            let factor = xa * r.lambda as i64;
            match r.kind {
                Kind::Coreduction => {}
                Kind::Collapse => {
                    for (z, s) in self.faces(r.b as usize) {
                        if z != r.a && self.death[z as usize] > t as u32 {
                            sub_entry(&mut x, z, factor.checked_mul(s as i64).ok_or(HomologyError::Overflow)?)?;
                        }
                    }
                }
                Kind::General(g) => {
                    for &(z, e) in &self.general[g as usize].boundary {
                        sub_entry(&mut x, z, factor.checked_mul(e).ok_or(HomologyError::Overflow)?)?;
                    }
                }
            }
        }
        Ok(self.survivors(level).iter().map(|c| x.get(c).copied().unwrap_or(0)).collect())
    }

    /// Lifts a survivor-coordinate chain at `level` back to a chain of the
    /// original complex.
    pub fn lift(&self, level: usize, coords: &[i64]) -> Result<HashMap<u32, i64>, HomologyError> {
        let mut y: HashMap<u32, i64> =
            self.survivors(level).iter().zip(coords).filter(|(_, &c)| c != 0).map(|(&s, &c)| (s, c)).collect();
        for r in self.records.iter().rev() {
            if r.level_a as usize + 1 != level {
                continue;
            }
            let mut s: i64 = 0;
            match r.kind {
                Kind::Collapse => continue,
                Kind::Coreduction => {
                    for (w, sign) in self.cofaces(r.a as usize) {
                        if w != r.b {
                            if let Some(&yw) = y.get(&w) {
                                s = s.checked_add(yw * sign as i64).ok_or(HomologyError::Overflow)?;
                            }
                        }
                    }
                }
                Kind::General(g) => {
                    for &(w, c) in &self.general[g as usize].coboundary {
                        if let Some(&yw) = y.get(&w) {
                            s = s
                                .checked_add(yw.checked_mul(c).ok_or(HomologyError::Overflow)?)
                                .ok_or(HomologyError::Overflow)?;
                        }
                    }
                }
            }
            if s != 0 {
                sub_entry(&mut y, r.b, s * r.lambda as i64)?;
            }
        }
        Ok(y)
    }
}

fn sub_entry(x: &mut HashMap<u32, i64>, key: u32, delta: i64) -> Result<(), HomologyError> {
    let e = x.entry(key).or_insert(0);
    *e = e.checked_sub(delta).ok_or(HomologyError::Overflow)?;
    if *e == 0 {
        x.remove(&key);
    }
    Ok(())
}
