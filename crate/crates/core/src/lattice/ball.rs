//! Parity-packed ℓ¹ balls.
//!
//! A ball of radius `r` holds the sites `x` with `|x|₁ ≤ r` and
//! `x₁ + … + x_d ≡ r (mod 2)`. This is exactly the set of sites a nearest
//! neighbour walk can occupy `r` steps away from the centre, so every time
//! slice of a cone and every DP state vector is one of these balls.
//!
//! Sites are stored row by row: a row fixes the first `d − 1` coordinates
//! (the prefix) and runs the last coordinate over `−h, −h + 2, …, h`. Rows
//! are in lexicographic prefix order, so the dense order is lexicographic in
//! the full coordinate tuple.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::LatticeError;

/// Largest number of sites a single allocation may hold (2 GiB of f64).
pub const MAX_SITES: u128 = 1 << 28;

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub prefix: Box<[i32]>,
    /// Half-width: the last coordinate runs over `-half..=half` in steps of 2.
    pub half: i32,
    pub offset: usize,
}

impl Row {
    #[inline]
    pub fn len(&self) -> usize {
        self.half as usize + 1
    }
}

/// Geometry of a centred ball; shared between all balls of equal `(dim, radius)`.
#[derive(Debug)]
pub struct BallShape {
    dim: usize,
    radius: u32,
    rows: Vec<Row>,
    lookup: HashMap<Box<[i32]>, usize>,
    len: usize,
}

impl BallShape {
    fn build(dim: usize, radius: u32) -> Self {
        let mut rows = Vec::new();
        let mut prefix = vec![0i32; dim - 1];
        let mut offset = 0usize;
        push_rows(&mut rows, &mut prefix, 0, radius as i32, &mut offset);
        let lookup = rows
            .iter()
            .enumerate()
            .map(|(i, row)| (row.prefix.clone(), i))
            .collect();
        BallShape {
            dim,
            radius,
            rows,
            lookup,
            len: offset,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub(crate) fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub(crate) fn row_index(&self, prefix: &[i32]) -> Option<usize> {
        self.lookup.get(prefix).copied()
    }

    /// Dense index of a site given relative to the centre.
    pub fn index_of(&self, rel: &[i32]) -> Option<usize> {
        debug_assert_eq!(rel.len(), self.dim);
        let (last, prefix) = rel.split_last()?;
        let row = &self.rows[self.row_index(prefix)?];
        let k = last + row.half;
        if k < 0 || k % 2 != 0 || k > 2 * row.half {
            return None;
        }
        Some(row.offset + (k / 2) as usize)
    }

    /// Relative coordinates of the site at a dense index.
    pub fn site_at(&self, index: usize) -> Vec<i32> {
        let r = self.rows.partition_point(|row| row.offset <= index) - 1;
        let row = &self.rows[r];
        let k = (index - row.offset) as i32;
        let mut site = row.prefix.to_vec();
        site.push(-row.half + 2 * k);
        site
    }
}

fn push_rows(rows: &mut Vec<Row>, prefix: &mut [i32], depth: usize, budget: i32, offset: &mut usize) {
    if depth == prefix.len() {
        rows.push(Row {
            prefix: prefix.to_vec().into_boxed_slice(),
            half: budget,
            offset: *offset,
        });
        *offset += budget as usize + 1;
        return;
    }
    for x in -budget..=budget {
        prefix[depth] = x;
        push_rows(rows, prefix, depth + 1, budget - x.abs(), offset);
    }
    prefix[depth] = 0;
}

/// Exact number of sites in a parity-packed ball, without building it.
///
/// Returns `None` on overflow of `u128`.
pub fn ball_site_count(dim: usize, radius: u32) -> Option<u128> {
    // counts[r] for the current dimension, r = 0..=radius
    let r_max = radius as usize;
    let mut counts: Vec<u128> = (0..=r_max as u128).map(|r| r + 1).collect();
    for _ in 1..dim {
        let mut next = Vec::with_capacity(r_max + 1);
        let mut prefix_sum: u128 = 0;
        for r in 0..=r_max {
            next.push(counts[r].checked_add(prefix_sum.checked_mul(2)?)?);
            prefix_sum = prefix_sum.checked_add(counts[r])?;
        }
        counts = next;
    }
    Some(counts[r_max])
}

type ShapeCache = Mutex<HashMap<(usize, u32), Arc<BallShape>>>;

fn shape_cache() -> &'static ShapeCache {
    static CACHE: OnceLock<ShapeCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Fetches (building on first use) the shared shape for `(dim, radius)`.
pub fn ball_shape(dim: usize, radius: u32) -> Result<Arc<BallShape>, LatticeError> {
    if dim == 0 {
        return Err(LatticeError::ZeroDimension);
    }
    if let Some(shape) = shape_cache().lock().unwrap().get(&(dim, radius)) {
        return Ok(shape.clone());
    }
    let count = ball_site_count(dim, radius).unwrap_or(u128::MAX);
    if count > MAX_SITES {
        return Err(LatticeError::Capacity {
            sites: count,
            limit: MAX_SITES,
        });
    }
    let shape = Arc::new(BallShape::build(dim, radius));
    shape_cache()
        .lock()
        .unwrap()
        .entry((dim, radius))
        .or_insert_with(|| shape.clone());
    Ok(shape)
}

/// A parity-packed ball placed at a centre site.
#[derive(Debug, Clone)]
pub struct Ball {
    shape: Arc<BallShape>,
    center: Box<[i32]>,
}

impl Ball {
    pub fn new(center: &[i32], radius: u32) -> Result<Self, LatticeError> {
        let shape = ball_shape(center.len(), radius)?;
        Ok(Ball {
            shape,
            center: center.into(),
        })
    }

    pub fn origin(dim: usize, radius: u32) -> Result<Self, LatticeError> {
        Ball::new(&vec![0; dim], radius)
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    pub fn radius(&self) -> u32 {
        self.shape.radius
    }

    pub fn center(&self) -> &[i32] {
        &self.center
    }

    pub fn len(&self) -> usize {
        self.shape.len
    }

    pub fn is_empty(&self) -> bool {
        self.shape.len == 0
    }

    pub fn shape(&self) -> &Arc<BallShape> {
        &self.shape
    }

    /// Same centre, new radius.
    pub fn resized(&self, radius: u32) -> Result<Ball, LatticeError> {
        Ball::new(&self.center, radius)
    }

    pub fn index_of(&self, site: &[i32]) -> Option<usize> {
        if site.len() != self.dim() {
            return None;
        }
        let rel: Vec<i32> = site.iter().zip(self.center.iter()).map(|(a, c)| a - c).collect();
        self.shape.index_of(&rel)
    }

    pub fn contains(&self, site: &[i32]) -> bool {
        self.index_of(site).is_some()
    }

    /// Absolute coordinates of the site at a dense index.
    pub fn site_at(&self, index: usize) -> Vec<i32> {
        let mut site = self.shape.site_at(index);
        for (x, c) in site.iter_mut().zip(self.center.iter()) {
            *x += c;
        }
        site
    }

    /// All sites in dense order, absolute coordinates.
    pub fn sites(&self) -> impl Iterator<Item = Vec<i32>> + '_ {
        self.shape.rows.iter().flat_map(move |row| {
            (0..row.len()).map(move |k| {
                let mut site: Vec<i32> = row
                    .prefix
                    .iter()
                    .zip(self.center.iter())
                    .map(|(p, c)| p + c)
                    .collect();
                site.push(self.center[self.dim() - 1] - row.half + 2 * k as i32);
                site
            })
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct PlanEntry {
    dst_row: u32,
    src_row: u32,
    shift: i32,
}

/// Neighbour-sum stencil between centred balls whose radii differ by one.
#[derive(Debug)]
pub(crate) struct NeighborPlan {
    entries: Vec<PlanEntry>,
}

impl NeighborPlan {
    fn build(dst: &BallShape, src: &BallShape) -> Self {
        let d = dst.dim;
        let mut entries = Vec::new();
        let mut probe = vec![0i32; d - 1];
        for (di, row) in dst.rows.iter().enumerate() {
            for axis in 0..d - 1 {
                for step in [-1, 1] {
                    probe.copy_from_slice(&row.prefix);
                    probe[axis] += step;
                    if let Some(si) = src.row_index(&probe) {
                        let src_half = src.rows[si].half;
                        entries.push(PlanEntry {
                            dst_row: di as u32,
                            src_row: si as u32,
                            shift: (src_half - row.half) / 2,
                        });
                    }
                }
            }
            if let Some(si) = src.row_index(&row.prefix) {
                let src_half = src.rows[si].half;
                for step in [-1, 1] {
                    entries.push(PlanEntry {
                        dst_row: di as u32,
                        src_row: si as u32,
                        shift: (src_half - row.half + step) / 2,
                    });
                }
            }
        }
        NeighborPlan { entries }
    }

    /// `out[x] = Σ_{|e|=1} src[x + e]`, treating sites outside `src` as zero.
    pub fn apply(&self, dst: &BallShape, src_shape: &BallShape, src: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), dst.len);
        debug_assert_eq!(src.len(), src_shape.len);
        out.fill(0.0);
        for e in &self.entries {
            let drow = &dst.rows[e.dst_row as usize];
            let srow = &src_shape.rows[e.src_row as usize];
            let dlen = drow.len() as i64;
            let slen = srow.len() as i64;
            let shift = e.shift as i64;
            let lo = 0.max(-shift);
            let hi = dlen.min(slen - shift);
            if lo >= hi {
                continue;
            }
            let n = (hi - lo) as usize;
            let d0 = drow.offset + lo as usize;
            let s0 = (srow.offset as i64 + lo + shift) as usize;
            for (o, s) in out[d0..d0 + n].iter_mut().zip(&src[s0..s0 + n]) {
                *o += *s;
            }
        }
    }
}

type PlanCache = Mutex<HashMap<(usize, u32, u32), Arc<NeighborPlan>>>;

pub(crate) fn neighbor_plan(dst: &BallShape, src: &BallShape) -> Arc<NeighborPlan> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    debug_assert_eq!(dst.dim, src.dim);
    debug_assert_eq!(dst.radius.abs_diff(src.radius), 1);
    let cache = CACHE.get_or_init(Default::default);
    let key = (dst.dim, dst.radius, src.radius);
    if let Some(plan) = cache.lock().unwrap().get(&key) {
        return plan.clone();
    }
    let plan = Arc::new(NeighborPlan::build(dst, src));
    cache.lock().unwrap().entry(key).or_insert_with(|| plan.clone());
    plan
}

/// Nearest-neighbour sum from `src` (values on `src_ball`) onto `dst_ball`.
///
/// Both balls must share a centre and differ in radius by exactly one.
pub(crate) fn neighbor_sum(dst_ball: &Ball, src_ball: &Ball, src: &[f64], out: &mut [f64]) {
    debug_assert_eq!(dst_ball.center, src_ball.center);
    let plan = neighbor_plan(&dst_ball.shape, &src_ball.shape);
    plan.apply(&dst_ball.shape, &src_ball.shape, src, out);
}
