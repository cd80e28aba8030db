use std::sync::Arc;

use super::ball::{ball_shape, ball_site_count, Ball, BallShape, MAX_SITES};
use super::LatticeError;

/// Space-time window `t_min ≤ t ≤ t_max` where slice `t` is the parity
/// ball of radius `|t − t_anchor|` around the anchor site.
///
/// The anchor time may lie outside the window; a window `[−N, 0]` anchored
/// at `−2N` is the light cone needed to evaluate every free partition
/// function started at time `−N` inside `|x|₁ ≤ N`.
#[derive(Debug, Clone)]
pub struct LatticeCone {
    dim: usize,
    t_min: i64,
    t_max: i64,
    anchor_time: i64,
    anchor_site: Box<[i32]>,
    slices: Vec<Arc<BallShape>>,
    slice_offsets: Vec<usize>,
    site_count: usize,
}

impl LatticeCone {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_min(&self) -> i64 {
        self.t_min
    }

    pub fn t_max(&self) -> i64 {
        self.t_max
    }

    pub fn anchor_time(&self) -> i64 {
        self.anchor_time
    }

    pub fn anchor_site(&self) -> &[i32] {
        &self.anchor_site
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn covers_time(&self, t: i64) -> bool {
        (self.t_min..=self.t_max).contains(&t)
    }

    /// Radius of slice `t`.
    pub fn radius_at(&self, t: i64) -> u32 {
        (t - self.anchor_time).unsigned_abs() as u32
    }

    /// The ball making up slice `t`, or `None` outside the window.
    pub fn slice(&self, t: i64) -> Option<Ball> {
        if !self.covers_time(t) {
            return None;
        }
        Ball::new(&self.anchor_site, self.radius_at(t)).ok()
    }

    pub(crate) fn slice_shape(&self, t: i64) -> Option<&Arc<BallShape>> {
        self.covers_time(t)
            .then(|| &self.slices[(t - self.t_min) as usize])
    }

    /// First dense index of slice `t`.
    pub fn slice_offset(&self, t: i64) -> Option<usize> {
        self.covers_time(t)
            .then(|| self.slice_offsets[(t - self.t_min) as usize])
    }

    /// Dense index of `(t, x)`.
    pub fn index_of(&self, t: i64, site: &[i32]) -> Option<usize> {
        let shape = self.slice_shape(t)?;
        if site.len() != self.dim {
            return None;
        }
        let rel: Vec<i32> = site
            .iter()
            .zip(self.anchor_site.iter())
            .map(|(x, a)| x - a)
            .collect();
        Some(self.slice_offset(t)? + shape.index_of(&rel)?)
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn site_at(&self, index: usize) -> Option<(i64, Vec<i32>)> {
        if index >= self.site_count {
            return None;
        }
        let s = self.slice_offsets.partition_point(|&o| o <= index) - 1;
        let t = self.t_min + s as i64;
        let mut site = self.slices[s].site_at(index - self.slice_offsets[s]);
        for (x, a) in site.iter_mut().zip(self.anchor_site.iter()) {
            *x += a;
        }
        Some((t, site))
    }

    /// Same geometry under `t ↦ −t`.
    pub fn reflected(&self) -> LatticeCone {
        let mut slices = self.slices.clone();
        slices.reverse();
        let mut slice_offsets = Vec::with_capacity(slices.len());
        let mut acc = 0;
        for s in &slices {
            slice_offsets.push(acc);
            acc += s.len();
        }
        LatticeCone {
            dim: self.dim,
            t_min: -self.t_max,
            t_max: -self.t_min,
            anchor_time: -self.anchor_time,
            anchor_site: self.anchor_site.clone(),
            slices,
            slice_offsets,
            site_count: acc,
        }
    }

    /// True when every site of `other` is a site of `self`.
    pub fn contains_cone(&self, other: &LatticeCone) -> bool {
        if other.dim != self.dim || other.t_min < self.t_min || other.t_max > self.t_max {
            return false;
        }
        (other.t_min..=other.t_max).all(|t| {
            let (Some(outer), Some(inner)) = (self.slice(t), other.slice(t)) else {
                return false;
            };
            ball_within(&inner, &outer)
        })
    }
}

impl PartialEq for LatticeCone {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.t_min() == other.t_min()
            && self.t_max() == other.t_max()
            && self.anchor_time() == other.anchor_time()
            && self.anchor_site() == other.anchor_site()
    }
}

/// True when every site of `inner` belongs to `outer`.
pub fn ball_within(inner: &Ball, outer: &Ball) -> bool {
    if inner.dim() != outer.dim() {
        return false;
    }
    let delta: i64 = inner
        .center()
        .iter()
        .zip(outer.center())
        .map(|(a, b)| (*a as i64 - *b as i64).abs())
        .sum();
    let parity: i64 = inner
        .center()
        .iter()
        .zip(outer.center())
        .map(|(a, b)| *a as i64 - *b as i64)
        .sum::<i64>()
        + inner.radius() as i64
        - outer.radius() as i64;
    delta + inner.radius() as i64 <= outer.radius() as i64 && parity.rem_euclid(2) == 0
}

/// Builds the cone `{(t, x): t_min ≤ t ≤ t_max, |x − anchor|₁ ≤ |t − t_anchor|, parity}`.
pub fn build_cone(
    dim: usize,
    t_min: i64,
    t_max: i64,
    anchor: (i64, &[i32]),
) -> Result<LatticeCone, LatticeError> {
    if dim == 0 {
        return Err(LatticeError::ZeroDimension);
    }
    if t_min > t_max {
        return Err(LatticeError::EmptyWindow { t_min, t_max });
    }
    let (anchor_time, anchor_site) = anchor;
    if anchor_site.len() != dim {
        return Err(LatticeError::DimensionMismatch {
            expected: dim,
            found: anchor_site.len(),
        });
    }
    let radius = |t: i64| -> Result<u32, LatticeError> {
        u32::try_from((t - anchor_time).unsigned_abs()).map_err(|_| LatticeError::Capacity {
            sites: u128::MAX,
            limit: MAX_SITES,
        })
    };
    // Count first so absurd windows fail before anything is allocated.
    let mut total: u128 = 0;
    for t in t_min..=t_max {
        let n = ball_site_count(dim, radius(t)?).unwrap_or(u128::MAX);
        total = total.saturating_add(n);
        if total > MAX_SITES {
            return Err(LatticeError::Capacity {
                sites: total,
                limit: MAX_SITES,
            });
        }
    }
    let mut slices = Vec::with_capacity((t_max - t_min + 1) as usize);
    let mut slice_offsets = Vec::with_capacity(slices.capacity());
    let mut acc = 0usize;
    for t in t_min..=t_max {
        let shape = ball_shape(dim, radius(t)?)?;
        slice_offsets.push(acc);
        acc += shape.len();
        slices.push(shape);
    }
    Ok(LatticeCone {
        dim,
        t_min,
        t_max,
        anchor_time,
        anchor_site: anchor_site.into(),
        slices,
        slice_offsets,
        site_count: acc,
    })
}

/// Forward cone `[0, n]` opening from `(0, 0)`.
pub fn forward_cone(dim: usize, n: i64) -> Result<LatticeCone, LatticeError> {
    build_cone(dim, 0, n, (0, &vec![0; dim]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_forward_slices() {
        let cone = forward_cone(1, 2).unwrap();
        let sizes: Vec<_> = (0..=2).map(|t| cone.slice(t).unwrap().len()).collect();
        assert_eq!(sizes, vec![1, 2, 3]);
        assert_eq!(cone.index_of(1, &[1]), Some(2));
        assert_eq!(cone.index_of(2, &[-2]), Some(3));
        assert_eq!(cone.index_of(2, &[1]), None);
    }

    #[test]
    fn d3_first_two_slices() {
        let cone = forward_cone(3, 1).unwrap();
        assert_eq!(cone.slice(0).unwrap().len(), 1);
        assert_eq!(cone.slice(1).unwrap().len(), 6);
        assert_eq!(cone.site_count(), 7);
    }

    #[test]
    fn index_round_trip_with_outside_anchor() {
        let cone = build_cone(2, -3, 0, (-6, &[0, 0])).unwrap();
        for i in 0..cone.site_count() {
            let (t, x) = cone.site_at(i).unwrap();
            assert_eq!(cone.index_of(t, &x), Some(i));
        }
        assert_eq!(cone.radius_at(-3), 3);
        assert_eq!(cone.radius_at(0), 6);
    }

    #[test]
    fn reflection_flips_time() {
        let cone = build_cone(1, -2, 1, (-1, &[0])).unwrap();
        let r = cone.reflected();
        assert_eq!((r.t_min(), r.t_max(), r.anchor_time()), (-1, 2, 1));
        for t in -2..=1 {
            assert_eq!(cone.slice(t).unwrap().len(), r.slice(-t).unwrap().len());
        }
    }

    #[test]
    fn invalid_windows() {
        assert!(matches!(
            build_cone(1, 3, 2, (3, &[0])),
            Err(LatticeError::EmptyWindow { .. })
        ));
        assert!(matches!(
            build_cone(3, 0, 100_000, (0, &[0, 0, 0])),
            Err(LatticeError::Capacity { .. })
        ));
        assert!(matches!(build_cone(0, 0, 1, (0, &[])), Err(LatticeError::ZeroDimension)));
    }

    #[test]
    fn containment() {
        let big = build_cone(2, -2, 0, (-4, &[0, 0])).unwrap();
        let small = build_cone(2, -2, 0, (0, &[0, 0])).unwrap();
        assert!(big.contains_cone(&small));
        assert!(!small.contains_cone(&big));
    }
}
