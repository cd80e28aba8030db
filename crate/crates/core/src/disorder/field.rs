use crate::lattice::{ball_within, Ball, LatticeCone};

use super::law::DisorderLaw;
use super::rng::StreamKey;
use super::DisorderError;

/// Anything that can report disorder values on parity balls.
///
/// Implementations must be pure: the same `(time, ball)` always yields the
/// same values.
pub trait Environment: Sync {
    fn dim(&self) -> usize;

    /// Writes `η(time, x)` for every site of `ball`, in the ball's dense order.
    fn fill(&self, time: i64, ball: &Ball, out: &mut [f64]) -> Result<(), DisorderError>;

    fn value(&self, time: i64, site: &[i32]) -> Result<f64, DisorderError> {
        let ball = Ball::new(site, 0)?;
        let mut out = [0.0];
        self.fill(time, &ball, &mut out)?;
        Ok(out[0])
    }
}

impl<E: Environment + ?Sized> Environment for &E {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn fill(&self, time: i64, ball: &Ball, out: &mut [f64]) -> Result<(), DisorderError> {
        (**self).fill(time, ball, out)
    }
}

/// The unbounded environment of one `(master_seed, sample_index)` pair.
///
/// Values are generated on demand, so windows of any shape can be read from
/// the same sample and always agree where they overlap.
#[derive(Debug, Clone, Copy)]
pub struct SampledEnvironment {
    dim: usize,
    law: DisorderLaw,
    master_seed: u64,
    sample_index: u64,
    key: StreamKey,
}

impl SampledEnvironment {
    pub fn new(dim: usize, law: DisorderLaw, master_seed: u64, sample_index: u64) -> Self {
        SampledEnvironment {
            dim,
            law,
            master_seed,
            sample_index,
            key: StreamKey::new(master_seed, sample_index),
        }
    }

    pub fn law(&self) -> DisorderLaw {
        self.law
    }

    pub fn provenance(&self) -> Provenance {
        Provenance::Sampled {
            master_seed: self.master_seed,
            sample_index: self.sample_index,
        }
    }
}

impl Environment for SampledEnvironment {
    fn dim(&self) -> usize {
        self.dim
    }

    fn fill(&self, time: i64, ball: &Ball, out: &mut [f64]) -> Result<(), DisorderError> {
        if ball.dim() != self.dim {
            return Err(DisorderError::DimensionMismatch {
                expected: self.dim,
                found: ball.dim(),
            });
        }
        let center = ball.center();
        let (c_last, c_prefix) = center.split_last().expect("nonzero dimension");
        let mut prefix = vec![0i32; self.dim - 1];
        for row in ball.shape().rows() {
            for ((p, r), c) in prefix.iter_mut().zip(row.prefix.iter()).zip(c_prefix) {
                *p = r + c;
            }
            let row_key = self.key.row(time, &prefix);
            let slot = &mut out[row.offset..row.offset + row.len()];
            let start = c_last - row.half;
            for (k, v) in slot.iter_mut().enumerate() {
                let bits = StreamKey::site(row_key, start + 2 * k as i32);
                *v = self.law.sample_from_bits(bits);
            }
        }
        Ok(())
    }
}

/// `η ↦ ←η` with `←η(t, x) = η(−t, x)`, applied lazily.
#[derive(Debug, Clone, Copy)]
pub struct TimeReversed<E>(pub E);

impl<E: Environment> Environment for TimeReversed<E> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn fill(&self, time: i64, ball: &Ball, out: &mut [f64]) -> Result<(), DisorderError> {
        self.0.fill(-time, ball, out)
    }
}

/// Where a stored field came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Sampled { master_seed: u64, sample_index: u64 },
    /// The `index`-th sign pattern of an exhaustive enumeration.
    Enumerated { index: u64 },
}

/// Disorder values stored on a cone window.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentField {
    pub(crate) cone: LatticeCone,
    pub(crate) law: DisorderLaw,
    pub(crate) values: Vec<f64>,
    pub(crate) provenance: Provenance,
}

impl EnvironmentField {
    pub fn from_values(
        cone: LatticeCone,
        law: DisorderLaw,
        values: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self, DisorderError> {
        if values.len() != cone.site_count() {
            return Err(DisorderError::SizeMismatch {
                expected: cone.site_count(),
                found: values.len(),
            });
        }
        Ok(EnvironmentField {
            cone,
            law,
            values,
            provenance,
        })
    }

    pub fn cone(&self) -> &LatticeCone {
        &self.cone
    }

    pub fn law(&self) -> DisorderLaw {
        self.law
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Copies the sub-window `cone` out of this field.
    pub fn restrict(&self, cone: &LatticeCone) -> Result<EnvironmentField, DisorderError> {
        if !self.cone.contains_cone(cone) {
            return Err(DisorderError::OutsideWindow {
                time: cone.t_min(),
                detail: "requested cone is not contained in the stored window".into(),
            });
        }
        let mut values = vec![0.0; cone.site_count()];
        for t in cone.t_min()..=cone.t_max() {
            let ball = cone.slice(t).expect("time inside window");
            let off = cone.slice_offset(t).expect("time inside window");
            self.fill(t, &ball, &mut values[off..off + ball.len()])?;
        }
        Ok(EnvironmentField {
            cone: cone.clone(),
            law: self.law,
            values,
            provenance: self.provenance,
        })
    }
}

impl Environment for EnvironmentField {
    fn dim(&self) -> usize {
        self.cone.dim()
    }

    fn fill(&self, time: i64, ball: &Ball, out: &mut [f64]) -> Result<(), DisorderError> {
        let outer = self.cone.slice(time).ok_or_else(|| DisorderError::OutsideWindow {
            time,
            detail: format!(
                "time outside stored window [{}, {}]",
                self.cone.t_min(),
                self.cone.t_max()
            ),
        })?;
        if !ball_within(ball, &outer) {
            return Err(DisorderError::OutsideWindow {
                time,
                detail: format!(
                    "ball of radius {} at {:?} leaves the stored slice of radius {}",
                    ball.radius(),
                    ball.center(),
                    outer.radius()
                ),
            });
        }
        let shape = outer.shape();
        let base = self.cone.slice_offset(time).expect("time inside window");
        let d = ball.dim();
        let delta: Vec<i32> = ball
            .center()
            .iter()
            .zip(outer.center())
            .map(|(a, b)| a - b)
            .collect();
        let mut prefix = vec![0i32; d - 1];
        for row in ball.shape().rows() {
            for ((p, r), c) in prefix.iter_mut().zip(row.prefix.iter()).zip(&delta) {
                *p = r + c;
            }
            let frow = &shape.rows()[shape.row_index(&prefix).expect("containment checked")];
            let j0 = ((delta[d - 1] - row.half + frow.half) / 2) as usize;
            let src = base + frow.offset + j0;
            out[row.offset..row.offset + row.len()].copy_from_slice(&self.values[src..src + row.len()]);
        }
        Ok(())
    }
}

/// Materializes the sample `(master_seed, sample_index)` on `cone`.
pub fn sample_environment(
    cone: &LatticeCone,
    law: DisorderLaw,
    master_seed: u64,
    sample_index: u64,
) -> EnvironmentField {
    let source = SampledEnvironment::new(cone.dim(), law, master_seed, sample_index);
    let mut values = vec![0.0; cone.site_count()];
    for t in cone.t_min()..=cone.t_max() {
        let ball = cone.slice(t).expect("time inside window");
        let off = cone.slice_offset(t).expect("time inside window");
        source
            .fill(t, &ball, &mut values[off..off + ball.len()])
            .expect("dimensions agree");
    }
    EnvironmentField {
        cone: cone.clone(),
        law,
        values,
        provenance: source.provenance(),
    }
}

/// Largest cone that [`enumerate_environments`] accepts.
pub const MAX_ENUMERATED_SITES: usize = 24;

/// Every Rademacher sign pattern on `cone`, each with probability `2^{-n}`.
///
/// Pattern `k` puts `+1` on site `i` when bit `i` of `k` is set.
pub fn enumerate_environments(
    cone: &LatticeCone,
) -> Result<impl Iterator<Item = (EnvironmentField, f64)> + '_, DisorderError> {
    let n = cone.site_count();
    if n > MAX_ENUMERATED_SITES {
        return Err(DisorderError::TooManySites {
            sites: n,
            limit: MAX_ENUMERATED_SITES,
        });
    }
    let prob = 0.5f64.powi(n as i32);
    Ok((0..1u64 << n).map(move |k| {
        let values = (0..n)
            .map(|i| if (k >> i) & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        let field = EnvironmentField {
            cone: cone.clone(),
            law: DisorderLaw::Rademacher,
            values,
            provenance: Provenance::Enumerated { index: k },
        };
        (field, prob)
    }))
}

/// Materialized `←η` on the reflected cone.
pub fn time_reverse(field: &EnvironmentField) -> EnvironmentField {
    let cone = field.cone.reflected();
    let mut values = Vec::with_capacity(field.values.len());
    for t in (field.cone.t_min()..=field.cone.t_max()).rev() {
        let off = field.cone.slice_offset(t).expect("time inside window");
        let len = field.cone.slice(t).expect("time inside window").len();
        values.extend_from_slice(&field.values[off..off + len]);
    }
    EnvironmentField {
        cone,
        law: field.law,
        values,
        provenance: field.provenance,
    }
}
