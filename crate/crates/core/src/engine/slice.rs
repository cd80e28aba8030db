use crate::lattice::{ball_within, Ball};
use crate::numeric::pairwise_sum;

/// One time slice of a transfer-matrix sweep.
///
/// The represented values are `weights[i] · 2^scale`; keeping the offset as
/// a binary exponent makes renormalisation exact.
#[derive(Debug, Clone)]
pub struct SliceVector {
    pub(crate) time: i64,
    pub(crate) ball: Ball,
    pub(crate) weights: Vec<f64>,
    pub(crate) scale: i64,
}

impl SliceVector {
    pub fn new(time: i64, ball: Ball, weights: Vec<f64>) -> Self {
        assert_eq!(ball.len(), weights.len(), "one weight per site");
        SliceVector {
            time,
            ball,
            weights,
            scale: 0,
        }
    }

    /// Unit mass at `site`.
    pub(crate) fn delta(time: i64, site: &[i32]) -> Result<Self, crate::lattice::LatticeError> {
        Ok(SliceVector::new(time, Ball::new(site, 0)?, vec![1.0]))
    }

    pub fn time(&self) -> i64 {
        self.time
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    /// Stored mantissas, one per site of [`ball`](Self::ball) in dense order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Binary exponent of the common factor.
    pub fn scale_exp2(&self) -> i64 {
        self.scale
    }

    /// Natural log of the common factor: values are `weight · e^{log_offset}`.
    pub fn log_offset(&self) -> f64 {
        self.scale as f64 * std::f64::consts::LN_2
    }

    /// Represented value at `site`; `None` off the ball.
    pub fn value_at(&self, site: &[i32]) -> Option<f64> {
        let i = self.ball.index_of(site)?;
        Some(ldexp(self.weights[i], self.scale))
    }

    pub fn log_value_at(&self, site: &[i32]) -> Option<f64> {
        let i = self.ball.index_of(site)?;
        Some(self.weights[i].ln() + self.log_offset())
    }

    /// `ln Σ values`.
    pub fn log_total(&self) -> f64 {
        pairwise_sum(&self.weights).ln() + self.log_offset()
    }

    /// Represented values in dense order (may under- or overflow).
    pub fn values(&self) -> Vec<f64> {
        self.weights.iter().map(|w| ldexp(*w, self.scale)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<i32>, f64)> + '_ {
        self.ball
            .sites()
            .zip(self.weights.iter().map(move |w| ldexp(*w, self.scale)))
    }

    /// Mantissas on a sub-ball (same scale); `None` unless `sub` lies inside.
    pub fn restricted(&self, sub: &Ball) -> Option<Vec<f64>> {
        if !ball_within(sub, &self.ball) {
            return None;
        }
        let outer = self.ball.shape();
        let d = sub.dim();
        let delta: Vec<i32> = sub
            .center()
            .iter()
            .zip(self.ball.center())
            .map(|(a, b)| a - b)
            .collect();
        let mut out = vec![0.0; sub.len()];
        let mut prefix = vec![0i32; d - 1];
        for row in sub.shape().rows() {
            for ((p, r), c) in prefix.iter_mut().zip(row.prefix.iter()).zip(&delta) {
                *p = r + c;
            }
            let orow = &outer.rows()[outer.row_index(&prefix)?];
            let j0 = ((delta[d - 1] - row.half + orow.half) / 2) as usize;
            let src = orow.offset + j0;
            out[row.offset..row.offset + row.len()].copy_from_slice(&self.weights[src..src + row.len()]);
        }
        Some(out)
    }
}

/// `x · 2^k` for a wide exponent, saturating to 0 or ∞.
pub(crate) fn ldexp(x: f64, k: i64) -> f64 {
    let k = k.clamp(-2200, 2200) as i32;
    let half = k / 2;
    libm::ldexp(libm::ldexp(x, half), k - half)
}
