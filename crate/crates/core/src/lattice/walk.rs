use super::ball::{neighbor_sum, Ball};
use super::LatticeError;

/// Exact law of the simple random walk after `time` steps from the origin.
#[derive(Debug, Clone)]
pub struct WalkDistribution {
    time: u32,
    ball: Ball,
    masses: Vec<f64>,
}

impl WalkDistribution {
    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn support(&self) -> &Ball {
        &self.ball
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `p_N(0, x)`; zero off the support.
    pub fn mass(&self, site: &[i32]) -> f64 {
        self.ball.index_of(site).map_or(0.0, |i| self.masses[i])
    }

    /// `p_N(x, y) = p_N(0, y − x)`.
    pub fn transition(&self, from: &[i32], to: &[i32]) -> f64 {
        let rel: Vec<i32> = to.iter().zip(from).map(|(y, x)| y - x).collect();
        self.mass(&rel)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<i32>, f64)> + '_ {
        self.ball.sites().zip(self.masses.iter().copied())
    }
}

/// `p_N` by iterated convolution with the uniform nearest-neighbour kernel.
pub fn n_step_distribution(dim: usize, steps: u32) -> Result<WalkDistribution, LatticeError> {
    let two_d = (2 * dim) as f64;
    let mut ball = Ball::origin(dim, 0)?;
    let mut masses = vec![1.0];
    for r in 1..=steps {
        let next_ball = ball.resized(r)?;
        let mut next = vec![0.0; next_ball.len()];
        neighbor_sum(&next_ball, &ball, &masses, &mut next);
        next.iter_mut().for_each(|m| *m /= two_d);
        ball = next_ball;
        masses = next;
    }
    Ok(WalkDistribution {
        time: steps,
        ball,
        masses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::pairwise_sum;

    #[test]
    fn identity_and_two_steps() {
        let p0 = n_step_distribution(1, 0).unwrap();
        assert_eq!(p0.mass(&[0]), 1.0);
        let p2 = n_step_distribution(1, 2).unwrap();
        assert_eq!(p2.mass(&[-2]), 0.25);
        assert_eq!(p2.mass(&[0]), 0.5);
        assert_eq!(p2.mass(&[2]), 0.25);
        assert_eq!(p2.mass(&[1]), 0.0);
    }

    #[test]
    fn normalized() {
        for dim in 1..=3 {
            for n in [0, 1, 5, 12] {
                let p = n_step_distribution(dim, n).unwrap();
                assert!((pairwise_sum(p.masses()) - 1.0).abs() < 1e-12);
            }
        }
    }
}
