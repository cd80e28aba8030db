use crate::disorder::{Environment, ModelParams, TimeReversed};
use crate::lattice::{l1_norm, n_step_distribution, neighbor_sum, reachable, Ball};
use crate::numeric::{normalize_exp2, pairwise_sum};

use super::slice::{ldexp, SliceVector};
use super::EngineError;

/// Renormalise once the largest weight leaves `[2^-LIMIT, 2^LIMIT]`.
const RENORM_LIMIT: i32 = 450;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Rescale after every slice instead of only when the range demands it.
    pub renormalize_every_slice: bool,
}

/// Free-endpoint partition function and polymer marginals from one base point.
#[derive(Debug, Clone)]
pub struct PartitionSet {
    pub start_time: i64,
    pub end_time: i64,
    pub start: Vec<i32>,
    /// `ln Z^x_{M,N}`.
    pub log_z: f64,
    /// `W_{M,N}(x) = Z e^{−(N−M)λ}`.
    pub w: f64,
    /// Endpoint-resolved weights at time `N`.
    pub point_to_point: SliceVector,
    /// `μ(ω_t = ·)` for `t = M..=N`, as probabilities (scale 0).
    pub marginals: Vec<SliceVector>,
}

/// First and second moments of the endpoint displacement under the polymer measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointMoments {
    pub mean: Vec<f64>,
    /// Row-major `d × d` matrix of `E_μ[(ω_N − x)_i (ω_N − x)_j]`.
    pub second_moment: Vec<f64>,
    pub mean_square: f64,
}

/// Transfer-matrix evaluator for one environment and one `(β, λ)`.
pub struct Polymer<E> {
    env: E,
    dim: usize,
    beta: f64,
    lambda: f64,
    options: SweepOptions,
}

impl<E: Environment> Polymer<E> {
    pub fn new(env: E, params: &ModelParams) -> Result<Self, EngineError> {
        if env.dim() != params.dim {
            return Err(EngineError::InvalidArgument(format!(
                "environment has dimension {}, parameters say {}",
                env.dim(),
                params.dim
            )));
        }
        Ok(Polymer {
            dim: params.dim,
            env,
            beta: params.beta,
            lambda: params.lambda,
            options: SweepOptions::default(),
        })
    }

    pub fn with_options(mut self, options: SweepOptions) -> Self {
        self.options = options;
        self
    }

    pub fn env(&self) -> &E {
        &self.env
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn options(&self) -> SweepOptions {
        self.options
    }

    /// The same polymer on `←η(t, x) = η(−t, x)`.
    pub fn reversed(&self) -> Polymer<TimeReversed<&E>> {
        Polymer {
            env: TimeReversed(&self.env),
            dim: self.dim,
            beta: self.beta,
            lambda: self.lambda,
            options: self.options,
        }
    }

    fn check_site(&self, site: &[i32]) -> Result<(), EngineError> {
        if site.len() != self.dim {
            return Err(EngineError::InvalidArgument(format!(
                "site {site:?} is not {}-dimensional",
                self.dim
            )));
        }
        Ok(())
    }

    fn check_times(&self, from: i64, to: i64) -> Result<(), EngineError> {
        if from > to {
            return Err(EngineError::InvalidArgument(format!(
                "time window [{from}, {to}] is empty"
            )));
        }
        Ok(())
    }

    /// `values[i] *= e^{β η(time, site_i)}`.
    pub(crate) fn weigh(&self, time: i64, ball: &Ball, values: &mut [f64]) -> Result<(), EngineError> {
        let mut eta = vec![0.0; ball.len()];
        self.env.fill(time, ball, &mut eta)?;
        if self.beta == 0.0 {
            return Ok(());
        }
        for (v, e) in values.iter_mut().zip(&eta) {
            *v *= libm::exp(self.beta * e);
        }
        Ok(())
    }

    pub(crate) fn site_factor(&self, time: i64, site: &[i32]) -> Result<f64, EngineError> {
        let eta = self.env.value(time, site)?;
        Ok(libm::exp(self.beta * eta - self.lambda))
    }

    fn renormalize(&self, v: &mut SliceVector) -> Result<(), EngineError> {
        let max = v.weights.iter().copied().fold(0.0f64, f64::max);
        let in_range = max >= libm::ldexp(1.0, -RENORM_LIMIT) && max <= libm::ldexp(1.0, RENORM_LIMIT);
        if in_range && !self.options.renormalize_every_slice {
            return Ok(());
        }
        let k = normalize_exp2(&mut v.weights).ok_or_else(|| EngineError::NumericRange {
            time: v.time,
            detail: format!("slice weights degenerate (max = {max:e})"),
        })?;
        v.scale += k as i64;
        Ok(())
    }

    /// `next(y) = (1/2d) e^{β η(t+1, y)} Σ_e cur(y − e)` on the ball one larger.
    fn forward_step(&self, cur: &SliceVector) -> Result<SliceVector, EngineError> {
        let ball = cur.ball.resized(cur.ball.radius() + 1)?;
        let mut out = vec![0.0; ball.len()];
        neighbor_sum(&ball, &cur.ball, &cur.weights, &mut out);
        let time = cur.time + 1;
        self.weigh(time, &ball, &mut out)?;
        let two_d = (2 * self.dim) as f64;
        out.iter_mut().for_each(|v| *v /= two_d);
        let mut next = SliceVector {
            time,
            ball,
            weights: out,
            scale: cur.scale,
        };
        self.renormalize(&mut next)?;
        Ok(next)
    }

    /// `prev(x) = (1/2d) Σ_e e^{β η(t, x+e)} cur(x + e)` onto a ball of radius `radius`.
    fn backward_step(&self, cur: &SliceVector, radius: u32) -> Result<SliceVector, EngineError> {
        let mut weighted = cur.weights.clone();
        self.weigh(cur.time, &cur.ball, &mut weighted)?;
        let ball = cur.ball.resized(radius)?;
        let mut out = vec![0.0; ball.len()];
        neighbor_sum(&ball, &cur.ball, &weighted, &mut out);
        let two_d = (2 * self.dim) as f64;
        out.iter_mut().for_each(|v| *v /= two_d);
        let mut prev = SliceVector {
            time: cur.time - 1,
            ball,
            weights: out,
            scale: cur.scale,
        };
        self.renormalize(&mut prev)?;
        Ok(prev)
    }

    /// Forward sweep from `(start_time, start)`, calling `visit` on every slice
    /// (including the initial unit mass); returns the slice at `end_time`.
    pub fn forward_sweep(
        &self,
        start_time: i64,
        start: &[i32],
        end_time: i64,
        mut visit: impl FnMut(&SliceVector),
    ) -> Result<SliceVector, EngineError> {
        self.check_site(start)?;
        self.check_times(start_time, end_time)?;
        let mut cur = SliceVector::delta(start_time, start)?;
        visit(&cur);
        while cur.time < end_time {
            cur = self.forward_step(&cur)?;
            visit(&cur);
        }
        Ok(cur)
    }

    /// Backward sweep from `top` down to `bottom_time`. Radii grow by one per
    /// step when `grow`, otherwise shrink. `visit` sees every slice, top first.
    pub fn backward_sweep(
        &self,
        top: SliceVector,
        bottom_time: i64,
        grow: bool,
        mut visit: impl FnMut(&SliceVector),
    ) -> Result<SliceVector, EngineError> {
        self.check_times(bottom_time, top.time)?;
        if !grow && (top.ball.radius() as i64) < top.time - bottom_time {
            return Err(EngineError::InvalidArgument(format!(
                "a shrinking sweep from radius {} cannot span {} steps",
                top.ball.radius(),
                top.time - bottom_time
            )));
        }
        let mut cur = top;
        visit(&cur);
        while cur.time > bottom_time {
            let r = cur.ball.radius();
            cur = self.backward_step(&cur, if grow { r + 1 } else { r - 1 })?;
            visit(&cur);
        }
        Ok(cur)
    }

    /// Slices `t = M..=N` of path weights from `(M, x)`, resolved by position.
    pub fn forward_point_to_point(
        &self,
        start_time: i64,
        start: &[i32],
        end_time: i64,
    ) -> Result<Vec<SliceVector>, EngineError> {
        let mut out = Vec::new();
        self.forward_sweep(start_time, start, end_time, |s| out.push(s.clone()))?;
        Ok(out)
    }

    /// `Z^x_{t,N}` for all `(t, x)` with `M ≤ t ≤ N` and `x` in the ball of
    /// radius `radius + (t − M)` around `center`; ascending in time.
    pub fn backward_free(
        &self,
        horizon: i64,
        start_time: i64,
        center: &[i32],
        radius: u32,
    ) -> Result<Vec<SliceVector>, EngineError> {
        let top = self.free_top(horizon, start_time, center, radius)?;
        let mut out = Vec::new();
        self.backward_sweep(top, start_time, false, |s| out.push(s.clone()))?;
        out.reverse();
        Ok(out)
    }

    pub(crate) fn free_top(
        &self,
        horizon: i64,
        start_time: i64,
        center: &[i32],
        radius: u32,
    ) -> Result<SliceVector, EngineError> {
        self.check_site(center)?;
        self.check_times(start_time, horizon)?;
        let top_radius = u32::try_from(radius as i64 + horizon - start_time)
            .map_err(|_| EngineError::InvalidArgument("horizon too far".into()))?;
        let ball = Ball::new(center, top_radius)?;
        let n = ball.len();
        Ok(SliceVector::new(horizon, ball, vec![1.0; n]))
    }

    /// Path weights from every `(t, x)`, `t = M..=N`, to the point `(N, y)`; ascending in time.
    pub fn backward_to_point(
        &self,
        start_time: i64,
        end_time: i64,
        end: &[i32],
    ) -> Result<Vec<SliceVector>, EngineError> {
        self.check_site(end)?;
        let mut out = Vec::new();
        self.backward_sweep(SliceVector::delta(end_time, end)?, start_time, true, |s| {
            out.push(s.clone())
        })?;
        out.reverse();
        Ok(out)
    }

    /// `ln Z^x_{M,N}`.
    pub fn log_partition(&self, start_time: i64, end_time: i64, start: &[i32]) -> Result<f64, EngineError> {
        Ok(self.forward_sweep(start_time, start, end_time, |_| {})?.log_total())
    }

    /// `W_{M,N}(x) = Z^x_{M,N} e^{−(N−M)λ}`, by a shrinking backward sweep.
    pub fn normalized_w(&self, start_time: i64, end_time: i64, start: &[i32]) -> Result<f64, EngineError> {
        let top = self.free_top(end_time, start_time, start, 0)?;
        let z = self.backward_sweep(top, start_time, false, |_| {})?;
        Ok(ldexp(z.weights[0], z.scale) * (-((end_time - start_time) as f64) * self.lambda).exp())
    }

    /// `W_{M,M+k}(x)` for `k = 0..=steps` from a single sweep.
    pub fn w_series(&self, start_time: i64, start: &[i32], steps: u32) -> Result<Vec<f64>, EngineError> {
        let mut out = Vec::with_capacity(steps as usize + 1);
        let lambda = self.lambda;
        self.forward_sweep(start_time, start, start_time + steps as i64, |s| {
            let k = (s.time - start_time) as f64;
            out.push((s.log_total() - k * lambda).exp());
        })?;
        Ok(out)
    }

    /// `←W_{M,N}(y)`: the forward recursion on the time-reversed environment.
    pub fn backward_w(&self, start_time: i64, end_time: i64, end: &[i32]) -> Result<f64, EngineError> {
        self.reversed().normalized_w(-end_time, -start_time, end)
    }

    /// `W_{M,N}(x | y)`: the pinned weight divided by `p_{N−M}(x, y)`.
    pub fn conditional_w(
        &self,
        start_time: i64,
        end_time: i64,
        start: &[i32],
        end: &[i32],
    ) -> Result<f64, EngineError> {
        self.check_site(end)?;
        let steps = end_time - start_time;
        if !reachable(start, end, steps) {
            return Err(EngineError::Unreachable {
                from: start.to_vec(),
                to: end.to_vec(),
                steps,
            });
        }
        let last = self.forward_sweep(start_time, start, end_time, |_| {})?;
        let w = last.weights[last.ball.index_of(end).expect("reachable endpoint lies in the ball")];
        let p = n_step_distribution(self.dim, steps as u32)?.transition(start, end);
        Ok(ldexp(w / p, last.scale) * (-(steps as f64) * self.lambda).exp())
    }

    /// Everything the forward/backward pair yields from one base point.
    pub fn partition(&self, start_time: i64, end_time: i64, start: &[i32]) -> Result<PartitionSet, EngineError> {
        let forward = self.forward_point_to_point(start_time, start, end_time)?;
        let backward = self.backward_free(end_time, start_time, start, 0)?;
        let zb = &backward[0];
        let log_z = zb.log_total();
        let marginals = forward
            .iter()
            .zip(&backward)
            .map(|(f, b)| {
                debug_assert_eq!(f.ball.len(), b.ball.len());
                let scale = f.scale + b.scale - zb.scale;
                let weights = f
                    .weights
                    .iter()
                    .zip(&b.weights)
                    .map(|(x, y)| ldexp(x * y / zb.weights[0], scale))
                    .collect();
                SliceVector::new(f.time, f.ball.clone(), weights)
            })
            .collect();
        Ok(PartitionSet {
            start_time,
            end_time,
            start: start.to_vec(),
            log_z,
            w: (log_z - (end_time - start_time) as f64 * self.lambda).exp(),
            point_to_point: forward.last().expect("non-empty sweep").clone(),
            marginals,
        })
    }

    /// `μ^x_{M,N}(ω_t = ·)` for `t = M..=N`.
    pub fn path_marginals(&self, start_time: i64, end_time: i64, start: &[i32]) -> Result<Vec<SliceVector>, EngineError> {
        Ok(self.partition(start_time, end_time, start)?.marginals)
    }

    /// `⟨L_N⟩ = Σ_{t=1..N} Σ_z μ(ω_t = z)²` under two replicas.
    pub fn replica_overlap(&self, start_time: i64, end_time: i64, start: &[i32]) -> Result<f64, EngineError> {
        let marginals = self.path_marginals(start_time, end_time, start)?;
        let per_time: Vec<f64> = marginals[1..]
            .iter()
            .map(|m| {
                let sq: Vec<f64> = m.weights.iter().map(|p| p * p).collect();
                pairwise_sum(&sq)
            })
            .collect();
        Ok(pairwise_sum(&per_time))
    }

    /// Displacement moments of `ω_N − x` under `μ^x_{M,N}`.
    pub fn endpoint_moments(&self, start_time: i64, end_time: i64, start: &[i32]) -> Result<EndpointMoments, EngineError> {
        let last = self.forward_sweep(start_time, start, end_time, |_| {})?;
        let d = self.dim;
        let total = pairwise_sum(&last.weights);
        let mut mean_terms = vec![Vec::with_capacity(last.weights.len()); d];
        let mut second_terms = vec![Vec::with_capacity(last.weights.len()); d * d];
        for (site, w) in last.ball.sites().zip(&last.weights) {
            let p = w / total;
            for i in 0..d {
                let zi = (site[i] - start[i]) as f64;
                mean_terms[i].push(p * zi);
                for j in 0..d {
                    let zj = (site[j] - start[j]) as f64;
                    second_terms[i * d + j].push(p * zi * zj);
                }
            }
        }
        let mean: Vec<f64> = mean_terms.iter().map(|v| pairwise_sum(v)).collect();
        let second_moment: Vec<f64> = second_terms.iter().map(|v| pairwise_sum(v)).collect();
        let mean_square = (0..d).map(|i| second_moment[i * d + i]).sum();
        Ok(EndpointMoments {
            mean,
            second_moment,
            mean_square,
        })
    }

    /// `E_μ |ω_N − x|²`.
    pub fn endpoint_mean_square(&self, start_time: i64, end_time: i64, start: &[i32]) -> Result<f64, EngineError> {
        Ok(self.endpoint_moments(start_time, end_time, start)?.mean_square)
    }
}

/// True when `site` is within ℓ¹ distance `a · √n` of the origin (strict).
pub fn within_diffusive_window(site: &[i32], a: f64, n: u32) -> bool {
    (l1_norm(site) as f64) < a * (n as f64).sqrt()
}
