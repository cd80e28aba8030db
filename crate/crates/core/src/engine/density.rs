//! Densities of the environment seen from the polymer endpoint, their
//! limits, the local-limit factorisation and the h-transform kernel.

use crate::disorder::Environment;
use crate::lattice::{l1_norm, n_step_distribution, reachable, Ball};
use crate::numeric::pairwise_sum;

use super::polymer::Polymer;
use super::slice::{ldexp, SliceVector};
use super::EngineError;

/// Split of `q_N` along `W(x|0) = W_{−N,−N+l}(x) · g + R(x)`, with
/// `g = ←W_{−l,0}(0) e^{βη(0,0)−λ}`.
///
/// `main + remainder + far` reproduces `q` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct LltDecomposition {
    pub l: u32,
    pub window: f64,
    /// `←W_{−l,0}(0)`.
    pub backward_factor: f64,
    /// `e^{βη(0,0)−λ}`.
    pub site_factor: f64,
    /// `g · Σ_{|x|<A√N} p_N(x,0) W_{−N,−N+l}(x) / W_{−N,0}(x)`.
    pub main: f64,
    /// `Σ_{|x|<A√N} p_N(x,0) R(x) / W_{−N,0}(x)`.
    pub remainder: f64,
    /// `Σ_{|x|≥A√N} μ^x_{−N,0}(ω_N = 0)`.
    pub far: f64,
}

/// An evaluation of `q_N` (when `m == 0`) or `q_{N,M}`.
#[derive(Debug, Clone)]
pub struct DensityValue {
    pub n: u32,
    pub m: u32,
    pub q: f64,
    /// Starting points `x` at time `−N` (the ball of radius `N`).
    pub starts: Ball,
    /// `μ^x(ω_N = 0)` for each starting point, in the order of `starts`.
    pub contributions: Vec<f64>,
    pub llt: Option<LltDecomposition>,
}

impl DensityValue {
    /// Part of `q` carried by starting points with `|x|₁ ≥ a√N`.
    pub fn far_mass(&self, a: f64) -> f64 {
        let far: Vec<f64> = self
            .starts
            .sites()
            .zip(&self.contributions)
            .filter(|(x, _)| l1_norm(x) as f64 >= a * (self.n as f64).sqrt())
            .map(|(_, c)| *c)
            .collect();
        pairwise_sum(&far)
    }
}

/// `←W_{−K,0}(0) · e^{βη(0,0)−λ}`, optionally times `W_{0,M}(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitDensity {
    pub k: u32,
    pub backward_w: f64,
    pub site_factor: f64,
    pub forward_w: Option<f64>,
    pub value: f64,
}

/// The three factors of the local-limit split and what is left over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LltTerms {
    /// `W_{M,N}(x|y)`.
    pub conditional: f64,
    /// `W_{M,M+l}(x)`.
    pub forward_factor: f64,
    /// `←W_{N−l,N}(y)`.
    pub backward_factor: f64,
    /// `e^{βη(N,y)−λ}`.
    pub site_factor: f64,
    /// `R_{M,N}(x,y)`.
    pub remainder: f64,
}

/// One-step law of the finite-horizon h-transformed walk.
#[derive(Debug, Clone, PartialEq)]
pub struct HTransformKernel {
    /// Neighbours `x ± e_i` ordered by axis, minus before plus.
    pub targets: Vec<Vec<i32>>,
    pub probabilities: Vec<f64>,
}

fn origin(dim: usize) -> Vec<i32> {
    vec![0; dim]
}

impl<E: Environment> Polymer<E> {
    /// Point-to-point weights into `(0, 0)` from time `−n`, for each `n` in `ns`.
    fn pinned_at_origin(&self, ns: &[u32]) -> Result<Vec<SliceVector>, EngineError> {
        let n_max = ns.iter().copied().max().unwrap_or(0);
        let mut found: Vec<Option<SliceVector>> = vec![None; ns.len()];
        let top = SliceVector::delta(0, &origin(self.dim()))?;
        self.backward_sweep(top, -(n_max as i64), true, |s| {
            for (slot, &n) in found.iter_mut().zip(ns) {
                if s.time == -(n as i64) {
                    *slot = Some(s.clone());
                }
            }
        })?;
        Ok(found.into_iter().map(|s| s.expect("sweep visits every time")).collect())
    }

    /// `Z^x_{−n,horizon}` on `|x|₁ ≤ n` for each `n` in `ns` as
    /// `(mantissas, binary exponent)`, from one sweep.
    fn free_from_window(&self, ns: &[u32], horizon: i64) -> Result<Vec<(Vec<f64>, i64)>, EngineError> {
        let n_max = ns.iter().copied().max().unwrap_or(0);
        let d = self.dim();
        let top = self.free_top(horizon, -(n_max as i64), &origin(d), n_max)?;
        let mut found: Vec<Option<(Vec<f64>, i64)>> = vec![None; ns.len()];
        let mut failure = None;
        self.backward_sweep(top, -(n_max as i64), false, |s| {
            for (slot, &n) in found.iter_mut().zip(ns) {
                if s.time == -(n as i64) {
                    match Ball::origin(d, n) {
                        Ok(ball) => {
                            let w = s.restricted(&ball).expect("window ball inside the sweep");
                            *slot = Some((w, s.scale));
                        }
                        Err(e) => failure = Some(e),
                    }
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e.into());
        }
        Ok(found
            .into_iter()
            .map(|slot| slot.expect("sweep visits every time"))
            .collect())
    }

    /// `q_N = Σ_{|x|≤N} μ^x_{−N,0}(ω_N = 0)`.
    ///
    /// A stored field must cover `[−N, 0]` with slices of radius `2N + t`,
    /// i.e. the window `build_cone(d, −N, 0, (−2N, 0))`.
    pub fn density_qn(&self, n: u32) -> Result<DensityValue, EngineError> {
        Ok(self.density_qn_series(&[n])?.remove(0))
    }

    /// [`density_qn`](Self::density_qn) for several horizons, sharing two sweeps.
    pub fn density_qn_series(&self, ns: &[u32]) -> Result<Vec<DensityValue>, EngineError> {
        self.density_series(ns, 0)
    }

    /// `q_{N,M} = Σ_{|x|≤N} μ^x_{−N,M}(ω_N = 0)`, factorised at time 0 as
    /// `B_{−N}(x) · Z^0_{0,M} / Z^x_{−N,M}`.
    ///
    /// A stored field must cover `build_cone(d, −N, M, (−2N, 0))`.
    pub fn density_qnm(&self, n: u32, m: u32) -> Result<DensityValue, EngineError> {
        Ok(self.density_series(&[n], m)?.remove(0))
    }

    fn density_series(&self, ns: &[u32], m: u32) -> Result<Vec<DensityValue>, EngineError> {
        if ns.is_empty() {
            return Ok(Vec::new());
        }
        let d = self.dim();
        let pinned = self.pinned_at_origin(ns)?;
        let denominators = self.free_from_window(ns, m as i64)?;
        let z0m = if m == 0 {
            1.0
        } else {
            self.log_partition(0, m as i64, &origin(d))?.exp()
        };
        let mut out = Vec::with_capacity(ns.len());
        for ((&n, b), (den, den_scale)) in ns.iter().zip(&pinned).zip(&denominators) {
            let contributions: Vec<f64> = b
                .weights
                .iter()
                .zip(den)
                .map(|(bw, z)| ldexp(bw * z0m / z, b.scale - den_scale))
                .collect();
            out.push(DensityValue {
                n,
                m,
                q: pairwise_sum(&contributions),
                starts: b.ball.clone(),
                contributions,
                llt: None,
            });
        }
        Ok(out)
    }

    /// `q_N` with its local-limit split at `l` and window `|x|₁ < a√N`.
    pub fn density_qn_llt(&self, n: u32, l: u32, a: f64) -> Result<DensityValue, EngineError> {
        if l == 0 || l > n {
            return Err(EngineError::InvalidArgument(format!(
                "splitting length l = {l} must lie in 1..={n}"
            )));
        }
        let mut value = self.density_qn(n)?;
        let d = self.dim();
        let o = origin(d);
        let backward_factor = self.backward_w(-(l as i64), 0, &o)?;
        let site_factor = self.site_factor(0, &o)?;
        let g = backward_factor * site_factor;
        let nl = n as i64;
        let lambda = self.lambda();
        // W_{−N,−N+l}(x) for every x in the window ball, from one shrinking sweep.
        let short_top = self.free_top(-nl + l as i64, -nl, &o, n)?;
        let short = self.backward_sweep(short_top, -nl, false, |_| {})?;
        let w_short: Vec<f64> = short
            .weights
            .iter()
            .map(|w| (w.ln() + short.log_offset() - l as f64 * lambda).exp())
            .collect();
        let (free, free_scale) = self.free_from_window(&[n], 0)?.remove(0);
        let walk = n_step_distribution(d, n)?;
        let (mut main, mut rem, mut far) = (Vec::new(), Vec::new(), Vec::new());
        for (i, x) in value.starts.sites().enumerate() {
            let mu = value.contributions[i];
            if l1_norm(&x) as f64 >= a * (n as f64).sqrt() {
                far.push(mu);
                continue;
            }
            let w_full = ldexp(free[i], free_scale) * (-(nl as f64) * lambda).exp();
            let p = walk.transition(&x, &o);
            let m_term = g * p * w_short[i] / w_full;
            main.push(m_term);
            rem.push(mu - m_term);
        }
        value.llt = Some(LltDecomposition {
            l,
            window: a,
            backward_factor,
            site_factor,
            main: pairwise_sum(&main),
            remainder: pairwise_sum(&rem),
            far: pairwise_sum(&far),
        });
        Ok(value)
    }

    /// `←W_{−K,0}(0) e^{βη(0,0)−λ}`, times `W_{0,M}(0)` when `m` is given.
    pub fn limit_density(&self, k: u32, m: Option<u32>) -> Result<LimitDensity, EngineError> {
        let o = origin(self.dim());
        let backward_w = self.backward_w(-(k as i64), 0, &o)?;
        let site_factor = self.site_factor(0, &o)?;
        let forward_w = m.map(|m| self.normalized_w(0, m as i64, &o)).transpose()?;
        Ok(LimitDensity {
            k,
            backward_w,
            site_factor,
            forward_w,
            value: backward_w * site_factor * forward_w.unwrap_or(1.0),
        })
    }

    /// `R_{M,N}(x,y) = W(x|y) − W_{M,M+l}(x) ←W_{N−l,N}(y) e^{βη(N,y)−λ}`.
    pub fn llt_remainder(
        &self,
        start_time: i64,
        end_time: i64,
        start: &[i32],
        end: &[i32],
        l: u32,
    ) -> Result<LltTerms, EngineError> {
        let span = end_time - start_time;
        if l == 0 || 2 * l as i64 >= span {
            return Err(EngineError::InvalidArgument(format!(
                "splitting length l = {l} must satisfy 0 < l < {span}/2"
            )));
        }
        let conditional = self.conditional_w(start_time, end_time, start, end)?;
        let forward_factor = self.normalized_w(start_time, start_time + l as i64, start)?;
        let backward_factor = self.backward_w(end_time - l as i64, end_time, end)?;
        let site_factor = self.site_factor(end_time, end)?;
        Ok(LltTerms {
            conditional,
            forward_factor,
            backward_factor,
            site_factor,
            remainder: conditional - forward_factor * backward_factor * site_factor,
        })
    }

    /// [`llt_remainder`](Self::llt_remainder) on `[−N, 0]` with `y = 0` for
    /// several starting points, sharing the pinned sweep.
    pub fn llt_probes(&self, n: u32, l: u32, probes: &[Vec<i32>]) -> Result<Vec<LltTerms>, EngineError> {
        if l == 0 || 2 * l >= n {
            return Err(EngineError::InvalidArgument(format!(
                "splitting length l = {l} must satisfy 0 < l < {n}/2"
            )));
        }
        let d = self.dim();
        let o = origin(d);
        let nl = n as i64;
        let pinned = self.pinned_at_origin(&[n])?.remove(0);
        let walk = n_step_distribution(d, n)?;
        let backward_factor = self.backward_w(-(l as i64), 0, &o)?;
        let site_factor = self.site_factor(0, &o)?;
        let lambda = self.lambda();
        probes
            .iter()
            .map(|x| {
                if !reachable(x, &o, nl) {
                    return Err(EngineError::Unreachable {
                        from: x.clone(),
                        to: o.clone(),
                        steps: nl,
                    });
                }
                let b = pinned.weights[pinned.ball.index_of(x).expect("reachable start lies in the ball")];
                // p_N(0, x) is computed by the same recursion as the pinned sweep.
                let p = walk.mass(x);
                let conditional = ldexp(b / p, pinned.scale) * (-(nl as f64) * lambda).exp();
                let forward_factor = self.normalized_w(-nl, -nl + l as i64, x)?;
                Ok(LltTerms {
                    conditional,
                    forward_factor,
                    backward_factor,
                    site_factor,
                    remainder: conditional - forward_factor * backward_factor * site_factor,
                })
            })
            .collect()
    }

    /// Law of `ω_{N+1}` given `ω_N = x` under the polymer with horizon `T`:
    /// `(1/2d) e^{βη(N+1,x+e)−λ} W_{N+1,T}(x+e) / W_{N,T}(x)`.
    pub fn h_transform_kernel(&self, time: i64, site: &[i32], horizon: i64) -> Result<HTransformKernel, EngineError> {
        if horizon <= time {
            return Err(EngineError::InvalidArgument(format!(
                "horizon {horizon} must exceed the current time {time}"
            )));
        }
        let d = self.dim();
        let top = self.free_top(horizon, time, site, 0)?;
        let mut next: Option<SliceVector> = None;
        let here = self.backward_sweep(top, time, false, |s| {
            if s.time == time + 1 {
                next = Some(s.clone());
            }
        })?;
        let next = next.expect("sweep passes time N+1");
        let lambda = self.lambda();
        let log_w_here = here.log_total() - (horizon - time) as f64 * lambda;
        let mut targets = Vec::with_capacity(2 * d);
        let mut probabilities = Vec::with_capacity(2 * d);
        for axis in 0..d {
            for step in [-1, 1] {
                let mut y = site.to_vec();
                y[axis] += step;
                let log_w_next =
                    next.log_value_at(&y).expect("neighbour in ball") - (horizon - time - 1) as f64 * lambda;
                let factor = self.site_factor(time + 1, &y)?;
                probabilities.push(factor * (log_w_next - log_w_here).exp() / (2 * d) as f64);
                targets.push(y);
            }
        }
        Ok(HTransformKernel {
            targets,
            probabilities,
        })
    }
}
