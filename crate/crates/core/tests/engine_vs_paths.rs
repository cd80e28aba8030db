use polymerlab::disorder::{
    enumerate_environments, sample_environment, time_reverse, DisorderLaw, ModelParams, SampledEnvironment,
};
use polymerlab::engine::{EngineError, Polymer, SweepOptions};
use polymerlab::lattice::{build_cone, collision_series, n_step_distribution};
use polymerlab_oracle::{density_qn, pair_overlap_moment, parity_ball, PathSums};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn params(dim: usize, beta: f64, law: DisorderLaw) -> ModelParams {
    ModelParams::new(dim, beta, law).unwrap()
}

#[test]
fn partition_objects_match_enumeration() {
    for dim in 1..=3 {
        for n in 0..=4usize {
            for seed in 0..3u64 {
                let p = params(dim, 0.6, DisorderLaw::StandardGaussian);
                let env = SampledEnvironment::new(dim, p.law, seed, 17);
                let poly = Polymer::new(&env, &p).unwrap();
                let mut start = vec![0; dim];
                start[0] = seed as i32 - 1;
                let m = -2i64;
                let brute = PathSums::new(&env, p.beta, m, &start, n);
                let set = poly.partition(m, m + n as i64, &start).unwrap();
                assert!(rel(set.log_z.exp(), brute.z) < 1e-10);
                assert!(rel(set.w, brute.w(p.lambda)) < 1e-10);
                assert!(rel(poly.normalized_w(m, m + n as i64, &start).unwrap(), brute.w(p.lambda)) < 1e-10);
                for (y, w) in &brute.endpoint {
                    assert!(rel(set.point_to_point.value_at(y).unwrap(), *w) < 1e-10);
                    let c = poly.conditional_w(m, m + n as i64, &start, y).unwrap();
                    assert!(rel(c, brute.conditional(y, p.lambda).unwrap()) < 1e-10);
                }
                for t in 1..=n {
                    let marg = &set.marginals[t];
                    let total: f64 = marg.weights().iter().sum();
                    assert!((total - 1.0).abs() < 1e-10);
                    for (z, mu) in &brute.marginals[t - 1] {
                        assert!(rel(marg.value_at(z).unwrap(), *mu) < 1e-10);
                    }
                }
                if n > 0 {
                    let ms = poly.endpoint_mean_square(m, m + n as i64, &start).unwrap();
                    assert!(rel(ms, brute.mean_square(&start)) < 1e-10);
                }
            }
        }
    }
}

#[test]
fn density_matches_enumeration() {
    for dim in 1..=3 {
        for n in 1..=4usize {
            for seed in 0..2u64 {
                let p = params(dim, 0.8, DisorderLaw::UniformBounded);
                let env = SampledEnvironment::new(dim, p.law, seed, 3);
                let poly = Polymer::new(&env, &p).unwrap();
                let q = poly.density_qn(n as u32).unwrap().q;
                assert!(rel(q, density_qn(&env, p.beta, n)) < 1e-10, "d={dim} n={n}");
            }
        }
    }
}

#[test]
fn stored_window_suffices_for_density() {
    let p = params(2, 0.5, DisorderLaw::StandardGaussian);
    let n = 3;
    let cone = build_cone(2, -(n as i64), 0, (-2 * n as i64, &[0, 0])).unwrap();
    let field = sample_environment(&cone, p.law, 9, 9);
    let lazy = SampledEnvironment::new(2, p.law, 9, 9);
    let a = Polymer::new(&field, &p).unwrap().density_qn(n).unwrap().q;
    let b = Polymer::new(&lazy, &p).unwrap().density_qn(n).unwrap().q;
    assert_eq!(a, b);

    let short = build_cone(2, -1, 0, (-2 * n as i64, &[0, 0])).unwrap();
    let field = sample_environment(&short, p.law, 9, 9);
    assert!(matches!(
        Polymer::new(&field, &p).unwrap().density_qn(n),
        Err(EngineError::WindowCoverage { .. })
    ));
}

#[test]
fn backward_free_agrees_with_paths_from_each_start() {
    let p = params(1, 0.9, DisorderLaw::Rademacher);
    let env = SampledEnvironment::new(1, p.law, 5, 0);
    let poly = Polymer::new(&env, &p).unwrap();
    let slices = poly.backward_free(3, 0, &[0], 2).unwrap();
    assert_eq!(slices.len(), 4);
    for (x, z) in slices[0].iter() {
        let brute = PathSums::new(&env, p.beta, 0, &x, 3);
        assert!(rel(z, brute.z) < 1e-12);
    }
    // Forward endpoint mass sums to the backward value at the base point.
    let fwd = poly.forward_point_to_point(0, &[2], 3).unwrap();
    let sum: f64 = fwd.last().unwrap().values().iter().sum();
    assert!(rel(sum, slices[0].value_at(&[2]).unwrap()) < 1e-12);
}

#[test]
fn unreachable_endpoint_is_an_error() {
    let p = params(2, 0.3, DisorderLaw::StandardGaussian);
    let env = SampledEnvironment::new(2, p.law, 1, 1);
    let poly = Polymer::new(&env, &p).unwrap();
    assert!(matches!(
        poly.conditional_w(0, 3, &[0, 0], &[1, 1]),
        Err(EngineError::Unreachable { .. })
    ));
    assert!(matches!(
        poly.conditional_w(0, 2, &[0, 0], &[3, 0]),
        Err(EngineError::Unreachable { .. })
    ));
}

#[test]
fn total_expectation_identity() {
    let p = params(3, 0.5, DisorderLaw::StandardGaussian);
    let env = SampledEnvironment::new(3, p.law, 2, 2);
    let poly = Polymer::new(&env, &p).unwrap();
    let (m, n, x) = (1i64, 7i64, vec![1, 0, -1]);
    let walk = n_step_distribution(3, (n - m) as u32).unwrap();
    let mut acc = 0.0;
    for (rel_site, pr) in walk.iter() {
        let y: Vec<i32> = rel_site.iter().zip(&x).map(|(a, b)| a + b).collect();
        acc += pr * poly.conditional_w(m, n, &x, &y).unwrap();
    }
    assert!(rel(acc, poly.normalized_w(m, n, &x).unwrap()) < 1e-12);
}

#[test]
fn zero_beta_collapses_to_walk() {
    let p = params(3, 0.0, DisorderLaw::StandardGaussian);
    let env = SampledEnvironment::new(3, p.law, 2, 2);
    let poly = Polymer::new(&env, &p).unwrap();
    assert_eq!(poly.normalized_w(0, 6, &[0, 0, 0]).unwrap(), 1.0);
    assert_eq!(poly.backward_w(-6, 0, &[0, 0, 0]).unwrap(), 1.0);
    let walk = n_step_distribution(3, 5).unwrap();
    let last = poly.forward_point_to_point(0, &[0, 0, 0], 5).unwrap().pop().unwrap();
    assert_eq!(last.values(), walk.masses());
    assert!((poly.endpoint_mean_square(0, 9, &[0, 0, 0]).unwrap() - 9.0).abs() < 1e-12);
    // ⟨L_N⟩ at β = 0 is the partial collision sum.
    let u = collision_series(3, 6);
    let expected: f64 = u[1..=6].iter().sum();
    assert!(rel(poly.replica_overlap(0, 6, &[0, 0, 0]).unwrap(), expected) < 1e-12);
    let r = poly.llt_remainder(-8, 0, &[2, 0, 0], &[0, 0, 0], 2).unwrap();
    assert_eq!(r.remainder, 0.0);
}

#[test]
fn one_step_marginal_is_gibbs() {
    let p = params(2, 1.1, DisorderLaw::StandardGaussian);
    let env = SampledEnvironment::new(2, p.law, 4, 4);
    let poly = Polymer::new(&env, &p).unwrap();
    let x = [3, -2];
    let marg = poly.path_marginals(5, 6, &x).unwrap();
    let nbrs = [[2, -2], [4, -2], [3, -3], [3, -1]];
    use polymerlab::disorder::Environment;
    let ws: Vec<f64> = nbrs.iter().map(|y| (p.beta * env.value(6, y).unwrap()).exp()).collect();
    let total: f64 = ws.iter().sum();
    for (y, w) in nbrs.iter().zip(&ws) {
        assert!(rel(marg[1].value_at(y).unwrap(), w / total) < 1e-13);
    }
    let overlap = poly.replica_overlap(5, 6, &x).unwrap();
    assert!((0.25..=1.0).contains(&overlap));
}

#[test]
fn forced_renormalisation_changes_nothing() {
    let p = params(3, 0.9, DisorderLaw::StandardGaussian);
    let env = SampledEnvironment::new(3, p.law, 8, 1);
    let plain = Polymer::new(&env, &p).unwrap();
    let forced = Polymer::new(&env, &p).unwrap().with_options(SweepOptions {
        renormalize_every_slice: true,
    });
    let x = [0, 0, 0];
    assert!(rel(forced.normalized_w(0, 10, &x).unwrap(), plain.normalized_w(0, 10, &x).unwrap()) < 1e-12);
    assert!(rel(forced.density_qn(6).unwrap().q, plain.density_qn(6).unwrap().q) < 1e-12);
    assert!(rel(forced.density_qnm(4, 3).unwrap().q, plain.density_qnm(4, 3).unwrap().q) < 1e-12);
    let a = forced.partition(0, 7, &x).unwrap();
    let b = plain.partition(0, 7, &x).unwrap();
    for (ma, mb) in a.marginals.iter().zip(&b.marginals) {
        for (u, v) in ma.weights().iter().zip(mb.weights()) {
            assert!((u - v).abs() <= 1e-12 * v.abs());
        }
    }
}

#[test]
fn extreme_disorder_stays_finite() {
    // β = 40 with Gaussian η would overflow any unscaled sweep.
    let p = params(2, 40.0, DisorderLaw::StandardGaussian);
    let env = SampledEnvironment::new(2, p.law, 3, 3);
    let poly = Polymer::new(&env, &p).unwrap();
    let set = poly.partition(0, 30, &[0, 0]).unwrap();
    assert!(set.log_z.is_finite() && set.log_z > 100.0);
    for m in &set.marginals {
        let s: f64 = m.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-10);
    }
}

#[test]
fn backward_w_is_forward_w_of_reversed_field() {
    let p = params(2, 0.7, DisorderLaw::UniformBounded);
    let cone = build_cone(2, -6, 0, (0, &[0, 0])).unwrap();
    let field = sample_environment(&cone, p.law, 21, 0);
    let reversed = time_reverse(&field);
    let poly = Polymer::new(&field, &p).unwrap();
    let rpoly = Polymer::new(&reversed, &p).unwrap();
    let a = poly.backward_w(-5, 0, &[0, 0]).unwrap();
    let b = rpoly.normalized_w(0, 5, &[0, 0]).unwrap();
    assert!(rel(a, b) < 1e-12);
}

#[test]
fn enumerated_identities_d1() {
    let p = params(1, 0.5, DisorderLaw::Rademacher);
    let n = 2i64;
    let cone = build_cone(1, 0, n, (0, &[0])).unwrap();
    let (mut mean, mut second) = (0.0, 0.0);
    for (field, prob) in enumerate_environments(&cone).unwrap() {
        let w = Polymer::new(&field, &p).unwrap().normalized_w(0, n, &[0]).unwrap();
        mean += prob * w;
        second += prob * w * w;
    }
    assert!((mean - 1.0).abs() < 1e-12);
    assert!(rel(second, pair_overlap_moment(1, n as usize, p.gamma)) < 1e-10);

    let qcone = build_cone(1, -2, 0, (-4, &[0])).unwrap();
    let mut qmean = 0.0;
    for (field, prob) in enumerate_environments(&qcone).unwrap() {
        qmean += prob * Polymer::new(&field, &p).unwrap().density_qn(2).unwrap().q;
    }
    assert!((qmean - 1.0).abs() < 1e-12);
}

#[test]
fn qnm_at_zero_m_is_qn() {
    let p = params(3, 0.4, DisorderLaw::StandardGaussian);
    let env = SampledEnvironment::new(3, p.law, 6, 6);
    let poly = Polymer::new(&env, &p).unwrap();
    let a = poly.density_qnm(5, 0).unwrap().q;
    let b = poly.density_qn(5).unwrap().q;
    assert!(rel(a, b) < 1e-12);
    assert!(parity_ball(3, 5).len() == poly.density_qn(5).unwrap().contributions.len());
}
