use std::collections::HashMap;

use depbound::graphcomb::Graph;
use depbound::simulate::{
    clopper_pearson, empirical_tail, sample_gnm, sample_gnp, sample_martingale_diff, sample_orientation_parity,
    sample_ustat, BaseDist, MdsKernel, SimModel, UStatKernel, UStatModel, CI_LEVEL,
};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

fn chi_square_critical(df: usize) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(0.999)
}

/// Pearson statistic of `counts` against equal expected frequencies over `cells`.
fn chi_square_uniform(counts: &HashMap<u64, u64>, cells: usize) -> f64 {
    let total: u64 = counts.values().sum();
    let expected = total as f64 / cells as f64;
    let seen: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    seen + (cells - counts.len()) as f64 * expected
}

fn edge_mask(g: &Graph) -> u64 {
    let n = g.n();
    let mut mask = 0u64;
    let mut idx = 0;
    for u in 0..n {
        for v in u + 1..n {
            if g.has_edge(u, v) {
                mask |= 1 << idx;
            }
            idx += 1;
        }
    }
    mask
}

#[test]
fn clopper_pearson_matches_beta_quantiles() {
    let a = (1.0 - CI_LEVEL) / 2.0;
    for (k, n) in [(1u64, 10u64), (5, 100), (37, 1000), (999, 1000), (3, 100_000), (50_000, 100_000)] {
        let (lo, hi) = clopper_pearson(k, n, CI_LEVEL).unwrap();
        let lo_ref = Beta::new(k as f64, (n - k + 1) as f64).unwrap().inverse_cdf(a);
        let hi_ref = Beta::new((k + 1) as f64, (n - k) as f64).unwrap().inverse_cdf(1.0 - a);
        assert!((lo - lo_ref).abs() <= 1e-8 * lo_ref.max(1e-6), "{k}/{n}: {lo} vs {lo_ref}");
        assert!((hi - hi_ref).abs() <= 1e-8 * hi_ref.max(1e-6), "{k}/{n}: {hi} vs {hi_ref}");
        assert!(lo <= k as f64 / n as f64 && k as f64 / n as f64 <= hi);
    }
}

#[test]
fn gnm_is_uniform_and_matches_conditioned_gnp() {
    // all C(10,4) = 210 four-edge graphs on 5 vertices
    let samples = 1_000_000u64;
    let mut direct: HashMap<u64, u64> = HashMap::new();
    let mut conditioned: HashMap<u64, u64> = HashMap::new();
    for seed in 0..samples {
        let g = sample_gnm(5, 4, seed).unwrap();
        assert_eq!(g.edge_count(), 4);
        *direct.entry(edge_mask(&g)).or_default() += 1;
        let h = sample_gnp(5, 0.5, seed).unwrap();
        if h.edge_count() == 4 {
            *conditioned.entry(edge_mask(&h)).or_default() += 1;
        }
    }
    assert!(direct.len() <= 210 && conditioned.len() <= 210);
    let crit = chi_square_critical(209);
    let x = chi_square_uniform(&direct, 210);
    assert!(x < crit, "G(5,4) chi-square {x} >= {crit}");
    let y = chi_square_uniform(&conditioned, 210);
    assert!(y < crit, "conditioned G(5,1/2) chi-square {y} >= {crit}");
}

#[test]
fn sampled_counts_match_brute_force() {
    for seed in 0..50u64 {
        let g = sample_gnp(8, 0.5, seed).unwrap();
        let mut tri = 0;
        let mut k4 = 0;
        for a in 0..8 {
            for b in a + 1..8 {
                for c in b + 1..8 {
                    let t = g.has_edge(a, b) && g.has_edge(a, c) && g.has_edge(b, c);
                    tri += t as usize;
                    for d in c + 1..8 {
                        k4 += (t && g.has_edge(a, d) && g.has_edge(b, d) && g.has_edge(c, d)) as usize;
                    }
                }
            }
        }
        let iso = (0..8).filter(|&v| (0..8).all(|u| !g.has_edge(u, v))).count();
        assert_eq!(g.count_triangles(), tri);
        assert_eq!(g.count_4cliques(), k4);
        assert_eq!(g.count_isolated(), iso);
    }
}

#[test]
fn orientation_parity_small_cases() {
    let single = Graph::from_edges(2, &[(0, 1)]).unwrap();
    for seed in 0..100 {
        let p = sample_orientation_parity(&single, seed);
        assert_eq!(p[0] + p[1], 1);
    }
    assert!(sample_orientation_parity(&Graph::empty(5), 1).iter().all(|&b| b == 0));
}

#[test]
fn orientation_parities_on_k4() {
    let g = Graph::complete(4);
    let samples = 1_000_000u64;
    let mut joint: HashMap<u64, u64> = HashMap::new();
    for seed in 0..samples {
        let p = sample_orientation_parity(&g, seed);
        let key = p.iter().enumerate().map(|(i, &b)| (b as u64) << i).sum();
        *joint.entry(key).or_default() += 1;
    }
    let crit = chi_square_critical(7);
    for drop in 0..4 {
        let mut sub: HashMap<u64, u64> = HashMap::new();
        for (&key, &c) in &joint {
            let reduced = (0..4).filter(|&i| i != drop).enumerate().map(|(j, i)| (key >> i & 1) << j).sum();
            *sub.entry(reduced).or_default() += c;
        }
        let x = chi_square_uniform(&sub, 8);
        assert!(x < crit, "3 parities without vertex {drop}: chi-square {x}");
    }
    // observed: the four parities always sum to |E| = 6, so the full set is
    // never independent
    assert!(joint.keys().all(|k| k.count_ones() % 2 == 0));
    assert_eq!(joint.len(), 8);
}

#[test]
fn degree_parities_are_four_wise_uniform_on_five_vertices() {
    let n = 5;
    let samples = 400_000u64;
    let mut joint: HashMap<u64, u64> = HashMap::new();
    for seed in 0..samples {
        let g = sample_gnp(n, 0.5, seed).unwrap();
        let key = (0..n).map(|v| ((g.degree(v) % 2) as u64) << v).sum();
        *joint.entry(key).or_default() += 1;
    }
    let crit = chi_square_critical(15);
    for drop in 0..n {
        let mut sub: HashMap<u64, u64> = HashMap::new();
        for (&key, &c) in &joint {
            let reduced = (0..n).filter(|&i| i != drop).enumerate().map(|(j, i)| (key >> i & 1) << j).sum();
            *sub.entry(reduced).or_default() += c;
        }
        assert!(chi_square_uniform(&sub, 16) < crit, "dropping {drop}");
    }
    assert!(joint.keys().all(|k| k.count_ones() % 2 == 0));
}

#[test]
fn polya_style_has_zero_conditional_means() {
    let ps = [0.3, 0.6, 0.45, 0.2];
    let samples = 200_000u64;
    // per (position, prefix of coin outcomes): count, sum, sum of squares
    let mut groups: HashMap<(usize, u64), (f64, f64, f64)> = HashMap::new();
    for seed in 0..samples {
        let y = sample_martingale_diff(&ps, MdsKernel::PolyaStyle, seed).unwrap();
        let mut prefix = 0u64;
        for (i, &v) in y.iter().enumerate() {
            let e = groups.entry((i, prefix)).or_default();
            e.0 += 1.0;
            e.1 += v;
            e.2 += v * v;
            prefix |= ((v > 0.0) as u64) << i;
        }
    }
    assert_eq!(groups.len(), 15);
    for ((i, prefix), (c, s, s2)) in groups {
        let mean = s / c;
        let var = (s2 / c - mean * mean).max(0.0);
        let se = (var / c).sqrt();
        // 4.5 standard errors keeps the family-wise error tiny over 15 groups
        assert!(mean.abs() <= 4.5 * se + 1e-12, "position {i}, prefix {prefix:b}: mean {mean}, se {se}");
    }
}

#[test]
fn triangle_kernel_is_the_triangle_count() {
    let model = UStatModel::new(15, 3, UStatKernel::TriangleIndicator, BaseDist::Bernoulli(0.5)).unwrap();
    for seed in 0..100 {
        let x = sample_ustat(&model, seed);
        assert_eq!(x, sample_gnp(6, 0.5, seed).unwrap().count_triangles() as f64);
    }
    // E[X] = C(6,3) / 8
    assert!((model.kernel_mean() * model.terms() - 2.5).abs() < 1e-12);
}

#[test]
fn ustat_mean_is_terms_times_kernel_mean() {
    let model = UStatModel::new(9, 3, UStatKernel::ThresholdSum(1.2), BaseDist::Uniform).unwrap();
    let reps = 20_000u64;
    let xs: Vec<f64> = (0..reps).map(|s| sample_ustat(&model, s)).collect();
    let mean = xs.iter().sum::<f64>() / reps as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let expected = model.terms() * model.kernel_mean();
    // P[U1+U2+U3 >= 1.2] = 1 - (1.2^3 - 3 * 0.2^3)/6
    assert!((model.kernel_mean() - (1.0 - (1.728 - 0.024) / 6.0)).abs() < 1e-14);
    assert!((mean - expected).abs() <= 4.0 * (var / reps as f64).sqrt(), "{mean} vs {expected}");
}

#[test]
fn identical_results_across_thread_counts() {
    let model = SimModel::MartingaleDiff { ps: vec![0.3; 12], kernel: MdsKernel::PolyaStyle };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| empirical_tail(&model, 2.0, 20_000, 99).unwrap())
    };
    let one = run(1);
    assert_eq!(one.to_string(), run(4).to_string());
    assert_eq!(one.to_string(), run(7).to_string());
}

#[test]
fn matching_bounds_dominate_estimates() {
    let reps = 20_000u64;
    let cases: Vec<(SimModel, Vec<f64>)> = vec![
        (SimModel::GnpIsolated { n: 20, p: 0.15 }, vec![5.0, 7.0, 9.0]),
        (SimModel::GnpTriangles { n: 8, p: 0.5 }, vec![12.0, 16.0, 20.0]),
        (SimModel::Gnp4Cliques { n: 8, p: 0.6 }, vec![20.0, 30.0, 40.0]),
        (SimModel::GnmIsolated { n: 10, m: 15 }, vec![2.0, 3.0, 4.0]),
        (SimModel::GnmTriangles { n: 6, m: 9 }, vec![3.0, 5.0, 8.0]),
        (SimModel::OrientationParity(Graph::complete(8)), vec![5.0, 6.0, 7.0]),
        (SimModel::DegreeParity { n: 10 }, vec![7.0, 8.0, 9.0]),
        (SimModel::MartingaleDiff { ps: vec![0.3; 20], kernel: MdsKernel::PolyaStyle }, vec![2.0, 4.0, 6.0]),
        (SimModel::MartingaleDiff { ps: vec![0.3; 20], kernel: MdsKernel::IndependentCentered }, vec![3.0, 5.0, 8.0]),
        (
            SimModel::UStat(UStatModel::new(9, 3, UStatKernel::ThresholdSum(1.5), BaseDist::Uniform).unwrap()),
            vec![50.0, 55.0, 60.0],
        ),
        (
            SimModel::UStat(UStatModel::new(15, 3, UStatKernel::TriangleIndicator, BaseDist::Bernoulli(0.3)).unwrap()),
            vec![2.0, 3.0, 5.0],
        ),
    ];
    let mut compared = 0;
    for (model, ts) in cases {
        for t in ts {
            let Some(b) = model.matching_bound(t) else { panic!("{} has a bound", model.name()) };
            let Some(bound) = b.bound() else { continue };
            let r = empirical_tail(&model, t, reps, 5).unwrap();
            if bound > 10.0 / reps as f64 {
                compared += 1;
                assert!(r.ci_high <= bound, "{} t={t}: ci_high {} > bound {bound} ({})", model.name(), r.ci_high, b.method);
            }
        }
    }
    assert!(compared >= 15, "only {compared} comparisons had power");
}
