use popcorn::ensemble::{analytic_bin_mass, pooled_density, sample_blocks_stream, PooledRun};

fn run(size: usize, samples: usize, seed: u64) -> PooledRun {
    PooledRun {
        size,
        f: 0.7,
        seed,
        samples,
        min: -2.005,
        max: 2.005,
        bins: 401,
    }
}

/// Total-variation distance between the pooled histogram and the analytic masses.
fn tv_distance(r: &PooledRun) -> f64 {
    let h = pooled_density(r).unwrap();
    let a = analytic_bin_mass(r.f, &h).unwrap();
    0.5 * (0..h.bins()).map(|i| (h.mass(i) - a[i]).abs()).sum::<f64>()
}

#[test]
fn histogram_converges_with_sample_count() {
    let d: Vec<f64> = [2, 16, 128].iter().map(|&s| tv_distance(&run(5000, s, 3))).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    assert!(d[2] < 0.01, "{d:?}");
}

#[test]
fn block_lengths_follow_geometric_law() {
    let f = 0.6;
    let mut freq = [0u64; 8];
    let mut blocks = 0u64;
    for stream in 0..20 {
        let e = sample_blocks_stream(50_000, f, 99, stream).unwrap();
        assert_eq!(e.blocks.iter().sum::<usize>(), 50_000);
        for &n in &e.blocks {
            blocks += 1;
            if n <= freq.len() {
                freq[n - 1] += 1;
            }
        }
    }
    for (i, &c) in freq.iter().enumerate() {
        let expect = (1.0 - f) * f.powi(i as i32);
        let got = c as f64 / blocks as f64;
        let sd = (expect * (1.0 - expect) / blocks as f64).sqrt();
        assert!((got - expect).abs() < 5.0 * sd, "n = {}: {got} vs {expect}", i + 1);
    }
}

#[test]
fn pooled_histogram_is_symmetric() {
    let h = pooled_density(&run(4000, 10, 5)).unwrap();
    let n = h.bins();
    let total = h.total() as f64;
    let asym: u64 = (0..n / 2).map(|i| h.counts[i].abs_diff(h.counts[n - 1 - i])).sum();
    assert!((asym as f64) / total < 1e-3, "{asym}");
    assert_eq!(h.outside, 0);
}

#[test]
fn streams_are_independent_of_scheduling() {
    let a = pooled_density(&run(3000, 8, 21)).unwrap();
    let b = pooled_density(&run(3000, 8, 21)).unwrap();
    assert_eq!(a, b);
    let c = pooled_density(&run(3000, 8, 22)).unwrap();
    assert_ne!(a.counts, c.counts);
}
