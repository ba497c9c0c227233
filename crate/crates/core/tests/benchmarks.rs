use npb_core::bench::ep;
use npb_core::{Benchmark, ExecMode, Pool, PoolConfig, ProblemClass};

#[test]
fn every_benchmark_verifies_class_s_in_both_modes() {
    for b in Benchmark::ALL {
        let pool = Pool::new(
            b.stack_reserve(ProblemClass::S)
                .map_or(PoolConfig::new(2), |s| PoolConfig::new(2).stack_size(s)),
        )
        .unwrap();
        for mode in [ExecMode::Safe, ExecMode::Unchecked] {
            let r = b.run(ProblemClass::S, &pool, mode).unwrap();
            assert!(r.verified, "{b} {mode:?}");
            assert_eq!(r.name, b.name());
            assert_eq!(r.class, ProblemClass::S);
            assert_eq!(r.workers, 2);
            assert_eq!(r.safe_mode, mode.is_safe());
            assert!(r.seconds >= 0.0 && r.mflops >= 0.0);
        }
    }
}

#[test]
fn names_parse_back() {
    for b in Benchmark::ALL {
        assert_eq!(b.name().parse::<Benchmark>().unwrap(), b);
        assert_eq!(b.name().to_lowercase().parse::<Benchmark>().unwrap(), b);
    }
    assert!("xx".parse::<Benchmark>().is_err());
    assert!("Z".parse::<ProblemClass>().is_err());
}

#[test]
fn ep_tally_merge_is_independent_of_grouping() {
    // Counts are integers, so any fold order must give the same vector as
    // one sequential pass over the same pairs.
    let seed = 271_828_183.0;
    let whole = ep::generate_pairs(0, 6000, seed);
    let parts: Vec<_> = (0..6)
        .map(|i| ep::generate_pairs(i * 1000, 1000, seed))
        .collect();
    let left = parts.iter().copied().reduce(|a, b| a + b).unwrap();
    let right = parts.iter().rev().copied().reduce(|a, b| b + a).unwrap();
    let paired = (parts[0] + parts[1]) + ((parts[2] + parts[3]) + (parts[4] + parts[5]));
    for t in [left, right, paired] {
        assert_eq!(t.q, whole.q);
        assert_eq!(t.pair_count, whole.pair_count);
        assert!((t.sx - whole.sx).abs() <= 1e-9 * whole.sx.abs().max(1.0));
        assert!((t.sy - whole.sy).abs() <= 1e-9 * whole.sy.abs().max(1.0));
    }
}
