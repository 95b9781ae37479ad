mod common;

use matrixrepet::attractor::{gamma_greedy, GREEDY_K_CAP};
use matrixrepet::blocktree::{deserialize, serialize};
use matrixrepet::delta::{delta_profile_fast, delta_profile_naive};
use matrixrepet::{build_bt, build_gamma_bt, BuildOptions, HashIndex, Matrix, Ratio, Symbol};
use proptest::prelude::*;

fn matrix(max_n: usize, max_sigma: Symbol) -> impl Strategy<Value = Matrix> {
    (1..=max_n, 1..=max_sigma).prop_flat_map(|(n, sigma)| {
        proptest::collection::vec(0..sigma, n * n).prop_map(move |cells| Matrix::new(n, n, cells).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fast_equals_naive(m in matrix(20, 4)) {
        prop_assert_eq!(delta_profile_fast(&m).unwrap(), delta_profile_naive(&HashIndex::new(&m)).unwrap());
    }

    #[test]
    fn profile_counts_are_bounded(m in matrix(16, 4)) {
        let p = delta_profile_fast(&m).unwrap();
        let n = m.rows() as u64;
        prop_assert_eq!(p.count(1), m.sigma() as u64);
        for k in 1..=n {
            prop_assert!(p.count(k as usize) <= (n - k + 1).pow(2));
        }
        prop_assert!(p.delta2d >= Ratio::integer(1) || m.sigma() == 1);
    }

    #[test]
    fn delta_ignores_transposition(m in matrix(14, 3)) {
        prop_assert_eq!(delta_profile_fast(&m).unwrap().d, delta_profile_fast(&m.transpose()).unwrap().d);
    }

    #[test]
    fn delta_is_monotone(m in matrix(14, 3), l in 1usize..14, i in 0usize..14, j in 0usize..14) {
        let n = m.rows();
        let l = l.min(n);
        let (i, j) = (i % (n - l + 1), j % (n - l + 1));
        let sub = m.submatrix(i, j, l, l).unwrap();
        prop_assert!(delta_profile_fast(&sub).unwrap().delta2d <= delta_profile_fast(&m).unwrap().delta2d);
    }

    #[test]
    fn single_edits_move_delta_by_at_most_one(m in matrix(14, 3), i in 0usize..14, j in 0usize..14, s in 0u16..4) {
        let n = m.rows();
        let e = m.with_cell(i % n, j % n, s).unwrap();
        let (a, b) = (delta_profile_fast(&m).unwrap().delta2d, delta_profile_fast(&e).unwrap().delta2d);
        prop_assert!(a.abs_diff(&b) <= Ratio::integer(1));
    }

    #[test]
    fn greedy_attractors_exceed_delta(m in matrix(10, 3)) {
        let index = HashIndex::new(&m);
        let g = gamma_greedy(&index, GREEDY_K_CAP).unwrap();
        prop_assert!(delta_profile_naive(&index).unwrap().delta2d <= Ratio::integer(g.len() as u64));
        prop_assert!(g.len() >= m.sigma());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn trees_reproduce_every_cell(m in matrix(24, 4), k in 2usize..5, leaf in 1usize..5, shallow in any::<bool>()) {
        let opts = BuildOptions { leaf_side: leaf, shallow, ..BuildOptions::new(k) };
        let g = gamma_greedy(&HashIndex::new(&m), GREEDY_K_CAP).unwrap();
        let n = m.rows();
        let trees = [build_bt(&m, &opts), build_gamma_bt(&m, &g, &opts)];
        for t in trees {
            let t = t.unwrap();
            for i in 0..n {
                for j in 0..n {
                    let (s, visits) = t.access_traced(i, j).unwrap();
                    prop_assert_eq!(s, m.get(i, j));
                    prop_assert!(visits.iter().all(|&v| v == 1 || v == 2));
                }
            }
            let st = t.stats();
            prop_assert_eq!(st.nodes, 1 + st.levels.iter().map(|l| l.live).sum::<usize>());
            prop_assert_eq!(st.space_units, st.nodes + st.pointers + st.explicit_symbols);
            let back = deserialize(&serialize(&t)).unwrap();
            prop_assert_eq!(back, t);
        }
    }

    #[test]
    fn damaged_streams_fail_cleanly(m in matrix(10, 3), cut in any::<prop::sample::Index>(), flip in any::<prop::sample::Index>(), byte in any::<u8>()) {
        let t = build_bt(&m, &BuildOptions::new(2)).unwrap();
        let bytes = serialize(&t);
        let cut = cut.index(bytes.len());
        prop_assert!(deserialize(&bytes[..cut]).is_err());
        let mut bad = bytes.clone();
        let at = flip.index(bad.len());
        bad[at] = byte;
        // either rejected, or a structurally valid tree whose queries do not panic
        if let Ok(t2) = deserialize(&bad) {
            for i in 0..t2.n() {
                for j in 0..t2.n() {
                    let _ = t2.access(i, j);
                }
            }
        }
    }
}
