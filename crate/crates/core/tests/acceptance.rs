//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use std::time::{Duration, Instant};

use common::{brute_counts, rs, Rng};
use matrixrepet::attractor::{
    disjoint_unique_lower_bound, gamma_exact, gamma_exact_string, gamma_greedy, lift_attractor, Attractor,
    ExactOptions, GREEDY_K_CAP,
};
use matrixrepet::blocktree::{deserialize, serialize, BlockTree, Node};
use matrixrepet::delta::{delta_profile_fast, delta_profile_naive, DeltaProfile};
use matrixrepet::generators::{gen_nonmono, gen_permuted, gen_separation};
use matrixrepet::matrix::str_symbols;
use matrixrepet::{build_bt, build_gamma_bt, BuildOptions, HashIndex, Matrix, Ratio, Symbol};

/// Upper limit on the fitted constant of criterion 9: the marked-block lemma
/// gives at most `4 (4 + 9 delta + 12 sqrt(n delta))` per level for
/// `delta >= 1`, which is below `52 (delta + sqrt(n delta))`.
const MARKED_CONSTANT_CAP: f64 = 52.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn naive(m: &Matrix) -> DeltaProfile {
    delta_profile_naive(&HashIndex::new(m)).unwrap()
}

fn fast(m: &Matrix) -> DeltaProfile {
    delta_profile_fast(m).unwrap()
}

fn exact(m: &Matrix) -> Attractor {
    gamma_exact(&HashIndex::new(m), ExactOptions::MATRIX_DEFAULT).unwrap()
}

fn exact_string(s: &str) -> usize {
    gamma_exact_string(&str_symbols(s).unwrap(), ExactOptions::STRING_DEFAULT)
        .unwrap()
        .len()
}

fn greedy(m: &Matrix) -> Attractor {
    gamma_greedy(&HashIndex::new(m), GREEDY_K_CAP).unwrap()
}

fn all_strings(len: usize) -> impl Iterator<Item = String> {
    (0u32..1 << len).map(move |mask| (0..len).map(|b| if mask >> b & 1 == 1 { 'b' } else { 'a' }).collect())
}

fn paper_families() -> Vec<(String, Matrix)> {
    let mut out = vec![
        ("separation 16".to_string(), gen_separation(16).unwrap()),
        ("separation 64".to_string(), gen_separation(64).unwrap()),
        ("permuted 16 (2,1)".to_string(), gen_permuted(16, &[2, 1]).unwrap()),
    ];
    for perm in [[4, 3, 2, 1], [2, 4, 1, 3], [3, 1, 4, 2]] {
        out.push((format!("permuted 64 {perm:?}"), gen_permuted(64, &perm).unwrap()));
    }
    for n in 1..=3 {
        let (w, wb) = gen_nonmono(n).unwrap();
        out.push((format!("R^w n={n}"), rs(&w)));
        out.push((format!("R^wb n={n}"), rs(&wb)));
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = Rng::new(1);
    let mut checked = 0;
    for case in 0..210 {
        let n = 2 + case % 31;
        let sigma = 2 + rng.below(3);
        let m = rng.matrix(n, sigma);
        let (f, nv) = (fast(&m), naive(&m));
        if f != nv {
            return outcome(false, format!("random {n}x{n} sigma {sigma}: fast {:?} vs naive {:?}", f.d, nv.d));
        }
        if n <= 12 && f.d != brute_counts(&m) {
            return outcome(false, format!("random {n}x{n}: counts disagree with stored submatrices"));
        }
        checked += 1;
    }
    for (name, m) in paper_families() {
        if fast(&m) != naive(&m) {
            return outcome(false, format!("{name}: fast and naive profiles differ"));
        }
        checked += 1;
    }
    let elapsed = start.elapsed();
    outcome(
        elapsed < Duration::from_secs(120),
        format!("{checked} matrices identical, {:.1}s (limit 120s)", elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut strings: Vec<String> = (1..=6).flat_map(all_strings).collect();
    let mut rng = Rng::new(2);
    for _ in 0..50 {
        let len = 1 + rng.below(8);
        strings.push(rng.string(len, 2));
    }
    for s in &strings {
        let g2 = exact(&rs(s)).len();
        let g1 = exact_string(s);
        if g1 != g2 {
            return outcome(false, format!("{s:?}: matrix {g2}, string {g1}"));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        elapsed < Duration::from_secs(600),
        format!("{} strings agree, {:.1}s (limit 600s)", strings.len(), elapsed.as_secs_f64()),
    )
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let mut report = Vec::new();
    for n in 1..=3 {
        let (w, wb) = gen_nonmono(n).unwrap();
        let (gw, gwb) = (exact_string(&w), exact_string(&wb));
        report.push(format!("n={n}: gamma(w)={gw} gamma(wb)={gwb}"));
        if gw != 3 {
            failures.push(format!("gamma({w}) = {gw}, expected 3"));
        }
        if gwb != 2 {
            failures.push(format!("gamma({wb}) = {gwb}, expected 2"));
        }
    }
    let (w, wb) = gen_nonmono(1).unwrap();
    let (mw, mwb) = (exact(&rs(&w)).len(), exact(&rs(&wb)).len());
    report.push(format!("matrix n=1: gamma(R^w)={mw} gamma(R^wb)={mwb}"));
    if mwb != 2 {
        failures.push(format!("gamma(R^{wb}) = {mwb}, expected 2"));
    }
    if mw != 3 {
        failures.push(format!("gamma(R^{w}) = {mw}, expected 3"));
    }
    let detail = if failures.is_empty() {
        report.join("; ")
    } else {
        format!("{}; mismatches: {}", report.join("; "), failures.join(", "))
    };
    outcome(failures.is_empty(), detail)
}

fn criterion_4() -> Outcome {
    let mut rng = Rng::new(4);
    let mut checked = 0;
    for n in [3, 4] {
        for _ in 0..100 {
            let m = rng.matrix(n, 2);
            let g = exact(&m).len();
            let d = naive(&m).delta2d;
            if d > Ratio::integer(g as u64) || g < m.sigma() {
                return outcome(false, format!("{m:?}: delta {d}, gamma {g}, sigma {}", m.sigma()));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} matrices: delta <= gamma and gamma >= sigma"))
}

fn criterion_5() -> Outcome {
    let mut rng = Rng::new(5);
    for _ in 0..100 {
        let n = 1 + rng.below(16);
        let sigma = 2 + rng.below(3);
        let m = rng.matrix(n, sigma);
        if fast(&m).delta2d != fast(&m.transpose()).delta2d {
            return outcome(false, format!("transpose changes delta of {m:?}"));
        }
    }
    for _ in 0..200 {
        let n = 2 + rng.below(15);
        let sigma = 2 + rng.below(3);
        let m = rng.matrix(n, sigma);
        let l = 1 + rng.below(n);
        let (i, j) = (rng.below(n - l + 1), rng.below(n - l + 1));
        let sub = m.submatrix(i, j, l, l).unwrap();
        let (ds, dm) = (fast(&sub), fast(&m));
        if ds.delta2d > dm.delta2d || ds.d.iter().zip(&dm.d).any(|(a, b)| a > b) {
            return outcome(false, format!("submatrix ({i},{j},{l}) of {m:?} has more distinct squares"));
        }
    }
    for _ in 0..500 {
        let n = 1 + rng.below(16);
        let sigma = 2 + rng.below(3);
        let m = rng.matrix(n, sigma);
        let e = m
            .with_cell(rng.below(n), rng.below(n), b'a' as Symbol + rng.below(sigma + 1) as Symbol)
            .unwrap();
        let (a, b) = (fast(&m).delta2d, fast(&e).delta2d);
        if a.abs_diff(&b) > Ratio::integer(1) {
            return outcome(false, format!("edit moves delta from {a} to {b}"));
        }
    }
    outcome(true, "100 transposes, 200 submatrix pairs, 500 single-cell edits")
}

fn criterion_6() -> Outcome {
    let base = naive(&gen_separation(64).unwrap());
    let mut parts = vec![format!("n=64 delta={} d1={}", base.delta2d, base.count(1))];
    let mut pass = base.count(1) == 3;
    for n in [64usize, 256, 1024] {
        let m = gen_separation(n).unwrap();
        let p = if n == 64 { base.clone() } else { fast(&m) };
        let r = (n as f64).sqrt() as usize;
        // S_i sits on top of the 2r x 2r square at column 2r (i - 1)
        let squares: Vec<(usize, usize, usize)> = (0..r / 2).map(|b| (0, 2 * r * b, 2 * r)).collect();
        let lower = disjoint_unique_lower_bound(&HashIndex::new(&m), &squares).unwrap();
        pass &= p.delta2d <= base.delta2d && p.count(1) == 3 && lower >= r / 2;
        if n > 64 {
            parts.push(format!("n={n} delta={}", p.delta2d));
        }
        parts.push(format!("n={n} gamma>={lower} (need {})", r / 2));
    }
    outcome(pass, parts.join(", "))
}

struct Built {
    name: String,
    m: Matrix,
    tree: BlockTree,
    attractor: Option<usize>,
}

fn tree_suite() -> Vec<Built> {
    let mut rng = Rng::new(7);
    let mut inputs: Vec<(String, Matrix)> = Vec::new();
    for n in [8, 16, 32, 64] {
        for sigma in [2, 3, 4] {
            inputs.push((format!("random {n} sigma {sigma}"), rng.matrix(n, sigma)));
        }
    }
    inputs.push(("separation 64".into(), gen_separation(64).unwrap()));
    for s in ["abbbaabb", "abaababa", "aaaaaaab", "abcabcab"] {
        inputs.push((format!("R^{s}"), rs(s)));
    }
    let mut out = Vec::new();
    for (name, m) in inputs {
        let g = greedy(&m);
        for (k, leaf) in [(2, 1), (2, 2), (4, 4), (3, 3)] {
            let opts = BuildOptions {
                leaf_side: leaf,
                ..BuildOptions::new(k)
            };
            out.push(Built {
                name: format!("{name} k={k} leaf={leaf}"),
                tree: build_bt(&m, &opts).unwrap(),
                m: m.clone(),
                attractor: None,
            });
            out.push(Built {
                name: format!("{name} k={k} leaf={leaf} gamma"),
                tree: build_gamma_bt(&m, &g, &opts).unwrap(),
                m: m.clone(),
                attractor: Some(g.len()),
            });
        }
        if name.starts_with("R^") {
            let s: String = m.row(0).iter().map(|&c| c as u8 as char).collect();
            let g1 = gamma_exact_string(&str_symbols(&s).unwrap(), ExactOptions::STRING_DEFAULT).unwrap();
            let lifted = lift_attractor(&g1);
            out.push(Built {
                name: format!("{name} lifted string attractor"),
                tree: build_gamma_bt(&m, &lifted, &BuildOptions::new(2)).unwrap(),
                m: m.clone(),
                attractor: Some(lifted.len()),
            });
        }
    }
    out
}

fn criterion_7(suite: &[Built], build_time: Duration) -> Outcome {
    let start = Instant::now();
    let mut cells = 0usize;
    for b in suite {
        let n = b.m.rows();
        for i in 0..n {
            for j in 0..n {
                let (sym, visits) = b.tree.access_traced(i, j).unwrap();
                if sym != b.m.get(i, j) || visits.iter().any(|&v| v > 2) {
                    return outcome(false, format!("{}: cell ({i},{j}) gave {sym}, visits {visits:?}", b.name));
                }
                cells += 1;
            }
        }
    }
    let elapsed = start.elapsed() + build_time;
    outcome(
        elapsed < Duration::from_secs(120),
        format!(
            "{} trees, {cells} cells correct, at most 2 visits per level, {:.1}s (limit 120s)",
            suite.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_8(suite: &[Built]) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for b in suite {
        let Some(g) = b.attractor else { continue };
        let max = b.tree.stats().max_marked_per_level;
        if max > 9 * g {
            return outcome(false, format!("{}: {max} marked on a level with |G| = {g}", b.name));
        }
        worst = worst.max(max as f64 / g as f64);
        count += 1;
    }
    outcome(true, format!("{count} trees, max marked per level / |G| = {worst:.2} <= 9"))
}

fn criterion_9a() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [64usize, 256, 1024] {
        let r = (n as f64).sqrt() as usize;
        let t = build_bt(&gen_separation(n).unwrap(), &BuildOptions::new(2)).unwrap();
        let at = |side: usize| t.levels().iter().find(|l| l.side == side).map_or(0, |l| l.marked.len());
        let (wide, narrow) = (at(4 * r), at(2 * r));
        pass &= wide >= r / 2;
        parts.push(format!("n={n}: side {} marked {wide} (need {}), side {} marked {narrow}", 4 * r, r / 2, 2 * r));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_9b() -> Outcome {
    let mut rng = Rng::new(9);
    let mut fitted = 0.0f64;
    let mut trees = 0;
    for n in [8, 16, 32, 64] {
        for sigma in [2, 3, 4] {
            for _ in 0..3 {
                let m = rng.matrix(n, sigma);
                let delta = naive(&m).delta2d.to_f64();
                let bound = delta + (n as f64 * delta).sqrt();
                for k in [2, 4] {
                    let t = build_bt(&m, &BuildOptions::new(k)).unwrap();
                    fitted = fitted.max(t.stats().max_marked_per_level as f64 / bound);
                    trees += 1;
                }
            }
        }
    }
    outcome(
        fitted <= MARKED_CONSTANT_CAP,
        format!("{trees} trees, fitted C = {fitted:.3} (cap {MARKED_CONSTANT_CAP})"),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = Rng::new(10);
    for t in 0..20 {
        let n = 3 + rng.below(30);
        let sigma = 2 + rng.below(3);
        let m = rng.matrix(n, sigma);
        let k = 2 + rng.below(3);
        let opts = BuildOptions {
            leaf_side: 1 + rng.below(k),
            ..BuildOptions::new(k)
        };
        let tree = if t % 2 == 0 {
            build_bt(&m, &opts).unwrap()
        } else {
            build_gamma_bt(&m, &greedy(&m), &opts).unwrap()
        };
        let back = deserialize(&serialize(&tree)).unwrap();
        if back.stats() != tree.stats() {
            return outcome(false, format!("tree {t}: stats changed"));
        }
        for i in 0..n {
            for j in 0..n {
                if back.access(i, j).unwrap() != tree.access(i, j).unwrap() {
                    return outcome(false, format!("tree {t}: cell ({i},{j}) changed"));
                }
            }
        }
    }
    outcome(true, "20 trees: stats and every access answer survive a round trip")
}

fn main() {
    let mut failed = 0;
    let mut line = |id: &str, name: &str, o: Outcome| {
        println!("criterion {id:<3} {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    line("1", "fast delta profile equals naive", criterion_1());
    line("2", "string/matrix attractor sizes agree", criterion_2());
    line("3", "non-monotone attractor sizes", criterion_3());
    line("4", "delta <= gamma", criterion_4());
    line("5", "delta transpose/monotone/edit properties", criterion_5());
    line("6", "separation family", criterion_6());
    let start = Instant::now();
    let suite = tree_suite();
    let build_time = start.elapsed();
    line("7", "block tree access round trip", criterion_7(&suite, build_time));
    line("8", "attractor tree marks <= 9|G| per level", criterion_8(&suite));
    line("9a", "separation tree marks at side 4 sqrt(n)", criterion_9a());
    line("9b", "marked blocks per level fit", criterion_9b());
    line("10", "serialization round trip", criterion_10());
    let unmarked = suite
        .iter()
        .flat_map(|b| b.tree.levels())
        .flat_map(|l| &l.nodes)
        .filter(|n| matches!(n, Node::Unmarked { .. }))
        .count();
    println!("({unmarked} pointers followed across the tree suite)");
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
