//! Browser bindings for the static demo page in `www/`.
//!
//! Every entry point takes a text matrix (or family parameters) and returns
//! JSON. The `*_json` functions are plain Rust so they can be tested natively;
//! the `#[wasm_bindgen]` wrappers only convert errors into JS exceptions.

use matrixrepet::attractor::{gamma_greedy, Attractor, GREEDY_K_CAP};
use matrixrepet::blocktree::{BTStats, Node};
use matrixrepet::generators::{gen_nonmono, gen_permuted, gen_random, gen_separation, FamilySpec};
use matrixrepet::{
    build_bt, build_gamma_bt, delta_profile, BuildOptions, DeltaMethod, DeltaProfile, HashIndex, Matrix, Symbol,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest side the page will process; keeps the browser responsive.
pub const MAX_SIDE: usize = 256;

#[derive(Serialize)]
struct ProfileView {
    profile: DeltaProfile,
    delta: f64,
    sigma: usize,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum NodeView {
    Marked { i: usize, j: usize },
    Unmarked { i: usize, j: usize, target: (u32, u32), offset: (u32, u32) },
    Padding { i: usize, j: usize },
}

#[derive(Serialize)]
struct LevelView {
    side: usize,
    grid: usize,
    nodes: Vec<NodeView>,
}

#[derive(Serialize)]
struct TreeView {
    rule: String,
    /// 1-based, only for the attractor rule.
    attractor: Vec<(usize, usize)>,
    levels: Vec<LevelView>,
    stats: BTStats,
}

fn parse(text: &str) -> Result<Matrix, String> {
    let m = Matrix::parse_text(text).map_err(|e| e.to_string())?;
    let n = m.side().map_err(|e| e.to_string())?;
    if n > MAX_SIDE {
        return Err(format!("the demo handles sides up to {MAX_SIDE}, got {n}"));
    }
    Ok(m)
}

pub fn profile_json(text: &str) -> Result<String, String> {
    let m = parse(text)?;
    let profile = delta_profile(&m, DeltaMethod::Fast).map_err(|e| e.to_string())?;
    let view = ProfileView {
        delta: profile.delta2d.to_f64(),
        sigma: m.sigma(),
        profile,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// `rule` is `first` (first-occurrence marking) or `attractor` (marking
/// around a greedy attractor).
pub fn tree_json(text: &str, k: usize, leaf: usize, rule: &str) -> Result<String, String> {
    let m = parse(text)?;
    let opts = BuildOptions {
        leaf_side: leaf,
        ..BuildOptions::new(k)
    };
    let (tree, attractor) = match rule {
        "first" => (build_bt(&m, &opts), Attractor::default()),
        "attractor" => {
            let g = gamma_greedy(&HashIndex::new(&m), GREEDY_K_CAP).map_err(|e| e.to_string())?;
            (build_gamma_bt(&m, &g, &opts), g)
        }
        other => return Err(format!("unknown marking rule {other:?}")),
    };
    let tree = tree.map_err(|e| e.to_string())?;
    let levels = tree
        .levels()
        .iter()
        .enumerate()
        .map(|(l, level)| LevelView {
            side: level.side,
            grid: level.grid,
            nodes: level
                .nodes
                .iter()
                .enumerate()
                .map(|(idx, node)| {
                    let (i, j) = tree.node_coords(l, idx);
                    match *node {
                        Node::Marked(_) => NodeView::Marked { i, j },
                        Node::Unmarked { target, offset } => NodeView::Unmarked {
                            i,
                            j,
                            target: level.marked[target as usize],
                            offset,
                        },
                        Node::Padding => NodeView::Padding { i, j },
                    }
                })
                .collect(),
        })
        .collect();
    let view = TreeView {
        rule: rule.to_string(),
        attractor: attractor.positions().iter().copied().collect(),
        levels,
        stats: tree.stats(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Text matrix for a family. `param` is the permutation for `permuted`
/// (comma separated, 1-based) and the alphabet size for `random`.
pub fn generate_text(family: &str, n: usize, param: &str, seed: u64) -> Result<String, String> {
    let m = match family {
        "separation" => gen_separation(n),
        "permuted" => {
            let perm = param
                .split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad permutation entry {p:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            gen_permuted(n, &perm)
        }
        "random" => {
            let sigma: usize = param.trim().parse().map_err(|e| format!("bad alphabet size {param:?}: {e}"))?;
            if sigma > 10 {
                return Err("the demo draws from at most 10 digits".into());
            }
            gen_random(n, sigma, seed).and_then(|m| m.relabel(|v| v + b'0' as Symbol))
        }
        "nonmono" => gen_nonmono(n).and_then(|_| FamilySpec::Nonmono { n }.build()),
        other => return Err(format!("unknown family {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    if m.rows() > MAX_SIDE {
        return Err(format!("the demo handles sides up to {MAX_SIDE}, got {}", m.rows()));
    }
    m.to_text().map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn profile(text: &str) -> Result<String, JsError> {
    profile_json(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn tree(text: &str, k: usize, leaf: usize, rule: &str) -> Result<String, JsError> {
    tree_json(text, k, leaf, rule).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn generate(family: &str, n: usize, param: &str, seed: u64) -> Result<String, JsError> {
    generate_text(family, n, param, seed).map_err(|e| JsError::new(&e))
}
