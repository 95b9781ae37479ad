use matrixrepet_web::{generate_text, profile_json, tree_json, MAX_SIDE};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn profile_of_separation_matrix() {
    let text = generate_text("separation", 64, "", 0).unwrap();
    let v = parse(&profile_json(&text).unwrap());
    assert_eq!(v["delta"], 3.0);
    assert_eq!(v["sigma"], 3);
    assert_eq!(v["profile"]["d"].as_array().unwrap().len(), 64);
}

#[test]
fn tree_nodes_cover_the_grid() {
    let text = generate_text("separation", 16, "", 0).unwrap();
    for rule in ["first", "attractor"] {
        let v = parse(&tree_json(&text, 2, 1, rule).unwrap());
        let levels = v["levels"].as_array().unwrap();
        assert_eq!(levels.len(), v["stats"]["levels"].as_array().unwrap().len());
        let first = &levels[0];
        let grid = first["grid"].as_u64().unwrap();
        assert_eq!(first["nodes"].as_array().unwrap().len() as u64, grid * grid);
        for (l, level) in levels.iter().enumerate() {
            let marked = level["nodes"].as_array().unwrap().iter().filter(|n| n["kind"] == "marked").count();
            assert_eq!(marked as u64, v["stats"]["levels"][l]["marked"].as_u64().unwrap());
        }
        assert_eq!(v["attractor"].as_array().unwrap().is_empty(), rule == "first");
    }
}

#[test]
fn unmarked_nodes_point_at_marked_blocks() {
    let text = generate_text("random", 12, "2", 5).unwrap();
    let v = parse(&tree_json(&text, 3, 2, "first").unwrap());
    for level in v["levels"].as_array().unwrap() {
        let nodes = level["nodes"].as_array().unwrap();
        for n in nodes.iter().filter(|n| n["kind"] == "unmarked") {
            let t = &n["target"];
            assert!(nodes.iter().any(|m| m["kind"] == "marked" && m["i"] == t[0] && m["j"] == t[1]));
        }
    }
}

#[test]
fn generated_families() {
    assert!(generate_text("permuted", 16, "2,1", 0).unwrap().lines().nth(1).unwrap().starts_with("11"));
    assert_eq!(generate_text("random", 8, "3", 9).unwrap(), generate_text("random", 8, "3", 9).unwrap());
    assert!(generate_text("nonmono", 1, "", 0).unwrap().starts_with("8 8"));
    assert!(generate_text("random", 8, "11", 0).is_err());
    assert!(generate_text("permuted", 16, "2,x", 0).is_err());
    assert!(generate_text("spiral", 16, "", 0).is_err());
    assert!(generate_text("separation", 1024, "", 0).is_err());
}

#[test]
fn bad_inputs_are_errors() {
    assert!(profile_json("2 2\nab\n").is_err());
    assert!(profile_json("1 2\nab\n").is_err());
    assert!(tree_json("2 2\nab\nba\n", 1, 1, "first").is_err());
    assert!(tree_json("2 2\nab\nba\n", 2, 1, "other").is_err());
    let big = format!("{0} {0}\n{1}", MAX_SIDE + 1, format!("{}\n", "a".repeat(MAX_SIDE + 1)).repeat(MAX_SIDE + 1));
    assert!(profile_json(&big).unwrap_err().contains("up to"));
}
