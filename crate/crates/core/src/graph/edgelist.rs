//! Plain-text DAG format: one `A -> B` edge per line. A line holding a single
//! name declares an isolated node; `#` starts a comment.

use std::fmt::Write;

use super::{CausalGraph, GraphError};

pub fn parse_edge_list(text: &str) -> Result<CausalGraph, GraphError> {
    let mut g = CausalGraph::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: &str| GraphError::Syntax { line: i + 1, message: message.to_owned() };
        let valid_name = |s: &str| !s.is_empty() && !s.contains(char::is_whitespace) && !s.contains("->");
        match line.split_once("->") {
            Some((a, b)) => {
                let (a, b) = (a.trim(), b.trim());
                if !valid_name(a) || !valid_name(b) {
                    return Err(syntax("expected `A -> B`"));
                }
                g.add_edge(a, b);
            }
            None if valid_name(line) => {
                g.add_node(line);
            }
            None => return Err(syntax("expected `A -> B` or a single node name")),
        }
    }
    g.validate_dag()?;
    Ok(g)
}

pub fn write_edge_list(g: &CausalGraph) -> String {
    let mut out = String::new();
    let mut touched = vec![false; g.node_count()];
    for (a, b) in g.edges() {
        touched[g.id(a).unwrap_or_default()] = true;
        touched[g.id(b).unwrap_or_default()] = true;
        let _ = writeln!(out, "{a} -> {b}");
    }
    for (name, used) in g.names().iter().zip(touched) {
        if !used {
            let _ = writeln!(out, "{name}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_edges_nodes_and_comments() {
        let g = parse_edge_list("# demo\nA -> B\n  B->C  # trailing\n\nLonely\n").unwrap();
        assert_eq!(g.edges(), vec![("A", "B"), ("B", "C")]);
        assert!(g.contains("Lonely"));
    }

    #[test]
    fn rejects_bad_lines_and_cycles() {
        assert_eq!(
            parse_edge_list("A -> B\nA B C\n").unwrap_err(),
            GraphError::Syntax { line: 2, message: "expected `A -> B` or a single node name".into() }
        );
        assert!(matches!(parse_edge_list("A -> B\nB -> A\n"), Err(GraphError::Cycle(_))));
        assert!(parse_edge_list("A -> \n").is_err());
    }

    #[test]
    fn default_graph_round_trips() {
        let g = CausalGraph::default_graph();
        let back = parse_edge_list(&write_edge_list(&g)).unwrap();
        let (mut a, mut b) = (back.edges(), g.edges());
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}
