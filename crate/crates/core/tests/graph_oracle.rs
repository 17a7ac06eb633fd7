mod support;

use draftcause::behavior::Treatment;
use draftcause::graph::{parse_edge_list, write_edge_list, CausalGraph};
use draftcause::metrics::Outcome;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{all_dags, all_triples, names, random_dag, Dag};

fn disagreements(dag: &Dag, triples: &[(Vec<usize>, Vec<usize>, Vec<usize>)]) -> usize {
    let g = dag.to_graph();
    let mut bad = 0;
    for (x, y, z) in triples {
        let (xn, yn, zn) = (names(x), names(y), names(z));
        let fast = g.d_separated(&refs(&xn), &refs(&yn), &refs(&zn)).unwrap();
        if fast != dag.d_separated_brute(x, y, z) {
            bad += 1;
        }
    }
    bad
}

#[test]
fn there_are_543_four_node_dags() {
    assert_eq!(all_dags(4).len(), 543);
    assert_eq!(all_dags(3).len(), 25);
}

#[test]
fn d_separation_matches_brute_force_on_all_four_node_dags() {
    let triples = all_triples(4);
    let bad: usize = all_dags(4).iter().map(|d| disagreements(d, &triples)).sum();
    assert_eq!(bad, 0);
}

#[test]
fn d_separation_matches_brute_force_on_random_five_node_dags() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let triples = all_triples(5);
    let bad: usize = (0..200).map(|_| disagreements(&random_dag(5, &mut rng), &triples)).sum();
    assert_eq!(bad, 0);
}

#[test]
fn returned_backdoor_sets_pass_the_conditions_via_d_separation() {
    // Re-check each set: no descendant of T, and T ⫫ Y | Z once T's outgoing
    // edges are removed.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let dag = random_dag(5, &mut rng);
        let g = dag.to_graph();
        for t in 0..5 {
            for y in 0..5 {
                if t == y {
                    continue;
                }
                let (tn, yn) = (support::name(t), support::name(y));
                let sets = g.backdoor_sets(&tn, &yn).unwrap();
                let mut cut = dag.clone();
                cut.edge[t] = vec![false; 5];
                let desc = descendants(&dag, t);
                for set in sets {
                    let ids: Vec<usize> = set.iter().map(|s| s[1..].parse().unwrap()).collect();
                    assert!(ids.iter().all(|v| !desc[*v]), "{set:?} holds a descendant of {tn}");
                    assert!(cut.d_separated_brute(&[t], &[y], &ids), "{tn}->{yn} {set:?}");
                }
            }
        }
    }
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn descendants(dag: &Dag, v: usize) -> Vec<bool> {
    let mut out = vec![false; dag.n];
    let mut stack = vec![v];
    while let Some(i) = stack.pop() {
        for j in 0..dag.n {
            if dag.edge[i][j] && !out[j] {
                out[j] = true;
                stack.push(j);
            }
        }
    }
    out
}

#[test]
fn all_confounders_adjust_every_pair_on_the_default_graph() {
    let g = CausalGraph::default_graph();
    let full = ["C1", "C2", "C3", "C4", "C5"];
    for t in Treatment::ALL {
        for y in Outcome::ALL {
            assert!(g.is_backdoor_set(t.as_str(), y.as_str(), &full).unwrap());
            let sets = g.backdoor_sets(t.as_str(), y.as_str()).unwrap();
            assert!(sets.iter().any(|s| s == &full.map(String::from).to_vec()), "{t}/{y}: {sets:?}");
        }
    }
}

#[test]
fn edge_list_round_trips() {
    let g = CausalGraph::default_graph();
    let back = parse_edge_list(&write_edge_list(&g)).unwrap();
    let mut a = g.edges();
    let mut b = back.edges();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}
