#![allow(dead_code)]

use std::path::{Path, PathBuf};

use draftcause::graph::CausalGraph;
use draftcause::ingest::{Edit, EventSource, Origin, Replayer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

/// Copies the fixture corpus into a fresh temp dir so runs can write `out/`.
pub fn corpus_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let src = fixture_corpus();
    std::fs::create_dir(dir.path().join("sessions")).unwrap();
    for entry in std::fs::read_dir(src.join("sessions")).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dir.path().join("sessions").join(entry.file_name())).unwrap();
    }
    for f in ["metadata.csv", "pipeline.toml"] {
        std::fs::copy(src.join(f), dir.path().join(f)).unwrap();
    }
    dir
}

/// All files under `dir` with their bytes, sorted by name.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Adjacency-matrix DAG used by the brute-force oracle.
#[derive(Clone, Debug)]
pub struct Dag {
    pub n: usize,
    pub edge: Vec<Vec<bool>>,
}

pub fn name(i: usize) -> String {
    format!("V{i}")
}

impl Dag {
    pub fn to_graph(&self) -> CausalGraph {
        let mut g = CausalGraph::new();
        for i in 0..self.n {
            g.add_node(&name(i));
        }
        for i in 0..self.n {
            for j in 0..self.n {
                if self.edge[i][j] {
                    g.add_edge(&name(i), &name(j));
                }
            }
        }
        g
    }

    fn is_acyclic(&self) -> bool {
        // Kahn's algorithm.
        let mut indeg: Vec<usize> = (0..self.n).map(|j| (0..self.n).filter(|&i| self.edge[i][j]).count()).collect();
        let mut stack: Vec<usize> = (0..self.n).filter(|&j| indeg[j] == 0).collect();
        let mut seen = 0;
        while let Some(i) = stack.pop() {
            seen += 1;
            for j in 0..self.n {
                if self.edge[i][j] {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        stack.push(j);
                    }
                }
            }
        }
        seen == self.n
    }

    fn descendants_or_self(&self, v: usize) -> Vec<bool> {
        let mut out = vec![false; self.n];
        let mut stack = vec![v];
        while let Some(i) = stack.pop() {
            if out[i] {
                continue;
            }
            out[i] = true;
            stack.extend((0..self.n).filter(|&j| self.edge[i][j]));
        }
        out
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edge[a][b] || self.edge[b][a]
    }

    /// Is the simple path blocked by `z`?
    fn blocked(&self, path: &[usize], z: &[bool]) -> bool {
        for k in 1..path.len() - 1 {
            let (a, m, b) = (path[k - 1], path[k], path[k + 1]);
            let collider = self.edge[a][m] && self.edge[b][m];
            if collider {
                let opened = self.descendants_or_self(m).iter().zip(z).any(|(d, zz)| *d && *zz);
                if !opened {
                    return true;
                }
            } else if z[m] {
                return true;
            }
        }
        false
    }

    /// Enumerates every simple undirected path between `x` and `y`; separated
    /// iff all are blocked.
    pub fn d_separated_brute(&self, xs: &[usize], ys: &[usize], zs: &[usize]) -> bool {
        let mut z = vec![false; self.n];
        for &v in zs {
            z[v] = true;
        }
        for &x in xs {
            for &y in ys {
                let mut path = vec![x];
                let mut on = vec![false; self.n];
                on[x] = true;
                if self.open_path_exists(&mut path, &mut on, y, &z) {
                    return false;
                }
            }
        }
        true
    }

    fn open_path_exists(&self, path: &mut Vec<usize>, on: &mut [bool], target: usize, z: &[bool]) -> bool {
        let last = *path.last().unwrap();
        if last == target {
            return !self.blocked(path, z);
        }
        for next in 0..self.n {
            if on[next] || !self.adjacent(last, next) {
                continue;
            }
            path.push(next);
            on[next] = true;
            let found = self.open_path_exists(path, on, target, z);
            on[next] = false;
            path.pop();
            if found {
                return true;
            }
        }
        false
    }
}

/// Every labeled DAG on `n` nodes (543 for n = 4).
pub fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    // Each unordered pair: no edge, i -> j, or j -> i.
    let total = 3usize.pow(pairs.len() as u32);
    for mut code in 0..total {
        let mut edge = vec![vec![false; n]; n];
        for &(i, j) in &pairs {
            match code % 3 {
                1 => edge[i][j] = true,
                2 => edge[j][i] = true,
                _ => {}
            }
            code /= 3;
        }
        let dag = Dag { n, edge };
        if dag.is_acyclic() {
            out.push(dag);
        }
    }
    out
}

pub fn random_dag(n: usize, rng: &mut impl Rng) -> Dag {
    loop {
        let mut edge = vec![vec![false; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                match rng.random_range(0..3) {
                    1 => edge[i][j] = true,
                    2 => edge[j][i] = true,
                    _ => {}
                }
            }
        }
        let dag = Dag { n, edge };
        if dag.is_acyclic() {
            return dag;
        }
    }
}

/// Every (X, Y, Z) with X, Y non-empty and X, Y, Z pairwise disjoint.
pub fn all_triples(n: usize) -> Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for mut code in 0..4usize.pow(n as u32) {
        let (mut x, mut y, mut z) = (Vec::new(), Vec::new(), Vec::new());
        for v in 0..n {
            match code % 4 {
                1 => x.push(v),
                2 => y.push(v),
                3 => z.push(v),
                _ => {}
            }
            code /= 4;
        }
        if !x.is_empty() && !y.is_empty() {
            out.push((x, y, z));
        }
    }
    out
}

pub fn names(vs: &[usize]) -> Vec<String> {
    vs.iter().map(|&v| name(v)).collect()
}

/// Character-level shadow document: each char remembers the api event that
/// inserted it, or `None` for human text.
#[derive(Default)]
struct Shadow {
    chars: Vec<(char, Option<usize>)>,
}

impl Shadow {
    fn apply(&mut self, edit: &Edit, source: EventSource, event: usize) -> bool {
        let end = edit.offset + edit.deleted;
        if end > self.chars.len() {
            return false;
        }
        self.chars.drain(edit.offset..end);
        let tag = (source == EventSource::Api).then_some(event);
        let ins: Vec<_> = edit.inserted.chars().map(|c| (c, tag)).collect();
        self.chars.splice(edit.offset..edit.offset, ins);
        true
    }

    fn text(&self) -> String {
        self.chars.iter().map(|c| c.0).collect()
    }
}

fn random_text(rng: &mut impl Rng) -> String {
    const ALPHABET: &[char] = &['a', 'b', ' ', '.', 'é', '日', '\n'];
    (0..rng.random_range(1..6)).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())]).collect()
}

/// Replays `sequences` random edit scripts against the shadow model, checking
/// tiling, text, per-character provenance and rejection of out-of-range edits.
pub fn fuzz_replay(sequences: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for seq in 0..sequences {
        let mut replayer = Replayer::new("");
        let mut shadow = Shadow::default();
        for event in 0..rng.random_range(1..25) {
            let len = shadow.chars.len();
            // Occasionally aim past the end to exercise bounds checks.
            let offset = rng.random_range(0..=len + 1);
            let deleted = if rng.random_bool(0.4) { rng.random_range(0..=3) } else { 0 };
            let inserted = if deleted == 0 || rng.random_bool(0.3) { random_text(&mut rng) } else { String::new() };
            let edit = Edit { offset, inserted, deleted };
            let source = if rng.random_bool(0.3) { EventSource::Api } else { EventSource::User };
            let fail = |what: &str| Err(format!("sequence {seq}, event {event}, {edit:?}: {what}"));

            let before = replayer.state();
            let shadow_ok = shadow.apply(&edit, source, event);
            let result = replayer.apply_edit(&edit, source, event);
            if result.is_ok() != shadow_ok {
                return fail("bounds check disagrees with the model");
            }
            if !shadow_ok {
                if replayer.state() != before {
                    return fail("rejected edit changed the document");
                }
                continue;
            }
            let state = replayer.state();
            if !state.tiling_holds() {
                return fail("tiling violated");
            }
            if state.text != shadow.text() {
                return fail("text differs from the model");
            }
            for span in &state.spans {
                if (span.origin == Origin::Human) != span.source_event.is_none() {
                    return fail("origin and source event disagree");
                }
                if (span.start..span.end).any(|pos| span.source_event != shadow.chars[pos].1) {
                    return fail("provenance differs from the model");
                }
            }
        }
    }
    Ok(())
}
