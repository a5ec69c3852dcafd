use crate::distributions::RandomStream;

/// Random geometric graph on the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanGraph {
    pub points: Vec<(f64, f64)>,
    /// Undirected edges `(i, j)` with `i < j`, shortest first.
    pub edges: Vec<(usize, usize)>,
    /// Connection radius: the length of the longest kept edge.
    pub radius: f64,
    /// Point sets discarded for being disconnected.
    pub redraws: u32,
}

/// Draws `nodes` uniform points and connects the `edges` closest pairs,
/// which is the radius graph whose radius yields exactly that many edges.
/// Point sets are redrawn until the graph is connected.
///
/// Panics if `edges` exceeds the number of pairs or no connected graph is
/// found in 1000 draws.
pub fn euclidean_graph(nodes: usize, edges: usize, seed: u64) -> EuclideanGraph {
    let pairs = nodes * nodes.saturating_sub(1) / 2;
    assert!(edges <= pairs, "{edges} edges requested on {nodes} nodes");
    for attempt in 0..1000u32 {
        let mut rng =
            RandomStream::substream(seed, &format!("geometric:{nodes}:{edges}:{attempt}"));
        let points: Vec<(f64, f64)> = (0..nodes).map(|_| (rng.uniform(), rng.uniform())).collect();
        let mut all: Vec<(f64, usize, usize)> = Vec::with_capacity(pairs);
        for i in 0..nodes {
            for j in i + 1..nodes {
                let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
                all.push((dx * dx + dy * dy, i, j));
            }
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        all.truncate(edges);
        let kept: Vec<(usize, usize)> = all.iter().map(|&(_, i, j)| (i, j)).collect();
        if connected(nodes, &kept) {
            return EuclideanGraph {
                points,
                radius: all.last().map_or(0.0, |e| e.0.sqrt()),
                edges: kept,
                redraws: attempt,
            };
        }
    }
    panic!("no connected graph with {nodes} nodes and {edges} edges in 1000 draws");
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..n).collect();
    let mut components = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components <= 1
}
