use super::{IndexedMesh, VertexAdjacency};
use crate::scalar::Real;

/// Dense component labels. Component 0 is the largest; equal sizes are
/// ordered by their smallest vertex index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Vertex indices of component `k`, ascending.
    pub fn members(&self, k: u32) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == k)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Labels the connected components of the vertex graph by breadth-first search.
pub fn connected_components<T: Real>(
    m: &IndexedMesh<T>,
    adj: &VertexAdjacency<T>,
) -> ComponentLabeling {
    let n = m.vertex_count();
    debug_assert_eq!(adj.vertex_count(), n);
    const UNSEEN: u32 = u32::MAX;
    let mut raw = vec![UNSEEN; n];
    // (size, smallest vertex) per raw component; discovery order already
    // yields ascending smallest-vertex order.
    let mut found: Vec<(usize, usize)> = Vec::new();
    let mut queue = Vec::new();
    for root in 0..n {
        if raw[root] != UNSEEN {
            continue;
        }
        let id = found.len() as u32;
        raw[root] = id;
        queue.clear();
        queue.push(root as u32);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head] as usize;
            head += 1;
            for &w in adj.neighbors(v) {
                if raw[w as usize] == UNSEEN {
                    raw[w as usize] = id;
                    queue.push(w);
                }
            }
        }
        found.push((queue.len(), root));
    }

    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&a, &b| {
        found[b]
            .0
            .cmp(&found[a].0)
            .then(found[a].1.cmp(&found[b].1))
    });
    let mut remap = vec![0u32; found.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new as u32;
    }
    ComponentLabeling {
        labels: raw.into_iter().map(|r| remap[r as usize]).collect(),
        sizes: order.iter().map(|&o| found[o].0).collect(),
    }
}
