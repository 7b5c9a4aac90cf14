//! Exact k-nearest-neighbor search over a static point set.
//!
//! A kd-tree split on the widest bounding-box axis at the median. Candidates
//! are ranked by `(squared distance, point index)`, so equidistant points are
//! resolved towards the lowest index and results match an exhaustive scan
//! exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geom::dist_sq;
use crate::Point3;

const LEAF_SIZE: usize = 8;

/// One search hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance_sq: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.distance_sq.sqrt()
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.distance_sq
            .total_cmp(&other.distance_sq)
            .then(self.index.cmp(&other.index))
    }
}

struct Candidate(Neighbor);

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.key_cmp(&other.0)
    }
}

/// The `k` closest points to a member point, the member itself excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub center_index: usize,
    pub neighbor_indices: Vec<usize>,
    /// Euclidean distances, non-decreasing.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Immutable spatial index over a snapshot of a cloud's points.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    points: Vec<Point3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl NeighborIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        Self::from_points(cloud.points().to_vec())
    }

    pub fn from_points(points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut index = Self {
            order: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
        };
        index.build_node(0, index.points.len());
        Ok(index)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let points = &self.points;
        let slice = &mut self.order[start..end];
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in slice.iter() {
            for a in 0..3 {
                lo[a] = lo[a].min(points[i][a]);
                hi[a] = hi[a].max(points[i][a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .expect("three axes");
        if hi[axis] - lo[axis] == 0.0 {
            // All points coincide.
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |&i, &j| {
            points[i][axis].total_cmp(&points[j][axis]).then(i.cmp(&j))
        });
        let value = points[slice[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, start + mid);
        let right = self.build_node(start + mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    /// Returns the `min(k, candidates)` nearest points to `query`, sorted by
    /// distance then index. `exclude` removes one point index from the
    /// candidate set.
    pub fn knn(&self, query: Point3, k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, exclude, &mut heap);
        let mut out: Vec<Neighbor> = heap.into_iter().map(|c| c.0).collect();
        out.sort_by(Neighbor::key_cmp);
        out
    }

    fn search(
        &self,
        node: usize,
        query: Point3,
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let c = Candidate(Neighbor {
                        index: i,
                        distance_sq: dist_sq(query, self.points[i]),
                    });
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, query, k, exclude, heap);
                // Equal bounds are still visited: an equidistant point with a
                // lower index may sit on the far side.
                let worst = heap.peek().map(|c| c.0.distance_sq);
                if heap.len() < k || diff * diff <= worst.unwrap_or(f64::INFINITY) {
                    self.search(far, query, k, exclude, heap);
                }
            }
        }
    }

    /// Closest indexed point to `query`; ties resolve to the lowest index.
    pub fn nearest(&self, query: Point3, exclude: Option<usize>) -> Result<Neighbor> {
        self.knn(query, 1, exclude)
            .into_iter()
            .next()
            .ok_or(Error::TooFewPoints {
                needed: 2,
                actual: self.len(),
            })
    }

    /// The `k` nearest neighbors of member point `center`, itself excluded.
    pub fn k_neighborhood(&self, center: usize, k: usize) -> Result<Neighborhood> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "neighborhood size k must be >= 1".into(),
            ));
        }
        if self.len() < k + 1 {
            return Err(Error::TooFewPoints {
                needed: k + 1,
                actual: self.len(),
            });
        }
        if center >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "point index {center} out of range for {} points",
                self.len()
            )));
        }
        let hits = self.knn(self.points[center], k, Some(center));
        Ok(Neighborhood {
            center_index: center,
            neighbor_indices: hits.iter().map(|n| n.index).collect(),
            distances: hits.iter().map(Neighbor::distance).collect(),
        })
    }
}
