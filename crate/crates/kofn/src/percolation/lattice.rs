use crate::error::{Error, Result};

/// The six triangular-lattice neighbor offsets in axial coordinates, i.e. the
/// unit-distance directions under the embedding `(x, y) -> x + y exp(i pi/3)`.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// The R x R rhombus of the triangular lattice: vertices `(x, y)` with
/// `0 <= x, y < R`, adjacent when their embedded distance is one. Row-major
/// vertex indices, `index = y * R + x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriangularBox {
    r: usize,
}

impl TriangularBox {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("box side must be positive".into()));
        }
        Ok(TriangularBox { r })
    }

    pub fn side(&self) -> usize {
        self.r
    }

    pub fn vertex_count(&self) -> usize {
        self.r * self.r
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.r && y < self.r);
        y * self.r + x
    }

    pub fn coords(&self, v: usize) -> (usize, usize) {
        (v % self.r, v / self.r)
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.r && (y as usize) < self.r
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let (x, y) = self.coords(v);
        NEIGHBOR_OFFSETS.iter().filter_map(move |&(dx, dy)| {
            let nx = x as i32 + dx;
            let ny = y as i32 + dy;
            self.contains(nx, ny)
                .then(|| self.index(nx as usize, ny as usize))
        })
    }

    pub fn edge_count(&self) -> usize {
        (0..self.vertex_count())
            .map(|v| self.neighbors(v).filter(|&w| w > v).count())
            .sum()
    }

    pub fn is_left(&self, v: usize) -> bool {
        v % self.r == 0
    }

    pub fn is_right(&self, v: usize) -> bool {
        v % self.r == self.r - 1
    }

    pub fn is_bottom(&self, v: usize) -> bool {
        v / self.r == 0
    }

    pub fn is_top(&self, v: usize) -> bool {
        v / self.r == self.r - 1
    }

    pub fn left_side(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.r).map(move |y| self.index(0, y))
    }

    pub fn right_side(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.r).map(move |y| self.index(self.r - 1, y))
    }

    pub fn bottom_side(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.r).map(move |x| self.index(x, 0))
    }

    pub fn top_side(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.r).map(move |x| self.index(x, self.r - 1))
    }

    /// Graph distances from `from` to every vertex (breadth-first).
    pub fn distances_from(&self, from: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = std::collections::VecDeque::new();
        dist[from] = 0;
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}
