//! Rectangular 2D lattice geometry: node addressing, von Neumann
//! neighborhoods under periodic or open boundaries, and the peripheral ring.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary condition of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Opposite edges are identified; every node has exactly four neighbors
    /// (fewer on degenerate 2xN lattices where wrap-around neighbors
    /// coincide).
    Periodic,
    /// Edges are hard walls; edge and corner nodes have three or two
    /// neighbors.
    Open,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Periodic => write!(f, "periodic"),
            Boundary::Open => write!(f, "open"),
        }
    }
}

/// A node address: zero-based row and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub row: usize,
    pub col: usize,
}

impl Node {
    pub fn new(row: usize, col: usize) -> Self {
        Node { row, col }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Shape and boundary condition of a lattice. Construction validates that
/// both dimensions are at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        if rows < 2 {
            return Err(Error::invalid(format!("rows must be at least 2, got {rows}")));
        }
        if cols < 2 {
            return Err(Error::invalid(format!("cols must be at least 2, got {cols}")));
        }
        Ok(LatticeSpec { rows, cols, boundary })
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, node: Node) -> bool {
        node.row < self.rows && node.col < self.cols
    }

    /// Row-major flat index: `row * cols + col`.
    pub fn flat_index(&self, node: Node) -> usize {
        debug_assert!(self.contains(node));
        node.row * self.cols + node.col
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn node_at(&self, index: usize) -> Node {
        debug_assert!(index < self.len());
        Node::new(index / self.cols, index % self.cols)
    }

    /// Von Neumann neighbors of `node` in up, down, left, right order.
    ///
    /// Periodic boundaries wrap; open boundaries drop out-of-range
    /// candidates. Coinciding wrap-around candidates (possible when a
    /// dimension is exactly 2) are listed once, keeping first-occurrence
    /// order, and `node` itself never appears.
    pub fn neighbors(&self, node: Node) -> Result<Vec<Node>> {
        if !self.contains(node) {
            return Err(Error::invalid(format!(
                "node {node} out of range for {}x{} lattice",
                self.rows, self.cols
            )));
        }
        let offsets: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
        let mut out = Vec::with_capacity(4);
        for (dr, dc) in offsets {
            let candidate = match self.boundary {
                Boundary::Periodic => Some(Node::new(
                    add_wrap(node.row, dr, self.rows),
                    add_wrap(node.col, dc, self.cols),
                )),
                Boundary::Open => {
                    let row = node.row.checked_add_signed(dr);
                    let col = node.col.checked_add_signed(dc);
                    match (row, col) {
                        (Some(r), Some(c)) if r < self.rows && c < self.cols => {
                            Some(Node::new(r, c))
                        }
                        _ => None,
                    }
                }
            };
            if let Some(n) = candidate {
                if n != node && !out.contains(&n) {
                    out.push(n);
                }
            }
        }
        Ok(out)
    }

    /// Nodes of the outer ring (first/last row and first/last column), in
    /// row-major order. The ring is geometric and does not depend on the
    /// boundary condition.
    pub fn peripheral_nodes(&self) -> Vec<Node> {
        let mut out = Vec::with_capacity(2 * self.rows + 2 * self.cols - 4);
        for row in 0..self.rows {
            for col in 0..self.cols {
                if row == 0 || row == self.rows - 1 || col == 0 || col == self.cols - 1 {
                    out.push(Node::new(row, col));
                }
            }
        }
        out
    }

    /// The peripheral ring walked clockwise from the top-left corner:
    /// top row left to right, right column downward, bottom row right to
    /// left, left column upward. Each node appears exactly once.
    pub fn peripheral_walk(&self) -> Vec<Node> {
        let (rows, cols) = (self.rows, self.cols);
        let mut out = Vec::with_capacity(2 * rows + 2 * cols - 4);
        for col in 0..cols {
            out.push(Node::new(0, col));
        }
        for row in 1..rows {
            out.push(Node::new(row, cols - 1));
        }
        for col in (0..cols - 1).rev() {
            out.push(Node::new(rows - 1, col));
        }
        for row in (1..rows - 1).rev() {
            out.push(Node::new(row, 0));
        }
        out
    }
}

fn add_wrap(x: usize, d: isize, modulus: usize) -> usize {
    let m = modulus as isize;
    let v = (x as isize + d).rem_euclid(m);
    v as usize
}
