use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Grid coordinates `(grid row, grid column)`.
pub type Coords = (usize, usize);

/// Who owns what: the 2D block map shared by every simulated process.
///
/// Rows are optionally permuted before blocking; row block `a` holds the
/// rows whose permuted position falls in `row_range(a)`. Columns are
/// blocked in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    n: usize,
    q: usize,
    row_at: Vec<usize>,
    row_pos: Vec<usize>,
    row_block: Vec<usize>,
    col_block: Vec<usize>,
}

impl Layout {
    pub fn new(n: usize, q: usize, seed: Option<u64>) -> Self {
        assert!(q >= 1 && q <= n.max(1));
        let mut row_at: Vec<usize> = (0..n).collect();
        if let Some(seed) = seed {
            row_at.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let mut row_pos = vec![0; n];
        for (pos, &i) in row_at.iter().enumerate() {
            row_pos[i] = pos;
        }
        let block_of = |pos: usize| (0..q).find(|&a| pos < bound(n, q, a + 1)).unwrap_or(q - 1);
        let row_block = (0..n).map(|i| block_of(row_pos[i])).collect();
        let col_block = (0..n).map(block_of).collect();
        Layout { n, q, row_at, row_pos, row_block, col_block }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Positions `[start, end)` covered by block `a` on either axis.
    pub fn block_range(&self, a: usize) -> Range<usize> {
        bound(self.n, self.q, a)..bound(self.n, self.q, a + 1)
    }

    /// Global rows of row block `a`, in position order.
    pub fn rows_of_block(&self, a: usize) -> &[usize] {
        &self.row_at[self.block_range(a)]
    }

    pub fn row_block(&self, i: usize) -> usize {
        self.row_block[i]
    }

    pub fn col_block(&self, j: usize) -> usize {
        self.col_block[j]
    }

    /// Index of row `i` within its row block.
    pub fn local_row(&self, i: usize) -> usize {
        self.row_pos[i] - bound(self.n, self.q, self.row_block[i])
    }

    /// Index of column `j` within its column block.
    pub fn local_col(&self, j: usize) -> usize {
        j - bound(self.n, self.q, self.col_block[j])
    }

    /// Process holding cell `(i, j)`.
    pub fn owner(&self, i: usize, j: usize) -> Coords {
        (self.row_block[i], self.col_block[j])
    }

    pub fn index(&self, (a, b): Coords) -> usize {
        a * self.q + b
    }

    /// Row permutation as "position -> global row".
    pub fn row_order(&self) -> &[usize] {
        &self.row_at
    }
}

fn bound(n: usize, q: usize, a: usize) -> usize {
    a * n / q
}
