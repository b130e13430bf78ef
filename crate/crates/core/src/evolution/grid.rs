use crate::error::{contract, Error, Result};
use crate::strategy::Chromosome;

/// Moore offsets, row-major around the centre.
const MOORE: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Half of the Moore offsets; each unordered neighbour pair is reached once.
const FORWARD: [(isize, isize); 4] = [(0, 1), (1, -1), (1, 0), (1, 1)];

/// Players on a torus, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: usize,
    height: usize,
    cells: Vec<Chromosome>,
}

impl Grid {
    pub fn new(width: usize, height: usize, cells: Vec<Chromosome>) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::Config(format!(
                "grid must be at least 3x3, got {width}x{height}"
            )));
        }
        if cells.len() != width * height {
            return contract(format!(
                "{width}x{height} grid needs {} cells, got {}",
                width * height,
                cells.len()
            ));
        }
        Ok(Grid {
            width,
            height,
            cells,
        })
    }

    pub fn filled(width: usize, height: usize, c: Chromosome) -> Result<Self> {
        Grid::new(width, height, vec![c; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Chromosome] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Chromosome> {
        self.cells
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index / self.width, index % self.width)
    }

    fn offset(&self, (row, col): (usize, usize), (dr, dc): (isize, isize)) -> (usize, usize) {
        let r = (row as isize + dr).rem_euclid(self.height as isize) as usize;
        let c = (col as isize + dc).rem_euclid(self.width as isize) as usize;
        (r, c)
    }

    /// The eight Moore neighbours of `(row, col)`, wrapping at the edges.
    pub fn neighbors(&self, row: usize, col: usize) -> Result<[(usize, usize); 8]> {
        if row >= self.height || col >= self.width {
            return contract(format!(
                "cell ({row}, {col}) outside {}x{} grid",
                self.width, self.height
            ));
        }
        Ok(MOORE.map(|d| self.offset((row, col), d)))
    }

    /// Cell indices of the 3x3 block centred on `index`, the cell itself included.
    pub fn neighborhood(&self, index: usize) -> [usize; 9] {
        let at = self.coords(index);
        let mut out = [index; 9];
        for (slot, d) in out.iter_mut().skip(1).zip(MOORE) {
            let (r, c) = self.offset(at, d);
            *slot = self.index(r, c);
        }
        out
    }

    /// Every Moore-adjacent pair once, as cell indices, ordered by first cell.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.len() * 4);
        for row in 0..self.height {
            for col in 0..self.width {
                let here = self.index(row, col);
                for d in FORWARD {
                    let (r, c) = self.offset((row, col), d);
                    out.push((here, self.index(r, c)));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashSet};

    fn blank(w: usize, h: usize) -> Grid {
        Grid::filled(w, h, Chromosome::all_cooperate()).unwrap()
    }

    #[test]
    fn five_by_five_player_seven() {
        let g = blank(5, 5);
        let found: BTreeSet<usize> = g
            .neighbors(1, 2)
            .unwrap()
            .iter()
            .map(|&(r, c)| g.index(r, c))
            .collect();
        assert_eq!(found, BTreeSet::from([1, 2, 3, 6, 8, 11, 12, 13]));
    }

    #[test]
    fn corner_wraps() {
        let g = blank(50, 50);
        let found: BTreeSet<_> = g.neighbors(0, 0).unwrap().into_iter().collect();
        let expected = BTreeSet::from([
            (49, 49),
            (49, 0),
            (49, 1),
            (0, 49),
            (0, 1),
            (1, 49),
            (1, 0),
            (1, 1),
        ]);
        assert_eq!(found, expected);
    }

    #[test]
    fn neighbors_are_distinct_and_checked() {
        for (w, h) in [(3, 3), (3, 7), (6, 4), (20, 20)] {
            let g = blank(w, h);
            for row in 0..h {
                for col in 0..w {
                    let n = g.neighbors(row, col).unwrap();
                    let set: HashSet<_> = n.iter().collect();
                    assert_eq!(set.len(), 8);
                    assert!(!set.contains(&(row, col)));
                }
            }
            assert!(g.neighbors(h, 0).is_err());
            assert!(g.neighbors(0, w).is_err());
        }
    }

    #[test]
    fn edge_counts_and_regularity() {
        assert_eq!(blank(5, 5).edges().len(), 100);
        assert_eq!(blank(50, 50).edges().len(), 10_000);
        for (w, h) in [(3, 3), (4, 3), (5, 5), (7, 9)] {
            let g = blank(w, h);
            let edges = g.edges();
            let unique: HashSet<(usize, usize)> =
                edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            assert_eq!(unique.len(), edges.len());
            let mut degree = vec![0; g.len()];
            for &(a, b) in &edges {
                degree[a] += 1;
                degree[b] += 1;
            }
            assert!(degree.iter().all(|&d| d == 8));
            for &(a, b) in &edges {
                let (r, c) = g.coords(a);
                assert!(g.neighbors(r, c).unwrap().contains(&g.coords(b)));
            }
        }
    }

    #[test]
    fn neighborhood_is_cell_plus_moore() {
        let g = blank(5, 5);
        let n = g.neighborhood(7);
        assert_eq!(n[0], 7);
        let set: BTreeSet<_> = n.iter().copied().collect();
        assert_eq!(set, BTreeSet::from([1, 2, 3, 6, 7, 8, 11, 12, 13]));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::filled(2, 5, Chromosome::all_cooperate()).is_err());
        assert!(Grid::new(3, 3, vec![Chromosome::all_cooperate(); 8]).is_err());
    }
}
