use std::collections::HashSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Taxonomic,
    Semantic,
    Final,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least one row and one column")]
    Empty,
    #[error("expected {rows}x{cols} cells, row {row} has {found}")]
    Shape {
        rows: usize,
        cols: usize,
        row: usize,
        found: usize,
    },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("duplicate learning outcome id '{0}'")]
    DuplicateId(String),
    #[error("cell ({row}, {col}) = {value} outside {kind:?} range")]
    OutOfRange {
        kind: GridKind,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("grids differ in shape or ids")]
    Mismatch,
}

/// Scores between receiving-course LOs (rows) and sending-course LOs
/// (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGrid {
    pub kind: GridKind,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<Vec<f64>>,
    /// Cells holding a neutral placeholder instead of a computed score.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flagged: Vec<(usize, usize)>,
}

fn check_ids(ids: &[String]) -> Result<(), GridError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(GridError::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

impl SimilarityGrid {
    pub fn new(
        kind: GridKind,
        rows: Vec<String>,
        cols: Vec<String>,
        cells: Vec<Vec<f64>>,
    ) -> Result<Self, GridError> {
        let g = SimilarityGrid {
            kind,
            rows,
            cols,
            cells,
            flagged: Vec::new(),
        };
        g.validate()?;
        Ok(g)
    }

    /// Check shape, id uniqueness and the value range of the grid kind.
    pub fn validate(&self) -> Result<(), GridError> {
        if self.rows.is_empty() || self.cols.is_empty() {
            return Err(GridError::Empty);
        }
        check_ids(&self.rows)?;
        check_ids(&self.cols)?;
        if self.cells.len() != self.rows.len() {
            return Err(GridError::RowCount {
                expected: self.rows.len(),
                found: self.cells.len(),
            });
        }
        let (lo, hi) = match self.kind {
            GridKind::Semantic => (-1.0, 1.0),
            GridKind::Taxonomic | GridKind::Final => (0.0, 1.0),
        };
        // Cosines of unit vectors can overshoot by an ulp or two.
        let slack = 1e-9;
        for (i, row) in self.cells.iter().enumerate() {
            if row.len() != self.cols.len() {
                return Err(GridError::Shape {
                    rows: self.rows.len(),
                    cols: self.cols.len(),
                    row: i,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < lo - slack || v > hi + slack {
                    return Err(GridError::OutOfRange {
                        kind: self.kind,
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row][col]
    }

    pub fn same_layout(&self, other: &SimilarityGrid) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// Swap rows and columns.
    pub fn transposed(&self) -> SimilarityGrid {
        let (m, n) = self.shape();
        let cells = (0..n)
            .map(|j| (0..m).map(|i| self.cells[i][j]).collect())
            .collect();
        SimilarityGrid {
            kind: self.kind,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            cells,
            flagged: self.flagged.iter().map(|&(i, j)| (j, i)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize, p: &str) -> Vec<String> {
        (0..n).map(|i| format!("{}{}", p, i)).collect()
    }

    #[test]
    fn rejects_bad_shapes_and_ids() {
        assert_eq!(
            SimilarityGrid::new(GridKind::Final, vec![], ids(1, "s"), vec![]),
            Err(GridError::Empty)
        );
        assert!(matches!(
            SimilarityGrid::new(GridKind::Final, ids(2, "r"), ids(2, "s"), vec![vec![0.1, 0.2], vec![0.3]]),
            Err(GridError::Shape { row: 1, .. })
        ));
        assert_eq!(
            SimilarityGrid::new(GridKind::Final, vec!["a".into(), "a".into()], ids(1, "s"), vec![vec![0.0], vec![0.0]]),
            Err(GridError::DuplicateId("a".into()))
        );
    }

    #[test]
    fn ranges_depend_on_kind() {
        let cells = vec![vec![-0.5]];
        assert!(SimilarityGrid::new(GridKind::Semantic, ids(1, "r"), ids(1, "s"), cells.clone()).is_ok());
        assert!(matches!(
            SimilarityGrid::new(GridKind::Final, ids(1, "r"), ids(1, "s"), cells),
            Err(GridError::OutOfRange { .. })
        ));
    }

    #[test]
    fn transpose_twice_is_identity() {
        let g = SimilarityGrid::new(
            GridKind::Taxonomic,
            ids(2, "r"),
            ids(3, "s"),
            vec![vec![0.0, 0.2, 0.4], vec![0.6, 0.8, 1.0]],
        )
        .unwrap();
        let t = g.transposed();
        assert_eq!(t.shape(), (3, 2));
        assert_eq!(t.get(2, 1), 1.0);
        assert_eq!(t.transposed(), g);
    }
}
