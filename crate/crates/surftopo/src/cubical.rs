//! Cubical filtrations of 2D scalar fields on the doubled grid.
//!
//! An `H x W` patch induces a cubical complex on the doubled grid of
//! `(2H + 1) * (2W + 1)` cells addressed by coordinates `(a, b)` with
//! `0 <= a <= 2H`, `0 <= b <= 2W`. The dimension of a cell is the number of
//! odd coordinates: pixels are the 2-cells at `(2i + 1, 2j + 1)`, edges and
//! vertices fill the even positions between them. Each 2-cell carries its
//! pixel value (negated for superlevel filtrations) and every lower cell
//! carries the minimum over the 2-cells it bounds, so faces never appear
//! later than their cofaces. Cells are ordered by `(value, dim, id)`, which
//! fixes a total filtration order used by the persistence reduction.

use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::Patch;
use crate::union_find::UnionFind;

/// Filtration direction over the scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Sublevel sets of the values (valleys appear first).
    Sublevel,
    /// Sublevel sets of the negated values (peaks appear first).
    Superlevel,
}

/// Maximum number of codimension-1 faces of a cell in 2D.
const MAX_FACES: usize = 4;

/// A filtered cubical complex in filtration order.
#[derive(Debug, Clone)]
pub struct CubicalFiltration {
    height: usize,
    width: usize,
    direction: Direction,
    /// Cell values in filtration order.
    values: Vec<f64>,
    /// Cell dimensions in filtration order.
    dims: Vec<u8>,
    /// Doubled-grid ids (`a * (2W + 1) + b`) in filtration order.
    ids: Vec<u32>,
    /// Positions (filtration indices) of each cell's codim-1 faces.
    faces: Vec<[u32; MAX_FACES]>,
    face_counts: Vec<u8>,
}

impl CubicalFiltration {
    /// Build the filtration of a patch (see module docs).
    pub fn from_values(
        height: usize,
        width: usize,
        pixel_values: &[f64],
        direction: Direction,
    ) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidConfig(
                "filtration needs at least one pixel".into(),
            ));
        }
        if pixel_values.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected_height: height,
                expected_width: width,
                got_height: pixel_values.len() / width.max(1),
                got_width: width,
            });
        }
        if let Some(i) = pixel_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "pixel at flat index {i} is {}",
                pixel_values[i]
            )));
        }

        let sign = match direction {
            Direction::Sublevel => 1.0,
            Direction::Superlevel => -1.0,
        };
        let rows = 2 * height + 1;
        let cols = 2 * width + 1;
        let n = rows * cols;

        // Per-id value and dimension on the doubled grid.
        let mut id_values = vec![0.0f64; n];
        let mut id_dims = vec![0u8; n];
        for a in 0..rows {
            // Pixel rows whose closure contains doubled-grid row `a`.
            let (i_lo, i_hi) = incident_range(a, height);
            for b in 0..cols {
                let (j_lo, j_hi) = incident_range(b, width);
                let mut v = f64::INFINITY;
                for i in i_lo..i_hi {
                    for j in j_lo..j_hi {
                        v = v.min(sign * pixel_values[i * width + j]);
                    }
                }
                let id = a * cols + b;
                id_values[id] = v;
                id_dims[id] = ((a % 2) + (b % 2)) as u8;
            }
        }

        // Filtration order: by (value, dim, id).
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by(|&x, &y| {
            id_values[x as usize]
                .total_cmp(&id_values[y as usize])
                .then(id_dims[x as usize].cmp(&id_dims[y as usize]))
                .then(x.cmp(&y))
        });
        let mut pos_of_id = vec![0u32; n];
        for (pos, &id) in order.iter().enumerate() {
            pos_of_id[id as usize] = pos as u32;
        }

        let mut values = Vec::with_capacity(n);
        let mut dims = Vec::with_capacity(n);
        let mut faces = Vec::with_capacity(n);
        let mut face_counts = Vec::with_capacity(n);
        for &id in &order {
            let (a, b) = (id as usize / cols, id as usize % cols);
            values.push(id_values[id as usize]);
            dims.push(id_dims[id as usize]);
            let mut f = [u32::MAX; MAX_FACES];
            let mut count = 0usize;
            // Faces drop one odd coordinate to an adjacent even one.
            if a % 2 == 1 {
                f[count] = pos_of_id[(a - 1) * cols + b];
                f[count + 1] = pos_of_id[(a + 1) * cols + b];
                count += 2;
            }
            if b % 2 == 1 {
                f[count] = pos_of_id[a * cols + (b - 1)];
                f[count + 1] = pos_of_id[a * cols + (b + 1)];
                count += 2;
            }
            faces.push(f);
            face_counts.push(count as u8);
        }

        Ok(CubicalFiltration {
            height,
            width,
            direction,
            values,
            dims,
            ids: order,
            faces,
            face_counts,
        })
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pixel rows of the underlying patch.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel columns of the underlying patch.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Value of the cell at filtration position `pos`.
    pub fn value(&self, pos: usize) -> f64 {
        self.values[pos]
    }

    /// Dimension (0, 1 or 2) of the cell at filtration position `pos`.
    pub fn dim(&self, pos: usize) -> u8 {
        self.dims[pos]
    }

    /// Doubled-grid coordinates `(a, b)` of the cell at position `pos`.
    pub fn coords(&self, pos: usize) -> (usize, usize) {
        let cols = 2 * self.width + 1;
        let id = self.ids[pos] as usize;
        (id / cols, id % cols)
    }

    /// Filtration positions of the codim-1 faces of the cell at `pos`.
    pub fn faces(&self, pos: usize) -> &[u32] {
        &self.faces[pos][..self.face_counts[pos] as usize]
    }

    /// Cell counts by dimension `[vertices, edges, squares]`.
    pub fn counts_by_dim(&self) -> [usize; 3] {
        let mut out = [0usize; 3];
        for &d in &self.dims {
            out[d as usize] += 1;
        }
        out
    }

    /// Minimum and maximum cell value (equals the signed pixel range).
    pub fn value_range(&self) -> (f64, f64) {
        (self.values[0], *self.values.last().unwrap())
    }

    /// Overwrite one cell value to fabricate an invalid filtration; only for
    /// exercising error paths in tests.
    #[cfg(test)]
    pub(crate) fn corrupt_value_for_tests(&mut self, pos: usize, value: f64) {
        self.values[pos] = value;
    }

    /// Export the cells in filtration order as CSV (`a,b,dim,value`).
    pub fn write_cells_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("a,b,dim,value\n");
        for pos in 0..self.len() {
            let (a, b) = self.coords(pos);
            out.push_str(&format!(
                "{a},{b},{},{}\n",
                self.dims[pos], self.values[pos]
            ));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Half-open range of pixel indices whose closure covers doubled-grid
/// coordinate `a` along an axis with `extent` pixels.
fn incident_range(a: usize, extent: usize) -> (usize, usize) {
    if a % 2 == 1 {
        // Interior of pixel (a - 1) / 2.
        let i = (a - 1) / 2;
        (i, i + 1)
    } else {
        // Between pixels a/2 - 1 and a/2, clipped to the image.
        let lo = if a == 0 { 0 } else { a / 2 - 1 };
        let hi = (a / 2).min(extent - 1);
        (lo, hi + 1)
    }
}

/// Build the filtration of a patch.
pub fn build_filtration(patch: &Patch, direction: Direction) -> Result<CubicalFiltration> {
    CubicalFiltration::from_values(patch.size, patch.size, &patch.values, direction)
}

/// Betti numbers `(b0, b1)` of the sublevel complex at threshold `r`.
///
/// Connected components come from a union-find over the cells with value
/// `<= r`; the cycle rank follows from the Euler characteristic,
/// `b1 = b0 - (#vertices - #edges + #squares)`, since a 2D grid complex has
/// no 2-cycles.
pub fn betti_numbers(filtration: &CubicalFiltration, r: f64) -> (usize, usize) {
    if r.is_nan() {
        return (0, 0);
    }
    let n = filtration.len();
    let mut uf = UnionFind::new(n);
    let mut included = 0usize;
    let mut counts = [0i64; 3];
    for pos in 0..n {
        if filtration.value(pos) > r {
            // Values are sorted, so no later cell is included either.
            break;
        }
        included += 1;
        counts[filtration.dim(pos) as usize] += 1;
        for &f in filtration.faces(pos) {
            // Faces have values <= the cell value, so they are included.
            uf.union(pos as u32, f);
        }
    }
    if included == 0 {
        return (0, 0);
    }
    let b0 = uf.components() - (n - included);
    let euler = counts[0] - counts[1] + counts[2];
    let b1 = (b0 as i64 - euler).max(0);
    debug_assert!(b0 as i64 - euler >= 0, "negative cycle rank");
    (b0, b1 as usize)
}
