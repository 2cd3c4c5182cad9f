//! Persistence diagrams of cubical filtrations over Z/2.
//!
//! [`compute_persistence`] runs boundary-matrix column reduction with the
//! twist (clearing) optimization: dimension-2 columns are reduced first and
//! their pivot rows are skipped in the dimension-1 pass, since those columns
//! are known to reduce to zero. [`oracle_persistence`] is a deliberately
//! naive reference: a dense bitwise Gaussian elimination, processed strictly
//! left to right with no clearing, usable up to [`ORACLE_CELL_BOUND`] cells.
//! Both return identical multisets of diagram points, including
//! zero-persistence pairs; callers filter those downstream if they want to.

use std::path::Path;

use crate::cubical::CubicalFiltration;
use crate::error::{Error, Result};

/// A single interval of a persistence diagram.
///
/// `death` is `f64::INFINITY` for essential classes until the diagram is
/// run through [`finitize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramPoint {
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
}

impl DiagramPoint {
    /// Interval length; infinite for essential classes.
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// A persistence diagram in canonical order `(dim, birth, death)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub points: Vec<DiagramPoint>,
    /// Minimum and maximum cell value of the originating filtration.
    pub value_range: (f64, f64),
}

/// How essential (infinite-death) classes are mapped to finite intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinitizePolicy {
    /// Replace infinite deaths by the maximum filtration value.
    CapAtMax,
    /// Remove essential classes entirely.
    DropEssential,
}

impl PersistenceDiagram {
    /// True when no point has an infinite death.
    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p.death.is_finite())
    }

    /// Points of one homology dimension.
    pub fn points_in_dim(&self, dim: u8) -> impl Iterator<Item = &DiagramPoint> {
        self.points.iter().filter(move |p| p.dim == dim)
    }

    /// Points with strictly positive persistence.
    pub fn nonzero_points(&self) -> impl Iterator<Item = &DiagramPoint> {
        self.points.iter().filter(|p| p.death > p.birth)
    }

    /// Number of classes of dimension `dim` alive at threshold `r`
    /// (intervals are half-open: `birth <= r < death`).
    pub fn classes_alive_at(&self, dim: u8, r: f64) -> usize {
        self.points
            .iter()
            .filter(|p| p.dim == dim && p.birth <= r && r < p.death)
            .count()
    }

    /// Keep only the points of `dim`, preserving the value range.
    pub fn restrict_to_dim(&self, dim: u8) -> PersistenceDiagram {
        PersistenceDiagram {
            points: self
                .points
                .iter()
                .filter(|p| p.dim == dim)
                .copied()
                .collect(),
            value_range: self.value_range,
        }
    }

    fn sort_canonical(&mut self) {
        self.points.sort_unstable_by(|x, y| {
            x.dim
                .cmp(&y.dim)
                .then(x.birth.total_cmp(&y.birth))
                .then(x.death.total_cmp(&y.death))
        });
    }

    /// Export as CSV with header `dim,birth,death`; infinite deaths print as
    /// `inf`. Values use the shortest round-tripping representation.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.dim, p.birth, p.death));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Read a diagram written by [`PersistenceDiagram::write_csv`]. The value
    /// range is reconstructed as the span of the finite coordinates.
    pub fn read_csv(path: &Path) -> Result<PersistenceDiagram> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "dim,birth,death")) => {}
            _ => {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    line: 1,
                    reason: "expected header dim,birth,death".into(),
                })
            }
        }
        let bad = |line: usize, reason: String| Error::Csv {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut points = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut next = |what: &str| {
                fields
                    .next()
                    .ok_or_else(|| bad(idx + 1, format!("missing {what}")))
            };
            let dim: u8 = next("dim")?
                .parse()
                .map_err(|_| bad(idx + 1, "dimension is not an integer".into()))?;
            if dim > 2 {
                return Err(bad(idx + 1, format!("dimension {dim} out of range")));
            }
            let birth: f64 = next("birth")?
                .parse()
                .map_err(|_| bad(idx + 1, "birth is not a number".into()))?;
            let death: f64 = next("death")?
                .parse()
                .map_err(|_| bad(idx + 1, "death is not a number".into()))?;
            if !birth.is_finite() || death.is_nan() || death < birth {
                return Err(bad(idx + 1, format!("invalid interval [{birth}, {death})")));
            }
            points.push(DiagramPoint { dim, birth, death });
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &points {
            lo = lo.min(p.birth);
            hi = hi.max(p.birth);
            if p.death.is_finite() {
                hi = hi.max(p.death);
            }
        }
        let value_range = if points.is_empty() {
            (0.0, 0.0)
        } else {
            (lo, hi)
        };
        let mut d = PersistenceDiagram {
            points,
            value_range,
        };
        d.sort_canonical();
        Ok(d)
    }
}

/// Map essential classes to finite intervals according to `policy`.
pub fn finitize(diagram: &PersistenceDiagram, policy: FinitizePolicy) -> PersistenceDiagram {
    let (_, max) = diagram.value_range;
    let points = diagram
        .points
        .iter()
        .filter_map(|p| {
            if p.death.is_finite() {
                Some(*p)
            } else {
                match policy {
                    FinitizePolicy::CapAtMax => Some(DiagramPoint {
                        dim: p.dim,
                        birth: p.birth,
                        death: max,
                    }),
                    FinitizePolicy::DropEssential => None,
                }
            }
        })
        .collect();
    let mut d = PersistenceDiagram {
        points,
        value_range: diagram.value_range,
    };
    d.sort_canonical();
    d
}

/// Largest complex the naive reference reduction will accept.
pub const ORACLE_CELL_BOUND: usize = 2_500;

const NO_COL: u32 = u32::MAX;

/// Persistence via column reduction with the twist optimization.
pub fn compute_persistence(filtration: &CubicalFiltration) -> Result<PersistenceDiagram> {
    validate_monotone(filtration)?;
    let n = filtration.len();
    // pivot_col[row] = column whose reduced boundary ends at `row`.
    let mut pivot_col = vec![NO_COL; n];
    let mut zero_col = vec![false; n];
    let mut cleared = vec![false; n];
    let mut pairs: Vec<(u32, u32)> = Vec::new();

    for target_dim in [2u8, 1u8] {
        // Reduced columns of the current dimension, keyed by position.
        let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); n];
        for pos in 0..n {
            if filtration.dim(pos) != target_dim || cleared[pos] {
                continue;
            }
            let mut col: Vec<u32> = filtration.faces(pos).to_vec();
            col.sort_unstable();
            loop {
                match col.last().copied() {
                    None => {
                        zero_col[pos] = true;
                        break;
                    }
                    Some(low) => {
                        let other = pivot_col[low as usize];
                        if other == NO_COL {
                            pivot_col[low as usize] = pos as u32;
                            pairs.push((low, pos as u32));
                            if target_dim == 2 {
                                // The pivot row's own column must reduce to
                                // zero; skip it in the next pass.
                                cleared[low as usize] = true;
                            }
                            reduced[pos] = col;
                            break;
                        }
                        col = symmetric_difference(&col, &reduced[other as usize]);
                    }
                }
            }
        }
    }

    let essential = (0..n).filter(|&pos| {
        let positive = match filtration.dim(pos) {
            0 => true,
            _ => zero_col[pos],
        };
        positive && pivot_col[pos] == NO_COL
    });
    Ok(assemble(filtration, &pairs, essential))
}

/// Reference reduction: dense bit columns, strict left-to-right order, no
/// clearing. Rejects complexes above [`ORACLE_CELL_BOUND`] cells.
pub fn oracle_persistence(filtration: &CubicalFiltration) -> Result<PersistenceDiagram> {
    validate_monotone(filtration)?;
    let n = filtration.len();
    if n > ORACLE_CELL_BOUND {
        return Err(Error::ComplexTooLarge {
            cells: n,
            bound: ORACLE_CELL_BOUND,
        });
    }
    let words = n.div_ceil(64);
    let mut cols: Vec<Vec<u64>> = (0..n)
        .map(|pos| {
            let mut col = vec![0u64; words];
            for &face in filtration.faces(pos) {
                col[face as usize / 64] |= 1u64 << (face % 64);
            }
            col
        })
        .collect();

    let mut pivot_col = vec![NO_COL; n];
    for j in 0..n {
        while let Some(low) = highest_bit(&cols[j]) {
            let other = pivot_col[low];
            if other == NO_COL {
                pivot_col[low] = j as u32;
                break;
            }
            let prior = cols[other as usize].clone();
            for (w, p) in cols[j].iter_mut().zip(prior) {
                *w ^= p;
            }
        }
    }

    let mut pairs = Vec::new();
    for (row, &col) in pivot_col.iter().enumerate() {
        if col != NO_COL {
            pairs.push((row as u32, col));
        }
    }
    let essential: Vec<usize> = (0..n)
        .filter(|&j| cols[j].iter().all(|&w| w == 0) && pivot_col[j] == NO_COL)
        .collect();
    Ok(assemble(filtration, &pairs, essential.into_iter()))
}

/// Index of the highest set bit of a dense bit column.
fn highest_bit(col: &[u64]) -> Option<usize> {
    for (wi, &w) in col.iter().enumerate().rev() {
        if w != 0 {
            return Some(wi * 64 + 63 - w.leading_zeros() as usize);
        }
    }
    None
}

/// Symmetric difference of two ascending index lists (Z/2 column addition).
fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Build the canonical diagram from pairs and essential cells.
fn assemble(
    filtration: &CubicalFiltration,
    pairs: &[(u32, u32)],
    essential: impl Iterator<Item = usize>,
) -> PersistenceDiagram {
    let mut points = Vec::with_capacity(pairs.len());
    for &(row, col) in pairs {
        points.push(DiagramPoint {
            dim: filtration.dim(row as usize),
            birth: filtration.value(row as usize),
            death: filtration.value(col as usize),
        });
    }
    for pos in essential {
        points.push(DiagramPoint {
            dim: filtration.dim(pos),
            birth: filtration.value(pos),
            death: f64::INFINITY,
        });
    }
    let mut d = PersistenceDiagram {
        points,
        value_range: filtration.value_range(),
    };
    d.sort_canonical();
    d
}

/// Confirm that every face enters the filtration no later than its cofaces.
fn validate_monotone(filtration: &CubicalFiltration) -> Result<()> {
    for pos in 0..filtration.len() {
        let v = filtration.value(pos);
        for &face in filtration.faces(pos) {
            let fv = filtration.value(face as usize);
            if fv > v {
                return Err(Error::NonMonotone {
                    cell: pos,
                    value: v,
                    face: face as usize,
                    face_value: fv,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::{betti_numbers, Direction};
    use proptest::prelude::*;

    fn diagram_of(rows: &[&[f64]], direction: Direction) -> PersistenceDiagram {
        let h = rows.len();
        let w = rows[0].len();
        let f = CubicalFiltration::from_values(h, w, &rows.concat(), direction).unwrap();
        compute_persistence(&f).unwrap()
    }

    /// Bitwise key for exact multiset comparison.
    fn key(d: &PersistenceDiagram) -> Vec<(u8, u64, u64)> {
        let mut k: Vec<_> = d
            .points
            .iter()
            .map(|p| (p.dim, p.birth.to_bits(), p.death.to_bits()))
            .collect();
        k.sort_unstable();
        k
    }

    fn nonzero(d: &PersistenceDiagram) -> Vec<(u8, f64, f64)> {
        d.nonzero_points()
            .map(|p| (p.dim, p.birth, p.death))
            .collect()
    }

    #[test]
    fn four_wells_merge_at_the_ridge() {
        // Wells of depth 0, 2, 4, 1 separated by a ridge at 9. The oldest
        // component survives; the others die when the ridge connects them.
        let d = diagram_of(
            &[&[0.0, 9.0, 2.0], &[9.0, 9.0, 9.0], &[4.0, 9.0, 1.0]],
            Direction::Sublevel,
        );
        assert_eq!(
            nonzero(&d),
            vec![
                (0, 0.0, f64::INFINITY),
                (0, 1.0, 9.0),
                (0, 2.0, 9.0),
                (0, 4.0, 9.0)
            ]
        );
    }

    #[test]
    fn ring_loop_lives_until_the_center_fills() {
        let d = diagram_of(
            &[&[0.0, 0.0, 0.0], &[0.0, 9.0, 0.0], &[0.0, 0.0, 0.0]],
            Direction::Sublevel,
        );
        assert_eq!(nonzero(&d), vec![(0, 0.0, f64::INFINITY), (1, 0.0, 9.0)]);
    }

    #[test]
    fn figure_eight_yields_two_loop_classes() {
        let art = [
            b".........",
            b".XXXXXXX.",
            b".X.....X.",
            b".X.....X.",
            b".XXXXXXX.",
            b".X.....X.",
            b".X.....X.",
            b".XXXXXXX.",
            b".........",
        ];
        let values: Vec<f64> = art
            .iter()
            .flat_map(|row| row.iter().map(|&c| if c == b'X' { 0.0 } else { 1.0 }))
            .collect();
        let f = CubicalFiltration::from_values(9, 9, &values, Direction::Sublevel).unwrap();
        let d = compute_persistence(&f).unwrap();
        assert_eq!(
            nonzero(&d),
            vec![(0, 0.0, f64::INFINITY), (1, 0.0, 1.0), (1, 0.0, 1.0)]
        );
    }

    #[test]
    fn ramp_has_a_single_essential_component() {
        let d = diagram_of(&[&[0.0, 1.0], &[2.0, 3.0]], Direction::Sublevel);
        assert_eq!(nonzero(&d), vec![(0, 0.0, f64::INFINITY)]);
        assert_eq!(d.value_range, (0.0, 3.0));
    }

    #[test]
    fn constant_patch_produces_only_zero_persistence_and_one_essential() {
        let d = diagram_of(&[&[0.0, 0.0], &[0.0, 0.0]], Direction::Sublevel);
        // 25 cells pair off as 12 zero-length intervals plus one essential.
        assert_eq!(d.points.len(), 13);
        assert_eq!(d.nonzero_points().count(), 1);
        assert_eq!(d.points.iter().filter(|p| p.death.is_infinite()).count(), 1);
        for p in d.points.iter().filter(|p| p.death.is_finite()) {
            assert_eq!((p.birth, p.death), (0.0, 0.0));
        }
    }

    #[test]
    fn twist_reduction_matches_the_naive_oracle() {
        let values: Vec<f64> = (0..49).map(|i| ((i * 31) % 7) as f64).collect();
        for direction in [Direction::Sublevel, Direction::Superlevel] {
            let f = CubicalFiltration::from_values(7, 7, &values, direction).unwrap();
            let fast = compute_persistence(&f).unwrap();
            let slow = oracle_persistence(&f).unwrap();
            assert_eq!(key(&fast), key(&slow));
        }
    }

    #[test]
    fn oracle_rejects_oversized_complexes() {
        let f =
            CubicalFiltration::from_values(26, 26, &vec![0.0; 676], Direction::Sublevel).unwrap();
        assert!(matches!(
            oracle_persistence(&f),
            Err(Error::ComplexTooLarge { cells: 2809, .. })
        ));
        assert!(compute_persistence(&f).is_ok());
    }

    #[test]
    fn corrupted_filtration_is_rejected_as_non_monotone() {
        let mut f =
            CubicalFiltration::from_values(2, 2, &[0.0, 1.0, 2.0, 3.0], Direction::Sublevel)
                .unwrap();
        f.corrupt_value_for_tests(0, 100.0);
        assert!(matches!(
            compute_persistence(&f),
            Err(Error::NonMonotone { .. })
        ));
        assert!(matches!(
            oracle_persistence(&f),
            Err(Error::NonMonotone { .. })
        ));
    }

    #[test]
    fn finitize_caps_or_drops_essential_classes() {
        let d = diagram_of(
            &[&[0.0, 9.0, 2.0], &[9.0, 9.0, 9.0], &[4.0, 9.0, 1.0]],
            Direction::Sublevel,
        );
        assert!(!d.is_finite());
        let capped = finitize(&d, FinitizePolicy::CapAtMax);
        assert!(capped.is_finite());
        assert_eq!(capped.points.len(), d.points.len());
        assert!(nonzero(&capped).contains(&(0, 0.0, 9.0)));
        let dropped = finitize(&d, FinitizePolicy::DropEssential);
        assert!(dropped.is_finite());
        assert_eq!(dropped.points.len(), d.points.len() - 1);
        assert!(dropped.points.iter().all(|p| p.death.is_finite()));
    }

    #[test]
    fn csv_round_trip_preserves_points_and_infinite_deaths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let d = diagram_of(
            &[&[0.0, 0.5, 0.0], &[0.5, 0.25, 0.5], &[0.0, 0.5, 0.125]],
            Direction::Sublevel,
        );
        d.write_csv(&path).unwrap();
        let back = PersistenceDiagram::read_csv(&path).unwrap();
        assert_eq!(key(&d), key(&back));
        assert!(back.points.iter().any(|p| p.death.is_infinite()));
    }

    #[test]
    fn csv_rejects_malformed_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        std::fs::write(&path, "dim,birth\n").unwrap();
        assert!(PersistenceDiagram::read_csv(&path).is_err());
        std::fs::write(&path, "dim,birth,death\n7,0,1\n").unwrap();
        assert!(PersistenceDiagram::read_csv(&path).is_err());
        std::fs::write(&path, "dim,birth,death\n0,1,0\n").unwrap();
        assert!(PersistenceDiagram::read_csv(&path).is_err());
        std::fs::write(&path, "dim,birth,death\n0,x,1\n").unwrap();
        assert!(PersistenceDiagram::read_csv(&path).is_err());
    }

    #[test]
    fn shift_and_scale_act_on_diagram_coordinates() {
        // Dyadic inputs keep the arithmetic exact.
        let base: Vec<f64> = vec![0.0, 0.5, 0.25, 0.75, 1.0, 0.125, 0.375, 0.625, 0.875];
        let f = CubicalFiltration::from_values(3, 3, &base, Direction::Sublevel).unwrap();
        let d = compute_persistence(&f).unwrap();

        let shifted: Vec<f64> = base.iter().map(|v| v + 0.5).collect();
        let fs = CubicalFiltration::from_values(3, 3, &shifted, Direction::Sublevel).unwrap();
        let ds = compute_persistence(&fs).unwrap();
        let expect: Vec<(u8, u64, u64)> = d
            .points
            .iter()
            .map(|p| (p.dim, (p.birth + 0.5).to_bits(), (p.death + 0.5).to_bits()))
            .collect();
        let mut expect = expect;
        expect.sort_unstable();
        assert_eq!(expect, key(&ds));

        let scaled: Vec<f64> = base.iter().map(|v| v * 4.0).collect();
        let fz = CubicalFiltration::from_values(3, 3, &scaled, Direction::Sublevel).unwrap();
        let dz = compute_persistence(&fz).unwrap();
        let mut expect: Vec<(u8, u64, u64)> = d
            .points
            .iter()
            .map(|p| (p.dim, (p.birth * 4.0).to_bits(), (p.death * 4.0).to_bits()))
            .collect();
        expect.sort_unstable();
        assert_eq!(expect, key(&dz));
    }

    proptest! {
        /// Twist reduction equals the oracle on random integer-valued (tie
        /// heavy) and continuous patches, and the diagram is complete.
        #[test]
        fn reduction_matches_oracle_on_random_patches(
            ints in proptest::collection::vec(0i8..5, 16),
            superlevel in proptest::bool::ANY,
        ) {
            let values: Vec<f64> = ints.iter().map(|&v| v as f64).collect();
            let dir = if superlevel { Direction::Superlevel } else { Direction::Sublevel };
            let f = CubicalFiltration::from_values(4, 4, &values, dir).unwrap();
            let fast = compute_persistence(&f).unwrap();
            let slow = oracle_persistence(&f).unwrap();
            prop_assert_eq!(key(&fast), key(&slow));
            let finite = fast.points.iter().filter(|p| p.death.is_finite()).count();
            let infinite = fast.points.len() - finite;
            prop_assert_eq!(2 * finite + infinite, f.len());
        }

        /// Interval counts at every threshold agree with the union-find
        /// Betti computation.
        #[test]
        fn diagram_counts_match_betti_numbers(
            values in proptest::collection::vec(-4.0f64..4.0, 25),
        ) {
            let f = CubicalFiltration::from_values(5, 5, &values, Direction::Sublevel).unwrap();
            let d = compute_persistence(&f).unwrap();
            for pos in (0..f.len()).step_by(7) {
                let r = f.value(pos);
                let (b0, b1) = betti_numbers(&f, r);
                prop_assert_eq!(d.classes_alive_at(0, r), b0);
                prop_assert_eq!(d.classes_alive_at(1, r), b1);
            }
        }

        /// Exactly one essential class: the global-minimum component.
        #[test]
        fn one_essential_component_no_essential_loops(
            values in proptest::collection::vec(-4.0f64..4.0, 16),
        ) {
            let f = CubicalFiltration::from_values(4, 4, &values, Direction::Sublevel).unwrap();
            let d = compute_persistence(&f).unwrap();
            let essential: Vec<_> =
                d.points.iter().filter(|p| p.death.is_infinite()).collect();
            prop_assert_eq!(essential.len(), 1);
            prop_assert_eq!(essential[0].dim, 0);
            prop_assert_eq!(essential[0].birth, f.value_range().0);
        }
    }
}
