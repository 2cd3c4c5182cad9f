//! End-to-end feature extraction: maps -> patches -> persistence diagrams
//! -> descriptor tables.
//!
//! A [`FeatureConfig`] chooses the input representation (raw depth or CLBP
//! texture code maps), the patch grid, per-patch normalization, and one or
//! more descriptor blocks. Extraction computes each patch's persistence
//! diagram once and derives every requested descriptor from it, so
//! comparing descriptor variants never pays for repeated reductions.
//!
//! Feature columns are named `[rep_][dim_]pd_agg_NN_stat` and
//! `[rep_][dim_]pi_NNNN`, where `rep` is `s`/`m` for CLBP sign/magnitude
//! inputs (absent for depth) and `dim` is `h0`/`h1` for per-dimension
//! blocks (absent for merged diagrams).

use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::Path;

use rayon::prelude::*;

use crate::clbp::{clbp_maps, ClbpComponent, ClbpConfig};
use crate::cubical::{build_filtration, Direction};
use crate::descriptors::{pd_agg, persistence_image, PiConfig, PD_AGG_NAMES};
use crate::error::{Error, Result};
use crate::ingest::{extract_patches, normalize_patch, DepthMap, LabelMask, NormalizeMode, Patch};
use crate::persistence::{compute_persistence, finitize, FinitizePolicy, PersistenceDiagram};
use crate::rusboost::FeatureMatrix;

/// Which map the filtration runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputRep {
    /// The depth map itself.
    Depth,
    /// CLBP sign code map.
    ClbpS,
    /// CLBP magnitude code map.
    ClbpM,
    /// Both CLBP code maps, features side by side.
    ClbpBoth,
}

impl InputRep {
    pub fn as_str(self) -> &'static str {
        match self {
            InputRep::Depth => "depth",
            InputRep::ClbpS => "clbp-s",
            InputRep::ClbpM => "clbp-m",
            InputRep::ClbpBoth => "clbp-both",
        }
    }

    fn needs_clbp(self) -> bool {
        !matches!(self, InputRep::Depth)
    }
}

/// Which homology dimensions feed a descriptor block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimSelection {
    /// One block over the merged dimension-0 and dimension-1 diagram.
    Merged,
    H0,
    H1,
    /// Separate blocks for dimension 0 and dimension 1.
    PerDim,
}

/// One descriptor block derived from a patch diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorConfig {
    /// Identifier of the block (used to tell result tables apart).
    pub name: String,
    pub dims: DimSelection,
    /// Emit the twelve interval-length statistics.
    pub pd_agg: bool,
    /// Emit a persistence image with this configuration.
    pub pi: Option<PiConfig>,
    /// Remove zero-persistence (diagonal) points before both descriptors.
    pub drop_zero_length: bool,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        DescriptorConfig {
            name: "default".into(),
            dims: DimSelection::Merged,
            pd_agg: true,
            pi: Some(PiConfig::default()),
            drop_zero_length: true,
        }
    }
}

impl DescriptorConfig {
    pub fn validate(&self) -> Result<()> {
        validate_identifier(&self.name, "descriptor name")?;
        if !self.pd_agg && self.pi.is_none() {
            return Err(Error::InvalidConfig(format!(
                "descriptor {:?} emits nothing",
                self.name
            )));
        }
        if let Some(pi) = &self.pi {
            pi.validate()?;
        }
        Ok(())
    }

    fn dim_blocks(&self) -> Vec<Option<u8>> {
        match self.dims {
            DimSelection::Merged => vec![None],
            DimSelection::H0 => vec![Some(0)],
            DimSelection::H1 => vec![Some(1)],
            DimSelection::PerDim => vec![Some(0), Some(1)],
        }
    }
}

/// Full extraction configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub input: InputRep,
    /// CLBP parameters; required for CLBP inputs.
    pub clbp: Option<ClbpConfig>,
    pub patch_size: usize,
    pub patch_step: usize,
    /// A patch is engraved when its masked fraction is at least this.
    pub label_threshold: f64,
    /// Per-patch value normalization before the filtration.
    pub normalize: NormalizeMode,
    pub direction: Direction,
    pub descriptors: Vec<DescriptorConfig>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            input: InputRep::Depth,
            clbp: None,
            patch_size: 128,
            patch_step: 16,
            label_threshold: 0.2,
            normalize: NormalizeMode::MinMax,
            direction: Direction::Sublevel,
            descriptors: vec![DescriptorConfig::default()],
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input.needs_clbp() {
            let clbp = self.clbp.as_ref().ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "input {} requires CLBP parameters",
                    self.input.as_str()
                ))
            })?;
            clbp.validate()?;
        }
        if self.descriptors.is_empty() {
            return Err(Error::InvalidConfig("no descriptor blocks".into()));
        }
        for d in &self.descriptors {
            d.validate()?;
        }
        for (i, a) in self.descriptors.iter().enumerate() {
            for b in &self.descriptors[i + 1..] {
                if a.name == b.name {
                    return Err(Error::InvalidConfig(format!(
                        "duplicate descriptor name {:?}",
                        a.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A named input map with its optional ground truth.
#[derive(Debug, Clone)]
pub struct MapSet {
    pub source_id: String,
    pub depth: DepthMap,
    pub mask: Option<LabelMask>,
}

impl MapSet {
    pub fn new(source_id: &str, depth: DepthMap, mask: Option<LabelMask>) -> Result<Self> {
        validate_identifier(source_id, "source id")?;
        if let Some(m) = &mask {
            if m.height() != depth.height() || m.width() != depth.width() {
                return Err(Error::ShapeMismatch {
                    expected_height: depth.height(),
                    expected_width: depth.width(),
                    got_height: m.height(),
                    got_width: m.width(),
                });
            }
        }
        Ok(MapSet {
            source_id: source_id.to_string(),
            depth,
            mask,
        })
    }

    pub fn from_synthetic(source_id: &str, sample: &crate::synth::SyntheticSample) -> Result<Self> {
        MapSet::new(source_id, sample.depth.clone(), Some(sample.mask.clone()))
    }
}

fn validate_identifier(id: &str, what: &str) -> Result<()> {
    if id.is_empty()
        || !id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
    {
        return Err(Error::InvalidConfig(format!(
            "{what} {id:?} must be nonempty and use only letters, digits, '_', '-', '.'"
        )));
    }
    Ok(())
}

/// Identity and ground truth of one patch row.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchKey {
    pub source_id: String,
    /// Top-left pixel of the window in the source map.
    pub row: usize,
    pub col: usize,
    /// 1 engraved, 2 natural, -1 unlabeled.
    pub label: i8,
    /// Engraved pixel fraction under the window, -1 when unlabeled.
    pub engraved_fraction: f64,
}

/// A patch diagram together with its identity (`rep` is `depth`, `s`, or
/// `m`).
#[derive(Debug, Clone)]
pub struct DiagramRecord {
    pub key: PatchKey,
    pub rep: &'static str,
    pub diagram: PersistenceDiagram,
}

/// Dense descriptor table over patches.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    feature_names: Vec<String>,
    keys: Vec<PatchKey>,
    values: Vec<f64>,
}

impl FeatureTable {
    fn new(feature_names: Vec<String>, keys: Vec<PatchKey>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), feature_names.len() * keys.len());
        FeatureTable {
            feature_names,
            keys,
            values,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn keys(&self) -> &[PatchKey] {
        &self.keys
    }

    pub fn n_rows(&self) -> usize {
        self.keys.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let f = self.feature_names.len();
        &self.values[i * f..(i + 1) * f]
    }

    /// Concatenate tables with identical feature schemas.
    pub fn concat(tables: Vec<FeatureTable>) -> Result<FeatureTable> {
        let mut iter = tables.into_iter();
        let mut merged = iter
            .next()
            .ok_or_else(|| Error::InvalidConfig("no tables to concatenate".into()))?;
        for table in iter {
            if table.feature_names != merged.feature_names {
                return Err(Error::SchemaMismatch(
                    "tables disagree on feature columns".into(),
                ));
            }
            merged.keys.extend(table.keys);
            merged.values.extend(table.values);
        }
        Ok(merged)
    }

    /// Labeled rows as a training matrix, with the kept row indices.
    pub fn to_matrix(&self) -> Result<(FeatureMatrix, Vec<usize>)> {
        let kept: Vec<usize> = (0..self.n_rows())
            .filter(|&i| matches!(self.keys[i].label, 1 | 2))
            .collect();
        if kept.is_empty() {
            return Err(Error::InvalidConfig("table has no labeled rows".into()));
        }
        let mut values = Vec::with_capacity(kept.len() * self.feature_names.len());
        let mut labels = Vec::with_capacity(kept.len());
        for &i in &kept {
            values.extend_from_slice(self.row(i));
            labels.push(self.keys[i].label as u8);
        }
        Ok((
            FeatureMatrix::new(self.feature_names.clone(), values, labels)?,
            kept,
        ))
    }

    /// All rows as a matrix for prediction; unlabeled rows get a
    /// placeholder natural label (predictions ignore labels).
    pub fn to_prediction_matrix(&self) -> Result<FeatureMatrix> {
        let labels = self
            .keys
            .iter()
            .map(|k| if k.label == 1 { 1u8 } else { 2u8 })
            .collect();
        FeatureMatrix::new(self.feature_names.clone(), self.values.clone(), labels)
    }

    /// Write `source_id,row,col,label,engraved_fraction,<features...>`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut line = String::from("source_id,row,col,label,engraved_fraction");
        for name in &self.feature_names {
            line.push(',');
            line.push_str(name);
        }
        line.push('\n');
        let mut write = |s: &str| out.write_all(s.as_bytes()).map_err(|e| Error::io(path, e));
        write(&line)?;
        for (i, key) in self.keys.iter().enumerate() {
            let mut line = format!(
                "{},{},{},{},{}",
                key.source_id, key.row, key.col, key.label, key.engraved_fraction
            );
            for v in self.row(i) {
                line.push(',');
                line.push_str(&format!("{v}"));
            }
            line.push('\n');
            write(&line)?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Read a table written by [`FeatureTable::write_csv`].
    pub fn read_csv(path: &Path) -> Result<FeatureTable> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let bad = |line: usize, reason: String| Error::Csv {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file".into()))?;
        let header = header.map_err(|e| Error::io(path, e))?;
        let mut fields = header.split(',');
        for want in ["source_id", "row", "col", "label", "engraved_fraction"] {
            match fields.next() {
                Some(got) if got == want => {}
                got => {
                    return Err(bad(
                        1,
                        format!("expected header column {want:?}, got {got:?}"),
                    ))
                }
            }
        }
        let feature_names: Vec<String> = fields.map(str::to_string).collect();
        let mut keys = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let mut fields = line.split(',');
            let mut next = |what: &str| {
                fields
                    .next()
                    .ok_or_else(|| bad(lineno, format!("missing {what}")))
            };
            let source_id = next("source_id")?.to_string();
            let row: usize = parse(next("row")?, "row", lineno, path)?;
            let col: usize = parse(next("col")?, "col", lineno, path)?;
            let label: i8 = parse(next("label")?, "label", lineno, path)?;
            if !matches!(label, -1 | 1 | 2) {
                return Err(bad(lineno, format!("label {label} is not -1, 1, or 2")));
            }
            let engraved_fraction: f64 = parse(
                next("engraved_fraction")?,
                "engraved_fraction",
                lineno,
                path,
            )?;
            let mut count = 0usize;
            for field in fields {
                let v: f64 = parse(field, "feature", lineno, path)?;
                if !v.is_finite() {
                    return Err(bad(lineno, "non-finite feature value".into()));
                }
                values.push(v);
                count += 1;
            }
            if count != feature_names.len() {
                return Err(bad(
                    lineno,
                    format!(
                        "row has {count} features, header promises {}",
                        feature_names.len()
                    ),
                ));
            }
            keys.push(PatchKey {
                source_id,
                row,
                col,
                label,
                engraved_fraction,
            });
        }
        Ok(FeatureTable::new(feature_names, keys, values))
    }
}

fn parse<T: std::str::FromStr>(s: &str, what: &str, line: usize, path: &Path) -> Result<T> {
    s.parse().map_err(|_| Error::Csv {
        path: path.to_path_buf(),
        line,
        reason: format!("cannot parse {what} from {s:?}"),
    })
}

/// Column names a configuration will produce, in emission order.
pub fn feature_names(config: &FeatureConfig, descriptor: &DescriptorConfig) -> Vec<String> {
    let mut names = Vec::new();
    for rep in rep_prefixes(config.input) {
        for dim in descriptor.dim_blocks() {
            let dim_prefix = match dim {
                None => "",
                Some(0) => "h0_",
                Some(_) => "h1_",
            };
            if descriptor.pd_agg {
                for (i, stat) in PD_AGG_NAMES.iter().enumerate() {
                    names.push(format!("{rep}{dim_prefix}pd_agg_{i:02}_{stat}"));
                }
            }
            if let Some(pi) = &descriptor.pi {
                for i in 0..pi.resolution * pi.resolution {
                    names.push(format!("{rep}{dim_prefix}pi_{i:04}"));
                }
            }
        }
    }
    names
}

fn rep_prefixes(input: InputRep) -> Vec<&'static str> {
    match input {
        InputRep::Depth => vec![""],
        InputRep::ClbpS => vec!["s_"],
        InputRep::ClbpM => vec!["m_"],
        InputRep::ClbpBoth => vec!["s_", "m_"],
    }
}

fn rep_names(input: InputRep) -> Vec<&'static str> {
    match input {
        InputRep::Depth => vec!["depth"],
        InputRep::ClbpS => vec!["s"],
        InputRep::ClbpM => vec!["m"],
        InputRep::ClbpBoth => vec!["s", "m"],
    }
}

/// The representation maps of one input map: `(origin_offset, map, mask)`.
fn build_reps(map: &MapSet, config: &FeatureConfig) -> Result<Vec<(usize, DepthMap)>> {
    match config.input {
        InputRep::Depth => Ok(vec![(0, map.depth.clone())]),
        rep => {
            let clbp_config = config.clbp.as_ref().expect("validated");
            let maps = clbp_maps(&map.depth, clbp_config)?;
            let offset = maps.origin.0;
            // Codes become filtration values in [0, 1] so descriptor
            // ranges match normalized depth.
            let max_code = (clbp_config.code_count() - 1).max(1) as f64;
            let convert = |component: ClbpComponent| -> DepthMap {
                let raw = maps.to_depth_map(component);
                let values = raw.values().iter().map(|&c| c / max_code).collect();
                DepthMap::new(raw.height(), raw.width(), values).expect("shape preserved")
            };
            let mut out = Vec::new();
            if matches!(rep, InputRep::ClbpS | InputRep::ClbpBoth) {
                out.push((offset, convert(ClbpComponent::Sign)));
            }
            if matches!(rep, InputRep::ClbpM | InputRep::ClbpBoth) {
                out.push((offset, convert(ClbpComponent::Magnitude)));
            }
            Ok(out)
        }
    }
}

/// Crop `mask` to the window starting at `(offset, offset)` with the given
/// shape.
fn crop_mask(mask: &LabelMask, offset: usize, height: usize, width: usize) -> LabelMask {
    if offset == 0 && mask.height() == height && mask.width() == width {
        return mask.clone();
    }
    let mut labels = Vec::with_capacity(height * width);
    for y in 0..height {
        for x in 0..width {
            labels.push(mask.get(y + offset, x + offset));
        }
    }
    LabelMask::new(height, width, labels).expect("crop stays in range")
}

fn key_of(patch: &Patch, offset: usize) -> PatchKey {
    PatchKey {
        source_id: patch.source_id.clone(),
        row: patch.origin.0 + offset,
        col: patch.origin.1 + offset,
        label: patch.label.map_or(-1, |l| l as i8),
        engraved_fraction: patch.engraved_fraction.unwrap_or(-1.0),
    }
}

/// Normalize, filter, reduce, and finitize one patch.
fn patch_diagram(patch: &Patch, config: &FeatureConfig) -> Result<PersistenceDiagram> {
    let (normalized, _) = normalize_patch(patch, config.normalize)?;
    let filtration = build_filtration(&normalized, config.direction)?;
    let diagram = compute_persistence(&filtration)?;
    Ok(finitize(&diagram, FinitizePolicy::CapAtMax))
}

fn drop_diagonal(diagram: &PersistenceDiagram) -> PersistenceDiagram {
    PersistenceDiagram {
        points: diagram.nonzero_points().copied().collect(),
        value_range: diagram.value_range,
    }
}

/// Features of one descriptor block over one rep diagram.
fn descriptor_features(
    diagram: &PersistenceDiagram,
    descriptor: &DescriptorConfig,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for dim in descriptor.dim_blocks() {
        let sub = match dim {
            None => diagram.clone(),
            Some(d) => diagram.restrict_to_dim(d),
        };
        let sub = if descriptor.drop_zero_length {
            drop_diagonal(&sub)
        } else {
            sub
        };
        if descriptor.pd_agg {
            out.extend(pd_agg(&sub, false)?);
        }
        if let Some(pi) = &descriptor.pi {
            out.extend(persistence_image(&sub, pi)?.pixels);
        }
    }
    Ok(out)
}

/// Patches of every rep of one map; reps share the key grid.
fn map_patches(map: &MapSet, config: &FeatureConfig) -> Result<(Vec<PatchKey>, Vec<Vec<Patch>>)> {
    let reps = build_reps(map, config)?;
    let mut keys: Option<Vec<PatchKey>> = None;
    let mut per_rep = Vec::with_capacity(reps.len());
    for (offset, rep_map) in &reps {
        let cropped = map
            .mask
            .as_ref()
            .map(|m| crop_mask(m, *offset, rep_map.height(), rep_map.width()));
        let patches = extract_patches(
            rep_map,
            cropped.as_ref(),
            config.patch_size,
            config.patch_step,
            config.label_threshold,
            &map.source_id,
        )?;
        let rep_keys: Vec<PatchKey> = patches.iter().map(|p| key_of(p, *offset)).collect();
        match &keys {
            None => keys = Some(rep_keys),
            Some(k) => debug_assert_eq!(k, &rep_keys, "rep patch grids must align"),
        }
        per_rep.push(patches);
    }
    Ok((keys.expect("at least one rep"), per_rep))
}

/// Extract one table per descriptor block; diagrams are computed once per
/// patch and rep and shared across the blocks.
pub fn extract_features_multi(
    maps: &[MapSet],
    config: &FeatureConfig,
) -> Result<Vec<FeatureTable>> {
    config.validate()?;
    if maps.is_empty() {
        return Err(Error::InvalidConfig("no input maps".into()));
    }
    let names: Vec<Vec<String>> = config
        .descriptors
        .iter()
        .map(|d| feature_names(config, d))
        .collect();
    let mut keys = Vec::new();
    let mut per_config_values: Vec<Vec<f64>> = vec![Vec::new(); config.descriptors.len()];
    for map in maps {
        let (map_keys, per_rep) = map_patches(map, config)?;
        let n_patches = map_keys.len();
        // One diagram per (patch, rep), then every descriptor block.
        let rows: Vec<Vec<Vec<f64>>> = (0..n_patches)
            .into_par_iter()
            .map(|i| {
                let diagrams: Vec<PersistenceDiagram> = per_rep
                    .iter()
                    .map(|patches| patch_diagram(&patches[i], config))
                    .collect::<Result<_>>()?;
                config
                    .descriptors
                    .iter()
                    .map(|d| {
                        let mut features = Vec::new();
                        for diagram in &diagrams {
                            features.extend(descriptor_features(diagram, d)?);
                        }
                        Ok(features)
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()
            })
            .collect::<Result<_>>()?;
        keys.extend(map_keys);
        for row in rows {
            for (c, features) in row.into_iter().enumerate() {
                debug_assert_eq!(features.len(), names[c].len());
                per_config_values[c].extend(features);
            }
        }
    }
    Ok(names
        .into_iter()
        .zip(per_config_values)
        .map(|(n, v)| FeatureTable::new(n, keys.clone(), v))
        .collect())
}

/// Extract with a single descriptor block.
pub fn extract_features(maps: &[MapSet], config: &FeatureConfig) -> Result<FeatureTable> {
    if config.descriptors.len() != 1 {
        return Err(Error::InvalidConfig(format!(
            "expected exactly one descriptor block, got {}",
            config.descriptors.len()
        )));
    }
    Ok(extract_features_multi(maps, config)?
        .into_iter()
        .next()
        .expect("one table per descriptor"))
}

/// Finitized per-patch diagrams of every rep, for inspection or dumps.
pub fn extract_diagrams(maps: &[MapSet], config: &FeatureConfig) -> Result<Vec<DiagramRecord>> {
    config.validate()?;
    let reps = rep_names(config.input);
    let mut records = Vec::new();
    for map in maps {
        let (map_keys, per_rep) = map_patches(map, config)?;
        let n_patches = map_keys.len();
        let diagrams: Vec<Vec<PersistenceDiagram>> = (0..n_patches)
            .into_par_iter()
            .map(|i| {
                per_rep
                    .iter()
                    .map(|patches| patch_diagram(&patches[i], config))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        for (i, per_patch) in diagrams.into_iter().enumerate() {
            for (r, diagram) in per_patch.into_iter().enumerate() {
                records.push(DiagramRecord {
                    key: map_keys[i].clone(),
                    rep: reps[r],
                    diagram,
                });
            }
        }
    }
    Ok(records)
}

/// Minimum and maximum depth value over all maps.
pub fn global_value_bounds(maps: &[MapSet]) -> Result<(f64, f64)> {
    if maps.is_empty() {
        return Err(Error::InvalidConfig("no input maps".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for map in maps {
        let (a, b) = map.depth.min_max();
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::PD_AGG_LEN;

    /// 16x16 map with a deep square well in the upper-left quadrant.
    fn well_map() -> MapSet {
        let mut values = vec![0.8f64; 256];
        let mut mask = vec![0u8; 256];
        for y in 2..7 {
            for x in 2..7 {
                values[y * 16 + x] = 0.1;
                mask[y * 16 + x] = 1;
            }
        }
        // A gentle slope so patches away from the well are not flat.
        for (i, v) in values.iter_mut().enumerate() {
            *v += (i % 16) as f64 * 0.002;
        }
        MapSet::new(
            "well",
            DepthMap::new(16, 16, values).unwrap(),
            Some(LabelMask::new(16, 16, mask).unwrap()),
        )
        .unwrap()
    }

    fn small_config() -> FeatureConfig {
        FeatureConfig {
            patch_size: 8,
            patch_step: 4,
            label_threshold: 0.2,
            descriptors: vec![DescriptorConfig {
                name: "agg".into(),
                pi: None,
                ..Default::default()
            }],
            ..Default::default()
        }
    }

    #[test]
    fn feature_names_are_prefixed_per_rep_and_dim() {
        let config = FeatureConfig {
            input: InputRep::ClbpBoth,
            clbp: Some(ClbpConfig {
                radius: 1,
                samples: 8,
                encoding: crate::clbp::ClbpEncoding::Riu2,
            }),
            ..Default::default()
        };
        let descriptor = DescriptorConfig {
            name: "both".into(),
            dims: DimSelection::PerDim,
            pd_agg: true,
            pi: Some(PiConfig {
                resolution: 2,
                ..Default::default()
            }),
            drop_zero_length: true,
        };
        let names = feature_names(&config, &descriptor);
        // 2 reps x 2 dims x (12 + 4) columns.
        assert_eq!(names.len(), 64);
        assert_eq!(names[0], "s_h0_pd_agg_00_count");
        assert_eq!(names[11], "s_h0_pd_agg_11_sum_sq");
        assert_eq!(names[12], "s_h0_pi_0000");
        assert_eq!(names[16], "s_h1_pd_agg_00_count");
        assert_eq!(names[32], "m_h0_pd_agg_00_count");
        assert_eq!(names[63], "m_h1_pi_0003");
        let depth_only = feature_names(&FeatureConfig::default(), &DescriptorConfig::default());
        assert_eq!(depth_only.len(), 12 + 256);
        assert_eq!(depth_only[0], "pd_agg_00_count");
        assert_eq!(depth_only[12], "pi_0000");
    }

    #[test]
    fn depth_extraction_labels_patches_and_counts_rows() {
        let table = extract_features(&[well_map()], &small_config()).unwrap();
        // (16-8)/4+1 = 3 origins per axis.
        assert_eq!(table.n_rows(), 9);
        assert_eq!(table.feature_names().len(), PD_AGG_LEN);
        let key0 = &table.keys()[0];
        assert_eq!(key0.source_id, "well");
        assert_eq!((key0.row, key0.col), (0, 0));
        // The well covers 25 of 64 pixels of the first window.
        assert_eq!(key0.label, 1);
        assert!((key0.engraved_fraction - 25.0 / 64.0).abs() < 1e-12);
        // The last window (origin 8,8) misses the well entirely.
        let key8 = &table.keys()[8];
        assert_eq!((key8.row, key8.col), (8, 8));
        assert_eq!(key8.label, 2);
        assert_eq!(key8.engraved_fraction, 0.0);
        // Every patch has at least the capped essential interval.
        let count_col = 0;
        for i in 0..table.n_rows() {
            assert!(table.row(i)[count_col] >= 1.0, "row {i}");
        }
    }

    #[test]
    fn extraction_is_deterministic() {
        let a = extract_features(&[well_map()], &small_config()).unwrap();
        let b = extract_features(&[well_map()], &small_config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_extraction_matches_separate_runs() {
        let agg = DescriptorConfig {
            name: "agg".into(),
            pi: None,
            ..Default::default()
        };
        let pi = DescriptorConfig {
            name: "pi".into(),
            pd_agg: false,
            pi: Some(PiConfig {
                resolution: 4,
                sigma: 0.05,
                ..Default::default()
            }),
            ..Default::default()
        };
        let mut config = small_config();
        config.descriptors = vec![agg.clone(), pi.clone()];
        let tables = extract_features_multi(&[well_map()], &config).unwrap();
        assert_eq!(tables.len(), 2);
        let mut only_agg = small_config();
        only_agg.descriptors = vec![agg];
        let mut only_pi = small_config();
        only_pi.descriptors = vec![pi];
        assert_eq!(
            tables[0],
            extract_features(&[well_map()], &only_agg).unwrap()
        );
        assert_eq!(
            tables[1],
            extract_features(&[well_map()], &only_pi).unwrap()
        );
    }

    #[test]
    fn csv_round_trips_bitwise() {
        let table = extract_features(&[well_map()], &small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        table.write_csv(&path).unwrap();
        let loaded = FeatureTable::read_csv(&path).unwrap();
        assert_eq!(table, loaded);

        // Unlabeled maps round-trip with sentinel labels.
        let mut unlabeled = well_map();
        unlabeled.mask = None;
        let table = extract_features(&[unlabeled], &small_config()).unwrap();
        assert!(table.keys().iter().all(|k| k.label == -1));
        assert!(table.keys().iter().all(|k| k.engraved_fraction == -1.0));
        table.write_csv(&path).unwrap();
        assert_eq!(table, FeatureTable::read_csv(&path).unwrap());
    }

    #[test]
    fn csv_rejects_malformed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "wrong,header\n").unwrap();
        assert!(matches!(
            FeatureTable::read_csv(&path),
            Err(Error::Csv { line: 1, .. })
        ));
        std::fs::write(
            &path,
            "source_id,row,col,label,engraved_fraction,f0\nm,0,0,5,0.1,1.0\n",
        )
        .unwrap();
        assert!(matches!(
            FeatureTable::read_csv(&path),
            Err(Error::Csv { line: 2, .. })
        ));
        std::fs::write(
            &path,
            "source_id,row,col,label,engraved_fraction,f0\nm,0,0,1,0.1,1.0,9.0\n",
        )
        .unwrap();
        assert!(FeatureTable::read_csv(&path).is_err());
    }

    #[test]
    fn concat_requires_matching_schemas() {
        let a = extract_features(&[well_map()], &small_config()).unwrap();
        let merged = FeatureTable::concat(vec![a.clone(), a.clone()]).unwrap();
        assert_eq!(merged.n_rows(), 18);
        assert_eq!(merged.row(9), a.row(0));
        let mut other_config = small_config();
        other_config.descriptors[0].dims = DimSelection::PerDim;
        let b = extract_features(&[well_map()], &other_config).unwrap();
        assert!(matches!(
            FeatureTable::concat(vec![a, b]),
            Err(Error::SchemaMismatch(_))
        ));
        assert!(FeatureTable::concat(vec![]).is_err());
    }

    #[test]
    fn to_matrix_keeps_only_labeled_rows() {
        let labeled = extract_features(&[well_map()], &small_config()).unwrap();
        let (matrix, kept) = labeled.to_matrix().unwrap();
        assert_eq!(matrix.n_rows(), 9);
        assert_eq!(kept, (0..9).collect::<Vec<_>>());

        let mut unlabeled_map = well_map();
        unlabeled_map.mask = None;
        let unlabeled = extract_features(&[unlabeled_map], &small_config()).unwrap();
        assert!(unlabeled.to_matrix().is_err());
        let matrix = unlabeled.to_prediction_matrix().unwrap();
        assert_eq!(matrix.n_rows(), 9);
    }

    #[test]
    fn clbp_reps_share_keys_and_prefix_columns() {
        let config = FeatureConfig {
            input: InputRep::ClbpBoth,
            clbp: Some(ClbpConfig {
                radius: 1,
                samples: 8,
                encoding: crate::clbp::ClbpEncoding::Riu2,
            }),
            patch_size: 8,
            patch_step: 6,
            descriptors: vec![DescriptorConfig {
                name: "agg".into(),
                pi: None,
                ..Default::default()
            }],
            ..Default::default()
        };
        let table = extract_features(&[well_map()], &config).unwrap();
        // The 16x16 map loses a 1-pixel CLBP border: 14x14, so origins are
        // {0, 6} per axis; keys shift by the border offset.
        assert_eq!(table.n_rows(), 4);
        assert_eq!(table.feature_names().len(), 24);
        assert!(table.feature_names()[0].starts_with("s_"));
        assert!(table.feature_names()[12].starts_with("m_"));
        assert_eq!((table.keys()[0].row, table.keys()[0].col), (1, 1));
        assert_eq!((table.keys()[3].row, table.keys()[3].col), (7, 7));
        // Labels follow the cropped mask under the same window.
        assert_eq!(table.keys()[0].label, 1);
    }

    #[test]
    fn diagram_records_cover_every_rep() {
        let records = extract_diagrams(&[well_map()], &small_config()).unwrap();
        assert_eq!(records.len(), 9);
        assert!(records.iter().all(|r| r.rep == "depth"));
        assert!(records.iter().all(|r| r.diagram.is_finite()));

        let config = FeatureConfig {
            input: InputRep::ClbpS,
            clbp: Some(ClbpConfig {
                radius: 1,
                samples: 8,
                encoding: crate::clbp::ClbpEncoding::Riu2,
            }),
            patch_size: 8,
            patch_step: 6,
            ..small_config()
        };
        let records = extract_diagrams(&[well_map()], &config).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records.iter().all(|r| r.rep == "s"));
    }

    #[test]
    fn config_validation_catches_mistakes() {
        let bad = [
            // A texture-map input needs texture parameters.
            FeatureConfig {
                input: InputRep::ClbpS,
                ..Default::default()
            },
            FeatureConfig {
                descriptors: Vec::new(),
                ..Default::default()
            },
            // Duplicate descriptor names would collide in the output table.
            FeatureConfig {
                descriptors: vec![DescriptorConfig::default(), DescriptorConfig::default()],
                ..Default::default()
            },
            // A descriptor that emits nothing is a configuration mistake.
            FeatureConfig {
                descriptors: vec![DescriptorConfig {
                    pd_agg: false,
                    pi: None,
                    ..Default::default()
                }],
                ..Default::default()
            },
        ];
        for config in bad {
            assert!(config.validate().is_err());
        }
        assert!(MapSet::new("bad id", DepthMap::new(2, 2, vec![0.0; 4]).unwrap(), None).is_err());
        assert!(extract_features(&[], &FeatureConfig::default()).is_err());
    }

    #[test]
    fn global_bounds_span_all_maps() {
        let a = MapSet::new(
            "a",
            DepthMap::new(2, 2, vec![0.2, 0.3, 0.4, 0.5]).unwrap(),
            None,
        )
        .unwrap();
        let b = MapSet::new(
            "b",
            DepthMap::new(2, 2, vec![0.1, 0.3, 0.4, 0.9]).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(global_value_bounds(&[a, b]).unwrap(), (0.1, 0.9));
        assert!(global_value_bounds(&[]).is_err());
    }
}
