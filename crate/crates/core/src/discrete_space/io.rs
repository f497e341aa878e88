//! Space files: JSON, or a little-endian binary layout
//! `magic | n | dim | coords | masses | packed distances | metadata json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DistanceStore, FiniteMetricMeasureSpace, PackedSymmetric, SpaceMetadata};
use crate::error::{input, Result};

const MAGIC: &[u8; 8] = b"HBMOSPC1";

#[derive(Debug, Serialize, Deserialize)]
struct SpaceFile {
    points: Option<Vec<Vec<f64>>>,
    masses: Vec<f64>,
    /// Lower triangle including the diagonal, row by row.
    distances: Vec<f64>,
    #[serde(default)]
    metadata: SpaceMetadata,
}

fn to_file(space: &FiniteMetricMeasureSpace) -> SpaceFile {
    SpaceFile {
        points: space.coords().map(|c| c.to_vec()),
        masses: space.masses().to_vec(),
        distances: space.to_packed().data().to_vec(),
        metadata: space.metadata.clone(),
    }
}

fn from_file(f: SpaceFile) -> Result<FiniteMetricMeasureSpace> {
    let n = f.masses.len();
    let packed = PackedSymmetric::from_data(n, f.distances)?;
    let mut space = FiniteMetricMeasureSpace::from_packed(f.points, packed, f.masses)?;
    space.metadata = f.metadata;
    Ok(space)
}

pub fn to_json(space: &FiniteMetricMeasureSpace) -> Result<String> {
    Ok(serde_json::to_string(&to_file(space))?)
}

pub fn from_json(text: &str) -> Result<FiniteMetricMeasureSpace> {
    from_file(serde_json::from_str(text)?)
}

pub fn to_bytes(space: &FiniteMetricMeasureSpace) -> Result<Vec<u8>> {
    let n = space.len();
    let coords = space.coords();
    let dim = coords
        .map(|c| c.first().map_or(0, |p| p.len()))
        .unwrap_or(0);
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(dim as u64).to_le_bytes());
    if let Some(c) = coords {
        for p in c {
            for v in p {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    for m in space.masses() {
        out.extend_from_slice(&m.to_le_bytes());
    }
    match space.store() {
        DistanceStore::Dense(p) => {
            for v in p.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        DistanceStore::Lazy(_) => {
            for v in space.to_packed().data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    let meta = serde_json::to_vec(&space.metadata)?;
    out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
    out.extend_from_slice(&meta);
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8]> {
        if self.pos + k > self.bytes.len() {
            return input("space file is truncated");
        }
        let s = &self.bytes[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, k: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            k.checked_mul(8)
                .ok_or_else(|| crate::Error::Input("size overflow".into()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<FiniteMetricMeasureSpace> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return input("not a space file (bad magic)");
    }
    let n = r.u64()? as usize;
    let dim = r.u64()? as usize;
    let points = if dim > 0 {
        let flat = r.f64s(n * dim)?;
        Some(flat.chunks_exact(dim).map(|c| c.to_vec()).collect())
    } else {
        None
    };
    let masses = r.f64s(n)?;
    let distances = r.f64s(n * (n + 1) / 2)?;
    let meta_len = r.u64()? as usize;
    let metadata = serde_json::from_slice(r.take(meta_len)?)?;
    from_file(SpaceFile {
        points,
        masses,
        distances,
        metadata,
    })
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Writes JSON for `*.json` paths and the binary layout otherwise.
pub fn save(space: &FiniteMetricMeasureSpace, path: &Path) -> Result<()> {
    if is_json(path) {
        fs::write(path, to_json(space)?)?;
    } else {
        fs::write(path, to_bytes(space)?)?;
    }
    Ok(())
}

pub fn load(path: &Path) -> Result<FiniteMetricMeasureSpace> {
    if is_json(path) {
        from_json(&fs::read_to_string(path)?)
    } else {
        from_bytes(&fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete_space::{discretize, StoragePolicy};
    use crate::region::BoxRegion;
    use crate::weight_spaces::{Sign, WeightSpec};

    fn sample() -> FiniteMetricMeasureSpace {
        let bx = BoxRegion::centered(2, 0.6).unwrap();
        discretize(
            &WeightSpec::gaussian(2),
            Sign::Minus,
            &bx,
            0.3,
            StoragePolicy::Auto,
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let s = sample();
        let t = from_bytes(&to_bytes(&s).unwrap()).unwrap();
        assert_eq!(s.to_packed(), t.to_packed());
        assert_eq!(s.masses(), t.masses());
        assert_eq!(s.coords(), t.coords());
        assert_eq!(s.metadata, t.metadata);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = sample();
        let t = from_json(&to_json(&s).unwrap()).unwrap();
        assert_eq!(s.to_packed(), t.to_packed());
        assert_eq!(s.masses(), t.masses());
    }

    #[test]
    fn files_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample();
        for name in ["a.json", "a.bin"] {
            let p = dir.path().join(name);
            save(&s, &p).unwrap();
            assert_eq!(load(&p).unwrap().to_packed(), s.to_packed());
        }
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let bytes = to_bytes(&sample()).unwrap();
        assert!(from_bytes(&bytes[..bytes.len() - 3]).is_err());
        assert!(from_bytes(b"nope").is_err());
    }
}
