//! Persistent incident gallery with query-by-example ranking.
//!
//! # File layout
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! header   magic "GLGALLRY" (8) | version u32 | dim u32 | model_id u64
//! record   b'R' | payload_len u32 | payload
//! payload  id u64 | timestamp i64 | lat f64 | lon f64
//!          | camera_len u16 | camera utf-8 | label_len u16 | label utf-8
//!          | dim x f64 features
//! footer   b'I' | count u64 | count x record offset u64
//! trailer  footer_offset u64 | magic "GLINDEX1" (8)
//! ```
//!
//! Records are only ever appended. Each add overwrites the previous footer
//! and trailer with the new record followed by a fresh footer, then syncs.
//! A file whose trailer is missing or inconsistent is recovered by scanning
//! records from the header and stopping at the first incomplete one.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::kmeans;
use crate::model::{FeatureModel, GaitTemplate};
use crate::sample::Dataset;

pub const GALLERY_MAGIC: &[u8; 8] = b"GLGALLRY";
pub const INDEX_MAGIC: &[u8; 8] = b"GLINDEX1";
pub const GALLERY_VERSION: u32 = 1;
const HEADER_LEN: u64 = 24;
const TRAILER_LEN: u64 = 16;
pub const DEFAULT_CALIBRATION_QUANTILE: f64 = 0.9;

/// One recorded appearance of a walker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incident {
    pub id: u64,
    pub template: GaitTemplate,
    /// UTC seconds.
    pub timestamp: i64,
    pub lat: f64,
    pub lon: f64,
    pub camera: String,
}

fn check_location(lat: f64, lon: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(Error::Parameter(format!("geolocation ({lat}, {lon}) is out of range")));
    }
    Ok(())
}

/// Stable fingerprint of a model, stored in the gallery header so templates
/// from different feature spaces never mix.
pub fn model_fingerprint(model: &FeatureModel) -> Result<u64> {
    let digest = Sha256::digest(model.to_json()?.as_bytes());
    Ok(u64::from_le_bytes(digest[..8].try_into().expect("8 bytes")))
}

#[derive(Debug)]
pub struct Gallery {
    path: PathBuf,
    file: File,
    dim: usize,
    model_id: u64,
    incidents: Vec<Incident>,
    offsets: Vec<u64>,
    footer_at: u64,
    recovered: bool,
}

fn encode_record(incident: &Incident) -> Result<Vec<u8>> {
    let mut p = Vec::new();
    p.extend_from_slice(&incident.id.to_le_bytes());
    p.extend_from_slice(&incident.timestamp.to_le_bytes());
    p.extend_from_slice(&incident.lat.to_le_bytes());
    p.extend_from_slice(&incident.lon.to_le_bytes());
    for s in [incident.camera.as_str(), incident.template.label.as_deref().unwrap_or("")] {
        let len = u16::try_from(s.len()).map_err(|_| Error::Parameter("string field longer than 65535 bytes".into()))?;
        p.extend_from_slice(&len.to_le_bytes());
        p.extend_from_slice(s.as_bytes());
    }
    for v in &incident.template.features {
        p.extend_from_slice(&v.to_le_bytes());
    }
    let mut out = Vec::with_capacity(p.len() + 5);
    out.push(b'R');
    out.extend_from_slice(&(p.len() as u32).to_le_bytes());
    out.extend_from_slice(&p);
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::CorruptGallery("record is truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u16()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::CorruptGallery("string field is not UTF-8".into()))
    }
}

fn decode_payload(payload: &[u8], dim: usize) -> Result<Incident> {
    let mut c = Cursor { buf: payload, pos: 0 };
    let id = c.u64()?;
    let timestamp = c.u64()? as i64;
    let lat = c.f64()?;
    let lon = c.f64()?;
    let camera = c.string()?;
    let label = c.string()?;
    let features = (0..dim).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    if c.pos != payload.len() {
        return Err(Error::CorruptGallery(format!("record {id} has trailing bytes")));
    }
    Ok(Incident {
        id,
        template: GaitTemplate {
            features,
            label: (!label.is_empty()).then_some(label),
        },
        timestamp,
        lat,
        lon,
        camera,
    })
}

/// Record starting at `at`, with the offset just past it.
fn record_at(bytes: &[u8], at: usize, dim: usize) -> Result<(Incident, usize)> {
    let mut c = Cursor { buf: bytes, pos: at };
    if c.take(1)? != b"R" {
        return Err(Error::CorruptGallery(format!("no record at offset {at}")));
    }
    let len = u32::from_le_bytes(c.take(4)?.try_into().expect("4 bytes")) as usize;
    let payload = c.take(len)?;
    Ok((decode_payload(payload, dim)?, c.pos))
}

fn read_index(bytes: &[u8], dim: usize) -> Result<(Vec<Incident>, Vec<u64>, u64)> {
    let n = bytes.len();
    if (n as u64) < HEADER_LEN + TRAILER_LEN || &bytes[n - 8..] != INDEX_MAGIC {
        return Err(Error::CorruptGallery("missing index trailer".into()));
    }
    let footer_at = u64::from_le_bytes(bytes[n - 16..n - 8].try_into().expect("8 bytes"));
    if footer_at < HEADER_LEN || footer_at >= n as u64 - TRAILER_LEN {
        return Err(Error::CorruptGallery("index offset out of range".into()));
    }
    let mut c = Cursor {
        buf: &bytes[..n - TRAILER_LEN as usize],
        pos: footer_at as usize,
    };
    if c.take(1)? != b"I" {
        return Err(Error::CorruptGallery("index tag missing".into()));
    }
    let count = c.u64()?;
    let offsets = (0..count).map(|_| c.u64()).collect::<Result<Vec<_>>>()?;
    if c.pos != n - TRAILER_LEN as usize {
        return Err(Error::CorruptGallery("index length mismatch".into()));
    }
    let mut incidents = Vec::with_capacity(offsets.len());
    let mut expected = HEADER_LEN;
    for &off in &offsets {
        if off != expected {
            return Err(Error::CorruptGallery("index offsets are not contiguous".into()));
        }
        let (inc, next) = record_at(&bytes[..footer_at as usize], off as usize, dim)?;
        incidents.push(inc);
        expected = next as u64;
    }
    if expected != footer_at {
        return Err(Error::CorruptGallery("records do not end at the index".into()));
    }
    Ok((incidents, offsets, footer_at))
}

/// Reads complete records from the header onward; stops at the first
/// incomplete or foreign chunk.
fn scan_records(bytes: &[u8], dim: usize) -> (Vec<Incident>, Vec<u64>, u64) {
    let mut incidents = Vec::new();
    let mut offsets = Vec::new();
    let mut at = HEADER_LEN as usize;
    while let Ok((inc, next)) = record_at(bytes, at, dim) {
        if incidents.last().is_some_and(|l: &Incident| inc.id <= l.id) {
            break;
        }
        offsets.push(at as u64);
        incidents.push(inc);
        at = next;
    }
    (incidents, offsets, at as u64)
}

impl Gallery {
    /// Creates a new, empty gallery file. Fails if the file exists.
    pub fn create(path: impl AsRef<Path>, dim: usize, model_id: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("gallery template dimension must be positive".into()));
        }
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| Error::io_at(&path, e))?;
        let mut header = Vec::with_capacity(HEADER_LEN as usize);
        header.extend_from_slice(GALLERY_MAGIC);
        header.extend_from_slice(&GALLERY_VERSION.to_le_bytes());
        header.extend_from_slice(&(dim as u32).to_le_bytes());
        header.extend_from_slice(&model_id.to_le_bytes());
        file.write_all(&header)?;
        let mut g = Gallery {
            path,
            file,
            dim,
            model_id,
            incidents: Vec::new(),
            offsets: Vec::new(),
            footer_at: HEADER_LEN,
            recovered: false,
        };
        g.write_footer()?;
        Ok(g)
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .open(&path)
            .map_err(|e| Error::io_at(&path, e))?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        if bytes.len() < HEADER_LEN as usize || &bytes[..8] != GALLERY_MAGIC {
            return Err(Error::CorruptGallery("not a gallery file".into()));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != GALLERY_VERSION {
            return Err(Error::CorruptGallery(format!("unsupported gallery version {version}")));
        }
        let dim = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
        let model_id = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
        let (incidents, offsets, footer_at, recovered) = match read_index(&bytes, dim) {
            Ok((i, o, f)) => (i, o, f, false),
            Err(_) => {
                let (i, o, f) = scan_records(&bytes, dim);
                (i, o, f, true)
            }
        };
        Ok(Gallery {
            path,
            file,
            dim,
            model_id,
            incidents,
            offsets,
            footer_at,
            recovered,
        })
    }

    /// Opens the gallery at `path` for `model`, creating it when missing.
    pub fn open_for(path: impl AsRef<Path>, model: &FeatureModel) -> Result<Self> {
        let id = model_fingerprint(model)?;
        let path = path.as_ref();
        let g = if path.exists() {
            Gallery::open(path)?
        } else {
            Gallery::create(path, model.output_dim(), id)?
        };
        if g.model_id != id || g.dim != model.output_dim() {
            return Err(Error::Configuration(format!(
                "gallery {} was built with a different model",
                path.display()
            )));
        }
        Ok(g)
    }

    fn write_footer(&mut self) -> Result<()> {
        let mut footer = Vec::with_capacity(9 + 8 * self.offsets.len() + TRAILER_LEN as usize);
        footer.push(b'I');
        footer.extend_from_slice(&(self.offsets.len() as u64).to_le_bytes());
        for o in &self.offsets {
            footer.extend_from_slice(&o.to_le_bytes());
        }
        footer.extend_from_slice(&self.footer_at.to_le_bytes());
        footer.extend_from_slice(INDEX_MAGIC);
        self.file.seek(SeekFrom::Start(self.footer_at))?;
        self.file.write_all(&footer)?;
        self.file.set_len(self.footer_at + footer.len() as u64)?;
        self.file.sync_all()?;
        Ok(())
    }

    /// Appends an incident and returns its id. Ids increase by one per add.
    pub fn add_incident(
        &mut self,
        template: GaitTemplate,
        timestamp: i64,
        lat: f64,
        lon: f64,
        camera: &str,
    ) -> Result<u64> {
        if template.features.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                found: template.features.len(),
            });
        }
        if template.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("template has non-finite entries".into()));
        }
        check_location(lat, lon)?;
        let id = self.incidents.last().map_or(0, |l| l.id + 1);
        let incident = Incident {
            id,
            template,
            timestamp,
            lat,
            lon,
            camera: camera.to_string(),
        };
        let record = encode_record(&incident)?;
        self.file.seek(SeekFrom::Start(self.footer_at))?;
        self.file.write_all(&record)?;
        self.offsets.push(self.footer_at);
        self.footer_at += record.len() as u64;
        self.incidents.push(incident);
        self.write_footer()?;
        self.recovered = false;
        Ok(id)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn model_id(&self) -> u64 {
        self.model_id
    }

    pub fn len(&self) -> usize {
        self.incidents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.incidents.is_empty()
    }

    pub fn incidents(&self) -> &[Incident] {
        &self.incidents
    }

    pub fn incident(&self, id: u64) -> Option<&Incident> {
        self.incidents.binary_search_by_key(&id, |i| i.id).ok().map(|k| &self.incidents[k])
    }

    /// True when the last open had to rebuild the index by scanning.
    pub fn was_recovered(&self) -> bool {
        self.recovered
    }

    /// Ranks the gallery against `query` and applies `rule`.
    pub fn query(&self, model: &FeatureModel, query: &GaitTemplate, rule: &AcceptanceRule) -> Result<LocationTrace> {
        query_incidents(&self.incidents, model, query, None, rule)
    }

    /// Queries with a stored incident; the incident itself is never accepted.
    pub fn query_incident(&self, model: &FeatureModel, id: u64, rule: &AcceptanceRule) -> Result<LocationTrace> {
        let q = self
            .incident(id)
            .ok_or_else(|| Error::Parameter(format!("no incident with id {id}")))?;
        query_incidents(&self.incidents, model, &q.template, Some(id), rule)
    }
}

/// How ranked incidents are accepted into a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum AcceptanceRule {
    /// Keep incidents at distance `<= tau`.
    Threshold { tau: f64 },
    /// Keep the `k` nearest incidents.
    Topk { k: usize },
    /// K-Means over gallery and query in whitened feature space; keep the
    /// query's cluster.
    Cluster { k: usize, seed: u64 },
}

impl fmt::Display for AcceptanceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcceptanceRule::Threshold { tau } => write!(f, "threshold:{tau}"),
            AcceptanceRule::Topk { k } => write!(f, "topk:{k}"),
            AcceptanceRule::Cluster { k, seed } => write!(f, "cluster:{k}:{seed}"),
        }
    }
}

impl FromStr for AcceptanceRule {
    type Err = Error;

    /// `threshold:<tau>`, `topk:<k>`, `cluster:<k>` or `cluster:<k>:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("invalid acceptance rule `{s}`"));
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let arg = parts.next().ok_or_else(bad)?;
        let extra = parts.next();
        if parts.next().is_some() {
            return Err(bad());
        }
        let rule = match (kind, extra) {
            ("threshold", None) => {
                let tau: f64 = arg.parse().map_err(|_| bad())?;
                if !(tau >= 0.0 && tau.is_finite()) {
                    return Err(bad());
                }
                AcceptanceRule::Threshold { tau }
            }
            ("topk", None) => AcceptanceRule::Topk {
                k: arg.parse().map_err(|_| bad())?,
            },
            ("cluster", _) => AcceptanceRule::Cluster {
                k: arg.parse().map_err(|_| bad())?,
                seed: extra.map(str::parse).transpose().map_err(|_| bad())?.unwrap_or(0),
            },
            _ => return Err(bad()),
        };
        match rule {
            AcceptanceRule::Topk { k: 0 } | AcceptanceRule::Cluster { k: 0, .. } => Err(bad()),
            r => Ok(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub id: u64,
    pub distance: f64,
    pub timestamp: i64,
    pub lat: f64,
    pub lon: f64,
    pub camera: String,
}

/// Accepted incidents for one query, nearest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationTrace {
    /// Stored incident used as the query, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_label: Option<String>,
    pub rule: String,
    pub accepted: Vec<TraceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl LocationTrace {
    pub fn ids(&self) -> Vec<u64> {
        self.accepted.iter().map(|e| e.id).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Ranks `incidents` against `query` and applies `rule`. The ranking is by
/// model distance with ties broken by incident id.
pub fn query_incidents(
    incidents: &[Incident],
    model: &FeatureModel,
    query: &GaitTemplate,
    exclude: Option<u64>,
    rule: &AcceptanceRule,
) -> Result<LocationTrace> {
    let candidates: Vec<&Incident> = incidents.iter().filter(|i| Some(i.id) != exclude).collect();
    if candidates.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let mut ranked = candidates
        .iter()
        .map(|i| Ok((model.template_distance(query, &i.template)?, *i)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));

    let mut warnings = Vec::new();
    let accepted: Vec<(f64, &Incident)> = match rule {
        AcceptanceRule::Threshold { tau } => ranked.into_iter().take_while(|(d, _)| d <= tau).collect(),
        AcceptanceRule::Topk { k } => {
            if *k > ranked.len() {
                warnings.push(format!("k = {k} exceeds gallery size {}; clipped", ranked.len()));
            }
            ranked.into_iter().take(*k).collect()
        }
        AcceptanceRule::Cluster { k, seed } => {
            let n = ranked.len() + 1;
            let k = if *k > n {
                warnings.push(format!("k = {k} exceeds the {n} clustered templates; clipped"));
                n
            } else {
                *k
            };
            // Query is the last point.
            let mut points: Vec<Vec<f64>> = ranked.iter().map(|(_, i)| model.whiten(&i.template.features)).collect();
            points.push(model.whiten(&query.features));
            let result = kmeans(&points, k, *seed, crate::harness::cluster::DEFAULT_MAX_ITER)?;
            let own = result.assignment[n - 1];
            ranked
                .into_iter()
                .enumerate()
                .filter(|(j, _)| result.assignment[*j] == own)
                .map(|(_, r)| r)
                .collect()
        }
    };
    Ok(LocationTrace {
        query_id: exclude,
        query_label: query.label.clone(),
        rule: rule.to_string(),
        accepted: accepted
            .into_iter()
            .map(|(distance, i)| TraceEntry {
                id: i.id,
                distance,
                timestamp: i.timestamp,
                lat: i.lat,
                lon: i.lon,
                camera: i.camera.clone(),
            })
            .collect(),
        warnings,
    })
}

/// Threshold at the given quantile of same-identity template distances on a
/// validation set (linear interpolation between order statistics).
pub fn calibrate_threshold(model: &FeatureModel, validation: &Dataset, quantile: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&quantile) {
        return Err(Error::Parameter(format!("quantile must lie in [0, 1], got {quantile}")));
    }
    let templates = model.templates(validation)?;
    let mut same = Vec::new();
    for i in 0..templates.len() {
        for j in i + 1..templates.len() {
            if templates[i].label == templates[j].label {
                same.push(model.template_distance(&templates[i], &templates[j])?);
            }
        }
    }
    if same.is_empty() {
        return Err(Error::UndefinedMetric("validation set has no same-identity pair".into()));
    }
    same.sort_by(f64::total_cmp);
    let pos = quantile * (same.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(same[lo] + (pos - lo as f64) * (same[hi] - same[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::JointMask;

    fn model(dim: usize) -> FeatureModel {
        // Raw model over a single joint with dim/3 frames.
        FeatureModel::raw(JointMask::new(vec![0]).unwrap(), dim / 3)
    }

    fn template(v: &[f64]) -> GaitTemplate {
        GaitTemplate {
            features: v.to_vec(),
            label: None,
        }
    }

    #[test]
    fn first_add_gets_id_zero_and_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.gal");
        let m = model(6);
        let mut g = Gallery::open_for(&path, &m).unwrap();
        assert!(g.is_empty());
        let id = g.add_incident(template(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), 1_700_000_000, 49.19, 16.61, "cam-1").unwrap();
        assert_eq!(id, 0);
        drop(g);
        let g = Gallery::open_for(&path, &m).unwrap();
        assert_eq!(g.len(), 1);
        assert!(!g.was_recovered());
        assert_eq!(g.incidents()[0].camera, "cam-1");
        assert_eq!(g.incidents()[0].template.features[5], 6.0);
    }

    #[test]
    fn rejects_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        let mut g = Gallery::create(dir.path().join("g"), 3, 0).unwrap();
        assert!(matches!(
            g.add_incident(template(&[1.0]), 0, 0.0, 0.0, ""),
            Err(Error::Shape { expected: 3, found: 1 })
        ));
        assert!(g.add_incident(template(&[1.0; 3]), 0, 91.0, 0.0, "").is_err());
        assert!(g.add_incident(template(&[1.0; 3]), 0, 0.0, -181.0, "").is_err());
        assert!(Gallery::create(dir.path().join("g"), 3, 0).is_err());
    }

    #[test]
    fn truncated_tail_is_recovered_by_scan() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g");
        let mut g = Gallery::create(&path, 3, 9).unwrap();
        for i in 0..3 {
            g.add_incident(template(&[i as f64; 3]), i, 0.0, 0.0, "c").unwrap();
        }
        drop(g);
        // Drop the trailer and half of the last record's successor footer.
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 20]).unwrap();
        let mut g = Gallery::open(&path).unwrap();
        assert!(g.was_recovered());
        assert_eq!(g.len(), 3);
        assert_eq!(g.add_incident(template(&[7.0; 3]), 7, 0.0, 0.0, "c").unwrap(), 3);
        drop(g);
        let g = Gallery::open(&path).unwrap();
        assert!(!g.was_recovered());
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn rules_parse_and_display() {
        for s in ["threshold:0.5", "topk:20", "cluster:5:7"] {
            assert_eq!(s.parse::<AcceptanceRule>().unwrap().to_string(), s);
        }
        assert_eq!(
            "cluster:3".parse::<AcceptanceRule>().unwrap(),
            AcceptanceRule::Cluster { k: 3, seed: 0 }
        );
        for bad in ["topk", "topk:0", "threshold:-1", "knn:3", "topk:3:4", "threshold:nan"] {
            assert!(bad.parse::<AcceptanceRule>().is_err(), "{bad}");
        }
    }

    #[test]
    fn ranking_breaks_ties_by_id() {
        let m = model(3);
        let incidents: Vec<Incident> = [2.0, 1.0, -1.0, 3.0]
            .iter()
            .enumerate()
            .map(|(i, &x)| Incident {
                id: i as u64,
                template: template(&[x, 0.0, 0.0]),
                timestamp: 0,
                lat: 0.0,
                lon: 0.0,
                camera: String::new(),
            })
            .collect();
        let q = template(&[0.0; 3]);
        let t = query_incidents(&incidents, &m, &q, None, &AcceptanceRule::Topk { k: 10 }).unwrap();
        assert_eq!(t.ids(), [1, 2, 0, 3]);
        assert_eq!(t.warnings.len(), 1);
        let t = query_incidents(&incidents, &m, &q, None, &AcceptanceRule::Threshold { tau: 0.0 }).unwrap();
        assert!(t.accepted.is_empty());
        let t = query_incidents(&incidents, &m, &q, Some(1), &AcceptanceRule::Topk { k: 1 }).unwrap();
        assert_eq!(t.ids(), [2]);
        assert!(matches!(
            query_incidents(&[], &m, &q, None, &AcceptanceRule::Topk { k: 1 }),
            Err(Error::EmptyGallery)
        ));
    }

    #[test]
    fn cluster_rule_keeps_the_query_cluster() {
        let m = model(3);
        let incidents: Vec<Incident> = [0.0, 0.1, 0.2, 50.0, 50.1]
            .iter()
            .enumerate()
            .map(|(i, &x)| Incident {
                id: i as u64,
                template: template(&[x, 0.0, 0.0]),
                timestamp: 0,
                lat: 0.0,
                lon: 0.0,
                camera: String::new(),
            })
            .collect();
        let t = query_incidents(&incidents, &m, &template(&[50.05, 0.0, 0.0]), None, &AcceptanceRule::Cluster { k: 2, seed: 1 }).unwrap();
        let mut ids = t.ids();
        ids.sort();
        assert_eq!(ids, [3, 4]);
    }
}
