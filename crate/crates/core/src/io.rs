//! Bit-exact file formats.
//!
//! All three binary formats share one envelope: a 4-byte magic, a
//! little-endian header and payload with f32 numeric data, and a trailing
//! CRC32 over everything between the magic and the checksum. Loads validate
//! structure first (`TruncatedFile` for any size mismatch), then the
//! checksum, then the payload invariants. Writes go through a temp file and
//! rename, so no partial artifact survives an error.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterModel;
use crate::codec::{SuperMotion, SuperMotionSequence};
use crate::error::{Error, Result};
use crate::motion::{MotionSequence, Representation, Skeleton};

pub const MOTION_MAGIC: [u8; 4] = *b"LMF1";
pub const SUPERMOTION_MAGIC: [u8; 4] = *b"LSM1";
pub const CLUSTER_MAGIC: [u8; 4] = *b"LCM1";
pub const FORMAT_VERSION: u32 = 1;

fn representation_code(r: Representation) -> u8 {
    match r {
        Representation::Cartesian3D => 0,
        Representation::Rot6D => 1,
    }
}

fn representation_from_code(code: u8) -> Result<Representation> {
    match code {
        0 => Ok(Representation::Cartesian3D),
        1 => Ok(Representation::Rot6D),
        other => Err(Error::CorruptPayload(format!(
            "unknown representation code {other}"
        ))),
    }
}

/// Byte writer for the little-endian envelope.
#[derive(Default)]
struct Enc {
    buf: Vec<u8>,
}

impl Enc {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f32(&mut self, v: f32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f32_slice(&mut self, values: &[f64]) {
        self.buf.reserve(values.len() * 4);
        for &v in values {
            self.buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }

    /// Append the checksum over everything after the magic and return the
    /// finished file image.
    fn finish(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf[4..]);
        self.buf.extend_from_slice(&crc.to_le_bytes());
        self.buf
    }
}

/// Bounds-checked byte reader; any overrun reports `TruncatedFile`.
struct Dec<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Dec<'a> {
    fn new(data: &'a [u8]) -> Self {
        Dec { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        // The trailing 4 bytes are the checksum, never structural data.
        let structural_end = self.data.len().saturating_sub(4);
        if self.pos + n > structural_end {
            return Err(Error::TruncatedFile {
                expected: self.pos + n + 4,
                actual: self.data.len(),
            });
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f32_vec(&mut self, count: usize) -> Result<Vec<f64>> {
        let raw = self.take(count * 4)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect())
    }

    /// Structural parse must land exactly at the checksum.
    fn expect_done(&self) -> Result<()> {
        if self.pos + 4 != self.data.len() {
            return Err(Error::TruncatedFile {
                expected: self.pos + 4,
                actual: self.data.len(),
            });
        }
        Ok(())
    }

    fn verify_checksum(&self) -> Result<()> {
        let stored = u32::from_le_bytes(self.data[self.data.len() - 4..].try_into().unwrap());
        let computed = crc32fast::hash(&self.data[4..self.data.len() - 4]);
        if stored != computed {
            return Err(Error::ChecksumMismatch { stored, computed });
        }
        Ok(())
    }
}

fn open_envelope<'a>(data: &'a [u8], magic: &[u8; 4]) -> Result<Dec<'a>> {
    if data.len() < 12 {
        return Err(Error::TruncatedFile {
            expected: 12,
            actual: data.len(),
        });
    }
    let actual: [u8; 4] = data[..4].try_into().unwrap();
    if actual != *magic {
        return Err(Error::BadMagic {
            expected: *magic,
            actual,
        });
    }
    let mut dec = Dec::new(data);
    dec.pos = 4;
    let version = dec.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    Ok(dec)
}

/// Write bytes via a temp file in the destination directory plus rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Motion files
// ---------------------------------------------------------------------------

pub fn motion_to_bytes(motion: &MotionSequence) -> Vec<u8> {
    let mut enc = Enc::default();
    enc.buf.extend_from_slice(&MOTION_MAGIC);
    enc.u32(FORMAT_VERSION);
    enc.f32(motion.fps() as f32);
    enc.u8(representation_code(motion.representation()));
    enc.u32(motion.joint_count() as u32);
    enc.u32(motion.num_frames() as u32);
    enc.u32(motion.feature_dim() as u32);
    enc.f32_slice(motion.data());
    enc.finish()
}

pub fn motion_from_bytes(data: &[u8]) -> Result<MotionSequence> {
    let mut dec = open_envelope(data, &MOTION_MAGIC)?;
    let fps = dec.f32()? as f64;
    let representation = representation_from_code(dec.u8()?)?;
    let joints = dec.u32()? as usize;
    let frames = dec.u32()? as usize;
    let dim = dec.u32()? as usize;
    let payload = dec.f32_vec(frames * dim)?;
    dec.expect_done()?;
    dec.verify_checksum()?;
    if joints == 0 || dim != representation.feature_dim(joints) {
        return Err(Error::CorruptPayload(format!(
            "feature dim {dim} does not match representation with {joints} joints"
        )));
    }
    MotionSequence::new(representation, joints, fps, payload)
}

pub fn save_motion(path: &Path, motion: &MotionSequence) -> Result<()> {
    write_atomic(path, &motion_to_bytes(motion))
}

pub fn load_motion(path: &Path) -> Result<MotionSequence> {
    motion_from_bytes(&fs::read(path)?)
}

/// JSON form of a motion file; floats round-trip via shortest decimal.
#[derive(Debug, Serialize, Deserialize)]
pub struct MotionJson {
    pub format_version: u32,
    pub fps: f64,
    pub representation: Representation,
    pub joint_count: usize,
    pub frames: Vec<Vec<f64>>,
}

pub fn motion_to_json(motion: &MotionSequence) -> MotionJson {
    MotionJson {
        format_version: FORMAT_VERSION,
        fps: motion.fps(),
        representation: motion.representation(),
        joint_count: motion.joint_count(),
        frames: motion.frames().map(|f| f.to_vec()).collect(),
    }
}

pub fn motion_from_json(json: &MotionJson) -> Result<MotionSequence> {
    if json.format_version != FORMAT_VERSION {
        return Err(Error::VersionUnsupported(json.format_version));
    }
    let data: Vec<f64> = json.frames.iter().flatten().copied().collect();
    let dim = json.representation.feature_dim(json.joint_count);
    if json.frames.iter().any(|f| f.len() != dim) {
        return Err(Error::CorruptPayload("ragged frame rows".into()));
    }
    MotionSequence::new(json.representation, json.joint_count, json.fps, data)
}

pub fn save_motion_json(path: &Path, motion: &MotionSequence) -> Result<()> {
    let text = serde_json::to_string_pretty(&motion_to_json(motion))?;
    write_atomic(path, text.as_bytes())
}

pub fn load_motion_json(path: &Path) -> Result<MotionSequence> {
    let json: MotionJson = serde_json::from_str(&fs::read_to_string(path)?)?;
    motion_from_json(&json)
}

/// Dispatch on extension: `.json` loads the JSON form, anything else binary.
pub fn load_motion_auto(path: &Path) -> Result<MotionSequence> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => load_motion_json(path),
        _ => load_motion(path),
    }
}

// ---------------------------------------------------------------------------
// Supermotion files
// ---------------------------------------------------------------------------

pub fn supermotion_to_bytes(sm: &SuperMotionSequence) -> Vec<u8> {
    let dim = sm.feature_dim();
    let mut enc = Enc::default();
    enc.buf.extend_from_slice(&SUPERMOTION_MAGIC);
    enc.u32(FORMAT_VERSION);
    enc.f32(sm.fps() as f32);
    enc.u8(representation_code(sm.representation()));
    enc.u32(sm.joint_count() as u32);
    enc.u32(dim as u32);
    enc.u32(sm.num_segments() as u32);
    enc.u64(sm.total_frames() as u64);
    for seg in sm.segments() {
        enc.u32(seg.duration);
        enc.u32(seg.cluster_label);
        enc.f32_slice(&seg.start_pose);
        enc.f32_slice(&seg.velocity);
    }
    match sm.condition_tag() {
        Some(tag) => {
            enc.u8(1);
            enc.u32(tag.len() as u32);
            enc.buf.extend_from_slice(tag);
        }
        None => enc.u8(0),
    }
    enc.finish()
}

pub fn supermotion_from_bytes(data: &[u8]) -> Result<SuperMotionSequence> {
    let mut dec = open_envelope(data, &SUPERMOTION_MAGIC)?;
    let fps = dec.f32()? as f64;
    let representation = representation_from_code(dec.u8()?)?;
    let joints = dec.u32()? as usize;
    let dim = dec.u32()? as usize;
    let num_segments = dec.u32()? as usize;
    let recorded_total = dec.u64()? as usize;

    let mut segments = Vec::with_capacity(num_segments);
    for _ in 0..num_segments {
        let duration = dec.u32()?;
        let cluster_label = dec.u32()?;
        let start_pose = dec.f32_vec(dim)?;
        let velocity = dec.f32_vec(dim)?;
        segments.push(SuperMotion {
            start_pose,
            velocity,
            duration,
            cluster_label,
        });
    }
    let tag = match dec.u8()? {
        0 => None,
        _ => {
            let len = dec.u32()? as usize;
            Some(dec.take(len)?.to_vec())
        }
    };
    dec.expect_done()?;
    dec.verify_checksum()?;

    if joints == 0 || dim != representation.feature_dim(joints) {
        return Err(Error::CorruptPayload(format!(
            "feature dim {dim} does not match representation with {joints} joints"
        )));
    }
    let sm = SuperMotionSequence::new(representation, joints, fps, segments)?
        .with_condition_tag(tag);
    if sm.total_frames() != recorded_total {
        return Err(Error::CorruptPayload(format!(
            "recorded total {recorded_total} != sum of durations {}",
            sm.total_frames()
        )));
    }
    Ok(sm)
}

pub fn save_supermotion(path: &Path, sm: &SuperMotionSequence) -> Result<()> {
    write_atomic(path, &supermotion_to_bytes(sm))
}

pub fn load_supermotion(path: &Path) -> Result<SuperMotionSequence> {
    supermotion_from_bytes(&fs::read(path)?)
}

// ---------------------------------------------------------------------------
// Cluster model files
// ---------------------------------------------------------------------------

pub fn cluster_model_to_bytes(model: &ClusterModel) -> Vec<u8> {
    let mut enc = Enc::default();
    enc.buf.extend_from_slice(&CLUSTER_MAGIC);
    enc.u32(FORMAT_VERSION);
    enc.u32(model.k() as u32);
    enc.u32(model.feature_dim() as u32);
    enc.u64(model.seed());
    enc.u32(model.iterations_run());
    enc.f32(model.inertia() as f32);
    enc.f32_slice(model.centroids());
    enc.finish()
}

pub fn cluster_model_from_bytes(data: &[u8]) -> Result<ClusterModel> {
    let mut dec = open_envelope(data, &CLUSTER_MAGIC)?;
    let k = dec.u32()? as usize;
    let dim = dec.u32()? as usize;
    let seed = dec.u64()?;
    let iterations = dec.u32()?;
    let inertia = dec.f32()? as f64;
    let centroids = dec.f32_vec(k * dim)?;
    dec.expect_done()?;
    dec.verify_checksum()?;
    ClusterModel::from_raw(centroids, k, dim, seed, inertia, iterations)
}

pub fn save_cluster_model(path: &Path, model: &ClusterModel) -> Result<()> {
    write_atomic(path, &cluster_model_to_bytes(model))
}

pub fn load_cluster_model(path: &Path) -> Result<ClusterModel> {
    cluster_model_from_bytes(&fs::read(path)?)
}

// ---------------------------------------------------------------------------
// JSON sidecars and manifests
// ---------------------------------------------------------------------------

pub fn save_skeleton_json(path: &Path, skeleton: &Skeleton) -> Result<()> {
    let text = serde_json::to_string_pretty(skeleton)?;
    write_atomic(path, text.as_bytes())
}

pub fn load_skeleton_json(path: &Path) -> Result<Skeleton> {
    let skeleton: Skeleton = serde_json::from_str(&fs::read_to_string(path)?)?;
    skeleton.validate()?;
    Ok(skeleton)
}

/// One input clip in a `clips.jsonl` manifest; `motion` is a path relative
/// to the manifest location.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClipManifestEntry {
    pub id: String,
    pub motion: String,
    pub prompt: String,
}

/// One built sample in a corpus output manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSampleRecord {
    pub id: String,
    pub clip_ids: Vec<String>,
    pub seed: u64,
    pub total_frames: usize,
    pub prompt: String,
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Random values on the f32 grid so binary round trips are bit-exact.
    fn f32_grid(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| (rng.random::<f32>() * 4.0 - 2.0) as f64).collect()
    }

    fn random_motion(rng: &mut ChaCha8Rng) -> MotionSequence {
        let joints = rng.random_range(1..5);
        let frames = rng.random_range(1..20);
        MotionSequence::new(
            Representation::Cartesian3D,
            joints,
            30.0,
            f32_grid(rng, frames * 3 * joints),
        )
        .unwrap()
    }

    #[test]
    fn motion_binary_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = random_motion(&mut rng);
            let bytes = motion_to_bytes(&m);
            let back = motion_from_bytes(&bytes).unwrap();
            assert_eq!(back, m);
            assert_eq!(motion_to_bytes(&back), bytes);
        }
    }

    #[test]
    fn motion_json_round_trip_is_value_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_motion(&mut rng);
        let text = serde_json::to_string(&motion_to_json(&m)).unwrap();
        let parsed: MotionJson = serde_json::from_str(&text).unwrap();
        assert_eq!(motion_from_json(&parsed).unwrap(), m);
    }

    #[test]
    fn corrupt_magic_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut bytes = motion_to_bytes(&random_motion(&mut rng));
        bytes[0] = b'X';
        assert!(matches!(motion_from_bytes(&bytes), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn truncation_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let bytes = motion_to_bytes(&random_motion(&mut rng));
        let truncated = &bytes[..bytes.len() - 1];
        assert!(matches!(
            motion_from_bytes(truncated),
            Err(Error::TruncatedFile { .. })
        ));
    }

    #[test]
    fn payload_bit_flip_fails_checksum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut bytes = motion_to_bytes(&random_motion(&mut rng));
        let mid = bytes.len() - 9;
        bytes[mid] ^= 0x40;
        assert!(matches!(
            motion_from_bytes(&bytes),
            Err(Error::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn unsupported_version_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = random_motion(&mut rng);
        let mut bytes = motion_to_bytes(&m);
        bytes[4..8].copy_from_slice(&9u32.to_le_bytes());
        // Re-sign so only the version differs.
        let len = bytes.len();
        let crc = crc32fast::hash(&bytes[4..len - 4]);
        bytes[len - 4..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(
            motion_from_bytes(&bytes),
            Err(Error::VersionUnsupported(9))
        ));
    }

    #[test]
    fn supermotion_round_trip_with_condition_tag() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let segments: Vec<SuperMotion> = (0..4)
            .map(|i| SuperMotion {
                start_pose: f32_grid(&mut rng, 6),
                velocity: f32_grid(&mut rng, 6),
                duration: rng.random_range(1..10),
                cluster_label: i,
            })
            .collect();
        let sm = SuperMotionSequence::new(Representation::Cartesian3D, 2, 20.0, segments)
            .unwrap()
            .with_condition_tag(Some(b"beat=120bpm".to_vec()));
        let bytes = supermotion_to_bytes(&sm);
        let back = supermotion_from_bytes(&bytes).unwrap();
        assert_eq!(back, sm);
        assert_eq!(back.condition_tag(), Some(&b"beat=120bpm"[..]));
        assert_eq!(supermotion_to_bytes(&back), bytes);
    }

    #[test]
    fn supermotion_total_frames_is_verified() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sm = SuperMotionSequence::new(
            Representation::Cartesian3D,
            1,
            30.0,
            vec![SuperMotion {
                start_pose: f32_grid(&mut rng, 3),
                velocity: f32_grid(&mut rng, 3),
                duration: 5,
                cluster_label: 0,
            }],
        )
        .unwrap();
        let mut bytes = supermotion_to_bytes(&sm);
        // Total-frames field sits after magic(4)+version(4)+fps(4)+repr(1)+J(4)+D(4)+M(4).
        let at = 4 + 4 + 4 + 1 + 4 + 4 + 4;
        bytes[at..at + 8].copy_from_slice(&99u64.to_le_bytes());
        let len = bytes.len();
        let crc = crc32fast::hash(&bytes[4..len - 4]);
        bytes[len - 4..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(
            supermotion_from_bytes(&bytes),
            Err(Error::CorruptPayload(_))
        ));
    }

    #[test]
    fn cluster_model_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let k = rng.random_range(1..8);
            let dim = rng.random_range(1..10);
            let model = ClusterModel::from_raw(
                f32_grid(&mut rng, k * dim),
                k,
                dim,
                rng.random(),
                (rng.random::<f32>() * 10.0) as f64,
                rng.random_range(0..100),
            )
            .unwrap();
            let bytes = cluster_model_to_bytes(&model);
            let back = cluster_model_from_bytes(&bytes).unwrap();
            assert_eq!(back, model);
        }
    }

    #[test]
    fn atomic_save_and_load_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = random_motion(&mut rng);
        let path = dir.path().join("m.lmf");
        save_motion(&path, &m).unwrap();
        assert_eq!(load_motion(&path).unwrap(), m);

        let jpath = dir.path().join("m.json");
        save_motion_json(&jpath, &m).unwrap();
        assert_eq!(load_motion_auto(&jpath).unwrap(), m);

        let sk = Skeleton::new(vec![-1, 0], vec![[0.0; 3], [0.0, -1.0, 0.0]], vec![1]).unwrap();
        let spath = dir.path().join("sk.json");
        save_skeleton_json(&spath, &sk).unwrap();
        assert_eq!(load_skeleton_json(&spath).unwrap(), sk);
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clips.jsonl");
        let records = vec![
            ClipManifestEntry {
                id: "c0".into(),
                motion: "c0.lmf".into(),
                prompt: "a person waves".into(),
            },
            ClipManifestEntry {
                id: "c1".into(),
                motion: "c1.lmf".into(),
                prompt: "someone spins".into(),
            },
        ];
        write_jsonl(&path, &records).unwrap();
        let back: Vec<ClipManifestEntry> = read_jsonl(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].prompt, "someone spins");
    }
}
