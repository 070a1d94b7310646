//! Per-case replay logs: persistence, digests, and verified re-execution.
//!
//! A replay log stores everything needed to re-derive a trace (config,
//! controller spec, step size) plus one 64-bit digest per frame.
//! Verification re-runs the simulation and compares digests frame by frame,
//! which proves bit-exact reproduction within one build without storing the
//! frames themselves. Frames can optionally be embedded for offline
//! inspection and rendering.
//!
//! # Digest algorithm
//!
//! FNV-1a with 64-bit state over the canonical little-endian serialization
//! of a frame, in this exact field order:
//!
//! ```text
//! time:f64  visibility:f64  ego:actor  len(others):u64  others[0]:actor ...
//! actor := len(id):u64  id:utf-8 bytes  pos.x:f64  pos.y:f64  heading:f64
//!          speed:f64  route_progress:f64  triggered:u8
//! ```
//!
//! All numbers little-endian; floats as their IEEE 754 bit patterns, so any
//! single-bit difference in any field changes the digest.

use crate::controller::{ControllerRegistry, ControllerSpec};
use crate::error::Error;
use crate::library::ScenarioLibrary;
use crate::sim::{run_simulation, ActorState, Outcome, Trace, WorldState};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const REPLAY_SCHEMA_VERSION: u32 = 1;
pub const DIGEST_ALGORITHM: &str = "fnv1a64";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

struct Fnv64(u64);

impl Fnv64 {
    fn new() -> Self {
        Fnv64(FNV_OFFSET)
    }

    fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    fn put_f64(&mut self, v: f64) {
        self.update(&v.to_le_bytes());
    }

    fn put_u64(&mut self, v: u64) {
        self.update(&v.to_le_bytes());
    }

    fn put_str(&mut self, s: &str) {
        self.put_u64(s.len() as u64);
        self.update(s.as_bytes());
    }

    fn put_actor(&mut self, a: &ActorState) {
        self.put_str(&a.actor_id);
        self.put_f64(a.position.x);
        self.put_f64(a.position.y);
        self.put_f64(a.heading);
        self.put_f64(a.speed);
        self.put_f64(a.route_progress);
        self.update(&[a.triggered as u8]);
    }
}

/// 64-bit digest of one frame's canonical serialization.
pub fn frame_digest(frame: &WorldState) -> u64 {
    let mut h = Fnv64::new();
    h.put_f64(frame.time);
    h.put_f64(frame.visibility);
    h.put_actor(&frame.ego);
    h.put_u64(frame.others.len() as u64);
    for other in &frame.others {
        h.put_actor(other);
    }
    h.0
}

fn digest_to_hex(d: u64) -> String {
    format!("{d:016x}")
}

fn digest_from_hex(s: &str) -> Option<u64> {
    (s.len() == 16)
        .then(|| u64::from_str_radix(s, 16).ok())
        .flatten()
}

/// On-disk record sufficient to re-derive and verify a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayLog {
    pub schema_version: u32,
    pub config: crate::scenario::ScenarioConfig,
    pub controller: ControllerSpec,
    pub step_size: f64,
    pub outcome: Outcome,
    pub digest_algorithm: String,
    /// One 16-hex-char digest per frame.
    pub frame_digests: Vec<String>,
    /// Optional embedded frames for offline inspection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_frames: Option<Vec<WorldState>>,
}

impl ReplayLog {
    /// Builds a log from a trace, optionally embedding the frames.
    pub fn from_trace(trace: &Trace, controller: &ControllerSpec, embed_frames: bool) -> Self {
        ReplayLog {
            schema_version: REPLAY_SCHEMA_VERSION,
            config: trace.config.clone(),
            controller: controller.clone(),
            step_size: trace.step_size,
            outcome: trace.outcome,
            digest_algorithm: DIGEST_ALGORITHM.to_string(),
            frame_digests: trace
                .frames
                .iter()
                .map(|f| digest_to_hex(frame_digest(f)))
                .collect(),
            full_frames: embed_frames.then(|| trace.frames.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("log serialization");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Writes a replay log next to the other case artifacts.
pub fn write_log(
    trace: &Trace,
    controller: &ControllerSpec,
    path: &Path,
    embed_frames: bool,
) -> Result<(), Error> {
    let log = ReplayLog::from_trace(trace, controller, embed_frames);
    std::fs::write(path, log.to_json())?;
    Ok(())
}

pub fn read_log(path: &Path) -> Result<ReplayLog, Error> {
    ReplayLog::from_json(&std::fs::read_to_string(path)?)
}

/// Result of verifying a replay log against re-execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReplayVerdict {
    Match,
    /// First frame index at which the stored digests and the re-executed
    /// trace disagree (or one trace ends).
    Mismatch {
        frame: usize,
    },
}

impl std::fmt::Display for ReplayVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReplayVerdict::Match => write!(f, "Match"),
            ReplayVerdict::Mismatch { frame } => write!(f, "Mismatch at frame {frame}"),
        }
    }
}

/// Re-runs the simulation recorded in `log` and compares per-frame digests
/// and the outcome.
pub fn verify_replay(
    log: &ReplayLog,
    library: &ScenarioLibrary,
    registry: &ControllerRegistry,
) -> Result<ReplayVerdict, Error> {
    let template = library.get(&log.config.template_id)?;
    let controller = registry.get(&log.controller.name)?;
    let trace = run_simulation(
        &template,
        &log.config,
        controller.as_ref(),
        &log.controller,
        log.step_size,
    )?;

    let stored: Vec<Option<u64>> = log
        .frame_digests
        .iter()
        .map(|s| digest_from_hex(s))
        .collect();
    let fresh: Vec<u64> = trace.frames.iter().map(frame_digest).collect();
    let common = stored.len().min(fresh.len());
    for k in 0..common {
        if stored[k] != Some(fresh[k]) {
            return Ok(ReplayVerdict::Mismatch { frame: k });
        }
    }
    if stored.len() != fresh.len() {
        return Ok(ReplayVerdict::Mismatch { frame: common });
    }
    if trace.outcome != log.outcome {
        return Ok(ReplayVerdict::Mismatch {
            frame: common.saturating_sub(1),
        });
    }
    Ok(ReplayVerdict::Match)
}

/// Frames for rendering: embedded ones if present, otherwise re-derived by a
/// verified replay. A verification mismatch means the log does not describe
/// this build's dynamics, so re-derived frames would be wrong.
pub fn replay_frames(
    log: &ReplayLog,
    library: &ScenarioLibrary,
    registry: &ControllerRegistry,
) -> Result<Vec<WorldState>, Error> {
    if let Some(frames) = &log.full_frames {
        return Ok(frames.clone());
    }
    match verify_replay(log, library, registry)? {
        ReplayVerdict::Match => {}
        ReplayVerdict::Mismatch { frame } => {
            return Err(Error::FramesUnavailable(format!(
                "log has no embedded frames and replay diverges at frame {frame}"
            )))
        }
    }
    let template = library.get(&log.config.template_id)?;
    let controller = registry.get(&log.controller.name)?;
    let trace = run_simulation(
        &template,
        &log.config,
        controller.as_ref(),
        &log.controller,
        log.step_size,
    )?;
    Ok(trace.frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::instantiate;
    use std::collections::BTreeMap;

    fn ped_trace(v: f64, seed: u64) -> (Trace, ControllerSpec) {
        let lib = ScenarioLibrary::with_builtins();
        let template = lib.get("ped_crossing").unwrap();
        let bindings: BTreeMap<String, f64> = [
            ("v", v),
            ("d_trigger", 15.0),
            ("start_distance", 40.0),
            ("cloudiness", 20.0),
        ]
        .iter()
        .map(|(k, val)| (k.to_string(), *val))
        .collect();
        let config = instantiate(&template, &bindings, seed).unwrap();
        let registry = ControllerRegistry::with_builtins();
        let spec = ControllerSpec::named("reactive_braking");
        let controller = registry.get(&spec.name).unwrap();
        let trace = run_simulation(&template, &config, controller.as_ref(), &spec, 0.05).unwrap();
        (trace, spec)
    }

    #[test]
    fn log_roundtrips_and_verifies() {
        let dir = tempfile::tempdir().unwrap();
        let (trace, spec) = ped_trace(1.5, 7);
        let path = dir.path().join("case.replay.json");
        write_log(&trace, &spec, &path, false).unwrap();
        let log = read_log(&path).unwrap();
        assert_eq!(log, ReplayLog::from_trace(&trace, &spec, false));
        assert_eq!(log.frame_digests.len(), trace.frames.len());
        assert!(log.full_frames.is_none());

        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        assert_eq!(
            verify_replay(&log, &lib, &registry).unwrap(),
            ReplayVerdict::Match
        );
    }

    #[test]
    fn embedded_frames_roundtrip() {
        let (trace, spec) = ped_trace(1.5, 7);
        let log = ReplayLog::from_trace(&trace, &spec, true);
        let parsed = ReplayLog::from_json(&log.to_json()).unwrap();
        assert_eq!(parsed.full_frames.as_ref().unwrap(), &trace.frames);

        // Digest-only log is much smaller than the embedded one.
        let slim = ReplayLog::from_trace(&trace, &spec, false);
        assert!(slim.to_json().len() < log.to_json().len() / 4);
    }

    #[test]
    fn corrupting_a_digest_is_detected_at_that_frame() {
        let (trace, spec) = ped_trace(1.5, 7);
        let mut log = ReplayLog::from_trace(&trace, &spec, false);
        let k = 42;
        let mut bytes = log.frame_digests[k].clone().into_bytes();
        bytes[0] = if bytes[0] == b'0' { b'1' } else { b'0' };
        log.frame_digests[k] = String::from_utf8(bytes).unwrap();

        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        assert_eq!(
            verify_replay(&log, &lib, &registry).unwrap(),
            ReplayVerdict::Mismatch { frame: k }
        );
    }

    #[test]
    fn edited_config_diverges_after_trigger_frame() {
        let (trace, spec) = ped_trace(1.5, 7);
        let log = ReplayLog::from_trace(&trace, &spec, false);

        // Divergence-point oracle: simulate both configs and find the first
        // differing frame directly.
        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        let template = lib.get("ped_crossing").unwrap();
        let mut edited = log.clone();
        edited.config.bindings.insert("v".to_string(), 1.8);
        let controller = registry.get(&spec.name).unwrap();
        let second =
            run_simulation(&template, &edited.config, controller.as_ref(), &spec, 0.05).unwrap();
        let expect = trace
            .frames
            .iter()
            .zip(&second.frames)
            .position(|(a, b)| frame_digest(a) != frame_digest(b))
            .expect("speeds differ, traces must diverge");

        match verify_replay(&edited, &lib, &registry).unwrap() {
            ReplayVerdict::Mismatch { frame } => {
                assert_eq!(frame, expect);
                // The pedestrian only moves after its trigger fires.
                let trigger_frame = trace
                    .frames
                    .iter()
                    .position(|f| f.others[0].triggered)
                    .unwrap();
                assert!(frame > trigger_frame);
            }
            ReplayVerdict::Match => panic!("edited config must not match"),
        }
    }

    #[test]
    fn unknown_controller_is_an_error() {
        let (trace, _) = ped_trace(1.5, 7);
        let log = ReplayLog::from_trace(&trace, &ControllerSpec::named("ghost"), false);
        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        assert!(matches!(
            verify_replay(&log, &lib, &registry),
            Err(Error::UnknownController(_))
        ));
    }

    #[test]
    fn digest_changes_when_any_field_changes() {
        let (trace, _) = ped_trace(1.5, 7);
        let frame = trace.frames[50].clone();
        let base = frame_digest(&frame);

        let mut f = frame.clone();
        f.time += 1e-9;
        assert_ne!(frame_digest(&f), base);

        let mut f = frame.clone();
        f.visibility = f64::from_bits(frame.visibility.to_bits() ^ 1);
        assert_ne!(frame_digest(&f), base);

        let mut f = frame.clone();
        f.ego.position.x = f64::from_bits(f.ego.position.x.to_bits() ^ 1);
        assert_ne!(frame_digest(&f), base);

        let mut f = frame.clone();
        f.others[0].triggered = !f.others[0].triggered;
        assert_ne!(frame_digest(&f), base);

        let mut f = frame.clone();
        f.others[0].actor_id.push('x');
        assert_ne!(frame_digest(&f), base);

        let mut f = frame.clone();
        f.others[0].speed = f64::from_bits(f.others[0].speed.to_bits() ^ 1);
        assert_ne!(frame_digest(&f), base);

        let mut f = frame.clone();
        f.others[0].heading = f64::from_bits(f.others[0].heading.to_bits() ^ 1);
        assert_ne!(frame_digest(&f), base);

        let mut f = frame.clone();
        f.others[0].route_progress = f64::from_bits(f.others[0].route_progress.to_bits() ^ 1);
        assert_ne!(frame_digest(&f), base);
    }

    #[test]
    fn replay_frames_rederives_when_not_embedded() {
        let (trace, spec) = ped_trace(1.2, 9);
        let log = ReplayLog::from_trace(&trace, &spec, false);
        let lib = ScenarioLibrary::with_builtins();
        let registry = ControllerRegistry::with_builtins();
        let frames = replay_frames(&log, &lib, &registry).unwrap();
        assert_eq!(frames, trace.frames);

        // A diverging log without embedded frames refuses to produce frames.
        let mut edited = log.clone();
        edited
            .config
            .bindings
            .insert("start_distance".to_string(), 41.0);
        assert!(matches!(
            replay_frames(&edited, &lib, &registry),
            Err(Error::FramesUnavailable(_))
        ));
    }

    mod fidelity {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]
            #[test]
            fn every_written_log_matches(
                v in 0.5..3.0f64,
                d in 5.0..30.0f64,
                start in 20.0..60.0f64,
                cloud in 0.0..100.0f64,
                seed in 0..1_000u64,
            ) {
                let lib = ScenarioLibrary::with_builtins();
                let registry = ControllerRegistry::with_builtins();
                let template = lib.get("ped_crossing").unwrap();
                let bindings: BTreeMap<String, f64> = [
                    ("v", v),
                    ("d_trigger", d),
                    ("start_distance", start),
                    ("cloudiness", cloud),
                ]
                .iter()
                .map(|(k, val)| (k.to_string(), *val))
                .collect();
                let config = instantiate(&template, &bindings, seed).unwrap();
                let spec = ControllerSpec::named("reactive_braking");
                let controller = registry.get(&spec.name).unwrap();
                let trace = run_simulation(
                    &template, &config, controller.as_ref(), &spec, 0.05,
                ).unwrap();
                let log = ReplayLog::from_trace(&trace, &spec, false);
                prop_assert_eq!(
                    verify_replay(&log, &lib, &registry).unwrap(),
                    ReplayVerdict::Match
                );
            }
        }
    }
}
