//! Simulated 360° planar LiDAR and the historical-scan re-projection.
//!
//! A historical scan is turned into world-frame hit points using the pose it
//! was captured at, and those points are then measured from the current pose.
//! Output index `i` always refers to the point hit by historical beam `i`; the
//! bearings are not re-binned. For a static scene the re-projected ranges
//! therefore coincide with what a fresh scan of the same points would read,
//! which cancels the ego-motion and leaves only independent motion visible.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::geometry::{frame_to_world, ray_circle_hit, rotate, world_to_frame, Circle, Pose2, Vec2};

/// Beams per sweep.
pub const N_BEAMS: usize = 1800;
/// Scans per observation stack.
pub const STACK_DEPTH: usize = 6;
pub const DEFAULT_MAX_RANGE: f64 = 10.0;
/// Lower clamp applied to every reported range.
pub const MIN_RANGE: f64 = 1e-3;

/// `(cos, sin)` of every beam angle `2π·i/N` in the sensor frame.
fn beam_table() -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..N_BEAMS)
            .map(|i| {
                let (s, c) = beam_angle(i).sin_cos();
                (c, s)
            })
            .collect()
    })
}

/// Bearing of beam `i` in the sensor frame.
#[inline]
pub fn beam_angle(i: usize) -> f64 {
    TAU * i as f64 / N_BEAMS as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LidarScan {
    ranges: Vec<f64>,
    capture_pose: Pose2,
    max_range: f64,
}

impl LidarScan {
    /// Builds a scan from raw ranges, clamping each into `[MIN_RANGE, max_range]`.
    ///
    /// # Panics
    /// If `ranges.len() != N_BEAMS`.
    pub fn from_ranges(ranges: Vec<f64>, capture_pose: Pose2, max_range: f64) -> Self {
        assert_eq!(ranges.len(), N_BEAMS, "a scan has exactly {N_BEAMS} beams");
        let ranges = ranges.into_iter().map(|r| clamp_range(r, max_range)).collect();
        Self {
            ranges,
            capture_pose,
            max_range,
        }
    }

    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    pub fn capture_pose(&self) -> &Pose2 {
        &self.capture_pose
    }

    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    /// Smallest range in the sweep.
    pub fn min_range(&self) -> f64 {
        self.ranges.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[inline]
fn clamp_range(r: f64, max_range: f64) -> f64 {
    if r.is_nan() {
        max_range
    } else {
        r.clamp(MIN_RANGE, max_range)
    }
}

/// Casts all beams from `ego` against `circles`.
///
/// Each circle only touches the beams inside its angular shadow, so the cost
/// is proportional to the number of beams actually blocked rather than
/// `N_BEAMS × circles`.
pub fn cast_scan(ego: &Pose2, circles: &[Circle], max_range: f64) -> LidarScan {
    let mut ranges = vec![max_range; N_BEAMS];
    let table = beam_table();
    let (s, c) = ego.heading().sin_cos();
    let origin = ego.position;
    let beam_dir = |i: usize| {
        let (bc, bs) = table[i];
        Vec2::new(c * bc - s * bs, s * bc + c * bs)
    };
    let step = TAU / N_BEAMS as f64;

    for circle in circles {
        let offset = circle.center - origin;
        let dist = offset.norm();
        let r = circle.radius();
        if dist - r > max_range {
            continue;
        }
        if dist <= r {
            // Sensor inside the body: every beam is blocked at once.
            ranges.iter_mut().for_each(|x| *x = 0.0);
            continue;
        }
        let half_width = (r / dist).asin();
        let centre_bearing = offset.y.atan2(offset.x) - ego.heading();
        // One extra beam of slack on each side; the exact test decides.
        let lo = ((centre_bearing - half_width) / step).floor() as i64 - 1;
        let hi = ((centre_bearing + half_width) / step).ceil() as i64 + 1;
        for k in lo..=hi {
            let i = k.rem_euclid(N_BEAMS as i64) as usize;
            if let Some(t) = ray_circle_hit(origin, beam_dir(i), circle, max_range) {
                if t < ranges[i] {
                    ranges[i] = t;
                }
            }
        }
    }
    LidarScan::from_ranges(ranges, *ego, max_range)
}

/// Hit points of `scan` expressed in its own capture frame.
pub fn scan_points_local(scan: &LidarScan) -> Vec<Vec2> {
    beam_table()
        .iter()
        .zip(&scan.ranges)
        .map(|(&(c, s), &r)| Vec2::new(r * c, r * s))
        .collect()
}

/// Hit points of `scan` in the world frame.
pub fn scan_points_world(scan: &LidarScan) -> Vec<Vec2> {
    scan_points_local(scan)
        .into_iter()
        .map(|p| frame_to_world(p, &scan.capture_pose))
        .collect()
}

/// Historical hit points of `old` expressed in the frame of `current_pose`,
/// one per beam of the original sweep.
pub fn reproject_points(old: &LidarScan, current_pose: &Pose2) -> Vec<Vec2> {
    scan_points_world(old)
        .into_iter()
        .map(|p| world_to_frame(p, current_pose))
        .collect()
}

/// Distance from `current_pose` to every historical hit point of `old`.
///
/// Rotation into the current frame does not change a norm, so only the
/// translation part of the inverse transform affects the result.
pub fn reproject_scan(old: &LidarScan, current_pose: &Pose2) -> Vec<f64> {
    if *current_pose == old.capture_pose {
        return old.ranges.clone();
    }
    let heading = old.capture_pose.heading();
    // Capture position seen from the current pose, in world axes.
    let shift = old.capture_pose.position - current_pose.position;
    beam_table()
        .iter()
        .zip(&old.ranges)
        .map(|(&(c, s), &r)| {
            let local = rotate(Vec2::new(r * c, r * s), heading);
            clamp_range((shift + local).norm(), old.max_range)
        })
        .collect()
}

/// Ring buffer of the last [`STACK_DEPTH`] scans, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanStack {
    scans: VecDeque<LidarScan>,
}

impl ScanStack {
    /// Starts a stack padded with copies of `first`.
    pub fn warm(first: LidarScan) -> Self {
        let scans = std::iter::repeat_n(first, STACK_DEPTH).collect();
        Self { scans }
    }

    pub fn push(&mut self, scan: LidarScan) {
        if self.scans.len() == STACK_DEPTH {
            self.scans.pop_front();
        }
        self.scans.push_back(scan);
    }

    pub fn newest(&self) -> &LidarScan {
        self.scans.back().expect("stack is never empty")
    }

    pub fn scans(&self) -> impl Iterator<Item = &LidarScan> {
        self.scans.iter()
    }

    pub fn len(&self) -> usize {
        self.scans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scans.is_empty()
    }
}

/// `STACK_DEPTH × N_BEAMS` ranges in the current ego frame, row-major,
/// oldest row first. The last row is the newest raw scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedStack {
    values: Vec<f64>,
}

impl TransformedStack {
    pub fn rows(&self) -> usize {
        self.values.len() / N_BEAMS
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * N_BEAMS..(k + 1) * N_BEAMS]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

pub fn build_observation(stack: &ScanStack, current_pose: &Pose2) -> TransformedStack {
    let depth = stack.len();
    let mut values = Vec::with_capacity(depth * N_BEAMS);
    for (k, scan) in stack.scans().enumerate() {
        if k + 1 == depth {
            values.extend_from_slice(scan.ranges());
        } else {
            values.extend(reproject_scan(scan, current_pose));
        }
    }
    TransformedStack { values }
}
