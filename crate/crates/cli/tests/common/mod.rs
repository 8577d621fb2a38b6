//! Shared generators and reporting helpers for the acceptance suite.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lamof_core::math::{self, Mat3};
use lamof_core::{matrix_to_rot6d, MotionSequence, Representation};

/// One criterion's pass/fail bookkeeping: collects failures, prints exactly
/// one line, and panics after printing if anything failed.
pub struct Criterion {
    number: u32,
    name: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    pub fn new(number: u32, name: &'static str) -> Self {
        Criterion {
            number,
            name,
            failures: Vec::new(),
        }
    }

    pub fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(message());
        }
    }

    pub fn finish(self) {
        if self.failures.is_empty() {
            println!("[acceptance] criterion {:02} ({}): PASS", self.number, self.name);
        } else {
            println!("[acceptance] criterion {:02} ({}): FAIL", self.number, self.name);
            for f in &self.failures {
                println!("    - {f}");
            }
            panic!(
                "criterion {:02} ({}) failed with {} issue(s)",
                self.number,
                self.name,
                self.failures.len()
            );
        }
    }
}

/// Constant-velocity phase specs: (velocity vector, length in frames).
pub type PhaseSpec = (Vec<f64>, usize);

pub fn random_phases(
    rng: &mut ChaCha8Rng,
    phase_count: std::ops::RangeInclusive<usize>,
    phase_len: std::ops::RangeInclusive<usize>,
    dim: usize,
    scale: f64,
) -> Vec<PhaseSpec> {
    let phases = rng.random_range(phase_count);
    (0..phases)
        .map(|_| {
            let v: Vec<f64> = (0..dim)
                .map(|_| (rng.random::<f64>() - 0.5) * 2.0 * scale)
                .collect();
            (v, rng.random_range(phase_len.clone()))
        })
        .collect()
}

/// Build a Cartesian motion whose velocity-field row at every frame of a
/// phase equals the phase velocity exactly (the replicated final row folds
/// into the last phase).
pub fn phase_motion(phases: &[PhaseSpec], joints: usize) -> MotionSequence {
    let dim = 3 * joints;
    let total: usize = phases.iter().map(|(_, l)| l).sum();
    let mut steps = Vec::with_capacity(total);
    for (v, len) in phases {
        for _ in 0..*len {
            steps.push(v);
        }
    }
    let mut data = vec![0.0; dim];
    let mut current = vec![0.0; dim];
    for v in steps.iter().take(total - 1) {
        for (c, dv) in current.iter_mut().zip(*v) {
            *c += dv;
        }
        data.extend_from_slice(&current);
    }
    MotionSequence::new(Representation::Cartesian3D, joints, 30.0, data).unwrap()
}

/// Like [`phase_motion`] but each velocity step carries Gaussian jitter.
pub fn noisy_phase_motion(
    phases: &[PhaseSpec],
    joints: usize,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> MotionSequence {
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0, sigma).unwrap();
    let dim = 3 * joints;
    let total: usize = phases.iter().map(|(_, l)| l).sum();
    let mut data = vec![0.0; dim];
    let mut current = vec![0.0; dim];
    let mut emitted = 1usize;
    for (v, len) in phases {
        for _ in 0..*len {
            if emitted >= total {
                break;
            }
            for (c, dv) in current.iter_mut().zip(v) {
                *c += dv + normal.sample(rng);
            }
            data.extend_from_slice(&current);
            emitted += 1;
        }
    }
    MotionSequence::new(Representation::Cartesian3D, joints, 30.0, data).unwrap()
}

/// Random rotation from three axis angles; independent of the 6D code path.
pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let rot_x = |a: f64| -> Mat3 {
        let (s, c) = a.sin_cos();
        [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]
    };
    let rot_y = |a: f64| -> Mat3 {
        let (s, c) = a.sin_cos();
        [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
    };
    let rot_z = |a: f64| -> Mat3 {
        let (s, c) = a.sin_cos();
        [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
    };
    let tau = std::f64::consts::TAU;
    let m = math::mat_mul(&rot_z(rng.random::<f64>() * tau), &rot_y(rng.random::<f64>() * tau));
    math::mat_mul(&m, &rot_x(rng.random::<f64>() * tau))
}

/// Smooth random-walk 6D clip with root translation.
pub fn random_clip(len: usize, joints: usize, fps: f64, rng: &mut ChaCha8Rng) -> MotionSequence {
    let mut rotations: Vec<Mat3> = (0..joints).map(|_| random_rotation(rng)).collect();
    let mut root = [0.0f64, 0.9, 0.0];
    let mut data = Vec::with_capacity(len * (6 * joints + 3));
    for _ in 0..len {
        for rot in rotations.iter_mut() {
            let angle = (rng.random::<f64>() - 0.5) * 0.2;
            let (s, c) = angle.sin_cos();
            let step: Mat3 = match rng.random_range(0..3) {
                0 => [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]],
                1 => [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
                _ => [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
            };
            *rot = math::mat_mul(rot, &step);
            data.extend_from_slice(&matrix_to_rot6d(rot).unwrap().0);
        }
        data.extend_from_slice(&root);
        root[0] += (rng.random::<f64>() - 0.5) * 0.06;
        root[1] += (rng.random::<f64>() - 0.5) * 0.01;
        root[2] += (rng.random::<f64>() - 0.5) * 0.06;
    }
    MotionSequence::new(Representation::Rot6D, joints, fps, data).unwrap()
}

/// Random values on the f32 grid so binary round trips are bit-exact.
pub fn f32_grid(rng: &mut ChaCha8Rng, n: usize, scale: f32) -> Vec<f64> {
    (0..n)
        .map(|_| ((rng.random::<f32>() - 0.5) * 2.0 * scale) as f64)
        .collect()
}

/// Seeded generator shorthand.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
