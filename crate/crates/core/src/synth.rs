//! Deterministic synthetic motions and scripts for tests, demos and the
//! offline pipeline. Each described body part oscillates on its own channels
//! around an asymmetric rest pose; motionless snippets hold the rest pose.

use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frames::{fnv1a, movable_channels};
use crate::layout::{BodyPart, DEFAULT_FPS, FOOT_CONTACT, LOCAL_VEL, POSE_DIM, ROOT_HEIGHT, ROOT_LIN_VEL, ROOT_ROT_VEL, SNIPPET_FRAMES};
use crate::motion::Motion;
use crate::sample::SentencePool;
use crate::script::{FineScript, Sentence, Snippet};

/// Sentences shipped as the default body-part-movement pool.
pub const DEFAULT_SENTENCES: [&str; 28] = [
    "the left arm waves above the head.",
    "the left hand reaches forward.",
    "the left arm swings back and forth.",
    "the left elbow bends sharply.",
    "the right arm waves above the head.",
    "the right hand reaches forward.",
    "the right arm swings back and forth.",
    "the right elbow bends sharply.",
    "the left leg steps forward.",
    "the left knee lifts up high.",
    "the left foot kicks out to the side.",
    "the left leg steps back.",
    "the right leg steps forward.",
    "the right knee lifts up high.",
    "the right foot kicks out to the side.",
    "the right leg steps back.",
    "the torso leans forward.",
    "the torso twists to the left.",
    "the upper body bends to the right.",
    "the chest rises and falls.",
    "the head nods.",
    "the head turns to the right.",
    "the head tilts back.",
    "the neck stretches to the left.",
    "the whole body turns around.",
    "the pelvis shifts to the left.",
    "the hips sway from side to side.",
    "the body crouches down.",
];

pub fn default_pool() -> SentencePool {
    SentencePool::new(DEFAULT_SENTENCES.iter().map(|s| Sentence::new(s).expect("built-in sentence")))
}

fn rest_pose(seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_7e57);
    let mut f: Vec<f32> = (0..POSE_DIM).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    f[ROOT_ROT_VEL] = 0.0;
    f[ROOT_LIN_VEL].iter_mut().for_each(|x| *x = 0.0);
    f[ROOT_HEIGHT] = 0.9;
    f[LOCAL_VEL].iter_mut().for_each(|x| *x = 0.0);
    f[FOOT_CONTACT].iter_mut().for_each(|x| *x = 1.0);
    f
}

/// Renders `fs` into a motion with exactly `10 * k` frames.
pub fn synth_motion(fs: &FineScript, seed: u64) -> Result<Motion> {
    let rest = rest_pose(seed);
    let k = fs.len();
    let mut data = Vec::with_capacity(k * SNIPPET_FRAMES * POSE_DIM);
    for (i, snippet) in fs.snippets().iter().enumerate() {
        let mut block: Vec<Vec<f32>> = (0..SNIPPET_FRAMES).map(|_| rest.clone()).collect();
        for s in snippet.sentences() {
            let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(s.text().as_bytes(), seed ^ ((i as u64) << 32)));
            for c in movable_channels(s.part()) {
                let offset = rng.random_range(-1.0f32..1.0);
                let amp = rng.random_range(0.2f32..0.8);
                let freq = rng.random_range(0.5f32..2.0);
                let phase = rng.random_range(0.0f32..core::f32::consts::TAU);
                for (t, f) in block.iter_mut().enumerate() {
                    let x = core::f32::consts::TAU * freq * t as f32 / SNIPPET_FRAMES as f32 + phase;
                    f[c] += offset + amp * libm::sinf(x);
                }
            }
        }
        block.into_iter().for_each(|f| data.extend(f));
    }
    Motion::new(DEFAULT_FPS, POSE_DIM, data)
}

/// Random script with `k` in `min_k..=max_k`. About one snippet in seven is
/// motionless; the others get one to three sentences on distinct parts.
pub fn random_script<R: Rng + ?Sized>(rng: &mut R, pool: &SentencePool, min_k: usize, max_k: usize) -> Result<FineScript> {
    if pool.is_empty() || min_k == 0 || min_k > max_k {
        return Err(Error::InvalidArgument("empty pool or bad snippet range".into()));
    }
    let k = rng.random_range(min_k..=max_k);
    let mut snippets = Vec::with_capacity(k);
    for _ in 0..k {
        if rng.random_range(0..7) == 0 {
            snippets.push(Snippet::Motionless);
            continue;
        }
        let want = rng.random_range(1..=3usize);
        let mut parts: Vec<BodyPart> = Vec::new();
        let mut sens = Vec::new();
        for _ in 0..want {
            let options: Vec<&Sentence> = pool.sentences().iter().filter(|s| !parts.contains(&s.part())).collect();
            if let Some(s) = options.choose(rng) {
                parts.push(s.part());
                sens.push((*s).clone());
            }
        }
        snippets.push(Snippet::Sentences(sens));
    }
    FineScript::new(snippets)
}
