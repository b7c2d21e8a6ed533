//! Instruction paraphrasing. The offline default draws from per-operation
//! template pools and refills the slots recovered from the basic text, so
//! every time value and sentence survives the rewrite.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::edit::EditKind;
use crate::error::{Error, Result};
use crate::instruction::{extract, fill, TemplateSet};

/// Produces paraphrases of a basic instruction.
pub trait Rewriter {
    fn rewrite(&self, basic: &str, kind: EditKind, count: usize, seed: u64) -> Result<Vec<String>>;
}

impl<R: Rewriter + ?Sized> Rewriter for &R {
    fn rewrite(&self, basic: &str, kind: EditKind, count: usize, seed: u64) -> Result<Vec<String>> {
        (**self).rewrite(basic, kind, count, seed)
    }
}

const OPENERS: [&str; 10] = [
    "",
    "Please ",
    "Now ",
    "Next, ",
    "I want you to ",
    "Could you ",
    "Go ahead and ",
    "Try to ",
    "Make sure to ",
    "You should ",
];

fn cores(kind: EditKind) -> [&'static str; 10] {
    match kind {
        EditKind::PadStart => [
            "stay still for {dur}s at the start of the motion.",
            "hold a still pose for {dur}s before the motion begins.",
            "pause for {dur}s at the very beginning.",
            "remain motionless for the first {dur}s, then perform the motion.",
            "keep still for {dur}s before starting.",
            "add a {dur}s pause at the start of the motion.",
            "freeze for {dur}s at the beginning of the motion.",
            "wait {dur}s without moving before the motion starts.",
            "begin with a {dur}s still pose.",
            "insert {dur}s of stillness at the start.",
        ],
        EditKind::PadMiddle => [
            "stay still for {dur}s after {start}s of the motion.",
            "pause for {dur}s once {start}s of the motion have passed.",
            "hold still for {dur}s at the {start}s mark.",
            "after {start}s, freeze for {dur}s before continuing.",
            "insert a {dur}s pause after the first {start}s.",
            "remain motionless for {dur}s starting at {start}s.",
            "keep the pose for {dur}s after {start}s of the motion.",
            "stop moving for {dur}s at {start}s, then carry on.",
            "add a {dur}s still segment after {start}s.",
            "take a {dur}s break from moving at {start}s.",
        ],
        EditKind::PadEnd => [
            "stay still for {dur}s at the end of the motion.",
            "hold the final pose for {dur}s.",
            "pause for {dur}s after the motion finishes.",
            "remain motionless for {dur}s at the end.",
            "finish with a {dur}s still pose.",
            "add a {dur}s pause at the end of the motion.",
            "freeze for {dur}s once the motion is done.",
            "keep still for the last {dur}s.",
            "end by not moving for {dur}s.",
            "append {dur}s of stillness to the end.",
        ],
        EditKind::RepeatStart => [
            "repeat the first {dur}s of motion at the start.",
            "do the opening {dur}s of the motion twice.",
            "perform the first {dur}s again before continuing.",
            "replay the initial {dur}s of motion right away.",
            "duplicate the first {dur}s of the motion.",
            "start by doing the first {dur}s of motion two times.",
            "go through the first {dur}s of motion once more at the beginning.",
            "redo the beginning {dur}s of the motion.",
            "play the first {dur}s of movement twice in a row.",
            "repeat the opening {dur}s of movement.",
        ],
        EditKind::RepeatMiddle => [
            "repeat the {start}s-{end}s of motion after {end} of the motion.",
            "do the part from {start}s to {end}s again right after {end}s.",
            "replay the {start}s-{end}s segment once it ends at {end}s.",
            "perform the motion between {start}s and {end}s twice.",
            "after {end}s, repeat what happens from {start}s to {end}s.",
            "duplicate the {start}s-{end}s section of the motion.",
            "go through the {start}s to {end}s movement one more time.",
            "redo the segment from {start}s to {end}s after it finishes.",
            "play the {start}s-{end}s part twice in a row.",
            "repeat the movement between {start}s and {end}s.",
        ],
        EditKind::RepeatEnd => [
            "repeat the last {dur}s of motion at the end.",
            "do the final {dur}s of the motion twice.",
            "replay the closing {dur}s of motion once more.",
            "perform the last {dur}s again after finishing.",
            "duplicate the final {dur}s of the motion.",
            "end by repeating the last {dur}s of movement.",
            "go through the final {dur}s of motion one more time.",
            "redo the ending {dur}s of the motion.",
            "play the last {dur}s of movement twice in a row.",
            "repeat the closing {dur}s of movement.",
        ],
        EditKind::DeleteStart => [
            "delete the first {dur}s of motion.",
            "remove the opening {dur}s of the motion.",
            "cut the first {dur}s.",
            "skip the first {dur}s of the motion.",
            "drop the initial {dur}s of movement.",
            "trim {dur}s from the start of the motion.",
            "get rid of the first {dur}s of motion.",
            "start the motion {dur}s later by removing its beginning.",
            "erase the beginning {dur}s of the motion.",
            "leave out the first {dur}s.",
        ],
        EditKind::DeleteMiddle => [
            "delete {start}-{end} of motion.",
            "remove the motion between {start}s and {end}s.",
            "cut the segment from {start}s to {end}s.",
            "skip the part from {start}s to {end}s.",
            "drop the {start}s-{end}s section of the motion.",
            "trim out the movement between {start}s and {end}s.",
            "get rid of the motion from {start}s to {end}s.",
            "erase what happens between {start}s and {end}s.",
            "leave out the {start}s-{end}s part.",
            "take out the motion from {start}s until {end}s.",
        ],
        EditKind::DeleteEnd => [
            "delete the last {dur}s of motion.",
            "remove the final {dur}s of the motion.",
            "cut the last {dur}s.",
            "skip the closing {dur}s of the motion.",
            "drop the final {dur}s of movement.",
            "trim {dur}s from the end of the motion.",
            "get rid of the last {dur}s of motion.",
            "stop the motion {dur}s earlier.",
            "erase the ending {dur}s of the motion.",
            "leave out the last {dur}s.",
        ],
        EditKind::SpatialAdd => [
            "add the body part movement: {sentence} in {start}-{snippet_end} of the motion.",
            "during {start}-{snippet_end}s, also make sure {sentence}.",
            "between {start}s and {snippet_end}s, add this: {sentence}.",
            "include the movement where {sentence}, from {start}s to {snippet_end}s.",
            "while moving in {start}-{snippet_end}s, add: {sentence}.",
            "in the {start}s-{snippet_end}s window, {sentence} as well.",
            "add a movement in which {sentence}, in {start}-{snippet_end} of the motion.",
            "from {start}s to {snippet_end}s, make it so that {sentence}.",
            "at {start}-{snippet_end}s, add the following movement: {sentence}.",
            "extend the motion in {start}-{snippet_end}s so that {sentence}.",
        ],
        EditKind::SpatialDelete => [
            "delete the movement of {part} in {start}-{snippet_end} of the motion.",
            "keep the {part} still between {start}s and {snippet_end}s.",
            "remove any {part} movement from {start}s to {snippet_end}s.",
            "do not move the {part} during {start}-{snippet_end}s.",
            "stop the {part} from moving in {start}-{snippet_end} of the motion.",
            "cancel the {part} motion between {start}s and {snippet_end}s.",
            "hold the {part} steady from {start}s to {snippet_end}s.",
            "leave the {part} out of the movement in {start}-{snippet_end}s.",
            "erase the {part} movement during {start}s-{snippet_end}s.",
            "freeze the {part} in {start}-{snippet_end} of the motion.",
        ],
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Pool of `openers x cores` paraphrase templates for one kind (100 each).
pub fn paraphrase_pool(kind: EditKind) -> Vec<String> {
    let mut out = Vec::with_capacity(100);
    for opener in OPENERS {
        for core in cores(kind) {
            let t = alloc::format!("{opener}{core}");
            out.push(capitalize(&t));
        }
    }
    out
}

/// Offline rewriter backed by [`paraphrase_pool`].
#[derive(Debug, Clone, Default)]
pub struct TemplatePoolRewriter {
    templates: TemplateSet,
}

impl TemplatePoolRewriter {
    /// `templates` must be the set the basic instructions were rendered with.
    pub fn new(templates: TemplateSet) -> Self {
        TemplatePoolRewriter { templates }
    }
}

impl Rewriter for TemplatePoolRewriter {
    fn rewrite(&self, basic: &str, kind: EditKind, count: usize, seed: u64) -> Result<Vec<String>> {
        if basic.trim().is_empty() {
            return Err(Error::InvalidArgument("empty instruction".into()));
        }
        if count == 0 {
            return Ok(Vec::new());
        }
        let slots = extract(self.templates.get(kind), basic).ok_or_else(|| {
            Error::InvalidArgument(alloc::format!("instruction does not match the {kind} template: {basic:?}"))
        })?;
        // a paraphrase never repeats its input
        let pool: Vec<String> = paraphrase_pool(kind)
            .iter()
            .map(|t| fill(t, &slots))
            .filter(|s| s != basic.trim())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picks = index::sample(&mut rng, pool.len(), count.min(pool.len()));
        Ok(picks.into_iter().map(|i| pool[i].clone()).collect())
    }
}

/// Connectors used to join the steps of a complex instruction.
pub const CONNECTORS: [&str; 4] = ["First, ", "then ", "after that, ", "finally, "];

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Joins step instructions in their original order with sequencing words.
pub fn connect_steps<S: AsRef<str>>(steps: &[S]) -> String {
    let n = steps.len();
    let mut out = String::new();
    for (i, s) in steps.iter().enumerate() {
        let s = s.as_ref().trim();
        let body = s.strip_suffix('.').unwrap_or(s);
        let conn = match i {
            0 => CONNECTORS[0],
            _ if i + 1 == n => CONNECTORS[3],
            _ if i % 2 == 1 => CONNECTORS[1],
            _ => CONNECTORS[2],
        };
        if i == 0 {
            out.push_str(conn);
        } else {
            out.push_str(", ");
            out.push_str(conn);
        }
        out.push_str(&lower_first(body));
    }
    if n > 0 {
        out.push('.');
    }
    out
}

/// Rewrites each step then connects them, keeping the order.
pub fn rewrite_complex<R: Rewriter + ?Sized>(
    rewriter: &R,
    steps: &[(String, EditKind)],
    seed: u64,
) -> Result<String> {
    let mut parts = Vec::with_capacity(steps.len());
    for (i, (basic, kind)) in steps.iter().enumerate() {
        let mut v = rewriter.rewrite(basic, *kind, 1, seed.wrapping_add(i as u64))?;
        parts.push(v.pop().unwrap_or_else(|| basic.to_string()));
    }
    Ok(connect_steps(&parts))
}
