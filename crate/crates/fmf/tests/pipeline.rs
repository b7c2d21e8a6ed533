mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use fmf::config::{Config, GeneratorBackend};
use fmf::io;
use fmf::pipeline::{self, Context};
use fmf::record::{Annotation, CorpusRecord, EditInfo, EditTriplet, Split};
use fmf::FmfError;
use fmf_core::compose::{plan_chain, replay_chain};
use fmf_core::qc::Check;
use fmf_core::sample::OpWeights;
use fmf_core::EditKind;

fn cfg(seed: u64) -> Config {
    Config {
        seed,
        ..Config::default()
    }
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    common::full_run(a.path(), cfg(11), 60);
    common::full_run(b.path(), cfg(11), 60);
    let (ta, tb) = (common::tree(a.path()), common::tree(b.path()));
    assert!(ta.len() > 100);
    assert_eq!(ta.len(), tb.len());
    for (x, y) in ta.iter().zip(&tb) {
        assert_eq!(x.0, y.0);
        assert!(x.1 == y.1, "{} differs", x.0);
    }
}

#[test]
fn different_seed_different_edits() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = common::full_run(a.path(), cfg(1), 20);
    let rb = common::full_run(b.path(), cfg(2), 20);
    assert_ne!(std::fs::read(ra.candidates).unwrap(), std::fs::read(rb.candidates).unwrap());
}

#[test]
fn oracle_pad_start_passes_padding_check() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::synth(dir.path(), 40, 3, 2, 6);
    let mut c = cfg(3);
    c.weights = OpWeights::only(&[EditKind::PadStart]);
    let ctx = Context::new(c).unwrap();
    let cands = dir.path().join("cands.jsonl");
    let (ts, _) = pipeline::gen::generate(&ctx, &corpus, &cands).unwrap();
    assert_eq!(ts.len(), 120);
    let rep = pipeline::filter::filter_file(&ctx.filter, &cands, &dir.path().join("ok.jsonl"), None, None).unwrap();
    assert_eq!(rep.accepted, rep.total);
    assert_eq!(rep.rejected_by(Check::Static), 0);
}

#[test]
fn full_script_with_insertions_only_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::synth(dir.path(), 3, 5, 20, 20);
    let mut c = cfg(5);
    c.weights = OpWeights::only(&[EditKind::PadMiddle, EditKind::RepeatEnd]);
    let ctx = Context::new(c).unwrap();
    let (ts, rep) = pipeline::gen::generate(&ctx, &corpus, &dir.path().join("c.jsonl")).unwrap();
    assert!(ts.is_empty());
    assert_eq!(rep.skipped.len(), 9);
    assert!(rep.skipped.iter().all(|s| s.reason.contains("no valid edit")), "{:?}", rep.skipped[0]);
}

#[test]
fn unknown_split_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::synth(dir.path(), 2, 0, 2, 3);
    let mut recs: Vec<CorpusRecord> = io::read_jsonl(&corpus).unwrap();
    recs[1].split = "holdout".into();
    io::write_jsonl(&corpus, &recs).unwrap();
    let err = pipeline::gen::generate(&Context::new(cfg(0)).unwrap(), &corpus, &dir.path().join("c.jsonl")).unwrap_err();
    assert!(matches!(err, FmfError::UnknownSplitId(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unreachable_generator_counts_backend_failures() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::synth(dir.path(), 2, 0, 2, 3);
    let mut c = cfg(0);
    c.generator = GeneratorBackend::Http;
    c.generator_url = Some("http://127.0.0.1:9/generate".into());
    c.generator_timeout = Duration::from_millis(300);
    let (ts, rep) = pipeline::gen::generate(&Context::new(c).unwrap(), &corpus, &dir.path().join("c.jsonl")).unwrap();
    assert!(ts.is_empty());
    assert_eq!(rep.generator_failures, 6);
}

#[test]
fn compose_matches_brute_force_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::synth(dir.path(), 30, 8, 2, 5);
    let mut c = cfg(8);
    // direct plans only, so each record's triplets share its source
    c.weights = OpWeights::only(&[EditKind::PadMiddle, EditKind::RepeatStart, EditKind::PadEnd, EditKind::SpatialAdd]);
    c.chain_lengths = vec![2];
    c.chain_cap = 100;
    let ctx = Context::new(c).unwrap();
    let cands = dir.path().join("cands.jsonl");
    pipeline::gen::generate(&ctx, &corpus, &cands).unwrap();
    let ok = dir.path().join("ok.jsonl");
    pipeline::filter::filter_file(&ctx.filter, &cands, &ok, None, None).unwrap();
    let (complex, rep) = pipeline::compose::compose_file(&ctx, &ok, &dir.path().join("cx.jsonl")).unwrap();
    assert_eq!(rep.replay_mismatches, 0);

    let accepted: Vec<EditTriplet> = io::read_jsonl(&ok).unwrap();
    let groups = pipeline::compose::group_by_source(&accepted);
    let mut expected = BTreeSet::new();
    let mut three = 0;
    for g in groups.values() {
        three += usize::from(g.len() == 3);
        for a in g {
            for b in g {
                if a.id == b.id {
                    continue;
                }
                let edits = [a.atomic_edit().unwrap().clone(), b.atomic_edit().unwrap().clone()];
                if plan_chain(&a.source_script, &edits).is_ok() {
                    expected.insert(vec![a.id.clone(), b.id.clone()]);
                }
            }
        }
    }
    assert!(three > 5);
    let got: BTreeSet<Vec<String>> = complex
        .iter()
        .map(|t| match &t.edit {
            EditInfo::Complex(c) => c.members.clone(),
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn single_triplet_groups_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::synth(dir.path(), 5, 2, 2, 4);
    let mut c = cfg(2);
    c.edits_per_record = 1;
    let ctx = Context::new(c).unwrap();
    let cands = dir.path().join("c.jsonl");
    pipeline::gen::generate(&ctx, &corpus, &cands).unwrap();
    let ok = dir.path().join("ok.jsonl");
    pipeline::filter::filter_file(&ctx.filter, &cands, &ok, None, None).unwrap();
    let (cx, rep) = pipeline::compose::compose_file(&ctx, &ok, &dir.path().join("x.jsonl")).unwrap();
    assert!(cx.is_empty());
    assert_eq!(rep.insufficient_siblings, rep.groups);
}

#[test]
fn complex_triplets_replay_from_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = cfg(21);
    c.chain_lengths = vec![2, 3, 4];
    c.chain_cap = 3;
    c.edits_per_record = 4;
    let run = common::full_run(dir.path(), c, 30);
    let base = io::dir_of(&run.complex);
    let complex: Vec<EditTriplet> = io::read_jsonl(&run.complex).unwrap();
    assert!(complex.len() > 10);
    let mut lengths = BTreeSet::new();
    for t in &complex {
        let EditInfo::Complex(info) = &t.edit else { unreachable!() };
        lengths.insert(info.cot.len());
        let load = |r: &str| io::read_motion(&io::resolve_ref(&base, r)).unwrap();
        let first = load(&t.source_motion);
        let states: Vec<_> = info.cot.iter().map(|s| load(&s.motion)).collect();
        let steps: Vec<_> = info.steps().cloned().collect();
        let replayed = replay_chain(&first, &steps, &states[0]).unwrap();
        assert_eq!(&replayed[1..], &states[..], "{}", t.id);
        assert_eq!(info.cot.last().unwrap().motion, t.target_motion);
    }
    assert!(lengths.len() >= 2, "{lengths:?}");
}

#[test]
fn export_is_closed_and_leak_free() {
    let dir = tempfile::tempdir().unwrap();
    let run = common::full_run(dir.path(), cfg(4), 40);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(run.export.join("manifest.json")).unwrap()).unwrap();
    for f in manifest["files"].as_array().unwrap() {
        let p = run.export.join(f["path"].as_str().unwrap());
        let (bytes, sha) = pipeline::export::sha256_file(&p).unwrap();
        assert_eq!(bytes, f["bytes"].as_u64().unwrap());
        assert_eq!(sha, f["sha256"].as_str().unwrap());
    }
    let mut splits_of = std::collections::BTreeMap::new();
    for split in Split::ALL {
        let file = run.export.join(split.name()).join("triplets.jsonl");
        let base = io::dir_of(&file);
        for t in io::read_jsonl::<EditTriplet>(&file).unwrap() {
            assert_eq!(t.split, split);
            for r in t.motion_refs() {
                assert!(io::resolve_ref(&base, r).exists(), "{r}");
            }
            for id in [&t.source_id, &t.target_id] {
                assert_eq!(*splits_of.entry(id.clone()).or_insert(split), split);
            }
        }
    }
    let stats: serde_json::Value = serde_json::from_slice(&std::fs::read(run.export.join("stats.json")).unwrap()).unwrap();
    assert!(stats["atomic_basic"]["avg_words"].as_f64().unwrap() > 4.0);

    // re-export is byte-identical
    let again = dir.path().join("again");
    pipeline::export::export(&[run.filtered.clone(), run.complex.clone()], &again, pipeline::export::ExportOptions { accept_pending: true }).unwrap();
    assert_eq!(common::tree(&run.export), common::tree(&again));
}

#[test]
fn export_rejects_split_leakage_and_skips_unreviewed() {
    let dir = tempfile::tempdir().unwrap();
    let run = common::full_run(dir.path(), cfg(6), 10);
    let mut ts: Vec<EditTriplet> = io::read_jsonl(&run.filtered).unwrap();
    let none = pipeline::export::export(std::slice::from_ref(&run.filtered), &dir.path().join("e0"), Default::default()).unwrap().0;
    assert_eq!(none.excluded, ts.len());

    let direct = ts.iter().position(|t| t.provenance.mode == "direct").unwrap();
    let mut twin = ts[direct].clone();
    twin.id.push_str("-twin");
    twin.split = if twin.split == Split::Train { Split::Test } else { Split::Train };
    ts.push(twin);
    for t in &mut ts {
        t.annotation = Annotation::Accepted;
    }
    let leaky = run.filtered.with_file_name("leaky.jsonl");
    io::write_jsonl(&leaky, &ts).unwrap();
    let err = pipeline::export::export(&[leaky], &dir.path().join("e1"), Default::default()).unwrap_err();
    assert!(matches!(err, FmfError::Validation(ref m) if m.contains("both")), "{err}");
}

#[test]
fn revised_text_replaces_the_basic_instruction() {
    let dir = tempfile::tempdir().unwrap();
    let run = common::full_run(dir.path(), cfg(9), 5);
    let mut ts: Vec<EditTriplet> = io::read_jsonl(&run.filtered).unwrap();
    ts.truncate(2);
    ts[0].annotation = Annotation::Revised { text: "Lift the arm higher.".into() };
    ts[1].annotation = Annotation::Rejected;
    let p = run.filtered.with_file_name("reviewed.jsonl");
    io::write_jsonl(&p, &ts).unwrap();
    let out = dir.path().join("e");
    let (m, _) = pipeline::export::export(&[p], &out, Default::default()).unwrap();
    assert_eq!(m.triplets.values().sum::<usize>(), 1);
    let got: Vec<EditTriplet> = io::read_jsonl(&out.join(ts[0].split.name()).join("triplets.jsonl")).unwrap();
    assert_eq!(got[0].instruction_basic, "Lift the arm higher.");
}

#[test]
fn rewrite_adds_distinct_paraphrases() {
    let dir = tempfile::tempdir().unwrap();
    let run = common::full_run(dir.path(), cfg(12), 10);
    let ctx = Context::new(cfg(12)).unwrap();
    let out = dir.path().join("rw").join("atomic.jsonl");
    let ts = pipeline::rewrite::rewrite_file(&ctx, &run.filtered, &out).unwrap();
    for t in &ts {
        let set: BTreeSet<&String> = t.instructions_rewritten.iter().collect();
        assert_eq!(set.len(), 3, "{}", t.id);
        assert!(!set.contains(&t.instruction_basic));
        for r in t.motion_refs() {
            assert!(io::resolve_ref(&io::dir_of(&out), r).exists());
        }
    }
    let cx = dir.path().join("rw").join("complex.jsonl");
    let cts = pipeline::rewrite::rewrite_file(&ctx, &run.complex, &cx).unwrap();
    assert!(cts.iter().all(|t| t.instructions_rewritten.iter().all(|r| r.starts_with("First, "))));
}
