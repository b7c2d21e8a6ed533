use fmf_core::compose::replay_step;
use fmf_core::qc::Filter;
use fmf_core::sample::{sample_plan, OpWeights, Plan};
use fmf_core::synth::{default_pool, random_script, synth_motion};
use fmf_core::EditKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[test]
fn oracle_pairs_pass_their_checks() {
    let pool = default_pool();
    let filter = Filter::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut per_kind: BTreeMap<EditKind, (usize, usize)> = BTreeMap::new();
    for i in 0..600u64 {
        let fs = random_script(&mut rng, &pool, 2, 6).unwrap();
        let src = synth_motion(&fs, i).unwrap();
        let plan = sample_plan(&fs, &OpWeights::default(), &pool, &mut rng).unwrap();
        let fwd = replay_step(&src, plan.forward(), None).unwrap();
        let (a, b) = match plan {
            Plan::Direct { .. } => (&src, &fwd),
            Plan::Swapped { .. } => (&fwd, &src),
        };
        let v = filter.check(a, b, &plan.edit());
        let slot = per_kind.entry(plan.edit().kind()).or_default();
        slot.0 += 1;
        if v.accepted {
            slot.1 += 1;
        } else if slot.0 - slot.1 <= 2 {
            eprintln!("{:?} {:?}", plan.edit(), v.failed_checks);
        }
    }
    for (k, (n, ok)) in &per_kind {
        eprintln!("{k}: {ok}/{n}");
    }
    assert!(per_kind.values().all(|(n, ok)| n == ok));
}
