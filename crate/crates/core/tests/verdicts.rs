use gnc_core::catalog::*;
use gnc_core::certify::verify;
use gnc_core::decide::{decide, rules, DecideConfig, Tag};
use gnc_core::processes::{dephase_embed, flag_convexify, ChannelChoi, Process};

fn run(p: Process) -> gnc_core::decide::Verdict {
    let v = decide(&p, &DecideConfig::default()).unwrap();
    if let Some(c) = &v.certificate {
        if v.certificate_note.is_none() {
            assert!(verify(&p, c, 1e-7).unwrap().passed());
        }
    }
    v
}

#[test]
fn bb84_is_pure_dependent() {
    let v = run(Process::MultiSource(bb84_multistate()));
    assert_eq!(v.tag, Tag::Nonclassical);
    assert_eq!(v.rule.as_deref(), Some(rules::PURE_DEPENDENT.id));
}

#[test]
fn trine_is_linearly_independent() {
    let v = run(Process::MultiSource(trine_multistate()));
    assert_eq!(v.rule.as_deref(), Some(rules::LINEARLY_INDEPENDENT.id));
}

#[test]
fn zero_plus_source_is_classical() {
    assert_eq!(run(Process::MultiSource(zero_plus_source())).tag, Tag::Classical);
}

#[test]
fn cube_family() {
    for eta in [0.0, 0.2, 0.4, 1.0 / 3f64.sqrt()] {
        assert_eq!(run(Process::MultiSource(cube_multistate(eta))).tag, Tag::Classical, "eta {eta}");
    }
    for eta in [0.6, 0.8, 1.0] {
        assert_ne!(run(Process::MultiSource(cube_multistate(eta))).tag, Tag::Classical, "eta {eta}");
    }
}

#[test]
fn measurements() {
    assert_eq!(run(Process::MultiMeasurement(sic_povm())).tag, Tag::Classical);
    let p1 = run(Process::MultiMeasurement(pentagon(1.0)));
    assert_eq!(p1.tag, Tag::Nonclassical);
    assert_eq!(p1.rule.as_deref(), Some(rules::RANK_ONE_DEPENDENT.id));
    assert_eq!(run(Process::MultiMeasurement(pentagon(0.3))).tag, Tag::Classical);
    let zx = run(Process::MultiMeasurement(zx_measurements()));
    assert_eq!(zx.rule.as_deref(), Some(rules::INCOMPATIBLE.id));
    let zz = run(Process::MultiMeasurement(zz_measurements()));
    assert_ne!(zz.rule.as_deref(), Some(rules::INCOMPATIBLE.id));
}

#[test]
fn bipartite() {
    assert_eq!(run(Process::Bipartite(bell())).rule.as_deref(), Some(rules::NPT.id));
    let e4 = run(Process::Bipartite(example4_state()));
    assert_eq!(e4.rule.as_deref(), Some(rules::STEERING_PROBE.id));
    let d = run(Process::Bipartite(discord_state()));
    assert_eq!(d.tag, Tag::Classical);
    assert!(d.certificate.is_some());
}

#[test]
fn channels() {
    assert_eq!(run(Process::Channel(ChannelChoi::identity(2))).tag, Tag::Nonclassical);
    let e5 = run(Process::Channel(example5_channel()));
    assert_eq!(e5.rule.as_deref(), Some(rules::PUSHFORWARD_PROBE.id));
    assert_eq!(run(Process::Channel(ChannelChoi::completely_depolarizing(2, 2))).tag, Tag::Classical);
    let e6 = run(Process::Channel(example6_channel()));
    assert_eq!(e6.tag, Tag::Nonclassical);
}

#[test]
fn consistency_and_tripartite() {
    let a = bb84_assemblage();
    assert_eq!(run(Process::MultiSource(a.clone())).tag, Tag::Nonclassical);
    let Process::MultiSource(flat) = flag_convexify(&Process::MultiSource(a)).unwrap() else { panic!() };
    let b = dephase_embed(&flat).unwrap();
    assert_ne!(run(Process::Bipartite(b)).tag, Tag::Classical);
    let t = run(Process::Multipartite(tripartite_upb()));
    assert_ne!(t.tag, Tag::Classical);
    println!("upb: {:?} {:?}", t.tag, t.rule);
    assert_eq!(run(Process::Multipartite(tripartite_product())).tag, Tag::Classical);
}
