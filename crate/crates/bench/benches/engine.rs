use ccr_core::behavior::{bounded_beh, refine_closed};
use ccr_core::ems::{run, ObsEnv, SeededResolver};
use ccr_core::harness::{cannon_abs, cannon_impl, diff_test, mw_impl, once_act, once_impl, DiffBounds, CANNON_FUEL};
use ccr_core::pcm::laws::check_all_finite;
use criterion::{criterion_group, criterion_main, Criterion};

fn engine(c: &mut Criterion) {
    let env = ObsEnv::new();
    let once = once_impl(2);
    c.bench_function("beh/once-2calls/fuel200", |b| b.iter(|| bounded_beh(&once, 200, &env).unwrap()));

    let (ci, ca) = (cannon_impl(2), cannon_abs(2));
    c.bench_function("refine/cannon-2shots", |b| b.iter(|| refine_closed(&ci, &ca, CANNON_FUEL, &env).unwrap()));

    let mw = mw_impl("mw1", "app", Some(2));
    c.bench_function("run/mw1-unrolled", |b| b.iter(|| run(&mw, &mut SeededResolver::new(0, env.clone()), 4000).unwrap()));

    let act = once_act(2);
    c.bench_function("act/once-2calls", |b| b.iter(|| act.run().unwrap()));

    let bounds = DiffBounds::new(CANNON_FUEL);
    c.bench_function("diff/cannon-1shot/10pairs", |b| b.iter(|| diff_test(&cannon_impl(1), &cannon_abs(1), &env, &bounds, 10, 0).unwrap()));

    c.bench_function("pcm/finite-laws", |b| b.iter(check_all_finite));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = engine
}
criterion_main!(benches);
