use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wecopt_core::{make_farm_config, FarmObjective, Objective, RandomStream, WaveScenario};

fn farm_evaluation(c: &mut Criterion) {
    let scenario = WaveScenario::builtin("perth").unwrap();
    let mut group = c.benchmark_group("farm_evaluation");
    for n in [1, 4, 16] {
        let objective = FarmObjective::from_scenario(scenario.clone(), make_farm_config(n).unwrap()).unwrap();
        let x = objective.config().bounds().sample(&mut RandomStream::new(1, 0));
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| b.iter(|| objective.evaluate(black_box(x))));
    }
    group.finish();
}

criterion_group!(benches, farm_evaluation);
criterion_main!(benches);
