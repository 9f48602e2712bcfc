use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};
use fixprop::batch::{run_batch, run_batch_sequential, HeurKind, ManifestEntry, RunParams};
use fixprop::gen::{generate, GenSpec};
use fixprop::model::write_json;

fn manifest(dir: &std::path::Path) -> Vec<ManifestEntry> {
    let mut entries = Vec::new();
    for seed in 0..4 {
        let inst = generate(&GenSpec::tiny(seed)).expect("tiny instance");
        let path: PathBuf = dir.join(format!("tiny{seed}.json"));
        write_json(&inst, std::fs::File::create(&path).expect("create")).expect("write");
        for heur in [HeurKind::Fixloop, HeurKind::Fp] {
            entries.push(ManifestEntry {
                instance: path.clone(),
                heur,
                seed,
                params: RunParams {
                    oracle: false,
                    ..RunParams::default()
                },
            });
        }
    }
    entries
}

fn bench_batch(c: &mut Criterion) {
    let dir = tempfile::tempdir().expect("temp dir");
    let entries = manifest(dir.path());
    let mut group = c.benchmark_group("batch");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| run_batch_sequential(&entries)));
    group.bench_function("parallel", |b| b.iter(|| run_batch(&entries, 0)));
    group.finish();
}

criterion_group!(benches, bench_batch);
criterion_main!(benches);
