use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cgo_kahler::harness::{make_test_density, DensitySpec};
use cgo_kahler::morse::{build_amplitude, build_phase, recentered_charts};
use cgo_kahler::pairing::{pairing_integral, CGOPair, QuadratureSpec};
use cgo_kahler::{CPoint, DomainBox, Execution, Potential};

fn pairing(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairing_integral");
    group.sample_size(10);
    for (dim, width, h) in [(1, 0.8, 0.05), (2, 0.8, 0.5)] {
        let o = CPoint::origin(dim);
        let domain = DomainBox::polydisk(&o, 1.0, 0.1).unwrap();
        let density =
            make_test_density(&DensitySpec::Bump { center: vec![[0.0, 0.0]; dim], width, amplitude: 1.0 }, &domain)
                .unwrap();
        let phase = build_phase(&o, &recentered_charts(&o)).unwrap();
        let amp = build_amplitude(&o, &[]).unwrap();
        let pair = CGOPair::new(&phase, &amp, h).unwrap();
        let pot = Potential::fubini_study(1.0).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let spec = QuadratureSpec::default().with_execution(exec);
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), format!("n{dim}_h{h}")), &spec, |b, spec| {
                b.iter(|| pairing_integral(&density, &pair, &pot, &domain, spec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, pairing);
criterion_main!(benches);
