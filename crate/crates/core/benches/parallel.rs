use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use pdp_core::harness::brute_force_pdp;
use pdp_core::solver::{solve, SolveConfig};
use pdp_core::systems::{generate_instance, InstanceMode, PdpInstance, SystemVariant, VariantKind};
use pdp_core::{CurveParams, Exec, FieldContext};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn instance(n: u32, m: usize, n_prime: usize) -> PdpInstance {
    let curve = CurveParams::random(FieldContext::new(n, None).unwrap(), 1);
    generate_instance(&curve, m, n_prime, InstanceMode::Planted, 1).unwrap()
}

fn descent(c: &mut Criterion) {
    let inst = instance(13, 3, 4);
    let variant = SystemVariant::build(VariantKind::Split2, &inst).unwrap();
    let mut g = c.benchmark_group("descent");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "n13_m3"), |b| b.iter(|| variant.descend(&inst, exec).unwrap()));
    }
    g.finish();
}

fn groebner(c: &mut Criterion) {
    let inst = instance(11, 3, 3);
    let variant = SystemVariant::build(VariantKind::Split2, &inst).unwrap();
    let sys = variant.descend(&inst, Exec::Sequential).unwrap();
    let mut g = c.benchmark_group("groebner");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SolveConfig { enumerate_all: true, fb_vars: Some(variant.fb_bits()), exec, ..SolveConfig::default() };
        g.bench_function(BenchmarkId::new(name, "n11_m3"), |b| b.iter(|| solve(&sys, &cfg).unwrap()));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let inst = instance(13, 3, 5);
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, "n13_m3"), |b| b.iter(|| brute_force_pdp(&inst, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, descent, groebner, oracle);
criterion_main!(benches);
