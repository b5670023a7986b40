use std::f64::consts::PI;
use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gbc_core::berezin::{pfaffian, AntisymmetricFormMatrix};
use gbc_core::bundle::{builtin, monopole_section, BuiltinParams, TotalSpace};
use gbc_core::chains::integrate;
use gbc_core::chains::library::{latitude_circle, north_cap, polar_sphere};
use gbc_core::chern_weil::{euler_form, thom_form};
use gbc_core::diff_char::{lift_by_section, verify_gbc_identity, EvalSettings, GbcCase, SphereAtlas, SphereDecomposition};

fn antisymmetric(n: usize) -> AntisymmetricFormMatrix {
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0;
            a[i * n + j] = v;
            a[j * n + i] = -v;
        }
    }
    AntisymmetricFormMatrix::from_scalars(n, &a).unwrap()
}

fn bench_pfaffian(c: &mut Criterion) {
    let mut group = c.benchmark_group("pfaffian");
    for n in [4, 8, 12] {
        let m = antisymmetric(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| pfaffian(black_box(m)).unwrap()));
    }
    group.finish();
}

fn monopole(m: i32) -> Arc<gbc_core::bundle::BundleWithConnection> {
    Arc::new(builtin("monopole", &BuiltinParams { charge: m, ..Default::default() }).unwrap())
}

fn bench_thom_form(c: &mut Criterion) {
    let total = TotalSpace::new(monopole(2), 0);
    let u = thom_form(&total, 1.0).unwrap();
    let x = [1.1, 0.4, 0.6, -0.9];
    c.bench_function("thom_form_eval", |b| b.iter(|| u.eval(black_box(&x)).unwrap()));
}

fn bench_euler_integral(c: &mut Criterion) {
    let b = monopole(3);
    let idx = b.chart_index("sphere").unwrap();
    let chi = euler_form(&b, idx).unwrap();
    let chain = polar_sphere(b.local(idx).chart());
    let mut group = c.benchmark_group("euler_integral");
    for order in [8, 16, 32] {
        group.bench_with_input(BenchmarkId::from_parameter(order), &order, |bench, &o| {
            bench.iter(|| integrate(&chi, &chain, o).unwrap())
        });
    }
    group.finish();
}

fn bench_gbc_character(c: &mut Criterion) {
    let bundle = monopole(2);
    let atlas = SphereAtlas::new(bundle.clone()).unwrap();
    let v = monopole_section(&bundle, &[-1.5, 0.4, 1.0]).unwrap();
    let chart = bundle.local(0).chart().clone();
    let z = latitude_circle(&chart, PI / 3.0);
    let cases = vec![
        GbcCase {
            id: "cap".into(),
            decomposition: SphereDecomposition::bounding(north_cap(&chart, PI / 3.0)).unwrap(),
        },
        GbcCase {
            id: "lift".into(),
            decomposition: SphereDecomposition::lifted(z.clone(), lift_by_section(&atlas, &z, &v).unwrap()).unwrap(),
        },
    ];
    let settings = EvalSettings::default();
    let mut group = c.benchmark_group("gbc_character");
    group.sample_size(10);
    group.bench_function("monopole_2", |b| {
        b.iter(|| verify_gbc_identity(&atlas, &v, black_box(&cases), &settings, 1e-5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_pfaffian, bench_thom_form, bench_euler_integral, bench_gbc_character);
criterion_main!(benches);
