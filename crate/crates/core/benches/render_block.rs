use criterion::{criterion_group, criterion_main, Criterion};
use vibropan::io::load_layout_file;
use vibropan::render::{Block, Command};
use vibropan::{Engine, PanningParams, RenderConfig, SignalConfig, Vec3};

fn render_block(c: &mut Criterion) {
    let layout = load_layout_file(&vibropan::data_dir().join("jacket_layout.json")).unwrap();
    let mut engine = Engine::new(layout, PanningParams::default(), SignalConfig::default(), RenderConfig::default()).unwrap();
    for i in 0..4 {
        let a = i as f64;
        engine
            .apply(Command::SetSource {
                id: format!("s{i}"),
                position: Vec3::new(0.4 * a.sin(), 0.4 * a.cos(), 0.1),
                gain: 1.0,
            })
            .unwrap();
    }
    let mut block = Block::new(engine.channels(), engine.render_config().block);
    c.bench_function("render_block 8ch x 256 @ 48k, 4 sources", |b| {
        b.iter(|| engine.render_block_into(&mut block))
    });
}

criterion_group!(benches, render_block);
criterion_main!(benches);
