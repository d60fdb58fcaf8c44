use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use plam_core::bigstep::{eval_fuel, BigStep};
use plam_core::gen::{corpus, GenConfig};
use plam_core::lab::assign::{solve, AssignmentProblem};
use plam_core::lab::{refute_bisim, GameConfig};
use plam_core::parse;
use plam_core::smallstep::{step_n, Strategy};
use plam_core::tree::prob_tree;

fn evaluation(c: &mut Criterion) {
    let mm = parse("(\\x.y (+) x x) (\\x.y (+) x x)").unwrap();
    c.bench_function("big-step MM fuel 12", |b| b.iter(|| eval_fuel(black_box(&mm), 12).unwrap()));
    let terms = corpus(2024, 100, GenConfig::closed(12));
    c.bench_function("big-step corpus fuel 8", |b| {
        b.iter(|| {
            let mut ev = BigStep::new();
            for t in &terms {
                black_box(ev.eval(t, 8).unwrap());
            }
        })
    });
    for (name, s) in [("head", Strategy::Head), ("spine", Strategy::Spine)] {
        c.bench_function(&format!("{name} reduction corpus 8 steps"), |b| {
            b.iter(|| {
                for t in &terms {
                    black_box(step_n(t, 8, s).unwrap());
                }
            })
        });
    }
}

fn trees_and_games(c: &mut Criterion) {
    let theta = parse("Theta (\\f.y (+) y f)").unwrap();
    c.bench_function("fixed-point tree level 4", |b| b.iter(|| prob_tree(black_box(&theta), 4, 10).unwrap()));
    let (m, n) = (parse("\\x y z.z (x (+) y)").unwrap(), parse("\\x y z.z x (+) z y").unwrap());
    c.bench_function("bisimulation refutation", |b| {
        b.iter(|| refute_bisim(black_box(&m), black_box(&n), GameConfig::default()).unwrap())
    });
    let pb = AssignmentProblem::from_json(
        r#"{"p":["1/4","1/4","1/8","1/8","1/8","1/16"],"r":{"{1,2}":"1/4","{2,3,4}":"1/4","{4,5,6}":"1/4","{1,6}":"1/8"}}"#,
    )
    .unwrap();
    c.bench_function("assignment solve n=6", |b| b.iter(|| solve(black_box(&pb))));
}

criterion_group!(benches, evaluation, trees_and_games);
criterion_main!(benches);
