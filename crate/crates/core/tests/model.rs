use std::time::Instant;

use graphgen::canonize::min_dfs_code;
use graphgen::graph::is_isomorphic;
use graphgen::model::{generate, generate_graphs, load_checkpoint, save_checkpoint, teacher_forced_accuracy, train, Trainer, TrainConfig};
use graphgen::{Error, LabeledGraph, Model};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn triangle() -> LabeledGraph {
    LabeledGraph::from_parts(["C", "C", "O"], [(0, 1, "s"), (1, 2, "d"), (2, 0, "s")])
}

fn overfit_triangle() -> Model {
    let data = vec![triangle(); 50];
    let cfg = TrainConfig { seed: 5, ..TrainConfig::desk() };
    let t0 = Instant::now();
    let (model, hist) = train::<f64>(&data, &data[..5], &cfg).unwrap();
    eprintln!("triangle: {} epochs in {:?}, best {}", hist.records.len(), t0.elapsed(), hist.best_epoch);
    model
}

#[test]
fn triangle_overfit_and_regenerate() {
    let model = overfit_triangle();
    let code = min_dfs_code(&triangle()).unwrap();
    let acc = teacher_forced_accuracy(&model, std::slice::from_ref(&code)).unwrap();
    assert!(acc.tuple >= 0.99, "{acc:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sampled = generate(&model, model.max_len, &mut rng).unwrap();
    assert_eq!(sampled, code);

    let graphs = generate_graphs(&model, 100, model.max_len, 9).unwrap();
    let hits = graphs.iter().filter(|g| is_isomorphic(g, &triangle())).count();
    assert!(hits >= 90, "{hits}");
    for g in &graphs {
        assert!(g.is_valid());
    }
}

fn tiny_config() -> TrainConfig {
    TrainConfig { layers: 1, hidden: 8, embedding: 6, mlp_hidden: 8, epochs: 4, batch_size: 4, seed: 3, ..TrainConfig::desk() }
}

fn small_set() -> Vec<LabeledGraph> {
    vec![
        triangle(),
        LabeledGraph::from_parts(["C", "O"], [(0, 1, "s")]),
        LabeledGraph::from_parts(["C", "C", "C", "O"], [(0, 1, "s"), (1, 2, "s"), (2, 3, "d")]),
    ]
}

#[test]
fn empty_training_set() {
    assert!(matches!(train::<f64>(&[], &[triangle()], &tiny_config()), Err(Error::EmptyDataset(_))));
}

#[test]
fn same_seed_same_history() {
    let (_, a) = train::<f64>(&small_set(), &small_set()[..1], &tiny_config()).unwrap();
    let (_, b) = train::<f64>(&small_set(), &small_set()[..1], &tiny_config()).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.records.len(), 4);
    let other = TrainConfig { seed: 4, ..tiny_config() };
    let (_, c) = train::<f64>(&small_set(), &small_set()[..1], &other).unwrap();
    assert_ne!(a.to_csv(), c.to_csv());
}

#[test]
fn out_of_vocab_validation_graphs_are_skipped() {
    let foreign = LabeledGraph::from_parts(["Zn", "C"], [(0, 1, "s")]);
    let (_, h) = train::<f64>(&small_set(), &[foreign], &tiny_config()).unwrap();
    assert!(h.records.iter().all(|r| r.valid_loss.is_finite()));
}

#[test]
fn max_len_zero_and_size_bounds() {
    let (model, _) = train::<f64>(&small_set(), &small_set(), &tiny_config()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(generate(&model, 0, &mut rng).unwrap().is_empty());
    assert_eq!(model.max_len, 4);
    for _ in 0..200 {
        let code = generate(&model, 50, &mut rng).unwrap();
        assert!(code.tuples.iter().all(|t| t.src_time < 4 && t.dst_time < 4));
    }
    let a = generate_graphs(&model, 1, 10, 77).unwrap();
    let b = generate_graphs(&model, 1, 10, 77).unwrap();
    assert_eq!(a, b);
    assert!(a[0].is_valid());
}

#[test]
fn checkpoint_round_trip() {
    let dir = std::env::temp_dir().join(format!("graphgen-ckpt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.ckpt");

    let mut trainer = Trainer::<f64>::new(&small_set(), &small_set(), &tiny_config()).unwrap();
    trainer.run().unwrap();
    let ck = trainer.checkpoint();
    save_checkpoint(&ck, &path).unwrap();
    let back = load_checkpoint::<f64>(&path).unwrap();
    assert_eq!(back, ck);

    let gen = |m: &Model| generate_graphs(m, 20, m.max_len, 5).unwrap();
    assert_eq!(gen(&ck.model), gen(&back.model));

    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
    assert!(matches!(load_checkpoint::<f64>(&path), Err(Error::ChecksumMismatch)));
    std::fs::write(&path, b"not a checkpoint").unwrap();
    assert!(matches!(load_checkpoint::<f64>(&path), Err(Error::BadMagic)));

    // rewrite the version field and re-seal the checksum
    use sha2::{Digest, Sha256};
    let mut body = bytes[..bytes.len() - 32].to_vec();
    body[8..12].copy_from_slice(&7u32.to_le_bytes());
    let digest = Sha256::digest(&body);
    body.extend_from_slice(&digest);
    std::fs::write(&path, &body).unwrap();
    assert!(matches!(load_checkpoint::<f64>(&path), Err(Error::VersionMismatch { found: 7, expected: 1 })));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn resume_matches_uninterrupted_run() {
    let full_cfg = TrainConfig { epochs: 6, ..tiny_config() };
    let (full, full_hist) = train::<f64>(&small_set(), &small_set(), &full_cfg).unwrap();

    let mut first = Trainer::<f64>::new(&small_set(), &small_set(), &TrainConfig { epochs: 3, ..full_cfg.clone() }).unwrap();
    first.run().unwrap();
    let bytes = first.checkpoint().to_bytes().unwrap();
    let ck = graphgen::model::Checkpoint::<f64>::from_bytes(&bytes).unwrap();
    let (resumed, hist) = graphgen::model::resume_training(ck, &small_set(), &small_set(), &full_cfg).unwrap();
    assert_eq!(hist.to_csv(), full_hist.to_csv());
    assert_eq!(resumed.network, full.network);
}

#[test]
fn foreign_vocab_errors_downstream() {
    let (model, _) = train::<f64>(&small_set(), &small_set(), &tiny_config()).unwrap();
    let foreign = LabeledGraph::from_parts(["Zn", "C"], [(0, 1, "s")]);
    let code = min_dfs_code(&foreign).unwrap();
    assert!(matches!(model.code_loss(&code), Err(Error::OutOfVocab(_))));
}

#[test]
fn single_precision_trains() {
    let (model, h) = train::<f32>(&small_set(), &small_set(), &tiny_config()).unwrap();
    assert!(h.records.iter().all(|r| r.train_loss.is_finite()));
    let g = generate_graphs(&model, 5, model.max_len, 1).unwrap();
    assert_eq!(g.len(), 5);
}

#[test]
fn training_loss_falls_over_every_window() {
    let set: Vec<LabeledGraph> = small_set().into_iter().cycle().take(30).collect();
    let cfg = TrainConfig { epochs: 200, dropout: 0.0, hidden: 16, mlp_hidden: 16, embedding: 8, seed: 8, ..tiny_config() };
    let (_, h) = train::<f64>(&set, &set[..3], &cfg).unwrap();
    assert!(h.stopped_early);
    // after the best epoch only the patience countdown runs, on a plateau
    let loss: Vec<f64> = h.records[..h.best_epoch].iter().map(|r| r.train_loss).collect();
    assert!(loss.len() > 20);
    for w in loss.windows(11) {
        assert!(w[10] <= w[0], "{loss:?}");
    }
}
