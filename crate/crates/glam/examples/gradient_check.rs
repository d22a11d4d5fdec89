//! Finite-difference validation of the hand-derived gradients, including the
//! path through the sampled graph's in-degree normalization (relaxed mode
//! with frozen Gumbel noise).
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use glam::affinity::build_affinity_targets;
use glam::data::Features;
use glam::graphs::{crop_incoming_to_labeled, knn_graph};
use glam::model::{
    glam_backward, glam_forward, glam_loss, one_hot_train_labels, ForwardOpts, GcnInput,
    GlamHyperParams, GlamInputs, GlamParams, GraphMode,
};
use glam::numerics::{DenseMatrix, SparseMatrix};
use glam::rng::SeedStreams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let entries = vec![
        (0, 0, 1.0),
        (0, 1, 0.5),
        (1, 0, 0.8),
        (1, 2, 0.2),
        (2, 1, 1.0),
        (2, 3, 0.4),
        (3, 2, 0.9),
        (3, 3, 0.7),
        (4, 0, 0.3),
        (4, 3, 1.0),
        (5, 1, 0.6),
        (5, 2, 1.0),
    ];
    let x = Features::sparse(SparseMatrix::from_coo(6, 4, &entries).unwrap());
    let labels = vec![0, 0, 1, 1, 0, 1];
    let train = vec![0, 1, 2, 3];
    let g_ck = crop_incoming_to_labeled(&knn_graph(&x, 2).unwrap(), &train);
    let targets = build_affinity_targets(&train, &labels);
    let onehot = one_hot_train_labels(&labels, &train, 2);
    let inputs = GlamInputs {
        x_affinity: &x,
        x_gcn: &x,
        g_ck: &g_ck,
        targets: &targets,
        train_nodes: &train,
        train_onehot: &onehot,
    };
    let hp = GlamHyperParams {
        k: 2,
        w_ck: 0.6,
        beta: 0.7,
        temperature: 1.0, // relaxed sampling keeps the model differentiable
        hidden_a: 5,
        hidden_c: 3,
        dropout_a: 0.0,
        dropout_c: 0.0,
        alpha_a: 0.0,
        alpha_c: 0.0,
        boosted: false,
        gcn_input: GcnInput::Raw,
        ..GlamHyperParams::default()
    };
    let mut params = GlamParams::init(4, 2, Some(train.clone()), &hp, &SeedStreams::new(1));

    let mut noise = DenseMatrix::zeros(6, 4);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(7);
    for v in noise.values_mut() {
        let u: f64 = noise_rng.random::<f64>().max(1e-12);
        *v = -((-u.ln()).ln());
    }
    let opts = ForwardOpts {
        training: false,
        mode: GraphMode::Soft,
        frozen_noise: Some(&noise),
        reuse_graph: None,
    };

    let loss_of = |p: &GlamParams| {
        let mut r1 = ChaCha8Rng::seed_from_u64(0);
        let mut r2 = ChaCha8Rng::seed_from_u64(0);
        let fwd = glam_forward(p, &hp, &inputs, opts, &mut r1, &mut r2).unwrap();
        glam_loss(&fwd, p, &hp, &inputs).unwrap().total
    };
    let mut r1 = ChaCha8Rng::seed_from_u64(0);
    let mut r2 = ChaCha8Rng::seed_from_u64(0);
    let fwd = glam_forward(&params, &hp, &inputs, opts, &mut r1, &mut r2).unwrap();
    let grads = glam_backward(&params, &hp, &inputs, &fwd).unwrap();
    drop(fwd);

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let w1_grad = grads.w1.clone().unwrap();
    for (r, c) in [(0usize, 0usize), (1, 2), (3, 4)] {
        let w1 = &mut params.affinity.as_mut().unwrap().w1;
        let orig = w1.get(r, c);
        w1.set(r, c, orig + h);
        let up = loss_of(&params);
        params.affinity.as_mut().unwrap().w1.set(r, c, orig - h);
        let down = loss_of(&params);
        params.affinity.as_mut().unwrap().w1.set(r, c, orig);
        let fd = (up - down) / (2.0 * h);
        let analytic = w1_grad.get(r, c);
        let rel = (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1e-12);
        worst = worst.max(rel);
        println!("dL/dW1[{r}][{c}]: finite-diff {fd:+.8}  analytic {analytic:+.8}  rel {rel:.2e}");
    }
    println!("worst relative error on probed entries: {worst:.2e} (tolerance 1e-4)");
    assert!(worst < 1e-4);
}
