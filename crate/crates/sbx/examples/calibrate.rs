//! Temporary calibration harness (deleted before release).

use std::time::Instant;

use sbx::commands::{cmd_exp_baseline, cmd_exp_depth, cmd_synth_data};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let ft_lr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let epochs: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(120);
    let ft_epochs: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(250);
    let d_last: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let n_seeds: usize = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(3);
    let ft_patience: usize = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(25);
    let seeds: Vec<u64> = if n_seeds == 99 {
        vec![202]
    } else {
        [101u64, 202, 303][..n_seeds].to_vec()
    };
    let seeds_toml = format!(
        "[{}]",
        seeds.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
    );

    let dir = std::env::temp_dir().join("sbx_calibrate");
    std::fs::create_dir_all(&dir).unwrap();
    let corpus = dir.join("corpus.sbfm");
    cmd_synth_data(2024, 2000, 64, &corpus).unwrap();

    let config_text = format!(
        r#"
dims = [64, 32, 16, 8]

[[layer]]
lr = {lr}
m = 0.5
b = 32
s = 1001
d = 0.1
max_epochs = {epochs}
patience = 15

[[layer]]
lr = {lr}
m = 0.5
b = 32
s = 1002
d = 0.1
max_epochs = {epochs}
patience = 15

[[layer]]
lr = {lr}
m = 0.5
b = 32
s = 1003
d = {d_last}
max_epochs = {epochs}
patience = 15

[finetune]
lr = {ft_lr}
m = 0.9
b = 32
s = 1004
max_epochs = {ft_epochs}
patience = {ft_patience}

[experiment]
seeds = {seeds_toml}
"#
    );
    let config = dir.join("config.toml");
    std::fs::write(&config, config_text).unwrap();

    println!("== depth sweep (lr={lr} ft_lr={ft_lr} epochs={epochs} ft_epochs={ft_epochs} d_last={d_last})");
    let t0 = Instant::now();
    let rows = cmd_exp_depth(&config, &corpus, &dir.join("depth.csv")).unwrap();
    println!("depth sweep took {:.1} s", t0.elapsed().as_secs_f64());
    for r in &rows {
        println!(
            "depth {} seed {}: train {:.6} valid {:.6} test {:.6}",
            r.depth, r.seed, r.train_mse, r.valid_mse, r.test_mse
        );
    }
    for seed in &seeds {
        let d1 = rows.iter().find(|r| r.depth == 1 && r.seed == *seed).unwrap();
        let d3 = rows.iter().find(|r| r.depth == 3 && r.seed == *seed).unwrap();
        println!(
            "seed {seed}: depth1 {:.6} depth3 {:.6}  deep_wins={}",
            d1.test_mse,
            d3.test_mse,
            d3.test_mse <= d1.test_mse
        );
    }

    println!("== baseline comparison");
    let t0 = Instant::now();
    let rows = cmd_exp_baseline(&config, &corpus, &dir.join("baseline.csv"), None).unwrap();
    println!("baseline took {:.1} s", t0.elapsed().as_secs_f64());
    for seed in &seeds {
        let ae = rows
            .iter()
            .find(|r| r.method == "autoencoder" && r.seed == *seed)
            .unwrap();
        let dct = rows
            .iter()
            .find(|r| r.method == "dct" && r.seed == *seed)
            .unwrap();
        println!(
            "seed {seed}: ae {:.3} dB (mse {:.5}) vs dct {:.3} dB (mse {:.5})  ae_wins={}",
            ae.mean_lsd_db,
            ae.mean_mse,
            dct.mean_lsd_db,
            dct.mean_mse,
            ae.mean_lsd_db < dct.mean_lsd_db
        );
    }
}
