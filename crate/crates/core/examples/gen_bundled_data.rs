//! Regenerates the bundled benchmark CSVs under `data/`.
//!
//! The shipped files are statistical stand-ins for three small UCI-style
//! classification sets (same shapes, class counts and rough feature
//! distributions); everything is drawn from fixed seeds so the files are
//! reproducible byte for byte:
//!
//! ```text
//! cargo run -p liit-core --example gen_bundled_data [target-dir]
//! ```

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct ClassRecipe {
    label: &'static str,
    count: usize,
    mean: Vec<f64>,
    std: Vec<f64>,
}

struct Recipe {
    file: &'static str,
    header: &'static str,
    seed: u64,
    decimals: usize,
    clamp: (f64, f64),
    round_to_int: bool,
    classes: Vec<ClassRecipe>,
}

fn render(recipe: &Recipe) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let mut rows: Vec<String> = Vec::new();
    for class in &recipe.classes {
        for _ in 0..class.count {
            let mut line = String::new();
            for (j, (&mu, &sd)) in class.mean.iter().zip(&class.std).enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                let mut v = (mu + sd * z).clamp(recipe.clamp.0, recipe.clamp.1);
                if recipe.round_to_int {
                    v = v.round();
                }
                if j > 0 {
                    line.push(',');
                }
                if recipe.round_to_int {
                    let _ = write!(line, "{}", v as i64);
                } else {
                    let _ = write!(line, "{:.*}", recipe.decimals, v);
                }
            }
            let _ = write!(line, ",{}", class.label);
            rows.push(line);
        }
    }
    rows.shuffle(&mut rng);
    let mut text = String::from(recipe.header);
    text.push('\n');
    text.push_str(&rows.join("\n"));
    text.push('\n');
    text
}

fn wisc() -> Recipe {
    Recipe {
        file: "wisc.csv",
        header: "clump_thickness,size_uniformity,shape_uniformity,marginal_adhesion,\
                 epithelial_size,bare_nuclei,bland_chromatin,normal_nucleoli,mitoses,class",
        seed: 0x5749_5343, // "WISC"
        decimals: 0,
        clamp: (1.0, 10.0),
        round_to_int: true,
        classes: vec![
            ClassRecipe {
                label: "2",
                count: 458,
                mean: vec![3.0, 1.3, 1.4, 1.4, 2.1, 1.3, 2.1, 1.3, 1.1],
                std: vec![1.7, 0.9, 1.0, 0.9, 0.9, 1.2, 1.1, 0.9, 0.5],
            },
            ClassRecipe {
                label: "4",
                count: 241,
                mean: vec![7.2, 6.6, 6.6, 5.5, 5.3, 7.6, 6.0, 5.9, 2.5],
                std: vec![2.4, 2.7, 2.6, 3.2, 2.4, 3.1, 2.3, 3.3, 2.5],
            },
        ],
    }
}

fn ecoli() -> Recipe {
    // Eight localization-site classes over seven assay scores in [0, 1];
    // the two rarest classes have just two members each.
    let counts = [143usize, 77, 52, 35, 20, 5, 2, 2];
    let labels = ["cp", "im", "pp", "imU", "om", "omL", "imS", "imL"];
    let mut centers_rng = ChaCha8Rng::seed_from_u64(0x45434f4c49); // "ECOLI"
    let classes = counts
        .iter()
        .zip(labels)
        .map(|(&count, label)| ClassRecipe {
            label,
            count,
            mean: (0..7)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut centers_rng);
                    0.5 + 0.12 * z
                })
                .collect(),
            std: vec![0.13; 7],
        })
        .collect();
    Recipe {
        file: "ecoli.csv",
        header: "mcg,gvh,lip,chg,aac,alm1,alm2,class",
        seed: 0x45434f4c, // "ECOL"
        decimals: 2,
        clamp: (0.0, 1.0),
        round_to_int: false,
        classes,
    }
}

fn thy() -> Recipe {
    Recipe {
        file: "thy.csv",
        header: "t3_resin,thyroxin,t3,tsh,tsh_delta,class",
        seed: 0x544859, // "THY"
        decimals: 1,
        clamp: (0.0, 200.0),
        round_to_int: false,
        classes: vec![
            ClassRecipe {
                label: "1",
                count: 150,
                mean: vec![105.0, 9.0, 1.7, 1.5, 2.5],
                std: vec![13.0, 2.0, 0.5, 0.8, 2.0],
            },
            ClassRecipe {
                label: "2",
                count: 35,
                mean: vec![120.0, 17.0, 4.2, 1.0, 1.0],
                std: vec![10.0, 4.0, 1.5, 0.5, 1.5],
            },
            ClassRecipe {
                label: "3",
                count: 30,
                mean: vec![92.0, 4.0, 1.0, 10.0, 15.0],
                std: vec![12.0, 2.0, 0.4, 6.0, 10.0],
            },
        ],
    }
}

fn main() {
    let target = std::env::args().nth(1).unwrap_or_else(|| "data".into());
    let target = Path::new(&target);
    std::fs::create_dir_all(target).expect("create target dir");
    for recipe in [wisc(), ecoli(), thy()] {
        let path = target.join(recipe.file);
        std::fs::write(&path, render(&recipe)).expect("write dataset");
        println!("wrote {}", path.display());
    }
}
