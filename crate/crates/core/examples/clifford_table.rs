//! Generating, persisting and sampling the two-qubit Clifford group, and
//! closing a random sequence back to the identity.

use std::time::Instant;

use crossbar_rb::clifford::{canonicalize, CliffordTable};
use crossbar_rb::linalg::{max_abs_diff, Mat4};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let start = Instant::now();
    let table = CliffordTable::generate().unwrap();
    println!(
        "generated {} canonical unitaries in {:?}",
        table.len(),
        start.elapsed()
    );

    let dir = std::env::temp_dir().join("crossbar_rb_example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("clifford_table.bin");
    table.save(&path).unwrap();
    let loaded = CliffordTable::load(&path).unwrap();
    println!(
        "persisted to {} ({} bytes) and reloaded {} elements",
        path.display(),
        std::fs::metadata(&path).unwrap().len(),
        loaded.len()
    );
    loaded.verify().unwrap();
    println!("structural verification passed");

    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let indices: Vec<usize> = (0..60).map(|_| table.sample_uniform(&mut rng)).collect();
    println!(
        "sampled a 60-element sequence, first five indices {:?}",
        &indices[..5]
    );
    let closing = table.inverse_of_sequence(&indices, None);
    let mut product = Mat4::identity();
    for &i in &indices {
        product = table.element(i).matrix() * product;
    }
    product = closing.matrix() * product;
    let defect = max_abs_diff(
        canonicalize(&product).unwrap().matrix(),
        &Mat4::identity(),
    );
    println!("closing gate restores the identity up to {defect:.2e}");
}
