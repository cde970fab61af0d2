//! Clifford twirling as a 2-design average: any channel projects onto the
//! depolarizing family, with the same parameter the Pauli-transfer trace
//! predicts and the same average fidelity.

use crossbar_rb::channels::QuantumChannel;
use crossbar_rb::clifford::CliffordTable;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn main() {
    let table = CliffordTable::generate().unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(11);

    for kraus_count in [1usize, 2, 4] {
        let channel = QuantumChannel::random_cptp(&mut rng, kraus_count);
        let analytic = channel.depolarization_parameter().value;
        let twirled = channel.twirl(&table);
        let explicit = twirled.depolarization_parameter().value;

        let ptm = twirled.pauli_transfer_matrix();
        let off_diag = (0..16)
            .flat_map(|a| (0..16).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| ptm[(a, b)].abs())
            .fold(0.0f64, f64::max);

        println!("random channel with {kraus_count} Kraus operators:");
        println!("  p from Pauli-transfer trace: {analytic:+.12}");
        println!("  p from explicit group sum:   {explicit:+.12}");
        println!("  largest off-diagonal PTM entry after twirl: {off_diag:.2e}");
        println!(
            "  average fidelity before/after: {:.10} / {:.10}",
            channel.average_fidelity(),
            twirled.average_fidelity()
        );
        println!();
    }

    // The pinching channel of a rank-1 projector lands exactly at p = 3/5.
    let pinch = QuantumChannel::measurement_channel(&crossbar_rb::linalg::projector(
        &crossbar_rb::spin_model::triplet_t0(),
    ))
    .unwrap();
    println!(
        "rank-1 pinching channel: p = {} (exactly 3/5)",
        pinch.depolarization_parameter().value
    );
}
