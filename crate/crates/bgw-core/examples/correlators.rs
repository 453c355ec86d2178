//! Compute a few correlators in each normalization and show the
//! certification metadata the engine attaches.

use bgw_core::correlators::{
    connected, norbury_number, nu_correlator, CorrelatorKey, EngineConfig, NuMode,
};
use bgw_core::rational::format_rat;
use std::time::Instant;

fn main() {
    let cfg = EngineConfig::default();
    for ells in [
        vec![1u32, 1],
        vec![1, 2],
        vec![3, 3],
        vec![1, 1, 1],
        vec![2, 2, 2, 2],
    ] {
        let key = CorrelatorKey::new(ells).unwrap();
        let t = Instant::now();
        let number = norbury_number(&key, &cfg).unwrap();
        println!(
            "<Theta, tau_{}> = {}   ({:.1?})",
            key,
            format_rat(&number),
            t.elapsed()
        );
    }
    for ells in [vec![1u32, 1], vec![2, 2]] {
        let key = CorrelatorKey::new(ells).unwrap();
        let poly = nu_correlator(&key, &cfg).unwrap();
        println!("<Theta, tau_{}>_nu = {}", key, poly);
    }
    let key = CorrelatorKey::new(vec![0, 1]).unwrap();
    let v = connected(&key, &NuMode::Symbolic, &cfg).unwrap();
    println!(
        "connected {} = {}   [{} at order {}]",
        key, v.connected, v.provenance, v.certified_order
    );
}
