//! Round trips of the file formats.

use excess_risk_core::distribution::{AssouadParams, HardDistribution};
use excess_risk_core::network::{Architecture, NetworkSpec};
use excess_risk_lab::io::{decode_network, encode_network, load_network, read_samples, save_network, write_samples};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn network_bytes_round_trip(
        d in 1usize..5,
        widths in prop::collection::vec(1usize..7, 1..5),
        clamp in 0.5f64..50.0,
        seed in any::<u64>(),
    ) {
        let arch = Architecture::new(d, widths).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = NetworkSpec::glorot(&arch, clamp / 2.0, &mut rng).unwrap();
        let mut buf = Vec::new();
        encode_network(&mut buf, &net, clamp).unwrap();
        let back = decode_network(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &net);
        let x = vec![0.3; d];
        prop_assert_eq!(back.forward(&x).unwrap().to_bits(), net.forward(&x).unwrap().to_bits());
        // every strict prefix is rejected
        let cut = (seed as usize) % buf.len();
        prop_assert!(decode_network(&buf[..cut]).is_err());
    }
}

#[test]
fn network_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let arch = Architecture::new(2, vec![3, 3, 3]).unwrap();
    let net = NetworkSpec::glorot(&arch, 4.0, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let path = dir.path().join("net.bin");
    save_network(&path, &net).unwrap();
    assert_eq!(load_network(&path).unwrap(), net);
}

#[test]
fn samples_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let dist = HardDistribution::new(AssouadParams::new(2, 2, 2, 0.1, 1.0, 1.0, vec![true, false]).unwrap()).unwrap();
    let samples = dist.sample(200, 4);
    let path = dir.path().join("samples.csv");
    write_samples(&path, &samples).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x_1,x_2,y,eta\n"));
    assert_eq!(read_samples(&path).unwrap(), samples);
}
