use aes::Aes128;
use cmac::{Cmac, Mac as _};

use super::{MacOutput, MacParams, SecretKey};
use crate::error::{param, Result};

/// Width of the big-endian counter prepended to every MAC input.
pub const COUNTER_BYTES: usize = 4;

/// Raw AES-128-CMAC (RFC 4493).
pub fn aes_cmac(key: &[u8; 16], data: &[u8]) -> [u8; 16] {
    let mut mac = <Cmac<Aes128> as cmac::Mac>::new_from_slice(key).expect("16-byte key");
    mac.update(data);
    mac.finalize().into_bytes().into()
}

/// A keyed, deterministic `MacGen`: AES-CMAC over `counter || message`,
/// truncated to the leading `L` bits.
///
/// Keys shorter than 128 bits (toy security parameters) are zero-extended
/// to an AES-128 key.
#[derive(Clone)]
pub struct Mac {
    cmac: Cmac<Aes128>,
    params: MacParams,
}

impl std::fmt::Debug for Mac {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mac")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl Mac {
    pub fn new(key: &SecretKey, params: MacParams) -> Result<Self> {
        let bytes = key.bytes();
        if bytes.len() > 16 {
            return param(format!(
                "AES-CMAC takes keys of at most 128 bits, got {}",
                key.lambda_bits()
            ));
        }
        let mut k = [0u8; 16];
        k[..bytes.len()].copy_from_slice(bytes);
        let cmac = <Cmac<Aes128> as cmac::Mac>::new_from_slice(&k).expect("16-byte key");
        Ok(Self { cmac, params })
    }

    pub fn params(&self) -> &MacParams {
        &self.params
    }

    /// MAC of `counter || parts[0] || parts[1] || ...`.
    pub fn compute_parts(&self, counter: u32, parts: &[&[u8]]) -> MacOutput {
        let mut mac = self.cmac.clone();
        mac.update(&counter.to_be_bytes());
        for p in parts {
            mac.update(p);
        }
        let full = u128::from_be_bytes(mac.finalize().into_bytes().into());
        let len = self.params.total_bits();
        let value = if len == 128 { full } else { full >> (128 - len) };
        MacOutput { value, len }
    }

    pub fn compute(&self, counter: u32, message: &[u8]) -> MacOutput {
        self.compute_parts(counter, &[message])
    }
}

/// One-shot `MacGen(k, i, m)`.
pub fn mac_gen(key: &SecretKey, counter: u32, message: &[u8], params: &MacParams) -> Result<MacOutput> {
    Ok(Mac::new(key, *params)?.compute(counter, message))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mac::key_gen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const RFC_VECTORS: &str = include_str!("../../testdata/rfc4493.txt");

    fn unhex(s: &str) -> Vec<u8> {
        hex::decode(s.trim()).unwrap()
    }

    #[test]
    fn rfc4493_known_answers() {
        let mut cases = 0;
        for line in RFC_VECTORS
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 3, "malformed vector line {line:?}");
            let key: [u8; 16] = unhex(fields[0]).try_into().unwrap();
            let expected = unhex(fields[2]);
            assert_eq!(aes_cmac(&key, &unhex(fields[1])).to_vec(), expected, "{line}");
            cases += 1;
        }
        assert_eq!(cases, 4);
    }

    #[test]
    fn keyed_mac_matches_raw_cmac_over_counter_and_message() {
        let key = SecretKey::from_bytes(&unhex("2b7e151628aed2a6abf7158809cf4f3c")).unwrap();
        let params = MacParams::new(128, 8, 16).unwrap();
        let msg = b"torque=42";
        let mut input = 9u32.to_be_bytes().to_vec();
        input.extend_from_slice(msg);
        let raw = aes_cmac(key.bytes().try_into().unwrap(), &input);
        let out = mac_gen(&key, 9, msg, &params).unwrap();
        assert_eq!(out.value(), u128::from_be_bytes(raw));
    }

    #[test]
    fn truncation_keeps_leading_bits() {
        let key = key_gen(128, Some(3)).unwrap();
        let full = mac_gen(&key, 1, b"m", &MacParams::new(128, 8, 16).unwrap()).unwrap();
        let toy = mac_gen(&key, 1, b"m", &MacParams::new(8, 4, 2).unwrap()).unwrap();
        assert_eq!(toy.len(), 8);
        assert_eq!(toy.value(), full.value() >> 120);
    }

    #[test]
    fn toy_mac_is_deterministic() {
        let key = key_gen(16, Some(1)).unwrap();
        let p = MacParams::new(8, 4, 2).unwrap();
        assert_eq!(
            mac_gen(&key, 4, b"abc", &p).unwrap(),
            mac_gen(&key, 4, b"abc", &p).unwrap()
        );
    }

    #[test]
    fn oversized_keys_are_rejected() {
        let key = key_gen(256, Some(1)).unwrap();
        assert!(Mac::new(&key, MacParams::new(128, 8, 16).unwrap()).is_err());
    }

    // Changing the counter changes an L-bit output except with probability
    // about 2^-L; the bound 1 - 2^(-L+2) leaves room for sampling noise.
    #[test]
    fn counter_change_changes_toy_output() {
        let p = MacParams::new(8, 4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 10_000;
        let mut differ = 0;
        for _ in 0..trials {
            let key = crate::mac::key::key_from_rng(128, &mut rng);
            let mac = Mac::new(&key, p).unwrap();
            let m: [u8; 4] = rng.gen();
            if mac.compute(5, &m) != mac.compute(6, &m) {
                differ += 1;
            }
        }
        let rate = differ as f64 / trials as f64;
        assert!(rate >= 1.0 - 2f64.powi(-8 + 2), "rate {rate}");
    }

    #[test]
    fn single_bit_avalanche_on_aes_cmac() {
        let p = MacParams::new(128, 8, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..2_000 {
            let key = crate::mac::key::key_from_rng(128, &mut rng);
            let mac = Mac::new(&key, p).unwrap();
            let mut m: [u8; 6] = rng.gen();
            let base = mac.compute(1, &m);
            let bit = rng.gen_range(0..48);
            m[bit / 8] ^= 1 << (bit % 8);
            assert_ne!(base, mac.compute(1, &m));
        }
    }
}
