use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{param, Result};

/// Shared secret of `lambda_bits` bits.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    bytes: Vec<u8>,
    lambda_bits: u32,
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecretKey")
            .field("lambda_bits", &self.lambda_bits)
            .finish_non_exhaustive()
    }
}

impl SecretKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.is_empty() {
            return param("key must not be empty");
        }
        Ok(Self {
            bytes: bytes.to_vec(),
            lambda_bits: bytes.len() as u32 * 8,
        })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn lambda_bits(&self) -> u32 {
        self.lambda_bits
    }
}

/// Draws a fresh `lambda_bits`-bit key. With `seed` set the key is a
/// deterministic function of the seed.
pub fn key_gen(lambda_bits: u32, seed: Option<u64>) -> Result<SecretKey> {
    if lambda_bits == 0 || !lambda_bits.is_multiple_of(8) {
        return param(format!("key length {lambda_bits} is not a positive multiple of 8"));
    }
    let mut rng = match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    };
    Ok(key_from_rng(lambda_bits, &mut rng))
}

pub(crate) fn key_from_rng<R: RngCore>(lambda_bits: u32, rng: &mut R) -> SecretKey {
    let mut bytes = vec![0u8; (lambda_bits / 8) as usize];
    rng.fill_bytes(&mut bytes);
    SecretKey { bytes, lambda_bits }
}
