use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Seeded generator on an independent stream, so that separate stages of a
/// run driven by one seed never share random draws.
pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) mod stream {
    pub const SPLIT: u64 = 1;
    pub const KFOLD: u64 = 2;
    pub const UNDERSAMPLE: u64 = 3;
    pub const SMOTE: u64 = 4;
    pub const INIT: u64 = 5;
    pub const SHUFFLE: u64 = 6;
    pub const BAT: u64 = 7;
    pub const SYNTH: u64 = 8;
    pub const VALIDATION: u64 = 9;
}
