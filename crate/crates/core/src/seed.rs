// Seed derivation so that every random object in a run is a pure function of
// the master seed and a tag.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_mul(GOLDEN)))
}

pub(crate) mod tag {
    pub const PHI: u64 = 1;
    pub const SRHT_S_SIGNS: u64 = 2;
    pub const SRHT_S_PERM: u64 = 3;
    pub const NOISE: u64 = 4;
    pub const PSI: u64 = 5;
    pub const OMEGA: u64 = 6;
    pub const SRHT_T_SIGNS: u64 = 7;
    pub const SRHT_T_PERM: u64 = 8;
    pub const NOISE_FIRST: u64 = 11;
    pub const NOISE_SECOND: u64 = 12;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_separate_streams() {
        let a = derive(7, tag::PHI);
        let b = derive(7, tag::PSI);
        assert_ne!(a, b);
        assert_eq!(a, derive(7, tag::PHI));
        assert_ne!(derive(7, 1), derive(8, 1));
    }
}
