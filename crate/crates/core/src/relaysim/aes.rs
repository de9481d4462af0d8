//! AES-256 block encryption and CTR keystream, implemented in-tree and
//! validated against the FIPS-197 / SP 800-38A example vectors.
//!
//! Encryption-only: CTR mode needs no inverse cipher.

const SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab,
    0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4,
    0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71,
    0xd8, 0x31, 0x15, 0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6,
    0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb,
    0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf, 0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45,
    0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44,
    0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73, 0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a,
    0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49,
    0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08, 0xba, 0x78, 0x25,
    0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e,
    0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1,
    0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb,
    0x16,
];

const RCON: [u8; 8] = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80];

fn xtime(b: u8) -> u8 {
    (b << 1) ^ if b & 0x80 != 0 { 0x1b } else { 0 }
}

/// AES-256 with expanded round keys; encryption direction only.
#[derive(Clone)]
pub struct Aes256 {
    round_keys: [[u8; 16]; 15],
}

impl Aes256 {
    pub fn new(key: &[u8; 32]) -> Self {
        let mut w = [0u32; 60];
        for (i, chunk) in key.chunks_exact(4).enumerate() {
            w[i] = u32::from_be_bytes(chunk.try_into().unwrap());
        }
        let sub_word = |x: u32| {
            u32::from_be_bytes(x.to_be_bytes().map(|b| SBOX[b as usize]))
        };
        for i in 8..60 {
            let mut temp = w[i - 1];
            if i % 8 == 0 {
                temp = sub_word(temp.rotate_left(8)) ^ ((RCON[i / 8 - 1] as u32) << 24);
            } else if i % 8 == 4 {
                temp = sub_word(temp);
            }
            w[i] = w[i - 8] ^ temp;
        }
        let mut round_keys = [[0u8; 16]; 15];
        for (r, rk) in round_keys.iter_mut().enumerate() {
            for c in 0..4 {
                rk[4 * c..4 * c + 4].copy_from_slice(&w[4 * r + c].to_be_bytes());
            }
        }
        Aes256 { round_keys }
    }

    pub fn encrypt_block(&self, block: &[u8; 16]) -> [u8; 16] {
        let mut s = *block;
        add_round_key(&mut s, &self.round_keys[0]);
        for round in 1..14 {
            sub_bytes(&mut s);
            shift_rows(&mut s);
            mix_columns(&mut s);
            add_round_key(&mut s, &self.round_keys[round]);
        }
        sub_bytes(&mut s);
        shift_rows(&mut s);
        add_round_key(&mut s, &self.round_keys[14]);
        s
    }
}

fn add_round_key(s: &mut [u8; 16], rk: &[u8; 16]) {
    for (a, b) in s.iter_mut().zip(rk) {
        *a ^= b;
    }
}

fn sub_bytes(s: &mut [u8; 16]) {
    for b in s.iter_mut() {
        *b = SBOX[*b as usize];
    }
}

/// State is column-major: byte `s[4c + r]` sits at row r, column c.
fn shift_rows(s: &mut [u8; 16]) {
    for r in 1..4 {
        let row = [s[r], s[4 + r], s[8 + r], s[12 + r]];
        for c in 0..4 {
            s[4 * c + r] = row[(c + r) % 4];
        }
    }
}

fn mix_columns(s: &mut [u8; 16]) {
    for c in 0..4 {
        let col: [u8; 4] = s[4 * c..4 * c + 4].try_into().unwrap();
        let all = col[0] ^ col[1] ^ col[2] ^ col[3];
        for r in 0..4 {
            s[4 * c + r] = col[r] ^ all ^ xtime(col[r] ^ col[(r + 1) % 4]);
        }
    }
}

/// CTR keystream with a big-endian 128-bit counter; chunked calls continue
/// the stream exactly where the previous call stopped.
pub struct Aes256Ctr {
    cipher: Aes256,
    counter: [u8; 16],
    keystream: [u8; 16],
    used: usize,
}

impl Aes256Ctr {
    pub fn new(key: &[u8; 32], nonce: &[u8; 16]) -> Self {
        Aes256Ctr {
            cipher: Aes256::new(key),
            counter: *nonce,
            keystream: [0; 16],
            used: 16,
        }
    }

    pub fn apply_keystream(&mut self, data: &mut [u8]) {
        for b in data.iter_mut() {
            if self.used == 16 {
                self.keystream = self.cipher.encrypt_block(&self.counter);
                self.used = 0;
                for byte in self.counter.iter_mut().rev() {
                    let (v, carry) = byte.overflowing_add(1);
                    *byte = v;
                    if !carry {
                        break;
                    }
                }
            }
            *b ^= self.keystream[self.used];
            self.used += 1;
        }
    }
}

/// Encrypt (or, identically, decrypt) a buffer in one shot.
pub fn ctr_transform(key: &[u8; 32], nonce: &[u8; 16], data: &[u8]) -> Vec<u8> {
    let mut out = data.to_vec();
    Aes256Ctr::new(key, nonce).apply_keystream(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> Vec<u8> {
        hex_decode(s)
    }

    fn hex_decode(s: &str) -> Vec<u8> {
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
            .collect()
    }

    #[test]
    fn fips197_appendix_c3_block() {
        let key: [u8; 32] = core::array::from_fn(|i| i as u8);
        let pt: [u8; 16] = h("00112233445566778899aabbccddeeff").try_into().unwrap();
        let ct = Aes256::new(&key).encrypt_block(&pt);
        assert_eq!(ct.to_vec(), h("8ea2b7ca516745bfeafc49904b496089"));
    }

    #[test]
    fn sp800_38a_ctr_aes256() {
        let key: [u8; 32] =
            h("603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4")
                .try_into()
                .unwrap();
        let nonce: [u8; 16] = h("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff").try_into().unwrap();
        let pt = h("6bc1bee22e409f96e93d7e117393172a\
                    ae2d8a571e03ac9c9eb76fac45af8e51\
                    30c81c46a35ce411e5fbc1191a0a52ef\
                    f69f2445df4f9b17ad2b417be66c3710");
        let ct = ctr_transform(&key, &nonce, &pt);
        assert_eq!(
            ct,
            h("601ec313775789a5b7a7f504bbf3d228\
               f443e3ca4d62b59aca84e990cacaf5c5\
               2b0930daa23de94ce87017ba2d84988d\
               dfc9c58db67aada613c2dd08457941a6")
        );
        // CTR is its own inverse.
        assert_eq!(ctr_transform(&key, &nonce, &ct), pt);
    }

    #[test]
    fn counter_carries_across_byte_boundary() {
        let key = [0xaa; 32];
        let nonce: [u8; 16] = h("000000000000000000000000000000fe").try_into().unwrap();
        let ct = ctr_transform(&key, &nonce, &[0u8; 48]);
        assert_eq!(
            ct,
            h("b73f64e20e8c45b74bea8499ec21927d\
               cbeedcd366568c882b7556f214b24117\
               5745dad563783527bf971abc319f6c2c")
        );
    }

    #[test]
    fn chunked_keystream_matches_one_shot() {
        let key = [7u8; 32];
        let nonce = [3u8; 16];
        let data: Vec<u8> = (0..100u8).collect();
        let whole = ctr_transform(&key, &nonce, &data);
        let mut chunked = data.clone();
        let mut ctr = Aes256Ctr::new(&key, &nonce);
        for chunk in chunked.chunks_mut(7) {
            ctr.apply_keystream(chunk);
        }
        assert_eq!(chunked, whole);
    }
}
