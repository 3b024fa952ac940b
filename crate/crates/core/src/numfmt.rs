//! Decimal formatting and seed derivation shared by every file writer.

/// Formats `v` with 17 significant digits, which is enough for any `f64` to
/// survive a text round trip bit-for-bit.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// JSON number that serializes with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact(pub f64);

impl serde::Serialize for Exact {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("cannot serialize a non-finite number"));
        }
        let raw = serde_json::value::RawValue::from_string(fmt17(self.0))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Exact {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        f64::deserialize(deserializer).map(Exact)
    }
}

pub(crate) mod exact_vec {
    use super::Exact;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|&x| Exact(x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Exact>::deserialize(d)?.into_iter().map(|e| e.0).collect())
    }
}

pub(crate) mod exact_f64 {
    use super::Exact;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        Exact(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Exact::deserialize(d)?.0)
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a base seed and a label path. Stable across
/// platforms and toolchains, so per-cell seeds never depend on run order.
pub fn derive_seed(base: u64, labels: &[&str]) -> u64 {
    let mut h = mix(base);
    for label in labels {
        // FNV-1a over the label, folded into the running state.
        let mut f: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            f ^= u64::from(b);
            f = f.wrapping_mul(0x0100_0000_01b3);
        }
        h = mix(h ^ f);
    }
    h
}
