//! Parameter tables for the integer tanh kernel: 32 (E, r, b) triples indexed by
//! the 5-bit key built from an input's exponent LSBs and mantissa MSBs, plus the
//! two threshold bit patterns.
//!
//! Tables are validated at load time so the kernel can do an unchecked signed
//! mantissa add: for every index, every reachable input mantissa must land in
//! [0, 127] after `(m >> r) + b`. A runtime clamp would mask generator bugs.

use serde::{Deserialize, Serialize};

pub const TABLE_LEN: usize = 32;

/// Bit pattern of the bypass threshold 0.25.
pub const T1_BITS: u16 = 0x3E80;
/// Bit pattern of the saturation threshold 3.75.
pub const T2_BITS: u16 = 0x4070;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("format must be \"bfloat16\", got {0:?}")]
    Format(String),
    #[error("index scheme must be 2 exponent LSBs + 3 mantissa MSBs, got {exp}+{man}")]
    IndexScheme { exp: u8, man: u8 },
    #[error("threshold patterns invalid: t1={t1:#06X} t2={t2:#06X} (need positive finite t1 < t2)")]
    Thresholds { t1: u16, t2: u16 },
    #[error("shift out of range at index {t}: r = {r} (must be 0..=7)")]
    ShiftRange { t: usize, r: u8 },
    #[error("mantissa overflow at index {t}: m = {m} gives (m >> {r}) + {b} = {out}, outside [0, 127]")]
    MantissaOverflow { t: usize, m: u8, r: u8, b: i16, out: i16 },
    #[error("table JSON did not parse: {0}")]
    Parse(#[from] serde_json::Error),
}

/// One kernel parameter set. Serializes to the documented JSON schema; field
/// order in the struct fixes the output field order, so serialization is
/// byte-stable across runs.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ParamTable {
    pub format: String,
    pub exp_lsb_bits: u8,
    pub man_msb_bits: u8,
    #[serde(with = "hex_u16")]
    pub t1_bits: u16,
    #[serde(with = "hex_u16")]
    pub t2_bits: u16,
    #[serde(rename = "E")]
    pub e: [u8; TABLE_LEN],
    pub r: [u8; TABLE_LEN],
    pub b: [i16; TABLE_LEN],
    pub provenance: String,
}

impl ParamTable {
    pub fn new(e: [u8; TABLE_LEN], r: [u8; TABLE_LEN], b: [i16; TABLE_LEN], provenance: String) -> Self {
        ParamTable {
            format: "bfloat16".to_owned(),
            exp_lsb_bits: 2,
            man_msb_bits: 3,
            t1_bits: T1_BITS,
            t2_bits: T2_BITS,
            e,
            r,
            b,
            provenance,
        }
    }

    /// The shipped reference parameters, embedded at compile time and validated
    /// on first use.
    pub fn reference() -> &'static ParamTable {
        static REFERENCE: once_cell::sync::Lazy<ParamTable> = once_cell::sync::Lazy::new(|| {
            let t = ParamTable::from_json_str(include_str!("../assets/reference_table.json"))
                .expect("embedded reference table parses");
            t.validate().expect("embedded reference table is valid");
            t
        });
        &REFERENCE
    }

    pub fn from_json_str(s: &str) -> Result<Self, TableError> {
        let t: ParamTable = serde_json::from_str(s)?;
        Ok(t)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    /// Check every structural invariant. Cheap (32 × 16 mantissa probes).
    pub fn validate(&self) -> Result<(), TableError> {
        if self.format != "bfloat16" {
            return Err(TableError::Format(self.format.clone()));
        }
        if self.exp_lsb_bits != 2 || self.man_msb_bits != 3 {
            return Err(TableError::IndexScheme {
                exp: self.exp_lsb_bits,
                man: self.man_msb_bits,
            });
        }
        let (t1, t2) = (self.t1_bits, self.t2_bits);
        if t1 & 0x8000 != 0 || t2 & 0x8000 != 0 || t1 >= t2 || t2 >= 0x7F80 {
            return Err(TableError::Thresholds { t1, t2 });
        }
        for t in 0..TABLE_LEN {
            if self.r[t] > 7 {
                return Err(TableError::ShiftRange { t, r: self.r[t] });
            }
            // mantissas reaching index t are exactly those whose 3 MSBs equal t's
            // low bits; (m >> r) + b is monotone in m but probing all 16 is cheap
            let m_lo = ((t as u8) & 0b111) << 4;
            for m in m_lo..=m_lo + 15 {
                let out = ((m >> self.r[t]) as i16) + self.b[t];
                if !(0..=127).contains(&out) {
                    return Err(TableError::MantissaOverflow {
                        t,
                        m,
                        r: self.r[t],
                        b: self.b[t],
                        out,
                    });
                }
            }
        }
        Ok(())
    }

    /// Two-column text layout for eyeball diffing: each line pairs the index's
    /// 5-bit string with its E, r, b. Left column walks 00111..00000 then
    /// 11111..11000; right column 10111..10000 then 01111..01000.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        out.push_str("index  E    r  b     |  index  E    r  b\n");
        let row = |t: usize| -> String {
            format!("{:05b}  {:3}  {}  {:4}", t, self.e[t], self.r[t], self.b[t])
        };
        for i in 0..16 {
            let (left, right) = if i < 8 {
                (7 - i, 23 - i)
            } else {
                (31 - (i - 8), 15 - (i - 8))
            };
            out.push_str(&format!("{}  |  {}\n", row(left), row(right)));
        }
        out
    }
}

pub(crate) mod hex_u16 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u16, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:#06X}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u16, D::Error> {
        let s = String::deserialize(d)?;
        let digits = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .unwrap_or(&s);
        u16::from_str_radix(digits, 16).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bf16::Bf16;

    #[test]
    fn thresholds_decode_to_the_stated_reals() {
        assert_eq!(Bf16(T1_BITS).decode(), 0.25);
        assert_eq!(Bf16(T2_BITS).decode(), 3.75);
    }

    #[test]
    fn reference_table_loads_and_validates() {
        let t = ParamTable::reference();
        assert_eq!(t.e[0b11000], 126);
        assert_eq!(t.r[0b11000], 0);
        assert_eq!(t.b[0b11000], 65);
        assert_eq!(t.e[0b01111], 125);
        assert_eq!(t.b[0b01111], -18);
        assert_eq!(t.e[0b10000], 125);
        assert_eq!(t.b[0b10000], 112);
        assert_eq!((t.t1_bits, t.t2_bits), (T1_BITS, T2_BITS));
    }

    #[test]
    fn json_round_trip_preserves_the_table() {
        let t = ParamTable::reference();
        let json = t.to_json_string();
        let back = ParamTable::from_json_str(&json).unwrap();
        assert_eq!(&back, t);
        // and re-serializing is byte-identical (stable field order + formatting)
        assert_eq!(back.to_json_string(), json);
        assert!(json.contains("\"t1_bits\": \"0x3E80\""));
    }

    #[test]
    fn validation_rejects_broken_tables() {
        let good = ParamTable::reference().clone();

        let mut bad = good.clone();
        bad.r[3] = 8;
        assert!(matches!(bad.validate(), Err(TableError::ShiftRange { t: 3, r: 8 })));

        let mut bad = good.clone();
        bad.b[0b11000] = 120; // max reachable m = 127 >> 0 = 127; +120 overflows
        assert!(matches!(bad.validate(), Err(TableError::MantissaOverflow { .. })));

        let mut bad = good.clone();
        bad.b[0b01001] = -70; // min reachable m = 16 >> 0 = 16; -70 underflows
        assert!(matches!(bad.validate(), Err(TableError::MantissaOverflow { .. })));

        let mut bad = good.clone();
        bad.format = "fp16".into();
        assert!(matches!(bad.validate(), Err(TableError::Format(_))));

        let mut bad = good.clone();
        bad.t2_bits = T1_BITS;
        assert!(matches!(bad.validate(), Err(TableError::Thresholds { .. })));

        let mut bad = good;
        bad.exp_lsb_bits = 3;
        assert!(matches!(bad.validate(), Err(TableError::IndexScheme { .. })));
    }

    #[test]
    fn dump_layout_pairs_the_published_columns() {
        let text = ParamTable::reference().dump_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 17); // header + 16 rows
        // first data row pairs 00111 with 10111
        assert!(lines[1].starts_with("00111  126  6   126"));
        assert!(lines[1].contains("10111  126  1     4"));
        // row 9 starts the second block: 11111 with 01111
        assert!(lines[9].starts_with("11111  126  4   110"));
        assert!(lines[9].contains("01111  125  0   -18"));
        // the canonical eyeball rows
        assert!(text.contains("11000  126  0    65"));
        assert!(text.contains("01000  125  1     1"));
        assert!(text.contains("10000  125  0   112"));
    }
}
