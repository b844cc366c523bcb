//! Unit-suffixed quantities: `"650um"`, `"8.07MHz"`, `"300 V"` or a bare SI number.

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;

/// (suffix, power of ten to SI)
type Table = &'static [(&'static str, i32)];

const LENGTH: Table = &[("m", 0), ("cm", -2), ("mm", -3), ("um", -6), ("µm", -6), ("μm", -6), ("nm", -9)];
const VOLTAGE: Table = &[("V", 0), ("mV", -3), ("kV", 3)];
const FREQUENCY: Table = &[("Hz", 0), ("kHz", 3), ("MHz", 6), ("GHz", 9)];
const TIME: Table = &[("s", 0), ("ms", -3), ("us", -6), ("µs", -6), ("μs", -6), ("ns", -9)];
const FIELD: Table = &[("V/m", 0), ("mV/m", -3), ("V/cm", 2), ("V/mm", 3)];

/// Parses `text` against `table`, picking the longest matching suffix.
pub fn parse_quantity(text: &str, table: Table, what: &str) -> Result<f64, String> {
    let t = text.trim();
    let best = table
        .iter()
        .filter(|(s, _)| t.ends_with(s))
        .max_by_key(|(s, _)| s.len());
    let (number, shift) = match best {
        Some((s, p)) => (t[..t.len() - s.len()].trim_end(), *p),
        None => (t, 0),
    };
    let units: Vec<&str> = table.iter().map(|(s, _)| *s).collect();
    let bad = || format!("cannot read {what} `{text}` (expected a number with one of {})", units.join(", "));
    // fold the prefix into the decimal exponent so "3.24mm" rounds once
    let (mantissa, exponent) = match number.find(['e', 'E']) {
        Some(i) => (&number[..i], number[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (number, 0),
    };
    if mantissa.is_empty() || mantissa.contains(['e', 'E']) {
        return Err(bad());
    }
    let v: f64 = format!("{mantissa}e{}", exponent + shift).parse().map_err(|_| bad())?;
    if !v.is_finite() {
        return Err(format!("{what} `{text}` is not finite"));
    }
    Ok(v)
}

macro_rules! quantity {
    ($name:ident, $table:expr, $what:literal, $base:literal) => {
        #[doc = concat!("A ", $what, " in SI units (", $base, ").")]
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl std::str::FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                parse_quantity(s, $table, $what).map($name)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&format!("{}{}", self.0, $base))
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                struct V;
                impl<'de> Visitor<'de> for V {
                    type Value = $name;
                    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        write!(f, "a {} as a number in {} or a unit-suffixed string", $what, $base)
                    }
                    fn visit_f64<E: de::Error>(self, v: f64) -> Result<$name, E> {
                        Ok($name(v))
                    }
                    fn visit_i64<E: de::Error>(self, v: i64) -> Result<$name, E> {
                        Ok($name(v as f64))
                    }
                    fn visit_u64<E: de::Error>(self, v: u64) -> Result<$name, E> {
                        Ok($name(v as f64))
                    }
                    fn visit_str<E: de::Error>(self, v: &str) -> Result<$name, E> {
                        v.parse().map_err(E::custom)
                    }
                }
                d.deserialize_any(V)
            }
        }
    };
}

quantity!(Length, LENGTH, "length", "m");
quantity!(Voltage, VOLTAGE, "voltage", "V");
quantity!(Frequency, FREQUENCY, "frequency", "Hz");
quantity!(Duration, TIME, "duration", "s");
quantity!(ElectricField, FIELD, "electric field", "V/m");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        assert_eq!("650um".parse::<Length>().unwrap().0, 650e-6);
        assert_eq!("650 µm".parse::<Length>().unwrap().0, 650e-6);
        assert_eq!("1.5e2mm".parse::<Length>().unwrap().0, 0.15);
        assert_eq!("-2.5um".parse::<Length>().unwrap().0, -2.5e-6);
        assert_eq!("3.24mm".parse::<Length>().unwrap().0, 3.24e-3);
        assert_eq!("1e-3".parse::<Length>().unwrap().0, 1e-3);
        assert_eq!("2m".parse::<Length>().unwrap().0, 2.0);
        assert_eq!("8.07MHz".parse::<Frequency>().unwrap().0, 8.07e6);
        assert_eq!("0.3kV".parse::<Voltage>().unwrap().0, 300.0);
        assert_eq!("1.5 ms".parse::<Duration>().unwrap().0, 1.5e-3);
        assert_eq!("2V/cm".parse::<ElectricField>().unwrap().0, 200.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!("650 furlong".parse::<Length>().is_err());
        assert!("MHz".parse::<Frequency>().is_err());
        assert!("inf".parse::<Voltage>().is_err());
        assert!("1e400".parse::<Voltage>().is_err());
        assert!("1e2e3V".parse::<Voltage>().is_err());
        assert!("3V".parse::<Length>().is_err());
    }

    #[test]
    fn serialized_form_parses_back_exactly() {
        for v in [650e-6, 3.24e-3, 0.1 + 0.2, 1e-300, 123456789.123] {
            let s = serde_json::to_string(&Length(v)).unwrap();
            let back: Length = serde_json::from_str(&s).unwrap();
            assert_eq!(back.0, v, "{s}");
        }
    }
}
