//! Serialization of extended reals: `±∞` become the strings `"inf"` / `"-inf"`.

use serde::Serializer;

pub fn extended<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_infinite() {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*x)
    }
}
