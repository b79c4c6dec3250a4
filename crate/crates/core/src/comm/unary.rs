use crate::comm::bits::{BitReader, Bits};
use crate::error::{Error, Result};

/// `b` ones followed by a single zero (`b + 1` bits).
pub fn unary_encode(b: u64) -> Bits {
    let mut out = Bits::new();
    unary_encode_into(b, &mut out);
    out
}

pub fn unary_encode_into(b: u64, out: &mut Bits) {
    for _ in 0..b {
        out.push(true);
    }
    out.push(false);
}

/// Decodes one complete codeword; trailing bits are an error.
pub fn unary_decode(bits: &Bits) -> Result<u64> {
    let mut r = bits.reader();
    let v = unary_read(&mut r)?;
    if r.remaining() != 0 {
        return Err(Error::MalformedCodeword(format!(
            "{} bits after the terminating zero",
            r.remaining()
        )));
    }
    Ok(v)
}

pub fn unary_read(r: &mut BitReader<'_>) -> Result<u64> {
    let mut v = 0;
    loop {
        match r.read_bit() {
            Ok(true) => v += 1,
            Ok(false) => return Ok(v),
            Err(_) => {
                return Err(Error::MalformedCodeword(
                    "unary codeword has no terminating zero".into(),
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(unary_encode(0).to_string_01(), "0");
        assert_eq!(unary_encode(3).to_string_01(), "1110");
    }

    #[test]
    fn malformed() {
        assert!(unary_decode(&Bits::from_01("111").unwrap()).is_err());
        assert!(unary_decode(&Bits::new()).is_err());
        assert!(unary_decode(&Bits::from_01("100").unwrap()).is_err());
    }
}
