use std::collections::HashSet;

use crate::comm::bits::Bits;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"PTTR";
const VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Span {
    player_id: u64,
    start: usize,
    len: usize,
}

/// Ordered record of answer bits on the blackboard.
///
/// Only answers are stored and priced. Questions, addressing and anything the
/// referee broadcasts cost nothing. A player may answer several times in a
/// row, but once another player has spoken it is retired for good.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    spans: Vec<Span>,
    bits: Bits,
    current_player: Option<u64>,
    retired: HashSet<u64>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total_bits(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn current_player(&self) -> Option<u64> {
        self.current_player
    }

    /// Checks whether `player_id` may speak next without recording anything.
    pub fn check_turn(&self, player_id: u64) -> Result<()> {
        if self.retired.contains(&player_id) {
            return Err(Error::OnePassViolation {
                player: player_id,
                current: self.current_player.expect("a retired player implies a current one"),
            });
        }
        Ok(())
    }

    /// Appends an answer from `player_id`.
    pub fn record(&mut self, player_id: u64, answer: &Bits) -> Result<()> {
        if answer.is_empty() {
            return Err(Error::EmptyAnswer(player_id));
        }
        self.check_turn(player_id)?;
        if let Some(prev) = self.current_player {
            if prev != player_id {
                self.retired.insert(prev);
            }
        }
        self.current_player = Some(player_id);
        self.spans.push(Span {
            player_id,
            start: self.bits.len(),
            len: answer.len(),
        });
        self.bits.extend_from(answer);
        Ok(())
    }

    pub fn entry(&self, i: usize) -> (u64, Bits) {
        let s = self.spans[i];
        (s.player_id, self.bits.slice(s.start, s.len))
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, Bits)> + '_ {
        (0..self.spans.len()).map(|i| self.entry(i))
    }

    /// Serializes to the binary layout described in `docs/transcript-format.md`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.bits.len() / 8 + 4 * self.spans.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        put_varint(&mut out, self.spans.len() as u64);
        for (id, answer) in self.entries() {
            put_varint(&mut out, id);
            put_varint(&mut out, answer.len() as u64);
            out.extend_from_slice(&answer.to_bytes());
        }
        out
    }

    /// Parses and replays a serialized transcript, re-checking the one-pass rule.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let malformed = |what: &str| Error::MalformedCodeword(format!("transcript: {what}"));
        if bytes.len() < 5 || &bytes[..4] != MAGIC {
            return Err(malformed("bad magic"));
        }
        if bytes[4] != VERSION {
            return Err(malformed(&format!("unsupported version {}", bytes[4])));
        }
        let mut pos = 5;
        let count = get_varint(bytes, &mut pos).ok_or_else(|| malformed("truncated count"))?;
        let mut t = Transcript::new();
        for _ in 0..count {
            let id = get_varint(bytes, &mut pos).ok_or_else(|| malformed("truncated player id"))?;
            let len = get_varint(bytes, &mut pos).ok_or_else(|| malformed("truncated length"))? as usize;
            let nbytes = len.div_ceil(8);
            let body = bytes
                .get(pos..pos + nbytes)
                .ok_or_else(|| malformed("truncated answer bits"))?;
            pos += nbytes;
            t.record(id, &Bits::from_bytes(body, len)?)?;
        }
        if pos != bytes.len() {
            return Err(malformed("trailing bytes"));
        }
        Ok(t)
    }
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn get_varint(bytes: &[u8], pos: &mut usize) -> Option<u64> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *bytes.get(*pos)?;
        *pos += 1;
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Some(v);
        }
    }
    None
}
