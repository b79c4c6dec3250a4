use crate::dist::Element;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::streaming::SampleStream;

/// A machine holding `ell` samples of `p`, and of `q` in closeness mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Player {
    pub id: u64,
    pub samples_p: Vec<Element>,
    pub samples_q: Option<Vec<Element>>,
    coin_seed: u64,
}

impl Player {
    pub fn new(id: u64, samples_p: Vec<Element>, samples_q: Option<Vec<Element>>, coin_seed: u64) -> Self {
        Self {
            id,
            samples_p,
            samples_q,
            coin_seed,
        }
    }

    /// The player's private randomness.
    pub fn coins(&self) -> Rng {
        Rng::new(self.coin_seed, self.id)
    }

    pub fn samples_q(&self) -> &[Element] {
        self.samples_q.as_deref().unwrap_or(&[])
    }
}

/// Lazily materialized players: each new player takes the next `ell` samples
/// of every stream it holds, so player `i` owns stream block `i`.
#[derive(Debug)]
pub struct PlayerSource {
    stream_p: SampleStream,
    stream_q: Option<SampleStream>,
    ell: usize,
    created: u64,
    limit: Option<u64>,
}

impl PlayerSource {
    pub fn uniformity(stream: SampleStream, ell: usize) -> Result<Self> {
        Self::build(stream, None, ell)
    }

    pub fn closeness(stream_p: SampleStream, stream_q: SampleStream, ell: usize) -> Result<Self> {
        if stream_p.n() != stream_q.n() {
            return Err(Error::DomainMismatch {
                left: stream_p.n(),
                right: stream_q.n(),
            });
        }
        Self::build(stream_p, Some(stream_q), ell)
    }

    fn build(stream_p: SampleStream, stream_q: Option<SampleStream>, ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::param("ell", "players must hold at least one sample"));
        }
        Ok(Self {
            stream_p,
            stream_q,
            ell,
            created: 0,
            limit: None,
        })
    }

    /// At most `players` players can be created.
    pub fn with_limit(mut self, players: u64) -> Self {
        self.limit = Some(players);
        self
    }

    pub fn n(&self) -> usize {
        self.stream_p.n()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn is_closeness(&self) -> bool {
        self.stream_q.is_some()
    }

    /// Samples held by one player across all its streams.
    pub fn samples_per_player(&self) -> usize {
        if self.is_closeness() {
            2 * self.ell
        } else {
            self.ell
        }
    }

    pub fn players_created(&self) -> u64 {
        self.created
    }

    pub fn samples_drawn(&self) -> u64 {
        self.stream_p.drawn() + self.stream_q.as_ref().map_or(0, |s| s.drawn())
    }

    pub(crate) fn next_player(&mut self, coin_seed: u64) -> Result<Player> {
        if self.limit.is_some_and(|l| self.created >= l) {
            return Err(Error::InsufficientPlayers(self.created));
        }
        let exhausted = |_| Error::InsufficientPlayers(self.created);
        let samples_p = block(&mut self.stream_p, self.ell).map_err(exhausted)?;
        let samples_q = match self.stream_q.as_mut() {
            Some(s) => Some(block(s, self.ell).map_err(exhausted)?),
            None => None,
        };
        let id = self.created;
        self.created += 1;
        Ok(Player::new(id, samples_p, samples_q, coin_seed))
    }
}

fn block(stream: &mut SampleStream, ell: usize) -> Result<Vec<Element>> {
    (0..ell).map(|_| stream.next_sample()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::make_uniform;

    #[test]
    fn players_take_consecutive_blocks() {
        let u = make_uniform(50).unwrap();
        let mut reference = SampleStream::new(&u, Rng::new(4, 0));
        let mut src = PlayerSource::uniformity(SampleStream::new(&u, Rng::new(4, 0)), 3).unwrap();
        for id in 0..5 {
            let p = src.next_player(9).unwrap();
            assert_eq!(p.id, id);
            let expected: Vec<_> = (0..3).map(|_| reference.next_sample().unwrap()).collect();
            assert_eq!(p.samples_p, expected);
            assert!(p.samples_q.is_none());
        }
        assert_eq!(src.samples_drawn(), 15);
    }

    #[test]
    fn limit_raises_insufficient_players() {
        let u = make_uniform(4).unwrap();
        let mut src = PlayerSource::uniformity(SampleStream::new(&u, Rng::new(1, 0)), 2)
            .unwrap()
            .with_limit(2);
        src.next_player(0).unwrap();
        src.next_player(0).unwrap();
        assert_eq!(src.next_player(0), Err(Error::InsufficientPlayers(2)));

        let short = SampleStream::new(&u, Rng::new(1, 0)).with_limit(3);
        let mut src = PlayerSource::uniformity(short, 2).unwrap();
        src.next_player(0).unwrap();
        assert_eq!(src.next_player(0), Err(Error::InsufficientPlayers(1)));
    }
}
