use crate::comm::bits::Bits;
use crate::comm::players::{Player, PlayerSource};
use crate::comm::transcript::Transcript;
use crate::error::Result;
use crate::rng::Rng;
use crate::streaming::{element_bits, MemoryLedger};

/// Ledger slot holding the partial transcript.
pub const TRANSCRIPT_SLOT: &str = "transcript";
/// Ledger slot holding the samples of the player currently being simulated.
pub const PLAYER_SLOT: &str = "player_samples";

/// Asks `player` a question and appends the answer to `transcript`.
///
/// The question is the closure: it sees only the player's own state (and
/// whatever the caller captured from the blackboard) and returns the answer
/// bits. Nothing is evaluated if the one-pass rule forbids the query.
pub fn query_player<F>(transcript: &mut Transcript, player: &Player, question: F) -> Result<Bits>
where
    F: FnOnce(&Player) -> Bits,
{
    transcript.check_turn(player.id)?;
    let answer = question(player);
    transcript.record(player.id, &answer)?;
    Ok(answer)
}

/// The referee's side of one protocol run.
///
/// Hands out fresh players, prices their answers on the transcript and owns
/// the referee's private randomness. When a memory ledger is attached, the run
/// is being simulated as a one-pass streaming algorithm and the ledger holds
/// the partial transcript plus the active player's samples.
pub struct Session<'l> {
    source: PlayerSource,
    transcript: Transcript,
    coins: Rng,
    player_coin_seed: u64,
    ledger: Option<&'l mut MemoryLedger>,
    active: Option<u64>,
}

impl<'l> Session<'l> {
    pub fn new(source: PlayerSource, mut coins: Rng) -> Self {
        let player_coin_seed = coins.next_u64();
        Self {
            source,
            transcript: Transcript::new(),
            coins,
            player_coin_seed,
            ledger: None,
            active: None,
        }
    }

    pub fn with_ledger(mut self, ledger: &'l mut MemoryLedger) -> Self {
        self.ledger = Some(ledger);
        self
    }

    pub fn n(&self) -> usize {
        self.source.n()
    }

    pub fn ell(&self) -> usize {
        self.source.ell()
    }

    pub fn is_closeness(&self) -> bool {
        self.source.is_closeness()
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn total_bits(&self) -> u64 {
        self.transcript.total_bits()
    }

    pub fn coins(&mut self) -> &mut Rng {
        &mut self.coins
    }

    pub fn players_created(&self) -> u64 {
        self.source.players_created()
    }

    pub fn samples_drawn(&self) -> u64 {
        self.source.samples_drawn()
    }

    /// Retires the active player and materializes the next one.
    pub fn next_player(&mut self) -> Result<Player> {
        if let Some(ledger) = self.ledger.as_deref_mut() {
            ledger.release(PLAYER_SLOT);
        }
        self.active = None;
        let player = self.source.next_player(self.player_coin_seed)?;
        if let Some(ledger) = self.ledger.as_deref_mut() {
            let bits = self.source.samples_per_player() as u64 * element_bits(self.source.n());
            ledger.set(PLAYER_SLOT, bits)?;
        }
        self.active = Some(player.id);
        Ok(player)
    }

    /// Queries `player`; see [`query_player`].
    pub fn query<F>(&mut self, player: &Player, question: F) -> Result<Bits>
    where
        F: FnOnce(&Player) -> Bits,
    {
        Ok(self
            .query_within(None, player, question)?
            .expect("uncapped queries always complete"))
    }

    /// Like [`Session::query`], but refuses to read an answer that would take
    /// the transcript past `cap` bits. Returns `None` in that case and leaves
    /// the transcript unchanged.
    pub fn query_within<F>(&mut self, cap: Option<u64>, player: &Player, question: F) -> Result<Option<Bits>>
    where
        F: FnOnce(&Player) -> Bits,
    {
        self.transcript.check_turn(player.id)?;
        let answer = question(player);
        if cap.is_some_and(|c| self.transcript.total_bits() + answer.len() as u64 > c) {
            return Ok(None);
        }
        self.transcript.record(player.id, &answer)?;
        if let Some(ledger) = self.ledger.as_deref_mut() {
            ledger.set(TRANSCRIPT_SLOT, self.transcript.total_bits())?;
        }
        Ok(Some(answer))
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }
}

impl std::fmt::Debug for Session<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("players_created", &self.source.players_created())
            .field("total_bits", &self.transcript.total_bits())
            .field("active", &self.active)
            .finish()
    }
}
