//! Cross-chain asset movement between two simulated chains: hash-time-locked
//! atomic swaps and a liquidity-pool bridge with a burn-mint variant.
//!
//! Chains here are plain asset ledgers with simulated clocks; parties are
//! named, and the only cryptography that matters to the protocols is the
//! hashlock itself.

mod bridge;
mod swap;

pub use bridge::{BridgeError, BridgeEvent, BridgeMode, BridgeWorld, Direction};
pub use swap::{
    explore_swap_interleavings, run_atomic_swap, ExplorationReport, LegState, SwapEvent,
    SwapScenario, SwapTranscript,
};

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::crypto::{sha256, HashDigest};

/// The hashlock hash: m = H(k).
pub fn hashlock(key: &[u8]) -> HashDigest {
    sha256(key)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HtlcError {
    InsufficientFunds { balance: u64, needed: u64 },
    /// Expiry not in the future at creation time.
    PastExpiry { now: u64, expiry: u64 },
    UnknownContract,
    /// Presented key does not hash to the lock.
    BadKey,
    /// Claim attempted at or past expiry.
    Expired { now: u64, expiry: u64 },
    /// Refund attempted before expiry.
    NotYetExpired { now: u64, expiry: u64 },
    /// Contract already claimed or refunded.
    AlreadyTerminal,
}

impl core::fmt::Display for HtlcError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            HtlcError::InsufficientFunds { balance, needed } => {
                write!(f, "balance {balance} below {needed}")
            }
            HtlcError::PastExpiry { now, expiry } => {
                write!(f, "expiry {expiry} not after now {now}")
            }
            HtlcError::UnknownContract => write!(f, "no such contract"),
            HtlcError::BadKey => write!(f, "key does not match the hashlock"),
            HtlcError::Expired { now, expiry } => write!(f, "expired at {expiry}, now {now}"),
            HtlcError::NotYetExpired { now, expiry } => {
                write!(f, "refund locked until {expiry}, now {now}")
            }
            HtlcError::AlreadyTerminal => write!(f, "contract already settled"),
        }
    }
}

/// Terminal states are exclusive: a contract is claimed xor refunded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HtlcState {
    Open,
    Claimed { claimant: String, key: Vec<u8> },
    Refunded,
}

/// An escrow releasing its deposit to whoever presents the hashlock
/// preimage before expiry, else refunding the depositor.
#[derive(Clone, Debug)]
pub struct Htlc {
    pub depositor: String,
    pub amount: u64,
    pub hashlock: HashDigest,
    pub expiry: u64,
    pub state: HtlcState,
}

/// A single-token ledger with a simulated clock, HTLC escrows, and the
/// public log of revealed preimages (an on-chain claim exposes its key).
#[derive(Clone, Debug)]
pub struct AssetChain {
    pub name: String,
    pub token: String,
    pub now: u64,
    balances: alloc::collections::BTreeMap<String, u64>,
    htlcs: Vec<Htlc>,
    revealed: Vec<(Vec<u8>, u64)>,
}

impl AssetChain {
    pub fn new(name: &str, token: &str, funding: &[(&str, u64)]) -> AssetChain {
        AssetChain {
            name: name.to_string(),
            token: token.to_string(),
            now: 0,
            balances: funding
                .iter()
                .map(|(who, amount)| (who.to_string(), *amount))
                .collect(),
            htlcs: Vec::new(),
            revealed: Vec::new(),
        }
    }

    pub fn balance(&self, who: &str) -> u64 {
        self.balances.get(who).copied().unwrap_or(0)
    }

    pub fn credit(&mut self, who: &str, amount: u64) {
        *self.balances.entry(who.to_string()).or_insert(0) += amount;
    }

    pub fn debit(&mut self, who: &str, amount: u64) -> Result<(), HtlcError> {
        let balance = self.balance(who);
        if balance < amount {
            return Err(HtlcError::InsufficientFunds {
                balance,
                needed: amount,
            });
        }
        *self.balances.get_mut(who).expect("checked") -= amount;
        Ok(())
    }

    /// Total tokens in circulation (balances plus open escrows).
    pub fn total_supply(&self) -> u64 {
        let held: u64 = self.balances.values().sum();
        let escrowed: u64 = self
            .htlcs
            .iter()
            .filter(|h| h.state == HtlcState::Open)
            .map(|h| h.amount)
            .sum();
        held + escrowed
    }

    pub fn htlc(&self, id: usize) -> Option<&Htlc> {
        self.htlcs.get(id)
    }

    /// Preimages made public by claims on this chain.
    pub fn revealed_keys(&self) -> &[(Vec<u8>, u64)] {
        &self.revealed
    }

    /// Escrow a deposit behind a hashlock and an expiry.
    pub fn htlc_create(
        &mut self,
        depositor: &str,
        amount: u64,
        hashlock: HashDigest,
        expiry: u64,
    ) -> Result<usize, HtlcError> {
        if expiry <= self.now {
            return Err(HtlcError::PastExpiry {
                now: self.now,
                expiry,
            });
        }
        self.debit(depositor, amount)?;
        self.htlcs.push(Htlc {
            depositor: depositor.to_string(),
            amount,
            hashlock,
            expiry,
            state: HtlcState::Open,
        });
        Ok(self.htlcs.len() - 1)
    }

    /// Unlock before expiry with the preimage; the asset goes to the caller
    /// and the key becomes publicly visible on this chain.
    pub fn htlc_claim(&mut self, id: usize, claimant: &str, key: &[u8]) -> Result<u64, HtlcError> {
        let now = self.now;
        let contract = self.htlcs.get_mut(id).ok_or(HtlcError::UnknownContract)?;
        if contract.state != HtlcState::Open {
            return Err(HtlcError::AlreadyTerminal);
        }
        if now >= contract.expiry {
            return Err(HtlcError::Expired {
                now,
                expiry: contract.expiry,
            });
        }
        if hashlock(key) != contract.hashlock {
            return Err(HtlcError::BadKey);
        }
        contract.state = HtlcState::Claimed {
            claimant: claimant.to_string(),
            key: key.to_vec(),
        };
        let amount = contract.amount;
        self.revealed.push((key.to_vec(), now));
        self.credit(claimant, amount);
        Ok(amount)
    }

    /// Return the deposit to its owner once the lock has expired unclaimed.
    pub fn htlc_refund(&mut self, id: usize) -> Result<u64, HtlcError> {
        let now = self.now;
        let contract = self.htlcs.get_mut(id).ok_or(HtlcError::UnknownContract)?;
        match contract.state {
            HtlcState::Open => {}
            _ => return Err(HtlcError::AlreadyTerminal),
        }
        if now < contract.expiry {
            return Err(HtlcError::NotYetExpired {
                now,
                expiry: contract.expiry,
            });
        }
        contract.state = HtlcState::Refunded;
        let amount = contract.amount;
        let depositor = contract.depositor.clone();
        self.credit(&depositor, amount);
        Ok(amount)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> AssetChain {
        AssetChain::new("X", "USDX", &[("Alice", 100), ("Bob", 50)])
    }

    #[test]
    fn claim_with_correct_key_before_expiry() {
        let mut c = chain();
        let key = b"secret";
        let id = c.htlc_create("Alice", 40, hashlock(key), 10).unwrap();
        assert_eq!(c.balance("Alice"), 60);
        let amount = c.htlc_claim(id, "Bob", key).unwrap();
        assert_eq!(amount, 40);
        assert_eq!(c.balance("Bob"), 90);
        // The key is now publicly visible on this chain.
        assert_eq!(c.revealed_keys().len(), 1);
        assert_eq!(c.revealed_keys()[0].0, key.to_vec());
    }

    #[test]
    fn wrong_key_leaves_escrow_intact() {
        let mut c = chain();
        let id = c.htlc_create("Alice", 40, hashlock(b"secret"), 10).unwrap();
        assert_eq!(c.htlc_claim(id, "Bob", b"guess"), Err(HtlcError::BadKey));
        assert_eq!(c.balance("Bob"), 50);
        assert_eq!(c.htlc(id).unwrap().state, HtlcState::Open);
    }

    #[test]
    fn claim_after_expiry_fails_even_with_correct_key() {
        let mut c = chain();
        let key = b"secret";
        let id = c.htlc_create("Alice", 40, hashlock(key), 10).unwrap();
        c.now = 10;
        assert_eq!(
            c.htlc_claim(id, "Bob", key),
            Err(HtlcError::Expired { now: 10, expiry: 10 })
        );
    }

    #[test]
    fn refund_timing() {
        let mut c = chain();
        let id = c.htlc_create("Alice", 40, hashlock(b"k"), 10).unwrap();
        assert_eq!(
            c.htlc_refund(id),
            Err(HtlcError::NotYetExpired { now: 0, expiry: 10 })
        );
        c.now = 10;
        assert_eq!(c.htlc_refund(id).unwrap(), 40);
        assert_eq!(c.balance("Alice"), 100);
        // Terminal states are exclusive.
        assert_eq!(c.htlc_refund(id), Err(HtlcError::AlreadyTerminal));
    }

    #[test]
    fn refund_after_claim_rejected() {
        let mut c = chain();
        let key = b"k";
        let id = c.htlc_create("Alice", 40, hashlock(key), 10).unwrap();
        c.htlc_claim(id, "Bob", key).unwrap();
        c.now = 10;
        assert_eq!(c.htlc_refund(id), Err(HtlcError::AlreadyTerminal));
        assert_eq!(c.htlc_claim(id, "Bob", key), Err(HtlcError::AlreadyTerminal));
    }

    #[test]
    fn past_expiry_rejected_at_creation() {
        let mut c = chain();
        c.now = 5;
        assert_eq!(
            c.htlc_create("Alice", 10, hashlock(b"k"), 5),
            Err(HtlcError::PastExpiry { now: 5, expiry: 5 })
        );
    }

    #[test]
    fn double_create_gives_independent_contracts() {
        let mut c = chain();
        let a = c.htlc_create("Alice", 10, hashlock(b"k"), 9).unwrap();
        let b = c.htlc_create("Alice", 10, hashlock(b"k"), 9).unwrap();
        assert_ne!(a, b);
        c.htlc_claim(a, "Bob", b"k").unwrap();
        assert_eq!(c.htlc(b).unwrap().state, HtlcState::Open);
    }

    #[test]
    fn supply_is_conserved_through_escrow() {
        let mut c = chain();
        let before = c.total_supply();
        let id = c.htlc_create("Alice", 25, hashlock(b"k"), 10).unwrap();
        assert_eq!(c.total_supply(), before);
        c.htlc_claim(id, "Bob", b"k").unwrap();
        assert_eq!(c.total_supply(), before);
    }
}
