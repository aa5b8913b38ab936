//! Deterministic blockchain workbench core.
//!
//! Everything in this crate is a pure function of its inputs: no clocks, no
//! sockets, no filesystem. Time is simulated, randomness is seeded, and every
//! run is reproducible bit for bit. The companion CLI crate carries IO, file
//! formats, and scenario plumbing.
//!
//! Module map:
//!
//! * [`crypto`] — hashing, Base58Check addresses, toy/secp256k1 curve
//!   arithmetic, ECDSA-style signatures, commitments, Merkle trees.
//! * [`utxo`] — transaction-output ledger: validation, fees, balances,
//!   coinbase, consolidation, joint payments.
//! * [`chain`] — block structure, compact difficulty, proof-of-work mining,
//!   block validation, longest-chain selection, retargeting.
//! * [`account`] — account/contract state machine with gas metering and
//!   native contract programs (token, train, hotel, booking).
//! * [`netsim`] — round-based gossip network simulator with honest, selfish,
//!   and silent miners, plus double-spend race trials.
//! * [`analysis`] — closed-form security math: efficiency, difficulty bounds,
//!   unfairness, and finality probabilities.
//! * [`plasma`] — layer-2 exit game: root contract, deposits, dispute-windowed
//!   withdrawals, fraud proofs.
//! * [`interop`] — HTLC atomic swaps and pooled/burn-mint bridges between two
//!   simulated chains.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod account;
pub mod analysis;
pub mod chain;
pub mod crypto;
pub mod interop;
pub mod netsim;
pub mod plasma;
pub mod utxo;
