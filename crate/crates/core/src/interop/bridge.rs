use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::AssetChain;

/// Pooled: reserves on both chains fund transfers. Burn-mint: the operator
/// owns chain X and mints/burns there instead of holding a pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BridgeMode {
    Pooled,
    BurnMint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Direction {
    XToY,
    YToX,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BridgeError {
    ZeroAmount,
    InsufficientFunds { balance: u64, needed: u64 },
    /// Destination reserve cannot cover the payout; the deposit leg is
    /// refunded.
    InsufficientReserve { reserve: u64, needed: u64 },
    WrongMode,
}

impl core::fmt::Display for BridgeError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BridgeError::ZeroAmount => write!(f, "amount must be positive"),
            BridgeError::InsufficientFunds { balance, needed } => {
                write!(f, "sender balance {balance} below {needed}")
            }
            BridgeError::InsufficientReserve { reserve, needed } => {
                write!(f, "destination reserve {reserve} below {needed}; deposit refunded")
            }
            BridgeError::WrongMode => write!(f, "operation not available in this bridge mode"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BridgeEvent {
    pub step: String,
    pub detail: String,
}

/// One pending transfer in the operator's journal: the deposit leg landed,
/// the payout leg has not. Replayed on restart so a crash between legs
/// cannot strand funds.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PendingTransfer {
    direction: Direction,
    sender: String,
    receiver: String,
    amount: u64,
}

/// The two bridged chains, the operator's reserves, and the event log.
/// 1 USDX = 1 USDY throughout.
pub struct BridgeWorld {
    pub mode: BridgeMode,
    pub chain_x: AssetChain,
    pub chain_y: AssetChain,
    pub reserve_x: u64,
    pub reserve_y: u64,
    /// Burn-mint mode: operator-minted supply outstanding on X.
    pub minted_on_x: u64,
    pub events: Vec<BridgeEvent>,
    journal: Vec<PendingTransfer>,
    initial_reserve_y: u64,
}

impl BridgeWorld {
    pub fn new(
        mode: BridgeMode,
        reserve_x: u64,
        reserve_y: u64,
        funding_x: &[(&str, u64)],
        funding_y: &[(&str, u64)],
    ) -> BridgeWorld {
        BridgeWorld {
            mode,
            chain_x: AssetChain::new("X", "USDX", funding_x),
            chain_y: AssetChain::new("Y", "USDY", funding_y),
            reserve_x,
            reserve_y,
            minted_on_x: 0,
            events: Vec::new(),
            journal: Vec::new(),
            initial_reserve_y: reserve_y,
        }
    }

    fn log(&mut self, step: &str, detail: String) {
        self.events.push(BridgeEvent {
            step: step.to_string(),
            detail,
        });
    }

    /// Pooled transfer: deposit into the source pool, pay the receiver from
    /// the destination pool. An uncovered payout refunds the deposit.
    pub fn transfer(
        &mut self,
        direction: Direction,
        sender: &str,
        receiver: &str,
        amount: u64,
    ) -> Result<(), BridgeError> {
        if self.mode != BridgeMode::Pooled {
            return Err(BridgeError::WrongMode);
        }
        if amount == 0 {
            return Err(BridgeError::ZeroAmount);
        }
        self.deposit_leg(direction, sender, amount)?;
        self.journal.push(PendingTransfer {
            direction,
            sender: sender.to_string(),
            receiver: receiver.to_string(),
            amount,
        });
        self.payout_leg()
    }

    fn deposit_leg(
        &mut self,
        direction: Direction,
        sender: &str,
        amount: u64,
    ) -> Result<(), BridgeError> {
        let (source, source_reserve) = match direction {
            Direction::XToY => (&mut self.chain_x, &mut self.reserve_x),
            Direction::YToX => (&mut self.chain_y, &mut self.reserve_y),
        };
        let balance = source.balance(sender);
        if balance < amount {
            return Err(BridgeError::InsufficientFunds {
                balance,
                needed: amount,
            });
        }
        source.debit(sender, amount).expect("checked");
        *source_reserve += amount;
        let token = source.token.clone();
        let name = source.name.clone();
        self.log(
            "deposit",
            format!("{sender} deposits {amount} {token} into the pool on {name}"),
        );
        self.log("operator", "deposit event detected".to_string());
        Ok(())
    }

    /// Complete the journaled transfer's payout leg; on an uncovered
    /// reserve, undo the deposit and report.
    fn payout_leg(&mut self) -> Result<(), BridgeError> {
        let Some(pending) = self.journal.pop() else {
            return Ok(());
        };
        let (dest, dest_reserve) = match pending.direction {
            Direction::XToY => (&mut self.chain_y, &mut self.reserve_y),
            Direction::YToX => (&mut self.chain_x, &mut self.reserve_x),
        };
        if *dest_reserve < pending.amount {
            let reserve = *dest_reserve;
            // Refund the deposit leg.
            let (source, source_reserve) = match pending.direction {
                Direction::XToY => (&mut self.chain_x, &mut self.reserve_x),
                Direction::YToX => (&mut self.chain_y, &mut self.reserve_y),
            };
            *source_reserve -= pending.amount;
            source.credit(&pending.sender, pending.amount);
            self.log(
                "refund",
                format!(
                    "destination reserve {reserve} cannot cover {}; deposit returned to {}",
                    pending.amount, pending.sender
                ),
            );
            return Err(BridgeError::InsufficientReserve {
                reserve,
                needed: pending.amount,
            });
        }
        *dest_reserve -= pending.amount;
        dest.credit(&pending.receiver, pending.amount);
        let token = dest.token.clone();
        let name = dest.name.clone();
        self.log(
            "payout",
            format!(
                "operator pays {} {token} to {} on {name}",
                pending.amount, pending.receiver
            ),
        );
        Ok(())
    }

    /// Burn-mint transfer. Y -> X wraps: deposit into the Y pool, mint on X.
    /// X -> Y unwraps: burn on X, pay out of the Y pool.
    pub fn burn_mint(
        &mut self,
        direction: Direction,
        sender: &str,
        receiver: &str,
        amount: u64,
    ) -> Result<(), BridgeError> {
        if self.mode != BridgeMode::BurnMint {
            return Err(BridgeError::WrongMode);
        }
        if amount == 0 {
            return Err(BridgeError::ZeroAmount);
        }
        match direction {
            Direction::YToX => {
                let balance = self.chain_y.balance(sender);
                if balance < amount {
                    return Err(BridgeError::InsufficientFunds {
                        balance,
                        needed: amount,
                    });
                }
                self.chain_y.debit(sender, amount).expect("checked");
                self.reserve_y += amount;
                self.log("deposit", format!("{sender} deposits {amount} USDY into the pool"));
                self.chain_x.credit(receiver, amount);
                self.minted_on_x += amount;
                self.log("mint", format!("operator mints {amount} USDX to {receiver}"));
                Ok(())
            }
            Direction::XToY => {
                let balance = self.chain_x.balance(sender);
                if balance < amount {
                    return Err(BridgeError::InsufficientFunds {
                        balance,
                        needed: amount,
                    });
                }
                if self.reserve_y < amount {
                    return Err(BridgeError::InsufficientReserve {
                        reserve: self.reserve_y,
                        needed: amount,
                    });
                }
                self.chain_x.debit(sender, amount).expect("checked");
                self.minted_on_x -= amount;
                self.log("burn", format!("operator burns {amount} USDX of {sender}"));
                self.reserve_y -= amount;
                self.chain_y.credit(receiver, amount);
                self.log("payout", format!("operator pays {amount} USDY to {receiver}"));
                Ok(())
            }
        }
    }

    /// Crash the operator after the deposit leg and restart: the journal
    /// replays the unfinished payout.
    pub fn crash_and_restart(&mut self) -> Result<(), BridgeError> {
        self.log("operator", "restarted; replaying the journal".to_string());
        while !self.journal.is_empty() {
            self.payout_leg()?;
        }
        Ok(())
    }

    /// Leave a transfer stranded mid-flight (test hook for the crash path):
    /// runs only the deposit leg and journals the rest.
    pub fn transfer_interrupted(
        &mut self,
        direction: Direction,
        sender: &str,
        receiver: &str,
        amount: u64,
    ) -> Result<(), BridgeError> {
        if self.mode != BridgeMode::Pooled {
            return Err(BridgeError::WrongMode);
        }
        if amount == 0 {
            return Err(BridgeError::ZeroAmount);
        }
        self.deposit_leg(direction, sender, amount)?;
        self.journal.push(PendingTransfer {
            direction,
            sender: sender.to_string(),
            receiver: receiver.to_string(),
            amount,
        });
        self.log("operator", "crashed before the payout leg".to_string());
        Ok(())
    }

    /// Pooled-mode invariant: value merely changes chains, so the combined
    /// reserves are constant.
    pub fn combined_reserves(&self) -> u64 {
        self.reserve_x + self.reserve_y
    }

    /// Burn-mint invariant: every minted USDX is backed by a net deposit in
    /// the Y pool. Burns never outrun mints (X balances cannot exceed the
    /// minted supply), so the pool never drops below its initial reserve.
    pub fn minted_fully_backed(&self) -> bool {
        self.minted_on_x == self.reserve_y - self.initial_reserve_y
    }
}
