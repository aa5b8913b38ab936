use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{InclusionProof, PlasmaChain, PlasmaError, RootContract, UtxoPosition};
use crate::crypto::{keygen_from_seed, sha256d, Address, CurveParams, KeyPair};
use crate::utxo::OutPoint;

/// A named action in a scripted scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Action {
    /// Lock layer-1 funds; the operator mints the matching child UTXO.
    Deposit { user: String, amount: u64 },
    /// Child-chain payment.
    Transfer { from: String, to: String, amount: u64 },
    /// Seal pending child transactions and commit the header on layer 1.
    Commit,
    /// Request an exit for the labeled UTXO.
    Withdraw { user: String, utxo: u64 },
    /// Challenge a pending withdrawal; the challenger scans the chain for a
    /// spend of the exited UTXO.
    Challenge { challenger: String, withdrawal: u64 },
    /// Advance layer-1 time.
    AdvanceTime { rounds: u64 },
    /// Pay out every unchallenged withdrawal whose window has passed.
    Finalize,
}

/// Scripted scenario: parties with layer-1 balances, then ordered actions.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlasmaScenario {
    pub parties: Vec<(String, u64)>,
    pub actions: Vec<Action>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub dispute_period: Option<u64>,
}

/// One transcript entry: the action, its outcome, and the full chain state
/// listing after it.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StepRecord {
    pub step: usize,
    pub action: String,
    pub outcome: String,
    /// The child-chain state in ledger order, spent entries prefixed.
    pub chain_state: Vec<String>,
    /// Child-chain balances by party name.
    pub plasma_balances: BTreeMap<String, u64>,
    /// Layer-1 balances by party name.
    pub l1_balances: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Transcript {
    pub dispute_period: u64,
    pub steps: Vec<StepRecord>,
}

/// Ledger entry for the transcript's "UTXO n: sender -> recipient: amount"
/// listings.
#[derive(Clone, Debug)]
struct LabeledUtxo {
    label: u64,
    sender: String,
    recipient: String,
    amount: u64,
    outpoint: OutPoint,
    position: Option<UtxoPosition>,
    spent: bool,
}

/// Everything a scenario touches: layer-1 balances, the root contract, the
/// operator's child chain, and the naming/labeling layer that renders the
/// worked-example listings.
pub struct PlasmaWorld {
    pub curve: CurveParams,
    pub time: u64,
    pub l1_balances: BTreeMap<String, u64>,
    pub root: RootContract,
    pub chain: PlasmaChain,
    keys: BTreeMap<String, KeyPair>,
    names: BTreeMap<Address, String>,
    ledger: Vec<LabeledUtxo>,
    /// Pending (not yet sealed) outputs get their (block, tx, output)
    /// positions assigned at commit time.
    unsealed: Vec<(OutPoint, usize, u32)>,
    operator_name: String,
}

const OPERATOR_SEED: u64 = 0x09_e7a7;

impl PlasmaWorld {
    pub fn new(curve: CurveParams, parties: &[(String, u64)]) -> PlasmaWorld {
        let operator = keygen_from_seed(OPERATOR_SEED, &curve);
        let operator_addr = operator.address(&curve);
        let mut keys = BTreeMap::new();
        let mut names = BTreeMap::new();
        let mut l1 = BTreeMap::new();
        for (name, balance) in parties {
            let seed = party_seed(name);
            let key = keygen_from_seed(seed, &curve);
            names.insert(key.address(&curve), name.clone());
            keys.insert(name.clone(), key);
            l1.insert(name.clone(), *balance);
        }
        names.insert(operator_addr, "Operator".to_string());
        PlasmaWorld {
            root: RootContract::new(operator_addr),
            chain: PlasmaChain::new(curve.clone(), operator),
            curve,
            time: 0,
            l1_balances: l1,
            keys,
            names,
            ledger: Vec::new(),
            unsealed: Vec::new(),
            operator_name: "Operator".to_string(),
        }
    }

    pub fn name_of(&self, addr: &Address) -> String {
        self.names
            .get(addr)
            .cloned()
            .unwrap_or_else(|| addr.to_base58())
    }

    fn key_of(&self, name: &str) -> Result<&KeyPair, PlasmaError> {
        self.keys.get(name).ok_or(PlasmaError::UnknownWithdrawal)
    }

    fn next_label(&self) -> u64 {
        self.ledger.len() as u64 + 1
    }

    /// Deposit: lock layer-1 funds, mint the child UTXO, label it.
    pub fn deposit(&mut self, user: &str, amount: u64) -> Result<u64, PlasmaError> {
        if amount == 0 {
            return Err(PlasmaError::ZeroAmount);
        }
        let balance = self.l1_balances.get(user).copied().unwrap_or(0);
        if balance < amount {
            return Err(PlasmaError::InsufficientLayer1Funds {
                balance,
                needed: amount,
            });
        }
        let user_key = self.key_of(user)?.clone();
        *self.l1_balances.get_mut(user).expect("checked") -= amount;
        self.root.escrow += amount;
        self.root
            .deposits
            .push((user_key.address(&self.curve), amount, self.time));
        // The deposit event reaches the operator, who mints the UTXO.
        let outpoint = self.chain.mint_deposit(user_key.address(&self.curve), amount);
        let label = self.next_label();
        let pending_index = self.chain_pending_len() - 1;
        self.ledger.push(LabeledUtxo {
            label,
            sender: "∅".to_string(),
            recipient: user.to_string(),
            amount,
            outpoint,
            position: None,
            spent: false,
        });
        self.unsealed.push((outpoint, pending_index, 0));
        Ok(label)
    }

    fn chain_pending_len(&self) -> usize {
        self.chain.pending_txs().len()
    }

    pub fn transfer(&mut self, from: &str, to: &str, amount: u64) -> Result<(), PlasmaError> {
        let from_key = self.key_of(from)?.clone();
        let to_addr = self.key_of(to)?.address(&self.curve);
        let (txid, outputs) = self.chain.transfer(&from_key, to_addr, amount)?;
        // Mark the spent inputs in the ledger and label the new outputs.
        let spent_by_tx: Vec<OutPoint> = self
            .chain_last_tx_inputs()
            .expect("transfer just appended");
        for entry in self.ledger.iter_mut() {
            if spent_by_tx.contains(&entry.outpoint) {
                entry.spent = true;
            }
        }
        let pending_index = self.chain_pending_len() - 1;
        for (i, out) in outputs.iter().enumerate() {
            let label = self.next_label();
            self.ledger.push(LabeledUtxo {
                label,
                sender: from.to_string(),
                recipient: self.name_of(&out.recipient),
                amount: out.amount,
                outpoint: OutPoint::new(txid, i as u32),
                position: None,
                spent: false,
            });
            self.unsealed
                .push((OutPoint::new(txid, i as u32), pending_index, i as u32));
        }
        Ok(())
    }

    fn chain_last_tx_inputs(&self) -> Option<Vec<OutPoint>> {
        self.chain
            .pending_txs()
            .last()
            .map(|tx| tx.inputs.iter().map(|i| i.outpoint).collect())
    }

    /// Seal the child block and commit its header on layer 1; freshly
    /// sealed outputs learn their (block, tx, output) positions.
    pub fn commit(&mut self) -> Result<Option<usize>, PlasmaError> {
        let pending_count = self.chain_pending_len();
        let Some((block_index, root)) = self.chain.seal_block() else {
            return Ok(None);
        };
        let operator = self.root.operator;
        let index = self.root.submit_block(operator, root, self.time)?;
        debug_assert_eq!(index, block_index);
        for (outpoint, pending_index, output_index) in core::mem::take(&mut self.unsealed) {
            debug_assert!(pending_index < pending_count);
            let position = UtxoPosition {
                block_index,
                tx_index: pending_index,
                output_index,
            };
            for entry in self.ledger.iter_mut() {
                if entry.outpoint == outpoint {
                    entry.position = Some(position);
                }
            }
        }
        Ok(Some(index))
    }

    /// Request an exit for a labeled UTXO; the bond comes from the user's
    /// layer-1 balance.
    pub fn withdraw(&mut self, user: &str, label: u64) -> Result<u64, PlasmaError> {
        let entry = self
            .ledger
            .iter()
            .find(|e| e.label == label)
            .ok_or(PlasmaError::UnknownBlock)?
            .clone();
        let position = entry.position.ok_or(PlasmaError::UnknownBlock)?;
        let bond = self.root.bond_amount;
        let balance = self.l1_balances.get(user).copied().unwrap_or(0);
        if balance < bond {
            return Err(PlasmaError::InsufficientBond);
        }
        let proof = self
            .chain
            .prove_inclusion(position.block_index, position.tx_index, position.output_index)
            .ok_or(PlasmaError::UnknownBlock)?;
        let requester = self.key_of(user)?.address(&self.curve);
        let id = self.root.request_withdrawal(
            requester,
            &proof,
            entry.amount,
            bond,
            &self.curve,
            self.time,
        )?;
        *self.l1_balances.get_mut(user).expect("checked") -= bond;
        Ok(id)
    }

    /// Challenge a withdrawal: the challenger watches the chain, finds the
    /// spending transaction, and submits its inclusion proof.
    pub fn challenge(&mut self, challenger: &str, withdrawal_id: u64) -> Result<(), PlasmaError> {
        let (source_txid, output_index) = {
            let w = self
                .root
                .withdrawals
                .get(&withdrawal_id)
                .ok_or(PlasmaError::UnknownWithdrawal)?;
            (w.source_txid, w.position.output_index)
        };
        let outpoint = OutPoint::new(source_txid, output_index);
        let spend_proof: InclusionProof = self
            .chain
            .find_spend(&outpoint)
            .ok_or(PlasmaError::ProofMismatch)?;
        let bond = self
            .root
            .challenge(withdrawal_id, &spend_proof, &self.curve, self.time)?;
        *self.l1_balances.entry(challenger.to_string()).or_insert(0) += bond;
        Ok(())
    }

    /// Finalize due withdrawals: layer-1 payouts plus operator bookkeeping
    /// (the exited UTXO leaves the child chain).
    pub fn finalize(&mut self) -> Vec<(u64, String, u64)> {
        let payouts = self.root.finalize_withdrawals(self.time);
        let mut out = Vec::new();
        for (id, requester, amount, bond) in payouts {
            let name = self.name_of(&requester);
            *self.l1_balances.entry(name.clone()).or_insert(0) += amount + bond;
            // Operator burns the exited UTXO on the child chain.
            let w = &self.root.withdrawals[&id];
            let outpoint = OutPoint::new(w.source_txid, w.position.output_index);
            self.chain.burn_exited(&outpoint);
            for entry in self.ledger.iter_mut() {
                if entry.outpoint == outpoint {
                    entry.spent = true;
                }
            }
            out.push((id, name, amount));
        }
        out
    }

    /// The paper-style state listing: every labeled UTXO in order, spent
    /// ones prefixed with "spent: ".
    pub fn chain_state_listing(&self) -> Vec<String> {
        self.ledger
            .iter()
            .map(|e| {
                let line = format!(
                    "UTXO {}: {} → {}: {}",
                    e.label, e.sender, e.recipient, e.amount
                );
                if e.spent {
                    format!("spent: {line}")
                } else {
                    line
                }
            })
            .collect()
    }

    pub fn plasma_balances(&self) -> BTreeMap<String, u64> {
        self.keys
            .iter()
            .map(|(name, key)| (name.clone(), self.chain.balance_of(&key.address(&self.curve))))
            .collect()
    }

    pub fn operator_name(&self) -> &str {
        &self.operator_name
    }
}

fn party_seed(name: &str) -> u64 {
    let digest = sha256d(name.as_bytes());
    u64::from_le_bytes(digest.as_bytes()[..8].try_into().expect("8 bytes")) | 1
}

/// Execute a scripted scenario, recording a transcript step per action.
pub fn run_scenario(
    curve: CurveParams,
    scenario: &PlasmaScenario,
) -> Result<Transcript, PlasmaError> {
    let mut world = PlasmaWorld::new(curve, &scenario.parties);
    if let Some(period) = scenario.dispute_period {
        world.root.dispute_period = period;
    }
    let mut steps = Vec::new();
    for (i, action) in scenario.actions.iter().enumerate() {
        let (description, outcome) = world.apply(action);
        steps.push(StepRecord {
            step: i + 1,
            action: description,
            outcome,
            chain_state: world.chain_state_listing(),
            plasma_balances: world.plasma_balances(),
            l1_balances: world.l1_balances.clone(),
        });
    }
    Ok(Transcript {
        dispute_period: world.root.dispute_period,
        steps,
    })
}

impl PlasmaWorld {
    /// Apply one action, returning (description, outcome) strings for the
    /// transcript. Failures become outcomes, not errors: rejected actions
    /// are scenario data.
    pub fn apply(&mut self, action: &Action) -> (String, String) {
        match action {
            Action::Deposit { user, amount } => (
                format!("{user} deposits {amount}"),
                match self.deposit(user, *amount) {
                    Ok(label) => format!("minted UTXO {label}"),
                    Err(e) => format!("rejected: {e}"),
                },
            ),
            Action::Transfer { from, to, amount } => (
                format!("{from} transfers {amount} to {to}"),
                match self.transfer(from, to, *amount) {
                    Ok(()) => "ok".to_string(),
                    Err(e) => format!("rejected: {e}"),
                },
            ),
            Action::Commit => (
                "operator commits block".to_string(),
                match self.commit() {
                    Ok(Some(index)) => format!("committed header {index}"),
                    Ok(None) => "nothing to commit".to_string(),
                    Err(e) => format!("rejected: {e}"),
                },
            ),
            Action::Withdraw { user, utxo } => (
                format!("{user} requests withdrawal of UTXO {utxo}"),
                match self.withdraw(user, *utxo) {
                    Ok(id) => format!("pending withdrawal {id}"),
                    Err(e) => format!("rejected: {e}"),
                },
            ),
            Action::Challenge {
                challenger,
                withdrawal,
            } => (
                format!("{challenger} challenges withdrawal {withdrawal}"),
                match self.challenge(challenger, *withdrawal) {
                    Ok(()) => "withdrawal reverted, bond awarded".to_string(),
                    Err(e) => format!("rejected: {e}"),
                },
            ),
            Action::AdvanceTime { rounds } => {
                self.time += rounds;
                (
                    format!("advance {rounds} rounds"),
                    format!("time is now {}", self.time),
                )
            }
            Action::Finalize => {
                let payouts = self.finalize();
                let summary = if payouts.is_empty() {
                    "nothing due".to_string()
                } else {
                    payouts
                        .iter()
                        .map(|(id, name, amount)| format!("withdrawal {id}: {amount} to {name}"))
                        .collect::<Vec<_>>()
                        .join("; ")
                };
                ("finalize withdrawals".to_string(), summary)
            }
        }
    }
}

/// The worked seven-step example as a canned scenario: Alice deposits 10,
/// three transfers move value around (Alice 7 / Bob 2 / Charlie 1), Bob
/// exits UTXO 4 cleanly, and Alice's exit of the already-spent UTXO 3 is
/// challenged by Charlie and reverted.
pub fn paper_example_scenario() -> PlasmaScenario {
    use Action::*;
    PlasmaScenario {
        parties: alloc::vec![
            ("Alice".to_string(), 20),
            ("Bob".to_string(), 5),
            ("Charlie".to_string(), 5),
        ],
        actions: alloc::vec![
            Deposit { user: "Alice".to_string(), amount: 10 },
            Commit,
            Transfer { from: "Alice".to_string(), to: "Bob".to_string(), amount: 5 },
            Commit,
            Transfer { from: "Bob".to_string(), to: "Charlie".to_string(), amount: 3 },
            Commit,
            Transfer { from: "Charlie".to_string(), to: "Alice".to_string(), amount: 2 },
            Commit,
            Withdraw { user: "Bob".to_string(), utxo: 4 },
            AdvanceTime { rounds: 7 },
            Finalize,
            Withdraw { user: "Alice".to_string(), utxo: 3 },
            Challenge { challenger: "Charlie".to_string(), withdrawal: 1 },
            AdvanceTime { rounds: 7 },
            Finalize,
        ],
        dispute_period: None,
    }
}

/// Run the canned worked example and return its transcript.
pub fn run_paper_example(curve: CurveParams) -> Transcript {
    run_scenario(curve, &paper_example_scenario()).expect("canned scenario is well-formed")
}
