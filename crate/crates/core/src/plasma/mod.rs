//! Layer-2 Plasma: an operator-run UTXO child chain, a layer-1 root
//! contract holding committed headers, deposits, and dispute-windowed
//! withdrawals, and the fraud-proof challenge game.
//!
//! The root contract stores only block headers (Merkle roots), so it cannot
//! judge validity by itself: withdrawals wait out a dispute period during
//! which anyone holding a Merkle proof that the exited UTXO was spent can
//! cancel them and claim the bond. Exits pay out in FIFO request order.
//!
//! Layer-1 time is measured in whole rounds ("days"); the default dispute
//! period is 7.

mod scenario;

pub use scenario::{
    paper_example_scenario, run_paper_example, run_scenario, Action, PlasmaScenario, PlasmaWorld,
    StepRecord, Transcript,
};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::crypto::{
    merkle_prove, merkle_verify, sign, verify, CurveParams, HashDigest, KeyPair, ProofNode,
    Signature,
};
use crate::crypto::{merkle_root, Address};
use crate::utxo::{OutPoint, TxInput, TxOutput, UtxoSet, UtxoTransaction};

/// Default dispute window: 7 rounds at day granularity.
pub const DEFAULT_DISPUTE_PERIOD: u64 = 7;
/// Flat penalty bond escrowed with each withdrawal request.
pub const DEFAULT_BOND: u64 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlasmaError {
    /// Only the registered operator may commit headers.
    UnauthorizedCommitter,
    InsufficientLayer1Funds { balance: u64, needed: u64 },
    ZeroAmount,
    /// No committed header at that block index.
    UnknownBlock,
    /// Inclusion proof does not match the committed header, or the claimed
    /// output does not exist with that amount.
    BadProof,
    InsufficientBond,
    UnknownWithdrawal,
    /// Challenge outside the dispute window or on a settled withdrawal.
    WindowClosed,
    /// The exhibited transaction does not spend the withdrawal's UTXO.
    ProofMismatch,
    /// Child-chain transfer failed.
    ChildChain(crate::utxo::TxError),
    ChildBuild(crate::utxo::BuildError),
}

impl core::fmt::Display for PlasmaError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PlasmaError::UnauthorizedCommitter => write!(f, "caller is not the operator"),
            PlasmaError::InsufficientLayer1Funds { balance, needed } => {
                write!(f, "layer-1 balance {balance} below {needed}")
            }
            PlasmaError::ZeroAmount => write!(f, "amount must be positive"),
            PlasmaError::UnknownBlock => write!(f, "no committed header at that index"),
            PlasmaError::BadProof => write!(f, "inclusion proof rejected"),
            PlasmaError::InsufficientBond => write!(f, "bond not covered"),
            PlasmaError::UnknownWithdrawal => write!(f, "no such withdrawal"),
            PlasmaError::WindowClosed => write!(f, "dispute window closed or settled"),
            PlasmaError::ProofMismatch => write!(f, "exhibited transaction spends nothing relevant"),
            PlasmaError::ChildChain(e) => write!(f, "child chain: {e}"),
            PlasmaError::ChildBuild(e) => write!(f, "child chain: {e}"),
        }
    }
}

/// Coordinates of an output on the child chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UtxoPosition {
    pub block_index: usize,
    pub tx_index: usize,
    pub output_index: u32,
}

/// Inclusion evidence: the full transaction bytes plus the Merkle path to
/// the committed root at the position's block.
#[derive(Clone, Debug)]
pub struct InclusionProof {
    pub position: UtxoPosition,
    pub tx_bytes: Vec<u8>,
    pub path: Vec<ProofNode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum WithdrawalStatus {
    Pending,
    Finalized,
    Reverted,
}

#[derive(Clone, Debug)]
pub struct WithdrawalRequest {
    pub requester: Address,
    pub position: UtxoPosition,
    /// txid of the transaction the exited output belongs to, extracted from
    /// the request proof; challenges match spends against it.
    pub source_txid: HashDigest,
    pub amount: u64,
    pub bond: u64,
    pub submitted_at: u64,
    pub status: WithdrawalStatus,
}

/// A committed child-chain header: the Merkle root and the layer-1 time it
/// was recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommittedHeader {
    pub merkle_root: HashDigest,
    pub commit_time: u64,
}

/// The layer-1 contract: header list, deposit ledger, and the withdrawal
/// queue with its dispute game. Layer-1 account balances live beside it in
/// [`PlasmaWorld`]; the contract tracks its own escrowed total.
#[derive(Clone, Debug)]
pub struct RootContract {
    pub operator: Address,
    pub dispute_period: u64,
    pub bond_amount: u64,
    pub committed: Vec<CommittedHeader>,
    pub deposits: Vec<(Address, u64, u64)>,
    pub withdrawals: BTreeMap<u64, WithdrawalRequest>,
    next_withdrawal_id: u64,
    /// Deposits plus bonds currently locked in the contract.
    pub escrow: u64,
}

impl RootContract {
    pub fn new(operator: Address) -> RootContract {
        RootContract {
            operator,
            dispute_period: DEFAULT_DISPUTE_PERIOD,
            bond_amount: DEFAULT_BOND,
            committed: Vec::new(),
            deposits: Vec::new(),
            withdrawals: BTreeMap::new(),
            next_withdrawal_id: 0,
            escrow: 0,
        }
    }

    /// Append a child-chain header. The contract records whatever the
    /// operator submits, valid or not; it cannot know by itself.
    pub fn submit_block(
        &mut self,
        caller: Address,
        merkle_root: HashDigest,
        now: u64,
    ) -> Result<usize, PlasmaError> {
        if caller != self.operator {
            return Err(PlasmaError::UnauthorizedCommitter);
        }
        self.committed.push(CommittedHeader {
            merkle_root,
            commit_time: now,
        });
        Ok(self.committed.len() - 1)
    }

    fn verify_inclusion(&self, proof: &InclusionProof) -> Result<(), PlasmaError> {
        let header = self
            .committed
            .get(proof.position.block_index)
            .ok_or(PlasmaError::UnknownBlock)?;
        if !merkle_verify(
            &header.merkle_root,
            &proof.tx_bytes,
            proof.position.tx_index,
            &proof.path,
        ) {
            return Err(PlasmaError::BadProof);
        }
        Ok(())
    }

    /// Open an exit: escrow the bond and start the dispute clock. The
    /// contract verifies inclusion and the claimed amount, but it cannot
    /// tell whether the UTXO is unspent (or even whose it is); that is what
    /// the challenge game is for.
    pub fn request_withdrawal(
        &mut self,
        requester: Address,
        proof: &InclusionProof,
        amount: u64,
        bond: u64,
        curve: &CurveParams,
        now: u64,
    ) -> Result<u64, PlasmaError> {
        if bond < self.bond_amount {
            return Err(PlasmaError::InsufficientBond);
        }
        self.verify_inclusion(proof)?;
        let tx = UtxoTransaction::decode(&proof.tx_bytes, curve).ok_or(PlasmaError::BadProof)?;
        let output = tx
            .outputs
            .get(proof.position.output_index as usize)
            .ok_or(PlasmaError::BadProof)?;
        if output.amount != amount {
            return Err(PlasmaError::BadProof);
        }
        let id = self.next_withdrawal_id;
        self.next_withdrawal_id += 1;
        self.escrow += bond;
        self.withdrawals.insert(
            id,
            WithdrawalRequest {
                requester,
                position: proof.position,
                source_txid: tx.txid(curve),
                amount,
                bond,
                submitted_at: now,
                status: WithdrawalStatus::Pending,
            },
        );
        Ok(id)
    }

    /// Fraud proof: exhibit a committed transaction that spends the UTXO
    /// behind a pending withdrawal. A valid challenge reverts the exit and
    /// awards the bond.
    pub fn challenge(
        &mut self,
        withdrawal_id: u64,
        spend_proof: &InclusionProof,
        curve: &CurveParams,
        now: u64,
    ) -> Result<u64, PlasmaError> {
        let (status, submitted_at, exited_outpoint) = {
            let withdrawal = self
                .withdrawals
                .get(&withdrawal_id)
                .ok_or(PlasmaError::UnknownWithdrawal)?;
            (
                withdrawal.status,
                withdrawal.submitted_at,
                OutPoint::new(withdrawal.source_txid, withdrawal.position.output_index),
            )
        };
        if status != WithdrawalStatus::Pending || now >= submitted_at + self.dispute_period {
            return Err(PlasmaError::WindowClosed);
        }
        self.verify_inclusion(spend_proof).map_err(|e| match e {
            PlasmaError::BadProof => PlasmaError::ProofMismatch,
            other => other,
        })?;
        let spender =
            UtxoTransaction::decode(&spend_proof.tx_bytes, curve).ok_or(PlasmaError::ProofMismatch)?;
        if !spender
            .inputs
            .iter()
            .any(|input| input.outpoint == exited_outpoint)
        {
            return Err(PlasmaError::ProofMismatch);
        }
        let bond = {
            let w = self.withdrawals.get_mut(&withdrawal_id).expect("checked");
            w.status = WithdrawalStatus::Reverted;
            w.bond
        };
        self.escrow -= bond;
        Ok(bond)
    }

    /// Pay out every pending withdrawal whose dispute window has passed,
    /// oldest request first. Returns (id, requester, amount, bond) tuples.
    pub fn finalize_withdrawals(&mut self, now: u64) -> Vec<(u64, Address, u64, u64)> {
        let mut due: Vec<u64> = self
            .withdrawals
            .iter()
            .filter(|(_, w)| {
                w.status == WithdrawalStatus::Pending
                    && now >= w.submitted_at + self.dispute_period
            })
            .map(|(id, _)| *id)
            .collect();
        // FIFO by request time, id as the tiebreaker.
        due.sort_by_key(|id| (self.withdrawals[id].submitted_at, *id));
        let mut payouts = Vec::new();
        for id in due {
            let w = self.withdrawals.get_mut(&id).expect("listed");
            // Escrow accounting never overdraws under an honest operator;
            // a drained escrow simply leaves later exits pending.
            if self.escrow < w.amount + w.bond {
                continue;
            }
            w.status = WithdrawalStatus::Finalized;
            self.escrow -= w.amount + w.bond;
            payouts.push((id, w.requester, w.amount, w.bond));
        }
        payouts
    }
}

/// One sealed child-chain block: transactions, their Merkle root, and the
/// operator's signature over the root (the fast consensus stand-in).
#[derive(Clone, Debug)]
pub struct PlasmaBlock {
    pub transactions: Vec<UtxoTransaction>,
    pub merkle_root: HashDigest,
    pub operator_sig: Signature,
}

/// The operator's child chain: a plain UTXO ledger sealed into blocks.
/// Deposits mint inputless transactions; exits burn their UTXO once the
/// root contract finalizes them.
pub struct PlasmaChain {
    pub curve: CurveParams,
    operator: KeyPair,
    utxo: UtxoSet,
    blocks: Vec<PlasmaBlock>,
    pending: Vec<UtxoTransaction>,
    minted: u64,
    exited: u64,
}

impl PlasmaChain {
    pub fn new(curve: CurveParams, operator: KeyPair) -> PlasmaChain {
        PlasmaChain {
            curve,
            operator,
            utxo: UtxoSet::new(),
            blocks: Vec::new(),
            pending: Vec::new(),
            minted: 0,
            exited: 0,
        }
    }

    pub fn utxo(&self) -> &UtxoSet {
        &self.utxo
    }

    pub fn blocks(&self) -> &[PlasmaBlock] {
        &self.blocks
    }

    /// Transactions accepted since the last sealed block.
    pub fn pending_txs(&self) -> &[UtxoTransaction] {
        &self.pending
    }

    /// Total value currently circulating on the child chain.
    pub fn circulating(&self) -> u64 {
        self.utxo.total_value()
    }

    pub fn minted(&self) -> u64 {
        self.minted
    }

    pub fn exited(&self) -> u64 {
        self.exited
    }

    /// Mint the child-chain UTXO matching a layer-1 deposit.
    pub fn mint_deposit(&mut self, user: Address, amount: u64) -> OutPoint {
        let tx = UtxoTransaction {
            inputs: Vec::new(),
            outputs: alloc::vec![TxOutput {
                amount,
                recipient: user,
            }],
            coinbase_nonce: self.minted as u32,
        };
        let txid = tx.txid(&self.curve);
        self.utxo = crate::utxo::apply_tx(&tx, &self.utxo, &self.curve).expect("mint is valid");
        self.minted += amount;
        self.pending.push(tx);
        OutPoint::new(txid, 0)
    }

    /// A child-chain payment. The paper's listings show the change output
    /// first, so the transaction is built that way: [change?, payment].
    pub fn transfer(
        &mut self,
        sender: &KeyPair,
        recipient: Address,
        amount: u64,
    ) -> Result<(HashDigest, Vec<TxOutput>), PlasmaError> {
        let sender_addr = sender.address(&self.curve);
        let owned = self.utxo.owned_by(&sender_addr);
        let available: u64 = owned.iter().map(|(_, o)| o.amount).sum();
        if available < amount {
            return Err(PlasmaError::ChildBuild(
                crate::utxo::BuildError::InsufficientFunds {
                    available,
                    needed: amount,
                },
            ));
        }
        let mut selected = Vec::new();
        let mut gathered = 0u64;
        for (op, out) in owned {
            if gathered >= amount {
                break;
            }
            gathered += out.amount;
            selected.push((op, out));
        }
        let mut outputs = Vec::new();
        if gathered > amount {
            outputs.push(TxOutput {
                amount: gathered - amount,
                recipient: sender_addr,
            });
        }
        outputs.push(TxOutput {
            amount,
            recipient,
        });
        let mut tx = UtxoTransaction {
            inputs: selected
                .iter()
                .map(|(op, _)| TxInput {
                    outpoint: *op,
                    pubkey: sender.public.clone(),
                    signature: Signature {
                        r: 0u8.into(),
                        s: 0u8.into(),
                    },
                })
                .collect(),
            outputs,
            coinbase_nonce: 0,
        };
        let digest = tx.signing_digest(&self.curve);
        for input in tx.inputs.iter_mut() {
            input.signature = sign(sender, digest.as_bytes(), &self.curve)
                .expect("toy profile is signable");
        }
        crate::utxo::validate_tx(&tx, &self.utxo, &self.curve).map_err(PlasmaError::ChildChain)?;
        self.utxo =
            crate::utxo::apply_tx(&tx, &self.utxo, &self.curve).map_err(PlasmaError::ChildChain)?;
        let txid = tx.txid(&self.curve);
        let outputs = tx.outputs.clone();
        self.pending.push(tx);
        Ok((txid, outputs))
    }

    /// Seal pending transactions into a block signed by the operator.
    /// Returns the block index and the header root to commit on layer 1.
    pub fn seal_block(&mut self) -> Option<(usize, HashDigest)> {
        if self.pending.is_empty() {
            return None;
        }
        let transactions = core::mem::take(&mut self.pending);
        let leaves: Vec<Vec<u8>> = transactions
            .iter()
            .map(|tx| tx.serialize(&self.curve, true))
            .collect();
        let root = merkle_root(&leaves).expect("non-empty");
        let operator_sig = sign(&self.operator, root.as_bytes(), &self.curve)
            .expect("toy profile is signable");
        self.blocks.push(PlasmaBlock {
            transactions,
            merkle_root: root,
            operator_sig,
        });
        Some((self.blocks.len() - 1, root))
    }

    /// Check the operator signature on a sealed block; watchers use this.
    pub fn block_signature_valid(&self, index: usize) -> bool {
        let Some(block) = self.blocks.get(index) else {
            return false;
        };
        verify(
            &self.operator.public,
            block.merkle_root.as_bytes(),
            &block.operator_sig,
            &self.curve,
        )
    }

    /// Build the inclusion proof for a transaction in a sealed block.
    pub fn prove_inclusion(&self, block_index: usize, tx_index: usize, output_index: u32)
        -> Option<InclusionProof> {
        let block = self.blocks.get(block_index)?;
        let leaves: Vec<Vec<u8>> = block
            .transactions
            .iter()
            .map(|tx| tx.serialize(&self.curve, true))
            .collect();
        let path = merkle_prove(&leaves, tx_index).ok()?;
        Some(InclusionProof {
            position: UtxoPosition {
                block_index,
                tx_index,
                output_index,
            },
            tx_bytes: leaves.get(tx_index)?.clone(),
            path,
        })
    }

    /// Find a committed transaction spending the given outpoint, as a
    /// watcher scanning for fraud evidence would.
    pub fn find_spend(&self, outpoint: &OutPoint) -> Option<InclusionProof> {
        for (bi, block) in self.blocks.iter().enumerate() {
            for (ti, tx) in block.transactions.iter().enumerate() {
                if tx.inputs.iter().any(|i| i.outpoint == *outpoint) {
                    return self.prove_inclusion(bi, ti, 0);
                }
            }
        }
        None
    }

    /// Operator bookkeeping after a layer-1 exit finalizes: the exited UTXO
    /// leaves circulation.
    pub fn burn_exited(&mut self, outpoint: &OutPoint) {
        if let Some(out) = self.utxo.get(outpoint).copied() {
            let mut next = UtxoSet::new();
            for (op, o) in self.utxo.iter() {
                if op != outpoint {
                    next.insert(*op, *o);
                }
            }
            self.utxo = next;
            self.exited += out.amount;
        }
    }

    /// Balance of an address in the child-chain unspent set.
    pub fn balance_of(&self, addr: &Address) -> u64 {
        crate::utxo::balance_of(addr, &self.utxo)
    }
}
