use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigUint;

use super::programs::{run_contract, transfer, EntryPoint, Event, ExecError, GasMeter,
    ProgramRegistry};
use super::{Account, AccountTx, GasSchedule, WorldState, DEPLOY_ADDRESS};
use crate::chain::{target_with_base, Difficulty, DifficultyParams};
use crate::crypto::{hash160, merkle_root, sha256d, verify, Address, CurveParams, HashDigest};

/// Execution context for one transition: who mines, which programs exist,
/// what gas costs, which curve verifies signatures.
pub struct ExecutionContext<'a> {
    pub miner: Address,
    pub registry: &'a ProgramRegistry,
    pub schedule: GasSchedule,
    pub curve: &'a CurveParams,
}

/// Outcome record for an executed transaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Receipt {
    pub success: bool,
    /// Failure description for reverted or out-of-gas executions.
    pub error: Option<String>,
    pub gas_used: u64,
    /// Fee the sender ultimately paid (miner credit).
    pub fee_paid: u64,
    /// startgas*gasprice minus fee_paid, returned to the sender.
    pub refund: u64,
    pub events: Vec<Event>,
    /// Address of the contract created, for deployments.
    pub created: Option<Address>,
    pub return_data: Vec<u8>,
}

/// Transition rejections that keep the transaction out of a block entirely.
/// Anything else executes and yields a receipt (possibly a failed one) so
/// fees stay accountable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransitionError {
    /// Bad signature, wrong nonce, zero startgas, or fee overflow.
    Malformed(String),
    /// Sender cannot cover startgas * gasprice.
    InsufficientBalanceForFee { balance: u64, fee: u64 },
}

impl core::fmt::Display for TransitionError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TransitionError::Malformed(why) => write!(f, "malformed transaction: {why}"),
            TransitionError::InsufficientBalanceForFee { balance, fee } => {
                write!(f, "balance {balance} below fee {fee}")
            }
        }
    }
}

/// The six-step state transition.
///
/// 1. Well-formedness: signature, nonce, positive startgas.
/// 2. Deduct startgas * gasprice from the sender or terminate.
/// 3. GAS := startgas - per_byte * |tx|.
/// 4. Transfer value (creating the receiver if absent); run contract code to
///    completion or until GAS runs out.
/// 5. On failure, revert everything except the fee, which goes to the miner.
/// 6. On success, refund unused GAS * gasprice and pay the consumed part to
///    the miner.
pub fn state_transition(
    state: &WorldState,
    tx: &AccountTx,
    ctx: &ExecutionContext,
) -> Result<(WorldState, Receipt), TransitionError> {
    // Step 1: well-formed and valid.
    let signer = Address::from_pubkey(&tx.pubkey, ctx.curve)
        .map_err(|_| TransitionError::Malformed("public key not a curve point".into()))?;
    if signer != tx.sender {
        return Err(TransitionError::Malformed(
            "public key does not hash to sender".into(),
        ));
    }
    let digest = tx.signing_digest(ctx.curve);
    if !verify(&tx.pubkey, digest.as_bytes(), &tx.signature, ctx.curve) {
        return Err(TransitionError::Malformed("bad signature".into()));
    }
    if tx.nonce != state.nonce(&tx.sender) {
        return Err(TransitionError::Malformed("nonce out of order".into()));
    }
    if tx.startgas == 0 {
        return Err(TransitionError::Malformed("startgas must be positive".into()));
    }
    let fee = tx
        .startgas
        .checked_mul(tx.gasprice)
        .ok_or_else(|| TransitionError::Malformed("fee overflow".into()))?;

    // Step 2: deduct the full fee up front.
    let sender_balance = state.balance(&tx.sender);
    if sender_balance < fee {
        return Err(TransitionError::InsufficientBalanceForFee {
            balance: sender_balance,
            fee,
        });
    }
    let mut working = state.clone();
    {
        let sender = working
            .accounts
            .entry(tx.sender)
            .or_insert_with(|| Account::external(0));
        sender.balance -= fee;
        sender.nonce += 1;
    }
    // The fee-deducted, nonce-bumped state is what failure reverts to.
    let checkpoint = working.clone();

    // Step 3: intrinsic byte cost.
    let byte_cost = ctx.schedule.per_byte * tx.size(ctx.curve) as u64;
    let mut events = Vec::new();
    let outcome: Result<(Vec<u8>, Option<Address>, u64), ExecError> = if tx.startgas < byte_cost {
        Err(ExecError::OutOfGas)
    } else {
        let mut gas = GasMeter::new(tx.startgas - byte_cost);
        let result = execute(tx, ctx, &mut working, &mut gas, &mut events);
        result.map(|(ret, created)| (ret, created, gas.remaining()))
    };

    match outcome {
        Ok((return_data, created, gas_left)) => {
            // Step 6: refund the remainder, pay the miner for consumed gas.
            let gas_used = tx.startgas - gas_left;
            let refund = gas_left * tx.gasprice;
            let fee_paid = fee - refund;
            working
                .accounts
                .entry(tx.sender)
                .or_insert_with(|| Account::external(0))
                .balance += refund;
            working
                .accounts
                .entry(ctx.miner)
                .or_insert_with(|| Account::external(0))
                .balance += fee_paid;
            Ok((
                working,
                Receipt {
                    success: true,
                    error: None,
                    gas_used,
                    fee_paid,
                    refund,
                    events,
                    created,
                    return_data,
                },
            ))
        }
        Err(err) => {
            // Step 5: revert all state changes except the fee, which the
            // miner keeps in full.
            let mut reverted = checkpoint;
            reverted
                .accounts
                .entry(ctx.miner)
                .or_insert_with(|| Account::external(0))
                .balance += fee;
            Ok((
                reverted,
                Receipt {
                    success: false,
                    error: Some(err.to_string()),
                    gas_used: tx.startgas,
                    fee_paid: fee,
                    refund: 0,
                    events: Vec::new(),
                    created: None,
                    return_data: Vec::new(),
                },
            ))
        }
    }
}

/// Step 4: move value and run code. Deployments create the contract account
/// at hash160(deployer || nonce) and run its init handler.
fn execute(
    tx: &AccountTx,
    ctx: &ExecutionContext,
    working: &mut WorldState,
    gas: &mut GasMeter,
    events: &mut Vec<Event>,
) -> Result<(Vec<u8>, Option<Address>), ExecError> {
    if tx.receiver == DEPLOY_ADDRESS {
        let (program_id, init_data) = AccountTx::parse_deploy_data(&tx.data)
            .ok_or(ExecError::Revert("malformed deploy data".into()))?;
        if ctx.registry.get(program_id).is_none() {
            return Err(ExecError::Revert("unknown program".into()));
        }
        let mut seed = Vec::with_capacity(28);
        seed.extend_from_slice(tx.sender.as_bytes());
        seed.extend_from_slice(&tx.nonce.to_le_bytes());
        let contract_addr = Address(hash160(&seed));
        if working.accounts.contains_key(&contract_addr) {
            return Err(ExecError::Revert("contract address collision".into()));
        }
        working
            .accounts
            .insert(contract_addr, Account::contract(program_id));
        transfer(working, &tx.sender, &contract_addr, tx.value)?;
        let ret = run_contract(
            working,
            ctx.registry,
            &ctx.schedule,
            gas,
            contract_addr,
            tx.sender,
            tx.value,
            init_data.to_vec(),
            events,
            0,
            EntryPoint::Init,
        )?;
        Ok((ret, Some(contract_addr)))
    } else {
        transfer(working, &tx.sender, &tx.receiver, tx.value)?;
        let ret = run_contract(
            working,
            ctx.registry,
            &ctx.schedule,
            gas,
            tx.receiver,
            tx.sender,
            tx.value,
            tx.data.clone(),
            events,
            0,
            EntryPoint::Call,
        )?;
        Ok((ret, None))
    }
}

/// Convenience wrapper: build, sign, and apply a deployment transaction.
/// Returns the new state, the receipt, and the created address.
#[allow(clippy::too_many_arguments)]
pub fn deploy_contract(
    state: &WorldState,
    deployer: &crate::crypto::KeyPair,
    program_id: &str,
    init_data: &[u8],
    startgas: u64,
    gasprice: u64,
    ctx: &ExecutionContext,
) -> Result<(WorldState, Receipt, Option<Address>), TransitionError> {
    let tx = AccountTx::build(
        deployer,
        DEPLOY_ADDRESS,
        0,
        AccountTx::deploy_data(program_id, init_data),
        startgas,
        gasprice,
        state.nonce(&deployer.address(ctx.curve)),
        ctx.curve,
    );
    let (next, receipt) = state_transition(state, &tx, ctx)?;
    let created = receipt.created;
    Ok((next, receipt, created))
}

// ---------------------------------------------------------------------------
// Blocks and replay validation.
// ---------------------------------------------------------------------------

/// Account-chain block header: the UTXO-chain layout plus the state root and
/// the fee beneficiary.
///
/// `version(4) || prev_hash(32) || tx_root(32) || state_root(32) ||
/// beneficiary(20) || timestamp(4) || difficulty(4) || nonce(4)` = 132 bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccountBlockHeader {
    pub version: u32,
    pub prev_hash: HashDigest,
    pub tx_root: HashDigest,
    pub state_root: HashDigest,
    pub beneficiary: Address,
    pub timestamp: u32,
    pub difficulty: u32,
    pub nonce: u32,
}

impl AccountBlockHeader {
    pub const SERIALIZED_LEN: usize = 132;

    pub fn serialize(&self) -> [u8; 132] {
        let mut out = [0u8; 132];
        out[0..4].copy_from_slice(&self.version.to_le_bytes());
        out[4..36].copy_from_slice(self.prev_hash.as_bytes());
        out[36..68].copy_from_slice(self.tx_root.as_bytes());
        out[68..100].copy_from_slice(self.state_root.as_bytes());
        out[100..120].copy_from_slice(self.beneficiary.as_bytes());
        out[120..124].copy_from_slice(&self.timestamp.to_le_bytes());
        out[124..128].copy_from_slice(&self.difficulty.to_le_bytes());
        out[128..132].copy_from_slice(&self.nonce.to_le_bytes());
        out
    }

    pub fn id(&self) -> HashDigest {
        sha256d(&self.serialize())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccountBlock {
    pub header: AccountBlockHeader,
    pub transactions: Vec<AccountTx>,
}

impl AccountBlock {
    pub fn compute_tx_root(&self, curve: &CurveParams) -> HashDigest {
        if self.transactions.is_empty() {
            return sha256d(b"account-block:no-txs");
        }
        let leaves: Vec<Vec<u8>> = self
            .transactions
            .iter()
            .map(|tx| tx.serialize(curve, true))
            .collect();
        merkle_root(&leaves).expect("non-empty")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AccountBlockError {
    /// Step 1: parent unknown.
    BadParent,
    /// Step 2: timestamp not after parent, or more than 15 minutes ahead of
    /// the validator's clock.
    BadTimestamp { parent: u32, got: u32, now: u32 },
    /// Step 3: id, difficulty, or transaction root invalid.
    BadPow,
    BadDifficulty,
    BadTxRoot,
    /// Step 4: a replayed transaction failed, or the gas limit tripped.
    BadTx { index: usize, cause: TransitionError },
    GasLimitExceeded { used: u64, limit: u64 },
    /// Step 5: replayed final state root differs from the header.
    StateRootMismatch { computed: HashDigest, stored: HashDigest },
}

impl core::fmt::Display for AccountBlockError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AccountBlockError::BadParent => write!(f, "parent block unknown"),
            AccountBlockError::BadTimestamp { parent, got, now } => {
                write!(f, "timestamp {got} invalid (parent {parent}, now {now})")
            }
            AccountBlockError::BadPow => write!(f, "block id not below target"),
            AccountBlockError::BadDifficulty => write!(f, "difficulty not as scheduled"),
            AccountBlockError::BadTxRoot => write!(f, "transaction merkle root mismatch"),
            AccountBlockError::BadTx { index, cause } => {
                write!(f, "transaction {index} failed replay: {cause}")
            }
            AccountBlockError::GasLimitExceeded { used, limit } => {
                write!(f, "block gas {used} exceeds limit {limit}")
            }
            AccountBlockError::StateRootMismatch { computed, stored } => {
                write!(f, "state root {computed} != stored {stored}")
            }
        }
    }
}

/// Window for future timestamps: 15 minutes.
pub const MAX_CLOCK_SKEW: u32 = 15 * 60;

/// An account-model chain: validated blocks plus the current world state.
/// The genesis block carries the initial allocation's state root.
pub struct AccountChain {
    pub curve: CurveParams,
    pub params: DifficultyParams,
    pub schedule: GasSchedule,
    pub block_gas_limit: u64,
    blocks: Vec<AccountBlock>,
    state: WorldState,
}

impl AccountChain {
    pub fn new(
        curve: CurveParams,
        params: DifficultyParams,
        alloc: &[(Address, u64)],
    ) -> AccountChain {
        let state = WorldState::with_alloc(alloc);
        let genesis = AccountBlock {
            header: AccountBlockHeader {
                version: 1,
                prev_hash: HashDigest::ZERO,
                tx_root: sha256d(b"account-block:no-txs"),
                state_root: state.state_root(),
                beneficiary: Address([0; 20]),
                timestamp: crate::chain::GENESIS_TIMESTAMP,
                difficulty: params.initial.to_compact(),
                nonce: 0,
            },
            transactions: Vec::new(),
        };
        AccountChain {
            curve,
            params,
            schedule: GasSchedule::default(),
            block_gas_limit: 1_000_000,
            blocks: alloc::vec![genesis],
            state,
        }
    }

    pub fn tip(&self) -> &AccountBlock {
        self.blocks.last().expect("never empty")
    }

    pub fn height(&self) -> u64 {
        (self.blocks.len() - 1) as u64
    }

    pub fn blocks(&self) -> &[AccountBlock] {
        &self.blocks
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    /// The account chain keeps a fixed schedule (no retarget); difficulty is
    /// the profile's initial value.
    pub fn scheduled_difficulty(&self) -> Difficulty {
        self.params.initial
    }

    pub fn next_target(&self) -> BigUint {
        target_with_base(&self.params.base_target, &self.params.initial)
    }

    /// Replay-validate a candidate block against the tip, per the five-step
    /// rule. `now` is the validator's clock (simulation time). Returns the
    /// post-replay state and receipts on success.
    pub fn validate_block(
        &self,
        block: &AccountBlock,
        registry: &ProgramRegistry,
        now: u32,
    ) -> Result<(WorldState, Vec<Receipt>), AccountBlockError> {
        let tip = self.tip();
        // Step 1: previous block referenced exists (and is valid, which
        // holds inductively for everything in this chain).
        if block.header.prev_hash != tip.header.id() {
            return Err(AccountBlockError::BadParent);
        }
        // Step 2: parent < timestamp < now + 15 minutes.
        if block.header.timestamp <= tip.header.timestamp
            || block.header.timestamp >= now.saturating_add(MAX_CLOCK_SKEW)
        {
            return Err(AccountBlockError::BadTimestamp {
                parent: tip.header.timestamp,
                got: block.header.timestamp,
                now,
            });
        }
        // Step 3: difficulty, PoW id, transaction root.
        if block.header.difficulty != self.params.initial.to_compact() {
            return Err(AccountBlockError::BadDifficulty);
        }
        let id = BigUint::from_bytes_be(block.header.id().as_bytes());
        if id >= self.next_target() {
            return Err(AccountBlockError::BadPow);
        }
        if block.compute_tx_root(&self.curve) != block.header.tx_root {
            return Err(AccountBlockError::BadTxRoot);
        }
        // Step 4: replay every transaction from the parent state.
        let ctx = ExecutionContext {
            miner: block.header.beneficiary,
            registry,
            schedule: self.schedule,
            curve: &self.curve,
        };
        let mut state = self.state.clone();
        let mut receipts = Vec::with_capacity(block.transactions.len());
        let mut gas_total = 0u64;
        for (index, tx) in block.transactions.iter().enumerate() {
            let (next, receipt) = state_transition(&state, tx, &ctx)
                .map_err(|cause| AccountBlockError::BadTx { index, cause })?;
            gas_total += receipt.gas_used;
            if gas_total > self.block_gas_limit {
                return Err(AccountBlockError::GasLimitExceeded {
                    used: gas_total,
                    limit: self.block_gas_limit,
                });
            }
            state = next;
            receipts.push(receipt);
        }
        // Step 5: the replayed state root must match the stored one.
        let computed = state.state_root();
        if computed != block.header.state_root {
            return Err(AccountBlockError::StateRootMismatch {
                computed,
                stored: block.header.state_root,
            });
        }
        Ok((state, receipts))
    }

    pub fn append_block(
        &mut self,
        block: AccountBlock,
        registry: &ProgramRegistry,
        now: u32,
    ) -> Result<Vec<Receipt>, AccountBlockError> {
        let (state, receipts) = self.validate_block(&block, registry, now)?;
        self.state = state;
        self.blocks.push(block);
        Ok(receipts)
    }

    /// Execute transactions on the tip state and package them into an
    /// unmined block whose state root is the post-replay root.
    pub fn build_block(
        &self,
        beneficiary: Address,
        txs: Vec<AccountTx>,
        timestamp: u32,
        registry: &ProgramRegistry,
    ) -> Result<AccountBlock, AccountBlockError> {
        let ctx = ExecutionContext {
            miner: beneficiary,
            registry,
            schedule: self.schedule,
            curve: &self.curve,
        };
        let mut state = self.state.clone();
        for (index, tx) in txs.iter().enumerate() {
            let (next, _receipt) = state_transition(&state, tx, &ctx)
                .map_err(|cause| AccountBlockError::BadTx { index, cause })?;
            state = next;
        }
        let mut block = AccountBlock {
            header: AccountBlockHeader {
                version: 1,
                prev_hash: self.tip().header.id(),
                tx_root: HashDigest::ZERO,
                state_root: state.state_root(),
                beneficiary,
                timestamp,
                difficulty: self.params.initial.to_compact(),
                nonce: 0,
            },
            transactions: txs,
        };
        block.header.tx_root = block.compute_tx_root(&self.curve);
        Ok(block)
    }
}

/// Scan the header nonce until the id beats the target. Account blocks have
/// no coinbase nonce; the 2^32 header domain is plenty at desk targets.
pub fn mine_account_block(
    mut block: AccountBlock,
    target: &BigUint,
    max_tries: u64,
) -> Option<(AccountBlock, u64)> {
    let mut tries = 0u64;
    for nonce in 0..=u32::MAX {
        if tries >= max_tries {
            return None;
        }
        block.header.nonce = nonce;
        tries += 1;
        if &BigUint::from_bytes_be(block.header.id().as_bytes()) < target {
            return Some((block, tries));
        }
    }
    None
}
