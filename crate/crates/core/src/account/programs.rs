use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{GasSchedule, WorldState};
use crate::crypto::Address;

pub const TOKEN_PROGRAM: &str = "token";
pub const TRAIN_PROGRAM: &str = "train";
pub const HOTEL_PROGRAM: &str = "hotel";
pub const BOOKING_PROGRAM: &str = "booking";

/// Structured record appended to the receipt's event list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub contract: Address,
    pub topic: String,
    pub payload: Vec<u8>,
}

#[cfg(feature = "serde")]
impl serde::Serialize for Event {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Event", 3)?;
        st.serialize_field("contract", &self.contract)?;
        st.serialize_field("topic", &self.topic)?;
        st.serialize_field("payload_hex", &hex_of(&self.payload))?;
        st.end()
    }
}

#[cfg(feature = "serde")]
fn hex_of(bytes: &[u8]) -> String {
    let mut s = String::new();
    for b in bytes {
        s.push_str(&alloc::format!("{b:02x}"));
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExecError {
    /// Handler rejected the call; all its effects roll back.
    Revert(String),
    /// Gas budget exhausted mid-execution.
    OutOfGas,
}

impl core::fmt::Display for ExecError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ExecError::Revert(reason) => write!(f, "revert: {reason}"),
            ExecError::OutOfGas => write!(f, "out of gas"),
        }
    }
}

fn revert(reason: &str) -> ExecError {
    ExecError::Revert(reason.to_owned())
}

/// Remaining gas for one transaction execution, shared down the call stack.
#[derive(Clone, Copy, Debug)]
pub struct GasMeter {
    remaining: u64,
}

impl GasMeter {
    pub fn new(budget: u64) -> GasMeter {
        GasMeter { remaining: budget }
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    pub fn charge(&mut self, amount: u64) -> Result<(), ExecError> {
        if self.remaining < amount {
            self.remaining = 0;
            return Err(ExecError::OutOfGas);
        }
        self.remaining -= amount;
        Ok(())
    }
}

/// Execution environment handed to a program handler: the working state,
/// gas meter, caller/value/data of this frame, and the event sink.
pub struct CallEnv<'a> {
    pub state: &'a mut WorldState,
    pub registry: &'a ProgramRegistry,
    pub schedule: &'a GasSchedule,
    pub gas: &'a mut GasMeter,
    pub contract: Address,
    pub caller: Address,
    pub value: u64,
    pub data: Vec<u8>,
    pub events: &'a mut Vec<Event>,
    pub depth: u32,
}

const MAX_CALL_DEPTH: u32 = 16;

impl<'a> CallEnv<'a> {
    /// Storage read on this contract's area; costs one storage-access unit.
    pub fn storage_get(&mut self, key: &[u8]) -> Result<Option<Vec<u8>>, ExecError> {
        self.gas.charge(self.schedule.storage_access)?;
        Ok(self
            .state
            .accounts
            .get(&self.contract)
            .and_then(|a| a.storage.get(key).cloned()))
    }

    /// Storage write on this contract's area; costs one storage-access unit.
    pub fn storage_put(&mut self, key: &[u8], value: Vec<u8>) -> Result<(), ExecError> {
        self.gas.charge(self.schedule.storage_access)?;
        let account = self
            .state
            .accounts
            .get_mut(&self.contract)
            .ok_or_else(|| revert("contract account vanished"))?;
        account.storage.insert(key.to_vec(), value);
        Ok(())
    }

    pub fn storage_u64(&mut self, key: &[u8]) -> Result<u64, ExecError> {
        Ok(self
            .storage_get(key)?
            .and_then(|v| v.try_into().ok().map(u64::from_le_bytes))
            .unwrap_or(0))
    }

    pub fn storage_put_u64(&mut self, key: &[u8], value: u64) -> Result<(), ExecError> {
        self.storage_put(key, value.to_le_bytes().to_vec())
    }

    pub fn emit(&mut self, topic: &str, payload: Vec<u8>) {
        self.events.push(Event {
            contract: self.contract,
            topic: topic.to_owned(),
            payload,
        });
    }

    /// Call another contract, moving `value` from this contract to it. A
    /// failure in the callee propagates and rolls back the whole
    /// transaction, which is exactly what makes composed bookings atomic.
    pub fn call_contract(
        &mut self,
        target: Address,
        value: u64,
        data: Vec<u8>,
    ) -> Result<Vec<u8>, ExecError> {
        if self.depth + 1 > MAX_CALL_DEPTH {
            return Err(revert("call depth exceeded"));
        }
        transfer(self.state, &self.contract, &target, value)?;
        run_contract(
            self.state,
            self.registry,
            self.schedule,
            self.gas,
            target,
            self.contract,
            value,
            data,
            self.events,
            self.depth + 1,
            EntryPoint::Call,
        )
    }
}

/// Move value between accounts, creating the receiver if absent.
pub(super) fn transfer(
    state: &mut WorldState,
    from: &Address,
    to: &Address,
    amount: u64,
) -> Result<(), ExecError> {
    if amount == 0 {
        return Ok(());
    }
    {
        let sender = state
            .accounts
            .get_mut(from)
            .ok_or_else(|| revert("sender account missing"))?;
        if sender.balance < amount {
            return Err(revert("insufficient balance for value transfer"));
        }
        sender.balance -= amount;
    }
    state
        .accounts
        .entry(*to)
        .or_insert_with(|| super::Account::external(0))
        .balance += amount;
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(super) enum EntryPoint {
    Init,
    Call,
}

/// Charge handler entry, resolve the program, and run it.
#[allow(clippy::too_many_arguments)]
pub(super) fn run_contract(
    state: &mut WorldState,
    registry: &ProgramRegistry,
    schedule: &GasSchedule,
    gas: &mut GasMeter,
    contract: Address,
    caller: Address,
    value: u64,
    data: Vec<u8>,
    events: &mut Vec<Event>,
    depth: u32,
    entry: EntryPoint,
) -> Result<Vec<u8>, ExecError> {
    let program_id = match state.accounts.get(&contract) {
        Some(account) => match &account.kind {
            super::AccountKind::Contract { program_id } => program_id.clone(),
            super::AccountKind::External => return Ok(Vec::new()), // plain transfer
        },
        None => return Ok(Vec::new()),
    };
    gas.charge(schedule.handler_entry)?;
    let program = registry
        .get(&program_id)
        .ok_or_else(|| revert("unknown program"))?;
    let mut env = CallEnv {
        state,
        registry,
        schedule,
        gas,
        contract,
        caller,
        value,
        data,
        events,
        depth,
    };
    match entry {
        EntryPoint::Init => program.init(&mut env),
        EntryPoint::Call => program.call(&mut env),
    }
}

/// A native contract program: deterministic handlers over the environment.
/// Handlers must be pure given (state, caller, value, data, gas budget).
pub trait ContractProgram: Send + Sync {
    fn id(&self) -> &'static str;
    /// Constructor, run once at deployment.
    fn init(&self, env: &mut CallEnv) -> Result<Vec<u8>, ExecError>;
    /// Entry point for calls to the deployed contract.
    fn call(&self, env: &mut CallEnv) -> Result<Vec<u8>, ExecError>;
}

/// Name -> program table. Deployments and calls resolve through this.
pub struct ProgramRegistry {
    programs: BTreeMap<&'static str, Box<dyn ContractProgram>>,
}

impl ProgramRegistry {
    pub fn empty() -> ProgramRegistry {
        ProgramRegistry {
            programs: BTreeMap::new(),
        }
    }

    /// The built-in set: token, train, hotel, booking.
    pub fn builtin() -> ProgramRegistry {
        let mut r = ProgramRegistry::empty();
        r.register(Box::new(TokenProgram));
        r.register(Box::new(CapacityProgram {
            name: TRAIN_PROGRAM,
            label: "TrainBooked",
        }));
        r.register(Box::new(CapacityProgram {
            name: HOTEL_PROGRAM,
            label: "HotelBooked",
        }));
        r.register(Box::new(BookingProgram));
        r
    }

    pub fn register(&mut self, program: Box<dyn ContractProgram>) {
        self.programs.insert(program.id(), program);
    }

    pub fn get(&self, id: &str) -> Option<&dyn ContractProgram> {
        self.programs.get(id).map(|b| b.as_ref())
    }
}

fn read_addr(data: &[u8], at: usize) -> Result<Address, ExecError> {
    let bytes: [u8; 20] = data
        .get(at..at + 20)
        .and_then(|s| s.try_into().ok())
        .ok_or_else(|| revert("truncated address argument"))?;
    Ok(Address(bytes))
}

fn read_u64_arg(data: &[u8], at: usize) -> Result<u64, ExecError> {
    let bytes: [u8; 8] = data
        .get(at..at + 8)
        .and_then(|s| s.try_into().ok())
        .ok_or_else(|| revert("truncated integer argument"))?;
    Ok(u64::from_le_bytes(bytes))
}

// ---------------------------------------------------------------------------
// Token program: the six-function fungible-token interface.
//
// Call data: opcode byte, then little-endian arguments.
//   1 transfer(to, amount)          2 approve(spender, amount)
//   3 transferFrom(from, to, amount)
//   4 balanceOf(owner)              5 allowance(owner, spender)
//   6 totalSupply()
// ---------------------------------------------------------------------------

struct TokenProgram;

fn balance_key(owner: &Address) -> Vec<u8> {
    let mut k = alloc::vec![b'b', b':'];
    k.extend_from_slice(owner.as_bytes());
    k
}

fn allowance_key(owner: &Address, spender: &Address) -> Vec<u8> {
    let mut k = alloc::vec![b'a', b':'];
    k.extend_from_slice(owner.as_bytes());
    k.extend_from_slice(spender.as_bytes());
    k
}

fn transfer_event(from: &Address, to: &Address, amount: u64) -> Vec<u8> {
    let mut p = Vec::with_capacity(48);
    p.extend_from_slice(from.as_bytes());
    p.extend_from_slice(to.as_bytes());
    p.extend_from_slice(&amount.to_le_bytes());
    p
}

impl TokenProgram {
    fn move_tokens(
        env: &mut CallEnv,
        from: &Address,
        to: &Address,
        amount: u64,
    ) -> Result<(), ExecError> {
        let from_key = balance_key(from);
        let have = env.storage_u64(&from_key)?;
        if have < amount {
            return Err(revert("token balance too low"));
        }
        env.storage_put_u64(&from_key, have - amount)?;
        let to_key = balance_key(to);
        let theirs = env.storage_u64(&to_key)?;
        env.storage_put_u64(&to_key, theirs + amount)?;
        env.emit("Transfer", transfer_event(from, to, amount));
        Ok(())
    }
}

impl ContractProgram for TokenProgram {
    fn id(&self) -> &'static str {
        TOKEN_PROGRAM
    }

    // Init data: total supply (u64), assigned to the deployer.
    fn init(&self, env: &mut CallEnv) -> Result<Vec<u8>, ExecError> {
        let supply = read_u64_arg(&env.data, 0)?;
        env.storage_put_u64(b"total", supply)?;
        let deployer = env.caller;
        env.storage_put_u64(&balance_key(&deployer), supply)?;
        env.emit(
            "Transfer",
            transfer_event(&Address([0; 20]), &deployer, supply),
        );
        Ok(Vec::new())
    }

    fn call(&self, env: &mut CallEnv) -> Result<Vec<u8>, ExecError> {
        let opcode = *env.data.first().ok_or_else(|| revert("empty call data"))?;
        match opcode {
            1 => {
                let to = read_addr(&env.data, 1)?;
                let amount = read_u64_arg(&env.data, 21)?;
                let caller = env.caller;
                Self::move_tokens(env, &caller, &to, amount)?;
                Ok(Vec::new())
            }
            2 => {
                let spender = read_addr(&env.data, 1)?;
                let amount = read_u64_arg(&env.data, 21)?;
                let owner = env.caller;
                env.storage_put_u64(&allowance_key(&owner, &spender), amount)?;
                let mut payload = Vec::with_capacity(48);
                payload.extend_from_slice(owner.as_bytes());
                payload.extend_from_slice(spender.as_bytes());
                payload.extend_from_slice(&amount.to_le_bytes());
                env.emit("Approval", payload);
                Ok(Vec::new())
            }
            3 => {
                let from = read_addr(&env.data, 1)?;
                let to = read_addr(&env.data, 21)?;
                let amount = read_u64_arg(&env.data, 41)?;
                let spender = env.caller;
                let key = allowance_key(&from, &spender);
                let allowed = env.storage_u64(&key)?;
                if allowed < amount {
                    return Err(revert("allowance too low"));
                }
                env.storage_put_u64(&key, allowed - amount)?;
                Self::move_tokens(env, &from, &to, amount)?;
                Ok(Vec::new())
            }
            4 => {
                let owner = read_addr(&env.data, 1)?;
                let bal = env.storage_u64(&balance_key(&owner))?;
                Ok(bal.to_le_bytes().to_vec())
            }
            5 => {
                let owner = read_addr(&env.data, 1)?;
                let spender = read_addr(&env.data, 21)?;
                let allowed = env.storage_u64(&allowance_key(&owner, &spender))?;
                Ok(allowed.to_le_bytes().to_vec())
            }
            6 => Ok(env.storage_u64(b"total")?.to_le_bytes().to_vec()),
            _ => Err(revert("unknown token opcode")),
        }
    }
}

/// Call data for token transfer(to, amount).
pub fn token_transfer_data(to: &Address, amount: u64) -> Vec<u8> {
    let mut d = alloc::vec![1u8];
    d.extend_from_slice(to.as_bytes());
    d.extend_from_slice(&amount.to_le_bytes());
    d
}

/// Call data for token approve(spender, amount).
pub fn token_approve_data(spender: &Address, amount: u64) -> Vec<u8> {
    let mut d = alloc::vec![2u8];
    d.extend_from_slice(spender.as_bytes());
    d.extend_from_slice(&amount.to_le_bytes());
    d
}

/// Call data for token transferFrom(from, to, amount).
pub fn token_transfer_from_data(from: &Address, to: &Address, amount: u64) -> Vec<u8> {
    let mut d = alloc::vec![3u8];
    d.extend_from_slice(from.as_bytes());
    d.extend_from_slice(to.as_bytes());
    d.extend_from_slice(&amount.to_le_bytes());
    d
}

/// Call data for token balanceOf(owner).
pub fn token_balance_query(owner: &Address) -> Vec<u8> {
    let mut d = alloc::vec![4u8];
    d.extend_from_slice(owner.as_bytes());
    d
}

// ---------------------------------------------------------------------------
// Train / hotel capacity programs: booking(id) succeeds while seats remain
// and records the booker.
//
// Call data: opcode 1 = booking(order_id u64); 2 = booker_of(order_id u64).
// Init data: capacity (u64).
// ---------------------------------------------------------------------------

struct CapacityProgram {
    name: &'static str,
    label: &'static str,
}

fn seat_key(order_id: u64) -> Vec<u8> {
    let mut k = alloc::vec![b's', b':'];
    k.extend_from_slice(&order_id.to_le_bytes());
    k
}

impl ContractProgram for CapacityProgram {
    fn id(&self) -> &'static str {
        self.name
    }

    fn init(&self, env: &mut CallEnv) -> Result<Vec<u8>, ExecError> {
        let capacity = read_u64_arg(&env.data, 0)?;
        env.storage_put_u64(b"capacity", capacity)?;
        env.storage_put_u64(b"booked", 0)?;
        Ok(Vec::new())
    }

    fn call(&self, env: &mut CallEnv) -> Result<Vec<u8>, ExecError> {
        let opcode = *env.data.first().ok_or_else(|| revert("empty call data"))?;
        match opcode {
            1 => {
                let order_id = read_u64_arg(&env.data, 1)?;
                let key = seat_key(order_id);
                if env.storage_get(&key)?.is_some() {
                    return Err(revert("order id already booked"));
                }
                let capacity = env.storage_u64(b"capacity")?;
                let booked = env.storage_u64(b"booked")?;
                if booked >= capacity {
                    return Err(revert("sold out"));
                }
                env.storage_put_u64(b"booked", booked + 1)?;
                let caller = env.caller;
                env.storage_put(&key, caller.as_bytes().to_vec())?;
                let mut payload = order_id.to_le_bytes().to_vec();
                payload.extend_from_slice(caller.as_bytes());
                env.emit(self.label, payload);
                Ok(Vec::new())
            }
            2 => {
                let order_id = read_u64_arg(&env.data, 1)?;
                Ok(env.storage_get(&seat_key(order_id))?.unwrap_or_default())
            }
            _ => Err(revert("unknown booking opcode")),
        }
    }
}

// ---------------------------------------------------------------------------
// Booking program: order(id) books the train and the hotel in one
// transaction; if either leg reverts, both do.
//
// Init data: train address (20) || hotel address (20).
// Call data: opcode 1 = order(order_id u64).
// ---------------------------------------------------------------------------

struct BookingProgram;

impl ContractProgram for BookingProgram {
    fn id(&self) -> &'static str {
        BOOKING_PROGRAM
    }

    fn init(&self, env: &mut CallEnv) -> Result<Vec<u8>, ExecError> {
        let train = read_addr(&env.data, 0)?;
        let hotel = read_addr(&env.data, 20)?;
        env.storage_put(b"train", train.as_bytes().to_vec())?;
        env.storage_put(b"hotel", hotel.as_bytes().to_vec())?;
        Ok(Vec::new())
    }

    fn call(&self, env: &mut CallEnv) -> Result<Vec<u8>, ExecError> {
        let opcode = *env.data.first().ok_or_else(|| revert("empty call data"))?;
        if opcode != 1 {
            return Err(revert("unknown booking opcode"));
        }
        let order_id = read_u64_arg(&env.data, 1)?;
        let train = Address(
            env.storage_get(b"train")?
                .and_then(|v| v.try_into().ok())
                .ok_or_else(|| revert("train address unset"))?,
        );
        let hotel = Address(
            env.storage_get(b"hotel")?
                .and_then(|v| v.try_into().ok())
                .ok_or_else(|| revert("hotel address unset"))?,
        );
        let book = {
            let mut d = alloc::vec![1u8];
            d.extend_from_slice(&order_id.to_le_bytes());
            d
        };
        env.call_contract(train, 0, book.clone())?;
        env.call_contract(hotel, 0, book)?;
        env.emit("OrderBooked", order_id.to_le_bytes().to_vec());
        Ok(Vec::new())
    }
}

/// Call data for booking order(order_id).
pub fn booking_order_data(order_id: u64) -> Vec<u8> {
    let mut d = alloc::vec![1u8];
    d.extend_from_slice(&order_id.to_le_bytes());
    d
}
