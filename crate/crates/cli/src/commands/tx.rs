use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Deserialize;

use chainbench_core::crypto::{keygen_from_seed, Address, CurveParams, KeyPair};
use chainbench_core::utxo::{
    apply_tx, build_consolidation, build_joint_payment, build_transfer, fee_rate, validate_tx,
    OutPoint, TxOutput, UtxoSet, UtxoTransaction,
};

use crate::{domain, CliError, OutputSink};

#[derive(Subcommand, Debug)]
pub enum TxCommand {
    /// Build a signed transfer with change from a wallet scenario.
    Create(TxArgs),
    /// Merge every output a party owns into one.
    Consolidate(TxArgs),
    /// Co-signed multi-payer transaction.
    Joint(TxArgs),
}

#[derive(Args, Debug)]
pub struct TxArgs {
    /// Wallet scenario config (JSON).
    #[arg(long)]
    pub config: PathBuf,
}

/// Wallet scenario: named parties with deterministic keys, a genesis mint
/// establishing the unspent set, and the action parameters.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WalletConfig {
    #[serde(default = "default_curve")]
    curve: String,
    parties: Vec<Party>,
    /// Outputs of the inputless genesis transaction funding the wallet.
    genesis: Vec<GenesisOutput>,
    #[serde(default)]
    transfer: Option<TransferSpec>,
    #[serde(default)]
    consolidate: Option<ConsolidateSpec>,
    #[serde(default)]
    joint: Option<JointSpec>,
}

fn default_curve() -> String {
    "toy9739".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Party {
    name: String,
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenesisOutput {
    to: String,
    amount: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransferSpec {
    from: String,
    recipients: Vec<Payment>,
    #[serde(default)]
    fee: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Payment {
    to: String,
    amount: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConsolidateSpec {
    who: String,
    #[serde(default)]
    fee: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointSpec {
    /// Each payer funds the payment with one genesis output.
    payers: Vec<JointPayer>,
    recipient: String,
    amount: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointPayer {
    who: String,
    /// Index into the genesis outputs list.
    genesis_index: u32,
}

struct Wallet {
    params: CurveParams,
    keys: BTreeMap<String, KeyPair>,
    state: UtxoSet,
    genesis_txid: chainbench_core::crypto::HashDigest,
}

impl Wallet {
    fn build(config: &WalletConfig) -> Result<Wallet, CliError> {
        let params = super::curve_by_name(&config.curve)?;
        let mut keys = BTreeMap::new();
        for party in &config.parties {
            keys.insert(party.name.clone(), keygen_from_seed(party.seed, &params));
        }
        let outputs: Result<Vec<TxOutput>, CliError> = config
            .genesis
            .iter()
            .map(|g| {
                Ok(TxOutput {
                    amount: g.amount,
                    recipient: address_of(&keys, &g.to, &params)?,
                })
            })
            .collect();
        let genesis = UtxoTransaction {
            inputs: vec![],
            outputs: outputs?,
            coinbase_nonce: 0,
        };
        let genesis_txid = genesis.txid(&params);
        let state = apply_tx(&genesis, &UtxoSet::new(), &params).map_err(domain)?;
        Ok(Wallet {
            params,
            keys,
            state,
            genesis_txid,
        })
    }

    fn key(&self, name: &str) -> Result<&KeyPair, CliError> {
        self.keys
            .get(name)
            .ok_or_else(|| CliError::Domain(format!("unknown party {name:?}")))
    }
}

fn address_of(
    keys: &BTreeMap<String, KeyPair>,
    name: &str,
    params: &CurveParams,
) -> Result<Address, CliError> {
    keys.get(name)
        .map(|k| k.address(params))
        .ok_or_else(|| CliError::Domain(format!("unknown party {name:?}")))
}

pub fn run(cmd: &TxCommand, sink: &mut OutputSink) -> Result<(), CliError> {
    let args = match cmd {
        TxCommand::Create(a) | TxCommand::Consolidate(a) | TxCommand::Joint(a) => a,
    };
    let bytes = sink.read_config(&args.config)?;
    let config: WalletConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Domain(format!("bad config: {e}")))?;
    let wallet = Wallet::build(&config)?;

    let tx = match cmd {
        TxCommand::Create(_) => {
            let spec = config
                .transfer
                .as_ref()
                .ok_or_else(|| CliError::Domain("config lacks a \"transfer\" section".into()))?;
            let recipients: Result<Vec<(Address, u64)>, CliError> = spec
                .recipients
                .iter()
                .map(|p| Ok((address_of(&wallet.keys, &p.to, &wallet.params)?, p.amount)))
                .collect();
            build_transfer(
                wallet.key(&spec.from)?,
                &recipients?,
                &wallet.state,
                spec.fee,
                &wallet.params,
            )
            .map_err(domain)?
        }
        TxCommand::Consolidate(_) => {
            let spec = config.consolidate.as_ref().ok_or_else(|| {
                CliError::Domain("config lacks a \"consolidate\" section".into())
            })?;
            build_consolidation(wallet.key(&spec.who)?, &wallet.state, spec.fee, &wallet.params)
                .map_err(domain)?
        }
        TxCommand::Joint(_) => {
            let spec = config
                .joint
                .as_ref()
                .ok_or_else(|| CliError::Domain("config lacks a \"joint\" section".into()))?;
            let mut keys = Vec::new();
            let mut contributions = Vec::new();
            for payer in &spec.payers {
                keys.push(wallet.key(&payer.who)?);
                contributions.push(OutPoint::new(wallet.genesis_txid, payer.genesis_index));
            }
            build_joint_payment(
                &keys,
                &contributions,
                address_of(&wallet.keys, &spec.recipient, &wallet.params)?,
                spec.amount,
                &wallet.state,
                &wallet.params,
            )
            .map_err(domain)?
        }
    };

    validate_tx(&tx, &wallet.state, &wallet.params).map_err(domain)?;
    let (fee, size) = fee_rate(&tx, &wallet.state, &wallet.params).map_err(domain)?;
    let after = apply_tx(&tx, &wallet.state, &wallet.params).map_err(domain)?;
    let txid = tx.txid(&wallet.params);

    let balances: BTreeMap<String, u64> = wallet
        .keys
        .iter()
        .map(|(name, key)| {
            (
                name.clone(),
                chainbench_core::utxo::balance_of(&key.address(&wallet.params), &after),
            )
        })
        .collect();
    let result = serde_json::json!({
        "curve": wallet.params.name,
        "txid": txid.to_hex(),
        "inputs": tx.inputs.len(),
        "outputs": tx.outputs.iter().map(|o| serde_json::json!({
            "to": o.recipient.to_base58(),
            "amount": o.amount,
        })).collect::<Vec<_>>(),
        "fee": fee,
        "size_bytes": size,
        "fee_per_byte": fee as f64 / size as f64,
        "hex": hex::encode(tx.serialize(&wallet.params, true)),
        "validates": true,
        "balances_after": balances,
    });
    sink.push_text(format!("txid: {txid}"));
    sink.push_text(format!(
        "{} inputs, {} outputs, fee {fee} over {size} bytes",
        tx.inputs.len(),
        tx.outputs.len()
    ));
    for o in &tx.outputs {
        sink.push_text(format!("  -> {}: {}", o.recipient, o.amount));
    }
    sink.write_artifact("tx.json", serde_json::to_string_pretty(&result)?.as_bytes())?;
    sink.set_result(result);
    Ok(())
}
