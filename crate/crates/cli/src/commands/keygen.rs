use clap::Args;

use chainbench_core::crypto::keygen_from_seed;

use crate::{CliError, OutputSink};

#[derive(Args, Debug)]
pub struct KeygenArgs {
    /// Curve profile: toy17, toy10007, toy9739, or secp256k1.
    #[arg(long, default_value = "secp256k1")]
    pub curve: String,
}

pub fn run(args: &KeygenArgs, seed: u64, sink: &mut OutputSink) -> Result<(), CliError> {
    let params = super::curve_by_name(&args.curve)?;
    let key = keygen_from_seed(seed, &params);
    let address = key.address(&params);
    let private_hex = hex::encode(key.private.to_bytes_be());
    let public_hex = hex::encode(params.serialize_point(&key.public));
    let result = serde_json::json!({
        "curve": params.name,
        "seed": seed,
        "private_key": private_hex,
        "public_key": public_hex,
        "address": address.to_base58(),
    });
    sink.push_text(format!("curve:   {}", params.name));
    sink.push_text(format!("private: {private_hex}"));
    sink.push_text(format!("public:  {public_hex}"));
    sink.push_text(format!("address: {address}"));
    sink.write_artifact("key.json", serde_json::to_string_pretty(&result)?.as_bytes())?;
    sink.set_result(result);
    Ok(())
}
