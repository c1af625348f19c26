//! Transaction graph: parsing, indexing and validation of chain files.
//!
//! A chain file is a JSON document listing transactions in confirmation
//! order. Values are integer satoshi amounts and addresses are opaque
//! strings.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::ChainError;

pub const SATOSHI_PER_BTC: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outpoint {
    pub txid: String,
    pub vout: u32,
}

impl Outpoint {
    pub fn new(txid: impl Into<String>, vout: u32) -> Self {
        Self {
            txid: txid.into(),
            vout,
        }
    }
}

impl fmt::Display for Outpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.txid, self.vout)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxOutput {
    pub address: String,
    pub value_sat: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub txid: String,
    pub is_coinbase: bool,
    pub inputs: Vec<Outpoint>,
    pub outputs: Vec<TxOutput>,
}

impl Transaction {
    pub fn output_total(&self) -> u64 {
        self.outputs.iter().map(|o| o.value_sat).sum()
    }
}

/// On-disk form of a chain file. Field names are part of the file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub transactions: Vec<RawTransaction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTransaction {
    pub txid: String,
    pub coinbase: bool,
    pub inputs: Vec<Outpoint>,
    pub outputs: Vec<RawOutput>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub address: String,
    pub value_sat: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "role", content = "index", rename_all = "lowercase")]
pub enum Role {
    Input(u32),
    Output(u32),
}

/// One place an address shows up in the graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Appearance {
    pub txid: String,
    #[serde(flatten)]
    pub role: Role,
}

/// Immutable, indexed transaction graph.
#[derive(Debug, Clone)]
pub struct TransactionSet {
    transactions: Vec<Transaction>,
    position: HashMap<String, usize>,
    by_address: BTreeMap<String, Vec<(usize, Role)>>,
    spenders: HashMap<Outpoint, Vec<usize>>,
}

impl PartialEq for TransactionSet {
    fn eq(&self, other: &Self) -> bool {
        self.transactions == other.transactions
    }
}

impl Eq for TransactionSet {}

/// Parses and indexes a chain file.
pub fn parse_chain_file(raw: &[u8]) -> Result<TransactionSet, ChainError> {
    let text = std::str::from_utf8(raw).map_err(|e| ChainError::Parse {
        line: 0,
        column: e.valid_up_to(),
        message: format!("input is not valid UTF-8: {e}"),
    })?;
    let doc: Value = serde_json::from_str(text).map_err(|e| ChainError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let file = chain_file_from_value(doc)?;
    TransactionSet::from_chain_file(&file)
}

fn chain_file_from_value(doc: Value) -> Result<ChainFile, ChainError> {
    let Value::Object(mut top) = doc else {
        return Err(ChainError::schema(
            None,
            None,
            "top level must be an object",
        ));
    };
    if let Some(extra) = top.keys().find(|k| k.as_str() != "transactions") {
        return Err(ChainError::schema(
            None,
            Some(extra.clone()),
            format!("unknown field `{extra}`"),
        ));
    }
    let Some(Value::Array(items)) = top.remove("transactions") else {
        return Err(ChainError::schema(
            None,
            Some("transactions".into()),
            "missing or non-array field `transactions`",
        ));
    };
    let mut transactions = Vec::with_capacity(items.len());
    for (index, item) in items.into_iter().enumerate() {
        let txid = item
            .get("txid")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .unwrap_or_else(|| format!("#{index}"));
        let tx: RawTransaction = serde_json::from_value(item)
            .map_err(|e| ChainError::schema(Some(txid.clone()), None, e.to_string()))?;
        transactions.push(tx);
    }
    Ok(ChainFile { transactions })
}

impl TransactionSet {
    /// Builds the set from the on-disk form, enforcing per-transaction schema
    /// rules. Dangling references and double spends are left to [`validate_set`].
    pub fn from_chain_file(file: &ChainFile) -> Result<Self, ChainError> {
        let mut outputs_len: HashMap<&str, usize> = HashMap::new();
        for tx in &file.transactions {
            if outputs_len.insert(&tx.txid, tx.outputs.len()).is_some() {
                return Err(ChainError::schema(
                    Some(tx.txid.clone()),
                    Some("txid".into()),
                    "duplicate txid",
                ));
            }
        }

        let mut transactions = Vec::with_capacity(file.transactions.len());
        for raw in &file.transactions {
            let txid = &raw.txid;
            let bad = |field: &str, msg: String| {
                ChainError::schema(Some(txid.clone()), Some(field.to_owned()), msg)
            };
            if txid.is_empty() {
                return Err(bad("txid", "txid must be non-empty".into()));
            }
            if raw.coinbase && !raw.inputs.is_empty() {
                return Err(bad(
                    "inputs",
                    "coinbase transaction must not have inputs".into(),
                ));
            }
            if !raw.coinbase && raw.inputs.is_empty() {
                return Err(bad(
                    "inputs",
                    "non-coinbase transaction needs at least one input".into(),
                ));
            }
            if raw.outputs.is_empty() {
                return Err(bad(
                    "outputs",
                    "transaction needs at least one output".into(),
                ));
            }
            let mut outputs = Vec::with_capacity(raw.outputs.len());
            for (i, out) in raw.outputs.iter().enumerate() {
                if out.value_sat < 0 {
                    return Err(bad(
                        &format!("outputs[{i}].value_sat"),
                        format!("negative value {}", out.value_sat),
                    ));
                }
                if out.address.is_empty() {
                    return Err(bad(
                        &format!("outputs[{i}].address"),
                        "empty address".into(),
                    ));
                }
                outputs.push(TxOutput {
                    address: out.address.clone(),
                    value_sat: out.value_sat as u64,
                });
            }
            for (i, input) in raw.inputs.iter().enumerate() {
                if let Some(&len) = outputs_len.get(input.txid.as_str()) {
                    if input.vout as usize >= len {
                        return Err(bad(
                            &format!("inputs[{i}].vout"),
                            format!(
                                "spends {} but {} has only {len} output(s)",
                                input, input.txid
                            ),
                        ));
                    }
                }
            }
            transactions.push(Transaction {
                txid: txid.clone(),
                is_coinbase: raw.coinbase,
                inputs: raw.inputs.clone(),
                outputs,
            });
        }
        Ok(Self::index(transactions))
    }

    fn index(transactions: Vec<Transaction>) -> Self {
        let position: HashMap<String, usize> = transactions
            .iter()
            .enumerate()
            .map(|(i, tx)| (tx.txid.clone(), i))
            .collect();
        let mut by_address: BTreeMap<String, Vec<(usize, Role)>> = BTreeMap::new();
        let mut spenders: HashMap<Outpoint, Vec<usize>> = HashMap::new();
        for (pos, tx) in transactions.iter().enumerate() {
            for (i, input) in tx.inputs.iter().enumerate() {
                spenders.entry(input.clone()).or_default().push(pos);
                let resolved = position
                    .get(&input.txid)
                    .filter(|&&p| p < pos)
                    .and_then(|&p| transactions[p].outputs.get(input.vout as usize));
                if let Some(out) = resolved {
                    by_address
                        .entry(out.address.clone())
                        .or_default()
                        .push((pos, Role::Input(i as u32)));
                }
            }
            for (i, out) in tx.outputs.iter().enumerate() {
                by_address
                    .entry(out.address.clone())
                    .or_default()
                    .push((pos, Role::Output(i as u32)));
            }
        }
        Self {
            transactions,
            position,
            by_address,
            spenders,
        }
    }

    pub fn to_chain_file(&self) -> ChainFile {
        ChainFile {
            transactions: self
                .transactions
                .iter()
                .map(|tx| RawTransaction {
                    txid: tx.txid.clone(),
                    coinbase: tx.is_coinbase,
                    inputs: tx.inputs.clone(),
                    outputs: tx
                        .outputs
                        .iter()
                        .map(|o| RawOutput {
                            address: o.address.clone(),
                            value_sat: o.value_sat as i64,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_chain_file()).expect("chain file serializes")
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn get(&self, txid: &str) -> Option<&Transaction> {
        self.position.get(txid).map(|&i| &self.transactions[i])
    }

    /// Confirmation position of a transaction.
    pub fn position(&self, txid: &str) -> Option<usize> {
        self.position.get(txid).copied()
    }

    pub fn addresses(&self) -> impl Iterator<Item = &str> {
        self.by_address.keys().map(String::as_str)
    }

    pub fn appearances(&self, address: &str) -> Vec<Appearance> {
        self.by_address
            .get(address)
            .map(|v| {
                v.iter()
                    .map(|&(pos, role)| Appearance {
                        txid: self.transactions[pos].txid.clone(),
                        role,
                    })
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Position of the first transaction mentioning `address`, if any.
    pub fn first_seen(&self, address: &str) -> Option<usize> {
        self.by_address
            .get(address)
            .and_then(|v| v.first())
            .map(|&(pos, _)| pos)
    }

    /// Transactions spending `op`, in confirmation order.
    pub fn spenders_of(&self, op: &Outpoint) -> &[usize] {
        self.spenders.get(op).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Resolves an outpoint against an output of a transaction strictly
    /// earlier than `before` (or anywhere when `before` is `None`).
    fn resolve_at(&self, op: &Outpoint, before: Option<usize>) -> Option<&TxOutput> {
        let pos = *self.position.get(&op.txid)?;
        if before.is_some_and(|b| pos >= b) {
            return None;
        }
        self.transactions[pos].outputs.get(op.vout as usize)
    }

    /// Resolved input addresses of the transaction at `pos`, in input order.
    pub fn input_addresses(&self, pos: usize) -> Vec<&str> {
        self.transactions[pos]
            .inputs
            .iter()
            .filter_map(|op| self.resolve_at(op, Some(pos)))
            .map(|o| o.address.as_str())
            .collect()
    }

    /// Distinct resolved input addresses, sorted.
    pub fn distinct_input_addresses(&self, pos: usize) -> Vec<&str> {
        let mut v = self.input_addresses(pos);
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn tx_at(&self, pos: usize) -> &Transaction {
        &self.transactions[pos]
    }
}

/// Looks up the address and value of the output an outpoint refers to.
pub fn resolve_input(ts: &TransactionSet, op: &Outpoint) -> Result<(String, u64), ChainError> {
    ts.resolve_at(op, None)
        .map(|o| (o.address.clone(), o.value_sat))
        .ok_or_else(|| ChainError::Lookup {
            txid: op.txid.clone(),
            vout: op.vout,
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FindingKind {
    NegativeFee {
        fee: i128,
    },
    DanglingOutpoint {
        outpoint: Outpoint,
    },
    DoubleSpend {
        outpoint: Outpoint,
        first_spender: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub txid: String,
    #[serde(flatten)]
    pub kind: FindingKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxFee {
    pub txid: String,
    /// `None` when some input could not be resolved.
    pub fee: Option<i128>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub fees: Vec<TxFee>,
    pub findings: Vec<Finding>,
    pub coinbase_total: u128,
    pub fee_total: i128,
    pub unspent_total: u128,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn fee_of(&self, txid: &str) -> Option<i128> {
        self.fees
            .iter()
            .find(|f| f.txid == txid)
            .and_then(|f| f.fee)
    }

    /// Minted value equals fees plus the value still unspent.
    pub fn value_conserved(&self) -> bool {
        self.coinbase_total as i128 == self.fee_total + self.unspent_total as i128
    }
}

/// Computes fees and flags negative fees, dangling outpoints and double spends.
pub fn validate_set(ts: &TransactionSet) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut spent: HashMap<&Outpoint, &str> = HashMap::new();
    for (pos, tx) in ts.transactions.iter().enumerate() {
        if tx.is_coinbase {
            report.coinbase_total += tx.output_total() as u128;
            continue;
        }
        let mut input_total: i128 = 0;
        let mut all_resolved = true;
        for op in &tx.inputs {
            match ts.resolve_at(op, Some(pos)) {
                Some(out) => input_total += out.value_sat as i128,
                None => {
                    all_resolved = false;
                    report.findings.push(Finding {
                        txid: tx.txid.clone(),
                        kind: FindingKind::DanglingOutpoint {
                            outpoint: op.clone(),
                        },
                    });
                }
            }
            if let Some(first) = spent.get(op) {
                report.findings.push(Finding {
                    txid: tx.txid.clone(),
                    kind: FindingKind::DoubleSpend {
                        outpoint: op.clone(),
                        first_spender: (*first).to_owned(),
                    },
                });
            } else {
                spent.insert(op, &tx.txid);
            }
        }
        let fee = all_resolved.then(|| input_total - tx.output_total() as i128);
        if let Some(fee) = fee {
            report.fee_total += fee;
            if fee < 0 {
                report.findings.push(Finding {
                    txid: tx.txid.clone(),
                    kind: FindingKind::NegativeFee { fee },
                });
            }
        }
        report.fees.push(TxFee {
            txid: tx.txid.clone(),
            fee,
        });
    }
    for tx in &ts.transactions {
        for (i, out) in tx.outputs.iter().enumerate() {
            let op = Outpoint::new(tx.txid.clone(), i as u32);
            if !spent.contains_key(&op) {
                report.unspent_total += out.value_sat as u128;
            }
        }
    }
    report
}
