//! Registry of tanh approximators behind one object-safe trait.
//!
//! Every strategy — the integer kernel, the polynomial and rational baselines,
//! the f64 oracle — is driven through `Approximator`, so the evaluation and
//! benchmarking code never branches on which one it holds. Builders live in a
//! string-keyed map; CLI flags and reports refer to approximators by these ids.

use std::collections::BTreeMap;

use once_cell::sync::Lazy;

use crate::baselines::minimax::fit_minimax;
use crate::baselines::pade::fit_pade;
use crate::baselines::TaylorPoly;
use crate::bf16::Bf16;
use crate::kernel::ktanh_eval;
use crate::oracle::tanh_oracle;
use crate::table::ParamTable;

pub trait Approximator: Send + Sync {
    fn id(&self) -> &'static str;
    fn eval(&self, x: Bf16) -> Bf16;
}

/// Inputs a builder may depend on; today that is just the kernel's table,
/// which lets callers swap in generated or ablated parameters.
#[derive(Clone)]
pub struct BuildContext {
    pub table: ParamTable,
}

impl Default for BuildContext {
    fn default() -> Self {
        BuildContext { table: ParamTable::reference().clone() }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown approximator `{id}` (known: {known})")]
pub struct UnknownId {
    pub id: String,
    pub known: String,
}

struct KTanh {
    table: ParamTable,
}

impl Approximator for KTanh {
    fn id(&self) -> &'static str {
        "ktanh"
    }
    fn eval(&self, x: Bf16) -> Bf16 {
        ktanh_eval(x, &self.table)
    }
}

struct Oracle;

impl Approximator for Oracle {
    fn id(&self) -> &'static str {
        "oracle"
    }
    fn eval(&self, x: Bf16) -> Bf16 {
        Bf16::encode(tanh_oracle(x.decode()))
    }
}

/// tanh(x) ≈ x — the do-nothing floor every real approximator must beat on
/// the below-threshold band, and exactly what the kernel's bypass does there.
struct Identity;

impl Approximator for Identity {
    fn id(&self) -> &'static str {
        "identity"
    }
    fn eval(&self, x: Bf16) -> Bf16 {
        x
    }
}

/// Adapter giving any f64 evaluator an id and the decode→eval→encode framing.
struct Named<F> {
    id: &'static str,
    f: F,
}

impl<F: Fn(f64) -> f64 + Send + Sync> Approximator for Named<F> {
    fn id(&self) -> &'static str {
        self.id
    }
    fn eval(&self, x: Bf16) -> Bf16 {
        Bf16::encode((self.f)(x.decode()))
    }
}

type Builder = fn(&BuildContext) -> Box<dyn Approximator>;

static REGISTRY: Lazy<BTreeMap<&'static str, Builder>> = Lazy::new(|| {
    let mut m: BTreeMap<&'static str, Builder> = BTreeMap::new();
    m.insert("ktanh", |ctx| Box::new(KTanh { table: ctx.table.clone() }));
    m.insert("oracle", |_| Box::new(Oracle));
    m.insert("identity", |_| Box::new(Identity));
    m.insert("minimax2", |_| {
        let poly = fit_minimax(2, 8, 4.0).expect("fixed config").poly;
        Box::new(Named { id: "minimax2", f: move |x| poly.eval_f64(x) })
    });
    m.insert("minimax3", |_| {
        let poly = fit_minimax(3, 8, 4.0).expect("fixed config").poly;
        Box::new(Named { id: "minimax3", f: move |x| poly.eval_f64(x) })
    });
    m.insert("pade32", |_| {
        let pad = fit_pade(3, 2).expect("fixed config");
        Box::new(Named { id: "pade32", f: move |x| pad.eval_f64(x) })
    });
    m.insert("pade78", |_| {
        let pad = fit_pade(7, 8).expect("fixed config");
        Box::new(Named { id: "pade78", f: move |x| pad.eval_f64(x) })
    });
    m.insert("taylor2", |_| {
        let t = TaylorPoly::new(2);
        Box::new(Named { id: "taylor2", f: move |x| t.eval_f64(x) })
    });
    m.insert("taylor3", |_| {
        let t = TaylorPoly::new(3);
        Box::new(Named { id: "taylor3", f: move |x| t.eval_f64(x) })
    });
    m
});

pub fn known_ids() -> Vec<&'static str> {
    REGISTRY.keys().copied().collect()
}

pub fn build(id: &str, ctx: &BuildContext) -> Result<Box<dyn Approximator>, UnknownId> {
    match REGISTRY.get(id) {
        Some(builder) => Ok(builder(ctx)),
        None => Err(UnknownId { id: id.to_string(), known: known_ids().join(", ") }),
    }
}
