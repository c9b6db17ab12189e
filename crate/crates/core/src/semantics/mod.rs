//! Name resolution, call classification and control-flow graphs.

pub mod cfg;
pub mod effects;
pub mod model;

pub use cfg::{build_cfg, reachable_set, BlockId, Cfg, CfgStmt, CondKind, Edge, EdgeKind, Node, StmtId};
pub use effects::{classify_call, CallClass, CallClassifier, Effect, EffectContext, EffectSet};
pub use model::{resolve, CallEdge, CallTarget, FnRef, FunctionInfo, ModuleRef, SemanticError, SemanticModel};
