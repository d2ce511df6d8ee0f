//! Compiles the declarative `match()` subset of Gremlin into a graph algebra
//! and evaluates algebra plans over in-memory property graphs with multiset
//! semantics.
//!
//! ```
//! use gremlin_algebra::{compile, evaluate, parse_traversal, Graph};
//!
//! let graph = Graph::modern();
//! let ast = parse_traversal(r#"g.V().has("name","marko").out("knows").values("age").max()"#).unwrap();
//! let plan = compile(&ast).unwrap();
//! let result = evaluate(&plan, &graph).unwrap();
//! assert_eq!(result.rows().len(), 1);
//! ```

pub mod algebra;
pub mod compiler;
pub mod evaluator;
pub mod graph;
pub mod output;
pub mod parser;

pub use algebra::{render_plan, validate, AlgebraExpr, PlanStyle, Var};
pub use compiler::{compile, compile_with, CompileError, CompileOptions};
pub use evaluator::{evaluate, BindingSet, EvalError, Value};
pub use graph::{Graph, GraphError, PropertyValue};
pub use parser::{parse_bytes, parse_traversal, ParseError, TraversalAst};
