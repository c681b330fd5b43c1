//! Surface syntax of CP-theories: declarations, laws and formulas.
//!
//! ```text
//! range day = 1..3.
//! sort person = John, Mary.
//! pred Throws(person), Break/0.
//! pred Infection/0 exogenous.
//! @label !x (A(x):0.3) or (B(x):1/6) <- C(x) & ~?y D(x,y).
//! ```

mod ast;
mod error;
mod lexer;
mod parser;
mod printer;

pub use ast::*;
pub use error::SyntaxError;
pub use parser::{parse_formula, parse_law, parse_theory, parse_theory_with, ParseOptions};
pub use printer::{print_formula, print_law, print_theory, print_vocabulary};
