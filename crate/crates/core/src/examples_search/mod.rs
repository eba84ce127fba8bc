//! Worked examples as reproducible fixtures, bounded searches for new
//! certificate data, and an exact oracle for cyclic representation types.

mod fixtures;
mod oracle;
mod search;

pub use fixtures::{build_example, reproduce, ExampleFixture, FixtureError, Params, EXAMPLE_IDS};
pub use oracle::{
    characteristic_polynomial, cyclotomic, oracle_rep_decomposition, random_cyclic_instance,
    CyclicInstance, OracleError, ORACLE_TOLERANCE,
};
pub use search::{
    canonical_sign, find_characteristic, find_characteristic_in, find_orthogonal_square2_system,
    find_orthogonal_square2_system_in, SearchBox, SearchError, SearchMode,
};
