//! Runs the cheap examples that take no arguments.

mod spectral_basics {
    include!("../examples/spectral_basics.rs");
}

mod prior_draws {
    include!("../examples/prior_draws.rs");
}

mod likelihood {
    include!("../examples/likelihood.rs");
}

#[test]
fn spectral_basics_runs() {
    spectral_basics::main().unwrap();
}

#[test]
fn prior_draws_runs() {
    prior_draws::main().unwrap();
}

#[test]
fn likelihood_runs() {
    likelihood::main().unwrap();
}
