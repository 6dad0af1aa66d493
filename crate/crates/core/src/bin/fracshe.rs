use clap::{Parser, Subcommand};
use fracshe::harness::{self, Experiment, RunArgs};

#[derive(Parser)]
#[command(name = "fracshe", version, about = "Fractional stochastic heat equation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral kernel against closed forms and the scaling identity.
    KernelTest(RunArgs),
    /// Empirical noise covariance and smoothing convergence.
    NoiseTest(RunArgs),
    /// Raw path ensemble.
    Simulate(RunArgs),
    /// Moment table and Lyapunov fit.
    Moments(RunArgs),
    /// Exceedance probabilities against the moment bound.
    Tails(RunArgs),
    /// Coupled comparison audits.
    Compare(RunArgs),
    /// Growth of the supremum over balls.
    SupGrowth(RunArgs),
    /// Variogram Hölder exponents.
    Holder(RunArgs),
    /// Supremum evolution from the trichotomy profiles.
    Trichotomy(RunArgs),
    /// Localized Picard approximation and independence.
    PicardApprox(RunArgs),
}

fn main() {
    let (experiment, args) = match Cli::parse().command {
        Command::KernelTest(a) => (Experiment::KernelTest, a),
        Command::NoiseTest(a) => (Experiment::NoiseTest, a),
        Command::Simulate(a) => (Experiment::Simulate, a),
        Command::Moments(a) => (Experiment::Moments, a),
        Command::Tails(a) => (Experiment::Tails, a),
        Command::Compare(a) => (Experiment::Compare, a),
        Command::SupGrowth(a) => (Experiment::SupGrowth, a),
        Command::Holder(a) => (Experiment::Holder, a),
        Command::Trichotomy(a) => (Experiment::Trichotomy, a),
        Command::PicardApprox(a) => (Experiment::PicardApprox, a),
    };
    std::process::exit(harness::run(experiment, &args));
}
