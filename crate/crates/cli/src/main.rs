use clap::{Parser, Subcommand};
use spinbath_cli::{config, exit, run_and_write, Command, Flags};

#[derive(Debug, Parser)]
#[command(name = "spinbath", version, about = "Thermodynamics of a spin coupled to a dissipative bath")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Free energy, entropy and specific heat over a temperature grid
    Scan(Flags),
    /// Specific-heat peak temperature against damping, with a semilog fit
    Transition(Flags),
    /// Cross-check the closed-form series against quadrature
    SeriesCheck(Flags),
    /// Check a discretized bath: noise statistics, free energy, normal modes
    BathVerify(Flags),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (command, flags) = match cli.command {
        Sub::Scan(f) => (Command::Scan, f),
        Sub::Transition(f) => (Command::Transition, f),
        Sub::SeriesCheck(f) => (Command::SeriesCheck, f),
        Sub::BathVerify(f) => (Command::BathVerify, f),
    };
    let code = match config::resolve(command, &flags) {
        Ok(cfg) => run_and_write(&cfg),
        Err(e) => {
            eprintln!("spinbath: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
