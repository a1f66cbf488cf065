fn main() { std::process::exit(axiomlab::cli::main()) }
