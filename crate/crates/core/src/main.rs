fn main() {
    let outcome = formal_variational::frontend::run_command(std::env::args_os());
    print!("{}", outcome.rendered);
    std::process::exit(outcome.exit_code);
}
