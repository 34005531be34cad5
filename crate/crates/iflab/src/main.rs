//! Binary entry point: parse arguments, dispatch, exit with the
//! subcommand's status.

fn main() {
    std::process::exit(iflab::run());
}
