fn main() -> std::process::ExitCode {
    hodge_currents::cli::main()
}
