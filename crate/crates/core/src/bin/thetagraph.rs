fn main() -> std::process::ExitCode {
    thetagraph::cli::main()
}
