fn main() -> std::process::ExitCode {
    kinex::cli::main()
}
