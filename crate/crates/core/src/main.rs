fn main() {
    std::process::exit(skewjoin::cli::main())
}
