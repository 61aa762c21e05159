fn main() {
    let env = |key: &str| std::env::var(key).ok();
    let code = crmcat::cli::run(std::env::args_os(), &env, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
