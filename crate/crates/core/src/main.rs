fn main() {
    let code = ortho_traj::cli::run(std::env::args_os());
    std::process::exit(code);
}
