fn main() {
    std::process::exit(frame_importance::cli::dispatch(std::env::args_os()));
}
