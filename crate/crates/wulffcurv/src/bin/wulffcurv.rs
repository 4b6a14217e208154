fn main() {
    std::process::exit(wulffcurv::cli::run());
}
