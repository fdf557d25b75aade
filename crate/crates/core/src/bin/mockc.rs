//! Scripted mock compiler used by the test suite.

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(jvmfuzz::harness::mock::main_with_args(&args));
}
