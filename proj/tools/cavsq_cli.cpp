#include "cavsq/runner.hpp"

int main(int argc, char** argv) { return cavsq::cli::main_entry(argc, argv); }
