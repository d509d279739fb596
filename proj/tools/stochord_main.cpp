#include "stochord/cli.hpp"

int main(int argc, char** argv) { return stochord::cli::main_entry(argc, argv); }
