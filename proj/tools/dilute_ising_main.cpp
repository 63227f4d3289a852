#include "dilute_ising/cli.hpp"

int main(int argc, char** argv) { return dising::cli::run(argc, argv); }
