#include "nasreg/cli.hpp"

int main(int argc, char** argv) { return nasreg::cli::run_cli(argc, argv); }
