#include "evoctl/cli.hpp"

int main(int argc, char** argv) { return evoctl::run_cli(argc, argv); }
