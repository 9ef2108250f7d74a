#include "commands.hpp"

int main(int argc, char** argv) { return battdiag::cli::run_cli(argc, argv); }
