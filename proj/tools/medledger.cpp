#include "medledger/cli/commands.hpp"

int main(int argc, char** argv) { return medledger::cli::run(argc, argv); }
