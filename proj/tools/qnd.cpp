#include "qnd/cli.hpp"

int main(int argc, char** argv) { return qnd::cli::main(argc, argv); }
