#include "cli.hpp"

int main(int argc, char** argv) { return mutgen::cli::main_entry(argc, argv); }
