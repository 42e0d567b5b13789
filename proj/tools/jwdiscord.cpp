#include <iostream>

#include "jwdiscord/cli.hpp"

int main(int argc, char** argv) { return jwd::cli::main_entry(argc, argv, std::cout, std::cerr); }
