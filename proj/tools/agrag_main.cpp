#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return agrag::cli::dispatch(argc, argv, std::cout, std::cerr); }
