#include "hcurlest/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return hcurlest::run_cli(argc, argv, std::cout, std::cerr); }
